//! Adversary sweeps: one CSV row per (strategy, ε, behavior, seed), or per
//! enumerated adversary for the exhaustive strategy.

use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use relaynet::adversary::{exhaustive_adversary, sample_corruption, AdversaryWire, Behavior, BehaviorRule, CorruptionSet};
use relaynet::composition::{classify, erased_oracle, union_bound_terms, verify_simulation, CorruptionAnalysis, Memo, OuterSet};
use relaynet::protocols::probe;
use relaynet::Msg;
use serde::Serialize;

use crate::config::{ExperimentConfig, Spread};
use crate::pipeline::Pipeline;
use crate::LabError;

pub const CSV_HEADER: &str = "level,epsilon,strategy,behavior,seed,n_z,deg_z,fail_frac,doomed_frac,bad_cloud_frac,super_edge_frac,rounds,work,oracle_checked,violations,wall_ms";

/// One trial. `rounds` is the longest pair run, `work` the total over all
/// pair runs. `violations` counts oracle disagreements plus failed
/// union-bound checks; both stay 0 unless oracle checks are on.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Row {
    pub level: usize,
    pub epsilon: f64,
    pub strategy: String,
    pub behavior: String,
    pub seed: u64,
    pub n_z: usize,
    pub deg_z: usize,
    pub fail_frac: f64,
    pub doomed_frac: f64,
    pub bad_cloud_frac: f64,
    pub super_edge_frac: f64,
    pub rounds: u64,
    pub work: u64,
    pub oracle_checked: u64,
    pub violations: u64,
    pub wall_ms: u64,
}

/// What one trial measured, before labelling.
#[derive(Clone, Debug)]
pub struct TrialResult {
    pub analysis: CorruptionAnalysis,
    /// Per source `x`: did `π(x)` decode the message.
    pub delivered: Vec<bool>,
    pub rounds: u64,
    pub work: u64,
    pub oracle_checked: u64,
    pub violations: u64,
    /// The three union-bound terms, when oracle checks ran.
    pub union_terms: Option<[f64; 3]>,
    /// The failing share exceeded the sum of the terms.
    pub union_breach: bool,
}

impl TrialResult {
    pub fn fail_frac(&self) -> f64 {
        self.delivered.iter().filter(|&&d| !d).count() as f64 / self.delivered.len() as f64
    }
}

/// Route every pair of `p` under `set` and `rule`, classify the
/// corruption, and with `run.oracle` compare every run against its erased
/// reference and check the union bound.
pub fn run_trial(p: &Pipeline, cfg: &ExperimentConfig, set: &CorruptionSet, mut rule: BehaviorRule) -> TrialResult {
    let t = &p.tower;
    let z = t.top();
    let len = cfg.run.message_len;
    let m = probe(len);
    let analysis = classify(t, set, &mut rule, &cfg.menu(), len, cfg.run.exact_limit);
    let memo = (cfg.run.memo && rule.is_oblivious()).then(Memo::new);
    let (got, counters) = {
        let mut wire = AdversaryWire::new(z, set, &mut rule);
        p.set.route(t, m, len, &mut wire, memo.as_ref())
    };
    let delivered: Vec<bool> = got.iter().map(|&g| g == m).collect();
    let mut r = TrialResult {
        analysis,
        delivered,
        rounds: counters.iter().map(|c| c.rounds).max().unwrap_or(0),
        work: counters.iter().map(|c| c.work).sum(),
        oracle_checked: 0,
        violations: 0,
        union_terms: None,
        union_breach: false,
    };
    if cfg.run.oracle {
        oracle_checks(p, set, &mut rule, m, len, &mut r);
    }
    r
}

fn oracle_checks(p: &Pipeline, set: &CorruptionSet, rule: &mut BehaviorRule, m: Msg, len: u32, r: &mut TrialResult) {
    let t = &p.tower;
    let prod = &t.levels[0].product;
    let erased = r.analysis.erased_outer_copies(t);
    let mut outer_ok = Vec::with_capacity(p.pi.len());
    for x in 0..p.pi.len() {
        let OuterSet::Flood(fs) = p.set.outer_of(x) else { unreachable!("single level") };
        let (u, _) = prod.split(x);
        let (v, _) = prod.split(p.pi.apply(x));
        let oracle = erased_oracle(&t.base, fs, &erased, u, m);
        outer_ok.push(oracle.delivers(v, m));
        let mut wire = AdversaryWire::new(t.top(), set, rule);
        let trace = p.set.trace_source(t, x, m, len, &mut wire);
        let rep = verify_simulation(t, &trace, &oracle, &r.analysis, m);
        r.oracle_checked += rep.checked;
        r.violations += rep.violations.len() as u64;
    }
    let terms = union_bound_terms(t, &p.set, &r.analysis, &outer_ok);
    r.union_breach = r.fail_frac() > terms.iter().sum::<f64>() + 1e-12;
    r.violations += r.union_breach as u64;
    r.union_terms = Some(terms);
}

enum Plan {
    Sampled { spread: usize, eps: usize, behavior: usize, seed: u64 },
    Exhaustive { index: u64, set: CorruptionSet, rule: Vec<(usize, Behavior)> },
}

fn plan(p: &Pipeline, cfg: &ExperimentConfig) -> Result<Vec<Plan>, LabError> {
    let a = &cfg.adversary;
    let mut plans = Vec::new();
    for (si, spread) in cfg.spreads().into_iter().enumerate() {
        match spread {
            Spread::Sampled(_) => {
                for ei in 0..a.epsilons.len() {
                    for bi in 0..a.behaviors.len() {
                        for s in 0..a.seeds {
                            plans.push(Plan::Sampled { spread: si, eps: ei, behavior: bi, seed: a.seed_base + s });
                        }
                    }
                }
            }
            Spread::Exhaustive => {
                let menu = cfg.menu();
                let all = exhaustive_adversary(p.tower.top(), a.exhaustive_k, &menu, a.budget as u128)?;
                for (index, (set, rule)) in all.enumerate() {
                    let BehaviorRule::PerCopy(rule) = rule else { unreachable!("enumeration yields per-copy rules") };
                    plans.push(Plan::Exhaustive { index: index as u64, set, rule });
                }
            }
        }
    }
    Ok(plans)
}

fn execute(p: &Pipeline, cfg: &ExperimentConfig, plan: &Plan) -> Result<Row, LabError> {
    let clock = Instant::now();
    let z = p.tower.top();
    let spreads = cfg.spreads();
    let behaviors = cfg.behaviors();
    let (epsilon, strategy, behavior, seed, result) = match plan {
        Plan::Sampled { spread, eps, behavior, seed } => {
            let Spread::Sampled(strategy) = spreads[*spread] else { unreachable!() };
            let e = cfg.adversary.epsilons[*eps];
            let set = sample_corruption(z, Some(&p.tower.levels.last().expect("levels").product), e, strategy, *seed)?;
            let b: Behavior = behaviors[*behavior];
            let result = run_trial(p, cfg, &set, BehaviorRule::Uniform(b));
            (e, strategy.name().to_string(), b.name().to_string(), *seed, result)
        }
        Plan::Exhaustive { index, set, rule } => {
            let rule = BehaviorRule::PerCopy(rule.clone());
            let label = rule.label();
            let result = run_trial(p, cfg, set, rule);
            (set.fraction(), Spread::Exhaustive.name(cfg.adversary.exhaustive_k), label, *index, result)
        }
    };
    let a = &result.analysis;
    Ok(Row {
        level: p.tower.depth(),
        epsilon,
        strategy,
        behavior,
        seed,
        n_z: z.n(),
        deg_z: z.max_degree(),
        fail_frac: result.fail_frac(),
        doomed_frac: a.doomed_fraction(),
        bad_cloud_frac: a.bad_cloud_fraction(),
        super_edge_frac: a.super_edge_fraction(),
        rounds: result.rounds,
        work: result.work,
        oracle_checked: result.oracle_checked,
        violations: result.violations,
        wall_ms: if cfg.run.timing { clock.elapsed().as_millis() as u64 } else { 0 },
    })
}

/// Run every trial of the sweep on `run.workers` threads. Rows come back
/// in trial order (strategy, ε, behavior, seed as listed in the config),
/// whatever order the trials finish in.
pub fn run_sweep(p: &Pipeline, cfg: &ExperimentConfig) -> Result<Vec<Row>, LabError> {
    let plans = plan(p, cfg)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.run.workers)
        .build()
        .map_err(|e| LabError::parse("run", 0, format!("worker pool: {e}")))?;
    pool.install(|| plans.par_iter().map(|plan| execute(p, cfg, plan)).collect())
}

pub fn write_csv<W: Write>(rows: &[Row], out: W) -> Result<(), LabError> {
    let mut w = csv::Writer::from_writer(out);
    if rows.is_empty() {
        w.write_record(CSV_HEADER.split(','))?;
    }
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| LabError::Io("csv".into(), e))?;
    Ok(())
}

pub fn csv_string(rows: &[Row]) -> Result<String, LabError> {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv is utf-8"))
}
