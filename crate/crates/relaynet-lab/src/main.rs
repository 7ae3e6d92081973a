use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use relaynet::adversary::{AdversaryWire, Behavior, BehaviorRule};
use relaynet::graph::{replacement_product, Multiplicity, ProductOptions};
use relaynet::protocols::probe;
use relaynet_lab::config::GraphSpec;
use relaynet_lab::sweep::{run_trial, write_csv};
use relaynet_lab::{build_pipeline, io, run_sweep, ExperimentConfig, LabError, Pipeline, Row};

#[derive(Parser)]
#[command(name = "relaynet", version, about = "Replacement-product routing under edge faults")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build G ∘ H and write it in graph format.
    Build {
        #[arg(long)]
        g: String,
        #[arg(long)]
        h: String,
        /// `balanced` or `single`.
        #[arg(long, default_value = "balanced")]
        multiplicity: String,
        /// Write here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build a tower, compose its top level and print the level shapes.
    Compose {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Also route every pair without faults and report delivery.
        #[arg(long)]
        route: bool,
    },
    /// Run the adversary sweep and write CSV.
    Sweep {
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Classify one corruption set, route every pair under it and report.
    Verify {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Corruption file (`edge copy` lines) for the top network.
        #[arg(long)]
        corruption: PathBuf,
        #[arg(long, default_value = "drop")]
        behavior: String,
        /// Write the report here instead of stdout.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Write the physical transcript of every corrupted copy here.
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// Build, compose and sweep, with timings on stderr.
    Pipeline {
        #[command(flatten)]
        cfg: ConfigArgs,
    },
}

/// Flags mirroring the config keys; a config file overrides them.
#[derive(Args)]
struct ConfigArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    base: Option<String>,
    #[arg(long)]
    flood_rounds: Option<u32>,
    /// One level, repeatable: `h=SPEC[,inner_rounds=N][,relays=S][,relay_seed=N][,multiplicity=M]`.
    #[arg(long = "level")]
    levels: Vec<String>,
    #[arg(long, value_delimiter = ',')]
    strategies: Vec<String>,
    #[arg(long, value_delimiter = ',')]
    epsilons: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    behaviors: Vec<String>,
    #[arg(long, value_delimiter = ',')]
    menu: Vec<String>,
    #[arg(long)]
    seeds: Option<u64>,
    #[arg(long)]
    seed_base: Option<u64>,
    #[arg(long)]
    exhaustive_k: Option<usize>,
    #[arg(long)]
    budget: Option<u64>,
    #[arg(long)]
    message_len: Option<u32>,
    #[arg(long)]
    perm_seed: Option<u64>,
    #[arg(long)]
    oracle: bool,
    #[arg(long)]
    timing: bool,
    #[arg(long)]
    no_memo: bool,
    #[arg(long)]
    exact_limit: Option<usize>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    csv: Option<PathBuf>,
}

fn level_table(s: &str) -> Result<toml::Table, LabError> {
    let mut t = toml::Table::new();
    for part in s.split(',') {
        let (k, v) = part.split_once('=').ok_or_else(|| LabError::parse("flags", 0, format!("bad level field `{part}`")))?;
        let value = match k {
            "h" | "multiplicity" => toml::Value::String(v.to_string()),
            "inner_rounds" | "relays" | "relay_seed" | "max_cloud_factor" => {
                toml::Value::Integer(v.parse().map_err(|_| LabError::parse("flags", 0, format!("bad number `{v}`")))?)
            }
            _ => return Err(LabError::parse("flags", 0, format!("unknown level field `{k}`"))),
        };
        t.insert(k.to_string(), value);
    }
    Ok(t)
}

impl ConfigArgs {
    fn table(&self) -> Result<toml::Table, LabError> {
        fn put(t: &mut toml::Table, k: &str, v: Option<toml::Value>) {
            if let Some(v) = v {
                t.insert(k.to_string(), v);
            }
        }
        fn list<T: Clone + Into<toml::Value>>(v: &[T]) -> Option<toml::Value> {
            (!v.is_empty()).then(|| toml::Value::Array(v.iter().cloned().map(Into::into).collect()))
        }
        let int = |v: Option<u64>| v.map(|x| toml::Value::Integer(x as i64));
        let mut top = toml::Table::new();
        put(&mut top, "base", self.base.clone().map(Into::into));
        put(&mut top, "flood_rounds", int(self.flood_rounds.map(u64::from)));
        if !self.levels.is_empty() {
            let levels = self.levels.iter().map(|l| level_table(l).map(toml::Value::Table)).collect::<Result<_, _>>()?;
            top.insert("level".into(), toml::Value::Array(levels));
        }
        let mut adv = toml::Table::new();
        put(&mut adv, "strategies", list(&self.strategies));
        put(&mut adv, "epsilons", list(&self.epsilons));
        put(&mut adv, "behaviors", list(&self.behaviors));
        put(&mut adv, "menu", list(&self.menu));
        put(&mut adv, "seeds", int(self.seeds));
        put(&mut adv, "seed_base", int(self.seed_base));
        put(&mut adv, "exhaustive_k", int(self.exhaustive_k.map(|x| x as u64)));
        put(&mut adv, "budget", int(self.budget));
        let mut run = toml::Table::new();
        put(&mut run, "message_len", int(self.message_len.map(u64::from)));
        put(&mut run, "perm_seed", int(self.perm_seed));
        put(&mut run, "oracle", self.oracle.then_some(true.into()));
        put(&mut run, "timing", self.timing.then_some(true.into()));
        put(&mut run, "memo", self.no_memo.then_some(false.into()));
        put(&mut run, "exact_limit", int(self.exact_limit.map(|x| x as u64)));
        put(&mut run, "workers", int(self.workers.map(|x| x as u64)));
        let mut out = toml::Table::new();
        put(&mut out, "csv", self.csv.as_ref().map(|p| p.display().to_string().into()));
        for (k, t) in [("adversary", adv), ("run", run), ("output", out)] {
            if !t.is_empty() {
                top.insert(k.into(), t.into());
            }
        }
        Ok(top)
    }

    fn load(&self) -> Result<ExperimentConfig, LabError> {
        let flags = self.table()?;
        match &self.config {
            Some(path) => {
                let origin = path.display().to_string();
                let text = std::fs::read_to_string(path).map_err(|e| LabError::Io(origin.clone(), e))?;
                ExperimentConfig::from_layers(flags, Some((&text, &origin)))
            }
            None => ExperimentConfig::from_layers(flags, None),
        }
    }
}

fn write_out(path: Option<&PathBuf>, text: &str) -> Result<(), LabError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| LabError::Io(p.display().to_string(), e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn print_levels(p: &Pipeline) {
    for l in p.levels() {
        eprintln!("level {}: n {} degree {} copies {} rounds {} tick {}", l.level, l.n, l.degree, l.edges, l.rounds, l.tick);
    }
}

fn emit_rows(cfg: &ExperimentConfig, rows: &[Row]) -> Result<(), LabError> {
    match &cfg.output.csv {
        Some(p) => {
            let f = std::fs::File::create(p).map_err(|e| LabError::Io(p.display().to_string(), e))?;
            write_csv(rows, f)?;
        }
        None => write_csv(rows, std::io::stdout().lock())?,
    }
    let bad: u64 = rows.iter().map(|r| r.violations).sum();
    if bad > 0 {
        return Err(LabError::Violations(bad));
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), LabError> {
    match cli.cmd {
        Cmd::Build { g, h, multiplicity, out } => {
            let spec = |s: &str| GraphSpec::parse(s).map_err(|m| LabError::parse("flags", 0, m));
            let (g, h) = (spec(&g)?.build()?, spec(&h)?.build()?);
            let multiplicity = match multiplicity.as_str() {
                "balanced" => Multiplicity::Balanced,
                "single" => Multiplicity::Single,
                other => return Err(LabError::parse("flags", 0, format!("unknown multiplicity `{other}`"))),
            };
            let p = replacement_product(&g, &h, ProductOptions { multiplicity, ..ProductOptions::default() })?;
            eprintln!("n {} degree {} clouds {} super-edges {}", p.z.n(), p.z.max_degree(), p.clouds(), p.super_edges.len());
            write_out(out.as_ref(), &io::write_graph(&p.z))
        }
        Cmd::Compose { cfg, route } => {
            let cfg = cfg.load()?;
            let p = build_pipeline(&cfg)?;
            print_levels(&p);
            if route {
                let m = probe(cfg.run.message_len);
                let memo = cfg.run.memo.then(relaynet::composition::Memo::new);
                let (got, _) = p.set.route(&p.tower, m, cfg.run.message_len, &mut relaynet::engine::PerfectWire, memo.as_ref());
                let ok = got.iter().filter(|&&g| g == m).count();
                println!("delivered {ok} of {}", got.len());
                if ok != got.len() {
                    return Err(LabError::Violations((got.len() - ok) as u64));
                }
            }
            Ok(())
        }
        Cmd::Sweep { cfg } => {
            let cfg = cfg.load()?;
            let p = build_pipeline(&cfg)?;
            let rows = run_sweep(&p, &cfg)?;
            emit_rows(&cfg, &rows)
        }
        Cmd::Verify { cfg, corruption, behavior, report, dump } => {
            let cfg = cfg.load()?;
            let p = build_pipeline(&cfg)?;
            let origin = corruption.display().to_string();
            let text = std::fs::read_to_string(&corruption).map_err(|e| LabError::Io(origin.clone(), e))?;
            let set = io::read_corruption(p.tower.top(), &text, &origin)?;
            let b = Behavior::parse(&behavior).map_err(|_| LabError::parse("flags", 0, format!("unknown behavior `{behavior}`")))?;
            let result = run_trial(&p, &cfg, &set, BehaviorRule::Uniform(b));
            let outcomes: Vec<(usize, usize, bool)> = result.delivered.iter().enumerate().map(|(x, &ok)| (x, p.pi.apply(x), ok)).collect();
            let mut text = io::write_analysis(&result.analysis, Some(&outcomes));
            text.push_str(&format!("\n[summary]\nfail_frac {:.6}\n", result.fail_frac()));
            if cfg.run.oracle {
                text.push_str(&format!("oracle_checked {} violations {}\n", result.oracle_checked, result.violations));
            }
            write_out(report.as_ref(), &text)?;
            if let Some(path) = dump {
                let mut rule = BehaviorRule::Uniform(b);
                let mut wire = AdversaryWire::new(p.tower.top(), &set, &mut rule).with_dump();
                p.set.route(&p.tower, probe(cfg.run.message_len), cfg.run.message_len, &mut wire, None);
                write_out(Some(&path), &io::write_dump(wire.dump.as_deref().unwrap_or(&[])))?;
            }
            if result.violations > 0 {
                return Err(LabError::Violations(result.violations));
            }
            Ok(())
        }
        Cmd::Pipeline { cfg } => {
            let cfg = cfg.load()?;
            let clock = Instant::now();
            let p = build_pipeline(&cfg)?;
            eprintln!("built in {:.3} s", clock.elapsed().as_secs_f64());
            print_levels(&p);
            let rows = run_sweep(&p, &cfg)?;
            eprintln!("{} trials in {:.3} s", rows.len(), clock.elapsed().as_secs_f64());
            emit_rows(&cfg, &rows)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
