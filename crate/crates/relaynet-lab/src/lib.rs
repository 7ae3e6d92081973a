//! Batch experiments on top of `relaynet`: config files, text formats,
//! pipelines of composition levels and parallel adversary sweeps with CSV
//! output.

pub mod config;
pub mod io;
pub mod pipeline;
pub mod sweep;

pub use config::ExperimentConfig;
pub use pipeline::{build_pipeline, Pipeline};
pub use sweep::{run_sweep, Row, CSV_HEADER};

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("{}", located(origin, *line, msg))]
    Parse { origin: String, line: usize, msg: String },
    #[error("{0}: {1}")]
    Io(String, #[source] std::io::Error),
    #[error(transparent)]
    Net(#[from] relaynet::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    /// A sweep found runs disagreeing with their reference or breaking a bound.
    #[error("{0} invariant violations")]
    Violations(u64),
}

fn located(origin: &str, line: usize, msg: &str) -> String {
    if line == 0 {
        format!("{origin}: {msg}")
    } else {
        format!("{origin}:{line}: {msg}")
    }
}

impl LabError {
    /// A located input error; `line` 0 when there is no line to point at.
    pub fn parse(origin: &str, line: usize, msg: impl Into<String>) -> LabError {
        LabError::Parse { origin: origin.to_string(), line, msg: msg.into() }
    }

    /// Process exit code: 1 for bad input, 2 for an exceeded budget, 3 for
    /// detected invariant violations.
    pub fn exit_code(&self) -> i32 {
        fn budget(e: &relaynet::Error) -> bool {
            match e {
                relaynet::Error::Budget { .. } => true,
                relaynet::Error::Level { source, .. } => budget(source),
                _ => false,
            }
        }
        match self {
            LabError::Net(e) if budget(e) => 2,
            LabError::Violations(_) => 3,
            _ => 1,
        }
    }
}
