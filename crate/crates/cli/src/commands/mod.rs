//! One module per subcommand family. Each `run_*` entry takes already
//! parsed flag values plus the loaded config file, resolves parameters
//! (flags win), validates them, computes in memory, and only then writes
//! CSVs, reports, and manifests through the run context.

pub mod clg;
pub mod dissim;
pub mod dtc;
pub mod transport;

use dissim_core::fit;

/// Ensemble summary of one scalar metric.
#[derive(Debug, Clone, Copy)]
pub struct Stat {
    pub mean: f64,
    pub std: f64,
    pub stderr: f64,
}

impl Stat {
    pub fn from_samples(samples: &[f64]) -> Stat {
        let (mean, std) = fit::mean_std(samples);
        Stat {
            mean,
            std,
            stderr: std / (samples.len() as f64).sqrt(),
        }
    }
}
