//! Statistics over decoder outputs and attributions.

pub mod correlation;
pub mod fit;
pub mod monitor;
pub mod wilson;

use thiserror::Error;

use crate::circuit::Channel;

pub use correlation::{attribution_correlations, hook_excess, CorrelationReport, HookSignatureSet, SignaturePair};
pub use monitor::{ft_monitor, monitor_epoch, MonitorRow, MonitorSetup};
pub use fit::{fit_infidelity, fit_scaling, infidelity, FitResult};
pub use wilson::{wilson_interval, WilsonInterval};

#[derive(Debug, Error, PartialEq)]
pub enum AnalysisError {
    #[error("invalid counts k={k}, n={n}")]
    Counts { k: u64, n: u64 },
    #[error("need at least {need} points, got {got}")]
    TooFewPoints { got: usize, need: usize },
    #[error("nonpositive value {0} in a log-log fit")]
    NonPositive(f64),
    #[error("degenerate input")]
    Degenerate,
    #[error("fit did not converge")]
    NoConvergence,
    #[error("ragged attribution grids")]
    Shape,
    #[error("channel {0} not among the attributed channels")]
    MissingChannel(Channel),
    #[error("report has lag {report}, pair has lag {pair}")]
    Lag { report: isize, pair: isize },
}
