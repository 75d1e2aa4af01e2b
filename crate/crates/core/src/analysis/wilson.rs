//! Wilson score interval with fringe cutoffs and symmetrized error.

use serde::{Deserialize, Serialize};

use super::AnalysisError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WilsonInterval {
    pub p_hat: f64,
    pub p_min: f64,
    pub p_max: f64,
    /// Twice the larger one-sided deviation from `p_hat`.
    pub sigma: f64,
}

/// Interval for `k` successes in `n` trials at quantile² `z2` (1 for a
/// one-sigma interval). Counts within two (three for n > 40) of either end
/// pin the corresponding bound to 0 or 1.
pub fn wilson_interval(k: u64, n: u64, z2: f64) -> Result<WilsonInterval, AnalysisError> {
    if n == 0 || k > n {
        return Err(AnalysisError::Counts { k, n });
    }
    let nf = n as f64;
    let p_hat = k as f64 / nf;
    let centre = p_hat + z2 / (2.0 * nf);
    let spread = (z2 * (p_hat * (1.0 - p_hat) / nf + z2 / (4.0 * nf * nf))).sqrt();
    let norm = 1.0 + z2 / nf;
    let mut p_min = (centre - spread) / norm;
    let mut p_max = (centre + spread) / norm;
    let fringe = if n > 40 { 3 } else { 2 };
    if k <= fringe {
        p_min = 0.0;
    }
    if n - k <= fringe {
        p_max = 1.0;
    }
    let sigma = 2.0 * (p_hat - p_max).abs().max((p_hat - p_min).abs());
    Ok(WilsonInterval { p_hat, p_min, p_max, sigma })
}
