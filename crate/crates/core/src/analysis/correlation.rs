//! Lagged Pearson correlations between attribution channels and the
//! hook-signature pair sets they are read against.

use serde::{Deserialize, Serialize};

use super::AnalysisError;
use crate::circuit::{hook_location, Channel, LocalPauli, SinglePauli};
use crate::dep::FaultInjection;
use crate::sim::Simulator;
use crate::steane::{Basis, StabilizerKind};

/// Attribution grid of one sample: one row of channel values per round.
pub type Grid = Vec<Vec<f64>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    /// Channel `b` is taken `lag` rounds after channel `a`.
    pub lag: isize,
    /// `matrix[a][b]` = corr(a at t, b at t + lag).
    pub matrix: Vec<Vec<f64>>,
    /// Channels whose values never vary; their rows and columns are 0.
    pub zero_variance: Vec<bool>,
    pub samples: usize,
    /// Number of (t, t + lag) pairs pooled per entry.
    pub pairs: usize,
}

impl CorrelationReport {
    pub fn channels(&self) -> usize {
        self.matrix.len()
    }

    /// Off-diagonal entries sorted by decreasing value, each unordered pair
    /// once (the larger of the two orientations at nonzero lag).
    pub fn top_pairs(&self, k: usize) -> Vec<(usize, usize, f64)> {
        let n = self.channels();
        let mut entries: Vec<(usize, usize, f64)> = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                let (v, a2, b2) = if self.matrix[a][b] >= self.matrix[b][a] { (self.matrix[a][b], a, b) } else { (self.matrix[b][a], b, a) };
                entries.push((a2, b2, v));
            }
        }
        entries.sort_by(|x, y| y.2.total_cmp(&x.2));
        entries.truncate(k);
        entries
    }
}

/// Pearson correlation of channel pairs pooled over samples and all rounds
/// where both ends of the lag exist.
pub fn attribution_correlations(grids: &[Grid], lag: isize) -> Result<CorrelationReport, AnalysisError> {
    if grids.len() < 2 {
        return Err(AnalysisError::TooFewPoints { got: grids.len(), need: 2 });
    }
    let n = grids.iter().find_map(|g| g.first().map(|r| r.len())).ok_or(AnalysisError::Degenerate)?;
    let shift = lag.unsigned_abs();
    let mut pairs: Vec<(&[f64], &[f64])> = Vec::new();
    for g in grids {
        if g.iter().any(|r| r.len() != n) {
            return Err(AnalysisError::Shape);
        }
        for t in 0..g.len().saturating_sub(shift) {
            let (early, late) = (&g[t][..], &g[t + shift][..]);
            pairs.push(if lag >= 0 { (early, late) } else { (late, early) });
        }
    }
    if pairs.len() < 2 {
        return Err(AnalysisError::TooFewPoints { got: pairs.len(), need: 2 });
    }
    let m = pairs.len() as f64;
    let mean = |side: usize, c: usize| pairs.iter().map(|p| if side == 0 { p.0[c] } else { p.1[c] }).sum::<f64>() / m;
    let mean_a: Vec<f64> = (0..n).map(|c| mean(0, c)).collect();
    let mean_b: Vec<f64> = (0..n).map(|c| mean(1, c)).collect();
    let var = |side: usize, c: usize, mu: f64| pairs.iter().map(|p| (if side == 0 { p.0[c] } else { p.1[c] } - mu).powi(2)).sum::<f64>();
    let var_a: Vec<f64> = (0..n).map(|c| var(0, c, mean_a[c])).collect();
    let var_b: Vec<f64> = (0..n).map(|c| var(1, c, mean_b[c])).collect();
    let tiny = |v: f64| v <= 1e-300;
    let mut matrix = vec![vec![0.0; n]; n];
    for a in 0..n {
        for b in 0..n {
            if tiny(var_a[a]) || tiny(var_b[b]) {
                continue;
            }
            let cov: f64 = pairs.iter().map(|p| (p.0[a] - mean_a[a]) * (p.1[b] - mean_b[b])).sum();
            matrix[a][b] = (cov / (var_a[a] * var_b[b]).sqrt()).clamp(-1.0, 1.0);
        }
    }
    let zero_variance = (0..n).map(|c| tiny(var_a[c]) || tiny(var_b[c])).collect();
    Ok(CorrelationReport { lag, matrix, zero_variance, samples: grids.len(), pairs: pairs.len() })
}

/// One flag/syndrome pair: the flag at round t and the syndrome increment at
/// round t + lag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SignaturePair {
    pub flag: Channel,
    pub syndrome: Channel,
    pub lag: isize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HookSignatureSet {
    pub hook: Vec<SignaturePair>,
    pub baseline: Vec<SignaturePair>,
}

/// Flag/syndrome signatures of the weight-2 hook of every plaquette of
/// `plaquette_kind`, found by injecting the fault and reading the volume.
pub fn derive_hook_pairs(sim: &Simulator, plaquette_kind: StabilizerKind) -> Vec<SignaturePair> {
    let basis = match plaquette_kind {
        StabilizerKind::X => Basis::Z,
        StabilizerKind::Z => Basis::X,
    };
    let detector = match plaquette_kind {
        StabilizerKind::X => StabilizerKind::Z,
        StabilizerKind::Z => StabilizerKind::X,
    };
    (0..3)
        .flat_map(|k| {
            let fault = FaultInjection {
                cycle: 1,
                location: hook_location(plaquette_kind, k, 1),
                pauli: LocalPauli(SinglePauli::X, SinglePauli::I),
            };
            let traj = sim.trajectory(basis, 1, 1, &mut { fault });
            let flag = Channel::flag(plaquette_kind, k);
            assert!(traj.volume.bit(0, flag), "hook fault must raise its flag");
            let mut found = Vec::new();
            for t in 0..traj.volume.num_rounds() {
                for j in 0..3 {
                    let s = Channel::syndrome(detector, j);
                    if traj.volume.bit(t, s) {
                        found.push(SignaturePair { flag, syndrome: s, lag: t as isize });
                    }
                }
            }
            found
        })
        .collect()
}

impl HookSignatureSet {
    /// Hook pairs plus, as baseline, every other (flag, syndrome) pair of the
    /// same families at the hooks' lag.
    pub fn new(hook: Vec<SignaturePair>) -> Self {
        let mut baseline = Vec::new();
        if let Some(first) = hook.first() {
            for i in 0..3 {
                for j in 0..3 {
                    let p = SignaturePair {
                        flag: Channel::flag(first.flag.kind(), i),
                        syndrome: Channel::syndrome(first.syndrome.kind(), j),
                        lag: first.lag,
                    };
                    if !hook.iter().any(|h| h.flag == p.flag && h.syndrome == p.syndrome) {
                        baseline.push(p);
                    }
                }
            }
        }
        Self { hook, baseline }
    }

    pub fn for_plaquettes(sim: &Simulator, plaquette_kind: StabilizerKind) -> Self {
        Self::new(derive_hook_pairs(sim, plaquette_kind))
    }
}

/// Mean correlation over the hook pairs and over the baseline pairs.
/// `channels` maps report indices to circuit channels.
pub fn hook_excess(report: &CorrelationReport, set: &HookSignatureSet, channels: &[Channel]) -> Result<(f64, f64), AnalysisError> {
    let index = |c: Channel| channels.iter().position(|&x| x == c).ok_or(AnalysisError::MissingChannel(c));
    let mean = |pairs: &[SignaturePair]| -> Result<f64, AnalysisError> {
        if pairs.is_empty() {
            return Ok(0.0);
        }
        let mut s = 0.0;
        for p in pairs {
            if p.lag != report.lag {
                return Err(AnalysisError::Lag { report: report.lag, pair: p.lag });
            }
            s += report.matrix[index(p.flag)?][index(p.syndrome)?];
        }
        Ok(s / pairs.len() as f64)
    };
    Ok((mean(&set.hook)?, mean(&set.baseline)?))
}
