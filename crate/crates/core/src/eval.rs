//! Monte-Carlo logical error rates from prefix infidelity curves.
//!
//! One T-round run is scored after every round t ≤ T against the ideal
//! readout label at that point, which yields the whole curve 𝓘(t) from one
//! set of trajectories.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{fit_infidelity, wilson_interval, AnalysisError, FitResult, WilsonInterval};
use crate::decoder::Decoder;
use crate::noise::{NoiseModel, ShotStreams};
use crate::sim::{SampledNoise, Simulator};
use crate::steane::Basis;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoundPoint {
    pub t: usize,
    pub failures: u64,
    pub shots: u64,
    pub interval: WilsonInterval,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfidelityCurve {
    pub p_ph: f64,
    pub basis: Basis,
    pub points: Vec<RoundPoint>,
}

/// Per-round logical error rate read off a curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogicalRate {
    pub p_l: f64,
    pub std_err: f64,
    pub t0: f64,
}

impl InfidelityCurve {
    pub fn fit(&self) -> Result<FitResult, AnalysisError> {
        fit_infidelity(&self.points.iter().map(|p| (p.t as f64, p.interval.p_hat)).collect::<Vec<_>>())
    }

    /// Fitted rate when the curve has three or more points. A shorter curve
    /// is inverted at its last point with t0 = 0.
    pub fn logical_rate(&self) -> Option<LogicalRate> {
        if self.points.len() >= 3 {
            let f = self.fit().ok()?;
            return Some(LogicalRate { p_l: f.p_l(), std_err: f.std_err(0), t0: f.t0() });
        }
        let last = self.points.last()?;
        let t = last.t as f64;
        let invert = |i: f64| 0.5 * (1.0 - (1.0 - 2.0 * i.clamp(0.0, 0.5)).powf(1.0 / t));
        let p_l = invert(last.interval.p_hat);
        let std_err = 0.5 * (invert(last.interval.p_hat + last.interval.sigma) - invert(last.interval.p_hat - last.interval.sigma));
        Some(LogicalRate { p_l, std_err, t0: 0.0 }).filter(|r| r.p_l.is_finite())
    }
}

/// Decodes `shots` runs of `rounds` cycles and counts failures for every
/// prefix of at least `first_round` rounds.
#[allow(clippy::too_many_arguments)]
pub fn infidelity_curve(
    decoder: &dyn Decoder,
    sim: &Simulator,
    noise: NoiseModel,
    basis: Basis,
    first_round: usize,
    rounds: usize,
    shots: u64,
    streams: ShotStreams,
) -> InfidelityCurve {
    let first_round = first_round.clamp(1, rounds.max(1));
    let failures = (0..shots)
        .into_par_iter()
        .map(|i| {
            let mut rng = streams.shot(i);
            let mut source = SampledNoise { noise, rng: &mut rng };
            let traj = sim.trajectory(basis, rounds, 0, &mut source);
            (first_round..=rounds)
                .map(|t| {
                    let predicted = decoder.predict(&traj.volume.truncated(t), basis);
                    (predicted != sim.label_of(traj.data_after_round[t - 1], basis)) as u64
                })
                .collect::<Vec<u64>>()
        })
        .reduce(|| vec![0; rounds + 1 - first_round], |a, b| a.iter().zip(&b).map(|(x, y)| x + y).collect());
    let points = failures
        .iter()
        .enumerate()
        .map(|(i, &k)| RoundPoint {
            t: i + first_round,
            failures: k,
            shots,
            interval: wilson_interval(k, shots.max(1), 1.0).expect("k ≤ shots"),
        })
        .collect();
    InfidelityCurve { p_ph: noise.p_ph(), basis, points }
}

/// Failure rate of a decoder at one fixed round count.
pub fn failure_rate(
    decoder: &dyn Decoder,
    sim: &Simulator,
    noise: NoiseModel,
    basis: Basis,
    rounds: usize,
    shots: u64,
    streams: ShotStreams,
) -> WilsonInterval {
    let k: u64 = (0..shots)
        .into_par_iter()
        .map(|i| {
            let mut rng = streams.shot(i);
            let s = sim.sample(noise, rounds, basis, false, &mut rng);
            (decoder.predict(&s.volume, basis) != s.label()) as u64
        })
        .sum();
    wilson_interval(k, shots.max(1), 1.0).expect("k ≤ shots")
}
