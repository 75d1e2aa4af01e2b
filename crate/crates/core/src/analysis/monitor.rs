//! Per-epoch tracking of how a neural decoder learns fault tolerance.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dep::dep_report;
use crate::eval::infidelity_curve;
use crate::neural::{NeuralDecoder, NeuralKind};
use crate::nn::{Checkpoint, Sequence};
use crate::noise::{NoiseModel, ShotStreams};
use crate::sim::Simulator;
use crate::steane::{Basis, StabilizerKind};
use crate::xai::{BackgroundSet, DeepShap};

use super::{attribution_correlations, fit_scaling, hook_excess, HookSignatureSet};

/// Held-out data and noise sweep shared by every epoch.
#[derive(Debug, Clone)]
pub struct MonitorSetup {
    pub kind: NeuralKind,
    pub p_sweep: Vec<f64>,
    pub rounds: usize,
    pub shots: u64,
    pub seed: u64,
    /// Inputs whose attributions feed the hook correlation.
    pub explained: Vec<Sequence>,
    pub background: BackgroundSet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonitorRow {
    pub epoch: u64,
    pub train_loss: f64,
    /// (p_ph, fitted p_L) for every swept error rate.
    pub logical_rates: Vec<(f64, Option<f64>)>,
    /// Exponent of p_L ∝ p_ph^b, given two or more positive rates.
    pub exponent: Option<f64>,
    pub dep_failure: f64,
    pub hook_mean: f64,
    pub baseline_mean: f64,
}

impl MonitorRow {
    pub const HEADER: &'static str = "epoch\ttrain_loss\texponent\tdep_failure\thook_mean\tbaseline_mean\tlogical_rates";

    pub fn to_tsv(&self) -> String {
        let rates: Vec<String> = self.logical_rates.iter().map(|(p, l)| format!("{p:e}:{}", l.map_or("-".into(), |l| format!("{l:.6e}")))).collect();
        format!(
            "{}\t{:.6}\t{}\t{:.6}\t{:.4}\t{:.4}\t{}",
            self.epoch,
            self.train_loss,
            self.exponent.map_or("-".into(), |b| format!("{b:.4}")),
            self.dep_failure,
            self.hook_mean,
            self.baseline_mean,
            rates.join(",")
        )
    }
}

/// Basis whose readout is scored: the first output head.
fn scored_basis(kind: NeuralKind) -> Basis {
    kind.heads()[0]
}

pub fn monitor_epoch(sim: &Simulator, setup: &MonitorSetup, ckpt: &Checkpoint) -> Result<MonitorRow, Box<dyn std::error::Error + Send + Sync>> {
    let basis = scored_basis(setup.kind);
    let decoder = NeuralDecoder::new(setup.kind, ckpt.network.clone())?;
    let streams = ShotStreams::new(setup.seed);
    let mut logical_rates = Vec::with_capacity(setup.p_sweep.len());
    for (i, &p) in setup.p_sweep.iter().enumerate() {
        let first = setup.kind.fixed_rounds().unwrap_or(1);
        let curve = infidelity_curve(&decoder, sim, NoiseModel::new(p)?, basis, first, setup.rounds, setup.shots, streams.derive(i as u64));
        let p_l = curve.logical_rate().map(|r| r.p_l);
        logical_rates.push((p, p_l));
    }
    let positive: Vec<(f64, f64)> = logical_rates.iter().filter_map(|&(p, l)| l.filter(|&l| l > 0.0).map(|l| (p, l))).collect();
    let exponent = if positive.len() >= 2 { fit_scaling(&positive).ok().map(|f| f.b()) } else { None };
    let dep_failure = dep_report(&decoder, sim, basis, 2).fraction();

    let plaquettes = match basis {
        Basis::Z => StabilizerKind::X,
        Basis::X => StabilizerKind::Z,
    };
    let set = HookSignatureSet::for_plaquettes(sim, plaquettes);
    let lag = set.hook.first().map_or(0, |p| p.lag);
    let head = decoder.head(basis).expect("scored basis has a head");
    let mut by_len: std::collections::BTreeMap<usize, Vec<&Sequence>> = Default::default();
    for x in &setup.explained {
        by_len.entry(x.len()).or_default().push(x);
    }
    let mut grids = Vec::with_capacity(setup.explained.len());
    for (t, xs) in by_len {
        let explainer = DeepShap::new(&decoder.network, head, &setup.background, t)?;
        let part: Result<Vec<_>, _> = xs.par_iter().map(|x| explainer.explain(x).map(|a| a.phi)).collect();
        grids.extend(part?);
    }
    let report = attribution_correlations(&grids, lag)?;
    let (hook_mean, baseline_mean) = hook_excess(&report, &set, &decoder.channels)?;
    Ok(MonitorRow { epoch: ckpt.epoch, train_loss: ckpt.train_loss, logical_rates, exponent, dep_failure, hook_mean, baseline_mean })
}

/// Evaluates every checkpoint, in epoch order.
pub fn ft_monitor(sim: &Simulator, setup: &MonitorSetup, checkpoints: &[Checkpoint]) -> Result<Vec<MonitorRow>, Box<dyn std::error::Error + Send + Sync>> {
    let mut sorted: Vec<&Checkpoint> = checkpoints.iter().collect();
    sorted.sort_by_key(|c| c.epoch);
    sorted.into_iter().map(|c| monitor_epoch(sim, setup, c)).collect()
}
