//! Run configuration: one TOML file with a default for every setting.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::dataset::BasisMix;
use crate::neural::NeuralKind;
use crate::nn::TrainConfig;
use crate::xai::{InputRule, LrpRule};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("invalid config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub out_dir: PathBuf,
    pub code: String,
    /// Neural decoder trained and explained by this run.
    pub network: NeuralKind,
    pub data: DataConfig,
    pub train: TrainSection,
    pub eval: EvalConfig,
    pub explain: ExplainConfig,
    pub monitor: MonitorConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataConfig {
    pub p_ph: f64,
    pub min_rounds: u32,
    pub max_rounds: u32,
    /// Initial-state families; defaults to the network's heads.
    pub basis: Option<BasisMix>,
    pub train_shots: u64,
    pub validation_shots: u64,
    pub test_shots: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainSection {
    pub batch_size: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    /// Stop once a checkpoint passes the single-fault benchmark.
    pub stop_at_dep_pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    pub p_sweep: Vec<f64>,
    pub rounds: usize,
    pub shots: u64,
    /// Readout basis scored for decoders that serve both.
    pub basis: crate::steane::Basis,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExplainMethod {
    Deepshap,
    Exact,
    Lrp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExplainConfig {
    pub method: ExplainMethod,
    pub background: usize,
    pub samples: usize,
    pub lrp_rule: LrpRule,
    pub lrp_input_rule: InputRule,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MonitorConfig {
    pub p_sweep: Vec<f64>,
    pub rounds: usize,
    pub shots: u64,
    pub explained: usize,
    pub background: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            out_dir: PathBuf::from("out"),
            code: "steane".into(),
            network: NeuralKind::SrnnX,
            data: DataConfig::default(),
            train: TrainSection::default(),
            eval: EvalConfig::default(),
            explain: ExplainConfig::default(),
            monitor: MonitorConfig::default(),
        }
    }
}

impl Default for DataConfig {
    fn default() -> Self {
        Self { p_ph: 2e-3, min_rounds: 1, max_rounds: 8, basis: None, train_shots: 100_000, validation_shots: 10_000, test_shots: 10_000 }
    }
}

impl Default for TrainSection {
    fn default() -> Self {
        Self { batch_size: 64, learning_rate: 1e-3, epochs: 50, stop_at_dep_pass: false }
    }
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self { p_sweep: vec![1e-3, 2e-3, 5e-3], rounds: 8, shots: 20_000, basis: crate::steane::Basis::Z }
    }
}

impl Default for ExplainConfig {
    fn default() -> Self {
        Self { method: ExplainMethod::Deepshap, background: 1000, samples: 2000, lrp_rule: LrpRule::default(), lrp_input_rule: InputRule::default() }
    }
}

impl Default for MonitorConfig {
    fn default() -> Self {
        Self { p_sweep: vec![1e-3, 2e-3, 5e-3], rounds: 8, shots: 5000, explained: 500, background: 100 }
    }
}

fn digest(parts: &[&dyn erased::Hashable]) -> [u8; 32] {
    let mut h = Sha256::new();
    for p in parts {
        h.update(p.canonical());
        h.update([0u8]);
    }
    h.finalize().into()
}

mod erased {
    pub trait Hashable {
        fn canonical(&self) -> Vec<u8>;
    }
    impl<T: serde::Serialize> Hashable for T {
        fn canonical(&self) -> Vec<u8> {
            serde_json::to_vec(self).expect("config values serialize")
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.into(), source })?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: &str| Err(ConfigError::Invalid(m.into()));
        if self.code != "steane" {
            return bad("only the steane code is supported");
        }
        let probability = |p: f64| (0.0..=1.0 / 3.0).contains(&p);
        if !probability(self.data.p_ph) || !self.eval.p_sweep.iter().chain(&self.monitor.p_sweep).all(|&p| probability(p)) {
            return bad("error rates must lie in [0, 1/3]");
        }
        if self.data.min_rounds == 0 || self.data.min_rounds > self.data.max_rounds || self.data.max_rounds > u16::MAX as u32 {
            return bad("need 1 ≤ min_rounds ≤ max_rounds");
        }
        if self.train.batch_size == 0 || self.train.learning_rate.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
            return bad("batch size and learning rate must be positive");
        }
        if self.eval.rounds == 0 || self.monitor.rounds == 0 {
            return bad("round counts must be positive");
        }
        if self.explain.background == 0 || self.monitor.background == 0 {
            return bad("background sets must be non-empty");
        }
        Ok(())
    }

    /// Round range actually sampled: fixed-input networks force theirs.
    pub fn rounds(&self) -> (u32, u32) {
        match self.network.fixed_rounds() {
            Some(t) => (t as u32, t as u32),
            None => (self.data.min_rounds, self.data.max_rounds),
        }
    }

    pub fn basis_mix(&self) -> BasisMix {
        self.data.basis.unwrap_or(match self.network {
            NeuralKind::SrnnX | NeuralKind::Dnn2 => BasisMix::Z,
            NeuralKind::SrnnZ => BasisMix::X,
            NeuralKind::Drnn => BasisMix::Mixed,
        })
    }

    /// Hash of everything that determines the datasets.
    pub fn data_hash(&self) -> [u8; 32] {
        digest(&[&self.seed, &self.code, &self.network.fixed_rounds(), &self.rounds(), &self.basis_mix(), &self.data])
    }

    /// Hash of everything that determines the checkpoints.
    pub fn train_hash(&self) -> [u8; 32] {
        digest(&[&self.data_hash(), &self.network, &self.train])
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig { batch_size: self.train.batch_size, learning_rate: self.train.learning_rate, epochs: self.train.epochs, seed: self.seed }
    }
}

pub fn hex(hash: &[u8; 32]) -> String {
    hash.iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_and_hash_is_stable() {
        let c = RunConfig::default();
        let back = RunConfig::from_toml(&c.to_toml()).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.train_hash(), c.train_hash());
        let mut d = c.clone();
        d.train.epochs += 1;
        assert_eq!(d.data_hash(), c.data_hash());
        assert_ne!(d.train_hash(), c.train_hash());
        d.out_dir = "elsewhere".into();
        assert_eq!(d.data_hash(), c.data_hash());
    }

    #[test]
    fn partial_files_and_rejections() {
        let c = RunConfig::from_toml("seed = 9\nnetwork = \"dnn2\"\n[data]\np_ph = 0.01\n").unwrap();
        assert_eq!((c.seed, c.network, c.data.p_ph, c.rounds()), (9, NeuralKind::Dnn2, 0.01, (2, 2)));
        assert!(RunConfig::from_toml("sead = 1").is_err());
        assert!(RunConfig::from_toml("[data]\np_ph = 0.5").is_err());
        assert!(RunConfig::from_toml("[data]\nmin_rounds = 0").is_err());
    }
}
