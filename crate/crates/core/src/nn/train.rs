//! Mini-batch training with per-epoch checkpoints.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::adam::AdamState;
use super::checkpoint::{Checkpoint, RngState};
use super::loss::{masked_bce_logit_grad, masked_bce_loss};
use super::network::{sample_rng, Linearization, Network, Seed, Sequence};
use super::spec::{NetworkSpec, NnError};

/// One input sequence with a label per output head; `None` masks a head.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainSample {
    pub input: Sequence,
    pub labels: Vec<Option<bool>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self { batch_size: 64, learning_rate: 1e-3, epochs: 50, seed: 0 }
    }
}

#[derive(Debug, Clone)]
pub struct Trainer {
    pub network: Network,
    pub adam: AdamState,
    pub rng: ChaCha8Rng,
    pub epoch: u64,
    pub batch_size: usize,
    pub config_hash: [u8; 32],
}

/// Loss and summed gradient of one batch, reduced in sample order.
pub fn batch_gradient(net: &Network, batch: &[&TrainSample], batch_key: Option<u64>) -> Result<(f64, Vec<f64>), NnError> {
    let per_sample: Vec<Result<(f64, Vec<f64>), NnError>> = batch
        .par_iter()
        .enumerate()
        .map(|(j, s)| {
            let mut r = batch_key.map(|k| sample_rng(k, j as u64));
            let trace = net.forward(&s.input, r.as_mut().map(|r| r as &mut dyn rand::RngCore))?;
            let loss = masked_bce_loss(&s.labels, &trace.output)?;
            let seed = masked_bce_logit_grad(&s.labels, &trace.output);
            let mut g = vec![0.0; net.params.len()];
            net.backward(&trace, Seed::Logit(&seed), Linearization::Gradient, Some(&mut g));
            Ok((loss, g))
        })
        .collect();
    let mut total = 0.0;
    let mut grad = vec![0.0; net.params.len()];
    for r in per_sample {
        let (l, g) = r?;
        total += l;
        grad.iter_mut().zip(&g).for_each(|(a, b)| *a += b);
    }
    Ok((total, grad))
}

impl Trainer {
    pub fn new(spec: NetworkSpec, config: &TrainConfig, config_hash: [u8; 32]) -> Result<Self, NnError> {
        let mut init_rng = ChaCha8Rng::seed_from_u64(config.seed);
        let network = Network::init(spec, &mut init_rng)?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(1);
        let adam = AdamState::new(network.params.len(), config.learning_rate);
        Ok(Self { network, adam, rng, epoch: 0, batch_size: config.batch_size.max(1), config_hash })
    }

    pub fn from_checkpoint(ckpt: &Checkpoint, batch_size: usize) -> Self {
        Self {
            network: ckpt.network.clone(),
            adam: ckpt.adam.clone(),
            rng: ckpt.rng.restore(),
            epoch: ckpt.epoch,
            batch_size: batch_size.max(1),
            config_hash: ckpt.config_hash,
        }
    }

    /// One shuffled pass over `data`; returns the mean training loss.
    pub fn run_epoch(&mut self, data: &[TrainSample]) -> Result<f64, NnError> {
        let mut order: Vec<usize> = (0..data.len()).collect();
        order.shuffle(&mut self.rng);
        let mut total = 0.0;
        for chunk in order.chunks(self.batch_size) {
            let batch: Vec<&TrainSample> = chunk.iter().map(|&i| &data[i]).collect();
            let key: u64 = self.rng.gen();
            let (loss, mut grad) = batch_gradient(&self.network, &batch, Some(key))?;
            let scale = 1.0 / batch.len() as f64;
            grad.iter_mut().for_each(|g| *g *= scale);
            self.adam.update(&mut self.network.params, &grad);
            total += loss;
        }
        self.epoch += 1;
        Ok(if data.is_empty() { 0.0 } else { total / data.len() as f64 })
    }

    pub fn checkpoint(&self, train_loss: f64) -> Checkpoint {
        Checkpoint {
            epoch: self.epoch,
            config_hash: self.config_hash,
            train_loss,
            network: self.network.clone(),
            adam: self.adam.clone(),
            rng: RngState::capture(&self.rng),
        }
    }
}

/// Mean loss of `net` on `data` in evaluation mode.
pub fn evaluate_loss(net: &Network, data: &[TrainSample]) -> Result<f64, NnError> {
    let losses: Vec<Result<f64, NnError>> =
        data.par_iter().map(|s| masked_bce_loss(&s.labels, &net.predict(&s.input)?)).collect();
    let mut total = 0.0;
    for l in losses {
        total += l?;
    }
    Ok(if data.is_empty() { 0.0 } else { total / data.len() as f64 })
}

/// Trains for `config.epochs` epochs and returns one checkpoint per epoch.
pub fn train(spec: NetworkSpec, data: &[TrainSample], config: &TrainConfig, config_hash: [u8; 32]) -> Result<Vec<Checkpoint>, NnError> {
    let mut trainer = Trainer::new(spec, config, config_hash)?;
    (0..config.epochs)
        .map(|_| {
            let loss = trainer.run_epoch(data)?;
            Ok(trainer.checkpoint(loss))
        })
        .collect()
}
