//! Circuit-level depolarizing noise and per-shot random streams.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{Gate, LocalPauli, LocationKind, SinglePauli};

#[derive(Debug, Error, PartialEq)]
pub enum NoiseError {
    #[error("physical error rate {0} outside [0, 1)")]
    BadRate(f64),
}

/// Depolarizing circuit-level noise with a single parameter `p_ph`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    p_ph: f64,
}

impl NoiseModel {
    pub fn new(p_ph: f64) -> Result<Self, NoiseError> {
        if !(0.0..1.0).contains(&p_ph) || p_ph.is_nan() {
            return Err(NoiseError::BadRate(p_ph));
        }
        Ok(Self { p_ph })
    }

    pub fn noiseless() -> Self {
        Self { p_ph: 0.0 }
    }

    pub fn p_ph(&self) -> f64 {
        self.p_ph
    }

    /// Flip probability of a preparation or measurement.
    pub fn spam_flip(&self) -> f64 {
        2.0 * self.p_ph / 3.0
    }

    /// Probability of each of X, Y, Z after a one-qubit gate.
    pub fn one_q(&self) -> f64 {
        self.p_ph / 3.0
    }

    /// Probability of each of the 15 nontrivial two-qubit Paulis.
    pub fn two_q(&self) -> f64 {
        self.p_ph / 15.0
    }

    /// Draws the fault (if any) at one location from a single uniform
    /// variate, so every location consumes exactly one draw.
    pub fn sample_at(&self, gate: &Gate, u: f64) -> Option<LocalPauli> {
        match gate.location_kind() {
            LocationKind::Spam => (u < self.spam_flip()).then(|| LocalPauli(gate.spam_flip(), SinglePauli::I)),
            LocationKind::OneQubit => {
                (u < self.p_ph).then(|| LocalPauli(SinglePauli::NONTRIVIAL[((u / self.one_q()) as usize).min(2)], SinglePauli::I))
            }
            LocationKind::TwoQubit => (u < self.p_ph).then(|| {
                let idx = ((u / self.two_q()) as usize).min(14);
                LocalPauli::two_qubit_set().nth(idx).expect("15 two-qubit Paulis")
            }),
        }
    }
}

/// Counter-based splittable randomness: one ChaCha stream per shot, keyed by
/// the run seed, so shots can be sampled in any order or in parallel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShotStreams {
    seed: u64,
}

impl ShotStreams {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn shot(&self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);
        rng
    }

    /// Derives an unrelated stream family, e.g. for a dataset split.
    pub fn derive(&self, salt: u64) -> ShotStreams {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ 0x9e37_79b9_7f4a_7c15);
        rng.set_stream(salt.wrapping_add(1 << 63));
        ShotStreams { seed: rng.gen() }
    }
}

pub(crate) fn uniform<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.gen::<f64>()
}
