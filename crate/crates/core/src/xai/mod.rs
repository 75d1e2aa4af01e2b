//! Attributions of decoder outputs to syndrome and flag bits.

pub mod deepshap;
pub mod lrp;
pub mod shapley;

use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::nn::{NnError, Sequence};
use crate::steane::Basis;

pub use deepshap::{deepshap, DeepShap};
pub use lrp::{lrp, lrp_layer_sums, InputRule, LrpRule};
pub use shapley::{exact_shapley, feature_exclusion_game, Game, MAX_PLAYERS};

#[derive(Debug, Error, PartialEq)]
pub enum XaiError {
    #[error("{0} players exceed the exact limit of {MAX_PLAYERS}")]
    TooManyPlayers(usize),
    #[error("game over {players} players needs {expected} values, got {got}")]
    GameSize { players: usize, expected: usize, got: usize },
    #[error("background set is empty")]
    EmptyBackground,
    #[error("background sample has width {got}, expected {expected}")]
    BackgroundWidth { got: usize, expected: usize },
    #[error("output head {head} out of range ({outputs} outputs)")]
    Head { head: usize, outputs: usize },
    #[error(transparent)]
    Network(#[from] NnError),
}

/// Reference inputs against which attributions are measured.
#[derive(Debug, Clone, PartialEq)]
pub struct BackgroundSet {
    samples: Vec<Sequence>,
    width: usize,
}

impl BackgroundSet {
    pub fn new(samples: Vec<Sequence>) -> Result<Self, XaiError> {
        let width = samples.iter().flatten().next().map(|r| r.len()).ok_or(XaiError::EmptyBackground)?;
        if let Some(bad) = samples.iter().flatten().find(|r| r.len() != width) {
            return Err(XaiError::BackgroundWidth { got: bad.len(), expected: width });
        }
        if samples.iter().any(|s| s.is_empty()) {
            return Err(XaiError::EmptyBackground);
        }
        Ok(Self { samples, width })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Every sample cut or extended with quiet (all-zero) rounds to `t`
    /// rounds, so it can be compared with a `t`-round input.
    pub fn adapted(&self, t: usize) -> Vec<Sequence> {
        self.samples
            .iter()
            .map(|s| (0..t).map(|r| s.get(r).cloned().unwrap_or_else(|| vec![0.0; self.width])).collect())
            .collect()
    }

    /// Per-feature means of the adapted samples.
    pub fn means(&self, t: usize) -> Sequence {
        let mut m = vec![vec![0.0; self.width]; t];
        let scale = 1.0 / self.len() as f64;
        for s in self.adapted(t) {
            for (mr, sr) in m.iter_mut().zip(&s) {
                mr.iter_mut().zip(sr).for_each(|(a, b)| *a += b * scale);
            }
        }
        m
    }
}

/// Relevance of every input bit for one output, plus the base value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Attribution {
    /// Rounds × input channels.
    pub phi: Sequence,
    /// Expected output over the background (0 for LRP).
    pub base: f64,
    /// Model output being explained.
    pub output: f64,
}

impl Attribution {
    pub fn total(&self) -> f64 {
        self.phi.iter().flatten().sum()
    }

    /// |Σφ − (f(x) − φ₀)|.
    pub fn summation_residual(&self) -> f64 {
        (self.total() - (self.output - self.base)).abs()
    }

    /// Pads with zero rounds up to `t`; padded rounds carry no relevance.
    pub fn padded(&self, t: usize) -> Sequence {
        let w = self.phi.first().map_or(0, |r| r.len());
        let mut g = self.phi.clone();
        g.resize(t.max(g.len()), vec![0.0; w]);
        g
    }
}

/// One line of an attribution export.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributionRecord {
    pub id: u64,
    pub rounds: usize,
    pub basis: Basis,
    pub base: f64,
    pub output: f64,
    pub phi: Sequence,
    pub input: Sequence,
}

pub fn write_records(records: &[AttributionRecord], mut w: impl Write) -> io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_records(r: impl BufRead) -> io::Result<Vec<AttributionRecord>> {
    r.lines()
        .filter(|l| l.as_ref().map_or(true, |l| !l.trim().is_empty()))
        .map(|l| serde_json::from_str(&l?).map_err(io::Error::from))
        .collect()
}
