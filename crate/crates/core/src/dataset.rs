//! Memory-experiment datasets: generation, binary files and text export.

use std::io::{self, BufRead, Write};
use std::path::Path;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::noise::{NoiseModel, ShotStreams};
use crate::sim::{MemorySample, Simulator, SyndromeFlagVolume};
use crate::steane::Basis;

const MAGIC: &[u8; 4] = b"SXDS";
const VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("not a dataset file")]
    BadMagic,
    #[error("unsupported dataset version {0}")]
    Version(u32),
    #[error("corrupt dataset: {0}")]
    Corrupt(String),
}

/// Which initial logical states a dataset covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BasisMix {
    /// |0_L⟩ and X_L|0_L⟩, read out in Z.
    Z,
    /// |+_L⟩ and Z_L|+_L⟩, read out in X.
    X,
    /// All four, in equal numbers.
    Mixed,
}

impl BasisMix {
    fn code(self) -> u8 {
        match self {
            BasisMix::Z => 0,
            BasisMix::X => 1,
            BasisMix::Mixed => 2,
        }
    }

    fn from_code(c: u8) -> Option<Self> {
        [BasisMix::Z, BasisMix::X, BasisMix::Mixed].into_iter().find(|b| b.code() == c)
    }

    /// Readout basis and initial logical value of shot `i`; the families
    /// cycle so every one gets the same count up to rounding.
    pub fn family(self, i: u64) -> (Basis, bool) {
        match self {
            BasisMix::Z => (Basis::Z, i % 2 == 1),
            BasisMix::X => (Basis::X, i % 2 == 1),
            BasisMix::Mixed => (if i % 4 < 2 { Basis::Z } else { Basis::X }, i % 2 == 1),
        }
    }
}

fn basis_code(b: Basis) -> u8 {
    match b {
        Basis::Z => 0,
        Basis::X => 1,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetHeader {
    pub code_id: String,
    pub p_ph: f64,
    pub min_rounds: u32,
    pub max_rounds: u32,
    pub basis: BasisMix,
    pub seed: u64,
    pub shots: u64,
    pub config_hash: [u8; 32],
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub header: DatasetHeader,
    pub samples: Vec<MemorySample>,
}

/// What to sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenerationSpec {
    pub p_ph: f64,
    pub min_rounds: u32,
    pub max_rounds: u32,
    pub basis: BasisMix,
    pub shots: u64,
    pub seed: u64,
}

/// Samples `spec.shots` memory experiments. Shot `i` draws its round count
/// and all noise from its own stream, so the result does not depend on
/// thread scheduling.
pub fn generate(sim: &Simulator, spec: &GenerationSpec, config_hash: [u8; 32]) -> Result<Dataset, crate::noise::NoiseError> {
    let noise = NoiseModel::new(spec.p_ph)?;
    let streams = ShotStreams::new(spec.seed);
    let (lo, hi) = (spec.min_rounds.max(1), spec.max_rounds.max(spec.min_rounds.max(1)));
    let samples = (0..spec.shots)
        .into_par_iter()
        .map(|i| {
            let mut rng = streams.shot(i);
            let rounds = rng.gen_range(lo..=hi) as usize;
            let (basis, m_in) = spec.basis.family(i);
            sim.sample(noise, rounds, basis, m_in, &mut rng)
        })
        .collect();
    let header = DatasetHeader {
        code_id: sim.code().id().to_string(),
        p_ph: spec.p_ph,
        min_rounds: lo,
        max_rounds: hi,
        basis: spec.basis,
        seed: spec.seed,
        shots: spec.shots,
        config_hash,
    };
    Ok(Dataset { header, samples })
}

impl Dataset {
    pub fn to_bytes(&self) -> Vec<u8> {
        let h = &self.header;
        let mut out = Vec::with_capacity(64 + self.samples.len() * 24);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&(h.code_id.len() as u32).to_le_bytes());
        out.extend_from_slice(h.code_id.as_bytes());
        out.extend_from_slice(&h.p_ph.to_le_bytes());
        out.extend_from_slice(&h.min_rounds.to_le_bytes());
        out.extend_from_slice(&h.max_rounds.to_le_bytes());
        out.push(h.basis.code());
        out.extend_from_slice(&h.seed.to_le_bytes());
        out.extend_from_slice(&(self.samples.len() as u64).to_le_bytes());
        out.extend_from_slice(&h.config_hash);
        for s in &self.samples {
            out.extend_from_slice(&(s.volume.num_rounds() as u16).to_le_bytes());
            out.push(basis_code(s.basis));
            out.push(s.m_in as u8);
            out.push(s.m_out as u8);
            out.push(s.label() as u8);
            for &w in s.volume.words() {
                out.extend_from_slice(&w.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(mut b: &[u8]) -> Result<Self, DatasetError> {
        fn take<'a>(b: &mut &'a [u8], n: usize) -> Result<&'a [u8], DatasetError> {
            if b.len() < n {
                return Err(DatasetError::Corrupt("truncated".into()));
            }
            let (head, rest) = b.split_at(n);
            *b = rest;
            Ok(head)
        }
        macro_rules! num {
            ($t:ty) => {
                <$t>::from_le_bytes(take(&mut b, std::mem::size_of::<$t>())?.try_into().unwrap())
            };
        }
        if take(&mut b, 4)? != MAGIC {
            return Err(DatasetError::BadMagic);
        }
        let version = num!(u32);
        if version != VERSION {
            return Err(DatasetError::Version(version));
        }
        let id_len = num!(u32) as usize;
        let code_id = String::from_utf8(take(&mut b, id_len)?.to_vec()).map_err(|e| DatasetError::Corrupt(e.to_string()))?;
        let p_ph = num!(f64);
        let min_rounds = num!(u32);
        let max_rounds = num!(u32);
        let basis = BasisMix::from_code(take(&mut b, 1)?[0]).ok_or_else(|| DatasetError::Corrupt("basis".into()))?;
        let seed = num!(u64);
        let shots = num!(u64);
        let config_hash: [u8; 32] = take(&mut b, 32)?.try_into().unwrap();
        let mut samples = Vec::with_capacity(shots.min(1 << 24) as usize);
        for _ in 0..shots {
            let rounds = num!(u16) as usize;
            let flags = take(&mut b, 4)?;
            let basis = match flags[0] {
                0 => Basis::Z,
                1 => Basis::X,
                _ => return Err(DatasetError::Corrupt("record basis".into())),
            };
            let (m_in, m_out, m_l) = (flags[1] == 1, flags[2] == 1, flags[3] == 1);
            if m_l != (m_in ^ m_out) || flags[1..].iter().any(|&v| v > 1) {
                return Err(DatasetError::Corrupt("label mismatch".into()));
            }
            let words = (0..rounds).map(|_| Ok(num!(u16))).collect::<Result<Vec<u16>, DatasetError>>()?;
            let volume = SyndromeFlagVolume::new(words).map_err(|e| DatasetError::Corrupt(e.to_string()))?;
            samples.push(MemorySample { volume, basis, m_in, m_out });
        }
        if !b.is_empty() {
            return Err(DatasetError::Corrupt("trailing bytes".into()));
        }
        Ok(Self { header: DatasetHeader { code_id, p_ph, min_rounds, max_rounds, basis, seed, shots, config_hash }, samples })
    }

    pub fn save(&self, path: &Path) -> Result<(), DatasetError> {
        std::fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, DatasetError> {
        Self::from_bytes(&std::fs::read(path)?)
    }

    /// One line per sample: `basis T m_in m_out m_L` then the rounds as
    /// 12-character bit strings in channel order.
    pub fn write_text(&self, mut w: impl Write) -> io::Result<()> {
        writeln!(w, "# basis T m_in m_out m_L rounds(S_X1..3 S_Z1..3 F_X1..3 F_Z1..3)")?;
        for s in &self.samples {
            writeln!(
                w,
                "{} {} {} {} {} {}",
                s.basis,
                s.volume.num_rounds(),
                s.m_in as u8,
                s.m_out as u8,
                s.label() as u8,
                s.volume.to_text()
            )?;
        }
        Ok(())
    }

    pub fn read_text(r: impl BufRead) -> Result<Vec<MemorySample>, DatasetError> {
        let mut out = Vec::new();
        for line in r.lines() {
            let line = line?;
            if line.starts_with('#') || line.trim().is_empty() {
                continue;
            }
            let bad = || DatasetError::Corrupt(format!("bad line: {line}"));
            let mut it = line.split_whitespace();
            let basis = match it.next() {
                Some("Z") => Basis::Z,
                Some("X") => Basis::X,
                _ => return Err(bad()),
            };
            let mut nums = || it.next().and_then(|v| v.parse::<usize>().ok()).ok_or_else(bad);
            let (t, m_in, m_out, _m_l) = (nums()?, nums()? == 1, nums()? == 1, nums()?);
            let volume = SyndromeFlagVolume::from_text(&it.collect::<Vec<_>>().join(" ")).map_err(|_| bad())?;
            if volume.num_rounds() != t {
                return Err(bad());
            }
            out.push(MemorySample { volume, basis, m_in, m_out });
        }
        Ok(out)
    }
}
