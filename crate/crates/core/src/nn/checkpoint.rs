//! Versioned little-endian checkpoint files.

use std::io::{self, Read, Write};
use std::path::Path;

use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use thiserror::Error;

use super::adam::AdamState;
use super::network::Network;
use super::spec::{NetworkSpec, ParamLayout};

const MAGIC: &[u8; 4] = b"SXCK";
const VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("not a checkpoint file")]
    BadMagic,
    #[error("unsupported checkpoint version {0}")]
    Version(u32),
    #[error("corrupt checkpoint: {0}")]
    Corrupt(String),
}

/// Position of a ChaCha8 generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngState {
    pub seed: [u8; 32],
    pub stream: u64,
    pub word_pos: u128,
}

impl RngState {
    pub fn capture(rng: &ChaCha8Rng) -> Self {
        Self { seed: rng.get_seed(), stream: rng.get_stream(), word_pos: rng.get_word_pos() }
    }

    pub fn restore(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::from_seed(self.seed);
        rng.set_stream(self.stream);
        rng.set_word_pos(self.word_pos);
        rng
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub epoch: u64,
    pub config_hash: [u8; 32],
    pub train_loss: f64,
    pub network: Network,
    pub adam: AdamState,
    pub rng: RngState,
}

struct Writer(Vec<u8>);

impl Writer {
    fn u32(&mut self, v: u32) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn bytes(&mut self, b: &[u8]) {
        self.u64(b.len() as u64);
        self.0.extend_from_slice(b);
    }
    fn tensor(&mut self, name: &str, dims: &[usize], data: &[f64]) {
        debug_assert_eq!(dims.iter().product::<usize>(), data.len());
        self.bytes(name.as_bytes());
        self.u32(dims.len() as u32);
        dims.iter().for_each(|&d| self.u64(d as u64));
        data.iter().for_each(|&v| self.f64(v));
    }
}

struct Reader<'a>(&'a [u8]);

impl Reader<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8], CheckpointError> {
        if self.0.len() < n {
            return Err(CheckpointError::Corrupt("truncated".into()));
        }
        let (a, b) = self.0.split_at(n);
        self.0 = b;
        Ok(a)
    }
    fn u32(&mut self) -> Result<u32, CheckpointError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn u64(&mut self) -> Result<u64, CheckpointError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn f64(&mut self) -> Result<f64, CheckpointError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn bytes(&mut self) -> Result<Vec<u8>, CheckpointError> {
        let n = self.u64()? as usize;
        Ok(self.take(n)?.to_vec())
    }
    fn tensor(&mut self) -> Result<(String, Vec<usize>, Vec<f64>), CheckpointError> {
        let name = String::from_utf8(self.bytes()?).map_err(|e| CheckpointError::Corrupt(e.to_string()))?;
        let nd = self.u32()? as usize;
        let dims = (0..nd).map(|_| self.u64().map(|d| d as usize)).collect::<Result<Vec<_>, _>>()?;
        let len: usize = dims.iter().product();
        if len > self.0.len() / 8 {
            return Err(CheckpointError::Corrupt(format!("tensor {name} larger than file")));
        }
        let data = (0..len).map(|_| self.f64()).collect::<Result<Vec<_>, _>>()?;
        Ok((name, dims, data))
    }
}

/// Named tensors of a parameter vector, in layout order.
fn named_tensors(spec_layouts: &[ParamLayout]) -> Vec<(String, Vec<usize>, usize)> {
    let mut out = Vec::new();
    for (i, l) in spec_layouts.iter().enumerate() {
        match *l {
            ParamLayout::None => {}
            ParamLayout::Lstm { n, input, w_x, w_h, b } => {
                out.push((format!("layer{i}.lstm.w_x"), vec![4 * n, input], w_x));
                out.push((format!("layer{i}.lstm.w_h"), vec![4 * n, n], w_h));
                out.push((format!("layer{i}.lstm.b"), vec![4 * n], b));
            }
            ParamLayout::Dense { out: o, input, w, b } => {
                out.push((format!("layer{i}.dense.w"), vec![o, input], w));
                out.push((format!("layer{i}.dense.b"), vec![o], b));
            }
        }
    }
    out
}

impl Checkpoint {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer(Vec::new());
        w.0.extend_from_slice(MAGIC);
        w.u32(VERSION);
        w.u64(self.epoch);
        w.0.extend_from_slice(&self.config_hash);
        w.f64(self.train_loss);
        w.bytes(serde_json::to_string(&self.network.spec).expect("spec serializes").as_bytes());
        let tensors = named_tensors(self.network.layouts());
        w.u32(tensors.len() as u32);
        for (name, dims, offset) in &tensors {
            let len: usize = dims.iter().product();
            w.tensor(name, dims, &self.network.params[*offset..offset + len]);
        }
        let a = &self.adam;
        w.u64(a.step);
        for v in [a.learning_rate, a.beta1, a.beta2, a.epsilon] {
            w.f64(v);
        }
        w.tensor("adam.m", &[a.m.len()], &a.m);
        w.tensor("adam.v", &[a.v.len()], &a.v);
        w.0.extend_from_slice(&self.rng.seed);
        w.u64(self.rng.stream);
        w.0.extend_from_slice(&self.rng.word_pos.to_le_bytes());
        w.0
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CheckpointError> {
        let mut r = Reader(bytes);
        if r.take(4)? != MAGIC {
            return Err(CheckpointError::BadMagic);
        }
        let version = r.u32()?;
        if version != VERSION {
            return Err(CheckpointError::Version(version));
        }
        let epoch = r.u64()?;
        let config_hash: [u8; 32] = r.take(32)?.try_into().unwrap();
        let train_loss = r.f64()?;
        let spec: NetworkSpec =
            serde_json::from_slice(&r.bytes()?).map_err(|e| CheckpointError::Corrupt(e.to_string()))?;
        let layouts = spec.layouts().map_err(|e| CheckpointError::Corrupt(e.to_string()))?;
        let expected = named_tensors(&layouts);
        let count = r.u32()? as usize;
        if count != expected.len() {
            return Err(CheckpointError::Corrupt(format!("{count} tensors, spec has {}", expected.len())));
        }
        let mut params = vec![0.0; layouts.iter().map(|l| l.len()).sum()];
        for (name, dims, offset) in &expected {
            let (n, d, data) = r.tensor()?;
            if &n != name || &d != dims {
                return Err(CheckpointError::Corrupt(format!("unexpected tensor {n} {d:?}")));
            }
            params[*offset..offset + data.len()].copy_from_slice(&data);
        }
        let network = Network::from_params(spec, params).map_err(|e| CheckpointError::Corrupt(e.to_string()))?;
        let step = r.u64()?;
        let (learning_rate, beta1, beta2, epsilon) = (r.f64()?, r.f64()?, r.f64()?, r.f64()?);
        let (_, _, m) = r.tensor()?;
        let (_, _, v) = r.tensor()?;
        if m.len() != network.params.len() || v.len() != network.params.len() {
            return Err(CheckpointError::Corrupt("optimizer state size".into()));
        }
        let adam = AdamState { learning_rate, beta1, beta2, epsilon, step, m, v };
        let seed: [u8; 32] = r.take(32)?.try_into().unwrap();
        let stream = r.u64()?;
        let word_pos = u128::from_le_bytes(r.take(16)?.try_into().unwrap());
        if !r.0.is_empty() {
            return Err(CheckpointError::Corrupt("trailing bytes".into()));
        }
        Ok(Self { epoch, config_hash, train_loss, network, adam, rng: RngState { seed, stream, word_pos } })
    }

    pub fn save(&self, path: &Path) -> Result<(), CheckpointError> {
        std::fs::File::create(path)?.write_all(&self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, CheckpointError> {
        let mut buf = Vec::new();
        std::fs::File::open(path)?.read_to_end(&mut buf)?;
        Self::from_bytes(&buf)
    }
}
