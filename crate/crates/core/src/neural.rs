//! Neural networks wrapped as decoders of syndrome-flag volumes.

use serde::{Deserialize, Serialize};

use crate::circuit::Channel;
use crate::decoder::Decoder;
use crate::nn::{Network, NetworkSpec, NnError, Sequence, TrainSample};
use crate::sim::{MemorySample, SyndromeFlagVolume};
use crate::steane::{Basis, StabilizerKind};

/// Which trained decoder family a network belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NeuralKind {
    /// Recurrent, single output, predicts logical X flips (Z readout).
    SrnnX,
    /// Recurrent, single output, predicts logical Z flips (X readout).
    SrnnZ,
    /// Recurrent, one output per readout basis.
    Drnn,
    /// Feed-forward over two rounds of Z-type syndromes and X-type flags.
    Dnn2,
}

impl NeuralKind {
    /// Readout basis served by each output head.
    pub fn heads(self) -> Vec<Basis> {
        match self {
            NeuralKind::SrnnX | NeuralKind::Dnn2 => vec![Basis::Z],
            NeuralKind::SrnnZ => vec![Basis::X],
            NeuralKind::Drnn => vec![Basis::Z, Basis::X],
        }
    }

    /// Volume channels fed to the network, in order.
    pub fn channels(self) -> Vec<Channel> {
        match self {
            NeuralKind::Dnn2 => (0..3)
                .map(|k| Channel::syndrome(StabilizerKind::Z, k))
                .chain((0..3).map(|k| Channel::flag(StabilizerKind::X, k)))
                .collect(),
            _ => Channel::all().collect(),
        }
    }

    pub fn default_spec(self) -> NetworkSpec {
        let outputs = self.heads().len();
        match self {
            NeuralKind::Dnn2 => NetworkSpec::feed_forward(6, 2, &[48, 24, 12], 0.2, outputs),
            _ => NetworkSpec::srnn(Channel::COUNT, outputs),
        }
    }

    /// Fixed round count for feed-forward decoders.
    pub fn fixed_rounds(self) -> Option<usize> {
        match self {
            NeuralKind::Dnn2 => Some(2),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NeuralDecoder {
    pub kind: NeuralKind,
    pub network: Network,
    pub channels: Vec<Channel>,
    pub heads: Vec<Basis>,
}

impl NeuralDecoder {
    pub fn new(kind: NeuralKind, network: Network) -> Result<Self, NnError> {
        let channels = kind.channels();
        let heads = kind.heads();
        if network.spec.input_width != channels.len() {
            return Err(NnError::InputWidth { got: channels.len(), expected: network.spec.input_width });
        }
        let outputs = network.spec.outputs()?;
        if outputs != heads.len() {
            return Err(NnError::Shape { layer: network.spec.layers.len(), message: format!("{outputs} outputs for {} heads", heads.len()) });
        }
        Ok(Self { kind, network, channels, heads })
    }

    pub fn input(&self, volume: &SyndromeFlagVolume) -> Sequence {
        volume.features(&self.channels)
    }

    pub fn head(&self, basis: Basis) -> Option<usize> {
        self.heads.iter().position(|&b| b == basis)
    }

    /// Predicted logical flip probability for a readout in `basis`.
    pub fn probability(&self, volume: &SyndromeFlagVolume, basis: Basis) -> Result<f64, NnError> {
        let h = self.head(basis).ok_or_else(|| NnError::Shape { layer: 0, message: format!("no output head for {basis} readout") })?;
        Ok(self.network.predict(&self.input(volume))?[h])
    }

    /// Training pair for a sample; heads of the other basis are masked.
    pub fn train_sample(&self, sample: &MemorySample) -> TrainSample {
        TrainSample {
            input: self.input(&sample.volume),
            labels: self.heads.iter().map(|&b| (b == sample.basis).then(|| sample.label())).collect(),
        }
    }
}

impl Decoder for NeuralDecoder {
    fn predict(&self, volume: &SyndromeFlagVolume, basis: Basis) -> bool {
        self.probability(volume, basis).map(|q| q > 0.5).unwrap_or(false)
    }

    fn name(&self) -> &str {
        match self.kind {
            NeuralKind::SrnnX => "srnn-x",
            NeuralKind::SrnnZ => "srnn-z",
            NeuralKind::Drnn => "drnn",
            NeuralKind::Dnn2 => "dnn2",
        }
    }
}
