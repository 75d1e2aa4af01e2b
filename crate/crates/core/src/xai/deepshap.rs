//! DeepLIFT multipliers averaged over a background set.
//!
//! Against one reference b, nonlinear nodes use secant slopes and products
//! use the averaged-partner rule, so Σ_i m_i (x_i − b_i) = f(x) − f(b) holds
//! exactly through dense and LSTM layers. Averaging over b gives
//! Σφ = f(x) − mean f(b).

use crate::nn::{Linearization, Network, Seed, Sequence, Trace};

use super::{Attribution, BackgroundSet, XaiError};

/// Explainer with the background forward passes cached for one round count.
pub struct DeepShap<'a> {
    network: &'a Network,
    head: usize,
    rounds: usize,
    references: Vec<(Sequence, Trace)>,
    base: f64,
}

impl<'a> DeepShap<'a> {
    pub fn new(network: &'a Network, head: usize, background: &BackgroundSet, rounds: usize) -> Result<Self, XaiError> {
        let outputs = network.outputs();
        if head >= outputs {
            return Err(XaiError::Head { head, outputs });
        }
        if background.width() != network.spec.input_width {
            return Err(XaiError::BackgroundWidth { got: background.width(), expected: network.spec.input_width });
        }
        let references = background
            .adapted(rounds)
            .into_iter()
            .map(|b| network.forward(&b, None).map(|t| (b, t)))
            .collect::<Result<Vec<_>, _>>()?;
        let base = references.iter().map(|(_, t)| t.output[head]).sum::<f64>() / references.len() as f64;
        Ok(Self { network, head, rounds, references, base })
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    pub fn base(&self) -> f64 {
        self.base
    }

    pub fn explain(&self, x: &[Vec<f64>]) -> Result<Attribution, XaiError> {
        if x.len() != self.rounds {
            return Err(crate::nn::NnError::Steps { got: x.len(), expected: self.rounds }.into());
        }
        let trace = self.network.forward(x, None)?;
        let mut seed = vec![0.0; self.network.outputs()];
        seed[self.head] = 1.0;
        let width = self.network.spec.input_width;
        let mut phi = vec![vec![0.0; width]; x.len()];
        let scale = 1.0 / self.references.len() as f64;
        for (b, reference) in &self.references {
            let m = self.network.backward(&trace, Seed::Output(&seed), Linearization::Reference(reference), None);
            for t in 0..x.len() {
                for c in 0..width {
                    phi[t][c] += scale * m[t][c] * (x[t][c] - b[t][c]);
                }
            }
        }
        Ok(Attribution { phi, base: self.base, output: trace.output[self.head] })
    }
}

/// One-off DeepSHAP attribution of output `head` at `x`.
pub fn deepshap(network: &Network, head: usize, x: &[Vec<f64>], background: &BackgroundSet) -> Result<Attribution, XaiError> {
    DeepShap::new(network, head, background, x.len())?.explain(x)
}
