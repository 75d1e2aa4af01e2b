//! Layer-wise relevance propagation for dense stacks.

use serde::{Deserialize, Serialize};

use crate::nn::network::dense_activations;
use crate::nn::{Network, NnError};

use super::{Attribution, XaiError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum LrpRule {
    Zero,
    /// Stabilizer ε·sign(z) added to every denominator.
    Epsilon { epsilon: f64 },
    /// Positive weights and biases boosted by γ.
    Gamma { gamma: f64 },
    /// Positive and negative contributions split with α − β = 1.
    AlphaBeta { alpha: f64, beta: f64 },
}

impl Default for LrpRule {
    fn default() -> Self {
        LrpRule::AlphaBeta { alpha: 1.0, beta: 0.0 }
    }
}

/// Rule for the layer that reads the network input.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum InputRule {
    /// Same rule as the hidden layers.
    Same,
    /// Inputs bounded to [low, high]; gives relevance to zero inputs too.
    PixelBounds { low: f64, high: f64 },
    SquaredWeights,
}

impl Default for InputRule {
    fn default() -> Self {
        InputRule::PixelBounds { low: 0.0, high: 1.0 }
    }
}

fn stabilized(z: f64, eps: f64) -> f64 {
    z + if z >= 0.0 { eps } else { -eps }
}

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Redistributes `r_out` onto the layer input `a` for weights `w` (out × m).
fn redistribute(a: &[f64], w: &[f64], b: &[f64], r_out: &[f64], rule: LrpRule, input_rule: Option<InputRule>) -> Vec<f64> {
    let m = a.len();
    let mut r_in = vec![0.0; m];
    for (k, &rk) in r_out.iter().enumerate() {
        if rk == 0.0 {
            continue;
        }
        let row = &w[k * m..(k + 1) * m];
        match (input_rule, rule) {
            (Some(InputRule::PixelBounds { low, high }), _) => {
                let z: Vec<f64> = row.iter().zip(a).map(|(&wv, &x)| x * wv - low * wv.max(0.0) - high * wv.min(0.0)).collect();
                let s = rk / z.iter().sum::<f64>();
                if s.is_finite() {
                    r_in.iter_mut().zip(&z).for_each(|(r, zj)| *r += zj * s);
                }
            }
            (Some(InputRule::SquaredWeights), _) => {
                let s = rk / row.iter().map(|wv| wv * wv).sum::<f64>();
                if s.is_finite() {
                    r_in.iter_mut().zip(row).for_each(|(r, wv)| *r += wv * wv * s);
                }
            }
            (_, LrpRule::AlphaBeta { alpha, beta }) => {
                let (mut pos, mut neg) = (0.0, 0.0);
                for (wv, x) in row.iter().zip(a) {
                    let z = wv * x;
                    if z > 0.0 {
                        pos += z;
                    } else {
                        neg += z;
                    }
                }
                for (r, (wv, x)) in r_in.iter_mut().zip(row.iter().zip(a)) {
                    let z = wv * x;
                    *r += rk * (alpha * ratio(z.max(0.0), pos) - beta * ratio(z.min(0.0), neg));
                }
            }
            (_, rule) => {
                let boost = |v: f64| match rule {
                    LrpRule::Gamma { gamma } => v + gamma * v.max(0.0),
                    _ => v,
                };
                let z: Vec<f64> = row.iter().zip(a).map(|(&wv, &x)| x * boost(wv)).collect();
                let mut den = z.iter().sum::<f64>() + boost(b[k]);
                if let LrpRule::Epsilon { epsilon } = rule {
                    den = stabilized(den, epsilon);
                }
                let s = ratio(rk, den);
                r_in.iter_mut().zip(&z).for_each(|(r, zj)| *r += zj * s);
            }
        }
    }
    r_in
}

/// Relevance vectors from the output layer down to the input, the first
/// entry being the explained output itself.
fn relevances(network: &Network, head: usize, x: &[Vec<f64>], rule: LrpRule, input_rule: InputRule) -> Result<(Vec<Vec<f64>>, f64), XaiError> {
    network.spec.is_dense_only()?;
    let outputs = network.outputs();
    if head >= outputs {
        return Err(XaiError::Head { head, outputs });
    }
    let layers = dense_activations(network, x)?;
    let output = layers.last().map(|l| l.output[head]).ok_or(NnError::EmptyInput)?;
    let mut r = vec![0.0; outputs];
    r[head] = output;
    let mut all = vec![r.clone()];
    for (i, l) in layers.iter().enumerate().rev() {
        let ir = if i == 0 && input_rule != InputRule::Same { Some(input_rule) } else { None };
        r = redistribute(&l.input, l.weights, l.bias, &r, rule, ir);
        all.push(r.clone());
    }
    Ok((all, output))
}

/// LRP attribution of output `head`, seeded with the output value.
pub fn lrp(network: &Network, head: usize, x: &[Vec<f64>], rule: LrpRule, input_rule: InputRule) -> Result<Attribution, XaiError> {
    let (all, output) = relevances(network, head, x, rule, input_rule)?;
    let flat = all.last().expect("at least the output relevance");
    let width = network.spec.input_width;
    Ok(Attribution { phi: flat.chunks(width).map(|c| c.to_vec()).collect(), base: 0.0, output })
}

/// Total relevance at each layer boundary, output first.
pub fn lrp_layer_sums(network: &Network, head: usize, x: &[Vec<f64>], rule: LrpRule, input_rule: InputRule) -> Result<Vec<f64>, XaiError> {
    Ok(relevances(network, head, x, rule, input_rule)?.0.iter().map(|r| r.iter().sum()).collect())
}
