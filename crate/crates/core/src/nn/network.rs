//! Forward and backward passes over a flat parameter vector.
//!
//! The backward pass is written once in terms of per-node linearization
//! coefficients. With [`Linearization::Gradient`] these are local
//! derivatives and the pass is ordinary backpropagation through time. With
//! [`Linearization::Reference`] every nonlinearity uses the secant slope
//! between the explained and the reference activation, and every
//! elementwise product uses the mean of the partner's two values, so the
//! resulting input multipliers satisfy Σ mᵢ·Δxᵢ = Δoutput exactly.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::spec::{sigmoid, Activation, LayerSpec, NetworkSpec, NnError, ParamLayout};

const SECANT_GUARD: f64 = 1e-12;

/// Sequence input: one feature vector per step.
pub type Sequence = Vec<Vec<f64>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Network {
    pub spec: NetworkSpec,
    pub params: Vec<f64>,
    #[serde(skip)]
    layouts: Vec<ParamLayout>,
}

#[derive(Debug, Clone, PartialEq)]
enum Value {
    Seq(Sequence),
    Vec(Vec<f64>),
}

impl Value {
    fn into_seq(self) -> Sequence {
        match self {
            Value::Seq(s) => s,
            Value::Vec(v) => vec![v],
        }
    }

    fn into_vec(self) -> Vec<f64> {
        match self {
            Value::Vec(v) => v,
            Value::Seq(s) => s.concat(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
struct LstmStep {
    h_prev: Vec<f64>,
    c_prev: Vec<f64>,
    /// Pre-activations of the four gate blocks (4n).
    z: Vec<f64>,
    /// Activated gates f, i, candidate, o (4n).
    a: Vec<f64>,
    c: Vec<f64>,
    tanh_c: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
enum LayerCache {
    Identity,
    Lstm { xs: Sequence, steps: Vec<LstmStep>, return_sequences: bool },
    Flatten { steps: usize, width: usize },
    Dense { input: Vec<f64>, z: Vec<f64>, y: Vec<f64> },
    Dropout { mask: Option<Vec<f64>> },
}

/// Activations recorded by a forward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub input: Sequence,
    pub output: Vec<f64>,
    caches: Vec<LayerCache>,
}

impl Trace {
    pub fn steps(&self) -> usize {
        self.input.len()
    }
}

/// How the backward pass linearizes nonlinear nodes.
#[derive(Debug, Clone, Copy)]
pub enum Linearization<'a> {
    Gradient,
    Reference(&'a Trace),
}

/// Where the backward pass starts.
#[derive(Debug, Clone, Copy)]
pub enum Seed<'a> {
    /// d(objective)/d(output).
    Output(&'a [f64]),
    /// d(objective)/d(pre-activation of the last dense layer).
    Logit(&'a [f64]),
}

fn glorot(rng: &mut impl Rng, fan_in: usize, fan_out: usize) -> impl FnMut() -> f64 + '_ {
    let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
    move || rng.gen_range(-limit..=limit)
}

impl Network {
    pub fn from_params(spec: NetworkSpec, params: Vec<f64>) -> Result<Self, NnError> {
        let layouts = spec.layouts()?;
        let expected: usize = layouts.iter().map(|l| l.len()).sum();
        if params.len() != expected {
            return Err(NnError::ParamCount { got: params.len(), expected });
        }
        Ok(Self { spec, params, layouts })
    }

    /// Glorot-uniform weights, zero biases, forget-gate biases +1.
    pub fn init(spec: NetworkSpec, rng: &mut impl Rng) -> Result<Self, NnError> {
        let layouts = spec.layouts()?;
        let mut params = vec![0.0; layouts.iter().map(|l| l.len()).sum()];
        for layout in &layouts {
            match *layout {
                ParamLayout::None => {}
                ParamLayout::Lstm { n, input, w_x, w_h, b } => {
                    {
                        let mut g = glorot(rng, input, 4 * n);
                        params[w_x..w_h].iter_mut().for_each(|w| *w = g());
                    }
                    let mut g = glorot(rng, n, 4 * n);
                    params[w_h..b].iter_mut().for_each(|w| *w = g());
                    params[b..b + n].iter_mut().for_each(|w| *w = 1.0);
                }
                ParamLayout::Dense { out, input, w, b } => {
                    let mut g = glorot(rng, input, out);
                    params[w..b].iter_mut().for_each(|w| *w = g());
                }
            }
        }
        Ok(Self { spec, params, layouts })
    }

    /// Rebuilds derived layout data after deserialization.
    pub fn relayout(&mut self) -> Result<(), NnError> {
        self.layouts = self.spec.layouts()?;
        Ok(())
    }

    pub fn layouts(&self) -> &[ParamLayout] {
        &self.layouts
    }

    pub fn outputs(&self) -> usize {
        match self.layouts.iter().rev().find(|l| !l.is_empty()) {
            Some(ParamLayout::Dense { out, .. }) => *out,
            Some(ParamLayout::Lstm { n, .. }) => *n,
            _ => self.spec.input_width,
        }
    }

    fn check_input(&self, input: &[Vec<f64>]) -> Result<(), NnError> {
        if input.is_empty() {
            return Err(NnError::EmptyInput);
        }
        if let Some(bad) = input.iter().find(|x| x.len() != self.spec.input_width) {
            return Err(NnError::InputWidth { got: bad.len(), expected: self.spec.input_width });
        }
        Ok(())
    }

    /// Evaluation-mode output.
    pub fn predict(&self, input: &[Vec<f64>]) -> Result<Vec<f64>, NnError> {
        Ok(self.forward(input, None)?.output)
    }

    /// Runs the network. Dropout is active only when `rng` is given.
    pub fn forward(&self, input: &[Vec<f64>], mut rng: Option<&mut dyn RngCore>) -> Result<Trace, NnError> {
        self.check_input(input)?;
        let p = &self.params;
        let mut value = Value::Seq(input.to_vec());
        let mut caches = Vec::with_capacity(self.spec.layers.len());
        for (layer, layout) in self.spec.layers.iter().zip(&self.layouts) {
            match (*layer, *layout) {
                (LayerSpec::Masking, _) => caches.push(LayerCache::Identity),
                (LayerSpec::Lstm { return_sequences, .. }, ParamLayout::Lstm { n, input: m, w_x, w_h, b }) => {
                    let xs = value.into_seq();
                    let mut h = vec![0.0; n];
                    let mut c = vec![0.0; n];
                    let mut steps = Vec::with_capacity(xs.len());
                    let mut hs = Vec::with_capacity(xs.len());
                    for x in &xs {
                        let mut z = p[b..b + 4 * n].to_vec();
                        for (r, zr) in z.iter_mut().enumerate() {
                            let wx = &p[w_x + r * m..w_x + (r + 1) * m];
                            let wh = &p[w_h + r * n..w_h + (r + 1) * n];
                            *zr += dot(wx, x) + dot(wh, &h);
                        }
                        let mut a = vec![0.0; 4 * n];
                        for u in 0..n {
                            a[u] = sigmoid(z[u]);
                            a[n + u] = sigmoid(z[n + u]);
                            a[2 * n + u] = z[2 * n + u].tanh();
                            a[3 * n + u] = self.spec.output_gate.apply(z[3 * n + u]);
                        }
                        let c_new: Vec<f64> = (0..n).map(|u| a[u] * c[u] + a[n + u] * a[2 * n + u]).collect();
                        let tanh_c: Vec<f64> = c_new.iter().map(|v| v.tanh()).collect();
                        let h_new: Vec<f64> = (0..n).map(|u| a[3 * n + u] * tanh_c[u]).collect();
                        steps.push(LstmStep { h_prev: h, c_prev: c, z, a, c: c_new.clone(), tanh_c });
                        hs.push(h_new.clone());
                        h = h_new;
                        c = c_new;
                    }
                    value = if return_sequences { Value::Seq(hs) } else { Value::Vec(h) };
                    caches.push(LayerCache::Lstm { xs, steps, return_sequences });
                }
                (LayerSpec::Flatten { steps }, _) => {
                    let seq = value.into_seq();
                    if seq.len() != steps {
                        return Err(NnError::Steps { got: seq.len(), expected: steps });
                    }
                    let width = seq[0].len();
                    value = Value::Vec(seq.concat());
                    caches.push(LayerCache::Flatten { steps, width });
                }
                (LayerSpec::Dense { activation, .. }, ParamLayout::Dense { out, input: m, w, b }) => {
                    let a = value.into_vec();
                    let z: Vec<f64> = (0..out).map(|r| p[b + r] + dot(&p[w + r * m..w + (r + 1) * m], &a)).collect();
                    let y: Vec<f64> = z.iter().map(|&v| activation.apply(v)).collect();
                    value = Value::Vec(y.clone());
                    caches.push(LayerCache::Dense { input: a, z, y });
                }
                (LayerSpec::Dropout { rate }, _) => match rng.as_deref_mut() {
                    Some(r) if rate > 0.0 => {
                        let keep = 1.0 - rate;
                        let (mut flat, seq_width) = match value {
                            Value::Seq(s) => {
                                let w = s.first().map_or(0, |v| v.len());
                                (s.concat(), Some(w))
                            }
                            Value::Vec(v) => (v, None),
                        };
                        let mask: Vec<f64> = (0..flat.len()).map(|_| if r.gen::<f64>() < keep { 1.0 / keep } else { 0.0 }).collect();
                        flat.iter_mut().zip(&mask).for_each(|(v, m)| *v *= m);
                        value = match seq_width {
                            Some(w) if w > 0 => Value::Seq(flat.chunks(w).map(|c| c.to_vec()).collect()),
                            Some(_) => Value::Seq(vec![]),
                            None => Value::Vec(flat),
                        };
                        caches.push(LayerCache::Dropout { mask: Some(mask) });
                    }
                    _ => caches.push(LayerCache::Dropout { mask: None }),
                },
                _ => unreachable!("layouts are derived from the same spec"),
            }
        }
        Ok(Trace { input: input.to_vec(), output: value.into_vec(), caches })
    }

    /// Backpropagates `seed` through `trace`, accumulating weight gradients
    /// into `grads` when given, and returns the input multipliers.
    pub fn backward(&self, trace: &Trace, seed: Seed<'_>, lin: Linearization<'_>, mut grads: Option<&mut [f64]>) -> Sequence {
        let p = &self.params;
        let reference = match lin {
            Linearization::Gradient => None,
            Linearization::Reference(r) => {
                assert_eq!(r.caches.len(), trace.caches.len(), "reference trace from another network");
                Some(r)
            }
        };
        let slope = |act: Activation, z: f64, y: f64, r: Option<(f64, f64)>| match r {
            Some((zr, yr)) if (z - zr).abs() >= SECANT_GUARD => (y - yr) / (z - zr),
            _ => act.derivative(z, y),
        };
        let partner = |v: f64, r: Option<f64>| match r {
            Some(vr) => 0.5 * (v + vr),
            None => v,
        };

        let last = self.spec.layers.len();
        let (mut delta, skip_activation) = match seed {
            Seed::Output(d) => (Value::Vec(d.to_vec()), None),
            Seed::Logit(d) => (Value::Vec(d.to_vec()), Some(self.spec.layers.iter().rposition(|l| matches!(l, LayerSpec::Dense { .. })).expect("logit seed needs a dense layer"))),
        };
        if let Some(i) = skip_activation {
            assert!(
                self.spec.layers[i + 1..last].iter().all(|l| matches!(l, LayerSpec::Dropout { .. })),
                "logit seed needs the dense layer last"
            );
        }

        for i in (0..last).rev() {
            let cache = &trace.caches[i];
            let rcache = reference.map(|r| &r.caches[i]);
            match (cache, self.spec.layers[i], self.layouts[i]) {
                (LayerCache::Identity, ..) => {}
                (LayerCache::Dropout { mask }, ..) => {
                    if let Some(mask) = mask {
                        delta = match delta {
                            Value::Vec(v) => Value::Vec(v.iter().zip(mask).map(|(d, m)| d * m).collect()),
                            Value::Seq(s) => {
                                let w = s.first().map_or(0, |v| v.len());
                                let flat: Vec<f64> = s.concat().iter().zip(mask).map(|(d, m)| d * m).collect();
                                Value::Seq(flat.chunks(w.max(1)).map(|c| c.to_vec()).collect())
                            }
                        };
                    }
                }
                (LayerCache::Flatten { steps, width }, ..) => {
                    let flat = delta.into_vec();
                    debug_assert_eq!(flat.len(), steps * width);
                    delta = Value::Seq(flat.chunks(*width).map(|c| c.to_vec()).collect());
                }
                (LayerCache::Dense { input, z, y }, LayerSpec::Dense { activation, .. }, ParamLayout::Dense { out, input: m, w, b }) => {
                    let dy = delta.into_vec();
                    let rc = match rcache {
                        Some(LayerCache::Dense { input, z, y }) => Some((input, z, y)),
                        _ => None,
                    };
                    let dz: Vec<f64> = if skip_activation == Some(i) {
                        dy
                    } else {
                        (0..out).map(|r| dy[r] * slope(activation, z[r], y[r], rc.map(|(_, zr, yr)| (zr[r], yr[r])))).collect()
                    };
                    if let Some(g) = grads.as_deref_mut() {
                        for r in 0..out {
                            g[b + r] += dz[r];
                            let row = &mut g[w + r * m..w + (r + 1) * m];
                            row.iter_mut().zip(input).for_each(|(gw, a)| *gw += dz[r] * a);
                        }
                    }
                    let mut da = vec![0.0; m];
                    for r in 0..out {
                        let row = &p[w + r * m..w + (r + 1) * m];
                        da.iter_mut().zip(row).for_each(|(d, wv)| *d += wv * dz[r]);
                    }
                    delta = Value::Vec(da);
                }
                (LayerCache::Lstm { xs, steps, return_sequences }, _, ParamLayout::Lstm { n, input: m, w_x, w_h, b }) => {
                    let rsteps = match rcache {
                        Some(LayerCache::Lstm { steps, .. }) => Some(steps),
                        _ => None,
                    };
                    let t_len = steps.len();
                    let dh_out: Sequence = if *return_sequences {
                        delta.into_seq()
                    } else {
                        let mut s = vec![vec![0.0; n]; t_len];
                        s[t_len - 1] = delta.into_vec();
                        s
                    };
                    let mut dx = vec![vec![0.0; m]; t_len];
                    let mut dh_next = vec![0.0; n];
                    let mut dc_next = vec![0.0; n];
                    for t in (0..t_len).rev() {
                        let s = &steps[t];
                        let rs = rsteps.map(|r| &r[t]);
                        let mut dz = vec![0.0; 4 * n];
                        let mut dc_prev = vec![0.0; n];
                        for u in 0..n {
                            let (f, ig, g, o) = (s.a[u], s.a[n + u], s.a[2 * n + u], s.a[3 * n + u]);
                            let dh = dh_out[t][u] + dh_next[u];
                            let d_o = dh * partner(s.tanh_c[u], rs.map(|r| r.tanh_c[u]));
                            let d_tc = dh * partner(o, rs.map(|r| r.a[3 * n + u]));
                            let dc = dc_next[u] + d_tc * slope(Activation::Tanh, s.c[u], s.tanh_c[u], rs.map(|r| (r.c[u], r.tanh_c[u])));
                            let d_f = dc * partner(s.c_prev[u], rs.map(|r| r.c_prev[u]));
                            dc_prev[u] = dc * partner(f, rs.map(|r| r.a[u]));
                            let d_i = dc * partner(g, rs.map(|r| r.a[2 * n + u]));
                            let d_g = dc * partner(ig, rs.map(|r| r.a[n + u]));
                            let gate = |k: usize, act: Activation| {
                                slope(act, s.z[k * n + u], s.a[k * n + u], rs.map(|r| (r.z[k * n + u], r.a[k * n + u])))
                            };
                            dz[u] = d_f * gate(0, Activation::Sigmoid);
                            dz[n + u] = d_i * gate(1, Activation::Sigmoid);
                            dz[2 * n + u] = d_g * gate(2, Activation::Tanh);
                            dz[3 * n + u] = d_o * gate(3, self.spec.output_gate);
                        }
                        if let Some(gr) = grads.as_deref_mut() {
                            for (r, &d) in dz.iter().enumerate() {
                                if d == 0.0 {
                                    continue;
                                }
                                gr[b + r] += d;
                                gr[w_x + r * m..w_x + (r + 1) * m].iter_mut().zip(&xs[t]).for_each(|(gw, x)| *gw += d * x);
                                gr[w_h + r * n..w_h + (r + 1) * n].iter_mut().zip(&s.h_prev).for_each(|(gw, h)| *gw += d * h);
                            }
                        }
                        let mut dh_prev = vec![0.0; n];
                        for (r, &d) in dz.iter().enumerate() {
                            if d == 0.0 {
                                continue;
                            }
                            dx[t].iter_mut().zip(&p[w_x + r * m..w_x + (r + 1) * m]).for_each(|(o, wv)| *o += wv * d);
                            dh_prev.iter_mut().zip(&p[w_h + r * n..w_h + (r + 1) * n]).for_each(|(o, wv)| *o += wv * d);
                        }
                        dh_next = dh_prev;
                        dc_next = dc_prev;
                    }
                    delta = Value::Seq(dx);
                }
                _ => unreachable!("cache kind follows the layer kind"),
            }
        }
        delta.into_seq()
    }
}

/// Input, output and parameters of one dense layer in an evaluation pass.
pub struct DenseView<'a> {
    pub input: Vec<f64>,
    pub output: Vec<f64>,
    /// (out × in) row-major.
    pub weights: &'a [f64],
    pub bias: &'a [f64],
}

/// Dense layers of an evaluation pass over `x`, in forward order.
pub fn dense_activations<'a>(network: &'a Network, x: &[Vec<f64>]) -> Result<Vec<DenseView<'a>>, NnError> {
    let trace = network.forward(x, None)?;
    Ok(trace
        .caches
        .into_iter()
        .zip(&network.layouts)
        .filter_map(|(c, l)| match (c, *l) {
            (LayerCache::Dense { input, y, .. }, ParamLayout::Dense { out, input: m, w, b }) => Some(DenseView {
                input,
                output: y,
                weights: &network.params[w..w + out * m],
                bias: &network.params[b..b + out],
            }),
            _ => None,
        })
        .collect())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Dropout stream for one sample of a batch.
pub fn sample_rng(batch_key: u64, sample: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(batch_key);
    rng.set_stream(sample);
    rng
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> Network {
        let spec = NetworkSpec::recurrent(3, 4, &[5], 0.0, 2);
        Network::init(spec, &mut ChaCha8Rng::seed_from_u64(3)).unwrap()
    }

    #[test]
    fn zero_weights_give_zero_state() {
        let spec = NetworkSpec {
            input_width: 2,
            layers: vec![LayerSpec::Lstm { units: 3, return_sequences: false }],
            output_gate: Activation::Sigmoid,
        };
        let net = Network::from_params(spec.clone(), vec![0.0; spec.param_count().unwrap()]).unwrap();
        let out = net.predict(&[vec![1.0, 0.5], vec![0.2, 0.1]]).unwrap();
        assert!(out.iter().all(|&h| h == 0.0));
    }

    #[test]
    fn eval_is_deterministic_and_dropout_free() {
        let spec = NetworkSpec::srnn(12, 2);
        let net = Network::init(spec, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let x: Sequence = (0..4).map(|t| (0..12).map(|c| ((t + c) % 3 == 0) as u8 as f64).collect()).collect();
        let a = net.predict(&x).unwrap();
        assert_eq!(a, net.predict(&x).unwrap());
        assert!(a.iter().all(|&q| q > 0.0 && q < 1.0));
        let mut r1 = sample_rng(5, 0);
        let mut r2 = sample_rng(5, 0);
        let t1 = net.forward(&x, Some(&mut r1)).unwrap();
        let t2 = net.forward(&x, Some(&mut r2)).unwrap();
        assert_eq!(t1.output, t2.output);
    }

    #[test]
    fn zero_seed_gives_zero_gradient() {
        let net = tiny();
        let x = vec![vec![1.0, 0.0, 1.0], vec![0.0, 1.0, 0.0]];
        let tr = net.forward(&x, None).unwrap();
        let mut g = vec![0.0; net.params.len()];
        net.backward(&tr, Seed::Output(&[0.0, 0.0]), Linearization::Gradient, Some(&mut g));
        assert!(g.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn input_checks() {
        let net = tiny();
        assert_eq!(net.predict(&[]), Err(NnError::EmptyInput));
        assert!(matches!(net.predict(&[vec![1.0]]), Err(NnError::InputWidth { .. })));
        let ff = Network::init(NetworkSpec::feed_forward(3, 2, &[4], 0.0, 1), &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert!(matches!(ff.predict(&[vec![0.0; 3]]), Err(NnError::Steps { .. })));
        assert_eq!(ff.predict(&[vec![0.0; 3], vec![1.0; 3]]).unwrap().len(), 1);
    }
}
