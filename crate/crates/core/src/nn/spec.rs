//! Layer descriptions, shapes and parameter layout.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum NnError {
    #[error("layer {layer}: {message}")]
    Shape { layer: usize, message: String },
    #[error("input has {got} features per step, network expects {expected}")]
    InputWidth { got: usize, expected: usize },
    #[error("flatten expects {expected} steps, input has {got}")]
    Steps { got: usize, expected: usize },
    #[error("empty input sequence")]
    EmptyInput,
    #[error("parameter vector has {got} entries, spec needs {expected}")]
    ParamCount { got: usize, expected: usize },
    #[error("operation requires dense layers only, layer {0} is recurrent")]
    Recurrent(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Linear,
    Relu,
    Sigmoid,
    Tanh,
}

pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

impl Activation {
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Linear => z,
            Activation::Relu => z.max(0.0),
            Activation::Sigmoid => sigmoid(z),
            Activation::Tanh => z.tanh(),
        }
    }

    /// Derivative at `z`, given `y = apply(z)`.
    pub fn derivative(self, z: f64, y: f64) -> f64 {
        match self {
            Activation::Linear => 1.0,
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Sigmoid => y * (1.0 - y),
            Activation::Tanh => 1.0 - y * y,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum LayerSpec {
    /// Marks that steps past a sample's length are ignored. Inputs here carry
    /// their own length, so this is structural only.
    Masking,
    Lstm { units: usize, return_sequences: bool },
    /// Concatenates a fixed number of steps into one vector.
    Flatten { steps: usize },
    Dense { units: usize, activation: Activation },
    Dropout { rate: f64 },
}

/// Shape flowing between layers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    Sequence(usize),
    Vector(usize),
}

impl Shape {
    pub fn width(self) -> usize {
        match self {
            Shape::Sequence(w) | Shape::Vector(w) => w,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkSpec {
    pub input_width: usize,
    pub layers: Vec<LayerSpec>,
    /// Activation of the LSTM output gate.
    #[serde(default = "default_output_gate")]
    pub output_gate: Activation,
}

fn default_output_gate() -> Activation {
    Activation::Sigmoid
}

/// Offsets of one layer's tensors in the flat parameter vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamLayout {
    None,
    /// Gate blocks in order forget, input, candidate, output. `w_x` is
    /// (4n × in), `w_h` is (4n × n), both row-major.
    Lstm { n: usize, input: usize, w_x: usize, w_h: usize, b: usize },
    /// `w` is (out × in) row-major.
    Dense { out: usize, input: usize, w: usize, b: usize },
}

impl ParamLayout {
    pub fn len(&self) -> usize {
        match *self {
            ParamLayout::None => 0,
            ParamLayout::Lstm { n, input, .. } => 4 * n * (input + n + 1),
            ParamLayout::Dense { out, input, .. } => out * (input + 1),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl NetworkSpec {
    /// Two stacked LSTMs of width 36 followed by a 48-24-12 ReLU head with
    /// dropout 0.2 and `outputs` sigmoid units.
    pub fn srnn(input_width: usize, outputs: usize) -> Self {
        Self::recurrent(input_width, 36, &[48, 24, 12], 0.2, outputs)
    }

    pub fn recurrent(input_width: usize, lstm: usize, dense: &[usize], dropout: f64, outputs: usize) -> Self {
        let mut layers = vec![
            LayerSpec::Masking,
            LayerSpec::Lstm { units: lstm, return_sequences: true },
            LayerSpec::Lstm { units: lstm, return_sequences: false },
        ];
        for &units in dense {
            layers.push(LayerSpec::Dense { units, activation: Activation::Relu });
            layers.push(LayerSpec::Dropout { rate: dropout });
        }
        layers.push(LayerSpec::Dense { units: outputs, activation: Activation::Sigmoid });
        Self { input_width, layers, output_gate: Activation::Sigmoid }
    }

    /// Feed-forward decoder over a fixed number of rounds.
    pub fn feed_forward(input_width: usize, steps: usize, dense: &[usize], dropout: f64, outputs: usize) -> Self {
        let mut layers = vec![LayerSpec::Flatten { steps }];
        for &units in dense {
            layers.push(LayerSpec::Dense { units, activation: Activation::Relu });
            if dropout > 0.0 {
                layers.push(LayerSpec::Dropout { rate: dropout });
            }
        }
        layers.push(LayerSpec::Dense { units: outputs, activation: Activation::Sigmoid });
        Self { input_width, layers, output_gate: Activation::Sigmoid }
    }

    /// Output shapes of every layer.
    pub fn shapes(&self) -> Result<Vec<Shape>, NnError> {
        let mut shape = Shape::Sequence(self.input_width);
        let mut out = Vec::with_capacity(self.layers.len());
        for (i, layer) in self.layers.iter().enumerate() {
            let err = |message: &str| NnError::Shape { layer: i, message: message.to_string() };
            shape = match (*layer, shape) {
                (LayerSpec::Masking, Shape::Sequence(w)) => Shape::Sequence(w),
                (LayerSpec::Masking, _) => return Err(err("masking needs a sequence")),
                (LayerSpec::Lstm { units, return_sequences }, Shape::Sequence(_)) => {
                    if units == 0 {
                        return Err(err("zero units"));
                    }
                    if return_sequences {
                        Shape::Sequence(units)
                    } else {
                        Shape::Vector(units)
                    }
                }
                (LayerSpec::Lstm { .. }, _) => return Err(err("LSTM needs a sequence")),
                (LayerSpec::Flatten { steps }, Shape::Sequence(w)) => Shape::Vector(w * steps),
                (LayerSpec::Flatten { .. }, _) => return Err(err("flatten needs a sequence")),
                (LayerSpec::Dense { units, .. }, Shape::Vector(_)) => {
                    if units == 0 {
                        return Err(err("zero units"));
                    }
                    Shape::Vector(units)
                }
                (LayerSpec::Dense { .. }, _) => return Err(err("dense needs a vector")),
                (LayerSpec::Dropout { rate }, s) => {
                    if !(0.0..1.0).contains(&rate) {
                        return Err(err("dropout rate outside [0, 1)"));
                    }
                    s
                }
            };
            out.push(shape);
        }
        match shape {
            Shape::Vector(_) => Ok(out),
            Shape::Sequence(_) => Err(NnError::Shape { layer: self.layers.len(), message: "output must be a vector".into() }),
        }
    }

    pub fn outputs(&self) -> Result<usize, NnError> {
        Ok(self.shapes()?.last().map(|s| s.width()).unwrap_or(0))
    }

    pub fn layouts(&self) -> Result<Vec<ParamLayout>, NnError> {
        let shapes = self.shapes()?;
        let mut offset = 0;
        let mut width = self.input_width;
        let mut out = Vec::with_capacity(self.layers.len());
        for (layer, shape) in self.layers.iter().zip(&shapes) {
            let layout = match *layer {
                LayerSpec::Lstm { units: n, .. } => {
                    let l = ParamLayout::Lstm {
                        n,
                        input: width,
                        w_x: offset,
                        w_h: offset + 4 * n * width,
                        b: offset + 4 * n * (width + n),
                    };
                    offset += l.len();
                    l
                }
                LayerSpec::Dense { units, .. } => {
                    let l = ParamLayout::Dense { out: units, input: width, w: offset, b: offset + units * width };
                    offset += l.len();
                    l
                }
                _ => ParamLayout::None,
            };
            out.push(layout);
            width = shape.width();
        }
        Ok(out)
    }

    pub fn param_count(&self) -> Result<usize, NnError> {
        Ok(self.layouts()?.iter().map(|l| l.len()).sum())
    }

    pub fn is_dense_only(&self) -> Result<(), NnError> {
        match self.layers.iter().position(|l| matches!(l, LayerSpec::Lstm { .. })) {
            Some(i) => Err(NnError::Recurrent(i)),
            None => Ok(()),
        }
    }
}
