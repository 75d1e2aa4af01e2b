//! Python module `steane_xai_py`.

use std::path::PathBuf;

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use steane_xai::analysis;
use steane_xai::decoder::{Decoder, IdentityDecoder};
use steane_xai::dep::dep_report;
use steane_xai::eval::infidelity_curve;
use steane_xai::neural::{NeuralDecoder, NeuralKind};
use steane_xai::nn::Checkpoint;
use steane_xai::noise::{NoiseModel, ShotStreams};
use steane_xai::seqlut::SeqLut;
use steane_xai::sim::{Simulator, SyndromeFlagVolume};
use steane_xai::steane::{Basis, CodeDefinition};
use steane_xai::xai::{self, BackgroundSet, Game};

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn basis(s: &str) -> PyResult<Basis> {
    match s {
        "Z" | "z" => Ok(Basis::Z),
        "X" | "x" => Ok(Basis::X),
        _ => Err(PyValueError::new_err(format!("basis must be 'X' or 'Z', got {s:?}"))),
    }
}

fn neural_kind(s: &str) -> PyResult<NeuralKind> {
    match s {
        "srnn-x" => Ok(NeuralKind::SrnnX),
        "srnn-z" => Ok(NeuralKind::SrnnZ),
        "drnn" => Ok(NeuralKind::Drnn),
        "dnn2" => Ok(NeuralKind::Dnn2),
        _ => Err(PyValueError::new_err(format!("unknown network kind {s:?}"))),
    }
}

/// Syndrome increments and flags of a memory run, one 12-bit word per round.
#[pyclass(name = "Volume", frozen, from_py_object)]
#[derive(Clone)]
struct PyVolume(SyndromeFlagVolume);

#[pymethods]
impl PyVolume {
    #[new]
    fn new(rounds: Vec<u16>) -> PyResult<Self> {
        SyndromeFlagVolume::new(rounds).map(Self).map_err(err)
    }

    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        SyndromeFlagVolume::from_text(text).map(Self).map_err(err)
    }

    fn to_text(&self) -> String {
        self.0.to_text()
    }

    fn num_rounds(&self) -> usize {
        self.0.num_rounds()
    }

    /// Rows of twelve 0.0/1.0 values in channel order.
    fn features(&self) -> Vec<Vec<f64>> {
        self.0.features(&steane_xai::circuit::Channel::all().collect::<Vec<_>>())
    }

    fn __len__(&self) -> usize {
        self.0.num_rounds()
    }

    fn __repr__(&self) -> String {
        format!("Volume('{}')", self.0.to_text())
    }
}

/// One sampled memory experiment.
#[pyclass(name = "Sample", frozen, get_all)]
struct PySample {
    volume: PyVolume,
    basis: String,
    m_in: bool,
    m_out: bool,
    label: bool,
}

/// Samples `shots` noisy memory runs of `rounds` QEC cycles.
#[pyfunction]
#[pyo3(signature = (p_ph, rounds, shots, seed, basis_name = "Z"))]
fn sample(p_ph: f64, rounds: usize, shots: usize, seed: u64, basis_name: &str) -> PyResult<Vec<PySample>> {
    let b = basis(basis_name)?;
    let noise = NoiseModel::new(p_ph).map_err(err)?;
    let sim = Simulator::new(CodeDefinition::steane());
    let streams = ShotStreams::new(seed);
    Ok((0..shots as u64)
        .map(|i| {
            let mut rng = streams.shot(i);
            let s = sim.sample(noise, rounds, b, false, &mut rng);
            PySample { label: s.label(), volume: PyVolume(s.volume), basis: b.to_string(), m_in: s.m_in, m_out: s.m_out }
        })
        .collect())
}

/// Flag-aware sequential look-up-table decoder.
#[pyclass(name = "SeqLut", frozen)]
struct PySeqLut(SeqLut);

#[pymethods]
impl PySeqLut {
    #[new]
    fn new() -> Self {
        Self(SeqLut::new(CodeDefinition::steane()))
    }

    /// Predicted logical flip for a readout in `basis_name`.
    #[pyo3(signature = (volume, basis_name = "Z"))]
    fn predict(&self, volume: &PyVolume, basis_name: &str) -> PyResult<bool> {
        Ok(self.0.predict(&volume.0, basis(basis_name)?))
    }

    /// (logical X flip, logical Z flip).
    fn decode(&self, volume: &PyVolume) -> (bool, bool) {
        self.0.decode(&volume.0)
    }

    /// Flag correction table rows as strings.
    #[pyo3(signature = (plaquettes = "X"))]
    fn table(&self, plaquettes: &str) -> PyResult<Vec<String>> {
        let kind = match plaquettes {
            "X" => steane_xai::steane::StabilizerKind::X,
            "Z" => steane_xai::steane::StabilizerKind::Z,
            _ => return Err(PyValueError::new_err("plaquettes must be 'X' or 'Z'")),
        };
        Ok(self.0.table(kind).rows.iter().map(|r| r.to_string()).collect())
    }
}

/// Trained network loaded from a checkpoint file.
#[pyclass(name = "NeuralDecoder", frozen)]
struct PyNeuralDecoder(NeuralDecoder);

#[pymethods]
impl PyNeuralDecoder {
    #[staticmethod]
    fn load(path: PathBuf, kind: &str) -> PyResult<Self> {
        let ckpt = Checkpoint::load(&path).map_err(|e| PyIOError::new_err(e.to_string()))?;
        NeuralDecoder::new(neural_kind(kind)?, ckpt.network).map(Self).map_err(err)
    }

    #[pyo3(signature = (volume, basis_name = "Z"))]
    fn probability(&self, volume: &PyVolume, basis_name: &str) -> PyResult<f64> {
        self.0.probability(&volume.0, basis(basis_name)?).map_err(err)
    }

    #[pyo3(signature = (volume, basis_name = "Z"))]
    fn predict(&self, volume: &PyVolume, basis_name: &str) -> PyResult<bool> {
        Ok(self.0.predict(&volume.0, basis(basis_name)?))
    }

    /// DeepSHAP attribution grid (rounds × input channels) against a
    /// background of volumes.
    #[pyo3(signature = (volume, background, basis_name = "Z"))]
    fn deepshap(&self, volume: &PyVolume, background: Vec<PyRef<PyVolume>>, basis_name: &str) -> PyResult<Vec<Vec<f64>>> {
        let head = self.0.head(basis(basis_name)?).ok_or_else(|| PyValueError::new_err("network has no head for this basis"))?;
        let bg = BackgroundSet::new(background.iter().map(|v| self.0.input(&v.0)).collect()).map_err(err)?;
        xai::deepshap(&self.0.network, head, &self.0.input(&volume.0), &bg).map(|a| a.phi).map_err(err)
    }
}

/// Fraction of single faults in two cycles that `decoder` ("seqlut" or
/// "identity") fails to correct.
#[pyfunction]
#[pyo3(signature = (decoder = "seqlut", basis_name = "Z"))]
fn dep_failure_fraction(decoder: &str, basis_name: &str) -> PyResult<f64> {
    let sim = Simulator::new(CodeDefinition::steane());
    let d: Box<dyn Decoder> = match decoder {
        "seqlut" => Box::new(SeqLut::new(CodeDefinition::steane())),
        "identity" => Box::new(IdentityDecoder),
        _ => return Err(PyValueError::new_err(format!("unknown decoder {decoder:?}"))),
    };
    Ok(dep_report(d.as_ref(), &sim, basis(basis_name)?, 2).fraction())
}

/// Per-round logical error rate and offset (p_L, t0) of the look-up-table
/// decoder.
#[pyfunction]
#[pyo3(signature = (p_ph, rounds, shots, seed, basis_name = "Z"))]
fn seqlut_logical_rate(py: Python<'_>, p_ph: f64, rounds: usize, shots: u64, seed: u64, basis_name: &str) -> PyResult<(f64, f64)> {
    let b = basis(basis_name)?;
    let noise = NoiseModel::new(p_ph).map_err(err)?;
    let curve = py.detach(|| {
        let sim = Simulator::new(CodeDefinition::steane());
        infidelity_curve(&SeqLut::new(CodeDefinition::steane()), &sim, noise, b, 1, rounds, shots, ShotStreams::new(seed))
    });
    let r = curve.logical_rate().ok_or_else(|| PyValueError::new_err("no logical rate"))?;
    Ok((r.p_l, r.t0))
}

/// (p_hat, p_min, p_max, sigma).
#[pyfunction]
#[pyo3(signature = (k, n, z2 = 1.0))]
fn wilson_interval(k: u64, n: u64, z2: f64) -> PyResult<(f64, f64, f64, f64)> {
    let w = analysis::wilson_interval(k, n, z2).map_err(err)?;
    Ok((w.p_hat, w.p_min, w.p_max, w.sigma))
}

/// (p_L, t0) from (t, infidelity) points.
#[pyfunction]
fn fit_infidelity(points: Vec<(f64, f64)>) -> PyResult<(f64, f64)> {
    let f = analysis::fit_infidelity(&points).map_err(err)?;
    Ok((f.p_l(), f.t0()))
}

/// (a, b) of p_L = a·p^b from (p, p_L) points.
#[pyfunction]
fn fit_scaling(points: Vec<(f64, f64)>) -> PyResult<(f64, f64)> {
    let f = analysis::fit_scaling(&points).map_err(err)?;
    Ok((f.a(), f.b()))
}

/// Shapley values of a game given as coalition values indexed by bitmask.
#[pyfunction]
fn exact_shapley(values: Vec<f64>) -> PyResult<Vec<f64>> {
    let n = values.len().trailing_zeros() as usize;
    if values.len() != 1 << n {
        return Err(PyValueError::new_err("length must be a power of two"));
    }
    Ok(xai::exact_shapley(&Game::new(n, values).map_err(err)?))
}

#[pymodule]
fn steane_xai_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyVolume>()?;
    m.add_class::<PySample>()?;
    m.add_class::<PySeqLut>()?;
    m.add_class::<PyNeuralDecoder>()?;
    m.add_function(wrap_pyfunction!(sample, m)?)?;
    m.add_function(wrap_pyfunction!(dep_failure_fraction, m)?)?;
    m.add_function(wrap_pyfunction!(seqlut_logical_rate, m)?)?;
    m.add_function(wrap_pyfunction!(wilson_interval, m)?)?;
    m.add_function(wrap_pyfunction!(fit_infidelity, m)?)?;
    m.add_function(wrap_pyfunction!(fit_scaling, m)?)?;
    m.add_function(wrap_pyfunction!(exact_shapley, m)?)?;
    Ok(())
}
