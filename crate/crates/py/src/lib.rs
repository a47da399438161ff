//! Python bindings over the core crate: the planted-phase sampler, Fourier
//! transforms, moment oracles, spectral surgery, and a small online-SGD
//! driver. Everything crosses the boundary as plain lists and tuples so the
//! module imports without numpy; complex spectra travel as (re, im) pairs.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;
use std::collections::HashMap;

use phaselab::fourier::{CirculantSpectrum, Complex64, DftBasis};
use phaselab::model::{ModelSampler, PlantSpec};
use phaselab::oracles::LikelihoodCoeffs;
use phaselab::rng::stream;
use phaselab::sgd::{run_online, Cadence, SgdConfig, SgdVariant};
use phaselab::special::Activation;
use phaselab::surgery::ImagePatch;

fn value_err(e: phaselab::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_activation(name: &str) -> PyResult<Activation> {
    match name {
        "h4" | "hermite4" => Ok(Activation::Hermite4),
        "logcosh" => Ok(Activation::LogCosh),
        other => Err(PyValueError::new_err(format!(
            "unknown activation {other:?} (expected \"h4\" or \"logcosh\")"
        ))),
    }
}

fn build_spectrum(n: usize, modes: Option<Vec<(usize, f64)>>) -> PyResult<CirculantSpectrum> {
    match modes {
        Some(m) => CirculantSpectrum::with_modes(n, &m).map_err(value_err),
        None => Ok(CirculantSpectrum::isotropic(n)),
    }
}

fn patch(pixels: Vec<f64>, height: usize, width: usize) -> PyResult<ImagePatch> {
    if pixels.len() != height * width {
        return Err(PyValueError::new_err(format!(
            "pixel count {} does not match {height}x{width}",
            pixels.len()
        )));
    }
    ImagePatch::new(height, width, pixels, 0).map_err(value_err)
}

/// Forward DFT of a real signal, no prefactor, as (re, im) pairs.
#[pyfunction]
fn dft(x: Vec<f64>) -> Vec<(f64, f64)> {
    phaselab::fourier::dft(&x).into_iter().map(|z| (z.re, z.im)).collect()
}

/// Inverse DFT (1/N convention) of conjugate-symmetric (re, im) pairs.
#[pyfunction]
fn idft(spectrum: Vec<(f64, f64)>) -> PyResult<Vec<f64>> {
    let z: Vec<Complex64> = spectrum.iter().map(|&(re, im)| Complex64::new(re, im)).collect();
    phaselab::fourier::idft(&z).map_err(value_err)
}

/// Bessel function of the first kind J_m(z); the series is validated on
/// |z| <= 12 only.
#[pyfunction]
fn bessel_j(m: u32, z: f64) -> PyResult<f64> {
    if !(z.abs() <= 12.0) {
        return Err(PyValueError::new_err("bessel_j series domain is |z| <= 12"));
    }
    Ok(phaselab::special::bessel_j(m, z))
}

/// Quartic likelihood coefficients of the sine plant at strength `epsilon`,
/// as a dict with keys c00, c40, c04, c22, c13, c31.
#[pyfunction]
fn likelihood_coeffs(epsilon: f64) -> PyResult<HashMap<String, f64>> {
    if !(epsilon >= 0.0 && epsilon <= 3.0) {
        return Err(PyValueError::new_err(
            "epsilon must lie in [0, 3] (Bessel argument 4*epsilon stays within the series domain)",
        ));
    }
    let c = LikelihoodCoeffs::new(epsilon);
    Ok(HashMap::from([
        ("c00".into(), c.c00),
        ("c40".into(), c.c40),
        ("c04".into(), c.c04),
        ("c22".into(), c.c22),
        ("c13".into(), c.c13),
        ("c31".into(), c.c31),
    ]))
}

/// Hermite coefficients c2, c4, c6 of a built-in activation
/// ("h4" or "logcosh").
#[pyfunction]
fn activation_coeffs(name: &str) -> PyResult<HashMap<String, f64>> {
    let c = parse_activation(name)?.coeffs();
    Ok(HashMap::from([("c2".into(), c.c2), ("c4".into(), c.c4), ("c6".into(), c.c6)]))
}

/// Cosine basis vector u_k of the real trigonometric basis (1-based paired
/// mode, unit norm).
#[pyfunction]
fn basis_u(n: usize, k: usize) -> PyResult<Vec<f64>> {
    let basis = DftBasis::new(n);
    if k == 0 || k > basis.max_paired_mode() {
        return Err(PyValueError::new_err(format!(
            "paired mode k = {k} out of range 1..={} for n = {n}",
            basis.max_paired_mode()
        )));
    }
    Ok(basis.u(k).to_vec())
}

/// Sine basis vector v_k, the quadrature partner of u_k.
#[pyfunction]
fn basis_v(n: usize, k: usize) -> PyResult<Vec<f64>> {
    let basis = DftBasis::new(n);
    if k == 0 || k > basis.max_paired_mode() {
        return Err(PyValueError::new_err(format!(
            "paired mode k = {k} out of range 1..={} for n = {n}",
            basis.max_paired_mode()
        )));
    }
    Ok(basis.v(k).to_vec())
}

/// Set every 2-D Fourier amplitude of a row-major patch to 1 (DC to 0),
/// keeping phases, and invert back to pixels.
#[pyfunction]
fn flatten_amplitudes(pixels: Vec<f64>, height: usize, width: usize) -> PyResult<Vec<f64>> {
    Ok(phaselab::surgery::flatten_amplitudes(&patch(pixels, height, width)?).pixels().to_vec())
}

/// Swap Fourier phases between two equal-shape row-major patches; returns
/// (a's amplitudes with b's phases, b's amplitudes with a's phases).
#[pyfunction]
fn phase_swap(
    a: Vec<f64>,
    b: Vec<f64>,
    height: usize,
    width: usize,
) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let (x, y) = phaselab::surgery::phase_swap(&patch(a, height, width)?, &patch(b, height, width)?)
        .map_err(value_err)?;
    Ok((x.pixels().to_vec(), y.pixels().to_vec()))
}

/// Sampler for the baseline/planted pair: an N(0, Σ) circulant baseline and
/// the class whose mode-k0 phase is rewritten at strength epsilon with every
/// amplitude untouched. `modes` lists spectrum spikes as (mode, eigenvalue)
/// pairs on top of the unit background; omitted means isotropic.
///
/// Each draw takes an explicit seed and is deterministic in it.
#[pyclass]
struct Sampler {
    inner: ModelSampler,
}

#[pymethods]
impl Sampler {
    #[new]
    #[pyo3(signature = (n, epsilon, k0, modes = None, use_corrector = true))]
    fn new(
        n: usize,
        epsilon: f64,
        k0: usize,
        modes: Option<Vec<(usize, f64)>>,
        use_corrector: bool,
    ) -> PyResult<Self> {
        let spectrum = build_spectrum(n, modes)?;
        let mut plant = PlantSpec::new(epsilon, k0);
        plant.use_corrector = use_corrector;
        Ok(Self { inner: ModelSampler::new(spectrum, plant).map_err(value_err)? })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn epsilon(&self) -> f64 {
        self.inner.plant().epsilon
    }

    #[getter]
    fn k0(&self) -> usize {
        self.inner.plant().k0
    }

    /// Spectrum eigenvalue λ_k for 0 <= k < n.
    fn eigenvalue(&self, k: usize) -> PyResult<f64> {
        if k >= self.inner.n() {
            return Err(PyValueError::new_err(format!(
                "mode {k} out of range for n = {}",
                self.inner.n()
            )));
        }
        Ok(self.inner.spectrum().eigenvalue(k))
    }

    /// One baseline draw.
    fn sample_baseline(&self, seed: u64) -> Vec<f64> {
        self.inner.sample_baseline(&mut stream(seed, 0))
    }

    /// One planted draw.
    fn sample_planted(&self, seed: u64) -> Vec<f64> {
        self.inner.sample_planted(&mut stream(seed, 0)).x
    }

    /// One fair-coin labeled draw (x, y) with y = +1 planted, -1 baseline.
    fn sample_labeled(&self, seed: u64) -> PyResult<(Vec<f64>, i8)> {
        let (z, y) = self.inner.sample_labeled_spectrum(&mut stream(seed, 0));
        Ok((phaselab::fourier::idft(&z).map_err(value_err)?, y))
    }

    /// E[(w.x)^4] under the planted class for a unit vector w: 3 plus the
    /// planted quartic correction inside span(u_k0, v_k0).
    fn fourth_moment_oracle(&self, w: Vec<f64>) -> PyResult<f64> {
        phaselab::model::fourth_moment_oracle(self.inner.spectrum(), self.inner.plant(), &w)
            .map_err(value_err)
    }
}

/// Spherical online SGD against fresh labeled draws; returns a dict of
/// checkpoint columns: "step", "alpha_u", "alpha_v", "phase_norm",
/// "principal_norm", "omega_perp", "loss_window". The learning rate is
/// delta_scale / n and checkpoints are log-spaced.
#[pyfunction]
#[pyo3(signature = (n, epsilon, k0, activation = "h4", delta_scale = 1e-3, steps = 1000, seed = 0, modes = None, principal_modes = None))]
#[allow(clippy::too_many_arguments)]
fn run_sgd<'py>(
    py: Python<'py>,
    n: usize,
    epsilon: f64,
    k0: usize,
    activation: &str,
    delta_scale: f64,
    steps: usize,
    seed: u64,
    modes: Option<Vec<(usize, f64)>>,
    principal_modes: Option<Vec<usize>>,
) -> PyResult<Bound<'py, PyDict>> {
    let act = parse_activation(activation)?;
    let sampler =
        ModelSampler::new(build_spectrum(n, modes)?, PlantSpec::new(epsilon, k0)).map_err(value_err)?;
    let cfg = SgdConfig {
        variant: SgdVariant::Spherical,
        delta_scale,
        delta_override: None,
        beta: 0.0,
        steps,
        record_every: Cadence::LogSpaced { per_decade: 20 },
        eta_threshold: 0.5,
        ascend: false,
    };
    let pm = principal_modes.unwrap_or_default();
    let trace = run_online(&sampler, &act, &cfg, &pm, seed).map_err(value_err)?;
    let col = |f: &dyn Fn(usize) -> f64| -> Vec<f64> { (0..trace.steps.len()).map(f).collect() };
    let dict = PyDict::new_bound(py);
    dict.set_item("step", &trace.steps)?;
    dict.set_item("alpha_u", col(&|i| trace.stats[i].alpha_u))?;
    dict.set_item("alpha_v", col(&|i| trace.stats[i].alpha_v))?;
    dict.set_item("phase_norm", col(&|i| trace.stats[i].phase_norm()))?;
    dict.set_item("principal_norm", col(&|i| trace.stats[i].principal_norm()))?;
    dict.set_item("omega_perp", col(&|i| trace.stats[i].omega_perp))?;
    dict.set_item("loss_window", &trace.loss_window)?;
    Ok(dict)
}

/// Rust core bindings: sampler, transforms, oracles, surgery, online SGD.
#[pymodule]
fn phaselab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Sampler>()?;
    m.add_function(wrap_pyfunction!(dft, m)?)?;
    m.add_function(wrap_pyfunction!(idft, m)?)?;
    m.add_function(wrap_pyfunction!(bessel_j, m)?)?;
    m.add_function(wrap_pyfunction!(likelihood_coeffs, m)?)?;
    m.add_function(wrap_pyfunction!(activation_coeffs, m)?)?;
    m.add_function(wrap_pyfunction!(basis_u, m)?)?;
    m.add_function(wrap_pyfunction!(basis_v, m)?)?;
    m.add_function(wrap_pyfunction!(flatten_amplitudes, m)?)?;
    m.add_function(wrap_pyfunction!(phase_swap, m)?)?;
    m.add_function(wrap_pyfunction!(run_sgd, m)?)?;
    Ok(())
}
