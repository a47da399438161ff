//! Phase-planted Gaussian fields: sampling, moment oracles, effective dynamics,
//! online SGD, and spectral image surgery.
//!
//! The central object is a stationary (circulant-covariance) Gaussian signal in
//! dimension `N` whose planted class perturbs the *phase* of one Fourier mode
//! while leaving every amplitude — and hence the full covariance — untouched.
//! Everything downstream (single-neuron SGD, effective ODEs, image surgery,
//! shallow-net probes) studies how that phase information is learned.
//!
//! Module layout:
//! - [`special`]: Hermite polynomials/coefficients, Bessel `J_m`, Rayleigh moments.
//! - [`fourier`]: the DFT convention, the real trigonometric basis, circulant spectra.
//! - [`model`]: the planted-phase data model and its sampling paths.
//! - [`oracles`]: closed-form likelihood coefficients, population loss/drift, ODEs.
//! - [`sgd`]: online SGD (spherical and norm-penalised) with overlap traces.
//! - [`surgery`]: 2-D amplitude/phase surgery on image patches, PGM corpora.
//! - [`net`]: a small two-layer network used to probe surgered corpora.
//! - [`stats`]: means with standard errors, quantiles, a one-sample KS test.

pub mod fourier;
pub mod model;
pub mod net;
pub mod oracles;
pub mod rng;
pub mod sgd;
pub mod special;
pub mod stats;
pub mod surgery;
pub mod validation;

/// Crate-wide error type. Numerical routines return `f64` directly and reserve
/// errors for contract violations (shape, symmetry, domain).
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("first row is not symmetric-circulant: c[{tau}] != c[N-{tau}]")]
    NonCirculant { tau: usize },
    #[error("eigenvalue list is not a valid circulant spectrum: {reason}")]
    BadSpectrum { reason: String },
    #[error("Fourier coefficients violate conjugate symmetry at mode {k}")]
    SymmetryViolation { k: usize },
    #[error("mode index {k0} out of range for N = {n} (need 1 <= k0 < N/2)")]
    BadMode { k0: usize, n: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("ODE state exceeded 1e6 at step {step} (sign or step-size error)")]
    Blowup { step: usize },
    #[error("weight norm collapsed below 1e-12")]
    ZeroNorm,
    #[error("pairing index {index} out of range for source class of size {len}")]
    PairingExhausted { index: usize, len: usize },
    #[error("patch is constant after mean subtraction; cannot normalize")]
    ConstantPatch,
    #[error("class {label} has no examples")]
    EmptyClass { label: usize },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse error in {what}: {detail}")]
    Parse { what: String, detail: String },
}

pub type Result<T> = std::result::Result<T, Error>;
