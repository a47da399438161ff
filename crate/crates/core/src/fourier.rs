//! DFT conventions, the real trigonometric basis, and circulant spectra.
//!
//! One convention everywhere: forward `X_k = Σ_n x_n e^{-2πikn/N}` with no
//! prefactor, inverse `x_n = (1/N) Σ_k X_k e^{+2πikn/N}`. The single deliberate
//! exception is the unit-normalised mode projection `ŵ_k = W_k / sqrt(N)` used
//! by the moment oracles, marked where it appears.
//!
//! Transforms dispatch to an iterative radix-2 kernel for power-of-two sizes
//! and to a tabulated O(N^2) kernel otherwise; the two are agreement-tested.

pub use num_complex::Complex64;

use crate::{Error, Result};

const TAU: f64 = std::f64::consts::TAU;

/// Reusable transform plan for one size. Construction precomputes twiddles
/// (radix-2) or the full coefficient table (general sizes).
#[derive(Clone, Debug)]
pub struct FftPlan {
    n: usize,
    kind: PlanKind,
}

#[derive(Clone, Debug)]
enum PlanKind {
    /// Twiddles e^{-2πi j / 2^level} packed per butterfly stage.
    Radix2 { twiddles: Vec<Complex64> },
    /// Row-major table w[j*n + k] = e^{-2πi jk / n}.
    Direct { table: Vec<Complex64> },
}

impl FftPlan {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        if n.is_power_of_two() && n >= 2 {
            // Half-length twiddle table for the largest stage serves them all.
            let twiddles = (0..n / 2)
                .map(|j| Complex64::from_polar(1.0, -TAU * j as f64 / n as f64))
                .collect();
            FftPlan { n, kind: PlanKind::Radix2 { twiddles } }
        } else {
            let table = (0..n * n)
                .map(|i| {
                    let (j, k) = (i / n, i % n);
                    // Reduce jk mod n before the float multiply to keep the
                    // angle computation exact for large n.
                    Complex64::from_polar(1.0, -TAU * ((j * k) % n) as f64 / n as f64)
                })
                .collect();
            FftPlan { n, kind: PlanKind::Direct { table } }
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// In-place forward transform.
    pub fn forward(&self, buf: &mut [Complex64]) {
        assert_eq!(buf.len(), self.n);
        match &self.kind {
            PlanKind::Radix2 { twiddles } => radix2(buf, twiddles, false),
            PlanKind::Direct { table } => {
                let out = self.direct(buf, table, false);
                buf.copy_from_slice(&out);
            }
        }
    }

    /// In-place inverse transform, including the 1/N factor.
    pub fn inverse(&self, buf: &mut [Complex64]) {
        assert_eq!(buf.len(), self.n);
        match &self.kind {
            PlanKind::Radix2 { twiddles } => radix2(buf, twiddles, true),
            PlanKind::Direct { table } => {
                let out = self.direct(buf, table, true);
                buf.copy_from_slice(&out);
            }
        }
        let scale = 1.0 / self.n as f64;
        for z in buf.iter_mut() {
            *z *= scale;
        }
    }

    fn direct(&self, buf: &[Complex64], table: &[Complex64], inverse: bool) -> Vec<Complex64> {
        let n = self.n;
        (0..n)
            .map(|j| {
                let row = &table[j * n..(j + 1) * n];
                let mut acc = Complex64::new(0.0, 0.0);
                for (x, w) in buf.iter().zip(row) {
                    acc += if inverse { x * w.conj() } else { x * w };
                }
                acc
            })
            .collect()
    }
}

/// Iterative radix-2 with bit-reversal permutation; `conj` flips to e^{+...}.
fn radix2(buf: &mut [Complex64], twiddles: &[Complex64], conj: bool) {
    let n = buf.len();
    let shift = n.leading_zeros() + 1;
    for i in 0..n {
        let j = i.reverse_bits() >> shift;
        if j > i {
            buf.swap(i, j);
        }
    }
    let mut len = 2;
    while len <= n {
        let stride = n / len;
        let half = len / 2;
        for start in (0..n).step_by(len) {
            for k in 0..half {
                let mut w = twiddles[k * stride];
                if conj {
                    w = w.conj();
                }
                let a = buf[start + k];
                let b = buf[start + k + half] * w;
                buf[start + k] = a + b;
                buf[start + k + half] = a - b;
            }
        }
        len <<= 1;
    }
}

/// Forward DFT of a real signal.
pub fn dft(x: &[f64]) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    FftPlan::new(x.len()).forward(&mut buf);
    buf
}

/// Forward DFT of a complex signal.
pub fn dft_complex(x: &[Complex64]) -> Vec<Complex64> {
    let mut buf = x.to_vec();
    FftPlan::new(x.len()).forward(&mut buf);
    buf
}

/// Inverse DFT of conjugate-symmetric coefficients back to a real signal.
///
/// Symmetry `Z_k = conj(Z_{N-k})` is enforced to a tolerance scaled by the
/// largest coefficient; violations are a contract error, not noise to average
/// away.
pub fn idft(z: &[Complex64]) -> Result<Vec<f64>> {
    let n = z.len();
    let scale = z.iter().map(|c| c.norm()).fold(1.0f64, f64::max);
    let tol = 1e-8 * scale;
    for k in 0..=n / 2 {
        let mirror = (n - k) % n;
        if (z[k] - z[mirror].conj()).norm() > tol {
            return Err(Error::SymmetryViolation { k });
        }
    }
    Ok(idft_complex(z).iter().map(|c| c.re).collect())
}

/// Inverse DFT without the symmetry requirement.
pub fn idft_complex(z: &[Complex64]) -> Vec<Complex64> {
    let mut buf = z.to_vec();
    FftPlan::new(z.len()).inverse(&mut buf);
    buf
}

/// The orthonormal real trigonometric basis that diagonalises every circulant
/// covariance: paired modes `u^k_n = sqrt(2/N) cos(2πkn/N)`,
/// `v^k_n = sqrt(2/N) sin(2πkn/N)` for `1 <= k <= ceil(N/2)-1`, plus the
/// constant vector `1/sqrt(N)` and, for even N, the alternating vector
/// `(-1)^n / sqrt(N)`.
#[derive(Clone, Debug)]
pub struct DftBasis {
    n: usize,
    u: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
    dc: Vec<f64>,
    nyquist: Option<Vec<f64>>,
}

impl DftBasis {
    pub fn new(n: usize) -> Self {
        assert!(n >= 2);
        let paired = n.div_ceil(2) - 1;
        let mut u = Vec::with_capacity(paired);
        let mut v = Vec::with_capacity(paired);
        let amp = (2.0 / n as f64).sqrt();
        for k in 1..=paired {
            let mut uk = Vec::with_capacity(n);
            let mut vk = Vec::with_capacity(n);
            for t in 0..n {
                let arg = TAU * (k * t % n) as f64 / n as f64;
                uk.push(amp * arg.cos());
                vk.push(amp * arg.sin());
            }
            u.push(uk);
            v.push(vk);
        }
        let dc = vec![1.0 / (n as f64).sqrt(); n];
        let nyquist = (n % 2 == 0).then(|| {
            (0..n)
                .map(|t| if t % 2 == 0 { 1.0 } else { -1.0 } / (n as f64).sqrt())
                .collect()
        });
        DftBasis { n, u, v, dc, nyquist }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Largest paired mode index: `ceil(N/2) - 1`.
    pub fn max_paired_mode(&self) -> usize {
        self.u.len()
    }

    /// Cosine vector of paired mode `k` (1-based up to `max_paired_mode`).
    pub fn u(&self, k: usize) -> &[f64] {
        &self.u[k - 1]
    }

    /// Sine vector of paired mode `k`.
    pub fn v(&self, k: usize) -> &[f64] {
        &self.v[k - 1]
    }

    pub fn dc(&self) -> &[f64] {
        &self.dc
    }

    pub fn nyquist(&self) -> Option<&[f64]> {
        self.nyquist.as_deref()
    }
}

/// Spectrum of a symmetric circulant covariance: the eigenvalues `λ_k`,
/// indexed by Fourier mode, with `λ_k = λ_{N-k}`.
#[derive(Clone, Debug, PartialEq)]
pub struct CirculantSpectrum {
    eigs: Vec<f64>,
}

impl CirculantSpectrum {
    /// Spectrum from the first covariance row: `λ_k = Σ_τ c_τ e^{-2πikτ/N}`.
    /// The row must satisfy `c_τ = c_{N-τ}`, which makes every `λ_k` real.
    pub fn from_first_row(c: &[f64]) -> Result<Self> {
        let n = c.len();
        if n < 2 {
            return Err(Error::BadSpectrum { reason: "need N >= 2".into() });
        }
        let scale = c.iter().fold(1.0f64, |a, &b| a.max(b.abs()));
        for tau in 1..n {
            if (c[tau] - c[n - tau]).abs() > 1e-12 * scale {
                return Err(Error::NonCirculant { tau });
            }
        }
        let z = dft(c);
        let eigs = z.iter().map(|v| v.re).collect();
        Ok(CirculantSpectrum { eigs })
    }

    /// Spectrum directly from eigenvalues; requires `λ_k = λ_{N-k}` and
    /// `λ_k >= 0` so the covariance is a valid (PSD) one.
    pub fn from_eigenvalues(eigs: Vec<f64>) -> Result<Self> {
        let n = eigs.len();
        if n < 2 {
            return Err(Error::BadSpectrum { reason: "need N >= 2".into() });
        }
        let scale = eigs.iter().fold(1.0f64, |a, &b| a.max(b.abs()));
        for k in 1..n {
            if (eigs[k] - eigs[n - k]).abs() > 1e-12 * scale {
                return Err(Error::BadSpectrum {
                    reason: format!("eigenvalue symmetry broken at mode {k}"),
                });
            }
        }
        if let Some(k) = eigs.iter().position(|&l| l < 0.0) {
            return Err(Error::BadSpectrum { reason: format!("negative eigenvalue at mode {k}") });
        }
        Ok(CirculantSpectrum { eigs })
    }

    /// The identity covariance in dimension `n`.
    pub fn isotropic(n: usize) -> Self {
        CirculantSpectrum { eigs: vec![1.0; n] }
    }

    /// Unit bulk with selected paired modes rescaled: each `(k, λ)` sets
    /// `λ_k = λ_{N-k} = λ`.
    pub fn with_modes(n: usize, modes: &[(usize, f64)]) -> Result<Self> {
        let mut eigs = vec![1.0; n];
        for &(k, lam) in modes {
            if k == 0 || k >= n.div_ceil(2) {
                return Err(Error::BadMode { k0: k, n });
            }
            if lam < 0.0 {
                return Err(Error::BadSpectrum { reason: format!("negative eigenvalue at mode {k}") });
            }
            eigs[k] = lam;
            eigs[n - k] = lam;
        }
        Ok(CirculantSpectrum { eigs })
    }

    pub fn n(&self) -> usize {
        self.eigs.len()
    }

    pub fn eigenvalue(&self, k: usize) -> f64 {
        self.eigs[k]
    }

    pub fn eigs(&self) -> &[f64] {
        &self.eigs
    }

    pub fn trace(&self) -> f64 {
        self.eigs.iter().sum()
    }

    /// First covariance row `c_τ = (1/N) Σ_k λ_k e^{+2πikτ/N}`.
    pub fn first_row(&self) -> Vec<f64> {
        let z: Vec<Complex64> = self.eigs.iter().map(|&l| Complex64::new(l, 0.0)).collect();
        idft_complex(&z).iter().map(|c| c.re).collect()
    }

    /// Quadratic form `w^T Σ w = (1/N) Σ_k λ_k |W_k|^2`, evaluated spectrally.
    pub fn quadratic_form(&self, w: &[f64]) -> f64 {
        assert_eq!(w.len(), self.n());
        let z = dft(w);
        z.iter().zip(&self.eigs).map(|(c, &l)| l * c.norm_sqr()).sum::<f64>() / self.n() as f64
    }
}
