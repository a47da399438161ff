//! Samplers for the baseline distribution P0 = N(0, Σ) and the planted
//! distribution P that perturbs the phase of one Fourier mode, plus analytic
//! moment oracles for both.
//!
//! Sampling happens in the Fourier domain. A baseline draw fills the
//! half-spectrum with independent Gaussians scaled per mode,
//!
//!   Re Z_k, Im Z_k ~ N(0, N λ_k / 2)   for 0 < k < N/2,
//!   Z_0 ~ N(0, N λ_0),  Z_{N/2} ~ N(0, N λ_{N/2})  (real),
//!
//! and mirrors conjugates onto the upper half. The planted draw rewrites mode
//! k0 in polar form ρ e^{iφ} as ρ e^{iψ} with
//!
//!   ψ = φ + ε f(φ) + U,   U ~ Unif{0, π/2, π, 3π/2},
//!
//! leaving every other mode untouched. The fourth-root corrector U kills all
//! moments of X_{k0} except those of order 4n, so the second-order statistics
//! of P and P0 agree exactly and the class difference hides in fourth
//! cumulants of the single plane span(u, v).

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use crate::fourier::{dft, CirculantSpectrum, FftPlan};
use crate::rng::{ChaCha8Rng, Normal};
use crate::special::{bessel_j, rayleigh_moment};
use crate::stats::{ks_critical, ks_uniform, Accumulator};
use crate::{Error, Result};

/// Phase-perturbation function f in ψ = φ + ε f(φ) + U.
#[derive(Clone)]
pub enum CorrectorF {
    /// The analysis choice f(φ) = sin φ.
    Sine,
    /// Any 2π-periodic perturbation, for exploration.
    User(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl std::fmt::Debug for CorrectorF {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CorrectorF::Sine => write!(f, "Sine"),
            CorrectorF::User(_) => write!(f, "User(..)"),
        }
    }
}

impl CorrectorF {
    pub fn eval(&self, phi: f64) -> f64 {
        match self {
            CorrectorF::Sine => phi.sin(),
            CorrectorF::User(g) => g(phi),
        }
    }
}

/// Parameters of the planted phase modification.
#[derive(Clone, Debug)]
pub struct PlantSpec {
    pub epsilon: f64,
    pub k0: usize,
    pub f: CorrectorF,
    pub use_corrector: bool,
}

impl PlantSpec {
    pub fn new(epsilon: f64, k0: usize) -> Self {
        Self {
            epsilon,
            k0,
            f: CorrectorF::Sine,
            use_corrector: true,
        }
    }

    /// k0 must index a paired mode: the DC and Nyquist coefficients are real,
    /// so they carry no phase to modify. ε = 0 is allowed as the degenerate
    /// no-signal plant (ψ = φ + U leaves the phase uniform), useful for null
    /// calibration runs.
    pub fn validate(&self, n: usize) -> Result<()> {
        if self.epsilon < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "epsilon must be nonnegative, got {}",
                self.epsilon
            )));
        }
        let half = n / 2;
        if self.k0 == 0 || (n % 2 == 0 && self.k0 == half) || self.k0 >= n {
            return Err(Error::BadMode { k0: self.k0, n });
        }
        // fold conjugate indices onto the canonical lower half
        if self.k0 > half {
            return Err(Error::BadMode { k0: self.k0, n });
        }
        Ok(())
    }
}

/// Latent polar variables of the modified mode, kept for diagnostics and for
/// the pixel-space closed-form oracle.
#[derive(Clone, Copy, Debug)]
pub struct Latent {
    pub rho: f64,
    pub phi: f64,
    pub u_angle: f64,
}

impl Latent {
    pub fn psi(&self, plant: &PlantSpec) -> f64 {
        self.phi + plant.epsilon * plant.f.eval(self.phi) + self.u_angle
    }
}

/// One labeled draw: y = +1 for the planted class, −1 for baseline.
#[derive(Clone, Debug)]
pub struct LabeledSample {
    pub x: Vec<f64>,
    pub y: i8,
    pub latent: Option<Latent>,
}

/// Sampler for a fixed (spectrum, plant) pair. Owns the transform plan, so
/// construct once and reuse across draws.
#[derive(Clone, Debug)]
pub struct ModelSampler {
    spectrum: CirculantSpectrum,
    plant: PlantSpec,
    plan: FftPlan,
    /// per-mode standard deviations for the half-spectrum draw
    sd: Vec<f64>,
    /// record latents on planted draws (off in performance mode)
    pub keep_latent: bool,
}

impl ModelSampler {
    pub fn new(spectrum: CirculantSpectrum, plant: PlantSpec) -> Result<Self> {
        let n = spectrum.n();
        plant.validate(n)?;
        let mut sd = vec![0.0; n / 2 + 1];
        for (k, s) in sd.iter_mut().enumerate() {
            let lam = spectrum.eigenvalue(k);
            let var = if k == 0 || (n % 2 == 0 && k == n / 2) {
                n as f64 * lam
            } else {
                n as f64 * lam / 2.0
            };
            *s = var.sqrt();
        }
        Ok(Self {
            spectrum,
            plant,
            plan: FftPlan::new(n),
            sd,
            keep_latent: true,
        })
    }

    pub fn n(&self) -> usize {
        self.spectrum.n()
    }

    pub fn spectrum(&self) -> &CirculantSpectrum {
        &self.spectrum
    }

    pub fn plant(&self) -> &PlantSpec {
        &self.plant
    }

    /// Draw the full baseline spectrum Z with conjugate symmetry.
    pub fn baseline_spectrum(&self, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
        let n = self.n();
        let mut normal = Normal::new();
        let mut z = vec![Complex64::new(0.0, 0.0); n];
        z[0] = Complex64::new(self.sd[0] * normal.sample(rng), 0.0);
        let half = n / 2;
        for k in 1..=half {
            if n % 2 == 0 && k == half {
                z[k] = Complex64::new(self.sd[k] * normal.sample(rng), 0.0);
            } else {
                let re = self.sd[k] * normal.sample(rng);
                let im = self.sd[k] * normal.sample(rng);
                z[k] = Complex64::new(re, im);
                z[n - k] = Complex64::new(re, -im);
            }
        }
        z
    }

    /// One baseline draw in pixel space.
    pub fn sample_baseline(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let z = self.baseline_spectrum(rng);
        self.inverse(&z)
    }

    /// One planted draw: baseline spectrum with mode k0 rewritten in phase.
    pub fn sample_planted(&self, rng: &mut ChaCha8Rng) -> LabeledSample {
        let mut z = self.baseline_spectrum(rng);
        let latent = self.plant_into(&mut z, rng);
        LabeledSample {
            x: self.inverse(&z),
            y: 1,
            latent: self.keep_latent.then_some(latent),
        }
    }

    /// Rewrite mode k0 of `z` in place and return the latent polar record.
    /// With ε = 0 and the corrector off the perturbation is the identity, so
    /// the spectrum is left bit-for-bit untouched.
    pub fn plant_into(&self, z: &mut [Complex64], rng: &mut ChaCha8Rng) -> Latent {
        use rand::Rng;
        let n = self.n();
        let k0 = self.plant.k0;
        let rho = z[k0].norm();
        let phi = z[k0].im.atan2(z[k0].re);
        let u_angle = if self.plant.use_corrector {
            rng.gen_range(0u8..4) as f64 * (PI / 2.0)
        } else {
            0.0
        };
        let latent = Latent { rho, phi, u_angle };
        if self.plant.epsilon == 0.0 && !self.plant.use_corrector {
            return latent;
        }
        let psi = latent.psi(&self.plant);
        let (s, c) = psi.sin_cos();
        z[k0] = Complex64::new(rho * c, rho * s);
        z[n - k0] = z[k0].conj();
        latent
    }

    /// Balanced labeled draw: baseline or planted with probability 1/2.
    pub fn sample_labeled(&self, rng: &mut ChaCha8Rng) -> LabeledSample {
        use rand::Rng;
        if rng.gen::<bool>() {
            self.sample_planted(rng)
        } else {
            LabeledSample {
                x: self.sample_baseline(rng),
                y: -1,
                latent: None,
            }
        }
    }

    pub fn sample_labeled_batch(&self, n: usize, rng: &mut ChaCha8Rng) -> Vec<LabeledSample> {
        (0..n).map(|_| self.sample_labeled(rng)).collect()
    }

    /// Balanced labeled draw kept in the Fourier domain. MC loops that only
    /// need projections w·x can dot against this spectrum in O(N) and skip
    /// the inverse transform entirely.
    pub fn sample_labeled_spectrum(&self, rng: &mut ChaCha8Rng) -> (Vec<Complex64>, i8) {
        use rand::Rng;
        if rng.gen::<bool>() {
            let mut z = self.baseline_spectrum(rng);
            self.plant_into(&mut z, rng);
            (z, 1)
        } else {
            (self.baseline_spectrum(rng), -1)
        }
    }

    fn inverse(&self, z: &[Complex64]) -> Vec<f64> {
        let mut buf = z.to_vec();
        self.plan.inverse(&mut buf);
        buf.into_iter().map(|c| c.re).collect()
    }
}

/// Pixel-space closed form for a planted draw: the baseline signal plus a
/// single-mode cosine correction,
///
///   x_n = z_n + (2ρ/N) [cos(2πnk0/N + ψ) − cos(2πnk0/N + φ)].
///
/// The modified mode's original contribution is subtracted before the
/// phase-shifted one is added.
pub fn planted_pixel_closed_form(
    z_pixels: &[f64],
    latent: &Latent,
    plant: &PlantSpec,
) -> Vec<f64> {
    let n = z_pixels.len();
    let psi = latent.psi(plant);
    let scale = 2.0 * latent.rho / n as f64;
    z_pixels
        .iter()
        .enumerate()
        .map(|(i, &z)| {
            let base = 2.0 * PI * (i * plant.k0) as f64 / n as f64;
            z + scale * ((base + psi).cos() - (base + latent.phi).cos())
        })
        .collect()
}

/// E[e^{i m ψ}] / E[e^{i m φ}]-style phase factor of the planted mode:
/// the circular average (1/2π) ∫ e^{i(mφ + mεf(φ))} dφ. For f = sin and even
/// m this is the Bessel value J_m(mε); general f falls back to quadrature.
/// The corrector U multiplies this by E[e^{imU}], which is 1 when 4 | m and
/// 0 otherwise.
pub fn phase_factor(plant: &PlantSpec, m: u32) -> Complex64 {
    let corrector = if !plant.use_corrector || m % 4 == 0 {
        Complex64::new(1.0, 0.0)
    } else {
        Complex64::new(0.0, 0.0)
    };
    let base = match (&plant.f, m % 2) {
        (CorrectorF::Sine, 0) => Complex64::new(bessel_j(m, m as f64 * plant.epsilon), 0.0),
        _ => {
            // composite Simpson on [0, 2π]
            let panels = 4096;
            let h = 2.0 * PI / panels as f64;
            let g = |phi: f64| {
                let arg = m as f64 * (phi + plant.epsilon * plant.f.eval(phi));
                Complex64::new(arg.cos(), arg.sin())
            };
            let mut sum = g(0.0) + g(2.0 * PI);
            for i in 1..panels {
                let w = if i % 2 == 1 { 4.0 } else { 2.0 };
                sum += g(i as f64 * h) * w;
            }
            sum * (h / 3.0) / (2.0 * PI)
        }
    };
    base * corrector
}

/// Analytic E[(w·x)^4] under the planted distribution:
///
///   3 (wᵀΣw)² + (2 m₄ / N²) E[ρ_{k0}⁴] Re(ŵ_{k0}⁴),
///
/// with E[ρ⁴] = 2(λ_{k0}N)² from the Rayleigh moment formula, m₄ the order-4
/// phase factor (J₄(4ε) for f = sin), and ŵ_{k0} the unit-normalized DFT
/// projection W_{k0}/√N. For w = cosθ·u + sinθ·v this reduces to
/// 3 + m₄ λ² cos 4θ; for w ⊥ span(u, v) the correction vanishes.
pub fn fourth_moment_oracle(
    spectrum: &CirculantSpectrum,
    plant: &PlantSpec,
    w: &[f64],
) -> Result<f64> {
    let n = spectrum.n();
    if w.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: w.len(),
        });
    }
    plant.validate(n)?;
    let norm2: f64 = w.iter().map(|x| x * x).sum();
    if (norm2 - 1.0).abs() > 1e-8 {
        return Err(Error::InvalidArgument(format!(
            "fourth_moment_oracle needs |w| = 1, got |w|^2 = {norm2}"
        )));
    }
    let gaussian = 3.0 * spectrum.quadratic_form(w).powi(2);
    let big_w = dft(w);
    let w_hat = big_w[plant.k0] / (n as f64).sqrt();
    let lam = spectrum.eigenvalue(plant.k0);
    let rho4 = rayleigh_moment(4, (n as f64 * lam / 2.0).sqrt());
    let m4 = phase_factor(plant, 4);
    let correction = 2.0 / (n as f64).powi(2) * rho4 * (m4.conj() * w_hat.powu(4)).re;
    Ok(gaussian + correction)
}

/// Monte Carlo estimate of E[(w·x)^4] over planted draws, scored against
/// [`fourth_moment_oracle`].
pub fn fourth_moment_mc(
    sampler: &ModelSampler,
    w: &[f64],
    n_mc: usize,
    rng: &mut ChaCha8Rng,
) -> Result<MomentCheck> {
    let target = fourth_moment_oracle(sampler.spectrum(), sampler.plant(), w)?;
    let n = sampler.n();
    let big_w = dft(w);
    let mut acc = Accumulator::new();
    for _ in 0..n_mc {
        let mut z = sampler.baseline_spectrum(rng);
        sampler.plant_into(&mut z, rng);
        // spectral dot: w·x = (1/N) Σ_k W_k conj(Z_k)
        let s = big_w.iter().zip(&z).map(|(a, b)| (a * b.conj()).re).sum::<f64>() / n as f64;
        acc.push(s.powi(4));
    }
    Ok(MomentCheck::from_acc(&acc, target))
}

/// Spectral covariance-preservation battery over planted draws. The planted
/// class must keep the baseline covariance exactly, which for a circulant Σ
/// means per-mode second moments E[|X_k|^2] = N λ_k and vanishing cross
/// moments. Only the k0 row can break (modes are drawn independently and the
/// plant touches k0 alone), so the scan covers every diagonal entry plus the
/// conjugated and plain products of X_{k0} with every other mode; the plain
/// k0 square is the corrector-sensitive entry. Estimates are normalized by N
/// so targets are λ-scale.
pub fn covariance_check(
    sampler: &ModelSampler,
    n_samples: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<(String, MomentCheck)>> {
    if n_samples < 10_000 {
        return Err(Error::InvalidArgument(
            "covariance_check needs >= 1e4 samples".into(),
        ));
    }
    let n = sampler.n();
    let k0 = sampler.plant().k0;
    let nf = n as f64;
    let mut diag = vec![Accumulator::new(); n];
    let mut conj_re = vec![Accumulator::new(); n];
    let mut conj_im = vec![Accumulator::new(); n];
    let mut plain_re = vec![Accumulator::new(); n];
    let mut plain_im = vec![Accumulator::new(); n];
    for _ in 0..n_samples {
        let mut z = sampler.baseline_spectrum(rng);
        sampler.plant_into(&mut z, rng);
        for k in 0..n {
            diag[k].push(z[k].norm_sqr() / nf);
            let conj = z[k0] * z[k].conj() / nf;
            conj_re[k].push(conj.re);
            conj_im[k].push(conj.im);
            let plain = z[k0] * z[k] / nf;
            plain_re[k].push(plain.re);
            plain_im[k].push(plain.im);
        }
    }
    let mut rows = Vec::new();
    for k in 0..n {
        let lam = sampler.spectrum().eigenvalue(k);
        rows.push((format!("diag_k{k}"), MomentCheck::from_acc(&diag[k], lam)));
    }
    let lam0 = sampler.spectrum().eigenvalue(k0);
    for k in 0..n {
        // E[X_{k0} conj(X_k)] = N λ_{k0} δ_{k,k0}
        let target = if k == k0 { lam0 } else { 0.0 };
        rows.push((format!("conj_re_k0_j{k}"), MomentCheck::from_acc(&conj_re[k], target)));
        if k != k0 {
            rows.push((format!("conj_im_k0_j{k}"), MomentCheck::from_acc(&conj_im[k], 0.0)));
        }
        // E[X_{k0} X_k] = N λ_{k0} δ_{k,N-k0}; the k = k0 entry is E[X_{k0}^2],
        // zero only because the corrector U scrambles the doubled phase
        let target = if k == (n - k0) % n { lam0 } else { 0.0 };
        rows.push((format!("plain_re_k0_j{k}"), MomentCheck::from_acc(&plain_re[k], target)));
        if k != (n - k0) % n {
            // at j = N-k0 the product is |X_{k0}|^2: identically real
            rows.push((format!("plain_im_k0_j{k}"), MomentCheck::from_acc(&plain_im[k], 0.0)));
        }
    }
    Ok(rows)
}

/// One scalar MC check: estimate, standard error, and distance from target.
#[derive(Clone, Copy, Debug)]
pub struct MomentCheck {
    pub estimate: f64,
    pub se: f64,
    pub z: f64,
}

impl MomentCheck {
    fn from_acc(acc: &Accumulator, target: f64) -> Self {
        Self {
            estimate: acc.mean(),
            se: acc.sem(),
            z: acc.z_score(target),
        }
    }
}

/// MC third moments E[(w·x)³] for w ∈ {u, v, random unit}: all must vanish.
pub fn third_moment_check(
    sampler: &ModelSampler,
    n_samples: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<MomentCheck>> {
    if n_samples < 10_000 {
        return Err(Error::InvalidArgument(
            "third_moment_check needs >= 1e4 samples".into(),
        ));
    }
    let n = sampler.n();
    let basis = crate::fourier::DftBasis::new(n);
    let k0 = sampler.plant().k0;
    let mut wr = vec![0.0; n];
    {
        let mut normal = Normal::new();
        let mut r = crate::rng::stream(0xD1CE, 17);
        for x in wr.iter_mut() {
            *x = normal.sample(&mut r);
        }
        let norm = wr.iter().map(|x| x * x).sum::<f64>().sqrt();
        for x in wr.iter_mut() {
            *x /= norm;
        }
    }
    let dirs: [&[f64]; 3] = [basis.u(k0), basis.v(k0), &wr];
    let mut accs = [Accumulator::new(), Accumulator::new(), Accumulator::new()];
    for _ in 0..n_samples {
        let s = sampler.sample_planted(rng);
        for (acc, d) in accs.iter_mut().zip(dirs) {
            let p: f64 = d.iter().zip(&s.x).map(|(a, b)| a * b).sum();
            acc.push(p.powi(3));
        }
    }
    Ok(accs.iter().map(|a| MomentCheck::from_acc(a, 0.0)).collect())
}

/// Complex second moment of the modified mode, E[X_{k0}²]. The corrector U
/// drives it to zero; without U it sits at N λ J₂(2ε) (for f = sin), which is
/// the translation-invariance breakage the corrector exists to fix.
#[derive(Clone, Copy, Debug)]
pub struct CorrectorAblation {
    pub re: MomentCheck,
    pub im: MomentCheck,
    /// |estimate| measured in combined standard errors
    pub z_abs: f64,
}

pub fn corrector_ablation_check(
    sampler: &ModelSampler,
    n_samples: usize,
    rng: &mut ChaCha8Rng,
) -> CorrectorAblation {
    let k0 = sampler.plant().k0;
    let mut re = Accumulator::new();
    let mut im = Accumulator::new();
    for _ in 0..n_samples {
        let mut z = sampler.baseline_spectrum(rng);
        sampler.plant_into(&mut z, rng);
        let sq = z[k0] * z[k0];
        re.push(sq.re);
        im.push(sq.im);
    }
    let rc = MomentCheck::from_acc(&re, 0.0);
    let ic = MomentCheck::from_acc(&im, 0.0);
    let mag = (rc.estimate.powi(2) + ic.estimate.powi(2)).sqrt();
    let se = (rc.se.powi(2) + ic.se.powi(2)).sqrt();
    CorrectorAblation {
        re: rc,
        im: ic,
        z_abs: if se == 0.0 { 0.0 } else { mag / se },
    }
}

/// KS distance of mode-k phases against Uniform[−π, π), with the 1% critical
/// value. `pass` means the uniformity hypothesis survives.
#[derive(Clone, Copy, Debug)]
pub struct PhaseUniformity {
    pub statistic: f64,
    pub critical: f64,
    pub pass: bool,
}

/// Test phase uniformity of mode `k` over fresh draws; `planted` selects the
/// class. Unmodified modes stay uniform in both classes; the modified mode
/// under P concentrates near the stable angles once ε is order one.
pub fn phase_uniformity_check(
    sampler: &ModelSampler,
    k: usize,
    planted: bool,
    n_samples: usize,
    rng: &mut ChaCha8Rng,
) -> Result<PhaseUniformity> {
    if n_samples < 10_000 {
        return Err(Error::InvalidArgument(
            "phase_uniformity_check needs >= 1e4 samples".into(),
        ));
    }
    let n = sampler.n();
    if k == 0 || k >= n || (n % 2 == 0 && k == n / 2) {
        return Err(Error::BadMode { k0: k, n });
    }
    let mut phases = Vec::with_capacity(n_samples);
    for _ in 0..n_samples {
        let mut z = sampler.baseline_spectrum(rng);
        if planted {
            sampler.plant_into(&mut z, rng);
        }
        // shift atan2's (−π, π] range onto [0, 2π) for the uniform KS
        let mut p = z[k].im.atan2(z[k].re);
        if p < 0.0 {
            p += 2.0 * PI;
        }
        phases.push(p);
    }
    let statistic = ks_uniform(&phases, 2.0 * PI)?;
    let critical = ks_critical(n_samples, 0.01)?;
    Ok(PhaseUniformity {
        statistic,
        critical,
        pass: statistic < critical,
    })
}

/// Write a labeled batch as CSV: `sample_id,label,x_0..x_{N-1}` with the seed
/// recorded in a leading comment line.
pub fn write_batch_csv(
    out: &mut dyn std::io::Write,
    batch: &[LabeledSample],
    seed: u64,
) -> Result<()> {
    writeln!(out, "# seed={seed}")?;
    let n = batch.first().map_or(0, |s| s.x.len());
    let mut header = String::from("sample_id,label");
    for i in 0..n {
        header.push_str(&format!(",x_{i}"));
    }
    writeln!(out, "{header}")?;
    for (id, s) in batch.iter().enumerate() {
        let mut line = format!("{id},{}", s.y);
        for v in &s.x {
            line.push_str(&format!(",{v:.17e}"));
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}
