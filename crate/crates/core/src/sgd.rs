//! Online SGD on the pointwise correlation loss ℓ(w; x, y) = 1 − y σ(w·x),
//! in the spherical (normalized) and penalized (free-norm) variants.
//!
//! Sign convention: steps descend the loss, w ← w + δ·y σ′(w·x)·x before
//! projection or penalty. The mirrored update (ascent on ℓ) is available as
//! a config toggle for comparison runs; the descent choice is the one
//! validated by the windowed-loss and recovery tests.
//!
//! The run loop never leaves the Fourier domain: the sampler draws spectra,
//! the weight is kept as its DFT, projections are spectral dot products, and
//! updates are linear, so each step costs O(N) with no transform. Pixel-space
//! step functions are exposed for direct use and as the reference the
//! spectral path is tested against.

use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::fourier::dft;
use crate::model::{LabeledSample, ModelSampler};
use crate::oracles::OverlapState;
use crate::rng::{stream, Normal};
use crate::special::Activation;
use crate::stats::quantile;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SgdVariant {
    /// Weight renormalized to the unit sphere after every step; the update
    /// direction is projected onto the tangent space first.
    Spherical,
    /// Free norm with the quartic penalty β‖w‖⁴ added to the pointwise loss.
    Penalized,
}

/// Snapshot cadence of a run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Cadence {
    /// Record every k steps.
    Every(usize),
    /// Record at ~`per_decade` log-spaced step counts per factor of 10.
    /// The default for long runs, whose interesting scales span decades.
    LogSpaced { per_decade: usize },
}

impl Cadence {
    /// Sorted unique step indices to snapshot, always including 0 and
    /// `steps`.
    pub fn checkpoints(&self, steps: usize) -> Result<Vec<usize>> {
        let mut cps = vec![0];
        match *self {
            Cadence::Every(k) => {
                if k == 0 {
                    return Err(Error::InvalidArgument("cadence stride must be >= 1".into()));
                }
                let mut s = k;
                while s < steps {
                    cps.push(s);
                    s += k;
                }
            }
            Cadence::LogSpaced { per_decade } => {
                if per_decade == 0 {
                    return Err(Error::InvalidArgument(
                        "log cadence needs >= 1 point per decade".into(),
                    ));
                }
                let mut j = 0u32;
                loop {
                    let s = 10f64.powf(j as f64 / per_decade as f64).round() as usize;
                    if s >= steps {
                        break;
                    }
                    if s > *cps.last().unwrap() {
                        cps.push(s);
                    }
                    j += 1;
                }
            }
        }
        if steps > 0 {
            cps.push(steps);
        }
        Ok(cps)
    }
}

#[derive(Clone, Debug)]
pub struct SgdConfig {
    pub variant: SgdVariant,
    /// Learning rate is δ_N = delta_scale / N unless `delta_override` is set.
    pub delta_scale: f64,
    pub delta_override: Option<f64>,
    /// Norm-penalty weight; only the penalized variant reads it.
    pub beta: f64,
    pub steps: usize,
    pub record_every: Cadence,
    /// Weak-recovery threshold η used by summaries.
    pub eta_threshold: f64,
    /// Step along +∇ℓ instead of −∇ℓ (mirror dynamics probe).
    pub ascend: bool,
}

impl SgdConfig {
    pub fn spherical(delta_scale: f64, steps: usize) -> Self {
        Self {
            variant: SgdVariant::Spherical,
            delta_scale,
            delta_override: None,
            beta: 0.0,
            steps,
            record_every: Cadence::LogSpaced { per_decade: 20 },
            eta_threshold: 0.25,
            ascend: false,
        }
    }

    pub fn penalized(delta_scale: f64, beta: f64, steps: usize) -> Self {
        Self {
            variant: SgdVariant::Penalized,
            beta,
            ..Self::spherical(delta_scale, steps)
        }
    }

    pub fn effective_delta(&self, n: usize) -> f64 {
        self.delta_override.unwrap_or(self.delta_scale / n as f64)
    }

    pub fn validate(&self) -> Result<()> {
        match self.delta_override {
            Some(d) if d <= 0.0 => {
                return Err(Error::InvalidArgument("delta override must be positive".into()));
            }
            None if self.delta_scale <= 0.0 => {
                return Err(Error::InvalidArgument(format!(
                    "delta_scale must be positive, got {}",
                    self.delta_scale
                )));
            }
            _ => {}
        }
        if self.beta < 0.0 {
            return Err(Error::InvalidArgument("beta must be nonnegative".into()));
        }
        if !(0.0..1.0).contains(&self.eta_threshold) || self.eta_threshold <= 0.0 {
            return Err(Error::InvalidArgument("eta_threshold must lie in (0, 1)".into()));
        }
        self.record_every.checkpoints(0).map(|_| ())
    }

    /// The stability window for the learning rate at dimension N:
    /// 1/(N² ln²N) < δ_N < 1/(N ln N). Too small and the search phase cannot
    /// finish in any polynomial budget; too large and the normalized update
    /// no longer tracks its drift ODE.
    pub fn validate_rate_window(&self, n: usize) -> Result<()> {
        let delta = self.effective_delta(n);
        let ln = (n as f64).ln();
        let lo = 1.0 / ((n * n) as f64 * ln * ln);
        let hi = 1.0 / (n as f64 * ln);
        if delta <= lo || delta >= hi {
            return Err(Error::InvalidArgument(format!(
                "delta {delta:.3e} outside stability window ({lo:.3e}, {hi:.3e}) at N = {n}"
            )));
        }
        Ok(())
    }
}

/// One run's recorded history. `loss_window[i]` is the mean pointwise loss
/// over the steps since the previous checkpoint (NaN at index 0, where no
/// steps have been taken).
#[derive(Clone, Debug)]
pub struct RunTrace {
    pub seed: u64,
    pub steps: Vec<usize>,
    pub stats: Vec<OverlapState>,
    pub loss_window: Vec<f64>,
}

/// ∇_w ℓ = −y σ′(w·x) x of the pointwise loss.
pub fn pointwise_gradient(w: &[f64], sample: &LabeledSample, activation: &Activation) -> Vec<f64> {
    let s: f64 = w.iter().zip(&sample.x).map(|(a, b)| a * b).sum();
    let c = -(sample.y as f64) * activation.deriv(s);
    sample.x.iter().map(|&x| c * x).collect()
}

/// (I − wwᵀ)g for unit w: the component of g tangent to the sphere at w.
pub fn project_tangent(w: &[f64], g: &[f64]) -> Vec<f64> {
    let wg: f64 = w.iter().zip(g).map(|(a, b)| a * b).sum();
    w.iter().zip(g).map(|(&wi, &gi)| gi - wg * wi).collect()
}

/// One spherical descent step: w̃ = normalize(w + δ·(I − wwᵀ)(−∇ℓ)).
/// Expects |w| = 1; the tangent update can only grow the norm, but the
/// degenerate case is still guarded.
pub fn spherical_step(
    w: &[f64],
    sample: &LabeledSample,
    activation: &Activation,
    delta: f64,
) -> Result<Vec<f64>> {
    let grad = pointwise_gradient(w, sample, activation);
    let tangent = project_tangent(w, &grad);
    let mut out: Vec<f64> = w
        .iter()
        .zip(&tangent)
        .map(|(&wi, &ti)| wi - delta * ti)
        .collect();
    let norm = out.iter().map(|a| a * a).sum::<f64>().sqrt();
    if norm < 1e-12 {
        return Err(Error::ZeroNorm);
    }
    for o in &mut out {
        *o /= norm;
    }
    Ok(out)
}

/// One penalized descent step: w̃ = w − δ(∇ℓ + 4β‖w‖²w). No normalization;
/// the quartic penalty supplies the restoring force.
pub fn penalized_step(
    w: &[f64],
    sample: &LabeledSample,
    activation: &Activation,
    delta: f64,
    beta: f64,
) -> Vec<f64> {
    let grad = pointwise_gradient(w, sample, activation);
    let r: f64 = w.iter().map(|a| a * a).sum();
    let shrink = 4.0 * beta * r;
    w.iter()
        .zip(&grad)
        .map(|(&wi, &gi)| wi - delta * (gi + shrink * wi))
        .collect()
}

/// Overlap statistics read directly off the weight's DFT W: for a paired
/// mode k, α_u = √(2/N)·Re W_k and α_v = −√(2/N)·Im W_k, and the norm is
/// ‖w‖² = (1/N) Σ_k |W_k|².
pub fn overlaps_from_spectrum(
    w_spec: &[Complex64],
    k0: usize,
    principal_modes: &[usize],
) -> OverlapState {
    let n = w_spec.len();
    let scale = (2.0 / n as f64).sqrt();
    let read = |k: usize| (scale * w_spec[k].re, -scale * w_spec[k].im);
    let (alpha_u, alpha_v) = read(k0);
    let (alpha_um, alpha_vm): (Vec<f64>, Vec<f64>) =
        principal_modes.iter().map(|&m| read(m)).unzip();
    let r = w_spec.iter().map(|c| c.norm_sqr()).sum::<f64>() / n as f64;
    let used = alpha_u * alpha_u
        + alpha_v * alpha_v
        + alpha_um.iter().map(|a| a * a).sum::<f64>()
        + alpha_vm.iter().map(|a| a * a).sum::<f64>();
    OverlapState {
        alpha_u,
        alpha_v,
        alpha_um,
        alpha_vm,
        omega_perp: (r - used).max(0.0).sqrt(),
        r,
    }
}

fn spectral_dot(a: &[Complex64], b: &[Complex64], n: usize) -> f64 {
    let s: Complex64 = a.iter().zip(b).map(|(x, y)| x * y.conj()).sum();
    s.re / n as f64
}

fn check_modes(n: usize, k0: usize, principal_modes: &[usize]) -> Result<()> {
    for &m in principal_modes {
        if m == 0 || 2 * m >= n {
            return Err(Error::BadMode { k0: m, n });
        }
        if m == k0 {
            return Err(Error::InvalidArgument(format!(
                "principal mode {m} duplicates the planted mode"
            )));
        }
    }
    Ok(())
}

/// Run online SGD from a fresh random initialization, drawing one labeled
/// sample per step, and snapshot the overlap statistics on the configured
/// cadence. Initialization is Unif(S^{N−1}) for the spherical variant and
/// N(0, I/N) for the penalized one. The whole run is a deterministic
/// function of `seed`.
pub fn run_online(
    sampler: &ModelSampler,
    activation: &Activation,
    cfg: &SgdConfig,
    principal_modes: &[usize],
    seed: u64,
) -> Result<RunTrace> {
    cfg.validate()?;
    let n = sampler.n();
    let k0 = sampler.plant().k0;
    check_modes(n, k0, principal_modes)?;
    let delta = cfg.effective_delta(n);
    let mut rng = stream(seed, 0);

    // pixel-space init, transformed once
    let mut normal = Normal::new();
    let mut w0: Vec<f64> = (0..n).map(|_| normal.sample(&mut rng)).collect();
    let scale = match cfg.variant {
        SgdVariant::Spherical => {
            let norm = w0.iter().map(|a| a * a).sum::<f64>().sqrt();
            if norm < 1e-12 {
                return Err(Error::ZeroNorm);
            }
            1.0 / norm
        }
        SgdVariant::Penalized => 1.0 / (n as f64).sqrt(),
    };
    for v in &mut w0 {
        *v *= scale;
    }
    let mut w_spec = dft(&w0);

    let checkpoints = cfg.record_every.checkpoints(cfg.steps)?;
    let mut trace = RunTrace {
        seed,
        steps: Vec::with_capacity(checkpoints.len()),
        stats: Vec::with_capacity(checkpoints.len()),
        loss_window: Vec::with_capacity(checkpoints.len()),
    };
    trace.steps.push(0);
    trace.stats.push(overlaps_from_spectrum(&w_spec, k0, principal_modes));
    trace.loss_window.push(f64::NAN);

    let mut cp_iter = checkpoints.iter().skip(1).copied().peekable();
    let mut window_sum = 0.0;
    let mut window_count = 0usize;
    let inv_n = 1.0 / n as f64;

    for step in 1..=cfg.steps {
        let (z, y) = sampler.sample_labeled_spectrum(&mut rng);
        let s = spectral_dot(&w_spec, &z, n);
        window_sum += 1.0 - y as f64 * activation.eval(s);
        window_count += 1;
        // descent moves along +yσ′(s)·x
        let mut coef = delta * y as f64 * activation.deriv(s);
        if cfg.ascend {
            coef = -coef;
        }
        match cfg.variant {
            SgdVariant::Spherical => {
                // tangent projection: w·(coef·x) = coef·s on the unit sphere
                let radial = coef * s;
                for (wk, zk) in w_spec.iter_mut().zip(&z) {
                    *wk += coef * zk - radial * *wk;
                }
                let norm2 = w_spec.iter().map(|c| c.norm_sqr()).sum::<f64>() * inv_n;
                if norm2 < 1e-24 {
                    return Err(Error::ZeroNorm);
                }
                let inv = 1.0 / norm2.sqrt();
                for wk in &mut w_spec {
                    *wk *= inv;
                }
            }
            SgdVariant::Penalized => {
                let r = w_spec.iter().map(|c| c.norm_sqr()).sum::<f64>() * inv_n;
                let keep = 1.0 - delta * 4.0 * cfg.beta * r;
                for (wk, zk) in w_spec.iter_mut().zip(&z) {
                    *wk = *wk * keep + coef * zk;
                }
            }
        }
        if cp_iter.peek() == Some(&step) {
            cp_iter.next();
            trace.steps.push(step);
            trace
                .stats
                .push(overlaps_from_spectrum(&w_spec, k0, principal_modes));
            trace.loss_window.push(if window_count > 0 {
                window_sum / window_count as f64
            } else {
                f64::NAN
            });
            window_sum = 0.0;
            window_count = 0;
        }
    }
    Ok(trace)
}

/// Independent runs on consecutive seeds `seed_base..seed_base + n_runs`,
/// executed concurrently.
pub fn run_many(
    sampler: &ModelSampler,
    activation: &Activation,
    cfg: &SgdConfig,
    principal_modes: &[usize],
    seed_base: u64,
    n_runs: usize,
) -> Result<Vec<RunTrace>> {
    (0..n_runs as u64)
        .into_par_iter()
        .map(|i| run_online(sampler, activation, cfg, principal_modes, seed_base + i))
        .collect()
}

/// Cross-seed summary at one checkpoint.
#[derive(Clone, Copy, Debug)]
pub struct RecoveryRow {
    pub step: usize,
    pub med_abs_alpha_u: f64,
    pub med_abs_alpha_v: f64,
    pub med_phase_norm: f64,
    pub q25_phase_norm: f64,
    pub q75_phase_norm: f64,
    pub med_principal_norm: f64,
    pub q25_principal_norm: f64,
    pub q75_principal_norm: f64,
    /// Fraction of runs whose phase-subspace norm is at least η.
    pub frac_recovered: f64,
    pub med_loss_window: f64,
}

/// Per-checkpoint medians, quartiles, and the weak-recovery fraction at
/// threshold `eta` across runs. All traces must share the same step grid.
pub fn recovery_summary(traces: &[RunTrace], eta: f64) -> Result<Vec<RecoveryRow>> {
    let first = traces
        .first()
        .ok_or_else(|| Error::InvalidArgument("no traces to summarize".into()))?;
    for t in traces {
        if t.steps != first.steps {
            return Err(Error::InvalidArgument(
                "traces have mismatched checkpoint grids".into(),
            ));
        }
    }
    // inputs below are non-empty by the check above, so quantile cannot fail
    let q = |xs: &[f64], p: f64| quantile(xs, p).expect("non-empty sample");
    let rows = first
        .steps
        .iter()
        .enumerate()
        .map(|(i, &step)| {
            let collect = |f: &dyn Fn(&RunTrace) -> f64| -> Vec<f64> {
                traces.iter().map(f).collect()
            };
            let phase: Vec<f64> = collect(&|t| t.stats[i].phase_norm());
            let principal: Vec<f64> = collect(&|t| t.stats[i].principal_norm());
            let losses: Vec<f64> = traces
                .iter()
                .map(|t| t.loss_window[i])
                .filter(|v| v.is_finite())
                .collect();
            RecoveryRow {
                step,
                med_abs_alpha_u: q(&collect(&|t| t.stats[i].alpha_u.abs()), 0.5),
                med_abs_alpha_v: q(&collect(&|t| t.stats[i].alpha_v.abs()), 0.5),
                med_phase_norm: q(&phase, 0.5),
                q25_phase_norm: q(&phase, 0.25),
                q75_phase_norm: q(&phase, 0.75),
                med_principal_norm: q(&principal, 0.5),
                q25_principal_norm: q(&principal, 0.25),
                q75_principal_norm: q(&principal, 0.75),
                frac_recovered: phase.iter().filter(|&&v| v >= eta).count() as f64
                    / phase.len() as f64,
                med_loss_window: if losses.is_empty() {
                    f64::NAN
                } else {
                    q(&losses, 0.5)
                },
            }
        })
        .collect();
    Ok(rows)
}

/// First checkpoint step where `value(row)` reaches `threshold`.
pub fn first_crossing(
    rows: &[RecoveryRow],
    value: impl Fn(&RecoveryRow) -> f64,
    threshold: f64,
) -> Option<usize> {
    rows.iter().find(|r| value(r) >= threshold).map(|r| r.step)
}

/// Checkpoint step where `value(row)` is largest (first one on ties).
pub fn argmax_step(rows: &[RecoveryRow], value: impl Fn(&RecoveryRow) -> f64) -> Option<usize> {
    rows.iter()
        .max_by(|a, b| value(a).partial_cmp(&value(b)).unwrap_or(std::cmp::Ordering::Equal))
        .map(|r| r.step)
}

/// Trace export: one row per (run, checkpoint).
pub fn write_trace_csv(traces: &[RunTrace], out: &mut dyn Write) -> Result<()> {
    writeln!(
        out,
        "step,seed,alpha_u,alpha_v,phase_norm,principal_norm,omega_perp,loss_window"
    )?;
    for t in traces {
        for (i, &step) in t.steps.iter().enumerate() {
            let s = &t.stats[i];
            writeln!(
                out,
                "{},{},{:.9e},{:.9e},{:.9e},{:.9e},{:.9e},{:.9e}",
                step,
                t.seed,
                s.alpha_u,
                s.alpha_v,
                s.phase_norm(),
                s.principal_norm(),
                s.omega_perp,
                t.loss_window[i]
            )?;
        }
    }
    Ok(())
}

pub fn write_recovery_csv(rows: &[RecoveryRow], out: &mut dyn Write) -> Result<()> {
    writeln!(
        out,
        "step,med_abs_alpha_u,med_abs_alpha_v,med_phase_norm,q25_phase_norm,q75_phase_norm,\
         med_principal_norm,q25_principal_norm,q75_principal_norm,frac_recovered,med_loss_window"
    )?;
    for r in rows {
        writeln!(
            out,
            "{},{:.9e},{:.9e},{:.9e},{:.9e},{:.9e},{:.9e},{:.9e},{:.9e},{:.6},{:.9e}",
            r.step,
            r.med_abs_alpha_u,
            r.med_abs_alpha_v,
            r.med_phase_norm,
            r.q25_phase_norm,
            r.q75_phase_norm,
            r.med_principal_norm,
            r.q25_principal_norm,
            r.q75_principal_norm,
            r.frac_recovered,
            r.med_loss_window
        )?;
    }
    Ok(())
}
