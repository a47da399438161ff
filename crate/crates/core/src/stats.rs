//! Sample summaries used by the Monte Carlo validation battery and the
//! experiment reports: mean/variance with standard errors, quantiles by
//! linear interpolation, z-scores against a known target, and the
//! one-sample Kolmogorov-Smirnov statistic for uniformity checks.

use crate::{Error, Result};

/// Running mean and unbiased variance in one pass (Welford).
#[derive(Debug, Clone, Default)]
pub struct Accumulator {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Accumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance; 0 for fewer than two samples.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    pub fn std_dev(&self) -> f64 {
        self.variance().sqrt()
    }

    /// Standard error of the mean.
    pub fn sem(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            (self.variance() / self.n as f64).sqrt()
        }
    }

    /// Distance of the sample mean from `target` in units of the SEM.
    /// Infinite when the SEM is zero but the means differ.
    pub fn z_score(&self, target: f64) -> f64 {
        let se = self.sem();
        let d = self.mean - target;
        if se == 0.0 {
            if d == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            d / se
        }
    }

    pub fn merge(&mut self, other: &Accumulator) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = other.clone();
            return;
        }
        let n1 = self.n as f64;
        let n2 = other.n as f64;
        let d = other.mean - self.mean;
        self.mean += d * n2 / (n1 + n2);
        self.m2 += other.m2 + d * d * n1 * n2 / (n1 + n2);
        self.n += other.n;
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Quantile by linear interpolation between order statistics
/// (the common "type 7" rule: h = q*(n-1)).
pub fn quantile(xs: &[f64], q: f64) -> Result<f64> {
    if xs.is_empty() {
        return Err(Error::InvalidArgument("quantile of empty sample".into()));
    }
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::InvalidArgument(format!(
            "quantile level {q} outside [0,1]"
        )));
    }
    let mut s = xs.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).expect("NaN in quantile input"));
    let h = q * (s.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    Ok(s[lo] + (h - lo as f64) * (s[hi] - s[lo]))
}

pub fn median(xs: &[f64]) -> Result<f64> {
    quantile(xs, 0.5)
}

/// One-sample KS statistic sup|F_n - F| against the uniform law on [0, hi).
pub fn ks_uniform(xs: &[f64], hi: f64) -> Result<f64> {
    if xs.is_empty() {
        return Err(Error::InvalidArgument("KS of empty sample".into()));
    }
    if hi <= 0.0 {
        return Err(Error::InvalidArgument("KS upper bound must be positive".into()));
    }
    let mut s = xs.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).expect("NaN in KS input"));
    let n = s.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in s.iter().enumerate() {
        let f = (x / hi).clamp(0.0, 1.0);
        let lo_step = i as f64 / n;
        let hi_step = (i + 1) as f64 / n;
        d = d.max((f - lo_step).abs()).max((hi_step - f).abs());
    }
    Ok(d)
}

/// Asymptotic critical value for the KS statistic at significance `alpha`,
/// D_crit = c(alpha)/sqrt(n) with c from the Kolmogorov distribution.
pub fn ks_critical(n: usize, alpha: f64) -> Result<f64> {
    let c = match alpha {
        a if (a - 0.10).abs() < 1e-12 => 1.224,
        a if (a - 0.05).abs() < 1e-12 => 1.358,
        a if (a - 0.01).abs() < 1e-12 => 1.628,
        _ => {
            return Err(Error::InvalidArgument(format!(
                "no tabulated KS constant for alpha={alpha}"
            )))
        }
    };
    Ok(c / (n as f64).sqrt())
}

/// One-sided one-sample t statistic for H0: mean <= 0.
pub fn t_statistic(xs: &[f64]) -> Result<f64> {
    if xs.len() < 2 {
        return Err(Error::InvalidArgument("t statistic needs >= 2 samples".into()));
    }
    let mut acc = Accumulator::new();
    for &x in xs {
        acc.push(x);
    }
    Ok(acc.mean() / acc.sem())
}
