//! Special functions: probabilists' Hermite polynomials, Gauss-Hermite
//! quadrature, Bessel functions of the first kind, Rayleigh moments, and the
//! activation functions used by the single-neuron and shallow-net experiments.
//!
//! Hermite conventions are probabilists' throughout: `h_0 = 1`, `h_1 = x`,
//! `h_{k+1}(x) = x h_k(x) - k h_{k-1}(x)`, orthogonal under N(0,1) with
//! `E[h_i h_j] = i! δ_ij`.

use std::sync::OnceLock;

/// Probabilists' Hermite polynomial `h_k(x)` by the three-term recurrence.
pub fn hermite_poly(k: u32, x: f64) -> f64 {
    match k {
        0 => 1.0,
        1 => x,
        _ => {
            let (mut prev, mut cur) = (1.0, x);
            for j in 1..k {
                let next = x * cur - (j as f64) * prev;
                prev = cur;
                cur = next;
            }
            cur
        }
    }
}

/// Gauss-Hermite nodes and weights for the probabilists' weight
/// `e^{-x^2/2} / sqrt(2π)`, i.e. `Σ w_i f(x_i) ≈ E[f(G)]` for `G ~ N(0,1)`.
///
/// Nodes are the roots of `h_order`, found by bisection on the interlacing
/// brackets built up order by order; weights come from the orthonormal
/// Christoffel identity `w_i = 1 / Σ_{j<order} ĥ_j(x_i)^2`.
pub fn gauss_hermite(order: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(order >= 1, "quadrature order must be positive");
    // Orthonormal recurrence ĥ_{j+1} = (x ĥ_j - sqrt(j) ĥ_{j-1}) / sqrt(j+1)
    // keeps values bounded out to the extreme roots.
    let eval = |n: usize, x: f64| -> f64 {
        let (mut prev, mut cur) = (0.0, 1.0);
        for j in 0..n {
            let next = (x * cur - (j as f64).sqrt() * prev) / ((j + 1) as f64).sqrt();
            prev = cur;
            cur = next;
        }
        cur
    };
    let mut roots: Vec<f64> = vec![];
    for n in 1..=order {
        // Roots of ĥ_n interlace those of ĥ_{n-1}; pad with an outer bound.
        let bound = 2.0 * (n as f64).sqrt() + 5.0;
        let mut brackets = Vec::with_capacity(n + 1);
        brackets.push(-bound);
        brackets.extend_from_slice(&roots);
        brackets.push(bound);
        let mut next = Vec::with_capacity(n);
        for w in brackets.windows(2) {
            let (mut lo, mut hi) = (w[0], w[1]);
            let flo = eval(n, lo);
            debug_assert!(flo * eval(n, hi) <= 0.0);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if eval(n, mid) * flo <= 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
                if hi - lo < 1e-15 * (1.0 + mid.abs()) {
                    break;
                }
            }
            next.push(0.5 * (lo + hi));
        }
        roots = next;
    }
    let weights: Vec<f64> = roots
        .iter()
        .map(|&x| {
            let mut sum = 0.0;
            let (mut prev, mut cur) = (0.0, 1.0);
            for j in 0..order {
                sum += cur * cur;
                let next = (x * cur - (j as f64).sqrt() * prev) / ((j + 1) as f64).sqrt();
                prev = cur;
                cur = next;
            }
            1.0 / sum
        })
        .collect();
    (roots, weights)
}

/// Hermite coefficient `c_k = E[f(G) h_k(G)]` by Gauss-Hermite quadrature.
///
/// Evaluated at the given order and at twice that order; the two must agree to
/// `1e-8` in absolute + relative terms or the routine panics, so a silently
/// under-resolved integrand cannot leak into downstream constants.
pub fn hermite_coeff(f: impl Fn(f64) -> f64, k: u32, order: usize) -> f64 {
    assert!(order >= 80, "quadrature order must be at least 80");
    let at = |ord: usize| -> f64 {
        let (xs, ws) = gauss_hermite(ord);
        xs.iter()
            .zip(&ws)
            .map(|(&x, &w)| w * f(x) * hermite_poly(k, x))
            .sum()
    };
    let coarse = at(order);
    let fine = at(2 * order);
    let tol = 1e-8 * (1.0 + coarse.abs().max(fine.abs()));
    assert!(
        (coarse - fine).abs() <= tol,
        "hermite_coeff did not converge: order {order} gave {coarse}, order {} gave {fine}",
        2 * order
    );
    fine
}

/// Bessel function of the first kind `J_m(z)` for integer order, by the
/// ascending series `Σ_s (-1)^s (z/2)^{m+2s} / (s! (m+s)!)`, truncated when a
/// term falls below `1e-16` of the accumulated magnitude scale.
///
/// Domain `|z| <= 12`: the alternating series loses roughly e^z in
/// cancellation, so 12 keeps absolute accuracy near 1e-11 while covering
/// every argument the likelihood coefficients need (z = 4ε with ε <= 3).
/// Large-z asymptotic expansions are deliberately out of scope.
pub fn bessel_j(m: u32, z: f64) -> f64 {
    assert!(z.abs() <= 12.0, "bessel_j series domain is |z| <= 12");
    let half = 0.5 * z;
    // term_0 = (z/2)^m / m!
    let mut term = 1.0;
    for j in 1..=m {
        term *= half / j as f64;
    }
    let mut sum = term;
    let mut scale: f64 = term.abs().max(1e-300);
    for s in 1..500u32 {
        term *= -(half * half) / (s as f64 * (m + s) as f64);
        sum += term;
        scale = scale.max(term.abs());
        if term.abs() < 1e-16 * scale.max(sum.abs()) {
            break;
        }
    }
    sum
}

/// Raw moment `E[Y^k]` of a Rayleigh variable with scale `sigma`:
/// `sigma^k 2^{k/2} Γ(1 + k/2)`.
pub fn rayleigh_moment(k: u32, sigma: f64) -> f64 {
    assert!(sigma > 0.0, "rayleigh scale must be positive");
    sigma.powi(k as i32) * 2f64.powf(k as f64 / 2.0) * gamma_half_int(k + 2)
}

/// `Γ(n/2)` for positive integer `n`; covers every argument `1 + k/2` above.
fn gamma_half_int(n: u32) -> f64 {
    assert!(n >= 1);
    if n % 2 == 0 {
        // Γ(m) = (m-1)!
        let m = n / 2;
        (1..m).map(|j| j as f64).product()
    } else {
        // Γ(m + 1/2) = sqrt(π) (2m)! / (4^m m!)
        let m = (n - 1) / 2;
        let mut val = std::f64::consts::PI.sqrt();
        for j in 1..=m {
            // multiply by (j - 1/2)
            val *= j as f64 - 0.5;
        }
        val
    }
}

/// Activation for the single neuron and the shallow net. The two built-ins are
/// the quartic Hermite polynomial and `log cosh`; `User` admits any pair of
/// function and derivative.
#[derive(Clone, Copy)]
pub enum Activation {
    /// `σ(s) = h_4(s) = s^4 - 6 s^2 + 3`; Hermite coefficients c4 = 24, rest 0.
    Hermite4,
    /// `σ(s) = log cosh(s)`, even and smooth with nonzero c2, c4, c6.
    LogCosh,
    /// Custom activation; `df` must be the derivative of `f`.
    User { f: fn(f64) -> f64, df: fn(f64) -> f64 },
}

impl std::fmt::Debug for Activation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Activation::Hermite4 => "Hermite4",
            Activation::LogCosh => "LogCosh",
            Activation::User { .. } => "User",
        })
    }
}

/// Even Hermite coefficients of an activation, the only ones the leading-order
/// theory consumes: `c_k = E[σ(G) h_k(G)]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SigmaCoeffs {
    pub c2: f64,
    pub c4: f64,
    pub c6: f64,
}

/// Numerically stable `log cosh`: `|s| + log(1 + e^{-2|s|}) - log 2`.
fn log_cosh(s: f64) -> f64 {
    let a = s.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

impl Activation {
    pub fn eval(&self, s: f64) -> f64 {
        match self {
            Activation::Hermite4 => hermite_poly(4, s),
            Activation::LogCosh => log_cosh(s),
            Activation::User { f, .. } => f(s),
        }
    }

    pub fn deriv(&self, s: f64) -> f64 {
        match self {
            Activation::Hermite4 => 4.0 * s * s * s - 12.0 * s,
            Activation::LogCosh => s.tanh(),
            Activation::User { df, .. } => df(s),
        }
    }

    /// Hermite coefficients c2, c4, c6 by quadrature (cached for the built-ins).
    pub fn coeffs(&self) -> SigmaCoeffs {
        static H4: OnceLock<SigmaCoeffs> = OnceLock::new();
        static LC: OnceLock<SigmaCoeffs> = OnceLock::new();
        let compute = |a: &Activation| SigmaCoeffs {
            c2: hermite_coeff(|x| a.eval(x), 2, 80),
            c4: hermite_coeff(|x| a.eval(x), 4, 80),
            c6: hermite_coeff(|x| a.eval(x), 6, 80),
        };
        match self {
            Activation::Hermite4 => *H4.get_or_init(|| compute(self)),
            Activation::LogCosh => *LC.get_or_init(|| compute(self)),
            Activation::User { .. } => compute(self),
        }
    }
}
