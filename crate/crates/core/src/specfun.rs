//! Scalar special functions: log-gamma, digamma, the Gauss function 2F1 on
//! `[0, 1]`, and the 3F2(1, 1, (d+1)/2; 2, d; z) kernel of the logarithmic
//! sphere potential.

use crate::error::{domain, Error, Result};
use crate::quad::tanh_sinh;
use std::f64::consts::PI;

/// Numerical controls for the hypergeometric evaluators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpecFunConfig {
    pub rel_tol: f64,
    pub max_terms: usize,
    /// Node budget unit for quadrature fallbacks; refinement stops after
    /// `64 * quad_nodes` integrand evaluations.
    pub quad_nodes: usize,
}

impl Default for SpecFunConfig {
    fn default() -> Self {
        SpecFunConfig {
            rel_tol: 1e-12,
            max_terms: 10_000,
            quad_nodes: 256,
        }
    }
}

impl SpecFunConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) {
            return domain(format!("rel_tol must be positive, got {}", self.rel_tol));
        }
        if self.max_terms < 64 {
            return domain(format!("max_terms must be at least 64, got {}", self.max_terms));
        }
        if self.quad_nodes == 0 {
            return domain("quad_nodes must be positive");
        }
        Ok(())
    }

    fn max_evals(&self) -> usize {
        self.quad_nodes.saturating_mul(64)
    }
}

/// Arguments of `2F1(a, b; c; z)` with `z` in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hyp2F1Args {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub z: f64,
}

impl Hyp2F1Args {
    pub fn new(a: f64, b: f64, c: f64, z: f64) -> Self {
        Hyp2F1Args { a, b, c, z }
    }
}

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x == x.round()
}

// Bernoulli numbers B_2 .. B_16.
const BERNOULLI: [f64; 8] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
];

const STIRLING_SHIFT: f64 = 15.0;

fn ln_gamma_positive(x: f64) -> f64 {
    let mut x = x;
    let mut shift = 0.0;
    while x < STIRLING_SHIFT {
        shift += x.ln();
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let mut series = 0.0;
    let mut pow = inv;
    for (k, b) in BERNOULLI.iter().enumerate() {
        let n = 2.0 * (k as f64 + 1.0);
        series += b / (n * (n - 1.0)) * pow;
        pow *= inv2;
    }
    (x - 0.5) * x.ln() - x + 0.5 * (2.0 * PI).ln() + series - shift
}

/// `sin(pi x)` with argument reduction, exact zeros at integers.
fn sin_pi(x: f64) -> f64 {
    let r = x - 2.0 * (x / 2.0).floor();
    if r == 0.0 || r == 1.0 {
        return 0.0;
    }
    (PI * r).sin()
}

/// `ln |Gamma(x)|` and the sign of `Gamma(x)` for any real `x`; poles give
/// `(+inf, 0)`.
pub(crate) fn ln_gamma_signed(x: f64) -> (f64, f64) {
    if x > 0.0 {
        return (ln_gamma_positive(x), 1.0);
    }
    if is_nonpositive_integer(x) {
        return (f64::INFINITY, 0.0);
    }
    let sp = sin_pi(x);
    (PI.ln() - sp.abs().ln() - ln_gamma_positive(1.0 - x), sp.signum())
}

/// Natural logarithm of the gamma function for `x > 0`.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return domain(format!("ln_gamma requires x > 0, got {x}"));
    }
    Ok(ln_gamma_positive(x))
}

/// `prod Gamma(num_i) / prod Gamma(den_j)`; a pole in the denominator gives 0.
pub(crate) fn gamma_ratio(num: &[f64], den: &[f64]) -> f64 {
    let mut log = 0.0;
    let mut sign = 1.0;
    for &x in den {
        let (l, s) = ln_gamma_signed(x);
        if s == 0.0 {
            return 0.0;
        }
        log -= l;
        sign *= s;
    }
    for &x in num {
        let (l, s) = ln_gamma_signed(x);
        if s == 0.0 {
            return f64::NAN;
        }
        log += l;
        sign *= s;
    }
    sign * log.exp()
}

fn gamma_sign(x: f64) -> f64 {
    ln_gamma_signed(x).1
}

fn digamma_positive(x: f64) -> f64 {
    let mut x = x;
    let mut acc = 0.0;
    while x < 12.0 {
        acc -= 1.0 / x;
        x += 1.0;
    }
    let inv2 = 1.0 / (x * x);
    let mut series = 0.0;
    let mut pow = inv2;
    for (k, b) in BERNOULLI.iter().enumerate() {
        let n = 2.0 * (k as f64 + 1.0);
        series += b / n * pow;
        pow *= inv2;
    }
    acc + x.ln() - 0.5 / x - series
}

/// The digamma function for `x > 0`.
pub fn digamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return domain(format!("digamma requires x > 0, got {x}"));
    }
    Ok(digamma_positive(x))
}

fn validate_2f1(args: &Hyp2F1Args) -> Result<()> {
    let Hyp2F1Args { a, b, c, z } = *args;
    if !(a.is_finite() && b.is_finite() && c.is_finite() && z.is_finite()) {
        return domain(format!("2F1 arguments must be finite: {args:?}"));
    }
    if !(0.0..=1.0).contains(&z) {
        return domain(format!("2F1 requires z in [0, 1], got {z}"));
    }
    if is_nonpositive_integer(c) {
        return domain(format!("2F1 requires c not a non-positive integer, got {c}"));
    }
    Ok(())
}

/// Exact sum when `a` or `b` is a non-positive integer.
fn terminating_sum(a: f64, b: f64, c: f64, z: f64) -> Option<f64> {
    let m = if is_nonpositive_integer(a) {
        -a
    } else if is_nonpositive_integer(b) {
        -b
    } else {
        return None;
    };
    let n_terms = m as usize;
    let mut term = 1.0;
    let mut sum = 1.0;
    for n in 0..n_terms {
        let nf = n as f64;
        term *= (a + nf) * (b + nf) / ((c + nf) * (nf + 1.0)) * z;
        sum += term;
    }
    Some(sum)
}

fn series_2f1(a: f64, b: f64, c: f64, z: f64, cfg: &SpecFunConfig) -> Result<f64> {
    if let Some(v) = terminating_sum(a, b, c, z) {
        return Ok(v);
    }
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut small = 0;
    // The tail after a term is roughly term / (1 - z); scale the cut-off so
    // the truncation error, not just the last term, meets rel_tol.
    let tol = cfg.rel_tol * (1.0 - z).max(1e-3);
    for n in 0..cfg.max_terms {
        let nf = n as f64;
        term *= (a + nf) * (b + nf) / ((c + nf) * (nf + 1.0)) * z;
        sum += term;
        if term.abs() <= tol * sum.abs() {
            small += 1;
            if small >= 3 {
                return Ok(sum);
            }
        } else {
            small = 0;
        }
    }
    Err(Error::NoConvergence(format!(
        "2F1({a}, {b}; {c}; {z}) series exceeded {} terms",
        cfg.max_terms
    )))
}

fn gauss_sum(a: f64, b: f64, c: f64) -> f64 {
    gamma_ratio(&[c, c - a - b], &[c - a, c - b])
}

/// Largest tolerated ratio between the connection-formula terms and their sum.
const CONNECTION_CONDITION_MAX: f64 = 1e3;

fn connection_2f1(a: f64, b: f64, c: f64, z: f64, cfg: &SpecFunConfig) -> Option<f64> {
    let w = 1.0 - z;
    let e = c - a - b;
    let c1 = gamma_ratio(&[c, e], &[c - a, c - b]);
    let c2 = gamma_ratio(&[c, -e], &[a, b]);
    if !c1.is_finite() || !c2.is_finite() {
        return None;
    }
    let t1 = if c1 == 0.0 {
        0.0
    } else {
        c1 * series_2f1(a, b, 1.0 - e, w, cfg).ok()?
    };
    let t2 = if c2 == 0.0 {
        0.0
    } else {
        c2 * w.powf(e) * series_2f1(c - a, c - b, 1.0 + e, w, cfg).ok()?
    };
    let sum = t1 + t2;
    if (t1.abs() + t2.abs()) > CONNECTION_CONDITION_MAX * sum.abs() {
        return None;
    }
    Some(sum)
}

fn euler_integral_2f1(a: f64, b: f64, c: f64, z: f64, cfg: &SpecFunConfig) -> Option<f64> {
    // Symmetric in a, b: pick the parameter that makes the integral valid.
    let (a, b) = if c > b && b > 0.0 {
        (a, b)
    } else if c > a && a > 0.0 {
        (b, a)
    } else {
        return None;
    };
    let w = 1.0 - z;
    let pref = gamma_ratio(&[c], &[b, c - b]);
    let q = tanh_sinh(
        |_, u, one_minus_u| {
            let base = w + z * one_minus_u;
            u.powf(b - 1.0) * one_minus_u.powf(c - b - 1.0) * base.powf(-a)
        },
        0.0,
        1.0,
        cfg.rel_tol,
        cfg.max_evals(),
    )
    .ok()?;
    Some(pref * q.value)
}

/// Taylor continuation of the hypergeometric ODE from `z = 1/2` to the target.
fn ode_continuation_2f1(a: f64, b: f64, c: f64, z: f64, cfg: &SpecFunConfig) -> Result<f64> {
    // Errors compound across steps, so sum each piece well below rel_tol.
    let cfg = &SpecFunConfig {
        rel_tol: (cfg.rel_tol * 1e-3).max(1e-16),
        ..*cfg
    };
    let z0 = 0.5;
    let mut f = series_2f1(a, b, c, z0, cfg)?;
    let mut fp = a * b / c * series_2f1(a + 1.0, b + 1.0, c + 1.0, z0, cfg)?;
    let mut x = z0;
    let mut steps = 0;
    while x < z {
        let h = (z - x).min(0.5 * (1.0 - x));
        let p0 = x * (1.0 - x);
        let p1 = 1.0 - 2.0 * x;
        let q0 = c - (a + b + 1.0) * x;
        let q1 = -(a + b + 1.0);
        let ab = a * b;
        // t_n are Taylor coefficients about x; scaled by h^n as we go.
        let mut tm1 = f; // t_0 h^0
        let mut t0 = fp * h; // t_1 h^1
        let mut val = tm1 + t0;
        let mut der = fp;
        let mut small = 0;
        let mut n = 0usize;
        loop {
            let nf = n as f64;
            // t_{n+2} from the recurrence, with h-scaling folded in.
            let next = -((p1 * nf + q0) * (nf + 1.0) * t0 * h + (-nf * (nf - 1.0) + q1 * nf - ab) * tm1 * h * h)
                / (p0 * (nf + 2.0) * (nf + 1.0));
            val += next;
            der += (nf + 2.0) * next / h;
            if next.abs() <= cfg.rel_tol * val.abs() {
                small += 1;
                if small >= 3 {
                    break;
                }
            } else {
                small = 0;
            }
            tm1 = t0;
            t0 = next;
            n += 1;
            if n > cfg.max_terms {
                return Err(Error::NoConvergence(format!(
                    "2F1({a}, {b}; {c}; {z}) ODE continuation step did not converge"
                )));
            }
        }
        f = val;
        fp = der;
        x += h;
        steps += 1;
        if steps > 200 {
            return Err(Error::NoConvergence(format!(
                "2F1({a}, {b}; {c}; {z}) ODE continuation took too many steps"
            )));
        }
    }
    Ok(f)
}

/// The Gauss hypergeometric function `2F1(a, b; c; z)` for `z` in `[0, 1]`.
///
/// `z < 0.9` is summed directly. On `[0.9, 1)` the `1 - z` connection formula
/// is used when `c - a - b` is not close to an integer and the formula is well
/// conditioned; otherwise the Euler integral (when `c > b > 0` for one of the
/// numerator parameters) and finally a Taylor continuation of the
/// hypergeometric differential equation. `z = 1` uses Gauss summation.
pub fn hyp2f1(args: Hyp2F1Args, cfg: &SpecFunConfig) -> Result<f64> {
    validate_2f1(&args)?;
    let Hyp2F1Args { a, b, c, z } = args;
    if z == 0.0 {
        return Ok(1.0);
    }
    if let Some(v) = terminating_sum(a, b, c, z) {
        return Ok(v);
    }
    let excess = c - a - b;
    if z == 1.0 {
        if excess > 0.0 {
            return Ok(gauss_sum(a, b, c));
        }
        return Err(Error::DivergentAtOne { a, b, c, excess });
    }
    if z < 0.9 {
        return series_2f1(a, b, c, z, cfg);
    }
    if (excess - excess.round()).abs() > 0.05 {
        if let Some(v) = connection_2f1(a, b, c, z, cfg) {
            return Ok(v);
        }
    }
    if let Some(v) = euler_integral_2f1(a, b, c, z, cfg) {
        return Ok(v);
    }
    ode_continuation_2f1(a, b, c, z, cfg)
}

/// `2F1(a, b; c; z)` with default configuration.
pub(crate) fn f21(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    hyp2f1(Hyp2F1Args { a, b, c, z }, &SpecFunConfig::default())
}

/// `lim_{z -> 1-} 2F1(a, b; c; z)` as an extended real, for `c > 0`.
///
/// Finite by Gauss summation when `c - a - b > 0` or when the series
/// terminates; otherwise `+inf` or `-inf` with the sign of the blow-up
/// prefactor `Gamma(c) / (Gamma(a) Gamma(b))`.
pub fn hyp2f1_limit_at_one(a: f64, b: f64, c: f64) -> Result<f64> {
    validate_2f1(&Hyp2F1Args { a, b, c, z: 1.0 })?;
    if let Some(v) = terminating_sum(a, b, c, 1.0) {
        return Ok(v);
    }
    if c - a - b > 0.0 {
        return Ok(gauss_sum(a, b, c));
    }
    let sign = gamma_sign(c) * gamma_sign(a) * gamma_sign(b);
    Ok(sign * f64::INFINITY)
}

/// `3F2(1, 1, (d+1)/2; 2, d; z)` for integer `d >= 2` and `z` in `[0, 1]`.
///
/// Series for `z <= 0.9`, the logarithmic Euler integral on `(0.9, 1)`, and
/// the digamma closed form `2 (psi(d-1) - psi((d-1)/2))` at `z = 1`.
pub fn hyp3f2_log_kernel(d: u32, z: f64, cfg: &SpecFunConfig) -> Result<f64> {
    if d < 2 {
        return domain(format!("3F2 log kernel requires d >= 2, got {d}"));
    }
    if !(0.0..=1.0).contains(&z) {
        return domain(format!("3F2 log kernel requires z in [0, 1], got {z}"));
    }
    let df = d as f64;
    let a0 = 0.5 * (df + 1.0);
    if z == 0.0 {
        return Ok(1.0);
    }
    if z == 1.0 {
        return Ok(hyp3f2_log_kernel_at_one(d));
    }
    if z <= 0.9 {
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut small = 0;
        for n in 0..cfg.max_terms {
            let nf = n as f64;
            term *= (nf + 1.0) * (a0 + nf) / ((nf + 2.0) * (df + nf)) * z;
            sum += term;
            if term.abs() <= cfg.rel_tol * sum.abs() {
                small += 1;
                if small >= 3 {
                    return Ok(sum);
                }
            } else {
                small = 0;
            }
        }
        return Err(Error::NoConvergence(format!("3F2 log kernel series at z = {z}")));
    }
    let w = 1.0 - z;
    let expo = 0.5 * (df - 3.0);
    let pref = -gamma_ratio(&[df], &[a0, df - a0]) / z;
    let q = tanh_sinh(
        |_, t, one_minus_t| {
            let base = w + z * one_minus_t;
            (t * one_minus_t).powf(expo) * base.ln()
        },
        0.0,
        1.0,
        cfg.rel_tol,
        cfg.max_evals(),
    )?;
    Ok(pref * q.value)
}

/// Closed form of the 3F2 kernel at `z = 1`: `4 (b_d + log 2)`.
pub(crate) fn hyp3f2_log_kernel_at_one(d: u32) -> f64 {
    let df = d as f64;
    2.0 * (digamma_positive(df - 1.0) - digamma_positive(0.5 * (df - 1.0)))
}
