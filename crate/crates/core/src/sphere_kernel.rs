//! Potential of the uniform measure on a sphere.
//!
//! With `lambda = |x|^2 / R^2`, the Riesz `s`-potential of the normalized
//! surface measure on the sphere of radius `R` in `R^d` is `R^{-s} h(lambda)`
//! (and `-log R + h(lambda)` for the logarithmic kernel `s = 0`).
//! For `s != 0`,
//!
//! ```text
//! h(lambda) = (1/s)              2F1(s/2, (2+s-d)/2; d/2; lambda)     lambda <= 1
//! h(lambda) = (1/s) lambda^{-s/2} 2F1(s/2, (2+s-d)/2; d/2; 1/lambda)  lambda >= 1
//! ```
//!
//! and for `s = 0` the `(1 + sqrt(lambda))` form with the 3F2 log kernel is
//! used. Derivatives of every order come from differentiating the 2F1 forms.

use crate::error::{domain, Error, Result};
use crate::quad::tanh_sinh_best;
use crate::specfun::{digamma, gamma_ratio, hyp2f1, hyp2f1_limit_at_one, hyp3f2_log_kernel, Hyp2F1Args, SpecFunConfig};
use serde::{Deserialize, Serialize};
use std::f64::consts::{LN_2, PI};

/// The dimension `d >= 2` and Riesz exponent `s` with `-2 < s < d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RieszParams {
    pub d: u32,
    pub s: f64,
}

impl RieszParams {
    pub fn new(d: u32, s: f64) -> Result<Self> {
        let p = RieszParams { d, s };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d < 2 {
            return domain(format!("dimension must be at least 2, got {}", self.d));
        }
        let df = self.d as f64;
        if !(self.s > -2.0 && self.s < df) || !self.s.is_finite() {
            return domain(format!("s must lie in (-2, d) = (-2, {df}), got {}", self.s));
        }
        Ok(())
    }

    pub fn dim(&self) -> f64 {
        self.d as f64
    }

    pub fn is_log(&self) -> bool {
        self.s == 0.0
    }

    /// Rejects `s >= d - 1`, where the sphere has infinite energy.
    pub(crate) fn require_finite_energy(&self) -> Result<()> {
        self.validate()?;
        if self.s >= self.dim() - 1.0 {
            return domain(format!(
                "sphere potential requires s < d - 1 = {}, got s = {}",
                self.dim() - 1.0,
                self.s
            ));
        }
        Ok(())
    }
}

/// Which one-sided formula evaluates `h` at a point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// `lambda <= 1`; at `lambda = 1` this is the limit from the left.
    Inside,
    /// `lambda >= 1`; at `lambda = 1` this is the limit from the right.
    Outside,
    /// Two-sided limit at `lambda = 1`.
    AtOne,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereEvalPoint {
    pub lambda: f64,
    pub branch: Branch,
}

impl SphereEvalPoint {
    /// Picks the branch from the position of `lambda` relative to 1.
    pub fn new(lambda: f64) -> Result<Self> {
        let branch = if lambda < 1.0 {
            Branch::Inside
        } else if lambda > 1.0 {
            Branch::Outside
        } else {
            Branch::AtOne
        };
        let pt = SphereEvalPoint { lambda, branch };
        pt.validate()?;
        Ok(pt)
    }

    pub fn validate(&self) -> Result<()> {
        let l = self.lambda;
        if !(l >= 0.0) || !l.is_finite() {
            return domain(format!("lambda must be finite and >= 0, got {l}"));
        }
        let ok = match self.branch {
            Branch::Inside => l <= 1.0,
            Branch::Outside => l >= 1.0,
            Branch::AtOne => l == 1.0,
        };
        if !ok {
            return domain(format!("branch {:?} inconsistent with lambda = {l}", self.branch));
        }
        Ok(())
    }
}

/// `c_{s,d} = 2F1(s/2, (2+s-d)/2; d/2; 1)`, the sphere energy constant.
pub fn c_sd(p: RieszParams) -> Result<f64> {
    p.require_finite_energy()?;
    let (d, s) = (p.dim(), p.s);
    let value = gamma_ratio(&[0.5 * d, d - 1.0 - s], &[0.5 * (d - s), d - 1.0 - 0.5 * s]);
    let check = hyp2f1(
        Hyp2F1Args::new(0.5 * s, 0.5 * (2.0 + s - d), 0.5 * d, 1.0),
        &SpecFunConfig::default(),
    )?;
    if (value - check).abs() > 1e-10 * value.abs().max(1.0) {
        return Err(Error::NoConvergence(format!(
            "c_sd gamma form {value} disagrees with 2F1 at 1 ({check})"
        )));
    }
    Ok(value)
}

/// `b_d = -log 2 + (psi(d-1) - psi((d-1)/2)) / 2`, the log-energy constant.
pub fn b_d(d: u32) -> Result<f64> {
    if d < 2 {
        return domain(format!("b_d requires d >= 2, got {d}"));
    }
    let df = d as f64;
    let value = -LN_2 + 0.5 * digamma(df - 1.0)? - 0.5 * digamma(0.5 * (df - 1.0))?;
    let check = 0.5 * (digamma(0.5 * df)? - digamma(df - 1.0)?);
    if (value - check).abs() > 1e-12 {
        return Err(Error::NoConvergence(format!(
            "b_d digamma forms disagree: {value} vs {check}"
        )));
    }
    Ok(value)
}

fn pochhammer(x: f64, n: usize) -> f64 {
    (0..n).fold(1.0, |acc, k| acc * (x + k as f64))
}

/// Constant in front of the inside-branch 2F1 for order `l >= 1`.
fn inside_coef(d: f64, s: f64, l: usize) -> f64 {
    let b = 0.5 * (2.0 + s - d);
    0.5 * pochhammer(0.5 * s + 1.0, l - 1) * pochhammer(b, l) / pochhammer(0.5 * d, l)
}

/// Constant in front of `lambda^{-s/2-l}` 2F1 on the outside, order `l >= 1`.
fn outside_coef(s: f64, l: usize) -> f64 {
    let sign = if l.is_multiple_of(2) { 1.0 } else { -1.0 };
    sign * 0.5 * pochhammer(0.5 * s + 1.0, l - 1)
}

fn inside_derivative(d: f64, s: f64, l: usize, lambda: f64) -> Result<f64> {
    let coef = inside_coef(d, s, l);
    if coef == 0.0 {
        return Ok(0.0);
    }
    let lf = l as f64;
    let (a, b, c) = (0.5 * s + lf, 0.5 * (2.0 + s - d) + lf, 0.5 * d + lf);
    let f = if lambda == 1.0 {
        hyp2f1_limit_at_one(a, b, c)?
    } else {
        hyp2f1(Hyp2F1Args::new(a, b, c, lambda), &SpecFunConfig::default())?
    };
    Ok(coef * f)
}

fn outside_derivative(d: f64, s: f64, l: usize, lambda: f64) -> Result<f64> {
    let lf = l as f64;
    let (a, b, c) = (0.5 * s + lf, 0.5 * (2.0 + s - d), 0.5 * d);
    let f = if lambda == 1.0 {
        hyp2f1_limit_at_one(a, b, c)?
    } else {
        hyp2f1(Hyp2F1Args::new(a, b, c, 1.0 / lambda), &SpecFunConfig::default())?
    };
    if f == 0.0 {
        return Ok(0.0);
    }
    Ok(outside_coef(s, l) * lambda.powf(-0.5 * s - lf) * f)
}

/// `h_{0,d}` from the `(1 + sqrt(lambda))` form with the 3F2 log kernel.
fn h_log(d: u32, lambda: f64) -> Result<f64> {
    if lambda == 0.0 {
        return Ok(0.0);
    }
    let r = lambda.sqrt();
    let op = 1.0 + r;
    let z = (4.0 * r / (op * op)).min(1.0);
    let k = hyp3f2_log_kernel(d, z, &SpecFunConfig::default())?;
    Ok(-op.ln() + r / (op * op) * k)
}

/// The `(1 + sqrt(lambda))` representation of `h` (order 0), valid on both
/// sides of the sphere; kept as an independent cross-check of [`h_eval`].
pub fn h_eval_quadratic_form(p: RieszParams, lambda: f64) -> Result<f64> {
    p.require_finite_energy()?;
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return domain(format!("lambda must be finite and >= 0, got {lambda}"));
    }
    if p.is_log() {
        return h_log(p.d, lambda);
    }
    let (d, s) = (p.dim(), p.s);
    let r = lambda.sqrt();
    let op = 1.0 + r;
    let z = (4.0 * r / (op * op)).min(1.0);
    let f = hyp2f1(
        Hyp2F1Args::new(0.5 * s, 0.5 * (d - 1.0), d - 1.0, z),
        &SpecFunConfig::default(),
    )?;
    Ok(op.powf(-s) / s * f)
}

/// `h^{(order)}(lambda)` as an extended real.
///
/// Order 0 needs `s < d - 1`, higher orders need `s < d - 2`. At `lambda = 1`
/// derivatives of order `l >= d - s - 1` blow up and are returned as signed
/// infinities; a two-sided evaluation whose one-sided limits disagree is a
/// `LimitUndefined` error.
pub fn h_eval(p: RieszParams, pt: SphereEvalPoint, order: usize) -> Result<f64> {
    p.require_finite_energy()?;
    pt.validate()?;
    let (d, s) = (p.dim(), p.s);
    let lambda = pt.lambda;
    if order == 0 {
        if p.is_log() {
            return if lambda == 1.0 { b_d(p.d) } else { h_log(p.d, lambda) };
        }
        if lambda == 1.0 {
            return Ok(c_sd(p)? / s);
        }
        let (a, b, c) = (0.5 * s, 0.5 * (2.0 + s - d), 0.5 * d);
        let cfg = SpecFunConfig::default();
        return match pt.branch {
            Branch::Inside => Ok(hyp2f1(Hyp2F1Args::new(a, b, c, lambda), &cfg)? / s),
            _ => Ok(lambda.powf(-0.5 * s) * hyp2f1(Hyp2F1Args::new(a, b, c, 1.0 / lambda), &cfg)? / s),
        };
    }
    if s >= d - 2.0 {
        return domain(format!("derivatives of h require s < d - 2 = {}, got s = {s}", d - 2.0));
    }
    match pt.branch {
        Branch::Inside => inside_derivative(d, s, order, lambda),
        Branch::Outside => outside_derivative(d, s, order, lambda),
        Branch::AtOne => {
            let left = inside_derivative(d, s, order, 1.0)?;
            let right = outside_derivative(d, s, order, 1.0)?;
            if left.is_finite() && right.is_finite() {
                if (left - right).abs() > 1e-9 * left.abs().max(right.abs()).max(1e-300) {
                    return Err(Error::LimitUndefined(format!(
                        "h^({order}) at lambda = 1: one-sided limits differ ({left} vs {right})"
                    )));
                }
                Ok(0.5 * (left + right))
            } else if left == right {
                Ok(left)
            } else {
                Err(Error::LimitUndefined(format!(
                    "h^({order}) at lambda = 1: one-sided limits differ ({left} vs {right})"
                )))
            }
        }
    }
}

/// Convenience wrapper choosing the branch from `lambda`.
pub fn h_at(p: RieszParams, lambda: f64, order: usize) -> Result<f64> {
    h_eval(p, SphereEvalPoint::new(lambda)?, order)
}

fn check_radius(x_norm: f64, radius: f64) -> Result<()> {
    if !(radius > 0.0) || !radius.is_finite() {
        return domain(format!("radius must be finite and > 0, got {radius}"));
    }
    if !(x_norm >= 0.0) || !x_norm.is_finite() {
        return domain(format!("|x| must be finite and >= 0, got {x_norm}"));
    }
    Ok(())
}

/// Potential at a point with `|x| = x_norm` of the uniform probability
/// measure on the sphere of radius `radius`.
pub fn sphere_potential(p: RieszParams, x_norm: f64, radius: f64) -> Result<f64> {
    p.require_finite_energy()?;
    check_radius(x_norm, radius)?;
    let rho = x_norm / radius;
    let h = h_at(p, rho * rho, 0)?;
    if p.is_log() {
        Ok(-radius.ln() + h)
    } else {
        Ok(radius.powf(-p.s) * h)
    }
}

/// Energy of the uniform probability measure on the sphere of radius `radius`.
pub fn sphere_energy(p: RieszParams, radius: f64) -> Result<f64> {
    p.require_finite_energy()?;
    check_radius(0.0, radius)?;
    if p.is_log() {
        Ok(-radius.ln() + b_d(p.d)?)
    } else {
        Ok(radius.powf(-p.s) / p.s * c_sd(p)?)
    }
}

/// Largest accepted relative error estimate of the oracle quadrature.
const ORACLE_TOLERANCE: f64 = 1e-8;

/// Direct quadrature of the zonal integral for the sphere potential, an
/// independent check on [`sphere_potential`].
///
/// The integral over `t = cos(theta)` is taken in `theta` on `[0, pi]` so the
/// weight becomes `sin(theta)^{d-2}`, and the squared distance is written as
/// `(1 - rho)^2 + 4 rho sin^2(theta / 2)` to keep the near-singular case
/// `rho ~ 1` accurate. Tanh-sinh quadrature refines until `64 * nodes`
/// integrand evaluations.
pub fn funk_hecke_oracle(p: RieszParams, x_norm: f64, radius: f64, nodes: usize) -> Result<f64> {
    p.require_finite_energy()?;
    check_radius(x_norm, radius)?;
    if nodes < 16 {
        return domain(format!("funk_hecke_oracle needs at least 16 nodes, got {nodes}"));
    }
    let s = p.s;
    if x_norm == 0.0 {
        return Ok(if p.is_log() { -radius.ln() } else { radius.powf(-s) / s });
    }
    let d = p.dim();
    let rho = x_norm / radius;
    let tau = gamma_ratio(&[0.5 * d], &[0.5, 0.5 * (d - 1.0)]);
    let one_minus_rho_sq = (1.0 - rho) * (1.0 - rho);
    let log = p.is_log();
    let q = tanh_sinh_best(
        |theta, from_zero, to_pi| {
            // ln u with u = (1 - rho)^2 + 4 rho sin^2(theta/2), safe when u underflows.
            let ln_b = (4.0 * rho).ln() + 2.0 * (0.5 * theta).sin().ln();
            let ln_u = if one_minus_rho_sq == 0.0 {
                ln_b
            } else {
                let ln_a = one_minus_rho_sq.ln();
                let (hi, lo) = if ln_a > ln_b { (ln_a, ln_b) } else { (ln_b, ln_a) };
                hi + (lo - hi).exp().ln_1p()
            };
            let sin_theta = from_zero.min(to_pi).sin();
            if log {
                let weight = if p.d == 2 { 1.0 } else { sin_theta.powi(p.d as i32 - 2) };
                return -0.5 * ln_u * weight;
            }
            if p.d == 2 {
                return (-0.5 * s * ln_u).exp();
            }
            if sin_theta == 0.0 {
                return 0.0;
            }
            (-0.5 * s * ln_u + (d - 2.0) * sin_theta.ln()).exp()
        },
        0.0,
        PI,
        1e-13,
        nodes.saturating_mul(64),
    )?;
    // The log integral vanishes inside the circle, so relative error needs a floor.
    let rel = q.error / q.value.abs().max(1e-6);
    if rel > ORACLE_TOLERANCE {
        return Err(Error::QuadratureFailure {
            estimate: rel,
            tolerance: ORACLE_TOLERANCE,
        });
    }
    let integral = tau * q.value;
    if log {
        Ok(-radius.ln() + integral)
    } else {
        Ok(radius.powf(-s) / s * integral)
    }
}
