//! Radial external fields `V(x) = v(|x|^2)`.
//!
//! Everything is parametrized by `rho = |x|^2`. Derivatives of every order are
//! closed forms, so certificate sign tests never see finite-difference noise.

use crate::error::{domain, Error, Result};
use crate::sphere_kernel::RieszParams;
use serde::{Deserialize, Serialize};

/// Highest derivative order served by [`field_eval`].
pub const MAX_ORDER: usize = 24;

/// Field profile, tagged by `"type"` in JSON. Parameters use the names
/// `gamma`, `alpha`, `beta`, `eta`, `R0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields, try_from = "RawField")]
pub enum RadialField {
    /// `(gamma/alpha) rho^{alpha/2}`, `alpha > 0`.
    #[serde(rename = "power")]
    PowerLaw { gamma: f64, alpha: f64 },
    /// `(gamma/alpha) rho^{alpha/2} - (gamma eta/beta) rho^{beta/2}`, `alpha > beta`.
    LennardJones {
        gamma: f64,
        eta: f64,
        alpha: f64,
        beta: f64,
    },
    /// `gamma/(alpha beta) exp(alpha rho^{beta/2})`, `alpha, beta > 0`.
    Exponential { gamma: f64, alpha: f64, beta: f64 },
    /// `gamma rho^{alpha/2} log(rho)`, `alpha > 0`.
    PowerLog { gamma: f64, alpha: f64 },
    /// `(gamma/alpha) |rho - R0^2|^{alpha/2}`, `alpha > 0`.
    PowerSink {
        gamma: f64,
        alpha: f64,
        #[serde(rename = "R0")]
        r0: f64,
    },
}

#[derive(Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
enum RawField {
    #[serde(rename = "power")]
    PowerLaw {
        gamma: f64,
        alpha: f64,
    },
    LennardJones {
        gamma: f64,
        eta: f64,
        alpha: f64,
        beta: f64,
    },
    Exponential {
        gamma: f64,
        alpha: f64,
        beta: f64,
    },
    PowerLog {
        gamma: f64,
        alpha: f64,
    },
    PowerSink {
        gamma: f64,
        alpha: f64,
        #[serde(rename = "R0")]
        r0: f64,
    },
}

impl TryFrom<RawField> for RadialField {
    type Error = Error;
    fn try_from(raw: RawField) -> Result<Self> {
        let f = match raw {
            RawField::PowerLaw { gamma, alpha } => RadialField::PowerLaw { gamma, alpha },
            RawField::LennardJones {
                gamma,
                eta,
                alpha,
                beta,
            } => RadialField::LennardJones {
                gamma,
                eta,
                alpha,
                beta,
            },
            RawField::Exponential { gamma, alpha, beta } => RadialField::Exponential { gamma, alpha, beta },
            RawField::PowerLog { gamma, alpha } => RadialField::PowerLog { gamma, alpha },
            RawField::PowerSink { gamma, alpha, r0 } => RadialField::PowerSink { gamma, alpha, r0 },
        };
        f.validate()?;
        Ok(f)
    }
}

/// Falling factorial `p (p-1) ... (p-n+1)`.
pub(crate) fn falling(p: f64, n: usize) -> f64 {
    (0..n).fold(1.0, |acc, k| acc * (p - k as f64))
}

/// Derivative of the falling factorial with respect to `p`.
pub(crate) fn falling_dp(p: f64, n: usize) -> f64 {
    (0..n)
        .map(|k| (0..n).filter(|&j| j != k).fold(1.0, |acc, j| acc * (p - j as f64)))
        .sum()
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

fn signed_inf(sign: f64) -> f64 {
    if sign > 0.0 {
        f64::INFINITY
    } else {
        f64::NEG_INFINITY
    }
}

/// Limit as `x -> 0+` of `sum coef_i x^{exp_i}`.
pub(crate) fn power_sum_at_zero(terms: &[(f64, f64)]) -> f64 {
    let mut groups: Vec<(f64, f64)> = Vec::new();
    let mut sorted: Vec<(f64, f64)> = terms.iter().copied().filter(|t| t.0 != 0.0).collect();
    sorted.sort_by(|a, b| a.1.total_cmp(&b.1));
    for (c, e) in sorted {
        match groups.last_mut() {
            Some(g) if (g.1 - e).abs() < 1e-12 => g.0 += c,
            _ => groups.push((c, e)),
        }
    }
    let scale = terms.iter().map(|t| t.0.abs()).fold(0.0, f64::max);
    let leading = groups.iter().find(|g| g.0.abs() > 1e-14 * scale);
    match leading {
        None => 0.0,
        Some(&(c, e)) if e < -1e-12 => signed_inf(c),
        Some(&(c, e)) if e.abs() <= 1e-12 => c,
        Some(_) => 0.0,
    }
}

/// Sign and shape of `v(r^2)` as `r -> infinity`, in the radial variable `r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Tail {
    /// `v ~ coef r^exponent (log r)^log_power -> +inf`.
    PowerGrowth { coef: f64, exponent: f64, log_power: u32 },
    /// `v` grows like an exponential of a power of `r`.
    ExpGrowth,
    /// `v - v(inf) ~ coef r^exponent` with `exponent < 0`.
    PowerDecay { coef: f64, exponent: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FieldLimits {
    pub v_at_zero: f64,
    pub v_at_infinity: f64,
    pub tail: Tail,
}

/// Outcome of screening against the standard confinement conditions.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Confinement {
    Satisfied {
        clause: char,
        reason: String,
    },
    /// Informational: the field may still confine.
    NotGuaranteed {
        reason: String,
    },
}

impl RadialField {
    pub fn validate(&self) -> Result<()> {
        let finite = |xs: &[f64]| xs.iter().all(|x| x.is_finite());
        let gamma = match *self {
            RadialField::PowerLaw { gamma, alpha } => {
                if !finite(&[gamma, alpha]) || !(alpha > 0.0) {
                    return domain(format!("power field needs finite alpha > 0, got {alpha}"));
                }
                gamma
            }
            RadialField::LennardJones {
                gamma,
                eta,
                alpha,
                beta,
            } => {
                if !finite(&[gamma, eta, alpha, beta]) || !(eta > 0.0) {
                    return domain(format!("lennard_jones field needs eta > 0, got {eta}"));
                }
                if !(alpha > beta) || alpha == 0.0 || beta == 0.0 {
                    return domain(format!(
                        "lennard_jones field needs alpha > beta, both nonzero; got alpha = {alpha}, beta = {beta}"
                    ));
                }
                gamma
            }
            RadialField::Exponential { gamma, alpha, beta } => {
                if !finite(&[gamma, alpha, beta]) || !(alpha > 0.0) || !(beta > 0.0) {
                    return domain(format!(
                        "exponential field needs alpha > 0 and beta > 0; got alpha = {alpha}, beta = {beta}"
                    ));
                }
                gamma
            }
            RadialField::PowerLog { gamma, alpha } => {
                if !finite(&[gamma, alpha]) || !(alpha > 0.0) {
                    return domain(format!("power_log field needs alpha > 0, got {alpha}"));
                }
                gamma
            }
            RadialField::PowerSink { gamma, alpha, r0 } => {
                if !finite(&[gamma, alpha, r0]) || !(alpha > 0.0) || !(r0 > 0.0) {
                    return domain(format!(
                        "power_sink field needs alpha > 0 and R0 > 0; got alpha = {alpha}, R0 = {r0}"
                    ));
                }
                gamma
            }
        };
        if !(gamma > 0.0) {
            return domain(format!("field strength gamma must be > 0, got {gamma}"));
        }
        Ok(())
    }

    pub fn name(&self) -> &'static str {
        match self {
            RadialField::PowerLaw { .. } => "power",
            RadialField::LennardJones { .. } => "lennard_jones",
            RadialField::Exponential { .. } => "exponential",
            RadialField::PowerLog { .. } => "power_log",
            RadialField::PowerSink { .. } => "power_sink",
        }
    }

    /// Largest derivative order available away from [`Self::exceptional_points`].
    pub fn smoothness_order(&self) -> usize {
        MAX_ORDER
    }

    /// Points `rho > 0` where derivatives are only defined in the extended sense.
    pub fn exceptional_points(&self) -> Vec<f64> {
        match *self {
            RadialField::PowerSink { r0, .. } => vec![r0 * r0],
            _ => Vec::new(),
        }
    }

    /// `(coef, exponent)` pairs when `v` is a finite sum of powers of `rho`.
    pub(crate) fn power_terms(&self) -> Option<Vec<(f64, f64)>> {
        match *self {
            RadialField::PowerLaw { gamma, alpha } => Some(vec![(gamma / alpha, 0.5 * alpha)]),
            RadialField::LennardJones {
                gamma,
                eta,
                alpha,
                beta,
            } => Some(vec![(gamma / alpha, 0.5 * alpha), (-gamma * eta / beta, 0.5 * beta)]),
            _ => None,
        }
    }

    pub fn limits(&self) -> FieldLimits {
        let inf = f64::INFINITY;
        match *self {
            RadialField::PowerLaw { gamma, alpha } => FieldLimits {
                v_at_zero: 0.0,
                v_at_infinity: inf,
                tail: Tail::PowerGrowth {
                    coef: gamma / alpha,
                    exponent: alpha,
                    log_power: 0,
                },
            },
            RadialField::LennardJones {
                gamma,
                eta,
                alpha,
                beta,
            } => {
                let v_at_zero = if beta < 0.0 { inf } else { 0.0 };
                let _ = eta;
                if alpha > 0.0 {
                    FieldLimits {
                        v_at_zero,
                        v_at_infinity: inf,
                        tail: Tail::PowerGrowth {
                            coef: gamma / alpha,
                            exponent: alpha,
                            log_power: 0,
                        },
                    }
                } else {
                    FieldLimits {
                        v_at_zero,
                        v_at_infinity: 0.0,
                        tail: Tail::PowerDecay {
                            coef: gamma / alpha,
                            exponent: alpha,
                        },
                    }
                }
            }
            RadialField::Exponential { gamma, alpha, beta } => FieldLimits {
                v_at_zero: gamma / (alpha * beta),
                v_at_infinity: inf,
                tail: Tail::ExpGrowth,
            },
            RadialField::PowerLog { gamma, alpha } => FieldLimits {
                v_at_zero: 0.0,
                v_at_infinity: inf,
                tail: Tail::PowerGrowth {
                    coef: 2.0 * gamma,
                    exponent: alpha,
                    log_power: 1,
                },
            },
            RadialField::PowerSink { gamma, alpha, r0 } => FieldLimits {
                v_at_zero: gamma / alpha * r0.powf(alpha),
                v_at_infinity: inf,
                tail: Tail::PowerGrowth {
                    coef: gamma / alpha,
                    exponent: alpha,
                    log_power: 0,
                },
            },
        }
    }
}

/// `v^{(order)}(rho)` as an extended real.
pub fn field_eval(f: &RadialField, rho: f64, order: usize) -> Result<f64> {
    f.validate()?;
    if !(rho >= 0.0) || !rho.is_finite() {
        return domain(format!("rho must be finite and >= 0, got {rho}"));
    }
    if order > f.smoothness_order() {
        return Err(Error::OrderUnavailable {
            order,
            max: f.smoothness_order(),
        });
    }
    if let Some(terms) = f.power_terms() {
        if rho == 0.0 {
            let shifted: Vec<(f64, f64)> = terms
                .iter()
                .map(|&(c, e)| (c * falling(e, order), e - order as f64))
                .collect();
            return Ok(power_sum_at_zero(&shifted));
        }
        return Ok(terms
            .iter()
            .map(|&(c, e)| c * falling(e, order) * rho.powf(e - order as f64))
            .sum());
    }
    match *f {
        RadialField::PowerLog { gamma, alpha } => Ok(power_log_derivative(gamma, 0.5 * alpha, rho, order)),
        RadialField::Exponential { gamma, alpha, beta } => exponential_derivative(gamma, alpha, beta, rho, order),
        RadialField::PowerSink { gamma, alpha, r0 } => power_sink_derivative(gamma, alpha, r0, rho, order),
        _ => unreachable!("power-term fields handled above"),
    }
}

/// `d^n/drho^n [gamma rho^p log rho]`.
fn power_log_derivative(gamma: f64, p: f64, rho: f64, n: usize) -> f64 {
    let a = falling_dp(p, n);
    let b = falling(p, n);
    let q = p - n as f64;
    if rho == 0.0 {
        if q > 0.0 {
            return 0.0;
        }
        // rho^q (a + b log rho): the log dominates when b != 0.
        if b != 0.0 {
            return signed_inf(-gamma * b);
        }
        if q == 0.0 {
            return gamma * a;
        }
        return if a == 0.0 { 0.0 } else { signed_inf(gamma * a) };
    }
    gamma * rho.powf(q) * (a + b * rho.ln())
}

fn exponential_derivative(gamma: f64, alpha: f64, beta: f64, rho: f64, n: usize) -> Result<f64> {
    let k = gamma / (alpha * beta);
    let half = 0.5 * beta;
    if rho == 0.0 {
        if n == 0 {
            return Ok(k);
        }
        let m = half.round();
        if (half - m).abs() > 1e-12 {
            // Only the term k u^{(n)} is singular at the origin.
            return Ok(if (n as f64) < half {
                0.0
            } else {
                signed_inf(falling(half, n))
            });
        }
        // u = alpha rho^m is a polynomial: u^{(j)}(0) = alpha m! at j = m.
        let mut u_der = vec![0.0; n + 1];
        if (m as usize) <= n {
            u_der[m as usize] = alpha * falling(m, m as usize);
        }
        return Ok(exp_chain(k, &u_der, n));
    }
    let u = alpha * rho.powf(half);
    let mut u_der = vec![u; n + 1];
    for (j, slot) in u_der.iter_mut().enumerate().skip(1) {
        *slot = alpha * falling(half, j) * rho.powf(half - j as f64);
    }
    let base = k * u.exp();
    Ok(exp_chain_scaled(base, &u_der, n))
}

/// `E^{(n)}` for `E = k exp(u)` with `u(point) = 0`, from `E' = u' E`.
fn exp_chain(k: f64, u_der: &[f64], n: usize) -> f64 {
    exp_chain_scaled(k, u_der, n)
}

fn exp_chain_scaled(e0: f64, u_der: &[f64], n: usize) -> f64 {
    let mut e = vec![e0];
    for m in 0..n {
        let next = (0..=m).map(|j| binomial(m, j) * u_der[j + 1] * e[m - j]).sum();
        e.push(next);
    }
    e[n]
}

fn power_sink_derivative(gamma: f64, alpha: f64, r0: f64, rho: f64, n: usize) -> Result<f64> {
    let p = 0.5 * alpha;
    let x = rho - r0 * r0;
    let ff = falling(p, n);
    let c = gamma / alpha * ff;
    if x == 0.0 {
        let q = p - n as f64;
        if ff == 0.0 || q > 0.0 {
            return Ok(0.0);
        }
        if n % 2 == 1 {
            return Err(Error::LimitUndefined(format!(
                "power_sink derivative of order {n} at the sink: one-sided limits differ"
            )));
        }
        return Ok(if q == 0.0 { c } else { signed_inf(c) });
    }
    let sign = if n % 2 == 1 && x < 0.0 { -1.0 } else { 1.0 };
    Ok(sign * c * x.abs().powf(p - n as f64))
}

fn check_kappa(kappa: f64, radius: f64) -> Result<()> {
    if !(radius > 0.0) || !radius.is_finite() {
        return domain(format!("radius must be finite and > 0, got {radius}"));
    }
    if !(0.0..=1.0).contains(&kappa) {
        return domain(format!("kappa must lie in [0, 1], got {kappa}"));
    }
    Ok(())
}

/// Lah number `L(n, k) = C(n-1, k-1) n! / k!`.
fn lah(n: usize, k: usize) -> f64 {
    if k == 0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    binomial(n - 1, k - 1) * (k + 1..=n).fold(1.0, |acc, j| acc * j as f64)
}

/// `q^{(order)}(kappa)` for `q(kappa) = 2 R^{s+2} kappa^{-s/2-1} v'(R^2/kappa)`,
/// with `q(0)` the limit from the right.
pub fn q_eval(f: &RadialField, p: RieszParams, radius: f64, kappa: f64, order: usize) -> Result<f64> {
    f.validate()?;
    p.validate()?;
    check_kappa(kappa, radius)?;
    let s = p.s;
    let r2 = radius * radius;
    if let Some(terms) = f.power_terms() {
        // v' = sum c e rho^{e-1} gives q = sum C kappa^m.
        let q_terms: Vec<(f64, f64)> = terms
            .iter()
            .map(|&(c, e)| (2.0 * radius.powf(s + 2.0) * c * e * r2.powf(e - 1.0), -0.5 * s - e))
            .collect();
        let shifted: Vec<(f64, f64)> = q_terms
            .iter()
            .map(|&(c, m)| (c * falling(m, order), m - order as f64))
            .collect();
        if kappa == 0.0 {
            return Ok(power_sum_at_zero(&shifted));
        }
        return Ok(shifted.iter().map(|&(c, m)| c * kappa.powf(m)).sum());
    }
    match *f {
        RadialField::PowerLog { gamma, alpha } => {
            // q = 2 gamma R^{s+alpha} kappa^m (A - p log kappa), m = -(s+alpha)/2.
            let pp = 0.5 * alpha;
            let m = -0.5 * (s + alpha);
            let pref = 2.0 * gamma * radius.powf(s + alpha);
            let a = 2.0 * pp * radius.ln() + 1.0;
            let fm = falling(m, order);
            let fdm = falling_dp(m, order);
            let e = m - order as f64;
            if kappa == 0.0 {
                if e > 0.0 {
                    return Ok(0.0);
                }
                // pref kappa^e ((a fm - p fdm) - p fm log kappa)
                if fm != 0.0 {
                    return Ok(signed_inf(pref * pp * fm));
                }
                let c = pref * (a * fm - pp * fdm);
                return Ok(if e == 0.0 {
                    c
                } else if c == 0.0 {
                    0.0
                } else {
                    signed_inf(c)
                });
            }
            Ok(pref * kappa.powf(e) * (a * fm - pp * fdm - pp * fm * kappa.ln()))
        }
        RadialField::PowerSink { gamma, alpha, r0 } => {
            // q = gamma R^{s+2} kappa^m sgn(y) |y|^pp, y = R^2 - R0^2 kappa.
            let m = -0.5 * (s + alpha);
            let pp = 0.5 * alpha - 1.0;
            let pref = gamma * radius.powf(s + 2.0);
            let y = r2 - r0 * r0 * kappa;
            if y == 0.0 {
                return composed_q(f, s, radius, kappa, order);
            }
            let sy = y.signum();
            let terms: Vec<(f64, f64)> = (0..=order)
                .map(|k| {
                    let dk = (-r0 * r0).powi(k as i32)
                        * falling(pp, k)
                        * y.abs().powf(pp - k as f64)
                        * if k % 2 == 0 { sy } else { 1.0 };
                    (
                        pref * binomial(order, k) * falling(m, order - k) * dk,
                        m - (order - k) as f64,
                    )
                })
                .collect();
            if kappa == 0.0 {
                return Ok(power_sum_at_zero(&terms));
            }
            Ok(terms.iter().map(|&(c, e)| c * kappa.powf(e)).sum())
        }
        RadialField::Exponential { .. } => {
            if kappa == 0.0 {
                return Ok(if order.is_multiple_of(2) {
                    f64::INFINITY
                } else {
                    f64::NEG_INFINITY
                });
            }
            composed_q(f, s, radius, kappa, order)
        }
        _ => unreachable!("power-term fields handled above"),
    }
}

/// `q^{(order)}` from the Leibniz rule on `kappa^{-s/2-1}` times `v'(R^2/kappa)`,
/// whose derivatives come from Lah numbers. Used for fields without a direct
/// closed form and as a cross-check.
pub fn q_eval_composed(f: &RadialField, p: RieszParams, radius: f64, kappa: f64, order: usize) -> Result<f64> {
    f.validate()?;
    p.validate()?;
    check_kappa(kappa, radius)?;
    if kappa == 0.0 {
        return Err(Error::LimitUndefined("composed q at kappa = 0".into()));
    }
    composed_q(f, p.s, radius, kappa, order)
}

fn composed_q(f: &RadialField, s: f64, radius: f64, kappa: f64, order: usize) -> Result<f64> {
    let c = radius * radius;
    let rho = c / kappa;
    let m = -0.5 * s - 1.0;
    let mut total = 0.0;
    for k in 0..=order {
        let outer = falling(m, order - k) * kappa.powf(m - (order - k) as f64);
        // (d/dkappa)^k v'(c/kappa)
        let inner = if k == 0 {
            field_eval(f, rho, 1)?
        } else {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            let mut acc = 0.0;
            for j in 1..=k {
                acc += lah(k, j) * kappa.powf(-((k + j) as f64)) * c.powi(j as i32) * field_eval(f, rho, j + 1)?;
            }
            sign * acc
        };
        total += binomial(order, k) * outer * inner;
    }
    let value = 2.0 * radius.powf(s + 2.0) * total;
    if value.is_nan() {
        return Err(Error::LimitUndefined(format!("q^({order}) at kappa = {kappa}")));
    }
    Ok(value)
}

/// Screens the field against the sufficient confinement conditions for the
/// given kernel exponent.
pub fn confinement_check(f: &RadialField, p: RieszParams) -> Confinement {
    let lim = f.limits();
    let s = p.s;
    if s > 0.0 {
        if lim.v_at_infinity == f64::INFINITY {
            return Confinement::Satisfied {
                clause: 'a',
                reason: "v(inf) = +inf".into(),
            };
        }
        if let Tail::PowerDecay { coef, exponent } = lim.tail {
            // s r^s (v - v_inf) ~ s coef r^{s + exponent}
            let e = s + exponent;
            let value = if e > 1e-12 {
                signed_inf(coef)
            } else if e.abs() <= 1e-12 {
                s * coef
            } else {
                0.0
            };
            if value < -1.0 {
                return Confinement::Satisfied {
                    clause: 'a',
                    reason: format!("lim s r^s (v - v(inf)) = {value} < -1"),
                };
            }
            return Confinement::NotGuaranteed {
                reason: format!(
                    "v(inf) = {} is finite and lim s r^s (v - v(inf)) = {value} >= -1",
                    lim.v_at_infinity
                ),
            };
        }
        return Confinement::NotGuaranteed {
            reason: "v(inf) is finite".into(),
        };
    }
    if s == 0.0 {
        let grows = match lim.tail {
            Tail::ExpGrowth => true,
            Tail::PowerGrowth {
                exponent, log_power, ..
            } => exponent > 0.0 || log_power > 1,
            Tail::PowerDecay { .. } => false,
        };
        return if grows {
            Confinement::Satisfied {
                clause: 'b',
                reason: "v(r^2) - log r -> +inf".into(),
            }
        } else {
            Confinement::NotGuaranteed {
                reason: "v(r^2) - log r does not diverge to +inf".into(),
            }
        };
    }
    // s < 0: limsup s r^s v(r^2) < -2^{-s}
    let bound = -(2f64.powf(-s));
    let value = match lim.tail {
        Tail::ExpGrowth => f64::NEG_INFINITY,
        Tail::PowerGrowth {
            coef,
            exponent,
            log_power,
        } => {
            let e = s + exponent;
            if e > 1e-12 || (e.abs() <= 1e-12 && log_power > 0) {
                signed_inf(s * coef)
            } else if e.abs() <= 1e-12 {
                s * coef
            } else {
                0.0
            }
        }
        Tail::PowerDecay { .. } => 0.0,
    };
    if value < bound {
        Confinement::Satisfied {
            clause: 'c',
            reason: format!("limsup s r^s v = {value} < {bound}"),
        }
    } else {
        Confinement::NotGuaranteed {
            reason: format!("limsup s r^s v = {value} >= {bound}"),
        }
    }
}

/// `lim_{r -> inf} [(R + r)^{-s}/s + v(r^2)]`, or `[-log(R + r) + v(r^2)]`
/// for `s = 0`, from the tail descriptor. The leading order does not depend
/// on `R`; exact cancellation of leading terms is reported as undefined.
pub fn kernel_tail_limit(f: &RadialField, p: RieszParams) -> Result<f64> {
    let lim = f.limits();
    let s = p.s;
    if s > 0.0 {
        return Ok(lim.v_at_infinity);
    }
    match lim.tail {
        Tail::ExpGrowth => Ok(f64::INFINITY),
        Tail::PowerDecay { .. } => Ok(f64::NEG_INFINITY),
        Tail::PowerGrowth {
            coef,
            exponent,
            log_power,
        } => {
            if s == 0.0 {
                // v grows like a positive power (or log^k with k > 1), beating log r.
                if exponent > 0.0 || log_power > 1 {
                    return Ok(f64::INFINITY);
                }
                return Err(Error::LimitUndefined(
                    "log kernel against a logarithmic field tail".into(),
                ));
            }
            // (R + r)^{-s}/s ~ r^{-s}/s - R r^{-s-1} + ..., against coef r^exponent.
            let gap = exponent + s;
            if gap > 1e-12 || (gap.abs() <= 1e-12 && log_power > 0) {
                return Ok(signed_inf(coef));
            }
            if gap < -1e-12 {
                return Ok(f64::NEG_INFINITY);
            }
            let lead = coef + 1.0 / s;
            if lead.abs() > 1e-12 * coef.abs().max(1.0) {
                return Ok(signed_inf(lead));
            }
            Err(Error::LimitUndefined(
                "leading terms of kernel and field cancel at infinity".into(),
            ))
        }
    }
}

/// Sum of `c t^e (log t)^l` with `l` in `{0, 1}`.
pub(crate) type LogPowerSum = Vec<(f64, f64, u8)>;

/// A closed form valid for `rho` in `[lo, hi]`, written in the variable
/// `t = rho - shift` (or `shift - rho` when `flip`), up to a positive factor.
#[derive(Debug, Clone)]
pub(crate) struct SignPiece {
    pub lo: f64,
    pub hi: f64,
    pub shift: f64,
    pub flip: bool,
    pub terms: LogPowerSum,
}

impl SignPiece {
    fn whole(terms: LogPowerSum) -> Vec<SignPiece> {
        vec![SignPiece {
            lo: 0.0,
            hi: f64::INFINITY,
            shift: 0.0,
            flip: false,
            terms,
        }]
    }
}

/// Decides `sum >= 0` on `t` in `[a, b]` (`0 <= a < b <= inf`) when the sum is
/// a positive power times a monotone factor; `None` otherwise.
pub(crate) fn log_power_nonneg(terms: &[(f64, f64, u8)], a: f64, b: f64) -> Option<bool> {
    let live: Vec<(f64, f64, u8)> = terms.iter().copied().filter(|t| t.0 != 0.0).collect();
    if live.is_empty() {
        return Some(true);
    }
    let scale = live.iter().map(|t| t.0.abs()).fold(0.0, f64::max);
    let tol = 1e-12 * scale;
    let mut exps: Vec<f64> = Vec::new();
    for t in &live {
        if !exps.iter().any(|e| (e - t.1).abs() < 1e-12) {
            exps.push(t.1);
        }
    }
    exps.sort_by(f64::total_cmp);
    let coef = |e: f64, l: u8| -> f64 {
        live.iter()
            .filter(|t| (t.1 - e).abs() < 1e-12 && t.2 == l)
            .map(|t| t.0)
            .sum()
    };
    let monotone_at: Box<dyn Fn(f64) -> f64> = match exps.len() {
        1 => {
            let (a0, b0) = (coef(exps[0], 0), coef(exps[0], 1));
            Box::new(move |t: f64| {
                if b0 == 0.0 {
                    a0
                } else if t == 0.0 {
                    signed_inf(-b0)
                } else if t.is_infinite() {
                    signed_inf(b0)
                } else {
                    a0 + b0 * t.ln()
                }
            })
        }
        2 if live.iter().all(|t| t.2 == 0) => {
            let (lo_c, hi_c) = (coef(exps[0], 0), coef(exps[1], 0));
            let gap = exps[1] - exps[0];
            Box::new(move |t: f64| {
                if hi_c == 0.0 || t == 0.0 {
                    lo_c
                } else if t.is_infinite() {
                    signed_inf(hi_c)
                } else {
                    lo_c + hi_c * t.powf(gap)
                }
            })
        }
        _ => return None,
    };
    Some(monotone_at(a) >= -tol && monotone_at(b) >= -tol)
}

/// Decides `sign * (quantity) >= 0` on `rho` in `[lo, hi]` from its pieces.
pub(crate) fn pieces_nonneg(pieces: &[SignPiece], lo: f64, hi: f64, sign: f64) -> Option<bool> {
    let mut all = true;
    for piece in pieces {
        let a = lo.max(piece.lo);
        let b = hi.min(piece.hi);
        if !(a < b) {
            continue;
        }
        let map = |rho: f64| {
            if piece.flip {
                piece.shift - rho
            } else {
                rho - piece.shift
            }
        };
        let (x, y) = (map(a), map(b));
        let (ta, tb) = if x <= y { (x, y) } else { (y, x) };
        let terms: LogPowerSum = piece.terms.iter().map(|&(c, e, l)| (sign * c, e, l)).collect();
        all &= log_power_nonneg(&terms, ta.max(0.0), tb)?;
    }
    Some(all)
}

/// Sign form of `v^{(n)}(rho)`.
pub(crate) fn v_sign_form(f: &RadialField, n: usize) -> Option<Vec<SignPiece>> {
    if let Some(terms) = f.power_terms() {
        return Some(SignPiece::whole(
            terms
                .iter()
                .map(|&(c, e)| (c * falling(e, n), e - n as f64, 0))
                .collect(),
        ));
    }
    match *f {
        RadialField::PowerLog { gamma, alpha } => {
            let p = 0.5 * alpha;
            let e = p - n as f64;
            Some(SignPiece::whole(vec![
                (gamma * falling_dp(p, n), e, 0),
                (gamma * falling(p, n), e, 1),
            ]))
        }
        RadialField::Exponential { alpha, beta, .. } => {
            // v^{(n)} = K e^u P_n with K > 0; P_1 = u', P_2 = u'' + u'^2.
            let h = 0.5 * beta;
            match n {
                0 => Some(SignPiece::whole(vec![(1.0, 0.0, 0)])),
                1 => Some(SignPiece::whole(vec![(alpha * h, h - 1.0, 0)])),
                2 => Some(SignPiece::whole(vec![
                    (alpha * falling(h, 2), h - 2.0, 0),
                    (alpha * alpha * h * h, beta - 2.0, 0),
                ])),
                _ => None,
            }
        }
        RadialField::PowerSink { gamma, alpha, r0 } => {
            let p = 0.5 * alpha;
            let c = gamma / alpha * falling(p, n);
            let e = p - n as f64;
            let left = if n % 2 == 1 { -c } else { c };
            Some(vec![
                SignPiece {
                    lo: 0.0,
                    hi: r0 * r0,
                    shift: r0 * r0,
                    flip: true,
                    terms: vec![(left, e, 0)],
                },
                SignPiece {
                    lo: r0 * r0,
                    hi: f64::INFINITY,
                    shift: r0 * r0,
                    flip: false,
                    terms: vec![(c, e, 0)],
                },
            ])
        }
        _ => None,
    }
}

/// Sign form of `(s/2 + 2) v''(rho) + rho v'''(rho)`, the derivative of
/// `lambda^{s/2+2} v''(R^2 lambda)` up to a positive factor.
pub(crate) fn curvature_growth_form(f: &RadialField, s: f64) -> Option<Vec<SignPiece>> {
    let w = 0.5 * s + 2.0;
    if let Some(terms) = f.power_terms() {
        return Some(SignPiece::whole(
            terms
                .iter()
                .map(|&(c, e)| (c * falling(e, 2) * (0.5 * s + e), e - 2.0, 0))
                .collect(),
        ));
    }
    match *f {
        RadialField::PowerLog { gamma, alpha } => {
            let p = 0.5 * alpha;
            let a = gamma * (w * falling_dp(p, 2) + falling_dp(p, 3));
            let b = gamma * (w * falling(p, 2) + falling(p, 3));
            Some(SignPiece::whole(vec![(a, p - 2.0, 0), (b, p - 2.0, 1)]))
        }
        RadialField::PowerSink { gamma, alpha, r0 } => {
            let p = 0.5 * alpha;
            let k = gamma / alpha;
            let (f2, f3) = (falling(p, 2), falling(p, 3));
            let r02 = r0 * r0;
            Some(vec![
                SignPiece {
                    lo: 0.0,
                    hi: r02,
                    shift: r02,
                    flip: true,
                    terms: vec![(k * (w * f2 + f3), p - 2.0, 0), (-k * f3 * r02, p - 3.0, 0)],
                },
                SignPiece {
                    lo: r02,
                    hi: f64::INFINITY,
                    shift: r02,
                    flip: false,
                    terms: vec![(k * (w * f2 + f3), p - 2.0, 0), (k * f3 * r02, p - 3.0, 0)],
                },
            ])
        }
        _ => None,
    }
}

/// Sign form of `q^{(n)}(kappa)` in the variable `kappa`.
pub(crate) fn q_sign_form(f: &RadialField, s: f64, radius: f64, n: usize) -> Option<LogPowerSum> {
    let r2 = radius * radius;
    if let Some(terms) = f.power_terms() {
        return Some(
            terms
                .iter()
                .map(|&(c, e)| {
                    let big_c = 2.0 * radius.powf(s + 2.0) * c * e * r2.powf(e - 1.0);
                    let m = -0.5 * s - e;
                    (big_c * falling(m, n), m - n as f64, 0)
                })
                .collect(),
        );
    }
    match *f {
        RadialField::PowerLog { gamma, alpha } => {
            let pp = 0.5 * alpha;
            let m = -0.5 * (s + alpha);
            let pref = 2.0 * gamma * radius.powf(s + alpha);
            let a = 2.0 * pp * radius.ln() + 1.0;
            let (fm, fdm) = (falling(m, n), falling_dp(m, n));
            let e = m - n as f64;
            Some(vec![(pref * (a * fm - pp * fdm), e, 0), (-pref * pp * fm, e, 1)])
        }
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lj_a2() -> RadialField {
        RadialField::LennardJones {
            gamma: 5.0,
            eta: 0.95,
            alpha: -6.0,
            beta: -12.0,
        }
    }

    #[test]
    fn spot_values() {
        let pl = RadialField::PowerLaw { gamma: 1.0, alpha: 2.0 };
        assert_eq!(field_eval(&pl, 4.0, 0).unwrap(), 2.0);
        assert!((field_eval(&lj_a2(), 1.0, 1).unwrap() - 0.125).abs() < 1e-14);
        let sink = RadialField::PowerSink {
            gamma: 1.0,
            alpha: 2.0,
            r0: 1.0,
        };
        assert_eq!(field_eval(&sink, 1.0, 0).unwrap(), 0.0);
        assert!(field_eval(&pl, -1.0, 0).is_err());
        assert!(matches!(
            field_eval(&pl, 1.0, MAX_ORDER + 1),
            Err(Error::OrderUnavailable { .. })
        ));
    }

    #[test]
    fn values_at_origin() {
        // beta < 0 dominates: v -> +inf, v' -> -inf
        assert_eq!(field_eval(&lj_a2(), 0.0, 0).unwrap(), f64::INFINITY);
        assert_eq!(field_eval(&lj_a2(), 0.0, 1).unwrap(), f64::NEG_INFINITY);
        let pl = RadialField::PowerLaw { gamma: 1.0, alpha: 4.0 };
        assert_eq!(field_eval(&pl, 0.0, 1).unwrap(), 0.0);
        assert_eq!(field_eval(&pl, 0.0, 2).unwrap(), 0.5);
        assert_eq!(field_eval(&pl, 0.0, 3).unwrap(), 0.0);
        let ex = RadialField::Exponential {
            gamma: 1.0,
            alpha: 1.0,
            beta: 2.0,
        };
        assert_eq!(field_eval(&ex, 0.0, 0).unwrap(), 0.5);
        assert!((field_eval(&ex, 0.0, 1).unwrap() - 0.5).abs() < 1e-15);
        let pg = RadialField::PowerLog { gamma: 1.0, alpha: 2.0 };
        assert_eq!(field_eval(&pg, 0.0, 0).unwrap(), 0.0);
        assert_eq!(field_eval(&pg, 0.0, 1).unwrap(), f64::NEG_INFINITY);
    }

    #[test]
    fn sink_exceptional_point() {
        let sink = RadialField::PowerSink {
            gamma: 1.0,
            alpha: 3.0,
            r0: 1.0,
        };
        assert_eq!(field_eval(&sink, 1.0, 1).unwrap(), 0.0);
        assert!(matches!(field_eval(&sink, 1.0, 3), Err(Error::LimitUndefined(_))));
        assert_eq!(field_eval(&sink, 1.0, 2).unwrap(), f64::INFINITY);
        assert_eq!(sink.exceptional_points(), vec![1.0]);
    }

    #[test]
    fn validation() {
        assert!(RadialField::PowerLaw {
            gamma: 1.0,
            alpha: -1.0
        }
        .validate()
        .is_err());
        assert!(RadialField::PowerLaw { gamma: 0.0, alpha: 1.0 }.validate().is_err());
        assert!(RadialField::LennardJones {
            gamma: 1.0,
            eta: 1.0,
            alpha: -12.0,
            beta: -6.0
        }
        .validate()
        .is_err());
        assert!(RadialField::Exponential {
            gamma: 1.0,
            alpha: 1.0,
            beta: -1.0
        }
        .validate()
        .is_err());
    }

    #[test]
    fn json_round_trip_and_unknown_keys() {
        let f: RadialField = serde_json::from_str(r#"{"type":"power_sink","gamma":1,"alpha":2,"R0":1.5}"#).unwrap();
        assert_eq!(
            f,
            RadialField::PowerSink {
                gamma: 1.0,
                alpha: 2.0,
                r0: 1.5
            }
        );
        let back = serde_json::to_string(&f).unwrap();
        assert!(back.contains("\"R0\":1.5"));
        let again: RadialField = serde_json::from_str(&back).unwrap();
        assert_eq!(again, f);
        assert!(serde_json::from_str::<RadialField>(r#"{"type":"power","gamma":1,"alpha":2,"beta":3}"#).is_err());
        assert!(serde_json::from_str::<RadialField>(r#"{"type":"power","gamma":1,"alpha":-2}"#).is_err());
        let lj: RadialField =
            serde_json::from_str(r#"{"type":"lennard_jones","gamma":5,"eta":0.95,"alpha":-6,"beta":-12}"#).unwrap();
        assert_eq!(lj, lj_a2());
    }

    #[test]
    fn sign_decisions() {
        // t^{-1}(1 - t): nonnegative on [0, 1], not on [0, 2]
        let terms = vec![(1.0, -1.0, 0), (-1.0, 0.0, 0)];
        assert_eq!(log_power_nonneg(&terms, 0.0, 1.0), Some(true));
        assert_eq!(log_power_nonneg(&terms, 0.0, 2.0), Some(false));
        // 1 + log t >= 0 exactly on [1/e, inf)
        let terms = vec![(1.0, 0.5, 0), (1.0, 0.5, 1)];
        assert_eq!(log_power_nonneg(&terms, 0.4, f64::INFINITY), Some(true));
        assert_eq!(log_power_nonneg(&terms, 0.3, 1.0), Some(false));
        let convex = |f: RadialField| pieces_nonneg(&v_sign_form(&f, 2).unwrap(), 0.0, f64::INFINITY, 1.0);
        assert_eq!(convex(RadialField::PowerLaw { gamma: 1.0, alpha: 4.0 }), Some(true));
        assert_eq!(convex(RadialField::PowerLaw { gamma: 1.0, alpha: 1.5 }), Some(false));
        assert_eq!(
            convex(RadialField::Exponential {
                gamma: 1.0,
                alpha: 1.0,
                beta: 2.0
            }),
            Some(true)
        );
        assert_eq!(
            convex(RadialField::Exponential {
                gamma: 1.0,
                alpha: 1.0,
                beta: 1.5
            }),
            Some(false)
        );
        assert_eq!(convex(RadialField::PowerLog { gamma: 1.0, alpha: 2.0 }), Some(true));
        assert_eq!(convex(RadialField::PowerLog { gamma: 1.0, alpha: 3.0 }), Some(false));
        assert_eq!(
            convex(RadialField::PowerSink {
                gamma: 1.0,
                alpha: 2.0,
                r0: 0.5
            }),
            Some(true)
        );
        assert_eq!(
            convex(RadialField::LennardJones {
                gamma: 1.0,
                eta: 1.0,
                alpha: 3.0,
                beta: 2.0
            }),
            Some(true)
        );
        assert_eq!(convex(lj_a2()), Some(false));
    }

    #[test]
    fn lah_numbers() {
        assert_eq!(lah(3, 1), 6.0);
        assert_eq!(lah(3, 2), 6.0);
        assert_eq!(lah(3, 3), 1.0);
        assert_eq!(lah(4, 2), 36.0);
    }

    #[test]
    fn q_examples() {
        let p = RieszParams::new(8, 4.0).unwrap();
        for &k in &[0.1, 0.5, 0.9] {
            let q = q_eval(&lj_a2(), p, 1.0, k, 0).unwrap();
            let expected = 5.0 * k * (1.0 - 0.95 * f64::powf(k, 3.0));
            assert!((q - expected).abs() < 1e-13, "{q} vs {expected}");
        }
        let pl = RadialField::PowerLaw { gamma: 1.0, alpha: 4.0 };
        let p = RieszParams::new(10, 2.0).unwrap();
        assert_eq!(q_eval(&pl, p, 1.0, 0.0, 0).unwrap(), f64::INFINITY);
    }

    #[test]
    fn confinement_examples() {
        let p = RieszParams::new(8, 2.0).unwrap();
        assert!(matches!(
            confinement_check(&RadialField::PowerLaw { gamma: 1.0, alpha: 4.0 }, p),
            Confinement::Satisfied { clause: 'a', .. }
        ));
        let p = RieszParams::new(8, 4.0).unwrap();
        assert!(matches!(
            confinement_check(&lj_a2(), p),
            Confinement::NotGuaranteed { .. }
        ));
        let p = RieszParams::new(3, 0.0).unwrap();
        assert!(matches!(
            confinement_check(&RadialField::PowerLaw { gamma: 1.0, alpha: 2.0 }, p),
            Confinement::Satisfied { clause: 'b', .. }
        ));
    }
}
