//! Certification that the uniform measure on a sphere is the equilibrium
//! measure: the modified potential `f`, its companion `g`, stationary radii,
//! necessary conditions (i)-(iv) and the sufficient certificates.

use crate::error::{domain, Error, Result};
use crate::ext;
use crate::fields::{
    curvature_growth_form, field_eval, kernel_tail_limit, log_power_nonneg, pieces_nonneg, q_eval, q_sign_form,
    v_sign_form, RadialField, SignPiece,
};
use crate::specfun::{digamma, f21, hyp2f1_limit_at_one};
use crate::sphere_kernel::{b_d, c_sd, h_eval, sphere_energy, Branch, RieszParams, SphereEvalPoint};
use serde::{Deserialize, Serialize};

/// Tolerance on condition (i), relative to `max(1, c/4)`.
pub const STATIONARITY_TOL: f64 = 1e-9;

fn rising(x: f64, n: usize) -> f64 {
    (0..n).fold(1.0, |acc, k| acc * (x + k as f64))
}

fn ineq_tol(values: &[f64]) -> f64 {
    1e-12
        * values
            .iter()
            .filter(|v| v.is_finite())
            .fold(1.0f64, |m, v| m.max(v.abs()))
}

/// Sphere radius `R` together with the energy and field it is tested against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModifiedPotentialCtx {
    pub params: RieszParams,
    pub field: RadialField,
    #[serde(rename = "R")]
    pub radius: f64,
}

impl ModifiedPotentialCtx {
    pub fn new(params: RieszParams, field: RadialField, radius: f64) -> Result<Self> {
        params.validate()?;
        field.validate()?;
        if !(radius > 0.0) || !radius.is_finite() {
            return domain(format!("radius must be finite and > 0, got {radius}"));
        }
        Ok(ModifiedPotentialCtx { params, field, radius })
    }

    fn stationarity_residual(&self) -> Result<f64> {
        stationarity_residual(self.params, &self.field, self.radius)
    }
}

/// `f^{(order)}` at an explicit branch point; `lambda = 1` with an inside or
/// outside branch gives the one-sided limit.
pub fn f_eval_at(ctx: &ModifiedPotentialCtx, pt: SphereEvalPoint, order: usize) -> Result<f64> {
    let p = ctx.params;
    let r = ctx.radius;
    let h = h_eval(p, pt, order)?;
    let v = field_eval(&ctx.field, r * r * pt.lambda, order)?;
    let kernel = if p.is_log() {
        if order == 0 {
            -r.ln() + h
        } else {
            h
        }
    } else {
        r.powf(-p.s) * h
    };
    let value = kernel + r.powi(2 * order as i32) * v;
    if value.is_nan() {
        return Err(Error::LimitUndefined(format!(
            "f^({order}) at lambda = {}: kernel {kernel} and field {v} terms cancel",
            pt.lambda
        )));
    }
    Ok(value)
}

/// Modified potential `f(lambda) = U(x) + V(x)` at `|x|^2 = R^2 lambda`, and its
/// derivatives in `lambda`.
pub fn f_eval(ctx: &ModifiedPotentialCtx, lambda: f64, order: usize) -> Result<f64> {
    f_eval_at(ctx, SphereEvalPoint::new(lambda)?, order)
}

/// `y^{(order)}(kappa)` for `y(kappa) = -2F1(s/2+1, (2+s-d)/2; d/2; kappa)`.
pub fn y_eval(p: RieszParams, kappa: f64, order: usize) -> Result<f64> {
    p.validate()?;
    if !(0.0..=1.0).contains(&kappa) {
        return domain(format!("kappa must lie in [0, 1], got {kappa}"));
    }
    let (a, b, c) = (0.5 * p.s + 1.0, 0.5 * (2.0 + p.s - p.dim()), 0.5 * p.dim());
    let coef = -rising(a, order) * rising(b, order) / rising(c, order);
    if coef == 0.0 {
        return Ok(0.0);
    }
    let l = order as f64;
    let hyp = if kappa == 1.0 {
        hyp2f1_limit_at_one(a + l, b + l, c + l)?
    } else {
        f21(a + l, b + l, c + l, kappa)?
    };
    Ok(coef * hyp)
}

/// `g = y + q`, equal to `2 R^s kappa^{-s/2-1} f'(1/kappa)` on `(0, 1]`.
pub fn g_eval(ctx: &ModifiedPotentialCtx, kappa: f64, order: usize) -> Result<f64> {
    let y = y_eval(ctx.params, kappa, order)?;
    let q = q_eval(&ctx.field, ctx.params, ctx.radius, kappa, order)?;
    let value = y + q;
    if value.is_nan() {
        return Err(Error::LimitUndefined(format!("g^({order}) at kappa = {kappa}")));
    }
    Ok(value)
}

/// Bracket and probe count for the stationary-radius search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadiusSearch {
    pub r_min: f64,
    pub r_max: f64,
    pub grid_n: usize,
}

impl Default for RadiusSearch {
    fn default() -> Self {
        RadiusSearch {
            r_min: 1e-4,
            r_max: 1e4,
            grid_n: 4000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StationaryRadii {
    pub radii: Vec<f64>,
    pub warnings: Vec<String>,
}

/// `R^{s+2} v'(R^2) - c_{s,d}/4`; its zeros are the candidate sphere radii.
pub fn stationarity_residual(p: RieszParams, f: &RadialField, radius: f64) -> Result<f64> {
    let c = c_sd(p)?;
    Ok(radius.powf(p.s + 2.0) * field_eval(f, radius * radius, 1)? - 0.25 * c)
}

/// Sign-change roots of the stationarity residual on the search bracket.
/// Tangential roots are not detected.
pub fn stationary_radii(p: RieszParams, f: &RadialField, search: RadiusSearch) -> Result<StationaryRadii> {
    p.require_finite_energy()?;
    f.validate()?;
    if !(search.r_min > 0.0) || !(search.r_max > search.r_min) || !search.r_max.is_finite() {
        return domain(format!("invalid radius bracket [{}, {}]", search.r_min, search.r_max));
    }
    if search.grid_n < 2 {
        return domain("radius search needs at least 2 probes");
    }
    let c = c_sd(p)?;
    let mut warnings = Vec::new();
    if let RadialField::PowerLaw { gamma, alpha } = *f {
        let e = alpha + p.s;
        if e == 0.0 {
            warnings.push("alpha + s = 0: the residual is constant in R".into());
            return Ok(StationaryRadii {
                radii: Vec::new(),
                warnings,
            });
        }
        let r = (c / (2.0 * gamma)).powf(1.0 / e);
        if r < search.r_min || r > search.r_max {
            warnings.push(format!("closed-form radius {r} lies outside the search bracket"));
        }
        return Ok(StationaryRadii {
            radii: vec![r],
            warnings,
        });
    }
    if let RadialField::PowerSink { r0, .. } = *f {
        if r0 > search.r_min && r0 < search.r_max {
            warnings.push(format!(
                "the sink radius R0 = {r0} lies in the bracket; the field is not C^2 there and R = R0 is never reported"
            ));
        }
    }
    let residual = |r: f64| stationarity_residual(p, f, r).unwrap_or(f64::NAN);
    let (lo, hi) = (search.r_min.ln(), search.r_max.ln());
    let probes: Vec<(f64, f64)> = (0..search.grid_n)
        .map(|k| {
            let r = (lo + (hi - lo) * k as f64 / (search.grid_n - 1) as f64).exp();
            (r, residual(r))
        })
        .collect();
    let mut radii: Vec<f64> = Vec::new();
    for w in probes.windows(2) {
        let ((mut a, mut fa), (mut b, fb)) = (w[0], w[1]);
        if fa.is_nan() || fb.is_nan() {
            continue;
        }
        if fa == 0.0 {
            radii.push(a);
            continue;
        }
        if fa.signum() == fb.signum() || fb == 0.0 {
            continue;
        }
        let scale = [fa, fb, 0.25 * c]
            .iter()
            .filter(|x| x.is_finite())
            .fold(0.0f64, |m, x| m.max(x.abs()));
        let mut fb = fb;
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            let fm = residual(m);
            if fm.is_nan() {
                break;
            }
            if fm == 0.0 {
                a = m;
                b = m;
                fa = 0.0;
                fb = 0.0;
                break;
            }
            if fm.signum() == fa.signum() {
                a = m;
                fa = fm;
            } else {
                b = m;
                fb = fm;
            }
            if b - a <= 1e-12 {
                break;
            }
        }
        // A sign change across a jump keeps both residuals large.
        if !(fa.is_finite() && fb.is_finite()) || fa.abs().max(fb.abs()) > 1e-6 * scale {
            continue;
        }
        radii.push(if fa.abs() <= fb.abs() { a } else { b });
    }
    radii.dedup_by(|x, y| (*x - *y).abs() <= 1e-9 * y.abs());
    if let (Some(first), Some(last)) = (probes.first(), probes.last()) {
        if first.1 > 0.0 {
            warnings.push(format!(
                "residual is positive at R_min = {}; roots may lie below the bracket",
                first.0
            ));
        }
        if last.1 < 0.0 {
            warnings.push(format!(
                "residual is negative at R_max = {}; roots may lie above the bracket",
                last.0
            ));
        }
    }
    Ok(StationaryRadii { radii, warnings })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResidualCheck {
    #[serde(serialize_with = "ext::real")]
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Comparison {
    #[serde(serialize_with = "ext::real")]
    pub lhs: f64,
    /// NaN (serialized as null) when the limit is undefined.
    #[serde(serialize_with = "ext::real")]
    pub rhs: f64,
    pub pass: bool,
}

/// Necessary conditions (i)-(iv) at one radius.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    pub cond_i: ResidualCheck,
    pub cond_ii: Comparison,
    pub cond_iii: Comparison,
    pub cond_iv: Comparison,
    pub notes: Vec<String>,
}

impl ConditionReport {
    pub fn all_pass(&self) -> bool {
        self.first_failure().is_none()
    }

    pub fn first_failure(&self) -> Option<&'static str> {
        if !self.cond_i.pass {
            Some("i")
        } else if !self.cond_ii.pass {
            Some("ii")
        } else if !self.cond_iii.pass {
            Some("iii")
        } else if !self.cond_iv.pass {
            Some("iv")
        } else {
            None
        }
    }
}

fn require_necessary_window(p: RieszParams) -> Result<()> {
    p.validate()?;
    let d = p.dim();
    if !(p.s < d - 3.0) {
        return domain(format!(
            "necessary conditions need -2 < s < d - 3 = {}, got s = {}",
            d - 3.0,
            p.s
        ));
    }
    Ok(())
}

fn cond_i(ctx: &ModifiedPotentialCtx) -> Result<ResidualCheck> {
    let c = c_sd(ctx.params)?;
    let residual = ctx.stationarity_residual()?;
    let tolerance = STATIONARITY_TOL * (0.25 * c).max(1.0);
    Ok(ResidualCheck {
        residual,
        tolerance,
        pass: residual.abs() <= tolerance,
    })
}

fn cond_ii(ctx: &ModifiedPotentialCtx) -> Result<Comparison> {
    let (d, s) = (ctx.params.dim(), ctx.params.s);
    let rho = ctx.radius * ctx.radius;
    let lhs = rho * field_eval(&ctx.field, rho, 2)? / field_eval(&ctx.field, rho, 1)?;
    let rhs = -(s + 2.0) * (d - s - 4.0) / (4.0 * (d - s - 3.0));
    Ok(Comparison {
        lhs,
        rhs,
        pass: lhs >= rhs - ineq_tol(&[rhs]),
    })
}

fn cond_iii(ctx: &ModifiedPotentialCtx) -> Result<Comparison> {
    let p = ctx.params;
    let c = c_sd(p)?;
    let gap = ctx.field.limits().v_at_zero - field_eval(&ctx.field, ctx.radius * ctx.radius, 0)?;
    let (lhs, rhs) = if p.is_log() {
        (gap, b_d(p.d)?)
    } else {
        (ctx.radius.powf(p.s) * gap, (c - 1.0) / p.s)
    };
    Ok(Comparison {
        lhs,
        rhs,
        pass: lhs >= rhs - ineq_tol(&[lhs, rhs]),
    })
}

fn cond_iv(ctx: &ModifiedPotentialCtx, notes: &mut Vec<String>) -> Result<Comparison> {
    let p = ctx.params;
    let c = c_sd(p)?;
    let v = field_eval(&ctx.field, ctx.radius * ctx.radius, 0)?;
    let lhs = if p.is_log() {
        -ctx.radius.ln() + b_d(p.d)? + v
    } else {
        v + ctx.radius.powf(-p.s) * c / p.s
    };
    let rhs = match kernel_tail_limit(&ctx.field, p) {
        Ok(x) => x,
        Err(Error::LimitUndefined(msg)) => {
            notes.push(format!("condition (iv) undetermined: {msg}"));
            f64::NAN
        }
        Err(e) => return Err(e),
    };
    Ok(Comparison {
        lhs,
        rhs,
        pass: lhs <= rhs + ineq_tol(&[lhs, rhs]),
    })
}

/// Evaluates the four necessary conditions at `ctx.radius`.
pub fn necessary_report(ctx: &ModifiedPotentialCtx) -> Result<ConditionReport> {
    require_necessary_window(ctx.params)?;
    if let RadialField::PowerSink { r0, .. } = ctx.field {
        if ctx.radius == r0 {
            return domain("necessary conditions are not evaluated at the sink radius R = R0");
        }
    }
    let mut notes = Vec::new();
    let cond_i = cond_i(ctx)?;
    let cond_ii = cond_ii(ctx)?;
    let cond_iii = cond_iii(ctx)?;
    let cond_iv = cond_iv(ctx, &mut notes)?;
    Ok(ConditionReport {
        cond_i,
        cond_ii,
        cond_iii,
        cond_iv,
        notes,
    })
}

/// Sharp threshold on the power-law exponent above which the equilibrium is
/// a sphere.
pub fn alpha_threshold(p: RieszParams) -> Result<f64> {
    require_necessary_window(p)?;
    let (d, s) = (p.dim(), p.s);
    if s == d - 4.0 {
        // Both branches equal 2 exactly here (c_{d-4,d} = 4/d).
        return Ok(2.0);
    }
    let second = 2.0 - (s + 2.0) * (d - s - 4.0) / (2.0 * (d - s - 3.0));
    let first = if p.is_log() {
        -1.0 / (2.0 * b_d(p.d)?)
    } else {
        let c = c_sd(p)?;
        s * c / (2.0 - 2.0 * c)
    };
    Ok(first.max(second))
}

fn check_power_law(p: RieszParams, gamma: f64, alpha: f64) -> Result<RadialField> {
    let f = RadialField::PowerLaw { gamma, alpha };
    f.validate()?;
    if !(alpha > (-p.s).max(0.0)) {
        return domain(format!(
            "power law needs alpha > max(-s, 0), got alpha = {alpha}, s = {}",
            p.s
        ));
    }
    Ok(f)
}

/// Radius `(c/(2 gamma))^{1/(alpha+s)}` solving condition (i) for a power law.
pub fn power_law_radius(p: RieszParams, gamma: f64, alpha: f64) -> Result<f64> {
    p.validate()?;
    check_power_law(p, gamma, alpha)?;
    Ok((c_sd(p)? / (2.0 * gamma)).powf(1.0 / (alpha + p.s)))
}

/// Closed-form energy of the sphere of radius [`power_law_radius`].
pub fn power_law_energy(p: RieszParams, gamma: f64, alpha: f64) -> Result<f64> {
    p.require_finite_energy()?;
    check_power_law(p, gamma, alpha)?;
    let c = c_sd(p)?;
    let s = p.s;
    if p.is_log() {
        let d = p.dim();
        return Ok((1.0 + (2.0 * gamma).ln()) / alpha - std::f64::consts::LN_2
            + 0.5 * (digamma(d - 1.0)? - digamma(0.5 * (d - 1.0))?));
    }
    let e = alpha + s;
    Ok(e * (2.0 * gamma).powf(s / e) / (alpha * s) * c.powf(alpha / e))
}

/// `I(sigma_R) = sphere_energy(R) + 2 v(R^2)`.
pub fn sphere_total_energy(p: RieszParams, f: &RadialField, radius: f64) -> Result<f64> {
    Ok(sphere_energy(p, radius)? + 2.0 * field_eval(f, radius * radius, 0)?)
}

/// How an inequality was decided.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Finite evaluation of closed forms.
    Numeric,
    /// Sign of a closed form decided exactly over an interval.
    Symbolic,
    /// Sign checked on sample points only; never certifies.
    Sampled,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Inequality {
    pub name: String,
    #[serde(serialize_with = "ext::opt_real")]
    pub lhs: Option<f64>,
    pub relation: &'static str,
    #[serde(serialize_with = "ext::opt_real")]
    pub rhs: Option<f64>,
    pub holds: bool,
    pub method: Method,
}

impl Inequality {
    fn numeric(name: impl Into<String>, lhs: f64, relation: &'static str, rhs: f64) -> Self {
        let tol = ineq_tol(&[lhs, rhs]);
        let holds = match relation {
            ">=" => lhs >= rhs - tol,
            "<=" => lhs <= rhs + tol,
            ">" => lhs > rhs,
            "<" => lhs < rhs,
            _ => unreachable!("unknown relation {relation}"),
        };
        Inequality {
            name: name.into(),
            lhs: Some(lhs),
            relation,
            rhs: Some(rhs),
            holds,
            method: Method::Numeric,
        }
    }

    fn flag(name: impl Into<String>, holds: bool) -> Self {
        Inequality {
            name: name.into(),
            lhs: None,
            relation: "holds",
            rhs: None,
            holds,
            method: Method::Numeric,
        }
    }

    fn from_residual(check: &ResidualCheck) -> Self {
        Inequality {
            name: "(i) |R^{s+2} v'(R^2) - c/4|".into(),
            lhs: Some(check.residual.abs()),
            relation: "<=",
            rhs: Some(check.tolerance),
            holds: check.pass,
            method: Method::Numeric,
        }
    }

    fn from_comparison(name: &str, c: &Comparison, relation: &'static str) -> Self {
        Inequality {
            name: name.into(),
            lhs: Some(c.lhs),
            relation,
            rhs: Some(c.rhs),
            holds: c.pass,
            method: Method::Numeric,
        }
    }
}

/// Which half-line of `lambda` a certificate covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Inside,
    Outside,
    Both,
}

/// Sufficient-condition certificates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Certificate {
    /// `v'' >= 0` on `[0, inf)`, `-2 < s <= d-4`.
    GlobalConvexity,
    /// `v'' >= 0` on `[0, R^2]`, `-2 < s <= d-4`.
    ConvexInside,
    /// `v'' >= 0` on `[R^2, inf)`, `-2 < s <= d-4`.
    ConvexOutside,
    /// `v^{(k)} <= 0` on `[0, R^2]` and `f^{(l)}(0) <= 0`, `d-4 < s < d-3`.
    InsideNegativeLadder,
    /// `v^{(k)} >= 0` on `[R^2, inf)` and `f^{(l)}(1) >= 0`, `-2 < s < d-4`.
    OutsideEvenLadder,
    /// `lambda^{s/2+2} v''(R^2 lambda)` increasing on `[1, inf)`, `d-4 < s < d-3`.
    OutsideCurvatureGrowth,
    /// Half-monotone endpoint ladders for `f` on `[0, 1]` and `-g` on `[0, 1]`
    /// at order `k = ceil((d-s)/2)`, `-2 < s < d-4`.
    HalfMonotoneLadder,
    /// Lennard-Jones fields with `alpha = -2-s` and `R = 1`.
    SpecialLennardJones,
    /// Power laws with `alpha` at or above [`alpha_threshold`].
    PowerLawThreshold,
}

impl Certificate {
    pub const ALL: [Certificate; 9] = [
        Certificate::PowerLawThreshold,
        Certificate::GlobalConvexity,
        Certificate::SpecialLennardJones,
        Certificate::HalfMonotoneLadder,
        Certificate::ConvexInside,
        Certificate::ConvexOutside,
        Certificate::InsideNegativeLadder,
        Certificate::OutsideEvenLadder,
        Certificate::OutsideCurvatureGrowth,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Certificate::GlobalConvexity => "global_convexity",
            Certificate::ConvexInside => "convex_inside",
            Certificate::ConvexOutside => "convex_outside",
            Certificate::InsideNegativeLadder => "inside_negative_ladder",
            Certificate::OutsideEvenLadder => "outside_even_ladder",
            Certificate::OutsideCurvatureGrowth => "outside_curvature_growth",
            Certificate::HalfMonotoneLadder => "half_monotone_ladder",
            Certificate::SpecialLennardJones => "special_lennard_jones",
            Certificate::PowerLawThreshold => "power_law_threshold",
        }
    }

    pub fn side(self) -> Side {
        match self {
            Certificate::ConvexInside | Certificate::InsideNegativeLadder => Side::Inside,
            Certificate::ConvexOutside | Certificate::OutsideEvenLadder | Certificate::OutsideCurvatureGrowth => {
                Side::Outside
            }
            _ => Side::Both,
        }
    }

    fn window(self) -> (&'static str, fn(f64, f64) -> bool) {
        match self {
            Certificate::GlobalConvexity
            | Certificate::ConvexInside
            | Certificate::ConvexOutside
            | Certificate::SpecialLennardJones => ("-2 < s <= d - 4", |d, s| s <= d - 4.0),
            Certificate::InsideNegativeLadder | Certificate::OutsideCurvatureGrowth => {
                ("d - 4 < s < d - 3", |d, s| s > d - 4.0 && s < d - 3.0)
            }
            Certificate::OutsideEvenLadder | Certificate::HalfMonotoneLadder => ("-2 < s < d - 4", |d, s| s < d - 4.0),
            Certificate::PowerLawThreshold => ("-2 < s < d - 3", |d, s| s < d - 3.0),
        }
    }

    pub fn applies(self, p: RieszParams) -> bool {
        (self.window().1)(p.dim(), p.s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateOutcome {
    pub certificate: Certificate,
    pub side: Side,
    /// Every recorded inequality holds.
    pub holds: bool,
    /// Some sign hypothesis was only sampled.
    pub heuristic: bool,
    pub evidence: Vec<Inequality>,
    pub notes: Vec<String>,
}

impl CertificateOutcome {
    /// Holds with every global hypothesis decided exactly.
    pub fn certifies(&self) -> bool {
        self.holds && !self.heuristic
    }

    fn new(certificate: Certificate, evidence: Vec<Inequality>, notes: Vec<String>) -> Self {
        let holds = evidence.iter().all(|e| e.holds);
        let heuristic = evidence.iter().any(|e| e.method == Method::Sampled);
        CertificateOutcome {
            certificate,
            side: certificate.side(),
            holds,
            heuristic,
            evidence,
            notes,
        }
    }
}

const SAMPLE_POINTS: usize = 1000;

/// Checks `sign * value(x) >= 0` for `x` in `[lo, hi]`, symbolically when a
/// closed form is available and otherwise on log-spaced samples.
fn sign_hypothesis(
    name: String,
    symbolic: Option<bool>,
    lo: f64,
    hi: f64,
    sign: f64,
    value: impl Fn(f64) -> Result<f64>,
) -> Result<Inequality> {
    if let Some(holds) = symbolic {
        return Ok(Inequality {
            name,
            lhs: None,
            relation: "holds",
            rhs: None,
            holds,
            method: Method::Symbolic,
        });
    }
    let a = if lo > 0.0 { lo } else { 1e-8 * hi.min(1.0) };
    let b = if hi.is_finite() { hi } else { lo.max(1.0) * 1e6 };
    let mut worst = f64::INFINITY;
    for k in 0..SAMPLE_POINTS {
        let x = (a.ln() + (b.ln() - a.ln()) * k as f64 / (SAMPLE_POINTS - 1) as f64).exp();
        let y = match value(x) {
            Ok(y) => sign * y,
            Err(Error::LimitUndefined(_)) => continue,
            Err(e) => return Err(e),
        };
        if !y.is_nan() {
            worst = worst.min(y);
        }
    }
    Ok(Inequality {
        name,
        lhs: Some(worst),
        relation: ">=",
        rhs: Some(0.0),
        holds: worst >= 0.0,
        method: Method::Sampled,
    })
}

fn rho_sign_hypothesis(
    name: String,
    pieces: Option<Vec<SignPiece>>,
    lo: f64,
    hi: f64,
    sign: f64,
    value: impl Fn(f64) -> Result<f64>,
) -> Result<Inequality> {
    let symbolic = pieces.and_then(|ps| pieces_nonneg(&ps, lo, hi, sign));
    sign_hypothesis(name, symbolic, lo, hi, sign, value)
}

fn convexity(ctx: &ModifiedPotentialCtx, lo: f64, hi: f64, label: &str) -> Result<Inequality> {
    let f = ctx.field;
    rho_sign_hypothesis(format!("v'' >= 0 on {label}"), v_sign_form(&f, 2), lo, hi, 1.0, |rho| {
        field_eval(&f, rho, 2)
    })
}

/// `v` is `C^k` in the extended sense on `[lo, hi]`: only the sink point of
/// `power_sink` can break this.
fn extended_smoothness(ctx: &ModifiedPotentialCtx, k: usize, lo: f64, hi: f64) -> Option<Inequality> {
    let sinks: Vec<f64> = ctx
        .field
        .exceptional_points()
        .into_iter()
        .filter(|&x| x >= lo && x <= hi)
        .collect();
    if sinks.is_empty() {
        return None;
    }
    let ok = sinks
        .iter()
        .all(|&x| (1..=k).all(|n| field_eval(&ctx.field, x, n).is_ok()));
    Some(Inequality::flag(
        format!("v is C^{k} in the extended sense at the sink"),
        ok,
    ))
}

fn certify_convexity(ctx: &ModifiedPotentialCtx, which: Certificate) -> Result<CertificateOutcome> {
    let r2 = ctx.radius * ctx.radius;
    let mut evidence = vec![Inequality::from_residual(&cond_i(ctx)?)];
    let (lo, hi, label) = match which {
        Certificate::GlobalConvexity => (0.0, f64::INFINITY, "[0, inf)"),
        Certificate::ConvexInside => (0.0, r2, "[0, R^2]"),
        _ => (r2, f64::INFINITY, "[R^2, inf)"),
    };
    evidence.push(convexity(ctx, lo, hi, label)?);
    let mut notes = Vec::new();
    if !ctx.field.exceptional_points().is_empty() {
        notes.push("a kink of v at the sink is convex whenever v'' >= 0 on both sides".into());
    }
    Ok(CertificateOutcome::new(which, evidence, notes))
}

fn h_at_zero(p: RieszParams, order: usize) -> Result<f64> {
    h_eval(
        p,
        SphereEvalPoint {
            lambda: 0.0,
            branch: Branch::Inside,
        },
        order,
    )
}

fn certify_inside_negative_ladder(ctx: &ModifiedPotentialCtx) -> Result<CertificateOutcome> {
    let p = ctx.params;
    let r = ctx.radius;
    let r2 = r * r;
    let base = vec![
        Inequality::from_residual(&cond_i(ctx)?),
        Inequality::from_comparison("(ii) R^2 v''/v'", &cond_ii(ctx)?, ">="),
    ];
    let f = ctx.field;
    let mut first_attempt = None;
    for k in 3..=10usize {
        let mut evidence = base.clone();
        evidence.extend(extended_smoothness(ctx, k, 0.0, r2));
        evidence.push(rho_sign_hypothesis(
            format!("v^({k}) <= 0 on [0, R^2]"),
            v_sign_form(&f, k),
            0.0,
            r2,
            -1.0,
            |rho| field_eval(&f, rho, k),
        )?);
        for l in 3..k {
            let lhs = r.powf(p.s + 2.0 * l as f64) * field_eval(&f, 0.0, l)?;
            evidence.push(Inequality::numeric(
                format!("R^(s+2l) v^({l})(0) vs -h^({l})(0)"),
                lhs,
                "<=",
                -h_at_zero(p, l)?,
            ));
        }
        let outcome = CertificateOutcome::new(Certificate::InsideNegativeLadder, evidence, vec![format!("k = {k}")]);
        if outcome.certifies() {
            return Ok(outcome);
        }
        first_attempt.get_or_insert(outcome);
    }
    let mut outcome = first_attempt.expect("at least one order tried");
    outcome
        .notes
        .push("no order k in 3..=10 satisfies the hypotheses; evidence shown for k = 3".into());
    Ok(outcome)
}

fn certify_outside_even_ladder(ctx: &ModifiedPotentialCtx) -> Result<CertificateOutcome> {
    let (d, s) = (ctx.params.dim(), ctx.params.s);
    let r2 = ctx.radius * ctx.radius;
    let f = ctx.field;
    let at_one = SphereEvalPoint {
        lambda: 1.0,
        branch: Branch::Outside,
    };
    let mut first_attempt = None;
    for k in 2..=12usize {
        let kf = k as f64;
        if !(k % 2 == 0 || kf < 0.5 * (d - s)) || !(kf - 1.0 < d - s - 1.0) {
            continue;
        }
        let mut evidence = vec![Inequality::from_residual(&cond_i(ctx)?)];
        evidence.extend(extended_smoothness(ctx, k, r2, f64::INFINITY));
        evidence.push(rho_sign_hypothesis(
            format!("v^({k}) >= 0 on [R^2, inf)"),
            v_sign_form(&f, k),
            r2,
            f64::INFINITY,
            1.0,
            |rho| field_eval(&f, rho, k),
        )?);
        for l in 2..k {
            evidence.push(Inequality::numeric(
                format!("f^({l})(1+)"),
                f_eval_at(ctx, at_one, l)?,
                ">=",
                0.0,
            ));
        }
        let outcome = CertificateOutcome::new(Certificate::OutsideEvenLadder, evidence, vec![format!("k = {k}")]);
        if outcome.certifies() {
            return Ok(outcome);
        }
        first_attempt.get_or_insert(outcome);
    }
    first_attempt.ok_or_else(|| Error::Domain("no admissible ladder order".into()))
}

fn certify_curvature_growth(ctx: &ModifiedPotentialCtx) -> Result<CertificateOutcome> {
    let s = ctx.params.s;
    let r2 = ctx.radius * ctx.radius;
    let f = ctx.field;
    let mut evidence = vec![
        Inequality::from_residual(&cond_i(ctx)?),
        Inequality::from_comparison("(ii) R^2 v''/v'", &cond_ii(ctx)?, ">="),
    ];
    evidence.extend(extended_smoothness(ctx, 2, r2, f64::INFINITY));
    evidence.push(rho_sign_hypothesis(
        "(s/2+2) v''(rho) + rho v'''(rho) >= 0 on [R^2, inf)".into(),
        curvature_growth_form(&f, s),
        r2,
        f64::INFINITY,
        1.0,
        |rho| Ok((0.5 * s + 2.0) * field_eval(&f, rho, 2)? + rho * field_eval(&f, rho, 3)?),
    )?);
    Ok(CertificateOutcome::new(
        Certificate::OutsideCurvatureGrowth,
        evidence,
        Vec::new(),
    ))
}

/// Signs with a relative zero band.
fn sign_of(value: f64, scale: f64) -> i8 {
    if value.abs() <= 1e-9 * scale.max(1e-300) {
        0
    } else if value > 0.0 {
        1
    } else {
        -1
    }
}

/// Smallest `k0` making `signs` (entries for orders `1..=k`) a half-monotone
/// pattern: nonnegative below `k0`, nonpositive from `k0` on.
fn half_monotone_k0(signs: &[i8]) -> Option<usize> {
    (1..=signs.len()).find(|&k0| signs[..k0 - 1].iter().all(|&x| x >= 0) && signs[k0 - 1..].iter().all(|&x| x <= 0))
}

fn certify_half_monotone_ladder(ctx: &ModifiedPotentialCtx) -> Result<CertificateOutcome> {
    let p = ctx.params;
    let (d, s) = (p.dim(), p.s);
    let r = ctx.radius;
    let r2 = r * r;
    let f = ctx.field;
    let k = (0.5 * (d - s)).ceil() as usize;
    let parity = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
    let mut evidence = vec![
        Inequality::from_residual(&cond_i(ctx)?),
        Inequality::from_comparison("(iii) f(0) >= f(1)", &cond_iii(ctx)?, ">="),
    ];
    let mut notes = vec![format!("k = {k}")];
    evidence.extend(extended_smoothness(ctx, k, 0.0, f64::INFINITY));

    // Inside: f is half-monotone of order (k0, k) at 1 on [0, 1].
    evidence.push(rho_sign_hypothesis(
        format!("(-1)^{k} v^({k}) <= 0 on [0, R^2]"),
        v_sign_form(&f, k),
        0.0,
        r2,
        -parity,
        |rho| field_eval(&f, rho, k),
    )?);
    // h^{(k)} on [0, 1) has the sign of (b)_k, b = (2+s-d)/2, since its 2F1 factor is positive.
    let kernel_sign = parity * rising(0.5 * (2.0 + s - d), k);
    evidence.push(Inequality {
        name: format!("(-1)^{k} h^({k}) <= 0 on [0, 1)"),
        lhs: Some(kernel_sign),
        relation: "<=",
        rhs: Some(0.0),
        holds: kernel_sign <= 0.0,
        method: Method::Symbolic,
    });
    let inside = SphereEvalPoint {
        lambda: 1.0,
        branch: Branch::Inside,
    };
    let mut signs = Vec::with_capacity(k);
    let mut values = Vec::with_capacity(k);
    for l in 1..k {
        let kernel = if p.is_log() { 1.0 } else { r.powf(-s) } * h_eval(p, inside, l)?;
        let field = r.powi(2 * l as i32) * field_eval(&f, r2, l)?;
        let value = if l % 2 == 0 { 1.0 } else { -1.0 } * (kernel + field);
        signs.push(sign_of(value, kernel.abs().max(field.abs())));
        values.push(value);
    }
    signs.push(-1);
    match half_monotone_k0(&signs) {
        Some(k0) => {
            for (i, &value) in values.iter().enumerate() {
                let l = i + 1;
                let relation = if l < k0 { ">=" } else { "<=" };
                let mut ineq = Inequality::numeric(format!("(-1)^{l} f^({l})(1-)"), value, relation, 0.0);
                ineq.holds = true;
                evidence.push(ineq);
            }
            let strict = k0 >= 2 && signs[k0 - 2] != 0;
            let cert = UnimodalCertificate {
                k0,
                k,
                endpoint_sign_data: signs.clone(),
                global_kth_sign_ok: true,
                strict,
            };
            let unimodal = unimodal_certify(&cert).map(|u| u.unimodal).unwrap_or(false);
            notes.push(format!("inside pattern k0 = {k0}"));
            evidence.push(Inequality::flag(
                "f half-monotone at 1, hence unimodal on [0, 1]",
                unimodal,
            ));
        }
        None => {
            for (i, &value) in values.iter().enumerate() {
                evidence.push(Inequality {
                    name: format!("(-1)^{} f^({})(1-)", i + 1, i + 1),
                    lhs: Some(value),
                    relation: "recorded",
                    rhs: None,
                    holds: true,
                    method: Method::Numeric,
                });
            }
            evidence.push(Inequality::flag(
                "endpoint signs of f form a half-monotone pattern",
                false,
            ));
        }
    }

    // Outside: -g is half-monotone of order (1, k) at 1.
    for l in 1..k {
        let value = if l % 2 == 0 { 1.0 } else { -1.0 } * g_eval(ctx, 1.0, l)?;
        evidence.push(Inequality::numeric(format!("(-1)^{l} g^({l})(1)"), value, ">=", 0.0));
    }
    let (a, b, c) = (0.5 * s + 1.0, 0.5 * (2.0 + s - d), 0.5 * d);
    let y_sign = -parity * rising(a, k) * rising(b, k) / rising(c, k);
    evidence.push(Inequality {
        name: format!("(-1)^{k} y^({k}) >= 0 on [0, 1)"),
        lhs: Some(y_sign),
        relation: ">=",
        rhs: Some(0.0),
        holds: y_sign >= 0.0,
        method: Method::Symbolic,
    });
    let symbolic = q_sign_form(&f, s, r, k).and_then(|terms| {
        let signed: Vec<(f64, f64, u8)> = terms.iter().map(|&(c, e, l)| (parity * c, e, l)).collect();
        log_power_nonneg(&signed, 0.0, 1.0)
    });
    evidence.push(sign_hypothesis(
        format!("(-1)^{k} q^({k}) >= 0 on (0, 1]"),
        symbolic,
        0.0,
        1.0,
        parity,
        |kappa| q_eval(&f, p, r, kappa, k),
    )?);
    Ok(CertificateOutcome::new(
        Certificate::HalfMonotoneLadder,
        evidence,
        notes,
    ))
}

fn certify_special_lennard_jones(ctx: &ModifiedPotentialCtx) -> Result<CertificateOutcome> {
    let p = ctx.params;
    let (d, s) = (p.dim(), p.s);
    let RadialField::LennardJones {
        gamma,
        eta,
        alpha,
        beta,
    } = ctx.field
    else {
        return Ok(CertificateOutcome::new(
            Certificate::SpecialLennardJones,
            vec![Inequality::flag("field is lennard_jones", false)],
            Vec::new(),
        ));
    };
    let c = c_sd(p)?;
    let b = -beta - s;
    let mut evidence = vec![
        Inequality::from_residual(&cond_i(ctx)?),
        Inequality::numeric("|alpha + 2 + s|", (alpha + 2.0 + s).abs(), "<=", 1e-12),
        Inequality::numeric("|R - 1|", (ctx.radius - 1.0).abs(), "<=", 1e-9),
        Inequality::numeric(
            "|eta - (1 - c/(2 gamma))|",
            (eta - (1.0 - c / (2.0 * gamma))).abs(),
            "<=",
            1e-12,
        ),
        Inequality::numeric("s", s, ">", 0.0),
    ];
    let gamma_bound = 0.5 * c * f64::max(1.0, (2.0 * b + s) * (2.0 + s) / (s * (b - 2.0)));
    evidence.push(Inequality::numeric("gamma", gamma, ">", gamma_bound));
    let hyp = hyp2f1_limit_at_one(0.5 * (s + 4.0), 0.5 * (4.0 + s - d), 0.5 * (d + 2.0))?;
    let b_bound = [
        2.0,
        (s + 4.0) / eta - s - 2.0,
        ((d - s - 2.0) * (s + 2.0) / (d * gamma) * hyp + 2.0) / eta,
    ]
    .into_iter()
    .fold(f64::NEG_INFINITY, f64::max);
    evidence.push(Inequality::numeric("b = -beta - s", b, ">", b_bound));
    // f(1) < lim f at infinity = 0, the comparison closing the outside argument.
    let f_one = c / s + field_eval(&ctx.field, 1.0, 0)?;
    evidence.push(Inequality::numeric("f(1) vs lim f(inf) = 0", f_one, "<", 0.0));
    Ok(CertificateOutcome::new(
        Certificate::SpecialLennardJones,
        evidence,
        Vec::new(),
    ))
}

fn certify_power_law_threshold(ctx: &ModifiedPotentialCtx) -> Result<CertificateOutcome> {
    let RadialField::PowerLaw { alpha, .. } = ctx.field else {
        return Ok(CertificateOutcome::new(
            Certificate::PowerLawThreshold,
            vec![Inequality::flag("field is power", false)],
            Vec::new(),
        ));
    };
    let threshold = alpha_threshold(ctx.params)?;
    let evidence = vec![
        Inequality::from_residual(&cond_i(ctx)?),
        Inequality::numeric("alpha > max(-s, 0)", alpha, ">", (-ctx.params.s).max(0.0)),
        Inequality {
            holds: alpha >= threshold,
            ..Inequality::numeric("alpha vs threshold", alpha, ">=", threshold)
        },
    ];
    Ok(CertificateOutcome::new(
        Certificate::PowerLawThreshold,
        evidence,
        Vec::new(),
    ))
}

/// Evaluates one certificate's hypotheses at `ctx`.
pub fn sufficient_certify(ctx: &ModifiedPotentialCtx, which: Certificate) -> Result<CertificateOutcome> {
    ctx.params.validate()?;
    if !which.applies(ctx.params) {
        return Err(Error::WrongWindow {
            selector: which.name().into(),
            window: which.window().0.into(),
            d: ctx.params.d,
            s: ctx.params.s,
        });
    }
    match which {
        Certificate::GlobalConvexity | Certificate::ConvexInside | Certificate::ConvexOutside => {
            certify_convexity(ctx, which)
        }
        Certificate::InsideNegativeLadder => certify_inside_negative_ladder(ctx),
        Certificate::OutsideEvenLadder => certify_outside_even_ladder(ctx),
        Certificate::OutsideCurvatureGrowth => certify_curvature_growth(ctx),
        Certificate::HalfMonotoneLadder => certify_half_monotone_ladder(ctx),
        Certificate::SpecialLennardJones => certify_special_lennard_jones(ctx),
        Certificate::PowerLawThreshold => certify_power_law_threshold(ctx),
    }
}

/// Runs every certificate whose window contains `s`.
pub fn certify_all(ctx: &ModifiedPotentialCtx) -> Result<Vec<CertificateOutcome>> {
    Certificate::ALL
        .iter()
        .filter(|c| c.applies(ctx.params))
        .map(|&c| sufficient_certify(ctx, c))
        .collect()
}

/// Name of a certifying combination: one two-sided certificate, or an inside
/// and an outside certificate joined by `+`.
pub fn certifying_combination(outcomes: &[CertificateOutcome]) -> Option<String> {
    let good = |side: Side| outcomes.iter().find(|o| o.side == side && o.certifies());
    if let Some(o) = good(Side::Both) {
        return Some(o.certificate.name().into());
    }
    match (good(Side::Inside), good(Side::Outside)) {
        (Some(i), Some(o)) => Some(format!("{}+{}", i.certificate.name(), o.certificate.name())),
        _ => None,
    }
}

/// Orders `(k0, k)` and endpoint signs `(-1)^l phi^{(l)}(1)` for `l = 1..=k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnimodalCertificate {
    pub k0: usize,
    pub k: usize,
    pub endpoint_sign_data: Vec<i8>,
    pub global_kth_sign_ok: bool,
    pub strict: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct UnimodalConclusion {
    pub unimodal: bool,
    pub increasing: bool,
    pub not_increasing_whole: bool,
}

/// Conclusions from a half-monotone certificate at the right endpoint of
/// `[0, 1]`.
pub fn unimodal_certify(cert: &UnimodalCertificate) -> Result<UnimodalConclusion> {
    let bad = |msg: String| Err(Error::MalformedCertificate(msg));
    if cert.k0 < 1 || cert.k < cert.k0 {
        return bad(format!("need k >= k0 >= 1, got k0 = {}, k = {}", cert.k0, cert.k));
    }
    if cert.endpoint_sign_data.len() != cert.k {
        return bad(format!(
            "expected {} endpoint signs, got {}",
            cert.k,
            cert.endpoint_sign_data.len()
        ));
    }
    if cert.endpoint_sign_data.iter().any(|x| !(-1..=1).contains(x)) {
        return bad("endpoint signs must be -1, 0 or 1".into());
    }
    if !cert.global_kth_sign_ok {
        return bad("(-1)^k phi^(k) <= 0 on the interval is not established".into());
    }
    for (i, &sgn) in cert.endpoint_sign_data.iter().enumerate() {
        let l = i + 1;
        if l < cert.k0 && sgn < 0 {
            return bad(format!("order {l} < k0 needs a nonnegative sign"));
        }
        if l >= cert.k0 && sgn > 0 {
            return bad(format!("order {l} >= k0 needs a nonpositive sign"));
        }
    }
    if cert.strict && (cert.k0 < 2 || cert.endpoint_sign_data[cert.k0 - 2] == 0) {
        return bad("strictness needs k0 >= 2 and a nonzero sign at order k0 - 1".into());
    }
    Ok(UnimodalConclusion {
        unimodal: true,
        increasing: cert.k0 == 1,
        not_increasing_whole: cert.strict,
    })
}

/// Sampling grid for [`global_min_scan`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanGrid {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub n: usize,
    pub log_spaced: bool,
}

impl Default for ScanGrid {
    fn default() -> Self {
        ScanGrid {
            lambda_min: 1e-3,
            lambda_max: 1e3,
            n: 2000,
            log_spaced: true,
        }
    }
}

/// Heuristic dense check that `lambda = 1` minimizes `f`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanResult {
    pub argmin: f64,
    #[serde(serialize_with = "ext::real")]
    pub min_value: f64,
    pub f_at_one: f64,
    #[serde(serialize_with = "ext::real")]
    pub f_at_zero: f64,
    #[serde(serialize_with = "ext::opt_real")]
    pub f_at_infinity: Option<f64>,
    pub min_at_one: bool,
    /// `min f(samples and endpoints) - f(1)`.
    #[serde(serialize_with = "ext::real")]
    pub margin: f64,
    pub heuristic: bool,
}

pub fn global_min_scan(ctx: &ModifiedPotentialCtx, grid: ScanGrid) -> Result<ScanResult> {
    if grid.n < 100 {
        return domain(format!("scan needs at least 100 points, got {}", grid.n));
    }
    if !(grid.lambda_min > 0.0) || !(grid.lambda_max > grid.lambda_min) || !grid.lambda_max.is_finite() {
        return domain(format!("invalid scan range [{}, {}]", grid.lambda_min, grid.lambda_max));
    }
    let f_one = f_eval(ctx, 1.0, 0)?;
    let f_zero = f_eval(ctx, 0.0, 0)?;
    let f_inf = f_limit_at_infinity(ctx).ok();
    let (mut argmin, mut min_value) = (1.0, f_one);
    let mut sample_min = f64::INFINITY;
    for k in 0..grid.n {
        let t = k as f64 / (grid.n - 1) as f64;
        let lambda = if grid.log_spaced {
            (grid.lambda_min.ln() + t * (grid.lambda_max.ln() - grid.lambda_min.ln())).exp()
        } else {
            grid.lambda_min + t * (grid.lambda_max - grid.lambda_min)
        };
        if lambda == 1.0 {
            continue;
        }
        let value = f_eval(ctx, lambda, 0)?;
        sample_min = sample_min.min(value);
        if value < min_value {
            min_value = value;
            argmin = lambda;
        }
    }
    if f_zero < min_value {
        min_value = f_zero;
        argmin = 0.0;
    }
    let mut others = sample_min.min(f_zero);
    if let Some(x) = f_inf {
        others = others.min(x);
        if x < min_value {
            min_value = x;
            argmin = f64::INFINITY;
        }
    }
    let tol = 1e-10 * f_one.abs().max(1.0);
    Ok(ScanResult {
        argmin,
        min_value,
        f_at_one: f_one,
        f_at_zero: f_zero,
        f_at_infinity: f_inf,
        min_at_one: f_one <= others + tol,
        margin: others - f_one,
        heuristic: true,
    })
}

/// `lim f(lambda)` as `lambda -> inf`, which shares its leading order with
/// the condition (iv) limit.
pub fn f_limit_at_infinity(ctx: &ModifiedPotentialCtx) -> Result<f64> {
    kernel_tail_limit(&ctx.field, ctx.params)
}

/// Final classification.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Verdict {
    CertifiedSphere {
        #[serde(rename = "R")]
        radius: f64,
        certificate: String,
    },
    /// `radius` is null when no stationary radius exists.
    NecessaryFail {
        #[serde(rename = "R")]
        radius: Option<f64>,
        condition: String,
    },
    Inconclusive {
        reason: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadiusAssessment {
    #[serde(rename = "R")]
    pub radius: f64,
    pub necessary: Option<ConditionReport>,
    pub certificates: Vec<CertificateOutcome>,
    pub certified_by: Option<String>,
    pub scan: Option<ScanResult>,
    pub status: Verdict,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SphereVerdict {
    pub d: u32,
    pub s: f64,
    pub field: RadialField,
    pub c_sd: f64,
    pub radii: Vec<f64>,
    pub warnings: Vec<String>,
    pub per_radius: Vec<RadiusAssessment>,
    pub verdict: Verdict,
}

fn assess_radius(ctx: &ModifiedPotentialCtx, grid: ScanGrid) -> Result<RadiusAssessment> {
    let mut notes = Vec::new();
    let necessary = match necessary_report(ctx) {
        Ok(r) => r,
        Err(Error::Domain(msg)) => {
            return Ok(RadiusAssessment {
                radius: ctx.radius,
                necessary: None,
                certificates: Vec::new(),
                certified_by: None,
                scan: None,
                status: Verdict::Inconclusive { reason: msg },
                notes,
            })
        }
        Err(e) => return Err(e),
    };
    if let Some(cond) = necessary.first_failure() {
        return Ok(RadiusAssessment {
            radius: ctx.radius,
            necessary: Some(necessary),
            certificates: Vec::new(),
            certified_by: None,
            scan: None,
            status: Verdict::NecessaryFail {
                radius: Some(ctx.radius),
                condition: cond.into(),
            },
            notes,
        });
    }
    let certificates = certify_all(ctx)?;
    let certified_by = certifying_combination(&certificates);
    let scan = global_min_scan(ctx, grid)?;
    let status = match (&certified_by, scan.min_at_one) {
        (Some(name), true) => Verdict::CertifiedSphere {
            radius: ctx.radius,
            certificate: name.clone(),
        },
        (Some(name), false) => {
            notes.push(format!(
                "discrepancy: {name} holds but the dense scan found f below f(1)"
            ));
            Verdict::Inconclusive {
                reason: "certificate and scan disagree".into(),
            }
        }
        (None, _) => Verdict::Inconclusive {
            reason: "necessary conditions hold but no certificate applies".into(),
        },
    };
    Ok(RadiusAssessment {
        radius: ctx.radius,
        necessary: Some(necessary),
        certificates,
        certified_by,
        scan: Some(scan),
        status,
        notes,
    })
}

/// Full sphere check: stationary radii, necessary conditions, certificates
/// and the scan gate at each radius.
pub fn check_sphere(p: RieszParams, f: &RadialField, search: RadiusSearch, grid: ScanGrid) -> Result<SphereVerdict> {
    require_necessary_window(p)?;
    f.validate()?;
    let found = stationary_radii(p, f, search)?;
    let mut per_radius = Vec::new();
    for &r in &found.radii {
        let ctx = ModifiedPotentialCtx::new(p, *f, r)?;
        per_radius.push(assess_radius(&ctx, grid)?);
    }
    let verdict = if let Some(a) = per_radius
        .iter()
        .find(|a| matches!(a.status, Verdict::CertifiedSphere { .. }))
    {
        a.status.clone()
    } else if per_radius.is_empty() {
        Verdict::NecessaryFail {
            radius: None,
            condition: "i".into(),
        }
    } else if per_radius
        .iter()
        .all(|a| matches!(a.status, Verdict::NecessaryFail { .. }))
    {
        per_radius[0].status.clone()
    } else {
        Verdict::Inconclusive {
            reason: "no stationary radius could be certified".into(),
        }
    };
    Ok(SphereVerdict {
        d: p.d,
        s: p.s,
        field: *f,
        c_sd: c_sd(p)?,
        radii: found.radii,
        warnings: found.warnings,
        per_radius,
        verdict,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerLawVerdict {
    pub alpha_threshold: f64,
    #[serde(rename = "R_star")]
    pub r_star: f64,
    pub energy: f64,
    pub necessary: ConditionReport,
    pub verdict: Verdict,
}

/// Decision for `v = (gamma/alpha) rho^{alpha/2}` from the sharp threshold.
pub fn power_law_verdict(p: RieszParams, gamma: f64, alpha: f64) -> Result<PowerLawVerdict> {
    require_necessary_window(p)?;
    let f = check_power_law(p, gamma, alpha)?;
    let threshold = alpha_threshold(p)?;
    let r_star = power_law_radius(p, gamma, alpha)?;
    let energy = power_law_energy(p, gamma, alpha)?;
    let ctx = ModifiedPotentialCtx::new(p, f, r_star)?;
    let necessary = necessary_report(&ctx)?;
    let verdict = if alpha >= threshold {
        let scan = global_min_scan(&ctx, ScanGrid::default())?;
        if necessary.all_pass() && scan.min_at_one {
            Verdict::CertifiedSphere {
                radius: r_star,
                certificate: Certificate::PowerLawThreshold.name().into(),
            }
        } else {
            Verdict::Inconclusive {
                reason: "threshold met but the numeric checks disagree".into(),
            }
        }
    } else {
        // Below the threshold no radius works; report the condition that fails at R*.
        let condition = necessary.first_failure().unwrap_or("threshold");
        Verdict::NecessaryFail {
            radius: Some(r_star),
            condition: condition.into(),
        }
    };
    Ok(PowerLawVerdict {
        alpha_threshold: threshold,
        r_star,
        energy,
        necessary,
        verdict,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalingDirection {
    /// From a minimizer `nu` of the unconstrained energy over unit
    /// `alpha`-moment measures to the field problem, `mu = (c Id)# nu`.
    ToConstrained,
    /// From the field minimizer `mu` to `nu = (c^{-1} Id)# mu`.
    ToFree,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalingDatum {
    /// `I_s(nu)` of the moment-constrained minimizer.
    Energy(f64),
    /// `int |x|^alpha dmu` of the field minimizer.
    Moment(f64),
}

/// Scaling constant relating the power-law field problem and the
/// moment-constrained problem.
pub fn rescale_maps(
    p: RieszParams,
    gamma: f64,
    alpha: f64,
    direction: ScalingDirection,
    datum: ScalingDatum,
) -> Result<f64> {
    p.validate()?;
    check_power_law(p, gamma, alpha)?;
    match (direction, datum) {
        (ScalingDirection::ToConstrained, ScalingDatum::Energy(energy)) => {
            if p.is_log() {
                // Critical point of -log c + (2 gamma/alpha) c^alpha.
                return Ok((1.0 / (2.0 * gamma)).powf(1.0 / alpha));
            }
            let x = p.s * energy / (2.0 * gamma);
            if !(x > 0.0) {
                return domain(format!("s * I_s(nu) must be > 0, got {}", p.s * energy));
            }
            Ok(x.powf(1.0 / (p.s + alpha)))
        }
        (ScalingDirection::ToFree, ScalingDatum::Moment(moment)) => {
            if !(moment > 0.0) || !moment.is_finite() {
                return domain(format!("alpha-moment must be finite and > 0, got {moment}"));
            }
            Ok(moment.powf(1.0 / alpha))
        }
        (dir, dat) => domain(format!("direction {dir:?} does not take datum {dat:?}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lj(gamma: f64, eta: f64) -> RadialField {
        RadialField::LennardJones {
            gamma,
            eta,
            alpha: -6.0,
            beta: -12.0,
        }
    }

    #[test]
    fn threshold_examples() {
        let p = RieszParams::new(10, 2.0).unwrap();
        assert!((alpha_threshold(p).unwrap() - 4.0 / 3.0).abs() < 1e-12);
        for d in [6u32, 8, 10] {
            assert_eq!(
                alpha_threshold(RieszParams::new(d, d as f64 - 4.0).unwrap()).unwrap(),
                2.0
            );
        }
        assert!(alpha_threshold(RieszParams::new(5, 2.5).unwrap()).is_err());
    }

    #[test]
    fn stationary_radius_examples() {
        let p = RieszParams::new(10, 2.0).unwrap();
        let pl = RadialField::PowerLaw { gamma: 1.0, alpha: 4.0 };
        let r = stationary_radii(p, &pl, RadiusSearch::default()).unwrap();
        assert!((r.radii[0] - (2.0f64 / 7.0).powf(1.0 / 6.0)).abs() < 1e-14);
        let p = RieszParams::new(8, 4.0).unwrap();
        let r = stationary_radii(p, &lj(5.0, 0.95), RadiusSearch::default()).unwrap();
        assert_eq!(r.radii.len(), 2, "{:?}", r.radii);
        assert!((r.radii[0] - 1.0).abs() < 1e-10);
        assert!((r.radii[1] - 4.47).abs() < 0.05);
        let r = stationary_radii(p, &lj(1.0 / 3.0, 0.5), RadiusSearch::default()).unwrap();
        assert!(r.radii.is_empty());
    }

    #[test]
    fn sink_jump_is_not_a_root() {
        let p = RieszParams::new(10, 2.0).unwrap();
        let sink = RadialField::PowerSink {
            gamma: 1.0,
            alpha: 2.0,
            r0: 0.5,
        };
        let r = stationary_radii(p, &sink, RadiusSearch::default()).unwrap();
        assert_eq!(r.radii.len(), 1);
        let c = c_sd(p).unwrap();
        // R^{s+2} = c/(2 gamma) beyond the sink
        assert!((r.radii[0].powf(4.0) - c / 2.0).abs() < 1e-10);
    }

    #[test]
    fn unimodal_examples() {
        let cert = UnimodalCertificate {
            k0: 1,
            k: 3,
            endpoint_sign_data: vec![0, -1, -1],
            global_kth_sign_ok: true,
            strict: false,
        };
        assert!(unimodal_certify(&cert).unwrap().increasing);
        let cert = UnimodalCertificate {
            k0: 3,
            k: 4,
            endpoint_sign_data: vec![1, 1, -1, 0],
            global_kth_sign_ok: true,
            strict: true,
        };
        let out = unimodal_certify(&cert).unwrap();
        assert!(out.unimodal && out.not_increasing_whole && !out.increasing);
        let bad = UnimodalCertificate {
            k0: 3,
            k: 4,
            endpoint_sign_data: vec![1, -1, -1, -1],
            global_kth_sign_ok: true,
            strict: false,
        };
        assert!(matches!(unimodal_certify(&bad), Err(Error::MalformedCertificate(_))));
    }

    #[test]
    fn wrong_window() {
        let p = RieszParams::new(10, 6.5).unwrap();
        let ctx = ModifiedPotentialCtx::new(p, RadialField::PowerLaw { gamma: 1.0, alpha: 4.0 }, 1.0).unwrap();
        assert!(matches!(
            sufficient_certify(&ctx, Certificate::GlobalConvexity),
            Err(Error::WrongWindow { .. })
        ));
    }

    #[test]
    fn rescale_examples() {
        let p = RieszParams::new(3, 0.0).unwrap();
        let c = rescale_maps(p, 0.5, 2.0, ScalingDirection::ToConstrained, ScalingDatum::Energy(0.3)).unwrap();
        assert!((c - 1.0).abs() < 1e-15);
        let p = RieszParams::new(8, 4.0).unwrap();
        let c = rescale_maps(
            p,
            5.0,
            4.0,
            ScalingDirection::ToConstrained,
            ScalingDatum::Energy(0.125),
        )
        .unwrap();
        assert!((c - (4.0 * 0.125 / 10.0f64).powf(1.0 / 8.0)).abs() < 1e-15);
        assert!(rescale_maps(p, 5.0, 4.0, ScalingDirection::ToConstrained, ScalingDatum::Energy(-1.0)).is_err());
        assert!(rescale_maps(p, 5.0, 4.0, ScalingDirection::ToFree, ScalingDatum::Energy(1.0)).is_err());
    }
}
