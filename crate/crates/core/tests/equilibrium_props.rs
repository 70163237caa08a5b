use proptest::prelude::*;
use riesz_eq::equilibrium::*;
use riesz_eq::fields::{field_eval, RadialField};
use riesz_eq::sphere_kernel::{c_sd, sphere_energy, RieszParams};

fn pl(gamma: f64, alpha: f64) -> RadialField {
    RadialField::PowerLaw { gamma, alpha }
}

fn lj(gamma: f64, eta: f64) -> RadialField {
    RadialField::LennardJones {
        gamma,
        eta,
        alpha: -6.0,
        beta: -12.0,
    }
}

fn ctx(d: u32, s: f64, f: RadialField, r: f64) -> ModifiedPotentialCtx {
    ModifiedPotentialCtx::new(RieszParams::new(d, s).unwrap(), f, r).unwrap()
}

fn at_star(d: u32, s: f64, gamma: f64, alpha: f64) -> ModifiedPotentialCtx {
    let p = RieszParams::new(d, s).unwrap();
    ctx(d, s, pl(gamma, alpha), power_law_radius(p, gamma, alpha).unwrap())
}

#[test]
fn power_law_necessary_examples() {
    let c = 4.0 / 7.0;
    let rep = necessary_report(&at_star(10, 2.0, 1.0, 4.0)).unwrap();
    assert!(rep.all_pass(), "{rep:?}");
    assert!((rep.cond_iii.lhs + c / 8.0).abs() < 1e-12);
    assert!((rep.cond_iii.rhs + 3.0 / 14.0).abs() < 1e-12);

    let rep = necessary_report(&at_star(10, 2.0, 1.0, 1.3)).unwrap();
    assert_eq!(rep.first_failure(), Some("iii"));
    assert!((rep.cond_iii.lhs + c / 2.6).abs() < 1e-12);
    assert!((rep.cond_iii.lhs + 0.2198).abs() < 1e-4);
    assert!((rep.cond_iii.rhs + 0.2143).abs() < 1e-4);

    // (ii) holds with equality on its boundary exponent
    let (d, s) = (10.0, 2.0);
    let alpha = 2.0 - (s + 2.0) * (d - s - 4.0) / (2.0 * (d - s - 3.0));
    let rep = necessary_report(&at_star(10, 2.0, 1.0, alpha)).unwrap();
    assert!(rep.cond_ii.pass);
    assert!((rep.cond_ii.lhs - rep.cond_ii.rhs).abs() < 1e-12);
}

#[test]
fn f_examples() {
    let c = at_star(10, 2.0, 1.0, 4.0);
    assert!(f_eval(&c, 1.0, 1).unwrap().abs() < 1e-12);
    let c = ctx(8, 4.0, lj(5.0, 0.95), 1.3);
    let v0 = field_eval(&c.field, 0.0, 0).unwrap();
    assert_eq!(f_eval(&c, 0.0, 0).unwrap(), 1.3f64.powf(-4.0) / 4.0 + v0);
    let g = g_eval(&at_star(10, 2.0, 1.0, 4.0), 1.0, 0).unwrap();
    assert!(g.abs() < 1e-12, "{g}");
    assert_eq!(y_eval(RieszParams::new(10, 2.0).unwrap(), 0.0, 0).unwrap(), -1.0);
}

#[test]
fn power_law_verdicts() {
    let p = RieszParams::new(10, 2.0).unwrap();
    let v = power_law_verdict(p, 1.0, 4.0).unwrap();
    assert!(matches!(v.verdict, Verdict::CertifiedSphere { .. }), "{:?}", v.verdict);
    assert!((v.r_star - (2.0f64 / 7.0).powf(1.0 / 6.0)).abs() < 1e-12);
    let v = power_law_verdict(p, 1.0, 1.3).unwrap();
    assert!(matches!(v.verdict, Verdict::NecessaryFail { ref condition, .. } if condition == "iii"));
    assert!(power_law_verdict(p, 1.0, -1.0).is_err());
}

#[test]
fn energy_decomposition_at_power_law_radius() {
    for &(d, s, gamma, alpha) in &[
        (10u32, 2.0, 1.0, 4.0),
        (6, 0.0, 0.7, 3.0),
        (5, -1.0, 2.0, 2.5),
        (8, 4.0, 1.0, 2.0),
    ] {
        let p = RieszParams::new(d, s).unwrap();
        let r = power_law_radius(p, gamma, alpha).unwrap();
        let direct = sphere_total_energy(p, &pl(gamma, alpha), r).unwrap();
        let closed = power_law_energy(p, gamma, alpha).unwrap();
        assert!(
            (direct - closed).abs() < 1e-12 * closed.abs().max(1.0),
            "d={d} s={s}: {direct} vs {closed}"
        );
    }
}

#[test]
fn threshold_is_continuous_at_log_case() {
    for d in 4u32..12 {
        let a0 = alpha_threshold(RieszParams::new(d, 0.0).unwrap()).unwrap();
        let a1 = alpha_threshold(RieszParams::new(d, 1e-3).unwrap()).unwrap();
        assert!((a0 - a1).abs() < 1e-2, "d={d}: {a0} vs {a1}");
    }
}

/// `(-1)^l g^{(l)}(1)` for power laws at R*, from the product formula.
fn g_ladder_closed(d: f64, s: f64, alpha: f64, l: usize) -> f64 {
    let c = c_sd(RieszParams::new(d as u32, s).unwrap()).unwrap();
    let mut kernel = 1.0;
    let mut field = 1.0;
    for j in 0..l {
        let j = j as f64;
        kernel *= (d - s - 2.0 - 2.0 * j) * (s + 2.0 * j + 2.0) / (2.0 * (d - s - 3.0 - j));
        field *= alpha + s + 2.0 * j;
    }
    c / 2f64.powi(l as i32 + 1) * (field - kernel)
}

#[test]
fn power_law_g_ladder_matches_products() {
    for &(d, s, alpha) in &[(10u32, 2.0, 1.35), (10, 2.0, 4.0), (9, 1.0, 3.0), (12, -0.5, 2.2)] {
        let c = at_star(d, s, 1.0, alpha);
        for l in 1..((d as f64 - s - 2.0).ceil() as usize) {
            let numeric = if l % 2 == 0 { 1.0 } else { -1.0 } * g_eval(&c, 1.0, l).unwrap();
            let closed = g_ladder_closed(d as f64, s, alpha, l);
            assert!(
                (numeric - closed).abs() < 1e-9 * closed.abs().max(1.0),
                "d={d} s={s} l={l}: {numeric} vs {closed}"
            );
        }
    }
}

#[test]
fn ladder_certifies_between_threshold_and_two() {
    let c = at_star(10, 2.0, 1.0, 1.35);
    let convex = sufficient_certify(&c, Certificate::GlobalConvexity).unwrap();
    assert!(!convex.holds);
    let ladder = sufficient_certify(&c, Certificate::HalfMonotoneLadder).unwrap();
    assert!(ladder.certifies(), "{ladder:#?}");
    assert!(ladder.evidence.iter().all(|e| e.method != Method::Sampled));
}

#[test]
fn lennard_jones_example() {
    let p = RieszParams::new(8, 4.0).unwrap();
    let c = ctx(8, 4.0, lj(5.0, 0.95), 1.0);
    let rep = necessary_report(&c).unwrap();
    assert!(rep.all_pass(), "{rep:?}");
    let special = sufficient_certify(&c, Certificate::SpecialLennardJones).unwrap();
    assert!(special.certifies(), "{special:#?}");
    assert!(global_min_scan(&c, ScanGrid::default()).unwrap().min_at_one);

    let c = ctx(8, 4.0, lj(1.0, 0.75), 1.0);
    let scan = global_min_scan(&c, ScanGrid::default()).unwrap();
    assert!(!scan.min_at_one);
    assert!(scan.margin < 0.0);
    assert!(!sufficient_certify(&c, Certificate::SpecialLennardJones)
        .unwrap()
        .certifies());

    let v = check_sphere(p, &lj(5.0, 0.95), RadiusSearch::default(), ScanGrid::default()).unwrap();
    assert!(
        matches!(v.verdict, Verdict::CertifiedSphere { radius, .. } if (radius - 1.0).abs() < 1e-10),
        "{:?}",
        v.verdict
    );
    assert_eq!(v.radii.len(), 2);
    let v = check_sphere(p, &lj(1.0 / 3.0, 0.5), RadiusSearch::default(), ScanGrid::default()).unwrap();
    assert_eq!(
        v.verdict,
        Verdict::NecessaryFail {
            radius: None,
            condition: "i".into()
        }
    );
}

#[test]
fn convex_families_certify() {
    let p = RieszParams::new(10, 2.0).unwrap();
    let fields = [
        RadialField::LennardJones {
            gamma: 1.0,
            eta: 1.0,
            alpha: 3.0,
            beta: 2.0,
        },
        RadialField::Exponential {
            gamma: 1.0,
            alpha: 1.0,
            beta: 2.0,
        },
        RadialField::PowerLog { gamma: 1.0, alpha: 2.0 },
        RadialField::PowerSink {
            gamma: 1.0,
            alpha: 2.0,
            r0: 0.5,
        },
    ];
    for f in fields {
        let v = check_sphere(p, &f, RadiusSearch::default(), ScanGrid::default()).unwrap();
        match v.verdict {
            Verdict::CertifiedSphere {
                radius,
                ref certificate,
            } => {
                assert!(certificate.contains("global_convexity"), "{}: {certificate}", f.name());
                assert!(stationarity_residual(p, &f, radius).unwrap().abs() < 1e-10);
            }
            ref other => panic!("{}: {other:?}", f.name()),
        }
    }
}

#[test]
fn check_sphere_rejects_large_s() {
    let p = RieszParams::new(6, 3.0).unwrap();
    assert!(check_sphere(p, &pl(1.0, 2.0), RadiusSearch::default(), ScanGrid::default()).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn bridge_identity(d in 4u32..11, s_frac in 0.05f64..0.95, r in 0.4f64..2.5, which in 0usize..3) {
        let s = -1.9 + s_frac * (d as f64 - 3.0 + 1.9);
        let f = [pl(1.3, 3.0), lj(2.0, 0.6), RadialField::PowerLog { gamma: 1.0, alpha: 3.0 }][which];
        let c = ctx(d, s, f, r);
        for &kappa in &[0.1, 0.5, 0.9] {
            let g = g_eval(&c, kappa, 0).unwrap();
            let bridge = 2.0 * r.powf(s) * kappa.powf(-0.5 * s - 1.0) * f_eval(&c, 1.0 / kappa, 1).unwrap();
            prop_assert!((g - bridge).abs() <= 1e-9 * (1.0 + g.abs()), "kappa={}: {} vs {}", kappa, g, bridge);
        }
    }

    #[test]
    fn stationary_radii_are_critical(eta in 0.2f64..0.97, gamma in 1.0f64..8.0) {
        let p = RieszParams::new(8, 4.0).unwrap();
        let f = lj(gamma, eta);
        let found = stationary_radii(p, &f, RadiusSearch::default()).unwrap();
        for r in found.radii {
            let e = |x: f64| 2.0 * field_eval(&f, x * x, 0).unwrap() + sphere_energy(p, x).unwrap();
            let h = 1e-6 * r;
            let de = (e(r + h) - e(r - h)) / (2.0 * h);
            let scale = (e(r + h).abs() + e(r - h).abs()) / h;
            prop_assert!(de.abs() <= 1e-6 * scale.max(1.0), "R={}: {}", r, de);
        }
    }

    #[test]
    fn certified_verdicts_are_sound(alpha in 1.0f64..6.0, s in -1.5f64..4.9) {
        let p = RieszParams::new(8, s).unwrap();
        prop_assume!(alpha > -s);
        let v = check_sphere(p, &pl(1.0, alpha), RadiusSearch::default(), ScanGrid::default()).unwrap();
        for a in &v.per_radius {
            if let Verdict::CertifiedSphere { .. } = a.status {
                prop_assert!(a.necessary.as_ref().unwrap().all_pass());
                prop_assert!(a.certificates.iter().any(|c| c.certifies()));
                prop_assert!(a.scan.unwrap().min_at_one);
            }
        }
        if matches!(v.verdict, Verdict::CertifiedSphere { .. }) {
            prop_assert!(alpha >= alpha_threshold(p).unwrap() - 1e-12);
        }
    }
}
