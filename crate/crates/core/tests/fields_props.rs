use proptest::prelude::*;
use riesz_eq::fields::*;
use riesz_eq::sphere_kernel::RieszParams;

fn variants() -> Vec<RadialField> {
    vec![
        RadialField::PowerLaw { gamma: 1.3, alpha: 3.0 },
        RadialField::LennardJones {
            gamma: 5.0,
            eta: 0.95,
            alpha: -6.0,
            beta: -12.0,
        },
        RadialField::LennardJones {
            gamma: 1.0,
            eta: 1.0,
            alpha: 3.0,
            beta: 2.0,
        },
        RadialField::Exponential {
            gamma: 1.0,
            alpha: 0.7,
            beta: 1.5,
        },
        RadialField::PowerLog { gamma: 0.8, alpha: 3.0 },
        RadialField::PowerSink {
            gamma: 1.0,
            alpha: 3.0,
            r0: 0.6,
        },
    ]
}

#[test]
fn finite_difference_consistency() {
    for f in variants() {
        for &rho in &[0.5, 1.0, 2.0, 10.0] {
            for order in 0..2 {
                let h = 1e-5 * rho;
                let g = |x: f64| field_eval(&f, x, order).unwrap();
                let fd = (8.0 * (g(rho + h) - g(rho - h)) - (g(rho + 2.0 * h) - g(rho - 2.0 * h))) / (12.0 * h);
                let exact = field_eval(&f, rho, order + 1).unwrap();
                assert!(
                    (fd - exact).abs() <= 1e-6 * exact.abs().max(1.0),
                    "{} rho={rho} order={order}: {fd} vs {exact}",
                    f.name()
                );
            }
        }
    }
}

#[test]
fn lennard_jones_inflection_and_minimum() {
    let (gamma, eta, alpha, beta) = (5.0, 0.95, -6.0, -12.0);
    let f = RadialField::LennardJones {
        gamma,
        eta,
        alpha,
        beta,
    };
    let inflection = (eta * (2.0 - beta) / (2.0 - alpha)).powf(2.0 / (alpha - beta));
    let grid: Vec<f64> = (0..4000).map(|k| (-3.0 + 6.0 * k as f64 / 3999.0f64).exp()).collect();
    let signs: Vec<bool> = grid.iter().map(|&r| field_eval(&f, r, 2).unwrap() > 0.0).collect();
    let flips: Vec<usize> = (1..signs.len()).filter(|&i| signs[i] != signs[i - 1]).collect();
    assert_eq!(flips.len(), 1);
    let i = flips[0];
    assert!(grid[i - 1] <= inflection && inflection <= grid[i]);

    let rho_star = eta.powf(2.0 / (alpha - beta));
    let v_star = -gamma * ((alpha - beta) / (alpha * beta)) * eta.powf(alpha / (alpha - beta));
    assert!((field_eval(&f, rho_star, 0).unwrap() - v_star).abs() < 1e-12);
    assert!(field_eval(&f, rho_star, 1).unwrap().abs() < 1e-12);
    for &r in &grid {
        assert!(field_eval(&f, r, 0).unwrap() >= v_star - 1e-12);
    }
}

#[test]
fn q_examples() {
    let p = RieszParams::new(10, 2.0).unwrap();
    let (gamma, alpha) = (1.0f64, 4.0f64);
    let c = 4.0 / 7.0;
    let r_star = (c / (2.0 * gamma)).powf(1.0 / (alpha + 2.0));
    let f = RadialField::PowerLaw { gamma, alpha };
    for &kappa in &[0.05, 0.3, 0.9] {
        let q = q_eval(&f, p, r_star, kappa, 0).unwrap();
        let closed = 0.5 * c * kappa.powf(-0.5 * (2.0 + alpha));
        assert!((q - closed).abs() < 1e-12 * closed);
    }
    assert_eq!(q_eval(&f, p, r_star, 0.0, 0).unwrap(), f64::INFINITY);
}

#[test]
fn confinement_examples() {
    let p = |d, s| RieszParams::new(d, s).unwrap();
    let pl4 = RadialField::PowerLaw { gamma: 1.0, alpha: 4.0 };
    assert!(matches!(
        confinement_check(&pl4, p(10, 2.0)),
        Confinement::Satisfied { clause: 'a', .. }
    ));
    let lj = RadialField::LennardJones {
        gamma: 5.0,
        eta: 0.95,
        alpha: -6.0,
        beta: -12.0,
    };
    assert!(matches!(
        confinement_check(&lj, p(8, 4.0)),
        Confinement::NotGuaranteed { .. }
    ));
    let pl2 = RadialField::PowerLaw { gamma: 1.0, alpha: 2.0 };
    assert!(matches!(
        confinement_check(&pl2, p(3, 0.0)),
        Confinement::Satisfied { clause: 'b', .. }
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn q_closed_form_matches_composition(which in 0usize..6, kappa in 0.05f64..0.99, r in 0.5f64..2.0, order in 0usize..5) {
        let f = variants()[which];
        let p = RieszParams::new(7, 1.5).unwrap();
        let a = q_eval(&f, p, r, kappa, order).unwrap();
        let b = q_eval_composed(&f, p, r, kappa, order).unwrap();
        prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0), "{}: {} vs {}", f.name(), a, b);
    }

    #[test]
    fn power_law_derivatives_scale(alpha in 0.5f64..6.0, rho in 0.1f64..20.0, order in 0usize..4) {
        // rho v^{(n+1)} = (alpha/2 - n) v^{(n)} for a pure power
        let f = RadialField::PowerLaw { gamma: 1.0, alpha };
        let lhs = rho * field_eval(&f, rho, order + 1).unwrap();
        let rhs = (0.5 * alpha - order as f64) * field_eval(&f, rho, order).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0));
    }
}
