use proptest::prelude::*;
use proptest::strategy::ValueTree;
use riesz_eq::specfun::*;
use std::f64::consts::{LN_2, PI};

fn f21(a: f64, b: f64, c: f64, z: f64) -> f64 {
    hyp2f1(Hyp2F1Args::new(a, b, c, z), &SpecFunConfig::default()).unwrap()
}

/// Gauss sum from statrs' gamma, independent of the crate's log-gamma.
fn gauss_sum_statrs(a: f64, b: f64, c: f64) -> f64 {
    use statrs::function::gamma::gamma;
    gamma(c) * gamma(c - a - b) / (gamma(c - a) * gamma(c - b))
}

/// Sum of the series at z = 1 with Richardson extrapolation of the partial
/// sums S_N = S + A N^{-e} + B N^{-e-1}.
fn series_at_one_extrapolated(a: f64, b: f64, c: f64) -> f64 {
    let e = c - a - b;
    let n0 = 200_000usize;
    let mut partial = Vec::new();
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut next_mark = n0;
    for n in 0..4 * n0 {
        let nf = n as f64;
        term *= (a + nf) * (b + nf) / ((c + nf) * (nf + 1.0));
        sum += term;
        if n + 1 == next_mark {
            partial.push(sum);
            next_mark *= 2;
        }
    }
    let ns = [n0 as f64, 2.0 * n0 as f64, 4.0 * n0 as f64];
    // Solve the 3x3 system for (S, A, B) by Cramer's rule.
    let m: Vec<[f64; 3]> = ns.iter().map(|&n| [1.0, n.powf(-e), n.powf(-e - 1.0)]).collect();
    let det = |m: &[[f64; 3]]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d0 = det(&m);
    let mut mx = m.clone();
    for i in 0..3 {
        mx[i][0] = partial[i];
    }
    det(&mx) / d0
}

#[test]
fn ln_gamma_examples_and_statrs() {
    assert!(ln_gamma(1.0).unwrap().abs() < 1e-14);
    assert!((ln_gamma(0.5).unwrap() - 0.572_364_942_924_700_1).abs() < 1e-14);
    assert!((ln_gamma(5.0).unwrap() - 3.178_053_830_347_945_6).abs() < 1e-13);
    for &x in &[0.01, 0.3, 1.7, 4.2, 11.0, 37.5, 300.0] {
        let ours = ln_gamma(x).unwrap();
        let theirs = statrs::function::gamma::ln_gamma(x);
        assert!((ours - theirs).abs() < 1e-12 * theirs.abs().max(1.0), "x={x}");
    }
}

#[test]
fn legendre_duplication() {
    for &z in &[0.5, 1.0, 2.5, 7.0] {
        let lhs = 0.5 * PI.ln() + ln_gamma(2.0 * z).unwrap();
        let rhs = (2.0 * z - 1.0) * LN_2 + ln_gamma(z).unwrap() + ln_gamma(z + 0.5).unwrap();
        assert!((lhs - rhs).abs() < 1e-12, "z={z}");
    }
}

#[test]
fn digamma_examples_and_identities() {
    // Euler-Mascheroni from the defining limit H_n - log n, accelerated.
    let n = 1_000_000usize;
    let h: f64 = (1..=n).map(|k| 1.0 / k as f64).sum();
    let nf = n as f64;
    let gamma_oracle = h - nf.ln() - 0.5 / nf + 1.0 / (12.0 * nf * nf);
    assert!((digamma(1.0).unwrap() + gamma_oracle).abs() < 1e-12);
    assert!((digamma(2.0).unwrap() - digamma(1.0).unwrap() - 1.0).abs() < 1e-14);
    assert!((digamma(0.5).unwrap() - (digamma(1.0).unwrap() - 2.0 * LN_2)).abs() < 1e-14);
    for &x in &[0.1, 0.77, 3.3, 15.0, 120.0] {
        let rec = digamma(x + 1.0).unwrap() - digamma(x).unwrap() - 1.0 / x;
        assert!(rec.abs() < 1e-12 * (1.0 / x).max(1.0), "x={x}");
        let dup = digamma(2.0 * x).unwrap() - 0.5 * (digamma(x).unwrap() + digamma(x + 0.5).unwrap()) - LN_2;
        assert!(dup.abs() < 1e-12, "x={x}");
        let theirs = statrs::function::gamma::digamma(x);
        assert!((digamma(x).unwrap() - theirs).abs() < 1e-12 * theirs.abs().max(1.0));
    }
}

#[test]
fn hyp2f1_examples() {
    assert_eq!(f21(0.4, -1.3, 2.2, 0.0), 1.0);
    assert!((f21(1.0, 1.0, 2.0, 0.5) - 2.0 * LN_2).abs() < 1e-12);
    assert!((f21(2.0, -1.0, 4.0, 1.0) - 0.5).abs() < 1e-15);
}

#[test]
fn log_kernel_examples() {
    let cfg = SpecFunConfig::default();
    assert_eq!(hyp3f2_log_kernel(4, 0.0, &cfg).unwrap(), 1.0);
    // z = 1 closed form against a slowly convergent truncated series with
    // the tail n^{-2} behaviour removed by Richardson.
    let v = hyp3f2_log_kernel(2, 1.0, &cfg).unwrap();
    assert!((v - 4.0 * LN_2).abs() < 1e-13);
    let series = |n_terms: usize| {
        let (mut term, mut sum) = (1.0, 1.0);
        for n in 0..n_terms {
            let nf = n as f64;
            term *= (nf + 1.0) * (1.5 + nf) / ((nf + 2.0) * (2.0 + nf));
            sum += term;
        }
        sum
    };
    let (s1, s2) = (series(100_000), series(200_000));
    // partial sums approach the limit like S - A / sqrt(N)
    let extrapolated = (2f64.sqrt() * s2 - s1) / (2f64.sqrt() - 1.0);
    assert!((extrapolated - v).abs() < 1e-5, "{extrapolated} vs {v}");

    // d = 4, z = 1/2 against the Euler log-integral with t = sin^2(phi):
    // -Gamma(4)/(z Gamma(5/2) Gamma(3/2)) int_0^1 sqrt(t(1-t)) log(1 - z t) dt.
    let z = 0.5;
    let m = 4000;
    let h = (PI / 2.0) / m as f64;
    let integrand = |phi: f64| {
        let (sp, cp) = (phi.sin(), phi.cos());
        let t = sp * sp;
        2.0 * sp * sp * cp * cp * (1.0 - z * t).ln()
    };
    let mut simpson = integrand(0.0) + integrand(PI / 2.0);
    for k in 1..m {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        simpson += w * integrand(k as f64 * h);
    }
    simpson *= h / 3.0;
    let pref = -6.0 / (z * (0.75 * PI.sqrt()) * (0.5 * PI.sqrt()));
    let v = hyp3f2_log_kernel(4, z, &cfg).unwrap();
    assert!((v - pref * simpson).abs() < 1e-10, "{v} vs {}", pref * simpson);
}

#[test]
fn gauss_summation_against_extrapolated_series() {
    let mut runner = proptest::test_runner::TestRunner::deterministic();
    let strat = (-1.5f64..2.5, -1.5f64..2.5, 0.1f64..5.0);
    for _ in 0..12 {
        let (a, b, e) = strat.new_tree(&mut runner).unwrap().current();
        let c = a + b + e;
        if c <= 0.2 {
            continue;
        }
        let exact = f21(a, b, c, 1.0);
        let statrs_value = gauss_sum_statrs(a, b, c);
        assert!((exact - statrs_value).abs() < 1e-10 * exact.abs().max(1.0));
        if e > 0.3 {
            let ext = series_at_one_extrapolated(a, b, c);
            assert!(
                (ext - exact).abs() < 1e-8 * exact.abs().max(1.0),
                "a={a} b={b} c={c}: {ext} vs {exact}"
            );
        }
        // the near-one evaluation is within the expected distance of the limit
        let w = 1e-10;
        let near = f21(a, b, c, 1.0 - w);
        let slack = 10.0 * (w.powf(e.min(1.0)) + w) * (1.0 + exact.abs());
        assert!(
            (near - exact).abs() < slack.max(1e-8),
            "a={a} b={b} c={c}: {near} vs {exact}"
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn derivative_identity(a in -2.0f64..3.0, b in -2.0f64..3.0, c in 0.5f64..5.0) {
        for &z in &[0.1, 0.5, 0.9] {
            // Step large enough that 1e-12 method switches at z = 0.9 stay invisible.
            let h = 1e-4;
            let f = |x: f64| f21(a, b, c, x);
            let fd = (8.0 * (f(z + h) - f(z - h)) - (f(z + 2.0 * h) - f(z - 2.0 * h))) / (12.0 * h);
            let exact = a * b / c * f21(a + 1.0, b + 1.0, c + 1.0, z);
            prop_assert!((fd - exact).abs() <= 1e-6 * exact.abs().max(1e-2),
                "a={} b={} c={} z={}: {} vs {}", a, b, c, z, fd, exact);
        }
    }

    #[test]
    fn quadratic_transformation(a in -1.5f64..2.0, gap in 0.05f64..3.0) {
        let b = a + gap;
        prop_assume!(b > 0.05);
        for &z in &[0.0f64, 0.3, 0.7] {
            let lhs = f21(a, b, 2.0 * b, 4.0 * z / ((1.0 + z) * (1.0 + z)));
            let rhs = (1.0 + z).powf(2.0 * a) * f21(a, a - b + 0.5, b + 0.5, z * z);
            prop_assert!((lhs - rhs).abs() < 1e-10 * lhs.abs().max(1.0),
                "a={} b={} z={}: {} vs {}", a, b, z, lhs, rhs);
        }
    }

    #[test]
    fn positivity(a in -3.0f64..4.0, b in 0.01f64..4.0, extra in 0.01f64..4.0, z in 0.0f64..0.999_999) {
        let c = b + extra;
        prop_assert!(f21(a, b, c, z) > 0.0);
    }

    #[test]
    fn log_kernel_positive_increasing(d in 2u32..12, z in 0.0f64..0.999) {
        let cfg = SpecFunConfig::default();
        let v = hyp3f2_log_kernel(d, z, &cfg).unwrap();
        let v2 = hyp3f2_log_kernel(d, (z + 1e-3).min(1.0), &cfg).unwrap();
        prop_assert!(v >= 1.0 && v2 >= v);
    }
}
