mod common;

use common::KAPPA;
use evidencer::eval::welch_t_test;
use evidencer::labeling::cohen_kappa;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn kappa_fixtures() {
    for &(a, b, num, den) in KAPPA {
        let want = num as f64 / den as f64;
        let got = cohen_kappa(&common::labels(a), &common::labels(b)).unwrap();
        assert!((got - want).abs() <= 1e-12, "{a} vs {b}: {got} != {want}");
        let back = cohen_kappa(&common::labels(b), &common::labels(a)).unwrap();
        assert!((back - want).abs() <= 1e-12, "{b} vs {a}");
    }
}

#[test]
fn kappa_rejects_bad_input() {
    assert!(cohen_kappa(&[], &[]).is_err());
    assert!(cohen_kappa(&common::labels("10"), &common::labels("1")).is_err());
}

/// `(a, b, t, df, p)`: t and df from scipy's Welch test, p recomputed as
/// `I_{df/(df+t²)}(df/2, 1/2)` with mpmath at 50 digits.
#[allow(clippy::type_complexity)]
const WELCH: &[(&[f64], &[f64], f64, f64, f64)] = &[
    (&[0.95, 0.9, 1.0, 0.85, 0.9], &[0.7, 0.8, 0.75, 0.6, 0.8, 0.65], 4.84523897181618, 8.797653702204032, 0.000975789388653336),
    (&[1.0, 2.0, 3.0, 4.0, 5.0], &[2.0, 4.0, 6.0, 8.0, 10.0], -1.8973665961010275, 5.882352941176471, 0.10753119493062725),
    (&[0.5, 0.52, 0.49, 0.51], &[0.1, 0.9, 0.3, 0.7, 0.5], 0.03531856802591591, 4.016660783213059, 0.9735112757574934),
    (
        &[10.1, 9.8, 10.3, 10.0, 9.9, 10.2, 10.1],
        &[10.0, 10.4, 9.7, 10.3],
        -0.2507265345163896,
        4.0401359339895135,
        0.8142611578129817,
    ),
    (&[1.0, 1.1], &[0.2, 0.25, 0.3], 13.85640646055101, 1.684210526315788, 0.009833369277039311),
    (
        &[3.2, 3.3, 2.9, 3.1, 3.6, 3.0, 3.4, 3.3],
        &[3.1, 3.2, 3.0, 3.3, 2.9, 3.1, 3.2, 3.0],
        1.3572417850765874,
        11.247106996617415,
        0.20131569676687472,
    ),
];

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

#[test]
fn welch_matches_reference_values() {
    for (i, &(a, b, t, df, p)) in WELCH.iter().enumerate() {
        let r = welch_t_test(a, b).unwrap();
        assert!(rel(r.t, t) < 1e-12, "fixture {i}: t {} vs {t}", r.t);
        assert!(rel(r.df, df) < 1e-12, "fixture {i}: df {} vs {df}", r.df);
        assert!(rel(r.p, p) < 1e-10, "fixture {i}: p {} vs {p}", r.p);
    }
}

// Independent regularized incomplete beta: Lanczos log-gamma plus the
// modified Lentz continued fraction.

fn ln_gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const C: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        return (std::f64::consts::PI / (std::f64::consts::PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut s = C[0];
    for (i, c) in C.iter().enumerate().skip(1) {
        s += c / (x + i as f64);
    }
    let t = x + G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + s.ln()
}

fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    let tiny = 1e-300;
    let mut c = 1.0;
    let mut d = 1.0 - (a + b) * x / (a + 1.0);
    if d.abs() < tiny {
        d = tiny;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..10_000 {
        let m = m as f64;
        let m2 = 2.0 * m;
        for aa in [m * (b - m) * x / ((a + m2 - 1.0) * (a + m2)), -(a + m) * (a + b + m) * x / ((a + m2) * (a + m2 + 1.0))] {
            d = 1.0 + aa * d;
            if d.abs() < tiny {
                d = tiny;
            }
            c = 1.0 + aa / c;
            if c.abs() < tiny {
                c = tiny;
            }
            d = 1.0 / d;
            h *= d * c;
        }
        if (d * c - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h
}

fn inc_beta(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let front = (ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln()).exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_cf(a, b, x) / a
    } else {
        1.0 - front * beta_cf(b, a, 1.0 - x) / b
    }
}

#[test]
fn oracle_reproduces_reference_values() {
    for &(_, _, t, df, p) in WELCH {
        assert!(rel(inc_beta(df / 2.0, 0.5, df / (df + t * t)), p) < 1e-10);
    }
}

#[test]
fn welch_p_matches_independent_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for i in 0..100 {
        let na = rng.random_range(2..30);
        let nb = rng.random_range(2..30);
        let shift: f64 = rng.random_range(-1.0..1.0);
        let a: Vec<f64> = (0..na).map(|_| rng.random_range(0.0..1.0)).collect();
        let b: Vec<f64> = (0..nb).map(|_| rng.random_range(0.0..2.0) + shift).collect();
        let r = welch_t_test(&a, &b).unwrap();
        let want = inc_beta(r.df / 2.0, 0.5, r.df / (r.df + r.t * r.t));
        assert!((r.p - want).abs() < 1e-9, "pair {i}: {} vs {want}", r.p);
        assert!((0.0..=1.0).contains(&r.p));
    }
}

#[test]
fn welch_rejects_degenerate_samples() {
    assert!(welch_t_test(&[1.0], &[1.0, 2.0]).is_err());
    assert!(welch_t_test(&[1.0, 1.0], &[1.0, 1.0]).is_err());
    assert!(welch_t_test(&[1.0, f64::NAN], &[1.0, 2.0]).is_err());
}
