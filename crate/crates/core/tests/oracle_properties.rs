use std::collections::BTreeMap;

use schurlsd_core::oracle::{
    assemble_joint_moments, assemble_moments, moment_bound, semicircle_cdf, semicircle_density, semicircle_moments,
    MomentSequence, MomentSource,
};
use schurlsd_core::words::{enumerate_pair_matched, is_catalan};
use schurlsd_core::Word;

/// Composite Simpson on `x = 2 sin θ`, which removes the endpoint singularity.
fn semicircle_quadrature(h: i32) -> f64 {
    let m = 4000;
    let (a, b) = (-std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_2);
    let step = (b - a) / m as f64;
    let f = |t: f64| {
        let x = 2.0 * t.sin();
        x.powi(h) * semicircle_density(x) * 2.0 * t.cos()
    };
    let mut s = f(a) + f(b);
    for i in 1..m {
        s += f(a + i as f64 * step) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * step / 3.0
}

fn wigner_table(h: usize) -> BTreeMap<Word, f64> {
    enumerate_pair_matched(h)
        .unwrap()
        .into_iter()
        .map(|w| {
            let p = if is_catalan(&w).unwrap() { 1.0 } else { 0.0 };
            (w, p)
        })
        .collect()
}

#[test]
fn quadrature_moments_match_catalan_numbers() {
    let exact = semicircle_moments(8).unwrap();
    for h in 1..=8 {
        assert!((semicircle_quadrature(h as i32) - exact.values[h - 1]).abs() < 1e-6, "h={h}");
    }
    assert!((semicircle_quadrature(0) - 1.0).abs() < 1e-9);
}

#[test]
fn cdf_matches_integrated_density() {
    for &x in &[-1.9, -1.0, -0.3, 0.0, 0.7, 1.5, 1.99] {
        let m = 20000;
        let step = (x + 2.0) / m as f64;
        let integral: f64 = (0..m).map(|i| semicircle_density(-2.0 + (i as f64 + 0.5) * step) * step).sum();
        assert!((integral - semicircle_cdf(x)).abs() < 1e-6, "x={x}");
    }
}

#[test]
fn wigner_tables_assemble_to_catalan_numbers() {
    let semi = semicircle_moments(12).unwrap();
    for h in (2..=12).step_by(2) {
        assert_eq!(assemble_moments(&wigner_table(h), h).unwrap(), semi.values[h - 1]);
    }
}

#[test]
fn assembled_examples() {
    let w = |s: &str| s.parse::<Word>().unwrap();
    let toeplitz: BTreeMap<Word, f64> =
        [(w("aabb"), 1.0), (w("abba"), 1.0), (w("abab"), 2.0 / 3.0)].into_iter().collect();
    assert!((assemble_moments(&toeplitz, 4).unwrap() - 8.0 / 3.0).abs() < 1e-12);

    let sc: BTreeMap<Word, f64> = enumerate_pair_matched(6).unwrap().into_iter().map(|x| (x, 1.0)).collect();
    assert_eq!(assemble_moments(&sc, 6).unwrap(), 15.0);

    let mut partial = toeplitz.clone();
    partial.remove(&w("abab"));
    let err = assemble_moments(&partial, 4).unwrap_err().to_string();
    assert!(err.contains("abab"), "{err}");

    let diag: BTreeMap<(Word, Word), f64> = wigner_table(4).into_iter().map(|(k, v)| ((k.clone(), k), v)).collect();
    assert_eq!(assemble_joint_moments(&diag, 4, true).unwrap(), 2.0);
    assert!(assemble_joint_moments(&diag, 4, false).is_err());
}

#[test]
fn assembled_moments_respect_the_bound() {
    for h in (2..=12).step_by(2) {
        assert!(assemble_moments(&wigner_table(h), h).unwrap() <= moment_bound(h, 1).unwrap() as f64);
    }
}

#[test]
fn hankel_matrix_check_rejects_impossible_moments() {
    let bad = MomentSequence::new(vec![0.0, 1.0, 0.0, 0.5], MomentSource::Empirical);
    assert!(!bad.hankel_psd());
    let gaussian = MomentSequence::new(vec![0.0, 1.0, 0.0, 3.0, 0.0, 15.0, 0.0, 105.0], MomentSource::Empirical);
    assert!(gaussian.hankel_psd());
}
