use std::sync::Mutex;

use proptest::prelude::*;
use schurlsd_core::ensemble::{
    child_seed, realize, realize_trial, scale, schur_product, InputDistribution, MatrixRealization, ProductSpec,
    ProductTables, StreamRole,
};
use schurlsd_core::spectral::{eigenvalues, mc_moments, moment_from_spectrum, moment_from_trace, symmetric_eigen, Esd};
use schurlsd_core::{Executor, LinkFunction, LinkTable, Sequential};

/// Executor running jobs on scoped threads in a scrambled order.
struct Scrambled(usize);

impl Executor for Scrambled {
    fn map_collect<T, F>(&self, len: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        let slots: Vec<Mutex<Option<T>>> = (0..len).map(|_| Mutex::new(None)).collect();
        std::thread::scope(|s| {
            for t in 0..self.0 {
                let (f, slots) = (&f, &slots);
                s.spawn(move || {
                    for i in (0..len).rev().filter(|i| i % self.0 == t) {
                        *slots[i].lock().unwrap() = Some(f(i));
                    }
                });
            }
        });
        slots.into_iter().map(|m| m.into_inner().unwrap().unwrap()).collect()
    }
}

fn gaussian_product(n: usize, seed: u64) -> MatrixRealization {
    let x = realize(&LinkFunction::Toeplitz, InputDistribution::StandardGaussian, n, seed).unwrap();
    let y = realize(&LinkFunction::Hankel, InputDistribution::StandardGaussian, n, seed ^ 1).unwrap();
    scale(schur_product(&x, &y).unwrap()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn spectrum_and_trace_moments_agree(n in 2usize..=50, seed in any::<u64>()) {
        let z = gaussian_product(n, seed);
        let s = eigenvalues(&z).unwrap();
        for h in 1..=6 {
            let a = moment_from_spectrum(&s, h).unwrap();
            let b = moment_from_trace(&z, h).unwrap();
            let scale = b.abs().max(moment_from_trace(&z, 2 * (h / 2).max(1)).unwrap());
            prop_assert!((a - b).abs() <= 1e-8 * scale.max(1e-12), "h={} {} vs {}", h, a, b);
        }
    }

    #[test]
    fn eigenvector_reconstruction(n in 1usize..=30, seed in any::<u64>()) {
        let z = gaussian_product(n, seed);
        let e = symmetric_eigen(z.entries(), n, true).unwrap();
        let q = e.vectors.as_ref().unwrap();
        let fro: f64 = z.entries().iter().map(|x| x * x).sum::<f64>().sqrt();
        let mut res = 0.0;
        for i in 0..n {
            for j in 0..n {
                let rec: f64 = (0..n).map(|k| q[i * n + k] * e.values[k] * q[j * n + k]).sum();
                res += (rec - z.get(i, j)).powi(2);
            }
        }
        prop_assert!(res.sqrt() <= 1e-10 * n as f64 * fro.max(1e-300));
        let trace: f64 = (0..n).map(|i| z.get(i, i)).sum();
        let sum: f64 = e.values.iter().sum();
        prop_assert!((sum - trace).abs() <= 1e-8 * n as f64 * fro.max(1.0));
    }

    #[test]
    fn esd_is_a_distribution(points in prop::collection::vec(-5.0f64..5.0, 1..40), probes in prop::collection::vec(-6.0f64..6.0, 1..20)) {
        let esd = Esd::new(points).unwrap();
        prop_assert_eq!(esd.cdf(f64::NEG_INFINITY), 0.0);
        prop_assert_eq!(esd.cdf(f64::INFINITY), 1.0);
        let mut sorted = probes.clone();
        sorted.sort_by(f64::total_cmp);
        for w in sorted.windows(2) {
            prop_assert!(esd.cdf(w[0]) <= esd.cdf(w[1]));
        }
    }
}

#[test]
fn identity_and_swap_spectra() {
    let s = eigenvalues(&MatrixRealization::from_entries(2, vec![0.0, 1.0, 1.0, 0.0], true).unwrap()).unwrap();
    assert!((s.eigenvalues()[0] + 1.0).abs() < 1e-15 && (s.eigenvalues()[1] - 1.0).abs() < 1e-15);
    let s = eigenvalues(
        &MatrixRealization::from_entries(3, vec![-1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 2.0], true).unwrap(),
    )
    .unwrap();
    assert_eq!(s.eigenvalues(), &[-1.0, 0.0, 2.0]);
    let bad = MatrixRealization::from_entries(1, vec![f64::INFINITY], true).unwrap();
    assert!(eigenvalues(&bad).is_err());
}

#[test]
fn input_laws_have_unit_variance() {
    use rand::SeedableRng;
    for dist in InputDistribution::ALL {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        let n = 1_000_000;
        let (mut s, mut ss) = (0.0, 0.0);
        for _ in 0..n {
            let x = dist.sample(&mut rng);
            s += x;
            ss += x * x;
        }
        let mean = s / n as f64;
        let var = ss / n as f64 - mean * mean;
        assert!(mean.abs() < 5e-3, "{dist}: mean {mean}");
        assert!((var - 1.0).abs() < 1e-2, "{dist}: var {var}");
    }
}

#[test]
fn realizations_are_link_faithful() {
    for link in LinkFunction::BUILTINS {
        for n in [1usize, 2, 7, 16] {
            let table = LinkTable::build(&link, n).unwrap();
            let m = realize(&link, InputDistribution::StandardGaussian, n, 5).unwrap();
            for a in 0..n * n {
                for b in 0..n * n {
                    let same_link = table.ids()[a] == table.ids()[b];
                    let same_entry = m.entries()[a].to_bits() == m.entries()[b].to_bits();
                    assert_eq!(same_link, same_entry, "{link} n={n}");
                }
            }
        }
    }
}

#[test]
fn censoring_keeps_magnitudes() {
    let w = realize(&LinkFunction::Wigner, InputDistribution::Rademacher, 12, 3).unwrap();
    let t = realize(&LinkFunction::Toeplitz, InputDistribution::StandardGaussian, 12, 4).unwrap();
    let z = schur_product(&w, &t).unwrap();
    let swapped = schur_product(&t, &w).unwrap();
    assert_eq!(z.entries(), swapped.entries());
    for (a, b) in z.entries().iter().zip(t.entries()) {
        assert_eq!(a.abs(), b.abs());
    }
    let ones = MatrixRealization::from_entries(12, vec![1.0; 144], false).unwrap();
    assert_eq!(schur_product(&t, &ones).unwrap().entries(), t.entries());
    let scaled = scale(z.clone()).unwrap();
    for (s, (x, y)) in scaled.entries().iter().zip(w.entries().iter().zip(t.entries())) {
        assert_eq!(*s, x * y * (1.0 / 12f64.sqrt()));
    }
}

#[test]
fn seed_streams_are_independent() {
    let mut spec =
        ProductSpec::new(LinkFunction::Toeplitz, LinkFunction::Hankel, InputDistribution::StandardGaussian, 9, 77, 3);
    let tables = ProductTables::build(&spec).unwrap();
    let (x0, y0) = spec.seeds(1);
    assert_eq!(x0, child_seed(77, StreamRole::X, 1));
    assert_ne!(x0, y0);
    let before = realize_trial(&spec, &tables, 1).unwrap();
    spec.link_y = LinkFunction::ReverseCirculant;
    let tables2 = ProductTables::build(&spec).unwrap();
    let after = realize_trial(&spec, &tables2, 1).unwrap();
    assert_eq!(before.provenance()[0], after.provenance()[0]);
    assert_ne!(before.entries(), after.entries());
}

#[test]
fn shared_stream_diagnostic_squares_toeplitz_entries() {
    let mut spec =
        ProductSpec::new(LinkFunction::Toeplitz, LinkFunction::Toeplitz, InputDistribution::StandardGaussian, 40, 8, 4);
    spec.shared_stream = true;
    let tables = ProductTables::build(&spec).unwrap();
    let z = realize_trial(&spec, &tables, 0).unwrap();
    assert!(z.entries().iter().all(|&x| x >= 0.0));
    let est = mc_moments(&spec, 2, &Sequential).unwrap();
    assert!(est[1].mean > 0.0);
}

#[test]
fn monte_carlo_is_thread_count_invariant() {
    let spec =
        ProductSpec::new(LinkFunction::Toeplitz, LinkFunction::Hankel, InputDistribution::Rademacher, 60, 2024, 7);
    let a = mc_moments(&spec, 8, &Sequential).unwrap();
    let b = mc_moments(&spec, 8, &Scrambled(3)).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.mean.to_bits(), y.mean.to_bits());
        assert_eq!(x.variance.to_bits(), y.variance.to_bits());
        assert_eq!(x.stderr, (x.variance / x.trials as f64).sqrt());
    }
    for e in a.iter().filter(|e| e.h % 2 == 0) {
        assert!(e.mean >= -e.stderr);
    }
    let one = ProductSpec { trials: 1, ..spec };
    assert!(mc_moments(&one, 4, &Sequential).is_err());
}
