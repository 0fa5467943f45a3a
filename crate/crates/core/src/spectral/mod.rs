//! Spectra, empirical spectral distributions and Monte Carlo moment estimates.

mod eigen;

use alloc::vec;
use alloc::vec::Vec;

pub use eigen::{symmetric_eigen, SymmetricEigen};

use crate::ensemble::{realize_trial, MatrixRealization, ProductSpec, ProductTables};
use crate::error::{arg_err, Result};
use crate::exec::Executor;

/// Highest moment order estimated by Monte Carlo.
pub const MAX_MC_ORDER: usize = 8;

/// Sorted eigenvalues of one matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    eigenvalues: Vec<f64>,
}

impl Spectrum {
    /// Sorts the given values.
    pub fn new(mut eigenvalues: Vec<f64>) -> Self {
        eigenvalues.sort_by(f64::total_cmp);
        Spectrum { eigenvalues }
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `β_1, ..., β_{h_max}` in one pass.
    pub fn moments(&self, h_max: usize) -> Vec<f64> {
        let mut sums = vec![0.0; h_max];
        for &x in &self.eigenvalues {
            let mut pow = 1.0;
            for s in sums.iter_mut() {
                pow *= x;
                *s += pow;
            }
        }
        let n = self.n() as f64;
        sums.into_iter().map(|s| s / n).collect()
    }
}

/// Eigenvalues of a scaled realization.
pub fn eigenvalues(a: &MatrixRealization) -> Result<Spectrum> {
    if !a.is_scaled() {
        return Err(arg_err!("eigenvalues expects a scaled matrix"));
    }
    let e = symmetric_eigen(a.entries(), a.n(), false)?;
    Ok(Spectrum { eigenvalues: e.values })
}

/// `(1/n) Σ λ_i^h`.
pub fn moment_from_spectrum(s: &Spectrum, h: usize) -> Result<f64> {
    if h == 0 {
        return Err(arg_err!("moment order must be at least 1"));
    }
    Ok(s.moments(h)[h - 1])
}

/// `(1/n) tr(A^h)` by repeated multiplication.
pub fn moment_from_trace(a: &MatrixRealization, h: usize) -> Result<f64> {
    if !a.is_scaled() {
        return Err(arg_err!("moment_from_trace expects a scaled matrix"));
    }
    if h == 0 || h > MAX_MC_ORDER {
        return Err(arg_err!("trace moments support 1 <= h <= {MAX_MC_ORDER}, got {h}"));
    }
    let n = a.n();
    let base = a.entries();
    let mut power = base.to_vec();
    let mut next = vec![0.0; n * n];
    for _ in 1..h {
        next.iter_mut().for_each(|x| *x = 0.0);
        for i in 0..n {
            for k in 0..n {
                let pik = power[i * n + k];
                if pik == 0.0 {
                    continue;
                }
                let row = &base[k * n..(k + 1) * n];
                for (out, &b) in next[i * n..(i + 1) * n].iter_mut().zip(row) {
                    *out += pik * b;
                }
            }
        }
        core::mem::swap(&mut power, &mut next);
    }
    let trace: f64 = (0..n).map(|i| power[i * n + i]).sum();
    Ok(trace / n as f64)
}

/// Empirical spectral distribution: a right-continuous step CDF.
#[derive(Clone, Debug, PartialEq)]
pub struct Esd {
    points: Vec<f64>,
}

impl Esd {
    pub fn new(mut points: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(arg_err!("an ESD needs at least one point"));
        }
        if points.iter().any(|x| !x.is_finite()) {
            return Err(arg_err!("ESD points must be finite"));
        }
        points.sort_by(f64::total_cmp);
        Ok(Esd { points })
    }

    pub fn from_spectrum(s: &Spectrum) -> Result<Self> {
        Esd::new(s.eigenvalues.clone())
    }

    /// Pools several spectra into one ESD.
    pub fn pooled<'a, I: IntoIterator<Item = &'a Spectrum>>(spectra: I) -> Result<Self> {
        Esd::new(spectra.into_iter().flat_map(|s| s.eigenvalues.iter().copied()).collect())
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `F(x) = #{λ_i <= x} / n`.
    pub fn cdf(&self, x: f64) -> f64 {
        self.points.partition_point(|&p| p <= x) as f64 / self.len() as f64
    }
}

fn next_down(x: f64) -> f64 {
    if x.is_nan() || x == f64::NEG_INFINITY {
        return x;
    }
    if x == 0.0 {
        return -f64::from_bits(1);
    }
    let bits = x.to_bits();
    f64::from_bits(if x > 0.0 { bits - 1 } else { bits + 1 })
}

/// `sup_x |F_n(x) - F(x)|`, evaluated at each distinct sample point on both
/// sides of the jump; the left limit of `F` is taken one ulp below the point.
pub fn ks_distance<F: Fn(f64) -> f64>(esd: &Esd, reference: F) -> f64 {
    let n = esd.len() as f64;
    let pts = esd.points();
    let mut worst: f64 = 0.0;
    let mut i = 0;
    while i < pts.len() {
        let x = pts[i];
        let mut j = i;
        while j < pts.len() && pts[j] == x {
            j += 1;
        }
        let below = i as f64 / n;
        let at = j as f64 / n;
        let f_at = reference(x);
        let f_below = reference(next_down(x));
        worst = worst.max(libm::fabs(at - f_at)).max(libm::fabs(below - f_below));
        i = j;
    }
    worst.clamp(0.0, 1.0)
}

/// Density histogram over `[lo, hi]` with equal-width bins; the last bin is
/// closed on the right. Densities integrate to the fraction of mass inside.
pub fn histogram(esd: &Esd, bins: usize, lo: f64, hi: f64) -> Result<Vec<(f64, f64)>> {
    if bins == 0 || lo.is_nan() || hi.is_nan() || lo >= hi {
        return Err(arg_err!("histogram needs bins >= 1 and lo < hi, got {bins} bins on [{lo}, {hi}]"));
    }
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &x in esd.points() {
        if x < lo || x > hi {
            continue;
        }
        let b = (((x - lo) / width) as usize).min(bins - 1);
        counts[b] += 1;
    }
    let norm = esd.len() as f64 * width;
    Ok(counts.into_iter().enumerate().map(|(b, c)| (lo + (b as f64 + 0.5) * width, c as f64 / norm)).collect())
}

/// Across-trial summary of `β_h(n^{-1/2} Z_n)`.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentEstimate {
    pub h: usize,
    pub mean: f64,
    pub variance: f64,
    pub stderr: f64,
    pub trials: usize,
    pub n: usize,
}

/// Summarizes per-trial moment vectors, reducing strictly in trial order.
pub fn aggregate_moments(per_trial: &[Vec<f64>], n: usize) -> Result<Vec<MomentEstimate>> {
    let trials = per_trial.len();
    if trials < 2 {
        return Err(arg_err!("need at least 2 trials, got {trials}"));
    }
    let h_max = per_trial[0].len();
    let t = trials as f64;
    Ok((0..h_max)
        .map(|k| {
            let mut sum = 0.0;
            for m in per_trial {
                sum += m[k];
            }
            let mean = sum / t;
            let mut ss = 0.0;
            for m in per_trial {
                let d = m[k] - mean;
                ss += d * d;
            }
            let variance = ss / (t - 1.0);
            MomentEstimate { h: k + 1, mean, variance, stderr: libm::sqrt(variance / t), trials, n }
        })
        .collect())
}

/// Per-trial results of a product experiment, in trial order.
#[derive(Clone, Debug)]
pub struct TrialOutcome {
    pub moments: Vec<Vec<f64>>,
    pub spectra: Option<Vec<Spectrum>>,
}

/// Runs every trial of `spec` through `exec`; results are indexed by trial.
pub fn run_trials<E: Executor>(spec: &ProductSpec, h_max: usize, keep_spectra: bool, exec: &E) -> Result<TrialOutcome> {
    if h_max == 0 || h_max > MAX_MC_ORDER {
        return Err(arg_err!("h_max must be in 1..={MAX_MC_ORDER}, got {h_max}"));
    }
    if spec.trials == 0 {
        return Err(arg_err!("trials must be positive"));
    }
    let tables = ProductTables::build(spec)?;
    let results: Vec<Result<(Vec<f64>, Option<Spectrum>)>> = exec.map_collect(spec.trials, |trial| {
        let z = realize_trial(spec, &tables, trial)?;
        let s = eigenvalues(&z)?;
        let m = s.moments(h_max);
        Ok((m, keep_spectra.then_some(s)))
    });
    let mut moments = Vec::with_capacity(spec.trials);
    let mut spectra = keep_spectra.then(Vec::new);
    for r in results {
        let (m, s) = r?;
        moments.push(m);
        if let (Some(all), Some(s)) = (spectra.as_mut(), s) {
            all.push(s);
        }
    }
    Ok(TrialOutcome { moments, spectra })
}

/// Monte Carlo estimates of `β_1..β_{h_max}`.
pub fn mc_moments<E: Executor>(spec: &ProductSpec, h_max: usize, exec: &E) -> Result<Vec<MomentEstimate>> {
    if spec.trials < 2 {
        return Err(arg_err!("mc_moments needs trials >= 2, got {}", spec.trials));
    }
    let out = run_trials(spec, h_max, false, exec)?;
    aggregate_moments(&out.moments, spec.n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::scale;

    fn scaled(n: usize, entries: Vec<f64>) -> MatrixRealization {
        let m = MatrixRealization::from_entries(n, entries, true).unwrap();
        assert!(m.is_scaled());
        m
    }

    #[test]
    fn trivial_spectra() {
        let id = scale(MatrixRealization::identity(1)).unwrap();
        assert_eq!(eigenvalues(&id).unwrap().eigenvalues(), &[1.0]);
        let s = eigenvalues(&scaled(3, vec![1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0])).unwrap();
        assert_eq!(s.eigenvalues(), &[1.0, 1.0, 1.0]);
        assert_eq!(moment_from_spectrum(&s, 5).unwrap(), 1.0);
        let s = Spectrum::new(vec![1.0, -1.0]);
        assert_eq!(moment_from_spectrum(&s, 1).unwrap(), 0.0);
        assert_eq!(moment_from_spectrum(&s, 2).unwrap(), 1.0);
        assert!(eigenvalues(&MatrixRealization::identity(2)).is_err());
    }

    #[test]
    fn trace_identities() {
        let m = scaled(2, vec![0.5, -2.0, -2.0, 3.0]);
        assert_eq!(moment_from_trace(&m, 1).unwrap(), 1.75);
        assert_eq!(moment_from_trace(&m, 2).unwrap(), (0.25 + 8.0 + 9.0) / 2.0);
        assert!(moment_from_trace(&m, 9).is_err());
    }

    #[test]
    fn ks_examples() {
        let point_mass = |x: f64| if x >= 0.0 { 1.0 } else { 0.0 };
        assert_eq!(ks_distance(&Esd::new(vec![0.0]).unwrap(), point_mass), 0.0);
        assert_eq!(ks_distance(&Esd::new(vec![-1.0, 1.0]).unwrap(), point_mass), 0.5);
    }

    #[test]
    fn histogram_examples() {
        let h = histogram(&Esd::new(vec![0.0]).unwrap(), 1, -1.0, 1.0).unwrap();
        assert_eq!(h, vec![(0.0, 0.5)]);
        let grid: Vec<f64> = (0..100).map(|i| (i as f64 + 0.5) / 100.0).collect();
        let h = histogram(&Esd::new(grid).unwrap(), 10, 0.0, 1.0).unwrap();
        assert!(h.iter().all(|&(_, d)| (d - 1.0).abs() < 1e-12));
        assert!(histogram(&Esd::new(vec![0.0]).unwrap(), 0, 0.0, 1.0).is_err());
        assert!(histogram(&Esd::new(vec![0.0]).unwrap(), 3, 1.0, 1.0).is_err());
    }

    #[test]
    fn aggregation() {
        let est = aggregate_moments(&[vec![1.0, 2.0], vec![3.0, 2.0]], 5).unwrap();
        assert_eq!(est[0].mean, 2.0);
        assert_eq!(est[0].variance, 2.0);
        assert_eq!(est[0].stderr, 1.0);
        assert_eq!(est[1].variance, 0.0);
        assert!(aggregate_moments(&[vec![1.0]], 5).is_err());
    }
}
