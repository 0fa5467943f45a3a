//! Reference quantities for the limiting laws: semicircle moments, moments
//! assembled from word limits, the sub-Gaussian moment bound, a Carleman
//! diagnostic and the semicircle CDF.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::error::{arg_err, Result};
use crate::spectral::symmetric_eigen;
use crate::words::{enumerate_pair_matched, Word};

/// Largest moment order handled with exact integer arithmetic.
pub const MAX_EXACT_ORDER: usize = 30;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MomentSource {
    Semicircle,
    AssembledFromP,
    Empirical,
}

/// `β_1, ..., β_{h_max}`; `exact[h - 1]` holds the integer value when known.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentSequence {
    pub values: Vec<f64>,
    pub exact: Vec<Option<u128>>,
    pub source: MomentSource,
}

impl MomentSequence {
    pub fn new(values: Vec<f64>, source: MomentSource) -> Self {
        let exact = alloc::vec![None; values.len()];
        MomentSequence { values, exact, source }
    }

    /// `β_h`, 1-based.
    pub fn get(&self, h: usize) -> Option<f64> {
        h.checked_sub(1).and_then(|i| self.values.get(i)).copied()
    }

    /// Positive semidefiniteness of the Hankel matrix `[β_{i+j}]` (with
    /// `β_0 = 1`) over the orders available, up to a relative tolerance.
    pub fn hankel_psd(&self) -> bool {
        let m = self.values.len() / 2 + 1;
        let beta = |k: usize| if k == 0 { 1.0 } else { self.values[k - 1] };
        let mut a = alloc::vec![0.0; m * m];
        for i in 0..m {
            for j in 0..m {
                a[i * m + j] = beta(i + j);
            }
        }
        let scale = a.iter().fold(0.0f64, |s, x| s.max(libm::fabs(*x)));
        match symmetric_eigen(&a, m, false) {
            Ok(e) => e.values[0] >= -1e-9 * scale.max(1.0),
            Err(_) => false,
        }
    }
}

/// Catalan number `C_k`.
pub fn catalan(k: usize) -> u128 {
    // C_{j+1} = C_j * 2(2j+1) / (j+2), exact at every step.
    let mut c: u128 = 1;
    for j in 0..k as u128 {
        c = c * 2 * (2 * j + 1) / (j + 2);
    }
    c
}

/// Number of pair-matched words of length `2k`: `(2k)! / (2^k k!)`.
pub fn pair_matched_count(k: usize) -> u128 {
    (1..=k as u128).map(|j| 2 * j - 1).product()
}

/// Semicircle moments: zero for odd orders, `C_k` for order `2k`.
pub fn semicircle_moments(h_max: usize) -> Result<MomentSequence> {
    if h_max > MAX_EXACT_ORDER {
        return Err(arg_err!("semicircle moments supported up to order {MAX_EXACT_ORDER}, got {h_max}"));
    }
    let exact: Vec<Option<u128>> = (1..=h_max).map(|h| Some(if h % 2 == 1 { 0 } else { catalan(h / 2) })).collect();
    let values = exact.iter().map(|e| e.unwrap() as f64).collect();
    Ok(MomentSequence { values, exact, source: MomentSource::Semicircle })
}

/// `β_{2k} = Σ_{w ∈ W_{2k}} p(w)`.
pub fn assemble_moments(table: &BTreeMap<Word, f64>, h: usize) -> Result<f64> {
    let mut total = 0.0;
    for w in enumerate_pair_matched(h)? {
        total += *table.get(&w).ok_or_else(|| arg_err!("p-table has no entry for `{w}`"))?;
    }
    Ok(total)
}

/// `β_{2k} = Σ_{(w,w')} p_Z(w, w')`. With `diagonal_only`, missing
/// off-diagonal entries are taken as zero, which is valid once the links are
/// known to be compatible.
pub fn assemble_joint_moments(table: &BTreeMap<(Word, Word), f64>, h: usize, diagonal_only: bool) -> Result<f64> {
    let words = enumerate_pair_matched(h)?;
    let mut total = 0.0;
    for w in &words {
        for w2 in &words {
            let key = (w.clone(), w2.clone());
            match table.get(&key) {
                Some(p) => total += p,
                None if diagonal_only && w != w2 => {}
                None => return Err(arg_err!("p-table has no entry for `({w}, {w2})`")),
            }
        }
    }
    Ok(total)
}

/// `(2k)! / (2^k k!) · Δ^k`.
pub fn moment_bound(h: usize, delta: usize) -> Result<u128> {
    if h == 0 || h % 2 == 1 || h > MAX_EXACT_ORDER {
        return Err(arg_err!("moment bound needs an even order in 2..={MAX_EXACT_ORDER}, got {h}"));
    }
    if delta == 0 {
        return Err(arg_err!("delta must be positive"));
    }
    let k = h / 2;
    let pow = (delta as u128).checked_pow(k as u32).ok_or_else(|| arg_err!("delta^k overflows"))?;
    pair_matched_count(k).checked_mul(pow).ok_or_else(|| arg_err!("moment bound overflows"))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CarlemanTrend {
    /// Terms decay slower than `1/k`.
    Diverging,
    /// Terms decay like `1/k` or faster; divergence is doubtful.
    Suspect,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CarlemanReport {
    pub partial_sums: Vec<f64>,
    pub partial_sum: f64,
    /// `k_max · β_{2k_max}^{-1/(2k_max)}`, a lower bound whenever the terms are nonincreasing.
    pub term_count_bound: f64,
    /// Fitted exponent `a` in `term_k ~ k^{-a}` over the upper half of the terms.
    pub decay_exponent: f64,
    pub trend: CarlemanTrend,
}

/// Partial sums of `Σ β_{2k}^{-1/(2k)}` for `k = 1..=k_max`.
pub fn carleman_diagnostic(seq: &MomentSequence, k_max: usize) -> Result<CarlemanReport> {
    if k_max == 0 {
        return Err(arg_err!("k_max must be positive"));
    }
    let mut terms = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        let b = seq.get(2 * k).ok_or_else(|| arg_err!("sequence has no moment of order {}", 2 * k))?;
        if b.is_nan() || b <= 0.0 {
            return Err(arg_err!("even moment of order {} is {b}, must be positive", 2 * k));
        }
        terms.push(libm::pow(b, -1.0 / (2 * k) as f64));
    }
    let mut partial_sums = Vec::with_capacity(k_max);
    let mut acc = 0.0;
    for t in &terms {
        acc += t;
        partial_sums.push(acc);
    }
    let lo = k_max / 2;
    let decay_exponent = if k_max - lo >= 2 {
        let pts: Vec<(f64, f64)> = (lo..k_max).map(|i| (libm::log((i + 1) as f64), libm::log(terms[i]))).collect();
        let m = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        -sxy / sxx
    } else {
        0.0
    };
    let trend = if decay_exponent < 0.75 { CarlemanTrend::Diverging } else { CarlemanTrend::Suspect };
    Ok(CarlemanReport {
        partial_sum: acc,
        term_count_bound: k_max as f64 * terms[k_max - 1],
        partial_sums,
        decay_exponent,
        trend,
    })
}

/// CDF of the standard semicircle law on `[-2, 2]`.
pub fn semicircle_cdf(x: f64) -> f64 {
    if x <= -2.0 {
        0.0
    } else if x >= 2.0 {
        1.0
    } else {
        let v = 0.5
            + x * libm::sqrt(4.0 - x * x) / (4.0 * core::f64::consts::PI)
            + libm::asin(0.5 * x) / core::f64::consts::PI;
        v.clamp(0.0, 1.0)
    }
}

/// Semicircle density `(1/2π) √(4 - x²)`.
pub fn semicircle_density(x: f64) -> f64 {
    if libm::fabs(x) >= 2.0 {
        0.0
    } else {
        libm::sqrt(4.0 - x * x) / (2.0 * core::f64::consts::PI)
    }
}
