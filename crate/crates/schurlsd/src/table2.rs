//! The five rows of Schur-Hadamard products with known limits, their moment
//! targets, and the Monte Carlo and combinatorial checks run against them.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;

use serde::Serialize;

use schurlsd_core::circuits::{
    check_compatible, check_implies_wigner, check_invariance_containment, check_leadsto_wigner, count_pi_star_indexed,
    estimate_p, CircuitClassCount, JointWordReport, LinkIndex, PEstimate, MAX_SWEEP_LENGTH,
};
use schurlsd_core::ensemble::ProductSpec;
use schurlsd_core::linkfn::{compose, profile_product};
use schurlsd_core::oracle::{moment_bound, semicircle_cdf, semicircle_moments};
use schurlsd_core::spectral::{aggregate_moments, ks_distance, run_trials, Esd, MomentEstimate, Spectrum};
use schurlsd_core::words::enumerate_pair_matched;
use schurlsd_core::{Executor, LinkFunction, LinkTable, Transform};

use crate::config::RunConfig;
use crate::{Check, CliError};

use LinkFunction::{
    DoublySymmetricHankel as DH, Hankel as H, ReverseCirculant as RC, SymmetricCirculant as SC, Toeplitz as T,
    Wigner as W,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Limit {
    Semicircle,
    Toeplitz,
    Hankel,
    ReverseCirculant,
}

impl Limit {
    /// The single link whose word limits define this law.
    pub fn link(self) -> LinkFunction {
        match self {
            Limit::Semicircle => W,
            Limit::Toeplitz => T,
            Limit::Hankel => H,
            Limit::ReverseCirculant => RC,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Row {
    pub number: u8,
    pub products: Vec<(LinkFunction, LinkFunction)>,
    pub limit: Limit,
}

pub fn rows() -> Vec<Row> {
    vec![
        Row { number: 1, products: vec![(W, T), (W, H), (W, SC), (W, RC), (W, DH)], limit: Limit::Semicircle },
        Row {
            number: 2,
            products: vec![(T, H), (T, RC), (T, DH), (SC, H), (SC, RC), (SC, DH)],
            limit: Limit::Semicircle,
        },
        Row { number: 3, products: vec![(T, SC)], limit: Limit::Toeplitz },
        Row { number: 4, products: vec![(H, RC), (H, DH)], limit: Limit::Hankel },
        Row { number: 5, products: vec![(RC, DH)], limit: Limit::ReverseCirculant },
    ]
}

/// The row listing `x ⊙ y` in either order.
pub fn row_of(x: &LinkFunction, y: &LinkFunction) -> Option<Row> {
    rows().into_iter().find(|r| r.products.iter().any(|(a, b)| (a == x && b == y) || (a == y && b == x)))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WordLimit {
    pub word: String,
    pub n_ladder: Vec<usize>,
    pub counts: Vec<u64>,
    pub p_estimate: f64,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentTarget {
    pub h: usize,
    pub value: f64,
    /// Exact integer value, as a string, when known.
    pub exact: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LimitTargets {
    pub limit: Limit,
    /// Indexed by `h - 1`; `None` past the orders the oracle covers.
    pub moments: Vec<Option<MomentTarget>>,
    pub word_limits: Vec<WordLimit>,
}

fn class_count(link: &LinkFunction, index: &LinkIndex, w: &schurlsd_core::Word, count: u64) -> CircuitClassCount {
    CircuitClassCount {
        word: w.clone(),
        word2: None,
        link: link.to_string(),
        link2: None,
        n: index.n(),
        count,
        normalizer_exponent: 1 + (w.len() / 2) as u32,
    }
}

/// `p(w)` for every pair-matched word of length `h`, extrapolated over `ladder`.
pub fn word_limit_table<E: Executor>(
    link: &LinkFunction,
    h: usize,
    ladder: &[usize],
    exec: &E,
) -> Result<Vec<(schurlsd_core::Word, Vec<u64>, PEstimate)>, CliError> {
    let indices = ladder.iter().map(|&n| LinkIndex::build(link, n)).collect::<Result<Vec<_>, _>>()?;
    let mut out = Vec::new();
    for w in enumerate_pair_matched(h)? {
        let counts = indices
            .iter()
            .map(|ix| Ok(class_count(link, ix, &w, count_pi_star_indexed(ix, &w, exec)?)))
            .collect::<Result<Vec<_>, CliError>>()?;
        let est = estimate_p(&counts)?;
        out.push((w, counts.iter().map(|c| c.count).collect(), est));
    }
    Ok(out)
}

/// Moment targets up to `h_max`: exact Catalan numbers for the semicircle,
/// sums of extrapolated word limits otherwise.
pub fn limit_targets<E: Executor>(limit: Limit, cfg: &RunConfig, exec: &E) -> Result<LimitTargets, CliError> {
    let h_max = cfg.h_max;
    if limit == Limit::Semicircle {
        let s = semicircle_moments(h_max)?;
        let moments = (1..=h_max)
            .map(|h| Some(MomentTarget { h, value: s.values[h - 1], exact: s.exact[h - 1].map(|e| e.to_string()) }))
            .collect();
        return Ok(LimitTargets { limit, moments, word_limits: Vec::new() });
    }
    let mut moments = Vec::with_capacity(h_max);
    let mut word_limits = Vec::new();
    for h in 1..=h_max {
        if h % 2 == 1 {
            moments.push(Some(MomentTarget { h, value: 0.0, exact: Some("0".into()) }));
        } else if h <= MAX_SWEEP_LENGTH {
            let ladder = if h <= 4 { &cfg.ladder } else { &cfg.ladder_long };
            let table = word_limit_table(&limit.link(), h, ladder, exec)?;
            let value = table.iter().map(|(_, _, e)| e.limit()).sum();
            for (w, counts, e) in table {
                word_limits.push(WordLimit {
                    word: w.to_string(),
                    n_ladder: e.ns.clone(),
                    counts,
                    p_estimate: e.limit(),
                    residual: e.residual,
                });
            }
            moments.push(Some(MomentTarget { h, value, exact: None }));
        } else {
            moments.push(None);
        }
    }
    Ok(LimitTargets { limit, moments, word_limits })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentRecord {
    pub h: usize,
    pub mean: f64,
    pub variance: f64,
    pub stderr: f64,
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    pub target: Option<f64>,
    pub target_exact: Option<String>,
    pub z: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProductReport {
    pub link_x: String,
    pub link_y: String,
    pub distribution_x: String,
    pub distribution_y: String,
    pub n: usize,
    pub trials: usize,
    pub master_seed: u64,
    pub delta: usize,
    pub moments: Vec<MomentRecord>,
    pub ks_semicircle: Option<f64>,
    pub checks: Vec<Check>,
}

impl ProductReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

pub fn moment_records(est: &[MomentEstimate], targets: Option<&LimitTargets>, seed: u64) -> Vec<MomentRecord> {
    est.iter()
        .map(|e| {
            let t = targets.and_then(|t| t.moments.get(e.h - 1).cloned().flatten());
            let z = t.as_ref().filter(|_| e.stderr > 0.0).map(|t| (e.mean - t.value) / e.stderr);
            MomentRecord {
                h: e.h,
                mean: e.mean,
                variance: e.variance,
                stderr: e.stderr,
                n: e.n,
                trials: e.trials,
                seed,
                target: t.as_ref().map(|t| t.value),
                target_exact: t.and_then(|t| t.exact),
                z,
            }
        })
        .collect()
}

/// Vanishing odd moments, moment targets, the sub-Gaussian bound, and the
/// distance to the semicircle when that is the limit.
pub fn product_checks(
    est: &[MomentEstimate],
    targets: Option<&LimitTargets>,
    delta: usize,
    ks: Option<f64>,
    cfg: &RunConfig,
) -> Result<Vec<Check>, CliError> {
    let mut out = Vec::new();
    for e in est.iter().filter(|e| e.h % 2 == 1 && e.h <= 5) {
        out.push(Check::within(format!("beta{} vanishes", e.h), e.mean, 0.0, cfg.z_max * e.stderr));
    }
    if let Some(t) = targets {
        for e in est.iter().filter(|e| e.h % 2 == 0 && e.h <= 6) {
            let Some(target) = t.moments.get(e.h - 1).cloned().flatten() else { continue };
            let tol = match (t.limit, e.h) {
                (Limit::Semicircle, h) => Some(cfg.semicircle_tol[h / 2 - 1]),
                (_, 2) => Some(cfg.semicircle_tol[0]),
                (Limit::Toeplitz, 4) => Some(cfg.toeplitz_tol),
                (Limit::Toeplitz, _) => None,
                (_, _) => Some(cfg.z_max * e.stderr),
            };
            if let Some(tol) = tol {
                out.push(Check::within(format!("beta{} target", e.h), e.mean, target.value, tol));
            }
        }
    }
    for e in est.iter().filter(|e| e.h % 2 == 0) {
        let bound = moment_bound(e.h, delta)? as f64;
        out.push(Check::at_most(format!("beta{} bound", e.h), e.mean, bound + cfg.z_max * e.stderr));
    }
    if let Some(ks) = ks {
        out.push(Check::at_most("ks semicircle".into(), ks, cfg.ks_tol));
    }
    Ok(out)
}

/// Monte Carlo run of one product, with spectra when a KS distance is wanted.
pub fn run_product<E: Executor>(
    spec: &ProductSpec,
    cfg: &RunConfig,
    targets: Option<&LimitTargets>,
    semicircle_ks: bool,
    exec: &E,
) -> Result<(ProductReport, Option<Vec<Spectrum>>), CliError> {
    let outcome = run_trials(spec, cfg.h_max, semicircle_ks, exec)?;
    let est = aggregate_moments(&outcome.moments, spec.n)?;
    let ks = match &outcome.spectra {
        Some(s) if semicircle_ks => Some(ks_distance(&Esd::pooled(s)?, semicircle_cdf)),
        _ => None,
    };
    let delta = profile_product(&spec.link_x, &spec.link_y, spec.n)?.delta;
    let checks = product_checks(&est, targets, delta, ks, cfg)?;
    let report = ProductReport {
        link_x: spec.link_x.to_string(),
        link_y: spec.link_y.to_string(),
        distribution_x: spec.dist_x.to_string(),
        distribution_y: spec.dist_y.to_string(),
        n: spec.n,
        trials: spec.trials,
        master_seed: spec.master_seed,
        delta,
        moments: moment_records(&est, targets, spec.master_seed),
        ks_semicircle: ks,
        checks,
    };
    Ok((report, outcome.spectra))
}

pub fn joint_checks(
    x: &LinkFunction,
    y: &LinkFunction,
    what: &str,
    reports: &[JointWordReport],
    tol: f64,
) -> Vec<Check> {
    reports
        .iter()
        .map(|r| {
            let name = format!("{},{} {what} {}/{}", x.symbol(), y.symbol(), r.word, r.word2);
            Check { pass: r.pass, ..Check::within(name, r.estimate.intercept, r.expected, tol) }
        })
        .collect()
}

fn same_table(a: &LinkFunction, b: &LinkFunction, n: usize) -> Result<bool, CliError> {
    let (ta, tb) = (LinkTable::build(a, n)?, LinkTable::build(b, n)?);
    Ok(ta.ids() == tb.ids() && ta.values() == tb.values())
}

/// `target = ρ_n ∘ base` as tables, and containment of the word classes.
fn invariance_checks<E: Executor>(
    base: &LinkFunction,
    target: &LinkFunction,
    rho: impl Fn(usize) -> Transform,
    label: &str,
    cfg: &RunConfig,
    exec: &E,
) -> Result<Vec<Check>, CliError> {
    let mut out = Vec::new();
    for &n in &cfg.check_ns {
        let composed = compose(rho(n), base.clone());
        let name = format!("{label}({}) = {} at n={n}", base.symbol(), target.symbol());
        out.push(Check::flag(name, same_table(&composed, target, n)?));
        let report = check_invariance_containment(base, &rho(n), cfg.invariance_length, n, exec)?;
        let name = format!(
            "{} classes contained in {} classes, 2k={} n={n}",
            base.symbol(),
            target.symbol(),
            cfg.invariance_length
        );
        out.push(Check::flag(name, report.pass()));
    }
    Ok(out)
}

/// Exact relation checks that explain the row's limit.
pub fn relation_checks<E: Executor>(row: &Row, cfg: &RunConfig, exec: &E) -> Result<Vec<Check>, CliError> {
    let mut out = Vec::new();
    match row.number {
        1 => {
            for (x, y) in &row.products {
                for &n in &cfg.check_ns {
                    let name = format!("{},{} implies W at n={n}", x.symbol(), y.symbol());
                    out.push(Check::flag(name, check_implies_wigner(x, y, n)?));
                }
            }
        }
        2 => {
            for (x, y) in &row.products {
                let c = check_compatible(x, y, 4, &cfg.relation_ladder, cfg.tol, exec)?;
                out.extend(joint_checks(x, y, "compatible", &c, cfg.tol));
                let l = check_leadsto_wigner(x, y, 4, &cfg.relation_ladder, cfg.tol, exec)?;
                out.extend(joint_checks(x, y, "leadsto W", &l, cfg.tol));
            }
        }
        3 => out.extend(invariance_checks(&T, &SC, Transform::half_fold, "halffold", cfg, exec)?),
        4 => {
            out.extend(invariance_checks(&H, &RC, Transform::modulo, "modulo", cfg, exec)?);
            out.extend(invariance_checks(&H, &DH, Transform::modulo_fold, "modulofold", cfg, exec)?);
        }
        _ => out.extend(invariance_checks(&RC, &DH, Transform::half_fold, "halffold", cfg, exec)?),
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RowReport {
    pub row: u8,
    pub limit: Limit,
    pub products: Vec<ProductReport>,
    pub relations: Vec<Check>,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Table2Report {
    pub targets: Vec<LimitTargets>,
    pub rows: Vec<RowReport>,
    pub pass: bool,
}

impl Table2Report {
    pub fn checks(&self) -> Vec<Check> {
        let mut out = Vec::new();
        for r in &self.rows {
            for p in &r.products {
                for c in &p.checks {
                    out.push(Check {
                        name: format!("row {} {}*{} {}", r.row, p.link_x, p.link_y, c.name),
                        ..c.clone()
                    });
                }
            }
            for c in &r.relations {
                out.push(Check { name: format!("row {} {}", r.row, c.name), ..c.clone() });
            }
        }
        out
    }
}

/// Every selected row: targets, Monte Carlo per product, relation checks.
pub fn verify<E: Executor>(cfg: &RunConfig, exec: &E) -> Result<Table2Report, CliError> {
    let selected = cfg.rows()?;
    let mut targets: BTreeMap<Limit, LimitTargets> = BTreeMap::new();
    let mut reports = Vec::new();
    for row in rows().into_iter().filter(|r| selected.contains(&r.number)) {
        if let Entry::Vacant(slot) = targets.entry(row.limit) {
            slot.insert(limit_targets(row.limit, cfg, exec)?);
        }
        let t = &targets[&row.limit];
        let mut products = Vec::new();
        for (x, y) in &row.products {
            let mut spec = ProductSpec::new(x.clone(), y.clone(), cfg.dist_x()?, cfg.n, cfg.master_seed, cfg.trials);
            spec.dist_y = cfg.dist_y()?;
            let (report, _) = run_product(&spec, cfg, Some(t), row.limit == Limit::Semicircle, exec)?;
            products.push(report);
        }
        let relations = relation_checks(&row, cfg, exec)?;
        let pass = products.iter().all(ProductReport::pass) && relations.iter().all(|c| c.pass);
        reports.push(RowReport { row: row.number, limit: row.limit, products, relations, pass });
    }
    let pass = reports.iter().all(|r| r.pass);
    Ok(Table2Report { targets: targets.into_values().collect(), rows: reports, pass })
}
