use std::path::Path;
use std::time::Instant;

use serde::Serialize;

use schurlsd_core::circuits::{
    check_compatible, check_implies_wigner, check_invariance_containment, check_leadsto_wigner, count_pi_prime,
    count_pi_star, count_pi_star_joint, estimate_p, CircuitClassCount, InvarianceReport, JointWordReport,
};
use schurlsd_core::ensemble::{realize_trial, ProductTables};
use schurlsd_core::oracle::semicircle_cdf;
use schurlsd_core::spectral::{histogram, ks_distance, run_trials, Esd};
use schurlsd_core::words::{enumerate_pair_matched, is_catalan};
use schurlsd_core::{Executor, LinkFunction, Word};

use crate::config::RunConfig;
use crate::output::{sha256_hex, to_csv, to_json, write_atomic, CsvCell};
use crate::table2::{joint_checks, limit_targets, row_of, run_product, verify, Limit, LimitTargets, ProductReport};
use crate::{Check, CliError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::Subcommand)]
pub enum Command {
    /// Eigenvalues, pooled histogram and KS distance for one product.
    Spectrum,
    /// Monte Carlo moment table for one product, with limit targets when known.
    Moments,
    /// Pair-matched words of one length with their Catalan flags.
    Words,
    /// Extrapolated word limits p(w) or joint p(w, w').
    Pw,
    /// One link relation: compatible, leadsto, implies or invariance.
    Check,
    /// The full Table 2 suite.
    #[command(name = "verify-table2")]
    VerifyTable2,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Moments => "moments",
            Command::Words => "words",
            Command::Pw => "pw",
            Command::Check => "check",
            Command::VerifyTable2 => "verify-table2",
        }
    }
}

#[derive(Serialize)]
struct Envelope<'a, T> {
    tool: &'static str,
    command: &'static str,
    config_hash: &'a str,
    config: &'a RunConfig,
    result: T,
}

struct Ctx<'a> {
    cmd: Command,
    cfg: &'a RunConfig,
    hash: String,
    files: Vec<(String, Vec<u8>)>,
    checks: Vec<Check>,
}

impl Ctx<'_> {
    fn json<T: Serialize>(&mut self, name: &str, result: T) -> Result<(), CliError> {
        let env =
            Envelope { tool: "schurlsd", command: self.cmd.name(), config_hash: &self.hash, config: self.cfg, result };
        self.files.push((name.to_string(), to_json(&env)?));
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckStatus {
    pub name: String,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FileEntry {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config_hash: String,
    pub wall_time_seconds: f64,
    pub all_pass: bool,
    pub checks: Vec<CheckStatus>,
    pub files: Vec<FileEntry>,
}

/// Runs `cmd`, writes its outputs under `out`, and finishes with `manifest.json`.
pub fn execute<E: Executor>(
    cmd: Command,
    cfg: &RunConfig,
    out: &Path,
    exec: &E,
) -> Result<(RunManifest, Vec<Check>), CliError> {
    let start = Instant::now();
    let mut ctx = Ctx { cmd, cfg, hash: cfg.hash()?, files: Vec::new(), checks: Vec::new() };
    match cmd {
        Command::Spectrum => spectrum(&mut ctx, exec)?,
        Command::Moments => moments(&mut ctx, exec)?,
        Command::Words => words(&mut ctx)?,
        Command::Pw => pw(&mut ctx, exec)?,
        Command::Check => check(&mut ctx, exec)?,
        Command::VerifyTable2 => {
            let report = verify(cfg, exec)?;
            ctx.checks = report.checks();
            ctx.json("table2.json", &report)?;
        }
    }
    let mut files = Vec::new();
    for (name, bytes) in &ctx.files {
        write_atomic(&out.join(name), bytes)?;
        files.push(FileEntry { path: name.clone(), bytes: bytes.len() as u64, sha256: sha256_hex(bytes) });
    }
    let manifest = RunManifest {
        tool: "schurlsd".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: cmd.name().into(),
        config_hash: ctx.hash.clone(),
        wall_time_seconds: start.elapsed().as_secs_f64(),
        all_pass: ctx.checks.iter().all(|c| c.pass),
        checks: ctx.checks.iter().map(|c| CheckStatus { name: c.name.clone(), pass: c.pass }).collect(),
        files,
    };
    write_atomic(&out.join("manifest.json"), &to_json(&manifest)?)?;
    Ok((manifest, ctx.checks))
}

fn semicircle_reference(cfg: &RunConfig) -> Result<bool, CliError> {
    Ok(match cfg.reference.as_str() {
        "semicircle" => true,
        "none" => false,
        _ => row_of(&cfg.link_x()?, &cfg.link_y()?).is_some_and(|r| r.limit == Limit::Semicircle),
    })
}

#[derive(Serialize)]
struct HistogramOut {
    lo: f64,
    hi: f64,
    bins: Vec<Bin>,
}

#[derive(Serialize)]
struct Bin {
    center: f64,
    density: f64,
}

#[derive(Serialize)]
struct KsOut {
    reference: Option<&'static str>,
    points: usize,
    ks: Option<f64>,
    tolerance: f64,
    pass: Option<bool>,
}

fn spectrum<E: Executor>(ctx: &mut Ctx, exec: &E) -> Result<(), CliError> {
    let cfg = ctx.cfg;
    let spec = cfg.product_spec()?;
    let outcome = run_trials(&spec, cfg.h_max, true, exec)?;
    let spectra = outcome.spectra.unwrap_or_default();
    let mut rows = Vec::new();
    for (t, s) in spectra.iter().enumerate() {
        for (i, &x) in s.eigenvalues().iter().enumerate() {
            rows.push(vec![CsvCell::Int(t as u64), CsvCell::Int(i as u64 + 1), CsvCell::Float(x)]);
        }
    }
    ctx.files.push(("eigenvalues.csv".into(), to_csv(&ctx.hash, &["trial", "index", "eigenvalue"], &rows)));

    let esd = Esd::pooled(&spectra)?;
    let (lo, hi) = match cfg.hist_range {
        Some([lo, hi]) => (lo, hi),
        None => {
            let p = esd.points();
            let (lo, hi) = (p[0], p[p.len() - 1]);
            if lo < hi {
                (lo, hi)
            } else {
                (lo - 0.5, hi + 0.5)
            }
        }
    };
    let bins =
        histogram(&esd, cfg.bins, lo, hi)?.into_iter().map(|(center, density)| Bin { center, density }).collect();
    ctx.json("histogram.json", HistogramOut { lo, hi, bins })?;

    let ks = semicircle_reference(cfg)?.then(|| ks_distance(&esd, semicircle_cdf));
    let pass = ks.map(|d| d <= cfg.ks_tol);
    if let Some(d) = ks {
        ctx.checks.push(Check::at_most("ks semicircle".into(), d, cfg.ks_tol));
    }
    let reference = ks.map(|_| "semicircle");
    ctx.json("ks.json", KsOut { reference, points: esd.len(), ks, tolerance: cfg.ks_tol, pass })?;

    if cfg.export_matrix {
        let z = realize_trial(&spec, &ProductTables::build(&spec)?, 0)?;
        let n = z.n();
        let header: Vec<String> = (1..=n).map(|j| format!("c{j}")).collect();
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        let rows: Vec<Vec<CsvCell>> = (0..n).map(|i| (0..n).map(|j| CsvCell::Float(z.get(i, j))).collect()).collect();
        ctx.files.push(("matrix.csv".into(), to_csv(&ctx.hash, &header, &rows)));
    }
    Ok(())
}

#[derive(Serialize)]
struct MomentsOut {
    row: Option<u8>,
    targets: Option<LimitTargets>,
    product: ProductReport,
}

fn moments<E: Executor>(ctx: &mut Ctx, exec: &E) -> Result<(), CliError> {
    let cfg = ctx.cfg;
    let spec = cfg.product_spec()?;
    let row = row_of(&spec.link_x, &spec.link_y);
    let targets = row.as_ref().map(|r| limit_targets(r.limit, cfg, exec)).transpose()?;
    let (product, _) = run_product(&spec, cfg, targets.as_ref(), false, exec)?;
    ctx.checks = product.checks.clone();
    ctx.json("moments.json", MomentsOut { row: row.map(|r| r.number), targets, product })
}

#[derive(Serialize)]
struct WordsOut {
    length: usize,
    total: usize,
    catalan: usize,
    words: Vec<WordEntry>,
}

#[derive(Serialize)]
struct WordEntry {
    word: String,
    catalan: bool,
}

fn words(ctx: &mut Ctx) -> Result<(), CliError> {
    let h = ctx.cfg.word_length;
    let words = enumerate_pair_matched(h)?
        .into_iter()
        .map(|w| Ok(WordEntry { catalan: is_catalan(&w)?, word: w.to_string() }))
        .collect::<Result<Vec<_>, CliError>>()?;
    let catalan = words.iter().filter(|w| w.catalan).count();
    ctx.json("words.json", WordsOut { length: h, total: words.len(), catalan, words })
}

/// The record shape shared by `pw` and the joint relation checks.
#[derive(Serialize)]
struct PwRecord {
    link_x: String,
    link_y: Option<String>,
    word: String,
    word2: Option<String>,
    class: String,
    n_ladder: Vec<usize>,
    counts: Vec<u64>,
    p_estimate: f64,
    residual: f64,
    expected: Option<f64>,
    pass: Option<bool>,
}

impl PwRecord {
    fn from_joint(x: &LinkFunction, y: &LinkFunction, r: &JointWordReport) -> Self {
        PwRecord {
            link_x: x.to_string(),
            link_y: Some(y.to_string()),
            word: r.word.to_string(),
            word2: Some(r.word2.to_string()),
            class: "star".into(),
            n_ladder: r.estimate.ns.clone(),
            counts: r.counts.clone(),
            p_estimate: r.estimate.intercept,
            residual: r.estimate.residual,
            expected: Some(r.expected),
            pass: Some(r.pass),
        }
    }
}

fn pw<E: Executor>(ctx: &mut Ctx, exec: &E) -> Result<(), CliError> {
    let cfg = ctx.cfg;
    let x = cfg.link_x()?;
    let word2 = cfg.word2()?;
    let y = word2.as_ref().map(|_| cfg.link_y()).transpose()?;
    let words: Vec<Word> = match cfg.word()? {
        Some(w) => vec![w],
        None => enumerate_pair_matched(cfg.word_length)?,
    };
    let slope = cfg.class == "slope";
    if slope && y.is_some() {
        return Err(CliError::Config {
            key: "class".into(),
            value: cfg.class.clone(),
            reason: "joint counts use the star class".into(),
        });
    }
    let semicircle_pair = y.as_ref().is_some_and(|y| row_of(&x, y).is_some_and(|r| r.limit == Limit::Semicircle));
    let mut records = Vec::new();
    for w in &words {
        if let Some(w2) = &word2 {
            if w2.len() != w.len() {
                return Err(CliError::Config {
                    key: "word2".into(),
                    value: w2.to_string(),
                    reason: format!("length differs from word `{w}`"),
                });
            }
        }
        let ladder = if w.len() <= 4 { &cfg.ladder } else { &cfg.ladder_long };
        let counts = ladder
            .iter()
            .map(|&n| match (&y, &word2) {
                (Some(y), Some(w2)) => count_pi_star_joint(&x, y, w, w2, n, exec),
                _ if slope => count_pi_prime(&x, w, n, exec),
                _ => count_pi_star(&x, w, n, exec),
            })
            .collect::<Result<Vec<CircuitClassCount>, _>>()?;
        let est = estimate_p(&counts)?;
        let catalan = w.is_pair_matched() && is_catalan(w)?;
        let expected = match &word2 {
            Some(w2) if semicircle_pair => Some(if w == w2 && catalan { 1.0 } else { 0.0 }),
            None if x == LinkFunction::Wigner && w.is_pair_matched() => Some(if catalan { 1.0 } else { 0.0 }),
            _ => None,
        };
        let pass = expected.map(|e| (est.intercept - e).abs() <= cfg.tol);
        if let (Some(e), Some(_)) = (expected, pass) {
            let label = match &word2 {
                Some(w2) => format!("p({w},{w2})"),
                None => format!("p({w})"),
            };
            ctx.checks.push(Check::within(label, est.intercept, e, cfg.tol));
        }
        records.push(PwRecord {
            link_x: x.to_string(),
            link_y: y.as_ref().map(ToString::to_string),
            word: w.to_string(),
            word2: word2.as_ref().map(ToString::to_string),
            class: cfg.class.clone(),
            n_ladder: est.ns.clone(),
            counts: counts.iter().map(|c| c.count).collect(),
            p_estimate: est.intercept,
            residual: est.residual,
            expected,
            pass,
        });
    }
    ctx.json("pw.json", records)
}

#[derive(Serialize)]
struct ImpliesOut {
    n: usize,
    holds: bool,
}

#[derive(Serialize)]
struct InvarianceOut {
    base: String,
    transformed: String,
    n: usize,
    injective: bool,
    pass: bool,
    words: Vec<InvarianceWordOut>,
}

#[derive(Serialize)]
struct InvarianceWordOut {
    word: String,
    count_base: u64,
    count_transformed: u64,
    count_joint: u64,
    subset: bool,
    equal: bool,
}

impl From<InvarianceReport> for InvarianceOut {
    fn from(r: InvarianceReport) -> Self {
        InvarianceOut {
            pass: r.pass(),
            base: r.base,
            transformed: r.transformed,
            n: r.n,
            injective: r.injective,
            words: r
                .words
                .into_iter()
                .map(|w| InvarianceWordOut {
                    word: w.word.to_string(),
                    count_base: w.count_base,
                    count_transformed: w.count_transformed,
                    count_joint: w.count_joint,
                    subset: w.subset,
                    equal: w.equal,
                })
                .collect(),
        }
    }
}

fn check<E: Executor>(ctx: &mut Ctx, exec: &E) -> Result<(), CliError> {
    let cfg = ctx.cfg;
    let x = cfg.link_x()?;
    match cfg.relation.as_str() {
        "compatible" | "leadsto" => {
            let y = cfg.link_y()?;
            let (reports, what) = if cfg.relation == "compatible" {
                (check_compatible(&x, &y, cfg.word_length, &cfg.relation_ladder, cfg.tol, exec)?, "compatible")
            } else {
                (check_leadsto_wigner(&x, &y, cfg.word_length, &cfg.relation_ladder, cfg.tol, exec)?, "leadsto W")
            };
            ctx.checks = joint_checks(&x, &y, what, &reports, cfg.tol);
            let records: Vec<PwRecord> = reports.iter().map(|r| PwRecord::from_joint(&x, &y, r)).collect();
            ctx.json("check.json", records)
        }
        "implies" => {
            let y = cfg.link_y()?;
            let mut out = Vec::new();
            for &n in &cfg.check_ns {
                let holds = check_implies_wigner(&x, &y, n)?;
                ctx.checks.push(Check::flag(format!("{},{} implies W at n={n}", x.symbol(), y.symbol()), holds));
                out.push(ImpliesOut { n, holds });
            }
            ctx.json("check.json", out)
        }
        _ => {
            let mut out = Vec::new();
            for &n in &cfg.check_ns {
                let report: InvarianceOut =
                    check_invariance_containment(&x, &cfg.transform_at(n)?, cfg.invariance_length, n, exec)?.into();
                ctx.checks.push(Check::flag(format!("{} under {} at n={n}", report.base, cfg.transform), report.pass));
                out.push(report);
            }
            ctx.json("check.json", out)
        }
    }
}
