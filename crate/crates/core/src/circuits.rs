//! Exact counting of circuit classes by pruned depth-first search, word-limit
//! extrapolation, and the relation checks between link functions.
//!
//! A circuit of length `h` is a vertex sequence `π(0), ..., π(h)` in `1..=n`
//! with `π(h) = π(0)`; edge `i` joins `π(i-1)` and `π(i)`. A circuit belongs
//! to `Π*(w)` when `w[i] = w[j]` forces equal link values on edges `i` and `j`.
//!
//! The search fills positions left to right. At a first occurrence of a
//! letter the next vertex is free; otherwise the link value is already known
//! and the candidates come from a per-row index, so at most `Δ_L` of them
//! exist.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{arg_err, Error, Result};
use crate::exec::Executor;
use crate::linkfn::{compose, is_injective_on_range, LinkFunction, LinkTable, Transform};
use crate::words::{enumerate_pair_matched, is_catalan, Word};

/// Default cap on the estimated number of search nodes.
pub const DEFAULT_NODE_BUDGET: f64 = 1e9;

/// Longest word the search accepts.
pub const MAX_WORD_LENGTH: usize = 16;

/// Largest even length accepted by the full-sweep relation checks.
pub const MAX_SWEEP_LENGTH: usize = 6;

/// Link table plus, for each row, its columns grouped by link-value id.
#[derive(Clone, Debug)]
pub struct LinkIndex {
    table: LinkTable,
    row_start: Vec<usize>,
    /// `(id, column)` sorted by id inside each row.
    entries: Vec<(u32, u32)>,
}

impl LinkIndex {
    pub fn build(link: &LinkFunction, n: usize) -> Result<Self> {
        Ok(LinkIndex::from_table(LinkTable::build(link, n)?))
    }

    pub fn from_table(table: LinkTable) -> Self {
        let n = table.n();
        let mut entries = Vec::with_capacity(n * n);
        let mut row_start = Vec::with_capacity(n + 1);
        for r in 0..n {
            row_start.push(entries.len());
            let begin = entries.len();
            entries.extend((0..n).map(|c| (table.id(r, c), c as u32)));
            entries[begin..].sort_unstable();
        }
        row_start.push(entries.len());
        LinkIndex { table, row_start, entries }
    }

    pub fn table(&self) -> &LinkTable {
        &self.table
    }

    pub fn n(&self) -> usize {
        self.table.n()
    }

    #[inline]
    fn id(&self, r: u32, c: u32) -> u32 {
        self.table.id(r as usize, c as usize)
    }

    /// Columns `c` of row `r` with `id(r, c) == id`.
    #[inline]
    fn candidates(&self, r: u32, id: u32) -> &[(u32, u32)] {
        let row = &self.entries[self.row_start[r as usize]..self.row_start[r as usize + 1]];
        let lo = row.partition_point(|e| e.0 < id);
        let hi = lo + row[lo..].partition_point(|e| e.0 == id);
        &row[lo..hi]
    }
}

/// Exact size of a circuit class at one `n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CircuitClassCount {
    pub word: Word,
    /// Second word for joint counts `Π*_X(w) ∩ Π*_Y(w')`.
    pub word2: Option<Word>,
    pub link: String,
    pub link2: Option<String>,
    pub n: usize,
    pub count: u64,
    /// `1 + h/2`; the count is normalized by `n` to this power.
    pub normalizer_exponent: u32,
}

impl CircuitClassCount {
    pub fn normalized(&self) -> f64 {
        self.count as f64 / libm::pow(self.n as f64, self.normalizer_exponent as f64)
    }
}

struct Constraint<'a> {
    index: &'a LinkIndex,
    /// `first[i - 1]`: earlier position carrying the same letter as position `i`.
    first: Vec<Option<usize>>,
}

struct Search<'a> {
    n: u32,
    h: usize,
    cons: &'a [Constraint<'a>],
}

struct State {
    path: [u32; MAX_WORD_LENGTH + 1],
    ids: [[u32; MAX_WORD_LENGTH + 1]; 2],
}

impl Search<'_> {
    fn count_root(&self, root: u32) -> u64 {
        let mut st = State { path: [0; MAX_WORD_LENGTH + 1], ids: [[0; MAX_WORD_LENGTH + 1]; 2] };
        st.path[0] = root;
        self.dfs(1, &mut st)
    }

    fn record(&self, i: usize, prev: u32, v: u32, st: &mut State) {
        for (c, con) in self.cons.iter().enumerate() {
            if con.first[i - 1].is_none() {
                st.ids[c][i] = con.index.id(prev, v);
            }
        }
    }

    fn dfs(&self, i: usize, st: &mut State) -> u64 {
        let prev = st.path[i - 1];
        let root = st.path[0];
        let last = i == self.h;
        let mut forced: [(usize, u32); 2] = [(0, 0); 2];
        let mut nf = 0;
        for (c, con) in self.cons.iter().enumerate() {
            if let Some(p) = con.first[i - 1] {
                forced[nf] = (c, st.ids[c][p]);
                nf += 1;
            }
        }
        if nf == 0 {
            if last {
                return 1;
            }
            let mut total = 0;
            for v in 0..self.n {
                st.path[i] = v;
                self.record(i, prev, v, st);
                total += self.dfs(i + 1, st);
            }
            return total;
        }
        let forced = &forced[..nf];
        let (lead, rest) = if nf == 2 {
            let a = self.cons[forced[0].0].index.candidates(prev, forced[0].1);
            let b = self.cons[forced[1].0].index.candidates(prev, forced[1].1);
            if a.len() <= b.len() {
                (a, &forced[1..])
            } else {
                (b, &forced[..1])
            }
        } else {
            (self.cons[forced[0].0].index.candidates(prev, forced[0].1), &forced[..0])
        };
        let mut total = 0;
        for &(_, col) in lead {
            if last && col != root {
                continue;
            }
            if rest.iter().any(|&(c, id)| self.cons[c].index.id(prev, col) != id) {
                continue;
            }
            if last {
                total += 1;
                continue;
            }
            st.path[i] = col;
            self.record(i, prev, col, st);
            total += self.dfs(i + 1, st);
        }
        total
    }
}

fn estimated_nodes(n: usize, h: usize, cons: &[Constraint<'_>]) -> f64 {
    let free = (1..h).filter(|&i| cons.iter().all(|c| c.first[i - 1].is_none())).count();
    libm::pow(n as f64, (free + 1) as f64)
}

fn check_word(w: &Word) -> Result<()> {
    if w.is_empty() || w.len() > MAX_WORD_LENGTH {
        return Err(arg_err!("word length must be in 1..={MAX_WORD_LENGTH}, got {}", w.len()));
    }
    Ok(())
}

fn run_search<E: Executor>(cons: &[Constraint<'_>], h: usize, exec: &E) -> Result<u64> {
    let n = cons[0].index.n();
    let estimated = estimated_nodes(n, h, cons);
    if estimated > DEFAULT_NODE_BUDGET {
        return Err(Error::Budget { estimated, budget: DEFAULT_NODE_BUDGET });
    }
    let search = Search { n: n as u32, h, cons };
    Ok(exec.map_collect(n, |root| search.count_root(root as u32)).into_iter().sum())
}

/// `#Π*(w)` for a prebuilt index.
pub fn count_pi_star_indexed<E: Executor>(index: &LinkIndex, w: &Word, exec: &E) -> Result<u64> {
    check_word(w)?;
    let cons = [Constraint { index, first: w.first_occurrences() }];
    run_search(&cons, w.len(), exec)
}

/// `#(Π*_X(w) ∩ Π*_Y(w'))` for prebuilt indices.
pub fn count_joint_indexed<E: Executor>(x: &LinkIndex, y: &LinkIndex, w: &Word, w2: &Word, exec: &E) -> Result<u64> {
    check_word(w)?;
    if w.len() != w2.len() {
        return Err(arg_err!("word lengths differ: `{w}` has {}, `{w2}` has {}", w.len(), w2.len()));
    }
    if x.n() != y.n() {
        return Err(arg_err!("index dimensions differ: {} vs {}", x.n(), y.n()));
    }
    let cons =
        [Constraint { index: x, first: w.first_occurrences() }, Constraint { index: y, first: w2.first_occurrences() }];
    run_search(&cons, w.len(), exec)
}

fn normalizer(w: &Word) -> u32 {
    1 + (w.len() / 2) as u32
}

pub fn count_pi_star<E: Executor>(link: &LinkFunction, w: &Word, n: usize, exec: &E) -> Result<CircuitClassCount> {
    let index = LinkIndex::build(link, n)?;
    Ok(CircuitClassCount {
        word: w.clone(),
        word2: None,
        link: link.to_string(),
        link2: None,
        n,
        count: count_pi_star_indexed(&index, w, exec)?,
        normalizer_exponent: normalizer(w),
    })
}

pub fn count_pi_star_joint<E: Executor>(
    x: &LinkFunction,
    y: &LinkFunction,
    w: &Word,
    w2: &Word,
    n: usize,
    exec: &E,
) -> Result<CircuitClassCount> {
    let ix = LinkIndex::build(x, n)?;
    let iy = LinkIndex::build(y, n)?;
    Ok(CircuitClassCount {
        word: w.clone(),
        word2: Some(w2.clone()),
        link: x.to_string(),
        link2: Some(y.to_string()),
        n,
        count: count_joint_indexed(&ix, &iy, w, w2, exec)?,
        normalizer_exponent: normalizer(w),
    })
}

/// `#Π'(w)`: circuits whose slopes `s(i) = π(i) - π(i-1)` satisfy
/// `s(i) + s(j) = 0` on every matched pair (Toeplitz), or `s(i) + s(j) ∈ {0, ±n}`
/// (symmetric circulant).
pub fn count_pi_prime<E: Executor>(link: &LinkFunction, w: &Word, n: usize, exec: &E) -> Result<CircuitClassCount> {
    let wraps: &[i64] = match link {
        LinkFunction::Toeplitz => &[0],
        LinkFunction::SymmetricCirculant => &[0, 1, -1],
        other => return Err(arg_err!("slope classes are defined for toeplitz and symcirc, not `{other}`")),
    };
    check_word(w)?;
    if !w.is_pair_matched() {
        return Err(arg_err!("`{w}` is not pair-matched"));
    }
    if n == 0 {
        return Err(arg_err!("dimension must be positive"));
    }
    let first = w.first_occurrences();
    let free = first.iter().take(w.len() - 1).filter(|f| f.is_none()).count();
    let estimated = libm::pow(n as f64, (free + 1) as f64);
    if estimated > DEFAULT_NODE_BUDGET {
        return Err(Error::Budget { estimated, budget: DEFAULT_NODE_BUDGET });
    }
    let offsets: Vec<i64> = wraps.iter().map(|k| k * n as i64).collect();
    let search = SlopeSearch { n: n as i64, h: w.len(), first: &first, offsets: &offsets };
    let count = exec
        .map_collect(n, |root| {
            let mut path = [0i64; MAX_WORD_LENGTH + 1];
            path[0] = root as i64 + 1;
            search.dfs(1, &mut path)
        })
        .into_iter()
        .sum();
    Ok(CircuitClassCount {
        word: w.clone(),
        word2: None,
        link: link.to_string(),
        link2: None,
        n,
        count,
        normalizer_exponent: normalizer(w),
    })
}

struct SlopeSearch<'a> {
    n: i64,
    h: usize,
    first: &'a [Option<usize>],
    offsets: &'a [i64],
}

impl SlopeSearch<'_> {
    fn dfs(&self, i: usize, path: &mut [i64; MAX_WORD_LENGTH + 1]) -> u64 {
        let prev = path[i - 1];
        let last = i == self.h;
        match self.first[i - 1] {
            None => {
                if last {
                    return 1;
                }
                let mut total = 0;
                for v in 1..=self.n {
                    path[i] = v;
                    total += self.dfs(i + 1, path);
                }
                total
            }
            Some(p) => {
                let partner = path[p] - path[p - 1];
                let mut total = 0;
                for &off in self.offsets {
                    let v = prev - partner + off;
                    if v < 1 || v > self.n {
                        continue;
                    }
                    if last {
                        total += u64::from(v == path[0]);
                    } else {
                        path[i] = v;
                        total += self.dfs(i + 1, path);
                    }
                }
                total
            }
        }
    }
}

/// Fit of `count / n^{1+k} = p + c/n` over a ladder of `n`.
#[derive(Clone, Debug, PartialEq)]
pub struct PEstimate {
    pub ns: Vec<usize>,
    pub values: Vec<f64>,
    /// Least-squares intercept, unclamped.
    pub intercept: f64,
    pub slope: f64,
    /// Root of the residual sum of squares.
    pub residual: f64,
}

impl PEstimate {
    /// The extrapolated word limit, clamped at zero.
    pub fn limit(&self) -> f64 {
        self.intercept.max(0.0)
    }
}

pub fn estimate_p(counts: &[CircuitClassCount]) -> Result<PEstimate> {
    if counts.len() < 3 {
        return Err(arg_err!("need at least 3 ladder points, got {}", counts.len()));
    }
    if counts.windows(2).any(|w| w[0].n >= w[1].n) {
        return Err(arg_err!("ladder must be strictly increasing in n"));
    }
    let ns: Vec<usize> = counts.iter().map(|c| c.n).collect();
    let values: Vec<f64> = counts.iter().map(CircuitClassCount::normalized).collect();
    let xs: Vec<f64> = ns.iter().map(|&n| 1.0 / n as f64).collect();
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = values.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&values).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = xs
        .iter()
        .zip(&values)
        .map(|(x, y)| {
            let r = y - intercept - slope * x;
            r * r
        })
        .sum();
    if !intercept.is_finite() {
        return Err(arg_err!("extrapolation produced a non-finite limit"));
    }
    Ok(PEstimate { ns, values, intercept, slope, residual: libm::sqrt(rss) })
}

fn check_ladder(ladder: &[usize]) -> Result<()> {
    if ladder.len() < 3 || ladder.windows(2).any(|w| w[0] >= w[1]) || ladder[0] == 0 {
        return Err(arg_err!("ladder needs at least 3 strictly increasing positive sizes, got {ladder:?}"));
    }
    Ok(())
}

fn ladder_estimate<E: Executor>(
    x: &LinkFunction,
    y: &LinkFunction,
    w: &Word,
    w2: &Word,
    indices: &[(LinkIndex, LinkIndex)],
    exec: &E,
) -> Result<(Vec<u64>, PEstimate)> {
    let counts = indices
        .iter()
        .map(|(ix, iy)| {
            Ok(CircuitClassCount {
                word: w.clone(),
                word2: Some(w2.clone()),
                link: x.to_string(),
                link2: Some(y.to_string()),
                n: ix.n(),
                count: count_joint_indexed(ix, iy, w, w2, exec)?,
                normalizer_exponent: normalizer(w),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let est = estimate_p(&counts)?;
    Ok((counts.iter().map(|c| c.count).collect(), est))
}

/// One `(w, w')` entry of a compatibility or `⇝ L_W` report.
#[derive(Clone, Debug, PartialEq)]
pub struct JointWordReport {
    pub word: Word,
    pub word2: Word,
    pub counts: Vec<u64>,
    pub estimate: PEstimate,
    pub expected: f64,
    pub pass: bool,
}

fn sweep_words(h: usize) -> Result<Vec<Word>> {
    if h > MAX_SWEEP_LENGTH {
        return Err(arg_err!("relation sweeps support lengths up to {MAX_SWEEP_LENGTH}, got {h}"));
    }
    enumerate_pair_matched(h)
}

fn ladder_indices(x: &LinkFunction, y: &LinkFunction, ladder: &[usize]) -> Result<Vec<(LinkIndex, LinkIndex)>> {
    ladder.iter().map(|&n| Ok((LinkIndex::build(x, n)?, LinkIndex::build(y, n)?))).collect()
}

/// `p_Z(w, w')` for every ordered pair `w != w'` of pair-matched words of length `h`;
/// the links are compatible when all of them vanish.
pub fn check_compatible<E: Executor>(
    x: &LinkFunction,
    y: &LinkFunction,
    h: usize,
    ladder: &[usize],
    tol: f64,
    exec: &E,
) -> Result<Vec<JointWordReport>> {
    check_ladder(ladder)?;
    let words = sweep_words(h)?;
    let indices = ladder_indices(x, y, ladder)?;
    let mut out = Vec::new();
    for w in &words {
        for w2 in &words {
            if w == w2 {
                continue;
            }
            let (counts, estimate) = ladder_estimate(x, y, w, w2, &indices, exec)?;
            let pass = libm::fabs(estimate.intercept) <= tol;
            out.push(JointWordReport { word: w.clone(), word2: w2.clone(), counts, estimate, expected: 0.0, pass });
        }
    }
    Ok(out)
}

/// `p_Z(w, w)` for every pair-matched `w` of length `h`, against 1 for
/// Catalan words and 0 otherwise.
pub fn check_leadsto_wigner<E: Executor>(
    x: &LinkFunction,
    y: &LinkFunction,
    h: usize,
    ladder: &[usize],
    tol: f64,
    exec: &E,
) -> Result<Vec<JointWordReport>> {
    check_ladder(ladder)?;
    let words = sweep_words(h)?;
    let indices = ladder_indices(x, y, ladder)?;
    words
        .iter()
        .map(|w| {
            let (counts, estimate) = ladder_estimate(x, y, w, w, &indices, exec)?;
            let expected = if is_catalan(w)? { 1.0 } else { 0.0 };
            let pass = libm::fabs(estimate.intercept - expected) <= tol;
            Ok(JointWordReport { word: w.clone(), word2: w.clone(), counts, estimate, expected, pass })
        })
        .collect()
}

/// True iff equal `L_X` and equal `L_Y` values on two cells force equal
/// Wigner values, i.e. the upper-triangle cell is recovered from the value pair.
pub fn check_implies_wigner(x: &LinkFunction, y: &LinkFunction, n: usize) -> Result<bool> {
    let tx = LinkTable::build(x, n)?;
    let ty = LinkTable::build(y, n)?;
    let ky = ty.distinct() as u64;
    let mut keys = Vec::with_capacity(n * (n + 1) / 2);
    for i in 0..n {
        for j in i..n {
            keys.push(tx.id(i, j) as u64 * ky + ty.id(i, j) as u64);
        }
    }
    keys.sort_unstable();
    Ok(keys.windows(2).all(|w| w[0] != w[1]))
}

/// Per-word result of comparing `Π*_X(w)` with `Π*_{ρ∘X}(w)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InvarianceWordReport {
    pub word: Word,
    pub count_base: u64,
    pub count_transformed: u64,
    /// `#(Π*_X(w) ∩ Π*_{ρ∘X}(w))`.
    pub count_joint: u64,
    /// `Π*_X(w) ⊆ Π*_{ρ∘X}(w)`, established as `count_joint == count_base`.
    pub subset: bool,
    pub equal: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InvarianceReport {
    pub base: String,
    pub transformed: String,
    pub n: usize,
    /// Injectivity of the transform on the base range, verified at `n`.
    pub injective: bool,
    pub words: Vec<InvarianceWordReport>,
}

impl InvarianceReport {
    /// Containment for every word, and equality too when the transform is injective.
    pub fn pass(&self) -> bool {
        self.words.iter().all(|w| w.subset && (!self.injective || w.equal))
    }
}

pub fn check_invariance_containment<E: Executor>(
    x: &LinkFunction,
    transform: &Transform,
    h: usize,
    n: usize,
    exec: &E,
) -> Result<InvarianceReport> {
    let composed = compose(transform.clone(), x.clone());
    let injective = is_injective_on_range(transform, x, n)?;
    let ix = LinkIndex::build(x, n)?;
    let iy = LinkIndex::build(&composed, n)?;
    let words = enumerate_pair_matched(h)?
        .into_iter()
        .map(|w| {
            let count_base = count_pi_star_indexed(&ix, &w, exec)?;
            let count_transformed = count_pi_star_indexed(&iy, &w, exec)?;
            let count_joint = count_joint_indexed(&ix, &iy, &w, &w, exec)?;
            Ok(InvarianceWordReport {
                word: w,
                count_base,
                count_transformed,
                count_joint,
                subset: count_joint == count_base,
                equal: count_base == count_transformed,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(InvarianceReport { base: x.to_string(), transformed: composed.to_string(), n, injective, words })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::Sequential;

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    #[test]
    fn wigner_double_letter() {
        let c = count_pi_star(&LinkFunction::Wigner, &w("aa"), 5, &Sequential).unwrap();
        assert_eq!(c.count, 25);
        assert_eq!(c.normalizer_exponent, 2);
    }

    #[test]
    fn toeplitz_slope_double_letter() {
        assert_eq!(count_pi_prime(&LinkFunction::Toeplitz, &w("aa"), 5, &Sequential).unwrap().count, 25);
        assert!(count_pi_prime(&LinkFunction::Hankel, &w("aa"), 5, &Sequential).is_err());
        assert!(count_pi_prime(&LinkFunction::Toeplitz, &w("aab"), 5, &Sequential).is_err());
    }

    #[test]
    fn joint_length_mismatch() {
        let r =
            count_pi_star_joint(&LinkFunction::Toeplitz, &LinkFunction::Hankel, &w("aa"), &w("abab"), 4, &Sequential);
        assert!(matches!(r, Err(Error::Argument(_))));
    }

    #[test]
    fn budget_guard() {
        let r = count_pi_star(&LinkFunction::Toeplitz, &w("abcdefghhgfedcba"), 64, &Sequential);
        assert!(matches!(r, Err(Error::Budget { .. })));
    }

    #[test]
    fn estimate_needs_three_points() {
        let c = count_pi_star(&LinkFunction::Wigner, &w("aa"), 4, &Sequential).unwrap();
        assert!(estimate_p(&[c.clone(), c.clone()]).is_err());
        assert!(estimate_p(&[c.clone(), c.clone(), c]).is_err());
    }

    #[test]
    fn implies_wigner_examples() {
        assert!(check_implies_wigner(&LinkFunction::Toeplitz, &LinkFunction::Hankel, 20).unwrap());
        assert!(!check_implies_wigner(&LinkFunction::Toeplitz, &LinkFunction::ReverseCirculant, 20).unwrap());
        for y in LinkFunction::BUILTINS {
            assert!(check_implies_wigner(&LinkFunction::Wigner, &y, 9).unwrap());
        }
    }
}
