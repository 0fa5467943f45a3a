//! Link functions of the classical symmetric patterned matrices, transforms of
//! link functions, and the structural quantities `Δ_L`, `k_n`, `α_n`.
//!
//! Indices are 1-based on every public surface: `eval(i, j, n)` expects
//! `1 <= i, j <= n`.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{arg_err, Error, Result};

/// Value of a link function.
///
/// Links whose formula contains `n/2` (symmetric circulant, doubly symmetric
/// Hankel) evaluate to [`LinkValue::Halves`], which stores twice the value so
/// that odd `n` stays exact.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LinkValue {
    Scalar(u64),
    /// `Halves(v)` is the number `v / 2`.
    Halves(u64),
    /// Ordered pair `(a, b)` with `a <= b`.
    Pair(u32, u32),
    /// The integer `a^i * b^j`, kept as its exponents.
    Power {
        a: u32,
        b: u32,
        i: u32,
        j: u32,
    },
}

impl LinkValue {
    /// Builds an ordered pair, swapping the arguments if needed.
    pub fn pair(x: u32, y: u32) -> Self {
        if x <= y {
            LinkValue::Pair(x, y)
        } else {
            LinkValue::Pair(y, x)
        }
    }
}

impl fmt::Display for LinkValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            LinkValue::Scalar(v) => write!(f, "{v}"),
            LinkValue::Halves(v) if v % 2 == 0 => write!(f, "{}", v / 2),
            LinkValue::Halves(v) => write!(f, "{v}/2"),
            LinkValue::Pair(a, b) => write!(f, "({a},{b})"),
            LinkValue::Power { a, b, i, j } => write!(f, "{a}^{i}*{b}^{j}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TransformKind {
    /// `t -> t^2` on scalar values.
    Square,
    /// `Pair(i, j) -> a^i * b^j` for coprime `a, b >= 2`.
    CoprimePower { a: u32, b: u32 },
    /// Explicit lookup table.
    UserTable(BTreeMap<LinkValue, LinkValue>),
}

/// A map applied on top of a link function's values.
///
/// `injective` is the claim made at construction; [`is_injective_on_range`]
/// verifies it against an actual range.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transform {
    pub kind: TransformKind,
    pub injective: bool,
}

fn gcd(mut a: u32, mut b: u32) -> u32 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

impl Transform {
    pub fn square() -> Self {
        Transform { kind: TransformKind::Square, injective: true }
    }

    pub fn coprime_power(a: u32, b: u32) -> Result<Self> {
        if a < 2 || b < 2 || gcd(a, b) != 1 {
            return Err(arg_err!("coprimepower needs coprime bases >= 2, got ({a},{b})"));
        }
        Ok(Transform { kind: TransformKind::CoprimePower { a, b }, injective: true })
    }

    /// Lookup-table transform; it is flagged injective iff no two keys share a value.
    pub fn table(map: BTreeMap<LinkValue, LinkValue>) -> Self {
        let mut images: Vec<LinkValue> = map.values().copied().collect();
        images.sort_unstable();
        let before = images.len();
        images.dedup();
        let injective = images.len() == before;
        Transform { kind: TransformKind::UserTable(map), injective }
    }

    /// `t -> n/2 - |n/2 - t|` on `t = 0..n`, the fold turning `|i-j|` into
    /// the symmetric-circulant link and `(i+j) mod n` into the doubly symmetric
    /// Hankel link.
    pub fn half_fold(n: usize) -> Self {
        let n = n as u64;
        let map = (0..n).map(|t| (LinkValue::Scalar(t), LinkValue::Halves(fold2(n, t)))).collect();
        Transform::table(map)
    }

    /// `s -> s mod n` on `s = 2..=2n`, turning the Hankel link into the reverse circulant one.
    pub fn modulo(n: usize) -> Self {
        let n = n as u64;
        let map = (2..=2 * n).map(|s| (LinkValue::Scalar(s), LinkValue::Scalar(s % n))).collect();
        Transform::table(map)
    }

    /// `s -> n/2 - |n/2 - (s mod n)|` on `s = 2..=2n`, turning the Hankel
    /// link into the doubly symmetric Hankel one.
    pub fn modulo_fold(n: usize) -> Self {
        let n = n as u64;
        let map = (2..=2 * n).map(|s| (LinkValue::Scalar(s), LinkValue::Halves(fold2(n, s % n)))).collect();
        Transform::table(map)
    }

    pub fn apply(&self, v: LinkValue) -> Result<LinkValue> {
        match (&self.kind, v) {
            (TransformKind::Square, LinkValue::Scalar(t)) => {
                t.checked_mul(t).map(LinkValue::Scalar).ok_or(Error::UndefinedTransform(v))
            }
            (TransformKind::CoprimePower { a, b }, LinkValue::Pair(i, j)) => {
                Ok(LinkValue::Power { a: *a, b: *b, i, j })
            }
            (TransformKind::UserTable(map), _) => map.get(&v).copied().ok_or(Error::UndefinedTransform(v)),
            _ => Err(Error::UndefinedTransform(v)),
        }
    }
}

/// Twice `n/2 - |n/2 - t|`, all in integers.
fn fold2(n: u64, t: u64) -> u64 {
    n - (n as i64 - 2 * t as i64).unsigned_abs()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LinkFunction {
    Wigner,
    Toeplitz,
    Hankel,
    SymmetricCirculant,
    ReverseCirculant,
    DoublySymmetricHankel,
    Composed(Box<Transform>, Box<LinkFunction>),
}

impl LinkFunction {
    pub const BUILTINS: [LinkFunction; 6] = [
        LinkFunction::Wigner,
        LinkFunction::Toeplitz,
        LinkFunction::Hankel,
        LinkFunction::SymmetricCirculant,
        LinkFunction::ReverseCirculant,
        LinkFunction::DoublySymmetricHankel,
    ];

    pub fn eval(&self, i: usize, j: usize, n: usize) -> Result<LinkValue> {
        if i == 0 || j == 0 || i > n || j > n {
            return Err(arg_err!("index ({i},{j}) out of range 1..={n}"));
        }
        self.eval_unchecked(i as u64, j as u64, n as u64)
    }

    fn eval_unchecked(&self, i: u64, j: u64, n: u64) -> Result<LinkValue> {
        let diff = i.abs_diff(j);
        Ok(match self {
            LinkFunction::Wigner => LinkValue::pair(i as u32, j as u32),
            LinkFunction::Toeplitz => LinkValue::Scalar(diff),
            LinkFunction::Hankel => LinkValue::Scalar(i + j),
            LinkFunction::SymmetricCirculant => LinkValue::Halves(fold2(n, diff)),
            LinkFunction::ReverseCirculant => LinkValue::Scalar((i + j) % n),
            LinkFunction::DoublySymmetricHankel => LinkValue::Halves(fold2(n, (i + j) % n)),
            LinkFunction::Composed(t, base) => return t.apply(base.eval_unchecked(i, j, n)?),
        })
    }

    /// Short upper-case name used in tables (`W`, `T`, `H`, `SC`, `RC`, `DH`).
    pub fn symbol(&self) -> String {
        match self {
            LinkFunction::Wigner => "W".to_string(),
            LinkFunction::Toeplitz => "T".to_string(),
            LinkFunction::Hankel => "H".to_string(),
            LinkFunction::SymmetricCirculant => "SC".to_string(),
            LinkFunction::ReverseCirculant => "RC".to_string(),
            LinkFunction::DoublySymmetricHankel => "DH".to_string(),
            LinkFunction::Composed(..) => self.to_string(),
        }
    }
}

impl fmt::Display for LinkFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LinkFunction::Wigner => f.write_str("wigner"),
            LinkFunction::Toeplitz => f.write_str("toeplitz"),
            LinkFunction::Hankel => f.write_str("hankel"),
            LinkFunction::SymmetricCirculant => f.write_str("symcirc"),
            LinkFunction::ReverseCirculant => f.write_str("revcirc"),
            LinkFunction::DoublySymmetricHankel => f.write_str("dsymhankel"),
            LinkFunction::Composed(t, base) => match &t.kind {
                TransformKind::Square => write!(f, "square({base})"),
                TransformKind::CoprimePower { a, b } => write!(f, "coprimepower({a},{b},{base})"),
                TransformKind::UserTable(map) => write!(f, "table[{}]({base})", map.len()),
            },
        }
    }
}

impl FromStr for LinkFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let simple = match s {
            "wigner" => Some(LinkFunction::Wigner),
            "toeplitz" => Some(LinkFunction::Toeplitz),
            "hankel" => Some(LinkFunction::Hankel),
            "symcirc" => Some(LinkFunction::SymmetricCirculant),
            "revcirc" => Some(LinkFunction::ReverseCirculant),
            "dsymhankel" => Some(LinkFunction::DoublySymmetricHankel),
            _ => None,
        };
        if let Some(link) = simple {
            return Ok(link);
        }
        let unknown = || arg_err!("unknown link `{s}`");
        let open = s.find('(').ok_or_else(unknown)?;
        let inner = s[open + 1..].strip_suffix(')').ok_or_else(unknown)?;
        match &s[..open] {
            "square" => Ok(compose(Transform::square(), inner.parse()?)),
            "coprimepower" => {
                let mut parts = inner.splitn(3, ',');
                let mut base_num =
                    || -> Result<u32> { parts.next().and_then(|p| p.trim().parse().ok()).ok_or_else(unknown) };
                let a = base_num()?;
                let b = base_num()?;
                let base = parts.next().ok_or_else(unknown)?.parse()?;
                Ok(compose(Transform::coprime_power(a, b)?, base))
            }
            _ => Err(unknown()),
        }
    }
}

/// `transform ∘ base`. Domain problems surface lazily at evaluation.
pub fn compose(transform: Transform, base: LinkFunction) -> LinkFunction {
    LinkFunction::Composed(Box::new(transform), Box::new(base))
}

/// The `n x n` grid of a link function, with values replaced by dense ids.
///
/// Ids follow the sorted order of the distinct link values, so id order and
/// value order agree.
#[derive(Clone, Debug)]
pub struct LinkTable {
    n: usize,
    ids: Vec<u32>,
    values: Vec<LinkValue>,
}

impl LinkTable {
    pub fn build(link: &LinkFunction, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(arg_err!("dimension must be positive"));
        }
        let mut upper = Vec::with_capacity(n * (n + 1) / 2);
        for i in 1..=n {
            for j in i..=n {
                upper.push(link.eval(i, j, n)?);
            }
        }
        let mut values = upper.clone();
        values.sort_unstable();
        values.dedup();
        let mut ids = vec![0u32; n * n];
        let mut it = upper.iter();
        for i in 0..n {
            for j in i..n {
                let v = it.next().expect("upper triangle length");
                let id = values.binary_search(v).expect("value present") as u32;
                ids[i * n + j] = id;
                ids[j * n + i] = id;
            }
        }
        Ok(LinkTable { n, ids, values })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Sorted distinct values; `values()[id]` is the value carrying `id`.
    pub fn values(&self) -> &[LinkValue] {
        &self.values
    }

    /// Number of distinct values (`k_n`).
    pub fn distinct(&self) -> usize {
        self.values.len()
    }

    /// Id at 0-based cell `(r, c)`.
    #[inline]
    pub fn id(&self, r: usize, c: usize) -> u32 {
        self.ids[r * self.n + c]
    }

    /// Row-major ids, 0-based.
    pub fn ids(&self) -> &[u32] {
        &self.ids
    }

    /// Largest number of repeats of one value within a single row.
    pub fn row_delta(&self) -> usize {
        let mut counts = vec![0u32; self.values.len()];
        let mut best = 0u32;
        for row in self.ids.chunks_exact(self.n) {
            for &id in row {
                counts[id as usize] += 1;
                best = best.max(counts[id as usize]);
            }
            for &id in row {
                counts[id as usize] = 0;
            }
        }
        best as usize
    }

    /// Largest number of cells sharing one value.
    pub fn max_multiplicity(&self) -> usize {
        let mut counts = vec![0usize; self.values.len()];
        for &id in &self.ids {
            counts[id as usize] += 1;
        }
        counts.into_iter().max().unwrap_or(0)
    }
}

/// `Δ_L` (row sup at this `n`), `k_n` and `α_n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LinkProfile {
    pub delta: usize,
    pub kn: usize,
    pub alphan: usize,
    pub n: usize,
}

pub fn profile(link: &LinkFunction, n: usize) -> Result<LinkProfile> {
    if n < 2 {
        return Err(arg_err!("profile needs n >= 2, got {n}"));
    }
    Ok(profile_of_table(&LinkTable::build(link, n)?))
}

pub fn profile_of_table(table: &LinkTable) -> LinkProfile {
    LinkProfile { delta: table.row_delta(), kn: table.distinct(), alphan: table.max_multiplicity(), n: table.n() }
}

/// Profile of the pair link `(L_X, L_Y)` of a Schur-Hadamard product.
///
/// `delta` is `min(Δ_X, Δ_Y)`, the bound the product inherits, not a row scan
/// of the pair link.
pub fn profile_product(x: &LinkFunction, y: &LinkFunction, n: usize) -> Result<LinkProfile> {
    if n < 2 {
        return Err(arg_err!("profile needs n >= 2, got {n}"));
    }
    let tx = LinkTable::build(x, n)?;
    let ty = LinkTable::build(y, n)?;
    let ky = ty.distinct() as u64;
    let mut keys: Vec<u64> = tx.ids().iter().zip(ty.ids()).map(|(&a, &b)| a as u64 * ky + b as u64).collect();
    keys.sort_unstable();
    let (mut kn, mut alphan, mut run) = (0usize, 0usize, 0usize);
    for (idx, key) in keys.iter().enumerate() {
        if idx == 0 || keys[idx - 1] != *key {
            kn += 1;
            run = 0;
        }
        run += 1;
        alphan = alphan.max(run);
    }
    Ok(LinkProfile { delta: tx.row_delta().min(ty.row_delta()), kn, alphan, n })
}

/// True iff `transform` is defined and collision-free on the range of `base` at `n`.
pub fn is_injective_on_range(transform: &Transform, base: &LinkFunction, n: usize) -> Result<bool> {
    if n < 2 {
        return Err(arg_err!("injectivity check needs n >= 2, got {n}"));
    }
    let table = LinkTable::build(base, n)?;
    let mut images = Vec::with_capacity(table.distinct());
    for &v in table.values() {
        match transform.apply(v) {
            Ok(img) => images.push(img),
            Err(_) => return Ok(false),
        }
    }
    images.sort_unstable();
    let before = images.len();
    images.dedup();
    Ok(images.len() == before)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table1_values() {
        assert_eq!(LinkFunction::Toeplitz.eval(3, 7, 9).unwrap(), LinkValue::Scalar(4));
        assert_eq!(LinkFunction::Wigner.eval(5, 2, 6).unwrap(), LinkValue::Pair(2, 5));
        assert_eq!(LinkFunction::ReverseCirculant.eval(4, 9, 10).unwrap(), LinkValue::Scalar(3));
        assert_eq!(LinkFunction::Toeplitz.eval(4, 4, 9).unwrap(), LinkValue::Scalar(0));
        assert_eq!(LinkFunction::Hankel.eval(4, 4, 9).unwrap(), LinkValue::Scalar(8));
        // n = 5: |i-j| = 3 folds to 5/2 - 1/2 = 2.
        assert_eq!(LinkFunction::SymmetricCirculant.eval(1, 4, 5).unwrap(), LinkValue::Halves(4));
        // n = 5: (2+4) mod 5 = 1, 5/2 - 3/2 = 1.
        assert_eq!(LinkFunction::DoublySymmetricHankel.eval(2, 4, 5).unwrap(), LinkValue::Halves(2));
    }

    #[test]
    fn out_of_range_index() {
        assert!(matches!(LinkFunction::Toeplitz.eval(0, 1, 3), Err(Error::Argument(_))));
        assert!(matches!(LinkFunction::Toeplitz.eval(1, 4, 3), Err(Error::Argument(_))));
    }

    #[test]
    fn profiles() {
        assert_eq!(profile(&LinkFunction::Wigner, 7).unwrap().delta, 1);
        assert_eq!(profile(&LinkFunction::Toeplitz, 5).unwrap().delta, 2);
        let t4 = profile(&LinkFunction::Toeplitz, 4).unwrap();
        assert_eq!((t4.kn, t4.alphan), (4, 6));
        assert_eq!(profile(&LinkFunction::Hankel, 4).unwrap().delta, 1);
        assert!(profile(&LinkFunction::Hankel, 1).is_err());
    }

    #[test]
    fn product_profile_examples() {
        let w = profile_product(&LinkFunction::Wigner, &LinkFunction::Hankel, 5).unwrap();
        assert_eq!((w.kn, w.alphan), (15, 2));
        let tt = profile_product(&LinkFunction::Toeplitz, &LinkFunction::Toeplitz, 6).unwrap();
        let t = profile(&LinkFunction::Toeplitz, 6).unwrap();
        assert_eq!((tt.kn, tt.alphan), (t.kn, t.alphan));
        let th = profile_product(&LinkFunction::Toeplitz, &LinkFunction::Hankel, 4).unwrap();
        assert!(th.kn >= 7 && th.kn <= 4 + 7);
    }

    #[test]
    fn composition_examples() {
        let sq = compose(Transform::square(), LinkFunction::Toeplitz);
        assert_eq!(sq.eval(1, 4, 5).unwrap(), LinkValue::Scalar(9));
        let cp = compose(Transform::coprime_power(2, 3).unwrap(), LinkFunction::Wigner);
        assert_eq!(cp.eval(5, 2, 6).unwrap(), LinkValue::Power { a: 2, b: 3, i: 2, j: 5 });
        let bad = compose(Transform::square(), LinkFunction::Wigner);
        assert_eq!(bad.eval(1, 2, 3), Err(Error::UndefinedTransform(LinkValue::Pair(1, 2))));
        assert!(Transform::coprime_power(4, 6).is_err());
    }

    #[test]
    fn identity_table_keeps_values() {
        let table = LinkTable::build(&LinkFunction::Hankel, 6).unwrap();
        let id = Transform::table(table.values().iter().map(|&v| (v, v)).collect());
        assert!(id.injective);
        let link = compose(id, LinkFunction::Hankel);
        for i in 1..=6 {
            for j in 1..=6 {
                assert_eq!(link.eval(i, j, 6), LinkFunction::Hankel.eval(i, j, 6));
            }
        }
    }

    #[test]
    fn injectivity_examples() {
        assert!(is_injective_on_range(&Transform::square(), &LinkFunction::Toeplitz, 9).unwrap());
        let zero = Transform::table((0..3).map(|t| (LinkValue::Scalar(t), LinkValue::Scalar(0))).collect());
        assert!(!zero.injective);
        assert!(!is_injective_on_range(&zero, &LinkFunction::Toeplitz, 3).unwrap());
        let cp = Transform::coprime_power(2, 3).unwrap();
        assert!(is_injective_on_range(&cp, &LinkFunction::Wigner, 6).unwrap());
    }

    #[test]
    fn parse_names_round_trip() {
        for name in [
            "wigner",
            "toeplitz",
            "hankel",
            "symcirc",
            "revcirc",
            "dsymhankel",
            "square(toeplitz)",
            "coprimepower(2,3,wigner)",
        ] {
            let link: LinkFunction = name.parse().unwrap();
            assert_eq!(link.to_string(), name);
        }
        assert!("toeplitzz".parse::<LinkFunction>().is_err());
        assert!("coprimepower(2,4,wigner)".parse::<LinkFunction>().is_err());
    }

    #[test]
    fn n_dependent_transforms_reproduce_circulant_links() {
        for n in [5usize, 8, 11] {
            let pairs = [
                (LinkFunction::Toeplitz, Transform::half_fold(n), LinkFunction::SymmetricCirculant),
                (LinkFunction::Hankel, Transform::modulo(n), LinkFunction::ReverseCirculant),
                (LinkFunction::Hankel, Transform::modulo_fold(n), LinkFunction::DoublySymmetricHankel),
                (LinkFunction::ReverseCirculant, Transform::half_fold(n), LinkFunction::DoublySymmetricHankel),
            ];
            for (base, rho, target) in pairs {
                let composed = compose(rho, base);
                for i in 1..=n {
                    for j in 1..=n {
                        assert_eq!(composed.eval(i, j, n), target.eval(i, j, n));
                    }
                }
            }
        }
    }
}
