//! Input sequences, patterned matrix realizations and Schur-Hadamard products.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::distr::{Distribution, Uniform};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{arg_err, Error, Result};
use crate::linkfn::{LinkFunction, LinkTable};

const SQRT_3: f64 = 1.732_050_807_568_877_2;

/// Mean-zero, variance-one input laws.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum InputDistribution {
    /// `±1` with probability 1/2 each.
    Rademacher,
    /// Uniform on `[-√3, √3]`.
    UniformScaled,
    StandardGaussian,
}

impl InputDistribution {
    pub const ALL: [InputDistribution; 3] =
        [InputDistribution::Rademacher, InputDistribution::UniformScaled, InputDistribution::StandardGaussian];

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            InputDistribution::Rademacher => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            InputDistribution::UniformScaled => {
                Uniform::new_inclusive(-SQRT_3, SQRT_3).expect("finite bounds").sample(rng)
            }
            InputDistribution::StandardGaussian => rng.sample(StandardNormal),
        }
    }
}

impl fmt::Display for InputDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InputDistribution::Rademacher => "rademacher",
            InputDistribution::UniformScaled => "uniform",
            InputDistribution::StandardGaussian => "gaussian",
        })
    }
}

impl FromStr for InputDistribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "rademacher" => Ok(InputDistribution::Rademacher),
            "uniform" => Ok(InputDistribution::UniformScaled),
            "gaussian" => Ok(InputDistribution::StandardGaussian),
            other => Err(arg_err!("unknown distribution `{other}`")),
        }
    }
}

/// Where a realization's inputs came from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Provenance {
    pub link: String,
    pub distribution: String,
    pub seed: u64,
}

/// A dense symmetric `n x n` matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixRealization {
    n: usize,
    entries: Vec<f64>,
    scaled: bool,
    provenance: Vec<Provenance>,
}

impl MatrixRealization {
    /// Wraps explicit entries; rejects non-square or non-symmetric input.
    pub fn from_entries(n: usize, entries: Vec<f64>, scaled: bool) -> Result<Self> {
        if entries.len() != n * n {
            return Err(arg_err!("expected {} entries for n = {n}, got {}", n * n, entries.len()));
        }
        for i in 0..n {
            for j in 0..i {
                if entries[i * n + j].to_bits() != entries[j * n + i].to_bits() {
                    return Err(arg_err!("entries ({i},{j}) and ({j},{i}) differ"));
                }
            }
        }
        Ok(MatrixRealization { n, entries, scaled, provenance: Vec::new() })
    }

    pub fn identity(n: usize) -> Self {
        let mut entries = alloc::vec![0.0; n * n];
        for i in 0..n {
            entries[i * n + i] = 1.0;
        }
        MatrixRealization { n, entries, scaled: false, provenance: Vec::new() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// Entry at 0-based `(i, j)`.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn is_scaled(&self) -> bool {
        self.scaled
    }

    pub fn provenance(&self) -> &[Provenance] {
        &self.provenance
    }
}

/// One draw per distinct link value, consumed in sorted value order, then
/// placed at every cell carrying that value.
pub fn realize(link: &LinkFunction, dist: InputDistribution, n: usize, seed: u64) -> Result<MatrixRealization> {
    let table = LinkTable::build(link, n)?;
    let mut m = realize_table(&table, dist, seed);
    m.provenance[0].link = link.to_string();
    Ok(m)
}

/// [`realize`] for a prebuilt link table.
pub fn realize_table(table: &LinkTable, dist: InputDistribution, seed: u64) -> MatrixRealization {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inputs: Vec<f64> = (0..table.distinct()).map(|_| dist.sample(&mut rng)).collect();
    let entries = table.ids().iter().map(|&id| inputs[id as usize]).collect();
    MatrixRealization {
        n: table.n(),
        entries,
        scaled: false,
        provenance: alloc::vec![Provenance { link: String::new(), distribution: dist.to_string(), seed }],
    }
}

pub fn schur_product(a: &MatrixRealization, b: &MatrixRealization) -> Result<MatrixRealization> {
    if a.n != b.n {
        return Err(arg_err!("dimension mismatch: {} vs {}", a.n, b.n));
    }
    if a.scaled || b.scaled {
        return Err(Error::State("Schur-Hadamard product expects unscaled factors".to_string()));
    }
    let entries = a.entries.iter().zip(&b.entries).map(|(x, y)| x * y).collect();
    let mut provenance = a.provenance.clone();
    provenance.extend(b.provenance.iter().cloned());
    Ok(MatrixRealization { n: a.n, entries, scaled: false, provenance })
}

/// Multiplies every entry by `n^{-1/2}`.
pub fn scale(mut a: MatrixRealization) -> Result<MatrixRealization> {
    if a.scaled {
        return Err(Error::State("matrix is already scaled".to_string()));
    }
    let factor = 1.0 / libm::sqrt(a.n as f64);
    for x in &mut a.entries {
        *x *= factor;
    }
    a.scaled = true;
    Ok(a)
}

/// Which factor of a product a seed stream feeds.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StreamRole {
    X,
    Y,
}

impl StreamRole {
    pub const fn tag(self) -> u64 {
        match self {
            StreamRole::X => 0x58,
            StreamRole::Y => 0x59,
        }
    }
}

/// SplitMix64 finalizer.
pub const fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `splitmix64(splitmix64(splitmix64(master) ^ role_tag) ^ trial)`.
pub const fn child_seed(master: u64, role: StreamRole, trial: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(master) ^ role.tag()) ^ trial)
}

/// A Monte Carlo experiment on `n^{-1/2} (X_n ⊙ Y_n)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductSpec {
    pub link_x: LinkFunction,
    pub link_y: LinkFunction,
    pub dist_x: InputDistribution,
    pub dist_y: InputDistribution,
    pub n: usize,
    pub master_seed: u64,
    pub trials: usize,
    /// Diagnostic mode: feed Y from the X seed stream instead of its own.
    pub shared_stream: bool,
}

impl ProductSpec {
    pub fn new(
        link_x: LinkFunction,
        link_y: LinkFunction,
        dist: InputDistribution,
        n: usize,
        master_seed: u64,
        trials: usize,
    ) -> Self {
        ProductSpec { link_x, link_y, dist_x: dist, dist_y: dist, n, master_seed, trials, shared_stream: false }
    }

    pub fn seeds(&self, trial: usize) -> (u64, u64) {
        let x = child_seed(self.master_seed, StreamRole::X, trial as u64);
        let y = if self.shared_stream { x } else { child_seed(self.master_seed, StreamRole::Y, trial as u64) };
        (x, y)
    }

    pub fn label(&self) -> String {
        format!("{}*{}", self.link_x, self.link_y)
    }
}

/// Link tables for both factors, built once per experiment.
#[derive(Clone, Debug)]
pub struct ProductTables {
    pub x: LinkTable,
    pub y: LinkTable,
}

impl ProductTables {
    pub fn build(spec: &ProductSpec) -> Result<Self> {
        Ok(ProductTables { x: LinkTable::build(&spec.link_x, spec.n)?, y: LinkTable::build(&spec.link_y, spec.n)? })
    }
}

/// The scaled product matrix of one trial.
pub fn realize_trial(spec: &ProductSpec, tables: &ProductTables, trial: usize) -> Result<MatrixRealization> {
    let (sx, sy) = spec.seeds(trial);
    let mut x = realize_table(&tables.x, spec.dist_x, sx);
    x.provenance[0].link = spec.link_x.to_string();
    let mut y = realize_table(&tables.y, spec.dist_y, sy);
    y.provenance[0].link = spec.link_y.to_string();
    scale(schur_product(&x, &y)?)
}
