//! Run configuration: a flat JSON object, every key optional except
//! `master_seed`, with `key=value` overrides layered on top.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use schurlsd_core::ensemble::{InputDistribution, ProductSpec};
use schurlsd_core::words::canonicalize;
use schurlsd_core::{LinkFunction, Transform, Word};

use crate::output::{sha256_hex, to_json};
use crate::CliError;

/// Seed used by the built-in configurations when none is given.
pub const DEFAULT_MASTER_SEED: u64 = 20_240_601;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub master_seed: u64,
    pub link_x: String,
    pub link_y: String,
    pub distribution: String,
    /// Law of the second factor; `distribution` when absent.
    pub distribution_y: Option<String>,
    pub n: usize,
    pub trials: usize,
    pub h_max: usize,
    /// Feed both factors from one seed stream (diagnostic).
    pub shared_stream: bool,
    pub bins: usize,
    /// Histogram range; the pooled spectrum's extent when absent.
    pub hist_range: Option<[f64; 2]>,
    /// `auto`, `semicircle` or `none`.
    pub reference: String,
    pub export_matrix: bool,
    pub word_length: usize,
    pub word: Option<String>,
    pub word2: Option<String>,
    /// `star` (matched link values) or `slope` (matched increments).
    pub class: String,
    pub ladder: Vec<usize>,
    pub ladder_long: Vec<usize>,
    pub relation_ladder: Vec<usize>,
    /// `compatible`, `leadsto`, `implies` or `invariance`.
    pub relation: String,
    /// `square`, `coprimepower(a,b)`, `halffold`, `modulo` or `modulofold`.
    pub transform: String,
    pub check_ns: Vec<usize>,
    pub invariance_length: usize,
    pub tol: f64,
    pub ks_tol: f64,
    pub z_max: f64,
    /// Absolute tolerances on `β_2, β_4, β_6` for semicircle limits.
    pub semicircle_tol: [f64; 3],
    /// Absolute tolerance on `β_4` for the Toeplitz limit.
    pub toeplitz_tol: f64,
    /// `"all"`, a row number, or a list of row numbers.
    pub rows: Rows,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Rows {
    Keyword(String),
    One(u8),
    List(Vec<u8>),
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            master_seed: DEFAULT_MASTER_SEED,
            link_x: "toeplitz".into(),
            link_y: "hankel".into(),
            distribution: "rademacher".into(),
            distribution_y: None,
            n: 1000,
            trials: 20,
            h_max: 8,
            shared_stream: false,
            bins: 60,
            hist_range: None,
            reference: "auto".into(),
            export_matrix: false,
            word_length: 4,
            word: None,
            word2: None,
            class: "star".into(),
            ladder: vec![8, 16, 32, 64],
            ladder_long: vec![8, 16, 32],
            relation_ladder: vec![8, 16, 32],
            relation: "compatible".into(),
            transform: "square".into(),
            check_ns: vec![10, 20, 50],
            invariance_length: 4,
            tol: 0.03,
            ks_tol: 0.05,
            z_max: 3.0,
            semicircle_tol: [0.05, 0.15, 0.6],
            toeplitz_tol: 0.15,
            rows: Rows::Keyword("all".into()),
        }
    }
}

fn bad(key: &str, value: impl ToString, reason: impl ToString) -> CliError {
    CliError::Config { key: key.to_string(), value: value.to_string(), reason: reason.to_string() }
}

/// A `key=value` override; the value is read as JSON, falling back to a bare string.
pub fn parse_override(s: &str) -> Result<(String, Value), CliError> {
    let (key, raw) = s.split_once('=').ok_or_else(|| bad(s, "", "override must look like key=value"))?;
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    Ok((key.trim().to_string(), value))
}

impl RunConfig {
    /// Reads a config file; `master_seed` must be present unless `seed` is given.
    pub fn from_file(path: &Path, overrides: &[(String, Value)], seed: Option<u64>) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
        let value: Value = serde_json::from_str(&text).map_err(|e| bad("<file>", path.display(), e))?;
        let Value::Object(map) = value else {
            return Err(bad("<file>", path.display(), "config must be a JSON object"));
        };
        if !map.contains_key("master_seed") && seed.is_none() {
            return Err(bad("master_seed", "<missing>", "every config must set master_seed"));
        }
        Self::from_map(map, overrides, seed)
    }

    /// The built-in configuration with overrides applied.
    pub fn builtin(overrides: &[(String, Value)], seed: Option<u64>) -> Result<Self, CliError> {
        Self::from_map(Map::new(), overrides, seed)
    }

    fn from_map(
        mut map: Map<String, Value>,
        overrides: &[(String, Value)],
        seed: Option<u64>,
    ) -> Result<Self, CliError> {
        for (k, v) in overrides {
            map.insert(k.clone(), v.clone());
        }
        if let Some(s) = seed {
            map.insert("master_seed".into(), Value::from(s));
        }
        let defaults = serde_json::to_value(RunConfig::default())?;
        for (k, v) in &map {
            if defaults.get(k).is_none() {
                return Err(bad(k, v, "unknown config key"));
            }
            let mut single = Map::new();
            single.insert(k.clone(), v.clone());
            if let Err(e) = serde_json::from_value::<RunConfig>(Value::Object(single)) {
                return Err(bad(k, v, e));
            }
        }
        let cfg: RunConfig = serde_json::from_value(Value::Object(map))?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        self.link_x()?;
        self.link_y()?;
        self.dist_x()?;
        self.dist_y()?;
        self.word()?;
        self.word2()?;
        self.rows()?;
        if self.n == 0 {
            return Err(bad("n", self.n, "must be positive"));
        }
        if self.trials == 0 {
            return Err(bad("trials", self.trials, "must be positive"));
        }
        if self.h_max == 0 || self.h_max > schurlsd_core::spectral::MAX_MC_ORDER {
            return Err(bad("h_max", self.h_max, format!("must be in 1..={}", schurlsd_core::spectral::MAX_MC_ORDER)));
        }
        if self.bins == 0 {
            return Err(bad("bins", self.bins, "must be positive"));
        }
        if let Some([lo, hi]) = self.hist_range {
            if lo.is_nan() || hi.is_nan() || lo >= hi {
                return Err(bad("hist_range", format!("[{lo}, {hi}]"), "needs lo < hi"));
            }
        }
        for (key, ladder) in
            [("ladder", &self.ladder), ("ladder_long", &self.ladder_long), ("relation_ladder", &self.relation_ladder)]
        {
            if ladder.len() < 3 || ladder[0] == 0 || ladder.windows(2).any(|w| w[0] >= w[1]) {
                return Err(bad(key, format!("{ladder:?}"), "needs at least 3 strictly increasing positive sizes"));
            }
        }
        if !matches!(self.reference.as_str(), "auto" | "semicircle" | "none") {
            return Err(bad("reference", &self.reference, "expected auto, semicircle or none"));
        }
        if !matches!(self.class.as_str(), "star" | "slope") {
            return Err(bad("class", &self.class, "expected star or slope"));
        }
        if !matches!(self.relation.as_str(), "compatible" | "leadsto" | "implies" | "invariance") {
            return Err(bad("relation", &self.relation, "expected compatible, leadsto, implies or invariance"));
        }
        self.transform_at(8)?;
        for (key, x) in
            [("tol", self.tol), ("ks_tol", self.ks_tol), ("z_max", self.z_max), ("toeplitz_tol", self.toeplitz_tol)]
        {
            if !(x > 0.0 && x.is_finite()) {
                return Err(bad(key, x, "must be a positive number"));
            }
        }
        if self.semicircle_tol.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
            return Err(bad("semicircle_tol", format!("{:?}", self.semicircle_tol), "entries must be positive"));
        }
        Ok(())
    }

    pub fn link_x(&self) -> Result<LinkFunction, CliError> {
        self.link_x.parse().map_err(|e| bad("link_x", &self.link_x, e))
    }

    pub fn link_y(&self) -> Result<LinkFunction, CliError> {
        self.link_y.parse().map_err(|e| bad("link_y", &self.link_y, e))
    }

    pub fn dist_x(&self) -> Result<InputDistribution, CliError> {
        self.distribution.parse().map_err(|e| bad("distribution", &self.distribution, e))
    }

    pub fn dist_y(&self) -> Result<InputDistribution, CliError> {
        match &self.distribution_y {
            Some(d) => d.parse().map_err(|e| bad("distribution_y", d, e)),
            None => self.dist_x(),
        }
    }

    fn parse_word(key: &str, raw: &Option<String>) -> Result<Option<Word>, CliError> {
        match raw {
            None => Ok(None),
            Some(s) => {
                if s.is_empty() || !s.bytes().all(|b| b.is_ascii_lowercase()) {
                    return Err(bad(key, s, "words are written with letters a-z"));
                }
                canonicalize(s.as_bytes()).map(Some).map_err(|e| bad(key, s, e))
            }
        }
    }

    pub fn word(&self) -> Result<Option<Word>, CliError> {
        Self::parse_word("word", &self.word)
    }

    pub fn word2(&self) -> Result<Option<Word>, CliError> {
        Self::parse_word("word2", &self.word2)
    }

    /// Selected Table 2 rows, sorted and deduplicated.
    pub fn rows(&self) -> Result<Vec<u8>, CliError> {
        let shown = serde_json::to_string(&self.rows).unwrap_or_default();
        let mut rows = match &self.rows {
            Rows::Keyword(s) if s == "all" => vec![1, 2, 3, 4, 5],
            Rows::Keyword(_) => return Err(bad("rows", shown, "expected \"all\", a row number or a list")),
            Rows::One(r) => vec![*r],
            Rows::List(v) => v.clone(),
        };
        if rows.is_empty() || rows.iter().any(|r| !(1..=5).contains(r)) {
            return Err(bad("rows", shown, "rows are numbered 1 to 5"));
        }
        rows.sort_unstable();
        rows.dedup();
        Ok(rows)
    }

    /// The configured transform, instantiated at size `n`.
    pub fn transform_at(&self, n: usize) -> Result<Transform, CliError> {
        let t = self.transform.trim();
        match t {
            "square" => Ok(Transform::square()),
            "halffold" => Ok(Transform::half_fold(n)),
            "modulo" => Ok(Transform::modulo(n)),
            "modulofold" => Ok(Transform::modulo_fold(n)),
            _ => {
                let args = t
                    .strip_prefix("coprimepower(")
                    .and_then(|r| r.strip_suffix(')'))
                    .and_then(|r| r.split_once(','))
                    .and_then(|(a, b)| Some((a.trim().parse().ok()?, b.trim().parse().ok()?)));
                let (a, b) = args.ok_or_else(|| bad("transform", t, "unknown transform"))?;
                Transform::coprime_power(a, b).map_err(|e| bad("transform", t, e))
            }
        }
    }

    pub fn product_spec(&self) -> Result<ProductSpec, CliError> {
        let mut spec =
            ProductSpec::new(self.link_x()?, self.link_y()?, self.dist_x()?, self.n, self.master_seed, self.trials);
        spec.dist_y = self.dist_y()?;
        spec.shared_stream = self.shared_stream;
        Ok(spec)
    }

    /// SHA-256 of the canonical JSON form of the resolved configuration.
    pub fn hash(&self) -> Result<String, CliError> {
        Ok(sha256_hex(&to_json(self)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn with(pairs: &[&str]) -> Result<RunConfig, CliError> {
        let o: Vec<_> = pairs.iter().map(|s| parse_override(s).unwrap()).collect();
        RunConfig::builtin(&o, None)
    }

    #[test]
    fn defaults_validate() {
        let c = with(&[]).unwrap();
        assert_eq!(c.rows().unwrap(), [1, 2, 3, 4, 5]);
        assert_eq!(c.product_spec().unwrap().n, 1000);
    }

    #[test]
    fn overrides_parse_as_json() {
        let c = with(&["n=12", "link_x=wigner", "rows=[3,1,3]", "hist_range=[-3,3]"]).unwrap();
        assert_eq!(c.n, 12);
        assert_eq!(c.link_x().unwrap(), LinkFunction::Wigner);
        assert_eq!(c.rows().unwrap(), [1, 3]);
        assert_eq!(with(&["rows=4"]).unwrap().rows().unwrap(), [4]);
    }

    #[test]
    fn errors_name_key_and_value() {
        let cases = [
            (&["link_x=toeplits"][..], "link_x", "toeplits"),
            (&["distribution=cauchy"][..], "distribution", "cauchy"),
            (&["n=-3"][..], "n", "-3"),
            (&["bogus=1"][..], "bogus", "1"),
            (&["rows=[7]"][..], "rows", "7"),
            (&["word=ab1"][..], "word", "ab1"),
            (&["transform=cube"][..], "transform", "cube"),
            (&["ladder=[8,8,16]"][..], "ladder", "8"),
        ];
        for (ov, key, value) in cases {
            let msg = with(ov).unwrap_err().to_string();
            assert!(msg.contains(key) && msg.contains(value), "{msg}");
        }
    }

    #[test]
    fn file_requires_master_seed() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.json");
        std::fs::write(&p, r#"{"n": 10}"#).unwrap();
        let msg = RunConfig::from_file(&p, &[], None).unwrap_err().to_string();
        assert!(msg.contains("master_seed"), "{msg}");
        assert_eq!(RunConfig::from_file(&p, &[], Some(5)).unwrap().master_seed, 5);
        std::fs::write(&p, r#"{"master_seed": 9, "n": 10}"#).unwrap();
        let c = RunConfig::from_file(&p, &[], None).unwrap();
        assert_eq!((c.master_seed, c.n), (9, 10));
    }

    #[test]
    fn hash_tracks_content() {
        let a = with(&[]).unwrap();
        let b = with(&["n=999"]).unwrap();
        assert_eq!(a.hash().unwrap(), with(&[]).unwrap().hash().unwrap());
        assert_ne!(a.hash().unwrap(), b.hash().unwrap());
    }

    #[test]
    fn transforms_by_name() {
        let c = with(&["transform=coprimepower(2, 3)"]).unwrap();
        assert!(c.transform_at(5).unwrap().injective);
        assert!(!with(&["transform=halffold"]).unwrap().transform_at(6).unwrap().injective);
        assert!(with(&["transform=coprimepower(2,4)"]).is_err());
    }
}
