//! File formats: JSON with every float at 17 significant digits, CSV with a
//! config-hash header line, and atomic writes.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};
use sha2::{Digest, Sha256};

use crate::CliError;

/// Pretty JSON whose floats are written as `d.dddddddddddddddde±x`.
struct SigFormatter<'a>(PrettyFormatter<'a>);

macro_rules! delegate {
    ($($name:ident($($arg:ident: $ty:ty),*);)*) => {
        $(
            fn $name<W: ?Sized + Write>(&mut self, w: &mut W $(, $arg: $ty)*) -> io::Result<()> {
                self.0.$name(w $(, $arg)*)
            }
        )*
    };
}

impl Formatter for SigFormatter<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{}", sig17(value))
    }

    delegate! {
        begin_array();
        end_array();
        begin_array_value(first: bool);
        end_array_value();
        begin_object();
        end_object();
        begin_object_key(first: bool);
        begin_object_value();
        end_object_value();
    }
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn sig17(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn to_json<T: Serialize>(value: &T) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SigFormatter(PrettyFormatter::new()));
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(buf)
}

/// CSV text: a `# config_hash=` line, a header row, then the rows.
pub fn to_csv(config_hash: &str, header: &[&str], rows: &[Vec<CsvCell>]) -> Vec<u8> {
    let mut out = format!("# config_hash={config_hash}\n{}\n", header.join(","));
    for row in rows {
        let cells: Vec<String> = row.iter().map(CsvCell::render).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out.into_bytes()
}

#[derive(Clone, Copy, Debug)]
pub enum CsvCell {
    Int(u64),
    Float(f64),
}

impl CsvCell {
    fn render(&self) -> String {
        match *self {
            CsvCell::Int(i) => i.to_string(),
            CsvCell::Float(x) => sig17(x),
        }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

/// Writes through a temporary sibling and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let io_err = |source| CliError::Io { path: path.to_path_buf(), source };
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(io_err)?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, bytes).map_err(io_err)?;
    fs::rename(&tmp, path).map_err(io_err)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0] {
            assert_eq!(sig17(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(sig17(1.0), "1.0000000000000000e0");
    }

    #[test]
    fn json_uses_fixed_precision() {
        let v = serde_json::json!({ "a": [0.5, 2], "b": null });
        let text = String::from_utf8(to_json(&v).unwrap()).unwrap();
        assert!(text.contains("5.0000000000000000e-1"), "{text}");
        let back: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(back["a"][0].as_f64(), Some(0.5));
        assert_eq!(back["a"][1].as_u64(), Some(2));
    }

    #[test]
    fn csv_layout() {
        let text = to_csv("abc", &["i", "x"], &[vec![CsvCell::Int(1), CsvCell::Float(0.25)]]);
        assert_eq!(String::from_utf8(text).unwrap(), "# config_hash=abc\ni,x\n1,2.5000000000000000e-1\n");
    }

    #[test]
    fn atomic_write_leaves_no_temp() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sub/out.json");
        write_atomic(&p, b"{}").unwrap();
        assert_eq!(fs::read(&p).unwrap(), b"{}");
        assert!(!dir.path().join("sub/out.json.tmp").exists());
    }
}
