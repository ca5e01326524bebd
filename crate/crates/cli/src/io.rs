//! CSV and manifest serialization.
//!
//! Floats are written with 17 significant digits, which round-trips every
//! finite `f64` exactly.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use cci_core::{
    chemical_potential_density, compute_profiles, energy_density, GridFunction, ModelParams,
};
use serde_json::{Map, Value};

use crate::error::{io_err, CliError, Result};

pub const FORMAT_VERSION: u64 = 1;
pub const MANIFEST_FILE: &str = "manifest.json";
pub const ORBITAL_HEADER: [&str; 4] = ["phi", "re", "im", "density"];
pub const PROFILE_HEADER: [&str; 9] = [
    "r0",
    "S_re",
    "S_im",
    "K_re",
    "K_im",
    "W_re",
    "W_im",
    "eps_density_re",
    "mu_re",
];

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Table of floats with a header row.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            for (i, v) in row.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&fmt_f64(*v));
            }
            out.push('\n');
        }
        out
    }

    pub fn parse_csv(text: &str, path: &Path) -> Result<Self> {
        let err = |message: String| CliError::Parse {
            path: path.to_path_buf(),
            message,
        };
        let mut lines = text.lines();
        let header: Vec<String> = lines
            .next()
            .ok_or_else(|| err("missing header".into()))?
            .split(',')
            .map(str::to_string)
            .collect();
        let mut rows = Vec::new();
        for (i, line) in lines.enumerate() {
            let row = line
                .split(',')
                .map(|f| {
                    f.parse::<f64>()
                        .map_err(|e| err(format!("row {}: {e}", i + 1)))
                })
                .collect::<Result<Vec<f64>>>()?;
            if row.len() != header.len() {
                return Err(err(format!("row {} has {} fields", i + 1, row.len())));
            }
            rows.push(row);
        }
        Ok(Table { header, rows })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_csv()).map_err(io_err(path))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        Self::parse_csv(&text, path)
    }
}

pub fn orbital_table(phi: &GridFunction) -> Table {
    let mut t = Table::new(&ORBITAL_HEADER);
    for (x, z) in phi.grid().nodes().iter().zip(phi.values()) {
        t.push(vec![*x, z.re, z.im, z.norm_sqr()]);
    }
    t
}

/// Profiles of a unit-norm orbital, rows ordered by ascending `r₀`.
pub fn profile_table(phi: &GridFunction, params: &ModelParams, eps: f64) -> Result<Table> {
    let profiles = compute_profiles(phi, params)?;
    let grid = phi.grid();
    let m = grid.len();
    let mut t = Table::new(&PROFILE_HEADER);
    for s in (m / 2..m).chain(0..m / 2) {
        let (sv, kv, wv) = (profiles.s.at(s), profiles.k.at(s), profiles.w.at(s));
        t.push(vec![
            grid.shift_value(s),
            sv.re,
            sv.im,
            kv.re,
            kv.im,
            wv.re,
            wv.im,
            energy_density(&profiles, params, s).re,
            chemical_potential_density(&profiles, params, eps, s).re,
        ]);
    }
    Ok(t)
}

/// Flat JSON object of scalars and string lists.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Manifest {
    fields: Map<String, Value>,
}

impl Manifest {
    pub fn new() -> Self {
        let mut m = Manifest::default();
        m.set("format_version", FORMAT_VERSION);
        m
    }

    pub fn set(&mut self, key: &str, value: impl Into<Value>) {
        self.fields.insert(key.to_string(), value.into());
    }

    /// Stores a float; non-finite values become `null`.
    pub fn set_f64(&mut self, key: &str, value: f64) {
        self.fields.insert(
            key.to_string(),
            serde_json::Number::from_f64(value).map_or(Value::Null, Value::Number),
        );
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.fields.get(key)
    }

    pub fn f64(&self, key: &str) -> Option<f64> {
        self.fields.get(key).and_then(Value::as_f64)
    }

    pub fn remove(&mut self, key: &str) -> Option<Value> {
        self.fields.remove(key)
    }

    pub fn keys(&self) -> impl Iterator<Item = &String> {
        self.fields.keys()
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(&self.fields)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(Manifest {
            fields: serde_json::from_str(text)?,
        })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        Self::from_json(&text)
    }

    /// Writes `dir/manifest.json` through a temporary file and a rename so a
    /// reader never sees a partial manifest.
    pub fn write_atomic(&self, dir: &Path) -> Result<PathBuf> {
        let target = dir.join(MANIFEST_FILE);
        let tmp = dir.join(format!(".{MANIFEST_FILE}.tmp"));
        fs::write(&tmp, self.to_json()?).map_err(io_err(&tmp))?;
        fs::rename(&tmp, &target).map_err(io_err(&target))?;
        Ok(target)
    }
}

/// Quotes a CSV text field when needed.
pub fn csv_text(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        let mut out = String::from("\"");
        for c in s.chars() {
            match c {
                '"' => out.push_str("\"\""),
                '\n' | '\r' => out.push(' '),
                c => out.push(c),
            }
        }
        out.push('"');
        out
    } else {
        s.to_string()
    }
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(io_err(path))
}

pub(crate) fn push_line(buf: &mut String, line: std::fmt::Arguments<'_>) {
    buf.write_fmt(line)
        .expect("writing to a String cannot fail");
    buf.push('\n');
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip_through_text() {
        for x in [
            0.0,
            -0.0,
            1.0 / 3.0,
            std::f64::consts::PI,
            1e-308,
            5e-324,
            -1.7976931348623157e308,
        ] {
            let back: f64 = fmt_f64(x).parse().unwrap();
            assert_eq!(back.to_bits(), x.to_bits(), "{x}");
        }
    }

    proptest::proptest! {
        #[test]
        fn any_finite_table_round_trips(
            rows in proptest::collection::vec(
                proptest::collection::vec(proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO, 3),
                0..20,
            )
        ) {
            let mut t = Table::new(&["x", "y", "z"]);
            for r in rows {
                t.push(r);
            }
            let back = Table::parse_csv(&t.to_csv(), Path::new("mem")).unwrap();
            let bits = |t: &Table| t.rows.iter().flatten().map(|v| v.to_bits()).collect::<Vec<_>>();
            proptest::prop_assert_eq!(bits(&back), bits(&t));
        }
    }

    #[test]
    fn table_round_trips() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec![0.1, -2.5e-17]);
        t.push(vec![1.0 / 7.0, 123456789.12345679]);
        let back = Table::parse_csv(&t.to_csv(), Path::new("mem")).unwrap();
        assert_eq!(back, t);
        assert!(Table::parse_csv("a,b\n1\n", Path::new("mem")).is_err());
    }

    #[test]
    fn manifest_is_flat_json() {
        let mut m = Manifest::new();
        m.set_f64("eps", -0.1);
        m.set_f64("bad", f64::NAN);
        m.set("artifacts", vec!["a.csv".to_string()]);
        let back = Manifest::from_json(&m.to_json().unwrap()).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.f64("eps"), Some(-0.1));
        assert_eq!(back.get("bad"), Some(&Value::Null));
    }

    #[test]
    fn csv_text_quotes_separators() {
        assert_eq!(csv_text("plain"), "plain");
        assert_eq!(csv_text("a,\"b\"\nc"), "\"a,\"\"b\"\" c\"");
    }
}
