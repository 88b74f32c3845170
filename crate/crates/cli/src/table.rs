//! CSV tables in C `%.12e` style plus their metadata sidecars.

use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};

use crate::config::RunConfig;
use crate::error::CliError;

/// `printf("%.12e")`: twelve mantissa digits, signed exponent of at least
/// two digits.
pub fn fmt_e(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let s = format!("{v:.12e}");
    let (mant, exp) = s.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mant}e{sign}{:02}", exp.abs())
}

/// One CSV cell.
#[derive(Debug, Clone)]
pub enum Cell {
    F(f64),
    S(String),
    I(i64),
    U(usize),
    B(bool),
}

impl Cell {
    fn render(&self) -> String {
        match *self {
            Cell::F(v) => fmt_e(v),
            Cell::S(ref v) => v.clone(),
            Cell::I(v) => v.to_string(),
            Cell::U(v) => v.to_string(),
            Cell::B(v) => (v as u8).to_string(),
        }
    }
}

/// A finished table ready to be written.
pub struct Table {
    pub name: &'static str,
    pub header: &'static [&'static str],
    pub rows: Vec<Vec<Cell>>,
    /// Extra metadata entries.
    pub meta: Map<String, Value>,
}

impl Table {
    pub fn new(name: &'static str, header: &'static [&'static str]) -> Self {
        Table {
            name,
            header,
            rows: Vec::new(),
            meta: Map::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn note(&mut self, key: &str, value: impl Into<Value>) {
        self.meta.insert(key.into(), value.into());
    }

    /// Write `<name>` and `<name>.meta.json` into `dir`. Wall time is the
    /// only field that differs between identical runs, and it lives in the
    /// sidecar.
    pub fn write(&self, dir: &Path, command: &str, cfg: &RunConfig, wall_time: f64) -> Result<PathBuf, CliError> {
        std::fs::create_dir_all(dir)?;
        let path = dir.join(self.name);
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(self.header)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|c| c.render()))?;
        }
        w.flush()?;
        let mut meta = json!({
            "command": command,
            "csv": self.name,
            "rows": self.rows.len(),
            "config_hash": cfg.hash(),
            "config": cfg,
            "versions": {
                "qp-spectra": env!("CARGO_PKG_VERSION"),
                "precision_bits": qp_spectra::arithmetic::precision_bits_from_env(),
            },
            "wall_time_s": wall_time,
        });
        let obj = meta.as_object_mut().unwrap();
        for (k, v) in &self.meta {
            obj.insert(k.clone(), v.clone());
        }
        let text = serde_json::to_string_pretty(&meta).expect("metadata serializes");
        std::fs::write(dir.join(format!("{}.meta.json", self.name)), text + "\n")?;
        Ok(path)
    }
}
