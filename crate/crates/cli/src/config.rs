//! Run configuration and its canonical JSON form.

use std::path::{Path, PathBuf};

use qp_spectra::potential::PotentialKind;
use qp_spectra::{Frequency, PotentialSpec};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

/// Per-command knobs. Unset fields fall back to command defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Options {
    pub p: Option<u64>,
    pub q: Option<u64>,
    pub theta: Option<f64>,
    pub x: Option<f64>,
    pub energy: Option<f64>,
    pub convergents: Option<usize>,
    pub grid: Option<usize>,
    pub a: Option<i64>,
    pub b: Option<i64>,
    pub window: Option<(f64, f64)>,
    pub count: Option<usize>,
    pub det_samples: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub potential: PotentialSpec,
    pub alpha: String,
    pub n: usize,
    pub x_samples: usize,
    pub e_min: f64,
    pub e_max: f64,
    pub e_steps: usize,
    #[serde(default)]
    pub seed: Option<u64>,
    pub threads: usize,
    pub out_dir: PathBuf,
    #[serde(default)]
    pub options: Options,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            potential: PotentialSpec::maryland(2.0),
            alpha: "golden".into(),
            n: 987,
            x_samples: 200,
            e_min: -8.0,
            e_max: 8.0,
            e_steps: 129,
            seed: None,
            threads: 1,
            out_dir: PathBuf::from("out"),
            options: Options::default(),
        }
    }
}

fn invalid(field: &str, message: impl Into<String>) -> CliError {
    CliError::ConfigInvalid {
        field: field.into(),
        message: message.into(),
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| {
            // serde reports the offending key in its message
            invalid("<document>", format!("line {} column {}: {e}", e.line(), e.column()))
        })?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| invalid("<file>", format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// SHA-256 of the canonical JSON with `threads` and `out_dir` blanked,
    /// so runs that differ only in scheduling or location share a hash.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.threads = 0;
        c.out_dir = PathBuf::new();
        let digest = Sha256::digest(c.to_json().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn frequency(&self) -> Result<Frequency, CliError> {
        Frequency::parse(&self.alpha).map_err(|e| invalid("alpha", e.to_string()))
    }

    pub fn energy_grid(&self) -> Vec<f64> {
        qp_spectra::ids::energy_grid(self.e_min, self.e_max, self.e_steps)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.potential.validate().map_err(|e| {
            let field = match self.potential.kind {
                PotentialKind::MarylandTan { .. } => "potential.lambda",
                PotentialKind::LogLinear { .. } => "potential.gamma_lin",
            };
            let field = if e.to_string().contains("guard") {
                "potential.singularity_guard"
            } else {
                field
            };
            invalid(field, e.to_string())
        })?;
        self.frequency()?;
        if self.n == 0 {
            return Err(invalid("n", "must be at least 1"));
        }
        if self.x_samples == 0 {
            return Err(invalid("x_samples", "must be at least 1"));
        }
        if !(self.e_min.is_finite() && self.e_max.is_finite()) {
            return Err(invalid("e_min", "energy range must be finite"));
        }
        if self.e_min >= self.e_max {
            return Err(invalid("e_max", format!("must exceed e_min = {}", self.e_min)));
        }
        if self.e_steps < 2 {
            return Err(invalid("e_steps", "need at least 2 grid points"));
        }
        if self.threads == 0 {
            return Err(invalid("threads", "must be at least 1"));
        }
        let o = &self.options;
        if let Some(q) = o.q {
            if q == 0 {
                return Err(invalid("options.q", "must be at least 1"));
            }
            if let Some(p) = o.p {
                if q > 1 && (p == 0 || p >= q) {
                    return Err(invalid("options.p", format!("need 0 < p < q = {q}")));
                }
            }
        }
        if let Some(t) = o.theta {
            if !t.is_finite() {
                return Err(invalid("options.theta", "must be finite"));
            }
        }
        if let (Some(a), Some(b)) = (o.a, o.b) {
            if b < a {
                return Err(invalid("options.b", format!("must be >= a = {a}")));
            }
        }
        if let Some((lo, hi)) = o.window {
            if !(lo < hi) {
                return Err(invalid("options.window", "need lo < hi"));
            }
        }
        for (name, v) in [
            ("options.grid", o.grid),
            ("options.count", o.count),
            ("options.det_samples", o.det_samples),
        ] {
            if v == Some(0) {
                return Err(invalid(name, "must be at least 1"));
            }
        }
        Ok(())
    }
}
