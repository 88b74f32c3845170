//! Unbounded Lipschitz-monotone 1-periodic potentials.
//!
//! A potential `f` is defined on `(0, 1)` and extended by periodicity. It
//! diverges to `-inf` at `0+` and to `+inf` at `1-`, and satisfies the
//! lower Lipschitz bound `f(y) - f(x) >= gamma * (y - x)` for `x < y`.
//!
//! Two concrete members are provided:
//!
//! * `MarylandTan`: `lambda * tan(pi * (x - 1/2))`, the Maryland model with
//!   the pole moved onto the integers.
//! * `LogLinear`: `gamma_lin * (x - 1/2) + a_log * log(x / (1 - x))`.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Result, SpectraError};

pub const DEFAULT_SINGULARITY_GUARD: f64 = 1e-12;

/// Magnitude returned by [`PotentialSpec::eval_extended`] inside the guard.
pub const EXTENDED_SENTINEL: f64 = 1e300;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum PotentialKind {
    MarylandTan { lambda: f64 },
    LogLinear { gamma_lin: f64, a_log: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PotentialSpec {
    #[serde(flatten)]
    pub kind: PotentialKind,
    pub singularity_guard: f64,
}

/// Reduce a real number to its fractional part in `[0, 1)`.
#[inline]
pub fn frac(x: f64) -> f64 {
    let r = x - x.floor();
    // x.floor() can round so that r == 1.0 for tiny negative x
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

impl PotentialSpec {
    pub fn maryland(lambda: f64) -> Self {
        assert!(lambda > 0.0, "coupling must be positive");
        Self {
            kind: PotentialKind::MarylandTan { lambda },
            singularity_guard: DEFAULT_SINGULARITY_GUARD,
        }
    }

    pub fn log_linear(gamma_lin: f64, a_log: f64) -> Self {
        assert!(gamma_lin > 0.0 && a_log > 0.0, "parameters must be positive");
        Self {
            kind: PotentialKind::LogLinear { gamma_lin, a_log },
            singularity_guard: DEFAULT_SINGULARITY_GUARD,
        }
    }

    pub fn with_guard(mut self, guard: f64) -> Self {
        assert!(guard > 0.0 && guard < 0.5);
        self.singularity_guard = guard;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match self.kind {
            PotentialKind::MarylandTan { lambda } => lambda.is_finite() && lambda > 0.0,
            PotentialKind::LogLinear { gamma_lin, a_log } => {
                gamma_lin.is_finite() && gamma_lin > 0.0 && a_log.is_finite() && a_log > 0.0
            }
        };
        if !ok {
            return Err(SpectraError::InvalidArgument(format!(
                "potential parameters must be positive and finite: {:?}",
                self.kind
            )));
        }
        if !(self.singularity_guard > 0.0 && self.singularity_guard < 0.5) {
            return Err(SpectraError::InvalidArgument(format!(
                "singularity guard {} must lie in (0, 0.5)",
                self.singularity_guard
            )));
        }
        Ok(())
    }

    /// True when the reduced phase lies within the guard of an integer.
    #[inline]
    pub fn is_near_singularity(&self, x: f64) -> bool {
        let t = frac(x);
        t <= self.singularity_guard || t >= 1.0 - self.singularity_guard
    }

    /// Evaluate `f(x)` after reducing `x` mod 1.
    pub fn eval(&self, x: f64) -> Result<f64> {
        let t = frac(x);
        if t <= self.singularity_guard || t >= 1.0 - self.singularity_guard {
            return Err(SpectraError::SingularityProximity {
                x,
                guard: self.singularity_guard,
            });
        }
        Ok(self.eval_interior(t))
    }

    /// Evaluation that never fails: inside the guard the signed sentinel
    /// `-EXTENDED_SENTINEL` (right of an integer) or `+EXTENDED_SENTINEL`
    /// (left of an integer) is returned.
    pub fn eval_extended(&self, x: f64) -> f64 {
        let t = frac(x);
        if t == 0.0 || t <= self.singularity_guard {
            -EXTENDED_SENTINEL
        } else if t >= 1.0 - self.singularity_guard {
            EXTENDED_SENTINEL
        } else {
            self.eval_interior(t)
        }
    }

    /// `f` on `(0, 1)` without the guard check. `t` must already be reduced.
    #[inline]
    pub fn eval_interior(&self, t: f64) -> f64 {
        match self.kind {
            PotentialKind::MarylandTan { lambda } => {
                // tan(pi (t - 1/2)) = -cot(pi t); each branch keeps the
                // argument of cot small so poles are resolved accurately.
                if t < 0.5 {
                    -lambda / (PI * t).tan()
                } else {
                    lambda / (PI * (1.0 - t)).tan()
                }
            }
            PotentialKind::LogLinear { gamma_lin, a_log } => gamma_lin * (t - 0.5) + a_log * (t.ln() - (1.0 - t).ln()),
        }
    }

    /// Certified lower Lipschitz constant.
    pub fn gamma(&self) -> f64 {
        match self.kind {
            PotentialKind::MarylandTan { lambda } => lambda * PI,
            PotentialKind::LogLinear { gamma_lin, a_log } => gamma_lin + 4.0 * a_log,
        }
    }

    /// Derivative of `f` on `(0, 1)`.
    pub fn derivative(&self, t: f64) -> f64 {
        match self.kind {
            PotentialKind::MarylandTan { lambda } => {
                let s = (PI * t).sin();
                lambda * PI / (s * s)
            }
            PotentialKind::LogLinear { gamma_lin, a_log } => gamma_lin + a_log * (1.0 / t + 1.0 / (1.0 - t)),
        }
    }

    /// The unique `x` in `(0, 1)` with `f(x) = energy`.
    pub fn inverse(&self, energy: f64) -> f64 {
        match self.kind {
            PotentialKind::MarylandTan { lambda } => {
                if energy == 0.0 {
                    0.5
                } else if energy < 0.0 {
                    (lambda / -energy).atan() / PI
                } else {
                    1.0 - (lambda / energy).atan() / PI
                }
            }
            PotentialKind::LogLinear { .. } => self.inverse_bisect(energy),
        }
    }

    fn inverse_bisect(&self, energy: f64) -> f64 {
        let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
        for _ in 0..2000 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.eval_interior(mid) < energy {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        if lo == 0.0 {
            hi
        } else if hi == 1.0 {
            lo
        } else {
            0.5 * (lo + hi)
        }
    }

    /// Midpoint-rule estimate of the integral of `|log|f||` over `(0, 1)` on
    /// an `m`-point grid. The grid point closest to the zero of `f` is
    /// excluded when it falls within half a cell of it.
    pub fn log_integrability_estimate(&self, m: usize) -> Result<f64> {
        if m < 100 {
            return Err(SpectraError::InvalidArgument(format!(
                "grid size {m} is below the minimum of 100"
            )));
        }
        let h = 1.0 / m as f64;
        let zero = self.inverse(0.0);
        let sum: f64 = (0..m)
            .map(|i| (i as f64 + 0.5) * h)
            .filter(|&t| (t - zero).abs() >= 0.5 * h)
            .map(|t| self.eval_interior(t).abs().ln().abs())
            .sum();
        Ok(sum * h)
    }

    /// Short label used in file metadata.
    pub fn label(&self) -> String {
        match self.kind {
            PotentialKind::MarylandTan { lambda } => format!("tan(lambda={lambda})"),
            PotentialKind::LogLinear { gamma_lin, a_log } => {
                format!("loglin(gamma_lin={gamma_lin},a_log={a_log})")
            }
        }
    }
}
