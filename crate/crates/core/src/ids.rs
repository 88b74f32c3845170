//! Integrated density of states from phase-averaged box counts.

use rayon::prelude::*;

use crate::arithmetic::Frequency;
use crate::error::{Result, SpectraError};
use crate::phases;
use crate::potential::PotentialSpec;
use crate::tridiag;

/// Sampled `N(E)` with the pooled box eigenvalues.
#[derive(Debug, Clone, PartialEq)]
pub struct DosTable {
    pub e_grid: Vec<f64>,
    pub n_vals: Vec<f64>,
    pub n_box: usize,
    pub x_samples: usize,
    pub substitutions: usize,
    /// Sorted eigenvalues of every sampled box; empty unless requested.
    pub eigen_pool: Vec<f64>,
}

/// Construction options for [`DosTable`].
#[derive(Debug, Clone)]
pub struct IdsBuilder {
    alpha: Frequency,
    potential: PotentialSpec,
    n_box: usize,
    x_samples: usize,
    seed: Option<u64>,
    keep_pool: bool,
    zero_ends: bool,
}

impl IdsBuilder {
    pub fn new(alpha: &Frequency, potential: &PotentialSpec, n_box: usize, x_samples: usize) -> Self {
        IdsBuilder {
            alpha: alpha.clone(),
            potential: *potential,
            n_box,
            x_samples,
            seed: None,
            keep_pool: false,
            zero_ends: false,
        }
    }

    /// Jitter each phase stratum with a seeded uniform draw.
    pub fn seed(mut self, seed: Option<u64>) -> Self {
        self.seed = seed;
        self
    }

    /// Retain every box eigenvalue (costly: a full solve per phase).
    pub fn keep_pool(mut self, keep: bool) -> Self {
        self.keep_pool = keep;
        self
    }

    /// Replace the first and last diagonal entries by 0 (a rank-two change of
    /// boundary condition).
    pub fn zero_ends(mut self, zero: bool) -> Self {
        self.zero_ends = zero;
        self
    }

    pub fn build(&self, e_grid: &[f64]) -> Result<DosTable> {
        if self.n_box == 0 || self.x_samples == 0 {
            return Err(SpectraError::InvalidArgument(
                "n_box and x_samples must be positive".into(),
            ));
        }
        if e_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(SpectraError::InvalidArgument(
                "energy grid must be strictly increasing".into(),
            ));
        }
        let xs = phases::stratified(self.x_samples, self.seed);
        let rows: Vec<(Vec<usize>, Vec<f64>, usize)> = xs
            .par_iter()
            .map(|&x0| {
                let (x, shifts) = phases::resolve(x0, self.n_box, &self.alpha, &self.potential);
                let mut diag: Vec<f64> = self
                    .alpha
                    .orbit(x, 0, self.n_box)
                    .into_iter()
                    .map(|t| self.potential.eval_interior(t))
                    .collect();
                if self.zero_ends {
                    diag[0] = 0.0;
                    let last = diag.len() - 1;
                    diag[last] = 0.0;
                }
                let counts = e_grid.iter().map(|&e| tridiag::sturm_count(&diag, e)).collect();
                let pool = if self.keep_pool {
                    tridiag::eigenvalues(&diag)
                } else {
                    Vec::new()
                };
                (counts, pool, shifts)
            })
            .collect();
        let norm = (self.n_box * self.x_samples) as f64;
        let n_vals = (0..e_grid.len())
            .map(|i| rows.iter().map(|r| r.0[i]).sum::<usize>() as f64 / norm)
            .collect();
        let mut eigen_pool: Vec<f64> = rows.iter().flat_map(|r| r.1.iter().copied()).collect();
        eigen_pool.sort_by(f64::total_cmp);
        Ok(DosTable {
            e_grid: e_grid.to_vec(),
            n_vals,
            n_box: self.n_box,
            x_samples: self.x_samples,
            substitutions: rows.iter().map(|r| r.2).sum(),
            eigen_pool,
        })
    }
}

/// `N(E) ~ (1/S) sum_x N_n(x, E) / n` on `e_grid`.
pub fn build_ids(
    e_grid: &[f64],
    n_box: usize,
    x_samples: usize,
    alpha: &Frequency,
    potential: &PotentialSpec,
) -> Result<DosTable> {
    IdsBuilder::new(alpha, potential, n_box, x_samples).build(e_grid)
}

/// `count` equally spaced energies from `lo` to `hi` inclusive.
pub fn energy_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..count)
            .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
            .collect(),
    }
}

/// Largest difference quotient of `N` between consecutive grid energies.
pub fn lipschitz_modulus(table: &DosTable) -> Result<f64> {
    if table.e_grid.len() < 50 {
        return Err(SpectraError::InvalidArgument(format!(
            "Lipschitz modulus needs at least 50 grid energies, got {}",
            table.e_grid.len()
        )));
    }
    Ok(table
        .e_grid
        .windows(2)
        .zip(table.n_vals.windows(2))
        .map(|(e, n)| (n[1] - n[0]) / (e[1] - e[0]))
        .fold(0.0, f64::max))
}

impl DosTable {
    /// `N^{-1}(t)` by piecewise-linear interpolation; a flat stretch at
    /// level `t` resolves to its midpoint.
    pub fn inverse(&self, t: f64) -> Result<f64> {
        let (e, n) = (&self.e_grid, &self.n_vals);
        let (first, last) = (n[0], n[n.len() - 1]);
        if !(first < t && t < last) {
            return Err(SpectraError::RangeTooNarrow {
                requested: t,
                low: first,
                high: last,
            });
        }
        // first index with N >= t, and first with N > t
        let i = n.partition_point(|&v| v < t);
        let j = n.partition_point(|&v| v <= t);
        if i < j {
            return Ok(0.5 * (e[i] + e[j - 1]));
        }
        let (n0, n1) = (n[i - 1], n[i]);
        Ok(e[i - 1] + (e[i] - e[i - 1]) * (t - n0) / (n1 - n0))
    }

    /// Empirical `int log|E - E'| dN(E')` over the eigenvalue pool.
    pub fn thouless(&self, energy: f64) -> Result<ThoulessValue> {
        if self.eigen_pool.is_empty() {
            return Err(SpectraError::InvalidArgument("eigenvalue pool is empty".into()));
        }
        Ok(thouless_pool(&self.eigen_pool, energy))
    }
}

/// Largest `|N^{-1}(t) - f(t)|` over `count` equally spaced `t` in
/// `[t_lo, t_hi]`.
pub fn inverse_vs_f_gap(
    table: &DosTable,
    potential: &PotentialSpec,
    t_lo: f64,
    t_hi: f64,
    count: usize,
) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for t in energy_grid(t_lo, t_hi, count) {
        let f = potential.eval(t)?;
        worst = worst.max((table.inverse(t)? - f).abs());
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThoulessValue {
    pub value: f64,
    /// Pool members within `1e-12` of the energy, left out of the sum.
    pub excluded: usize,
}

/// `(1/|pool|) sum log|E - E_i|`, skipping exact hits.
pub fn thouless_pool(pool: &[f64], energy: f64) -> ThoulessValue {
    let mut sum = 0.0;
    let mut excluded = 0;
    for &ev in pool {
        let d = (energy - ev).abs();
        if d < 1e-12 {
            excluded += 1;
        } else {
            sum += d.ln();
        }
    }
    ThoulessValue {
        value: sum / pool.len() as f64,
        excluded,
    }
}

pub fn thouless(table: &DosTable, energy: f64) -> Result<ThoulessValue> {
    table.thouless(energy)
}

/// `max(0, log(gamma / 2e))`.
pub fn lyap_lower_bound(gamma_val: f64) -> f64 {
    (gamma_val / (2.0 * std::f64::consts::E)).ln().max(0.0)
}

/// Longest stretch of `[lo, hi]` containing no pooled eigenvalue.
pub fn largest_pool_gap(pool: &[f64], lo: f64, hi: f64) -> f64 {
    let mut prev = lo;
    let mut worst: f64 = 0.0;
    for &e in pool.iter().filter(|&&e| e > lo && e < hi) {
        worst = worst.max(e - prev);
        prev = e;
    }
    worst.max(hi - prev)
}
