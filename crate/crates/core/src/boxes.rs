//! Finite Dirichlet blocks `H_n(x)` and the renumbered eigenvalue curves.

use rayon::prelude::*;

use crate::arithmetic::Frequency;
use crate::error::{Result, SpectraError};
use crate::potential::{frac, PotentialSpec};
use crate::tridiag::{self, LogDet};

/// Minimum distance between curve-grid phases and the discontinuity points.
pub const BETA_GUARD: f64 = 1e-7;

/// The block `1_{[start, start+n-1]} H(x) 1_{[start, start+n-1]}`.
#[derive(Debug, Clone)]
pub struct BoxOperator {
    x: f64,
    start: i64,
    diag: Vec<f64>,
    singular_site: Option<usize>,
}

impl BoxOperator {
    /// `H_n(x)` on sites `0..n`.
    pub fn new(x: f64, alpha: &Frequency, n: usize, potential: &PotentialSpec) -> Self {
        Self::on_sites(x, 0, n, alpha, potential)
    }

    /// The block on sites `start..start+n` of `H(x)`, which equals
    /// `H_n(x + start alpha)`.
    pub fn on_sites(x: f64, start: i64, n: usize, alpha: &Frequency, potential: &PotentialSpec) -> Self {
        let points = alpha.orbit(x, start, n);
        let singular_site = points.iter().position(|&t| potential.is_near_singularity(t));
        let diag = points.iter().map(|&t| potential.eval_extended(t)).collect();
        BoxOperator {
            x: frac(x),
            start,
            diag,
            singular_site,
        }
    }

    /// A block with a prescribed diagonal; never singular.
    pub fn from_diagonal(diag: Vec<f64>) -> Self {
        BoxOperator {
            x: 0.0,
            start: 0,
            diag,
            singular_site: None,
        }
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn start(&self) -> i64 {
        self.start
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diag
    }

    pub fn is_singular(&self) -> bool {
        self.singular_site.is_some()
    }

    pub fn singular_site(&self) -> Option<usize> {
        self.singular_site
    }

    fn checked(&self) -> Result<&[f64]> {
        match self.singular_site {
            Some(site) => Err(SpectraError::SingularBox { x: self.x, site }),
            None => Ok(&self.diag),
        }
    }

    /// `#{eigenvalues <= e}`.
    pub fn sturm_count(&self, e: f64) -> Result<usize> {
        Ok(tridiag::sturm_count(self.checked()?, e))
    }

    /// All eigenvalues, ascending, with multiplicity.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(tridiag::eigenvalues(self.checked()?))
    }

    /// Eigenvalue `k` (0-based, ascending).
    pub fn eigenvalue(&self, k: usize) -> Result<f64> {
        let d = self.checked()?;
        if k >= d.len() {
            return Err(SpectraError::InvalidArgument(format!(
                "eigenvalue index {k} out of range for a box of size {}",
                d.len()
            )));
        }
        Ok(tridiag::eigenvalue(d, k))
    }

    /// Eigenvalues in `[a, b]` paired with their global index.
    pub fn eigenvalues_in(&self, a: f64, b: f64) -> Result<Vec<(usize, f64)>> {
        Ok(tridiag::eigenvalues_in(self.checked()?, a, b))
    }

    /// `det(E - H_n)` in log-magnitude and sign form.
    pub fn det_log(&self, e: f64) -> Result<LogDet> {
        Ok(tridiag::det_log(self.checked()?, e))
    }
}

/// A discontinuity point `{-j alpha}` of the diagonal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaPoint {
    pub value: f64,
    pub site: usize,
}

/// The sorted points `{-j alpha}`, `0 <= j < n`; entry 0 is `(0, 0)`.
pub fn beta_points(alpha: &Frequency, n: usize) -> Vec<BetaPoint> {
    let mut out: Vec<BetaPoint> = (0..n)
        .map(|j| BetaPoint {
            value: alpha.frac_mul(-(j as i64)),
            site: j,
        })
        .collect();
    out.sort_by(|a, b| a.value.total_cmp(&b.value).then(a.site.cmp(&b.site)));
    out
}

/// Index `l` of the cell `[beta_l, beta_{l+1})` containing `x`.
pub fn cell_index(beta: &[f64], x: f64) -> usize {
    beta.partition_point(|&b| b <= x).saturating_sub(1)
}

/// Cyclic distance from `x` to the nearest discontinuity point.
pub fn distance_to_beta(beta: &[f64], x: f64) -> f64 {
    let l = cell_index(beta, x);
    let left = x - beta[l];
    let right = if l + 1 < beta.len() { beta[l + 1] - x } else { 1.0 - x };
    left.min(right)
}

/// Renumbered values `Lambda_j(x) = E_{(j + l) mod n}(x)` at a single phase.
pub fn curve_values(x: f64, alpha: &Frequency, n: usize, potential: &PotentialSpec, beta: &[f64]) -> Result<Vec<f64>> {
    let x = frac(x);
    let ev = BoxOperator::new(x, alpha, n, potential).eigenvalues()?;
    let l = cell_index(beta, x);
    Ok((0..n).map(|j| ev[(j + l) % n]).collect())
}

/// The curves `Lambda_j` sampled on an x-grid.
#[derive(Debug, Clone)]
pub struct EigenCurveTable {
    pub n: usize,
    pub beta: Vec<BetaPoint>,
    pub x_grid: Vec<f64>,
    pub cells: Vec<usize>,
    /// `curves[j][i] = Lambda_j(x_grid[i])`.
    pub curves: Vec<Vec<f64>>,
}

/// Tabulate all curves on the midpoint grid of `grid_size` cells, dropping
/// phases within `BETA_GUARD` of a discontinuity point.
pub fn eigen_curves(
    alpha: &Frequency,
    n: usize,
    potential: &PotentialSpec,
    grid_size: usize,
) -> Result<EigenCurveTable> {
    if n == 0 || grid_size == 0 {
        return Err(SpectraError::InvalidArgument("n and grid_size must be positive".into()));
    }
    let beta = beta_points(alpha, n);
    let bv: Vec<f64> = beta.iter().map(|b| b.value).collect();
    let x_grid: Vec<f64> = (0..grid_size)
        .map(|i| (i as f64 + 0.5) / grid_size as f64)
        .filter(|&x| distance_to_beta(&bv, x) >= BETA_GUARD)
        .collect();
    let rows: Vec<Vec<f64>> = x_grid
        .par_iter()
        .map(|&x| curve_values(x, alpha, n, potential, &bv))
        .collect::<Result<_>>()?;
    let cells = x_grid.iter().map(|&x| cell_index(&bv, x)).collect();
    let mut curves = vec![Vec::with_capacity(x_grid.len()); n];
    for row in &rows {
        for (j, &v) in row.iter().enumerate() {
            curves[j].push(v);
        }
    }
    Ok(EigenCurveTable {
        n,
        beta,
        x_grid,
        cells,
        curves,
    })
}

impl EigenCurveTable {
    /// `beta_{n-j}` with `beta_n` read as `beta_0 + 1`.
    fn seam(&self, j: usize) -> f64 {
        if j == 0 {
            1.0
        } else {
            self.beta[self.n - j].value
        }
    }

    /// Largest `|Lambda_j(x) - f(x - beta_{n-j})|` over the table.
    pub fn sinai_defect(&self, potential: &PotentialSpec) -> f64 {
        let mut worst: f64 = 0.0;
        for j in 0..self.n {
            let s = self.seam(j);
            for (i, &x) in self.x_grid.iter().enumerate() {
                let f = potential.eval_extended(frac(x - s));
                worst = worst.max((self.curves[j][i] - f).abs());
            }
        }
        worst
    }

    /// Largest shortfall `gamma dx - (Lambda_j(x') - Lambda_j(x))` over
    /// consecutive grid points not separated by the curve's own seam.
    /// Nonpositive means every curve is Lipschitz-monotone on the grid.
    pub fn monotonicity_defect(&self, gamma: f64) -> f64 {
        let mut worst = f64::NEG_INFINITY;
        for j in 0..self.n {
            let s = frac(self.seam(j));
            for i in 1..self.x_grid.len() {
                let (x0, x1) = (self.x_grid[i - 1], self.x_grid[i]);
                if x0 < s && s < x1 {
                    continue;
                }
                let (a, b) = (self.curves[j][i - 1], self.curves[j][i]);
                // absolute floor for eigenvalue roundoff at large |E|
                let floor = 1e-12 * a.abs().max(b.abs());
                worst = worst.max(gamma * (x1 - x0) - (b - a) - floor);
            }
        }
        worst
    }
}

/// Eigenvalues on both sides of a discontinuity point and the spectrum of
/// the site-deleted matrix at that point.
#[derive(Debug, Clone)]
pub struct SeamProbe {
    pub l: usize,
    pub site: usize,
    pub beta: f64,
    pub delta: f64,
    /// Sorted eigenvalues at `beta_l - delta`.
    pub left: Vec<f64>,
    /// Sorted eigenvalues at `beta_l + delta`.
    pub right: Vec<f64>,
    /// Sorted spectrum with row and column `site` removed, at `beta_l`.
    pub deleted: Vec<f64>,
}

impl SeamProbe {
    /// `max_j |E_j(beta - delta) - E_{j+1}(beta + delta)|`, `j < n - 1`.
    pub fn jump_defect(&self) -> f64 {
        let n = self.left.len();
        (0..n.saturating_sub(1))
            .map(|j| (self.left[j] - self.right[j + 1]).abs())
            .fold(0.0, f64::max)
    }

    /// Distance of the bounded eigenvalues on either side to the
    /// site-deleted spectrum.
    pub fn pencil_defect(&self) -> f64 {
        let n = self.left.len();
        (0..n.saturating_sub(1))
            .map(|j| {
                (self.left[j] - self.deleted[j])
                    .abs()
                    .max((self.right[j + 1] - self.deleted[j]).abs())
            })
            .fold(0.0, f64::max)
    }

    /// `(E_0(beta + delta), E_{n-1}(beta - delta))`, the escaping eigenvalues.
    pub fn escaping(&self) -> (f64, f64) {
        (self.right[0], self.left[self.left.len() - 1])
    }
}

/// Probe the `l`-th discontinuity point of `H_n`.
pub fn seam_probe(alpha: &Frequency, n: usize, potential: &PotentialSpec, l: usize, delta: f64) -> Result<SeamProbe> {
    let beta = beta_points(alpha, n);
    let BetaPoint { value, site } = *beta
        .get(l)
        .ok_or_else(|| SpectraError::InvalidArgument(format!("seam index {l} out of range")))?;
    let left = BoxOperator::new(frac(value - delta), alpha, n, potential).eigenvalues()?;
    let right = BoxOperator::new(value + delta, alpha, n, potential).eigenvalues()?;
    let at = BoxOperator::new(value, alpha, n, potential);
    let d = at.diagonal();
    for (i, t) in alpha.orbit(value, 0, n).into_iter().enumerate() {
        if i != site && potential.is_near_singularity(t) {
            return Err(SpectraError::SingularBox { x: value, site: i });
        }
    }
    let mut deleted = tridiag::eigenvalues(&d[..site]);
    deleted.extend(tridiag::eigenvalues(&d[site + 1..]));
    deleted.sort_by(f64::total_cmp);
    Ok(SeamProbe {
        l,
        site,
        beta: value,
        delta,
        left,
        right,
        deleted,
    })
}

/// Stratified phases `(i + 1/2) / count`, nudged off the discontinuity
/// points of `H_n`.
pub fn stratified_phases(alpha: &Frequency, n: usize, count: usize) -> Vec<f64> {
    let beta: Vec<f64> = beta_points(alpha, n).iter().map(|b| b.value).collect();
    (0..count)
        .map(|i| {
            let mut x = (i as f64 + 0.5) / count as f64;
            while distance_to_beta(&beta, x) < BETA_GUARD {
                x = frac(x + 2.0 * BETA_GUARD);
            }
            x
        })
        .collect()
}

/// Extremes of `N_q(x, E)` over sampled phases.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CountingSpread {
    pub max: usize,
    pub min: usize,
    pub spread: usize,
}

/// `max_x N_q(x, E) - min_x N_q(x, E)` over `x_samples` stratified phases.
/// `q` is meant to be a good denominator of `alpha`.
pub fn counting_spread(
    alpha: &Frequency,
    q: usize,
    e: f64,
    x_samples: usize,
    potential: &PotentialSpec,
) -> Result<CountingSpread> {
    if x_samples == 0 || q == 0 {
        return Err(SpectraError::InvalidArgument("q and x_samples must be positive".into()));
    }
    let counts: Vec<usize> = stratified_phases(alpha, q, x_samples)
        .par_iter()
        .map(|&x| BoxOperator::new(x, alpha, q, potential).sturm_count(e))
        .collect::<Result<_>>()?;
    let max = *counts.iter().max().unwrap();
    let min = *counts.iter().min().unwrap();
    Ok(CountingSpread {
        max,
        min,
        spread: max - min,
    })
}

/// The curve `Lambda_0` of `H_q`, tabulated on `(0, 1)`. It is continuous and
/// increasing there, from `-inf` at `0+` to `+inf` at `1-`.
#[derive(Debug, Clone)]
pub struct LambdaTable {
    q: usize,
    alpha: Frequency,
    potential: PotentialSpec,
    beta: Vec<f64>,
    grid: Vec<f64>,
    values: Vec<f64>,
}

impl LambdaTable {
    /// Needs `resolution >= 4 q`.
    pub fn build(alpha: &Frequency, q: usize, potential: &PotentialSpec, resolution: usize) -> Result<Self> {
        if q == 0 || resolution < 4 * q {
            return Err(SpectraError::InvalidArgument(format!(
                "Lambda_0 table needs resolution >= 4q (q = {q}, resolution = {resolution})"
            )));
        }
        let beta: Vec<f64> = beta_points(alpha, q).iter().map(|b| b.value).collect();
        let grid: Vec<f64> = (0..resolution)
            .map(|i| (i as f64 + 0.5) / resolution as f64)
            .filter(|&x| distance_to_beta(&beta, x) >= BETA_GUARD)
            .collect();
        let values = grid
            .par_iter()
            .map(|&x| Self::exact(alpha, q, potential, &beta, x))
            .collect::<Result<_>>()?;
        Ok(LambdaTable {
            q,
            alpha: alpha.clone(),
            potential: *potential,
            beta,
            grid,
            values,
        })
    }

    fn exact(alpha: &Frequency, q: usize, potential: &PotentialSpec, beta: &[f64], x: f64) -> Result<f64> {
        BoxOperator::new(x, alpha, q, potential).eigenvalue(cell_index(beta, x))
    }

    pub fn q(&self) -> usize {
        self.q
    }

    /// `Lambda_0(y)`: linear interpolation between grid points, exact
    /// evaluation beyond the outermost ones.
    pub fn value(&self, y: f64) -> Result<f64> {
        let y = frac(y);
        if self.potential.is_near_singularity(y) {
            return Ok(if y < 0.5 { f64::NEG_INFINITY } else { f64::INFINITY });
        }
        let i = self.grid.partition_point(|&g| g <= y);
        if i == 0 || i == self.grid.len() {
            return Self::exact(&self.alpha, self.q, &self.potential, &self.beta, y);
        }
        let (x0, x1) = (self.grid[i - 1], self.grid[i]);
        let (v0, v1) = (self.values[i - 1], self.values[i]);
        Ok(v0 + (v1 - v0) * (y - x0) / (x1 - x0))
    }

    /// `#{0 <= j < q : Lambda_0(x + j alpha) <= E}`.
    pub fn counting(&self, x: f64, e: f64) -> Result<usize> {
        let mut count = 0;
        for y in self.alpha.orbit(x, 0, self.q) {
            if self.value(y)? <= e {
                count += 1;
            }
        }
        Ok(count)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gershgorin_count() {
        let alpha = Frequency::golden();
        let p = PotentialSpec::maryland(1.0);
        let b = BoxOperator::new(0.137, &alpha, 10, &p);
        let top = b.diagonal().iter().cloned().fold(f64::MIN, f64::max);
        assert_eq!(b.sturm_count(top + 3.0).unwrap(), 10);
    }

    #[test]
    fn single_site_box() {
        let alpha = Frequency::golden();
        let p = PotentialSpec::maryland(1.0);
        let b = BoxOperator::new(0.3, &alpha, 1, &p);
        let v = b.diagonal()[0];
        assert_eq!(b.sturm_count(v).unwrap(), 1);
        assert_eq!(b.eigenvalues().unwrap(), vec![v]);
        let e = 2.5;
        assert!((b.det_log(e).unwrap().log_abs - (e - v).abs().ln()).abs() < 1e-15);
    }

    #[test]
    fn singular_box_refuses() {
        let alpha = Frequency::golden();
        let p = PotentialSpec::maryland(1.0);
        let b = BoxOperator::new(0.0, &alpha, 5, &p);
        assert_eq!(b.singular_site(), Some(0));
        assert!(matches!(
            b.sturm_count(0.0),
            Err(SpectraError::SingularBox { site: 0, .. })
        ));
        assert!(b.eigenvalues().is_err() && b.det_log(0.0).is_err());
    }

    #[test]
    fn golden_beta_points() {
        let alpha = Frequency::golden();
        let b = beta_points(&alpha, 3);
        assert_eq!(b[0], BetaPoint { value: 0.0, site: 0 });
        assert!((b[1].value - 0.381966011250105).abs() < 1e-14 && b[1].site == 1);
        assert!((b[2].value - 0.763932022500210).abs() < 1e-14 && b[2].site == 2);
        assert_eq!(beta_points(&alpha, 1).len(), 1);
    }

    #[test]
    fn single_curve_is_potential() {
        let alpha = Frequency::golden();
        let p = PotentialSpec::maryland(1.0);
        let t = eigen_curves(&alpha, 1, &p, 64).unwrap();
        for (i, &x) in t.x_grid.iter().enumerate() {
            assert_eq!(t.curves[0][i], p.eval(x).unwrap());
        }
    }

    #[test]
    fn curve_reenters_at_minus_infinity() {
        let alpha = Frequency::golden();
        let p = PotentialSpec::maryland(1.0);
        let n = 8;
        let beta: Vec<f64> = beta_points(&alpha, n).iter().map(|b| b.value).collect();
        for j in 1..n {
            let x = beta[n - j] + 1e-6;
            let lam = curve_values(x, &alpha, n, &p, &beta).unwrap();
            let others = (0..n).filter(|&i| i != j).map(|i| lam[i]).fold(f64::MAX, f64::min);
            assert!(lam[j] < others, "j={j}");
        }
    }

    #[test]
    fn interpolated_lambda_tracks_exact() {
        let alpha = Frequency::golden();
        let p = PotentialSpec::maryland(2.0);
        let table = LambdaTable::build(&alpha, 13, &p, 52).unwrap();
        assert_eq!(table.counting(0.2, -1e9).unwrap(), 0);
        assert!(LambdaTable::build(&alpha, 13, &p, 51).is_err());
        let single = LambdaTable::build(&alpha, 1, &p, 8).unwrap();
        let v = p.eval(0.3).unwrap();
        assert_eq!(single.counting(0.3, v + 0.5).unwrap(), 1);
        assert_eq!(single.counting(0.3, v - 0.5).unwrap(), 0);
    }
}
