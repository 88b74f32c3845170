//! Green's functions of finite blocks as determinant ratios, regularity of
//! lattice sites, and eigenfunction decay.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::arithmetic::Frequency;
use crate::error::{Result, SpectraError};
use crate::potential::PotentialSpec;
use crate::tridiag::{self, LogDet};

/// Which edge of the block the entry touches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Edge {
    /// `G(a, l)`.
    Left,
    /// `G(l, b)`.
    Right,
}

/// `log|G|` and sign.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreenValue {
    pub log_abs: f64,
    pub sign: f64,
}

/// `(H_{[a,b]}(x) - E)^{-1}` edge entries from prefix and suffix
/// determinants of one block.
#[derive(Debug, Clone)]
pub struct GreenBox {
    a: i64,
    b: i64,
    /// `prefix[k] = det(E - H)` on sites `a .. a+k-1`.
    prefix: Vec<LogDet>,
    /// `suffix[k] = det(E - H)` on sites `a+k .. b`.
    suffix: Vec<LogDet>,
}

impl GreenBox {
    pub fn new(x: f64, a: i64, b: i64, energy: f64, alpha: &Frequency, potential: &PotentialSpec) -> Result<Self> {
        if b < a {
            return Err(SpectraError::InvalidArgument(format!("empty block [{a}, {b}]")));
        }
        let n = (b - a + 1) as usize;
        let pts = alpha.orbit(x, a, n);
        if let Some(site) = pts.iter().position(|&t| potential.is_near_singularity(t)) {
            return Err(SpectraError::SingularBox { x, site });
        }
        let diag: Vec<f64> = pts.iter().map(|&t| potential.eval_interior(t)).collect();
        Ok(Self::from_diagonal(a, &diag, energy))
    }

    /// A block on sites `a .. a + diag.len() - 1` with a given diagonal.
    pub fn from_diagonal(a: i64, diag: &[f64], energy: f64) -> Self {
        GreenBox {
            a,
            b: a + diag.len() as i64 - 1,
            prefix: tridiag::det_log_prefixes(diag, energy),
            suffix: tridiag::det_log_suffixes(diag, energy),
        }
    }

    fn full(&self) -> Result<LogDet> {
        let d = self.prefix[self.prefix.len() - 1];
        if d.zero {
            return Err(SpectraError::EigenvalueHit { energy: f64::NAN });
        }
        Ok(d)
    }

    /// `log|det(E - H_{[a,b]})|`.
    pub fn log_det(&self) -> Result<f64> {
        Ok(self.full()?.log_abs)
    }

    /// `G(a, l) = -P_{b-l}(x + (l+1) alpha) / P_q(x + a alpha)` for
    /// [`Edge::Left`], `G(l, b) = -P_{l-a}(x + a alpha) / P_q(x + a alpha)`
    /// for [`Edge::Right`].
    pub fn entry(&self, edge: Edge, l: i64) -> Result<GreenValue> {
        if l < self.a || l > self.b {
            return Err(SpectraError::InvalidArgument(format!(
                "site {l} outside block [{}, {}]",
                self.a, self.b
            )));
        }
        let den = self.full()?;
        let k = (l - self.a) as usize;
        let num = match edge {
            Edge::Left => self.suffix[k + 1],
            Edge::Right => self.prefix[k],
        };
        Ok(GreenValue {
            log_abs: num.log_abs - den.log_abs,
            sign: -num.sign * den.sign,
        })
    }
}

/// A single edge entry of the Green's function of `H_{[a,b]}(x)`.
#[allow(clippy::too_many_arguments)]
pub fn green_entry(
    x: f64,
    a: i64,
    b: i64,
    energy: f64,
    edge: Edge,
    l: i64,
    alpha: &Frequency,
    potential: &PotentialSpec,
) -> Result<GreenValue> {
    GreenBox::new(x, a, b, energy, alpha, potential)?
        .entry(edge, l)
        .map_err(|e| with_energy(e, energy))
}

fn with_energy(e: SpectraError, energy: f64) -> SpectraError {
    match e {
        SpectraError::EigenvalueHit { .. } => SpectraError::EigenvalueHit { energy },
        other => other,
    }
}

/// A `(mu, q)`-regularity question about site `m` of `H(x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegularityQuery {
    pub m: i64,
    pub q: usize,
    pub mu: f64,
    pub energy: f64,
    pub x: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Regularity {
    pub regular: bool,
    /// First admissible `[n1, n2]` with both edge entries small.
    pub witness: Option<(i64, i64)>,
    /// Candidate blocks skipped because `E` was an eigenvalue of them.
    pub resonant: usize,
}

/// Admissible starts `n1` for site `m`: `n2 = n1 + q - 1`, with
/// `m - n1 >= q/5` and `n2 - m >= q/5`.
fn admissible_starts(m: i64, q: usize) -> std::ops::RangeInclusive<i64> {
    let q = q as i64;
    let margin = (q + 4) / 5; // ceil(q / 5)
    (m - (q - 1) + margin)..=(m - margin)
}

/// Edge decay test for site `m` inside one block.
fn edges_small(g: &GreenBox, m: i64, mu: f64) -> Result<bool> {
    let l = g.entry(Edge::Left, m)?; // G(n1, m) = G(m, n1)
    let r = g.entry(Edge::Right, m)?; // G(m, n2)
    Ok(l.log_abs < -mu * (m - g.a) as f64 && r.log_abs < -mu * (g.b - m) as f64)
}

pub fn is_regular(query: &RegularityQuery, alpha: &Frequency, potential: &PotentialSpec) -> Result<Regularity> {
    let q = query.q;
    let mut resonant = 0;
    for n1 in admissible_starts(query.m, q) {
        let n2 = n1 + q as i64 - 1;
        let g = GreenBox::new(query.x, n1, n2, query.energy, alpha, potential)?;
        match edges_small(&g, query.m, query.mu) {
            Ok(true) => {
                return Ok(Regularity {
                    regular: true,
                    witness: Some((n1, n2)),
                    resonant,
                })
            }
            Ok(false) => {}
            Err(SpectraError::EigenvalueHit { .. }) => resonant += 1,
            Err(e) => return Err(e),
        }
    }
    Ok(Regularity {
        regular: false,
        witness: None,
        resonant,
    })
}

/// One sample of the determinant-ratio bound
/// `log|P_n(x + l1 alpha) / P_q(x)| <= -(q - n)(L - eps) - C log|E_k(x) - E|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LdtSample {
    pub x: f64,
    pub energy: f64,
    pub lhs: f64,
    /// `-(q - n)(L - eps)`.
    pub base: f64,
    /// `log|E_k(x) - E|` for the box eigenvalue nearest to `E`.
    pub log_dist: f64,
}

impl LdtSample {
    pub fn bound(&self, c: f64) -> f64 {
        self.base - c * self.log_dist
    }

    pub fn slack(&self, c: f64) -> f64 {
        self.bound(c) - self.lhs
    }
}

#[allow(clippy::too_many_arguments)]
pub fn ldt_ratio_check(
    x: f64,
    energy: f64,
    q: usize,
    n: usize,
    l1: usize,
    l_hat: f64,
    eps: f64,
    alpha: &Frequency,
    potential: &PotentialSpec,
) -> Result<LdtSample> {
    if n > q || l1 + n > q {
        return Err(SpectraError::InvalidArgument(format!(
            "sub-block [{l1}, {}) does not fit in a block of size {q}",
            l1 + n
        )));
    }
    let pts = alpha.orbit(x, 0, q);
    if let Some(site) = pts.iter().position(|&t| potential.is_near_singularity(t)) {
        return Err(SpectraError::SingularBox { x, site });
    }
    let diag: Vec<f64> = pts.iter().map(|&t| potential.eval_interior(t)).collect();
    let den = tridiag::det_log(&diag, energy);
    if den.zero {
        return Err(SpectraError::EigenvalueHit { energy });
    }
    let num = tridiag::det_log(&diag[l1..l1 + n], energy);
    // nearest eigenvalue: neighbours of E in the sorted spectrum
    let k = tridiag::sturm_count(&diag, energy);
    let mut dist = f64::INFINITY;
    if k > 0 {
        dist = dist.min((energy - tridiag::eigenvalue(&diag, k - 1)).abs());
    }
    if k < q {
        dist = dist.min((tridiag::eigenvalue(&diag, k) - energy).abs());
    }
    Ok(LdtSample {
        x,
        energy,
        lhs: num.log_abs - den.log_abs,
        base: -((q - n) as f64) * (l_hat - eps),
        log_dist: dist.ln(),
    })
}

/// Smallest `C` in `[0, c_max]` (step `1e-2`) maximizing the fraction of
/// samples with nonnegative slack. Returns `(C, fraction)`.
pub fn fit_ldt_constant(samples: &[LdtSample], c_max: f64) -> (f64, f64) {
    let mut best = (0.0, -1.0);
    let steps = (c_max * 100.0).round() as usize;
    for i in 0..=steps {
        let c = i as f64 / 100.0;
        let ok = samples.iter().filter(|s| s.slack(c) >= 0.0).count();
        let frac = ok as f64 / samples.len().max(1) as f64;
        if frac > best.1 {
            best = (c, frac);
        }
    }
    best
}

/// Exponential decay fitted to one eigenvector.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayFit {
    pub eigen_index: usize,
    pub energy: f64,
    pub center: usize,
    pub rate_left: f64,
    pub rate_right: f64,
    /// Coefficient of determination of the two-sided fit of `log|psi|`
    /// against `|n - center|`.
    pub r_squared: f64,
    /// `||(H - E) psi||_inf` with `||psi||_inf = 1`.
    pub residual: f64,
    /// Largest violation of the Poisson formula on the probed blocks.
    pub poisson_residual: f64,
    /// The normalized eigenvector.
    pub psi: Vec<f64>,
}

/// Sites used by the decay fit: `|psi| > FIT_FLOOR` and at least
/// `FIT_MIN_DISTANCE` from the center. Inverse-iteration tails agree with the
/// backward ratio recurrence far below this floor.
pub const FIT_FLOOR: f64 = 1e-30;
pub const FIT_MIN_DISTANCE: usize = 10;

fn slope_fit(points: &[(f64, f64)]) -> Option<(f64, f64, f64)> {
    // least squares y = c + s d; returns (s, c, ss_res)
    if points.len() < 2 {
        return None;
    }
    let m = points.len() as f64;
    let (sd, sy) = points.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
    let (md, my) = (sd / m, sy / m);
    let (mut sdd, mut sdy) = (0.0, 0.0);
    for &(d, y) in points {
        sdd += (d - md) * (d - md);
        sdy += (d - md) * (y - my);
    }
    if sdd == 0.0 {
        return None;
    }
    let s = sdy / sdd;
    let c = my - s * md;
    let ss_res = points.iter().map(|&(d, y)| (y - c - s * d).powi(2)).sum();
    Some((s, c, ss_res))
}

fn fit_points(psi: &[f64], center: usize, left: bool, floor: f64) -> Vec<(f64, f64)> {
    let range: Box<dyn Iterator<Item = usize>> = if left {
        Box::new(0..center)
    } else {
        Box::new(center + 1..psi.len())
    };
    range
        .filter_map(|i| {
            let d = i.abs_diff(center);
            let a = psi[i].abs();
            (d >= FIT_MIN_DISTANCE && a > floor).then(|| (d as f64, a.ln()))
        })
        .collect()
}

/// Fit decay rates to a sup-normalized vector: `(center, rate_left,
/// rate_right, r_squared)`. Sides with fewer than two usable sites get rate 0.
pub fn decay_rates(psi: &[f64]) -> (usize, f64, f64, f64) {
    decay_rates_above(psi, FIT_FLOOR)
}

/// [`decay_rates`] with a different magnitude floor.
pub fn decay_rates_above(psi: &[f64], floor: f64) -> (usize, f64, f64, f64) {
    let center = psi
        .iter()
        .enumerate()
        .fold((0, 0.0), |acc, (i, v)| if v.abs() > acc.1 { (i, v.abs()) } else { acc })
        .0;
    let left = fit_points(psi, center, true, floor);
    let right = fit_points(psi, center, false, floor);
    let rate = |p: &[(f64, f64)]| slope_fit(p).map(|f| -f.0).unwrap_or(0.0);
    let both: Vec<(f64, f64)> = left.iter().chain(&right).copied().collect();
    let r2 = match slope_fit(&both) {
        Some((_, _, ss_res)) => {
            let my = both.iter().map(|p| p.1).sum::<f64>() / both.len() as f64;
            let ss_tot: f64 = both.iter().map(|p| (p.1 - my).powi(2)).sum();
            if ss_tot > 0.0 {
                1.0 - ss_res / ss_tot
            } else {
                0.0
            }
        }
        None => 0.0,
    };
    (center, rate(&left), rate(&right), r2)
}

/// Inverse iteration at a known eigenvalue: 3 solves, sup-normalized.
pub fn inverse_iteration(diag: &[f64], energy: f64, index: usize) -> Result<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed ^ index as u64);
    let mut v: Vec<f64> = (0..diag.len()).map(|_| rng.gen_range(0.5..1.5)).collect();
    for _ in 0..3 {
        v = tridiag::solve_shifted(diag, energy, &v);
        let m = v.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        if !(m.is_finite() && m > 0.0) {
            return Err(SpectraError::InverseIterationStall { index });
        }
        v.iter_mut().for_each(|x| *x /= m);
    }
    Ok(v)
}

/// `max_m |psi(m) + G(m, n1) psi(n1 - 1) + G(m, n2) psi(n2 + 1)|` over a
/// block `[n1, n2]` strictly inside the big box.
pub fn poisson_residual(diag: &[f64], energy: f64, psi: &[f64], n1: usize, n2: usize) -> Result<f64> {
    if n1 == 0 || n2 + 1 >= psi.len() || n1 > n2 {
        return Err(SpectraError::InvalidArgument(format!(
            "Poisson block [{n1}, {n2}] must sit strictly inside the box"
        )));
    }
    let g = GreenBox::from_diagonal(n1 as i64, &diag[n1..=n2], energy);
    let mut worst: f64 = 0.0;
    for m in n1..=n2 {
        let gl = g.entry(Edge::Left, m as i64).map_err(|e| with_energy(e, energy))?;
        let gr = g.entry(Edge::Right, m as i64).map_err(|e| with_energy(e, energy))?;
        let val = |v: GreenValue| v.sign * v.log_abs.exp();
        let rhs = -val(gl) * psi[n1 - 1] - val(gr) * psi[n2 + 1];
        worst = worst.max((psi[m] - rhs).abs());
    }
    Ok(worst)
}

/// Poisson blocks of width 21 on either side of the center. Blocks holding
/// the center are left out: their Green's function is as large as
/// `1 / psi(edge)^2`, which turns roundoff in `psi` into O(1) residuals.
fn poisson_blocks(center: usize, len: usize) -> Vec<(usize, usize)> {
    let c = center as i64;
    [(c - 41, c - 21), (c - 21, c - 1), (c + 1, c + 21), (c + 21, c + 41)]
        .into_iter()
        .map(|(a, b)| (a.max(1) as usize, (b.min(len as i64 - 2)).max(1) as usize))
        .filter(|(a, b)| a <= b)
        .collect()
}

/// Eigenpairs of a prescribed diagonal with eigenvalues in `[lo, hi]`,
/// each with its decay fit.
pub fn localized_eigenpairs_diagonal(diag: &[f64], lo: f64, hi: f64) -> Vec<Result<DecayFit>> {
    tridiag::eigenvalues_in(diag, lo, hi)
        .par_iter()
        .map(|&(index, energy)| {
            let psi = inverse_iteration(diag, energy, index)?;
            let residual = tridiag::apply_shifted(diag, energy, &psi)
                .iter()
                .fold(0.0f64, |a, r| a.max(r.abs()));
            let (center, rate_left, rate_right, r_squared) = decay_rates(&psi);
            let mut poisson: f64 = 0.0;
            for (a, b) in poisson_blocks(center, diag.len()) {
                match poisson_residual(diag, energy, &psi, a, b) {
                    Ok(r) => poisson = poisson.max(r),
                    Err(SpectraError::EigenvalueHit { .. }) => {}
                    Err(e) => return Err(e),
                }
            }
            Ok(DecayFit {
                eigen_index: index,
                energy,
                center,
                rate_left,
                rate_right,
                r_squared,
                residual,
                poisson_residual: poisson,
                psi,
            })
        })
        .collect()
}

/// Eigenpairs of `H_{n_big}(x)` in the energy window.
pub fn localized_eigenpairs(
    x: f64,
    alpha: &Frequency,
    potential: &PotentialSpec,
    n_big: usize,
    window: (f64, f64),
) -> Result<Vec<Result<DecayFit>>> {
    let pts = alpha.orbit(x, 0, n_big);
    if let Some(site) = pts.iter().position(|&t| potential.is_near_singularity(t)) {
        return Err(SpectraError::SingularBox { x, site });
    }
    let diag: Vec<f64> = pts.iter().map(|&t| potential.eval_interior(t)).collect();
    Ok(localized_eigenpairs_diagonal(&diag, window.0, window.1))
}

/// Singular sites in a window and their grouping.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterScan {
    pub window: (i64, i64),
    pub singular: Vec<i64>,
    /// `(first, last)` of each group; a new group starts after a gap
    /// larger than `(q + 1) / 2`.
    pub clusters: Vec<(i64, i64)>,
}

impl ClusterScan {
    /// At most one cluster, of diameter at most `(q + 1) / 2`.
    pub fn single_cluster(&self, q: usize) -> bool {
        let half = (q as i64 + 1) / 2;
        self.clusters.len() <= 1 && self.clusters.iter().all(|(a, b)| b - a <= half)
    }
}

/// All `(mu, q)`-singular sites `m` in `[lo, hi]`, in `O((hi - lo + q) q)`
/// via prefix and suffix determinants of each sliding block.
#[allow(clippy::too_many_arguments)]
pub fn singular_cluster_scan(
    x: f64,
    energy: f64,
    q: usize,
    mu: f64,
    lo: i64,
    hi: i64,
    alpha: &Frequency,
    potential: &PotentialSpec,
) -> Result<ClusterScan> {
    if hi < lo || hi - lo > 100_000 {
        return Err(SpectraError::InvalidArgument(
            "scan window must hold 1 to 10^5 sites".into(),
        ));
    }
    let qi = q as i64;
    let margin = (qi + 4) / 5;
    let first = lo - (qi - 1) + margin;
    let last = hi - margin;
    let span = (last - first + qi) as usize;
    let pts = alpha.orbit(x, first, span);
    if let Some(site) = pts.iter().position(|&t| potential.is_near_singularity(t)) {
        return Err(SpectraError::SingularBox { x, site });
    }
    let diag: Vec<f64> = pts.iter().map(|&t| potential.eval_interior(t)).collect();
    let flags: Vec<Vec<i64>> = (first..=last)
        .into_par_iter()
        .map(|n1| {
            let off = (n1 - first) as usize;
            let g = GreenBox::from_diagonal(n1, &diag[off..off + q], energy);
            let mut ok = Vec::new();
            for m in (n1 + margin).max(lo)..=(n1 + qi - 1 - margin).min(hi) {
                if let Ok(true) = edges_small(&g, m, mu) {
                    ok.push(m);
                }
            }
            ok
        })
        .collect();
    let mut regular = vec![false; (hi - lo + 1) as usize];
    for m in flags.into_iter().flatten() {
        regular[(m - lo) as usize] = true;
    }
    let singular: Vec<i64> = regular
        .iter()
        .enumerate()
        .filter(|(_, &r)| !r)
        .map(|(i, _)| lo + i as i64)
        .collect();
    let half = (qi + 1) / 2;
    let mut clusters: Vec<(i64, i64)> = Vec::new();
    for &m in &singular {
        match clusters.last_mut() {
            Some(c) if m - c.1 <= half => c.1 = m,
            _ => clusters.push((m, m)),
        }
    }
    Ok(ClusterScan {
        window: (lo, hi),
        singular,
        clusters,
    })
}
