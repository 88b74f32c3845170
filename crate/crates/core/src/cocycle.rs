//! Transfer-matrix cocycle `A(x, E) = [[E - f(x), -1], [1, 0]]` over the
//! rotation, its `M = F G` factorization, and Lyapunov-exponent estimators.

use rayon::prelude::*;

use crate::arithmetic::{discrepancy, DcFit, Frequency};
use crate::error::{Result, SpectraError};
use crate::phases;
use crate::potential::{frac, PotentialSpec};
use crate::tridiag;

/// `m * 2^exp` with `max |m_ij|` kept in `(1/2, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Scaled2 {
    m: [[f64; 2]; 2],
    exp: i64,
}

/// `2^k` for `k` in the normal range.
#[inline]
fn pow2(k: i64) -> f64 {
    f64::from_bits(((k + 1023) as u64) << 52)
}

impl Scaled2 {
    const IDENTITY: Scaled2 = Scaled2 {
        m: [[1.0, 0.0], [0.0, 1.0]],
        exp: 0,
    };

    #[inline]
    fn normalize(&mut self) {
        let big = self.m.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs()));
        if big == 0.0 || !big.is_finite() {
            return;
        }
        // big = f 2^e with f in (1/2, 1]
        let bits = big.to_bits();
        let e = ((bits >> 52) & 0x7ff) as i64 - 1023 + i64::from(bits & ((1 << 52) - 1) != 0);
        if e != 0 {
            let s = pow2(-e);
            for v in self.m.iter_mut().flatten() {
                *v *= s;
            }
            self.exp += e;
        }
    }

    /// Left-multiply by `s * [[w, -1], [1, 0]]`.
    #[inline]
    fn push(&mut self, w: f64, s: f64) {
        let [[a, b], [c, d]] = self.m;
        self.m = [[s * (w * a - c), s * (w * b - d)], [s * a, s * b]];
        self.normalize();
    }

    fn log_norm(&self) -> f64 {
        spectral_norm(&self.m).ln() + self.exp as f64 * std::f64::consts::LN_2
    }
}

/// Largest singular value of a 2x2 matrix, from `M^T M` without cancellation.
pub fn spectral_norm(m: &[[f64; 2]; 2]) -> f64 {
    let [[a, b], [c, d]] = *m;
    let p = a * a + c * c;
    let r = b * b + d * d;
    let s = a * b + c * d;
    let half = 0.5 * (p - r);
    (0.5 * (p + r) + (half * half + s * s).sqrt()).sqrt()
}

/// `M_n(x, E) = A(x + (n-1) alpha) ... A(x)` as `exp(log_scale) * unit`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferProduct {
    pub x: f64,
    pub energy: f64,
    pub n: usize,
    pub log_scale: f64,
    pub unit: [[f64; 2]; 2],
    exp2: i64,
}

impl TransferProduct {
    fn from_scaled(x: f64, energy: f64, n: usize, s: Scaled2) -> Self {
        TransferProduct {
            x,
            energy,
            n,
            log_scale: s.exp as f64 * std::f64::consts::LN_2,
            unit: s.m,
            exp2: s.exp,
        }
    }

    /// Product over a prescribed diagonal `v_0, ..., v_{n-1}`.
    pub fn from_diagonal(diag: &[f64], energy: f64) -> Self {
        let mut s = Scaled2::IDENTITY;
        for &v in diag {
            s.push(energy - v, 1.0);
        }
        Self::from_scaled(0.0, energy, diag.len(), s)
    }

    /// `log ||M_n||` (spectral norm).
    pub fn log_norm(&self) -> f64 {
        spectral_norm(&self.unit).ln() + self.log_scale
    }

    /// `(log |M_n[0][0]|, sign)`; the entry is `det(E - H_n(x))`.
    pub fn top_left(&self) -> (f64, f64) {
        let t = self.unit[0][0];
        (t.abs().ln() + self.log_scale, t.signum())
    }

    /// `log |det M_n|` as represented. Meaningful only while the product is
    /// well conditioned: past `~ 18 / L` steps the determinant of `unit`
    /// drops below the rounding floor of its entries.
    pub fn log_abs_det(&self) -> f64 {
        let [[a, b], [c, d]] = self.unit;
        (a * d - b * c).abs().ln() + 2.0 * self.log_scale
    }

    /// `later * self`: the product over `n + later.n` steps when `later`
    /// starts at `x + n alpha`.
    pub fn then(&self, later: &TransferProduct) -> TransferProduct {
        let (a, b) = (later.unit, self.unit);
        let mut s = Scaled2 {
            m: [
                [
                    a[0][0] * b[0][0] + a[0][1] * b[1][0],
                    a[0][0] * b[0][1] + a[0][1] * b[1][1],
                ],
                [
                    a[1][0] * b[0][0] + a[1][1] * b[1][0],
                    a[1][0] * b[0][1] + a[1][1] * b[1][1],
                ],
            ],
            exp: self.exp2 + later.exp2,
        };
        s.normalize();
        Self::from_scaled(self.x, self.energy, self.n + later.n, s)
    }

    /// `max_ij |M_ij - N_ij| / ||M||_max`, with both at a common scale.
    pub fn relative_distance(&self, other: &TransferProduct) -> f64 {
        let shift = other.exp2 - self.exp2;
        if shift.abs() > 1000 {
            return f64::INFINITY;
        }
        let scale = 2f64.powi(shift as i32);
        let mut diff: f64 = 0.0;
        let mut size: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                let a = self.unit[i][j];
                let b = other.unit[i][j] * scale;
                diff = diff.max((a - b).abs());
                size = size.max(a.abs()).max(b.abs());
            }
        }
        diff / size
    }
}

fn orbit_diagonal(x: f64, n: usize, alpha: &Frequency, potential: &PotentialSpec) -> Result<Vec<f64>> {
    let pts = alpha.orbit(x, 0, n);
    pts.iter()
        .enumerate()
        .map(|(site, &t)| {
            potential
                .eval(t)
                .map_err(|_| SpectraError::SingularOrbitPoint { x, site })
        })
        .collect()
}

/// `M_n(x, E)` along the orbit of `x`.
pub fn transfer(
    x: f64,
    energy: f64,
    n: usize,
    alpha: &Frequency,
    potential: &PotentialSpec,
) -> Result<TransferProduct> {
    let x = frac(x);
    let diag = orbit_diagonal(x, n, alpha, potential)?;
    let mut t = TransferProduct::from_diagonal(&diag, energy);
    t.x = x;
    Ok(t)
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    #[inline]
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.carry += (self.sum - t) + v;
        } else {
            self.carry += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// The split `M_n = F_n G_n` with `F_n = prod (1 + |v_l - E|)` separated at
/// level `B`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FactorSplit {
    pub b: f64,
    pub log_f_le: f64,
    pub log_f_gt: f64,
    pub l_count: usize,
    pub log_g_norm: f64,
}

pub fn factor_split(
    x: f64,
    energy: f64,
    n: usize,
    b: f64,
    alpha: &Frequency,
    potential: &PotentialSpec,
) -> Result<FactorSplit> {
    let diag = orbit_diagonal(frac(x), n, alpha, potential)?;
    Ok(factor_split_diagonal(&diag, energy, b))
}

pub fn factor_split_diagonal(diag: &[f64], energy: f64, b: f64) -> FactorSplit {
    let mut le = CompensatedSum::default();
    let mut gt = CompensatedSum::default();
    let mut l_count = 0;
    let mut g = Scaled2::IDENTITY;
    for &v in diag {
        let w = energy - v;
        let a = w.abs();
        if a > b {
            gt.add(a.ln_1p());
            l_count += 1;
        } else {
            le.add(a.ln_1p());
        }
        g.push(w, 1.0 / (1.0 + a));
    }
    FactorSplit {
        b,
        log_f_le: le.value(),
        log_f_gt: gt.value(),
        l_count,
        log_g_norm: g.log_norm(),
    }
}

/// A phase-averaged estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LyapunovEstimate {
    pub value: f64,
    pub stderr: f64,
    pub samples: usize,
    /// Phases shifted off the singularity guard.
    pub substitutions: usize,
}

fn average(values: &[f64], substitutions: usize) -> LyapunovEstimate {
    let s = values.len() as f64;
    let mean = values.iter().sum::<f64>() / s;
    let var = if values.len() > 1 {
        values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (s - 1.0)
    } else {
        0.0
    };
    LyapunovEstimate {
        value: mean,
        stderr: (var / s).sqrt(),
        samples: values.len(),
        substitutions,
    }
}

fn phase_average<F>(
    phases_in: &[f64],
    n: usize,
    alpha: &Frequency,
    potential: &PotentialSpec,
    f: F,
) -> Result<LyapunovEstimate>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    if phases_in.is_empty() || n == 0 {
        return Err(SpectraError::InvalidArgument(
            "need n >= 1 and at least one phase".into(),
        ));
    }
    let rows: Vec<(f64, usize)> = phases_in
        .par_iter()
        .map(|&x0| {
            let (x, shifts) = phases::resolve(x0, n, alpha, potential);
            let diag = orbit_diagonal(x, n, alpha, potential)?;
            Ok((f(&diag), shifts))
        })
        .collect::<Result<_>>()?;
    let values: Vec<f64> = rows.iter().map(|r| r.0).collect();
    Ok(average(&values, rows.iter().map(|r| r.1).sum()))
}

/// `(1/S) sum_x log ||M_n(x, E)|| / n` over stratified phases.
pub fn lyapunov(
    energy: f64,
    n: usize,
    x_samples: usize,
    alpha: &Frequency,
    potential: &PotentialSpec,
) -> Result<LyapunovEstimate> {
    lyapunov_at(energy, n, &phases::stratified(x_samples, None), alpha, potential)
}

pub fn lyapunov_at(
    energy: f64,
    n: usize,
    xs: &[f64],
    alpha: &Frequency,
    potential: &PotentialSpec,
) -> Result<LyapunovEstimate> {
    phase_average(xs, n, alpha, potential, |d| {
        TransferProduct::from_diagonal(d, energy).log_norm() / n as f64
    })
}

/// `(1/S) sum_x log |det(E - H_n(x))| / n` over stratified phases.
pub fn lyapunov_via_det(
    energy: f64,
    n: usize,
    x_samples: usize,
    alpha: &Frequency,
    potential: &PotentialSpec,
) -> Result<LyapunovEstimate> {
    lyapunov_via_det_at(energy, n, &phases::stratified(x_samples, None), alpha, potential)
}

pub fn lyapunov_via_det_at(
    energy: f64,
    n: usize,
    xs: &[f64],
    alpha: &Frequency,
    potential: &PotentialSpec,
) -> Result<LyapunovEstimate> {
    let est = phase_average(xs, n, alpha, potential, |d| {
        tridiag::det_log(d, energy).log_abs / n as f64
    })?;
    if !est.value.is_finite() {
        return Err(SpectraError::EigenvalueHit { energy });
    }
    Ok(est)
}

/// Worst grid point of `log ||M_n|| - n (L(E) + eps) - log F_n^{>B}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpperBoundCheck {
    pub max_excess: f64,
    pub x: f64,
    pub energy: f64,
}

/// Evaluate the uniform upper bound on an `(x, E)` grid; `l_hat[i]` is the
/// reference exponent at `energies[i]`.
#[allow(clippy::too_many_arguments)]
pub fn uniform_upper_check(
    energies: &[f64],
    l_hat: &[f64],
    n: usize,
    b: f64,
    xs: &[f64],
    eps: f64,
    alpha: &Frequency,
    potential: &PotentialSpec,
) -> Result<UpperBoundCheck> {
    if energies.len() != l_hat.len() || energies.is_empty() || xs.is_empty() {
        return Err(SpectraError::InvalidArgument(
            "energies and l_hat must be nonempty and of equal length".into(),
        ));
    }
    let diags: Vec<Vec<f64>> = xs
        .par_iter()
        .map(|&x0| {
            let (x, _) = phases::resolve(x0, n, alpha, potential);
            orbit_diagonal(x, n, alpha, potential).map(|d| (x, d))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .map(|(_, d)| d)
        .collect();
    let cells: Vec<UpperBoundCheck> = (0..energies.len() * xs.len())
        .into_par_iter()
        .map(|idx| {
            let (ie, ix) = (idx / xs.len(), idx % xs.len());
            let e = energies[ie];
            let d = &diags[ix];
            let log_m = TransferProduct::from_diagonal(d, e).log_norm();
            let split = factor_split_diagonal(d, e, b);
            UpperBoundCheck {
                max_excess: log_m - n as f64 * (l_hat[ie] + eps) - split.log_f_gt,
                x: xs[ix],
                energy: e,
            }
        })
        .collect();
    Ok(cells
        .into_iter()
        .reduce(|a, c| if c.max_excess > a.max_excess { c } else { a })
        .unwrap())
}

/// `int_{|f - E| <= B} log(1 + |f - E|) dx`, by double-exponential
/// quadrature on either side of `f^{-1}(E)`.
pub fn truncated_log_integral(energy: f64, b: f64, potential: &PotentialSpec) -> f64 {
    let t0 = potential.inverse(energy - b);
    let t1 = potential.inverse(energy);
    let t2 = potential.inverse(energy + b);
    let g = |t: f64| (potential.eval_interior(t) - energy).abs().ln_1p();
    let part = |a: f64, c: f64| {
        if c > a {
            quadrature::double_exponential::integrate(g, a, c, 1e-12).integral
        } else {
            0.0
        }
    };
    part(t0, t1) + part(t1, t2)
}

/// Koksma-type comparison of the truncated ergodic average.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscrepancyCheck {
    /// `|log F^{<=B} / n - int_{|f-E|<=B} log(1+|f-E|)|`.
    pub lhs: f64,
    /// `C log(1+B) / n^{1/tau - eps}`.
    pub koksma: f64,
    /// `2 l log(1+B) / n`.
    pub tail: f64,
    /// The fitted `C(alpha, eps)`.
    pub constant: f64,
}

impl DiscrepancyCheck {
    /// The inequality with a factor 2 of slack on the right.
    pub fn holds(&self) -> bool {
        self.lhs <= 2.0 * (self.koksma + self.tail) + 1e-12
    }
}

/// `C(alpha, eps) = 4 max_m D*_m(x) m^{1/tau - eps}` over `m = 2, 4, ..., n`
/// and `m = n`; the 4 is the total variation of the truncated integrand
/// in units of `log(1+B)`.
pub fn koksma_constant(x: f64, n: usize, alpha: &Frequency, tau: f64, eps: f64) -> f64 {
    let mut ladder: Vec<usize> = std::iter::successors(Some(2usize), |m| Some(m * 2))
        .take_while(|&m| m < n)
        .collect();
    ladder.push(n.max(1));
    let expo = 1.0 / tau - eps;
    ladder
        .into_iter()
        .map(|m| discrepancy(x, alpha, m) * (m as f64).powf(expo))
        .fold(0.0, f64::max)
        * 4.0
}

#[allow(clippy::too_many_arguments)]
pub fn discrepancy_bound_check(
    x: f64,
    energy: f64,
    n: usize,
    b: f64,
    alpha: &Frequency,
    potential: &PotentialSpec,
    fit: &DcFit,
    eps: f64,
) -> Result<DiscrepancyCheck> {
    let split = factor_split(x, energy, n, b, alpha, potential)?;
    let integral = truncated_log_integral(energy, b, potential);
    let lhs = (split.log_f_le / n as f64 - integral).abs();
    let constant = koksma_constant(x, n, alpha, fit.tau, eps);
    let lb = b.ln_1p();
    Ok(DiscrepancyCheck {
        lhs,
        koksma: constant * lb / (n as f64).powf(1.0 / fit.tau - eps),
        tail: 2.0 * split.l_count as f64 * lb / n as f64,
        constant,
    })
}
