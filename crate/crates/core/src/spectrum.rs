//! Floquet fibers of the rational-frequency operator and the covering of
//! the real line by their spectra.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::arithmetic::Frequency;
use crate::error::{Result, SpectraError};
use crate::ids::{largest_pool_gap, IdsBuilder};
use crate::potential::PotentialSpec;

/// `h_theta(x)`: the `q x q` block with diagonal `f(x + k p/q)`, unit
/// hopping, and the Bloch corners `A[q-1][0] = e^{2 pi i q theta}`,
/// `A[0][q-1] = e^{-2 pi i q theta}`.
#[derive(Debug, Clone, PartialEq)]
pub struct FloquetFiber {
    pub p: u64,
    pub q: u64,
    pub x: f64,
    pub theta: f64,
    pub diag: Vec<f64>,
}

impl FloquetFiber {
    pub fn new(p: u64, q: u64, x: f64, theta: f64, potential: &PotentialSpec) -> Result<Self> {
        let pts = if q == 1 {
            vec![crate::potential::frac(x)]
        } else {
            Frequency::rational(p, q)?.orbit(x, 0, q as usize)
        };
        if pts.iter().any(|&t| potential.is_near_singularity(t)) {
            return Err(SpectraError::SingularPhase { x });
        }
        Ok(FloquetFiber {
            p,
            q,
            x,
            theta,
            diag: pts.iter().map(|&t| potential.eval_interior(t)).collect(),
        })
    }

    /// `e^{-2 pi i q theta}`, the upper-right corner.
    fn corner(&self) -> Complex64 {
        Complex64::from_polar(1.0, -2.0 * PI * self.q as f64 * self.theta)
    }

    /// Dense Hermitian matrix, for inspection and tests.
    pub fn matrix(&self) -> Vec<Vec<Complex64>> {
        let q = self.diag.len();
        let mut m = vec![vec![Complex64::new(0.0, 0.0); q]; q];
        for k in 0..q {
            m[k][k] += self.diag[k];
        }
        let z = self.corner();
        if q == 1 {
            m[0][0] += z + z.conj();
            return m;
        }
        for k in 0..q - 1 {
            m[k][k + 1] += 1.0;
            m[k + 1][k] += 1.0;
        }
        m[0][q - 1] += z;
        m[q - 1][0] += z.conj();
        m
    }

    /// `#{eigenvalues <= e}` from the inertia of `h - e`.
    ///
    /// LDL* with the last-column fill of the cyclic tridiagonal. A small
    /// pivot makes the last pivot a cancelling sum of large terms, so the
    /// elimination is restarted at another site of the cycle (a unitary
    /// relabeling) until that sum is trustworthy. Exact zero pivots are
    /// resolved by re-counting a few ulps above `e`.
    pub fn count(&self, e: f64) -> usize {
        let q = self.diag.len();
        let step = e.abs().max(1.0) * f64::EPSILON;
        let mut shift = 0.0;
        for _ in 0..16 {
            let mut best: Option<(f64, usize)> = None;
            for r in 0..q {
                let Some((c, quality)) = self.inertia(e + shift, r) else {
                    continue;
                };
                if quality > 1e3 * f64::EPSILON {
                    return c;
                }
                if best.is_none_or(|(b, _)| quality > b) {
                    best = Some((quality, c));
                }
                if q <= 2 {
                    break;
                }
            }
            if let Some((_, c)) = best {
                return c;
            }
            shift = if shift == 0.0 { step } else { 2.0 * shift };
        }
        0
    }

    /// Inertia with the elimination started at site `r`, and the ratio of
    /// the last pivot to the magnitude of the terms it was summed from.
    fn inertia(&self, e: f64, r: usize) -> Option<(usize, f64)> {
        let q = self.diag.len();
        let v = |k: usize| self.diag[(r + k) % q] - e;
        let z = self.corner();
        let mut count = 0;
        let mut pivot = |d: f64| -> Option<f64> {
            if d == 0.0 || !d.is_finite() {
                return None;
            }
            if d < 0.0 {
                count += 1;
            }
            Some(d)
        };
        let quality = match q {
            1 => {
                pivot(v(0) + 2.0 * z.re)?;
                1.0
            }
            2 => {
                let s = (1.0 + z).norm_sqr();
                let d0 = pivot(v(0))?;
                pivot(v(1) - s / d0)?;
                1.0
            }
            _ => {
                let mut a = v(0);
                let mut c = z; // current row's entry in the last column
                let mut last = v(q - 1);
                let mut mass = last.abs();
                for k in 0..q - 2 {
                    let d = pivot(a)?;
                    a = v(k + 1) - 1.0 / d;
                    let t = c.norm_sqr() / d;
                    last -= t;
                    mass += t.abs();
                    c = -c / d;
                }
                // row q-2: its superdiagonal is the last column
                let d = pivot(a)?;
                let t = (1.0 + c).norm_sqr() / d;
                last -= t;
                mass += t.abs();
                pivot(last)?;
                last.abs() / mass
            }
        };
        Some((count, quality))
    }

    /// Sorted eigenvalues by bisection on the inertia count.
    pub fn spectrum(&self) -> Vec<f64> {
        let q = self.diag.len();
        if q == 1 {
            return vec![self.diag[0] + 2.0 * self.corner().re];
        }
        let mut s = self.diag.clone();
        s.sort_by(f64::total_cmp);
        (0..q)
            .map(|k| {
                let pad = 1e-9 * s[k].abs().max(1.0);
                let (mut lo, mut hi) = (s[k] - 2.0 - pad, s[k] + 2.0 + pad);
                loop {
                    let mid = 0.5 * (lo + hi);
                    if hi - lo <= 1e-14 * mid.abs().max(1.0) || mid <= lo || mid >= hi {
                        break mid;
                    }
                    if self.count(mid) > k {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
            })
            .collect()
    }
}

pub fn fiber_spectrum(p: u64, q: u64, x: f64, theta: f64, potential: &PotentialSpec) -> Result<Vec<f64>> {
    Ok(FloquetFiber::new(p, q, x, theta, potential)?.spectrum())
}

/// Weyl bound on eigenvalue motion per unit of `theta`: the corner
/// perturbation has norm `|e^{2 pi i q dtheta} - 1| <= 2 pi q dtheta`,
/// doubled at `q = 1` where both corners land on one entry.
pub fn theta_lipschitz_bound(q: u64) -> f64 {
    let base = 2.0 * PI * q as f64;
    if q == 1 {
        2.0 * base
    } else {
        base
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverageResult {
    pub energy: f64,
    pub x_witness: f64,
    pub gap: f64,
    pub iterations: usize,
}

fn nearest(spec: &[f64], e: f64) -> f64 {
    spec.iter().map(|v| (v - e).abs()).fold(f64::INFINITY, f64::min)
}

/// Bracket inside `(0, 1/q)` kept clear of the poles.
fn bracket(q: u64, potential: &PotentialSpec) -> (f64, f64) {
    let g = 10.0 * potential.singularity_guard;
    (g, 1.0 / q as f64 - g)
}

/// Bisection in `x` on the single eigenvalue curve that crosses `E` as `x`
/// runs over `(0, 1/q)`. `split` in `(0, 1)` places each probe inside the
/// current bracket; `x_tol > 0` keeps going until the bracket is that
/// narrow instead of stopping at the first probe within `tol`.
#[allow(clippy::too_many_arguments)]
fn bisect_witness(
    p: u64,
    q: u64,
    theta: f64,
    e: f64,
    tol: f64,
    split: f64,
    x_tol: f64,
    potential: &PotentialSpec,
) -> Result<CoverageResult> {
    let (mut lo, mut hi) = bracket(q, potential);
    let fiber = |x: f64| FloquetFiber::new(p, q, x, theta, potential);
    let c_lo = fiber(lo)?.count(e);
    let mut best = CoverageResult {
        energy: e,
        x_witness: f64::NAN,
        gap: f64::INFINITY,
        iterations: 0,
    };
    for it in 1..=200 {
        let x = if it == 1 && split == 0.5 {
            0.5 / q as f64
        } else {
            lo + split * (hi - lo)
        };
        let f = fiber(x)?;
        let gap = nearest(&f.spectrum(), e);
        if gap < best.gap {
            best = CoverageResult {
                energy: e,
                x_witness: x,
                gap,
                iterations: it,
            };
        }
        if x_tol == 0.0 && gap <= tol {
            return Ok(best);
        }
        if x_tol > 0.0 && hi - lo <= x_tol {
            return Ok(CoverageResult {
                x_witness: x,
                gap,
                iterations: it,
                energy: e,
            });
        }
        // eigenvalues rise with x, so the count at E drops by one across the root
        if f.count(e) >= c_lo {
            lo = x;
        } else {
            hi = x;
        }
        if hi <= lo {
            break;
        }
    }
    if best.gap <= tol {
        return Ok(best);
    }
    Err(SpectraError::CoverageFailure {
        energy: e,
        tol,
        gap: best.gap,
    })
}

/// For each energy, a phase `x` in `(0, 1/q)` with `dist(E, sigma(h_theta(x)))
/// <= tol`. The first probe is `x = 1/(2q)`.
pub fn coverage_check(
    p: u64,
    q: u64,
    theta: f64,
    energies: &[f64],
    tol: f64,
    potential: &PotentialSpec,
) -> Result<Vec<CoverageResult>> {
    energies
        .par_iter()
        .map(|&e| bisect_witness(p, q, theta, e, tol, 0.5, 0.0, potential))
        .collect()
}

/// The crossing phase found by left-biased and right-biased bisection,
/// each run until the bracket is narrower than `x_tol`.
pub fn two_sided_witness(
    p: u64,
    q: u64,
    theta: f64,
    e: f64,
    x_tol: f64,
    potential: &PotentialSpec,
) -> Result<(f64, f64)> {
    let left = bisect_witness(p, q, theta, e, f64::INFINITY, 1.0 / 3.0, x_tol, potential)?;
    let right = bisect_witness(p, q, theta, e, f64::INFINITY, 2.0 / 3.0, x_tol, potential)?;
    Ok((left.x_witness, right.x_witness))
}

/// Longest stretch of `[lo, hi]` free of eigenvalues pooled over
/// `x_samples` boxes `H_n(x)`.
pub fn pooled_gap(
    alpha: &Frequency,
    potential: &PotentialSpec,
    n: usize,
    x_samples: usize,
    lo: f64,
    hi: f64,
) -> Result<f64> {
    let table = IdsBuilder::new(alpha, potential, n, x_samples)
        .keep_pool(true)
        .build(&[lo, hi])?;
    Ok(largest_pool_gap(&table.eigen_pool, lo, hi))
}
