//! The acceptance suite. Each check rebuilds its inputs from scratch and
//! reports the measured quantity next to the pinned threshold.

use std::fmt;
use std::path::Path;

use qp_spectra::boxes::{counting_spread, eigen_curves, seam_probe, BoxOperator};
use qp_spectra::cocycle::{lyapunov, lyapunov_via_det, uniform_upper_check};
use qp_spectra::greens::{decay_rates_above, fit_ldt_constant, ldt_ratio_check, localized_eigenpairs};
use qp_spectra::ids::{energy_grid, inverse_vs_f_gap, lipschitz_modulus, lyap_lower_bound, IdsBuilder};
use qp_spectra::potential::frac;
use qp_spectra::spectrum::{coverage_check, pooled_gap};
use qp_spectra::{phases, Frequency, PotentialSpec, SpectraError};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::RunConfig;
use crate::Command;

#[derive(Debug, Clone)]
pub struct Criterion {
    pub id: &'static str,
    pub title: &'static str,
    pub passed: bool,
    pub measured: f64,
    pub threshold: f64,
    pub detail: String,
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed { "PASS" } else { "FAIL" };
        write!(
            f,
            "{:<4} {status} {:<22} measured {:.6e} threshold {:.6e}  {}",
            self.id, self.title, self.measured, self.threshold, self.detail
        )
    }
}

type Check = std::result::Result<Criterion, SpectraError>;

fn failed(id: &'static str, title: &'static str, err: SpectraError) -> Criterion {
    Criterion {
        id,
        title,
        passed: false,
        measured: f64::NAN,
        threshold: f64::NAN,
        detail: format!("error: {err}"),
    }
}

fn settle(id: &'static str, title: &'static str, c: Check) -> Criterion {
    c.unwrap_or_else(|e| failed(id, title, e))
}

// dense oracles, independent of the tridiagonal machinery

fn dense(diag: &[f64], e: f64) -> Vec<Vec<f64>> {
    let n = diag.len();
    let mut a = vec![vec![0.0; n]; n];
    for i in 0..n {
        a[i][i] = diag[i] - e;
        if i + 1 < n {
            a[i][i + 1] = 1.0;
            a[i + 1][i] = 1.0;
        }
    }
    a
}

/// Cyclic Jacobi rotations to a diagonal; sorted eigenvalues.
fn jacobi_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        let scale: f64 = (0..n).map(|i| a[i][i] * a[i][i]).sum::<f64>().max(1.0);
        if off <= 1e-30 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q] == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Gaussian elimination with partial pivoting: `(log|det|, sign)`.
fn lu_log_det(mut a: Vec<Vec<f64>>) -> (f64, f64) {
    let n = a.len();
    let (mut log, mut sign) = (0.0, 1.0);
    for k in 0..n {
        let piv = (k..n).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs())).unwrap();
        if a[piv][k] == 0.0 {
            return (f64::NEG_INFINITY, 0.0);
        }
        if piv != k {
            a.swap(piv, k);
            sign = -sign;
        }
        let d = a[k][k];
        log += d.abs().ln();
        sign *= d.signum();
        for i in k + 1..n {
            let m = a[i][k] / d;
            if m != 0.0 {
                for j in k..n {
                    a[i][j] -= m * a[k][j];
                }
            }
        }
    }
    (log, sign)
}

fn random_box(rng: &mut ChaCha8Rng, n_max: usize, alpha: &Frequency, pot: &PotentialSpec) -> BoxOperator {
    loop {
        let n = rng.gen_range(1..=n_max);
        let b = BoxOperator::new(rng.gen::<f64>(), alpha, n, pot);
        if !b.is_singular() {
            return b;
        }
    }
}

pub fn ac1() -> Criterion {
    let (id, title) = ("AC1", "Sturm oracle");
    settle(
        id,
        title,
        (|| {
            let alpha = Frequency::golden();
            let pot = PotentialSpec::maryland(1.0);
            let mut rng = ChaCha8Rng::seed_from_u64(101);
            let (mut worst, mut mismatches): (f64, usize) = (0.0, 0);
            for _ in 0..200 {
                let b = random_box(&mut rng, 40, &alpha, &pot);
                let oracle = jacobi_eigenvalues(dense(b.diagonal(), 0.0));
                for (a, o) in b.eigenvalues()?.iter().zip(&oracle) {
                    worst = worst.max((a - o).abs() / o.abs().max(1.0));
                }
                for _ in 0..5 {
                    let e = rng.gen_range(-10.0..10.0);
                    if b.sturm_count(e)? != oracle.iter().filter(|&&o| o <= e).count() {
                        mismatches += 1;
                    }
                }
            }
            Ok(Criterion {
                id,
                title,
                passed: mismatches == 0 && worst <= 1e-9,
                measured: worst,
                threshold: 1e-9,
                detail: format!("200 boxes, {mismatches} count mismatches in 1000 probes"),
            })
        })(),
    )
}

pub fn ac2() -> Criterion {
    let (id, title) = ("AC2", "determinant oracle");
    settle(
        id,
        title,
        (|| {
            let alpha = Frequency::golden();
            let pot = PotentialSpec::maryland(1.0);
            let mut rng = ChaCha8Rng::seed_from_u64(102);
            let (mut worst, mut sign_errors): (f64, usize) = (0.0, 0);
            for _ in 0..100 {
                let b = random_box(&mut rng, 30, &alpha, &pot);
                let e = rng.gen_range(-8.0..8.0);
                let d = b.det_log(e)?;
                // det(E - H) = (-1)^n det(H - E)
                let (log, s) = lu_log_det(dense(b.diagonal(), e));
                let s = if b.len() % 2 == 1 { -s } else { s };
                worst = worst.max((d.log_abs - log).abs() / log.abs().max(1.0));
                if d.sign != s {
                    sign_errors += 1;
                }
            }
            Ok(Criterion {
                id,
                title,
                passed: sign_errors == 0 && worst <= 1e-8,
                measured: worst,
                threshold: 1e-8,
                detail: format!("100 boxes, {sign_errors} sign mismatches"),
            })
        })(),
    )
}

pub fn ac3() -> Criterion {
    let (id, title) = ("AC3", "jump law");
    settle(
        id,
        title,
        (|| {
            let alpha = Frequency::golden();
            let pot = PotentialSpec::maryland(1.0);
            let (mut worst, mut escape): (f64, f64) = (0.0, f64::INFINITY);
            for l in 0..8 {
                let p = seam_probe(&alpha, 8, &pot, l, 1e-6)?;
                worst = worst.max(p.jump_defect()).max(p.pencil_defect());
                let (lo, hi) = p.escaping();
                escape = escape.min(-lo).min(hi);
            }
            Ok(Criterion {
                id,
                title,
                passed: worst <= 1e-3 && escape > 1e4,
                measured: worst,
                threshold: 1e-3,
                detail: format!("8 seams at delta 1e-6, escaping eigenvalues beyond +-{escape:.3e}"),
            })
        })(),
    )
}

pub fn ac4() -> Criterion {
    let (id, title) = ("AC4", "curves near f");
    settle(
        id,
        title,
        (|| {
            let alpha = Frequency::golden();
            let pot = PotentialSpec::maryland(1.0);
            let mut worst: f64 = 0.0;
            for n in [5, 34, 144] {
                worst = worst.max(eigen_curves(&alpha, n, &pot, 1000)?.sinai_defect(&pot));
            }
            Ok(Criterion {
                id,
                title,
                passed: worst <= 2.0 + 1e-9,
                measured: worst,
                threshold: 2.0 + 1e-9,
                detail: "n in {5, 34, 144}, 1000 phases".into(),
            })
        })(),
    )
}

pub fn ac5() -> Criterion {
    let (id, title) = ("AC5", "Lipschitz IDS");
    settle(
        id,
        title,
        (|| {
            let alpha = Frequency::golden();
            let grid = energy_grid(-8.0, 8.0, 321);
            let mut worst: f64 = 0.0;
            let mut parts = Vec::new();
            for lambda in [1.0, 2.0, 5.0] {
                let pot = PotentialSpec::maryland(lambda);
                let table = IdsBuilder::new(&alpha, &pot, 987, 200).build(&grid)?;
                let m = lipschitz_modulus(&table)?;
                let ratio = m * pot.gamma();
                worst = worst.max(ratio);
                parts.push(format!("lambda {lambda}: {m:.4}"));
            }
            Ok(Criterion {
                id,
                title,
                passed: worst <= 1.1,
                measured: worst,
                threshold: 1.1,
                detail: format!("modulus times gamma; {}", parts.join(", ")),
            })
        })(),
    )
}

pub fn ac6() -> Criterion {
    let (id, title) = ("AC6", "IDS inverse vs f");
    settle(
        id,
        title,
        (|| {
            let alpha = Frequency::golden();
            let mut worst: f64 = 0.0;
            let mut parts = Vec::new();
            for lambda in [2.0, 5.0] {
                let pot = PotentialSpec::maryland(lambda);
                let grid = energy_grid(pot.eval(0.04)? - 3.0, pot.eval(0.96)? + 3.0, 2401);
                let table = IdsBuilder::new(&alpha, &pot, 987, 200).build(&grid)?;
                let gap = inverse_vs_f_gap(&table, &pot, 0.05, 0.95, 181)?;
                worst = worst.max(gap);
                parts.push(format!("lambda {lambda}: {gap:.4}"));
            }
            Ok(Criterion {
                id,
                title,
                passed: worst <= 2.05,
                measured: worst,
                threshold: 2.05,
                detail: parts.join(", "),
            })
        })(),
    )
}

pub fn ac7() -> Criterion {
    let (id, title) = ("AC7", "Thouless formula");
    settle(
        id,
        title,
        (|| {
            let alpha = Frequency::golden();
            let pot = PotentialSpec::maryland(2.0);
            let grid = energy_grid(-8.0, 8.0, 33);
            let table = IdsBuilder::new(&alpha, &pot, 987, 200).keep_pool(true).build(&grid)?;
            let diffs: Vec<f64> = grid
                .par_iter()
                .map(|&e| Ok((table.thouless(e)?.value - lyapunov_via_det(e, 987, 256, &alpha, &pot)?.value).abs()))
                .collect::<Result<_, SpectraError>>()?;
            let worst = diffs.iter().copied().fold(0.0, f64::max);
            Ok(Criterion {
                id,
                title,
                passed: worst <= 0.05,
                measured: worst,
                threshold: 0.05,
                detail: "pool of 200 phases vs determinant average over 256".into(),
            })
        })(),
    )
}

pub fn ac8() -> Criterion {
    let (id, title) = ("AC8", "Lyapunov floor");
    settle(
        id,
        title,
        (|| {
            let alpha = Frequency::golden();
            let pot = PotentialSpec::maryland(5.0);
            let floor = lyap_lower_bound(pot.gamma());
            let rows: Vec<(f64, f64)> = energy_grid(-8.0, 8.0, 33)
                .par_iter()
                .map(|&e| {
                    let a = lyapunov(e, 987, 64, &alpha, &pot)?.value;
                    let b = lyapunov_via_det(e, 987, 64, &alpha, &pot)?.value;
                    Ok((a, b))
                })
                .collect::<Result<_, SpectraError>>()?;
            let min = rows.iter().map(|r| r.0).fold(f64::INFINITY, f64::min);
            let diff = rows.iter().map(|r| (r.0 - r.1).abs()).fold(0.0, f64::max);
            Ok(Criterion {
                id,
                title,
                passed: min >= floor - 0.05 && diff <= 0.02,
                measured: min,
                threshold: floor - 0.05,
                detail: format!("floor {floor:.4}, estimator gap {diff:.2e} (limit 2e-2)"),
            })
        })(),
    )
}

pub fn ac9() -> Criterion {
    let (id, title) = ("AC9", "localization");
    settle(
        id,
        title,
        (|| {
            let alpha = Frequency::golden();
            let pot = PotentialSpec::maryland(5.0);
            let fits = localized_eigenpairs(0.123, &alpha, &pot, 1597, (-2.0, 2.0))?
                .into_iter()
                .collect::<Result<Vec<_>, _>>()?;
            let l_hat: Vec<f64> = fits
                .par_iter()
                .map(|f| lyapunov_via_det(f.energy, 987, 32, &alpha, &pot).map(|l| l.value))
                .collect::<Result<_, _>>()?;
            let (mut good, mut strict, mut res, mut poi) = (0usize, 0usize, 0f64, 0f64);
            for (f, &l) in fits.iter().zip(&l_hat) {
                if f.rate_left.min(f.rate_right) >= 0.9 * l {
                    good += 1;
                }
                let (_, rl, rr, _) = decay_rates_above(&f.psi, 1e-13);
                if rl.min(rr) >= 0.9 * l {
                    strict += 1;
                }
                res = res.max(f.residual);
                poi = poi.max(f.poisson_residual);
            }
            let total = fits.len().max(1);
            let rate = good as f64 / total as f64;
            Ok(Criterion {
            id,
            title,
            passed: rate >= 0.9 && res <= 1e-8 && poi <= 1e-6,
            measured: rate,
            threshold: 0.9,
            detail: format!(
                "{good}/{total} eigenpairs, residual {res:.1e}, Poisson {poi:.1e}; with a 1e-13 fit floor {strict}/{total}"
            ),
        })
        })(),
    )
}

pub fn ac10() -> Criterion {
    let (id, title) = ("AC10", "counting rigidity");
    settle(
        id,
        title,
        (|| {
            let alpha = Frequency::golden();
            let pot = PotentialSpec::maryland(2.0);
            let (mut ok, mut worst) = (true, 0usize);
            let mut parts = Vec::new();
            for e in [-3.0, 0.0, 3.0] {
                let s: Vec<usize> = [55, 89, 144, 233]
                    .iter()
                    .map(|&q| counting_spread(&alpha, q, e, 500, &pot).map(|c| c.spread))
                    .collect::<Result<_, _>>()?;
                ok &= s[3] <= s[0] + 2;
                worst = worst.max(*s.iter().max().unwrap());
                parts.push(format!("E={e}: {s:?}"));
            }
            Ok(Criterion {
                id,
                title,
                passed: ok && worst <= 40,
                measured: worst as f64,
                threshold: 40.0,
                detail: format!("spreads for q = 55, 89, 144, 233; {}", parts.join("; ")),
            })
        })(),
    )
}

pub fn ac11() -> Criterion {
    let (id, title) = ("AC11", "rational coverage");
    settle(
        id,
        title,
        (|| {
            let pot = PotentialSpec::maryland(1.0);
            let res = coverage_check(3, 5, 0.0, &energy_grid(-10.0, 10.0, 100), 1e-8, &pot)?;
            let worst = res.iter().map(|r| r.gap).fold(0.0, f64::max);
            let pooled = pooled_gap(&Frequency::golden(), &pot, 1597, 50, -8.0, 8.0)?;
            Ok(Criterion {
                id,
                title,
                passed: worst <= 1e-8 && pooled < 0.2,
                measured: worst,
                threshold: 1e-8,
                detail: format!("100 energies at alpha = 3/5; golden pooled gap {pooled:.2e} (limit 0.2)"),
            })
        })(),
    )
}

pub fn ac12() -> Criterion {
    let (id, title) = ("AC12", "LDT ratio bound");
    settle(
        id,
        title,
        (|| {
            let alpha = Frequency::golden();
            let pot = PotentialSpec::maryland(5.0);
            let (q, n) = (233usize, 47usize);
            let mut rng = ChaCha8Rng::seed_from_u64(112);
            let mut samples = Vec::new();
            let mut skipped = 0;
            while samples.len() < 100 {
                let x = rng.gen::<f64>();
                let e = rng.gen_range(-4.0..4.0);
                let l1 = rng.gen_range(0..=q - n);
                let l_hat = match lyapunov_via_det(e, 987, 32, &alpha, &pot) {
                    Ok(l) => l.value,
                    Err(SpectraError::EigenvalueHit { .. }) => {
                        skipped += 1;
                        continue;
                    }
                    Err(err) => return Err(err),
                };
                match ldt_ratio_check(x, e, q, n, l1, l_hat, 0.1, &alpha, &pot) {
                    Ok(s) => samples.push(s),
                    Err(SpectraError::EigenvalueHit { .. } | SpectraError::SingularBox { .. }) => skipped += 1,
                    Err(err) => return Err(err),
                }
            }
            let (c, fraction) = fit_ldt_constant(&samples, 40.0);
            // a site outside the sub-block sits 1e-8 from the pole
            let x = frac(-alpha.frac_mul(150) + 1e-8);
            let l_hat = lyapunov_via_det(0.5, 987, 64, &alpha, &pot)?.value;
            let stress = ldt_ratio_check(x, 0.5, q, n, 0, l_hat, 0.1, &alpha, &pot)?;
            let big = pot.eval(alpha.orbit(x, 150, 1)[0])?.abs();
            let stress_ok = stress.lhs.is_finite() && stress.slack(c) >= 0.0 && big > 1e6;
            Ok(Criterion {
                id,
                title,
                passed: fraction >= 0.95 && stress_ok,
                measured: fraction,
                threshold: 0.95,
                detail: format!(
                    "fitted C = {c:.2}, {skipped} draws resampled; stress |f| = {big:.1e}, lhs {:.3e}, slack {:.3e}",
                    stress.lhs,
                    stress.slack(c)
                ),
            })
        })(),
    )
}

pub fn ac13() -> Criterion {
    let (id, title) = ("AC13", "uniform upper bound");
    settle(
        id,
        title,
        (|| {
            let alpha = Frequency::golden();
            let pot = PotentialSpec::maryland(2.0);
            let es = energy_grid(-8.0, 8.0, 33);
            let l_hat: Vec<f64> = es
                .par_iter()
                .map(|&e| lyapunov_via_det(e, 987, 64, &alpha, &pot).map(|l| l.value))
                .collect::<Result<_, _>>()?;
            let xs = phases::stratified(32, None);
            let excess =
                |n: usize| uniform_upper_check(&es, &l_hat, n, n as f64, &xs, 0.1, &alpha, &pot).map(|c| c.max_excess);
            let main = excess(610)?;
            let ladder = [excess(144)?, excess(377)?, excess(987)?];
            let decreasing = ladder.windows(2).all(|w| w[1] < w[0]);
            Ok(Criterion {
                id,
                title,
                passed: main < 0.0 && decreasing,
                measured: main,
                threshold: 0.0,
                detail: format!(
                    "n = 610, 32 phases; excess at n = 144, 377, 987: {:.2}, {:.2}, {:.2}",
                    ladder[0], ladder[1], ladder[2]
                ),
            })
        })(),
    )
}

/// Runs `ids` and `lyapunov` on one and eight threads under `dir`.
pub fn ac14(dir: &Path) -> Criterion {
    let (id, title) = ("AC14", "thread determinism");
    let run = |threads: usize| -> Result<Vec<Vec<u8>>, String> {
        let cfg = RunConfig {
            n: 233,
            x_samples: 64,
            e_steps: 65,
            seed: Some(14),
            threads,
            out_dir: dir.join(format!("threads{threads}")),
            ..RunConfig::default()
        };
        let mut bytes = Vec::new();
        for cmd in [Command::Ids, Command::Lyapunov] {
            for path in crate::run(cmd, &cfg).map_err(|e| e.to_string())? {
                bytes.push(std::fs::read(&path).map_err(|e| e.to_string())?);
            }
        }
        Ok(bytes)
    };
    match (run(1), run(8)) {
        (Ok(a), Ok(b)) => {
            let same = a.len() == b.len() && a.iter().zip(&b).all(|(x, y)| x == y);
            let total: usize = a.iter().map(Vec::len).sum();
            Criterion {
                id,
                title,
                passed: same,
                measured: if same { 0.0 } else { 1.0 },
                threshold: 0.0,
                detail: format!("ids.csv and lyap.csv, {total} bytes, threads 1 vs 8"),
            }
        }
        (Err(e), _) | (_, Err(e)) => Criterion {
            id,
            title,
            passed: false,
            measured: f64::NAN,
            threshold: 0.0,
            detail: format!("error: {e}"),
        },
    }
}

/// All criteria in order; `dir` receives the AC14 scratch output.
pub fn all(dir: &Path) -> Vec<Criterion> {
    let checks: [fn() -> Criterion; 13] = [ac1, ac2, ac3, ac4, ac5, ac6, ac7, ac8, ac9, ac10, ac11, ac12, ac13];
    let mut out: Vec<Criterion> = checks.iter().map(|c| c()).collect();
    out.push(ac14(dir));
    out
}
