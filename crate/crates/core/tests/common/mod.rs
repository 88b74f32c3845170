#![allow(dead_code)]

use nalgebra::{Complex, DMatrix};

/// Dense `H` with the given diagonal and unit off-diagonals.
pub fn dense(diag: &[f64]) -> Vec<Vec<f64>> {
    let n = diag.len();
    let mut a = vec![vec![0.0; n]; n];
    for i in 0..n {
        a[i][i] = diag[i];
        if i + 1 < n {
            a[i][i + 1] = 1.0;
            a[i + 1][i] = 1.0;
        }
    }
    a
}

/// Cyclic Jacobi rotations until the off-diagonal mass is negligible.
pub fn jacobi_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
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

/// `(log|det(E - H)|, sign)` by LU.
pub fn lu_log_det(diag: &[f64], e: f64) -> (f64, f64) {
    let n = diag.len();
    let m = DMatrix::from_fn(n, n, |i, j| {
        let h = if i == j {
            diag[i]
        } else if i.abs_diff(j) == 1 {
            1.0
        } else {
            0.0
        };
        if i == j {
            e - h
        } else {
            -h
        }
    });
    let lu = m.lu();
    let u = lu.u();
    let log = (0..n).map(|i| u[(i, i)].abs().ln()).sum();
    // the determinant itself may overflow, its sign does not
    (log, lu.determinant().signum())
}

/// `(H - E)^{-1}` densely.
pub fn dense_resolvent(diag: &[f64], e: f64) -> DMatrix<f64> {
    let n = diag.len();
    let m = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            diag[i] - e
        } else if i.abs_diff(j) == 1 {
            1.0
        } else {
            0.0
        }
    });
    m.try_inverse().expect("resolvent exists")
}

/// Sorted eigenvalues of a dense Hermitian matrix.
pub fn hermitian_eigenvalues(m: &[Vec<num_complex::Complex64>]) -> Vec<f64> {
    let n = m.len();
    let a = DMatrix::from_fn(n, n, |i, j| Complex::new(m[i][j].re, m[i][j].im));
    let mut ev: Vec<f64> = a.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Lyapunov exponent of the Maryland model in closed form:
/// `4 cosh L = sqrt((2 + E)^2 + lambda^2) + sqrt((2 - E)^2 + lambda^2)`.
pub fn maryland_lyapunov(lambda: f64, e: f64) -> f64 {
    let s = ((2.0 + e).powi(2) + lambda * lambda).sqrt() + ((2.0 - e).powi(2) + lambda * lambda).sqrt();
    (s / 4.0).acosh()
}
