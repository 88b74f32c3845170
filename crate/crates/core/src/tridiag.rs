//! Kernels for real symmetric tridiagonal matrices with unit off-diagonal,
//! `T = diag(v) + shift-up + shift-down`, i.e. Dirichlet blocks of a discrete
//! Schrödinger operator.
//!
//! Nothing here factorizes a dense matrix. Counting uses the Sturm (LDL^T)
//! pivot recursion, eigenvalues are isolated by bisection on the count and
//! finished with Newton steps on the same pivot recursion, and determinants
//! are propagated as a mantissa plus a power-of-two exponent.

/// Replacement for an exactly vanishing Sturm pivot. A zero pivot means `E`
/// is an eigenvalue of the leading block; it is counted as `<= E` and
/// continued as a tiny negative number, which is the limit from `E + 0`.
pub const ZERO_PIVOT: f64 = 1e-300;

/// Number of eigenvalues `<= e` (closed interval convention).
#[inline]
pub fn sturm_count(diag: &[f64], e: f64) -> usize {
    let mut count = 0usize;
    let mut inv = 0.0;
    for &v in diag {
        let mut d = (v - e) - inv;
        if d <= 0.0 {
            count += 1;
            if d == 0.0 {
                d = -ZERO_PIVOT;
            }
        }
        inv = 1.0 / d;
    }
    count
}

/// Count plus the Newton correction `det(T - e) / det(T - e)'`.
#[inline]
fn sturm_newton(diag: &[f64], e: f64) -> (usize, f64) {
    let mut count = 0usize;
    let mut inv = 0.0;
    let mut d_prime = 0.0;
    let mut log_deriv = 0.0;
    for (k, &v) in diag.iter().enumerate() {
        let mut d = (v - e) - inv;
        // d_k' = -1 + d_{k-1}' / d_{k-1}^2
        let dp = if k == 0 { -1.0 } else { -1.0 + d_prime * inv * inv };
        if d <= 0.0 {
            count += 1;
            if d == 0.0 {
                d = -ZERO_PIVOT;
            }
        }
        inv = 1.0 / d;
        log_deriv += dp * inv;
        d_prime = dp;
    }
    let step = if log_deriv.is_finite() && log_deriv != 0.0 {
        1.0 / log_deriv
    } else {
        0.0
    };
    (count, step)
}

#[inline]
fn tolerance(x: f64) -> f64 {
    2e-13 * x.abs().max(1.0)
}

/// The `k`-th smallest eigenvalue (0-based), given a bracket with
/// `count(lo) <= k < count(hi)`.
pub fn eigenvalue_in_bracket(diag: &[f64], k: usize, mut lo: f64, mut hi: f64) -> f64 {
    let mut c_lo = sturm_count(diag, lo);
    let mut c_hi = sturm_count(diag, hi);
    debug_assert!(c_lo <= k && c_hi > k, "bad bracket for index {k}");
    while !(c_lo == k && c_hi == k + 1) {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= tolerance(mid) || mid <= lo || mid >= hi {
            return mid;
        }
        let c = sturm_count(diag, mid);
        if c > k {
            hi = mid;
            c_hi = c;
        } else {
            lo = mid;
            c_lo = c;
        }
    }
    polish_isolated(diag, k, lo, hi)
}

/// Safeguarded Newton on `det(T - E)` inside a bracket holding eigenvalue
/// `k` and no other.
fn polish_isolated(diag: &[f64], k: usize, mut lo: f64, mut hi: f64) -> f64 {
    if diag.len() == 1 {
        return diag[0];
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..100 {
        let (c, step) = sturm_newton(diag, x);
        if c > k {
            hi = x;
        } else {
            lo = x;
        }
        let candidate = x - step;
        let inside = candidate >= lo && candidate <= hi;
        if hi - lo <= tolerance(x) {
            return if inside { candidate } else { 0.5 * (lo + hi) };
        }
        if inside && step.abs() <= tolerance(x) {
            // a tiny step also comes out of a zero pivot; confirm the crossing
            let t = 2.0 * tolerance(candidate);
            if sturm_count(diag, candidate - t) <= k && sturm_count(diag, candidate + t) > k {
                return candidate;
            }
        }
        x = if inside && candidate > lo && candidate < hi {
            candidate
        } else {
            0.5 * (lo + hi)
        };
    }
    0.5 * (lo + hi)
}

/// Split `[lo, hi]` (counts `c_lo`, `c_hi`) until every piece holds one
/// eigenvalue, then polish each. Unresolvable clusters are returned as
/// repeated midpoints.
fn isolate_all(diag: &[f64], lo: f64, hi: f64, c_lo: usize, c_hi: usize, out: &mut Vec<f64>) {
    let mut stack = vec![(lo, hi, c_lo, c_hi)];
    while let Some((lo, hi, c_lo, c_hi)) = stack.pop() {
        match c_hi - c_lo {
            0 => {}
            1 => out.push(polish_isolated(diag, c_lo, lo, hi)),
            m => {
                let mid = 0.5 * (lo + hi);
                if hi - lo <= tolerance(mid) || mid <= lo || mid >= hi {
                    out.extend(std::iter::repeat_n(mid, m));
                    continue;
                }
                let c = sturm_count(diag, mid);
                // upper half first so the lower half is popped first
                stack.push((mid, hi, c, c_hi));
                stack.push((lo, mid, c_lo, c));
            }
        }
    }
}

/// Weyl bracket for eigenvalue `k`: `|E_k - s_k| <= ||offdiag|| < 2` where
/// `s` is the sorted diagonal.
fn weyl_bracket(sorted_diag: &[f64], k: usize) -> (f64, f64) {
    let s = sorted_diag[k];
    let pad = 1e-9 * s.abs().max(1.0);
    (s - 2.0 - pad, s + 2.0 + pad)
}

fn sorted(diag: &[f64]) -> Vec<f64> {
    let mut s = diag.to_vec();
    s.sort_by(f64::total_cmp);
    s
}

/// Eigenvalue `k` (0-based, ascending).
pub fn eigenvalue(diag: &[f64], k: usize) -> f64 {
    assert!(k < diag.len());
    let s = sorted(diag);
    let (lo, hi) = weyl_bracket(&s, k);
    eigenvalue_in_bracket(diag, k, lo, hi)
}

/// Eigenvalues in `[a, b]` (ascending), restricted to the union of Weyl
/// brackets so that far-out isolated eigenvalues cost no global bisection.
fn eigenvalues_window(diag: &[f64], a: f64, b: f64) -> Vec<f64> {
    let s = sorted(diag);
    let mut out = Vec::new();
    let mut k = 0;
    while k < s.len() {
        // merge overlapping brackets into one component
        let (lo, mut hi) = weyl_bracket(&s, k);
        let mut m = k + 1;
        while m < s.len() && weyl_bracket(&s, m).0 <= hi {
            hi = weyl_bracket(&s, m).1;
            m += 1;
        }
        k = m;
        let (lo, hi) = (lo.max(a), hi.min(b));
        if lo >= hi {
            continue;
        }
        let c_lo = sturm_count(diag, lo);
        let c_hi = sturm_count(diag, hi);
        isolate_all(diag, lo, hi, c_lo, c_hi, &mut out);
    }
    out
}

/// All eigenvalues in ascending order.
pub fn eigenvalues(diag: &[f64]) -> Vec<f64> {
    if diag.len() == 1 {
        return vec![diag[0]];
    }
    eigenvalues_window(diag, f64::NEG_INFINITY, f64::INFINITY)
}

/// Eigenvalues in the closed window `[a, b]`, with their indices.
pub fn eigenvalues_in(diag: &[f64], a: f64, b: f64) -> Vec<(usize, f64)> {
    if a > b || diag.is_empty() {
        return Vec::new();
    }
    let lo = a.next_down();
    let first = sturm_count(diag, lo);
    eigenvalues_window(diag, lo, b)
        .into_iter()
        .enumerate()
        .map(|(i, e)| (first + i, e))
        .collect()
}

/// `log|D|` and sign of a determinant carried in scaled form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogDet {
    pub log_abs: f64,
    pub sign: f64,
    /// The determinant vanished to working precision.
    pub zero: bool,
}

impl LogDet {
    pub const ONE: LogDet = LogDet {
        log_abs: 0.0,
        sign: 1.0,
        zero: false,
    };
}

/// Scaled determinant-recurrence state `(prev, cur) * 2^exp`.
#[derive(Debug, Clone, Copy)]
struct Scaled {
    prev: f64,
    cur: f64,
    exp: i64,
}

impl Scaled {
    #[inline]
    fn renormalize(&mut self) {
        let m = self.cur.abs().max(self.prev.abs());
        if m > 1e150 || (m < 1e-150 && m > 0.0) {
            let e = m.log2().floor() as i32;
            let scale = 2f64.powi(-e);
            self.prev *= scale;
            self.cur *= scale;
            self.exp += e as i64;
        }
    }

    fn log_det(&self) -> LogDet {
        if self.cur == 0.0 || !self.cur.is_finite() {
            return LogDet {
                log_abs: f64::NEG_INFINITY,
                sign: 1.0,
                zero: true,
            };
        }
        LogDet {
            log_abs: self.cur.abs().ln() + self.exp as f64 * std::f64::consts::LN_2,
            sign: self.cur.signum(),
            zero: false,
        }
    }
}

/// `det(E I - T)` via `P_k = (E - v_{k-1}) P_{k-1} - P_{k-2}`, `P_0 = 1`,
/// `P_{-1} = 0`.
pub fn det_log(diag: &[f64], e: f64) -> LogDet {
    let mut s = Scaled {
        prev: 0.0,
        cur: 1.0,
        exp: 0,
    };
    for &v in diag {
        let next = (e - v) * s.cur - s.prev;
        s.prev = s.cur;
        s.cur = next;
        s.renormalize();
    }
    s.log_det()
}

/// `log|det(E - T_{[0,k)})|` for every prefix length `k = 0..=n`.
pub fn det_log_prefixes(diag: &[f64], e: f64) -> Vec<LogDet> {
    let mut out = Vec::with_capacity(diag.len() + 1);
    out.push(LogDet::ONE);
    let mut s = Scaled {
        prev: 0.0,
        cur: 1.0,
        exp: 0,
    };
    for &v in diag {
        let next = (e - v) * s.cur - s.prev;
        s.prev = s.cur;
        s.cur = next;
        s.renormalize();
        out.push(s.log_det());
    }
    out
}

/// `log|det(E - T_{[k,n)})|` for every suffix start `k = 0..=n`; entry `n`
/// is the empty determinant.
pub fn det_log_suffixes(diag: &[f64], e: f64) -> Vec<LogDet> {
    let n = diag.len();
    let mut out = vec![LogDet::ONE; n + 1];
    let mut s = Scaled {
        prev: 0.0,
        cur: 1.0,
        exp: 0,
    };
    for k in (0..n).rev() {
        let next = (e - diag[k]) * s.cur - s.prev;
        s.prev = s.cur;
        s.cur = next;
        s.renormalize();
        out[k] = s.log_det();
    }
    out
}

/// Solve `(T - shift) y = rhs` by Gaussian elimination with partial
/// pivoting. Exactly singular pivots are replaced by a relative epsilon,
/// which is what inverse iteration wants.
pub fn solve_shifted(diag: &[f64], shift: f64, rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    assert_eq!(rhs.len(), n);
    if n == 0 {
        return Vec::new();
    }
    let scale = diag.iter().fold(2.0f64, |m, v| m.max((v - shift).abs()));
    let tiny = f64::EPSILON * scale;
    // row k after elimination: u0[k] x_k + u1[k] x_{k+1} + u2[k] x_{k+2} = b[k]
    let mut u0 = vec![0.0; n];
    let mut u1 = vec![0.0; n];
    let mut u2 = vec![0.0; n];
    let mut b = rhs.to_vec();

    // current active row k: (a, c, 0) on columns k, k+1, k+2
    let mut a = diag[0] - shift;
    let mut c = if n > 1 { 1.0 } else { 0.0 };
    let mut c2 = 0.0;
    let mut bk = b[0];
    for k in 0..n {
        if k + 1 == n {
            u0[k] = if a == 0.0 { tiny } else { a };
            u1[k] = 0.0;
            u2[k] = 0.0;
            b[k] = bk;
            break;
        }
        // next row k+1: (1, v_{k+1} - shift, 1) on columns k, k+1, k+2
        let sub = 1.0;
        let dnext = diag[k + 1] - shift;
        let supnext = if k + 2 < n { 1.0 } else { 0.0 };
        let bnext = b[k + 1];
        if a.abs() >= sub {
            let piv = if a == 0.0 { tiny } else { a };
            let m = sub / piv;
            u0[k] = piv;
            u1[k] = c;
            u2[k] = c2;
            b[k] = bk;
            a = dnext - m * c;
            c = supnext - m * c2;
            c2 = 0.0;
            bk = bnext - m * bk;
        } else {
            // swap rows k and k+1
            let m = a / sub;
            u0[k] = sub;
            u1[k] = dnext;
            u2[k] = supnext;
            b[k] = bnext;
            let new_a = c - m * dnext;
            let new_c = c2 - m * supnext;
            a = new_a;
            c = new_c;
            c2 = 0.0;
            bk -= m * bnext;
        }
    }
    let mut y = vec![0.0; n];
    for k in (0..n).rev() {
        let mut s = b[k];
        if k + 1 < n {
            s -= u1[k] * y[k + 1];
        }
        if k + 2 < n {
            s -= u2[k] * y[k + 2];
        }
        y[k] = s / u0[k];
    }
    y
}

/// `(T - e) psi` evaluated componentwise.
pub fn apply_shifted(diag: &[f64], e: f64, psi: &[f64]) -> Vec<f64> {
    let n = diag.len();
    (0..n)
        .map(|k| {
            let mut s = (diag[k] - e) * psi[k];
            if k > 0 {
                s += psi[k - 1];
            }
            if k + 1 < n {
                s += psi[k + 1];
            }
            s
        })
        .collect()
}
