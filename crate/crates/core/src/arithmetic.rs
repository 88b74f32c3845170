//! Frequencies, continued fractions and rotation-orbit statistics.
//!
//! Irrational frequencies are held as a 128-bit fixed-point fraction
//! `alpha = A / 2^128`, so `{k alpha}` is computed exactly (for the stored
//! approximant) by wrapping multiplication. Rational frequencies `p/q` are
//! exact. Orbit points `{x + l alpha}` are formed in the same fixed-point
//! representation, which keeps distances to the integers trustworthy near
//! the poles of the potential.

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Result, SpectraError};

/// Width of the fixed-point mantissa used for irrational frequencies.
pub const DEFAULT_PRECISION_BITS: u32 = 128;
pub const MIN_PRECISION_BITS: u32 = 64;
/// Environment variable that narrows the fixed-point width.
pub const PRECISION_ENV: &str = "QP_SPECTRA_PRECISION_BITS";

const TWO_POW_NEG_128: f64 = 2.938_735_877_055_719e-39;
const ONE_MINUS_ULP: f64 = 1.0 - f64::EPSILON / 2.0;

pub fn precision_bits_from_env() -> u32 {
    std::env::var(PRECISION_ENV)
        .ok()
        .and_then(|s| s.trim().parse::<u32>().ok())
        .map(|b| b.clamp(MIN_PRECISION_BITS, DEFAULT_PRECISION_BITS))
        .unwrap_or(DEFAULT_PRECISION_BITS)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Repr {
    Fixed { mantissa: u128, bits: u32 },
    Rational { p: u64, q: u64 },
}

/// Fitted Diophantine constants: `||k alpha|| >= c |k|^-tau` on the scanned range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DcFit {
    pub c: f64,
    pub tau: f64,
    pub k_max: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Frequency {
    repr: Repr,
    label: String,
}

#[inline]
fn fixed_to_f64(r: u128) -> f64 {
    // values within 2^-54 of 1 round up to 1.0 in f64
    (r as f64 * TWO_POW_NEG_128).min(ONE_MINUS_ULP)
}

#[inline]
fn f64_to_fixed(x: f64) -> u128 {
    debug_assert!((0.0..1.0).contains(&x));
    (x * 2f64.powi(128)) as u128
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn mask_bits(mantissa: u128, bits: u32) -> u128 {
    if bits >= 128 {
        mantissa
    } else {
        mantissa & !((1u128 << (128 - bits)) - 1)
    }
}

fn biguint_to_u128(v: &BigUint) -> u128 {
    let digits = v.to_u64_digits();
    let lo = digits.first().copied().unwrap_or(0) as u128;
    let hi = digits.get(1).copied().unwrap_or(0) as u128;
    lo | (hi << 64)
}

impl Frequency {
    /// The golden mean `(sqrt 5 - 1) / 2`.
    pub fn golden() -> Self {
        let one = BigUint::from(1u8) << 128u32;
        let s = (BigUint::from(5u8) << 256u32).sqrt();
        let m = (s - &one) >> 1u32;
        Self::from_mantissa(biguint_to_u128(&m), "golden")
    }

    /// The silver mean `sqrt 2 - 1`.
    pub fn silver() -> Self {
        let one = BigUint::from(1u8) << 128u32;
        let s = (BigUint::from(2u8) << 256u32).sqrt();
        Self::from_mantissa(biguint_to_u128(&(s - one)), "silver")
    }

    fn from_mantissa(mantissa: u128, label: &str) -> Self {
        let bits = precision_bits_from_env();
        Self {
            repr: Repr::Fixed {
                mantissa: mask_bits(mantissa, bits),
                bits,
            },
            label: label.to_string(),
        }
    }

    /// Exact rational `p/q`, reduced. Requires `0 < p < q`.
    pub fn rational(p: u64, q: u64) -> Result<Self> {
        if q == 0 || p == 0 || p >= q {
            return Err(SpectraError::InvalidArgument(format!(
                "rational frequency {p}/{q} must lie in (0, 1)"
            )));
        }
        let g = gcd(p, q);
        let (p, q) = (p / g, q / g);
        Ok(Self {
            repr: Repr::Rational { p, q },
            label: format!("{p}/{q}"),
        })
    }

    /// A frequency from a decimal literal such as `0.7548776662466927`,
    /// converted exactly to the fixed-point representation.
    pub fn from_decimal(s: &str) -> Result<Self> {
        let bad = || SpectraError::InvalidArgument(format!("cannot parse frequency {s:?}"));
        let s = s.trim();
        let frac_digits = s.strip_prefix("0.").or_else(|| s.strip_prefix('.')).ok_or_else(bad)?;
        if frac_digits.is_empty() || !frac_digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let num = BigUint::parse_bytes(frac_digits.as_bytes(), 10).ok_or_else(bad)?;
        if num == BigUint::from(0u8) {
            return Err(bad());
        }
        let den = BigUint::from(10u8).pow(frac_digits.len() as u32);
        let m = (num << 128u32) / den;
        Ok(Self::from_mantissa(biguint_to_u128(&m), s))
    }

    /// Parse `golden`, `silver`, `p/q` or a decimal literal in `(0, 1)`.
    pub fn parse(s: &str) -> Result<Self> {
        let t = s.trim();
        match t {
            "golden" => Ok(Self::golden()),
            "silver" => Ok(Self::silver()),
            _ => {
                if let Some((p, q)) = t.split_once('/') {
                    let p = p.trim().parse::<u64>();
                    let q = q.trim().parse::<u64>();
                    match (p, q) {
                        (Ok(p), Ok(q)) => Self::rational(p, q),
                        _ => Err(SpectraError::InvalidArgument(format!(
                            "cannot parse rational frequency {s:?}"
                        ))),
                    }
                } else {
                    Self::from_decimal(t)
                }
            }
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_rational(&self) -> bool {
        matches!(self.repr, Repr::Rational { .. })
    }

    /// `(p, q)` for rational frequencies.
    pub fn as_rational(&self) -> Option<(u64, u64)> {
        match self.repr {
            Repr::Rational { p, q } => Some((p, q)),
            Repr::Fixed { .. } => None,
        }
    }

    pub fn precision_bits(&self) -> u32 {
        match self.repr {
            Repr::Fixed { bits, .. } => bits,
            Repr::Rational { .. } => u32::MAX,
        }
    }

    pub fn value(&self) -> f64 {
        match self.repr {
            Repr::Fixed { mantissa, .. } => fixed_to_f64(mantissa),
            Repr::Rational { p, q } => p as f64 / q as f64,
        }
    }

    /// `{k alpha}` in `[0, 1)`.
    pub fn frac_mul(&self, k: i64) -> f64 {
        match self.repr {
            Repr::Fixed { mantissa, .. } => {
                let r = (k.unsigned_abs() as u128).wrapping_mul(mantissa);
                let r = if k < 0 { r.wrapping_neg() } else { r };
                fixed_to_f64(r)
            }
            Repr::Rational { p, q } => {
                let r = (k.rem_euclid(q as i64) as u128 * p as u128 % q as u128) as f64;
                r / q as f64
            }
        }
    }

    /// `||k alpha||`, the distance from `k alpha` to the nearest integer.
    pub fn dist_mul(&self, k: i64) -> f64 {
        match self.repr {
            Repr::Fixed { mantissa, .. } => {
                let r = (k.unsigned_abs() as u128).wrapping_mul(mantissa);
                fixed_to_f64(r.min(r.wrapping_neg()))
            }
            Repr::Rational { p, q } => {
                let r = k.rem_euclid(q as i64) as u128 * p as u128 % q as u128;
                let r = r.min(q as u128 - r);
                r as f64 / q as f64
            }
        }
    }

    /// Orbit points `{x + (start + l) alpha}` for `l = 0..n`.
    pub fn orbit(&self, x: f64, start: i64, n: usize) -> Vec<f64> {
        let x = crate::potential::frac(x);
        match self.repr {
            Repr::Fixed { mantissa, .. } => {
                let step = mantissa;
                let mut r = f64_to_fixed(x).wrapping_add({
                    let base = (start.unsigned_abs() as u128).wrapping_mul(mantissa);
                    if start < 0 {
                        base.wrapping_neg()
                    } else {
                        base
                    }
                });
                let mut out = Vec::with_capacity(n);
                for _ in 0..n {
                    out.push(fixed_to_f64(r));
                    r = r.wrapping_add(step);
                }
                out
            }
            Repr::Rational { p, q } => {
                let qi = q as i64;
                let mut res = (start.rem_euclid(qi) as u128 * p as u128 % q as u128) as u64;
                let mut out = Vec::with_capacity(n);
                for _ in 0..n {
                    let t = x + res as f64 / q as f64;
                    out.push(if t >= 1.0 { t - 1.0 } else { t });
                    res = (res + p) % q;
                }
                out
            }
        }
    }

    /// Single orbit point `{x + l alpha}`.
    pub fn orbit_point(&self, x: f64, l: i64) -> f64 {
        self.orbit(x, l, 1)[0]
    }

    /// Exact continued-fraction expansion of the stored value.
    fn partial_quotients(&self) -> Vec<u64> {
        let (mut num, mut den) = match self.repr {
            Repr::Fixed { mantissa, .. } => (BigUint::from(mantissa), BigUint::from(1u8) << 128u32),
            Repr::Rational { p, q } => (BigUint::from(p), BigUint::from(q)),
        };
        // alpha in (0, 1): a_0 = 0, continue with den/num
        let zero = BigUint::from(0u8);
        let mut out = Vec::new();
        while num != zero && out.len() < 200 {
            let a = &den / &num;
            let r = &den % &num;
            out.push(a.to_u64_digits().first().copied().unwrap_or(0));
            den = num;
            num = r;
        }
        out
    }

    /// Convergents `k = 1..=count` that fit the precision budget, plus the
    /// error that stopped the expansion early, if any.
    fn convergents_partial(&self, count: usize) -> (Vec<(u64, u64)>, Option<SpectraError>) {
        let quotients = self.partial_quotients();
        let budget_bits = match self.repr {
            Repr::Fixed { bits, .. } => Some(bits.saturating_sub(8)),
            Repr::Rational { .. } => None,
        };
        // p_{-1}=1, q_{-1}=0; p_0=0, q_0=1
        let (mut p_prev, mut q_prev, mut p, mut q) = (1u128, 0u128, 0u128, 1u128);
        let mut out = Vec::with_capacity(count);
        for (k, &a) in quotients.iter().enumerate().take(count) {
            let a = a as u128;
            let p_next = a * p + p_prev;
            let q_next = a * q + q_prev;
            if let Some(bits) = budget_bits {
                let q2_bits = 2 * (128 - q_next.leading_zeros());
                if q2_bits > bits || q_next > u64::MAX as u128 {
                    let err = SpectraError::PrecisionExhausted {
                        bits: bits + 8,
                        index: k + 1,
                    };
                    return (out, Some(err));
                }
            }
            (p_prev, q_prev, p, q) = (p, q, p_next, q_next);
            out.push((p as u64, q as u64));
        }
        if let (true, Some(bits)) = (out.len() < count, budget_bits) {
            let err = SpectraError::PrecisionExhausted {
                bits: bits + 8,
                index: out.len() + 1,
            };
            return (out, Some(err));
        }
        (out, None)
    }

    /// The first `count` convergents `(p_k, q_k)`, `k = 1..=count`, of the
    /// continued fraction `[0; a_1, a_2, ...]`. Rational frequencies stop
    /// at their exact value.
    pub fn convergents(&self, count: usize) -> Result<Vec<(u64, u64)>> {
        if count > 40 {
            return Err(SpectraError::InvalidArgument(format!(
                "at most 40 convergents are supported, {count} requested"
            )));
        }
        match self.convergents_partial(count) {
            (_, Some(err)) => Err(err),
            (conv, None) => Ok(conv),
        }
    }

    /// As many of the first 40 convergents as the precision budget allows.
    pub fn trusted_convergents(&self) -> Vec<(u64, u64)> {
        self.convergents_partial(40).0
    }

    /// Convergent denominators not exceeding `q_max` that pass the
    /// good-denominator certificate.
    pub fn good_denominators(&self, q_max: u64) -> Vec<u64> {
        let mut out: Vec<u64> = Vec::new();
        for (_, q) in self.trusted_convergents() {
            if q > q_max {
                break;
            }
            if q >= 2 && out.last() != Some(&q) && certify_good_denominator(self, q).is_valid() {
                out.push(q);
            }
        }
        out
    }

    /// Largest certified good denominator `<= q_max`.
    pub fn largest_good_denominator(&self, q_max: u64) -> Option<u64> {
        self.good_denominators(q_max).last().copied()
    }
}

impl fmt::Display for Frequency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label)
    }
}

/// Relative slack on the `||q alpha|| <= 1/(sqrt(5) q)` clause. The constant
/// `sqrt 5` is sharp for the golden mean, whose odd-indexed Fibonacci
/// denominators (13, 89, 233, ...) exceed the bound by a relative 1e-3 or less.
pub const HURWITZ_SLACK: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GoodDenominatorCertificate {
    pub q: u64,
    pub min_gap: f64,
    pub max_gap: f64,
    pub qalpha_dist: f64,
    pub one_point_per_cell: bool,
}

impl GoodDenominatorCertificate {
    pub fn is_valid(&self) -> bool {
        let q = self.q as f64;
        self.min_gap >= 0.5 / q
            && self.max_gap <= 1.5 / q
            && self.qalpha_dist <= (1.0 + HURWITZ_SLACK) / (5f64.sqrt() * q)
            && self.one_point_per_cell
    }
}

/// Certify `q` as a good denominator of `alpha` by direct computation: the
/// gaps cut by `{j alpha}`, `1 <= j <= q-1`, the distance `||q alpha||`, and
/// whether each open cell `(j/q, (j+1)/q)` holds exactly one of
/// `{alpha}, ..., {q alpha}`.
pub fn certify_good_denominator(alpha: &Frequency, q: u64) -> GoodDenominatorCertificate {
    assert!(q >= 2, "good denominators start at 2");
    let mut pts: Vec<f64> = (1..q as i64).map(|j| alpha.frac_mul(j)).collect();
    pts.push(0.0);
    pts.push(1.0);
    pts.sort_by(f64::total_cmp);
    let (min_gap, max_gap) = pts
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), g| (lo.min(g), hi.max(g)));

    let mut counts = vec![0u32; q as usize];
    let mut on_boundary = false;
    for j in 1..=q as i64 {
        match alpha.repr {
            Repr::Rational { p, q: den } => {
                let r = (j as u128 * p as u128 % den as u128) * q as u128;
                if r.is_multiple_of(den as u128) {
                    on_boundary = true;
                } else {
                    counts[(r / den as u128) as usize] += 1;
                }
            }
            Repr::Fixed { .. } => {
                let t = alpha.frac_mul(j) * q as f64;
                let cell = t.floor();
                if t == cell {
                    on_boundary = true;
                } else {
                    counts[(cell as usize).min(q as usize - 1)] += 1;
                }
            }
        }
    }
    let one_point_per_cell = !on_boundary && counts.iter().all(|&c| c == 1);

    GoodDenominatorCertificate {
        q,
        min_gap,
        max_gap,
        qalpha_dist: alpha.dist_mul(q as i64),
        one_point_per_cell,
    }
}

/// Empirical Diophantine constants on `1 <= k <= k_max`.
///
/// The exponent is the least-squares slope of `log(1/||q alpha||)` against
/// `log q` over convergent denominators `2 <= q <= k_max` (at least three are
/// needed), clamped to `tau >= 1`. The constant is then the exact minimum of
/// `k^tau ||k alpha||` over the scanned range.
pub fn dc_fit(alpha: &Frequency, k_max: u64) -> DcFit {
    assert!(k_max >= 1);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (_, q) in alpha.trusted_convergents() {
        if q >= 2 && q <= k_max {
            let d = alpha.dist_mul(q as i64);
            if d > 0.0 {
                xs.push((q as f64).ln());
                ys.push(-d.ln());
            }
        }
    }
    let tau = if xs.len() >= 3 {
        let n = xs.len() as f64;
        let mx = xs.iter().sum::<f64>() / n;
        let my = ys.iter().sum::<f64>() / n;
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
        (sxy / sxx).max(1.0)
    } else {
        1.0
    };
    let c = (1..=k_max as i64)
        .map(|k| (k as f64).powf(tau) * alpha.dist_mul(k))
        .fold(f64::INFINITY, f64::min);
    DcFit { c, tau, k_max }
}

/// Star discrepancy of `u_(1) <= ... <= u_(n)` from the sorted-points formula.
pub fn star_discrepancy_sorted(sorted: &[f64]) -> f64 {
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &u)| {
            let i = i as f64;
            (u - i / n).abs().max((u - (i + 1.0) / n).abs())
        })
        .fold(0.0, f64::max)
}

/// Star discrepancy of `{x + l alpha}`, `l = 0..n`.
pub fn discrepancy(x: f64, alpha: &Frequency, n: usize) -> f64 {
    assert!(n >= 1);
    let mut pts = alpha.orbit(x, 0, n);
    pts.sort_by(f64::total_cmp);
    star_discrepancy_sorted(&pts)
}

/// Distinct circle gaps (to `tol`) of the orbit `{l alpha}`, `l = 0..n`.
pub fn orbit_gap_values(alpha: &Frequency, n: usize, tol: f64) -> Vec<f64> {
    let mut pts = alpha.orbit(0.0, 0, n);
    pts.sort_by(f64::total_cmp);
    let mut gaps: Vec<f64> = pts.windows(2).map(|w| w[1] - w[0]).collect();
    gaps.push(1.0 - pts[n - 1] + pts[0]);
    gaps.sort_by(f64::total_cmp);
    let mut distinct: Vec<f64> = Vec::new();
    for g in gaps {
        if distinct.last().is_none_or(|&d| g - d > tol) {
            distinct.push(g);
        }
    }
    distinct
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_convergents_are_fibonacci() {
        let q: Vec<u64> = Frequency::golden()
            .convergents(6)
            .unwrap()
            .into_iter()
            .map(|c| c.1)
            .collect();
        assert_eq!(q, vec![1, 2, 3, 5, 8, 13]);
    }

    #[test]
    fn silver_convergents_follow_pell() {
        let conv = Frequency::silver().convergents(5).unwrap();
        let q: Vec<u64> = conv.iter().map(|c| c.1).collect();
        // oracle: q_1 = 2, q_2 = 5, q_{k+1} = 2 q_k + q_{k-1}
        let mut pell = vec![2u64, 5];
        while pell.len() < 5 {
            let k = pell.len();
            pell.push(2 * pell[k - 1] + pell[k - 2]);
        }
        assert_eq!(q, pell);
        assert_eq!(q, vec![2, 5, 12, 29, 70]);
    }

    #[test]
    fn rational_convergents_terminate() {
        let a = Frequency::rational(1, 3).unwrap();
        assert_eq!(a.convergents(5).unwrap(), vec![(1, 3)]);
        let b = Frequency::rational(6, 10).unwrap();
        assert_eq!(b.convergents(10).unwrap().last(), Some(&(3, 5)));
    }

    #[test]
    fn convergent_bounds_hold() {
        for alpha in [Frequency::golden(), Frequency::silver()] {
            let conv = alpha.convergents(30).unwrap();
            for w in conv.windows(2) {
                let (_, q) = w[0];
                let (_, q_next) = w[1];
                // |alpha - p/q| = ||q alpha|| / q for convergents
                assert!(alpha.dist_mul(q as i64) < 1.0 / q_next as f64);
            }
        }
    }

    #[test]
    fn precision_budget_is_enforced() {
        assert!(Frequency::golden().convergents(40).is_ok());
        let f = Frequency::from_decimal("0.5772156649015329").unwrap();
        assert!(matches!(
            f.convergents(40),
            Err(SpectraError::PrecisionExhausted { .. })
        ));
        assert!(Frequency::golden().convergents(41).is_err());
    }

    #[test]
    fn golden_value_matches_f64() {
        let g = Frequency::golden();
        assert!((g.value() - (5f64.sqrt() - 1.0) / 2.0).abs() < 1e-16);
        // ||F_k alpha|| = alpha^(k+1) for golden, an exact identity
        let fib = [1i64, 2, 3, 5, 8, 13, 21, 34, 55, 89, 144, 233, 377, 610, 987];
        for (i, &q) in fib.iter().enumerate() {
            let expected = g.value().powi(i as i32 + 2);
            assert!((g.dist_mul(q) - expected).abs() < 1e-15 * (i as f64 + 2.0));
        }
    }

    #[test]
    fn parse_forms() {
        assert_eq!(Frequency::parse("golden").unwrap(), Frequency::golden());
        assert_eq!(Frequency::parse("3/5").unwrap().as_rational(), Some((3, 5)));
        assert!((Frequency::parse("0.25").unwrap().value() - 0.25).abs() < 1e-18);
        assert!(Frequency::parse("1.5").is_err());
        assert!(Frequency::parse("5/3").is_err());
        assert!(Frequency::parse("abc").is_err());
    }

    #[test]
    fn good_denominator_examples() {
        let g = Frequency::golden();
        let cert = certify_good_denominator(&g, 13);
        assert!(cert.is_valid(), "{cert:?}");
        for q in [55u64, 89, 144, 233, 377, 610, 987, 1597] {
            assert!(certify_good_denominator(&g, q).is_valid(), "q={q}");
        }
        assert!(!certify_good_denominator(&g, 12).is_valid());
        let quarter = Frequency::rational(1, 4).unwrap();
        assert!(!certify_good_denominator(&quarter, 4).is_valid());
    }

    #[test]
    fn good_denominator_matches_sort_oracle() {
        // oracle: explicit sort of j * alpha mod 1 in f64
        let g = Frequency::golden();
        for q in [13u64, 12] {
            let mut pts: Vec<f64> = (1..q).map(|j| (j as f64 * g.value()).fract()).collect();
            pts.extend([0.0, 1.0]);
            pts.sort_by(f64::total_cmp);
            let gaps: Vec<f64> = pts.windows(2).map(|w| w[1] - w[0]).collect();
            let lo = gaps.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = gaps.iter().cloned().fold(0.0, f64::max);
            let cert = certify_good_denominator(&g, q);
            assert!((cert.min_gap - lo).abs() < 1e-12 && (cert.max_gap - hi).abs() < 1e-12);
        }
    }

    #[test]
    fn dc_fit_examples() {
        let g = Frequency::golden();
        let fit = dc_fit(&g, 10_000);
        assert!((fit.tau - 1.0).abs() < 0.05, "{fit:?}");
        assert!(fit.c >= 0.38);
        let s = dc_fit(&Frequency::silver(), 10_000);
        assert!((s.tau - 1.0).abs() < 0.05, "{s:?}");
        let one = dc_fit(&g, 1);
        assert_eq!(one.tau, 1.0);
        assert_eq!(one.c, g.dist_mul(1));
    }

    #[test]
    fn discrepancy_examples() {
        let g = Frequency::golden();
        let u = g.orbit(0.3, 0, 1)[0];
        assert!((discrepancy(0.3, &g, 1) - u.max(1.0 - u)).abs() < 1e-15);
        let half = Frequency::rational(1, 2).unwrap();
        assert!((discrepancy(0.0, &half, 2) - 0.5).abs() < 1e-15);
        let fib = [5usize, 8, 13, 21, 34, 55, 89, 144, 233, 377];
        for &n in &fib {
            let d = discrepancy(0.0, &g, n);
            assert!(d * n as f64 <= 3.0, "n={n} D*={d}");
        }
    }

    #[test]
    fn orbit_matches_frac_mul() {
        let g = Frequency::golden();
        let orb = g.orbit(0.0, -3, 10);
        for (l, &t) in orb.iter().enumerate() {
            assert!((t - g.frac_mul(l as i64 - 3)).abs() < 1e-16);
        }
        let r = Frequency::rational(3, 5).unwrap();
        let orb = r.orbit(0.1, 2, 6);
        let expected = [0.3, 0.9, 0.5, 0.1, 0.7, 0.3];
        for (a, b) in orb.iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
    }
}
