use proptest::prelude::*;
use qp_spectra::arithmetic::{certify_good_denominator, discrepancy, orbit_gap_values};
use qp_spectra::boxes::BoxOperator;
use qp_spectra::cocycle::{factor_split, transfer, TransferProduct};
use qp_spectra::ids::{energy_grid, IdsBuilder};
use qp_spectra::potential::frac;
use qp_spectra::spectrum::{theta_lipschitz_bound, FloquetFiber};
use qp_spectra::{tridiag, Frequency, PotentialSpec};

fn potential() -> impl Strategy<Value = PotentialSpec> {
    prop_oneof![
        (0.2f64..8.0).prop_map(PotentialSpec::maryland),
        (0.5f64..4.0, 0.0f64..2.0).prop_map(|(g, a)| PotentialSpec::log_linear(g, a)),
    ]
}

fn frequency() -> impl Strategy<Value = Frequency> {
    prop_oneof![Just(Frequency::golden()), Just(Frequency::silver())]
}

fn interior() -> impl Strategy<Value = f64> {
    1e-9f64..(1.0 - 1e-9)
}

/// A nonsingular orbit diagonal, or none.
fn orbit_diag(x: f64, n: usize, alpha: &Frequency, pot: &PotentialSpec) -> Option<Vec<f64>> {
    alpha.orbit(x, 0, n).into_iter().map(|t| pot.eval(t).ok()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn potential_is_lipschitz_from_below(pot in potential(), a in interior(), b in interior()) {
        let (x, y) = if a < b { (a, b) } else { (b, a) };
        prop_assume!(x < y);
        let gap = pot.eval(y).unwrap() - pot.eval(x).unwrap();
        prop_assert!(gap >= pot.gamma() * (y - x) - 1e-10 * (1.0 + gap.abs()));
    }

    #[test]
    fn inverse_round_trips(pot in potential(), x in 1e-6f64..(1.0 - 1e-6)) {
        let e = pot.eval(x).unwrap();
        prop_assert!((pot.inverse(e) - x).abs() <= 1e-12);
    }

    #[test]
    fn potential_is_periodic(pot in potential(), x in interior(), k in -3i32..4) {
        let shifted = x + k as f64;
        prop_assume!(frac(shifted) == x);
        prop_assert_eq!(pot.eval(shifted).unwrap(), pot.eval(x).unwrap());
    }

    #[test]
    fn orbit_has_three_gap_lengths(alpha in frequency(), n in 2usize..3000) {
        prop_assert!(orbit_gap_values(&alpha, n, 1e-12).len() <= 3);
    }

    #[test]
    fn discrepancy_moves_little_under_translation(alpha in frequency(), x in 0.0f64..1.0, beta in 0.0f64..1.0, n in 5usize..500) {
        let d0 = discrepancy(x, &alpha, n);
        let d1 = discrepancy(frac(x + beta), &alpha, n);
        prop_assert!((d0 - d1).abs() <= 2.0 / n as f64 + 1e-12);
    }

    #[test]
    fn sturm_count_is_monotone_and_matches_eigenvalues(pot in potential(), alpha in frequency(), x in 0.0f64..1.0, n in 1usize..60, e1 in -20.0f64..20.0, e2 in -20.0f64..20.0) {
        let b = BoxOperator::new(x, &alpha, n, &pot);
        prop_assume!(!b.is_singular());
        let (lo, hi) = if e1 < e2 { (e1, e2) } else { (e2, e1) };
        prop_assert!(b.sturm_count(lo).unwrap() <= b.sturm_count(hi).unwrap());
        let ev = b.eigenvalues().unwrap();
        prop_assert!(ev.windows(2).all(|w| w[0] <= w[1]));
        for (k, &e) in ev.iter().enumerate() {
            let t = 1e-10 * e.abs().max(1.0);
            prop_assert!(b.sturm_count(e - t).unwrap() <= k);
            prop_assert!(b.sturm_count(e + t).unwrap() > k);
        }
        let top = b.diagonal().iter().copied().fold(f64::NEG_INFINITY, f64::max);
        prop_assert_eq!(b.sturm_count(top + 3.0).unwrap(), n);
    }

    #[test]
    fn det_sign_changes_at_eigenvalues(pot in potential(), x in 0.0f64..1.0, n in 1usize..25) {
        let alpha = Frequency::golden();
        let b = BoxOperator::new(x, &alpha, n, &pot);
        prop_assume!(!b.is_singular());
        let ev = b.eigenvalues().unwrap();
        // separated eigenvalues only; the sign flips once per crossing
        prop_assume!(ev.windows(2).all(|w| w[1] - w[0] > 1e-6));
        let mut probes = vec![ev[0] - 1.0];
        for w in ev.windows(2) {
            probes.push(0.5 * (w[0] + w[1]));
        }
        probes.push(ev[n - 1] + 1.0);
        let signs: Vec<f64> = probes.iter().map(|&e| b.det_log(e).unwrap().sign).collect();
        for (i, w) in signs.windows(2).enumerate() {
            prop_assert!(w[0] != w[1], "no sign change across eigenvalue {}", i);
        }
        // det(E - H) > 0 above the spectrum
        prop_assert_eq!(signs[n], 1.0);
    }

    #[test]
    fn prefix_and_suffix_determinants_agree(pot in potential(), x in 0.0f64..1.0, n in 1usize..80, e in -5.0f64..5.0) {
        let alpha = Frequency::golden();
        let Some(d) = orbit_diag(x, n, &alpha, &pot) else { return Ok(()); };
        let pre = tridiag::det_log_prefixes(&d, e);
        let suf = tridiag::det_log_suffixes(&d, e);
        let full = tridiag::det_log(&d, e);
        prop_assume!(!full.zero);
        prop_assert!((pre[n].log_abs - full.log_abs).abs() <= 1e-12 * full.log_abs.abs().max(1.0));
        prop_assert!((suf[0].log_abs - full.log_abs).abs() <= 1e-9 * full.log_abs.abs().max(1.0));
    }

    #[test]
    fn cocycle_law(pot in potential(), x in 0.0f64..1.0, e in -6.0f64..6.0, n in 1usize..300, m in 1usize..300) {
        let alpha = Frequency::golden();
        let (Ok(a), Ok(b), Ok(ab)) = (
            transfer(x, e, n, &alpha, &pot),
            transfer(alpha.orbit_point(x, n as i64), e, m, &alpha, &pot),
            transfer(x, e, n + m, &alpha, &pot),
        ) else { return Ok(()); };
        let composed = a.then(&b);
        prop_assert!(composed.relative_distance(&ab) <= 1e-8, "{}", composed.relative_distance(&ab));
    }

    #[test]
    fn short_products_have_unit_determinant(pot in potential(), x in 0.0f64..1.0, e in -4.0f64..4.0, n in 1usize..6) {
        let alpha = Frequency::golden();
        let Some(d) = orbit_diag(x, n, &alpha, &pot) else { return Ok(()); };
        prop_assume!(d.iter().all(|v| v.abs() < 1e3));
        let t = TransferProduct::from_diagonal(&d, e);
        prop_assert!(t.log_abs_det().abs() <= 1e-8 * n as f64);
    }

    #[test]
    fn top_left_is_det_log(pot in potential(), x in 0.0f64..1.0, e in -6.0f64..6.0, n in 1usize..400) {
        let alpha = Frequency::golden();
        let Some(d) = orbit_diag(x, n, &alpha, &pot) else { return Ok(()); };
        let det = tridiag::det_log(&d, e);
        prop_assume!(!det.zero);
        let (log, sign) = TransferProduct::from_diagonal(&d, e).top_left();
        // a near-zero top-left entry is relative-error dominated
        prop_assume!(log > TransferProduct::from_diagonal(&d, e).log_norm() - 20.0);
        prop_assert!((log - det.log_abs).abs() <= 1e-7 * n as f64);
        prop_assert_eq!(sign, det.sign);
    }

    #[test]
    fn factor_split_accounts_for_every_site(pot in potential(), x in 0.0f64..1.0, e in -6.0f64..6.0, n in 1usize..400, b in 0.0f64..50.0) {
        let alpha = Frequency::golden();
        let Some(d) = orbit_diag(x, n, &alpha, &pot) else { return Ok(()); };
        let s = factor_split(x, e, n, b, &alpha, &pot).unwrap();
        let total: f64 = d.iter().map(|v| (v - e).abs().ln_1p()).sum();
        prop_assert!((s.log_f_le + s.log_f_gt - total).abs() <= 1e-9 * n as f64);
        prop_assert_eq!(s.l_count, d.iter().filter(|v| (*v - e).abs() > b).count());
        prop_assert!(s.log_g_norm <= n as f64 * std::f64::consts::LN_2 + 1.0);
        let norm = transfer(x, e, n, &alpha, &pot).unwrap().log_norm();
        prop_assert!(norm <= s.log_f_le + s.log_f_gt + s.log_g_norm + std::f64::consts::LN_2 + 1e-9);
    }

    #[test]
    fn fiber_moves_lipschitz_in_theta(q in 1u64..9, x in 0.02f64..0.98, theta in 0.0f64..1.0, dt in 1e-4f64..1e-2) {
        let pot = PotentialSpec::maryland(1.0);
        let p = if q == 1 { 0 } else { (1..q).rev().find(|p| gcd(*p, q) == 1).unwrap() };
        let x = x / q as f64;
        let (Ok(a), Ok(b)) = (
            FloquetFiber::new(p, q, x, theta / q as f64, &pot),
            FloquetFiber::new(p, q, x, theta / q as f64 + dt, &pot),
        ) else { return Ok(()); };
        let bound = theta_lipschitz_bound(q) * dt + 1e-9;
        for (u, v) in a.spectrum().iter().zip(b.spectrum()) {
            prop_assert!((u - v).abs() <= bound);
        }
    }

    #[test]
    fn fiber_is_invariant_under_one_over_q(q in 2u64..13, x in 0.02f64..0.98, theta in 0.0f64..1.0) {
        let pot = PotentialSpec::maryland(1.0);
        let p = (1..q).find(|p| gcd(*p, q) == 1 && *p > q / 2).unwrap_or(1);
        let x = x / q as f64;
        let th = theta / q as f64;
        let (Ok(a), Ok(b)) = (
            FloquetFiber::new(p, q, x, th, &pot),
            FloquetFiber::new(p, q, x + 1.0 / q as f64, th, &pot),
        ) else { return Ok(()); };
        for (u, v) in a.spectrum().iter().zip(b.spectrum()) {
            prop_assert!((u - v).abs() <= 1e-9 * u.abs().max(1.0));
        }
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn ids_is_a_distribution_function(lambda in 0.5f64..6.0, n in 1usize..100, xs in 5usize..40) {
        let pot = PotentialSpec::maryland(lambda);
        let grid = energy_grid(-15.0, 15.0, 61);
        let t = IdsBuilder::new(&Frequency::golden(), &pot, n, xs).build(&grid).unwrap();
        prop_assert!(t.n_vals.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(t.n_vals.iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn ids_ignores_boundary_conditions(lambda in 0.5f64..6.0, n in 8usize..200, xs in 5usize..40) {
        let pot = PotentialSpec::maryland(lambda);
        let alpha = Frequency::golden();
        let grid = energy_grid(-10.0, 10.0, 41);
        let a = IdsBuilder::new(&alpha, &pot, n, xs).build(&grid).unwrap();
        let b = IdsBuilder::new(&alpha, &pot, n, xs).zero_ends(true).build(&grid).unwrap();
        for (u, v) in a.n_vals.iter().zip(&b.n_vals) {
            prop_assert!((u - v).abs() <= 2.0 / n as f64 + 1e-15);
        }
    }

    #[test]
    fn convergents_certify(alpha in frequency()) {
        for (p, q) in alpha.convergents(15).unwrap() {
            prop_assert!((alpha.value() - p as f64 / q as f64).abs() < 1.0 / (q as f64 * q as f64));
            if q >= 2 && alpha.dist_mul(q as i64) <= 1.0 / (5f64.sqrt() * q as f64) {
                prop_assert!(certify_good_denominator(&alpha, q).is_valid(), "q = {}", q);
            }
        }
    }
}
