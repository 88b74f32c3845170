mod common;

use common::*;
use qp_spectra::boxes::BoxOperator;
use qp_spectra::cocycle::{lyapunov, lyapunov_via_det, transfer};
use qp_spectra::greens::{green_entry, Edge};
use qp_spectra::spectrum::FloquetFiber;
use qp_spectra::{tridiag, Frequency, PotentialSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_box(rng: &mut ChaCha8Rng, n_max: usize, pot: &PotentialSpec) -> BoxOperator {
    let alpha = Frequency::golden();
    loop {
        let n = rng.gen_range(1..=n_max);
        let b = BoxOperator::new(rng.gen::<f64>(), &alpha, n, pot);
        if !b.is_singular() {
            return b;
        }
    }
}

#[test]
fn sturm_and_eigenvalues_match_jacobi() {
    let pot = PotentialSpec::maryland(1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..200 {
        let b = random_box(&mut rng, 40, &pot);
        let oracle = jacobi_eigenvalues(dense(b.diagonal()));
        let ev = b.eigenvalues().unwrap();
        for (a, o) in ev.iter().zip(&oracle) {
            assert!((a - o).abs() <= 1e-9 * o.abs().max(1.0), "{a} vs {o}");
        }
        for _ in 0..5 {
            let e = rng.gen_range(-10.0..10.0);
            let want = oracle.iter().filter(|&&o| o <= e).count();
            assert_eq!(b.sturm_count(e).unwrap(), want);
        }
    }
}

#[test]
fn named_boxes_match_jacobi() {
    let alpha = Frequency::golden();
    let b = BoxOperator::new(0.31, &alpha, 20, &PotentialSpec::maryland(2.0));
    let oracle = jacobi_eigenvalues(dense(b.diagonal()));
    for (a, o) in b.eigenvalues().unwrap().iter().zip(&oracle) {
        assert!((a - o).abs() < 1e-9);
    }
    let b = BoxOperator::new(0.137, &alpha, 10, &PotentialSpec::maryland(1.0));
    let oracle = jacobi_eigenvalues(dense(b.diagonal()));
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..50 {
        let e = rng.gen_range(-6.0..6.0);
        assert_eq!(b.sturm_count(e).unwrap(), oracle.iter().filter(|&&o| o <= e).count());
    }
}

#[test]
fn det_log_matches_lu() {
    let pot = PotentialSpec::maryland(1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..100 {
        let b = random_box(&mut rng, 30, &pot);
        let e = rng.gen_range(-8.0..8.0);
        let d = b.det_log(e).unwrap();
        let (log, sign) = lu_log_det(b.diagonal(), e);
        assert!(
            (d.log_abs - log).abs() <= 1e-8 * log.abs().max(1.0),
            "{} vs {log}",
            d.log_abs
        );
        assert_eq!(d.sign, sign);
    }
    let b = BoxOperator::new(0.4, &Frequency::golden(), 25, &pot);
    let (log, _) = lu_log_det(b.diagonal(), 0.3);
    assert!((b.det_log(0.3).unwrap().log_abs - log).abs() <= 1e-8 * log.abs().max(1.0));
}

#[test]
fn green_entries_match_dense_inverse() {
    let alpha = Frequency::golden();
    let pot = PotentialSpec::maryland(1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut checked = 0;
    while checked < 100 {
        let q = rng.gen_range(2..=34usize);
        let x = rng.gen::<f64>();
        let a = rng.gen_range(-50..50i64);
        let e = rng.gen_range(-5.0..5.0);
        let diag: Vec<f64> = match alpha
            .orbit(x, a, q)
            .into_iter()
            .map(|t| pot.eval(t))
            .collect::<Result<_, _>>()
        {
            Ok(d) => d,
            Err(_) => continue,
        };
        let g = dense_resolvent(&diag, e);
        let l = a + rng.gen_range(0..q as i64);
        let b = a + q as i64 - 1;
        let left = green_entry(x, a, b, e, Edge::Left, l, &alpha, &pot).unwrap();
        let right = green_entry(x, a, b, e, Edge::Right, l, &alpha, &pot).unwrap();
        let (il, last) = ((l - a) as usize, q - 1);
        let gl = g[(0, il)];
        let gr = g[(il, last)];
        assert!((left.log_abs.exp() - gl.abs()).abs() <= 1e-6 * gl.abs(), "left {q} {l}");
        assert_eq!(left.sign, gl.signum());
        assert!(
            (right.log_abs.exp() - gr.abs()).abs() <= 1e-6 * gr.abs(),
            "right {q} {l}"
        );
        assert_eq!(right.sign, gr.signum());
        checked += 1;
    }
}

#[test]
fn transfer_top_left_is_the_determinant() {
    let alpha = Frequency::golden();
    let pot = PotentialSpec::maryland(1.0);
    let m = transfer(0.29, 0.7, 100, &alpha, &pot).unwrap();
    let b = BoxOperator::new(0.29, &alpha, 100, &pot);
    let d = b.det_log(0.7).unwrap();
    let (log, sign) = m.top_left();
    assert!((log - d.log_abs).abs() <= 1e-7 * 100.0);
    assert_eq!(sign, d.sign);
}

#[test]
fn fiber_matches_dense_hermitian() {
    let pot = PotentialSpec::maryland(1.0);
    for theta in [0.0, 0.1, 1.0 / 10.0, 0.0371] {
        let f = FloquetFiber::new(3, 5, 0.123, theta, &pot).unwrap();
        let oracle = hermitian_eigenvalues(&f.matrix());
        for (a, o) in f.spectrum().iter().zip(&oracle) {
            assert!((a - o).abs() < 1e-9, "theta {theta}: {a} vs {o}");
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..50 {
        let q = rng.gen_range(1..=12u64);
        let p = if q == 1 {
            0
        } else {
            (1..q).find(|p| num_gcd(*p, q) == 1 && rng.gen_bool(0.5)).unwrap_or(1)
        };
        let x = rng.gen_range(0.01..(1.0 / q as f64 - 0.01).max(0.02));
        let theta = rng.gen_range(0.0..1.0 / q as f64);
        let f = match FloquetFiber::new(p, q, x, theta, &pot) {
            Ok(f) => f,
            Err(_) => continue,
        };
        let oracle = hermitian_eigenvalues(&f.matrix());
        for (a, o) in f.spectrum().iter().zip(&oracle) {
            assert!((a - o).abs() < 1e-9 * o.abs().max(1.0), "q {q}: {a} vs {o}");
        }
        for e in [-3.0, 0.0, 2.5] {
            assert_eq!(f.count(e), oracle.iter().filter(|&&o| o <= e).count());
        }
    }
}

fn num_gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        num_gcd(b, a % b)
    }
}

#[test]
fn lyapunov_matches_maryland_closed_form() {
    let alpha = Frequency::golden();
    for (lambda, e) in [(5.0, 0.0), (2.0, 0.5), (1.0, -1.5), (2.0, 3.0)] {
        let pot = PotentialSpec::maryland(lambda);
        let exact = maryland_lyapunov(lambda, e);
        let a = lyapunov(e, 987, 64, &alpha, &pot).unwrap().value;
        let b = lyapunov_via_det(e, 987, 64, &alpha, &pot).unwrap().value;
        assert!((a - exact).abs() < 5e-3, "norm {a} vs {exact}");
        assert!((b - exact).abs() < 5e-3, "det {b} vs {exact}");
    }
}

#[test]
fn convergents_follow_fibonacci_and_pell() {
    let q: Vec<u64> = Frequency::golden()
        .convergents(6)
        .unwrap()
        .iter()
        .map(|c| c.1)
        .collect();
    assert_eq!(q, vec![1, 2, 3, 5, 8, 13]);
    let q: Vec<u64> = Frequency::silver()
        .convergents(5)
        .unwrap()
        .iter()
        .map(|c| c.1)
        .collect();
    assert_eq!(q, vec![2, 5, 12, 29, 70]);
    let long = Frequency::silver().convergents(20).unwrap();
    for w in long.windows(3) {
        assert_eq!(w[2].1, 2 * w[1].1 + w[0].1);
    }
}

#[test]
fn windowed_eigenvalues_agree_with_full_solve() {
    let alpha = Frequency::golden();
    let b = BoxOperator::new(0.21, &alpha, 300, &PotentialSpec::maryland(5.0));
    let all = b.eigenvalues().unwrap();
    let win = b.eigenvalues_in(-2.0, 2.0).unwrap();
    let expect: Vec<(usize, f64)> = all
        .iter()
        .copied()
        .enumerate()
        .filter(|(_, e)| (-2.0..=2.0).contains(e))
        .collect();
    assert_eq!(win.len(), expect.len());
    for ((i, e), (j, f)) in win.iter().zip(&expect) {
        assert_eq!(i, j);
        assert!((e - f).abs() < 1e-12);
    }
    let _ = tridiag::ZERO_PIVOT;
}
