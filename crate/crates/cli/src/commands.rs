//! One function per subcommand. Each returns the tables it produced; the
//! caller writes them.

use qp_spectra::arithmetic::{certify_good_denominator, dc_fit};
use qp_spectra::boxes::{eigen_curves, stratified_phases, BoxOperator};
use qp_spectra::cocycle::{lyapunov_at, lyapunov_via_det, lyapunov_via_det_at};
use qp_spectra::greens::{localized_eigenpairs, Edge, GreenBox};
use qp_spectra::ids::{energy_grid, lipschitz_modulus, lyap_lower_bound, IdsBuilder};
use qp_spectra::{phases, Frequency, SpectraError};
use rayon::prelude::*;

use crate::config::RunConfig;
use crate::error::{CliError, Context};
use crate::table::{Cell, Table};

pub type Output = Result<Vec<Table>, CliError>;

/// Box length for averaged quantities: the largest good denominator not
/// exceeding `n` when there is one.
fn box_length(alpha: &Frequency, n: usize) -> usize {
    if alpha.is_rational() {
        return n;
    }
    alpha.largest_good_denominator(n as u64).map_or(n, |q| q as usize)
}

pub fn arithmetic(cfg: &RunConfig) -> Output {
    let alpha = cfg.frequency()?;
    let k = cfg.options.convergents.unwrap_or(12);
    let conv = alpha.convergents(k).ctx("arithmetic")?;
    let mut t = Table::new("arithmetic.csv", &["k", "p", "q", "dist", "good"]);
    for (i, &(p, q)) in conv.iter().enumerate() {
        let good = q >= 2 && certify_good_denominator(&alpha, q).is_valid();
        t.push(vec![
            Cell::U(i),
            Cell::U(p as usize),
            Cell::U(q as usize),
            Cell::F(alpha.dist_mul(q as i64)),
            Cell::B(good),
        ]);
    }
    if !alpha.is_rational() {
        let fit = dc_fit(&alpha, 10_000);
        t.note("dc_c", fit.c);
        t.note("dc_tau", fit.tau);
    }
    t.note("precision_bits", alpha.precision_bits());
    Ok(vec![t])
}

pub fn curves(cfg: &RunConfig) -> Output {
    let alpha = cfg.frequency()?;
    let grid = cfg.options.grid.unwrap_or(400);
    let table = eigen_curves(&alpha, cfg.n, &cfg.potential, grid).ctx("curves")?;
    let mut t = Table::new("curves.csv", &["x", "j", "lambda", "cell_index"]);
    for (i, &x) in table.x_grid.iter().enumerate() {
        for j in 0..table.n {
            t.push(vec![
                Cell::F(x),
                Cell::U(j),
                Cell::F(table.curves[j][i]),
                Cell::U(table.cells[i]),
            ]);
        }
    }
    t.note("sinai_defect", table.sinai_defect(&cfg.potential));
    t.note("monotonicity_defect", table.monotonicity_defect(cfg.potential.gamma()));
    t.note("beta", table.beta.iter().map(|b| b.value).collect::<Vec<_>>());
    Ok(vec![t])
}

pub fn counting(cfg: &RunConfig) -> Output {
    let alpha = cfg.frequency()?;
    let q = cfg.options.q.unwrap_or(89) as usize;
    let energies = match cfg.options.energy {
        Some(e) => vec![e],
        None => cfg.energy_grid(),
    };
    let xs = stratified_phases(&alpha, q, cfg.x_samples);
    let counts: Vec<Vec<usize>> = energies
        .par_iter()
        .map(|&e| {
            xs.iter()
                .map(|&x| BoxOperator::new(x, &alpha, q, &cfg.potential).sturm_count(e))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<_, _>>()
        .ctx("counting")?;
    let mut t = Table::new("counting.csv", &["q", "E", "x", "count"]);
    let mut spreads = Vec::new();
    for (e, row) in energies.iter().zip(&counts) {
        for (x, c) in xs.iter().zip(row) {
            t.push(vec![Cell::U(q), Cell::F(*e), Cell::F(*x), Cell::U(*c)]);
        }
        spreads.push(row.iter().max().unwrap() - row.iter().min().unwrap());
    }
    t.note("spread", spreads.clone());
    t.note("max_spread", spreads.into_iter().max().unwrap_or(0));
    Ok(vec![t])
}

pub fn lyapunov(cfg: &RunConfig) -> Output {
    let alpha = cfg.frequency()?;
    let q = box_length(&alpha, cfg.n);
    let xs = phases::stratified(cfg.x_samples, cfg.seed);
    let rows: Vec<_> = cfg
        .energy_grid()
        .into_par_iter()
        .map(|e| {
            let a = lyapunov_at(e, q, &xs, &alpha, &cfg.potential)?;
            let b = match lyapunov_via_det_at(e, q, &xs, &alpha, &cfg.potential) {
                Ok(b) => b.value,
                Err(SpectraError::EigenvalueHit { .. }) => f64::NAN,
                Err(err) => return Err(err),
            };
            Ok((e, a, b))
        })
        .collect::<Result<_, _>>()
        .ctx("lyapunov")?;
    let mut t = Table::new("lyap.csv", &["E", "L_cocycle", "L_det", "stderr", "n", "q_used"]);
    let mut subs = 0;
    for (e, a, b) in rows {
        subs += a.substitutions;
        t.push(vec![
            Cell::F(e),
            Cell::F(a.value),
            Cell::F(b),
            Cell::F(a.stderr),
            Cell::U(cfg.n),
            Cell::U(q),
        ]);
    }
    let gamma = cfg.potential.gamma();
    t.note("gamma", gamma);
    t.note("lyap_floor", lyap_lower_bound(gamma));
    t.note("substitutions", subs);
    t.note("x_samples", cfg.x_samples);
    Ok(vec![t])
}

pub fn ids(cfg: &RunConfig) -> Output {
    let alpha = cfg.frequency()?;
    let table = IdsBuilder::new(&alpha, &cfg.potential, cfg.n, cfg.x_samples)
        .seed(cfg.seed)
        .build(&cfg.energy_grid())
        .ctx("ids")?;
    let mut t = Table::new("ids.csv", &["E", "N", "n", "samples"]);
    for (e, v) in table.e_grid.iter().zip(&table.n_vals) {
        t.push(vec![
            Cell::F(*e),
            Cell::F(*v),
            Cell::U(table.n_box),
            Cell::U(table.x_samples),
        ]);
    }
    let gamma = cfg.potential.gamma();
    t.note("n_box", table.n_box);
    t.note("x_samples", table.x_samples);
    t.note("substitutions", table.substitutions);
    t.note("gamma", gamma);
    // needs a grid fine enough to be meaningful
    if let Ok(m) = lipschitz_modulus(&table) {
        t.note("lipschitz_modulus", m);
    }
    t.note("lipschitz_bound", 1.0 / gamma);
    Ok(vec![t])
}

pub fn thouless(cfg: &RunConfig) -> Output {
    let alpha = cfg.frequency()?;
    let grid = cfg.energy_grid();
    let table = IdsBuilder::new(&alpha, &cfg.potential, cfg.n, cfg.x_samples)
        .seed(cfg.seed)
        .keep_pool(true)
        .build(&grid)
        .ctx("thouless")?;
    let det_samples = cfg.options.det_samples.unwrap_or(256);
    let rows: Vec<_> = grid
        .par_iter()
        .map(|&e| {
            let l = table.thouless(e)?.value;
            let d = lyapunov_via_det(e, cfg.n, det_samples, &alpha, &cfg.potential)?.value;
            Ok((e, l, d))
        })
        .collect::<Result<_, _>>()
        .ctx("thouless")?;
    let mut t = Table::new("thouless.csv", &["E", "L_thouless", "L_det", "diff"]);
    let mut worst: f64 = 0.0;
    for (e, l, d) in rows {
        worst = worst.max((l - d).abs());
        t.push(vec![Cell::F(e), Cell::F(l), Cell::F(d), Cell::F(l - d)]);
    }
    t.note("pool_phases", cfg.x_samples);
    t.note("det_phases", det_samples);
    t.note("max_abs_diff", worst);
    t.note("substitutions", table.substitutions);
    Ok(vec![t])
}

pub fn green(cfg: &RunConfig) -> Output {
    let alpha = cfg.frequency()?;
    let o = &cfg.options;
    let a = o.a.unwrap_or(0);
    let b = o.b.unwrap_or(a + cfg.n as i64 - 1);
    let x = o.x.unwrap_or(0.123);
    let e = o.energy.unwrap_or(0.5);
    let g = GreenBox::new(x, a, b, e, &alpha, &cfg.potential).ctx("green")?;
    let mut t = Table::new("green.csv", &["a", "b", "l", "log_abs_G"]);
    for l in a..=b {
        let v = g.entry(Edge::Left, l).ctx("green")?;
        t.push(vec![Cell::I(a), Cell::I(b), Cell::I(l), Cell::F(v.log_abs)]);
    }
    t.note("x", x);
    t.note("energy", e);
    t.note("edge", "left");
    Ok(vec![t])
}

pub fn localize(cfg: &RunConfig) -> Output {
    let alpha = cfg.frequency()?;
    let x = cfg.options.x.unwrap_or(0.123);
    let window = cfg.options.window.unwrap_or((-2.0, 2.0));
    let fits = localized_eigenpairs(x, &alpha, &cfg.potential, cfg.n, window).ctx("localize")?;
    let n_hat = box_length(&alpha, 987.min(cfg.n));
    let det_phases = cfg.options.det_samples.unwrap_or(32);
    let mut ok = Vec::new();
    let mut stalled = 0;
    for f in fits {
        match f {
            Ok(f) => ok.push(f),
            Err(SpectraError::InverseIterationStall { .. }) => stalled += 1,
            Err(e) => return Err(e).ctx("localize"),
        }
    }
    let l_hat: Vec<f64> = ok
        .par_iter()
        .map(
            |f| match lyapunov_via_det(f.energy, n_hat, det_phases, &alpha, &cfg.potential) {
                Ok(l) => Ok(l.value),
                Err(SpectraError::EigenvalueHit { .. }) => Ok(f64::NAN),
                Err(e) => Err(e),
            },
        )
        .collect::<Result<_, _>>()
        .ctx("localize")?;
    let mut t = Table::new(
        "loc.csv",
        &["index", "energy", "center", "rate_left", "rate_right", "r2", "L_hat"],
    );
    let (mut res, mut poi): (f64, f64) = (0.0, 0.0);
    for (f, l) in ok.iter().zip(&l_hat) {
        res = res.max(f.residual);
        poi = poi.max(f.poisson_residual);
        t.push(vec![
            Cell::U(f.eigen_index),
            Cell::F(f.energy),
            Cell::U(f.center),
            Cell::F(f.rate_left),
            Cell::F(f.rate_right),
            Cell::F(f.r_squared),
            Cell::F(*l),
        ]);
    }
    t.note("x", x);
    t.note("window", vec![window.0, window.1]);
    t.note("l_hat_n", n_hat);
    t.note("stalled", stalled);
    t.note("max_residual", res);
    t.note("max_poisson_residual", poi);
    t.note("fit_floor", qp_spectra::greens::FIT_FLOOR);
    Ok(vec![t])
}

pub fn coverage(cfg: &RunConfig) -> Output {
    let o = &cfg.options;
    let (p, q) = (o.p.unwrap_or(3), o.q.unwrap_or(5));
    let theta = o.theta.unwrap_or(0.0);
    let energies = energy_grid(cfg.e_min, cfg.e_max, o.count.unwrap_or(100));
    let tol = 1e-8;
    let res = qp_spectra::spectrum::coverage_check(p, q, theta, &energies, tol, &cfg.potential).ctx("coverage")?;
    let mut t = Table::new("coverage.csv", &["E", "x_witness", "gap", "iterations"]);
    for r in &res {
        t.push(vec![
            Cell::F(r.energy),
            Cell::F(r.x_witness),
            Cell::F(r.gap),
            Cell::U(r.iterations),
        ]);
    }
    t.note("p", p);
    t.note("q", q);
    t.note("theta", theta);
    t.note("tol", tol);
    t.note("max_gap", res.iter().map(|r| r.gap).fold(0.0, f64::max));
    Ok(vec![t])
}
