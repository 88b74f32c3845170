//! Command-line driver for `qp-spectra-core`: run configs, subcommands
//! writing CSV tables with metadata sidecars, and the acceptance suite.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod table;
pub mod verify;

use std::path::PathBuf;
use std::time::Instant;

pub use config::{Options, RunConfig};
pub use error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Arithmetic,
    Curves,
    Counting,
    Lyapunov,
    Ids,
    Thouless,
    Green,
    Localize,
    Coverage,
    VerifyAll,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Arithmetic => "arithmetic",
            Command::Curves => "curves",
            Command::Counting => "counting",
            Command::Lyapunov => "lyapunov",
            Command::Ids => "ids",
            Command::Thouless => "thouless",
            Command::Green => "green",
            Command::Localize => "localize",
            Command::Coverage => "coverage",
            Command::VerifyAll => "verify-all",
        }
    }
}

fn verify_all(cfg: &RunConfig) -> commands::Output {
    let results = verify::all(&cfg.out_dir.join("determinism"));
    let mut t = table::Table::new("verify.csv", &["id", "passed", "measured", "threshold", "detail"]);
    for r in &results {
        println!("{r}");
        t.push(vec![
            table::Cell::S(r.id.into()),
            table::Cell::B(r.passed),
            table::Cell::F(r.measured),
            table::Cell::F(r.threshold),
            table::Cell::S(r.detail.clone()),
        ]);
    }
    let failed: Vec<&str> = results.iter().filter(|r| !r.passed).map(|r| r.id).collect();
    t.note("failed", failed);
    Ok(vec![t])
}

/// Validate, run `command` on a pool of `cfg.threads` workers, and write
/// its tables under `cfg.out_dir`. Returns the CSV paths.
pub fn run(command: Command, cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| CliError::ConfigInvalid {
            field: "threads".into(),
            message: e.to_string(),
        })?;
    let start = Instant::now();
    let tables = pool.install(|| match command {
        Command::Arithmetic => commands::arithmetic(cfg),
        Command::Curves => commands::curves(cfg),
        Command::Counting => commands::counting(cfg),
        Command::Lyapunov => commands::lyapunov(cfg),
        Command::Ids => commands::ids(cfg),
        Command::Thouless => commands::thouless(cfg),
        Command::Green => commands::green(cfg),
        Command::Localize => commands::localize(cfg),
        Command::Coverage => commands::coverage(cfg),
        Command::VerifyAll => verify_all(cfg),
    })?;
    let wall = start.elapsed().as_secs_f64();
    let paths = tables
        .iter()
        .map(|t| t.write(&cfg.out_dir, command.name(), cfg, wall))
        .collect::<Result<Vec<_>, _>>()?;
    if command == Command::VerifyAll {
        let t = &tables[0];
        let failed = t.meta["failed"].as_array().map_or(0, Vec::len);
        if failed > 0 {
            return Err(CliError::Acceptance(format!(
                "{failed} criteria failed: {}",
                t.meta["failed"]
            )));
        }
    }
    Ok(paths)
}
