//! Flag parsing. Flags override a `--config` file, which overrides the
//! defaults.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qp_spectra::potential::PotentialKind;

use crate::config::RunConfig;
use crate::error::CliError;
use crate::Command;

#[derive(Debug, Parser)]
#[command(
    name = "qp-spectra",
    version,
    about = "Spectra of quasiperiodic operators with unbounded monotone potentials"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Sub,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum PotentialFlag {
    Tan,
    Loglin,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Run-config JSON to start from.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Write the resolved config here and exit.
    #[arg(long, global = true)]
    pub dump_config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub alpha: Option<String>,
    #[arg(long, global = true)]
    pub p: Option<u64>,
    #[arg(long, global = true)]
    pub q: Option<u64>,
    #[arg(long, global = true, value_enum)]
    pub potential: Option<PotentialFlag>,
    #[arg(long, global = true)]
    pub lambda: Option<f64>,
    #[arg(long, global = true)]
    pub gamma_lin: Option<f64>,
    #[arg(long, global = true)]
    pub a_log: Option<f64>,
    #[arg(long, global = true)]
    pub n: Option<usize>,
    #[arg(long, global = true)]
    pub x_samples: Option<usize>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub e_min: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub e_max: Option<f64>,
    #[arg(long, global = true)]
    pub e_steps: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Sub {
    /// Continued-fraction convergents and good denominators.
    Arithmetic {
        #[arg(long)]
        convergents: Option<usize>,
    },
    /// Eigenvalue curves of the finite box over the phase circle.
    Curves {
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Eigenvalue counts of the box of length q at sampled phases.
    Counting {
        #[arg(long = "E", alias = "energy", allow_hyphen_values = true)]
        energy: Option<f64>,
    },
    /// Lyapunov exponent from transfer matrices and from determinants.
    Lyapunov,
    /// Integrated density of states.
    Ids,
    /// Thouless formula against the determinant average.
    Thouless {
        #[arg(long)]
        det_samples: Option<usize>,
    },
    /// Left-edge Green's function entries of one block.
    Green {
        #[arg(long, allow_hyphen_values = true)]
        a: Option<i64>,
        #[arg(long, allow_hyphen_values = true)]
        b: Option<i64>,
        #[arg(long)]
        x: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        energy: Option<f64>,
    },
    /// Eigenpairs in an energy window with fitted decay rates.
    Localize {
        /// `lo,hi`
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        window: Option<Vec<f64>>,
        #[arg(long)]
        x: Option<f64>,
    },
    /// Coverage of an energy range by a rational fiber family.
    Coverage {
        #[arg(long, allow_hyphen_values = true)]
        theta: Option<f64>,
        #[arg(long)]
        count: Option<usize>,
    },
    /// Run the acceptance suite.
    VerifyAll,
}

impl Cli {
    /// The subcommand and the fully resolved config.
    pub fn resolve(&self) -> Result<(Command, RunConfig), CliError> {
        let c = &self.common;
        let mut cfg = match &c.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        macro_rules! set {
            ($($flag:ident => $field:ident),*) => {
                $(if let Some(v) = c.$flag.clone() { cfg.$field = v; })*
            };
        }
        set!(alpha => alpha, n => n, x_samples => x_samples, e_min => e_min, e_max => e_max, e_steps => e_steps, threads => threads, out => out_dir);
        if c.seed.is_some() {
            cfg.seed = c.seed;
        }
        if c.p.is_some() {
            cfg.options.p = c.p;
        }
        if c.q.is_some() {
            cfg.options.q = c.q;
        }
        self.apply_potential(&mut cfg);
        let o = &mut cfg.options;
        let command = match &self.command {
            Sub::Arithmetic { convergents } => {
                o.convergents = convergents.or(o.convergents);
                Command::Arithmetic
            }
            Sub::Curves { grid } => {
                o.grid = grid.or(o.grid);
                Command::Curves
            }
            Sub::Counting { energy } => {
                o.energy = energy.or(o.energy);
                Command::Counting
            }
            Sub::Lyapunov => Command::Lyapunov,
            Sub::Ids => Command::Ids,
            Sub::Thouless { det_samples } => {
                o.det_samples = det_samples.or(o.det_samples);
                Command::Thouless
            }
            Sub::Green { a, b, x, energy } => {
                o.a = a.or(o.a);
                o.b = b.or(o.b);
                o.x = x.or(o.x);
                o.energy = energy.or(o.energy);
                Command::Green
            }
            Sub::Localize { window, x } => {
                if let Some(w) = window {
                    match w[..] {
                        [lo, hi] => o.window = Some((lo, hi)),
                        _ => {
                            return Err(CliError::ConfigInvalid {
                                field: "options.window".into(),
                                message: "expected two values lo,hi".into(),
                            })
                        }
                    }
                }
                o.x = x.or(o.x);
                Command::Localize
            }
            Sub::Coverage { theta, count } => {
                o.theta = theta.or(o.theta);
                o.count = count.or(o.count);
                Command::Coverage
            }
            Sub::VerifyAll => Command::VerifyAll,
        };
        cfg.validate()?;
        Ok((command, cfg))
    }

    fn apply_potential(&self, cfg: &mut RunConfig) {
        let c = &self.common;
        let kind = match (c.potential, cfg.potential.kind) {
            (None | Some(PotentialFlag::Tan), PotentialKind::MarylandTan { lambda }) => PotentialKind::MarylandTan {
                lambda: c.lambda.unwrap_or(lambda),
            },
            (Some(PotentialFlag::Tan), PotentialKind::LogLinear { .. }) => PotentialKind::MarylandTan {
                lambda: c.lambda.unwrap_or(2.0),
            },
            (Some(PotentialFlag::Loglin), PotentialKind::MarylandTan { .. }) => PotentialKind::LogLinear {
                gamma_lin: c.gamma_lin.unwrap_or(1.0),
                a_log: c.a_log.unwrap_or(1.0),
            },
            (_, PotentialKind::LogLinear { gamma_lin, a_log }) => PotentialKind::LogLinear {
                gamma_lin: c.gamma_lin.unwrap_or(gamma_lin),
                a_log: c.a_log.unwrap_or(a_log),
            },
        };
        cfg.potential.kind = kind;
    }
}
