use std::process::ExitCode;

use clap::Parser;
use qp_spectra_cli::args::Cli;
use qp_spectra_cli::CliError;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = cli.resolve().and_then(|(command, cfg)| {
        if let Some(path) = &cli.common.dump_config {
            std::fs::write(path, cfg.to_json() + "\n")?;
            return Ok(Vec::new());
        }
        qp_spectra_cli::run(command, &cfg)
    });
    match result {
        Ok(paths) => {
            for p in paths {
                println!("wrote {}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("qp-spectra: {e}");
            let code: i32 = CliError::exit_code(&e);
            ExitCode::from(code as u8)
        }
    }
}
