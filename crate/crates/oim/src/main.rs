//! Batch CLI: `oim solve <config>`, `oim oracle <config>`,
//! `oim nfinfo <law>`.
//!
//! Exit codes: 0 success, 1 usage/config/input errors, 2 solver did not
//! converge, 3 converged but a gated diagnostic exceeded its bound.

use std::process::ExitCode;

use oim::config::RunConfig;
use oim::jsonout::format_float;
use oim::runner::{format_nfinfo, run_nfinfo, run_oracle, run_solve};

const USAGE: &str = "\
usage: oim <subcommand> ...

  oim solve <config>    solve the configured problem and write
                        <prefix>.field.csv, <prefix>.diag.json,
                        <prefix>.report.json
  oim oracle <config>   print the slab reference solution (slab mesh only)
  oim nfinfo <law>      doubling-condition report for a law family
                        (sinh-bv | power:<p>)

exit codes: 0 ok, 1 error, 2 not converged, 3 diagnostics out of bounds
";

fn load_config(path: &str) -> Result<RunConfig, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {path}: {e}"))?;
    RunConfig::parse(&text).map_err(|e| format!("config error in {path}: {e}"))
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().collect();
    let (cmd, arg) = match (args.get(1).map(String::as_str), args.get(2)) {
        (Some(cmd), Some(arg)) if args.len() == 3 => (cmd, arg.as_str()),
        _ => {
            eprint!("{USAGE}");
            return ExitCode::from(1);
        }
    };

    match cmd {
        "solve" => {
            let config = match load_config(arg) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("{e}");
                    return ExitCode::from(1);
                }
            };
            match run_solve(&config) {
                Ok(artifacts) => {
                    println!(
                        "converged {} iterations {} residual {}",
                        artifacts.converged,
                        artifacts.iterations,
                        format_float(artifacts.final_residual_norm)
                    );
                    if let Some(err) = artifacts.oracle_infnorm_error {
                        println!("oracle_infnorm_error {}", format_float(err));
                    }
                    println!("wrote {}", artifacts.field_path.display());
                    if artifacts.diag_path.exists() {
                        println!("wrote {}", artifacts.diag_path.display());
                    }
                    println!("wrote {}", artifacts.report_path.display());
                    if !artifacts.converged {
                        eprintln!("solver did not converge");
                        ExitCode::from(2)
                    } else if !artifacts.within_bounds {
                        eprintln!("diagnostics out of bounds");
                        ExitCode::from(3)
                    } else {
                        ExitCode::SUCCESS
                    }
                }
                Err(e) => {
                    eprintln!("{e}");
                    ExitCode::from(1)
                }
            }
        }
        "oracle" => {
            let config = match load_config(arg) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("{e}");
                    return ExitCode::from(1);
                }
            };
            match run_oracle(&config) {
                Ok(text) => {
                    print!("{text}");
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("{e}");
                    ExitCode::from(1)
                }
            }
        }
        "nfinfo" => match run_nfinfo(arg) {
            Ok(summary) => {
                print!("{}", format_nfinfo(&summary));
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("{e}");
                ExitCode::from(1)
            }
        },
        _ => {
            eprint!("{USAGE}");
            ExitCode::from(1)
        }
    }
}
