use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use opensys_cli::verify::{run_suite, Suite};
use opensys_cli::{config_schema, run_config_file, OUTPUT_DIR_ENV};

#[derive(Parser)]
#[command(name = "opensys", version, about = "Open quantum system experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Fast,
    Full,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment from a TOML config.
    Run { config: PathBuf },
    /// Run the acceptance checks and golden comparisons.
    Verify {
        #[arg(long, value_enum, default_value = "fast")]
        suite: SuiteArg,
        /// Directory of golden `<name>.toml` / `<name>.csv` pairs.
        #[arg(long)]
        golden_dir: Option<PathBuf>,
        /// Also write the report as JSON to this path.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Config JSON schema.
    Schema {
        #[arg(long)]
        print: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config } => {
            let dir = std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from);
            match run_config_file(&config, dir.as_deref()) {
                Ok(files) => {
                    for f in files {
                        println!("{}", f.display());
                    }
                    ExitCode::SUCCESS
                }
                Err(err) => {
                    eprintln!("error: {err}");
                    ExitCode::from(err.exit_code() as u8)
                }
            }
        }
        Command::Verify { suite, golden_dir, json } => {
            let suite = match suite {
                SuiteArg::Fast => Suite::Fast,
                SuiteArg::Full => Suite::Full,
            };
            let report = run_suite(suite, golden_dir.as_deref());
            for c in &report.checks {
                println!(
                    "{} [{}] {}: {} ({:.2}s)",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.id,
                    c.name,
                    c.detail,
                    c.seconds
                );
            }
            println!("{}/{} checks passed", report.total - report.failed, report.total);
            if let Some(path) = json {
                let text = serde_json::to_string_pretty(&report).expect("report serializes");
                if let Err(err) = std::fs::write(&path, text + "\n") {
                    eprintln!("error: cannot write {}: {err}", path.display());
                    return ExitCode::from(1);
                }
            }
            if report.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Command::Schema { print } => {
            if print {
                println!("{}", config_schema());
            } else {
                eprintln!("use `schema --print` to write the config schema to stdout");
            }
            ExitCode::SUCCESS
        }
    }
}
