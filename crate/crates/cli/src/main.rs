use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use densalg_cli::run::{run_with, RunOptions};
use densalg_cli::scenario::{parse_scenario, COMMAND_NAMES};

#[derive(Parser)]
#[command(
    name = "densalg",
    version,
    about = "Check brackets and operators on densities"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(clap::Args)]
struct Output {
    #[arg(long, value_enum, default_value = "text")]
    report: Format,
    /// Leave out per-command timings.
    #[arg(long)]
    no_timing: bool,
    /// Run the commands one after another.
    #[arg(long)]
    sequential: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the commands of a scenario file.
    Check {
        file: PathBuf,
        /// Run only commands with this name.
        #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(COMMAND_NAMES))]
        only: Vec<String>,
        #[command(flatten)]
        out: Output,
    },
    /// Print a scenario with every expression normalized.
    Print { file: PathBuf },
    /// Run a built-in scenario.
    Demo {
        #[arg(value_enum)]
        which: Demo,
        #[command(flatten)]
        out: Output,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Demo {
    Sturm,
    Bv,
}

const STURM: &str = include_str!("../scenarios/f3_sturm.json");
const BV: &str = include_str!("../scenarios/f4_bv.json");

fn load(file: &PathBuf) -> Result<String, ExitCode> {
    std::fs::read_to_string(file).map_err(|e| {
        eprintln!("error: {}: {e}", file.display());
        ExitCode::from(2)
    })
}

fn check(name: &str, text: &str, only: &[String], out: &Output) -> ExitCode {
    let sc = match parse_scenario(text) {
        Ok(sc) => sc,
        Err(e) => {
            eprintln!("error: {name}:{e}");
            return ExitCode::from(2);
        }
    };
    let opts = RunOptions {
        timing: !out.no_timing,
        parallel: !out.sequential,
    };
    let report = run_with(&sc, opts, (!only.is_empty()).then_some(only));
    match out.report {
        Format::Text => print!("{}", report.to_text()),
        Format::Json => println!("{}", report.to_json()),
    }
    ExitCode::from(report.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.cmd {
        Cmd::Check { file, only, out } => match load(&file) {
            Ok(text) => check(&file.display().to_string(), &text, &only, &out),
            Err(code) => code,
        },
        Cmd::Print { file } => {
            let text = match load(&file) {
                Ok(t) => t,
                Err(code) => return code,
            };
            match parse_scenario(&text) {
                Ok(sc) => {
                    println!("{}", sc.to_json());
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {}:{e}", file.display());
                    ExitCode::from(2)
                }
            }
        }
        Cmd::Demo { which, out } => {
            let (name, text) = match which {
                Demo::Sturm => ("sturm", STURM),
                Demo::Bv => ("bv", BV),
            };
            check(name, text, &[], &out)
        }
    }
}
