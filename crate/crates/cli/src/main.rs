//! `ququart` command-line front end.
//!
//! Every command prints exactly one report envelope
//! `{command, parameters, results, pass, tool_version}`. Exit status is 0
//! when the report passes, 1 when an assertion or the computation fails, and
//! 2 for usage or input errors.

mod commands;
mod input;
mod report;

use std::io::Write;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use commands::{CliError, CmdResult, CollectiveSystem, Mode, UpbName};
use ququart::BasisLabel;
use report::{render, Format, ReportEnvelope, Rows};

#[derive(Parser)]
#[command(name = "ququart", version, about = "Four-level teleportation, entanglement swapping and their UPB embeddings")]
struct Cli {
    /// Output rendering; the numbers are identical in every format.
    #[arg(long, value_enum, global = true, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

const STATE_HELP: &str = "uniform, basis0..basis3, random:<seed>, or 8 comma-separated numbers \
                          (re,im pairs in natural-basis order); normalized automatically";

#[derive(Subcommand)]
enum Command {
    /// Orthonormality, completeness, Schmidt values and inverse transform of the W/X/Y/Z basis.
    #[command(after_help = "CSV columns: check, value, tolerance, pass")]
    VerifyBasis {
        #[arg(long, default_value_t = 1e-12)]
        tolerance: f64,
    },
    /// Transcribed correction matrices against the derived ones.
    #[command(after_help = "CSV columns: label, transcribed_signed_permutation, derived_inverts_branch, \
                            matches_transcription\nThe transcription was printed for resource X1.")]
    VerifyCorrections {
        #[arg(long, default_value = "X1")]
        resource: BasisLabel,
    },
    /// Teleport one ququart: exact branch enumeration or seeded trials.
    #[command(after_help = "CSV columns (exact): outcome, probability, fidelity\n\
                            CSV columns (sampled): outcome, count, frequency, band_low, band_high, in_band\n\
                            The band is the expected count ±5σ.")]
    Teleport {
        #[arg(long, default_value = "uniform", allow_hyphen_values = true, help = STATE_HELP)]
        state: String,
        #[arg(long, default_value = "X1")]
        resource: BasisLabel,
        #[arg(long, default_value_t = 1)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Enumerate all sixteen branches instead of sampling.
        #[arg(long)]
        exact: bool,
        /// Run trials on all cores; results are identical to serial runs.
        #[arg(long)]
        parallel: bool,
    },
    /// Derived swap table, diffed against the printed one for X1 ⊗ X1.
    #[command(after_help = "CSV columns: outcome_23, result_14, phase, magnitude, printed_result, \
                            printed_phase, matches_printed")]
    SwapTable {
        #[arg(long, default_value = "X1")]
        resource_12: BasisLabel,
        #[arg(long, default_value = "X1")]
        resource_34: BasisLabel,
    },
    /// Sampled entanglement swapping on X1 ⊗ X1.
    #[command(after_help = "CSV columns: run, seed, outcome, probability, fidelity\n\
                            With --runs N > 1, run k uses a seed mixed from --seed and k.")]
    Swap {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        runs: usize,
    },
    /// Orthogonality and exhaustive unextendibility certificate.
    #[command(after_help = "CSV columns: check, value")]
    VerifyUpb {
        #[arg(long, value_enum)]
        system: UpbName,
        /// Remove one member first (the result should then be extendible).
        #[arg(long)]
        drop: Option<usize>,
    },
    /// Solutions of d^M − M(d−1) − 1 = 4 with 2 ≤ M, d ≤ max.
    #[command(after_help = "CSV columns: parties, local_dim, excess")]
    SolveDim {
        #[arg(long, default_value_t = 10)]
        max: u32,
    },
    /// Teleportation or swapping on logical levels embedded in a UPB complement.
    #[command(after_help = "CSV columns (sampled): outcome, probability, logical_fidelity|fidelity_to_table, leakage\n\
                            CSV columns (exact teleport): outcome, probability, logical_probability, logical_fidelity, leakage\n\
                            CSV columns (exact swap): outcome_23, result_14, probability, logical_probability, \
                            fidelity_to_table, leakage")]
    Collective {
        #[arg(long, value_enum)]
        system: CollectiveSystem,
        #[arg(long, value_enum, default_value_t = Mode::Teleport)]
        mode: Mode,
        #[arg(long, default_value = "uniform", allow_hyphen_values = true, help = STATE_HELP)]
        state: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Enumerate all sixteen branches.
        #[arg(long)]
        exact: bool,
    },
    /// Member factor amplitudes and the entangled complement basis as JSON.
    #[command(after_help = "CSV columns: member, party, level, re, im")]
    ExportUpb {
        #[arg(long, value_enum)]
        system: UpbName,
    },
}

fn state_arg(text: &str) -> Result<ququart::StateVector, CliError> {
    let parsed = input::parse_state(text).map_err(|e| CliError::Usage(format!("--state: {e}")))?;
    if let Some(w) = parsed.warning {
        eprintln!("warning: {w}");
    }
    Ok(parsed.state)
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::VerifyBasis { .. } => "verify-basis",
        Command::VerifyCorrections { .. } => "verify-corrections",
        Command::Teleport { .. } => "teleport",
        Command::SwapTable { .. } => "swap-table",
        Command::Swap { .. } => "swap",
        Command::VerifyUpb { .. } => "verify-upb",
        Command::SolveDim { .. } => "solve-dim",
        Command::Collective { .. } => "collective",
        Command::ExportUpb { .. } => "export-upb",
    }
}

fn run(command: Command) -> CmdResult {
    match command {
        Command::VerifyBasis { tolerance } => commands::verify_basis(tolerance),
        Command::VerifyCorrections { resource } => commands::verify_corrections(resource),
        Command::Teleport { state, resource, trials, seed, exact, parallel } => {
            let s = state_arg(&state)?;
            commands::teleport(commands::TeleportArgs {
                state: s,
                state_text: state,
                resource,
                trials,
                seed,
                exact,
                parallel,
            })
        }
        Command::SwapTable { resource_12, resource_34 } => commands::swap_table(resource_12, resource_34),
        Command::Swap { seed, runs } => commands::swap(seed, runs),
        Command::VerifyUpb { system, drop } => commands::verify_upb(system, drop),
        Command::SolveDim { max } => commands::solve_dim(max),
        Command::Collective { system, mode, state, seed, exact } => {
            let s = state_arg(&state)?;
            commands::collective(commands::CollectiveArgs {
                system: system.into(),
                mode,
                state: s,
                state_text: state,
                seed,
                exact,
            })
        }
        Command::ExportUpb { system } => commands::export_upb(system),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let name = command_name(&cli.command);
    let report = match run(cli.command) {
        Ok(r) => r,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
        Err(CliError::Failure(msg)) => {
            eprintln!("error: {msg}");
            let mut rows = Rows::new(&["error"]);
            rows.push(vec![json!(msg)]);
            ReportEnvelope::new(name, Default::default(), json!({ "error": msg }), false, rows)
        }
    };
    let mut out = std::io::stdout().lock();
    match render(&report, cli.format, &mut out).and_then(|_| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
            eprintln!("error: writing report: {e}");
            return ExitCode::from(1);
        }
        _ => {}
    }
    if report.pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
