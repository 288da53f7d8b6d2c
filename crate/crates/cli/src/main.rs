use std::process::ExitCode;

use clap::{Parser, Subcommand};
use volterra_cli::commands::{self, EvolveArgs, LemmaArgs, PlotArgs, SpectrumArgs, VerifyArgs};
use volterra_cli::Status;

/// Periodic Volterra chain: direct and inverse-spectral integration.
///
/// Exit codes: 0 pass, 1 check failed, 2 input error, 3 invariant violation,
/// 4 integration failure.
#[derive(Parser)]
#[command(name = "volterra", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Periodic/antiperiodic spectrum, gaps and Dirichlet data as JSON
    Spectrum(SpectrumArgs),
    /// Evolve a chain and write its trajectory as CSV
    ///
    /// Columns: t, u_1..u_N, then for --method direct: sum_drift,
    /// product_drift (relative drift of Σu and Πu); for --method spectral:
    /// mu_J_K for shift K = 0..N-1 (outer) and gap J = 1..N-1 (inner),
    /// pair_sum_residual, zero_trace_residual, and odd_period_residual when
    /// N is odd. u is reconstructed from the spectral data.
    Evolve(EvolveArgs),
    /// Run direct and spectral evolution side by side and check every identity
    Verify(VerifyArgs),
    /// Sweep the Lagrange power-sum lemma over random node sets
    Lemma(LemmaArgs),
    /// Render a trajectory CSV as an SVG line chart
    Plot(PlotArgs),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { Status::InputError.code() } else { 0 });
        }
    };
    let result = match &cli.command {
        Command::Spectrum(a) => commands::spectrum(a),
        Command::Evolve(a) => commands::evolve(a),
        Command::Verify(a) => commands::verify(a),
        Command::Lemma(a) => commands::lemma(a),
        Command::Plot(a) => commands::plot(a),
    };
    match result {
        Ok(status) => ExitCode::from(status.code()),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.status.code())
        }
    }
}
