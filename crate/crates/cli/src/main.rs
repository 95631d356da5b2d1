//! `adomian`: runs the series, cascade and Monte Carlo experiments and writes
//! `manifest.json`, CSV/JSON results and `summary.txt` to `--out`.
//!
//! Exit status: 0 when every gate of the command passed, 1 on a gate
//! failure, 2 on a usage error or violated precondition.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{CascadeArgs, CatalanArgs, ExArgs, KlArgs, McEqArgs, McExpfuncArgs, ReportArgs};

#[derive(Debug, Parser)]
#[command(
    name = "adomian",
    version,
    about = "Adomian series for quadratic BSDEs: coefficient, PDE and Monte Carlo checks"
)]
struct Cli {
    /// Output directory.
    #[arg(long, global = true, default_value = "adomian-out")]
    out: PathBuf,

    /// JSON object whose fields override the command's flags. May also hold
    /// one object per command name.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Catalan recurrence against the closed form.
    Catalan(CatalanArgs),
    /// Example 1 coefficients, closed forms and residuals.
    Ex1(ExArgs),
    /// Example 2 coefficients, closed forms and the ζ residual.
    Ex2(ExArgs),
    /// Markovian PDE cascade for Example 1 or 2.
    Cascade(CascadeArgs),
    /// Monte Carlo residual of the exponential equation on Example 1.
    McEq(McEqArgs),
    /// Monte Carlo estimate of E exp(∫W² dt) against the closed form.
    McExpfunc(McExpfuncArgs),
    /// Karhunen-Loève product formula and eigenpair checks.
    Kl(KlArgs),
    /// Every acceptance gate.
    ReportAll(ReportArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = match cli.config.as_deref().map(commands::load_config).transpose() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let out = cli.out.as_path();
    let cfg = config.as_ref();
    let result = match cli.command {
        Command::Catalan(a) => commands::catalan(a, cfg, out),
        Command::Ex1(a) => commands::ex1(a, cfg, out),
        Command::Ex2(a) => commands::ex2(a, cfg, out),
        Command::Cascade(a) => commands::cascade(a, cfg, out),
        Command::McEq(a) => commands::mc_eq(a, cfg, out),
        Command::McExpfunc(a) => commands::mc_expfunc(a, cfg, out),
        Command::Kl(a) => commands::kl(a, cfg, out),
        Command::ReportAll(a) => commands::report_all(a, cfg, out),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
