//! Command-line front end of `harmonic-gasket`.
//!
//! Every subcommand writes one CSV, JSON or SVG document, to stdout or to
//! `--out`. With `--out` a manifest `<out>.manifest.json` records the
//! command, the resolved parameters, the library version and the SHA-256 of
//! the output. Column orders and key names are listed in `docs/schema.md`.

pub mod args;
pub mod commands;
pub mod error;
pub mod output;

use std::ffi::OsString;
use std::io::Write;

use clap::Parser;

use args::{Cli, Command};
use error::{CliError, CliResult};
use output::{manifest_path, sha256_hex, write_file, RunManifest};

/// Parses `argv`, runs the command and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Vertices(_) => "vertices",
        Command::Curve(_) => "curve",
        Command::Measure(_) => "measure",
        Command::Metric(_) => "metric",
        Command::Geodesic(_) => "geodesic",
        Command::Holder(_) => "holder",
        Command::UpsilonCheck(_) => "upsilon-check",
        Command::EnergyCheck(_) => "energy-check",
        Command::Heat(_) => "heat",
        Command::GaussianReport(_) => "gaussian-report",
    }
}

pub fn execute(cli: &Cli) -> CliResult<()> {
    let g = &cli.global;
    if g.n < 2 {
        return Err(CliError::usage("N must be >= 2"));
    }
    let rendered = match &cli.command {
        Command::Vertices(a) => commands::vertices(g, a),
        Command::Curve(a) => commands::curve(g, a),
        Command::Measure(a) => commands::measure(g, a),
        Command::Metric(a) => commands::metric(g, a),
        Command::Geodesic(a) => commands::geodesic(g, a),
        Command::Holder(a) => commands::holder(g, a),
        Command::UpsilonCheck(a) => commands::upsilon_check(g, a),
        Command::EnergyCheck(a) => commands::energy_check(g, a),
        Command::Heat(a) => commands::heat(g, a),
        Command::GaussianReport(a) => commands::gaussian_report(g, a),
    }?;
    match &g.out {
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(rendered.text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|source| CliError::Io {
                    path: "<stdout>".into(),
                    source,
                })
        }
        Some(out) => {
            write_file(out, rendered.text.as_bytes())?;
            let name = out
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_default();
            let manifest = RunManifest {
                command: command_name(&cli.command).into(),
                parameters: rendered.parameters,
                version: harmonic_gasket::VERSION.into(),
                outputs: vec![(name, sha256_hex(rendered.text.as_bytes()))],
            };
            write_file(&manifest_path(out), manifest.to_json().as_bytes())
        }
    }
}
