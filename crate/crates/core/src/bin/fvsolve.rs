use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use fvsolve::cli::{
    parse_config_in, preset_config, run, write_output, Command, Format, Preset, RunOptions,
    EXIT_FAILURE,
};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Cmd {
    Solve,
    Resonance,
    Converge,
    Compare,
    Preset,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PresetName {
    Table1,
    Table2,
    Table3,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum OutFormat {
    Table,
    Json,
    Csv,
}

/// Bound states and resonances of the Schrodinger, FV0 and FV1/2 equations.
#[derive(Parser, Debug)]
#[command(name = "fvsolve", version)]
struct Args {
    command: Cmd,
    /// Preset name (for `preset`).
    preset: Option<PresetName>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<OutFormat>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for energy scans.
    #[arg(long)]
    threads: Option<usize>,
    /// Exit with status 1 when `solve` finds nothing.
    #[arg(long)]
    require_roots: bool,
    /// Record wall time in the output.
    #[arg(long)]
    timing: bool,
    #[arg(long, short)]
    verbose: bool,
}

fn fail(message: impl std::fmt::Display) -> ExitCode {
    eprintln!("fvsolve: {message}");
    ExitCode::from(EXIT_FAILURE as u8)
}

fn main() -> ExitCode {
    let args = Args::parse();
    let level = if args.verbose { "debug" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    if let Some(k) = args.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
        {
            return fail(e);
        }
    }

    let command = match (args.command, args.preset) {
        (Cmd::Preset, Some(p)) => Command::Preset(match p {
            PresetName::Table1 => Preset::Table1,
            PresetName::Table2 => Preset::Table2,
            PresetName::Table3 => Preset::Table3,
        }),
        (Cmd::Preset, None) => return fail("preset needs a name: table1, table2 or table3"),
        (_, Some(_)) => return fail("a preset name is only valid with `preset`"),
        (Cmd::Solve, None) => Command::Solve,
        (Cmd::Resonance, None) => Command::Resonance,
        (Cmd::Converge, None) => Command::Converge,
        (Cmd::Compare, None) => Command::Compare,
    };

    let mut config = match (&args.config, command) {
        (Some(path), _) => {
            let text = match std::fs::read_to_string(path) {
                Ok(t) => t,
                Err(e) => return fail(format!("{}: {e}", path.display())),
            };
            match parse_config_in(&text, path.parent()) {
                Ok(c) => c,
                Err(e) => return fail(format!("{}: {e}", path.display())),
            }
        }
        (None, Command::Preset(p)) => preset_config(p),
        (None, _) => return fail("--config is required"),
    };
    if let Some(f) = args.format {
        config.format = match f {
            OutFormat::Table => Format::Table,
            OutFormat::Json => Format::Json,
            OutFormat::Csv => Format::Csv,
        };
    }
    if let Some(p) = &args.out {
        config.path = Some(p.clone());
    }

    let options = RunOptions {
        require_roots: args.require_roots,
        timing: args.timing,
    };
    let outcome = match run(command, &config, options) {
        Ok(o) => o,
        Err(e) => return fail(e),
    };
    let bytes = write_output(&outcome.records, config.format);
    let written = match &config.path {
        Some(p) => std::fs::write(p, &bytes),
        None => std::io::stdout().write_all(&bytes),
    };
    if let Err(e) = written {
        return fail(e);
    }
    for note in &outcome.notes {
        eprintln!("{note}");
    }
    ExitCode::from(outcome.status as u8)
}
