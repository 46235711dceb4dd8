//! Coulomb plus linear (default) or quadratic confinement, six levels for
//! l = 0 and l = 1 in each of the three equations.
//!
//! cargo run --release --example confinement -- quadratic

use fvsolve::cli::{preset_config, run, write_output, Command, Format, Preset, RunOptions};

fn main() {
    let preset = match std::env::args().nth(1).as_deref() {
        Some("quadratic") => Preset::Table3,
        _ => Preset::Table2,
    };
    let start = std::time::Instant::now();
    let outcome = run(
        Command::Preset(preset),
        &preset_config(preset),
        RunOptions::default(),
    )
    .unwrap();
    print!(
        "{}",
        String::from_utf8(write_output(&outcome.records, Format::Table)).unwrap()
    );
    eprintln!("{:.1} s", start.elapsed().as_secs_f64());
}
