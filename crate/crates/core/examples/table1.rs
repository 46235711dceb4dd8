//! Bound state and resonance in `92/r - 240 e^{-r}/r + 320 e^{-4r}/r`.
//!
//! cargo run --release --example table1

use fvsolve::cli::{preset_config, run, write_output, Command, Format, Preset, RunOptions};

fn main() {
    let config = preset_config(Preset::Table1);
    let outcome = run(
        Command::Preset(Preset::Table1),
        &config,
        RunOptions::default(),
    )
    .unwrap();
    print!(
        "{}",
        String::from_utf8(write_output(&outcome.records, Format::Table)).unwrap()
    );
    for r in &outcome.records {
        println!(
            "{:>6} {:>9} {:.9} {:+.3e}i",
            r.label, r.kind, r.energy.re, r.energy.im
        );
    }
}
