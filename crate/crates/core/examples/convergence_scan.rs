//! Lowest FV0 level of the Coulomb plus linear potential over a grid of
//! basis sizes and scales.
//!
//! cargo run --release --example convergence_scan

use fvsolve::cli::{parse_config, run, write_output, Command, Format, RunOptions};

fn main() {
    let cfg = parse_config(
        "problem.kind = fv0
potential.vector = coulomb -1
potential.direct = linear 1
basis.n_list = 20, 30, 40, 60
basis.b_list = 0.4, 0.5, 0.6
search.e_min = 0.3
search.e_max = 0.8
search.grid_points = 26
numerics.cf_depth = 1000
",
    )
    .unwrap();
    let outcome = run(Command::Converge, &cfg, RunOptions::default()).unwrap();
    print!(
        "{}",
        String::from_utf8(write_output(&outcome.records, Format::Table)).unwrap()
    );
    for note in outcome.notes {
        println!("{note}");
    }
}
