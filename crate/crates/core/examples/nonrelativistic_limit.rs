//! FV0 minus Schrodinger for the lowest confined level as c grows.
//!
//! cargo run --release --example nonrelativistic_limit

use fvsolve::cli::parse_config;
use fvsolve::solver::find_bound_states;

fn lowest(kind: &str, c: f64) -> f64 {
    let cfg = parse_config(&format!(
        "system.c = {c}
problem.kind = {kind}
potential.vector = coulomb -1
potential.direct = linear 1
search.e_min = 0.3
search.e_max = 0.8
search.grid_points = 26
numerics.cf_depth = 1000
"
    ))
    .unwrap();
    find_bound_states(&cfg.problem().unwrap(), &cfg.window().unwrap()).unwrap()[0]
        .energy
        .re
}

fn main() {
    let mut prev = None;
    for scale in [1.0, 3.0, 10.0, 30.0] {
        let c = 137.036 * scale;
        let shift = lowest("fv0", c) - lowest("schrodinger", c);
        match prev {
            Some(p) => println!(
                "c = {c:>9.3}  shift {shift:+.6e}  previous / this {:.3}",
                p / shift
            ),
            None => println!("c = {c:>9.3}  shift {shift:+.6e}"),
        }
        prev = Some(shift);
    }
}
