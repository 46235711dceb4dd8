//! Determinant roots against dense eigenvalues at matched truncation.
//!
//! cargo run --release --example oracle_check

use fvsolve::cli::parse_config;
use fvsolve::solver::{find_bound_states, oracle_diagonalize, real_eigenvalues_in};

fn main() {
    for kind in ["schrodinger", "fv0", "fv12"] {
        let cfg = parse_config(&format!(
            "problem.kind = {kind}
potential.vector = coulomb -1
potential.direct = linear 1
basis.n = 60
search.e_min = 0
search.e_max = 7.5
search.grid_points = 151
numerics.cf_depth = 61
"
        ))
        .unwrap();
        let problem = cfg.problem().unwrap();
        let window = cfg.window().unwrap();
        let roots = find_bound_states(&problem, &window).unwrap();
        let eigs = real_eigenvalues_in(&oracle_diagonalize(&problem, 60).unwrap(), &window, 1e-6);
        println!("{kind}: {} roots, {} eigenvalues", roots.len(), eigs.len());
        for (r, e) in roots.iter().zip(&eigs) {
            println!("  {:.10} {:.10} {:+.1e}", r.energy.re, e, r.energy.re - e);
        }
    }
}
