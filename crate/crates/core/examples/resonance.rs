//! Shape resonance behind a screened barrier, from the complex-scaled
//! determinant and from dense diagonalization.
//!
//! cargo run --release --example resonance

use fvsolve::cli::parse_config;
use fvsolve::solver::{find_resonance, oracle_diagonalize};

fn main() {
    let cfg = parse_config(
        "potential.vector = screened -30 1, screened 15 0.4
basis.n = 60
basis.b = 1
basis.theta = 0.3
search.guess = 1.3 -0.1
",
    )
    .unwrap();
    let problem = cfg.problem().unwrap();
    let res = find_resonance(&problem, cfg.guess().unwrap()).unwrap();
    println!(
        "determinant: {:.9} {:+.9}i ({})",
        res.energy.re,
        res.energy.im,
        res.kind.name()
    );

    // Rotated continuum eigenvalues lie near arg E = -2 theta; the resonance
    // does not move with theta.
    let eigs = oracle_diagonalize(&problem, 60).unwrap();
    let near = eigs
        .iter()
        .min_by(|a, b| {
            (*a - res.energy)
                .norm()
                .total_cmp(&(*b - res.energy).norm())
        })
        .unwrap();
    println!("dense:       {:.9} {:+.9}i", near.re, near.im);
}
