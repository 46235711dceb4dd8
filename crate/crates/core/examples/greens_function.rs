//! Corner of the long-range Green's operator from the continued fraction,
//! checked against the folded prefix it came from.
//!
//! cargo run --release --example greens_function

use fvsolve::cli::parse_config;
use fvsolve::linalg::{ComplexMatrix, Lu};
use num_complex::Complex64;

fn main() {
    let cfg = parse_config(
        "problem.kind = fv0
potential.vector = coulomb -1
potential.direct = linear 1
basis.n = 20
search.e_min = 0
search.e_max = 1
numerics.cf_depth = 1000
",
    )
    .unwrap();
    let problem = cfg.problem().unwrap();
    for e in [Complex64::new(0.3, 0.0), Complex64::new(1.2, -0.05)] {
        let (g, depth) = problem.greens_corner(e).unwrap();
        let (prefix, _) = problem.converged_prefix(e).unwrap();
        let full = Lu::factor(&prefix).unwrap().inverse().unwrap();
        let residual = prefix
            .matmul(&full)
            .unwrap()
            .sub(&ComplexMatrix::identity(prefix.rows()))
            .unwrap()
            .inf_norm();
        println!(
            "E = {e}: corner {}x{}, depth {depth}, G[0,0] = {:.6e}, |JG - I| = {residual:.1e}",
            g.rows(),
            g.cols(),
            g[(0, 0)]
        );
    }
}
