//! Closed-form Coulomb-Sturmian matrices next to Gauss-Laguerre quadrature.
//!
//! cargo run --release --example matrix_elements

use fvsolve::csbasis::{
    inverse_r_matrix, kinetic_matrix, overlap_matrix, power_r_matrix, quadrature_matrix, BasisSpec,
    RadialFunction, RadialMatrix,
};

fn worst(a: &RadialMatrix, b: &RadialMatrix) -> f64 {
    a.matrix.sub(&b.matrix).unwrap().max_norm() / b.matrix.max_norm()
}

fn main() {
    let spec = BasisSpec::new(1, 0.7, 6).unwrap();
    let s = overlap_matrix(&spec);
    if let Some(w) = s.half_bandwidth {
        println!("overlap, l = 1, b = 0.7, half-bandwidth {w}");
    }
    for n in 0..=spec.n_max {
        let row: Vec<String> = (0..=spec.n_max)
            .map(|m| format!("{:8.4}", s.entry(n, m).re))
            .collect();
        println!("  {}", row.join(" "));
    }

    let order = 3 * (spec.n_max + 8);
    let pairs = [
        ("overlap", s.clone(), RadialFunction::monomial(1.0, 0)),
        (
            "1/r",
            inverse_r_matrix(&spec),
            RadialFunction::monomial(1.0, -1),
        ),
        (
            "r^2",
            power_r_matrix(&spec, 2).unwrap(),
            RadialFunction::monomial(1.0, 2),
        ),
    ];
    for (name, closed, f) in pairs {
        let quad = quadrature_matrix(&spec, &spec, &f, order).unwrap();
        println!(
            "{name:>8}: relative difference {:.1e}",
            worst(&closed, &quad)
        );
    }
    let t = kinetic_matrix(&spec, 1.0).unwrap();
    println!(
        "kinetic diagonal: {:?}",
        (0..4).map(|n| t.entry(n, n).re).collect::<Vec<_>>()
    );
}
