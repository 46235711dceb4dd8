use fvsolve::linalg::{
    continued_fraction_corner, find_complex_root, find_real_root, lu_determinant,
    lu_log_determinant, reduce_tail, solve_linear, BlockTridiagonalOperator, ComplexMatrix,
    RootBracket,
};
use num_complex::Complex64;
use proptest::prelude::*;

fn matrix(n: usize, data: &[f64]) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, n, |i, j| {
        let k = 2 * (i * n + j);
        Complex64::new(data[k], data[k + 1])
    })
}

fn entries(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, 2 * n * n)
}

/// Laplace expansion along the first row.
fn cofactor_det(m: &ComplexMatrix) -> Complex64 {
    let n = m.rows();
    if n == 1 {
        return m[(0, 0)];
    }
    let mut sum = Complex64::new(0.0, 0.0);
    for c in 0..n {
        let minor = ComplexMatrix::from_fn(n - 1, n - 1, |i, j| {
            m[(i + 1, if j < c { j } else { j + 1 })]
        });
        let sign = if c % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * m[(0, c)] * cofactor_det(&minor);
    }
    sum
}

proptest! {
    #[test]
    fn lu_matches_cofactor_expansion(data in entries(6)) {
        let m = matrix(6, &data);
        let lu = lu_determinant(&m).unwrap();
        let oracle = cofactor_det(&m);
        prop_assert!((lu - oracle).norm() <= 1e-12 * (1.0 + oracle.norm()));
    }

    #[test]
    fn solve_multiplies_back(data in entries(8), rhs in entries(8)) {
        let mut m = matrix(8, &data);
        for i in 0..8 {
            m[(i, i)] += Complex64::new(4.0, 0.0);
        }
        let b = matrix(8, &rhs);
        let x = solve_linear(&m, &b).unwrap();
        let back = m.matmul(&x).unwrap().sub(&b).unwrap().max_norm();
        prop_assert!(back <= 1e-12);
    }

    #[test]
    fn determinant_is_multiplicative(a in entries(5), b in entries(5)) {
        let (a, b) = (matrix(5, &a), matrix(5, &b));
        let ab = lu_log_determinant(&a.matmul(&b).unwrap()).unwrap().value();
        let prod = lu_determinant(&a).unwrap() * lu_determinant(&b).unwrap();
        prop_assert!((ab - prod).norm() <= 1e-11 * (1.0 + prod.norm()));
    }

    #[test]
    fn muller_root_ignores_scale(scale in 1e-8f64..1e8) {
        let f = |z: Complex64| z * z + 1.0;
        let a = find_complex_root(f, Complex64::new(0.3, 0.8), 1e-13, 100).unwrap();
        let b = find_complex_root(|z| scale * f(z), Complex64::new(0.3, 0.8), 1e-13, 100).unwrap();
        prop_assert!((a - b).norm() <= 1e-12);
    }

    #[test]
    fn tail_fold_factorizes_the_dense_determinant(
        seed in prop::collection::vec(-0.5f64..0.5, 24),
        depth in 2usize..12,
    ) {
        // 2x2 blocks, diagonally dominant so every fold is regular.
        let block = move |i: usize, k: usize| {
            ComplexMatrix::from_fn(2, 2, |r, c| {
                let x = seed[(4 * k + 2 * r + c + i) % seed.len()];
                Complex64::new(x + if r == c && k == 0 { 3.0 } else { 0.0 }, 0.1 * x)
            })
        };
        let rule = block.clone();
        let op = BlockTridiagonalOperator::from_rule(2, move |i| (rule(i, 0), rule(i, 1), rule(i, 2))).unwrap();
        let n = 2 * (depth + 1);
        let mut dense = ComplexMatrix::zeros(n, n);
        for i in 0..=depth {
            dense.set_block(2 * i, 2 * i, &block(i, 0));
            if i < depth {
                dense.set_block(2 * i, 2 * i + 2, &block(i, 1));
                dense.set_block(2 * i + 2, 2 * i, &block(i, 2));
            }
        }
        let tail = reduce_tail(&op, 1, depth).unwrap();
        let folded = lu_log_determinant(&tail.closing_block).unwrap().mul(tail.tail_log_det).value();
        let oracle = lu_determinant(&dense).unwrap();
        prop_assert!((folded - oracle).norm() <= 1e-10 * (1.0 + oracle.norm()));
    }
}

#[test]
fn toeplitz_corner_matches_closed_form_and_dense_inverse() {
    let (d, u, l) = (3.0, 1.0, 1.0);
    let op = BlockTridiagonalOperator::scalar_toeplitz(
        Complex64::new(d, 0.0),
        Complex64::new(u, 0.0),
        Complex64::new(l, 0.0),
    );
    let (corner, _) = continued_fraction_corner(&op, 1, 1e-14, 1 << 16).unwrap();
    let closed = (d - (d * d - 4.0 * u * l).sqrt()) / (2.0 * u * l);
    assert!((corner[(0, 0)].re - closed).abs() < 1e-13);

    let n = 200;
    let dense = ComplexMatrix::from_fn(n, n, |i, j| {
        Complex64::new(
            match i as i64 - j as i64 {
                0 => d,
                -1 => u,
                1 => l,
                _ => 0.0,
            },
            0.0,
        )
    });
    let e0 = ComplexMatrix::from_fn(n, 1, |i, _| {
        Complex64::new(if i == 0 { 1.0 } else { 0.0 }, 0.0)
    });
    let g = solve_linear(&dense, &e0).unwrap();
    assert!((g[(0, 0)] - corner[(0, 0)]).norm() < 1e-13);
}

#[test]
fn real_roots() {
    let f = |x: f64| x * x - 2.0;
    let r = find_real_root(f, RootBracket::evaluate(f, 0.0, 2.0).unwrap(), 1e-14).unwrap();
    assert!((r - 2f64.sqrt()).abs() < 1e-13);
    let r = find_real_root(
        f64::cos,
        RootBracket::evaluate(f64::cos, 1.0, 2.0).unwrap(),
        1e-14,
    )
    .unwrap();
    assert!((r - std::f64::consts::FRAC_PI_2).abs() < 1e-13);
}

#[test]
fn muller_exponential() {
    let z = find_complex_root(|z| z.exp() - 2.0, Complex64::new(1.0, 0.5), 1e-14, 100).unwrap();
    assert!((z - Complex64::new(2f64.ln(), 0.0)).norm() < 1e-12);
}
