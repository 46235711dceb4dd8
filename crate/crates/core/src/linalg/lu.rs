use num_complex::Complex64;

use super::ComplexMatrix;
use crate::error::{FvError, Result};

/// A determinant stored as unit phase times `exp(ln_abs)`.
///
/// Determinants of the assembled operators easily exceed the range of `f64`
/// (entries of order `mc^2` over several hundred rows), so products are kept
/// in logarithmic form. A zero determinant has `ln_abs == -inf`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogDet {
    pub phase: Complex64,
    pub ln_abs: f64,
}

impl LogDet {
    pub const ONE: LogDet = LogDet {
        phase: Complex64 { re: 1.0, im: 0.0 },
        ln_abs: 0.0,
    };

    pub fn from_value(z: Complex64) -> Self {
        let r = z.norm();
        if r == 0.0 {
            LogDet {
                phase: Complex64::new(1.0, 0.0),
                ln_abs: f64::NEG_INFINITY,
            }
        } else {
            LogDet {
                phase: z / r,
                ln_abs: r.ln(),
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.ln_abs == f64::NEG_INFINITY
    }

    pub fn mul(self, other: LogDet) -> LogDet {
        let p = self.phase * other.phase;
        LogDet {
            phase: p / p.norm(),
            ln_abs: self.ln_abs + other.ln_abs,
        }
    }

    pub fn div(self, other: LogDet) -> LogDet {
        let p = self.phase / other.phase;
        LogDet {
            phase: p / p.norm(),
            ln_abs: self.ln_abs - other.ln_abs,
        }
    }

    /// `value / exp(reference)`; saturates to 0 or infinity instead of NaN.
    pub fn scaled_value(&self, reference: f64) -> Complex64 {
        if self.is_zero() {
            return Complex64::new(0.0, 0.0);
        }
        self.phase * (self.ln_abs - reference).exp()
    }

    pub fn value(&self) -> Complex64 {
        self.scaled_value(0.0)
    }
}

/// LU factorization with partial pivoting by maximum modulus.
#[derive(Clone, Debug)]
pub struct Lu {
    factors: ComplexMatrix,
    perm: Vec<usize>,
    parity: f64,
    scale: f64,
}

impl Lu {
    pub fn factor(m: &ComplexMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(FvError::Dimension(format!(
                "LU needs a square matrix, got {}x{}",
                m.rows(),
                m.cols()
            )));
        }
        let n = m.rows();
        let scale = m.max_norm();
        let mut a = m.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut parity = 1.0;
        for k in 0..n {
            let (p, pmax) = (k..n)
                .map(|i| (i, a[(i, k)].norm()))
                .fold((k, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if p != k {
                let data = a.as_mut_slice();
                for j in 0..n {
                    data.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
                parity = -parity;
            }
            if pmax == 0.0 {
                continue;
            }
            let pivot = a[(k, k)];
            let inv = 1.0 / pivot;
            let data = a.as_mut_slice();
            let (head, tail) = data.split_at_mut((k + 1) * n);
            let pivot_row = &head[k * n..(k + 1) * n];
            for row in tail.chunks_exact_mut(n) {
                let factor = row[k] * inv;
                row[k] = factor;
                if factor.re == 0.0 && factor.im == 0.0 {
                    continue;
                }
                for j in k + 1..n {
                    row[j] -= factor * pivot_row[j];
                }
            }
        }
        Ok(Self {
            factors: a,
            perm,
            parity,
            scale,
        })
    }

    pub fn dim(&self) -> usize {
        self.factors.rows()
    }

    /// Smallest pivot modulus.
    pub fn min_pivot(&self) -> f64 {
        (0..self.dim())
            .map(|i| self.factors[(i, i)].norm())
            .fold(f64::INFINITY, f64::min)
    }

    pub fn determinant(&self) -> Complex64 {
        let mut det = Complex64::new(self.parity, 0.0);
        for i in 0..self.dim() {
            det *= self.factors[(i, i)];
        }
        det
    }

    pub fn log_determinant(&self) -> LogDet {
        let mut acc = LogDet::from_value(Complex64::new(self.parity, 0.0));
        for i in 0..self.dim() {
            acc = acc.mul(LogDet::from_value(self.factors[(i, i)]));
        }
        acc
    }

    fn check_regular(&self) -> Result<()> {
        let n = self.dim();
        let pivot = self.min_pivot();
        let threshold = n as f64 * f64::EPSILON * self.scale;
        if !(pivot > threshold) {
            return Err(FvError::Singular {
                pivot,
                context: String::new(),
            });
        }
        Ok(())
    }

    pub fn solve(&self, rhs: &ComplexMatrix) -> Result<ComplexMatrix> {
        let n = self.dim();
        if rhs.rows() != n {
            return Err(FvError::Dimension(format!(
                "right-hand side has {} rows, system has {n}",
                rhs.rows()
            )));
        }
        self.check_regular()?;
        let m = rhs.cols();
        let mut x = ComplexMatrix::from_fn(n, m, |i, j| rhs[(self.perm[i], j)]);
        let lu = &self.factors;
        for col in 0..m {
            for i in 0..n {
                let mut s = x[(i, col)];
                for k in 0..i {
                    s -= lu[(i, k)] * x[(k, col)];
                }
                x[(i, col)] = s;
            }
            for i in (0..n).rev() {
                let mut s = x[(i, col)];
                for k in i + 1..n {
                    s -= lu[(i, k)] * x[(k, col)];
                }
                x[(i, col)] = s / lu[(i, i)];
            }
        }
        Ok(x)
    }

    pub fn inverse(&self) -> Result<ComplexMatrix> {
        self.solve(&ComplexMatrix::identity(self.dim()))
    }
}

/// Determinant through pivoted LU. Exactly singular input yields zero.
pub fn lu_determinant(m: &ComplexMatrix) -> Result<Complex64> {
    Ok(Lu::factor(m)?.determinant())
}

pub fn lu_log_determinant(m: &ComplexMatrix) -> Result<LogDet> {
    Ok(Lu::factor(m)?.log_determinant())
}

pub fn solve_linear(m: &ComplexMatrix, rhs: &ComplexMatrix) -> Result<ComplexMatrix> {
    Lu::factor(m)?.solve(rhs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn identity_determinant() {
        let det = lu_determinant(&ComplexMatrix::identity(5)).unwrap();
        assert_eq!(det, c(1.0));
    }

    #[test]
    fn two_by_two_determinant() {
        let m = ComplexMatrix::from_real_rows(&[&[2.0, 1.0], &[1.0, 2.0]]).unwrap();
        let det = lu_determinant(&m).unwrap();
        assert!((det - c(3.0)).norm() < 1e-15);
    }

    #[test]
    fn non_square_is_dimension_error() {
        let m = ComplexMatrix::zeros(2, 3);
        assert!(matches!(lu_determinant(&m), Err(FvError::Dimension(_))));
    }

    #[test]
    fn singular_solve_reports_pivot() {
        let m = ComplexMatrix::from_real_rows(&[&[1.0, 2.0], &[2.0, 4.0]]).unwrap();
        let err = solve_linear(&m, &ComplexMatrix::identity(2)).unwrap_err();
        match err {
            FvError::Singular { pivot, .. } => assert!(pivot < 1e-14),
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(lu_determinant(&m).unwrap(), c(0.0));
    }

    #[test]
    fn diagonal_solve() {
        let m = ComplexMatrix::diagonal(&[c(2.0), c(4.0)]);
        let rhs = ComplexMatrix::from_real_rows(&[&[2.0], &[4.0]]).unwrap();
        let x = solve_linear(&m, &rhs).unwrap();
        assert!((x[(0, 0)] - c(1.0)).norm() < 1e-15);
        assert!((x[(1, 0)] - c(1.0)).norm() < 1e-15);
    }

    #[test]
    fn log_determinant_survives_overflow() {
        let big = ComplexMatrix::diagonal(&vec![c(1e5); 200]);
        let ld = lu_log_determinant(&big).unwrap();
        assert!((ld.ln_abs - 200.0 * 1e5f64.ln()).abs() < 1e-9);
        assert!((ld.phase - c(1.0)).norm() < 1e-12);
        assert!(!lu_determinant(&big).unwrap().re.is_finite());
    }
}
