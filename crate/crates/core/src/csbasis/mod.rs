//! Coulomb-Sturmian radial basis
//!
//! `phi_n(r) = sqrt(n!/(n+2l+1)!) (2br)^{l+1} e^{-br} L_n^{(2l+1)}(2br)`,
//! normalized so that `<n|1/r|n'> = delta_{nn'}`. Overlap, kinetic energy and
//! the powers `r^p` are band matrices in this basis and have closed forms for
//! any index; everything else is integrated with Gauss-Laguerre rules.
//!
//! The scale may be rotated, `b -> b e^{-i theta}`, which is the same as
//! complex scaling `r -> r e^{i theta}`: closed forms are analytic in `b`, and
//! quadrature runs along the rotated ray with the potential continued into
//! the complex plane.

mod elements;
pub mod laguerre;
mod quadrature;

pub use elements::{
    band_entry, cross_band_entry, cross_l_matrix, inverse_r_matrix, kinetic_matrix, overlap_matrix,
    power_r_matrix, quadrature_matrix, screened_coulomb_matrix, BandOperator, OperatorKind,
    RadialFunction, RadialMatrix,
};
pub use quadrature::{integrate, QuadratureRule};

use num_complex::Complex64;

use crate::error::{FvError, Result};

/// One orbital angular momentum block of the basis, truncated at `n_max`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BasisSpec {
    pub l: u32,
    /// Scale parameter `b` (inverse length).
    pub b: f64,
    pub n_max: usize,
    /// Complex-scaling angle; zero for bound-state work.
    pub theta: f64,
}

impl BasisSpec {
    pub fn new(l: u32, b: f64, n_max: usize) -> Result<Self> {
        Self::rotated(l, b, n_max, 0.0)
    }

    pub fn rotated(l: u32, b: f64, n_max: usize, theta: f64) -> Result<Self> {
        if !(b > 0.0) || !b.is_finite() {
            return Err(FvError::Domain(format!(
                "basis scale b must be positive, got {b}"
            )));
        }
        if !(theta.abs() < std::f64::consts::FRAC_PI_4) {
            return Err(FvError::Domain(format!(
                "rotation angle {theta} outside (-pi/4, pi/4)"
            )));
        }
        Ok(Self { l, b, n_max, theta })
    }

    pub fn size(&self) -> usize {
        self.n_max + 1
    }

    /// Laguerre parameter `2l + 1`.
    pub fn alpha(&self) -> f64 {
        2.0 * self.l as f64 + 1.0
    }

    /// `b e^{-i theta}`.
    pub fn complex_scale(&self) -> Complex64 {
        Complex64::from_polar(self.b, -self.theta)
    }

    pub fn with_l(&self, l: u32) -> Self {
        Self { l, ..*self }
    }

    pub fn is_rotated(&self) -> bool {
        self.theta != 0.0
    }
}

/// `<r|n l b>` for real `b` (forward Laguerre recurrence).
pub fn cs_function(n: usize, spec: &BasisSpec, r: f64) -> Result<f64> {
    Ok(cs_functions(n, spec, r)?[n])
}

/// `<r|k l b>` for `k = 0..=n_max`.
pub fn cs_functions(n_max: usize, spec: &BasisSpec, r: f64) -> Result<Vec<f64>> {
    if !(r >= 0.0) {
        return Err(FvError::Domain(format!(
            "radius must be non-negative, got {r}"
        )));
    }
    let x = 2.0 * spec.b * r;
    let mut out = laguerre::laguerre_functions(spec.alpha(), n_max, x);
    let root = x.sqrt();
    for v in out.iter_mut() {
        *v *= root;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(n: u64) -> f64 {
        (1..=n).map(|k| k as f64).product()
    }

    /// Explicit-coefficient associated Laguerre polynomial.
    fn laguerre_series(n: u64, alpha: u64, x: f64) -> f64 {
        (0..=n)
            .map(|i| {
                let binom = factorial(n + alpha) / (factorial(n - i) * factorial(alpha + i));
                let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                sign * binom * x.powi(i as i32) / factorial(i)
            })
            .sum()
    }

    #[test]
    fn vanishes_at_origin() {
        for l in 0..3 {
            let spec = BasisSpec::new(l, 0.8, 5).unwrap();
            for n in 0..5 {
                assert_eq!(cs_function(n, &spec, 0.0).unwrap(), 0.0);
            }
        }
    }

    #[test]
    fn ground_function_value() {
        let spec = BasisSpec::new(0, 1.0, 0).unwrap();
        let v = cs_function(0, &spec, 1.0).unwrap();
        assert!((v - 2.0 * (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn matches_series_form() {
        let (n, l, b, r) = (3u64, 1u32, 0.7, 2.5);
        let spec = BasisSpec::new(l, b, n as usize).unwrap();
        let x = 2.0 * b * r;
        let alpha = 2 * l as u64 + 1;
        let norm = (factorial(n) / factorial(n + alpha)).sqrt();
        let expect = norm * x.powi(l as i32 + 1) * (-b * r).exp() * laguerre_series(n, alpha, x);
        let got = cs_function(n as usize, &spec, r).unwrap();
        assert!(((got - expect) / expect).abs() < 1e-12, "{got} vs {expect}");
    }

    #[test]
    fn negative_radius_rejected() {
        let spec = BasisSpec::new(0, 1.0, 3).unwrap();
        assert!(matches!(
            cs_function(0, &spec, -0.1),
            Err(FvError::Domain(_))
        ));
    }

    #[test]
    fn sturm_liouville_identity() {
        // (-f'' + l(l+1) f / r^2 + b^2 f) r = 2b (n + l + 1) f
        let h = 1e-4;
        for &(n, l, b) in &[(0usize, 0u32, 1.0), (3, 1, 0.7), (7, 2, 2.0), (12, 0, 0.4)] {
            let spec = BasisSpec::new(l, b, n).unwrap();
            for &r in &[0.3, 1.1, 2.9, 6.0] {
                let f = |x: f64| cs_function(n, &spec, x).unwrap();
                let f0 = f(r);
                let f2 = (f(r + h) - 2.0 * f0 + f(r - h)) / (h * h);
                let lhs = (-f2 + (l * (l + 1)) as f64 * f0 / (r * r) + b * b * f0) * r;
                let rhs = 2.0 * b * (n as u32 + l + 1) as f64 * f0;
                assert!(
                    (lhs - rhs).abs() < 1e-6,
                    "n={n} l={l} r={r}: {lhs} vs {rhs}"
                );
            }
        }
    }

    #[test]
    fn invalid_scale_rejected() {
        assert!(BasisSpec::new(0, 0.0, 3).is_err());
        assert!(BasisSpec::new(0, -1.0, 3).is_err());
    }
}
