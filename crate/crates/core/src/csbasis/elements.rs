use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use super::laguerre::{jacobi_diag, jacobi_offdiag};
use super::{cs_functions, BasisSpec, QuadratureRule};
use crate::error::{FvError, Result};
use crate::linalg::ComplexMatrix;

/// Agreement required between quadrature at order `q` and `2q`.
pub const QUADRATURE_CHECK_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum OperatorKind {
    Overlap,
    InverseR,
    Kinetic,
    Power(u32),
    ScreenedCoulomb,
    Quadrature,
}

/// Operators with closed-form band matrix elements.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BandOperator {
    Overlap,
    InverseR,
    /// `(1/2m)(-d^2/dr^2 + l(l+1)/r^2)`.
    Kinetic {
        mass: f64,
    },
    /// `r^p`, `p >= 1`.
    Power(u32),
}

impl BandOperator {
    pub fn half_bandwidth(&self) -> usize {
        match self {
            BandOperator::InverseR => 0,
            BandOperator::Overlap | BandOperator::Kinetic { .. } => 1,
            BandOperator::Power(p) => *p as usize + 1,
        }
    }

    fn kind(&self) -> OperatorKind {
        match self {
            BandOperator::Overlap => OperatorKind::Overlap,
            BandOperator::InverseR => OperatorKind::InverseR,
            BandOperator::Kinetic { .. } => OperatorKind::Kinetic,
            BandOperator::Power(p) => OperatorKind::Power(*p),
        }
    }
}

/// `(X^k)_{nm}` for the Jacobi matrix of the orthonormal Laguerre polynomials.
fn x_power_entry(alpha: f64, k: u32, n: usize, m: usize) -> f64 {
    let k = k as usize;
    if n.abs_diff(m) > k {
        return 0.0;
    }
    if k == 0 {
        return 1.0;
    }
    let base = m.saturating_sub(k);
    let len = m + k + 1 - base;
    let mut v = vec![0.0; len];
    v[m - base] = 1.0;
    let mut w = vec![0.0; len];
    for _ in 0..k {
        for (i, wi) in w.iter_mut().enumerate() {
            let j = base + i;
            let mut s = jacobi_diag(alpha, j) * v[i];
            if i > 0 {
                s += jacobi_offdiag(alpha, j - 1) * v[i - 1];
            }
            if i + 1 < len {
                s += jacobi_offdiag(alpha, j) * v[i + 1];
            }
            *wi = s;
        }
        std::mem::swap(&mut v, &mut w);
    }
    v[n - base]
}

/// Closed-form `<n|op|m>` in the `l` block with (possibly complex) scale `b`.
pub fn band_entry(op: BandOperator, l: u32, b: Complex64, n: usize, m: usize) -> Complex64 {
    let alpha = 2.0 * l as f64 + 1.0;
    let zero = Complex64::new(0.0, 0.0);
    if n.abs_diff(m) > op.half_bandwidth() {
        return zero;
    }
    match op {
        BandOperator::InverseR => Complex64::new(if n == m { 1.0 } else { 0.0 }, 0.0),
        BandOperator::Overlap => x_power_entry(alpha, 1, n, m) / (2.0 * b),
        BandOperator::Kinetic { mass } => {
            let s = x_power_entry(alpha, 1, n, m) / (2.0 * b);
            let diag = if n == m {
                2.0 * b * (n as f64 + l as f64 + 1.0)
            } else {
                zero
            };
            (diag - b * b * s) / (2.0 * mass)
        }
        BandOperator::Power(p) => x_power_entry(alpha, p + 1, n, m) / (2.0 * b).powu(p + 1),
    }
}

/// Closed-form `<n, l | r^p | m, l+1>` for `p >= 0`.
///
/// Uses `L_n^(a) = L_n^(a+2) - 2 L_{n-1}^(a+2) + L_{n-2}^(a+2)`; nonzero only
/// for `n - 2 - p <= m <= n + p`.
pub fn cross_band_entry(p: u32, l: u32, b: Complex64, n: usize, m: usize) -> Complex64 {
    let alpha = 2.0 * l as f64 + 1.0;
    let nf = n as f64;
    let terms = [
        (0usize, 1.0, (nf + alpha + 2.0) * (nf + alpha + 1.0)),
        (1, -2.0, nf * (nf + alpha + 1.0)),
        (2, 1.0, nf * (nf - 1.0)),
    ];
    let mut sum = 0.0;
    for (k, c, ratio) in terms {
        if k > n {
            break;
        }
        sum += c * ratio.sqrt() * x_power_entry(alpha + 2.0, p, n - k, m);
    }
    sum / (2.0 * b).powu(p + 1)
}

/// A matrix in the Sturmian basis together with what it represents.
#[derive(Clone, Debug)]
pub struct RadialMatrix {
    pub matrix: ComplexMatrix,
    pub kind: OperatorKind,
    pub bra: BasisSpec,
    pub ket: BasisSpec,
    /// `None` for full matrices.
    pub half_bandwidth: Option<usize>,
}

impl RadialMatrix {
    pub fn entry(&self, n: usize, m: usize) -> Complex64 {
        self.matrix[(n, m)]
    }
}

fn band_matrix(spec: &BasisSpec, op: BandOperator) -> RadialMatrix {
    let b = spec.complex_scale();
    let size = spec.size();
    let w = op.half_bandwidth();
    let matrix = ComplexMatrix::from_fn(size, size, |n, m| {
        if n.abs_diff(m) > w {
            Complex64::new(0.0, 0.0)
        } else {
            band_entry(op, spec.l, b, n, m)
        }
    });
    RadialMatrix {
        matrix,
        kind: op.kind(),
        bra: *spec,
        ket: *spec,
        half_bandwidth: Some(w),
    }
}

pub fn overlap_matrix(spec: &BasisSpec) -> RadialMatrix {
    band_matrix(spec, BandOperator::Overlap)
}

pub fn inverse_r_matrix(spec: &BasisSpec) -> RadialMatrix {
    band_matrix(spec, BandOperator::InverseR)
}

pub fn kinetic_matrix(spec: &BasisSpec, mass: f64) -> Result<RadialMatrix> {
    if !(mass > 0.0) {
        return Err(FvError::Domain(format!(
            "mass must be positive, got {mass}"
        )));
    }
    Ok(band_matrix(spec, BandOperator::Kinetic { mass }))
}

/// `<n|r^power|n'>` for `power` in `1..=4`.
pub fn power_r_matrix(spec: &BasisSpec, power: u32) -> Result<RadialMatrix> {
    if !(1..=4).contains(&power) {
        return Err(FvError::Domain(format!("unsupported power r^{power}")));
    }
    Ok(band_matrix(spec, BandOperator::Power(power)))
}

type Regular = dyn Fn(Complex64) -> Complex64 + Send + Sync;

/// `f(r) = r^power e^{-decay r} g(r)` with `g` regular at the origin.
///
/// `g` takes complex `r` so that matrix elements can be taken along a rotated
/// ray.
#[derive(Clone)]
pub struct RadialFunction {
    pub power: i32,
    pub decay: f64,
    regular: Arc<Regular>,
    /// `false` for functions known only on the real axis (tabulated data).
    pub analytic: bool,
    /// Order-doubling agreement demanded of its matrix elements.
    pub check_tol: f64,
}

impl RadialFunction {
    pub fn new(
        power: i32,
        decay: f64,
        regular: impl Fn(Complex64) -> Complex64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            power,
            decay,
            regular: Arc::new(regular),
            analytic: true,
            check_tol: QUADRATURE_CHECK_TOL,
        }
    }

    /// `coefficient * r^power`.
    pub fn monomial(coefficient: f64, power: i32) -> Self {
        Self::new(power, 0.0, move |_| Complex64::new(coefficient, 0.0))
    }

    pub fn zero() -> Self {
        Self::monomial(0.0, 0)
    }

    /// Real-axis-only function (no complex continuation).
    pub fn real_only(
        power: i32,
        regular: impl Fn(f64) -> f64 + Send + Sync + 'static,
        check_tol: f64,
    ) -> Self {
        Self {
            power,
            decay: 0.0,
            regular: Arc::new(move |r: Complex64| Complex64::new(regular(r.re), 0.0)),
            analytic: false,
            check_tol,
        }
    }

    pub fn eval(&self, r: Complex64) -> Complex64 {
        r.powi(self.power) * (-self.decay * r).exp() * (self.regular)(r)
    }

    pub fn eval_real(&self, r: f64) -> f64 {
        self.eval(Complex64::new(r, 0.0)).re
    }
}

impl fmt::Debug for RadialFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RadialFunction")
            .field("power", &self.power)
            .field("decay", &self.decay)
            .field("analytic", &self.analytic)
            .finish()
    }
}

/// Default rule order for a pair of blocks.
fn default_order(bra: &BasisSpec, ket: &BasisSpec) -> usize {
    3 * (bra.n_max.max(ket.n_max) + 20)
}

fn quadrature_once(
    bra: &BasisSpec,
    ket: &BasisSpec,
    f: &RadialFunction,
    order: usize,
) -> Result<ComplexMatrix> {
    let alpha = (bra.l + ket.l) as i32 + 2 + f.power;
    if alpha <= -1 {
        return Err(FvError::Domain(format!(
            "integrand behaves like r^{alpha} at the origin (l = {}, {}; f ~ r^{})",
            bra.l, ket.l, f.power
        )));
    }
    let theta = bra.theta;
    let beta = bra.b + ket.b + f.decay * theta.cos();
    let rule = QuadratureRule::new(order, alpha as f64, beta)?;
    let ray = Complex64::from_polar(1.0, theta);
    let mut out = ComplexMatrix::zeros(bra.size(), ket.size());
    let unrotated_bra = BasisSpec { theta: 0.0, ..*bra };
    let unrotated_ket = BasisSpec { theta: 0.0, ..*ket };
    for (rho, v) in rule.plain_pairs() {
        let u = cs_functions(bra.n_max, &unrotated_bra, rho)?;
        let w = if bra.l == ket.l && bra.b == ket.b && bra.n_max == ket.n_max {
            u.clone()
        } else {
            cs_functions(ket.n_max, &unrotated_ket, rho)?
        };
        if u.iter().all(|x| *x == 0.0) || w.iter().all(|x| *x == 0.0) {
            continue;
        }
        let fr = f.eval(rho * ray) * ray * v;
        if fr.re.is_nan() || fr.im.is_nan() {
            return Err(FvError::Domain(format!(
                "radial function is NaN at r = {rho}"
            )));
        }
        for (n, &un) in u.iter().enumerate() {
            if un == 0.0 {
                continue;
            }
            let row = fr * un;
            for (m, &wm) in w.iter().enumerate() {
                out[(n, m)] += row * wm;
            }
        }
    }
    Ok(out)
}

/// `<n, bra| f |m, ket>` by quadrature at `order` and `2 order`; errors when
/// the two disagree beyond the function's tolerance.
pub fn quadrature_matrix(
    bra: &BasisSpec,
    ket: &BasisSpec,
    f: &RadialFunction,
    order: usize,
) -> Result<RadialMatrix> {
    if bra.theta != ket.theta {
        return Err(FvError::Assembly(
            "bra and ket rotated by different angles".into(),
        ));
    }
    if bra.theta != 0.0 && !f.analytic {
        return Err(FvError::Domain(
            "tabulated functions cannot be continued to a rotated contour".into(),
        ));
    }
    let coarse = quadrature_once(bra, ket, f, order)?;
    let fine = quadrature_once(bra, ket, f, 2 * order)?;
    let scale = fine.max_norm();
    let diff = fine.sub(&coarse)?.max_norm();
    if scale > 0.0 && diff > f.check_tol * scale {
        return Err(FvError::Accuracy(format!(
            "orders {order} and {} differ by {:.3e} (relative)",
            2 * order,
            diff / scale
        )));
    }
    Ok(RadialMatrix {
        matrix: fine,
        kind: OperatorKind::Quadrature,
        bra: *bra,
        ket: *ket,
        half_bandwidth: None,
    })
}

/// `<n|e^{-a r}/r|n'>`.
pub fn screened_coulomb_matrix(spec: &BasisSpec, a: f64) -> Result<RadialMatrix> {
    if !(a > 0.0) {
        return Err(FvError::Domain(format!(
            "screening length inverse must be positive, got {a}"
        )));
    }
    let f = RadialFunction::new(-1, a, |_| Complex64::new(1.0, 0.0));
    let mut m = quadrature_matrix(spec, spec, &f, default_order(spec, spec))?;
    m.kind = OperatorKind::ScreenedCoulomb;
    Ok(m)
}

/// `<n, bra| f |n', ket>` between (possibly different) orbital blocks.
pub fn cross_l_matrix(
    bra: &BasisSpec,
    ket: &BasisSpec,
    f: &RadialFunction,
) -> Result<RadialMatrix> {
    quadrature_matrix(bra, ket, f, default_order(bra, ket))
}
