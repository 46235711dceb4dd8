//! Radial potential models.
//!
//! A model holds the vector potential `V`, the scalar potential `S` and,
//! optionally, terms that enter the effective scalar `U` directly. The
//! Hamiltonian sees `U = S + S^2/2mc^2` plus the direct terms.
//!
//! [`split`] separates each potential into a long-range part, a finite sum
//! of powers `r^p` with `-1 <= p <= 4` that is band-structured in the
//! Sturmian basis, and a short-range remainder that is integrated
//! numerically.

use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_complex::Complex64;

use crate::csbasis::{quadrature_matrix, BasisSpec, RadialFunction};
use crate::error::{FvError, Result};
use crate::linalg::ComplexMatrix;

/// Mass and speed of light, in units with `hbar = 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhysicalSystem {
    pub mass: f64,
    pub c: f64,
}

impl Default for PhysicalSystem {
    fn default() -> Self {
        Self {
            mass: 1.0,
            c: 137.036,
        }
    }
}

impl PhysicalSystem {
    pub fn new(mass: f64, c: f64) -> Result<Self> {
        if !(mass > 0.0) || !(c > 0.0) || !mass.is_finite() || !c.is_finite() {
            return Err(FvError::Domain(format!(
                "mass and c must be positive (got {mass}, {c})"
            )));
        }
        Ok(Self { mass, c })
    }

    pub fn rest_energy(&self) -> f64 {
        self.mass * self.c * self.c
    }
}

/// Natural cubic spline through tabulated samples.
///
/// Constant below the first sample and zero above the last.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub r: Vec<f64>,
    pub v: Vec<f64>,
    second: Vec<f64>,
    pub source: Option<PathBuf>,
}

impl Table {
    pub fn new(r: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        if r.len() != v.len() || r.len() < 2 {
            return Err(FvError::Domain(
                "a table needs at least two (r, value) samples".into(),
            ));
        }
        if r.iter().chain(&v).any(|x| !x.is_finite()) {
            return Err(FvError::Domain("table contains non-finite values".into()));
        }
        if r.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(FvError::Domain(
                "table radii must be strictly increasing".into(),
            ));
        }
        let second = spline_second_derivatives(&r, &v);
        Ok(Self {
            r,
            v,
            second,
            source: None,
        })
    }

    /// Two whitespace-separated columns `r value`; `#` starts a comment.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let (mut r, mut v) = (Vec::new(), Vec::new());
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split_whitespace().collect();
            let parse = |s: &str| {
                s.parse::<f64>().map_err(|_| {
                    FvError::Domain(format!("{}:{}: bad number '{s}'", path.display(), i + 1))
                })
            };
            if cols.len() != 2 {
                return Err(FvError::Domain(format!(
                    "{}:{}: expected two columns",
                    path.display(),
                    i + 1
                )));
            }
            r.push(parse(cols[0])?);
            v.push(parse(cols[1])?);
        }
        let mut table = Self::new(r, v)?;
        table.source = Some(path.to_path_buf());
        Ok(table)
    }

    fn locate(&self, x: f64) -> usize {
        let k = self.r.partition_point(|&ri| ri <= x);
        k.clamp(1, self.r.len() - 1) - 1
    }

    pub fn value(&self, x: f64) -> f64 {
        let n = self.r.len();
        if x <= self.r[0] {
            return self.v[0];
        }
        if x > self.r[n - 1] {
            return 0.0;
        }
        let k = self.locate(x);
        let h = self.r[k + 1] - self.r[k];
        let a = (self.r[k + 1] - x) / h;
        let b = 1.0 - a;
        a * self.v[k]
            + b * self.v[k + 1]
            + ((a * a * a - a) * self.second[k] + (b * b * b - b) * self.second[k + 1]) * h * h
                / 6.0
    }

    pub fn derivative(&self, x: f64) -> f64 {
        let n = self.r.len();
        if x <= self.r[0] || x > self.r[n - 1] {
            return 0.0;
        }
        let k = self.locate(x);
        let h = self.r[k + 1] - self.r[k];
        let a = (self.r[k + 1] - x) / h;
        let b = 1.0 - a;
        (self.v[k + 1] - self.v[k]) / h
            + (-(3.0 * a * a - 1.0) * self.second[k] + (3.0 * b * b - 1.0) * self.second[k + 1]) * h
                / 6.0
    }
}

fn spline_second_derivatives(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut m = vec![0.0; n];
    if n < 3 {
        return m;
    }
    // Thomas algorithm on the interior equations.
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    for i in 1..n - 1 {
        let h0 = x[i] - x[i - 1];
        let h1 = x[i + 1] - x[i];
        let rhs = 6.0 * ((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0);
        let diag = 2.0 * (h0 + h1) - h0 * c[i - 1];
        c[i] = h1 / diag;
        d[i] = (rhs - h0 * d[i - 1]) / diag;
    }
    for i in (1..n - 1).rev() {
        m[i] = d[i] - c[i] * m[i + 1];
    }
    m
}

/// One radial term.
#[derive(Clone, Debug, PartialEq)]
pub enum PotentialTerm {
    /// `z / r`
    Coulomb {
        z: f64,
    },
    /// `strength e^{-a r} / r`
    Screened {
        strength: f64,
        a: f64,
    },
    /// `a1 r`
    Linear {
        a1: f64,
    },
    /// `a2 r^2`
    Quadratic {
        a2: f64,
    },
    Tabulated(Arc<Table>),
}

impl PotentialTerm {
    pub fn screened(strength: f64, a: f64) -> Result<Self> {
        if !(a > 0.0) || !a.is_finite() {
            return Err(FvError::Domain(format!(
                "screened term needs a positive inverse length, got {a}"
            )));
        }
        Ok(Self::Screened { strength, a })
    }

    pub fn value(&self, r: f64) -> f64 {
        match self {
            PotentialTerm::Tabulated(t) => t.value(r),
            _ => self.value_complex(Complex64::new(r, 0.0)).re,
        }
    }

    /// Analytic continuation; tabulated terms evaluate at `Re r`.
    pub fn value_complex(&self, r: Complex64) -> Complex64 {
        match self {
            PotentialTerm::Coulomb { z } => *z / r,
            PotentialTerm::Screened { strength, a } => *strength * (-*a * r).exp() / r,
            PotentialTerm::Linear { a1 } => *a1 * r,
            PotentialTerm::Quadratic { a2 } => *a2 * r * r,
            PotentialTerm::Tabulated(t) => Complex64::new(t.value(r.re), 0.0),
        }
    }

    pub fn derivative(&self, r: f64) -> f64 {
        match self {
            PotentialTerm::Coulomb { z } => -z / (r * r),
            PotentialTerm::Screened { strength, a } => {
                -strength * (-a * r).exp() * (1.0 + a * r) / (r * r)
            }
            PotentialTerm::Linear { a1 } => *a1,
            PotentialTerm::Quadratic { a2 } => 2.0 * a2 * r,
            PotentialTerm::Tabulated(t) => t.derivative(r),
        }
    }

    pub fn is_analytic(&self) -> bool {
        !matches!(self, PotentialTerm::Tabulated(_))
    }
}

impl fmt::Display for PotentialTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PotentialTerm::Coulomb { z } => write!(f, "coulomb {z}"),
            PotentialTerm::Screened { strength, a } => write!(f, "screened {strength} {a}"),
            PotentialTerm::Linear { a1 } => write!(f, "linear {a1}"),
            PotentialTerm::Quadratic { a2 } => write!(f, "quadratic {a2}"),
            PotentialTerm::Tabulated(t) => match &t.source {
                Some(p) => write!(f, "table {}", p.display()),
                None => write!(f, "table <inline>"),
            },
        }
    }
}

/// Parses a comma-separated term list such as
/// `coulomb 92, screened -240 1, screened 320 4`.
///
/// Relative table paths are resolved against `base_dir`.
pub fn parse_terms(text: &str, base_dir: Option<&Path>) -> Result<Vec<PotentialTerm>> {
    let mut terms = Vec::new();
    for item in text.split(',') {
        let item = item.trim();
        if item.is_empty() || item == "none" {
            continue;
        }
        let words: Vec<&str> = item.split_whitespace().collect();
        let num = |i: usize| -> Result<f64> {
            let w = words
                .get(i)
                .ok_or_else(|| FvError::Domain(format!("term '{item}' is missing a parameter")))?;
            let x: f64 = w
                .parse()
                .map_err(|_| FvError::Domain(format!("bad number '{w}' in term '{item}'")))?;
            if !x.is_finite() {
                return Err(FvError::Domain(format!("non-finite parameter in '{item}'")));
            }
            Ok(x)
        };
        let arity = |n: usize| -> Result<()> {
            if words.len() != n + 1 {
                return Err(FvError::Domain(format!(
                    "term '{item}' takes {n} parameter(s)"
                )));
            }
            Ok(())
        };
        let term = match words[0] {
            "coulomb" => {
                arity(1)?;
                PotentialTerm::Coulomb { z: num(1)? }
            }
            "screened" => {
                arity(2)?;
                PotentialTerm::screened(num(1)?, num(2)?)?
            }
            "linear" => {
                arity(1)?;
                PotentialTerm::Linear { a1: num(1)? }
            }
            "quadratic" => {
                arity(1)?;
                PotentialTerm::Quadratic { a2: num(1)? }
            }
            "table" => {
                let rest = item["table".len()..].trim();
                if rest.is_empty() {
                    return Err(FvError::Domain("table term needs a path".into()));
                }
                let mut path = PathBuf::from(rest);
                if path.is_relative() {
                    if let Some(dir) = base_dir {
                        path = dir.join(path);
                    }
                }
                PotentialTerm::Tabulated(Arc::new(Table::from_file(&path)?))
            }
            other => {
                return Err(FvError::Domain(format!("unknown potential term '{other}'")));
            }
        };
        terms.push(term);
    }
    Ok(terms)
}

pub fn format_terms(terms: &[PotentialTerm]) -> String {
    terms
        .iter()
        .map(|t| t.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

/// Which potential to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Part {
    /// `V`
    Vector,
    /// `S`
    Scalar,
    /// `U = S + S^2/2mc^2` plus the directly given terms.
    Effective,
}

/// `V(r)` and `S(r)` as sums of terms, plus terms added to `U` as given.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PotentialModel {
    pub vector: Vec<PotentialTerm>,
    pub scalar: Vec<PotentialTerm>,
    /// Contributions to `U` that bypass the `S^2/2mc^2` correction.
    pub direct: Vec<PotentialTerm>,
}

/// Sums Coulomb, linear and quadratic terms; screened terms with equal
/// range are combined.
fn merge(terms: Vec<PotentialTerm>) -> Vec<PotentialTerm> {
    let mut out: Vec<PotentialTerm> = Vec::new();
    for t in terms {
        let slot = out.iter_mut().find(|o| match (&**o, &t) {
            (PotentialTerm::Coulomb { .. }, PotentialTerm::Coulomb { .. })
            | (PotentialTerm::Linear { .. }, PotentialTerm::Linear { .. })
            | (PotentialTerm::Quadratic { .. }, PotentialTerm::Quadratic { .. }) => true,
            (PotentialTerm::Screened { a: a0, .. }, PotentialTerm::Screened { a: a1, .. }) => {
                a0 == a1
            }
            _ => false,
        });
        match (slot, t) {
            (Some(PotentialTerm::Coulomb { z }), PotentialTerm::Coulomb { z: z1 }) => *z += z1,
            (Some(PotentialTerm::Linear { a1 }), PotentialTerm::Linear { a1: b1 }) => *a1 += b1,
            (Some(PotentialTerm::Quadratic { a2 }), PotentialTerm::Quadratic { a2: b2 }) => {
                *a2 += b2
            }
            (
                Some(PotentialTerm::Screened { strength, .. }),
                PotentialTerm::Screened { strength: s1, .. },
            ) => *strength += s1,
            (_, t) => out.push(t),
        }
    }
    out
}

fn sum_terms(terms: &[PotentialTerm], r: Complex64) -> Complex64 {
    terms.iter().map(|t| t.value_complex(r)).sum()
}

impl PotentialModel {
    pub fn new(
        vector: Vec<PotentialTerm>,
        scalar: Vec<PotentialTerm>,
        direct: Vec<PotentialTerm>,
    ) -> Self {
        Self {
            vector: merge(vector),
            scalar: merge(scalar),
            direct: merge(direct),
        }
    }

    pub fn vector_only(vector: Vec<PotentialTerm>) -> Self {
        Self::new(vector, Vec::new(), Vec::new())
    }

    pub fn is_empty(&self) -> bool {
        self.vector.is_empty() && self.scalar.is_empty() && self.direct.is_empty()
    }

    pub fn is_analytic(&self) -> bool {
        self.vector
            .iter()
            .chain(&self.scalar)
            .chain(&self.direct)
            .all(|t| t.is_analytic())
    }

    /// `V`, `S` or `U` continued to complex `r` (analytic terms only).
    pub fn value_complex(&self, part: Part, r: Complex64, system: &PhysicalSystem) -> Complex64 {
        match part {
            Part::Vector => sum_terms(&self.vector, r),
            Part::Scalar => sum_terms(&self.scalar, r),
            Part::Effective => {
                let s = sum_terms(&self.scalar, r);
                s + s * s / (2.0 * system.rest_energy()) + sum_terms(&self.direct, r)
            }
        }
    }
}

/// `U = S + S^2/(2 m c^2)`.
pub fn effective_scalar(s: f64, mass: f64, c: f64) -> f64 {
    s + s * s / (2.0 * mass * c * c)
}

fn check_radius(r: f64) -> Result<()> {
    if !(r > 0.0) {
        return Err(FvError::Domain(format!("radius must be positive, got {r}")));
    }
    Ok(())
}

pub fn evaluate(
    model: &PotentialModel,
    part: Part,
    r: f64,
    system: &PhysicalSystem,
) -> Result<f64> {
    check_radius(r)?;
    let real = |terms: &[PotentialTerm]| terms.iter().map(|t| t.value(r)).sum::<f64>();
    Ok(match part {
        Part::Vector => real(&model.vector),
        Part::Scalar => real(&model.scalar),
        Part::Effective => {
            effective_scalar(real(&model.scalar), system.mass, system.c) + real(&model.direct)
        }
    })
}

/// `dV/dr`.
pub fn vector_derivative(model: &PotentialModel, r: f64) -> Result<f64> {
    check_radius(r)?;
    Ok(model.vector.iter().map(|t| t.derivative(r)).sum())
}

/// `sum_p c_p r^p` for `p` in `-1..=4`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PowerSeries {
    coef: [f64; 6],
}

impl PowerSeries {
    pub const MIN_POWER: i32 = -1;
    pub const MAX_POWER: i32 = 4;

    pub fn coefficient(&self, p: i32) -> f64 {
        if (Self::MIN_POWER..=Self::MAX_POWER).contains(&p) {
            self.coef[(p + 1) as usize]
        } else {
            0.0
        }
    }

    fn add(&mut self, p: i32, c: f64) {
        self.coef[(p + 1) as usize] += c;
    }

    /// Nonzero `(power, coefficient)` pairs.
    pub fn terms(&self) -> impl Iterator<Item = (i32, f64)> + '_ {
        self.coef
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0.0)
            .map(|(i, c)| (i as i32 - 1, *c))
    }

    /// Highest power present, if any.
    pub fn degree(&self) -> Option<i32> {
        self.terms().map(|(p, _)| p).max()
    }

    pub fn eval(&self, r: Complex64) -> Complex64 {
        self.terms().map(|(p, c)| c * r.powi(p)).sum()
    }

    fn product(&self, other: &PowerSeries) -> (PowerSeries, f64) {
        // Returns the product truncated to -1..=4 and the r^{-2} coefficient.
        let mut out = PowerSeries::default();
        let mut inverse_square = 0.0;
        for (p, a) in self.terms() {
            for (q, b) in other.terms() {
                let k = p + q;
                if k == -2 {
                    inverse_square += a * b;
                } else {
                    out.add(k, a * b);
                }
            }
        }
        (out, inverse_square)
    }
}

/// Polynomial (Coulomb, linear, quadratic) part of a term list.
fn polynomial_part(terms: &[PotentialTerm]) -> PowerSeries {
    let mut s = PowerSeries::default();
    for t in terms {
        match t {
            PotentialTerm::Coulomb { z } => s.add(-1, *z),
            PotentialTerm::Linear { a1 } => s.add(1, *a1),
            PotentialTerm::Quadratic { a2 } => s.add(2, *a2),
            _ => {}
        }
    }
    s
}

fn remainder_terms(terms: &[PotentialTerm]) -> Vec<PotentialTerm> {
    terms
        .iter()
        .filter(|t| {
            matches!(
                t,
                PotentialTerm::Screened { .. } | PotentialTerm::Tabulated(_)
            )
        })
        .cloned()
        .collect()
}

/// Looser order-doubling tolerance for tabulated (non-smooth) integrands.
pub const TABULATED_CHECK_TOL: f64 = 1e-4;

/// A short-range function as a sum of pieces with known origin behaviour.
#[derive(Clone, Debug, Default)]
pub struct ShortRange {
    pub pieces: Vec<RadialFunction>,
}

impl ShortRange {
    pub fn is_zero(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn is_analytic(&self) -> bool {
        self.pieces.iter().all(|p| p.analytic)
    }

    pub fn eval(&self, r: f64) -> f64 {
        self.pieces.iter().map(|p| p.eval_real(r)).sum()
    }

    pub fn eval_complex(&self, r: Complex64) -> Complex64 {
        self.pieces.iter().map(|p| p.eval(r)).sum()
    }

    /// `<bra| f |ket>` summed over pieces.
    pub fn matrix(&self, bra: &BasisSpec, ket: &BasisSpec, order: usize) -> Result<ComplexMatrix> {
        let mut out = ComplexMatrix::zeros(bra.size(), ket.size());
        for piece in &self.pieces {
            let m = quadrature_matrix(bra, ket, piece, order)?;
            out = out.add(&m.matrix)?;
        }
        Ok(out)
    }
}

fn screened_piece(
    strength: f64,
    a: f64,
    power: i32,
    regular: fn(f64, Complex64) -> Complex64,
) -> RadialFunction {
    RadialFunction::new(power, a, move |r| strength * regular(a, r))
}

/// Long-range parts, exactly band-structured in the basis.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LongRange {
    /// `V_LR`
    pub vector: PowerSeries,
    /// `U_LR`
    pub scalar: PowerSeries,
    /// Polynomial part of `dV/dr` (from confining vector terms).
    pub coupling: PowerSeries,
}

/// A model separated into band-structured and short-range parts.
#[derive(Clone, Debug)]
pub struct SplitModel {
    pub long_range: LongRange,
    /// `V_s`
    pub vector: ShortRange,
    /// `U_s`
    pub scalar: ShortRange,
    /// Short-range part of `dV/dr`.
    pub coupling: ShortRange,
    pub system: PhysicalSystem,
}

impl SplitModel {
    /// `V_LR + V_s` at (possibly complex) `r`.
    pub fn vector_value(&self, r: Complex64) -> Complex64 {
        self.long_range.vector.eval(r) + self.vector.eval_complex(r)
    }

    pub fn scalar_value(&self, r: Complex64) -> Complex64 {
        self.long_range.scalar.eval(r) + self.scalar.eval_complex(r)
    }

    pub fn coupling_value(&self, r: Complex64) -> Complex64 {
        self.long_range.coupling.eval(r) + self.coupling.eval_complex(r)
    }

    pub fn is_analytic(&self) -> bool {
        self.vector.is_analytic() && self.scalar.is_analytic() && self.coupling.is_analytic()
    }
}

/// Separates `V`, `U` and `dV/dr` into long-range and short-range parts.
pub fn split(model: &PotentialModel, system: &PhysicalSystem) -> SplitModel {
    let two_mc2 = 2.0 * system.rest_energy();

    // Vector potential.
    let v_poly = polynomial_part(&model.vector);
    let mut vector = ShortRange::default();
    let mut coupling = ShortRange::default();
    let mut coupling_lr = PowerSeries::default();
    if v_poly.coefficient(-1) != 0.0 {
        coupling
            .pieces
            .push(RadialFunction::monomial(-v_poly.coefficient(-1), -2));
    }
    coupling_lr.add(0, v_poly.coefficient(1));
    coupling_lr.add(1, 2.0 * v_poly.coefficient(2));
    for t in remainder_terms(&model.vector) {
        match t {
            PotentialTerm::Screened { strength, a } => {
                vector.pieces.push(screened_piece(strength, a, -1, |_, _| {
                    Complex64::new(1.0, 0.0)
                }));
                coupling
                    .pieces
                    .push(screened_piece(strength, a, -2, |a, r| -(1.0 + a * r)));
            }
            PotentialTerm::Tabulated(table) => {
                let tv = table.clone();
                vector.pieces.push(RadialFunction::real_only(
                    0,
                    move |r| tv.value(r),
                    TABULATED_CHECK_TOL,
                ));
                coupling.pieces.push(RadialFunction::real_only(
                    0,
                    move |r| table.derivative(r),
                    TABULATED_CHECK_TOL,
                ));
            }
            _ => unreachable!("remainder terms are screened or tabulated"),
        }
    }

    // Effective scalar: S = S_poly + S_x, U = S + S^2/2mc^2 + direct.
    let s_poly = polynomial_part(&model.scalar);
    let (s_sq, inverse_square) = s_poly.product(&s_poly);
    let mut u_lr = s_poly;
    for (p, c) in s_sq.terms() {
        u_lr.add(p, c / two_mc2);
    }
    let d_poly = polynomial_part(&model.direct);
    for (p, c) in d_poly.terms() {
        u_lr.add(p, c);
    }
    let mut scalar = ShortRange::default();
    if inverse_square != 0.0 {
        scalar
            .pieces
            .push(RadialFunction::monomial(inverse_square / two_mc2, -2));
    }
    let s_rest = remainder_terms(&model.scalar);
    if !s_rest.is_empty() {
        // S_x + (2 S_poly S_x + S_x^2) / 2mc^2, written as r^{-2} g(r).
        let analytic = s_rest.iter().all(|t| t.is_analytic());
        let rest = s_rest.clone();
        let g = move |r: Complex64| {
            let sx = sum_terms(&rest, r);
            let sp = s_poly.eval(r);
            r * r * (sx + (2.0 * sp * sx + sx * sx) / two_mc2)
        };
        if analytic {
            scalar.pieces.push(RadialFunction::new(-2, 0.0, g));
        } else {
            scalar.pieces.push(RadialFunction::real_only(
                -2,
                move |r| g(Complex64::new(r, 0.0)).re,
                TABULATED_CHECK_TOL,
            ));
        }
    }
    for t in remainder_terms(&model.direct) {
        match t {
            PotentialTerm::Screened { strength, a } => {
                scalar.pieces.push(screened_piece(strength, a, -1, |_, _| {
                    Complex64::new(1.0, 0.0)
                }))
            }
            PotentialTerm::Tabulated(table) => scalar.pieces.push(RadialFunction::real_only(
                0,
                move |r| table.value(r),
                TABULATED_CHECK_TOL,
            )),
            _ => unreachable!("remainder terms are screened or tabulated"),
        }
    }

    SplitModel {
        long_range: LongRange {
            vector: v_poly,
            scalar: u_lr,
            coupling: coupling_lr,
        },
        vector,
        scalar,
        coupling,
        system: *system,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const C: f64 = 137.036;

    fn table1_model() -> PotentialModel {
        PotentialModel::vector_only(
            parse_terms("coulomb 92, screened -240 1, screened 320 4", None).unwrap(),
        )
    }

    #[test]
    fn effective_scalar_values() {
        assert_eq!(effective_scalar(0.0, 1.0, C), 0.0);
        assert!((effective_scalar(1.0, 1.0, C) - 1.000_026_63).abs() < 1e-8);
        assert!((effective_scalar(4.0, 1.0, C) - 4.000_426_01).abs() < 1e-8);
    }

    #[test]
    fn evaluate_examples() {
        let sys = PhysicalSystem::default();
        let m = table1_model();
        let v = evaluate(&m, Part::Vector, 1.0, &sys).unwrap();
        let expect = 92.0 - 240.0 * (-1.0f64).exp() + 320.0 * (-4.0f64).exp();
        assert!((v - expect).abs() < 1e-12);
        assert!((v - 9.569_938_6).abs() < 1e-6);
        let empty = PotentialModel::default();
        assert_eq!(evaluate(&empty, Part::Vector, 1.0, &sys).unwrap(), 0.0);
        let h = PotentialModel::vector_only(vec![PotentialTerm::Coulomb { z: -1.0 }]);
        assert_eq!(evaluate(&h, Part::Vector, 2.0, &sys).unwrap(), -0.5);
        assert!(evaluate(&h, Part::Vector, 0.0, &sys).is_err());
    }

    #[test]
    fn derivative_examples() {
        let h = PotentialModel::vector_only(vec![PotentialTerm::Coulomb { z: -1.0 }]);
        assert_eq!(vector_derivative(&h, 2.0).unwrap(), 0.25);
        let d = vector_derivative(&table1_model(), 1.0).unwrap();
        let e1 = (-1.0f64).exp();
        let e4 = (-4.0f64).exp();
        assert!((d - (-92.0 + 480.0 * e1 - 1600.0 * e4)).abs() < 1e-12);
        assert!((d - 55.277_11).abs() < 1e-5);
    }

    #[test]
    fn merge_combines_duplicates() {
        let m = PotentialModel::vector_only(
            parse_terms(
                "coulomb 1, coulomb 2, screened 1 2, screened 3 2, linear 1",
                None,
            )
            .unwrap(),
        );
        assert_eq!(m.vector.len(), 3);
        assert_eq!(m.vector[0], PotentialTerm::Coulomb { z: 3.0 });
        assert_eq!(
            m.vector[1],
            PotentialTerm::Screened {
                strength: 4.0,
                a: 2.0
            }
        );
    }

    #[test]
    fn parse_errors() {
        assert!(parse_terms("coulomb", None).is_err());
        assert!(parse_terms("coulomb 1 2", None).is_err());
        assert!(parse_terms("screened 1 0", None).is_err());
        assert!(parse_terms("yukawa 1", None).is_err());
        assert!(parse_terms("linear x", None).is_err());
        assert!(parse_terms("", None).unwrap().is_empty());
    }

    #[test]
    fn split_examples() {
        let sys = PhysicalSystem::default();
        let h = split(
            &PotentialModel::vector_only(vec![PotentialTerm::Coulomb { z: -1.0 }]),
            &sys,
        );
        assert!(h.vector.is_zero());
        assert_eq!(h.long_range.vector.coefficient(-1), -1.0);
        assert!((h.coupling.eval(2.0) - 0.25).abs() < 1e-15);

        let t = split(&table1_model(), &sys);
        assert_eq!(t.long_range.vector.coefficient(-1), 92.0);
        let expect = -240.0 * (-1.0f64).exp() + 320.0 * (-4.0f64).exp();
        assert!((t.vector.eval(1.0) - expect).abs() < 1e-12);
        assert!((t.vector.eval(1.0) - (-82.430_061_4)).abs() < 1e-6);

        let s = split(
            &PotentialModel::new(
                Vec::new(),
                vec![PotentialTerm::Linear { a1: 1.0 }],
                Vec::new(),
            ),
            &sys,
        );
        assert_eq!(s.long_range.scalar.coefficient(1), 1.0);
        assert!((s.long_range.scalar.coefficient(2) - 2.6626e-5).abs() < 1e-9);
        assert!(s.scalar.is_zero());
    }

    #[test]
    fn spline_reproduces_cubic_interior() {
        let r: Vec<f64> = (0..=40).map(|i| 0.1 + 0.1 * i as f64).collect();
        let v: Vec<f64> = r.iter().map(|x| (-x).exp()).collect();
        let t = Table::new(r, v).unwrap();
        for &x in &[0.55, 1.23, 2.9] {
            assert!((t.value(x) - (-x).exp()).abs() < 1e-5);
            assert!((t.derivative(x) + (-x).exp()).abs() < 1e-3);
        }
        assert_eq!(t.value(0.0), t.v[0]);
        assert_eq!(t.value(10.0), 0.0);
        assert!(Table::new(vec![1.0, 1.0], vec![0.0, 0.0]).is_err());
    }
}
