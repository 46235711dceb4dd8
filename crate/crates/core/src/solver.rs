//! Bound-state scans, resonance refinement, convergence scans and a dense
//! diagonalization oracle.

use std::sync::Mutex;

use log::{debug, warn};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::csbasis::BasisSpec;
use crate::error::{FvError, Result};
use crate::fvcore::{ChannelSpace, FvProblem, Kind, Numerics};
use crate::linalg::{
    find_complex_root_with_step, find_real_root, ComplexMatrix, LogDet, RootBracket,
};
use crate::potentials::{split, PhysicalSystem, PotentialModel};

/// Rotation angle used by [`find_resonance`] when the problem's basis is not
/// already complex-scaled.
pub const DEFAULT_ROTATION: f64 = 0.1;

/// Roots closer to the real axis than this are bound states.
pub const REAL_AXIS_TOL: f64 = 1e-14;

/// Safety factor on the angle dependence of a complex root when deciding
/// whether its width is resolved.
const ANGLE_SPREAD_FACTOR: f64 = 10.0;

/// Largest dense dimension accepted by [`oracle_diagonalize`].
pub const ORACLE_MAX_DIM: usize = 2000;

/// An even-order touch is accepted when `|f|` at the minimum is this small
/// relative to the neighbouring grid values.
const TOUCH_RATIO: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SearchWindow {
    pub e_min: f64,
    pub e_max: f64,
    pub grid_points: usize,
    pub refine_tol: f64,
}

impl SearchWindow {
    pub fn new(e_min: f64, e_max: f64, grid_points: usize, refine_tol: f64) -> Result<Self> {
        if !(e_min < e_max) || !e_min.is_finite() || !e_max.is_finite() {
            return Err(FvError::Domain(format!(
                "empty search window [{e_min}, {e_max}]"
            )));
        }
        if grid_points < 8 {
            return Err(FvError::Domain(format!(
                "search grid needs at least 8 points, got {grid_points}"
            )));
        }
        if !(refine_tol > 0.0) {
            return Err(FvError::Domain("refine_tol must be positive".into()));
        }
        Ok(Self {
            e_min,
            e_max,
            grid_points,
            refine_tol,
        })
    }

    /// Grid with roughly `spacing` between points (at least 8 points).
    pub fn with_spacing(e_min: f64, e_max: f64, spacing: f64, refine_tol: f64) -> Result<Self> {
        let n = ((e_max - e_min) / spacing).ceil().max(7.0) as usize + 1;
        Self::new(e_min, e_max, n, refine_tol)
    }

    pub fn grid(&self) -> Vec<f64> {
        let n = self.grid_points - 1;
        (0..=n)
            .map(|i| {
                if i == n {
                    self.e_max
                } else {
                    self.e_min + (self.e_max - self.e_min) * i as f64 / n as f64
                }
            })
            .collect()
    }

    pub fn contains(&self, e: f64) -> bool {
        e >= self.e_min && e <= self.e_max
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StateKind {
    Bound,
    Resonance,
}

impl StateKind {
    pub fn name(&self) -> &'static str {
        match self {
            StateKind::Bound => "bound",
            StateKind::Resonance => "resonance",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "bound" => Some(StateKind::Bound),
            "resonance" => Some(StateKind::Resonance),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectralResult {
    /// `E - mc^2` for the relativistic kinds; imaginary part exactly zero for
    /// bound states.
    pub energy: Complex64,
    pub kind: StateKind,
    /// `|f(E)|` relative to the largest `|f|` on the bracket or seed points.
    pub determinant_residual: f64,
    pub n_max: usize,
    pub b: f64,
    /// Continued-fraction depth in radial indices.
    pub cf_depth: usize,
    pub channels: Vec<String>,
    /// Orbital momentum of the heaviest channel (FV1/2 only).
    pub dominant_l: Option<u32>,
    pub multiplicity: usize,
}

pub fn channel_labels(channel: &ChannelSpace) -> Vec<String> {
    match channel {
        ChannelSpace::Schrodinger { l } | ChannelSpace::Fv0 { l } => vec![format!("l={l}")],
        ChannelSpace::Fv12 { l_plus } => {
            vec![format!("l+={l_plus}"), format!("l-={}", l_plus + 1)]
        }
    }
}

/// Secular determinant at a fixed depth, with the first failure kept aside so
/// that scalar root finders can be fed `f64` closures.
struct Evaluator<'a> {
    problem: &'a FvProblem,
    depth: usize,
    failure: Mutex<Option<FvError>>,
}

impl<'a> Evaluator<'a> {
    fn new(problem: &'a FvProblem, depth: usize) -> Self {
        Self {
            problem,
            depth,
            failure: Mutex::new(None),
        }
    }

    fn eval(&self, e: Complex64) -> Result<LogDet> {
        self.problem
            .secular_determinant(e, self.depth)
            .map_err(|err| err.at_energy(e))
    }

    /// Evaluates at `e`, or at `e + nudge` when a continued-fraction block is
    /// exactly singular there (the grid point sits on an eigenvalue of the
    /// long-range operator). Returns the abscissa actually used.
    fn eval_near(&self, e: f64, nudge: f64) -> Result<(f64, LogDet)> {
        match self.eval(real(e)) {
            Err(FvError::AtEnergy { source, .. })
                if matches!(*source, FvError::Singular { .. }) =>
            {
                debug!("singular block at grid point {e}; moving by {nudge:e}");
                Ok((e + nudge, self.eval(real(e + nudge))?))
            }
            other => other.map(|v| (e, v)),
        }
    }

    fn scaled(&self, e: Complex64, reference: f64) -> Complex64 {
        match self.eval(e) {
            Ok(v) => v.scaled_value(reference),
            Err(err) => {
                let mut slot = self.failure.lock().expect("poisoned");
                if slot.is_none() {
                    *slot = Some(err);
                }
                Complex64::new(f64::NAN, f64::NAN)
            }
        }
    }

    /// Replaces a root-finder error by the evaluation failure behind it.
    fn explain(&self, err: FvError) -> FvError {
        self.failure.lock().expect("poisoned").take().unwrap_or(err)
    }
}

fn real(e: f64) -> Complex64 {
    Complex64::new(e, 0.0)
}

/// Minimizes `ln |f|` on `[a, b]` by golden sections down to width `tol`.
fn golden_minimum(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        c
    } else {
        d
    }
}

struct Root {
    energy: f64,
    residual: f64,
    multiplicity: usize,
}

/// Zeros of the secular determinant in `window`, sorted ascending.
///
/// Sign changes of `Re f` on the grid are refined by false position; grid
/// local minima of `|f|` without a sign change are examined for even-order
/// touches.
pub fn find_bound_states(
    problem: &FvProblem,
    window: &SearchWindow,
) -> Result<Vec<SpectralResult>> {
    let mid = 0.5 * (window.e_min + window.e_max);
    let depth = problem.select_depth(real(mid))?;
    let ev = Evaluator::new(problem, depth);
    let nominal = window.grid();
    let nudge = 1e-6 * (window.e_max - window.e_min) / (nominal.len() - 1) as f64;
    let scanned: Vec<(f64, LogDet)> = nominal
        .par_iter()
        .map(|&e| ev.eval_near(e, nudge))
        .collect::<Result<_>>()?;
    let (grid, values): (Vec<f64>, Vec<LogDet>) = scanned.into_iter().unzip();
    for (e, v) in grid.iter().zip(&values) {
        if v.phase.im.abs() > 1e-6 {
            debug!("secular determinant not real at E = {e}: phase {}", v.phase);
        }
    }
    let sign = |v: &LogDet| {
        if v.is_zero() {
            0.0
        } else {
            v.phase.re.signum()
        }
    };
    let mut roots = Vec::new();
    let n = grid.len();
    for i in 0..n {
        if values[i].is_zero() {
            roots.push(Root {
                energy: grid[i],
                residual: 0.0,
                multiplicity: 1,
            });
        }
    }
    for i in 0..n - 1 {
        let (s0, s1) = (sign(&values[i]), sign(&values[i + 1]));
        if s0 == 0.0 || s1 == 0.0 || s0 == s1 {
            continue;
        }
        roots.push(refine_bracket(
            &ev,
            &grid,
            &values,
            i,
            i + 1,
            window.refine_tol,
        )?);
    }
    for i in 1..n - 1 {
        let changes = |a: usize, b: usize| sign(&values[a]) != sign(&values[b]);
        if changes(i - 1, i) || changes(i, i + 1) {
            continue;
        }
        let (l, c, r) = (values[i - 1].ln_abs, values[i].ln_abs, values[i + 1].ln_abs);
        if !(c < l && c < r) {
            continue;
        }
        roots.extend(examine_touch(&ev, &grid, &values, i, window.refine_tol)?);
    }
    roots.sort_by(|a, b| a.energy.total_cmp(&b.energy));
    let mut merged: Vec<Root> = Vec::new();
    for r in roots {
        match merged.last_mut() {
            Some(last) if (r.energy - last.energy).abs() < window.refine_tol => {
                last.multiplicity += r.multiplicity;
                last.residual = last.residual.max(r.residual);
            }
            _ => merged.push(r),
        }
    }
    let labels = channel_labels(&problem.channel);
    merged
        .into_iter()
        .map(|r| {
            Ok(SpectralResult {
                energy: real(r.energy),
                kind: StateKind::Bound,
                determinant_residual: r.residual,
                n_max: problem.basis.n_max,
                b: problem.basis.b,
                cf_depth: depth,
                channels: labels.clone(),
                dominant_l: dominant_l(problem, r.energy, depth)?,
                multiplicity: r.multiplicity,
            })
        })
        .collect()
}

fn refine_bracket(
    ev: &Evaluator,
    grid: &[f64],
    values: &[LogDet],
    i: usize,
    j: usize,
    tol: f64,
) -> Result<Root> {
    let reference = values[i].ln_abs.max(values[j].ln_abs);
    let f = |e: f64| ev.scaled(real(e), reference).re;
    let bracket = RootBracket::new(
        grid[i],
        grid[j],
        values[i].scaled_value(reference).re,
        values[j].scaled_value(reference).re,
    )?;
    let energy = find_real_root(f, bracket, tol).map_err(|e| ev.explain(e))?;
    let at = ev.eval(real(energy))?;
    Ok(Root {
        energy,
        residual: (at.ln_abs - reference).exp(),
        multiplicity: 1,
    })
}

/// A grid minimum of `|f|` with no sign change around it: either a double
/// root, two close simple roots, or nothing.
fn examine_touch(
    ev: &Evaluator,
    grid: &[f64],
    values: &[LogDet],
    i: usize,
    tol: f64,
) -> Result<Vec<Root>> {
    let ln_abs = |e: f64| match ev.eval(real(e)) {
        Ok(v) => v.ln_abs,
        Err(_) => f64::INFINITY,
    };
    let x = golden_minimum(ln_abs, grid[i - 1], grid[i + 1], tol);
    let at = ev.eval(real(x))?;
    let outer = values[i - 1].ln_abs.min(values[i + 1].ln_abs);
    if at.is_zero() || at.phase.re.signum() != values[i].phase.re.signum() {
        // the dip crosses zero: two simple roots on either side of x
        let mut g = grid.to_vec();
        let mut v = values.to_vec();
        g[i] = x;
        v[i] = at;
        if at.is_zero() {
            return Ok(vec![Root {
                energy: x,
                residual: 0.0,
                multiplicity: 2,
            }]);
        }
        return Ok(vec![
            refine_bracket(ev, &g, &v, i - 1, i, tol)?,
            refine_bracket(ev, &g, &v, i, i + 1, tol)?,
        ]);
    }
    if at.ln_abs - outer < TOUCH_RATIO.ln() {
        debug!("even-order zero at E = {x}");
        return Ok(vec![Root {
            energy: x,
            residual: (at.ln_abs - outer).exp(),
            multiplicity: 2,
        }]);
    }
    Ok(Vec::new())
}

fn dominant_l(problem: &FvProblem, energy: f64, depth: usize) -> Result<Option<u32>> {
    if problem.kind() != Kind::Fv12 {
        return Ok(None);
    }
    let weights = problem
        .channel_weights(real(energy), depth)
        .map_err(|e| e.at_energy(real(energy)))?;
    let ls = problem.channel.ls();
    let best = weights
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(k, _)| ls[k]);
    Ok(best)
}

/// Complex zero of the secular determinant near `guess` in a complex-scaled
/// basis.
///
/// The root is located at the basis rotation angle `theta` (the problem's own
/// angle, or [`DEFAULT_ROTATION`]) and again at `theta / 2`. Resonance
/// positions do not depend on the angle, so the distance between the two
/// roots measures how well the width is resolved. A root whose imaginary part
/// is within ten times that distance (or within [`REAL_AXIS_TOL`]) of the
/// real axis is reported as bound, with a warning.
pub fn find_resonance(problem: &FvProblem, guess: Complex64) -> Result<SpectralResult> {
    if guess.im > 0.0 {
        return Err(FvError::Precondition(format!(
            "resonance guess {guess} lies above the real axis"
        )));
    }
    let theta = if problem.basis.is_rotated() {
        problem.basis.theta
    } else {
        DEFAULT_ROTATION
    };
    let with_angle = |t: f64| -> Result<FvProblem> {
        let b = &problem.basis;
        problem.with_basis(BasisSpec::rotated(b.l, b.b, b.n_max, t)?)
    };
    let main = with_angle(theta)?;
    let check = with_angle(0.5 * theta)?;
    let tol = problem.numerics.refine_tol;
    let (z, depth, residual) = complex_root(&main, guess, tol)?;
    let (z_check, _, _) = complex_root(&check, z, tol)?;
    let resolution = (ANGLE_SPREAD_FACTOR * (z - z_check).norm()).max(REAL_AXIS_TOL);
    let labels = channel_labels(&problem.channel);
    let mut result = SpectralResult {
        energy: z,
        kind: StateKind::Resonance,
        determinant_residual: residual,
        n_max: problem.basis.n_max,
        b: problem.basis.b,
        cf_depth: depth,
        channels: labels,
        dominant_l: None,
        multiplicity: 1,
    };
    if z.im.abs() <= resolution {
        warn!("root {z} is on the real axis to within {resolution:.1e}; reported as bound");
        result.energy = real(z.re);
        result.kind = StateKind::Bound;
        return Ok(result);
    }
    if z.im > 0.0 {
        return Err(FvError::Convergence {
            what: format!("continuation ended above the real axis at {z}"),
            iterations: 0,
            history: vec![z, z_check],
            corners: None,
        });
    }
    Ok(result)
}

fn complex_root(
    problem: &FvProblem,
    guess: Complex64,
    tol: f64,
) -> Result<(Complex64, usize, f64)> {
    let depth = problem.select_depth(guess)?;
    let ev = Evaluator::new(problem, depth);
    let reference = ev.eval(guess)?.ln_abs;
    let step = 1e-3 * guess.norm().max(1.0);
    let z = find_complex_root_with_step(|z| ev.scaled(z, reference), guess, step, tol, 200)
        .map_err(|e| ev.explain(e))?;
    let residual = (ev.eval(z)?.ln_abs - reference).exp();
    Ok((z, depth, residual))
}

/// Schrodinger problem with the same potentials, physical constants and
/// numerics, solved through the same pipeline.
pub fn schrodinger_problem(
    model: &PotentialModel,
    system: PhysicalSystem,
    l: u32,
    spec: BasisSpec,
    numerics: Numerics,
) -> Result<FvProblem> {
    FvProblem::new(
        system,
        ChannelSpace::Schrodinger { l },
        split(model, &system),
        spec.with_l(l),
        numerics,
    )
}

pub fn schrodinger_reference(
    model: &PotentialModel,
    system: PhysicalSystem,
    l: u32,
    spec: BasisSpec,
    numerics: Numerics,
    window: &SearchWindow,
) -> Result<Vec<SpectralResult>> {
    find_bound_states(
        &schrodinger_problem(model, system, l, spec, numerics)?,
        window,
    )
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub n_max: usize,
    pub b: f64,
    /// Lowest state in the window; `None` when there is none or it failed.
    pub lowest: Option<SpectralResult>,
    pub error: Option<String>,
}

impl ConvergenceRow {
    pub fn energy(&self) -> Option<f64> {
        self.lowest.as_ref().map(|r| r.energy.re)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
    /// Per `b`: whether some pair of successive `N` agree to `refine_tol`.
    pub converged: Vec<(f64, bool)>,
    /// Smallest `(N, b)` whose energy agrees with the next larger `N`.
    pub recommended: Option<(usize, f64)>,
}

/// Lowest state in `window` over a grid of basis sizes and scales.
pub fn converge(
    problem: &FvProblem,
    n_list: &[usize],
    b_list: &[f64],
    window: &SearchWindow,
) -> Result<ConvergenceReport> {
    if n_list.is_empty() || b_list.is_empty() {
        return Err(FvError::Precondition("empty N or b list".into()));
    }
    let mut ns = n_list.to_vec();
    ns.sort_unstable();
    ns.dedup();
    let mut rows = Vec::new();
    let mut converged = Vec::new();
    let mut recommended: Option<(usize, f64)> = None;
    for &b in b_list {
        let mut column = Vec::new();
        for &n in &ns {
            let spec = BasisSpec::rotated(problem.basis.l, b, n, problem.basis.theta)?;
            let row = match problem
                .with_basis(spec)
                .and_then(|p| find_bound_states(&p, window))
            {
                Ok(found) => ConvergenceRow {
                    n_max: n,
                    b,
                    lowest: found.into_iter().next(),
                    error: None,
                },
                Err(e) => ConvergenceRow {
                    n_max: n,
                    b,
                    lowest: None,
                    error: Some(e.to_string()),
                },
            };
            column.push(row);
        }
        let mut flag = false;
        for pair in column.windows(2) {
            if let (Some(a), Some(c)) = (pair[0].energy(), pair[1].energy()) {
                if (a - c).abs() <= window.refine_tol {
                    flag = true;
                    let better = match recommended {
                        None => true,
                        Some((n, _)) => pair[0].n_max < n,
                    };
                    if better {
                        recommended = Some((pair[0].n_max, b));
                    }
                    break;
                }
            }
        }
        converged.push((b, flag));
        rows.extend(column);
    }
    Ok(ConvergenceReport {
        rows,
        converged,
        recommended,
    })
}

fn to_nalgebra(m: &ComplexMatrix) -> nalgebra::DMatrix<Complex64> {
    nalgebra::DMatrix::from_fn(m.rows(), m.cols(), |i, j| m[(i, j)])
}

/// Eigenvalues of the dense truncated problem `H x = E S x` on radial indices
/// `0..=n_max`, sorted by real part. No potential split and no continued
/// fraction are involved.
pub fn oracle_diagonalize(problem: &FvProblem, n_max: usize) -> Result<Vec<Complex64>> {
    let dim = (n_max + 1) * problem.component_dim();
    if dim > ORACLE_MAX_DIM {
        return Err(FvError::Resource(format!(
            "dense oracle dimension {dim} exceeds {ORACLE_MAX_DIM}"
        )));
    }
    let b = &problem.basis;
    let sized = problem.with_basis(BasisSpec::rotated(b.l, b.b, n_max, b.theta)?)?;
    let (h, s) = sized.dense_matrices()?;
    let s_lu = to_nalgebra(&s).lu();
    let a = s_lu
        .solve(&to_nalgebra(&h))
        .ok_or_else(|| FvError::Singular {
            pivot: 0.0,
            context: " in the dense overlap matrix".into(),
        })?;
    let schur = nalgebra::linalg::Schur::try_new(a, f64::EPSILON, 10_000).ok_or_else(|| {
        FvError::Convergence {
            what: "dense Schur decomposition".into(),
            iterations: 10_000,
            history: Vec::new(),
            corners: None,
        }
    })?;
    let mut eig: Vec<Complex64> = schur.unpack().1.diagonal().iter().copied().collect();
    eig.sort_by(|x, y| x.re.total_cmp(&y.re));
    Ok(eig)
}

/// Oracle eigenvalues in `window` with `|Im E| <= imag_tol`.
pub fn real_eigenvalues_in(
    eigenvalues: &[Complex64],
    window: &SearchWindow,
    imag_tol: f64,
) -> Vec<f64> {
    eigenvalues
        .iter()
        .filter(|z| z.im.abs() <= imag_tol && window.contains(z.re))
        .map(|z| z.re)
        .collect()
}
