use num_complex::Complex64;

use crate::error::{FvError, Result};

/// A real interval on which `f` changes sign.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RootBracket {
    pub lo: f64,
    pub hi: f64,
    pub f_lo: f64,
    pub f_hi: f64,
}

impl RootBracket {
    pub fn new(lo: f64, hi: f64, f_lo: f64, f_hi: f64) -> Result<Self> {
        if !(lo < hi) {
            return Err(FvError::Precondition(format!(
                "bracket [{lo}, {hi}] is empty"
            )));
        }
        if !(f_lo * f_hi <= 0.0) {
            return Err(FvError::Precondition(format!(
                "no sign change on [{lo}, {hi}]: f = {f_lo:e}, {f_hi:e}"
            )));
        }
        Ok(Self { lo, hi, f_lo, f_hi })
    }

    /// Evaluates `f` at both ends.
    pub fn evaluate(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> Result<Self> {
        Self::new(lo, hi, f(lo), f(hi))
    }
}

/// Root of `f` inside `bracket`, to bracket width `tol`.
///
/// Illinois-modified false position; every third step that fails to halve the
/// bracket is replaced by a bisection. Returns the endpoint with smaller `|f|`.
pub fn find_real_root(f: impl Fn(f64) -> f64, bracket: RootBracket, tol: f64) -> Result<f64> {
    let RootBracket {
        mut lo,
        mut hi,
        mut f_lo,
        mut f_hi,
    } = RootBracket::new(bracket.lo, bracket.hi, bracket.f_lo, bracket.f_hi)?;
    if !(tol > 0.0) {
        return Err(FvError::Precondition("tolerance must be positive".into()));
    }
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    let mut side = 0i8;
    let mut stalled = 0u32;
    let max_iter = 400;
    for _ in 0..max_iter {
        let width = hi - lo;
        if width <= tol {
            break;
        }
        let secant = (lo * f_hi - hi * f_lo) / (f_hi - f_lo);
        let x = if stalled >= 2 || !(secant > lo && secant < hi) {
            stalled = 0;
            0.5 * (lo + hi)
        } else {
            // keep the step off the endpoints so the bracket always shrinks
            let guard = 0.25 * tol;
            secant.clamp(lo + guard, hi - guard)
        };
        let fx = f(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if fx.is_nan() {
            return Err(FvError::Domain(format!("function is NaN at {x}")));
        }
        if (fx < 0.0) == (f_lo < 0.0) {
            lo = x;
            f_lo = fx;
            if side == -1 {
                f_hi *= 0.5;
            }
            side = -1;
        } else {
            hi = x;
            f_hi = fx;
            if side == 1 {
                f_lo *= 0.5;
            }
            side = 1;
        }
        if hi - lo > 0.5 * width {
            stalled += 1;
        } else {
            stalled = 0;
        }
    }
    // f_lo / f_hi may carry Illinois down-weighting; re-evaluate to choose.
    let (a, b) = (f(lo).abs(), f(hi).abs());
    Ok(if a <= b { lo } else { hi })
}

/// Muller iteration started from `guess` and `guess +- 0.01 max(1, |guess|)`.
pub fn find_complex_root(
    f: impl Fn(Complex64) -> Complex64,
    guess: Complex64,
    tol: f64,
    max_iter: usize,
) -> Result<Complex64> {
    let step = 1e-2 * guess.norm().max(1.0);
    find_complex_root_with_step(f, guess, step, tol, max_iter)
}

/// Muller iteration with an explicit initial spread of the three seeds.
///
/// Stops when `f(z) == 0` or the step falls below `tol * max(1, |z|)`.
/// Stopping on the step, not on `|f|`, keeps the result independent of a
/// constant rescaling of `f` up to roundoff.
pub fn find_complex_root_with_step(
    f: impl Fn(Complex64) -> Complex64,
    guess: Complex64,
    step: f64,
    tol: f64,
    max_iter: usize,
) -> Result<Complex64> {
    if !(tol > 0.0) || !(step > 0.0) {
        return Err(FvError::Precondition(
            "tolerance and step must be positive".into(),
        ));
    }
    let mut x0 = guess - step;
    let mut x1 = guess + step;
    let mut x2 = guess;
    let mut f0 = f(x0);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut history = vec![x2];
    for _ in 0..max_iter {
        if f2.norm() == 0.0 {
            return Ok(x2);
        }
        let q = (x2 - x1) / (x1 - x0);
        let a = q * f2 - q * (1.0 + q) * f1 + q * q * f0;
        let b = (2.0 * q + 1.0) * f2 - (1.0 + q) * (1.0 + q) * f1 + q * q * f0;
        let c = (1.0 + q) * f2;
        let disc = (b * b - 4.0 * a * c).sqrt();
        let den = if (b + disc).norm() >= (b - disc).norm() {
            b + disc
        } else {
            b - disc
        };
        let dx = if den.norm() == 0.0 {
            // degenerate interpolant: nudge along the last secant
            (x2 - x1) * 0.5
        } else {
            -(x2 - x1) * 2.0 * c / den
        };
        let x3 = x2 + dx;
        let f3 = f(x3);
        if !(x3.re.is_finite() && x3.im.is_finite()) || f3.re.is_nan() || f3.im.is_nan() {
            break;
        }
        history.push(x3);
        x0 = x1;
        f0 = f1;
        x1 = x2;
        f1 = f2;
        x2 = x3;
        f2 = f3;
        if dx.norm() <= tol * x2.norm().max(1.0) {
            return Ok(x2);
        }
    }
    let iterations = history.len();
    Err(FvError::Convergence {
        what: "Muller iteration".into(),
        iterations,
        history,
        corners: None,
    })
}
