//! Orthonormal Laguerre polynomials and functions by forward recurrence.
//!
//! `ell_n(x)` is `L_n^(alpha)(x)` normalized under the weight
//! `x^alpha e^{-x}`; the associated functions
//! `psi_n(x) = ell_n(x) x^{alpha/2} e^{-x/2}` are bounded and are evaluated
//! with a running logarithmic scale so that neither the exponential factor
//! nor the polynomial growth leaves the range of `f64`.

/// `ln Gamma(x)` for `x > 0` (Lanczos, g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    if x.fract() == 0.0 && x <= 171.0 {
        return (2..x as u64).map(|k| (k as f64).ln()).sum();
    }
    let x = x - 1.0;
    let mut a = COEF[0];
    let t = x + G + 0.5;
    for (i, &c) in COEF.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// Sub-diagonal entry of the Jacobi matrix: `x ell_n` has coefficient
/// `-sqrt((n+1)(n+alpha+1))` on `ell_{n+1}`.
#[inline]
pub fn jacobi_offdiag(alpha: f64, n: usize) -> f64 {
    let n = n as f64;
    -((n + 1.0) * (n + alpha + 1.0)).sqrt()
}

#[inline]
pub fn jacobi_diag(alpha: f64, n: usize) -> f64 {
    2.0 * n as f64 + alpha + 1.0
}

/// `ell_0 .. ell_{n_max}` at `x`, without the weight factor.
pub fn orthonormal_polynomials(alpha: f64, n_max: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n_max + 1);
    out.push((-0.5 * ln_gamma(alpha + 1.0)).exp());
    for n in 0..n_max {
        let prev = if n == 0 { 0.0 } else { out[n - 1] };
        let next = ((jacobi_diag(alpha, n) - x) * out[n]
            - ((n as f64) * (n as f64 + alpha)).sqrt() * prev)
            / (-jacobi_offdiag(alpha, n));
        out.push(next);
    }
    out
}

/// `psi_0 .. psi_{n_max}` at `x >= 0`.
pub fn laguerre_functions(alpha: f64, n_max: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; n_max + 1];
    laguerre_functions_into(alpha, x, &mut out);
    out
}

/// Fills `out[n] = psi_n(x)` for `n < out.len()`.
pub fn laguerre_functions_into(alpha: f64, x: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    if x == 0.0 {
        let base = if alpha == 0.0 { 1.0 } else { 0.0 };
        let ell = orthonormal_polynomials(alpha, out.len() - 1, 0.0);
        for (o, e) in out.iter_mut().zip(ell) {
            *o = base * e;
        }
        return;
    }
    const BIG: f64 = 1e150;
    let mut log_scale = 0.5 * alpha * x.ln() - 0.5 * x - 0.5 * ln_gamma(alpha + 1.0);
    let mut prev = 0.0f64;
    let mut cur = 1.0f64;
    out[0] = log_scale.exp();
    for n in 0..out.len() - 1 {
        let next = ((jacobi_diag(alpha, n) - x) * cur
            - ((n as f64) * (n as f64 + alpha)).sqrt() * prev)
            / (-jacobi_offdiag(alpha, n));
        prev = cur;
        cur = next;
        if cur.abs() > BIG {
            prev /= BIG;
            cur /= BIG;
            log_scale += BIG.ln();
        }
        out[n + 1] = cur * log_scale.exp();
    }
}

/// Ratio `ell_n(x) / ell_n'(x)` (Newton step) from scaled functions.
pub(crate) fn newton_ratio(alpha: f64, n: usize, x: f64) -> f64 {
    let psi = laguerre_functions(alpha, n, x);
    let (pn, pm) = (psi[n], if n > 0 { psi[n - 1] } else { 0.0 });
    // x ell_n' = n ell_n - sqrt(n (n + alpha)) ell_{n-1}
    let nf = n as f64;
    let deriv = nf * pn - (nf * (nf + alpha)).sqrt() * pm;
    x * pn / deriv
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln_gamma_matches_factorials() {
        assert!((ln_gamma(6.0) - 120f64.ln()).abs() < 1e-13);
        assert!((ln_gamma(0.5) - std::f64::consts::PI.sqrt().ln()).abs() < 1e-13);
        assert!((ln_gamma(10.5) - 1_133_278.388_7f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn functions_agree_with_polynomials_times_weight() {
        let alpha = 3.0;
        let x = 2.7;
        let psi = laguerre_functions(alpha, 12, x);
        let ell = orthonormal_polynomials(alpha, 12, x);
        let w = x.powf(alpha / 2.0) * (-x / 2.0).exp();
        for n in 0..=12 {
            assert!((psi[n] - ell[n] * w).abs() < 1e-13 * (1.0 + psi[n].abs()));
        }
    }

    #[test]
    fn far_tail_underflows_cleanly() {
        let psi = laguerre_functions(2.0, 50, 4000.0);
        assert!(psi.iter().all(|v| v.is_finite()));
        assert!(psi[50].abs() < 1e-300);
    }
}
