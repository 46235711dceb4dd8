//! Generalized Gauss-Laguerre quadrature.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use super::laguerre::{jacobi_diag, jacobi_offdiag, laguerre_functions_into, newton_ratio};
use crate::error::{FvError, Result};

/// Gauss rule for `int_0^inf r^alpha e^{-beta r} g(r) dr`.
#[derive(Clone, Debug)]
pub struct QuadratureRule {
    pub alpha: f64,
    pub beta: f64,
    /// Nodes of the unscaled rule (weight `x^alpha e^{-x}`).
    nodes: Arc<Vec<f64>>,
    /// Christoffel numbers divided by the weight, so that
    /// `int F(x) dx ~ sum_k plain_weights[k] F(x_k)`.
    plain_weights: Arc<Vec<f64>>,
}

impl QuadratureRule {
    pub fn new(order: usize, alpha: f64, beta: f64) -> Result<Self> {
        if order == 0 {
            return Err(FvError::Precondition(
                "quadrature order must be positive".into(),
            ));
        }
        if !(alpha > -1.0) || !(beta > 0.0) {
            return Err(FvError::Domain(format!(
                "Gauss-Laguerre rule needs alpha > -1 and beta > 0 (got {alpha}, {beta})"
            )));
        }
        let (nodes, plain_weights) = cached_rule(order, alpha);
        Ok(Self {
            alpha,
            beta,
            nodes,
            plain_weights,
        })
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Physical abscissae `x_k / beta`.
    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        self.nodes.iter().map(move |x| x / self.beta)
    }

    /// Weights for `int r^alpha e^{-beta r} g(r) dr ~ sum w_k g(r_k)`.
    pub fn weights(&self) -> Vec<f64> {
        let scale = -(self.alpha + 1.0) * self.beta.ln();
        self.nodes
            .iter()
            .zip(self.plain_weights.iter())
            .map(|(&x, &pw)| {
                if x == 0.0 {
                    0.0
                } else {
                    pw * (self.alpha * x.ln() - x + scale).exp()
                }
            })
            .collect()
    }

    /// `(r_k, v_k)` with `int F(r) dr ~ sum v_k F(r_k)` for integrands that
    /// already carry their own `r^alpha e^{-beta r}` behaviour.
    pub fn plain_pairs(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes
            .iter()
            .zip(self.plain_weights.iter())
            .map(move |(&x, &w)| (x / self.beta, w / self.beta))
    }
}

/// `sum w_k f(r_k)`: the weighted integral `int r^alpha e^{-beta r} f(r) dr`.
pub fn integrate(f: impl Fn(f64) -> f64, rule: &QuadratureRule) -> Result<f64> {
    let mut sum = 0.0;
    for (r, w) in rule.points().zip(rule.weights()) {
        let v = f(r);
        if v.is_nan() {
            return Err(FvError::Domain(format!("integrand is NaN at r = {r}")));
        }
        if w != 0.0 {
            sum += w * v;
        }
    }
    Ok(sum)
}

type RuleData = (Arc<Vec<f64>>, Arc<Vec<f64>>);

fn cached_rule(order: usize, alpha: f64) -> RuleData {
    static CACHE: OnceLock<Mutex<HashMap<(usize, u64), RuleData>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let key = (order, alpha.to_bits());
    if let Some(hit) = cache.lock().expect("rule cache poisoned").get(&key) {
        return hit.clone();
    }
    let (nodes, weights) = compute_rule(order, alpha);
    let data = (Arc::new(nodes), Arc::new(weights));
    cache
        .lock()
        .expect("rule cache poisoned")
        .insert(key, data.clone());
    data
}

/// Golub-Welsch nodes, polished by Newton steps on `ell_n`, with weights from
/// the Christoffel function `1 / sum_{j<n} psi_j(x)^2`.
fn compute_rule(order: usize, alpha: f64) -> (Vec<f64>, Vec<f64>) {
    let diag: Vec<f64> = (0..order).map(|j| jacobi_diag(alpha, j)).collect();
    let off: Vec<f64> = (0..order.saturating_sub(1))
        .map(|j| jacobi_offdiag(alpha, j).abs())
        .collect();
    let mut nodes = tridiagonal_eigenvalues(diag, off);
    nodes.sort_by(|a, b| a.partial_cmp(b).expect("finite nodes"));
    for x in nodes.iter_mut() {
        for _ in 0..3 {
            let step = newton_ratio(alpha, order, *x);
            if !step.is_finite() {
                break;
            }
            let next = *x - step;
            if next <= 0.0 {
                break;
            }
            let done = (next - *x).abs() <= 4.0 * f64::EPSILON * x.abs();
            *x = next;
            if done {
                break;
            }
        }
    }
    let mut psi = vec![0.0; order];
    let weights = nodes
        .iter()
        .map(|&x| {
            laguerre_functions_into(alpha, x, &mut psi);
            let s: f64 = psi.iter().map(|v| v * v).sum();
            if s > 0.0 {
                1.0 / s
            } else {
                0.0
            }
        })
        .collect();
    (nodes, weights)
}

/// Eigenvalues of a symmetric tridiagonal matrix (implicit QL with Wilkinson
/// shifts).
fn tridiagonal_eigenvalues(mut d: Vec<f64>, off: Vec<f64>) -> Vec<f64> {
    let n = d.len();
    let mut e = vec![0.0; n];
    e[..off.len()].copy_from_slice(&off);
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            assert!(iter < 200, "tridiagonal QL failed to converge");
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut underflow = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::csbasis::laguerre::ln_gamma;

    #[test]
    fn exponential_integral() {
        let rule = QuadratureRule::new(10, 0.0, 1.0).unwrap();
        assert!((integrate(|_| 1.0, &rule).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn gamma_moment() {
        // int r^3 e^{-2r} dr = 3!/2^4
        let rule = QuadratureRule::new(8, 3.0, 2.0).unwrap();
        let v = integrate(|_| 1.0, &rule).unwrap();
        assert!((v - 0.375).abs() < 1e-14);
        let plain = QuadratureRule::new(40, 0.0, 1.0).unwrap();
        let v2 = integrate(|r| r.powi(3) * (-r).exp(), &plain).unwrap();
        assert!((v2 - 0.375).abs() < 1e-12);
    }

    #[test]
    fn damped_sine() {
        // int r e^{-r} sin r dr = 1/2
        let rule = QuadratureRule::new(40, 1.0, 1.0).unwrap();
        let v = integrate(f64::sin, &rule).unwrap();
        assert!((v - 0.5).abs() < 1e-13);
    }

    #[test]
    fn weight_sum_reproduces_moment() {
        for &(alpha, beta) in &[(0.0, 1.0), (2.0, 0.6), (5.0, 3.0), (7.0, 1.5)] {
            let rule = QuadratureRule::new(60, alpha, beta).unwrap();
            let sum: f64 = rule.weights().iter().sum();
            let exact = (ln_gamma(alpha + 1.0) - (alpha + 1.0) * f64::ln(beta)).exp();
            assert!(
                ((sum - exact) / exact).abs() < 1e-13,
                "{alpha} {beta}: {sum} vs {exact}"
            );
        }
    }

    #[test]
    fn high_order_rule_is_finite() {
        let rule = QuadratureRule::new(720, 2.0, 1.0).unwrap();
        assert!(rule
            .plain_pairs()
            .all(|(r, w)| r.is_finite() && w.is_finite() && w > 0.0));
    }

    #[test]
    fn nan_integrand_is_domain_error() {
        let rule = QuadratureRule::new(4, 0.0, 1.0).unwrap();
        assert!(matches!(
            integrate(|_| f64::NAN, &rule),
            Err(FvError::Domain(_))
        ));
    }
}
