//! One-dimensional quadrature rules on the unit interval.
//!
//! [`GaussLegendre`] is the classical rule; [`LogWeighted`] integrates
//! `∫₀¹ f(x)·(−ln x) dx` exactly for polynomials `f` of degree below the
//! number of nodes. The latter is built by product integration on the
//! Gauss–Legendre nodes, using the closed-form moments of the shifted
//! Legendre polynomials against `−ln x`.

use crate::error::{Error, Result};

/// Gauss–Legendre rule mapped to `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(order: usize) -> Result<Self> {
        if order == 0 {
            return Err(Error::invalid("Gauss-Legendre order must be positive"));
        }
        let n = order;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            // Tricomi initial guess, then Newton on P_n.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, dp) = legendre_with_derivative(n, x);
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = 0.5 * (1.0 - x);
            nodes[n - 1 - i] = 0.5 * (1.0 + x);
            weights[i] = 0.5 * w;
            weights[n - 1 - i] = 0.5 * w;
        }
        Ok(Self { nodes, weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.iter().map(|(x, w)| w * f(x)).sum()
    }
}

/// Rule for `∫₀¹ f(x)·(−ln x) dx`, exact when `f` is a polynomial of degree `< len()`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogWeighted {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl LogWeighted {
    pub fn new(order: usize) -> Result<Self> {
        let gl = GaussLegendre::new(order)?;
        let weights = gl
            .iter()
            .map(|(x, w)| {
                let t = 2.0 * x - 1.0;
                let mut p = vec![1.0; order];
                if order > 1 {
                    p[1] = t;
                }
                for k in 2..order {
                    p[k] = ((2 * k - 1) as f64 * t * p[k - 1] - (k - 1) as f64 * p[k - 2])
                        / k as f64;
                }
                let acc: f64 = p
                    .iter()
                    .enumerate()
                    .map(|(k, pk)| (2 * k + 1) as f64 * pk * log_moment(k))
                    .sum();
                w * acc
            })
            .collect();
        Ok(Self { nodes: gl.nodes, weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }
}

/// `∫₀¹ P̃_k(x)·(−ln x) dx` for the shifted Legendre polynomial `P̃_k(x) = P_k(2x − 1)`.
fn log_moment(k: usize) -> f64 {
    if k == 0 {
        1.0
    } else {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sign / (k * (k + 1)) as f64
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_is_exact_to_degree_2n_minus_1() {
        for n in 1..=20 {
            let gl = GaussLegendre::new(n).unwrap();
            for deg in 0..2 * n {
                let got = gl.integrate(|x| x.powi(deg as i32));
                let want = 1.0 / (deg as f64 + 1.0);
                assert!((got - want).abs() < 1e-14, "n={n} deg={deg}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn gauss_legendre_nodes_sorted_and_weights_positive() {
        let gl = GaussLegendre::new(9).unwrap();
        assert!(gl.nodes.windows(2).all(|w| w[0] < w[1]));
        assert!(gl.weights.iter().all(|&w| w > 0.0));
        assert!((gl.weights.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!((gl.nodes[4] - 0.5).abs() < 1e-16);
    }

    #[test]
    fn log_rule_integrates_monomials() {
        // ∫₀¹ x^m (−ln x) dx = 1/(m+1)²
        for n in 1..=12 {
            let rule = LogWeighted::new(n).unwrap();
            for m in 0..n {
                let got: f64 = rule.iter().map(|(x, w)| w * x.powi(m as i32)).sum();
                let want = 1.0 / ((m + 1) * (m + 1)) as f64;
                assert!((got - want).abs() < 1e-13, "n={n} m={m}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn zero_order_rejected() {
        assert!(GaussLegendre::new(0).is_err());
        assert!(LogWeighted::new(0).is_err());
    }
}
