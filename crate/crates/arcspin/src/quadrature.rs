//! Gauss–Legendre quadrature.
//!
//! Nodes and weights are found by Newton iteration on the Legendre
//! polynomials (Golub–Welsch is overkill at the orders used here). The
//! integrands downstream are entire functions of the angle, so convergence is
//! spectral and order 64 is enough for tolerances near machine precision.

/// A Gauss–Legendre rule of fixed order on `[-1, 1]`.
#[derive(Clone, Debug)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Build the rule of the given order (`order >= 1`).
    pub fn new(order: usize) -> Self {
        assert!(order >= 1, "quadrature order must be positive");
        let m = order;
        let mut nodes = vec![0.0; m];
        let mut weights = vec![0.0; m];
        for i in 0..m {
            // Chebyshev-like initial guess, then Newton on P_m.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(m, x);
                let step = p / d;
                x -= step;
                if step.abs() < 1e-15 {
                    break;
                }
            }
            let (_, dp) = legendre_with_derivative(m, x);
            nodes[m - 1 - i] = x;
            weights[m - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
        GaussLegendre { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let nodes = self.nodes.iter().map(|&x| mid + half * x).collect();
        let weights = self.weights.iter().map(|&w| half * w).collect();
        (nodes, weights)
    }

    /// Integrate `f` over `[a, b]`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = 0.0;
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(mid + half * x);
        }
        half * acc
    }
}

/// Value and derivative of the Legendre polynomial `P_m` at `x`.
fn legendre_with_derivative(m: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if m == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=m {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = m as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::TAU;

    #[test]
    fn order_five_nodes_match_reference() {
        let rule = GaussLegendre::new(5);
        let expected = [
            -0.906179845938664,
            -0.5384693101056831,
            0.0,
            0.5384693101056831,
            0.906179845938664,
        ];
        let expected_w = [
            0.23692688505618908,
            0.47862867049936647,
            0.5688888888888889,
            0.47862867049936647,
            0.23692688505618908,
        ];
        for i in 0..5 {
            assert_abs_diff_eq!(rule.nodes[i], expected[i], epsilon = 1e-13);
            assert_abs_diff_eq!(rule.weights[i], expected_w[i], epsilon = 1e-13);
        }
    }

    #[test]
    fn exact_for_polynomials_up_to_degree_2m_minus_1() {
        let rule = GaussLegendre::new(5);
        // int_{-1}^{1} x^8 dx = 2/9
        let val = rule.integrate(-1.0, 1.0, |x| x.powi(8));
        assert_abs_diff_eq!(val, 2.0 / 9.0, epsilon = 1e-14);
        let odd = rule.integrate(-1.0, 1.0, |x| x.powi(9));
        assert_abs_diff_eq!(odd, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn bessel_integral() {
        // int_0^{2pi} e^{cos u} du = 2 pi I_0(1) = 7.954926521012844
        let rule = GaussLegendre::new(64);
        let val = rule.integrate(0.0, TAU, |u| u.cos().exp());
        assert_abs_diff_eq!(val, 7.954926521012844, epsilon = 1e-12);
    }

    #[test]
    fn weights_sum_to_interval_length() {
        for order in [2usize, 8, 33, 64] {
            let rule = GaussLegendre::new(order);
            let (_, w) = rule.mapped(0.0, TAU / 8.0);
            let total: f64 = w.iter().sum();
            assert_abs_diff_eq!(total, TAU / 8.0, epsilon = 1e-13);
            assert!(w.iter().all(|&x| x > 0.0));
        }
    }
}
