//! One-dimensional quadrature rules used by the density integrals.
//!
//! Radial integrals use Gauss–Legendre (the integrands are analytic in r),
//! angular integrals use the periodic trapezoid rule, which is spectrally
//! accurate for smooth 2π-periodic integrands.

/// Gauss–Legendre rule on [-1, 1], mapped on demand to arbitrary intervals.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Builds an `n`-point rule by Newton iteration on P_n from the Chebyshev
    /// initial guess. Exact for polynomials of degree 2n-1.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "quadrature rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        // Roots come in ± pairs; compute the upper half and mirror.
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_and_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-15 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            weights[i] = w;
            nodes[n - 1 - i] = x;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// ∫_a^b f(x) dx.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = 0.0;
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(mid + half * x);
        }
        acc * half
    }

    /// Nodes and weights mapped to [a, b], in ascending order.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, w * half))
    }
}

fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Mean of `f` over one period of the uniform angular grid θ_j = 2πj/n.
/// Multiply by 2π for the integral.
pub fn angular_mean<F: FnMut(f64) -> f64>(n: usize, mut f: F) -> f64 {
    let mut acc = 0.0;
    for j in 0..n {
        acc += f(2.0 * std::f64::consts::PI * j as f64 / n as f64);
    }
    acc / n as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_is_exact_for_polynomials() {
        let rule = GaussLegendre::new(8);
        // Degree 15 is the highest degree an 8-point rule integrates exactly.
        let exact = (3.0f64.powi(16) - 1.0) / 16.0;
        let got = rule.integrate(1.0, 3.0, |x| x.powi(15));
        assert!((got - exact).abs() / exact < 1e-13, "got {got}, want {exact}");
    }

    #[test]
    fn gauss_legendre_weights_sum_to_interval_length() {
        for n in [1, 2, 5, 64, 257] {
            let rule = GaussLegendre::new(n);
            let total: f64 = rule.mapped(-2.0, 5.0).map(|(_, w)| w).sum();
            assert!((total - 7.0).abs() < 1e-12 * n as f64);
        }
    }

    #[test]
    fn angular_mean_is_spectrally_accurate() {
        // exp(cos θ) has mean I_0(1) = 1.2660658777520083...
        let mean = angular_mean(32, |t| t.cos().exp());
        assert!((mean - 1.266_065_877_752_008_3).abs() < 1e-14);
    }

    #[test]
    fn smooth_integral_converges() {
        let rule = GaussLegendre::new(40);
        let got = rule.integrate(0.0, 1.0, |r| (1.0 + r * r).recip() * r);
        let exact = 0.5 * 2.0f64.ln();
        assert!((got - exact).abs() < 1e-14);
    }
}
