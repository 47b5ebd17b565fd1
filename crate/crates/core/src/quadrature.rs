//! Gauss-Legendre rules on [0,1] and tensor-product rules on [0,1]^2.
//!
//! An n-point rule integrates polynomials of degree <= 2n-1 exactly. Nodes
//! are Legendre roots computed by Newton iteration to 1e-15 and mapped from
//! [-1,1] to [0,1]; weights sum to 1 on the interval and on the square.

/// 1D rule on [0,1].
#[derive(Debug, Clone)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&t, &w)| w * f(t))
            .sum()
    }
}

/// Tensor-product rule on [0,1]^2.
#[derive(Debug, Clone)]
pub struct TensorRule {
    pub nodes: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
}

impl TensorRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, mut f: impl FnMut([f64; 2]) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&p, &w)| w * f(p))
            .sum()
    }
}

/// Legendre value and derivative at x in [-1,1] via the three-term recurrence.
fn legendre_pair(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 1..n {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    // P'_n from P_n and P_{n-1}
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// n-point Gauss-Legendre rule on [0,1].
pub fn gauss_rule(n: usize) -> GaussRule {
    assert!(n >= 1, "gauss_rule needs at least one point");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Tricomi-style initial guess, then Newton on P_n
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_pair(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_pair(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // roots come out ordered from +1 downward; store ascending on [0,1]
        nodes[n - 1 - i] = 0.5 * (x + 1.0);
        nodes[i] = 0.5 * (1.0 - x);
        weights[n - 1 - i] = 0.5 * w;
        weights[i] = 0.5 * w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.5;
    }
    GaussRule { nodes, weights }
}

/// Tensor product of `gauss_rule(n)` with itself, exact for Q^{2n-1}.
pub fn tensor_rule(n: usize) -> TensorRule {
    let rule = gauss_rule(n);
    let mut nodes = Vec::with_capacity(n * n);
    let mut weights = Vec::with_capacity(n * n);
    for (&ty, &wy) in rule.nodes.iter().zip(&rule.weights) {
        for (&tx, &wx) in rule.nodes.iter().zip(&rule.weights) {
            nodes.push([tx, ty]);
            weights.push(wx * wy);
        }
    }
    TensorRule { nodes, weights }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_point_is_midpoint() {
        let r = gauss_rule(1);
        assert!((r.nodes[0] - 0.5).abs() < 1e-15);
        assert!((r.weights[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn two_point_rule() {
        let r = gauss_rule(2);
        let d = 1.0 / (2.0 * 3.0_f64.sqrt());
        assert!((r.nodes[0] - (0.5 - d)).abs() < 1e-15);
        assert!((r.nodes[1] - (0.5 + d)).abs() < 1e-15);
        assert!((r.weights[0] - 0.5).abs() < 1e-15);
        assert!((r.weights[1] - 0.5).abs() < 1e-15);
        // degree-3 exactness: int_0^1 t^3 dt = 1/4
        let cubic = r.integrate(|t| t * t * t);
        assert!((cubic - 0.25).abs() < 1e-15);
    }

    #[test]
    fn exactness_up_to_degree_2n_minus_1() {
        for n in 1..=10usize {
            let r = gauss_rule(n);
            for k in 0..=(2 * n - 1) {
                let val = r.integrate(|t| t.powi(k as i32));
                let exact = 1.0 / (k as f64 + 1.0);
                assert!(
                    (val - exact).abs() < 1e-13,
                    "n = {n}, k = {k}: {val} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn tensor_rule_basics() {
        let r = tensor_rule(1);
        assert_eq!(r.len(), 1);
        assert_eq!(r.nodes[0], [0.5, 0.5]);
        assert!((r.weights[0] - 1.0).abs() < 1e-15);

        let r = tensor_rule(2);
        let v = r.integrate(|[x, y]| x * x * y * y);
        assert!((v - 1.0 / 9.0).abs() < 1e-15);

        for n in 1..=8 {
            let r = tensor_rule(n);
            let total: f64 = r.weights.iter().sum();
            assert!((total - 1.0).abs() < 1e-13);
        }
    }
}
