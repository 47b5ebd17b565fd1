//! Shifted Legendre polynomials on the unit interval.
//!
//! `L[k]` denotes the Legendre polynomial of degree k mapped to [0,1],
//! i.e. L[k](t) = P_k(2t - 1). They satisfy
//!
//! * L[0] = 1, L[1](t) = 2t - 1,
//! * orthogonality: int_0^1 L[i] L[j] dt = delta_ij / (2i + 1),
//! * parity under t -> 1-t: L[k](1-t) = (-1)^k L[k](t).
//!
//! The parity relation is what makes facet orientation handling a sign flip
//! per mode, so the whole crate represents facet polynomials in this basis.

/// Values L[0](t) .. L[order](t).
pub fn eval(order: usize, t: f64) -> Vec<f64> {
    let mut vals = vec![0.0; order + 1];
    eval_into(order, t, &mut vals);
    vals
}

/// Evaluate into a caller-provided slice of length `order + 1`.
pub fn eval_into(order: usize, t: f64, vals: &mut [f64]) {
    debug_assert!(vals.len() == order + 1);
    let x = 2.0 * t - 1.0;
    vals[0] = 1.0;
    if order == 0 {
        return;
    }
    vals[1] = x;
    for k in 1..order {
        // (k+1) P_{k+1} = (2k+1) x P_k - k P_{k-1}
        let kf = k as f64;
        vals[k + 1] = ((2.0 * kf + 1.0) * x * vals[k] - kf * vals[k - 1]) / (kf + 1.0);
    }
}

/// Values and first derivatives (with respect to t) of L[0..=order] at t.
pub fn eval_with_deriv(order: usize, t: f64) -> (Vec<f64>, Vec<f64>) {
    let x = 2.0 * t - 1.0;
    let mut p = vec![0.0; order + 1];
    let mut dp = vec![0.0; order + 1];
    p[0] = 1.0;
    dp[0] = 0.0;
    if order >= 1 {
        p[1] = x;
        dp[1] = 1.0;
    }
    for k in 1..order {
        let kf = k as f64;
        p[k + 1] = ((2.0 * kf + 1.0) * x * p[k] - kf * p[k - 1]) / (kf + 1.0);
        // P'_{k+1} = P'_{k-1} + (2k+1) P_k
        dp[k + 1] = dp[k - 1] + (2.0 * kf + 1.0) * p[k];
    }
    // chain rule for the [0,1] substitution x = 2t - 1
    for d in dp.iter_mut() {
        *d *= 2.0;
    }
    (p, dp)
}

/// int_0^1 L[k]^2 dt.
pub fn norm_sq(k: usize) -> f64 {
    1.0 / (2.0 * k as f64 + 1.0)
}

/// Shifted Legendre basis of a fixed order, the representation used for
/// facet polynomials and tensor-product cell polynomials.
#[derive(Debug, Clone)]
pub struct LegendreBasis {
    pub order: usize,
}

impl LegendreBasis {
    pub fn new(order: usize) -> Self {
        Self { order }
    }

    pub fn dim(&self) -> usize {
        self.order + 1
    }

    pub fn eval(&self, t: f64) -> Vec<f64> {
        eval(self.order, t)
    }

    pub fn eval_with_deriv(&self, t: f64) -> (Vec<f64>, Vec<f64>) {
        eval_with_deriv(self.order, t)
    }

    /// Diagonal of the exact Gram matrix on [0,1].
    pub fn norm_sq(&self, k: usize) -> f64 {
        norm_sq(k)
    }
}
