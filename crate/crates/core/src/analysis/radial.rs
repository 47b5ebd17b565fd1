//! Independent 1D validation of the disk benchmark reference.
//!
//! The coefficient is radially symmetric, so the exact solution decomposes
//! into azimuthal modes whose radial parts solve
//!
//!   -(1/r) (r kappa U')' + kappa m^2 U / r^2 = g_m(r),   U(2) = 0,
//!
//! with continuity of U and of kappa U' at the interface r = 1 (natural in
//! the weak form) and regularity at the origin. This module solves those
//! problems with a high-order 1D primal FE method that shares no code with
//! the 2D solver, and compares against the analytic radial profiles. For
//! the m = 1 modes the origin value is constrained to zero, which keeps all
//! integrands polynomial on the first element.

use super::reference::{annulus_profiles, RadialProfile};
use crate::error::{Error, Result};
use crate::quadrature::gauss_rule;
use nalgebra::{DMatrix, DVector};

const ORDER: usize = 4;

/// Gauss-Lobatto nodes of order 4 on [0,1].
fn lobatto_nodes() -> [f64; ORDER + 1] {
    let a = (3.0f64 / 7.0).sqrt();
    [0.0, 0.5 * (1.0 - a), 0.5, 0.5 * (1.0 + a), 1.0]
}

/// Values and derivatives of the Lagrange basis at local coordinate t.
fn lagrange_all(nodes: &[f64; ORDER + 1], t: f64) -> ([f64; ORDER + 1], [f64; ORDER + 1]) {
    let mut vals = [0.0; ORDER + 1];
    let mut ders = [0.0; ORDER + 1];
    for i in 0..=ORDER {
        let mut v = 1.0;
        for (j, &nj) in nodes.iter().enumerate() {
            if j != i {
                v *= (t - nj) / (nodes[i] - nj);
            }
        }
        vals[i] = v;
        let mut d = 0.0;
        for k in 0..=ORDER {
            if k == i {
                continue;
            }
            let mut term = 1.0 / (nodes[i] - nodes[k]);
            for (j, &nj) in nodes.iter().enumerate() {
                if j != i && j != k {
                    term *= (t - nj) / (nodes[i] - nj);
                }
            }
            d += term;
        }
        ders[i] = d;
    }
    (vals, ders)
}

/// 1D FE solution of one azimuthal mode on [0, 2].
pub struct RadialSolution {
    element_width: f64,
    n_elements: usize,
    /// nodal values, element-shared, (ORDER * n_elements + 1) entries
    values: Vec<f64>,
}

impl RadialSolution {
    pub fn eval(&self, r: f64) -> f64 {
        let e = ((r / self.element_width) as usize).min(self.n_elements - 1);
        let t = (r - e as f64 * self.element_width) / self.element_width;
        let (vals, _) = lagrange_all(&lobatto_nodes(), t);
        let base = e * ORDER;
        (0..=ORDER).map(|k| self.values[base + k] * vals[k]).sum()
    }
}

/// Solve the radial problem of azimuthal mode `m` with source g(r), using
/// `n_elements` order-4 elements on [0, 2]. `n_elements` must be even so
/// the interface r = 1 is an element boundary.
pub fn solve_radial_mode(
    m: usize,
    n_elements: usize,
    g: impl Fn(f64) -> f64,
) -> Result<RadialSolution> {
    if n_elements % 2 != 0 {
        return Err(Error::Config(
            "radial oracle needs an even element count (interface at r = 1)".into(),
        ));
    }
    let n_nodes = ORDER * n_elements + 1;
    let width = 2.0 / n_elements as f64;
    let nodes = lobatto_nodes();
    let rule = gauss_rule(10);

    let mut k = DMatrix::<f64>::zeros(n_nodes, n_nodes);
    let mut b = DVector::<f64>::zeros(n_nodes);
    for e in 0..n_elements {
        let r0 = e as f64 * width;
        let kappa = if r0 + 0.5 * width < 1.0 { 16.0 } else { 1.0 };
        for (&t, &w) in rule.nodes.iter().zip(&rule.weights) {
            let r = r0 + t * width;
            let (vals, ders) = lagrange_all(&nodes, t);
            let jac = width; // dr = width dt
            for i in 0..=ORDER {
                let gi = e * ORDER + i;
                b[gi] += w * jac * g(r) * vals[i] * r;
                for j in 0..=ORDER {
                    let gj = e * ORDER + j;
                    let mut a = kappa * (ders[i] / width) * (ders[j] / width) * r;
                    if m > 0 {
                        a += kappa * (m * m) as f64 * vals[i] * vals[j] / r;
                    }
                    k[(gi, gj)] += w * jac * a;
                }
            }
        }
    }

    // essential conditions: U(2) = 0 always, U(0) = 0 for m >= 1
    let mut fixed = vec![n_nodes - 1];
    if m > 0 {
        fixed.push(0);
    }
    for &d in &fixed {
        for j in 0..n_nodes {
            k[(d, j)] = 0.0;
            k[(j, d)] = 0.0;
        }
        k[(d, d)] = 1.0;
        b[d] = 0.0;
    }

    let values = k
        .lu()
        .solve(&b)
        .ok_or_else(|| Error::ReferenceRejected("radial oracle solve failed".into()))?;
    Ok(RadialSolution {
        element_width: width,
        n_elements,
        values: values.as_slice().to_vec(),
    })
}

/// Solve all three benchmark modes with the oracle and report the largest
/// relative deviation from the analytic radial profiles over a radius scan.
pub fn annulus_oracle_deviation(n_elements: usize) -> Result<f64> {
    let s = (2.0 + 2.0_f64.sqrt()).sqrt();
    let c = (2.0 - 2.0_f64.sqrt()).sqrt();
    let modes: [(usize, Box<dyn Fn(f64) -> f64>, RadialProfile); 3] = {
        let [p0, ps, pc] = annulus_profiles();
        [
            (0, Box::new(|_| 1.0), p0),
            (
                1,
                Box::new(move |r: f64| if r < 1.0 { 23.5 * s * r } else { s * r }),
                ps,
            ),
            (
                1,
                Box::new(move |r: f64| if r < 1.0 { -23.5 * c * r } else { -c * r }),
                pc,
            ),
        ]
    };

    let mut worst = 0.0f64;
    for (m, g, profile) in modes {
        let oracle = solve_radial_mode(m, n_elements, g)?;
        let scale = (0..200)
            .map(|i| profile.value(2.0 * i as f64 / 199.0).abs())
            .fold(0.0f64, f64::max);
        for i in 0..400 {
            let r = 2.0 * (i as f64 + 0.5) / 400.0;
            let dev = (oracle.eval(r) - profile.value(r)).abs() / scale;
            worst = worst.max(dev);
        }
    }
    Ok(worst)
}
