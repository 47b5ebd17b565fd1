//! Reference elements on the unit square and unit interval.

use crate::legendre;
use nalgebra::DMatrix;

/// Raviart-Thomas element of order q on the reference square:
/// RT^q = Q_{q+1,q} x Q_{q,q+1}, dimension 2(q+1)(q+2).
///
/// Shape functions are stored as coefficient tables over tensor products of
/// shifted Legendre polynomials. The dual basis is taken against
///
/// * edge moments: for each edge e and mode k <= q, the moment of the
///   outward normal trace against L[k] in the canonical edge parameter,
/// * interior moments of the x component against Q_{q-1,q} and of the
///   y component against Q_{q,q-1}, both in tensor Legendre form,
///
/// so the shape dual to edge mode (e, k) has normal trace (2k+1) L[k] on
/// edge e and zero on the other edges. Orientation flips of a shared edge
/// act on the dofs by (-1)^k.
#[derive(Debug, Clone)]
pub struct RTReferenceBasis {
    pub order: usize,
    /// x-component coefficients, (q+2) x (q+1), entry (i, j) on L[i](x) L[j](y)
    comp0: Vec<DMatrix<f64>>,
    /// y-component coefficients, (q+1) x (q+2)
    comp1: Vec<DMatrix<f64>>,
}

/// Shape values and divergences at a fixed point set, laid out
/// `values[point][shape]`.
pub struct RTTabulation {
    pub values: Vec<Vec<[f64; 2]>>,
    pub divergences: Vec<Vec<f64>>,
}

impl RTReferenceBasis {
    pub fn dimension(q: usize) -> usize {
        2 * (q + 1) * (q + 2)
    }

    pub fn new(q: usize) -> Self {
        let n = Self::dimension(q);
        let n_edge = 4 * (q + 1);
        let qq = q + 1;

        // coefficient layout: comp0 entries (i, j), i <= q+1, j <= q, then
        // comp1 entries (i, j), i <= q, j <= q+1
        let c0_len = (q + 2) * qq;
        let idx0 = |i: usize, j: usize| i * qq + j;
        let idx1 = |i: usize, j: usize| c0_len + i * (q + 2) + j;

        let sign = |k: usize| if k % 2 == 0 { 1.0 } else { -1.0 };
        let mut m = DMatrix::<f64>::zeros(n, n);

        // edge moment functionals; analytic via Legendre orthogonality
        for k in 0..qq {
            let w = legendre::norm_sq(k);
            // edge 0: y = 0, normal (0, -1): -w_y(t, 0)
            for j in 0..q + 2 {
                m[(k, idx1(k, j))] = -sign(j) * w;
            }
            // edge 1: x = 1, normal (1, 0): w_x(1, t)
            for i in 0..q + 2 {
                m[(qq + k, idx0(i, k))] = w;
            }
            // edge 2: y = 1, normal (0, 1): w_y(t, 1)
            for j in 0..q + 2 {
                m[(2 * qq + k, idx1(k, j))] = w;
            }
            // edge 3: x = 0, normal (-1, 0): -w_x(0, t)
            for i in 0..q + 2 {
                m[(3 * qq + k, idx0(i, k))] = -sign(i) * w;
            }
        }
        // interior moments
        for a in 0..q {
            for b in 0..qq {
                let row = n_edge + a * qq + b;
                m[(row, idx0(a, b))] = legendre::norm_sq(a) * legendre::norm_sq(b);
            }
        }
        for a in 0..qq {
            for b in 0..q {
                let row = n_edge + q * qq + a * q + b;
                m[(row, idx1(a, b))] = legendre::norm_sq(a) * legendre::norm_sq(b);
            }
        }

        let inv = m
            .try_inverse()
            .expect("RT dof functionals are unisolvent");

        let mut comp0 = Vec::with_capacity(n);
        let mut comp1 = Vec::with_capacity(n);
        for s in 0..n {
            let col = inv.column(s);
            let mut c0 = DMatrix::<f64>::zeros(q + 2, qq);
            let mut c1 = DMatrix::<f64>::zeros(qq, q + 2);
            for i in 0..q + 2 {
                for j in 0..qq {
                    c0[(i, j)] = col[idx0(i, j)];
                }
            }
            for i in 0..qq {
                for j in 0..q + 2 {
                    c1[(i, j)] = col[idx1(i, j)];
                }
            }
            comp0.push(c0);
            comp1.push(c1);
        }
        Self {
            order: q,
            comp0,
            comp1,
        }
    }

    pub fn dim(&self) -> usize {
        self.comp0.len()
    }

    pub fn n_edge_dofs(&self) -> usize {
        4 * (self.order + 1)
    }

    /// Local dof index of edge mode (edge, k).
    pub fn edge_dof(&self, edge: usize, k: usize) -> usize {
        edge * (self.order + 1) + k
    }

    /// Value and divergence of one shape at a reference point.
    pub fn eval(&self, shape: usize, xh: [f64; 2]) -> ([f64; 2], f64) {
        let q = self.order;
        let (px, dpx) = legendre::eval_with_deriv(q + 1, xh[0]);
        let (py, dpy) = legendre::eval_with_deriv(q + 1, xh[1]);
        let c0 = &self.comp0[shape];
        let c1 = &self.comp1[shape];
        let mut wx = 0.0;
        let mut wy = 0.0;
        let mut div = 0.0;
        for i in 0..q + 2 {
            for j in 0..q + 1 {
                wx += c0[(i, j)] * px[i] * py[j];
                div += c0[(i, j)] * dpx[i] * py[j];
            }
        }
        for i in 0..q + 1 {
            for j in 0..q + 2 {
                wy += c1[(i, j)] * px[i] * py[j];
                div += c1[(i, j)] * px[i] * dpy[j];
            }
        }
        ([wx, wy], div)
    }

    pub fn tabulate(&self, points: &[[f64; 2]]) -> RTTabulation {
        let n = self.dim();
        let mut values = Vec::with_capacity(points.len());
        let mut divergences = Vec::with_capacity(points.len());
        for &p in points {
            let mut vals = Vec::with_capacity(n);
            let mut divs = Vec::with_capacity(n);
            for s in 0..n {
                let (v, d) = self.eval(s, p);
                vals.push(v);
                divs.push(d);
            }
            values.push(vals);
            divergences.push(divs);
        }
        RTTabulation {
            values,
            divergences,
        }
    }

    /// Legendre coefficients of the outward normal trace of a shape on an
    /// edge, in the edge's canonical parameter.
    pub fn edge_normal_trace(&self, shape: usize, edge: usize) -> Vec<f64> {
        let q = self.order;
        let c0 = &self.comp0[shape];
        let c1 = &self.comp1[shape];
        let sign = |k: usize| if k % 2 == 0 { 1.0 } else { -1.0 };
        let mut coeffs = vec![0.0; q + 1];
        match edge {
            0 => {
                for (i, c) in coeffs.iter_mut().enumerate() {
                    *c = -(0..q + 2).map(|j| c1[(i, j)] * sign(j)).sum::<f64>();
                }
            }
            1 => {
                for (j, c) in coeffs.iter_mut().enumerate() {
                    *c = (0..q + 2).map(|i| c0[(i, j)]).sum::<f64>();
                }
            }
            2 => {
                for (i, c) in coeffs.iter_mut().enumerate() {
                    *c = (0..q + 2).map(|j| c1[(i, j)]).sum::<f64>();
                }
            }
            3 => {
                for (j, c) in coeffs.iter_mut().enumerate() {
                    *c = -(0..q + 2).map(|i| c0[(i, j)] * sign(i)).sum::<f64>();
                }
            }
            _ => panic!("local edge index out of range: {edge}"),
        }
        coeffs
    }
}

/// Tensor Legendre scalar element Q^q, dimension (q+1)^2. Basis index
/// (i, j) -> i (q+1) + j means L[i](x) L[j](y).
#[derive(Debug, Clone)]
pub struct QReferenceBasis {
    pub order: usize,
}

impl QReferenceBasis {
    pub fn new(order: usize) -> Self {
        Self { order }
    }

    pub fn dim(&self) -> usize {
        (self.order + 1) * (self.order + 1)
    }

    pub fn eval(&self, shape: usize, xh: [f64; 2]) -> f64 {
        let q = self.order;
        let (i, j) = (shape / (q + 1), shape % (q + 1));
        legendre::eval(q, xh[0])[i] * legendre::eval(q, xh[1])[j]
    }

    /// `values[point][shape]`.
    pub fn tabulate(&self, points: &[[f64; 2]]) -> Vec<Vec<f64>> {
        let q = self.order;
        points
            .iter()
            .map(|&p| {
                let px = legendre::eval(q, p[0]);
                let py = legendre::eval(q, p[1]);
                let mut row = Vec::with_capacity(self.dim());
                for i in 0..=q {
                    for j in 0..=q {
                        row.push(px[i] * py[j]);
                    }
                }
                row
            })
            .collect()
    }
}

/// Legendre basis of degree q on the reference interval, the representation
/// of facet polynomials.
#[derive(Debug, Clone)]
pub struct FacetReferenceBasis {
    pub order: usize,
}

impl FacetReferenceBasis {
    pub fn new(order: usize) -> Self {
        Self { order }
    }

    pub fn dim(&self) -> usize {
        self.order + 1
    }

    pub fn eval_all(&self, t: f64) -> Vec<f64> {
        legendre::eval(self.order, t)
    }
}
