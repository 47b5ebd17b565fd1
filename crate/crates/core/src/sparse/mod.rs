//! Minimal sparse direct kernel: triplet accumulation, CSC storage, a
//! fill-reducing ordering, and a left-looking LU with partial pivoting.
//!
//! Written in-tree because the build environment provides no sparse solver
//! crate; the systems here are desk-scale (<= ~1e5 unknowns, 2D fill).

mod lu;
mod ordering;

pub use lu::{lu_factor, LuFactors};
pub use ordering::nested_dissection;

use crate::error::{Error, Result};

/// Coordinate-format accumulator; duplicate entries sum.
#[derive(Debug, Clone)]
pub struct Triplets {
    pub nrows: usize,
    pub ncols: usize,
    pub entries: Vec<(usize, usize, f64)>,
}

impl Triplets {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            entries: Vec::new(),
        }
    }

    pub fn push(&mut self, row: usize, col: usize, value: f64) {
        debug_assert!(row < self.nrows && col < self.ncols);
        if value != 0.0 {
            self.entries.push((row, col, value));
        }
    }

    pub fn extend(&mut self, other: &Triplets) {
        self.entries.extend_from_slice(&other.entries);
    }

    pub fn to_csc(&self) -> Csc {
        let mut order: Vec<usize> = (0..self.entries.len()).collect();
        order.sort_unstable_by_key(|&k| {
            let (r, c, _) = self.entries[k];
            (c, r)
        });
        let mut colptr = vec![0usize; self.ncols + 1];
        let mut rowidx: Vec<usize> = Vec::with_capacity(self.entries.len());
        let mut values: Vec<f64> = Vec::with_capacity(self.entries.len());
        let mut prev: Option<(usize, usize)> = None;
        for &k in &order {
            let (r, c, v) = self.entries[k];
            if prev == Some((c, r)) {
                *values.last_mut().unwrap() += v;
            } else {
                rowidx.push(r);
                values.push(v);
                colptr[c + 1] += 1;
                prev = Some((c, r));
            }
        }
        for c in 0..self.ncols {
            colptr[c + 1] += colptr[c];
        }
        Csc {
            nrows: self.nrows,
            ncols: self.ncols,
            colptr,
            rowidx,
            values,
        }
    }
}

/// Compressed sparse column matrix.
#[derive(Debug, Clone)]
pub struct Csc {
    pub nrows: usize,
    pub ncols: usize,
    pub colptr: Vec<usize>,
    pub rowidx: Vec<usize>,
    pub values: Vec<f64>,
}

impl Csc {
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn col(&self, j: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.colptr[j]..self.colptr[j + 1];
        self.rowidx[range.clone()]
            .iter()
            .copied()
            .zip(self.values[range].iter().copied())
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.nrows];
        for j in 0..self.ncols {
            let xj = x[j];
            if xj != 0.0 {
                for (i, v) in self.col(j) {
                    y[i] += v * xj;
                }
            }
        }
        y
    }

    /// Symmetric permutation B = A[p, p] where `perm[new] = old`.
    pub fn permute_symmetric(&self, perm: &[usize]) -> Csc {
        assert_eq!(self.nrows, self.ncols);
        let n = self.ncols;
        let mut inv = vec![0usize; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let mut trip = Triplets::new(n, n);
        for j in 0..n {
            for (i, v) in self.col(j) {
                trip.push(inv[i], inv[j], v);
            }
        }
        trip.to_csc()
    }

    /// Undirected adjacency (pattern of A + A^T without the diagonal).
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        assert_eq!(self.nrows, self.ncols);
        let mut adj = vec![Vec::new(); self.ncols];
        for j in 0..self.ncols {
            for (i, _) in self.col(j) {
                if i != j {
                    adj[i].push(j);
                    adj[j].push(i);
                }
            }
        }
        for list in adj.iter_mut() {
            list.sort_unstable();
            list.dedup();
        }
        adj
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Euclidean norm of a residual b - A x.
pub fn residual_norm(a: &Csc, x: &[f64], b: &[f64]) -> f64 {
    let ax = a.matvec(x);
    ax.iter()
        .zip(b)
        .map(|(y, bi)| (bi - y) * (bi - y))
        .sum::<f64>()
        .sqrt()
}

/// Direct solve with a fill-reducing ordering and one step of iterative
/// refinement. `coords` (one representative point per unknown) steers the
/// nested-dissection ordering; without them the natural order is kept.
pub struct SparseSolver {
    perm: Vec<usize>,
    factors: LuFactors,
    n: usize,
}

impl SparseSolver {
    pub fn factor(a: &Csc, coords: Option<&[[f64; 2]]>) -> Result<Self> {
        assert_eq!(a.nrows, a.ncols);
        let n = a.ncols;
        let perm = match coords {
            Some(c) => {
                assert_eq!(c.len(), n);
                nested_dissection(&a.adjacency(), c)
            }
            None => (0..n).collect(),
        };
        let ap = a.permute_symmetric(&perm);
        let factors = lu_factor(&ap, 0.1).map_err(|col| Error::Singular {
            block: "unknown".into(),
            dof: perm[col],
        })?;
        Ok(Self { perm, factors, n })
    }

    pub fn nnz_factors(&self) -> usize {
        self.factors.nnz()
    }

    /// Solve A x = b; with `refine` an extra refinement pass against the
    /// original matrix polishes the last digits.
    pub fn solve(&self, a: &Csc, b: &[f64], refine: bool) -> Vec<f64> {
        assert_eq!(b.len(), self.n);
        let mut bp = vec![0.0; self.n];
        for (new, &old) in self.perm.iter().enumerate() {
            bp[new] = b[old];
        }
        let xp = self.factors.solve(&bp);
        let mut x = vec![0.0; self.n];
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = xp[new];
        }
        if refine {
            let ax = a.matvec(&x);
            let mut rp = vec![0.0; self.n];
            for (new, &old) in self.perm.iter().enumerate() {
                rp[new] = b[old] - ax[old];
            }
            let dp = self.factors.solve(&rp);
            for (new, &old) in self.perm.iter().enumerate() {
                x[old] += dp[new];
            }
        }
        x
    }
}
