//! Left-looking sparse LU with threshold partial pivoting
//! (Gilbert-Peierls). The pattern of each column of L^{-1} a_j is found by
//! depth-first search over the columns of L already computed, so the total
//! work is proportional to the floating-point operations performed.

/// LU factors of a (permuted) square matrix. Row pivoting is recorded in
/// `pinv`: original row r became pivot row `pinv[r]`.
#[derive(Debug, Clone)]
pub struct LuFactors {
    n: usize,
    /// columns of L, unit diagonal implicit, entries (original row, value)
    l_cols: Vec<Vec<(usize, f64)>>,
    /// columns of U, entries (pivot-order row, value), diagonal last
    u_cols: Vec<Vec<(usize, f64)>>,
    /// pivot position -> original row
    row_of: Vec<usize>,
}

/// Factor a square CSC matrix. `pivot_tol` in (0, 1]: the diagonal entry is
/// kept as pivot when it is at least `pivot_tol` times the largest candidate
/// (1.0 gives plain partial pivoting). Returns the offending column on
/// structural or numerical singularity.
pub fn lu_factor(a: &super::Csc, pivot_tol: f64) -> Result<LuFactors, usize> {
    assert_eq!(a.nrows, a.ncols);
    let n = a.ncols;
    const UNPIVOTED: usize = usize::MAX;

    let mut l_cols: Vec<Vec<(usize, f64)>> = Vec::with_capacity(n);
    let mut u_cols: Vec<Vec<(usize, f64)>> = Vec::with_capacity(n);
    let mut pinv = vec![UNPIVOTED; n];
    let mut row_of = vec![UNPIVOTED; n];

    let mut x = vec![0.0f64; n];
    let mut mark = vec![0u32; n];
    let mut stamp = 0u32;
    let mut pattern: Vec<usize> = Vec::with_capacity(n);
    let mut dfs_stack: Vec<(usize, usize)> = Vec::new();

    for j in 0..n {
        stamp += 1;
        pattern.clear();

        // symbolic: reachable rows from the nonzeros of column j
        for (r, _) in a.col(j) {
            if mark[r] == stamp {
                continue;
            }
            dfs_stack.push((r, 0));
            mark[r] = stamp;
            while let Some(&mut (node, ref mut next)) = dfs_stack.last_mut() {
                let c = pinv[node];
                if c == UNPIVOTED {
                    pattern.push(node);
                    dfs_stack.pop();
                    continue;
                }
                let col = &l_cols[c];
                let mut descended = false;
                while *next < col.len() {
                    let child = col[*next].0;
                    *next += 1;
                    if mark[child] != stamp {
                        mark[child] = stamp;
                        dfs_stack.push((child, 0));
                        descended = true;
                        break;
                    }
                }
                if descended {
                    continue;
                }
                pattern.push(node);
                dfs_stack.pop();
            }
        }

        // numeric: x = L^{-1} a_j on the pattern (reverse post-order is a
        // topological order of the elimination dependencies)
        for (r, v) in a.col(j) {
            x[r] = v;
        }
        for idx in (0..pattern.len()).rev() {
            let r = pattern[idx];
            let c = pinv[r];
            if c == UNPIVOTED {
                continue;
            }
            let xr = x[r];
            if xr != 0.0 {
                for &(r2, lv) in &l_cols[c] {
                    x[r2] -= lv * xr;
                }
            }
        }

        // pivot among unpivoted rows
        let mut best = UNPIVOTED;
        let mut best_abs = 0.0f64;
        let mut diag_abs = -1.0f64;
        for &r in &pattern {
            if pinv[r] == UNPIVOTED {
                let ax = x[r].abs();
                if ax > best_abs {
                    best_abs = ax;
                    best = r;
                }
                if r == j {
                    diag_abs = ax;
                }
            }
        }
        if best == UNPIVOTED || best_abs == 0.0 {
            return Err(j);
        }
        let pivot_row = if diag_abs >= pivot_tol * best_abs && diag_abs > 0.0 {
            j
        } else {
            best
        };
        let pivot = x[pivot_row];

        // distribute entries into U (pivoted rows) and L (the rest)
        let mut ucol = Vec::new();
        let mut lcol = Vec::new();
        for &r in &pattern {
            let val = x[r];
            x[r] = 0.0;
            if val == 0.0 && r != pivot_row {
                continue;
            }
            let c = pinv[r];
            if c != UNPIVOTED {
                ucol.push((c, val));
            } else if r != pivot_row {
                lcol.push((r, val / pivot));
            }
        }
        ucol.sort_unstable_by_key(|e| e.0);
        ucol.push((j, pivot));
        pinv[pivot_row] = j;
        row_of[j] = pivot_row;
        l_cols.push(lcol);
        u_cols.push(ucol);
    }

    Ok(LuFactors {
        n,
        l_cols,
        u_cols,
        row_of,
    })
}

impl LuFactors {
    pub fn nnz(&self) -> usize {
        self.l_cols.iter().map(Vec::len).sum::<usize>()
            + self.u_cols.iter().map(Vec::len).sum::<usize>()
    }

    /// Solve A x = b for the factored matrix.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n);
        // forward solve L y = P b, working in original row indexing
        let mut work = b.to_vec();
        let mut y = vec![0.0; self.n];
        for c in 0..self.n {
            let t = work[self.row_of[c]];
            y[c] = t;
            if t != 0.0 {
                for &(r, v) in &self.l_cols[c] {
                    work[r] -= v * t;
                }
            }
        }
        // backward solve U x = y in pivot ordering
        for j in (0..self.n).rev() {
            let &(dj, dv) = self.u_cols[j].last().expect("diagonal stored last");
            debug_assert_eq!(dj, j);
            let xj = y[j] / dv;
            y[j] = xj;
            if xj != 0.0 {
                for &(r, v) in &self.u_cols[j][..self.u_cols[j].len() - 1] {
                    y[r] -= v * xj;
                }
            }
        }
        y
    }
}
