//! Direct solvers for the assembled saddle-point system.
//!
//! `solve_full` factors the symmetrized matrix as a whole (sparse LU with a
//! nested-dissection ordering, or dense below 2000 unknowns). Alternatively
//! `condense_skeleton` eliminates all flux and scalar unknowns patch by
//! patch, leaving a dense system on the hybrid skeleton unknowns only; the
//! hybrid dofs are the globally coupled ones, so the per-patch blocks
//! [[A_p, B_p], [B_p^T, -D_p]] decouple and stay nonsingular for every
//! tau >= 0 (each cell keeps all of its edge dofs inside its patch, so the
//! divergence hits the whole scalar space).

use crate::assembly::{dof_coordinates, BlockSystem};
use crate::error::{Error, Result};
use crate::mesh::{FacetKind, Mesh};
use crate::sparse::{residual_norm, Csc, SparseSolver, Triplets};
use crate::spaces::{DofMap, Solution};
use nalgebra::{DMatrix, DVector};

/// Size cap for the dense debugging fallback.
pub const DENSE_THRESHOLD: usize = 2000;

/// How the linear system was factored.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FactorizationKind {
    SparseLu,
    DenseLu,
    PatchCondensed,
}

/// Outcome of a linear solve; the residual contract is part of success.
#[derive(Debug, Clone)]
pub struct LinearSolveReport {
    pub residual: f64,
    pub kind: FactorizationKind,
    pub n: usize,
    /// nonzeros in the factors (0 for dense paths)
    pub nnz_factors: usize,
}

const RESIDUAL_CONTRACT: f64 = 1e-10;

fn block_of(system: &BlockSystem, dof: usize) -> &'static str {
    if dof < system.scalar_offset() {
        "flux"
    } else if dof < system.hybrid_offset() {
        "scalar"
    } else {
        "hybrid"
    }
}

fn check_contract(residual: f64) -> Result<f64> {
    if residual.is_finite() && residual <= RESIDUAL_CONTRACT {
        Ok(residual)
    } else {
        Err(Error::ResidualContract { residual })
    }
}

fn relative_residual(m: &Csc, x: &[f64], b: &[f64]) -> f64 {
    let bnorm = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    if bnorm == 0.0 {
        return x.iter().map(|v| v * v).sum::<f64>().sqrt();
    }
    residual_norm(m, x, b) / bnorm
}

/// Solve the full saddle-point system with the sparse LU (the default).
pub fn solve_full(
    mesh: &Mesh,
    dofmap: &DofMap,
    system: &BlockSystem,
) -> Result<(Solution, LinearSolveReport)> {
    let n = system.total();
    let m = system.full_matrix();
    let b = system.full_rhs();

    let coords = dof_coordinates(mesh, dofmap);
    let solver = SparseSolver::factor(&m, Some(&coords)).map_err(|e| match e {
        Error::Singular { dof, .. } => Error::Singular {
            block: block_of(system, dof).into(),
            dof,
        },
        other => other,
    })?;
    let nnz = solver.nnz_factors();
    let x = solver.solve(&m, &b, true);

    let residual = check_contract(relative_residual(&m, &x, &b))?;
    Ok((
        Solution::from_stacked(dofmap, &x),
        LinearSolveReport {
            residual,
            kind: FactorizationKind::SparseLu,
            n,
            nnz_factors: nnz,
        },
    ))
}

/// Dense debugging fallback; refuses systems of DENSE_THRESHOLD unknowns or
/// more.
pub fn solve_full_dense(
    dofmap: &DofMap,
    system: &BlockSystem,
) -> Result<(Solution, LinearSolveReport)> {
    let n = system.total();
    if n >= DENSE_THRESHOLD {
        return Err(Error::Config(format!(
            "dense fallback capped at {DENSE_THRESHOLD} unknowns, system has {n}"
        )));
    }
    let m = system.full_matrix();
    let b = system.full_rhs();
    let mut dense = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        for (i, v) in m.col(j) {
            dense[(i, j)] += v;
        }
    }
    let x = dense
        .lu()
        .solve(&DVector::from_column_slice(&b))
        .ok_or(Error::Singular {
            block: "saddle".into(),
            dof: 0,
        })?;
    let x = x.as_slice().to_vec();
    let residual = check_contract(relative_residual(&m, &x, &b))?;
    Ok((
        Solution::from_stacked(dofmap, &x),
        LinearSolveReport {
            residual,
            kind: FactorizationKind::DenseLu,
            n,
            nnz_factors: 0,
        },
    ))
}

/// One patch's eliminated block: the factored [[A_p, B_p], [B_p^T, -D_p]],
/// its coupling columns to the hybrid unknowns, and its right-hand side.
struct PatchElimination {
    /// stacked [flux | scalar] dof indices owned by the patch
    dofs: Vec<usize>,
    k: Csc,
    factor: SparseSolver,
    /// coupling rows, local x hybrid
    l: Csc,
    b: Vec<f64>,
}

/// Condensed skeleton system with recovery data.
pub struct SkeletonSystem {
    patches: Vec<PatchElimination>,
    /// dense condensed matrix on the hybrid unknowns
    s: DMatrix<f64>,
    rhs: DVector<f64>,
    n_hybrid: usize,
}

/// Eliminate all per-patch flux and scalar unknowns. The condensed system
/// couples only the hybrid unknowns: S = G + L^T K^{-1} L with
/// S mu = L^T K^{-1} b_x.
pub fn condense_skeleton(
    mesh: &Mesh,
    dofmap: &DofMap,
    system: &BlockSystem,
) -> Result<SkeletonSystem> {
    let n_x = system.n_flux + system.n_scalar;
    let n_mu = system.n_hybrid;

    // patch ownership per stacked x-dof
    let mut owner = vec![usize::MAX; n_x];
    for (fid, facet) in mesh.facets.iter().enumerate() {
        let plus_patch = mesh.cells[facet.plus.cell].patch;
        for k in dofmap.facet_flux_block(fid, 0) {
            owner[k] = plus_patch;
        }
        if facet.kind == FacetKind::Skeleton {
            let minus_patch = mesh.cells[facet.minus.expect("skeleton").cell].patch;
            for k in dofmap.facet_flux_block(fid, 1) {
                owner[k] = minus_patch;
            }
        }
    }
    let n_interior = 2 * dofmap.order * (dofmap.order + 1);
    for (cid, cell) in mesh.cells.iter().enumerate() {
        let dofs = &dofmap.cell_flux[cid];
        for dof in &dofs[dofs.len() - n_interior..] {
            owner[dof.global] = cell.patch;
        }
        for k in dofmap.scalar_block(cid) {
            owner[system.n_flux + k] = cell.patch;
        }
    }
    debug_assert!(owner.iter().all(|&p| p != usize::MAX));

    let coords = dof_coordinates(mesh, dofmap);
    let full_rhs = system.full_rhs();

    let mut s = DMatrix::<f64>::zeros(n_mu, n_mu);
    for j in 0..n_mu {
        for (i, v) in system.g.col(j) {
            s[(i, j)] += v;
        }
    }
    let mut rhs = DVector::<f64>::zeros(n_mu);

    let mut patches = Vec::with_capacity(mesh.n_patches);
    for patch in 0..mesh.n_patches {
        let dofs: Vec<usize> = (0..n_x).filter(|&d| owner[d] == patch).collect();
        let mut local = vec![usize::MAX; n_x];
        for (li, &d) in dofs.iter().enumerate() {
            local[d] = li;
        }
        let np = dofs.len();

        // K_p = [[A, B], [B^T, -D]] restricted to the patch
        let mut ktrip = Triplets::new(np, np);
        for j in 0..system.n_flux {
            if local[j] == usize::MAX {
                continue;
            }
            for (i, v) in system.a.col(j) {
                if local[i] != usize::MAX {
                    ktrip.push(local[i], local[j], v);
                }
            }
        }
        for j in 0..system.n_scalar {
            let gj = system.n_flux + j;
            if local[gj] == usize::MAX {
                continue;
            }
            for (i, v) in system.b.col(j) {
                if local[i] != usize::MAX {
                    ktrip.push(local[i], local[gj], v);
                    ktrip.push(local[gj], local[i], v);
                }
            }
            for (i, v) in system.d.col(j) {
                let gi = system.n_flux + i;
                if local[gi] != usize::MAX {
                    ktrip.push(local[gi], local[gj], -v);
                }
            }
        }
        let k = ktrip.to_csc();

        // L_p = [[C], [E]] rows of the patch
        let mut ltrip = Triplets::new(np, n_mu);
        for j in 0..n_mu {
            for (i, v) in system.c.col(j) {
                if local[i] != usize::MAX {
                    ltrip.push(local[i], j, v);
                }
            }
            for (i, v) in system.e.col(j) {
                let gi = system.n_flux + i;
                if local[gi] != usize::MAX {
                    ltrip.push(local[gi], j, v);
                }
            }
        }
        let l = ltrip.to_csc();

        let b: Vec<f64> = dofs.iter().map(|&d| full_rhs[d]).collect();
        let patch_coords: Vec<[f64; 2]> = dofs.iter().map(|&d| coords[d]).collect();
        let factor = SparseSolver::factor(&k, Some(&patch_coords)).map_err(|e| match e {
            Error::Singular { dof, .. } => Error::Singular {
                block: format!("patch {patch}"),
                dof,
            },
            other => other,
        })?;

        // accumulate L^T K^{-1} L and L^T K^{-1} b
        let zb = factor.solve(&k, &b, true);
        for j in 0..n_mu {
            let mut lj = vec![0.0; np];
            let mut nonzero = false;
            for (i, v) in l.col(j) {
                lj[i] = v;
                nonzero = true;
            }
            if !nonzero {
                continue;
            }
            let z = factor.solve(&k, &lj, true);
            for i in 0..n_mu {
                let mut acc = 0.0;
                for (r, v) in l.col(i) {
                    acc += v * z[r];
                }
                s[(i, j)] += acc;
            }
        }
        for i in 0..n_mu {
            let mut acc = 0.0;
            for (r, v) in l.col(i) {
                acc += v * zb[r];
            }
            rhs[i] += acc;
        }

        patches.push(PatchElimination {
            dofs,
            k,
            factor,
            l,
            b,
        });
    }

    Ok(SkeletonSystem {
        patches,
        s,
        rhs,
        n_hybrid: n_mu,
    })
}

impl SkeletonSystem {
    /// Dimension of the condensed system (the hybrid unknowns).
    pub fn dim(&self) -> usize {
        self.n_hybrid
    }

    /// Solve the condensed system and recover the per-patch unknowns.
    /// The reported residual is measured against the full saddle system.
    pub fn solve(
        &self,
        dofmap: &DofMap,
        system: &BlockSystem,
    ) -> Result<(Solution, LinearSolveReport)> {
        let mu = if self.n_hybrid > 0 {
            self.s
                .clone()
                .lu()
                .solve(&self.rhs)
                .ok_or(Error::Singular {
                    block: "skeleton".into(),
                    dof: 0,
                })?
        } else {
            DVector::zeros(0)
        };

        let mut x = vec![0.0; system.total()];
        for (k, v) in mu.iter().enumerate() {
            x[system.hybrid_offset() + k] = *v;
        }
        for patch in &self.patches {
            // x_p = K^{-1} (b_p - L_p mu)
            let mut rhs = patch.b.clone();
            for j in 0..self.n_hybrid {
                let mj = mu[j];
                if mj != 0.0 {
                    for (i, v) in patch.l.col(j) {
                        rhs[i] -= v * mj;
                    }
                }
            }
            let xp = patch.factor.solve(&patch.k, &rhs, true);
            for (li, &d) in patch.dofs.iter().enumerate() {
                x[d] = xp[li];
            }
        }

        let m = system.full_matrix();
        let residual = check_contract(relative_residual(&m, &x, &system.full_rhs()))?;
        let nnz = self.patches.iter().map(|p| p.factor.nnz_factors()).sum();
        Ok((
            Solution::from_stacked(dofmap, &x),
            LinearSolveReport {
                residual,
                kind: FactorizationKind::PatchCondensed,
                n: system.total(),
                nnz_factors: nnz,
            },
        ))
    }
}

/// Which solve path a study run uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverChoice {
    Full,
    Condensed,
}

/// Dispatch on the configured solver.
pub fn solve(
    mesh: &Mesh,
    dofmap: &DofMap,
    system: &BlockSystem,
    choice: SolverChoice,
) -> Result<(Solution, LinearSolveReport)> {
    match choice {
        SolverChoice::Full => solve_full(mesh, dofmap, system),
        SolverChoice::Condensed => condense_skeleton(mesh, dofmap, system)?.solve(dofmap, system),
    }
}
