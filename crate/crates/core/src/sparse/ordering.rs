//! Geometric nested dissection.
//!
//! FEM unknowns carry a representative coordinate (cell center, facet
//! midpoint). Recursively bisect the unknowns at the median of the wider
//! coordinate direction, pull the vertex separator (left-part nodes with a
//! neighbor in the right part) out, and order it last. Planar FEM graphs get
//! close to the classical O(n^1.5) flops / O(n log n) fill this way.

/// Returns `perm` with `perm[new] = old`.
pub fn nested_dissection(adj: &[Vec<usize>], coords: &[[f64; 2]]) -> Vec<usize> {
    let n = adj.len();
    assert_eq!(coords.len(), n);
    let mut perm = Vec::with_capacity(n);
    let mut side = vec![0u8; n];
    let mut work: Vec<usize> = (0..n).collect();
    order_recursive(adj, coords, &mut work, &mut side, &mut perm);
    debug_assert_eq!(perm.len(), n);
    perm
}

const LEAF: usize = 24;

fn order_recursive(
    adj: &[Vec<usize>],
    coords: &[[f64; 2]],
    nodes: &mut Vec<usize>,
    side: &mut [u8],
    out: &mut Vec<usize>,
) {
    if nodes.len() <= LEAF {
        out.extend_from_slice(nodes);
        return;
    }

    // split along the wider extent at the median
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for &v in nodes.iter() {
        for d in 0..2 {
            lo[d] = lo[d].min(coords[v][d]);
            hi[d] = hi[d].max(coords[v][d]);
        }
    }
    let axis = if hi[0] - lo[0] >= hi[1] - lo[1] { 0 } else { 1 };
    nodes.sort_unstable_by(|&a, &b| {
        coords[a][axis]
            .total_cmp(&coords[b][axis])
            .then(a.cmp(&b))
    });
    let half = nodes.len() / 2;

    // side marks: 1 = left, 2 = right
    for (k, &v) in nodes.iter().enumerate() {
        side[v] = if k < half { 1 } else { 2 };
    }
    // vertex separator: left nodes adjacent to the right part
    let mut left = Vec::with_capacity(half);
    let mut sep = Vec::new();
    for &v in nodes[..half].iter() {
        if adj[v].iter().any(|&w| side[w] == 2) {
            sep.push(v);
        } else {
            left.push(v);
        }
    }
    let mut right = nodes[half..].to_vec();

    // clear marks before recursing (the slices overlap subproblems)
    for &v in nodes.iter() {
        side[v] = 0;
    }

    order_recursive(adj, coords, &mut left, side, out);
    order_recursive(adj, coords, &mut right, side, out);
    out.extend_from_slice(&sep);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn produces_a_permutation() {
        // grid graph with coordinates
        let n = 15 * 13;
        let idx = |i: usize, j: usize| i * 13 + j;
        let mut adj = vec![Vec::new(); n];
        let mut coords = vec![[0.0; 2]; n];
        for i in 0..15 {
            for j in 0..13 {
                coords[idx(i, j)] = [i as f64, j as f64];
                if i + 1 < 15 {
                    adj[idx(i, j)].push(idx(i + 1, j));
                    adj[idx(i + 1, j)].push(idx(i, j));
                }
                if j + 1 < 13 {
                    adj[idx(i, j)].push(idx(i, j + 1));
                    adj[idx(i, j + 1)].push(idx(i, j));
                }
            }
        }
        let perm = nested_dissection(&adj, &coords);
        let mut sorted = perm.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (0..n).collect::<Vec<_>>());
    }
}
