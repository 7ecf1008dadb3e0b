//! Thin wrappers over `faer` for the dense complex linear algebra used throughout.

use faer::linalg::solvers::DenseSolveCore;
use faer::prelude::*;
use faer::{Mat, MatRef};
use petgraph::unionfind::UnionFind;

use crate::error::{Error, Result};

pub type CMat = Mat<c64>;

/// Singular values in descending order.
pub fn singular_values(m: MatRef<'_, c64>) -> Result<Vec<f64>> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Ok(Vec::new());
    }
    m.singular_values()
        .map_err(|e| Error::Linalg(format!("singular value iteration failed: {e:?}")))
}

/// Smallest singular value of a matrix (the `min(m, n)`-th one).
pub fn min_singular_value(m: MatRef<'_, c64>) -> Result<f64> {
    Ok(singular_values(m)?.last().copied().unwrap_or(0.0))
}

pub fn max_singular_value(m: MatRef<'_, c64>) -> Result<f64> {
    Ok(singular_values(m)?.first().copied().unwrap_or(0.0))
}

/// Full singular value decomposition `m = U diag(s) V†` with `s` descending.
pub struct FullSvd {
    pub u: CMat,
    pub s: Vec<f64>,
    pub v: CMat,
}

pub fn full_svd(m: MatRef<'_, c64>) -> Result<FullSvd> {
    let svd = m
        .svd()
        .map_err(|e| Error::Linalg(format!("SVD failed: {e:?}")))?;
    let k = m.nrows().min(m.ncols());
    let s_col = svd.S().column_vector();
    let s = (0..k).map(|i| s_col[i].re).collect();
    Ok(FullSvd {
        u: svd.U().to_owned(),
        s,
        v: svd.V().to_owned(),
    })
}

/// Smallest singular value over the two rectangular sections of `m` that keep
/// the `interior` columns (resp. rows) and all rows (resp. columns).
///
/// For a window-truncated band operator evaluated on an enlarged window, the
/// column section measures `inf ‖Mv‖/‖v‖` over vectors supported in the
/// interior and the row section does the same for `M†`; both are free of the
/// spurious small singular values produced by square truncation.
pub fn section_min_sv(m: MatRef<'_, c64>, interior: &[usize]) -> Result<f64> {
    let cols = Mat::from_fn(m.nrows(), interior.len(), |i, j| m[(i, interior[j])]);
    let rows = Mat::from_fn(interior.len(), m.ncols(), |i, j| m[(interior[i], j)]);
    Ok(min_singular_value(cols.as_ref())?.min(min_singular_value(rows.as_ref())?))
}

/// Conjugate transpose as an owned matrix.
pub fn adjoint(m: MatRef<'_, c64>) -> CMat {
    m.adjoint().to_owned()
}

/// Inverse via partial-pivot LU.
pub fn inverse(m: MatRef<'_, c64>) -> CMat {
    m.partial_piv_lu().inverse()
}

/// `A⁻¹ B` via partial-pivot LU.
pub fn solve(a: MatRef<'_, c64>, b: MatRef<'_, c64>) -> CMat {
    a.partial_piv_lu().solve(b)
}

pub fn max_abs(m: MatRef<'_, c64>) -> f64 {
    let mut best = 0.0f64;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            best = best.max(m[(i, j)].norm());
        }
    }
    best
}

pub fn trace(m: MatRef<'_, c64>) -> c64 {
    let mut acc = c64::new(0.0, 0.0);
    for i in 0..m.nrows().min(m.ncols()) {
        acc += m[(i, i)];
    }
    acc
}

/// Connected components of the undirected graph on `n` vertices, returned as
/// sorted vertex lists ordered by their smallest vertex.
pub fn connected_components(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Vec<Vec<usize>> {
    let mut uf = UnionFind::<usize>::new(n);
    for (a, b) in edges {
        uf.union(a, b);
    }
    let labels = uf.into_labeling();
    let mut slot = vec![usize::MAX; n];
    let mut comps: Vec<Vec<usize>> = Vec::new();
    for v in 0..n {
        let root = labels[v];
        if slot[root] == usize::MAX {
            slot[root] = comps.len();
            comps.push(Vec::new());
        }
        comps[slot[root]].push(v);
    }
    comps
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn singular_values_of_diagonal() {
        let m = Mat::from_fn(3, 3, |i, j| if i == j { c64::new(0.0, (i + 1) as f64) } else { c64::new(0.0, 0.0) });
        let s = singular_values(m.as_ref()).unwrap();
        assert!((s[0] - 3.0).abs() < 1e-14 && (s[2] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn full_svd_reconstructs() {
        let m = Mat::from_fn(4, 3, |i, j| c64::new((i * 3 + j) as f64 * 0.1, (i as f64 - j as f64).sin()));
        let f = full_svd(m.as_ref()).unwrap();
        let mut sig = Mat::<c64>::zeros(4, 3);
        for (i, s) in f.s.iter().enumerate() {
            sig[(i, i)] = c64::new(*s, 0.0);
        }
        let r = &f.u * &sig * f.v.adjoint();
        assert!(max_abs((&r - &m).as_ref()) < 1e-12);
    }

    #[test]
    fn components_are_ordered() {
        let c = connected_components(5, [(0, 3), (4, 1)]);
        assert_eq!(c, vec![vec![0, 3], vec![1, 4], vec![2]]);
    }
}
