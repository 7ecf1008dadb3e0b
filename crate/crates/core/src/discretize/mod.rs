//! Spectral discretizations in Fourier and Hermite bases and numerical Fredholm indices.
//!
//! Basis conventions:
//! * Fourier modes `m ∈ [-K, K]^d` are enumerated lexicographically, last coordinate fastest.
//! * Hermite functions `h_0 .. h_{H-1}` are `L²(R)`-normalized.
//! * The cylinder basis `C² ⊗ Fourier ⊗ Hermite` uses global index
//!   `block · F·H + fourier · H + hermite` with `F = (2K+1)^d`.
//!
//! Assembled operators are stored as exact diagonal blocks of a permutation
//! of the matrix; every entry outside the blocks vanishes identically.

mod cylinder;
mod hermite;
mod index;
mod torus;

pub use cylinder::assemble_cylinder_product;
pub use hermite::{assemble_a, assemble_shift_t, hermite_functions, shift_t_matrix, HermiteTruncation};
pub use index::{
    analyze, numerical_index, s_independence_check, IndexOptions, IndexReport, IndexStatus, LevelReport, NullVector,
    SIndependenceReport,
};
pub use torus::{assemble_on_torus, assemble_on_torus_unweighted, FourierTruncation};

use faer::c64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{connected_components, CMat};

/// Largest block handed to a dense SVD.
pub const DEFAULT_DIMENSION_CAP: usize = 4096;
/// Fraction of each basis direction that counts as truncation edge.
pub const EDGE_FRACTION: f64 = 0.2;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Basis {
    Fourier { d: usize, k: usize },
    Hermite { h: usize },
    Cylinder { d: usize, k: usize, h: usize },
    Generic { dim: usize },
}

impl Basis {
    pub fn dim(&self) -> usize {
        match *self {
            Basis::Fourier { d, k } => (2 * k + 1).pow(d as u32),
            Basis::Hermite { h } => h,
            Basis::Cylinder { d, k, h } => 2 * (2 * k + 1).pow(d as u32) * h,
            Basis::Generic { dim } => dim,
        }
    }

    /// Whether a basis vector lies in the top `EDGE_FRACTION` of some truncated direction
    /// (the top mode always counts).
    pub fn edge_mask(&self) -> Vec<bool> {
        let top = |len: usize, n: usize| n + 1 == len || n as f64 >= (1.0 - EDGE_FRACTION) * len as f64;
        let fourier_edge = |k: usize, m: &[i64]| m.iter().any(|v| v.unsigned_abs() as f64 > (1.0 - EDGE_FRACTION) * k as f64);
        match *self {
            Basis::Fourier { d, k } => {
                let f = FourierTruncation::new(d, k);
                (0..f.size()).map(|i| fourier_edge(k, &f.mode(i))).collect()
            }
            Basis::Hermite { h } => (0..h).map(|n| top(h, n)).collect(),
            Basis::Cylinder { d, k, h } => {
                let f = FourierTruncation::new(d, k);
                let fm: Vec<bool> = (0..f.size()).map(|i| fourier_edge(k, &f.mode(i))).collect();
                let mut out = Vec::with_capacity(self.dim());
                for _blk in 0..2 {
                    for &e in &fm {
                        for n in 0..h {
                            out.push(e || top(h, n));
                        }
                    }
                }
                out
            }
            Basis::Generic { dim } => (0..dim).map(|i| top(dim, i)).collect(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub spec_hash: Option<String>,
    #[serde(rename = "K")]
    pub k: Option<usize>,
    #[serde(rename = "H")]
    pub h: Option<usize>,
    pub eps: Option<f64>,
    pub s: f64,
}

/// One exact diagonal block: the submatrix on `rows × cols` (global indices, ascending).
#[derive(Clone, Debug)]
pub struct OperatorBlock {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    pub matrix: CMat,
}

/// Finite matrix of an operator with basis bookkeeping.
#[derive(Clone, Debug)]
pub struct AssembledOperator {
    pub row_basis: Basis,
    pub col_basis: Basis,
    pub row_edge: Vec<bool>,
    pub col_edge: Vec<bool>,
    pub blocks: Vec<OperatorBlock>,
    pub meta: Metadata,
}

impl AssembledOperator {
    pub fn from_blocks(row_basis: Basis, col_basis: Basis, blocks: Vec<OperatorBlock>, meta: Metadata) -> Result<Self> {
        let (nr, nc) = (row_basis.dim(), col_basis.dim());
        let mut seen_r = vec![false; nr];
        let mut seen_c = vec![false; nc];
        for b in &blocks {
            if b.matrix.nrows() != b.rows.len() || b.matrix.ncols() != b.cols.len() {
                return Err(Error::SizeMismatch("block matrix does not match its index sets".into()));
            }
            for &r in &b.rows {
                if r >= nr || std::mem::replace(&mut seen_r[r], true) {
                    return Err(Error::SizeMismatch(format!("row index {r} invalid or repeated")));
                }
            }
            for &c in &b.cols {
                if c >= nc || std::mem::replace(&mut seen_c[c], true) {
                    return Err(Error::SizeMismatch(format!("column index {c} invalid or repeated")));
                }
            }
            if b.matrix.as_ref().iter_finite_check() {
                return Err(Error::Linalg("assembled matrix has non-finite entries".into()));
            }
        }
        if seen_r.iter().any(|s| !s) || seen_c.iter().any(|s| !s) {
            return Err(Error::SizeMismatch("blocks must cover every basis index".into()));
        }
        Ok(Self {
            row_edge: row_basis.edge_mask(),
            col_edge: col_basis.edge_mask(),
            row_basis,
            col_basis,
            blocks,
            meta,
        })
    }

    /// Splits a dense matrix into the connected components of its sparsity pattern.
    pub fn from_dense(matrix: CMat, row_basis: Basis, col_basis: Basis, meta: Metadata) -> Result<Self> {
        let (nr, nc) = (matrix.nrows(), matrix.ncols());
        if nr != row_basis.dim() || nc != col_basis.dim() {
            return Err(Error::SizeMismatch(format!(
                "matrix is {nr}x{nc} but the bases have dimensions {} and {}",
                row_basis.dim(),
                col_basis.dim()
            )));
        }
        let mut edges = Vec::new();
        for j in 0..nc {
            for i in 0..nr {
                if matrix[(i, j)] != c64::new(0.0, 0.0) {
                    edges.push((i, nr + j));
                }
            }
        }
        let comps = connected_components(nr + nc, edges);
        let blocks = comps
            .into_iter()
            .map(|comp| {
                let rows: Vec<usize> = comp.iter().copied().filter(|&v| v < nr).collect();
                let cols: Vec<usize> = comp.iter().copied().filter(|&v| v >= nr).map(|v| v - nr).collect();
                let m = CMat::from_fn(rows.len(), cols.len(), |i, j| matrix[(rows[i], cols[j])]);
                OperatorBlock { rows, cols, matrix: m }
            })
            .collect();
        Self::from_blocks(row_basis, col_basis, blocks, meta)
    }

    pub fn nrows(&self) -> usize {
        self.row_basis.dim()
    }

    pub fn ncols(&self) -> usize {
        self.col_basis.dim()
    }

    pub fn largest_block(&self) -> usize {
        self.blocks.iter().map(|b| b.rows.len().max(b.cols.len())).max().unwrap_or(0)
    }

    pub fn to_dense(&self) -> CMat {
        let mut m = CMat::zeros(self.nrows(), self.ncols());
        for b in &self.blocks {
            for (j, &c) in b.cols.iter().enumerate() {
                for (i, &r) in b.rows.iter().enumerate() {
                    m[(r, c)] = b.matrix[(i, j)];
                }
            }
        }
        m
    }

    /// Same operator in reordered bases: new row `i` is old row `row_perm[i]`.
    pub fn permuted(&self, row_perm: &[usize], col_perm: &[usize]) -> Result<Self> {
        let check = |p: &[usize], n: usize| {
            let mut seen = vec![false; n];
            p.len() == n && p.iter().all(|&i| i < n && !std::mem::replace(&mut seen[i], true))
        };
        if !check(row_perm, self.nrows()) || !check(col_perm, self.ncols()) {
            return Err(Error::SizeMismatch("not a permutation".into()));
        }
        let mut inv_r = vec![0; row_perm.len()];
        for (new, &old) in row_perm.iter().enumerate() {
            inv_r[old] = new;
        }
        let mut inv_c = vec![0; col_perm.len()];
        for (new, &old) in col_perm.iter().enumerate() {
            inv_c[old] = new;
        }
        let blocks = self
            .blocks
            .iter()
            .map(|b| OperatorBlock {
                rows: b.rows.iter().map(|&r| inv_r[r]).collect(),
                cols: b.cols.iter().map(|&c| inv_c[c]).collect(),
                matrix: b.matrix.clone(),
            })
            .collect();
        Ok(Self {
            row_basis: Basis::Generic { dim: self.nrows() },
            col_basis: Basis::Generic { dim: self.ncols() },
            row_edge: row_perm.iter().map(|&o| self.row_edge[o]).collect(),
            col_edge: col_perm.iter().map(|&o| self.col_edge[o]).collect(),
            blocks,
            meta: self.meta.clone(),
        })
    }

    pub(crate) fn check_cap(&self, cap: usize) -> Result<()> {
        let dim = self.largest_block();
        if dim > cap {
            return Err(Error::DimensionCap { dim, cap });
        }
        Ok(())
    }
}

trait FiniteCheck {
    fn iter_finite_check(&self) -> bool;
}

impl FiniteCheck for faer::MatRef<'_, c64> {
    /// True when some entry is not finite.
    fn iter_finite_check(&self) -> bool {
        (0..self.ncols()).any(|j| (0..self.nrows()).any(|i| !(self[(i, j)].re.is_finite() && self[(i, j)].im.is_finite())))
    }
}
