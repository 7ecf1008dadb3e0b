use faer::c64;
use faer::Side;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{assemble_on_torus, AssembledOperator, Metadata, OperatorBlock, DEFAULT_DIMENSION_CAP};
use crate::error::{Error, Result};
use crate::linalg::{full_svd, singular_values, CMat};
use crate::operator::ShiftOperatorSpec;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndexOptions {
    /// Minimal ratio between the smallest retained and the largest discarded singular value.
    pub gap_min: f64,
    pub edge_filter: bool,
    /// A null vector with more than this fraction of its mass on edge modes is an artifact.
    pub edge_mass: f64,
    pub cap: usize,
}

impl Default for IndexOptions {
    fn default() -> Self {
        Self { gap_min: 1e3, edge_filter: true, edge_mass: 0.5, cap: DEFAULT_DIMENSION_CAP }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IndexStatus {
    Conclusive,
    Inconclusive,
}

/// Unit null vector given on its support (global basis indices).
#[derive(Clone, Debug)]
pub struct NullVector {
    pub support: Vec<usize>,
    pub values: Vec<c64>,
    pub edge_mass: f64,
}

impl NullVector {
    /// `⟨e_i, v⟩` for a global basis index `i`.
    pub fn component(&self, i: usize) -> c64 {
        self.support.iter().position(|&s| s == i).map_or(c64::new(0.0, 0.0), |p| self.values[p])
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LevelReport {
    pub meta: Metadata,
    pub rows: usize,
    pub cols: usize,
    pub blocks: usize,
    pub ker: usize,
    pub coker: usize,
    pub index: i64,
    pub gap: f64,
    pub threshold: f64,
    pub artifacts_discarded: usize,
    pub trusted: bool,
    pub smallest_singular_values: Vec<f64>,
    #[serde(skip)]
    pub kernel: Vec<NullVector>,
    #[serde(skip)]
    pub cokernel: Vec<NullVector>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IndexReport {
    pub status: IndexStatus,
    pub ker: usize,
    pub coker: usize,
    pub index: i64,
    pub gap: f64,
    pub converged: bool,
    pub artifacts_discarded: usize,
    pub convergence: Vec<LevelReport>,
}

impl IndexReport {
    pub fn triple(&self) -> (usize, usize, i64) {
        (self.ker, self.coker, self.index)
    }

    pub fn finest(&self) -> &LevelReport {
        self.convergence.last().expect("reports hold at least one level")
    }
}

struct Threshold {
    value: f64,
    gap: f64,
    trusted: bool,
}

/// Kernel threshold from the sorted singular values of all blocks.
///
/// Scanning from the top, the first consecutive ratio of at least `gap_min`
/// separates the spectrum; values are floored at the roundoff level
/// `dim · ε_mach · s_max`, which also acts as a sentinel below the smallest
/// value so that an operator without kernel still exhibits its gap. Without
/// a qualifying jump the geometric midpoint of the largest jump is used and
/// the verdict is marked untrusted.
fn find_threshold(mut svs: Vec<f64>, dim: usize, gap_min: f64) -> Threshold {
    svs.sort_by(|a, b| b.total_cmp(a));
    let s_max = svs.first().copied().unwrap_or(0.0);
    if s_max == 0.0 {
        return Threshold { value: f64::MIN_POSITIVE, gap: f64::INFINITY, trusted: true };
    }
    let floor = dim.max(1) as f64 * f64::EPSILON * s_max;
    let mut w: Vec<f64> = svs.iter().map(|s| s.max(floor)).collect();
    w.push(floor);
    let mut best = (0usize, 0.0f64);
    for i in 0..w.len() - 1 {
        let r = w[i] / w[i + 1];
        if r >= gap_min {
            return Threshold { value: (w[i] * w[i + 1]).sqrt(), gap: r, trusted: true };
        }
        if r > best.1 {
            best = (i, r);
        }
    }
    let i = best.0;
    Threshold { value: (w[i] * w[i + 1]).sqrt(), gap: best.1, trusted: false }
}

/// Rotates an orthonormal null basis so that the edge mass becomes diagonal
/// and splits it into genuine vectors and edge artifacts.
fn split_null_space(
    basis: &CMat,
    support: &[usize],
    edge: &[bool],
    filter: bool,
    edge_mass: f64,
) -> Result<(Vec<NullVector>, usize)> {
    let k = basis.ncols();
    if k == 0 {
        return Ok((Vec::new(), 0));
    }
    let mask: Vec<f64> = support.iter().map(|&g| if edge[g] { 1.0 } else { 0.0 }).collect();
    let p = CMat::from_fn(k, k, |a, b| {
        (0..basis.nrows()).map(|i| basis[(i, a)].conj() * basis[(i, b)] * mask[i]).sum()
    });
    let eig = p
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Linalg(format!("eigendecomposition failed: {e:?}")))?;
    let rotated = basis * eig.U();
    let masses = eig.S().column_vector();
    let mut kept = Vec::new();
    let mut artifacts = 0;
    for a in 0..k {
        let mass = masses[a].re.clamp(0.0, 1.0);
        if filter && mass > edge_mass {
            artifacts += 1;
            continue;
        }
        kept.push(NullVector {
            support: support.to_vec(),
            values: (0..rotated.nrows()).map(|i| rotated[(i, a)]).collect(),
            edge_mass: mass,
        });
    }
    Ok((kept, artifacts))
}

struct BlockNull {
    kernel: Vec<NullVector>,
    cokernel: Vec<NullVector>,
    artifacts: usize,
}

fn block_null_spaces(b: &OperatorBlock, op: &AssembledOperator, svs: &[f64], thr: f64, opts: &IndexOptions) -> Result<BlockNull> {
    let (r, c) = (b.rows.len(), b.cols.len());
    let rank = svs.iter().filter(|&&s| s >= thr).count();
    if rank == r && rank == c {
        return Ok(BlockNull { kernel: Vec::new(), cokernel: Vec::new(), artifacts: 0 });
    }
    let (kbasis, cbasis) = if r == 0 || c == 0 {
        (CMat::identity(c, c), CMat::identity(r, r))
    } else {
        let svd = full_svd(b.matrix.as_ref())?;
        let vk = CMat::from_fn(c, c - rank, |i, j| svd.v[(i, rank + j)]);
        let uk = CMat::from_fn(r, r - rank, |i, j| svd.u[(i, rank + j)]);
        (vk, uk)
    };
    let (kernel, ka) = split_null_space(&kbasis, &b.cols, &op.col_edge, opts.edge_filter, opts.edge_mass)?;
    let (cokernel, ca) = split_null_space(&cbasis, &b.rows, &op.row_edge, opts.edge_filter, opts.edge_mass)?;
    Ok(BlockNull { kernel, cokernel, artifacts: ka + ca })
}

/// Kernel and cokernel of one truncation level.
pub fn analyze(op: &AssembledOperator, opts: &IndexOptions) -> Result<LevelReport> {
    op.check_cap(opts.cap)?;
    let svs: Vec<Vec<f64>> = op
        .blocks
        .par_iter()
        .map(|b| singular_values(b.matrix.as_ref()))
        .collect::<Result<_>>()?;
    let all: Vec<f64> = svs.iter().flatten().copied().collect();
    let thr = find_threshold(all.clone(), op.nrows().max(op.ncols()), opts.gap_min);
    let nulls: Vec<BlockNull> = op
        .blocks
        .par_iter()
        .zip(svs.par_iter())
        .map(|(b, s)| block_null_spaces(b, op, s, thr.value, opts))
        .collect::<Result<_>>()?;
    let mut kernel = Vec::new();
    let mut cokernel = Vec::new();
    let mut artifacts = 0;
    for n in nulls {
        kernel.extend(n.kernel);
        cokernel.extend(n.cokernel);
        artifacts += n.artifacts;
    }
    let mut smallest = all;
    smallest.sort_by(|a, b| a.total_cmp(b));
    smallest.truncate(8);
    Ok(LevelReport {
        meta: op.meta.clone(),
        rows: op.nrows(),
        cols: op.ncols(),
        blocks: op.blocks.len(),
        ker: kernel.len(),
        coker: cokernel.len(),
        index: kernel.len() as i64 - cokernel.len() as i64,
        gap: thr.gap,
        threshold: thr.value,
        artifacts_discarded: artifacts,
        trusted: thr.trusted,
        smallest_singular_values: smallest,
        kernel,
        cokernel,
    })
}

/// Index over a sequence of truncation levels (coarse to fine).
///
/// The verdict is conclusive when the two finest levels both have a clean
/// gap and agree on `(ker, coker, index)`.
pub fn numerical_index(levels: &[AssembledOperator], opts: &IndexOptions) -> Result<IndexReport> {
    if levels.len() < 2 {
        return Err(Error::Schema("numerical_index needs at least two truncation levels".into()));
    }
    let reports: Vec<LevelReport> = levels.iter().map(|op| analyze(op, opts)).collect::<Result<_>>()?;
    let k = reports.len();
    let (a, b) = (&reports[k - 2], &reports[k - 1]);
    let converged = a.trusted && b.trusted && (a.ker, a.coker) == (b.ker, b.coker);
    Ok(IndexReport {
        status: if converged { IndexStatus::Conclusive } else { IndexStatus::Inconclusive },
        ker: b.ker,
        coker: b.coker,
        index: b.index,
        gap: b.gap,
        converged,
        artifacts_discarded: b.artifacts_discarded,
        convergence: reports,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SIndependenceReport {
    pub status: IndexStatus,
    pub consistent: bool,
    pub per_s: Vec<(f64, IndexReport)>,
}

/// Kernel, cokernel and index of Sobolev-weighted torus assemblies across `s_list`.
pub fn s_independence_check(
    spec: &ShiftOperatorSpec,
    k_levels: &[usize],
    s_list: &[f64],
    opts: &IndexOptions,
) -> Result<SIndependenceReport> {
    if s_list.is_empty() {
        return Err(Error::Schema("s_list must not be empty".into()));
    }
    let mut per_s = Vec::with_capacity(s_list.len());
    for &s in s_list {
        let levels: Vec<AssembledOperator> =
            k_levels.iter().map(|&k| assemble_on_torus(spec, k, s)).collect::<Result<_>>()?;
        per_s.push((s, numerical_index(&levels, opts)?));
    }
    let conclusive = per_s.iter().all(|(_, r)| r.status == IndexStatus::Conclusive);
    let first = per_s[0].1.triple();
    let consistent = conclusive && per_s.iter().all(|(_, r)| r.triple() == first);
    Ok(SIndependenceReport {
        status: if conclusive { IndexStatus::Conclusive } else { IndexStatus::Inconclusive },
        consistent,
        per_s,
    })
}

#[cfg(test)]
mod tests {
    use super::super::{assemble_a, Basis};
    use super::*;
    use crate::operator::examples;

    #[test]
    fn threshold_prefers_the_topmost_jump() {
        let t = find_threshold(vec![1.41, 1e-5, 3e-14], 10, 1e3);
        assert!(t.trusted);
        assert!(t.value > 1e-5 && t.value < 1.41);
        let none = find_threshold(vec![2.0, 1.0, 0.5], 3, 1e3);
        assert!(none.trusted && none.value < 0.5);
        let flat = find_threshold(vec![1.0, 1e-2, 1e-4, 1e-6, 1e-8, 1e-10, 1e-12, 1e-14], 8, 1e3);
        assert!(!flat.trusted);
    }

    #[test]
    fn d_dx_has_index_zero() {
        let levels: Vec<_> = [4, 8].iter().map(|&k| assemble_on_torus(&examples::d_dx(0.3), k, 0.0).unwrap()).collect();
        let r = numerical_index(&levels, &IndexOptions::default()).unwrap();
        assert_eq!(r.triple(), (1, 1, 0));
        assert!(r.converged);
    }

    #[test]
    fn a_has_index_one_after_the_edge_filter() {
        let levels = [assemble_a(8, 0.0).unwrap(), assemble_a(16, 0.0).unwrap()];
        let r = numerical_index(&levels, &IndexOptions::default()).unwrap();
        assert_eq!(r.triple(), (1, 0, 1));
        assert_eq!(r.artifacts_discarded, 1);
        let raw = numerical_index(&levels, &IndexOptions { edge_filter: false, ..Default::default() }).unwrap();
        assert_eq!(raw.triple(), (1, 1, 0));
    }

    #[test]
    fn rectangular_blocks_count_structural_null_spaces() {
        let m = CMat::from_fn(2, 3, |i, j| if i == j { c64::new(1.0, 0.0) } else { c64::new(0.0, 0.0) });
        let op = AssembledOperator::from_dense(m, Basis::Generic { dim: 2 }, Basis::Generic { dim: 3 }, Metadata::default()).unwrap();
        let r = analyze(&op, &IndexOptions { edge_filter: false, ..Default::default() }).unwrap();
        assert_eq!((r.ker, r.coker, r.index), (1, 0, 1));
    }

    #[test]
    fn numerical_index_needs_two_levels() {
        let op = assemble_a(4, 0.0).unwrap();
        assert!(numerical_index(&[op], &IndexOptions::default()).is_err());
    }
}
