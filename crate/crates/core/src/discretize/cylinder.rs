use faer::c64;

use super::hermite::{a_matrix, shift_t_matrix, HermiteTruncation};
use super::torus::{check_truncation, term_block, FourierTruncation};
use super::{AssembledOperator, Basis, Metadata, OperatorBlock};
use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::operator::ShiftOperatorSpec;

fn kron(a: &CMat, b: &CMat) -> CMat {
    let (br, bc) = (b.nrows(), b.ncols());
    CMat::from_fn(a.nrows() * br, a.ncols() * bc, |i, j| a[(i / br, j / bc)] * b[(i % br, j % bc)])
}

/// `B_ε = [[D̃_ε, I⊗A], [−I⊗A†, D̃_ε†]]` with `D̃_ε = Σ_k (D_k T^k) ⊗ S(kε)`,
/// mapping cylinder Sobolev order `s` to `s − 1` with weights
/// `(1 + |2πm|² + 2n + 1)^{s/2}`. `ε = 1` gives `D̃ # A`.
///
/// Blocks are the Fourier coupling components of `D`, each tensored with the
/// full Hermite range and both `C²` components. A block larger than `cap`
/// is an error.
pub fn assemble_cylinder_product(
    spec: &ShiftOperatorSpec,
    k: usize,
    h: usize,
    eps: f64,
    s: f64,
    cap: usize,
) -> Result<AssembledOperator> {
    assemble(spec, k, h, eps, Some(s), cap)
}

pub(crate) fn assemble(
    spec: &ShiftOperatorSpec,
    k: usize,
    h: usize,
    eps: f64,
    s: Option<f64>,
    cap: usize,
) -> Result<AssembledOperator> {
    check_truncation(spec, k)?;
    HermiteTruncation::new(h)?;
    if !eps.is_finite() {
        return Err(Error::Domain("ε must be finite".into()));
    }
    let f = FourierTruncation::new(spec.d(), k);
    let comps = f.components(spec);
    let largest = comps.iter().map(|c| 2 * c.len() * h).max().unwrap_or(0);
    if largest > cap {
        return Err(Error::DimensionCap { dim: largest, cap });
    }
    let fh = f.size() * h;
    let a = a_matrix(h);
    let shifts: Vec<(i64, CMat)> = spec.terms().keys().map(|&kk| (kk, shift_t_matrix(kk as f64 * eps, h))).collect();
    let blocks = comps
        .into_iter()
        .map(|comp| {
            let c = comp.len();
            let n = c * h;
            let mut dt = CMat::zeros(n, n);
            for (kk, sm) in &shifts {
                dt += kron(&term_block(spec, &f, &comp, *kk), sm);
            }
            let ia = kron(&CMat::identity(c, c), &a);
            let dta = dt.adjoint().to_owned();
            let iaa = ia.adjoint().to_owned();
            let weight: Vec<f64> = comp
                .iter()
                .flat_map(|&g| {
                    let lap = f.laplacian(g);
                    (0..h).map(move |hn| 1.0 + lap + HermiteTruncation::oscillator(hn) - 1.0)
                })
                .collect();
            let mat = CMat::from_fn(2 * n, 2 * n, |i, j| {
                let v = match (i < n, j < n) {
                    (true, true) => dt[(i, j)],
                    (true, false) => ia[(i, j - n)],
                    (false, true) => -iaa[(i - n, j)],
                    (false, false) => dta[(i - n, j - n)],
                };
                match s {
                    Some(s) if v != c64::new(0.0, 0.0) => {
                        v * (weight[i % n].powf((s - 1.0) / 2.0) * weight[j % n].powf(-s / 2.0))
                    }
                    _ => v,
                }
            });
            let global = |blk: usize| comp.iter().flat_map(move |&g| (0..h).map(move |hn| blk * fh + g * h + hn));
            let idx: Vec<usize> = global(0).chain(global(1)).collect();
            OperatorBlock { rows: idx.clone(), cols: idx, matrix: mat }
        })
        .collect();
    let basis = Basis::Cylinder { d: spec.d(), k, h };
    AssembledOperator::from_blocks(
        basis.clone(),
        basis,
        blocks,
        Metadata { spec_hash: Some(spec.spec_hash()), k: Some(k), h: Some(h), eps: Some(eps), s: s.unwrap_or(0.0) },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::examples;

    #[test]
    fn block_structure_and_cap() {
        let spec = examples::cauchy_riemann(0.2, 0.3, [0.4, 0.7]);
        let op = assemble_cylinder_product(&spec, 3, 4, 1.0, 0.0, 4096).unwrap();
        assert_eq!(op.blocks.len(), 7);
        assert_eq!(op.largest_block(), 2 * 7 * 4);
        assert!(matches!(assemble_cylinder_product(&spec, 3, 4, 1.0, 0.0, 50), Err(Error::DimensionCap { .. })));
    }

    #[test]
    fn zero_epsilon_is_a_plain_tensor_product() {
        let spec = examples::shifted_d_dx(0.5, 0.3);
        let b = assemble(&spec, 2, 3, 0.0, None, 4096).unwrap().to_dense();
        let d = super::super::assemble_on_torus_unweighted(&spec, 2).unwrap().to_dense();
        let fh = 5 * 3;
        for i in 0..5 {
            for j in 0..5 {
                for n in 0..3 {
                    assert!((b[(i * 3 + n, j * 3 + n)] - d[(i, j)]).norm() < 1e-13);
                    assert!((b[(fh + i * 3 + n, fh + j * 3 + n)] - d[(j, i)].conj()).norm() < 1e-13);
                }
            }
        }
    }
}
