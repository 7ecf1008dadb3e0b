use std::collections::BTreeSet;
use std::f64::consts::PI;

use faer::c64;

use super::{AssembledOperator, Basis, Metadata, OperatorBlock, DEFAULT_DIMENSION_CAP};
use crate::error::{Error, Result};
use crate::linalg::{connected_components, CMat};
use crate::operator::ShiftOperatorSpec;

/// Fourier modes `m ∈ [-K, K]^d`, enumerated with the last coordinate fastest.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FourierTruncation {
    pub d: usize,
    pub k: usize,
}

impl FourierTruncation {
    pub fn new(d: usize, k: usize) -> Self {
        Self { d, k }
    }

    pub fn size(&self) -> usize {
        (2 * self.k + 1).pow(self.d as u32)
    }

    pub fn mode(&self, mut idx: usize) -> Vec<i64> {
        let w = 2 * self.k + 1;
        let mut m = vec![0i64; self.d];
        for c in (0..self.d).rev() {
            m[c] = (idx % w) as i64 - self.k as i64;
            idx /= w;
        }
        m
    }

    pub fn index(&self, m: &[i64]) -> Option<usize> {
        let k = self.k as i64;
        let w = 2 * self.k + 1;
        let mut idx = 0usize;
        for &v in m {
            if v.abs() > k {
                return None;
            }
            idx = idx * w + (v + k) as usize;
        }
        Some(idx)
    }

    /// `|2πm|²`.
    pub fn laplacian(&self, idx: usize) -> f64 {
        self.mode(idx).iter().map(|v| (2.0 * PI * *v as f64).powi(2)).sum()
    }

    /// Connected components of the coupling graph in which `m` and `m + p` are
    /// linked for every coefficient frequency `p` of the operator.
    pub(crate) fn components(&self, spec: &ShiftOperatorSpec) -> Vec<Vec<usize>> {
        let freqs: BTreeSet<Vec<i64>> = spec
            .terms()
            .values()
            .flat_map(|c| c.modes().iter().map(|md| md.m.clone()))
            .filter(|m| m.iter().any(|v| *v != 0))
            .collect();
        let mut edges = Vec::new();
        for i in 0..self.size() {
            let m = self.mode(i);
            for p in &freqs {
                let r: Vec<i64> = m.iter().zip(p).map(|(a, b)| a + b).collect();
                if let Some(j) = self.index(&r) {
                    edges.push((i, j));
                }
            }
        }
        connected_components(self.size(), edges)
    }
}

/// Unweighted matrix of the single term `D_k T^k` restricted to the modes `comp`.
pub(crate) fn term_block(spec: &ShiftOperatorSpec, f: &FourierTruncation, comp: &[usize], k: i64) -> CMat {
    let local = |g: usize| comp.binary_search(&g).ok();
    let theta = spec.theta();
    let coeff = &spec.terms()[&k];
    let mut out = CMat::zeros(comp.len(), comp.len());
    for (ci, &g) in comp.iter().enumerate() {
        let m = f.mode(g);
        let kmt: f64 = m.iter().zip(theta).map(|(mi, t)| *mi as f64 * k as f64 * t).sum();
        let shift_phase = c64::cis(2.0 * PI * kmt);
        for md in coeff.modes() {
            let r: Vec<i64> = m.iter().zip(&md.m).map(|(a, b)| a + b).collect();
            if let Some(row) = f.index(&r).and_then(local) {
                let deriv = c64::new(0.0, 2.0 * PI * m[md.j] as f64);
                out[(row, ci)] += md.c * deriv * shift_phase;
            }
        }
    }
    out
}

pub(crate) fn check_truncation(spec: &ShiftOperatorSpec, k: usize) -> Result<()> {
    let need = spec.max_frequency() + 1;
    if (k as i64) < need {
        return Err(Error::TruncationTooSmall(format!(
            "K = {k} but the coefficient band needs K ≥ {need}"
        )));
    }
    Ok(())
}

/// Matrix of `D` from Sobolev order `s` to order `s - 1` in the Fourier basis,
/// with weights `(1 + |2πm|²)^{s/2}`.
pub fn assemble_on_torus(spec: &ShiftOperatorSpec, k: usize, s: f64) -> Result<AssembledOperator> {
    assemble(spec, k, Some(s))
}

/// Plain Fourier-coefficient matrix of `D` (no Sobolev weights).
pub fn assemble_on_torus_unweighted(spec: &ShiftOperatorSpec, k: usize) -> Result<AssembledOperator> {
    assemble(spec, k, None)
}

fn assemble(spec: &ShiftOperatorSpec, k: usize, s: Option<f64>) -> Result<AssembledOperator> {
    check_truncation(spec, k)?;
    let f = FourierTruncation::new(spec.d(), k);
    let comps = f.components(spec);
    let largest = comps.iter().map(|c| c.len()).max().unwrap_or(0);
    if largest > DEFAULT_DIMENSION_CAP {
        return Err(Error::DimensionCap { dim: largest, cap: DEFAULT_DIMENSION_CAP });
    }
    let blocks = comps
        .into_iter()
        .map(|comp| {
            let mut m = CMat::zeros(comp.len(), comp.len());
            for &kk in spec.terms().keys() {
                m += term_block(spec, &f, &comp, kk);
            }
            let w: Vec<f64> = comp.iter().map(|&g| 1.0 + f.laplacian(g)).collect();
            let scaled = match s {
                Some(s) => CMat::from_fn(comp.len(), comp.len(), |i, j| {
                    m[(i, j)] * (w[i].powf((s - 1.0) / 2.0) * w[j].powf(-s / 2.0))
                }),
                None => m,
            };
            OperatorBlock { rows: comp.clone(), cols: comp, matrix: scaled }
        })
        .collect();
    let basis = Basis::Fourier { d: spec.d(), k };
    AssembledOperator::from_blocks(
        basis.clone(),
        basis,
        blocks,
        Metadata { spec_hash: Some(spec.spec_hash()), k: Some(k), h: None, eps: None, s: s.unwrap_or(0.0) },
    )
}
