use std::f64::consts::PI;

use faer::c64;

use super::{AssembledOperator, Basis, Metadata, OperatorBlock};
use crate::error::{Error, Result};
use crate::linalg::CMat;

/// Hermite functions `h_0 .. h_{H-1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HermiteTruncation {
    pub h: usize,
}

impl HermiteTruncation {
    pub fn new(h: usize) -> Result<Self> {
        if h < 2 {
            return Err(Error::TruncationTooSmall(format!("H = {h}, need H ≥ 2")));
        }
        Ok(Self { h })
    }

    /// Eigenvalue `2n + 2` of `1 + t² − ∂²_t` on `h_n`.
    pub fn oscillator(n: usize) -> f64 {
        2.0 * n as f64 + 2.0
    }
}

/// `h_0(t), …, h_{count-1}(t)` by the three-term recurrence.
pub fn hermite_functions(count: usize, t: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(count);
    if count == 0 {
        return out;
    }
    out.push(PI.powf(-0.25) * (-t * t / 2.0).exp());
    if count > 1 {
        out.push(2f64.sqrt() * t * out[0]);
    }
    for n in 1..count.saturating_sub(1) {
        let next = (2.0 / (n + 1) as f64).sqrt() * t * out[n] - (n as f64 / (n + 1) as f64).sqrt() * out[n - 1];
        out.push(next);
    }
    out
}

/// Matrix of `A = ∂_t + t`: `A h_n = √(2n) h_{n-1}`.
pub(crate) fn a_matrix(h: usize) -> CMat {
    CMat::from_fn(h, h, |m, n| {
        if n >= 1 && m == n - 1 {
            c64::new((2.0 * n as f64).sqrt(), 0.0)
        } else {
            c64::new(0.0, 0.0)
        }
    })
}

/// `A` from order `s` to order `s − 1`, weights `(2n + 2)^{s/2}`.
pub fn assemble_a(h: usize, s: f64) -> Result<AssembledOperator> {
    HermiteTruncation::new(h)?;
    let a = a_matrix(h);
    let w: Vec<f64> = (0..h).map(HermiteTruncation::oscillator).collect();
    let m = CMat::from_fn(h, h, |i, j| a[(i, j)] * (w[i].powf((s - 1.0) / 2.0) * w[j].powf(-s / 2.0)));
    let basis = Basis::Hermite { h };
    AssembledOperator::from_blocks(
        basis.clone(),
        basis,
        vec![OperatorBlock { rows: (0..h).collect(), cols: (0..h).collect(), matrix: m }],
        Metadata { spec_hash: None, k: None, h: Some(h), eps: None, s },
    )
}

/// `S(ε)[m, n] = ⟨h_m, h_n(· + ε)⟩` for any real `ε`.
///
/// Column 0 is `e^{-ε²/4} (−ε/√2)^m / √(m!)`; the remaining columns follow from
/// `S[:, n+1] = (a† S[:, n] + (ε/√2) S[:, n]) / √(n+1)`, which only couples a
/// row to rows above it, so the truncated matrix is exact.
pub fn shift_t_matrix(eps: f64, h: usize) -> CMat {
    let mut s = vec![vec![0.0f64; h]; h];
    let a = -eps / 2f64.sqrt();
    let mut col0 = (-eps * eps / 4.0).exp();
    for m in 0..h {
        if m > 0 {
            col0 *= a / (m as f64).sqrt();
        }
        s[m][0] = col0;
    }
    let half = eps / 2f64.sqrt();
    for n in 0..h.saturating_sub(1) {
        let norm = ((n + 1) as f64).sqrt();
        for m in 0..h {
            let raise = if m > 0 { (m as f64).sqrt() * s[m - 1][n] } else { 0.0 };
            s[m][n + 1] = (raise + half * s[m][n]) / norm;
        }
    }
    CMat::from_fn(h, h, |i, j| c64::new(s[i][j], 0.0))
}

/// The translation `u(t) ↦ u(t + ε)` in the Hermite basis, `ε ∈ [0, 1]`.
pub fn assemble_shift_t(eps: f64, h: usize) -> Result<AssembledOperator> {
    HermiteTruncation::new(h)?;
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::Domain(format!("ε = {eps} outside [0, 1]")));
    }
    let basis = Basis::Hermite { h };
    AssembledOperator::from_blocks(
        basis.clone(),
        basis,
        vec![OperatorBlock { rows: (0..h).collect(), cols: (0..h).collect(), matrix: shift_t_matrix(eps, h) }],
        Metadata { spec_hash: None, k: None, h: Some(h), eps: Some(eps), s: 0.0 },
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermite_functions_are_orthonormal() {
        // trapezoid on [-12, 12] is spectrally accurate for Gaussians
        let (n, h) = (4801, 24.0 / 4800.0);
        let mut gram = [[0.0; 6]; 6];
        for i in 0..n {
            let t = -12.0 + i as f64 * h;
            let v = hermite_functions(6, t);
            for a in 0..6 {
                for b in 0..6 {
                    gram[a][b] += h * v[a] * v[b];
                }
            }
        }
        for a in 0..6 {
            for b in 0..6 {
                let want = if a == b { 1.0 } else { 0.0 };
                assert!((gram[a][b] - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn a_on_three_modes() {
        let a = a_matrix(3);
        assert_eq!(a[(0, 1)].re, 2f64.sqrt());
        assert_eq!(a[(1, 2)].re, 2.0);
        assert_eq!(crate::linalg::max_abs(a.col(0).as_mat()), 0.0);
    }

    #[test]
    fn zero_shift_is_identity() {
        let s = shift_t_matrix(0.0, 6);
        for i in 0..6 {
            for j in 0..6 {
                assert_eq!(s[(i, j)].re, if i == j { 1.0 } else { 0.0 });
            }
        }
        assert!(assemble_shift_t(1.5, 6).is_err());
        assert!(assemble_a(1, 0.0).is_err());
    }
}
