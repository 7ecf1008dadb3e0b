//! Pointwise data of `σ⁻¹dσ` and the traces of its wedge powers.

use std::collections::BTreeMap;

use faer::{c64, Scale};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{inverse, CMat};

use super::symbols::CosphereSymbol;

/// A point of the cosphere bundle with an oriented orthonormal frame:
/// the base coordinate directions followed by `frame` (tangent to the sphere).
#[derive(Clone, Debug, PartialEq)]
pub struct FramedPoint {
    pub base: Vec<f64>,
    pub omega: Vec<f64>,
    pub frame: Vec<Vec<f64>>,
}

/// `σ`, `σ⁻¹` and the central-difference partials `∂_a σ` along the frame at one point.
#[derive(Clone, Debug)]
pub struct FieldPoint {
    pub sigma: CMat,
    pub inverse: CMat,
    pub partials: Vec<CMat>,
    /// `1/‖σ⁻¹‖_F`, a lower bound for the smallest singular value of `σ`.
    pub margin: f64,
}

impl FieldPoint {
    /// `A_a = σ⁻¹ ∂_a σ`.
    pub fn connection(&self) -> Vec<CMat> {
        self.partials.iter().map(|p| &self.inverse * p).collect()
    }
}

fn rotate(omega: &[f64], e: &[f64], angle: f64) -> Vec<f64> {
    omega.iter().zip(e).map(|(w, v)| angle.cos() * w + angle.sin() * v).collect()
}

fn invert_checked(sigma: &CMat, location: impl Fn() -> String) -> Result<(CMat, f64)> {
    let inv = inverse(sigma.as_ref());
    let mut fro = 0.0;
    for j in 0..inv.ncols() {
        for i in 0..inv.nrows() {
            fro += inv[(i, j)].norm_sqr();
        }
    }
    let margin = 1.0 / fro.sqrt();
    let scale = crate::linalg::max_abs(sigma.as_ref());
    if !margin.is_finite() || margin <= 1e-12 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::NonInvertible { location: location(), min_sv: if margin.is_finite() { margin } else { 0.0 } });
    }
    Ok((inv, margin))
}

/// Evaluates `σ` and its frame partials with step `h` (geodesic steps on the sphere).
pub fn field_point<S: CosphereSymbol + ?Sized>(symbol: &S, p: &FramedPoint, h: f64) -> Result<FieldPoint> {
    let sigma = symbol.eval(&p.base, &p.omega)?;
    let (inv, margin) = invert_checked(&sigma, || format!("base {:?}, covector {:?}", p.base, p.omega))?;
    let mut partials = Vec::with_capacity(p.base.len() + p.frame.len());
    let scale = c64::new(0.5 / h, 0.0);
    for a in 0..p.base.len() {
        let mut plus = p.base.clone();
        let mut minus = p.base.clone();
        plus[a] += h;
        minus[a] -= h;
        partials.push((symbol.eval(&plus, &p.omega)? - symbol.eval(&minus, &p.omega)?) * Scale(scale));
    }
    for e in &p.frame {
        let plus = symbol.eval(&p.base, &rotate(&p.omega, e, h))?;
        let minus = symbol.eval(&p.base, &rotate(&p.omega, e, -h))?;
        partials.push((plus - minus) * Scale(scale));
    }
    Ok(FieldPoint { sigma, inverse: inv, partials, margin })
}

fn permutations_with_sign(k: usize) -> Vec<(Vec<usize>, f64)> {
    fn go(prefix: &mut Vec<usize>, rest: &mut Vec<usize>, sign: f64, out: &mut Vec<(Vec<usize>, f64)>) {
        if rest.is_empty() {
            out.push((prefix.clone(), sign));
            return;
        }
        for i in 0..rest.len() {
            let v = rest.remove(i);
            prefix.push(v);
            go(prefix, rest, if i % 2 == 0 { sign } else { -sign }, out);
            prefix.pop();
            rest.insert(i, v);
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut (0..k).collect(), 1.0, &mut out);
    out
}

/// `Σ_p sgn(p) tr(A_{p(0)} ⋯ A_{p(k−1)})` by the signed permutation sum.
pub fn antisymmetrized_trace(mats: &[&CMat]) -> c64 {
    let mut total = c64::new(0.0, 0.0);
    for (perm, sign) in permutations_with_sign(mats.len()) {
        let mut prod = mats[perm[0]].clone();
        for &q in &perm[1..] {
            prod = &prod * mats[q];
        }
        total += crate::linalg::trace(prod.as_ref()) * sign;
    }
    total
}

/// The antisymmetrized trace of five matrices together with its diagonal density.
///
/// Cyclicity reduces the 120-term sum to `5 tr(A₀ Q)` where `Q` is the
/// antisymmetrized product of `A₁, …, A₄`, assembled from commutators.
pub fn five_form_trace(a: [&CMat; 5]) -> (c64, Vec<c64>) {
    let comm = |i: usize, j: usize| a[i] * a[j] - a[j] * a[i];
    let (c12, c13, c14) = (comm(1, 2), comm(1, 3), comm(1, 4));
    let (c23, c24, c34) = (comm(2, 3), comm(2, 4), comm(3, 4));
    let q = &c12 * &c34 - &c13 * &c24 + &c14 * &c23 + &c23 * &c14 - &c24 * &c13 + &c34 * &c12;
    let n = q.nrows();
    let a0 = a[0];
    let diag: Vec<c64> = (0..n)
        .map(|i| {
            let mut s = c64::new(0.0, 0.0);
            for k in 0..n {
                s += a0[(i, k)] * q[(k, i)];
            }
            s * 5.0
        })
        .collect();
    (diag.iter().sum(), diag)
}

/// Components of the Todd form in the coordinate coframe, keyed by sorted slot lists.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToddData {
    pub dim: usize,
    pub components: BTreeMap<Vec<usize>, f64>,
}

impl ToddData {
    /// Flat metric: `Td = 1` in degree zero, nothing above.
    pub fn flat(dim: usize) -> Self {
        Self { dim, components: BTreeMap::from([(Vec::new(), 1.0)]) }
    }

    pub fn component(&self, slots: &[usize]) -> f64 {
        self.components.get(slots).copied().unwrap_or(0.0)
    }
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    (0u32..1 << n)
        .filter(|m| m.count_ones() as usize == k)
        .map(|m| (0..n).filter(|i| m >> i & 1 == 1).collect())
        .collect()
}

/// Sign of the shuffle placing `first` before `second`.
fn shuffle_sign(first: &[usize], second: &[usize]) -> f64 {
    let inversions = first.iter().map(|a| second.iter().filter(|b| *b < a).count()).sum::<usize>();
    if inversions % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Top-degree coefficient of `tr[(σ⁻¹dσ)^{2j−1}] ∧ Td` on the frame, and the
/// tail part of its diagonal density selected by `tail_rows`.
pub fn wedge_with_todd(a: &[CMat], j: usize, todd: &ToddData, tail_rows: &[usize]) -> (c64, c64) {
    let dim = a.len();
    let k = 2 * j - 1;
    let mut value = c64::new(0.0, 0.0);
    let mut tail = c64::new(0.0, 0.0);
    if k > dim {
        return (value, tail);
    }
    for s in subsets(dim, k) {
        let rest: Vec<usize> = (0..dim).filter(|i| !s.contains(i)).collect();
        let td = todd.component(&rest);
        if td == 0.0 {
            continue;
        }
        let weight = shuffle_sign(&s, &rest) * td;
        if k == 5 {
            let (v, diag) = five_form_trace([&a[s[0]], &a[s[1]], &a[s[2]], &a[s[3]], &a[s[4]]]);
            value += v * weight;
            tail += tail_rows.iter().map(|&r| diag[r]).sum::<c64>() * weight;
        } else {
            let mats: Vec<&CMat> = s.iter().map(|&i| &a[i]).collect();
            value += antisymmetrized_trace(&mats) * weight;
        }
    }
    (value, tail)
}
