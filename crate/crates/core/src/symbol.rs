//! Operator-valued symbols on `l²(Z)` and `l²(Z, C²)`, truncated to the window `|n| ≤ N`.
//!
//! Row and column `n + N` of a `b = 1` matrix carry fiber index `n`. Block
//! matrices (`b = 2`) stack two such windows, block index major.

use faer::c64;
use faer::Mat;

use crate::error::{Error, Result};
use crate::linalg::{adjoint, CMat};
use crate::operator::ShiftOperatorSpec;

fn window_dim(n: usize) -> usize {
    2 * n + 1
}

fn check_window(spec: &ShiftOperatorSpec, n: usize) -> Result<()> {
    let max_shift = spec.max_shift();
    if n < max_shift {
        return Err(Error::InvalidWindow { n, max_shift });
    }
    Ok(())
}

fn check_len(spec: &ShiftOperatorSpec, v: &[f64], what: &str) -> Result<()> {
    if v.len() != spec.d() {
        return Err(Error::SizeMismatch(format!("{what} has length {}, expected {}", v.len(), spec.d())));
    }
    Ok(())
}

/// Assembly of `M[n, n+k] = σ(D_k)(x + nθ, ξ)` without the `ξ ≠ 0` guard.
fn assemble(spec: &ShiftOperatorSpec, x: &[f64], xi: &[f64], n: usize) -> Result<CMat> {
    check_len(spec, x, "x")?;
    check_len(spec, xi, "xi")?;
    check_window(spec, n)?;
    let dim = window_dim(n);
    let big_n = n as i64;
    let iso = spec.isometry();
    let xi = iso.codifferential(xi);
    let mut m = Mat::<c64>::zeros(dim, dim);
    for fiber in -big_n..=big_n {
        let xn = iso.orbit_point(x, fiber);
        for (&k, c) in spec.terms() {
            let col = fiber + k;
            if col.abs() <= big_n {
                m[((fiber + big_n) as usize, (col + big_n) as usize)] = c.principal(&xn, xi);
            }
        }
    }
    Ok(m)
}

/// `σ(D)(x, ξ)` on the window `|n| ≤ N`.
pub fn evaluate_symbol(spec: &ShiftOperatorSpec, x: &[f64], xi: &[f64], n: usize) -> Result<CMat> {
    if xi.iter().all(|v| *v == 0.0) {
        return Err(Error::Domain("the symbol is defined for ξ ≠ 0 only".into()));
    }
    assemble(spec, x, xi, n)
}

/// Symbol `iτ + t` of `A = ∂_t + t`.
pub fn a_symbol(t: f64, tau: f64) -> c64 {
    c64::new(t, tau)
}

/// `iτ + t + n`, the symbol of `A` transported along the orbit.
pub fn a_symbol_fiber(t: f64, tau: f64, n: i64) -> c64 {
    c64::new(t + n as f64, tau)
}

/// `[[σ1, σ2], [−σ2†, σ1†]]`.
pub fn external_product(s1: &CMat, s2: &CMat) -> Result<CMat> {
    if s1.nrows() != s2.nrows() || s1.ncols() != s2.ncols() || s1.nrows() != s1.ncols() {
        return Err(Error::SizeMismatch(format!(
            "external product needs equal square factors, got {}x{} and {}x{}",
            s1.nrows(),
            s1.ncols(),
            s2.nrows(),
            s2.ncols()
        )));
    }
    let k = s1.nrows();
    let s1a = adjoint(s1.as_ref());
    let s2a = adjoint(s2.as_ref());
    Ok(Mat::from_fn(2 * k, 2 * k, |i, j| match (i < k, j < k) {
        (true, true) => s1[(i, j)],
        (true, false) => s2[(i, j - k)],
        (false, true) => -s2a[(i - k, j)],
        (false, false) => s1a[(i - k, j - k)],
    }))
}

/// Symbol of the cylinder operator `D̃` at `(x, ξ, t, τ)`; coefficients do not depend on `(t, τ)`.
pub fn cylinder_symbol(spec: &ShiftOperatorSpec, x: &[f64], xi: &[f64], t: f64, tau: f64, n: usize) -> Result<CMat> {
    if xi.iter().all(|v| *v == 0.0) && t == 0.0 && tau == 0.0 {
        return Err(Error::Domain("the cylinder symbol is defined for (ξ, t, τ) ≠ 0 only".into()));
    }
    assemble(spec, x, xi, n)
}

/// Symbol of `D̃ # A`: the external product of `σ(D̃)` with `(iτ + t)·Id`.
pub fn cylinder_product_symbol(
    spec: &ShiftOperatorSpec,
    x: &[f64],
    xi: &[f64],
    t: f64,
    tau: f64,
    n: usize,
) -> Result<CMat> {
    let s1 = cylinder_symbol(spec, x, xi, t, tau, n)?;
    let dim = s1.nrows();
    let a = a_symbol(t, tau);
    let s2 = Mat::from_fn(dim, dim, |i, j| if i == j { a } else { c64::new(0.0, 0.0) });
    external_product(&s1, &s2)
}

/// `σ(D)(x, ξ) # diag_n(iτ + t + n)`, the symbol of the uniformized operator.
pub fn orbit_symbol(spec: &ShiftOperatorSpec, x: &[f64], xi: &[f64], t: f64, tau: f64, n: usize) -> Result<CMat> {
    let s1 = assemble(spec, x, xi, n)?;
    let big_n = n as i64;
    let dim = s1.nrows();
    let s2 = Mat::from_fn(dim, dim, |i, j| {
        if i == j {
            a_symbol_fiber(t, tau, i as i64 - big_n)
        } else {
            c64::new(0.0, 0.0)
        }
    });
    external_product(&s1, &s2)
}

/// The window shift `𝒯`: entry 1 at `(n, n+1)`, zero in the last row.
pub fn window_shift(n: usize) -> CMat {
    let dim = window_dim(n);
    Mat::from_fn(dim, dim, |i, j| if j == i + 1 { c64::new(1.0, 0.0) } else { c64::new(0.0, 0.0) })
}

/// Degree-zero homogenization `σ(x, Rξ/|(ξ,τ)|, t, Rτ/|(ξ,τ)|)` of the orbit symbol.
#[derive(Clone, Debug)]
pub struct Homogenized<'a> {
    pub spec: &'a ShiftOperatorSpec,
    pub radius: f64,
    pub window: usize,
}

impl<'a> Homogenized<'a> {
    pub fn new(spec: &'a ShiftOperatorSpec, radius: f64, window: usize) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::Domain(format!("radius must be positive, got {radius}")));
        }
        check_window(spec, window)?;
        Ok(Self { spec, radius, window })
    }

    pub fn eval(&self, x: &[f64], xi: &[f64], t: f64, tau: f64) -> Result<CMat> {
        let norm = (xi.iter().map(|v| v * v).sum::<f64>() + tau * tau).sqrt();
        if norm == 0.0 {
            return Err(Error::Domain("homogenization needs (ξ, τ) ≠ 0".into()));
        }
        let scale = self.radius / norm;
        let xs: Vec<f64> = xi.iter().map(|v| v * scale).collect();
        orbit_symbol(self.spec, x, &xs, t, tau * scale, self.window)
    }
}

/// `δ(n) = (1 + ξ² + τ² + n²)^{1/2}` on the window, together with an order `s`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightVector {
    pub xi2_plus_tau2: f64,
    pub s: f64,
    pub window: usize,
}

impl WeightVector {
    pub fn new(xi2_plus_tau2: f64, s: f64, window: usize) -> Result<Self> {
        if !(xi2_plus_tau2 >= 0.0) {
            return Err(Error::Domain("ξ² + τ² must be non-negative".into()));
        }
        Ok(Self { xi2_plus_tau2, s, window })
    }

    pub fn at(&self, n: i64) -> f64 {
        (1.0 + self.xi2_plus_tau2 + (n * n) as f64).sqrt()
    }

    /// `δ(n)` for `n = -N..=N`.
    pub fn delta(&self) -> Vec<f64> {
        let big_n = self.window as i64;
        (-big_n..=big_n).map(|n| self.at(n)).collect()
    }

    /// `δ` repeated over `blocks` stacked windows.
    pub fn block_delta(&self, blocks: usize) -> Vec<f64> {
        let d = self.delta();
        (0..blocks).flat_map(|_| d.iter().copied()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::examples;
    use crate::operator::{FirstOrderCoefficient, TorusIsometry};
    use std::f64::consts::PI;

    fn close(a: c64, b: c64) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn d_dx_is_i_identity() {
        let m = evaluate_symbol(&examples::d_dx(0.3), &[0.7], &[1.0], 2).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                let want = if i == j { c64::new(0.0, 1.0) } else { c64::new(0.0, 0.0) };
                assert!(close(m[(i, j)], want));
            }
        }
    }

    #[test]
    fn shift_term_is_superdiagonal() {
        let m = evaluate_symbol(&examples::shifted_d_dx(0.5, 0.3), &[0.0], &[1.0], 1).unwrap();
        for i in 0..3 {
            assert!(close(m[(i, i)], c64::new(0.0, 1.0)));
        }
        assert!(close(m[(0, 1)], c64::new(0.0, 0.5)));
        assert!(close(m[(1, 2)], c64::new(0.0, 0.5)));
        assert!(close(m[(2, 0)], c64::new(0.0, 0.0)));
    }

    #[test]
    fn plane_wave_coefficient_follows_the_orbit() {
        let c = FirstOrderCoefficient::new(1, [(0, vec![1], c64::new(1.0, 0.0))]).unwrap();
        let spec = ShiftOperatorSpec::new(TorusIsometry::new(vec![0.25]).unwrap(), [(0, c)]).unwrap();
        let m = evaluate_symbol(&spec, &[0.0], &[1.0], 3).unwrap();
        for n in -3i64..=3 {
            // c(g^n(0)) evaluated term by term
            let cn = c64::cis(2.0 * PI * (n as f64) * 0.25);
            let want = c64::new(0.0, 1.0) * cn;
            assert!(close(m[((n + 3) as usize, (n + 3) as usize)], want));
        }
    }

    #[test]
    fn domain_and_window_errors() {
        let s = examples::shifted_d_dx(0.5, 0.3);
        assert!(matches!(evaluate_symbol(&s, &[0.0], &[0.0], 2), Err(Error::Domain(_))));
        assert!(matches!(evaluate_symbol(&s, &[0.0], &[1.0], 0), Err(Error::InvalidWindow { .. })));
    }

    #[test]
    fn a_symbol_values() {
        assert_eq!(a_symbol(0.0, 1.0), c64::new(0.0, 1.0));
        assert_eq!(a_symbol(1.0, 0.0), c64::new(1.0, 0.0));
        assert_eq!(a_symbol_fiber(0.5, 2.0, 0), c64::new(0.5, 2.0));
        assert_eq!(a_symbol_fiber(0.0, 0.0, 0), c64::new(0.0, 0.0));
    }

    #[test]
    fn scalar_external_product() {
        let s1 = Mat::from_fn(1, 1, |_, _| c64::new(0.0, 1.0));
        let s2 = Mat::from_fn(1, 1, |_, _| c64::new(1.0, 0.0));
        let p = external_product(&s1, &s2).unwrap();
        let det = p[(0, 0)] * p[(1, 1)] - p[(0, 1)] * p[(1, 0)];
        assert!(close(p[(1, 0)], c64::new(-1.0, 0.0)));
        assert!(close(p[(1, 1)], c64::new(0.0, -1.0)));
        assert!(close(det, c64::new(2.0, 0.0)));
        let z = Mat::<c64>::zeros(2, 2);
        assert!(crate::linalg::max_abs(external_product(&z, &z).unwrap().as_ref()) == 0.0);
        assert!(external_product(&z, &Mat::<c64>::zeros(3, 3)).is_err());
    }

    #[test]
    fn cylinder_product_at_pure_t_direction() {
        let p = cylinder_product_symbol(&examples::d_dx(0.3), &[0.1], &[0.0], 1.0, 0.0, 2).unwrap();
        let k = 5;
        for i in 0..2 * k {
            for j in 0..2 * k {
                let want = if j == i + k {
                    c64::new(1.0, 0.0)
                } else if i == j + k {
                    c64::new(-1.0, 0.0)
                } else {
                    c64::new(0.0, 0.0)
                };
                assert!(close(p[(i, j)], want));
            }
        }
        assert!(cylinder_symbol(&examples::d_dx(0.3), &[0.1], &[0.0], 0.0, 0.0, 2).is_err());
    }

    #[test]
    fn orbit_symbol_blocks() {
        let p = orbit_symbol(&examples::d_dx(0.3), &[0.0], &[1.0], 0.0, 0.0, 1).unwrap();
        for n in 0..3 {
            assert!(close(p[(n, n)], c64::new(0.0, 1.0)));
            assert!(close(p[(n, n + 3)], c64::new(n as f64 - 1.0, 0.0)));
        }
        let q = orbit_symbol(&examples::d_dx(0.3), &[0.0], &[1.0], 0.5, 2.0, 1).unwrap();
        assert!(close(q[(1, 4)], c64::new(0.5, 2.0)));
    }

    #[test]
    fn homogenization_is_degree_zero_and_exact_on_the_sphere() {
        let s = examples::variable_d_dx(0.1, 0.3, 0.4);
        let h = Homogenized::new(&s, 2.0, 3).unwrap();
        let a = h.eval(&[0.2], &[0.3], 0.4, 0.5).unwrap();
        let b = h.eval(&[0.2], &[0.6], 0.4, 1.0).unwrap();
        assert!(crate::linalg::max_abs((&a - &b).as_ref()) < 1e-13);
        let on = h.eval(&[0.2], &[1.2], 0.4, 1.6).unwrap();
        let direct = orbit_symbol(&s, &[0.2], &[1.2], 0.4, 1.6, 3).unwrap();
        assert!(crate::linalg::max_abs((&on - &direct).as_ref()) < 1e-13);
        assert!(h.eval(&[0.2], &[0.0], 0.4, 0.0).is_err());
    }

    #[test]
    fn weights_are_even_and_at_least_one() {
        let w = WeightVector::new(2.0, 1.0, 4).unwrap();
        let d = w.delta();
        assert_eq!(d.len(), 9);
        for i in 0..9 {
            assert!(d[i] >= 1.0);
            assert_eq!(d[i], d[8 - i]);
        }
    }
}
