//! Symbols on the cosphere bundle of the mapping torus `T^{d+1}`.

use faer::c64;
use faer::{Mat, Scale};

use crate::error::{Error, Result};
use crate::linalg::{inverse, CMat};
use crate::operator::ShiftOperatorSpec;
use crate::symbol::orbit_symbol;

/// A matrix-valued function of a base point `(x, t)` and a unit covector `ω`
/// (both of length `d + 1`).
pub trait CosphereSymbol: Sync {
    /// Dimension of `M = T^d`.
    fn d(&self) -> usize;
    /// Matrix size.
    fn size(&self) -> usize;
    fn eval(&self, base: &[f64], omega: &[f64]) -> Result<CMat>;
    /// `(blocks, N)` when row `blk·(2N+1) + n + N` carries fiber index `n`.
    fn fiber_window(&self) -> Option<(usize, usize)> {
        None
    }
}

impl<S: CosphereSymbol + ?Sized> CosphereSymbol for &S {
    fn d(&self) -> usize {
        (**self).d()
    }
    fn size(&self) -> usize {
        (**self).size()
    }
    fn eval(&self, base: &[f64], omega: &[f64]) -> Result<CMat> {
        (**self).eval(base, omega)
    }
    fn fiber_window(&self) -> Option<(usize, usize)> {
        (**self).fiber_window()
    }
}

impl<S: CosphereSymbol + ?Sized + Send> CosphereSymbol for Box<S> {
    fn d(&self) -> usize {
        (**self).d()
    }
    fn size(&self) -> usize {
        (**self).size()
    }
    fn eval(&self, base: &[f64], omega: &[f64]) -> Result<CMat> {
        (**self).eval(base, omega)
    }
    fn fiber_window(&self) -> Option<(usize, usize)> {
        (**self).fiber_window()
    }
}

/// Homogenized orbit symbol `σ(x, Rξ, t, Rτ)` at `(ξ, τ) = ω` on the window `|n| ≤ N`.
#[derive(Clone, Debug)]
pub struct OrbitCosphere<'a> {
    pub spec: &'a ShiftOperatorSpec,
    pub radius: f64,
    pub window: usize,
}

impl<'a> OrbitCosphere<'a> {
    pub fn new(spec: &'a ShiftOperatorSpec, radius: f64, window: usize) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::Domain(format!("radius must be positive, got {radius}")));
        }
        if window < spec.max_shift() {
            return Err(Error::InvalidWindow { n: window, max_shift: spec.max_shift() });
        }
        Ok(Self { spec, radius, window })
    }
}

impl CosphereSymbol for OrbitCosphere<'_> {
    fn d(&self) -> usize {
        self.spec.d()
    }
    fn size(&self) -> usize {
        2 * (2 * self.window + 1)
    }
    fn eval(&self, base: &[f64], omega: &[f64]) -> Result<CMat> {
        let d = self.spec.d();
        let xi: Vec<f64> = omega[..d].iter().map(|w| w * self.radius).collect();
        orbit_symbol(self.spec, &base[..d], &xi, base[d], omega[d] * self.radius, self.window)
    }
    fn fiber_window(&self) -> Option<(usize, usize)> {
        Some((2, self.window))
    }
}

fn pauli() -> [[[c64; 2]; 2]; 4] {
    let z = c64::new(0.0, 0.0);
    let o = c64::new(1.0, 0.0);
    let i = c64::new(0.0, 1.0);
    [[[o, z], [z, o]], [[z, o], [o, z]], [[z, -i], [i, z]], [[o, z], [z, -o]]]
}

fn kron2(a: &[[c64; 2]; 2], b: &[[c64; 2]; 2]) -> CMat {
    Mat::from_fn(4, 4, |r, c| a[r / 2][c / 2] * b[r % 2][c % 2])
}

/// Five anticommuting Hermitian `4 × 4` matrices squaring to the identity.
pub fn gamma_matrices() -> [CMat; 5] {
    let s = pauli();
    [kron2(&s[1], &s[1]), kron2(&s[1], &s[2]), kron2(&s[1], &s[3]), kron2(&s[2], &s[0]), kron2(&s[3], &s[0])]
}

/// `g = y₆ + i Σ_a y_a Γ_a` with `y = (sin 2πx₁, sin 2πx₂, sin 2πt, ω₁, ω₂)` and
/// `y₆ = ω₃ + Σ cos 2πx_j − c`: a `4 × 4` symbol on `T³ × S²` whose winding is a
/// step function of the mass `c`.
#[derive(Clone, Debug)]
pub struct LatticeDirac {
    pub mass: f64,
    gammas: [CMat; 5],
}

impl LatticeDirac {
    pub fn new(mass: f64) -> Self {
        Self { mass, gammas: gamma_matrices() }
    }

    /// The map `T³ × S² → R⁶` whose normalization the symbol encodes.
    pub fn vector(&self, base: &[f64], omega: &[f64]) -> [f64; 6] {
        let tau = 2.0 * std::f64::consts::PI;
        let c: f64 = base.iter().map(|v| (tau * v).cos()).sum();
        [(tau * base[0]).sin(), (tau * base[1]).sin(), (tau * base[2]).sin(), omega[0], omega[1], omega[2] + c - self.mass]
    }
}

impl CosphereSymbol for LatticeDirac {
    fn d(&self) -> usize {
        2
    }
    fn size(&self) -> usize {
        4
    }
    fn eval(&self, base: &[f64], omega: &[f64]) -> Result<CMat> {
        let y = self.vector(base, omega);
        let mut g = Mat::from_fn(4, 4, |r, c| if r == c { c64::new(y[5], 0.0) } else { c64::new(0.0, 0.0) });
        for (a, gm) in self.gammas.iter().enumerate() {
            g += gm * Scale(c64::new(0.0, y[a]));
        }
        Ok(g)
    }
}

/// `inner` placed at fiber `n = 0` of `l²(Z) ⊗ C^k`, identity on every other fiber.
#[derive(Clone, Debug)]
pub struct FiberEmbedded<S> {
    pub inner: S,
    pub window: usize,
}

impl<S: CosphereSymbol> CosphereSymbol for FiberEmbedded<S> {
    fn d(&self) -> usize {
        self.inner.d()
    }
    fn size(&self) -> usize {
        self.inner.size() * (2 * self.window + 1)
    }
    fn eval(&self, base: &[f64], omega: &[f64]) -> Result<CMat> {
        let g = self.inner.eval(base, omega)?;
        let w = 2 * self.window + 1;
        let centre = self.window;
        Ok(Mat::from_fn(self.size(), self.size(), |r, c| {
            let (br, nr) = (r / w, r % w);
            let (bc, nc) = (c / w, c % w);
            if nr == centre && nc == centre {
                g[(br, bc)]
            } else if r == c {
                c64::new(1.0, 0.0)
            } else {
                c64::new(0.0, 0.0)
            }
        }))
    }
    fn fiber_window(&self) -> Option<(usize, usize)> {
        Some((self.inner.size(), self.window))
    }
}

/// `(1 − s)σ₀ + sσ₁`.
#[derive(Clone, Debug)]
pub struct Interpolated<A, B> {
    pub start: A,
    pub end: B,
    pub s: f64,
}

impl<A: CosphereSymbol, B: CosphereSymbol> CosphereSymbol for Interpolated<A, B> {
    fn d(&self) -> usize {
        self.start.d()
    }
    fn size(&self) -> usize {
        self.start.size()
    }
    fn eval(&self, base: &[f64], omega: &[f64]) -> Result<CMat> {
        let a = self.start.eval(base, omega)?;
        let b = self.end.eval(base, omega)?;
        if a.shape() != b.shape() {
            return Err(Error::SizeMismatch("path endpoints have different sizes".into()));
        }
        Ok(a * Scale(c64::new(1.0 - self.s, 0.0)) + b * Scale(c64::new(self.s, 0.0)))
    }
    fn fiber_window(&self) -> Option<(usize, usize)> {
        self.start.fiber_window()
    }
}

/// The straight-line path from `start` to `end`.
pub fn linear_path<A, B>(start: A, end: B) -> impl Fn(f64) -> Interpolated<A, B>
where
    A: CosphereSymbol + Clone,
    B: CosphereSymbol + Clone,
{
    move |s| Interpolated { start: start.clone(), end: end.clone(), s }
}

/// `σ(x₁ ↦ −x₁)`: the pullback along a base reflection, which reverses orientation.
#[derive(Clone, Debug)]
pub struct Reflected<S> {
    pub inner: S,
    pub axis: usize,
}

impl<S: CosphereSymbol> CosphereSymbol for Reflected<S> {
    fn d(&self) -> usize {
        self.inner.d()
    }
    fn size(&self) -> usize {
        self.inner.size()
    }
    fn eval(&self, base: &[f64], omega: &[f64]) -> Result<CMat> {
        let mut b = base.to_vec();
        b[self.axis] = -b[self.axis];
        self.inner.eval(&b, omega)
    }
    fn fiber_window(&self) -> Option<(usize, usize)> {
        self.inner.fiber_window()
    }
}

/// `σ(x, ω) m(x)⁻¹` with `m(x) = σ(x, ω₀)`: division by a multiplication-operator symbol.
#[derive(Clone, Debug)]
pub struct DividedByFrozen<S> {
    pub inner: S,
    pub omega0: Vec<f64>,
}

impl<S: CosphereSymbol> CosphereSymbol for DividedByFrozen<S> {
    fn d(&self) -> usize {
        self.inner.d()
    }
    fn size(&self) -> usize {
        self.inner.size()
    }
    fn eval(&self, base: &[f64], omega: &[f64]) -> Result<CMat> {
        let m = self.inner.eval(base, &self.omega0)?;
        Ok(self.inner.eval(base, omega)? * inverse(m.as_ref()))
    }
    fn fiber_window(&self) -> Option<(usize, usize)> {
        self.inner.fiber_window()
    }
}

/// A symbol given by a closure.
#[derive(Clone)]
pub struct FnSymbol<F> {
    pub d: usize,
    pub size: usize,
    pub f: F,
}

impl<F> CosphereSymbol for FnSymbol<F>
where
    F: Fn(&[f64], &[f64]) -> Result<CMat> + Sync,
{
    fn d(&self) -> usize {
        self.d
    }
    fn size(&self) -> usize {
        self.size
    }
    fn eval(&self, base: &[f64], omega: &[f64]) -> Result<CMat> {
        (self.f)(base, omega)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs;

    #[test]
    fn gammas_anticommute() {
        let g = gamma_matrices();
        for a in 0..5 {
            for b in 0..5 {
                let ac = &g[a] * &g[b] + &g[b] * &g[a];
                let want = if a == b { 2.0 } else { 0.0 };
                let id = Mat::<c64>::identity(4, 4) * Scale(c64::new(want, 0.0));
                assert!(max_abs((ac - id).as_ref()) < 1e-15);
            }
        }
    }

    #[test]
    fn lattice_dirac_is_normal_with_modulus_of_y() {
        let s = LatticeDirac::new(2.5);
        let (b, w) = ([0.1, 0.7, 0.3], [0.6, 0.0, 0.8]);
        let g = s.eval(&b, &w).unwrap();
        let y = s.vector(&b, &w);
        let n2: f64 = y.iter().map(|v| v * v).sum();
        let gg = g.adjoint() * &g - Mat::<c64>::identity(4, 4) * Scale(c64::new(n2, 0.0));
        assert!(max_abs(gg.as_ref()) < 1e-13);
    }

    #[test]
    fn embedding_is_identity_off_centre() {
        let e = FiberEmbedded { inner: LatticeDirac::new(2.5), window: 2 };
        let m = e.eval(&[0.1, 0.2, 0.3], &[0.0, 0.0, 1.0]).unwrap();
        assert_eq!(m.nrows(), 20);
        assert_eq!(m[(0, 0)], c64::new(1.0, 0.0));
        assert_eq!(m[(2, 2)], LatticeDirac::new(2.5).eval(&[0.1, 0.2, 0.3], &[0.0, 0.0, 1.0]).unwrap()[(0, 0)]);
    }
}
