//! Topological index of homogenized orbit symbols on the mapping torus
//! `M_Z = T^{d+1}` with the flat metric:
//!
//! `ind_t = Σ_j C_j ∫_{S*M_Z} tr[(σ⁻¹dσ)^{2j−1}] ∧ Td`, `C_j = (j−1)! / ((2πi)^j (2j−1)!)`.
//!
//! The cosphere bundle carries the product orientation: base coordinates
//! `(x₁, …, x_d, t)` first, then the sphere oriented so that
//! (outward normal, tangent frame) is positive in `R^{d+1}`. Only `d = 2` is
//! evaluated: the sphere `S²` uses Gauss–Legendre nodes in `cos θ` and the
//! trapezoid rule in `φ`; the base uses the trapezoid rule.

mod forms;
mod symbols;

use std::f64::consts::PI;
use std::num::NonZeroUsize;

use faer::{c64, Scale};
use gauss_quad::legendre::GaussLegendre;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{inverse, CMat};

pub use forms::{antisymmetrized_trace, field_point, five_form_trace, wedge_with_todd, FieldPoint, FramedPoint, ToddData};
pub use symbols::{
    gamma_matrices, linear_path, CosphereSymbol, DividedByFrozen, FiberEmbedded, FnSymbol, Interpolated, LatticeDirac,
    OrbitCosphere, Reflected,
};

/// Distance to the nearest integer accepted before rounding.
pub const DEFAULT_TOLERANCE: f64 = 0.3;
/// Largest accepted imaginary part of the total.
pub const DEFAULT_IMAG_TOLERANCE: f64 = 0.05;
/// Largest accepted contribution of fibers `|n| > N/2` to the index.
pub const DEFAULT_TRACE_TOLERANCE: f64 = 0.05;

/// `C_j = (j−1)! / ((2πi)^j (2j−1)!)`.
pub fn chern_constant(j: usize) -> c64 {
    let fact = |n: usize| (1..=n).map(|k| k as f64).product::<f64>();
    let two_pi_i = c64::new(0.0, 2.0 * PI);
    c64::new(fact(j - 1) / fact(2 * j - 1), 0.0) / two_pi_i.powi(j as i32)
}

/// Degrees with `n + 1 ≤ 2j − 1 ≤ 2n + 1` for `n = dim M`.
pub fn j_range(d: usize) -> Vec<usize> {
    (1..=d + 1).filter(|j| 2 * j - 1 >= d + 1).collect()
}

pub fn check_dimension(d: usize) -> Result<()> {
    match d {
        2 => Ok(()),
        0 | 1 => Err(Error::UnsupportedDimension {
            d,
            reason: "the topological index is defined only for n > 1 (dim M ≥ 2)".into(),
        }),
        _ => Err(Error::UnsupportedDimension { d, reason: "cosphere quadrature is implemented for d = 2 only".into() }),
    }
}

/// Quadrature grid on `S*M_Z` for `d = 2` and the finite-difference step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MappingTorusGrid {
    /// Points per base coordinate `x₁, x₂, t`.
    pub base_res: usize,
    /// Gauss–Legendre nodes in `cos θ`.
    pub polar_res: usize,
    /// Trapezoid nodes in `φ`.
    pub azimuth_res: usize,
    pub h: f64,
}

impl Default for MappingTorusGrid {
    fn default() -> Self {
        Self { base_res: 8, polar_res: 12, azimuth_res: 24, h: 1.0 / 64.0 }
    }
}

/// A quadrature node with its weight.
#[derive(Clone, Debug)]
pub struct QuadraturePoint {
    pub point: FramedPoint,
    pub weight: f64,
}

impl MappingTorusGrid {
    pub fn validate(&self) -> Result<()> {
        if self.base_res < 2 || self.polar_res < 2 || self.azimuth_res < 3 {
            return Err(Error::Schema(format!("grid too coarse: {self:?}")));
        }
        if !(self.h > 0.0 && self.h < 0.25) {
            return Err(Error::Schema(format!("finite-difference step must lie in (0, 1/4), got {}", self.h)));
        }
        Ok(())
    }

    /// `(cos θ, weight)` pairs.
    fn polar_nodes(&self) -> Vec<(f64, f64)> {
        let n = NonZeroUsize::new(self.polar_res).expect("validated");
        GaussLegendre::new(n).as_node_weight_pairs().to_vec()
    }

    pub fn len(&self) -> usize {
        self.base_res.pow(3) * self.polar_res * self.azimuth_res
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// All nodes for `d = 2`, base-major.
    pub fn points(&self) -> Result<Vec<QuadraturePoint>> {
        self.validate()?;
        let b = self.base_res;
        let polar = self.polar_nodes();
        let dphi = 2.0 * PI / self.azimuth_res as f64;
        let cell = (b as f64).powi(-3) * dphi;
        let mut out = Vec::with_capacity(self.len());
        for i in 0..b.pow(3) {
            let base = vec![(i / (b * b)) as f64 / b as f64, ((i / b) % b) as f64 / b as f64, (i % b) as f64 / b as f64];
            for &(z, wz) in &polar {
                let r = (1.0 - z * z).sqrt();
                for k in 0..self.azimuth_res {
                    let phi = k as f64 * dphi;
                    let (s, c) = phi.sin_cos();
                    out.push(QuadraturePoint {
                        point: FramedPoint {
                            base: base.clone(),
                            omega: vec![r * c, r * s, z],
                            frame: vec![vec![z * c, z * s, -r], vec![-s, c, 0.0]],
                        },
                        weight: wz * cell,
                    });
                }
            }
        }
        Ok(out)
    }

    /// The grid with every resolution scaled up by `3/2` and `h` halved.
    pub fn refined(&self) -> Self {
        let up = |n: usize| n + n.div_ceil(2);
        Self { base_res: up(self.base_res), polar_res: up(self.polar_res), azimuth_res: up(self.azimuth_res), h: self.h / 2.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopoOptions {
    pub tolerance: f64,
    pub imag_tolerance: f64,
    pub trace_tolerance: f64,
    /// Also evaluate on the refined grid and require agreement.
    pub refine: bool,
}

impl Default for TopoOptions {
    fn default() -> Self {
        Self {
            tolerance: DEFAULT_TOLERANCE,
            imag_tolerance: DEFAULT_IMAG_TOLERANCE,
            trace_tolerance: DEFAULT_TRACE_TOLERANCE,
            refine: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TopoStatus {
    Conclusive,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JTerm {
    pub j: usize,
    pub value_re: f64,
    pub value_im: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TopoReport {
    pub status: TopoStatus,
    pub j_terms: Vec<JTerm>,
    pub total: f64,
    pub rounded: i64,
    pub imag_residual: f64,
    pub integrality_defect: f64,
    /// Contribution of fibers `|n| > N/2` (absolute, in index units).
    pub trace_tail: f64,
    pub min_margin: f64,
    pub grid: MappingTorusGrid,
    #[serde(rename = "N")]
    pub window: Option<usize>,
    pub h: f64,
    /// Total on the refined grid, when requested.
    pub refined_total: Option<f64>,
}

/// Rows of a fiber-windowed matrix with `|n| > N/2`.
pub fn tail_rows(window: Option<(usize, usize)>) -> Vec<usize> {
    let Some((blocks, n)) = window else { return Vec::new() };
    let w = 2 * n + 1;
    (0..blocks * w).filter(|r| 2 * ((r % w) as i64 - n as i64).unsigned_abs() as usize > n).collect()
}

/// Lazily evaluated `σ` and `dσ` over a quadrature grid.
pub struct FormField<'a, S: ?Sized> {
    pub symbol: &'a S,
    pub points: Vec<QuadraturePoint>,
    pub h: f64,
}

/// Samples of `σ′` and its partials on `grid`; every node is checked for invertibility when visited.
pub fn build_form_field<'a, S: CosphereSymbol + ?Sized>(symbol: &'a S, grid: &MappingTorusGrid) -> Result<FormField<'a, S>> {
    check_dimension(symbol.d())?;
    Ok(FormField { symbol, points: grid.points()?, h: grid.h })
}

impl<S: CosphereSymbol + ?Sized> FormField<'_, S> {
    pub fn point(&self, i: usize) -> Result<FieldPoint> {
        field_point(self.symbol, &self.points[i].point, self.h)
    }
}

/// Per-node value of `tr[(σ⁻¹dσ)^{2j−1}] ∧ Td` (top coefficient) and its fiber tail.
pub fn chern_integrand(field: &FieldPoint, j: usize, todd: &ToddData, tail: &[usize]) -> (c64, c64) {
    wedge_with_todd(&field.connection(), j, todd, tail)
}

struct Accumulated {
    terms: Vec<c64>,
    tail: f64,
    margin: f64,
}

const CHUNK: usize = 512;

fn integrate<S: CosphereSymbol + ?Sized>(symbol: &S, grid: &MappingTorusGrid) -> Result<Accumulated> {
    let field = build_form_field(symbol, grid)?;
    let todd = ToddData::flat(2 * symbol.d() + 1);
    let js = j_range(symbol.d());
    let tail = tail_rows(symbol.fiber_window());
    let n = field.points.len();
    let chunks: Vec<Result<Accumulated>> = (0..n.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut acc = Accumulated { terms: vec![c64::new(0.0, 0.0); js.len()], tail: 0.0, margin: f64::INFINITY };
            for i in c * CHUNK..n.min((c + 1) * CHUNK) {
                let fp = field.point(i)?;
                let a = fp.connection();
                let w = field.points[i].weight;
                for (slot, &j) in acc.terms.iter_mut().zip(&js) {
                    let (v, t) = wedge_with_todd(&a, j, &todd, &tail);
                    acc.tail += (t * chern_constant(j)).norm() * w;
                    *slot += v * w;
                }
                acc.margin = acc.margin.min(fp.margin);
            }
            Ok(acc)
        })
        .collect();
    let mut acc = Accumulated { terms: vec![c64::new(0.0, 0.0); js.len()], tail: 0.0, margin: f64::INFINITY };
    for r in chunks {
        let r = r?;
        for (a, v) in acc.terms.iter_mut().zip(r.terms) {
            *a += v;
        }
        acc.tail += r.tail;
        acc.margin = acc.margin.min(r.margin);
    }
    Ok(acc)
}

/// `Σ_j C_j ∫ chern_integrand(·, j)` on `grid`.
pub fn topological_index<S: CosphereSymbol + ?Sized>(
    symbol: &S,
    grid: &MappingTorusGrid,
    opts: &TopoOptions,
) -> Result<TopoReport> {
    check_dimension(symbol.d())?;
    let acc = integrate(symbol, grid)?;
    if acc.tail > opts.trace_tolerance {
        return Err(Error::TraceClass { tail: acc.tail, tol: opts.trace_tolerance });
    }
    let js = j_range(symbol.d());
    let values: Vec<c64> = js.iter().zip(&acc.terms).map(|(&j, v)| chern_constant(j) * v).collect();
    let total: c64 = values.iter().sum();
    let rounded = total.re.round();
    let refined_total = if opts.refine { Some(integrate(symbol, &grid.refined())?) } else { None }
        .map(|r| js.iter().zip(&r.terms).map(|(&j, v)| chern_constant(j) * v).sum::<c64>().re);
    let defect = (total.re - rounded).abs();
    let agrees = refined_total.is_none_or(|r| r.round() == rounded && (r - total.re).abs() < opts.tolerance);
    let status = if defect < opts.tolerance && total.im.abs() < opts.imag_tolerance && agrees {
        TopoStatus::Conclusive
    } else {
        TopoStatus::Inconclusive
    };
    Ok(TopoReport {
        status,
        j_terms: js.iter().zip(&values).map(|(&j, v)| JTerm { j, value_re: v.re, value_im: v.im }).collect(),
        total: total.re,
        rounded: rounded as i64,
        imag_residual: total.im.abs(),
        integrality_defect: defect,
        trace_tail: acc.tail,
        min_margin: acc.margin,
        grid: grid.clone(),
        window: symbol.fiber_window().map(|w| w.1),
        h: grid.h,
        refined_total,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HomotopyReport {
    pub parameters: Vec<f64>,
    pub values: Vec<f64>,
    pub max_deviation: f64,
}

/// Topological indices along `path(s)`, `s = k/steps`; aborts at the first step losing invertibility.
pub fn homotopy_invariance_check<S, F>(path: F, steps: usize, grid: &MappingTorusGrid) -> Result<HomotopyReport>
where
    S: CosphereSymbol,
    F: Fn(f64) -> S,
{
    let opts = TopoOptions { tolerance: f64::INFINITY, imag_tolerance: f64::INFINITY, ..TopoOptions::default() };
    let steps = steps.max(1);
    let mut parameters = Vec::with_capacity(steps + 1);
    let mut values = Vec::with_capacity(steps + 1);
    for k in 0..=steps {
        let s = k as f64 / steps as f64;
        let report = topological_index(&path(s), grid, &opts).map_err(|e| match e {
            Error::NonInvertible { location, min_sv } => {
                Error::NonInvertible { location: format!("homotopy step {k} (s = {s}), {location}"), min_sv }
            }
            other => other,
        })?;
        parameters.push(s);
        values.push(report.total);
    }
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(HomotopyReport { parameters, values, max_deviation: hi - lo })
}

fn ambient_eval<S: CosphereSymbol + ?Sized>(symbol: &S, z: &[f64], n_base: usize) -> Result<CMat> {
    let y = &z[n_base..];
    let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    let omega: Vec<f64> = y.iter().map(|v| v / norm).collect();
    symbol.eval(&z[..n_base], &omega)
}

/// Coefficients `ω_ā` of the 5-form `tr(σ⁻¹dσ)⁵` on the ambient space `(x, t, ξ, τ)`,
/// `ā` indexing the omitted coordinate.
fn ambient_coefficients<S: CosphereSymbol + ?Sized>(symbol: &S, z: &[f64], h: f64, only: Option<usize>) -> Result<Vec<c64>> {
    let n_base = symbol.d() + 1;
    let dim = z.len();
    let sigma = ambient_eval(symbol, z, n_base)?;
    let inv = inverse(sigma.as_ref());
    let mut a = Vec::with_capacity(dim);
    for b in 0..dim {
        if only == Some(b) {
            a.push(CMat::zeros(0, 0));
            continue;
        }
        let mut plus = z.to_vec();
        let mut minus = z.to_vec();
        plus[b] += h;
        minus[b] -= h;
        let diff = ambient_eval(symbol, &plus, n_base)? - ambient_eval(symbol, &minus, n_base)?;
        a.push(&inv * diff * Scale(c64::new(0.5 / h, 0.0)));
    }
    Ok((0..dim)
        .map(|omit| {
            if only.is_some_and(|o| o != omit) {
                return c64::new(0.0, 0.0);
            }
            let idx: Vec<usize> = (0..dim).filter(|&i| i != omit).collect();
            five_form_trace([&a[idx[0]], &a[idx[1]], &a[idx[2]], &a[idx[3]], &a[idx[4]]]).0
        })
        .collect())
}

/// `|dω| / max_ā |ω_ā|` at an ambient point `(x, t, y)` with `y ≠ 0`, all
/// derivatives by central differences of step `h`.
pub fn closedness_residual<S: CosphereSymbol + ?Sized>(symbol: &S, base: &[f64], y: &[f64], h: f64) -> Result<f64> {
    check_dimension(symbol.d())?;
    let z: Vec<f64> = base.iter().chain(y).copied().collect();
    let scale = ambient_coefficients(symbol, &z, h, None)?.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let mut d_omega = c64::new(0.0, 0.0);
    for a in 0..z.len() {
        let mut plus = z.clone();
        let mut minus = z.clone();
        plus[a] += h;
        minus[a] -= h;
        let wp = ambient_coefficients(symbol, &plus, h, Some(a))?[a];
        let wm = ambient_coefficients(symbol, &minus, h, Some(a))?[a];
        let sign = if a % 2 == 0 { 1.0 } else { -1.0 };
        d_omega += (wp - wm) * (sign * 0.5 / h);
    }
    Ok(d_omega.norm() / scale.max(f64::MIN_POSITIVE))
}
