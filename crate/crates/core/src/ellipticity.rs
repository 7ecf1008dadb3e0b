//! Ellipticity certificates from singular values of truncated symbol matrices.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{max_singular_value, min_singular_value, section_min_sv, CMat};
use crate::operator::ShiftOperatorSpec;
use crate::symbol::{evaluate_symbol, orbit_symbol, WeightVector};

pub const DEFAULT_TOL: f64 = 1e-6;
pub const DEFAULT_N_SCHEDULE: [usize; 4] = [8, 16, 32, 64];
pub const DEFAULT_R_SCHEDULE: [f64; 5] = [1.0, 2.0, 4.0, 8.0, 16.0];
/// Relative change between the last two levels below which a trace counts as stabilized.
pub const STABILIZATION: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Elliptic,
    NotElliptic,
    Inconclusive,
}

/// Sample points on the cosphere bundle: a uniform base grid, unit covectors
/// and, for the orbit operator, a grid in `t ∈ [0, 1)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CosphereGrid {
    pub base_res: usize,
    pub sphere_res: usize,
    pub t_res: usize,
}

impl Default for CosphereGrid {
    fn default() -> Self {
        Self { base_res: 16, sphere_res: 16, t_res: 16 }
    }
}

impl CosphereGrid {
    pub fn new(base_res: usize, sphere_res: usize, t_res: usize) -> Result<Self> {
        if base_res < 4 || sphere_res < 4 || t_res < 4 {
            return Err(Error::Schema("cosphere grids need at least 4 samples per coordinate".into()));
        }
        Ok(Self { base_res, sphere_res, t_res })
    }

    pub fn uniform(res: usize) -> Result<Self> {
        Self::new(res, res, res)
    }

    /// Uniform grid on `T^d`, last coordinate fastest.
    pub fn base_points(&self, d: usize) -> Vec<Vec<f64>> {
        let g = self.base_res;
        let total = g.pow(d as u32);
        (0..total)
            .map(|mut idx| {
                let mut x = vec![0.0; d];
                for c in (0..d).rev() {
                    x[c] = (idx % g) as f64 / g as f64;
                    idx /= g;
                }
                x
            })
            .collect()
    }

    pub fn t_points(&self) -> Vec<f64> {
        (0..self.t_res).map(|i| i as f64 / self.t_res as f64).collect()
    }

    /// Sample of the unit sphere in `R^k`.
    pub fn unit_sphere(&self, k: usize) -> Result<Vec<Vec<f64>>> {
        let r = self.sphere_res;
        match k {
            1 => Ok(vec![vec![1.0], vec![-1.0]]),
            2 => Ok((0..r)
                .map(|i| {
                    let a = 2.0 * PI * i as f64 / r as f64;
                    vec![a.cos(), a.sin()]
                })
                .collect()),
            3 => {
                let mut pts = Vec::with_capacity(r * r);
                for i in 0..r {
                    let polar = PI * (i as f64 + 0.5) / r as f64;
                    for j in 0..r {
                        let az = 2.0 * PI * j as f64 / r as f64;
                        pts.push(vec![polar.sin() * az.cos(), polar.sin() * az.sin(), polar.cos()]);
                    }
                }
                Ok(pts)
            }
            _ => Err(Error::UnsupportedDimension {
                d: k,
                reason: "sphere sampling is implemented up to S²".into(),
            }),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymbolPoint {
    pub x: Vec<f64>,
    pub xi: Vec<f64>,
    pub t: f64,
    pub tau: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RProfileEntry {
    pub r: f64,
    pub min_sv: f64,
    pub status: Verdict,
    pub trace: Vec<(usize, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EllipticityReport {
    pub status: Verdict,
    pub is_elliptic: bool,
    pub min_sv: f64,
    pub argmin: SymbolPoint,
    pub trace: Vec<(usize, f64)>,
    #[serde(rename = "R_found")]
    pub r_found: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub r_profile: Vec<RProfileEntry>,
    /// Largest singular value seen on the sweep; the threshold is `tol · scale`.
    pub scale: f64,
    pub tol: f64,
}

/// Smallest singular value of a square matrix.
pub fn min_singular_value_of(m: &CMat) -> Result<f64> {
    if m.nrows() != m.ncols() {
        return Err(Error::SizeMismatch("min_singular_value expects a square matrix".into()));
    }
    min_singular_value(m.as_ref())
}

/// `σ_s = δ^{s-1} σ δ^{-s}` for a diagonal weight `δ`.
pub fn rescale_sigma_s(sigma: &CMat, delta: &[f64], s: f64) -> Result<CMat> {
    if delta.len() != sigma.nrows() || sigma.nrows() != sigma.ncols() {
        return Err(Error::SizeMismatch("weight length must match the square symbol".into()));
    }
    let left: Vec<f64> = delta.iter().map(|d| d.powf(s - 1.0)).collect();
    let right: Vec<f64> = delta.iter().map(|d| d.powf(-s)).collect();
    Ok(CMat::from_fn(sigma.nrows(), sigma.ncols(), |i, j| sigma[(i, j)] * (left[i] * right[j])))
}

/// Indices of the inner window `|n| ≤ n` inside `blocks` stacked windows of half width `outer`.
pub fn interior_indices(n: usize, outer: usize, blocks: usize) -> Vec<usize> {
    let w = 2 * outer + 1;
    let e = outer - n;
    (0..blocks).flat_map(|b| (e..e + 2 * n + 1).map(move |i| b * w + i)).collect()
}

fn extension(spec: &ShiftOperatorSpec) -> usize {
    spec.max_shift().max(1)
}

/// Smallest singular value of `σ(D)(x, ξ)` on the window `N`, measured by
/// rectangular sections of the symbol evaluated on the window `N + max|k|`.
pub fn symbol_min_sv(spec: &ShiftOperatorSpec, x: &[f64], xi: &[f64], n: usize) -> Result<(f64, f64)> {
    let e = extension(spec);
    let m = evaluate_symbol(spec, x, xi, n + e)?;
    let inner = interior_indices(n, n + e, 1);
    Ok((section_min_sv(m.as_ref(), &inner)?, max_singular_value(m.as_ref())?))
}

/// Smallest singular value of the rescaled orbit symbol `σ_s` on the window `N`.
pub fn orbit_sigma_s_min_sv(
    spec: &ShiftOperatorSpec,
    p: &SymbolPoint,
    n: usize,
    s: f64,
) -> Result<(f64, f64)> {
    let e = extension(spec);
    let outer = n + e;
    let sigma = orbit_symbol(spec, &p.x, &p.xi, p.t, p.tau, outer)?;
    let xi2: f64 = p.xi.iter().map(|v| v * v).sum::<f64>() + p.tau * p.tau;
    let delta = WeightVector::new(xi2, s, outer)?.block_delta(2);
    let scaled = rescale_sigma_s(&sigma, &delta, s)?;
    let inner = interior_indices(n, outer, 2);
    Ok((section_min_sv(scaled.as_ref(), &inner)?, max_singular_value(scaled.as_ref())?))
}

/// Aitken extrapolation of the last three values; true when the sequence is
/// monotonically decreasing with a limit indistinguishable from zero.
pub fn decays_to_zero(values: &[f64]) -> bool {
    if values.len() < 3 {
        return false;
    }
    let k = values.len();
    let (s1, s2, s3) = (values[k - 3], values[k - 2], values[k - 1]);
    let (d1, d2) = (s2 - s1, s3 - s2);
    if !(d1 < 0.0 && d2 < 0.0 && d2.abs() < d1.abs()) {
        return false;
    }
    let limit = s3 - d2 * d2 / (d2 - d1);
    limit < 0.1 * s3
}

/// Verdict for a sequence of minima over increasing truncation levels.
pub fn classify_trace(values: &[f64], threshold: f64) -> Verdict {
    let Some(&last) = values.last() else {
        return Verdict::Inconclusive;
    };
    if last < threshold {
        return Verdict::NotElliptic;
    }
    if values.len() >= 2 {
        let prev = values[values.len() - 2];
        if (last - prev).abs() / last < STABILIZATION {
            return Verdict::Elliptic;
        }
    }
    if decays_to_zero(values) {
        return Verdict::NotElliptic;
    }
    Verdict::Inconclusive
}

fn validate_schedule(n_schedule: &[usize], tol: f64) -> Result<()> {
    if n_schedule.len() < 2 || n_schedule.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Schema("N schedule must contain at least two strictly increasing levels".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::Schema("tolerance must be positive".into()));
    }
    Ok(())
}

struct Sweep {
    trace: Vec<(usize, f64)>,
    argmin: SymbolPoint,
    scale: f64,
}

fn sweep<F>(points: Vec<SymbolPoint>, n_schedule: &[usize], eval: F) -> Result<Sweep>
where
    F: Fn(&SymbolPoint, usize) -> Result<(f64, f64)> + Sync,
{
    let per_point: Vec<Result<(Vec<f64>, f64)>> = points
        .par_iter()
        .map(|p| {
            let mut svs = Vec::with_capacity(n_schedule.len());
            let mut scale = 0.0f64;
            for &n in n_schedule {
                let (sv, top) = eval(p, n)?;
                svs.push(sv);
                scale = scale.max(top);
            }
            Ok((svs, scale))
        })
        .collect();
    let mut trace: Vec<(usize, f64)> = n_schedule.iter().map(|&n| (n, f64::INFINITY)).collect();
    let mut scale = 0.0f64;
    let mut arg = 0usize;
    for (pi, r) in per_point.into_iter().enumerate() {
        let (svs, top) = r?;
        scale = scale.max(top);
        for (slot, sv) in trace.iter_mut().zip(&svs) {
            slot.1 = slot.1.min(*sv);
        }
        if *svs.last().unwrap() <= trace.last().unwrap().1 {
            arg = pi;
        }
    }
    Ok(Sweep { trace, argmin: points[arg].clone(), scale })
}

/// Ellipticity of `D`: invertibility of `σ(D)(x, ξ)` on `T^d × S^{d-1}`.
pub fn check_elliptic(
    spec: &ShiftOperatorSpec,
    grid: &CosphereGrid,
    n_schedule: &[usize],
    tol: f64,
) -> Result<EllipticityReport> {
    validate_schedule(n_schedule, tol)?;
    let d = spec.d();
    let dirs = grid.unit_sphere(d)?;
    let points: Vec<SymbolPoint> = grid
        .base_points(d)
        .into_iter()
        .flat_map(|x| dirs.iter().map(move |xi| SymbolPoint { x: x.clone(), xi: xi.clone(), t: 0.0, tau: 0.0 }))
        .collect();
    let sw = sweep(points, n_schedule, |p, n| symbol_min_sv(spec, &p.x, &p.xi, n))?;
    let values: Vec<f64> = sw.trace.iter().map(|t| t.1).collect();
    let status = classify_trace(&values, tol * sw.scale);
    Ok(EllipticityReport {
        status,
        is_elliptic: status == Verdict::Elliptic,
        min_sv: *values.last().unwrap(),
        argmin: sw.argmin,
        trace: sw.trace,
        r_found: None,
        r_profile: Vec::new(),
        scale: sw.scale,
        tol,
    })
}

/// Points `(x, t, (ξ, τ))` with `|(ξ, τ)| = r`.
pub fn orbit_points(grid: &CosphereGrid, d: usize, r: f64) -> Result<Vec<SymbolPoint>> {
    let dirs = grid.unit_sphere(d + 1)?;
    let ts = grid.t_points();
    let mut out = Vec::new();
    for x in grid.base_points(d) {
        for &t in &ts {
            for w in &dirs {
                out.push(SymbolPoint {
                    x: x.clone(),
                    xi: w[..d].iter().map(|v| v * r).collect(),
                    t,
                    tau: w[d] * r,
                });
            }
        }
    }
    Ok(out)
}

/// Ellipticity of the orbit operator: uniform invertibility of the normalized
/// orbit symbol `δ^{-1}σ` on `|(ξ, τ)| = R` for `R` in the schedule.
pub fn check_elliptic_orbit(
    spec: &ShiftOperatorSpec,
    grid: &CosphereGrid,
    r_schedule: &[f64],
    n_schedule: &[usize],
    tol: f64,
) -> Result<EllipticityReport> {
    validate_schedule(n_schedule, tol)?;
    if r_schedule.is_empty() || r_schedule.windows(2).any(|w| w[0] >= w[1]) || r_schedule[0] <= 0.0 {
        return Err(Error::Schema("R schedule must be positive and strictly increasing".into()));
    }
    let d = spec.d();
    let mut profile = Vec::with_capacity(r_schedule.len());
    let mut worst: Option<(f64, SymbolPoint, Vec<(usize, f64)>)> = None;
    let mut scale = 0.0f64;
    for &r in r_schedule {
        let pts = orbit_points(grid, d, r)?;
        let sw = sweep(pts, n_schedule, |p, n| orbit_sigma_s_min_sv(spec, p, n, 0.0))?;
        let values: Vec<f64> = sw.trace.iter().map(|t| t.1).collect();
        let status = classify_trace(&values, tol * sw.scale);
        let v = *values.last().unwrap();
        scale = scale.max(sw.scale);
        if worst.as_ref().is_none_or(|w| v < w.0) {
            worst = Some((v, sw.argmin.clone(), sw.trace.clone()));
        }
        profile.push(RProfileEntry { r, min_sv: v, status, trace: sw.trace });
    }
    let r_values: Vec<f64> = profile.iter().map(|p| p.min_sv).collect();
    let decaying = decays_to_zero(&r_values);
    let first_good = (0..profile.len())
        .find(|&i| profile[i..].iter().all(|p| p.status == Verdict::Elliptic));
    let r_found = if decaying { None } else { first_good.map(|i| profile[i].r) };
    let last = profile.last().unwrap().status;
    let status = if r_found.is_some() {
        Verdict::Elliptic
    } else if decaying || last == Verdict::NotElliptic {
        Verdict::NotElliptic
    } else {
        Verdict::Inconclusive
    };
    let (_, argmin, trace) = worst.unwrap();
    let min_sv = match r_found {
        Some(r0) => profile.iter().filter(|p| p.r >= r0).map(|p| p.min_sv).fold(f64::INFINITY, f64::min),
        None => profile.iter().map(|p| p.min_sv).fold(f64::INFINITY, f64::min),
    };
    Ok(EllipticityReport {
        status,
        is_elliptic: status == Verdict::Elliptic,
        min_sv,
        argmin,
        trace,
        r_found,
        r_profile: profile,
        scale,
        tol,
    })
}
