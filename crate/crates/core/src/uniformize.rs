//! Sampled versions of the transforms relating functions on the cylinder
//! `T^d × R`, sections over the mapping torus with `l²(Z)` fibers, and
//! sections of the line bundle `γ` over `T^d × S¹ × S¹`.
//!
//! * `I`: `(Iφ)(x, t, n) = φ(x + nθ, t + n)` for `t ∈ [0, 1)`.
//! * `K`: `(Ku)(x, t, φ) = (2π)^{-1/2} Σ_n u(x, t, n) e^{inφ}`.
//! * `J`: `(Jf)(x, t, φ) = (2π)^{-1/2} Σ_n f(x, t + n) e^{inφ}`.
//!
//! Norms are discrete `L²` norms with the cell volumes of the respective grids.

use std::f64::consts::PI;
use std::sync::Arc;

use faer::c64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::TorusIsometry;

/// Magnitude below which samples count as decayed.
pub const DECAY_LEVEL: f64 = 1e-12;

/// `φ(x_i, t_j)` with `x_i` on a uniform `gx^d` grid and `t_j = −N_t + j/g_t`, `j < 2 N_t g_t`.
#[derive(Clone, Debug, PartialEq)]
pub struct CylinderSample {
    pub d: usize,
    pub gx: usize,
    pub nt: usize,
    pub gt: usize,
    /// Index `x · (2 N_t g_t) + j`.
    pub values: Vec<c64>,
}

/// `u(x_i, t_j, n)` with `t_j = j/g_t ∈ [0, 1)` and `|n| ≤ N_f`.
#[derive(Clone, Debug, PartialEq)]
pub struct FiberedSample {
    pub d: usize,
    pub gx: usize,
    pub gt: usize,
    pub nf: usize,
    /// Index `(x · g_t + j) · (2 N_f + 1) + (n + N_f)`.
    pub values: Vec<c64>,
}

/// `v(x_i, t_j, φ_m)` with `t_j = j/g_t ∈ [0, P)` and `φ_m = 2πm/g_φ`.
#[derive(Clone, Debug, PartialEq)]
pub struct GammaSample {
    pub d: usize,
    pub gx: usize,
    pub gt: usize,
    pub periods: usize,
    pub gphi: usize,
    /// Index `(x · P g_t + j) · g_φ + m`.
    pub values: Vec<c64>,
    /// `max |v(x, t+1, φ) − v(x, t, φ) e^{−iφ}|` over stored samples (0 when `P = 1`).
    pub quasi_periodicity_defect: f64,
}

fn x_count(d: usize, gx: usize) -> usize {
    gx.pow(d as u32)
}

fn x_point(d: usize, gx: usize, mut idx: usize) -> Vec<f64> {
    let mut x = vec![0.0; d];
    for c in (0..d).rev() {
        x[c] = (idx % gx) as f64 / gx as f64;
        idx /= gx;
    }
    x
}

impl CylinderSample {
    pub fn from_fn(d: usize, gx: usize, nt: usize, gt: usize, f: impl Fn(&[f64], f64) -> c64 + Sync) -> Result<Self> {
        if d == 0 || gx == 0 || nt == 0 || gt == 0 {
            return Err(Error::Schema("cylinder grids need positive sizes".into()));
        }
        let nts = 2 * nt * gt;
        let values = (0..x_count(d, gx))
            .into_par_iter()
            .flat_map_iter(|xi| {
                let x = x_point(d, gx, xi);
                let f = &f;
                (0..nts).map(move |j| f(&x, -(nt as f64) + j as f64 / gt as f64))
            })
            .collect();
        Ok(Self { d, gx, nt, gt, values })
    }

    pub fn t_samples(&self) -> usize {
        2 * self.nt * self.gt
    }

    pub fn t_at(&self, j: usize) -> f64 {
        -(self.nt as f64) + j as f64 / self.gt as f64
    }

    /// Honest decay flag: all samples with `|t| ≥ N_t − 1` are below `DECAY_LEVEL`.
    pub fn decays(&self) -> bool {
        let nts = self.t_samples();
        let edge = self.nt as f64 - 1.0;
        self.values.iter().enumerate().all(|(i, v)| self.t_at(i % nts).abs() < edge || v.norm() < DECAY_LEVEL)
    }

    pub fn norm(&self) -> f64 {
        let cell = 1.0 / (x_count(self.d, self.gx) as f64 * self.gt as f64);
        (self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * cell).sqrt()
    }

    pub fn inner(&self, other: &Self) -> c64 {
        let cell = 1.0 / (x_count(self.d, self.gx) as f64 * self.gt as f64);
        self.values.iter().zip(&other.values).map(|(a, b)| a.conj() * b).sum::<c64>() * cell
    }

    fn same_grid(&self, other: &Self) -> bool {
        (self.d, self.gx, self.nt, self.gt) == (other.d, other.gx, other.nt, other.gt)
    }

    /// `x`-field at t-index `j`.
    fn x_field(&self, j: usize) -> Vec<c64> {
        let nts = self.t_samples();
        (0..x_count(self.d, self.gx)).map(|xi| self.values[xi * nts + j]).collect()
    }

    /// `(T̃φ)(x, t) = φ(x + θ, t + 1)`, zero beyond the sampled range.
    pub fn shift_operator(&self, iso: &TorusIsometry) -> Result<Self> {
        check_iso(self.d, iso)?;
        let nts = self.t_samples();
        let shifter = XShifter::new(self.d, self.gx);
        let mut out = vec![c64::new(0.0, 0.0); self.values.len()];
        for j in 0..nts.saturating_sub(self.gt) {
            let field = shifter.shift(&self.x_field(j + self.gt), iso.theta());
            for (xi, v) in field.into_iter().enumerate() {
                out[xi * nts + j] = v;
            }
        }
        Ok(Self { values: out, ..self.clone() })
    }

    /// `(Δ_x + t² − ∂²_t)φ`, spectrally in `x` and `t`.
    pub fn apply_oscillator(&self) -> Self {
        let nts = self.t_samples();
        let nx = x_count(self.d, self.gx);
        let shifter = XShifter::new(self.d, self.gx);
        let mut out = vec![c64::new(0.0, 0.0); self.values.len()];
        for j in 0..nts {
            let lap = shifter.laplacian(&self.x_field(j));
            for xi in 0..nx {
                out[xi * nts + j] = lap[xi];
            }
        }
        let mut planner = FftPlanner::<f64>::new();
        let fwd = planner.plan_fft_forward(nts);
        let inv = planner.plan_fft_inverse(nts);
        let period = nts as f64 / self.gt as f64;
        for xi in 0..nx {
            let line = &self.values[xi * nts..(xi + 1) * nts];
            let mut buf = line.to_vec();
            fwd.process(&mut buf);
            for (q, b) in buf.iter_mut().enumerate() {
                let w = 2.0 * PI * signed(q, nts) as f64 / period;
                *b *= w * w / nts as f64;
            }
            inv.process(&mut buf);
            for j in 0..nts {
                let t = self.t_at(j);
                out[xi * nts + j] += buf[j] + line[j] * (t * t);
            }
        }
        Self { values: out, ..self.clone() }
    }
}

impl FiberedSample {
    pub fn norm(&self) -> f64 {
        let cell = 1.0 / (x_count(self.d, self.gx) as f64 * self.gt as f64);
        (self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * cell).sqrt()
    }

    fn width(&self) -> usize {
        2 * self.nf + 1
    }

    pub fn get(&self, xi: usize, j: usize, n: i64) -> c64 {
        self.values[(xi * self.gt + j) * self.width() + (n + self.nf as i64) as usize]
    }
}

impl GammaSample {
    pub fn norm(&self) -> f64 {
        let cell = 2.0 * PI / (x_count(self.d, self.gx) as f64 * self.gt as f64 * self.gphi as f64);
        let per = self.gt * self.gphi;
        let sum: f64 = self
            .values
            .chunks(self.periods * per)
            .flat_map(|c| c[..per].iter())
            .map(|v| v.norm_sqr())
            .sum();
        (sum * cell).sqrt()
    }

    /// Inner product over the first period.
    pub fn inner(&self, other: &Self) -> c64 {
        let cell = 2.0 * PI / (x_count(self.d, self.gx) as f64 * self.gt as f64 * self.gphi as f64);
        let per = self.gt * self.gphi;
        let stride = self.periods * per;
        let mut acc = c64::new(0.0, 0.0);
        for xi in 0..x_count(self.d, self.gx) {
            for k in 0..per {
                acc += self.values[xi * stride + k].conj() * other.values[xi * stride + k];
            }
        }
        acc * cell
    }

    /// Largest difference over the first period, relative to nothing.
    pub fn max_diff_first_period(&self, other: &Self) -> f64 {
        let per = self.gt * self.gphi;
        let (sa, sb) = (self.periods * per, other.periods * per);
        (0..x_count(self.d, self.gx))
            .flat_map(|xi| (0..per).map(move |k| (xi * sa + k, xi * sb + k)))
            .map(|(a, b)| (self.values[a] - other.values[b]).norm())
            .fold(0.0, f64::max)
    }
}

fn signed(q: usize, n: usize) -> i64 {
    if q < n.div_ceil(2) {
        q as i64
    } else {
        q as i64 - n as i64
    }
}

fn check_iso(d: usize, iso: &TorusIsometry) -> Result<()> {
    if iso.d() != d {
        return Err(Error::SizeMismatch(format!("isometry acts on T^{} but samples live on T^{d}", iso.d())));
    }
    Ok(())
}

/// Translation of periodic fields on the `gx^d` grid: an exact index roll when
/// the shift is a multiple of the grid step, spectral (trigonometric)
/// interpolation otherwise.
struct XShifter {
    d: usize,
    gx: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl XShifter {
    fn new(d: usize, gx: usize) -> Self {
        let mut planner = FftPlanner::<f64>::new();
        Self { d, gx, fwd: planner.plan_fft_forward(gx), inv: planner.plan_fft_inverse(gx) }
    }

    fn grid_steps(&self, shift: &[f64]) -> Option<Vec<i64>> {
        shift
            .iter()
            .map(|s| {
                let steps = s * self.gx as f64;
                let r = steps.round();
                ((steps - r).abs() < 1e-9).then_some(r as i64)
            })
            .collect()
    }

    fn along_axes(&self, data: &mut [c64], fft: &Arc<dyn Fft<f64>>) {
        let g = self.gx;
        let total = data.len();
        let mut line = vec![c64::new(0.0, 0.0); g];
        for axis in 0..self.d {
            let stride = g.pow((self.d - 1 - axis) as u32);
            for start in 0..total {
                if (start / stride) % g != 0 {
                    continue;
                }
                for (q, l) in line.iter_mut().enumerate() {
                    *l = data[start + q * stride];
                }
                fft.process(&mut line);
                for (q, l) in line.iter().enumerate() {
                    data[start + q * stride] = *l;
                }
            }
        }
    }

    fn frequencies(&self, mut idx: usize) -> Vec<i64> {
        let mut m = vec![0; self.d];
        for c in (0..self.d).rev() {
            m[c] = signed(idx % self.gx, self.gx);
            idx /= self.gx;
        }
        m
    }

    /// `f(x + shift)`.
    fn shift(&self, field: &[c64], shift: &[f64]) -> Vec<c64> {
        if let Some(steps) = self.grid_steps(shift) {
            let g = self.gx as i64;
            return (0..field.len())
                .map(|idx| {
                    let mut src = 0usize;
                    let mut rest = idx;
                    let mut coords = vec![0i64; self.d];
                    for c in (0..self.d).rev() {
                        coords[c] = (rest % self.gx) as i64;
                        rest /= self.gx;
                    }
                    for c in 0..self.d {
                        src = src * self.gx + (coords[c] + steps[c]).rem_euclid(g) as usize;
                    }
                    field[src]
                })
                .collect();
        }
        let mut buf = field.to_vec();
        self.along_axes(&mut buf, &self.fwd);
        let scale = 1.0 / field.len() as f64;
        for (idx, b) in buf.iter_mut().enumerate() {
            let m = self.frequencies(idx);
            let arg: f64 = m.iter().zip(shift).map(|(mi, s)| *mi as f64 * s).sum();
            *b *= c64::cis(2.0 * PI * arg) * scale;
        }
        self.along_axes(&mut buf, &self.inv);
        buf
    }

    /// `−Σ_c ∂²_c f`.
    fn laplacian(&self, field: &[c64]) -> Vec<c64> {
        let mut buf = field.to_vec();
        self.along_axes(&mut buf, &self.fwd);
        let scale = 1.0 / field.len() as f64;
        for (idx, b) in buf.iter_mut().enumerate() {
            let k2: f64 = self.frequencies(idx).iter().map(|m| (2.0 * PI * *m as f64).powi(2)).sum();
            *b *= k2 * scale;
        }
        self.along_axes(&mut buf, &self.inv);
        buf
    }
}

fn check_fiber_range(phi: &CylinderSample, nf: usize) -> Result<()> {
    if nf + 1 > phi.nt {
        return Err(Error::InsufficientRange(format!("N_f = {nf} needs N_t ≥ {}, got {}", nf + 1, phi.nt)));
    }
    if !phi.decays() {
        return Err(Error::InsufficientRange(format!(
            "samples do not decay below {DECAY_LEVEL:e} for |t| ≥ N_t − 1 = {}",
            phi.nt - 1
        )));
    }
    Ok(())
}

/// `(Iφ)(x, t, n) = φ(x + nθ, t + n)` for `t ∈ [0, 1)`, `|n| ≤ N_f`.
pub fn apply_i(phi: &CylinderSample, iso: &TorusIsometry, nf: usize) -> Result<FiberedSample> {
    check_iso(phi.d, iso)?;
    check_fiber_range(phi, nf)?;
    let shifter = XShifter::new(phi.d, phi.gx);
    let (gt, w, nx) = (phi.gt, 2 * nf + 1, x_count(phi.d, phi.gx));
    let mut values = vec![c64::new(0.0, 0.0); nx * gt * w];
    let fields: Vec<(usize, i64, Vec<c64>)> = (0..gt)
        .into_par_iter()
        .flat_map_iter(|j| (-(nf as i64)..=nf as i64).map(move |n| (j, n)))
        .map(|(j, n)| {
            let src = j + ((n + phi.nt as i64) as usize) * gt;
            let shift: Vec<f64> = iso.theta().iter().map(|t| n as f64 * t).collect();
            (j, n, shifter.shift(&phi.x_field(src), &shift))
        })
        .collect();
    for (j, n, field) in fields {
        for (xi, v) in field.into_iter().enumerate() {
            values[(xi * gt + j) * w + (n + nf as i64) as usize] = v;
        }
    }
    Ok(FiberedSample { d: phi.d, gx: phi.gx, gt, nf, values })
}

/// `φ(x, t) = u(x − [t]θ, {t}, [t])` on the cylinder grid of half length `N_t`; zero where `|[t]| > N_f`.
pub fn apply_i_inv(u: &FiberedSample, iso: &TorusIsometry, nt: usize) -> Result<CylinderSample> {
    check_iso(u.d, iso)?;
    if nt < u.nf + 1 {
        return Err(Error::InsufficientRange(format!("N_t = {nt} cannot hold N_f = {}", u.nf)));
    }
    let shifter = XShifter::new(u.d, u.gx);
    let (gt, nx) = (u.gt, x_count(u.d, u.gx));
    let nts = 2 * nt * gt;
    let mut values = vec![c64::new(0.0, 0.0); nx * nts];
    for j in 0..nts {
        let rel = j as i64 - (nt * gt) as i64;
        let n = rel.div_euclid(gt as i64);
        let jt = rel.rem_euclid(gt as i64) as usize;
        if n.unsigned_abs() as usize > u.nf {
            continue;
        }
        let field: Vec<c64> = (0..nx).map(|xi| u.get(xi, jt, n)).collect();
        let shift: Vec<f64> = iso.theta().iter().map(|t| -(n as f64) * t).collect();
        for (xi, v) in shifter.shift(&field, &shift).into_iter().enumerate() {
            values[xi * nts + j] = v;
        }
    }
    Ok(CylinderSample { d: u.d, gx: u.gx, nt, gt, values })
}

/// `max |(I T̃ φ)(x, t, n) − (Iφ)(x, t, n + 1)|` over `n ∈ [−N_f, N_f − 1]`.
pub fn conjugate_shift_check(phi: &CylinderSample, iso: &TorusIsometry, nf: usize) -> Result<f64> {
    let lhs = apply_i(&phi.shift_operator(iso)?, iso, nf)?;
    let rhs = apply_i(phi, iso, nf)?;
    let mut defect = 0.0f64;
    for xi in 0..x_count(phi.d, phi.gx) {
        for j in 0..phi.gt {
            for n in -(nf as i64)..nf as i64 {
                defect = defect.max((lhs.get(xi, j, n) - rhs.get(xi, j, n + 1)).norm());
            }
        }
    }
    Ok(defect)
}

/// `(Ku)(x, t, φ_m) = (2π)^{-1/2} Σ_n u(x, t, n) e^{inφ_m}`.
pub fn apply_k(u: &FiberedSample, gphi: usize) -> Result<GammaSample> {
    if gphi < 2 * u.nf + 1 {
        return Err(Error::InsufficientRange(format!("g_φ = {gphi} cannot resolve 2N_f + 1 = {} fibers", 2 * u.nf + 1)));
    }
    let inv = FftPlanner::<f64>::new().plan_fft_inverse(gphi);
    let w = 2 * u.nf + 1;
    let norm = (2.0 * PI).sqrt().recip();
    let values = u
        .values
        .chunks(w)
        .flat_map(|fiber| {
            let mut buf = vec![c64::new(0.0, 0.0); gphi];
            for (i, v) in fiber.iter().enumerate() {
                let n = i as i64 - u.nf as i64;
                buf[n.rem_euclid(gphi as i64) as usize] += v;
            }
            inv.process(&mut buf);
            buf.into_iter().map(move |b| b * norm)
        })
        .collect();
    Ok(GammaSample { d: u.d, gx: u.gx, gt: u.gt, periods: 1, gphi, values, quasi_periodicity_defect: 0.0 })
}

/// `(Jf)(x, t, φ_m) = (2π)^{-1/2} Σ_n f(x, t + n) e^{inφ_m}` for `t ∈ [0, periods)`.
pub fn apply_j(phi: &CylinderSample, gphi: usize, periods: usize) -> Result<GammaSample> {
    if !phi.decays() {
        return Err(Error::InsufficientRange("samples do not decay at the ends of the t-range".into()));
    }
    if periods == 0 || periods > phi.nt {
        return Err(Error::InsufficientRange(format!("cannot sample {periods} periods from N_t = {}", phi.nt)));
    }
    if gphi == 0 {
        return Err(Error::Schema("g_φ must be positive".into()));
    }
    let inv = FftPlanner::<f64>::new().plan_fft_inverse(gphi);
    let (gt, nts, nx) = (phi.gt, phi.t_samples(), x_count(phi.d, phi.gx));
    let norm = (2.0 * PI).sqrt().recip();
    let pt = periods * gt;
    let mut values = vec![c64::new(0.0, 0.0); nx * pt * gphi];
    for xi in 0..nx {
        for j in 0..pt {
            let mut buf = vec![c64::new(0.0, 0.0); gphi];
            // cylinder index of t_j + n is j + (n + N_t) g_t
            let base = j as i64 + (phi.nt * gt) as i64;
            let n_lo = (-base).div_euclid(gt as i64) + i64::from((-base).rem_euclid(gt as i64) != 0);
            let mut n = n_lo;
            loop {
                let idx = base + n * gt as i64;
                if idx >= nts as i64 {
                    break;
                }
                buf[n.rem_euclid(gphi as i64) as usize] += phi.values[xi * nts + idx as usize];
                n += 1;
            }
            inv.process(&mut buf);
            let off = (xi * pt + j) * gphi;
            for (m, b) in buf.into_iter().enumerate() {
                values[off + m] = b * norm;
            }
        }
    }
    let mut defect = 0.0f64;
    for xi in 0..nx {
        for j in 0..pt.saturating_sub(gt) {
            for m in 0..gphi {
                let now = values[(xi * pt + j) * gphi + m];
                let later = values[(xi * pt + j + gt) * gphi + m];
                let ph = c64::cis(-2.0 * PI * m as f64 / gphi as f64);
                defect = defect.max((later - now * ph).norm());
            }
        }
    }
    Ok(GammaSample { d: phi.d, gx: phi.gx, gt, periods, gphi, values, quasi_periodicity_defect: defect })
}

/// `f(x, t) = (2π)^{-1/2} ∫ v(x, {t}, φ) e^{−i[t]φ} dφ` on a cylinder grid of half length `N_t`.
pub fn apply_j_inv(v: &GammaSample, nt: usize) -> Result<CylinderSample> {
    if v.gphi < 2 * nt {
        return Err(Error::InsufficientRange(format!("g_φ = {} aliases a t-range of half length {nt}", v.gphi)));
    }
    let fwd = FftPlanner::<f64>::new().plan_fft_forward(v.gphi);
    let (gt, nx) = (v.gt, x_count(v.d, v.gx));
    let nts = 2 * nt * gt;
    let stride = v.periods * gt;
    let scale = (2.0 * PI).sqrt().recip() * 2.0 * PI / v.gphi as f64;
    let mut values = vec![c64::new(0.0, 0.0); nx * nts];
    for xi in 0..nx {
        for jt in 0..gt {
            let off = (xi * stride + jt) * v.gphi;
            let mut buf = v.values[off..off + v.gphi].to_vec();
            fwd.process(&mut buf);
            for j in (jt..nts).step_by(gt) {
                let n = (j as i64 - (nt * gt) as i64).div_euclid(gt as i64);
                values[xi * nts + j] = buf[n.rem_euclid(v.gphi as i64) as usize] * scale;
            }
        }
    }
    Ok(CylinderSample { d: v.d, gx: v.gx, nt, gt, values })
}

/// `‖K(R(Iφ)) − Jφ‖ / ‖φ‖` where `R` undoes the `x`-relabeling by `g^n`.
pub fn factorization_check(phi: &CylinderSample, iso: &TorusIsometry, nf: usize, gphi: usize) -> Result<f64> {
    let mut u = apply_i(phi, iso, nf)?;
    let shifter = XShifter::new(phi.d, phi.gx);
    let (gt, w, nx) = (u.gt, 2 * nf + 1, x_count(phi.d, phi.gx));
    for j in 0..gt {
        for n in -(nf as i64)..=nf as i64 {
            let slot = |xi: usize| (xi * gt + j) * w + (n + nf as i64) as usize;
            let field: Vec<c64> = (0..nx).map(|xi| u.values[slot(xi)]).collect();
            let shift: Vec<f64> = iso.theta().iter().map(|t| -(n as f64) * t).collect();
            for (xi, v) in shifter.shift(&field, &shift).into_iter().enumerate() {
                u.values[slot(xi)] = v;
            }
        }
    }
    let k = apply_k(&u, gphi)?;
    let j = apply_j(phi, gphi, 1)?;
    let diff: f64 = k.values.iter().zip(&j.values).map(|(a, b)| (a - b).norm_sqr()).sum();
    let cell = 2.0 * PI / (nx as f64 * gt as f64 * gphi as f64);
    Ok((diff * cell).sqrt() / phi.norm())
}

/// `max |I(ψφ) − ψ·Iφ|` for the `Z`-invariant multiplier `ψ(x, t) = e^{2πi(x₁ − θ₁t)}`.
pub fn intertwining_check(phi: &CylinderSample, iso: &TorusIsometry, nf: usize) -> Result<f64> {
    check_iso(phi.d, iso)?;
    let th = iso.theta()[0];
    let psi = |x: &[f64], t: f64| c64::cis(2.0 * PI * (x[0] - th * t));
    let nts = phi.t_samples();
    let mut prod = phi.clone();
    for (i, v) in prod.values.iter_mut().enumerate() {
        let x = x_point(phi.d, phi.gx, i / nts);
        *v *= psi(&x, phi.t_at(i % nts));
    }
    let lhs = apply_i(&prod, iso, nf)?;
    let rhs = apply_i(phi, iso, nf)?;
    let (gt, w) = (phi.gt, 2 * nf + 1);
    let mut defect = 0.0f64;
    for (k, (a, b)) in lhs.values.iter().zip(&rhs.values).enumerate() {
        let j = (k / w) % gt;
        let xi = k / (w * gt);
        let x = x_point(phi.d, phi.gx, xi);
        defect = defect.max((a - b * psi(&x, j as f64 / gt as f64)).norm());
    }
    Ok(defect)
}

/// `|⟨Jφ, J(Lφ)⟩ − ⟨φ, Lφ⟩|` for `L = Δ_x + t² − ∂²_t`.
pub fn oscillator_form_check(phi: &CylinderSample, gphi: usize) -> Result<(c64, c64)> {
    let lphi = phi.apply_oscillator();
    if !lphi.same_grid(phi) {
        return Err(Error::SizeMismatch("grid changed".into()));
    }
    let direct = phi.inner(&lphi);
    let jphi = apply_j(phi, gphi, 1)?;
    let jl = apply_j(&lphi, gphi, 1)?;
    Ok((jphi.inner(&jl), direct))
}

/// JSON row for a uniformization check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransformReport {
    pub transform: String,
    pub grid: GridInfo,
    pub defect: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridInfo {
    pub d: usize,
    pub gx: usize,
    pub nt: usize,
    pub gt: usize,
    pub nf: usize,
    pub gphi: usize,
}

impl TransformReport {
    pub fn new(transform: &str, grid: GridInfo, defect: f64, tolerance: f64) -> Self {
        Self { transform: transform.into(), grid, defect, tolerance, pass: defect.is_finite() && defect < tolerance }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bump(x: &[f64], t: f64) -> c64 {
        c64::cis(2.0 * PI * x[0]) * (-(t - 0.3) * (t - 0.3) / 2.0).exp()
    }

    #[test]
    fn decay_flag_is_checked() {
        let wide = CylinderSample::from_fn(1, 4, 3, 4, |_, t| c64::new((-t * t / 8.0).exp(), 0.0)).unwrap();
        assert!(!wide.decays());
        let iso = TorusIsometry::new(vec![0.25]).unwrap();
        assert!(matches!(apply_i(&wide, &iso, 1), Err(Error::InsufficientRange(_))));
    }

    #[test]
    fn x_independent_data_is_relabelled_in_t() {
        let phi = CylinderSample::from_fn(1, 8, 12, 4, |_, t| c64::new((-t * t / 2.0).exp(), 0.0)).unwrap();
        let iso = TorusIsometry::new(vec![2f64.sqrt() - 1.0]).unwrap();
        let u = apply_i(&phi, &iso, 6).unwrap();
        for j in 0..4 {
            for n in -6i64..=6 {
                let t = j as f64 / 4.0 + n as f64;
                assert!((u.get(3, j, n).re - (-t * t / 2.0).exp()).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn k_of_a_delta_fiber() {
        let mut u = FiberedSample { d: 1, gx: 1, gt: 1, nf: 2, values: vec![c64::new(0.0, 0.0); 5] };
        u.values[3] = c64::new(1.0, 0.0);
        let v = apply_k(&u, 8).unwrap();
        for m in 0..8 {
            let want = c64::cis(2.0 * PI * m as f64 / 8.0) / (2.0 * PI).sqrt();
            assert!((v.values[m] - want).norm() < 1e-14);
        }
        assert!(apply_k(&u, 4).is_err());
    }

    #[test]
    fn spectral_shift_moves_plane_waves() {
        let s = XShifter::new(1, 16);
        let f: Vec<c64> = (0..16).map(|i| c64::cis(2.0 * PI * 3.0 * i as f64 / 16.0)).collect();
        let g = s.shift(&f, &[0.123]);
        for i in 0..16 {
            let want = c64::cis(2.0 * PI * 3.0 * (i as f64 / 16.0 + 0.123));
            assert!((g[i] - want).norm() < 1e-13);
        }
    }

    #[test]
    fn oscillator_matches_closed_form_on_a_gaussian() {
        let phi = CylinderSample::from_fn(1, 8, 12, 16, bump).unwrap();
        let (_, direct) = oscillator_form_check(&phi, 24).unwrap();
        let want = PI.sqrt() * ((2.0 * PI).powi(2) + 1.0 + 0.09);
        assert!((direct.re - want).abs() < 1e-9 && direct.im.abs() < 1e-9);
    }
}
