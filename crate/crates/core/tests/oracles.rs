use std::f64::consts::PI;

use shift_index::c64;
use shift_index::discretize::{
    assemble_a, FourierTruncation, assemble_on_torus, assemble_on_torus_unweighted, shift_t_matrix,
};
use shift_index::ellipticity::symbol_min_sv;
use shift_index::operator::examples;
use shift_index::ShiftOperatorSpec;

// Normalized Hermite functions from the physicists' polynomials.
fn hermite_oracle(n: usize, t: f64) -> f64 {
    let mut h = [1.0, 2.0 * t];
    if n == 0 {
        return PI.powf(-0.25) * (-t * t / 2.0).exp();
    }
    for k in 1..n {
        let next = 2.0 * t * h[1] - 2.0 * k as f64 * h[0];
        h = [h[1], next];
    }
    let log_norm = 0.5 * (n as f64 * 2f64.ln() + (1..=n).map(|k| (k as f64).ln()).sum::<f64>());
    h[1] * (-t * t / 2.0 - log_norm).exp() * PI.powf(-0.25)
}

fn trapezoid(f: impl Fn(f64) -> f64) -> f64 {
    let (lo, step) = (-16.0, 0.01);
    (0..=3200).map(|i| f(lo + i as f64 * step)).sum::<f64>() * step
}

#[test]
fn hermite_shift_matches_quadrature() {
    let h = 12;
    for eps in [0.0, 0.25, 0.5, 1.0, -0.7, 2.0] {
        let s = shift_t_matrix(eps, h);
        for m in 0..h {
            for n in 0..h {
                let want = trapezoid(|t| hermite_oracle(m, t) * hermite_oracle(n, t + eps));
                assert!((s[(m, n)].re - want).abs() < 1e-12, "ε = {eps}, ({m}, {n}): {} vs {want}", s[(m, n)].re);
                assert_eq!(s[(m, n)].im, 0.0);
            }
        }
    }
}

#[test]
fn ladder_matrix_matches_quadrature_with_weights() {
    let h = 10;
    let step = 1e-3;
    let deriv = |n: usize, t: f64| {
        (8.0 * (hermite_oracle(n, t + step) - hermite_oracle(n, t - step))
            - (hermite_oracle(n, t + 2.0 * step) - hermite_oracle(n, t - 2.0 * step)))
            / (12.0 * step)
    };
    let raw: Vec<Vec<f64>> = (0..h)
        .map(|m| (0..h).map(|n| trapezoid(|t| hermite_oracle(m, t) * (deriv(n, t) + t * hermite_oracle(n, t)))).collect())
        .collect();
    for s in [-1.0, 0.0, 0.5, 2.0] {
        let a = assemble_a(h, s).unwrap().to_dense();
        for m in 0..h {
            for n in 0..h {
                let w = (2.0 * m as f64 + 2.0).powf((s - 1.0) / 2.0) * (2.0 * n as f64 + 2.0).powf(-s / 2.0);
                assert!((a[(m, n)].re - raw[m][n] * w).abs() < 1e-8, "s = {s}, ({m}, {n})");
            }
        }
    }
}

// Brute-force action of D on a Fourier mode, evaluated pointwise with a
// fourth-order difference stencil and transformed back by a direct DFT.
fn brute_force_column(spec: &ShiftOperatorSpec, m: &[i64], g: usize, f: &FourierTruncation) -> Vec<c64> {
    let d = spec.d();
    let theta = spec.theta().to_vec();
    let u = |x: &[f64]| c64::cis(2.0 * PI * m.iter().zip(x).map(|(a, b)| *a as f64 * b).sum::<f64>());
    let step = 1e-3;
    let points = g.pow(d as u32);
    let mut out = vec![c64::new(0.0, 0.0); f.size()];
    for p in 0..points {
        let x: Vec<f64> = (0..d).map(|c| ((p / g.pow((d - 1 - c) as u32)) % g) as f64 / g as f64).collect();
        let mut du = c64::new(0.0, 0.0);
        for (&k, coeff) in spec.terms() {
            let shifted: Vec<f64> = x.iter().zip(&theta).map(|(a, t)| a + k as f64 * t).collect();
            for j in 0..d {
                let at = |h: f64| {
                    let mut y = shifted.clone();
                    y[j] += h;
                    u(&y)
                };
                let dj = ((at(step) - at(-step)) * 8.0 - (at(2.0 * step) - at(-2.0 * step))) / (12.0 * step);
                du += coeff.coefficient(j, &x) * dj;
            }
        }
        for (r, slot) in out.iter_mut().enumerate() {
            let mode = f.mode(r);
            let ph: f64 = mode.iter().zip(&x).map(|(a, b)| *a as f64 * b).sum();
            *slot += du * c64::cis(-2.0 * PI * ph) / points as f64;
        }
    }
    out
}

fn check_composition(spec: &ShiftOperatorSpec, k: usize, g: usize) {
    let f = FourierTruncation::new(spec.d(), k);
    let dense = assemble_on_torus_unweighted(spec, k).unwrap().to_dense();
    let band = spec.max_frequency();
    for col in 0..f.size() {
        let m = f.mode(col);
        if m.iter().any(|v| v.abs() > k as i64 - band) {
            continue;
        }
        let want = brute_force_column(spec, &m, g, &f);
        let scale = 2.0 * PI * (k as f64 + 1.0);
        for (row, w) in want.iter().enumerate() {
            assert!((dense[(row, col)] - w).norm() < 1e-6 * scale, "{:?} mode {m:?} row {row}", spec.name);
        }
    }
}

#[test]
fn torus_assembly_matches_brute_force_composition_on_the_circle() {
    check_composition(&examples::variable_d_dx(0.3, 0.7, 2f64.sqrt() - 1.0), 5, 16);
    check_composition(&examples::shifted_d_dx(0.3, 0.25), 4, 16);
}

#[test]
fn torus_assembly_matches_brute_force_composition_on_the_two_torus() {
    check_composition(&examples::cauchy_riemann(0.2, 0.7, [2f64.sqrt() - 1.0, 3f64.sqrt() - 1.0]), 3, 12);
    check_composition(&examples::mixed_cauchy_riemann(0.3, 0.3, [0.3, 0.6]), 3, 12);
}

#[test]
fn sobolev_weights_conjugate_the_plain_matrix() {
    let spec = examples::cauchy_riemann(0.2, 0.3, [0.3, 0.6]);
    let f = FourierTruncation::new(2, 3);
    let plain = assemble_on_torus_unweighted(&spec, 3).unwrap().to_dense();
    let w = |i: usize| -> f64 { 1.0 + f.mode(i).iter().map(|v| (2.0 * PI * *v as f64).powi(2)).sum::<f64>() };
    for s in [-1.0, 1.0, 2.0] {
        let weighted = assemble_on_torus(&spec, 3, s).unwrap().to_dense();
        for i in 0..f.size() {
            for j in 0..f.size() {
                let want = plain[(i, j)] * (w(i).powf((s - 1.0) / 2.0) * w(j).powf(-s / 2.0));
                assert!((weighted[(i, j)] - want).norm() < 1e-12 * (1.0 + want.norm()));
            }
        }
    }
}

#[test]
fn shifted_derivative_matches_the_normal_operator_distance() {
    // σ = i(1 + b𝒯) is normal with spectrum i(1 + b e^{iφ}); min |1 + b e^{iφ}| = |1 − |b||
    for b in [0.25, 0.5, 0.75, 1.25] {
        let spec = examples::shifted_d_dx(b, 2f64.sqrt() - 1.0);
        let (sv, _) = symbol_min_sv(&spec, &[0.37], &[1.0], 64).unwrap();
        let want = (1.0 - b).abs();
        assert!((sv - want).abs() < 0.05 * want, "b = {b}: {sv} vs {want}");
    }
}
