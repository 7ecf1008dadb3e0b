use std::f64::consts::PI;

use shift_index::c64;
use shift_index::linalg::CMat;
use shift_index::operator::examples;
use shift_index::topo::*;
use shift_index::Error;

fn coarse() -> MappingTorusGrid {
    MappingTorusGrid { base_res: 4, polar_res: 6, azimuth_res: 12, h: 1.0 / 64.0 }
}

fn total<S: CosphereSymbol + ?Sized>(s: &S, grid: &MappingTorusGrid) -> f64 {
    let opts = TopoOptions { tolerance: f64::INFINITY, imag_tolerance: f64::INFINITY, ..TopoOptions::default() };
    topological_index(s, grid, &opts).unwrap().total
}

// Signed count of preimages of the direction y = (0, …, 0, −1) of the map
// (x, t, ω) ↦ (sin 2πx₁, sin 2πx₂, sin 2πt, ω₁, ω₂, ω₃ + Σcos 2πx_j − c).
// Preimages sit at x_j ∈ {0, 1/2}, ω = (0, 0, ±1); the local sign is the
// product of sgn cos 2πx_j, reversed at the south pole of the fiber sphere.
fn lattice_degree(c: f64) -> i64 {
    let mut deg = 0;
    for corner in 0..8 {
        let cos: Vec<f64> = (0..3).map(|j| if corner >> j & 1 == 0 { 1.0 } else { -1.0 }).collect();
        let sum: f64 = cos.iter().sum();
        let sign: f64 = cos.iter().product();
        if 1.0 + sum - c < 0.0 {
            deg += sign as i64;
        }
        if -1.0 + sum - c < 0.0 {
            deg -= sign as i64;
        }
    }
    deg
}

#[test]
fn degree_oracle_values() {
    assert_eq!(lattice_degree(1.5), 3);
    assert_eq!(lattice_degree(2.5), -1);
    assert_eq!(lattice_degree(3.5), -1);
    assert_eq!(lattice_degree(4.5), 0);
    assert_eq!(lattice_degree(5.5), 0);
}

#[test]
fn lattice_dirac_reproduces_the_degree_up_to_orientation() {
    let grid = MappingTorusGrid { base_res: 12, ..MappingTorusGrid::default() };
    let values: Vec<(f64, f64)> = [1.5, 2.5, 3.5, 4.5].iter().map(|&c| (c, total(&LatticeDirac::new(c), &grid))).collect();
    let kappa = -1.0;
    for (c, v) in &values {
        let want = kappa * lattice_degree(*c) as f64;
        assert!((v - want).abs() < 0.1, "c = {c}: {v} vs {want}");
    }
}

#[test]
fn default_grid_is_integral_for_a_well_separated_mass() {
    let r = topological_index(&LatticeDirac::new(3.5), &MappingTorusGrid::default(), &TopoOptions::default()).unwrap();
    assert_eq!(r.status, TopoStatus::Conclusive);
    assert_eq!(r.rounded, 1);
    assert!(r.imag_residual < 0.05);
    assert_eq!(r.trace_tail, 0.0);
}

#[test]
fn reflection_reverses_the_sign() {
    let s = LatticeDirac::new(3.5);
    let a = total(&s, &coarse());
    let b = total(&Reflected { inner: s, axis: 0 }, &coarse());
    assert!(a.abs() > 0.5);
    assert!((a + b).abs() < 1e-9 * a.abs(), "{a} {b}");
}

#[test]
fn dividing_by_a_base_only_symbol_keeps_the_index() {
    let grid = MappingTorusGrid { base_res: 12, ..MappingTorusGrid::default() };
    let s = LatticeDirac::new(3.5);
    let a = total(&s, &grid);
    let b = total(&DividedByFrozen { inner: s, omega0: vec![0.6, 0.0, 0.8] }, &grid);
    assert!((a - b).abs() < 0.1, "{a} {b}");
}

#[test]
fn fiber_embedding_concentrates_at_the_centre() {
    let s = LatticeDirac::new(3.5);
    let a = total(&s, &coarse());
    let e = FiberEmbedded { inner: s, window: 2 };
    let r = topological_index(&e, &coarse(), &TopoOptions { tolerance: f64::INFINITY, ..Default::default() }).unwrap();
    assert!((r.total - a).abs() < 1e-9 * a.abs());
    assert_eq!(r.trace_tail, 0.0);
    assert_eq!(r.window, Some(2));
}

#[test]
fn scaling_and_conjugation_leave_the_integral_unchanged() {
    let s = LatticeDirac::new(3.5);
    let a = total(&s, &coarse());
    let scaled = linear_path(s.clone(), FnSymbol { d: 2, size: 4, f: |b: &[f64], w: &[f64]| Ok(LatticeDirac::new(3.5).eval(b, w)? * faer::Scale(c64::new(3.0, 0.0))) });
    let r = homotopy_invariance_check(scaled, 2, &coarse()).unwrap();
    assert!(r.max_deviation < 1e-9, "{r:?}");
    assert!((r.values[0] - a).abs() < 1e-12);
    let u = CMat::from_fn(4, 4, |i, j| c64::cis(0.3 * (i * j) as f64) + if i == j { c64::new(2.0, 0.0) } else { c64::new(0.0, 0.0) });
    let u_inv = shift_index::linalg::inverse(u.as_ref());
    let conj = FnSymbol { d: 2, size: 4, f: move |b: &[f64], w: &[f64]| Ok(&u * LatticeDirac::new(3.5).eval(b, w)? * &u_inv) };
    assert!((total(&conj, &coarse()) - a).abs() < 1e-8);
}

#[test]
fn mass_homotopy_inside_a_chamber_is_flat() {
    let r = homotopy_invariance_check(linear_path(LatticeDirac::new(2.9), LatticeDirac::new(3.3)), 4, &MappingTorusGrid::default()).unwrap();
    assert!(r.max_deviation < 0.1, "{r:?}");
}

#[test]
fn singular_symbol_is_reported_with_its_location() {
    let s = FnSymbol { d: 2, size: 2, f: |b: &[f64], _: &[f64]| Ok(CMat::from_fn(2, 2, |i, j| c64::new(if i == j { (2.0 * PI * b[0]).sin() } else { 0.0 }, 0.0))) };
    match topological_index(&s, &coarse(), &TopoOptions::default()) {
        Err(Error::NonInvertible { .. }) => {}
        other => panic!("{other:?}"),
    }
}

#[test]
fn closedness_improves_fourfold_under_step_halving() {
    let base = [0.13, 0.41, 0.27];
    let y = [0.3, -0.5, 0.8];
    let dirac = LatticeDirac::new(2.5);
    let spec = examples::mixed_cauchy_riemann(0.3, 0.3, [2f64.sqrt() - 1.0, 3f64.sqrt() - 1.0]);
    let orbit = OrbitCosphere::new(&spec, 1.0, 6).unwrap();
    for s in [&dirac as &dyn CosphereSymbol, &orbit] {
        let coarse = closedness_residual(s, &base, &y, 1.0 / 16.0).unwrap();
        let fine = closedness_residual(s, &base, &y, 1.0 / 32.0).unwrap();
        assert!(coarse / fine >= 2.0, "{coarse} {fine}");
    }
}

#[test]
fn field_partials_are_second_order() {
    let s = LatticeDirac::new(2.5);
    let p = FramedPoint { base: vec![0.1, 0.2, 0.35], omega: vec![0.0, 0.6, 0.8], frame: vec![vec![0.0, 0.8, -0.6], vec![-1.0, 0.0, 0.0]] };
    let exact = field_point(&s, &p, 1e-4).unwrap();
    let err = |h: f64| {
        let f = field_point(&s, &p, h).unwrap();
        f.partials.iter().zip(&exact.partials).map(|(a, b)| shift_index::linalg::max_abs((a - b).as_ref())).fold(0.0, f64::max)
    };
    let ratio = err(1.0 / 16.0) / err(1.0 / 32.0);
    assert!((3.5..4.5).contains(&ratio), "{ratio}");
}

#[test]
fn x1_only_specs_have_vanishing_integrand() {
    let spec = examples::cauchy_riemann(0.2, 0.7, [2f64.sqrt() - 1.0, 3f64.sqrt() - 1.0]);
    let orbit = OrbitCosphere::new(&spec, 1.0, 8).unwrap();
    let grid = MappingTorusGrid { base_res: 2, polar_res: 3, azimuth_res: 4, h: 1.0 / 64.0 };
    let r = topological_index(&orbit, &grid, &TopoOptions::default()).unwrap();
    assert!(r.total.abs() < 1e-9, "{r:?}");
    assert!(r.min_margin > 0.0);
    assert_eq!(r.rounded, 0);
}

#[test]
fn circle_operators_are_rejected() {
    let spec = examples::d_dx(0.3);
    let orbit = OrbitCosphere::new(&spec, 1.0, 4).unwrap();
    let err = topological_index(&orbit, &coarse(), &TopoOptions::default()).unwrap_err();
    assert!(err.to_string().contains("n > 1"), "{err}");
}

#[test]
fn grids_are_validated() {
    let bad = MappingTorusGrid { h: 0.5, ..MappingTorusGrid::default() };
    assert!(topological_index(&LatticeDirac::new(3.5), &bad, &TopoOptions::default()).is_err());
}
