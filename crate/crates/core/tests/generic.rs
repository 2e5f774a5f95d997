//! The same pipeline in single precision.

use friedrichs::{
    assemble, birman_schwinger_root, builtin_kernel, builtin_potential, compute_bands, eig_outside,
    estimate_multiplicity, kernel_split, quadrature, AssembleOptions, MatrixSymbol, TorusGrid,
};

fn cos1() -> MatrixSymbol<f32> {
    builtin_potential("cos_x1", 1, &[]).unwrap()
}

#[test]
fn bands_in_f32() {
    let b = compute_bands(&cos1(), &TorusGrid::<f32>::new(1, 64).unwrap(), 3).unwrap();
    assert_eq!(b.len(), 1);
    assert!((b.bands[0].lower + 1.0).abs() < 1e-6);
    assert!((b.bands[0].upper - 1.0).abs() < 1e-6);
}

#[test]
fn rank_one_in_f32() {
    let g = TorusGrid::<f32>::new(1, 64).unwrap();
    let b = compute_bands(&cos1(), &g, 3).unwrap();
    let k = builtin_kernel::<f32>("rank_one_const", 1, &[1.0 / std::f64::consts::TAU]).unwrap();
    let op = assemble(&cos1(), &k, &g, &AssembleOptions::default()).unwrap();
    let vals = eig_outside(&op, &b, 1e-3).unwrap().values();
    assert_eq!(vals.len(), 1);
    assert!((vals[0] + std::f32::consts::SQRT_2).abs() < 1e-4, "{}", vals[0]);
    let root = birman_schwinger_root(&cos1(), &k, &g, &b, -2.0, -1.1, 1e-6).unwrap();
    assert!((root - vals[0]).abs() < 1e-4);
}

#[test]
fn multiplicity_in_f32() {
    let radii = [0.25f32, 0.125, 0.0625, 0.03125];
    let pt = estimate_multiplicity(|x: &[f32]| 2.0 * (x[0] / 2.0).sin().powi(2), &[0.0], &radii, 64, 0).unwrap();
    assert!((pt.m_hat - 2.0).abs() < 0.2, "{}", pt.m_hat);
}

#[test]
fn split_and_quadrature_in_f32() {
    let g = TorusGrid::<f32>::new(1, 16).unwrap();
    let vals: Vec<f32> = g.nodes().map(|x| (3.0 * x[0]).cos().powi(2)).collect();
    assert!((quadrature(&vals, &g).unwrap() - std::f32::consts::PI).abs() < 1e-5);
    let k = builtin_kernel::<f32>("cos_harmonics", 1, &[-1.0, -0.5]).unwrap();
    let split = kernel_split(&k, 1, &g).unwrap();
    assert_eq!(split.rank, 1);
    let (x, y) = ([0.4f32], [2.1f32]);
    let d = &(&split.k1.eval(&x, &y) + &split.k2.eval(&x, &y)) - &k.eval(&x, &y);
    assert!(d.max_abs() < 1e-5);
}
