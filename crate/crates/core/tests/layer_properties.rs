use std::sync::Arc;

use proptest::prelude::*;
use twodisk::layer::{
    eval_double_layer, eval_single_layer, eval_single_layer_gradient, own_boundary_flux, CircleFourier, Side,
};
use twodisk::{BoundaryDensity, BoundaryGrid, Disk, Vec2};

fn grid(m: usize) -> Arc<BoundaryGrid> {
    Arc::new(BoundaryGrid::new(Disk::new(Vec2::new(0.3, -0.2), 1.1).unwrap(), m, 0.25).unwrap())
}

fn smooth(x: Vec2, _nu: Vec2) -> f64 {
    1.0 + (2.0 * x.x).sin() + 0.3 * x.y * x.y
}

proptest! {
    #[test]
    fn single_layer_is_linear(a in -3.0..3.0f64, b in -3.0..3.0f64, px in 2.0..5.0f64, py in -5.0..5.0f64) {
        let g = grid(64);
        let f = BoundaryDensity::from_fn(g.clone(), smooth);
        let h = BoundaryDensity::from_fn(g.clone(), |x, _| x.x - x.y.powi(3));
        let combo = BoundaryDensity::new(
            g.clone(),
            f.values().iter().zip(h.values()).map(|(u, v)| a * u + b * v).collect(),
        ).unwrap();
        let x = Vec2::new(px, py);
        let lhs = eval_single_layer(&combo, x).unwrap();
        let rhs = a * eval_single_layer(&f, x).unwrap() + b * eval_single_layer(&h, x).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
    }

    #[test]
    fn gradient_matches_finite_differences(px in 1.8..4.0f64, py in -4.0..4.0f64) {
        let d = BoundaryDensity::from_fn(grid(128), smooth);
        let x = Vec2::new(px, py);
        let h = 1e-5;
        let fd = Vec2::new(
            eval_single_layer(&d, x + Vec2::new(h, 0.0)).unwrap() - eval_single_layer(&d, x - Vec2::new(h, 0.0)).unwrap(),
            eval_single_layer(&d, x + Vec2::new(0.0, h)).unwrap() - eval_single_layer(&d, x - Vec2::new(0.0, h)).unwrap(),
        ) / (2.0 * h);
        prop_assert!((fd - eval_single_layer_gradient(&d, x).unwrap()).norm() < 1e-7);
    }
}

#[test]
fn refinement_converges_away_from_boundary() {
    let x = Vec2::new(3.0, 1.0);
    let coarse = eval_single_layer(&BoundaryDensity::from_fn(grid(64), smooth), x).unwrap();
    let fine = eval_single_layer(&BoundaryDensity::from_fn(grid(512), smooth), x).unwrap();
    assert!((coarse - fine).abs() < 1e-10);
}

#[test]
fn gauss_flux_of_double_layer() {
    let ones = BoundaryDensity::from_fn(grid(128), |_, _| 1.0);
    assert!((eval_double_layer(&ones, Vec2::new(0.3, -0.2)).unwrap() - 1.0).abs() < 1e-12);
    assert!(eval_double_layer(&ones, Vec2::new(4.0, 2.0)).unwrap().abs() < 1e-12);
}

#[test]
fn mean_zero_layer_decays_like_inverse_distance() {
    let mut d = BoundaryDensity::from_fn(grid(128), smooth);
    d.project_mean_zero();
    let dir = Vec2::new(0.6, 0.8);
    let at = |r: f64| eval_single_layer(&d, dir * r).unwrap().abs();
    let ratio = at(1000.0) / at(100.0);
    assert!((ratio - 0.1).abs() < 5e-3, "ratio {ratio}");
}

#[test]
fn jump_relation_matches_limits() {
    let d = BoundaryDensity::from_fn(grid(256), smooth);
    let fourier = CircleFourier::new(&d);
    let exterior = own_boundary_flux(&d, Side::Exterior);
    let interior = own_boundary_flux(&d, Side::Interior);
    for (k, (x, nu)) in d.grid().nodes().iter().zip(d.grid().normals()).enumerate() {
        assert!((exterior[k] - interior[k] - d.values()[k]).abs() < 1e-13);
        let off = *x + *nu * 1e-6;
        let g = fourier.exterior_single_layer(off).unwrap().1.dot(nu);
        assert!((g - exterior[k]).abs() < 1e-4, "node {k}: {g} vs {}", exterior[k]);
    }
}

#[test]
fn fourier_interpolant_reproduces_nodes() {
    let d = BoundaryDensity::from_fn(grid(64), smooth);
    let f = CircleFourier::new(&d);
    for (theta, v) in d.grid().angles().iter().zip(d.values()) {
        assert!((f.density_at(*theta) - v).abs() < 1e-12);
    }
    let far = Vec2::new(2.0, 2.0);
    let spectral = f.exterior_single_layer(far).unwrap().0;
    let trapezoid = eval_single_layer(&d, far).unwrap();
    assert!((spectral - trapezoid).abs() < 1e-10);
    assert!(f.exterior_single_layer(Vec2::new(0.3, 0.0)).is_err());
}
