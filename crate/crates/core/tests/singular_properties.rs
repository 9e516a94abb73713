use std::f64::consts::PI;

use approx::assert_relative_eq;
use proptest::prelude::*;
use twodisk::geometry::perp;
use twodisk::layer::BoundaryGrid;
use twodisk::singular::{
    grad_h, grad_h_perp, grad_h_tilde, h, h_tilde, h_tilde_boundary_mean, interior_normal_derivative_h_tilde_e,
    stress_intensity,
};
use twodisk::{Disk, DiskId, HarmonicPolynomial, HarmonicTerm, TwoDiskConfig, Vec2};

fn boundary_flux_of_h(cfg: &TwoDiskConfig, id: DiskId, m: usize) -> f64 {
    let grid = BoundaryGrid::new(*cfg.disk(id), m, 0.1).unwrap();
    grid.nodes()
        .iter()
        .zip(grid.normals())
        .map(|(x, nu)| grad_h(cfg, *x).unwrap().dot(nu) * grid.weight())
        .sum()
}

#[test]
fn flux_of_h_is_plus_minus_one() {
    for eps in [0.5, 0.0156] {
        let cfg = TwoDiskConfig::canonical(1.0, 1.4, eps).unwrap();
        assert!((boundary_flux_of_h(&cfg, DiskId::First, 512) - 1.0).abs() < 1e-8);
        assert!((boundary_flux_of_h(&cfg, DiskId::Second, 512) + 1.0).abs() < 1e-8);
    }
}

#[test]
fn h_is_constant_on_each_circle() {
    let cfg = TwoDiskConfig::canonical(1.0, 1.0, 0.0156).unwrap();
    for id in DiskId::BOTH {
        let grid = BoundaryGrid::new(*cfg.disk(id), 256, 0.0).unwrap();
        let values: Vec<f64> = grid.nodes().iter().map(|x| h(&cfg, *x).unwrap()).collect();
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / values.len() as f64;
        assert!(var.sqrt() <= 1e-10);
    }
}

#[test]
fn h_tilde_mean_matches_closed_form() {
    // The mean of h̃ over a circle is not zero; it is the log of a distance ratio.
    let cfg = TwoDiskConfig::canonical(1.0, 1.0, 0.0156).unwrap();
    for id in DiskId::BOTH {
        let grid = BoundaryGrid::new(*cfg.disk(id), 1024, 0.0).unwrap();
        let mean = grid.nodes().iter().map(|x| h_tilde(&cfg, *x).unwrap()).sum::<f64>() / 1024.0;
        assert_relative_eq!(mean, h_tilde_boundary_mean(&cfg, id), epsilon = 1e-10);
    }
    assert!(h_tilde_boundary_mean(&cfg, DiskId::First) > 0.09);
}

#[test]
fn flux_of_h_tilde_vanishes() {
    let cfg = TwoDiskConfig::canonical(1.2, 0.8, 0.05).unwrap();
    for id in DiskId::BOTH {
        let grid = BoundaryGrid::new(*cfg.disk(id), 512, 0.0).unwrap();
        let flux: f64 = grid
            .nodes()
            .iter()
            .zip(grid.normals())
            .map(|(x, nu)| grad_h_tilde(&cfg, *x).unwrap().dot(nu) * grid.weight())
            .sum();
        assert!(flux.abs() < 1e-10);
        let interior: f64 = grid
            .nodes()
            .iter()
            .map(|x| interior_normal_derivative_h_tilde_e(&cfg, id, *x).unwrap() * grid.weight())
            .sum();
        assert!(interior.abs() < 1e-12);
    }
}

#[test]
fn loop_integral_of_h_perp_gradient_vanishes() {
    let cfg = TwoDiskConfig::canonical(1.0, 1.0, 0.1).unwrap();
    let center = cfg.disk1().center();
    let radius = 1.03;
    let n = 4096;
    let mut total = 0.0;
    for k in 0..n {
        let a = 2.0 * PI * k as f64 / n as f64;
        let tangent = Vec2::new(-a.sin(), a.cos());
        let x = center + radius * Vec2::new(a.cos(), a.sin());
        total += grad_h_perp(&cfg, x).unwrap().dot(&tangent) * radius * 2.0 * PI / n as f64;
    }
    assert!(total.abs() < 1e-9);
}

#[test]
fn h_perp_gradient_differs_from_rotated_h_gradient_by_bounded_term() {
    let mut worst: f64 = 0.0;
    for eps in [1e-2, 1e-3, 1e-4, 1e-5] {
        let cfg = TwoDiskConfig::canonical(1.0, 1.0, eps).unwrap();
        let (a, b) = cfg.gap_segment();
        for k in 0..=20 {
            let x = a + (b - a) * (k as f64 / 20.0);
            let diff = grad_h_perp(&cfg, x).unwrap() - perp(grad_h(&cfg, x).unwrap());
            worst = worst.max(diff.norm());
        }
    }
    assert!(worst < 1.0 / PI);
}

#[test]
fn gap_gradient_of_h_blows_up_like_inverse_sqrt() {
    let epsilons = [1e-2, 1e-3, 1e-4, 1e-5];
    let maxima: Vec<f64> = epsilons
        .iter()
        .map(|&eps| {
            let cfg = TwoDiskConfig::canonical(1.0, 1.0, eps).unwrap();
            let (a, b) = cfg.gap_segment();
            (0..=50)
                .map(|k| grad_h(&cfg, a + (b - a) * (k as f64 / 50.0)).unwrap().norm())
                .fold(0.0, f64::max)
        })
        .collect();
    let slope = fit_slope(&epsilons, &maxima);
    assert!((slope + 0.5).abs() <= 0.05, "slope {slope}");
}

#[test]
fn annulus_gradient_bound_scales_like_inverse_sqrt() {
    let epsilons = [1e-2, 1e-3, 1e-4];
    let maxima: Vec<f64> = epsilons
        .iter()
        .map(|&eps| {
            let cfg = TwoDiskConfig::canonical(0.8, 1.5, eps).unwrap();
            let mut best: f64 = 0.0;
            for id in DiskId::BOTH {
                let grid = BoundaryGrid::new(*cfg.disk(id), 4096, 0.0).unwrap();
                for x in grid.nodes() {
                    best = best.max(grad_h(&cfg, *x).unwrap().norm());
                }
            }
            best
        })
        .collect();
    let slope = fit_slope(&epsilons, &maxima);
    assert!((slope + 0.5).abs() <= 0.05, "slope {slope}");
}

fn fit_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let num: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let den: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    num / den
}

proptest! {
    #[test]
    fn evaluations_are_rigid_motion_equivariant(
        angle in -3.0..3.0f64, sx in -3.0..3.0f64, sy in -3.0..3.0f64,
        px in -4.0..4.0f64, py in 1.5..4.0f64,
    ) {
        let cfg = TwoDiskConfig::canonical(1.0, 0.7, 0.05).unwrap();
        let shift = Vec2::new(sx, sy);
        let moved = cfg.rigid_motion(angle, shift).unwrap();
        let (s, c) = angle.sin_cos();
        let rot = |v: Vec2| Vec2::new(c * v.x - s * v.y, s * v.x + c * v.y);
        let x = Vec2::new(px, py);
        let y = rot(x) + shift;
        prop_assert!((h(&cfg, x).unwrap() - h(&moved, y).unwrap()).abs() < 1e-12);
        prop_assert!((h_tilde(&cfg, x).unwrap() - h_tilde(&moved, y).unwrap()).abs() < 1e-12);
        prop_assert!((rot(grad_h(&cfg, x).unwrap()) - grad_h(&moved, y).unwrap()).norm() < 1e-12);
    }

    #[test]
    fn intensities_are_rigid_motion_invariant(
        angle in -3.0..3.0f64, sx in -3.0..3.0f64, sy in -3.0..3.0f64,
        g1 in -2.0..2.0f64, g2 in -2.0..2.0f64, q in -1.0..1.0f64,
    ) {
        let cfg = TwoDiskConfig::canonical(1.3, 0.6, 0.02).unwrap();
        let background = HarmonicPolynomial::new(0.0, vec![
            HarmonicTerm { degree: 1, re: g1, im: g2 },
            HarmonicTerm { degree: 2, re: q, im: 0.5 * q },
        ]).unwrap();
        let shift = Vec2::new(sx, sy);
        let moved = cfg.rigid_motion(angle, shift).unwrap();
        // Transport H with the scene: H'(y) = H(R⁻¹(y - shift)), sampled through its gradient at p.
        let (s, c) = angle.sin_cos();
        let rot = |v: Vec2| Vec2::new(c * v.x - s * v.y, s * v.x + c * v.y);
        let g = rot(background.grad(cfg.p()));
        let linear = HarmonicPolynomial::linear(g.x, g.y);
        let a = stress_intensity(&cfg, &background);
        let b = stress_intensity(&moved, &HarmonicPolynomial::new(0.0, vec![HarmonicTerm {
            degree: 1, re: linear.terms()[0].re, im: linear.terms()[0].im,
        }]).unwrap());
        prop_assert!((a.a_perfect - b.a_perfect).abs() < 1e-10);
        prop_assert!((a.a_insulated - b.a_insulated).abs() < 1e-10);
    }
}

#[test]
fn boundary_data_quadrature_converges() {
    use twodisk::singular::{intensity_from_boundary_data, BoundarySample};
    let a = Disk::new(Vec2::new(-1.0, 0.0), 0.9).unwrap();
    let b = Disk::new(Vec2::new(0.95, 0.1), 1.0).unwrap();
    let cfg = TwoDiskConfig::new(a, b).unwrap();
    let background = HarmonicPolynomial::new(
        0.0,
        vec![
            HarmonicTerm {
                degree: 1,
                re: 1.0,
                im: 0.2,
            },
            HarmonicTerm {
                degree: 2,
                re: 0.3,
                im: -0.1,
            },
        ],
    )
    .unwrap();
    let estimate = |n: usize| {
        let samples: Vec<BoundarySample> = (0..n)
            .map(|k| {
                let t = 2.0 * PI * k as f64 / n as f64;
                // Ellipse enclosing both disks; outward normal from the implicit form.
                let (ax, by) = (5.0, 4.0);
                let point = Vec2::new(ax * t.cos(), by * t.sin());
                let normal = Vec2::new(point.x / (ax * ax), point.y / (by * by)).normalize();
                let speed = Vec2::new(-ax * t.sin(), by * t.cos()).norm();
                BoundarySample {
                    point,
                    normal,
                    flux: background.grad(point).dot(&normal),
                    trace: background.eval(point),
                    weight: speed * 2.0 * PI / n as f64,
                }
            })
            .collect();
        intensity_from_boundary_data(&cfg, &samples).unwrap()
    };
    let coarse = estimate(256);
    let fine = estimate(512);
    assert!((coarse - fine).abs() < 1e-6);
    assert_relative_eq!(fine, stress_intensity(&cfg, &background).a_perfect, max_relative = 1e-9);
}
