use proptest::prelude::*;
use twodisk::{HarmonicPolynomial, HarmonicTerm, TwoDiskConfig, Vec2};

fn polynomial(max_degree: u32) -> impl Strategy<Value = HarmonicPolynomial> {
    (
        -2.0..2.0f64,
        prop::collection::vec((-2.0..2.0f64, -2.0..2.0f64), max_degree as usize),
    )
        .prop_map(|(c, coefs)| {
            let terms = coefs
                .into_iter()
                .enumerate()
                .map(|(k, (re, im))| HarmonicTerm {
                    degree: k as u32 + 1,
                    re,
                    im,
                })
                .collect();
            HarmonicPolynomial::new(c, terms).unwrap()
        })
}

fn point() -> impl Strategy<Value = Vec2> {
    (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(x, y)| Vec2::new(x, y))
}

proptest! {
    #[test]
    fn laplacian_vanishes(h in polynomial(4), x in point()) {
        let d = 1e-3;
        let e1 = Vec2::new(d, 0.0);
        let e2 = Vec2::new(0.0, d);
        let lap = (h.eval(x + e1) + h.eval(x - e1) + h.eval(x + e2) + h.eval(x - e2) - 4.0 * h.eval(x)) / (d * d);
        let scale = h.terms().iter().map(|t| t.re.abs() + t.im.abs()).sum::<f64>().max(1.0) * 40.0;
        prop_assert!(lap.abs() <= 1e-6 * scale);
    }

    #[test]
    fn gradient_matches_central_differences(h in polynomial(3), x in point()) {
        let d = 1e-5;
        let fd = Vec2::new(
            (h.eval(x + Vec2::new(d, 0.0)) - h.eval(x - Vec2::new(d, 0.0))) / (2.0 * d),
            (h.eval(x + Vec2::new(0.0, d)) - h.eval(x - Vec2::new(0.0, d))) / (2.0 * d),
        );
        prop_assert!((h.grad(x) - fd).norm() <= 1e-7 * h.grad(x).norm().max(1.0) * 10.0);
    }

    #[test]
    fn conjugate_satisfies_cauchy_riemann(h in polynomial(4), x in point()) {
        let g = h.grad(x);
        let gc = h.conjugate().grad(x);
        let scale = g.norm().max(1.0);
        // H̃ + iH is analytic: ∂₁H̃ = ∂₂H and ∂₂H̃ = -∂₁H.
        prop_assert!((gc.x - g.y).abs() <= 1e-12 * scale);
        prop_assert!((gc.y + g.x).abs() <= 1e-12 * scale);
    }

    #[test]
    fn double_conjugate_negates_nonconstant_part(h in polynomial(3), x in point()) {
        let cc = h.conjugate().conjugate();
        prop_assert!((cc.eval(x) + h.eval(x) - h.constant()).abs() <= 1e-12 * (1.0 + h.eval(x).abs()));
    }

    #[test]
    fn conjugate_normal_derivative_is_tangential(
        h in polynomial(2), r1 in 0.3..2.0f64, r2 in 0.3..2.0f64, angle in -3.0..3.0f64,
    ) {
        let cfg = TwoDiskConfig::canonical(r1, r2, 0.05).unwrap().rigid_motion(angle, Vec2::new(0.3, -0.7)).unwrap();
        let lhs = cfg.n().dot(&h.conjugate().grad(cfg.p()));
        let rhs = cfg.t().dot(&h.grad(cfg.p()));
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs.abs()));
    }
}
