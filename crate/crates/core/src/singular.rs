//! Explicit singular functions of the two-disk problem and the stress
//! intensity factors multiplying them.
//!
//! `h = (1/2π)(log|x - p1| - log|x - p2|)` is constant on both circles and
//! carries unit flux, with sign `+1` through `∂B₁` and `-1` through `∂B₂`
//! when measured along the outward normal of each disk. `h̃` subtracts the
//! logarithms centered at the disk centers, and `h⊥` is its harmonic
//! conjugate built from argument functions.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::background::HarmonicPolynomial;
use crate::error::{Error, Result};
use crate::geometry::{perp, DiskId, TwoDiskConfig, Vec2};

const INV_2PI: f64 = 0.5 / PI;

/// Relative tolerance used to decide that a point sits on a boundary circle.
const ON_CIRCLE_TOL: f64 = 1e-9;

fn log_dist(x: Vec2, q: Vec2) -> Result<f64> {
    let d = (x - q).norm();
    if d == 0.0 {
        return Err(Error::Pole(x));
    }
    Ok(d.ln())
}

/// Gradient of `log|x - q|`.
fn grad_log(x: Vec2, q: Vec2) -> Result<Vec2> {
    let d = x - q;
    let s = d.norm_squared();
    if s == 0.0 {
        return Err(Error::Pole(x));
    }
    Ok(d / s)
}

fn arg_quotient(x: Vec2, a: Vec2, b: Vec2) -> Result<f64> {
    let za = Complex64::new(x.x - a.x, x.y - a.y);
    let zb = Complex64::new(x.x - b.x, x.y - b.y);
    if za.norm_sqr() == 0.0 || zb.norm_sqr() == 0.0 {
        return Err(Error::Pole(x));
    }
    Ok((za * zb.conj()).arg())
}

pub fn h(config: &TwoDiskConfig, x: Vec2) -> Result<f64> {
    Ok(INV_2PI * (log_dist(x, config.p1())? - log_dist(x, config.p2())?))
}

pub fn grad_h(config: &TwoDiskConfig, x: Vec2) -> Result<Vec2> {
    Ok(INV_2PI * (grad_log(x, config.p1())? - grad_log(x, config.p2())?))
}

pub fn h_tilde(config: &TwoDiskConfig, x: Vec2) -> Result<f64> {
    let c1 = config.disk1().center();
    let c2 = config.disk2().center();
    Ok(h(config, x)? - INV_2PI * (log_dist(x, c1)? - log_dist(x, c2)?))
}

pub fn grad_h_tilde(config: &TwoDiskConfig, x: Vec2) -> Result<Vec2> {
    let c1 = config.disk1().center();
    let c2 = config.disk2().center();
    Ok(grad_h(config, x)? - INV_2PI * (grad_log(x, c1)? - grad_log(x, c2)?))
}

/// Exact mean of `h̃` over the circle `∂B_j`.
///
/// By the mean-value property each logarithm averages to `log r_j` when its
/// pole lies inside the disk and to the log of the center distance otherwise,
/// so only the two outside poles survive.
pub fn h_tilde_boundary_mean(config: &TwoDiskConfig, id: DiskId) -> f64 {
    let c1 = config.disk1().center();
    let c2 = config.disk2().center();
    let d = (c2 - c1).norm();
    match id {
        DiskId::First => INV_2PI * (d / (config.p2() - c1).norm()).ln(),
        DiskId::Second => -INV_2PI * (d / (config.p1() - c2).norm()).ln(),
    }
}

/// Interior limit of the normal derivative of the extension of `h̃` into
/// `B_j`, taken along the outward normal of `B_j` at the boundary point `x`.
pub fn interior_normal_derivative_h_tilde_e(config: &TwoDiskConfig, id: DiskId, x: Vec2) -> Result<f64> {
    let disk = config.disk(id);
    let distance = disk.signed_distance(x);
    if distance.abs() > ON_CIRCLE_TOL * disk.radius() {
        return Err(Error::NotOnBoundary {
            disk: id.index() + 1,
            distance,
        });
    }
    let nu = disk.outward_normal(x);
    Ok(h_tilde_e_kernel(config, id, x, nu))
}

/// The kernel `±(1/2π)⟨x - c_k, ν⟩/|x - c_k|²` of the interior extension,
/// with `c_k` the center of the other disk. No boundary check.
pub(crate) fn h_tilde_e_kernel(config: &TwoDiskConfig, id: DiskId, x: Vec2, nu: Vec2) -> f64 {
    let other = config.disk(id.other()).center();
    let d = x - other;
    let k = INV_2PI * d.dot(&nu) / d.norm_squared();
    match id {
        DiskId::First => k,
        DiskId::Second => -k,
    }
}

/// Conjugate kernel `±(1/2π)⟨(x - c_k)^⊥, ν⟩/|x - c_k|²` used by the
/// insulated system.
pub(crate) fn h_perp_e_kernel(config: &TwoDiskConfig, id: DiskId, x: Vec2, nu: Vec2) -> f64 {
    let other = config.disk(id.other()).center();
    let d = x - other;
    let k = INV_2PI * perp(d).dot(&nu) / d.norm_squared();
    match id {
        DiskId::First => k,
        DiskId::Second => -k,
    }
}

/// `h⊥ = (1/2π)[arg((x - p1)/(x - c1)) - arg((x - p2)/(x - c2))]`.
///
/// Each quotient is a negative real only on the segment between its two
/// poles, which lies inside a disk, so the principal argument is continuous
/// on the whole exterior.
pub fn h_perp(config: &TwoDiskConfig, x: Vec2) -> Result<f64> {
    let c1 = config.disk1().center();
    let c2 = config.disk2().center();
    Ok(INV_2PI * (arg_quotient(x, config.p1(), c1)? - arg_quotient(x, config.p2(), c2)?))
}

pub fn grad_h_perp(config: &TwoDiskConfig, x: Vec2) -> Result<Vec2> {
    Ok(perp(grad_h_tilde(config, x)?))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StressIntensity {
    pub a_perfect: f64,
    pub a_insulated: f64,
}

/// `a = (4π r₁r₂/(r₁+r₂))·(n·∇H)(p)` and `a⊥` with `t` in place of `n`.
pub fn stress_intensity(config: &TwoDiskConfig, background: &HarmonicPolynomial) -> StressIntensity {
    let g = background.grad(config.p());
    let scale = intensity_scale(config);
    StressIntensity {
        a_perfect: scale * config.n().dot(&g),
        a_insulated: scale * config.t().dot(&g),
    }
}

fn intensity_scale(config: &TwoDiskConfig) -> f64 {
    let r1 = config.disk1().radius();
    let r2 = config.disk2().radius();
    4.0 * PI * r1 * r2 / (r1 + r2)
}

/// `H(p2) - H(p1)`, the leading-order jump between the boundary potentials
/// of two perfectly conducting disks.
pub fn potential_difference(config: &TwoDiskConfig, background: &HarmonicPolynomial) -> f64 {
    background.eval(config.p2()) - background.eval(config.p1())
}

/// One quadrature sample of Cauchy data on a closed curve enclosing both disks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundarySample {
    pub point: Vec2,
    /// Outward unit normal of the enclosing curve.
    pub normal: Vec2,
    /// Prescribed flux `∂u/∂ν`.
    pub flux: f64,
    /// Boundary trace of the solution, i.e. the Neumann-to-Dirichlet image of `flux`.
    pub trace: f64,
    /// Arclength quadrature weight.
    pub weight: f64,
}

/// Recovers the stress intensity `a` from Cauchy data on an enclosing curve.
///
/// Green's representation of the background reproduces `n·∇H(p)` as
///
/// ```text
/// -(1/2π) ∮ [⟨p-y,n⟩/|p-y|² g + (⟨n,ν⟩/|p-y|² - 2⟨p-y,n⟩⟨p-y,ν⟩/|p-y|⁴) Λg] ds
/// ```
///
/// and the factor `4πr₁r₂/(r₁+r₂)` turns this into `-(2r₁r₂/(r₁+r₂))·∮[...]`.
pub fn intensity_from_boundary_data(config: &TwoDiskConfig, samples: &[BoundarySample]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    let total: f64 = samples.iter().map(|s| s.weight).sum();
    if total == 0.0 {
        return Err(Error::ZeroWeight);
    }
    let p = config.p();
    let n = config.n();
    let mut acc = 0.0;
    for s in samples {
        let d = p - s.point;
        let q = d.norm_squared();
        let dn = d.dot(&n);
        let g_kernel = dn / q;
        let trace_kernel = n.dot(&s.normal) / q - 2.0 * dn * d.dot(&s.normal) / (q * q);
        acc += s.weight * (g_kernel * s.flux + trace_kernel * s.trace);
    }
    let r1 = config.disk1().radius();
    let r2 = config.disk2().radius();
    Ok(-2.0 * r1 * r2 / (r1 + r2) * acc)
}
