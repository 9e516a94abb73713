//! Reference densities for the augmented perfect-conductor system from the
//! method of images.
//!
//! On `∂B₁` the augmented density is
//! `ψ₁ = 2 Σ_m ∂/∂ν [g₁ ∘ (R₁R₂)^m]` with
//! `g₁ = H + (a/2π) log|x - c₂| - [H - (a/2π) log|x - c₁|] ∘ R₂`, and
//! symmetrically on `∂B₂` with the roles of the disks exchanged. Each term is
//! evaluated by pushing the node through the reflections while accumulating
//! the Jacobian, then pulling the analytic gradient back with `Jᵀ`.

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;

use crate::background::HarmonicPolynomial;
use crate::error::{Error, Result};
use crate::geometry::{reflect, reflect_jacobian, Disk, DiskId, Mat2, TwoDiskConfig, Vec2};
use crate::layer::BoundaryGrid;
use crate::singular;

const INV_2PI: f64 = 0.5 / PI;

pub const DEFAULT_M_MAX: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesReport {
    /// Number of terms summed on each boundary.
    pub terms: [usize; 2],
    /// Sup-norm of the last summed term relative to the accumulated sup-norm.
    pub last_relative_term: [f64; 2],
    /// Ratio of the sup-norms of the last two terms.
    pub tail_ratio: [f64; 2],
    /// Geometric tail estimate `last·ratio/(1 - ratio)` in sup-norm.
    pub tail_estimate: [f64; 2],
    pub truncated: bool,
}

#[derive(Debug, Clone)]
pub struct SeriesDensities {
    pub psi: [Vec<f64>; 2],
    pub report: SeriesReport,
}

struct Walker {
    y: Vec2,
    jac: Mat2,
}

fn log_grad(x: Vec2, c: Vec2) -> Vec2 {
    let d = x - c;
    d * (INV_2PI / d.norm_squared())
}

/// `∇g` for the seed function on disk `id`; `near` is the disk whose
/// reflection enters `g`, `far_center` the center of the own disk.
fn seed_gradient(
    background: &HarmonicPolynomial,
    a: f64,
    sign: f64,
    own: &Disk,
    other: &Disk,
    x: Vec2,
) -> Result<Vec2> {
    let y = reflect(other, x)?;
    let jac = reflect_jacobian(other, x)?;
    let inner = background.grad(y) - sign * a * log_grad(y, own.center());
    Ok(background.grad(x) + sign * a * log_grad(x, other.center()) - jac.transpose() * inner)
}

fn sum_on_boundary(
    config: &TwoDiskConfig,
    background: &HarmonicPolynomial,
    a: f64,
    id: DiskId,
    grid: &BoundaryGrid,
    tol_rel: f64,
    m_max: usize,
) -> Result<(Vec<f64>, usize, f64, f64, f64, bool)> {
    let own = config.disk(id);
    let other = config.disk(id.other());
    let sign = match id {
        DiskId::First => 1.0,
        DiskId::Second => -1.0,
    };
    let mut walkers: Vec<Walker> = grid
        .nodes()
        .iter()
        .map(|&y| Walker {
            y,
            jac: Mat2::identity(),
        })
        .collect();
    let normals = grid.normals();
    let mut acc = vec![0.0; grid.len()];
    let mut term = vec![0.0; grid.len()];
    let mut previous_sup = f64::NAN;
    let mut ratio = f64::NAN;
    let mut relative = f64::INFINITY;
    let mut count = 0;
    while count < m_max {
        walkers
            .par_iter()
            .zip(normals.par_iter())
            .zip(term.par_iter_mut())
            .try_for_each(|((w, nu), t)| -> Result<()> {
                let g = seed_gradient(background, a, sign, own, other, w.y)?;
                *t = 2.0 * (w.jac.transpose() * g).dot(nu);
                Ok(())
            })?;
        let sup = term.iter().fold(0.0f64, |s, t| s.max(t.abs()));
        acc.iter_mut().zip(&term).for_each(|(a, t)| *a += t);
        let acc_sup = acc.iter().fold(0.0f64, |s, v| s.max(v.abs()));
        count += 1;
        ratio = sup / previous_sup;
        previous_sup = sup;
        relative = if acc_sup > 0.0 { sup / acc_sup } else { 0.0 };
        if relative < tol_rel || sup == 0.0 {
            break;
        }
        walkers.par_iter_mut().try_for_each(|w| -> Result<()> {
            for disk in [other, own] {
                let jac = reflect_jacobian(disk, w.y)?;
                w.y = reflect(disk, w.y)?;
                w.jac = jac * w.jac;
            }
            Ok(())
        })?;
    }
    let truncated = !(relative < tol_rel || previous_sup == 0.0);
    let tail = if ratio < 1.0 {
        previous_sup * ratio / (1.0 - ratio)
    } else {
        f64::INFINITY
    };
    Ok((acc, count, relative, ratio, tail, truncated))
}

/// Sums the image series at the nodes of both grids.
///
/// Truncation happens when the sup-norm of the latest term drops below
/// `tol_rel` times the sup-norm of the running sum, or after `m_max` terms,
/// in which case the report is flagged as truncated.
pub fn series_densities(
    config: &TwoDiskConfig,
    background: &HarmonicPolynomial,
    a: f64,
    grids: &[Arc<BoundaryGrid>; 2],
    tol_rel: f64,
    m_max: usize,
) -> Result<SeriesDensities> {
    if !(tol_rel > 0.0) || m_max == 0 {
        return Err(Error::Usage(
            "series tolerance must be positive and m_max nonzero".into(),
        ));
    }
    let first = sum_on_boundary(config, background, a, DiskId::First, &grids[0], tol_rel, m_max)?;
    let second = sum_on_boundary(config, background, a, DiskId::Second, &grids[1], tol_rel, m_max)?;
    let report = SeriesReport {
        terms: [first.1, second.1],
        last_relative_term: [first.2, second.2],
        tail_ratio: [first.3, second.3],
        tail_estimate: [first.4, second.4],
        truncated: first.5 || second.5,
    };
    Ok(SeriesDensities {
        psi: [first.0, second.0],
        report,
    })
}

/// Exterior normal flux of the augmented series solution on both grids.
///
/// The augmented equation turns the exterior flux into
/// `ψ + K*ψ + a(∂h̃/∂ν - ∂h̃ᵉ/∂ν|₋)`, which needs no quadrature of the
/// cross-boundary layer.
pub fn flux_from_series(
    config: &TwoDiskConfig,
    a: f64,
    grids: &[Arc<BoundaryGrid>; 2],
    psi: &[Vec<f64>; 2],
) -> Result<[Vec<f64>; 2]> {
    let mut out = [Vec::new(), Vec::new()];
    for id in DiskId::BOTH {
        let grid = &grids[id.index()];
        let values = &psi[id.index()];
        let r = grid.disk().radius();
        let k_star = grid.weight() * values.iter().sum::<f64>() / (4.0 * PI * r);
        out[id.index()] = grid
            .nodes()
            .iter()
            .zip(grid.normals())
            .zip(values)
            .map(|((x, nu), v)| {
                let outer = singular::grad_h_tilde(config, *x)?.dot(nu);
                let inner = singular::h_tilde_e_kernel(config, id, *x, *nu);
                Ok(v + k_star + a * (outer - inner))
            })
            .collect::<Result<_>>()?;
    }
    Ok(out)
}

/// Densities of the standard single layer representation that reproduce
/// the augmented series solution: the singular term `a·h̃` is itself a
/// single layer on the two circles with density `a(∂h̃/∂ν - ∂h̃ᵉ/∂ν|₋)`.
pub fn standard_densities_from_series(
    config: &TwoDiskConfig,
    a: f64,
    grids: &[Arc<BoundaryGrid>; 2],
    psi: &[Vec<f64>; 2],
) -> Result<[Vec<f64>; 2]> {
    let mut out = [Vec::new(), Vec::new()];
    for id in DiskId::BOTH {
        let grid = &grids[id.index()];
        out[id.index()] = grid
            .nodes()
            .iter()
            .zip(grid.normals())
            .zip(&psi[id.index()])
            .map(|((x, nu), v)| {
                let outer = singular::grad_h_tilde(config, *x)?.dot(nu);
                let inner = singular::h_tilde_e_kernel(config, id, *x, *nu);
                Ok(v + a * (outer - inner))
            })
            .collect::<Result<_>>()?;
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct ReferenceFlux {
    pub flux: [Vec<f64>; 2],
    pub series: SeriesDensities,
}

pub fn reference_flux(
    config: &TwoDiskConfig,
    background: &HarmonicPolynomial,
    a: f64,
    grids: &[Arc<BoundaryGrid>; 2],
    tol_rel: f64,
    m_max: usize,
) -> Result<ReferenceFlux> {
    let series = series_densities(config, background, a, grids, tol_rel, m_max)?;
    let flux = flux_from_series(config, a, grids, &series.psi)?;
    Ok(ReferenceFlux { flux, series })
}

fn check_pair(a: &[f64], b: &[f64], boundary: usize) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::InvalidDiscretization(format!(
            "flux lengths differ on boundary {boundary}: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    let norm = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::ZeroReference(boundary));
    }
    Ok(norm)
}

/// `‖a₁-b₁‖/(2‖b₁‖) + ‖a₂-b₂‖/(2‖b₂‖)` with discrete L² norms on each
/// boundary; `b` is the reference.
pub fn relative_l2_error(a: [&[f64]; 2], b: [&[f64]; 2]) -> Result<f64> {
    let mut total = 0.0;
    for j in 0..2 {
        let norm = check_pair(a[j], b[j], j + 1)?;
        let diff = a[j].iter().zip(b[j]).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
        total += diff / (2.0 * norm);
    }
    Ok(total)
}

/// Sup-norm analogue of [`relative_l2_error`] together with the node index
/// of the largest deviation on each boundary.
pub fn relative_linf_error(a: [&[f64]; 2], b: [&[f64]; 2]) -> Result<(f64, [usize; 2])> {
    let mut total = 0.0;
    let mut argmax = [0; 2];
    for j in 0..2 {
        check_pair(a[j], b[j], j + 1)?;
        let norm = b[j].iter().fold(0.0f64, |s, v| s.max(v.abs()));
        let (idx, diff) = a[j]
            .iter()
            .zip(b[j])
            .map(|(x, y)| (x - y).abs())
            .enumerate()
            .fold((0, 0.0f64), |best, (i, d)| if d > best.1 { (i, d) } else { best });
        argmax[j] = idx;
        total += diff / (2.0 * norm);
    }
    Ok((total, argmax))
}
