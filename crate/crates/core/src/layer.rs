//! Single and double layer potentials on circles with trapezoid quadrature.
//!
//! Densities live on equispaced nodes of a circle. Off-circle evaluation
//! uses the trapezoid rule and refuses targets closer than two node
//! spacings. On and near the circle the single layer of the trigonometric
//! interpolant of the density is available in closed form through its
//! Fourier coefficients, see [`CircleFourier`].

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::geometry::{Disk, TwoDiskConfig, Vec2};

const INV_2PI: f64 = 0.5 / PI;

/// How node angles are placed on each circle.
///
/// `Aligned` puts node 0 of both circles at the polar angle of the axis
/// direction `n`, so one node of each circle faces the gap. `Staggered`
/// shifts every node by a quarter spacing, offsets disk 2 by a half turn and
/// thereby avoids nodes sitting exactly across the gap from each other.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NodeLayout {
    Aligned,
    #[default]
    Staggered,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryGrid {
    disk: Disk,
    angles: Vec<f64>,
    nodes: Vec<Vec2>,
    normals: Vec<Vec2>,
    weight: f64,
}

impl BoundaryGrid {
    /// `m` equispaced nodes at angles `start + 2πk/m`.
    pub fn new(disk: Disk, m: usize, start: f64) -> Result<Self> {
        if m < 8 || !m.is_multiple_of(2) {
            return Err(Error::InvalidDiscretization(format!(
                "node count must be even and at least 8, got {m}"
            )));
        }
        let step = 2.0 * PI / m as f64;
        let angles: Vec<f64> = (0..m).map(|k| start + step * k as f64).collect();
        let normals: Vec<Vec2> = angles.iter().map(|a| Vec2::new(a.cos(), a.sin())).collect();
        let nodes = normals.iter().map(|nu| disk.center() + disk.radius() * nu).collect();
        Ok(Self {
            disk,
            angles,
            nodes,
            normals,
            weight: disk.radius() * step,
        })
    }

    /// Grids on both circles of `config` placed according to `layout`.
    pub fn pair(config: &TwoDiskConfig, m: usize, layout: NodeLayout) -> Result<[Arc<Self>; 2]> {
        let axis = config.axis_angle();
        let (start1, start2) = match layout {
            NodeLayout::Aligned => (axis, axis),
            NodeLayout::Staggered => {
                let shift = 0.25 * 2.0 * PI / m as f64;
                (axis + shift, axis + PI + shift)
            }
        };
        Ok([
            Arc::new(Self::new(*config.disk1(), m, start1)?),
            Arc::new(Self::new(*config.disk2(), m, start2)?),
        ])
    }

    #[inline]
    pub fn disk(&self) -> &Disk {
        &self.disk
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    #[inline]
    pub fn nodes(&self) -> &[Vec2] {
        &self.nodes
    }

    #[inline]
    pub fn normals(&self) -> &[Vec2] {
        &self.normals
    }

    #[inline]
    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    /// Arclength weight of every node, `2πr/M`.
    #[inline]
    pub fn weight(&self) -> f64 {
        self.weight
    }

    /// Distance below which off-circle quadrature is refused.
    #[inline]
    pub fn margin(&self) -> f64 {
        2.0 * self.weight
    }

    fn check_margin(&self, x: Vec2) -> Result<()> {
        let distance = self.disk.signed_distance(x).abs();
        let margin = self.margin();
        if distance < margin {
            return Err(Error::NearBoundary { distance, margin });
        }
        Ok(())
    }
}

/// Real values sampled on the nodes of one circle.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryDensity {
    grid: Arc<BoundaryGrid>,
    values: Vec<f64>,
}

impl BoundaryDensity {
    pub fn new(grid: Arc<BoundaryGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidDiscretization(format!(
                "density has {} values for {} nodes",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Arc<BoundaryGrid>, f: impl Fn(Vec2, Vec2) -> f64) -> Self {
        let values = grid
            .nodes()
            .iter()
            .zip(grid.normals())
            .map(|(&x, &nu)| f(x, nu))
            .collect();
        Self { grid, values }
    }

    #[inline]
    pub fn grid(&self) -> &Arc<BoundaryGrid> {
        &self.grid
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Trapezoid approximation of `∮ φ ds`.
    pub fn integral(&self) -> f64 {
        self.grid.weight * self.values.iter().sum::<f64>()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Subtracts the mean and returns the amount removed.
    pub fn project_mean_zero(&mut self) -> f64 {
        let mean = self.mean();
        self.values.iter_mut().for_each(|v| *v -= mean);
        mean
    }
}

/// Trapezoid value of `(1/2π)∮ log|x - y| φ(y) ds(y)`.
pub fn eval_single_layer(density: &BoundaryDensity, x: Vec2) -> Result<f64> {
    let grid = density.grid();
    grid.check_margin(x)?;
    let sum: f64 = grid
        .nodes()
        .iter()
        .zip(density.values())
        .map(|(y, phi)| (x - y).norm_squared().ln() * phi)
        .sum();
    Ok(0.5 * INV_2PI * grid.weight() * sum)
}

pub fn eval_single_layer_gradient(density: &BoundaryDensity, x: Vec2) -> Result<Vec2> {
    let grid = density.grid();
    grid.check_margin(x)?;
    let mut acc = Vec2::zeros();
    for (y, phi) in grid.nodes().iter().zip(density.values()) {
        let d = x - y;
        acc += d * (phi / d.norm_squared());
    }
    Ok(acc * (INV_2PI * grid.weight()))
}

/// Trapezoid value of `-(1/2π)∮ ⟨x - y, ν(y)⟩/|x - y|² φ(y) ds(y)`.
pub fn eval_double_layer(density: &BoundaryDensity, x: Vec2) -> Result<f64> {
    let grid = density.grid();
    grid.check_margin(x)?;
    let sum: f64 = grid
        .nodes()
        .iter()
        .zip(grid.normals())
        .zip(density.values())
        .map(|((y, nu), phi)| {
            let d = x - y;
            d.dot(nu) / d.norm_squared() * phi
        })
        .sum();
    Ok(-INV_2PI * grid.weight() * sum)
}

/// Nyström matrix of the normal derivative of the source single layer at
/// the target nodes: `w_l (1/2π) ⟨x_k - y_l, ν(x_k)⟩/|x_k - y_l|²`.
pub fn cross_kernel_block(target: &BoundaryGrid, source: &BoundaryGrid) -> Result<DMatrix<f64>> {
    let (dt, ds) = (target.disk(), source.disk());
    if (dt.center() - ds.center()).norm() <= dt.radius() + ds.radius() {
        return Err(Error::Overlapping {
            distance: (dt.center() - ds.center()).norm(),
            radii: dt.radius() + ds.radius(),
        });
    }
    let scale = INV_2PI * source.weight();
    Ok(DMatrix::from_fn(target.len(), source.len(), |k, l| {
        let d = target.nodes[k] - source.nodes[l];
        scale * d.dot(&target.normals[k]) / d.norm_squared()
    }))
}

/// Quadrature used for the cross-boundary blocks of the system.
///
/// `Trapezoid` evaluates the kernel at the source nodes. `Interpolatory`
/// integrates the kernel exactly against the trigonometric interpolant of the
/// source density, which stays accurate when the gap is narrower than the
/// node spacing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CrossQuadrature {
    #[default]
    Trapezoid,
    Interpolatory,
}

/// Cross block whose column `l` is the normal derivative at the target nodes
/// of the single layer of the `l`-th trigonometric Lagrange basis function on
/// the source circle.
pub fn interpolatory_cross_block(target: &BoundaryGrid, source: &BoundaryGrid) -> Result<DMatrix<f64>> {
    let (dt, ds) = (target.disk(), source.disk());
    if (dt.center() - ds.center()).norm() <= dt.radius() + ds.radius() {
        return Err(Error::Overlapping {
            distance: (dt.center() - ds.center()).norm(),
            radii: dt.radius() + ds.radius(),
        });
    }
    let m = source.len();
    let half = m / 2;
    let r = ds.radius();
    let mut block = DMatrix::zeros(target.len(), m);
    for (k, (x, nu)) in target.nodes().iter().zip(target.normals()).enumerate() {
        let d = x - ds.center();
        let rho = d.norm();
        let e_rho = d / rho;
        let (nr, nt) = (e_rho.dot(nu), e_rho.perp(nu));
        let theta = d.y.atan2(d.x);
        let q = r / rho;
        for (l, &theta_l) in source.angles().iter().enumerate() {
            let (s1, c1) = (theta - theta_l).sin_cos();
            let (mut cm, mut sm, mut qm) = (1.0, 0.0, 1.0);
            let (mut d_rho, mut d_theta) = (1.0 / m as f64, 0.0);
            for mode in 1..=half {
                (cm, sm) = (cm * c1 - sm * s1, sm * c1 + cm * s1);
                qm *= q;
                let f = if mode == half { 0.5 } else { 1.0 } / m as f64;
                d_rho += qm * f * cm;
                d_theta += qm * f * sm;
            }
            block[(k, l)] = r / rho * (nr * d_rho + nt * d_theta);
        }
    }
    Ok(block)
}

/// Applies [`cross_kernel_block`] to a density without forming the matrix.
pub fn apply_cross_kernel(target: &BoundaryGrid, density: &BoundaryDensity) -> Vec<f64> {
    let source = density.grid();
    let scale = INV_2PI * source.weight();
    target
        .nodes()
        .iter()
        .zip(target.normals())
        .map(|(x, nu)| {
            let sum: f64 = source
                .nodes()
                .iter()
                .zip(density.values())
                .map(|(y, phi)| {
                    let d = x - y;
                    d.dot(nu) / d.norm_squared() * phi
                })
                .sum();
            scale * sum
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Exterior,
    Interior,
}

/// Normal derivative of `S[φ]` on its own circle from either side.
///
/// On a circle the kernel `⟨x - y, ν(x)⟩/|x - y|²` is the constant `1/2r`,
/// so the principal value part reduces to `(1/4πr)∮φ ds`.
pub fn own_boundary_flux(density: &BoundaryDensity, side: Side) -> Vec<f64> {
    let r = density.grid().disk().radius();
    let k_star = density.integral() / (4.0 * PI * r);
    let sign = match side {
        Side::Exterior => 0.5,
        Side::Interior => -0.5,
    };
    density.values().iter().map(|phi| sign * phi + k_star).collect()
}

/// Real Fourier coefficients of the trigonometric interpolant of a density,
/// `φ(θ) = A₀ + Σ (A_m cos mθ + B_m sin mθ)` in the polar angle about the
/// circle center, with the Nyquist mode split symmetrically.
#[derive(Debug, Clone, PartialEq)]
pub struct CircleFourier {
    center: Vec2,
    radius: f64,
    a0: f64,
    a: Vec<f64>,
    b: Vec<f64>,
}

impl CircleFourier {
    pub fn new(density: &BoundaryDensity) -> Self {
        let grid = density.grid();
        let m = grid.len();
        let half = m / 2;
        let mut a = vec![0.0; half];
        let mut b = vec![0.0; half];
        for (&theta, &phi) in grid.angles().iter().zip(density.values()) {
            for mode in 1..=half {
                let (s, c) = (mode as f64 * theta).sin_cos();
                a[mode - 1] += phi * c;
                b[mode - 1] += phi * s;
            }
        }
        for (mode, (am, bm)) in a.iter_mut().zip(b.iter_mut()).enumerate() {
            let scale = if mode + 1 == half { 1.0 } else { 2.0 } / m as f64;
            *am *= scale;
            *bm *= scale;
        }
        Self {
            center: grid.disk().center(),
            radius: grid.disk().radius(),
            a0: density.mean(),
            a,
            b,
        }
    }

    /// Value of the interpolant at polar angle `theta`.
    pub fn density_at(&self, theta: f64) -> f64 {
        self.a0
            + self
                .a
                .iter()
                .zip(&self.b)
                .enumerate()
                .map(|(k, (am, bm))| {
                    let (s, c) = ((k + 1) as f64 * theta).sin_cos();
                    am * c + bm * s
                })
                .sum::<f64>()
    }

    /// Single layer potential of the interpolant and its gradient at a
    /// point on or outside the circle, in closed form:
    /// `S = r A₀ log ρ - (r/2) Σ (1/m)(r/ρ)^m (A_m cos mθ + B_m sin mθ)`.
    /// On the circle itself the gradient is the exterior limit.
    pub fn exterior_single_layer(&self, x: Vec2) -> Result<(f64, Vec2)> {
        let d = x - self.center;
        let rho = d.norm();
        if rho < self.radius * (1.0 - 1e-12) {
            return Err(Error::NearBoundary {
                distance: rho - self.radius,
                margin: 0.0,
            });
        }
        let rho = rho.max(self.radius);
        let e_rho = d / d.norm();
        let e_theta = Vec2::new(-e_rho.y, e_rho.x);
        let (sin1, cos1) = (e_rho.y, e_rho.x);
        let q = self.radius / rho;

        let mut value = self.radius * self.a0 * rho.ln();
        let mut d_rho = self.radius * self.a0 / rho;
        let mut d_theta = 0.0;
        let (mut cm, mut sm) = (1.0, 0.0);
        let mut qm = 1.0;
        for (k, (am, bm)) in self.a.iter().zip(&self.b).enumerate() {
            let mode = (k + 1) as f64;
            (cm, sm) = (cm * cos1 - sm * sin1, sm * cos1 + cm * sin1);
            qm *= q;
            let even = am * cm + bm * sm;
            let odd = -am * sm + bm * cm;
            value -= 0.5 * self.radius * qm * even / mode;
            d_rho += 0.5 * self.radius * qm * even / rho;
            d_theta -= 0.5 * self.radius * qm * odd / rho;
        }
        Ok((value, e_rho * d_rho + e_theta * d_theta))
    }
}
