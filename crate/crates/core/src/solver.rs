//! Assembly and solution of the 2M×2M boundary integral systems.
//!
//! With `ν` the outward normal of each disk the systems read
//! `λφ₁ + A₁₂φ₂ = Y₁`, `A₂₁φ₁ + λφ₂ = Y₂` where `A₁₂` is the Nyström matrix
//! of `∂S₂/∂ν` on `∂B₁` (and vice versa). For a perfect conductor the
//! exterior flux of `u` equals the density, which forces `λ = -1/2`; for an
//! insulator the flux vanishes and `λ = +1/2`.
//!
//! In augmented mode the representation carries the singular term
//! `a·h̃` (perfect) or `a⊥·h⊥` (insulated) explicitly and the right-hand side
//! subtracts the normal derivative of its harmonic extension into each disk.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::background::HarmonicPolynomial;
use crate::error::{Error, Result};
use crate::geometry::{DiskId, TwoDiskConfig, Vec2};
use crate::layer::{
    apply_cross_kernel, cross_kernel_block, eval_single_layer, eval_single_layer_gradient, interpolatory_cross_block,
    own_boundary_flux, BoundaryDensity, BoundaryGrid, CircleFourier, CrossQuadrature, NodeLayout, Side,
};
use crate::singular::{self, stress_intensity};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Conductivity {
    Perfect,
    Insulated,
}

impl Conductivity {
    /// Diagonal coefficient of the system under outward disk normals.
    pub fn lambda(self) -> f64 {
        match self {
            Conductivity::Perfect => -0.5,
            Conductivity::Insulated => 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Standard,
    Augmented,
}

/// Intensity coefficient tagged with the conductivity it was computed for.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SingularCoefficient {
    Perfect(f64),
    Insulated(f64),
}

impl SingularCoefficient {
    /// Closed-form `a` or `a⊥` for the given background.
    pub fn closed_form(config: &TwoDiskConfig, background: &HarmonicPolynomial, conductivity: Conductivity) -> Self {
        let s = stress_intensity(config, background);
        match conductivity {
            Conductivity::Perfect => SingularCoefficient::Perfect(s.a_perfect),
            Conductivity::Insulated => SingularCoefficient::Insulated(s.a_insulated),
        }
    }

    pub fn conductivity(self) -> Conductivity {
        match self {
            SingularCoefficient::Perfect(_) => Conductivity::Perfect,
            SingularCoefficient::Insulated(_) => Conductivity::Insulated,
        }
    }

    pub fn value(self) -> f64 {
        match self {
            SingularCoefficient::Perfect(a) | SingularCoefficient::Insulated(a) => a,
        }
    }
}

/// Node count per circle, node placement and cross-block quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Discretization {
    pub m: usize,
    pub layout: NodeLayout,
    pub quadrature: CrossQuadrature,
}

impl Discretization {
    /// Staggered nodes with trapezoid cross blocks.
    pub fn new(m: usize) -> Self {
        Self {
            m,
            layout: NodeLayout::default(),
            quadrature: CrossQuadrature::default(),
        }
    }

    pub fn with_layout(self, layout: NodeLayout) -> Self {
        Self { layout, ..self }
    }

    pub fn with_quadrature(self, quadrature: CrossQuadrature) -> Self {
        Self { quadrature, ..self }
    }
}

#[derive(Debug, Clone)]
pub struct AssembledSystem {
    config: TwoDiskConfig,
    conductivity: Conductivity,
    quadrature: CrossQuadrature,
    grids: [Arc<BoundaryGrid>; 2],
    matrix: DMatrix<f64>,
}

pub fn assemble(config: &TwoDiskConfig, disc: Discretization, conductivity: Conductivity) -> Result<AssembledSystem> {
    let m = disc.m;
    let grids = BoundaryGrid::pair(config, m, disc.layout)?;
    let block = match disc.quadrature {
        CrossQuadrature::Trapezoid => cross_kernel_block,
        CrossQuadrature::Interpolatory => interpolatory_cross_block,
    };
    let a12 = block(&grids[0], &grids[1])?;
    let a21 = block(&grids[1], &grids[0])?;
    let lambda = conductivity.lambda();
    let mut matrix = DMatrix::zeros(2 * m, 2 * m);
    matrix.view_mut((0, 0), (m, m)).fill_with_identity();
    matrix.view_mut((m, m), (m, m)).fill_with_identity();
    matrix *= lambda;
    matrix.view_mut((0, m), (m, m)).copy_from(&a12);
    matrix.view_mut((m, 0), (m, m)).copy_from(&a21);
    Ok(AssembledSystem {
        config: config.clone(),
        conductivity,
        quadrature: disc.quadrature,
        grids,
        matrix,
    })
}

impl AssembledSystem {
    pub fn config(&self) -> &TwoDiskConfig {
        &self.config
    }

    pub fn conductivity(&self) -> Conductivity {
        self.conductivity
    }

    pub fn lambda(&self) -> f64 {
        self.conductivity.lambda()
    }

    pub fn quadrature(&self) -> CrossQuadrature {
        self.quadrature
    }

    /// Nodes per circle.
    pub fn m(&self) -> usize {
        self.grids[0].len()
    }

    pub fn grid(&self, id: DiskId) -> &Arc<BoundaryGrid> {
        &self.grids[id.index()]
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn a12(&self) -> DMatrix<f64> {
        let m = self.m();
        self.matrix.view((0, m), (m, m)).into_owned()
    }

    pub fn a21(&self) -> DMatrix<f64> {
        let m = self.m();
        self.matrix.view((m, 0), (m, m)).into_owned()
    }

    /// Splits a stacked vector into the two boundary densities.
    pub fn split(&self, stacked: &DVector<f64>) -> Result<[BoundaryDensity; 2]> {
        let m = self.m();
        Ok([
            BoundaryDensity::new(self.grids[0].clone(), stacked.rows(0, m).iter().copied().collect())?,
            BoundaryDensity::new(self.grids[1].clone(), stacked.rows(m, m).iter().copied().collect())?,
        ])
    }

    /// Stacks two densities into a single vector (disk 1 first).
    pub fn stack(densities: &[BoundaryDensity; 2]) -> DVector<f64> {
        DVector::from_iterator(
            densities[0].values().len() + densities[1].values().len(),
            densities[0].values().iter().chain(densities[1].values()).copied(),
        )
    }

    fn nodewise(&self, f: impl Fn(DiskId, Vec2, Vec2) -> f64) -> DVector<f64> {
        let m = self.m();
        let mut out = DVector::zeros(2 * m);
        for id in DiskId::BOTH {
            let grid = self.grid(id);
            for (k, (x, nu)) in grid.nodes().iter().zip(grid.normals()).enumerate() {
                out[id.index() * m + k] = f(id, *x, *nu);
            }
        }
        out
    }
}

/// `-∂H/∂ν` at the nodes of both circles, disk 1 first.
pub fn rhs_standard(system: &AssembledSystem, background: &HarmonicPolynomial) -> DVector<f64> {
    system.nodewise(|_, x, nu| -background.grad(x).dot(&nu))
}

/// Standard right-hand side minus the intensity times the normal derivative
/// of the singular term's harmonic extension into each disk.
pub fn rhs_augmented(
    system: &AssembledSystem,
    background: &HarmonicPolynomial,
    coefficient: SingularCoefficient,
) -> Result<DVector<f64>> {
    if coefficient.conductivity() != system.conductivity {
        return Err(Error::Usage(format!(
            "{:?} intensity supplied to a {:?} system",
            coefficient.conductivity(),
            system.conductivity
        )));
    }
    let config = &system.config;
    let a = coefficient.value();
    Ok(system.nodewise(|id, x, nu| {
        let correction = match coefficient {
            SingularCoefficient::Perfect(_) => singular::h_tilde_e_kernel(config, id, x, nu),
            SingularCoefficient::Insulated(_) => singular::h_perp_e_kernel(config, id, x, nu),
        };
        -background.grad(x).dot(&nu) - a * correction
    }))
}

/// Singular values in decreasing order together with the left singular vectors.
#[derive(Debug, Clone)]
pub struct SvdDiagnostics {
    singular_values: Vec<f64>,
    left: DMatrix<f64>,
}

impl SvdDiagnostics {
    pub fn new(matrix: &DMatrix<f64>) -> Result<Self> {
        let svd = matrix.clone().svd(true, false);
        let u = svd
            .u
            .ok_or_else(|| Error::Usage("singular value decomposition did not converge".into()))?;
        let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
        order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
        let singular_values = order.iter().map(|&i| svd.singular_values[i]).collect();
        let left = DMatrix::from_fn(u.nrows(), order.len(), |r, c| u[(r, order[c])]);
        Ok(Self { singular_values, left })
    }

    pub fn singular_values(&self) -> &[f64] {
        &self.singular_values
    }

    pub fn sigma_max(&self) -> f64 {
        self.singular_values[0]
    }

    pub fn sigma_min(&self) -> f64 {
        *self.singular_values.last().unwrap_or(&0.0)
    }

    pub fn condition_number(&self) -> f64 {
        self.sigma_max() / self.sigma_min()
    }

    /// `|⟨u_i, v⟩|` for the `count` smallest singular values, smallest first.
    pub fn projections(&self, v: &DVector<f64>, count: usize) -> Vec<(f64, f64)> {
        let n = self.singular_values.len();
        (0..count.min(n))
            .map(|rank| {
                let i = n - 1 - rank;
                (self.singular_values[i], self.left.column(i).dot(v).abs())
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projection {
    /// 1 for the smallest singular value.
    pub rank_from_smallest: usize,
    pub sigma: f64,
    pub rhs: f64,
    pub residual: Option<f64>,
}

/// Projections of `rhs` (and optionally a residual vector) onto the left
/// singular vectors of the `count` smallest singular values.
pub fn svd_projections(
    system: &AssembledSystem,
    rhs: &DVector<f64>,
    residual: Option<&DVector<f64>>,
    count: usize,
) -> Result<Vec<Projection>> {
    let n = system.matrix.nrows();
    if count > n {
        return Err(Error::Usage(format!(
            "requested {count} projections from {n} singular vectors"
        )));
    }
    let svd = SvdDiagnostics::new(&system.matrix)?;
    let res = residual.map(|r| svd.projections(r, count));
    Ok(svd
        .projections(rhs, count)
        .into_iter()
        .enumerate()
        .map(|(k, (sigma, p))| Projection {
            rank_from_smallest: k + 1,
            sigma,
            rhs: p,
            residual: res.as_ref().map(|r| r[k].1),
        })
        .collect())
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub solution: DVector<f64>,
    /// `‖Ax - Y‖₂ / ‖Y‖₂` of the direct solve, before any mean projection.
    pub relative_residual: f64,
    /// Means removed from each density of an insulated solve.
    pub removed_means: Option<[f64; 2]>,
    pub svd: Option<SvdDiagnostics>,
}

/// Dense LU solve. Insulated densities are projected to mean zero afterwards.
pub fn solve(system: &AssembledSystem, rhs: &DVector<f64>, with_svd: bool) -> Result<SolveReport> {
    let svd = if with_svd {
        Some(SvdDiagnostics::new(&system.matrix)?)
    } else {
        None
    };
    let singular = |svd: Option<SvdDiagnostics>| -> Result<Error> {
        let svd = match svd {
            Some(s) => s,
            None => SvdDiagnostics::new(&system.matrix)?,
        };
        Ok(Error::Singular {
            sigma_min: svd.sigma_min(),
        })
    };
    let lu = system.matrix.clone().lu();
    let Some(mut x) = lu.solve(rhs) else {
        return Err(singular(svd)?);
    };
    if x.iter().any(|v| !v.is_finite()) {
        return Err(singular(svd)?);
    }
    let rhs_norm = rhs.norm();
    let residual = (&system.matrix * &x - rhs).norm();
    let relative_residual = if rhs_norm > 0.0 { residual / rhs_norm } else { residual };

    let removed_means = match system.conductivity {
        Conductivity::Perfect => None,
        Conductivity::Insulated => {
            let m = system.m();
            let mut removed = [0.0; 2];
            for (j, r) in removed.iter_mut().enumerate() {
                let mut block = x.rows_mut(j * m, m);
                *r = block.mean();
                block.add_scalar_mut(-*r);
            }
            Some(removed)
        }
    };
    Ok(SolveReport {
        solution: x,
        relative_residual,
        removed_means,
        svd,
    })
}

/// A complete representation of the exterior potential
/// `u = H + c·s + S₁[φ₁] + S₂[φ₂]` where `s` is `h̃` (perfect) or `h⊥`
/// (insulated) and `c` is zero in standard mode.
#[derive(Debug, Clone)]
pub struct SolutionField {
    config: TwoDiskConfig,
    background: HarmonicPolynomial,
    conductivity: Conductivity,
    mode: Mode,
    coefficient: f64,
    quadrature: CrossQuadrature,
    densities: [BoundaryDensity; 2],
    fourier: [CircleFourier; 2],
}

impl SolutionField {
    /// Assembles, solves and wraps the result in one step.
    pub fn solve(
        config: &TwoDiskConfig,
        background: &HarmonicPolynomial,
        disc: Discretization,
        conductivity: Conductivity,
        mode: Mode,
    ) -> Result<(Self, SolveReport)> {
        let system = assemble(config, disc, conductivity)?;
        Self::solve_system(&system, background, mode, false)
    }

    pub fn solve_system(
        system: &AssembledSystem,
        background: &HarmonicPolynomial,
        mode: Mode,
        with_svd: bool,
    ) -> Result<(Self, SolveReport)> {
        let coefficient = SingularCoefficient::closed_form(&system.config, background, system.conductivity);
        let (rhs, c) = match mode {
            Mode::Standard => (rhs_standard(system, background), 0.0),
            Mode::Augmented => (rhs_augmented(system, background, coefficient)?, coefficient.value()),
        };
        let report = solve(system, &rhs, with_svd)?;
        let densities = system.split(&report.solution)?;
        let field = Self::from_densities(
            system.config.clone(),
            background.clone(),
            system.conductivity,
            mode,
            c,
            densities,
        )
        .with_cross_quadrature(system.quadrature);
        Ok((field, report))
    }

    pub fn from_densities(
        config: TwoDiskConfig,
        background: HarmonicPolynomial,
        conductivity: Conductivity,
        mode: Mode,
        coefficient: f64,
        densities: [BoundaryDensity; 2],
    ) -> Self {
        let fourier = [CircleFourier::new(&densities[0]), CircleFourier::new(&densities[1])];
        let coefficient = match mode {
            Mode::Standard => 0.0,
            Mode::Augmented => coefficient,
        };
        Self {
            config,
            background,
            conductivity,
            mode,
            coefficient,
            quadrature: CrossQuadrature::default(),
            densities,
            fourier,
        }
    }

    /// Selects how [`Self::boundary_flux`] evaluates the other disk's layer.
    pub fn with_cross_quadrature(self, quadrature: CrossQuadrature) -> Self {
        Self { quadrature, ..self }
    }

    pub fn config(&self) -> &TwoDiskConfig {
        &self.config
    }

    pub fn background(&self) -> &HarmonicPolynomial {
        &self.background
    }

    pub fn conductivity(&self) -> Conductivity {
        self.conductivity
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn coefficient(&self) -> f64 {
        self.coefficient
    }

    pub fn density(&self, id: DiskId) -> &BoundaryDensity {
        &self.densities[id.index()]
    }

    fn singular_value(&self, x: Vec2) -> Result<f64> {
        if self.coefficient == 0.0 {
            return Ok(0.0);
        }
        let s = match self.conductivity {
            Conductivity::Perfect => singular::h_tilde(&self.config, x)?,
            Conductivity::Insulated => singular::h_perp(&self.config, x)?,
        };
        Ok(self.coefficient * s)
    }

    fn singular_grad(&self, x: Vec2) -> Result<Vec2> {
        if self.coefficient == 0.0 {
            return Ok(Vec2::zeros());
        }
        let g = match self.conductivity {
            Conductivity::Perfect => singular::grad_h_tilde(&self.config, x)?,
            Conductivity::Insulated => singular::grad_h_perp(&self.config, x)?,
        };
        Ok(g * self.coefficient)
    }

    fn check_exterior(&self, x: Vec2) -> Result<()> {
        match self.config.containing_disk(x) {
            Some(id) if self.config.disk(id).signed_distance(x) < -1e-12 * self.config.disk(id).radius() => {
                Err(Error::InsideDisk(id.index() + 1))
            }
            _ => Ok(()),
        }
    }

    /// `u(x)` by trapezoid quadrature; refuses targets within two node
    /// spacings of either circle.
    pub fn eval_u(&self, x: Vec2) -> Result<f64> {
        self.check_exterior(x)?;
        Ok(self.background.eval(x)
            + self.singular_value(x)?
            + eval_single_layer(&self.densities[0], x)?
            + eval_single_layer(&self.densities[1], x)?)
    }

    pub fn eval_grad_u(&self, x: Vec2) -> Result<Vec2> {
        self.check_exterior(x)?;
        Ok(self.background.grad(x)
            + self.singular_grad(x)?
            + eval_single_layer_gradient(&self.densities[0], x)?
            + eval_single_layer_gradient(&self.densities[1], x)?)
    }

    /// `u(x)` using the closed-form layer potentials of the interpolated
    /// densities; valid anywhere on or outside both circles.
    pub fn eval_u_spectral(&self, x: Vec2) -> Result<f64> {
        self.check_exterior(x)?;
        Ok(self.background.eval(x)
            + self.singular_value(x)?
            + self.fourier[0].exterior_single_layer(x)?.0
            + self.fourier[1].exterior_single_layer(x)?.0)
    }

    /// Gradient counterpart of [`Self::eval_u_spectral`]; on a circle it
    /// returns the exterior limit.
    pub fn eval_grad_u_spectral(&self, x: Vec2) -> Result<Vec2> {
        self.check_exterior(x)?;
        Ok(self.background.grad(x)
            + self.singular_grad(x)?
            + self.fourier[0].exterior_single_layer(x)?.1
            + self.fourier[1].exterior_single_layer(x)?.1)
    }

    /// Exterior normal derivative of `u` at the nodes of `∂B_j`, using the
    /// closed-form self term and the cross term of the system's quadrature.
    pub fn boundary_flux(&self, id: DiskId) -> Result<Vec<f64>> {
        let own = &self.densities[id.index()];
        let grid = own.grid();
        let cross = match self.quadrature {
            CrossQuadrature::Trapezoid => apply_cross_kernel(grid, &self.densities[id.other().index()]),
            CrossQuadrature::Interpolatory => {
                let other = &self.fourier[id.other().index()];
                grid.nodes()
                    .iter()
                    .zip(grid.normals())
                    .map(|(x, nu)| Ok(other.exterior_single_layer(*x)?.1.dot(nu)))
                    .collect::<Result<Vec<f64>>>()?
            }
        };
        let self_term = own_boundary_flux(own, Side::Exterior);
        grid.nodes()
            .iter()
            .zip(grid.normals())
            .zip(self_term.iter().zip(&cross))
            .map(|((x, nu), (s, c))| Ok(s + c + (self.background.grad(*x) + self.singular_grad(*x)?).dot(nu)))
            .collect()
    }

    /// `u` at the nodes of `∂B_j`.
    pub fn boundary_values(&self, id: DiskId) -> Result<Vec<f64>> {
        self.densities[id.index()]
            .grid()
            .nodes()
            .iter()
            .map(|&x| self.eval_u_spectral(x))
            .collect()
    }

    /// Mean of `u` over each circle, evaluated exactly for the interpolated
    /// densities through the mean-value property: the background and the
    /// other disk's layer average to their values at the center, the own
    /// layer to `(log r/2π)∮φ`, and `h̃` to its closed-form mean.
    pub fn boundary_constants(&self) -> Result<[f64; 2]> {
        if self.conductivity != Conductivity::Perfect {
            return Err(Error::Usage(
                "boundary constants are defined for perfect conductors".into(),
            ));
        }
        let mut out = [0.0; 2];
        for id in DiskId::BOTH {
            let disk = self.config.disk(id);
            let c = disk.center();
            let own = &self.densities[id.index()];
            let other = &self.fourier[id.other().index()];
            out[id.index()] = self.background.eval(c)
                + other.exterior_single_layer(c)?.0
                + disk.radius().ln() * own.integral() / (2.0 * std::f64::consts::PI)
                + self.coefficient * singular::h_tilde_boundary_mean(&self.config, id);
        }
        Ok(out)
    }
}
