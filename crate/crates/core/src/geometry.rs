//! Disks, circle inversions and the canonical frame of a two-disk scene.
//!
//! The reflection across a circle of radius `r` centered at `c` is the
//! inversion `R(x) = r²(x - c)/|x - c|² + c`. For two disjoint disks the
//! compositions `R₁R₂` and `R₂R₁` each have a single attracting fixed point,
//! `p1` inside the first disk and `p2` inside the second; they are the poles
//! of the singular function that carries the gradient blow-up in the gap.

use nalgebra::{Matrix2, Vector2};

use crate::error::{Error, Result};

pub type Vec2 = Vector2<f64>;
pub type Mat2 = Matrix2<f64>;

/// Rotates a vector by +90 degrees: `(v1, v2) -> (-v2, v1)`.
#[inline]
pub fn perp(v: Vec2) -> Vec2 {
    Vec2::new(-v.y, v.x)
}

/// Identifies one of the two inclusions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DiskId {
    First,
    Second,
}

impl DiskId {
    pub const BOTH: [DiskId; 2] = [DiskId::First, DiskId::Second];

    #[inline]
    pub fn index(self) -> usize {
        match self {
            DiskId::First => 0,
            DiskId::Second => 1,
        }
    }

    #[inline]
    pub fn other(self) -> DiskId {
        match self {
            DiskId::First => DiskId::Second,
            DiskId::Second => DiskId::First,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Disk {
    center: Vec2,
    radius: f64,
}

impl Disk {
    pub fn new(center: Vec2, radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidRadius(radius));
        }
        Ok(Self { center, radius })
    }

    #[inline]
    pub fn center(&self) -> Vec2 {
        self.center
    }

    #[inline]
    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Signed distance from `x` to the circle; negative inside the disk.
    #[inline]
    pub fn signed_distance(&self, x: Vec2) -> f64 {
        (x - self.center).norm() - self.radius
    }

    /// Outward unit normal of the circle at the direction of `x` from the center.
    #[inline]
    pub fn outward_normal(&self, x: Vec2) -> Vec2 {
        (x - self.center).normalize()
    }

    pub fn point_at(&self, angle: f64) -> Vec2 {
        self.center + self.radius * Vec2::new(angle.cos(), angle.sin())
    }

    fn rigid(&self, rotation: f64, shift: Vec2) -> Self {
        Self {
            center: rotate(self.center, rotation) + shift,
            radius: self.radius,
        }
    }
}

pub(crate) fn rotate(v: Vec2, angle: f64) -> Vec2 {
    let (s, c) = angle.sin_cos();
    Vec2::new(c * v.x - s * v.y, s * v.x + c * v.y)
}

/// Inversion of `x` across the boundary circle of `disk`.
pub fn reflect(disk: &Disk, x: Vec2) -> Result<Vec2> {
    let d = x - disk.center;
    let q = d.norm_squared();
    if q == 0.0 {
        return Err(Error::InversionPole(x));
    }
    Ok(disk.center + d * (disk.radius * disk.radius / q))
}

/// Jacobian of [`reflect`] at `x`: `(r²/|x-c|²)(I - 2ŵŵᵀ)` with `ŵ` the unit
/// vector from the center to `x`.
pub fn reflect_jacobian(disk: &Disk, x: Vec2) -> Result<Mat2> {
    let d = x - disk.center;
    let q = d.norm_squared();
    if q == 0.0 {
        return Err(Error::InversionPole(x));
    }
    let w = d / q.sqrt();
    let scale = disk.radius * disk.radius / q;
    Ok((Mat2::identity() - 2.0 * w * w.transpose()) * scale)
}

/// Two disjoint disks together with the frame `(n, t, p)` and the fixed
/// points of the composed reflections.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoDiskConfig {
    disks: [Disk; 2],
    eps: f64,
    n: Vec2,
    t: Vec2,
    p: Vec2,
    p1: Vec2,
    p2: Vec2,
}

impl TwoDiskConfig {
    pub fn new(disk1: Disk, disk2: Disk) -> Result<Self> {
        let (r1, r2) = (disk1.radius, disk2.radius);
        let axis = disk2.center - disk1.center;
        let d = axis.norm();
        let eps = d - r1 - r2;
        if !(eps > 0.0) {
            return Err(Error::Overlapping {
                distance: d,
                radii: r1 + r2,
            });
        }
        let threshold = 1e-14 * (r1 + r2);
        if eps <= threshold {
            return Err(Error::DegenerateGap { eps, threshold });
        }
        let n = axis / d;
        let t = perp(n);
        let p = disk1.center + (r1 + eps / 2.0) * n;

        // Mutual inversion along the axis gives d·a² - B·a + d·r1² = 0 for the
        // distance a = |p1 - c1|. The discriminant factors exactly, so the
        // small root is taken in its cancellation-free form.
        let disc = eps * (eps + 2.0 * r2) * (d + r1 - r2) * (d + r1 + r2);
        let root = disc.sqrt();
        let a1 = 2.0 * d * r1 * r1 / (d * d + r1 * r1 - r2 * r2 + root);
        let a2 = 2.0 * d * r2 * r2 / (d * d + r2 * r2 - r1 * r1 + root);
        let p1 = disk1.center + a1 * n;
        let p2 = disk2.center - a2 * n;

        let config = Self {
            disks: [disk1, disk2],
            eps,
            n,
            t,
            p,
            p1,
            p2,
        };
        let tolerance = 1e-12 * (r1 + r2);
        let residual = config.fixed_point_residuals()?.iter().cloned().fold(0.0, f64::max);
        if !(residual <= tolerance) {
            return Err(Error::FixedPointResidual { residual, tolerance });
        }
        Ok(config)
    }

    /// Axis-aligned configuration with the gap midpoint at the origin:
    /// `c1 = (-r1 - eps/2, 0)`, `c2 = (r2 + eps/2, 0)`.
    pub fn canonical(r1: f64, r2: f64, eps: f64) -> Result<Self> {
        let disk1 = Disk::new(Vec2::new(-r1 - eps / 2.0, 0.0), r1)?;
        let disk2 = Disk::new(Vec2::new(r2 + eps / 2.0, 0.0), r2)?;
        Self::new(disk1, disk2)
    }

    /// Rotates the scene by `angle` about the origin and then translates it.
    pub fn rigid_motion(&self, angle: f64, shift: Vec2) -> Result<Self> {
        Self::new(self.disks[0].rigid(angle, shift), self.disks[1].rigid(angle, shift))
    }

    #[inline]
    pub fn disk(&self, id: DiskId) -> &Disk {
        &self.disks[id.index()]
    }

    #[inline]
    pub fn disk1(&self) -> &Disk {
        &self.disks[0]
    }

    #[inline]
    pub fn disk2(&self) -> &Disk {
        &self.disks[1]
    }

    #[inline]
    pub fn eps(&self) -> f64 {
        self.eps
    }

    #[inline]
    pub fn n(&self) -> Vec2 {
        self.n
    }

    #[inline]
    pub fn t(&self) -> Vec2 {
        self.t
    }

    /// Midpoint of the shortest segment joining the two circles.
    #[inline]
    pub fn p(&self) -> Vec2 {
        self.p
    }

    #[inline]
    pub fn p1(&self) -> Vec2 {
        self.p1
    }

    #[inline]
    pub fn p2(&self) -> Vec2 {
        self.p2
    }

    #[inline]
    pub fn fixed_point(&self, id: DiskId) -> Vec2 {
        match id {
            DiskId::First => self.p1,
            DiskId::Second => self.p2,
        }
    }

    /// Polar angle of `n`.
    pub fn axis_angle(&self) -> f64 {
        self.n.y.atan2(self.n.x)
    }

    /// Endpoints of the shortest segment between the circles, on disk 1 then disk 2.
    pub fn gap_segment(&self) -> (Vec2, Vec2) {
        (
            self.disks[0].center + self.disks[0].radius * self.n,
            self.disks[1].center - self.disks[1].radius * self.n,
        )
    }

    /// `|R₁R₂(p1) - p1|` and `|R₂R₁(p2) - p2|`.
    pub fn fixed_point_residuals(&self) -> Result<[f64; 2]> {
        let [d1, d2] = &self.disks;
        let r1 = (reflect(d1, reflect(d2, self.p1)?)? - self.p1).norm();
        let r2 = (reflect(d2, reflect(d1, self.p2)?)? - self.p2).norm();
        Ok([r1, r2])
    }

    /// Returns the disk containing `x` (closed disks), if any.
    pub fn containing_disk(&self, x: Vec2) -> Option<DiskId> {
        DiskId::BOTH
            .into_iter()
            .find(|&id| self.disk(id).signed_distance(x) <= 0.0)
    }
}
