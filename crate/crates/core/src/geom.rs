//! Vector and rotation primitives.
//!
//! Rotations are kept as 3x3 matrices whose columns are the body basis
//! vectors `i`, `j`, `k` expressed in inertial coordinates. The inertial
//! frame is north-east-down: gravity acts along `+e3`, and at hover both the
//! body `k` axis and the thrust direction point down.

use nalgebra::{Matrix3, SVector, Vector2, Vector3};
use thiserror::Error;

pub type Vec3 = Vector3<f64>;
pub type Vec2 = Vector2<f64>;
pub type Mat3 = Matrix3<f64>;

/// Tolerance on `|v| - 1` below which [`UnitVec3::new`] silently renormalizes.
pub const UNIT_DRIFT_TOL: f64 = 1e-6;
/// Orthogonality / determinant tolerance accepted by [`Rotation::from_matrix`].
pub const ROTATION_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("vector norm {norm} is not within {UNIT_DRIFT_TOL} of 1")]
    NotUnit { norm: f64 },
    #[error("matrix is not a rotation (|R^T R - I| = {orthogonality}, det = {det})")]
    NotRotation { orthogonality: f64, det: f64 },
    #[error("non-finite component")]
    NonFinite,
}

/// A unit-norm 3-vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitVec3(Vec3);

impl UnitVec3 {
    pub const E1: UnitVec3 = UnitVec3(Vec3::new(1.0, 0.0, 0.0));
    pub const E2: UnitVec3 = UnitVec3(Vec3::new(0.0, 1.0, 0.0));
    pub const E3: UnitVec3 = UnitVec3(Vec3::new(0.0, 0.0, 1.0));

    /// Accepts a vector that is already unit up to drift, renormalizing it.
    /// Anything further from the sphere is treated as a bug upstream.
    pub fn new(v: Vec3) -> Result<Self, GeomError> {
        if !v.iter().all(|c| c.is_finite()) {
            return Err(GeomError::NonFinite);
        }
        let norm = v.norm();
        if (norm - 1.0).abs() > UNIT_DRIFT_TOL {
            return Err(GeomError::NotUnit { norm });
        }
        Ok(UnitVec3(v / norm))
    }

    /// Direction of an arbitrary vector; `None` for zero or non-finite input.
    pub fn normalize(v: Vec3) -> Option<Self> {
        let norm = v.norm();
        if norm > 0.0 && norm.is_finite() {
            Some(UnitVec3(v / norm))
        } else {
            None
        }
    }

    pub fn as_vec(&self) -> &Vec3 {
        &self.0
    }

    pub fn into_inner(self) -> Vec3 {
        self.0
    }

    pub fn dot(&self, other: &Vec3) -> f64 {
        self.0.dot(other)
    }

    pub fn cross(&self, other: &Vec3) -> Vec3 {
        self.0.cross(other)
    }

    /// First two components, i.e. the projection onto the body `i`/`j` plane.
    pub fn xy(&self) -> Vec2 {
        Vec2::new(self.0.x, self.0.y)
    }
}

impl std::ops::Deref for UnitVec3 {
    type Target = Vec3;

    fn deref(&self) -> &Vec3 {
        &self.0
    }
}

/// Element of SO(3), body-to-inertial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation(Mat3);

impl Rotation {
    pub fn identity() -> Self {
        Rotation(Mat3::identity())
    }

    pub fn from_matrix(m: Mat3) -> Result<Self, GeomError> {
        if !m.iter().all(|c| c.is_finite()) {
            return Err(GeomError::NonFinite);
        }
        let orthogonality = (m.transpose() * m - Mat3::identity()).abs().max();
        let det = m.determinant();
        if orthogonality > ROTATION_TOL || (det - 1.0).abs() > ROTATION_TOL {
            return Err(GeomError::NotRotation { orthogonality, det });
        }
        Ok(Rotation(m))
    }

    /// Rotation by `angle` about `axis` (right-handed).
    pub fn from_axis_angle(axis: &UnitVec3, angle: f64) -> Self {
        Rotation(so3_exp(&(axis.into_inner() * angle)))
    }

    /// Exponential of a rotation vector.
    pub fn exp(rotation_vector: &Vec3) -> Self {
        Rotation(so3_exp(rotation_vector))
    }

    pub fn matrix(&self) -> &Mat3 {
        &self.0
    }

    pub fn transpose(&self) -> Self {
        Rotation(self.0.transpose())
    }

    pub fn compose(&self, other: &Rotation) -> Self {
        Rotation(self.0 * other.0)
    }

    /// Body coordinates -> inertial coordinates.
    pub fn to_inertial(&self, body: &Vec3) -> Vec3 {
        self.0 * body
    }

    /// Inertial coordinates -> body coordinates.
    pub fn to_body(&self, inertial: &Vec3) -> Vec3 {
        self.0.tr_mul(inertial)
    }

    /// Body `k` axis in inertial coordinates.
    pub fn k(&self) -> Vec3 {
        self.0.column(2).into_owned()
    }

    /// Largest deviation of `R^T R` from identity.
    pub fn orthogonality_error(&self) -> f64 {
        (self.0.transpose() * self.0 - Mat3::identity()).abs().max()
    }

    /// Gram-Schmidt cleanup of accumulated round-off.
    pub fn reorthonormalized(&self) -> Self {
        Rotation(orthonormalize(&self.0))
    }
}

pub fn skew(v: &Vec3) -> Mat3 {
    Mat3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

pub fn vee(m: &Mat3) -> Vec3 {
    Vec3::new(m[(2, 1)], m[(0, 2)], m[(1, 0)])
}

/// Rodrigues formula for `exp(skew(phi))`.
pub fn so3_exp(phi: &Vec3) -> Mat3 {
    let theta_sq = phi.norm_squared();
    let theta = theta_sq.sqrt();
    let k = skew(phi);
    // sin(t)/t and (1-cos t)/t^2, series near zero
    let (a, b) = if theta < 1e-4 {
        (1.0 - theta_sq / 6.0, 0.5 - theta_sq / 24.0)
    } else {
        (theta.sin() / theta, (1.0 - theta.cos()) / theta_sq)
    };
    Mat3::identity() + k * a + k * k * b
}

fn orthonormalize(m: &Mat3) -> Mat3 {
    let c0 = m.column(0).normalize();
    let c1 = m.column(1) - c0 * c0.dot(&m.column(1));
    let c1 = c1.normalize();
    let c2 = c0.cross(&c1);
    Mat3::from_columns(&[c0, c1, c2])
}

/// `min(1, limit/|x|) x` in any dimension.
pub fn sat<const N: usize>(x: &SVector<f64, N>, limit: f64) -> SVector<f64, N> {
    debug_assert!(limit > 0.0);
    let norm = x.norm();
    if norm <= limit {
        *x
    } else {
        x * (limit / norm)
    }
}

/// Angle-axis form of the attitude error `R_d^T R`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttitudeError {
    /// In `[0, pi]`.
    pub angle: f64,
    /// `e3` when `angle == 0`.
    pub axis: UnitVec3,
    /// Set when the angle is numerically `pi`; the axis sign is then arbitrary.
    pub at_pi: bool,
}

impl AttitudeError {
    pub fn rotation_vector(&self) -> Vec3 {
        self.axis.into_inner() * self.angle
    }
}

pub fn rotation_error_vector(r: &Rotation, r_d: &Rotation) -> AttitudeError {
    let e = r_d.0.tr_mul(&r.0);
    let sin_axis = vee(&(e - e.transpose())) * 0.5;
    let sin_theta = sin_axis.norm();
    let cos_theta = ((e.trace() - 1.0) * 0.5).clamp(-1.0, 1.0);
    let angle = sin_theta.atan2(cos_theta);

    // R_d^T R carries round-off even when R == R_d
    if sin_theta <= 1e-14 && cos_theta > 0.0 {
        return AttitudeError {
            angle: 0.0,
            axis: UnitVec3::E3,
            at_pi: false,
        };
    }
    if cos_theta >= 0.0 {
        return AttitudeError {
            angle,
            axis: UnitVec3(sin_axis / sin_theta),
            at_pi: false,
        };
    }

    // Near pi the antisymmetric part vanishes; read the axis off the
    // symmetric part (nu nu^T) using its largest diagonal entry.
    let sym = (e + e.transpose()) * 0.5;
    let outer = (sym - Mat3::identity() * cos_theta) / (1.0 - cos_theta);
    let d = outer.diagonal();
    let idx = d.imax();
    let mut axis = outer.column(idx) / d[idx].max(0.0).sqrt();
    axis.normalize_mut();
    if axis.dot(&sin_axis) < 0.0 {
        axis = -axis;
    }
    AttitudeError {
        angle,
        axis: UnitVec3(axis),
        at_pi: sin_theta < 1e-12,
    }
}

/// `R exp(skew(omega_body dt))`, re-orthonormalized.
pub fn integrate_rotation(r: &Rotation, omega_body: &Vec3, dt: f64) -> Rotation {
    Rotation(orthonormalize(&(r.0 * so3_exp(&(omega_body * dt)))))
}
