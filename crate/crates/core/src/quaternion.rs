//! Scalar-first unit quaternion algebra.
//!
//! Attitudes are stored as `(eps, vec)` with `eps` the scalar part. The
//! multiplicative error of body `i` relative to body `j` is
//!
//! ```text
//! eps_ij = eps_i * eps_j + q_i . q_j
//! q_ij   = eps_j * q_i - eps_i * q_j + q_i x q_j
//! ```
//!
//! which in Hamilton terms is `conj(q_j) * q_i`. With the attitude (passive)
//! matrix `C(q) = (eps^2 - |q|^2) I + 2 q q^T - 2 eps [q]x`, the error satisfies
//! `C(err) = C(q_i) C(q_j)^T`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use thiserror::Error;

/// Scalar parts with magnitude at or below this are treated as exactly zero.
pub const ZERO_TOL: f64 = 1e-12;
/// Unity defects at or below this are accepted as-is.
pub const UNITY_TOL: f64 = 1e-9;
/// Unity defects above this are rejected by [`UnitQuaternion::new`].
pub const UNITY_REJECT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuatValidationError {
    #[error("non-finite quaternion component in {0:?}")]
    NonFinite([f64; 4]),
    #[error("quaternion {components:?} fails unity by {defect:e} (limit {limit:e})")]
    NotUnit {
        components: [f64; 4],
        defect: f64,
        limit: f64,
    },
    #[error("axis {0:?} is not a unit vector")]
    NonUnitAxis([f64; 3]),
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 {
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_squared().sqrt()
    }

    pub fn scale(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        self.scale(s)
    }
}

/// Row-major 3x3 matrix.
pub type Mat3 = [[f64; 3]; 3];

/// Skew-symmetric matrix `M` with `M * y = x cross y`.
pub fn cross_matrix(x: Vec3) -> Mat3 {
    [[0.0, -x.z, x.y], [x.z, 0.0, -x.x], [-x.y, x.x, 0.0]]
}

pub fn mat_vec(m: &Mat3, v: Vec3) -> Vec3 {
    Vec3::new(
        m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
        m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
        m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z,
    )
}

/// A raw quaternion with no unity guarantee. Integrator stages live here.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quat {
    pub eps: f64,
    pub vec: Vec3,
}

impl Quat {
    pub const IDENTITY: Quat = Quat {
        eps: 1.0,
        vec: Vec3::ZERO,
    };

    pub const fn new(eps: f64, vec: Vec3) -> Self {
        Self { eps, vec }
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Self::new(a[0], Vec3::new(a[1], a[2], a[3]))
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.eps, self.vec.x, self.vec.y, self.vec.z]
    }

    pub fn norm_squared(self) -> f64 {
        self.eps * self.eps + self.vec.norm_squared()
    }

    pub fn is_finite(self) -> bool {
        self.eps.is_finite() && self.vec.is_finite()
    }

    pub fn unity_defect(self) -> f64 {
        (self.norm_squared() - 1.0).abs()
    }

    pub fn normalized(self) -> Quat {
        let n = self.norm_squared().sqrt();
        Quat::new(self.eps / n, self.vec.scale(1.0 / n))
    }

    /// Multiplicative error of `self` with respect to `other`; no unity check.
    pub fn error_wrt(self, other: Quat) -> Quat {
        Quat::new(
            self.eps * other.eps + self.vec.dot(other.vec),
            self.vec.scale(other.eps) - other.vec.scale(self.eps) + self.vec.cross(other.vec),
        )
    }

    /// Hamilton product `self * other`.
    pub fn hamilton(self, other: Quat) -> Quat {
        Quat::new(
            self.eps * other.eps - self.vec.dot(other.vec),
            other.vec.scale(self.eps) + self.vec.scale(other.eps) + self.vec.cross(other.vec),
        )
    }

    pub fn conj(self) -> Quat {
        Quat::new(self.eps, -self.vec)
    }

    pub fn axpy(self, s: f64, d: QuatDeriv) -> Quat {
        Quat::new(self.eps + s * d.deps, self.vec + d.dvec.scale(s))
    }
}

impl Neg for Quat {
    type Output = Quat;
    fn neg(self) -> Quat {
        Quat::new(-self.eps, -self.vec)
    }
}

/// A quaternion on the three-sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitQuaternion(Quat);

/// Multiplicative attitude error; itself a unit quaternion.
pub type QuatError = UnitQuaternion;

impl UnitQuaternion {
    pub const IDENTITY: UnitQuaternion = UnitQuaternion(Quat::IDENTITY);

    /// Validates unity: defects up to [`UNITY_TOL`] pass untouched, defects up
    /// to [`UNITY_REJECT_TOL`] are renormalized with a warning, larger ones fail.
    pub fn new(eps: f64, vec: Vec3) -> Result<Self, QuatValidationError> {
        Self::with_tolerance(eps, vec, UNITY_REJECT_TOL)
    }

    /// Like [`UnitQuaternion::new`] with a caller-chosen rejection limit.
    pub fn with_tolerance(
        eps: f64,
        vec: Vec3,
        reject_above: f64,
    ) -> Result<Self, QuatValidationError> {
        let q = Quat::new(eps, vec);
        if !q.is_finite() {
            return Err(QuatValidationError::NonFinite(q.to_array()));
        }
        let defect = q.unity_defect();
        if defect <= UNITY_TOL {
            Ok(Self(q))
        } else if defect <= reject_above {
            log::warn!(
                "renormalizing quaternion {:?} (unity defect {:e})",
                q.to_array(),
                defect
            );
            Ok(Self(q.normalized()))
        } else {
            Err(QuatValidationError::NotUnit {
                components: q.to_array(),
                defect,
                limit: reject_above,
            })
        }
    }

    pub fn from_array(a: [f64; 4]) -> Result<Self, QuatValidationError> {
        Self::new(a[0], Vec3::new(a[1], a[2], a[3]))
    }

    /// Normalizes any finite nonzero quaternion. Used after integration steps.
    pub fn normalize(q: Quat) -> Result<Self, QuatValidationError> {
        let n2 = q.norm_squared();
        if !q.is_finite() || !n2.is_finite() || n2 == 0.0 {
            return Err(QuatValidationError::NonFinite(q.to_array()));
        }
        Ok(Self(q.normalized()))
    }

    /// Wraps a value already known to be unit up to rounding.
    pub(crate) fn from_quat_unchecked(q: Quat) -> Self {
        debug_assert!(q.unity_defect() < 1e-6, "{:?}", q);
        Self(q)
    }

    pub fn from_axis_angle(axis: Vec3, angle: f64) -> Result<Self, QuatValidationError> {
        if !axis.is_finite() || (axis.norm() - 1.0).abs() > UNITY_TOL {
            return Err(QuatValidationError::NonUnitAxis(axis.to_array()));
        }
        let (s, c) = (angle / 2.0).sin_cos();
        Ok(Self(Quat::new(c, axis.scale(s))))
    }

    pub fn eps(&self) -> f64 {
        self.0.eps
    }

    pub fn vec(&self) -> Vec3 {
        self.0.vec
    }

    pub fn quat(&self) -> Quat {
        self.0
    }

    pub fn to_array(&self) -> [f64; 4] {
        self.0.to_array()
    }

    pub fn conj(&self) -> Self {
        Self(self.0.conj())
    }

    pub fn is_canonical(&self) -> bool {
        matches!(
            classify_subspace(self),
            Subspace::S1 | Subspace::S2
        )
    }
}

impl Neg for UnitQuaternion {
    type Output = UnitQuaternion;
    fn neg(self) -> UnitQuaternion {
        UnitQuaternion(-self.0)
    }
}

impl fmt::Display for UnitQuaternion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}, {}, {}, {}]",
            self.0.eps, self.0.vec.x, self.0.vec.y, self.0.vec.z
        )
    }
}

/// Multiplicative quaternion error of `qi` with respect to `qj`.
pub fn mult_error(qi: &UnitQuaternion, qj: &UnitQuaternion) -> QuatError {
    UnitQuaternion(qi.0.error_wrt(qj.0))
}

/// Time derivative of an attitude under body angular velocity `omega`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuatDeriv {
    pub deps: f64,
    pub dvec: Vec3,
}

/// Kinematics right-hand side: `deps = -q.w/2`, `dq = (q x w + eps w)/2`.
pub fn kinematics_rhs(q: &Quat, omega: Vec3) -> QuatDeriv {
    QuatDeriv {
        deps: -0.5 * q.vec.dot(omega),
        dvec: (q.vec.cross(omega) + omega.scale(q.eps)).scale(0.5),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Subspace {
    /// Positive scalar part.
    S1,
    /// Zero scalar part, vector part in the positive half (`S+`).
    S2,
    /// Negative scalar part.
    S3,
    /// Zero scalar part, vector part in `S-`.
    S4,
}

/// Lexicographic positivity test on `(x3, x2, x1)`, with `ZERO_TOL` for zero.
pub fn in_positive_half(v: Vec3) -> bool {
    if v.z > ZERO_TOL {
        true
    } else if v.z.abs() <= ZERO_TOL {
        if v.y > ZERO_TOL {
            true
        } else if v.y.abs() <= ZERO_TOL {
            v.x > ZERO_TOL
        } else {
            false
        }
    } else {
        false
    }
}

pub fn classify_subspace(q: &UnitQuaternion) -> Subspace {
    let eps = q.eps();
    if eps > ZERO_TOL {
        Subspace::S1
    } else if eps < -ZERO_TOL {
        Subspace::S3
    } else if in_positive_half(q.vec()) {
        Subspace::S2
    } else {
        Subspace::S4
    }
}

/// Picks the sign representative of `q` that lies in `S1 u S2`.
///
/// Near-zero scalar parts are snapped to exactly zero and the vector part is
/// renormalized; on the boundary the vector part keeps its sign-flipped
/// components as given and only the overall sign is chosen.
pub fn canonicalize(q: &UnitQuaternion) -> UnitQuaternion {
    let eps = q.eps();
    if eps > ZERO_TOL {
        return *q;
    }
    if eps < -ZERO_TOL {
        return -*q;
    }
    let v = q.vec();
    let n = v.norm();
    let v = v.scale(1.0 / n);
    let v = if in_positive_half(v) { v } else { -v };
    UnitQuaternion(Quat::new(0.0, v))
}
