//! Constant frame changes that make every initial scalar part nonnegative.
//!
//! Re-expressing all attitudes in another inertial frame `v` maps
//! `q -> conj(v) * q`. Multiplicative errors, and therefore the closed loop,
//! are unchanged by this map; only the analysis quantities (minimum scalar
//! part, energies) move. The constructions below pick `v` from the initial
//! configuration so that the monotonicity argument on the minimum scalar part
//! applies.

use std::fmt;

use thiserror::Error;

use crate::digraph::RootAnalysis;
use crate::quaternion::{
    classify_subspace, mult_error, Quat, Subspace, UnitQuaternion, Vec3, ZERO_TOL,
};

/// Transformed scalars may dip this far below zero from rounding.
pub const SCALAR_FLOOR: f64 = -1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TransformError {
    #[error("agent {0} is not in canonical form (S1 or S2)")]
    NonCanonical(usize),
    #[error("network has no root node; no transform exists")]
    NoRoots,
    #[error("state count {states} does not match node count {nodes}")]
    SizeMismatch { states: usize, nodes: usize },
    #[error("root-only construction needs every root in S2; agent {0} is not")]
    RootNotInS2(usize),
    #[error(
        "transform {v} violates its postcondition: min scalar {min_scalar:e}, max root scalar {max_root_scalar:e}"
    )]
    Postcondition {
        v: UnitQuaternion,
        min_scalar: f64,
        max_root_scalar: f64,
    },
}

/// Sub-case when every root starts with a zero scalar part.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ZeroScalarPart {
    /// Some root has `q3 > 0`; every non-root has a zero scalar part.
    P1,
    /// Some root has `q3 > 0`; some non-root has a positive scalar part.
    P2,
    /// All roots have `q3 = 0`; every non-root has a zero scalar part.
    P3,
    /// All roots have `q3 = 0`; some non-root has a positive scalar part.
    P4,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InitialConditionClass {
    /// Root-only network, some root with positive scalar part.
    I1,
    /// Root-only network, every root with zero scalar part.
    I2,
    /// Some root with positive scalar part.
    II1,
    /// Every root with zero scalar part.
    II2(ZeroScalarPart),
}

impl InitialConditionClass {
    pub fn label(&self) -> &'static str {
        match self {
            Self::I1 => "i1",
            Self::I2 => "i2",
            Self::II1 => "ii1",
            Self::II2(ZeroScalarPart::P1) => "ii2/part1",
            Self::II2(ZeroScalarPart::P2) => "ii2/part2",
            Self::II2(ZeroScalarPart::P3) => "ii2/part3",
            Self::II2(ZeroScalarPart::P4) => "ii2/part4",
        }
    }

    /// True when some root already has a positive scalar part.
    pub fn has_positive_root(&self) -> bool {
        matches!(self, Self::I1 | Self::II1)
    }
}

impl fmt::Display for InitialConditionClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// How the run picks its analysis frame.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum TransformMode {
    #[default]
    Auto,
    None,
    Explicit(UnitQuaternion),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransformResult {
    pub v: UnitQuaternion,
    pub cls: InitialConditionClass,
    pub transformed_initial: Vec<UnitQuaternion>,
}

/// Expresses `q` in the frame `v`.
pub fn apply_transform(q: &UnitQuaternion, v: &UnitQuaternion) -> UnitQuaternion {
    mult_error(q, v)
}

/// Undoes [`apply_transform`]: `v * q_hat`.
pub fn inverse_transform(q_hat: &UnitQuaternion, v: &UnitQuaternion) -> UnitQuaternion {
    UnitQuaternion::from_quat_unchecked(v.quat().hamilton(q_hat.quat()))
}

fn is_zero(x: f64) -> bool {
    x.abs() <= ZERO_TOL
}

fn check_canonical(states: &[UnitQuaternion]) -> Result<(), TransformError> {
    match states.iter().position(|q| !q.is_canonical()) {
        Some(i) => Err(TransformError::NonCanonical(i)),
        None => Ok(()),
    }
}

pub fn classify_initial(
    states: &[UnitQuaternion],
    roots: &RootAnalysis,
) -> Result<InitialConditionClass, TransformError> {
    let n = roots.roots.len() + roots.non_roots.len();
    if states.len() != n {
        return Err(TransformError::SizeMismatch {
            states: states.len(),
            nodes: n,
        });
    }
    check_canonical(states)?;
    if roots.roots.is_empty() {
        return Err(TransformError::NoRoots);
    }
    let in_s1 = |i: &usize| classify_subspace(&states[*i]) == Subspace::S1;
    let root_positive = roots.roots.iter().any(in_s1);
    let root_only = roots.non_roots.is_empty();
    if root_positive {
        return Ok(if root_only {
            InitialConditionClass::I1
        } else {
            InitialConditionClass::II1
        });
    }
    if root_only {
        return Ok(InitialConditionClass::I2);
    }
    let root_q3_positive = roots.roots.iter().any(|&i| states[i].vec().z > ZERO_TOL);
    let non_root_positive = roots.non_roots.iter().any(in_s1);
    let part = match (root_q3_positive, non_root_positive) {
        (true, false) => ZeroScalarPart::P1,
        (true, true) => ZeroScalarPart::P2,
        (false, false) => ZeroScalarPart::P3,
        (false, true) => ZeroScalarPart::P4,
    };
    Ok(InitialConditionClass::II2(part))
}

fn min_of(it: impl Iterator<Item = f64>) -> Option<f64> {
    it.fold(None, |m, x| Some(m.map_or(x, |m: f64| m.min(x))))
}

fn sqrt_clamped(x: f64) -> f64 {
    x.max(0.0).sqrt()
}

fn unit(eps: f64, x: f64, y: f64, z: f64) -> UnitQuaternion {
    UnitQuaternion::normalize(Quat::new(eps, Vec3::new(x, y, z))).expect("finite transform")
}

/// Planar axis `(sqrt((1+c)/2), sqrt((1-c)/2))` bisecting the angle from the
/// x-axis to the direction with x-coordinate `c`.
fn bisector(c: f64) -> (f64, f64) {
    (sqrt_clamped((1.0 + c) / 2.0), sqrt_clamped((1.0 - c) / 2.0))
}

/// Choice for all-zero-scalar vectors lying in the `q3 = 0` plane.
fn planar_choice(states: &[UnitQuaternion], nodes: &[usize]) -> UnitQuaternion {
    if nodes.iter().all(|&i| is_zero(states[i].vec().x - 1.0)) {
        unit(0.0, 1.0, 0.0, 0.0)
    } else {
        unit(0.0, 0.0, 1.0, 0.0)
    }
}

fn construct(
    states: &[UnitQuaternion],
    roots: &RootAnalysis,
    cls: InitialConditionClass,
) -> UnitQuaternion {
    let all: Vec<usize> = (0..states.len()).collect();
    let eps = |i: usize| states[i].eps();
    let q = |i: usize| states[i].vec();
    match cls {
        InitialConditionClass::I1 | InitialConditionClass::II1 => UnitQuaternion::IDENTITY,
        InitialConditionClass::I2 => {
            if roots.roots.iter().any(|&i| q(i).z > ZERO_TOL) {
                unit(0.0, 0.0, 0.0, 1.0)
            } else {
                planar_choice(states, &roots.roots)
            }
        }
        InitialConditionClass::II2(ZeroScalarPart::P1) => unit(0.0, 0.0, 0.0, 1.0),
        InitialConditionClass::II2(ZeroScalarPart::P2) => {
            let e1 = min_of(
                roots
                    .non_roots
                    .iter()
                    .map(|&i| eps(i))
                    .filter(|&e| e > ZERO_TOL),
            )
            .expect("part 2 has a positive non-root");
            unit(sqrt_clamped(1.0 - e1 * e1), 0.0, 0.0, e1)
        }
        InitialConditionClass::II2(ZeroScalarPart::P3) => {
            let e3 = min_of(
                roots
                    .non_roots
                    .iter()
                    .map(|&i| q(i).z)
                    .filter(|&z| z > ZERO_TOL),
            );
            // With no non-root off the plane every vector is planar; e3 = 1
            // puts v on the bisector of the widest planar angle.
            let e3 = e3.unwrap_or(1.0);
            let e2 = min_of(all.iter().filter(|&&i| is_zero(q(i).z)).map(|&i| q(i).x))
                .unwrap_or(1.0);
            let (bx, by) = bisector(e2);
            unit(0.0, bx * e3, by * e3, sqrt_clamped(1.0 - e3 * e3))
        }
        InitialConditionClass::II2(ZeroScalarPart::P4) => {
            let e4 = min_of(
                all.iter()
                    .filter(|&&i| is_zero(eps(i)) && is_zero(q(i).z))
                    .map(|&i| q(i).x),
            )
            .unwrap_or(1.0);
            let e5 = min_of(
                roots
                    .non_roots
                    .iter()
                    .filter(|&&i| is_zero(eps(i)) && q(i).z > ZERO_TOL)
                    .map(|&i| q(i).z),
            )
            .unwrap_or(1.0);
            let e6 = min_of(
                roots
                    .non_roots
                    .iter()
                    .map(|&i| eps(i))
                    .filter(|&e| e > ZERO_TOL),
            )
            .expect("part 4 has a positive non-root");
            let (bx, by) = bisector(e4);
            unit(
                sqrt_clamped(1.0 - e6 * e6),
                bx * e5 * e6,
                by * e5 * e6,
                sqrt_clamped(1.0 - e5 * e5) * e6,
            )
        }
    }
}

fn verified(
    v: UnitQuaternion,
    cls: InitialConditionClass,
    states: &[UnitQuaternion],
    roots: &[usize],
) -> Result<TransformResult, TransformError> {
    let transformed: Vec<UnitQuaternion> =
        states.iter().map(|q| apply_transform(q, &v)).collect();
    let min_scalar = transformed
        .iter()
        .map(UnitQuaternion::eps)
        .fold(f64::INFINITY, f64::min);
    let max_root_scalar = roots
        .iter()
        .map(|&i| transformed[i].eps())
        .fold(f64::NEG_INFINITY, f64::max);
    if min_scalar < SCALAR_FLOOR || max_root_scalar <= ZERO_TOL {
        return Err(TransformError::Postcondition {
            v,
            min_scalar,
            max_root_scalar,
        });
    }
    Ok(TransformResult {
        v,
        cls,
        transformed_initial: transformed,
    })
}

/// Picks a frame in which every agent starts with a nonnegative scalar part
/// and at least one root starts strictly positive.
pub fn find_transform(
    states: &[UnitQuaternion],
    roots: &RootAnalysis,
) -> Result<TransformResult, TransformError> {
    let cls = classify_initial(states, roots)?;
    let v = construct(states, roots, cls);
    verified(v, cls, states, &roots.roots)
}

/// Root-only construction for the case where every root has a zero scalar
/// part. `root_states` holds exactly the root attitudes.
pub fn find_transform_roots_only(
    root_states: &[UnitQuaternion],
) -> Result<TransformResult, TransformError> {
    check_canonical(root_states)?;
    if root_states.is_empty() {
        return Err(TransformError::NoRoots);
    }
    if let Some(i) = root_states
        .iter()
        .position(|q| classify_subspace(q) != Subspace::S2)
    {
        return Err(TransformError::RootNotInS2(i));
    }
    let ra = RootAnalysis {
        roots: (0..root_states.len()).collect(),
        non_roots: Vec::new(),
        root_subgraph: None,
    };
    let v = construct(root_states, &ra, InitialConditionClass::I2);
    verified(v, InitialConditionClass::I2, root_states, &ra.roots)
}
