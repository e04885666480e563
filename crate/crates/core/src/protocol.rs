//! The synchronization control law `w_i = -sum_j a_ij q_ij`.

use crate::digraph::DirectedGraph;
use crate::quaternion::{Quat, UnitQuaternion, Vec3};

/// Attitudes of all agents at one instant, plus the control applied from it.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkState {
    pub t: f64,
    pub attitudes: Vec<UnitQuaternion>,
    pub omegas: Vec<Vec3>,
}

impl NetworkState {
    pub fn new(attitudes: Vec<UnitQuaternion>) -> Self {
        let omegas = vec![Vec3::ZERO; attitudes.len()];
        Self {
            t: 0.0,
            attitudes,
            omegas,
        }
    }

    pub fn len(&self) -> usize {
        self.attitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.attitudes.is_empty()
    }

    pub fn quats(&self) -> Vec<Quat> {
        self.attitudes.iter().map(UnitQuaternion::quat).collect()
    }
}

/// Control for agent `i` from a slice of (possibly un-normalized) attitudes.
///
/// Integrator stages pass intermediate quaternions here, so no unity check.
pub fn control_from(i: usize, attitudes: &[Quat], g: &DirectedGraph) -> Vec3 {
    let qi = attitudes[i];
    g.in_neighbors(i).fold(Vec3::ZERO, |acc, (j, a_ij)| {
        acc - qi.error_wrt(attitudes[j]).vec.scale(a_ij)
    })
}

pub fn control_input(i: usize, state: &NetworkState, g: &DirectedGraph) -> Vec3 {
    assert_eq!(state.len(), g.node_count(), "state/graph size mismatch");
    let qi = state.attitudes[i].quat();
    g.in_neighbors(i).fold(Vec3::ZERO, |acc, (j, a_ij)| {
        acc - qi.error_wrt(state.attitudes[j].quat()).vec.scale(a_ij)
    })
}

pub fn control_all(state: &NetworkState, g: &DirectedGraph) -> Vec<Vec3> {
    (0..state.len()).map(|i| control_input(i, state, g)).collect()
}

pub(crate) fn control_all_from(attitudes: &[Quat], g: &DirectedGraph) -> Vec<Vec3> {
    (0..attitudes.len())
        .map(|i| control_from(i, attitudes, g))
        .collect()
}
