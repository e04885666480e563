//! Fixed-step RK4 integration of the closed-loop kinematics.

use thiserror::Error;

use crate::analysis::{AnalysisContext, Metrics};
use crate::config::{ConfigError, IntegratorSettings, SimConfig};
use crate::digraph::{DirectedGraph, RootAnalysis};
use crate::protocol::{control_all_from, NetworkState};
use crate::quaternion::{kinematics_rhs, Quat, QuatDeriv, UnitQuaternion, Vec3};
use crate::transform::{find_transform, InitialConditionClass, TransformError, TransformMode, TransformResult};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("transform: {0}")]
    Transform(#[from] TransformError),
    #[error("integration failure at t={t}: agent {agent} became non-finite")]
    NonFinite { agent: usize, t: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub state: NetworkState,
    pub metrics: Metrics,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub context: AnalysisContext,
    pub root_analysis: RootAnalysis,
    /// Constructed transform, when the auto mode produced one.
    pub transform: Option<TransformResult>,
    pub samples: Vec<Sample>,
}

impl Trace {
    pub fn class(&self) -> Option<InitialConditionClass> {
        self.transform.as_ref().map(|t| t.cls)
    }

    pub fn final_state(&self) -> &NetworkState {
        &self.samples.last().expect("trace has samples").state
    }
}

fn derivatives(y: &[Quat], g: &DirectedGraph) -> (Vec<Vec3>, Vec<QuatDeriv>) {
    let omegas = control_all_from(y, g);
    let d = y
        .iter()
        .zip(&omegas)
        .map(|(q, w)| kinematics_rhs(q, *w))
        .collect();
    (omegas, d)
}

fn offset(y: &[Quat], k: &[QuatDeriv], h: f64) -> Vec<Quat> {
    y.iter().zip(k).map(|(q, d)| q.axpy(h, *d)).collect()
}

/// One RK4 step without renormalization. Returns the step-start controls
/// alongside the new attitudes.
pub fn rk4_step(y: &[Quat], g: &DirectedGraph, dt: f64) -> (Vec<Vec3>, Vec<Quat>) {
    let (omegas, k1) = derivatives(y, g);
    let (_, k2) = derivatives(&offset(y, &k1, dt / 2.0), g);
    let (_, k3) = derivatives(&offset(y, &k2, dt / 2.0), g);
    let (_, k4) = derivatives(&offset(y, &k3, dt), g);
    let next = (0..y.len())
        .map(|i| {
            let d = QuatDeriv {
                deps: k1[i].deps + 2.0 * k2[i].deps + 2.0 * k3[i].deps + k4[i].deps,
                dvec: k1[i].dvec + k2[i].dvec.scale(2.0) + k3[i].dvec.scale(2.0) + k4[i].dvec,
            };
            y[i].axpy(dt / 6.0, d)
        })
        .collect();
    (omegas, next)
}

fn finish(
    next: Vec<Quat>,
    renormalize: bool,
    t: f64,
) -> Result<Vec<UnitQuaternion>, SimError> {
    next.into_iter()
        .enumerate()
        .map(|(agent, q)| {
            if !q.is_finite() {
                return Err(SimError::NonFinite { agent, t });
            }
            if renormalize {
                UnitQuaternion::normalize(q).map_err(|_| SimError::NonFinite { agent, t })
            } else {
                Ok(UnitQuaternion::from_quat_unchecked(q))
            }
        })
        .collect()
}

/// Advances the network by `dt`. The returned state carries the controls
/// evaluated at the start of the step.
pub fn step(
    state: &NetworkState,
    g: &DirectedGraph,
    dt: f64,
    renormalize: bool,
) -> Result<NetworkState, SimError> {
    let (omegas, next) = rk4_step(&state.quats(), g, dt);
    let t = state.t + dt;
    Ok(NetworkState {
        t,
        attitudes: finish(next, renormalize, t)?,
        omegas,
    })
}

/// Integrates from `initial` and records every `record_every`-th step plus
/// the final one. Recorded states carry the controls evaluated at their own
/// attitudes.
pub fn integrate(
    g: &DirectedGraph,
    initial: Vec<UnitQuaternion>,
    settings: &IntegratorSettings,
    context: &AnalysisContext,
) -> Result<Vec<Sample>, SimError> {
    settings.validate()?;
    let steps = settings.step_count();
    let mut samples = Vec::with_capacity(steps / settings.record_every + 2);
    let mut attitudes = initial;
    for k in 0..=steps {
        let t = k as f64 * settings.dt;
        let y: Vec<Quat> = attitudes.iter().map(UnitQuaternion::quat).collect();
        if k == steps {
            let omegas = control_all_from(&y, g);
            let state = NetworkState { t, attitudes, omegas };
            let metrics = Metrics::compute(&state, context);
            samples.push(Sample { state, metrics });
            break;
        }
        let (omegas, next) = rk4_step(&y, g, settings.dt);
        let next = finish(next, settings.renormalize, t + settings.dt)?;
        if k % settings.record_every == 0 {
            let state = NetworkState {
                t,
                attitudes,
                omegas,
            };
            let metrics = Metrics::compute(&state, context);
            samples.push(Sample { state, metrics });
        }
        attitudes = next;
    }
    Ok(samples)
}

/// Chooses the analysis frame for a run.
pub fn select_frame(
    mode: TransformMode,
    initial: &[UnitQuaternion],
    roots: &RootAnalysis,
) -> Result<(UnitQuaternion, Option<TransformResult>), TransformError> {
    match mode {
        TransformMode::None => Ok((UnitQuaternion::IDENTITY, None)),
        TransformMode::Explicit(v) => Ok((v, None)),
        TransformMode::Auto if roots.roots.is_empty() => {
            log::warn!("graph has no root; analysis stays in the original frame");
            Ok((UnitQuaternion::IDENTITY, None))
        }
        TransformMode::Auto => {
            let r = find_transform(initial, roots)?;
            Ok((r.v, Some(r)))
        }
    }
}

/// Runs a full experiment: canonicalize, pick the frame, integrate, analyze.
pub fn simulate(config: &SimConfig) -> Result<Trace, SimError> {
    config.validate()?;
    let g = config.graph()?;
    let initial = config.initial_attitudes()?;
    let root_analysis = g.root_analysis();
    if root_analysis.roots.is_empty() {
        log::warn!(
            "{}: graph is not quasi-strongly connected; synchronization is not expected",
            config.name
        );
    }
    let (frame, transform) = select_frame(config.transform_mode, &initial, &root_analysis)?;
    let context = AnalysisContext {
        roots: root_analysis.roots.clone(),
        frame,
        degrees: g.degrees(),
    };
    let samples = integrate(&g, initial, &config.settings, &context)?;
    Ok(Trace {
        context,
        root_analysis,
        transform,
        samples,
    })
}
