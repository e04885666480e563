//! Runtime diagnostics: minimum scalar tracking, energy functions, the
//! disagreement metric, and verdicts over recorded traces.
//!
//! Scalar-part quantities (`eps_star_*`, `W1`, `W2`, `V`) are evaluated in the
//! trace's analysis frame, i.e. after applying the chosen transform `v`. The
//! disagreement metric is always taken in the original frame.

use thiserror::Error;

use crate::protocol::NetworkState;
use crate::quaternion::UnitQuaternion;
use crate::simulator::Trace;
use crate::transform::apply_transform;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalysisError {
    #[error("minimum over an empty node set")]
    EmptySubset,
    #[error("node {0} out of range")]
    OutOfRange(usize),
}

/// Where the analysis looks: the root set and the frame change.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisContext {
    pub roots: Vec<usize>,
    pub frame: UnitQuaternion,
    /// Weighted in-degree of each agent, for the velocity bound.
    pub degrees: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    /// `None` when the graph has no roots.
    pub eps_star_roots: Option<f64>,
    pub eps_star_all: f64,
    /// Argmin over roots (lowest index on ties).
    pub k_index: Option<usize>,
    pub w1: Option<f64>,
    pub w2: f64,
    pub v_energy: f64,
    pub disagreement: f64,
    pub max_omega_norm: f64,
}

impl Metrics {
    pub fn compute(state: &NetworkState, ctx: &AnalysisContext) -> Self {
        let framed = to_frame(&state.attitudes, &ctx.frame);
        let all: Vec<usize> = (0..framed.len()).collect();
        let (eps_star_all, _) = min_scalar(&framed, &all).expect("nonempty network");
        let root_min = min_scalar(&framed, &ctx.roots).ok();
        Self {
            eps_star_roots: root_min.map(|(v, _)| v),
            eps_star_all,
            k_index: root_min.map(|(_, k)| k),
            w1: energy_w1(&framed, &ctx.roots).ok(),
            w2: energy_w2(&framed, &ctx.roots),
            v_energy: energy_v(&framed),
            disagreement: disagreement(&state.attitudes),
            max_omega_norm: state
                .omegas
                .iter()
                .map(|w| w.norm())
                .fold(0.0, f64::max),
        }
    }
}

pub fn to_frame(attitudes: &[UnitQuaternion], frame: &UnitQuaternion) -> Vec<UnitQuaternion> {
    if *frame == UnitQuaternion::IDENTITY {
        return attitudes.to_vec();
    }
    attitudes.iter().map(|q| apply_transform(q, frame)).collect()
}

/// Smallest scalar part over `subset` and the lowest index attaining it.
pub fn min_scalar(
    attitudes: &[UnitQuaternion],
    subset: &[usize],
) -> Result<(f64, usize), AnalysisError> {
    let mut best: Option<(f64, usize)> = None;
    for &i in subset {
        let e = attitudes.get(i).ok_or(AnalysisError::OutOfRange(i))?.eps();
        best = match best {
            Some((b, k)) if b < e || (b == e && k < i) => Some((b, k)),
            _ => Some((e, i)),
        };
    }
    best.ok_or(AnalysisError::EmptySubset)
}

/// `|q_k|^2 + (eps_k - 1)^2` at the minimizing root `k`.
pub fn energy_w1(attitudes: &[UnitQuaternion], roots: &[usize]) -> Result<f64, AnalysisError> {
    let (_, k) = min_scalar(attitudes, roots)?;
    let q = attitudes[k];
    Ok(q.vec().norm_squared() + (q.eps() - 1.0).powi(2))
}

/// `sum over roots of |q_i|^2 + (eps_i - 1)^2`; zero for an empty root set.
pub fn energy_w2(attitudes: &[UnitQuaternion], roots: &[usize]) -> f64 {
    roots
        .iter()
        .map(|&i| {
            let q = attitudes[i];
            q.vec().norm_squared() + (q.eps() - 1.0).powi(2)
        })
        .sum()
}

/// `2 - 2 * min scalar` over all agents.
pub fn energy_v(attitudes: &[UnitQuaternion]) -> f64 {
    let m = attitudes
        .iter()
        .map(UnitQuaternion::eps)
        .fold(f64::INFINITY, f64::min);
    2.0 - 2.0 * m
}

/// Largest `|eps_i - eps_j| + |q_i - q_j|` over all pairs.
pub fn disagreement(attitudes: &[UnitQuaternion]) -> f64 {
    let mut worst = 0.0f64;
    for (a, qa) in attitudes.iter().enumerate() {
        for qb in &attitudes[a + 1..] {
            let d = (qa.eps() - qb.eps()).abs() + (qa.vec() - qb.vec()).norm();
            worst = worst.max(d);
        }
    }
    worst
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MonotoneVerdict {
    Pass,
    /// First sample whose minimum dropped by more than the tolerance.
    Fail { sample: usize, t: f64, delta: f64 },
}

impl MonotoneVerdict {
    pub fn passed(&self) -> bool {
        matches!(self, Self::Pass)
    }
}

/// Checks that the minimum scalar part over `subset` (in the trace's
/// analysis frame) never decreases by more than `tol` between samples.
pub fn verify_monotone_eps_star(trace: &Trace, subset: &[usize], tol: f64) -> MonotoneVerdict {
    let mut prev: Option<f64> = None;
    for (idx, s) in trace.samples.iter().enumerate() {
        let framed = to_frame(&s.state.attitudes, &trace.context.frame);
        let Ok((cur, _)) = min_scalar(&framed, subset) else {
            return MonotoneVerdict::Pass;
        };
        if let Some(p) = prev {
            let delta = cur - p;
            if delta < -tol {
                return MonotoneVerdict::Fail {
                    sample: idx,
                    t: s.state.t,
                    delta,
                };
            }
        }
        prev = Some(cur);
    }
    MonotoneVerdict::Pass
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceVerdict {
    pub passed: bool,
    pub final_disagreement: f64,
    /// Final minimum scalar over all agents in the analysis frame.
    pub c1_estimate: f64,
    pub reason: Option<String>,
}

/// Passes when the final disagreement is below `tol`, the disagreement does
/// not grow by more than `10 * tol` across the last `window` samples, and the
/// limiting minimum scalar part is positive.
#[allow(clippy::neg_cmp_op_on_partial_ord)]
pub fn verify_convergence(trace: &Trace, tol: f64, window: usize) -> ConvergenceVerdict {
    let Some(last) = trace.samples.last() else {
        return ConvergenceVerdict {
            passed: false,
            final_disagreement: f64::NAN,
            c1_estimate: f64::NAN,
            reason: Some("empty trace".into()),
        };
    };
    let final_disagreement = last.metrics.disagreement;
    let c1_estimate = last.metrics.eps_star_all;
    let start = trace.samples.len().saturating_sub(window.max(1));
    let tail = &trace.samples[start..];
    let jitter = 10.0 * tol;
    let grows = tail
        .windows(2)
        .find(|w| w[1].metrics.disagreement > w[0].metrics.disagreement + jitter);

    let reason = if !(final_disagreement < tol) {
        Some(format!(
            "final disagreement {final_disagreement:e} not below {tol:e}"
        ))
    } else if let Some(w) = grows {
        Some(format!(
            "disagreement grew from {:e} to {:e} at t={}",
            w[0].metrics.disagreement, w[1].metrics.disagreement, w[1].state.t
        ))
    } else if !(c1_estimate > 0.0) {
        Some(format!("limit scalar part {c1_estimate:e} is not positive"))
    } else {
        None
    };
    ConvergenceVerdict {
        passed: reason.is_none(),
        final_disagreement,
        c1_estimate,
        reason,
    }
}
