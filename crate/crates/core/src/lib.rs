//! Leaderless attitude synchronization of rigid bodies over directed graphs.
//!
//! Each agent runs the kinematic protocol `omega_i = -sum_j a_ij * q_ij`,
//! where `q_ij` is the vector part of the multiplicative attitude error
//! between agents `i` and `j`. The crate provides the quaternion algebra,
//! graph connectivity analysis, the frame change that makes every initial
//! scalar part nonnegative, an RK4 simulator, and runtime diagnostics.
//!
//! ```
//! use attsync::config::{parse_config, CASE1};
//! use attsync::pipeline::execute;
//!
//! let mut cfg = parse_config(CASE1).unwrap();
//! cfg.settings.t_final = 1.0;
//! let (trace, summary) = execute(&cfg).unwrap();
//! assert!(summary.check.strong);
//! assert_eq!(trace.samples.first().unwrap().state.t, 0.0);
//! ```

pub mod analysis;
pub mod config;
pub mod digraph;
pub mod export;
pub mod pipeline;
pub mod protocol;
pub mod quaternion;
pub mod simulator;
pub mod transform;

pub use digraph::{DirectedGraph, Edge};
pub use quaternion::{mult_error, Quat, UnitQuaternion, Vec3};
pub use simulator::{simulate, Trace};
