//! Experiment configuration: a line-oriented text format.
//!
//! ```text
//! # comment
//! [graph]
//! nodes 5
//! edge 5 1 1.0          # edge <from> <to> <weight>; agent <to> listens to <from>
//!
//! [initial]
//! q 1 0 -0.6894 -0.6140 0.3843   # q <id> eps q1 q2 q3
//! canonicalize true
//! transform auto                 # auto | none | explicit eps q1 q2 q3
//!
//! [integrator]
//! dt 0.01
//! t_final 60
//! record_every 10
//! renormalize true
//!
//! [output]
//! name case1
//! path out
//! svg false
//! ```
//!
//! Node ids are 1-based. Every key is optional except `nodes`, the edges the
//! experiment needs, and one `q` line per node.

use std::path::PathBuf;
use std::str::FromStr;

use thiserror::Error;

use crate::digraph::{DirectedGraph, Edge, GraphError};
use crate::quaternion::{canonicalize, Quat, QuatValidationError, UnitQuaternion, UNITY_TOL};
use crate::transform::TransformMode;

/// Unity defect accepted on config quaternions before rejection. Hand-typed
/// 4-decimal values routinely miss unity by a few 1e-5.
pub const CONFIG_UNITY_TOL: f64 = 1e-3;

pub const DEFAULT_DT: f64 = 0.01;
pub const DEFAULT_T_FINAL: f64 = 60.0;
pub const MAX_DT: f64 = 0.1;
/// Upper bound on `nodes`; the dense adjacency matrix is `nodes^2`.
pub const MAX_NODES: usize = 1024;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("{field}: {msg}")]
    Semantic { field: String, msg: String },
    #[error("graph: {0}")]
    Graph(#[from] GraphError),
}

impl ConfigError {
    fn semantic(field: impl Into<String>, msg: impl Into<String>) -> Self {
        Self::Semantic {
            field: field.into(),
            msg: msg.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorSettings {
    pub dt: f64,
    pub t_final: f64,
    pub record_every: usize,
    pub renormalize: bool,
}

impl Default for IntegratorSettings {
    fn default() -> Self {
        Self {
            dt: DEFAULT_DT,
            t_final: DEFAULT_T_FINAL,
            record_every: 1,
            renormalize: true,
        }
    }
}

impl IntegratorSettings {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.dt.is_finite() && self.dt > 0.0 && self.dt <= MAX_DT) {
            return Err(ConfigError::semantic(
                "dt",
                format!("{} outside (0, {MAX_DT}]", self.dt),
            ));
        }
        if !(self.t_final.is_finite() && self.t_final >= self.dt) {
            return Err(ConfigError::semantic(
                "t_final",
                format!("{} must be finite and at least dt", self.t_final),
            ));
        }
        if self.record_every == 0 {
            return Err(ConfigError::semantic("record_every", "must be at least 1"));
        }
        Ok(())
    }

    /// Number of steps so that `steps * dt >= t_final`.
    pub fn step_count(&self) -> usize {
        ((self.t_final / self.dt) - 1e-9).ceil().max(1.0) as usize
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub name: String,
    pub n: usize,
    pub edges: Vec<Edge>,
    /// Raw `[eps, q1, q2, q3]` as written, in node order.
    pub initial: Vec<[f64; 4]>,
    pub settings: IntegratorSettings,
    pub canonicalize_init: bool,
    pub transform_mode: TransformMode,
    pub output_path: Option<PathBuf>,
    pub emit_svg: bool,
}

impl SimConfig {
    pub fn graph(&self) -> Result<DirectedGraph, ConfigError> {
        Ok(DirectedGraph::from_edges(self.n, &self.edges)?)
    }

    /// Unit initial attitudes, canonicalized when the config asks for it.
    pub fn initial_attitudes(&self) -> Result<Vec<UnitQuaternion>, ConfigError> {
        self.initial
            .iter()
            .enumerate()
            .map(|(i, a)| {
                let q = config_quat(*a).map_err(|e| ConfigError::semantic(format!("q {}", i + 1), e.to_string()))?;
                Ok(if self.canonicalize_init {
                    canonicalize(&q)
                } else {
                    q
                })
            })
            .collect()
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.n == 0 {
            return Err(ConfigError::semantic("nodes", "must be at least 1"));
        }
        self.graph()?;
        if self.initial.len() != self.n {
            return Err(ConfigError::semantic(
                "initial",
                format!("{} quaternions for {} nodes", self.initial.len(), self.n),
            ));
        }
        self.initial_attitudes()?;
        self.settings.validate()
    }
}

/// Renormalizes silently; `parse_config` reports the defect once.
fn config_quat(a: [f64; 4]) -> Result<UnitQuaternion, QuatValidationError> {
    let q = Quat::from_array(a);
    if !q.is_finite() {
        return Err(QuatValidationError::NonFinite(a));
    }
    let defect = q.unity_defect();
    if defect > CONFIG_UNITY_TOL {
        return Err(QuatValidationError::NotUnit {
            components: a,
            defect,
            limit: CONFIG_UNITY_TOL,
        });
    }
    if defect <= UNITY_TOL {
        UnitQuaternion::from_array(a)
    } else {
        UnitQuaternion::normalize(q)
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    None,
    Graph,
    Initial,
    Integrator,
    Output,
}

fn parse_num<T: FromStr>(tok: &str, line: usize, what: &str) -> Result<T, ConfigError> {
    tok.parse().map_err(|_| ConfigError::Syntax {
        line,
        msg: format!("invalid {what} '{tok}'"),
    })
}

fn parse_bool(tok: &str, line: usize) -> Result<bool, ConfigError> {
    match tok {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(ConfigError::Syntax {
            line,
            msg: format!("invalid boolean '{tok}'"),
        }),
    }
}

fn finite(x: f64, line: usize, what: &str) -> Result<f64, ConfigError> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(ConfigError::Syntax {
            line,
            msg: format!("{what} must be finite"),
        })
    }
}

fn quad(toks: &[&str], line: usize) -> Result<[f64; 4], ConfigError> {
    let mut a = [0.0; 4];
    for (slot, tok) in a.iter_mut().zip(toks) {
        *slot = finite(parse_num(tok, line, "number")?, line, "quaternion component")?;
    }
    Ok(a)
}

/// Parses and validates a config document.
pub fn parse_config(text: &str) -> Result<SimConfig, ConfigError> {
    let mut section = Section::None;
    let mut n: Option<usize> = None;
    let mut edges = Vec::new();
    let mut quats: Vec<(usize, usize, [f64; 4])> = Vec::new();
    let mut settings = IntegratorSettings::default();
    let mut canonicalize_init = true;
    let mut transform_mode = TransformMode::Auto;
    let mut name = String::from("run");
    let mut output_path = None;
    let mut emit_svg = false;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if content.starts_with('[') {
            section = match content {
                "[graph]" => Section::Graph,
                "[initial]" => Section::Initial,
                "[integrator]" => Section::Integrator,
                "[output]" => Section::Output,
                _ => {
                    return Err(ConfigError::Syntax {
                        line,
                        msg: format!("unknown section '{content}'"),
                    })
                }
            };
            continue;
        }
        let toks: Vec<&str> = content.split_whitespace().collect();
        let key = toks[0];
        let args = &toks[1..];
        let arity = |k: usize| -> Result<(), ConfigError> {
            if args.len() == k {
                Ok(())
            } else {
                Err(ConfigError::Syntax {
                    line,
                    msg: format!("'{key}' takes {k} argument(s), got {}", args.len()),
                })
            }
        };
        match (section, key) {
            (Section::Graph, "nodes") => {
                arity(1)?;
                n = Some(parse_num(args[0], line, "node count")?);
            }
            (Section::Graph, "edge") => {
                arity(3)?;
                edges.push(Edge::new(
                    parse_num(args[0], line, "node id")?,
                    parse_num(args[1], line, "node id")?,
                    parse_num(args[2], line, "weight")?,
                ));
            }
            (Section::Initial, "q") => {
                arity(5)?;
                let id: usize = parse_num(args[0], line, "node id")?;
                quats.push((line, id, quad(&args[1..], line)?));
            }
            (Section::Initial, "canonicalize") => {
                arity(1)?;
                canonicalize_init = parse_bool(args[0], line)?;
            }
            (Section::Initial, "transform") => {
                transform_mode = match args.first().copied() {
                    Some("auto") if args.len() == 1 => TransformMode::Auto,
                    Some("none") if args.len() == 1 => TransformMode::None,
                    Some("explicit") if args.len() == 5 => {
                        let a = quad(&args[1..], line)?;
                        TransformMode::Explicit(
                            config_quat(a)
                                .map_err(|e| ConfigError::semantic("transform", e.to_string()))?,
                        )
                    }
                    _ => {
                        return Err(ConfigError::Syntax {
                            line,
                            msg: "expected 'transform auto', 'transform none' or 'transform explicit eps q1 q2 q3'".into(),
                        })
                    }
                };
            }
            (Section::Integrator, "dt") => {
                arity(1)?;
                settings.dt = parse_num(args[0], line, "dt")?;
            }
            (Section::Integrator, "t_final") => {
                arity(1)?;
                settings.t_final = parse_num(args[0], line, "t_final")?;
            }
            (Section::Integrator, "record_every") => {
                arity(1)?;
                settings.record_every = parse_num(args[0], line, "record_every")?;
            }
            (Section::Integrator, "renormalize") => {
                arity(1)?;
                settings.renormalize = parse_bool(args[0], line)?;
            }
            (Section::Output, "name") => {
                arity(1)?;
                if !args[0]
                    .chars()
                    .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
                {
                    return Err(ConfigError::Syntax {
                        line,
                        msg: format!("name '{}' may only use [A-Za-z0-9_-]", args[0]),
                    });
                }
                name = args[0].to_string();
            }
            (Section::Output, "path") => {
                arity(1)?;
                output_path = Some(PathBuf::from(args[0]));
            }
            (Section::Output, "svg") => {
                arity(1)?;
                emit_svg = parse_bool(args[0], line)?;
            }
            (Section::None, _) => {
                return Err(ConfigError::Syntax {
                    line,
                    msg: format!("'{key}' outside of any section"),
                })
            }
            _ => {
                return Err(ConfigError::Syntax {
                    line,
                    msg: format!("unknown key '{key}' in this section"),
                })
            }
        }
    }

    let n = n.ok_or_else(|| ConfigError::semantic("nodes", "missing"))?;
    if n == 0 || n > MAX_NODES {
        return Err(ConfigError::semantic(
            "nodes",
            format!("{n} outside 1..={MAX_NODES}"),
        ));
    }
    let mut initial: Vec<Option<[f64; 4]>> = vec![None; n];
    for (line, id, a) in quats {
        if id == 0 || id > n {
            return Err(ConfigError::semantic(
                format!("q {id}"),
                format!("line {line}: node id out of range 1..={n}"),
            ));
        }
        if initial[id - 1].replace(a).is_some() {
            return Err(ConfigError::semantic(
                format!("q {id}"),
                format!("line {line}: duplicate initial attitude"),
            ));
        }
    }
    let initial = initial
        .into_iter()
        .enumerate()
        .map(|(i, a)| a.ok_or_else(|| ConfigError::semantic(format!("q {}", i + 1), "missing initial attitude")))
        .collect::<Result<Vec<_>, _>>()?;

    let cfg = SimConfig {
        name,
        n,
        edges,
        initial,
        settings,
        canonicalize_init,
        transform_mode,
        output_path,
        emit_svg,
    };
    cfg.validate()?;
    for (i, a) in cfg.initial.iter().enumerate() {
        let defect = (a.iter().map(|x| x * x).sum::<f64>() - 1.0).abs();
        if defect > UNITY_TOL {
            log::warn!("q {}: unity defect {defect:.2e}, renormalized", i + 1);
        }
    }
    Ok(cfg)
}

pub const CASE1: &str = include_str!("../configs/case1.cfg");
pub const CASE2: &str = include_str!("../configs/case2.cfg");
pub const CASE2_BROKEN: &str = include_str!("../configs/case2_broken.cfg");

/// The bundled golden configurations, in run order.
pub fn bundled() -> [(&'static str, &'static str); 3] {
    [
        ("case1", CASE1),
        ("case2", CASE2),
        ("case2_broken", CASE2_BROKEN),
    ]
}
