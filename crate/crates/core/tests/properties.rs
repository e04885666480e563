#![allow(clippy::needless_range_loop, clippy::filter_map_bool_then)]

mod common;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use attsync::analysis::{verify_convergence, verify_monotone_eps_star, AnalysisContext};
use attsync::config::{parse_config, IntegratorSettings, CASE1};
use attsync::digraph::{DirectedGraph, Edge};
use attsync::protocol::{control_input, NetworkState};
use attsync::quaternion::{canonicalize, classify_subspace, cross_matrix, mult_error, Subspace};
use attsync::simulator::{integrate, simulate};
use attsync::transform::{apply_transform, find_transform, inverse_transform};
use attsync::{UnitQuaternion, Vec3};

use common::*;

fn unit_q() -> impl Strategy<Value = UnitQuaternion> {
    prop::array::uniform4(-1.0f64..1.0)
        .prop_filter("away from the origin", |a| a.iter().map(|x| x * x).sum::<f64>() > 1e-3)
        .prop_map(|a| {
            let n = a.iter().map(|x| x * x).sum::<f64>().sqrt();
            UnitQuaternion::from_array(a.map(|x| x / n)).unwrap()
        })
}

fn vec3() -> impl Strategy<Value = Vec3> {
    prop::array::uniform3(-10.0f64..10.0).prop_map(Vec3::from_array)
}

/// Random weighted graph on `n` nodes as 1-based edges.
fn graph(n: usize, p: f64, seed: u64) -> DirectedGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let edges: Vec<Edge> = (1..=n)
        .flat_map(|a| (1..=n).map(move |b| (a, b)))
        .filter(|&(a, b)| a != b)
        .filter_map(|(a, b)| rng.gen_bool(p).then(|| Edge::new(a, b, rng.gen_range(0.05..2.0))))
        .collect();
    DirectedGraph::from_edges(n, &edges).unwrap()
}

fn qsc_graph(n: usize, seed: u64) -> DirectedGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let edges: Vec<Edge> = random_qsc_edges(&mut rng, n)
        .into_iter()
        .map(|(a, b)| Edge::new(a + 1, b + 1, rng.gen_range(0.1..1.5)))
        .collect();
    DirectedGraph::from_edges(n, &edges).unwrap()
}

fn close(a: &UnitQuaternion, b: &UnitQuaternion, tol: f64) -> bool {
    max_diff(&a.to_array(), &b.to_array()) <= tol
}

proptest! {
    #[test]
    fn canonical_form_is_sign_blind(q in unit_q()) {
        let (a, b) = (canonicalize(&q), canonicalize(&-q));
        prop_assert!(close(&a, &b, 1e-15), "{a} vs {b}");
        prop_assert!(matches!(classify_subspace(&a), Subspace::S1 | Subspace::S2));
        // same attitude: equal up to sign
        prop_assert!(close(&a, &q, 1e-15) || close(&a, &-q, 1e-15));
    }

    #[test]
    fn error_is_unit_and_vanishes_on_itself(qi in unit_q(), qj in unit_q()) {
        let e = mult_error(&qi, &qj).to_array();
        prop_assert!((e.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() <= 1e-12);
        let s = mult_error(&qi, &qi).to_array();
        prop_assert!(max_diff(&s, &[1.0, 0.0, 0.0, 0.0]) <= 1e-12);
    }

    #[test]
    fn cross_matrix_is_skew(x in vec3()) {
        let m = cross_matrix(x);
        let a = x.to_array();
        for r in 0..3 {
            for c in 0..3 {
                prop_assert_eq!(m[r][c], -m[c][r]);
            }
            let xm: f64 = (0..3).map(|k| a[k] * m[k][r]).sum();
            prop_assert!(xm.abs() <= 1e-14 * (1.0 + x.norm_squared()));
        }
    }

    #[test]
    fn inverse_transform_round_trips(q in unit_q(), v in unit_q()) {
        let back = inverse_transform(&apply_transform(&q, &v), &v);
        prop_assert!(close(&back, &q, 1e-15 * 4.0));
    }

    #[test]
    fn laplacian_rows_sum_to_zero(n in 1usize..12, p in 0.0f64..0.8, seed in any::<u64>()) {
        let g = graph(n, p, seed);
        let (_, l) = g.degree_and_laplacian();
        for row in &l {
            prop_assert!(row.iter().sum::<f64>().abs() <= 1e-14);
        }
        if g.is_strongly_connected() {
            prop_assert!(g.is_quasi_strongly_connected());
        }
    }

    #[test]
    fn control_respects_degree_bound(
        states in prop::collection::vec(unit_q(), 6),
        p in 0.1f64..0.9,
        seed in any::<u64>(),
    ) {
        let g = graph(6, p, seed);
        let st = NetworkState::new(states);
        for i in 0..6 {
            prop_assert!(control_input(i, &st, &g).norm() <= g.in_degree(i) + 1e-12);
        }
    }

    #[test]
    fn control_is_frame_invariant(
        states in prop::collection::vec(unit_q(), 5),
        v in unit_q(),
        seed in any::<u64>(),
    ) {
        let g = graph(5, 0.5, seed);
        let a = NetworkState::new(states.clone());
        let b = NetworkState::new(states.iter().map(|q| apply_transform(q, &v)).collect());
        for i in 0..5 {
            let (wa, wb) = (control_input(i, &a, &g), control_input(i, &b, &g));
            prop_assert!(max_diff(&wa.to_array(), &wb.to_array()) <= 1e-12);
        }
    }

    #[test]
    fn control_reads_only_in_neighbors(
        states in prop::collection::vec(unit_q(), 6),
        other in unit_q(),
        seed in any::<u64>(),
    ) {
        let g = graph(6, 0.35, seed);
        let base = NetworkState::new(states);
        for i in 0..6 {
            let w = control_input(i, &base, &g);
            for k in (0..6).filter(|&k| k != i && g.weight(i, k) == 0.0) {
                let mut moved = base.clone();
                moved.attitudes[k] = other;
                let w2 = control_input(i, &moved, &g);
                prop_assert_eq!(w.to_array().map(f64::to_bits), w2.to_array().map(f64::to_bits));
            }
        }
    }
}

fn settings(dt: f64, t_final: f64, record_every: usize, renormalize: bool) -> IntegratorSettings {
    IntegratorSettings {
        dt,
        t_final,
        record_every,
        renormalize,
    }
}

fn ctx(g: &DirectedGraph, frame: UnitQuaternion) -> AnalysisContext {
    AnalysisContext {
        roots: g.root_analysis().roots,
        frame,
        degrees: g.degrees(),
    }
}

fn random_canonical(rng: &mut impl Rng, n: usize) -> Vec<UnitQuaternion> {
    (0..n)
        .map(|_| {
            let q = match rng.gen_range(0..4) {
                0 => random_s2(rng),
                _ => random_unit(rng),
            };
            canonicalize(&UnitQuaternion::from_array(q).unwrap())
        })
        .collect()
}

#[test]
fn unity_drift_without_renormalization() {
    let mut cfg = parse_config(CASE1).unwrap();
    cfg.settings = settings(0.01, 100.0, 100, false);
    let trace = simulate(&cfg).unwrap();
    assert_eq!(trace.samples.len(), 101);
    let drift = trace
        .samples
        .iter()
        .flat_map(|s| s.state.attitudes.iter())
        .map(|q| (q.to_array().iter().map(|x| x * x).sum::<f64>() - 1.0).abs())
        .fold(0.0, f64::max);
    assert!(drift <= 1e-8, "{drift:e}");
}

#[test]
fn consensus_trace_is_constant() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for seed in 0..20 {
        let q = UnitQuaternion::from_array(random_unit(&mut rng)).unwrap();
        let g = qsc_graph(6, seed);
        let samples = integrate(&g, vec![q; 6], &settings(0.01, 2.0, 10, true), &ctx(&g, UnitQuaternion::IDENTITY)).unwrap();
        for s in &samples {
            assert!(s.state.attitudes.iter().all(|a| close(a, &q, 1e-15)));
        }
    }
}

#[test]
fn simulation_commutes_with_frame_change() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for seed in 0..12 {
        let n = rng.gen_range(2..=8);
        let g = qsc_graph(n, seed);
        let init = random_canonical(&mut rng, n);
        let v = UnitQuaternion::from_array(random_unit(&mut rng)).unwrap();
        let s = settings(0.01, 20.0, 50, true);
        let c = ctx(&g, UnitQuaternion::IDENTITY);
        let orig = integrate(&g, init.clone(), &s, &c).unwrap();
        let moved = integrate(&g, init.iter().map(|q| apply_transform(q, &v)).collect(), &s, &c).unwrap();
        assert_eq!(orig.len(), moved.len());
        for (a, b) in orig.iter().zip(&moved) {
            for (qa, qb) in a.state.attitudes.iter().zip(&b.state.attitudes) {
                let expect = apply_transform(qa, &v);
                assert!(close(&expect, qb, 5e-10), "t={} {expect} vs {qb}", a.state.t);
            }
        }
    }
}

#[test]
fn eps_star_is_monotone_on_rooted_graphs() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for seed in 0..40 {
        let n = rng.gen_range(2..=8);
        let g = qsc_graph(n, 1000 + seed);
        let init = random_canonical(&mut rng, n);
        let ra = g.root_analysis();
        let tr = find_transform(&init, &ra).unwrap();
        let c = ctx(&g, tr.v);
        let samples = integrate(&g, init, &settings(0.01, 15.0, 5, true), &c).unwrap();
        let trace = attsync::Trace {
            context: c,
            root_analysis: ra,
            transform: Some(tr),
            samples,
        };
        let all: Vec<usize> = (0..n).collect();
        assert!(verify_monotone_eps_star(&trace, &all, 1e-9).passed(), "seed {seed}");
        let nr = trace.root_analysis.roots.len() as f64;
        for s in &trace.samples {
            assert!(s.metrics.w2 >= 0.0 && s.metrics.w2 <= 4.0 * nr + 1e-12);
            let dmax = trace.context.degrees.iter().cloned().fold(0.0, f64::max);
            assert!(s.metrics.max_omega_norm <= dmax + 1e-12);
        }
    }
}

#[test]
fn two_sources_never_converge() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for seed in 0..20 {
        let n = rng.gen_range(3..=7);
        // nodes 1 and 2 have no in-edges, so two separate sources
        let mut edges: Vec<Edge> = Vec::new();
        for b in 3..=n {
            for a in 1..=n {
                if a != b && rng.gen_bool(0.5) {
                    edges.push(Edge::new(a, b, rng.gen_range(0.2..1.0)));
                }
            }
            edges.push(Edge::new(1 + (b % 2), b, 0.5));
        }
        edges.sort_by_key(|e| (e.from, e.to));
        edges.dedup_by_key(|e| (e.from, e.to));
        let g = DirectedGraph::from_edges(n, &edges).unwrap();
        assert!(!g.is_quasi_strongly_connected(), "seed {seed}");
        let init = random_canonical(&mut rng, n);
        let ra = g.root_analysis();
        let c = ctx(&g, UnitQuaternion::IDENTITY);
        let samples = integrate(&g, init, &settings(0.02, 20.0, 10, true), &c).unwrap();
        let trace = attsync::Trace {
            context: c,
            root_analysis: ra,
            transform: None,
            samples,
        };
        assert!(!verify_convergence(&trace, 1e-3, 10).passed, "seed {seed}");
    }
}

#[test]
fn transform_is_deterministic_on_goldens() {
    let cfg = parse_config(CASE1).unwrap();
    let init = cfg.initial_attitudes().unwrap();
    let ra = cfg.graph().unwrap().root_analysis();
    let a = find_transform(&init, &ra).unwrap();
    let b = find_transform(&init, &ra).unwrap();
    assert_eq!(a.v.to_array().map(f64::to_bits), b.v.to_array().map(f64::to_bits));
}
