//! Independent reference implementations shared by the integration tests.
//! Nothing here calls into the crate's algebra or graph code.

#![allow(dead_code, clippy::needless_range_loop)]

use rand::Rng;

pub type Q = [f64; 4];
pub type M3 = [[f64; 3]; 3];

/// Hamilton product, scalar first, written out term by term.
pub fn hamilton(a: Q, b: Q) -> Q {
    let [a0, a1, a2, a3] = a;
    let [b0, b1, b2, b3] = b;
    [
        a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3,
        a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2,
        a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1,
        a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0,
    ]
}

pub fn conj(a: Q) -> Q {
    [a[0], -a[1], -a[2], -a[3]]
}

/// Attitude (frame-to-body) matrix of a unit quaternion.
pub fn attitude_matrix(q: Q) -> M3 {
    let [e, x, y, z] = q;
    let s = e * e - (x * x + y * y + z * z);
    let v = [x, y, z];
    let mut c = [[0.0; 3]; 3];
    for r in 0..3 {
        for k in 0..3 {
            c[r][k] = 2.0 * v[r] * v[k] + if r == k { s } else { 0.0 };
        }
    }
    // -2 eps [v]x
    c[0][1] += 2.0 * e * z;
    c[0][2] -= 2.0 * e * y;
    c[1][0] -= 2.0 * e * z;
    c[1][2] += 2.0 * e * x;
    c[2][0] += 2.0 * e * y;
    c[2][1] -= 2.0 * e * x;
    c
}

pub fn mat_mul(a: &M3, b: &M3) -> M3 {
    let mut c = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            c[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    c
}

pub fn transpose(a: &M3) -> M3 {
    let mut t = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            t[i][j] = a[j][i];
        }
    }
    t
}

pub fn mat_max_diff(a: &M3, b: &M3) -> f64 {
    (0..9).map(|k| (a[k / 3][k % 3] - b[k / 3][k % 3]).abs()).fold(0.0, f64::max)
}

pub fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn normalize(a: Q) -> Q {
    let n = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    [a[0] / n, a[1] / n, a[2] / n, a[3] / n]
}

/// Uniform on the 3-sphere by rejection from the 4-cube.
pub fn random_unit(rng: &mut impl Rng) -> Q {
    loop {
        let a: Q = [
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        ];
        let n2: f64 = a.iter().map(|x| x * x).sum();
        if n2 > 1e-4 && n2 <= 1.0 {
            return normalize(a);
        }
    }
}

/// Positive scalar part.
pub fn random_s1(rng: &mut impl Rng) -> Q {
    let mut q = random_unit(rng);
    if rng.gen_bool(0.1) {
        // near the boundary
        q[0] = rng.gen_range(1e-6..1e-2);
        let r = (1.0 - q[0] * q[0]).sqrt();
        let v = random_direction(rng);
        return [q[0], r * v[0], r * v[1], r * v[2]];
    }
    if q[0] < 0.0 {
        q = q.map(|x| -x);
    }
    if q[0] <= 1e-9 {
        q[0] = 0.5;
        q = normalize(q);
    }
    q
}

pub fn random_direction(rng: &mut impl Rng) -> [f64; 3] {
    let q = random_unit(rng);
    let n = (q[1] * q[1] + q[2] * q[2] + q[3] * q[3]).sqrt();
    [q[1] / n, q[2] / n, q[3] / n]
}

/// Zero scalar part with a strictly positive third component.
pub fn random_s2_upper(rng: &mut impl Rng) -> Q {
    let mut d = random_direction(rng);
    if d[2] < 0.0 {
        d[2] = -d[2];
    }
    if d[2] < 1e-9 {
        d[2] = 0.25;
    }
    if rng.gen_bool(0.1) {
        d[2] = rng.gen_range(1e-6..1e-2);
    }
    let n = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
    [0.0, d[0] / n, d[1] / n, d[2] / n]
}

/// Zero scalar part in the `q3 = 0` plane, on the canonical half
/// (`q2 > 0`, or exactly `(1, 0, 0)`).
pub fn random_s2_planar(rng: &mut impl Rng) -> Q {
    if rng.gen_bool(0.15) {
        return [0.0, 1.0, 0.0, 0.0];
    }
    let th: f64 = rng.gen_range(1e-6..std::f64::consts::PI);
    [0.0, th.cos(), th.sin(), 0.0]
}

pub fn random_s2(rng: &mut impl Rng) -> Q {
    if rng.gen_bool(0.5) {
        random_s2_upper(rng)
    } else {
        random_s2_planar(rng)
    }
}

/// Directed edge list `(from, to)` with 0-based nodes.
pub type Edges = Vec<(usize, usize)>;

/// Reachability closure by repeated relaxation.
pub fn reach_matrix(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<bool>> {
    let mut r = vec![vec![false; n]; n];
    for i in 0..n {
        r[i][i] = true;
    }
    for &(a, b) in edges {
        r[a][b] = true;
    }
    for k in 0..n {
        for i in 0..n {
            if r[i][k] {
                for j in 0..n {
                    if r[k][j] {
                        r[i][j] = true;
                    }
                }
            }
        }
    }
    r
}

/// Nodes that reach every node.
pub fn roots_by_reachability(n: usize, edges: &[(usize, usize)]) -> Vec<usize> {
    let r = reach_matrix(n, edges);
    (0..n).filter(|&i| r[i].iter().all(|&b| b)).collect()
}

/// Tarjan's strongly connected components.
pub fn tarjan(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<usize>> {
    struct S<'a> {
        adj: &'a [Vec<usize>],
        index: Vec<Option<usize>>,
        low: Vec<usize>,
        on: Vec<bool>,
        stack: Vec<usize>,
        next: usize,
        out: Vec<Vec<usize>>,
    }
    fn visit(s: &mut S, v: usize) {
        s.index[v] = Some(s.next);
        s.low[v] = s.next;
        s.next += 1;
        s.stack.push(v);
        s.on[v] = true;
        for k in 0..s.adj[v].len() {
            let w = s.adj[v][k];
            match s.index[w] {
                None => {
                    visit(s, w);
                    s.low[v] = s.low[v].min(s.low[w]);
                }
                Some(iw) if s.on[w] => s.low[v] = s.low[v].min(iw),
                _ => {}
            }
        }
        if Some(s.low[v]) == s.index[v] {
            let mut comp = Vec::new();
            loop {
                let w = s.stack.pop().unwrap();
                s.on[w] = false;
                comp.push(w);
                if w == v {
                    break;
                }
            }
            comp.sort_unstable();
            s.out.push(comp);
        }
    }
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in edges {
        adj[a].push(b);
    }
    let mut s = S {
        adj: &adj,
        index: vec![None; n],
        low: vec![0; n],
        on: vec![false; n],
        stack: Vec::new(),
        next: 0,
        out: Vec::new(),
    };
    for v in 0..n {
        if s.index[v].is_none() {
            visit(&mut s, v);
        }
    }
    s.out
}

/// Root set from the condensation: the unique source component, if any.
pub fn roots_by_condensation(n: usize, edges: &[(usize, usize)]) -> Vec<usize> {
    let comps = tarjan(n, edges);
    let mut comp_of = vec![0; n];
    for (c, nodes) in comps.iter().enumerate() {
        for &v in nodes {
            comp_of[v] = c;
        }
    }
    let mut has_in = vec![false; comps.len()];
    for &(a, b) in edges {
        if comp_of[a] != comp_of[b] {
            has_in[comp_of[b]] = true;
        }
    }
    let sources: Vec<usize> = (0..comps.len()).filter(|&c| !has_in[c]).collect();
    if sources.len() == 1 {
        comps[sources[0]].clone()
    } else {
        Vec::new()
    }
}

/// Random graph with a spanning out-tree from a random node plus extra edges.
pub fn random_qsc_edges(rng: &mut impl Rng, n: usize) -> Edges {
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        order.swap(i, rng.gen_range(0..=i));
    }
    let mut edges = Vec::new();
    for k in 1..n {
        let parent = order[rng.gen_range(0..k)];
        edges.push((parent, order[k]));
    }
    let p: f64 = rng.gen_range(0.0..0.3);
    for a in 0..n {
        for b in 0..n {
            if a != b && !edges.contains(&(a, b)) && rng.gen_bool(p) {
                edges.push((a, b));
            }
        }
    }
    edges
}

/// Graph whose root set is exactly `0..r`: a ring on the roots, each
/// non-root fed by some earlier node, and extra forward edges only.
pub fn layered_edges(rng: &mut impl Rng, n: usize, r: usize) -> Edges {
    let mut edges = Vec::new();
    if r > 1 {
        for i in 0..r {
            edges.push((i, (i + 1) % r));
        }
        for a in 0..r {
            for b in 0..r {
                if a != b && !edges.contains(&(a, b)) && rng.gen_bool(0.2) {
                    edges.push((a, b));
                }
            }
        }
    }
    for k in r..n {
        edges.push((rng.gen_range(0..k), k));
        for a in 0..k {
            if !edges.contains(&(a, k)) && rng.gen_bool(0.15) {
                edges.push((a, k));
            }
        }
    }
    edges
}
