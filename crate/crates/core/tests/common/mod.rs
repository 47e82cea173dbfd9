//! Fixtures and brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::VecDeque;

use acadrisk::boosted_trees::{TreeEnsemble, TreeNode};
use acadrisk::interaction_network::InteractionGraph;
use num_rational::Ratio;
use rand::Rng;

/// Random tree with positive, consistent covers. Thresholds sit on a 0.1
/// grid so that inputs drawn from the same grid hit them exactly.
pub fn random_tree<R: Rng>(rng: &mut R, n_features: usize, depth: usize) -> TreeNode {
    if depth == 0 || rng.gen_bool(0.25) {
        return TreeNode::leaf(rng.gen_range(-2.0..2.0), rng.gen_range(1..20) as f64);
    }
    let feature = rng.gen_range(0..n_features);
    let threshold = rng.gen_range(1..10) as f64 / 10.0;
    TreeNode::split(
        feature,
        threshold,
        random_tree(rng, n_features, depth - 1),
        random_tree(rng, n_features, depth - 1),
    )
}

pub fn random_ensemble<R: Rng>(rng: &mut R, n_features: usize, n_trees: usize, depth: usize) -> TreeEnsemble {
    let trees = (0..n_trees).map(|_| random_tree(rng, n_features, depth)).collect();
    TreeEnsemble::new(rng.gen_range(-1.0..1.0), rng.gen_range(0.05..1.0), n_features, trees)
}

pub fn random_point<R: Rng>(rng: &mut R, n_features: usize) -> Vec<f64> {
    (0..n_features).map(|_| rng.gen_range(0..=10) as f64 / 10.0).collect()
}

/// Symmetric graph with small integer weights.
pub fn random_graph<R: Rng>(rng: &mut R, n: usize, p: f64) -> InteractionGraph {
    let mut m = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(p) {
                let w = rng.gen_range(1..=3) as f64;
                m[i][j] = w;
                m[j][i] = w;
            }
        }
    }
    let ids = (0..n).map(|i| format!("n{i}")).collect();
    InteractionGraph::from_matrix(ids, &m).unwrap()
}

pub fn graph_from_edges(n: usize, edges: &[(usize, usize)]) -> InteractionGraph {
    let mut m = vec![vec![0.0; n]; n];
    for &(a, b) in edges {
        m[a][b] = 1.0;
        m[b][a] = 1.0;
    }
    InteractionGraph::from_matrix((0..n).map(|i| format!("v{i}")).collect(), &m).unwrap()
}

fn bfs(adj: &[Vec<usize>], s: usize) -> Vec<Option<usize>> {
    let mut dist = vec![None; adj.len()];
    dist[s] = Some(0);
    let mut q = VecDeque::from([s]);
    while let Some(v) = q.pop_front() {
        for &w in &adj[v] {
            if dist[w].is_none() {
                dist[w] = Some(dist[v].unwrap() + 1);
                q.push_back(w);
            }
        }
    }
    dist
}

fn all_shortest_paths(adj: &[Vec<usize>], s: usize, t: usize) -> Vec<Vec<usize>> {
    let dist = bfs(adj, s);
    let Some(d) = dist[t] else { return Vec::new() };
    let mut out = Vec::new();
    let mut path = vec![s];
    fn walk(
        adj: &[Vec<usize>],
        dist: &[Option<usize>],
        t: usize,
        d: usize,
        path: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        let v = *path.last().unwrap();
        if v == t {
            out.push(path.clone());
            return;
        }
        for &w in &adj[v] {
            if dist[w] == Some(path.len()) && path.len() <= d {
                path.push(w);
                walk(adj, dist, t, d, path, out);
                path.pop();
            }
        }
    }
    walk(adj, &dist, t, d, &mut path, &mut out);
    out
}

/// Betweenness by listing every shortest path of every ordered pair.
pub fn brute_force_betweenness(g: &InteractionGraph) -> Vec<Ratio<i128>> {
    let n = g.n();
    let adj = g.neighbours();
    let mut c = vec![Ratio::from_integer(0i128); n];
    if n < 3 {
        return c;
    }
    for s in 0..n {
        for t in 0..n {
            if s == t {
                continue;
            }
            let paths = all_shortest_paths(&adj, s, t);
            if paths.is_empty() {
                continue;
            }
            let total = paths.len() as i128;
            for v in 0..n {
                if v == s || v == t {
                    continue;
                }
                let through = paths.iter().filter(|p| p.contains(&v)).count() as i128;
                c[v] += Ratio::new(through, total);
            }
        }
    }
    let norm = ((n - 1) * (n - 2)) as i128;
    c.into_iter().map(|x| x / norm).collect()
}

/// Exact Shapley values by averaging marginal contributions over all
/// feature orderings, with a caller-supplied value function.
pub fn permutation_shapley(m: usize, value: impl Fn(&[bool]) -> f64) -> Vec<f64> {
    let mut phi = vec![0.0; m];
    let mut perm: Vec<usize> = (0..m).collect();
    let mut count = 0usize;
    permute(&mut perm, 0, &mut |order| {
        count += 1;
        let mut s = vec![false; m];
        let mut prev = value(&s);
        for &f in order {
            s[f] = true;
            let now = value(&s);
            phi[f] += now - prev;
            prev = now;
        }
    });
    phi.iter_mut().for_each(|p| *p /= count as f64);
    phi
}

fn permute(items: &mut Vec<usize>, k: usize, visit: &mut dyn FnMut(&[usize])) {
    if k == items.len() {
        visit(items);
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permute(items, k + 1, visit);
        items.swap(k, i);
    }
}
