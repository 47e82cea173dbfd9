//! Learning interaction networks.
//!
//! Each layer is a co-membership relation (dormitory, learning team, ...):
//! two students are adjacent when they share a group. Layers are summed with
//! per-layer weights into one weighted graph, from which the three partner
//! features are derived:
//!
//! * degree centrality: weighted neighbour count, normalized by
//!   `(n - 1) * w_max`;
//! * betweenness centrality: Brandes accumulation over hop-count shortest
//!   paths of the binarized graph, normalized by `2 / ((n - 1)(n - 2))`;
//! * eigenvector centrality: dominant eigenvector of the weight matrix,
//!   unit Euclidean norm.

use std::collections::{BTreeMap, HashMap};
use std::ops::{Add, Div, Mul};

use num_rational::Ratio;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::data_model::Cohort;
use crate::error::{Error, Result};

pub const DEGREE_FEATURE: &str = "DgrCnt";
pub const BETWEENNESS_FEATURE: &str = "BtwnCnt";
pub const EIGENVECTOR_FEATURE: &str = "EgnCnt";

pub const EIGEN_TOLERANCE: f64 = 1e-10;
pub const EIGEN_MAX_ITERATIONS: usize = 10_000;

/// One 0-1 co-membership layer over `n` nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionLayer {
    pub name: String,
    group_of: Vec<usize>,
}

impl InteractionLayer {
    pub fn n(&self) -> usize {
        self.group_of.len()
    }

    pub fn adjacent(&self, i: usize, j: usize) -> bool {
        i != j && self.group_of[i] == self.group_of[j]
    }

    pub fn matrix(&self) -> Vec<Vec<u8>> {
        let n = self.n();
        (0..n)
            .map(|i| (0..n).map(|j| u8::from(self.adjacent(i, j))).collect())
            .collect()
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let n = self.n();
        let mut out = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if self.adjacent(i, j) {
                    out.push((i, j));
                }
            }
        }
        out
    }
}

/// Builds a layer from a node → group map covering every node below `n`.
pub fn build_layer<G: Ord + Clone>(
    name: &str,
    memberships: &BTreeMap<usize, G>,
    n: usize,
) -> Result<InteractionLayer> {
    if n == 0 {
        return Err(Error::Graph("layer must have at least one node".into()));
    }
    let mut group_ids: BTreeMap<G, usize> = BTreeMap::new();
    let mut group_of = Vec::with_capacity(n);
    for node in 0..n {
        let g = memberships
            .get(&node)
            .ok_or_else(|| Error::Graph(format!("node {node} has no membership in layer {name}")))?;
        let next = group_ids.len();
        group_of.push(*group_ids.entry(g.clone()).or_insert(next));
    }
    if let Some((&node, _)) = memberships.range(n..).next() {
        return Err(Error::Graph(format!("node {node} out of range for {n} nodes")));
    }
    Ok(InteractionLayer {
        name: name.to_string(),
        group_of,
    })
}

/// Weighted symmetric graph over the students of one grade group.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionGraph {
    pub node_ids: Vec<String>,
    weights: Vec<f64>,
}

impl InteractionGraph {
    /// Builds a graph from a dense symmetric matrix.
    pub fn from_matrix(node_ids: Vec<String>, matrix: &[Vec<f64>]) -> Result<Self> {
        let n = node_ids.len();
        if matrix.len() != n || matrix.iter().any(|r| r.len() != n) {
            return Err(Error::Graph(format!("weight matrix must be {n}x{n}")));
        }
        let mut weights = Vec::with_capacity(n * n);
        for (i, row) in matrix.iter().enumerate() {
            for (j, &w) in row.iter().enumerate() {
                if !(w.is_finite() && w >= 0.0) {
                    return Err(Error::Graph(format!("weight ({i},{j}) = {w} is not a finite non-negative number")));
                }
                if i == j && w != 0.0 {
                    return Err(Error::Graph(format!("diagonal entry ({i},{i}) must be zero")));
                }
                if w != matrix[j][i] {
                    return Err(Error::Graph(format!("matrix is not symmetric at ({i},{j})")));
                }
                weights.push(w);
            }
        }
        Ok(InteractionGraph { node_ids, weights })
    }

    pub fn n(&self) -> usize {
        self.node_ids.len()
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[i * self.n() + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.n();
        &self.weights[i * n..(i + 1) * n]
    }

    pub fn max_weight(&self) -> f64 {
        self.weights.iter().copied().fold(0.0, f64::max)
    }

    /// Neighbour lists of the binarized graph, ascending.
    pub fn neighbours(&self) -> Vec<Vec<usize>> {
        (0..self.n())
            .map(|i| {
                self.row(i)
                    .iter()
                    .enumerate()
                    .filter(|&(_, &w)| w > 0.0)
                    .map(|(j, _)| j)
                    .collect()
            })
            .collect()
    }

    /// Upper-triangle edges `(id_i, id_j, weight)` with positive weight.
    pub fn edge_list(&self) -> Vec<(String, String, f64)> {
        let n = self.n();
        let mut out = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let w = self.weight(i, j);
                if w > 0.0 {
                    out.push((self.node_ids[i].clone(), self.node_ids[j].clone(), w));
                }
            }
        }
        out
    }

    pub fn write_edge_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["id_i", "id_j", "weight"])?;
        for (a, b, weight) in self.edge_list() {
            w.write_record([a, b, format!("{weight}")])?;
        }
        w.flush().map_err(|e| Error::io("<edges>", e))?;
        Ok(())
    }
}

/// Sums weighted layers into one graph.
pub fn synthesize(
    node_ids: Vec<String>,
    layers: &[InteractionLayer],
    layer_weights: &[f64],
) -> Result<InteractionGraph> {
    let n = node_ids.len();
    if layers.len() != layer_weights.len() {
        return Err(Error::Graph(format!(
            "{} layers but {} layer weights",
            layers.len(),
            layer_weights.len()
        )));
    }
    if let Some(w) = layer_weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
        return Err(Error::Graph(format!("layer weight {w} must be positive")));
    }
    let mut weights = vec![0.0; n * n];
    for (layer, &lw) in layers.iter().zip(layer_weights) {
        if layer.n() != n {
            return Err(Error::Graph(format!(
                "layer {} has {} nodes, expected {n}",
                layer.name,
                layer.n()
            )));
        }
        for (i, j) in layer.edges() {
            weights[i * n + j] += lw;
            weights[j * n + i] += lw;
        }
    }
    Ok(InteractionGraph { node_ids, weights })
}

/// Layer as stored in the layers JSON file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerDef {
    pub layer_name: String,
    pub weight: f64,
    pub groups: BTreeMap<String, Vec<String>>,
}

impl LayerDef {
    /// Resolves the layer against the cohort's id order. Students that
    /// appear in no group become singletons.
    pub fn to_layer(&self, node_ids: &[String]) -> Result<InteractionLayer> {
        let index: HashMap<&str, usize> = node_ids
            .iter()
            .enumerate()
            .map(|(i, id)| (id.as_str(), i))
            .collect();
        let mut membership: BTreeMap<usize, String> = BTreeMap::new();
        for (group, members) in &self.groups {
            for id in members {
                let &node = index.get(id.as_str()).ok_or_else(|| {
                    Error::Graph(format!("layer {}: unknown student {id}", self.layer_name))
                })?;
                if membership.insert(node, format!("g:{group}")).is_some() {
                    return Err(Error::Graph(format!(
                        "layer {}: student {id} belongs to more than one group",
                        self.layer_name
                    )));
                }
            }
        }
        for (node, id) in node_ids.iter().enumerate() {
            membership
                .entry(node)
                .or_insert_with(|| format!("solo:{id}"));
        }
        build_layer(&self.layer_name, &membership, node_ids.len())
    }
}

pub fn graph_from_defs(defs: &[LayerDef], node_ids: &[String]) -> Result<InteractionGraph> {
    let layers = defs
        .iter()
        .map(|d| d.to_layer(node_ids))
        .collect::<Result<Vec<_>>>()?;
    let weights: Vec<f64> = defs.iter().map(|d| d.weight).collect();
    synthesize(node_ids.to_vec(), &layers, &weights)
}

pub fn degree_centrality(g: &InteractionGraph) -> Result<Vec<f64>> {
    let n = g.n();
    if n < 2 {
        return Err(Error::Graph("degree centrality needs at least 2 nodes".into()));
    }
    let w_max = g.max_weight();
    if w_max == 0.0 {
        return Ok(vec![0.0; n]);
    }
    Ok((0..n)
        .map(|v| {
            let s: f64 = g.row(v).iter().map(|w| w / w_max).sum();
            (s / (n - 1) as f64).min(1.0)
        })
        .collect())
}

/// Arithmetic needed by the Brandes accumulation; implemented for `f64`
/// and exact rationals.
pub trait PathScalar:
    Clone + Zero + One + Add<Output = Self> + Mul<Output = Self> + Div<Output = Self>
{
    fn from_count(c: u64) -> Self;
}

impl PathScalar for f64 {
    fn from_count(c: u64) -> Self {
        c as f64
    }
}

impl PathScalar for Ratio<i128> {
    fn from_count(c: u64) -> Self {
        Ratio::from_integer(i128::from(c))
    }
}

/// Normalized betweenness over unweighted shortest paths, generic in the
/// scalar type.
pub fn brandes_betweenness<T: PathScalar>(neighbours: &[Vec<usize>]) -> Vec<T> {
    let n = neighbours.len();
    let mut centrality = vec![T::zero(); n];
    if n < 3 {
        return centrality;
    }
    let mut stack = Vec::with_capacity(n);
    let mut queue = std::collections::VecDeque::with_capacity(n);
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut sigma = vec![T::zero(); n];
    let mut dist = vec![usize::MAX; n];
    let mut delta = vec![T::zero(); n];
    for s in 0..n {
        stack.clear();
        for v in 0..n {
            preds[v].clear();
            sigma[v] = T::zero();
            dist[v] = usize::MAX;
            delta[v] = T::zero();
        }
        sigma[s] = T::one();
        dist[s] = 0;
        queue.push_back(s);
        while let Some(v) = queue.pop_front() {
            stack.push(v);
            for &w in &neighbours[v] {
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
                if dist[w] == dist[v] + 1 {
                    sigma[w] = sigma[w].clone() + sigma[v].clone();
                    preds[w].push(v);
                }
            }
        }
        while let Some(w) = stack.pop() {
            let coeff = (T::one() + delta[w].clone()) / sigma[w].clone();
            for &v in &preds[w] {
                delta[v] = delta[v].clone() + sigma[v].clone() * coeff.clone();
            }
            if w != s {
                centrality[w] = centrality[w].clone() + delta[w].clone();
            }
        }
    }
    // every unordered pair was counted from both endpoints
    let norm = T::from_count(((n - 1) * (n - 2)) as u64);
    centrality.into_iter().map(|c| c / norm.clone()).collect()
}

pub fn betweenness_centrality(g: &InteractionGraph) -> Vec<f64> {
    brandes_betweenness::<f64>(&g.neighbours())
}

/// Betweenness in exact rational arithmetic, for small graphs.
pub fn betweenness_centrality_exact(g: &InteractionGraph) -> Vec<Ratio<i128>> {
    brandes_betweenness::<Ratio<i128>>(&g.neighbours())
}

/// Dominant eigenvector of the weight matrix by power iteration.
///
/// Iterates on `W / w_max + I`: the shift leaves the eigenvectors unchanged
/// and keeps bipartite graphs from oscillating between `±λ`.
pub fn eigenvector_centrality(g: &InteractionGraph) -> Result<Vec<f64>> {
    let n = g.n();
    let w_max = g.max_weight();
    if n == 0 || w_max == 0.0 {
        return Err(Error::Graph(
            "eigenvector centrality needs at least one positive weight".into(),
        ));
    }
    let scaled: Vec<f64> = g.weights.iter().map(|w| w / w_max).collect();
    let mut v = vec![1.0 / (n as f64).sqrt(); n];
    let mut next = vec![0.0; n];
    let mut delta = f64::INFINITY;
    for _ in 0..EIGEN_MAX_ITERATIONS {
        for (i, out) in next.iter_mut().enumerate() {
            let row = &scaled[i * n..(i + 1) * n];
            *out = v[i] + row.iter().zip(&v).map(|(w, x)| w * x).sum::<f64>();
        }
        let norm = next.iter().map(|x| x * x).sum::<f64>().sqrt();
        next.iter_mut().for_each(|x| *x /= norm);
        delta = next
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        std::mem::swap(&mut v, &mut next);
        if delta < EIGEN_TOLERANCE {
            return Ok(v.into_iter().map(|x| x.abs().min(1.0)).collect());
        }
    }
    Err(Error::NoConvergence {
        iterations: EIGEN_MAX_ITERATIONS,
        last_delta: delta,
        last_iterate: v,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CentralityTriple {
    pub dgr: f64,
    pub btwn: f64,
    pub egn: f64,
}

pub fn centralities(g: &InteractionGraph) -> Result<Vec<CentralityTriple>> {
    let dgr = degree_centrality(g)?;
    let btwn = betweenness_centrality(g);
    let egn = eigenvector_centrality(g)?;
    Ok(dgr
        .into_iter()
        .zip(btwn)
        .zip(egn)
        .map(|((dgr, btwn), egn)| CentralityTriple { dgr, btwn, egn })
        .collect())
}

/// Fills the cohort's DgrCnt/BtwnCnt/EgnCnt columns from the graph.
pub fn attach_centrality_features(cohort: &Cohort, g: &InteractionGraph) -> Result<Cohort> {
    let index: HashMap<&str, usize> = g
        .node_ids
        .iter()
        .enumerate()
        .map(|(i, id)| (id.as_str(), i))
        .collect();
    let mut unmatched: Vec<&str> = cohort
        .rows
        .iter()
        .map(|r| r.student_id.as_str())
        .filter(|id| !index.contains_key(id))
        .collect();
    if cohort.len() != g.n() || !unmatched.is_empty() {
        let ids: std::collections::HashSet<&str> =
            cohort.rows.iter().map(|r| r.student_id.as_str()).collect();
        unmatched.extend(g.node_ids.iter().map(String::as_str).filter(|id| !ids.contains(id)));
        return Err(Error::Graph(format!(
            "graph nodes and cohort rows do not match; unmatched ids: {}",
            unmatched.join(", ")
        )));
    }
    let triples = centralities(g)?;
    let column = |name: &str| {
        cohort
            .schema
            .active_index(name)
            .ok_or_else(|| Error::Schema(format!("cohort has no active {name} column")))
    };
    let (cd, cb, ce) = (
        column(DEGREE_FEATURE)?,
        column(BETWEENNESS_FEATURE)?,
        column(EIGENVECTOR_FEATURE)?,
    );
    let mut out = cohort.clone();
    for row in &mut out.rows {
        let t = triples[index[row.student_id.as_str()]];
        row.features[cd] = t.dgr;
        row.features[cb] = t.btwn;
        row.features[ce] = t.egn;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("n{i}")).collect()
    }

    fn from_edges(n: usize, edges: &[(usize, usize)]) -> InteractionGraph {
        let mut m = vec![vec![0.0; n]; n];
        for &(a, b) in edges {
            m[a][b] = 1.0;
            m[b][a] = 1.0;
        }
        InteractionGraph::from_matrix(ids(n), &m).unwrap()
    }

    fn groups(pairs: &[(usize, &str)]) -> BTreeMap<usize, String> {
        pairs.iter().map(|&(n, g)| (n, g.to_string())).collect()
    }

    #[test]
    fn layer_edges() {
        let l = build_layer("dorm", &groups(&[(0, "A"), (1, "A"), (2, "B"), (3, "B")]), 4).unwrap();
        assert_eq!(l.edges(), vec![(0, 1), (2, 3)]);
        let k3 = build_layer("t", &groups(&[(0, "A"), (1, "A"), (2, "A")]), 3).unwrap();
        assert_eq!(k3.edges(), vec![(0, 1), (0, 2), (1, 2)]);
        let m = k3.matrix();
        for i in 0..3 {
            assert_eq!(m[i][i], 0);
        }
        assert!(build_layer("x", &groups(&[]), 0).is_err());
        assert!(build_layer("x", &groups(&[(0, "A")]), 2).is_err());
    }

    #[test]
    fn dormitory_layer_is_block_diagonal() {
        let m: BTreeMap<usize, usize> = (0..96).map(|i| (i, i / 4)).collect();
        let l = build_layer("dorm", &m, 96).unwrap();
        let a = l.matrix();
        for i in 0..96 {
            for j in 0..96 {
                assert_eq!(a[i][j] == 1, i != j && i / 4 == j / 4);
            }
        }
    }

    #[test]
    fn synthesize_weights() {
        let k3 = build_layer("t", &groups(&[(0, "A"), (1, "A"), (2, "A")]), 3).unwrap();
        let g = synthesize(ids(3), &[k3.clone()], &[1.0]).unwrap();
        assert_eq!(g.weight(0, 1), 1.0);
        let g2 = synthesize(ids(3), &[k3.clone(), k3.clone()], &[1.0, 1.0]).unwrap();
        assert_eq!(g2.weight(1, 2), 2.0);
        assert!(synthesize(ids(3), &[k3.clone()], &[0.0]).is_err());
        assert!(synthesize(ids(3), &[k3.clone()], &[1.0, 2.0]).is_err());
        assert!(synthesize(ids(4), &[k3], &[1.0]).is_err());
    }

    #[test]
    fn six_node_fixture_counts_shared_contexts() {
        // five unit-weight layers over six students
        let layers: Vec<[&str; 6]> = vec![
            ["a", "a", "a", "b", "b", "b"],
            ["x", "x", "y", "y", "z", "z"],
            ["p", "q", "p", "q", "p", "q"],
            ["m", "m", "m", "m", "n", "o"],
            ["s", "t", "u", "v", "w", "s"],
        ];
        let built: Vec<InteractionLayer> = layers
            .iter()
            .map(|l| {
                let m: BTreeMap<usize, &str> = l.iter().copied().enumerate().collect();
                build_layer("l", &m, 6).unwrap()
            })
            .collect();
        let g = synthesize(ids(6), &built, &[1.0; 5]).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                let shared = if i == j {
                    0
                } else {
                    layers.iter().filter(|l| l[i] == l[j]).count()
                };
                assert_eq!(g.weight(i, j), shared as f64, "({i},{j})");
            }
        }
        // degree: direct summation of normalized weights
        let w_max = 3.0; // pair (0,2): layers 0, 2, 3
        assert_eq!(g.max_weight(), w_max);
        let dgr = degree_centrality(&g).unwrap();
        for i in 0..6 {
            let expected = (0..6).map(|j| g.weight(i, j) / w_max).sum::<f64>() / 5.0;
            assert!((dgr[i] - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn degree_closed_forms() {
        let k3 = from_edges(3, &[(0, 1), (0, 2), (1, 2)]);
        assert_eq!(degree_centrality(&k3).unwrap(), vec![1.0; 3]);
        let star = from_edges(4, &[(0, 1), (0, 2), (0, 3)]);
        let d = degree_centrality(&star).unwrap();
        assert_eq!(d[0], 1.0);
        for &leaf in &d[1..] {
            assert!((leaf - 1.0 / 3.0).abs() < 1e-15);
        }
        let empty = from_edges(3, &[]);
        assert_eq!(degree_centrality(&empty).unwrap(), vec![0.0; 3]);
        assert!(degree_centrality(&from_edges(1, &[])).is_err());
    }

    #[test]
    fn betweenness_closed_forms() {
        let path = from_edges(3, &[(0, 1), (1, 2)]);
        assert_eq!(betweenness_centrality(&path), vec![0.0, 1.0, 0.0]);
        let k4 = from_edges(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]);
        assert_eq!(betweenness_centrality(&k4), vec![0.0; 4]);
        let star = from_edges(4, &[(0, 1), (0, 2), (0, 3)]);
        assert_eq!(betweenness_centrality(&star), vec![1.0, 0.0, 0.0, 0.0]);
        assert_eq!(betweenness_centrality(&from_edges(2, &[(0, 1)])), vec![0.0; 2]);
    }

    #[test]
    fn betweenness_ignores_weights() {
        let mut m = vec![vec![0.0; 3]; 3];
        m[0][1] = 5.0;
        m[1][0] = 5.0;
        m[1][2] = 0.5;
        m[2][1] = 0.5;
        let g = InteractionGraph::from_matrix(ids(3), &m).unwrap();
        assert_eq!(betweenness_centrality(&g), vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn eigenvector_closed_forms() {
        let k3 = from_edges(3, &[(0, 1), (0, 2), (1, 2)]);
        for v in eigenvector_centrality(&k3).unwrap() {
            assert!((v - 1.0 / 3f64.sqrt()).abs() < 1e-9);
        }
        let path = from_edges(3, &[(0, 1), (1, 2)]);
        let v = eigenvector_centrality(&path).unwrap();
        assert!((v[0] - 0.5).abs() < 1e-9);
        assert!((v[1] - 0.5f64.sqrt()).abs() < 1e-9);
        assert!((v[2] - 0.5).abs() < 1e-9);
        assert!(eigenvector_centrality(&from_edges(3, &[])).is_err());
    }

    #[test]
    fn layer_defs_resolve_singletons() {
        let node_ids = ids(4);
        let def = LayerDef {
            layer_name: "team".into(),
            weight: 2.0,
            groups: [("t1".to_string(), vec!["n0".to_string(), "n2".to_string()])]
                .into_iter()
                .collect(),
        };
        let g = graph_from_defs(&[def.clone()], &node_ids).unwrap();
        assert_eq!(g.weight(0, 2), 2.0);
        assert_eq!(g.edge_list().len(), 1);
        let mut dup = def.clone();
        dup.groups.insert("t2".into(), vec!["n0".into()]);
        assert!(graph_from_defs(&[dup], &node_ids).is_err());
        let mut unknown = def;
        unknown.groups.insert("t3".into(), vec!["zz".into()]);
        assert!(graph_from_defs(&[unknown], &node_ids).is_err());
    }

    #[test]
    fn edge_csv_export() {
        let g = from_edges(3, &[(0, 1), (1, 2)]);
        let mut buf = Vec::new();
        g.write_edge_csv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "id_i,id_j,weight\nn0,n1,1\nn1,n2,1\n"
        );
    }
}
