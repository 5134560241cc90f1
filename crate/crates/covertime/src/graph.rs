//! Graph representation, degree bookkeeping, exact cut conductance, and the
//! generator families used throughout the test and acceptance suites.
//!
//! Graphs are undirected, simple, connected, and use dense 0-based vertex
//! ids. Laziness is a property of the walk, not the graph: no self loops are
//! stored here, so conductance is always evaluated on the simple graph.

use crate::error::{Error, Result};
use crate::rng::substream;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::Write as _;

/// Undirected simple connected graph over vertices `0..n`.
#[derive(Debug, Clone)]
pub struct Graph {
    n: usize,
    m: usize,
    degrees: Vec<u32>,
    neighbors: Vec<Vec<u32>>,
    adj: Vec<bool>,
}

/// Certified minimum-degree ratio `min_v deg(v) / n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityWitness {
    pub theta: f64,
}

/// A vertex cut together with its exact conductance.
///
/// The stored side always satisfies the normalization `0 < d(S) <= m`; a
/// subset with more than half the degree mass is replaced by its complement,
/// which leaves the conductance value unchanged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cut {
    /// Sorted vertex ids of the normalized side.
    pub s: Vec<u32>,
    pub crossing_edges: usize,
    /// `e(S, S-bar) * d(V) / (d(S) * d(S-bar))`.
    pub conductance: f64,
    pub degree_s: usize,
    pub degree_total: usize,
}

impl Cut {
    /// Exact conductance comparison via integer cross-multiplication.
    pub fn cmp_conductance(&self, other: &Cut) -> std::cmp::Ordering {
        let lhs = self.crossing_edges as u128
            * (other.degree_s as u128)
            * ((other.degree_total - other.degree_s) as u128);
        let rhs = other.crossing_edges as u128
            * (self.degree_s as u128)
            * ((self.degree_total - self.degree_s) as u128);
        lhs.cmp(&rhs)
    }
}

impl Graph {
    /// Builds a graph from an edge list over vertices `0..n`.
    ///
    /// Duplicate edges are collapsed. Fails on self loops, out-of-range
    /// endpoints, `n < 2`, or a disconnected result.
    pub fn from_edges(n: usize, edges: &[(u32, u32)]) -> Result<Graph> {
        if n < 2 {
            return Err(Error::InvalidGraph(format!("need at least 2 vertices, got {n}")));
        }
        let mut adj = vec![false; n * n];
        for &(u, v) in edges {
            let (u, v) = (u as usize, v as usize);
            if u >= n || v >= n {
                return Err(Error::InvalidGraph(format!(
                    "edge ({u}, {v}) out of range for n = {n}"
                )));
            }
            if u == v {
                return Err(Error::InvalidGraph(format!("self loop at vertex {u}")));
            }
            adj[u * n + v] = true;
            adj[v * n + u] = true;
        }
        let mut neighbors = vec![Vec::new(); n];
        let mut degrees = vec![0u32; n];
        let mut m = 0usize;
        for u in 0..n {
            for v in 0..n {
                if adj[u * n + v] {
                    neighbors[u].push(v as u32);
                }
            }
            degrees[u] = neighbors[u].len() as u32;
            m += neighbors[u].len();
        }
        m /= 2;
        let g = Graph { n, m, degrees, neighbors, adj };
        if !g.is_connected() {
            return Err(Error::Disconnected);
        }
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn degree(&self, v: u32) -> usize {
        self.degrees[v as usize] as usize
    }

    pub fn degrees(&self) -> &[u32] {
        &self.degrees
    }

    pub fn neighbors(&self, v: u32) -> &[u32] {
        &self.neighbors[v as usize]
    }

    pub fn has_edge(&self, u: u32, v: u32) -> bool {
        self.adj[u as usize * self.n + v as usize]
    }

    pub fn edges(&self) -> Vec<(u32, u32)> {
        let mut out = Vec::with_capacity(self.m);
        for u in 0..self.n as u32 {
            for &v in self.neighbors(u) {
                if u < v {
                    out.push((u, v));
                }
            }
        }
        out
    }

    fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.n];
        let mut queue = std::collections::VecDeque::from([0u32]);
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = queue.pop_front() {
            for &v in self.neighbors(u) {
                if !seen[v as usize] {
                    seen[v as usize] = true;
                    count += 1;
                    queue.push_back(v);
                }
            }
        }
        count == self.n
    }

    /// Whether the subgraph induced by `subset` is connected (and nonempty).
    pub fn is_connected_subset(&self, subset: &[u32]) -> bool {
        if subset.is_empty() {
            return false;
        }
        let mut member = vec![false; self.n];
        for &v in subset {
            member[v as usize] = true;
        }
        let mut seen = vec![false; self.n];
        let mut queue = std::collections::VecDeque::from([subset[0]]);
        seen[subset[0] as usize] = true;
        let mut count = 1;
        while let Some(u) = queue.pop_front() {
            for &v in self.neighbors(u) {
                if member[v as usize] && !seen[v as usize] {
                    seen[v as usize] = true;
                    count += 1;
                    queue.push_back(v);
                }
            }
        }
        count == subset.len()
    }

    /// Stationary distribution of the simple random walk, `pi_v = d_v / 2m`.
    pub fn stationary(&self) -> Vec<f64> {
        let two_m = (2 * self.m) as f64;
        self.degrees.iter().map(|&d| d as f64 / two_m).collect()
    }

    pub fn min_degree_ratio(&self) -> DensityWitness {
        let min_deg = *self.degrees.iter().min().expect("nonempty") as f64;
        DensityWitness { theta: min_deg / self.n as f64 }
    }

    /// Total degree of a vertex subset.
    pub fn degree_of(&self, subset: &[u32]) -> usize {
        subset.iter().map(|&v| self.degree(v)).sum()
    }

    /// Number of edges between `subset` and its complement.
    pub fn crossing_edges(&self, subset: &[u32]) -> usize {
        let mut member = vec![false; self.n];
        for &v in subset {
            member[v as usize] = true;
        }
        let mut cross = 0;
        for &v in subset {
            for &w in self.neighbors(v) {
                if !member[w as usize] {
                    cross += 1;
                }
            }
        }
        cross
    }

    /// Exact conductance of the cut `(S : S-bar)`.
    pub fn cut_conductance(&self, subset: &[u32]) -> Result<Cut> {
        if subset.is_empty() {
            return Err(Error::InvalidCut("empty subset".into()));
        }
        let mut member = vec![false; self.n];
        let mut size = 0usize;
        for &v in subset {
            if v as usize >= self.n {
                return Err(Error::InvalidCut(format!("vertex {v} out of range")));
            }
            if !member[v as usize] {
                member[v as usize] = true;
                size += 1;
            }
        }
        if size == self.n {
            return Err(Error::InvalidCut("subset is the full vertex set".into()));
        }
        let total = 2 * self.m;
        let mut d_s = 0usize;
        let mut cross = 0usize;
        for v in 0..self.n as u32 {
            if member[v as usize] {
                d_s += self.degree(v);
                for &w in self.neighbors(v) {
                    if !member[w as usize] {
                        cross += 1;
                    }
                }
            }
        }
        // Normalize to the side with d(S) <= m; the value is symmetric.
        let side: Vec<u32> = if d_s > self.m {
            d_s = total - d_s;
            (0..self.n as u32).filter(|&v| !member[v as usize]).collect()
        } else {
            (0..self.n as u32).filter(|&v| member[v as usize]).collect()
        };
        let conductance = cross as f64 * total as f64 / (d_s as f64 * (total - d_s) as f64);
        Ok(Cut {
            s: side,
            crossing_edges: cross,
            conductance,
            degree_s: d_s,
            degree_total: total,
        })
    }

    /// Induced subgraph on `block` plus the map from new ids to original ids.
    ///
    /// Fails with [`Error::Disconnected`] when the induced subgraph is not
    /// connected.
    pub fn induced(&self, block: &[u32]) -> Result<(Graph, Vec<u32>)> {
        let mut ids: Vec<u32> = block.to_vec();
        ids.sort_unstable();
        ids.dedup();
        let mut back = vec![u32::MAX; self.n];
        for (new, &old) in ids.iter().enumerate() {
            back[old as usize] = new as u32;
        }
        let mut edges = Vec::new();
        for &u in &ids {
            for &v in self.neighbors(u) {
                if u < v && back[v as usize] != u32::MAX {
                    edges.push((back[u as usize], back[v as usize]));
                }
            }
        }
        let g = Graph::from_edges(ids.len(), &edges)?;
        Ok((g, ids))
    }
}

/// Generator families for the test corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Family {
    /// Complete graph `K_n`.
    Complete { n: usize },
    /// Circulant graph: vertex `i` adjacent to `i +- k (mod n)` for
    /// `k = 1..=degree/2`, plus the diameter offset when `degree` is odd
    /// (requires even `n`). Regular of the given degree.
    RegularCirculant { n: usize, degree: usize },
    /// Two cliques of size `n/2` joined by `bridges` crossing edges spread
    /// over the diagonals, so cross-degrees stay balanced.
    Dumbbell { n: usize, bridges: usize },
    /// `G(n, p)` resampled until connected with minimum degree at least
    /// `theta * n`. Deterministic for a fixed seed.
    DenseRandom { n: usize, p: f64, theta: f64, seed: u64 },
}

/// Builds a graph from a family description.
pub fn generate(family: &Family) -> Result<Graph> {
    match *family {
        Family::Complete { n } => {
            let mut edges = Vec::new();
            for u in 0..n as u32 {
                for v in (u + 1)..n as u32 {
                    edges.push((u, v));
                }
            }
            Graph::from_edges(n, &edges)
        }
        Family::RegularCirculant { n, degree } => {
            if degree == 0 || degree >= n {
                return Err(Error::InvalidGraph(format!(
                    "circulant degree {degree} not in 1..{n}"
                )));
            }
            if degree % 2 == 1 && n % 2 == 1 {
                return Err(Error::InvalidGraph(
                    "odd circulant degree requires even n".into(),
                ));
            }
            let mut edges = Vec::new();
            for i in 0..n {
                for k in 1..=(degree / 2) {
                    edges.push((i as u32, ((i + k) % n) as u32));
                }
                if degree % 2 == 1 {
                    let j = (i + n / 2) % n;
                    if i < j {
                        edges.push((i as u32, j as u32));
                    }
                }
            }
            Graph::from_edges(n, &edges)
        }
        Family::Dumbbell { n, bridges } => {
            if n < 4 || n % 2 != 0 {
                return Err(Error::InvalidGraph(format!(
                    "dumbbell needs even n >= 4, got {n}"
                )));
            }
            let half = n / 2;
            if bridges == 0 || bridges > half * half {
                return Err(Error::InvalidGraph(format!(
                    "dumbbell bridge count {bridges} not in 1..={}",
                    half * half
                )));
            }
            let mut edges = Vec::new();
            for side in 0..2u32 {
                let off = side * half as u32;
                for u in 0..half as u32 {
                    for v in (u + 1)..half as u32 {
                        edges.push((off + u, off + v));
                    }
                }
            }
            // Diagonal d contributes edges (i, half + (i + d) mod half), so every
            // full diagonal raises each vertex's cross-degree by exactly one.
            for k in 0..bridges {
                let diag = k / half;
                let i = k % half;
                edges.push((i as u32, (half + (i + diag) % half) as u32));
            }
            Graph::from_edges(n, &edges)
        }
        Family::DenseRandom { n, p, theta, seed } => {
            if !(0.0 < p && p <= 1.0) {
                return Err(Error::InvalidGraph(format!("p = {p} not in (0, 1]")));
            }
            if !(0.0 < theta && theta < 1.0) {
                return Err(Error::InvalidGraph(format!("theta = {theta} not in (0, 1)")));
            }
            let floor = (theta * n as f64).ceil() as usize;
            const MAX_ATTEMPTS: u64 = 2000;
            for attempt in 0..MAX_ATTEMPTS {
                let mut rng = substream(seed, attempt);
                let mut edges = Vec::new();
                for u in 0..n as u32 {
                    for v in (u + 1)..n as u32 {
                        if rng.random_bool(p) {
                            edges.push((u, v));
                        }
                    }
                }
                match Graph::from_edges(n, &edges) {
                    Ok(g) if g.degrees().iter().all(|&d| d as usize >= floor) => {
                        return Ok(g);
                    }
                    _ => continue,
                }
            }
            Err(Error::InvalidGraph(format!(
                "dense_random(n={n}, p={p}) failed to reach min degree {floor} in {MAX_ATTEMPTS} attempts"
            )))
        }
    }
}

/// Graph read from an edge list, with the original vertex labels retained.
#[derive(Debug, Clone)]
pub struct LabeledGraph {
    pub graph: Graph,
    /// Original label of each internal vertex id.
    pub labels: Vec<String>,
}

/// Parses the `u v` edge-list text format.
///
/// One whitespace-separated pair per line; `#` starts a comment. Labels may
/// be arbitrary tokens and are remapped to dense 0-based ids (numeric order
/// when every label is an unsigned integer, lexicographic otherwise).
pub fn parse_edge_list(text: &str) -> Result<LabeledGraph> {
    let mut raw_edges: Vec<(String, String)> = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = content.split_whitespace().collect();
        if tokens.len() != 2 {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected `u v`, got {} tokens", tokens.len()),
            });
        }
        if tokens[0] == tokens[1] {
            return Err(Error::Parse {
                line: line_no,
                message: format!("self loop at `{}`", tokens[0]),
            });
        }
        raw_edges.push((tokens[0].to_string(), tokens[1].to_string()));
    }
    if raw_edges.is_empty() {
        return Err(Error::Parse { line: 0, message: "no edges in input".into() });
    }
    let mut labels: Vec<String> = raw_edges
        .iter()
        .flat_map(|(u, v)| [u.clone(), v.clone()])
        .collect();
    labels.sort_unstable();
    labels.dedup();
    if labels.iter().all(|l| l.parse::<u64>().is_ok()) {
        labels.sort_by_key(|l| l.parse::<u64>().expect("checked"));
    }
    let index: BTreeMap<&str, u32> = labels
        .iter()
        .enumerate()
        .map(|(i, l)| (l.as_str(), i as u32))
        .collect();
    let edges: Vec<(u32, u32)> = raw_edges
        .iter()
        .map(|(u, v)| (index[u.as_str()], index[v.as_str()]))
        .collect();
    let graph = Graph::from_edges(labels.len(), &edges)?;
    Ok(LabeledGraph { graph, labels })
}

/// Writes the canonical edge-list form: `u v` with `u < v`, sorted.
pub fn write_edge_list(g: &Graph) -> String {
    let mut out = String::new();
    for (u, v) in g.edges() {
        writeln!(out, "{u} {v}").expect("string write");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path3() -> Graph {
        Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap()
    }

    #[test]
    fn stationary_triangle_is_uniform() {
        let g = generate(&Family::Complete { n: 3 }).unwrap();
        for pi in g.stationary() {
            assert!((pi - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn stationary_regular_is_uniform() {
        let g = generate(&Family::RegularCirculant { n: 10, degree: 4 }).unwrap();
        for pi in g.stationary() {
            assert!((pi - 0.1).abs() < 1e-15);
        }
    }

    #[test]
    fn stationary_path_matches_hand_computation() {
        let pi = path3().stationary();
        assert_eq!(pi, vec![0.25, 0.5, 0.25]);
    }

    #[test]
    fn stationary_sums_to_one() {
        let g = generate(&Family::Dumbbell { n: 12, bridges: 3 }).unwrap();
        let total: f64 = g.stationary().iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn complete_graph_cut_conductance_closed_form() {
        for n in 4..=8usize {
            let g = generate(&Family::Complete { n }).unwrap();
            let expect = n as f64 / (n as f64 - 1.0);
            for k in 1..n {
                let s: Vec<u32> = (0..k as u32).collect();
                let cut = g.cut_conductance(&s).unwrap();
                assert!(
                    (cut.conductance - expect).abs() < 1e-12,
                    "n={n} k={k}: {} vs {expect}",
                    cut.conductance
                );
            }
        }
    }

    #[test]
    fn single_vertex_in_k4() {
        let g = generate(&Family::Complete { n: 4 }).unwrap();
        let cut = g.cut_conductance(&[2]).unwrap();
        assert!((cut.conductance - 4.0 / 3.0).abs() < 1e-15);
        assert_eq!(cut.crossing_edges, 3);
    }

    #[test]
    fn two_k4_one_bridge() {
        let g = generate(&Family::Dumbbell { n: 8, bridges: 1 }).unwrap();
        let cut = g.cut_conductance(&[0, 1, 2, 3]).unwrap();
        assert_eq!(cut.crossing_edges, 1);
        assert_eq!(cut.degree_s, 13);
        assert!((cut.conductance - 26.0 / 169.0).abs() < 1e-15);
    }

    #[test]
    fn cut_normalizes_heavy_side() {
        let g = generate(&Family::Complete { n: 6 }).unwrap();
        let cut = g.cut_conductance(&[0, 1, 2, 3, 4]).unwrap();
        assert_eq!(cut.s, vec![5]);
        assert!(cut.degree_s <= g.m());
    }

    #[test]
    fn invalid_cuts_rejected() {
        let g = generate(&Family::Complete { n: 4 }).unwrap();
        assert!(matches!(g.cut_conductance(&[]), Err(Error::InvalidCut(_))));
        assert!(matches!(g.cut_conductance(&[0, 1, 2, 3]), Err(Error::InvalidCut(_))));
    }

    #[test]
    fn min_degree_ratio_families() {
        let k9 = generate(&Family::Complete { n: 9 }).unwrap();
        assert!((k9.min_degree_ratio().theta - 8.0 / 9.0).abs() < 1e-15);

        let circ = generate(&Family::RegularCirculant { n: 10, degree: 4 }).unwrap();
        assert!((circ.min_degree_ratio().theta - 0.4).abs() < 1e-15);

        // Perfect matching between the cliques: every vertex gains one
        // crossing edge, so theta = ((n/2 - 1) + 1)/n = 1/2.
        let db = generate(&Family::Dumbbell { n: 10, bridges: 5 }).unwrap();
        assert!((db.min_degree_ratio().theta - 0.5).abs() < 1e-15);
    }

    #[test]
    fn dumbbell_10_1_shape() {
        let g = generate(&Family::Dumbbell { n: 10, bridges: 1 }).unwrap();
        assert_eq!(g.m(), 21);
        assert!((g.min_degree_ratio().theta - 0.4).abs() < 1e-15);
        assert!(g.has_edge(0, 5));
        assert_eq!(g.crossing_edges(&[0, 1, 2, 3, 4]), 1);
    }

    #[test]
    fn dense_random_respects_floor_and_seed() {
        let fam = Family::DenseRandom { n: 50, p: 0.6, theta: 0.5, seed: 11 };
        let a = generate(&fam).unwrap();
        let b = generate(&fam).unwrap();
        assert_eq!(a.edges(), b.edges());
        assert!(a.degrees().iter().all(|&d| d >= 25));
        let c = generate(&Family::DenseRandom { n: 50, p: 0.6, theta: 0.5, seed: 12 }).unwrap();
        assert_ne!(a.edges(), c.edges());
    }

    #[test]
    fn generator_parameter_errors() {
        assert!(generate(&Family::Dumbbell { n: 9, bridges: 1 }).is_err());
        assert!(generate(&Family::Dumbbell { n: 8, bridges: 0 }).is_err());
        assert!(generate(&Family::Dumbbell { n: 8, bridges: 17 }).is_err());
        assert!(generate(&Family::RegularCirculant { n: 9, degree: 3 }).is_err());
        assert!(generate(&Family::Complete { n: 1 }).is_err());
    }

    #[test]
    fn disconnected_input_rejected() {
        let err = Graph::from_edges(4, &[(0, 1), (2, 3)]).unwrap_err();
        assert!(matches!(err, Error::Disconnected));
    }

    #[test]
    fn edge_list_round_trip() {
        let g = generate(&Family::Dumbbell { n: 12, bridges: 2 }).unwrap();
        let text = write_edge_list(&g);
        let parsed = parse_edge_list(&text).unwrap();
        assert_eq!(parsed.graph.edges(), g.edges());
        assert_eq!(parsed.labels[3], "3");
    }

    #[test]
    fn edge_list_arbitrary_labels() {
        let parsed = parse_edge_list("alice bob\nbob carol # comment\n\n# full comment\n").unwrap();
        assert_eq!(parsed.labels, vec!["alice", "bob", "carol"]);
        assert_eq!(parsed.graph.degree(1), 2);
    }

    #[test]
    fn edge_list_numeric_labels_sort_numerically() {
        let parsed = parse_edge_list("10 2\n2 1\n1 10\n").unwrap();
        assert_eq!(parsed.labels, vec!["1", "2", "10"]);
    }

    #[test]
    fn edge_list_parse_errors_carry_line_numbers() {
        match parse_edge_list("0 1\na b c\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
        match parse_edge_list("0 1\n3 3\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected self-loop error, got {other:?}"),
        }
    }

    #[test]
    fn induced_subgraph_maps_ids() {
        let g = generate(&Family::Dumbbell { n: 10, bridges: 1 }).unwrap();
        let (sub, ids) = g.induced(&[5, 6, 7, 8, 9]).unwrap();
        assert_eq!(sub.n(), 5);
        assert_eq!(sub.m(), 10);
        assert_eq!(ids, vec![5, 6, 7, 8, 9]);
    }

    #[test]
    fn regular_high_theta_cut_floor() {
        // For a regular graph of degree theta*n with theta > 1/2, every cut
        // with d(S) <= m has conductance at least theta - 1/2; exhaustive over
        // subsets at small n.
        for (n, degree) in [(10usize, 6usize), (12, 8), (14, 8)] {
            let g = generate(&Family::RegularCirculant { n, degree }).unwrap();
            let theta = g.min_degree_ratio().theta;
            assert!(theta > 0.5);
            for mask in 1u32..(1 << (n - 1)) {
                let s: Vec<u32> = (0..n as u32).filter(|&v| mask >> v & 1 == 1).collect();
                let cut = g.cut_conductance(&s).unwrap();
                assert!(
                    cut.conductance >= theta - 0.5 - 1e-12,
                    "n={n} d={degree} mask={mask:#b}: {}",
                    cut.conductance
                );
            }
        }
    }
}
