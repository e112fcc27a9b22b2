use std::fmt::Write as _;

use fixedbitset::FixedBitSet;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::instance::Coverage;

/// Simple undirected graph with sorted adjacency lists.
///
/// As a [`Coverage`] the vertices are objects and the edges are elements, so
/// the sharing relation is adjacency and the discrete IS/DS oracles solve the
/// graph problems directly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneralGraph {
    adj: Vec<Vec<usize>>,
    edges: Vec<(usize, usize)>,
    incident: Vec<FixedBitSet>,
}

impl GeneralGraph {
    pub fn new(vertex_count: usize) -> Self {
        Self::from_edges(vertex_count, &[]).expect("edgeless graph is valid")
    }

    pub fn from_edges(vertex_count: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut adj = vec![Vec::new(); vertex_count];
        for &(u, v) in edges {
            for w in [u, v] {
                if w >= vertex_count {
                    return Err(Error::IndexOutOfRange { index: w, len: vertex_count });
                }
            }
            if u == v {
                return Err(Error::InvalidField {
                    field: "edges".into(),
                    message: format!("self-loop at vertex {u}"),
                });
            }
            if adj[u].contains(&v) {
                return Err(Error::InvalidField {
                    field: "edges".into(),
                    message: format!("duplicate edge ({u}, {v})"),
                });
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        let mut sorted: Vec<(usize, usize)> = edges.iter().map(|&(u, v)| (u.min(v), u.max(v))).collect();
        sorted.sort_unstable();
        let mut incident = vec![FixedBitSet::with_capacity(sorted.len()); vertex_count];
        for (i, &(u, v)) in sorted.iter().enumerate() {
            incident[u].insert(i);
            incident[v].insert(i);
        }
        Ok(Self { adj, edges: sorted, incident })
    }

    pub fn vertex_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges as sorted pairs, in lexicographic order; an edge's position here
    /// is its global index.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.adj.len() && self.adj[u].binary_search(&v).is_ok()
    }

    pub fn edge_index(&self, u: usize, v: usize) -> Option<usize> {
        self.edges.binary_search(&(u.min(v), u.max(v))).ok()
    }

    pub fn is_independent(&self, set: &FixedBitSet) -> bool {
        self.edges.iter().all(|&(u, v)| !(set.contains(u) && set.contains(v)))
    }

    pub fn is_dominating(&self, set: &FixedBitSet) -> bool {
        (0..self.vertex_count()).all(|v| set.contains(v) || self.adj[v].iter().any(|&u| set.contains(u)))
    }

    /// Replaces edge `(u, v)` by the path `u - d1 - ... - d_dummies - v`.
    /// Dummy vertices are appended after the existing ones.
    pub fn subdivide_edge(&self, u: usize, v: usize, dummies: usize) -> Result<Self> {
        if !self.has_edge(u, v) {
            return Err(Error::MissingEdge(u, v));
        }
        if dummies == 0 {
            return Err(Error::Precondition("subdivision needs at least one dummy vertex".into()));
        }
        let base = self.vertex_count();
        let mut edges: Vec<(usize, usize)> = self
            .edges
            .iter()
            .copied()
            .filter(|&e| e != (u.min(v), u.max(v)))
            .collect();
        let chain: Vec<usize> = std::iter::once(u)
            .chain(base..base + dummies)
            .chain(std::iter::once(v))
            .collect();
        edges.extend(chain.windows(2).map(|w| (w[0], w[1])));
        Self::from_edges(base + dummies, &edges)
    }

    pub fn path(vertex_count: usize) -> Self {
        let edges: Vec<_> = (1..vertex_count).map(|i| (i - 1, i)).collect();
        Self::from_edges(vertex_count, &edges).expect("path is simple")
    }

    pub fn cycle(vertex_count: usize) -> Result<Self> {
        if vertex_count < 3 {
            return Err(Error::Precondition("a cycle needs at least 3 vertices".into()));
        }
        let edges: Vec<_> = (0..vertex_count).map(|i| (i, (i + 1) % vertex_count)).collect();
        Self::from_edges(vertex_count, &edges)
    }

    /// Random spanning tree plus each remaining pair with probability
    /// `extra_edge_prob`; always connected.
    pub fn random_connected(seed: u64, vertex_count: usize, extra_edge_prob: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut edges = Vec::new();
        for v in 1..vertex_count {
            edges.push((rng.gen_range(0..v), v));
        }
        for u in 0..vertex_count {
            for v in u + 1..vertex_count {
                if !edges.contains(&(u, v)) && rng.gen_bool(extra_edge_prob) {
                    edges.push((u, v));
                }
            }
        }
        Self::from_edges(vertex_count, &edges).expect("generated edges are simple")
    }

    /// Parses DIMACS edge format: `c` comments, one `p edge V E` line, then
    /// `e u v` lines with 1-based vertices.
    pub fn parse_dimacs(text: &str) -> Result<Self> {
        let mut header: Option<(usize, usize)> = None;
        let mut edges = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let err = |column: usize, message: String| Error::Parse {
                line: lineno + 1,
                column,
                message,
            };
            let trimmed = line.trim_start();
            let indent = line.len() - trimmed.len();
            let mut fields = trimmed.split_whitespace();
            match fields.next() {
                None | Some("c") => continue,
                Some("p") => {
                    if header.is_some() {
                        return Err(err(indent + 1, "duplicate problem line".into()));
                    }
                    let kind = fields.next().ok_or_else(|| err(indent + 1, "missing format".into()))?;
                    if kind != "edge" && kind != "col" {
                        return Err(err(indent + 3, format!("unsupported format `{kind}`")));
                    }
                    let v = parse_count(fields.next(), &err, indent)?;
                    let e = parse_count(fields.next(), &err, indent)?;
                    header = Some((v, e));
                }
                Some("e") => {
                    let (nv, _) = header.ok_or_else(|| err(indent + 1, "edge before problem line".into()))?;
                    let u = parse_count(fields.next(), &err, indent)?;
                    let v = parse_count(fields.next(), &err, indent)?;
                    for w in [u, v] {
                        if w == 0 || w > nv {
                            return Err(err(indent + 1, format!("vertex {w} outside 1..={nv}")));
                        }
                    }
                    let (a, b) = ((u - 1).min(v - 1), (u - 1).max(v - 1));
                    if a == b {
                        return Err(err(indent + 1, format!("self-loop at vertex {u}")));
                    }
                    if edges.contains(&(a, b)) {
                        return Err(err(indent + 1, format!("duplicate edge {u} {v}")));
                    }
                    edges.push((a, b));
                }
                Some(other) => {
                    return Err(err(indent + 1, format!("unknown line type `{other}`")));
                }
            }
        }
        let (nv, ne) = header.ok_or(Error::Parse {
            line: text.lines().count().max(1),
            column: 1,
            message: "missing problem line".into(),
        })?;
        if edges.len() != ne {
            return Err(Error::InvalidField {
                field: "p".into(),
                message: format!("header declares {ne} edges but {} were listed", edges.len()),
            });
        }
        Self::from_edges(nv, &edges)
    }

    pub fn to_dimacs(&self) -> String {
        let mut out = format!("p edge {} {}\n", self.vertex_count(), self.edge_count());
        for &(u, v) in &self.edges {
            let _ = writeln!(out, "e {} {}", u + 1, v + 1);
        }
        out
    }
}

fn parse_count<F>(tok: Option<&str>, err: &F, indent: usize) -> Result<usize>
where
    F: Fn(usize, String) -> Error,
{
    let tok = tok.ok_or_else(|| err(indent + 1, "missing number".into()))?;
    tok.parse().map_err(|_| err(indent + 1, format!("`{tok}` is not a non-negative integer")))
}

impl Coverage for GeneralGraph {
    fn object_count(&self) -> usize {
        self.vertex_count()
    }

    fn element_count(&self) -> usize {
        self.edge_count()
    }

    fn coverage(&self, object: usize) -> &FixedBitSet {
        &self.incident[object]
    }
}

/// Simple graph where every vertex has degree exactly three.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CubicGraph {
    graph: GeneralGraph,
}

impl CubicGraph {
    pub fn from_edges(vertex_count: usize, edges: &[(usize, usize)]) -> Result<Self> {
        Self::try_from(GeneralGraph::from_edges(vertex_count, edges)?)
    }

    pub fn parse_dimacs(text: &str) -> Result<Self> {
        Self::try_from(GeneralGraph::parse_dimacs(text)?)
    }

    pub fn graph(&self) -> &GeneralGraph {
        &self.graph
    }

    pub fn vertex_count(&self) -> usize {
        self.graph.vertex_count()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        self.graph.edges()
    }

    /// Global indices of the three edges at `v`, ascending.
    pub fn incident_edges(&self, v: usize) -> [usize; 3] {
        let mut out: Vec<usize> = self.graph.coverage(v).ones().collect();
        out.sort_unstable();
        [out[0], out[1], out[2]]
    }

    pub fn k4() -> Self {
        Self::from_edges(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap()
    }

    /// Triangular prism K3 x K2.
    pub fn prism() -> Self {
        Self::from_edges(
            6,
            &[(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (0, 3), (1, 4), (2, 5)],
        )
        .unwrap()
    }

    pub fn k33() -> Self {
        let edges: Vec<_> = (0..3).flat_map(|a| (3..6).map(move |b| (a, b))).collect();
        Self::from_edges(6, &edges).unwrap()
    }

    pub fn cube() -> Self {
        let edges: Vec<_> = (0..8usize)
            .flat_map(|v| [1, 2, 4].into_iter().map(move |b| (v, v ^ b)))
            .filter(|&(u, v)| u < v)
            .collect();
        Self::from_edges(8, &edges).unwrap()
    }

    pub fn petersen() -> Self {
        let mut edges = Vec::new();
        for i in 0..5 {
            edges.push((i, (i + 1) % 5));
            edges.push((i, i + 5));
            edges.push((i + 5, (i + 2) % 5 + 5));
        }
        Self::from_edges(10, &edges).unwrap()
    }

    pub fn disjoint_union(&self, other: &Self) -> Self {
        let off = self.vertex_count();
        let mut edges = self.edges().to_vec();
        edges.extend(other.edges().iter().map(|&(u, v)| (u + off, v + off)));
        Self::from_edges(off + other.vertex_count(), &edges).expect("union of cubic graphs is cubic")
    }
}

impl TryFrom<GeneralGraph> for CubicGraph {
    type Error = Error;

    fn try_from(graph: GeneralGraph) -> Result<Self> {
        if let Some(v) = (0..graph.vertex_count()).find(|&v| graph.degree(v) != 3) {
            return Err(Error::NotCubic(format!("vertex {v} has degree {}", graph.degree(v))));
        }
        Ok(Self { graph })
    }
}
