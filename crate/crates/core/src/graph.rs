//! The finite fundamental crystal `G_F` together with its on-site potential.
//!
//! Graphs are built from a [`GraphSpec`] by looking the spec's `kind` up in a
//! [`FamilyRegistry`]. The builtin families are `path`, `cycle`, `star`,
//! `complete` and `custom`; further families can be registered at runtime.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A finite simple graph with a real potential on its vertices.
///
/// The adjacency is dense: crystals are small, the infinite direction is
/// handled analytically elsewhere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawFiniteGraph", into = "RawFiniteGraph")]
pub struct FiniteGraph {
    k: usize,
    adjacency: Vec<bool>,
    potential: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawFiniteGraph {
    k: usize,
    adjacency: Vec<Vec<u8>>,
    potential: Vec<f64>,
}

impl TryFrom<RawFiniteGraph> for FiniteGraph {
    type Error = Error;

    fn try_from(raw: RawFiniteGraph) -> Result<Self> {
        let k = raw.k;
        if raw.adjacency.len() != k {
            return Err(Error::InvalidGraph(format!(
                "adjacency: expected {k} rows, got {}",
                raw.adjacency.len()
            )));
        }
        let mut edges = Vec::new();
        for (p, row) in raw.adjacency.iter().enumerate() {
            if row.len() != k {
                return Err(Error::InvalidGraph(format!(
                    "adjacency: row {p} has {} entries, expected {k}",
                    row.len()
                )));
            }
            for (q, &a) in row.iter().enumerate() {
                match a {
                    0 => {}
                    1 if p == q => {
                        return Err(Error::InvalidGraph(format!("adjacency: self-loop at {p}")))
                    }
                    1 => {
                        if raw.adjacency[q][p] != 1 {
                            return Err(Error::InvalidGraph(format!(
                                "adjacency: not symmetric at ({p}, {q})"
                            )));
                        }
                        if p < q {
                            edges.push((p, q));
                        }
                    }
                    other => {
                        return Err(Error::InvalidGraph(format!(
                            "adjacency: entry ({p}, {q}) is {other}, expected 0 or 1"
                        )))
                    }
                }
            }
        }
        FiniteGraph::from_edges(k, &edges, Some(raw.potential))
    }
}

impl From<FiniteGraph> for RawFiniteGraph {
    fn from(g: FiniteGraph) -> Self {
        let adjacency = (0..g.k)
            .map(|p| (0..g.k).map(|q| u8::from(g.is_adjacent(p, q))).collect())
            .collect();
        RawFiniteGraph {
            k: g.k,
            adjacency,
            potential: g.potential,
        }
    }
}

impl FiniteGraph {
    /// Builds a graph on `k` vertices from an undirected edge list.
    ///
    /// A missing potential means `Q = 0` everywhere.
    pub fn from_edges(k: usize, edges: &[(usize, usize)], potential: Option<Vec<f64>>) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidGraph("vertex count must be positive".into()));
        }
        let mut adjacency = vec![false; k * k];
        for &(p, q) in edges {
            if p >= k || q >= k {
                return Err(Error::InvalidGraph(format!(
                    "edges: endpoint of ({p}, {q}) out of range for {k} vertices"
                )));
            }
            if p == q {
                return Err(Error::InvalidGraph(format!("edges: self-loop at vertex {p}")));
            }
            if adjacency[p * k + q] {
                return Err(Error::InvalidGraph(format!("edges: duplicate edge ({p}, {q})")));
            }
            adjacency[p * k + q] = true;
            adjacency[q * k + p] = true;
        }
        let potential = potential.unwrap_or_else(|| vec![0.0; k]);
        if potential.len() != k {
            return Err(Error::InvalidGraph(format!(
                "potential: expected {k} entries, got {}",
                potential.len()
            )));
        }
        if let Some(i) = potential.iter().position(|q| !q.is_finite()) {
            return Err(Error::InvalidGraph(format!("potential: entry {i} is not finite")));
        }
        Ok(FiniteGraph {
            k,
            adjacency,
            potential,
        })
    }

    /// The single-vertex crystal with potential `q`; `Z^d □ G_F` is then `Z^d`.
    pub fn single_vertex(q: f64) -> Self {
        FiniteGraph::from_edges(1, &[], Some(vec![q])).expect("single vertex is always valid")
    }

    /// Number of vertices `|V_F|`.
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn potential(&self) -> &[f64] {
        &self.potential
    }

    pub fn is_adjacent(&self, p: usize, q: usize) -> bool {
        self.adjacency[p * self.k + q]
    }

    pub fn degree(&self, p: usize) -> usize {
        (0..self.k).filter(|&q| self.is_adjacent(p, q)).count()
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.k).map(|p| self.degree(p)).collect()
    }

    pub fn max_degree(&self) -> usize {
        self.degrees().into_iter().max().unwrap_or(0)
    }

    pub fn neighbors(&self, p: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.k).filter(move |&q| self.is_adjacent(p, q))
    }

    /// Undirected edges `(p, q)` with `p < q`, in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.k)
            .flat_map(|p| ((p + 1)..self.k).map(move |q| (p, q)))
            .filter(|&(p, q)| self.is_adjacent(p, q))
            .collect()
    }

    pub fn max_abs_potential(&self) -> f64 {
        self.potential.iter().fold(0.0, |m, q| m.max(q.abs()))
    }

    /// `H_{G_F} = A_{G_F} + Q` as a dense symmetric matrix.
    pub fn hamiltonian_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.k, self.k, |p, q| {
            let hop = if self.is_adjacent(p, q) { 1.0 } else { 0.0 };
            if p == q {
                hop + self.potential[p]
            } else {
                hop
            }
        })
    }
}

impl fmt::Display for FiniteGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "G_F(k={}, edges={})", self.k, self.edges().len())
    }
}

/// Declarative description of a crystal, as read from JSON:
/// `{"kind":"path|cycle|star|complete|custom","size":N,"edges":[[i,j],...],"potential":[q0,...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSpec {
    pub kind: String,
    pub size: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edges: Option<Vec<[usize; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potential: Option<Vec<f64>>,
}

impl GraphSpec {
    pub fn new(kind: impl Into<String>, size: usize) -> Self {
        GraphSpec {
            kind: kind.into(),
            size,
            edges: None,
            potential: None,
        }
    }

    pub fn with_potential(mut self, potential: Vec<f64>) -> Self {
        self.potential = Some(potential);
        self
    }

    pub fn with_edges(mut self, edges: Vec<[usize; 2]>) -> Self {
        self.edges = Some(edges);
        self
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidGraph(e.to_string()))
    }
}

/// A named family of crystals, parametrised by a size.
pub trait GraphFamily: Send + Sync {
    fn name(&self) -> &'static str;

    /// Returns the vertex count and the undirected edge list.
    fn topology(&self, size: usize, explicit_edges: Option<&[[usize; 2]]>) -> Result<(usize, Vec<(usize, usize)>)>;
}

fn reject_explicit_edges(family: &str, edges: Option<&[[usize; 2]]>) -> Result<()> {
    match edges {
        Some(_) => Err(Error::InvalidGraph(format!(
            "edges: only the custom family takes an explicit edge list, not `{family}`"
        ))),
        None => Ok(()),
    }
}

fn require_size(family: &str, size: usize, min: usize) -> Result<()> {
    if size < min {
        return Err(Error::InvalidGraph(format!(
            "size: {family} needs size >= {min}, got {size}"
        )));
    }
    Ok(())
}

/// `P_k`: vertices `0 - 1 - ... - (k-1)`.
pub struct Path;

impl GraphFamily for Path {
    fn name(&self) -> &'static str {
        "path"
    }

    fn topology(&self, size: usize, edges: Option<&[[usize; 2]]>) -> Result<(usize, Vec<(usize, usize)>)> {
        reject_explicit_edges(self.name(), edges)?;
        require_size(self.name(), size, 1)?;
        Ok((size, (1..size).map(|p| (p - 1, p)).collect()))
    }
}

/// `C_p`, `p >= 3`.
pub struct Cycle;

impl GraphFamily for Cycle {
    fn name(&self) -> &'static str {
        "cycle"
    }

    fn topology(&self, size: usize, edges: Option<&[[usize; 2]]>) -> Result<(usize, Vec<(usize, usize)>)> {
        reject_explicit_edges(self.name(), edges)?;
        require_size(self.name(), size, 3)?;
        let mut e: Vec<_> = (1..size).map(|p| (p - 1, p)).collect();
        e.push((0, size - 1));
        Ok((size, e))
    }
}

/// The star with `size` edges: center `0` joined to leaves `1..=size`.
pub struct Star;

impl GraphFamily for Star {
    fn name(&self) -> &'static str {
        "star"
    }

    fn topology(&self, size: usize, edges: Option<&[[usize; 2]]>) -> Result<(usize, Vec<(usize, usize)>)> {
        reject_explicit_edges(self.name(), edges)?;
        require_size(self.name(), size, 1)?;
        Ok((size + 1, (1..=size).map(|leaf| (0, leaf)).collect()))
    }
}

/// `K_k`.
pub struct Complete;

impl GraphFamily for Complete {
    fn name(&self) -> &'static str {
        "complete"
    }

    fn topology(&self, size: usize, edges: Option<&[[usize; 2]]>) -> Result<(usize, Vec<(usize, usize)>)> {
        reject_explicit_edges(self.name(), edges)?;
        require_size(self.name(), size, 1)?;
        let e = (0..size)
            .flat_map(|p| ((p + 1)..size).map(move |q| (p, q)))
            .collect();
        Ok((size, e))
    }
}

/// Arbitrary simple graph on `size` vertices from an explicit edge list.
pub struct Custom;

impl GraphFamily for Custom {
    fn name(&self) -> &'static str {
        "custom"
    }

    fn topology(&self, size: usize, edges: Option<&[[usize; 2]]>) -> Result<(usize, Vec<(usize, usize)>)> {
        require_size(self.name(), size, 1)?;
        let edges = edges.unwrap_or(&[]);
        let mut seen = HashSet::new();
        for &[p, q] in edges {
            if !seen.insert((p.min(q), p.max(q))) {
                return Err(Error::InvalidGraph(format!("edges: duplicate edge [{p}, {q}]")));
            }
        }
        Ok((size, edges.iter().map(|&[p, q]| (p, q)).collect()))
    }
}

/// Graph families addressable by name.
pub struct FamilyRegistry {
    families: BTreeMap<&'static str, Box<dyn GraphFamily>>,
}

impl FamilyRegistry {
    pub fn empty() -> Self {
        FamilyRegistry {
            families: BTreeMap::new(),
        }
    }

    /// Registers `family`, replacing any family with the same name.
    pub fn register(&mut self, family: Box<dyn GraphFamily>) {
        self.families.insert(family.name(), family);
    }

    pub fn get(&self, name: &str) -> Result<&dyn GraphFamily> {
        self.families
            .get(name)
            .map(|f| f.as_ref())
            .ok_or_else(|| Error::UnknownFamily(name.to_string()))
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.families.keys().copied()
    }

    pub fn build(&self, spec: &GraphSpec) -> Result<FiniteGraph> {
        let family = self.get(&spec.kind)?;
        let (k, edges) = family.topology(spec.size, spec.edges.as_deref())?;
        FiniteGraph::from_edges(k, &edges, spec.potential.clone())
    }
}

impl Default for FamilyRegistry {
    fn default() -> Self {
        let mut r = FamilyRegistry::empty();
        r.register(Box::new(Path));
        r.register(Box::new(Cycle));
        r.register(Box::new(Star));
        r.register(Box::new(Complete));
        r.register(Box::new(Custom));
        r
    }
}

/// Builds a crystal from `spec` using the builtin families.
pub fn build_finite_graph(spec: &GraphSpec) -> Result<FiniteGraph> {
    FamilyRegistry::default().build(spec)
}
