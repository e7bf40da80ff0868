//! Dataset graphs, binary queries and vertex sets.
//!
//! Vertices are opaque string identifiers kept in lexicographic order; the
//! position of an identifier in that order is its index, so every tie broken
//! "by smallest index" elsewhere in the crate is broken by identifier.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use crate::bounds::Epsilon;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge {
    /// Smaller endpoint index.
    pub u: usize,
    /// Larger endpoint index.
    pub v: usize,
    pub eps: Epsilon,
}

/// A simple, connected, undirected graph of datasets with a privacy budget on
/// every edge.
#[derive(Clone, Debug)]
pub struct DatasetGraph {
    names: Vec<String>,
    index: HashMap<String, usize>,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<(usize, Epsilon)>>,
    edge_index: HashMap<(usize, usize), usize>,
}

impl PartialEq for DatasetGraph {
    fn eq(&self, other: &Self) -> bool {
        self.names == other.names && self.edges == other.edges
    }
}

impl DatasetGraph {
    /// Validates and builds a graph from identifiers and `(u, v, ε)` triples.
    pub fn new<S, I, E>(vertices: I, edges: E) -> Result<Self>
    where
        S: Into<String>,
        I: IntoIterator<Item = S>,
        E: IntoIterator<Item = (S, S, f64)>,
    {
        let mut names: Vec<String> = vertices.into_iter().map(Into::into).collect();
        if names.is_empty() {
            return Err(Error::EmptyGraph);
        }
        let mut seen = BTreeSet::new();
        for name in &names {
            if !seen.insert(name.as_str()) {
                return Err(Error::DuplicateVertex(name.clone()));
            }
        }
        names.sort();
        let index: HashMap<String, usize> = names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), i))
            .collect();

        let mut edge_list = Vec::new();
        let mut seen_edges = HashSet::new();
        for (a, b, eps) in edges {
            let (a, b): (String, String) = (a.into(), b.into());
            let ia = *index
                .get(&a)
                .ok_or_else(|| Error::UnknownVertex(a.clone()))?;
            let ib = *index
                .get(&b)
                .ok_or_else(|| Error::UnknownVertex(b.clone()))?;
            if ia == ib {
                return Err(Error::SelfLoop(a));
            }
            let eps = Epsilon::new(eps)?;
            let (u, v) = (ia.min(ib), ia.max(ib));
            if !seen_edges.insert((u, v)) {
                return Err(Error::DuplicateEdge(names[u].clone(), names[v].clone()));
            }
            edge_list.push(Edge { u, v, eps });
        }
        Self::assemble(names, index, edge_list)
    }

    fn assemble(
        names: Vec<String>,
        index: HashMap<String, usize>,
        mut edges: Vec<Edge>,
    ) -> Result<Self> {
        edges.sort_by_key(|e| (e.u, e.v));
        let mut adjacency = vec![Vec::new(); names.len()];
        let mut edge_index = HashMap::with_capacity(edges.len());
        for (k, e) in edges.iter().enumerate() {
            adjacency[e.u].push((e.v, e.eps));
            adjacency[e.v].push((e.u, e.eps));
            edge_index.insert((e.u, e.v), k);
        }
        for list in &mut adjacency {
            list.sort_by_key(|&(w, _)| w);
        }
        let graph = DatasetGraph {
            names,
            index,
            edges,
            adjacency,
            edge_index,
        };
        if let Some(v) = graph.first_unreachable() {
            return Err(Error::Disconnected(graph.names[v].clone()));
        }
        Ok(graph)
    }

    fn first_unreachable(&self) -> Option<usize> {
        let mut seen = vec![false; self.len()];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for &(w, _) in &self.adjacency[u] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.iter().position(|&s| !s)
    }

    /// Same topology with every budget replaced by `f(u, v, ε)`.
    pub fn map_epsilon(&self, mut f: impl FnMut(usize, usize, Epsilon) -> Epsilon) -> Self {
        let edges = self
            .edges
            .iter()
            .map(|e| Edge {
                eps: f(e.u, e.v, e.eps),
                ..*e
            })
            .collect();
        Self::assemble(self.names.clone(), self.index.clone(), edges).expect("topology unchanged")
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Identifiers in canonical order.
    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, v: usize) -> &str {
        &self.names[v]
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownVertex(name.to_string()))
    }

    pub(crate) fn check_index(&self, v: usize) -> Result<()> {
        if v < self.len() {
            Ok(())
        } else {
            Err(Error::UnknownVertex(format!("#{v}")))
        }
    }

    /// Edges sorted by `(u, v)` with `u < v`.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Neighbors of `v` with the budget of the connecting edge, by index.
    #[inline]
    pub fn neighbors(&self, v: usize) -> &[(usize, Epsilon)] {
        &self.adjacency[v]
    }

    pub fn epsilon(&self, u: usize, v: usize) -> Option<Epsilon> {
        let key = (u.min(v), u.max(v));
        self.edge_index.get(&key).map(|&k| self.edges[k].eps)
    }
}

/// A binary query value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    One,
    Two,
}

impl Label {
    pub fn from_int(value: i64) -> Result<Self> {
        match value {
            1 => Ok(Label::One),
            2 => Ok(Label::Two),
            other => Err(Error::InvalidQuery(other)),
        }
    }

    pub fn as_int(self) -> u8 {
        match self {
            Label::One => 1,
            Label::Two => 2,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Label::One => Label::Two,
            Label::Two => Label::One,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_int())
    }
}

/// The true query `T`, total on the companion graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QueryAssignment {
    labels: Vec<Label>,
}

impl QueryAssignment {
    /// Labels given in the graph's canonical vertex order.
    pub fn from_labels(graph: &DatasetGraph, labels: Vec<Label>) -> Result<Self> {
        if labels.len() != graph.len() {
            return Err(Error::LengthMismatch {
                expected: graph.len(),
                actual: labels.len(),
            });
        }
        Ok(QueryAssignment { labels })
    }

    /// Labels keyed by identifier; every vertex must appear exactly once.
    pub fn from_pairs<'a>(
        graph: &DatasetGraph,
        pairs: impl IntoIterator<Item = (&'a str, Label)>,
    ) -> Result<Self> {
        let mut labels = vec![None; graph.len()];
        for (name, label) in pairs {
            let v = graph.index_of(name)?;
            if labels[v].replace(label).is_some() {
                return Err(Error::DuplicateVertex(name.to_string()));
            }
        }
        let labels = labels
            .into_iter()
            .enumerate()
            .map(|(v, l)| l.ok_or_else(|| Error::MissingQuery(graph.name(v).to_string())))
            .collect::<Result<_>>()?;
        Ok(QueryAssignment { labels })
    }

    pub fn constant(graph: &DatasetGraph, label: Label) -> Self {
        QueryAssignment {
            labels: vec![label; graph.len()],
        }
    }

    #[inline]
    pub fn label(&self, v: usize) -> Label {
        self.labels[v]
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    /// `3 - T`.
    pub fn flipped(&self) -> Self {
        QueryAssignment {
            labels: self.labels.iter().map(|l| l.flipped()).collect(),
        }
    }
}

/// A set of vertex indices of some graph.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VertexSet(BTreeSet<usize>);

impl VertexSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_names<'a>(
        graph: &DatasetGraph,
        names: impl IntoIterator<Item = &'a str>,
    ) -> Result<Self> {
        names
            .into_iter()
            .map(|n| graph.index_of(n))
            .collect::<Result<BTreeSet<_>>>()
            .map(VertexSet)
    }

    pub fn all(graph: &DatasetGraph) -> Self {
        VertexSet((0..graph.len()).collect())
    }

    pub fn insert(&mut self, v: usize) -> bool {
        self.0.insert(v)
    }

    pub fn contains(&self, v: usize) -> bool {
        self.0.contains(&v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn is_subset(&self, other: &VertexSet) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn names<'g>(&self, graph: &'g DatasetGraph) -> Vec<&'g str> {
        self.iter().map(|v| graph.name(v)).collect()
    }
}

impl FromIterator<usize> for VertexSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        VertexSet(iter.into_iter().collect())
    }
}

/// `N(S)`: vertices outside `s` adjacent to at least one member of `s`.
pub fn neighborhood(graph: &DatasetGraph, s: &VertexSet) -> Result<VertexSet> {
    for v in s.iter() {
        graph.check_index(v)?;
    }
    Ok(s.iter()
        .flat_map(|v| graph.neighbors(v).iter().map(|&(w, _)| w))
        .filter(|&w| !s.contains(w))
        .collect())
}

/// Vertices with at least one neighbor of a different label.
pub fn boundary_set(graph: &DatasetGraph, query: &QueryAssignment) -> VertexSet {
    (0..graph.len())
        .filter(|&v| {
            graph
                .neighbors(v)
                .iter()
                .any(|&(w, _)| query.label(w) != query.label(v))
        })
        .collect()
}
