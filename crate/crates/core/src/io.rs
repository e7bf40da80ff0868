//! Instance and mechanism files.
//!
//! An instance is a single JSON document:
//!
//! ```json
//! {
//!   "vertices": [{"id": "a", "query": 1}, {"id": "b", "query": 2}],
//!   "edges": [{"u": "a", "v": "b", "epsilon": 0.693}],
//!   "partial_mechanism": {"a": 0.6, "b": 0.3}
//! }
//! ```
//!
//! `partial_mechanism` is optional. Numbers are written with the shortest
//! representation that parses back to the same `f64`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::bounds::{Epsilon, Probability};
use crate::error::{Error, Result};
use crate::extend::{Extension, Mechanism, PartialMechanism};
use crate::graph::{DatasetGraph, Label, QueryAssignment};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VertexRecord {
    pub id: String,
    pub query: i64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeRecord {
    pub u: String,
    pub v: String,
    pub epsilon: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub vertices: Vec<VertexRecord>,
    pub edges: Vec<EdgeRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partial_mechanism: Option<BTreeMap<String, f64>>,
}

/// A validated problem instance.
#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    pub graph: DatasetGraph,
    pub query: QueryAssignment,
    pub partial: Option<PartialMechanism>,
}

impl Instance {
    pub fn to_file(&self) -> InstanceFile {
        let g = &self.graph;
        InstanceFile {
            vertices: (0..g.len())
                .map(|v| VertexRecord {
                    id: g.name(v).to_string(),
                    query: self.query.label(v).as_int().into(),
                })
                .collect(),
            edges: g
                .edges()
                .iter()
                .map(|e| EdgeRecord {
                    u: g.name(e.u).to_string(),
                    v: g.name(e.v).to_string(),
                    epsilon: e.eps.value(),
                })
                .collect(),
            partial_mechanism: self.partial.as_ref().map(|p| {
                p.seeds()
                    .map(|(v, x)| (g.name(v).to_string(), x.get()))
                    .collect()
            }),
        }
    }

    /// The partial mechanism, or an empty one.
    pub fn partial_or_empty(&self) -> PartialMechanism {
        self.partial
            .clone()
            .unwrap_or_else(|| PartialMechanism::empty(&self.graph))
    }
}

impl InstanceFile {
    /// Validates into graph, query and partial mechanism. Errors carry the
    /// path of the offending field, e.g. `edges[3].epsilon`.
    pub fn validate(&self) -> Result<Instance> {
        for (i, e) in self.edges.iter().enumerate() {
            Epsilon::new(e.epsilon).map_err(|err| err.at(format!("edges[{i}].epsilon")))?;
        }
        let graph = DatasetGraph::new(
            self.vertices.iter().map(|r| r.id.as_str()),
            self.edges
                .iter()
                .map(|e| (e.u.as_str(), e.v.as_str(), e.epsilon)),
        )
        .map_err(|err| match err {
            Error::DuplicateVertex(_) => err.at("vertices"),
            Error::UnknownVertex(_) | Error::SelfLoop(_) | Error::DuplicateEdge(..) => {
                err.at("edges")
            }
            other => other,
        })?;

        let mut labels = Vec::with_capacity(self.vertices.len());
        for (i, r) in self.vertices.iter().enumerate() {
            let label =
                Label::from_int(r.query).map_err(|e| e.at(format!("vertices[{i}].query")))?;
            labels.push((r.id.as_str(), label));
        }
        let query = QueryAssignment::from_pairs(&graph, labels)?;

        let partial = match &self.partial_mechanism {
            None => None,
            Some(map) => {
                let mut partial = PartialMechanism::empty(&graph);
                for (id, &value) in map {
                    let at = || format!("partial_mechanism.{id}");
                    let v = graph.index_of(id).map_err(|e| e.at(at()))?;
                    let p = Probability::new(value).map_err(|e| e.at(at()))?;
                    partial.set(v, p);
                }
                Some(partial)
            }
        };
        Ok(Instance {
            graph,
            query,
            partial,
        })
    }
}

fn parse_json<'a, T: Deserialize<'a>>(text: &'a str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data serializes");
    s.push('\n');
    s
}

pub fn parse_instance(text: &str) -> Result<Instance> {
    parse_json::<InstanceFile>(text)?.validate()
}

pub fn serialize_instance(instance: &Instance) -> String {
    to_json(&instance.to_file())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MechanismMetadata {
    pub tolerance: f64,
    pub compatible: bool,
    /// Seed whose induced bound set each vertex.
    pub origin: BTreeMap<String, String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MechanismFile {
    pub mechanism: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata: Option<MechanismMetadata>,
}

impl MechanismFile {
    pub fn from_extension(graph: &DatasetGraph, ext: &Extension, tolerance: f64) -> Self {
        MechanismFile {
            mechanism: mechanism_map(graph, &ext.mechanism),
            metadata: Some(MechanismMetadata {
                tolerance,
                compatible: true,
                origin: ext
                    .origin
                    .iter()
                    .enumerate()
                    .filter(|(_, &o)| o != usize::MAX)
                    .map(|(v, &o)| (graph.name(v).to_string(), graph.name(o).to_string()))
                    .collect(),
            }),
        }
    }

    /// The mechanism on `graph`; every vertex must have a value.
    pub fn to_mechanism(&self, graph: &DatasetGraph) -> Result<Mechanism> {
        let mut values = Vec::with_capacity(graph.len());
        for name in graph.names() {
            let &x = self
                .mechanism
                .get(name)
                .ok_or_else(|| Error::MissingValue(name.clone()).at("mechanism"))?;
            values.push(Probability::new(x).map_err(|e| e.at(format!("mechanism.{name}")))?);
        }
        if let Some(extra) = self.mechanism.keys().find(|k| graph.index_of(k).is_err()) {
            return Err(Error::UnknownVertex(extra.clone()).at("mechanism"));
        }
        Mechanism::new(graph, values)
    }
}

pub fn mechanism_map(graph: &DatasetGraph, mech: &Mechanism) -> BTreeMap<String, f64> {
    (0..graph.len())
        .map(|v| (graph.name(v).to_string(), mech.get(v).get()))
        .collect()
}

pub fn parse_mechanism(text: &str) -> Result<MechanismFile> {
    parse_json(text)
}

pub fn serialize_mechanism(file: &MechanismFile) -> String {
    to_json(file)
}
