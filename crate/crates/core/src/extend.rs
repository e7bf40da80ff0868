//! Extending a partial mechanism to the whole graph.
//!
//! A partial mechanism fixed on a set `S` that contains the boundary extends
//! to a private mechanism iff it is *compatible*: no seed exceeds the
//! strongest bound another seed induces on it. When it is, the optimal
//! extension gives every free vertex labelled 1 the smallest bound the seeds
//! induce on it, and every free vertex labelled 2 the complement of the
//! smallest bound the complemented seeds induce on it.

use std::fmt;

use crate::bounds::Probability;
use crate::error::{Error, Result};
use crate::graph::{boundary_set, DatasetGraph, Label, QueryAssignment, VertexSet};
use crate::oracle;
use crate::propagate::{
    strongest_bounds_from, strongest_bounds_from_naive, strongest_bounds_multi,
};
use crate::DEFAULT_TOLERANCE;

/// A mechanism fixed on a subset of the vertices.
#[derive(Clone, Debug, PartialEq)]
pub struct PartialMechanism {
    values: Vec<Option<Probability>>,
}

impl PartialMechanism {
    pub fn empty(graph: &DatasetGraph) -> Self {
        PartialMechanism {
            values: vec![None; graph.len()],
        }
    }

    pub fn from_pairs<'a>(
        graph: &DatasetGraph,
        pairs: impl IntoIterator<Item = (&'a str, f64)>,
    ) -> Result<Self> {
        let mut partial = Self::empty(graph);
        for (name, value) in pairs {
            let v = graph.index_of(name)?;
            let p = Probability::new(value)?;
            if partial.values[v].replace(p).is_some() {
                return Err(Error::DuplicateVertex(name.to_string()));
            }
        }
        Ok(partial)
    }

    pub fn from_indexed(
        graph: &DatasetGraph,
        seeds: impl IntoIterator<Item = (usize, Probability)>,
    ) -> Result<Self> {
        let mut partial = Self::empty(graph);
        for (v, p) in seeds {
            graph.check_index(v)?;
            partial.values[v] = Some(p);
        }
        Ok(partial)
    }

    pub fn get(&self, v: usize) -> Option<Probability> {
        self.values[v]
    }

    pub fn set(&mut self, v: usize, p: Probability) {
        self.values[v] = Some(p);
    }

    pub fn domain(&self) -> VertexSet {
        self.seeds().map(|(v, _)| v).collect()
    }

    pub fn len(&self) -> usize {
        self.values.iter().flatten().count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `(vertex, value)` pairs in vertex order.
    pub fn seeds(&self) -> impl Iterator<Item = (usize, Probability)> + '_ {
        self.values
            .iter()
            .enumerate()
            .filter_map(|(v, p)| p.map(|p| (v, p)))
    }

    /// `1 - p` on the same domain.
    pub fn complemented(&self) -> Self {
        PartialMechanism {
            values: self
                .values
                .iter()
                .map(|p| p.map(Probability::complement))
                .collect(),
        }
    }
}

/// `Pr[M(v) = 1]` for every vertex.
#[derive(Clone, Debug, PartialEq)]
pub struct Mechanism {
    values: Vec<Probability>,
}

impl Mechanism {
    pub fn new(graph: &DatasetGraph, values: Vec<Probability>) -> Result<Self> {
        if values.len() != graph.len() {
            return Err(Error::LengthMismatch {
                expected: graph.len(),
                actual: values.len(),
            });
        }
        Ok(Mechanism { values })
    }

    pub fn constant(graph: &DatasetGraph, p: Probability) -> Self {
        Mechanism {
            values: vec![p; graph.len()],
        }
    }

    pub fn from_pairs<'a>(
        graph: &DatasetGraph,
        pairs: impl IntoIterator<Item = (&'a str, f64)>,
    ) -> Result<Self> {
        let partial = PartialMechanism::from_pairs(graph, pairs)?;
        let values = partial
            .values
            .iter()
            .enumerate()
            .map(|(v, p)| p.ok_or_else(|| Error::MissingValue(graph.name(v).to_string())))
            .collect::<Result<_>>()?;
        Ok(Mechanism { values })
    }

    #[inline]
    pub fn get(&self, v: usize) -> Probability {
        self.values[v]
    }

    pub fn set(&mut self, v: usize, p: Probability) {
        self.values[v] = p;
    }

    pub fn values(&self) -> &[Probability] {
        &self.values
    }

    pub fn complemented(&self) -> Self {
        Mechanism {
            values: self.values.iter().map(|p| p.complement()).collect(),
        }
    }
}

/// One of the four per-edge privacy inequalities for an edge `(u, v)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DpInequality {
    /// `p(u) ≤ e^ε p(v)`
    RatioUV,
    /// `1 - p(u) ≤ e^ε (1 - p(v))`
    ComplementUV,
    /// `p(v) ≤ e^ε p(u)`
    RatioVU,
    /// `1 - p(v) ≤ e^ε (1 - p(u))`
    ComplementVU,
}

impl DpInequality {
    pub fn tag(self) -> &'static str {
        match self {
            DpInequality::RatioUV => "ratio_uv",
            DpInequality::ComplementUV => "complement_uv",
            DpInequality::RatioVU => "ratio_vu",
            DpInequality::ComplementVU => "complement_vu",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub u: String,
    pub v: String,
    pub inequality: DpInequality,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs - lhs`; negative for a violation.
    pub slack: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ViolationReport {
    pub violations: Vec<Violation>,
}

impl fmt::Display for ViolationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} violated inequalities", self.violations.len())?;
        if let Some(first) = self.violations.first() {
            write!(
                f,
                ", first on {}-{} ({}: {} > {})",
                first.u,
                first.v,
                first.inequality.tag(),
                first.lhs,
                first.rhs
            )?;
        }
        Ok(())
    }
}

/// A pair of seeds where `p(v)` exceeds the strongest bound `p(u)` induces.
#[derive(Clone, Debug, PartialEq)]
pub struct IncompatibilityWitness {
    pub u: String,
    pub v: String,
    pub bound: Probability,
    pub actual: Probability,
}

impl fmt::Display for IncompatibilityWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "p({}) = {} exceeds the bound {} induced by {}",
            self.v, self.actual, self.bound, self.u
        )
    }
}

/// How strongest bounds are scheduled.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Schedule {
    /// Two multi-source priority-queue runs.
    #[default]
    Heap,
    /// One linear-scan run per seed and per complemented seed.
    Naive,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExtendOptions {
    pub tolerance: f64,
    pub schedule: Schedule,
}

impl Default for ExtendOptions {
    fn default() -> Self {
        ExtendOptions {
            tolerance: DEFAULT_TOLERANCE,
            schedule: Schedule::Heap,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Extension {
    pub mechanism: Mechanism,
    /// The seed whose induced bound set each vertex; seeds map to themselves.
    pub origin: Vec<usize>,
}

fn check_edge(
    pu: f64,
    pv: f64,
    exp_eps: f64,
    tolerance: f64,
    mut report: impl FnMut(DpInequality, f64, f64),
) {
    let checks = [
        (DpInequality::RatioUV, pu, exp_eps * pv),
        (DpInequality::ComplementUV, 1.0 - pu, exp_eps * (1.0 - pv)),
        (DpInequality::RatioVU, pv, exp_eps * pu),
        (DpInequality::ComplementVU, 1.0 - pv, exp_eps * (1.0 - pu)),
    ];
    for (which, lhs, rhs) in checks {
        if lhs > rhs + tolerance {
            report(which, lhs, rhs);
        }
    }
}

/// True if the four inequalities hold on one edge.
pub(crate) fn edge_is_private(pu: f64, pv: f64, exp_eps: f64, tolerance: f64) -> bool {
    let mut ok = true;
    check_edge(pu, pv, exp_eps, tolerance, |_, _, _| ok = false);
    ok
}

/// Checks every edge inequality with additive slack `tolerance` and reports
/// each one that fails.
pub fn verify_dp(
    graph: &DatasetGraph,
    mech: &Mechanism,
    tolerance: f64,
) -> Result<(), ViolationReport> {
    let mut report = ViolationReport::default();
    for e in graph.edges() {
        check_edge(
            mech.get(e.u).get(),
            mech.get(e.v).get(),
            e.eps.exp(),
            tolerance,
            |inequality, lhs, rhs| {
                report.violations.push(Violation {
                    u: graph.name(e.u).to_string(),
                    v: graph.name(e.v).to_string(),
                    inequality,
                    lhs,
                    rhs,
                    slack: rhs - lhs,
                })
            },
        );
    }
    if report.violations.is_empty() {
        Ok(())
    } else {
        Err(report)
    }
}

fn witness(
    graph: &DatasetGraph,
    u: usize,
    v: usize,
    bound: Probability,
    actual: Probability,
) -> IncompatibilityWitness {
    IncompatibilityWitness {
        u: graph.name(u).to_string(),
        v: graph.name(v).to_string(),
        bound,
        actual,
    }
}

/// Checks every ordered seed pair `(u, v)` against `A_{u, p(u)}(v)` with one
/// propagation run per seed; returns the first failing pair in vertex order.
pub fn is_compatible_pairwise(
    graph: &DatasetGraph,
    partial: &PartialMechanism,
    tolerance: f64,
    schedule: Schedule,
) -> Result<(), IncompatibilityWitness> {
    for (u, pu) in partial.seeds() {
        let map = run_single(graph, u, pu, schedule);
        for (v, pv) in partial.seeds() {
            if v != u && pv.get() > map.bounds[v].get() + tolerance {
                return Err(witness(graph, u, v, map.bounds[v], pv));
            }
        }
    }
    Ok(())
}

fn run_single(
    graph: &DatasetGraph,
    u: usize,
    alpha: Probability,
    schedule: Schedule,
) -> crate::propagate::BoundMap {
    match schedule {
        Schedule::Heap => strongest_bounds_from(graph, u, alpha),
        Schedule::Naive => strongest_bounds_from_naive(graph, u, alpha),
    }
    .expect("seed index comes from the partial mechanism")
}

/// Whether `partial` can be extended to a private mechanism.
///
/// Every ordered seed pair is checked with upper bounds only; the reverse
/// pair covers the matching lower bound. A single multi-source run decides
/// the common case and the pairwise scan runs only to name a witness.
pub fn is_compatible(
    graph: &DatasetGraph,
    partial: &PartialMechanism,
    tolerance: f64,
) -> Result<(), IncompatibilityWitness> {
    let seeds: Vec<_> = partial.seeds().collect();
    if seeds.is_empty() {
        return Ok(());
    }
    let multi = strongest_bounds_multi(graph, &seeds).expect("seeds are valid");
    let violated = seeds
        .iter()
        .any(|&(v, pv)| pv.get() > multi.bounds[v].get() + tolerance);
    if violated {
        is_compatible_pairwise(graph, partial, tolerance, Schedule::Heap)
    } else {
        Ok(())
    }
}

fn require_boundary(
    graph: &DatasetGraph,
    query: &QueryAssignment,
    partial: &PartialMechanism,
) -> Result<()> {
    let missing: Vec<String> = boundary_set(graph, query)
        .iter()
        .filter(|&v| partial.get(v).is_none())
        .map(|v| graph.name(v).to_string())
        .collect();
    if missing.is_empty() {
        Ok(())
    } else {
        Err(Error::BoundaryNotCovered(missing))
    }
}

/// Pointwise minimum of induced bounds and the attaining seed.
struct SeedBounds {
    bounds: Vec<Probability>,
    origin: Vec<usize>,
}

impl SeedBounds {
    fn unconstrained(n: usize) -> Self {
        SeedBounds {
            bounds: vec![Probability::ONE; n],
            origin: vec![usize::MAX; n],
        }
    }
}

fn seed_bounds(
    graph: &DatasetGraph,
    seeds: &[(usize, Probability)],
    schedule: Schedule,
) -> SeedBounds {
    if seeds.is_empty() {
        return SeedBounds::unconstrained(graph.len());
    }
    match schedule {
        Schedule::Heap => {
            let multi = strongest_bounds_multi(graph, seeds).expect("seeds are valid");
            SeedBounds {
                bounds: multi.bounds,
                origin: multi.origin,
            }
        }
        Schedule::Naive => {
            let mut acc = SeedBounds::unconstrained(graph.len());
            for &(u, pu) in seeds {
                let map = strongest_bounds_from_naive(graph, u, pu).expect("seeds are valid");
                for (v, b) in map.bounds.iter().enumerate() {
                    if acc.origin[v] == usize::MAX || *b < acc.bounds[v] {
                        acc.bounds[v] = *b;
                        acc.origin[v] = u;
                    }
                }
            }
            acc
        }
    }
}

/// The optimal private extension of `partial`, or the reason none exists.
///
/// Requires the boundary of `query` to be inside the domain of `partial`.
pub fn extend_mechanism(
    graph: &DatasetGraph,
    query: &QueryAssignment,
    partial: &PartialMechanism,
    options: &ExtendOptions,
) -> Result<Extension> {
    require_boundary(graph, query, partial)?;
    let compatible = match options.schedule {
        Schedule::Heap => is_compatible(graph, partial, options.tolerance),
        Schedule::Naive => {
            is_compatible_pairwise(graph, partial, options.tolerance, Schedule::Naive)
        }
    };
    compatible.map_err(Error::Incompatible)?;

    let free: Vec<usize> = (0..graph.len())
        .filter(|&v| partial.get(v).is_none())
        .collect();
    let wants = |label| free.iter().any(|&v| query.label(v) == label);

    let seeds: Vec<_> = partial.seeds().collect();
    let ones = if wants(Label::One) {
        Some(seed_bounds(graph, &seeds, options.schedule))
    } else {
        None
    };
    let twos = if wants(Label::Two) {
        let complemented: Vec<_> = seeds.iter().map(|&(v, p)| (v, p.complement())).collect();
        Some(seed_bounds(graph, &complemented, options.schedule))
    } else {
        None
    };

    let mut values = vec![Probability::ZERO; graph.len()];
    let mut origin = vec![usize::MAX; graph.len()];
    for (v, p) in &seeds {
        values[*v] = *p;
        origin[*v] = *v;
    }
    for &v in &free {
        let (value, from) = match query.label(v) {
            Label::One => {
                let b = ones.as_ref().expect("computed when needed");
                (b.bounds[v], b.origin[v])
            }
            Label::Two => {
                let b = twos.as_ref().expect("computed when needed");
                (b.bounds[v].complement(), b.origin[v])
            }
        };
        values[v] = value;
        origin[v] = from;
    }
    Ok(Extension {
        mechanism: Mechanism { values },
        origin,
    })
}

/// Why a mechanism failed the optimality probe.
#[derive(Clone, Debug, PartialEq)]
pub enum OptimalityFailure {
    /// The mechanism disagrees with the partial mechanism on a seed.
    NotAnExtension { vertex: String },
    /// The reference relaxation refused the instance.
    ReferenceRefused(Error),
    /// Differs from the reference optimum by more than the tolerance.
    MismatchWithReference {
        vertex: String,
        value: f64,
        reference: f64,
    },
    /// Moving this vertex toward its true answer violates no induced bound.
    ImprovableAt { vertex: String },
}

impl fmt::Display for OptimalityFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OptimalityFailure::NotAnExtension { vertex } => {
                write!(f, "mechanism changes the seed at {vertex}")
            }
            OptimalityFailure::ReferenceRefused(e) => write!(f, "reference refused: {e}"),
            OptimalityFailure::MismatchWithReference {
                vertex,
                value,
                reference,
            } => write!(
                f,
                "not equal to the reference optimum at {vertex}: {value} vs {reference}"
            ),
            OptimalityFailure::ImprovableAt { vertex } => {
                write!(f, "value at {vertex} can move toward its true answer")
            }
        }
    }
}

/// Largest graph on which the probe uses path enumeration for its bounds.
const PROBE_ENUMERATION_LIMIT: usize = 12;

/// Checks that `mech` is the optimal extension of `partial`.
///
/// First compares against the relaxation in [`oracle::fixed_point_extension`],
/// then nudges every free vertex by `delta` toward its true answer and
/// requires the nudge to break some bound a seed induces on that vertex.
pub fn verify_optimal(
    graph: &DatasetGraph,
    query: &QueryAssignment,
    partial: &PartialMechanism,
    mech: &Mechanism,
    delta: f64,
    tolerance: f64,
) -> Result<(), OptimalityFailure> {
    for (v, p) in partial.seeds() {
        if mech.get(v) != p {
            return Err(OptimalityFailure::NotAnExtension {
                vertex: graph.name(v).to_string(),
            });
        }
    }
    let reference = oracle::fixed_point_extension(graph, query, partial, tolerance)
        .map_err(OptimalityFailure::ReferenceRefused)?;
    for v in 0..graph.len() {
        let (value, expected) = (mech.get(v).get(), reference.mechanism.get(v).get());
        if (value - expected).abs() > tolerance {
            return Err(OptimalityFailure::MismatchWithReference {
                vertex: graph.name(v).to_string(),
                value,
                reference: expected,
            });
        }
    }

    let free: Vec<usize> = (0..graph.len())
        .filter(|&v| partial.get(v).is_none())
        .collect();
    if free.is_empty() {
        return Ok(());
    }
    let seeds: Vec<_> = partial.seeds().collect();
    let complemented: Vec<_> = seeds.iter().map(|&(v, p)| (v, p.complement())).collect();
    let ones = probe_bounds(graph, &seeds);
    let twos = probe_bounds(graph, &complemented);

    for v in free {
        let x = mech.get(v).get();
        let broken = match query.label(v) {
            Label::One => x + delta > 1.0 || x + delta > ones[v] + tolerance,
            Label::Two => x - delta < 0.0 || 1.0 - (x - delta) > twos[v] + tolerance,
        };
        if !broken {
            return Err(OptimalityFailure::ImprovableAt {
                vertex: graph.name(v).to_string(),
            });
        }
    }
    Ok(())
}

/// `min_u A_{u, p(u)}(v)`, by enumeration on small graphs and single-source
/// propagation otherwise.
fn probe_bounds(graph: &DatasetGraph, seeds: &[(usize, Probability)]) -> Vec<f64> {
    let mut acc = vec![1.0f64; graph.len()];
    for &(u, pu) in seeds {
        let bounds: Vec<f64> = if graph.len() <= PROBE_ENUMERATION_LIMIT {
            oracle::enumerate_strongest_bounds_from(graph, u, pu, PROBE_ENUMERATION_LIMIT)
                .expect("graph is under the enumeration cap")
                .iter()
                .map(|w| w.bound.get())
                .collect()
        } else {
            strongest_bounds_from(graph, u, pu)
                .expect("seed index is valid")
                .bounds
                .iter()
                .map(|b| b.get())
                .collect()
        };
        for (a, b) in acc.iter_mut().zip(bounds) {
            *a = a.min(b);
        }
    }
    acc
}
