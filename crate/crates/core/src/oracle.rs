//! Brute-force references for checking the fast paths.
//!
//! Nothing here touches [`crate::propagate`]; the only shared code is the
//! scalar edge bounds and the per-edge privacy check.

use crate::bounds::{edge_lower_bound, edge_upper_bound, Probability};
use crate::error::{Error, Result};
use crate::extend::{edge_is_private, verify_dp, Mechanism, PartialMechanism};
use crate::graph::{boundary_set, DatasetGraph, Label, QueryAssignment};

/// Default vertex cap for simple-path enumeration.
pub const DEFAULT_ENUMERATION_CAP: usize = 12;

/// A simple path and the bound it induces at its last vertex.
#[derive(Clone, Debug, PartialEq)]
pub struct PathWitness {
    pub vertices: Vec<usize>,
    pub bound: Probability,
}

fn check_cap(graph: &DatasetGraph, cap: usize) -> Result<()> {
    if graph.len() > cap {
        Err(Error::GraphTooLarge {
            vertices: graph.len(),
            cap,
        })
    } else {
        Ok(())
    }
}

/// For every target, the simple path from `source` minimizing the folded
/// bound. Ties go to the lexicographically smallest vertex sequence, which is
/// the first one a depth-first walk over sorted neighbors reaches.
pub fn enumerate_strongest_bounds_from(
    graph: &DatasetGraph,
    source: usize,
    alpha: Probability,
    cap: usize,
) -> Result<Vec<PathWitness>> {
    check_cap(graph, cap)?;
    graph.check_index(source)?;
    let mut best: Vec<Option<PathWitness>> = vec![None; graph.len()];
    let mut on_path = vec![false; graph.len()];
    let mut path = vec![source];
    on_path[source] = true;
    walk(graph, alpha, &mut path, &mut on_path, &mut best);
    Ok(best
        .into_iter()
        .map(|w| w.expect("graph is connected"))
        .collect())
}

fn walk(
    graph: &DatasetGraph,
    value: Probability,
    path: &mut Vec<usize>,
    on_path: &mut [bool],
    best: &mut [Option<PathWitness>],
) {
    let here = *path.last().unwrap();
    if best[here].as_ref().is_none_or(|w| value < w.bound) {
        best[here] = Some(PathWitness {
            vertices: path.clone(),
            bound: value,
        });
    }
    for &(next, eps) in graph.neighbors(here) {
        if on_path[next] {
            continue;
        }
        on_path[next] = true;
        path.push(next);
        walk(graph, edge_upper_bound(value, eps), path, on_path, best);
        path.pop();
        on_path[next] = false;
    }
}

/// `min` over every simple `(u, v)`-path of the folded bound, with a path
/// attaining it.
pub fn enumerate_strongest_bound(
    graph: &DatasetGraph,
    u: usize,
    v: usize,
    alpha: Probability,
    cap: usize,
) -> Result<PathWitness> {
    graph.check_index(v)?;
    let mut all = enumerate_strongest_bounds_from(graph, u, alpha, cap)?;
    Ok(all.swap_remove(v))
}

#[derive(Clone, Debug, PartialEq)]
pub struct FixedPoint {
    pub mechanism: Mechanism,
    /// Sweeps over the edge list, including the final one that changed nothing.
    pub sweeps: usize,
}

/// Largest change still counted as progress by the relaxation.
const RELAXATION_EPS: f64 = 1e-12;

/// Optimal extension by monotone relaxation.
///
/// Free vertices labelled 1 start at 1 and are pulled down by upper bounds
/// from their neighbors; free vertices labelled 2 start at 0 and are pushed up
/// by lower bounds. Sweeps repeat until nothing moves. If the result is not
/// private the seeds were inconsistent and no extension exists.
pub fn fixed_point_extension(
    graph: &DatasetGraph,
    query: &QueryAssignment,
    partial: &PartialMechanism,
    tolerance: f64,
) -> Result<FixedPoint> {
    let boundary = boundary_set(graph, query);
    let missing: Vec<String> = boundary
        .iter()
        .filter(|&v| partial.get(v).is_none())
        .map(|v| graph.name(v).to_string())
        .collect();
    if !missing.is_empty() {
        return Err(Error::BoundaryNotCovered(missing));
    }

    let n = graph.len();
    let free: Vec<bool> = (0..n).map(|v| partial.get(v).is_none()).collect();
    let mut values: Vec<Probability> = (0..n)
        .map(|v| match (partial.get(v), query.label(v)) {
            (Some(p), _) => p,
            (None, Label::One) => Probability::ONE,
            (None, Label::Two) => Probability::ZERO,
        })
        .collect();

    let relax = |values: &mut [Probability], from: usize, to: usize, eps| -> bool {
        if !free[to] {
            return false;
        }
        let old = values[to];
        let new = match query.label(to) {
            Label::One => old.min(edge_upper_bound(values[from], eps)),
            Label::Two => old.max(edge_lower_bound(values[from], eps)),
        };
        values[to] = new;
        (new.get() - old.get()).abs() > RELAXATION_EPS
    };

    let max_sweeps = n + 1;
    let mut sweeps = 0;
    loop {
        if sweeps == max_sweeps {
            return Err(Error::NonConvergence(sweeps));
        }
        sweeps += 1;
        let mut changed = false;
        for e in graph.edges() {
            changed |= relax(&mut values, e.u, e.v, e.eps);
            changed |= relax(&mut values, e.v, e.u, e.eps);
        }
        if !changed {
            break;
        }
    }

    let mechanism = Mechanism::new(graph, values)?;
    verify_dp(graph, &mechanism, tolerance).map_err(Error::NoDpCompletion)?;
    Ok(FixedPoint { mechanism, sweeps })
}

/// Searches the grid `{0, 1/steps, …, 1}` for values at the free vertices that
/// make `partial` private. Backtracks on the first failing edge.
///
/// Returns `Ok(None)` when no grid point works.
pub fn grid_search_completion(
    graph: &DatasetGraph,
    partial: &PartialMechanism,
    steps: usize,
    tolerance: f64,
    max_free: usize,
) -> Result<Option<Mechanism>> {
    let n = graph.len();
    let free: Vec<usize> = (0..n).filter(|&v| partial.get(v).is_none()).collect();
    if free.len() > max_free {
        return Err(Error::GraphTooLarge {
            vertices: free.len(),
            cap: max_free,
        });
    }
    let mut values: Vec<Option<Probability>> = (0..n).map(|v| partial.get(v)).collect();

    let consistent_at = |values: &[Option<Probability>], v: usize| -> bool {
        let pv = values[v].expect("assigned").get();
        graph.neighbors(v).iter().all(|&(w, eps)| match values[w] {
            Some(pw) => edge_is_private(pv, pw.get(), eps.exp(), tolerance),
            None => true,
        })
    };
    for v in 0..n {
        if values[v].is_some() && !consistent_at(&values, v) {
            return Ok(None);
        }
    }

    fn search(
        depth: usize,
        free: &[usize],
        steps: usize,
        values: &mut [Option<Probability>],
        consistent_at: &dyn Fn(&[Option<Probability>], usize) -> bool,
    ) -> bool {
        let Some(&v) = free.get(depth) else {
            return true;
        };
        for k in 0..=steps {
            values[v] = Some(Probability::saturating(k as f64 / steps as f64));
            if consistent_at(values, v) && search(depth + 1, free, steps, values, consistent_at) {
                return true;
            }
        }
        values[v] = None;
        false
    }

    if search(0, &free, steps, &mut values, &consistent_at) {
        let values = values
            .into_iter()
            .map(|p| p.expect("all assigned"))
            .collect();
        Ok(Some(Mechanism::new(graph, values)?))
    } else {
        Ok(None)
    }
}
