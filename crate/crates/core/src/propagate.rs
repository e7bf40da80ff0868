//! Strongest induced bounds by greedy frontier settling.
//!
//! A value `α` fixed at `source` caps every other vertex `v` by the minimum,
//! over all `(source, v)`-paths, of the path-folded edge bound. Because every
//! edge map satisfies `B_ε(x) ≥ x` and is monotone, the minimum can be settled
//! greedily in nondecreasing order, exactly like shortest paths with
//! nonnegative weights.
//!
//! Ties in the settle order are broken by smallest vertex index, and ties
//! between equally good predecessors by smallest predecessor index, so the
//! heap and the naive schedules produce identical maps.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::bounds::{edge_upper_bound, Probability};
use crate::error::{Error, Result};
use crate::graph::DatasetGraph;

/// Strongest bounds induced by one source, with a witness tree.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundMap {
    pub source: usize,
    pub alpha: Probability,
    /// `A_{source, α}(v)` indexed by vertex.
    pub bounds: Vec<Probability>,
    /// Previous vertex on a path attaining the bound; `source` maps to itself.
    pub predecessor: Vec<usize>,
    /// Vertices in the order they were settled.
    pub settle_order: Vec<usize>,
}

impl BoundMap {
    /// Vertex sequence from the source to `v` along the witness tree.
    pub fn witness_path(&self, v: usize) -> Vec<usize> {
        let mut path = vec![v];
        let mut cur = v;
        while cur != self.source {
            cur = self.predecessor[cur];
            path.push(cur);
        }
        path.reverse();
        path
    }
}

/// Pointwise minimum of the bounds induced by several seeds.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiBoundMap {
    pub bounds: Vec<Probability>,
    /// A seed attaining `bounds[v]`; smallest index among ties.
    pub origin: Vec<usize>,
    /// Previous vertex on the attaining path; seeds that keep their own value
    /// map to themselves.
    pub predecessor: Vec<usize>,
}

#[derive(Clone, Copy, Debug)]
struct Entry {
    bound: f64,
    vertex: usize,
    origin: usize,
    pred: usize,
}

impl Entry {
    fn key(&self) -> (f64, usize, usize, usize) {
        (self.bound, self.vertex, self.origin, self.pred)
    }
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Entry {}

impl Ord for Entry {
    // reversed for a min-heap
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b) = (self.key(), other.key());
        b.0.total_cmp(&a.0)
            .then(b.1.cmp(&a.1))
            .then(b.2.cmp(&a.2))
            .then(b.3.cmp(&a.3))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

struct Settled {
    bounds: Vec<Probability>,
    origin: Vec<usize>,
    predecessor: Vec<usize>,
    order: Vec<usize>,
}

/// Lazy-deletion priority queue schedule shared by the single and multi
/// source variants.
fn settle_with_heap(graph: &DatasetGraph, seeds: &[(usize, Probability)]) -> Settled {
    let n = graph.len();
    let mut bounds = vec![Probability::ONE; n];
    let mut origin = vec![usize::MAX; n];
    let mut predecessor = vec![usize::MAX; n];
    let mut done = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut heap = BinaryHeap::with_capacity(n);
    // best pending key per vertex, to skip pushes that cannot win
    let mut best = vec![f64::INFINITY; n];

    for &(s, alpha) in seeds {
        best[s] = best[s].min(alpha.get());
        heap.push(Entry {
            bound: alpha.get(),
            vertex: s,
            origin: s,
            pred: s,
        });
    }

    while let Some(Entry {
        bound,
        vertex,
        origin: o,
        pred,
    }) = heap.pop()
    {
        if done[vertex] {
            continue;
        }
        done[vertex] = true;
        let value = Probability::saturating(bound);
        bounds[vertex] = value;
        origin[vertex] = o;
        predecessor[vertex] = pred;
        order.push(vertex);
        for &(w, eps) in graph.neighbors(vertex) {
            if done[w] {
                continue;
            }
            let cand = edge_upper_bound(value, eps).get();
            if cand <= best[w] {
                best[w] = cand;
                heap.push(Entry {
                    bound: cand,
                    vertex: w,
                    origin: o,
                    pred: vertex,
                });
            }
        }
    }
    Settled {
        bounds,
        origin,
        predecessor,
        order,
    }
}

/// Strongest bounds induced by `alpha` at `source`, priority-queue schedule.
pub fn strongest_bounds_from(
    graph: &DatasetGraph,
    source: usize,
    alpha: Probability,
) -> Result<BoundMap> {
    graph.check_index(source)?;
    let settled = settle_with_heap(graph, &[(source, alpha)]);
    Ok(BoundMap {
        source,
        alpha,
        bounds: settled.bounds,
        predecessor: settled.predecessor,
        settle_order: settled.order,
    })
}

/// Same contract as [`strongest_bounds_from`], scheduled by a linear scan of
/// the frontier on every step (`O(|V|² + |E|)`).
///
/// Each frontier vertex keeps `α*(v)`, the best bound offered by its settled
/// neighbors; the vertex with the smallest `α*` is settled next.
pub fn strongest_bounds_from_naive(
    graph: &DatasetGraph,
    source: usize,
    alpha: Probability,
) -> Result<BoundMap> {
    graph.check_index(source)?;
    let n = graph.len();
    let mut bounds = vec![Probability::ONE; n];
    let mut predecessor = vec![usize::MAX; n];
    let mut done = vec![false; n];
    // (α*, predecessor) for frontier vertices
    let mut offer: Vec<Option<(f64, usize)>> = vec![None; n];
    let mut order = Vec::with_capacity(n);

    offer[source] = Some((alpha.get(), source));
    for _ in 0..n {
        let mut pick: Option<(f64, usize, usize)> = None;
        for v in 0..n {
            if done[v] {
                continue;
            }
            if let Some((b, p)) = offer[v] {
                if pick.is_none_or(|(pb, _, _)| b < pb) {
                    pick = Some((b, v, p));
                }
            }
        }
        // connected graphs always have a next frontier vertex
        let (b, v, p) = pick.expect("graph is connected");
        done[v] = true;
        let value = Probability::saturating(b);
        bounds[v] = value;
        predecessor[v] = p;
        order.push(v);
        for &(w, eps) in graph.neighbors(v) {
            if done[w] {
                continue;
            }
            let cand = edge_upper_bound(value, eps).get();
            let better = match offer[w] {
                None => true,
                Some((ob, op)) => cand < ob || (cand == ob && v < op),
            };
            if better {
                offer[w] = Some((cand, v));
            }
        }
    }
    Ok(BoundMap {
        source,
        alpha,
        bounds,
        predecessor,
        settle_order: order,
    })
}

/// `min_u A_{u, seeds[u]}(v)` for every `v` in a single pass.
///
/// Seeds are not special-cased: a seed whose value exceeds the bound some
/// other seed induces on it ends up with that smaller bound.
pub fn strongest_bounds_multi(
    graph: &DatasetGraph,
    seeds: &[(usize, Probability)],
) -> Result<MultiBoundMap> {
    if seeds.is_empty() {
        return Err(Error::EmptySeeds);
    }
    for &(s, _) in seeds {
        graph.check_index(s)?;
    }
    let settled = settle_with_heap(graph, seeds);
    Ok(MultiBoundMap {
        bounds: settled.bounds,
        origin: settled.origin,
        predecessor: settled.predecessor,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::{path_upper_bound, Epsilon, EpsilonSeq};
    use crate::path::optimal_path_recurrence;

    const LN2: f64 = std::f64::consts::LN_2;

    fn p(x: f64) -> Probability {
        Probability::new(x).unwrap()
    }

    fn triangle() -> DatasetGraph {
        DatasetGraph::new(
            ["u", "v", "w"],
            [("u", "v", LN2), ("v", "w", LN2), ("u", "w", 8f64.ln())],
        )
        .unwrap()
    }

    fn close(a: Probability, b: f64) -> bool {
        (a.get() - b).abs() < 1e-12
    }

    #[test]
    fn triangle_prefers_two_hops() {
        let g = triangle();
        for run in [strongest_bounds_from, strongest_bounds_from_naive] {
            let m = run(&g, 0, p(0.1)).unwrap();
            assert!(close(m.bounds[0], 0.1));
            assert!(close(m.bounds[1], 0.2));
            assert!(close(m.bounds[2], 0.4));
            assert_eq!(m.witness_path(2), vec![0, 1, 2]);
            assert_eq!(m.settle_order, vec![0, 1, 2]);
        }
    }

    #[test]
    fn alpha_one_is_fixed_point() {
        let g = triangle();
        let m = strongest_bounds_from(&g, 1, Probability::ONE).unwrap();
        assert!(m.bounds.iter().all(|b| b.get() == 1.0));
    }

    #[test]
    fn single_edge() {
        let g = DatasetGraph::new(["u", "v"], [("u", "v", LN2)]).unwrap();
        let m = strongest_bounds_from(&g, 0, p(0.25)).unwrap();
        assert!(close(m.bounds[1], 0.5));
    }

    #[test]
    fn path_reduces_to_recurrence() {
        let names: Vec<String> = (0..5).map(|i| format!("v{i}")).collect();
        let edges: Vec<_> = (0..4)
            .map(|i| (names[i].clone(), names[i + 1].clone(), 0.9))
            .collect();
        let g = DatasetGraph::new(names, edges).unwrap();
        let rec = optimal_path_recurrence(p(0.05), &EpsilonSeq::new(&[0.9; 4]).unwrap());
        let m = strongest_bounds_from_naive(&g, 0, p(0.05)).unwrap();
        assert_eq!(m.bounds, rec.values);
    }

    #[test]
    fn unknown_source() {
        let g = triangle();
        assert!(matches!(
            strongest_bounds_from(&g, 3, p(0.1)),
            Err(Error::UnknownVertex(_))
        ));
        assert!(matches!(
            strongest_bounds_multi(&g, &[]),
            Err(Error::EmptySeeds)
        ));
    }

    #[test]
    fn multi_source_examples() {
        let g = triangle();
        let single = strongest_bounds_from(&g, 0, p(0.1)).unwrap();
        let multi = strongest_bounds_multi(&g, &[(0, p(0.1))]).unwrap();
        assert_eq!(multi.bounds, single.bounds);
        assert_eq!(multi.predecessor, single.predecessor);

        let multi = strongest_bounds_multi(&g, &[(0, p(0.1)), (2, p(0.05))]).unwrap();
        assert!(close(multi.bounds[2], 0.05));
        assert!(close(multi.bounds[1], 0.1));
        assert_eq!(multi.origin[1], 2);

        let g = DatasetGraph::new(["a", "b", "c"], [("a", "b", LN2), ("b", "c", LN2)]).unwrap();
        let multi = strongest_bounds_multi(&g, &[(2, p(0.1)), (0, p(0.1))]).unwrap();
        assert!(close(multi.bounds[1], 0.2));
        assert_eq!(multi.origin[1], 0);
    }

    #[test]
    fn zero_epsilon_edges_propagate_unchanged() {
        let g = DatasetGraph::new(
            ["a", "b", "c", "d"],
            [
                ("a", "b", 0.0),
                ("b", "c", 0.0),
                ("a", "d", 1.0),
                ("c", "d", 0.0),
            ],
        )
        .unwrap();
        let heap = strongest_bounds_from(&g, 0, p(0.3)).unwrap();
        let naive = strongest_bounds_from_naive(&g, 0, p(0.3)).unwrap();
        assert_eq!(heap, naive);
        assert!(heap.bounds.iter().all(|b| b.get() == 0.3));
    }

    #[test]
    fn witness_replays_to_bound() {
        let g =
            triangle().map_epsilon(|u, v, _| Epsilon::new(0.1 + (u + 2 * v) as f64 * 0.3).unwrap());
        let m = strongest_bounds_from(&g, 2, p(0.07)).unwrap();
        for v in 0..g.len() {
            let path = m.witness_path(v);
            let eps: Vec<_> = path
                .windows(2)
                .map(|w| g.epsilon(w[0], w[1]).unwrap())
                .collect();
            assert!((path_upper_bound(&eps, p(0.07)).get() - m.bounds[v].get()).abs() < 1e-12);
        }
    }
}
