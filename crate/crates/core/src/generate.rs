//! Instance generators: hypercubes, paths and random instances.

use std::collections::BTreeMap;

use crate::bounds::{Epsilon, Probability};
use crate::error::{Error, Result};
use crate::extend::PartialMechanism;
use crate::graph::{boundary_set, DatasetGraph, Label, QueryAssignment};
use crate::io::Instance;

/// How hypercube vertices are labelled from the number of `1` coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QueryRule {
    /// `1` if more than half the coordinates are `1`. Odd dimensions only.
    Majority,
    /// Majority, with exact ties sent to the given label.
    MajorityTiesTo(Label),
}

/// Values given to the boundary set of a generated hypercube.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeedRule {
    /// No partial mechanism.
    None,
    /// Randomized response at the smallest edge budget `ε_m`:
    /// `e^{ε_m} / (1 + e^{ε_m})` on label 1 and `1 / (1 + e^{ε_m})` on label 2.
    RandomizedResponse,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HypercubeSpec {
    pub n: usize,
    pub eps_default: f64,
    /// Budget per flipped coordinate; overrides `eps_default`.
    pub coordinate_eps: Option<Vec<f64>>,
    /// Budgets for individual edges, applied last.
    pub overrides: Vec<(String, String, f64)>,
    pub query_rule: QueryRule,
    pub seeds: SeedRule,
}

impl HypercubeSpec {
    pub fn new(n: usize, eps: f64) -> Self {
        HypercubeSpec {
            n,
            eps_default: eps,
            coordinate_eps: None,
            overrides: Vec::new(),
            query_rule: if n % 2 == 1 {
                QueryRule::Majority
            } else {
                QueryRule::MajorityTiesTo(Label::Two)
            },
            seeds: SeedRule::RandomizedResponse,
        }
    }
}

fn vertex_id(bits: usize, n: usize) -> String {
    (0..n)
        .map(|k| {
            if bits >> (n - 1 - k) & 1 == 0 {
                '1'
            } else {
                '2'
            }
        })
        .collect()
}

/// The graph on `{1,2}^n` with an edge between strings at Hamming distance 1.
pub fn generate_hypercube(spec: &HypercubeSpec) -> Result<Instance> {
    let n = spec.n;
    if n == 0 {
        return Err(Error::ZeroDimension);
    }
    if n.is_multiple_of(2) && spec.query_rule == QueryRule::Majority {
        return Err(Error::EvenDimension(n));
    }
    if let Some(c) = &spec.coordinate_eps {
        if c.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                actual: c.len(),
            });
        }
    }
    let count = 1usize << n;
    let ids: Vec<String> = (0..count).map(|b| vertex_id(b, n)).collect();

    let mut budgets: BTreeMap<(String, String), f64> = BTreeMap::new();
    for b in 0..count {
        for k in 0..n {
            let flip = 1 << (n - 1 - k);
            if b & flip == 0 {
                let eps = spec
                    .coordinate_eps
                    .as_ref()
                    .map_or(spec.eps_default, |c| c[k]);
                budgets.insert((ids[b].clone(), ids[b | flip].clone()), eps);
            }
        }
    }
    for (a, b, eps) in &spec.overrides {
        let key = if a < b {
            (a.clone(), b.clone())
        } else {
            (b.clone(), a.clone())
        };
        match budgets.get_mut(&key) {
            Some(slot) => *slot = *eps,
            None => return Err(Error::UnknownOverrideEdge(a.clone(), b.clone())),
        }
    }
    let min_eps = budgets.values().copied().fold(f64::INFINITY, f64::min);
    let graph = DatasetGraph::new(
        ids.iter().map(String::as_str),
        budgets
            .iter()
            .map(|((a, b), &e)| (a.as_str(), b.as_str(), e)),
    )?;

    let labels = (0..graph.len())
        .map(|v| {
            let ones = graph.name(v).bytes().filter(|&c| c == b'1').count();
            match (2 * ones).cmp(&n) {
                std::cmp::Ordering::Greater => Label::One,
                std::cmp::Ordering::Less => Label::Two,
                std::cmp::Ordering::Equal => match spec.query_rule {
                    QueryRule::MajorityTiesTo(l) => l,
                    QueryRule::Majority => unreachable!("odd dimension has no ties"),
                },
            }
        })
        .collect();
    let query = QueryAssignment::from_labels(&graph, labels)?;

    let partial = match spec.seeds {
        SeedRule::None => None,
        SeedRule::RandomizedResponse => {
            let e = Epsilon::new(min_eps)?.exp();
            let high = Probability::new(e / (1.0 + e))?;
            let low = Probability::new(1.0 / (1.0 + e))?;
            let mut partial = PartialMechanism::empty(&graph);
            for v in boundary_set(&graph, &query).iter() {
                let p = match query.label(v) {
                    Label::One => high,
                    Label::Two => low,
                };
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

/// Path `v0 - v1 - … - vn` with budgets `eps`, every vertex labelled 1 and
/// `v0` seeded with `alpha`. Identifiers are zero-padded so that their
/// lexicographic order is the path order.
pub fn generate_path(n: usize, alpha: f64, eps: &[f64]) -> Result<Instance> {
    if eps.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: eps.len(),
        });
    }
    let width = n.to_string().len();
    let ids: Vec<String> = (0..=n).map(|i| format!("v{i:0width$}")).collect();
    let graph = DatasetGraph::new(
        ids.iter().map(String::as_str),
        eps.iter()
            .enumerate()
            .map(|(i, &e)| (ids[i].as_str(), ids[i + 1].as_str(), e)),
    )?;
    let query = QueryAssignment::constant(&graph, Label::One);
    let mut partial = PartialMechanism::empty(&graph);
    partial.set(0, Probability::new(alpha)?);
    Ok(Instance {
        graph,
        query,
        partial: Some(partial),
    })
}

/// Random instances for tests and benchmarks.
pub mod random {
    use std::collections::{HashSet, VecDeque};

    use rand::seq::SliceRandom;
    use rand::Rng;

    use super::*;
    use crate::propagate::strongest_bounds_multi;

    /// Connected graph on `n` vertices: a random tree plus up to `extra`
    /// further edges, budgets uniform in `eps_range`.
    pub fn connected_graph<R: Rng>(
        rng: &mut R,
        n: usize,
        extra: usize,
        eps_range: (f64, f64),
    ) -> DatasetGraph {
        assert!(n > 0);
        let width = (n.max(2) - 1).to_string().len();
        let ids: Vec<String> = (0..n).map(|i| format!("x{i:0width$}")).collect();
        let mut pairs: Vec<(usize, usize)> = Vec::new();
        let mut seen = HashSet::new();
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);
        for i in 1..n {
            let j = rng.gen_range(0..i);
            let (a, b) = (order[i].min(order[j]), order[i].max(order[j]));
            seen.insert((a, b));
            pairs.push((a, b));
        }
        let room = n * (n - 1) / 2 - pairs.len();
        for _ in 0..extra.min(room) {
            loop {
                let a = rng.gen_range(0..n);
                let b = rng.gen_range(0..n);
                if a != b && seen.insert((a.min(b), a.max(b))) {
                    pairs.push((a.min(b), a.max(b)));
                    break;
                }
            }
        }
        let edges: Vec<(&str, &str, f64)> = pairs
            .iter()
            .map(|&(a, b)| {
                let eps = if eps_range.0 == eps_range.1 {
                    eps_range.0
                } else {
                    rng.gen_range(eps_range.0..=eps_range.1)
                };
                (ids[a].as_str(), ids[b].as_str(), eps)
            })
            .collect();
        DatasetGraph::new(ids.iter().map(String::as_str), edges).expect("tree is connected")
    }

    /// Labels every vertex by its nearest (in hops) of `centers` random
    /// centers; centers alternate between the two labels, ties go to the
    /// earlier center.
    pub fn clustered_query<R: Rng>(
        rng: &mut R,
        graph: &DatasetGraph,
        centers: usize,
    ) -> QueryAssignment {
        let n = graph.len();
        let mut starts: Vec<usize> = (0..n).collect();
        starts.shuffle(rng);
        starts.truncate(centers.clamp(1, n));
        let mut label = vec![None; n];
        let mut queue = VecDeque::new();
        for (k, &s) in starts.iter().enumerate() {
            label[s] = Some(if k % 2 == 0 { Label::One } else { Label::Two });
            queue.push_back(s);
        }
        while let Some(u) = queue.pop_front() {
            for &(w, _) in graph.neighbors(u) {
                if label[w].is_none() {
                    label[w] = label[u];
                    queue.push_back(w);
                }
            }
        }
        QueryAssignment::from_labels(graph, label.into_iter().map(Option::unwrap).collect())
            .expect("one label per vertex")
    }

    /// A compatible partial mechanism on the boundary plus each other vertex
    /// with probability `extra_prob`.
    ///
    /// Draws label-1 values from `[0.5, 1]` and label-2 values from
    /// `[0, 0.5]`, then lowers every seed to the smallest bound the seeds
    /// induce on it, which makes the set compatible.
    pub fn compatible_partial<R: Rng>(
        rng: &mut R,
        graph: &DatasetGraph,
        query: &QueryAssignment,
        extra_prob: f64,
    ) -> PartialMechanism {
        let boundary = boundary_set(graph, query);
        let mut seeds = Vec::new();
        for v in 0..graph.len() {
            if boundary.contains(v) || rng.gen_bool(extra_prob) {
                let x = match query.label(v) {
                    Label::One => rng.gen_range(0.5..=1.0),
                    Label::Two => rng.gen_range(0.0..=0.5),
                };
                seeds.push((v, Probability::new(x).expect("in range")));
            }
        }
        let mut partial = PartialMechanism::empty(graph);
        if seeds.is_empty() {
            return partial;
        }
        let multi = strongest_bounds_multi(graph, &seeds).expect("valid seeds");
        for &(v, _) in &seeds {
            partial.set(v, multi.bounds[v]);
        }
        partial
    }

    /// Random connected instance with a compatible partial mechanism.
    pub fn compatible_instance<R: Rng>(
        rng: &mut R,
        n: usize,
        extra_edges: usize,
        eps_range: (f64, f64),
    ) -> Instance {
        let graph = connected_graph(rng, n, extra_edges, eps_range);
        let centers = rng.gen_range(2..=4);
        let query = clustered_query(rng, &graph, centers);
        let extra_prob = rng.gen_range(0.0..0.3);
        let partial = compatible_partial(rng, &graph, &query, extra_prob);
        Instance {
            graph,
            query,
            partial: Some(partial),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::random::*;
    use super::*;
    use crate::extend::{extend_mechanism, is_compatible, verify_dp, ExtendOptions};
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn hypercube_three() {
        let inst = generate_hypercube(&HypercubeSpec::new(3, 0.5)).unwrap();
        assert_eq!(inst.graph.len(), 8);
        assert_eq!(inst.graph.edge_count(), 12);
        assert_eq!(inst.graph.name(0), "111");
        assert_eq!(boundary_set(&inst.graph, &inst.query).len(), 6);
        let ext = extend_mechanism(
            &inst.graph,
            &inst.query,
            inst.partial.as_ref().unwrap(),
            &ExtendOptions::default(),
        )
        .unwrap();
        verify_dp(&inst.graph, &ext.mechanism, 1e-9).unwrap();
    }

    #[test]
    fn hypercube_errors() {
        assert_eq!(
            generate_hypercube(&HypercubeSpec::new(0, 0.5)),
            Err(Error::ZeroDimension)
        );
        let mut spec = HypercubeSpec::new(4, 0.5);
        spec.query_rule = QueryRule::Majority;
        assert_eq!(generate_hypercube(&spec), Err(Error::EvenDimension(4)));

        let mut spec = HypercubeSpec::new(3, 0.5);
        spec.coordinate_eps = Some(vec![0.1, 0.2]);
        assert_eq!(
            generate_hypercube(&spec),
            Err(Error::LengthMismatch {
                expected: 3,
                actual: 2
            })
        );

        let mut spec = HypercubeSpec::new(3, 0.5);
        spec.overrides.push(("111".into(), "222".into(), 1.0));
        assert_eq!(
            generate_hypercube(&spec),
            Err(Error::UnknownOverrideEdge("111".into(), "222".into()))
        );
    }

    #[test]
    fn hypercube_budgets() {
        let mut spec = HypercubeSpec::new(3, 0.5);
        spec.coordinate_eps = Some(vec![0.1, 0.2, 0.3]);
        spec.overrides.push(("211".into(), "111".into(), 2.0));
        let g = generate_hypercube(&spec).unwrap().graph;
        let eps = |a, b| g.epsilon(g.index_of(a).unwrap(), g.index_of(b).unwrap());
        assert_eq!(eps("111", "211").unwrap().value(), 2.0);
        assert_eq!(eps("121", "221").unwrap().value(), 0.1);
        assert_eq!(eps("112", "122").unwrap().value(), 0.2);
        assert_eq!(eps("221", "222").unwrap().value(), 0.3);
    }

    #[test]
    fn path_ids_sort_in_path_order() {
        let inst = generate_path(10, 0.1, &[0.5; 10]).unwrap();
        assert_eq!(inst.graph.name(0), "v00");
        assert_eq!(inst.graph.name(10), "v10");
        assert!(inst.graph.epsilon(9, 10).is_some());
        assert_eq!(
            generate_path(2, 0.1, &[0.5]),
            Err(Error::LengthMismatch {
                expected: 2,
                actual: 1
            })
        );
    }

    #[test]
    fn random_instances_are_compatible() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let n = rng.gen_range(1..30);
            let inst = compatible_instance(&mut rng, n, n / 2, (0.0, 2.0));
            let partial = inst.partial.as_ref().unwrap();
            assert!(is_compatible(&inst.graph, partial, 1e-12).is_ok());
            extend_mechanism(&inst.graph, &inst.query, partial, &ExtendOptions::default()).unwrap();
        }
    }
}
