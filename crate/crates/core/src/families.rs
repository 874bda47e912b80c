//! Deterministic graph pairs that separate the refinement variants, and a
//! search for distance-two cliques.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::graph::{LabeledGraph, MultiRelGraph};

/// Bound on `C(n, size)` for [`find_distance_two_clique`].
pub const DEFAULT_CLIQUE_CAP: u128 = 100_000_000;

/// Vertices `v, w, u1, u2` as ids `0..4`. Relation 0 holds `v-u1, w-u2`,
/// relation 1 holds `v-u2, w-u1`; labels are `0, 0, 1, 2`.
pub fn gen_prop3() -> MultiRelGraph {
    MultiRelGraph::new(
        4,
        &[vec![(0, 2), (1, 3)], vec![(0, 3), (1, 2)]],
        vec![0, 0, 1, 2],
    )
    .expect("fixed graph is valid")
}

fn check_relations(r: usize) -> Result<()> {
    if r == 0 {
        return Err(Error::contract("relation count r must be at least 1"));
    }
    Ok(())
}

/// The six-cycle and two disjoint triangles, every relation a copy of the edge set.
pub fn gen_cycle_pair(r: usize) -> Result<(MultiRelGraph, MultiRelGraph)> {
    check_relations(r)?;
    let cycle: Vec<_> = (0..6).map(|i| (i, (i + 1) % 6)).collect();
    let triangles = vec![(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3)];
    Ok((
        MultiRelGraph::unlabeled(6, &vec![cycle; r])?,
        MultiRelGraph::unlabeled(6, &vec![triangles; r])?,
    ))
}

/// The pair `(G_k, H_k)` built over the complete graph on `k + 1` base vertices.
///
/// Every base vertex `v` contributes one vertex per even subset `S` of its
/// incident base edges (odd subsets for base vertex 0 in `H_k`), each base
/// edge `e` contributes `e^0` and `e^1`. `(v, S)` is joined to `e^1` for
/// `e in S` and to `e^0` for the other edges at `v`; `e^0 - e^1` is an edge.
/// Pair vertices come first, ordered by base vertex then subset bitmask (bit
/// `i` is the `i`-th incident edge in `(min, max)` order), then `e^0, e^1`
/// for each base edge in `(min, max)` order.
pub fn gen_gk_hk(k: usize) -> Result<(LabeledGraph, LabeledGraph)> {
    if k < 2 {
        return Err(Error::contract(format!("G_k/H_k needs k >= 2, got {k}")));
    }
    if k > 16 {
        return Err(Error::contract(format!(
            "G_k/H_k with k = {k} is too large"
        )));
    }
    Ok((build_gk(k, false)?, build_gk(k, true)?))
}

fn build_gk(k: usize, odd_at_zero: bool) -> Result<LabeledGraph> {
    let base = k + 1;
    let base_edges: Vec<(usize, usize)> = (0..base)
        .flat_map(|a| (a + 1..base).map(move |b| (a, b)))
        .collect();
    let incident: Vec<Vec<usize>> = (0..base)
        .map(|v| {
            (0..base_edges.len())
                .filter(|&e| base_edges[e].0 == v || base_edges[e].1 == v)
                .collect()
        })
        .collect();

    let mut pair_vertices = Vec::new();
    for v in 0..base {
        let want_odd = odd_at_zero && v == 0;
        for mask in 0u32..(1 << k) {
            if (mask.count_ones() % 2 == 1) == want_odd {
                pair_vertices.push((v, mask));
            }
        }
    }
    let edge_vertex = |e: usize, sup: usize| pair_vertices.len() + 2 * e + sup;
    let n = pair_vertices.len() + 2 * base_edges.len();

    let mut edges = Vec::new();
    for (id, &(v, mask)) in pair_vertices.iter().enumerate() {
        for (bit, &e) in incident[v].iter().enumerate() {
            let sup = ((mask >> bit) & 1) as usize;
            edges.push((id, edge_vertex(e, sup)));
        }
    }
    for e in 0..base_edges.len() {
        edges.push((edge_vertex(e, 0), edge_vertex(e, 1)));
    }
    LabeledGraph::unlabeled(n, &edges)
}

/// `(G_k, H_k)` with each of the `r` relations equal to the full edge set.
pub fn gen_lifted(k: usize, r: usize) -> Result<(MultiRelGraph, MultiRelGraph)> {
    check_relations(r)?;
    let (g, h) = gen_gk_hk(k)?;
    Ok((replicate(&g, r), replicate(&h, r)))
}

fn replicate(g: &LabeledGraph, r: usize) -> MultiRelGraph {
    let edges: Vec<_> = g.adjacency().edges().collect();
    MultiRelGraph::new(g.vertex_count(), &vec![edges; r], g.labels().to_vec())
        .expect("copies of a valid edge set are valid")
}

fn bfs_distances(g: &LabeledGraph, source: usize) -> Vec<usize> {
    let mut dist = vec![usize::MAX; g.vertex_count()];
    dist[source] = 0;
    let mut queue = VecDeque::from([source]);
    while let Some(v) = queue.pop_front() {
        for &u in g.neighbors(v) {
            if dist[u] == usize::MAX {
                dist[u] = dist[v] + 1;
                queue.push_back(u);
            }
        }
    }
    dist
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| {
        acc.saturating_mul((n - i) as u128) / (i as u128 + 1)
    })
}

/// The lexicographically least set of `size` vertices at pairwise
/// shortest-path distance exactly 2, if any.
pub fn find_distance_two_clique(g: &LabeledGraph, size: usize) -> Result<Option<Vec<usize>>> {
    find_distance_two_clique_with_cap(g, size, DEFAULT_CLIQUE_CAP)
}

pub fn find_distance_two_clique_with_cap(
    g: &LabeledGraph,
    size: usize,
    cap: u128,
) -> Result<Option<Vec<usize>>> {
    let all: Vec<usize> = (0..g.vertex_count()).collect();
    find_distance_two_clique_among(g, size, &all, cap)
}

/// As [`find_distance_two_clique`], with members drawn from `candidates`
/// only. Distances are still measured in the whole graph.
pub fn find_distance_two_clique_among(
    g: &LabeledGraph,
    size: usize,
    candidates: &[usize],
    cap: u128,
) -> Result<Option<Vec<usize>>> {
    if size < 2 {
        return Err(Error::contract(
            "distance-two clique size must be at least 2",
        ));
    }
    let n = g.vertex_count();
    if let Some(&v) = candidates.iter().find(|&&v| v >= n) {
        return Err(Error::contract(format!(
            "candidate vertex {v} out of range"
        )));
    }
    let mut pool = candidates.to_vec();
    pool.sort_unstable();
    pool.dedup();
    let space = binomial(pool.len(), size);
    if space > cap {
        return Err(Error::CapExceeded {
            what: "distance-two clique search (vertex subsets)",
            needed: space,
            cap,
        });
    }
    let mut rows: Vec<Option<Vec<usize>>> = vec![None; n];
    let mut at_two =
        |a: usize, b: usize| -> bool { rows[a].get_or_insert_with(|| bfs_distances(g, a))[b] == 2 };
    let mut chosen = Vec::with_capacity(size);
    Ok(extend_clique(&pool, size, 0, &mut chosen, &mut at_two).then_some(chosen))
}

fn extend_clique(
    pool: &[usize],
    size: usize,
    from: usize,
    chosen: &mut Vec<usize>,
    at_two: &mut impl FnMut(usize, usize) -> bool,
) -> bool {
    if chosen.len() == size {
        return true;
    }
    for i in from..pool.len() {
        if pool.len() - i < size - chosen.len() {
            break;
        }
        let v = pool[i];
        if chosen.iter().all(|&u| at_two(u, v)) {
            chosen.push(v);
            if extend_clique(pool, size, i + 1, chosen, at_two) {
                return true;
            }
            chosen.pop();
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::iso::brute_force_isomorphic;
    use crate::wl::{self, initial_coloring, ColorDictionary, RefineOptions, Variant};

    #[test]
    fn prop3_shape() {
        let g = gen_prop3();
        assert_eq!(g.vertex_count(), 4);
        assert_eq!(g.relation_count(), 2);
        assert!(g.relations().iter().all(|a| a.edge_count() == 2));
    }

    #[test]
    fn prop3_relational_separates_weak_does_not() {
        let g = gen_prop3();
        let c0 = initial_coloring(&g, &mut ColorDictionary::new());
        let c1 = wl::step_1rwl(&g, &c0, &mut ColorDictionary::new()).unwrap();
        assert_ne!(c1.colors[0], c1.colors[1]);
        let opts = RefineOptions::default();
        let (weak, _) = wl::stable_coloring(&g, Variant::WeakOneRwl, 1, &opts).unwrap();
        assert_eq!(weak.colors()[0], weak.colors()[1]);
        assert_eq!(weak.class_count(), 3);
        let (rel, _) = wl::stable_coloring(&g, Variant::OneRwl, 1, &opts).unwrap();
        assert_eq!(rel.class_count(), 4);
    }

    #[test]
    fn prop3_pair_atomic_types() {
        // (v, u1) and (w, u2) are both joined by relation 0, (w, u1) by relation 1;
        // u1 and u2 carry different labels.
        let g = gen_prop3();
        let tc = wl::init_krlwl(&g, 2).unwrap();
        assert_ne!(tc.color_of(&[0, 2]), tc.color_of(&[1, 3]));
        assert_ne!(tc.color_of(&[0, 2]), tc.color_of(&[1, 2]));
        let unlabeled =
            MultiRelGraph::unlabeled(4, &[vec![(0, 2), (1, 3)], vec![(0, 3), (1, 2)]]).unwrap();
        let tc = wl::init_krlwl(&unlabeled, 2).unwrap();
        assert_eq!(tc.color_of(&[0, 2]), tc.color_of(&[1, 3]));
        assert_ne!(tc.color_of(&[0, 2]), tc.color_of(&[1, 2]));
        // diagonal, relation 0, relation 1, non-adjacent
        assert_eq!(tc.class_count, 4);
    }

    #[test]
    fn cycle_pair_shape() {
        for r in 1..=3 {
            let (g, h) = gen_cycle_pair(r).unwrap();
            for x in [&g, &h] {
                assert_eq!(x.vertex_count(), 6);
                assert_eq!(x.relation_count(), r);
                for a in x.relations() {
                    assert_eq!(a.edge_count(), 6);
                    assert!((0..6).all(|v| a.degree(v) == 2));
                }
            }
            assert!(!brute_force_isomorphic(&g, &h).unwrap());
        }
        assert!(gen_cycle_pair(0).is_err());
    }

    #[test]
    fn gk_hk_counts() {
        let (g, h) = gen_gk_hk(2).unwrap();
        assert_eq!(g.vertex_count(), 12);
        assert_eq!(g.edge_count(), 15);
        for k in 2..=3 {
            let (g, h) = gen_gk_hk(k).unwrap();
            assert_eq!(g.vertex_count(), h.vertex_count());
            assert_eq!(g.edge_count(), h.edge_count());
        }
        assert_eq!(h.vertex_count(), 12);
        assert!(gen_gk_hk(1).is_err());
    }

    fn pair_vertices(g: &LabeledGraph, k: usize) -> Vec<usize> {
        (0..g.vertex_count())
            .filter(|&v| g.adjacency().degree(v) == k)
            .collect()
    }

    fn is_distance_two_clique(g: &LabeledGraph, set: &[usize]) -> bool {
        set.iter().enumerate().all(|(i, &a)| {
            let d = bfs_distances(g, a);
            set[i + 1..].iter().all(|&b| d[b] == 2)
        })
    }

    #[test]
    fn pair_vertex_cliques_tell_g2_from_h2() {
        let (g, h) = gen_gk_hk(2).unwrap();
        let (pg, ph) = (pair_vertices(&g, 2), pair_vertices(&h, 2));
        assert_eq!(pg, (0..6).collect::<Vec<_>>());
        assert_eq!(ph, pg);
        let cap = DEFAULT_CLIQUE_CAP;
        let witness = find_distance_two_clique_among(&g, 3, &pg, cap)
            .unwrap()
            .unwrap();
        assert!(is_distance_two_clique(&g, &witness));
        assert_eq!(
            find_distance_two_clique_among(&h, 3, &ph, cap).unwrap(),
            None
        );
    }

    /// One pair vertex per base vertex; pair vertices of base vertex `v`
    /// occupy ids `v * 2^(k-1) .. (v + 1) * 2^(k-1)`.
    fn has_transversal_clique(g: &LabeledGraph, k: usize) -> bool {
        let block = 1usize << (k - 1);
        let total = block.pow(k as u32 + 1);
        (0..total).any(|code| {
            let set: Vec<usize> = (0..=k)
                .map(|v| v * block + (code / block.pow(v as u32)) % block)
                .collect();
            is_distance_two_clique(g, &set)
        })
    }

    #[test]
    fn transversal_cliques_tell_gk_from_hk() {
        for k in 2..=3 {
            let (g, h) = gen_gk_hk(k).unwrap();
            assert!(has_transversal_clique(&g, k));
            assert!(!has_transversal_clique(&h, k));
        }
    }

    #[test]
    fn edge_vertices_join_distance_two_cliques() {
        // (0,{e0}) and (1,E(1)) share e0^1, and e0^0 hangs off e0^1.
        let (g, h) = gen_gk_hk(2).unwrap();
        assert!(find_distance_two_clique(&g, 3).unwrap().is_some());
        let witness = find_distance_two_clique(&h, 3).unwrap().unwrap();
        assert_eq!(witness, vec![0, 3, 6]);
        assert!(is_distance_two_clique(&h, &witness));
    }

    #[test]
    fn complete_graph_has_no_distance_two_pair() {
        let k3 = LabeledGraph::unlabeled(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        assert_eq!(find_distance_two_clique(&k3, 2).unwrap(), None);
        let path = LabeledGraph::unlabeled(3, &[(0, 1), (1, 2)]).unwrap();
        assert_eq!(
            find_distance_two_clique(&path, 2).unwrap(),
            Some(vec![0, 2])
        );
        assert!(find_distance_two_clique_with_cap(&k3, 2, 2)
            .unwrap_err()
            .is_refusal());
    }

    #[test]
    fn lifted_shape() {
        let (g, h) = gen_lifted(2, 3).unwrap();
        assert_eq!(g.vertex_count(), 12);
        assert_eq!(g.relation_count(), 3);
        assert!(g.relations().iter().all(|a| a.edge_count() == 15));
        assert_eq!(h.relation_count(), 3);
    }

    #[test]
    fn generators_are_pure() {
        assert_eq!(gen_gk_hk(3).unwrap(), gen_gk_hk(3).unwrap());
        assert_eq!(
            serde_json::to_string(&gen_lifted(2, 2).unwrap().1.to_dump()).unwrap(),
            serde_json::to_string(&gen_lifted(2, 2).unwrap().1.to_dump()).unwrap()
        );
    }
}
