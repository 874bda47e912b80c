//! Exhaustive isomorphism test used as ground truth for small graphs.

use crate::error::{Error, Result};
use crate::graph::MultiRelGraph;

pub const DEFAULT_ISO_CAP: usize = 10;

/// True iff some bijection preserves labels and every relation.
///
/// Graphs with different vertex or relation counts are simply not
/// isomorphic. Refuses graphs above [`DEFAULT_ISO_CAP`] vertices.
pub fn brute_force_isomorphic(g: &MultiRelGraph, h: &MultiRelGraph) -> Result<bool> {
    brute_force_isomorphic_with_cap(g, h, DEFAULT_ISO_CAP)
}

pub fn brute_force_isomorphic_with_cap(
    g: &MultiRelGraph,
    h: &MultiRelGraph,
    cap: usize,
) -> Result<bool> {
    let n = g.vertex_count();
    if n != h.vertex_count() || g.relation_count() != h.relation_count() {
        return Ok(false);
    }
    if n > cap {
        return Err(Error::CapExceeded {
            what: "isomorphism search (vertices)",
            needed: n as u128,
            cap: cap as u128,
        });
    }
    Ok(find_isomorphism(g, h).is_some())
}

/// Per-vertex invariant used to prune candidates: label and per-relation degree.
fn signature(g: &MultiRelGraph, v: usize) -> Vec<usize> {
    let mut sig = Vec::with_capacity(g.relation_count() + 1);
    sig.push(g.label(v) as usize);
    sig.extend(g.relations().iter().map(|a| a.degree(v)));
    sig
}

/// Returns `phi` with `phi[v]` the image of `v` in `h`, if one exists.
pub fn find_isomorphism(g: &MultiRelGraph, h: &MultiRelGraph) -> Option<Vec<usize>> {
    let n = g.vertex_count();
    if n != h.vertex_count() || g.relation_count() != h.relation_count() {
        return None;
    }
    let sig_g: Vec<_> = (0..n).map(|v| signature(g, v)).collect();
    let sig_h: Vec<_> = (0..n).map(|v| signature(h, v)).collect();
    let mut sorted_g = sig_g.clone();
    let mut sorted_h = sig_h.clone();
    sorted_g.sort();
    sorted_h.sort();
    if sorted_g != sorted_h {
        return None;
    }

    let candidates: Vec<Vec<usize>> = (0..n)
        .map(|v| (0..n).filter(|&w| sig_g[v] == sig_h[w]).collect())
        .collect();
    // most constrained vertices first
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&v| (candidates[v].len(), v));

    let mut search = Search {
        g,
        h,
        order: &order,
        candidates: &candidates,
        image: vec![usize::MAX; n],
        used: vec![false; n],
    };
    search.extend(0).then_some(search.image)
}

struct Search<'a> {
    g: &'a MultiRelGraph,
    h: &'a MultiRelGraph,
    order: &'a [usize],
    candidates: &'a [Vec<usize>],
    image: Vec<usize>,
    used: Vec<bool>,
}

impl Search<'_> {
    fn extend(&mut self, depth: usize) -> bool {
        if depth == self.order.len() {
            return true;
        }
        let v = self.order[depth];
        for &w in &self.candidates[v] {
            if self.used[w] || !self.consistent(depth, v, w) {
                continue;
            }
            self.image[v] = w;
            self.used[w] = true;
            if self.extend(depth + 1) {
                return true;
            }
            self.used[w] = false;
            self.image[v] = usize::MAX;
        }
        false
    }

    /// Mapping `v -> w` agrees with every already-mapped vertex on every relation.
    fn consistent(&self, depth: usize, v: usize, w: usize) -> bool {
        self.order[..depth].iter().all(|&u| {
            let x = self.image[u];
            self.g
                .relations()
                .iter()
                .zip(self.h.relations())
                .all(|(a, b)| a.contains(v, u) == b.contains(w, x))
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cycle(n: usize) -> Vec<(usize, usize)> {
        (0..n).map(|i| (i, (i + 1) % n)).collect()
    }

    #[test]
    fn identity_and_mismatch() {
        let g = MultiRelGraph::unlabeled(6, &[cycle(6)]).unwrap();
        assert!(brute_force_isomorphic(&g, &g).unwrap());
        let h =
            MultiRelGraph::unlabeled(6, &[vec![(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3)]])
                .unwrap();
        assert!(!brute_force_isomorphic(&g, &h).unwrap());
        let small = MultiRelGraph::unlabeled(5, &[cycle(5)]).unwrap();
        assert!(!brute_force_isomorphic(&g, &small).unwrap());
    }

    #[test]
    fn relation_swap_matters() {
        let g = MultiRelGraph::unlabeled(3, &[vec![(0, 1)], vec![(1, 2)]]).unwrap();
        let h = MultiRelGraph::unlabeled(3, &[vec![(1, 2)], vec![(0, 1)]]).unwrap();
        assert!(brute_force_isomorphic(&g, &h).unwrap());
        let k = MultiRelGraph::unlabeled(3, &[vec![(0, 1), (1, 2)], vec![]]).unwrap();
        assert!(!brute_force_isomorphic(&g, &k).unwrap());
    }

    #[test]
    fn labels_must_match() {
        let g = MultiRelGraph::new(2, &[vec![(0, 1)]], vec![0, 1]).unwrap();
        let h = MultiRelGraph::new(2, &[vec![(0, 1)]], vec![0, 0]).unwrap();
        assert!(!brute_force_isomorphic(&g, &h).unwrap());
    }

    #[test]
    fn refuses_above_cap() {
        let g = MultiRelGraph::unlabeled(11, &[cycle(11)]).unwrap();
        let err = brute_force_isomorphic(&g, &g).unwrap_err();
        assert!(err.is_refusal());
        assert!(brute_force_isomorphic_with_cap(&g, &g, 11).unwrap());
    }

    #[test]
    fn witness_is_an_isomorphism() {
        let g =
            MultiRelGraph::new(4, &[vec![(0, 1), (1, 2)], vec![(2, 3)]], vec![1, 0, 0, 2]).unwrap();
        let h = g.permuted(&[3, 1, 0, 2]).unwrap();
        let phi = find_isomorphism(&g, &h).unwrap();
        assert_eq!(g.permuted(&phi).unwrap(), h);
    }
}
