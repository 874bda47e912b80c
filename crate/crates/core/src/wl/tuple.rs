//! Tuple refinement: local relational k-WL, local delta k-WL and oblivious k-WL.

use rayon::prelude::*;

use super::{check_len, Color, ColorDictionary, TupleColoring};
use crate::error::{Error, Result};
use crate::graph::{LabeledGraph, MultiRelGraph, RelationalView};

/// `n^k`, or `None` on overflow.
pub fn tuple_count(n: usize, k: usize) -> Option<usize> {
    u32::try_from(k).ok().and_then(|k| n.checked_pow(k))
}

/// Mixed-radix addressing of `V^k` with the first component most significant.
#[derive(Clone, Debug)]
pub struct TupleIndexer {
    n: usize,
    k: usize,
    /// `place[j] = n^(k-1-j)`
    place: Vec<usize>,
}

impl TupleIndexer {
    pub fn new(n: usize, k: usize) -> Self {
        let mut place = vec![1usize; k];
        for j in (0..k.saturating_sub(1)).rev() {
            place[j] = place[j + 1] * n;
        }
        TupleIndexer { n, k, place }
    }

    pub fn index(&self, tuple: &[usize]) -> usize {
        debug_assert_eq!(tuple.len(), self.k);
        tuple.iter().zip(&self.place).map(|(v, p)| v * p).sum()
    }

    pub fn decode(&self, mut index: usize, out: &mut [usize]) {
        for (slot, &p) in out.iter_mut().zip(&self.place) {
            *slot = index / p;
            index %= p;
        }
    }

    /// Index of the tuple with component `j` replaced by `w`.
    #[inline]
    pub fn substitute(&self, index: usize, tuple: &[usize], j: usize, w: usize) -> usize {
        index - tuple[j] * self.place[j] + w * self.place[j]
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> usize {
        self.k
    }
}

pub(crate) fn checked_tuple_count(n: usize, k: usize, cap: usize) -> Result<usize> {
    if k == 0 {
        return Err(Error::contract("tuple order k must be at least 1"));
    }
    match tuple_count(n, k) {
        Some(m) if m <= cap => Ok(m),
        _ => Err(Error::CapExceeded {
            what: "tuple coloring (n^k entries)",
            needed: (n as u128).saturating_pow(k.min(u32::MAX as usize) as u32),
            cap: cap as u128,
        }),
    }
}

/// Atomic type words of every tuple: labels, then for each position pair
/// `p < q` the equality bit followed by one adjacency bit per relation.
pub(crate) fn atp_signatures<G: RelationalView>(
    g: &G,
    k: usize,
    cap: usize,
) -> Result<Vec<Vec<u32>>> {
    let n = g.vertex_count();
    let total = checked_tuple_count(n, k, cap)?;
    let idx = TupleIndexer::new(n, k);
    let r = g.relation_count();
    Ok((0..total)
        .into_par_iter()
        .map_init(
            || vec![0usize; k],
            |tuple, t| {
                idx.decode(t, tuple);
                let mut sig = Vec::with_capacity(k + k * k * (r + 1) / 2);
                sig.extend(tuple.iter().map(|&v| g.label(v)));
                for p in 0..k {
                    for q in p + 1..k {
                        let (a, b) = (tuple[p], tuple[q]);
                        sig.push((a == b) as u32);
                        sig.extend((0..r).map(|i| g.relation(i).contains(a, b) as u32));
                    }
                }
                sig
            },
        )
        .collect())
}

/// Iteration-0 tuple coloring by atomic type, with ids from `dict`.
pub fn init_atp<G: RelationalView>(
    g: &G,
    k: usize,
    cap: usize,
    dict: &mut ColorDictionary,
) -> Result<TupleColoring> {
    let sigs = atp_signatures(g, k, cap)?;
    Ok(TupleColoring::new(
        k,
        g.vertex_count(),
        dict.relabel_all(&sigs),
        0,
    ))
}

/// Iteration-0 coloring of the local relational k-WL (multi-relational
/// atomic type), using the default tuple cap.
pub fn init_krlwl(g: &MultiRelGraph, k: usize) -> Result<TupleColoring> {
    init_atp(g, k, super::DEFAULT_TUPLE_CAP, &mut ColorDictionary::new())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum TupleRule {
    /// `j`-neighbors through `w` adjacent to `v_j`, tagged with the relation.
    Local,
    /// Every `j`-neighbor, untagged.
    Oblivious,
}

pub(crate) fn tuple_signatures<G: RelationalView>(
    g: &G,
    k: usize,
    colors: &[Color],
    rule: TupleRule,
) -> Vec<Vec<u32>> {
    let n = g.vertex_count();
    let idx = TupleIndexer::new(n, k);
    let r = g.relation_count();
    (0..colors.len())
        .into_par_iter()
        .map_init(
            || (vec![0usize; k], Vec::<(u32, u32)>::new()),
            |(tuple, scratch), t| {
                idx.decode(t, tuple);
                let mut sig = vec![colors[t]];
                for j in 0..k {
                    scratch.clear();
                    match rule {
                        TupleRule::Local => {
                            for i in 0..r {
                                for &w in g.relation(i).neighbors(tuple[j]) {
                                    scratch
                                        .push((colors[idx.substitute(t, tuple, j, w)], i as u32));
                                }
                            }
                            scratch.sort_unstable();
                            sig.push(scratch.len() as u32);
                            sig.extend(scratch.iter().flat_map(|&(c, i)| [c, i]));
                        }
                        TupleRule::Oblivious => {
                            scratch.extend(
                                (0..n).map(|w| (colors[idx.substitute(t, tuple, j, w)], 0)),
                            );
                            scratch.sort_unstable();
                            sig.push(scratch.len() as u32);
                            sig.extend(scratch.iter().map(|&(c, _)| c));
                        }
                    }
                }
                sig
            },
        )
        .collect()
}

fn step<G: RelationalView>(
    g: &G,
    tc: &TupleColoring,
    dict: &mut ColorDictionary,
    rule: TupleRule,
) -> Result<TupleColoring> {
    let n = g.vertex_count();
    if tc.n != n {
        return Err(Error::contract(format!(
            "tuple coloring over {} vertices applied to a graph with {n}",
            tc.n
        )));
    }
    let expected = tuple_count(n, tc.k).ok_or_else(|| Error::contract("tuple count overflows"))?;
    check_len(tc.colors.len(), expected, "tuple coloring")?;
    let sigs = tuple_signatures(g, tc.k, &tc.colors, rule);
    Ok(TupleColoring::new(
        tc.k,
        n,
        dict.relabel_all(&sigs),
        tc.iteration + 1,
    ))
}

/// One round of the local relational k-WL.
pub fn step_krlwl(
    g: &MultiRelGraph,
    tc: &TupleColoring,
    dict: &mut ColorDictionary,
) -> Result<TupleColoring> {
    step(g, tc, dict, TupleRule::Local)
}

/// One round of the local delta k-WL (local `j`-neighbors, one relation).
pub fn step_delta_klwl(
    g: &LabeledGraph,
    tc: &TupleColoring,
    dict: &mut ColorDictionary,
) -> Result<TupleColoring> {
    step(g, tc, dict, TupleRule::Local)
}

/// One round of the oblivious k-WL (all `j`-neighbors).
pub fn step_oblivious_kwl(
    g: &LabeledGraph,
    tc: &TupleColoring,
    dict: &mut ColorDictionary,
) -> Result<TupleColoring> {
    step(g, tc, dict, TupleRule::Oblivious)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wl::{initial_coloring, same_partition, step_1rwl, Coloring};

    #[test]
    fn indexer_round_trip() {
        let idx = TupleIndexer::new(5, 3);
        let mut buf = [0; 3];
        for t in 0..125 {
            idx.decode(t, &mut buf);
            assert_eq!(idx.index(&buf), t);
        }
        assert_eq!(idx.index(&[1, 2, 3]), 25 + 10 + 3);
        assert_eq!(idx.substitute(38, &[1, 2, 3], 1, 4), idx.index(&[1, 4, 3]));
    }

    #[test]
    fn cap_is_enforced() {
        let g = MultiRelGraph::unlabeled(11, &[vec![(0, 1)]]).unwrap();
        let err = init_atp(&g, 3, 1000, &mut ColorDictionary::new()).unwrap_err();
        assert!(err.is_refusal());
        assert!(init_atp(&g, 3, 1331, &mut ColorDictionary::new()).is_ok());
        assert!(init_atp(&g, 0, 1331, &mut ColorDictionary::new()).is_err());
    }

    #[test]
    fn order_one_atp_is_label_partition() {
        let g = MultiRelGraph::new(4, &[vec![(0, 1), (2, 3)]], vec![3, 1, 3, 0]).unwrap();
        let tc = init_krlwl(&g, 1).unwrap();
        assert!(same_partition(&tc.colors, g.labels()));
    }

    #[test]
    fn diagonal_never_meets_off_diagonal() {
        let g = MultiRelGraph::unlabeled(4, &[vec![(0, 1), (1, 2)], vec![(2, 3)]]).unwrap();
        let tc = init_krlwl(&g, 2).unwrap();
        for v in 0..4 {
            for a in 0..4 {
                for b in 0..4 {
                    if a != b {
                        assert_ne!(tc.color_of(&[v, v]), tc.color_of(&[a, b]));
                    }
                }
            }
        }
    }

    #[test]
    fn order_one_tracks_relational_refinement() {
        let g = MultiRelGraph::unlabeled(
            7,
            &[
                vec![(0, 1), (1, 2), (2, 3), (4, 5)],
                vec![(3, 4), (5, 6), (0, 6)],
            ],
        )
        .unwrap();
        let mut tc = init_krlwl(&g, 1).unwrap();
        let mut c: Coloring = initial_coloring(&g, &mut ColorDictionary::new());
        for _ in 0..5 {
            assert!(same_partition(&tc.colors, &c.colors));
            tc = step_krlwl(&g, &tc, &mut ColorDictionary::new()).unwrap();
            c = step_1rwl(&g, &c, &mut ColorDictionary::new()).unwrap();
        }
    }

    #[test]
    fn wrong_size_is_rejected() {
        let g = LabeledGraph::unlabeled(3, &[(0, 1)]).unwrap();
        let tc = TupleColoring {
            k: 2,
            n: 3,
            colors: vec![0; 8],
            iteration: 0,
            class_count: 1,
        };
        assert!(step_delta_klwl(&g, &tc, &mut ColorDictionary::new()).is_err());
    }
}
