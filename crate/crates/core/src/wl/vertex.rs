//! Vertex refinement: color refinement, 1-RWL and weak 1-RWL.

use rayon::prelude::*;

use super::{check_len, Color, ColorDictionary, Coloring};
use crate::error::Result;
use crate::graph::{LabeledGraph, MultiRelGraph, RelationalView};

/// How neighbor colors enter a vertex signature.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum VertexRule {
    /// Multiset of neighbor colors over the single relation.
    Plain,
    /// Multiset of `(color, relation)` pairs.
    Relational,
    /// Untagged multiset over all relations, then every per-relation degree.
    Weak,
}

/// Iteration-0 coloring: vertices are colored by label.
pub fn initial_coloring<G: RelationalView>(g: &G, dict: &mut ColorDictionary) -> Coloring {
    Coloring::new(dict.relabel_all(&label_signatures(g)), 0)
}

pub(crate) fn label_signatures<G: RelationalView>(g: &G) -> Vec<[u32; 1]> {
    (0..g.vertex_count()).map(|v| [g.label(v)]).collect()
}

pub(crate) fn vertex_signatures<G: RelationalView>(
    g: &G,
    colors: &[Color],
    rule: VertexRule,
) -> Vec<Vec<u32>> {
    let r = g.relation_count();
    (0..g.vertex_count())
        .into_par_iter()
        .map(|v| {
            let mut sig = vec![colors[v]];
            match rule {
                VertexRule::Plain => {
                    let mut nb: Vec<u32> = (0..r)
                        .flat_map(|i| g.relation(i).neighbors(v))
                        .map(|&u| colors[u])
                        .collect();
                    nb.sort_unstable();
                    sig.push(nb.len() as u32);
                    sig.extend(nb);
                }
                VertexRule::Relational => {
                    let mut nb: Vec<(u32, u32)> = (0..r)
                        .flat_map(|i| {
                            g.relation(i)
                                .neighbors(v)
                                .iter()
                                .map(move |&u| (colors[u], i as u32))
                        })
                        .collect();
                    nb.sort_unstable();
                    sig.push(nb.len() as u32);
                    sig.extend(nb.into_iter().flat_map(|(c, i)| [c, i]));
                }
                VertexRule::Weak => {
                    let mut nb: Vec<u32> = (0..r)
                        .flat_map(|i| g.relation(i).neighbors(v))
                        .map(|&u| colors[u])
                        .collect();
                    nb.sort_unstable();
                    sig.push(nb.len() as u32);
                    sig.extend(nb);
                    sig.extend((0..r).map(|i| g.relation(i).degree(v) as u32));
                }
            }
            sig
        })
        .collect()
}

fn step<G: RelationalView>(
    g: &G,
    c: &Coloring,
    dict: &mut ColorDictionary,
    rule: VertexRule,
) -> Result<Coloring> {
    check_len(c.colors.len(), g.vertex_count(), "coloring")?;
    let sigs = vertex_signatures(g, &c.colors, rule);
    Ok(Coloring::new(dict.relabel_all(&sigs), c.iteration + 1))
}

/// One round of color refinement on a single-relation graph.
pub fn step_1wl(g: &LabeledGraph, c: &Coloring, dict: &mut ColorDictionary) -> Result<Coloring> {
    step(g, c, dict, VertexRule::Plain)
}

/// One round of relational refinement: neighbors are counted per `(color, relation)`.
pub fn step_1rwl(g: &MultiRelGraph, c: &Coloring, dict: &mut ColorDictionary) -> Result<Coloring> {
    step(g, c, dict, VertexRule::Relational)
}

/// One round of weak relational refinement: neighbor colors are pooled over
/// relations and only the per-relation degrees are kept.
pub fn step_weak_1rwl(
    g: &MultiRelGraph,
    c: &Coloring,
    dict: &mut ColorDictionary,
) -> Result<Coloring> {
    step(g, c, dict, VertexRule::Weak)
}
