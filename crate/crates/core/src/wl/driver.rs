//! Refinement loops over one graph or a pair of graphs sharing dictionaries.

use std::borrow::Cow;

use serde::{Deserialize, Serialize};

use super::tuple::{atp_signatures, tuple_signatures, TupleRule};
use super::vertex::{label_signatures, vertex_signatures, VertexRule};
use super::{
    count_classes, Color, ColorDictionary, ColorHistogram, Coloring, TupleColoring, Variant,
};
use crate::error::{Error, Result};
use crate::graph::{union_graph, MultiRelGraph};

/// Default bound on `n^k` for tuple colorings.
pub const DEFAULT_TUPLE_CAP: usize = 20_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RefineOptions {
    /// Stop after this many rounds even if not stable.
    pub max_iter: Option<usize>,
    pub tuple_cap: usize,
}

impl Default for RefineOptions {
    fn default() -> Self {
        RefineOptions {
            max_iter: None,
            tuple_cap: DEFAULT_TUPLE_CAP,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AnyColoring {
    Vertex(Coloring),
    Tuple(TupleColoring),
}

impl AnyColoring {
    pub fn colors(&self) -> &[Color] {
        match self {
            AnyColoring::Vertex(c) => &c.colors,
            AnyColoring::Tuple(c) => &c.colors,
        }
    }

    pub fn iteration(&self) -> usize {
        match self {
            AnyColoring::Vertex(c) => c.iteration,
            AnyColoring::Tuple(c) => c.iteration,
        }
    }

    pub fn class_count(&self) -> usize {
        match self {
            AnyColoring::Vertex(c) => c.class_count,
            AnyColoring::Tuple(c) => c.class_count,
        }
    }

    pub fn histogram(&self) -> ColorHistogram {
        ColorHistogram::of(self.colors())
    }
}

/// Outcome of running a variant on two graphs in parallel.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Distinction {
    /// First round whose color histograms differ.
    pub distinguished_at: Option<usize>,
    /// `[histogram of g, histogram of h]` for every round that was run.
    pub histogram_trace: Vec<[ColorHistogram; 2]>,
    /// Rounds run after iteration 0.
    pub iterations: usize,
}

impl Distinction {
    pub fn distinguished(&self) -> bool {
        self.distinguished_at.is_some()
    }
}

/// Runs one variant on a list of graphs; every round uses one fresh
/// dictionary shared by all graphs, filled graph by graph.
struct Refiner<'a> {
    graphs: Vec<Cow<'a, MultiRelGraph>>,
    variant: Variant,
    k: usize,
    tuple_cap: usize,
}

impl<'a> Refiner<'a> {
    fn new(
        graphs: &[&'a MultiRelGraph],
        variant: Variant,
        k: usize,
        tuple_cap: usize,
    ) -> Result<Self> {
        if variant.is_tuple() {
            if k == 0 {
                return Err(Error::contract("tuple order k must be at least 1"));
            }
        } else if k != 1 {
            return Err(Error::contract(format!(
                "variant {variant} colors vertices; k must be 1, got {k}"
            )));
        }
        if variant.is_relational() {
            if let Some(r) = graphs.first().map(|g| g.relation_count()) {
                if graphs.iter().any(|g| g.relation_count() != r) {
                    return Err(Error::contract(format!(
                        "variant {variant} needs equal relation counts"
                    )));
                }
            }
        }
        let graphs = graphs
            .iter()
            .map(|&g| {
                if variant.is_relational() {
                    Cow::Borrowed(g)
                } else {
                    Cow::Owned(union_graph(g).to_multi())
                }
            })
            .collect();
        Ok(Refiner {
            graphs,
            variant,
            k,
            tuple_cap,
        })
    }

    fn initial(&self) -> Result<Vec<Vec<Color>>> {
        let mut dict = ColorDictionary::new();
        if self.variant.is_tuple() {
            let sigs = self
                .graphs
                .iter()
                .map(|g| atp_signatures(g.as_ref(), self.k, self.tuple_cap))
                .collect::<Result<Vec<_>>>()?;
            Ok(sigs.iter().map(|s| dict.relabel_all(s)).collect())
        } else {
            Ok(self
                .graphs
                .iter()
                .map(|g| dict.relabel_all(&label_signatures(g.as_ref())))
                .collect())
        }
    }

    fn step(&self, prev: &[Vec<Color>]) -> Vec<Vec<Color>> {
        let mut dict = ColorDictionary::new();
        self.graphs
            .iter()
            .zip(prev)
            .map(|(g, colors)| {
                let g = g.as_ref();
                let sigs = match self.variant {
                    Variant::OneWl => vertex_signatures(g, colors, VertexRule::Plain),
                    Variant::OneRwl => vertex_signatures(g, colors, VertexRule::Relational),
                    Variant::WeakOneRwl => vertex_signatures(g, colors, VertexRule::Weak),
                    Variant::KRlwl | Variant::DeltaKLwl => {
                        tuple_signatures(g, self.k, colors, TupleRule::Local)
                    }
                    Variant::ObliviousKWl => {
                        tuple_signatures(g, self.k, colors, TupleRule::Oblivious)
                    }
                };
                dict.relabel_all(&sigs)
            })
            .collect()
    }

    fn wrap(&self, graph: usize, colors: Vec<Color>, iteration: usize) -> AnyColoring {
        if self.variant.is_tuple() {
            let n = self.graphs[graph].vertex_count();
            AnyColoring::Tuple(TupleColoring::new(self.k, n, colors, iteration))
        } else {
            AnyColoring::Vertex(Coloring::new(colors, iteration))
        }
    }
}

fn joint_class_count(colorings: &[Vec<Color>]) -> usize {
    count_classes(&colorings.concat())
}

/// Colorings of every round from 0 up to the first round whose class count
/// equals the previous one (or until `max_iter` rounds).
pub fn refinement_trace(
    g: &MultiRelGraph,
    variant: Variant,
    k: usize,
    opts: &RefineOptions,
) -> Result<Vec<AnyColoring>> {
    let refiner = Refiner::new(&[g], variant, k, opts.tuple_cap)?;
    let mut current = refiner.initial()?;
    let mut trace = vec![refiner.wrap(0, current[0].clone(), 0)];
    let mut t = 0;
    while opts.max_iter.is_none_or(|m| t < m) {
        let next = refiner.step(&current);
        t += 1;
        trace.push(refiner.wrap(0, next[0].clone(), t));
        let stable = joint_class_count(&next) == joint_class_count(&current);
        current = next;
        if stable {
            break;
        }
    }
    Ok(trace)
}

/// The stable coloring and the number of rounds taken to reach it.
///
/// The returned round is the first one whose class count did not grow, so a
/// graph that is already stable at iteration 0 reports 1.
pub fn stable_coloring(
    g: &MultiRelGraph,
    variant: Variant,
    k: usize,
    opts: &RefineOptions,
) -> Result<(AnyColoring, usize)> {
    let mut trace = refinement_trace(g, variant, k, opts)?;
    let last = trace.pop().expect("trace holds iteration 0");
    let t = last.iteration();
    Ok((last, t))
}

/// Runs `variant` on `g` and `h` with shared dictionaries and reports the
/// first round at which their color histograms differ.
pub fn distinguish(
    g: &MultiRelGraph,
    h: &MultiRelGraph,
    variant: Variant,
    k: usize,
    opts: &RefineOptions,
) -> Result<Distinction> {
    let refiner = Refiner::new(&[g, h], variant, k, opts.tuple_cap)?;
    let mut current = refiner.initial()?;
    let histograms = |cs: &[Vec<Color>]| [ColorHistogram::of(&cs[0]), ColorHistogram::of(&cs[1])];
    let mut trace = vec![histograms(&current)];
    let mut t = 0;
    let mut distinguished_at = (trace[0][0] != trace[0][1]).then_some(0);
    while distinguished_at.is_none() && opts.max_iter.is_none_or(|m| t < m) {
        let next = refiner.step(&current);
        t += 1;
        let hist = histograms(&next);
        if hist[0] != hist[1] {
            distinguished_at = Some(t);
        }
        trace.push(hist);
        let stable = joint_class_count(&next) == joint_class_count(&current);
        current = next;
        if stable {
            break;
        }
    }
    Ok(Distinction {
        distinguished_at,
        histogram_trace: trace,
        iterations: t,
    })
}
