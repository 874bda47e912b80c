//! Weisfeiler-Leman refinement: plain, relational and weak vertex variants,
//! and the local relational, local and oblivious tuple variants.
//!
//! Every update builds a canonical word signature per vertex (or tuple) and
//! relabels it through a [`ColorDictionary`]. A dictionary lives for one
//! round; when graphs are compared they share the round's dictionary so
//! their colors are comparable. Signatures are computed in parallel, ids are
//! handed out sequentially in scan order, so the output never depends on the
//! number of worker threads.

mod driver;
pub(crate) mod tuple;
mod vertex;

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use driver::{
    distinguish, refinement_trace, stable_coloring, AnyColoring, Distinction, RefineOptions,
    DEFAULT_TUPLE_CAP,
};
pub use tuple::{
    init_atp, init_krlwl, step_delta_klwl, step_krlwl, step_oblivious_kwl, tuple_count,
    TupleIndexer,
};
pub use vertex::{initial_coloring, step_1rwl, step_1wl, step_weak_1rwl};

pub type Color = u32;

/// Injective map from update signatures to color ids, issued in order of
/// first insertion.
#[derive(Clone, Debug, Default)]
pub struct ColorDictionary {
    map: HashMap<Box<[u32]>, Color>,
    next_id: Color,
}

impl ColorDictionary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn relabel(&mut self, signature: &[u32]) -> Color {
        if let Some(&c) = self.map.get(signature) {
            return c;
        }
        let c = self.next_id;
        self.map.insert(signature.into(), c);
        self.next_id += 1;
        c
    }

    pub fn relabel_all<S: AsRef<[u32]>>(&mut self, signatures: &[S]) -> Vec<Color> {
        signatures
            .iter()
            .map(|s| self.relabel(s.as_ref()))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

/// Vertex coloring after `iteration` rounds.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Coloring {
    pub colors: Vec<Color>,
    pub iteration: usize,
    pub class_count: usize,
}

impl Coloring {
    pub fn new(colors: Vec<Color>, iteration: usize) -> Self {
        let class_count = count_classes(&colors);
        Coloring {
            colors,
            iteration,
            class_count,
        }
    }

    pub fn histogram(&self) -> ColorHistogram {
        ColorHistogram::of(&self.colors)
    }
}

/// Coloring of all `n^k` tuples, indexed by `sum_j v_j * n^(k-1-j)`
/// (first component most significant).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TupleColoring {
    pub k: usize,
    pub n: usize,
    pub colors: Vec<Color>,
    pub iteration: usize,
    pub class_count: usize,
}

impl TupleColoring {
    pub fn new(k: usize, n: usize, colors: Vec<Color>, iteration: usize) -> Self {
        debug_assert_eq!(Some(colors.len()), tuple_count(n, k));
        let class_count = count_classes(&colors);
        TupleColoring {
            k,
            n,
            colors,
            iteration,
            class_count,
        }
    }

    pub fn color_of(&self, tuple: &[usize]) -> Color {
        self.colors[TupleIndexer::new(self.n, self.k).index(tuple)]
    }

    pub fn histogram(&self) -> ColorHistogram {
        ColorHistogram::of(&self.colors)
    }
}

/// Multiplicity of every color.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColorHistogram(pub BTreeMap<Color, usize>);

impl ColorHistogram {
    pub fn of(colors: &[Color]) -> Self {
        let mut counts = BTreeMap::new();
        for &c in colors {
            *counts.entry(c).or_insert(0) += 1;
        }
        ColorHistogram(counts)
    }

    pub fn total(&self) -> usize {
        self.0.values().sum()
    }
}

pub fn count_classes(colors: &[Color]) -> usize {
    let mut seen: Vec<Color> = colors.to_vec();
    seen.sort_unstable();
    seen.dedup();
    seen.len()
}

/// True iff every class of `finer` lies inside a class of `coarser`.
pub fn refines(finer: &[Color], coarser: &[Color]) -> bool {
    assert_eq!(finer.len(), coarser.len());
    let mut owner: HashMap<Color, Color> = HashMap::new();
    finer
        .iter()
        .zip(coarser)
        .all(|(f, c)| *owner.entry(*f).or_insert(*c) == *c)
}

pub fn same_partition(a: &[Color], b: &[Color]) -> bool {
    refines(a, b) && refines(b, a)
}

/// Renumbers colors to `0..q` by first occurrence.
pub fn normalize(colors: &[Color]) -> Vec<Color> {
    let mut ids: HashMap<Color, Color> = HashMap::new();
    colors
        .iter()
        .map(|c| {
            let next = ids.len() as Color;
            *ids.entry(*c).or_insert(next)
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    #[serde(rename = "1wl")]
    OneWl,
    #[serde(rename = "1rwl")]
    OneRwl,
    #[serde(rename = "weak")]
    WeakOneRwl,
    #[serde(rename = "krlwl")]
    KRlwl,
    #[serde(rename = "delta-klwl")]
    DeltaKLwl,
    #[serde(rename = "oblivious-kwl")]
    ObliviousKWl,
}

impl Variant {
    pub const ALL: [Variant; 6] = [
        Variant::OneWl,
        Variant::OneRwl,
        Variant::WeakOneRwl,
        Variant::KRlwl,
        Variant::DeltaKLwl,
        Variant::ObliviousKWl,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::OneWl => "1wl",
            Variant::OneRwl => "1rwl",
            Variant::WeakOneRwl => "weak",
            Variant::KRlwl => "krlwl",
            Variant::DeltaKLwl => "delta-klwl",
            Variant::ObliviousKWl => "oblivious-kwl",
        }
    }

    pub fn is_tuple(self) -> bool {
        matches!(
            self,
            Variant::KRlwl | Variant::DeltaKLwl | Variant::ObliviousKWl
        )
    }

    /// Whether the variant reads relation types (and so needs equal `r` when comparing).
    pub fn is_relational(self) -> bool {
        matches!(self, Variant::OneRwl | Variant::WeakOneRwl | Variant::KRlwl)
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::contract(format!("unknown WL variant `{s}`")))
    }
}

fn check_len(len: usize, expected: usize, what: &str) -> Result<()> {
    if len != expected {
        return Err(Error::contract(format!(
            "{what} has {len} entries, expected {expected}"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dictionary_is_injective_and_ordered() {
        let mut d = ColorDictionary::new();
        assert_eq!(d.relabel(&[3, 1]), 0);
        assert_eq!(d.relabel(&[1]), 1);
        assert_eq!(d.relabel(&[3, 1]), 0);
        assert_eq!(d.relabel(&[1, 3]), 2);
        assert_eq!(d.len(), 3);
    }

    #[test]
    fn refinement_relation() {
        assert!(refines(&[0, 1, 2], &[0, 0, 1]));
        assert!(!refines(&[0, 0, 1], &[0, 1, 1]));
        assert!(same_partition(&[5, 5, 7], &[0, 0, 1]));
        assert_eq!(normalize(&[9, 4, 9, 2]), vec![0, 1, 0, 2]);
    }

    #[test]
    fn variant_names_round_trip() {
        for v in Variant::ALL {
            assert_eq!(v.name().parse::<Variant>().unwrap(), v);
            let json = serde_json::to_string(&v).unwrap();
            assert_eq!(json, format!("\"{}\"", v.name()));
        }
        assert!("2wl".parse::<Variant>().is_err());
    }

    #[test]
    fn histogram_sums_to_size() {
        let h = ColorHistogram::of(&[1, 1, 0, 3]);
        assert_eq!(h.total(), 4);
        assert_eq!(h.0[&1], 2);
    }
}
