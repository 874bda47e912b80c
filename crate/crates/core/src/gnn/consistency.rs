//! Checks that equal WL colors imply bitwise-equal GNN features, and
//! measures how often distinct colors come with distinct features.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_xoshiro::Xoshiro256StarStar;
use serde::{Deserialize, Serialize};

use super::compose::Composition;
use super::layers::{
    compgcn_stack_forward, init_features, rgcn_stack_forward, Activation, Aggregate, CompParams,
    CompShape, InitMode, RgcnParams,
};
use super::matrix::Matrix;
use crate::error::{Error, Result};
use crate::graph::MultiRelGraph;
use crate::wl::{refinement_trace, Color, RefineOptions, Variant};

/// A WL variant and an architecture whose features it bounds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pairing {
    #[serde(rename = "1rwl:rgcn")]
    Rgcn,
    #[serde(rename = "1rwl:compgcn-mult")]
    CompMult,
    #[serde(rename = "1rwl:compgcn-scale")]
    CompScale,
    #[serde(rename = "1rwl:compgcn-ccorr")]
    CompCcorr,
    #[serde(rename = "weak:compgcn-add")]
    CompAdd,
    #[serde(rename = "weak:compgcn-concat")]
    CompConcat,
}

impl Pairing {
    pub const ALL: [Pairing; 6] = [
        Pairing::Rgcn,
        Pairing::CompMult,
        Pairing::CompScale,
        Pairing::CompCcorr,
        Pairing::CompAdd,
        Pairing::CompConcat,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Pairing::Rgcn => "1rwl:rgcn",
            Pairing::CompMult => "1rwl:compgcn-mult",
            Pairing::CompScale => "1rwl:compgcn-scale",
            Pairing::CompCcorr => "1rwl:compgcn-ccorr",
            Pairing::CompAdd => "weak:compgcn-add",
            Pairing::CompConcat => "weak:compgcn-concat",
        }
    }

    pub fn variant(self) -> Variant {
        match self {
            Pairing::CompAdd | Pairing::CompConcat => Variant::WeakOneRwl,
            _ => Variant::OneRwl,
        }
    }

    /// `None` for R-GCN.
    pub fn composition(self) -> Option<Composition> {
        match self {
            Pairing::Rgcn => None,
            Pairing::CompMult => Some(Composition::Mult),
            Pairing::CompScale => Some(Composition::Scale),
            Pairing::CompCcorr => Some(Composition::Ccorr),
            Pairing::CompAdd => Some(Composition::Add),
            Pairing::CompConcat => Some(Composition::Concat),
        }
    }
}

impl fmt::Display for Pairing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Pairing {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Pairing::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::contract(format!("unknown variant/architecture pair `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ConsistencyOptions {
    pub layers: usize,
    pub seeds: Vec<u64>,
    /// Hidden width of every layer.
    pub width: usize,
    pub activation: Activation,
    /// A vertex pair whose separation is recorded per seed and layer.
    pub focus: Option<(usize, usize)>,
}

impl Default for ConsistencyOptions {
    fn default() -> Self {
        ConsistencyOptions {
            layers: 3,
            seeds: (0..5).collect(),
            width: 16,
            activation: Activation::Relu,
            focus: None,
        }
    }
}

/// Vertices with equal colors but different features.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub seed: u64,
    pub layer: usize,
    pub u: usize,
    pub v: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayerWitness {
    pub seed: u64,
    pub layer: usize,
    /// Unordered vertex pairs with different colors.
    pub color_distinct: u64,
    /// Of those, pairs whose features differ.
    pub feature_distinct: u64,
    pub focus_separated: Option<bool>,
}

impl LayerWitness {
    /// 1 when there is nothing to separate.
    pub fn rate(&self) -> f64 {
        if self.color_distinct == 0 {
            1.0
        } else {
            self.feature_distinct as f64 / self.color_distinct as f64
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub pairing: Pairing,
    pub layers: usize,
    pub seeds: Vec<u64>,
    pub violations: Vec<Violation>,
    pub witnesses: Vec<LayerWitness>,
}

impl ConsistencyReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }

    /// Smallest per-layer witness rate.
    pub fn min_rate(&self) -> f64 {
        self.witnesses
            .iter()
            .map(LayerWitness::rate)
            .fold(1.0, f64::min)
    }

    /// Pooled rate over all seeds and layers.
    pub fn witness_rate(&self) -> f64 {
        let (a, b) = self.witnesses.iter().fold((0u64, 0u64), |(a, b), w| {
            (a + w.feature_distinct, b + w.color_distinct)
        });
        if b == 0 {
            1.0
        } else {
            a as f64 / b as f64
        }
    }
}

/// Random layer weights for `pairing`, uniform in `[-1, 1]` from `seed`.
pub fn random_stack(
    pairing: Pairing,
    d: usize,
    width: usize,
    r: usize,
    layers: usize,
    seed: u64,
) -> Stack {
    let mut rng = Xoshiro256StarStar::seed_from_u64(seed);
    let dims = |t: usize| if t == 0 { d } else { width };
    match pairing.composition() {
        None => Stack::Rgcn(
            (0..layers)
                .map(|t| RgcnParams::random(&mut rng, dims(t), width, r, Aggregate::Sum, None))
                .collect(),
        ),
        Some(composition) => Stack::Comp(
            (0..layers)
                .map(|t| {
                    let shape = CompShape {
                        d: dims(t),
                        e: width,
                        r,
                        composition,
                        directional: false,
                        normalize: false,
                        relation_update: false,
                    };
                    CompParams::random(&mut rng, &shape)
                })
                .collect(),
        ),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Stack {
    Rgcn(Vec<RgcnParams>),
    Comp(Vec<CompParams>),
}

impl Stack {
    pub fn forward(
        &self,
        g: &MultiRelGraph,
        h0: &Matrix,
        activation: Activation,
    ) -> Result<Vec<Matrix>> {
        match self {
            Stack::Rgcn(layers) => rgcn_stack_forward(g, layers, h0, activation),
            Stack::Comp(layers) => compgcn_stack_forward(g, layers, h0, activation),
        }
    }
}

/// Label one-hot features with the smallest width that fits every label.
pub fn label_features(g: &MultiRelGraph) -> Result<Matrix> {
    let dim = g
        .labels()
        .iter()
        .copied()
        .max()
        .map_or(1, |m| m as usize + 1);
    init_features(g, InitMode::OnehotLabel, dim)
}

pub fn wl_gnn_consistency(
    g: &MultiRelGraph,
    pairing: Pairing,
    opts: &ConsistencyOptions,
) -> Result<ConsistencyReport> {
    if opts.width == 0 {
        return Err(Error::contract("layer width must be positive"));
    }
    if pairing.composition() == Some(Composition::Rotate) && !opts.width.is_multiple_of(2) {
        return Err(Error::contract("rotate needs an even width"));
    }
    let n = g.vertex_count();
    if let Some((u, v)) = opts.focus {
        if u >= n || v >= n {
            return Err(Error::contract(format!(
                "focus pair ({u}, {v}) out of range"
            )));
        }
    }
    let refine = RefineOptions {
        max_iter: Some(opts.layers),
        ..RefineOptions::default()
    };
    let trace = refinement_trace(g, pairing.variant(), 1, &refine)?;
    // Past the stable round the partition no longer changes.
    let colors_at = |t: usize| trace[t.min(trace.len() - 1)].colors();
    let h0 = label_features(g)?;
    let mut violations = Vec::new();
    let mut witnesses = Vec::new();
    for &seed in &opts.seeds {
        let stack = random_stack(
            pairing,
            h0.cols,
            opts.width,
            g.relation_count(),
            opts.layers,
            seed,
        );
        let outputs = stack.forward(g, &h0, opts.activation)?;
        for (t, h) in std::iter::once(&h0).chain(&outputs).enumerate() {
            let colors = colors_at(t);
            let (violation, witness) = compare(colors, h, opts.focus);
            if let Some((u, v)) = violation {
                violations.push(Violation {
                    seed,
                    layer: t,
                    u,
                    v,
                });
            }
            witnesses.push(LayerWitness {
                seed,
                layer: t,
                ..witness
            });
        }
    }
    Ok(ConsistencyReport {
        pairing,
        layers: opts.layers,
        seeds: opts.seeds.clone(),
        violations,
        witnesses,
    })
}

fn pairs(count: u64) -> u64 {
    count * count.saturating_sub(1) / 2
}

fn compare(
    colors: &[Color],
    h: &Matrix,
    focus: Option<(usize, usize)>,
) -> (Option<(usize, usize)>, LayerWitness) {
    let bits: Vec<Vec<u64>> = (0..h.rows).map(|v| h.row_bits(v)).collect();
    let mut first_of_color: HashMap<Color, usize> = HashMap::new();
    let mut violation = None;
    let mut by_color: HashMap<Color, u64> = HashMap::new();
    let mut by_feature: HashMap<&[u64], u64> = HashMap::new();
    let mut by_both: HashMap<(Color, &[u64]), u64> = HashMap::new();
    for (v, b) in bits.iter().enumerate() {
        let c = colors[v];
        let rep = *first_of_color.entry(c).or_insert(v);
        if violation.is_none() && bits[rep] != *b {
            violation = Some((rep, v));
        }
        *by_color.entry(c).or_default() += 1;
        *by_feature.entry(b).or_default() += 1;
        *by_both.entry((c, b)).or_default() += 1;
    }
    let all = pairs(colors.len() as u64);
    let same_color: u64 = by_color.values().map(|&c| pairs(c)).sum();
    let same_feature: u64 = by_feature.values().map(|&c| pairs(c)).sum();
    let same_both: u64 = by_both.values().map(|&c| pairs(c)).sum();
    let witness = LayerWitness {
        seed: 0,
        layer: 0,
        color_distinct: all - same_color,
        feature_distinct: all - same_color - (same_feature - same_both),
        focus_separated: focus.map(|(u, v)| bits[u] != bits[v]),
    };
    (violation, witness)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::gen_prop3;

    #[test]
    fn pairing_names_round_trip() {
        for p in Pairing::ALL {
            assert_eq!(p.name().parse::<Pairing>().unwrap(), p);
            assert_eq!(serde_json::to_string(&p).unwrap(), format!("\"{p}\""));
        }
    }

    #[test]
    fn prop3_weak_add_never_separates_v_w() {
        let g = gen_prop3();
        let opts = ConsistencyOptions {
            focus: Some((0, 1)),
            ..Default::default()
        };
        for pairing in [Pairing::CompAdd, Pairing::CompConcat] {
            let report = wl_gnn_consistency(&g, pairing, &opts).unwrap();
            assert!(report.holds(), "{pairing}: {:?}", report.violations);
            assert!(report
                .witnesses
                .iter()
                .all(|w| w.focus_separated == Some(false)));
        }
    }

    #[test]
    fn prop3_mult_separates_v_w() {
        let g = gen_prop3();
        let opts = ConsistencyOptions {
            focus: Some((0, 1)),
            ..Default::default()
        };
        let report = wl_gnn_consistency(&g, Pairing::CompMult, &opts).unwrap();
        assert!(report.holds());
        let after_first: Vec<_> = report.witnesses.iter().filter(|w| w.layer >= 1).collect();
        assert!(after_first.iter().all(|w| w.focus_separated == Some(true)));
    }

    #[test]
    fn counts_by_hand() {
        let h = Matrix::from_rows(&[vec![1.0], vec![1.0], vec![2.0], vec![1.0]]).unwrap();
        // colors 0,0,1,2: distinct-color pairs 5; of these (0,3),(1,3) share features.
        let (violation, w) = compare(&[0, 0, 1, 2], &h, Some((0, 3)));
        assert_eq!(violation, None);
        assert_eq!((w.color_distinct, w.feature_distinct), (5, 3));
        assert_eq!(w.focus_separated, Some(false));
        let (violation, _) = compare(&[0, 0, 0, 1], &h, None);
        assert_eq!(violation, Some((0, 2)));
    }
}
