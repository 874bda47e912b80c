//! Named checks of the refinement and GNN engines with JSON verdicts.

mod suites;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::random::RandomGraphSpec;
use crate::wl::DEFAULT_TUPLE_CAP;

pub const VERDICT_SCHEMA: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SuiteId {
    #[serde(rename = "thm1")]
    Thm1,
    #[serde(rename = "thm2-witness")]
    Thm2Witness,
    #[serde(rename = "prop3")]
    Prop3,
    #[serde(rename = "thm4")]
    Thm4,
    #[serde(rename = "prop5")]
    Prop5,
    #[serde(rename = "prop9")]
    Prop9,
    #[serde(rename = "corollary-2rn")]
    Corollary2Rn,
    #[serde(rename = "thmD1")]
    ThmD1,
    #[serde(rename = "soundness")]
    Soundness,
    #[serde(rename = "lattice")]
    Lattice,
}

impl SuiteId {
    pub const ALL: [SuiteId; 10] = [
        SuiteId::Thm1,
        SuiteId::Thm2Witness,
        SuiteId::Prop3,
        SuiteId::Thm4,
        SuiteId::Prop5,
        SuiteId::Prop9,
        SuiteId::Corollary2Rn,
        SuiteId::ThmD1,
        SuiteId::Soundness,
        SuiteId::Lattice,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SuiteId::Thm1 => "thm1",
            SuiteId::Thm2Witness => "thm2-witness",
            SuiteId::Prop3 => "prop3",
            SuiteId::Thm4 => "thm4",
            SuiteId::Prop5 => "prop5",
            SuiteId::Prop9 => "prop9",
            SuiteId::Corollary2Rn => "corollary-2rn",
            SuiteId::ThmD1 => "thmD1",
            SuiteId::Soundness => "soundness",
            SuiteId::Lattice => "lattice",
        }
    }

    /// What the suite checks and when it passes.
    pub fn predicate(self) -> &'static str {
        match self {
            SuiteId::Thm1 => {
                "on random graphs, vertices with equal 1-RWL colors get bitwise-equal features \
                 from R-GCN and CompGCN (mult, scale, ccorr) at every layer and seed"
            }
            SuiteId::Thm2Witness => {
                "the integer count matrix [F | A_1 F | ... | A_r F] induces the next 1-RWL partition \
                 at every round on random graphs, and random mult CompGCN weights (width 16) separate \
                 v and w of the three-relation graph after layer 1 for every seed"
            }
            SuiteId::Prop3 => {
                "1-RWL separates v and w of the three-relation graph at round 1; the stable weak coloring \
                 keeps them together and has 3 classes"
            }
            SuiteId::Thm4 => {
                "on random graphs and the three-relation graph, vertices with equal weak 1-RWL colors get \
                 bitwise-equal CompGCN features under add and concat; v and w of the three-relation graph \
                 are never separated"
            }
            SuiteId::Prop5 => {
                "for each r, 1-RWL does not distinguish C6 from two triangles (stable at round 1), the \
                 graphs are not isomorphic, R-GCN and CompGCN vertex feature multisets agree at every \
                 layer, and 2-RLWL distinguishes them"
            }
            SuiteId::Prop9 => {
                "on the lifted G_{k+1}/H_{k+1} pair, k-RLWL does not distinguish and (k+1)-RLWL does; \
                 the lifted G_k/H_k pair is recorded as evidence"
            }
            SuiteId::Corollary2Rn => {
                "on C6 versus two triangles, a random 2-tuple network (width 16) gives different \
                 readouts for every seed and r"
            }
            SuiteId::ThmD1 => {
                "converted mult CompGCN layers and two-layer CompGCN simulations of R-GCN layers agree \
                 with their sources within 1e-10 relative error"
            }
            SuiteId::Soundness => {
                "no WL variant with k <= 2 and no forward architecture readout distinguishes a random \
                 graph from a permuted copy; brute force confirms isomorphism"
            }
            SuiteId::Lattice => {
                "stable and per-round partitions satisfy 1-RWL refines weak refines 1-WL on the union \
                 graph, and every variant refines monotonically"
            }
        }
    }
}

impl fmt::Display for SuiteId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SuiteId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SuiteId::ALL
            .into_iter()
            .find(|id| id.name() == s)
            .ok_or_else(|| Error::UnknownSuite(s.to_owned()))
    }
}

/// Suite parameters. Missing fields take their defaults, so `{}` is the
/// default configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SuiteConfig {
    /// Weight seeds for GNN suites.
    pub seeds: Vec<u64>,
    /// Random graph `i` is drawn from seed `graph_seed + i`.
    pub graph_seed: u64,
    pub graphs: usize,
    pub random: RandomGraphSpec,
    pub layers: usize,
    pub width: usize,
    pub tuple_cap: usize,
    /// Relation counts for the C6 / two-triangle pair.
    pub cycle_relations: Vec<usize>,
    /// Relation counts for the lifted pairs.
    pub lifted_relations: Vec<usize>,
    pub hierarchy_k: usize,
    pub linear_sizes: Vec<usize>,
    pub linear_graphs_per_size: usize,
    pub conversion_instances: usize,
    pub conversion_max_n: usize,
    pub soundness_pairs: usize,
    pub soundness_max_n: usize,
    pub soundness_max_r: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            seeds: (0..5).collect(),
            graph_seed: 0,
            graphs: 100,
            random: RandomGraphSpec::default(),
            layers: 3,
            width: 16,
            tuple_cap: DEFAULT_TUPLE_CAP,
            cycle_relations: vec![1, 2, 3],
            lifted_relations: vec![1, 3],
            hierarchy_k: 2,
            linear_sizes: vec![5, 10, 30],
            linear_graphs_per_size: 10,
            conversion_instances: 20,
            conversion_max_n: 20,
            soundness_pairs: 200,
            soundness_max_n: 8,
            soundness_max_r: 3,
        }
    }
}

/// A failing case with the commands that rebuild it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub case: String,
    pub detail: Value,
    pub replay: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub schema: u32,
    pub suite: SuiteId,
    pub pass: bool,
    pub predicate: String,
    pub evidence: Value,
    pub counterexamples: Vec<Counterexample>,
    /// Set when the suite could not run (for example a cap refusal).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub runtime_ms: u64,
    pub version: String,
    pub seeds: Vec<u64>,
}

impl Verdict {
    /// 0 pass, 1 fail, 2 error or refusal.
    pub fn exit_code(&self) -> i32 {
        match (self.error.is_some(), self.pass) {
            (true, _) => 2,
            (false, true) => 0,
            (false, false) => 1,
        }
    }

    /// The verdict without its wall-clock field, for reproducibility checks.
    pub fn without_timing(&self) -> Verdict {
        Verdict {
            runtime_ms: 0,
            ..self.clone()
        }
    }
}

/// What a suite body reports before timing and bookkeeping are attached.
pub(crate) struct Outcome {
    pub evidence: Value,
    pub counterexamples: Vec<Counterexample>,
}

impl Outcome {
    fn pass(&self) -> bool {
        self.counterexamples.is_empty()
    }
}

/// Runs one suite. Cap refusals and other errors are returned as errors,
/// not as failing verdicts.
pub fn run_suite(id: SuiteId, config: &SuiteConfig) -> Result<Verdict> {
    let start = Instant::now();
    let outcome = suites::run(id, config)?;
    Ok(Verdict {
        schema: VERDICT_SCHEMA,
        suite: id,
        pass: outcome.pass(),
        predicate: id.predicate().to_owned(),
        evidence: outcome.evidence,
        counterexamples: outcome.counterexamples,
        error: None,
        runtime_ms: start.elapsed().as_millis() as u64,
        version: env!("CARGO_PKG_VERSION").to_owned(),
        seeds: config.seeds.clone(),
    })
}

fn error_verdict(id: SuiteId, config: &SuiteConfig, err: &Error, runtime_ms: u64) -> Verdict {
    Verdict {
        schema: VERDICT_SCHEMA,
        suite: id,
        pass: false,
        predicate: id.predicate().to_owned(),
        evidence: serde_json::json!({ "refusal": err.is_refusal() }),
        counterexamples: Vec::new(),
        error: Some(err.to_string()),
        runtime_ms,
        version: env!("CARGO_PKG_VERSION").to_owned(),
        seeds: config.seeds.clone(),
    }
}

/// Like [`run_suite`] but folds errors into the verdict.
pub fn run_suite_verdict(id: SuiteId, config: &SuiteConfig) -> Verdict {
    let start = Instant::now();
    run_suite(id, config)
        .unwrap_or_else(|e| error_verdict(id, config, &e, start.elapsed().as_millis() as u64))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub schema: u32,
    pub pass: bool,
    pub passed: Vec<SuiteId>,
    pub failed: Vec<SuiteId>,
    pub errored: Vec<SuiteId>,
    pub verdicts: Vec<Verdict>,
}

impl Summary {
    /// 2 if any suite errored, else 1 if any failed, else 0.
    pub fn exit_code(&self) -> i32 {
        self.verdicts
            .iter()
            .map(Verdict::exit_code)
            .max()
            .unwrap_or(0)
    }
}

/// Runs every suite, concurrently when `parallel` is set. Verdicts are
/// listed in suite order either way.
pub fn run_all(config: &SuiteConfig, parallel: bool) -> Summary {
    let verdicts: Vec<Verdict> = if parallel {
        SuiteId::ALL
            .par_iter()
            .map(|&id| run_suite_verdict(id, config))
            .collect()
    } else {
        SuiteId::ALL
            .iter()
            .map(|&id| run_suite_verdict(id, config))
            .collect()
    };
    let pick = |code: i32| -> Vec<SuiteId> {
        verdicts
            .iter()
            .filter(|v| v.exit_code() == code)
            .map(|v| v.suite)
            .collect()
    };
    Summary {
        schema: VERDICT_SCHEMA,
        pass: verdicts.iter().all(|v| v.exit_code() == 0),
        passed: pick(0),
        failed: pick(1),
        errored: pick(2),
        verdicts,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for id in SuiteId::ALL {
            assert_eq!(id.name().parse::<SuiteId>().unwrap(), id);
            assert_eq!(serde_json::to_string(&id).unwrap(), format!("\"{id}\""));
        }
        assert!(matches!(
            "thm9".parse::<SuiteId>(),
            Err(Error::UnknownSuite(_))
        ));
    }

    #[test]
    fn empty_config_is_default() {
        let c: SuiteConfig = serde_json::from_str("{}").unwrap();
        assert_eq!(c, SuiteConfig::default());
    }

    #[test]
    fn prop3_verdict() {
        let v = run_suite(SuiteId::Prop3, &SuiteConfig::default()).unwrap();
        assert!(v.pass, "{:?}", v.counterexamples);
        assert_eq!(v.evidence["rwl_separation_iteration"], 1);
        assert_eq!(v.evidence["weak_classes"], 3);
        assert_eq!(v.exit_code(), 0);
    }

    #[test]
    fn small_cap_refuses_hierarchy_suite() {
        let config = SuiteConfig {
            tuple_cap: 1000,
            ..Default::default()
        };
        let err = run_suite(SuiteId::Prop9, &config).unwrap_err();
        assert!(err.is_refusal());
        let v = run_suite_verdict(SuiteId::Prop9, &config);
        assert_eq!(v.exit_code(), 2);
    }
}
