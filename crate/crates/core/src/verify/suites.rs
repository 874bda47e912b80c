use rand::Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use super::{Counterexample, Outcome, SuiteConfig, SuiteId};
use crate::error::{Error, Result};
use crate::families::{gen_cycle_pair, gen_lifted, gen_prop3};
use crate::gnn::{
    compgcn_stack_forward, convert_mult_to_rgcn, init_features, krn_init_features,
    krn_stack_forward, label_features, random_stack, readout, rgcn_forward, row_partition,
    simulate_rgcn_with_compgcn, wl_gnn_consistency, wl_step_as_linear_counts, Activation,
    Aggregate, CompParams, CompShape, Composition, ConsistencyOptions, InitMode, KrnParams, Matrix,
    Pairing, RgcnParams,
};
use crate::graph::MultiRelGraph;
use crate::iso::brute_force_isomorphic;
use crate::random::{random_graph, random_permutation, seeded, RandomGraphSpec};
use crate::wl::{
    distinguish, refinement_trace, refines, same_partition, AnyColoring, Coloring, RefineOptions,
    Variant,
};

/// Failing cases listed per suite; the total count is always in the evidence.
const MAX_COUNTEREXAMPLES: usize = 10;

pub(super) fn run(id: SuiteId, config: &SuiteConfig) -> Result<Outcome> {
    match id {
        SuiteId::Thm1 => thm1(config),
        SuiteId::Thm2Witness => thm2_witness(config),
        SuiteId::Prop3 => prop3(),
        SuiteId::Thm4 => thm4(config),
        SuiteId::Prop5 => prop5(config),
        SuiteId::Prop9 => prop9(config),
        SuiteId::Corollary2Rn => corollary_2rn(config),
        SuiteId::ThmD1 => thm_d1(config),
        SuiteId::Soundness => soundness(config),
        SuiteId::Lattice => lattice(config),
    }
}

struct Cases {
    total: usize,
    kept: Vec<Counterexample>,
}

impl Cases {
    fn new() -> Self {
        Cases {
            total: 0,
            kept: Vec::new(),
        }
    }

    fn push(&mut self, case: String, detail: Value, replay: Vec<String>) {
        self.total += 1;
        if self.kept.len() < MAX_COUNTEREXAMPLES {
            self.kept.push(Counterexample {
                case,
                detail,
                replay,
            });
        }
    }

    fn extend(&mut self, other: Cases) {
        self.total += other.total;
        for c in other.kept {
            if self.kept.len() < MAX_COUNTEREXAMPLES {
                self.kept.push(c);
            }
        }
    }

    fn finish(self, mut evidence: Value) -> Outcome {
        evidence["failing_cases"] = json!(self.total);
        Outcome {
            evidence,
            counterexamples: self.kept,
        }
    }
}

fn gen_random_cmd(seed: u64, spec: &RandomGraphSpec, permute: Option<u64>) -> String {
    let mut cmd = format!(
        "relwl gen --family random --seed {seed} --min-n {} --max-n {} --max-r {} --min-p {} --max-p {} --max-labels {} --out-a g.tsv",
        spec.min_n, spec.max_n, spec.max_r, spec.min_p, spec.max_p, spec.max_labels
    );
    if let Some(p) = permute {
        cmd.push_str(&format!(" --permute-seed {p} --out-b h.tsv"));
    }
    cmd
}

/// Loader flags that rebuild a generated graph exactly: numeric label
/// values and trailing empty relations.
fn load_flags(r: usize) -> String {
    format!("--numeric-labels --relations {r}")
}

fn vertex_colorings(trace: Vec<AnyColoring>) -> Vec<Coloring> {
    trace
        .into_iter()
        .map(|c| match c {
            AnyColoring::Vertex(c) => c,
            AnyColoring::Tuple(_) => unreachable!("vertex variant"),
        })
        .collect()
}

fn consistency_cases(config: &SuiteConfig, pairings: &[Pairing]) -> Result<(Value, Cases)> {
    let opts = ConsistencyOptions {
        layers: config.layers,
        seeds: config.seeds.clone(),
        width: config.width,
        ..Default::default()
    };
    let per_graph: Vec<Vec<(Pairing, crate::gnn::ConsistencyReport, u64, usize)>> = (0..config
        .graphs)
        .into_par_iter()
        .map(|i| {
            let seed = config.graph_seed + i as u64;
            let g = config.random.sample(&mut seeded(seed))?;
            pairings
                .iter()
                .map(|&p| {
                    wl_gnn_consistency(&g, p, &opts).map(|rep| (p, rep, seed, g.relation_count()))
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let mut cases = Cases::new();
    let mut summary = serde_json::Map::new();
    for &p in pairings {
        let mut violations = 0usize;
        let mut min_rate = 1.0f64;
        let (mut separated, mut distinct) = (0u64, 0u64);
        for (q, rep, seed, r) in per_graph.iter().flatten() {
            if *q != p {
                continue;
            }
            violations += rep.violations.len();
            min_rate = min_rate.min(rep.min_rate());
            for w in &rep.witnesses {
                separated += w.feature_distinct;
                distinct += w.color_distinct;
            }
            for v in &rep.violations {
                cases.push(
                    format!("{p} on random graph seed {seed}"),
                    json!({ "graph_seed": seed, "weight_seed": v.seed, "layer": v.layer, "u": v.u, "v": v.v }),
                    vec![
                        gen_random_cmd(*seed, &config.random, None),
                        format!(
                            "relwl verify consistency --graph g.tsv {} --pair {p} --layers {} --seed-list {} --width {} --out report.json",
                            load_flags(*r), config.layers, v.seed, config.width
                        ),
                    ],
                );
            }
        }
        let pooled = if distinct == 0 {
            1.0
        } else {
            separated as f64 / distinct as f64
        };
        summary.insert(
            p.name().to_owned(),
            json!({ "violations": violations, "min_witness_rate": min_rate, "pooled_witness_rate": pooled }),
        );
    }
    let evidence = json!({
        "graphs": config.graphs,
        "graph_seed": config.graph_seed,
        "layers": config.layers,
        "width": config.width,
        "pairings": Value::Object(summary),
    });
    Ok((evidence, cases))
}

fn thm1(config: &SuiteConfig) -> Result<Outcome> {
    let (evidence, cases) = consistency_cases(
        config,
        &[
            Pairing::Rgcn,
            Pairing::CompMult,
            Pairing::CompScale,
            Pairing::CompCcorr,
        ],
    )?;
    Ok(cases.finish(evidence))
}

/// Seed and the layers at which v and w got different features.
type SeedLayers = (u64, Vec<usize>);

/// Runs `pairing` on the three-relation graph and returns, per weight seed,
/// the layers at which v and w have different features.
fn prop3_separations(config: &SuiteConfig, pairing: Pairing) -> Result<(Vec<SeedLayers>, usize)> {
    let opts = ConsistencyOptions {
        layers: config.layers,
        seeds: config.seeds.clone(),
        width: config.width,
        focus: Some((0, 1)),
        ..Default::default()
    };
    let rep = wl_gnn_consistency(&gen_prop3(), pairing, &opts)?;
    let per_seed = config
        .seeds
        .iter()
        .map(|&s| {
            let layers = rep
                .witnesses
                .iter()
                .filter(|w| w.seed == s && w.focus_separated == Some(true))
                .map(|w| w.layer)
                .collect();
            (s, layers)
        })
        .collect();
    Ok((per_seed, rep.violations.len()))
}

fn prop3_replay(pair: Pairing, config: &SuiteConfig, seed: u64) -> Vec<String> {
    vec![
        "relwl gen --family prop3 --out-a prop3.tsv".to_owned(),
        format!(
            "relwl verify consistency --graph prop3.tsv --pair {pair} --layers {} --seed-list {seed} --width {} --out report.json",
            config.layers, config.width
        ),
    ]
}

fn thm4(config: &SuiteConfig) -> Result<Outcome> {
    let (mut evidence, mut cases) =
        consistency_cases(config, &[Pairing::CompAdd, Pairing::CompConcat])?;
    let mut prop3 = serde_json::Map::new();
    for pairing in [Pairing::CompAdd, Pairing::CompConcat] {
        let (per_seed, violations) = prop3_separations(config, pairing)?;
        let mut local = Cases::new();
        for (seed, layers) in &per_seed {
            if !layers.is_empty() {
                local.push(
                    format!("{pairing} separates v and w of the three-relation graph"),
                    json!({ "weight_seed": seed, "layers": layers }),
                    prop3_replay(pairing, config, *seed),
                );
            }
        }
        prop3.insert(
            pairing.name().to_owned(),
            json!({ "v_w_separated_seeds": local.total, "violations": violations }),
        );
        cases.extend(local);
    }
    evidence["prop3"] = Value::Object(prop3);
    Ok(cases.finish(evidence))
}

fn thm2_witness(config: &SuiteConfig) -> Result<Outcome> {
    let mut cases = Cases::new();
    let mut rounds_checked = 0usize;
    let mut graphs = 0usize;
    for (s, &n) in config.linear_sizes.iter().enumerate() {
        for j in 0..config.linear_graphs_per_size {
            let seed = config.graph_seed + (s * config.linear_graphs_per_size + j) as u64;
            let spec = RandomGraphSpec {
                min_n: n,
                max_n: n,
                ..config.random
            };
            let g = spec.sample(&mut seeded(seed))?;
            graphs += 1;
            let trace = vertex_colorings(refinement_trace(
                &g,
                Variant::OneRwl,
                1,
                &RefineOptions::default(),
            )?);
            for t in 0..trace.len() - 1 {
                rounds_checked += 1;
                let m = wl_step_as_linear_counts(&g, &trace[t])?;
                if !same_partition(&row_partition(&m), &trace[t + 1].colors) {
                    cases.push(
                        format!("count matrix partition differs from 1-RWL round {}", t + 1),
                        json!({ "graph_seed": seed, "n": n, "round": t + 1 }),
                        vec![
                            gen_random_cmd(seed, &spec, None),
                            format!("relwl wl run --graph g.tsv {} --variant 1rwl --max-iter {} --out coloring.json", load_flags(g.relation_count()), t + 1),
                        ],
                    );
                }
            }
        }
    }
    let (per_seed, violations) = prop3_separations(config, Pairing::CompMult)?;
    let mut separated_seeds = 0usize;
    for (seed, layers) in &per_seed {
        let all_after_first = (1..=config.layers).all(|t| layers.contains(&t));
        if all_after_first {
            separated_seeds += 1;
        } else {
            cases.push(
                "random mult weights leave v and w of the three-relation graph together".to_owned(),
                json!({ "weight_seed": seed, "separated_layers": layers }),
                prop3_replay(Pairing::CompMult, config, *seed),
            );
        }
    }
    let rate = if per_seed.is_empty() {
        1.0
    } else {
        separated_seeds as f64 / per_seed.len() as f64
    };
    let evidence = json!({
        "linear_graphs": graphs,
        "linear_rounds_checked": rounds_checked,
        "prop3_mult_witness_rate": rate,
        "prop3_mult_violations": violations,
        "width": config.width,
        "threshold": "witness rate must be 1.0 over all seeds; good weights are known to exist, random ones are not guaranteed",
    });
    Ok(cases.finish(evidence))
}

fn prop3() -> Result<Outcome> {
    let g = gen_prop3();
    let rwl = refinement_trace(&g, Variant::OneRwl, 1, &RefineOptions::default())?;
    let separation = rwl.iter().position(|c| c.colors()[0] != c.colors()[1]);
    let weak = refinement_trace(&g, Variant::WeakOneRwl, 1, &RefineOptions::default())?;
    let stable = weak.last().expect("trace holds iteration 0");
    let weak_classes = stable.class_count();
    let together = stable.colors()[0] == stable.colors()[1];
    let mut cases = Cases::new();
    let replay = |variant: &str| {
        vec![
            "relwl gen --family prop3 --out-a prop3.tsv".to_owned(),
            format!("relwl wl run --graph prop3.tsv --variant {variant} --out coloring.json"),
        ]
    };
    if separation != Some(1) {
        cases.push(
            "1-RWL does not separate v and w at round 1".to_owned(),
            json!({ "separation_round": separation }),
            replay("1rwl"),
        );
    }
    if weak_classes != 3 || !together {
        cases.push(
            "weak stable coloring differs from the expected 3 classes with v ~ w".to_owned(),
            json!({ "weak_classes": weak_classes, "v_w_together": together }),
            replay("weak"),
        );
    }
    Ok(cases.finish(json!({
        "rwl_separation_iteration": separation,
        "weak_classes": weak_classes,
        "weak_v_w_together": together,
    })))
}

fn sorted_rows(h: &Matrix) -> Vec<Vec<u64>> {
    let mut rows: Vec<_> = (0..h.rows).map(|v| h.row_bits(v)).collect();
    rows.sort_unstable();
    rows
}

fn cycle_pair_replay(r: usize, tail: &str) -> Vec<String> {
    vec![
        format!("relwl gen --family cycle-pair -r {r} --out-a c6.tsv --out-b 2c3.tsv"),
        format!("relwl {tail}"),
    ]
}

fn prop5(config: &SuiteConfig) -> Result<Outcome> {
    let mut cases = Cases::new();
    let mut per_r = serde_json::Map::new();
    let opts = RefineOptions {
        tuple_cap: config.tuple_cap,
        ..Default::default()
    };
    for &r in &config.cycle_relations {
        let (g, h) = gen_cycle_pair(r)?;
        let rwl = distinguish(&g, &h, Variant::OneRwl, 1, &opts)?;
        let stable_rounds = [&g, &h]
            .iter()
            .map(|x| refinement_trace(x, Variant::OneRwl, 1, &opts).map(|t| t.len() - 1))
            .collect::<Result<Vec<_>>>()?;
        let isomorphic = brute_force_isomorphic(&g, &h)?;
        let rlwl = distinguish(&g, &h, Variant::KRlwl, 2, &opts)?;
        let mut gnn_equal = true;
        for &seed in &config.seeds {
            for pairing in [Pairing::Rgcn, Pairing::CompMult] {
                let h0g = init_features(&g, InitMode::ConstantBasis, 1)?;
                let h0h = init_features(&h, InitMode::ConstantBasis, 1)?;
                let stack = random_stack(pairing, 1, config.width, r, config.layers, seed);
                let og = stack.forward(&g, &h0g, Activation::Relu)?;
                let oh = stack.forward(&h, &h0h, Activation::Relu)?;
                for (t, (a, b)) in og.iter().zip(&oh).enumerate() {
                    if sorted_rows(a) != sorted_rows(b) {
                        gnn_equal = false;
                        cases.push(
                            format!("{pairing} feature multisets differ on the r={r} cycle pair"),
                            json!({ "r": r, "weight_seed": seed, "layer": t + 1 }),
                            cycle_pair_replay(
                                r,
                                &format!(
                                    "gnn forward --graph c6.tsv --arch {} --layers {} --seed {seed} --width {} --out feats.json",
                                    if pairing == Pairing::Rgcn { "rgcn" } else { "compgcn" },
                                    config.layers,
                                    config.width
                                ),
                            ),
                        );
                    }
                }
            }
        }
        if rwl.distinguished() || stable_rounds.iter().any(|&t| t != 1) {
            cases.push(
                format!("1-RWL behaves unexpectedly on the r={r} cycle pair"),
                json!({ "r": r, "distinguished_at": rwl.distinguished_at, "stable_rounds": stable_rounds }),
                cycle_pair_replay(r, "wl compare --graph-a c6.tsv --graph-b 2c3.tsv --variant 1rwl --out verdict.json"),
            );
        }
        if isomorphic {
            cases.push(
                format!("r={r} cycle pair reported isomorphic"),
                json!({ "r": r }),
                cycle_pair_replay(r, "wl compare --graph-a c6.tsv --graph-b 2c3.tsv --variant 1rwl --out verdict.json"),
            );
        }
        if !rlwl.distinguished() {
            cases.push(
                format!("2-RLWL does not distinguish the r={r} cycle pair"),
                json!({ "r": r }),
                cycle_pair_replay(r, "wl compare --graph-a c6.tsv --graph-b 2c3.tsv --variant krlwl -k 2 --out verdict.json"),
            );
        }
        per_r.insert(
            r.to_string(),
            json!({
                "1rwl": rwl.distinguished_at,
                "stable_rounds": stable_rounds,
                "isomorphic": isomorphic,
                "2rlwl_distinguished": rlwl.distinguished(),
                "2rlwl_round": rlwl.distinguished_at,
                "gnn_multisets_equal": gnn_equal,
            }),
        );
    }
    Ok(cases.finish(json!({ "relations": Value::Object(per_r) })))
}

fn prop9(config: &SuiteConfig) -> Result<Outcome> {
    let k = config.hierarchy_k;
    if k == 0 {
        return Err(Error::contract("hierarchy_k must be at least 1"));
    }
    let opts = RefineOptions {
        tuple_cap: config.tuple_cap,
        ..Default::default()
    };
    let mut cases = Cases::new();
    let mut per_r = serde_json::Map::new();
    let compare = |base: usize, r: usize, order: usize| -> String {
        format!(
            "relwl gen --family lifted -k {base} -r {r} --out-a g.tsv --out-b h.tsv && relwl wl compare --graph-a g.tsv --graph-b h.tsv --variant krlwl -k {order} --out verdict.json"
        )
    };
    for &r in &config.lifted_relations {
        let (g, h) = gen_lifted(k + 1, r)?;
        let lower = distinguish(&g, &h, Variant::KRlwl, k, &opts)?;
        let upper = distinguish(&g, &h, Variant::KRlwl, k + 1, &opts)?;
        let (g0, h0) = gen_lifted(k.max(2), r)?;
        let same_base = distinguish(&g0, &h0, Variant::KRlwl, k, &opts)?;
        if lower.distinguished() {
            cases.push(
                format!(
                    "{k}-RLWL distinguishes lifted G_{}/H_{} with r={r}",
                    k + 1,
                    k + 1
                ),
                json!({ "r": r, "round": lower.distinguished_at }),
                vec![compare(k + 1, r, k)],
            );
        }
        if !upper.distinguished() {
            cases.push(
                format!(
                    "{}-RLWL does not distinguish lifted G_{}/H_{} with r={r}",
                    k + 1,
                    k + 1,
                    k + 1
                ),
                json!({ "r": r }),
                vec![compare(k + 1, r, k + 1)],
            );
        }
        per_r.insert(
            r.to_string(),
            json!({
                "vertices": g.vertex_count(),
                "lower_order_round": lower.distinguished_at,
                "higher_order_round": upper.distinguished_at,
                "same_base_pair_vertices": g0.vertex_count(),
                "same_base_pair_round": same_base.distinguished_at,
            }),
        );
    }
    Ok(cases.finish(json!({ "k": k, "relations": Value::Object(per_r) })))
}

fn random_krn_stack(
    seed: u64,
    d: usize,
    width: usize,
    r: usize,
    layers: usize,
    composition: Composition,
) -> Vec<KrnParams> {
    let mut rng = seeded(seed);
    (0..layers)
        .map(|t| {
            KrnParams::random(
                &mut rng,
                2,
                if t == 0 { d } else { width },
                width,
                r,
                composition,
            )
        })
        .collect()
}

fn corollary_2rn(config: &SuiteConfig) -> Result<Outcome> {
    let mut cases = Cases::new();
    let mut per_r = serde_json::Map::new();
    let mut total = 0usize;
    let mut separated = 0usize;
    for &r in &config.cycle_relations {
        let (g, h) = gen_cycle_pair(r)?;
        let feats = krn_init_features(&[&g, &h], 2, config.tuple_cap)?;
        let mut local = 0usize;
        let mut compgcn_equal = true;
        for &seed in &config.seeds {
            let stack = random_krn_stack(
                seed,
                feats[0].cols,
                config.width,
                r,
                config.layers,
                Composition::Mult,
            );
            let og = krn_stack_forward(&g, &stack, &feats[0], Activation::Relu)?;
            let oh = krn_stack_forward(&h, &stack, &feats[1], Activation::Relu)?;
            let ra = readout(og.last().unwrap_or(&feats[0]));
            let rb = readout(oh.last().unwrap_or(&feats[1]));
            total += 1;
            if ra != rb {
                local += 1;
                separated += 1;
            } else {
                cases.push(
                    format!("2-tuple network readouts agree on the r={r} cycle pair"),
                    json!({ "r": r, "weight_seed": seed }),
                    cycle_pair_replay(
                        r,
                        &format!(
                            "gnn forward --graph c6.tsv --arch krn --layers {} --seed {seed} --width {} --out feats.json",
                            config.layers, config.width
                        ),
                    ),
                );
            }
            let comp = random_stack(Pairing::CompMult, 1, config.width, r, config.layers, seed);
            let cg = comp.forward(
                &g,
                &init_features(&g, InitMode::ConstantBasis, 1)?,
                Activation::Relu,
            )?;
            let ch = comp.forward(
                &h,
                &init_features(&h, InitMode::ConstantBasis, 1)?,
                Activation::Relu,
            )?;
            compgcn_equal &= cg.last().map(readout) == ch.last().map(readout);
        }
        per_r.insert(
            r.to_string(),
            json!({ "separated_seeds": local, "compgcn_readouts_equal": compgcn_equal }),
        );
    }
    let rate = if total == 0 {
        1.0
    } else {
        separated as f64 / total as f64
    };
    Ok(cases.finish(json!({
        "witness_rate": rate,
        "width": config.width,
        "layers": config.layers,
        "relations": Value::Object(per_r),
        "threshold": "witness rate must be 1.0 over all seeds; good weights are known to exist, random ones are not guaranteed",
    })))
}

fn relative_error(a: &Matrix, b: &Matrix) -> Result<f64> {
    Ok(a.max_abs_diff(b)? / b.max_abs().max(f64::MIN_POSITIVE))
}

fn thm_d1(config: &SuiteConfig) -> Result<Outcome> {
    const TOL: f64 = 1e-10;
    let mut cases = Cases::new();
    let mut max_convert = 0.0f64;
    let mut max_simulate = 0.0f64;
    for i in 0..config.conversion_instances {
        let seed = config.graph_seed + i as u64;
        let mut rng = seeded(seed);
        let n = rng.random_range(2..=config.conversion_max_n.max(2));
        let r = rng.random_range(1..=config.random.max_r.max(1));
        let d = rng.random_range(1..=6);
        let e = rng.random_range(1..=6);
        let p = rng.random_range(0.1..=0.6);
        let g = random_graph(&mut rng, n, r, p, 3)?;
        let h = Matrix::from_fn(n, d, |_, _| rng.random_range(-1.0..=1.0));
        let shape = CompShape {
            d,
            e,
            r,
            composition: Composition::Mult,
            directional: false,
            normalize: false,
            relation_update: false,
        };
        let cp = CompParams::random(&mut rng, &shape);
        let rp = RgcnParams::random(&mut rng, d, e, r, Aggregate::Sum, None);
        for act in [Activation::Identity, Activation::Relu] {
            let source = crate::gnn::compgcn_forward(&g, &cp, &h, act)?;
            let converted = rgcn_forward(&g, &convert_mult_to_rgcn(&cp)?, &h, act)?;
            let err = relative_error(&converted, &source)?;
            max_convert = max_convert.max(err);
            if err > TOL {
                cases.push(
                    "converted R-GCN layer disagrees with its CompGCN source".to_owned(),
                    json!({ "instance_seed": seed, "activation": act, "relative_error": err }),
                    Vec::new(),
                );
            }
            let source = rgcn_forward(&g, &rp, &h, act)?;
            let simulated = simulate_rgcn_with_compgcn(&rp)?.forward(&g, &h, act)?;
            let err = relative_error(&simulated, &source)?;
            max_simulate = max_simulate.max(err);
            if err > TOL {
                cases.push(
                    "CompGCN simulation disagrees with its R-GCN source".to_owned(),
                    json!({ "instance_seed": seed, "activation": act, "relative_error": err }),
                    Vec::new(),
                );
            }
        }
    }
    Ok(cases.finish(json!({
        "instances": config.conversion_instances,
        "tolerance": TOL,
        "max_relative_error_convert": max_convert,
        "max_relative_error_simulate": max_simulate,
    })))
}

const SOUNDNESS_VARIANTS: [(Variant, usize); 9] = [
    (Variant::OneWl, 1),
    (Variant::OneRwl, 1),
    (Variant::WeakOneRwl, 1),
    (Variant::KRlwl, 1),
    (Variant::KRlwl, 2),
    (Variant::DeltaKLwl, 1),
    (Variant::DeltaKLwl, 2),
    (Variant::ObliviousKWl, 1),
    (Variant::ObliviousKWl, 2),
];

fn h0_width_bound(g: &MultiRelGraph) -> usize {
    g.labels()
        .iter()
        .copied()
        .max()
        .map_or(1, |m| m as usize + 1)
}

/// Readouts of every forward architecture on `g`, keyed by name.
fn architecture_readouts(
    g: &MultiRelGraph,
    krn_features: &Matrix,
    seed: u64,
    width: usize,
) -> Result<Vec<(String, Vec<f64>)>> {
    const LAYERS: usize = 2;
    if width < h0_width_bound(g) {
        return Err(Error::contract("width must cover the label one-hot width"));
    }
    let r = g.relation_count();
    let h0 = label_features(g)?;
    let mut out = Vec::new();
    let stack = random_stack(Pairing::Rgcn, h0.cols, width, r, LAYERS, seed);
    out.push((
        "rgcn".to_owned(),
        readout(
            stack
                .forward(g, &h0, Activation::Relu)?
                .last()
                .expect("layers"),
        ),
    ));
    let mut rng = seeded(seed);
    for composition in Composition::ALL {
        for (directional, normalize) in [(false, false), (true, true)] {
            // Inputs are zero-padded to the hidden width so relation
            // updates keep one relation width across layers.
            let layers: Vec<CompParams> = (0..LAYERS)
                .map(|_| {
                    CompParams::random(
                        &mut rng,
                        &CompShape {
                            d: width,
                            e: width,
                            r,
                            composition,
                            directional,
                            normalize,
                            relation_update: true,
                        },
                    )
                })
                .collect();
            let input =
                Matrix::from_fn(
                    h0.rows,
                    width,
                    |v, j| if j < h0.cols { h0.get(v, j) } else { 0.0 },
                );
            let feats = compgcn_stack_forward(g, &layers, &input, Activation::Relu)?;
            let mode = if directional { "directional" } else { "basic" };
            out.push((
                format!("compgcn-{composition}-{mode}"),
                readout(feats.last().expect("layers")),
            ));
        }
    }
    let krn = random_krn_stack(seed, krn_features.cols, width, r, LAYERS, Composition::Mult);
    let feats = krn_stack_forward(g, &krn, krn_features, Activation::Relu)?;
    out.push(("krn-2".to_owned(), readout(feats.last().expect("layers"))));
    Ok(out)
}

fn soundness(config: &SuiteConfig) -> Result<Outcome> {
    let spec = RandomGraphSpec {
        min_n: 1,
        max_n: config.soundness_max_n,
        max_r: config.soundness_max_r,
        ..config.random
    };
    let opts = RefineOptions {
        tuple_cap: config.tuple_cap,
        ..Default::default()
    };
    const WIDTH: usize = 8;
    let results: Vec<Cases> = (0..config.soundness_pairs)
        .into_par_iter()
        .map(|i| -> Result<Cases> {
            let seed = config.graph_seed + i as u64;
            let g = spec.sample(&mut seeded(seed))?;
            let perm = random_permutation(&mut seeded(seed ^ 0x9e37_79b9_7f4a_7c15), g.vertex_count());
            let h = g.permuted(&perm)?;
            let permute_seed = seed ^ 0x9e37_79b9_7f4a_7c15;
            let mut cases = Cases::new();
            for (variant, k) in SOUNDNESS_VARIANTS {
                let d = distinguish(&g, &h, variant, k, &opts)?;
                if d.distinguished() {
                    cases.push(
                        format!("{variant} (k={k}) distinguishes a graph from its permuted copy"),
                        json!({ "graph_seed": seed, "round": d.distinguished_at }),
                        vec![
                            gen_random_cmd(seed, &spec, Some(permute_seed)),
                            format!("relwl wl compare --graph-a g.tsv --graph-b h.tsv {} --variant {variant} -k {k} --out verdict.json", load_flags(g.relation_count())),
                        ],
                    );
                }
            }
            if !brute_force_isomorphic(&g, &h)? {
                cases.push(
                    "brute force rejects a permuted copy".to_owned(),
                    json!({ "graph_seed": seed, "permutation": perm }),
                    vec![gen_random_cmd(seed, &spec, Some(permute_seed))],
                );
            }
            let krn = krn_init_features(&[&g, &h], 2, config.tuple_cap)?;
            let rg = architecture_readouts(&g, &krn[0], seed, WIDTH)?;
            let rh = architecture_readouts(&h, &krn[1], seed, WIDTH)?;
            for ((name, a), (_, b)) in rg.iter().zip(&rh) {
                let same = a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits());
                if !same {
                    cases.push(
                        format!("{name} readout differs on a permuted copy"),
                        json!({ "graph_seed": seed, "architecture": name }),
                        vec![
                            gen_random_cmd(seed, &spec, Some(permute_seed)),
                            format!("relwl gnn forward --graph g.tsv {} --arch {} --layers 2 --seed {seed} --width {WIDTH} --out feats.json", load_flags(g.relation_count()), name.split('-').next().unwrap_or("rgcn")),
                        ],
                    );
                }
            }
            Ok(cases)
        })
        .collect::<Result<_>>()?;
    let mut cases = Cases::new();
    for c in results {
        cases.extend(c);
    }
    Ok(cases.finish(json!({
        "pairs": config.soundness_pairs,
        "max_n": config.soundness_max_n,
        "max_r": config.soundness_max_r,
        "variants": SOUNDNESS_VARIANTS.iter().map(|(v, k)| format!("{v}:{k}")).collect::<Vec<_>>(),
    })))
}

const LATTICE_TUPLE_VARIANTS: [Variant; 3] =
    [Variant::KRlwl, Variant::DeltaKLwl, Variant::ObliviousKWl];

fn lattice(config: &SuiteConfig) -> Result<Outcome> {
    let opts = RefineOptions {
        tuple_cap: config.tuple_cap,
        ..Default::default()
    };
    let results: Vec<Cases> = (0..config.graphs)
        .into_par_iter()
        .map(|i| -> Result<Cases> {
            let seed = config.graph_seed + i as u64;
            let g = config.random.sample(&mut seeded(seed))?;
            let mut cases = Cases::new();
            let mut fail = |what: String, detail: Value, variant: &str, k: usize| {
                cases.push(
                    what,
                    detail,
                    vec![
                        gen_random_cmd(seed, &config.random, None),
                        format!("relwl wl run --graph g.tsv {} --variant {variant} -k {k} --out coloring.json", load_flags(g.relation_count())),
                    ],
                );
            };
            let wl = refinement_trace(&g, Variant::OneWl, 1, &opts)?;
            let weak = refinement_trace(&g, Variant::WeakOneRwl, 1, &opts)?;
            let rwl = refinement_trace(&g, Variant::OneRwl, 1, &opts)?;
            let rounds = wl.len().max(weak.len()).max(rwl.len());
            let at = |t: &[AnyColoring], i: usize| t[i.min(t.len() - 1)].colors().to_vec();
            for t in 0..rounds {
                if !refines(&at(&rwl, t), &at(&weak, t)) {
                    fail("1-RWL does not refine weak".to_owned(), json!({ "graph_seed": seed, "round": t }), "1rwl", 1);
                }
                if !refines(&at(&weak, t), &at(&wl, t)) {
                    fail("weak does not refine 1-WL".to_owned(), json!({ "graph_seed": seed, "round": t }), "weak", 1);
                }
            }
            let mut traces: Vec<(Variant, usize, Vec<AnyColoring>)> =
                vec![(Variant::OneWl, 1, wl), (Variant::WeakOneRwl, 1, weak), (Variant::OneRwl, 1, rwl)];
            for v in LATTICE_TUPLE_VARIANTS {
                traces.push((v, 2, refinement_trace(&g, v, 2, &opts)?));
            }
            for (v, k, trace) in &traces {
                for t in 1..trace.len() {
                    if !refines(trace[t].colors(), trace[t - 1].colors()) {
                        fail(
                            format!("{v} (k={k}) round {t} does not refine round {}", t - 1),
                            json!({ "graph_seed": seed, "round": t }),
                            v.name(),
                            *k,
                        );
                    }
                }
            }
            Ok(cases)
        })
        .collect::<Result<_>>()?;
    let mut cases = Cases::new();
    for c in results {
        cases.extend(c);
    }
    Ok(cases.finish(json!({
        "graphs": config.graphs,
        "graph_seed": config.graph_seed,
        "tuple_variants_k": 2,
    })))
}
