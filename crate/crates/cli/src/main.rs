use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use relwl_core::families::{gen_cycle_pair, gen_gk_hk, gen_lifted, gen_prop3};
use relwl_core::gnn::{
    compgcn_stack_forward, init_features, krn_init_features, krn_stack_forward, readout,
    rgcn_stack_forward, wl_gnn_consistency, Activation, Aggregate, CompParams, CompShape,
    Composition, ConsistencyOptions, InitMode, KrnParams, Matrix, Pairing, RgcnParams,
};
use relwl_core::io::{pad_relations, sibling_labels_path, write_tsv, LoadedGraph, Loader};
use relwl_core::random::{random_permutation, seeded, RandomGraphSpec};
use relwl_core::verify::{run_all, run_suite_verdict, SuiteConfig, SuiteId};
use relwl_core::wl::{distinguish, refinement_trace, RefineOptions, Variant, DEFAULT_TUPLE_CAP};
use relwl_core::MultiRelGraph;

#[derive(Parser)]
#[command(
    name = "relwl",
    version,
    about = "Weisfeiler-Leman refinement and relational GNNs on multi-relational graphs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Color refinement on one graph or a pair.
    #[command(subcommand)]
    Wl(WlCommand),
    /// Write a generated graph (pair) as TSV.
    Gen(GenArgs),
    /// Relational GNN layers (R-GCN, CompGCN, k-tuple networks).
    #[command(subcommand)]
    Gnn(GnnCommand),
    /// Run named suites, or a single consistency check.
    Verify(VerifyArgs),
}

#[derive(Args, Clone)]
struct LoadArgs {
    /// Label file; defaults to `<stem>.labels.tsv` next to the edge file when present.
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Read labels as integers instead of interning tokens.
    #[arg(long)]
    numeric_labels: bool,
    /// Pad with empty relations up to this count.
    #[arg(long)]
    relations: Option<usize>,
}

#[derive(Subcommand)]
enum WlCommand {
    Run {
        #[arg(long)]
        graph: PathBuf,
        #[command(flatten)]
        load: LoadArgs,
        #[arg(long)]
        variant: Variant,
        #[arg(short, default_value_t = 1)]
        k: usize,
        #[arg(long)]
        max_iter: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_TUPLE_CAP)]
        tuple_cap: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    Compare {
        #[arg(long)]
        graph_a: PathBuf,
        #[arg(long)]
        graph_b: PathBuf,
        #[arg(long)]
        labels_a: Option<PathBuf>,
        #[arg(long)]
        labels_b: Option<PathBuf>,
        #[arg(long)]
        numeric_labels: bool,
        #[arg(long)]
        relations: Option<usize>,
        #[arg(long)]
        variant: Variant,
        #[arg(short, default_value_t = 1)]
        k: usize,
        #[arg(long)]
        max_iter: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_TUPLE_CAP)]
        tuple_cap: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Prop3,
    CyclePair,
    GkHk,
    Lifted,
    Random,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    family: Family,
    #[arg(short, default_value_t = 2)]
    k: usize,
    #[arg(short, default_value_t = 1)]
    r: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    min_n: Option<usize>,
    #[arg(long)]
    max_n: Option<usize>,
    #[arg(long)]
    max_r: Option<usize>,
    #[arg(long)]
    min_p: Option<f64>,
    #[arg(long)]
    max_p: Option<f64>,
    #[arg(long)]
    max_labels: Option<u32>,
    /// For `random`: write a copy permuted with this seed to `--out-b`.
    #[arg(long)]
    permute_seed: Option<u64>,
    #[arg(long)]
    out_a: PathBuf,
    #[arg(long)]
    out_b: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Arch {
    Rgcn,
    Compgcn,
    Krn,
}

#[derive(Subcommand)]
enum GnnCommand {
    /// Forward pass with explicit (`--config`) or seeded random weights.
    Forward {
        #[arg(long)]
        graph: PathBuf,
        #[command(flatten)]
        load: LoadArgs,
        #[arg(long)]
        arch: Arch,
        /// JSON layer parameters: one object or an array, fields as in the library types.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 2)]
        layers: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 16)]
        width: usize,
        #[arg(long, default_value = "mult")]
        composition: Composition,
        #[arg(long, value_enum, default_value_t = ActivationArg::Relu)]
        activation: ActivationArg,
        #[arg(long, value_enum, default_value_t = InitArg::OnehotLabel)]
        init: InitArg,
        /// Tuple order for `krn`.
        #[arg(short, default_value_t = 2)]
        k: usize,
        /// For `krn`: number atomic types jointly with this graph.
        #[arg(long)]
        joint_graph: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_TUPLE_CAP)]
        tuple_cap: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ActivationArg {
    Relu,
    Sign,
    Identity,
}

impl From<ActivationArg> for Activation {
    fn from(a: ActivationArg) -> Self {
        match a {
            ActivationArg::Relu => Activation::Relu,
            ActivationArg::Sign => Activation::Sign,
            ActivationArg::Identity => Activation::Identity,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum InitArg {
    ConstantBasis,
    OnehotLabel,
}

#[derive(Args)]
#[command(args_conflicts_with_subcommands = true)]
struct VerifyArgs {
    #[command(subcommand)]
    command: Option<VerifyCommand>,
    #[arg(long, conflicts_with = "all")]
    suite: Option<SuiteId>,
    #[arg(long)]
    all: bool,
    /// Run suites concurrently (with `--all`).
    #[arg(long)]
    parallel: bool,
    /// Suite configuration JSON; missing fields take defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum VerifyCommand {
    /// Equal colors must give bitwise-equal features.
    Consistency {
        #[arg(long)]
        graph: PathBuf,
        #[command(flatten)]
        load: LoadArgs,
        #[arg(long)]
        pair: Pairing,
        #[arg(long, default_value_t = 3)]
        layers: usize,
        /// Use weight seeds `0..N`.
        #[arg(long, default_value_t = 5, conflicts_with = "seed_list")]
        seeds: u64,
        /// Comma-separated weight seeds.
        #[arg(long, value_delimiter = ',')]
        seed_list: Option<Vec<u64>>,
        #[arg(long, default_value_t = 16)]
        width: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load(path: &Path, args: &LoadArgs, loader: &mut Loader) -> anyhow::Result<LoadedGraph> {
    let labels = args.labels.clone().or_else(|| {
        let sibling = sibling_labels_path(path);
        sibling.exists().then_some(sibling)
    });
    let mut loaded = loader
        .load(path, labels.as_deref())
        .with_context(|| format!("loading {}", path.display()))?;
    if let Some(r) = args.relations {
        loaded.graph = pad_relations(&loaded.graph, r)?;
    }
    Ok(loaded)
}

fn new_loader(numeric: bool) -> Loader {
    if numeric {
        Loader::new().numeric_labels()
    } else {
        Loader::new()
    }
}

fn emit<T: Serialize>(value: &T, out: Option<&Path>) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match out {
        Some(path) => {
            fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))?
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            match writeln!(stdout, "{text}") {
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => {}
                other => other?,
            }
        }
    }
    Ok(())
}

fn wl(cmd: WlCommand) -> anyhow::Result<ExitCode> {
    match cmd {
        WlCommand::Run {
            graph,
            load: args,
            variant,
            k,
            max_iter,
            tuple_cap,
            out,
        } => {
            let loaded = load(&graph, &args, &mut new_loader(args.numeric_labels))?;
            let opts = RefineOptions {
                max_iter,
                tuple_cap,
            };
            let trace = refinement_trace(&loaded.graph, variant, k, &opts)?;
            let last = trace.last().expect("trace holds iteration 0");
            emit(
                &json!({
                    "variant": variant,
                    "k": k,
                    "iterations": last.iteration(),
                    "class_count": last.class_count(),
                    "colors": last.colors(),
                }),
                out.as_deref(),
            )?;
        }
        WlCommand::Compare {
            graph_a,
            graph_b,
            labels_a,
            labels_b,
            numeric_labels,
            relations,
            variant,
            k,
            max_iter,
            tuple_cap,
            out,
        } => {
            let mut loader = new_loader(numeric_labels);
            let args = |labels| LoadArgs {
                labels,
                numeric_labels,
                relations: None,
            };
            let a = load(&graph_a, &args(labels_a), &mut loader)?;
            let b = load(&graph_b, &args(labels_b), &mut loader)?;
            let r = relations.unwrap_or(0).max(loader.relation_count());
            let (ga, gb) = (pad_relations(&a.graph, r)?, pad_relations(&b.graph, r)?);
            let opts = RefineOptions {
                max_iter,
                tuple_cap,
            };
            let d = distinguish(&ga, &gb, variant, k, &opts)?;
            emit(
                &json!({
                    "distinguished": d.distinguished(),
                    "at_iteration": d.distinguished_at,
                    "iterations": d.iterations,
                    "histogram_trace": d.histogram_trace,
                }),
                out.as_deref(),
            )?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn write_graph(g: &MultiRelGraph, path: &Path) -> anyhow::Result<()> {
    let loaded = LoadedGraph::with_numeric_names(g.clone());
    write_tsv(&loaded, path, &sibling_labels_path(path))
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn gen(args: GenArgs) -> anyhow::Result<ExitCode> {
    let (a, b): (MultiRelGraph, Option<MultiRelGraph>) = match args.family {
        Family::Prop3 => (gen_prop3(), None),
        Family::CyclePair => {
            let (g, h) = gen_cycle_pair(args.r)?;
            (g, Some(h))
        }
        Family::GkHk => {
            let (g, h) = gen_gk_hk(args.k)?;
            (g.to_multi(), Some(h.to_multi()))
        }
        Family::Lifted => {
            let (g, h) = gen_lifted(args.k, args.r)?;
            (g, Some(h))
        }
        Family::Random => {
            let d = RandomGraphSpec::default();
            let spec = RandomGraphSpec {
                min_n: args.min_n.unwrap_or(d.min_n),
                max_n: args.max_n.unwrap_or(d.max_n),
                max_r: args.max_r.unwrap_or(d.max_r),
                min_p: args.min_p.unwrap_or(d.min_p),
                max_p: args.max_p.unwrap_or(d.max_p),
                max_labels: args.max_labels.unwrap_or(d.max_labels),
            };
            let g = spec.sample(&mut seeded(args.seed))?;
            let h = match args.permute_seed {
                Some(p) => Some(g.permuted(&random_permutation(&mut seeded(p), g.vertex_count()))?),
                None => None,
            };
            (g, h)
        }
    };
    write_graph(&a, &args.out_a)?;
    match (b, &args.out_b) {
        (Some(b), Some(path)) => write_graph(&b, path)?,
        (Some(_), None) => bail!("this family yields a pair; pass --out-b"),
        (None, Some(_)) => bail!("this family yields one graph; drop --out-b"),
        (None, None) => {}
    }
    Ok(ExitCode::SUCCESS)
}

/// Parses one layer object or an array of them.
fn read_layers<T: serde::de::DeserializeOwned>(path: &Path) -> anyhow::Result<Vec<T>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let value: Value = serde_json::from_str(&text)?;
    Ok(match value {
        Value::Array(_) => serde_json::from_value(value)?,
        other => vec![serde_json::from_value(other)?],
    })
}

fn gnn(cmd: GnnCommand) -> anyhow::Result<ExitCode> {
    let GnnCommand::Forward {
        graph,
        load: args,
        arch,
        config,
        layers,
        seed,
        width,
        composition,
        activation,
        init,
        k,
        joint_graph,
        tuple_cap,
        out,
    } = cmd;
    let mut loader = new_loader(args.numeric_labels);
    let g = load(&graph, &args, &mut loader)?.graph;
    let r = g.relation_count();
    let activation = Activation::from(activation);
    let mut rng = seeded(seed);
    let outputs = match arch {
        Arch::Krn => {
            let mut graphs = vec![g.clone()];
            if let Some(path) = &joint_graph {
                let other = load(path, &args, &mut loader)?.graph;
                let r = r.max(other.relation_count());
                graphs = vec![pad_relations(&g, r)?, pad_relations(&other, r)?];
            }
            let refs: Vec<&MultiRelGraph> = graphs.iter().collect();
            let h0 = krn_init_features(&refs, k, tuple_cap)?.swap_remove(0);
            let params: Vec<KrnParams> = match &config {
                Some(path) => read_layers(path)?,
                None => (0..layers)
                    .map(|t| {
                        let d = if t == 0 { h0.cols } else { width };
                        KrnParams::random(
                            &mut rng,
                            k,
                            d,
                            width,
                            graphs[0].relation_count(),
                            composition,
                        )
                    })
                    .collect(),
            };
            krn_stack_forward(&graphs[0], &params, &h0, activation)?
        }
        Arch::Rgcn | Arch::Compgcn => {
            let dim = match init {
                InitArg::ConstantBasis => 1,
                InitArg::OnehotLabel => g
                    .labels()
                    .iter()
                    .copied()
                    .max()
                    .map_or(1, |m| m as usize + 1),
            };
            let mode = match init {
                InitArg::ConstantBasis => InitMode::ConstantBasis,
                InitArg::OnehotLabel => InitMode::OnehotLabel,
            };
            let h0 = init_features(&g, mode, dim)?;
            let d = |t: usize| if t == 0 { h0.cols } else { width };
            if arch == Arch::Rgcn {
                let params: Vec<RgcnParams> = match &config {
                    Some(path) => read_layers(path)?,
                    None => (0..layers)
                        .map(|t| RgcnParams::random(&mut rng, d(t), width, r, Aggregate::Sum, None))
                        .collect(),
                };
                rgcn_stack_forward(&g, &params, &h0, activation)?
            } else {
                let params: Vec<CompParams> = match &config {
                    Some(path) => read_layers(path)?,
                    None => (0..layers)
                        .map(|t| {
                            let shape = CompShape {
                                d: d(t),
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
                };
                compgcn_stack_forward(&g, &params, &h0, activation)?
            }
        }
    };
    let final_layer = outputs
        .last()
        .cloned()
        .unwrap_or_else(|| Matrix::zeros(0, 0));
    emit(
        &json!({
            "layers": outputs.len(),
            "features": final_layer,
            "readout": readout(&final_layer),
        }),
        out.as_deref(),
    )?;
    Ok(ExitCode::SUCCESS)
}

fn exit(code: i32) -> ExitCode {
    ExitCode::from(code as u8)
}

fn verify(args: VerifyArgs) -> anyhow::Result<ExitCode> {
    if let Some(VerifyCommand::Consistency {
        graph,
        load: load_args,
        pair,
        layers,
        seeds,
        seed_list,
        width,
        out,
    }) = args.command
    {
        let g = load(
            &graph,
            &load_args,
            &mut new_loader(load_args.numeric_labels),
        )?
        .graph;
        let opts = ConsistencyOptions {
            layers,
            seeds: seed_list.unwrap_or_else(|| (0..seeds).collect()),
            width,
            ..Default::default()
        };
        let report = wl_gnn_consistency(&g, pair, &opts)?;
        emit(&report, out.as_deref())?;
        return Ok(exit(if report.holds() { 0 } else { 1 }));
    }
    let config: SuiteConfig = match &args.config {
        Some(path) => {
            let text =
                fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        None => SuiteConfig::default(),
    };
    if args.all {
        let summary = run_all(&config, args.parallel);
        for v in &summary.verdicts {
            let status = match v.exit_code() {
                0 => "pass",
                1 => "FAIL",
                _ => "ERROR",
            };
            eprintln!("{:<14} {status:<5} {} ms", v.suite.name(), v.runtime_ms);
        }
        emit(&summary, args.out.as_deref())?;
        return Ok(exit(summary.exit_code()));
    }
    let Some(id) = args.suite else {
        bail!("pass --suite <id>, --all, or a subcommand");
    };
    let verdict = run_suite_verdict(id, &config);
    emit(&verdict, args.out.as_deref())?;
    Ok(exit(verdict.exit_code()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Wl(cmd) => wl(cmd),
        Command::Gen(args) => gen(args),
        Command::Gnn(cmd) => gnn(cmd),
        Command::Verify(args) => verify(args),
    };
    match result {
        Ok(code) => code,
        Err(err) => {
            eprintln!("relwl: {err:#}");
            exit(2)
        }
    }
}
