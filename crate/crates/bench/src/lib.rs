//! Workloads shared by the criterion benches.

use relwl_core::gnn::{
    label_features, Aggregate, CompParams, CompShape, Composition, Matrix, RgcnParams,
};
use relwl_core::random::{random_sparse_graph, seeded};
use relwl_core::MultiRelGraph;

/// Unlabeled random graph with `m` edges spread over `r` relations.
pub fn sparse_graph(n: usize, m: usize, r: usize, seed: u64) -> MultiRelGraph {
    random_sparse_graph(&mut seeded(seed), n, m, r).expect("valid sparse graph shape")
}

pub struct GnnWorkload {
    pub graph: MultiRelGraph,
    pub features: Matrix,
    pub rgcn: RgcnParams,
    pub compgcn: CompParams,
}

pub fn gnn_workload(
    n: usize,
    m: usize,
    r: usize,
    width: usize,
    composition: Composition,
) -> GnnWorkload {
    let graph = sparse_graph(n, m, r, 7);
    let features = label_features(&graph).expect("labels fit");
    let mut rng = seeded(11);
    let rgcn = RgcnParams::random(&mut rng, features.cols, width, r, Aggregate::Sum, None);
    let shape = CompShape {
        d: features.cols,
        e: width,
        r,
        composition,
        directional: false,
        normalize: false,
        relation_update: false,
    };
    let compgcn = CompParams::random(&mut rng, &shape);
    GnnWorkload {
        graph,
        features,
        rgcn,
        compgcn,
    }
}
