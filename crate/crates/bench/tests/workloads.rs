use relwl_bench::{gnn_workload, sparse_graph};
use relwl_core::gnn::{compgcn_forward, rgcn_forward, Activation, Composition};

#[test]
fn sparse_graph_has_requested_size() {
    let g = sparse_graph(200, 600, 5, 1);
    assert_eq!(g.vertex_count(), 200);
    assert_eq!(g.relation_count(), 5);
    assert_eq!(g.edge_count(), 600);
    assert_eq!(sparse_graph(200, 600, 5, 1), g);
}

#[test]
fn workload_layers_fit_their_features() {
    let w = gnn_workload(300, 900, 3, 8, Composition::Mult);
    let a = rgcn_forward(&w.graph, &w.rgcn, &w.features, Activation::Relu).unwrap();
    let b = compgcn_forward(&w.graph, &w.compgcn, &w.features, Activation::Relu).unwrap();
    assert_eq!((a.rows, a.cols), (300, 8));
    assert_eq!((b.rows, b.cols), (300, 8));
}
