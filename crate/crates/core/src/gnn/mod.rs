//! Relational message-passing networks: R-GCN, CompGCN and the k-tuple
//! network, with exact class-grouped aggregation.

pub mod compose;
pub mod consistency;
pub mod convert;
pub mod krn;
pub mod layers;
pub mod linear;
pub mod matrix;

pub use compose::{compose, composed_width, Composition, Mlp};
pub use consistency::{
    label_features, random_stack, wl_gnn_consistency, ConsistencyOptions, ConsistencyReport,
    LayerWitness, Pairing, Stack, Violation,
};
pub use convert::{convert_mult_to_rgcn, simulate_rgcn_with_compgcn, CompProgram};
pub use krn::{krn_forward, krn_init_features, krn_stack_forward, KrnParams};
pub use layers::{
    compgcn_forward, compgcn_stack_forward, init_features, readout, rgcn_forward,
    rgcn_stack_forward, Activation, Aggregate, CompParams, CompShape, InitMode, RgcnParams,
};
pub use linear::{row_partition, wl_step_as_linear_counts};
pub use matrix::{within_relative, FeatureMatrix, IntMatrix, Matrix};
