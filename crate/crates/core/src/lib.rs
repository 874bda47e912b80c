//! Weisfeiler-Leman refinement for multi-relational graphs and relational
//! graph neural networks whose power it bounds.

pub mod error;
pub mod families;
pub mod gnn;
pub mod graph;
pub mod io;
pub mod iso;
pub mod random;
pub mod verify;
pub mod wl;

pub use error::{Error, Result};
pub use gnn::{Activation, Composition, FeatureMatrix, Matrix};
pub use graph::{
    union_graph, Adjacency, GraphDump, Label, LabeledGraph, MultiRelGraph, RelationalView,
};
pub use verify::{run_all, run_suite, SuiteConfig, SuiteId, Verdict};
pub use wl::{
    distinguish, stable_coloring, AnyColoring, Color, ColorDictionary, ColorHistogram, Coloring,
    Distinction, RefineOptions, TupleColoring, Variant,
};
