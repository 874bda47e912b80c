//! Parameter translations between CompGCN and R-GCN layers.

use super::compose::Composition;
use super::layers::{compgcn_forward, Activation, Aggregate, CompParams, RgcnParams};
use super::matrix::Matrix;
use crate::error::{Error, Result};
use crate::graph::MultiRelGraph;

/// R-GCN layer computing the same function as a basic `mult` CompGCN layer:
/// `W_0` is kept and `W_i = diag(z_i) W_1`.
pub fn convert_mult_to_rgcn(cp: &CompParams) -> Result<RgcnParams> {
    if cp.composition != Composition::Mult {
        return Err(Error::contract(format!(
            "only mult layers convert to R-GCN, got {}",
            cp.composition
        )));
    }
    if cp.is_directional() || cp.normalize {
        return Err(Error::contract(
            "only basic (undirected, unnormalized) layers convert",
        ));
    }
    cp.check(cp.z.len())?;
    let w_rel =
        cp.z.iter()
            .map(|z| Matrix::from_fn(cp.w1.rows, cp.w1.cols, |a, b| z[a] * cp.w1.get(a, b)))
            .collect();
    Ok(RgcnParams {
        w0: cp.w0.clone(),
        w_rel,
        aggregate: Aggregate::Sum,
        mlp: None,
    })
}

/// Two CompGCN layers reproducing one R-GCN layer. `replicate` copies
/// `h_v` into one block per relation and must run with the identity
/// activation; `project` uses `mult` with block indicators as relation
/// features so relation `i` only sees its own block, projected by `W_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct CompProgram {
    pub replicate: CompParams,
    pub project: CompParams,
}

impl CompProgram {
    pub fn forward(&self, g: &MultiRelGraph, h: &Matrix, activation: Activation) -> Result<Matrix> {
        let wide = compgcn_forward(g, &self.replicate, h, Activation::Identity)?;
        compgcn_forward(g, &self.project, &wide, activation)
    }
}

pub fn simulate_rgcn_with_compgcn(rp: &RgcnParams) -> Result<CompProgram> {
    if rp.aggregate != Aggregate::Sum {
        return Err(Error::contract("only sum aggregation can be simulated"));
    }
    if rp.mlp.is_some() {
        return Err(Error::contract("relation MLPs cannot be simulated"));
    }
    let (d, e) = (rp.w0.rows, rp.w0.cols);
    let r = rp.w_rel.len();
    if rp.w_rel.iter().any(|w| (w.rows, w.cols) != (d, e)) {
        return Err(Error::contract("relation matrices must match W_0's shape"));
    }
    // Without relations a single block keeps the widths positive.
    let blocks = r.max(1);
    let wide = d * blocks;
    let replicate = CompParams {
        w0: Matrix::from_fn(d, wide, |a, b| if b % d == a { 1.0 } else { 0.0 }),
        w1: Matrix::zeros(d, wide),
        z: vec![vec![1.0; d]; r],
        composition: Composition::Mult,
        scale_alphas: Vec::new(),
        mlp: None,
        w1_out: None,
        normalize: false,
        relation_update: None,
    };
    let w1 = if r == 0 {
        Matrix::zeros(wide, e)
    } else {
        Matrix::vstack(&rp.w_rel)?
    };
    let project = CompParams {
        w0: Matrix::from_fn(wide, e, |a, b| if a < d { rp.w0.get(a, b) } else { 0.0 }),
        w1,
        z: (0..r)
            .map(|i| {
                (0..wide)
                    .map(|p| if p / d == i { 1.0 } else { 0.0 })
                    .collect()
            })
            .collect(),
        composition: Composition::Mult,
        scale_alphas: Vec::new(),
        mlp: None,
        w1_out: None,
        normalize: false,
        relation_update: None,
    };
    Ok(CompProgram { replicate, project })
}
