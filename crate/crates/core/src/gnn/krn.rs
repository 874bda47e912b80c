//! k-tuple relational network: CompGCN-style message passing over `V^k`,
//! where position `j` of a tuple exchanges messages with the tuples obtained
//! by replacing its `j`-th vertex with a neighbor in some relation.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::compose::{compose, composed_width, Composition, Mlp};
use super::layers::{Activation, FeatureClasses};
use super::matrix::Matrix;
use crate::error::{Error, Result};
use crate::graph::MultiRelGraph;
use crate::wl::tuple::{atp_signatures, checked_tuple_count, TupleIndexer};
use crate::wl::ColorDictionary;

/// One k-RN layer:
/// `sigma(h_t W_0 + sum_j sum_i sum_{w in N_i(t_j)} phi(h_{t[j <- w]}, z_i) W_{1,j})`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KrnParams {
    pub k: usize,
    pub w0: Matrix,
    /// One projection per tuple position.
    pub w1: Vec<Matrix>,
    pub z: Vec<Vec<f64>>,
    pub composition: Composition,
    #[serde(default)]
    pub scale_alphas: Vec<f64>,
    #[serde(default)]
    pub mlp: Option<Mlp>,
}

impl KrnParams {
    pub fn random<R: Rng>(
        rng: &mut R,
        k: usize,
        d: usize,
        e: usize,
        r: usize,
        composition: Composition,
    ) -> Self {
        let mut m = |rows: usize, cols: usize| {
            Matrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..=1.0))
        };
        let b = composition.relation_width(d);
        let mlp = (composition == Composition::ConcatMlp).then(|| Mlp {
            hidden: m(d + b, e),
            out: m(e, d),
        });
        let c = composed_width(composition, d, b, mlp.as_ref()).expect("consistent random shapes");
        let w0 = m(d, e);
        let w1 = (0..k).map(|_| m(c, e)).collect();
        let z = (0..r).map(|_| m(1, b).data).collect();
        let scale_alphas = if composition == Composition::Scale {
            m(1, r).data
        } else {
            Vec::new()
        };
        KrnParams {
            k,
            w0,
            w1,
            z,
            composition,
            scale_alphas,
            mlp,
        }
    }

    pub fn input_width(&self) -> usize {
        self.w0.rows
    }

    pub fn output_width(&self) -> usize {
        self.w0.cols
    }

    fn check(&self, r: usize) -> Result<()> {
        let (d, e) = (self.w0.rows, self.w0.cols);
        if self.k == 0 || self.w1.len() != self.k {
            return Err(Error::contract(format!(
                "order {} with {} position matrices",
                self.k,
                self.w1.len()
            )));
        }
        if self.z.len() != r {
            return Err(Error::contract(format!(
                "{} relation features for {r} relations",
                self.z.len()
            )));
        }
        let b = self.z.first().map_or(0, Vec::len);
        if self.z.iter().any(|z| z.len() != b) {
            return Err(Error::contract("relation features differ in width"));
        }
        let c = composed_width(self.composition, d, b, self.mlp.as_ref())?;
        if self.w1.iter().any(|w| (w.rows, w.cols) != (c, e)) {
            return Err(Error::contract(format!(
                "position matrices must be {c}x{e}"
            )));
        }
        if self.composition == Composition::Scale && self.scale_alphas.len() != r {
            return Err(Error::contract("scale needs one alpha per relation"));
        }
        Ok(())
    }
}

/// One-hot encodings of the multi-relational atomic types of all `k`-tuples
/// of every graph, with a type numbering shared by all graphs.
pub fn krn_init_features(graphs: &[&MultiRelGraph], k: usize, cap: usize) -> Result<Vec<Matrix>> {
    let mut dict = ColorDictionary::new();
    let colors = graphs
        .iter()
        .map(|&g| atp_signatures(g, k, cap).map(|s| dict.relabel_all(s.as_slice())))
        .collect::<Result<Vec<_>>>()?;
    let dim = dict.len().max(1);
    Ok(colors
        .iter()
        .map(|cs| {
            Matrix::from_fn(
                cs.len(),
                dim,
                |t, j| if cs[t] as usize == j { 1.0 } else { 0.0 },
            )
        })
        .collect())
}

pub fn krn_forward(
    g: &MultiRelGraph,
    params: &KrnParams,
    h: &Matrix,
    activation: Activation,
) -> Result<Matrix> {
    params.check(g.relation_count())?;
    let n = g.vertex_count();
    let k = params.k;
    let rows = checked_tuple_count(n, k, usize::MAX)?;
    if h.rows != rows {
        return Err(Error::contract(format!(
            "{} feature rows, expected n^k = {rows}",
            h.rows
        )));
    }
    if h.cols != params.input_width() {
        return Err(Error::contract(format!(
            "features have width {}, layer expects {}",
            h.cols,
            params.input_width()
        )));
    }
    let r = g.relation_count();
    let classes = FeatureClasses::of(h);
    let alpha = |i: usize| params.scale_alphas.get(i).copied().unwrap_or(0.0);
    // composed[i][class] = phi(h_class, z_i)
    let composed: Vec<Vec<Vec<f64>>> = (0..r)
        .map(|i| {
            classes
                .representative
                .iter()
                .map(|&row| {
                    compose(
                        params.composition,
                        h.row(row),
                        &params.z[i],
                        alpha(i),
                        params.mlp.as_ref(),
                    )
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    // messages[j][i][class] = phi(h_class, z_i) W_{1,j}
    let messages: Vec<Vec<Vec<Vec<f64>>>> = params
        .w1
        .iter()
        .map(|w| {
            composed
                .iter()
                .map(|per_class| per_class.iter().map(|m| w.vec_mul(m)).collect())
                .collect()
        })
        .collect();
    let idx = TupleIndexer::new(n, k);
    let e = params.output_width();
    let out: Vec<f64> = (0..rows)
        .into_par_iter()
        .map_init(
            || (vec![0usize; k], Vec::<u32>::new()),
            |(tuple, keys), t| {
                idx.decode(t, tuple);
                let mut acc = params.w0.vec_mul(h.row(t));
                for (j, per_rel) in messages.iter().enumerate() {
                    for (i, per_class) in per_rel.iter().enumerate() {
                        keys.clear();
                        keys.extend(
                            g.neighbors(i, tuple[j])
                                .iter()
                                .map(|&w| classes.class_of[idx.substitute(t, tuple, j, w)]),
                        );
                        keys.sort_unstable();
                        let mut p = 0;
                        while p < keys.len() {
                            let c = keys[p];
                            let run = keys[p..].iter().take_while(|&&x| x == c).count();
                            for (o, m) in acc.iter_mut().zip(&per_class[c as usize]) {
                                *o += run as f64 * m;
                            }
                            p += run;
                        }
                    }
                }
                acc.into_iter()
                    .map(|x| activation.apply(x))
                    .collect::<Vec<_>>()
            },
        )
        .flatten()
        .collect();
    Ok(Matrix {
        rows,
        cols: e,
        data: out,
    })
}

pub fn krn_stack_forward(
    g: &MultiRelGraph,
    layers: &[KrnParams],
    h0: &Matrix,
    activation: Activation,
) -> Result<Vec<Matrix>> {
    let mut outputs = Vec::with_capacity(layers.len());
    let mut h = h0.clone();
    for layer in layers {
        h = krn_forward(g, layer, &h, activation)?;
        outputs.push(h.clone());
    }
    Ok(outputs)
}
