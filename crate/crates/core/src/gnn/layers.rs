//! R-GCN and CompGCN layers.
//!
//! Neighbor messages are never summed in neighbor-list order. Rows of the
//! input are grouped into classes of bitwise-identical features, each
//! distinct message is computed once, and the sum over a neighborhood adds
//! `count * message` in ascending class order. Two vertices whose neighbor
//! multisets agree therefore receive bitwise-identical sums.

use std::collections::HashMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::compose::{compose, composed_width, Composition, Mlp};
use super::matrix::Matrix;
use crate::error::{Error, Result};
use crate::graph::MultiRelGraph;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    #[default]
    Relu,
    /// `1` for positive inputs, `-1` otherwise.
    Sign,
    Identity,
}

impl Activation {
    #[inline]
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Relu => x.max(0.0),
            Activation::Sign => {
                if x > 0.0 {
                    1.0
                } else {
                    -1.0
                }
            }
            Activation::Identity => x,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitMode {
    /// Every row is the first standard basis vector. Needs uniform labels.
    ConstantBasis,
    /// Row `v` is the standard basis vector with index `label(v)`.
    OnehotLabel,
}

/// Initial vertex features consistent with the labels.
pub fn init_features(g: &MultiRelGraph, mode: InitMode, dim: usize) -> Result<Matrix> {
    if dim == 0 {
        return Err(Error::contract("feature width must be positive"));
    }
    let n = g.vertex_count();
    match mode {
        InitMode::ConstantBasis => {
            if !g.has_uniform_labels() {
                return Err(Error::contract(
                    "constant-basis features need uniform labels; use onehot-label",
                ));
            }
            Ok(Matrix::from_fn(
                n,
                dim,
                |_, j| if j == 0 { 1.0 } else { 0.0 },
            ))
        }
        InitMode::OnehotLabel => {
            let max = g.labels().iter().copied().max().unwrap_or(0) as usize;
            if dim <= max {
                return Err(Error::contract(format!(
                    "onehot-label needs width > {max} (largest label), got {dim}"
                )));
            }
            Ok(Matrix::from_fn(n, dim, |v, j| {
                if j == g.label(v) as usize {
                    1.0
                } else {
                    0.0
                }
            }))
        }
    }
}

/// Groups rows of bitwise-identical features. Class ids follow the
/// lexicographic order of the rows' bit patterns, so the relative order of
/// two feature values is the same in every matrix.
pub(crate) struct FeatureClasses {
    pub class_of: Vec<u32>,
    /// A row holding each class's feature.
    pub representative: Vec<usize>,
}

impl FeatureClasses {
    pub fn of(h: &Matrix) -> Self {
        let mut first: HashMap<Vec<u64>, usize> = HashMap::new();
        let bits: Vec<Vec<u64>> = (0..h.rows).map(|i| h.row_bits(i)).collect();
        for (i, b) in bits.iter().enumerate() {
            first.entry(b.clone()).or_insert(i);
        }
        let mut distinct: Vec<(&Vec<u64>, usize)> = first.iter().map(|(b, &i)| (b, i)).collect();
        distinct.sort_unstable();
        let id: HashMap<&Vec<u64>, u32> = distinct
            .iter()
            .enumerate()
            .map(|(c, (b, _))| (*b, c as u32))
            .collect();
        FeatureClasses {
            class_of: bits.iter().map(|b| id[b]).collect(),
            representative: distinct.iter().map(|(_, i)| *i).collect(),
        }
    }

    pub fn count(&self) -> usize {
        self.representative.len()
    }
}

#[inline]
fn axpy(acc: &mut [f64], a: f64, x: &[f64]) {
    for (o, v) in acc.iter_mut().zip(x) {
        *o += a * v;
    }
}

/// Class multiset of `neighbors` as `(class, count)` in ascending class order.
fn class_counts(
    classes: &FeatureClasses,
    neighbors: &[usize],
    scratch: &mut Vec<u32>,
) -> Vec<(u32, usize)> {
    scratch.clear();
    scratch.extend(neighbors.iter().map(|&u| classes.class_of[u]));
    scratch.sort_unstable();
    let mut out: Vec<(u32, usize)> = Vec::new();
    for &c in scratch.iter() {
        match out.last_mut() {
            Some((last, n)) if *last == c => *n += 1,
            _ => out.push((c, 1)),
        }
    }
    out
}

fn check_input(g: &MultiRelGraph, h: &Matrix, d: usize) -> Result<()> {
    if h.rows != g.vertex_count() {
        return Err(Error::contract(format!(
            "{} feature rows for {} vertices",
            h.rows,
            g.vertex_count()
        )));
    }
    if h.cols != d {
        return Err(Error::contract(format!(
            "features have width {}, layer expects {d}",
            h.cols
        )));
    }
    Ok(())
}

fn random_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..=1.0))
}

fn random_vec<R: Rng>(rng: &mut R, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.random_range(-1.0..=1.0)).collect()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregate {
    #[default]
    Sum,
    /// Each relation's sum divided by `|N_i(v)|`; empty neighborhoods contribute zero.
    Mean,
}

/// One R-GCN layer: `sigma(h_v W_0 + sum_i agg_{w in N_i(v)} h_w W_i)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RgcnParams {
    pub w0: Matrix,
    pub w_rel: Vec<Matrix>,
    #[serde(default)]
    pub aggregate: Aggregate,
    /// Shared perceptron applied to each relation's aggregated message.
    #[serde(default)]
    pub mlp: Option<Mlp>,
}

impl RgcnParams {
    pub fn random<R: Rng>(
        rng: &mut R,
        d: usize,
        e: usize,
        r: usize,
        aggregate: Aggregate,
        mlp_hidden: Option<usize>,
    ) -> Self {
        let w0 = random_matrix(rng, d, e);
        let w_rel = (0..r).map(|_| random_matrix(rng, d, e)).collect();
        let mlp = mlp_hidden.map(|hid| Mlp {
            hidden: random_matrix(rng, e, hid),
            out: random_matrix(rng, hid, e),
        });
        RgcnParams {
            w0,
            w_rel,
            aggregate,
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
        if self.w_rel.len() != r {
            return Err(Error::contract(format!(
                "{} relation matrices for {r} relations",
                self.w_rel.len()
            )));
        }
        if self.w_rel.iter().any(|w| (w.rows, w.cols) != (d, e)) {
            return Err(Error::contract("relation matrices must match W_0's shape"));
        }
        if let Some(mlp) = &self.mlp {
            mlp.check(e)?;
            if mlp.out.cols != e {
                return Err(Error::contract("relation MLP must map width e to width e"));
            }
        }
        Ok(())
    }
}

pub fn rgcn_forward(
    g: &MultiRelGraph,
    params: &RgcnParams,
    h: &Matrix,
    activation: Activation,
) -> Result<Matrix> {
    params.check(g.relation_count())?;
    check_input(g, h, params.input_width())?;
    let e = params.output_width();
    let classes = FeatureClasses::of(h);
    // messages[i][class] = h_class W_i
    let messages: Vec<Vec<Vec<f64>>> = params
        .w_rel
        .iter()
        .map(|w| {
            classes
                .representative
                .iter()
                .map(|&row| w.vec_mul(h.row(row)))
                .collect()
        })
        .collect();
    let rows: Vec<Vec<f64>> = (0..g.vertex_count())
        .into_par_iter()
        .map_init(Vec::new, |scratch, v| {
            let mut out = params.w0.vec_mul(h.row(v));
            for (i, msgs) in messages.iter().enumerate() {
                let nb = g.neighbors(i, v);
                let mut inner = vec![0.0; e];
                for (c, count) in class_counts(&classes, nb, scratch) {
                    axpy(&mut inner, count as f64, &msgs[c as usize]);
                }
                if params.aggregate == Aggregate::Mean && !nb.is_empty() {
                    let deg = nb.len() as f64;
                    inner.iter_mut().for_each(|x| *x /= deg);
                }
                if let Some(mlp) = &params.mlp {
                    inner = mlp.apply(&inner);
                }
                out.iter_mut().zip(&inner).for_each(|(o, x)| *o += x);
            }
            out.into_iter().map(|x| activation.apply(x)).collect()
        })
        .collect();
    Matrix::from_rows(&rows).map(|m| with_width(m, g.vertex_count(), e))
}

/// `from_rows` yields a `0 x 0` matrix for empty input; keep the width.
fn with_width(m: Matrix, rows: usize, cols: usize) -> Matrix {
    if rows == 0 {
        Matrix::zeros(0, cols)
    } else {
        m
    }
}

/// One CompGCN layer.
///
/// Basic form: `sigma(h_v W_0 + sum_i sum_{w in N_i(v)} phi(h_w, z_i) W_1)`.
/// With `w1_out` set the layer is directional: every undirected edge is both
/// in-going and out-going, `W_1` projects the in-going messages and `w1_out`
/// the out-going ones. With `normalize` each message from `w` over relation
/// `i` is divided by `sqrt(|N_i(v)| |N_i(w)|)`. The self term is never
/// normalized.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompParams {
    pub w0: Matrix,
    pub w1: Matrix,
    /// Relation features `z_i`; empty vectors for `scale`.
    pub z: Vec<Vec<f64>>,
    pub composition: Composition,
    #[serde(default)]
    pub scale_alphas: Vec<f64>,
    /// Weights of the `concat-mlp` composition.
    #[serde(default)]
    pub mlp: Option<Mlp>,
    #[serde(default)]
    pub w1_out: Option<Matrix>,
    #[serde(default)]
    pub normalize: bool,
    /// `b x b` matrix taking this layer's `z` to the next layer's.
    #[serde(default)]
    pub relation_update: Option<Matrix>,
}

/// Shape and mode of a randomly initialized CompGCN layer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompShape {
    pub d: usize,
    pub e: usize,
    pub r: usize,
    pub composition: Composition,
    #[serde(default)]
    pub directional: bool,
    #[serde(default)]
    pub normalize: bool,
    #[serde(default)]
    pub relation_update: bool,
}

impl CompParams {
    pub fn random<R: Rng>(rng: &mut R, shape: &CompShape) -> Self {
        let CompShape {
            d,
            e,
            r,
            composition,
            ..
        } = *shape;
        let b = composition.relation_width(d);
        let mlp = (composition == Composition::ConcatMlp).then(|| Mlp {
            hidden: random_matrix(rng, d + b, e),
            out: random_matrix(rng, e, d),
        });
        let c = composed_width(composition, d, b, mlp.as_ref()).expect("consistent random shapes");
        let w0 = random_matrix(rng, d, e);
        let w1 = random_matrix(rng, c, e);
        let z = (0..r).map(|_| random_vec(rng, b)).collect();
        let scale_alphas = if composition == Composition::Scale {
            random_vec(rng, r)
        } else {
            Vec::new()
        };
        let w1_out = shape.directional.then(|| random_matrix(rng, c, e));
        let relation_update = shape.relation_update.then(|| random_matrix(rng, b, b));
        CompParams {
            w0,
            w1,
            z,
            composition,
            scale_alphas,
            mlp,
            w1_out,
            normalize: shape.normalize,
            relation_update,
        }
    }

    pub fn input_width(&self) -> usize {
        self.w0.rows
    }

    pub fn output_width(&self) -> usize {
        self.w0.cols
    }

    pub fn relation_width(&self) -> usize {
        self.z.first().map_or(0, Vec::len)
    }

    pub fn is_directional(&self) -> bool {
        self.w1_out.is_some()
    }

    pub(crate) fn check(&self, r: usize) -> Result<usize> {
        let (d, e) = (self.w0.rows, self.w0.cols);
        if self.z.len() != r {
            return Err(Error::contract(format!(
                "{} relation features for {r} relations",
                self.z.len()
            )));
        }
        let b = self.relation_width();
        if self.z.iter().any(|z| z.len() != b) {
            return Err(Error::contract("relation features differ in width"));
        }
        let c = composed_width(self.composition, d, b, self.mlp.as_ref())?;
        for w in std::iter::once(&self.w1).chain(&self.w1_out) {
            if (w.rows, w.cols) != (c, e) {
                return Err(Error::contract(format!(
                    "W_1 is {}x{}, composition output and W_0 need {c}x{e}",
                    w.rows, w.cols
                )));
            }
        }
        if self.composition == Composition::Scale && self.scale_alphas.len() != r {
            return Err(Error::contract("scale needs one alpha per relation"));
        }
        if let Some(u) = &self.relation_update {
            if (u.rows, u.cols) != (b, b) {
                return Err(Error::contract("relation update must be b x b"));
            }
        }
        Ok(c)
    }

    fn alpha(&self, i: usize) -> f64 {
        self.scale_alphas.get(i).copied().unwrap_or(0.0)
    }

    /// `z_i R` for every relation, or `None` without an update matrix.
    pub fn updated_relations(&self) -> Option<Vec<Vec<f64>>> {
        self.relation_update
            .as_ref()
            .map(|u| self.z.iter().map(|z| u.vec_mul(z)).collect())
    }
}

pub fn compgcn_forward(
    g: &MultiRelGraph,
    params: &CompParams,
    h: &Matrix,
    activation: Activation,
) -> Result<Matrix> {
    params.check(g.relation_count())?;
    check_input(g, h, params.input_width())?;
    let additive =
        params.composition.is_additive() && !params.is_directional() && !params.normalize;
    let rows = if additive {
        additive_rows(g, params, h)
    } else {
        grouped_rows(g, params, h)?
    };
    let e = params.output_width();
    let rows: Vec<Vec<f64>> = rows
        .into_iter()
        .map(|r| r.into_iter().map(|x| activation.apply(x)).collect())
        .collect();
    Matrix::from_rows(&rows).map(|m| with_width(m, g.vertex_count(), e))
}

/// For `add` and `concat`, `sum phi(h_w, z_i) W_1` splits into
/// `(sum_w h_w) W_h + (sum_i |N_i(v)| z_i) W_z`; both sums are formed
/// before projecting. The result depends only on the pooled neighbor
/// multiset and the per-relation degrees.
fn additive_rows(g: &MultiRelGraph, params: &CompParams, h: &Matrix) -> Vec<Vec<f64>> {
    let d = params.input_width();
    let b = params.relation_width();
    let (w_h, w_z) = match params.composition {
        Composition::Add => (params.w1.clone(), params.w1.clone()),
        Composition::Concat => (params.w1.row_block(0, d), params.w1.row_block(d, d + b)),
        _ => unreachable!("only additive compositions take this path"),
    };
    let classes = FeatureClasses::of(h);
    let r = g.relation_count();
    (0..g.vertex_count())
        .into_par_iter()
        .map_init(
            || (Vec::new(), Vec::new()),
            |(nb, scratch), v| {
                nb.clear();
                for i in 0..r {
                    nb.extend_from_slice(g.neighbors(i, v));
                }
                let mut pooled = vec![0.0; d];
                for (c, count) in class_counts(&classes, nb, scratch) {
                    axpy(
                        &mut pooled,
                        count as f64,
                        h.row(classes.representative[c as usize]),
                    );
                }
                let mut zsum = vec![0.0; b];
                for i in 0..r {
                    axpy(&mut zsum, g.neighbors(i, v).len() as f64, &params.z[i]);
                }
                let mut out = params.w0.vec_mul(h.row(v));
                let hp = w_h.vec_mul(&pooled);
                let zp = w_z.vec_mul(&zsum);
                for ((o, a), c) in out.iter_mut().zip(&hp).zip(&zp) {
                    *o += a + c;
                }
                out
            },
        )
        .collect()
}

fn grouped_rows(g: &MultiRelGraph, params: &CompParams, h: &Matrix) -> Result<Vec<Vec<f64>>> {
    let classes = FeatureClasses::of(h);
    let r = g.relation_count();
    let projections: Vec<&Matrix> = std::iter::once(&params.w1).chain(&params.w1_out).collect();
    // messages[dir][i][class] = phi(h_class, z_i) W_dir
    let mut messages = Vec::with_capacity(projections.len());
    for w in &projections {
        let mut per_rel = Vec::with_capacity(r);
        for i in 0..r {
            let per_class = classes
                .representative
                .iter()
                .map(|&row| {
                    let m = compose(
                        params.composition,
                        h.row(row),
                        &params.z[i],
                        params.alpha(i),
                        params.mlp.as_ref(),
                    )?;
                    Ok(w.vec_mul(&m))
                })
                .collect::<Result<Vec<_>>>()?;
            per_rel.push(per_class);
        }
        messages.push(per_rel);
    }
    let normalize = params.normalize;
    Ok((0..g.vertex_count())
        .into_par_iter()
        .map_init(Vec::new, |keys: &mut Vec<(usize, u32)>, v| {
            let mut out = params.w0.vec_mul(h.row(v));
            for per_rel in &messages {
                for (i, per_class) in per_rel.iter().enumerate() {
                    let nb = g.neighbors(i, v);
                    // group by (degree of w in relation i, class of w)
                    keys.clear();
                    keys.extend(nb.iter().map(|&w| {
                        let deg = if normalize {
                            g.relation(i).degree(w)
                        } else {
                            0
                        };
                        (deg, classes.class_of[w])
                    }));
                    keys.sort_unstable();
                    let dv = nb.len() as f64;
                    let mut k = 0;
                    while k < keys.len() {
                        let key = keys[k];
                        let run = keys[k..].iter().take_while(|&&x| x == key).count();
                        let weight = if normalize {
                            run as f64 / (dv * key.0 as f64).sqrt()
                        } else {
                            run as f64
                        };
                        axpy(&mut out, weight, &per_class[key.1 as usize]);
                        k += run;
                    }
                }
            }
            out
        })
        .collect())
}

/// Layer outputs of a CompGCN stack, with `relation_update` carrying `z`
/// from one layer into the next.
pub fn compgcn_stack_forward(
    g: &MultiRelGraph,
    layers: &[CompParams],
    h0: &Matrix,
    activation: Activation,
) -> Result<Vec<Matrix>> {
    let mut outputs = Vec::with_capacity(layers.len());
    let mut carried: Option<Vec<Vec<f64>>> = None;
    let mut h = h0.clone();
    for layer in layers {
        let mut layer = layer.clone();
        if let Some(z) = carried.take() {
            if z.first().map(Vec::len) != layer.z.first().map(Vec::len) {
                return Err(Error::contract(
                    "relation update changes the relation width",
                ));
            }
            layer.z = z;
        }
        h = compgcn_forward(g, &layer, &h, activation)?;
        carried = layer.updated_relations();
        outputs.push(h.clone());
    }
    Ok(outputs)
}

pub fn rgcn_stack_forward(
    g: &MultiRelGraph,
    layers: &[RgcnParams],
    h0: &Matrix,
    activation: Activation,
) -> Result<Vec<Matrix>> {
    let mut outputs = Vec::with_capacity(layers.len());
    let mut h = h0.clone();
    for layer in layers {
        h = rgcn_forward(g, layer, &h, activation)?;
        outputs.push(h.clone());
    }
    Ok(outputs)
}

/// Sum of all rows, added class by class in bit-pattern order so the
/// result does not depend on row order.
pub fn readout(features: &Matrix) -> Vec<f64> {
    let classes = FeatureClasses::of(features);
    let mut counts = vec![0usize; classes.count()];
    for &c in &classes.class_of {
        counts[c as usize] += 1;
    }
    let mut out = vec![0.0; features.cols];
    for (c, &rep) in classes.representative.iter().enumerate() {
        axpy(&mut out, counts[c] as f64, features.row(rep));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::gen_prop3;
    use rand::SeedableRng;
    use rand_xoshiro::Xoshiro256StarStar;

    fn rng(seed: u64) -> Xoshiro256StarStar {
        Xoshiro256StarStar::seed_from_u64(seed)
    }

    fn sample_graph() -> MultiRelGraph {
        MultiRelGraph::new(
            5,
            &[vec![(0, 1), (1, 2), (3, 4)], vec![(0, 2), (2, 4)]],
            vec![0, 1, 0, 1, 2],
        )
        .unwrap()
    }

    #[test]
    fn init_modes() {
        let g = MultiRelGraph::unlabeled(3, &[vec![(0, 1)]]).unwrap();
        let h = init_features(&g, InitMode::ConstantBasis, 4).unwrap();
        assert!((0..3).all(|v| h.row(v) == [1.0, 0.0, 0.0, 0.0]));
        let p = gen_prop3();
        let h = init_features(&p, InitMode::OnehotLabel, 3).unwrap();
        assert_eq!(h.row(0), [1.0, 0.0, 0.0]);
        assert_eq!(h.row(1), [1.0, 0.0, 0.0]);
        assert_eq!(h.row(2), [0.0, 1.0, 0.0]);
        assert_eq!(h.row(3), [0.0, 0.0, 1.0]);
        assert!(init_features(&p, InitMode::ConstantBasis, 3).is_err());
        assert!(init_features(&p, InitMode::OnehotLabel, 2).is_err());
    }

    #[test]
    fn sign_of_zero_is_negative() {
        assert_eq!(Activation::Sign.apply(0.0), -1.0);
        assert_eq!(Activation::Sign.apply(1e-300), 1.0);
    }

    #[test]
    fn rgcn_matches_naive_sum() {
        let g = sample_graph();
        let h = init_features(&g, InitMode::OnehotLabel, 3).unwrap();
        for aggregate in [Aggregate::Sum, Aggregate::Mean] {
            let p = RgcnParams::random(&mut rng(1), 3, 4, 2, aggregate, None);
            let out = rgcn_forward(&g, &p, &h, Activation::Identity).unwrap();
            for v in 0..5 {
                let mut want = p.w0.vec_mul(h.row(v));
                for i in 0..2 {
                    let nb = g.neighbors(i, v);
                    for &w in nb {
                        let m = p.w_rel[i].vec_mul(h.row(w));
                        let scale = match aggregate {
                            Aggregate::Sum => 1.0,
                            Aggregate::Mean => 1.0 / nb.len() as f64,
                        };
                        axpy(&mut want, scale, &m);
                    }
                }
                for (a, b) in out.row(v).iter().zip(&want) {
                    assert!((a - b).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn zero_weights_give_zero_output() {
        let g = sample_graph();
        let h = init_features(&g, InitMode::OnehotLabel, 3).unwrap();
        let mut p = RgcnParams::random(&mut rng(2), 3, 2, 2, Aggregate::Sum, None);
        p.w0 = Matrix::zeros(3, 2);
        p.w_rel = vec![Matrix::zeros(3, 2); 2];
        let out = rgcn_forward(&g, &p, &h, Activation::Relu).unwrap();
        assert!(out.data.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn isolated_vertex_sees_only_itself() {
        let g = MultiRelGraph::unlabeled(3, &[vec![(0, 1)]]).unwrap();
        let h = Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]]).unwrap();
        let p = RgcnParams::random(&mut rng(3), 2, 3, 1, Aggregate::Mean, Some(4));
        let out = rgcn_forward(&g, &p, &h, Activation::Identity).unwrap();
        assert_eq!(out.row(2), p.w0.vec_mul(h.row(2)).as_slice());
    }

    #[test]
    fn compgcn_matches_naive_sum() {
        let g = sample_graph();
        let h = init_features(&g, InitMode::OnehotLabel, 4).unwrap();
        for composition in Composition::ALL {
            for (directional, normalize) in
                [(false, false), (true, false), (false, true), (true, true)]
            {
                let shape = CompShape {
                    d: 4,
                    e: 3,
                    r: 2,
                    composition,
                    directional,
                    normalize,
                    relation_update: false,
                };
                let p = CompParams::random(&mut rng(4), &shape);
                let out = compgcn_forward(&g, &p, &h, Activation::Identity).unwrap();
                for v in 0..5 {
                    let mut want = p.w0.vec_mul(h.row(v));
                    for w1 in std::iter::once(&p.w1).chain(&p.w1_out) {
                        for i in 0..2 {
                            let nb = g.neighbors(i, v);
                            for &w in nb {
                                let m = compose(
                                    composition,
                                    h.row(w),
                                    &p.z[i],
                                    p.alpha(i),
                                    p.mlp.as_ref(),
                                )
                                .unwrap();
                                let c = if normalize {
                                    1.0 / ((nb.len() * g.neighbors(i, w).len()) as f64).sqrt()
                                } else {
                                    1.0
                                };
                                axpy(&mut want, c, &w1.vec_mul(&m));
                            }
                        }
                    }
                    for (a, b) in out.row(v).iter().zip(&want) {
                        assert!(
                            (a - b).abs() < 1e-12,
                            "{composition} {directional} {normalize}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn mult_by_ones_equals_unit_scale() {
        let g = sample_graph();
        let h = init_features(&g, InitMode::OnehotLabel, 3).unwrap();
        let shape = CompShape {
            d: 3,
            e: 5,
            r: 2,
            composition: Composition::Mult,
            directional: false,
            normalize: false,
            relation_update: false,
        };
        let mut mult = CompParams::random(&mut rng(5), &shape);
        mult.z = vec![vec![1.0; 3]; 2];
        let mut scale = mult.clone();
        scale.composition = Composition::Scale;
        scale.z = vec![vec![]; 2];
        scale.scale_alphas = vec![1.0; 2];
        let a = compgcn_forward(&g, &mult, &h, Activation::Relu).unwrap();
        let b = compgcn_forward(&g, &scale, &h, Activation::Relu).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_bad_widths() {
        let g = sample_graph();
        let h = init_features(&g, InitMode::OnehotLabel, 3).unwrap();
        let p = RgcnParams::random(&mut rng(6), 4, 2, 2, Aggregate::Sum, None);
        assert!(rgcn_forward(&g, &p, &h, Activation::Relu).is_err());
        let p = RgcnParams::random(&mut rng(6), 3, 2, 1, Aggregate::Sum, None);
        assert!(rgcn_forward(&g, &p, &h, Activation::Relu).is_err());
        let mut c = CompParams::random(
            &mut rng(7),
            &CompShape {
                d: 3,
                e: 2,
                r: 2,
                composition: Composition::Ccorr,
                directional: false,
                normalize: false,
                relation_update: false,
            },
        );
        c.z[1].pop();
        assert!(compgcn_forward(&g, &c, &h, Activation::Relu).is_err());
    }

    #[test]
    fn relation_update_feeds_next_layer() {
        let g = sample_graph();
        let h = init_features(&g, InitMode::OnehotLabel, 4).unwrap();
        let shape = CompShape {
            d: 4,
            e: 4,
            r: 2,
            composition: Composition::Mult,
            directional: false,
            normalize: false,
            relation_update: true,
        };
        let l1 = CompParams::random(&mut rng(8), &shape);
        let l2 = CompParams::random(&mut rng(9), &shape);
        let outs =
            compgcn_stack_forward(&g, &[l1.clone(), l2.clone()], &h, Activation::Relu).unwrap();
        let mut manual = l2.clone();
        manual.z = l1.updated_relations().unwrap();
        let second = compgcn_forward(&g, &manual, &outs[0], Activation::Relu).unwrap();
        assert_eq!(outs[1], second);
    }

    #[test]
    fn readout_ignores_row_order() {
        let m = Matrix::from_rows(&[vec![0.1, 0.2], vec![0.3, -0.7], vec![1e-17, 5.0]]).unwrap();
        let p =
            Matrix::from_rows(&[m.row(2).to_vec(), m.row(0).to_vec(), m.row(1).to_vec()]).unwrap();
        assert_eq!(readout(&m), readout(&p));
        let single = Matrix::from_rows(&[vec![2.5, -1.0]]).unwrap();
        assert_eq!(readout(&single), vec![2.5, -1.0]);
    }
}
