//! One 1-RWL round as an exact integer matrix.

use super::matrix::IntMatrix;
use crate::error::{Error, Result};
use crate::graph::MultiRelGraph;
use crate::wl::{Color, Coloring};

/// `[F | A_1 F | ... | A_r F]` where `F` is the one-hot indicator of `c`
/// (one column per color id) and `A_i` the adjacency matrix of relation `i`.
/// Two rows are equal exactly when the vertices get the same color in the
/// next 1-RWL round.
pub fn wl_step_as_linear_counts(g: &MultiRelGraph, c: &Coloring) -> Result<IntMatrix> {
    let n = g.vertex_count();
    if c.colors.len() != n {
        return Err(Error::contract(format!(
            "coloring covers {} vertices, graph has {n}",
            c.colors.len()
        )));
    }
    let q = c.colors.iter().map(|&x| x as usize + 1).max().unwrap_or(0);
    let r = g.relation_count();
    let cols = q
        .checked_mul(r + 1)
        .ok_or_else(|| Error::contract("count matrix width overflows"))?;
    let mut out = IntMatrix::zeros(n, cols);
    for v in 0..n {
        let row = out.row_mut(v);
        row[c.colors[v] as usize] = 1;
        for i in 0..r {
            let block = &mut row[(i + 1) * q..(i + 2) * q];
            for &w in g.neighbors(i, v) {
                let slot = &mut block[c.colors[w] as usize];
                *slot = slot
                    .checked_add(1)
                    .ok_or_else(|| Error::contract("neighbor count overflows i64"))?;
            }
        }
    }
    Ok(out)
}

/// Numbers the distinct rows of `m` in order of first appearance.
pub fn row_partition(m: &IntMatrix) -> Vec<Color> {
    let mut ids = std::collections::HashMap::new();
    (0..m.rows)
        .map(|v| {
            let next = ids.len() as Color;
            *ids.entry(m.row(v)).or_insert(next)
        })
        .collect()
}
