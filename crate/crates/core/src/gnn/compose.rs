//! Composition maps combining a vertex feature with a relation feature.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::matrix::Matrix;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Composition {
    /// `h + z`
    Add,
    /// `h * z`, element-wise
    Mult,
    /// Rotates each coordinate pair `(h_2j, h_2j+1)` by the angle `z_j`.
    Rotate,
    /// Circular correlation, `(h * z)_i = sum_j h_j z_((i + j) mod d)`.
    Ccorr,
    /// `[h, z]`
    Concat,
    /// `relu([h, z] A) B`
    ConcatMlp,
    /// `alpha_i h`; the relation is represented by a scalar.
    Scale,
}

impl Composition {
    pub const ALL: [Composition; 7] = [
        Composition::Add,
        Composition::Mult,
        Composition::Rotate,
        Composition::Ccorr,
        Composition::Concat,
        Composition::ConcatMlp,
        Composition::Scale,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Composition::Add => "add",
            Composition::Mult => "mult",
            Composition::Rotate => "rotate",
            Composition::Ccorr => "ccorr",
            Composition::Concat => "concat",
            Composition::ConcatMlp => "concat-mlp",
            Composition::Scale => "scale",
        }
    }

    /// Width `b` of the relation vectors for vertex width `d`.
    pub fn relation_width(self, d: usize) -> usize {
        match self {
            Composition::Add | Composition::Mult | Composition::Ccorr => d,
            Composition::Rotate => d / 2,
            Composition::Concat | Composition::ConcatMlp => d,
            Composition::Scale => 0,
        }
    }

    /// Whether the map is affine in `h` with a term depending on `z` only, so
    /// that messages can be summed before projection.
    pub fn is_additive(self) -> bool {
        matches!(self, Composition::Add | Composition::Concat)
    }
}

impl fmt::Display for Composition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Composition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Composition::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::contract(format!("unknown composition `{s}`")))
    }
}

/// Two-layer perceptron `relu(x A) B` without biases.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub hidden: Matrix,
    pub out: Matrix,
}

impl Mlp {
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut hid = self.hidden.vec_mul(x);
        for v in &mut hid {
            *v = v.max(0.0);
        }
        self.out.vec_mul(&hid)
    }

    pub fn check(&self, input: usize) -> Result<()> {
        if self.hidden.rows != input || self.hidden.cols != self.out.rows {
            return Err(Error::contract(format!(
                "MLP shapes {}x{} / {}x{} do not accept width {input}",
                self.hidden.rows, self.hidden.cols, self.out.rows, self.out.cols
            )));
        }
        Ok(())
    }
}

/// Output width of `composition` for vertex width `d` and relation width `b`.
pub fn composed_width(
    composition: Composition,
    d: usize,
    b: usize,
    mlp: Option<&Mlp>,
) -> Result<usize> {
    let mismatch = |want: usize| {
        Err(Error::contract(format!(
            "{composition} needs relation width {want} for vertex width {d}, got {b}"
        )))
    };
    match composition {
        Composition::Add | Composition::Mult | Composition::Ccorr => {
            if b != d {
                return mismatch(d);
            }
            Ok(d)
        }
        Composition::Rotate => {
            if !d.is_multiple_of(2) {
                return Err(Error::contract(format!(
                    "rotate needs an even width, got {d}"
                )));
            }
            if b != d / 2 {
                return mismatch(d / 2);
            }
            Ok(d)
        }
        Composition::Concat => Ok(d + b),
        Composition::ConcatMlp => {
            let mlp = mlp.ok_or_else(|| Error::contract("concat-mlp needs MLP weights"))?;
            mlp.check(d + b)?;
            Ok(mlp.out.cols)
        }
        Composition::Scale => Ok(d),
    }
}

/// Applies `composition` to `h` and the relation feature (`z`, or `alpha` for `scale`).
pub fn compose(
    composition: Composition,
    h: &[f64],
    z: &[f64],
    alpha: f64,
    mlp: Option<&Mlp>,
) -> Result<Vec<f64>> {
    let d = h.len();
    composed_width(composition, d, z.len(), mlp)?;
    Ok(match composition {
        Composition::Add => h.iter().zip(z).map(|(a, b)| a + b).collect(),
        Composition::Mult => h.iter().zip(z).map(|(a, b)| a * b).collect(),
        Composition::Rotate => {
            let mut out = vec![0.0; d];
            for (j, &theta) in z.iter().enumerate() {
                let (s, c) = theta.sin_cos();
                let (x, y) = (h[2 * j], h[2 * j + 1]);
                out[2 * j] = x * c - y * s;
                out[2 * j + 1] = x * s + y * c;
            }
            out
        }
        Composition::Ccorr => (0..d)
            .map(|i| (0..d).map(|j| h[j] * z[(i + j) % d]).sum())
            .collect(),
        Composition::Concat => [h, z].concat(),
        Composition::ConcatMlp => mlp.expect("checked above").apply(&[h, z].concat()),
        Composition::Scale => h.iter().map(|x| alpha * x).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ccorr_single_entry() {
        assert_eq!(
            compose(Composition::Ccorr, &[3.0], &[-2.0], 0.0, None).unwrap(),
            vec![-6.0]
        );
    }

    #[test]
    fn ccorr_matches_one_based_definition() {
        let h = [1.0, 2.0, 3.0];
        let z = [0.5, -1.0, 4.0];
        let d = 3;
        // (h * z)_i = sum_{j=1..d} h_j z_{((i + j - 2) mod d) + 1}
        let expected: Vec<f64> = (1..=d)
            .map(|i| (1..=d).map(|j| h[j - 1] * z[(i + j - 2) % d]).sum())
            .collect();
        assert_eq!(
            compose(Composition::Ccorr, &h, &z, 0.0, None).unwrap(),
            expected
        );
    }

    #[test]
    fn identities() {
        let h = [0.3, -1.5, 2.0, 7.0];
        assert_eq!(
            compose(Composition::Mult, &h, &[1.0; 4], 0.0, None).unwrap(),
            h
        );
        assert_eq!(
            compose(Composition::Rotate, &h, &[0.0; 2], 0.0, None).unwrap(),
            h
        );
        assert_eq!(compose(Composition::Scale, &h, &[], 1.0, None).unwrap(), h);
        assert_eq!(
            compose(Composition::Add, &h, &[0.0; 4], 0.0, None).unwrap(),
            h
        );
    }

    #[test]
    fn rotate_quarter_turn() {
        let out = compose(
            Composition::Rotate,
            &[1.0, 0.0],
            &[std::f64::consts::FRAC_PI_2],
            0.0,
            None,
        )
        .unwrap();
        assert!(out[0].abs() < 1e-15 && (out[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn widths_are_checked() {
        assert!(compose(Composition::Mult, &[1.0, 2.0], &[1.0], 0.0, None).is_err());
        assert!(compose(Composition::Rotate, &[1.0, 2.0, 3.0], &[0.0], 0.0, None).is_err());
        assert!(compose(Composition::ConcatMlp, &[1.0], &[1.0], 0.0, None).is_err());
        let concat = compose(Composition::Concat, &[1.0], &[2.0, 3.0], 0.0, None).unwrap();
        assert_eq!(concat, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn mlp_is_relu_sandwich() {
        let mlp = Mlp {
            hidden: Matrix::from_rows(&[vec![1.0, -1.0], vec![1.0, 1.0]]).unwrap(),
            out: Matrix::from_rows(&[vec![2.0], vec![3.0]]).unwrap(),
        };
        // [1, -2] A = [-1, -3] -> relu -> 0
        let out = compose(Composition::ConcatMlp, &[1.0], &[-2.0], 0.0, Some(&mlp)).unwrap();
        assert_eq!(out, vec![0.0]);
        let out = compose(Composition::ConcatMlp, &[2.0], &[1.0], 0.0, Some(&mlp)).unwrap();
        // [2, 1] A = [3, -1] -> [3, 0] -> 6
        assert_eq!(out, vec![6.0]);
    }

    #[test]
    fn names_round_trip() {
        for c in Composition::ALL {
            assert_eq!(c.name().parse::<Composition>().unwrap(), c);
            assert_eq!(
                serde_json::to_string(&c).unwrap(),
                format!("\"{}\"", c.name())
            );
        }
    }
}
