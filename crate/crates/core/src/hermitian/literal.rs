//! JSON matrix literal: `{"d": int, "re": [[...]], "im": [[...]]}` with
//! row-major d×d arrays; a missing `"im"` means zero imaginary part.
//! serde_json emits shortest round-trip decimals, so written values carry
//! full f64 precision.

use serde::{Deserialize, Serialize};

use super::{Complex64, HermitianMatrix, MatrixError};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixLiteral {
    pub d: usize,
    pub re: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<Vec<Vec<f64>>>,
}

impl From<HermitianMatrix> for MatrixLiteral {
    fn from(m: HermitianMatrix) -> Self {
        let d = m.dim();
        let mut re = vec![vec![0.0; d]; d];
        let mut im = vec![vec![0.0; d]; d];
        let mut any_im = false;
        for i in 0..d {
            for j in 0..d {
                let v = m.entry(i, j);
                re[i][j] = v.re;
                im[i][j] = v.im;
                if v.im != 0.0 {
                    any_im = true;
                }
            }
        }
        MatrixLiteral {
            d,
            re,
            im: if any_im { Some(im) } else { None },
        }
    }
}

impl TryFrom<MatrixLiteral> for HermitianMatrix {
    type Error = MatrixError;

    fn try_from(lit: MatrixLiteral) -> Result<Self, MatrixError> {
        let d = lit.d;
        let expected = d * d;
        let flat_re: Vec<f64> = lit.re.iter().flatten().copied().collect();
        if lit.re.len() != d || flat_re.len() != expected {
            return Err(MatrixError::BadShape {
                expected,
                got: flat_re.len(),
            });
        }
        let flat_im: Vec<f64> = match &lit.im {
            Some(rows) => {
                let flat: Vec<f64> = rows.iter().flatten().copied().collect();
                if rows.len() != d || flat.len() != expected {
                    return Err(MatrixError::BadShape {
                        expected,
                        got: flat.len(),
                    });
                }
                flat
            }
            None => vec![0.0; expected],
        };
        let entries: Vec<Complex64> = flat_re
            .into_iter()
            .zip(flat_im)
            .map(|(re, im)| Complex64::new(re, im))
            .collect();
        HermitianMatrix::new(d, entries)
    }
}
