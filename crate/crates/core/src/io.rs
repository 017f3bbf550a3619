//! JSON interchange for algebras, forms and vectors.
//!
//! Matrices are `{"dim": n, "re": [[...]], "im": [[...]]}` with row-major
//! nested arrays; `im` may be omitted for real matrices. Forms carry
//! `"kind": "density"` and vectors `"kind": "hs_vector"`.

use serde::{Deserialize, Serialize};

use crate::algebra::{AlgElement, Algebra, PositiveForm};
use crate::error::{Error, Result};
use crate::linalg::{c64, ComplexMatrix, TolerancePolicy};
use crate::standard_form::HSVector;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AlgebraJson {
    pub block_dims: Vec<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixJson {
    pub dim: usize,
    pub re: Vec<Vec<f64>>,
    #[serde(default)]
    pub im: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BlocksJson {
    pub kind: String,
    pub blocks: Vec<MatrixJson>,
}

pub const KIND_DENSITY: &str = "density";
pub const KIND_VECTOR: &str = "hs_vector";
pub const KIND_ELEMENT: &str = "element";

fn parse_err(e: serde_json::Error) -> Error {
    Error::Parse(e.to_string())
}

impl MatrixJson {
    pub fn to_matrix(&self) -> Result<ComplexMatrix> {
        let n = self.dim;
        let rows_ok = |m: &Vec<Vec<f64>>| m.len() == n && m.iter().all(|r| r.len() == n);
        if !rows_ok(&self.re) {
            return Err(Error::Parse(format!("`re` must be a {n}x{n} array")));
        }
        if let Some(im) = &self.im {
            if !rows_ok(im) {
                return Err(Error::Parse(format!("`im` must be a {n}x{n} array")));
            }
        }
        let m = ComplexMatrix::from_fn(n, n, |i, j| {
            let im = self.im.as_ref().map_or(0.0, |m| m[i][j]);
            c64(self.re[i][j], im)
        });
        crate::linalg::check_finite(&m)?;
        Ok(m)
    }

    pub fn from_matrix(m: &ComplexMatrix) -> Self {
        let n = m.nrows();
        let grid = |f: &dyn Fn(usize, usize) -> f64| (0..n).map(|i| (0..n).map(|j| f(i, j)).collect()).collect();
        Self {
            dim: n,
            re: grid(&|i, j| m[(i, j)].re),
            im: Some(grid(&|i, j| m[(i, j)].im)),
        }
    }
}

pub fn parse_algebra(text: &str, tol: TolerancePolicy) -> Result<Algebra> {
    let a: AlgebraJson = serde_json::from_str(text).map_err(parse_err)?;
    Algebra::with_policy(&a.block_dims, tol)
}

fn parse_blocks(text: &str, alg: &Algebra, kind: &str) -> Result<Vec<ComplexMatrix>> {
    let b: BlocksJson = serde_json::from_str(text).map_err(parse_err)?;
    if b.kind != kind {
        return Err(Error::Parse(format!("expected kind `{kind}`, found `{}`", b.kind)));
    }
    let dims: Vec<usize> = b.blocks.iter().map(|m| m.dim).collect();
    if dims != alg.dims() {
        return Err(Error::AlgebraMismatch(format!(
            "file has blocks {dims:?}, algebra has {:?}",
            alg.dims()
        )));
    }
    b.blocks.iter().map(MatrixJson::to_matrix).collect()
}

pub fn parse_form(text: &str, alg: &Algebra) -> Result<PositiveForm> {
    PositiveForm::new(alg, parse_blocks(text, alg, KIND_DENSITY)?)
}

pub fn parse_vector(text: &str, alg: &Algebra) -> Result<HSVector> {
    HSVector::new(alg, parse_blocks(text, alg, KIND_VECTOR)?)
}

pub fn parse_element(text: &str, alg: &Algebra) -> Result<AlgElement> {
    AlgElement::new(alg, parse_blocks(text, alg, KIND_ELEMENT)?)
}

fn blocks_json(kind: &str, blocks: &[ComplexMatrix]) -> BlocksJson {
    BlocksJson {
        kind: kind.to_string(),
        blocks: blocks.iter().map(MatrixJson::from_matrix).collect(),
    }
}

pub fn form_json(f: &PositiveForm) -> BlocksJson {
    blocks_json(KIND_DENSITY, f.densities())
}

pub fn vector_json(v: &HSVector) -> BlocksJson {
    blocks_json(KIND_VECTOR, v.blocks())
}

pub fn element_json(x: &AlgElement) -> BlocksJson {
    blocks_json(KIND_ELEMENT, x.blocks())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let tol = TolerancePolicy::default();
        let alg = parse_algebra(r#"{"block_dims":[2]}"#, tol).unwrap();
        let text = r#"{"kind":"density","blocks":[{"dim":2,"re":[[0.5,0.1],[0.1,0.5]],"im":[[0,0.2],[-0.2,0]]}]}"#;
        let f = parse_form(text, &alg).unwrap();
        let back = serde_json::to_string(&form_json(&f)).unwrap();
        let again = parse_form(&back, &alg).unwrap();
        assert_eq!(f.density(0), again.density(0));
    }

    #[test]
    fn errors() {
        let tol = TolerancePolicy::default();
        assert!(matches!(parse_algebra("{", tol), Err(Error::Parse(_))));
        assert!(parse_algebra(r#"{"block_dims":[]}"#, tol).is_err());
        let alg = parse_algebra(r#"{"block_dims":[2]}"#, tol).unwrap();
        let wrong_dim = r#"{"kind":"density","blocks":[{"dim":3,"re":[[1,0,0],[0,0,0],[0,0,0]]}]}"#;
        assert!(matches!(parse_form(wrong_dim, &alg), Err(Error::AlgebraMismatch(_))));
        let ragged = r#"{"kind":"density","blocks":[{"dim":2,"re":[[1,0]]}]}"#;
        assert!(matches!(parse_form(ragged, &alg), Err(Error::Parse(_))));
        let kind = r#"{"kind":"hs_vector","blocks":[{"dim":2,"re":[[1,0],[0,0]]}]}"#;
        assert!(matches!(parse_form(kind, &alg), Err(Error::Parse(_))));
        assert!(parse_vector(kind, &alg).is_ok());
        let neg = r#"{"kind":"density","blocks":[{"dim":2,"re":[[1,0],[0,-1]]}]}"#;
        assert!(matches!(parse_form(neg, &alg), Err(Error::NotPositive { .. })));
    }
}
