//! Nearest-Kronecker-product approximation and sequential Kronecker-sum
//! factorization.
//!
//! A matrix `X` of size `(i1·i2) × (j1·j2)` is approximated by
//! `Σ_r C_r ⊗ B_r` with `C_r: i2 × j2` (the left operand, which sets the block
//! grid) and `B_r: i1 × j1` (the right operand, which sets the block size).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, C64};

/// A division `(I1, I2, J1, J2)` of the channel dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FactorShape {
    pub i1: usize,
    pub i2: usize,
    pub j1: usize,
    pub j2: usize,
}

impl FactorShape {
    pub fn new(i1: usize, i2: usize, j1: usize, j2: usize) -> Result<Self> {
        if i1 == 0 || i2 == 0 || j1 == 0 || j2 == 0 {
            return Err(Error::InvalidShape(format!(
                "({i1},{i2},{j1},{j2}) has a zero factor"
            )));
        }
        Ok(FactorShape { i1, i2, j1, j2 })
    }

    pub fn rows(&self) -> usize {
        self.i1 * self.i2
    }

    pub fn cols(&self) -> usize {
        self.j1 * self.j2
    }

    /// Dims of the left Kronecker operand (`C`).
    pub fn left_dims(&self) -> (usize, usize) {
        (self.i2, self.j2)
    }

    /// Dims of the right Kronecker operand (`B`).
    pub fn right_dims(&self) -> (usize, usize) {
        (self.i1, self.j1)
    }

    /// Upper bound on the rank of the rearranged matrix: `min{i1·j1, i2·j2}`.
    pub fn full_rank(&self) -> usize {
        (self.i1 * self.j1).min(self.i2 * self.j2)
    }

    pub fn check_matrix(&self, x: &CMatrix) -> Result<()> {
        if x.nrows() != self.rows() || x.ncols() != self.cols() {
            return Err(Error::InvalidShape(format!(
                "shape {self} needs a {}x{} matrix, got {}x{}",
                self.rows(),
                self.cols(),
                x.nrows(),
                x.ncols()
            )));
        }
        Ok(())
    }
}

impl std::fmt::Display for FactorShape {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{},{},{})", self.i1, self.i2, self.j1, self.j2)
    }
}

impl std::str::FromStr for FactorShape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<usize> = s
            .trim_matches(|c| c == '(' || c == ')' || c == '[' || c == ']')
            .split(',')
            .map(|p| p.trim().parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Parse(format!("shape {s:?}: {e}")))?;
        match parts.as_slice() {
            &[i1, i2, j1, j2] => FactorShape::new(i1, i2, j1, j2),
            _ => Err(Error::Parse(format!("shape {s:?} needs four integers"))),
        }
    }
}

/// One `left ⊗ right` term (`C_r ⊗ B_r`).
#[derive(Debug, Clone, PartialEq)]
pub struct KroneckerTerm {
    pub left: CMatrix,
    pub right: CMatrix,
}

impl KroneckerTerm {
    pub fn new(left: CMatrix, right: CMatrix) -> Self {
        KroneckerTerm { left, right }
    }

    pub fn shape(&self) -> FactorShape {
        FactorShape {
            i1: self.right.nrows(),
            i2: self.left.nrows(),
            j1: self.right.ncols(),
            j2: self.left.ncols(),
        }
    }

    pub fn to_matrix(&self) -> CMatrix {
        linalg::kronecker(&self.left, &self.right)
    }
}

/// Rearranges `x` so that Kronecker products become rank one: row
/// `n + m·i2` holds `vec` of block `(n, m)` (each block `i1 × j1`), giving an
/// `(i2·j2) × (i1·j1)` matrix with `rearrange(C ⊗ B) = vec(C)·vec(B)ᵀ`.
pub fn rearrange(x: &CMatrix, shape: FactorShape) -> Result<CMatrix> {
    shape.check_matrix(x)?;
    let FactorShape { i1, i2, j1, j2 } = shape;
    let mut k = CMatrix::zeros(i2 * j2, i1 * j1);
    for m in 0..j2 {
        for n in 0..i2 {
            let row = n + m * i2;
            for c in 0..j1 {
                for r in 0..i1 {
                    k[(row, r + c * i1)] = x[(n * i1 + r, m * j1 + c)];
                }
            }
        }
    }
    Ok(k)
}

/// The single Kronecker term closest to `x` in Frobenius norm, from the
/// dominant singular triplet `(σ, u, v)` of `rearrange(x)`:
/// `left = reshape(√σ·u)`, `right = reshape(√σ·v*)`.
pub fn nearest_kronecker(x: &CMatrix, shape: FactorShape) -> Result<KroneckerTerm> {
    let k = rearrange(x, shape)?;
    let (sigma, u, v) = linalg::dominant_triplet(&k)?;
    let root = C64::new(sigma.sqrt(), 0.0);
    let (li, lj) = shape.left_dims();
    let (ri, rj) = shape.right_dims();
    let left = linalg::reshape(&(u * root), li, lj)?;
    let right = linalg::reshape(&(v.map(|z| z.conj()) * root), ri, rj)?;
    Ok(KroneckerTerm { left, right })
}

/// Sum of `left ⊗ right` over the terms; the zero matrix for no terms.
pub fn reconstruct(terms: &[KroneckerTerm], shape: FactorShape) -> Result<CMatrix> {
    let mut out = CMatrix::zeros(shape.rows(), shape.cols());
    for (r, t) in terms.iter().enumerate() {
        if t.shape() != shape {
            return Err(Error::InvalidShape(format!(
                "term {r} has shape {}, expected {shape}",
                t.shape()
            )));
        }
        out += t.to_matrix();
    }
    Ok(out)
}

/// Fits `r_terms` Kronecker terms one at a time, each the nearest term to the
/// residual of `x` after subtracting all previously fitted terms.
pub fn sequential_factorize(x: &CMatrix, shape: FactorShape, r_terms: usize) -> Result<Vec<KroneckerTerm>> {
    if r_terms == 0 {
        return Err(Error::InvalidConfig("at least one term is required".into()));
    }
    shape.check_matrix(x)?;
    let mut terms = Vec::with_capacity(r_terms);
    for _ in 0..r_terms {
        let residual = x - reconstruct(&terms, shape)?;
        terms.push(nearest_kronecker(&residual, shape)?);
    }
    Ok(terms)
}

/// Squared Frobenius residual `‖x − Σ_{r'≤r} terms‖²` for `r = 1..=len`.
pub fn residual_curve(x: &CMatrix, terms: &[KroneckerTerm], shape: FactorShape) -> Result<Vec<f64>> {
    shape.check_matrix(x)?;
    let mut acc = CMatrix::zeros(shape.rows(), shape.cols());
    let mut out = Vec::with_capacity(terms.len());
    for t in terms {
        acc += t.to_matrix();
        out.push(linalg::fro_sq(&(x - &acc)));
    }
    Ok(out)
}
