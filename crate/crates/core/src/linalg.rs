//! Dense complex matrix helpers on top of nalgebra. Decompositions go
//! through faer, whose SVD stays accurate on rank-deficient input.
//!
//! Storage is column-major throughout, which is what `vec` and every
//! reshape in this crate assume.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub use nalgebra::Complex;

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;

/// Squared Frobenius norm.
pub fn fro_sq(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum()
}

pub fn fro(m: &CMatrix) -> f64 {
    fro_sq(m).sqrt()
}

/// Column-major stacking into an `n·m × 1` column.
pub fn vec(m: &CMatrix) -> CMatrix {
    CMatrix::from_column_slice(m.len(), 1, m.as_slice())
}

/// Inverse of [`vec`]; also reinterprets any matrix with `rows·cols`
/// entries in column-major order.
pub fn reshape(m: &CMatrix, rows: usize, cols: usize) -> Result<CMatrix> {
    if m.len() != rows * cols {
        return Err(Error::DimensionMismatch(format!(
            "cannot reshape {} entries into {rows}x{cols}",
            m.len()
        )));
    }
    Ok(CMatrix::from_column_slice(rows, cols, m.as_slice()))
}

/// Kronecker product: the `(r, c)` block of the result is `a[(r, c)] · b`.
pub fn kronecker(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Plain transpose (no conjugation).
pub fn transpose(m: &CMatrix) -> CMatrix {
    m.transpose()
}

/// Draws an i.i.d. standard circular complex Gaussian matrix (unit variance
/// per entry).
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize, variance: f64) -> CMatrix {
    let scale = (variance / 2.0).sqrt();
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re * scale, im * scale)
    })
}

/// Thin SVD `m = u·diag(s)·vᴴ`, singular values in descending order.
struct ThinSvd {
    u: CMatrix,
    s: Vec<f64>,
    v: CMatrix,
}

fn to_faer(m: &CMatrix) -> faer::Mat<faer::c64> {
    faer::Mat::from_fn(m.nrows(), m.ncols(), |r, c| m[(r, c)])
}

fn from_faer(m: faer::MatRef<'_, faer::c64>) -> CMatrix {
    CMatrix::from_fn(m.nrows(), m.ncols(), |r, c| m[(r, c)])
}

fn thin_svd(m: &CMatrix) -> Result<ThinSvd> {
    let svd = to_faer(m)
        .thin_svd()
        .map_err(|e| Error::Numerical(format!("SVD failed: {e:?}")))?;
    let s = svd.S().column_vector().iter().map(|z| z.re).collect();
    Ok(ThinSvd {
        u: from_faer(svd.U()),
        s,
        v: from_faer(svd.V()),
    })
}

/// Dominant singular triplet `(σ, u, v)` with `m ≈ σ·u·vᴴ`.
pub fn dominant_triplet(m: &CMatrix) -> Result<(f64, CMatrix, CMatrix)> {
    if m.is_empty() {
        return Err(Error::DimensionMismatch("empty matrix".into()));
    }
    let svd = thin_svd(m)?;
    let u1 = svd.u.columns(0, 1).into_owned();
    let v1 = svd.v.columns(0, 1).into_owned();
    Ok((svd.s[0], u1, v1))
}

/// Singular values in descending order.
pub fn singular_values(m: &CMatrix) -> Result<Vec<f64>> {
    if m.is_empty() {
        return Ok(Vec::new());
    }
    to_faer(m)
        .singular_values()
        .map_err(|e| Error::Numerical(format!("SVD failed: {e:?}")))
}

/// Numerical rank with the pseudo-inverse cut-off `max(m, n)·ε·σ_max`.
pub fn numerical_rank(m: &CMatrix) -> Result<usize> {
    let s = singular_values(m)?;
    let tol = pinv_tolerance(m.nrows(), m.ncols(), s.first().copied().unwrap_or(0.0));
    Ok(s.iter().filter(|&&x| x > tol).count())
}

fn pinv_tolerance(rows: usize, cols: usize, sigma_max: f64) -> f64 {
    rows.max(cols) as f64 * f64::EPSILON * sigma_max
}

/// Result of applying a pseudo-inverse from the right.
pub struct RightSolve {
    pub solution: CMatrix,
    /// Number of singular values of the operator kept above the cut-off.
    pub rank: usize,
}

/// Computes `x · psi⁺` where `psi⁺` is the Moore-Penrose pseudo-inverse
/// with singular values below `max(m, n)·ε·σ_max` discarded.
pub fn right_pinv_solve(x: &CMatrix, psi: &CMatrix) -> Result<RightSolve> {
    if x.ncols() != psi.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "x has {} columns, operator has {}",
            x.ncols(),
            psi.ncols()
        )));
    }
    let (m, n) = psi.shape();
    if m == 0 || n == 0 {
        return Ok(RightSolve {
            solution: CMatrix::zeros(x.nrows(), m),
            rank: 0,
        });
    }
    let svd = thin_svd(psi)?;
    let tol = pinv_tolerance(m, n, svd.s[0]);
    // psi = U Σ Vᴴ, psi⁺ = V Σ⁺ Uᴴ, so x·psi⁺ = ((x·V) Σ⁺) Uᴴ.
    let mut xv = x * &svd.v;
    let mut rank = 0;
    for (k, &sk) in svd.s.iter().enumerate() {
        if sk > tol && sk > 0.0 {
            rank += 1;
            xv.column_mut(k).scale_mut(1.0 / sk);
        } else {
            xv.column_mut(k).fill(C64::new(0.0, 0.0));
        }
    }
    Ok(RightSolve {
        solution: xv * svd.u.adjoint(),
        rank,
    })
}

/// Moore-Penrose pseudo-inverse with the standard relative cut-off.
pub fn pinv(m: &CMatrix) -> Result<CMatrix> {
    // (m⁺)ᴴ = (mᴴ)⁺ = I·(mᴴ)⁺.
    let ident = CMatrix::identity(m.nrows(), m.nrows());
    let solved = right_pinv_solve(&ident, &m.adjoint())?;
    Ok(solved.solution.adjoint())
}
