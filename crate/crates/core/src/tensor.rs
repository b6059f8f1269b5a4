//! Dense complex 3-way tensors.
//!
//! Entries are stored with the first index varying fastest. The mode-n
//! unfolding places mode-n fibers in columns and orders the remaining two
//! indices lowest-mode-first, lowest varying fastest:
//!
//! * mode 1: `(i1, i2 + i3·d2)`
//! * mode 2: `(i2, i1 + i3·d1)`
//! * mode 3: `(i3, i1 + i2·d1)`
//!
//! With this convention a Tucker tensor `S ×1 A ×2 Bᵀ ×3 Cᵀ` unfolds as
//! `A·S₍₁₎·(C ⊗ B)`, `Bᵀ·S₍₂₎·(C ⊗ Aᵀ)` and `Cᵀ·S₍₃₎·(B ⊗ Aᵀ)`.

use crate::error::{dim_err, Result};
use crate::linalg::{CMatrix, C64};

/// Tensor mode, 1-based to match the usual notation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    One,
    Two,
    Three,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::One, Mode::Two, Mode::Three];

    fn index(self) -> usize {
        match self {
            Mode::One => 0,
            Mode::Two => 1,
            Mode::Three => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor3 {
    dims: [usize; 3],
    data: Vec<C64>,
}

impl Tensor3 {
    pub fn zeros(dims: [usize; 3]) -> Self {
        Tensor3 {
            dims,
            data: vec![C64::new(0.0, 0.0); dims[0] * dims[1] * dims[2]],
        }
    }

    pub fn from_fn(dims: [usize; 3], mut f: impl FnMut(usize, usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(dims[0] * dims[1] * dims[2]);
        for k in 0..dims[2] {
            for j in 0..dims[1] {
                for i in 0..dims[0] {
                    data.push(f(i, j, k));
                }
            }
        }
        Tensor3 { dims, data }
    }

    /// Wraps raw storage (first index fastest).
    pub fn from_vec(dims: [usize; 3], data: Vec<C64>) -> Result<Self> {
        if data.len() != dims[0] * dims[1] * dims[2] {
            return Err(dim_err(format!(
                "{} entries for dims {dims:?}",
                data.len()
            )));
        }
        Ok(Tensor3 { dims, data })
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    #[inline]
    fn offset(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.dims[0] * (j + self.dims[1] * k)
    }

    /// Zero-based access.
    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> C64 {
        self.data[self.offset(i, j, k)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, v: C64) {
        let o = self.offset(i, j, k);
        self.data[o] = v;
    }

    pub fn fro_sq(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn sub(&self, other: &Tensor3) -> Result<Tensor3> {
        if self.dims != other.dims {
            return Err(dim_err(format!("{:?} vs {:?}", self.dims, other.dims)));
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Ok(Tensor3 { dims: self.dims, data })
    }

    pub fn add_assign(&mut self, other: &Tensor3) -> Result<()> {
        if self.dims != other.dims {
            return Err(dim_err(format!("{:?} vs {:?}", self.dims, other.dims)));
        }
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
        Ok(())
    }
}

/// Column index of entry `(i, j, k)` in the given unfolding, and its row.
#[inline]
fn unfold_pos(dims: [usize; 3], mode: Mode, i: usize, j: usize, k: usize) -> (usize, usize) {
    match mode {
        Mode::One => (i, j + k * dims[1]),
        Mode::Two => (j, i + k * dims[0]),
        Mode::Three => (k, i + j * dims[0]),
    }
}

fn unfold_shape(dims: [usize; 3], mode: Mode) -> (usize, usize) {
    match mode {
        Mode::One => (dims[0], dims[1] * dims[2]),
        Mode::Two => (dims[1], dims[0] * dims[2]),
        Mode::Three => (dims[2], dims[0] * dims[1]),
    }
}

pub fn unfold(t: &Tensor3, mode: Mode) -> CMatrix {
    let (rows, cols) = unfold_shape(t.dims, mode);
    if mode == Mode::One {
        return CMatrix::from_column_slice(rows, cols, &t.data);
    }
    let mut m = CMatrix::zeros(rows, cols);
    let [d1, d2, d3] = t.dims;
    for k in 0..d3 {
        for j in 0..d2 {
            for i in 0..d1 {
                let (r, c) = unfold_pos(t.dims, mode, i, j, k);
                m[(r, c)] = t.get(i, j, k);
            }
        }
    }
    m
}

pub fn fold(m: &CMatrix, mode: Mode, dims: [usize; 3]) -> Result<Tensor3> {
    let expected = unfold_shape(dims, mode);
    if m.shape() != expected {
        return Err(dim_err(format!(
            "matrix {:?} cannot fold into {dims:?} at {mode:?} (needs {expected:?})",
            m.shape()
        )));
    }
    if mode == Mode::One {
        return Ok(Tensor3 {
            dims,
            data: m.as_slice().to_vec(),
        });
    }
    Ok(Tensor3::from_fn(dims, |i, j, k| {
        let (r, c) = unfold_pos(dims, mode, i, j, k);
        m[(r, c)]
    }))
}

/// n-mode product `t ×ₙ m`.
pub fn mode_product(t: &Tensor3, m: &CMatrix, mode: Mode) -> Result<Tensor3> {
    let n = mode.index();
    if m.ncols() != t.dims[n] {
        return Err(dim_err(format!(
            "mode-{} product needs {} columns, matrix has {}",
            n + 1,
            t.dims[n],
            m.ncols()
        )));
    }
    let mut dims = t.dims;
    dims[n] = m.nrows();
    let product = m * unfold(t, mode);
    fold(&product, mode, dims)
}

/// The `(I, I1, I2)` core tensor with identity 1-mode unfolding. It maps a
/// Kronecker product `C ⊗ B` onto the Tucker form `S ×2 Bᵀ ×3 Cᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoreTensor {
    tensor: Tensor3,
    i1: usize,
    i2: usize,
}

impl CoreTensor {
    pub fn new(i1: usize, i2: usize) -> Self {
        let n = i1 * i2;
        let tensor = fold(&CMatrix::identity(n, n), Mode::One, [n, i1, i2])
            .expect("identity has matching dims");
        CoreTensor { tensor, i1, i2 }
    }

    pub fn tensor(&self) -> &Tensor3 {
        &self.tensor
    }

    pub fn factor_dims(&self) -> (usize, usize) {
        (self.i1, self.i2)
    }
}

pub fn core_tensor(i1: usize, i2: usize) -> CoreTensor {
    CoreTensor::new(i1, i2)
}
