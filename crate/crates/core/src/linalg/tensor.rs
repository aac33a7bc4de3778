use std::ops::{Index, IndexMut};

use super::matrix::{CMatrix, C64, ZERO};
use crate::error::{Error, Result};

/// Dense complex array with the last index varying fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct CTensor {
    dims: Vec<usize>,
    data: Vec<C64>,
}

impl CTensor {
    pub fn new(dims: Vec<usize>, data: Vec<C64>) -> Result<Self> {
        let n: usize = dims.iter().product();
        if dims.is_empty() || data.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for dims {:?}",
                data.len(),
                dims
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("tensor".into()));
        }
        Ok(Self { dims, data })
    }

    pub fn zeros(dims: Vec<usize>) -> Self {
        let n = dims.iter().product();
        Self { dims, data: vec![ZERO; n] }
    }

    pub fn from_fn(dims: Vec<usize>, mut f: impl FnMut(&[usize]) -> C64) -> Self {
        let mut t = Self::zeros(dims);
        let mut idx = vec![0; t.dims.len()];
        for k in 0..t.data.len() {
            t.data[k] = f(&idx);
            t.advance(&mut idx);
        }
        t
    }

    /// Two-index tensor with the entries of `m`.
    pub fn from_matrix(m: &CMatrix) -> Self {
        Self { dims: vec![m.rows(), m.cols()], data: m.as_slice().to_vec() }
    }

    /// Reads a 2-index tensor back as a matrix.
    pub fn to_matrix(&self) -> Result<CMatrix> {
        if self.dims.len() != 2 {
            return Err(Error::DimensionMismatch(format!(
                "expected 2 indices, found {}",
                self.dims.len()
            )));
        }
        CMatrix::new(self.dims[0], self.dims[1], self.data.clone())
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn arity(&self) -> usize {
        self.dims.len()
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn offset(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.dims.len());
        idx.iter().zip(&self.dims).fold(0, |acc, (&i, &d)| {
            debug_assert!(i < d);
            acc * d + i
        })
    }

    /// Steps a multi-index in storage order; wraps to all zeros at the end.
    pub fn advance(&self, idx: &mut [usize]) {
        for k in (0..idx.len()).rev() {
            idx[k] += 1;
            if idx[k] < self.dims[k] {
                return;
            }
            idx[k] = 0;
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        Self { dims: self.dims.clone(), data: self.data.iter().map(|&z| f(z)).collect() }
    }
}

impl Index<&[usize]> for CTensor {
    type Output = C64;
    fn index(&self, idx: &[usize]) -> &C64 {
        &self.data[self.offset(idx)]
    }
}

impl IndexMut<&[usize]> for CTensor {
    fn index_mut(&mut self, idx: &[usize]) -> &mut C64 {
        let o = self.offset(idx);
        &mut self.data[o]
    }
}
