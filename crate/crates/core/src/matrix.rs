//! Small dense complex matrices.
//!
//! Operator matrices here are at most `2(2L+1)` on a side (14 for the default
//! truncation), so a plain row-major `Vec` with textbook loops beats pulling
//! in a linear-algebra stack.

use std::io::{self, Write};

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Row-major square complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct OpMatrix<T: Real> {
    n: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> OpMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![Complex::new(T::zero(), T::zero()); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.set(i, i, Complex::new(T::one(), T::zero()));
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex<T> {
        self.data[row * self.n + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: Complex<T>) {
        self.data[row * self.n + col] = value;
    }

    /// Matrix product `self * rhs`.
    pub fn mul(&self, rhs: &Self) -> Result<Self> {
        if self.n != rhs.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: rhs.n,
            });
        }
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a == Complex::new(T::zero(), T::zero()) {
                    continue;
                }
                for j in 0..n {
                    let v = out.get(i, j) + a * rhs.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        Ok(out)
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                out.set(j, i, self.get(i, j).conj());
            }
        }
        out
    }

    /// Apply to a column vector.
    pub fn apply(&self, v: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
        if v.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: v.len(),
            });
        }
        let mut out = vec![Complex::new(T::zero(), T::zero()); self.n];
        for (i, slot) in out.iter_mut().enumerate() {
            let mut acc = Complex::new(T::zero(), T::zero());
            for (j, x) in v.iter().enumerate() {
                acc = acc + self.get(i, j) * *x;
            }
            *slot = acc;
        }
        Ok(out)
    }

    /// Largest elementwise deviation of `M† M` from the identity.
    pub fn unitarity_deviation(&self) -> T {
        let gram = self
            .adjoint()
            .mul(self)
            .expect("square matrix product cannot mismatch");
        let mut worst = T::zero();
        for i in 0..self.n {
            for j in 0..self.n {
                let expect = if i == j { T::one() } else { T::zero() };
                let d = (gram.get(i, j) - Complex::new(expect, T::zero())).norm();
                if d > worst {
                    worst = d;
                }
            }
        }
        worst
    }

    /// Largest elementwise absolute difference against another matrix.
    pub fn max_abs_diff(&self, other: &Self) -> Result<T> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: other.n,
            });
        }
        let mut worst = T::zero();
        for (a, b) in self.data.iter().zip(&other.data) {
            let d = (*a - *b).norm();
            if d > worst {
                worst = d;
            }
        }
        Ok(worst)
    }

    /// Squared 2-norm of one column.
    pub fn column_norm_sq(&self, col: usize) -> T {
        (0..self.n).map(|i| self.get(i, col).norm_sqr()).sum()
    }

    /// Plain-text dump: one line per row, entries as `re,im` separated by
    /// single spaces. Used by golden-file tests.
    pub fn write_dump<W: Write>(&self, w: &mut W) -> io::Result<()> {
        for i in 0..self.n {
            for j in 0..self.n {
                if j > 0 {
                    write!(w, " ")?;
                }
                let v = self.get(i, j);
                write!(w, "{},{}", v.re, v.im)?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}
