//! Orbital-angular-momentum basis states.
//!
//! A photon's transverse phase structure is expanded over the truncated OAM
//! basis `|l>`, `l = -L ..= L`. Amplitudes are stored densely (dimension
//! `2L + 1`, at most 9 for the default truncation). States are immutable
//! after construction.

use std::io::{self, Write};

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::tol;

/// Complex amplitude vector over `l = -L ..= L`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeState<T: Real> {
    amplitudes: Vec<Complex<T>>,
    l_max: i32,
}

impl<T: Real> ModeState<T> {
    /// The zero vector (not a physical state; a building block).
    pub fn zero(l_max: i32) -> Self {
        assert!(l_max >= 1, "truncation L must be >= 1");
        Self {
            amplitudes: vec![Complex::new(T::zero(), T::zero()); (2 * l_max + 1) as usize],
            l_max,
        }
    }

    /// Unit basis vector `|l>`.
    pub fn basis_state(l: i32, l_max: i32) -> Result<Self> {
        if l.abs() > l_max {
            return Err(Error::ModeOutsideTruncation { l, l_max });
        }
        let mut s = Self::zero(l_max);
        let idx = s.index_of(l);
        s.amplitudes[idx] = Complex::new(T::one(), T::zero());
        Ok(s)
    }

    /// Build from an amplitude vector ordered `l = -L ..= L`.
    pub fn from_amplitudes(amplitudes: Vec<Complex<T>>, l_max: i32) -> Result<Self> {
        let expected = (2 * l_max + 1) as usize;
        if amplitudes.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: amplitudes.len(),
            });
        }
        Ok(Self { amplitudes, l_max })
    }

    pub fn l_max(&self) -> i32 {
        self.l_max
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    #[inline]
    fn index_of(&self, l: i32) -> usize {
        (l + self.l_max) as usize
    }

    /// Amplitude `c_l`; zero for `|l| > L`.
    pub fn amplitude(&self, l: i32) -> Complex<T> {
        if l.abs() > self.l_max {
            Complex::new(T::zero(), T::zero())
        } else {
            self.amplitudes[self.index_of(l)]
        }
    }

    /// Population `|c_l|^2`.
    pub fn population(&self, l: i32) -> T {
        self.amplitude(l).norm_sqr()
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amplitudes
    }

    /// Iterate `(l, c_l)` pairs in ascending `l`.
    pub fn iter(&self) -> impl Iterator<Item = (i32, Complex<T>)> + '_ {
        self.amplitudes
            .iter()
            .enumerate()
            .map(move |(i, c)| (i as i32 - self.l_max, *c))
    }

    pub fn norm_sq(&self) -> T {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn norm(&self) -> T {
        self.norm_sq().sqrt()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sq() - T::one()).abs() < crate::scalar::tol_scaled(tol::NORM_ABS)
    }

    /// `<self|other>` = sum of `conj(self_l) * other_l`.
    pub fn inner_product(&self, other: &Self) -> Result<Complex<T>> {
        if self.l_max != other.l_max {
            return Err(Error::TruncationMismatch {
                left: self.l_max,
                right: other.l_max,
            });
        }
        let mut acc = Complex::new(T::zero(), T::zero());
        for (a, b) in self.amplitudes.iter().zip(&other.amplitudes) {
            acc = acc + a.conj() * *b;
        }
        Ok(acc)
    }

    /// Unit-norm copy; the zero vector has no direction.
    pub fn normalize(&self) -> Result<Self> {
        let n = self.norm();
        if n == T::zero() {
            return Err(Error::NullState);
        }
        Ok(self.scale(Complex::new(T::one() / n, T::zero())))
    }

    pub fn scale(&self, factor: Complex<T>) -> Self {
        Self {
            amplitudes: self.amplitudes.iter().map(|c| *c * factor).collect(),
            l_max: self.l_max,
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.l_max != other.l_max {
            return Err(Error::TruncationMismatch {
                left: self.l_max,
                right: other.l_max,
            });
        }
        Ok(Self {
            amplitudes: self
                .amplitudes
                .iter()
                .zip(&other.amplitudes)
                .map(|(a, b)| *a + *b)
                .collect(),
            l_max: self.l_max,
        })
    }

    /// Text dump, one `l: re,im` line per mode.
    pub fn write_amplitudes<W: Write>(&self, w: &mut W) -> io::Result<()> {
        for (l, c) in self.iter() {
            writeln!(w, "{}: {},{}", l, c.re, c.im)?;
        }
        Ok(())
    }
}

/// A pair of mode states riding on two spatial ports (interferometer arms or
/// output paths).
#[derive(Debug, Clone)]
pub struct TwoPortState<T: Real> {
    first: ModeState<T>,
    second: ModeState<T>,
    labels: (String, String),
}

impl<T: Real> TwoPortState<T> {
    pub fn new(
        first: ModeState<T>,
        second: ModeState<T>,
        labels: (&str, &str),
    ) -> Result<Self> {
        if first.l_max() != second.l_max() {
            return Err(Error::TruncationMismatch {
                left: first.l_max(),
                right: second.l_max(),
            });
        }
        Ok(Self {
            first,
            second,
            labels: (labels.0.to_owned(), labels.1.to_owned()),
        })
    }

    pub fn first(&self) -> &ModeState<T> {
        &self.first
    }

    pub fn second(&self) -> &ModeState<T> {
        &self.second
    }

    pub fn labels(&self) -> (&str, &str) {
        (&self.labels.0, &self.labels.1)
    }

    pub fn l_max(&self) -> i32 {
        self.first.l_max()
    }

    pub fn dim(&self) -> usize {
        2 * self.first.dim()
    }

    /// Total probability over both ports and all modes.
    pub fn joint_norm_sq(&self) -> T {
        self.first.norm_sq() + self.second.norm_sq()
    }

    /// Flatten to a port-major vector `(first modes..., second modes...)`.
    pub fn to_vec(&self) -> Vec<Complex<T>> {
        let mut v = Vec::with_capacity(self.dim());
        v.extend_from_slice(self.first.amplitudes());
        v.extend_from_slice(self.second.amplitudes());
        v
    }

    pub fn from_vec(v: Vec<Complex<T>>, l_max: i32, labels: (&str, &str)) -> Result<Self> {
        let dim = (2 * l_max + 1) as usize;
        if v.len() != 2 * dim {
            return Err(Error::DimensionMismatch {
                expected: 2 * dim,
                got: v.len(),
            });
        }
        let first = ModeState::from_amplitudes(v[..dim].to_vec(), l_max)?;
        let second = ModeState::from_amplitudes(v[dim..].to_vec(), l_max)?;
        TwoPortState::new(first, second, labels)
    }

    pub fn relabel(mut self, labels: (&str, &str)) -> Self {
        self.labels = (labels.0.to_owned(), labels.1.to_owned());
        self
    }
}
