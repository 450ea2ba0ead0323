//! Optical-element operators on the OAM mode space.
//!
//! Every element is a complex matrix: single-port elements act on the
//! `2L + 1` mode amplitudes, two-port elements on the port-major
//! `2(2L + 1)` vector. Conventions used throughout:
//!
//! * a spiral phase plate of order `m` shifts `|l> -> |l + m>`;
//! * any reflection inverts the OAM sign, `|l> -> |-l>`;
//! * mirrors contribute a reflection phase `e^{i pi}`, beam-splitter
//!   reflections contribute `i`; transmission leaves the mode untouched.
//!
//! A plate that shifts modes past the truncation window loses amplitude;
//! the loss is reported on application as a norm deficit, never hidden by
//! renormalizing. Such operators (and the idealized shifted plates, which
//! are not isometries at all) carry `unitary = false`.

use std::io::{self, Write};

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::matrix::OpMatrix;
use crate::mode::{ModeState, TwoPortState};
use crate::scalar::{lit, Real};
use crate::tol;

/// Which of the two spatial ports an embedded single-port element acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Port {
    First,
    Second,
}

/// Port arity of an operator matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PortArity {
    One,
    Two,
}

/// Shift sense of a laterally displaced spiral phase plate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SppDirection {
    /// Increments the OAM index (the S-dagger sense).
    Raising,
    /// Decrements the OAM index (the S sense).
    Lowering,
}

/// Geometry of a laterally shifted spiral phase plate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftedSppSpec<T: Real> {
    /// Topological order of the plate (magnitude; must be nonzero).
    pub order: i32,
    /// Lateral displacement of the plate center in units of the beam waist.
    pub offset: T,
    pub direction: SppDirection,
}

impl<T: Real> ShiftedSppSpec<T> {
    pub fn new(order: i32, offset: T, direction: SppDirection) -> Result<Self> {
        if order == 0 {
            return Err(Error::ZeroSppOrder);
        }
        if offset < T::zero() {
            return Err(Error::InvalidConfig(
                "shifted-plate offset must be non-negative".into(),
            ));
        }
        Ok(Self {
            order,
            offset,
            direction,
        })
    }

    /// Half-waist displacement, the geometry that yields equal-weight
    /// superpositions.
    pub fn half_waist(direction: SppDirection) -> Self {
        Self {
            order: 1,
            offset: lit(0.5),
            direction,
        }
    }

    /// Signed mode shift this plate applies.
    pub fn effective_order(&self) -> i32 {
        match self.direction {
            SppDirection::Raising => self.order.abs(),
            SppDirection::Lowering => -self.order.abs(),
        }
    }
}

/// Result of applying an operator to a state.
///
/// `norm_deficit` is `||in||^2 - ||out||^2`: the truncated probability for a
/// mode-shift plate, the completeness deficit (possibly negative) for the
/// idealized shifted plates, and rounding noise for unitary elements.
#[derive(Debug, Clone)]
pub struct Applied<T: Real> {
    pub state: ModeState<T>,
    pub norm_deficit: T,
}

#[derive(Debug, Clone)]
pub struct AppliedTwo<T: Real> {
    pub state: TwoPortState<T>,
    pub norm_deficit: T,
}

/// A named operator matrix on the mode space or the port-mode space.
#[derive(Debug, Clone)]
pub struct ElementOp<T: Real> {
    name: String,
    l_max: i32,
    arity: PortArity,
    matrix: OpMatrix<T>,
    unitary: bool,
}

fn idx(l: i32, l_max: i32) -> usize {
    (l + l_max) as usize
}

impl<T: Real> ElementOp<T> {
    fn one(re: f64) -> Complex<T> {
        Complex::new(lit(re), T::zero())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn l_max(&self) -> i32 {
        self.l_max
    }

    pub fn arity(&self) -> PortArity {
        self.arity
    }

    /// Whether the element was constructed as (and verified to be) unitary
    /// on the truncated space.
    pub fn is_unitary(&self) -> bool {
        self.unitary
    }

    pub fn matrix(&self) -> &OpMatrix<T> {
        &self.matrix
    }

    pub fn unitarity_deviation(&self) -> T {
        self.matrix.unitarity_deviation()
    }

    /// Identity on a single port.
    pub fn identity(l_max: i32) -> Self {
        let dim = (2 * l_max + 1) as usize;
        Self {
            name: "identity".into(),
            l_max,
            arity: PortArity::One,
            matrix: OpMatrix::identity(dim),
            unitary: true,
        }
    }

    /// Centered spiral phase plate: `|l> -> |l + order>`; amplitudes shifted
    /// past the truncation window are dropped (and show up as a norm deficit
    /// on application), so the matrix is not unitary on the truncated space.
    pub fn spp_centered(order: i32, l_max: i32) -> Result<Self> {
        if order == 0 {
            return Err(Error::ZeroSppOrder);
        }
        let dim = (2 * l_max + 1) as usize;
        let mut m = OpMatrix::zeros(dim);
        for l in -l_max..=l_max {
            let shifted = l + order;
            if shifted.abs() <= l_max {
                m.set(idx(shifted, l_max), idx(l, l_max), Self::one(1.0));
            }
        }
        Ok(Self {
            name: format!("spp(order={order:+})"),
            l_max,
            arity: PortArity::One,
            matrix: m,
            unitary: false,
        })
    }

    /// Mirror: `|l> -> e^{i pi} |-l>`.
    pub fn mirror(l_max: i32) -> Self {
        let dim = (2 * l_max + 1) as usize;
        let mut m = OpMatrix::zeros(dim);
        for l in -l_max..=l_max {
            m.set(idx(-l, l_max), idx(l, l_max), Self::one(-1.0));
        }
        Self {
            name: "mirror".into(),
            l_max,
            arity: PortArity::One,
            matrix: m,
            unitary: true,
        }
    }

    /// Symmetric 50/50 beam splitter on the port-mode space: transmission
    /// `1/sqrt(2)` with `l` unchanged, reflection `i/sqrt(2)` with `l -> -l`.
    pub fn beam_splitter(l_max: i32) -> Self {
        let dim = (2 * l_max + 1) as usize;
        let mut m = OpMatrix::zeros(2 * dim);
        let t = Complex::new(T::one() / lit::<T>(2.0).sqrt(), T::zero());
        let r = Complex::new(T::zero(), T::one() / lit::<T>(2.0).sqrt());
        for l in -l_max..=l_max {
            let i = idx(l, l_max);
            let flip = idx(-l, l_max);
            // port 1 -> port 1 transmit, port 1 -> port 2 reflect
            m.set(i, i, t);
            m.set(dim + flip, i, r);
            // port 2 -> port 2 transmit, port 2 -> port 1 reflect
            m.set(dim + i, dim + i, t);
            m.set(flip, dim + i, r);
        }
        Self {
            name: "beam_splitter".into(),
            l_max,
            arity: PortArity::Two,
            matrix: m,
            unitary: true,
        }
    }

    /// Relative-phase element: multiplies one port by `e^{i phi}`, identity
    /// on the other.
    pub fn phase_shifter(phi: T, l_max: i32, port: Port) -> Self {
        let dim = (2 * l_max + 1) as usize;
        let mut m = OpMatrix::identity(2 * dim);
        let phase = Complex::from_polar(T::one(), phi);
        let base = match port {
            Port::First => 0,
            Port::Second => dim,
        };
        for k in 0..dim {
            m.set(base + k, base + k, phase);
        }
        Self {
            name: format!("phase_shifter(phi={phi})"),
            l_max,
            arity: PortArity::Two,
            matrix: m,
            unitary: true,
        }
    }

    /// Idealized half-waist-shifted first-order plate (the equal-weight
    /// two-band map). Defined only on the input modes the idealization
    /// covers — `{|0>, |-1>}` raising, `{|0>, |+1>}` lowering; all other
    /// columns are zero, so anything routed through them is reported as
    /// leakage rather than invented. Use [`ElementOp::spp_shifted_ideal_filled`]
    /// to patch the undefined columns from an oracle-calibrated matrix.
    pub fn spp_shifted_ideal(spec: &ShiftedSppSpec<T>, l_max: i32) -> Result<Self> {
        if spec.order == 0 {
            return Err(Error::ZeroSppOrder);
        }
        if spec.order.abs() != 1 {
            return Err(Error::InvalidConfig(
                "idealized shifted plate is defined for first order only".into(),
            ));
        }
        if l_max < 1 {
            return Err(Error::InvalidConfig("need L >= 1".into()));
        }
        let dim = (2 * l_max + 1) as usize;
        let mut m = OpMatrix::zeros(dim);
        let h = Complex::new(T::one() / lit::<T>(2.0).sqrt(), T::zero());
        match spec.direction {
            SppDirection::Raising => {
                // |0> -> (|0> + |1>)/sqrt(2); |-1> -> (|-1> + |0>)/sqrt(2)
                m.set(idx(0, l_max), idx(0, l_max), h);
                m.set(idx(1, l_max), idx(0, l_max), h);
                m.set(idx(-1, l_max), idx(-1, l_max), h);
                m.set(idx(0, l_max), idx(-1, l_max), h);
            }
            SppDirection::Lowering => {
                // |0> -> (|-1> + |0>)/sqrt(2); |1> -> (|0> + |1>)/sqrt(2)
                m.set(idx(-1, l_max), idx(0, l_max), h);
                m.set(idx(0, l_max), idx(0, l_max), h);
                m.set(idx(0, l_max), idx(1, l_max), h);
                m.set(idx(1, l_max), idx(1, l_max), h);
            }
        }
        let tag = match spec.direction {
            SppDirection::Raising => "+1/2",
            SppDirection::Lowering => "-1/2",
        };
        Ok(Self {
            name: format!("spp_shifted_ideal({tag})"),
            l_max,
            arity: PortArity::One,
            matrix: m,
            unitary: false,
        })
    }

    /// Ideal shifted plate with the columns the idealization leaves
    /// undefined copied from `fill` (an oracle-calibrated operator of the
    /// same dimension).
    pub fn spp_shifted_ideal_filled(
        spec: &ShiftedSppSpec<T>,
        l_max: i32,
        fill: &ElementOp<T>,
    ) -> Result<Self> {
        let mut op = Self::spp_shifted_ideal(spec, l_max)?;
        if fill.matrix.dim() != op.matrix.dim() {
            return Err(Error::DimensionMismatch {
                expected: op.matrix.dim(),
                got: fill.matrix.dim(),
            });
        }
        let defined: &[i32] = match spec.direction {
            SppDirection::Raising => &[0, -1],
            SppDirection::Lowering => &[0, 1],
        };
        for l_in in -l_max..=l_max {
            if defined.contains(&l_in) {
                continue;
            }
            let col = idx(l_in, l_max);
            for row in 0..op.matrix.dim() {
                let v = fill.matrix.get(row, col);
                op.matrix.set(row, col, v);
            }
        }
        op.name = format!("{}+fill[{}]", op.name, fill.name);
        Ok(op)
    }

    /// Wrap an arbitrary single-port matrix (e.g. an oracle-calibrated
    /// shifted plate). The unitary flag is set only if the matrix actually
    /// passes the unitarity check.
    pub fn from_single_port_matrix(name: &str, l_max: i32, matrix: OpMatrix<T>) -> Result<Self> {
        let dim = (2 * l_max + 1) as usize;
        if matrix.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: matrix.dim(),
            });
        }
        let unitary = matrix.unitarity_deviation() < lit(tol::UNITARITY);
        Ok(Self {
            name: name.into(),
            l_max,
            arity: PortArity::One,
            matrix,
            unitary,
        })
    }

    /// Embed a single-port element into the two-port space, identity on the
    /// other port.
    pub fn on_port(&self, port: Port) -> Result<Self> {
        if self.arity != PortArity::One {
            return Err(Error::InvalidConfig(
                "only single-port elements can be embedded on a port".into(),
            ));
        }
        let dim = self.matrix.dim();
        let mut m = OpMatrix::identity(2 * dim);
        let base = match port {
            Port::First => 0,
            Port::Second => dim,
        };
        for i in 0..dim {
            for j in 0..dim {
                m.set(base + i, base + j, self.matrix.get(i, j));
            }
        }
        Ok(Self {
            name: format!("{}@{:?}", self.name, port),
            l_max: self.l_max,
            arity: PortArity::Two,
            matrix: m,
            unitary: self.unitary,
        })
    }

    /// Compose in application order: `compose([f, g])` applies `f` first.
    pub fn compose(ops: &[&ElementOp<T>]) -> Result<Self> {
        let first = ops
            .first()
            .ok_or_else(|| Error::InvalidConfig("compose of empty sequence".into()))?;
        let mut matrix = first.matrix.clone();
        let mut unitary = first.unitary;
        let mut names = vec![first.name.clone()];
        for op in &ops[1..] {
            matrix = op.matrix.mul(&matrix)?;
            unitary &= op.unitary;
            names.push(op.name.clone());
        }
        Ok(Self {
            name: names.join(" -> "),
            l_max: first.l_max,
            arity: first.arity,
            matrix,
            unitary,
        })
    }

    pub fn apply(&self, state: &ModeState<T>) -> Result<Applied<T>> {
        if self.arity != PortArity::One {
            return Err(Error::InvalidConfig(
                "two-port element applied to a single-port state".into(),
            ));
        }
        let out = self.matrix.apply(state.amplitudes())?;
        let out = ModeState::from_amplitudes(out, state.l_max())?;
        let norm_deficit = state.norm_sq() - out.norm_sq();
        Ok(Applied {
            state: out,
            norm_deficit,
        })
    }

    pub fn apply_two(&self, state: &TwoPortState<T>) -> Result<AppliedTwo<T>> {
        if self.arity != PortArity::Two {
            return Err(Error::InvalidConfig(
                "single-port element applied to a two-port state".into(),
            ));
        }
        let before = state.joint_norm_sq();
        let out = self.matrix.apply(&state.to_vec())?;
        let labels = state.labels();
        let out = TwoPortState::from_vec(out, state.l_max(), (labels.0, labels.1))?;
        let norm_deficit = before - out.joint_norm_sq();
        Ok(AppliedTwo {
            state: out,
            norm_deficit,
        })
    }

    /// Plain-text matrix dump (row-major `re,im` pairs) for golden files.
    pub fn write_matrix_dump<W: Write>(&self, w: &mut W) -> io::Result<()> {
        self.matrix.write_dump(w)
    }
}
