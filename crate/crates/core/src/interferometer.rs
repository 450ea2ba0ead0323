//! The Mach-Zehnder interferometer.
//!
//! Layout: an input beam splitter, two arms each folded by one mirror, and
//! an output beam splitter. The transmitted arm (A2) carries the spiral
//! phase plate that tags the path, followed by its fold mirror and the
//! scanned relative phase; the reflected arm (A1) carries only its mirror.
//! Port bookkeeping follows the rectangle geometry: the arm that transmits
//! at the input splitter transmits again into output P3, while the arm that
//! reflects at the input reflects again into P3. Every reflection is applied
//! as an explicit element so the OAM sign inversions emerge from the model.
//!
//! With the crate's phase conventions and a Gaussian input this produces
//! `psi_P3 = (|0> - e^{i phi} |-1>) / 2` and
//! `psi_P4 = -i (|0> + e^{i phi} |+1>) / 2`:
//! equal quarter-weight populations in every mode, independent of phi, until
//! an eraser mixes the mode labels back together.

use crate::elements::{ElementOp, Port, ShiftedSppSpec, SppDirection};
use crate::error::{Error, Result};
use crate::mode::{ModeState, TwoPortState};
use crate::scalar::Real;
use crate::tol;

/// Interferometer configuration.
#[derive(Debug, Clone)]
pub struct MziConfig<T: Real> {
    /// Order of the path-tagging plate in arm A2; `0` removes the plate.
    pub arm_spp_order: i32,
    /// Relative phase between the arms (radians), applied in arm A2.
    pub phase_phi: T,
    /// Eraser plate at output P3 (raising sense restores interference).
    pub eraser_p3: Option<ShiftedSppSpec<T>>,
    /// Eraser plate at output P4 (lowering sense).
    pub eraser_p4: Option<ShiftedSppSpec<T>>,
    /// Use the idealized equal-weight eraser map instead of an
    /// oracle-calibrated matrix.
    pub use_ideal_eraser: bool,
    /// OAM truncation.
    pub l_max: i32,
}

impl<T: Real> MziConfig<T> {
    /// The experiment's standard configuration: first-order plate in A2,
    /// truncation L = 3, half-waist erasers at both outputs.
    pub fn standard(phase_phi: T) -> Self {
        Self {
            arm_spp_order: 1,
            phase_phi,
            eraser_p3: Some(ShiftedSppSpec::half_waist(SppDirection::Raising)),
            eraser_p4: Some(ShiftedSppSpec::half_waist(SppDirection::Lowering)),
            use_ideal_eraser: true,
            l_max: 3,
        }
    }

    pub fn with_phase(&self, phase_phi: T) -> Self {
        let mut cfg = self.clone();
        cfg.phase_phi = phase_phi;
        cfg
    }

    pub fn validate(&self) -> Result<()> {
        if self.l_max < 1 {
            return Err(Error::InvalidConfig("truncation L must be >= 1".into()));
        }
        if self.l_max < self.arm_spp_order.abs() + 1 {
            return Err(Error::InvalidConfig(format!(
                "truncation L = {} too small for plate order {} (need L >= |order| + 1)",
                self.l_max, self.arm_spp_order
            )));
        }
        Ok(())
    }
}

/// The two output branches. Amplitudes are not renormalized per branch:
/// `|psi_P3|^2` is the probability of leaving through P3.
#[derive(Debug, Clone)]
pub struct OutputStates<T: Real> {
    pub psi_p3: ModeState<T>,
    pub psi_p4: ModeState<T>,
    /// `||psi_P3||^2 + ||psi_P4||^2`; 1 for unitary propagation, away from 1
    /// once a non-isometric eraser has acted.
    pub joint_norm: T,
}

impl<T: Real> OutputStates<T> {
    fn collect(p3: ModeState<T>, p4: ModeState<T>) -> Self {
        let joint_norm = p3.norm_sq() + p4.norm_sq();
        Self {
            psi_p3: p3,
            psi_p4: p4,
            joint_norm,
        }
    }
}

/// Send a normalized input state through the interferometer (no erasers).
pub fn propagate<T: Real>(cfg: &MziConfig<T>, input: &ModeState<T>) -> Result<OutputStates<T>> {
    cfg.validate()?;
    if input.l_max() != cfg.l_max {
        return Err(Error::TruncationMismatch {
            left: input.l_max(),
            right: cfg.l_max,
        });
    }
    if !input.is_normalized() {
        return Err(Error::InvalidConfig(
            "interferometer input must be normalized".into(),
        ));
    }
    let l_max = cfg.l_max;
    let bs = ElementOp::beam_splitter(l_max);
    let mirror_a2 = ElementOp::mirror(l_max).on_port(Port::First)?;
    let mirror_a1 = ElementOp::mirror(l_max).on_port(Port::Second)?;
    let phase = ElementOp::phase_shifter(cfg.phase_phi, l_max, Port::First);

    // Input enters the first splitter; the transmitted part continues into
    // arm A2 (first slot), the reflected part into arm A1 (second slot).
    let state = TwoPortState::new(input.clone(), ModeState::zero(l_max), ("in", "vac"))?;
    let state = bs.apply_two(&state)?.state.relabel(("A2", "A1"));

    // Arm A2: plate, fold mirror, scanned phase. Arm A1: fold mirror.
    let state = if cfg.arm_spp_order != 0 {
        let spp = ElementOp::spp_centered(cfg.arm_spp_order, l_max)?.on_port(Port::First)?;
        let applied = spp.apply_two(&state)?;
        if applied.norm_deficit > crate::scalar::tol_scaled(tol::TRUNCATION_BUDGET) {
            return Err(Error::TruncationLoss {
                loss: applied.norm_deficit.to_f64().unwrap_or(f64::NAN),
            });
        }
        applied.state
    } else {
        state
    };
    let state = mirror_a2.apply_two(&state)?.state;
    let state = mirror_a1.apply_two(&state)?.state;
    let state = phase.apply_two(&state)?.state;

    // Output splitter: A2's through-port and A1's reflection meet in P3.
    let state = bs.apply_two(&state)?.state.relabel(("P3", "P4"));

    Ok(OutputStates::collect(
        state.first().clone(),
        state.second().clone(),
    ))
}

/// Eraser operators for the two output ports.
#[derive(Debug, Clone)]
pub struct EraserPair<T: Real> {
    pub p3: Option<ElementOp<T>>,
    pub p4: Option<ElementOp<T>>,
}

impl<T: Real> EraserPair<T> {
    /// Idealized equal-weight erasers from the config's plate specs.
    pub fn ideal(cfg: &MziConfig<T>) -> Result<Self> {
        let build = |spec: &Option<ShiftedSppSpec<T>>| -> Result<Option<ElementOp<T>>> {
            spec.as_ref()
                .map(|s| ElementOp::spp_shifted_ideal(s, cfg.l_max))
                .transpose()
        };
        Ok(Self {
            p3: build(&cfg.eraser_p3)?,
            p4: build(&cfg.eraser_p4)?,
        })
    }

    pub fn from_ops(p3: Option<ElementOp<T>>, p4: Option<ElementOp<T>>) -> Self {
        Self { p3, p4 }
    }

    pub fn is_empty(&self) -> bool {
        self.p3.is_none() && self.p4.is_none()
    }
}

/// Apply the erasers to the output branches. The idealized (and even the
/// calibrated) plates are not isometries, so the joint norm of the result
/// is allowed to drift from 1; it is reported, never renormalized away.
pub fn apply_eraser<T: Real>(
    out: &OutputStates<T>,
    erasers: &EraserPair<T>,
) -> Result<OutputStates<T>> {
    if erasers.is_empty() {
        return Err(Error::InvalidConfig(
            "apply_eraser called with no eraser present".into(),
        ));
    }
    let p3 = match &erasers.p3 {
        Some(op) => op.apply(&out.psi_p3)?.state,
        None => out.psi_p3.clone(),
    };
    let p4 = match &erasers.p4 {
        Some(op) => op.apply(&out.psi_p4)?.state,
        None => out.psi_p4.clone(),
    };
    Ok(OutputStates::collect(p3, p4))
}
