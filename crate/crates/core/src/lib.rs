//! Single-photon Mach-Zehnder quantum-eraser simulation on the orbital
//! angular momentum of light.
//!
//! A spiral phase plate in one interferometer arm tags the photon's path in
//! its transverse phase structure, which kills the output interference;
//! laterally shifted plates at the outputs erase the tag and revive the
//! fringes in post-selected Gaussian-mode detection. This crate models the
//! whole chain:
//!
//! * [`mode`] — the truncated OAM basis algebra;
//! * [`elements`] — splitters, mirrors, plates and phase shifters as
//!   explicit matrices with honest (non-)unitarity bookkeeping;
//! * [`field`] / [`calibration`] — a 2D field-grid oracle that derives
//!   what a laterally shifted plate really does to each mode;
//! * [`interferometer`] — the assembled interferometer and the erasers;
//! * [`detection`] — mode projectors with crosstalk and seeded thinned-
//!   Poisson photon counting;
//! * [`analysis`] — phase sweeps, cosine fringe fits, visibility, and the
//!   crosstalk calibration that matches a measured fringe contrast.
//!
//! The numerical core is generic over the scalar type via [`scalar::Real`]
//! (`f32` or `f64`); `f64` aliases for the main types are exported at the
//! crate root.
//!
//! ```
//! use oam_sim_core::{
//!     analysis::{run_sweep, Scenario, SweepConfig},
//! };
//!
//! let mut cfg = SweepConfig::<f64>::standard(Scenario::ErasedIdeal, 7);
//! cfg.monte_carlo = false; // analytic probabilities only
//! let sweep = run_sweep(&cfg, None).unwrap();
//! assert!((sweep.c3.visibility_fitted - 1.0).abs() < 1e-9);
//! ```

pub mod analysis;
pub mod calibration;
pub mod detection;
pub mod elements;
pub mod error;
pub mod field;
pub mod interferometer;
pub mod matrix;
pub mod mode;
pub mod scalar;

/// Numeric tolerances used across the crate (stated for `f64`).
pub mod tol {
    /// Absolute tolerance for complex-amplitude equality.
    pub const AMP_ABS: f64 = 1e-12;
    /// Tolerance on state normalization checks.
    pub const NORM_ABS: f64 = 1e-12;
    /// Elementwise tolerance for unitarity checks `M†M = I`.
    pub const UNITARITY: f64 = 1e-10;
    /// Norm-conservation budget for end-to-end unitary propagation.
    pub const NORM_CONSERVATION: f64 = 1e-12;
    /// Hard error threshold for truncation loss inside the interferometer.
    pub const TRUNCATION_BUDGET: f64 = 1e-9;
    /// Power-conservation budget for pure phase masks on the field grid.
    pub const MASK_POWER: f64 = 1e-9;
    /// Power budget for discretized field normalization.
    pub const GRID_POWER: f64 = 1e-6;
}

pub use error::{Error, Result};
pub use scalar::Real;

pub use analysis::{
    calibrate_to_visibility, fit_cosine, run_sweep, visibility_empirical, visibility_fitted,
    CosineFit, Scenario, SweepConfig, SweepResult,
};
pub use calibration::{
    calibrate_shifted_spp, calibrate_single_offset, default_offsets, ShiftedSppCalibration,
};
pub use detection::{
    coincidence_probability, mean_photon_spacing_m, projection_probability, simulate_counts,
    window_for_coincidence, CountingConfig, DetectorId, OutputPort, ProjectorSpec,
};
pub use elements::{ElementOp, Port, ShiftedSppSpec, SppDirection};
pub use field::{lg_mode, FieldGrid, GridSpec, LgSpec};
pub use interferometer::{apply_eraser, propagate, EraserPair, MziConfig, OutputStates};
pub use mode::{ModeState, TwoPortState};

/// `f64` instantiations of the core types.
pub type ModeState64 = mode::ModeState<f64>;
pub type TwoPortState64 = mode::TwoPortState<f64>;
pub type ElementOp64 = elements::ElementOp<f64>;
pub type ShiftedSppSpec64 = elements::ShiftedSppSpec<f64>;
pub type FieldGrid64 = field::FieldGrid<f64>;
pub type GridSpec64 = field::GridSpec<f64>;
pub type MziConfig64 = interferometer::MziConfig<f64>;
pub type OutputStates64 = interferometer::OutputStates<f64>;
pub type EraserPair64 = interferometer::EraserPair<f64>;
pub type CountingConfig64 = detection::CountingConfig<f64>;
pub type ProjectorSpec64 = detection::ProjectorSpec<f64>;
pub type SweepConfig64 = analysis::SweepConfig<f64>;
pub type SweepResult64 = analysis::SweepResult<f64>;
pub type ShiftedSppCalibration64 = calibration::ShiftedSppCalibration<f64>;

/// `f32` instantiations, for callers trading precision for footprint.
pub type ModeState32 = mode::ModeState<f32>;
pub type ElementOp32 = elements::ElementOp<f32>;
pub type FieldGrid32 = field::FieldGrid<f32>;
