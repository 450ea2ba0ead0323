//! Oracle calibration of laterally shifted spiral phase plates.
//!
//! For each lateral offset `d` the plate's mask is applied to every basis
//! mode `LG_{l,0}` on the field grid and the result is decomposed back into
//! the `p = 0` Laguerre-Gaussian basis. That yields the true mode-space
//! operator `M(d)` that the idealized equal-weight two-band map approximates,
//! together with everything the idealization throws away: power scattered
//! into `p > 0` radial modes (`radial_leakage`) and into azimuthal channels
//! outside the truncation window (`window_leakage`).
//!
//! The balanced offset `d*` — where the stay and shift amplitudes out of the
//! Gaussian mode are equal — is located on the offset grid and then refined
//! by bisection, since the equal-weight point sits between grid samples.

use std::io::{self, Write};

use num_complex::Complex;
use rayon::prelude::*;

use crate::elements::ElementOp;
use crate::error::{Error, Result};
use crate::field::{lg_mode, FieldGrid, GridSpec, LgSpec};
use crate::matrix::OpMatrix;
use crate::scalar::{lit, Real};

/// Oracle operator matrix and leakage bookkeeping at one plate offset.
#[derive(Debug, Clone)]
pub struct CalibrationPoint<T: Real> {
    /// Plate displacement in waist units.
    pub offset: T,
    /// `M[l_out, l_in]` over the truncation window, `p = 0` projection.
    pub matrix: OpMatrix<T>,
    /// Per input column: power left in the window's azimuthal channels but
    /// in `p > 0` radial modes.
    pub radial_leakage: Vec<T>,
    /// Per input column: power in azimuthal channels outside the window
    /// (integrated out to an extended window).
    pub window_leakage: Vec<T>,
    /// Per input column: total azimuthal power captured inside the window.
    pub azimuthal_window_power: Vec<T>,
}

impl<T: Real> CalibrationPoint<T> {
    /// Column-0 leakage outside `span{|-1>, |0>, |+1>}` plus radial leakage:
    /// the completeness deficit of the idealized operator.
    pub fn idealization_deficit(&self, l_max: i32) -> T {
        let col = (l_max) as usize; // input |0>
        let mut span3 = T::zero();
        for l in -1..=1i32 {
            let row = (l + l_max) as usize;
            span3 += self.matrix.get(row, col).norm_sqr();
        }
        T::one() - span3
    }
}

/// Scan summary: the balanced offset and the operator found there.
#[derive(Debug, Clone)]
pub struct CalibrationSummary<T: Real> {
    /// Refined balanced offset (waist units).
    pub d_star: T,
    /// `|M[0, 0]|` at `d*` (input Gaussian staying in `|0>`).
    pub stay_amplitude: T,
    /// `|M[order, 0]|` at `d*` (input Gaussian shifted by the plate order).
    pub shift_amplitude: T,
    /// `||stay| - |shift|| / max(stay, shift)` at `d*`.
    pub balance_residual: T,
    /// Whether some scanned or refined offset balances within 10%.
    pub balanced_within_10pct: bool,
    /// Relative phase `arg(M[order,0] / M[0,0])` at `d*`; the idealization
    /// assumes zero.
    pub relative_phase: T,
    /// Column-0 power outside `span{|-1>,|0>,|+1>}` at `d*`.
    pub leakage_outside_span3: T,
    /// Column-0 radial leakage at `d*`.
    pub radial_leakage_col0: T,
    /// Full oracle point at the refined `d*`.
    pub point: CalibrationPoint<T>,
}

/// Result of a shifted-plate offset sweep.
#[derive(Debug, Clone)]
pub struct ShiftedSppCalibration<T: Real> {
    /// Signed mode shift of the calibrated plate.
    pub order: i32,
    pub l_max: i32,
    pub grid: GridSpec<T>,
    pub points: Vec<CalibrationPoint<T>>,
    pub summary: CalibrationSummary<T>,
}

/// Default offset scan `d = 0.00, 0.05, ..., 1.50` waists.
pub fn default_offsets<T: Real>() -> Vec<T> {
    (0..=30).map(|i| lit::<T>(i as f64 * 0.05)).collect()
}

fn basis_modes<T: Real>(l_max: i32, grid: &GridSpec<T>) -> Result<Vec<FieldGrid<T>>> {
    (-l_max..=l_max)
        .map(|l| lg_mode(&LgSpec::new(l, 0, grid.waist), grid))
        .collect()
}

fn mask_phases<T: Real>(order: i32, offset: T, grid: &GridSpec<T>) -> Vec<Complex<T>> {
    let n = grid.n;
    let m = T::from_i32(order).unwrap();
    let mut phases = Vec::with_capacity(n * n);
    for iy in 0..n {
        let y = grid.coord(iy);
        for ix in 0..n {
            let x = grid.coord(ix) - offset;
            phases.push(Complex::from_polar(T::one(), m * y.atan2(x)));
        }
    }
    phases
}

fn masked_mode<T: Real>(
    mode: &FieldGrid<T>,
    phases: &[Complex<T>],
) -> Result<FieldGrid<T>> {
    let samples = mode
        .samples()
        .iter()
        .zip(phases)
        .map(|(e, p)| *e * *p)
        .collect();
    FieldGrid::from_samples(*mode.spec(), samples)
}

/// Oracle matrix and leakage at a single offset.
pub fn calibrate_single_offset<T: Real>(
    order: i32,
    offset: T,
    l_max: i32,
    grid: &GridSpec<T>,
) -> Result<CalibrationPoint<T>> {
    let modes = basis_modes(l_max, grid)?;
    calibrate_point(order, offset, l_max, &modes, grid)
}

fn calibrate_point<T: Real>(
    order: i32,
    offset: T,
    l_max: i32,
    modes: &[FieldGrid<T>],
    grid: &GridSpec<T>,
) -> Result<CalibrationPoint<T>> {
    let dim = (2 * l_max + 1) as usize;
    let phases = mask_phases(order, offset, grid);
    let l_ext = 2 * l_max + order.abs();
    let mut matrix = OpMatrix::zeros(dim);
    let mut radial_leakage = vec![T::zero(); dim];
    let mut window_leakage = vec![T::zero(); dim];
    let mut azimuthal_window_power = vec![T::zero(); dim];
    for (col, input) in modes.iter().enumerate() {
        let masked = masked_mode(input, &phases)?;
        let mut in_window_p0 = T::zero();
        for (row, output) in modes.iter().enumerate() {
            let amp = output.overlap(&masked)?;
            matrix.set(row, col, amp);
            in_window_p0 += amp.norm_sqr();
        }
        let spectrum = masked.azimuthal_spectrum(l_ext);
        let mut inside = T::zero();
        let mut outside = T::zero();
        for (i, p) in spectrum.iter().enumerate() {
            let l = i as i32 - l_ext;
            if l.abs() <= l_max {
                inside += *p;
            } else {
                outside += *p;
            }
        }
        azimuthal_window_power[col] = inside;
        window_leakage[col] = outside;
        radial_leakage[col] = inside - in_window_p0;
    }
    Ok(CalibrationPoint {
        offset,
        matrix,
        radial_leakage,
        window_leakage,
        azimuthal_window_power,
    })
}

/// Stay/shift amplitude balance for the Gaussian input column; negative
/// while the shifted channel dominates, positive once the plate is far
/// enough out that the beam mostly misses it.
fn column_zero_balance<T: Real>(
    order: i32,
    offset: T,
    lg0: &FieldGrid<T>,
    lg_shift: &FieldGrid<T>,
    grid: &GridSpec<T>,
) -> Result<(T, T, T)> {
    let phases = mask_phases(order, offset, grid);
    let masked = masked_mode(lg0, &phases)?;
    let stay = lg0.overlap(&masked)?.norm();
    let shift = lg_shift.overlap(&masked)?.norm();
    Ok((stay - shift, stay, shift))
}

/// Sweep the plate offset, locate and refine the balanced offset `d*`.
pub fn calibrate_shifted_spp<T: Real>(
    order: i32,
    offsets: &[T],
    l_max: i32,
    grid: &GridSpec<T>,
) -> Result<ShiftedSppCalibration<T>> {
    if order == 0 {
        return Err(Error::ZeroSppOrder);
    }
    if order.abs() > l_max {
        return Err(Error::InvalidConfig(
            "plate order exceeds the truncation window".into(),
        ));
    }
    if offsets.is_empty() {
        return Err(Error::InvalidConfig("no offsets to scan".into()));
    }
    grid.validate()?;
    let modes = basis_modes(l_max, grid)?;
    let points: Vec<CalibrationPoint<T>> = offsets
        .par_iter()
        .map(|d| calibrate_point(order, *d, l_max, &modes, grid))
        .collect::<Result<_>>()?;

    let lg0 = &modes[l_max as usize];
    let lg_shift = &modes[(l_max + order) as usize];

    let balance_of =
        |p: &CalibrationPoint<T>| -> (T, T, T) {
            let stay = p.matrix.get(l_max as usize, l_max as usize).norm();
            let shift = p.matrix.get((l_max + order) as usize, l_max as usize).norm();
            (stay - shift, stay, shift)
        };

    // grid argmin of the balance residual
    let mut best = 0usize;
    let mut best_abs = T::infinity();
    for (k, p) in points.iter().enumerate() {
        let (g, _, _) = balance_of(p);
        if g.abs() < best_abs {
            best_abs = g.abs();
            best = k;
        }
    }

    // bracket a sign change for bisection
    let mut bracket: Option<(T, T, T, T)> = None; // (d_lo, g_lo, d_hi, g_hi)
    for w in 0..points.len().saturating_sub(1) {
        let (g0, _, _) = balance_of(&points[w]);
        let (g1, _, _) = balance_of(&points[w + 1]);
        if g0 == T::zero() || g0.signum() != g1.signum() {
            bracket = Some((points[w].offset, g0, points[w + 1].offset, g1));
            break;
        }
    }

    let d_star = if let Some((mut lo, mut g_lo, mut hi, _)) = bracket {
        for _ in 0..60 {
            let mid = (lo + hi) * lit(0.5);
            let (g_mid, stay, shift) =
                column_zero_balance(order, mid, lg0, lg_shift, grid)?;
            let scale = stay.max(shift);
            if scale > T::zero() && (g_mid.abs() / scale) < lit(1e-5) {
                lo = mid;
                break;
            }
            if g_mid.signum() == g_lo.signum() {
                lo = mid;
                g_lo = g_mid;
            } else {
                hi = mid;
            }
            if (hi - lo).abs() < lit(1e-10) {
                break;
            }
        }
        lo
    } else {
        points[best].offset
    };

    let point = calibrate_point(order, d_star, l_max, &modes, grid)?;
    let stay_c = point.matrix.get(l_max as usize, l_max as usize);
    let shift_c = point.matrix.get((l_max + order) as usize, l_max as usize);
    let stay_amplitude = stay_c.norm();
    let shift_amplitude = shift_c.norm();
    let scale = stay_amplitude.max(shift_amplitude);
    let balance_residual = if scale > T::zero() {
        (stay_amplitude - shift_amplitude).abs() / scale
    } else {
        T::one()
    };
    let relative_phase = (shift_c / stay_c).arg();
    let leakage_outside_span3 = point.idealization_deficit(l_max);
    let radial_leakage_col0 = point.radial_leakage[l_max as usize];
    let summary = CalibrationSummary {
        d_star,
        stay_amplitude,
        shift_amplitude,
        balance_residual,
        balanced_within_10pct: balance_residual <= lit(0.1),
        relative_phase,
        leakage_outside_span3,
        radial_leakage_col0,
        point,
    };

    Ok(ShiftedSppCalibration {
        order,
        l_max,
        grid: *grid,
        points,
        summary,
    })
}

impl<T: Real> ShiftedSppCalibration<T> {
    /// The oracle-calibrated plate operator at the balanced offset.
    pub fn operator(&self) -> Result<ElementOp<T>> {
        ElementOp::from_single_port_matrix(
            &format!(
                "spp_shifted_calibrated(order={:+}, d={})",
                self.order, self.summary.d_star
            ),
            self.l_max,
            self.summary.point.matrix.clone(),
        )
    }

    /// Calibrated operator at an arbitrary scanned point.
    pub fn operator_at(&self, index: usize) -> Result<ElementOp<T>> {
        let p = self
            .points
            .get(index)
            .ok_or_else(|| Error::InvalidConfig(format!("no calibration point {index}")))?;
        ElementOp::from_single_port_matrix(
            &format!(
                "spp_shifted_calibrated(order={:+}, d={})",
                self.order, p.offset
            ),
            self.l_max,
            p.matrix.clone(),
        )
    }

    /// Offset-sweep report: one CSV row per offset with the matrix moduli
    /// and per-column leakages.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> io::Result<()> {
        let l_max = self.l_max;
        write!(w, "offset")?;
        for l_out in -l_max..=l_max {
            for l_in in -l_max..=l_max {
                write!(w, ",absM_{l_out}_{l_in}")?;
            }
        }
        for l_in in -l_max..=l_max {
            write!(w, ",radial_leak_{l_in}")?;
        }
        for l_in in -l_max..=l_max {
            write!(w, ",window_leak_{l_in}")?;
        }
        writeln!(w)?;
        for p in &self.points {
            write!(w, "{}", p.offset)?;
            let dim = (2 * l_max + 1) as usize;
            for row in 0..dim {
                for col in 0..dim {
                    write!(w, ",{}", p.matrix.get(row, col).norm())?;
                }
            }
            for v in &p.radial_leakage {
                write!(w, ",{v}")?;
            }
            for v in &p.window_leakage {
                write!(w, ",{v}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    /// Structured summary with the balanced offset.
    pub fn write_summary_json<W: Write>(&self, w: &mut W) -> io::Result<()> {
        let s = &self.summary;
        writeln!(w, "{{")?;
        writeln!(w, "  \"order\": {},", self.order)?;
        writeln!(w, "  \"l_max\": {},", self.l_max)?;
        writeln!(w, "  \"grid_n\": {},", self.grid.n)?;
        writeln!(w, "  \"extent\": {},", self.grid.extent)?;
        writeln!(w, "  \"offsets_scanned\": {},", self.points.len())?;
        writeln!(w, "  \"d_star\": {},", s.d_star)?;
        writeln!(w, "  \"stay_amplitude\": {},", s.stay_amplitude)?;
        writeln!(w, "  \"shift_amplitude\": {},", s.shift_amplitude)?;
        writeln!(w, "  \"balance_residual\": {},", s.balance_residual)?;
        writeln!(
            w,
            "  \"balanced_within_10pct\": {},",
            s.balanced_within_10pct
        )?;
        writeln!(w, "  \"relative_phase_rad\": {},", s.relative_phase)?;
        writeln!(
            w,
            "  \"leakage_outside_span3_col0\": {},",
            s.leakage_outside_span3
        )?;
        writeln!(w, "  \"radial_leakage_col0\": {}", s.radial_leakage_col0)?;
        writeln!(w, "}}")?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick_grid() -> GridSpec<f64> {
        GridSpec::new(128, 6.0, 1.0).unwrap()
    }

    #[test]
    fn centered_plate_column_is_a_pure_shift() {
        let p = calibrate_single_offset(1, 0.0, 3, &quick_grid()).unwrap();
        // input |0>: no amplitude stays, the shifted channel gets sqrt(pi)/2
        let stay = p.matrix.get(3, 3).norm();
        let shift = p.matrix.get(4, 3).norm();
        assert!(stay < 1e-6, "stay amplitude {stay}");
        assert!(
            (shift - std::f64::consts::PI.sqrt() / 2.0).abs() < 2e-3,
            "shift amplitude {shift}"
        );
        // the rest of the column power is radial leakage, 1 - pi/4
        let rad = p.radial_leakage[3];
        assert!((rad - (1.0 - std::f64::consts::FRAC_PI_4)).abs() < 5e-3);
    }

    #[test]
    fn far_offset_plate_approaches_the_identity_on_the_gaussian() {
        let p = calibrate_single_offset(1, 3.0, 3, &quick_grid()).unwrap();
        let stay = p.matrix.get(3, 3).norm();
        let shift = p.matrix.get(4, 3).norm();
        assert!(stay > 0.9, "stay amplitude {stay}");
        assert!(shift < 0.3, "shift amplitude {shift}");
    }

    #[test]
    fn sweep_finds_a_balanced_offset_near_half_waist() {
        let offsets: Vec<f64> = (0..=12).map(|i| i as f64 * 0.125).collect();
        let cal = calibrate_shifted_spp(1, &offsets, 3, &quick_grid()).unwrap();
        let s = &cal.summary;
        assert!(
            s.d_star > 0.2 && s.d_star < 1.0,
            "d* = {} out of range",
            s.d_star
        );
        assert!(s.balanced_within_10pct);
        assert!(
            s.balance_residual < 0.01,
            "refined balance residual {}",
            s.balance_residual
        );
    }

    #[test]
    fn unbalanced_scan_sets_the_warning_flag() {
        // offsets far out where the plate barely acts: no balance point
        let offsets = [2.5, 3.0];
        let cal = calibrate_shifted_spp(1, &offsets, 3, &quick_grid()).unwrap();
        assert!(!cal.summary.balanced_within_10pct);
    }

    #[test]
    fn csv_report_has_one_row_per_offset() {
        let offsets = [0.0, 0.5];
        let cal = calibrate_shifted_spp(1, &offsets, 2, &quick_grid()).unwrap();
        let mut buf = Vec::new();
        cal.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert!(text.starts_with("offset,absM_-2_-2"));

        let mut buf = Vec::new();
        cal.write_summary_json(&mut buf).unwrap();
        let json = String::from_utf8(buf).unwrap();
        assert!(json.contains("\"d_star\""));
    }
}
