//! Phase sweeps, fringe fitting, and visibility extraction.
//!
//! A sweep drives the relative phase linearly across its span (the
//! triangular piezo scan, reported as unfolded phase), evaluates the
//! detection probability at each point through the interferometer and
//! detection layers, and optionally draws Monte Carlo counts. Fringes are
//! fitted by linear least squares in the `(cos phi, sin phi, 1)` basis,
//! which is the closed-form equivalent of `N = A cos(phi + phi0) + C0`.

use std::io::{self, Write};

use rayon::prelude::*;

use crate::detection::{
    projection_probability, simulate_counts, stream_id, CountingConfig, DetectorId, ProjectorSpec,
};
use crate::error::{Error, Result};
use crate::interferometer::{apply_eraser, propagate, EraserPair, MziConfig, OutputStates};
use crate::mode::ModeState;
use crate::scalar::{lit, Real};

/// The four measurement scenarios of the experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    /// Gaussian projection on both outputs, path tag in place: flat counts.
    WhichPathL0,
    /// Vortex-mode projection on both outputs: flat counts again.
    WhichPathL1,
    /// Idealized erasers restore full-visibility fringes.
    ErasedIdeal,
    /// Oracle-calibrated erasers: fringes with the oracle's imperfections.
    ErasedCalibrated,
}

impl Scenario {
    pub const ALL: [Scenario; 4] = [
        Scenario::WhichPathL0,
        Scenario::WhichPathL1,
        Scenario::ErasedIdeal,
        Scenario::ErasedCalibrated,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Scenario::WhichPathL0 => "which_path_l0",
            Scenario::WhichPathL1 => "which_path_l1",
            Scenario::ErasedIdeal => "erased_ideal",
            Scenario::ErasedCalibrated => "erased_calibrated",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|s| s.name() == name)
    }

    pub fn uses_erasers(&self) -> bool {
        matches!(self, Scenario::ErasedIdeal | Scenario::ErasedCalibrated)
    }
}

/// Sweep configuration.
#[derive(Debug, Clone)]
pub struct SweepConfig<T: Real> {
    pub scenario: Scenario,
    /// Number of phase samples (>= 20).
    pub n_phase_points: usize,
    /// Total unfolded phase span in radians (default two triangle ramps,
    /// 4 pi).
    pub phase_span: T,
    /// Triangular scan frequency in Hz; metadata only.
    pub scan_frequency: T,
    pub counting: CountingConfig<T>,
    /// Crosstalk amplitude applied to both detectors' projectors.
    pub crosstalk_epsilon: T,
    pub mzi: MziConfig<T>,
    /// Draw Monte Carlo counts; when false the sweep is purely analytic.
    pub monte_carlo: bool,
}

impl<T: Real> SweepConfig<T> {
    pub fn standard(scenario: Scenario, seed: u64) -> Self {
        Self {
            scenario,
            n_phase_points: 200,
            phase_span: lit::<T>(4.0) * T::PI(),
            scan_frequency: lit(0.2),
            counting: CountingConfig::standard(seed),
            crosstalk_epsilon: T::zero(),
            mzi: MziConfig::standard(T::zero()),
            monte_carlo: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_phase_points < 20 {
            return Err(Error::InvalidConfig(
                "need at least 20 phase points".into(),
            ));
        }
        if self.phase_span <= T::zero() {
            return Err(Error::InvalidConfig("phase span must be positive".into()));
        }
        self.counting.validate()?;
        self.mzi.validate()?;
        ProjectorSpec::new(0, self.crosstalk_epsilon, crate::detection::OutputPort::P3)?;
        Ok(())
    }

    /// Projector pair (C3, C4) implied by the scenario.
    pub fn projectors(&self) -> Result<(ProjectorSpec<T>, ProjectorSpec<T>)> {
        use crate::detection::OutputPort::{P3, P4};
        let eps = self.crosstalk_epsilon;
        let (t3, t4) = match self.scenario {
            Scenario::WhichPathL0 => (0, 0),
            Scenario::WhichPathL1 => (-1, 1),
            Scenario::ErasedIdeal | Scenario::ErasedCalibrated => (0, 0),
        };
        Ok((
            ProjectorSpec::new(t3, eps, P3)?,
            ProjectorSpec::new(t4, eps, P4)?,
        ))
    }
}

/// Result of the closed-form first-harmonic fit
/// `y = A cos(phi + phi0) + C0`.
#[derive(Debug, Clone, Copy)]
pub struct CosineFit<T: Real> {
    /// Non-negative fringe amplitude.
    pub amplitude: T,
    /// Phase offset in radians.
    pub phi0: T,
    /// Baseline.
    pub offset: T,
    /// Root-mean-square residual of the fit.
    pub rms_residual: T,
    pub n_points: usize,
}

/// Linear least squares on the `(cos phi, sin phi, 1)` basis; exact on
/// noiseless first-harmonic data.
pub fn fit_cosine<T: Real>(phases: &[T], values: &[T]) -> Result<CosineFit<T>> {
    if phases.len() != values.len() {
        return Err(Error::DimensionMismatch {
            expected: phases.len(),
            got: values.len(),
        });
    }
    let mut distinct: Vec<T> = Vec::new();
    for p in phases {
        if !distinct.iter().any(|q| *q == *p) {
            distinct.push(*p);
        }
        if distinct.len() > 5 {
            break;
        }
    }
    let span = phases
        .iter()
        .fold(T::neg_infinity(), |m, p| m.max(*p))
        - phases.iter().fold(T::infinity(), |m, p| m.min(*p));
    if distinct.len() < 5 || span <= T::PI() {
        return Err(Error::FitRankDeficient);
    }

    // normal equations for [a, b, c] against [cos, sin, 1]
    let mut g = [[T::zero(); 3]; 3];
    let mut rhs = [T::zero(); 3];
    for (p, y) in phases.iter().zip(values) {
        let basis = [p.cos(), p.sin(), T::one()];
        for i in 0..3 {
            for j in 0..3 {
                g[i][j] += basis[i] * basis[j];
            }
            rhs[i] += basis[i] * *y;
        }
    }
    let sol = solve3(&mut g, &mut rhs)?;
    let (a, b, c) = (sol[0], sol[1], sol[2]);

    let amplitude = (a * a + b * b).sqrt();
    let phi0 = (-b).atan2(a);
    let mut ss = T::zero();
    for (p, y) in phases.iter().zip(values) {
        let model = a * p.cos() + b * p.sin() + c;
        let d = *y - model;
        ss += d * d;
    }
    let rms_residual = (ss / T::from_usize(phases.len()).unwrap()).sqrt();
    Ok(CosineFit {
        amplitude,
        phi0,
        offset: c,
        rms_residual,
        n_points: phases.len(),
    })
}

fn solve3<T: Real>(g: &mut [[T; 3]; 3], rhs: &mut [T; 3]) -> Result<[T; 3]> {
    let scale = g
        .iter()
        .flatten()
        .fold(T::zero(), |m, v| m.max(v.abs()));
    for col in 0..3 {
        let mut pivot = col;
        for row in col + 1..3 {
            if g[row][col].abs() > g[pivot][col].abs() {
                pivot = row;
            }
        }
        if g[pivot][col].abs() <= scale * crate::scalar::tol_scaled(1e-12) {
            return Err(Error::FitRankDeficient);
        }
        g.swap(col, pivot);
        rhs.swap(col, pivot);
        for row in col + 1..3 {
            let f = g[row][col] / g[col][col];
            for k in col..3 {
                let v = g[col][k];
                g[row][k] -= f * v;
            }
            let v = rhs[col];
            rhs[row] -= f * v;
        }
    }
    let mut x = [T::zero(); 3];
    for col in (0..3).rev() {
        let mut acc = rhs[col];
        for k in col + 1..3 {
            acc -= g[col][k] * x[k];
        }
        x[col] = acc / g[col][col];
    }
    Ok(x)
}

/// Fitted visibility `|A| / C0`.
pub fn visibility_fitted<T: Real>(fit: &CosineFit<T>) -> Result<T> {
    if fit.offset <= T::zero() {
        return Err(Error::NonPositiveBaseline {
            c0: fit.offset.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(fit.amplitude / fit.offset)
}

/// Visibility from the fitted-curve extrema `I_max = C0 + |A|`,
/// `I_min = C0 - |A|`; identical to [`visibility_fitted`] by construction.
pub fn visibility_empirical<T: Real>(fit: &CosineFit<T>) -> Result<T> {
    if fit.offset <= T::zero() {
        return Err(Error::NonPositiveBaseline {
            c0: fit.offset.to_f64().unwrap_or(f64::NAN),
        });
    }
    let imax = fit.offset + fit.amplitude;
    let imin = fit.offset - fit.amplitude;
    Ok((imax - imin) / (imax + imin))
}

/// One detector's sweep record.
#[derive(Debug, Clone)]
pub struct DetectorSeries<T: Real> {
    pub detector: DetectorId,
    /// Analytic detection probability per phase point.
    pub probabilities: Vec<T>,
    /// Monte Carlo counts per phase point and bin; `None` in analytic mode.
    pub bin_counts: Option<Vec<Vec<u64>>>,
    /// The series the fit ran on: summed counts, or expected counts in
    /// analytic mode.
    pub series: Vec<T>,
    pub fit: CosineFit<T>,
    pub visibility_fitted: T,
    pub visibility_empirical: T,
    /// Raw-extrema visibility of the (noisy) series; diagnostic only.
    pub visibility_raw_extrema: T,
    /// `(max - min) / mean` of the series.
    pub flatness_metric: T,
    /// `|A|` over its standard error; < 3 means no significant fringe.
    pub fringe_significance: T,
}

/// Sweep output: phases, both detector series, and the effective seed.
#[derive(Debug, Clone)]
pub struct SweepResult<T: Real> {
    pub scenario: Scenario,
    pub seed: u64,
    pub monte_carlo: bool,
    pub phases: Vec<T>,
    pub c3: DetectorSeries<T>,
    pub c4: DetectorSeries<T>,
}

impl<T: Real> SweepResult<T> {
    /// Phase-offset separation of the two detectors' fringes, wrapped to
    /// `[0, 2 pi)`.
    pub fn fringe_phase_separation(&self) -> T {
        let d = (self.c3.fit.phi0 - self.c4.fit.phi0).abs();
        let tau = T::TAU();
        d - (d / tau).floor() * tau
    }

    /// Upper bound on `|A|/C0` compatible with pure shot noise,
    /// `3 / sqrt(total counts)`.
    pub fn shot_noise_visibility_bound(&self, detector: DetectorId) -> T {
        let series = match detector {
            DetectorId::C3 => &self.c3.series,
            DetectorId::C4 => &self.c4.series,
        };
        let total: T = series.iter().copied().sum();
        if total > T::zero() {
            lit::<T>(3.0) / total.sqrt()
        } else {
            T::infinity()
        }
    }
}

fn erased_output<T: Real>(
    out: &OutputStates<T>,
    erasers: Option<&EraserPair<T>>,
) -> Result<OutputStates<T>> {
    match erasers {
        Some(pair) => apply_eraser(out, pair),
        None => Ok(out.clone()),
    }
}

/// Run one sweep. `calibrated` supplies the eraser pair for the
/// `erased_calibrated` scenario; other scenarios ignore it.
pub fn run_sweep<T: Real>(
    cfg: &SweepConfig<T>,
    calibrated: Option<&EraserPair<T>>,
) -> Result<SweepResult<T>> {
    cfg.validate()?;
    let erasers = match cfg.scenario {
        Scenario::WhichPathL0 | Scenario::WhichPathL1 => None,
        Scenario::ErasedIdeal => Some(EraserPair::ideal(&cfg.mzi)?),
        Scenario::ErasedCalibrated => Some(
            calibrated
                .ok_or_else(|| {
                    Error::InvalidConfig(
                        "erased_calibrated sweep needs a calibrated eraser pair".into(),
                    )
                })?
                .clone(),
        ),
    };
    let (proj3, proj4) = cfg.projectors()?;
    let input = ModeState::basis_state(0, cfg.mzi.l_max)?;
    let n = cfg.n_phase_points;
    let phases: Vec<T> = (0..n)
        .map(|i| cfg.phase_span * T::from_usize(i).unwrap() / T::from_usize(n - 1).unwrap())
        .collect();

    struct Point<T> {
        p3: T,
        p4: T,
        c3_bins: Option<Vec<u64>>,
        c4_bins: Option<Vec<u64>>,
    }

    let points: Vec<Point<T>> = phases
        .par_iter()
        .enumerate()
        .map(|(i, phi)| -> Result<Point<T>> {
            let out = propagate(&cfg.mzi.with_phase(*phi), &input)?;
            let out = erased_output(&out, erasers.as_ref())?;
            let p3 = projection_probability(&out.psi_p3, &proj3)?;
            let p4 = projection_probability(&out.psi_p4, &proj4)?;
            let (c3_bins, c4_bins) = if cfg.monte_carlo {
                (
                    Some(simulate_counts(p3, &cfg.counting, stream_id(i, DetectorId::C3))?),
                    Some(simulate_counts(p4, &cfg.counting, stream_id(i, DetectorId::C4))?),
                )
            } else {
                (None, None)
            };
            Ok(Point {
                p3,
                p4,
                c3_bins,
                c4_bins,
            })
        })
        .collect::<Result<_>>()?;

    let expected_per_phase = cfg.counting.mean_arrivals()
        * T::from_usize(cfg.counting.n_bins_per_phase).unwrap()
        * cfg.counting.efficiency;

    let build = |detector: DetectorId| -> Result<DetectorSeries<T>> {
        let probabilities: Vec<T> = points
            .iter()
            .map(|pt| match detector {
                DetectorId::C3 => pt.p3,
                DetectorId::C4 => pt.p4,
            })
            .collect();
        let bin_counts: Option<Vec<Vec<u64>>> = if cfg.monte_carlo {
            Some(
                points
                    .iter()
                    .map(|pt| match detector {
                        DetectorId::C3 => pt.c3_bins.clone().unwrap(),
                        DetectorId::C4 => pt.c4_bins.clone().unwrap(),
                    })
                    .collect(),
            )
        } else {
            None
        };
        let series: Vec<T> = match &bin_counts {
            Some(counts) => counts
                .iter()
                .map(|bins| T::from_u64(bins.iter().sum::<u64>()).unwrap())
                .collect(),
            None => probabilities
                .iter()
                .map(|p| *p * expected_per_phase)
                .collect(),
        };
        let fit = fit_cosine(&phases, &series)?;
        let vis_fit = visibility_fitted(&fit)?;
        let vis_emp = visibility_empirical(&fit)?;
        let max = series.iter().fold(T::neg_infinity(), |m, v| m.max(*v));
        let min = series.iter().fold(T::infinity(), |m, v| m.min(*v));
        let mean = series.iter().copied().sum::<T>() / T::from_usize(series.len()).unwrap();
        let visibility_raw_extrema = if max + min > T::zero() {
            (max - min) / (max + min)
        } else {
            T::zero()
        };
        let flatness_metric = if mean > T::zero() {
            (max - min) / mean
        } else {
            T::zero()
        };
        // standard error of A for a linear fit with white residuals:
        // var(a) ~ 2 sigma^2 / n on the harmonic components
        let sigma_a = fit.rms_residual
            * (lit::<T>(2.0) / T::from_usize(series.len()).unwrap()).sqrt();
        let fringe_significance = if sigma_a > T::zero() {
            fit.amplitude / sigma_a
        } else {
            T::infinity()
        };
        Ok(DetectorSeries {
            detector,
            probabilities,
            bin_counts,
            series,
            fit,
            visibility_fitted: vis_fit,
            visibility_empirical: vis_emp,
            visibility_raw_extrema,
            flatness_metric,
            fringe_significance,
        })
    };

    let c3 = build(DetectorId::C3)?;
    let c4 = build(DetectorId::C4)?;
    Ok(SweepResult {
        scenario: cfg.scenario,
        seed: cfg.counting.rng_seed,
        monte_carlo: cfg.monte_carlo,
        phases,
        c3,
        c4,
    })
}

/// Result of matching the crosstalk knob to a visibility target.
#[derive(Debug, Clone, Copy)]
pub struct VisibilityCalibration<T: Real> {
    pub epsilon_star: T,
    pub achieved_visibility: T,
    pub target: T,
    pub iterations: usize,
}

/// Bisect the crosstalk amplitude until the noiseless fitted visibility of
/// the configured erased scenario matches `target` within `tol`. Relies on
/// visibility being monotonically non-increasing in the crosstalk.
pub fn calibrate_to_visibility<T: Real>(
    target: T,
    tol: T,
    cfg: &SweepConfig<T>,
    calibrated: Option<&EraserPair<T>>,
) -> Result<VisibilityCalibration<T>> {
    if target <= T::zero() || target >= T::one() {
        return Err(Error::InvalidConfig(
            "visibility target must lie in (0, 1)".into(),
        ));
    }
    let v_at = |eps: T| -> Result<T> {
        let mut c = cfg.clone();
        c.monte_carlo = false;
        c.crosstalk_epsilon = eps;
        let result = run_sweep(&c, calibrated)?;
        Ok(result.c3.visibility_fitted)
    };
    let eps_hi = lit::<T>(0.9);
    let v_lo_eps = v_at(T::zero())?;
    if (v_lo_eps - target).abs() <= tol {
        return Ok(VisibilityCalibration {
            epsilon_star: T::zero(),
            achieved_visibility: v_lo_eps,
            target,
            iterations: 0,
        });
    }
    let v_hi_eps = v_at(eps_hi)?;
    if target > v_lo_eps || target < v_hi_eps {
        return Err(Error::VisibilityTargetUnreachable {
            target: target.to_f64().unwrap_or(f64::NAN),
            eps_lo: 0.0,
            eps_hi: 0.9,
            v_lo: v_lo_eps.to_f64().unwrap_or(f64::NAN),
            v_hi: v_hi_eps.to_f64().unwrap_or(f64::NAN),
        });
    }
    let mut lo = T::zero(); // V(lo) > target
    let mut hi = eps_hi; // V(hi) < target
    let inner_tol = tol * lit(0.125);
    let mut eps = (lo + hi) * lit(0.5);
    let mut v = v_at(eps)?;
    let mut iterations = 1;
    while (v - target).abs() > inner_tol && iterations < 80 {
        if v > target {
            lo = eps;
        } else {
            hi = eps;
        }
        eps = (lo + hi) * lit(0.5);
        v = v_at(eps)?;
        iterations += 1;
    }
    Ok(VisibilityCalibration {
        epsilon_star: eps,
        achieved_visibility: v,
        target,
        iterations,
    })
}

/// Counts CSV: `phase_rad,detector_id,bin_index,count,seed`, one row per
/// phase point, detector, and bin. Analytic sweeps write the expected counts
/// in the same schema.
pub fn write_counts_csv<T: Real, W: Write>(result: &SweepResult<T>, w: &mut W) -> io::Result<()> {
    writeln!(w, "phase_rad,detector_id,bin_index,count,seed")?;
    for series in [&result.c3, &result.c4] {
        for (i, phase) in result.phases.iter().enumerate() {
            match &series.bin_counts {
                Some(counts) => {
                    for (b, c) in counts[i].iter().enumerate() {
                        writeln!(
                            w,
                            "{},{},{},{},{}",
                            phase,
                            series.detector.name(),
                            b,
                            c,
                            result.seed
                        )?;
                    }
                }
                None => {
                    writeln!(
                        w,
                        "{},{},0,{},{}",
                        phase,
                        series.detector.name(),
                        series.series[i],
                        result.seed
                    )?;
                }
            }
        }
    }
    Ok(())
}

/// Human-readable sweep summary: fit parameters, visibilities, flatness.
pub fn write_summary<T: Real, W: Write>(result: &SweepResult<T>, w: &mut W) -> io::Result<()> {
    writeln!(w, "scenario: {}", result.scenario.name())?;
    writeln!(w, "seed: {}", result.seed)?;
    writeln!(
        w,
        "mode: {}",
        if result.monte_carlo {
            "monte-carlo"
        } else {
            "analytic"
        }
    )?;
    writeln!(w, "phase_points: {}", result.phases.len())?;
    for series in [&result.c3, &result.c4] {
        let d = series.detector.name();
        writeln!(
            w,
            "[{d}] fit: A={}, phi0={}, C0={}, rms_residual={}",
            series.fit.amplitude, series.fit.phi0, series.fit.offset, series.fit.rms_residual
        )?;
        writeln!(
            w,
            "[{d}] visibility_fitted={}, visibility_empirical={}, raw_extrema={}",
            series.visibility_fitted, series.visibility_empirical, series.visibility_raw_extrema
        )?;
        writeln!(
            w,
            "[{d}] flatness={}, fringe_significance={}",
            series.flatness_metric, series.fringe_significance
        )?;
        let verdict = if series.fringe_significance < lit(3.0) {
            "no significant fringe"
        } else {
            "significant fringe"
        };
        writeln!(w, "[{d}] verdict: {verdict}")?;
    }
    writeln!(
        w,
        "fringe_phase_separation_rad: {}",
        result.fringe_phase_separation()
    )?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn phases(n: usize, span: f64) -> Vec<f64> {
        (0..n).map(|i| span * i as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn fit_recovers_noiseless_parameters_exactly() {
        let ph = phases(50, 4.0 * std::f64::consts::PI);
        let y: Vec<f64> = ph.iter().map(|p| 5.0 * p.cos() + 10.0).collect();
        let fit = fit_cosine(&ph, &y).unwrap();
        assert!((fit.amplitude - 5.0).abs() < 1e-9);
        assert!(fit.phi0.abs() < 1e-9);
        assert!((fit.offset - 10.0).abs() < 1e-9);
        assert!(fit.rms_residual < 1e-9);

        let y: Vec<f64> = ph
            .iter()
            .map(|p| 3.0 * (p + std::f64::consts::FRAC_PI_3).cos() + 7.0)
            .collect();
        let fit = fit_cosine(&ph, &y).unwrap();
        assert!((fit.amplitude - 3.0).abs() < 1e-9);
        assert!((fit.phi0 - std::f64::consts::FRAC_PI_3).abs() < 1e-9);
        assert!((fit.offset - 7.0).abs() < 1e-9);
    }

    #[test]
    fn degenerate_designs_are_rejected() {
        let ph = vec![1.0; 30];
        let y = vec![2.0; 30];
        assert!(matches!(
            fit_cosine(&ph, &y),
            Err(Error::FitRankDeficient)
        ));
        // spans less than pi are degenerate too
        let ph = phases(30, 2.0);
        let y: Vec<f64> = ph.iter().map(|p| p.cos()).collect();
        assert!(fit_cosine(&ph, &y).is_err());
    }

    #[test]
    fn poisson_noise_does_not_bias_the_fit() {
        use rand::SeedableRng;
        use rand_distr::{Distribution, Poisson};
        let ph = phases(200, 4.0 * std::f64::consts::PI);
        let mut amp_sum = 0.0;
        let n_seeds = 100;
        for seed in 0..n_seeds {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let y: Vec<f64> = ph
                .iter()
                .map(|p| {
                    let lambda = 100.0 + 30.0 * p.cos();
                    Poisson::new(lambda).unwrap().sample(&mut rng)
                })
                .collect();
            let fit = fit_cosine(&ph, &y).unwrap();
            amp_sum += fit.amplitude;
        }
        let mean_amp = amp_sum / n_seeds as f64;
        assert!(
            (mean_amp - 30.0).abs() / 30.0 < 0.01,
            "mean amplitude {mean_amp}"
        );
    }

    #[test]
    fn single_noisy_fit_recovers_within_three_standard_errors() {
        use rand::SeedableRng;
        use rand_distr::{Distribution, Poisson};
        let ph = phases(200, 4.0 * std::f64::consts::PI);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(77);
        let y: Vec<f64> = ph
            .iter()
            .map(|p| {
                let lambda = 100.0 + 30.0 * p.cos();
                Poisson::new(lambda).unwrap().sample(&mut rng)
            })
            .collect();
        let fit = fit_cosine(&ph, &y).unwrap();
        let se_a = (2.0f64 * 100.0 / 200.0).sqrt();
        let se_c = (100.0 / 200.0f64).sqrt();
        assert!((fit.amplitude - 30.0).abs() < 3.0 * se_a);
        assert!((fit.offset - 100.0).abs() < 3.0 * se_c);
    }

    #[test]
    fn visibility_values() {
        let fit = CosineFit::<f64> {
            amplitude: 5.0,
            phi0: 0.0,
            offset: 10.0,
            rms_residual: 0.0,
            n_points: 100,
        };
        assert!((visibility_fitted(&fit).unwrap() - 0.5).abs() < 1e-15);
        assert!((visibility_empirical(&fit).unwrap() - 0.5).abs() < 1e-15);

        let unit = CosineFit {
            amplitude: 10.0,
            ..fit
        };
        assert!((visibility_fitted(&unit).unwrap() - 1.0).abs() < 1e-15);

        let bad = CosineFit {
            offset: 0.0,
            ..fit
        };
        assert!(matches!(
            visibility_fitted(&bad),
            Err(Error::NonPositiveBaseline { .. })
        ));
    }

    #[test]
    fn analytic_erased_sweep_has_unit_visibility_and_opposed_fringes() {
        let mut cfg = SweepConfig::<f64>::standard(Scenario::ErasedIdeal, 1);
        cfg.monte_carlo = false;
        let result = run_sweep(&cfg, None).unwrap();
        assert!((result.c3.visibility_fitted - 1.0).abs() < 1e-9);
        assert!((result.c4.visibility_fitted - 1.0).abs() < 1e-9);
        assert!(result.c3.fit.rms_residual < 1e-9);
        let sep = result.fringe_phase_separation();
        assert!((sep - std::f64::consts::PI).abs() < 1e-6);
    }

    #[test]
    fn analytic_which_path_sweeps_are_flat() {
        for scenario in [Scenario::WhichPathL0, Scenario::WhichPathL1] {
            let mut cfg = SweepConfig::<f64>::standard(scenario, 1);
            cfg.monte_carlo = false;
            cfg.n_phase_points = 100;
            let result = run_sweep(&cfg, None).unwrap();
            for series in [&result.c3, &result.c4] {
                let max = series
                    .probabilities
                    .iter()
                    .fold(f64::NEG_INFINITY, |m, v| m.max(*v));
                let min = series
                    .probabilities
                    .iter()
                    .fold(f64::INFINITY, |m, v| m.min(*v));
                assert!(max - min < 1e-12, "{scenario:?} spread {}", max - min);
                assert!((series.probabilities[0] - 0.25).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn crosstalk_dims_the_ideal_fringe_to_the_closed_form() {
        // V(eps) = 2 (1 + eps) / (1 + (1 + eps)^2), exactly 12/13 at 0.5
        let mut cfg = SweepConfig::<f64>::standard(Scenario::ErasedIdeal, 1);
        cfg.monte_carlo = false;
        cfg.crosstalk_epsilon = 0.5;
        let result = run_sweep(&cfg, None).unwrap();
        assert!((result.c3.visibility_fitted - 12.0 / 13.0).abs() < 1e-9);
        assert!((result.c4.visibility_fitted - 12.0 / 13.0).abs() < 1e-9);
    }

    #[test]
    fn erased_calibrated_without_calibration_is_an_error() {
        let cfg = SweepConfig::<f64>::standard(Scenario::ErasedCalibrated, 1);
        assert!(run_sweep(&cfg, None).is_err());
    }

    #[test]
    fn visibility_target_of_one_needs_no_crosstalk() {
        let cfg = SweepConfig::<f64>::standard(Scenario::ErasedIdeal, 1);
        let cal = calibrate_to_visibility(0.999_999, 1e-3, &cfg, None).unwrap();
        assert!(cal.epsilon_star.abs() < 1e-12);
        assert!((cal.achieved_visibility - 1.0).abs() < 1e-9);
    }

    #[test]
    fn visibility_bisection_matches_the_closed_form_epsilon() {
        // solving 2u/(1+u^2) = 0.8435 for u = 1 + eps gives eps = 0.822322...
        let cfg = SweepConfig::<f64>::standard(Scenario::ErasedIdeal, 1);
        let cal = calibrate_to_visibility(0.8435, 0.005, &cfg, None).unwrap();
        let u = (1.0 + (1.0 - 0.8435f64 * 0.8435).sqrt()) / 0.8435;
        let eps_closed = u - 1.0;
        assert!(
            (cal.epsilon_star - eps_closed).abs() < 1e-3,
            "bisection {} vs closed form {eps_closed}",
            cal.epsilon_star
        );
        assert!((cal.achieved_visibility - 0.8435).abs() <= 0.005);
    }

    #[test]
    fn unreachable_targets_report_the_bracket() {
        let cfg = SweepConfig::<f64>::standard(Scenario::ErasedIdeal, 1);
        match calibrate_to_visibility(0.2, 0.005, &cfg, None) {
            Err(Error::VisibilityTargetUnreachable { v_lo, v_hi, .. }) => {
                assert!(v_lo > v_hi);
            }
            other => panic!("expected unreachable, got {other:?}"),
        }
    }

    #[test]
    fn csv_output_is_deterministic_per_seed() {
        let mut cfg = SweepConfig::<f64>::standard(Scenario::ErasedIdeal, 42);
        cfg.n_phase_points = 25;
        let a = run_sweep(&cfg, None).unwrap();
        let b = run_sweep(&cfg, None).unwrap();
        let mut csv_a = Vec::new();
        let mut csv_b = Vec::new();
        write_counts_csv(&a, &mut csv_a).unwrap();
        write_counts_csv(&b, &mut csv_b).unwrap();
        assert_eq!(csv_a, csv_b);

        cfg.counting.rng_seed = 43;
        let c = run_sweep(&cfg, None).unwrap();
        let mut csv_c = Vec::new();
        write_counts_csv(&c, &mut csv_c).unwrap();
        assert_ne!(csv_a, csv_c);
    }
}
