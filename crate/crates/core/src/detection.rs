//! Projection measurements and photon counting.
//!
//! Detection behind each output coupler is a projection onto a single mode:
//! the bare fiber selects the Gaussian `|0>`, and a centered plate in front
//! of the fiber selects `|+1>` or `|-1>`. Imperfect plate/beam alignment is
//! modeled by a single crosstalk amplitude `epsilon` that admixes the port's
//! companion mode into the projector.
//!
//! Counting is a thinned Poisson process: arrivals at the source rate, each
//! kept with the detection probability. Per-bin random streams are derived
//! from one root seed by a counter-based split, so sweeps are reproducible
//! bit-for-bit no matter how the phase points are scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Poisson};

use crate::error::{Error, Result};
use crate::mode::ModeState;
use crate::scalar::{lit, Real};

/// Speed of light (m/s), used only for the photon-spacing sanity check.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Interferometer output a detector looks at.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputPort {
    P3,
    P4,
}

impl OutputPort {
    /// The OAM mode this port's arm-A2 branch carries.
    pub fn companion_mode(&self) -> i32 {
        match self {
            OutputPort::P3 => -1,
            OutputPort::P4 => 1,
        }
    }
}

/// Detector names follow the couplers on the two outputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DetectorId {
    C3,
    C4,
}

impl DetectorId {
    pub fn name(&self) -> &'static str {
        match self {
            DetectorId::C3 => "C3",
            DetectorId::C4 => "C4",
        }
    }

    pub fn port(&self) -> OutputPort {
        match self {
            DetectorId::C3 => OutputPort::P3,
            DetectorId::C4 => OutputPort::P4,
        }
    }
}

/// Single-mode projector with crosstalk.
#[derive(Debug, Clone, Copy)]
pub struct ProjectorSpec<T: Real> {
    /// Mode the detection chain selects.
    pub target_mode: i32,
    /// Amplitude of the admixed companion mode, `0 <= epsilon < 1`.
    pub crosstalk_epsilon: T,
    pub port: OutputPort,
}

impl<T: Real> ProjectorSpec<T> {
    pub fn new(target_mode: i32, crosstalk_epsilon: T, port: OutputPort) -> Result<Self> {
        if crosstalk_epsilon < T::zero() || crosstalk_epsilon >= T::one() {
            return Err(Error::InvalidConfig(format!(
                "crosstalk epsilon {crosstalk_epsilon} outside [0, 1)"
            )));
        }
        Ok(Self {
            target_mode,
            crosstalk_epsilon,
            port,
        })
    }

    /// The mode that leaks into the projector: misaligned plates couple the
    /// Gaussian detection to the port's OAM mode and vice versa.
    pub fn admixed_mode(&self) -> i32 {
        if self.target_mode == 0 {
            self.port.companion_mode()
        } else {
            0
        }
    }

    /// Unit-norm defining vector `(|target> + eps |admixed>) / sqrt(1 + eps^2)`.
    pub fn defining_vector(&self, l_max: i32) -> Result<ModeState<T>> {
        let target = ModeState::basis_state(self.target_mode, l_max)?;
        if self.crosstalk_epsilon == T::zero() {
            return Ok(target);
        }
        let admix = ModeState::basis_state(self.admixed_mode(), l_max)?;
        let scale = T::one() / (T::one() + self.crosstalk_epsilon * self.crosstalk_epsilon).sqrt();
        Ok(target
            .add(&admix.scale(num_complex::Complex::new(self.crosstalk_epsilon, T::zero())))?
            .scale(num_complex::Complex::new(scale, T::zero())))
    }
}

/// `|<v|state>|^2` for the projector's defining vector. The state may be a
/// sub-normalized output branch; the result is bounded by its squared norm.
pub fn projection_probability<T: Real>(
    state: &ModeState<T>,
    proj: &ProjectorSpec<T>,
) -> Result<T> {
    let v = proj.defining_vector(state.l_max())?;
    Ok(v.inner_product(state)?.norm_sqr())
}

/// Photon-counting configuration.
#[derive(Debug, Clone, Copy)]
pub struct CountingConfig<T: Real> {
    /// Source rate after attenuation (photons/second).
    pub photon_rate: T,
    /// Duration of one counting bin (seconds).
    pub bin_duration: T,
    /// Counting bins collected per phase point.
    pub n_bins_per_phase: usize,
    /// Root seed; per-bin streams are split off it.
    pub rng_seed: u64,
    /// Coincidence window for the accidental-pair estimate (seconds).
    pub coincidence_window: T,
    /// Detector dark-count rate (counts/second).
    pub dark_rate: T,
    /// Detector quantum efficiency in [0, 1].
    pub efficiency: T,
}

impl<T: Real> CountingConfig<T> {
    /// Experiment defaults: 1e4 photons/s, 0.1 s bins, ideal detector.
    pub fn standard(rng_seed: u64) -> Self {
        Self {
            photon_rate: lit(1.0e4),
            bin_duration: lit(0.1),
            n_bins_per_phase: 1,
            rng_seed,
            coincidence_window: lit(1.59e-6),
            dark_rate: T::zero(),
            efficiency: T::one(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.photon_rate <= T::zero() {
            return Err(Error::InvalidConfig("photon rate must be positive".into()));
        }
        if self.bin_duration <= T::zero() {
            return Err(Error::InvalidConfig("bin duration must be positive".into()));
        }
        if self.n_bins_per_phase == 0 {
            return Err(Error::InvalidConfig("need at least one bin per phase".into()));
        }
        if self.efficiency < T::zero() || self.efficiency > T::one() {
            return Err(Error::InvalidConfig("efficiency outside [0, 1]".into()));
        }
        if self.dark_rate < T::zero() {
            return Err(Error::InvalidConfig("dark rate must be non-negative".into()));
        }
        Ok(())
    }

    /// Mean arrivals per bin.
    pub fn mean_arrivals(&self) -> T {
        self.photon_rate * self.bin_duration
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Counter-based stream id for one (phase point, detector) pair.
pub fn stream_id(phase_index: usize, detector: DetectorId) -> u64 {
    (phase_index as u64) << 1
        | match detector {
            DetectorId::C3 => 0,
            DetectorId::C4 => 1,
        }
}

fn stream_rng(root_seed: u64, stream: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix64(root_seed ^ splitmix64(stream)))
}

/// Simulate photon counts for the bins of one phase point.
///
/// Arrivals are Poisson(rate x bin duration); each arrival survives with
/// probability `prob x efficiency`; dark counts add an independent Poisson
/// stream. Deterministic given `(cfg.rng_seed, stream)`.
pub fn simulate_counts<T: Real>(
    prob: T,
    cfg: &CountingConfig<T>,
    stream: u64,
) -> Result<Vec<u64>> {
    cfg.validate()?;
    let p = prob.to_f64().unwrap_or(f64::NAN);
    if !(-1.0e-9..=1.0 + 1.0e-9).contains(&p) {
        return Err(Error::ProbabilityOutOfRange { p });
    }
    let keep = (p * cfg.efficiency.to_f64().unwrap()).clamp(0.0, 1.0);
    let mu = cfg.mean_arrivals().to_f64().unwrap();
    let dark_mu = (cfg.dark_rate * cfg.bin_duration).to_f64().unwrap();

    let mut rng = stream_rng(cfg.rng_seed, stream);
    let arrivals = Poisson::new(mu)
        .map_err(|e| Error::InvalidConfig(format!("invalid Poisson mean {mu}: {e}")))?;
    let dark = if dark_mu > 0.0 {
        Some(Poisson::new(dark_mu).map_err(|e| {
            Error::InvalidConfig(format!("invalid dark-count mean {dark_mu}: {e}"))
        })?)
    } else {
        None
    };

    let mut counts = Vec::with_capacity(cfg.n_bins_per_phase);
    for _ in 0..cfg.n_bins_per_phase {
        let n = arrivals.sample(&mut rng) as u64;
        let mut kept = if keep >= 1.0 {
            n
        } else if keep <= 0.0 || n == 0 {
            0
        } else {
            Binomial::new(n, keep)
                .expect("thinning probability validated above")
                .sample(&mut rng)
        };
        if let Some(d) = &dark {
            kept += d.sample(&mut rng) as u64;
        }
        counts.push(kept);
    }
    Ok(counts)
}

/// Probability of at least two arrivals in one coincidence window:
/// `1 - e^{-mu}(1 + mu)` with `mu = rate x window`.
pub fn coincidence_probability<T: Real>(rate: T, window: T) -> T {
    let mu = rate * window;
    T::one() - (-mu).exp() * (T::one() + mu)
}

/// Invert [`coincidence_probability`] for the window implied by a measured
/// accidental-pair probability at a given rate.
pub fn window_for_coincidence<T: Real>(rate: T, target_p: T) -> Result<T> {
    if rate <= T::zero() || target_p <= T::zero() || target_p >= T::one() {
        return Err(Error::InvalidConfig(
            "need rate > 0 and target probability in (0, 1)".into(),
        ));
    }
    // bisection on mu; P is increasing in mu
    let mut lo = T::zero();
    let mut hi = T::one();
    while coincidence_probability(T::one(), hi) < target_p {
        hi = hi * lit(2.0);
    }
    for _ in 0..200 {
        let mid = (lo + hi) * lit(0.5);
        if coincidence_probability(T::one(), mid) < target_p {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < lit::<T>(1e-15) * hi.max(T::one()) {
            break;
        }
    }
    Ok((lo + hi) * lit(0.5) / rate)
}

/// Mean spatial separation between successive photons at the source rate.
pub fn mean_photon_spacing_m<T: Real>(rate: T) -> T {
    lit::<T>(SPEED_OF_LIGHT) / rate
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elements::{ElementOp, ShiftedSppSpec, SppDirection};
    use crate::interferometer::{apply_eraser, propagate, EraserPair, MziConfig};
    use crate::mode::ModeState;

    type S = ModeState<f64>;

    #[test]
    fn ideal_projector_on_an_equal_superposition() {
        let state = S::basis_state(0, 3)
            .unwrap()
            .add(&S::basis_state(1, 3).unwrap())
            .unwrap()
            .normalize()
            .unwrap();
        let proj = ProjectorSpec::new(0, 0.0, OutputPort::P4).unwrap();
        let p = projection_probability(&state, &proj).unwrap();
        assert!((p - 0.5).abs() < 1e-15);
    }

    #[test]
    fn erased_branch_hits_the_fringe_extremum_at_pi() {
        let cfg = MziConfig::standard(std::f64::consts::PI);
        let out = propagate(&cfg, &S::basis_state(0, 3).unwrap()).unwrap();
        let erased = apply_eraser(&out, &EraserPair::ideal(&cfg).unwrap()).unwrap();
        let proj = ProjectorSpec::new(0, 0.0, OutputPort::P3).unwrap();
        let p = projection_probability(&erased.psi_p3, &proj).unwrap();
        // (1 - cos pi)/4 of the total = half: the branch-weight-scaled crest
        assert!((p - 0.5).abs() < 1e-12);

        let out0 = propagate(&cfg.with_phase(0.0), &S::basis_state(0, 3).unwrap()).unwrap();
        let erased0 = apply_eraser(&out0, &EraserPair::ideal(&cfg).unwrap()).unwrap();
        let p0 = projection_probability(&erased0.psi_p3, &proj).unwrap();
        assert!(p0 < 1e-12, "trough should be dark, got {p0}");
    }

    #[test]
    fn crosstalk_on_a_tagged_port_leaks_a_small_fringe() {
        // closed form: |<v|psi_P4>|^2 = 1/4 + eps cos(phi) / (2 (1 + eps^2))
        let eps = 0.1f64;
        let proj = ProjectorSpec::new(1, eps, OutputPort::P4).unwrap();
        assert_eq!(proj.admixed_mode(), 0);
        for phi in [0.0, 0.9, 2.2, std::f64::consts::PI] {
            let cfg = MziConfig::standard(phi);
            let out = propagate(&cfg, &S::basis_state(0, 3).unwrap()).unwrap();
            let got = projection_probability(&out.psi_p4, &proj).unwrap();
            let want = 0.25 + eps * phi.cos() / (2.0 * (1.0 + eps * eps));
            assert!((got - want).abs() < 1e-12, "phi {phi}: {got} vs {want}");
        }
    }

    #[test]
    fn crosstalk_epsilon_must_stay_below_one() {
        assert!(ProjectorSpec::new(0, 1.0, OutputPort::P3).is_err());
        assert!(ProjectorSpec::new(0, -0.1, OutputPort::P3).is_err());
    }

    #[test]
    fn zero_probability_yields_empty_bins() {
        let mut cfg = CountingConfig::<f64>::standard(7);
        cfg.n_bins_per_phase = 100;
        let counts = simulate_counts(0.0, &cfg, 0).unwrap();
        assert!(counts.iter().all(|&c| c == 0));
    }

    #[test]
    fn unthinned_counts_match_the_poisson_mean() {
        let mut cfg = CountingConfig::<f64>::standard(20250811);
        cfg.photon_rate = 1.0e3;
        cfg.bin_duration = 0.1; // mu = 100
        cfg.n_bins_per_phase = 10_000;
        let counts = simulate_counts(1.0, &cfg, 0).unwrap();
        let mean = counts.iter().sum::<u64>() as f64 / counts.len() as f64;
        // 4 sigma of the sample mean: 4 sqrt(100 / 10^4) = 0.4
        assert!((mean - 100.0).abs() < 0.4, "sample mean {mean}");
    }

    #[test]
    fn thinned_counts_keep_poisson_statistics() {
        let mut cfg = CountingConfig::<f64>::standard(4242);
        cfg.photon_rate = 2.0e3;
        cfg.bin_duration = 0.1; // mu = 200, thinned to 100
        cfg.n_bins_per_phase = 10_000;
        let counts = simulate_counts(0.5, &cfg, 3).unwrap();
        let n = counts.len() as f64;
        let mean = counts.iter().sum::<u64>() as f64 / n;
        let var = counts
            .iter()
            .map(|&c| {
                let d = c as f64 - mean;
                d * d
            })
            .sum::<f64>()
            / (n - 1.0);
        assert!((mean - 100.0).abs() < 0.4, "mean {mean}");
        let fano = var / mean;
        assert!((0.9..=1.1).contains(&fano), "variance/mean {fano}");
    }

    #[test]
    fn probability_outside_unit_interval_is_an_error() {
        let cfg = CountingConfig::<f64>::standard(1);
        assert!(matches!(
            simulate_counts(1.5, &cfg, 0),
            Err(Error::ProbabilityOutOfRange { .. })
        ));
        assert!(simulate_counts(1.0 + 5e-10, &cfg, 0).is_ok());
    }

    #[test]
    fn same_seed_and_stream_reproduce_bit_identical_counts() {
        let mut cfg = CountingConfig::<f64>::standard(99);
        cfg.n_bins_per_phase = 50;
        let a = simulate_counts(0.4, &cfg, 11).unwrap();
        let b = simulate_counts(0.4, &cfg, 11).unwrap();
        assert_eq!(a, b);
        let c = simulate_counts(0.4, &cfg, 12).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn dark_counts_and_efficiency_shift_the_mean() {
        let mut cfg = CountingConfig::<f64>::standard(5);
        cfg.photon_rate = 1.0e3;
        cfg.bin_duration = 0.1;
        cfg.n_bins_per_phase = 10_000;
        cfg.efficiency = 0.5;
        cfg.dark_rate = 100.0; // 10 per bin
        let counts = simulate_counts(1.0, &cfg, 0).unwrap();
        let mean = counts.iter().sum::<u64>() as f64 / counts.len() as f64;
        assert!((mean - 60.0).abs() < 0.4, "mean {mean}");
    }

    #[test]
    fn coincidence_probability_reduces_to_mu_sq_over_two() {
        let mu = 1.0e-3f64;
        let p = coincidence_probability(1.0, mu);
        let approx = mu * mu / 2.0;
        assert!((p - approx).abs() / approx < 1e-3);
    }

    #[test]
    fn published_coincidence_rate_implies_a_consistent_window() {
        let rate = 1.0e4f64;
        let window = window_for_coincidence(rate, 1.25e-4).unwrap();
        let mu = rate * window;
        assert!((0.0158..0.0160).contains(&mu), "mu {mu}");
        let p = coincidence_probability(rate, window);
        assert!((p - 1.25e-4).abs() / 1.25e-4 < 1e-9);
    }

    #[test]
    fn photon_spacing_at_the_source_rate_is_thirty_kilometres() {
        let d = mean_photon_spacing_m(1.0e4f64);
        assert!((d - 3.0e4).abs() / 3.0e4 < 0.05);
    }

    #[test]
    fn ideal_eraser_is_not_an_isometry_and_we_do_not_hide_it() {
        let eraser = ElementOp::spp_shifted_ideal(
            &ShiftedSppSpec::half_waist(SppDirection::Raising),
            3,
        )
        .unwrap();
        let plus = S::basis_state(0, 3)
            .unwrap()
            .add(&S::basis_state(-1, 3).unwrap())
            .unwrap()
            .normalize()
            .unwrap();
        let applied = eraser.apply(&plus).unwrap();
        // constructive input gains norm; the deficit is negative and visible
        assert!(applied.norm_deficit < -0.1);
    }
}
