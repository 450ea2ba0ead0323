//! Transverse-field oracle.
//!
//! The mode-space operators elsewhere in the crate are idealizations; this
//! module is the physical-layer ground truth they are checked against. A
//! beam cross-section is a complex field sampled on a cell-centered square
//! grid, spiral plates are pointwise phase masks `exp(i m atan2(y - y0,
//! x - x0))`, and OAM content is read off by decomposing into
//! Laguerre-Gaussian modes / azimuthal Fourier channels.
//!
//! Quadrature is a plain Riemann sum over the grid. The integrands decay
//! like `exp(-2 r^2 / w^2)` and the default extent is six waists, so the
//! domain-truncation error sits at machine level and the sum behaves like a
//! trapezoid rule on a smooth periodic function; the dominant residual error
//! comes from the phase singularity of masked fields, which the grid
//! convergence checks budget for.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

/// Smallest grid resolution the oracle accepts.
pub const MIN_GRID_N: usize = 128;

/// Square sampling window: `n` x `n` cells covering `[-extent, extent]^2`,
/// lengths in units of the reference beam waist.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec<T: Real> {
    pub n: usize,
    pub extent: T,
    pub waist: T,
}

impl<T: Real> GridSpec<T> {
    pub fn new(n: usize, extent: T, waist: T) -> Result<Self> {
        let spec = Self { n, extent, waist };
        spec.validate()?;
        Ok(spec)
    }

    /// Default oracle geometry: 512 cells across, six waists of half-width.
    pub fn standard() -> Self {
        Self {
            n: 512,
            extent: lit(6.0),
            waist: T::one(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < MIN_GRID_N {
            return Err(Error::ResolutionTooCoarse {
                n: self.n,
                min: MIN_GRID_N,
            });
        }
        if self.extent <= T::zero() || self.waist <= T::zero() {
            return Err(Error::InvalidConfig(
                "grid extent and waist must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Cell pitch.
    pub fn dx(&self) -> T {
        lit::<T>(2.0) * self.extent / T::from_usize(self.n).unwrap()
    }

    /// Coordinate of cell center `i` (same for both axes).
    pub fn coord(&self, i: usize) -> T {
        (T::from_usize(i).unwrap() + lit(0.5)) * self.dx() - self.extent
    }
}

/// Laguerre-Gaussian mode label: azimuthal index `l`, radial index `p`,
/// waist `w0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LgSpec<T: Real> {
    pub l: i32,
    pub p: u32,
    pub waist: T,
}

impl<T: Real> LgSpec<T> {
    pub fn new(l: i32, p: u32, waist: T) -> Self {
        Self { l, p, waist }
    }
}

/// A transverse field sampled on a [`GridSpec`].
#[derive(Debug, Clone)]
pub struct FieldGrid<T: Real> {
    spec: GridSpec<T>,
    samples: Vec<Complex<T>>,
}

impl<T: Real> FieldGrid<T> {
    /// Sample `f(x, y)` at every cell center.
    pub fn from_fn(spec: GridSpec<T>, f: impl Fn(T, T) -> Complex<T> + Sync) -> Result<Self> {
        spec.validate()?;
        let n = spec.n;
        let mut samples = Vec::with_capacity(n * n);
        for iy in 0..n {
            let y = spec.coord(iy);
            for ix in 0..n {
                let x = spec.coord(ix);
                samples.push(f(x, y));
            }
        }
        Ok(Self { spec, samples })
    }

    /// Wrap an already-sampled field.
    pub fn from_samples(spec: GridSpec<T>, samples: Vec<Complex<T>>) -> Result<Self> {
        spec.validate()?;
        if samples.len() != spec.n * spec.n {
            return Err(Error::DimensionMismatch {
                expected: spec.n * spec.n,
                got: samples.len(),
            });
        }
        Ok(Self { spec, samples })
    }

    pub fn spec(&self) -> &GridSpec<T> {
        &self.spec
    }

    pub fn samples(&self) -> &[Complex<T>] {
        &self.samples
    }

    fn cell_area(&self) -> T {
        let dx = self.spec.dx();
        dx * dx
    }

    /// Total power `sum |E|^2 dA`.
    pub fn power(&self) -> T {
        let da = self.cell_area();
        self.samples.iter().map(|c| c.norm_sqr()).sum::<T>() * da
    }

    /// Unit-power copy.
    pub fn normalize(&self) -> Result<Self> {
        let p = self.power();
        if p <= T::zero() {
            return Err(Error::NullState);
        }
        let s = T::one() / p.sqrt();
        Ok(Self {
            spec: self.spec,
            samples: self
                .samples
                .iter()
                .map(|c| *c * Complex::new(s, T::zero()))
                .collect(),
        })
    }

    fn check_geometry(&self, other: &Self) -> Result<()> {
        if self.spec != other.spec {
            return Err(Error::GridMismatch(format!(
                "n {} vs {}, extent {} vs {}",
                self.spec.n, other.spec.n, self.spec.extent, other.spec.extent
            )));
        }
        Ok(())
    }

    /// `integral conj(self) * other dA`.
    pub fn overlap(&self, other: &Self) -> Result<Complex<T>> {
        self.check_geometry(other)?;
        let da = self.cell_area();
        let mut acc = Complex::new(T::zero(), T::zero());
        for (a, b) in self.samples.iter().zip(&other.samples) {
            acc = acc + a.conj() * *b;
        }
        Ok(acc * Complex::new(da, T::zero()))
    }

    /// Multiply pointwise by a spiral phase mask of the given order centered
    /// at `(offset_x, offset_y)`. Pure phase: power is unchanged.
    pub fn apply_spp_mask(&self, order: i32, offset_x: T, offset_y: T) -> Self {
        let n = self.spec.n;
        let m = T::from_i32(order).unwrap();
        let mut samples = Vec::with_capacity(n * n);
        for iy in 0..n {
            let y = self.spec.coord(iy) - offset_y;
            for ix in 0..n {
                let x = self.spec.coord(ix) - offset_x;
                let theta = y.atan2(x);
                let phase = Complex::from_polar(T::one(), m * theta);
                samples.push(self.samples[iy * n + ix] * phase);
            }
        }
        Self {
            spec: self.spec,
            samples,
        }
    }

    /// Interpolated field value at an arbitrary point: separable 6-point
    /// Lagrange interpolation on the cell-centered grid; zero outside.
    pub fn value_at(&self, x: T, y: T) -> Complex<T> {
        let n = self.spec.n as isize;
        let dx = self.spec.dx();
        let u = (x + self.spec.extent) / dx - lit(0.5);
        let v = (y + self.spec.extent) / dx - lit(0.5);
        let uf = u.floor();
        let vf = v.floor();
        let iu = match uf.to_isize() {
            Some(i) => i,
            None => return Complex::new(T::zero(), T::zero()),
        };
        let iv = match vf.to_isize() {
            Some(i) => i,
            None => return Complex::new(T::zero(), T::zero()),
        };
        if iu < -3 || iu > n + 2 || iv < -3 || iv > n + 2 {
            return Complex::new(T::zero(), T::zero());
        }
        let iu0 = (iu - 2).clamp(0, n - 6);
        let iv0 = (iv - 2).clamp(0, n - 6);

        let weights = |t: T, i0: isize| -> [T; 6] {
            let mut w = [T::zero(); 6];
            for (k, slot) in w.iter_mut().enumerate() {
                let xk = T::from_isize(i0 + k as isize).unwrap();
                let mut num = T::one();
                let mut den = T::one();
                for m in 0..6 {
                    if m == k {
                        continue;
                    }
                    let xm = T::from_isize(i0 + m as isize).unwrap();
                    num = num * (t - xm);
                    den = den * (xk - xm);
                }
                *slot = num / den;
            }
            w
        };
        let wu = weights(u, iu0);
        let wv = weights(v, iv0);

        let nu = self.spec.n;
        let mut acc = Complex::new(T::zero(), T::zero());
        for (kv, wv_k) in wv.iter().enumerate() {
            let row = (iv0 as usize + kv) * nu;
            let mut row_acc = Complex::new(T::zero(), T::zero());
            for (ku, wu_k) in wu.iter().enumerate() {
                row_acc = row_acc + self.samples[row + iu0 as usize + ku] * Complex::new(*wu_k, T::zero());
            }
            acc = acc + row_acc * Complex::new(*wv_k, T::zero());
        }
        acc
    }

    /// Power per azimuthal Fourier channel, `P_l` for `l = -l_max ..= l_max`.
    ///
    /// The field is resampled on polar rings, each ring is decomposed by a
    /// discrete azimuthal Fourier transform, and `2 pi integral |a_l(r)|^2 r
    /// dr` is accumulated per channel (composite Simpson in `r`; the `r = 0`
    /// node contributes nothing). The channel powers sum to the total power
    /// as `l_max -> inf`.
    pub fn azimuthal_spectrum(&self, l_max: i32) -> Vec<T> {
        let n_l = (2 * l_max + 1) as usize;
        let n_r = self.spec.n & !1; // Simpson needs an even panel count
        let n_theta = 256usize;
        let dr = self.spec.extent / T::from_usize(n_r).unwrap();
        let dtheta = T::TAU() / T::from_usize(n_theta).unwrap();
        // e^{-i l theta_j} per channel, hoisted out of the ring loop
        let twiddles: Vec<Vec<Complex<T>>> = (0..n_l)
            .map(|c| {
                let l = T::from_i32(c as i32 - l_max).unwrap();
                (0..n_theta)
                    .map(|j| Complex::from_polar(T::one(), -l * T::from_usize(j).unwrap() * dtheta))
                    .collect()
            })
            .collect();
        let inv_ntheta = T::one() / T::from_usize(n_theta).unwrap();
        let third = T::one() / lit::<T>(3.0);
        let mut out = vec![T::zero(); n_l];
        let mut ring = vec![Complex::new(T::zero(), T::zero()); n_theta];
        for k in 1..=n_r {
            let r = T::from_usize(k).unwrap() * dr;
            let simpson = if k == n_r {
                T::one()
            } else if k % 2 == 1 {
                lit(4.0)
            } else {
                lit(2.0)
            };
            let weight = simpson * third * dr;
            for (j, slot) in ring.iter_mut().enumerate() {
                let theta = T::from_usize(j).unwrap() * dtheta;
                *slot = self.value_at(r * theta.cos(), r * theta.sin());
            }
            for (slot, tw) in out.iter_mut().zip(&twiddles) {
                let mut a = Complex::new(T::zero(), T::zero());
                for (e, t) in ring.iter().zip(tw) {
                    a = a + *e * *t;
                }
                a = a.scale(inv_ntheta);
                *slot += T::TAU() * a.norm_sqr() * r * weight;
            }
        }
        out
    }
}

fn factorial<T: Real>(k: u32) -> T {
    let mut acc = T::one();
    for i in 2..=k {
        acc = acc * T::from_u32(i).unwrap();
    }
    acc
}

/// Generalized Laguerre polynomial `L_p^alpha(x)` by the three-term
/// recurrence.
fn generalized_laguerre<T: Real>(p: u32, alpha: T, x: T) -> T {
    if p == 0 {
        return T::one();
    }
    let mut prev = T::one();
    let mut cur = T::one() + alpha - x;
    for k in 1..p {
        let kf = T::from_u32(k).unwrap();
        let next = ((lit::<T>(2.0) * kf + T::one() + alpha - x) * cur - (kf + alpha) * prev)
            / (kf + T::one());
        prev = cur;
        cur = next;
    }
    cur
}

/// Normalized Laguerre-Gaussian mode `LG_{l,p}` sampled at the beam waist
/// plane (`z = 0`): unit power, azimuthal factor `e^{i l theta}`.
pub fn lg_mode<T: Real>(mode: &LgSpec<T>, grid: &GridSpec<T>) -> Result<FieldGrid<T>> {
    grid.validate()?;
    let w = mode.waist;
    let la = mode.l.unsigned_abs();
    let alpha = T::from_u32(la).unwrap();
    let lf = T::from_i32(mode.l).unwrap();
    // sqrt(2 p! / (pi (p + |l|)!)) / w
    let norm = (lit::<T>(2.0) * factorial::<T>(mode.p)
        / (T::PI() * factorial::<T>(mode.p + la)))
    .sqrt()
        / w;
    let p = mode.p;
    FieldGrid::from_fn(*grid, move |x, y| {
        let r2 = x * x + y * y;
        let rho2 = lit::<T>(2.0) * r2 / (w * w);
        let radial = norm
            * rho2.sqrt().powi(la as i32)
            * generalized_laguerre(p, alpha, rho2)
            * (-r2 / (w * w)).exp();
        let theta = y.atan2(x);
        Complex::from_polar(T::one(), lf * theta).scale(radial)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    type G = GridSpec<f64>;

    fn grid() -> G {
        G::standard()
    }

    fn lg(l: i32, p: u32) -> FieldGrid<f64> {
        lg_mode(&LgSpec::new(l, p, 1.0), &grid()).unwrap()
    }

    #[test]
    fn resolution_floor_is_enforced() {
        assert!(matches!(
            G::new(64, 6.0, 1.0),
            Err(Error::ResolutionTooCoarse { n: 64, min: 128 })
        ));
    }

    #[test]
    fn fundamental_mode_has_unit_power_and_peaks_on_axis() {
        let f = lg(0, 0);
        assert!((f.power() - 1.0).abs() < 1e-6);
        let center = f.value_at(0.0, 0.0).norm();
        let off = f.value_at(1.0, 0.5).norm();
        assert!(center > off);
        // on-axis amplitude of the unit-power Gaussian is sqrt(2/pi)/w
        assert!((center - (2.0 / std::f64::consts::PI).sqrt()).abs() < 1e-6);
    }

    #[test]
    fn vortex_mode_vanishes_on_axis() {
        let f = lg(1, 0);
        assert!((f.power() - 1.0).abs() < 1e-6);
        assert!(f.value_at(0.0, 0.0).norm() < 1e-9);
    }

    #[test]
    fn lg_modes_are_orthonormal() {
        let a = lg(0, 0);
        let b = lg(1, 0);
        let c = lg(0, 1);
        assert!(a.overlap(&b).unwrap().norm() < 1e-8);
        assert!(a.overlap(&c).unwrap().norm() < 1e-8);
        assert!((a.overlap(&a).unwrap().re - 1.0).abs() < 1e-6);
        assert!((c.overlap(&c).unwrap().re - 1.0).abs() < 1e-6);
        // overlap(f, f) = power(f)
        assert!((b.overlap(&b).unwrap().re - b.power()).abs() < 1e-12);
    }

    #[test]
    fn mask_of_order_zero_is_identity() {
        let f = lg(0, 0);
        let g = f.apply_spp_mask(0, 0.3, -0.2);
        let diff: f64 = f
            .samples()
            .iter()
            .zip(g.samples())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert_eq!(diff, 0.0);
    }

    #[test]
    fn phase_mask_conserves_power() {
        let f = lg(0, 0);
        for (order, dx, dy) in [(1, 0.0, 0.0), (1, 0.5, 0.0), (-2, 0.35, 0.6)] {
            let g = f.apply_spp_mask(order, dx, dy);
            assert!(
                (g.power() - f.power()).abs() < crate::tol::MASK_POWER,
                "order {order} offset ({dx},{dy})"
            );
        }
    }

    #[test]
    fn centered_mask_moves_all_power_to_the_next_channel() {
        let f = lg(0, 0);
        let masked = f.apply_spp_mask(1, 0.0, 0.0);
        let spectrum = masked.azimuthal_spectrum(3);
        // channels are l = -3 ..= 3, index 4 is l = +1
        assert!((spectrum[4] - 1.0).abs() < 1e-6);
        for (i, p) in spectrum.iter().enumerate() {
            if i != 4 {
                assert!(*p < 1e-8, "channel {} holds {}", i as i32 - 3, p);
            }
        }
    }

    #[test]
    fn pure_modes_occupy_a_single_channel() {
        let f = lg(1, 0);
        let spectrum = f.azimuthal_spectrum(3);
        assert!((spectrum[4] - 1.0).abs() < 1e-6);
        assert!(spectrum[3] < 1e-8 && spectrum[5] < 1e-8);

        let g = lg(0, 0);
        let spectrum = g.azimuthal_spectrum(3);
        assert!((spectrum[3] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn masked_gaussian_projects_onto_the_vortex_mode_as_sqrt_pi_over_two() {
        // <LG_{1,0} | e^{i theta} LG_{0,0}> = sqrt(pi)/2; the squared overlap
        // pi/4 < 1 is the radial-profile mismatch of a masked Gaussian.
        let masked = lg(0, 0).apply_spp_mask(1, 0.0, 0.0);
        let got = lg(1, 0).overlap(&masked).unwrap();
        let want = std::f64::consts::PI.sqrt() / 2.0;
        assert!((got.norm() - want).abs() < 1e-6, "got {}", got.norm());
        assert!(
            (got.norm_sqr() - std::f64::consts::FRAC_PI_4).abs() < 1e-6,
            "squared {}",
            got.norm_sqr()
        );
    }

    #[test]
    fn half_waist_shifted_mask_yields_a_dominant_equal_pair() {
        let masked = lg(0, 0).apply_spp_mask(1, 0.5, 0.0);
        let spectrum = masked.azimuthal_spectrum(3);
        let p0 = spectrum[3];
        let p1 = spectrum[4];
        assert!(p0 + p1 > 0.8, "dominant pair holds {}", p0 + p1);
        for (i, p) in spectrum.iter().enumerate() {
            let l = i as i32 - 3;
            if l != 0 && l != 1 {
                assert!(*p < p0.min(p1), "channel {l} not subdominant: {p}");
            }
        }
    }

    #[test]
    fn overlap_geometry_mismatch_is_an_error() {
        let a = lg(0, 0);
        let b = lg_mode(&LgSpec::new(0, 0, 1.0), &G::new(256, 6.0, 1.0).unwrap()).unwrap();
        assert!(a.overlap(&b).is_err());
    }

    #[test]
    fn laguerre_recurrence_matches_closed_forms() {
        // L_1^a(x) = 1 + a - x; L_2^0(x) = 1 - 2x + x^2/2
        assert!((generalized_laguerre(1, 0.5f64, 2.0) - (-0.5)).abs() < 1e-14);
        let x: f64 = 1.3;
        let want = 1.0 - 2.0 * x + x * x / 2.0;
        assert!((generalized_laguerre(2, 0.0, x) - want).abs() < 1e-14);
    }
}
