//! The closed-form Doppler frequency density for vMF scattering, its
//! CDF, the finite endpoint values, and the isotropic/deterministic
//! limiting cases.
//!
//! Normalized to unit power, the Doppler power spectral density equals
//! the probability density of the per-path Doppler shift. For a vMF
//! scattering distribution that density depends on the geometry only
//! through `cos beta`, the cosine of the angle between the mean DOA and
//! the motion direction:
//!
//! ```text
//! p(f) = 1/(2 f_m) * kappa/sinh(kappa)
//!        * exp(b f/f_m) * I0(a sqrt(1 - (f/f_m)^2)),   |f| <= f_m
//! a = kappa sqrt(1 - cos^2 beta),   b = kappa cos beta
//! ```
//!
//! Everything is evaluated in the log domain: `exp(b f/f_m)` and
//! `1/sinh(kappa)` each overflow on their own near `kappa ~ 700`, while
//! their combination stays modest for any concentration.

use crate::geometry::MotionSpec;
use crate::mathkit::{self, QuadratureSpec};
use crate::vmf::VmfParams;
use crate::{Error, Real, Result};

/// Which edge of the Doppler support `[-f_max, +f_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Edge {
    Lower,
    Upper,
}

/// Parameters of the Doppler spectrum: concentration `kappa`, `cos beta`
/// (mean DOA against motion direction, clamped to `[-1, 1]`) and the
/// maximum Doppler shift `f_max` in Hz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DopplerParams<T = f64> {
    kappa: T,
    cos_beta: T,
    f_max: T,
}

impl<T: Real> DopplerParams<T> {
    pub fn new(kappa: T, cos_beta: T, f_max: T) -> Result<Self> {
        if !kappa.is_finite() || kappa < T::zero() {
            return Err(Error::Domain(format!(
                "DopplerParams: kappa must be finite and >= 0, got {kappa:?}"
            )));
        }
        if !cos_beta.is_finite() {
            return Err(Error::Domain(
                "DopplerParams: cos_beta must be finite".into(),
            ));
        }
        if !f_max.is_finite() || f_max <= T::zero() {
            return Err(Error::Domain(format!(
                "DopplerParams: f_max must be finite and > 0, got {f_max:?}"
            )));
        }
        Ok(DopplerParams {
            kappa,
            cos_beta: cos_beta.max(-T::one()).min(T::one()),
            f_max,
        })
    }

    /// Derive the spectrum parameters from a scattering distribution and
    /// a motion specification.
    pub fn from_geometry(scatter: &VmfParams<T>, motion: &MotionSpec<T>) -> Result<Self> {
        let cos_beta = motion.cos_beta(scatter.mean_doa())?;
        DopplerParams::new(scatter.kappa(), cos_beta, motion.max_doppler())
    }

    pub fn kappa(&self) -> T {
        self.kappa
    }

    pub fn cos_beta(&self) -> T {
        self.cos_beta
    }

    pub fn f_max(&self) -> T {
        self.f_max
    }

    /// `kappa sqrt(1 - cos^2 beta)`: concentration component
    /// perpendicular to the motion direction.
    pub fn a(&self) -> T {
        self.kappa
            * (T::one() - self.cos_beta * self.cos_beta)
                .max(T::zero())
                .sqrt()
    }

    /// `kappa cos beta`: concentration component parallel to the motion
    /// direction.
    pub fn b(&self) -> T {
        self.kappa * self.cos_beta
    }

    /// Doppler density at `f` in 1/Hz; zero outside `[-f_max, f_max]`,
    /// the flat `1/(2 f_max)` for isotropic scattering.
    pub fn pdf(&self, f: T) -> T {
        if f.abs() > self.f_max {
            return T::zero();
        }
        if self.kappa == T::zero() {
            return ((T::one() + T::one()) * self.f_max).recip();
        }
        self.log_pdf_unchecked(f).exp()
    }

    /// Natural log of the density; requires `kappa > 0` and
    /// `|f| <= f_max`. Finite for concentrations up to at least 1e5.
    pub fn log_pdf(&self, f: T) -> Result<T> {
        if self.kappa == T::zero() {
            return Err(Error::Domain(
                "log_pdf: isotropic case (kappa = 0) is handled by pdf".into(),
            ));
        }
        if f.abs() > self.f_max {
            return Err(Error::Domain(format!(
                "log_pdf: frequency {f:?} outside the support"
            )));
        }
        Ok(self.log_pdf_unchecked(f))
    }

    fn log_pdf_unchecked(&self, f: T) -> T {
        let two = T::one() + T::one();
        let u = f / self.f_max;
        let z = self.a() * (T::one() - u * u).max(T::zero()).sqrt();
        self.kappa.ln() - mathkit::log_sinh_unchecked(self.kappa) - (two * self.f_max).ln()
            + self.b() * u
            + z
            + mathkit::i0e(z).ln()
    }

    /// The finite density limit at `f = -f_max` or `+f_max`:
    /// `1/(2 f_max) * kappa/sinh(kappa) * e^{+-kappa cos beta}`.
    /// Continuously extended to `1/(2 f_max)` at `kappa = 0`.
    pub fn endpoint_density(&self, edge: Edge) -> T {
        let two = T::one() + T::one();
        if self.kappa == T::zero() {
            return (two * self.f_max).recip();
        }
        let signed_b = match edge {
            Edge::Upper => self.b(),
            Edge::Lower => -self.b(),
        };
        (self.kappa.ln() - mathkit::log_sinh_unchecked(self.kappa) - (two * self.f_max).ln()
            + signed_b)
            .exp()
    }

    /// Distribution function of the Doppler shift, by adaptive quadrature
    /// of the elevation-marginal integrand from `-pi/2` up to
    /// `asin(f / f_max)`. This route never touches the closed-form
    /// density, so it double-checks it independently.
    pub fn cdf(&self, f: T, spec: &QuadratureSpec<T>) -> Result<T> {
        let one = T::one();
        let two = one + one;
        if f < -self.f_max {
            return Ok(T::zero());
        }
        if f > self.f_max {
            return Ok(one);
        }
        let u = (f / self.f_max).max(-one).min(one);
        if self.kappa == T::zero() {
            return Ok((u + one) / two);
        }
        let psi_star = u.asin();
        let a = self.a();
        let b = self.b();
        let ln_prefactor = self.kappa.ln() - mathkit::log_sinh_unchecked(self.kappa) - T::LN_2();
        let integrand = move |psi: T| {
            let c = psi.cos();
            let z = a * c;
            (ln_prefactor + b * psi.sin() + z + mathkit::i0e(z).ln()).exp() * c
        };
        let raw = mathkit::integrate(integrand, -T::FRAC_PI_2(), psi_star, spec)?;
        Ok(raw.max(T::zero()).min(one))
    }

    /// Sampled density over an evenly spaced `n_points` grid spanning
    /// `[-f_max, f_max]` inclusive; the grid is mirror-symmetric and the
    /// end points carry the closed-form endpoint values.
    pub fn spectrum(&self, n_points: usize) -> Result<DopplerSpectrum<T>> {
        if n_points < 2 {
            return Err(Error::Domain(format!(
                "spectrum: need at least 2 grid points, got {n_points}"
            )));
        }
        let one = T::one();
        let two = one + one;
        let span = T::from_usize(n_points - 1).unwrap();
        let mut frequencies = vec![T::zero(); n_points];
        let mut densities = vec![T::zero(); n_points];
        for i in 0..=(n_points - 1) / 2 {
            let j = n_points - 1 - i;
            let u = two * T::from_usize(i).unwrap() / span - one;
            let f = self.f_max * u;
            frequencies[i] = f;
            densities[i] = self.pdf(f);
            if j != i {
                frequencies[j] = -f;
                densities[j] = self.pdf(-f);
            }
        }
        densities[0] = self.endpoint_density(Edge::Lower);
        densities[n_points - 1] = self.endpoint_density(Edge::Upper);
        Ok(DopplerSpectrum {
            frequencies,
            densities,
            params: *self,
        })
    }

    /// Location `f_max cos beta` of the unit impulse that the spectrum
    /// collapses to as `kappa -> inf` (deterministic scattering). This is
    /// the limit of the distribution, not a density value.
    pub fn deterministic_limit(&self) -> T {
        self.f_max * self.cos_beta
    }
}

/// The analytic density tabulated on a frequency grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DopplerSpectrum<T = f64> {
    pub frequencies: Vec<T>,
    pub densities: Vec<T>,
    pub params: DopplerParams<T>,
}

impl<T: Real> DopplerSpectrum<T> {
    /// Trapezoidal mass of the tabulated density; approaches one as the
    /// grid refines.
    pub fn trapezoidal_mass(&self) -> T {
        let two = T::one() + T::one();
        let mut acc = T::zero();
        for i in 1..self.frequencies.len() {
            let width = self.frequencies[i] - self.frequencies[i - 1];
            acc = acc + width * (self.densities[i] + self.densities[i - 1]) / two;
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn params(kappa: f64, cos_beta: f64, f_max: f64) -> DopplerParams {
        DopplerParams::new(kappa, cos_beta, f_max).unwrap()
    }

    fn rel_err(got: f64, want: f64) -> f64 {
        ((got - want) / want).abs()
    }

    #[test]
    fn construction_validates_and_clamps() {
        assert!(DopplerParams::new(-1.0, 0.0, 100.0).is_err());
        assert!(DopplerParams::new(f64::INFINITY, 0.0, 100.0).is_err());
        assert!(DopplerParams::new(1.0, f64::NAN, 100.0).is_err());
        assert!(DopplerParams::new(1.0, 0.0, 0.0).is_err());
        let p = params(1.0, 1.0 + 1e-14, 100.0);
        assert_eq!(p.cos_beta(), 1.0);
    }

    #[test]
    fn pdf_reference_values() {
        // isotropic: flat 1/(2 f_max) on the support, zero outside
        let iso = params(0.0, 0.3, 100.0);
        assert_eq!(iso.pdf(37.0), 0.005);
        assert_eq!(iso.pdf(-100.0), 0.005);
        assert_eq!(iso.pdf(100.1), 0.0);

        // kappa = 10 perpendicular, at the support edge:
        // (1/200) * 10 / sinh(10)
        let p = params(10.0, 0.0, 100.0);
        let want = 4.539992985606108e-6;
        assert!(rel_err(p.pdf(100.0), want) <= 1e-12);

        // kappa = 5 parallel, at f = 0: (1/200) * 5 / sinh(5)
        let p = params(5.0, 1.0, 100.0);
        let want = 3.3691264576472715e-4;
        assert!(rel_err(p.pdf(0.0), want) <= 1e-12);
    }

    #[test]
    fn log_pdf_reference_values_and_domain() {
        let p = params(10.0, 0.0, 100.0);
        let got = p.log_pdf(100.0).unwrap();
        assert!((got - (-12.302585090932892)).abs() <= 1e-11, "{got}");
        assert!(rel_err(p.log_pdf(50.0).unwrap().exp(), p.pdf(50.0)) <= 1e-13);

        // stays finite at extreme concentration
        let p = params(1000.0, 0.0, 100.0);
        let got = p.log_pdf(0.0).unwrap();
        assert!(rel_err(got, -2.0701060171364896) <= 1e-12, "{got}");
        let p = params(1e5, 0.4, 100.0);
        assert!(p.log_pdf(0.0).unwrap().is_finite());
        assert!(p.log_pdf(100.0).unwrap().is_finite());
        assert!(p.pdf(0.0).is_finite());

        // domain errors
        assert!(params(0.0, 0.0, 100.0).log_pdf(0.0).is_err());
        assert!(params(1.0, 0.0, 100.0).log_pdf(100.5).is_err());
    }

    #[test]
    fn log_pdf_is_affine_for_parallel_motion() {
        // cos beta = 1 makes the Bessel term vanish: slope kappa / f_max
        let p = params(10.0, 1.0, 100.0);
        let at0 = p.log_pdf(0.0).unwrap();
        for i in -10..=10 {
            let f = 10.0 * i as f64;
            let got = p.log_pdf(f).unwrap();
            assert!((got - (at0 + 10.0 * f / 100.0)).abs() <= 1e-12);
        }
    }

    #[test]
    fn endpoint_density_reference_values() {
        let p = params(10.0, 0.0, 100.0);
        let want = 4.539992985606108e-6;
        assert!(rel_err(p.endpoint_density(Edge::Upper), want) <= 1e-12);
        assert!(rel_err(p.endpoint_density(Edge::Lower), want) <= 1e-12);

        // parallel motion: the two edges differ by e^{2 kappa}
        let p = params(10.0, 1.0, 100.0);
        let ratio = p.endpoint_density(Edge::Upper) / p.endpoint_density(Edge::Lower);
        assert!(rel_err(ratio, 485165195.4097903) <= 1e-12);

        // continuity towards the isotropic case
        let p = params(1e-12, 0.7, 100.0);
        assert!(rel_err(p.endpoint_density(Edge::Upper), 0.005) <= 1e-9);
        let p = params(0.0, 0.7, 100.0);
        assert_eq!(p.endpoint_density(Edge::Upper), 0.005);
    }

    #[test]
    fn pdf_at_the_edges_equals_the_endpoint_values() {
        for &(kappa, cb) in &[(1.0, 0.0), (10.0, 0.5), (100.0, -1.0), (2.5, 0.9)] {
            let p = params(kappa, cb, 250.0);
            assert_eq!(p.pdf(250.0), p.endpoint_density(Edge::Upper));
            assert_eq!(p.pdf(-250.0), p.endpoint_density(Edge::Lower));
        }
    }

    #[test]
    fn endpoint_continuity_as_f_approaches_the_edge() {
        // the deviation shrinks proportionally to eps; near the edge it
        // scales like (kappa + a^2/2) * eps
        let p = params(1.0, 0.3, 100.0);
        let edge = p.endpoint_density(Edge::Upper);
        let mut eps = 1e-6;
        let mut prev = f64::INFINITY;
        while eps >= 1e-10 {
            let dev = rel_err(p.pdf((1.0 - eps) * 100.0), edge);
            assert!(dev <= prev * 1.01, "eps={eps}: {dev} vs {prev}");
            prev = dev;
            eps /= 10.0;
        }
        assert!(rel_err(p.pdf((1.0 - 1e-10) * 100.0), edge) <= 1e-9);

        for &(kappa, cb) in &[(10.0, 0.0), (100.0, 1.0)] {
            let p = params(kappa, cb, 100.0);
            let scale = kappa + p.a() * p.a() / 2.0;
            for edge_sign in [1.0, -1.0] {
                let e = if edge_sign > 0.0 {
                    p.endpoint_density(Edge::Upper)
                } else {
                    p.endpoint_density(Edge::Lower)
                };
                for &eps in &[1e-6, 1e-8, 1e-10] {
                    let dev = rel_err(p.pdf(edge_sign * (1.0 - eps) * 100.0), e);
                    assert!(
                        dev <= 2.0 * scale * eps + 1e-12,
                        "k={kappa} eps={eps}: {dev}"
                    );
                }
            }
        }
    }

    #[test]
    fn cdf_edges_and_midpoint() {
        let spec = QuadratureSpec::default();
        for &(kappa, cb) in &[(0.0, 0.0), (1.0, 0.5), (10.0, -0.7), (100.0, 1.0)] {
            let p = params(kappa, cb, 100.0);
            assert_eq!(p.cdf(-100.0, &spec).unwrap(), 0.0);
            let top = p.cdf(100.0, &spec).unwrap();
            assert!((top - 1.0).abs() <= 1e-9, "k={kappa}: {top}");
            assert_eq!(p.cdf(-100.01, &spec).unwrap(), 0.0);
            assert_eq!(p.cdf(100.01, &spec).unwrap(), 1.0);
        }
        // even density for perpendicular motion: median at zero
        let p = params(10.0, 0.0, 100.0);
        assert!((p.cdf(0.0, &spec).unwrap() - 0.5).abs() <= 1e-9);
    }

    #[test]
    fn cdf_agrees_with_density_quadrature() {
        // two independent routes: the elevation-space CDF integral vs
        // direct quadrature of the closed-form density over [-f_max, 0]
        let spec = QuadratureSpec::default();
        let p = params(10.0, 1.0, 100.0);
        let via_cdf = p.cdf(0.0, &spec).unwrap();
        assert!(via_cdf > 0.0 && via_cdf < 0.5);
        let via_pdf = mathkit::integrate(|f: f64| p.pdf(f), -100.0, 0.0, &spec).unwrap();
        assert!((via_cdf - via_pdf).abs() <= 1e-8, "{via_cdf} vs {via_pdf}");
    }

    #[test]
    fn spectrum_grids_and_symmetry() {
        let iso = params(0.0, 0.0, 100.0).spectrum(11).unwrap();
        assert_eq!(iso.frequencies[0], -100.0);
        assert_eq!(iso.frequencies[10], 100.0);
        assert_eq!(iso.frequencies[5], 0.0);
        assert!(iso.densities.iter().all(|&d| d == 0.005));

        // b = 0 makes the tabulated density exactly even
        let s = params(10.0, 0.0, 100.0).spectrum(1001).unwrap();
        for i in 0..1001 {
            assert_eq!(s.densities[i], s.densities[1000 - i]);
            assert_eq!(s.frequencies[i], -s.frequencies[1000 - i]);
        }

        // endpoints carry the closed-form limit
        let p = params(7.0, 0.4, 100.0);
        let s = p.spectrum(2).unwrap();
        assert_eq!(s.densities[0], p.endpoint_density(Edge::Lower));
        assert_eq!(s.densities[1], p.endpoint_density(Edge::Upper));

        assert!(p.spectrum(1).is_err());
    }

    #[test]
    fn spectrum_mass_is_near_one_on_fine_grids() {
        let p = params(10.0, core::f64::consts::FRAC_PI_4.cos(), 100.0);
        let mass = p.spectrum(1001).unwrap().trapezoidal_mass();
        assert!((mass - 1.0).abs() <= 1e-3, "{mass}");
    }

    #[test]
    fn pdf_normalizes_for_a_small_parameter_grid() {
        let spec = QuadratureSpec::new(1e-12, 1e-12, 1_000_000).unwrap();
        for &kappa in &[0.5, 10.0, 200.0] {
            for &cb in &[0.0, core::f64::consts::FRAC_1_SQRT_2, -1.0] {
                let p = params(kappa, cb, 100.0);
                let mass = mathkit::integrate(|f: f64| p.pdf(f), -100.0, 100.0, &spec).unwrap();
                assert!((mass - 1.0).abs() <= 1e-9, "kappa={kappa} cb={cb}: {mass}");
            }
        }
    }

    #[test]
    fn deterministic_limit_location() {
        assert_eq!(params(5.0, 1.0, 300.0).deterministic_limit(), 300.0);
        assert_eq!(params(5.0, 0.0, 300.0).deterministic_limit(), 0.0);
        let cb = (core::f64::consts::PI / 3.0).cos();
        assert_eq!(params(5.0, cb, 300.0).deterministic_limit(), 300.0 * cb);
    }

    proptest! {
        #[test]
        fn reflection_symmetry_is_exact(
            kappa in 0.0f64..500.0,
            cb in -1.0f64..=1.0,
            u in -1.0f64..=1.0,
        ) {
            let p = params(kappa, cb, 100.0);
            let q = params(kappa, -cb, 100.0);
            let f = 100.0 * u;
            prop_assert_eq!(p.pdf(f), q.pdf(-f));
        }

        #[test]
        fn pdf_is_nonnegative_and_supported(
            kappa in 0.0f64..1000.0,
            cb in -1.0f64..=1.0,
            f in -200.0f64..=200.0,
        ) {
            let p = params(kappa, cb, 100.0);
            let d = p.pdf(f);
            if f.abs() > 100.0 {
                prop_assert_eq!(d, 0.0);
            } else {
                prop_assert!(d >= 0.0 && d.is_finite());
            }
        }
    }
}
