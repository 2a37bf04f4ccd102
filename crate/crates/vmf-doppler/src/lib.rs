//! Doppler spectra of mobile radio channels with von Mises-Fisher
//! distributed scatterers.
//!
//! The crate evaluates the closed-form Doppler power spectrum of a
//! Rayleigh fading channel whose directions of arrival follow a von
//! Mises-Fisher (vMF) distribution on the unit sphere, validates it by
//! Monte Carlo sampling of the scattering distribution, and synthesizes
//! sum-of-sinusoids channel traces whose spectra conform to the analytic
//! result.
//!
//! * [`mathkit`] — scaled Bessel `I0`, stable `ln sinh`, adaptive quadrature
//! * [`geometry`] — directions on the unit sphere, Doppler shifts
//! * [`vmf`] — the scattering distribution: density and exact sampling
//! * [`doppler`] — the closed-form Doppler PDF/CDF and its limits
//! * [`validate`] — Monte Carlo histograms and goodness-of-fit scoring
//! * [`fading`] — trace synthesis, Welch PSD, autocorrelation
//! * [`rng`] — counter-based deterministic random streams
//!
//! The analytic core is generic over the scalar type through [`Real`]
//! (`f32` or `f64`); every generic type defaults to `f64`, which is what
//! the simulation layers use throughout.

pub mod doppler;
pub mod fading;
pub mod geometry;
pub mod mathkit;
pub mod rng;
pub mod validate;
pub mod vmf;

mod error;

pub use error::{Error, Result};
pub use num_complex::Complex64;

use num_traits::{Float, FloatConst, FromPrimitive};

/// Scalar type of the analytic core: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + core::fmt::Debug + Send + Sync + 'static
{
}
impl<T> Real for T where
    T: Float + FloatConst + FromPrimitive + core::fmt::Debug + Send + Sync + 'static
{
}

/// Complex sample type used by the fading simulator.
pub type IqSample = Complex64;
