//! Directions on the unit sphere and per-path Doppler shifts.
//!
//! Angles are radians everywhere inside the library; degrees exist only
//! at the CLI boundary.

use crate::{Error, Real, Result};

/// A direction as an (azimuth, elevation) pair in radians, with azimuth
/// in `(-pi, pi]` and elevation in `[-pi/2, pi/2]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleDir<T = f64> {
    azimuth: T,
    elevation: T,
}

impl<T: Real> AngleDir<T> {
    pub fn new(azimuth: T, elevation: T) -> Result<Self> {
        let in_range = azimuth.is_finite()
            && elevation.is_finite()
            && azimuth > -T::PI()
            && azimuth <= T::PI()
            && elevation.abs() <= T::FRAC_PI_2();
        if !in_range {
            return Err(Error::Domain(format!(
                "AngleDir: azimuth must lie in (-pi, pi] and elevation in [-pi/2, pi/2], \
                 got ({azimuth:?}, {elevation:?})"
            )));
        }
        Ok(AngleDir { azimuth, elevation })
    }

    pub fn azimuth(&self) -> T {
        self.azimuth
    }

    pub fn elevation(&self) -> T {
        self.elevation
    }

    /// Cartesian unit vector `(cos az cos el, sin az cos el, sin el)`.
    pub fn to_unit_vector(&self) -> UnitVec3<T> {
        let (sa, ca) = (self.azimuth.sin(), self.azimuth.cos());
        let (se, ce) = (self.elevation.sin(), self.elevation.cos());
        UnitVec3 {
            x: ca * ce,
            y: sa * ce,
            z: se,
        }
    }
}

/// A unit vector in R^3; the constructor keeps the norm within machine
/// rounding of one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitVec3<T = f64> {
    x: T,
    y: T,
    z: T,
}

impl<T: Real> UnitVec3<T> {
    /// Accepts vectors within 1e-9 of unit norm (a little wider for f32)
    /// and renormalizes, so the stored components are unit to rounding.
    pub fn new(x: T, y: T, z: T) -> Result<Self> {
        let norm = (x * x + y * y + z * z).sqrt();
        let tol = T::from_f64(1e-9)
            .unwrap()
            .max(T::epsilon() * T::from_f64(16.0).unwrap());
        if !norm.is_finite() || (norm - T::one()).abs() > tol {
            return Err(Error::Domain(format!(
                "UnitVec3: ({x:?}, {y:?}, {z:?}) has norm {norm:?}, expected 1"
            )));
        }
        Ok(UnitVec3 {
            x: x / norm,
            y: y / norm,
            z: z / norm,
        })
    }

    /// For internal construction of vectors that are unit by construction.
    pub(crate) fn new_unchecked(x: T, y: T, z: T) -> Self {
        UnitVec3 { x, y, z }
    }

    pub fn x(&self) -> T {
        self.x
    }

    pub fn y(&self) -> T {
        self.y
    }

    pub fn z(&self) -> T {
        self.z
    }

    pub fn dot(&self, other: UnitVec3<T>) -> T {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    /// Inverse of [`AngleDir::to_unit_vector`]; the azimuth of the poles
    /// is 0 by convention.
    pub fn to_angles(&self) -> AngleDir<T> {
        let elevation = self.z.max(-T::one()).min(T::one()).asin();
        let mut azimuth = if self.x == T::zero() && self.y == T::zero() {
            T::zero()
        } else {
            self.y.atan2(self.x)
        };
        // atan2 covers [-pi, pi]; fold the open end onto +pi
        if azimuth == -T::PI() {
            azimuth = T::PI();
        }
        AngleDir { azimuth, elevation }
    }
}

impl<T: Real> core::ops::Neg for UnitVec3<T> {
    type Output = UnitVec3<T>;

    fn neg(self) -> UnitVec3<T> {
        UnitVec3 {
            x: -self.x,
            y: -self.y,
            z: -self.z,
        }
    }
}

/// Linear motion of the mobile antenna: speed, direction and carrier
/// wavelength. The maximum Doppler shift is `speed / wavelength`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotionSpec<T = f64> {
    speed: T,
    direction: UnitVec3<T>,
    wavelength: T,
}

impl<T: Real> MotionSpec<T> {
    pub fn new(speed: T, direction: UnitVec3<T>, wavelength: T) -> Result<Self> {
        if !speed.is_finite() || speed < T::zero() {
            return Err(Error::Domain(format!(
                "MotionSpec: speed must be finite and >= 0, got {speed:?}"
            )));
        }
        if !wavelength.is_finite() || wavelength <= T::zero() {
            return Err(Error::Domain(format!(
                "MotionSpec: wavelength must be finite and > 0, got {wavelength:?}"
            )));
        }
        Ok(MotionSpec {
            speed,
            direction,
            wavelength,
        })
    }

    pub fn speed(&self) -> T {
        self.speed
    }

    pub fn direction(&self) -> UnitVec3<T> {
        self.direction
    }

    pub fn wavelength(&self) -> T {
        self.wavelength
    }

    /// Maximum Doppler shift `f_m = speed / wavelength`, in Hz.
    pub fn max_doppler(&self) -> T {
        self.speed / self.wavelength
    }

    /// Doppler shift of a path arriving from `doa`:
    /// `(speed / wavelength) * (doa . direction)`, confined to
    /// `[-f_m, f_m]` against rounding of the dot product.
    pub fn doppler_shift(&self, doa: UnitVec3<T>) -> T {
        let dot = doa.dot(self.direction).max(-T::one()).min(T::one());
        self.max_doppler() * dot
    }

    /// Cosine of the angle between the mean DOA and the motion direction,
    /// clamped to `[-1, 1]`. Undefined for a stationary antenna.
    pub fn cos_beta(&self, mean_doa: UnitVec3<T>) -> Result<T> {
        if self.speed == T::zero() {
            return Err(Error::Domain(
                "cos_beta: motion direction undefined at speed 0; \
                 the Doppler spectrum degenerates to a point mass at 0 Hz"
                    .into(),
            ));
        }
        Ok(mean_doa.dot(self.direction).max(-T::one()).min(T::one()))
    }
}
