//! The von Mises-Fisher scattering distribution on the unit sphere:
//! density evaluation, mean direction, and exact inverse-CDF sampling.

use crate::geometry::{AngleDir, UnitVec3};
use crate::mathkit;
use crate::rng::CounterStream;
use crate::{Error, Real, Result};
use rayon::prelude::*;

/// Stream tag for DOA draws.
pub(crate) const STREAM_DOA: u64 = 0x0d0a;

/// vMF parameters: mean direction of scattering and concentration kappa.
/// `kappa = 0` is the uniform distribution over the sphere; growing kappa
/// concentrates the mass around the mean direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VmfParams<T = f64> {
    mean: AngleDir<T>,
    kappa: T,
}

impl<T: Real> VmfParams<T> {
    pub fn new(mean_azimuth: T, mean_elevation: T, kappa: T) -> Result<Self> {
        if !kappa.is_finite() || kappa < T::zero() {
            return Err(Error::Domain(format!(
                "VmfParams: kappa must be finite and >= 0, got {kappa:?}"
            )));
        }
        Ok(VmfParams {
            mean: AngleDir::new(mean_azimuth, mean_elevation)?,
            kappa,
        })
    }

    pub fn kappa(&self) -> T {
        self.kappa
    }

    pub fn mean(&self) -> AngleDir<T> {
        self.mean
    }

    /// Mean DOA as a unit vector.
    pub fn mean_doa(&self) -> UnitVec3<T> {
        self.mean.to_unit_vector()
    }

    /// Joint density in (azimuth, elevation), including the cos(elevation)
    /// area factor, so it integrates to one over `|az| <= pi`,
    /// `|el| <= pi/2`. Evaluated in the log domain and exponentiated.
    pub fn pdf(&self, d: AngleDir<T>) -> T {
        let four_pi = T::from_f64(4.0).unwrap() * T::PI();
        let cos_el = d.elevation().cos();
        if self.kappa == T::zero() {
            return cos_el / four_pi;
        }
        let dot = self.mean.elevation().cos() * cos_el * (d.azimuth() - self.mean.azimuth()).cos()
            + self.mean.elevation().sin() * d.elevation().sin();
        (self.kappa.ln() - mathkit::log_sinh_unchecked(self.kappa) - four_pi.ln()
            + self.kappa * dot
            + cos_el.ln())
        .exp()
    }

    /// `n` i.i.d. DOA draws, fully determined by `(self, n, seed)`.
    ///
    /// The cosine of the angle to the mean is drawn by the closed-form
    /// inverse CDF of the marginal density proportional to `e^{kappa t}`
    /// on [-1, 1], the tangential angle uniformly, and the pole frame is
    /// rotated onto the mean direction. Draw `i` consumes exactly the
    /// stream values at indices `2i` and `2i + 1`, so any partition of
    /// the index range produces the same sequence.
    pub fn sample(&self, n: usize, seed: u64) -> Vec<UnitVec3<T>> {
        let stream = CounterStream::new(seed, STREAM_DOA);
        let kappa = self.kappa.to_f64().unwrap();
        let mean = self.mean_doa();
        let mean = (
            mean.x().to_f64().unwrap(),
            mean.y().to_f64().unwrap(),
            mean.z().to_f64().unwrap(),
        );
        (0..n)
            .into_par_iter()
            .map(|i| {
                let u_cos = stream.unit_f64_at(2 * i as u64);
                let u_ang = stream.unit_f64_at(2 * i as u64 + 1);
                let (x, y, z) = sample_one(kappa, mean, u_cos, u_ang);
                UnitVec3::new_unchecked(
                    T::from_f64(x).unwrap(),
                    T::from_f64(y).unwrap(),
                    T::from_f64(z).unwrap(),
                )
            })
            .collect()
    }
}

/// One draw in the f64 working precision.
fn sample_one(kappa: f64, mean: (f64, f64, f64), u_cos: f64, u_ang: f64) -> (f64, f64, f64) {
    // kappa = 0 must bypass the inverse CDF (0/0 there): uniform sphere
    let t = if kappa == 0.0 {
        2.0 * u_cos - 1.0
    } else {
        1.0 + (u_cos + (1.0 - u_cos) * (-2.0 * kappa).exp()).ln() / kappa
    };
    let t = t.clamp(-1.0, 1.0);
    let s = (1.0 - t * t).sqrt();
    let ang = core::f64::consts::TAU * u_ang;
    let p = (s * ang.cos(), s * ang.sin(), t);
    let (x, y, z) = rotate_pole_to(mean, p);
    let norm = (x * x + y * y + z * z).sqrt();
    (x / norm, y / norm, z / norm)
}

/// Rodrigues rotation taking the north pole (0, 0, 1) onto `m`, applied
/// to `p`. The antipodal case is handled by sampling around `-m` and
/// negating, which keeps the rotation axis well conditioned.
fn rotate_pole_to(m: (f64, f64, f64), p: (f64, f64, f64)) -> (f64, f64, f64) {
    let (mx, my, mz) = m;
    if mz <= -1.0 + 1e-9 {
        let q = rotate_pole_to((-mx, -my, -mz), p);
        return (-q.0, -q.1, -q.2);
    }
    // R p = c p + w x p + w (w . p) / (1 + c), with w = z x m, c = m_z
    let c = mz;
    let (wx, wy) = (-my, mx);
    let k = (wx * p.0 + wy * p.1) / (1.0 + c);
    (
        c * p.0 + wy * p.2 + wx * k,
        c * p.1 - wx * p.2 + wy * k,
        c * p.2 + (wx * p.1 - wy * p.0),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mathkit::{integrate, QuadratureSpec};
    use core::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn dir(az: f64, el: f64) -> AngleDir {
        AngleDir::new(az, el).unwrap()
    }

    #[test]
    fn params_validation() {
        assert!(VmfParams::new(0.0, 0.0, -1.0).is_err());
        assert!(VmfParams::new(0.0, 0.0, f64::INFINITY).is_err());
        assert!(VmfParams::new(4.0, 0.0, 1.0).is_err());
        assert!(VmfParams::new(0.0, 0.0, 0.0).is_ok());
    }

    #[test]
    fn pdf_reference_values() {
        // isotropic at zero elevation: 1 / (4 pi)
        let iso = VmfParams::new(0.3, 0.1, 0.0).unwrap();
        let got = iso.pdf(dir(-2.0, 0.0));
        assert!((got - 0.07957747154594767).abs() < 1e-16, "{got}");

        // kappa = 10 at the mean direction (zero mean elevation):
        // 10 e^10 / (4 pi sinh 10)
        let p = VmfParams::new(0.7, 0.0, 10.0).unwrap();
        let got = p.pdf(dir(0.7, 0.0));
        let want = 1.5915494341993812;
        assert!(((got - want) / want).abs() < 1e-13, "{got}");

        // the cos(elevation) factor kills the density at the poles
        let got = p.pdf(dir(0.0, FRAC_PI_2));
        assert!(got < 1e-14, "{got}");
        // and scales it in between
        let got = p.pdf(dir(0.7, 1.0e-9));
        assert!(((got - want) / want).abs() < 1e-8);
    }

    #[test]
    fn mean_doa_known_directions() {
        let v = VmfParams::new(0.0, 0.0, 1.0).unwrap().mean_doa();
        assert_eq!((v.x(), v.y(), v.z()), (1.0, 0.0, 0.0));
        let v = VmfParams::new(FRAC_PI_2, 0.0, 1.0).unwrap().mean_doa();
        assert!((v.y() - 1.0).abs() < 1e-15);
        let v = VmfParams::new(0.0, FRAC_PI_2, 1.0).unwrap().mean_doa();
        assert!((v.z() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn pdf_normalizes_over_the_sphere() {
        // nested adaptive quadrature of the joint (az, el) density
        let spec = QuadratureSpec::new(1e-11, 1e-11, 1_000_000).unwrap();
        for &kappa in &[0.0, 1.0, 10.0, 100.0] {
            let p = VmfParams::new(1.1, 0.4, kappa).unwrap();
            let density = |az: f64, el: f64| {
                // fold the quadrature's closed -pi endpoint onto +pi
                let az = if az <= -PI {
                    az + core::f64::consts::TAU
                } else {
                    az
                };
                p.pdf(dir(az, el))
            };
            let mass = integrate(
                |el: f64| integrate(|az: f64| density(az, el), -PI, PI, &spec).unwrap(),
                -FRAC_PI_2,
                FRAC_PI_2,
                &spec,
            )
            .unwrap();
            assert!((mass - 1.0).abs() <= 1e-8, "kappa={kappa}: {mass}");
        }
    }

    #[test]
    fn pdf_is_rotationally_symmetric_about_the_mean() {
        // pdf / cos(el) must depend on the direction only through its dot
        // product with the mean DOA: rotate a direction about the mean
        // axis and compare
        let p = VmfParams::new(0.9, -0.3, 7.5).unwrap();
        let mean = p.mean_doa();
        let axis = (mean.x(), mean.y(), mean.z());
        let d0 = dir(2.2, 0.8);
        let v0 = d0.to_unit_vector();
        let base = p.pdf(d0) / d0.elevation().cos();
        for step in 1..12 {
            let angle = step as f64 * 0.5;
            let (c, s) = (angle.cos(), angle.sin());
            let v = (v0.x(), v0.y(), v0.z());
            let dot = axis.0 * v.0 + axis.1 * v.1 + axis.2 * v.2;
            let cross = (
                axis.1 * v.2 - axis.2 * v.1,
                axis.2 * v.0 - axis.0 * v.2,
                axis.0 * v.1 - axis.1 * v.0,
            );
            let r = UnitVec3::new(
                v.0 * c + cross.0 * s + axis.0 * dot * (1.0 - c),
                v.1 * c + cross.1 * s + axis.1 * dot * (1.0 - c),
                v.2 * c + cross.2 * s + axis.2 * dot * (1.0 - c),
            )
            .unwrap();
            let d = r.to_angles();
            let got = p.pdf(d) / d.elevation().cos();
            assert!(
                ((got - base) / base).abs() <= 1e-12,
                "angle {angle}: {got} vs {base}"
            );
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let p = VmfParams::new(0.5, 0.2, 3.0).unwrap();
        let a = p.sample(1000, 77);
        let b = p.sample(1000, 77);
        assert_eq!(a, b);
        let c = p.sample(1000, 78);
        assert_ne!(a, c);
    }

    #[test]
    fn isotropic_samples_have_small_resultant() {
        let p: VmfParams = VmfParams::new(0.0, 0.0, 0.0).unwrap();
        let draws = p.sample(100_000, 11);
        let n = draws.len() as f64;
        let (mut sx, mut sy, mut sz) = (0.0, 0.0, 0.0);
        for v in &draws {
            sx += v.x();
            sy += v.y();
            sz += v.z();
        }
        let resultant = (sx * sx + sy * sy + sz * sz).sqrt() / n;
        assert!(resultant <= 0.02, "resultant {resultant}");
    }

    #[test]
    fn concentrated_samples_match_the_mean_cosine() {
        // E[draw . mean] for kappa = 10, via quadrature of
        // t * kappa e^{kappa t} / (2 sinh kappa) on [-1, 1]
        let kappa = 10.0f64;
        let spec = QuadratureSpec::default();
        let norm = kappa / (2.0 * kappa.sinh());
        let expected = integrate(|t: f64| t * norm * (kappa * t).exp(), -1.0, 1.0, &spec).unwrap();
        // cross-check against the closed form coth(k) - 1/k
        assert!((expected - 0.9000000041223073).abs() < 1e-10);

        let p = VmfParams::new(-1.2, 0.4, kappa).unwrap();
        let mean = p.mean_doa();
        let draws = p.sample(100_000, 5);
        let avg: f64 = draws.iter().map(|v| v.dot(mean)).sum::<f64>() / draws.len() as f64;
        assert!((avg - expected).abs() <= 0.005, "avg {avg} vs {expected}");
    }

    #[test]
    fn antipodal_mean_direction_is_handled() {
        // mean at the south pole exercises the negation path
        let p = VmfParams::new(0.0, -FRAC_PI_2, 10.0).unwrap();
        let mean = p.mean_doa();
        let draws = p.sample(50_000, 3);
        let avg: f64 = draws.iter().map(|v| v.dot(mean)).sum::<f64>() / draws.len() as f64;
        assert!((avg - 0.9).abs() <= 0.01, "avg {avg}");
        // near-antipodal too
        let p = VmfParams::new(0.0, -FRAC_PI_2 + 1e-6, 10.0).unwrap();
        let mean = p.mean_doa();
        let draws = p.sample(50_000, 4);
        let avg: f64 = draws.iter().map(|v| v.dot(mean)).sum::<f64>() / draws.len() as f64;
        assert!((avg - 0.9).abs() <= 0.01, "avg {avg}");
    }

    #[test]
    fn extreme_concentration_collapses_to_the_mean() {
        let p = VmfParams::new(FRAC_PI_4, 0.3, 1e9).unwrap();
        let mean = p.mean_doa();
        for v in p.sample(100, 9) {
            assert!(v.dot(mean) > 1.0 - 1e-6);
        }
    }
}
