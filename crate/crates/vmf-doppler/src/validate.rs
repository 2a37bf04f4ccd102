//! Monte Carlo validation: sample DOAs from the scattering distribution,
//! histogram the resulting Doppler shifts, and score the histogram
//! against the closed-form spectrum.

use crate::doppler::DopplerParams;
use crate::geometry::MotionSpec;
use crate::mathkit::{self, QuadratureSpec};
use crate::vmf::VmfParams;
use crate::{Error, Result};

/// Quadrature accuracy for per-bin analytic masses.
fn bin_mass_spec() -> QuadratureSpec {
    QuadratureSpec::new(1e-12, 1e-12, 1_000_000).unwrap()
}

/// A binned Monte Carlo Doppler histogram, normalized to a density.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalSpectrum {
    /// `n_bins + 1` edges spanning `[-f_max, f_max]`.
    pub bin_edges: Vec<f64>,
    pub counts: Vec<u64>,
    /// `counts / (n_samples * bin_width)`, in 1/Hz.
    pub densities: Vec<f64>,
    pub n_samples: u64,
    pub seed: u64,
}

impl EmpiricalSpectrum {
    pub fn n_bins(&self) -> usize {
        self.counts.len()
    }

    pub fn f_max(&self) -> f64 {
        *self.bin_edges.last().unwrap()
    }

    pub fn bin_width(&self) -> f64 {
        2.0 * self.f_max() / self.n_bins() as f64
    }

    /// Fraction of the samples in each bin.
    pub fn masses(&self) -> Vec<f64> {
        self.counts
            .iter()
            .map(|&c| c as f64 / self.n_samples as f64)
            .collect()
    }
}

/// Sample `n_samples` DOAs, map them to Doppler shifts and histogram the
/// shifts into `n_bins` even bins over `[-f_m, f_m]`. A sample landing
/// exactly on `+f_m` goes to the last bin.
pub fn empirical_spectrum(
    scatter: &VmfParams,
    motion: &MotionSpec,
    n_samples: usize,
    n_bins: usize,
    seed: u64,
) -> Result<EmpiricalSpectrum> {
    if n_samples < 1 || n_bins < 1 {
        return Err(Error::Domain(
            "empirical_spectrum: need at least one sample and one bin".into(),
        ));
    }
    if motion.speed() == 0.0 {
        return Err(Error::Domain(
            "empirical_spectrum: speed must be positive, the Doppler spectrum degenerates at 0"
                .into(),
        ));
    }
    let f_max = motion.max_doppler();
    let width = 2.0 * f_max / n_bins as f64;

    let mut counts = vec![0u64; n_bins];
    for doa in scatter.sample(n_samples, seed) {
        let f = motion.doppler_shift(doa);
        let idx = (((f + f_max) / width) as usize).min(n_bins - 1);
        counts[idx] += 1;
    }

    // mirror-symmetric edges so both ends are exact
    let mut bin_edges = vec![0.0; n_bins + 1];
    for i in 0..=n_bins / 2 {
        let u = 2.0 * i as f64 / n_bins as f64 - 1.0;
        bin_edges[i] = f_max * u;
        if n_bins - i != i {
            bin_edges[n_bins - i] = -f_max * u;
        }
    }
    let densities = counts
        .iter()
        .map(|&c| c as f64 / (n_samples as f64 * width))
        .collect();
    Ok(EmpiricalSpectrum {
        bin_edges,
        counts,
        densities,
        n_samples: n_samples as u64,
        seed,
    })
}

/// Per-bin slice of a comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinComparison {
    pub center_hz: f64,
    pub empirical_density: f64,
    /// Analytic bin mass divided by the bin width (bin-average density,
    /// not a midpoint evaluation).
    pub analytic_density: f64,
}

/// Agreement metrics between an empirical histogram and the analytic
/// spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    /// Half the L1 distance between the two per-bin mass vectors.
    pub total_variation: f64,
    /// Largest per-bin density deviation, in 1/Hz.
    pub max_abs_density_dev: f64,
    /// Pearson statistic against the analytic bin masses.
    pub chi_square: f64,
    pub per_bin: Vec<BinComparison>,
}

/// Score `emp` against the closed form. The analytic mass of every bin
/// is computed by adaptive quadrature of the density over the bin, which
/// matters near the support edges where the density is strongly curved.
pub fn compare(emp: &EmpiricalSpectrum, params: &DopplerParams) -> Result<ComparisonReport> {
    let f_max = emp.f_max();
    if (f_max - params.f_max()).abs() > 1e-9 * params.f_max() {
        return Err(Error::Domain(format!(
            "compare: histogram spans f_max = {} Hz but the spectrum has f_max = {} Hz",
            f_max,
            params.f_max()
        )));
    }
    let spec = bin_mass_spec();
    let n = emp.n_samples as f64;
    let width = emp.bin_width();

    let mut total_variation = 0.0;
    let mut max_abs_density_dev: f64 = 0.0;
    let mut chi_square = 0.0;
    let mut per_bin = Vec::with_capacity(emp.n_bins());
    for (i, &count) in emp.counts.iter().enumerate() {
        let lo = emp.bin_edges[i];
        let hi = emp.bin_edges[i + 1];
        let mass = mathkit::integrate(|f: f64| params.pdf(f), lo, hi, &spec)?;
        let emp_mass = count as f64 / n;

        total_variation += 0.5 * (emp_mass - mass).abs();
        let analytic_density = mass / width;
        let empirical_density = emp.densities[i];
        max_abs_density_dev = max_abs_density_dev.max((empirical_density - analytic_density).abs());
        let expected = n * mass;
        if expected > 0.0 {
            let dev = count as f64 - expected;
            chi_square += dev * dev / expected;
        } else if count > 0 {
            chi_square = f64::INFINITY;
        }
        per_bin.push(BinComparison {
            center_hz: 0.5 * (lo + hi),
            empirical_density,
            analytic_density,
        });
    }
    Ok(ComparisonReport {
        total_variation,
        max_abs_density_dev,
        chi_square,
        per_bin,
    })
}

// --- chi-square distribution support ---------------------------------

/// ln Gamma(x) for x >= 0.5 (Lanczos, g = 7, 9 terms).
fn ln_gamma(x: f64) -> f64 {
    const COEFFS: [f64; 8] = [
        676.5203681218851,
        -1259.1392167224028,
        771.3234287776531,
        -176.6150291621406,
        12.507343278686905,
        -0.13857109526572012,
        9.984369578019572e-6,
        1.5056327351493116e-7,
    ];
    let x = x - 1.0;
    let mut acc = 0.9999999999998099;
    for (i, &c) in COEFFS.iter().enumerate() {
        acc += c / (x + i as f64 + 1.0);
    }
    let t = x + 7.5;
    0.5 * (core::f64::consts::TAU).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// Regularized lower incomplete gamma P(a, x): series for x < a + 1,
/// Lentz continued fraction for the complement otherwise.
fn reg_lower_gamma(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let ln_scale = a * x.ln() - x - ln_gamma(a);
    if x < a + 1.0 {
        let mut term = 1.0 / a;
        let mut sum = term;
        let mut k = 1.0;
        while k < 1000.0 {
            term *= x / (a + k);
            sum += term;
            if term.abs() < sum.abs() * 1e-16 {
                break;
            }
            k += 1.0;
        }
        (ln_scale.exp() * sum).min(1.0)
    } else {
        const TINY: f64 = 1e-300;
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / TINY;
        let mut d = 1.0 / b;
        let mut h = d;
        let mut i = 1.0;
        while i < 1000.0 {
            let an = -i * (i - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < TINY {
                d = TINY;
            }
            c = b + an / c;
            if c.abs() < TINY {
                c = TINY;
            }
            d = 1.0 / d;
            let delta = d * c;
            h *= delta;
            if (delta - 1.0).abs() < 1e-16 {
                break;
            }
            i += 1.0;
        }
        (1.0 - ln_scale.exp() * h).max(0.0)
    }
}

/// CDF of the chi-square distribution with `dof` degrees of freedom.
pub fn chi_square_cdf(x: f64, dof: usize) -> f64 {
    reg_lower_gamma(dof as f64 / 2.0, x / 2.0)
}

/// Upper critical value: the x with `P(X > x) = tail` for a chi-square
/// variable with `dof` degrees of freedom, found by bisection.
pub fn chi_square_critical(dof: usize, tail: f64) -> Result<f64> {
    if dof == 0 || !(tail > 0.0 && tail < 1.0) {
        return Err(Error::Domain(format!(
            "chi_square_critical: need dof >= 1 and tail in (0, 1), got dof={dof}, tail={tail}"
        )));
    }
    let target = 1.0 - tail;
    let mut hi = dof as f64;
    while chi_square_cdf(hi, dof) < target {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if chi_square_cdf(mid, dof) < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-12 * hi.max(1.0) {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}
