//! Sum-of-sinusoids Rayleigh fading traces driven by vMF-drawn DOAs,
//! plus spectral and envelope estimators for cross-checking the analytic
//! Doppler spectrum on generated traces.
//!
//! A trace is
//!
//! ```text
//! H(t_k) = sum_n (1/sqrt(N)) e^{j phi_n} e^{-j 2 pi f_n t_k}
//! ```
//!
//! with uniform initial phases `phi_n`, Doppler shifts `f_n` from the
//! scattering geometry, and equal amplitudes so the mean power is one by
//! construction. Under the `e^{-j 2 pi f t}` phase convention a path
//! with Doppler shift `+f` shows up at `-f` in a spectral estimate;
//! [`doppler_bin_masses`] applies that mirror when folding an estimate
//! onto the Doppler frequency axis.

use crate::geometry::MotionSpec;
use crate::rng::CounterStream;
use crate::vmf::VmfParams;
use crate::{Complex64, Error, Result};
use rayon::prelude::*;
use rustfft::FftPlanner;
use std::io::Write;

/// Stream tag for the initial path phases (DOAs use the vmf tag).
const STREAM_PHASE: u64 = 0xfa5e;

/// Time samples are produced in fixed-size blocks; each block starts
/// from a direct evaluation, so any parallel schedule reproduces the
/// sequential bits.
const TIME_BLOCK: usize = 4096;

/// Configuration of a sum-of-sinusoids trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FadingConfig {
    pub n_paths: usize,
    /// Sampling rate in Hz; must exceed twice the maximum Doppler shift.
    pub sample_rate: f64,
    /// Trace duration in seconds.
    pub duration: f64,
    pub scatter: VmfParams,
    pub motion: MotionSpec,
    pub seed: u64,
}

impl FadingConfig {
    /// Number of samples the trace will contain.
    pub fn trace_len(&self) -> usize {
        (self.duration * self.sample_rate).round() as usize
    }
}

/// A complex baseband channel gain trace.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelTrace {
    pub samples: Vec<Complex64>,
    pub sample_rate: f64,
    pub config: FadingConfig,
}

/// Synthesize the trace for `config`; deterministic given the seed.
pub fn generate(config: &FadingConfig) -> Result<ChannelTrace> {
    if config.n_paths < 1 {
        return Err(Error::Domain("generate: need at least one path".into()));
    }
    let f_max = config.motion.max_doppler();
    if !config.sample_rate.is_finite() || config.sample_rate <= 2.0 * f_max {
        return Err(Error::Domain(format!(
            "generate: sample rate {} Hz violates the Nyquist bound for f_max = {} Hz",
            config.sample_rate, f_max
        )));
    }
    if !config.duration.is_finite() || config.duration <= 0.0 {
        return Err(Error::Domain(format!(
            "generate: duration must be positive and finite, got {}",
            config.duration
        )));
    }
    let len = config.trace_len();
    if len == 0 {
        return Err(Error::Domain(
            "generate: duration rounds to an empty trace".into(),
        ));
    }
    if config.motion.speed() == 0.0 {
        return Err(Error::Domain(
            "generate: speed must be positive for a fading process".into(),
        ));
    }

    // path parameters are drawn once per trace
    let phases = CounterStream::new(config.seed, STREAM_PHASE);
    let paths: Vec<(f64, f64)> = config
        .scatter
        .sample(config.n_paths, config.seed)
        .into_iter()
        .enumerate()
        .map(|(n, doa)| {
            let freq = config.motion.doppler_shift(doa);
            let phase = core::f64::consts::TAU * phases.unit_f64_at(n as u64);
            (freq, phase)
        })
        .collect();

    let amplitude = 1.0 / (config.n_paths as f64).sqrt();
    let dt = 1.0 / config.sample_rate;
    let mut samples = vec![Complex64::new(0.0, 0.0); len];
    samples
        .par_chunks_mut(TIME_BLOCK)
        .enumerate()
        .for_each(|(block, chunk)| {
            let t0 = (block * TIME_BLOCK) as f64 * dt;
            for &(freq, phase) in &paths {
                let step = Complex64::from_polar(1.0, -core::f64::consts::TAU * freq * dt);
                let mut z = Complex64::from_polar(1.0, phase - core::f64::consts::TAU * freq * t0);
                for s in chunk.iter_mut() {
                    *s += z;
                    z *= step;
                }
            }
            for s in chunk.iter_mut() {
                *s *= amplitude;
            }
        });

    Ok(ChannelTrace {
        samples,
        sample_rate: config.sample_rate,
        config: *config,
    })
}

impl ChannelTrace {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Time-averaged `|H|^2`.
    pub fn mean_power(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        self.samples.iter().map(|s| s.norm_sqr()).sum::<f64>() / self.samples.len() as f64
    }

    /// Averaged windowed periodogram (Hann window), two-sided on
    /// `[-sample_rate/2, sample_rate/2)`, normalized so that the Riemann
    /// sum of density times resolution equals the trace mean power.
    ///
    /// The segment length follows from the trace length, `n_segments`
    /// and the overlap; longer traces buy finer resolution.
    pub fn estimate_psd(&self, n_segments: usize, overlap_fraction: f64) -> Result<PsdEstimate> {
        if n_segments < 1 {
            return Err(Error::Domain(
                "estimate_psd: need at least one segment".into(),
            ));
        }
        if !(0.0..1.0).contains(&overlap_fraction) {
            return Err(Error::Domain(format!(
                "estimate_psd: overlap fraction must lie in [0, 1), got {overlap_fraction}"
            )));
        }
        let len = self.samples.len();
        let denom = 1.0 + (n_segments as f64 - 1.0) * (1.0 - overlap_fraction);
        let nperseg = (len as f64 / denom).floor() as usize;
        if nperseg < 2 {
            return Err(Error::Domain(format!(
                "estimate_psd: trace of {len} samples is too short for {n_segments} segments"
            )));
        }
        let step = ((nperseg as f64) * (1.0 - overlap_fraction))
            .floor()
            .max(1.0) as usize;

        let window: Vec<f64> = (0..nperseg)
            .map(|t| 0.5 * (1.0 - (core::f64::consts::TAU * t as f64 / nperseg as f64).cos()))
            .collect();
        let window_power: f64 = window.iter().map(|w| w * w).sum();

        let fft = FftPlanner::new().plan_fft_forward(nperseg);
        let mut accum = vec![0.0f64; nperseg];
        let mut buf = vec![Complex64::new(0.0, 0.0); nperseg];
        let mut count = 0usize;
        for seg in 0..n_segments {
            let start = seg * step;
            if start + nperseg > len {
                break;
            }
            for (i, b) in buf.iter_mut().enumerate() {
                *b = self.samples[start + i] * window[i];
            }
            fft.process(&mut buf);
            for (a, b) in accum.iter_mut().zip(&buf) {
                *a += b.norm_sqr();
            }
            count += 1;
        }
        if count == 0 {
            return Err(Error::Domain("estimate_psd: no full segment fits".into()));
        }
        let scale = 1.0 / (count as f64 * self.sample_rate * window_power);
        for a in accum.iter_mut() {
            *a *= scale;
        }

        // reorder to ascending frequency, negative half first
        let nonneg = nperseg.div_ceil(2);
        let resolution = self.sample_rate / nperseg as f64;
        let mut densities = Vec::with_capacity(nperseg);
        densities.extend_from_slice(&accum[nonneg..]);
        densities.extend_from_slice(&accum[..nonneg]);
        let offset = (nperseg - nonneg) as f64;
        let frequencies: Vec<f64> = (0..nperseg)
            .map(|i| (i as f64 - offset) * resolution)
            .collect();

        // pin the estimate's total power to the trace's mean power
        let total: f64 = densities.iter().sum::<f64>() * resolution;
        if total > 0.0 {
            let fix = self.mean_power() / total;
            for d in densities.iter_mut() {
                *d *= fix;
            }
        }
        Ok(PsdEstimate {
            frequencies,
            densities,
            resolution_hz: resolution,
        })
    }

    /// Biased autocorrelation estimate `R(tau) = (1/L) sum H(t+tau) H*(t)`
    /// for lags `0..=max_lag`; `R(0)` is the mean power.
    pub fn autocorrelation(&self, max_lag: usize) -> Result<Vec<Complex64>> {
        let len = self.samples.len();
        if max_lag >= len {
            return Err(Error::Domain(format!(
                "autocorrelation: max_lag {max_lag} must be below the trace length {len}"
            )));
        }
        let norm = 1.0 / len as f64;
        Ok((0..=max_lag)
            .map(|lag| {
                let mut acc = Complex64::new(0.0, 0.0);
                for t in 0..len - lag {
                    acc += self.samples[t + lag] * self.samples[t].conj();
                }
                acc * norm
            })
            .collect())
    }

    /// CSV export with header `t_s,re,im`; 17 significant digits, enough
    /// to round-trip every binary64 value.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t_s,re,im")?;
        for (k, s) in self.samples.iter().enumerate() {
            let t = k as f64 / self.sample_rate;
            writeln!(w, "{:.16e},{:.16e},{:.16e}", t, s.re, s.im)?;
        }
        Ok(())
    }
}

/// Two-sided Welch power spectral density estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct PsdEstimate {
    pub frequencies: Vec<f64>,
    /// Power density in 1/Hz (for a unit-power process).
    pub densities: Vec<f64>,
    /// Frequency grid spacing in Hz.
    pub resolution_hz: f64,
}

impl PsdEstimate {
    /// Total power: Riemann sum of density times resolution.
    pub fn power(&self) -> f64 {
        self.densities.iter().sum::<f64>() * self.resolution_hz
    }

    /// Power inside `[lo, hi]`.
    pub fn band_power(&self, lo: f64, hi: f64) -> f64 {
        self.frequencies
            .iter()
            .zip(&self.densities)
            .filter(|(f, _)| (lo..=hi).contains(f))
            .map(|(_, d)| d * self.resolution_hz)
            .sum()
    }
}

/// Fold a PSD estimate into `n_bins` per-bin masses over the Doppler
/// interval `[-f_max, f_max]`, normalized to sum to one.
///
/// The estimate's frequency axis is mirrored (`f -> -f`) first, matching
/// the `e^{-j 2 pi f t}` convention of [`generate`], so the result is
/// directly comparable with analytic Doppler bin masses.
pub fn doppler_bin_masses(psd: &PsdEstimate, f_max: f64, n_bins: usize) -> Result<Vec<f64>> {
    if n_bins < 1 || !f_max.is_finite() || f_max <= 0.0 {
        return Err(Error::Domain(
            "doppler_bin_masses: need n_bins >= 1 and f_max > 0".into(),
        ));
    }
    let width = 2.0 * f_max / n_bins as f64;
    let mut masses = vec![0.0f64; n_bins];
    for (f, d) in psd.frequencies.iter().zip(&psd.densities) {
        let doppler = -f;
        if doppler.abs() > f_max {
            continue;
        }
        let idx = (((doppler + f_max) / width) as usize).min(n_bins - 1);
        masses[idx] += d * psd.resolution_hz;
    }
    let total: f64 = masses.iter().sum();
    if total > 0.0 {
        for m in masses.iter_mut() {
            *m /= total;
        }
    }
    Ok(masses)
}
