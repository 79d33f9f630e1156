//! Modulated light beacon, photodiode reception, and FFT demodulation.
//!
//! The emitter is a square-wave-modulated source with a Lambertian radiation
//! pattern; receivers are a ring of photodiodes sampled at a fixed rate. A
//! target FFT bin is computed from the modulation frequency and the peak
//! magnitude around it, together with an SNR that excludes the harmonic bins
//! of the square wave from the noise estimate, decides whether a sensor sees
//! the beacon.

use nalgebra::{UnitQuaternion, Vector3};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use rustfft::{num_complex::Complex, FftPlanner};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OpticsError {
    #[error("invalid spectral configuration: {0}")]
    Domain(String),
    #[error("degenerate spectrum: noise bin set is empty")]
    DegenerateSpectrum,
}

/// A modulated beacon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeaconConfig {
    /// Emitter position (m, world frame).
    pub position: Vector3<f64>,
    /// Unit pointing direction of the emitter.
    pub boresight: Vector3<f64>,
    /// On-axis illuminance at 1 m (lux·m²).
    pub intensity_at_1m: f64,
    /// Modulation frequency (Hz).
    pub f_mod: f64,
    /// Square-wave duty cycle.
    pub duty: f64,
    /// Half-power angle of the Lambertian pattern (degrees).
    pub half_power_angle_deg: f64,
    /// Hard field-of-view cutoff (degrees from boresight).
    pub fov_half_angle_deg: f64,
}

impl BeaconConfig {
    /// Lambertian order m = -ln 2 / ln cos(half-power angle); m = 1 for the
    /// 60 degree half-power emitter.
    pub fn lambertian_order(&self) -> f64 {
        let c = self.half_power_angle_deg.to_radians().cos();
        -(2.0_f64.ln()) / c.ln()
    }

    pub fn validate(&self) -> Result<(), OpticsError> {
        if self.position.iter().any(|c| !c.is_finite())
            || self.boresight.iter().any(|c| !c.is_finite())
        {
            return Err(OpticsError::Domain(
                "beacon position and boresight must be finite".into(),
            ));
        }
        if (self.boresight.norm() - 1.0).abs() > 1e-6 {
            return Err(OpticsError::Domain("boresight must be unit-norm".into()));
        }
        if !self.intensity_at_1m.is_finite() || self.intensity_at_1m < 0.0 {
            return Err(OpticsError::Domain(
                "intensity must be finite and non-negative".into(),
            ));
        }
        if !self.f_mod.is_finite() || self.f_mod <= 0.0 {
            return Err(OpticsError::Domain("f_mod must be positive".into()));
        }
        if !(0.0 < self.duty && self.duty < 1.0) {
            return Err(OpticsError::Domain("duty must be in (0, 1)".into()));
        }
        let order = self.lambertian_order();
        if !(order > 0.0 && order.is_finite()) {
            return Err(OpticsError::Domain(
                "half-power angle must give a positive Lambertian order".into(),
            ));
        }
        Ok(())
    }
}

/// A ring of photodiodes in the body horizontal plane, diode i facing
/// body-frame angle `i * 2π/N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhotodiodeArray {
    pub count: usize,
    /// Per-sensor field of view half-angle (degrees).
    pub fov_half_angle_deg: f64,
    /// Angular response exponent: the sensor lobe is cos^e of the arrival
    /// angle. 1 is an ideal cosine diode; the stock sensor modules sit in
    /// shallow sockets that narrow the lobe to roughly cos².
    pub response_exponent: f64,
    /// Counts per lux.
    pub responsivity: f64,
    /// Additive Gaussian noise on each raw sample (counts).
    pub noise_std: f64,
    /// Sampling rate (Hz).
    pub f_sample: f64,
    /// FFT length (power of two).
    pub n_fft: usize,
    /// Peak search window around the target bin (bins).
    pub search_window: usize,
    /// Detection threshold on the SNR.
    pub detection_snr: f64,
}

impl Default for PhotodiodeArray {
    fn default() -> Self {
        Self {
            count: 8,
            fov_half_angle_deg: 90.0,
            response_exponent: 2.0,
            responsivity: 1.0,
            noise_std: 1.0,
            f_sample: 4800.0,
            n_fft: 1024,
            search_window: 2,
            detection_snr: 3.0,
        }
    }
}

impl PhotodiodeArray {
    pub fn with_count(count: usize) -> Self {
        Self {
            count,
            ..Self::default()
        }
    }

    pub fn validate(&self, beacons: &[BeaconConfig]) -> Result<(), OpticsError> {
        if !matches!(self.count, 1 | 4 | 8 | 16) {
            return Err(OpticsError::Domain(format!(
                "photodiode count must be one of 1/4/8/16, got {}",
                self.count
            )));
        }
        if !self.n_fft.is_power_of_two() {
            return Err(OpticsError::Domain("N_FFT must be a power of two".into()));
        }
        for beacon in beacons {
            if beacon.f_mod >= self.f_sample / 2.0 {
                return Err(OpticsError::Domain(format!(
                    "f_mod {} violates Nyquist for f_sample {}",
                    beacon.f_mod, self.f_sample
                )));
            }
        }
        Ok(())
    }

    /// Body-frame facing direction of sensor i.
    pub fn sensor_direction(&self, i: usize) -> Vector3<f64> {
        let theta = self.sensor_angle(i);
        Vector3::new(theta.cos(), theta.sin(), 0.0)
    }

    /// Body-frame facing angle of sensor i (rad).
    pub fn sensor_angle(&self, i: usize) -> f64 {
        i as f64 * std::f64::consts::TAU / self.count as f64
    }

    /// Duration of one frame (s).
    pub fn frame_duration(&self) -> f64 {
        self.n_fft as f64 / self.f_sample
    }
}

/// Demodulation result for one sensor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralReading {
    pub peak_magnitude: f64,
    pub peak_bin: usize,
    pub snr: f64,
    pub detected: bool,
}

/// Illuminance at a receiver from a Lambertian emitter:
/// `E = I · cos^m(phi_tx) · cos(phi_rx) / d²`, zero outside either field of
/// view and never negative.
pub fn received_illuminance(
    beacon: &BeaconConfig,
    sensor_position: Vector3<f64>,
    sensor_normal: Vector3<f64>,
    sensor_fov_half_angle_deg: f64,
) -> f64 {
    let offset = sensor_position - beacon.position;
    let d2 = offset.norm_squared();
    if d2 <= f64::EPSILON {
        return 0.0;
    }
    let d = d2.sqrt();
    let dir = offset / d;
    let cos_tx = beacon.boresight.dot(&dir);
    if cos_tx <= beacon.fov_half_angle_deg.to_radians().cos() {
        return 0.0;
    }
    let cos_rx = sensor_normal.dot(&(-dir));
    if cos_rx <= sensor_fov_half_angle_deg.to_radians().cos().max(0.0) {
        return 0.0;
    }
    let m = beacon.lambertian_order();
    (beacon.intensity_at_1m * cos_tx.powf(m) * cos_rx / d2).max(0.0)
}

/// Square-wave modulation: on for the first `duty` fraction of each period.
fn modulation(t: f64, f_mod: f64, duty: f64) -> f64 {
    let phase = (t * f_mod).fract();
    let phase = if phase < 0.0 { phase + 1.0 } else { phase };
    if phase < duty {
        1.0
    } else {
        0.0
    }
}

/// Pose of the receiver board.
#[derive(Debug, Clone, Copy)]
pub struct ReceiverPose {
    pub position: Vector3<f64>,
    pub attitude: UnitQuaternion<f64>,
}

/// Synthesizes one raw sample buffer per sensor for a frame starting at `t0`
/// with the geometry frozen at the given pose.
pub fn sample_frame<R: Rng>(
    beacons: &[BeaconConfig],
    ambient: f64,
    array: &PhotodiodeArray,
    pose: &ReceiverPose,
    t0: f64,
    rng: &mut R,
) -> Vec<Vec<f64>> {
    let noise = if array.noise_std > 0.0 {
        Some(Normal::new(0.0, array.noise_std).unwrap())
    } else {
        None
    };
    // Per-sensor steady illuminance for each beacon at the frozen pose. The
    // base model carries one cosine factor; the sensor lobe shape adds the
    // remaining cos^(e-1).
    let gains: Vec<Vec<f64>> = (0..array.count)
        .map(|i| {
            let normal_world = pose.attitude * array.sensor_direction(i);
            beacons
                .iter()
                .map(|b| {
                    let base = received_illuminance(
                        b,
                        pose.position,
                        normal_world,
                        array.fov_half_angle_deg,
                    );
                    if base > 0.0 && array.response_exponent != 1.0 {
                        let dir = (b.position - pose.position).normalize();
                        let cos_rx = normal_world.dot(&dir).max(0.0);
                        base * cos_rx.powf(array.response_exponent - 1.0)
                    } else {
                        base
                    }
                })
                .collect()
        })
        .collect();

    (0..array.count)
        .map(|i| {
            (0..array.n_fft)
                .map(|n| {
                    let t = t0 + n as f64 / array.f_sample;
                    let mut lux = ambient;
                    for (b, beacon) in beacons.iter().enumerate() {
                        lux += gains[i][b] * modulation(t, beacon.f_mod, beacon.duty);
                    }
                    let mut counts = array.responsivity * lux;
                    if let Some(dist) = &noise {
                        counts += dist.sample(rng);
                    }
                    counts
                })
                .collect()
        })
        .collect()
}

/// Target bin for a modulation frequency.
pub fn target_bin(f_mod: f64, n_fft: usize, f_sample: f64) -> usize {
    (f_mod * n_fft as f64 / f_sample).round() as usize
}

/// FFT magnitude spectrum of a real buffer (bins 0..N/2).
pub fn magnitude_spectrum(buffer: &[f64]) -> Vec<f64> {
    let n = buffer.len();
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(n);
    let mut data: Vec<Complex<f64>> = buffer.iter().map(|&x| Complex::new(x, 0.0)).collect();
    fft.process(&mut data);
    data.iter().take(n / 2 + 1).map(|c| c.norm()).collect()
}

/// Peak magnitude and bin within `window` bins of the target bin. The DC bin
/// is excluded by construction of the valid window range.
pub fn fft_peak(
    buffer: &[f64],
    f_mod: f64,
    f_sample: f64,
    window: usize,
) -> Result<(f64, usize), OpticsError> {
    let n = buffer.len();
    let k_target = target_bin(f_mod, n, f_sample);
    if k_target <= window || k_target + window >= n / 2 {
        return Err(OpticsError::Domain(format!(
            "target bin {k_target} with window {window} leaves the usable spectrum"
        )));
    }
    let spectrum = magnitude_spectrum(buffer);
    let (mut best_bin, mut best_mag) = (k_target, 0.0);
    for k in (k_target - window)..=(k_target + window) {
        if spectrum[k] > best_mag {
            best_mag = spectrum[k];
            best_bin = k;
        }
    }
    Ok((best_mag, best_bin))
}

/// SNR of the peak against the mean magnitude over all bins excluding DC and
/// windows around every integer harmonic of the modulation frequency up to
/// Nyquist.
pub fn compute_snr(
    spectrum: &[f64],
    k_peak: usize,
    f_mod: f64,
    f_sample: f64,
    n_fft: usize,
    window: usize,
) -> Result<f64, OpticsError> {
    let half = n_fft / 2;
    let k_target = target_bin(f_mod, n_fft, f_sample);
    let mut excluded = vec![false; half + 1];
    excluded[0] = true;
    // Peak window.
    for k in k_peak.saturating_sub(window)..=(k_peak + window).min(half) {
        excluded[k] = true;
    }
    // Harmonic windows.
    let mut harmonic = k_target;
    while harmonic <= half {
        for k in harmonic.saturating_sub(window)..=(harmonic + window).min(half) {
            excluded[k] = true;
        }
        harmonic += k_target.max(1);
    }
    let noise: Vec<f64> = (0..=half)
        .filter(|&k| !excluded[k])
        .map(|k| spectrum[k])
        .collect();
    if noise.is_empty() {
        return Err(OpticsError::DegenerateSpectrum);
    }
    let mean = noise.iter().sum::<f64>() / noise.len() as f64;
    if mean <= 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(spectrum[k_peak] / mean)
}

/// Full receive pipeline for one frame: per-sensor peak magnitude, SNR, and
/// detection flag.
pub fn sense_frame<R: Rng>(
    beacons: &[BeaconConfig],
    ambient: f64,
    array: &PhotodiodeArray,
    pose: &ReceiverPose,
    t0: f64,
    f_mod: f64,
    rng: &mut R,
) -> Result<Vec<SpectralReading>, OpticsError> {
    let buffers = sample_frame(beacons, ambient, array, pose, t0, rng);
    buffers
        .iter()
        .map(|buffer| {
            let spectrum = magnitude_spectrum(buffer);
            let (peak_magnitude, peak_bin) =
                fft_peak(buffer, f_mod, array.f_sample, array.search_window)?;
            let snr = compute_snr(
                &spectrum,
                peak_bin,
                f_mod,
                array.f_sample,
                array.n_fft,
                array.search_window,
            )?;
            Ok(SpectralReading {
                peak_magnitude,
                peak_bin,
                snr,
                detected: snr >= array.detection_snr,
            })
        })
        .collect()
}
