//! Single-beacon light-seeking strategies.
//!
//! Three algorithms produce yaw setpoints for the flight controller:
//!
//! * BAG — bearing from the intensity-weighted average of photodiode
//!   direction vectors.
//! * DES — single-sensor extremum seeking: a sinusoidal heading dither whose
//!   correlation with the intensity signal estimates the gradient direction.
//! * DGA — single-sensor gradient ascent from a least-squares plane fit over
//!   dead-reckoned position/intensity history.

use nalgebra::Vector2;
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;
use thiserror::Error;

use crate::control::wrap_angle;
use crate::optics::{PhotodiodeArray, SpectralReading};

#[derive(Debug, Error, PartialEq)]
pub enum GuidanceError {
    /// No sensor above the detection threshold.
    #[error("no sensor detects the beacon")]
    NoSignal,
    /// The weighted bearing vector cancelled out (symmetric illumination).
    #[error("bearing vector is degenerate")]
    DegenerateVector,
    /// The history points are collinear or coincident; no plane fit.
    #[error("history geometry is degenerate")]
    DegenerateGeometry,
}

/// Output of a guidance step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GuidanceCommand {
    /// Desired yaw, wrapped to (-pi, pi].
    pub desired_yaw: f64,
    pub forward_speed: f64,
    pub altitude: f64,
    /// Set when guidance cannot produce a heading at all.
    pub halt: bool,
}

/// Body-frame bearing of the beacon from the intensity-weighted average of
/// detected sensor direction vectors.
pub fn bag_bearing(
    readings: &[SpectralReading],
    array: &PhotodiodeArray,
) -> Result<f64, GuidanceError> {
    let mut sum = Vector2::zeros();
    let mut total_weight = 0.0;
    let mut any_detected = false;
    for (i, reading) in readings.iter().enumerate() {
        if !reading.detected {
            continue;
        }
        any_detected = true;
        let theta = array.sensor_angle(i);
        sum += Vector2::new(theta.cos(), theta.sin()) * reading.peak_magnitude;
        total_weight += reading.peak_magnitude;
    }
    if !any_detected {
        return Err(GuidanceError::NoSignal);
    }
    if total_weight <= 0.0 {
        return Err(GuidanceError::DegenerateVector);
    }
    let v = sum / total_weight;
    if v.norm() < 1e-9 {
        return Err(GuidanceError::DegenerateVector);
    }
    Ok(v.y.atan2(v.x))
}

/// Dither extremum-seeking parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DitherConfig {
    /// Dither amplitude (rad).
    pub amplitude: f64,
    /// Dither frequency (rad/s).
    pub frequency: f64,
    /// High-pass washout cutoff (Hz). The default is a fifth of the dither
    /// frequency.
    pub highpass_cutoff: f64,
    /// Demodulation gain (rad per count-second).
    pub demod_gain: f64,
    /// Initial heading estimate (rad).
    pub initial_heading: f64,
}

impl Default for DitherConfig {
    fn default() -> Self {
        let frequency = 0.6;
        Self {
            amplitude: 0.4,
            frequency,
            highpass_cutoff: frequency / (std::f64::consts::TAU * 5.0),
            demod_gain: 1.4e-4,
            initial_heading: 0.0,
        }
    }
}

/// First-order high-pass washout filter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HighPass {
    prev_input: Option<f64>,
    prev_output: f64,
}

impl HighPass {
    pub fn new() -> Self {
        Self {
            prev_input: None,
            prev_output: 0.0,
        }
    }

    pub fn step(&mut self, input: f64, cutoff_hz: f64, dt: f64) -> f64 {
        let tau = 1.0 / (std::f64::consts::TAU * cutoff_hz.max(1e-9));
        let alpha = tau / (tau + dt);
        let out = match self.prev_input {
            Some(prev) => alpha * (self.prev_output + input - prev),
            None => 0.0,
        };
        self.prev_input = Some(input);
        self.prev_output = out;
        out
    }
}

impl Default for HighPass {
    fn default() -> Self {
        Self::new()
    }
}

/// DES internal state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesState {
    pub theta_hat: f64,
    pub highpass: HighPass,
}

impl DesState {
    pub fn new(config: &DitherConfig) -> Self {
        Self {
            theta_hat: config.initial_heading,
            highpass: HighPass::new(),
        }
    }
}

/// One extremum-seeking update: washout the intensity, demodulate against
/// the dither, integrate into the heading estimate, and superimpose the
/// dither on the command.
pub fn des_step(
    intensity: f64,
    t: f64,
    config: &DitherConfig,
    mut state: DesState,
    dt: f64,
) -> (f64, DesState) {
    let xi = state.highpass.step(intensity, config.highpass_cutoff, dt);
    let carrier = (config.frequency * t).cos();
    state.theta_hat = wrap_angle(state.theta_hat + config.demod_gain * xi * carrier * dt);
    let psi_d = wrap_angle(state.theta_hat + config.amplitude * carrier);
    (psi_d, state)
}

/// Dead-reckoned position update from commanded speed and previous heading.
pub fn dead_reckon(prev: Vector2<f64>, speed: f64, heading: f64, dt: f64) -> Vector2<f64> {
    prev + Vector2::new(heading.cos(), heading.sin()) * speed * dt
}

/// Ring buffer of (dead-reckoned position, intensity) pairs.
#[derive(Debug, Clone)]
pub struct GradientHistory {
    entries: VecDeque<(Vector2<f64>, f64)>,
    capacity: usize,
    /// Current dead-reckoned pose.
    pub position: Vector2<f64>,
}

impl GradientHistory {
    pub fn new(capacity: usize) -> Self {
        Self {
            entries: VecDeque::with_capacity(capacity),
            capacity: capacity.max(3),
            position: Vector2::zeros(),
        }
    }

    pub fn push(&mut self, position: Vector2<f64>, intensity: f64) {
        if self.entries.len() == self.capacity {
            self.entries.pop_front();
        }
        self.entries.push_back((position, intensity));
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn points(&self) -> impl Iterator<Item = &(Vector2<f64>, f64)> {
        self.entries.iter()
    }
}

/// Least-squares plane fit `J ≈ a·x + b·y + c` over the history; returns the
/// gradient (a, b). The intercept absorbs the absolute intensity origin.
pub fn fit_plane(history: &GradientHistory) -> Result<(f64, f64), GuidanceError> {
    let n = history.len();
    if n < 3 {
        return Err(GuidanceError::DegenerateGeometry);
    }
    let nf = n as f64;
    let (mut mx, mut my, mut mj) = (0.0, 0.0, 0.0);
    for (p, j) in history.points() {
        mx += p.x;
        my += p.y;
        mj += j;
    }
    mx /= nf;
    my /= nf;
    mj /= nf;

    // Centered normal equations; the intercept drops out.
    let (mut sxx, mut sxy, mut syy, mut sxj, mut syj) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (p, j) in history.points() {
        let dx = p.x - mx;
        let dy = p.y - my;
        let dj = j - mj;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
        sxj += dx * dj;
        syj += dy * dj;
    }
    let det = sxx * syy - sxy * sxy;
    // Collinear or coincident point sets have a vanishing covariance
    // determinant relative to the dominant spread.
    let scale = (sxx + syy) * (sxx + syy);
    if det <= 1e-9 * scale.max(f64::MIN_POSITIVE) {
        return Err(GuidanceError::DegenerateGeometry);
    }
    let a = (sxj * syy - syj * sxy) / det;
    let b = (sxx * syj - sxy * sxj) / det;
    Ok((a, b))
}

/// DGA internal state: the history plus the last commanded heading.
#[derive(Debug, Clone)]
pub struct DgaState {
    pub history: GradientHistory,
    pub last_heading: f64,
}

impl DgaState {
    pub fn new(window: usize, initial_heading: f64) -> Self {
        Self {
            history: GradientHistory::new(window),
            last_heading: initial_heading,
        }
    }
}

/// One gradient-ascent update: dead-reckon with the commanded speed and the
/// measured heading, append the intensity sample, refit the plane, and steer
/// along the estimated gradient. The fit runs once the window is full, so
/// the launch transient does not feed the first estimates; degenerate
/// geometry holds the previous heading.
pub fn dga_step(
    intensity: f64,
    commanded_speed: f64,
    measured_heading: f64,
    state: &mut DgaState,
    dt: f64,
) -> f64 {
    state.history.position = dead_reckon(
        state.history.position,
        commanded_speed,
        measured_heading,
        dt,
    );
    let position = state.history.position;
    state.history.push(position, intensity);
    if state.history.len() < state.history.capacity() {
        return state.last_heading;
    }
    match fit_plane(&state.history) {
        Ok((a, b)) => {
            state.last_heading = b.atan2(a);
            state.last_heading
        }
        Err(_) => state.last_heading,
    }
}
