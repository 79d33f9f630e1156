//! Six-degree-of-freedom rigid-body dynamics for buoyant vehicles.
//!
//! The equation of motion is the Newton-Euler form `M v̇ = ΣF_ext`, where the
//! external wrench is the sum of four contributions: buoyancy/gravity
//! restoring, propulsion, aerodynamic damping, and gyroscopic coupling.
//! Frames: world z points up; the body frame is x-forward, y-left, z-up, with
//! the attitude quaternion mapping body to world. Linear and angular
//! velocities are expressed in the body frame.

use nalgebra::{Matrix3, Quaternion, UnitQuaternion, Vector3, Vector6};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_GRAVITY: f64 = 9.81;

/// Fixed integrator step used by the closed-loop runner (100 Hz).
pub const DEFAULT_DT: f64 = 0.01;

#[derive(Debug, Error)]
pub enum DynamicsError {
    /// The integrator produced a non-finite component, which signals a
    /// blown-up simulation (absurd gains, huge dt) rather than a model state.
    #[error("non-finite state after integration step at t = {time} s")]
    NonFiniteState { time: f64 },
    #[error("invalid dynamics parameter: {0}")]
    InvalidParameter(String),
}

/// Full kinematic state of the vehicle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BodyState {
    /// Position in the world frame (m).
    pub position: Vector3<f64>,
    /// Attitude quaternion, body to world.
    pub attitude: UnitQuaternion<f64>,
    /// Linear velocity in the body frame (m/s).
    pub linear_velocity: Vector3<f64>,
    /// Angular velocity in the body frame (rad/s).
    pub angular_velocity: Vector3<f64>,
    /// Simulation time (s).
    pub time: f64,
}

impl BodyState {
    pub fn at_rest(position: Vector3<f64>, yaw: f64) -> Self {
        Self {
            position,
            attitude: UnitQuaternion::from_euler_angles(0.0, 0.0, yaw),
            linear_velocity: Vector3::zeros(),
            angular_velocity: Vector3::zeros(),
            time: 0.0,
        }
    }

    /// Yaw (rotation about world z), extracted from the quaternion.
    pub fn yaw(&self) -> f64 {
        self.attitude.euler_angles().2
    }

    /// Pitch angle (rad).
    pub fn pitch(&self) -> f64 {
        self.attitude.euler_angles().1
    }

    /// Roll angle (rad).
    pub fn roll(&self) -> f64 {
        self.attitude.euler_angles().0
    }

    /// Velocity in the world frame.
    pub fn world_velocity(&self) -> Vector3<f64> {
        self.attitude * self.linear_velocity
    }

    pub fn is_finite(&self) -> bool {
        self.position.iter().all(|c| c.is_finite())
            && self.attitude.coords.iter().all(|c| c.is_finite())
            && self.linear_velocity.iter().all(|c| c.is_finite())
            && self.angular_velocity.iter().all(|c| c.is_finite())
            && self.time.is_finite()
    }
}

/// Mass and inertia properties, with optional diagonal added-mass terms for
/// the hull. Offsets are in the body frame, measured from the geometric
/// reference at the envelope center.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InertiaModel {
    pub mass: f64,
    pub inertia_tensor: Matrix3<f64>,
    /// Added mass along (x, y, z, roll, pitch, yaw); kg for 1-3, kg·m² for 4-6.
    pub added_mass_diagonal: Vector6<f64>,
    /// Center of gravity offset (m, body frame).
    pub cg_offset: Vector3<f64>,
    /// Center of buoyancy offset (m, body frame).
    pub cb_offset: Vector3<f64>,
}

impl InertiaModel {
    pub fn validate(&self) -> Result<(), DynamicsError> {
        if !(self.mass > 0.0) {
            return Err(DynamicsError::InvalidParameter(format!(
                "mass must be positive, got {}",
                self.mass
            )));
        }
        let sym_err = (self.inertia_tensor - self.inertia_tensor.transpose()).norm();
        if sym_err > 1e-9 {
            return Err(DynamicsError::InvalidParameter(
                "inertia tensor must be symmetric".into(),
            ));
        }
        if self.inertia_tensor.clone().cholesky().is_none() {
            return Err(DynamicsError::InvalidParameter(
                "inertia tensor must be positive definite".into(),
            ));
        }
        if self.added_mass_diagonal.iter().any(|&a| a < 0.0) {
            return Err(DynamicsError::InvalidParameter(
                "added mass components must be non-negative".into(),
            ));
        }
        Ok(())
    }

    /// Translational mass per body axis, including added mass.
    pub fn linear_mass(&self) -> Vector3<f64> {
        Vector3::new(
            self.mass + self.added_mass_diagonal[0],
            self.mass + self.added_mass_diagonal[1],
            self.mass + self.added_mass_diagonal[2],
        )
    }

    /// Rotational inertia including added-inertia terms.
    pub fn augmented_inertia(&self) -> Matrix3<f64> {
        self.inertia_tensor
            + Matrix3::from_diagonal(&Vector3::new(
                self.added_mass_diagonal[3],
                self.added_mass_diagonal[4],
                self.added_mass_diagonal[5],
            ))
    }
}

/// Buoyant lift applied at the center of buoyancy, pointing up in the world
/// frame. A net mass deficit of `d` kilograms is expressed as
/// `buoyant_force = (mass - d) * gravity`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BuoyancyModel {
    pub buoyant_force: f64,
    pub gravity: f64,
}

impl BuoyancyModel {
    pub fn neutral(mass: f64) -> Self {
        Self {
            buoyant_force: mass * DEFAULT_GRAVITY,
            gravity: DEFAULT_GRAVITY,
        }
    }

    /// Buoyancy short of neutral by `deficit_kg` of weight.
    pub fn with_mass_deficit(mass: f64, deficit_kg: f64) -> Self {
        Self {
            buoyant_force: (mass - deficit_kg) * DEFAULT_GRAVITY,
            gravity: DEFAULT_GRAVITY,
        }
    }

    pub fn validate(&self) -> Result<(), DynamicsError> {
        if self.buoyant_force < 0.0 {
            return Err(DynamicsError::InvalidParameter(
                "buoyant force must be non-negative".into(),
            ));
        }
        Ok(())
    }
}

/// Per-axis linear and quadratic damping coefficients. Components 1-3 act on
/// translational velocity (N·s/m, N·s²/m²), 4-6 on angular velocity
/// (N·m·s/rad, N·m·s²/rad²).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DragCoefficients {
    pub linear: Vector6<f64>,
    pub quadratic: Vector6<f64>,
}

impl DragCoefficients {
    pub fn zero() -> Self {
        Self {
            linear: Vector6::zeros(),
            quadratic: Vector6::zeros(),
        }
    }

    pub fn validate(&self) -> Result<(), DynamicsError> {
        if self.linear.iter().chain(self.quadratic.iter()).any(|&c| c < 0.0) {
            return Err(DynamicsError::InvalidParameter(
                "drag coefficients must be non-negative".into(),
            ));
        }
        Ok(())
    }

    /// Steady speed at which a constant applied force `f` on axis `axis`
    /// balances the damping, i.e. the positive root of F = D·v + D²·v².
    pub fn terminal_speed(&self, axis: usize, f: f64) -> f64 {
        let d1 = self.linear[axis];
        let d2 = self.quadratic[axis];
        if d2 == 0.0 {
            return if d1 > 0.0 { f / d1 } else { f64::INFINITY };
        }
        (-d1 + (d1 * d1 + 4.0 * d2 * f).sqrt()) / (2.0 * d2)
    }
}

/// A force and torque pair expressed in the body frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForceTorque {
    pub force: Vector3<f64>,
    pub torque: Vector3<f64>,
}

impl ForceTorque {
    pub fn zero() -> Self {
        Self {
            force: Vector3::zeros(),
            torque: Vector3::zeros(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.force.iter().all(|c| c.is_finite()) && self.torque.iter().all(|c| c.is_finite())
    }
}

impl std::ops::Add for ForceTorque {
    type Output = ForceTorque;
    fn add(self, rhs: ForceTorque) -> ForceTorque {
        ForceTorque {
            force: self.force + rhs.force,
            torque: self.torque + rhs.torque,
        }
    }
}

impl std::iter::Sum for ForceTorque {
    fn sum<I: Iterator<Item = ForceTorque>>(iter: I) -> Self {
        iter.fold(ForceTorque::zero(), |a, b| a + b)
    }
}

/// Gust model for the ambient wind field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GustModel {
    None,
    /// Ornstein-Uhlenbeck perturbation around the mean, per world axis.
    OuProcess {
        sigma: f64,
        correlation_time: f64,
        seed: u64,
    },
}

/// Ambient wind: a mean world-frame velocity plus an optional gust process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindField {
    pub mean_velocity: Vector3<f64>,
    pub gust_model: GustModel,
}

impl WindField {
    pub fn still() -> Self {
        Self {
            mean_velocity: Vector3::zeros(),
            gust_model: GustModel::None,
        }
    }

    pub fn steady(mean: Vector3<f64>) -> Self {
        Self {
            mean_velocity: mean,
            gust_model: GustModel::None,
        }
    }

    pub fn sampler(&self) -> WindSampler {
        WindSampler::new(self.clone())
    }
}

/// Stateful sampler for a `WindField`. Gust realizations are generated on a
/// fixed 100 Hz grid from a dedicated seeded stream, so the sequence is a
/// deterministic function of (seed, time) regardless of how the caller steps.
pub struct WindSampler {
    field: WindField,
    grid_dt: f64,
    grid_index: u64,
    gust: Vector3<f64>,
    rng: Option<(ChaCha8Rng, Normal<f64>)>,
}

impl WindSampler {
    fn new(field: WindField) -> Self {
        let rng = match field.gust_model {
            GustModel::None => None,
            GustModel::OuProcess { sigma, seed, .. } => Some((
                ChaCha8Rng::seed_from_u64(seed),
                Normal::new(0.0, sigma.max(0.0)).expect("gust sigma must be finite"),
            )),
        };
        Self {
            field,
            grid_dt: DEFAULT_DT,
            grid_index: 0,
            gust: Vector3::zeros(),
            rng,
        }
    }

    /// World-frame wind velocity at time `t`. `t` must be non-decreasing
    /// across calls on the same sampler.
    pub fn velocity(&mut self, t: f64) -> Vector3<f64> {
        if let (
            Some((rng, normal)),
            GustModel::OuProcess {
                correlation_time, ..
            },
        ) = (self.rng.as_mut(), &self.field.gust_model)
        {
            let target = (t / self.grid_dt).floor() as u64;
            // Exact OU discretization: x' = a x + sqrt(1-a^2) * n, n ~ N(0, sigma^2).
            let a = (-self.grid_dt / correlation_time).exp();
            let diffusion = (1.0 - a * a).sqrt();
            while self.grid_index < target {
                let n = Vector3::new(
                    normal.sample(rng),
                    normal.sample(rng),
                    normal.sample(rng),
                );
                self.gust = self.gust * a + n * diffusion;
                self.grid_index += 1;
            }
        }
        self.field.mean_velocity + self.gust
    }
}

/// Buoyancy and gravity wrench in the body frame. The buoyant force acts at
/// the center of buoyancy and the weight at the center of gravity, so a cg
/// below cb yields a pendulum-like restoring torque under tilt.
pub fn restoring_wrench(
    state: &BodyState,
    inertia: &InertiaModel,
    buoyancy: &BuoyancyModel,
) -> ForceTorque {
    let to_body = state.attitude.inverse();
    let f_buoy = to_body * Vector3::new(0.0, 0.0, buoyancy.buoyant_force);
    let f_grav = to_body * Vector3::new(0.0, 0.0, -inertia.mass * buoyancy.gravity);
    ForceTorque {
        force: f_buoy + f_grav,
        torque: inertia.cb_offset.cross(&f_buoy) + inertia.cg_offset.cross(&f_grav),
    }
}

/// Diagonal damping wrench for an air-relative velocity: component i of the
/// output is `-(linear_i + quadratic_i * |u_i|) * u_i`.
pub fn damping_wrench(relative_velocity: &Vector6<f64>, coeffs: &DragCoefficients) -> ForceTorque {
    let mut out = Vector6::zeros();
    for i in 0..6 {
        let u = relative_velocity[i];
        out[i] = -(coeffs.linear[i] + coeffs.quadratic[i] * u.abs()) * u;
    }
    ForceTorque {
        force: Vector3::new(out[0], out[1], out[2]),
        torque: Vector3::new(out[3], out[4], out[5]),
    }
}

/// Gyroscopic coupling wrench: the standard rigid-body cross-product terms,
/// with mass and inertia augmented by the added-mass diagonal when present.
pub fn coriolis_wrench(state: &BodyState, inertia: &InertiaModel) -> ForceTorque {
    let m = inertia.linear_mass();
    let momentum = Vector3::new(
        m[0] * state.linear_velocity[0],
        m[1] * state.linear_velocity[1],
        m[2] * state.linear_velocity[2],
    );
    let angular_momentum = inertia.augmented_inertia() * state.angular_velocity;
    ForceTorque {
        force: -state.angular_velocity.cross(&momentum),
        torque: -state.angular_velocity.cross(&angular_momentum),
    }
}

/// Body-frame velocity relative to the surrounding air. The linear part is
/// the body velocity minus the wind rotated into the body frame; the angular
/// part is unchanged.
pub fn wind_relative_velocity(state: &BodyState, wind_world: Vector3<f64>) -> Vector6<f64> {
    let wind_body = state.attitude.inverse() * wind_world;
    let lin = state.linear_velocity - wind_body;
    Vector6::new(
        lin[0],
        lin[1],
        lin[2],
        state.angular_velocity[0],
        state.angular_velocity[1],
        state.angular_velocity[2],
    )
}

#[derive(Clone, Copy)]
struct Derivative {
    dp: Vector3<f64>,
    dq: Quaternion<f64>,
    dv: Vector3<f64>,
    dw: Vector3<f64>,
}

fn derivative(
    attitude: &Quaternion<f64>,
    v: &Vector3<f64>,
    w: &Vector3<f64>,
    accel: &Vector3<f64>,
    alpha: &Vector3<f64>,
) -> Derivative {
    // Normalize before rotating so intermediate RK4 stages stay consistent.
    let q = UnitQuaternion::from_quaternion(*attitude);
    Derivative {
        dp: q * v,
        dq: *attitude * Quaternion::from_parts(0.0, *w) * 0.5,
        dv: *accel,
        dw: *alpha,
    }
}

/// Advances the state by one fixed RK4 step under a wrench held constant over
/// the step. The quaternion is renormalized after the step.
pub fn step(
    state: &BodyState,
    total: &ForceTorque,
    inertia: &InertiaModel,
    dt: f64,
) -> Result<BodyState, DynamicsError> {
    debug_assert!(dt > 0.0 && dt <= 0.05, "dt must be in (0, 0.05]");
    let m = inertia.linear_mass();
    let accel = Vector3::new(
        total.force[0] / m[0],
        total.force[1] / m[1],
        total.force[2] / m[2],
    );
    let alpha = inertia
        .augmented_inertia()
        .try_inverse()
        .expect("inertia tensor is invertible")
        * total.torque;

    let q0 = *state.attitude.quaternion();
    let p0 = state.position;
    let v0 = state.linear_velocity;
    let w0 = state.angular_velocity;

    let k1 = derivative(&q0, &v0, &w0, &accel, &alpha);
    let k2 = derivative(
        &(q0 + k1.dq * (dt / 2.0)),
        &(v0 + k1.dv * (dt / 2.0)),
        &(w0 + k1.dw * (dt / 2.0)),
        &accel,
        &alpha,
    );
    let k3 = derivative(
        &(q0 + k2.dq * (dt / 2.0)),
        &(v0 + k2.dv * (dt / 2.0)),
        &(w0 + k2.dw * (dt / 2.0)),
        &accel,
        &alpha,
    );
    let k4 = derivative(
        &(q0 + k3.dq * dt),
        &(v0 + k3.dv * dt),
        &(w0 + k3.dw * dt),
        &accel,
        &alpha,
    );

    let position = p0 + (k1.dp + k2.dp * 2.0 + k3.dp * 2.0 + k4.dp) * (dt / 6.0);
    let raw_q = q0 + (k1.dq + k2.dq * 2.0 + k3.dq * 2.0 + k4.dq) * (dt / 6.0);
    let attitude = UnitQuaternion::from_quaternion(raw_q);
    let linear_velocity = v0 + (k1.dv + k2.dv * 2.0 + k3.dv * 2.0 + k4.dv) * (dt / 6.0);
    let angular_velocity = w0 + (k1.dw + k2.dw * 2.0 + k3.dw * 2.0 + k4.dw) * (dt / 6.0);

    let next = BodyState {
        position,
        attitude,
        linear_velocity,
        angular_velocity,
        time: state.time + dt,
    };
    if !next.is_finite() {
        return Err(DynamicsError::NonFiniteState { time: next.time });
    }
    Ok(next)
}
