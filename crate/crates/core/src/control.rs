//! Cascaded PID flight controller.
//!
//! Three axes are actively controlled: altitude (position loop feeding a
//! climb-rate loop), yaw (angle loop feeding a rate loop), and forward speed
//! (a single velocity loop). Roll and pitch are left to the passive pendulum
//! stability of the buoyant hull. The wrench demand (Fx, Fz, Mz) is mapped to
//! per-rotor thrusts through the pseudo-inverse of the platform's allocation
//! matrix restricted to those three rows, then converted to PWM.

use nalgebra::{DMatrix, Vector3};
use serde::{Deserialize, Serialize};

use crate::dynamics::BodyState;
use crate::platform::PlatformConfig;
use crate::propulsion::thrust_to_pwm;

/// Wraps an angle to (-pi, pi].
pub fn wrap_angle(angle: f64) -> f64 {
    let two_pi = std::f64::consts::TAU;
    let mut a = angle % two_pi;
    if a <= -std::f64::consts::PI {
        a += two_pi;
    } else if a > std::f64::consts::PI {
        a -= two_pi;
    }
    a
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PidGains {
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
    /// Symmetric output clamp.
    pub output_limit: f64,
    /// Clamp on the integral contribution (anti-windup).
    pub integrator_limit: f64,
}

impl PidGains {
    pub fn p(kp: f64, output_limit: f64) -> Self {
        Self {
            kp,
            ki: 0.0,
            kd: 0.0,
            output_limit,
            integrator_limit: output_limit,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.kp < 0.0 || self.ki < 0.0 || self.kd < 0.0 {
            return Err("PID gains must be non-negative".into());
        }
        if !(self.output_limit > 0.0) || !(self.integrator_limit > 0.0) {
            return Err("PID limits must be positive".into());
        }
        Ok(())
    }
}

/// PID internal state: integral contribution (in output units) and the
/// previous measurement for derivative-on-measurement.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct PidState {
    pub integral: f64,
    pub prev_measurement: Option<f64>,
}

/// One PID update. The derivative acts on the measurement, not the error, so
/// setpoint steps do not kick the output; the integral contribution is
/// clamped at the integrator limit.
pub fn pid_step(
    error: f64,
    measurement: f64,
    state: PidState,
    gains: &PidGains,
    dt: f64,
) -> (f64, PidState) {
    debug_assert!(dt > 0.0);
    let integral = (state.integral + gains.ki * error * dt)
        .clamp(-gains.integrator_limit, gains.integrator_limit);
    let derivative = match state.prev_measurement {
        Some(prev) => -(measurement - prev) / dt,
        None => 0.0,
    };
    let output =
        (gains.kp * error + integral + gains.kd * derivative).clamp(-gains.output_limit, gains.output_limit);
    (
        output,
        PidState {
            integral,
            prev_measurement: Some(measurement),
        },
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControllerConfig {
    /// Altitude position loop: m error to m/s climb-rate setpoint.
    pub altitude_outer: PidGains,
    /// Climb-rate loop: m/s error to vertical force demand (N).
    pub altitude_inner: PidGains,
    /// Yaw angle loop: rad error to rad/s rate setpoint.
    pub yaw_outer: PidGains,
    /// Yaw rate loop: rad/s error to yaw moment demand (N·m).
    pub yaw_inner: PidGains,
    /// Forward-speed loop: m/s error to forward force demand (N).
    pub forward_speed: PidGains,
    /// Control loop rate (Hz).
    pub loop_rate: f64,
}

impl ControllerConfig {
    pub fn validate(&self) -> Result<(), String> {
        for (name, gains) in [
            ("altitude_outer", &self.altitude_outer),
            ("altitude_inner", &self.altitude_inner),
            ("yaw_outer", &self.yaw_outer),
            ("yaw_inner", &self.yaw_inner),
            ("forward_speed", &self.forward_speed),
        ] {
            gains.validate().map_err(|e| format!("{name}: {e}"))?;
        }
        if !(50.0..=500.0).contains(&self.loop_rate) {
            return Err(format!(
                "loop_rate must be within [50, 500] Hz, got {}",
                self.loop_rate
            ));
        }
        Ok(())
    }
}

impl Default for ControllerConfig {
    /// Gains tuned in-simulator against the lift-rotor preset; committed with
    /// the step-response regression tests. Demand limits match that preset's
    /// wrench authority; `for_platform` rescales them for other presets.
    fn default() -> Self {
        Self {
            altitude_outer: PidGains {
                kp: 0.45,
                ki: 0.0,
                kd: 0.0,
                output_limit: 0.13,
                integrator_limit: 0.10,
            },
            altitude_inner: PidGains {
                kp: 2.2,
                ki: 0.8,
                kd: 0.0,
                output_limit: 0.62,
                integrator_limit: 0.30,
            },
            yaw_outer: PidGains {
                kp: 1.4,
                ki: 0.0,
                kd: 0.0,
                output_limit: 0.9,
                integrator_limit: 0.3,
            },
            yaw_inner: PidGains {
                kp: 0.06,
                ki: 0.015,
                kd: 0.0,
                output_limit: 0.0088,
                integrator_limit: 0.0044,
            },
            forward_speed: PidGains {
                kp: 0.9,
                ki: 0.30,
                kd: 0.0,
                output_limit: 0.32,
                integrator_limit: 0.25,
            },
            loop_rate: 100.0,
        }
    }
}

impl ControllerConfig {
    /// The default gain structure with the wrench-demand limits set from the
    /// platform's own actuation authority, so no loop can out-shout the
    /// others in the mixer beyond what the hardware could deliver. The yaw
    /// moment is capped well below full authority: hard one-sided yaw
    /// commands also inject forward thrust, which a brakeless vehicle cannot
    /// shed.
    pub fn for_platform(platform: &PlatformConfig) -> Self {
        let mut config = Self::default();
        let t_max = platform.max_rotor_thrust();
        let b = platform.allocation.matrix();
        let axis_cap = |row: usize| -> f64 {
            let pos: f64 = (0..b.ncols()).map(|j| b[(row, j)].max(0.0) * t_max).sum();
            let neg: f64 = (0..b.ncols()).map(|j| (-b[(row, j)]).max(0.0) * t_max).sum();
            pos.max(neg)
        };
        let f_x = axis_cap(0);
        let f_z = axis_cap(2);
        let m_z = 0.2 * axis_cap(5);
        config.forward_speed.output_limit = f_x;
        config.forward_speed.integrator_limit = 0.8 * f_x;
        config.altitude_inner.output_limit = f_z;
        config.altitude_inner.integrator_limit = 0.5 * f_z;
        config.yaw_inner.output_limit = m_z;
        config.yaw_inner.integrator_limit = 0.5 * m_z;
        config
    }

    /// A stiffer attitude profile for gusty outdoor work: triple the yaw
    /// loop bandwidth and double the usable yaw authority, at the cost of
    /// more forward-thrust injection from one-sided yaw commands.
    pub fn for_platform_windward(platform: &PlatformConfig) -> Self {
        let mut config = Self::for_platform(platform);
        config.yaw_outer.kp = 2.8;
        config.yaw_inner.kp = 0.18;
        config.yaw_inner.ki = 0.045;
        config.yaw_inner.output_limit *= 3.0;
        config.yaw_inner.integrator_limit *= 3.0;
        config
    }
}

/// Commanded targets for the three controlled axes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Setpoint {
    pub altitude: f64,
    /// Wrapped to (-pi, pi].
    pub yaw: f64,
    pub forward_speed: f64,
}

impl Setpoint {
    pub fn validate(&self, platform: &PlatformConfig) -> Result<(), String> {
        if !(self.altitude.is_finite() && self.yaw.is_finite() && self.forward_speed.is_finite()) {
            return Err("setpoint components must be finite".into());
        }
        if self.forward_speed.abs() > platform.max_forward_speed {
            return Err(format!(
                "forward speed {} exceeds platform envelope {}",
                self.forward_speed, platform.max_forward_speed
            ));
        }
        Ok(())
    }
}

/// Per-rotor PWM command, with a flag set when any channel clamped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MotorCommand {
    pub pwm: Vec<f64>,
    pub saturated: bool,
}

/// The closed-loop controller. Owns the PID states for one simulation run.
#[derive(Debug, Clone)]
pub struct FlightController {
    config: ControllerConfig,
    /// Pseudo-inverse of the (Fx, Fz, Mz) rows of the allocation matrix.
    mixer: DMatrix<f64>,
    /// Achievable wrench box per controlled axis: (most negative, most
    /// positive) over admissible thrusts. Demands are clamped here first so
    /// an unsatisfiable axis (e.g. braking with forward-only rotors) cannot
    /// pin the others to zero through the least-squares mix.
    demand_box: [(f64, f64); 3],
    thrust_curve: crate::propulsion::ThrustCurve,
    max_thrust: f64,
    altitude_outer: PidState,
    altitude_inner: PidState,
    yaw_outer: PidState,
    yaw_inner: PidState,
    forward: PidState,
}

impl FlightController {
    pub fn new(config: ControllerConfig, platform: &PlatformConfig) -> Self {
        let b = platform.allocation.matrix();
        let n = b.ncols();
        let t_max = platform.max_rotor_thrust();
        let mut b_ctrl = DMatrix::zeros(3, n);
        for j in 0..n {
            b_ctrl[(0, j)] = b[(0, j)]; // Fx
            b_ctrl[(1, j)] = b[(2, j)]; // Fz
            b_ctrl[(2, j)] = b[(5, j)]; // Mz
        }
        let mut demand_box = [(0.0, 0.0); 3];
        for (row, slot) in demand_box.iter_mut().enumerate() {
            let pos: f64 = (0..n).map(|j| b_ctrl[(row, j)].max(0.0) * t_max).sum();
            let neg: f64 = (0..n).map(|j| (-b_ctrl[(row, j)]).max(0.0) * t_max).sum();
            *slot = (-neg, pos);
        }
        let mixer = b_ctrl
            .svd(true, true)
            .pseudo_inverse(1e-10)
            .expect("pseudo-inverse of controllable sub-block");
        Self {
            config,
            mixer,
            demand_box,
            thrust_curve: platform.thrust_curve,
            max_thrust: t_max,
            altitude_outer: PidState::default(),
            altitude_inner: PidState::default(),
            yaw_outer: PidState::default(),
            yaw_inner: PidState::default(),
            forward: PidState::default(),
        }
    }

    pub fn reset(&mut self) {
        self.altitude_outer = PidState::default();
        self.altitude_inner = PidState::default();
        self.yaw_outer = PidState::default();
        self.yaw_inner = PidState::default();
        self.forward = PidState::default();
    }

    pub fn config(&self) -> &ControllerConfig {
        &self.config
    }

    /// Wrench demand (Fx, Fz, Mz) for the current state and setpoint.
    fn wrench_demand(&mut self, state: &BodyState, setpoint: &Setpoint, dt: f64) -> Vector3<f64> {
        // Altitude cascade.
        let altitude = state.position[2];
        let climb_rate = state.world_velocity()[2];
        let (climb_sp, alt_outer) = pid_step(
            setpoint.altitude - altitude,
            altitude,
            self.altitude_outer,
            &self.config.altitude_outer,
            dt,
        );
        self.altitude_outer = alt_outer;
        let (f_z, alt_inner) = pid_step(
            climb_sp - climb_rate,
            climb_rate,
            self.altitude_inner,
            &self.config.altitude_inner,
            dt,
        );
        self.altitude_inner = alt_inner;

        // Yaw cascade on the wrapped error.
        let yaw = state.yaw();
        let yaw_rate = state.angular_velocity[2];
        let (rate_sp, yaw_outer) = pid_step(
            wrap_angle(setpoint.yaw - yaw),
            0.0, // angle measurement handled through the wrapped error
            self.yaw_outer,
            &self.config.yaw_outer,
            dt,
        );
        self.yaw_outer = yaw_outer;
        let (m_z, yaw_inner) = pid_step(
            rate_sp - yaw_rate,
            yaw_rate,
            self.yaw_inner,
            &self.config.yaw_inner,
            dt,
        );
        self.yaw_inner = yaw_inner;

        // Forward-speed loop on body-x velocity.
        let vx = state.linear_velocity[0];
        let (f_x, fwd) = pid_step(
            setpoint.forward_speed - vx,
            vx,
            self.forward,
            &self.config.forward_speed,
            dt,
        );
        self.forward = fwd;

        Vector3::new(f_x, f_z, m_z)
    }

    /// One control update: state + setpoint to per-rotor PWM.
    pub fn control_step(&mut self, state: &BodyState, setpoint: &Setpoint, dt: f64) -> MotorCommand {
        let mut demand = self.wrench_demand(state, setpoint, dt);
        for i in 0..3 {
            demand[i] = demand[i].clamp(self.demand_box[i].0, self.demand_box[i].1);
        }
        let thrusts = &self.mixer * demand;
        let mut saturated = false;
        let pwm = thrusts
            .iter()
            .map(|&t| {
                let clamped = t.clamp(0.0, self.max_thrust);
                if (clamped - t).abs() > 1e-12 {
                    saturated = true;
                }
                let p = thrust_to_pwm(clamped, &self.thrust_curve).unwrap_or(0.0);
                if !(0.0..=1.0).contains(&p) {
                    saturated = true;
                }
                p.clamp(0.0, 1.0)
            })
            .collect();
        MotorCommand { pwm, saturated }
    }
}
