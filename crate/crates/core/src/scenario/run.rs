//! The closed-loop simulation: sense -> guide -> control -> force sum ->
//! integrate -> energy account, at a fixed step, fully seeded.

use nalgebra::Vector3;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{AlgorithmChoice, ResolvedScenario, ScenarioError};
use crate::control::{wrap_angle, FlightController, Setpoint};
use crate::dynamics::{
    coriolis_wrench, damping_wrench, restoring_wrench, step, wind_relative_velocity, BodyState,
    BuoyancyModel, ForceTorque,
};
use crate::energy::{
    harvest_power, integrate_battery, power_draw, BatteryState, OperatingMode,
};
use crate::guidance::{bag_bearing, des_step, dga_step, DesState, DgaState, GuidanceError};
use crate::optics::{sense_frame, ReceiverPose};
use crate::propulsion::{allocate, pwm_to_thrust};

#[derive(Debug, Clone, Serialize)]
pub struct TrajectoryRow {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub roll: f64,
    pub pitch: f64,
    pub yaw: f64,
    pub pwm: Vec<f64>,
    pub intensity: f64,
    pub desired_yaw: f64,
    pub soc: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GuidanceRow {
    pub t: f64,
    pub desired_yaw: f64,
    pub intensity: f64,
    pub halt: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectralRow {
    pub t: f64,
    pub sensor: usize,
    pub peak_magnitude: f64,
    pub snr: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EnergyRow {
    pub t: f64,
    pub mode: String,
    pub draw_mw: f64,
    pub harvest_mw: f64,
    pub soc: f64,
}

/// Summary metrics for one run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunMetrics {
    pub name: String,
    pub seed: u64,
    pub success: bool,
    /// Integrated path length up to success (or the whole run on failure), m.
    pub path_length: f64,
    /// Time of first entry into the success radius, s.
    pub travel_time: Option<f64>,
    /// Closest 3D approach to the primary beacon, m.
    pub min_distance: Option<f64>,
    /// Energy drawn over the run, mWh.
    pub energy_consumed: f64,
    /// Half peak-to-peak pitch excursion, degrees.
    pub pitch_oscillation_amplitude_deg: f64,
    pub final_soc: f64,
    pub duration: f64,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub metrics: RunMetrics,
    pub trajectory: Vec<TrajectoryRow>,
    pub guidance: Vec<GuidanceRow>,
    pub spectral: Vec<SpectralRow>,
    pub energy: Vec<EnergyRow>,
    pub final_state: BodyState,
}

enum GuidanceState {
    Inactive,
    Bag,
    Des(DesState),
    Dga(DgaState),
}

/// Executes one scenario. Deterministic for a fixed (config, seed).
pub fn run(resolved: &ResolvedScenario) -> Result<RunOutput, ScenarioError> {
    let config = &resolved.config;
    let platform = &resolved.platform;
    let dt = config.dt;
    let steps = (config.max_duration / dt).round() as usize;

    let buoyancy = BuoyancyModel::with_mass_deficit(
        platform.inertia.mass,
        config.buoyancy_deficit_g / 1000.0,
    );
    buoyancy
        .validate()
        .map_err(|e| ScenarioError::Validation(e.to_string()))?;

    let start_yaw = config.start.yaw_deg.to_radians();
    let mut state = BodyState::at_rest(Vector3::from(config.start.position), start_yaw);
    if config.start.pitch_deg != 0.0 {
        state.attitude = nalgebra::UnitQuaternion::from_euler_angles(
            0.0,
            config.start.pitch_deg.to_radians(),
            start_yaw,
        );
    }

    let mut controller = FlightController::new(resolved.controller.clone(), platform);
    let mut wind = resolved.wind.sampler();
    let mut optics_rng = ChaCha8Rng::seed_from_u64(resolved.seed);
    let mut imu_rng = ChaCha8Rng::seed_from_u64(resolved.seed.wrapping_add(0x494d55));
    let imu_noise = rand_distr::Normal::new(
        0.0,
        config.guidance.imu_yaw_noise_deg.to_radians().max(1e-12),
    )
    .expect("imu noise std is finite");

    let mut battery = BatteryState {
        capacity_mah: config.energy.battery_capacity_mah,
        state_of_charge: config.energy.initial_soc,
    };

    let mut guidance_state = match config.algorithm {
        AlgorithmChoice::None => GuidanceState::Inactive,
        AlgorithmChoice::Bag => GuidanceState::Bag,
        AlgorithmChoice::Des => {
            let mut des = DesState::new(&resolved.dither);
            if config.guidance.dither.is_none() {
                des.theta_hat = start_yaw;
            }
            GuidanceState::Des(des)
        }
        AlgorithmChoice::Dga => {
            GuidanceState::Dga(DgaState::new(config.guidance.dga_window, start_yaw))
        }
    };
    let guidance_dt = resolved.guidance_interval as f64 * dt;
    let mode = match config.algorithm.as_algorithm() {
        Some(alg) => OperatingMode::Navigate(alg),
        None => OperatingMode::Hover,
    };

    let mut desired_yaw = start_yaw;
    let mut halt = false;
    let mut intensity = 0.0;

    let primary_beacon = resolved.beacons.first().map(|b| b.position);
    let mut metrics = RunMetrics {
        name: config.name.clone(),
        seed: resolved.seed,
        success: false,
        path_length: 0.0,
        travel_time: None,
        min_distance: primary_beacon.map(|b| (state.position - b).norm()),
        energy_consumed: 0.0,
        pitch_oscillation_amplitude_deg: 0.0,
        final_soc: battery.state_of_charge,
        duration: 0.0,
    };

    let mut trajectory = Vec::with_capacity(steps.min(200_000));
    let mut guidance_rows = Vec::new();
    let mut spectral_rows = Vec::new();
    let mut energy_rows = Vec::new();
    let mut pitch_min = f64::INFINITY;
    let mut pitch_max = f64::NEG_INFINITY;

    for k in 0..steps {
        let t = state.time;

        // Sense and guide at the guidance cadence.
        if !matches!(guidance_state, GuidanceState::Inactive) && k % resolved.guidance_interval == 0
        {
            let pose = ReceiverPose {
                position: state.position,
                attitude: state.attitude,
            };
            let readings = sense_frame(
                &resolved.beacons,
                config.ambient_lux,
                &resolved.array,
                &pose,
                t,
                resolved.beacons[0].f_mod,
                &mut optics_rng,
            )
            .map_err(|e| ScenarioError::Validation(e.to_string()))?;
            for (i, r) in readings.iter().enumerate() {
                spectral_rows.push(SpectralRow {
                    t,
                    sensor: i,
                    peak_magnitude: r.peak_magnitude,
                    snr: r.snr,
                });
            }
            match &mut guidance_state {
                GuidanceState::Inactive => {}
                GuidanceState::Bag => match bag_bearing(&readings, &resolved.array) {
                    Ok(bearing) => {
                        desired_yaw = wrap_angle(state.yaw() + bearing);
                        halt = false;
                    }
                    Err(GuidanceError::NoSignal) => halt = true,
                    Err(_) => {} // degenerate vector: hold the last heading
                },
                GuidanceState::Des(des) => {
                    intensity = readings[0].peak_magnitude;
                    let (psi, next) = des_step(intensity, t, &resolved.dither, *des, guidance_dt);
                    *des = next;
                    desired_yaw = psi;
                    halt = false;
                }
                GuidanceState::Dga(dga) => {
                    intensity = readings[0].peak_magnitude;
                    let measured_heading =
                        state.yaw() + rand_distr::Distribution::sample(&imu_noise, &mut imu_rng);
                    desired_yaw = dga_step(
                        intensity,
                        config.forward_speed,
                        measured_heading,
                        dga,
                        guidance_dt,
                    );
                    halt = false;
                }
            }
            if matches!(guidance_state, GuidanceState::Bag) {
                intensity = readings
                    .iter()
                    .map(|r| r.peak_magnitude)
                    .fold(0.0, f64::max);
            }
            guidance_rows.push(GuidanceRow {
                t,
                desired_yaw,
                intensity,
                halt,
            });
        }

        // Control.
        let setpoint = Setpoint {
            altitude: config.altitude,
            yaw: desired_yaw,
            forward_speed: if halt { 0.0 } else { config.forward_speed },
        };
        let command = controller.control_step(&state, &setpoint, dt);
        let thrusts: Vec<f64> = command
            .pwm
            .iter()
            .map(|&p| pwm_to_thrust(p, &platform.thrust_curve).unwrap_or(0.0))
            .collect();
        let propulsion = allocate(&thrusts, &platform.allocation)
            .map_err(|e| ScenarioError::Validation(e.to_string()))?;

        // Force sum and integration.
        let wind_now = wind.velocity(t);
        let relative = wind_relative_velocity(&state, wind_now);
        let total: ForceTorque = restoring_wrench(&state, &platform.inertia, &buoyancy)
            + propulsion
            + damping_wrench(&relative, &platform.drag)
            + coriolis_wrench(&state, &platform.inertia);
        state = step(&state, &total, &platform.inertia, dt)
            .map_err(|_| ScenarioError::NonFinite { time: t })?;

        // Ground plane at z = 0: no penetration, upward velocity only.
        if state.position[2] < 0.0 {
            state.position[2] = 0.0;
            let mut world_v = state.world_velocity();
            if world_v[2] < 0.0 {
                world_v[2] = 0.0;
                state.linear_velocity = state.attitude.inverse() * world_v;
            }
        }

        // Energy accounting.
        let draw = power_draw(mode, &resolved.budget);
        let harvest = harvest_power(config.ambient_lux, &resolved.harvest);
        battery = integrate_battery(battery, harvest - draw, dt);
        metrics.energy_consumed += draw * dt / 3600.0;
        if k % 100 == 0 {
            energy_rows.push(EnergyRow {
                t: state.time,
                mode: mode_name(mode),
                draw_mw: draw,
                harvest_mw: harvest,
                soc: battery.state_of_charge,
            });
        }

        // Metrics.
        let moved = (state.position - Vector3::from(trajectory_last_position(&trajectory, config)))
            .norm();
        metrics.path_length += moved;
        let pitch = state.pitch();
        pitch_min = pitch_min.min(pitch);
        pitch_max = pitch_max.max(pitch);

        trajectory.push(TrajectoryRow {
            t: state.time,
            x: state.position[0],
            y: state.position[1],
            z: state.position[2],
            roll: state.roll(),
            pitch,
            yaw: state.yaw(),
            pwm: command.pwm.clone(),
            intensity,
            desired_yaw,
            soc: battery.state_of_charge,
        });

        if let Some(beacon) = primary_beacon {
            let distance = (state.position - beacon).norm();
            if metrics.min_distance.map_or(true, |d| distance < d) {
                metrics.min_distance = Some(distance);
            }
            if distance <= config.success_radius && metrics.travel_time.is_none() {
                metrics.success = true;
                metrics.travel_time = Some(state.time);
                break;
            }
        }
    }

    metrics.duration = state.time;
    metrics.final_soc = battery.state_of_charge;
    if pitch_max > pitch_min {
        metrics.pitch_oscillation_amplitude_deg = (pitch_max - pitch_min).to_degrees() / 2.0;
    }

    Ok(RunOutput {
        metrics,
        trajectory,
        guidance: guidance_rows,
        spectral: spectral_rows,
        energy: energy_rows,
        final_state: state,
    })
}

fn mode_name(mode: OperatingMode) -> String {
    match mode {
        OperatingMode::Idle => "idle".into(),
        OperatingMode::IdleTx => "idle_tx".into(),
        OperatingMode::Hover => "hover".into(),
        OperatingMode::Navigate(alg) => format!("navigate_{alg}"),
        OperatingMode::Fly => "fly".into(),
    }
}

fn trajectory_last_position(
    trajectory: &[TrajectoryRow],
    config: &super::ScenarioConfig,
) -> [f64; 3] {
    trajectory
        .last()
        .map(|row| [row.x, row.y, row.z])
        .unwrap_or(config.start.position)
}
