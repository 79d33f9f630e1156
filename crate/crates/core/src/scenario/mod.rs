//! Scenario configuration: schema, parsing (JSON or TOML), validation, and
//! resolution into the runtime objects the simulation loop consumes.

mod logs;
mod run;
mod studies;

pub use logs::{
    energy_csv, guidance_csv, spectral_csv, trajectory_csv, write_outputs, OutputSpec,
};
pub use run::{run, EnergyRow, GuidanceRow, RunMetrics, RunOutput, SpectralRow, TrajectoryRow};
pub use studies::{
    batch, bearing_error_sweep, mounting_pitch_trace, mounting_stability_study, settling_metrics,
    tune_sweep, yaw_step_response, BatchRow, BearingSweepRow, Environment, MountingKind,
    MountingVariant, TuneRow,
};

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::control::ControllerConfig;
use crate::dynamics::{GustModel, WindField};
use crate::energy::{Algorithm, HarvestModel, PowerBudget};
use crate::guidance::DitherConfig;
use crate::optics::{BeaconConfig, PhotodiodeArray};
use crate::platform::{PlatformConfig, PlatformKind};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("validation error: {0}")]
    Validation(String),
    #[error("numerical blow-up at t = {time} s")]
    NonFinite { time: f64 },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ControllerProfile {
    /// Tuned for calm indoor flight.
    #[default]
    Default,
    /// Stiffer attitude loops for gusty outdoor work.
    Windward,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum AlgorithmChoice {
    Bag,
    Des,
    Dga,
    #[default]
    None,
}

impl AlgorithmChoice {
    pub fn as_algorithm(&self) -> Option<Algorithm> {
        match self {
            AlgorithmChoice::Bag => Some(Algorithm::Bag),
            AlgorithmChoice::Des => Some(Algorithm::Des),
            AlgorithmChoice::Dga => Some(Algorithm::Dga),
            AlgorithmChoice::None => None,
        }
    }
}

fn default_schema_version() -> u32 {
    SCHEMA_VERSION
}
fn default_name() -> String {
    "scenario".into()
}
fn default_dt() -> f64 {
    0.01
}
fn default_max_duration() -> f64 {
    120.0
}
fn default_success_radius() -> f64 {
    1.0
}
fn default_forward_speed() -> f64 {
    0.5
}
fn default_altitude() -> f64 {
    0.5
}
fn default_deficit() -> f64 {
    2.0
}
fn default_ambient() -> f64 {
    10.0
}
fn default_guidance_rate() -> f64 {
    10.0
}
fn default_dga_window() -> usize {
    30
}
fn default_intensity() -> f64 {
    1500.0
}
fn default_f_mod() -> f64 {
    150.0
}
fn default_duty() -> f64 {
    0.5
}
fn default_half_power() -> f64 {
    60.0
}
fn default_fov() -> f64 {
    60.0
}
fn default_reflection_factor() -> f64 {
    0.3
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StartPose {
    #[serde(default)]
    pub position: [f64; 3],
    #[serde(default)]
    pub yaw_deg: f64,
    /// Initial pitch perturbation, used by the stability studies.
    #[serde(default)]
    pub pitch_deg: f64,
}

impl Default for StartPose {
    fn default() -> Self {
        Self {
            position: [0.0, 0.0, 0.5],
            yaw_deg: 0.0,
            pitch_deg: 0.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BeaconSpec {
    pub position: [f64; 3],
    /// Defaults to pointing from the beacon toward the start position.
    #[serde(default)]
    pub boresight: Option<[f64; 3]>,
    #[serde(default = "default_intensity")]
    pub intensity_at_1m: f64,
    #[serde(default = "default_f_mod")]
    pub f_mod: f64,
    #[serde(default = "default_duty")]
    pub duty: f64,
    #[serde(default = "default_half_power")]
    pub half_power_angle_deg: f64,
    #[serde(default = "default_fov")]
    pub fov_half_angle_deg: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
pub struct WindSpec {
    #[serde(default)]
    pub mean: [f64; 3],
    #[serde(default)]
    pub gust: Option<GustSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GustSpec {
    pub sigma: f64,
    pub correlation_time: f64,
    /// Defaults to a stream derived from the scenario seed.
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
pub struct ArraySpec {
    /// Defaults to 8 for BAG, 1 for DES/DGA and idle scenarios.
    #[serde(default)]
    pub count: Option<usize>,
    #[serde(default)]
    pub noise_std: Option<f64>,
    #[serde(default)]
    pub responsivity: Option<f64>,
    #[serde(default)]
    pub f_sample: Option<f64>,
    #[serde(default)]
    pub n_fft: Option<usize>,
    #[serde(default)]
    pub search_window: Option<usize>,
    #[serde(default)]
    pub detection_snr: Option<f64>,
    #[serde(default)]
    pub fov_half_angle_deg: Option<f64>,
    #[serde(default)]
    pub response_exponent: Option<f64>,
}

impl ArraySpec {
    pub fn resolve(&self, algorithm: AlgorithmChoice) -> PhotodiodeArray {
        let default_count = match algorithm {
            AlgorithmChoice::Bag => 8,
            AlgorithmChoice::Des | AlgorithmChoice::Dga => 1,
            AlgorithmChoice::None => 1,
        };
        let base = PhotodiodeArray::default();
        PhotodiodeArray {
            count: self.count.unwrap_or(default_count),
            fov_half_angle_deg: self.fov_half_angle_deg.unwrap_or(base.fov_half_angle_deg),
            response_exponent: self.response_exponent.unwrap_or(base.response_exponent),
            responsivity: self.responsivity.unwrap_or(base.responsivity),
            noise_std: self.noise_std.unwrap_or(base.noise_std),
            f_sample: self.f_sample.unwrap_or(base.f_sample),
            n_fft: self.n_fft.unwrap_or(base.n_fft),
            search_window: self.search_window.unwrap_or(base.search_window),
            detection_snr: self.detection_snr.unwrap_or(base.detection_snr),
        }
    }
}

/// Reflective-environment preset: one virtual beacon mirrored across a wall
/// plane at a fraction of the source intensity.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReflectionSpec {
    pub wall_point: [f64; 3],
    pub wall_normal: [f64; 3],
    #[serde(default = "default_reflection_factor")]
    pub intensity_factor: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GuidanceSpec {
    #[serde(default = "default_guidance_rate")]
    pub rate_hz: f64,
    #[serde(default)]
    pub dither: Option<DitherConfig>,
    #[serde(default = "default_dga_window")]
    pub dga_window: usize,
    /// Standard deviation of the heading estimate fed to dead reckoning
    /// (degrees). Models IMU attitude noise; also what keeps the gradient
    /// history from collapsing onto a line during straight flight.
    #[serde(default = "default_imu_yaw_noise")]
    pub imu_yaw_noise_deg: f64,
}

fn default_imu_yaw_noise() -> f64 {
    3.0
}

impl Default for GuidanceSpec {
    fn default() -> Self {
        Self {
            rate_hz: default_guidance_rate(),
            dither: None,
            dga_window: default_dga_window(),
            imu_yaw_noise_deg: default_imu_yaw_noise(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnergySpec {
    #[serde(default)]
    pub budget: Option<PowerBudget>,
    #[serde(default)]
    pub harvest: Option<HarvestModel>,
    #[serde(default = "default_battery_capacity")]
    pub battery_capacity_mah: f64,
    #[serde(default = "default_initial_soc")]
    pub initial_soc: f64,
}

fn default_battery_capacity() -> f64 {
    250.0
}
fn default_initial_soc() -> f64 {
    1.0
}

impl Default for EnergySpec {
    fn default() -> Self {
        Self {
            budget: None,
            harvest: None,
            battery_capacity_mah: default_battery_capacity(),
            initial_soc: default_initial_soc(),
        }
    }
}

/// The full scenario schema as it appears on disk.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default = "default_schema_version")]
    pub schema_version: u32,
    #[serde(default = "default_name")]
    pub name: String,
    /// Mandatory: every run is seeded for reproducibility.
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default = "PlatformKind::default_kind")]
    pub platform: PlatformKind,
    #[serde(default)]
    pub algorithm: AlgorithmChoice,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_max_duration")]
    pub max_duration: f64,
    #[serde(default = "default_success_radius")]
    pub success_radius: f64,
    #[serde(default = "default_forward_speed")]
    pub forward_speed: f64,
    #[serde(default = "default_altitude")]
    pub altitude: f64,
    /// Net buoyancy shortfall in grams of mass.
    #[serde(default = "default_deficit")]
    pub buoyancy_deficit_g: f64,
    /// Unmodulated ambient illuminance (lux).
    #[serde(default = "default_ambient")]
    pub ambient_lux: f64,
    #[serde(default)]
    pub start: StartPose,
    #[serde(default)]
    pub beacons: Vec<BeaconSpec>,
    #[serde(default)]
    pub wind: WindSpec,
    #[serde(default)]
    pub array: ArraySpec,
    #[serde(default)]
    pub reflection: Option<ReflectionSpec>,
    #[serde(default)]
    pub controller: Option<ControllerConfig>,
    /// Gain profile used when `controller` is not given explicitly.
    #[serde(default)]
    pub controller_profile: ControllerProfile,
    #[serde(default)]
    pub guidance: GuidanceSpec,
    #[serde(default)]
    pub energy: EnergySpec,
    #[serde(default)]
    pub output: Option<OutputSpec>,
}

impl PlatformKind {
    fn default_kind() -> Self {
        PlatformKind::GtMab
    }
}

impl ScenarioConfig {
    /// A minimal valid config, used programmatically by studies and tests.
    pub fn base(name: &str, seed: u64) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            name: name.into(),
            seed: Some(seed),
            platform: PlatformKind::GtMab,
            algorithm: AlgorithmChoice::None,
            dt: default_dt(),
            max_duration: default_max_duration(),
            success_radius: default_success_radius(),
            forward_speed: default_forward_speed(),
            altitude: default_altitude(),
            buoyancy_deficit_g: default_deficit(),
            ambient_lux: default_ambient(),
            start: StartPose::default(),
            beacons: Vec::new(),
            wind: WindSpec::default(),
            array: ArraySpec::default(),
            reflection: None,
            controller: None,
            controller_profile: ControllerProfile::default(),
            guidance: GuidanceSpec::default(),
            energy: EnergySpec::default(),
            output: None,
        }
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        let fail = |msg: String| Err(ScenarioError::Validation(msg));
        if self.schema_version != SCHEMA_VERSION {
            return fail(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            ));
        }
        let finite_fields: [(&str, f64); 8] = [
            ("dt", self.dt),
            ("max_duration", self.max_duration),
            ("success_radius", self.success_radius),
            ("forward_speed", self.forward_speed),
            ("altitude", self.altitude),
            ("buoyancy_deficit_g", self.buoyancy_deficit_g),
            ("ambient_lux", self.ambient_lux),
            ("guidance.rate_hz", self.guidance.rate_hz),
        ];
        for (name, value) in finite_fields {
            if !value.is_finite() {
                return fail(format!("{name} must be finite"));
            }
        }
        let finite_vecs = [
            ("start.position", self.start.position),
            ("wind.mean", self.wind.mean),
        ];
        for (name, value) in finite_vecs {
            if value.iter().any(|c| !c.is_finite()) {
                return fail(format!("{name} must be finite"));
            }
        }
        if !self.start.yaw_deg.is_finite() || !self.start.pitch_deg.is_finite() {
            return fail("start attitude must be finite".into());
        }
        if let Some(g) = &self.wind.gust {
            if !g.sigma.is_finite() || !g.correlation_time.is_finite() {
                return fail("gust parameters must be finite".into());
            }
        }
        if self.seed.is_none() {
            return fail("seed is required: determinism is mandatory".into());
        }
        if !(self.success_radius > 0.0) {
            return fail(format!(
                "success_radius must be positive, got {}",
                self.success_radius
            ));
        }
        if !(self.dt > 0.0 && self.dt <= 0.05) {
            return fail(format!("dt must be in (0, 0.05], got {}", self.dt));
        }
        if !(self.max_duration > 0.0) {
            return fail("max_duration must be positive".into());
        }
        if self.buoyancy_deficit_g < 0.0 {
            return fail("buoyancy_deficit_g must be non-negative".into());
        }
        if self.ambient_lux < 0.0 {
            return fail("ambient_lux must be non-negative".into());
        }
        if self.guidance.rate_hz <= 0.0 {
            return fail("guidance rate must be positive".into());
        }
        if self.algorithm != AlgorithmChoice::None && self.beacons.is_empty() {
            return fail("navigation scenarios require at least one beacon".into());
        }
        if let Some(r) = &self.reflection {
            let n = Vector3::from(r.wall_normal);
            if n.norm() < 1e-9 {
                return fail("reflection wall_normal must be non-zero".into());
            }
            if !(0.0..=1.0).contains(&r.intensity_factor) {
                return fail("reflection intensity_factor must be in [0, 1]".into());
            }
        }
        self.resolve().map(|_| ())
    }

    /// Builds the runtime objects; performs the remaining invariant checks.
    pub fn resolve(&self) -> Result<ResolvedScenario, ScenarioError> {
        let seed = self
            .seed
            .ok_or_else(|| ScenarioError::Validation("seed is required".into()))?;
        let platform = PlatformConfig::preset(self.platform);
        platform
            .inertia
            .validate()
            .map_err(|e| ScenarioError::Validation(e.to_string()))?;
        platform
            .drag
            .validate()
            .map_err(|e| ScenarioError::Validation(e.to_string()))?;
        platform
            .layout
            .validate()
            .map_err(|e| ScenarioError::Validation(e.to_string()))?;
        platform
            .thrust_curve
            .validate()
            .map_err(|e| ScenarioError::Validation(e.to_string()))?;

        let controller = self.controller.clone().unwrap_or_else(|| {
            match self.controller_profile {
                ControllerProfile::Default => ControllerConfig::for_platform(&platform),
                ControllerProfile::Windward => {
                    ControllerConfig::for_platform_windward(&platform)
                }
            }
        });
        controller
            .validate()
            .map_err(ScenarioError::Validation)?;
        let loop_dt = 1.0 / controller.loop_rate;
        if (loop_dt - self.dt).abs() > 1e-9 {
            return Err(ScenarioError::Validation(format!(
                "dt {} does not match controller loop rate {} Hz",
                self.dt, controller.loop_rate
            )));
        }

        let setpoint = crate::control::Setpoint {
            altitude: self.altitude,
            yaw: self.start.yaw_deg.to_radians(),
            forward_speed: self.forward_speed,
        };
        setpoint
            .validate(&platform)
            .map_err(ScenarioError::Validation)?;

        let start_position = Vector3::from(self.start.position);
        let mut beacons = Vec::new();
        for spec in &self.beacons {
            let position = Vector3::from(spec.position);
            let boresight = match spec.boresight {
                Some(v) => {
                    let v = Vector3::from(v);
                    if v.norm() < 1e-9 {
                        return Err(ScenarioError::Validation(
                            "beacon boresight must be non-zero".into(),
                        ));
                    }
                    v.normalize()
                }
                None => {
                    let toward = start_position - position;
                    if toward.norm() < 1e-9 {
                        return Err(ScenarioError::Validation(
                            "beacon coincides with the start position".into(),
                        ));
                    }
                    toward.normalize()
                }
            };
            let beacon = BeaconConfig {
                position,
                boresight,
                intensity_at_1m: spec.intensity_at_1m,
                f_mod: spec.f_mod,
                duty: spec.duty,
                half_power_angle_deg: spec.half_power_angle_deg,
                fov_half_angle_deg: spec.fov_half_angle_deg,
            };
            beacon
                .validate()
                .map_err(|e| ScenarioError::Validation(e.to_string()))?;
            beacons.push(beacon);
        }
        // Mirror beacons across the reflective wall.
        if let Some(reflection) = &self.reflection {
            let w = Vector3::from(reflection.wall_point);
            let n = Vector3::from(reflection.wall_normal).normalize();
            let sources: Vec<BeaconConfig> = beacons.clone();
            for src in sources {
                let offset = src.position - w;
                let mirrored_pos = src.position - n * (2.0 * offset.dot(&n));
                let mirrored_bore = src.boresight - n * (2.0 * src.boresight.dot(&n));
                beacons.push(BeaconConfig {
                    position: mirrored_pos,
                    boresight: mirrored_bore,
                    intensity_at_1m: src.intensity_at_1m * reflection.intensity_factor,
                    ..src
                });
            }
        }

        let array = self.array.resolve(self.algorithm);
        array
            .validate(&beacons)
            .map_err(|e| ScenarioError::Validation(e.to_string()))?;

        let guidance_interval = (1.0 / (self.guidance.rate_hz * self.dt)).round().max(1.0) as usize;

        let wind = WindField {
            mean_velocity: Vector3::from(self.wind.mean),
            gust_model: match &self.wind.gust {
                None => GustModel::None,
                Some(g) => {
                    if g.sigma < 0.0 || g.correlation_time <= 0.0 {
                        return Err(ScenarioError::Validation(
                            "gust sigma must be >= 0 and correlation_time > 0".into(),
                        ));
                    }
                    GustModel::OuProcess {
                        sigma: g.sigma,
                        correlation_time: g.correlation_time,
                        seed: g.seed.unwrap_or(seed.wrapping_add(0x57494e44)),
                    }
                }
            },
        };

        let budget = self.energy.budget.clone().unwrap_or_default();
        budget
            .validate()
            .map_err(|e| ScenarioError::Validation(e.to_string()))?;
        let harvest = self.energy.harvest.clone().unwrap_or_default();
        if !(0.0..=1.0).contains(&self.energy.initial_soc) {
            return Err(ScenarioError::Validation(
                "initial_soc must be in [0, 1]".into(),
            ));
        }

        let dither = self.guidance.dither.unwrap_or_default();
        if dither.frequency <= 0.0 || dither.amplitude < 0.0 {
            return Err(ScenarioError::Validation(
                "dither frequency must be positive and amplitude non-negative".into(),
            ));
        }

        Ok(ResolvedScenario {
            config: self.clone(),
            seed,
            platform,
            controller,
            array,
            beacons,
            wind,
            budget,
            harvest,
            dither,
            guidance_interval,
        })
    }
}

/// A validated scenario with all runtime objects constructed.
#[derive(Debug, Clone)]
pub struct ResolvedScenario {
    pub config: ScenarioConfig,
    pub seed: u64,
    pub platform: PlatformConfig,
    pub controller: ControllerConfig,
    pub array: PhotodiodeArray,
    pub beacons: Vec<BeaconConfig>,
    pub wind: WindField,
    pub budget: PowerBudget,
    pub harvest: HarvestModel,
    pub dither: DitherConfig,
    pub guidance_interval: usize,
}

impl ResolvedScenario {
    /// Echo of the fully resolved configuration, written next to the run
    /// outputs so every run is reproducible from its artifacts.
    pub fn echo_json(&self) -> String {
        #[derive(Serialize)]
        struct Echo<'a> {
            config: &'a ScenarioConfig,
            seed: u64,
            platform: &'a PlatformConfig,
            controller: &'a ControllerConfig,
            array: &'a PhotodiodeArray,
            beacons: &'a [BeaconConfig],
            wind: &'a WindField,
            budget: &'a PowerBudget,
            harvest: &'a HarvestModel,
            dither: &'a DitherConfig,
            guidance_interval: usize,
        }
        serde_json::to_string_pretty(&Echo {
            config: &self.config,
            seed: self.seed,
            platform: &self.platform,
            controller: &self.controller,
            array: &self.array,
            beacons: &self.beacons,
            wind: &self.wind,
            budget: &self.budget,
            harvest: &self.harvest,
            dither: &self.dither,
            guidance_interval: self.guidance_interval,
        })
        .expect("scenario echo serializes")
    }
}

/// Parses a scenario from text: JSON when the first non-space byte is `{`,
/// TOML otherwise.
pub fn parse_scenario_str(text: &str) -> Result<ScenarioConfig, ScenarioError> {
    let trimmed = text.trim_start();
    if trimmed.starts_with('{') {
        serde_json::from_str(text).map_err(|e| {
            ScenarioError::Parse(format!("json line {} col {}: {e}", e.line(), e.column()))
        })
    } else {
        toml::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string()))
    }
}

/// Loads and validates a scenario file.
pub fn load_scenario(path: &std::path::Path) -> Result<ScenarioConfig, ScenarioError> {
    let text = std::fs::read_to_string(path)?;
    let config = parse_scenario_str(&text)?;
    config.validate()?;
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nav_config() -> ScenarioConfig {
        let mut config = ScenarioConfig::base("test", 1);
        config.algorithm = AlgorithmChoice::Bag;
        config.beacons.push(BeaconSpec {
            position: [7.0, 0.0, 0.5],
            boresight: None,
            intensity_at_1m: default_intensity(),
            f_mod: default_f_mod(),
            duty: default_duty(),
            half_power_angle_deg: default_half_power(),
            fov_half_angle_deg: default_fov(),
        });
        config
    }

    #[test]
    fn valid_config_resolves() {
        let config = nav_config();
        config.validate().unwrap();
        let resolved = config.resolve().unwrap();
        assert_eq!(resolved.array.count, 8);
        assert_eq!(resolved.guidance_interval, 10);
        // Default boresight points from the beacon toward the start.
        assert!((resolved.beacons[0].boresight - Vector3::new(-1.0, 0.0, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn zero_success_radius_rejected() {
        let mut config = nav_config();
        config.success_radius = 0.0;
        let err = config.validate().unwrap_err();
        assert!(matches!(err, ScenarioError::Validation(_)));
        assert!(err.to_string().contains("success_radius"));
    }

    #[test]
    fn missing_seed_rejected() {
        let mut config = nav_config();
        config.seed = None;
        let err = config.validate().unwrap_err();
        assert!(err.to_string().contains("seed"));
    }

    #[test]
    fn parse_toml_and_json() {
        let toml_text = r#"
            name = "mini"
            seed = 9
            [[beacons]]
            position = [5.0, 0.0, 0.5]
        "#;
        let config = parse_scenario_str(toml_text).unwrap();
        assert_eq!(config.name, "mini");
        assert_eq!(config.seed, Some(9));

        let json_text = r#"{ "name": "mini", "seed": 9 }"#;
        let config = parse_scenario_str(json_text).unwrap();
        assert_eq!(config.name, "mini");

        assert!(parse_scenario_str("seed = ").is_err());
        assert!(parse_scenario_str("{ bad json").is_err());
    }

    #[test]
    fn reflection_mirrors_beacons() {
        let mut config = nav_config();
        config.reflection = Some(ReflectionSpec {
            wall_point: [0.0, 1.5, 0.0],
            wall_normal: [0.0, 1.0, 0.0],
            intensity_factor: 0.3,
        });
        let resolved = config.resolve().unwrap();
        assert_eq!(resolved.beacons.len(), 2);
        let mirror = &resolved.beacons[1];
        assert!((mirror.position - Vector3::new(7.0, 3.0, 0.5)).norm() < 1e-9);
        assert!((mirror.intensity_at_1m - 0.3 * default_intensity()).abs() < 1e-9);
    }

    #[test]
    fn dt_must_match_loop_rate() {
        let mut config = nav_config();
        config.dt = 0.02;
        let err = config.validate().unwrap_err();
        assert!(err.to_string().contains("loop rate"));
    }
}
