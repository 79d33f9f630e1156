//! Command-line driver: scenario runs, batch execution, identification from
//! CSV logs, gain tuning, and the study suites.
//!
//! Exit codes: 0 on success, 2 on parse/validation errors, 3 on a numerical
//! blow-up inside a simulation.

use clap::{Parser, Subcommand, ValueEnum};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use aerostat_core::energy::{
    bundled_solar_cells, charging_ratio, duty_cycle_simulation, pareto_frontier, power_draw,
    HarvestModel, OperatingMode, PowerBudget,
};
use aerostat_core::identification::{
    fit_drag, solve_allocation, AllocationTrialSet, DragSampleSet, AXIS_NAMES,
};
use aerostat_core::scenario::{
    batch, bearing_error_sweep, load_scenario, mounting_stability_study, run, tune_sweep,
    write_outputs, Environment, MountingVariant, ScenarioError,
};

#[derive(Parser)]
#[command(name = "aerostat", version, about = "Lighter-than-air micro-drone simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Override the scenario seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory for run artifacts.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Override the integration step (also adjusts the control loop rate).
    #[arg(long, global = true)]
    dt: Option<f64>,
    /// Summary format on stdout.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario file and write its artifacts.
    Run { scenario: PathBuf },
    /// Run every scenario file in a directory (parallel, order-stable).
    Batch { dir: PathBuf },
    /// Fit model parameters from measurement CSV logs.
    Identify {
        #[command(subcommand)]
        what: IdentifyWhat,
    },
    /// Sweep controller gain scales on a scenario and report step metrics.
    Tune { scenario: PathBuf },
    /// Accuracy sweeps.
    Sweep {
        #[command(subcommand)]
        what: SweepWhat,
    },
    /// Stability studies.
    Study {
        #[command(subcommand)]
        what: StudyWhat,
    },
    /// Energy budget reports.
    Energy {
        #[command(subcommand)]
        what: EnergyWhat,
    },
}

#[derive(Subcommand)]
enum IdentifyWhat {
    /// Fit drag coefficients from (axis, speed, force) samples.
    Drag { csv: PathBuf },
    /// Solve the thrust allocation matrix from (thrusts, wrench) trials.
    Allocation { csv: PathBuf },
}

#[derive(Subcommand)]
enum SweepWhat {
    /// Bearing-error sweep over array sizes and environments.
    Bearing {
        /// Emitter distance (m).
        #[arg(long, default_value_t = 3.0)]
        distance: f64,
        /// Frames per ground-truth angle.
        #[arg(long, default_value_t = 50)]
        frames: usize,
    },
}

#[derive(Subcommand)]
enum StudyWhat {
    /// Solar-panel mounting pitch-stability comparison.
    Mounting,
}

#[derive(Subcommand)]
enum EnergyWhat {
    /// Power table, charging ratios, duty cycle, and the solar Pareto set.
    Report,
}

fn exit_code_for(err: &ScenarioError) -> ExitCode {
    match err {
        ScenarioError::NonFinite { .. } => ExitCode::from(3),
        _ => ExitCode::from(2),
    }
}

fn load_with_overrides(path: &Path, cli: &Cli) -> Result<aerostat_core::scenario::ScenarioConfig, ScenarioError> {
    let mut config = load_scenario(path)?;
    if let Some(seed) = cli.seed {
        config.seed = Some(seed);
    }
    if let Some(dt) = cli.dt {
        config.dt = dt;
        let mut controller = config.controller.clone().unwrap_or_else(|| {
            let platform = aerostat_core::platform::PlatformConfig::preset(config.platform);
            match config.controller_profile {
                aerostat_core::scenario::ControllerProfile::Default => {
                    aerostat_core::control::ControllerConfig::for_platform(&platform)
                }
                aerostat_core::scenario::ControllerProfile::Windward => {
                    aerostat_core::control::ControllerConfig::for_platform_windward(&platform)
                }
            }
        });
        controller.loop_rate = 1.0 / dt;
        config.controller = Some(controller);
    }
    config.validate()?;
    Ok(config)
}

fn cmd_run(path: &Path, cli: &Cli) -> Result<(), ScenarioError> {
    let config = load_with_overrides(path, cli)?;
    let resolved = config.resolve()?;
    let output = run(&resolved)?;
    let out_dir = cli
        .out
        .clone()
        .or_else(|| {
            config
                .output
                .as_ref()
                .and_then(|o| o.directory.clone())
                .map(PathBuf::from)
        })
        .unwrap_or_else(|| PathBuf::from("out").join(&config.name));
    let spectral = config.output.as_ref().map(|o| o.spectral).unwrap_or(false);
    write_outputs(&resolved, &output, &out_dir, spectral)?;
    match cli.format {
        Format::Json => println!(
            "{}",
            serde_json::to_string_pretty(&output.metrics).expect("metrics serialize")
        ),
        Format::Csv => {
            println!("name,seed,success,path_length,travel_time,min_distance,energy_consumed");
            let m = &output.metrics;
            println!(
                "{},{},{},{:.4},{},{},{:.4}",
                m.name,
                m.seed,
                m.success,
                m.path_length,
                m.travel_time.map_or(String::new(), |t| format!("{t:.2}")),
                m.min_distance.map_or(String::new(), |d| format!("{d:.4}")),
                m.energy_consumed
            );
        }
    }
    eprintln!("artifacts written to {}", out_dir.display());
    Ok(())
}

fn cmd_batch(dir: &Path, cli: &Cli) -> Result<(), ScenarioError> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| {
            matches!(
                p.extension().and_then(|e| e.to_str()),
                Some("scenario" | "toml" | "json")
            )
        })
        .collect();
    paths.sort();
    let mut configs = Vec::new();
    for path in &paths {
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        match load_with_overrides(path, cli) {
            Ok(config) => configs.push((name, Ok(config))),
            Err(e) => configs.push((name, Err(e.to_string()))),
        }
    }
    let runnable: Vec<(String, aerostat_core::scenario::ScenarioConfig)> = configs
        .iter()
        .filter_map(|(n, c)| c.as_ref().ok().map(|c| (n.clone(), c.clone())))
        .collect();
    let results = batch(&runnable);
    // Stitch parse failures back in input order.
    let mut by_name: std::collections::BTreeMap<&str, &aerostat_core::scenario::BatchRow> =
        std::collections::BTreeMap::new();
    for row in &results {
        by_name.insert(row.scenario.as_str(), row);
    }
    let mut out = String::new();
    match cli.format {
        Format::Csv => {
            out.push_str("scenario,success,path_length,travel_time,min_distance,error\n");
            for (name, config) in &configs {
                match config {
                    Err(e) => out.push_str(&format!("{name},,,,,\"{e}\"\n")),
                    Ok(_) => {
                        let row = by_name[name.as_str()];
                        if let Some(m) = &row.metrics {
                            out.push_str(&format!(
                                "{},{},{:.4},{},{},\n",
                                name,
                                m.success,
                                m.path_length,
                                m.travel_time.map_or(String::new(), |t| format!("{t:.2}")),
                                m.min_distance.map_or(String::new(), |d| format!("{d:.4}")),
                            ));
                        } else {
                            out.push_str(&format!(
                                "{name},,,,,\"{}\"\n",
                                row.error.as_deref().unwrap_or("unknown")
                            ));
                        }
                    }
                }
            }
        }
        Format::Json => {
            let rows: Vec<serde_json::Value> = configs
                .iter()
                .map(|(name, config)| match config {
                    Err(e) => serde_json::json!({"scenario": name, "error": e}),
                    Ok(_) => serde_json::to_value(by_name[name.as_str()]).expect("row serializes"),
                })
                .collect();
            out = serde_json::to_string_pretty(&rows).expect("summary serializes");
            out.push('\n');
        }
    }
    print!("{out}");
    if let Some(dir) = &cli.out {
        std::fs::create_dir_all(dir)?;
        let name = match cli.format {
            Format::Csv => "batch_summary.csv",
            Format::Json => "batch_summary.json",
        };
        std::fs::write(dir.join(name), out)?;
    }
    Ok(())
}

fn cmd_identify_drag(csv: &Path, cli: &Cli) -> Result<(), ScenarioError> {
    let file = std::fs::File::open(csv)?;
    let samples =
        DragSampleSet::read_csv(file).map_err(|e| ScenarioError::Parse(e.to_string()))?;
    let fit = fit_drag(&samples).map_err(|e| ScenarioError::Validation(e.to_string()))?;
    match cli.format {
        Format::Json => println!(
            "{}",
            serde_json::to_string_pretty(&fit).expect("fit serializes")
        ),
        Format::Csv => {
            println!("axis,linear,quadratic,residual_rms");
            for (i, name) in AXIS_NAMES.iter().enumerate() {
                println!(
                    "{},{:.9},{:.9},{:.3e}",
                    name,
                    fit.coefficients.linear[i],
                    fit.coefficients.quadratic[i],
                    fit.residual_rms[i]
                );
            }
        }
    }
    for axis in &fit.clamped_axes {
        eprintln!(
            "warning: axis {} had a negative unconstrained fit, clamped at zero",
            AXIS_NAMES[*axis]
        );
    }
    Ok(())
}

fn cmd_identify_allocation(csv: &Path, cli: &Cli) -> Result<(), ScenarioError> {
    let file = std::fs::File::open(csv)?;
    let trials =
        AllocationTrialSet::read_csv(file).map_err(|e| ScenarioError::Parse(e.to_string()))?;
    let b = solve_allocation(&trials).map_err(|e| ScenarioError::Validation(e.to_string()))?;
    match cli.format {
        Format::Json => println!(
            "{}",
            serde_json::to_string_pretty(&b).expect("matrix serializes")
        ),
        Format::Csv => {
            let m = b.matrix();
            println!("row,{}", (0..m.ncols()).map(|j| format!("t{}", j + 1)).collect::<Vec<_>>().join(","));
            let rows = ["fx", "fy", "fz", "mx", "my", "mz"];
            for (i, name) in rows.iter().enumerate() {
                let cells: Vec<String> = (0..m.ncols()).map(|j| format!("{:.9}", m[(i, j)])).collect();
                println!("{},{}", name, cells.join(","));
            }
        }
    }
    Ok(())
}

fn cmd_tune(path: &Path, cli: &Cli) -> Result<(), ScenarioError> {
    let config = load_with_overrides(path, cli)?;
    let scales = [0.5, 0.75, 1.0, 1.5, 2.0];
    let rows = tune_sweep(&config, &scales)?;
    match cli.format {
        Format::Json => println!(
            "{}",
            serde_json::to_string_pretty(&rows).expect("rows serialize")
        ),
        Format::Csv => {
            println!("altitude_gain_scale,yaw_gain_scale,altitude_settle_s,altitude_overshoot_pct,yaw_settle_s");
            for r in &rows {
                println!(
                    "{},{},{},{:.1},{}",
                    r.altitude_gain_scale,
                    r.yaw_gain_scale,
                    r.altitude_settle_s.map_or(String::new(), |t| format!("{t:.2}")),
                    r.altitude_overshoot_pct,
                    r.yaw_settle_s.map_or(String::new(), |t| format!("{t:.2}")),
                );
            }
        }
    }
    Ok(())
}

fn cmd_sweep_bearing(distance: f64, frames: usize, cli: &Cli) -> Result<(), ScenarioError> {
    let seed = cli.seed.unwrap_or(7);
    let mut all = Vec::new();
    for environment in [Environment::Clean, Environment::Reflective] {
        all.extend(bearing_error_sweep(&[4, 8, 16], environment, distance, frames, seed)?);
    }
    match cli.format {
        Format::Json => println!(
            "{}",
            serde_json::to_string_pretty(&all).expect("rows serialize")
        ),
        Format::Csv => {
            println!("array_size,environment,angle_deg,median_error_deg");
            for r in &all {
                println!(
                    "{},{},{},{:.3}",
                    r.array_size, r.environment, r.angle_deg, r.median_error_deg
                );
            }
        }
    }
    Ok(())
}

fn cmd_study_mounting(cli: &Cli) -> Result<(), ScenarioError> {
    let base = aerostat_core::scenario::ScenarioConfig::base(
        "mounting",
        cli.seed.unwrap_or(3),
    );
    let variants = [
        MountingVariant::side(),
        MountingVariant::bottom(),
        MountingVariant::top(),
        MountingVariant::inverted(),
    ];
    let mut rows = Vec::new();
    for variant in &variants {
        let metrics = mounting_stability_study(variant, &base)?;
        rows.push(serde_json::json!({
            "variant": variant.kind.to_string(),
            "added_mass_g": variant.added_mass_g,
            "cg_offset_delta": variant.cg_offset_delta,
            "pitch_oscillation_amplitude_deg": metrics.pitch_oscillation_amplitude_deg,
        }));
    }
    match cli.format {
        Format::Json => println!(
            "{}",
            serde_json::to_string_pretty(&rows).expect("rows serialize")
        ),
        Format::Csv => {
            println!("variant,added_mass_g,pitch_oscillation_amplitude_deg");
            for r in &rows {
                println!(
                    "{},{},{:.3}",
                    r["variant"].as_str().unwrap(),
                    r["added_mass_g"],
                    r["pitch_oscillation_amplitude_deg"].as_f64().unwrap()
                );
            }
        }
    }
    Ok(())
}

fn cmd_energy_report(cli: &Cli) -> Result<(), ScenarioError> {
    let budget = PowerBudget::default();
    let model = HarvestModel::default();
    let lux = 80_000.0;
    let hover = charging_ratio(OperatingMode::Hover, lux, &budget, &model)
        .map_err(|e| ScenarioError::Validation(e.to_string()))?;
    let fly = charging_ratio(OperatingMode::Fly, lux, &budget, &model)
        .map_err(|e| ScenarioError::Validation(e.to_string()))?;
    let duty = duty_cycle_simulation(60.0, lux, 0.5, &budget, &model)
        .map_err(|e| ScenarioError::Validation(e.to_string()))?;
    let cells = bundled_solar_cells();
    let frontier = pareto_frontier(&cells);
    let report = serde_json::json!({
        "power_budget_mw": {
            "idle": power_draw(OperatingMode::Idle, &budget),
            "idle_tx": power_draw(OperatingMode::IdleTx, &budget),
            "hover": power_draw(OperatingMode::Hover, &budget),
            "navigate_bag": budget.navigate_bag,
            "navigate_des": budget.navigate_des,
            "navigate_dga": budget.navigate_dga,
            "flying": budget.flying,
        },
        "charging_ratio_at_80klux": { "hover": hover, "fly": fly },
        "duty_cycle": {
            "charge_minutes": duty.charge_minutes,
            "operation_minutes": duty.operation_minutes,
        },
        "solar_cells": cells,
        "pareto_frontier": frontier.iter().map(|c| c.name.clone()).collect::<Vec<_>>(),
    });
    match cli.format {
        Format::Json => println!(
            "{}",
            serde_json::to_string_pretty(&report).expect("report serializes")
        ),
        Format::Csv => {
            println!("metric,value");
            println!("charging_ratio_hover,{hover:.3}");
            println!("charging_ratio_fly,{fly:.3}");
            println!("duty_cycle_operation_minutes,{:.2}", duty.operation_minutes);
            println!(
                "pareto_frontier,\"{}\"",
                frontier.iter().map(|c| c.name.as_str()).collect::<Vec<_>>().join("; ")
            );
        }
    }
    if let Some(dir) = &cli.out {
        std::fs::create_dir_all(dir)?;
        std::fs::write(
            dir.join("energy_report.json"),
            serde_json::to_string_pretty(&report).expect("report serializes"),
        )?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run { scenario } => cmd_run(scenario, &cli),
        Command::Batch { dir } => cmd_batch(dir, &cli),
        Command::Identify { what } => match what {
            IdentifyWhat::Drag { csv } => cmd_identify_drag(csv, &cli),
            IdentifyWhat::Allocation { csv } => cmd_identify_allocation(csv, &cli),
        },
        Command::Tune { scenario } => cmd_tune(scenario, &cli),
        Command::Sweep { what } => match what {
            SweepWhat::Bearing { distance, frames } => cmd_sweep_bearing(*distance, *frames, &cli),
        },
        Command::Study { what } => match what {
            StudyWhat::Mounting => cmd_study_mounting(&cli),
        },
        Command::Energy { what } => match what {
            EnergyWhat::Report => cmd_energy_report(&cli),
        },
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}
