//! Run artifacts: CSV time series and JSON metrics, written so that two runs
//! of the same (config, seed) produce byte-identical files.

use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::Path;

use super::{ResolvedScenario, RunOutput, ScenarioError};

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
pub struct OutputSpec {
    pub directory: Option<String>,
    /// Emit the per-frame spectral log (t, sensor, peak magnitude, snr).
    #[serde(default)]
    pub spectral: bool,
}

fn write_file(path: &Path, contents: &str) -> Result<(), ScenarioError> {
    let mut file = std::fs::File::create(path)?;
    file.write_all(contents.as_bytes())?;
    Ok(())
}

pub fn trajectory_csv(output: &RunOutput) -> String {
    let rotor_count = output
        .trajectory
        .first()
        .map(|r| r.pwm.len())
        .unwrap_or(0);
    let mut text = String::from("t,x,y,z,roll,pitch,yaw");
    for i in 0..rotor_count {
        text.push_str(&format!(",pwm{i}"));
    }
    text.push_str(",intensity,desired_yaw,soc\n");
    for row in &output.trajectory {
        text.push_str(&format!(
            "{:.4},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}",
            row.t, row.x, row.y, row.z, row.roll, row.pitch, row.yaw
        ));
        for p in &row.pwm {
            text.push_str(&format!(",{p:.6}"));
        }
        text.push_str(&format!(
            ",{:.3},{:.6},{:.6}\n",
            row.intensity, row.desired_yaw, row.soc
        ));
    }
    text
}

pub fn guidance_csv(output: &RunOutput) -> String {
    let mut text = String::from("t,desired_yaw,intensity,halt\n");
    for row in &output.guidance {
        text.push_str(&format!(
            "{:.4},{:.6},{:.3},{}\n",
            row.t, row.desired_yaw, row.intensity, row.halt
        ));
    }
    text
}

pub fn spectral_csv(output: &RunOutput) -> String {
    let mut text = String::from("t,sensor,peak_magnitude,snr\n");
    for row in &output.spectral {
        text.push_str(&format!(
            "{:.4},{},{:.3},{:.3}\n",
            row.t, row.sensor, row.peak_magnitude, row.snr
        ));
    }
    text
}

pub fn energy_csv(output: &RunOutput) -> String {
    let mut text = String::from("t,mode,draw_mw,harvest_mw,soc\n");
    for row in &output.energy {
        text.push_str(&format!(
            "{:.4},{},{:.3},{:.3},{:.6}\n",
            row.t, row.mode, row.draw_mw, row.harvest_mw, row.soc
        ));
    }
    text
}

/// Writes all artifacts of a run into `directory`.
pub fn write_outputs(
    resolved: &ResolvedScenario,
    output: &RunOutput,
    directory: &Path,
    spectral: bool,
) -> Result<(), ScenarioError> {
    std::fs::create_dir_all(directory)?;
    write_file(&directory.join("resolved_config.json"), &resolved.echo_json())?;
    write_file(
        &directory.join("metrics.json"),
        &serde_json::to_string_pretty(&output.metrics).expect("metrics serialize"),
    )?;
    write_file(&directory.join("trajectory.csv"), &trajectory_csv(output))?;
    write_file(&directory.join("guidance.csv"), &guidance_csv(output))?;
    write_file(&directory.join("energy.csv"), &energy_csv(output))?;
    if spectral {
        write_file(&directory.join("spectral.csv"), &spectral_csv(output))?;
    }
    Ok(())
}
