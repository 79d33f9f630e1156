//! System identification in place of wind-tunnel / thrust-rig experiments.
//!
//! Drag coefficients are fitted per axis by joint least squares over
//! (speed, steady-force) samples; the allocation matrix is solved from
//! thrust-vector/wrench trials. A synthetic sample generator stands in for
//! the aerodynamic solver so the whole pipeline can be exercised and checked
//! against known ground truth.

use nalgebra::{DMatrix, Vector6};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{DragCoefficients, ForceTorque};
use crate::propulsion::AllocationMatrix;

/// Default boundary between the low-speed (linear-dominated) and high-speed
/// (quadratic-dominated) sampling regimes, in m/s or rad/s.
pub const DEFAULT_REGIME_SPLIT: f64 = 0.8;

/// Default sampling schedule: low speeds for linear terms, high for quadratic.
pub const DEFAULT_SPEED_SCHEDULE: [f64; 6] = [0.2, 0.5, 0.7, 1.0, 1.5, 2.0];

#[derive(Debug, Error)]
pub enum IdentificationError {
    #[error("insufficient samples: {0}")]
    InsufficientSamples(String),
    #[error("rank-deficient inputs: {0}")]
    RankDeficient(String),
    #[error("malformed record: {0}")]
    Malformed(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub const AXIS_NAMES: [&str; 6] = ["vx", "vy", "vz", "wx", "wy", "wz"];

pub fn axis_index(name: &str) -> Option<usize> {
    AXIS_NAMES.iter().position(|&a| a.eq_ignore_ascii_case(name))
}

/// Per-axis (speed, steady force) samples.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct DragSampleSet {
    pub axes: [Vec<(f64, f64)>; 6],
    /// Speed that separates the low and high sampling regimes.
    #[serde(default = "default_split")]
    pub regime_split: f64,
}

fn default_split() -> f64 {
    DEFAULT_REGIME_SPLIT
}

impl DragSampleSet {
    pub fn new() -> Self {
        Self {
            axes: Default::default(),
            regime_split: DEFAULT_REGIME_SPLIT,
        }
    }

    pub fn validate(&self) -> Result<(), IdentificationError> {
        for (i, samples) in self.axes.iter().enumerate() {
            if samples.len() < 2 {
                return Err(IdentificationError::InsufficientSamples(format!(
                    "axis {} has {} samples, need at least 2",
                    AXIS_NAMES[i],
                    samples.len()
                )));
            }
            if samples.iter().any(|&(v, _)| v <= 0.0) {
                return Err(IdentificationError::Malformed(format!(
                    "axis {} contains non-positive speeds",
                    AXIS_NAMES[i]
                )));
            }
            let low = samples.iter().any(|&(v, _)| v < self.regime_split);
            let high = samples.iter().any(|&(v, _)| v >= self.regime_split);
            if !(low && high) {
                return Err(IdentificationError::InsufficientSamples(format!(
                    "axis {} needs at least one sample in each speed regime (split {})",
                    AXIS_NAMES[i], self.regime_split
                )));
            }
        }
        Ok(())
    }

    pub fn read_csv<R: std::io::Read>(reader: R) -> Result<Self, IdentificationError> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let mut set = DragSampleSet::new();
        for record in rdr.records() {
            let record = record?;
            if record.len() != 3 {
                return Err(IdentificationError::Malformed(format!(
                    "expected 3 columns (axis, speed, force), got {}",
                    record.len()
                )));
            }
            let axis = axis_index(&record[0]).ok_or_else(|| {
                IdentificationError::Malformed(format!("unknown axis {:?}", &record[0]))
            })?;
            let speed: f64 = record[1]
                .parse()
                .map_err(|_| IdentificationError::Malformed(format!("bad speed {:?}", &record[1])))?;
            let force: f64 = record[2]
                .parse()
                .map_err(|_| IdentificationError::Malformed(format!("bad force {:?}", &record[2])))?;
            if !speed.is_finite() || !force.is_finite() {
                return Err(IdentificationError::Malformed(
                    "speed and force must be finite".into(),
                ));
            }
            set.axes[axis].push((speed, force));
        }
        Ok(set)
    }

    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<(), IdentificationError> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(["axis", "speed", "force"])?;
        for (i, samples) in self.axes.iter().enumerate() {
            for &(speed, force) in samples {
                wtr.write_record([AXIS_NAMES[i], &speed.to_string(), &force.to_string()])?;
            }
        }
        wtr.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}

/// Result of a drag fit: the coefficients plus per-axis residuals and a flag
/// for each axis where the unconstrained solution went negative and was
/// clamped at zero.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DragFit {
    pub coefficients: DragCoefficients,
    pub residual_rms: [f64; 6],
    pub clamped_axes: Vec<usize>,
}

/// Joint least-squares fit of `force = D·v + D²·v²` per axis over all
/// samples. Negative coefficients are clamped at zero.
pub fn fit_drag(samples: &DragSampleSet) -> Result<DragFit, IdentificationError> {
    samples.validate()?;
    let mut linear = Vector6::zeros();
    let mut quadratic = Vector6::zeros();
    let mut residual_rms = [0.0; 6];
    let mut clamped_axes = Vec::new();

    for (axis, data) in samples.axes.iter().enumerate() {
        // Normal equations for the 2-parameter model [v, v^2].
        let (mut s22, mut s23, mut s33) = (0.0, 0.0, 0.0);
        let (mut r1, mut r2) = (0.0, 0.0);
        for &(v, f) in data {
            let v2 = v * v;
            s22 += v2;
            s23 += v * v2;
            s33 += v2 * v2;
            r1 += v * f;
            r2 += v2 * f;
        }
        let det = s22 * s33 - s23 * s23;
        let scale = s22 * s33;
        if det.abs() <= 1e-12 * scale.max(f64::MIN_POSITIVE) {
            return Err(IdentificationError::RankDeficient(format!(
                "axis {}: speeds do not span the model (all identical?)",
                AXIS_NAMES[axis]
            )));
        }
        let mut d1 = (r1 * s33 - r2 * s23) / det;
        let mut d2 = (s22 * r2 - s23 * r1) / det;
        if d1 < 0.0 || d2 < 0.0 {
            clamped_axes.push(axis);
            d1 = d1.max(0.0);
            d2 = d2.max(0.0);
        }
        linear[axis] = d1;
        quadratic[axis] = d2;
        let sse: f64 = data
            .iter()
            .map(|&(v, f)| {
                let model = d1 * v + d2 * v * v;
                (model - f) * (model - f)
            })
            .sum();
        residual_rms[axis] = (sse / data.len() as f64).sqrt();
    }

    Ok(DragFit {
        coefficients: DragCoefficients { linear, quadratic },
        residual_rms,
        clamped_axes,
    })
}

/// A set of (thrust vector, measured wrench) pairs.
#[derive(Debug, Clone, Default)]
pub struct AllocationTrialSet {
    pub trials: Vec<(Vec<f64>, ForceTorque)>,
}

impl AllocationTrialSet {
    pub fn rotor_count(&self) -> usize {
        self.trials.first().map_or(0, |(t, _)| t.len())
    }

    pub fn read_csv<R: std::io::Read>(reader: R) -> Result<Self, IdentificationError> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers()?.clone();
        if headers.len() < 7 {
            return Err(IdentificationError::Malformed(
                "expected columns t1..tN,fx,fy,fz,mx,my,mz".into(),
            ));
        }
        let n = headers.len() - 6;
        let mut trials = Vec::new();
        for record in rdr.records() {
            let record = record?;
            if record.len() != n + 6 {
                return Err(IdentificationError::Malformed(format!(
                    "row has {} fields, expected {}",
                    record.len(),
                    n + 6
                )));
            }
            let parse = |s: &str| -> Result<f64, IdentificationError> {
                let v: f64 = s
                    .parse()
                    .map_err(|_| IdentificationError::Malformed(format!("bad number {s:?}")))?;
                if !v.is_finite() {
                    return Err(IdentificationError::Malformed("non-finite value".into()));
                }
                Ok(v)
            };
            let thrusts: Vec<f64> = record
                .iter()
                .take(n)
                .map(parse)
                .collect::<Result<_, _>>()?;
            let rest: Vec<f64> = record
                .iter()
                .skip(n)
                .map(parse)
                .collect::<Result<_, _>>()?;
            trials.push((
                thrusts,
                ForceTorque {
                    force: nalgebra::Vector3::new(rest[0], rest[1], rest[2]),
                    torque: nalgebra::Vector3::new(rest[3], rest[4], rest[5]),
                },
            ));
        }
        Ok(Self { trials })
    }
}

/// Least-squares allocation matrix from trial data: minimizes
/// `sum_k ||B t_k - w_k||^2`. Exact when the trials are single-rotor
/// activations.
pub fn solve_allocation(
    trials: &AllocationTrialSet,
) -> Result<AllocationMatrix, IdentificationError> {
    let k = trials.trials.len();
    let n = trials.rotor_count();
    if n == 0 || k == 0 {
        return Err(IdentificationError::InsufficientSamples(
            "no trials provided".into(),
        ));
    }
    if trials.trials.iter().any(|(t, _)| t.len() != n) {
        return Err(IdentificationError::Malformed(
            "trials have inconsistent thrust-vector lengths".into(),
        ));
    }
    if k < n {
        return Err(IdentificationError::RankDeficient(format!(
            "{k} trials cannot span {n} rotors"
        )));
    }

    let mut t_mat = DMatrix::zeros(n, k);
    let mut w_mat = DMatrix::zeros(6, k);
    for (col, (thrusts, wrench)) in trials.trials.iter().enumerate() {
        for row in 0..n {
            t_mat[(row, col)] = thrusts[row];
        }
        for row in 0..3 {
            w_mat[(row, col)] = wrench.force[row];
            w_mat[(row + 3, col)] = wrench.torque[row];
        }
    }

    let gram = &t_mat * t_mat.transpose();
    let svd = gram.clone().svd(true, true);
    let max_sv = svd.singular_values.max();
    let rank = svd
        .singular_values
        .iter()
        .filter(|&&s| s > 1e-10 * max_sv.max(f64::MIN_POSITIVE))
        .count();
    if rank < n {
        return Err(IdentificationError::RankDeficient(format!(
            "thrust vectors span rank {rank} of {n}"
        )));
    }
    let gram_inv = gram
        .try_inverse()
        .ok_or_else(|| IdentificationError::RankDeficient("singular Gram matrix".into()))?;
    let b = w_mat * t_mat.transpose() * gram_inv;
    AllocationMatrix::new(b).map_err(|e| IdentificationError::Malformed(e.to_string()))
}

/// Generates seeded (speed, force) samples from a known drag model with
/// multiplicative Gaussian noise of the given relative standard deviation.
pub fn synthetic_wind_tunnel(
    true_coeffs: &DragCoefficients,
    speeds: &[f64],
    noise: f64,
    seed: u64,
) -> DragSampleSet {
    assert!(!speeds.is_empty(), "speed schedule must be non-empty");
    assert!(noise >= 0.0, "noise must be non-negative");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let mut set = DragSampleSet::new();
    for axis in 0..6 {
        for &v in speeds {
            let clean = true_coeffs.linear[axis] * v + true_coeffs.quadratic[axis] * v * v;
            let factor = if noise > 0.0 {
                1.0 + noise * normal.sample(&mut rng)
            } else {
                1.0
            };
            set.axes[axis].push((v, clean * factor));
        }
    }
    set
}
