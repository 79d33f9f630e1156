//! Rotor thrust model and thrust allocation.
//!
//! A quadratic curve maps normalized PWM commands in [0, 1] to thrust in
//! newtons; the allocation matrix maps per-rotor thrust magnitudes to a net
//! body wrench.

use nalgebra::{DMatrix, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::ForceTorque;

#[derive(Debug, Error)]
pub enum PropulsionError {
    #[error("input outside valid domain: {0}")]
    Domain(String),
    #[error("dimension mismatch: expected {expected} thrusts, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// Quadratic PWM-to-thrust curve `F = a·pwm² + b·pwm` with pwm in [0, 1] and
/// thrust in newtons. The default coefficients are the stock coreless
/// motor/propeller fit used by both study platforms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThrustCurve {
    pub a: f64,
    pub b: f64,
}

impl Default for ThrustCurve {
    fn default() -> Self {
        Self {
            a: 0.0915,
            b: 0.0677,
        }
    }
}

impl ThrustCurve {
    pub fn validate(&self) -> Result<(), PropulsionError> {
        if self.a < 0.0 || self.b < 0.0 || self.a + self.b <= 0.0 {
            return Err(PropulsionError::Domain(
                "thrust curve requires a >= 0, b >= 0, a + b > 0".into(),
            ));
        }
        Ok(())
    }

    /// Thrust at full command.
    pub fn max_thrust(&self) -> f64 {
        self.a + self.b
    }
}

/// Thrust in newtons for a normalized PWM command.
pub fn pwm_to_thrust(pwm: f64, curve: &ThrustCurve) -> Result<f64, PropulsionError> {
    if !(0.0..=1.0).contains(&pwm) {
        return Err(PropulsionError::Domain(format!(
            "pwm must be in [0, 1], got {pwm}"
        )));
    }
    Ok(curve.a * pwm * pwm + curve.b * pwm)
}

/// Inverse of the thrust curve: the unique non-negative root of
/// `a·pwm² + b·pwm = F`.
pub fn thrust_to_pwm(f: f64, curve: &ThrustCurve) -> Result<f64, PropulsionError> {
    let max = curve.max_thrust();
    if f < 0.0 || f > max + 1e-12 {
        return Err(PropulsionError::Domain(format!(
            "thrust must be in [0, {max}], got {f}"
        )));
    }
    let pwm = if curve.a == 0.0 {
        f / curve.b
    } else {
        (-curve.b + (curve.b * curve.b + 4.0 * curve.a * f).sqrt()) / (2.0 * curve.a)
    };
    Ok(pwm.clamp(0.0, 1.0))
}

/// A single rotor: mount position and thrust axis in the body frame.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Rotor {
    pub label: String,
    pub position: Vector3<f64>,
    /// Unit thrust direction; thrust pushes the body along this axis.
    pub axis: Vector3<f64>,
    /// Reaction torque about the thrust axis per newton of thrust (N·m/N).
    #[serde(default)]
    pub drag_torque_coefficient: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RotorLayout {
    pub rotors: Vec<Rotor>,
}

impl RotorLayout {
    pub fn count(&self) -> usize {
        self.rotors.len()
    }

    pub fn validate(&self) -> Result<(), PropulsionError> {
        for rotor in &self.rotors {
            if (rotor.axis.norm() - 1.0).abs() > 1e-9 {
                return Err(PropulsionError::Domain(format!(
                    "rotor {} axis must be unit-norm",
                    rotor.label
                )));
            }
        }
        Ok(())
    }
}

/// 6×N matrix mapping per-rotor thrust magnitudes (N) to a body wrench
/// (N, N·m). Rows are (Fx, Fy, Fz, Mx, My, Mz).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllocationMatrix {
    b: DMatrix<f64>,
}

impl AllocationMatrix {
    pub fn new(b: DMatrix<f64>) -> Result<Self, PropulsionError> {
        if b.nrows() != 6 {
            return Err(PropulsionError::Domain(format!(
                "allocation matrix must have 6 rows, got {}",
                b.nrows()
            )));
        }
        if b.iter().any(|v| !v.is_finite()) {
            return Err(PropulsionError::Domain(
                "allocation matrix entries must be finite".into(),
            ));
        }
        Ok(Self { b })
    }

    /// Ideal geometric allocation: column j is (axis_j, pos_j × axis_j plus
    /// the rotor's reaction torque about its own axis).
    pub fn from_layout(layout: &RotorLayout) -> Self {
        let n = layout.count();
        let mut b = DMatrix::zeros(6, n);
        for (j, rotor) in layout.rotors.iter().enumerate() {
            let torque =
                rotor.position.cross(&rotor.axis) + rotor.axis * rotor.drag_torque_coefficient;
            for i in 0..3 {
                b[(i, j)] = rotor.axis[i];
                b[(i + 3, j)] = torque[i];
            }
        }
        Self { b }
    }

    pub fn rotor_count(&self) -> usize {
        self.b.ncols()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.b
    }

    pub fn column_wrench(&self, j: usize) -> ForceTorque {
        ForceTorque {
            force: Vector3::new(self.b[(0, j)], self.b[(1, j)], self.b[(2, j)]),
            torque: Vector3::new(self.b[(3, j)], self.b[(4, j)], self.b[(5, j)]),
        }
    }

    /// Scales a whole column, used to fold rotor/envelope interaction gains
    /// into the geometric allocation.
    pub fn scale_column(&mut self, j: usize, factor: f64) {
        for i in 0..6 {
            self.b[(i, j)] *= factor;
        }
    }

    /// Overwrites a single entry; used when an interaction effect adds a
    /// wrench component the rotor geometry alone would not produce.
    pub fn set_entry(&mut self, row: usize, col: usize, value: f64) {
        self.b[(row, col)] = value;
    }

    /// Maximum net force along body z over all admissible thrust vectors in
    /// [0, max_thrust]^N.
    pub fn max_vertical_force(&self, max_thrust: f64) -> f64 {
        (0..self.rotor_count())
            .map(|j| self.b[(2, j)].max(0.0) * max_thrust)
            .sum()
    }
}

/// Net body wrench for a vector of per-rotor thrusts.
pub fn allocate(thrusts: &[f64], b: &AllocationMatrix) -> Result<ForceTorque, PropulsionError> {
    if thrusts.len() != b.rotor_count() {
        return Err(PropulsionError::DimensionMismatch {
            expected: b.rotor_count(),
            got: thrusts.len(),
        });
    }
    let t = DMatrix::from_column_slice(thrusts.len(), 1, thrusts);
    let w = b.matrix() * t;
    Ok(ForceTorque {
        force: Vector3::new(w[(0, 0)], w[(1, 0)], w[(2, 0)]),
        torque: Vector3::new(w[(3, 0)], w[(4, 0)], w[(5, 0)]),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn thrust_curve_endpoints() {
        let curve = ThrustCurve::default();
        assert_eq!(pwm_to_thrust(0.0, &curve).unwrap(), 0.0);
        assert_relative_eq!(pwm_to_thrust(1.0, &curve).unwrap(), 0.1592, epsilon = 1e-12);
        assert_relative_eq!(
            pwm_to_thrust(0.5, &curve).unwrap(),
            0.056725,
            epsilon = 1e-12
        );
        assert!(pwm_to_thrust(1.1, &curve).is_err());
        assert!(pwm_to_thrust(-0.1, &curve).is_err());
    }

    #[test]
    fn thrust_inversion_endpoints() {
        let curve = ThrustCurve::default();
        assert_eq!(thrust_to_pwm(0.0, &curve).unwrap(), 0.0);
        assert_relative_eq!(thrust_to_pwm(0.1592, &curve).unwrap(), 1.0, epsilon = 1e-12);
        assert!(thrust_to_pwm(-0.01, &curve).is_err());
        assert!(thrust_to_pwm(0.2, &curve).is_err());

        let linear = ThrustCurve { a: 0.0, b: 0.08 };
        assert_relative_eq!(thrust_to_pwm(0.04, &linear).unwrap(), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn allocate_matches_columns() {
        let layout = RotorLayout {
            rotors: vec![
                Rotor {
                    label: "left".into(),
                    position: Vector3::new(0.0, 0.15, -0.3),
                    axis: Vector3::new(1.0, 0.0, 0.0),
                    drag_torque_coefficient: 0.0,
                },
                Rotor {
                    label: "lift".into(),
                    position: Vector3::new(0.12, 0.0, -0.28),
                    axis: Vector3::new(0.0, 0.0, 1.0),
                    drag_torque_coefficient: 0.0,
                },
            ],
        };
        let b = AllocationMatrix::from_layout(&layout);

        let zero = allocate(&[0.0, 0.0], &b).unwrap();
        assert_eq!(zero.force, Vector3::zeros());

        let single = allocate(&[1.0, 0.0], &b).unwrap();
        let col = b.column_wrench(0);
        assert_relative_eq!((single.force - col.force).norm(), 0.0, epsilon = 1e-14);
        assert_relative_eq!((single.torque - col.torque).norm(), 0.0, epsilon = 1e-14);

        assert!(matches!(
            allocate(&[1.0], &b),
            Err(PropulsionError::DimensionMismatch { .. })
        ));
    }

    proptest! {
        #[test]
        fn pwm_to_thrust_strictly_increasing(x in 0.0..1.0f64, y in 0.0..1.0f64) {
            let curve = ThrustCurve::default();
            let (lo, hi) = if x < y { (x, y) } else { (y, x) };
            prop_assume!(hi - lo > 1e-9);
            let f_lo = pwm_to_thrust(lo, &curve).unwrap();
            let f_hi = pwm_to_thrust(hi, &curve).unwrap();
            prop_assert!(f_hi > f_lo);
        }

        #[test]
        fn thrust_pwm_round_trip(f in 0.0..0.1592f64) {
            let curve = ThrustCurve::default();
            let pwm = thrust_to_pwm(f, &curve).unwrap();
            let back = pwm_to_thrust(pwm, &curve).unwrap();
            prop_assert!((back - f).abs() < 1e-12);
        }

        #[test]
        fn allocation_is_linear(
            t1 in proptest::collection::vec(0.0..0.16f64, 4),
            t2 in proptest::collection::vec(0.0..0.16f64, 4),
            alpha in 0.0..2.0f64,
            beta in 0.0..2.0f64,
        ) {
            let layout = RotorLayout {
                rotors: (0..4)
                    .map(|k| Rotor {
                        label: format!("r{k}"),
                        position: Vector3::new(0.1 * k as f64, -0.05, 0.02),
                        axis: Vector3::new(0.0, 0.0, 1.0),
                        drag_torque_coefficient: 0.001,
                    })
                    .collect(),
            };
            let b = AllocationMatrix::from_layout(&layout);
            let mixed: Vec<f64> = t1
                .iter()
                .zip(&t2)
                .map(|(a, bb)| alpha * a + beta * bb)
                .collect();
            let w_mixed = allocate(&mixed, &b).unwrap();
            let w1 = allocate(&t1, &b).unwrap();
            let w2 = allocate(&t2, &b).unwrap();
            let expect_f = w1.force * alpha + w2.force * beta;
            let expect_t = w1.torque * alpha + w2.torque * beta;
            prop_assert!((w_mixed.force - expect_f).norm() < 1e-10);
            prop_assert!((w_mixed.torque - expect_t).norm() < 1e-10);
        }
    }
}
