//! Closed-loop simulator for lighter-than-air micro-drones.
//!
//! The crate models the full loop needed to study buoyant light-seeking
//! vehicles at desk scale: 6-DoF rigid-body dynamics with buoyancy, drag, and
//! rotor forces; thrust-curve and allocation-matrix identification; a
//! cascaded PID flight controller; a modulated-beacon optical channel with
//! FFT demodulation; three single-beacon guidance strategies; an energy
//! budget with solar harvesting; and a seeded scenario runner with batch and
//! study drivers.

pub mod control;
pub mod dynamics;
pub mod energy;
pub mod guidance;
pub mod identification;
pub mod optics;
pub mod platform;
pub mod propulsion;
pub mod scenario;
