//! Simulator for a three-optical-mode / one-mechanical-mode optomechanical
//! system: supermode two-phonon resonance and deterministic generation of
//! multicomponent mechanical cat states.

extern crate openblas_src;

pub mod analysis;
pub mod dynamics;
pub mod experiment;
pub mod hilbert;
pub mod model;

pub use hilbert::C64;

pub const TAU: f64 = std::f64::consts::TAU;
