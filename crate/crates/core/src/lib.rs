//! Simulation and analysis toolkit for entanglement-enhanced detection of
//! single-photon recoil on a trapped ion.
//!
//! A photon absorbed by an ion carrying a motional Schrödinger-cat state
//! displaces both cat components and imprints a geometric phase on the
//! entangled qubit; reversing the cat maps that phase onto qubit
//! expectation values. The crate models this protocol at three levels: a
//! closed-form signal model ([`signal`]), a Monte Carlo sampler with
//! spontaneous-emission and heating noise ([`montecarlo`]), and an exact
//! truncated-oscillator reference ([`fock`]). Around the core sit detection
//! statistics ([`statistics`]), curve fitting ([`fitting`]), the
//! Zeeman-split line model ([`lineprofile`]) and a pulse-sequence DSL
//! ([`sequence`]).
//!
//! Numeric modules are generic over the scalar type through
//! [`scalar::Real`] (implemented for `f32` and `f64`); the Fock-space and
//! statistics layers are fixed to `f64`.

pub mod constants;
pub mod error;
pub mod fitting;
pub mod fock;
pub mod lineprofile;
pub mod montecarlo;
pub mod phasespace;
pub mod scalar;
pub mod sequence;
pub mod signal;
pub mod statistics;

pub use error::{Error, Result};
pub use scalar::Real;

/// Default-precision aliases for the generic types.
pub type PhasePoint = phasespace::PhasePoint<f64>;
pub type DisplacementRecord = phasespace::DisplacementRecord<f64>;
pub type ModeSpec = phasespace::ModeSpec<f64>;
pub type ProtocolParams = signal::ProtocolParams<f64>;
pub type QubitExpectation = signal::QubitExpectation<f64>;
pub type WalkProfile = montecarlo::WalkProfile<f64>;
pub type ShotEstimate = montecarlo::ShotEstimate<f64>;
pub type WeightedSeries = fitting::WeightedSeries<f64>;
pub type SinusoidFit = fitting::SinusoidFit<f64>;
pub type GaussianFit = fitting::GaussianFit<f64>;
pub type SpectralModel = lineprofile::SpectralModel<f64>;
pub type DriveParams = lineprofile::DriveParams<f64>;

/// Single-precision aliases.
pub type PhasePoint32 = phasespace::PhasePoint<f32>;
pub type ProtocolParams32 = signal::ProtocolParams<f32>;
pub type WeightedSeries32 = fitting::WeightedSeries<f32>;
