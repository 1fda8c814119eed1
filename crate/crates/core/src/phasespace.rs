//! Coherent-state phase-space algebra.
//!
//! Displacement composition follows `D(a2) D(a1) = exp(i Im(a1* a2)) D(a1 + a2)`,
//! so a closed polygonal path in phase space accumulates a geometric phase of
//! twice its signed enclosed area. [`lamb_dicke`] and [`cat_size`] convert the
//! experimental drive parameters into the dimensionless cat amplitude.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// A point in phase space labelling a coherent state. `|PhasePoint|^2` is the
/// mean phonon number of the state it represents.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePoint<T> {
    pub re: T,
    pub im: T,
}

impl<T: Real> PhasePoint<T> {
    pub fn new(re: T, im: T) -> Self {
        Self { re, im }
    }

    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero())
    }

    /// Magnitude: the square root of the mean phonon number.
    pub fn abs(&self) -> T {
        self.re.hypot(self.im)
    }

    pub fn as_complex(&self) -> Complex<T> {
        Complex::new(self.re, self.im)
    }

    pub fn from_complex(z: Complex<T>) -> Self {
        Self::new(z.re, z.im)
    }

    pub fn conj(&self) -> Self {
        Self::new(self.re, -self.im)
    }

    pub fn is_finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

impl<T: Real> std::ops::Add for PhasePoint<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.re + rhs.re, self.im + rhs.im)
    }
}

impl<T: Real> std::ops::Neg for PhasePoint<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.re, -self.im)
    }
}

/// Net displacement of a chained sequence of displacement operators together
/// with the geometric phase picked up along the way.
///
/// Composing a path with its exact reverse yields a zero net displacement and
/// zero geometric phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DisplacementRecord<T> {
    pub net: PhasePoint<T>,
    pub geo_phase: T,
}

impl<T: Real> DisplacementRecord<T> {
    pub fn identity() -> Self {
        Self {
            net: PhasePoint::zero(),
            geo_phase: T::zero(),
        }
    }

    /// Chain one more displacement onto the record. The phase increment is
    /// `Im(net* d)` per the pairwise composition law.
    pub fn apply(self, d: PhasePoint<T>) -> Self {
        let inc = (self.net.as_complex().conj() * d.as_complex()).im;
        Self {
            net: self.net + d,
            geo_phase: self.geo_phase + inc,
        }
    }
}

impl<T: Real> Default for DisplacementRecord<T> {
    fn default() -> Self {
        Self::identity()
    }
}

/// Chain two displacements onto an accumulated record, `d1` first.
pub fn compose<T: Real>(
    d1: PhasePoint<T>,
    d2: PhasePoint<T>,
    acc: DisplacementRecord<T>,
) -> DisplacementRecord<T> {
    acc.apply(d1).apply(d2)
}

/// One vibrational mode as seen by a given ion and beam geometry.
#[derive(Debug, Clone, Copy)]
pub struct ModeSpec<T> {
    /// Mode frequency [Hz].
    pub frequency: T,
    /// Mass of the ion the beam couples to [kg].
    pub ion_mass: T,
    /// Normal-mode participation of that ion, in [0, 1].
    pub participation: T,
    /// Angle between beam wavevector and mode axis [rad].
    pub beam_angle: T,
}

impl<T: Real> ModeSpec<T> {
    pub fn new(frequency: T, ion_mass: T, participation: T, beam_angle: T) -> Result<Self> {
        if !(frequency > T::zero()) {
            return Err(Error::invalid("mode frequency must be positive"));
        }
        if !(ion_mass > T::zero()) {
            return Err(Error::invalid("ion mass must be positive"));
        }
        if !(participation >= T::zero() && participation <= T::one()) {
            return Err(Error::invalid("participation must lie in [0, 1]"));
        }
        Ok(Self {
            frequency,
            ion_mass,
            participation,
            beam_angle,
        })
    }
}

/// Lamb-Dicke factor of a beam of the given wavelength coupling to `mode`:
/// `(2 pi / lambda) * sqrt(hbar / (2 m omega)) * participation * cos(angle)`.
///
/// With unit participation and a beam along the mode axis this equals
/// `sqrt(E_rec / (h nu))`.
pub fn lamb_dicke<T: Real>(wavelength: T, mode: &ModeSpec<T>) -> Result<T> {
    if !(wavelength > T::zero()) {
        return Err(Error::invalid("wavelength must be positive"));
    }
    if !(mode.frequency > T::zero()) {
        return Err(Error::invalid("mode frequency must be positive"));
    }
    let two_pi = T::of(2.0) * T::PI();
    let k = two_pi / wavelength;
    let omega = two_pi * mode.frequency;
    let x0 = (T::of(crate::constants::HBAR) / (T::of(2.0) * mode.ion_mass * omega)).sqrt();
    Ok(k * x0 * mode.participation * mode.beam_angle.cos())
}

/// Cat amplitude produced by a bichromatic pulse of Rabi frequency `omega`
/// (full-power 2*pi rotation convention) applied for time `t`:
/// `alpha = eta * omega * t / 2`.
pub fn cat_size<T: Real>(eta: T, omega: T, t: T) -> T {
    eta * omega * t / T::of(2.0)
}
