//! Physical constants (SI) and isotope masses used by the recoil formulas.

/// Reduced Planck constant [J s].
pub const HBAR: f64 = 1.054_571_817e-34;

/// Planck constant [J s].
pub const PLANCK: f64 = 6.626_070_15e-34;

/// Atomic mass unit [kg].
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;

/// Bohr magneton over Planck constant [Hz/G]. 1.3996 MHz per gauss.
pub const BOHR_MAGNETON_HZ_PER_GAUSS: f64 = 1.399_624_5e6;

/// Mass of the 40Ca+ logic ion [kg].
pub const MASS_CA40: f64 = 39.962_590_9 * ATOMIC_MASS_UNIT;

/// Mass of the 44Ca+ spectroscopy ion [kg].
pub const MASS_CA44: f64 = 43.955_481_5 * ATOMIC_MASS_UNIT;

/// Qubit (narrow quadrupole) transition wavelength on the logic ion [m].
pub const WAVELENGTH_QUBIT: f64 = 729e-9;

/// Spectroscopy (absorption) transition wavelength [m].
pub const WAVELENGTH_ABSORPTION: f64 = 866e-9;

/// Dominant emission wavelength after absorption [m].
pub const WAVELENGTH_EMISSION: f64 = 397e-9;
