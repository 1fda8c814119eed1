//! Spectral model of the D3/2 to P1/2 absorption line.
//!
//! The line is a sum of Zeeman-split Lorentzian components with squared
//! Clebsch-Gordan weights. A saturable pump-out model converts the
//! peak-normalized excitation profile into a scattering probability, and
//! [`spectrum_scan`] projects it onto the fringe-amplitude observable.

use crate::constants::BOHR_MAGNETON_HZ_PER_GAUSS;
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::signal::{self, ProtocolParams};

/// Zeeman-split line model. Angular momenta are fixed at J = 3/2 (lower) and
/// J = 1/2 (upper); the Lande factors and field are configurable.
#[derive(Debug, Clone, Copy)]
pub struct SpectralModel<T> {
    /// Natural linewidth, full width at half maximum [Hz].
    pub natural_fwhm: T,
    /// Magnetic field [gauss].
    pub b_field: T,
    /// Lande factor of the lower (J = 3/2) level.
    pub g_lower: T,
    /// Lande factor of the upper (J = 1/2) level.
    pub g_upper: T,
}

impl<T: Real> Default for SpectralModel<T> {
    fn default() -> Self {
        Self {
            natural_fwhm: T::of(22.4e6),
            b_field: T::of(4.1),
            g_lower: T::of(0.8),
            g_upper: T::of(2.0 / 3.0),
        }
    }
}

impl<T: Real> SpectralModel<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.natural_fwhm > T::zero()) {
            return Err(Error::invalid("natural linewidth must be positive"));
        }
        if !(self.b_field >= T::zero()) {
            return Err(Error::invalid("magnetic field must be non-negative"));
        }
        Ok(())
    }
}

/// One allowed Zeeman component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeemanComponent<T> {
    /// Line-center shift [Hz].
    pub detuning: T,
    /// Normalized squared Clebsch-Gordan weight.
    pub weight: T,
}

/// Enumerate the allowed m(3/2) -> m(1/2) dipole components with detunings
/// `(g_u m_u - g_l m_l) mu_B B / h` and normalized squared Clebsch-Gordan
/// weights, assuming equal population of the lower sublevels. Degenerate
/// components are merged, so B = 0 yields a single component of weight 1.
pub fn zeeman_components<T: Real>(model: &SpectralModel<T>) -> Vec<ZeemanComponent<T>> {
    // Squared CG coefficients for J = 3/2 -> 1/2: sigma from the stretched
    // states 1/2, pi 1/3, sigma from the inner states 1/6.
    let strengths = [
        (-3i32, -1i32, 1.0 / 2.0),
        (-1, -1, 1.0 / 3.0),
        (-1, 1, 1.0 / 6.0),
        (1, -1, 1.0 / 6.0),
        (1, 1, 1.0 / 3.0),
        (3, 1, 1.0 / 2.0),
    ];
    let total: f64 = strengths.iter().map(|&(_, _, s)| s).sum();
    let scale = T::of(BOHR_MAGNETON_HZ_PER_GAUSS) * model.b_field;
    let mut components: Vec<ZeemanComponent<T>> = Vec::new();
    for &(two_ml, two_mu, s) in &strengths {
        let shift = model.g_upper * T::of(two_mu as f64 / 2.0)
            - model.g_lower * T::of(two_ml as f64 / 2.0);
        let detuning = shift * scale;
        let weight = T::of(s / total);
        match components.iter_mut().find(|c| c.detuning == detuning) {
            Some(c) => c.weight += weight,
            None => components.push(ZeemanComponent { detuning, weight }),
        }
    }
    components.sort_by(|a, b| a.detuning.partial_cmp(&b.detuning).unwrap());
    components
}

fn lorentzian<T: Real>(delta: T, fwhm: T) -> T {
    let u = T::of(2.0) * delta / fwhm;
    T::one() / (T::one() + u * u)
}

/// Peak-normalized composite excitation profile `L(delta)`.
pub fn excitation_profile<T: Real>(model: &SpectralModel<T>, delta: T) -> T {
    let components = zeeman_components(model);
    let raw = |d: T| -> T {
        components
            .iter()
            .map(|c| c.weight * lorentzian(d - c.detuning, model.natural_fwhm))
            .sum()
    };
    raw(delta) / raw(T::zero())
}

/// Drive strength of the pump-out beam.
#[derive(Debug, Clone, Copy)]
pub struct DriveParams<T> {
    /// Relative laser power.
    pub power: T,
    /// Pulse duration [s].
    pub duration: T,
    /// Calibration constant kappa [1/s] converting power x duration into a
    /// resonant optical depth.
    pub saturation_scale: T,
}

impl<T: Real> DriveParams<T> {
    /// Calibration anchor: unit power gives a resonant scattering
    /// probability of about one half.
    pub fn experiment_defaults() -> Self {
        Self {
            power: T::of(2.0),
            duration: T::of(5e-6),
            saturation_scale: T::of(0.15e6),
        }
    }

    /// The three relative powers of the published power-broadening scan.
    pub fn scan_powers() -> [T; 3] {
        [T::of(1.0), T::of(2.0), T::of(4.0)]
    }

    pub fn validate(&self) -> Result<()> {
        if self.power < T::zero() || self.duration < T::zero() || self.saturation_scale < T::zero()
        {
            return Err(Error::invalid("drive parameters must be non-negative"));
        }
        Ok(())
    }
}

/// Probability of scattering at least one photon:
/// `1 - exp(-kappa power duration L(delta))`.
pub fn scatter_probability<T: Real>(
    model: &SpectralModel<T>,
    drive: &DriveParams<T>,
    delta: T,
) -> T {
    let depth = drive.saturation_scale * drive.power * drive.duration;
    T::one() - (-depth * excitation_profile(model, delta)).exp()
}

/// Geometric distribution of the number of infrared photons scattered before
/// pump-out to the ground state.
#[derive(Debug, Clone, Copy)]
pub struct PhotonNumberDistribution<T> {
    branch_blue: T,
}

impl<T: Real> PhotonNumberDistribution<T> {
    pub fn new(branch_blue: T) -> Result<Self> {
        if !(branch_blue > T::zero() && branch_blue <= T::one()) {
            return Err(Error::invalid("blue branching ratio must lie in (0, 1]"));
        }
        Ok(Self { branch_blue })
    }

    /// `P(k) = (1 - b)^(k-1) b` for `k >= 1`.
    pub fn pmf(&self, k: usize) -> T {
        if k == 0 {
            return T::zero();
        }
        (T::one() - self.branch_blue).powi(k as i32 - 1) * self.branch_blue
    }

    pub fn p_single(&self) -> T {
        self.branch_blue
    }

    pub fn p_multiple(&self) -> T {
        T::one() - self.branch_blue
    }

    pub fn mean(&self) -> T {
        T::one() / self.branch_blue
    }
}

/// Construct the photon-number distribution for a given blue branching
/// ratio.
pub fn photon_number_distribution<T: Real>(branch_blue: T) -> Result<PhotonNumberDistribution<T>> {
    PhotonNumberDistribution::new(branch_blue)
}

/// Fringe amplitude spectrum: `A_y(delta)` is the scattering probability
/// times the peak fringe amplitude of the cat signal (recoil amplitude times
/// heating contrast).
pub fn spectrum_scan<T: Real>(
    model: &SpectralModel<T>,
    drive: &DriveParams<T>,
    params: &ProtocolParams<T>,
    grid: &[T],
) -> Result<Vec<(T, T)>> {
    if grid.is_empty() {
        return Err(Error::invalid("detuning grid must be non-empty"));
    }
    model.validate()?;
    drive.validate()?;
    params.validate()?;
    let amplitude = signal::recoil_amplitude(params) * signal::heating_contrast(params);
    Ok(grid
        .iter()
        .map(|&delta| (delta, scatter_probability(model, drive, delta) * amplitude))
        .collect())
}

/// Default detuning grid for spectrum scans: +-120 MHz in 61 points.
pub fn default_scan_grid<T: Real>() -> Vec<T> {
    let span = T::of(120e6);
    (0..61)
        .map(|i| -span + T::of(2.0) * span * T::of(i as f64) / T::of(60.0))
        .collect()
}
