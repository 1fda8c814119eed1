//! Stochastic validation of the analytic signal model.
//!
//! Contains the isotropic-emission average, the random-walk model of
//! heating-induced geometric phases, the Gaussian contrast lemma check and a
//! full-protocol shot simulator. All randomness flows through [`RngStream`]
//! so every result is reproducible bit-for-bit from `(seed, stream_id)`.

use rand::distributions::uniform::SampleUniform;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::signal::{self, ProtocolParams};

/// Scalars that the Monte Carlo code can sample.
pub trait McReal: Real + SampleUniform {
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;
}

impl McReal for f32 {
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.sample(StandardNormal)
    }
}

impl McReal for f64 {
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.sample(StandardNormal)
    }
}

/// A named, reproducible random stream. Identical `(seed, stream_id)` pairs
/// reproduce identical sample sequences across runs and platforms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    pub fn substream(&self, offset: u64) -> Self {
        Self::new(self.seed, self.stream_id + offset)
    }

    pub fn rng(&self) -> ChaCha12Rng {
        let mut rng = ChaCha12Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

/// Time profile of the cat amplitude during one protocol run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WalkShape {
    /// Linear ramp up over `tau_cat`, immediately back down.
    Triangle,
    /// Ramp up, hold for `tau_wait`, ramp down.
    Trapezoid,
}

#[derive(Debug, Clone, Copy)]
pub struct WalkProfile<T> {
    pub shape: WalkShape,
    pub tau_cat: T,
    pub tau_wait: T,
    pub n_cat: T,
    /// Discretization steps per profile segment.
    pub steps: usize,
}

impl<T: Real> WalkProfile<T> {
    pub fn new(shape: WalkShape, tau_cat: T, tau_wait: T, n_cat: T, steps: usize) -> Result<Self> {
        if steps < 100 {
            return Err(Error::invalid("walk discretization needs at least 100 steps"));
        }
        if !(tau_cat >= T::zero() && tau_wait >= T::zero() && n_cat >= T::zero()) {
            return Err(Error::invalid("walk times and n_cat must be >= 0"));
        }
        Ok(Self {
            shape,
            tau_cat,
            tau_wait,
            n_cat,
            steps,
        })
    }

    /// Analytic variance of the heating phase for this profile shape.
    pub fn analytic_variance(&self, heating_rate: T) -> T {
        match self.shape {
            WalkShape::Triangle => {
                T::of(16.0 / 3.0) * heating_rate * self.tau_cat * self.n_cat
            }
            WalkShape::Trapezoid => {
                T::of(8.0)
                    * heating_rate
                    * self.n_cat
                    * (T::of(2.0 / 3.0) * self.tau_cat + self.tau_wait)
            }
        }
    }
}

/// Monte Carlo estimate of the isotropic emission average
/// `mean(cos(phi_em * cos(theta)))` with `cos(theta)` uniform on [-1, 1].
/// Returns the sample mean and its standard error; the mean estimates
/// `sinc(phi_em)`.
pub fn emission_average<T: McReal, R: Rng + ?Sized>(
    phi_em: T,
    samples: usize,
    rng: &mut R,
) -> Result<(T, T)> {
    if samples == 0 {
        return Err(Error::invalid("emission average needs at least one sample"));
    }
    let mut sum = T::zero();
    let mut sum_sq = T::zero();
    for _ in 0..samples {
        let cos_theta = rng.gen_range(-T::one()..=T::one());
        let v = (phi_em * cos_theta).cos();
        sum += v;
        sum_sq += v * v;
    }
    let n = T::from_usize(samples).unwrap();
    let mean = sum / n;
    let var = (sum_sq / n - mean * mean).max(T::zero());
    let std_error = if samples > 1 {
        (var / (n - T::one())).sqrt()
    } else {
        T::zero()
    };
    Ok((mean, std_error))
}

/// Draw one sample of the heating-induced relative phase between the two cat
/// components by explicit random-walk integration of the profile.
///
/// Per step the motional state receives a kick whose component along the
/// relevant quadrature is normal with variance `R_h dt / 2`; the relative
/// phase is `4 sum(|alpha(t_i)| du_i)` (midpoint-sampled amplitudes).
pub fn heating_walk<T: McReal, R: Rng + ?Sized>(
    profile: &WalkProfile<T>,
    heating_rate: T,
    rng: &mut R,
) -> T {
    if heating_rate == T::zero() {
        return T::zero();
    }
    let half = T::of(0.5);
    let mut phase = T::zero();
    let steps_t = T::from_usize(profile.steps).unwrap();

    let mut walk_segment = |dt: T, amp_at: &dyn Fn(T) -> T, rng: &mut R| {
        if dt <= T::zero() {
            return;
        }
        let sigma = (half * heating_rate * dt).sqrt();
        for i in 0..profile.steps {
            let frac = (T::from_usize(i).unwrap() + half) / steps_t;
            let amp = amp_at(frac);
            phase += T::of(4.0) * amp * sigma * T::standard_normal(rng);
        }
    };

    let amp_max = profile.n_cat.sqrt();
    let dt_cat = profile.tau_cat / steps_t;
    // Rising ramp.
    walk_segment(dt_cat, &|f| amp_max * f, rng);
    // Hold (trapezoid only).
    if profile.shape == WalkShape::Trapezoid {
        let dt_wait = profile.tau_wait / steps_t;
        walk_segment(dt_wait, &|_| amp_max, rng);
    }
    // Falling ramp.
    walk_segment(dt_cat, &|f| amp_max * (T::one() - f), rng);

    phase
}

/// Sample variance of `n_walks` heating-walk draws with its standard error.
pub fn heating_walk_variance<T: McReal, R: Rng + ?Sized>(
    profile: &WalkProfile<T>,
    heating_rate: T,
    n_walks: usize,
    rng: &mut R,
) -> Result<(T, T)> {
    if n_walks < 2 {
        return Err(Error::invalid("variance estimate needs at least two walks"));
    }
    let mut sum = T::zero();
    let mut sum_sq = T::zero();
    for _ in 0..n_walks {
        let p = heating_walk(profile, heating_rate, rng);
        sum += p;
        sum_sq += p * p;
    }
    let n = T::from_usize(n_walks).unwrap();
    let mean = sum / n;
    let var = (sum_sq / n - mean * mean) * n / (n - T::one());
    // Standard error of the sample variance of a Gaussian: var * sqrt(2/(n-1)).
    let se = var * (T::of(2.0) / (n - T::one())).sqrt();
    Ok((var, se))
}

/// Check the Gaussian contrast lemma `mean(cos X) = exp(-var/2)` by sampling.
/// Returns `(mc_mean_cos, analytic)`.
pub fn gaussian_contrast_check<T: McReal, R: Rng + ?Sized>(
    variance: T,
    samples: usize,
    rng: &mut R,
) -> (T, T) {
    let analytic = (-variance / T::of(2.0)).exp();
    if variance == T::zero() || samples == 0 {
        return (T::one(), analytic);
    }
    let sigma = variance.sqrt();
    let mut sum = T::zero();
    for _ in 0..samples {
        let x = sigma * T::standard_normal(rng);
        sum += x.cos();
    }
    (sum / T::from_usize(samples).unwrap(), analytic)
}

/// Estimates of the two qubit expectation values from projective shot
/// sampling, with binomial standard errors.
#[derive(Debug, Clone, Copy)]
pub struct ShotEstimate<T> {
    pub sz: T,
    pub sy: T,
    pub sz_err: T,
    pub sy_err: T,
}

/// Simulate the full protocol shot by shot: Bernoulli scattering, uniform
/// emission direction, Gaussian heating phase (the random walk is exactly
/// Gaussian, so its analytic variance is sampled directly) and projective
/// measurement in each basis. `shots` shots are spent per basis.
pub fn simulate_protocol<T: McReal, R: Rng + ?Sized>(
    params: &ProtocolParams<T>,
    phi_sc: T,
    shots: usize,
    scatter_prob: T,
    rng: &mut R,
) -> Result<ShotEstimate<T>> {
    if shots == 0 {
        return Err(Error::invalid("shot simulation needs at least one shot"));
    }
    if !(scatter_prob >= T::zero() && scatter_prob <= T::one()) {
        return Err(Error::invalid("scatter probability must lie in [0, 1]"));
    }
    params.validate()?;
    let heating_sigma = params.heating_phase_variance().sqrt();
    let two = T::of(2.0);

    let total_phase = |rng: &mut R| -> T {
        let scattered = rng.gen_range(T::zero()..T::one()) < scatter_prob;
        let mut phi = T::zero();
        if scattered {
            let cos_theta = rng.gen_range(-T::one()..=T::one());
            phi += signal::phi_abs(params, phi_sc)
                + signal::phi_em_amplitude(params, phi_sc) * cos_theta;
        }
        if heating_sigma > T::zero() {
            phi += heating_sigma * T::standard_normal(rng);
        }
        phi
    };

    let n = T::from_usize(shots).unwrap();
    let mut up_z = 0usize;
    for _ in 0..shots {
        let phi = total_phase(rng);
        let p_up = (T::one() - phi.cos()) / two;
        if rng.gen_range(T::zero()..T::one()) < p_up {
            up_z += 1;
        }
    }
    let mut up_y = 0usize;
    for _ in 0..shots {
        let phi = total_phase(rng);
        let p_up = (T::one() + phi.sin()) / two;
        if rng.gen_range(T::zero()..T::one()) < p_up {
            up_y += 1;
        }
    }

    let est = |ups: usize| -> (T, T) {
        let p = T::from_usize(ups).unwrap() / n;
        let err = two * (p * (T::one() - p) / n).sqrt();
        (two * p - T::one(), err)
    };
    let (pz, ez) = est(up_z);
    let (py, ey) = est(up_y);
    Ok(ShotEstimate {
        sz: pz,
        sy: py,
        sz_err: ez,
        sy_err: ey,
    })
}

/// Parallel batched version of [`simulate_protocol`]. Batches use disjoint
/// `stream_id`s and are combined in stream order, so the result is
/// independent of worker count and scheduling.
pub fn simulate_protocol_parallel<T: McReal>(
    params: &ProtocolParams<T>,
    phi_sc: T,
    shots_per_batch: usize,
    batches: usize,
    scatter_prob: T,
    stream: RngStream,
) -> Result<ShotEstimate<T>> {
    if batches == 0 {
        return Err(Error::invalid("need at least one batch"));
    }
    let results: Vec<ShotEstimate<T>> = (0..batches as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream.substream(i).rng();
            simulate_protocol(params, phi_sc, shots_per_batch, scatter_prob, &mut rng)
        })
        .collect::<Result<_>>()?;

    let total = T::from_usize(shots_per_batch * batches).unwrap();
    let two = T::of(2.0);
    // Recover up-counts per batch and merge; summation order is batch order.
    let per_batch = T::from_usize(shots_per_batch).unwrap();
    let mut pz_sum = T::zero();
    let mut py_sum = T::zero();
    for r in &results {
        pz_sum += (r.sz + T::one()) / two * per_batch;
        py_sum += (r.sy + T::one()) / two * per_batch;
    }
    let pz = pz_sum / total;
    let py = py_sum / total;
    Ok(ShotEstimate {
        sz: two * pz - T::one(),
        sy: two * py - T::one(),
        sz_err: two * (pz * (T::one() - pz) / total).sqrt(),
        sy_err: two * (py * (T::one() - py) / total).sqrt(),
    })
}
