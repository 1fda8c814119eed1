//! Weighted least-squares fits for fringe and line-shape data.
//!
//! A small damped Gauss-Newton solver with analytic Jacobians backs two
//! models: a four-parameter sinusoid `A sin(2 pi x / T + phi) + c` and a
//! four-parameter Gaussian `A exp(-(x - x0)^2 / (2 w^2)) + c`.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Samples `(x, y)` with one-sigma uncertainties on `y`.
#[derive(Debug, Clone)]
pub struct WeightedSeries<T> {
    pub x: Vec<T>,
    pub y: Vec<T>,
    pub sigma: Vec<T>,
}

impl<T: Real> WeightedSeries<T> {
    pub fn new(x: Vec<T>, y: Vec<T>, sigma: Vec<T>) -> Result<Self> {
        if x.len() != y.len() || x.len() != sigma.len() {
            return Err(Error::invalid("series columns must have equal length"));
        }
        if x.is_empty() {
            return Err(Error::invalid("series must be non-empty"));
        }
        if sigma.iter().any(|s| !(*s > T::zero())) {
            return Err(Error::invalid("uncertainties must be positive"));
        }
        Ok(Self { x, y, sigma })
    }

    /// Uniform uncertainties of one for unweighted fits.
    pub fn unweighted(x: Vec<T>, y: Vec<T>) -> Result<Self> {
        let sigma = vec![T::one(); x.len()];
        Self::new(x, y, sigma)
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }
}

/// Converged fit parameters with their covariance diagonal.
#[derive(Debug, Clone)]
pub struct FitResult<T> {
    pub params: Vec<T>,
    /// One-sigma parameter uncertainties from the inverse normal matrix.
    pub uncertainties: Vec<T>,
    pub chi_square: T,
    pub dof: usize,
    pub iterations: usize,
}

impl<T: Real> FitResult<T> {
    pub fn reduced_chi_square(&self) -> T {
        if self.dof == 0 {
            return T::nan();
        }
        self.chi_square / T::from_usize(self.dof).unwrap()
    }
}

/// Solve the symmetric system `a x = b` by Gaussian elimination with partial
/// pivoting; `a` is row-major `n x n`.
fn solve_linear<T: Real>(a: &mut [T], b: &mut [T], n: usize) -> Result<()> {
    for col in 0..n {
        let mut pivot = col;
        for row in col + 1..n {
            if a[row * n + col].abs() > a[pivot * n + col].abs() {
                pivot = row;
            }
        }
        if a[pivot * n + col].abs() < T::of(1e-300) {
            return Err(Error::SingularFit);
        }
        if pivot != col {
            for k in 0..n {
                a.swap(col * n + k, pivot * n + k);
            }
            b.swap(col, pivot);
        }
        let inv = T::one() / a[col * n + col];
        for row in col + 1..n {
            let f = a[row * n + col] * inv;
            if f == T::zero() {
                continue;
            }
            for k in col..n {
                let v = a[col * n + k];
                a[row * n + k] -= f * v;
            }
            let bv = b[col];
            b[row] -= f * bv;
        }
    }
    for col in (0..n).rev() {
        let mut s = b[col];
        for k in col + 1..n {
            s -= a[col * n + k] * b[k];
        }
        b[col] = s / a[col * n + col];
    }
    Ok(())
}

fn invert_matrix<T: Real>(a: &[T], n: usize) -> Result<Vec<T>> {
    let mut inv = vec![T::zero(); n * n];
    for col in 0..n {
        let mut rhs = vec![T::zero(); n];
        rhs[col] = T::one();
        let mut work = a.to_vec();
        solve_linear(&mut work, &mut rhs, n)?;
        for row in 0..n {
            inv[row * n + col] = rhs[row];
        }
    }
    Ok(inv)
}

/// Damped Gauss-Newton minimization of the weighted residual sum of squares.
///
/// `model(params, x)` returns the model value and its gradient with respect
/// to the parameters. The damping factor grows on rejected steps and shrinks
/// on accepted ones (Levenberg style).
pub fn fit<T, F>(series: &WeightedSeries<T>, initial: &[T], model: F) -> Result<FitResult<T>>
where
    T: Real,
    F: Fn(&[T], T) -> (T, Vec<T>),
{
    let np = initial.len();
    if series.len() <= np {
        return Err(Error::invalid("fit needs more points than parameters"));
    }
    let mut params = initial.to_vec();
    let chi2_of = |p: &[T]| -> T {
        series
            .x
            .iter()
            .zip(&series.y)
            .zip(&series.sigma)
            .map(|((&x, &y), &s)| {
                let (f, _) = model(p, x);
                let r = (y - f) / s;
                r * r
            })
            .sum()
    };

    let mut chi2 = chi2_of(&params);
    let mut lambda = T::of(1e-3);
    let mut iterations = 0usize;
    let max_iter = 200;

    for _ in 0..max_iter {
        iterations += 1;
        let mut normal = vec![T::zero(); np * np];
        let mut grad = vec![T::zero(); np];
        for ((&x, &y), &s) in series.x.iter().zip(&series.y).zip(&series.sigma) {
            let (f, j) = model(&params, x);
            let w = T::one() / (s * s);
            let r = y - f;
            for a in 0..np {
                grad[a] += w * r * j[a];
                for b in 0..np {
                    normal[a * np + b] += w * j[a] * j[b];
                }
            }
        }
        let mut damped = normal.clone();
        for a in 0..np {
            damped[a * np + a] *= T::one() + lambda;
        }
        let mut step = grad.clone();
        if solve_linear(&mut damped, &mut step, np).is_err() {
            lambda *= T::of(10.0);
            if lambda > T::of(1e12) {
                return Err(Error::SingularFit);
            }
            continue;
        }
        let trial: Vec<T> = params.iter().zip(&step).map(|(&p, &d)| p + d).collect();
        let trial_chi2 = chi2_of(&trial);
        if trial_chi2.is_finite() && trial_chi2 <= chi2 {
            let rel = (chi2 - trial_chi2) / (chi2 + T::of(1e-30));
            params = trial;
            chi2 = trial_chi2;
            lambda = (lambda / T::of(10.0)).max(T::of(1e-12));
            if rel < T::of(1e-12) {
                break;
            }
        } else {
            lambda *= T::of(10.0);
            if lambda > T::of(1e12) {
                break;
            }
        }
    }

    // Covariance from the undamped normal matrix at the optimum.
    let mut normal = vec![T::zero(); np * np];
    for (&x, &s) in series.x.iter().zip(&series.sigma) {
        let (_, j) = model(&params, x);
        let w = T::one() / (s * s);
        for a in 0..np {
            for b in 0..np {
                normal[a * np + b] += w * j[a] * j[b];
            }
        }
    }
    let cov = invert_matrix(&normal, np)?;
    let uncertainties: Vec<T> = (0..np)
        .map(|a| cov[a * np + a].max(T::zero()).sqrt())
        .collect();

    Ok(FitResult {
        params,
        uncertainties,
        chi_square: chi2,
        dof: series.len() - np,
        iterations,
    })
}

/// Sinusoid parameters `[amplitude, period, phase, offset]` for
/// `y = A sin(2 pi x / T + phi) + c`.
#[derive(Debug, Clone, Copy)]
pub struct SinusoidFit<T> {
    pub amplitude: T,
    pub period: T,
    pub phase: T,
    pub offset: T,
    pub amplitude_err: T,
    pub period_err: T,
    pub chi_square: T,
    pub dof: usize,
}

fn sinusoid_model<T: Real>(p: &[T], x: T) -> (T, Vec<T>) {
    let two_pi = T::of(2.0) * T::PI();
    let (a, period, phase, c) = (p[0], p[1], p[2], p[3]);
    let arg = two_pi * x / period + phase;
    let (s, co) = (arg.sin(), arg.cos());
    let f = a * s + c;
    let j = vec![
        s,
        -a * co * two_pi * x / (period * period),
        a * co,
        T::one(),
    ];
    (f, j)
}

/// Fit a sinusoid with the period as a free parameter, seeded by
/// `period_guess` and a 32-point phase scan.
///
/// The result is normalized to `amplitude >= 0` and `phase` in `[-pi, pi)`.
pub fn fit_sinusoid<T: Real>(
    series: &WeightedSeries<T>,
    period_guess: T,
) -> Result<SinusoidFit<T>> {
    if !(period_guess > T::zero()) {
        return Err(Error::invalid("period guess must be positive"));
    }
    let n = T::from_usize(series.len()).unwrap();
    let mean: T = series.y.iter().copied().sum::<T>() / n;
    let spread = series
        .y
        .iter()
        .map(|&y| (y - mean).abs())
        .fold(T::zero(), T::max);
    let amp0 = spread.max(T::of(1e-6));

    // Coarse phase scan at the guessed period.
    let two_pi = T::of(2.0) * T::PI();
    let mut best_phase = T::zero();
    let mut best_score = T::infinity();
    for i in 0..32 {
        let phase = two_pi * T::from_usize(i).unwrap() / T::of(32.0);
        let score: T = series
            .x
            .iter()
            .zip(&series.y)
            .map(|(&x, &y)| {
                let f = amp0 * (two_pi * x / period_guess + phase).sin() + mean;
                (y - f) * (y - f)
            })
            .sum();
        if score < best_score {
            best_score = score;
            best_phase = phase;
        }
    }

    let initial = [amp0, period_guess, best_phase, mean];
    let result = fit(series, &initial, sinusoid_model)?;
    let mut amplitude = result.params[0];
    let mut phase = result.params[2];
    let period = result.params[1].abs();
    if amplitude < T::zero() {
        amplitude = -amplitude;
        phase += T::PI();
    }
    let mut wrapped = (phase + T::PI()) % two_pi;
    if wrapped < T::zero() {
        wrapped += two_pi;
    }
    let phase = wrapped - T::PI();
    Ok(SinusoidFit {
        amplitude,
        period,
        phase,
        offset: result.params[3],
        amplitude_err: result.uncertainties[0],
        period_err: result.uncertainties[1],
        chi_square: result.chi_square,
        dof: result.dof,
    })
}

/// Gaussian parameters for `y = A exp(-(x - x0)^2 / (2 w^2)) + c`.
#[derive(Debug, Clone, Copy)]
pub struct GaussianFit<T> {
    pub amplitude: T,
    pub center: T,
    pub width: T,
    pub offset: T,
    pub center_err: T,
    pub width_err: T,
    pub chi_square: T,
    pub dof: usize,
}

impl<T: Real> GaussianFit<T> {
    /// Full width at half maximum, `2 sqrt(2 ln 2) w`.
    pub fn fwhm(&self) -> T {
        T::of(2.0) * (T::of(2.0) * T::of(2.0).ln()).sqrt() * self.width
    }

    pub fn fwhm_err(&self) -> T {
        T::of(2.0) * (T::of(2.0) * T::of(2.0).ln()).sqrt() * self.width_err
    }
}

fn gaussian_model<T: Real>(p: &[T], x: T) -> (T, Vec<T>) {
    let (a, x0, w, c) = (p[0], p[1], p[2], p[3]);
    let u = (x - x0) / w;
    let e = (-u * u / T::of(2.0)).exp();
    let f = a * e + c;
    let j = vec![e, a * e * u / w, a * e * u * u / w, T::one()];
    (f, j)
}

/// Fit a Gaussian peak; initial center, width and amplitude are estimated
/// from the extremum and the span of the data.
pub fn fit_gaussian<T: Real>(series: &WeightedSeries<T>) -> Result<GaussianFit<T>> {
    let n = series.len();
    let (mut lo, mut hi, mut hi_at) = (T::infinity(), -T::infinity(), series.x[0]);
    for (&x, &y) in series.x.iter().zip(&series.y) {
        if y > hi {
            hi = y;
            hi_at = x;
        }
        lo = lo.min(y);
    }
    let span = (series.x[n - 1] - series.x[0]).abs().max(T::of(1e-12));
    let initial = [hi - lo, hi_at, span / T::of(6.0), lo];
    let result = fit(series, &initial, gaussian_model)?;
    Ok(GaussianFit {
        amplitude: result.params[0],
        center: result.params[1],
        width: result.params[2].abs(),
        offset: result.params[3],
        center_err: result.uncertainties[1],
        width_err: result.uncertainties[2].abs(),
        chi_square: result.chi_square,
        dof: result.dof,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::Rng;
    use rand::SeedableRng;

    fn noisy_sinusoid(
        amp: f64,
        period: f64,
        phase: f64,
        offset: f64,
        sigma: f64,
        n: usize,
        seed: u64,
    ) -> WeightedSeries<f64> {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
        let x: Vec<f64> = (0..n).map(|i| i as f64 * 2.5 * period / n as f64).collect();
        let y: Vec<f64> = x
            .iter()
            .map(|&x| {
                let clean = amp * (2.0 * std::f64::consts::PI * x / period + phase).sin() + offset;
                let u1: f64 = rng.gen::<f64>().max(1e-12);
                let u2: f64 = rng.gen();
                let g = (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos();
                clean + sigma * g
            })
            .collect();
        WeightedSeries::new(x, y, vec![sigma; n]).unwrap()
    }

    #[test]
    fn exact_sinusoid_recovered() {
        let series = noisy_sinusoid(0.54, 3.1, 0.7, 0.05, 1e-9, 60, 1);
        let fit = fit_sinusoid(&series, 3.0).unwrap();
        assert_relative_eq!(fit.amplitude, 0.54, epsilon = 1e-6);
        assert_relative_eq!(fit.period, 3.1, epsilon = 1e-6);
        assert_relative_eq!(fit.phase, 0.7, epsilon = 1e-6);
        assert_relative_eq!(fit.offset, 0.05, epsilon = 1e-6);
    }

    #[test]
    fn noisy_sinusoid_within_errors() {
        let series = noisy_sinusoid(0.54, 3.1, 0.7, 0.05, 0.03, 120, 2);
        let fit = fit_sinusoid(&series, 2.8).unwrap();
        assert!((fit.amplitude - 0.54).abs() < 4.0 * fit.amplitude_err);
        assert!((fit.period - 3.1).abs() < 4.0 * fit.period_err);
        let red = fit.chi_square / fit.dof as f64;
        assert!((0.5..2.0).contains(&red), "reduced chi2 {red}");
    }

    #[test]
    fn negative_amplitude_normalized() {
        let series = noisy_sinusoid(-0.4, 2.0, 0.3, 0.0, 1e-9, 50, 3);
        let fit = fit_sinusoid(&series, 2.0).unwrap();
        assert!(fit.amplitude > 0.0);
        // -A sin(t) = A sin(t + pi).
        assert_relative_eq!(fit.amplitude, 0.4, epsilon = 1e-6);
        assert_relative_eq!(fit.phase, 0.3 - std::f64::consts::PI, epsilon = 1e-6);
    }

    #[test]
    fn sigma_rescale_leaves_params_scales_chi2() {
        let base = noisy_sinusoid(0.5, 3.0, 0.2, 0.1, 0.02, 80, 4);
        let doubled = WeightedSeries::new(
            base.x.clone(),
            base.y.clone(),
            base.sigma.iter().map(|s| 2.0 * s).collect(),
        )
        .unwrap();
        let f1 = fit_sinusoid(&base, 3.0).unwrap();
        let f2 = fit_sinusoid(&doubled, 3.0).unwrap();
        assert_relative_eq!(f1.amplitude, f2.amplitude, epsilon = 1e-7);
        assert_relative_eq!(f1.period, f2.period, epsilon = 1e-7);
        assert_relative_eq!(f1.chi_square, 4.0 * f2.chi_square, epsilon = 1e-5);
        assert_relative_eq!(f2.amplitude_err, 2.0 * f1.amplitude_err, epsilon = 1e-5);
    }

    #[test]
    fn residual_gradient_orthogonality() {
        let series = noisy_sinusoid(0.5, 3.0, 0.2, 0.1, 0.02, 80, 5);
        let f = fit_sinusoid(&series, 3.0).unwrap();
        let p = [f.amplitude, f.period, f.phase, f.offset];
        for a in 0..4 {
            let dot: f64 = series
                .x
                .iter()
                .zip(&series.y)
                .zip(&series.sigma)
                .map(|((&x, &y), &s)| {
                    let (fx, j) = sinusoid_model(&p, x);
                    (y - fx) / (s * s) * j[a]
                })
                .sum();
            assert!(dot.abs() < 1e-5, "param {a}: gradient {dot}");
        }
    }

    #[test]
    fn exact_gaussian_recovered() {
        let x: Vec<f64> = (0..41).map(|i| -20.0 + i as f64).collect();
        let y: Vec<f64> = x
            .iter()
            .map(|&x| 0.8 * (-(x - 2.0) * (x - 2.0) / (2.0 * 36.0)).exp() + 0.1)
            .collect();
        let series = WeightedSeries::new(x, y, vec![0.01; 41]).unwrap();
        let fit = fit_gaussian(&series).unwrap();
        assert_relative_eq!(fit.amplitude, 0.8, epsilon = 1e-6);
        assert_relative_eq!(fit.center, 2.0, epsilon = 1e-6);
        assert_relative_eq!(fit.width, 6.0, epsilon = 1e-6);
        assert_relative_eq!(fit.offset, 0.1, epsilon = 1e-6);
        assert_relative_eq!(fit.fwhm(), 6.0 * 2.3548, epsilon = 1e-3);
    }

    #[test]
    fn bootstrap_covariance_consistency() {
        // Repeated noisy fits: the scatter of the fitted amplitude should
        // match the reported uncertainty.
        let mut amps = Vec::new();
        let mut errs = Vec::new();
        for seed in 0..60 {
            let series = noisy_sinusoid(0.5, 3.0, 0.2, 0.1, 0.05, 60, 100 + seed);
            let f = fit_sinusoid(&series, 3.0).unwrap();
            amps.push(f.amplitude);
            errs.push(f.amplitude_err);
        }
        let mean: f64 = amps.iter().sum::<f64>() / amps.len() as f64;
        let var: f64 =
            amps.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / (amps.len() - 1) as f64;
        let scatter = var.sqrt();
        let reported: f64 = errs.iter().sum::<f64>() / errs.len() as f64;
        assert!(
            (scatter / reported - 1.0).abs() < 0.5,
            "scatter {scatter} vs reported {reported}"
        );
    }

    #[test]
    fn underdetermined_rejected() {
        let series = WeightedSeries::unweighted(vec![0.0, 1.0, 2.0], vec![0.0, 1.0, 0.0]).unwrap();
        assert!(fit_sinusoid(&series, 2.0).is_err());
    }

    #[test]
    fn constant_data_degenerate() {
        let series = WeightedSeries::unweighted(
            (0..20).map(|i| i as f64).collect(),
            vec![1.0; 20],
        )
        .unwrap();
        // A flat line leaves amplitude/phase degenerate: either the solver
        // reports the singularity or the amplitude collapses to zero.
        match fit_sinusoid(&series, 5.0) {
            Err(_) => {}
            Ok(f) => {
                assert!(f.amplitude < 1e-6, "amplitude {}", f.amplitude);
                assert_relative_eq!(f.offset, 1.0, epsilon = 1e-6);
            }
        }
    }
}
