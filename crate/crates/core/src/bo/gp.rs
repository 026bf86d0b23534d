//! Gaussian-process regression on the unit cube.
//!
//! Isotropic squared-exponential kernel over standardized targets. The
//! length scale is picked from a fixed grid by log marginal likelihood;
//! signal variance is 1 in standardized units and the noise variance is
//! fixed. Factorization failures are retried with jitter grown tenfold up
//! to a ceiling.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Length scales tried during fitting, in unit-cube coordinates.
pub const DEFAULT_LENGTH_SCALES: [f64; 6] = [0.05, 0.1, 0.2, 0.4, 0.8, 1.6];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GpConfig {
    pub length_scales: Vec<f64>,
    pub noise_variance: f64,
    pub max_jitter: f64,
}

impl Default for GpConfig {
    fn default() -> Self {
        Self {
            length_scales: DEFAULT_LENGTH_SCALES.to_vec(),
            noise_variance: 1e-6,
            max_jitter: 1e-2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GpModel {
    inputs: Vec<Vec<f64>>,
    targets: Vec<f64>,
    y_mean: f64,
    y_std: f64,
    length_scale: f64,
    signal_variance: f64,
    noise_variance: f64,
    /// Lower factor of `K + noise I`, row-major `n x n`.
    chol: Vec<f64>,
    /// `(K + noise I)^{-1} y_standardized`.
    weights: Vec<f64>,
    log_marginal_likelihood: f64,
}

pub fn sq_exp(a: &[f64], b: &[f64], length_scale: f64, signal_variance: f64) -> f64 {
    let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    signal_variance * (-d2 / (2.0 * length_scale * length_scale)).exp()
}

/// In-place Cholesky of a row-major symmetric matrix; `None` if not positive definite.
fn cholesky(mut a: Vec<f64>, n: usize) -> Option<Vec<f64>> {
    for j in 0..n {
        let mut diag = a[j * n + j];
        for k in 0..j {
            diag -= a[j * n + k] * a[j * n + k];
        }
        if !(diag > 0.0) || !diag.is_finite() {
            return None;
        }
        let ljj = diag.sqrt();
        a[j * n + j] = ljj;
        for i in j + 1..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= a[i * n + k] * a[j * n + k];
            }
            a[i * n + j] = s / ljj;
        }
        for k in j + 1..n {
            a[j * n + k] = 0.0;
        }
    }
    Some(a)
}

/// Solve `L z = b` for lower-triangular `L`.
fn forward_solve(l: &[f64], n: usize, b: &[f64]) -> Vec<f64> {
    let mut z = b.to_vec();
    for i in 0..n {
        let mut s = z[i];
        for k in 0..i {
            s -= l[i * n + k] * z[k];
        }
        z[i] = s / l[i * n + i];
    }
    z
}

/// Solve `L^T z = b`.
fn backward_solve(l: &[f64], n: usize, b: &[f64]) -> Vec<f64> {
    let mut z = b.to_vec();
    for i in (0..n).rev() {
        let mut s = z[i];
        for k in i + 1..n {
            s -= l[k * n + i] * z[k];
        }
        z[i] = s / l[i * n + i];
    }
    z
}

fn standardize(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 1.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let std = var.sqrt();
    (mean, if std > 1e-12 * mean.abs().max(1.0) { std } else { 1.0 })
}

impl GpModel {
    /// Model with no data: predicts the prior (mean 0, variance 1).
    pub fn empty() -> Self {
        Self {
            inputs: Vec::new(),
            targets: Vec::new(),
            y_mean: 0.0,
            y_std: 1.0,
            length_scale: DEFAULT_LENGTH_SCALES[2],
            signal_variance: 1.0,
            noise_variance: GpConfig::default().noise_variance,
            chol: Vec::new(),
            weights: Vec::new(),
            log_marginal_likelihood: 0.0,
        }
    }

    /// Fit on unit-cube `points`, choosing the length scale with the highest
    /// marginal likelihood (the first one wins on ties).
    pub fn fit(points: &[Vec<f64>], values: &[f64], config: &GpConfig) -> Result<Self> {
        if config.length_scales.is_empty() {
            return Err(Error::InvalidArgument("no length scales to choose from".into()));
        }
        let mut best: Option<GpModel> = None;
        let mut last_err = None;
        for &ls in &config.length_scales {
            match Self::fit_with_length_scale(points, values, ls, config) {
                Ok(m) => {
                    if best
                        .as_ref()
                        .is_none_or(|b| m.log_marginal_likelihood > b.log_marginal_likelihood)
                    {
                        best = Some(m);
                    }
                }
                Err(e) => last_err = Some(e),
            }
        }
        best.ok_or_else(|| last_err.expect("at least one length scale was tried"))
    }

    pub fn fit_with_length_scale(
        points: &[Vec<f64>],
        values: &[f64],
        length_scale: f64,
        config: &GpConfig,
    ) -> Result<Self> {
        if points.is_empty() || points.len() != values.len() {
            return Err(Error::InvalidArgument(format!(
                "need matching, non-empty points and values (got {} and {})",
                points.len(),
                values.len()
            )));
        }
        if !(length_scale > 0.0) {
            return Err(Error::InvalidArgument(format!("length scale must be positive, got {length_scale}")));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("targets must be finite".into()));
        }
        let n = points.len();
        let (y_mean, y_std) = standardize(values);
        let ys: Vec<f64> = values.iter().map(|v| (v - y_mean) / y_std).collect();
        let signal_variance = 1.0;

        let mut kernel = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let k = sq_exp(&points[i], &points[j], length_scale, signal_variance);
                kernel[i * n + j] = k;
                kernel[j * n + i] = k;
            }
        }

        let mut noise = config.noise_variance;
        let chol = loop {
            let mut a = kernel.clone();
            for i in 0..n {
                a[i * n + i] += noise;
            }
            if let Some(l) = cholesky(a, n) {
                break l;
            }
            if noise >= config.max_jitter {
                return Err(Error::Factorization { jitter: noise });
            }
            noise = if noise > 0.0 { noise * 10.0 } else { 1e-10 }.min(config.max_jitter);
        };

        let weights = backward_solve(&chol, n, &forward_solve(&chol, n, &ys));
        let data_fit: f64 = ys.iter().zip(&weights).map(|(y, w)| y * w).sum();
        let log_det: f64 = (0..n).map(|i| chol[i * n + i].ln()).sum();
        let lml = -0.5 * data_fit - log_det - 0.5 * n as f64 * (2.0 * std::f64::consts::PI).ln();

        Ok(Self {
            inputs: points.to_vec(),
            targets: values.to_vec(),
            y_mean,
            y_std,
            length_scale,
            signal_variance,
            noise_variance: noise,
            chol,
            weights,
            log_marginal_likelihood: lml,
        })
    }

    /// Posterior mean and variance at unit-cube point `x`, in raw target units.
    pub fn predict(&self, x: &[f64]) -> (f64, f64) {
        let n = self.inputs.len();
        if n == 0 {
            return (self.y_mean, self.signal_variance * self.y_std * self.y_std);
        }
        let k_star: Vec<f64> = self
            .inputs
            .iter()
            .map(|p| sq_exp(p, x, self.length_scale, self.signal_variance))
            .collect();
        let mean: f64 = k_star.iter().zip(&self.weights).map(|(k, w)| k * w).sum();
        let v = forward_solve(&self.chol, n, &k_star);
        // rounding can push the variance slightly negative near data
        let var = (self.signal_variance - v.iter().map(|t| t * t).sum::<f64>()).max(0.0);
        (
            mean * self.y_std + self.y_mean,
            var * self.y_std * self.y_std,
        )
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn inputs(&self) -> &[Vec<f64>] {
        &self.inputs
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn length_scale(&self) -> f64 {
        self.length_scale
    }

    pub fn signal_variance(&self) -> f64 {
        self.signal_variance
    }

    /// Noise actually added to the diagonal, including any jitter.
    pub fn noise_variance(&self) -> f64 {
        self.noise_variance
    }

    pub fn target_mean(&self) -> f64 {
        self.y_mean
    }

    pub fn target_std(&self) -> f64 {
        self.y_std
    }

    pub fn log_marginal_likelihood(&self) -> f64 {
        self.log_marginal_likelihood
    }

    /// Row-major lower Cholesky factor of `K + noise I`.
    pub fn cholesky_factor(&self) -> &[f64] {
        &self.chol
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_observation_interpolates() {
        let m = GpModel::fit(&[vec![0.3, 0.7]], &[4.2], &GpConfig::default()).unwrap();
        let (mean, _) = m.predict(&[0.3, 0.7]);
        assert!((mean - 4.2).abs() < 1e-6);
    }

    #[test]
    fn duplicate_inputs_with_conflicting_targets() {
        let pts = vec![vec![0.5], vec![0.5]];
        let m = GpModel::fit(&pts, &[1.0, 3.0], &GpConfig::default()).unwrap();
        let (mean, var) = m.predict(&[0.5]);
        assert!(mean > 1.0 && mean < 3.0, "{mean}");
        assert!(var >= 0.0);
    }

    #[test]
    fn jitter_escalates_instead_of_failing() {
        // zero noise makes exact duplicates singular
        let cfg = GpConfig {
            noise_variance: 0.0,
            ..GpConfig::default()
        };
        let pts = vec![vec![0.2], vec![0.2], vec![0.9]];
        let m = GpModel::fit_with_length_scale(&pts, &[1.0, 2.0, 0.0], 0.2, &cfg).unwrap();
        assert!(m.noise_variance() > 0.0);
        let (mean, _) = m.predict(&[0.2]);
        assert!(mean > 1.0 && mean < 2.0);

        let cfg = GpConfig {
            noise_variance: 0.0,
            max_jitter: 0.0,
            ..GpConfig::default()
        };
        let m = GpModel::fit_with_length_scale(&pts, &[1.0, 2.0, 0.0], 0.2, &cfg);
        assert!(matches!(m, Err(Error::Factorization { .. })));
    }

    #[test]
    fn empty_model_is_prior() {
        assert_eq!(GpModel::empty().predict(&[0.1]), (0.0, 1.0));
    }

    #[test]
    fn tiny_noise_interpolates() {
        let cfg = GpConfig {
            noise_variance: 1e-8,
            ..GpConfig::default()
        };
        let pts: Vec<Vec<f64>> = (0..6).map(|i| vec![i as f64 / 5.0]).collect();
        let ys: Vec<f64> = pts.iter().map(|p| (6.0 * p[0]).sin()).collect();
        let m = GpModel::fit(&pts, &ys, &cfg).unwrap();
        for (p, y) in pts.iter().zip(&ys) {
            assert!((m.predict(p).0 - y).abs() < 1e-6);
        }
    }

    #[test]
    fn factor_reconstructs_kernel() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let pts: Vec<Vec<f64>> = (0..20).map(|_| vec![rng.random(), rng.random()]).collect();
        let ys: Vec<f64> = (0..20).map(|_| rng.random()).collect();
        let m = GpModel::fit(&pts, &ys, &GpConfig::default()).unwrap();
        let n = pts.len();
        let l = m.cholesky_factor();
        for i in 0..n {
            for j in 0..n {
                let rec: f64 = (0..n).map(|k| l[i * n + k] * l[j * n + k]).sum();
                let mut k = sq_exp(&pts[i], &pts[j], m.length_scale(), m.signal_variance());
                if i == j {
                    k += m.noise_variance();
                }
                assert!((rec - k).abs() < 1e-8);
            }
        }
    }
}
