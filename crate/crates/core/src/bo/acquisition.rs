use std::f64::consts::{PI, SQRT_2};

use libm::erfc;

pub fn normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * PI).sqrt()
}

pub fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / SQRT_2)
}

/// Expected improvement over `best` for a maximization problem.
pub fn expected_improvement(mean: f64, variance: f64, best: f64) -> f64 {
    let improvement = mean - best;
    let sigma = variance.max(0.0).sqrt();
    if sigma == 0.0 {
        return improvement.max(0.0);
    }
    let z = improvement / sigma;
    if improvement > 0.0 {
        // a + sigma (phi(z) - z Phi(-z)) keeps the result >= a, so EI stays
        // monotone in sigma even once Phi(z) rounds to one
        let tail = (normal_pdf(z) - z * normal_cdf(-z)).max(0.0);
        improvement + sigma * tail
    } else {
        (improvement * normal_cdf(z) + sigma * normal_pdf(z)).max(0.0)
    }
}
