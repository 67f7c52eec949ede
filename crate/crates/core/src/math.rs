//! Log-domain helpers shared by the Bernoulli models.

/// Lower bound applied to every fitted probability.
pub const PROB_FLOOR: f64 = 1e-9;
/// Upper bound applied to every fitted probability.
pub const PROB_CEIL: f64 = 1.0 - 1e-9;

/// Clamps a probability into `[PROB_FLOOR, PROB_CEIL]`.
#[inline]
pub fn clamp_prob(p: f64) -> f64 {
    p.clamp(PROB_FLOOR, PROB_CEIL)
}

/// `ln(p^x (1-p)^(1-x))` for a possibly fractional `x` in `[0, 1]`.
///
/// Exact for 0/1 cells; for soft cells this is the log-linear interpolation
/// between the two Bernoulli outcomes.
#[inline]
pub fn ln_bernoulli(x: f64, p: f64) -> f64 {
    if x == 1.0 {
        p.ln()
    } else if x == 0.0 {
        (1.0 - p).ln()
    } else {
        x * p.ln() + (1.0 - x) * (1.0 - p).ln()
    }
}

/// `ln Σ exp(v)` computed with the max-shift trick.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    let sum: f64 = values.iter().map(|v| (v - max).exp()).sum();
    max + sum.ln()
}

/// Normalizes log weights into a probability vector.
pub fn softmax(log_weights: &[f64]) -> Vec<f64> {
    let z = log_sum_exp(log_weights);
    log_weights.iter().map(|v| (v - z).exp()).collect()
}

/// Logistic function, stable for large magnitudes of either sign.
#[inline]
pub fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// Posterior of the first of two classes from their log joint scores.
#[inline]
pub fn two_class_posterior(log_joint_1: f64, log_joint_0: f64) -> f64 {
    sigmoid(log_joint_1 - log_joint_0)
}
