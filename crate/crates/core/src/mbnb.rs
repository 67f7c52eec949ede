//! Multivariate Bernoulli naive Bayes.
//!
//! `P(x | y=b) = Π_i p_bi^x_i (1 - p_bi)^(1 - x_i)` with prior `π = P(y=1)`.
//! Unknown inputs are marginalized by dropping their factors, which is exact
//! under the conditional independence assumption. Soft inputs in `[0, 1]`
//! enter as fractional exponents.

use crate::dataset::{Dataset, SoftMatrix, Ternary};
use crate::error::{check_dim, invalid, Error, Result};
use crate::math::{clamp_prob, ln_bernoulli, two_class_posterior};

/// Default symmetric pseudo-count.
pub const DEFAULT_ALPHA: f64 = 1.0;

/// Fitted parameters `{π, p₁, p₀}`.
#[derive(Debug, Clone, PartialEq)]
pub struct MbnbParams {
    pi: f64,
    p1: Vec<f64>,
    p0: Vec<f64>,
    feature_names: Vec<String>,
    alpha: f64,
}

fn open_unit(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(invalid(name, format!("{v} is outside (0, 1)")))
    }
}

impl MbnbParams {
    pub fn new(
        pi: f64,
        p1: Vec<f64>,
        p0: Vec<f64>,
        feature_names: Vec<String>,
        alpha: f64,
    ) -> Result<Self> {
        open_unit("pi", pi)?;
        check_dim(p1.len(), p0.len())?;
        check_dim(p1.len(), feature_names.len())?;
        for &p in p1.iter().chain(&p0) {
            open_unit("p", p)?;
        }
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(invalid("alpha", format!("{alpha} must be a finite value >= 0")));
        }
        Ok(MbnbParams {
            pi,
            p1,
            p0,
            feature_names,
            alpha,
        })
    }

    /// Parameters with generated feature names `f1..fD` and `alpha = 0`.
    pub fn unnamed(pi: f64, p1: Vec<f64>, p0: Vec<f64>) -> Result<Self> {
        let names = (1..=p1.len()).map(|i| format!("f{i}")).collect();
        Self::new(pi, p1, p0, names, 0.0)
    }

    pub fn pi(&self) -> f64 {
        self.pi
    }

    pub fn p1(&self) -> &[f64] {
        &self.p1
    }

    pub fn p0(&self) -> &[f64] {
        &self.p0
    }

    /// `p_b` for `b ∈ {0, 1}`.
    pub fn p(&self, positive: bool) -> &[f64] {
        if positive {
            &self.p1
        } else {
            &self.p0
        }
    }

    pub fn prior(&self, positive: bool) -> f64 {
        if positive {
            self.pi
        } else {
            1.0 - self.pi
        }
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn dim(&self) -> usize {
        self.p1.len()
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    /// The model of the complement class: `(1-π, p₀, p₁)`.
    pub fn complement(&self) -> MbnbParams {
        MbnbParams {
            pi: 1.0 - self.pi,
            p1: self.p0.clone(),
            p0: self.p1.clone(),
            feature_names: self.feature_names.clone(),
            alpha: self.alpha,
        }
    }

    /// `(ln π + ln Ber(x_o|p₁), ln(1-π) + ln Ber(x_o|p₀))` over the known cells.
    pub(crate) fn log_joint_cells(&self, cells: impl Iterator<Item = Option<f64>>) -> (f64, f64) {
        let mut l1 = self.pi.ln();
        let mut l0 = (1.0 - self.pi).ln();
        for (i, x) in cells.enumerate() {
            if let Some(x) = x {
                l1 += ln_bernoulli(x, self.p1[i]);
                l0 += ln_bernoulli(x, self.p0[i]);
            }
        }
        (l1, l0)
    }

    /// Log joint scores of both classes for a ternary input.
    pub fn log_joint(&self, x: &[Ternary]) -> Result<(f64, f64)> {
        check_dim(self.dim(), x.len())?;
        Ok(self.log_joint_cells(x.iter().map(|v| v.as_f64())))
    }

    /// Log joint scores of both classes for a soft input.
    pub fn log_joint_soft(&self, x: &[f64]) -> Result<(f64, f64)> {
        check_dim(self.dim(), x.len())?;
        Ok(self.log_joint_cells(x.iter().map(|&v| Some(v))))
    }
}

/// Maximum a posteriori fit with symmetric pseudo-count `alpha`
/// (`alpha = 0` is the plain MLE).
///
/// Rows with an Unknown label are ignored. Unknown input cells are left out
/// of the counts of their column, so each column has its own denominator.
pub fn fit_mle(ds: &Dataset, alpha: f64) -> Result<MbnbParams> {
    let labels = ds
        .labels()
        .ok_or_else(|| Error::Fit("dataset has no label column".into()))?;
    let d = ds.n_features();
    let mut ones = [vec![0.0; d], vec![0.0; d]];
    let mut known = [vec![0.0; d], vec![0.0; d]];
    let mut class_n = [0.0f64; 2];
    for (t, y) in labels.iter().enumerate() {
        let Some(b) = y.as_bool() else { continue };
        let b = usize::from(b);
        class_n[b] += 1.0;
        for (i, v) in ds.row(t).iter().enumerate() {
            if let Some(x) = v.as_f64() {
                ones[b][i] += x;
                known[b][i] += 1.0;
            }
        }
    }
    estimate(class_n, &ones, &known, alpha, ds.feature_names())
}

/// Fit on soft inputs: every cell counts, imputed cells fractionally.
pub fn fit_soft(x: &SoftMatrix, labels: &[Ternary], alpha: f64, feature_names: Vec<String>) -> Result<MbnbParams> {
    check_dim(x.n_rows(), labels.len())?;
    check_dim(x.n_features(), feature_names.len())?;
    let weights: Vec<f64> = labels
        .iter()
        .map(|y| match y {
            Ternary::True => 1.0,
            Ternary::False => 0.0,
            Ternary::Unknown => f64::NAN,
        })
        .collect();
    fit_weighted(x, &weights, alpha, feature_names)
}

/// M-step shared by the soft and EM fits: `weights[t]` is the probability
/// that row `t` is positive, NaN to skip the row.
pub(crate) fn fit_weighted(
    x: &SoftMatrix,
    weights: &[f64],
    alpha: f64,
    feature_names: Vec<String>,
) -> Result<MbnbParams> {
    let d = x.n_features();
    let mut ones = [vec![0.0; d], vec![0.0; d]];
    let mut known = [vec![0.0; d], vec![0.0; d]];
    let mut class_n = [0.0f64; 2];
    for (t, &w1) in weights.iter().enumerate() {
        if w1.is_nan() {
            continue;
        }
        let w = [1.0 - w1, w1];
        for b in 0..2 {
            if w[b] == 0.0 {
                continue;
            }
            class_n[b] += w[b];
            for (i, &v) in x.row(t).iter().enumerate() {
                ones[b][i] += w[b] * v;
                known[b][i] += w[b];
            }
        }
    }
    estimate(class_n, &ones, &known, alpha, feature_names)
}

fn estimate(
    class_n: [f64; 2],
    ones: &[Vec<f64>; 2],
    known: &[Vec<f64>; 2],
    alpha: f64,
    feature_names: Vec<String>,
) -> Result<MbnbParams> {
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(invalid("alpha", format!("{alpha} must be a finite value >= 0")));
    }
    if class_n[1] <= 0.0 {
        return Err(Error::Fit("no training rows of the positive class (y=1)".into()));
    }
    if class_n[0] <= 0.0 {
        return Err(Error::Fit("no training rows of the negative class (y=0)".into()));
    }
    let total = class_n[0] + class_n[1];
    let pi = clamp_prob((class_n[1] + alpha) / (total + 2.0 * alpha));
    let p = |b: usize| -> Vec<f64> {
        ones[b]
            .iter()
            .zip(&known[b])
            .map(|(&s, &n)| {
                let denom = n + 2.0 * alpha;
                // a column with no known cells and no pseudo-counts carries no information
                if denom > 0.0 {
                    clamp_prob((s + alpha) / denom)
                } else {
                    0.5
                }
            })
            .collect()
    };
    Ok(MbnbParams {
        pi,
        p1: p(1),
        p0: p(0),
        feature_names,
        alpha,
    })
}

/// `P(y=1 | x_o)`, marginalizing Unknown coordinates.
pub fn posterior(m: &MbnbParams, x: &[Ternary]) -> Result<f64> {
    let (l1, l0) = m.log_joint(x)?;
    Ok(two_class_posterior(l1, l0))
}

/// `P(y=1 | x)` for a soft input.
pub fn posterior_soft(m: &MbnbParams, x: &[f64]) -> Result<f64> {
    let (l1, l0) = m.log_joint_soft(x)?;
    Ok(two_class_posterior(l1, l0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Positive,
    Negative,
    Rejected,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decision {
    pub verdict: Verdict,
    pub posterior: f64,
}

/// Decision rule with a rejection band: rejected when neither class reaches
/// `theta`, otherwise positive iff the posterior is strictly above 0.5.
pub fn decide(posterior: f64, theta: f64) -> Result<Decision> {
    if !(0.5..=1.0).contains(&theta) {
        return Err(invalid("theta", format!("{theta} is outside [0.5, 1]")));
    }
    let verdict = if posterior.max(1.0 - posterior) < theta {
        Verdict::Rejected
    } else if posterior > 0.5 {
        Verdict::Positive
    } else {
        Verdict::Negative
    };
    Ok(Decision { verdict, posterior })
}

pub fn classify(m: &MbnbParams, x: &[Ternary], theta: f64) -> Result<Decision> {
    decide(posterior(m, x)?, theta)
}

/// `E[x_u | x_o]` for every Unknown coordinate `u`, in coordinate order.
pub fn expected_missing(m: &MbnbParams, x: &[Ternary]) -> Result<Vec<f64>> {
    let q = posterior(m, x)?;
    Ok(x.iter()
        .enumerate()
        .filter(|(_, v)| !v.is_known())
        .map(|(u, _)| q * m.p1[u] + (1.0 - q) * m.p0[u])
        .collect())
}

/// The input with Unknown coordinates replaced by their expected values.
pub fn complete_row(m: &MbnbParams, x: &[Ternary]) -> Result<Vec<f64>> {
    let q = posterior(m, x)?;
    Ok(x.iter()
        .enumerate()
        .map(|(i, v)| v.as_f64().unwrap_or(q * m.p1[i] + (1.0 - q) * m.p0[i]))
        .collect())
}

/// Complete-data log-likelihood `Σ_t [ln π_y + Σ_{i known} ln Ber(x_i | p_{y,i})]`.
/// Rows with an Unknown label are skipped.
pub fn log_likelihood(m: &MbnbParams, ds: &Dataset) -> Result<f64> {
    check_dim(m.dim(), ds.n_features())?;
    let mut total = 0.0;
    for t in 0..ds.n_rows() {
        let Some(b) = ds.label(t).as_bool() else { continue };
        let (l1, l0) = m.log_joint_cells(ds.row(t).iter().map(|v| v.as_f64()));
        total += if b { l1 } else { l0 };
    }
    Ok(total)
}
