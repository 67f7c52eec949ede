//! EM fitting of the naive Bayes model from incomplete data.
//!
//! Phase 1 handles Unknown input cells of labeled rows; Phase 2 handles
//! Unknown labels over a completed (soft) input matrix. Both optimize the
//! observed-data log-likelihood plus the log-density of the symmetric Beta
//! prior implied by the pseudo-count `alpha` of the initial parameters, so
//! `alpha = 0` gives plain maximum likelihood and every trace is
//! nondecreasing.

use crate::dataset::{Dataset, SoftMatrix, Ternary};
use crate::error::{check_dim, invalid, Error, Result};
use crate::math::{ln_bernoulli, log_sum_exp, two_class_posterior};
use crate::mbnb::{self, fit_weighted, MbnbParams};

/// Stopping rule shared by every EM loop in the crate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmConfig {
    /// Relative change of the objective below which the loop stops.
    pub tol: f64,
    pub max_iter: usize,
    /// Seed for the procedures that need random initialization.
    pub seed: u64,
}

impl Default for EmConfig {
    fn default() -> Self {
        EmConfig {
            tol: 1e-6,
            max_iter: 200,
            seed: 42,
        }
    }
}

impl EmConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(invalid("tol", format!("{} must be > 0", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(invalid("max_iter", "must be at least 1"));
        }
        Ok(())
    }

    pub(crate) fn converged(&self, previous: f64, current: f64) -> bool {
        (current - previous).abs() / (previous.abs() + 1e-12) < self.tol
    }
}

/// Objective value after every iteration.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EmTrace {
    /// Objective at the initial parameters.
    pub initial_loglik: f64,
    pub loglik_per_iter: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl EmTrace {
    pub(crate) fn start(initial: f64) -> Self {
        EmTrace {
            initial_loglik: initial,
            ..Default::default()
        }
    }

    pub(crate) fn push(&mut self, value: f64) {
        self.loglik_per_iter.push(value);
        self.iterations += 1;
    }

    pub fn final_loglik(&self) -> f64 {
        self.loglik_per_iter
            .last()
            .copied()
            .unwrap_or(self.initial_loglik)
    }

    /// True when no step (including the first, from the initial value)
    /// decreases the objective by more than `slack`.
    pub fn is_nondecreasing(&self, slack: f64) -> bool {
        std::iter::once(&self.initial_loglik)
            .chain(&self.loglik_per_iter)
            .collect::<Vec<_>>()
            .windows(2)
            .all(|w| *w[1] >= *w[0] - slack)
    }

    /// `iteration,loglik` rows; iteration 0 is the initial value.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("iteration,loglik\n");
        out.push_str(&format!("0,{:?}\n", self.initial_loglik));
        for (l, v) in self.loglik_per_iter.iter().enumerate() {
            out.push_str(&format!("{},{:?}\n", l + 1, v));
        }
        out
    }
}

/// Log-density (up to a constant) of the Beta(alpha+1, alpha+1) priors on
/// every parameter.
fn log_prior(m: &MbnbParams) -> f64 {
    let alpha = m.alpha();
    if alpha == 0.0 {
        return 0.0;
    }
    let beta = |p: f64| alpha * (p.ln() + (1.0 - p).ln());
    beta(m.pi()) + m.p1().iter().chain(m.p0()).map(|&p| beta(p)).sum::<f64>()
}

fn label_weights(labels: &[Ternary]) -> Vec<f64> {
    labels
        .iter()
        .map(|y| y.as_f64().unwrap_or(f64::NAN))
        .collect()
}

/// Fills every Unknown cell of a labeled row with the class-conditional mean
/// `p_{y,u}`.
fn complete_labeled(ds: &Dataset, m: &MbnbParams) -> SoftMatrix {
    SoftMatrix::from_dataset_with(ds, |t, i| {
        let positive = ds.label(t) == Ternary::True;
        m.p(positive)[i]
    })
}

/// Phase 1: EM over Unknown input cells of fully labeled rows.
///
/// Known labels pin the class, so the E-step fills each Unknown cell with
/// its class-conditional mean; the M-step re-estimates from the completed
/// soft data.
pub fn em_phase1(
    ds: &Dataset,
    init: &MbnbParams,
    cfg: &EmConfig,
) -> Result<(MbnbParams, SoftMatrix, EmTrace)> {
    cfg.validate()?;
    check_dim(init.dim(), ds.n_features())?;
    let labels = ds
        .labels()
        .ok_or_else(|| Error::Fit("dataset has no label column".into()))?;
    if let Some(t) = labels.iter().position(|y| !y.is_known()) {
        return Err(Error::Fit(format!(
            "phase 1 needs known labels, row `{}` is unlabeled",
            ds.row_ids()[t]
        )));
    }
    let weights = label_weights(labels);
    let objective = |m: &MbnbParams| -> Result<f64> { Ok(mbnb::log_likelihood(m, ds)? + log_prior(m)) };
    let latent = ds.count_unknown_cells() > 0;

    let mut params = init.clone();
    let mut trace = EmTrace::start(objective(&params)?);
    let mut previous = trace.initial_loglik;
    for _ in 0..cfg.max_iter {
        let completed = complete_labeled(ds, &params);
        params = fit_weighted(&completed, &weights, init.alpha(), init.feature_names().to_vec())?;
        let current = objective(&params)?;
        trace.push(current);
        if !latent || cfg.converged(previous, current) {
            trace.converged = true;
            break;
        }
        previous = current;
    }
    let completed = complete_labeled(ds, &params);
    Ok((params, completed, trace))
}

/// Observed-data objective for Phase 2.
fn phase2_objective(m: &MbnbParams, x: &SoftMatrix, y: &[Ternary]) -> f64 {
    let mut total = 0.0;
    for (t, label) in y.iter().enumerate() {
        let (l1, l0) = m.log_joint_cells(x.row(t).iter().map(|&v| Some(v)));
        total += match label {
            Ternary::True => l1,
            Ternary::False => l0,
            Ternary::Unknown => log_sum_exp(&[l1, l0]),
        };
    }
    total + log_prior(m)
}

/// Phase 2: EM over Unknown labels with completed inputs.
///
/// Returns the parameters, `P(y=1 | x)` per row (the indicator for labeled
/// rows) and the trace.
pub fn em_phase2(
    x: &SoftMatrix,
    y: &[Ternary],
    init: &MbnbParams,
    cfg: &EmConfig,
) -> Result<(MbnbParams, Vec<f64>, EmTrace)> {
    cfg.validate()?;
    check_dim(x.n_rows(), y.len())?;
    check_dim(init.dim(), x.n_features())?;
    let latent = y.iter().any(|v| !v.is_known());
    let responsibilities = |m: &MbnbParams| -> Vec<f64> {
        y.iter()
            .enumerate()
            .map(|(t, label)| match label.as_f64() {
                Some(v) => v,
                None => {
                    let (l1, l0) = m.log_joint_cells(x.row(t).iter().map(|&v| Some(v)));
                    two_class_posterior(l1, l0)
                }
            })
            .collect()
    };

    let mut params = init.clone();
    let mut trace = EmTrace::start(phase2_objective(&params, x, y));
    let mut previous = trace.initial_loglik;
    for _ in 0..cfg.max_iter {
        let r = responsibilities(&params);
        params = fit_weighted(x, &r, init.alpha(), init.feature_names().to_vec())?;
        let current = phase2_objective(&params, x, y);
        trace.push(current);
        if !latent || cfg.converged(previous, current) {
            trace.converged = true;
            break;
        }
        previous = current;
    }
    let soft_labels = responsibilities(&params);
    Ok((params, soft_labels, trace))
}

/// Result of the two-phase fit.
#[derive(Debug, Clone)]
pub struct MbnbEmFit {
    pub params: MbnbParams,
    /// Completed inputs of every row, as fed to Phase 2.
    pub completed: SoftMatrix,
    pub soft_labels: Vec<f64>,
    pub phase1: EmTrace,
    pub phase2: EmTrace,
}

/// Fits the naive Bayes model on a dataset with Unknown inputs and labels.
///
/// Phase 1 runs on the labeled rows starting from [`mbnb::fit_mle`]; its
/// parameters complete the unlabeled rows by expected values, and Phase 2
/// then fits over every row.
pub fn fit_mbnb_em(ds: &Dataset, alpha: f64, cfg: &EmConfig) -> Result<MbnbEmFit> {
    let labels = ds
        .labels()
        .ok_or_else(|| Error::Fit("dataset has no label column".into()))?;
    let labeled: Vec<usize> = (0..ds.n_rows()).filter(|&t| labels[t].is_known()).collect();
    let train = ds.select_rows(&labeled);
    let init = mbnb::fit_mle(&train, alpha)?;
    let (p1, _, phase1) = em_phase1(&train, &init, cfg)?;

    let mut expected: Vec<Option<Vec<f64>>> = vec![None; ds.n_rows()];
    for (t, slot) in expected.iter_mut().enumerate() {
        if !labels[t].is_known() {
            *slot = Some(mbnb::complete_row(&p1, ds.row(t))?);
        }
    }
    let completed = SoftMatrix::from_dataset_with(ds, |t, i| match &expected[t] {
        Some(row) => row[i],
        None => p1.p(labels[t] == Ternary::True)[i],
    });
    let (params, soft_labels, phase2) = em_phase2(&completed, labels, &p1, cfg)?;
    Ok(MbnbEmFit {
        params,
        completed,
        soft_labels,
        phase1,
        phase2,
    })
}

/// Soft-data complete log-likelihood of labeled rows (Unknown labels
/// skipped), without the prior term.
pub fn soft_log_likelihood(m: &MbnbParams, x: &SoftMatrix, y: &[Ternary]) -> Result<f64> {
    check_dim(x.n_rows(), y.len())?;
    check_dim(m.dim(), x.n_features())?;
    let mut total = 0.0;
    for (t, label) in y.iter().enumerate() {
        let Some(b) = label.as_bool() else { continue };
        total += if b { m.pi().ln() } else { (1.0 - m.pi()).ln() };
        let p = m.p(b);
        total += x
            .row(t)
            .iter()
            .zip(p)
            .map(|(&v, &pi)| ln_bernoulli(v, pi))
            .sum::<f64>();
    }
    Ok(total)
}
