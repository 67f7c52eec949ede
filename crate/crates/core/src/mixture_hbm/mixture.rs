//! Mixtures of multivariate Bernoullis fitted by EM.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::{Dataset, SoftMatrix, Ternary};
use crate::em::{EmConfig, EmTrace};
use crate::error::{check_dim, invalid, Error, Result};
use crate::math::{clamp_prob, ln_bernoulli, log_sum_exp, softmax};

/// Default grid for the number of components.
pub const DEFAULT_K_RANGE: std::ops::RangeInclusive<usize> = 2..=10;

/// Component weights `μ` and the K×D matrix of component parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureParams {
    mu: Vec<f64>,
    p: Vec<Vec<f64>>,
    feature_names: Vec<String>,
}

impl MixtureParams {
    pub fn new(mu: Vec<f64>, p: Vec<Vec<f64>>, feature_names: Vec<String>) -> Result<Self> {
        if mu.is_empty() {
            return Err(invalid("K", "a mixture needs at least one component"));
        }
        check_dim(mu.len(), p.len())?;
        let sum: f64 = mu.iter().sum();
        if mu.iter().any(|&m| !(0.0..=1.0).contains(&m)) || (sum - 1.0).abs() > 1e-9 {
            return Err(invalid("mu", "weights must lie on the probability simplex"));
        }
        for row in &p {
            check_dim(feature_names.len(), row.len())?;
            if let Some(bad) = row.iter().find(|&&v| !(v > 0.0 && v < 1.0)) {
                return Err(invalid("P", format!("{bad} is outside (0, 1)")));
            }
        }
        Ok(MixtureParams {
            mu,
            p,
            feature_names,
        })
    }

    /// Parameters with generated feature names `f1..fD`.
    pub fn unnamed(mu: Vec<f64>, p: Vec<Vec<f64>>) -> Result<Self> {
        let d = p.first().map_or(0, Vec::len);
        Self::new(mu, p, (1..=d).map(|i| format!("f{i}")).collect())
    }

    pub fn k(&self) -> usize {
        self.mu.len()
    }

    pub fn dim(&self) -> usize {
        self.feature_names.len()
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn components(&self) -> &[Vec<f64>] {
        &self.p
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    /// Reorders components: new component `j` is old component `order[j]`.
    pub fn permuted(&self, order: &[usize]) -> MixtureParams {
        MixtureParams {
            mu: order.iter().map(|&k| self.mu[k]).collect(),
            p: order.iter().map(|&k| self.p[k].clone()).collect(),
            feature_names: self.feature_names.clone(),
        }
    }

    /// `ln μ_k + ln Ber(x_o | p_k)` per component.
    pub(crate) fn component_scores(&self, cells: &[Option<f64>]) -> Vec<f64> {
        self.mu
            .iter()
            .zip(&self.p)
            .map(|(&mu, pk)| {
                mu.ln()
                    + cells
                        .iter()
                        .zip(pk)
                        .filter_map(|(x, &p)| x.map(|x| ln_bernoulli(x, p)))
                        .sum::<f64>()
            })
            .collect()
    }

    /// `ln Σ_k μ_k Ber(x_o | p_k)`.
    pub(crate) fn log_density(&self, cells: &[Option<f64>]) -> f64 {
        log_sum_exp(&self.component_scores(cells))
    }
}

/// Input cells for the mixture: ternary (Unknown marginalized) or soft.
#[derive(Debug, Clone, Copy)]
pub enum Observations<'a> {
    Ternary(&'a Dataset),
    Soft(&'a SoftMatrix),
}

impl<'a> From<&'a Dataset> for Observations<'a> {
    fn from(ds: &'a Dataset) -> Self {
        Observations::Ternary(ds)
    }
}

impl<'a> From<&'a SoftMatrix> for Observations<'a> {
    fn from(x: &'a SoftMatrix) -> Self {
        Observations::Soft(x)
    }
}

impl Observations<'_> {
    pub fn n_rows(&self) -> usize {
        match self {
            Observations::Ternary(ds) => ds.n_rows(),
            Observations::Soft(x) => x.n_rows(),
        }
    }

    pub fn n_features(&self) -> usize {
        match self {
            Observations::Ternary(ds) => ds.n_features(),
            Observations::Soft(x) => x.n_features(),
        }
    }

    fn feature_names(&self) -> Vec<String> {
        match self {
            Observations::Ternary(ds) => ds.feature_names(),
            Observations::Soft(x) => (1..=x.n_features()).map(|i| format!("f{i}")).collect(),
        }
    }

    fn rows(&self) -> Vec<Vec<Option<f64>>> {
        match self {
            Observations::Ternary(ds) => ds
                .rows()
                .map(|r| r.iter().map(|v| v.as_f64()).collect())
                .collect(),
            Observations::Soft(x) => (0..x.n_rows())
                .map(|t| x.row(t).iter().map(|&v| Some(v)).collect())
                .collect(),
        }
    }
}

pub(crate) fn ternary_cells(x: &[Ternary]) -> Vec<Option<f64>> {
    x.iter().map(|v| v.as_f64()).collect()
}

/// Posterior component probabilities for one input.
pub fn responsibilities(m: &MixtureParams, x: &[Ternary]) -> Result<Vec<f64>> {
    check_dim(m.dim(), x.len())?;
    Ok(softmax(&m.component_scores(&ternary_cells(x))))
}

/// Observed-data log-likelihood with Unknown coordinates marginalized.
pub fn mixture_log_likelihood<'a>(m: &MixtureParams, x: impl Into<Observations<'a>>) -> Result<f64> {
    let x = x.into();
    check_dim(m.dim(), x.n_features())?;
    Ok(x.rows().iter().map(|r| m.log_density(r)).sum())
}

/// Observed coordinates pass through; Unknown ones get `Σ_k r_k p_ku`.
pub fn mixture_impute(m: &MixtureParams, x: &[Ternary]) -> Result<Vec<f64>> {
    let r = responsibilities(m, x)?;
    Ok(x.iter()
        .enumerate()
        .map(|(u, v)| {
            v.as_f64()
                .unwrap_or_else(|| r.iter().zip(&m.p).map(|(rk, pk)| rk * pk[u]).sum())
        })
        .collect())
}

/// Runs EM from the given parameters until convergence.
pub fn fit_mixture_from<'a>(
    x: impl Into<Observations<'a>>,
    init: &MixtureParams,
    cfg: &EmConfig,
) -> Result<(MixtureParams, EmTrace)> {
    let x = x.into();
    cfg.validate()?;
    check_dim(init.dim(), x.n_features())?;
    if x.n_rows() == 0 {
        return Err(Error::Fit("cannot fit a mixture on an empty dataset".into()));
    }
    Ok(run_em(&x.rows(), init.clone(), cfg))
}

fn run_em(rows: &[Vec<Option<f64>>], init: MixtureParams, cfg: &EmConfig) -> (MixtureParams, EmTrace) {
    let objective = |m: &MixtureParams| rows.iter().map(|r| m.log_density(r)).sum::<f64>();
    let (k, d, n) = (init.k(), init.dim(), rows.len());
    let mut m = init;
    let mut trace = EmTrace::start(objective(&m));
    let mut previous = trace.initial_loglik;
    for _ in 0..cfg.max_iter {
        let mut weight = vec![0.0; k];
        let mut ones = vec![vec![0.0; d]; k];
        let mut known = vec![vec![0.0; d]; k];
        for row in rows {
            let r = softmax(&m.component_scores(row));
            for c in 0..k {
                weight[c] += r[c];
                for (i, x) in row.iter().enumerate() {
                    if let Some(x) = x {
                        ones[c][i] += r[c] * x;
                        known[c][i] += r[c];
                    }
                }
            }
        }
        for c in 0..k {
            m.mu[c] = weight[c] / n as f64;
            for i in 0..d {
                // no observed mass for this coordinate: leave it where it is
                if known[c][i] > 0.0 {
                    m.p[c][i] = clamp_prob(ones[c][i] / known[c][i]);
                }
            }
        }
        let current = objective(&m);
        trace.push(current);
        // with one component the E-step does not depend on the parameters
        if k == 1 || cfg.converged(previous, current) {
            trace.converged = true;
            break;
        }
        previous = current;
    }
    (m, trace)
}

/// Random initialization: uniform weights, parameters in `[0.25, 0.75)`.
pub fn random_init(k: usize, feature_names: Vec<String>, seed: u64) -> MixtureParams {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = feature_names.len();
    MixtureParams {
        mu: vec![1.0 / k as f64; k],
        p: (0..k)
            .map(|_| (0..d).map(|_| rng.gen_range(0.25..0.75)).collect())
            .collect(),
        feature_names,
    }
}

/// Fits a K-component mixture, keeping the best of `restarts` random
/// initializations (highest final log-likelihood, earliest on ties).
/// Restart `r` is seeded with `cfg.seed + r`.
pub fn fit_mixture<'a>(
    x: impl Into<Observations<'a>>,
    k: usize,
    restarts: usize,
    cfg: &EmConfig,
) -> Result<(MixtureParams, EmTrace)> {
    let x = x.into();
    cfg.validate()?;
    if k < 1 {
        return Err(invalid("K", "must be at least 1"));
    }
    if restarts < 1 {
        return Err(invalid("restarts", "must be at least 1"));
    }
    if x.n_rows() == 0 {
        return Err(Error::Fit("cannot fit a mixture on an empty dataset".into()));
    }
    let rows = x.rows();
    let names = x.feature_names();
    let mut best: Option<(MixtureParams, EmTrace)> = None;
    for r in 0..restarts {
        let init = random_init(k, names.clone(), cfg.seed.wrapping_add(r as u64));
        let (m, trace) = run_em(&rows, init, cfg);
        if best
            .as_ref()
            .is_none_or(|(_, b)| trace.final_loglik() > b.final_loglik())
        {
            best = Some((m, trace));
        }
    }
    Ok(best.expect("at least one restart"))
}

/// Number of free parameters of a K-component mixture over D features.
pub fn free_parameters(k: usize, d: usize) -> usize {
    (k - 1) + k * d
}

#[derive(Debug, Clone, PartialEq)]
pub struct BicRow {
    pub k: usize,
    pub loglik: f64,
    pub free_parameters: usize,
    pub bic: f64,
}

/// Chooses K maximizing `L - ½·(free parameters)·ln N`; ties go to the
/// smaller K.
pub fn select_k<'a>(
    x: impl Into<Observations<'a>>,
    k_range: &[usize],
    restarts: usize,
    cfg: &EmConfig,
) -> Result<(usize, Vec<BicRow>)> {
    let x = x.into();
    if k_range.is_empty() {
        return Err(invalid("k_range", "must not be empty"));
    }
    let n = x.n_rows() as f64;
    let mut table = Vec::with_capacity(k_range.len());
    for &k in k_range {
        let (_, trace) = fit_mixture(x, k, restarts, cfg)?;
        let loglik = trace.final_loglik();
        let free = free_parameters(k, x.n_features());
        table.push(BicRow {
            k,
            loglik,
            free_parameters: free,
            bic: loglik - 0.5 * free as f64 * n.ln(),
        });
    }
    let best = table
        .iter()
        .fold(None::<&BicRow>, |acc, row| match acc {
            Some(b) if row.bic < b.bic || (row.bic == b.bic && row.k >= b.k) => Some(b),
            _ => Some(row),
        })
        .expect("nonempty table");
    Ok((best.k, table))
}
