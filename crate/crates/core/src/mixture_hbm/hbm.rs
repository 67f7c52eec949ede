//! Two-tier hierarchical Bernoulli model.

use crate::dataset::{Dataset, SoftMatrix, Ternary};
use crate::em::EmConfig;
use crate::error::{check_dim, Error, Result};
use crate::math::two_class_posterior;
use crate::mbnb::{self, MbnbParams};

use super::mixture::{fit_mixture, mixture_impute, ternary_cells, MixtureParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HbmVariant {
    /// Unsupervised mixture completes the inputs, a naive Bayes top tier
    /// classifies the completed vectors.
    #[default]
    Pipeline,
    /// One mixture per class; the class-conditional densities are mixtures.
    ClassConditional,
}

impl HbmVariant {
    pub fn as_str(self) -> &'static str {
        match self {
            HbmVariant::Pipeline => "pipeline",
            HbmVariant::ClassConditional => "class-conditional",
        }
    }
}

impl std::str::FromStr for HbmVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pipeline" => Ok(HbmVariant::Pipeline),
            "class-conditional" => Ok(HbmVariant::ClassConditional),
            other => Err(crate::error::invalid("variant", format!("unknown variant `{other}`"))),
        }
    }
}

/// A fitted hierarchical model.
///
/// For the class-conditional variant `mixture` is the pooled density
/// `π·M₁ + (1-π)·M₀` (positive components first) and `top` is the plain
/// naive Bayes fit, kept for its prior and for rule extraction.
#[derive(Debug, Clone, PartialEq)]
pub struct HbmModel {
    pub(crate) mixture: MixtureParams,
    pub(crate) top: MbnbParams,
    pub(crate) variant: HbmVariant,
    /// `[negative, positive]` class mixtures.
    pub(crate) class_mixtures: Option<[MixtureParams; 2]>,
}

impl HbmModel {
    pub fn new(
        mixture: MixtureParams,
        top: MbnbParams,
        variant: HbmVariant,
        class_mixtures: Option<[MixtureParams; 2]>,
    ) -> Result<Self> {
        check_dim(mixture.dim(), top.dim())?;
        match (variant, &class_mixtures) {
            (HbmVariant::Pipeline, None) => {}
            (HbmVariant::ClassConditional, Some([neg, pos])) => {
                check_dim(pos.dim(), top.dim())?;
                check_dim(neg.dim(), top.dim())?;
                check_dim(pos.k(), neg.k())?;
            }
            _ => {
                return Err(crate::error::invalid(
                    "class_mixtures",
                    "required by the class-conditional variant only",
                ))
            }
        }
        Ok(HbmModel {
            mixture,
            top,
            variant,
            class_mixtures,
        })
    }

    pub fn mixture(&self) -> &MixtureParams {
        &self.mixture
    }

    pub fn top(&self) -> &MbnbParams {
        &self.top
    }

    pub fn variant(&self) -> HbmVariant {
        self.variant
    }

    /// `[negative, positive]` class mixtures of the class-conditional variant.
    pub fn class_mixtures(&self) -> Option<&[MixtureParams; 2]> {
        self.class_mixtures.as_ref()
    }

    pub fn dim(&self) -> usize {
        self.top.dim()
    }
}

/// Fits either variant on a labeled dataset. Unlabeled rows feed only the
/// unsupervised mixture of the pipeline variant.
pub fn fit_hbm(
    ds: &Dataset,
    k: usize,
    restarts: usize,
    alpha: f64,
    cfg: &EmConfig,
    variant: HbmVariant,
) -> Result<HbmModel> {
    let labels = ds
        .labels()
        .ok_or_else(|| Error::Fit("dataset has no label column".into()))?;
    match variant {
        HbmVariant::Pipeline => {
            let (mixture, _) = fit_mixture(ds, k, restarts, cfg)?;
            let completed = impute_all(&mixture, ds)?;
            let top = mbnb::fit_soft(&completed, labels, alpha, ds.feature_names())?;
            HbmModel::new(mixture, top, variant, None)
        }
        HbmVariant::ClassConditional => {
            let top = mbnb::fit_mle(ds, alpha)?;
            let mut fitted = Vec::with_capacity(2);
            for (class, name) in [(Ternary::False, "negative"), (Ternary::True, "positive")] {
                let rows: Vec<usize> = (0..ds.n_rows()).filter(|&t| labels[t] == class).collect();
                if rows.len() < k {
                    return Err(Error::Fit(format!(
                        "the {name} class has {} rows, fewer than K = {k}",
                        rows.len()
                    )));
                }
                let (m, _) = fit_mixture(&ds.select_rows(&rows), k, restarts, cfg)?;
                fitted.push(m);
            }
            let pos = fitted.pop().expect("two mixtures");
            let neg = fitted.pop().expect("two mixtures");
            let pi = top.pi();
            let mu = pos
                .mu()
                .iter()
                .map(|m| pi * m)
                .chain(neg.mu().iter().map(|m| (1.0 - pi) * m))
                .collect();
            let p = pos
                .components()
                .iter()
                .chain(neg.components())
                .cloned()
                .collect();
            let pooled = MixtureParams::new(mu, p, ds.feature_names())?;
            HbmModel::new(pooled, top, variant, Some([neg, pos]))
        }
    }
}

/// Completes every row of the dataset with the mixture.
pub fn impute_all(mixture: &MixtureParams, ds: &Dataset) -> Result<SoftMatrix> {
    let mut completed = Vec::with_capacity(ds.n_rows());
    for row in ds.rows() {
        completed.push(if row.iter().all(|v| v.is_known()) {
            None
        } else {
            Some(mixture_impute(mixture, row)?)
        });
    }
    Ok(SoftMatrix::from_dataset_with(ds, |t, i| {
        completed[t].as_ref().expect("row has unknown cells")[i]
    }))
}

/// `P(y=1 | x)` under the hierarchical model.
pub fn hbm_posterior(h: &HbmModel, x: &[Ternary]) -> Result<f64> {
    check_dim(h.dim(), x.len())?;
    match (&h.variant, &h.class_mixtures) {
        (HbmVariant::ClassConditional, Some([neg, pos])) => {
            let cells = ternary_cells(x);
            let pi = h.top.pi();
            let l1 = pi.ln() + pos.log_density(&cells);
            let l0 = (1.0 - pi).ln() + neg.log_density(&cells);
            Ok(two_class_posterior(l1, l0))
        }
        _ => {
            let completed = mixture_impute(&h.mixture, x)?;
            mbnb::posterior_soft(&h.top, &completed)
        }
    }
}

/// Log class-conditional densities `ln M_b(x_o)` of the class-conditional
/// variant, `[negative, positive]`.
pub fn class_log_densities(h: &HbmModel, x: &[Ternary]) -> Option<[f64; 2]> {
    let [neg, pos] = h.class_mixtures.as_ref()?;
    let cells = ternary_cells(x);
    Some([neg.log_density(&cells), pos.log_density(&cells)])
}
