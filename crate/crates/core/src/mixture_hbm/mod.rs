//! Bernoulli mixtures and the hierarchical model built on them.

mod hbm;
mod mixture;

pub use hbm::{class_log_densities, fit_hbm, hbm_posterior, impute_all, HbmModel, HbmVariant};
pub use mixture::{
    fit_mixture, fit_mixture_from, free_parameters, mixture_impute, mixture_log_likelihood, random_init,
    responsibilities, select_k, BicRow, MixtureParams, Observations, DEFAULT_K_RANGE,
};
