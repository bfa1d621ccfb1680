//! Copula dependence estimation by maximum pseudo-likelihood, with a
//! communication-free split/fit/combine pipeline for large samples.
//!
//! * [`copula`]: Gaussian, Frank and Gumbel copulas: CDF, density,
//!   θ-derivatives, sampling, Kendall's tau and Spearman's rho.
//! * [`pseudo_obs`]: data matrices and normalized ranks.
//! * [`mpl`]: pseudo-likelihood maximization and the rank-corrected
//!   asymptotic variance.
//! * [`parallel`]: row partitions, block fits on a worker pool and
//!   inverse-variance combination.
//! * [`sim`]: the simulation study harness.

pub mod copula;
pub mod error;
pub mod mpl;
pub mod optimize;
pub mod parallel;
pub mod pseudo_obs;
pub mod quadrature;
pub mod rng;
pub mod sim;
pub mod special;

pub use copula::{inverse_tau, CopulaFamily, CopulaModel, Margin, PointDerivs, UnitPair};
pub use error::{Error, Result};
pub use mpl::{asymptotic_variance, fit, fit_with, pseudo_loglik, FitOptions, FitResult};
pub use parallel::{combine, fit_parallel, partition, CombinedResult, ParallelOptions, Partition, Scheme};
pub use pseudo_obs::{normalized_ranks, DataMatrix, PseudoSample};
pub use rng::RngStream;
pub use sim::{run_study, SimConfig, SimReport};
