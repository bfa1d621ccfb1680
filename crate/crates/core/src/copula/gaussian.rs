//! Bivariate Gaussian copula with correlation ρ ∈ (−1, 1).
//!
//! With normal scores x = Φ⁻¹(u), y = Φ⁻¹(v), D = 1 − ρ², S = x² + y²,
//! P = xy:
//!
//! ```text
//! C(u, v)  = Φ₂(x, y; ρ)
//! log c    = −½ log D − (ρ²S − 2ρP) / (2D)
//! ∂/∂ρ     = ρ/D + N/D²,            N = P(1 + ρ²) − ρS
//! ∂²/∂ρ²   = (1 + ρ²)/D² + ((2ρP − S)D + 4ρN)/D³
//! ∂²/∂ρ∂u  = (y(1 + ρ²) − 2ρx) / (D² φ(x))
//! ```
//!
//! The density is the mixed partial of the CDF; the log-likelihood of a
//! sample depends on the data only through ΣS and ΣP.

use super::PointDerivs;
use crate::special::{bivariate_normal_cdf, normal_pdf, normal_quantile};

pub(crate) fn cdf(rho: f64, u: f64, v: f64) -> f64 {
    bivariate_normal_cdf(normal_quantile(u), normal_quantile(v), rho)
}

#[inline]
pub(crate) fn log_pdf_scores(rho: f64, x: f64, y: f64) -> f64 {
    let d = (1.0 - rho) * (1.0 + rho);
    -0.5 * d.ln() - (rho * rho * (x * x + y * y) - 2.0 * rho * x * y) / (2.0 * d)
}

/// Log-likelihood from the sufficient statistics ΣS = Σ(x² + y²), ΣP = Σxy.
#[inline]
pub(crate) fn loglik_from_sums(rho: f64, n: f64, sum_s: f64, sum_p: f64) -> f64 {
    let d = (1.0 - rho) * (1.0 + rho);
    -0.5 * n * d.ln() - (rho * rho * sum_s - 2.0 * rho * sum_p) / (2.0 * d)
}

pub(crate) fn log_pdf(rho: f64, u: f64, v: f64) -> f64 {
    log_pdf_scores(rho, normal_quantile(u), normal_quantile(v))
}

pub(crate) fn derivs_scores(rho: f64, x: f64, y: f64) -> PointDerivs {
    let d = (1.0 - rho) * (1.0 + rho);
    let d2 = d * d;
    let s = x * x + y * y;
    let p = x * y;
    let r2 = rho * rho;
    let num = p * (1.0 + r2) - rho * s;
    PointDerivs {
        log_pdf: log_pdf_scores(rho, x, y),
        score: rho / d + num / d2,
        hess: (1.0 + r2) / d2 + ((2.0 * rho * p - s) * d + 4.0 * rho * num) / (d2 * d),
        cross: [
            (y * (1.0 + r2) - 2.0 * rho * x) / (d2 * normal_pdf(x)),
            (x * (1.0 + r2) - 2.0 * rho * y) / (d2 * normal_pdf(y)),
        ],
    }
}

pub(crate) fn derivs(rho: f64, u: f64, v: f64) -> PointDerivs {
    derivs_scores(rho, normal_quantile(u), normal_quantile(v))
}
