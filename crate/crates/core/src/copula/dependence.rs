//! Kendall's tau and Spearman's rho implied by a copula, and inversion of tau.

use std::f64::consts::{FRAC_2_PI, PI};

use super::{CopulaFamily, CopulaModel, UnitPair};
use crate::error::{Error, Result};
use crate::quadrature::composite_square;
use crate::special::debye;

// 400×400 composite Gauss–Legendre nodes for ∬C.
const RHO_PANELS: usize = 20;
const RHO_ORDER: usize = 20;

fn frank_tau(theta: f64) -> f64 {
    if theta.abs() < 1e-3 {
        // series: θ/9 − θ³/900
        return theta / 9.0 - theta.powi(3) / 900.0;
    }
    1.0 - 4.0 / theta * (1.0 - debye(1, theta))
}

impl CopulaModel {
    /// Population Kendall's tau.
    pub fn kendall_tau(&self) -> f64 {
        match self.family {
            CopulaFamily::Gaussian => FRAC_2_PI * self.theta.asin(),
            CopulaFamily::Frank => frank_tau(self.theta),
            CopulaFamily::Gumbel => 1.0 - 1.0 / self.theta,
        }
    }

    /// Population Spearman's rho, 12 ∬ C − 3.
    ///
    /// Closed form for the Gaussian family; tensor Gauss–Legendre quadrature
    /// of the CDF for the Archimedean families.
    pub fn spearman_rho(&self) -> f64 {
        match self.family {
            CopulaFamily::Gaussian => 6.0 / PI * (0.5 * self.theta).asin(),
            CopulaFamily::Frank | CopulaFamily::Gumbel => {
                let integral = composite_square(RHO_PANELS, RHO_ORDER, |u, v| {
                    self.cdf(UnitPair { u1: u, u2: v })
                });
                (12.0 * integral - 3.0).clamp(-1.0, 1.0)
            }
        }
    }
}

/// Parameter whose Kendall's tau equals `tau`.
///
/// Closed form for Gaussian and Gumbel, bisection for Frank.
pub fn inverse_tau(family: CopulaFamily, tau: f64) -> Result<f64> {
    let unattainable = || {
        Error::Range(format!(
            "Kendall's tau {tau} is not attainable by the {family} copula"
        ))
    };
    if !tau.is_finite() {
        return Err(unattainable());
    }
    match family {
        CopulaFamily::Gaussian => {
            if tau.abs() < 1.0 {
                Ok((0.5 * PI * tau).sin())
            } else {
                Err(unattainable())
            }
        }
        CopulaFamily::Gumbel => {
            if (0.0..1.0).contains(&tau) {
                Ok(1.0 / (1.0 - tau))
            } else {
                Err(unattainable())
            }
        }
        CopulaFamily::Frank => {
            if tau == 0.0 || tau.abs() >= 1.0 {
                return Err(unattainable());
            }
            let target = tau.abs();
            let mut lo = 0.0;
            let mut hi = 1.0;
            while frank_tau(hi) < target {
                lo = hi;
                hi *= 2.0;
                if hi > 1e9 {
                    return Err(unattainable());
                }
            }
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if frank_tau(mid) < target {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if hi - lo <= 1e-14 * hi.max(1.0) {
                    break;
                }
            }
            let theta = 0.5 * (lo + hi);
            Ok(if tau < 0.0 { -theta } else { theta })
        }
    }
}
