//! One-parameter bivariate copulas: Gaussian, Frank and Gumbel.
//!
//! Every evaluation clamps its arguments to `[ARG_EPS, 1 − ARG_EPS]` and
//! clips log-densities to `±LOG_PDF_CLIP`; both the Gaussian and the Gumbel
//! densities are unbounded at corners of the unit square.

mod dependence;
pub(crate) mod frank;
pub(crate) mod gaussian;
pub(crate) mod gumbel;
mod sample;

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

pub use dependence::inverse_tau;

/// Arguments are clamped into `[ARG_EPS, 1 − ARG_EPS]` before evaluation.
pub const ARG_EPS: f64 = 1e-12;
/// Log-densities are clipped to `[−LOG_PDF_CLIP, LOG_PDF_CLIP]`.
pub const LOG_PDF_CLIP: f64 = 700.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CopulaFamily {
    Gaussian,
    Frank,
    Gumbel,
}

impl CopulaFamily {
    pub const ALL: [CopulaFamily; 3] = [Self::Gaussian, Self::Frank, Self::Gumbel];

    pub fn name(self) -> &'static str {
        match self {
            Self::Gaussian => "gaussian",
            Self::Frank => "frank",
            Self::Gumbel => "gumbel",
        }
    }

    /// Whether `theta` is an admissible dependence parameter.
    pub fn admits(self, theta: f64) -> bool {
        match self {
            Self::Gaussian => theta > -1.0 && theta < 1.0,
            Self::Frank => theta.is_finite() && theta != 0.0,
            Self::Gumbel => theta.is_finite() && theta >= 1.0,
        }
    }

    /// Parameter used in the reference simulation design.
    pub fn study_theta(self) -> f64 {
        match self {
            Self::Gaussian => 0.3,
            Self::Frank | Self::Gumbel => 5.0,
        }
    }

    /// Stable small integer used when deriving seeds.
    pub fn code(self) -> u64 {
        match self {
            Self::Gaussian => 1,
            Self::Frank => 2,
            Self::Gumbel => 3,
        }
    }
}

impl fmt::Display for CopulaFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CopulaFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gaussian" | "normal" => Ok(Self::Gaussian),
            "frank" => Ok(Self::Frank),
            "gumbel" => Ok(Self::Gumbel),
            other => Err(Error::Domain(format!("unknown copula family '{other}'"))),
        }
    }
}

/// A point strictly inside the unit square.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitPair {
    u1: f64,
    u2: f64,
}

impl UnitPair {
    pub fn new(u1: f64, u2: f64) -> Result<Self> {
        let inside = |u: f64| u > 0.0 && u < 1.0;
        if inside(u1) && inside(u2) {
            Ok(Self { u1, u2 })
        } else {
            Err(Error::Domain(format!(
                "pair ({u1}, {u2}) is not inside the open unit square"
            )))
        }
    }

    #[inline]
    pub fn u1(&self) -> f64 {
        self.u1
    }

    #[inline]
    pub fn u2(&self) -> f64 {
        self.u2
    }

    #[inline]
    pub(crate) fn clamped(&self) -> (f64, f64) {
        (clamp_unit(self.u1), clamp_unit(self.u2))
    }
}

#[inline]
pub(crate) fn clamp_unit(u: f64) -> f64 {
    u.clamp(ARG_EPS, 1.0 - ARG_EPS)
}

#[inline]
pub(crate) fn clip_log(l: f64) -> f64 {
    if l.is_nan() {
        -LOG_PDF_CLIP
    } else {
        l.clamp(-LOG_PDF_CLIP, LOG_PDF_CLIP)
    }
}

/// Which argument of the copula a cross derivative is taken against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Margin {
    First,
    Second,
}

impl Margin {
    pub fn index(self) -> usize {
        match self {
            Margin::First => 0,
            Margin::Second => 1,
        }
    }
}

/// Log-density with its θ-derivatives and mixed θ/argument derivatives at
/// one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointDerivs {
    pub log_pdf: f64,
    pub score: f64,
    pub hess: f64,
    /// ∂²/∂θ∂u₁ and ∂²/∂θ∂u₂ of the log-density.
    pub cross: [f64; 2],
}

/// A copula family together with a validated dependence parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CopulaModel {
    family: CopulaFamily,
    theta: f64,
}

impl CopulaModel {
    pub fn new(family: CopulaFamily, theta: f64) -> Result<Self> {
        if family.admits(theta) {
            Ok(Self { family, theta })
        } else {
            let range = match family {
                CopulaFamily::Gaussian => "-1 < theta < 1",
                CopulaFamily::Frank => "theta finite and nonzero",
                CopulaFamily::Gumbel => "theta >= 1",
            };
            Err(Error::Domain(format!(
                "{family} copula requires {range}, got {theta}"
            )))
        }
    }

    pub fn family(&self) -> CopulaFamily {
        self.family
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// C(u₁, u₂; θ).
    pub fn cdf(&self, p: UnitPair) -> f64 {
        let (u, v) = p.clamped();
        let c = match self.family {
            CopulaFamily::Gaussian => gaussian::cdf(self.theta, u, v),
            CopulaFamily::Frank => frank::cdf(self.theta, u, v),
            CopulaFamily::Gumbel => gumbel::cdf(self.theta, u, v),
        };
        // Fréchet–Hoeffding bounds hold exactly; rounding can leave them by an ulp.
        c.clamp((u + v - 1.0).max(0.0), u.min(v))
    }

    /// C on the closed square. Edges take their limiting values
    /// C(u, 0) = C(0, v) = 0, C(u, 1) = u and C(1, v) = v exactly.
    pub fn cdf_closed(&self, u1: f64, u2: f64) -> Result<f64> {
        let closed = |u: f64| (0.0..=1.0).contains(&u);
        if !(closed(u1) && closed(u2)) {
            return Err(Error::Domain(format!(
                "pair ({u1}, {u2}) is outside the unit square"
            )));
        }
        Ok(if u1 == 0.0 || u2 == 0.0 {
            0.0
        } else if u2 == 1.0 {
            u1
        } else if u1 == 1.0 {
            u2
        } else {
            self.cdf(UnitPair { u1, u2 })
        })
    }

    pub fn log_pdf(&self, p: UnitPair) -> f64 {
        let (u, v) = p.clamped();
        self.log_pdf_unchecked(u, v)
    }

    /// Log-density at an already clamped point.
    #[inline]
    pub(crate) fn log_pdf_unchecked(&self, u: f64, v: f64) -> f64 {
        clip_log(match self.family {
            CopulaFamily::Gaussian => gaussian::log_pdf(self.theta, u, v),
            CopulaFamily::Frank => frank::log_pdf(self.theta, u, v),
            CopulaFamily::Gumbel => gumbel::log_pdf(self.theta, u, v),
        })
    }

    pub fn pdf(&self, p: UnitPair) -> f64 {
        self.log_pdf(p).exp()
    }

    /// All derivatives of the log-density at `p` in one pass.
    pub fn derivs(&self, p: UnitPair) -> PointDerivs {
        let (u, v) = p.clamped();
        self.derivs_unchecked(u, v)
    }

    #[inline]
    pub(crate) fn derivs_unchecked(&self, u: f64, v: f64) -> PointDerivs {
        let mut d = match self.family {
            CopulaFamily::Gaussian => gaussian::derivs(self.theta, u, v),
            CopulaFamily::Frank => frank::derivs(self.theta, u, v),
            CopulaFamily::Gumbel => gumbel::derivs(self.theta, u, v),
        };
        d.log_pdf = clip_log(d.log_pdf);
        d
    }

    /// ∂ log c / ∂θ.
    pub fn score_theta(&self, p: UnitPair) -> f64 {
        self.derivs(p).score
    }

    /// ∂² log c / ∂θ².
    pub fn hess_theta(&self, p: UnitPair) -> f64 {
        self.derivs(p).hess
    }

    /// ∂² log c / ∂θ ∂u_j.
    pub fn cross_score(&self, p: UnitPair, margin: Margin) -> f64 {
        self.derivs(p).cross[margin.index()]
    }
}
