//! Bivariate Frank copula, θ ∈ ℝ \ {0}.
//!
//! For θ > 0 write eᵤ = e^{−θu}, bᵤ = 1 − eᵤ, cᵤ = 1 − e^{−θ(1−u)},
//! a = 1 − e^{−θ}. The CDF
//!
//! ```text
//! C(u, v) = −(1/θ) log(1 − bᵤbᵥ/a) = −(1/θ) log(g/a)
//! g       = a − bᵤbᵥ = eᵤbᵥ + eᵥcᵥ = eᵤ + eᵥ − eᵤeᵥ − e^{−θ}
//! ```
//!
//! has mixed partial c = θ a e^{−θ(u+v)} / g², so
//!
//! ```text
//! log c    = log θ + log a − θ(u + v) − 2 log g
//! ∂/∂θ     = 1/θ + q − (u + v) − 2 g'/g,          q = 1/(e^θ − 1)
//! ∂²/∂θ²   = −1/θ² − q − q² − 2 (g''/g − (g'/g)²)
//! ∂²/∂θ∂u  = −1 − 2 (∂ᵤg' · g − g' · ∂ᵤg) / g²
//! g'       = −u eᵤ − v eᵥ + (u + v) eᵤeᵥ + e^{−θ}
//! g''      = u² eᵤ + v² eᵥ − (u + v)² eᵤeᵥ − e^{−θ}
//! ∂ᵤg      = −θ eᵤ bᵥ
//! ∂ᵤg'     = eᵤ (θu − 1) + eᵤeᵥ (1 − θ(u + v))
//! ```
//!
//! `g` and its θ-derivatives are all carried scaled by e^{θ min(u,v)} so that
//! nothing underflows for large θ; the ratios are scale-free. Negative θ
//! reduces to positive θ through c_θ(u, v) = c_{−θ}(u, 1 − v) and
//! C_θ(u, v) = u − C_{−θ}(u, 1 − v).

use super::PointDerivs;

struct Scaled {
    /// e^{−θ(u−m)}, e^{−θ(v−m)} with m = min(u, v).
    eu: f64,
    ev: f64,
    /// e^{−θm}
    em: f64,
    /// e^{−θ(1−m)}
    etail: f64,
    bu: f64,
    bv: f64,
    m: f64,
    /// g / e^{−θm}
    g: f64,
}

fn scaled(theta: f64, u: f64, v: f64) -> Scaled {
    let m = u.min(v);
    let eu = (-theta * (u - m)).exp();
    let ev = (-theta * (v - m)).exp();
    let bu = -(-theta * u).exp_m1();
    let bv = -(-theta * v).exp_m1();
    let cv = -(-theta * (1.0 - v)).exp_m1();
    let cu = -(-theta * (1.0 - u)).exp_m1();
    // eᵤbᵥ + eᵥcᵥ, written symmetrically around whichever coordinate is smaller
    let g = if u <= v { eu * bv + ev * cv } else { ev * bu + eu * cu };
    Scaled {
        eu,
        ev,
        em: (-theta * m).exp(),
        etail: (-theta * (1.0 - m)).exp(),
        bu,
        bv,
        m,
        g,
    }
}

fn cdf_pos(theta: f64, u: f64, v: f64) -> f64 {
    let s = scaled(theta, u, v);
    let a = -(-theta).exp_m1();
    s.m - (s.g.ln() - a.ln()) / theta
}

fn log_pdf_pos(theta: f64, u: f64, v: f64) -> f64 {
    let s = scaled(theta, u, v);
    let a = -(-theta).exp_m1();
    theta.ln() + a.ln() - theta * (u + v) + 2.0 * theta * s.m - 2.0 * s.g.ln()
}

fn derivs_pos(theta: f64, u: f64, v: f64) -> PointDerivs {
    let s = scaled(theta, u, v);
    let a = -(-theta).exp_m1();
    let q = 1.0 / theta.exp_m1();
    let euv = s.em * s.eu * s.ev;
    let g1 = -u * s.eu - v * s.ev + (u + v) * euv + s.etail;
    let g2 = u * u * s.eu + v * v * s.ev - (u + v) * (u + v) * euv - s.etail;
    let r1 = g1 / s.g;
    let log_pdf = theta.ln() + a.ln() - theta * (u + v) + 2.0 * theta * s.m - 2.0 * s.g.ln();
    let score = 1.0 / theta + q - (u + v) - 2.0 * r1;
    let hess = -1.0 / (theta * theta) - q - q * q - 2.0 * (g2 / s.g - r1 * r1);

    let du_g = -theta * s.eu * s.bv;
    let dv_g = -theta * s.ev * s.bu;
    let du_g1 = s.eu * (theta * u - 1.0) + euv * (1.0 - theta * (u + v));
    let dv_g1 = s.ev * (theta * v - 1.0) + euv * (1.0 - theta * (u + v));
    let g_sq = s.g * s.g;
    let cross_u = -1.0 - 2.0 * (du_g1 * s.g - g1 * du_g) / g_sq;
    let cross_v = -1.0 - 2.0 * (dv_g1 * s.g - g1 * dv_g) / g_sq;
    PointDerivs {
        log_pdf,
        score,
        hess,
        cross: [cross_u, cross_v],
    }
}

pub(crate) fn cdf(theta: f64, u: f64, v: f64) -> f64 {
    if theta > 0.0 {
        cdf_pos(theta, u, v)
    } else {
        u - cdf_pos(-theta, u, 1.0 - v)
    }
}

pub(crate) fn log_pdf(theta: f64, u: f64, v: f64) -> f64 {
    if theta > 0.0 {
        log_pdf_pos(theta, u, v)
    } else {
        log_pdf_pos(-theta, u, 1.0 - v)
    }
}

pub(crate) fn derivs(theta: f64, u: f64, v: f64) -> PointDerivs {
    if theta > 0.0 {
        derivs_pos(theta, u, v)
    } else {
        let d = derivs_pos(-theta, u, 1.0 - v);
        PointDerivs {
            log_pdf: d.log_pdf,
            score: -d.score,
            hess: d.hess,
            cross: [-d.cross[0], d.cross[1]],
        }
    }
}

/// Inverse of the conditional distribution v ↦ ∂C/∂u at probability p.
pub(crate) fn conditional_inverse(theta: f64, u: f64, p: f64) -> f64 {
    if theta < 0.0 {
        return 1.0 - conditional_inverse(-theta, u, p);
    }
    let eu = (-theta * u).exp();
    let a = -(-theta).exp_m1();
    let z = -p * a / (p + (1.0 - p) * eu);
    -z.ln_1p() / theta
}
