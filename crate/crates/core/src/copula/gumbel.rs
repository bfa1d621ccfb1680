//! Bivariate Gumbel (Gumbel–Hougaard) copula, θ ≥ 1.
//!
//! With x = −log u, y = −log v, A = x^θ + y^θ, w = A^{1/θ}, L = log w:
//!
//! ```text
//! C(u, v) = exp(−w)
//! log c   = −w + x + y + (θ − 1)(log x + log y) + (1 − 2θ)L + log(w + θ − 1)
//! ```
//!
//! θ-derivatives go through L. With Q = A'/A (the x^θ-weighted mean of
//! log x, log y) and V = A''/A − Q² (the matching weighted variance):
//!
//! ```text
//! L'  = (Q − L)/θ              w'  = w L'
//! L'' = (V − 2L')/θ            w'' = w (L'' + L'²)
//! ∂/∂θ   = −w' + log x + log y − 2L + (1 − 2θ)L' + (w' + 1)/(w + θ − 1)
//! ∂²/∂θ² = −w'' − 4L' + (1 − 2θ)L'' + w''/(w + θ − 1) − ((w' + 1)/(w + θ − 1))²
//! ```
//!
//! For the argument derivative let pₓ = x^θ/A. Then ∂L/∂x = pₓ/x,
//! ∂w/∂x = w pₓ/x, ∂L'/∂x = pₓ(1 − pₓ)(log x − log y)/x, and
//! ∂/∂u = −(1/u) ∂/∂x. Every power is formed relative to max(x, y), so
//! nothing overflows for large θ.

use super::PointDerivs;

/// θ-independent per-observation quantities.
#[derive(Debug, Clone, Copy)]
pub(crate) struct GumbelPoint {
    pub x: f64,
    pub y: f64,
    pub lx: f64,
    pub ly: f64,
}

impl GumbelPoint {
    #[inline]
    pub fn new(u: f64, v: f64) -> Self {
        let x = -u.ln();
        let y = -v.ln();
        Self {
            x,
            y,
            lx: x.ln(),
            ly: y.ln(),
        }
    }
}

struct Powers {
    /// log w
    l: f64,
    /// share of x^θ in A
    px: f64,
    q: f64,
    var: f64,
}

#[inline]
fn powers(theta: f64, pt: &GumbelPoint) -> Powers {
    let (lmax, lmin, x_is_max) = if pt.lx >= pt.ly {
        (pt.lx, pt.ly, true)
    } else {
        (pt.ly, pt.lx, false)
    };
    // ratio (min/max)^θ ∈ [0, 1]
    let e = (theta * (lmin - lmax)).exp();
    let inv = 1.0 / (1.0 + e);
    let l = lmax + e.ln_1p() / theta;
    let q = (lmax + e * lmin) * inv;
    let diff = lmax - lmin;
    let var = e * diff * diff * inv * inv;
    let px = if x_is_max { inv } else { e * inv };
    Powers { l, px, q, var }
}

#[inline]
pub(crate) fn log_pdf_point(theta: f64, pt: &GumbelPoint) -> f64 {
    let p = powers(theta, pt);
    let w = p.l.exp();
    -w + pt.x + pt.y + (theta - 1.0) * (pt.lx + pt.ly) + (1.0 - 2.0 * theta) * p.l
        + (w + theta - 1.0).ln()
}

pub(crate) fn derivs_point(theta: f64, pt: &GumbelPoint, u: f64, v: f64) -> PointDerivs {
    let p = powers(theta, pt);
    let w = p.l.exp();
    let l1 = (p.q - p.l) / theta;
    let l2 = (p.var - 2.0 * l1) / theta;
    let w1 = w * l1;
    let w2 = w * (l2 + l1 * l1);
    let g = w + theta - 1.0;
    let k = (w1 + 1.0) / g;

    let log_pdf = -w + pt.x + pt.y + (theta - 1.0) * (pt.lx + pt.ly) + (1.0 - 2.0 * theta) * p.l
        + g.ln();
    let score = -w1 + pt.lx + pt.ly - 2.0 * p.l + (1.0 - 2.0 * theta) * l1 + k;
    let hess = -w2 - 4.0 * l1 + (1.0 - 2.0 * theta) * l2 + w2 / g - k * k;

    let cross_for = |share: f64, z: f64, lz: f64, lo: f64, uz: f64| {
        let dl = share / z;
        let dw = w * dl;
        let dl1 = share * (1.0 - share) * (lz - lo) / z;
        let dw1 = dw * l1 + w * dl1;
        let dscore = -dw1 + 1.0 / z - 2.0 * dl + (1.0 - 2.0 * theta) * dl1 + dw1 / g
            - (w1 + 1.0) * dw / (g * g);
        -dscore / uz
    };
    let cross = [
        cross_for(p.px, pt.x, pt.lx, pt.ly, u),
        cross_for(1.0 - p.px, pt.y, pt.ly, pt.lx, v),
    ];
    PointDerivs {
        log_pdf,
        score,
        hess,
        cross,
    }
}

pub(crate) fn cdf(theta: f64, u: f64, v: f64) -> f64 {
    let pt = GumbelPoint::new(u, v);
    (-powers(theta, &pt).l.exp()).exp()
}

pub(crate) fn log_pdf(theta: f64, u: f64, v: f64) -> f64 {
    log_pdf_point(theta, &GumbelPoint::new(u, v))
}

pub(crate) fn derivs(theta: f64, u: f64, v: f64) -> PointDerivs {
    derivs_point(theta, &GumbelPoint::new(u, v), u, v)
}

/// Positive stable variate with Laplace transform exp(−s^α), α ∈ (0, 1],
/// by the Chambers–Mallows–Stuck construction (Kanter's form for the
/// totally skewed case).
pub(crate) fn positive_stable(alpha: f64, angle: f64, expo: f64) -> f64 {
    if alpha >= 1.0 {
        return 1.0;
    }
    let a = (alpha * angle).sin() / angle.sin().powf(1.0 / alpha);
    let b = (((1.0 - alpha) * angle).sin() / expo).powf((1.0 - alpha) / alpha);
    a * b
}
