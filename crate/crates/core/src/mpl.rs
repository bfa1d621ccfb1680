//! Maximum pseudo-likelihood estimation of the dependence parameter and the
//! rank-corrected asymptotic variance of the estimator.

use crate::copula::gumbel::{self, GumbelPoint};
use crate::copula::{clamp_unit, clip_log, gaussian, inverse_tau, CopulaFamily, CopulaModel, PointDerivs};
use crate::error::{Error, Result};
use crate::optimize::brent_bounded;
use crate::pseudo_obs::{kendall_tau_sample, sorted_order, PseudoSample};
use crate::special::normal_quantile;

/// Gaussian iterates stay within |θ| ≤ 1 − GAUSSIAN_EDGE.
const GAUSSIAN_EDGE: f64 = 1e-9;
/// Frank iterates inside (−FRANK_WINDOW, FRANK_WINDOW) are pushed to its edge.
pub const FRANK_WINDOW: f64 = 1e-6;
const FRANK_MAX: f64 = 1e3;
/// Gumbel is optimized over η = log(θ − 1 + GUMBEL_SHIFT).
const GUMBEL_SHIFT: f64 = 1e-10;
const GUMBEL_MAX: f64 = 1e3;
const MAX_ROUNDS: usize = 24;

#[derive(Debug, Clone, PartialEq)]
pub struct FitOptions {
    /// Smallest sample that will be fitted.
    pub min_rows: usize,
    /// Convergence tolerance on θ.
    pub xtol: f64,
    pub max_iter: usize,
    /// Rows used for the Kendall's tau starting value.
    pub init_subsample: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            min_rows: 30,
            xtol: 1e-8,
            max_iter: 200,
            init_subsample: 5000,
        }
    }
}

/// Outcome of one maximum pseudo-likelihood fit.
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub family: CopulaFamily,
    pub theta_hat: f64,
    /// Estimated variance of `theta_hat` (asymptotic variance divided by n).
    pub sigma2: f64,
    pub n: usize,
    pub loglik: f64,
    pub iterations: usize,
    pub converged: bool,
    pub diagnostic: Option<String>,
}

impl FitResult {
    /// A placeholder for a fit that could not be carried out.
    pub fn failed(family: CopulaFamily, n: usize, reason: impl Into<String>) -> Self {
        Self {
            family,
            theta_hat: f64::NAN,
            sigma2: f64::NAN,
            n,
            loglik: f64::NAN,
            iterations: 0,
            converged: false,
            diagnostic: Some(reason.into()),
        }
    }

    pub fn std_error(&self) -> f64 {
        self.sigma2.sqrt()
    }

    /// Usable as an input to inverse-variance combination.
    pub fn is_usable(&self) -> bool {
        self.converged && self.theta_hat.is_finite() && self.sigma2.is_finite() && self.sigma2 > 0.0
    }
}

/// The maximizer alone, before the variance is estimated.
#[derive(Debug, Clone, PartialEq)]
pub struct Maximized {
    pub theta_hat: f64,
    pub loglik: f64,
    pub iterations: usize,
    pub converged: bool,
    pub theta_init: f64,
}

/// Σᵢ log c(uᵢ₁, uᵢ₂; θ), evaluated point by point.
pub fn pseudo_loglik(family: CopulaFamily, theta: f64, u: &PseudoSample) -> Result<f64> {
    let model = CopulaModel::new(family, theta)?;
    Ok(u
        .u1()
        .iter()
        .zip(u.u2())
        .map(|(&a, &b)| model.log_pdf_unchecked(clamp_unit(a), clamp_unit(b)))
        .sum())
}

/// θ-independent preprocessing of a pseudo-sample for repeated evaluation.
enum Objective {
    /// Gaussian log-likelihood depends on the data only through these sums;
    /// the normal scores are kept for the variance estimate.
    Gaussian { n: f64, sum_s: f64, sum_p: f64, x: Vec<f64>, y: Vec<f64> },
    Frank { u: Vec<f64>, v: Vec<f64> },
    Gumbel { points: Vec<GumbelPoint> },
}

impl Objective {
    fn new(family: CopulaFamily, sample: &PseudoSample) -> Self {
        let pairs = sample.u1().iter().zip(sample.u2());
        match family {
            CopulaFamily::Gaussian => {
                let score = |col: &[f64]| col.iter().map(|&a| normal_quantile(clamp_unit(a))).collect::<Vec<_>>();
                let (x, y) = (score(sample.u1()), score(sample.u2()));
                let (mut sum_s, mut sum_p) = (0.0, 0.0);
                for (&a, &b) in x.iter().zip(&y) {
                    sum_s += a * a + b * b;
                    sum_p += a * b;
                }
                Objective::Gaussian {
                    n: sample.len() as f64,
                    sum_s,
                    sum_p,
                    x,
                    y,
                }
            }
            CopulaFamily::Frank => Objective::Frank {
                u: sample.u1().iter().map(|&a| clamp_unit(a)).collect(),
                v: sample.u2().iter().map(|&b| clamp_unit(b)).collect(),
            },
            CopulaFamily::Gumbel => Objective::Gumbel {
                points: pairs
                    .map(|(&a, &b)| GumbelPoint::new(clamp_unit(a), clamp_unit(b)))
                    .collect(),
            },
        }
    }

    fn loglik(&self, theta: f64) -> f64 {
        match self {
            Objective::Gaussian { n, sum_s, sum_p, .. } => {
                gaussian::loglik_from_sums(theta, *n, *sum_s, *sum_p)
            }
            Objective::Frank { u, v } => u
                .iter()
                .zip(v)
                .map(|(&a, &b)| clip_log(crate::copula::frank::log_pdf(theta, a, b)))
                .sum(),
            Objective::Gumbel { points } => points
                .iter()
                .map(|p| clip_log(gumbel::log_pdf_point(theta, p)))
                .sum(),
        }
    }
}

/// Unconstrained working scale for the optimizer.
#[derive(Clone, Copy)]
struct Scale(CopulaFamily);

impl Scale {
    fn to_theta(self, eta: f64) -> f64 {
        match self.0 {
            CopulaFamily::Gaussian => eta.tanh(),
            CopulaFamily::Frank => {
                if eta.abs() < FRANK_WINDOW {
                    FRANK_WINDOW.copysign(if eta == 0.0 { 1.0 } else { eta })
                } else {
                    eta
                }
            }
            CopulaFamily::Gumbel => (1.0 - GUMBEL_SHIFT + eta.exp()).max(1.0),
        }
    }

    fn to_eta(self, theta: f64) -> f64 {
        match self.0 {
            CopulaFamily::Gaussian => theta.atanh(),
            CopulaFamily::Frank => theta,
            CopulaFamily::Gumbel => (theta - 1.0 + GUMBEL_SHIFT).ln(),
        }
    }

    fn bounds(self) -> (f64, f64) {
        match self.0 {
            CopulaFamily::Gaussian => {
                let edge = (1.0 - GAUSSIAN_EDGE).atanh();
                (-edge, edge)
            }
            CopulaFamily::Frank => (-FRANK_MAX, FRANK_MAX),
            CopulaFamily::Gumbel => (GUMBEL_SHIFT.ln(), (GUMBEL_MAX - 1.0 + GUMBEL_SHIFT).ln()),
        }
    }

    /// dθ/dη
    fn jacobian(self, eta: f64) -> f64 {
        match self.0 {
            CopulaFamily::Gaussian => 1.0 - eta.tanh().powi(2),
            CopulaFamily::Frank => 1.0,
            CopulaFamily::Gumbel => eta.exp(),
        }
    }

    fn initial_halfwidth(self, theta0: f64) -> f64 {
        match self.0 {
            CopulaFamily::Gaussian => 0.5,
            CopulaFamily::Frank => (0.5 * theta0.abs()).max(1.0),
            CopulaFamily::Gumbel => 1.0,
        }
    }
}

/// Starting value from the empirical Kendall's tau of the leading rows.
fn initial_theta(family: CopulaFamily, sample: &PseudoSample, rows: usize) -> f64 {
    let head = sample.head(rows.max(2));
    let tau = kendall_tau_sample(head.u1(), head.u2());
    let tau = if tau.is_finite() { tau } else { 0.0 };
    match family {
        CopulaFamily::Gaussian => inverse_tau(family, tau.clamp(-0.95, 0.95)).unwrap_or(0.0),
        CopulaFamily::Gumbel => inverse_tau(family, tau.clamp(0.01, 0.95)).unwrap_or(1.01),
        CopulaFamily::Frank => {
            let t = if tau.abs() < 1e-3 { 1e-3f64.copysign(tau) } else { tau };
            inverse_tau(family, t.clamp(-0.95, 0.95)).unwrap_or(1.0)
        }
    }
}

fn check_sample(sample: &PseudoSample, opts: &FitOptions) -> Result<()> {
    if sample.len() < opts.min_rows {
        return Err(Error::Data(format!(
            "need at least {} rows to fit, got {}",
            opts.min_rows,
            sample.len()
        )));
    }
    for j in 0..2 {
        let col = sample.column(j);
        if col.iter().all(|&x| x == col[0]) {
            return Err(Error::Domain(format!(
                "column {} is constant; the dependence parameter is not identifiable",
                j + 1
            )));
        }
    }
    Ok(())
}

/// Maximize the pseudo log-likelihood over θ.
///
/// Brent's method runs on a transformed scale that keeps every iterate
/// inside the parameter space (atanh θ for Gaussian, raw θ for Frank,
/// log(θ − 1 + δ) for Gumbel), starting from a bracket centred on the
/// Kendall's tau estimate. If the optimum lands on an interior bracket
/// edge, the bracket is re-centred and widened.
pub fn maximize(family: CopulaFamily, sample: &PseudoSample, opts: &FitOptions) -> Result<Maximized> {
    maximize_keep(family, sample, opts).map(|(m, _)| m)
}

/// Opaque per-sample state left over from a maximization, reused by the
/// variance estimate.
pub(crate) struct Prepared(Objective);

pub(crate) fn maximize_keep(
    family: CopulaFamily,
    sample: &PseudoSample,
    opts: &FitOptions,
) -> Result<(Maximized, Prepared)> {
    check_sample(sample, opts)?;
    let objective = Objective::new(family, sample);
    let scale = Scale(family);
    let (dom_lo, dom_hi) = scale.bounds();

    let theta_init = initial_theta(family, sample, opts.init_subsample);
    let mut center = scale.to_eta(theta_init).clamp(dom_lo, dom_hi);
    let mut half = scale.initial_halfwidth(theta_init);
    let mut iterations = 0;
    let mut converged = false;
    let mut best = (center, f64::INFINITY);

    for _ in 0..MAX_ROUNDS {
        let tol = opts.xtol / scale.jacobian(center).max(1.0);
        let lo = (center - half).max(dom_lo);
        let hi = (center + half).min(dom_hi);
        let budget = opts.max_iter.saturating_sub(iterations);
        if budget == 0 {
            break;
        }
        let m = brent_bounded(
            |eta| -objective.loglik(scale.to_theta(eta)),
            lo,
            hi,
            tol,
            budget,
        );
        iterations += m.iterations;
        if m.fx <= best.1 || !best.1.is_finite() {
            best = (m.x, m.fx);
        }
        if !m.converged {
            converged = false;
            break;
        }
        let edge = 10.0 * tol;
        let at_lo = m.x - lo <= edge && lo > dom_lo;
        let at_hi = hi - m.x <= edge && hi < dom_hi;
        if at_lo || at_hi {
            center = m.x;
            half *= 4.0;
            continue;
        }
        if scale.jacobian(m.x) > 1.5 * scale.jacobian(center).max(1.0) {
            // the θ-tolerance implied by the working scale was too loose here
            center = m.x;
            half = 100.0 * opts.xtol / scale.jacobian(m.x);
            continue;
        }
        converged = true;
        break;
    }

    let theta_hat = scale.to_theta(best.0);
    let m = Maximized {
        theta_hat,
        loglik: -best.1,
        iterations,
        converged,
        theta_init,
    };
    Ok((m, Prepared(objective)))
}

/// Fit with default options.
pub fn fit(family: CopulaFamily, sample: &PseudoSample) -> Result<FitResult> {
    fit_with(family, sample, &FitOptions::default())
}

/// Maximize the pseudo log-likelihood and estimate the variance of θ̂.
///
/// Failures of the optimizer or of the variance estimate are reported as
/// `converged = false` with a diagnostic; invalid input is an error.
pub fn fit_with(family: CopulaFamily, sample: &PseudoSample, opts: &FitOptions) -> Result<FitResult> {
    let (m, prepared) = maximize_keep(family, sample, opts)?;
    Ok(finish_prepared(family, sample, m, opts, Some(&prepared)))
}

/// Attach the variance estimate to a maximization result.
pub fn finish_fit(family: CopulaFamily, sample: &PseudoSample, m: Maximized, opts: &FitOptions) -> FitResult {
    finish_prepared(family, sample, m, opts, None)
}

pub(crate) fn finish_prepared(
    family: CopulaFamily,
    sample: &PseudoSample,
    m: Maximized,
    opts: &FitOptions,
    prepared: Option<&Prepared>,
) -> FitResult {
    let mut result = FitResult {
        family,
        theta_hat: m.theta_hat,
        sigma2: f64::NAN,
        n: sample.len(),
        loglik: m.loglik,
        iterations: m.iterations,
        converged: m.converged,
        diagnostic: None,
    };
    if !m.converged {
        result.diagnostic = Some(format!(
            "optimizer did not reach |dtheta| < {} within {} iterations (theta={})",
            opts.xtol, opts.max_iter, m.theta_hat
        ));
        return result;
    }
    let scores = match prepared {
        Some(Prepared(Objective::Gaussian { x, y, .. })) => Some((x.as_slice(), y.as_slice())),
        _ => None,
    };
    match variance_inner(family, m.theta_hat, sample, scores) {
        Ok(s2) if s2.is_finite() && s2 > 0.0 => result.sigma2 = s2,
        Ok(s2) => {
            result.converged = false;
            result.diagnostic = Some(format!("variance estimate {s2} is not positive"));
        }
        Err(e) => {
            result.converged = false;
            result.diagnostic = Some(e.to_string());
        }
    }
    result
}

/// Estimated variance of θ̂: v̂²/n with v̂² = M̂ / Î².
///
/// Î = −(1/n) Σ ∂²log c/∂θ², and M̂ = (1/n) Σ (ℓ̇ᵢ + W₁ᵢ + W₂ᵢ)² where the
/// rank-correction terms are
/// Wⱼᵢ = (1/n) Σₕ [1(uᵢⱼ ≤ uₕⱼ) − uₕⱼ] ∂²log c/∂θ∂uⱼ (uₕ).
pub fn asymptotic_variance(family: CopulaFamily, theta_hat: f64, sample: &PseudoSample) -> Result<f64> {
    variance_inner(family, theta_hat, sample, None)
}

/// `gaussian_scores` are Φ⁻¹ of the clamped columns when already known.
fn variance_inner(
    family: CopulaFamily,
    theta_hat: f64,
    sample: &PseudoSample,
    gaussian_scores: Option<(&[f64], &[f64])>,
) -> Result<f64> {
    let model = CopulaModel::new(family, theta_hat)?;
    let n = sample.len();
    if n == 0 {
        return Err(Error::Data("empty sample".into()));
    }
    let nf = n as f64;

    let mut score = Vec::with_capacity(n);
    let mut cross = [Vec::with_capacity(n), Vec::with_capacity(n)];
    let mut hess_sum = 0.0;
    let mut push = |d: PointDerivs| {
        score.push(d.score);
        hess_sum += d.hess;
        cross[0].push(d.cross[0]);
        cross[1].push(d.cross[1]);
    };
    match gaussian_scores {
        Some((x, y)) if family == CopulaFamily::Gaussian => {
            for (&a, &b) in x.iter().zip(y) {
                push(gaussian::derivs_scores(theta_hat, a, b));
            }
        }
        _ => {
            for (&a, &b) in sample.u1().iter().zip(sample.u2()) {
                push(model.derivs_unchecked(clamp_unit(a), clamp_unit(b)));
            }
        }
    }
    let info = -hess_sum / nf;
    if !(info.is_finite() && info > 0.0) {
        return Err(Error::Fit(format!(
            "information {info} is not positive at theta = {theta_hat}; the fit is not at a maximum"
        )));
    }

    let w1 = rank_correction(sample.u1(), &cross[0]);
    let w2 = rank_correction(sample.u2(), &cross[1]);
    let m_hat = score
        .iter()
        .zip(&w1)
        .zip(&w2)
        .map(|((s, a), b)| (s + a + b).powi(2))
        .sum::<f64>()
        / nf;
    Ok(m_hat / (info * info) / nf)
}

/// Wᵢ = (1/n) Σₕ [1(colᵢ ≤ colₕ) − colₕ] crossₕ, in O(n log n) via a sort
/// and suffix sums over groups of equal values.
fn rank_correction(col: &[f64], cross: &[f64]) -> Vec<f64> {
    let n = col.len();
    let centre: f64 = col.iter().zip(cross).map(|(u, c)| u * c).sum();
    let order = sorted_order(col);

    let mut out = vec![0.0; n];
    let mut suffix = 0.0;
    let mut end = n;
    while end > 0 {
        let mut start = end - 1;
        while start > 0 && col[order[start - 1]] == col[order[end - 1]] {
            start -= 1;
        }
        for &k in &order[start..end] {
            suffix += cross[k];
        }
        let w = (suffix - centre) / n as f64;
        for &k in &order[start..end] {
            out[k] = w;
        }
        end = start;
    }
    out
}
