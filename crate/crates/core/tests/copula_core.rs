use copula_split::copula::{CopulaFamily, CopulaModel, Margin, UnitPair};
use copula_split::inverse_tau;
use copula_split::pseudo_obs::{average_ranks, kendall_tau_sample};
use copula_split::quadrature::GaussLegendre;
use copula_split::rng::RngStream;
use copula_split::special::{debye, normal_pdf, normal_quantile};
use proptest::prelude::*;

use CopulaFamily::{Frank, Gaussian, Gumbel};

fn model(f: CopulaFamily, t: f64) -> CopulaModel {
    CopulaModel::new(f, t).unwrap()
}

fn pair(u: f64, v: f64) -> UnitPair {
    UnitPair::new(u, v).unwrap()
}

fn close(a: f64, b: f64, rel: f64, abs: f64) -> bool {
    (a - b).abs() <= rel * b.abs() + abs
}

/// Frank CDF straight from the closed form, valid for any θ ≠ 0 of moderate size.
fn frank_cdf_direct(t: f64, u: f64, v: f64) -> f64 {
    -(1.0 + ((-t * u).exp() - 1.0) * ((-t * v).exp() - 1.0) / ((-t).exp() - 1.0)).ln() / t
}

fn frank_pdf_direct(t: f64, u: f64, v: f64) -> f64 {
    let a = 1.0 - (-t).exp();
    let den = a - (1.0 - (-t * u).exp()) * (1.0 - (-t * v).exp());
    t * a * (-t * (u + v)).exp() / (den * den)
}

fn gaussian_pdf_direct(r: f64, u: f64, v: f64) -> f64 {
    let (x, y) = (normal_quantile(u), normal_quantile(v));
    let d = 1.0 - r * r;
    let phi2 = (-(x * x - 2.0 * r * x * y + y * y) / (2.0 * d)).exp()
        / (2.0 * std::f64::consts::PI * d.sqrt());
    phi2 / (normal_pdf(x) * normal_pdf(y))
}

// ---------------------------------------------------------------- model domain

#[test]
fn parameter_domains_are_enforced() {
    assert!(CopulaModel::new(Gaussian, 1.0).is_err());
    assert!(CopulaModel::new(Gaussian, -1.0).is_err());
    assert!(CopulaModel::new(Gaussian, 0.999).is_ok());
    assert!(CopulaModel::new(Frank, 0.0).is_err());
    assert!(CopulaModel::new(Frank, f64::INFINITY).is_err());
    assert!(CopulaModel::new(Frank, -3.0).is_ok());
    assert!(CopulaModel::new(Gumbel, 0.99).is_err());
    assert!(CopulaModel::new(Gumbel, 1.0).is_ok());
    for f in CopulaFamily::ALL {
        assert!(CopulaModel::new(f, f64::NAN).is_err());
    }
    assert!(UnitPair::new(0.0, 0.5).is_err());
    assert!(UnitPair::new(0.5, 1.0).is_err());
    assert!(UnitPair::new(f64::NAN, 0.5).is_err());
}

#[test]
fn family_names_round_trip() {
    for f in CopulaFamily::ALL {
        assert_eq!(f.to_string().parse::<CopulaFamily>().unwrap(), f);
    }
    assert!("clayton".parse::<CopulaFamily>().is_err());
}

// ---------------------------------------------------------------- cdf

#[test]
fn cdf_independence_cases() {
    assert!((model(Gumbel, 1.0).cdf(pair(0.3, 0.4)) - 0.12).abs() < 1e-15);
    assert!((model(Gaussian, 0.0).cdf(pair(0.3, 0.4)) - 0.12).abs() < 1e-15);
}

#[test]
fn frank_cdf_at_median_point() {
    let want = -(1.0 + ((-2.5f64).exp() - 1.0).powi(2) / ((-5f64).exp() - 1.0)).ln() / 5.0;
    let got = model(Frank, 5.0).cdf(pair(0.5, 0.5));
    assert!((got - want).abs() < 1e-14, "{got} vs {want}");

    // C(½, ½) = ∬_{[0,½]²} c, by Gauss–Legendre on the quarter square
    let m = model(Frank, 5.0);
    let rule = GaussLegendre::unit(200);
    let integral = 0.25 * rule.integrate_square(|x, y| m.pdf(pair(0.5 * x, 0.5 * y)));
    assert!((integral - want).abs() < 1e-10, "{integral} vs {want}");
}

#[test]
fn frank_cdf_matches_closed_form_for_both_signs() {
    for &t in &[-12.0, -5.0, -0.7, 0.7, 5.0, 12.0] {
        let m = model(Frank, t);
        for i in 1..10 {
            for j in 1..10 {
                let (u, v) = (i as f64 / 10.0, j as f64 / 10.0);
                let want = frank_cdf_direct(t, u, v);
                let got = m.cdf(pair(u, v));
                // the direct form loses digits to 1 + x cancellation at large |θ|
                assert!((got - want).abs() < 1e-11, "θ={t} ({u},{v}): {got} vs {want}");
            }
        }
    }
}

/// (θ, u, v, C, c) evaluated at 50 significant digits.
const FRANK_REFERENCE: [(f64, f64, f64, f64, f64); 6] = [
    (12.0, 0.9, 0.9, 0.855840028114204279, 4.15816332663814154),
    (-12.0, 0.1, 0.95, 0.0684360702094621454, 4.23103696748404677),
    (30.0, 0.5, 0.5, 0.476895104178077613, 7.50000458853621117),
    (15.0, 0.7, 0.8, 0.687181027618990355, 2.27841798425402778),
    (-15.0, 0.2, 0.9, 0.11065707701640741, 2.43108630489656934),
    (35.0, 0.3, 0.31, 0.284760835078386921, 8.48760205509173273),
];

#[test]
fn frank_matches_high_precision_reference() {
    for (t, u, v, cdf, pdf) in FRANK_REFERENCE {
        let m = model(Frank, t);
        assert!((m.cdf(pair(u, v)) - cdf).abs() < 1e-15, "C at θ={t}");
        assert!(close(m.pdf(pair(u, v)), pdf, 1e-13, 0.0), "c at θ={t}");
    }
}

#[test]
fn cdf_edges_take_limit_values() {
    for f in CopulaFamily::ALL {
        for &t in &[f.study_theta(), if f == Gumbel { 1.5 } else { -0.5 }] {
            let m = model(f, t);
            for &u in &[0.0, 0.1, 0.37, 0.5, 0.93, 1.0] {
                assert_eq!(m.cdf_closed(u, 1.0).unwrap(), u);
                assert_eq!(m.cdf_closed(1.0, u).unwrap(), u);
                assert_eq!(m.cdf_closed(u, 0.0).unwrap(), 0.0);
                assert_eq!(m.cdf_closed(0.0, u).unwrap(), 0.0);
            }
            // approaching the edge from inside
            let top = 1.0 - f64::EPSILON;
            for &u in &[0.1, 0.5, 0.9] {
                assert!((m.cdf(pair(u, top)) - u).abs() <= 1e-12 + 1e-15);
                assert!(m.cdf(pair(u, 1e-300)) <= 1e-12);
            }
            assert!(m.cdf_closed(1.1, 0.5).is_err());
        }
    }
}

#[test]
fn frechet_bounds_and_monotonicity_on_grid() {
    let models = [
        model(Gaussian, 0.3),
        model(Gaussian, -0.8),
        model(Frank, 5.0),
        model(Frank, -5.0),
        model(Gumbel, 5.0),
        model(Gumbel, 1.0),
    ];
    for m in models {
        let grid: Vec<f64> = (0..=20).map(|i| i as f64 / 20.0).collect();
        let c: Vec<Vec<f64>> = grid
            .iter()
            .map(|&u| grid.iter().map(|&v| m.cdf_closed(u, v).unwrap()).collect())
            .collect();
        for (i, &u) in grid.iter().enumerate() {
            for (j, &v) in grid.iter().enumerate() {
                let lo = (u + v - 1.0).max(0.0);
                let hi = u.min(v);
                assert!(c[i][j] >= lo - 1e-15 && c[i][j] <= hi + 1e-15, "{m:?} ({u},{v})");
                if i > 0 {
                    assert!(c[i][j] >= c[i - 1][j]);
                }
                if j > 0 {
                    assert!(c[i][j] >= c[i][j - 1]);
                }
            }
        }
    }
}

// ---------------------------------------------------------------- density

#[test]
fn log_pdf_examples() {
    let g = model(Gaussian, 0.0);
    for &(u, v) in &[(0.1, 0.9), (0.5, 0.5), (0.01, 0.3)] {
        assert_eq!(g.log_pdf(pair(u, v)), 0.0);
    }
    let f = model(Frank, 5.0);
    for &(u, v) in &[(0.1, 0.9), (0.2, 0.35), (0.7, 0.01)] {
        assert_eq!(f.log_pdf(pair(u, v)), f.log_pdf(pair(v, u)));
    }
    let gu = model(Gumbel, 5.0);
    assert!(gu.log_pdf(pair(0.9, 0.9)) > gu.log_pdf(pair(0.1, 0.1)));
}

#[test]
fn densities_match_direct_formulas() {
    for &t in &[-8.0, -1.0, 0.5, 5.0, 15.0] {
        let m = model(Frank, t);
        for i in 1..10 {
            for j in 1..10 {
                let (u, v) = (i as f64 / 10.0, j as f64 / 10.0);
                let want = frank_pdf_direct(t, u, v);
                assert!(close(m.pdf(pair(u, v)), want, 1e-10, 0.0), "Frank θ={t} ({u},{v})");
            }
        }
    }
    for &r in &[-0.9, -0.3, 0.3, 0.9] {
        let m = model(Gaussian, r);
        for i in 1..10 {
            for j in 1..10 {
                let (u, v) = (i as f64 / 10.0, j as f64 / 10.0);
                let want = gaussian_pdf_direct(r, u, v);
                assert!(close(m.pdf(pair(u, v)), want, 1e-12, 0.0), "Gaussian ρ={r} ({u},{v})");
            }
        }
    }
}

#[test]
fn densities_integrate_to_one() {
    let rule = GaussLegendre::unit(200);
    for (f, t, tol) in [(Gaussian, 0.3, 1e-4), (Frank, 5.0, 1e-4), (Gumbel, 5.0, 1e-3), (Gumbel, 2.0, 1e-4)] {
        let m = model(f, t);
        let mass = rule.integrate_square(|u, v| m.pdf(pair(u, v)));
        assert!((mass - 1.0).abs() < tol, "{f} θ={t}: {mass}");
    }
}

#[test]
fn mixed_cdf_difference_matches_density() {
    let h = 1e-4;
    for (f, t) in [(Gaussian, 0.3), (Gaussian, -0.7), (Frank, 5.0), (Frank, -5.0), (Gumbel, 5.0), (Gumbel, 1.5)] {
        let m = model(f, t);
        let c = |u: f64, v: f64| m.cdf(pair(u, v));
        for i in 1..10 {
            for j in 1..10 {
                let (u, v) = (i as f64 / 10.0, j as f64 / 10.0);
                let mixed = (c(u + h, v + h) - c(u + h, v - h) - c(u - h, v + h) + c(u - h, v - h)) / (4.0 * h * h);
                let dens = m.pdf(pair(u, v));
                assert!(close(mixed, dens, 1e-3, 0.0), "{f} θ={t} ({u},{v}): {mixed} vs {dens}");
            }
        }
    }
}

#[test]
fn log_pdf_stays_finite_at_extreme_corners() {
    let tiny = f64::MIN_POSITIVE;
    let top = 1.0 - f64::EPSILON / 2.0;
    for (f, t) in [(Gaussian, 0.99), (Gaussian, -0.99), (Frank, 40.0), (Frank, -40.0), (Gumbel, 20.0)] {
        let m = model(f, t);
        for &(u, v) in &[(tiny, tiny), (top, top), (tiny, top), (top, tiny)] {
            let d = m.derivs(pair(u, v));
            assert!(d.log_pdf.is_finite() && d.log_pdf.abs() <= 700.0, "{f} θ={t} ({u},{v})");
            assert!(d.score.is_finite() && d.hess.is_finite());
            assert!(d.cross.iter().all(|x| x.is_finite()));
        }
    }
}

// ---------------------------------------------------------------- derivatives

fn fd_score(m: &CopulaModel, p: UnitPair, h: f64) -> f64 {
    let f = |t: f64| model(m.family(), t).log_pdf(p);
    (f(m.theta() + h) - f(m.theta() - h)) / (2.0 * h)
}

fn fd_hess(m: &CopulaModel, p: UnitPair, h: f64) -> f64 {
    let f = |t: f64| model(m.family(), t).log_pdf(p);
    (f(m.theta() + h) - 2.0 * f(m.theta()) + f(m.theta() - h)) / (h * h)
}

fn fd_cross(m: &CopulaModel, p: UnitPair, margin: Margin, h: f64) -> f64 {
    let shifted = |d: f64| match margin {
        Margin::First => pair(p.u1() + d, p.u2()),
        Margin::Second => pair(p.u1(), p.u2() + d),
    };
    (m.score_theta(shifted(h)) - m.score_theta(shifted(-h))) / (2.0 * h)
}

#[test]
fn score_examples() {
    assert_eq!(model(Gaussian, 0.0).score_theta(pair(0.5, 0.5)), 0.0);
    for (f, t, u, v) in [(Frank, 5.0, 0.3, 0.7), (Gumbel, 2.0, 0.5, 0.5)] {
        let m = model(f, t);
        let p = pair(u, v);
        let fd = fd_score(&m, p, 1e-5);
        assert!(close(m.score_theta(p), fd, 1e-4, 1e-9), "{f}: {} vs {fd}", m.score_theta(p));
    }
}

#[test]
fn hessian_examples() {
    for (f, t, u, v) in [(Gaussian, 0.0, 0.5, 0.5), (Frank, 5.0, 0.3, 0.7)] {
        let m = model(f, t);
        let p = pair(u, v);
        let fd = fd_hess(&m, p, 1e-4);
        assert!(close(m.hess_theta(p), fd, 1e-3, 1e-6), "{f}: {} vs {fd}", m.hess_theta(p));
    }
}

#[test]
fn cross_score_examples() {
    let g = model(Gaussian, 0.0);
    let p = pair(0.2, 0.65);
    assert!(close(g.cross_score(p, Margin::First), fd_cross(&g, p, Margin::First, 1e-6), 1e-3, 1e-7));
    let f = model(Frank, 5.0);
    let p = pair(0.4, 0.6);
    assert!(close(f.cross_score(p, Margin::Second), fd_cross(&f, p, Margin::Second, 1e-6), 1e-3, 1e-7));
    for m in [model(Frank, 5.0), model(Frank, -3.0), model(Gumbel, 5.0), model(Gaussian, 0.3)] {
        for &a in &[0.1, 0.5, 0.77] {
            let p = pair(a, a);
            let (c1, c2) = (m.cross_score(p, Margin::First), m.cross_score(p, Margin::Second));
            assert!((c1 - c2).abs() <= 1e-12 * c1.abs().max(1.0), "{m:?} at {a}");
        }
    }
}

fn theta_strategy() -> impl Strategy<Value = (CopulaFamily, f64)> {
    prop_oneof![
        (-0.95f64..0.95).prop_map(|t| (Gaussian, t)),
        (0.5f64..20.0).prop_map(|t| (Frank, t)),
        (-20.0f64..-0.5).prop_map(|t| (Frank, t)),
        (1.05f64..10.0).prop_map(|t| (Gumbel, t)),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn derivatives_match_finite_differences(
        (f, t) in theta_strategy(),
        u in 0.02f64..0.98,
        v in 0.02f64..0.98,
    ) {
        let m = model(f, t);
        let p = pair(u, v);
        let d = m.derivs(p);
        let s = fd_score(&m, p, 1e-5);
        prop_assert!(close(d.score, s, 1e-4, 1e-8), "score {} vs {}", d.score, s);
        let h = fd_hess(&m, p, 1e-4);
        prop_assert!(close(d.hess, h, 1e-3, 1e-5), "hess {} vs {}", d.hess, h);
        // hessian as the derivative of the analytic score
        let hs = (model(f, t + 1e-6).score_theta(p) - model(f, t - 1e-6).score_theta(p)) / 2e-6;
        prop_assert!(close(d.hess, hs, 1e-3, 1e-5), "hess {} vs d(score) {}", d.hess, hs);
        for margin in [Margin::First, Margin::Second] {
            let c = fd_cross(&m, p, margin, 1e-6);
            let got = d.cross[margin.index()];
            prop_assert!(close(got, c, 1e-3, 1e-5), "cross {:?} {} vs {}", margin, got, c);
        }
    }

    #[test]
    fn inverse_tau_round_trips((f, t) in theta_strategy()) {
        let m = model(f, t);
        let back = inverse_tau(f, m.kendall_tau()).unwrap();
        prop_assert!((model(f, back).kendall_tau() - m.kendall_tau()).abs() < 1e-8);
        prop_assert!(close(back, t, 1e-6, 1e-8), "{} vs {}", back, t);
    }

    #[test]
    fn cdf_is_monotone_in_each_argument(
        (f, t) in theta_strategy(),
        u in 0.001f64..0.999,
        v in 0.001f64..0.999,
        du in 0.0f64..0.5,
    ) {
        let m = model(f, t);
        let u2 = (u + du).min(0.9999);
        prop_assert!(m.cdf(pair(u2, v)) >= m.cdf(pair(u, v)));
        prop_assert!(m.cdf(pair(v, u2)) >= m.cdf(pair(v, u)));
    }
}

// ---------------------------------------------------------------- dependence measures

#[test]
fn dependence_measures_of_the_study_models() {
    let round2 = |x: f64| (x * 100.0).round() / 100.0;
    let g = model(Gaussian, 0.3);
    assert_eq!(round2(g.kendall_tau()), 0.19);
    assert_eq!(round2(g.spearman_rho()), 0.29);
    let f = model(Frank, 5.0);
    assert_eq!(round2(f.kendall_tau()), 0.46);
    assert_eq!(round2(f.spearman_rho()), 0.64);
    let gu = model(Gumbel, 5.0);
    assert!((gu.kendall_tau() - 0.8).abs() < 1e-15);
    assert_eq!(round2(gu.spearman_rho()), 0.94);
}

#[test]
fn frank_spearman_matches_debye_form() {
    for &t in &[-10.0, -2.0, 0.5, 5.0, 12.0] {
        let want = 1.0 - 12.0 / t * (debye(1, t) - debye(2, t));
        let got = model(Frank, t).spearman_rho();
        assert!((got - want).abs() < 1e-6, "θ={t}: {got} vs {want}");
    }
}

#[test]
fn gaussian_spearman_closed_form_matches_quadrature() {
    // 12 ∬ C − 3 for the Gaussian as an independent check of the closed form
    let m = model(Gaussian, 0.3);
    let rule = GaussLegendre::unit(200);
    let rho = 12.0 * rule.integrate_square(|u, v| m.cdf(pair(u, v))) - 3.0;
    assert!((rho - m.spearman_rho()).abs() < 1e-6);
}

#[test]
fn inverse_tau_examples_and_range() {
    assert!((inverse_tau(Gumbel, 0.8).unwrap() - 5.0).abs() < 1e-12);
    assert_eq!(inverse_tau(Gaussian, 0.0).unwrap(), 0.0);
    let t = inverse_tau(Frank, 0.46).unwrap();
    assert!((t - 5.0).abs() < 0.1, "{t}");
    assert!((model(Frank, t).kendall_tau() - 0.46).abs() < 1e-8);
    let neg = inverse_tau(Frank, -0.46).unwrap();
    assert!((neg + t).abs() < 1e-9);

    assert!(inverse_tau(Gumbel, -0.1).is_err());
    assert!(inverse_tau(Frank, 0.0).is_err());
    for f in CopulaFamily::ALL {
        assert!(inverse_tau(f, 1.0).is_err());
        assert!(inverse_tau(f, f64::NAN).is_err());
    }
}

// ---------------------------------------------------------------- sampling

fn tau_se(n: usize) -> f64 {
    let n = n as f64;
    (2.0 * (2.0 * n + 5.0) / (9.0 * n * (n - 1.0))).sqrt()
}

fn draw(f: CopulaFamily, t: f64, n: usize, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let pairs = model(f, t).sample(n, &mut RngStream::from_seed(seed));
    assert_eq!(pairs.len(), n);
    pairs.iter().map(|p| (p.u1(), p.u2())).unzip()
}

fn sample_spearman(x: &[f64], y: &[f64]) -> f64 {
    let (rx, ry) = (average_ranks(x), average_ranks(y));
    let n = rx.len() as f64;
    let mean = (n + 1.0) / 2.0;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mean) * (b - mean);
        sxx += (a - mean).powi(2);
        syy += (b - mean).powi(2);
    }
    sxy / (sxx * syy).sqrt()
}

#[test]
fn independence_sample_has_zero_tau() {
    let n = 10_000;
    let (x, y) = draw(Gumbel, 1.0, n, 11);
    assert!(kendall_tau_sample(&x, &y).abs() < 3.0 * tau_se(n));
}

#[test]
fn samplers_reproduce_kendall_tau() {
    let n = 100_000;
    for (i, f) in CopulaFamily::ALL.into_iter().enumerate() {
        for &t in &[f.study_theta(), if f == Gumbel { 1.7 } else { -f.study_theta() }] {
            let (x, y) = draw(f, t, n, 100 + i as u64);
            assert!(x.iter().chain(&y).all(|&u| u > 0.0 && u < 1.0));
            let emp = kendall_tau_sample(&x, &y);
            let want = model(f, t).kendall_tau();
            assert!((emp - want).abs() < 4.0 * tau_se(n), "{f} θ={t}: {emp} vs {want}");
        }
    }
}

#[test]
fn study_samples_show_reported_rank_correlations() {
    let n = 100_000;
    let (x, y) = draw(Gaussian, 0.3, n, 5);
    assert!((kendall_tau_sample(&x, &y) - 0.19).abs() < 0.01);
    assert!((sample_spearman(&x, &y) - 0.29).abs() < 0.01);
    let (x, y) = draw(Gumbel, 5.0, n, 6);
    assert!((kendall_tau_sample(&x, &y) - 0.80).abs() < 0.01);
    assert!((sample_spearman(&x, &y) - 0.94).abs() < 0.01);
    let (x, y) = draw(Frank, 5.0, n, 7);
    assert!((sample_spearman(&x, &y) - 0.64).abs() < 0.01);
}

#[test]
fn sampling_is_reproducible_per_seed() {
    for f in CopulaFamily::ALL {
        let a = draw(f, f.study_theta(), 1000, 42);
        let b = draw(f, f.study_theta(), 1000, 42);
        let c = draw(f, f.study_theta(), 1000, 43);
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}
