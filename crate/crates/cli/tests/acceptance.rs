//! Acceptance criteria 1-9. Each test writes one `PASS`/`FAIL` line to
//! stderr (unbuffered, so it shows up even when output is captured) before
//! asserting.

use std::fs;
use std::io::Write;
use std::process::Command;
use std::sync::{Mutex, MutexGuard, OnceLock};

use copula_split::copula::{CopulaFamily, CopulaModel, Margin, UnitPair};
use copula_split::parallel::partition;
use copula_split::quadrature::GaussLegendre;
use copula_split::rng::derive_seed;
use copula_split::{
    combine, fit, fit_parallel, normalized_ranks, pseudo_loglik, run_study, DataMatrix, FitResult,
    ParallelOptions, PseudoSample, RngStream, Scheme, SimConfig, SimReport,
};

use CopulaFamily::{Frank, Gaussian, Gumbel};

/// Criteria share one core; timing in particular must not overlap anything.
static SERIAL: Mutex<()> = Mutex::new(());

fn serial() -> MutexGuard<'static, ()> {
    SERIAL.lock().unwrap_or_else(|e| e.into_inner())
}

fn verdict(criterion: u32, pass: bool, detail: &str) {
    let tag = if pass { "PASS" } else { "FAIL" };
    let _ = writeln!(std::io::stderr(), "{tag} criterion {criterion}: {detail}");
}

fn model(f: CopulaFamily, t: f64) -> CopulaModel {
    CopulaModel::new(f, t).unwrap()
}

fn pair(u: f64, v: f64) -> UnitPair {
    UnitPair::new(u, v).unwrap()
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * b.abs()
}

fn study_models() -> [CopulaModel; 3] {
    CopulaFamily::ALL.map(|f| model(f, f.study_theta()))
}

fn pseudo_sample(m: &CopulaModel, n: usize, seed: u64) -> PseudoSample {
    let x = DataMatrix::from_pairs(&m.sample(n, &mut RngStream::from_seed(seed))).unwrap();
    normalized_ranks(&x)
}

#[test]
fn criterion_1_dependence_measure_table() {
    let _g = serial();
    let expected = [(Gaussian, "0.19", "0.29"), (Frank, "0.46", "0.64"), (Gumbel, "0.80", "0.94")];
    let mut problems = Vec::new();
    for (f, tau, rho) in expected {
        let m = model(f, f.study_theta());
        let (t, r) = (format!("{:.2}", m.kendall_tau()), format!("{:.2}", m.spearman_rho()));
        if t != tau || r != rho {
            problems.push(format!("{f}: tau {t} rho {r}, expected {tau}/{rho}"));
        }
    }
    let pass = problems.is_empty();
    verdict(1, pass, &if pass { "tau/rho match to 2 dp for all families".into() } else { problems.join("; ") });
    assert!(pass);
}

#[test]
fn criterion_2_density_cdf_consistency() {
    let _g = serial();
    let mut problems = Vec::new();
    let rule = GaussLegendre::unit(200);
    let h = 1e-4;
    for m in study_models() {
        let f = m.family();
        let tol = if f == Gumbel { 1e-3 } else { 1e-4 };
        let mass = rule.integrate_square(|u, v| m.pdf(pair(u, v)));
        if (mass - 1.0).abs() > tol {
            problems.push(format!("{f}: mass {mass}"));
        }

        let c = |u: f64, v: f64| m.cdf(pair(u, v));
        for i in 1..10 {
            for j in 1..10 {
                let (u, v) = (i as f64 / 10.0, j as f64 / 10.0);
                let mixed = (c(u + h, v + h) - c(u + h, v - h) - c(u - h, v + h) + c(u - h, v - h)) / (4.0 * h * h);
                let dens = m.pdf(pair(u, v));
                if !close(mixed, dens, 1e-3) {
                    problems.push(format!("{f} ({u},{v}): mixed difference {mixed} vs density {dens}"));
                }
            }
        }

        for i in 0..=20 {
            for j in 0..=20 {
                let (u, v) = (i as f64 / 20.0, j as f64 / 20.0);
                let cv = m.cdf_closed(u, v).unwrap();
                // u + v - 1 itself rounds, e.g. 0.05 + 1 - 1 > 0.05
                let ulp = f64::EPSILON;
                if cv < (u + v - 1.0).max(0.0) - ulp || cv > u.min(v) + ulp {
                    problems.push(format!("{f} ({u},{v}): C = {cv} outside the Frechet bounds"));
                }
            }
        }
    }
    let pass = problems.is_empty();
    verdict(
        2,
        pass,
        &if pass {
            "normalization, 9x9 mixed differences and 21x21 Frechet bounds hold".into()
        } else {
            problems.join("; ")
        },
    );
    assert!(pass);
}

#[test]
fn criterion_3_derivative_oracles() {
    let _g = serial();
    let mut problems = Vec::new();
    let mut worst = [0.0f64; 3];
    // relative tolerances; the absolute floor only matters where the
    // derivative itself crosses zero
    let within = |got: f64, fd: f64, rel: f64, k: usize, worst: &mut [f64; 3]| {
        let err = (got - fd).abs() / fd.abs().max(1e-3);
        worst[k] = worst[k].max(err);
        err <= rel
    };
    for m in study_models() {
        let f = m.family();
        let t = m.theta();
        let mut rng = RngStream::from_seed(derive_seed(3, &[f.code()]));
        for _ in 0..50 {
            let p = pair(0.02 + 0.96 * rng.open01(), 0.02 + 0.96 * rng.open01());
            let lp = |t: f64| model(f, t).log_pdf(p);

            let h = 1e-5;
            let fd = (lp(t + h) - lp(t - h)) / (2.0 * h);
            if !within(m.score_theta(p), fd, 1e-4, 0, &mut worst) {
                problems.push(format!("{f} score at {p:?}: {} vs {fd}", m.score_theta(p)));
            }

            let h = 1e-4;
            let fd = (lp(t + h) - 2.0 * lp(t) + lp(t - h)) / (h * h);
            if !within(m.hess_theta(p), fd, 1e-3, 1, &mut worst) {
                problems.push(format!("{f} hessian at {p:?}: {} vs {fd}", m.hess_theta(p)));
            }

            let h = 1e-6;
            for margin in [Margin::First, Margin::Second] {
                let shifted = |d: f64| match margin {
                    Margin::First => pair(p.u1() + d, p.u2()),
                    Margin::Second => pair(p.u1(), p.u2() + d),
                };
                let fd = (m.score_theta(shifted(h)) - m.score_theta(shifted(-h))) / (2.0 * h);
                let got = m.cross_score(p, margin);
                if !within(got, fd, 1e-3, 2, &mut worst) {
                    problems.push(format!("{f} cross {margin:?} at {p:?}: {got} vs {fd}"));
                }
            }
        }
    }
    let pass = problems.is_empty();
    verdict(
        3,
        pass,
        &if pass {
            format!(
                "150 points; worst relative error score {:.1e}, hessian {:.1e}, cross {:.1e}",
                worst[0], worst[1], worst[2]
            )
        } else {
            problems.join("; ")
        },
    );
    assert!(pass);
}

/// Argmax of the pointwise pseudo log-likelihood: a 0.01 grid over a wide
/// range, refined on a 1e-3 grid around the best coarse point.
fn grid_argmax(f: CopulaFamily, u: &PseudoSample) -> f64 {
    let (lo, hi): (f64, f64) = match f {
        Gaussian => (-0.99, 0.99),
        Frank => (-30.0, 30.0),
        Gumbel => (1.0, 30.0),
    };
    let ll = |t: f64| {
        if f.admits(t) {
            pseudo_loglik(f, t, u).unwrap()
        } else {
            f64::NEG_INFINITY
        }
    };
    let best = |pts: &mut dyn Iterator<Item = f64>| {
        pts.map(|t| (t, ll(t)))
            .fold((f64::NAN, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a })
            .0
    };
    let steps = ((hi - lo) / 0.01).round() as i64;
    let coarse = best(&mut (0..=steps).map(|k| lo + 0.01 * k as f64));
    best(&mut (-10..=10).map(|k| coarse + 1e-3 * k as f64))
}

#[test]
fn criterion_4_optimizer_matches_grid_argmax() {
    let _g = serial();
    let mut worst: f64 = 0.0;
    let mut problems = Vec::new();
    for m in study_models() {
        for seed in 0..20 {
            let u = pseudo_sample(&m, 2000, derive_seed(4, &[m.family().code(), seed]));
            let r = fit(m.family(), &u).unwrap();
            let g = grid_argmax(m.family(), &u);
            worst = worst.max((r.theta_hat - g).abs());
            if !r.converged || (r.theta_hat - g).abs() > 2e-3 {
                problems.push(format!("{} seed {seed}: fit {} grid {g}", m.family(), r.theta_hat));
            }
        }
    }
    let pass = problems.is_empty();
    verdict(
        4,
        pass,
        &if pass {
            format!("60 samples; largest |fit - grid argmax| = {worst:.1e}")
        } else {
            problems.join("; ")
        },
    );
    assert!(pass);
}

#[test]
fn criterion_5_variance_matches_monte_carlo() {
    let _g = serial();
    let mut lines = Vec::new();
    let mut pass = true;
    for m in study_models() {
        let fits: Vec<FitResult> = (0..200)
            .map(|r| fit(m.family(), &pseudo_sample(&m, 5000, derive_seed(5, &[m.family().code(), r]))).unwrap())
            .collect();
        let n = fits.len() as f64;
        let mean = fits.iter().map(|r| r.theta_hat).sum::<f64>() / n;
        let empirical = fits.iter().map(|r| (r.theta_hat - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let reported = fits.iter().map(|r| r.sigma2).sum::<f64>() / n;
        let ratio = reported / empirical;
        pass &= (ratio - 1.0).abs() < 0.2 && fits.iter().all(FitResult::is_usable);
        lines.push(format!("{} mean sigma2/empirical = {ratio:.3}", m.family()));
    }
    verdict(5, pass, &lines.join(", "));
    assert!(pass);
}

const GRID_N: [usize; 3] = [50_000, 100_000, 200_000];
const GRID_M: [usize; 3] = [10, 20, 100];

fn study_grid(s: usize, seed: u64) -> Vec<SimReport> {
    let mut out = Vec::new();
    for f in CopulaFamily::ALL {
        for n in GRID_N {
            for m in GRID_M {
                out.push(run_study(&SimConfig::study(f, n, m, s, seed)).unwrap());
            }
        }
    }
    out
}

/// The S = 10 grid, shared by criterion 6 and the monotonicity check.
fn desk_grid() -> &'static [SimReport] {
    static GRID: OnceLock<Vec<SimReport>> = OnceLock::new();
    GRID.get_or_init(|| study_grid(10, 20240101))
}

/// (|bias|, MSE) ceilings per family as reported for the full study.
fn paper_limits(f: CopulaFamily) -> (f64, f64) {
    match f {
        Gaussian => (0.002, 4e-6),
        Frank => (0.008, 7e-5),
        Gumbel => (0.008, 9e-5),
    }
}
const L_LIMIT: f64 = 0.0013;

fn check_grid(reports: &[SimReport], slack: f64) -> Vec<String> {
    let mut problems = Vec::new();
    for r in reports {
        let (b, m) = paper_limits(r.config.family);
        let cell = format!("{} N={} M={}", r.config.family, r.config.n, r.config.m);
        let checks = [
            ("|bias|", r.bias.abs(), b * slack),
            ("mse", r.mse, m * slack),
            ("rel_l1", r.rel_l1, L_LIMIT * slack),
            ("rel_l2", r.rel_l2, L_LIMIT * slack),
        ];
        for (name, value, limit) in checks {
            if !(value < limit) {
                problems.push(format!("{cell} {name} {value:.2e} >= {limit:.2e}"));
            }
        }
    }
    problems
}

#[test]
fn criterion_6_study_at_desk_scale() {
    let _g = serial();
    let grid = desk_grid();
    let problems = check_grid(grid, 2.0);
    let unstable: Vec<String> = grid
        .iter()
        .filter(|r| !(r.quad_check.l1_stable && r.quad_check.l2_stable))
        .map(|r| format!("{} N={} M={}", r.config.family, r.config.n, r.config.m))
        .collect();
    let pass = problems.is_empty();
    verdict(
        6,
        pass,
        &if pass {
            format!("27 cells at S=10 within twice the reported limits; unstable quadrature: {unstable:?}")
        } else {
            format!("{} of 108 checks exceed twice the reported limits: {}", problems.len(), problems.join("; "))
        },
    );
    assert!(pass);
}

#[test]
#[ignore = "full S = 50 study; run with --ignored"]
fn criterion_6_full_study_at_reported_limits() {
    let _g = serial();
    let problems = check_grid(&study_grid(50, 20240101), 1.0);
    let pass = problems.is_empty();
    verdict(
        6,
        pass,
        &if pass {
            "S=50 grid within the reported limits".into()
        } else {
            format!("S=50: {} checks exceed the reported limits: {}", problems.len(), problems.join("; "))
        },
    );
    assert!(pass);
}

#[test]
fn study_errors_grow_with_block_count() {
    let _g = serial();
    let grid = desk_grid();
    let monotone = |metric: fn(&SimReport) -> f64| {
        let mut count = 0;
        for f in CopulaFamily::ALL {
            for n in GRID_N {
                let v: Vec<f64> = GRID_M
                    .iter()
                    .map(|&m| {
                        let r = grid.iter().find(|r| r.config.family == f && r.config.n == n && r.config.m == m);
                        metric(r.unwrap())
                    })
                    .collect();
                count += v.windows(2).all(|w| w[0] <= w[1]) as usize;
            }
        }
        count
    };
    let bias = monotone(|r| r.bias.abs());
    let mse = monotone(|r| r.mse);
    let pass = bias >= 7 && mse >= 7;
    verdict(
        6,
        pass,
        &format!("nondecreasing in M: |bias| in {bias}/9 (family, N) cells, MSE in {mse}/9"),
    );
    assert!(pass);
}

#[test]
fn criterion_7_superlinear_speedup() {
    let _g = serial();
    let mut lines = Vec::new();
    let mut pass = true;
    for m in [10, 100] {
        let mut cfg = SimConfig::study(Gaussian, 200_000, m, 10, 7);
        cfg.workers = 1;
        let r = run_study(&cfg).unwrap();
        let speedup = r.speedup();
        pass &= speedup > m as f64;
        lines.push(format!(
            "M={m}: full {:.4} s, block {:.6} s, speedup {speedup:.1}",
            r.mean_full_seconds, r.mean_subset_seconds
        ));
    }
    verdict(7, pass, &format!("Gaussian N=200000; {}", lines.join("; ")));
    assert!(pass);
}

#[test]
fn criterion_8_simulate_is_byte_reproducible() {
    let _g = serial();
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, workers: &str| {
        let out = dir.path().join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_copula-split"))
            .args([
                "simulate",
                "--family",
                "all",
                "--rows",
                "20000,50000",
                "--subsets",
                "10,20,100",
                "--replicates",
                "3",
                "--seed",
                "8",
                "--workers",
                workers,
                "--no-timings",
                "--out",
                out.to_str().unwrap(),
            ])
            .output()
            .unwrap();
        assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
        fs::read(out.join("summary.csv")).unwrap()
    };
    let a = run("a", "1");
    let b = run("b", "1");
    let c = run("c", "8");
    let pass = a == b && a == c && a.len() > 100;
    verdict(
        8,
        pass,
        &format!(
            "summary.csv ({} bytes) identical across two runs: {}, across workers 1/8: {}",
            a.len(),
            a == b,
            a == c
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_9_degenerate_partitions() {
    let _g = serial();
    let mut problems = Vec::new();
    for m in study_models() {
        let f = m.family();
        let x = DataMatrix::from_pairs(&m.sample(5000, &mut RngStream::from_seed(9))).unwrap();
        let full = fit(f, &normalized_ranks(&x)).unwrap();
        for scheme in [Scheme::Contiguous, Scheme::Strided] {
            let opts = ParallelOptions {
                scheme,
                ..ParallelOptions::default()
            };
            let c = fit_parallel(f, &x, 1, &opts).unwrap();
            assert_eq!(partition(&x, 1, scheme).unwrap().blocks[0], x);
            if c.theta_combined.to_bits() != full.theta_hat.to_bits() || c.per_block[0].sigma2 != full.sigma2 {
                problems.push(format!("{f} {scheme}: {} vs {}", c.theta_combined, full.theta_hat));
            }
        }
    }

    let mut rng = RngStream::from_seed(99);
    let mut worst: f64 = 0.0;
    for k in [2usize, 3, 7, 10, 100] {
        let thetas: Vec<f64> = (0..k).map(|_| 4.0 + 2.0 * rng.open01()).collect();
        let results = thetas
            .iter()
            .map(|&t| FitResult {
                family: Frank,
                theta_hat: t,
                sigma2: 0.037,
                n: 1000,
                loglik: 0.0,
                iterations: 1,
                converged: true,
                diagnostic: None,
            })
            .collect();
        let combined = combine(results).unwrap().theta_combined;
        let mean = thetas.iter().sum::<f64>() / k as f64;
        let rel = (combined - mean).abs() / mean.abs();
        worst = worst.max(rel);
        if rel > 1e-15 {
            problems.push(format!("{k} equal-variance blocks: {combined} vs mean {mean}"));
        }
    }
    let pass = problems.is_empty();
    verdict(
        9,
        pass,
        &if pass {
            format!("M=1 reproduces the full fit bit for bit; equal variances give the mean (worst rel. error {worst:.1e})")
        } else {
            problems.join("; ")
        },
    );
    assert!(pass);
}
