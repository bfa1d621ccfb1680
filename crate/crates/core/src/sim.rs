//! Simulation study: repeated generate → full fit → block fit → combine,
//! with bias, paired MSE, relative L1/L2 density distances and timings.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::copula::{CopulaFamily, CopulaModel};
use crate::error::{Error, Result};
use crate::mpl::FitOptions;
use crate::parallel::{fit_block, fit_parallel, ParallelOptions, Scheme};
use crate::pseudo_obs::DataMatrix;
use crate::quadrature::GaussLegendre;
use crate::rng::{derive_seed, RngStream};

pub const DEFAULT_QUAD_NODES: usize = 200;
pub const MIN_QUAD_NODES: usize = 64;
/// A relative change above this under node doubling marks a quadrature
/// value as unstable.
pub const QUAD_STABILITY: f64 = 0.10;

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub family: CopulaFamily,
    pub theta_true: f64,
    /// Full sample size N.
    pub n: usize,
    /// Number of blocks M.
    pub m: usize,
    /// Number of replicates S.
    pub s: usize,
    pub quad_nodes: usize,
    pub base_seed: u64,
    /// Worker threads for the block fits; 0 means all available cores.
    pub workers: usize,
    pub scheme: Scheme,
}

impl SimConfig {
    /// The reference design cell for `family` at sample size `n`, `m` blocks.
    pub fn study(family: CopulaFamily, n: usize, m: usize, s: usize, base_seed: u64) -> Self {
        Self {
            family,
            theta_true: family.study_theta(),
            n,
            m,
            s,
            quad_nodes: DEFAULT_QUAD_NODES,
            base_seed,
            workers: 0,
            scheme: Scheme::Contiguous,
        }
    }

    pub fn validate(&self) -> Result<()> {
        CopulaModel::new(self.family, self.theta_true)?;
        if self.m == 0 || self.n / self.m < 30 {
            return Err(Error::Partition(format!(
                "N/M must be at least 30 (N = {}, M = {})",
                self.n, self.m
            )));
        }
        if self.s == 0 {
            return Err(Error::Data("at least one replicate is required".into()));
        }
        if self.quad_nodes < MIN_QUAD_NODES {
            return Err(Error::Data(format!(
                "quadrature needs at least {MIN_QUAD_NODES} nodes per axis, got {}",
                self.quad_nodes
            )));
        }
        Ok(())
    }

    /// Seed of replicate `s`, derived from (base seed, family, N, M, s).
    pub fn replicate_seed(&self, s: usize) -> u64 {
        derive_seed(
            self.base_seed,
            &[self.family.code(), self.n as u64, self.m as u64, s as u64],
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateRow {
    pub s: usize,
    pub seed: u64,
    pub theta_full: f64,
    pub theta_combined: f64,
    pub blocks_used: usize,
    /// Full-data ranks + fit + variance.
    pub full_seconds: f64,
    /// Full-data ranks + fit, without the variance.
    pub full_fit_seconds: f64,
    /// Mean over blocks of ranks + fit + variance.
    pub mean_subset_seconds: f64,
    pub mean_subset_fit_seconds: f64,
}

/// Node-doubling diagnostic for the L1/L2 distances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadCheck {
    pub rel_l1_doubled: f64,
    pub rel_l2_doubled: f64,
    pub l1_stable: bool,
    pub l2_stable: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimReport {
    pub config: SimConfig,
    pub theta_combined_sim: f64,
    pub theta_full_sim: f64,
    pub bias: f64,
    pub mse: f64,
    pub rel_l1: f64,
    pub rel_l2: f64,
    pub quad_check: QuadCheck,
    pub mean_subset_seconds: f64,
    pub mean_full_seconds: f64,
    pub mean_subset_fit_seconds: f64,
    pub mean_full_fit_seconds: f64,
    pub rows: Vec<ReplicateRow>,
}

impl SimReport {
    /// Full-data time over mean per-block time.
    pub fn speedup(&self) -> f64 {
        self.mean_full_seconds / self.mean_subset_seconds
    }

    /// Mean of paired differences θ̂_Combined,s − θ̂_Full,s.
    pub fn mean_paired_difference(&self) -> f64 {
        mean(self.rows.iter().map(|r| r.theta_combined - r.theta_full))
    }
}

fn mean(it: impl Iterator<Item = f64>) -> f64 {
    let (sum, count) = it.fold((0.0, 0usize), |(s, c), x| (s + x, c + 1));
    sum / count as f64
}

/// Run all replicates of one design cell.
///
/// Every replicate draws its own sample from a seed derived from the cell
/// coordinates, then fits the full sample on the calling thread and the
/// M blocks on the worker pool. Both fits use the same sample.
pub fn run_study(cfg: &SimConfig) -> Result<SimReport> {
    cfg.validate()?;
    let model = CopulaModel::new(cfg.family, cfg.theta_true)?;
    let fit_opts = FitOptions::default();
    let par_opts = ParallelOptions {
        scheme: cfg.scheme,
        workers: cfg.workers,
        ..ParallelOptions::default()
    };

    let mut rows = Vec::with_capacity(cfg.s);
    let mut block_seconds = Vec::new();
    let mut block_fit_seconds = Vec::new();
    for s in 0..cfg.s {
        let wrap = |e: Error| Error::Replicate {
            replicate: s,
            source: Box::new(e),
        };
        let seed = cfg.replicate_seed(s);
        let mut stream = RngStream::from_seed(seed);
        let data = DataMatrix::from_pairs(&model.sample(cfg.n, &mut stream)).map_err(wrap)?;

        let (full, full_timing) = fit_block(cfg.family, &data, &fit_opts);
        if !full.is_usable() {
            return Err(wrap(Error::Fit(format!(
                "full-data fit failed: {}",
                full.diagnostic.as_deref().unwrap_or("no diagnostic")
            ))));
        }
        let combined = fit_parallel(cfg.family, &data, cfg.m, &par_opts).map_err(wrap)?;

        block_seconds.extend_from_slice(&combined.wall_clock_per_block);
        block_fit_seconds.extend_from_slice(&combined.fit_seconds_per_block);
        rows.push(ReplicateRow {
            s,
            seed,
            theta_full: full.theta_hat,
            theta_combined: combined.theta_combined,
            blocks_used: combined.blocks_used,
            full_seconds: full_timing.total_seconds,
            full_fit_seconds: full_timing.fit_seconds,
            mean_subset_seconds: combined.mean_block_seconds(),
            mean_subset_fit_seconds: mean(combined.fit_seconds_per_block.iter().copied()),
        });
    }

    let theta_combined_sim = mean(rows.iter().map(|r| r.theta_combined));
    let theta_full_sim = mean(rows.iter().map(|r| r.theta_full));
    let (rel_l1, rel_l2, quad_check) =
        density_distances(cfg.family, theta_full_sim, theta_combined_sim, cfg.quad_nodes)?;
    Ok(SimReport {
        config: cfg.clone(),
        theta_combined_sim,
        theta_full_sim,
        bias: est_bias(&rows)?,
        mse: est_mse(&rows)?,
        rel_l1,
        rel_l2,
        quad_check,
        mean_subset_seconds: mean(block_seconds.iter().copied()),
        mean_full_seconds: mean(rows.iter().map(|r| r.full_seconds)),
        mean_subset_fit_seconds: mean(block_fit_seconds.iter().copied()),
        mean_full_fit_seconds: mean(rows.iter().map(|r| r.full_fit_seconds)),
        rows,
    })
}

/// Mean of the combined estimates minus mean of the full-data estimates.
pub fn est_bias(rows: &[ReplicateRow]) -> Result<f64> {
    if rows.is_empty() {
        return Err(Error::Data("bias needs at least one replicate".into()));
    }
    let combined = mean(rows.iter().map(|r| r.theta_combined));
    let full = mean(rows.iter().map(|r| r.theta_full));
    Ok(combined - full)
}

/// Mean squared paired difference between combined and full estimates.
pub fn est_mse(rows: &[ReplicateRow]) -> Result<f64> {
    if rows.is_empty() {
        return Err(Error::Data("MSE needs at least one replicate".into()));
    }
    Ok(mean(
        rows.iter()
            .map(|r| (r.theta_combined - r.theta_full).powi(2)),
    ))
}

struct DensityIntegrals {
    abs_diff: f64,
    sq_diff: f64,
    mass_a: f64,
    sq_a: f64,
}

fn density_integrals(family: CopulaFamily, theta_a: f64, theta_b: f64, nodes: usize) -> Result<DensityIntegrals> {
    let a = CopulaModel::new(family, theta_a)?;
    let b = CopulaModel::new(family, theta_b)?;
    let rule = GaussLegendre::unit(nodes);
    let mut acc = DensityIntegrals {
        abs_diff: 0.0,
        sq_diff: 0.0,
        mass_a: 0.0,
        sq_a: 0.0,
    };
    for (&x, &wx) in rule.nodes.iter().zip(&rule.weights) {
        let mut row = [0.0; 4];
        for (&y, &wy) in rule.nodes.iter().zip(&rule.weights) {
            let ca = a.log_pdf_unchecked(x, y).exp();
            let cb = if theta_a == theta_b {
                ca
            } else {
                b.log_pdf_unchecked(x, y).exp()
            };
            let d = ca - cb;
            row[0] += wy * d.abs();
            row[1] += wy * d * d;
            row[2] += wy * ca;
            row[3] += wy * ca * ca;
        }
        acc.abs_diff += wx * row[0];
        acc.sq_diff += wx * row[1];
        acc.mass_a += wx * row[2];
        acc.sq_a += wx * row[3];
    }
    Ok(acc)
}

/// ∬|c(θa) − c(θb)| / ∬ c(θa) on a `nodes`² interior Gauss–Legendre grid.
pub fn rel_l1(family: CopulaFamily, theta_a: f64, theta_b: f64, nodes: usize) -> Result<f64> {
    let i = density_integrals(family, theta_a, theta_b, nodes)?;
    Ok(i.abs_diff / i.mass_a)
}

/// (∬(c(θa) − c(θb))²)^½ / (∬ c(θa)²)^½ on the same grid as [`rel_l1`].
pub fn rel_l2(family: CopulaFamily, theta_a: f64, theta_b: f64, nodes: usize) -> Result<f64> {
    let i = density_integrals(family, theta_a, theta_b, nodes)?;
    Ok((i.sq_diff / i.sq_a).sqrt())
}

fn stable(coarse: f64, fine: f64) -> bool {
    coarse == fine || (fine - coarse).abs() <= QUAD_STABILITY * coarse.abs()
}

/// Relative L1 and L2 distances with the node-doubling diagnostic.
pub fn density_distances(family: CopulaFamily, theta_a: f64, theta_b: f64, nodes: usize) -> Result<(f64, f64, QuadCheck)> {
    let coarse = density_integrals(family, theta_a, theta_b, nodes)?;
    let fine = density_integrals(family, theta_a, theta_b, 2 * nodes)?;
    let l1 = coarse.abs_diff / coarse.mass_a;
    let l2 = (coarse.sq_diff / coarse.sq_a).sqrt();
    let l1d = fine.abs_diff / fine.mass_a;
    let l2d = (fine.sq_diff / fine.sq_a).sqrt();
    Ok((
        l1,
        l2,
        QuadCheck {
            rel_l1_doubled: l1d,
            rel_l2_doubled: l2d,
            l1_stable: stable(l1, l1d),
            l2_stable: stable(l2, l2d),
        },
    ))
}

/// One row of the timing table: a (family, N) pair with the mean per-block
/// time for each M and the mean full-data time.
#[derive(Debug, Clone, PartialEq)]
pub struct TimingRow {
    pub family: CopulaFamily,
    pub n: usize,
    pub subset_seconds: BTreeMap<usize, f64>,
    pub full_seconds: f64,
}

/// Anything that carries the per-cell timing summary.
pub trait CellTiming {
    fn family(&self) -> CopulaFamily;
    fn n(&self) -> usize;
    fn m(&self) -> usize;
    fn replicates(&self) -> usize;
    fn mean_subset_seconds(&self) -> f64;
    fn mean_full_seconds(&self) -> f64;
}

impl CellTiming for SimReport {
    fn family(&self) -> CopulaFamily {
        self.config.family
    }
    fn n(&self) -> usize {
        self.config.n
    }
    fn m(&self) -> usize {
        self.config.m
    }
    fn replicates(&self) -> usize {
        self.config.s
    }
    fn mean_subset_seconds(&self) -> f64 {
        self.mean_subset_seconds
    }
    fn mean_full_seconds(&self) -> f64 {
        self.mean_full_seconds
    }
}

/// Merge cells into (family, N) rows. Full-data times of all cells with the
/// same (family, N) are averaged, weighted by replicate count.
pub fn timing_table<T: CellTiming>(cells: &[T]) -> Vec<TimingRow> {
    let mut acc: BTreeMap<(CopulaFamily, usize), (BTreeMap<usize, f64>, f64, usize)> = BTreeMap::new();
    for c in cells {
        let entry = acc
            .entry((c.family(), c.n()))
            .or_insert_with(|| (BTreeMap::new(), 0.0, 0));
        entry.0.insert(c.m(), c.mean_subset_seconds());
        if c.mean_full_seconds().is_finite() {
            entry.1 += c.mean_full_seconds() * c.replicates() as f64;
            entry.2 += c.replicates();
        }
    }
    acc.into_iter()
        .map(|((family, n), (subset_seconds, full_sum, reps))| TimingRow {
            family,
            n,
            subset_seconds,
            full_seconds: if reps == 0 { f64::NAN } else { full_sum / reps as f64 },
        })
        .collect()
}

/// Plain-text rendering of the timing table, one column per block count.
pub fn render_timing_table(rows: &[TimingRow]) -> String {
    let ms: Vec<usize> = {
        let mut all: Vec<usize> = rows.iter().flat_map(|r| r.subset_seconds.keys().copied()).collect();
        all.sort_unstable();
        all.dedup();
        all
    };
    let mut out = String::new();
    let _ = write!(out, "{:<10} {:>10}", "copula", "N");
    for m in &ms {
        let _ = write!(out, " {:>12}", format!("M={m} (s)"));
    }
    let _ = writeln!(out, " {:>12}", "full (s)");
    let mut last_family = None;
    for r in rows {
        let fam = if last_family == Some(r.family) {
            String::new()
        } else {
            r.family.to_string()
        };
        last_family = Some(r.family);
        let _ = write!(out, "{:<10} {:>10}", fam, r.n);
        for m in &ms {
            match r.subset_seconds.get(m) {
                Some(t) if t.is_finite() => {
                    let _ = write!(out, " {:>12.4}", t);
                }
                _ => {
                    let _ = write!(out, " {:>12}", "-");
                }
            }
        }
        if r.full_seconds.is_finite() {
            let _ = writeln!(out, " {:>12.4}", r.full_seconds);
        } else {
            let _ = writeln!(out, " {:>12}", "-");
        }
    }
    out
}
