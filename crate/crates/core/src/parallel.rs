//! Row partitioning, communication-free block fits, and inverse-variance
//! combination of the block estimates.
//!
//! Each block is ranked on its own rows: a block task reads nothing but its
//! block, so the block fits could run on separate machines. This makes the
//! block estimates differ slightly from what full-sample ranks would give.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;

use crate::copula::CopulaFamily;
use crate::error::{Error, Result};
use crate::mpl::{finish_prepared, maximize_keep, FitOptions, FitResult};
use crate::pseudo_obs::{normalized_ranks, DataMatrix};

/// Default minimum number of rows in a block.
pub const MIN_BLOCK_ROWS: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    /// Consecutive row ranges; the remainder goes to the last block.
    #[default]
    Contiguous,
    /// Row i goes to block i mod M.
    Strided,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Contiguous => "contiguous",
            Scheme::Strided => "strided",
        })
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "contiguous" => Ok(Scheme::Contiguous),
            "strided" => Ok(Scheme::Strided),
            other => Err(Error::Partition(format!("unknown partition scheme '{other}'"))),
        }
    }
}

/// Disjoint row-blocks covering a data matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    pub blocks: Vec<DataMatrix>,
    /// Original row indices of each block, in block order.
    pub rows: Vec<Vec<usize>>,
    pub scheme: Scheme,
}

impl Partition {
    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }
}

/// Split `x` into `m` blocks with the default row floor.
pub fn partition(x: &DataMatrix, m: usize, scheme: Scheme) -> Result<Partition> {
    partition_with_floor(x, m, scheme, MIN_BLOCK_ROWS)
}

pub fn partition_with_floor(x: &DataMatrix, m: usize, scheme: Scheme, min_rows: usize) -> Result<Partition> {
    let n = x.nrows();
    if m == 0 {
        return Err(Error::Partition("number of blocks must be at least 1".into()));
    }
    let base = n / m;
    if base < min_rows.max(2) {
        return Err(Error::Partition(format!(
            "{n} rows into {m} blocks gives {base} rows per block, below the floor of {}",
            min_rows.max(2)
        )));
    }
    let rows: Vec<Vec<usize>> = match scheme {
        Scheme::Contiguous => (0..m)
            .map(|b| {
                let start = b * base;
                let end = if b + 1 == m { n } else { start + base };
                (start..end).collect()
            })
            .collect(),
        Scheme::Strided => (0..m).map(|b| (b..n).step_by(m).collect()).collect(),
    };
    let blocks = rows
        .iter()
        .map(|idx| x.select_rows(idx))
        .collect::<Result<Vec<_>>>()?;
    Ok(Partition {
        blocks,
        rows,
        scheme,
    })
}

/// Inverse-variance weighted combination of block estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct CombinedResult {
    pub theta_combined: f64,
    pub per_block: Vec<FitResult>,
    /// 1/σₘ² for blocks that entered the average, `None` for excluded blocks.
    pub weights: Vec<Option<f64>>,
    /// Ranks + fit + variance, per block.
    pub wall_clock_per_block: Vec<f64>,
    /// Ranks + maximization only, per block.
    pub fit_seconds_per_block: Vec<f64>,
    pub blocks_used: usize,
}

impl CombinedResult {
    pub fn excluded_blocks(&self) -> Vec<usize> {
        self.weights
            .iter()
            .enumerate()
            .filter(|(_, w)| w.is_none())
            .map(|(i, _)| i)
            .collect()
    }

    pub fn mean_block_seconds(&self) -> f64 {
        mean(&self.wall_clock_per_block)
    }
}

fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        f64::NAN
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}

/// θ̂ = Σ wₘ θ̂ₘ / Σ wₘ with wₘ = 1/σₘ², over usable block results.
///
/// Blocks that did not converge (or have no positive variance) are left out
/// and marked with a `None` weight.
pub fn combine(results: Vec<FitResult>) -> Result<CombinedResult> {
    if let Some(first) = results.first() {
        if let Some(other) = results.iter().find(|r| r.family != first.family) {
            return Err(Error::Fit(format!(
                "cannot combine {} and {} estimates",
                first.family, other.family
            )));
        }
    }
    let weights: Vec<Option<f64>> = results
        .iter()
        .map(|r| r.is_usable().then(|| 1.0 / r.sigma2))
        .collect();
    let used: Vec<&FitResult> = results.iter().filter(|r| r.is_usable()).collect();
    if used.is_empty() {
        return Err(Error::AllBlocksFailed(results.len()));
    }
    // Weights relative to the largest one: σ²_min/σ²ₘ. Equal variances give
    // weights of exactly 1 and the plain mean.
    let min_var = used.iter().map(|r| r.sigma2).fold(f64::INFINITY, f64::min);
    let (mut num, mut den) = (0.0, 0.0);
    for r in &used {
        let w = min_var / r.sigma2;
        num += w * r.theta_hat;
        den += w;
    }
    let lo = used.iter().map(|r| r.theta_hat).fold(f64::INFINITY, f64::min);
    let hi = used.iter().map(|r| r.theta_hat).fold(f64::NEG_INFINITY, f64::max);
    let theta_combined = (num / den).clamp(lo, hi);
    let blocks_used = used.len();
    let n_blocks = results.len();
    Ok(CombinedResult {
        theta_combined,
        per_block: results,
        weights,
        wall_clock_per_block: vec![f64::NAN; n_blocks],
        fit_seconds_per_block: vec![f64::NAN; n_blocks],
        blocks_used,
    })
}

#[derive(Debug, Clone)]
pub struct ParallelOptions {
    pub scheme: Scheme,
    /// Worker threads; 0 means the available hardware parallelism.
    pub workers: usize,
    pub min_block_rows: usize,
    pub fit: FitOptions,
}

impl Default for ParallelOptions {
    fn default() -> Self {
        Self {
            scheme: Scheme::Contiguous,
            workers: 0,
            min_block_rows: MIN_BLOCK_ROWS,
            fit: FitOptions::default(),
        }
    }
}

pub fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// Timing of one fit: ranks + maximization, and ranks + maximization + variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitTiming {
    pub fit_seconds: f64,
    pub total_seconds: f64,
}

/// Ranks, fit and variance for one block, timed with a monotonic clock.
///
/// Reads only `block`; failures become a non-converged result.
pub fn fit_block(family: CopulaFamily, block: &DataMatrix, opts: &FitOptions) -> (FitResult, FitTiming) {
    let start = Instant::now();
    let sample = normalized_ranks(block);
    let (result, fit_seconds) = match maximize_keep(family, &sample, opts) {
        Ok((m, prepared)) => {
            let fit_seconds = start.elapsed().as_secs_f64();
            (finish_prepared(family, &sample, m, opts, Some(&prepared)), fit_seconds)
        }
        Err(e) => (FitResult::failed(family, block.nrows(), e.to_string()), f64::NAN),
    };
    let timing = FitTiming {
        fit_seconds,
        total_seconds: start.elapsed().as_secs_f64(),
    };
    (result, timing)
}

/// Partition `x`, fit every block independently on a fixed-size worker
/// pool, and combine. The output does not depend on the worker count or on
/// the order in which blocks finish.
pub fn fit_parallel(family: CopulaFamily, x: &DataMatrix, m: usize, opts: &ParallelOptions) -> Result<CombinedResult> {
    let part = partition_with_floor(x, m, opts.scheme, opts.min_block_rows)?;
    let workers = if opts.workers == 0 {
        default_workers()
    } else {
        opts.workers
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Fit(format!("cannot start worker pool: {e}")))?;
    let outcomes: Vec<(FitResult, FitTiming)> = pool.install(|| {
        part.blocks
            .par_iter()
            .map(|block| fit_block(family, block, &opts.fit))
            .collect()
    });
    let mut per_block = Vec::with_capacity(outcomes.len());
    let mut wall = Vec::with_capacity(outcomes.len());
    let mut fit_secs = Vec::with_capacity(outcomes.len());
    for (r, t) in outcomes {
        per_block.push(r);
        wall.push(t.total_seconds);
        fit_secs.push(t.fit_seconds);
    }
    let mut combined = combine(per_block)?;
    combined.wall_clock_per_block = wall;
    combined.fit_seconds_per_block = fit_secs;
    Ok(combined)
}
