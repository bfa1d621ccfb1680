//! Raw bivariate data and its normalized ranks (pseudo-observations).

use crate::copula::UnitPair;
use crate::error::{Error, Result};

/// An N×2 matrix of finite observations, stored by column.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    cols: [Vec<f64>; 2],
}

impl DataMatrix {
    pub fn new(first: Vec<f64>, second: Vec<f64>) -> Result<Self> {
        if first.len() != second.len() {
            return Err(Error::Data(format!(
                "columns have different lengths ({} and {})",
                first.len(),
                second.len()
            )));
        }
        if first.len() < 2 {
            return Err(Error::Data(format!(
                "need at least 2 rows, got {}",
                first.len()
            )));
        }
        for (j, col) in [&first, &second].into_iter().enumerate() {
            if let Some(i) = col.iter().position(|x| !x.is_finite()) {
                return Err(Error::Data(format!(
                    "non-finite value {} at row {}, column {}",
                    col[i],
                    i + 1,
                    j + 1
                )));
            }
        }
        Ok(Self {
            cols: [first, second],
        })
    }

    /// Build from any number of columns; exactly two are accepted.
    pub fn from_columns(mut cols: Vec<Vec<f64>>) -> Result<Self> {
        if cols.len() != 2 {
            return Err(Error::Data(format!(
                "expected 2 numeric columns, found {}",
                cols.len()
            )));
        }
        let second = cols.pop().unwrap_or_default();
        let first = cols.pop().unwrap_or_default();
        Self::new(first, second)
    }

    pub fn from_rows(rows: &[[f64; 2]]) -> Result<Self> {
        Self::new(
            rows.iter().map(|r| r[0]).collect(),
            rows.iter().map(|r| r[1]).collect(),
        )
    }

    pub fn from_pairs(pairs: &[UnitPair]) -> Result<Self> {
        Self::new(
            pairs.iter().map(UnitPair::u1).collect(),
            pairs.iter().map(UnitPair::u2).collect(),
        )
    }

    pub fn nrows(&self) -> usize {
        self.cols[0].len()
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.cols[j]
    }

    pub fn row(&self, i: usize) -> [f64; 2] {
        [self.cols[0][i], self.cols[1][i]]
    }

    /// Rows at the given indices, in that order.
    pub fn select_rows(&self, idx: &[usize]) -> Result<Self> {
        Self::new(
            idx.iter().map(|&i| self.cols[0][i]).collect(),
            idx.iter().map(|&i| self.cols[1][i]).collect(),
        )
    }

    /// Rows `start..end`.
    pub fn slice_rows(&self, start: usize, end: usize) -> Result<Self> {
        Self::new(
            self.cols[0][start..end].to_vec(),
            self.cols[1][start..end].to_vec(),
        )
    }
}

/// Normalized ranks of a [`DataMatrix`]; every value lies in (0, 1).
#[derive(Debug, Clone, PartialEq)]
pub struct PseudoSample {
    cols: [Vec<f64>; 2],
}

impl PseudoSample {
    /// Wrap values that are already pseudo-observations (e.g. copula draws).
    pub fn from_unit_columns(first: Vec<f64>, second: Vec<f64>) -> Result<Self> {
        if first.len() != second.len() || first.is_empty() {
            return Err(Error::Data("pseudo-sample columns must be non-empty and of equal length".into()));
        }
        let inside = |x: &f64| *x > 0.0 && *x < 1.0;
        if !first.iter().all(inside) || !second.iter().all(inside) {
            return Err(Error::Data("pseudo-observations must lie in (0, 1)".into()));
        }
        Ok(Self {
            cols: [first, second],
        })
    }

    pub fn len(&self) -> usize {
        self.cols[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.cols[0].is_empty()
    }

    pub fn u1(&self) -> &[f64] {
        &self.cols[0]
    }

    pub fn u2(&self) -> &[f64] {
        &self.cols[1]
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.cols[j]
    }

    pub fn pair(&self, i: usize) -> UnitPair {
        // values are validated to be inside (0, 1) on construction
        UnitPair::new(self.cols[0][i], self.cols[1][i]).expect("pseudo-observation inside unit square")
    }

    /// Row-concatenation, keeping the values as they are.
    pub fn concat(&self, other: &PseudoSample) -> PseudoSample {
        let mut cols = self.cols.clone();
        cols[0].extend_from_slice(&other.cols[0]);
        cols[1].extend_from_slice(&other.cols[1]);
        PseudoSample { cols }
    }

    pub fn head(&self, n: usize) -> PseudoSample {
        let n = n.min(self.len());
        PseudoSample {
            cols: [self.cols[0][..n].to_vec(), self.cols[1][..n].to_vec()],
        }
    }
}

/// Average ranks (1-based) of `values`; tied values share the mean of the
/// positions they occupy.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let order = sorted_order(values);
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && values[order[j]] == values[order[i]] {
            j += 1;
        }
        // positions i+1 ..= j share rank (i + 1 + j) / 2
        let rank = (i + 1 + j) as f64 / 2.0;
        for &k in &order[i..j] {
            ranks[k] = rank;
        }
        i = j;
    }
    ranks
}

/// Indices of `values` in ascending order; ties come out in arbitrary order.
pub(crate) fn sorted_order(values: &[f64]) -> Vec<usize> {
    let mut keyed: Vec<(u64, usize)> = values.iter().map(|&v| order_key(v)).zip(0..).collect();
    keyed.sort_unstable();
    keyed.into_iter().map(|(_, i)| i).collect()
}

/// u_ij = r_ij / (N + 1), with average ranks for ties.
pub fn normalized_ranks(x: &DataMatrix) -> PseudoSample {
    let scale = (x.nrows() + 1) as f64;
    let col = |j: usize| -> Vec<f64> {
        average_ranks(x.column(j))
            .into_iter()
            .map(|r| r / scale)
            .collect()
    };
    PseudoSample {
        cols: [col(0), col(1)],
    }
}

/// Sample Kendall's tau-b in O(n log n) (Knight's algorithm).
pub fn kendall_tau_sample(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len();
    assert_eq!(n, y.len(), "kendall_tau_sample: length mismatch");
    if n < 2 {
        return 0.0;
    }
    // integer keys sort much faster than a two-level float comparator
    let mut keys: Vec<(u64, u64)> = x.iter().zip(y).map(|(&a, &b)| (order_key(a), order_key(b))).collect();
    keys.sort_unstable();
    let pts: Vec<(f64, f64)> = keys.iter().map(|&(a, b)| (from_order_key(a), from_order_key(b))).collect();

    let pairs = |counts: u64| counts * (counts.saturating_sub(1)) / 2;

    // ties in x, and joint ties in (x, y)
    let mut tied_x = 0u64;
    let mut tied_xy = 0u64;
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && pts[j].0 == pts[i].0 {
            j += 1;
        }
        tied_x += pairs((j - i) as u64);
        let mut k = i;
        while k < j {
            let mut l = k + 1;
            while l < j && pts[l].1 == pts[k].1 {
                l += 1;
            }
            tied_xy += pairs((l - k) as u64);
            k = l;
        }
        i = j;
    }

    // discordant pairs are the strict inversions of y in this order
    let mut ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
    let swaps = sort_counting_inversions(&mut ys);

    let mut tied_y = 0u64;
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && ys[j] == ys[i] {
            j += 1;
        }
        tied_y += pairs((j - i) as u64);
        i = j;
    }

    let total = pairs(n as u64);
    let concordant_minus_discordant =
        total as f64 - tied_x as f64 - tied_y as f64 + tied_xy as f64 - 2.0 * swaps as f64;
    let denom = ((total - tied_x) as f64 * (total - tied_y) as f64).sqrt();
    if denom == 0.0 {
        0.0
    } else {
        concordant_minus_discordant / denom
    }
}

/// Order-preserving map from f64 to u64 (−0.0 sorts just below +0.0).
#[inline]
fn order_key(x: f64) -> u64 {
    let bits = x.to_bits();
    if bits >> 63 == 1 {
        !bits
    } else {
        bits | 1 << 63
    }
}

#[inline]
fn from_order_key(k: u64) -> f64 {
    f64::from_bits(if k >> 63 == 1 { k & !(1 << 63) } else { !k })
}

const RUN: usize = 32;

/// Sort `v` ascending and return the number of pairs i < j with v[i] > v[j].
/// Insertion sort on short runs, then bottom-up merging between two buffers.
fn sort_counting_inversions(v: &mut Vec<f64>) -> u64 {
    let n = v.len();
    let mut inversions = 0u64;
    for run in v.chunks_mut(RUN) {
        for i in 1..run.len() {
            let key = run[i];
            let mut j = i;
            while j > 0 && run[j - 1] > key {
                run[j] = run[j - 1];
                j -= 1;
            }
            run[j] = key;
            inversions += (i - j) as u64;
        }
    }

    let mut src = std::mem::take(v);
    let mut dst = vec![0.0; n];
    let mut width = RUN;
    while width < n {
        let mut lo = 0;
        while lo < n {
            let mid = (lo + width).min(n);
            let hi = (lo + 2 * width).min(n);
            let (mut i, mut j, mut k) = (lo, mid, lo);
            while i < mid && j < hi {
                if src[j] < src[i] {
                    dst[k] = src[j];
                    inversions += (mid - i) as u64;
                    j += 1;
                } else {
                    dst[k] = src[i];
                    i += 1;
                }
                k += 1;
            }
            dst[k..k + (mid - i)].copy_from_slice(&src[i..mid]);
            k += mid - i;
            dst[k..k + (hi - j)].copy_from_slice(&src[j..hi]);
            lo = hi;
        }
        std::mem::swap(&mut src, &mut dst);
        width *= 2;
    }
    *v = src;
    inversions
}
