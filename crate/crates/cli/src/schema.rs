//! Versioned CSV layouts. Every file starts with a `# schema: <name> v<k>`
//! line followed by a header row.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use copula_split::sim::CellTiming;
use copula_split::{CopulaFamily, SimReport};

use crate::error::CliError;

pub const SUMMARY: Schema = Schema {
    name: "summary",
    version: 1,
    columns: &[
        "family",
        "theta_true",
        "N",
        "M",
        "S",
        "theta_full_sim",
        "theta_combined_sim",
        "bias",
        "mse",
        "rel_l1",
        "rel_l2",
        "mean_subset_s",
        "mean_full_s",
        "seed",
    ],
};

pub const REPLICATES: Schema = Schema {
    name: "replicates",
    version: 1,
    columns: &[
        "family",
        "theta_true",
        "N",
        "M",
        "s",
        "seed",
        "theta_full",
        "theta_combined",
        "blocks_used",
        "full_s",
        "full_fit_s",
        "mean_subset_s",
        "mean_subset_fit_s",
    ],
};

pub const QUADRATURE: Schema = Schema {
    name: "quadrature",
    version: 1,
    columns: &[
        "family",
        "theta_true",
        "N",
        "M",
        "nodes",
        "rel_l1",
        "rel_l1_doubled",
        "rel_l2",
        "rel_l2_doubled",
        "l1_stable",
        "l2_stable",
    ],
};

pub const FIT: Schema = Schema {
    name: "fit",
    version: 1,
    columns: &[
        "family",
        "n",
        "theta_hat",
        "std_error",
        "sigma2",
        "loglik",
        "iterations",
        "converged",
    ],
};

pub const BLOCKS: Schema = Schema {
    name: "blocks",
    version: 1,
    columns: &["block", "rows", "theta_hat", "sigma2", "weight", "converged"],
};

pub const COMBINED: Schema = Schema {
    name: "combined",
    version: 1,
    columns: &["family", "N", "M", "scheme", "theta_combined", "blocks_used"],
};

pub const TIMING: Schema = Schema {
    name: "timing",
    version: 1,
    columns: &["family", "N", "M", "mean_subset_s", "mean_full_s"],
};

pub const METRICS: Schema = Schema {
    name: "metrics",
    version: 1,
    columns: &["family", "N", "M", "S", "bias", "mse", "rel_l1", "rel_l2"],
};

#[derive(Debug, Clone, Copy)]
pub struct Schema {
    pub name: &'static str,
    pub version: u32,
    pub columns: &'static [&'static str],
}

impl Schema {
    pub fn tag_line(&self) -> String {
        format!("# schema: {} v{}", self.name, self.version)
    }

    /// Create `path`, writing the tag line and the header.
    pub fn create(&self, path: &Path) -> Result<CsvOut, CliError> {
        let mut file = File::create(path).map_err(|e| CliError::io(path, e))?;
        writeln!(file, "{}", self.tag_line()).map_err(|e| CliError::io(path, e))?;
        let mut out = CsvOut {
            writer: csv::Writer::from_writer(file),
            path: path.to_path_buf(),
            width: self.columns.len(),
        };
        out.row(self.columns.iter().map(|c| c.to_string()).collect())?;
        Ok(out)
    }

    /// Parse `text` as a file of this schema into header-checked records.
    pub fn parse(&self, text: &str) -> Result<Vec<csv::StringRecord>, String> {
        let (first, rest) = text.split_once('\n').unwrap_or((text, ""));
        let first = first.trim_end();
        let prefix = format!("# schema: {} v", self.name);
        match first.strip_prefix(&prefix) {
            Some(v) if v == self.version.to_string() => {}
            Some(v) => {
                return Err(format!(
                    "unsupported {} schema version v{v}, expected v{}",
                    self.name, self.version
                ))
            }
            None => return Err(format!("missing '{}' line", self.tag_line())),
        }
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(rest.as_bytes());
        let header = reader.headers().map_err(|e| e.to_string())?.clone();
        if header.iter().ne(self.columns.iter().copied()) {
            return Err(format!(
                "header does not match {} v{}",
                self.name, self.version
            ));
        }
        reader
            .records()
            .map(|r| {
                let r = r.map_err(|e| e.to_string())?;
                if r.len() == self.columns.len() {
                    Ok(r)
                } else {
                    Err(format!(
                        "line {}: expected {} fields, found {}",
                        r.position().map_or(0, |p| p.line() + 1),
                        self.columns.len(),
                        r.len()
                    ))
                }
            })
            .collect()
    }
}

pub struct CsvOut {
    writer: csv::Writer<File>,
    path: std::path::PathBuf,
    width: usize,
}

impl CsvOut {
    pub fn row(&mut self, fields: Vec<String>) -> Result<(), CliError> {
        debug_assert_eq!(fields.len(), self.width);
        self.writer
            .write_record(&fields)
            .map_err(|e| CliError::io(&self.path, e))?;
        // rows are flushed one by one so an interrupted study keeps its cells
        self.writer.flush().map_err(|e| CliError::io(&self.path, e))
    }
}

/// Shortest representation that parses back to the same value; NaN as NA.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        "NA".into()
    } else {
        x.to_string()
    }
}

fn parse_num(s: &str) -> Result<f64, String> {
    if s == "NA" {
        Ok(f64::NAN)
    } else {
        s.parse().map_err(|_| format!("'{s}' is not a number"))
    }
}

fn parse_int<T: std::str::FromStr>(s: &str) -> Result<T, String> {
    s.parse().map_err(|_| format!("'{s}' is not an integer"))
}

/// One line of summary.csv.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub family: CopulaFamily,
    pub theta_true: f64,
    pub n: usize,
    pub m: usize,
    pub s: usize,
    pub theta_full_sim: f64,
    pub theta_combined_sim: f64,
    pub bias: f64,
    pub mse: f64,
    pub rel_l1: f64,
    pub rel_l2: f64,
    pub mean_subset_s: f64,
    pub mean_full_s: f64,
    pub seed: u64,
}

impl SummaryRow {
    pub fn from_report(r: &SimReport, timings: bool) -> Self {
        let t = |x: f64| if timings { x } else { f64::NAN };
        Self {
            family: r.config.family,
            theta_true: r.config.theta_true,
            n: r.config.n,
            m: r.config.m,
            s: r.config.s,
            theta_full_sim: r.theta_full_sim,
            theta_combined_sim: r.theta_combined_sim,
            bias: r.bias,
            mse: r.mse,
            rel_l1: r.rel_l1,
            rel_l2: r.rel_l2,
            mean_subset_s: t(r.mean_subset_seconds),
            mean_full_s: t(r.mean_full_seconds),
            seed: r.config.base_seed,
        }
    }

    pub fn to_fields(&self) -> Vec<String> {
        vec![
            self.family.to_string(),
            num(self.theta_true),
            self.n.to_string(),
            self.m.to_string(),
            self.s.to_string(),
            num(self.theta_full_sim),
            num(self.theta_combined_sim),
            num(self.bias),
            num(self.mse),
            num(self.rel_l1),
            num(self.rel_l2),
            num(self.mean_subset_s),
            num(self.mean_full_s),
            self.seed.to_string(),
        ]
    }

    pub fn from_record(r: &csv::StringRecord) -> Result<Self, String> {
        Ok(Self {
            family: r[0].parse().map_err(|e: copula_split::Error| e.to_string())?,
            theta_true: parse_num(&r[1])?,
            n: parse_int(&r[2])?,
            m: parse_int(&r[3])?,
            s: parse_int(&r[4])?,
            theta_full_sim: parse_num(&r[5])?,
            theta_combined_sim: parse_num(&r[6])?,
            bias: parse_num(&r[7])?,
            mse: parse_num(&r[8])?,
            rel_l1: parse_num(&r[9])?,
            rel_l2: parse_num(&r[10])?,
            mean_subset_s: parse_num(&r[11])?,
            mean_full_s: parse_num(&r[12])?,
            seed: parse_int(&r[13])?,
        })
    }
}

impl CellTiming for SummaryRow {
    fn family(&self) -> CopulaFamily {
        self.family
    }
    fn n(&self) -> usize {
        self.n
    }
    fn m(&self) -> usize {
        self.m
    }
    fn replicates(&self) -> usize {
        self.s
    }
    fn mean_subset_seconds(&self) -> f64 {
        self.mean_subset_s
    }
    fn mean_full_seconds(&self) -> f64 {
        self.mean_full_s
    }
}
