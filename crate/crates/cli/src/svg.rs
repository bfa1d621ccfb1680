//! Minimal static SVG line charts: one figure per family, four panels
//! (bias, MSE, relative L1, relative L2) against the block count M on a log
//! axis, one line per sample size N.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use copula_split::CopulaFamily;

use crate::schema::SummaryRow;

pub const METRICS: [(&str, fn(&SummaryRow) -> f64); 4] = [
    ("bias", |r| r.bias),
    ("MSE", |r| r.mse),
    ("relative L1", |r| r.rel_l1),
    ("relative L2", |r| r.rel_l2),
];

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];
const PANEL_W: f64 = 460.0;
const PANEL_H: f64 = 340.0;
const LEFT: f64 = 78.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 34.0;
const BOTTOM: f64 = 46.0;
const HEADER: f64 = 36.0;

/// y-range of each metric over all rows, so panels of one metric share
/// their axis across figures.
pub fn metric_ranges(rows: &[SummaryRow]) -> [(f64, f64); 4] {
    METRICS.map(|(_, get)| {
        let (mut lo, mut hi) = (0.0f64, 0.0f64);
        for v in rows.iter().map(get).filter(|v| v.is_finite()) {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if hi - lo <= 0.0 {
            (lo - 1.0, hi + 1.0)
        } else {
            let pad = 0.05 * (hi - lo);
            (if lo < 0.0 { lo - pad } else { lo }, hi + pad)
        }
    })
}

pub fn family_figure(family: CopulaFamily, rows: &[SummaryRow], ranges: &[(f64, f64); 4]) -> String {
    let rows: Vec<&SummaryRow> = rows.iter().filter(|r| r.family == family).collect();
    let mut ms: Vec<usize> = rows.iter().map(|r| r.m).collect();
    ms.sort_unstable();
    ms.dedup();
    let mut by_n: BTreeMap<usize, Vec<&SummaryRow>> = BTreeMap::new();
    for r in &rows {
        by_n.entry(r.n).or_default().push(r);
    }
    for series in by_n.values_mut() {
        series.sort_by_key(|r| r.m);
    }

    let width = 2.0 * PANEL_W;
    let height = HEADER + 2.0 * PANEL_H;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let theta = rows.first().map_or(String::new(), |r| format!(", theta = {}", r.theta_true));
    let _ = writeln!(
        out,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="16">{family} copula{theta}</text>"#,
        width / 2.0
    );

    for (k, (name, get)) in METRICS.iter().enumerate() {
        let ox = (k % 2) as f64 * PANEL_W;
        let oy = HEADER + (k / 2) as f64 * PANEL_H;
        let plot = Plot::new(ox, oy, &ms, ranges[k]);
        plot.axes(&mut out, name, &ms);
        for (i, (n, series)) in by_n.iter().enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            let pts: Vec<(f64, f64)> = series
                .iter()
                .filter(|r| get(r).is_finite())
                .map(|r| (plot.x(r.m), plot.y(get(r))))
                .collect();
            let path: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.1},{y:.1}")).collect();
            let _ = writeln!(
                out,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.8" points="{}"/>"#,
                path.join(" ")
            );
            for (x, y) in &pts {
                let _ = writeln!(out, r#"<circle cx="{x:.1}" cy="{y:.1}" r="3" fill="{color}"/>"#);
            }
            if k == 0 {
                let ly = oy + TOP + 14.0 + 16.0 * i as f64;
                let lx = ox + PANEL_W - RIGHT - 110.0;
                let _ = writeln!(
                    out,
                    r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="1.8"/><text x="{}" y="{}">N = {n}</text>"#,
                    lx + 20.0,
                    lx + 26.0,
                    ly + 4.0
                );
            }
        }
    }
    out.push_str("</svg>\n");
    out
}

struct Plot {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    lm: (f64, f64),
    range: (f64, f64),
}

impl Plot {
    fn new(ox: f64, oy: f64, ms: &[usize], range: (f64, f64)) -> Self {
        let lo = ms.first().map_or(1.0, |&m| (m as f64).log10());
        let hi = ms.last().map_or(10.0, |&m| (m as f64).log10());
        let (lo, hi) = if hi > lo { (lo, hi) } else { (lo - 0.5, hi + 0.5) };
        let pad = 0.06 * (hi - lo);
        Self {
            x0: ox + LEFT,
            x1: ox + PANEL_W - RIGHT,
            y0: oy + PANEL_H - BOTTOM,
            y1: oy + TOP,
            lm: (lo - pad, hi + pad),
            range,
        }
    }

    fn x(&self, m: usize) -> f64 {
        let t = ((m as f64).log10() - self.lm.0) / (self.lm.1 - self.lm.0);
        self.x0 + t * (self.x1 - self.x0)
    }

    fn y(&self, v: f64) -> f64 {
        let t = (v - self.range.0) / (self.range.1 - self.range.0);
        self.y0 + t * (self.y1 - self.y0)
    }

    fn axes(&self, out: &mut String, name: &str, ms: &[usize]) {
        let _ = writeln!(
            out,
            r##"<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="#444"/>"##,
            self.x0,
            self.y1,
            self.x1 - self.x0,
            self.y0 - self.y1
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" text-anchor="middle" font-size="14">{name}</text>"#,
            (self.x0 + self.x1) / 2.0,
            self.y1 - 10.0
        );
        for &m in ms {
            let x = self.x(m);
            let _ = writeln!(
                out,
                r##"<line x1="{x:.1}" y1="{}" x2="{x:.1}" y2="{}" stroke="#444"/><text x="{x:.1}" y="{}" text-anchor="middle">{m}</text>"##,
                self.y0,
                self.y0 + 5.0,
                self.y0 + 18.0
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" text-anchor="middle">M (log scale)</text>"#,
            (self.x0 + self.x1) / 2.0,
            self.y0 + 36.0
        );
        const TICKS: usize = 5;
        let span = self.range.1 - self.range.0;
        for i in 0..=TICKS {
            let v = self.range.0 + span * i as f64 / TICKS as f64;
            let y = self.y(v);
            let _ = writeln!(
                out,
                r##"<line x1="{}" y1="{y:.1}" x2="{}" y2="{y:.1}" stroke="#444"/><text x="{}" y="{:.1}" text-anchor="end">{}</text>"##,
                self.x0 - 5.0,
                self.x0,
                self.x0 - 8.0,
                y + 4.0,
                tick_label(v, span)
            );
        }
        if self.range.0 < 0.0 && self.range.1 > 0.0 {
            let y = self.y(0.0);
            let _ = writeln!(
                out,
                r##"<line x1="{}" y1="{y:.1}" x2="{}" y2="{y:.1}" stroke="#bbb" stroke-dasharray="4 3"/>"##,
                self.x0, self.x1
            );
        }
    }
}

fn tick_label(v: f64, span: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if (1e-2..1e3).contains(&span) {
        format!("{v:.3}")
    } else {
        format!("{v:.1e}")
    }
}
