use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use copula_split::sim::{render_timing_table, timing_table};
use copula_split::{
    fit, fit_parallel, normalized_ranks, run_study, CopulaFamily, CopulaModel, DataMatrix, FitResult,
    ParallelOptions, RngStream, SimConfig,
};
use walkdir::WalkDir;

use crate::args::{family_list, FitArgs, ReportArgs, SampleArgs, SimulateArgs, SplitFitArgs};
use crate::error::CliError;
use crate::input::{read_data_csv, write_data_csv};
use crate::manifest::RunManifest;
use crate::schema::{num, SummaryRow, BLOCKS, COMBINED, FIT, METRICS, QUADRATURE, REPLICATES, SUMMARY, TIMING};
use crate::svg;

fn create_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn print_fit(family: CopulaFamily, r: &FitResult) {
    println!("family      {family}");
    println!("n           {}", r.n);
    println!("theta_hat   {}", num(r.theta_hat));
    println!("std_error   {}", num(r.std_error()));
    println!("loglik      {}", num(r.loglik));
    println!("iterations  {}", r.iterations);
    println!("converged   {}", r.converged);
}

pub fn cmd_fit(a: &FitArgs, argv: &[String]) -> Result<(), CliError> {
    let mut manifest = RunManifest::start("fit", argv);
    let x = read_data_csv(&a.input)?;
    let r = fit(a.family, &normalized_ranks(&x))?;
    print_fit(a.family, &r);

    if let Some(dir) = &a.out {
        create_dir(dir)?;
        let mut out = FIT.create(&dir.join("fit.csv"))?;
        out.row(vec![
            a.family.to_string(),
            r.n.to_string(),
            num(r.theta_hat),
            num(r.std_error()),
            num(r.sigma2),
            num(r.loglik),
            r.iterations.to_string(),
            r.converged.to_string(),
        ])?;
        manifest.set("input", a.input.display());
        manifest.set("family", a.family);
        manifest.finish(dir)?;
    }
    if r.converged {
        Ok(())
    } else {
        Err(CliError::convergence(
            r.diagnostic.unwrap_or_else(|| "fit did not converge".into()),
        ))
    }
}

pub fn cmd_split_fit(a: &SplitFitArgs, argv: &[String]) -> Result<(), CliError> {
    let mut manifest = RunManifest::start("split-fit", argv);
    if a.subsets == 0 {
        return Err(CliError::usage("--subsets must be at least 1"));
    }
    let x = read_data_csv(&a.input)?;
    let opts = ParallelOptions {
        scheme: a.scheme,
        workers: a.workers,
        ..ParallelOptions::default()
    };
    let c = fit_parallel(a.family, &x, a.subsets, &opts)?;

    println!(
        "{:>5} {:>9} {:>22} {:>24} {:>10}",
        "block", "rows", "theta_hat", "sigma2", "seconds"
    );
    for (i, (r, secs)) in c.per_block.iter().zip(&c.wall_clock_per_block).enumerate() {
        println!(
            "{:>5} {:>9} {:>22} {:>24} {:>10.4}",
            i + 1,
            r.n,
            num(r.theta_hat),
            num(r.sigma2),
            secs
        );
    }
    for i in c.excluded_blocks() {
        let why = c.per_block[i].diagnostic.as_deref().unwrap_or("not usable");
        eprintln!("warning: block {} excluded: {why}", i + 1);
    }
    println!("family      {}", a.family);
    println!("n           {}", x.nrows());
    println!("subsets     {}", a.subsets);
    println!("blocks_used {}", c.blocks_used);
    println!("theta_hat   {}", num(c.theta_combined));

    if let Some(dir) = &a.out {
        create_dir(dir)?;
        // no wall-clock columns: these files depend only on the input and flags
        let mut blocks = BLOCKS.create(&dir.join("blocks.csv"))?;
        for (i, (r, w)) in c.per_block.iter().zip(&c.weights).enumerate() {
            blocks.row(vec![
                (i + 1).to_string(),
                r.n.to_string(),
                num(r.theta_hat),
                num(r.sigma2),
                num(w.unwrap_or(f64::NAN)),
                r.converged.to_string(),
            ])?;
        }
        let mut combined = COMBINED.create(&dir.join("combined.csv"))?;
        combined.row(vec![
            a.family.to_string(),
            x.nrows().to_string(),
            a.subsets.to_string(),
            a.scheme.to_string(),
            num(c.theta_combined),
            c.blocks_used.to_string(),
        ])?;
        manifest.set("input", a.input.display());
        manifest.set("family", a.family);
        manifest.set("subsets", a.subsets);
        manifest.set("scheme", a.scheme);
        manifest.set("workers", a.workers);
        manifest.finish(dir)?;
    }
    Ok(())
}

pub fn cmd_simulate(a: &SimulateArgs, argv: &[String]) -> Result<(), CliError> {
    let mut manifest = RunManifest::start("simulate", argv);
    let families = family_list(&a.family).map_err(CliError::usage)?;
    if a.theta.is_some() && families.len() != 1 {
        return Err(CliError::usage("--theta needs exactly one --family"));
    }
    if a.rows.is_empty() || a.subsets.is_empty() {
        return Err(CliError::usage("--rows and --subsets must not be empty"));
    }

    let mut cells = Vec::new();
    for &family in &families {
        for &n in &a.rows {
            for &m in &a.subsets {
                let mut cfg = SimConfig::study(family, n, m, a.replicates, a.seed);
                cfg.theta_true = a.theta.unwrap_or(cfg.theta_true);
                cfg.workers = a.workers;
                cfg.scheme = a.scheme;
                cfg.quad_nodes = a.quad_nodes;
                cfg.validate()
                    .map_err(|e| CliError::usage(format!("{family} N={n} M={m}: {e}")))?;
                cells.push(cfg);
            }
        }
    }

    create_dir(&a.out)?;
    manifest.seed = Some(a.seed);
    let names: Vec<String> = families.iter().map(|f| f.to_string()).collect();
    manifest.set("family", names.join(","));
    manifest.set("theta", a.theta.map_or("default".into(), |t| t.to_string()));
    manifest.set("rows", join(&a.rows));
    manifest.set("subsets", join(&a.subsets));
    manifest.set("replicates", a.replicates);
    manifest.set("workers", a.workers);
    manifest.set("scheme", a.scheme);
    manifest.set("quad_nodes", a.quad_nodes);
    manifest.set("no_timings", a.no_timings);

    let mut summary = SUMMARY.create(&a.out.join("summary.csv"))?;
    let mut replicates = REPLICATES.create(&a.out.join("replicates.csv"))?;
    let mut quadrature = QUADRATURE.create(&a.out.join("quadrature.csv"))?;
    let timed = |t: f64| num(if a.no_timings { f64::NAN } else { t });
    let mut rows = Vec::with_capacity(cells.len());
    for (k, cfg) in cells.iter().enumerate() {
        let start = Instant::now();
        let report = run_study(cfg).map_err(|e| {
            let e = CliError::from_core(&e);
            CliError {
                message: format!("{} N={} M={}: {}", cfg.family, cfg.n, cfg.m, e.message),
                ..e
            }
        })?;
        let row = SummaryRow::from_report(&report, !a.no_timings);
        summary.row(row.to_fields())?;
        let cell = [cfg.family.to_string(), num(cfg.theta_true), cfg.n.to_string(), cfg.m.to_string()];
        for r in &report.rows {
            let mut fields = cell.to_vec();
            fields.extend([
                r.s.to_string(),
                r.seed.to_string(),
                num(r.theta_full),
                num(r.theta_combined),
                r.blocks_used.to_string(),
                timed(r.full_seconds),
                timed(r.full_fit_seconds),
                timed(r.mean_subset_seconds),
                timed(r.mean_subset_fit_seconds),
            ]);
            replicates.row(fields)?;
        }
        let q = &report.quad_check;
        let mut fields = cell.to_vec();
        fields.extend([
            cfg.quad_nodes.to_string(),
            num(report.rel_l1),
            num(q.rel_l1_doubled),
            num(report.rel_l2),
            num(q.rel_l2_doubled),
            q.l1_stable.to_string(),
            q.l2_stable.to_string(),
        ]);
        quadrature.row(fields)?;
        if !(q.l1_stable && q.l2_stable) {
            eprintln!(
                "warning: {} N={} M={}: L1/L2 changed by more than 10% when quadrature nodes were doubled",
                cfg.family, cfg.n, cfg.m
            );
        }
        eprintln!(
            "[{}/{}] {} N={} M={} S={}: bias={} mse={} ({:.1} s)",
            k + 1,
            cells.len(),
            cfg.family,
            cfg.n,
            cfg.m,
            cfg.s,
            num(report.bias),
            num(report.mse),
            start.elapsed().as_secs_f64()
        );
        rows.push(row);
    }

    let ranges = svg::metric_ranges(&rows);
    for &family in &families {
        let path = a.out.join(format!("figure_{family}.svg"));
        std::fs::write(&path, svg::family_figure(family, &rows, &ranges)).map_err(|e| CliError::io(&path, e))?;
    }
    manifest.finish(&a.out)
}

fn join(v: &[usize]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

/// Every summary.csv under `dirs`, in a stable order.
fn find_summaries(dirs: &[PathBuf], problems: &mut Vec<CliError>) -> Vec<PathBuf> {
    let mut found = Vec::new();
    for dir in dirs {
        if !dir.is_dir() {
            problems.push(CliError::data(format!("{}: not a directory", dir.display())));
            continue;
        }
        for entry in WalkDir::new(dir).sort_by_file_name() {
            match entry {
                Ok(e) if e.file_type().is_file() && e.file_name() == "summary.csv" => {
                    found.push(e.into_path())
                }
                Ok(_) => {}
                Err(e) => problems.push(CliError::data(format!("{}: {e}", dir.display()))),
            }
        }
    }
    found
}

fn load_summary(path: &Path) -> Result<Vec<SummaryRow>, String> {
    let text = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
    SUMMARY
        .parse(&text)?
        .iter()
        .map(SummaryRow::from_record)
        .collect()
}

pub fn cmd_report(a: &ReportArgs, argv: &[String]) -> Result<(), CliError> {
    let mut manifest = RunManifest::start("report", argv);
    let mut problems = Vec::new();
    let files = find_summaries(&a.dirs, &mut problems);

    let mut cells: BTreeMap<(CopulaFamily, usize, usize), (SummaryRow, PathBuf)> = BTreeMap::new();
    for path in &files {
        match load_summary(path) {
            Ok(rows) => {
                for row in rows {
                    let key = (row.family, row.n, row.m);
                    if let Some((_, first)) = cells.get(&key) {
                        problems.push(CliError::data(format!(
                            "{}: duplicate cell {} N={} M={} (already read from {})",
                            path.display(),
                            row.family,
                            row.n,
                            row.m,
                            first.display()
                        )));
                    } else {
                        cells.insert(key, (row, path.clone()));
                    }
                }
            }
            Err(msg) => problems.push(CliError::data(format!("{}: {msg}", path.display()))),
        }
    }
    for p in &problems {
        eprintln!("{p}");
    }
    if cells.is_empty() {
        return Err(CliError::data("no results found"));
    }

    let rows: Vec<SummaryRow> = cells.into_values().map(|(r, _)| r).collect();
    println!("Mean wall-clock seconds per fit (blocks averaged over blocks and replicates)");
    print!("{}", render_timing_table(&timing_table(&rows)));
    for (name, get) in svg::METRICS {
        println!();
        print!("{}", metric_table(name, &rows, get));
    }

    if let Some(dir) = &a.out {
        create_dir(dir)?;
        let mut timing = TIMING.create(&dir.join("timing.csv"))?;
        let mut metrics = METRICS.create(&dir.join("metrics.csv"))?;
        for r in &rows {
            let key = [r.family.to_string(), r.n.to_string(), r.m.to_string()];
            let mut t = key.to_vec();
            t.extend([num(r.mean_subset_s), num(r.mean_full_s)]);
            timing.row(t)?;
            let mut m = key.to_vec();
            m.extend([r.s.to_string(), num(r.bias), num(r.mse), num(r.rel_l1), num(r.rel_l2)]);
            metrics.row(m)?;
        }
        let dirs: Vec<String> = a.dirs.iter().map(|d| d.display().to_string()).collect();
        manifest.set("dirs", dirs.join(","));
        manifest.set("files", files.len());
        manifest.finish(dir)?;
    }

    if problems.is_empty() {
        Ok(())
    } else {
        Err(CliError::data(format!(
            "{} problem(s) reading results; see messages above",
            problems.len()
        )))
    }
}

/// One section per family: rows N, columns M.
fn metric_table(name: &str, rows: &[SummaryRow], get: fn(&SummaryRow) -> f64) -> String {
    let mut ms: Vec<usize> = rows.iter().map(|r| r.m).collect();
    ms.sort_unstable();
    ms.dedup();
    let mut out = String::new();
    let _ = writeln!(out, "{name}");
    let _ = write!(out, "{:<10} {:>10}", "copula", "N");
    for m in &ms {
        let _ = write!(out, " {:>12}", format!("M={m}"));
    }
    out.push('\n');
    let mut by_row: BTreeMap<(CopulaFamily, usize), BTreeMap<usize, f64>> = BTreeMap::new();
    for r in rows {
        by_row.entry((r.family, r.n)).or_default().insert(r.m, get(r));
    }
    let mut last = None;
    for ((family, n), vals) in by_row {
        let label = if last == Some(family) { String::new() } else { family.to_string() };
        last = Some(family);
        let _ = write!(out, "{label:<10} {n:>10}");
        for m in &ms {
            match vals.get(m) {
                Some(v) if v.is_finite() => {
                    let _ = write!(out, " {v:>12.3e}");
                }
                _ => {
                    let _ = write!(out, " {:>12}", "-");
                }
            }
        }
        out.push('\n');
    }
    out
}

pub fn cmd_sample(a: &SampleArgs, argv: &[String]) -> Result<(), CliError> {
    let mut manifest = RunManifest::start("sample", argv);
    let theta = a.theta.unwrap_or(a.family.study_theta());
    let model = CopulaModel::new(a.family, theta).map_err(|e| CliError::usage(e.to_string()))?;
    if a.rows < 2 {
        return Err(CliError::usage("--rows must be at least 2"));
    }
    let pairs = model.sample(a.rows, &mut RngStream::from_seed(a.seed));
    let x = DataMatrix::from_pairs(&pairs)?;
    write_data_csv(&a.out, ["u1", "u2"], &x)?;
    println!("wrote {} rows to {}", a.rows, a.out.display());

    manifest.seed = Some(a.seed);
    manifest.set("family", a.family);
    manifest.set("theta", theta);
    manifest.set("rows", a.rows);
    let mut path = a.out.clone().into_os_string();
    path.push(".manifest.txt");
    manifest.finish_to(Path::new(&path))
}
