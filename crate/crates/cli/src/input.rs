use std::path::Path;

use copula_split::DataMatrix;
use csv::{ReaderBuilder, StringRecord, Trim};

use crate::error::CliError;

/// Read a two-column numeric CSV. The first row is taken as a header when
/// any of its cells fails to parse as a number; `#` starts a comment line.
pub fn read_data_csv(path: &Path) -> Result<DataMatrix, CliError> {
    let mut reader = ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(Trim::All)
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| CliError::io(path, e))?;

    let (mut first, mut second) = (Vec::new(), Vec::new());
    let mut record = StringRecord::new();
    let mut index = 0usize;
    loop {
        match reader.read_record(&mut record) {
            Ok(true) => {}
            Ok(false) => break,
            Err(e) => return Err(CliError::io(path, e)),
        }
        let line = record.position().map_or(index + 1, |p| p.line() as usize);
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        if record.len() != 2 {
            return Err(CliError::data(format!(
                "expected 2 numeric columns, found {} at line {line}",
                record.len()
            )));
        }
        let parsed: Vec<Option<f64>> = record.iter().map(|c| c.parse().ok()).collect();
        match (parsed[0], parsed[1]) {
            (Some(a), Some(b)) => {
                first.push(a);
                second.push(b);
            }
            _ if index == 0 => {}
            _ => {
                let col = parsed.iter().position(Option::is_none).unwrap_or(0);
                return Err(CliError::data(format!(
                    "non-numeric value '{}' at line {line}, column {}",
                    &record[col],
                    col + 1
                )));
            }
        }
        index += 1;
    }
    if first.is_empty() {
        return Err(CliError::data(format!("{}: no data rows", path.display())));
    }
    Ok(DataMatrix::new(first, second)?)
}

/// Write a data matrix as CSV with the given two-column header.
pub fn write_data_csv(path: &Path, header: [&str; 2], x: &DataMatrix) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::io(path, e))?;
    let io = |e| CliError::io(path, e);
    w.write_record(header).map_err(io)?;
    for i in 0..x.nrows() {
        let [a, b] = x.row(i);
        w.write_record([a.to_string(), b.to_string()]).map_err(io)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}
