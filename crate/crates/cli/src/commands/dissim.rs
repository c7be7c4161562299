//! Standalone dissimilarity report for a grid loaded from a CSV file.

use crate::config::{resolve, resolve_required, FileConfig};
use crate::output::{fmt_f64, CsvDoc, RunContext};
use crate::CliError;
use dissim_core::grid::{
    build_pyramid, normalize_grid, total_dissimilarity, Filter, SpaceTimeGrid,
};
use std::path::{Path, PathBuf};

/// Parse a header-free CSV of floats. Rows are space, columns are time.
pub fn read_grid_csv(path: &Path) -> Result<SpaceTimeGrid, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Failure(format!("{}: {e}", path.display())))?;
    let mut data = Vec::new();
    let mut rows = 0usize;
    let mut cols = None;
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut width = 0usize;
        for cell in line.split(',') {
            let v: f64 = cell.trim().parse().map_err(|_| {
                CliError::Failure(format!(
                    "{}:{}: not a number: {:?}",
                    path.display(),
                    ln + 1,
                    cell.trim()
                ))
            })?;
            data.push(v);
            width += 1;
        }
        match cols {
            None => cols = Some(width),
            Some(c) if c != width => {
                return Err(CliError::Failure(format!(
                    "{}:{}: row has {} columns, expected {}",
                    path.display(),
                    ln + 1,
                    width,
                    c
                )))
            }
            Some(_) => {}
        }
        rows += 1;
    }
    let cols =
        cols.ok_or_else(|| CliError::Failure(format!("{}: no data rows", path.display())))?;
    Ok(SpaceTimeGrid::from_vec(rows, cols, data)?)
}

pub struct DissimArgs {
    pub grid_file: Option<PathBuf>,
    pub lambda_x: Option<usize>,
    pub lambda_t: Option<usize>,
}

pub fn run_dissim_file(
    args: &DissimArgs,
    cfg: &FileConfig,
    ctx: &mut RunContext,
) -> Result<(), CliError> {
    let path = resolve_required(args.grid_file.clone(), cfg, "grid_file")?;
    let lambda_x = resolve(args.lambda_x, cfg, "lambda_x", 2)?;
    let lambda_t = resolve(args.lambda_t, cfg, "lambda_t", 2)?;
    let filter = Filter::new(lambda_x, lambda_t)?;
    ctx.param("grid_file", path.display());
    ctx.param("lambda_x", lambda_x);
    ctx.param("lambda_t", lambda_t);

    let grid = read_grid_csv(&path)?;
    let normalized = normalize_grid(&grid)?;
    let report = total_dissimilarity(&build_pyramid(&normalized, filter)?)?;

    let mut doc = CsvDoc::new("dissim-report-v1", &["k", "partial", "cumulative"]);
    let mut cumulative = 0.0;
    for (k, partial) in report.steps.iter().enumerate() {
        if k >= 1 {
            cumulative += partial;
        }
        doc.push(&[k.to_string(), fmt_f64(*partial), fmt_f64(cumulative)]);
    }
    ctx.write_csv("dissim_report.csv", &doc)?;
    println!(
        "dissimilarity {} ({} rows x {} cols, {} coarsening steps)",
        fmt_f64(report.total),
        grid.rows(),
        grid.cols(),
        report.steps.len()
    );
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn grid_csv_roundtrip_and_errors() {
        let dir = tempfile::tempdir().unwrap();
        let good = dir.path().join("g.csv");
        writeln!(
            std::fs::File::create(&good).unwrap(),
            "1, 2, 3\n4,5,6\n\n7,8,9"
        )
        .unwrap();
        let grid = read_grid_csv(&good).unwrap();
        assert_eq!((grid.rows(), grid.cols()), (3, 3));
        assert_eq!(grid.get(2, 1), 8.0);

        let ragged = dir.path().join("r.csv");
        writeln!(std::fs::File::create(&ragged).unwrap(), "1,2\n3").unwrap();
        assert!(read_grid_csv(&ragged).is_err());

        let junk = dir.path().join("j.csv");
        writeln!(std::fs::File::create(&junk).unwrap(), "1,apple").unwrap();
        assert!(read_grid_csv(&junk).is_err());
    }
}
