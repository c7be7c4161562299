//! Quick-look SVG charts generated from the CSV outputs. The CSV stays the
//! source of truth; each registered curve becomes one self-contained file
//! named `<csv stem>_<column>.svg`.

use crate::CliError;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

pub struct Layout {
    pub schema: &'static str,
    pub x_col: &'static str,
    pub log_x: bool,
    pub curves: &'static [(&'static str, &'static str)],
    pub x_label: &'static str,
    pub y_label: &'static str,
}

const LAYOUTS: &[Layout] = &[
    Layout {
        schema: "clg-sweep-v1",
        x_col: "rho",
        log_x: false,
        curves: &[
            ("dxt_mean", "space-time dissimilarity"),
            ("dx_mean", "spatial dissimilarity"),
            ("dt_mean", "temporal dissimilarity"),
        ],
        x_label: "density",
        y_label: "dissimilarity",
    },
    Layout {
        schema: "dtc-curve-v1",
        x_col: "epsilon",
        log_x: false,
        curves: &[("mean", "space-time dissimilarity")],
        x_label: "flip imperfection",
        y_label: "dissimilarity",
    },
    Layout {
        schema: "dtc-hamming-v1",
        x_col: "d",
        log_x: false,
        curves: &[("p_even", "even step"), ("p_odd", "odd step")],
        x_label: "Hamming distance",
        y_label: "probability",
    },
    Layout {
        schema: "transport-magnetization-v1",
        x_col: "t",
        log_x: true,
        curves: &[("sz_mean", "reference magnetization")],
        x_label: "time",
        y_label: "<S^z>",
    },
    Layout {
        schema: "transport-dissim-v1",
        x_col: "t_window",
        log_x: true,
        curves: &[("dxt_mean", "windowed dissimilarity")],
        x_label: "window time",
        y_label: "dissimilarity",
    },
    Layout {
        schema: "dissim-report-v1",
        x_col: "k",
        log_x: false,
        curves: &[("partial", "step score"), ("cumulative", "running total")],
        x_label: "coarsening step",
        y_label: "dissimilarity",
    },
];

pub fn layout_for(schema: &str) -> Option<&'static Layout> {
    LAYOUTS.iter().find(|l| l.schema == schema)
}

struct Table {
    schema: String,
    columns: Vec<String>,
    rows: Vec<Vec<f64>>,
}

fn read_table(path: &Path) -> Result<Table, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Failure(format!("{}: {e}", path.display())))?;
    let mut lines = text.lines();
    let schema = lines
        .next()
        .and_then(|l| l.strip_prefix("#schema="))
        .ok_or_else(|| {
            CliError::Failure(format!("{}: missing #schema= header line", path.display()))
        })?
        .to_string();
    let columns: Vec<String> = lines
        .next()
        .unwrap_or("")
        .split(',')
        .map(|c| c.to_string())
        .collect();
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let row: Result<Vec<f64>, _> = line.split(',').map(str::parse::<f64>).collect();
        let row = row.map_err(|e| {
            CliError::Failure(format!("{} data line {}: {e}", path.display(), i + 1))
        })?;
        if row.len() != columns.len() {
            return Err(CliError::Failure(format!(
                "{} data line {}: {} cells for {} columns",
                path.display(),
                i + 1,
                row.len(),
                columns.len()
            )));
        }
        rows.push(row);
    }
    Ok(Table {
        schema,
        columns,
        rows,
    })
}

fn tick_label(v: f64) -> String {
    if v == 0.0 {
        "0".to_string()
    } else if v.abs() >= 0.01 && v.abs() < 10000.0 {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        format!("{v:.1e}")
    }
}

fn render_svg(
    title: &str,
    x_label: &str,
    y_label: &str,
    log_x: bool,
    points: &[(f64, f64)],
) -> String {
    const W: f64 = 660.0;
    const H: f64 = 440.0;
    const L: f64 = 70.0;
    const R: f64 = 20.0;
    const T: f64 = 40.0;
    const B: f64 = 50.0;

    let xs: Vec<f64> = points
        .iter()
        .map(|(x, _)| if log_x { x.log10() } else { *x })
        .collect();
    let ys: Vec<f64> = points.iter().map(|(_, y)| *y).collect();
    let (mut x_lo, mut x_hi) = xs
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    let (mut y_lo, mut y_hi) = ys
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    if x_lo == x_hi {
        x_lo -= 1.0;
        x_hi += 1.0;
    }
    if y_lo == y_hi {
        y_lo -= 1.0;
        y_hi += 1.0;
    }
    let pad = 0.04 * (y_hi - y_lo);
    y_lo -= pad;
    y_hi += pad;

    let px = |x: f64| L + (x - x_lo) / (x_hi - x_lo) * (W - L - R);
    let py = |y: f64| H - B - (y - y_lo) / (y_hi - y_lo) * (H - T - B);

    let mut svg = String::new();
    let _ = write!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {W} {H}\" \
         font-family=\"sans-serif\" font-size=\"13\">\n\
         <rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">{title}</text>\n",
        W / 2.0
    );
    let _ = write!(
        svg,
        "<line x1=\"{L}\" y1=\"{0}\" x2=\"{1}\" y2=\"{0}\" stroke=\"black\"/>\n\
         <line x1=\"{L}\" y1=\"{T}\" x2=\"{L}\" y2=\"{0}\" stroke=\"black\"/>\n",
        H - B,
        W - R
    );
    for i in 0..5 {
        let f = i as f64 / 4.0;
        let xv = x_lo + f * (x_hi - x_lo);
        let yv = y_lo + f * (y_hi - y_lo);
        let xp = px(xv);
        let yp = py(yv);
        let x_text = tick_label(if log_x { 10f64.powf(xv) } else { xv });
        let _ = write!(
            svg,
            "<line x1=\"{xp}\" y1=\"{0}\" x2=\"{xp}\" y2=\"{1}\" stroke=\"black\"/>\n\
             <text x=\"{xp}\" y=\"{2}\" text-anchor=\"middle\">{x_text}</text>\n\
             <line x1=\"{3}\" y1=\"{yp}\" x2=\"{L}\" y2=\"{yp}\" stroke=\"black\"/>\n\
             <text x=\"{4}\" y=\"{5}\" text-anchor=\"end\">{6}</text>\n",
            H - B,
            H - B + 5.0,
            H - B + 20.0,
            L - 5.0,
            L - 8.0,
            yp + 4.0,
            tick_label(yv)
        );
    }
    let _ = write!(
        svg,
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{x_label}</text>\n\
         <text x=\"16\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {2})\">{y_label}</text>\n",
        (L + W - R) / 2.0,
        H - 12.0,
        (T + H - B) / 2.0
    );
    let pts: Vec<String> = xs
        .iter()
        .zip(&ys)
        .map(|(&x, &y)| format!("{:.2},{:.2}", px(x), py(y)))
        .collect();
    let _ = write!(
        svg,
        "<polyline fill=\"none\" stroke=\"#1f6fb4\" stroke-width=\"1.6\" points=\"{}\"/>\n</svg>\n",
        pts.join(" ")
    );
    svg
}

/// Render every registered curve of a schema-tagged CSV into SVG files
/// beside it. Errors on unknown schemas, missing columns, or empty data.
pub fn emit_plotdata(csv: &Path) -> Result<Vec<PathBuf>, CliError> {
    let table = read_table(csv)?;
    let layout = layout_for(&table.schema).ok_or_else(|| {
        CliError::Failure(format!(
            "{}: no chart layout registered for schema {}",
            csv.display(),
            table.schema
        ))
    })?;
    if table.rows.is_empty() {
        return Err(CliError::Failure(format!(
            "{}: no data rows to plot",
            csv.display()
        )));
    }
    let col_index = |name: &str| -> Result<usize, CliError> {
        table.columns.iter().position(|c| c == name).ok_or_else(|| {
            CliError::Failure(format!(
                "{}: schema {} expects column {name}",
                csv.display(),
                table.schema
            ))
        })
    };
    let xi = col_index(layout.x_col)?;
    let stem = csv
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("curve")
        .to_string();
    let dir = csv.parent().unwrap_or_else(|| Path::new("."));
    let mut written = Vec::new();
    for (col, label) in layout.curves {
        let yi = col_index(col)?;
        let points: Vec<(f64, f64)> = table
            .rows
            .iter()
            .map(|r| (r[xi], r[yi]))
            .filter(|(x, _)| !layout.log_x || *x > 0.0)
            .collect();
        if points.is_empty() {
            return Err(CliError::Failure(format!(
                "{}: no plottable points for column {col}",
                csv.display()
            )));
        }
        let svg = render_svg(label, layout.x_label, layout.y_label, layout.log_x, &points);
        let path = dir.join(format!("{stem}_{col}.svg"));
        crate::output::write_atomic(&path, &svg)?;
        written.push(path);
    }
    Ok(written)
}
