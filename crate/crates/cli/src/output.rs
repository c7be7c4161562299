//! CSV, report, and manifest emission. Everything is assembled in memory
//! and written through a temp-file rename, so a failed run leaves no
//! partial outputs behind. Each emitted file gets a `<name>.manifest`
//! companion holding the resolved parameters in config-file form.

use crate::{plot, CliError};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// A CSV document with a `#schema=` identity line.
#[derive(Debug, Clone)]
pub struct CsvDoc {
    pub schema: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvDoc {
    pub fn new(schema: &str, columns: &[&str]) -> CsvDoc {
        CsvDoc {
            schema: schema.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, cells: &[String]) {
        assert_eq!(cells.len(), self.columns.len(), "row width mismatch");
        self.rows.push(cells.to_vec());
    }

    pub fn render(&self) -> String {
        let mut out = format!("#schema={}\n{}\n", self.schema, self.columns.join(","));
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// Shortest-roundtrip decimal form; stable across runs for equal bits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let tmp = path.with_extension(format!(
        "{}.tmp",
        path.extension().and_then(|e| e.to_str()).unwrap_or("out")
    ));
    std::fs::write(&tmp, contents)?;
    if let Err(e) = std::fs::rename(&tmp, path) {
        let _ = std::fs::remove_file(&tmp);
        return Err(e.into());
    }
    Ok(())
}

/// Everything needed to emit one subcommand's outputs.
pub struct RunContext {
    pub subcommand: &'static str,
    pub out_dir: PathBuf,
    pub plot: bool,
    params: Vec<(String, String)>,
}

impl RunContext {
    pub fn new(subcommand: &'static str, out_dir: PathBuf, plot: bool) -> RunContext {
        RunContext {
            subcommand,
            out_dir,
            plot,
            params: Vec::new(),
        }
    }

    /// Record a resolved parameter for the manifests.
    pub fn param(&mut self, key: &str, value: impl std::fmt::Display) {
        self.params.push((key.to_string(), value.to_string()));
    }

    fn manifest(&self, output: &str) -> String {
        let mut text = String::new();
        let _ = writeln!(text, "# dissim {} manifest", env!("CARGO_PKG_VERSION"));
        let _ = writeln!(text, "# subcommand: {}", self.subcommand);
        let _ = writeln!(text, "# output: {output}");
        let _ = writeln!(
            text,
            "# re-run: dissim {} --config {output}.manifest",
            self.subcommand
        );
        for (k, v) in &self.params {
            let _ = writeln!(text, "{k}={v}");
        }
        text
    }

    fn write_with_manifest(&self, name: &str, contents: &str) -> Result<PathBuf, CliError> {
        let path = self.out_dir.join(name);
        write_atomic(&path, contents)?;
        write_atomic(
            &self.out_dir.join(format!("{name}.manifest")),
            &self.manifest(name),
        )?;
        Ok(path)
    }

    /// Write a CSV (plus manifest, plus charts when requested and the
    /// schema has a registered layout).
    pub fn write_csv(&self, name: &str, doc: &CsvDoc) -> Result<PathBuf, CliError> {
        let path = self.write_with_manifest(name, &doc.render())?;
        if self.plot && plot::layout_for(&doc.schema).is_some() {
            for svg in plot::emit_plotdata(&path)? {
                println!("wrote {}", svg.display());
            }
        }
        println!("wrote {}", path.display());
        Ok(path)
    }

    /// Write a plain-text report plus manifest.
    pub fn write_report(&self, name: &str, text: &str) -> Result<PathBuf, CliError> {
        let path = self.write_with_manifest(name, text)?;
        println!("wrote {}", path.display());
        Ok(path)
    }
}
