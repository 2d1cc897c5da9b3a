use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use thiserror::Error;

use super::{sig6, Condition, ScanTable};
use crate::fitting::FitResult;
use crate::models::FieldMinimum;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("nothing to report: no tables given")]
    Empty,
    #[error("two outputs would both be written to {0}")]
    DuplicateFile(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Everything a report is built from.
#[derive(Debug, Clone, Default)]
pub struct Report<'a> {
    pub title: String,
    /// Resolved configuration, echoed verbatim at the top of the summary.
    pub config: String,
    pub tables: Vec<&'a ScanTable>,
    /// Labelled per-fit diagnostics.
    pub fits: Vec<(String, Condition, Result<&'a FitResult, String>)>,
    pub field_minimum: Option<FieldMinimum>,
    /// Extra `name: text` lines (consistency checks and the like).
    pub notes: Vec<(String, String)>,
    /// Additional files as (path relative to the report directory, contents).
    pub extra_files: Vec<(String, String)>,
}

fn summary(r: &Report<'_>) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# {}", r.title);
    if !r.config.is_empty() {
        s.push_str("\n[config]\n");
        s.push_str(r.config.trim_end());
        s.push('\n');
    }
    if let Some(m) = &r.field_minimum {
        s.push_str("\n[field-minimum]\n");
        let _ = writeln!(s, "B_star_T: {}", sig6(m.field));
        let _ = writeln!(s, "gamma_star_kHz: {}", sig6(m.linewidth));
        let _ = writeln!(s, "location: {:?}", m.location);
    }
    if !r.fits.is_empty() {
        s.push_str("\n[fits]\n");
        for (label, c, fit) in &r.fits {
            let _ = write!(s, "{label} T={}K B={}T: ", sig6(c.temperature_k), sig6(c.field_t));
            match fit {
                Ok(f) => {
                    let _ = write!(
                        s,
                        "converged={} termination={:?} iterations={} sse={} dof={} restarts_agreeing={}/{}",
                        f.converged,
                        f.termination,
                        f.iterations,
                        sig6(f.sse),
                        f.dof,
                        f.n_restarts_agreeing,
                        f.restarts
                    );
                    for (i, name) in f.params.names().iter().enumerate() {
                        let tag = if f.params.fixed[i] { " (fixed)" } else { "" };
                        let _ = write!(s, " {name}={}+-{}{tag}", sig6(f.params.values[i]), sig6(f.std_errors[i]));
                    }
                    s.push('\n');
                }
                Err(e) => {
                    let _ = writeln!(s, "FAILED {e}");
                }
            }
        }
    }
    if !r.notes.is_empty() {
        s.push_str("\n[checks]\n");
        for (k, v) in &r.notes {
            let _ = writeln!(s, "{k}: {v}");
        }
    }
    s.push_str("\n[tables]\n");
    for t in &r.tables {
        let valid = t.valid_rows().count();
        let _ = writeln!(s, "{}.csv rows={} failed={}", t.file_stem(), t.rows.len(), t.rows.len() - valid);
    }
    s
}

/// Writes one CSV per table plus `summary.txt` into `dir`.
///
/// Everything is rendered in memory first, so an invalid report leaves no
/// files behind. Identical inputs give byte-identical files.
pub fn emit_report(report: &Report<'_>, dir: &Path) -> Result<Vec<PathBuf>, ReportError> {
    if report.tables.is_empty() {
        return Err(ReportError::Empty);
    }
    let mut files: Vec<(PathBuf, String)> = Vec::new();
    for t in &report.tables {
        let path = dir.join(format!("{}.csv", t.file_stem()));
        if files.iter().any(|(p, _)| *p == path) {
            return Err(ReportError::DuplicateFile(path.display().to_string()));
        }
        files.push((path, t.to_csv()));
    }
    files.push((dir.join("summary.txt"), summary(report)));
    for (rel, body) in &report.extra_files {
        let path = dir.join(rel);
        if files.iter().any(|(p, _)| *p == path) {
            return Err(ReportError::DuplicateFile(path.display().to_string()));
        }
        files.push((path, body.clone()));
    }

    let io = |path: &Path| {
        let path = path.display().to_string();
        move |source| ReportError::Io { path, source }
    };
    std::fs::create_dir_all(dir).map_err(io(dir))?;
    for (path, body) in &files {
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(io(parent))?;
        }
        std::fs::write(path, body).map_err(io(path))?;
    }
    Ok(files.into_iter().map(|(p, _)| p).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::{ConditionAxis, Quantity, ScanRow};

    fn table() -> ScanTable {
        let mut t = ScanTable::new(ConditionAxis::Field, Quantity::GammaEff);
        t.rows.push(ScanRow::ok(Condition::new(0.007, 0.0), 40.02, 0.3));
        t
    }

    #[test]
    fn empty_report_writes_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("r");
        let r = Report { title: "t".into(), ..Default::default() };
        assert!(matches!(emit_report(&r, &out), Err(ReportError::Empty)));
        assert!(!out.exists());
    }

    #[test]
    fn re_emit_is_byte_identical() {
        let dir = tempfile::tempdir().unwrap();
        let t = table();
        let r = Report {
            title: "t".into(),
            config: "seed = 1".into(),
            tables: vec![&t],
            ..Default::default()
        };
        let a = dir.path().join("a");
        let b = dir.path().join("b");
        let fa = emit_report(&r, &a).unwrap();
        emit_report(&r, &b).unwrap();
        for p in fa {
            let name = p.file_name().unwrap();
            assert_eq!(std::fs::read(&p).unwrap(), std::fs::read(b.join(name)).unwrap());
        }
    }

    #[test]
    fn duplicate_tables_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let t = table();
        let r = Report { title: "t".into(), tables: vec![&t, &t], ..Default::default() };
        assert!(matches!(emit_report(&r, dir.path()), Err(ReportError::DuplicateFile(_))));
    }
}
