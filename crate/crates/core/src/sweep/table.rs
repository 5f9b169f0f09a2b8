use std::io::Write;
use std::path::Path;

use super::{SweepError, SweepResult};

pub const TABLE_HEADER: &str = "term,bound_u_sd,bound_nu1_sd,bound_nu2_sd,frequency,risk_pct,n_exceed,n_total,master_seed";

pub(crate) fn fmt_bound(b: f64) -> String {
    if b.is_infinite() {
        "inf".to_string()
    } else {
        format!("{b}")
    }
}

/// Writes the sweep as CSV, one line per row after the header.
pub fn write_table<W: Write>(result: &SweepResult, mut out: W) -> std::io::Result<()> {
    writeln!(out, "{TABLE_HEADER}")?;
    for r in &result.rows {
        writeln!(
            out,
            "{},{},{},{},{},{:.4},{},{},{}",
            r.term.label(),
            fmt_bound(r.bound_u),
            fmt_bound(r.bound_nu1),
            fmt_bound(r.bound_nu2),
            r.frequency.label(),
            r.risk_pct,
            r.n_exceed,
            r.n_total,
            r.master_seed
        )?;
    }
    out.flush()
}

pub fn emit_table(result: &SweepResult, path: impl AsRef<Path>) -> Result<(), SweepError> {
    let path = path.as_ref();
    let io_err = |source| SweepError::Io { path: path.display().to_string(), source };
    let file = std::fs::File::create(path).map_err(io_err)?;
    write_table(result, std::io::BufWriter::new(file)).map_err(io_err)
}
