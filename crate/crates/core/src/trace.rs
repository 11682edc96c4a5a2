//! Trace files: `#` header lines with the resolved config, one CSV row per iteration, and
//! trailing `#` summary lines.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::vqe::TraceRecord;

pub const COLUMNS: [&str; 6] = [
    "iteration",
    "energy",
    "energy_error",
    "fidelity",
    "symmetry_mean",
    "symmetry_sq_error",
];

const MAGIC: &str = "# symvqe trace";

/// 17 significant digits.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Trace {
    pub config: Vec<(String, String)>,
    pub records: Vec<TraceRecord>,
    pub summary: Vec<(String, String)>,
}

impl Trace {
    pub fn summary_value(&self, key: &str) -> Option<&str> {
        self.summary.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn config_value(&self, key: &str) -> Option<&str> {
        self.config.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{MAGIC}");
        for (k, v) in &self.config {
            let _ = writeln!(out, "# {k}={v}");
        }
        let _ = writeln!(out, "{}", COLUMNS.join(","));
        for r in &self.records {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                r.iteration,
                fmt_float(r.energy),
                fmt_float(r.energy_error),
                fmt_float(r.fidelity),
                fmt_float(r.symmetry_mean),
                fmt_float(r.symmetry_sq_error)
            );
        }
        for (k, v) in &self.summary {
            let _ = writeln!(out, "# {k}={v}");
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut trace = Trace::default();
        let mut seen_columns = false;
        let mut last_line = 0;
        for (index, raw) in text.lines().enumerate() {
            let line = index + 1;
            last_line = line;
            if line == 1 {
                if raw.trim() != MAGIC {
                    return Err(Error::Parse {
                        line,
                        message: format!("expected `{MAGIC}`"),
                    });
                }
                continue;
            }
            if let Some(comment) = raw.strip_prefix('#') {
                let (k, v) = comment.trim().split_once('=').ok_or_else(|| Error::Parse {
                    line,
                    message: "expected `# key=value`".into(),
                })?;
                let entry = (k.trim().to_string(), v.trim().to_string());
                if seen_columns {
                    trace.summary.push(entry);
                } else {
                    trace.config.push(entry);
                }
                continue;
            }
            if raw.trim().is_empty() {
                continue;
            }
            if !seen_columns {
                if raw.trim() != COLUMNS.join(",") {
                    return Err(Error::Parse {
                        line,
                        message: format!("expected column header `{}`", COLUMNS.join(",")),
                    });
                }
                seen_columns = true;
                continue;
            }
            if !trace.summary.is_empty() {
                return Err(Error::Parse {
                    line,
                    message: "data row after the summary block".into(),
                });
            }
            trace.records.push(parse_row(line, raw)?);
        }
        if !seen_columns {
            return Err(Error::Parse {
                line: last_line.max(1),
                message: "missing column header".into(),
            });
        }
        Ok(trace)
    }
}

fn parse_row(line: usize, raw: &str) -> Result<TraceRecord> {
    let fields: Vec<&str> = raw.trim().split(',').collect();
    if fields.len() != COLUMNS.len() {
        return Err(Error::Parse {
            line,
            message: format!("expected {} fields, found {}", COLUMNS.len(), fields.len()),
        });
    }
    let float = |i: usize| -> Result<f64> {
        fields[i].trim().parse().map_err(|_| Error::Parse {
            line,
            message: format!("`{}` is not a number in column `{}`", fields[i], COLUMNS[i]),
        })
    };
    Ok(TraceRecord {
        iteration: fields[0].trim().parse().map_err(|_| Error::Parse {
            line,
            message: format!("`{}` is not an iteration index", fields[0]),
        })?,
        energy: float(1)?,
        energy_error: float(2)?,
        fidelity: float(3)?,
        symmetry_mean: float(4)?,
        symmetry_sq_error: float(5)?,
    })
}

/// Fixed-width table of the records followed by the config and summary blocks.
pub fn format_report(trace: &Trace) -> String {
    let mut out = String::new();
    if !trace.config.is_empty() {
        let _ = writeln!(out, "config");
        for (k, v) in &trace.config {
            let _ = writeln!(out, "  {k:<30} {v}");
        }
        let _ = writeln!(out);
    }
    let _ = writeln!(
        out,
        "{:>9} {:>24} {:>24} {:>24} {:>24} {:>24}",
        COLUMNS[0], COLUMNS[1], COLUMNS[2], COLUMNS[3], COLUMNS[4], COLUMNS[5]
    );
    for r in &trace.records {
        let _ = writeln!(
            out,
            "{:>9} {:>24} {:>24} {:>24} {:>24} {:>24}",
            r.iteration,
            fmt_float(r.energy),
            fmt_float(r.energy_error),
            fmt_float(r.fidelity),
            fmt_float(r.symmetry_mean),
            fmt_float(r.symmetry_sq_error)
        );
    }
    if !trace.summary.is_empty() {
        let _ = writeln!(out);
        let _ = writeln!(out, "summary");
        for (k, v) in &trace.summary {
            let _ = writeln!(out, "  {k:<30} {v}");
        }
    }
    out
}
