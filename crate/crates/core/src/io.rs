//! Sequence literal text format: one sequence per line, comma-separated
//! decimal numbers, LF line endings.

use crate::error::{Error, Result};
use crate::sequence::PeriodicSequence;

/// 17 significant digits; round-trips every finite `f64` exactly.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn format_sequence(u: &PeriodicSequence) -> String {
    u.as_slice()
        .iter()
        .map(|&v| fmt17(v))
        .collect::<Vec<_>>()
        .join(",")
}

pub fn write_sequences<'a>(seqs: impl IntoIterator<Item = &'a PeriodicSequence>) -> String {
    let mut out = String::new();
    for s in seqs {
        out.push_str(&format_sequence(s));
        out.push('\n');
    }
    out
}

/// Parse sequences of period `m`; blank lines are skipped.
pub fn parse_sequences(text: &str, m: usize) -> Result<Vec<PeriodicSequence>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let bad = |reason: String| Error::MalformedSequence {
            line: line_no,
            reason,
        };
        let values = line
            .split(',')
            .map(|f| {
                let f = f.trim();
                f.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| bad(format!("not a finite decimal number: {f:?}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        if values.len() != m {
            return Err(bad(format!("expected {m} values, found {}", values.len())));
        }
        out.push(PeriodicSequence::new(values)?);
    }
    Ok(out)
}
