use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One line of a `.hka` file: Laue indices, amplitude (max 10000 scale), phase in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HkaRecord {
    pub h: i32,
    pub k: i32,
    pub amplitude: f64,
    pub phase: f64,
}

pub fn parse_hka(path: impl AsRef<Path>) -> Result<Vec<HkaRecord>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_hka_str(&text)
}

/// Lines starting with `#` and lines whose first token is not an integer are skipped.
/// A line that starts like a record but has a bad field is an error.
pub fn parse_hka_str(text: &str) -> Result<Vec<HkaRecord>> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let lineno = i + 1;
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        let Ok(h) = toks[0].parse::<i32>() else {
            continue;
        };
        if toks.len() < 4 {
            return Err(Error::HkaParse {
                line: lineno,
                msg: format!("expected 4 fields, found {}", toks.len()),
            });
        }
        let field = |idx: usize, name: &str| -> Result<f64> {
            let v: f64 = toks[idx].parse().map_err(|_| Error::HkaParse {
                line: lineno,
                msg: format!("bad {name} '{}'", toks[idx]),
            })?;
            if !v.is_finite() {
                return Err(Error::HkaParse {
                    line: lineno,
                    msg: format!("non-finite {name}"),
                });
            }
            Ok(v)
        };
        let k = toks[1].parse::<i32>().map_err(|_| Error::HkaParse {
            line: lineno,
            msg: format!("bad k '{}'", toks[1]),
        })?;
        let amplitude = field(2, "amplitude")?;
        if amplitude < 0.0 {
            return Err(Error::HkaParse {
                line: lineno,
                msg: "negative amplitude".into(),
            });
        }
        let phase = field(3, "phase")?.rem_euclid(360.0);
        if !seen.insert((h, k)) {
            return Err(Error::DuplicateIndex { h, k, line: lineno });
        }
        out.push(HkaRecord {
            h,
            k,
            amplitude,
            phase,
        });
    }
    if out.is_empty() {
        return Err(Error::EmptyHka);
    }
    Ok(out)
}

/// `%d %d %.4f %.4f` per record, sorted by (h, k).
pub fn format_hka(records: &[HkaRecord]) -> String {
    let mut sorted = records.to_vec();
    sorted.sort_by_key(|r| (r.h, r.k));
    let mut s = String::new();
    for r in sorted {
        let mut phase = r.phase.rem_euclid(360.0);
        if phase >= 360.0 - 5e-5 {
            phase = 0.0;
        }
        let _ = writeln!(s, "{} {} {:.4} {:.4}", r.h, r.k, r.amplitude, phase);
    }
    s
}

pub fn write_hka(records: &[HkaRecord], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, format_hka(records)).map_err(|e| Error::io(path, e))
}
