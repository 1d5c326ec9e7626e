//! Profile file ingestion and the canonical interchange format.
//!
//! Canonical format: UTF-8 text, header lines `# key = value`, one blank
//! line, then rows `y_plus<TAB>u_plus` (or `y<TAB>u` in metres and m/s when
//! the header says `units = dimensional`). Numbers are written with 17
//! significant digits so a write/parse cycle reproduces every f64 exactly.
//! Lines starting with `#` after the header are comments.
//!
//! The headerless whitespace-table format covers raw experimental exports:
//! two numeric columns, metadata supplied by the caller.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::profile::{ProfilePoint, RunMetadata, VelocityProfile};

/// How to interpret an input stream.
#[derive(Debug, Clone)]
pub enum FormatHint {
    /// Self-describing canonical file.
    Canonical,
    /// Headerless two-column table; metadata comes from the caller.
    /// The boolean marks dimensional (y [m], u [m/s]) columns.
    WhitespaceTable {
        meta: RunMetadata,
        dimensional: bool,
    },
}

const REQUIRED_KEYS: [&str; 4] = ["re_theta", "u_free", "u_tau", "nu"];

fn parse_f64(value: &str, key: &str, line: usize) -> Result<f64> {
    value.trim().parse::<f64>().map_err(|_| Error::Parse {
        line,
        message: format!("cannot parse {key} value '{}'", value.trim()),
    })
}

/// Parse a profile from `reader` according to `format`.
pub fn parse_profile<R: BufRead>(reader: R, format: FormatHint) -> Result<VelocityProfile> {
    let lines: Vec<String> = reader.lines().collect::<std::io::Result<_>>()?;
    match format {
        FormatHint::Canonical => parse_canonical(&lines),
        FormatHint::WhitespaceTable { meta, dimensional } => {
            let rows = parse_rows(&lines, 0)?;
            build_profile(meta, rows, dimensional)
        }
    }
}

fn parse_canonical(lines: &[String]) -> Result<VelocityProfile> {
    let mut header: Vec<(String, String, usize)> = Vec::new();
    let mut body_start = lines.len();
    for (i, line) in lines.iter().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() {
            body_start = i + 1;
            break;
        }
        let Some(rest) = trimmed.strip_prefix('#') else {
            return Err(Error::Parse {
                line: i + 1,
                message: "expected '# key = value' header line or blank separator".to_string(),
            });
        };
        let Some((key, value)) = rest.split_once('=') else {
            return Err(Error::Parse {
                line: i + 1,
                message: format!("header line lacks '=': '{trimmed}'"),
            });
        };
        header.push((
            key.trim().to_ascii_lowercase(),
            value.trim().to_string(),
            i + 1,
        ));
    }

    let lookup = |key: &str| header.iter().find(|(k, _, _)| k == key);
    let missing: Vec<String> = REQUIRED_KEYS
        .iter()
        .filter(|k| lookup(k).is_none())
        .map(|k| k.to_string())
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingMetadata { keys: missing });
    }

    let numeric = |key: &str| -> Result<f64> {
        let (_, v, line) = lookup(key).expect("checked above");
        parse_f64(v, key, *line)
    };
    let re_theta = numeric("re_theta")?;
    let u_free = numeric("u_free")?;
    let u_tau = numeric("u_tau")?;
    let nu = numeric("nu")?;
    let label = lookup("label")
        .map(|(_, v, _)| v.clone())
        .unwrap_or_else(|| "unlabeled".to_string());

    let mut meta = RunMetadata::new(re_theta, u_free, u_tau, nu, label)?;
    if let Some((_, v, line)) = lookup("momentum_thickness") {
        let theta = parse_f64(v, "momentum_thickness", *line)?;
        meta = meta.with_momentum_thickness(theta)?;
    }
    let dimensional = match lookup("units") {
        None => false,
        Some((_, v, line)) => match v.as_str() {
            "wall" => false,
            "dimensional" => true,
            other => {
                return Err(Error::Parse {
                    line: *line,
                    message: format!("units must be 'wall' or 'dimensional', got '{other}'"),
                })
            }
        },
    };

    let rows = parse_rows(&lines[body_start..], body_start)?;
    build_profile(meta, rows, dimensional)
}

/// Parse numeric body rows; `offset` is the 0-based index of the first line
/// in the original stream, used for error reporting.
fn parse_rows(lines: &[String], offset: usize) -> Result<Vec<(f64, f64, usize)>> {
    let mut rows = Vec::new();
    for (i, raw) in lines.iter().enumerate() {
        let line_no = offset + i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut cols = trimmed.split_whitespace();
        let (Some(a), Some(b), None) = (cols.next(), cols.next(), cols.next()) else {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected two numeric columns, got '{trimmed}'"),
            });
        };
        let y = parse_f64(a, "first column", line_no)?;
        let u = parse_f64(b, "second column", line_no)?;
        for (name, v) in [("y_plus", y), ("u_plus", u)] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("{name} must be positive, got {v}"),
                });
            }
        }
        rows.push((y, u, line_no));
    }
    Ok(rows)
}

fn build_profile(
    meta: RunMetadata,
    rows: Vec<(f64, f64, usize)>,
    dimensional: bool,
) -> Result<VelocityProfile> {
    if dimensional {
        let samples: Vec<(f64, f64)> = rows.into_iter().map(|(y, u, _)| (y, u)).collect();
        VelocityProfile::from_dimensional(meta, &samples)
    } else {
        let points = rows
            .into_iter()
            .map(|(y, u, _)| ProfilePoint::new(y, u))
            .collect::<Result<Vec<_>>>()?;
        VelocityProfile::new(meta, points)
    }
}

/// Write `profile` in the canonical format (always in wall units).
pub fn write_profile<W: Write>(profile: &VelocityProfile, mut sink: W) -> Result<()> {
    let m = profile.meta();
    writeln!(sink, "# label = {}", m.label)?;
    writeln!(sink, "# re_theta = {:.16e}", m.re_theta)?;
    writeln!(sink, "# u_free = {:.16e}", m.u_free)?;
    writeln!(sink, "# u_tau = {:.16e}", m.u_tau)?;
    writeln!(sink, "# nu = {:.16e}", m.nu)?;
    if let Some(theta) = m.momentum_thickness {
        writeln!(sink, "# momentum_thickness = {theta:.16e}")?;
    }
    writeln!(sink, "# units = wall")?;
    writeln!(sink)?;
    for p in profile.points() {
        writeln!(sink, "{:.16e}\t{:.16e}", p.y_plus, p.u_plus)?;
    }
    Ok(())
}

/// Serialize to a string; see [`write_profile`].
pub fn profile_to_string(profile: &VelocityProfile) -> String {
    let mut buf = Vec::new();
    write_profile(profile, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("canonical output is UTF-8")
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn meta() -> RunMetadata {
        RunMetadata::new(12345.0, 14.97, 0.53, 1.51e-5, "run-07").unwrap()
    }

    fn sample_profile() -> VelocityProfile {
        let points = (0..15)
            .map(|i| {
                let y = 90.0 * 1.31f64.powi(i) + 0.123456789;
                ProfilePoint::new(y, 8.4 * y.powf(0.1437)).unwrap()
            })
            .collect();
        let m = meta();
        let theta = m.re_theta * m.nu / m.u_free;
        VelocityProfile::new(m.with_momentum_thickness(theta).unwrap(), points).unwrap()
    }

    #[test]
    fn canonical_roundtrip_is_exact() {
        let prof = sample_profile();
        let text = profile_to_string(&prof);
        let back = parse_profile(Cursor::new(text.as_bytes()), FormatHint::Canonical).unwrap();
        // 17 significant digits round-trip every f64 bit-exactly.
        assert_eq!(prof, back);
    }

    #[test]
    fn too_few_rows_fails_with_profile_invariant() {
        let text = "\
# label = short
# re_theta = 12000
# u_free = 15
# u_tau = 0.5
# nu = 1.5e-5

100.0\t16.0
150.0\t17.0
200.0\t18.0
";
        let err = parse_profile(Cursor::new(text), FormatHint::Canonical).unwrap_err();
        assert!(matches!(err, Error::TooFewPoints { found: 3, min: 10 }));
    }

    #[test]
    fn negative_velocity_reports_line_number() {
        let mut text = String::from(
            "# re_theta = 12000\n# u_free = 15\n# u_tau = 0.5\n# nu = 1.5e-5\n\n",
        );
        for i in 0..6 {
            text.push_str(&format!("{}\t{}\n", 100.0 + i as f64, 16.0 + i as f64));
        }
        text.push_str("50.0  -3.2\n");
        let err = parse_profile(Cursor::new(text), FormatHint::Canonical).unwrap_err();
        match err {
            Error::Parse { line, message } => {
                assert_eq!(line, 12);
                assert!(message.contains("u_plus must be positive"), "{message}");
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn missing_metadata_lists_absent_keys() {
        let text = "# re_theta = 12000\n# u_free = 15\n\n100.0\t16.0\n";
        let err = parse_profile(Cursor::new(text), FormatHint::Canonical).unwrap_err();
        match err {
            Error::MissingMetadata { keys } => assert_eq!(keys, vec!["u_tau", "nu"]),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn non_monotone_rows_rejected() {
        let mut text = String::from(
            "# re_theta = 12000\n# u_free = 15\n# u_tau = 0.5\n# nu = 1.5e-5\n\n",
        );
        for i in 0..12 {
            let y = if i == 7 { 100.0 } else { 100.0 + 10.0 * i as f64 };
            text.push_str(&format!("{y}\t16.0\n"));
        }
        let err = parse_profile(Cursor::new(text), FormatHint::Canonical).unwrap_err();
        assert!(matches!(err, Error::UnorderedPoints { .. }));
    }

    #[test]
    fn dimensional_units_are_converted() {
        let prof = sample_profile();
        let m = prof.meta();
        let mut text = format!(
            "# re_theta = {:.16e}\n# u_free = {:.16e}\n# u_tau = {:.16e}\n# nu = {:.16e}\n# units = dimensional\n\n",
            m.re_theta, m.u_free, m.u_tau, m.nu
        );
        for p in prof.points() {
            let y = p.y_plus * m.nu / m.u_tau;
            let u = p.u_plus * m.u_tau;
            text.push_str(&format!("{y:.16e}\t{u:.16e}\n"));
        }
        let back = parse_profile(Cursor::new(text), FormatHint::Canonical).unwrap();
        for (a, b) in prof.points().iter().zip(back.points()) {
            assert!((a.y_plus - b.y_plus).abs() <= 1e-12 * a.y_plus);
            assert!((a.u_plus - b.u_plus).abs() <= 1e-12 * a.u_plus);
        }
    }

    #[test]
    fn whitespace_table_with_supplied_metadata() {
        let mut text = String::new();
        for i in 0..12 {
            text.push_str(&format!("{} {}\n", 100.0 + 25.0 * i as f64, 16.0 + i as f64));
        }
        let prof = parse_profile(
            Cursor::new(text),
            FormatHint::WhitespaceTable {
                meta: meta(),
                dimensional: false,
            },
        )
        .unwrap();
        assert_eq!(prof.len(), 12);
        assert_eq!(prof.meta().label, "run-07");
    }

    #[test]
    fn comment_lines_in_body_are_ignored() {
        let mut text = String::from(
            "# re_theta = 12000\n# u_free = 15\n# u_tau = 0.5\n# nu = 1.5e-5\n\n",
        );
        for i in 0..11 {
            if i == 5 {
                text.push_str("# instrument recalibrated here\n");
            }
            text.push_str(&format!("{}\t16.0e0\n", 100.0 + 10.0 * i as f64));
        }
        let prof = parse_profile(Cursor::new(text), FormatHint::Canonical).unwrap();
        assert_eq!(prof.len(), 11);
    }

    #[test]
    fn malformed_row_reports_line() {
        let mut text = String::from(
            "# re_theta = 12000\n# u_free = 15\n# u_tau = 0.5\n# nu = 1.5e-5\n\n",
        );
        text.push_str("100.0\t16.0\tEXTRA\n");
        let err = parse_profile(Cursor::new(text), FormatHint::Canonical).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 6, .. }));
    }
}
