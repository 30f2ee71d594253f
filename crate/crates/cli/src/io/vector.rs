//! Plain-text vectors: one value per line, `#` starts a comment.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{CliError, Result};

pub fn parse_vector(text: &str, origin: &Path) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        for w in content.split_whitespace() {
            let v: f64 = w.parse().map_err(|_| CliError::parse(origin, i + 1, format!("bad number '{w}'")))?;
            if !v.is_finite() {
                return Err(CliError::parse(origin, i + 1, "non-finite entry"));
            }
            out.push(v);
        }
    }
    Ok(out)
}

pub fn read_vector(path: &Path) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_vector(&text, path)
}

pub fn format_vector(v: &[f64], comment: Option<&str>) -> String {
    let mut out = String::new();
    if let Some(c) = comment {
        for line in c.lines() {
            let _ = writeln!(out, "# {line}");
        }
    }
    for x in v {
        let _ = writeln!(out, "{x:.16e}");
    }
    out
}

pub fn write_vector(path: &Path, v: &[f64], comment: Option<&str>) -> Result<()> {
    fs::write(path, format_vector(v, comment)).map_err(|e| CliError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn comments_and_blank_lines() {
        let v = parse_vector("# header\n1.5\n\n  -2e-3 # trailing\n", Path::new("b.txt")).unwrap();
        assert_eq!(v, vec![1.5, -2e-3]);
        assert!(parse_vector("1\nabc\n", Path::new("b.txt")).is_err());
        assert!(parse_vector("inf\n", Path::new("b.txt")).is_err());
    }

    proptest! {
        #[test]
        fn round_trip_is_exact(v in proptest::collection::vec(-1e300f64..1e300, 0..50)) {
            let back = parse_vector(&format_vector(&v, Some("x")), Path::new("b.txt")).unwrap();
            prop_assert_eq!(v, back);
        }
    }
}
