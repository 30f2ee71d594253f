//! Matrix Market coordinate and array files with real or integer entries.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use fovexpm_core::linalg::SparseMatrix;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
    SkewSymmetric,
}

/// Parses Matrix Market text. `origin` is only used in error messages.
pub fn parse_matrix_market(text: &str, origin: &Path) -> Result<SparseMatrix<f64>> {
    let err = |line: usize, msg: &str| CliError::parse(origin, line, msg);
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, banner) = lines.next().ok_or_else(|| err(1, "empty file"))?;
    let words: Vec<String> = banner.split_whitespace().map(str::to_ascii_lowercase).collect();
    if words.len() != 5 || words[0] != "%%matrixmarket" || words[1] != "matrix" {
        return Err(err(1, "expected '%%MatrixMarket matrix <format> <field> <symmetry>'"));
    }
    let coordinate = match words[2].as_str() {
        "coordinate" => true,
        "array" => false,
        _ => return Err(err(1, "format must be coordinate or array")),
    };
    if !matches!(words[3].as_str(), "real" | "integer" | "double") {
        return Err(err(1, "only real and integer fields are supported"));
    }
    let symmetry = match words[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        "skew-symmetric" => Symmetry::SkewSymmetric,
        _ => return Err(err(1, "symmetry must be general, symmetric or skew-symmetric")),
    };
    let mut data = lines.filter(|(_, l)| {
        let t = l.trim();
        !t.is_empty() && !t.starts_with('%')
    });
    let (size_line, size) = data.next().ok_or_else(|| err(1, "missing size line"))?;
    let dims: Vec<usize> = size
        .split_whitespace()
        .map(|w| w.parse().map_err(|_| err(size_line, "bad size line")))
        .collect::<Result<_>>()?;
    let number = |line: usize, w: &str| -> Result<f64> {
        let v: f64 = w.parse().map_err(|_| err(line, "bad number"))?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(err(line, "non-finite entry"))
        }
    };
    let mut triplets = Vec::new();
    let push = |t: &mut Vec<(usize, usize, f64)>, i: usize, j: usize, v: f64| {
        t.push((i, j, v));
        if i != j {
            match symmetry {
                Symmetry::General => {}
                Symmetry::Symmetric => t.push((j, i, v)),
                Symmetry::SkewSymmetric => t.push((j, i, -v)),
            }
        }
    };
    let (rows, cols) = if coordinate {
        let [rows, cols, nnz] = dims[..] else {
            return Err(err(size_line, "coordinate size line needs rows, columns and entries"));
        };
        let mut count = 0;
        for (line, l) in data {
            let w: Vec<&str> = l.split_whitespace().collect();
            if w.len() != 3 {
                return Err(err(line, "expected 'row column value'"));
            }
            let i: usize = w[0].parse().map_err(|_| err(line, "bad row index"))?;
            let j: usize = w[1].parse().map_err(|_| err(line, "bad column index"))?;
            if i == 0 || j == 0 || i > rows || j > cols {
                return Err(err(line, "index out of range"));
            }
            if symmetry != Symmetry::General && j > i {
                return Err(err(line, "symmetric files store the lower triangle only"));
            }
            if symmetry == Symmetry::SkewSymmetric && i == j {
                return Err(err(line, "skew-symmetric files have no diagonal entries"));
            }
            push(&mut triplets, i - 1, j - 1, number(line, w[2])?);
            count += 1;
        }
        if count != nnz {
            return Err(err(size_line, &format!("header declares {nnz} entries, found {count}")));
        }
        (rows, cols)
    } else {
        let [rows, cols] = dims[..] else {
            return Err(err(size_line, "array size line needs rows and columns"));
        };
        // column-major; symmetric variants list the lower triangle by columns
        let mut slots = (0..cols).flat_map(|j| (0..rows).map(move |i| (i, j))).filter(|&(i, j)| match symmetry {
            Symmetry::General => true,
            Symmetry::Symmetric => i >= j,
            Symmetry::SkewSymmetric => i > j,
        });
        for (line, l) in data {
            for w in l.split_whitespace() {
                let (i, j) = slots.next().ok_or_else(|| err(line, "too many entries"))?;
                let v = number(line, w)?;
                if v != 0.0 {
                    push(&mut triplets, i, j, v);
                }
            }
        }
        if slots.next().is_some() {
            return Err(err(size_line, "too few entries"));
        }
        (rows, cols)
    };
    Ok(SparseMatrix::from_triplets(rows, cols, &triplets)?)
}

pub fn read_matrix_market(path: &Path) -> Result<SparseMatrix<f64>> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_matrix_market(&text, path)
}

/// Coordinate format, general symmetry, entries with 17 significant digits
/// so that the values round-trip exactly.
pub fn format_matrix_market(a: &SparseMatrix<f64>, comment: Option<&str>) -> String {
    let mut out = String::from("%%MatrixMarket matrix coordinate real general\n");
    if let Some(c) = comment {
        for line in c.lines() {
            let _ = writeln!(out, "% {line}");
        }
    }
    let _ = writeln!(out, "{} {} {}", a.rows(), a.cols(), a.nnz());
    for (i, j, v) in a.triplets() {
        let _ = writeln!(out, "{} {} {:.16e}", i + 1, j + 1, v);
    }
    out
}

pub fn write_matrix_market(path: &Path, a: &SparseMatrix<f64>, comment: Option<&str>) -> Result<()> {
    fs::write(path, format_matrix_market(a, comment)).map_err(|e| CliError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn parse(text: &str) -> Result<SparseMatrix<f64>> {
        parse_matrix_market(text, Path::new("test.mtx"))
    }

    #[test]
    fn symmetric_coordinate_expands() {
        let a = parse("%%MatrixMarket matrix coordinate real symmetric\n% c\n2 2 2\n1 1 4\n2 1 -1\n").unwrap();
        assert_eq!(a.get(0, 1), -1.0);
        assert_eq!(a.get(1, 0), -1.0);
        assert_eq!(a.get(0, 0), 4.0);
        assert_eq!(a.nnz(), 3);
    }

    #[test]
    fn skew_and_array_formats() {
        let s = parse("%%MatrixMarket matrix coordinate real skew-symmetric\n2 2 1\n2 1 3\n").unwrap();
        assert_eq!((s.get(1, 0), s.get(0, 1)), (3.0, -3.0));
        let a = parse("%%MatrixMarket matrix array real general\n2 2\n1\n2\n3\n4\n").unwrap();
        assert_eq!((a.get(0, 0), a.get(1, 0), a.get(0, 1), a.get(1, 1)), (1.0, 2.0, 3.0, 4.0));
        let b = parse("%%MatrixMarket matrix array integer symmetric\n2 2\n1 2\n5\n").unwrap();
        assert_eq!((b.get(0, 1), b.get(1, 0), b.get(1, 1)), (2.0, 2.0, 5.0));
    }

    #[test]
    fn malformed_inputs_are_reported_with_lines() {
        let cases = [
            "",
            "%%MatrixMarket matrix coordinate complex general\n1 1 1\n1 1 1\n",
            "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1\n",
            "%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1\n",
            "%%MatrixMarket matrix coordinate real symmetric\n2 2 1\n1 2 1\n",
            "%%MatrixMarket matrix coordinate real general\n1 1 1\n1 1 nan\n",
            "%%MatrixMarket matrix array real general\n2 2\n1 2 3\n",
        ];
        for c in cases {
            assert!(matches!(parse(c), Err(CliError::Parse { .. })), "{c:?}");
        }
        match parse("%%MatrixMarket matrix coordinate real general\n2 2 1\n% x\n1 x 1\n") {
            Err(CliError::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("{other:?}"),
        }
    }

    proptest! {
        #[test]
        fn round_trip_is_exact(
            entries in proptest::collection::vec((0usize..6, 0usize..5, -1e6f64..1e6), 0..30)
        ) {
            let a = SparseMatrix::from_triplets(6, 5, &entries).unwrap();
            let b = parse(&format_matrix_market(&a, Some("round trip"))).unwrap();
            prop_assert_eq!(a.triplets(), b.triplets());
        }
    }
}
