//! Matrix file IO: headerless dense CSV and MatrixMarket `coordinate real
//! general`. Writers emit every value with 17 significant digits so a
//! save/load round trip is bit-exact for finite doubles.

use crate::error::{Error, Result};
use crate::matrix::ColumnMatrix;
use std::fs;
use std::path::Path;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MatrixFormat {
    DenseCsv,
    MatrixMarket,
}

/// Formats a float with 17 significant digits; parses back to the same bits.
pub fn format_f64(x: f64) -> String {
    format!("{:.16e}", x)
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        msg: msg.into(),
    }
}

pub fn load_matrix(path: &Path, format: MatrixFormat) -> Result<ColumnMatrix> {
    let text = read(path)?;
    match format {
        MatrixFormat::DenseCsv => parse_dense_csv(path, &text),
        MatrixFormat::MatrixMarket => parse_matrix_market(path, &text),
    }
}

/// Sniffs the format: a `%%MatrixMarket` banner means MatrixMarket,
/// anything else is treated as dense CSV.
pub fn detect_format(path: &Path) -> Result<MatrixFormat> {
    let text = read(path)?;
    if text.trim_start().starts_with("%%MatrixMarket") {
        Ok(MatrixFormat::MatrixMarket)
    } else {
        Ok(MatrixFormat::DenseCsv)
    }
}

fn parse_dense_csv(path: &Path, text: &str) -> Result<ColumnMatrix> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let lineno = lineno + 1;
        if line.trim().is_empty() {
            continue;
        }
        let mut row = Vec::new();
        for token in line.split(',') {
            let token = token.trim();
            let value: f64 = token
                .parse()
                .map_err(|_| parse_err(path, lineno, format!("cannot parse value {:?}", token)))?;
            if !value.is_finite() {
                return Err(parse_err(path, lineno, format!("non-finite value {:?}", token)));
            }
            row.push(value);
        }
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(parse_err(
                    path,
                    lineno,
                    format!("expected {} values, found {}", first.len(), row.len()),
                ));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() || rows[0].is_empty() {
        return Err(Error::EmptyMatrix);
    }
    let n_rows = rows.len();
    let n_cols = rows[0].len();
    let mut column_major = vec![0.0; n_rows * n_cols];
    for (i, row) in rows.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            column_major[j * n_rows + i] = v;
        }
    }
    ColumnMatrix::from_dense(n_rows, n_cols, column_major)
}

fn parse_matrix_market(path: &Path, text: &str) -> Result<ColumnMatrix> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| parse_err(path, 1, "empty file"))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() < 5
        || fields[0] != "%%MatrixMarket"
        || fields[1] != "matrix"
        || fields[2] != "coordinate"
        || fields[3] != "real"
        || fields[4] != "general"
    {
        return Err(parse_err(
            path,
            1,
            "expected header '%%MatrixMarket matrix coordinate real general'",
        ));
    }

    let mut dims: Option<(usize, usize, usize)> = None;
    let mut triplets: Vec<(usize, usize, f64)> = Vec::new();
    for (lineno, line) in lines {
        let lineno = lineno + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        let tokens: Vec<&str> = trimmed.split_whitespace().collect();
        match dims {
            None => {
                if tokens.len() != 3 {
                    return Err(parse_err(path, lineno, "expected 'rows cols nnz'"));
                }
                let m: usize = tokens[0]
                    .parse()
                    .map_err(|_| parse_err(path, lineno, "cannot parse row count"))?;
                let n: usize = tokens[1]
                    .parse()
                    .map_err(|_| parse_err(path, lineno, "cannot parse column count"))?;
                let nnz: usize = tokens[2]
                    .parse()
                    .map_err(|_| parse_err(path, lineno, "cannot parse entry count"))?;
                if m == 0 || n == 0 {
                    return Err(Error::EmptyMatrix);
                }
                dims = Some((m, n, nnz));
            }
            Some((m, n, nnz)) => {
                if triplets.len() == nnz {
                    return Err(parse_err(path, lineno, "more entries than declared"));
                }
                if tokens.len() != 3 {
                    return Err(parse_err(path, lineno, "expected 'i j value'"));
                }
                let i: usize = tokens[0]
                    .parse()
                    .map_err(|_| parse_err(path, lineno, "cannot parse row index"))?;
                let j: usize = tokens[1]
                    .parse()
                    .map_err(|_| parse_err(path, lineno, "cannot parse column index"))?;
                let v: f64 = tokens[2]
                    .parse()
                    .map_err(|_| parse_err(path, lineno, "cannot parse value"))?;
                if i == 0 || i > m || j == 0 || j > n {
                    return Err(parse_err(
                        path,
                        lineno,
                        format!("index ({}, {}) outside {}x{} (indices are 1-based)", i, j, m, n),
                    ));
                }
                if !v.is_finite() {
                    return Err(parse_err(path, lineno, "non-finite value"));
                }
                triplets.push((i - 1, j - 1, v));
            }
        }
    }
    let (m, n, nnz) = dims.ok_or_else(|| parse_err(path, 1, "missing dimension line"))?;
    if triplets.len() != nnz {
        return Err(parse_err(
            path,
            1,
            format!("declared {} entries, found {}", nnz, triplets.len()),
        ));
    }
    ColumnMatrix::from_triplets(m, n, &triplets).map_err(|e| match e {
        Error::InvalidParam(msg) => parse_err(path, 1, msg),
        other => other,
    })
}

pub fn save_matrix(m: &ColumnMatrix, path: &Path, format: MatrixFormat) -> Result<()> {
    let text = match format {
        MatrixFormat::DenseCsv => render_dense_csv(m),
        MatrixFormat::MatrixMarket => render_matrix_market(m),
    };
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn render_dense_csv(m: &ColumnMatrix) -> String {
    let mut out = String::new();
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            if j > 0 {
                out.push(',');
            }
            out.push_str(&format_f64(m.get(i, j)));
        }
        out.push('\n');
    }
    out
}

fn render_matrix_market(m: &ColumnMatrix) -> String {
    let mut entries: Vec<(usize, usize, f64)> = Vec::new();
    if let Some((col_ptr, row_idx, values)) = m.sparse_parts() {
        for j in 0..m.cols() {
            for p in col_ptr[j]..col_ptr[j + 1] {
                entries.push((row_idx[p], j, values[p]));
            }
        }
    } else {
        for j in 0..m.cols() {
            for i in 0..m.rows() {
                let v = m.get(i, j);
                if v != 0.0 {
                    entries.push((i, j, v));
                }
            }
        }
    }
    let mut out = String::from("%%MatrixMarket matrix coordinate real general\n");
    out.push_str(&format!("{} {} {}\n", m.rows(), m.cols(), entries.len()));
    for (i, j, v) in entries {
        out.push_str(&format!("{} {} {}\n", i + 1, j + 1, format_f64(v)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_temp(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn csv_three_by_three() {
        let f = write_temp("1,0,1\n1,-1,0\n0,1,1");
        let m = load_matrix(f.path(), MatrixFormat::DenseCsv).unwrap();
        assert_eq!((m.rows(), m.cols()), (3, 3));
        assert_eq!(m.get(1, 1), -1.0);
        assert_eq!(m.frobenius_sq(), 6.0);
    }

    #[test]
    fn csv_single_value() {
        let f = write_temp("5");
        let m = load_matrix(f.path(), MatrixFormat::DenseCsv).unwrap();
        assert_eq!((m.rows(), m.cols()), (1, 1));
        assert_eq!(m.get(0, 0), 5.0);
    }

    #[test]
    fn csv_reports_line_numbers() {
        let f = write_temp("1,2\n3,oops\n");
        match load_matrix(f.path(), MatrixFormat::DenseCsv) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {:?}", other.map(|_| ())),
        }
    }

    #[test]
    fn csv_rejects_non_finite_and_ragged() {
        let f = write_temp("1,2\nNaN,3\n");
        assert!(load_matrix(f.path(), MatrixFormat::DenseCsv).is_err());
        let g = write_temp("1,2\n3\n");
        assert!(load_matrix(g.path(), MatrixFormat::DenseCsv).is_err());
        let e = write_temp("");
        assert!(matches!(
            load_matrix(e.path(), MatrixFormat::DenseCsv),
            Err(Error::EmptyMatrix)
        ));
    }

    #[test]
    fn matrix_market_single_entry() {
        let f = write_temp("%%MatrixMarket matrix coordinate real general\n2 2 1\n1 1 2.0\n");
        let m = load_matrix(f.path(), MatrixFormat::MatrixMarket).unwrap();
        assert!(m.is_sparse());
        assert_eq!((m.rows(), m.cols()), (2, 2));
        assert_eq!(m.get(0, 0), 2.0);
        assert_eq!(m.get(0, 1), 0.0);
    }

    #[test]
    fn matrix_market_rejects_bad_headers_and_counts() {
        let f = write_temp("%%MatrixMarket matrix coordinate complex general\n1 1 0\n");
        assert!(load_matrix(f.path(), MatrixFormat::MatrixMarket).is_err());
        let g = write_temp("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1.0\n");
        assert!(load_matrix(g.path(), MatrixFormat::MatrixMarket).is_err());
    }

    #[test]
    fn detect_format_sniffs_banner() {
        let f = write_temp("%%MatrixMarket matrix coordinate real general\n1 1 1\n1 1 3.5\n");
        assert_eq!(detect_format(f.path()).unwrap(), MatrixFormat::MatrixMarket);
        let g = write_temp("1,2\n");
        assert_eq!(detect_format(g.path()).unwrap(), MatrixFormat::DenseCsv);
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let m = ColumnMatrix::from_dense(
            2,
            3,
            vec![
                1.0 / 3.0,
                -2.718281828459045,
                0.0,
                1e-300,
                6.02214076e23,
                -0.1,
            ],
        )
        .unwrap();
        for format in [MatrixFormat::DenseCsv, MatrixFormat::MatrixMarket] {
            let f = tempfile::NamedTempFile::new().unwrap();
            save_matrix(&m, f.path(), format).unwrap();
            let back = load_matrix(f.path(), format).unwrap();
            assert_eq!((back.rows(), back.cols()), (2, 3));
            for i in 0..2 {
                for j in 0..3 {
                    assert_eq!(m.get(i, j).to_bits(), back.get(i, j).to_bits());
                }
            }
        }
    }

    #[test]
    fn missing_file_is_io_error() {
        let p = Path::new("/nonexistent/matrix.csv");
        assert!(matches!(
            load_matrix(p, MatrixFormat::DenseCsv),
            Err(Error::Io { .. })
        ));
    }
}
