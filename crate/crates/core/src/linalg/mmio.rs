//! Matrix Market coordinate format (real, general) for debugging exports.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};

use super::CsrMatrix;

pub fn write_matrix_market<W: Write>(a: &CsrMatrix, mut out: W) -> Result<()> {
    writeln!(out, "%%MatrixMarket matrix coordinate real general")?;
    writeln!(out, "{} {} {}", a.nrows(), a.ncols(), a.nnz())?;
    for i in 0..a.nrows() {
        let (cols, vals) = a.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            writeln!(out, "{} {} {:.17e}", i + 1, j + 1, v)?;
        }
    }
    Ok(())
}

/// Reads `general` and `symmetric` real coordinate files.
pub fn read_matrix_market<R: BufRead>(input: R) -> Result<CsrMatrix> {
    let mut lines = input.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty Matrix Market file".into()))??;
    let h = header.to_ascii_lowercase();
    if !h.starts_with("%%matrixmarket matrix coordinate") {
        return Err(Error::Parse(format!("unsupported header: {header}")));
    }
    if h.contains("complex") || h.contains("pattern") {
        return Err(Error::Parse("only real coordinate matrices are supported".into()));
    }
    let symmetric = h.contains("symmetric");
    let mut size: Option<(usize, usize, usize)> = None;
    let mut trip = Vec::new();
    for line in lines {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        let f: Vec<&str> = t.split_whitespace().collect();
        let bad = || Error::Parse(format!("malformed line: {t}"));
        match size {
            None => {
                if f.len() != 3 {
                    return Err(bad());
                }
                let p = |s: &str| s.parse::<usize>().map_err(|_| bad());
                size = Some((p(f[0])?, p(f[1])?, p(f[2])?));
            }
            Some((m, n, _)) => {
                if f.len() != 3 {
                    return Err(bad());
                }
                let i: usize = f[0].parse().map_err(|_| bad())?;
                let j: usize = f[1].parse().map_err(|_| bad())?;
                let v: f64 = f[2].parse().map_err(|_| bad())?;
                if i == 0 || j == 0 || i > m || j > n {
                    return Err(bad());
                }
                trip.push((i - 1, j - 1, v));
                if symmetric && i != j {
                    trip.push((j - 1, i - 1, v));
                }
            }
        }
    }
    let (m, n, nnz) = size.ok_or_else(|| Error::Parse("missing size line".into()))?;
    let expected = if symmetric { trip.len() } else { nnz };
    if !symmetric && trip.len() != expected {
        return Err(Error::Parse(format!("expected {nnz} entries, found {}", trip.len())));
    }
    Ok(CsrMatrix::from_triplets(m, n, trip))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let a = CsrMatrix::from_dense(&[vec![1.0, 0.0, -2.5], vec![0.0, 1e-17, 3.0]]);
        let mut buf = Vec::new();
        write_matrix_market(&a, &mut buf).unwrap();
        let b = read_matrix_market(buf.as_slice()).unwrap();
        assert_eq!(a.to_dense(), b.to_dense());
    }

    #[test]
    fn symmetric_files_are_expanded() {
        let txt = "%%MatrixMarket matrix coordinate real symmetric\n2 2 2\n1 1 4\n2 1 1\n";
        let b = read_matrix_market(txt.as_bytes()).unwrap();
        assert_eq!(b.to_dense(), vec![vec![4.0, 1.0], vec![1.0, 0.0]]);
    }
}
