//! Matrix Market coordinate files for symmetric sparse matrices, and plain
//! dumps of dense blocks.

use super::dense::DenseMatrix;
use super::sparse::SparseSymMatrix;
use crate::{Error, Result};
use std::io::{BufRead, Write};

/// Write the lower triangle in `coordinate real symmetric` format.
pub fn write_matrix_market<W: Write>(k: &SparseSymMatrix, mut out: W) -> Result<()> {
    let lower = k.lower_rows();
    let nnz: usize = lower.iter().map(|r| r.len()).sum();
    writeln!(out, "%%MatrixMarket matrix coordinate real symmetric")?;
    writeln!(out, "{} {} {}", k.n(), k.n(), nnz)?;
    // Column-major order of the lower triangle is the row-major order of
    // the upper one; emit row by row which readers accept either way.
    for (i, row) in lower.iter().enumerate() {
        for &(j, v) in row {
            writeln!(out, "{} {} {:.17e}", i + 1, j + 1, v)?;
        }
    }
    Ok(())
}

pub fn read_matrix_market<R: BufRead>(input: R) -> Result<SparseSymMatrix> {
    let mut lines = input.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty file".into()))??;
    let h = header.to_ascii_lowercase();
    if !h.starts_with("%%matrixmarket matrix coordinate") {
        return Err(Error::Parse(format!("unsupported header: {header}")));
    }
    let symmetric = h.contains("symmetric");
    let mut size: Option<(usize, usize)> = None;
    let mut triplets = Vec::new();
    for line in lines {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        let parts: Vec<&str> = t.split_whitespace().collect();
        match size {
            None => {
                if parts.len() < 3 {
                    return Err(Error::Parse(format!("bad size line: {t}")));
                }
                let r: usize = parse(parts[0])?;
                let c: usize = parse(parts[1])?;
                if r != c {
                    return Err(Error::DimensionMismatch { expected: r, got: c });
                }
                size = Some((r, parse(parts[2])?));
            }
            Some((n, _)) => {
                if parts.len() < 3 {
                    return Err(Error::Parse(format!("bad entry: {t}")));
                }
                let i: usize = parse(parts[0])?;
                let j: usize = parse(parts[1])?;
                let v: f64 = parse(parts[2])?;
                if i == 0 || j == 0 || i > n || j > n {
                    return Err(Error::Parse(format!("index out of range: {t}")));
                }
                triplets.push((i - 1, j - 1, v));
                if symmetric && i != j {
                    triplets.push((j - 1, i - 1, v));
                }
            }
        }
    }
    let (n, _) = size.ok_or_else(|| Error::Parse("missing size line".into()))?;
    let mut m = SparseSymMatrix::from_triplets(n, &triplets)?;
    m.verify_symmetry()?;
    Ok(m)
}

fn parse<T: std::str::FromStr>(s: &str) -> Result<T> {
    s.parse()
        .map_err(|_| Error::Parse(format!("cannot parse '{s}'")))
}

/// Text dump: a `rows cols` line followed by one row per line.
pub fn write_dense_text<W: Write>(a: &DenseMatrix, mut out: W) -> Result<()> {
    writeln!(out, "{} {}", a.rows(), a.cols())?;
    for i in 0..a.rows() {
        let row: Vec<String> = (0..a.cols()).map(|j| format!("{:.17e}", a[(i, j)])).collect();
        writeln!(out, "{}", row.join(" "))?;
    }
    Ok(())
}

/// Binary dump: little-endian `u64` rows, `u64` cols, then column-major
/// `f64` values.
pub fn write_dense_binary<W: Write>(a: &DenseMatrix, mut out: W) -> Result<()> {
    out.write_all(&(a.rows() as u64).to_le_bytes())?;
    out.write_all(&(a.cols() as u64).to_le_bytes())?;
    for v in a.as_slice() {
        out.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_dense_binary<R: std::io::Read>(mut input: R) -> Result<DenseMatrix> {
    let mut b8 = [0u8; 8];
    input.read_exact(&mut b8)?;
    let rows = u64::from_le_bytes(b8) as usize;
    input.read_exact(&mut b8)?;
    let cols = u64::from_le_bytes(b8) as usize;
    let mut data = Vec::with_capacity(rows * cols);
    for _ in 0..rows * cols {
        input.read_exact(&mut b8)?;
        data.push(f64::from_le_bytes(b8));
    }
    DenseMatrix::from_col_major(rows, cols, data)
}
