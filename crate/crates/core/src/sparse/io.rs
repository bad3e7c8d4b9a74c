use std::io::{BufRead, Read, Write};

use super::SparseSymMatrix;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Copy, PartialEq)]
enum Field {
    Real,
    Integer,
    Pattern,
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

/// Reads a square Matrix Market coordinate file (`real`, `integer` or `pattern`
/// entries; `symmetric` or `general` storage). Pattern entries read as 1.
/// General files must describe a symmetric matrix.
pub fn read_matrix_market<T: Scalar, R: BufRead>(reader: R) -> Result<SparseSymMatrix<T>> {
    let mut lines = reader.lines().enumerate().map(|(k, l)| (k + 1, l));
    let (_, header) = lines.next().ok_or_else(|| parse_err(1, "empty input"))?;
    let header = header?;
    let tokens: Vec<String> = header.split_whitespace().map(str::to_ascii_lowercase).collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(parse_err(1, "expected '%%MatrixMarket matrix <format> <field> <symmetry>'"));
    }
    if tokens[2] != "coordinate" {
        return Err(parse_err(1, format!("unsupported format '{}'", tokens[2])));
    }
    let field = match tokens[3].as_str() {
        "real" => Field::Real,
        "integer" => Field::Integer,
        "pattern" => Field::Pattern,
        other => return Err(parse_err(1, format!("unsupported field '{other}'"))),
    };
    let symmetric = match tokens[4].as_str() {
        "symmetric" => true,
        "general" => false,
        other => return Err(parse_err(1, format!("unsupported symmetry '{other}'"))),
    };

    let mut size: Option<(usize, usize)> = None;
    let mut triplets: Vec<(usize, usize, T)> = Vec::new();
    for (lineno, line) in lines {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        let parts: Vec<&str> = t.split_whitespace().collect();
        match size {
            None => {
                if parts.len() != 3 {
                    return Err(parse_err(lineno, "expected 'rows cols entries'"));
                }
                let num = |s: &str| s.parse::<usize>().map_err(|_| parse_err(lineno, format!("bad integer '{s}'")));
                let (r, c, k) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
                if r != c {
                    return Err(parse_err(lineno, format!("matrix is {r} x {c}, expected square")));
                }
                size = Some((r, k));
                triplets.reserve(k);
            }
            Some((n, _)) => {
                let want = if field == Field::Pattern { 2 } else { 3 };
                if parts.len() < want {
                    return Err(parse_err(lineno, format!("expected {want} fields")));
                }
                let idx = |s: &str| -> Result<usize> {
                    let v = s.parse::<usize>().map_err(|_| parse_err(lineno, format!("bad index '{s}'")))?;
                    if v == 0 || v > n {
                        return Err(parse_err(lineno, format!("index {v} out of range 1..={n}")));
                    }
                    Ok(v - 1)
                };
                let (i, j) = (idx(parts[0])?, idx(parts[1])?);
                let v = match field {
                    Field::Pattern => T::one(),
                    Field::Integer => {
                        let x = parts[2]
                            .parse::<i64>()
                            .map_err(|_| parse_err(lineno, format!("bad integer '{}'", parts[2])))?;
                        T::lit(x as f64)
                    }
                    Field::Real => {
                        let x = parts[2]
                            .parse::<f64>()
                            .map_err(|_| parse_err(lineno, format!("bad real '{}'", parts[2])))?;
                        T::lit(x)
                    }
                };
                triplets.push((i, j, v));
            }
        }
    }
    let (n, k) = size.ok_or_else(|| parse_err(1, "missing size line"))?;
    if triplets.len() != k {
        return Err(parse_err(0, format!("expected {k} entries, found {}", triplets.len())));
    }
    if symmetric {
        SparseSymMatrix::from_upper_triplets(n, &triplets)
    } else {
        SparseSymMatrix::from_triplets(n, &triplets)
    }
}

/// Writes the upper triangle as `%%MatrixMarket matrix coordinate real symmetric`.
pub fn write_matrix_market<T: Scalar, W: Write>(m: &SparseSymMatrix<T>, mut w: W) -> Result<()> {
    let upper: Vec<(usize, usize, T)> = (0..m.n())
        .flat_map(|i| m.row(i).filter(move |&(j, _)| j >= i).map(move |(j, v)| (i, j, v)))
        .collect();
    writeln!(w, "%%MatrixMarket matrix coordinate real symmetric")?;
    writeln!(w, "{} {} {}", m.n(), m.n(), upper.len())?;
    for (i, j, v) in upper {
        writeln!(w, "{} {} {}", i + 1, j + 1, v)?;
    }
    Ok(())
}

const MAGIC: &[u8; 4] = b"ENTR";
const VERSION: u32 = 1;

/// Binary cache: magic `ENTR`, version, `n`, `nnz`, then CSR arrays
/// (indices as little-endian u64, values as little-endian f64).
pub fn write_binary<T: Scalar, W: Write>(m: &SparseSymMatrix<T>, mut w: W) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(m.n() as u64).to_le_bytes())?;
    w.write_all(&(m.nnz() as u64).to_le_bytes())?;
    for &p in m.row_ptr() {
        w.write_all(&(p as u64).to_le_bytes())?;
    }
    for &c in m.col_idx() {
        w.write_all(&(c as u64).to_le_bytes())?;
    }
    for &v in m.values() {
        w.write_all(&v.as_f64().to_le_bytes())?;
    }
    Ok(())
}

pub fn read_binary<T: Scalar, R: Read>(mut r: R) -> Result<SparseSymMatrix<T>> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(parse_err(0, "missing ENTR magic"));
    }
    let mut b4 = [0u8; 4];
    r.read_exact(&mut b4)?;
    if u32::from_le_bytes(b4) != VERSION {
        return Err(parse_err(0, "unsupported binary cache version"));
    }
    let mut b8 = [0u8; 8];
    let mut read_u64 = |r: &mut R| -> Result<u64> {
        r.read_exact(&mut b8)?;
        Ok(u64::from_le_bytes(b8))
    };
    let n = read_u64(&mut r)? as usize;
    let nnz = read_u64(&mut r)? as usize;
    let row_ptr = (0..=n).map(|_| read_u64(&mut r).map(|v| v as usize)).collect::<Result<Vec<_>>>()?;
    let col_idx = (0..nnz).map(|_| read_u64(&mut r).map(|v| v as usize)).collect::<Result<Vec<_>>>()?;
    let values = (0..nnz)
        .map(|_| read_u64(&mut r).map(|v| T::lit(f64::from_bits(v))))
        .collect::<Result<Vec<_>>>()?;
    SparseSymMatrix::from_csr(n, row_ptr, col_idx, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pattern_symmetric_file() {
        let text = "%%MatrixMarket matrix coordinate pattern symmetric\n% comment\n3 3 2\n2 1\n3 2\n";
        let m: SparseSymMatrix<f64> = read_matrix_market(text.as_bytes()).unwrap();
        assert_eq!(m.nnz(), 4);
        assert_eq!(m.get(0, 1), Some(1.0));
        assert_eq!(m.get(1, 2), Some(1.0));
    }

    #[test]
    fn general_file_must_be_symmetric() {
        let ok = "%%MatrixMarket matrix coordinate integer general\n2 2 2\n1 2 3\n2 1 3\n";
        let m: SparseSymMatrix<f64> = read_matrix_market(ok.as_bytes()).unwrap();
        assert_eq!(m.get(1, 0), Some(3.0));
        let bad = "%%MatrixMarket matrix coordinate real general\n2 2 1\n1 2 3\n";
        assert!(read_matrix_market::<f64, _>(bad.as_bytes()).is_err());
    }

    #[test]
    fn errors_carry_line_numbers() {
        let text = "%%MatrixMarket matrix coordinate real symmetric\n3 3 1\n1 x 2.0\n";
        match read_matrix_market::<f64, _>(text.as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        let header = "%%MatrixMarket matrix array real general\n";
        assert!(matches!(read_matrix_market::<f64, _>(header.as_bytes()), Err(Error::Parse { line: 1, .. })));
    }
}
