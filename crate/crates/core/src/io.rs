//! File formats: matrix JSON, plain-text matrices, and vector-set JSON.
//!
//! Matrix JSON: `{"rows": n, "cols": m, "data": [[re, im], ...]}` row-major.
//! Plain text: one row per line, entries `re+imj` separated by whitespace.
//! Vector sets: `{"d": n, "vectors": [[[re, im], ...], ...]}`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::numerics::{all_finite, CMatrix};
use crate::{Error, Result};

#[derive(Serialize, Deserialize)]
struct MatrixJson {
    rows: usize,
    cols: usize,
    data: Vec<[f64; 2]>,
}

#[derive(Serialize, Deserialize)]
struct VectorSetJson {
    d: usize,
    vectors: Vec<Vec<[f64; 2]>>,
}

pub fn matrix_to_json(m: &CMatrix) -> String {
    let data = (0..m.nrows())
        .flat_map(|i| (0..m.ncols()).map(move |j| (i, j)))
        .map(|(i, j)| [m[(i, j)].re, m[(i, j)].im])
        .collect();
    serde_json::to_string_pretty(&MatrixJson {
        rows: m.nrows(),
        cols: m.ncols(),
        data,
    })
    .expect("matrix serialization cannot fail")
}

pub fn matrix_from_json(text: &str) -> Result<CMatrix> {
    let raw: MatrixJson =
        serde_json::from_str(text).map_err(|e| Error::Format(format!("matrix json: {e}")))?;
    if raw.data.len() != raw.rows * raw.cols {
        return Err(Error::Format(format!(
            "matrix json: expected {} entries, found {}",
            raw.rows * raw.cols,
            raw.data.len()
        )));
    }
    let m = CMatrix::from_fn(raw.rows, raw.cols, |i, j| {
        let [re, im] = raw.data[i * raw.cols + j];
        Complex64::new(re, im)
    });
    if !all_finite(&m) {
        return Err(Error::Format("matrix json: non-finite entry".into()));
    }
    Ok(m)
}

/// Parses one complex scalar in the `re+imj` / `re-imj` / `re` / `imj` forms.
pub fn parse_complex(token: &str) -> Result<Complex64> {
    let t = token.trim();
    if t.is_empty() {
        return Err(Error::Format("empty complex token".into()));
    }
    if let Some(body) = t.strip_suffix(['j', 'i']) {
        // split at the last +/- that is not an exponent sign and not leading
        let bytes = body.as_bytes();
        let mut split = None;
        for i in (1..bytes.len()).rev() {
            let c = bytes[i] as char;
            if (c == '+' || c == '-') && !matches!(bytes[i - 1] as char, 'e' | 'E') {
                split = Some(i);
                break;
            }
        }
        match split {
            Some(i) => {
                let re: f64 = body[..i]
                    .parse()
                    .map_err(|_| Error::Format(format!("bad real part in {t:?}")))?;
                let imtxt = &body[i..];
                let im: f64 = if imtxt == "+" {
                    1.0
                } else if imtxt == "-" {
                    -1.0
                } else {
                    imtxt
                        .parse()
                        .map_err(|_| Error::Format(format!("bad imaginary part in {t:?}")))?
                };
                Ok(Complex64::new(re, im))
            }
            None => {
                let im: f64 = if body.is_empty() {
                    1.0
                } else if body == "-" {
                    -1.0
                } else {
                    body.parse()
                        .map_err(|_| Error::Format(format!("bad imaginary token {t:?}")))?
                };
                Ok(Complex64::new(0.0, im))
            }
        }
    } else {
        let re: f64 = t
            .parse()
            .map_err(|_| Error::Format(format!("bad real token {t:?}")))?;
        Ok(Complex64::new(re, 0.0))
    }
}

pub fn format_complex(z: Complex64) -> String {
    if z.im >= 0.0 {
        format!("{:+.17e}+{:.17e}j", z.re, z.im)
    } else {
        format!("{:+.17e}-{:.17e}j", z.re, -z.im)
    }
}

pub fn matrix_to_text(m: &CMatrix) -> String {
    let mut out = String::new();
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| format_complex(m[(i, j)])).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

pub fn matrix_from_text(text: &str) -> Result<CMatrix> {
    let mut rows: Vec<Vec<Complex64>> = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row: Result<Vec<Complex64>> = line.split_whitespace().map(parse_complex).collect();
        rows.push(row?);
    }
    if rows.is_empty() {
        return Err(Error::Format("empty matrix text".into()));
    }
    let cols = rows[0].len();
    if rows.iter().any(|r| r.len() != cols) {
        return Err(Error::Format("ragged matrix text".into()));
    }
    let m = CMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j]);
    if !all_finite(&m) {
        return Err(Error::Format("non-finite entry in matrix text".into()));
    }
    Ok(m)
}

/// Loads a matrix from a file, auto-detecting JSON versus plain text.
pub fn read_matrix(path: &std::path::Path) -> Result<CMatrix> {
    let text = std::fs::read_to_string(path)?;
    if text.trim_start().starts_with('{') {
        matrix_from_json(&text)
    } else {
        matrix_from_text(&text)
    }
}

pub fn write_matrix(path: &std::path::Path, m: &CMatrix) -> Result<()> {
    std::fs::write(path, matrix_to_json(m))?;
    Ok(())
}

pub fn vectors_to_json(d: usize, vectors: &[Vec<Complex64>]) -> String {
    let vs = vectors
        .iter()
        .map(|v| v.iter().map(|z| [z.re, z.im]).collect())
        .collect();
    serde_json::to_string_pretty(&VectorSetJson { d, vectors: vs })
        .expect("vector-set serialization cannot fail")
}

pub fn vectors_from_json(text: &str) -> Result<(usize, Vec<Vec<Complex64>>)> {
    let raw: VectorSetJson =
        serde_json::from_str(text).map_err(|e| Error::Format(format!("vector-set json: {e}")))?;
    if raw.vectors.is_empty() {
        return Err(Error::Format("vector-set json: no vectors".into()));
    }
    let mut out = Vec::with_capacity(raw.vectors.len());
    for v in &raw.vectors {
        if v.len() != raw.d {
            return Err(Error::Format(format!(
                "vector-set json: vector of length {} in dimension {}",
                v.len(),
                raw.d
            )));
        }
        let w: Vec<Complex64> = v.iter().map(|&[re, im]| Complex64::new(re, im)).collect();
        if w.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Format("vector-set json: non-finite entry".into()));
        }
        out.push(w);
    }
    Ok((raw.d, out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::random_complex;

    #[test]
    fn json_round_trip() {
        let m = random_complex(4, 3);
        let back = matrix_from_json(&matrix_to_json(&m)).unwrap();
        assert!((m - back).norm() < 1e-15);
    }

    #[test]
    fn text_round_trip() {
        let m = random_complex(3, 4);
        let back = matrix_from_text(&matrix_to_text(&m)).unwrap();
        assert!((m - back).norm() < 1e-12);
    }

    #[test]
    fn parses_real_only_tokens() {
        assert_eq!(parse_complex("2.5").unwrap(), Complex64::new(2.5, 0.0));
        assert_eq!(parse_complex("-1").unwrap(), Complex64::new(-1.0, 0.0));
        assert_eq!(parse_complex("3j").unwrap(), Complex64::new(0.0, 3.0));
        assert_eq!(parse_complex("1-2j").unwrap(), Complex64::new(1.0, -2.0));
        assert_eq!(parse_complex("1e-3+2e-4j").unwrap(), Complex64::new(1e-3, 2e-4));
    }

    #[test]
    fn rejects_malformed() {
        assert!(parse_complex("abc").is_err());
        assert!(matrix_from_text("1 2\n3\n").is_err());
        assert!(matrix_from_json("{\"rows\":2,\"cols\":2,\"data\":[[1,0]]}").is_err());
    }

    #[test]
    fn vector_set_round_trip() {
        let vs = vec![
            vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, -0.5)],
            vec![Complex64::new(0.25, 0.0), Complex64::new(0.0, 1.0)],
        ];
        let (d, back) = vectors_from_json(&vectors_to_json(2, &vs)).unwrap();
        assert_eq!(d, 2);
        assert_eq!(back.len(), 2);
        assert!((back[1][1] - Complex64::new(0.0, 1.0)).norm() < 1e-15);
    }
}
