//! Matrix and vector ingestion/output.
//!
//! Two matrix formats are supported: MatrixMarket (`coordinate` and `array`,
//! real, general or symmetric) with the right-hand side in a plain text
//! vector file, and a single JSON file `{"n": …, "rows": [[…]], "b": […]}`.
//! Writers emit the same formats.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::LinearSystem;

#[derive(Serialize, Deserialize)]
struct SystemJson {
    n: usize,
    rows: Vec<Vec<f64>>,
    b: Vec<f64>,
}

/// Loads a system from `path`, dispatching on the extension: `.json` is the
/// JSON schema, anything else is MatrixMarket and needs `rhs`.
pub fn load_system(path: &Path, rhs: Option<&Path>) -> Result<LinearSystem> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("json") => read_system_json(path),
        _ => {
            let a = read_matrix_market(path)?;
            let rhs = rhs.ok_or_else(|| {
                Error::Config("MatrixMarket input needs a right-hand side vector file".into())
            })?;
            let b = read_vector(rhs)?;
            LinearSystem::new(a, b)
        }
    }
}

pub fn read_system_json(path: &Path) -> Result<LinearSystem> {
    let text = fs::read_to_string(path)?;
    let parsed: SystemJson = serde_json::from_str(&text)?;
    let m = parsed.rows.len();
    if m == 0 {
        return Err(Error::Parse("JSON system has no rows".into()));
    }
    for (i, row) in parsed.rows.iter().enumerate() {
        if row.len() != parsed.n {
            return Err(Error::Parse(format!(
                "JSON row {i} has length {}, expected n = {}",
                row.len(),
                parsed.n
            )));
        }
    }
    if parsed.b.len() != m {
        return Err(Error::Parse(format!(
            "JSON b has length {}, expected {} (one entry per row)",
            parsed.b.len(),
            m
        )));
    }
    let mut a = Array2::zeros((m, parsed.n));
    for (i, row) in parsed.rows.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            a[(i, j)] = *v;
        }
    }
    LinearSystem::new(a, Array1::from_vec(parsed.b))
}

pub fn write_system_json(path: &Path, sys: &LinearSystem) -> Result<()> {
    let payload = SystemJson {
        n: sys.matrix().ncols(),
        rows: sys
            .matrix()
            .rows()
            .into_iter()
            .map(|r| r.to_vec())
            .collect(),
        b: sys.rhs().to_vec(),
    };
    fs::write(path, serde_json::to_string_pretty(&payload)?)?;
    Ok(())
}

/// Parses MatrixMarket `coordinate` or `array` format, real field, general
/// or symmetric symmetry.
pub fn read_matrix_market(path: &Path) -> Result<Array2<f64>> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty MatrixMarket file".into()))?;
    let header_lc = header.to_lowercase();
    let tokens: Vec<&str> = header_lc.split_whitespace().collect();
    if tokens.len() < 4 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(Error::Parse(format!("bad MatrixMarket header: {header}")));
    }
    let layout = tokens[2];
    let field = tokens[3];
    let symmetry = tokens.get(4).copied().unwrap_or("general");
    if field != "real" && field != "double" && field != "integer" {
        return Err(Error::Parse(format!(
            "unsupported MatrixMarket field '{field}' (only real data is supported)"
        )));
    }
    if symmetry != "general" && symmetry != "symmetric" {
        return Err(Error::Parse(format!(
            "unsupported MatrixMarket symmetry '{symmetry}'"
        )));
    }
    let mut data = lines.filter(|l| {
        let t = l.trim();
        !t.is_empty() && !t.starts_with('%')
    });
    let size_line = data
        .next()
        .ok_or_else(|| Error::Parse("MatrixMarket file has no size line".into()))?;
    let dims: Vec<usize> = size_line
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| bad_number(t)))
        .collect::<Result<_>>()?;
    match layout {
        "coordinate" => {
            if dims.len() != 3 {
                return Err(Error::Parse("coordinate size line needs 'm n nnz'".into()));
            }
            let (m, n, nnz) = (dims[0], dims[1], dims[2]);
            let mut a = Array2::zeros((m, n));
            let mut seen = 0usize;
            for line in data {
                let toks: Vec<&str> = line.split_whitespace().collect();
                if toks.len() != 3 {
                    return Err(Error::Parse(format!("bad coordinate entry: {line}")));
                }
                let i: usize = toks[0].parse().map_err(|_| bad_number(toks[0]))?;
                let j: usize = toks[1].parse().map_err(|_| bad_number(toks[1]))?;
                let v: f64 = toks[2].parse().map_err(|_| bad_number(toks[2]))?;
                if i == 0 || j == 0 || i > m || j > n {
                    return Err(Error::Parse(format!(
                        "coordinate ({i}, {j}) outside {m} x {n} (indices are 1-based)"
                    )));
                }
                a[(i - 1, j - 1)] = v;
                if symmetry == "symmetric" && i != j {
                    a[(j - 1, i - 1)] = v;
                }
                seen += 1;
            }
            if seen != nnz {
                return Err(Error::Parse(format!(
                    "coordinate file declares {nnz} entries but contains {seen}"
                )));
            }
            Ok(a)
        }
        "array" => {
            if dims.len() != 2 {
                return Err(Error::Parse("array size line needs 'm n'".into()));
            }
            let (m, n) = (dims[0], dims[1]);
            let values: Vec<f64> = data
                .flat_map(|l| l.split_whitespace())
                .map(|t| t.parse().map_err(|_| bad_number(t)))
                .collect::<Result<_>>()?;
            if symmetry == "general" {
                if values.len() != m * n {
                    return Err(Error::Parse(format!(
                        "array file has {} values, expected {}",
                        values.len(),
                        m * n
                    )));
                }
                // Array format is column-major.
                let mut a = Array2::zeros((m, n));
                for (idx, v) in values.iter().enumerate() {
                    a[(idx % m, idx / m)] = *v;
                }
                Ok(a)
            } else {
                // Symmetric array format stores the lower triangle by column.
                if m != n || values.len() != m * (m + 1) / 2 {
                    return Err(Error::Parse(
                        "symmetric array file must hold the lower triangle of a square matrix"
                            .into(),
                    ));
                }
                let mut a = Array2::zeros((m, n));
                let mut it = values.into_iter();
                for j in 0..n {
                    for i in j..m {
                        let v = it.next().unwrap();
                        a[(i, j)] = v;
                        a[(j, i)] = v;
                    }
                }
                Ok(a)
            }
        }
        other => Err(Error::Parse(format!(
            "unsupported MatrixMarket layout '{other}'"
        ))),
    }
}

pub fn write_matrix_market_array(path: &Path, a: &Array2<f64>) -> Result<()> {
    let mut out = String::new();
    out.push_str("%%MatrixMarket matrix array real general\n");
    let _ = writeln!(out, "{} {}", a.nrows(), a.ncols());
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            let _ = writeln!(out, "{:?}", a[(i, j)]);
        }
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn write_matrix_market_coordinate(path: &Path, a: &Array2<f64>) -> Result<()> {
    let entries: Vec<(usize, usize, f64)> = a
        .indexed_iter()
        .filter(|(_, v)| **v != 0.0)
        .map(|((i, j), v)| (i + 1, j + 1, *v))
        .collect();
    let mut out = String::new();
    out.push_str("%%MatrixMarket matrix coordinate real general\n");
    let _ = writeln!(out, "{} {} {}", a.nrows(), a.ncols(), entries.len());
    for (i, j, v) in entries {
        let _ = writeln!(out, "{i} {j} {v:?}");
    }
    fs::write(path, out)?;
    Ok(())
}

/// Plain text vector: whitespace-separated numbers, `%` comments allowed.
pub fn read_vector(path: &Path) -> Result<Array1<f64>> {
    let text = fs::read_to_string(path)?;
    let values: Vec<f64> = text
        .lines()
        .filter(|l| {
            let t = l.trim();
            !t.is_empty() && !t.starts_with('%') && !t.starts_with('#')
        })
        .flat_map(|l| l.split_whitespace())
        .map(|t| t.parse().map_err(|_| bad_number(t)))
        .collect::<Result<_>>()?;
    if values.is_empty() {
        return Err(Error::Parse("vector file has no entries".into()));
    }
    Ok(Array1::from_vec(values))
}

pub fn write_vector(path: &Path, v: &Array1<f64>) -> Result<()> {
    let mut out = String::new();
    for x in v.iter() {
        let _ = writeln!(out, "{x:?}");
    }
    fs::write(path, out)?;
    Ok(())
}

fn bad_number(token: &str) -> Error {
    Error::Parse(format!("cannot parse number '{token}'"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn matrix_market_array_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.mtx");
        let a = array![[1.5, -2.0], [0.0, 3.25], [4.0, 0.125]];
        write_matrix_market_array(&path, &a).unwrap();
        let back = read_matrix_market(&path).unwrap();
        assert_eq!(a, back);
    }

    #[test]
    fn matrix_market_coordinate_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.mtx");
        let a = array![[1.0, 0.0, 2.0], [0.0, -3.5, 0.0]];
        write_matrix_market_coordinate(&path, &a).unwrap();
        let back = read_matrix_market(&path).unwrap();
        assert_eq!(a, back);
    }

    #[test]
    fn matrix_market_symmetric_coordinate() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.mtx");
        fs::write(
            &path,
            "%%MatrixMarket matrix coordinate real symmetric\n% comment\n2 2 2\n1 1 2.0\n2 1 0.5\n",
        )
        .unwrap();
        let a = read_matrix_market(&path).unwrap();
        assert_eq!(a, array![[2.0, 0.5], [0.5, 0.0]]);
    }

    #[test]
    fn vector_round_trip_with_comments() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("b.txt");
        fs::write(&path, "% rhs\n1.0\n-2.5\n 0.75\n").unwrap();
        let v = read_vector(&path).unwrap();
        assert_eq!(v, array![1.0, -2.5, 0.75]);
        write_vector(&path, &v).unwrap();
        assert_eq!(read_vector(&path).unwrap(), v);
    }

    #[test]
    fn json_round_trip_and_load_dispatch() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sys.json");
        let sys = LinearSystem::new(array![[3.0, 4.0], [0.0, 1.0]], array![5.0, 1.0]).unwrap();
        write_system_json(&path, &sys).unwrap();
        let back = load_system(&path, None).unwrap();
        assert_eq!(back.matrix(), sys.matrix());
        assert_eq!(back.rhs(), sys.rhs());
    }

    #[test]
    fn load_matrix_market_with_rhs() {
        let dir = tempfile::tempdir().unwrap();
        let mpath = dir.path().join("a.mtx");
        let bpath = dir.path().join("b.txt");
        let a = array![[2.0, 0.0], [0.0, 1.0]];
        write_matrix_market_array(&mpath, &a).unwrap();
        write_vector(&bpath, &array![2.0, 3.0]).unwrap();
        let sys = load_system(&mpath, Some(&bpath)).unwrap();
        assert_eq!(sys.matrix(), &a);
        assert!(load_system(&mpath, None).is_err());
    }

    #[test]
    fn rejects_malformed_headers() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.mtx");
        fs::write(
            &path,
            "%%MatrixMarket matrix coordinate complex general\n1 1 1\n1 1 2\n",
        )
        .unwrap();
        assert!(read_matrix_market(&path).is_err());
        fs::write(&path, "not a header\n").unwrap();
        assert!(read_matrix_market(&path).is_err());
    }
}
