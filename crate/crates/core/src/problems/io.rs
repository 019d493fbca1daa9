//! Plain-text problem container and a Matrix Market reader.
//!
//! ```text
//! %RTLS-PROBLEM 1
//! # comment lines start with '#'
//! m 2
//! n 2
//! k 1
//! rho 5.0000000000000000e-1
//! sigma 0.0000000000000000e0     (optional)
//! seed 7                         (optional)
//! A                              (m lines of n values)
//! b                              (m lines)
//! L                              (k lines of n values)
//! x_true                         (optional, n lines)
//! b_true                         (optional, m lines)
//! %END
//! ```
//!
//! Matrices are row-major, one row per line. Values are written with 17
//! significant digits, so a write/read round trip is exact.

use std::fmt::Write as _;
use std::fs;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use nalgebra::{DMatrix, DVector};

use super::GeneratedProblem;
use crate::error::{Error, Result};
use crate::problem::ProblemInstance;

pub const MAGIC: &str = "%RTLS-PROBLEM 1";
pub const END: &str = "%END";

/// Contents of a problem file.
#[derive(Debug, Clone)]
pub struct ProblemFile {
    pub instance: ProblemInstance,
    pub sigma: Option<f64>,
    pub seed: Option<u64>,
    pub x_true: Option<DVector<f64>>,
    pub b_true: Option<DVector<f64>>,
}

impl ProblemFile {
    pub fn bare(instance: ProblemInstance) -> Self {
        Self { instance, sigma: None, seed: None, x_true: None, b_true: None }
    }
}

impl From<GeneratedProblem> for ProblemFile {
    fn from(g: GeneratedProblem) -> Self {
        Self {
            instance: g.instance,
            sigma: Some(g.sigma),
            seed: Some(g.seed),
            x_true: Some(g.x_true),
            b_true: Some(g.b_true),
        }
    }
}

fn fmt_value(out: &mut String, v: f64) {
    write!(out, "{v:.16e}").expect("writing to a String cannot fail");
}

fn write_matrix(out: &mut String, name: &str, m: &DMatrix<f64>) {
    out.push_str(name);
    out.push('\n');
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if j > 0 {
                out.push(' ');
            }
            fmt_value(out, m[(i, j)]);
        }
        out.push('\n');
    }
}

fn write_vector(out: &mut String, name: &str, v: &DVector<f64>) {
    out.push_str(name);
    out.push('\n');
    for x in v.iter() {
        fmt_value(out, *x);
        out.push('\n');
    }
}

/// Serialize to the text container.
pub fn to_string(file: &ProblemFile) -> String {
    let p = &file.instance;
    let mut out = String::new();
    out.push_str(MAGIC);
    out.push('\n');
    writeln!(out, "m {}\nn {}\nk {}", p.m(), p.n(), p.k()).unwrap();
    out.push_str("rho ");
    fmt_value(&mut out, p.rho());
    out.push('\n');
    if let Some(s) = file.sigma {
        out.push_str("sigma ");
        fmt_value(&mut out, s);
        out.push('\n');
    }
    if let Some(s) = file.seed {
        writeln!(out, "seed {s}").unwrap();
    }
    write_matrix(&mut out, "A", p.a());
    write_vector(&mut out, "b", p.b());
    write_matrix(&mut out, "L", p.l());
    if let Some(x) = &file.x_true {
        write_vector(&mut out, "x_true", x);
    }
    if let Some(b) = &file.b_true {
        write_vector(&mut out, "b_true", b);
    }
    out.push_str(END);
    out.push('\n');
    out
}

pub fn write_problem(path: &Path, file: &ProblemFile) -> Result<()> {
    fs::write(path, to_string(file))?;
    Ok(())
}

pub fn read_problem(path: &Path) -> Result<ProblemFile> {
    parse_problem(&fs::read_to_string(path)?)
}

/// Line cursor that skips blanks and `#` comments.
struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Self { inner: text.lines().enumerate(), last: 0 }
    }

    fn next(&mut self) -> Option<(usize, &'a str)> {
        for (i, raw) in self.inner.by_ref() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            self.last = i + 1;
            return Some((i + 1, line));
        }
        None
    }

    fn expect(&mut self, what: &str) -> Result<(usize, &'a str)> {
        self.next().ok_or_else(|| Error::Parse {
            line: self.last + 1,
            msg: format!("unexpected end of input, expected {what}"),
        })
    }

    fn keyed(&mut self, key: &str) -> Result<(usize, &'a str)> {
        let (no, line) = self.expect(key)?;
        match line.split_once(char::is_whitespace) {
            Some((k, v)) if k == key => Ok((no, v.trim())),
            _ => Err(Error::Parse { line: no, msg: format!("expected `{key} <value>`, found `{line}`") }),
        }
    }

    fn row(&mut self, width: usize, what: &str) -> Result<Vec<f64>> {
        let (no, line) = self.expect(what)?;
        let vals = line.split_whitespace().map(|t| parse_f64(t, no)).collect::<Result<Vec<_>>>()?;
        if vals.len() != width {
            return Err(Error::Parse {
                line: no,
                msg: format!("{what}: expected {width} values, found {}", vals.len()),
            });
        }
        Ok(vals)
    }

    fn matrix(&mut self, rows: usize, cols: usize, what: &str) -> Result<DMatrix<f64>> {
        let mut data = Vec::with_capacity(rows * cols);
        for _ in 0..rows {
            data.extend(self.row(cols, what)?);
        }
        Ok(DMatrix::from_row_slice(rows, cols, &data))
    }

    fn vector(&mut self, len: usize, what: &str) -> Result<DVector<f64>> {
        let mut data = Vec::with_capacity(len);
        for _ in 0..len {
            data.push(self.row(1, what)?[0]);
        }
        Ok(DVector::from_vec(data))
    }

    fn header(&mut self, name: &str) -> Result<()> {
        let (no, line) = self.expect(name)?;
        if line == name {
            Ok(())
        } else {
            Err(Error::Parse { line: no, msg: format!("expected block `{name}`, found `{line}`") })
        }
    }
}

fn parse_f64(t: &str, line: usize) -> Result<f64> {
    t.parse::<f64>().map_err(|_| Error::Parse { line, msg: format!("not a number: `{t}`") })
}

fn parse_usize(t: &str, line: usize) -> Result<usize> {
    t.parse::<usize>().map_err(|_| Error::Parse { line, msg: format!("not a non-negative integer: `{t}`") })
}

pub fn parse_problem(text: &str) -> Result<ProblemFile> {
    let mut lines = Lines::new(text);
    let (no, first) = lines.expect(MAGIC)?;
    if first != MAGIC {
        return Err(Error::Parse { line: no, msg: format!("missing `{MAGIC}` header") });
    }
    let (no, v) = lines.keyed("m")?;
    let m = parse_usize(v, no)?;
    let (no, v) = lines.keyed("n")?;
    let n = parse_usize(v, no)?;
    let (no, v) = lines.keyed("k")?;
    let k = parse_usize(v, no)?;
    let (no, v) = lines.keyed("rho")?;
    let rho = parse_f64(v, no)?;

    let mut sigma = None;
    let mut seed = None;
    let mut block = loop {
        let (no, line) = lines.expect("A")?;
        match line.split_once(char::is_whitespace) {
            Some(("sigma", v)) => sigma = Some(parse_f64(v.trim(), no)?),
            Some(("seed", v)) => {
                seed =
                    Some(v.trim().parse::<u64>().map_err(|_| Error::Parse {
                        line: no,
                        msg: format!("invalid seed `{}`", v.trim()),
                    })?)
            }
            _ if line == "A" => break line,
            _ => return Err(Error::Parse { line: no, msg: format!("unexpected `{line}` before block `A`") }),
        }
    };
    debug_assert_eq!(block, "A");
    let a = lines.matrix(m, n, "A")?;
    lines.header("b")?;
    let b = lines.vector(m, "b")?;
    lines.header("L")?;
    let l = lines.matrix(k, n, "L")?;

    let mut x_true = None;
    let mut b_true = None;
    loop {
        let (no, line) = lines.expect(END)?;
        block = line;
        match block {
            "x_true" if x_true.is_none() => x_true = Some(lines.vector(n, "x_true")?),
            "b_true" if b_true.is_none() => b_true = Some(lines.vector(m, "b_true")?),
            END => break,
            other => return Err(Error::Parse { line: no, msg: format!("unexpected `{other}`") }),
        }
    }
    if let Some((no, line)) = lines.next() {
        return Err(Error::Parse { line: no, msg: format!("trailing content after {END}: `{line}`") });
    }

    Ok(ProblemFile { instance: ProblemInstance::new(a, b, l, rho)?, sigma, seed, x_true, b_true })
}

/// Read a dense matrix in Matrix Market format.
///
/// Supports `array` and `coordinate` storage with `real` or `integer`
/// fields and `general` or `symmetric` symmetry.
pub fn read_matrix_market<R: Read>(reader: R) -> Result<DMatrix<f64>> {
    let mut lines = BufReader::new(reader).lines().enumerate();
    let (_, banner) =
        lines.next().ok_or_else(|| Error::Parse { line: 1, msg: "empty Matrix Market input".into() })?;
    let banner = banner?;
    let fields: Vec<String> = banner.split_whitespace().map(|s| s.to_ascii_lowercase()).collect();
    if fields.len() != 5 || fields[0] != "%%matrixmarket" || fields[1] != "matrix" {
        return Err(Error::Parse { line: 1, msg: format!("bad Matrix Market banner `{banner}`") });
    }
    let coordinate = match fields[2].as_str() {
        "coordinate" => true,
        "array" => false,
        other => return Err(Error::Parse { line: 1, msg: format!("unsupported storage `{other}`") }),
    };
    if !matches!(fields[3].as_str(), "real" | "integer" | "double") {
        return Err(Error::Parse { line: 1, msg: format!("unsupported field `{}`", fields[3]) });
    }
    let symmetric = match fields[4].as_str() {
        "general" => false,
        "symmetric" => true,
        other => return Err(Error::Parse { line: 1, msg: format!("unsupported symmetry `{other}`") }),
    };

    let mut tokens: Vec<(usize, String)> = Vec::new();
    for (i, line) in lines {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        tokens.extend(t.split_whitespace().map(|s| (i + 1, s.to_string())));
    }
    let mut it = tokens.into_iter();
    let mut next_usize = |what: &str| -> Result<usize> {
        let (no, t) = it.next().ok_or_else(|| Error::Parse {
            line: 0,
            msg: format!("unexpected end of input, expected {what}"),
        })?;
        parse_usize(&t, no)
    };
    let rows = next_usize("row count")?;
    let cols = next_usize("column count")?;
    let nnz = if coordinate { Some(next_usize("entry count")?) } else { None };
    if symmetric && rows != cols {
        return Err(Error::Parse {
            line: 0,
            msg: format!("symmetric matrix must be square, got {rows}x{cols}"),
        });
    }

    let mut next_f64 = || -> Result<f64> {
        let (no, t) =
            it.next().ok_or_else(|| Error::Parse { line: 0, msg: "unexpected end of matrix data".into() })?;
        parse_f64(&t, no)
    };
    let mut m = DMatrix::zeros(rows, cols);
    if let Some(nnz) = nnz {
        for _ in 0..nnz {
            let i = next_f64()? as usize;
            let j = next_f64()? as usize;
            let v = next_f64()?;
            if i == 0 || j == 0 || i > rows || j > cols {
                return Err(Error::Parse {
                    line: 0,
                    msg: format!("entry ({i}, {j}) out of range for {rows}x{cols}"),
                });
            }
            m[(i - 1, j - 1)] = v;
            if symmetric {
                m[(j - 1, i - 1)] = v;
            }
        }
    } else {
        // Column-major; symmetric stores the lower triangle only.
        for j in 0..cols {
            let start = if symmetric { j } else { 0 };
            for i in start..rows {
                let v = next_f64()?;
                m[(i, j)] = v;
                if symmetric {
                    m[(j, i)] = v;
                }
            }
        }
    }
    Ok(m)
}

pub fn read_matrix_market_file(path: &Path) -> Result<DMatrix<f64>> {
    read_matrix_market(fs::File::open(path)?)
}
