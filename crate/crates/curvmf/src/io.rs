//! File artifacts: full-precision CSV tables, OFF meshes, JSON reports.
//!
//! All floating values are serialized with 17 significant digits so a
//! read-back reproduces the in-memory doubles exactly.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use thiserror::Error;

use crate::mesh::IntrinsicMesh;
use crate::minimize::SolveResult;
use crate::ops::OperatorSet;
use crate::scalar::Scalar;

#[derive(Debug, Error)]
pub enum IoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("{path}: line {line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },
    #[error("mesh `{0}` has no embedding; OFF export needs one")]
    NoEmbedding(String),
}

/// Full-precision decimal form that round-trips f64 exactly.
pub fn fmt_full<S: Scalar>(x: S) -> String {
    format!("{:.16e}", x.f64())
}

pub fn write_solution_csv<S: Scalar>(
    path: &Path,
    u: &[S],
    v: Option<&[S]>,
    k: &[S],
    h: &[S],
) -> Result<(), IoError> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "vertex_id,u,v,K,h")?;
    for i in 0..u.len() {
        let vi = v.map(|vv| fmt_full(vv[i])).unwrap_or_default();
        writeln!(
            w,
            "{},{},{},{},{}",
            i,
            fmt_full(u[i]),
            vi,
            fmt_full(k[i]),
            fmt_full(h[i])
        )?;
    }
    Ok(())
}

/// Read back a solution CSV; returns (u, v) with `v` present only if every
/// row carries one.
#[allow(clippy::type_complexity)]
pub fn read_solution_csv(path: &Path) -> Result<(Vec<f64>, Option<Vec<f64>>), IoError> {
    let file = BufReader::new(File::open(path)?);
    let mut u = Vec::new();
    let mut v: Vec<f64> = Vec::new();
    let mut v_complete = true;
    for (lineno, line) in file.lines().enumerate() {
        let line = line?;
        if lineno == 0 || line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() < 5 {
            return Err(IoError::Parse {
                path: path.display().to_string(),
                line: lineno + 1,
                msg: "expected 5 columns".into(),
            });
        }
        let parse = |s: &str| -> Result<f64, IoError> {
            s.parse::<f64>().map_err(|e| IoError::Parse {
                path: path.display().to_string(),
                line: lineno + 1,
                msg: e.to_string(),
            })
        };
        u.push(parse(parts[1])?);
        if parts[2].is_empty() {
            v_complete = false;
        } else {
            v.push(parse(parts[2])?);
        }
    }
    Ok((u, if v_complete { Some(v) } else { None }))
}

/// Per-vertex sample table (vertex_id, value).
pub fn read_samples_csv(path: &Path, n: usize) -> Result<Vec<f64>, IoError> {
    let file = BufReader::new(File::open(path)?);
    let mut vals = vec![f64::NAN; n];
    for (lineno, line) in file.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with("vertex_id") {
            continue;
        }
        let parts: Vec<&str> = t.split(',').collect();
        if parts.len() < 2 {
            return Err(IoError::Parse {
                path: path.display().to_string(),
                line: lineno + 1,
                msg: "expected vertex_id,value".into(),
            });
        }
        let id: usize = parts[0].parse().map_err(|_| IoError::Parse {
            path: path.display().to_string(),
            line: lineno + 1,
            msg: "bad vertex id".into(),
        })?;
        if id >= n {
            return Err(IoError::Parse {
                path: path.display().to_string(),
                line: lineno + 1,
                msg: format!("vertex id {id} out of range (n = {n})"),
            });
        }
        let val: f64 = parts[1].parse().map_err(|e: std::num::ParseFloatError| {
            IoError::Parse {
                path: path.display().to_string(),
                line: lineno + 1,
                msg: e.to_string(),
            }
        })?;
        vals[id] = val;
    }
    if vals.iter().any(|x| x.is_nan()) {
        let got = vals.iter().filter(|x| !x.is_nan()).count();
        return Err(IoError::Parse {
            path: path.display().to_string(),
            line: 0,
            msg: format!("sample table covers {got} of {n} vertices"),
        });
    }
    Ok(vals)
}

pub fn write_trace_csv<S: Scalar>(path: &Path, result: &SolveResult<S>) -> Result<(), IoError> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "iter,J,grad_norm,alpha,beta,C,step,domain_margin")?;
    for r in &result.trace {
        writeln!(
            w,
            "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            r.iter, r.j, r.grad_norm, r.alpha, r.beta, r.c, r.step, r.domain_margin
        )?;
    }
    Ok(())
}

/// Intrinsic edge-length table (edge_id, v0, v1, length).
pub fn write_edge_csv<S: Scalar>(path: &Path, mesh: &IntrinsicMesh<S>) -> Result<(), IoError> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "edge_id,v0,v1,length")?;
    for (e, &[a, b]) in mesh.edges.iter().enumerate() {
        writeln!(w, "{},{},{},{}", e, a, b, fmt_full(mesh.edge_lengths[e]))?;
    }
    Ok(())
}

/// Stiffness matrix in coordinate-list CSV (row, col, value).
pub fn write_coo_csv<S: Scalar>(path: &Path, ops: &OperatorSet<S>) -> Result<(), IoError> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "row,col,value")?;
    for (i, j, v) in ops.stiffness.triplets() {
        writeln!(w, "{},{},{}", i, j, fmt_full(v))?;
    }
    Ok(())
}

/// OFF export for embedded meshes.
pub fn write_off<S: Scalar>(path: &Path, mesh: &IntrinsicMesh<S>) -> Result<(), IoError> {
    let pos = mesh
        .embedding
        .as_ref()
        .ok_or_else(|| IoError::NoEmbedding(mesh.name.clone()))?;
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "OFF")?;
    writeln!(w, "{} {} 0", mesh.vertex_count(), mesh.triangles.len())?;
    for p in pos {
        writeln!(
            w,
            "{} {} {}",
            fmt_full(p[0]),
            fmt_full(p[1]),
            fmt_full(p[2])
        )?;
    }
    for t in &mesh.triangles {
        writeln!(w, "3 {} {} {}", t[0], t[1], t[2])?;
    }
    Ok(())
}

/// Deficit battery/sweep records as CSV (param, lhs, rhs, deficit).
pub fn write_deficit_csv(
    path: &Path,
    report: &crate::analysis::DeficitReport,
) -> Result<(), IoError> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "param,lhs,rhs,deficit")?;
    for r in &report.records {
        writeln!(
            w,
            "{:.16e},{:.16e},{:.16e},{:.16e}",
            r.param, r.lhs, r.rhs, r.deficit
        )?;
    }
    Ok(())
}

/// Sharpness sweep table as CSV (n, quotient, energy, value).
pub fn write_sharpness_csv(
    path: &Path,
    seq: &crate::analysis::SharpnessSequence,
) -> Result<(), IoError> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "n,quotient,energy,value")?;
    for r in &seq.records {
        writeln!(
            w,
            "{},{:.16e},{:.16e},{:.16e}",
            r.n, r.quotient, r.energy, r.value
        )?;
    }
    Ok(())
}

/// λ-sweep table as CSV.
pub fn write_lambda_csv(path: &Path, rows: &[crate::analysis::LambdaRow]) -> Result<(), IoError> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "lambda,j_min,grad_norm,sup_u,iterations,converged")?;
    for r in rows {
        writeln!(
            w,
            "{:.16e},{:.16e},{:.16e},{:.16e},{},{}",
            r.lambda, r.j_min, r.grad_norm, r.sup_u, r.iterations, r.converged
        )?;
    }
    Ok(())
}

/// Serialize any report type to pretty JSON with stable field order.
pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<(), IoError> {
    let mut w = BufWriter::new(File::create(path)?);
    let s = serde_json::to_string_pretty(value).expect("report serialization");
    w.write_all(s.as_bytes())?;
    w.write_all(b"\n")?;
    Ok(())
}

/// FNV-1a over a canonical byte stream; used to fingerprint problem data in
/// reports.
pub struct Fnv1a(u64);

impl Fnv1a {
    pub fn new() -> Self {
        Fnv1a(0xcbf29ce484222325)
    }

    pub fn update(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 ^= b as u64;
            self.0 = self.0.wrapping_mul(0x100000001b3);
        }
    }

    pub fn update_f64(&mut self, x: f64) {
        self.update(&x.to_bits().to_le_bytes());
    }

    pub fn finish(&self) -> u64 {
        self.0
    }
}

impl Default for Fnv1a {
    fn default() -> Self {
        Self::new()
    }
}
