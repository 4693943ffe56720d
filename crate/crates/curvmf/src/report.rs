//! Report structures shared by the CLI and the verification suite. Field
//! order is fixed by the struct declaration, so serialized output is
//! byte-stable for identical inputs.

use serde::Serialize;

use crate::io::Fnv1a;
use crate::meanfield::ProblemSpec;
use crate::minimize::{SignUsed, SolveResult, Termination};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Serialize)]
pub struct Residuals {
    pub gb: f64,
    pub pde: f64,
}

/// The solve/verify report, one JSON object per run.
#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub experiment: String,
    pub spec_hash: String,
    pub chi: i64,
    pub alpha: f64,
    pub beta: f64,
    #[serde(rename = "C")]
    pub c: f64,
    #[serde(rename = "J")]
    pub j: f64,
    pub residuals: Residuals,
    pub iterations: usize,
    pub termination: Termination,
    pub sign_used: SignUsed,
}

/// Fingerprint of the problem data: mesh connectivity and metric, curvature
/// samples, χ and the solver seed.
pub fn spec_hash<S: Scalar>(spec: &ProblemSpec<S>, seed: u64) -> String {
    let mut f = Fnv1a::new();
    f.update(spec.mesh.name.as_bytes());
    f.update(&(spec.mesh.vertex_count() as u64).to_le_bytes());
    for t in &spec.mesh.triangles {
        for &v in t {
            f.update(&(v as u64).to_le_bytes());
        }
    }
    for &l in &spec.mesh.edge_lengths {
        f.update_f64(l.f64());
    }
    for &k in &spec.k {
        f.update_f64(k.f64());
    }
    for &h in &spec.h {
        f.update_f64(h.f64());
    }
    f.update(&spec.chi.to_le_bytes());
    f.update(&seed.to_le_bytes());
    format!("{:016x}", f.finish())
}

pub fn solve_report<S: Scalar>(
    experiment: &str,
    spec: &ProblemSpec<S>,
    seed: u64,
    result: &SolveResult<S>,
    gb_residual: f64,
    pde_residual: f64,
) -> SolveReport {
    SolveReport {
        experiment: experiment.to_string(),
        spec_hash: spec_hash(spec, seed),
        chi: spec.chi,
        alpha: result.alpha.f64(),
        beta: result.beta.f64(),
        c: result.c_star.f64(),
        j: result.j_star.f64(),
        residuals: Residuals {
            gb: gb_residual,
            pde: pde_residual,
        },
        iterations: result.iterations,
        termination: result.termination,
        sign_used: result.sign_used,
    }
}

/// Verification-only report (no solve attached).
pub fn verify_report<S: Scalar>(
    spec: &ProblemSpec<S>,
    alpha: f64,
    beta: f64,
    c: f64,
    j: f64,
    gb_residual: f64,
    pde_residual: f64,
) -> SolveReport {
    SolveReport {
        experiment: "verify".to_string(),
        spec_hash: spec_hash(spec, 0),
        chi: spec.chi,
        alpha,
        beta,
        c,
        j,
        residuals: Residuals {
            gb: gb_residual,
            pde: pde_residual,
        },
        iterations: 0,
        termination: Termination::GradTol,
        sign_used: SignUsed::NotApplicable,
    }
}

/// Summary line for inequality batteries and sweeps.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentSummary {
    pub experiment: String,
    pub verdict: String,
    pub max_deficit: f64,
    pub samples: usize,
    pub seed: u64,
}

pub fn to_json_string<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serialization");
    s.push('\n');
    s
}
