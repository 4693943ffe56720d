//! The mean-field algebra: exponential integrals α and β, the open domain of
//! the energy, the normalization constant C, the energy J with its gradient,
//! the λ-family on χ>0 surfaces, and the sign feasibility logic.

use thiserror::Error;

use crate::mesh::{IntrinsicMesh, MeshError, SymmetryOrbits};
use crate::ops::{assemble_operators, dirichlet_energy, OperatorSet};
use crate::scalar::Scalar;

#[derive(Debug, Error)]
pub enum MeanFieldError {
    #[error("state leaves the energy domain ({branch:?} branch, margin {margin:.3e})")]
    DomainViolation { branch: Branch, margin: f64 },
    #[error("normalization constant is not positive (C = {c:.3e}): non-geometric branch")]
    NonGeometricBranch { c: f64 },
    #[error("degenerate normalization constant (|C| = {c_abs:.3e})")]
    DegenerateC { c_abs: f64 },
    #[error("constructive search for a domain point failed (amplitude cap {cap})")]
    ConstructiveSearchFailed { cap: f64 },
    #[error("curvature signs admit no domain point: {clause}")]
    Infeasible { clause: String },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("the λ-family requires a χ>0 surface (got χ = {chi})")]
    LambdaNeedsPositiveChi { chi: i64 },
    #[error("λ must be positive (got {lambda})")]
    BadLambda { lambda: f64 },
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

/// Which Euler-characteristic regime a domain decision was made in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    ChiPos,
    ChiZero,
    ChiNeg,
}

impl Branch {
    pub fn of_chi(chi: i64) -> Branch {
        match chi.cmp(&0) {
            std::cmp::Ordering::Greater => Branch::ChiPos,
            std::cmp::Ordering::Equal => Branch::ChiZero,
            std::cmp::Ordering::Less => Branch::ChiNeg,
        }
    }
}

/// Membership in the open domain of the energy, with a signed margin.
///
/// `margin` is the branch inequality written as (lhs - rhs) in natural units;
/// `rel_margin` rescales it by 1 + |lhs| + |rhs| and is what the solver guard
/// compares against its relative threshold.
#[derive(Debug, Clone, Copy)]
pub struct DomainStatus<S: Scalar> {
    pub member: bool,
    pub margin: S,
    pub rel_margin: S,
    pub branch: Branch,
}

/// Mesh, operators and prescribed curvature data for one problem.
///
/// `k` holds the target Gaussian curvature per vertex; `h` the target
/// geodesic curvature per vertex (entries at interior vertices are inert
/// because the boundary quadrature weight vanishes there).
#[derive(Debug, Clone)]
pub struct ProblemSpec<S: Scalar> {
    pub mesh: IntrinsicMesh<S>,
    pub ops: OperatorSet<S>,
    pub orbits: Option<SymmetryOrbits>,
    pub k: Vec<S>,
    pub h: Vec<S>,
    pub chi: i64,
    /// Coefficient of the linear term: 4πχ / |Σ|.
    pub rho_bar: S,
    /// Optional coefficient for the λ-family (χ>0 surfaces only); `None`
    /// selects the geometric energy, which coincides with λ = 8πχ.
    pub lambda: Option<S>,
}

impl<S: Scalar> ProblemSpec<S> {
    pub fn new(
        mesh: IntrinsicMesh<S>,
        orbits: Option<SymmetryOrbits>,
        k: Vec<S>,
        h: Vec<S>,
        lambda: Option<S>,
    ) -> Result<Self, MeanFieldError> {
        let n = mesh.vertex_count();
        if k.len() != n {
            return Err(MeanFieldError::DimensionMismatch {
                expected: n,
                got: k.len(),
            });
        }
        if h.len() != n {
            return Err(MeanFieldError::DimensionMismatch {
                expected: n,
                got: h.len(),
            });
        }
        if let Some(orb) = &orbits {
            orb.validate(&mesh)?;
        }
        let chi = mesh.euler_characteristic();
        if let Some(l) = lambda {
            if chi <= 0 {
                return Err(MeanFieldError::LambdaNeedsPositiveChi { chi });
            }
            if !(l > S::zero()) {
                return Err(MeanFieldError::BadLambda { lambda: l.f64() });
            }
        }
        let ops = assemble_operators(&mesh);
        let rho_bar = S::of(4.0) * S::PI() * S::of(chi as f64) / ops.total_area;
        Ok(ProblemSpec {
            mesh,
            ops,
            orbits,
            k,
            h,
            chi,
            rho_bar,
            lambda,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.mesh.vertex_count()
    }

    /// Re-derive the stored invariants; used by consistency tests.
    pub fn validate(&self) -> Result<(), MeanFieldError> {
        let mesh_chi = self.mesh.euler_characteristic();
        if self.chi != mesh_chi {
            return Err(MeanFieldError::Infeasible {
                clause: format!("stored chi {} != mesh chi {}", self.chi, mesh_chi),
            });
        }
        let rho = S::of(4.0) * S::PI() * S::of(self.chi as f64) / self.ops.total_area;
        let scale = S::one() + rho.abs();
        if (rho - self.rho_bar).abs() > S::of(1e-12) * scale {
            return Err(MeanFieldError::Infeasible {
                clause: "stored rho_bar drifted from 4πχ/|Σ|".into(),
            });
        }
        Ok(())
    }

    pub fn min_k(&self) -> S {
        self.k.iter().copied().fold(S::infinity(), |m, v| m.min(v))
    }

    pub fn max_k(&self) -> S {
        self.k
            .iter()
            .copied()
            .fold(S::neg_infinity(), |m, v| m.max(v))
    }

    /// Extrema of h over boundary vertices only.
    pub fn boundary_h_range(&self) -> (S, S) {
        let mut lo = S::infinity();
        let mut hi = S::neg_infinity();
        for v in 0..self.vertex_count() {
            if self.ops.boundary_weights[v] > S::zero() {
                lo = lo.min(self.h[v]);
                hi = hi.max(self.h[v]);
            }
        }
        (lo, hi)
    }

    /// Boundary integral of h at u = 0.
    pub fn boundary_h_integral(&self) -> S {
        crate::ops::integrate_boundary(&self.ops, &self.h)
    }
}

/// Exponential integrals in shifted form so spike fields do not overflow:
/// α = alpha_s·e^shift and β = beta_s·e^{shift/2}.
#[derive(Debug, Clone, Copy)]
pub struct AlphaBeta<S: Scalar> {
    pub alpha_s: S,
    pub beta_s: S,
    pub shift: S,
}

impl<S: Scalar> AlphaBeta<S> {
    pub fn alpha(&self) -> S {
        self.alpha_s * self.shift.exp()
    }

    pub fn beta(&self) -> S {
        self.beta_s * (self.shift * S::of(0.5)).exp()
    }

    pub fn plain(alpha: S, beta: S) -> Self {
        AlphaBeta {
            alpha_s: alpha,
            beta_s: beta,
            shift: S::zero(),
        }
    }
}

fn shift_threshold<S: Scalar>() -> S {
    // Conservative fraction of ln(max): keeps β² = e^shift·β_s² representable.
    (S::max_value().ln() * S::of(0.4)).min(S::of(700.0))
}

/// Lumped quadrature of (∫ K e^u, ∫ h e^{u/2}) with automatic log-scale
/// shifting once nodal values threaten overflow.
pub fn compute_alpha_beta_scaled<S: Scalar>(spec: &ProblemSpec<S>, u: &[S]) -> AlphaBeta<S> {
    debug_assert_eq!(u.len(), spec.vertex_count());
    let umax = u.iter().copied().fold(S::neg_infinity(), |m, v| m.max(v));
    let shift = if umax > shift_threshold::<S>() {
        umax
    } else {
        S::zero()
    };
    let mut alpha = S::zero();
    let mut beta = S::zero();
    let half = S::of(0.5);
    for i in 0..u.len() {
        let e = (u[i] - shift).exp();
        alpha += spec.k[i] * spec.ops.vertex_areas[i] * e;
        let bw = spec.ops.boundary_weights[i];
        if bw > S::zero() {
            beta += spec.h[i] * bw * ((u[i] - shift) * half).exp();
        }
    }
    AlphaBeta {
        alpha_s: alpha,
        beta_s: beta,
        shift,
    }
}

/// Plain (α, β); values may overflow to infinity for extreme fields, in which
/// case the scaled variant is the one to use.
pub fn compute_alpha_beta<S: Scalar>(spec: &ProblemSpec<S>, u: &[S]) -> (S, S) {
    let ab = compute_alpha_beta_scaled(spec, u);
    (ab.alpha(), ab.beta())
}

fn positive_part<S: Scalar>(t: S) -> S {
    t.max(S::zero())
}

fn negative_part<S: Scalar>(t: S) -> S {
    (-t).max(S::zero())
}

/// Domain membership for given χ in shifted coordinates. The relative margin
/// is invariant under the shift.
pub fn check_domain_scaled<S: Scalar>(chi: i64, ab: &AlphaBeta<S>) -> DomainStatus<S> {
    let branch = Branch::of_chi(chi);
    let eight_pi = S::of(8.0) * S::PI();
    let (margin_s, scale_s, exp_weight) = match branch {
        Branch::ChiPos => {
            // α > -(β₊)² / (8πχ)
            let bp = positive_part(ab.beta_s);
            let rhs = -bp * bp / (eight_pi * S::of(chi as f64));
            (
                ab.alpha_s - rhs,
                ab.alpha_s.abs() + rhs.abs(),
                (-ab.shift).exp(),
            )
        }
        Branch::ChiZero => {
            // αβ < 0
            let prod = ab.alpha_s * ab.beta_s;
            (-prod, prod.abs(), (-ab.shift * S::of(1.5)).exp())
        }
        Branch::ChiNeg => {
            // α < -(β₋)² / (8π|χ|)
            let bm = negative_part(ab.beta_s);
            let rhs = -bm * bm / (eight_pi * S::of(chi.unsigned_abs() as f64));
            (
                rhs - ab.alpha_s,
                ab.alpha_s.abs() + rhs.abs(),
                (-ab.shift).exp(),
            )
        }
    };
    // In natural units the "1 +" floor of the scale carries weight e^{-shift}.
    let rel = margin_s / (exp_weight + scale_s);
    let margin = margin_s / exp_weight.max(S::min_positive_value());
    DomainStatus {
        member: margin_s > S::zero(),
        margin,
        rel_margin: rel,
        branch,
    }
}

/// Domain membership from plain (α, β), with the margin stated as
/// (lhs - rhs) of the branch inequality.
pub fn check_domain<S: Scalar>(chi: i64, alpha: S, beta: S) -> DomainStatus<S> {
    check_domain_scaled(chi, &AlphaBeta::plain(alpha, beta))
}

/// Normalization constant in shifted units: C = c_s · e^{-shift/2}.
///
/// Each branch goes through a cancellation-free form: the combination
/// `√(β² + 8πχα) ± β` is conjugated whenever the two terms have opposite
/// signs.
fn compute_c_scaled<S: Scalar>(chi: i64, ab: &AlphaBeta<S>) -> Result<S, MeanFieldError> {
    let status = check_domain_scaled(chi, ab);
    if !status.member {
        return Err(MeanFieldError::DomainViolation {
            branch: status.branch,
            margin: status.margin.f64(),
        });
    }
    let a = ab.alpha_s;
    let b = ab.beta_s;
    Ok(match status.branch {
        Branch::ChiPos => {
            let lam = S::of(8.0) * S::PI() * S::of(chi as f64);
            let d = (b * b + lam * a).sqrt();
            let s = if b >= S::zero() { d + b } else { lam * a / (d - b) };
            lam / (S::of(2.0) * s)
        }
        Branch::ChiZero => -b / a,
        Branch::ChiNeg => {
            let abs_chi = S::of(chi.unsigned_abs() as f64);
            let eight_pi_chi = S::of(8.0) * S::PI() * abs_chi;
            let d = (b * b - eight_pi_chi * a).sqrt();
            let s = if b <= S::zero() {
                d - b
            } else {
                eight_pi_chi * (-a) / (d + b)
            };
            S::of(4.0) * S::PI() * abs_chi / s
        }
    })
}

/// The normalization constant C(α, β): the root of C²α + Cβ = 2πχ selected by
/// the branch formulas. Positive on the χ≠0 branches; for χ=0 its sign is the
/// sign of -β/α.
pub fn compute_c<S: Scalar>(chi: i64, alpha: S, beta: S) -> Result<S, MeanFieldError> {
    compute_c_scaled(chi, &AlphaBeta::plain(alpha, beta))
}

fn f_chi_scaled<S: Scalar>(chi: i64, ab: &AlphaBeta<S>) -> Result<S, MeanFieldError> {
    let status = check_domain_scaled(chi, ab);
    if !status.member {
        return Err(MeanFieldError::DomainViolation {
            branch: status.branch,
            margin: status.margin.f64(),
        });
    }
    let a = ab.alpha_s;
    let b = ab.beta_s;
    let half_shift = ab.shift * S::of(0.5);
    Ok(match status.branch {
        Branch::ChiPos => {
            let lam = S::of(8.0) * S::PI() * S::of(chi as f64);
            let d = (b * b + lam * a).sqrt();
            let s = if b >= S::zero() { d + b } else { lam * a / (d - b) };
            lam * (s.ln() + half_shift + b / s)
        }
        Branch::ChiZero => -S::of(2.0) * b * b / a,
        Branch::ChiNeg => {
            let abs_chi = S::of(chi.unsigned_abs() as f64);
            let eight_pi_chi = S::of(8.0) * S::PI() * abs_chi;
            let d = (b * b - eight_pi_chi * a).sqrt();
            let s = if b <= S::zero() {
                d - b
            } else {
                eight_pi_chi * (-a) / (d + b)
            };
            eight_pi_chi * (-(s.ln() + half_shift) + b / s)
        }
    })
}

/// Branch value of the nonlinear energy term F_χ(α, β).
pub fn f_chi<S: Scalar>(chi: i64, alpha: S, beta: S) -> Result<S, MeanFieldError> {
    f_chi_scaled(chi, &AlphaBeta::plain(alpha, beta))
}

/// Partial derivatives (∂_α F, ∂_β F), routed through C so the identities
/// ∂_α F = 2C² and ∂_β F = 4C hold exactly.
pub fn df_chi<S: Scalar>(chi: i64, alpha: S, beta: S) -> Result<(S, S), MeanFieldError> {
    let c = compute_c(chi, alpha, beta)?;
    Ok((S::of(2.0) * c * c, S::of(4.0) * c))
}

/// Area-weighted mean of a nodal field.
pub fn area_mean<S: Scalar>(ops: &OperatorSet<S>, u: &[S]) -> S {
    crate::ops::integrate_interior(ops, u) / ops.total_area
}

/// Project onto the zero area-weighted-mean subspace.
pub fn zero_mean_project<S: Scalar>(ops: &OperatorSet<S>, u: &mut [S]) {
    let m = area_mean(ops, u);
    for v in u.iter_mut() {
        *v -= m;
    }
}

/// Project a gradient onto the tangent space of the zero-mean constraint:
/// subtract the component along the area-weight vector in the Euclidean
/// nodal inner product.
pub fn project_gradient<S: Scalar>(ops: &OperatorSet<S>, g: &mut [S]) {
    let a = &ops.vertex_areas;
    let num: S = g.iter().zip(a).map(|(&gi, &ai)| gi * ai).sum();
    let den: S = a.iter().map(|&ai| ai * ai).sum();
    let c = num / den;
    for (gi, &ai) in g.iter_mut().zip(a) {
        *gi -= c * ai;
    }
}

/// How the energy is evaluated along a descent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EvalMode<S: Scalar> {
    /// The energy on its open domain H_χ.
    Strict,
    /// χ=0 with sign-definite K: F₀ = -2β²/α extends smoothly to every field
    /// with α ≠ 0, and the sign of C at the minimizer decides between h
    /// and -h.
    ExtendedChiZero,
    /// The λ-family on χ>0 surfaces.
    Lambda(S),
}

/// A fully evaluated state: integrals, domain status, normalization constant,
/// energy value and projected gradient.
#[derive(Debug, Clone)]
pub struct MeanFieldState<S: Scalar> {
    pub u: Vec<S>,
    pub alpha: S,
    pub beta: S,
    pub ab: AlphaBeta<S>,
    pub domain: DomainStatus<S>,
    /// Normalization constant (the λ-analogue in λ mode). Signed for χ=0.
    pub c: S,
    /// ln C when C > 0, computed without materializing the shift.
    pub c_log: Option<S>,
    pub j: S,
    pub grad: Vec<S>,
    pub grad_norm_inf: S,
}

pub(crate) fn evaluate<S: Scalar>(
    spec: &ProblemSpec<S>,
    u: &[S],
    mode: EvalMode<S>,
) -> Result<MeanFieldState<S>, MeanFieldError> {
    let n = spec.vertex_count();
    if u.len() != n {
        return Err(MeanFieldError::DimensionMismatch {
            expected: n,
            got: u.len(),
        });
    }
    let ab = compute_alpha_beta_scaled(spec, u);
    let domain = check_domain_scaled(spec.chi, &ab);

    let (c_s, f) = match mode {
        EvalMode::Strict => {
            let c_s = compute_c_scaled(spec.chi, &ab)?;
            let f = f_chi_scaled(spec.chi, &ab)?;
            (c_s, f)
        }
        EvalMode::ExtendedChiZero => {
            if spec.chi != 0 {
                return Err(MeanFieldError::DomainViolation {
                    branch: Branch::of_chi(spec.chi),
                    margin: f64::NAN,
                });
            }
            if ab.alpha_s == S::zero() || !ab.alpha_s.is_finite() {
                return Err(MeanFieldError::DomainViolation {
                    branch: Branch::ChiZero,
                    margin: 0.0,
                });
            }
            let c_s = -ab.beta_s / ab.alpha_s;
            let f = -S::of(2.0) * ab.beta_s * ab.beta_s / ab.alpha_s;
            (c_s, f)
        }
        EvalMode::Lambda(lambda) => {
            if spec.chi <= 0 {
                return Err(MeanFieldError::LambdaNeedsPositiveChi { chi: spec.chi });
            }
            if !(lambda > S::zero()) {
                return Err(MeanFieldError::BadLambda {
                    lambda: lambda.f64(),
                });
            }
            // Domain analogue: α > -(β₊)²/λ.
            let bp = positive_part(ab.beta_s);
            let margin_s = ab.alpha_s + bp * bp / lambda;
            if !(margin_s > S::zero()) {
                return Err(MeanFieldError::DomainViolation {
                    branch: Branch::ChiPos,
                    margin: margin_s.f64(),
                });
            }
            let a = ab.alpha_s;
            let b = ab.beta_s;
            let d = (b * b + lambda * a).sqrt();
            let s = if b >= S::zero() {
                d + b
            } else {
                lambda * a / (d - b)
            };
            let c_s = lambda / (S::of(2.0) * s);
            let f = lambda * (s.ln() + ab.shift * S::of(0.5) + b / s);
            (c_s, f)
        }
    };

    // Nonlinear part of the gradient through the exact derivative identities
    // ∂_α F = 2C², ∂_β F = 4C, evaluated with shifted exponentials.
    let mut grad = vec![S::zero(); n];
    spec.ops.stiffness.matvec(u, &mut grad);
    let dirichlet = dirichlet_energy(&spec.ops, u);
    let two = S::of(2.0);
    let half = S::of(0.5);
    for i in 0..n {
        let e = (u[i] - ab.shift).exp();
        grad[i] -= two * c_s * c_s * spec.k[i] * spec.ops.vertex_areas[i] * e;
        let bw = spec.ops.boundary_weights[i];
        if bw > S::zero() {
            let eh = ((u[i] - ab.shift) * half).exp();
            grad[i] -= two * c_s * spec.h[i] * bw * eh;
        }
    }
    project_gradient(&spec.ops, &mut grad);
    let grad_norm_inf = grad.iter().fold(S::zero(), |m, g| m.max(g.abs()));

    let half_shift = ab.shift * half;
    let c = c_s * (-half_shift).exp();
    let c_log = if c_s > S::zero() {
        Some(c_s.ln() - half_shift)
    } else {
        None
    };
    Ok(MeanFieldState {
        u: u.to_vec(),
        alpha: ab.alpha(),
        beta: ab.beta(),
        ab,
        domain,
        c,
        c_log,
        j: half * dirichlet - f,
        grad,
        grad_norm_inf,
    })
}

/// Energy, gradient and diagnostics of a zero-mean field on the strict
/// domain H_χ.
pub fn energy<S: Scalar>(
    spec: &ProblemSpec<S>,
    u: &[S],
) -> Result<MeanFieldState<S>, MeanFieldError> {
    evaluate(spec, u, EvalMode::Strict)
}

/// J_λ(u) on a χ>0 surface.
pub fn lambda_energy<S: Scalar>(
    spec: &ProblemSpec<S>,
    u: &[S],
    lambda: S,
) -> Result<S, MeanFieldError> {
    Ok(evaluate(spec, u, EvalMode::Lambda(lambda))?.j)
}

/// Projected gradient of J_λ.
pub fn lambda_gradient<S: Scalar>(
    spec: &ProblemSpec<S>,
    u: &[S],
    lambda: S,
) -> Result<Vec<S>, MeanFieldError> {
    Ok(evaluate(spec, u, EvalMode::Lambda(lambda))?.grad)
}

/// Shift an in-domain field by 2 ln C(u), producing the geometric solution
/// candidate v. The shifted field satisfies ∫K e^v + ∫h e^{v/2} = 2πχ exactly
/// (the defining quadratic identity), for every in-domain u.
pub fn normalize_solution<S: Scalar>(
    spec: &ProblemSpec<S>,
    u: &[S],
) -> Result<Vec<S>, MeanFieldError> {
    let state = energy(spec, u)?;
    let c_log = match state.c_log {
        Some(cl) => cl,
        None => {
            return Err(MeanFieldError::NonGeometricBranch { c: state.c.f64() });
        }
    };
    if state.c.abs() <= degenerate_c_threshold(&state.ab) {
        return Err(MeanFieldError::DegenerateC {
            c_abs: state.c.abs().f64(),
        });
    }
    let offset = S::of(2.0) * c_log;
    Ok(u.iter().map(|&ui| ui + offset).collect())
}

/// Relative threshold below which C counts as degenerate.
pub fn degenerate_c_threshold<S: Scalar>(ab: &AlphaBeta<S>) -> S {
    let ratio = if ab.alpha_s.abs() > S::zero() {
        (ab.beta_s / ab.alpha_s).abs() * (-ab.shift * S::of(0.5)).exp()
    } else {
        S::zero()
    };
    S::of(1e-8) * (S::one() + ratio)
}

/// Feasibility of the sign conditions for non-emptiness of the domain.
#[derive(Debug, Clone)]
pub struct FeasibilityReport {
    pub feasible: bool,
    pub branch: Branch,
    /// Which clause decided, in words.
    pub clause: String,
}

/// Evaluate the non-emptiness sign conditions from the nodal curvature data:
/// χ>0 needs K or h positive somewhere; χ=0 needs a pair with K(x)h(y) < 0;
/// χ<0 needs K or h negative somewhere. When these fail, the curvature
/// prescription problem itself has no solution.
pub fn sign_conditions<S: Scalar>(spec: &ProblemSpec<S>) -> FeasibilityReport {
    let branch = Branch::of_chi(spec.chi);
    let (min_h, max_h) = spec.boundary_h_range();
    let min_k = spec.min_k();
    let max_k = spec.max_k();
    let (feasible, clause) = match branch {
        Branch::ChiPos => {
            if max_k > S::zero() {
                (true, "K positive somewhere".to_string())
            } else if max_h > S::zero() {
                (true, "h positive somewhere on the boundary".to_string())
            } else {
                (
                    false,
                    "χ>0 needs K or h positive somewhere; both are everywhere non-positive"
                        .to_string(),
                )
            }
        }
        Branch::ChiZero => {
            if max_k > S::zero() && min_h < S::zero() {
                (true, "K(x) > 0 > h(y) for some pair".to_string())
            } else if min_k < S::zero() && max_h > S::zero() {
                (true, "K(x) < 0 < h(y) for some pair".to_string())
            } else {
                (
                    false,
                    "χ=0 needs K(x)h(y) < 0 for some pair; no opposite-sign pair exists"
                        .to_string(),
                )
            }
        }
        Branch::ChiNeg => {
            if min_k < S::zero() {
                (true, "K negative somewhere".to_string())
            } else if min_h < S::zero() {
                (true, "h negative somewhere on the boundary".to_string())
            } else {
                (
                    false,
                    "χ<0 needs K or h negative somewhere; both are everywhere non-negative"
                        .to_string(),
                )
            }
        }
    };
    FeasibilityReport {
        feasible,
        branch,
        clause,
    }
}

/// Amplitude cap (log scale) for the constructive search.
const AMPLITUDE_CAP: f64 = 600.0;

/// Plateau bump: 1 on the selected vertices, 1/2 on their graph neighbors,
/// 0 elsewhere.
fn plateau_bump<S: Scalar>(spec: &ProblemSpec<S>, selected: &[usize]) -> Vec<S> {
    let n = spec.vertex_count();
    let mut phi = vec![S::zero(); n];
    for &v in selected {
        phi[v] = S::one();
    }
    let mut halo = vec![false; n];
    for &[a, b] in &spec.mesh.edges {
        if phi[a] == S::one() && phi[b] == S::zero() {
            halo[b] = true;
        }
        if phi[b] == S::one() && phi[a] == S::zero() {
            halo[a] = true;
        }
    }
    for v in 0..n {
        if halo[v] && phi[v] == S::zero() {
            phi[v] = S::of(0.5);
        }
    }
    phi
}

/// Interior vertices where `sign * K` is within a factor 1/2 of its maximum.
fn interior_region<S: Scalar>(spec: &ProblemSpec<S>, sign: S) -> Vec<usize> {
    let best = (0..spec.vertex_count())
        .filter(|&v| spec.ops.boundary_weights[v] == S::zero())
        .map(|v| sign * spec.k[v])
        .fold(S::neg_infinity(), |m, v| m.max(v));
    if !(best > S::zero()) {
        return Vec::new();
    }
    let cut = best * S::of(0.5);
    (0..spec.vertex_count())
        .filter(|&v| spec.ops.boundary_weights[v] == S::zero() && sign * spec.k[v] >= cut)
        .collect()
}

/// Boundary vertices where `sign * h` is within a factor 1/2 of its maximum.
fn boundary_region<S: Scalar>(spec: &ProblemSpec<S>, sign: S) -> Vec<usize> {
    let best = (0..spec.vertex_count())
        .filter(|&v| spec.ops.boundary_weights[v] > S::zero())
        .map(|v| sign * spec.h[v])
        .fold(S::neg_infinity(), |m, v| m.max(v));
    if !(best > S::zero()) {
        return Vec::new();
    }
    let cut = best * S::of(0.5);
    (0..spec.vertex_count())
        .filter(|&v| spec.ops.boundary_weights[v] > S::zero() && sign * spec.h[v] >= cut)
        .collect()
}

/// Construct a point of the open domain H_χ by amplifying plateau bumps on
/// the sign regions of K and h, doubling amplitudes until the membership
/// margin turns positive. Returns the zero-mean projection (which preserves
/// the margin sign).
pub fn find_domain_point<S: Scalar>(spec: &ProblemSpec<S>) -> Result<Vec<S>, MeanFieldError> {
    let report = sign_conditions(spec);
    if !report.feasible {
        return Err(MeanFieldError::Infeasible {
            clause: report.clause,
        });
    }
    let n = spec.vertex_count();
    let margin_ok = |u: &[S]| -> bool {
        let ab = compute_alpha_beta_scaled(spec, u);
        let st = check_domain_scaled(spec.chi, &ab);
        st.member && st.rel_margin > S::of(1e-8)
    };

    let zero = vec![S::zero(); n];
    if margin_ok(&zero) {
        return Ok(zero);
    }

    // Candidate bump pairs per branch: the sign of K pursued by an interior
    // plateau and the sign of h pursued by a boundary plateau. A zero entry
    // skips that bump.
    let plans: Vec<(f64, f64)> = match Branch::of_chi(spec.chi) {
        Branch::ChiPos => vec![(1.0, 0.0), (0.0, 1.0)],
        Branch::ChiNeg => vec![(-1.0, 0.0), (0.0, -1.0)],
        Branch::ChiZero => vec![
            // α > 0 with β < 0, then α < 0 with β > 0, then interior-only.
            (1.0, -1.0),
            (-1.0, 1.0),
            (1.0, 0.0),
            (-1.0, 0.0),
        ],
    };

    for (ks, hs) in plans {
        let phi_int = if ks != 0.0 {
            let region = interior_region(spec, S::of(ks));
            if region.is_empty() {
                continue;
            }
            plateau_bump(spec, &region)
        } else {
            vec![S::zero(); n]
        };
        let phi_bd = if hs != 0.0 {
            let region = boundary_region(spec, S::of(hs));
            if region.is_empty() {
                continue;
            }
            plateau_bump(spec, &region)
        } else {
            vec![S::zero(); n]
        };

        // The interior amplitude dominates the boundary one so the boundary
        // bump cannot flip the sign of α.
        let mut c2 = S::zero();
        loop {
            let c1 = if ks != 0.0 {
                c2 + c2 + S::of(16.0)
            } else {
                S::zero()
            };
            if c1.f64().max(c2.f64()) > AMPLITUDE_CAP {
                break;
            }
            let u: Vec<S> = (0..n).map(|v| c1 * phi_int[v] + c2 * phi_bd[v]).collect();
            if margin_ok(&u) {
                let mut out = u;
                zero_mean_project(&spec.ops, &mut out);
                return Ok(out);
            }
            if hs == 0.0 {
                // No boundary bump to grow; retry with a larger interior
                // amplitude by abusing c2 as the doubling counter.
                if c1 > S::of(AMPLITUDE_CAP * 0.5) {
                    break;
                }
            }
            c2 = if c2 == S::zero() {
                S::of(4.0)
            } else {
                c2 * S::of(2.0)
            };
        }
    }
    Err(MeanFieldError::ConstructiveSearchFailed { cap: AMPLITUDE_CAP })
}
