#![allow(dead_code)] // shared across test targets; not every target uses every helper

//! Shared helpers for the integration suites: problem builders and the
//! independent 1-D shooting oracle for the axisymmetric cylinder reduction.

use curvmf::fields::CurvatureFamily;
use curvmf::meanfield::ProblemSpec;
use curvmf::mesh::{gen_flat_cylinder, gen_hemisphere, gen_pair_of_pants};

pub fn hemisphere_spec(
    k_order: usize,
    refinement: usize,
    h_family: CurvatureFamily<f64>,
) -> ProblemSpec<f64> {
    let (mesh, orbits) = gen_hemisphere::<f64>(k_order, refinement).unwrap();
    let n = mesh.vertex_count();
    let h = h_family.evaluate(&mesh).unwrap();
    ProblemSpec::new(mesh, Some(orbits), vec![1.0; n], h, None).unwrap()
}

pub fn cylinder_spec(
    n_axial: usize,
    n_circ: usize,
    k_family: CurvatureFamily<f64>,
    h_family: CurvatureFamily<f64>,
) -> ProblemSpec<f64> {
    let mesh = gen_flat_cylinder::<f64>(1.0, n_axial, n_circ).unwrap();
    let k = k_family.evaluate(&mesh).unwrap();
    let h = h_family.evaluate(&mesh).unwrap();
    ProblemSpec::new(mesh, None, k, h, None).unwrap()
}

pub fn pants_spec(refinement: usize, k_const: f64, h_const: f64) -> ProblemSpec<f64> {
    let mesh = gen_pair_of_pants::<f64>([1.0, 1.0, 1.0], refinement).unwrap();
    let n = mesh.vertex_count();
    ProblemSpec::new(mesh, None, vec![k_const; n], vec![h_const; n], None).unwrap()
}

/// Axisymmetric two-point boundary value problem on [0, L]:
///
///   w'' = 2 e^w,   -w'(0) = 2 h e^{w(0)/2},   w'(L) = 2 h e^{w(L)/2},
///
/// the reduction of the curvature prescription with K ≡ -1 and constant h on
/// the flat cylinder. Solved by shooting on w(0) with RK4 integration and
/// bisection on the right boundary residual. Entirely independent of the
/// mesh/energy pipeline.
pub struct ShootingSolution {
    pub xs: Vec<f64>,
    pub ws: Vec<f64>,
}

impl ShootingSolution {
    /// Piecewise-linear sample at x (grid is fine enough that interpolation
    /// error is negligible against the oracle tolerance).
    pub fn at(&self, x: f64) -> f64 {
        let n = self.xs.len() - 1;
        let h = self.xs[n] / n as f64;
        let i = ((x / h).floor() as usize).min(n - 1);
        let t = (x - self.xs[i]) / h;
        self.ws[i] * (1.0 - t) + self.ws[i + 1] * t
    }
}

fn integrate(s0: f64, h_const: f64, length: f64, steps: usize) -> (Vec<f64>, Vec<f64>, f64) {
    let dx = length / steps as f64;
    let f = |w: f64| 2.0 * w.exp();
    let mut w = s0;
    let mut p = -2.0 * h_const * (s0 / 2.0).exp();
    let mut xs = Vec::with_capacity(steps + 1);
    let mut ws = Vec::with_capacity(steps + 1);
    xs.push(0.0);
    ws.push(w);
    for i in 0..steps {
        // RK4 on (w, p) with p = w'.
        let (k1w, k1p) = (p, f(w));
        let (k2w, k2p) = (p + 0.5 * dx * k1p, f(w + 0.5 * dx * k1w));
        let (k3w, k3p) = (p + 0.5 * dx * k2p, f(w + 0.5 * dx * k2w));
        let (k4w, k4p) = (p + dx * k3p, f(w + dx * k3w));
        w += dx / 6.0 * (k1w + 2.0 * k2w + 2.0 * k3w + k4w);
        p += dx / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
        xs.push((i + 1) as f64 * dx);
        ws.push(w);
    }
    (xs, ws, p)
}

pub fn shoot_cylinder_profile(h_const: f64, length: f64) -> ShootingSolution {
    let steps = 20_000;
    let residual = |s: f64| -> f64 {
        let (_, ws, p_end) = integrate(s, h_const, length, steps);
        p_end - 2.0 * h_const * (ws[ws.len() - 1] / 2.0).exp()
    };
    // Bracket the root by scanning the starting value.
    let lo = -20.0;
    let hi = 5.0;
    let mut prev_s = lo;
    let mut prev_r = residual(lo);
    let mut bracket = None;
    let scan = 120;
    for i in 1..=scan {
        let s = lo + (hi - lo) * i as f64 / scan as f64;
        let r = residual(s);
        if prev_r == 0.0 || prev_r.signum() != r.signum() {
            bracket = Some((prev_s, s));
            break;
        }
        prev_s = s;
        prev_r = r;
    }
    let (mut a, mut b) = bracket.expect("shooting residual must change sign");
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if residual(a).signum() == residual(m).signum() {
            a = m;
        } else {
            b = m;
        }
        if (b - a).abs() < 1e-14 {
            break;
        }
    }
    let s = 0.5 * (a + b);
    let (xs, ws, _) = integrate(s, h_const, length, steps);
    ShootingSolution { xs, ws }
}
