//! Discrete operators assembled from an intrinsic mesh: cotangent stiffness,
//! lumped vertex areas, boundary weights, and the geometric consistency check.

use serde::Serialize;

use crate::mesh::IntrinsicMesh;
use crate::scalar::Scalar;

/// Symmetric sparse matrix in CSR form.
#[derive(Debug, Clone)]
pub struct SparseSym<S: Scalar> {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<S>,
}

impl<S: Scalar> SparseSym<S> {
    /// Assemble from (row, col, value) triplets; duplicates are summed.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, S)]) -> Self {
        let mut counts = vec![0usize; n + 1];
        for &(i, _, _) in triplets {
            counts[i + 1] += 1;
        }
        for i in 0..n {
            counts[i + 1] += counts[i];
        }
        let mut cols = vec![0usize; triplets.len()];
        let mut vals = vec![S::zero(); triplets.len()];
        let mut cursor = counts.clone();
        for &(i, j, v) in triplets {
            let p = cursor[i];
            cols[p] = j;
            vals[p] = v;
            cursor[i] += 1;
        }
        // Sort each row by column and merge duplicates.
        let mut row_ptr = vec![0usize; n + 1];
        let mut out_cols = Vec::with_capacity(cols.len());
        let mut out_vals = Vec::with_capacity(vals.len());
        for i in 0..n {
            let lo = counts[i];
            let hi = counts[i + 1];
            let mut row: Vec<(usize, S)> =
                (lo..hi).map(|p| (cols[p], vals[p])).collect();
            row.sort_by_key(|&(c, _)| c);
            for (c, v) in row {
                if let Some(last) = out_cols.last() {
                    if *last == c && out_cols.len() > row_ptr[i] {
                        *out_vals.last_mut().unwrap() += v;
                        continue;
                    }
                }
                out_cols.push(c);
                out_vals.push(v);
            }
            row_ptr[i + 1] = out_cols.len();
        }
        SparseSym {
            n,
            row_ptr,
            cols: out_cols,
            vals: out_vals,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.cols.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, S)> + '_ {
        (self.row_ptr[i]..self.row_ptr[i + 1]).map(move |p| (self.cols[p], self.vals[p]))
    }

    pub fn matvec(&self, x: &[S], y: &mut [S]) {
        debug_assert_eq!(x.len(), self.n);
        for (i, yi) in y.iter_mut().enumerate().take(self.n) {
            let mut acc = S::zero();
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.vals[p] * x[self.cols[p]];
            }
            *yi = acc;
        }
    }

    pub fn row_sum(&self, i: usize) -> S {
        (self.row_ptr[i]..self.row_ptr[i + 1])
            .map(|p| self.vals[p])
            .sum()
    }

    /// Entries as (row, col, value) triplets in CSR order.
    pub fn triplets(&self) -> Vec<(usize, usize, S)> {
        let mut out = Vec::with_capacity(self.nnz());
        for i in 0..self.n {
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                out.push((i, self.cols[p], self.vals[p]));
            }
        }
        out
    }
}

/// Stiffness, quadrature weights and assembly diagnostics for one mesh.
#[derive(Debug, Clone)]
pub struct OperatorSet<S: Scalar> {
    pub stiffness: SparseSym<S>,
    /// Cotangent weight per mesh edge (aligned with `mesh.edges`).
    pub edge_weights: Vec<(usize, usize, S)>,
    /// Lumped barycentric area per vertex; sums to the mesh area.
    pub vertex_areas: Vec<S>,
    /// Half the adjacent boundary edge lengths per vertex (zero off the
    /// boundary); sums to the total boundary length.
    pub boundary_weights: Vec<S>,
    pub total_area: S,
    pub total_boundary_length: S,
    /// Faces whose minimum angle fell below the degeneracy threshold.
    pub degenerate_faces: Vec<(usize, S)>,
    pub min_angle: S,
}

/// Minimum triangle angle below which a face is reported (not rejected).
const DEGENERATE_ANGLE: f64 = 1e-3;

fn heron<S: Scalar>(l0: S, l1: S, l2: S) -> S {
    // Kahan's stable ordering: a >= b >= c.
    let mut a = l0;
    let mut b = l1;
    let mut c = l2;
    if a < b {
        std::mem::swap(&mut a, &mut b);
    }
    if b < c {
        std::mem::swap(&mut b, &mut c);
    }
    if a < b {
        std::mem::swap(&mut a, &mut b);
    }
    let t = (a + (b + c)) * (c - (a - b)) * (c + (a - b)) * (a + (b - c));
    S::of(0.25) * t.max(S::zero()).sqrt()
}

/// Assemble cotangent stiffness and lumped weights from edge lengths alone.
///
/// Natural (Neumann) boundary treatment: no rows are eliminated. Negative
/// cotangent weights on obtuse configurations are kept as-is.
pub fn assemble_operators<S: Scalar>(mesh: &IntrinsicMesh<S>) -> OperatorSet<S> {
    let n = mesh.vertex_count();
    let mut edge_w = vec![S::zero(); mesh.edge_count()];
    let mut areas = vec![S::zero(); n];
    let mut degenerate = Vec::new();
    let mut min_angle = S::PI();

    let third = S::one() / S::of(3.0);
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let ls = mesh.corner_lengths(t);
        let area = heron(ls[0], ls[1], ls[2]);
        let ids = mesh.tri_edge_ids(t);
        let mut face_min = S::PI();
        for c in 0..3 {
            let opp = ls[c];
            let b = ls[(c + 1) % 3];
            let d = ls[(c + 2) % 3];
            // cot(angle at corner c) = (b^2 + d^2 - opp^2) / (4 area)
            let cot = (b * b + d * d - opp * opp) / (S::of(4.0) * area);
            edge_w[ids[c]] += cot * S::of(0.5);
            let cos = ((b * b + d * d - opp * opp) / (S::of(2.0) * b * d))
                .max(-S::one())
                .min(S::one());
            face_min = face_min.min(cos.acos());
        }
        min_angle = min_angle.min(face_min);
        if face_min < S::of(DEGENERATE_ANGLE) {
            degenerate.push((t, face_min));
        }
        for &v in tri {
            areas[v] += area * third;
        }
    }

    let mut bweights = vec![S::zero(); n];
    for &e in mesh.boundary_edge_ids() {
        let [a, b] = mesh.edges[e];
        let half = mesh.edge_lengths[e] * S::of(0.5);
        bweights[a] += half;
        bweights[b] += half;
    }

    let mut triplets = Vec::with_capacity(4 * edge_w.len());
    let mut edge_weights = Vec::with_capacity(edge_w.len());
    for (e, &[a, b]) in mesh.edges.iter().enumerate() {
        let w = edge_w[e];
        edge_weights.push((a, b, w));
        triplets.push((a, a, w));
        triplets.push((b, b, w));
        triplets.push((a, b, -w));
        triplets.push((b, a, -w));
    }
    let stiffness = SparseSym::from_triplets(n, &triplets);

    let total_area = areas.iter().copied().sum();
    let total_boundary_length = bweights.iter().copied().sum();

    OperatorSet {
        stiffness,
        edge_weights,
        vertex_areas: areas,
        boundary_weights: bweights,
        total_area,
        total_boundary_length,
        degenerate_faces: degenerate,
        min_angle,
    }
}

/// Dirichlet energy `u^T L u` (no 1/2 factor), evaluated in the
/// positive-semidefinite edge form.
pub fn dirichlet_energy<S: Scalar>(ops: &OperatorSet<S>, u: &[S]) -> S {
    debug_assert_eq!(u.len(), ops.vertex_areas.len());
    let mut acc = S::zero();
    for &(a, b, w) in &ops.edge_weights {
        let d = u[a] - u[b];
        acc += w * d * d;
    }
    acc
}

/// Mass-weighted interior sum `Σ f_i area_i`.
pub fn integrate_interior<S: Scalar>(ops: &OperatorSet<S>, f: &[S]) -> S {
    debug_assert_eq!(f.len(), ops.vertex_areas.len());
    f.iter()
        .zip(&ops.vertex_areas)
        .map(|(&fi, &ai)| fi * ai)
        .sum()
}

/// Mass-weighted boundary sum `Σ f_i bweight_i`; interior vertices carry zero
/// weight.
pub fn integrate_boundary<S: Scalar>(ops: &OperatorSet<S>, f: &[S]) -> S {
    debug_assert_eq!(f.len(), ops.boundary_weights.len());
    f.iter()
        .zip(&ops.boundary_weights)
        .map(|(&fi, &bi)| fi * bi)
        .sum()
}

pub fn euler_characteristic<S: Scalar>(mesh: &IntrinsicMesh<S>) -> i64 {
    mesh.euler_characteristic()
}

/// Angle-defect summary: interior defects approximate the total Gaussian
/// curvature, boundary turning defects the total geodesic curvature, and
/// their sum ties to 2πχ exactly (up to roundoff) on any valid mesh.
#[derive(Debug, Clone, Serialize)]
pub struct BackgroundReport {
    pub interior_defect_sum: f64,
    pub boundary_turning_sum: f64,
    pub gauss_bonnet_residual: f64,
    pub chi: i64,
}

pub fn background_check<S: Scalar>(mesh: &IntrinsicMesh<S>) -> BackgroundReport {
    let n = mesh.vertex_count();
    let mut angle_sum = vec![S::zero(); n];
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let ls = mesh.corner_lengths(t);
        for c in 0..3 {
            let opp = ls[c];
            let b = ls[(c + 1) % 3];
            let d = ls[(c + 2) % 3];
            let cos = ((b * b + d * d - opp * opp) / (S::of(2.0) * b * d))
                .max(-S::one())
                .min(S::one());
            angle_sum[tri[c]] += cos.acos();
        }
    }
    let two_pi = S::of(2.0) * S::PI();
    let mut interior = S::zero();
    let mut turning = S::zero();
    for (v, &total) in angle_sum.iter().enumerate() {
        if mesh.is_boundary_vertex(v) {
            turning += S::PI() - total;
        } else {
            interior += two_pi - total;
        }
    }
    let chi = mesh.euler_characteristic();
    let residual = (interior + turning - two_pi * S::of(chi as f64)).abs();
    BackgroundReport {
        interior_defect_sum: interior.f64(),
        boundary_turning_sum: turning.f64(),
        gauss_bonnet_residual: residual.f64(),
        chi,
    }
}
