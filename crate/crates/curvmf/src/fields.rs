//! Nodal field construction: built-in curvature families, random smooth
//! batteries, spike profiles and geodesic distance fields.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::meanfield::{check_domain_scaled, compute_alpha_beta_scaled, zero_mean_project, ProblemSpec};
use crate::mesh::IntrinsicMesh;
use crate::ops::OperatorSet;
use crate::scalar::Scalar;

#[derive(Debug, Error)]
pub enum FieldError {
    #[error("curvature family `{family}` needs an embedded azimuth, which `{mesh}` lacks")]
    NoAzimuth { family: String, mesh: String },
    #[error("vertex id {0} out of range")]
    BadVertexId(usize),
    #[error("sample table covers {got} of {expected} vertices")]
    IncompleteSamples { expected: usize, got: usize },
}

/// Analytic curvature families evaluated at mesh vertices.
#[derive(Debug, Clone)]
pub enum CurvatureFamily<S: Scalar> {
    Constant(S),
    /// offset + amplitude · cos(mode · azimuth); k-symmetric when
    /// mode ≡ 0 mod k.
    AzimuthalCosine { offset: S, amplitude: S, mode: u32 },
    /// Smooth bump of the given height supported within a geodesic radius of
    /// a center vertex.
    CapBump { center: usize, radius: S, height: S },
    /// Per-vertex samples, e.g. read from CSV.
    Samples(Vec<S>),
}

impl<S: Scalar> CurvatureFamily<S> {
    pub fn evaluate(&self, mesh: &IntrinsicMesh<S>) -> Result<Vec<S>, FieldError> {
        let n = mesh.vertex_count();
        match self {
            CurvatureFamily::Constant(c) => Ok(vec![*c; n]),
            CurvatureFamily::AzimuthalCosine {
                offset,
                amplitude,
                mode,
            } => {
                let mut out = Vec::with_capacity(n);
                for v in 0..n {
                    let phi = mesh.azimuth(v).ok_or_else(|| FieldError::NoAzimuth {
                        family: "azimuthal_cosine".into(),
                        mesh: mesh.name.clone(),
                    })?;
                    out.push(*offset + *amplitude * (S::of(*mode as f64) * phi).cos());
                }
                Ok(out)
            }
            CurvatureFamily::CapBump {
                center,
                radius,
                height,
            } => {
                if *center >= n {
                    return Err(FieldError::BadVertexId(*center));
                }
                let dist = graph_distance(mesh, &[*center]);
                let mut out = vec![S::zero(); n];
                for v in 0..n {
                    let t = dist[v] / *radius;
                    if t < S::one() {
                        let w = S::one() - t * t;
                        out[v] = *height * w * w;
                    }
                }
                Ok(out)
            }
            CurvatureFamily::Samples(vals) => {
                if vals.len() != n {
                    return Err(FieldError::IncompleteSamples {
                        expected: n,
                        got: vals.len(),
                    });
                }
                Ok(vals.clone())
            }
        }
    }
}

struct HeapEntry<S: Scalar> {
    dist: S,
    vertex: usize,
}

impl<S: Scalar> PartialEq for HeapEntry<S> {
    fn eq(&self, other: &Self) -> bool {
        self.dist == other.dist && self.vertex == other.vertex
    }
}
impl<S: Scalar> Eq for HeapEntry<S> {}
impl<S: Scalar> Ord for HeapEntry<S> {
    fn cmp(&self, other: &Self) -> Ordering {
        // Min-heap on distance; tie-break on vertex id for determinism.
        other
            .dist
            .partial_cmp(&self.dist)
            .unwrap_or(Ordering::Equal)
            .then_with(|| other.vertex.cmp(&self.vertex))
    }
}
impl<S: Scalar> PartialOrd for HeapEntry<S> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Multi-source shortest-path distance over the edge graph (Dijkstra).
/// An intrinsic stand-in for geodesic distance, adequate for bump supports
/// and spike profiles.
pub fn graph_distance<S: Scalar>(mesh: &IntrinsicMesh<S>, sources: &[usize]) -> Vec<S> {
    let n = mesh.vertex_count();
    let mut adj: Vec<Vec<(usize, S)>> = vec![Vec::new(); n];
    for (e, &[a, b]) in mesh.edges.iter().enumerate() {
        let l = mesh.edge_lengths[e];
        adj[a].push((b, l));
        adj[b].push((a, l));
    }
    let mut dist = vec![S::infinity(); n];
    let mut heap = BinaryHeap::new();
    for &s in sources {
        dist[s] = S::zero();
        heap.push(HeapEntry {
            dist: S::zero(),
            vertex: s,
        });
    }
    while let Some(HeapEntry { dist: d, vertex: v }) = heap.pop() {
        if d > dist[v] {
            continue;
        }
        for &(w, l) in &adj[v] {
            let nd = d + l;
            if nd < dist[w] {
                dist[w] = nd;
                heap.push(HeapEntry { dist: nd, vertex: w });
            }
        }
    }
    dist
}

/// Distance from one vertex. Surfaces with a usable chart get the exact
/// metric (great-circle arcs on the hemisphere, the flat product metric on
/// the cylinder); everything else falls back to the graph metric.
pub fn point_distance<S: Scalar>(mesh: &IntrinsicMesh<S>, center: usize) -> Vec<S> {
    if let Some(pos) = &mesh.embedding {
        if mesh.name.starts_with("hemisphere") {
            let c = pos[center];
            return pos
                .iter()
                .map(|p| {
                    let d = [p[0] - c[0], p[1] - c[1], p[2] - c[2]];
                    let chord = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
                    S::of(2.0) * (chord * S::of(0.5)).min(S::one()).asin()
                })
                .collect();
        }
        if mesh.name.starts_with("cylinder") {
            let c = pos[center];
            let c_theta = c[1].atan2(c[0]);
            return pos
                .iter()
                .map(|p| {
                    let mut dt = (p[1].atan2(p[0]) - c_theta).abs();
                    let two_pi = S::of(2.0) * S::PI();
                    if dt > S::PI() {
                        dt = two_pi - dt;
                    }
                    let dx = p[2] - c[2];
                    dx.hypot(dt)
                })
                .collect();
        }
    }
    graph_distance(mesh, &[center])
}

/// Distance to a boundary loop. The flat cylinder gets its exact product
/// coordinate; everything else falls back to the graph metric.
pub fn boundary_distance<S: Scalar>(mesh: &IntrinsicMesh<S>, loop_idx: usize) -> Vec<S> {
    if mesh.name.starts_with("cylinder") {
        if let Some(pos) = &mesh.embedding {
            let xs: Vec<S> = pos.iter().map(|p| p[2]).collect();
            let xmax = xs.iter().copied().fold(S::zero(), |m, x| m.max(x));
            let at_zero = mesh.boundary_loops[loop_idx]
                .first()
                .map(|&v| xs[v] < xmax * S::of(0.5))
                .unwrap_or(true);
            return if at_zero {
                xs
            } else {
                xs.iter().map(|&x| xmax - x).collect()
            };
        }
    }
    graph_distance(mesh, &mesh.boundary_loops[loop_idx])
}

/// Deterministic RNG for batteries and random starts.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random smooth field: nodal white noise relaxed by a few neighbor-averaging
/// sweeps, rescaled to the requested sup-norm. Not mean-projected.
pub fn random_smooth_field<S: Scalar>(
    mesh: &IntrinsicMesh<S>,
    _ops: &OperatorSet<S>,
    rng: &mut ChaCha8Rng,
    amplitude: f64,
) -> Vec<S> {
    let n = mesh.vertex_count();
    let mut u: Vec<S> = (0..n).map(|_| S::of(rng.gen::<f64>() * 2.0 - 1.0)).collect();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &[a, b] in &mesh.edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut next = vec![S::zero(); n];
    for _ in 0..8 {
        for v in 0..n {
            let mut acc = u[v];
            for &w in &adj[v] {
                acc += u[w];
            }
            next[v] = acc / S::of_usize(adj[v].len() + 1);
        }
        std::mem::swap(&mut u, &mut next);
    }
    let sup = u.iter().fold(S::zero(), |m, x| m.max(x.abs()));
    if sup > S::zero() {
        let scale = S::of(amplitude) / sup;
        for x in u.iter_mut() {
            *x *= scale;
        }
    }
    u
}

/// Draw zero-mean random smooth fields until one lands in the open domain;
/// violations are re-seeded. Returns `None` after `max_tries`.
pub fn random_in_domain<S: Scalar>(
    spec: &ProblemSpec<S>,
    rng: &mut ChaCha8Rng,
    max_tries: usize,
) -> Option<Vec<S>> {
    for _ in 0..max_tries {
        let amplitude = 0.2 + 1.3 * rng.gen::<f64>();
        let mut u = random_smooth_field(&spec.mesh, &spec.ops, rng, amplitude);
        zero_mean_project(&spec.ops, &mut u);
        let ab = compute_alpha_beta_scaled(spec, &u);
        let st = check_domain_scaled(spec.chi, &ab);
        if st.member && st.rel_margin > S::of(1e-10) {
            return Some(u);
        }
    }
    None
}

/// Random in-domain (α, β) pair for one χ branch, for testing the scalar
/// algebra directly.
pub fn random_in_domain_ab(chi: i64, rng: &mut ChaCha8Rng) -> (f64, f64) {
    let eight_pi = 8.0 * std::f64::consts::PI;
    loop {
        let beta = 40.0 * (rng.gen::<f64>() - 0.5);
        match chi.cmp(&0) {
            Ordering::Greater => {
                let lo = -beta.max(0.0).powi(2) / (eight_pi * chi as f64);
                let alpha = lo + (0.1 + 30.0 * rng.gen::<f64>());
                return (alpha, beta);
            }
            Ordering::Equal => {
                if beta.abs() < 0.1 {
                    continue;
                }
                let mag = 0.1 + 30.0 * rng.gen::<f64>();
                return (-beta.signum() * mag, beta);
            }
            Ordering::Less => {
                let hi = -(-beta).max(0.0).powi(2) / (eight_pi * chi.unsigned_abs() as f64);
                let alpha = hi - (0.1 + 30.0 * rng.gen::<f64>());
                return (alpha, beta);
            }
        }
    }
}

/// Logarithmic spike of peak `amplitude` at the given centers: the nodal
/// sampling of `min(A, -4 ln(d / outer_radius))₊` with d the distance to the
/// nearest center. The profile's width shrinks with the amplitude, which is
/// what makes exponential-integral functionals grow along the sweep.
pub fn log_spike<S: Scalar>(
    mesh: &IntrinsicMesh<S>,
    centers: &[usize],
    amplitude: S,
    outer_radius: S,
) -> Vec<S> {
    let mut dist = vec![S::infinity(); mesh.vertex_count()];
    for &c in centers {
        for (d, pd) in dist.iter_mut().zip(point_distance(mesh, c)) {
            *d = (*d).min(pd);
        }
    }
    dist.iter()
        .map(|&d| {
            if d >= outer_radius {
                S::zero()
            } else {
                let d_safe = d.max(outer_radius * S::of(1e-300));
                (-S::of(4.0) * (d_safe / outer_radius).ln())
                    .min(amplitude)
                    .max(S::zero())
            }
        })
        .collect()
}
