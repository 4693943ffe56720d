//! Intrinsic triangle meshes of the model surfaces.
//!
//! A mesh is connectivity plus one positive length per edge. Every discrete
//! operator downstream consumes edge lengths only; embedded coordinates are
//! kept (when they exist) purely for export. This matters for the hyperbolic
//! surface, which has no isometric embedding in 3-space.

mod cylinder;
mod hemisphere;
mod pants;

pub use cylinder::gen_flat_cylinder;
pub use hemisphere::gen_hemisphere;
pub use pants::gen_pair_of_pants;

use std::collections::HashMap;

use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("triangle {face} violates the strict triangle inequality: lengths {lengths:?}")]
    TriangleInequality { face: usize, lengths: [f64; 3] },
    #[error("edge ({0}, {1}) has non-positive or non-finite length")]
    BadEdgeLength(usize, usize),
    #[error("edge ({0}, {1}) is shared by more than two triangles")]
    NonManifoldEdge(usize, usize),
    #[error("inconsistent winding across edge ({0}, {1})")]
    InconsistentWinding(usize, usize),
    #[error("mesh is not connected")]
    Disconnected,
    #[error("vertex {0} belongs to no triangle")]
    IsolatedVertex(usize),
    #[error("boundary walk stalled at vertex {0}")]
    BadBoundary(usize),
    #[error("refinement or grid parameters too small: {0}")]
    DegenerateParameters(String),
    #[error("symmetry orbit map is not a valid action: {0}")]
    BadOrbits(String),
}

/// Triangulated surface with boundary, described intrinsically.
#[derive(Debug, Clone)]
pub struct IntrinsicMesh<S: Scalar> {
    pub name: String,
    vertex_count: usize,
    /// Faces as vertex index triples with consistent winding.
    pub triangles: Vec<[usize; 3]>,
    /// Canonical undirected edges `[v0, v1]` with `v0 < v1`, indexed by first
    /// occurrence while scanning triangles.
    pub edges: Vec<[usize; 2]>,
    /// Intrinsic metric: one positive length per edge.
    pub edge_lengths: Vec<S>,
    /// Closed boundary cycles, each an ordered list of vertex indices.
    pub boundary_loops: Vec<Vec<usize>>,
    /// Optional 3-space positions, for export only.
    pub embedding: Option<Vec<[S; 3]>>,
    /// `tri_edges[t][c]` is the edge opposite corner `c` of triangle `t`.
    tri_edges: Vec<[usize; 3]>,
    boundary_edges: Vec<usize>,
    boundary_vertex: Vec<bool>,
}

impl<S: Scalar> IntrinsicMesh<S> {
    /// Build and validate a mesh from connectivity and a length rule.
    ///
    /// `length_of(a, b)` is called exactly once per canonical edge `(a < b)`,
    /// in first-occurrence order over the triangle list.
    pub fn from_lengths(
        name: impl Into<String>,
        vertex_count: usize,
        triangles: Vec<[usize; 3]>,
        embedding: Option<Vec<[S; 3]>>,
        mut length_of: impl FnMut(usize, usize) -> S,
    ) -> Result<Self, MeshError> {
        let mut edge_ids: HashMap<(usize, usize), usize> = HashMap::new();
        let mut edges: Vec<[usize; 2]> = Vec::new();
        let mut edge_lengths: Vec<S> = Vec::new();
        let mut tri_edges: Vec<[usize; 3]> = Vec::with_capacity(triangles.len());

        for tri in &triangles {
            let mut ids = [0usize; 3];
            for c in 0..3 {
                let a = tri[(c + 1) % 3];
                let b = tri[(c + 2) % 3];
                let key = (a.min(b), a.max(b));
                let id = *edge_ids.entry(key).or_insert_with(|| {
                    let len = length_of(key.0, key.1);
                    edges.push([key.0, key.1]);
                    edge_lengths.push(len);
                    edges.len() - 1
                });
                ids[c] = id;
            }
            tri_edges.push(ids);
        }

        let mut mesh = IntrinsicMesh {
            name: name.into(),
            vertex_count,
            triangles,
            edges,
            edge_lengths,
            boundary_loops: Vec::new(),
            embedding,
            tri_edges,
            boundary_edges: Vec::new(),
            boundary_vertex: vec![false; vertex_count],
        };
        mesh.validate()?;
        mesh.extract_boundary()?;
        Ok(mesh)
    }

    /// Convenience constructor for embedded meshes: lengths are Euclidean
    /// distances between positions.
    pub fn from_positions(
        name: impl Into<String>,
        positions: Vec<[S; 3]>,
        triangles: Vec<[usize; 3]>,
    ) -> Result<Self, MeshError> {
        let n = positions.len();
        let pos = positions.clone();
        Self::from_lengths(name, n, triangles, Some(positions), move |a, b| {
            let p = pos[a];
            let q = pos[b];
            let d = [p[0] - q[0], p[1] - q[1], p[2] - q[2]];
            (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn face_count(&self) -> usize {
        self.triangles.len()
    }

    /// V - E + F.
    pub fn euler_characteristic(&self) -> i64 {
        self.vertex_count as i64 - self.edges.len() as i64 + self.triangles.len() as i64
    }

    /// Edge ids opposite the three corners of triangle `t`.
    pub fn tri_edge_ids(&self, t: usize) -> [usize; 3] {
        self.tri_edges[t]
    }

    /// Lengths opposite the three corners of triangle `t`.
    pub fn corner_lengths(&self, t: usize) -> [S; 3] {
        let ids = self.tri_edges[t];
        [
            self.edge_lengths[ids[0]],
            self.edge_lengths[ids[1]],
            self.edge_lengths[ids[2]],
        ]
    }

    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        self.boundary_vertex[v]
    }

    pub fn boundary_edge_ids(&self) -> &[usize] {
        &self.boundary_edges
    }

    /// All boundary vertices in loop order, loops concatenated.
    pub fn boundary_vertices(&self) -> Vec<usize> {
        self.boundary_loops.iter().flatten().copied().collect()
    }

    pub fn max_edge_length(&self) -> S {
        self.edge_lengths
            .iter()
            .copied()
            .fold(S::zero(), |m, l| m.max(l))
    }

    /// Azimuth of a vertex from the embedding, `atan2(y, x)`. `None` when the
    /// mesh carries no embedding.
    pub fn azimuth(&self, v: usize) -> Option<S> {
        self.embedding
            .as_ref()
            .map(|pos| pos[v][1].atan2(pos[v][0]))
    }

    pub fn edge_id(&self, a: usize, b: usize) -> Option<usize> {
        let key = [a.min(b), a.max(b)];
        self.edges.iter().position(|e| *e == key)
    }

    fn validate(&self) -> Result<(), MeshError> {
        for (id, &[a, b]) in self.edges.iter().enumerate() {
            let l = self.edge_lengths[id];
            if !(l > S::zero()) || !l.is_finite() {
                return Err(MeshError::BadEdgeLength(a, b));
            }
        }

        for (t, _) in self.triangles.iter().enumerate() {
            let [l0, l1, l2] = self.corner_lengths(t);
            if !(l0 < l1 + l2 && l1 < l0 + l2 && l2 < l0 + l1) {
                return Err(MeshError::TriangleInequality {
                    face: t,
                    lengths: [l0.f64(), l1.f64(), l2.f64()],
                });
            }
        }

        // Orientability: no directed edge may occur twice, no undirected edge
        // in more than two triangles.
        let mut directed: HashMap<(usize, usize), usize> = HashMap::new();
        let mut incidence: Vec<u8> = vec![0; self.edges.len()];
        for (t, tri) in self.triangles.iter().enumerate() {
            for c in 0..3 {
                let a = tri[c];
                let b = tri[(c + 1) % 3];
                if directed.insert((a, b), t).is_some() {
                    return Err(MeshError::InconsistentWinding(a, b));
                }
            }
            for &e in &self.tri_edges[t] {
                incidence[e] += 1;
                if incidence[e] > 2 {
                    let [a, b] = self.edges[e];
                    return Err(MeshError::NonManifoldEdge(a, b));
                }
            }
        }

        // Every vertex must appear in some triangle.
        let mut seen = vec![false; self.vertex_count];
        for tri in &self.triangles {
            for &v in tri {
                seen[v] = true;
            }
        }
        if let Some(v) = seen.iter().position(|s| !s) {
            return Err(MeshError::IsolatedVertex(v));
        }

        // Connectivity over the edge graph.
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); self.vertex_count];
        for &[a, b] in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        let mut visited = vec![false; self.vertex_count];
        let mut stack = vec![0usize];
        visited[0] = true;
        let mut count = 1usize;
        while let Some(v) = stack.pop() {
            for &w in &adj[v] {
                if !visited[w] {
                    visited[w] = true;
                    count += 1;
                    stack.push(w);
                }
            }
        }
        if count != self.vertex_count {
            return Err(MeshError::Disconnected);
        }
        Ok(())
    }

    fn extract_boundary(&mut self) -> Result<(), MeshError> {
        let mut incidence: Vec<u8> = vec![0; self.edges.len()];
        for ids in &self.tri_edges {
            for &e in ids {
                incidence[e] += 1;
            }
        }
        self.boundary_edges = incidence
            .iter()
            .enumerate()
            .filter(|(_, &c)| c == 1)
            .map(|(e, _)| e)
            .collect();

        let boundary_set: std::collections::HashSet<usize> =
            self.boundary_edges.iter().copied().collect();

        // Directed boundary edges follow the triangle winding; each boundary
        // vertex then has exactly one outgoing edge and the walk closes up.
        let mut next: HashMap<usize, usize> = HashMap::new();
        for (t, tri) in self.triangles.iter().enumerate() {
            for c in 0..3 {
                let a = tri[c];
                let b = tri[(c + 1) % 3];
                let e = self.tri_edges[t][(c + 2) % 3];
                if boundary_set.contains(&e) && next.insert(a, b).is_some() {
                    return Err(MeshError::BadBoundary(a));
                }
            }
        }

        for v in next.keys() {
            self.boundary_vertex[*v] = true;
        }

        let mut remaining: std::collections::BTreeSet<usize> = next.keys().copied().collect();
        let mut loops = Vec::new();
        while let Some(&start) = remaining.iter().next() {
            let mut cycle = vec![start];
            remaining.remove(&start);
            let mut v = *next.get(&start).ok_or(MeshError::BadBoundary(start))?;
            while v != start {
                cycle.push(v);
                if !remaining.remove(&v) {
                    return Err(MeshError::BadBoundary(v));
                }
                v = *next.get(&v).ok_or(MeshError::BadBoundary(v))?;
            }
            loops.push(cycle);
        }
        self.boundary_loops = loops;
        Ok(())
    }

    /// Total boundary length of one loop.
    pub fn loop_length(&self, loop_idx: usize) -> S {
        let cycle = &self.boundary_loops[loop_idx];
        let mut total = S::zero();
        for i in 0..cycle.len() {
            let a = cycle[i];
            let b = cycle[(i + 1) % cycle.len()];
            let e = self
                .edge_id(a, b)
                .expect("boundary loop edge must exist");
            total += self.edge_lengths[e];
        }
        total
    }
}

/// Discrete rotation action on a mesh: a vertex permutation of order `k`.
#[derive(Debug, Clone)]
pub struct SymmetryOrbits {
    pub k: usize,
    /// Image of each vertex under one application of the rotation.
    pub orbit_map: Vec<usize>,
    /// Partition of the vertices into orbits (fixed points give singletons).
    pub orbit_classes: Vec<Vec<usize>>,
}

impl SymmetryOrbits {
    pub fn from_map(k: usize, orbit_map: Vec<usize>) -> Self {
        let n = orbit_map.len();
        let mut class_of = vec![usize::MAX; n];
        let mut classes: Vec<Vec<usize>> = Vec::new();
        for v in 0..n {
            if class_of[v] != usize::MAX {
                continue;
            }
            let id = classes.len();
            let mut orbit = vec![v];
            class_of[v] = id;
            let mut w = orbit_map[v];
            while w != v {
                class_of[w] = id;
                orbit.push(w);
                w = orbit_map[w];
            }
            classes.push(orbit);
        }
        SymmetryOrbits {
            k,
            orbit_map,
            orbit_classes: classes,
        }
    }

    /// Check the action against a mesh: order divides `k`, boundary maps to
    /// boundary, and the induced edge permutation preserves lengths bit for
    /// bit.
    pub fn validate<S: Scalar>(&self, mesh: &IntrinsicMesh<S>) -> Result<(), MeshError> {
        let n = mesh.vertex_count();
        if self.orbit_map.len() != n {
            return Err(MeshError::BadOrbits("length mismatch".into()));
        }
        let mut hit = vec![false; n];
        for &w in &self.orbit_map {
            if w >= n || hit[w] {
                return Err(MeshError::BadOrbits("not a permutation".into()));
            }
            hit[w] = true;
        }
        for v in 0..n {
            let mut w = v;
            for _ in 0..self.k {
                w = self.orbit_map[w];
            }
            if w != v {
                return Err(MeshError::BadOrbits(format!(
                    "orbit map applied {} times is not the identity at vertex {v}",
                    self.k
                )));
            }
            if mesh.is_boundary_vertex(v) != mesh.is_boundary_vertex(self.orbit_map[v]) {
                return Err(MeshError::BadOrbits(format!(
                    "vertex {v} crosses the boundary under the action"
                )));
            }
        }
        for (e, &[a, b]) in mesh.edges.iter().enumerate() {
            let ia = self.orbit_map[a];
            let ib = self.orbit_map[b];
            let img = mesh
                .edge_id(ia, ib)
                .ok_or_else(|| MeshError::BadOrbits(format!("edge ({a},{b}) has no image")))?;
            if mesh.edge_lengths[e] != mesh.edge_lengths[img] {
                return Err(MeshError::BadOrbits(format!(
                    "edge ({a},{b}) length changes under the action"
                )));
            }
        }
        Ok(())
    }
}
