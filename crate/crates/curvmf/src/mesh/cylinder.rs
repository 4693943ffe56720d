//! Flat cylinder `[0, L] x S^1` with circumference 2π.

use std::collections::HashMap;

use super::{IntrinsicMesh, MeshError};
use crate::scalar::Scalar;

/// Uniform grid triangulation of the flat cylinder, periodic in the circular
/// direction. Both boundary circles are geodesics and every angle defect
/// vanishes.
pub fn gen_flat_cylinder<S: Scalar>(
    length: S,
    n_axial: usize,
    n_circ: usize,
) -> Result<IntrinsicMesh<S>, MeshError> {
    if !(length > S::zero()) {
        return Err(MeshError::DegenerateParameters(
            "cylinder length must be positive".into(),
        ));
    }
    if n_axial < 1 || n_circ < 3 {
        return Err(MeshError::DegenerateParameters(
            "cylinder grid needs n_axial >= 1 and n_circ >= 3".into(),
        ));
    }

    let dx = length / S::of_usize(n_axial);
    let dy = S::of(2.0) * S::PI() / S::of_usize(n_circ);
    let diag = dx.hypot(dy);

    let vid = |r: usize, c: usize| -> usize { r * n_circ + (c % n_circ) };
    let vertex_count = (n_axial + 1) * n_circ;

    let mut lengths: HashMap<(usize, usize), S> = HashMap::new();
    let put = |a: usize, b: usize, l: S, lengths: &mut HashMap<(usize, usize), S>| {
        lengths.insert((a.min(b), a.max(b)), l);
    };

    let mut triangles = Vec::with_capacity(2 * n_axial * n_circ);
    for r in 0..n_axial {
        for c in 0..n_circ {
            let a = vid(r, c);
            let a1 = vid(r, c + 1);
            let b = vid(r + 1, c);
            let b1 = vid(r + 1, c + 1);
            triangles.push([a, b, b1]);
            triangles.push([a, b1, a1]);
            put(a, b, dx, &mut lengths);
            put(a1, b1, dx, &mut lengths);
            put(a, a1, dy, &mut lengths);
            put(b, b1, dy, &mut lengths);
            put(a, b1, diag, &mut lengths);
        }
    }

    let mut embedding = Vec::with_capacity(vertex_count);
    for r in 0..=n_axial {
        let x = length * S::of_usize(r) / S::of_usize(n_axial);
        for c in 0..n_circ {
            let phi = dy * S::of_usize(c);
            embedding.push([phi.cos(), phi.sin(), x]);
        }
    }

    IntrinsicMesh::from_lengths(
        format!("cylinder_L{}_{}x{}", length.f64(), n_axial, n_circ),
        vertex_count,
        triangles,
        Some(embedding),
        |a, b| *lengths.get(&(a, b)).expect("edge length precomputed"),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cylinder_topology() {
        let m = gen_flat_cylinder::<f64>(1.0, 8, 16).unwrap();
        assert_eq!(m.euler_characteristic(), 0);
        assert_eq!(m.boundary_loops.len(), 2);
        assert_eq!(m.boundary_loops[0].len(), 16);
    }

    #[test]
    fn degenerate_grid_rejected() {
        assert!(gen_flat_cylinder::<f64>(1.0, 0, 16).is_err());
        assert!(gen_flat_cylinder::<f64>(1.0, 8, 2).is_err());
        assert!(gen_flat_cylinder::<f64>(-1.0, 8, 16).is_err());
    }

    #[test]
    fn boundary_circles_have_length_two_pi() {
        let m = gen_flat_cylinder::<f64>(1.0, 8, 16).unwrap();
        for i in 0..2 {
            assert!((m.loop_length(i) - 2.0 * std::f64::consts::PI).abs() < 1e-12);
        }
    }
}
