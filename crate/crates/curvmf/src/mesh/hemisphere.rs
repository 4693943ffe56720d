//! Unit upper hemisphere with an exact k-fold rotational symmetry.

use std::collections::HashMap;

use super::{IntrinsicMesh, MeshError, SymmetryOrbits};
use crate::scalar::Scalar;

/// Great-circle distance between points at colatitudes `t1`, `t2` separated
/// by azimuth `dphi`, via the chord. Depends only on the arguments, so edges
/// in the same symmetry class come out bit-identical.
fn arc<S: Scalar>(t1: S, t2: S, dphi: S) -> S {
    let p = [t1.sin(), S::zero(), t1.cos()];
    let q = [t2.sin() * dphi.cos(), t2.sin() * dphi.sin(), t2.cos()];
    let d = [p[0] - q[0], p[1] - q[1], p[2] - q[2]];
    let chord = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
    let half = (chord * S::of(0.5)).min(S::one());
    S::of(2.0) * half.asin()
}

/// Triangulate the unit upper hemisphere by revolving a meridian polyline.
///
/// `refinement` is the number of latitude rings between pole and equator; the
/// azimuthal step count is the smallest multiple of `k` at least
/// `4 * refinement`, so the rotation by `2π/k` acts as an exact index shift.
/// The equator is the single boundary loop.
pub fn gen_hemisphere<S: Scalar>(
    k: usize,
    refinement: usize,
) -> Result<(IntrinsicMesh<S>, SymmetryOrbits), MeshError> {
    if k < 2 {
        return Err(MeshError::DegenerateParameters(
            "symmetry order k must be at least 2".into(),
        ));
    }
    if refinement < 1 {
        return Err(MeshError::DegenerateParameters(
            "hemisphere refinement must be at least 1".into(),
        ));
    }
    let m = refinement;
    let n = k * (4 * refinement).div_ceil(k);

    let vid = |ring: usize, i: usize| -> usize {
        // ring 0 is the pole vertex
        if ring == 0 {
            0
        } else {
            1 + (ring - 1) * n + (i % n)
        }
    };
    let vertex_count = 1 + m * n;

    let theta = |ring: usize| -> S {
        S::FRAC_PI_2() * S::of_usize(ring) / S::of_usize(m)
    };
    let dphi = |steps: usize| -> S { S::of(2.0) * S::PI() * S::of_usize(steps) / S::of_usize(n) };

    // One length per symmetry class, copied to every azimuthal position.
    let mut class_lengths: HashMap<(usize, usize, usize), S> = HashMap::new();
    let mut class = |r1: usize, r2: usize, steps: usize| -> S {
        *class_lengths
            .entry((r1.min(r2), r1.max(r2), steps))
            .or_insert_with(|| arc(theta(r1.min(r2)), theta(r1.max(r2)), dphi(steps)))
    };

    let mut lengths: HashMap<(usize, usize), S> = HashMap::new();
    let put = |a: usize, b: usize, l: S, lengths: &mut HashMap<(usize, usize), S>| {
        lengths.insert((a.min(b), a.max(b)), l);
    };

    let mut triangles = Vec::with_capacity(n + 2 * n * (m - 1));
    // Pole fan.
    for i in 0..n {
        let a = vid(1, i);
        let b = vid(1, i + 1);
        triangles.push([0, a, b]);
        let l_meridian = class(0, 1, 0);
        put(0, a, l_meridian, &mut lengths);
        put(0, b, l_meridian, &mut lengths);
        put(a, b, class(1, 1, 1), &mut lengths);
    }
    // Latitude strips.
    for r in 1..m {
        for i in 0..n {
            let a = vid(r, i);
            let a1 = vid(r, i + 1);
            let b = vid(r + 1, i);
            let b1 = vid(r + 1, i + 1);
            triangles.push([a, b, b1]);
            triangles.push([a, b1, a1]);
            put(a, b, class(r, r + 1, 0), &mut lengths);
            put(a1, b1, class(r, r + 1, 0), &mut lengths);
            put(a, a1, class(r, r, 1), &mut lengths);
            put(b, b1, class(r + 1, r + 1, 1), &mut lengths);
            put(a, b1, class(r, r + 1, 1), &mut lengths);
        }
    }

    let mut embedding = vec![[S::zero(), S::zero(), S::one()]; vertex_count];
    for r in 1..=m {
        let t = theta(r);
        for i in 0..n {
            let phi = dphi(i);
            embedding[vid(r, i)] = [t.sin() * phi.cos(), t.sin() * phi.sin(), t.cos()];
        }
    }

    let mesh = IntrinsicMesh::from_lengths(
        format!("hemisphere_k{k}_r{refinement}"),
        vertex_count,
        triangles,
        Some(embedding),
        |a, b| *lengths.get(&(a, b)).expect("edge length precomputed"),
    )?;

    // Rotation by 2π/k shifts every ring by n/k positions; the pole is the
    // interior fixed point.
    let shift = n / k;
    let mut orbit_map = vec![0usize; vertex_count];
    for r in 1..=m {
        for i in 0..n {
            orbit_map[vid(r, i)] = vid(r, i + shift);
        }
    }
    let orbits = SymmetryOrbits::from_map(k, orbit_map);
    orbits.validate(&mesh)?;
    Ok((mesh, orbits))
}
