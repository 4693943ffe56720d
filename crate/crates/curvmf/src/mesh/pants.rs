//! Hyperbolic pair of pants: two congruent right-angled hexagons glued along
//! alternating sides, carrying the curvature -1 metric with three geodesic
//! boundary circles.

use std::collections::HashMap;

use super::{IntrinsicMesh, MeshError};
use crate::scalar::Scalar;

/// Point on the hyperboloid model { q(x,x) = -1, x0 > 0 } with
/// q(x,y) = -x0 y0 + x1 y1 + x2 y2.
type Pt<S> = [S; 3];

fn minkowski<S: Scalar>(a: &Pt<S>, b: &Pt<S>) -> S {
    -a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn hyp_dist<S: Scalar>(a: &Pt<S>, b: &Pt<S>) -> S {
    (-minkowski(a, b)).max(S::one()).acosh()
}

/// Project back onto the hyperboloid sheet (controls drift during the walk).
fn renorm_point<S: Scalar>(p: &Pt<S>) -> Pt<S> {
    let s = (-minkowski(p, p)).sqrt();
    [p[0] / s, p[1] / s, p[2] / s]
}

fn renorm_tangent<S: Scalar>(p: &Pt<S>, v: &Pt<S>) -> Pt<S> {
    // Remove the component along p, then normalize to unit spacelike.
    let c = minkowski(p, v);
    let w = [v[0] + c * p[0], v[1] + c * p[1], v[2] + c * p[2]];
    let s = minkowski(&w, &w).sqrt();
    [w[0] / s, w[1] / s, w[2] / s]
}

/// Lorentz cross product: q-orthogonal to both arguments. For p on the sheet
/// and v a unit tangent at p this is the second unit tangent, so (v, cross)
/// frames the tangent plane.
fn lorentz_cross<S: Scalar>(a: &Pt<S>, b: &Pt<S>) -> Pt<S> {
    [
        -(a[1] * b[2] - a[2] * b[1]),
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn geodesic_step<S: Scalar>(p: &Pt<S>, v: &Pt<S>, t: S) -> (Pt<S>, Pt<S>) {
    let (ch, sh) = (t.cosh(), t.sinh());
    let q = [
        ch * p[0] + sh * v[0],
        ch * p[1] + sh * v[1],
        ch * p[2] + sh * v[2],
    ];
    let w = [
        sh * p[0] + ch * v[0],
        sh * p[1] + ch * v[1],
        sh * p[2] + ch * v[2],
    ];
    let q = renorm_point(&q);
    (q, renorm_tangent(&q, &w))
}

/// Seam length of a right-angled hexagon between the alternating sides
/// `a1`, `a2`, opposite `a3`: cosh b = (cosh a3 + cosh a1 cosh a2) /
/// (sinh a1 sinh a2).
fn seam_length<S: Scalar>(a1: S, a2: S, a3: S) -> S {
    ((a3.cosh() + a1.cosh() * a2.cosh()) / (a1.sinh() * a2.sinh())).acosh()
}

/// Walk the hexagon boundary with right-angle turns of a fixed handedness.
/// Returns the six corners; the walk must close up.
fn hexagon_corners<S: Scalar>(sides: &[S; 6], turn: S) -> (Vec<Pt<S>>, S) {
    let mut p: Pt<S> = [S::one(), S::zero(), S::zero()];
    let mut v: Pt<S> = [S::zero(), S::one(), S::zero()];
    let mut corners = vec![p];
    for &len in sides.iter() {
        let (q, t) = geodesic_step(&p, &v, len);
        let n = lorentz_cross(&q, &t);
        v = [turn * n[0], turn * n[1], turn * n[2]];
        p = q;
        corners.push(p);
    }
    let closure = {
        let last = corners[6];
        let first = corners[0];
        let d = [last[0] - first[0], last[1] - first[1], last[2] - first[2]];
        (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
    };
    corners.truncate(6);
    (corners, closure)
}

/// Triangulated hexagon in hyperboloid coordinates with per-vertex side
/// membership tracked as a bitmask (side i of the hexagon -> bit i).
struct HexMesh<S: Scalar> {
    points: Vec<Pt<S>>,
    sides: Vec<u8>,
    triangles: Vec<[usize; 3]>,
}

fn build_hexagon<S: Scalar>(half_lengths: [S; 3], refinement: usize) -> Result<HexMesh<S>, MeshError> {
    let [a1, a2, a3] = half_lengths;
    let b3 = seam_length(a1, a2, a3);
    let b1 = seam_length(a2, a3, a1);
    let b2 = seam_length(a3, a1, a2);
    // Side order around the hexagon: a1 b3 a2 b1 a3 b2. Boundary sides are the
    // even positions, seams the odd ones.
    let sides = [a1, b3, a2, b1, a3, b2];

    let (corners, closure) = {
        let (c_pos, e_pos) = hexagon_corners(&sides, S::one());
        if e_pos.f64() < 1e-6 {
            (c_pos, e_pos)
        } else {
            hexagon_corners(&sides, -S::one())
        }
    };
    let tol = S::of(1e-6).max(S::epsilon().sqrt() * S::of(1e3));
    if closure > tol {
        return Err(MeshError::DegenerateParameters(format!(
            "hexagon walk failed to close (residual {:.3e})",
            closure.f64()
        )));
    }

    // Fan from the hyperbolic barycenter of the corners; a right-angled
    // hexagon is convex, so the fan partitions it.
    let mut center = [S::zero(), S::zero(), S::zero()];
    for c in &corners {
        center[0] += c[0];
        center[1] += c[1];
        center[2] += c[2];
    }
    let center = renorm_point(&center);

    let mut points = vec![center];
    let mut sides_mask = vec![0u8];
    for (i, c) in corners.iter().enumerate() {
        points.push(*c);
        // Corner i joins side i-1 and side i.
        let prev = (i + 5) % 6;
        sides_mask.push((1u8 << prev) | (1u8 << i));
    }
    let mut triangles: Vec<[usize; 3]> = (0..6).map(|i| [0, 1 + i, 1 + (i + 1) % 6]).collect();

    // Geodesic midpoint subdivision. A midpoint inherits exactly the sides
    // both endpoints lie on.
    for _ in 0..refinement {
        let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
        let mut next_tris = Vec::with_capacity(4 * triangles.len());
        for tri in &triangles {
            let mut mids = [0usize; 3];
            for c in 0..3 {
                let a = tri[(c + 1) % 3];
                let b = tri[(c + 2) % 3];
                let key = (a.min(b), a.max(b));
                let id = *midpoint.entry(key).or_insert_with(|| {
                    let pa = points[key.0];
                    let pb = points[key.1];
                    let m = renorm_point(&[pa[0] + pb[0], pa[1] + pb[1], pa[2] + pb[2]]);
                    points.push(m);
                    sides_mask.push(sides_mask[key.0] & sides_mask[key.1]);
                    points.len() - 1
                });
                mids[c] = id;
            }
            next_tris.push([tri[0], mids[2], mids[1]]);
            next_tris.push([tri[1], mids[0], mids[2]]);
            next_tris.push([tri[2], mids[1], mids[0]]);
            next_tris.push([mids[0], mids[1], mids[2]]);
        }
        triangles = next_tris;
    }

    Ok(HexMesh {
        points,
        sides: sides_mask,
        triangles,
    })
}

/// Hyperbolic pair of pants with geodesic boundary loops of the prescribed
/// lengths, built as the double of a right-angled hexagon across its seam
/// sides and refined by geodesic midpoint subdivision.
///
/// `refinement >= 1` keeps all boundary loops simple cycles.
pub fn gen_pair_of_pants<S: Scalar>(
    boundary_lengths: [S; 3],
    refinement: usize,
) -> Result<IntrinsicMesh<S>, MeshError> {
    for l in boundary_lengths {
        if !(l > S::zero()) || !l.is_finite() {
            return Err(MeshError::DegenerateParameters(
                "boundary lengths must be positive".into(),
            ));
        }
    }
    if refinement < 1 {
        return Err(MeshError::DegenerateParameters(
            "pair of pants refinement must be at least 1".into(),
        ));
    }

    let half = S::of(0.5);
    let hex = build_hexagon(
        [
            boundary_lengths[0] * half,
            boundary_lengths[1] * half,
            boundary_lengths[2] * half,
        ],
        refinement,
    )?;
    let n_hex = hex.points.len();
    const SEAM_MASK: u8 = 0b101010; // sides 1, 3, 5

    // Copy 2 reuses copy-1 indices on the seams and fresh indices elsewhere;
    // its triangles are flipped to keep the double orientable.
    let mut map2 = vec![usize::MAX; n_hex];
    let mut vertex_count = n_hex;
    for (v, slot) in map2.iter_mut().enumerate() {
        if hex.sides[v] & SEAM_MASK != 0 {
            *slot = v;
        } else {
            *slot = vertex_count;
            vertex_count += 1;
        }
    }

    let mut triangles = hex.triangles.clone();
    for tri in &hex.triangles {
        triangles.push([map2[tri[0]], map2[tri[2]], map2[tri[1]]]);
    }

    // Both copies are congruent, so lengths come from the single chart.
    let mut chart = vec![usize::MAX; vertex_count];
    for v in 0..n_hex {
        chart[v] = v;
        chart[map2[v]] = v;
    }
    let points = hex.points;
    let mesh = IntrinsicMesh::from_lengths(
        format!(
            "pair_of_pants_{}_{}_{}_r{refinement}",
            boundary_lengths[0].f64(),
            boundary_lengths[1].f64(),
            boundary_lengths[2].f64()
        ),
        vertex_count,
        triangles,
        None,
        |a, b| hyp_dist(&points[chart[a]], &points[chart[b]]),
    )?;

    debug_assert_eq!(mesh.euler_characteristic(), -1);
    debug_assert_eq!(mesh.boundary_loops.len(), 3);
    Ok(mesh)
}
