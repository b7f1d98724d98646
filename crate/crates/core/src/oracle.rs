//! Brute-force reference implementations: exact depth, inner and outer
//! epsilon-depth (with the family-specific outer definitions), signed
//! under/over counts for the trapezoid and prism decompositions, per-object
//! boundary-band classification, and desk-scale exact maximum depth.
//!
//! Everything here is O(n) per query by construction and never touches the
//! tree structures it validates.

use crate::error::{Error, Result};
use crate::geom2::{DirectionSet, Halfplane, Point2, Rotation2, Triangle};
use crate::geomd::{HyperplaneD, Simplex3};
use crate::scene::{Objects, Scene};
use crate::simplex::{decompose_simplex3, rotate_point3, FrameTable, FRAME_CENTER, FRAME_SHIFT};

pub fn exact_depth(scene: &Scene, q: &[f64]) -> Result<u32> {
    check_dim(scene, q)?;
    Ok(match &scene.objects {
        Objects::Halfplanes(v) => {
            let p = Point2::new(q[0], q[1]);
            v.iter().filter(|h| h.contains(p)).count() as u32
        }
        Objects::Triangles(v) => {
            let p = Point2::new(q[0], q[1]);
            v.iter().filter(|t| t.contains(p)).count() as u32
        }
        Objects::Halfspaces(v) => v.iter().filter(|h| h.contains(q)).count() as u32,
        Objects::Simplices(v) => {
            let p = [q[0], q[1], q[2]];
            v.iter().filter(|s| s.contains(&p)).count() as u32
        }
    })
}

/// Objects containing `q` with `q` at distance at least `eps` from their
/// boundary (triangle boundary distance measured against the edges as
/// segments; for interior points this equals the minimum distance to the
/// supporting lines).
pub fn inner_eps_depth(scene: &Scene, q: &[f64], eps: f64) -> Result<u32> {
    check_dim(scene, q)?;
    Ok(match &scene.objects {
        Objects::Halfplanes(v) => {
            let p = Point2::new(q[0], q[1]);
            v.iter()
                .filter(|h| h.contains(p) && h.boundary_distance(p) >= eps)
                .count() as u32
        }
        Objects::Triangles(v) => {
            let p = Point2::new(q[0], q[1]);
            v.iter()
                .filter(|t| t.contains(p) && t.boundary_distance(p) >= eps)
                .count() as u32
        }
        Objects::Halfspaces(v) => v
            .iter()
            .filter(|h| h.contains(q) && h.boundary_distance(q) >= eps)
            .count() as u32,
        Objects::Simplices(v) => {
            let p = [q[0], q[1], q[2]];
            v.iter()
                .filter(|s| s.min_signed_plane_distance(&p) >= eps)
                .count() as u32
        }
    })
}

/// Family-specific overestimate reference: halfplanes/halfspaces count
/// containment or boundary distance at most `eps`; triangles count
/// membership in the offset triangle (supporting lines shifted outward by
/// `eps`); simplices count membership in the offset simplex intersected with
/// the x-span of the simplex in its assigned frame.
pub fn outer_eps_depth(scene: &Scene, q: &[f64], eps: f64) -> Result<u32> {
    check_dim(scene, q)?;
    Ok(match &scene.objects {
        Objects::Halfplanes(v) => {
            let p = Point2::new(q[0], q[1]);
            v.iter()
                .filter(|h| h.contains(p) || h.boundary_distance(p) <= eps)
                .count() as u32
        }
        Objects::Triangles(v) => {
            let p = Point2::new(q[0], q[1]);
            v.iter()
                .filter(|t| t.min_signed_line_distance(p) >= -eps)
                .count() as u32
        }
        Objects::Halfspaces(v) => v
            .iter()
            .filter(|h| h.contains(q) || h.boundary_distance(q) <= eps)
            .count() as u32,
        Objects::Simplices(v) => {
            let p = [q[0], q[1], q[2]];
            let frames = FrameTable::standard();
            v.iter()
                .filter(|s| {
                    if s.min_signed_plane_distance(&p) < -eps {
                        return false;
                    }
                    // x-span condition in the simplex's assigned frame
                    let (i3, i2) = frames.assign(s);
                    let rot = frames.rotation(i3, i2);
                    let rs = s.rotate(&rot, &FRAME_CENTER, &FRAME_SHIFT);
                    let rq = rotate_point3(&rot, &p);
                    let (lo, hi) = x_span3(&rs);
                    rq[0] >= lo && rq[0] <= hi
                })
                .count() as u32
        }
    })
}

fn x_span3(s: &Simplex3) -> (f64, f64) {
    let xs = s.vertices.iter().map(|v| v[0]);
    (
        xs.clone().fold(f64::INFINITY, f64::min),
        xs.fold(f64::NEG_INFINITY, f64::max),
    )
}

fn check_dim(scene: &Scene, q: &[f64]) -> Result<()> {
    if q.len() != scene.dimension {
        return Err(Error::DimensionMismatch {
            expected: scene.dimension,
            got: q.len(),
        });
    }
    Ok(())
}

/// Band classification of one object against a query.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BandClass {
    /// Contains the query at boundary distance >= eps.
    DeepInside,
    /// Contains the query, boundary within eps.
    BandInside,
    /// Does not contain the query, boundary within eps.
    BandOutside,
    /// Does not contain the query, boundary farther than eps.
    FarOutside,
}

pub fn classify_halfplane(h: &Halfplane, q: Point2, eps: f64) -> BandClass {
    band_class(h.contains(q), h.boundary_distance(q), eps)
}

pub fn classify_halfspace(h: &HyperplaneD, q: &[f64], eps: f64) -> BandClass {
    band_class(h.contains(q), h.boundary_distance(q), eps)
}

fn band_class(inside: bool, dist: f64, eps: f64) -> BandClass {
    if inside {
        if dist >= eps {
            BandClass::DeepInside
        } else {
            BandClass::BandInside
        }
    } else if dist <= eps {
        BandClass::BandOutside
    } else {
        BandClass::FarOutside
    }
}

/// Signed under/over counts of a signed decomposition (positive minus
/// negative parts), computed by brute force over the pieces whose x-span
/// contains the query abscissa in the relevant rotated frame.
#[derive(Clone, Copy, Debug, Default)]
pub struct SignedDepths {
    pub pi: i64,
    pub nu: i64,
    pub pi_inner: i64,
    pub pi_outer: i64,
    pub nu_inner: i64,
    pub nu_outer: i64,
}

impl SignedDepths {
    pub fn depth(&self) -> i64 {
        self.pi - self.nu
    }

    /// The provable lower reference for the combined structure.
    pub fn combined_inner(&self) -> i64 {
        self.pi_inner - self.nu_outer
    }

    /// The provable upper reference for the combined structure.
    pub fn combined_outer(&self) -> i64 {
        self.pi_outer - self.nu_inner
    }
}

/// Trapezoid-level signed depths for a triangle scene: pieces are the signed
/// trapezoids of each triangle in its assigned direction's rotated frame.
/// The per-piece inner/outer notions are the halfplane ones against the
/// ceiling line (euclidean distance).
pub fn trapezoid_signed_depths(triangles: &[Triangle], q: Point2, eps: f64) -> Result<SignedDepths> {
    let dirs = DirectionSet::standard();
    let center = Point2::new(0.5, 0.5);
    let mut out = SignedDepths::default();
    for t in triangles {
        let u = t.good_direction(dirs);
        let rot = Rotation2::direction_to_up(dirs.angles[u], center);
        let rt = t.rotate(rot);
        let rq = rot.apply(q);
        for trap in decompose_for_oracle(&rt)? {
            if !trap.span_contains(rq.x) {
                continue;
            }
            let h = trap.as_halfplane();
            let inside = h.contains(rq);
            let dist = h.boundary_distance(rq);
            let deep = inside && dist >= eps;
            let near = inside || dist <= eps;
            if trap.positive {
                out.pi += i64::from(inside);
                out.pi_inner += i64::from(deep);
                out.pi_outer += i64::from(near);
            } else {
                out.nu += i64::from(inside);
                out.nu_inner += i64::from(deep);
                out.nu_outer += i64::from(near);
            }
        }
    }
    Ok(out)
}

fn decompose_for_oracle(rt: &Triangle) -> Result<[crate::geom2::SignedTrapezoid; 3]> {
    crate::geom2::decompose_triangle(rt)
}

/// Prism-level signed depths for a simplex scene. Inner requires euclidean
/// distance at least `eps` from both slanted supporting planes (inside);
/// outer is membership in the prism with both slanted planes shifted out by
/// `eps`, intersected with the prism x-span.
pub fn prism_signed_depths(simplices: &[Simplex3], q: &[f64; 3], eps: f64) -> Result<SignedDepths> {
    let frames = FrameTable::standard();
    let mut out = SignedDepths::default();
    for s in simplices {
        let (i3, i2) = frames.assign(s);
        let rot = frames.rotation(i3, i2);
        let rs = s.rotate(&rot, &FRAME_CENTER, &FRAME_SHIFT);
        let rq = rotate_point3(&rot, q);
        for prism in decompose_simplex3(&rs)? {
            if !prism.base.span_contains(rq[0]) {
                continue;
            }
            let inside = prism.contains(&rq);
            let c = prism.ceiling_signed(&rq);
            let v = prism.vertical_signed(&rq);
            let deep = inside && c >= eps && v >= eps;
            let near = c >= -eps && v >= -eps;
            if prism.positive {
                out.pi += i64::from(inside);
                out.pi_inner += i64::from(deep);
                out.pi_outer += i64::from(near);
            } else {
                out.nu += i64::from(inside);
                out.nu_inner += i64::from(deep);
                out.nu_outer += i64::from(near);
            }
        }
    }
    Ok(out)
}

/// Exact maximum depth at desk scale: evaluates the exact depth over all
/// arrangement vertex candidates (clipped to the cube), tiny perturbations
/// of them, and a fallback grid. Exact for halfplanes and for halfspaces in
/// `R^3` (closed objects attain the maximum at a candidate); for triangles
/// likewise, while simplices rely on vertices plus the grid.
pub fn exact_max_depth(scene: &Scene, grid: usize) -> Result<(Vec<f64>, u32)> {
    if scene.n() > 500 {
        return Err(Error::param("n", "exact max depth is limited to 500 objects"));
    }
    let mut candidates: Vec<Vec<f64>> = Vec::new();
    match &scene.objects {
        Objects::Halfplanes(v) => {
            candidates.extend(square_corners());
            for h in v {
                for p in line_square_boundary(h) {
                    candidates.push(vec![p.x, p.y]);
                }
            }
            for (i, a) in v.iter().enumerate() {
                for b in &v[i + 1..] {
                    if let Some(p) = line_intersection(a, b) {
                        push_point2(&mut candidates, p);
                    }
                }
            }
        }
        Objects::Triangles(v) => {
            candidates.extend(square_corners());
            let edges: Vec<(Point2, Point2)> = v.iter().flat_map(|t| t.edges()).collect();
            for t in v {
                for p in t.vertices {
                    push_point2(&mut candidates, p);
                }
            }
            for (i, &(a, b)) in edges.iter().enumerate() {
                for &(c, d) in &edges[i + 1..] {
                    if let Some(p) = segment_intersection(a, b, c, d) {
                        push_point2(&mut candidates, p);
                    }
                }
            }
        }
        Objects::Halfspaces(v) => {
            if scene.dimension == 3 {
                candidates.extend(cube_corners3());
                let planes: Vec<([f64; 3], f64)> = v.iter().map(plane3).collect();
                for i in 0..planes.len() {
                    for (f1, f2) in bounding_plane_pairs3() {
                        if let Some(p) = solve3(planes[i], f1, f2) {
                            push_point3(&mut candidates, p);
                        }
                    }
                    for j in i + 1..planes.len() {
                        for f in bounding_planes3() {
                            if let Some(p) = solve3(planes[i], planes[j], f) {
                                push_point3(&mut candidates, p);
                            }
                        }
                        for k in j + 1..planes.len() {
                            if let Some(p) = solve3(planes[i], planes[j], planes[k]) {
                                push_point3(&mut candidates, p);
                            }
                        }
                    }
                }
            }
        }
        Objects::Simplices(v) => {
            for s in v {
                for p in s.vertices {
                    candidates.push(p.to_vec());
                }
            }
        }
    }
    // perturbations of each candidate, then the grid
    let dim = scene.dimension;
    let tiny = 1e-9;
    let base_len = candidates.len();
    for i in 0..base_len {
        for mask in 0..(1usize << dim) {
            let mut p = candidates[i].clone();
            for (j, x) in p.iter_mut().enumerate() {
                *x += if mask >> j & 1 == 1 { tiny } else { -tiny };
            }
            candidates.push(p);
        }
    }
    if grid > 0 {
        let mut idx = vec![0usize; dim];
        loop {
            candidates.push(idx.iter().map(|&i| (2 * i + 1) as f64 / (2 * grid) as f64).collect());
            let mut j = 0;
            loop {
                if j == dim {
                    break;
                }
                idx[j] += 1;
                if idx[j] < grid {
                    break;
                }
                idx[j] = 0;
                j += 1;
            }
            if j == dim {
                break;
            }
        }
    }
    let mut best: Option<(Vec<f64>, u32)> = None;
    for mut c in candidates {
        let mut ok = true;
        for x in c.iter_mut() {
            if *x < -1e-9 || *x > 1.0 + 1e-9 {
                ok = false;
                break;
            }
            *x = x.clamp(0.0, 1.0);
        }
        if !ok {
            continue;
        }
        let d = exact_depth(scene, &c)?;
        if best.as_ref().map_or(true, |(_, bd)| d > *bd) {
            best = Some((c, d));
        }
    }
    Ok(best.unwrap_or((vec![0.5; dim], 0)))
}

fn square_corners() -> Vec<Vec<f64>> {
    vec![
        vec![0.0, 0.0],
        vec![1.0, 0.0],
        vec![0.0, 1.0],
        vec![1.0, 1.0],
    ]
}

fn push_point2(out: &mut Vec<Vec<f64>>, p: Point2) {
    out.push(vec![p.x, p.y]);
}

fn push_point3(out: &mut Vec<Vec<f64>>, p: [f64; 3]) {
    out.push(p.to_vec());
}

fn line_square_boundary(h: &Halfplane) -> Vec<Point2> {
    let l = h.line;
    let mut out = Vec::new();
    for x in [0.0, 1.0] {
        let y = l.at(x);
        if (0.0..=1.0).contains(&y) {
            out.push(Point2::new(x, y));
        }
    }
    if l.slope != 0.0 {
        for y in [0.0, 1.0] {
            let x = (y - l.intercept) / l.slope;
            if (0.0..=1.0).contains(&x) {
                out.push(Point2::new(x, y));
            }
        }
    }
    out
}

fn line_intersection(a: &Halfplane, b: &Halfplane) -> Option<Point2> {
    let dc = a.line.slope - b.line.slope;
    if dc.abs() < 1e-12 {
        return None;
    }
    let x = (b.line.intercept - a.line.intercept) / dc;
    Some(Point2::new(x, a.line.at(x)))
}

fn segment_intersection(a: Point2, b: Point2, c: Point2, d: Point2) -> Option<Point2> {
    let r = Point2::new(b.x - a.x, b.y - a.y);
    let s = Point2::new(d.x - c.x, d.y - c.y);
    let denom = r.x * s.y - r.y * s.x;
    if denom.abs() < 1e-15 {
        return None;
    }
    let t = ((c.x - a.x) * s.y - (c.y - a.y) * s.x) / denom;
    let u = ((c.x - a.x) * r.y - (c.y - a.y) * r.x) / denom;
    if (0.0..=1.0).contains(&t) && (0.0..=1.0).contains(&u) {
        Some(Point2::new(a.x + t * r.x, a.y + t * r.y))
    } else {
        None
    }
}

fn plane3(h: &HyperplaneD) -> ([f64; 3], f64) {
    // boundary as normal . x = rhs
    ([-h.eta[0], -h.eta[1], 1.0], -h.eta[2])
}

fn bounding_planes3() -> [([f64; 3], f64); 6] {
    [
        ([1.0, 0.0, 0.0], 0.0),
        ([1.0, 0.0, 0.0], 1.0),
        ([0.0, 1.0, 0.0], 0.0),
        ([0.0, 1.0, 0.0], 1.0),
        ([0.0, 0.0, 1.0], 0.0),
        ([0.0, 0.0, 1.0], 1.0),
    ]
}

fn bounding_plane_pairs3() -> Vec<(([f64; 3], f64), ([f64; 3], f64))> {
    let faces = bounding_planes3();
    let mut out = Vec::new();
    for i in 0..6 {
        for j in i + 1..6 {
            // skip parallel pairs
            if i / 2 == j / 2 {
                continue;
            }
            out.push((faces[i], faces[j]));
        }
    }
    out
}

fn cube_corners3() -> Vec<Vec<f64>> {
    (0..8)
        .map(|i| vec![(i & 1) as f64, (i >> 1 & 1) as f64, (i >> 2 & 1) as f64])
        .collect()
}

fn solve3(a: ([f64; 3], f64), b: ([f64; 3], f64), c: ([f64; 3], f64)) -> Option<[f64; 3]> {
    let m = [a.0, b.0, c.0];
    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    if det.abs() < 1e-12 {
        return None;
    }
    let rhs = [a.1, b.1, c.1];
    let mut out = [0.0; 3];
    for k in 0..3 {
        let mut mk = m;
        for row in 0..3 {
            mk[row][k] = rhs[row];
        }
        let dk = mk[0][0] * (mk[1][1] * mk[2][2] - mk[1][2] * mk[2][1])
            - mk[0][1] * (mk[1][0] * mk[2][2] - mk[1][2] * mk[2][0])
            + mk[0][2] * (mk[1][0] * mk[2][1] - mk[1][1] * mk[2][0]);
        out[k] = dk / det;
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom2::Line2;
    use crate::scene::{generate_scene, Family};

    fn halfplane_scene(hs: Vec<Halfplane>) -> Scene {
        Scene {
            dimension: 2,
            family: Family::Halfplanes,
            seed: None,
            profile: None,
            objects: Objects::Halfplanes(hs),
        }
    }

    #[test]
    fn empty_scene_depths() {
        let s = halfplane_scene(vec![]);
        assert_eq!(exact_depth(&s, &[0.5, 0.5]).unwrap(), 0);
        assert_eq!(inner_eps_depth(&s, &[0.5, 0.5], 0.1).unwrap(), 0);
        assert_eq!(outer_eps_depth(&s, &[0.5, 0.5], 0.1).unwrap(), 0);
    }

    #[test]
    fn triangle_vertex_counts_as_inside() {
        let t = Triangle::new([
            Point2::new(0.2, 0.2),
            Point2::new(0.8, 0.2),
            Point2::new(0.5, 0.8),
        ]);
        let s = Scene {
            dimension: 2,
            family: Family::Triangles,
            seed: None,
            profile: None,
            objects: Objects::Triangles(vec![t]),
        };
        assert_eq!(exact_depth(&s, &[0.2, 0.2]).unwrap(), 1);
    }

    #[test]
    fn inner_is_monotone_in_eps() {
        let s = generate_scene(Family::Triangles, 30, 5, "uniform", 2).unwrap();
        let q = [0.41, 0.52];
        let mut last = u32::MAX;
        for eps in [0.001, 0.01, 0.05, 0.2] {
            let v = inner_eps_depth(&s, &q, eps).unwrap();
            assert!(v <= last);
            last = v;
        }
        // inner <= exact <= outer
        let d = exact_depth(&s, &q).unwrap();
        assert!(inner_eps_depth(&s, &q, 0.02).unwrap() <= d);
        assert!(d <= outer_eps_depth(&s, &q, 0.02).unwrap());
    }

    #[test]
    fn outer_at_zero_eps_equals_exact() {
        for (family, d) in [
            (Family::Halfplanes, 2),
            (Family::Triangles, 2),
            (Family::Halfspaces, 3),
            (Family::Simplices, 3),
        ] {
            let s = generate_scene(family, 25, 11, "uniform", d).unwrap();
            let q = vec![0.37; s.dimension];
            assert_eq!(
                outer_eps_depth(&s, &q, 0.0).unwrap(),
                exact_depth(&s, &q).unwrap(),
                "family {family:?}"
            );
        }
    }

    #[test]
    fn offset_counts_far_corner_points() {
        // skinny triangle: a point beyond the sharp corner at euclidean
        // distance much larger than eps still lies in the offset triangle
        let eps = 0.01;
        let t = Triangle::new([
            Point2::new(0.1, 0.5),
            Point2::new(0.9, 0.49),
            Point2::new(0.9, 0.51),
        ])
        .normalized(0.0)
        .unwrap();
        let s = Scene {
            dimension: 2,
            family: Family::Triangles,
            seed: None,
            profile: None,
            objects: Objects::Triangles(vec![t]),
        };
        // walk left from the sharp corner
        let q = [0.1 - 10.0 * eps, 0.5];
        assert!(t.boundary_distance(Point2::new(q[0], q[1])) >= 9.0 * eps);
        assert_eq!(exact_depth(&s, &q).unwrap(), 0);
        assert_eq!(outer_eps_depth(&s, &q, eps).unwrap(), 1);
    }

    #[test]
    fn inner_respects_near_edge_band() {
        let t = Triangle::new([
            Point2::new(0.1, 0.1),
            Point2::new(0.9, 0.1),
            Point2::new(0.5, 0.9),
        ]);
        let s = Scene {
            dimension: 2,
            family: Family::Triangles,
            seed: None,
            profile: None,
            objects: Objects::Triangles(vec![t]),
        };
        // centroid far from every edge
        assert_eq!(inner_eps_depth(&s, &[0.5, 0.35], 0.05).unwrap(), 1);
        // just above the bottom edge: inside but within the band
        assert_eq!(exact_depth(&s, &[0.5, 0.12]).unwrap(), 1);
        assert_eq!(inner_eps_depth(&s, &[0.5, 0.12], 0.05).unwrap(), 0);
    }

    #[test]
    fn max_depth_of_constructed_triangle_of_halfplanes() {
        // three halfplanes bounding a middle triangle of depth 3
        let hs = vec![
            Halfplane::upper(Line2::new(0.0, 0.2)),
            Halfplane::lower(Line2::new(1.0, 0.5)),
            Halfplane::lower(Line2::new(-1.0, 1.2)),
        ];
        let s = halfplane_scene(hs);
        let (p, d) = exact_max_depth(&s, 16).unwrap();
        assert_eq!(d, 3);
        assert_eq!(exact_depth(&s, &p).unwrap(), 3);
    }

    #[test]
    fn identical_halfplanes_max() {
        let hs = vec![Halfplane::upper(Line2::new(0.25, 0.1)); 6];
        let s = halfplane_scene(hs);
        let (_, d) = exact_max_depth(&s, 8).unwrap();
        assert_eq!(d, 6);
    }

    #[test]
    fn max_matches_dense_grid_argmax() {
        let s = generate_scene(Family::Halfplanes, 40, 3, "peak-noise", 2).unwrap();
        let (_, d) = exact_max_depth(&s, 16).unwrap();
        // dense grid can only do worse or equal
        let mut grid_best = 0;
        for i in 0..120 {
            for j in 0..120 {
                let q = [(i as f64 + 0.5) / 120.0, (j as f64 + 0.5) / 120.0];
                grid_best = grid_best.max(exact_depth(&s, &q).unwrap());
            }
        }
        assert!(d >= grid_best);
    }
}
