//! Exact planar primitives: points, lines, halfplanes, the duality map,
//! vertical and euclidean distances, slope classes, direction sets and the
//! signed trapezoid decomposition of triangles.
//!
//! The duality used throughout maps the point `p = (a, b)` to the line
//! `y = a*x - b` and the line `y = c*x + t` to the point `(c, -t)`. It
//! preserves vertical distances, which approximate euclidean distances once
//! boundary slopes are confined to a narrow class.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    pub fn dist(self, other: Point2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

/// The line `y = slope * x + intercept`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Line2 {
    pub slope: f64,
    pub intercept: f64,
}

impl Line2 {
    pub fn new(slope: f64, intercept: f64) -> Self {
        Line2 { slope, intercept }
    }

    pub fn at(self, x: f64) -> f64 {
        self.slope * x + self.intercept
    }

    /// Line through two points; the segment must not be vertical.
    pub fn through(a: Point2, b: Point2) -> Self {
        debug_assert!(a.x != b.x);
        let slope = (b.y - a.y) / (b.x - a.x);
        Line2 {
            slope,
            intercept: a.y - slope * a.x,
        }
    }
}

/// A halfplane bounded by `line`. `upper` selects `y >= c*x + t` versus
/// `y <= c*x + t`; `closed` decides whether boundary points belong to it.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Halfplane {
    pub line: Line2,
    pub upper: bool,
    #[serde(default = "default_closed", skip_serializing)]
    pub closed: bool,
}

fn default_closed() -> bool {
    true
}

impl Halfplane {
    pub fn upper(line: Line2) -> Self {
        Halfplane {
            line,
            upper: true,
            closed: true,
        }
    }

    pub fn lower(line: Line2) -> Self {
        Halfplane {
            line,
            upper: false,
            closed: true,
        }
    }

    /// Signed evaluation, positive strictly inside, zero on the boundary.
    pub fn eval(self, q: Point2) -> f64 {
        let g = q.y - self.line.at(q.x);
        if self.upper {
            g
        } else {
            -g
        }
    }

    pub fn contains(self, q: Point2) -> bool {
        let v = self.eval(q);
        if self.closed {
            v >= 0.0
        } else {
            v > 0.0
        }
    }

    /// Euclidean distance from `q` to the boundary line.
    pub fn boundary_distance(self, q: Point2) -> f64 {
        line_distance(q, self.line)
    }
}

pub fn dual_line_to_point(line: Line2) -> Point2 {
    Point2::new(line.slope, -line.intercept)
}

pub fn dual_point_to_line(p: Point2) -> Line2 {
    Line2::new(p.x, -p.y)
}

/// Duality after translating the frame so that `corner` becomes the origin.
/// Used by the per-leaf dual trees: dual points of lines crossing a leaf cell
/// anchored at `corner` fall into a fixed small rectangle.
pub fn shifted_dual_line(line: Line2, corner: Point2) -> Point2 {
    // y - ay = c (x - ax) + (t + c*ax - ay)
    Point2::new(line.slope, -(line.intercept + line.slope * corner.x - corner.y))
}

/// The dual line of a query point in the frame translated by `corner`,
/// returned as `(slope, offset)` for the line `y = slope * x - offset`.
pub fn shifted_dual_point(q: Point2, corner: Point2) -> (f64, f64) {
    (q.x - corner.x, q.y - corner.y)
}

/// Inverse of [`shifted_dual_line`] under a fixed corner.
pub fn shifted_dual_to_line(p: Point2, corner: Point2) -> Line2 {
    Line2::new(p.x, -p.y - p.x * corner.x + corner.y)
}

pub fn vertical_distance(p: Point2, line: Line2) -> f64 {
    (p.y - line.at(p.x)).abs()
}

pub fn line_distance(p: Point2, line: Line2) -> f64 {
    vertical_distance(p, line) / (1.0 + line.slope * line.slope).sqrt()
}

pub fn segment_distance(p: Point2, a: Point2, b: Point2) -> f64 {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let len2 = dx * dx + dy * dy;
    if len2 == 0.0 {
        return p.dist(a);
    }
    let t = (((p.x - a.x) * dx + (p.y - a.y) * dy) / len2).clamp(0.0, 1.0);
    p.dist(Point2::new(a.x + t * dx, a.y + t * dy))
}

/// An axis-aligned rectangle (closed hull; the trees impose half-openness
/// combinatorially, not through the stored bounds).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        debug_assert!(x0 <= x1 && y0 <= y1);
        Rect { x0, y0, x1, y1 }
    }

    pub fn square(lo: Point2, side: f64) -> Self {
        Rect::new(lo.x, lo.y, lo.x + side, lo.y + side)
    }

    pub fn corner(self) -> Point2 {
        Point2::new(self.x0, self.y0)
    }

    pub fn center(self) -> Point2 {
        Point2::new(0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1))
    }

    pub fn contains(self, p: Point2) -> bool {
        p.x >= self.x0 && p.x <= self.x1 && p.y >= self.y0 && p.y <= self.y1
    }
}

/// One of the eight isometries of a square box: an optional swap of the two
/// coordinates (about the main diagonal) followed by optional reflections,
/// all relative to the box center.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SquareIsometry {
    pub center: Point2,
    pub swap: bool,
    pub neg_x: bool,
    pub neg_y: bool,
}

impl SquareIsometry {
    pub fn identity(center: Point2) -> Self {
        SquareIsometry {
            center,
            swap: false,
            neg_x: false,
            neg_y: false,
        }
    }

    pub fn apply(self, p: Point2) -> Point2 {
        let (mut u, mut v) = (p.x - self.center.x, p.y - self.center.y);
        if self.swap {
            std::mem::swap(&mut u, &mut v);
        }
        if self.neg_x {
            u = -u;
        }
        if self.neg_y {
            v = -v;
        }
        Point2::new(self.center.x + u, self.center.y + v)
    }

    pub fn apply_rect(self, r: Rect) -> Rect {
        let a = self.apply(Point2::new(r.x0, r.y0));
        let b = self.apply(Point2::new(r.x1, r.y1));
        Rect::new(a.x.min(b.x), a.y.min(b.y), a.x.max(b.x), a.y.max(b.y))
    }

    /// Transform a halfplane by mapping two boundary points and an interior
    /// witness. The image boundary must not be vertical.
    pub fn apply_halfplane(self, h: Halfplane) -> Halfplane {
        let a = self.apply(Point2::new(0.0, h.line.at(0.0)));
        let b = self.apply(Point2::new(1.0, h.line.at(1.0)));
        let inside = self.apply(Point2::new(
            0.0,
            h.line.intercept + if h.upper { 1.0 } else { -1.0 },
        ));
        let line = Line2::through(a, b);
        Halfplane {
            line,
            upper: inside.y > line.at(inside.x),
            closed: h.closed,
        }
    }
}

/// Slope class of a boundary line: a class index in `0..4` and the square
/// isometry mapping the line into slope range `[0, 1]`.
///
/// Classes: `[0,1]` identity, `(1, inf)` diagonal swap, `[-1, 0)` horizontal
/// reflection, `(-inf, -1)` swap plus reflection. Boundary slopes `0`, `1`
/// and `-1` go to the lower-indexed class.
pub fn slope_class(slope: f64, box_center: Point2) -> (usize, SquareIsometry) {
    let mut t = SquareIsometry::identity(box_center);
    let class = if (0.0..=1.0).contains(&slope) {
        0
    } else if slope > 1.0 {
        t.swap = true;
        1
    } else if slope >= -1.0 {
        t.neg_x = true;
        2
    } else {
        t.swap = true;
        t.neg_x = true;
        3
    };
    (class, t)
}

/// Rotation about a center point.
#[derive(Clone, Copy, Debug)]
pub struct Rotation2 {
    pub cos: f64,
    pub sin: f64,
    pub center: Point2,
}

impl Rotation2 {
    pub fn new(angle: f64, center: Point2) -> Self {
        Rotation2 {
            cos: angle.cos(),
            sin: angle.sin(),
            center,
        }
    }

    /// Rotation taking the direction at `angle` (from the x-axis) to `+y`.
    pub fn direction_to_up(angle: f64, center: Point2) -> Self {
        Rotation2::new(std::f64::consts::FRAC_PI_2 - angle, center)
    }

    pub fn apply(self, p: Point2) -> Point2 {
        let (u, v) = (p.x - self.center.x, p.y - self.center.y);
        Point2::new(
            self.center.x + self.cos * u - self.sin * v,
            self.center.y + self.sin * u + self.cos * v,
        )
    }
}

/// A fixed set of projection directions in `[0, pi)` with a guard angle
/// `beta`. Spacing `pi/24` with `beta = pi/12` leaves, for every triangle, a
/// run of good directions longer than the spacing, so assignment always
/// succeeds.
#[derive(Clone, Debug)]
pub struct DirectionSet {
    pub angles: Vec<f64>,
    pub beta: f64,
}

impl DirectionSet {
    pub fn standard() -> &'static DirectionSet {
        use std::sync::OnceLock;
        static SET: OnceLock<DirectionSet> = OnceLock::new();
        SET.get_or_init(|| DirectionSet::equally_spaced(24, std::f64::consts::PI / 12.0))
    }

    pub fn equally_spaced(count: usize, beta: f64) -> DirectionSet {
        let spacing = std::f64::consts::PI / count as f64;
        assert!(
            spacing <= (std::f64::consts::PI - 6.0 * beta) / 3.0 + 1e-12,
            "direction set too sparse for beta"
        );
        DirectionSet {
            angles: (0..count).map(|i| i as f64 * spacing).collect(),
            beta,
        }
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }
}

/// Angular distance between two undirected line directions (period `pi`).
pub fn line_angle_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(std::f64::consts::PI);
    d.min(std::f64::consts::PI - d)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Triangle {
    pub vertices: [Point2; 3],
}

impl Triangle {
    pub fn new(vertices: [Point2; 3]) -> Self {
        Triangle { vertices }
    }

    /// Twice the signed area (positive for counterclockwise order).
    pub fn signed_area2(&self) -> f64 {
        let [a, b, c] = self.vertices;
        (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
    }

    /// Reorder to counterclockwise; errors on degenerate input.
    pub fn normalized(mut self, min_area2: f64) -> Result<Triangle> {
        let s = self.signed_area2();
        if !s.is_finite() || s.abs() < min_area2 {
            return Err(Error::InvalidScene(format!(
                "degenerate triangle (area2 {s})"
            )));
        }
        if s < 0.0 {
            self.vertices.swap(1, 2);
        }
        Ok(self)
    }

    pub fn edges(&self) -> [(Point2, Point2); 3] {
        let [a, b, c] = self.vertices;
        [(a, b), (b, c), (c, a)]
    }

    pub fn contains(&self, q: Point2) -> bool {
        // CCW orientation: inside iff on the left of (or on) every edge.
        self.edges().iter().all(|&(a, b)| {
            (b.x - a.x) * (q.y - a.y) - (b.y - a.y) * (q.x - a.x) >= 0.0
        })
    }

    /// Distance from an interior/arbitrary point to the triangle boundary.
    pub fn boundary_distance(&self, q: Point2) -> f64 {
        self.edges()
            .iter()
            .map(|&(a, b)| segment_distance(q, a, b))
            .fold(f64::INFINITY, f64::min)
    }

    /// The supporting line of each edge as the halfplane containing the
    /// triangle (closed); edges must not be vertical for slope form, so this
    /// is only valid in a frame without vertical edges.
    pub fn edge_halfplanes(&self) -> [Halfplane; 3] {
        let mut out = [Halfplane::upper(Line2::new(0.0, 0.0)); 3];
        for (i, &(a, b)) in self.edges().iter().enumerate() {
            let line = Line2::through(a, b);
            let third = self.vertices[(i + 2) % 3];
            out[i] = Halfplane {
                line,
                upper: third.y > line.at(third.x),
                closed: true,
            };
        }
        out
    }

    /// Signed euclidean distance to the inside of every edge's supporting
    /// line, minimized; positive inside, negative outside.
    pub fn min_signed_line_distance(&self, q: Point2) -> f64 {
        let mut best = f64::INFINITY;
        for &(a, b) in self.edges().iter() {
            let len = a.dist(b);
            // CCW: inside is the left side.
            let cross = (b.x - a.x) * (q.y - a.y) - (b.y - a.y) * (q.x - a.x);
            best = best.min(cross / len);
        }
        best
    }

    pub fn rotate(&self, rot: Rotation2) -> Triangle {
        Triangle::new([
            rot.apply(self.vertices[0]),
            rot.apply(self.vertices[1]),
            rot.apply(self.vertices[2]),
        ])
    }

    /// Index into `dirs` of the first direction making angle at least `beta`
    /// with every edge. Guaranteed to exist by the direction-set invariant.
    pub fn good_direction(&self, dirs: &DirectionSet) -> usize {
        let edge_angles: Vec<f64> = self
            .edges()
            .iter()
            .map(|&(a, b)| (b.y - a.y).atan2(b.x - a.x).rem_euclid(std::f64::consts::PI))
            .collect();
        for (i, &u) in dirs.angles.iter().enumerate() {
            if edge_angles
                .iter()
                .all(|&e| line_angle_distance(u, e) >= dirs.beta - 1e-12)
            {
                return i;
            }
        }
        unreachable!("direction set invariant guarantees a good direction");
    }
}

/// One trapezoid of the signed decomposition of a triangle: the region below
/// the ceiling edge's supporting line, over the x-span, down to a baseline
/// under the query domain. Positive trapezoids are closed at the ceiling,
/// negative ones open, so the signed indicators telescope exactly.
#[derive(Clone, Copy, Debug)]
pub struct SignedTrapezoid {
    pub ceiling: Line2,
    pub x_lo: f64,
    pub x_hi: f64,
    /// Right end of the x-span excluded (used to keep the two same-sign
    /// trapezoids disjoint where they share a vertical edge).
    pub hi_open: bool,
    pub positive: bool,
}

impl SignedTrapezoid {
    pub fn span_contains(&self, x: f64) -> bool {
        x >= self.x_lo && if self.hi_open { x < self.x_hi } else { x <= self.x_hi }
    }

    pub fn contains(&self, q: Point2, baseline: f64) -> bool {
        if !self.span_contains(q.x) || q.y < baseline {
            return false;
        }
        let top = self.ceiling.at(q.x);
        if self.positive {
            q.y <= top
        } else {
            q.y < top
        }
    }

    /// The trapezoid seen as a halfplane below its ceiling line (exact within
    /// its x-span and above the baseline).
    pub fn as_halfplane(&self) -> Halfplane {
        Halfplane {
            line: self.ceiling,
            upper: false,
            closed: self.positive,
        }
    }

    pub fn sign(&self) -> i32 {
        if self.positive {
            1
        } else {
            -1
        }
    }
}

/// Decompose a triangle into three signed trapezoids with respect to the
/// `+y` direction. Requires `+y` to be a good direction (no vertical edge);
/// callers rotate the triangle into this frame first.
pub fn decompose_triangle(tri: &Triangle) -> Result<[SignedTrapezoid; 3]> {
    let mut v = tri.vertices;
    v.sort_by(|a, b| a.x.partial_cmp(&b.x).unwrap());
    let [a, m, b] = v;
    if a.x == m.x || m.x == b.x {
        return Err(Error::InvalidScene(
            "triangle has a vertical edge in the decomposition frame".into(),
        ));
    }
    let long = Line2::through(a, b);
    let mid_above = m.y > long.at(m.x);
    // Middle vertex above the long edge: the two short edges are the upper
    // boundary (positive), the long edge is the lower boundary (negative);
    // and symmetrically otherwise.
    let left = SignedTrapezoid {
        ceiling: Line2::through(a, m),
        x_lo: a.x,
        x_hi: m.x,
        hi_open: true,
        positive: mid_above,
    };
    let right = SignedTrapezoid {
        ceiling: Line2::through(m, b),
        x_lo: m.x,
        x_hi: b.x,
        hi_open: false,
        positive: mid_above,
    };
    let full = SignedTrapezoid {
        ceiling: long,
        x_lo: a.x,
        x_hi: b.x,
        hi_open: false,
        positive: !mid_above,
    };
    Ok([left, right, full])
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn duality_examples() {
        let p = dual_line_to_point(Line2::new(0.5, 0.25));
        assert_eq!(p, Point2::new(0.5, -0.25));
        assert_eq!(dual_line_to_point(Line2::new(0.0, 0.0)), Point2::new(0.0, 0.0));
        let l = dual_point_to_line(Point2::new(0.25, 0.5));
        assert_eq!(l, Line2::new(0.25, -0.5));
        assert_eq!(dual_point_to_line(Point2::new(0.0, 0.0)), Line2::new(0.0, 0.0));
    }

    #[test]
    fn vertical_distance_example() {
        let d = vertical_distance(Point2::new(0.5, 0.7), Line2::new(0.5, 0.0));
        assert!((d - 0.45).abs() < 1e-15);
        assert_eq!(vertical_distance(Point2::new(0.25, 0.125), Line2::new(0.5, 0.0)), 0.0);
    }

    #[test]
    fn euclid_distance_examples() {
        assert_eq!(line_distance(Point2::new(0.0, 1.0), Line2::new(0.0, 0.0)), 1.0);
        assert_eq!(segment_distance(Point2::new(0.0, 1.0), Point2::new(-1.0, 0.0), Point2::new(1.0, 0.0)), 1.0);
        // point on set
        assert_eq!(segment_distance(Point2::new(0.5, 0.0), Point2::new(0.0, 0.0), Point2::new(1.0, 0.0)), 0.0);
    }

    #[test]
    fn slope_class_examples() {
        let c = Point2::new(0.5, 0.5);
        let (k, t) = slope_class(0.3, c);
        assert_eq!(k, 0);
        assert_eq!(t, SquareIsometry::identity(c));
        let (k, t) = slope_class(5.0, c);
        assert_eq!(k, 1);
        let h = t.apply_halfplane(Halfplane::upper(Line2::new(5.0, 0.1)));
        assert!((h.line.slope - 0.2).abs() < 1e-12);
        let (k, t) = slope_class(-0.3, c);
        assert_eq!(k, 2);
        let h = t.apply_halfplane(Halfplane::upper(Line2::new(-0.3, 0.1)));
        assert!((0.0..=1.0).contains(&h.line.slope));
        // tie-breaks to the lower-indexed class
        assert_eq!(slope_class(0.0, c).0, 0);
        assert_eq!(slope_class(1.0, c).0, 0);
        assert_eq!(slope_class(-1.0, c).0, 2);
        let (k, _) = slope_class(-4.0, c);
        assert_eq!(k, 3);
    }

    #[test]
    fn decompose_example_triangle() {
        let tri = Triangle::new([
            Point2::new(0.2, 0.2),
            Point2::new(0.8, 0.2),
            Point2::new(0.5, 0.8),
        ]);
        let traps = decompose_triangle(&tri).unwrap();
        assert_eq!(traps.iter().filter(|t| t.positive).count(), 2);
        let sum_at = |q: Point2| -> i32 {
            traps
                .iter()
                .filter(|t| t.contains(q, -1.0))
                .map(|t| t.sign())
                .sum()
        };
        assert_eq!(sum_at(Point2::new(0.5, 0.4)), 1);
        assert_eq!(sum_at(Point2::new(0.5, 0.1)), 0);
        // permuted vertex order yields the same trapezoid multiset
        let tri2 = Triangle::new([tri.vertices[2], tri.vertices[0], tri.vertices[1]]);
        let traps2 = decompose_triangle(&tri2).unwrap();
        for t in traps.iter() {
            assert!(traps2.iter().any(|u| u.x_lo == t.x_lo
                && u.x_hi == t.x_hi
                && u.positive == t.positive
                && (u.ceiling.slope - t.ceiling.slope).abs() < 1e-12));
        }
    }

    #[test]
    fn good_direction_examples() {
        let dirs = DirectionSet::standard();
        let eq = Triangle::new([
            Point2::new(0.2, 0.2),
            Point2::new(0.8, 0.2),
            Point2::new(0.5, 0.2 + 0.6 * 3f64.sqrt() / 2.0),
        ]);
        let i = eq.good_direction(dirs);
        let edge_angles: Vec<f64> = eq
            .edges()
            .iter()
            .map(|&(a, b)| (b.y - a.y).atan2(b.x - a.x).rem_euclid(std::f64::consts::PI))
            .collect();
        for e in edge_angles {
            assert!(line_angle_distance(dirs.angles[i], e) >= dirs.beta - 1e-12);
        }
        // a triangle with a horizontal edge never gets a near-horizontal direction
        let flat = Triangle::new([
            Point2::new(0.1, 0.1),
            Point2::new(0.9, 0.1),
            Point2::new(0.4, 0.7),
        ]);
        let i = flat.good_direction(dirs);
        assert!(line_angle_distance(dirs.angles[i], 0.0) >= dirs.beta - 1e-12);
        // stable under vertex permutation
        let flat2 = Triangle::new([flat.vertices[1], flat.vertices[2], flat.vertices[0]]);
        assert_eq!(flat.good_direction(dirs), flat2.good_direction(dirs));
    }

    proptest! {
        #[test]
        fn duality_is_an_involution(c in -5.0f64..5.0, t in -5.0f64..5.0) {
            let line = Line2::new(c, t);
            let back = dual_point_to_line(dual_line_to_point(line));
            prop_assert!((back.slope - c).abs() <= 1e-12 * c.abs().max(1.0));
            prop_assert!((back.intercept - t).abs() <= 1e-12 * t.abs().max(1.0));
        }

        #[test]
        fn duality_preserves_vertical_distance(
            px in -2.0f64..2.0, py in -2.0f64..2.0,
            c in -2.0f64..2.0, t in -2.0f64..2.0,
        ) {
            let p = Point2::new(px, py);
            let line = Line2::new(c, t);
            let d1 = vertical_distance(p, line);
            let d2 = vertical_distance(dual_line_to_point(line), dual_point_to_line(p));
            prop_assert!((d1 - d2).abs() <= 1e-10);
        }

        #[test]
        fn shifted_duality_preserves_vertical_distance(
            px in 0.0f64..1.0, py in 0.0f64..1.0,
            c in -2.0f64..2.0, t in -2.0f64..2.0,
            ax in 0.0f64..1.0, ay in 0.0f64..1.0,
        ) {
            let p = Point2::new(px, py);
            let line = Line2::new(c, t);
            let corner = Point2::new(ax, ay);
            let hstar = shifted_dual_line(line, corner);
            let (s, off) = shifted_dual_point(p, corner);
            // vertical distance from h* to the dual line y = s x - off
            let dv = (hstar.y - (s * hstar.x - off)).abs();
            prop_assert!((dv - vertical_distance(p, line)).abs() <= 1e-10);
            // involution under the fixed corner
            let back = shifted_dual_to_line(hstar, corner);
            prop_assert!((back.slope - c).abs() <= 1e-12 * c.abs().max(1.0));
            prop_assert!((back.intercept - t).abs() <= 1e-10);
        }

        #[test]
        fn corner_zero_reduces_to_standard_duality(c in -3.0f64..3.0, t in -3.0f64..3.0) {
            let line = Line2::new(c, t);
            let a = shifted_dual_line(line, Point2::new(0.0, 0.0));
            let b = dual_line_to_point(line);
            prop_assert_eq!(a, b);
        }

        #[test]
        fn euclid_matches_vertical_over_secant(
            px in -2.0f64..2.0, py in -2.0f64..2.0, c in -4.0f64..4.0, t in -2.0f64..2.0,
        ) {
            let p = Point2::new(px, py);
            let line = Line2::new(c, t);
            let lhs = line_distance(p, line);
            let rhs = vertical_distance(p, line) / (1.0 + c * c).sqrt();
            prop_assert!((lhs - rhs).abs() <= 1e-12);
        }

        #[test]
        fn slope_class_maps_into_unit_range(slope in -50.0f64..50.0, t in -2.0f64..2.0, upper in any::<bool>()) {
            let (_, iso) = slope_class(slope, Point2::new(0.5, 0.5));
            let h = Halfplane { line: Line2::new(slope, t), upper, closed: true };
            let h2 = iso.apply_halfplane(h);
            prop_assert!((-1e-9..=1.0 + 1e-9).contains(&h2.line.slope));
            // isometry: distances between transformed points are preserved
            let p = Point2::new(0.3, 0.9);
            let q = Point2::new(-0.4, 0.1);
            prop_assert!((iso.apply(p).dist(iso.apply(q)) - p.dist(q)).abs() <= 1e-12);
            // membership is preserved
            let inside = h.contains(p);
            prop_assert_eq!(h2.contains(iso.apply(p)), inside);
        }

        #[test]
        fn signed_trapezoid_sum_is_membership(
            xs in prop::array::uniform3(0.0f64..1.0),
            ys in prop::array::uniform3(0.0f64..1.0),
            qx in -0.2f64..1.2, qy in -0.2f64..1.2,
        ) {
            let tri = Triangle::new([
                Point2::new(xs[0], ys[0]),
                Point2::new(xs[1], ys[1]),
                Point2::new(xs[2], ys[2]),
            ]);
            prop_assume!(tri.signed_area2().abs() > 1e-6);
            let tri = tri.normalized(1e-9).unwrap();
            let dirs = DirectionSet::standard();
            let u = tri.good_direction(dirs);
            let rot = Rotation2::direction_to_up(dirs.angles[u], Point2::new(0.5, 0.5));
            let rtri = tri.rotate(rot);
            let q = rot.apply(Point2::new(qx, qy));
            let traps = decompose_triangle(&rtri).unwrap();
            let sum: i32 = traps.iter().filter(|t| t.contains(q, -1.0)).map(|t| t.sign()).sum();
            prop_assert_eq!(sum, i32::from(rtri.contains(q)));
        }
    }
}
