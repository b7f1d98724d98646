//! Depth structure for triangles: each triangle is assigned a good
//! projection direction, decomposed in that rotated frame into three signed
//! trapezoids, and the trapezoids are indexed by a segment tree over their
//! x-spans with a halfplane structure per node over the ceiling lines. A
//! query combines the per-sign under/over counts as
//! `d_minus = pi_minus - nu_plus`, `d_plus = pi_plus - nu_minus`.

use crate::error::Result;
use crate::estimate::{DepthEstimate, SignedCounts};
use crate::geom2::{
    decompose_triangle, DirectionSet, Point2, Rect, Rotation2, SignedTrapezoid, Triangle,
};
use crate::maxdepth::DepthStructure;
use crate::params::choose_parameters;
use crate::pd::{EngineConfig, HalfplaneDepth, SlopeProfile, UNIT_SQUARE};
use crate::segtree::SegmentTree;

/// Root box for the rotated frames: side 2 around the unit square's center
/// covers every rotation of the unit square.
const FRAME_ROOT: Rect = Rect {
    x0: -0.5,
    y0: -0.5,
    x1: 1.5,
    y1: 1.5,
};

/// Slope bound for ceiling lines: edges make angle at least `beta` with the
/// projection direction, so slopes stay within `cot(beta)`, padded for
/// roundoff at the angle test boundary.
fn slope_bound(beta: f64) -> f64 {
    (1.0 / beta.tan()) * (1.0 + 1e-9)
}

pub struct TriangleStructure {
    epsilon: f64,
    directions: Vec<Option<DirStructure>>,
    n: usize,
}

struct DirStructure {
    rot: Rotation2,
    positive: SignStructure,
    negative: SignStructure,
}

struct SignStructure {
    segtree: SegmentTree,
    engines: Vec<Option<HalfplaneDepth>>,
}

impl SignStructure {
    fn build(traps: &[SignedTrapezoid], epsilon: f64, m_eff: usize, tune: f64) -> Result<SignStructure> {
        let spans: Vec<(f64, f64, bool)> =
            traps.iter().map(|t| (t.x_lo, t.x_hi, t.hi_open)).collect();
        let segtree = SegmentTree::build(&spans);
        let bound = slope_bound(DirectionSet::standard().beta);
        let mut engines: Vec<Option<HalfplaneDepth>> = Vec::new();
        let mut failure: Option<crate::error::Error> = None;
        segtree.for_each_node(&mut |node, members| {
            if failure.is_some() {
                return;
            }
            let ceilings: Vec<_> = members
                .iter()
                .map(|&i| traps[i as usize].as_halfplane())
                .collect();
            match choose_parameters(ceilings.len(), m_eff, epsilon, tune).and_then(|params| {
                HalfplaneDepth::build(
                    ceilings,
                    EngineConfig {
                        root: FRAME_ROOT,
                        epsilon: params.epsilon,
                        delta1: params.delta1,
                        profile: SlopeProfile::Bounded(bound),
                    },
                )
            }) {
                Ok(engine) => {
                    if engines.len() <= node {
                        engines.resize_with(node + 1, || None);
                    }
                    engines[node] = Some(engine);
                }
                Err(e) => failure = Some(e),
            }
        });
        if let Some(e) = failure {
            return Err(e);
        }
        Ok(SignStructure { segtree, engines })
    }

    fn query(&self, q: Point2) -> SignedCounts {
        let mut counts = SignedCounts::default();
        self.segtree.query(q.x, &mut |node| {
            if let Some(Some(engine)) = self.engines.get(node) {
                counts.add(engine.query(q));
            }
        });
        counts
    }

    fn trapezoid_copies(&self) -> usize {
        self.segtree.member_copies()
    }
}

impl TriangleStructure {
    /// `m` is the expected number of queries; inner structures are balanced
    /// for `m * ceil(log2 n)` since each query touches that many nodes.
    pub fn build(triangles: &[Triangle], epsilon: f64, m: usize, tune: f64) -> Result<TriangleStructure> {
        let dirs = DirectionSet::standard();
        let n = triangles.len();
        let m_eff = m.max(1) * (n.max(2) as f64).log2().ceil() as usize;
        // assign triangles to directions
        let mut assigned: Vec<Vec<&Triangle>> = vec![Vec::new(); dirs.len()];
        for t in triangles {
            assigned[t.good_direction(dirs)].push(t);
        }
        let center = Point2::new(0.5, 0.5);
        let mut directions = Vec::with_capacity(dirs.len());
        for (u, tris) in assigned.iter().enumerate() {
            if tris.is_empty() {
                directions.push(None);
                continue;
            }
            let rot = Rotation2::direction_to_up(dirs.angles[u], center);
            let mut pos = Vec::new();
            let mut neg = Vec::new();
            for t in tris {
                for trap in decompose_triangle(&t.rotate(rot))? {
                    if trap.positive {
                        pos.push(trap);
                    } else {
                        neg.push(trap);
                    }
                }
            }
            directions.push(Some(DirStructure {
                rot,
                positive: SignStructure::build(&pos, epsilon, m_eff, tune)?,
                negative: SignStructure::build(&neg, epsilon, m_eff, tune)?,
            }));
        }
        Ok(TriangleStructure {
            epsilon,
            directions,
            n,
        })
    }

    pub fn query(&self, q: Point2) -> Result<DepthEstimate> {
        if !UNIT_SQUARE.contains(q) {
            return Err(crate::error::Error::OutOfDomain);
        }
        let mut total = DepthEstimate::ZERO;
        for dir in self.directions.iter().flatten() {
            let rq = dir.rot.apply(q);
            let pos = dir.positive.query(rq);
            let neg = dir.negative.query(rq);
            total = total.merge(DepthEstimate::from_signed(pos, neg));
        }
        debug_assert!(total.d_plus as usize <= self.n);
        Ok(total)
    }

    pub fn object_count(&self) -> usize {
        self.n
    }

    /// Total trapezoid copies stored across all segment trees.
    pub fn trapezoid_copies(&self) -> usize {
        self.directions
            .iter()
            .flatten()
            .map(|d| d.positive.trapezoid_copies() + d.negative.trapezoid_copies())
            .sum()
    }

    pub fn engine_count(&self) -> usize {
        self.directions
            .iter()
            .flatten()
            .map(|d| {
                d.positive.engines.iter().flatten().count()
                    + d.negative.engines.iter().flatten().count()
            })
            .sum()
    }
}

impl DepthStructure for TriangleStructure {
    fn dimension(&self) -> usize {
        2
    }
    fn epsilon(&self) -> f64 {
        self.epsilon
    }
    fn query(&self, q: &[f64]) -> Result<DepthEstimate> {
        if q.len() != 2 {
            return Err(crate::error::Error::DimensionMismatch {
                expected: 2,
                got: q.len(),
            });
        }
        TriangleStructure::query(self, Point2::new(q[0], q[1]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;
    use crate::scene::{generate_scene, Family, Objects};

    #[test]
    fn empty_scene() {
        let st = TriangleStructure::build(&[], 0.05, 100, 1.0).unwrap();
        assert_eq!(st.query(Point2::new(0.4, 0.4)).unwrap(), DepthEstimate::ZERO);
    }

    #[test]
    fn single_triangle_counts() {
        let t = Triangle::new([
            Point2::new(0.2, 0.2),
            Point2::new(0.8, 0.2),
            Point2::new(0.5, 0.8),
        ]);
        let st = TriangleStructure::build(&[t], 2f64.powi(-6), 100, 1.0).unwrap();
        // segment tree over at most 3 endpoints, each sign holds <= 2 trapezoids
        assert!(st.trapezoid_copies() > 0);
        // deep inside: exact
        let e = st.query(Point2::new(0.5, 0.4)).unwrap();
        assert_eq!((e.d_minus, e.d_plus), (1, 1));
        // far outside
        let e = st.query(Point2::new(0.1, 0.9)).unwrap();
        assert_eq!((e.d_minus, e.d_plus), (0, 0));
    }

    #[test]
    fn sandwich_against_oracle_small_scenes() {
        for seed in 0..12u64 {
            let scene = generate_scene(Family::Triangles, 14, 100 + seed, "uniform", 2).unwrap();
            let tris = scene.triangles().unwrap();
            let eps = 0.02;
            let st = TriangleStructure::build(tris, eps, 50, 1.0).unwrap();
            for k in 0..40 {
                let q = Point2::new(
                    (k as f64 * 0.61803398875) % 1.0,
                    (k as f64 * 0.7548776662) % 1.0,
                );
                let est = st.query(q).unwrap();
                let exact = oracle::exact_depth(&scene, &[q.x, q.y]).unwrap();
                let signed = oracle::trapezoid_signed_depths(tris, q, eps).unwrap();
                assert!(signed.combined_inner() <= est.d_minus as i64, "inner bound at {q:?}");
                assert!((est.d_minus as u32) <= exact, "d_minus <= exact at {q:?}");
                assert!(exact <= est.d_plus, "exact <= d_plus at {q:?}");
                let outer = oracle::outer_eps_depth(&scene, &[q.x, q.y], eps).unwrap();
                assert!(est.d_plus <= outer, "offset outer bound at {q:?}");
                assert!(est.d_plus as i64 <= signed.combined_outer(), "combined outer at {q:?}");
            }
        }
    }

    #[test]
    fn depth_identity_pi_minus_nu() {
        let scene = generate_scene(Family::Triangles, 25, 77, "peak-noise", 2).unwrap();
        let Objects::Triangles(tris) = &scene.objects else { unreachable!() };
        for k in 0..200 {
            let q = Point2::new(
                (k as f64 * 0.381966) % 1.0,
                (k as f64 * 0.5545497) % 1.0,
            );
            let signed = oracle::trapezoid_signed_depths(tris, q, 0.01).unwrap();
            let exact = oracle::exact_depth(&scene, &[q.x, q.y]).unwrap() as i64;
            assert_eq!(signed.depth(), exact);
        }
    }
}
