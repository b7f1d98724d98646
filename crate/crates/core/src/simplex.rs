//! Depth structure for simplices in `R^3`.
//!
//! Every simplex is assigned a coordinate frame (a direction on the sphere
//! fixing the z-axis plus a planar direction fixing y) in which no facet is
//! close to vertical and no projected edge is close to horizontal. In that
//! frame each facet projects to a triangle, the triangle decomposes into
//! three signed trapezoids, and each trapezoid lifts to a z-vertical prism
//! under the facet's supporting plane; signs multiply so the twelve prisms'
//! signed indicators reproduce simplex membership.
//!
//! Per frame and sign, prisms are indexed by a segment tree on x-spans; each
//! node owns an octree over the two slanted constraints of its prisms
//! (ceiling plane and vertical facet plane), and each octree leaf owns a
//! two-level dual: ceilings as points in `R^3` whose tree nodes hold 2D dual
//! trees over the vertical facets, with prisms resolved by one level
//! whenever only one slanted facet crosses the leaf.

use crate::dual2::Dual2Tree;
use crate::error::{Error, Result};
use crate::estimate::{DepthEstimate, SignedCounts};
use crate::geom2::{decompose_triangle, line_angle_distance, Point2, Rect, SignedTrapezoid, Triangle};
use crate::geomd::{dot3, RotationD, Simplex3};
use crate::maxdepth::DepthStructure;
use crate::params::choose_parameters_simplex3;
use crate::primal::{linear_cell_relation, CellRel, PrimalTree};
use crate::segtree::SegmentTree;
use std::sync::OnceLock;

pub const FRAME_CENTER: [f64; 3] = [0.5, 0.5, 0.5];
pub const FRAME_SHIFT: [f64; 3] = [1.0, 1.0, 1.0];
pub const FRAME_ROOT_SIDE: f64 = 2.0;

/// Map a world point into a frame: rotate about the cube center, then shift
/// so the whole scene sits strictly above the coordinate planes.
pub fn rotate_point3(rot: &RotationD, p: &[f64; 3]) -> [f64; 3] {
    let local = [
        p[0] - FRAME_CENTER[0],
        p[1] - FRAME_CENTER[1],
        p[2] - FRAME_CENTER[2],
    ];
    let r = rot.apply(&local);
    [
        r[0] + FRAME_SHIFT[0],
        r[1] + FRAME_SHIFT[1],
        r[2] + FRAME_SHIFT[2],
    ]
}

/// The finite family of coordinate frames: 24 z-axis candidates on the
/// sphere and 12 in-plane directions. `sin_beta3` is certified at table
/// construction: any four facet normals leave some direction with
/// `|n . u| >= sin_beta3`, so every simplex gets a frame.
pub struct FrameTable {
    pub dirs3: Vec<[f64; 3]>,
    pub angles2: Vec<f64>,
    pub sin_beta3: f64,
    pub beta2: f64,
}

impl FrameTable {
    pub fn standard() -> &'static FrameTable {
        static TABLE: OnceLock<FrameTable> = OnceLock::new();
        TABLE.get_or_init(|| FrameTable::construct(24, 12))
    }

    fn construct(n3: usize, n2: usize) -> FrameTable {
        let dirs3 = fibonacci_sphere(n3);
        let angles2: Vec<f64> = (0..n2)
            .map(|i| i as f64 * std::f64::consts::PI / n2 as f64)
            .collect();
        let sin_beta3 = certify_band_bound(&dirs3);
        FrameTable {
            dirs3,
            angles2,
            sin_beta3,
            beta2: std::f64::consts::PI / 24.0,
        }
    }

    /// First valid frame pair in lexicographic order. A z-direction is valid
    /// when every facet normal keeps `|n . u| >= sin_beta3`; the planar
    /// direction must make angle at least `beta2` with every projected edge.
    pub fn assign(&self, s: &Simplex3) -> (usize, usize) {
        let normals: Vec<[f64; 3]> = s
            .facet_planes()
            .iter()
            .map(|f| {
                let n = f.normal;
                let len = dot3(n, n).sqrt();
                [n[0] / len, n[1] / len, n[2] / len]
            })
            .collect();
        for (i3, u) in self.dirs3.iter().enumerate() {
            if !normals.iter().all(|n| dot3(*n, *u).abs() >= self.sin_beta3) {
                continue;
            }
            // Householder to the pole is an involution, so the rotated edge
            // is computed with the full map.
            let h = RotationD::to_pole(&u[..]);
            let edge_angles: Vec<f64> = s
                .edges()
                .iter()
                .map(|(a, b)| {
                    let e = crate::geomd::sub3(*b, *a);
                    let r = h.apply(&e);
                    r[1].atan2(r[0]).rem_euclid(std::f64::consts::PI)
                })
                .collect();
            for (i2, theta) in self.angles2.iter().enumerate() {
                if edge_angles
                    .iter()
                    .all(|&e| line_angle_distance(e, *theta) >= self.beta2 - 1e-12)
                {
                    return (i3, i2);
                }
            }
        }
        panic!("frame family failed to cover a simplex; certificate violated");
    }

    /// World-to-frame rotation for a frame pair: take `dirs3[i3]` to the
    /// z-axis, then spin about z so the planar direction becomes `+y`.
    pub fn rotation(&self, i3: usize, i2: usize) -> RotationD {
        let h = RotationD::to_pole(&self.dirs3[i3][..]);
        let phi = std::f64::consts::FRAC_PI_2 - self.angles2[i2];
        let (c, s) = (phi.cos(), phi.sin());
        let rz = RotationD::from_rows(3, vec![c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0]);
        rz.compose(&h)
    }

    pub fn cot_beta3(&self) -> f64 {
        (1.0 - self.sin_beta3 * self.sin_beta3).sqrt() / self.sin_beta3
    }

    pub fn cot_beta2(&self) -> f64 {
        1.0 / self.beta2.tan()
    }

    /// Conservative multiple `C` such that any point in a prism's offset (by
    /// `eps`) within its x-span lies within `C * eps` of the prism.
    pub fn deviation_factor(&self) -> f64 {
        let s2 = self.beta2.sin();
        let s3 = self.sin_beta3;
        1.0 / s2 + (1.0 + self.cot_beta3() / s2) / s3
    }
}

fn fibonacci_sphere(n: usize) -> Vec<[f64; 3]> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
            let r = (1.0 - z * z).sqrt();
            let phi = golden * i as f64;
            [r * phi.cos(), r * phi.sin(), z]
        })
        .collect()
}

/// Largest `s` (from a fixed ladder) such that no four equatorial bands of
/// half-width `asin(s)` can cover all directions: checked over a dense net
/// of band normals with a margin covering the net's resolution.
fn certify_band_bound(dirs: &[[f64; 3]]) -> f64 {
    let net = fibonacci_sphere(32768);
    let margin = 3.5 / (net.len() as f64).sqrt();
    let mut per_point: Vec<Vec<f64>> = Vec::with_capacity(net.len());
    for n in &net {
        let mut dots: Vec<f64> = dirs.iter().map(|u| dot3(*n, *u).abs()).collect();
        dots.sort_by(|a, b| a.partial_cmp(b).unwrap());
        per_point.push(dots);
    }
    let mut s = 0.30;
    while s >= 0.01 {
        let bound = s + margin;
        let worst = per_point
            .iter()
            .map(|d| d.partition_point(|&x| x < bound))
            .max()
            .unwrap_or(0);
        if 4 * worst < dirs.len() {
            return s;
        }
        s -= 0.0025;
    }
    panic!("no certifiable band bound for the direction set");
}

/// One prism of the signed decomposition: the base trapezoid in the
/// xy-plane lifted up to the ceiling plane `z = cx*x + cy*y + c0`. Prisms
/// from upper facets are closed at the ceiling, prisms from lower facets
/// open, so the signed indicators telescope through the vertical direction.
#[derive(Clone, Debug)]
pub struct SignedPrism {
    pub base: SignedTrapezoid,
    pub ceil: [f64; 3],
    pub upper_facet: bool,
    pub positive: bool,
}

impl SignedPrism {
    pub fn ceiling_z(&self, x: f64, y: f64) -> f64 {
        self.ceil[0] * x + self.ceil[1] * y + self.ceil[2]
    }

    pub fn contains(&self, q: &[f64; 3]) -> bool {
        if !self.base.contains(Point2::new(q[0], q[1]), 0.0) || q[2] < 0.0 {
            return false;
        }
        let top = self.ceiling_z(q[0], q[1]);
        if self.upper_facet {
            q[2] <= top
        } else {
            q[2] < top
        }
    }

    /// Signed euclidean distance to the ceiling plane, positive below.
    pub fn ceiling_signed(&self, q: &[f64; 3]) -> f64 {
        let n2 = 1.0 + self.ceil[0] * self.ceil[0] + self.ceil[1] * self.ceil[1];
        (self.ceiling_z(q[0], q[1]) - q[2]) / n2.sqrt()
    }

    /// Signed euclidean distance to the vertical facet plane (over the base
    /// trapezoid's slanted edge), positive on the inner side.
    pub fn vertical_signed(&self, q: &[f64; 3]) -> f64 {
        let c = self.base.ceiling;
        (c.at(q[0]) - q[1]) / (1.0 + c.slope * c.slope).sqrt()
    }

    pub fn sign(&self) -> i32 {
        if self.positive {
            1
        } else {
            -1
        }
    }
}

/// Decompose a simplex, already rotated into its frame, into twelve signed
/// prisms (three per facet).
pub fn decompose_simplex3(s: &Simplex3) -> Result<Vec<SignedPrism>> {
    let idx = [[1, 2, 3], [0, 2, 3], [0, 1, 3], [0, 1, 2]];
    let planes = s.facet_planes();
    let mut out = Vec::with_capacity(12);
    for (f, tri) in idx.iter().enumerate() {
        let n = planes[f].normal;
        if n[2] == 0.0 {
            return Err(Error::InvalidScene("vertical facet in decomposition frame".into()));
        }
        let upper = n[2] > 0.0;
        let v0 = s.vertices[tri[0]];
        let ceil = [
            -n[0] / n[2],
            -n[1] / n[2],
            dot3(n, v0) / n[2],
        ];
        let projected = Triangle::new([
            Point2::new(s.vertices[tri[0]][0], s.vertices[tri[0]][1]),
            Point2::new(s.vertices[tri[1]][0], s.vertices[tri[1]][1]),
            Point2::new(s.vertices[tri[2]][0], s.vertices[tri[2]][1]),
        ])
        .normalized(1e-15)?;
        for trap in decompose_triangle(&projected)? {
            out.push(SignedPrism {
                base: trap,
                ceil,
                upper_facet: upper,
                positive: if upper { trap.positive } else { !trap.positive },
            });
        }
    }
    Ok(out)
}

// ---- the depth structure ----

pub struct Simplex3Structure {
    epsilon: f64,
    frames: Vec<FrameStruct>,
    n: usize,
    stats: PlacementStats,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct PlacementStats {
    /// prisms stored with only the ceiling crossing a leaf
    pub ceiling_only: u64,
    /// prisms stored with only the vertical facet crossing a leaf
    pub vertical_only: u64,
    /// prisms needing both dual levels
    pub two_level: u64,
}

struct FrameStruct {
    rot: RotationD,
    positive: PrismSet,
    negative: PrismSet,
}

struct PrismSet {
    segtree: SegmentTree,
    nodes: Vec<Option<NodeStruct>>,
}

struct NodeStruct {
    octree: PrimalTree,
    leaves: Vec<PrismLeaf>,
}

struct PrismLeaf {
    l1: L1Tree,
    vert_only: Option<Dual2Tree>,
}

impl Simplex3Structure {
    pub fn build(simplices: &[Simplex3], epsilon: f64, m: usize, tune: f64) -> Result<Simplex3Structure> {
        let table = FrameTable::standard();
        let n = simplices.len();
        let m_eff = m.max(1) * ((12 * n).max(2) as f64).log2().ceil() as usize;
        let mut by_frame: std::collections::BTreeMap<(usize, usize), Vec<&Simplex3>> =
            std::collections::BTreeMap::new();
        for s in simplices {
            by_frame.entry(table.assign(s)).or_default().push(s);
        }
        let mut stats = PlacementStats::default();
        let mut frames = Vec::with_capacity(by_frame.len());
        for ((i3, i2), members) in by_frame {
            let rot = table.rotation(i3, i2);
            let mut pos = Vec::new();
            let mut neg = Vec::new();
            for s in members {
                let rs = s.rotate(&rot, &FRAME_CENTER, &FRAME_SHIFT);
                for prism in decompose_simplex3(&rs)? {
                    if prism.positive {
                        pos.push(prism);
                    } else {
                        neg.push(prism);
                    }
                }
            }
            frames.push(FrameStruct {
                rot,
                positive: PrismSet::build(pos, epsilon, m_eff, tune, table, &mut stats)?,
                negative: PrismSet::build(neg, epsilon, m_eff, tune, table, &mut stats)?,
            });
        }
        Ok(Simplex3Structure {
            epsilon,
            frames,
            n,
            stats,
        })
    }

    pub fn query(&self, q: &[f64]) -> Result<DepthEstimate> {
        if q.len() != 3 {
            return Err(Error::DimensionMismatch { expected: 3, got: q.len() });
        }
        if q.iter().any(|x| !(0.0..=1.0).contains(x)) {
            return Err(Error::OutOfDomain);
        }
        let p = [q[0], q[1], q[2]];
        let mut total = DepthEstimate::ZERO;
        for frame in &self.frames {
            let y = rotate_point3(&frame.rot, &p);
            let pos = frame.positive.query(&y);
            let neg = frame.negative.query(&y);
            total = total.merge(DepthEstimate::from_signed(pos, neg));
        }
        debug_assert!(total.d_plus as usize <= self.n);
        Ok(total)
    }

    pub fn object_count(&self) -> usize {
        self.n
    }

    pub fn placement_stats(&self) -> PlacementStats {
        self.stats
    }

    pub fn prism_copies(&self) -> usize {
        self.frames
            .iter()
            .map(|f| f.positive.segtree.member_copies() + f.negative.segtree.member_copies())
            .sum()
    }
}

impl DepthStructure for Simplex3Structure {
    fn dimension(&self) -> usize {
        3
    }
    fn epsilon(&self) -> f64 {
        self.epsilon
    }
    fn query(&self, q: &[f64]) -> Result<DepthEstimate> {
        Simplex3Structure::query(self, q)
    }
}

impl PrismSet {
    fn build(
        prisms: Vec<SignedPrism>,
        epsilon: f64,
        m_eff: usize,
        tune: f64,
        table: &FrameTable,
        stats: &mut PlacementStats,
    ) -> Result<PrismSet> {
        let spans: Vec<(f64, f64, bool)> = prisms
            .iter()
            .map(|p| (p.base.x_lo, p.base.x_hi, p.base.hi_open))
            .collect();
        let segtree = SegmentTree::build(&spans);
        let mut nodes: Vec<Option<NodeStruct>> = Vec::new();
        let mut failure = None;
        segtree.for_each_node(&mut |node, members| {
            if failure.is_some() {
                return;
            }
            let subset: Vec<&SignedPrism> = members.iter().map(|&i| &prisms[i as usize]).collect();
            match NodeStruct::build(&subset, epsilon, m_eff, tune, table, stats) {
                Ok(ns) => {
                    if nodes.len() <= node {
                        nodes.resize_with(node + 1, || None);
                    }
                    nodes[node] = Some(ns);
                }
                Err(e) => failure = Some(e),
            }
        });
        if let Some(e) = failure {
            return Err(e);
        }
        Ok(PrismSet { segtree, nodes })
    }

    fn query(&self, y: &[f64; 3]) -> SignedCounts {
        let mut counts = SignedCounts::default();
        self.segtree.query(y[0], &mut |node| {
            if let Some(Some(ns)) = self.nodes.get(node) {
                let c = ns.query(y);
                counts.under += c.under;
                counts.over += c.over;
            }
        });
        counts
    }
}

/// Linear forms of the two slanted constraints of a prism.
fn ceiling_form(p: &SignedPrism) -> ([f64; 3], f64, bool) {
    // below the ceiling plane: cx*x + cy*y + c0 - z >= 0
    ([p.ceil[0], p.ceil[1], -1.0], p.ceil[2], p.upper_facet)
}

fn vertical_form(p: &SignedPrism) -> ([f64; 3], f64, bool) {
    // below the base ceiling line: s*x - y + t >= 0 (z-free)
    let c = p.base.ceiling;
    ([c.slope, -1.0, 0.0], c.intercept, p.base.positive)
}

impl NodeStruct {
    fn build(
        prisms: &[&SignedPrism],
        epsilon: f64,
        m_eff: usize,
        tune: f64,
        table: &FrameTable,
        stats: &mut PlacementStats,
    ) -> Result<NodeStruct> {
        let params = choose_parameters_simplex3(prisms.len(), m_eff, epsilon, tune)?;
        let levels = (FRAME_ROOT_SIDE / params.delta1).log2().round() as u32;
        let mut octree = PrimalTree::new(vec![0.0; 3], FRAME_ROOT_SIDE, levels);
        let mut leaf_members: Vec<(Vec<f64>, Vec<u32>)> = Vec::new();
        for (i, p) in prisms.iter().enumerate() {
            let (c1, o1, closed1) = ceiling_form(p);
            let (c2, o2, closed2) = vertical_form(p);
            octree.insert(
                &mut |lo, side| {
                    combine(
                        linear_cell_relation(&c1, o1, lo, side, closed1),
                        linear_cell_relation(&c2, o2, lo, side, closed2),
                    )
                },
                &mut |slot, lo| {
                    let slot = slot as usize;
                    if slot == leaf_members.len() {
                        leaf_members.push((lo.to_vec(), Vec::new()));
                    }
                    leaf_members[slot].1.push(i as u32);
                },
            );
        }
        let delta1 = params.delta1;
        let lambda3 = table.cot_beta3() * (1.0 + 1e-9);
        let lambda2 = table.cot_beta2() * (1.0 + 1e-9);
        let l1_levels = {
            let l1 = std::f64::consts::SQRT_2 * lambda3;
            let need = delta1 * (1.0 + 2.0 * l1 + 4.0 * lambda3) / (0.75 * params.epsilon);
            need.log2().ceil().max(0.0) as u32
        };
        let l2_levels = {
            let need = delta1 * (1.0 + 4.0 * lambda2) / (0.75 * params.epsilon);
            need.log2().ceil().max(0.0) as u32
        };
        let leaves = leaf_members
            .into_iter()
            .map(|(corner, ids)| {
                PrismLeaf::build(
                    &corner, &ids, prisms, delta1, lambda3, lambda2, l1_levels, l2_levels, stats,
                )
            })
            .collect();
        Ok(NodeStruct {
            octree,
            leaves,
        })
    }

    fn query(&self, y: &[f64; 3]) -> SignedCounts {
        let (sum, leaf) = self.octree.query_path(y);
        let mut counts = SignedCounts {
            under: sum,
            over: sum,
        };
        if let Some((slot, corner)) = leaf {
            let leaf = &self.leaves[slot as usize];
            let s = [y[0] - corner[0], y[1] - corner[1]];
            let t = y[2] - corner[2];
            let (dm, dp) = leaf.l1.trace(s, t);
            counts.under += dm;
            counts.over += dp;
            if let Some(vt) = &leaf.vert_only {
                let tr = vt.trace(s[0], s[1]);
                counts.under += tr.confirmed;
                counts.over += tr.confirmed + tr.band;
            }
        }
        counts
    }
}

fn combine(a: CellRel, b: CellRel) -> CellRel {
    use CellRel::*;
    match (a, b) {
        (Disjoint, _) | (_, Disjoint) => Disjoint,
        (Contained, Contained) => Contained,
        _ => Crossed,
    }
}

impl PrismLeaf {
    #[allow(clippy::too_many_arguments)]
    fn build(
        corner: &[f64],
        ids: &[u32],
        prisms: &[&SignedPrism],
        delta1: f64,
        lambda3: f64,
        lambda2: f64,
        l1_levels: u32,
        l2_levels: u32,
        stats: &mut PlacementStats,
    ) -> PrismLeaf {
        let c2 = Point2::new(corner[0], corner[1]);
        let vert_box = Rect::new(
            -lambda2,
            -(1.0 + lambda2) * delta1,
            lambda2,
            lambda2 * delta1,
        );
        let mut l1_entries: Vec<L1Entry> = Vec::new();
        let mut vert_only: Vec<(Point2, bool)> = Vec::new();
        for &i in ids {
            let p = prisms[i as usize];
            let (c1, o1, closed1) = ceiling_form(p);
            let (cv, ov, closed2) = vertical_form(p);
            let ceil_crossing =
                linear_cell_relation(&c1, o1, corner, delta1, closed1) == CellRel::Crossed;
            let vert_crossing =
                linear_cell_relation(&cv, ov, corner, delta1, closed2) == CellRel::Crossed;
            let vert_dual = shifted_dual_2d(p.base.ceiling, c2);
            let ceil_dual = shifted_ceiling_dual(p, corner);
            match (ceil_crossing, vert_crossing) {
                (true, true) => {
                    stats.two_level += 1;
                    l1_entries.push(L1Entry {
                        ceil: ceil_dual,
                        vert: Some(vert_dual),
                    });
                }
                (true, false) => {
                    stats.ceiling_only += 1;
                    l1_entries.push(L1Entry {
                        ceil: ceil_dual,
                        vert: None,
                    });
                }
                (false, true) => {
                    stats.vertical_only += 1;
                    vert_only.push((vert_dual, false));
                }
                (false, false) => unreachable!("leaf membership implies a crossing"),
            }
        }
        let l1_box = L1Box {
            lo: [-lambda3, -lambda3, -(1.0 + std::f64::consts::SQRT_2 * lambda3) * delta1],
            size: [
                2.0 * lambda3,
                2.0 * lambda3,
                (1.0 + 2.0 * std::f64::consts::SQRT_2 * lambda3) * delta1,
            ],
        };
        let l1 = L1Tree::build(&l1_entries, l1_box, l1_levels, vert_box, l2_levels);
        let vert_only = if vert_only.is_empty() {
            None
        } else {
            debug_assert!(vert_only.iter().all(|(p, _)| vert_box.contains(*p)));
            Some(Dual2Tree::build(&vert_only, vert_box, l2_levels))
        };
        PrismLeaf { l1, vert_only }
    }
}

/// 2D dual of a line against a cell corner (same as the halfplane case).
fn shifted_dual_2d(line: crate::geom2::Line2, corner: Point2) -> Point2 {
    crate::geom2::shifted_dual_line(line, corner)
}

/// 3D dual point of a ceiling plane in the frame translated to the leaf
/// corner: slopes stay, the offset shifts.
fn shifted_ceiling_dual(p: &SignedPrism, corner: &[f64]) -> [f64; 3] {
    let eta = [p.ceil[0], p.ceil[1], -p.ceil[2]];
    [
        eta[0],
        eta[1],
        eta[2] - (eta[0] * corner[0] + eta[1] * corner[1]) + corner[2],
    ]
}

// ---- first-level dual tree (3D, ceilings), nodes carry second-level trees ----

struct L1Entry {
    ceil: [f64; 3],
    /// vertical-facet dual; `None` for prisms whose vertical constraint
    /// holds over the whole leaf cell
    vert: Option<Point2>,
}

#[derive(Clone, Copy, Debug)]
struct L1Box {
    lo: [f64; 3],
    size: [f64; 3],
}

impl L1Box {
    fn contains(&self, p: &[f64; 3]) -> bool {
        (0..3).all(|j| p[j] >= self.lo[j] && p[j] <= self.lo[j] + self.size[j])
    }

    fn child(&self, quadrant: usize) -> L1Box {
        let mut lo = self.lo;
        let size = [self.size[0] * 0.5, self.size[1] * 0.5, self.size[2] * 0.5];
        for j in 0..3 {
            if quadrant >> j & 1 == 1 {
                lo[j] += size[j];
            }
        }
        L1Box { lo, size }
    }
}

const NONE: u32 = u32::MAX;

struct L1Node {
    /// prisms fully resolved by the ceiling side alone
    c_only: u32,
    /// second level over the vertical facets of two-level prisms
    l2: Option<Dual2Tree>,
    kids: [u32; 8],
}

struct L1Tree {
    root: L1Box,
    levels: u32,
    nodes: Vec<L1Node>,
}

impl L1Tree {
    fn build(
        entries: &[L1Entry],
        root: L1Box,
        levels: u32,
        vert_box: Rect,
        l2_levels: u32,
    ) -> L1Tree {
        debug_assert!(entries.iter().all(|e| root.contains(&e.ceil)), "ceiling dual escaped the root box");
        let mut tree = L1Tree {
            root,
            levels,
            nodes: Vec::new(),
        };
        if !entries.is_empty() {
            let idx: Vec<u32> = (0..entries.len() as u32).collect();
            tree.build_rec(entries, idx, &root.clone(), 0, vert_box, l2_levels);
        }
        tree
    }

    fn build_rec(
        &mut self,
        entries: &[L1Entry],
        idx: Vec<u32>,
        bx: &L1Box,
        level: u32,
        vert_box: Rect,
        l2_levels: u32,
    ) -> u32 {
        let me = self.nodes.len();
        let mut c_only = 0;
        let mut verts: Vec<(Point2, bool)> = Vec::new();
        for &i in &idx {
            match entries[i as usize].vert {
                None => c_only += 1,
                Some(p) => verts.push((p, false)),
            }
        }
        let l2 = if verts.is_empty() {
            None
        } else {
            Some(Dual2Tree::build(&verts, vert_box, l2_levels))
        };
        self.nodes.push(L1Node {
            c_only,
            l2,
            kids: [NONE; 8],
        });
        if level < self.levels {
            let mut parts: [Vec<u32>; 8] = Default::default();
            for i in idx {
                let p = &entries[i as usize].ceil;
                let mut q = 0usize;
                for j in 0..3 {
                    if p[j] >= bx.lo[j] + 0.5 * bx.size[j] {
                        q |= 1 << j;
                    }
                }
                parts[q].push(i);
            }
            for (q, part) in parts.into_iter().enumerate() {
                if part.is_empty() {
                    continue;
                }
                let child_box = bx.child(q);
                let child = self.build_rec(entries, part, &child_box, level + 1, vert_box, l2_levels);
                self.nodes[me].kids[q] = child;
            }
        }
        me as u32
    }

    /// Trace the query's dual plane (slopes `s`, offset `t`); confirmed
    /// ceilings consult their node's second level with the query's 2D dual
    /// line `(s[0], s[1])`.
    fn trace(&self, s: [f64; 2], t: f64) -> (u32, u32) {
        let (mut dm, mut dp) = (0, 0);
        if self.nodes.is_empty() {
            return (0, 0);
        }
        match self.side(s, t, &self.root) {
            L1Side::Below => self.confirm(0, s, &mut dm, &mut dp),
            L1Side::Above => {}
            L1Side::Crossed => self.trace_rec(0, &self.root.clone(), 0, s, t, &mut dm, &mut dp),
        }
        (dm, dp)
    }

    fn confirm(&self, node: usize, s: [f64; 2], dm: &mut u32, dp: &mut u32) {
        let n = &self.nodes[node];
        *dm += n.c_only;
        *dp += n.c_only;
        if let Some(l2) = &n.l2 {
            let tr = l2.trace(s[0], s[1]);
            *dm += tr.confirmed;
            *dp += tr.confirmed + tr.band;
        }
    }

    /// Crossed bottom cell: the ceiling is only known to be within the
    /// vertical-distance band, so everything goes to the overestimate; the
    /// second level still prunes prisms whose vertical facet is strictly
    /// violated.
    fn band(&self, node: usize, s: [f64; 2], dp: &mut u32) {
        let n = &self.nodes[node];
        *dp += n.c_only;
        if let Some(l2) = &n.l2 {
            let tr = l2.trace(s[0], s[1]);
            *dp += tr.confirmed + tr.band;
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn trace_rec(
        &self,
        node: usize,
        bx: &L1Box,
        level: u32,
        s: [f64; 2],
        t: f64,
        dm: &mut u32,
        dp: &mut u32,
    ) {
        if level == self.levels {
            self.band(node, s, dp);
            return;
        }
        for q in 0..8 {
            let kid = self.nodes[node].kids[q];
            if kid == NONE {
                continue;
            }
            let child_box = bx.child(q);
            match self.side(s, t, &child_box) {
                L1Side::Below => self.confirm(kid as usize, s, dm, dp),
                L1Side::Above => {}
                L1Side::Crossed => self.trace_rec(kid as usize, &child_box, level + 1, s, t, dm, dp),
            }
        }
    }

    fn side(&self, s: [f64; 2], t: f64, bx: &L1Box) -> L1Side {
        // g(eta) = eta_3 - (s1 eta_1 + s2 eta_2) + t over the box
        let mut min = bx.lo[2] + t;
        let mut max = bx.lo[2] + bx.size[2] + t;
        for j in 0..2 {
            let a = s[j] * bx.lo[j];
            let b = s[j] * (bx.lo[j] + bx.size[j]);
            min -= a.max(b);
            max -= a.min(b);
        }
        if max < 0.0 {
            L1Side::Below
        } else if min > 0.0 {
            L1Side::Above
        } else {
            L1Side::Crossed
        }
    }
}

enum L1Side {
    /// Every point of the box is strictly below the query's dual plane: the
    /// ceiling constraint is strictly satisfied for all its prisms.
    Below,
    Above,
    Crossed,
}
