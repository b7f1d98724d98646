//! The primal-dual depth structure for halfplanes.
//!
//! A coarse primal quadtree over the root square is refined to cells of side
//! `delta1`; containment counters live on its nodes. Every bottom-level cell
//! crossed by boundary lines owns dual quadtrees, one per slope class, over
//! the points dual to those lines (dualized in the frame translated to the
//! cell's lower corner, after the class isometry maps slopes into `[0, 1]`).
//! Dual trees are refined until a crossed bottom cell pins the vertical
//! distance between the query's dual line and any point in the cell to at
//! most `(3/4) * epsilon`, which is what the under/over guarantees rest on.
//!
//! The same engine, with a single identity class and a wider slope bound,
//! serves as the second level of the triangle structure.

use crate::dual2::{Dual2Tree, Trace};
use crate::error::{Error, Result};
use crate::estimate::DepthEstimate;
use crate::geom2::{
    shifted_dual_line, shifted_dual_point, slope_class, Halfplane, Point2, Rect, SquareIsometry,
};
use crate::params::Params;
use crate::primal::{linear_cell_relation, CellRel, PrimalTree};

#[derive(Clone, Copy, Debug)]
pub enum SlopeProfile {
    /// Arbitrary finite slopes, partitioned into four isometry classes.
    FourClasses,
    /// All slopes already within `[-bound, bound]`; no partitioning.
    Bounded(f64),
}

#[derive(Clone, Copy, Debug)]
pub struct EngineConfig {
    pub root: Rect,
    pub epsilon: f64,
    pub delta1: f64,
    pub profile: SlopeProfile,
}

struct LeafDuals {
    corner: Point2,
    trees: Vec<Option<Dual2Tree>>,
}

pub struct HalfplaneDepth {
    cfg: EngineConfig,
    primal: PrimalTree,
    transforms: Vec<SquareIsometry>,
    leaves: Vec<LeafDuals>,
    dual_levels: u32,
    objects: Vec<Halfplane>,
}

/// Number of dual levels so that a crossed bottom cell bounds the vertical
/// distance from the query's dual line by `(3/4) * epsilon`. With the
/// classic halfplane box (`height 2*delta1`, `width 1`) this is
/// `log2(4 * delta1 / epsilon) = log2(4 / delta2)`.
fn dual_levels_for(height: f64, width: f64, delta1: f64, epsilon: f64) -> u32 {
    let need = (height + delta1 * width) / (0.75 * epsilon);
    need.log2().ceil().max(0.0) as u32
}

impl HalfplaneDepth {
    pub fn build(objects: Vec<Halfplane>, cfg: EngineConfig) -> Result<HalfplaneDepth> {
        let side = cfg.root.x1 - cfg.root.x0;
        let levels = (side / cfg.delta1).log2().round();
        if (side / cfg.delta1 - 2f64.powi(levels as i32)).abs() > 1e-9 || levels < 0.0 {
            return Err(Error::param("delta1", "root side / delta1 must be a power of two"));
        }
        for h in &objects {
            if !h.line.slope.is_finite() || !h.line.intercept.is_finite() {
                return Err(Error::InvalidScene("non-finite boundary line".into()));
            }
            if let SlopeProfile::Bounded(b) = cfg.profile {
                if h.line.slope.abs() > b {
                    return Err(Error::InvalidScene(format!(
                        "slope {} exceeds the structure bound {b}",
                        h.line.slope
                    )));
                }
            }
        }
        let transforms: Vec<SquareIsometry> = match cfg.profile {
            SlopeProfile::FourClasses => (0..4)
                .map(|k| match k {
                    0 => slope_class(0.5, cfg.root.center()).1,
                    1 => slope_class(2.0, cfg.root.center()).1,
                    2 => slope_class(-0.5, cfg.root.center()).1,
                    _ => slope_class(-2.0, cfg.root.center()).1,
                })
                .collect(),
            SlopeProfile::Bounded(_) => vec![SquareIsometry::identity(cfg.root.center())],
        };
        let mut primal = PrimalTree::new(vec![cfg.root.x0, cfg.root.y0], side, levels as u32);
        let mut leaf_members: Vec<(Point2, Vec<u32>)> = Vec::new();
        for (i, h) in objects.iter().enumerate() {
            // signed linear form of the halfplane: s*(y - c*x - t) >= 0
            let s = if h.upper { 1.0 } else { -1.0 };
            let coeffs = [-s * h.line.slope, s];
            let offset = -s * h.line.intercept;
            primal.insert(
                &mut |lo, cside| linear_cell_relation(&coeffs, offset, lo, cside, h.closed),
                &mut |slot, lo| {
                    let slot = slot as usize;
                    if slot == leaf_members.len() {
                        leaf_members.push((Point2::new(lo[0], lo[1]), Vec::new()));
                    }
                    leaf_members[slot].1.push(i as u32);
                },
            );
        }
        let dual_levels = {
            let (h, w) = match cfg.profile {
                SlopeProfile::FourClasses => (2.0 * cfg.delta1, 1.0),
                SlopeProfile::Bounded(b) => ((1.0 + 2.0 * b) * cfg.delta1, 2.0 * b),
            };
            dual_levels_for(h, w, cfg.delta1, cfg.epsilon)
        };
        let mut me = HalfplaneDepth {
            cfg,
            primal,
            transforms,
            leaves: Vec::new(),
            dual_levels,
            objects,
        };
        me.leaves = leaf_members
            .into_iter()
            .map(|(corner, members)| me.build_leaf(corner, &members))
            .collect();
        Ok(me)
    }

    fn class_of(&self, h: &Halfplane) -> usize {
        match self.cfg.profile {
            SlopeProfile::FourClasses => slope_class(h.line.slope, self.cfg.root.center()).0,
            SlopeProfile::Bounded(_) => 0,
        }
    }

    /// Dual root box for a transformed leaf cell anchored at its corner.
    fn dual_box(&self) -> Rect {
        let d1 = self.cfg.delta1;
        match self.cfg.profile {
            SlopeProfile::FourClasses => Rect::new(0.0, -d1, 1.0, d1),
            SlopeProfile::Bounded(b) => Rect::new(-b, -(1.0 + b) * d1, b, b * d1),
        }
    }

    fn build_leaf(&self, corner: Point2, members: &[u32]) -> LeafDuals {
        let cell = Rect::square(corner, self.cfg.delta1);
        let mut per_class: Vec<Vec<(Point2, bool)>> = vec![Vec::new(); self.transforms.len()];
        for &i in members {
            let h = &self.objects[i as usize];
            let class = self.class_of(h);
            let t = self.transforms[class];
            let h2 = t.apply_halfplane(*h);
            let cell2 = t.apply_rect(cell);
            let p = shifted_dual_line(h2.line, cell2.corner());
            per_class[class].push((p, h2.upper));
        }
        let bx = self.dual_box();
        let trees = per_class
            .into_iter()
            .map(|pts| {
                if pts.is_empty() {
                    None
                } else {
                    Some(Dual2Tree::build(&pts, bx, self.dual_levels))
                }
            })
            .collect();
        LeafDuals { corner, trees }
    }

    pub fn query(&self, q: Point2) -> DepthEstimate {
        debug_assert!(self.cfg.root.contains(q));
        let (sum, leaf) = self.primal.query_path(&[q.x, q.y]);
        let mut est = DepthEstimate::new(sum, sum);
        if let Some((slot, _)) = leaf {
            let leaf = &self.leaves[slot as usize];
            let cell = Rect::square(leaf.corner, self.cfg.delta1);
            for (class, tree) in leaf.trees.iter().enumerate() {
                let Some(tree) = tree else { continue };
                let t = self.transforms[class];
                let q2 = t.apply(q);
                let cell2 = t.apply_rect(cell);
                let (s, off) = shifted_dual_point(q2, cell2.corner());
                let tr: Trace = tree.trace(s, off);
                est.d_minus += tr.confirmed;
                est.d_plus += tr.confirmed + tr.band;
            }
        }
        est
    }

    pub fn epsilon(&self) -> f64 {
        self.cfg.epsilon
    }

    pub fn root(&self) -> Rect {
        self.cfg.root
    }

    pub fn primal_node_count(&self) -> usize {
        self.primal.node_count()
    }

    pub fn dual_node_count(&self) -> usize {
        self.leaves
            .iter()
            .flat_map(|l| l.trees.iter())
            .filter_map(|t| t.as_ref().map(|t| t.node_count()))
            .sum()
    }

    pub fn dual_point_count(&self) -> usize {
        self.leaves
            .iter()
            .flat_map(|l| l.trees.iter())
            .filter_map(|t| t.as_ref().map(|t| t.point_count as usize))
            .sum()
    }

    #[doc(hidden)]
    pub fn corrupt_for_testing(&mut self) {
        self.primal.corrupt_for_testing();
    }

    /// Replay the counting decision for one object against the query: the
    /// same classification rules as the build and trace, derived from
    /// geometry alone. Used to verify the per-object strong form.
    pub fn explain(&self, q: Point2, obj: usize) -> Fate {
        let h = self.objects[obj];
        let side = self.cfg.root.x1 - self.cfg.root.x0;
        let s = if h.upper { 1.0 } else { -1.0 };
        let coeffs = [-s * h.line.slope, s];
        let offset = -s * h.line.intercept;
        let mut lo = [self.cfg.root.x0, self.cfg.root.y0];
        let mut cside = side;
        let levels = (side / self.cfg.delta1).log2().round() as u32;
        for level in 0..=levels {
            match linear_cell_relation(&coeffs, offset, &lo, cside, h.closed) {
                CellRel::Contained => return Fate::DMinus,
                CellRel::Disjoint => return Fate::NotCounted,
                CellRel::Crossed => {}
            }
            if level == levels {
                break;
            }
            let half = cside * 0.5;
            for j in 0..2 {
                if q_coord(q, j) >= lo[j] + half {
                    lo[j] += half;
                }
            }
            cside = half;
        }
        // dual phase in the leaf cell
        let cell = Rect::square(Point2::new(lo[0], lo[1]), self.cfg.delta1);
        let class = self.class_of(&h);
        let t = self.transforms[class];
        let h2 = t.apply_halfplane(h);
        let cell2 = t.apply_rect(cell);
        let p = shifted_dual_line(h2.line, cell2.corner());
        let q2 = t.apply(q);
        let (qs, qoff) = shifted_dual_point(q2, cell2.corner());
        let mut bx = self.dual_box();
        for level in 0..=self.dual_levels {
            // side of the box containing p
            let (a, b) = (qs * bx.x0, qs * bx.x1);
            let min = bx.y0 - a.max(b) + qoff;
            let max = bx.y1 - a.min(b) + qoff;
            if min > 0.0 {
                return if h2.upper { Fate::DMinus } else { Fate::NotCounted };
            }
            if max < 0.0 {
                return if h2.upper { Fate::NotCounted } else { Fate::DMinus };
            }
            if level == self.dual_levels {
                return Fate::DPlusOnly;
            }
            let c = bx.center();
            bx = Rect::new(
                if p.x >= c.x { c.x } else { bx.x0 },
                if p.y >= c.y { c.y } else { bx.y0 },
                if p.x >= c.x { bx.x1 } else { c.x },
                if p.y >= c.y { bx.y1 } else { c.y },
            );
        }
        unreachable!()
    }
}

fn q_coord(q: Point2, j: usize) -> f64 {
    if j == 0 {
        q.x
    } else {
        q.y
    }
}

/// How one object was counted for one query.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fate {
    /// Counted in the underestimate (and the overestimate).
    DMinus,
    /// Counted only in the overestimate.
    DPlusOnly,
    NotCounted,
}

/// The halfplane structure over the unit square.
pub struct PdStructure {
    pub params: Params,
    engine: HalfplaneDepth,
    n: usize,
}

pub const UNIT_SQUARE: Rect = Rect {
    x0: 0.0,
    y0: 0.0,
    x1: 1.0,
    y1: 1.0,
};

impl PdStructure {
    pub fn build(halfplanes: &[Halfplane], params: Params) -> Result<PdStructure> {
        let engine = HalfplaneDepth::build(
            halfplanes.to_vec(),
            EngineConfig {
                root: UNIT_SQUARE,
                epsilon: params.epsilon,
                delta1: params.delta1,
                profile: SlopeProfile::FourClasses,
            },
        )?;
        Ok(PdStructure {
            params,
            engine,
            n: halfplanes.len(),
        })
    }

    pub fn query(&self, q: Point2) -> Result<DepthEstimate> {
        if !UNIT_SQUARE.contains(q) {
            return Err(Error::OutOfDomain);
        }
        let est = self.engine.query(q);
        debug_assert!(est.d_plus as usize <= self.n);
        Ok(est)
    }

    pub fn explain(&self, q: Point2, obj: usize) -> Fate {
        self.engine.explain(q, obj)
    }

    pub fn epsilon(&self) -> f64 {
        self.params.epsilon
    }

    pub fn primal_node_count(&self) -> usize {
        self.engine.primal_node_count()
    }

    pub fn dual_node_count(&self) -> usize {
        self.engine.dual_node_count()
    }

    pub fn dual_point_count(&self) -> usize {
        self.engine.dual_point_count()
    }

    #[doc(hidden)]
    pub fn corrupt_for_testing(&mut self) {
        self.engine.corrupt_for_testing();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom2::Line2;
    use crate::params::choose_parameters;

    fn build(halfplanes: &[Halfplane], eps: f64, m: usize) -> PdStructure {
        let p = choose_parameters(halfplanes.len(), m, eps, 1.0).unwrap();
        PdStructure::build(halfplanes, p).unwrap()
    }

    #[test]
    fn empty_scene() {
        let st = build(&[], 0.01, 100);
        assert_eq!(st.query(Point2::new(0.3, 0.7)).unwrap(), DepthEstimate::ZERO);
    }

    #[test]
    fn containing_halfplane_is_exact_everywhere() {
        let st = build(&[Halfplane::upper(Line2::new(0.0, -1.0))], 0.01, 100);
        for &q in &[[0.0, 0.0], [0.5, 0.5], [1.0, 1.0], [0.37, 0.93]] {
            let e = st.query(Point2::new(q[0], q[1])).unwrap();
            assert_eq!((e.d_minus, e.d_plus), (1, 1));
        }
    }

    #[test]
    fn single_crossing_halfplane() {
        // y >= 0.5x + 0.1
        let h = Halfplane::upper(Line2::new(0.5, 0.1));
        let st = build(&[h], 2f64.powi(-6), 64);
        // far inside
        let e = st.query(Point2::new(0.2, 0.9)).unwrap();
        assert_eq!((e.d_minus, e.d_plus), (1, 1));
        // far outside
        let e = st.query(Point2::new(0.9, 0.1)).unwrap();
        assert_eq!((e.d_minus, e.d_plus), (0, 0));
        // near the line: sandwich still holds
        let e = st.query(Point2::new(0.2, 0.2 + 1e-4)).unwrap();
        assert!(e.d_minus <= 1 && e.d_plus >= 1);
    }

    #[test]
    fn out_of_domain_is_rejected() {
        let st = build(&[], 0.1, 10);
        assert!(st.query(Point2::new(1.5, 0.0)).is_err());
    }

    #[test]
    fn explain_matches_query_counts() {
        let hs = vec![
            Halfplane::upper(Line2::new(0.3, 0.2)),
            Halfplane::lower(Line2::new(-0.7, 0.9)),
            Halfplane::upper(Line2::new(4.0, -1.5)),
            Halfplane::lower(Line2::new(-3.0, 2.0)),
        ];
        let st = build(&hs, 2f64.powi(-5), 50);
        for &(x, y) in &[(0.1, 0.2), (0.5, 0.5), (0.9, 0.8), (0.33, 0.77)] {
            let q = Point2::new(x, y);
            let est = st.query(q).unwrap();
            let mut dm = 0;
            let mut dp = 0;
            for i in 0..hs.len() {
                match st.explain(q, i) {
                    Fate::DMinus => {
                        dm += 1;
                        dp += 1;
                    }
                    Fate::DPlusOnly => dp += 1,
                    Fate::NotCounted => {}
                }
            }
            assert_eq!((dm, dp), (est.d_minus, est.d_plus));
        }
    }

    #[test]
    fn band_bound_is_three_quarters_epsilon() {
        // leaf box vertical reach (height + delta1 * width) / 2^levels
        let eps = 2f64.powi(-8);
        let p = choose_parameters(4096, 256, eps, 1.0).unwrap();
        let lv = super::dual_levels_for(2.0 * p.delta1, 1.0, p.delta1, p.epsilon);
        let reach = 3.0 * p.delta1 / 2f64.powi(lv as i32);
        assert!(reach <= 0.75 * p.epsilon + 1e-15);
        assert!(reach > 0.375 * p.epsilon - 1e-15, "not overly deep");
    }
}
