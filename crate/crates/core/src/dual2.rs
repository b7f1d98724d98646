//! Pruned dual quadtree over a rectangle of dual points.
//!
//! Each node counts the positive and negative points inside its rectangle
//! (positive encodes an upper halfplane, negative a lower one). A query
//! traces a dual line through the tree: children of crossed nodes lying
//! strictly above the line confirm their positive points, those strictly
//! below confirm their negative points, and crossed bottom-level leaves
//! contribute their totals to the overestimate band only. Strictness of the
//! side tests is what makes every confirmed count a true containment.

use crate::geom2::{Point2, Rect};

const NONE: u32 = u32::MAX;

#[derive(Clone, Copy)]
struct DNode {
    cp: u32,
    cm: u32,
    kids: [u32; 4],
}

pub struct Dual2Tree {
    pub rect: Rect,
    pub levels: u32,
    nodes: Vec<DNode>,
    pub point_count: u32,
}

/// Result of tracing a dual line: `confirmed` points are exactly the ones
/// whose halfplane strictly contains the query point among those resolved by
/// side tests; `band` points sit in crossed bottom cells.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Trace {
    pub confirmed: u32,
    pub band: u32,
}

impl Dual2Tree {
    /// Build over `(dual point, positive?)` pairs. Points are assigned to
    /// child rectangles half-openly by midline comparison.
    pub fn build(points: &[(Point2, bool)], rect: Rect, levels: u32) -> Dual2Tree {
        debug_assert!(points.iter().all(|(p, _)| rect.contains(*p)), "dual point outside root box");
        let mut tree = Dual2Tree {
            rect,
            levels,
            nodes: Vec::new(),
            point_count: points.len() as u32,
        };
        let idx: Vec<u32> = (0..points.len() as u32).collect();
        if !points.is_empty() {
            tree.build_rec(points, idx, rect, 0);
        }
        tree
    }

    fn build_rec(&mut self, points: &[(Point2, bool)], idx: Vec<u32>, rect: Rect, level: u32) -> u32 {
        let me = self.nodes.len();
        let mut cp = 0;
        let mut cm = 0;
        for &i in &idx {
            if points[i as usize].1 {
                cp += 1;
            } else {
                cm += 1;
            }
        }
        self.nodes.push(DNode {
            cp,
            cm,
            kids: [NONE; 4],
        });
        if level < self.levels {
            let c = rect.center();
            let mut parts: [Vec<u32>; 4] = Default::default();
            for i in idx {
                let p = points[i as usize].0;
                let q = usize::from(p.x >= c.x) | usize::from(p.y >= c.y) << 1;
                parts[q].push(i);
            }
            for (q, part) in parts.into_iter().enumerate() {
                if part.is_empty() {
                    continue;
                }
                let child_rect = quadrant_rect(rect, q);
                let child = self.build_rec(points, part, child_rect, level + 1);
                self.nodes[me].kids[q] = child;
            }
        }
        me as u32
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Trace the dual line `y = slope * x - offset`.
    pub fn trace(&self, slope: f64, offset: f64) -> Trace {
        let mut out = Trace::default();
        if self.nodes.is_empty() {
            return out;
        }
        match line_box_side(slope, offset, self.rect) {
            Side::Above => out.confirmed += self.nodes[0].cp,
            Side::Below => out.confirmed += self.nodes[0].cm,
            Side::Crossed => self.trace_rec(0, self.rect, 0, slope, offset, &mut out),
        }
        out
    }

    fn trace_rec(&self, node: usize, rect: Rect, level: u32, slope: f64, offset: f64, out: &mut Trace) {
        if level == self.levels {
            out.band += self.nodes[node].cp + self.nodes[node].cm;
            return;
        }
        for (q, &kid) in self.nodes[node].kids.iter().enumerate() {
            if kid == NONE {
                continue;
            }
            let r = quadrant_rect(rect, q);
            match line_box_side(slope, offset, r) {
                Side::Above => out.confirmed += self.nodes[kid as usize].cp,
                Side::Below => out.confirmed += self.nodes[kid as usize].cm,
                Side::Crossed => self.trace_rec(kid as usize, r, level + 1, slope, offset, out),
            }
        }
    }
}

fn quadrant_rect(r: Rect, q: usize) -> Rect {
    let c = r.center();
    Rect::new(
        if q & 1 == 1 { c.x } else { r.x0 },
        if q & 2 == 2 { c.y } else { r.y0 },
        if q & 1 == 1 { r.x1 } else { c.x },
        if q & 2 == 2 { r.y1 } else { c.y },
    )
}

enum Side {
    /// Box strictly above the line.
    Above,
    /// Box strictly below the line.
    Below,
    Crossed,
}

fn line_box_side(slope: f64, offset: f64, r: Rect) -> Side {
    // g(x, y) = y - slope*x + offset
    let (a, b) = (slope * r.x0, slope * r.x1);
    let min = r.y0 - a.max(b) + offset;
    let max = r.y1 - a.min(b) + offset;
    if min > 0.0 {
        Side::Above
    } else if max < 0.0 {
        Side::Below
    } else {
        Side::Crossed
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_point_is_tracked_to_the_bottom() {
        let rect = Rect::new(0.0, -0.125, 1.0, 0.125);
        let tree = Dual2Tree::build(&[(Point2::new(0.5, 0.05), true)], rect, 5);
        // counters on a single path
        assert_eq!(tree.node_count(), 6);
        // line far below the point: confirmed as above
        let t = tree.trace(0.0, 0.1); // y = -0.1
        assert_eq!(t, Trace { confirmed: 1, band: 0 });
        // line through the point's leaf: band
        let t = tree.trace(0.0, -0.05);
        assert_eq!(t.confirmed + t.band, 1);
        assert_eq!(t.band, 1);
        // negative side never confirms an upper point
        let t = tree.trace(0.0, -0.12);
        assert_eq!(t.confirmed, 0);
    }

    #[test]
    fn signs_confirm_on_their_own_side() {
        let rect = Rect::new(0.0, -1.0, 1.0, 1.0);
        let pts = vec![
            (Point2::new(0.25, 0.5), true),   // upper halfplane dual
            (Point2::new(0.25, -0.5), false), // lower halfplane dual
        ];
        let tree = Dual2Tree::build(&pts, rect, 6);
        let t = tree.trace(0.0, 0.0); // the x-axis
        assert_eq!(t.confirmed, 2);
        assert_eq!(t.band, 0);
    }
}
