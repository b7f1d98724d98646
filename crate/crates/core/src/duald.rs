//! Pruned `2^d`-ary dual tree over a box of dual points in `R^d`, the
//! higher-dimensional counterpart of [`crate::dual2`]. Boxes halve along
//! every axis per level, so the root aspect ratio is preserved. The trace
//! walks a query hyperplane `x_d = s_1 x_1 + .. + s_{d-1} x_{d-1} - t`
//! through the tree with strict side tests.

const NONE: u32 = u32::MAX;

#[derive(Clone, Debug)]
pub struct BoxD {
    pub lo: Vec<f64>,
    pub size: Vec<f64>,
}

impl BoxD {
    pub fn contains(&self, p: &[f64]) -> bool {
        p.iter()
            .zip(self.lo.iter().zip(&self.size))
            .all(|(x, (l, s))| *x >= *l && *x <= *l + *s)
    }

    fn child(&self, quadrant: usize) -> BoxD {
        let mut lo = self.lo.clone();
        let size: Vec<f64> = self.size.iter().map(|s| s * 0.5).collect();
        for (j, l) in lo.iter_mut().enumerate() {
            if quadrant >> j & 1 == 1 {
                *l += size[j];
            }
        }
        BoxD { lo, size }
    }
}

#[derive(Clone, Copy)]
struct DNode {
    cp: u32,
    cm: u32,
    kids: u32,
}

pub struct DualDTree {
    pub dim: usize,
    pub root: BoxD,
    pub levels: u32,
    nodes: Vec<DNode>,
    kid_blocks: Vec<u32>,
    pub point_count: u32,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Trace {
    pub confirmed: u32,
    pub band: u32,
}

/// A dual point with its side flag: `positive` points confirm when their box
/// is strictly above the query hyperplane, negative ones when below.
pub struct DualPoint {
    pub coords: Vec<f64>,
    pub positive: bool,
}

impl DualDTree {
    pub fn build(points: &[DualPoint], root: BoxD, levels: u32) -> DualDTree {
        debug_assert!(points.iter().all(|p| root.contains(&p.coords)), "dual point outside root box");
        let dim = root.lo.len();
        let mut tree = DualDTree {
            dim,
            root: root.clone(),
            levels,
            nodes: Vec::new(),
            kid_blocks: Vec::new(),
            point_count: points.len() as u32,
        };
        if !points.is_empty() {
            let idx: Vec<u32> = (0..points.len() as u32).collect();
            tree.build_rec(points, idx, &root, 0);
        }
        tree
    }

    fn build_rec(&mut self, points: &[DualPoint], idx: Vec<u32>, bx: &BoxD, level: u32) -> u32 {
        let me = self.nodes.len();
        let (mut cp, mut cm) = (0, 0);
        for &i in &idx {
            if points[i as usize].positive {
                cp += 1;
            } else {
                cm += 1;
            }
        }
        self.nodes.push(DNode {
            cp,
            cm,
            kids: NONE,
        });
        if level < self.levels {
            let nq = 1usize << self.dim;
            let mut parts: Vec<Vec<u32>> = vec![Vec::new(); nq];
            for i in idx {
                let p = &points[i as usize].coords;
                let mut q = 0usize;
                for j in 0..self.dim {
                    if p[j] >= bx.lo[j] + 0.5 * bx.size[j] {
                        q |= 1 << j;
                    }
                }
                parts[q].push(i);
            }
            let block = self.kid_blocks.len();
            let mut any = false;
            for part in parts.iter() {
                if !part.is_empty() {
                    any = true;
                }
            }
            if any {
                self.kid_blocks.extend(std::iter::repeat(NONE).take(nq));
                self.nodes[me].kids = block as u32;
                for (q, part) in parts.into_iter().enumerate() {
                    if part.is_empty() {
                        continue;
                    }
                    let child_box = bx.child(q);
                    let child = self.build_rec(points, part, &child_box, level + 1);
                    self.kid_blocks[block + q] = child;
                }
            }
        }
        me as u32
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Trace the query hyperplane given by local slope coefficients `s` and
    /// offset `t`: `x_d = s . x_bar - t`.
    pub fn trace(&self, s: &[f64], t: f64) -> Trace {
        let mut out = Trace::default();
        if self.nodes.is_empty() {
            return out;
        }
        match self.side(s, t, &self.root) {
            Side::Above => out.confirmed += self.nodes[0].cp,
            Side::Below => out.confirmed += self.nodes[0].cm,
            Side::Crossed => self.trace_rec(0, &self.root, 0, s, t, &mut out),
        }
        out
    }

    fn trace_rec(&self, node: usize, bx: &BoxD, level: u32, s: &[f64], t: f64, out: &mut Trace) {
        if level == self.levels {
            out.band += self.nodes[node].cp + self.nodes[node].cm;
            return;
        }
        let block = self.nodes[node].kids;
        if block == NONE {
            // points exist but no children were materialized (only possible
            // when levels == 0, handled above)
            return;
        }
        for q in 0..(1usize << self.dim) {
            let kid = self.kid_blocks[block as usize + q];
            if kid == NONE {
                continue;
            }
            let child_box = bx.child(q);
            match self.side(s, t, &child_box) {
                Side::Above => out.confirmed += self.nodes[kid as usize].cp,
                Side::Below => out.confirmed += self.nodes[kid as usize].cm,
                Side::Crossed => self.trace_rec(kid as usize, &child_box, level + 1, s, t, out),
            }
        }
    }

    fn side(&self, s: &[f64], t: f64, bx: &BoxD) -> Side {
        // g(eta) = eta_d - sum s_j eta_j + t over the box
        let d = self.dim;
        let mut min = bx.lo[d - 1] + t;
        let mut max = bx.lo[d - 1] + bx.size[d - 1] + t;
        for j in 0..d - 1 {
            let a = s[j] * bx.lo[j];
            let b = s[j] * (bx.lo[j] + bx.size[j]);
            min -= a.max(b);
            max -= a.min(b);
        }
        if min > 0.0 {
            Side::Above
        } else if max < 0.0 {
            Side::Below
        } else {
            Side::Crossed
        }
    }
}

enum Side {
    Above,
    Below,
    Crossed,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_dim_point_confirms_above() {
        let root = BoxD {
            lo: vec![-1.0, -1.0, -0.25],
            size: vec![2.0, 2.0, 0.5],
        };
        let pts = vec![DualPoint {
            coords: vec![0.3, -0.2, 0.1],
            positive: true,
        }];
        let tree = DualDTree::build(&pts, root, 6);
        assert_eq!(tree.node_count(), 7);
        // hyperplane x3 = -0.2 (s = 0): point above
        let t = tree.trace(&[0.0, 0.0], 0.2);
        assert_eq!(t, Trace { confirmed: 1, band: 0 });
        // hyperplane through the point: ends in the band
        let t = tree.trace(&[0.0, 0.0], -0.1);
        assert_eq!(t.band, 1);
        // hyperplane above the point: nothing confirmed
        let t = tree.trace(&[0.0, 0.0], -0.2);
        assert_eq!(t.confirmed, 0);
    }
}
