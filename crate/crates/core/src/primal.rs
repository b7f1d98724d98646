//! The pruned `2^d`-ary primal tree over a cube, shared by every structure.
//!
//! Cells at each level tile the root cube and are pairwise disjoint
//! (half-open, outermost cells closed); the implementation never materializes
//! the open/closed flags, ties are resolved combinatorially by the descent
//! comparisons. Each node carries a containment counter `c(v)`: the number of
//! inserted objects that fully contain the node's cell while crossing the
//! parent cell. Objects containing the whole root cube are tallied in
//! `contain_all`. A node is expanded only when some object boundary crosses
//! its cell; bottom-level crossed cells get a leaf slot for caller-managed
//! payloads (crossing counters, dual trees).

/// Relation of an object to a cell, decided on the cell's closed hull.
/// `Contained` must guarantee every cell point is inside the object;
/// `Disjoint` must guarantee none is; everything else is `Crossed`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CellRel {
    Contained,
    Disjoint,
    Crossed,
}

/// Classify a closed halfspace `{x : sum coeffs*x + offset >= 0}` (or its
/// open variant) against the box `[lo, lo+side]^d`.
pub fn linear_cell_relation(coeffs: &[f64], offset: f64, lo: &[f64], side: f64, closed: bool) -> CellRel {
    let (mut min, mut max) = (offset, offset);
    for (c, l) in coeffs.iter().zip(lo) {
        let a = c * l;
        let b = c * (l + side);
        min += a.min(b);
        max += a.max(b);
    }
    if closed {
        if min >= 0.0 {
            CellRel::Contained
        } else if max < 0.0 {
            CellRel::Disjoint
        } else {
            CellRel::Crossed
        }
    } else if min > 0.0 {
        CellRel::Contained
    } else if max <= 0.0 {
        CellRel::Disjoint
    } else {
        CellRel::Crossed
    }
}

const NONE: u32 = u32::MAX;

#[derive(Clone, Copy)]
struct PNode {
    c: u32,
    kids: u32,
    leaf_slot: u32,
}

pub struct PrimalTree {
    pub dim: usize,
    pub root_lo: Vec<f64>,
    pub root_side: f64,
    pub levels: u32,
    nodes: Vec<PNode>,
    kid_blocks: Vec<u32>,
    pub contain_all: u32,
    leaf_slots: u32,
}

impl PrimalTree {
    pub fn new(root_lo: Vec<f64>, root_side: f64, levels: u32) -> Self {
        let dim = root_lo.len();
        PrimalTree {
            dim,
            root_lo,
            root_side,
            levels,
            nodes: vec![PNode {
                c: 0,
                kids: NONE,
                leaf_slot: NONE,
            }],
            kid_blocks: Vec::new(),
            contain_all: 0,
            leaf_slots: 0,
        }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn leaf_slot_count(&self) -> u32 {
        self.leaf_slots
    }

    pub fn cell_side(&self, level: u32) -> f64 {
        self.root_side / (1u64 << level) as f64
    }

    fn ensure_kids(&mut self, node: usize) -> usize {
        if self.nodes[node].kids == NONE {
            let start = self.kid_blocks.len();
            self.kid_blocks.extend(std::iter::repeat(NONE).take(1 << self.dim));
            self.nodes[node].kids = start as u32;
        }
        self.nodes[node].kids as usize
    }

    fn ensure_child(&mut self, node: usize, quadrant: usize) -> usize {
        let block = self.ensure_kids(node);
        if self.kid_blocks[block + quadrant] == NONE {
            let idx = self.nodes.len();
            self.nodes.push(PNode {
                c: 0,
                kids: NONE,
                leaf_slot: NONE,
            });
            self.kid_blocks[block + quadrant] = idx as u32;
        }
        self.kid_blocks[block + quadrant] as usize
    }

    /// Insert one object. `classify` relates it to a cell `(lo, side)`;
    /// `on_deep` is called for every bottom-level cell the object crosses,
    /// with that cell's leaf slot and lower corner.
    pub fn insert(
        &mut self,
        classify: &mut dyn FnMut(&[f64], f64) -> CellRel,
        on_deep: &mut dyn FnMut(u32, &[f64]),
    ) {
        let mut lo = self.root_lo.clone();
        let side = self.root_side;
        match classify(&lo, side) {
            CellRel::Contained => self.contain_all += 1,
            CellRel::Disjoint => {}
            CellRel::Crossed => self.insert_rec(0, &mut lo, side, 0, classify, on_deep),
        }
    }

    fn insert_rec(
        &mut self,
        node: usize,
        lo: &mut [f64],
        side: f64,
        level: u32,
        classify: &mut dyn FnMut(&[f64], f64) -> CellRel,
        on_deep: &mut dyn FnMut(u32, &[f64]),
    ) {
        if level == self.levels {
            if self.nodes[node].leaf_slot == NONE {
                self.nodes[node].leaf_slot = self.leaf_slots;
                self.leaf_slots += 1;
            }
            on_deep(self.nodes[node].leaf_slot, lo);
            return;
        }
        let half = side * 0.5;
        for quadrant in 0..(1usize << self.dim) {
            for j in 0..self.dim {
                if quadrant >> j & 1 == 1 {
                    lo[j] += half;
                }
            }
            match classify(lo, half) {
                CellRel::Contained => {
                    let child = self.ensure_child(node, quadrant);
                    self.nodes[child].c += 1;
                }
                CellRel::Crossed => {
                    let child = self.ensure_child(node, quadrant);
                    self.insert_rec(child, lo, half, level + 1, classify, on_deep);
                }
                CellRel::Disjoint => {}
            }
            for j in 0..self.dim {
                if quadrant >> j & 1 == 1 {
                    lo[j] -= half;
                }
            }
        }
    }

    /// Walk the path of `q`, accumulating containment counters. Returns the
    /// sum and, when the path reaches a bottom-level cell with a leaf slot,
    /// that slot with the leaf cell's lower corner. A path ending early (no
    /// boundary below) means the sum is the exact depth contribution.
    pub fn query_path(&self, q: &[f64]) -> (u32, Option<(u32, Vec<f64>)>) {
        debug_assert!(self.contains_root(q));
        let mut sum = self.contain_all;
        let mut node = 0usize;
        let mut lo = self.root_lo.clone();
        let mut side = self.root_side;
        for _ in 0..self.levels {
            let block = self.nodes[node].kids;
            if block == NONE {
                return (sum, None);
            }
            let half = side * 0.5;
            let mut quadrant = 0usize;
            for j in 0..self.dim {
                if q[j] >= lo[j] + half {
                    quadrant |= 1 << j;
                    lo[j] += half;
                }
            }
            let child = self.kid_blocks[block as usize + quadrant];
            if child == NONE {
                return (sum, None);
            }
            node = child as usize;
            sum += self.nodes[node].c;
            side = half;
        }
        let slot = self.nodes[node].leaf_slot;
        if slot == NONE {
            (sum, None)
        } else {
            (sum, Some((slot, lo)))
        }
    }

    pub fn contains_root(&self, q: &[f64]) -> bool {
        q.len() == self.dim
            && q.iter()
                .zip(&self.root_lo)
                .all(|(x, l)| *x >= *l && *x <= *l + self.root_side)
    }

    /// Visit every childless node: `(lo, side, level, path_sum, leaf_slot)`.
    /// Path sums only grow along existing paths, so maxima over childless
    /// nodes are maxima over all cells.
    pub fn for_each_terminal(&self, visit: &mut dyn FnMut(&[f64], f64, u32, u32, Option<u32>)) {
        let mut lo = self.root_lo.clone();
        self.terminal_rec(0, &mut lo, self.root_side, 0, self.contain_all, visit);
    }

    fn terminal_rec(
        &self,
        node: usize,
        lo: &mut [f64],
        side: f64,
        level: u32,
        sum: u32,
        visit: &mut dyn FnMut(&[f64], f64, u32, u32, Option<u32>),
    ) {
        let block = self.nodes[node].kids;
        if block == NONE {
            let slot = self.nodes[node].leaf_slot;
            visit(lo, side, level, sum, if slot == NONE { None } else { Some(slot) });
            return;
        }
        let half = side * 0.5;
        for quadrant in 0..(1usize << self.dim) {
            let child = self.kid_blocks[block as usize + quadrant];
            if child == NONE {
                continue;
            }
            for j in 0..self.dim {
                if quadrant >> j & 1 == 1 {
                    lo[j] += half;
                }
            }
            let child = child as usize;
            self.terminal_rec(child, lo, half, level + 1, sum + self.nodes[child].c, visit);
            for j in 0..self.dim {
                if quadrant >> j & 1 == 1 {
                    lo[j] -= half;
                }
            }
        }
    }

    /// Test hook: corrupt one containment counter.
    #[doc(hidden)]
    pub fn corrupt_for_testing(&mut self) {
        self.contain_all += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn halfplane_classify(coeffs: [f64; 2], offset: f64) -> impl FnMut(&[f64], f64) -> CellRel {
        move |lo, side| linear_cell_relation(&coeffs, offset, lo, side, true)
    }

    #[test]
    fn contain_all_counts_at_root() {
        let mut t = PrimalTree::new(vec![0.0, 0.0], 1.0, 4);
        // y >= -1 contains the unit square
        let mut c = halfplane_classify([0.0, 1.0], 1.0);
        t.insert(&mut c, &mut |_, _| {});
        assert_eq!(t.contain_all, 1);
        assert_eq!(t.node_count(), 1);
        let (sum, leaf) = t.query_path(&[0.3, 0.9]);
        assert_eq!(sum, 1);
        assert!(leaf.is_none());
    }

    #[test]
    fn crossing_line_creates_deep_leaves() {
        let mut t = PrimalTree::new(vec![0.0, 0.0], 1.0, 3);
        // y >= 0.5: horizontal boundary through the middle
        let mut crossings = 0u32;
        t.insert(
            &mut halfplane_classify([0.0, 1.0], -0.5),
            &mut |_, lo| {
                crossings += 1;
                assert!((lo[1] - (0.5 - 0.125)).abs() < 1e-12);
            },
        );
        // the line lies on a cell boundary: only the row below is crossed
        assert_eq!(crossings, 8);
        // points above the line have depth 1, below 0
        let (sum, _) = t.query_path(&[0.3, 0.9]);
        assert_eq!(sum, 1);
        let (sum, _) = t.query_path(&[0.3, 0.1]);
        assert_eq!(sum, 0);
        // a point on the boundary walks into the contained row
        let (sum, _) = t.query_path(&[0.3, 0.5]);
        assert_eq!(sum, 1);
    }

    #[test]
    fn each_object_counts_once_per_path() {
        let mut t = PrimalTree::new(vec![0.0, 0.0], 1.0, 5);
        let mut leaf_hits: Vec<(u32, Vec<f64>)> = Vec::new();
        t.insert(
            &mut halfplane_classify([-0.25, 1.0], -0.3), // y >= 0.25x + 0.3
            &mut |slot, lo| leaf_hits.push((slot, lo.to_vec())),
        );
        // along any query path the object contributes to at most one counter
        for &q in &[[0.1, 0.9], [0.9, 0.1], [0.5, 0.42]] {
            let (sum, leaf) = t.query_path(&q);
            let inside = q[1] >= 0.25 * q[0] + 0.3;
            if leaf.is_none() {
                assert_eq!(sum, u32::from(inside), "exact when off the boundary, q={q:?}");
            } else {
                assert!(sum <= u32::from(inside));
            }
        }
    }
}
