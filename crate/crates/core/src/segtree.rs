//! Segment tree over x-spans with canonical interval decomposition.
//!
//! Elementary slots alternate between recorded endpoint values and the open
//! gaps between them, so closed and half-open spans are distinguished
//! exactly. Each span is stored at the canonical set of nodes covering its
//! slot range; a stabbing query walks the root-to-slot path and reports every
//! node holding members, which together hold exactly the spans containing
//! the query abscissa.

pub struct SegmentTree {
    endpoints: Vec<f64>,
    size: usize,
    members: Vec<Vec<u32>>,
}

impl SegmentTree {
    /// Build from spans `(lo, hi, hi_open)` with `lo < hi`; member ids are
    /// the span indices.
    pub fn build(spans: &[(f64, f64, bool)]) -> SegmentTree {
        let mut endpoints: Vec<f64> = spans.iter().flat_map(|&(a, b, _)| [a, b]).collect();
        endpoints.sort_by(|a, b| a.partial_cmp(b).unwrap());
        endpoints.dedup();
        let size = if endpoints.is_empty() {
            0
        } else {
            2 * endpoints.len() - 1
        };
        let mut tree = SegmentTree {
            endpoints,
            size,
            members: vec![Vec::new(); if size == 0 { 0 } else { 4 * size }],
        };
        for (i, &(a, b, hi_open)) in spans.iter().enumerate() {
            debug_assert!(a < b);
            let lo = 2 * tree.rank(a);
            let hi = if hi_open {
                2 * tree.rank(b) - 1
            } else {
                2 * tree.rank(b)
            };
            tree.insert(1, 0, tree.size, lo, hi + 1, i as u32);
        }
        tree
    }

    fn rank(&self, x: f64) -> usize {
        self.endpoints
            .binary_search_by(|e| e.partial_cmp(&x).unwrap())
            .expect("span endpoint was recorded")
    }

    fn insert(&mut self, node: usize, l: usize, r: usize, a: usize, b: usize, id: u32) {
        if a >= r || b <= l {
            return;
        }
        if a <= l && r <= b {
            self.members[node].push(id);
            return;
        }
        let mid = (l + r) / 2;
        self.insert(2 * node, l, mid, a, b, id);
        self.insert(2 * node + 1, mid, r, a, b, id);
    }

    pub fn is_empty(&self) -> bool {
        self.size == 0
    }

    pub fn endpoint_count(&self) -> usize {
        self.endpoints.len()
    }

    /// Total stored member copies across nodes.
    pub fn member_copies(&self) -> usize {
        self.members.iter().map(|m| m.len()).sum()
    }

    /// Visit every node holding members: `(node id, member span ids)`.
    pub fn for_each_node(&self, f: &mut dyn FnMut(usize, &[u32])) {
        for (node, m) in self.members.iter().enumerate() {
            if !m.is_empty() {
                f(node, m);
            }
        }
    }

    /// Slot of the query abscissa, if it falls within the endpoint hull.
    fn slot(&self, x: f64) -> Option<usize> {
        if self.size == 0 {
            return None;
        }
        match self
            .endpoints
            .binary_search_by(|e| e.partial_cmp(&x).unwrap())
        {
            Ok(i) => Some(2 * i),
            Err(0) => None,
            Err(i) if i == self.endpoints.len() => None,
            Err(i) => Some(2 * i - 1),
        }
    }

    /// Visit the node ids on the path of `x` (whether or not they hold
    /// members).
    pub fn query(&self, x: f64, visit: &mut dyn FnMut(usize)) {
        let Some(slot) = self.slot(x) else { return };
        let (mut node, mut l, mut r) = (1usize, 0usize, self.size);
        loop {
            visit(node);
            if r - l == 1 {
                return;
            }
            let mid = (l + r) / 2;
            if slot < mid {
                node *= 2;
                r = mid;
            } else {
                node = 2 * node + 1;
                l = mid;
            }
        }
    }

    /// Spans containing `x`, resolved through the canonical decomposition.
    pub fn stab(&self, x: f64) -> Vec<u32> {
        let mut out = Vec::new();
        self.query(x, &mut |node| out.extend_from_slice(&self.members[node]));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn contains(span: (f64, f64, bool), x: f64) -> bool {
        x >= span.0 && if span.2 { x < span.1 } else { x <= span.1 }
    }

    #[test]
    fn half_open_boundaries_are_exact() {
        let spans = vec![(0.0, 0.5, true), (0.5, 1.0, false), (0.0, 1.0, false)];
        let t = SegmentTree::build(&spans);
        let mut got = t.stab(0.5);
        got.sort_unstable();
        assert_eq!(got, vec![1, 2]);
        let mut got = t.stab(0.25);
        got.sort_unstable();
        assert_eq!(got, vec![0, 2]);
        let mut got = t.stab(1.0);
        got.sort_unstable();
        assert_eq!(got, vec![1, 2]);
        assert!(t.stab(-0.1).is_empty());
        assert!(t.stab(1.1).is_empty());
    }

    proptest! {
        #[test]
        fn stabbing_matches_brute_force(
            raw in prop::collection::vec((0u8..200, 1u8..60, any::<bool>()), 1..40),
            qx in -10.0f64..260.0,
        ) {
            let spans: Vec<(f64, f64, bool)> = raw
                .iter()
                .map(|&(a, len, open)| (a as f64, a as f64 + len as f64, open))
                .collect();
            let t = SegmentTree::build(&spans);
            let mut got = t.stab(qx);
            got.sort_unstable();
            let want: Vec<u32> = spans
                .iter()
                .enumerate()
                .filter(|(_, s)| contains(**s, qx))
                .map(|(i, _)| i as u32)
                .collect();
            prop_assert_eq!(got, want);
            // integer query points hit recorded endpoints exactly
            let mut got = t.stab(raw[0].0 as f64);
            got.sort_unstable();
            let want: Vec<u32> = spans
                .iter()
                .enumerate()
                .filter(|(_, s)| contains(**s, raw[0].0 as f64))
                .map(|(i, _)| i as u32)
                .collect();
            prop_assert_eq!(got, want);
        }
    }
}
