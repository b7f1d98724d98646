//! The baseline primal-only tree: a pruned `2^d`-ary subdivision of the unit
//! cube refined until cell diameter is at most `epsilon`, with containment
//! counters on nodes and boundary-crossing counters `b(v)` on bottom-level
//! leaves. Queries sum counters along the path; a path ending at a shallow
//! leaf yields the exact depth.

use crate::error::{Error, Result};
use crate::estimate::DepthEstimate;
use crate::geom2::Halfplane;
use crate::geomd::HyperplaneD;
use crate::primal::{linear_cell_relation, PrimalTree};

pub struct NaiveTree {
    pub dim: usize,
    pub epsilon: f64,
    pub levels: u32,
    primal: PrimalTree,
    band: Vec<u32>,
    n: usize,
}

/// Linear form `coeffs . x + offset >= 0` describing a halfspace.
struct LinearForm {
    coeffs: Vec<f64>,
    offset: f64,
}

impl LinearForm {
    fn of_halfplane(h: &Halfplane) -> LinearForm {
        let s = if h.upper { 1.0 } else { -1.0 };
        LinearForm {
            coeffs: vec![-s * h.line.slope, s],
            offset: -s * h.line.intercept,
        }
    }

    fn of_hyperplane(h: &HyperplaneD) -> LinearForm {
        let d = h.eta.len();
        let s = if h.above { 1.0 } else { -1.0 };
        let mut coeffs: Vec<f64> = h.eta[..d - 1].iter().map(|e| -s * e).collect();
        coeffs.push(s);
        LinearForm {
            coeffs,
            offset: s * h.eta[d - 1],
        }
    }
}

impl NaiveTree {
    pub fn build_halfplanes(objects: &[Halfplane], epsilon: f64) -> Result<NaiveTree> {
        Self::build(
            objects.iter().map(LinearForm::of_halfplane).collect(),
            2,
            epsilon,
        )
    }

    pub fn build_halfspaces(objects: &[HyperplaneD], dim: usize, epsilon: f64) -> Result<NaiveTree> {
        for h in objects {
            if h.eta.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: h.eta.len(),
                });
            }
        }
        Self::build(
            objects.iter().map(LinearForm::of_hyperplane).collect(),
            dim,
            epsilon,
        )
    }

    fn build(forms: Vec<LinearForm>, dim: usize, epsilon: f64) -> Result<NaiveTree> {
        if !(epsilon > 0.0 && epsilon <= 1.0) {
            return Err(Error::param("epsilon", format!("must be in (0, 1], got {epsilon}")));
        }
        // cell diameter sqrt(d) * 2^-k <= epsilon
        let levels = ((dim as f64).sqrt() / epsilon).log2().ceil().max(1.0) as u32;
        let mut primal = PrimalTree::new(vec![0.0; dim], 1.0, levels);
        let mut band: Vec<u32> = Vec::new();
        let n = forms.len();
        for f in &forms {
            primal.insert(
                &mut |lo, side| linear_cell_relation(&f.coeffs, f.offset, lo, side, true),
                &mut |slot, _| {
                    let slot = slot as usize;
                    if slot == band.len() {
                        band.push(0);
                    }
                    band[slot] += 1;
                },
            );
        }
        Ok(NaiveTree {
            dim,
            epsilon,
            levels,
            primal,
            band,
            n,
        })
    }

    pub fn query(&self, q: &[f64]) -> Result<DepthEstimate> {
        if q.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: q.len(),
            });
        }
        if !self.primal.contains_root(q) {
            return Err(Error::OutOfDomain);
        }
        let (sum, leaf) = self.primal.query_path(q);
        let b = leaf.map_or(0, |(slot, _)| self.band[slot as usize]);
        Ok(DepthEstimate::new(sum, sum + b))
    }

    /// Deepest cells by underestimate and by overestimate, each reported as
    /// the cell center (first maximum in canonical traversal order).
    pub fn max_depth(&self) -> MaxLeaves {
        let mut best_minus: (u32, Vec<f64>) = (0, center_of(&self.primal.root_lo, self.primal.root_side));
        let mut best_plus = best_minus.clone();
        let mut first = true;
        self.primal.for_each_terminal(&mut |lo, side, _level, sum, slot| {
            let b = slot.map_or(0, |s| self.band[s as usize]);
            let center = center_of(lo, side);
            if first {
                best_minus = (sum, center.clone());
                best_plus = (sum + b, center.clone());
                first = false;
                return;
            }
            if sum > best_minus.0 {
                best_minus = (sum, center.clone());
            }
            if sum + b > best_plus.0 {
                best_plus = (sum + b, center);
            }
        });
        MaxLeaves {
            q_minus: best_minus.1,
            d_minus: best_minus.0,
            q_plus: best_plus.1,
            d_plus: best_plus.0,
        }
    }

    pub fn node_count(&self) -> usize {
        self.primal.node_count()
    }

    pub fn band_total(&self) -> u64 {
        self.band.iter().map(|&b| b as u64).sum()
    }

    pub fn object_count(&self) -> usize {
        self.n
    }

    #[doc(hidden)]
    pub fn corrupt_for_testing(&mut self) {
        self.primal.corrupt_for_testing();
    }
}

fn center_of(lo: &[f64], side: f64) -> Vec<f64> {
    lo.iter().map(|l| l + side * 0.5).collect()
}

/// Result of enumerating the leaves for maximum depth.
#[derive(Clone, Debug)]
pub struct MaxLeaves {
    pub q_minus: Vec<f64>,
    pub d_minus: u32,
    pub q_plus: Vec<f64>,
    pub d_plus: u32,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom2::Line2;

    #[test]
    fn empty_scene_single_root() {
        let t = NaiveTree::build_halfplanes(&[], 0.25).unwrap();
        assert_eq!(t.node_count(), 1);
        let e = t.query(&[0.4, 0.6]).unwrap();
        assert_eq!(e, DepthEstimate::ZERO);
        let m = t.max_depth();
        assert_eq!((m.d_minus, m.d_plus), (0, 0));
        assert_eq!(m.q_minus, vec![0.5, 0.5]);
    }

    #[test]
    fn containing_halfplane_counts_at_root() {
        let t = NaiveTree::build_halfplanes(&[Halfplane::upper(Line2::new(0.0, -1.0))], 0.5).unwrap();
        for &q in &[[0.0, 0.0], [1.0, 1.0], [0.3, 0.8]] {
            let e = t.query(&q).unwrap();
            assert_eq!((e.d_minus, e.d_plus), (1, 1));
        }
    }

    #[test]
    fn identical_halfplanes_stack() {
        let hs = vec![Halfplane::upper(Line2::new(0.0, -2.0)); 7];
        let t = NaiveTree::build_halfplanes(&hs, 0.25).unwrap();
        let m = t.max_depth();
        assert_eq!((m.d_minus, m.d_plus), (7, 7));
    }

    #[test]
    fn crossed_cell_band_counts_match_direct_enumeration() {
        // one horizontal boundary y = 0.5, epsilon = 2^-4
        let h = Halfplane::upper(Line2::new(0.0, 0.5));
        let eps = 2f64.powi(-4);
        let t = NaiveTree::build_halfplanes(&[h], eps).unwrap();
        assert_eq!(t.levels, 5);
        // independent count over the 32x32 grid of bottom cells
        let cells = 1 << t.levels;
        let side = 1.0 / cells as f64;
        let mut crossed = 0u64;
        for i in 0..cells {
            for j in 0..cells {
                let lo = [i as f64 * side, j as f64 * side];
                let g_min = lo[1] - 0.5;
                let g_max = lo[1] + side - 0.5;
                if g_min < 0.0 && g_max >= 0.0 {
                    crossed += 1;
                }
            }
        }
        assert_eq!(crossed, 32);
        assert_eq!(t.band_total(), crossed);
    }

    #[test]
    fn three_dim_halfspace() {
        let h = HyperplaneD {
            eta: vec![0.2, -0.1, -0.4], // x3 = 0.2x1 - 0.1x2 + 0.4
            above: true,
        };
        let t = NaiveTree::build_halfspaces(&[h.clone()], 3, 0.125).unwrap();
        let inside = [0.5, 0.5, 0.9];
        let outside = [0.5, 0.5, 0.1];
        assert!(h.contains(&inside));
        assert_eq!(t.query(&inside).unwrap(), DepthEstimate::new(1, 1));
        assert_eq!(t.query(&outside).unwrap(), DepthEstimate::ZERO);
    }
}
