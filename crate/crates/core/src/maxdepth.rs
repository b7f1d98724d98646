//! Approximate maximum depth by querying the centers of a grid with cell
//! side `epsilon / (2 sqrt(d))`: any point of the cube is then within
//! `epsilon/4` of some center, which turns the per-query guarantees into
//! maximum-depth guarantees.

use crate::error::{Error, Result};
use crate::estimate::DepthEstimate;

/// Read-only depth structure over the unit cube.
pub trait DepthStructure {
    fn dimension(&self) -> usize;
    fn epsilon(&self) -> f64;
    fn query(&self, q: &[f64]) -> Result<DepthEstimate>;
}

#[derive(Clone, Debug)]
pub struct MaxDepthResult {
    pub q_minus: Vec<f64>,
    pub d_minus: u32,
    pub q_plus: Vec<f64>,
    pub d_plus: u32,
    pub queries: u64,
}

/// Cells per axis for the maximum-depth grid: the side is `epsilon/(2
/// sqrt(d))` rounded down so an integer number of cells tiles the cube.
pub fn grid_cells_per_axis(epsilon: f64, dim: usize) -> Result<usize> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::param("epsilon", format!("must be in (0, 1], got {epsilon}")));
    }
    Ok((2.0 * (dim as f64).sqrt() / epsilon).ceil() as usize)
}

/// Stream of grid cell centers in row-major order (first axis fastest).
pub fn grid_centers(epsilon: f64, dim: usize) -> Result<impl Iterator<Item = Vec<f64>>> {
    let cells = grid_cells_per_axis(epsilon, dim)?;
    let mut idx = vec![0usize; dim];
    let mut done = false;
    Ok(std::iter::from_fn(move || {
        if done {
            return None;
        }
        let center: Vec<f64> = idx
            .iter()
            .map(|&i| (2 * i + 1) as f64 / (2 * cells) as f64)
            .collect();
        // odometer increment, first axis fastest
        let mut j = 0;
        loop {
            if j == idx.len() {
                done = true;
                break;
            }
            idx[j] += 1;
            if idx[j] < cells {
                break;
            }
            idx[j] = 0;
            j += 1;
        }
        Some(center)
    }))
}

/// Query every grid center and report the maximizers of the underestimate
/// and of the overestimate (possibly different points). Ties are broken by
/// stream order, so the result is deterministic.
pub fn approx_max_depth<S: DepthStructure + ?Sized>(structure: &S) -> Result<MaxDepthResult> {
    let dim = structure.dimension();
    let eps = structure.epsilon();
    let mut best: Option<MaxDepthResult> = None;
    let mut queries = 0u64;
    for center in grid_centers(eps, dim)? {
        let est = structure.query(&center)?;
        queries += 1;
        match &mut best {
            None => {
                best = Some(MaxDepthResult {
                    q_minus: center.clone(),
                    d_minus: est.d_minus,
                    q_plus: center,
                    d_plus: est.d_plus,
                    queries: 0,
                })
            }
            Some(b) => {
                if est.d_minus > b.d_minus {
                    b.d_minus = est.d_minus;
                    b.q_minus = center.clone();
                }
                if est.d_plus > b.d_plus {
                    b.d_plus = est.d_plus;
                    b.q_plus = center;
                }
            }
        }
    }
    let mut out = best.expect("grid always has at least one center");
    out.queries = queries;
    Ok(out)
}

impl DepthStructure for crate::naive::NaiveTree {
    fn dimension(&self) -> usize {
        self.dim
    }
    fn epsilon(&self) -> f64 {
        self.epsilon
    }
    fn query(&self, q: &[f64]) -> Result<DepthEstimate> {
        crate::naive::NaiveTree::query(self, q)
    }
}

impl DepthStructure for crate::pd::PdStructure {
    fn dimension(&self) -> usize {
        2
    }
    fn epsilon(&self) -> f64 {
        crate::pd::PdStructure::epsilon(self)
    }
    fn query(&self, q: &[f64]) -> Result<DepthEstimate> {
        if q.len() != 2 {
            return Err(Error::DimensionMismatch { expected: 2, got: q.len() });
        }
        crate::pd::PdStructure::query(self, crate::geom2::Point2::new(q[0], q[1]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom2::{Halfplane, Line2};
    use crate::naive::NaiveTree;

    #[test]
    fn grid_counts() {
        // eps = 1, d = 2: ceil(2*sqrt(2)) = 3 cells per axis
        assert_eq!(grid_cells_per_axis(1.0, 2).unwrap(), 3);
        assert_eq!(grid_centers(1.0, 2).unwrap().count(), 9);
        // eps = 0.5, d = 2: 6 per axis, centers at odd multiples of 1/12
        assert_eq!(grid_cells_per_axis(0.5, 2).unwrap(), 6);
        let centers: Vec<Vec<f64>> = grid_centers(0.5, 2).unwrap().collect();
        assert_eq!(centers.len(), 36);
        for c in &centers {
            for &x in c {
                let k = (x * 12.0).round() as i64;
                assert!((x - k as f64 / 12.0).abs() < 1e-12);
                assert_eq!(k % 2, 1);
            }
        }
        // every point of the cube is within eps/4 of some center
        let eps = 0.5;
        let q = [0.493, 0.761];
        let best = grid_centers(eps, 2)
            .unwrap()
            .map(|c| ((c[0] - q[0]).powi(2) + (c[1] - q[1]).powi(2)).sqrt())
            .fold(f64::INFINITY, f64::min);
        assert!(best <= eps / 4.0 + 1e-12);
    }

    #[test]
    fn containing_halfplanes_reach_full_depth() {
        let hs = vec![Halfplane::upper(Line2::new(0.0, -2.0)); 5];
        let t = NaiveTree::build_halfplanes(&hs, 0.25).unwrap();
        let r = approx_max_depth(&t).unwrap();
        assert_eq!(r.d_minus, 5);
        assert_eq!(r.d_plus, 5);
    }

    #[test]
    fn empty_scene_is_zero() {
        let t = NaiveTree::build_halfplanes(&[], 0.5).unwrap();
        let r = approx_max_depth(&t).unwrap();
        assert_eq!((r.d_minus, r.d_plus), (0, 0));
        assert!(r.queries > 0);
    }
}
