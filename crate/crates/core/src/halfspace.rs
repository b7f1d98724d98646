//! Depth structure for halfspaces in `R^d`: inward normals are partitioned
//! into caps, each cap's halfspaces are rotated so their normals sit near
//! the north pole, a primal tree over a box covering the rotated unit cube
//! carries containment counters, and bottom-level leaves own dual trees over
//! the points dual to the crossing boundary hyperplanes.

use crate::duald::{BoxD, DualDTree, DualPoint};
use crate::error::{Error, Result};
use crate::estimate::DepthEstimate;
use crate::geomd::{dot, CapFamily, HyperplaneD, RotationD};
use crate::maxdepth::DepthStructure;
use crate::params::Params;
use crate::pd::Fate;
use crate::primal::{linear_cell_relation, CellRel, PrimalTree};

pub struct HalfspaceStructure {
    pub dim: usize,
    pub params: Params,
    epsilon_requested: f64,
    cap_family: CapFamily,
    caps: Vec<Option<CapStructure>>,
    /// cap id and index within the cap, per original object
    placement: Vec<(usize, usize)>,
    n: usize,
}

struct CapStructure {
    rotation: RotationD,
    shift: Vec<f64>,
    primal: PrimalTree,
    leaves: Vec<LeafDual>,
    rotated: Vec<HyperplaneD>,
    dual_levels: u32,
}

struct LeafDual {
    corner: Vec<f64>,
    tree: DualDTree,
    points_ok: bool,
}

/// Root box side: the rotated unit cube fits in a ball of radius
/// `sqrt(d)/2`, so a power-of-two box of at least that diameter centered on
/// the image of the cube center covers every rotation.
fn root_side(dim: usize) -> f64 {
    let mut s = 1.0f64;
    while s < (dim as f64).sqrt() {
        s *= 2.0;
    }
    s
}

impl HalfspaceStructure {
    pub fn build(
        objects: &[HyperplaneD],
        dim: usize,
        params: Params,
        epsilon_requested: f64,
        cap_grid: Option<usize>,
    ) -> Result<HalfspaceStructure> {
        for h in objects {
            if h.eta.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: h.eta.len(),
                });
            }
        }
        let cap_family = match cap_grid {
            Some(g) => CapFamily::with_grid(dim, g)?,
            None => CapFamily::new(dim)?,
        };
        let mut members: Vec<Vec<u32>> = vec![Vec::new(); cap_family.len()];
        let mut placement = vec![(0usize, 0usize); objects.len()];
        for (i, h) in objects.iter().enumerate() {
            let normal = h.inward_normal();
            if !normal.iter().all(|x| x.is_finite()) {
                return Err(Error::InvalidScene("degenerate halfspace normal".into()));
            }
            let cap = cap_family.assign(&normal);
            debug_assert!(cap_family.assignment_angle(&normal) <= cap_family.phi + 1e-9);
            placement[i] = (cap, members[cap].len());
            members[cap].push(i as u32);
        }
        let mut caps: Vec<Option<CapStructure>> = Vec::with_capacity(cap_family.len());
        for (cap_id, ids) in members.iter().enumerate() {
            if ids.is_empty() {
                caps.push(None);
                continue;
            }
            caps.push(Some(CapStructure::build(
                &cap_family.caps()[cap_id].rotation,
                dim,
                &params,
                ids.iter().map(|&i| &objects[i as usize]),
            )?));
        }
        Ok(HalfspaceStructure {
            dim,
            params,
            epsilon_requested,
            cap_family,
            caps,
            placement,
            n: objects.len(),
        })
    }

    pub fn query(&self, q: &[f64]) -> Result<DepthEstimate> {
        if q.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: q.len(),
            });
        }
        if q.iter().any(|x| !(0.0..=1.0).contains(x)) {
            return Err(Error::OutOfDomain);
        }
        let mut total = DepthEstimate::ZERO;
        for cap in self.caps.iter().flatten() {
            total = total.merge(cap.query(q));
        }
        debug_assert!(total.d_plus as usize <= self.n);
        Ok(total)
    }

    /// Replay the counting decision for one object.
    pub fn explain(&self, q: &[f64], obj: usize) -> Fate {
        let (cap_id, local) = self.placement[obj];
        self.caps[cap_id]
            .as_ref()
            .expect("object's cap exists")
            .explain(q, local)
    }

    pub fn primal_node_count(&self) -> usize {
        self.caps
            .iter()
            .flatten()
            .map(|c| c.primal.node_count())
            .sum()
    }

    pub fn dual_node_count(&self) -> usize {
        self.caps
            .iter()
            .flatten()
            .flat_map(|c| c.leaves.iter())
            .map(|l| l.tree.node_count())
            .sum()
    }

    pub fn dual_points_in_boxes(&self) -> bool {
        self.caps.iter().flatten().all(|c| c.leaves.iter().all(|l| l.points_ok))
    }

    pub fn cap_count(&self) -> usize {
        self.cap_family.len()
    }

    pub fn occupied_caps(&self) -> usize {
        self.caps.iter().flatten().count()
    }

    #[doc(hidden)]
    pub fn corrupt_for_testing(&mut self) {
        if let Some(cap) = self.caps.iter_mut().flatten().next() {
            cap.primal.corrupt_for_testing();
        }
    }
}

impl CapStructure {
    fn build<'a>(
        rotation: &RotationD,
        dim: usize,
        params: &Params,
        objects: impl Iterator<Item = &'a HyperplaneD>,
    ) -> Result<CapStructure> {
        let side = root_side(dim);
        let shift = vec![side * 0.5; dim];
        let rotation = rotation.clone();
        let rotated: Vec<HyperplaneD> = objects
            .map(|h| rotate_hyperplane(h, &rotation, &shift))
            .collect::<Result<_>>()?;
        let levels = (side / params.delta1).log2().round() as u32;
        let mut primal = PrimalTree::new(vec![0.0; dim], side, levels);
        let mut leaf_members: Vec<(Vec<f64>, Vec<u32>)> = Vec::new();
        for (i, h) in rotated.iter().enumerate() {
            let d = h.eta.len();
            let mut coeffs: Vec<f64> = h.eta[..d - 1].iter().map(|e| -e).collect();
            coeffs.push(1.0);
            let offset = h.eta[d - 1];
            primal.insert(
                &mut |lo, cside| linear_cell_relation(&coeffs, offset, lo, cside, true),
                &mut |slot, lo| {
                    let slot = slot as usize;
                    if slot == leaf_members.len() {
                        leaf_members.push((lo.to_vec(), Vec::new()));
                    }
                    leaf_members[slot].1.push(i as u32);
                },
            );
        }
        let tan_phi = 1.0 / ((dim - 1) as f64).sqrt();
        let dual_levels = {
            // leaf reach (3*delta1 + delta1 * (d-1) * 2 tan(phi)) / 2^k <= (3/4) eps
            let need = params.delta1 * (3.0 + 2.0 * ((dim - 1) as f64).sqrt() * tan_phi)
                / (0.75 * params.epsilon);
            need.log2().ceil().max(0.0) as u32
        };
        let leaves = leaf_members
            .into_iter()
            .map(|(corner, ids)| {
                LeafDual::build(&corner, &ids, &rotated, params.delta1, tan_phi, dual_levels)
            })
            .collect();
        Ok(CapStructure {
            rotation,
            shift,
            primal,
            leaves,
            rotated,
            dual_levels,
        })
    }

    fn rotate_query(&self, q: &[f64]) -> Vec<f64> {
        let local: Vec<f64> = q.iter().map(|x| x - 0.5).collect();
        let mut out = self.rotation.apply(&local);
        for (o, s) in out.iter_mut().zip(&self.shift) {
            *o += s;
        }
        out
    }

    fn query(&self, q: &[f64]) -> DepthEstimate {
        let y = self.rotate_query(q);
        let (sum, leaf) = self.primal.query_path(&y);
        let mut est = DepthEstimate::new(sum, sum);
        if let Some((slot, corner)) = leaf {
            let leaf = &self.leaves[slot as usize];
            debug_assert_eq!(&leaf.corner, &corner);
            let d = y.len();
            let s: Vec<f64> = (0..d - 1).map(|k| y[k] - corner[k]).collect();
            let t = y[d - 1] - corner[d - 1];
            let tr = leaf.tree.trace(&s, t);
            est.d_minus += tr.confirmed;
            est.d_plus += tr.confirmed + tr.band;
        }
        est
    }

    fn explain(&self, q: &[f64], local: usize) -> Fate {
        let h = &self.rotated[local];
        let y = self.rotate_query(q);
        let d = y.len();
        let mut coeffs: Vec<f64> = h.eta[..d - 1].iter().map(|e| -e).collect();
        coeffs.push(1.0);
        let offset = h.eta[d - 1];
        let mut lo = vec![0.0; d];
        let mut side = self.primal.root_side;
        for level in 0..=self.primal.levels {
            match linear_cell_relation(&coeffs, offset, &lo, side, true) {
                CellRel::Contained => return Fate::DMinus,
                CellRel::Disjoint => return Fate::NotCounted,
                CellRel::Crossed => {}
            }
            if level == self.primal.levels {
                break;
            }
            let half = side * 0.5;
            for j in 0..d {
                if y[j] >= lo[j] + half {
                    lo[j] += half;
                }
            }
            side = half;
        }
        // dual phase
        let delta1 = side;
        let tan_phi = 1.0 / ((d - 1) as f64).sqrt();
        let p = shifted_dual(h, &lo);
        let s: Vec<f64> = (0..d - 1).map(|k| y[k] - lo[k]).collect();
        let t = y[d - 1] - lo[d - 1];
        let mut bx = dual_root_box(d, delta1, tan_phi);
        for level in 0..=self.dual_levels {
            // side of the box containing p against the query hyperplane
            let mut min = bx.lo[d - 1] + t;
            let mut max = bx.lo[d - 1] + bx.size[d - 1] + t;
            for k in 0..d - 1 {
                let a = s[k] * bx.lo[k];
                let b = s[k] * (bx.lo[k] + bx.size[k]);
                min -= a.max(b);
                max -= a.min(b);
            }
            if min > 0.0 {
                return Fate::DMinus;
            }
            if max < 0.0 {
                return Fate::NotCounted;
            }
            if level == self.dual_levels {
                return Fate::DPlusOnly;
            }
            // descend to the child box containing p
            let mut lo2 = bx.lo.clone();
            let size2: Vec<f64> = bx.size.iter().map(|v| v * 0.5).collect();
            for j in 0..d {
                if p[j] >= bx.lo[j] + size2[j] {
                    lo2[j] += size2[j];
                }
            }
            bx = BoxD { lo: lo2, size: size2 };
        }
        unreachable!()
    }
}

impl LeafDual {
    fn build(
        corner: &[f64],
        ids: &[u32],
        rotated: &[HyperplaneD],
        delta1: f64,
        tan_phi: f64,
        dual_levels: u32,
    ) -> LeafDual {
        let d = corner.len();
        let bx = dual_root_box(d, delta1, tan_phi);
        let mut ok = true;
        let points: Vec<DualPoint> = ids
            .iter()
            .map(|&i| {
                let coords = shifted_dual(&rotated[i as usize], corner);
                ok &= bx.contains(&coords);
                DualPoint {
                    coords,
                    positive: true,
                }
            })
            .collect();
        debug_assert!(ok, "dual point escaped its root box");
        LeafDual {
            corner: corner.to_vec(),
            tree: DualDTree::build(&points, bx, dual_levels),
            points_ok: ok,
        }
    }
}

fn dual_root_box(d: usize, delta1: f64, tan_phi: f64) -> BoxD {
    let mut lo = vec![-tan_phi; d];
    let mut size = vec![2.0 * tan_phi; d];
    lo[d - 1] = -2.0 * delta1;
    size[d - 1] = 3.0 * delta1;
    BoxD { lo, size }
}

/// Dual point of a rotated boundary hyperplane in the frame translated to a
/// leaf corner.
fn shifted_dual(h: &HyperplaneD, corner: &[f64]) -> Vec<f64> {
    let d = h.eta.len();
    let mut p = h.eta.clone();
    p[d - 1] = h.eta[d - 1] - dot(&h.eta[..d - 1], &corner[..d - 1]) + corner[d - 1];
    p
}

/// Rewrite a halfspace in the rotated-and-shifted frame `y = R(x - c) + t`;
/// the result is always an upper (`above`) halfspace since rotated inward
/// normals point near the north pole.
fn rotate_hyperplane(h: &HyperplaneD, rotation: &RotationD, shift: &[f64]) -> Result<HyperplaneD> {
    let d = h.eta.len();
    let normal = h.inward_normal();
    // h = { n . x >= b }
    let b = {
        let s = if h.above { 1.0 } else { -1.0 };
        let unnorm_len = (1.0 + h.eta[..d - 1].iter().map(|e| e * e).sum::<f64>()).sqrt();
        // for unit inward normal: b = (s * -eta_d) / unnorm_len
        -s * h.eta[d - 1] / unnorm_len
    };
    let n2 = rotation.apply(&normal);
    let b2 = b - normal.iter().map(|x| x * 0.5).sum::<f64>() + dot(&n2, shift);
    let nd = n2[d - 1];
    if nd <= 0.0 {
        return Err(Error::InvalidScene(
            "cap rotation failed to move the normal to the pole".into(),
        ));
    }
    let mut eta: Vec<f64> = n2[..d - 1].iter().map(|x| -x / nd).collect();
    eta.push(-b2 / nd);
    Ok(HyperplaneD { eta, above: true })
}

impl DepthStructure for HalfspaceStructure {
    fn dimension(&self) -> usize {
        self.dim
    }
    fn epsilon(&self) -> f64 {
        self.epsilon_requested
    }
    fn query(&self, q: &[f64]) -> Result<DepthEstimate> {
        HalfspaceStructure::query(self, q)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;
    use crate::params::choose_parameters_d;
    use crate::scene::{generate_scene, Family, Objects};

    fn build(objs: &[HyperplaneD], dim: usize, eps: f64, m: usize) -> HalfspaceStructure {
        let p = choose_parameters_d(objs.len(), m, eps, dim, 1.0).unwrap();
        HalfspaceStructure::build(objs, dim, p, eps, None).unwrap()
    }

    #[test]
    fn empty_scene() {
        let st = build(&[], 3, 0.05, 10);
        assert_eq!(st.query(&[0.2, 0.5, 0.9]).unwrap(), DepthEstimate::ZERO);
    }

    #[test]
    fn containing_halfspace_counts_everywhere() {
        // x3 >= -1 contains the cube
        let h = HyperplaneD {
            eta: vec![0.0, 0.0, 1.0],
            above: true,
        };
        let st = build(&[h], 3, 0.1, 10);
        for &q in &[[0.0, 0.0, 0.0], [1.0, 1.0, 1.0], [0.3, 0.6, 0.2]] {
            assert_eq!(st.query(&q).unwrap(), DepthEstimate::new(1, 1));
        }
    }

    #[test]
    fn sandwich_against_oracle() {
        for &dim in &[2usize, 3, 4] {
            for seed in 0..6u64 {
                let scene = generate_scene(Family::Halfspaces, 25, 400 + seed, "uniform", dim).unwrap();
                let Objects::Halfspaces(objs) = &scene.objects else { unreachable!() };
                let eps = 0.05;
                let st = build(objs, dim, eps, 40);
                for k in 0..40 {
                    let q: Vec<f64> = (0..dim)
                        .map(|j| ((k * 7 + j * 13) as f64 * 0.0923) % 1.0)
                        .collect();
                    let est = st.query(&q).unwrap();
                    let exact = oracle::exact_depth(&scene, &q).unwrap();
                    let inner = oracle::inner_eps_depth(&scene, &q, eps).unwrap();
                    let outer = oracle::outer_eps_depth(&scene, &q, eps).unwrap();
                    assert!(inner <= est.d_minus, "dim {dim} seed {seed} q {q:?}");
                    assert!(est.d_minus <= exact);
                    assert!(exact <= est.d_plus);
                    assert!(est.d_plus <= outer, "dim {dim} seed {seed} q {q:?}");
                }
                assert!(st.dual_points_in_boxes());
            }
        }
    }

    #[test]
    fn explain_matches_query_counts() {
        let scene = generate_scene(Family::Halfspaces, 30, 77, "peak-noise", 3).unwrap();
        let Objects::Halfspaces(objs) = &scene.objects else { unreachable!() };
        let st = build(objs, 3, 0.05, 25);
        for k in 0..25 {
            let q: Vec<f64> = (0..3).map(|j| ((k * 11 + j * 5) as f64 * 0.117) % 1.0).collect();
            let est = st.query(&q).unwrap();
            let mut dm = 0;
            let mut dp = 0;
            for i in 0..objs.len() {
                match st.explain(&q, i) {
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
}
