//! Primitives in `R^d`: hyperplanes in slope-offset form, orthonormal
//! rotations, the cap partition of boundary normals, and the simplex type.
//!
//! A hyperplane is stored as `x_d = eta_1 x_1 + .. + eta_{d-1} x_{d-1} -
//! eta_d`; the duality maps it to the point `(eta_1, .., eta_d)` and a point
//! `p` to the hyperplane `x_d = p_1 x_1 + .. + p_{d-1} x_{d-1} - p_d`,
//! preserving vertical (last-axis) distance. Vertical distance approximates
//! euclidean distance once inward normals are confined to a small spherical
//! cap around the north pole, which is what [`CapFamily`] arranges.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// `x_d >= / <= eta_1 x_1 + .. + eta_{d-1} x_{d-1} - eta_d`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HyperplaneD {
    /// `d` entries: `d-1` slope coefficients then the offset.
    pub eta: Vec<f64>,
    pub above: bool,
}

impl HyperplaneD {
    pub fn dim(&self) -> usize {
        self.eta.len()
    }

    /// Height of the boundary hyperplane over the first `d-1` coordinates.
    pub fn height(&self, p: &[f64]) -> f64 {
        let d = self.eta.len();
        let mut h = -self.eta[d - 1];
        for k in 0..d - 1 {
            h += self.eta[k] * p[k];
        }
        h
    }

    /// Signed evaluation, positive strictly inside.
    pub fn eval(&self, p: &[f64]) -> f64 {
        let g = p[self.eta.len() - 1] - self.height(p);
        if self.above {
            g
        } else {
            -g
        }
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        self.eval(p) >= 0.0
    }

    /// Unit inward normal (points into the halfspace).
    pub fn inward_normal(&self) -> Vec<f64> {
        let d = self.eta.len();
        let mut n = vec![0.0; d];
        let s = if self.above { 1.0 } else { -1.0 };
        for k in 0..d - 1 {
            n[k] = -s * self.eta[k];
        }
        n[d - 1] = s;
        normalize(&mut n);
        n
    }

    /// Euclidean distance from `p` to the boundary hyperplane.
    pub fn boundary_distance(&self, p: &[f64]) -> f64 {
        let d = self.eta.len();
        let norm2: f64 = 1.0 + self.eta[..d - 1].iter().map(|e| e * e).sum::<f64>();
        vertical_distance_d(p, self) / norm2.sqrt()
    }
}

pub fn vertical_distance_d(p: &[f64], h: &HyperplaneD) -> f64 {
    (p[h.eta.len() - 1] - h.height(p)).abs()
}

pub fn dual_hyperplane_to_point(h: &HyperplaneD) -> Vec<f64> {
    h.eta.clone()
}

fn normalize(v: &mut [f64]) {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    for x in v.iter_mut() {
        *x /= n;
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// A dense orthonormal map, stored row-major.
#[derive(Clone, Debug)]
pub struct RotationD {
    pub dim: usize,
    rows: Vec<f64>,
}

impl RotationD {
    pub fn identity(dim: usize) -> Self {
        let mut rows = vec![0.0; dim * dim];
        for i in 0..dim {
            rows[i * dim + i] = 1.0;
        }
        RotationD { dim, rows }
    }

    pub fn from_rows(dim: usize, rows: Vec<f64>) -> Self {
        debug_assert_eq!(rows.len(), dim * dim);
        RotationD { dim, rows }
    }

    /// Householder reflection taking the unit vector `u` to the last axis
    /// `e_d`. Orthonormal to machine precision.
    pub fn to_pole(u: &[f64]) -> Self {
        let d = u.len();
        let mut w: Vec<f64> = u.to_vec();
        w[d - 1] -= 1.0;
        let n2 = dot(&w, &w);
        if n2 < 1e-30 {
            return RotationD::identity(d);
        }
        let mut rows = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..d {
                let mut v = if i == j { 1.0 } else { 0.0 };
                v -= 2.0 * w[i] * w[j] / n2;
                rows[i * d + j] = v;
            }
        }
        RotationD { dim: d, rows }
    }

    /// Composition `self . other` (apply `other` first).
    pub fn compose(&self, other: &RotationD) -> RotationD {
        let d = self.dim;
        let mut rows = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..d {
                let mut s = 0.0;
                for k in 0..d {
                    s += self.rows[i * d + k] * other.rows[k * d + j];
                }
                rows[i * d + j] = s;
            }
        }
        RotationD { dim: d, rows }
    }

    pub fn apply_into(&self, p: &[f64], out: &mut [f64]) {
        let d = self.dim;
        for i in 0..d {
            out[i] = dot(&self.rows[i * d..(i + 1) * d], p);
        }
    }

    pub fn apply(&self, p: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.apply_into(p, &mut out);
        out
    }

    /// Largest deviation of `R Rᵀ` from the identity.
    pub fn orthonormality_defect(&self) -> f64 {
        let d = self.dim;
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                let mut s = 0.0;
                for k in 0..d {
                    s += self.rows[i * d + k] * self.rows[j * d + k];
                }
                let want = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((s - want).abs());
            }
        }
        worst
    }
}

/// One cap of the normal partition: a center direction and the rotation
/// taking it to the north pole.
#[derive(Clone, Debug)]
pub struct Cap {
    pub center: Vec<f64>,
    pub rotation: RotationD,
}

/// Partition of the unit sphere of inward normals into caps of opening angle
/// `phi` with `tan(phi) = 1/sqrt(d-1)`. Construction: pick the dominant axis
/// and sign of the normal (2d frames), then grid the residual slope cube
/// `[-1,1]^{d-1}`; each grid cell's normals fit one cap around the
/// cell-center normal.
#[derive(Clone, Debug)]
pub struct CapFamily {
    pub dim: usize,
    pub phi: f64,
    pub grid: usize,
    caps: Vec<Cap>,
}

impl CapFamily {
    pub fn new(dim: usize) -> Result<Self> {
        let grid = ((dim as f64 - 1.0).powf(1.5)).ceil() as usize;
        CapFamily::with_grid(dim, grid.max(1))
    }

    /// `grid` cells per axis of the residual slope cube; larger values give
    /// more caps and a smaller effective distortion.
    pub fn with_grid(dim: usize, grid: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::param("d", "dimension must be at least 2"));
        }
        let phi = (1.0 / ((dim - 1) as f64).sqrt()).atan();
        let mut caps = Vec::with_capacity(2 * dim * grid.pow(dim as u32 - 1));
        let mut cell = vec![0usize; dim - 1];
        for axis in 0..dim {
            for &sign in &[1.0f64, -1.0] {
                loop {
                    // Center slope of this grid cell.
                    let slope: Vec<f64> = cell
                        .iter()
                        .map(|&i| -1.0 + (2.0 * i as f64 + 1.0) / grid as f64)
                        .collect();
                    let mut center = vec![0.0; dim];
                    let mut k = 0;
                    for j in 0..dim {
                        if j == axis {
                            center[j] = sign;
                        } else {
                            center[j] = sign * slope[k];
                            k += 1;
                        }
                    }
                    normalize(&mut center);
                    let perm = signed_permutation(dim, axis, sign);
                    let rotated_center = perm.apply(&center);
                    let rotation = RotationD::to_pole(&rotated_center).compose(&perm);
                    debug_assert!(rotation.orthonormality_defect() < 1e-12);
                    caps.push(Cap { center, rotation });
                    if !incr(&mut cell, grid) {
                        break;
                    }
                }
            }
        }
        Ok(CapFamily {
            dim,
            phi,
            grid,
            caps,
        })
    }

    pub fn caps(&self) -> &[Cap] {
        &self.caps
    }

    pub fn len(&self) -> usize {
        self.caps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.caps.is_empty()
    }

    /// Cap index for a unit inward normal.
    pub fn assign(&self, normal: &[f64]) -> usize {
        let d = self.dim;
        let mut axis = 0;
        for j in 1..d {
            if normal[j].abs() > normal[axis].abs() {
                axis = j;
            }
        }
        let sign_idx = if normal[axis] >= 0.0 { 0 } else { 1 };
        let denom = normal[axis];
        // Flat cell index, first slope coordinate least significant to match
        // construction order.
        let mut cell_flat = 0;
        let mut mult = 1;
        for j in 0..d {
            if j == axis {
                continue;
            }
            let s = (normal[j] / denom).clamp(-1.0, 1.0);
            let mut i = (((s + 1.0) / 2.0) * self.grid as f64).floor() as isize;
            i = i.clamp(0, self.grid as isize - 1);
            cell_flat += i as usize * mult;
            mult *= self.grid;
        }
        (axis * 2 + sign_idx) * self.grid.pow(d as u32 - 1) + cell_flat
    }

    /// Angle between a normal and its assigned cap center.
    pub fn assignment_angle(&self, normal: &[f64]) -> f64 {
        let cap = &self.caps[self.assign(normal)];
        dot(normal, &cap.center).clamp(-1.0, 1.0).acos()
    }
}

fn incr(cell: &mut [usize], grid: usize) -> bool {
    for c in cell.iter_mut() {
        *c += 1;
        if *c < grid {
            return true;
        }
        *c = 0;
    }
    false
}

fn signed_permutation(dim: usize, axis: usize, sign: f64) -> RotationD {
    // Moves `axis` (with `sign`) to the last coordinate; to stay a rotation
    // when possible we don't care about the determinant, any orthogonal map
    // works here.
    let mut rows = vec![0.0; dim * dim];
    let mut row = 0;
    for j in 0..dim {
        if j == axis {
            continue;
        }
        rows[row * dim + j] = sign;
        row += 1;
    }
    rows[(dim - 1) * dim + axis] = sign;
    RotationD { dim, rows }
}

/// A simplex in `R^3` given by four vertices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Simplex3 {
    pub vertices: [[f64; 3]; 4],
}

/// A facet's supporting plane as outward normal and offset: the simplex side
/// is `n . x <= c`.
#[derive(Clone, Copy, Debug)]
pub struct FacetPlane {
    pub normal: [f64; 3],
    pub offset: f64,
}

impl FacetPlane {
    /// Signed euclidean distance, positive inside the simplex side.
    pub fn signed_inside(&self, q: &[f64; 3]) -> f64 {
        let n = self.normal;
        let len = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
        (self.offset - (n[0] * q[0] + n[1] * q[1] + n[2] * q[2])) / len
    }
}

impl Simplex3 {
    pub fn new(vertices: [[f64; 3]; 4]) -> Self {
        Simplex3 { vertices }
    }

    pub fn signed_volume6(&self) -> f64 {
        let [a, b, c, d] = self.vertices;
        let u = sub3(b, a);
        let v = sub3(c, a);
        let w = sub3(d, a);
        dot3(u, cross3(v, w))
    }

    pub fn validate(&self, min_volume6: f64) -> Result<()> {
        let v = self.signed_volume6();
        if !v.is_finite() || v.abs() < min_volume6 {
            return Err(Error::InvalidScene(format!(
                "degenerate simplex (volume6 {v})"
            )));
        }
        Ok(())
    }

    /// The four facet planes with outward normals.
    pub fn facet_planes(&self) -> [FacetPlane; 4] {
        let idx = [[1, 2, 3], [0, 2, 3], [0, 1, 3], [0, 1, 2]];
        let mut out = [FacetPlane {
            normal: [0.0; 3],
            offset: 0.0,
        }; 4];
        for (i, tri) in idx.iter().enumerate() {
            let [a, b, c] = [
                self.vertices[tri[0]],
                self.vertices[tri[1]],
                self.vertices[tri[2]],
            ];
            let mut n = cross3(sub3(b, a), sub3(c, a));
            let opposite = self.vertices[i];
            // outward: the opposite vertex is strictly inside
            if dot3(n, sub3(opposite, a)) > 0.0 {
                n = [-n[0], -n[1], -n[2]];
            }
            out[i] = FacetPlane {
                normal: n,
                offset: dot3(n, a),
            };
        }
        out
    }

    pub fn contains(&self, q: &[f64; 3]) -> bool {
        self.facet_planes()
            .iter()
            .all(|f| f.signed_inside(q) >= 0.0)
    }

    /// Distance from an interior point to the boundary equals the minimum
    /// over supporting planes (convexity); for exterior points this is the
    /// (negative) largest violation.
    pub fn min_signed_plane_distance(&self, q: &[f64; 3]) -> f64 {
        self.facet_planes()
            .iter()
            .map(|f| f.signed_inside(q))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn rotate(&self, rot: &RotationD, center: &[f64; 3], shift: &[f64; 3]) -> Simplex3 {
        debug_assert_eq!(rot.dim, 3);
        let mut out = self.vertices;
        for v in out.iter_mut() {
            let local = [v[0] - center[0], v[1] - center[1], v[2] - center[2]];
            let r = rot.apply(&local);
            *v = [r[0] + shift[0], r[1] + shift[1], r[2] + shift[2]];
        }
        Simplex3 { vertices: out }
    }

    pub fn edges(&self) -> [([f64; 3], [f64; 3]); 6] {
        let v = self.vertices;
        [
            (v[0], v[1]),
            (v[0], v[2]),
            (v[0], v[3]),
            (v[1], v[2]),
            (v[1], v[3]),
            (v[2], v[3]),
        ]
    }
}

pub fn sub3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn cross3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn cap_opening_angle_d3() {
        let fam = CapFamily::new(3).unwrap();
        assert!((fam.phi.tan() - 1.0 / 2f64.sqrt()).abs() < 1e-12);
        assert!((fam.phi - 0.6154797086703874).abs() < 1e-12);
    }

    #[test]
    fn pole_normal_gets_identityish_rotation() {
        let fam = CapFamily::new(3).unwrap();
        let n = [0.0, 0.0, 1.0];
        let cap = &fam.caps()[fam.assign(&n)];
        let r = cap.rotation.apply(&n);
        assert!(r[2] > (fam.phi).cos());
        // eta-slope of the rotated normal stays within tan(phi)
        let slope = (r[0] * r[0] + r[1] * r[1]).sqrt() / r[2];
        assert!(slope <= fam.phi.tan() + 1e-9);
    }

    #[test]
    fn random_normals_fit_their_caps() {
        for &d in &[2usize, 3, 4] {
            let fam = CapFamily::new(d).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(7 + d as u64);
            for _ in 0..1000 {
                let mut n: Vec<f64> = (0..d).map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal)).collect();
                let len = dot(&n, &n).sqrt();
                if len < 1e-9 {
                    continue;
                }
                for x in n.iter_mut() {
                    *x /= len;
                }
                assert!(fam.assignment_angle(&n) <= fam.phi + 1e-9);
                // rotated normal lies within the pole cap
                let cap = &fam.caps()[fam.assign(&n)];
                let r = cap.rotation.apply(&n);
                assert!(r[d - 1] >= fam.phi.cos() - 1e-9);
            }
        }
    }

    #[test]
    fn rotations_are_orthonormal() {
        for &d in &[2usize, 3, 4, 5] {
            let fam = CapFamily::new(d).unwrap();
            for cap in fam.caps() {
                assert!(cap.rotation.orthonormality_defect() < 1e-12);
            }
        }
    }

    #[test]
    fn simplex_membership_and_planes() {
        let s = Simplex3::new([
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
        ]);
        assert!(s.contains(&[0.1, 0.1, 0.1]));
        assert!(!s.contains(&[0.9, 0.9, 0.9]));
        // boundary point counts as inside
        assert!(s.contains(&[0.0, 0.0, 0.0]));
        let d = s.min_signed_plane_distance(&[0.1, 0.1, 0.1]);
        assert!(d > 0.0 && d <= 0.1 + 1e-12);
    }

    #[test]
    fn vertical_vs_euclid_within_cap() {
        // dist <= d_v <= dist / cos(phi) for hyperplanes whose rotated
        // normal lies in the pole cap
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let d = 3;
        let phi = (1.0 / ((d - 1) as f64).sqrt()).atan();
        for _ in 0..500 {
            // slope vector inside the ball of radius tan(phi), so the normal
            // lies in the pole cap
            let eta: Vec<f64> = loop {
                let bar: Vec<f64> = (0..d - 1)
                    .map(|_| rng.gen_range(-phi.tan()..phi.tan()))
                    .collect();
                if dot(&bar, &bar).sqrt() <= phi.tan() {
                    let mut e = bar;
                    e.push(rng.gen_range(-1.0..1.0));
                    break e;
                }
            };
            let h = HyperplaneD { eta, above: true };
            let p: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let dv = vertical_distance_d(&p, &h);
            let de = h.boundary_distance(&p);
            assert!(de <= dv + 1e-12);
            assert!(dv <= de / phi.cos() + 1e-9);
        }
    }
}
