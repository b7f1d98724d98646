//! Approximate depth queries over arrangements of halfplanes, triangles,
//! halfspaces in `R^d` and simplices in `R^3`.
//!
//! The depth of a point `q` is the number of input objects containing it.
//! Every structure here answers a query with a pair `(d_minus, d_plus)` that
//! brackets the true depth: `d_minus` counts only objects that really contain
//! `q` but may drop objects whose boundary passes within `epsilon` of `q`,
//! while `d_plus` counts every containing object and may add objects whose
//! boundary passes within `epsilon` of `q` (for triangles and simplices the
//! overestimate is measured against offset objects bounded by supporting
//! lines/planes shifted by `epsilon`).
//!
//! Structures:
//! - [`naive::NaiveTree`]: a primal-only quadtree/octree refined to cell
//!   diameter `epsilon`, with exact containment counters and per-leaf
//!   boundary-crossing counters.
//! - [`pd::PdStructure`]: the primal-dual structure for halfplanes; a coarse
//!   primal quadtree plus, per deep leaf, dual quadtrees over points dual to
//!   the crossing boundary lines.
//! - [`triangle::TriangleStructure`]: triangles decomposed into signed
//!   trapezoids, a segment tree over x-spans, and per-node halfplane
//!   structures combined with signed arithmetic.
//! - [`halfspace::HalfspaceStructure`]: the dimension-parametric analogue for
//!   halfspaces, with boundary normals partitioned into spherical caps.
//! - [`simplex::Simplex3Structure`]: simplices in `R^3` decomposed into signed
//!   prisms with a two-level dual structure per octree leaf.
//!
//! [`oracle`] holds brute-force reference implementations used as ground
//! truth in tests, [`maxdepth`] turns any structure into an approximate
//! maximum-depth search, and [`scene`] provides seeded scene generation.

pub mod dual2;
pub mod duald;
pub mod error;
pub mod estimate;
pub mod geom2;
pub mod geomd;
pub mod halfspace;
pub mod maxdepth;
pub mod naive;
pub mod oracle;
pub mod params;
pub mod pd;
pub mod primal;
pub mod scene;
pub mod segtree;
pub mod simplex;
pub mod triangle;

pub use error::{Error, Result};
pub use estimate::DepthEstimate;
pub use maxdepth::{approx_max_depth, grid_centers, DepthStructure, MaxDepthResult};
pub use scene::{Family, Scene};
