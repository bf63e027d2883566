//! Numerical geometry for the plane fields spanned by `X1 = d/dx` and
//! `X2 = d/dy + |x|^alpha d/dz` on `R^3`, with `alpha >= 1`.
//!
//! The crate provides:
//!
//! * [`metric`] -- frame parameters, point types, the algebraic quasi-distance
//!   with its exact symmetry group, and the boundary-plane distance formula;
//! * [`flows`] -- closed-form exponential flows of constant-control horizontal
//!   fields, horizontal lifts of planar polylines, and the square-loop
//!   vertical generator;
//! * [`oracle`] -- a bracketed numerical control distance (certified lower
//!   bound plus constructive/optimized upper bound) used as ground truth when
//!   auditing the quasi-distance equivalence;
//! * [`geometry`] -- ball-box maps, box membership and exact volumes,
//!   Monte Carlo ball measures, and the Ahlfors-regularity audit of the
//!   weighted boundary measure `|x|^alpha dx dy`;
//! * [`chains`] -- the explicit horizontal path chains connecting boundary
//!   points, case classification, normalization, and chain audits;
//! * [`trace`] -- numerical evaluation of both sides of the boundary trace
//!   inequality on analytic test functions.
//!
//! All randomized estimators are deterministic given a seed: work is split
//! into indexed batches with per-batch RNG streams and reduced in a fixed
//! order, so results are bit-identical with and without the thread pool
//! (see [`exec`]).

pub mod chains;
pub mod error;
pub mod exec;
pub mod flows;
pub mod geometry;
pub mod metric;
mod num;
pub mod oracle;
pub mod quad;
pub mod roots;
pub mod trace;

pub use error::{Error, Result};
pub use metric::{BesovParams, DeltaBreakdown, FrameParams, SpacePoint, SurfacePoint};
