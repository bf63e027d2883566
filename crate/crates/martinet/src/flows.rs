//! Closed-form exponential flows of constant-control horizontal fields,
//! horizontal lifts of planar polylines, and the square-loop vertical
//! generator.
//!
//! A constant-control segment `(e1, e2, T)` moves a point along
//! `e1 X1 + e2 X2`; the vertical coordinate integrates `e2 |x(s)|^alpha`,
//! which has the signed closed form used throughout the crate. Adaptive
//! quadrature of the same integrand is retained in tests as the independent
//! cross-check oracle.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{FrameParams, SpacePoint};
use crate::num::{abs_pow_antideriv, pow_abs};

/// One constant-control piece of a horizontal path.
///
/// Negative durations are normalized at construction to positive duration
/// with negated controls.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ControlSegment {
    e1: f64,
    e2: f64,
    duration: f64,
}

impl ControlSegment {
    pub fn new(e1: f64, e2: f64, duration: f64) -> Self {
        if duration < 0.0 {
            Self {
                e1: -e1,
                e2: -e2,
                duration: -duration,
            }
        } else {
            Self { e1, e2, duration }
        }
    }

    pub fn e1(&self) -> f64 {
        self.e1
    }

    pub fn e2(&self) -> f64 {
        self.e2
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    /// `max(|e1|, |e2|)`.
    pub fn sup_speed(&self) -> f64 {
        self.e1.abs().max(self.e2.abs())
    }

    /// `sqrt(e1^2 + e2^2)`.
    pub fn euclid_speed(&self) -> f64 {
        self.e1.hypot(self.e2)
    }
}

/// `int_0^t |x0 + e1 s|^a ds` in closed form.
fn abs_pow_integral(x0: f64, e1: f64, t: f64, a: f64) -> f64 {
    if t == 0.0 {
        return 0.0;
    }
    if e1 == 0.0 {
        return t * pow_abs(x0, a);
    }
    let h = e1 * t;
    // Series guard: the antiderivative difference cancels catastrophically
    // when the segment barely moves in x.
    if h.abs() < 1e-9 * x0.abs() {
        let slope = a * pow_abs(x0, a - 1.0) * x0.signum();
        return t * pow_abs(x0, a) + 0.5 * slope * e1 * t * t;
    }
    (abs_pow_antideriv(x0 + h, a) - abs_pow_antideriv(x0, a)) / e1
}

/// Time-`T` flow of `e1 X1 + e2 X2` from `p`:
/// `(x + e1 T, y + e2 T, z + e2 int_0^T |x + e1 s|^alpha ds)`.
pub fn flow(p: SpacePoint, seg: &ControlSegment, fp: FrameParams) -> SpacePoint {
    let t = seg.duration;
    SpacePoint::new(
        p.x + seg.e1 * t,
        p.y + seg.e2 * t,
        p.z + seg.e2 * abs_pow_integral(p.x, seg.e1, t, fp.alpha()),
    )
}

/// Total path length in both control norms.
#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize)]
pub struct PathLength {
    pub sup_norm_length: f64,
    pub euclid_norm_length: f64,
}

/// A horizontal path: a start point plus constant-control segments, with
/// optional resolved waypoints.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HorizontalPath {
    pub start: SpacePoint,
    pub segments: Vec<ControlSegment>,
    pub samples: Option<Vec<SpacePoint>>,
}

impl HorizontalPath {
    pub fn new(start: SpacePoint, segments: Vec<ControlSegment>) -> Self {
        Self {
            start,
            segments,
            samples: None,
        }
    }

    /// Start point followed by the point after each segment.
    pub fn waypoints(&self, fp: FrameParams) -> Vec<SpacePoint> {
        let mut pts = Vec::with_capacity(self.segments.len() + 1);
        let mut cur = self.start;
        pts.push(cur);
        for seg in &self.segments {
            cur = flow(cur, seg, fp);
            pts.push(cur);
        }
        pts
    }

    pub fn endpoint(&self, fp: FrameParams) -> SpacePoint {
        let mut cur = self.start;
        for seg in &self.segments {
            cur = flow(cur, seg, fp);
        }
        cur
    }

    /// Stores the resolved waypoints in `samples`.
    pub fn resolve_samples(&mut self, fp: FrameParams) {
        self.samples = Some(self.waypoints(fp));
    }

    /// `(t, point)` rows sampling each segment at `per_segment` interior
    /// steps, with `t` the cumulative sup-norm time.
    pub fn sample_rows(&self, fp: FrameParams, per_segment: usize) -> Vec<(f64, SpacePoint)> {
        let k = per_segment.max(1);
        let mut rows = vec![(0.0, self.start)];
        let mut cur = self.start;
        let mut t0 = 0.0;
        for seg in &self.segments {
            for i in 1..=k {
                let dt = seg.duration * i as f64 / k as f64;
                let part = ControlSegment::new(seg.e1, seg.e2, dt);
                rows.push((t0 + dt, flow(cur, &part, fp)));
            }
            cur = flow(cur, seg, fp);
            t0 += seg.duration;
        }
        rows
    }
}

/// Sums `duration * speed` per segment for both control norms. The sup-norm
/// length never exceeds the Euclidean one, which never exceeds `sqrt(2)`
/// times the sup-norm length.
pub fn path_length(path: &HorizontalPath) -> PathLength {
    let mut sup = 0.0;
    let mut euclid = 0.0;
    for seg in &path.segments {
        sup += seg.duration * seg.sup_speed();
        euclid += seg.duration * seg.euclid_speed();
    }
    PathLength {
        sup_norm_length: sup,
        euclid_norm_length: euclid,
    }
}

/// Horizontal lift of a planar polyline starting at height `z0`.
///
/// Each affine edge increments `z` by the exact closed form of
/// `int |x(t)|^alpha dy(t)`; the endpoint of a closed loop gains the signed
/// loop integral of `x^alpha dy`.
pub fn lift(kappa: &[(f64, f64)], z0: f64, fp: FrameParams) -> HorizontalPath {
    let start = match kappa.first() {
        Some(&(x, y)) => SpacePoint::new(x, y, z0),
        None => SpacePoint::new(0.0, 0.0, z0),
    };
    let mut segments = Vec::new();
    for w in kappa.windows(2) {
        let (x0, y0) = w[0];
        let (x1, y1) = w[1];
        let dx = x1 - x0;
        let dy = y1 - y0;
        let t = dx.hypot(dy);
        if t == 0.0 {
            continue;
        }
        segments.push(ControlSegment::new(dx / t, dy / t, t));
    }
    let mut path = HorizontalPath::new(start, segments);
    path.resolve_samples(fp);
    path
}

/// Vertical gain `u ((x + u)^alpha - x^alpha)` of the unit-speed square loop
/// of side `u` with left edge at `x >= 0`.
pub fn square_loop_z(x: f64, u: f64, fp: FrameParams) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "x",
            value: x,
        });
    }
    if !(u > 0.0) {
        return Err(Error::InvalidParameter {
            name: "u",
            value: u,
        });
    }
    let a = fp.alpha();
    Ok(u * (pow_abs(x + u, a) - pow_abs(x, a)))
}

/// The counterclockwise square loop polyline of side `u` at left edge `x`.
pub fn square_loop_polyline(x: f64, y: f64, u: f64) -> [(f64, f64); 5] {
    [(x, y), (x + u, y), (x + u, y + u), (x, y + u), (x, y)]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::dilate;
    use crate::quad::adaptive_simpson;

    fn fp(alpha: f64) -> FrameParams {
        FrameParams::new(alpha).unwrap()
    }

    #[test]
    fn x2_flow_from_positive_x() {
        let p = flow(
            SpacePoint::new(2.0, 0.0, 0.0),
            &ControlSegment::new(0.0, 1.0, 1.0),
            fp(2.0),
        );
        assert_eq!(p, SpacePoint::new(2.0, 1.0, 4.0));
    }

    #[test]
    fn diagonal_flow_backwards() {
        // Duration -1 normalizes to controls (-1, -1) over duration 1.
        let seg = ControlSegment::new(1.0, 1.0, -1.0);
        assert_eq!(seg.duration(), 1.0);
        assert_eq!(seg.e1(), -1.0);
        let p = flow(SpacePoint::new(2.0, 2.0, 4.0), &seg, fp(1.0));
        assert_eq!(p, SpacePoint::new(1.0, 1.0, 2.5));
    }

    #[test]
    fn diagonal_flow_from_origin() {
        let p = flow(
            SpacePoint::ORIGIN,
            &ControlSegment::new(1.0, 1.0, 1.0),
            fp(1.0),
        );
        assert_eq!(p, SpacePoint::new(1.0, 1.0, 0.5));
    }

    #[test]
    fn flow_matches_quadrature() {
        let a = fp(2.5);
        let p0 = SpacePoint::new(-1.3, 0.4, 0.2);
        let seg = ControlSegment::new(0.8, -0.6, 2.0);
        let end = flow(p0, &seg, a);
        let zq = p0.z
            + seg.e2()
                * adaptive_simpson(
                    |s| pow_abs(p0.x + seg.e1() * s, a.alpha()),
                    0.0,
                    seg.duration(),
                    1e-12,
                );
        assert!((end.z - zq).abs() < 1e-9, "{} vs {zq}", end.z);
    }

    #[test]
    fn lift_pure_x_edge_keeps_z() {
        let path = lift(&[(0.0, 0.0), (3.0, 0.0)], 0.0, fp(2.0));
        assert_eq!(path.endpoint(fp(2.0)).z, 0.0);
    }

    #[test]
    fn lift_vertical_edge_gains_weighted_height() {
        let path = lift(&[(2.0, 0.0), (2.0, 3.0)], 0.0, fp(2.0));
        assert_eq!(path.endpoint(fp(2.0)).z, 12.0);
    }

    #[test]
    fn lift_square_loop_stokes() {
        let a = fp(2.0);
        let path = lift(&square_loop_polyline(0.0, 0.0, 1.0), 0.0, a);
        let end = path.endpoint(a);
        assert!((end.x, end.y) == (0.0, 0.0));
        assert!((end.z - 1.0).abs() < 1e-12);
        assert!((end.z - square_loop_z(0.0, 1.0, a).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn square_loop_z_examples() {
        assert_eq!(square_loop_z(0.0, 1.0, fp(2.0)).unwrap(), 1.0);
        assert_eq!(square_loop_z(1.0, 1.0, fp(1.0)).unwrap(), 1.0);
        assert_eq!(square_loop_z(1.0, 1.0, fp(2.0)).unwrap(), 3.0);
        assert!(square_loop_z(-1.0, 1.0, fp(2.0)).is_err());
        assert!(square_loop_z(1.0, 0.0, fp(2.0)).is_err());
    }

    #[test]
    fn path_length_examples() {
        let a = fp(2.0);
        let empty = HorizontalPath::new(SpacePoint::ORIGIN, vec![]);
        assert_eq!(path_length(&empty).euclid_norm_length, 0.0);

        let one = HorizontalPath::new(SpacePoint::ORIGIN, vec![ControlSegment::new(1.0, 0.0, 3.0)]);
        let l = path_length(&one);
        assert_eq!(l.sup_norm_length, 3.0);
        assert_eq!(l.euclid_norm_length, 3.0);

        let diag =
            HorizontalPath::new(SpacePoint::ORIGIN, vec![ControlSegment::new(1.0, 1.0, 1.0)]);
        let l = path_length(&diag);
        assert_eq!(l.sup_norm_length, 1.0);
        assert!((l.euclid_norm_length - 2f64.sqrt()).abs() < 1e-15);
        let _ = a;
    }

    #[test]
    fn flow_composition_concatenates_durations() {
        let a = fp(1.5);
        let p = SpacePoint::new(0.3, -0.2, 0.1);
        let s1 = ControlSegment::new(0.6, 0.8, 0.7);
        let s2 = ControlSegment::new(0.6, 0.8, 1.1);
        let s12 = ControlSegment::new(0.6, 0.8, 1.8);
        let two = flow(flow(p, &s1, a), &s2, a);
        let one = flow(p, &s12, a);
        assert!((two.x - one.x).abs() < 1e-12);
        assert!((two.y - one.y).abs() < 1e-12);
        assert!((two.z - one.z).abs() < 1e-12);
    }

    #[test]
    fn flow_commutes_with_dilation() {
        let a = fp(2.0);
        let p = SpacePoint::new(1.1, -0.4, 0.3);
        let seg = ControlSegment::new(0.5, -0.7, 0.9);
        for &r in &[0.25, 2.0, 17.0] {
            let scaled = ControlSegment::new(seg.e1(), seg.e2(), r * seg.duration());
            let lhs = flow(dilate(p, r, a).unwrap(), &scaled, a);
            let rhs = dilate(flow(p, &seg, a), r, a).unwrap();
            let scale = 1.0 + rhs.x.abs().max(rhs.y.abs()).max(rhs.z.abs());
            assert!((lhs.x - rhs.x).abs() < 1e-10 * scale);
            assert!((lhs.y - rhs.y).abs() < 1e-10 * scale);
            assert!((lhs.z - rhs.z).abs() < 1e-10 * scale);
        }
    }

    #[test]
    fn lift_closed_loop_matches_dense_quadrature() {
        let a = fp(2.0);
        // A closed polyline straddling x = 0, symmetric about the y axis.
        let poly = [
            (-1.0, 0.0),
            (1.0, 0.0),
            (1.0, 1.0),
            (-1.0, 1.0),
            (-1.0, 0.0),
        ];
        let end = lift(&poly, 0.0, a).endpoint(a);
        // Independent dense quadrature of the loop integral of |x|^a dy.
        let mut want = 0.0;
        for w in poly.windows(2) {
            let (x0, y0) = w[0];
            let (x1, y1) = w[1];
            if y1 != y0 {
                want += adaptive_simpson(
                    |s| pow_abs(x0 + s * (x1 - x0), a.alpha()) * (y1 - y0),
                    0.0,
                    1.0,
                    1e-12,
                );
            }
        }
        assert!((end.z - want).abs() < 1e-8, "{} vs {want}", end.z);
    }
}
