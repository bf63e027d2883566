//! Frame parameters, point types, the quasi-distance with its exact symmetry
//! group, and the boundary-plane distance formula.
//!
//! The quasi-distance between `(x, y, z)` and `(x', y', z')` is
//!
//! ```text
//! delta = |x' - x| + |y' - y| + min{ |zeta|^(1/(alpha+1)),
//!                                    |zeta|^(1/2) / |x|^((alpha-1)/2) }
//! zeta  = z - z' + |x|^alpha (y' - y)
//! ```
//!
//! with two conventions that keep every branch well defined: the minimum is
//! `0` when `zeta = 0` (checked first, so `0/0` is never formed), and it is
//! `|zeta|^(1/(alpha+1))` when `x = 0`. The first argument's `x` enters both
//! `zeta` and the denominator, so `delta` is not symmetric pointwise; it is a
//! quasi-metric, globally comparable to the control distance, and no triangle
//! inequality is asserted anywhere in the crate.
//!
//! Exact invariances (translation in `y` and `z`, reflection `x -> -x`,
//! dilation `(x, y, z) -> (r x, r y, r^(alpha+1) z)`) are exercised by the
//! acceptance suite.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::{pow_abs, pow_recip};

/// The exponent `alpha >= 1` defining the frame and every derived formula.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameParams {
    alpha: f64,
}

impl FrameParams {
    /// Rejects `alpha < 1` and non-finite values.
    pub fn new(alpha: f64) -> Result<Self> {
        if !alpha.is_finite() || alpha < 1.0 {
            return Err(Error::InvalidParameter {
                name: "alpha",
                value: alpha,
            });
        }
        Ok(Self { alpha })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

/// A point of `R^3`. The `z` coordinate carries homogeneity `alpha + 1`
/// under dilation. Membership in the closed half-space `z >= 0` is checked
/// per operation, not per type.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpacePoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl SpacePoint {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        debug_assert!(
            x.is_finite() && y.is_finite() && z.is_finite(),
            "non-finite coordinates ({x}, {y}, {z})"
        );
        Self { x, y, z }
    }

    pub const ORIGIN: SpacePoint = SpacePoint {
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };
}

/// A point of the boundary plane `z = 0`, identified with `(x, y, 0)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfacePoint {
    pub x: f64,
    pub y: f64,
}

impl SurfacePoint {
    pub fn new(x: f64, y: f64) -> Self {
        debug_assert!(
            x.is_finite() && y.is_finite(),
            "non-finite coordinates ({x}, {y})"
        );
        Self { x, y }
    }

    /// The embedding `(x, y) -> (x, y, 0)`.
    pub fn embed(self) -> SpacePoint {
        SpacePoint::new(self.x, self.y, 0.0)
    }
}

/// Decomposed quasi-distance value.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct DeltaBreakdown {
    /// `|x' - x|`
    pub dx: f64,
    /// `|y' - y|`
    pub dy: f64,
    /// `zeta = z - z' + |x|^alpha (y' - y)`, signed.
    pub zeta: f64,
    /// `min{ |zeta|^(1/(alpha+1)), |zeta|^(1/2) / |x|^((alpha-1)/2) }`
    pub vertical: f64,
    /// `dx + dy + vertical`, exactly.
    pub total: f64,
}

impl DeltaBreakdown {
    /// Max-form value `max{dx, dy, vertical}`.
    ///
    /// The strict sublevel set `{q : max_form < r}` is exactly the union of
    /// the two coordinate boxes of [`crate::geometry`].
    pub fn max_form(&self) -> f64 {
        self.dx.max(self.dy).max(self.vertical)
    }
}

/// Integrability exponent `p > 1` together with the derived smoothness
/// `s = 1 - 1/p`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct BesovParams {
    p: f64,
    s: f64,
}

impl BesovParams {
    pub fn new(p: f64) -> Result<Self> {
        if !p.is_finite() || p <= 1.0 {
            return Err(Error::InvalidParameter {
                name: "p",
                value: p,
            });
        }
        Ok(Self {
            p,
            s: 1.0 - 1.0 / p,
        })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// `s = 1 - 1/p`, always in `(0, 1)`.
    pub fn s(&self) -> f64 {
        self.s
    }
}

/// `zeta(p, q) = z - z' + |x|^alpha (y' - y)`, using the first point's `x`.
pub fn zeta(p: SpacePoint, q: SpacePoint, fp: FrameParams) -> f64 {
    p.z - q.z + pow_abs(p.x, fp.alpha()) * (q.y - p.y)
}

fn vertical_term(zeta: f64, x: f64, alpha: f64) -> f64 {
    // Branch order matters: zeta = 0 first, then x = 0, so 0/0 never forms.
    if zeta == 0.0 {
        return 0.0;
    }
    let az = zeta.abs();
    let box2 = pow_recip(az, alpha + 1.0);
    if x == 0.0 {
        return box2;
    }
    let box1 = az.sqrt() / pow_abs(x, 0.5 * (alpha - 1.0));
    box2.min(box1)
}

/// The quasi-distance from `p` to `q`, decomposed.
pub fn delta(p: SpacePoint, q: SpacePoint, fp: FrameParams) -> DeltaBreakdown {
    let dx = (q.x - p.x).abs();
    let dy = (q.y - p.y).abs();
    let zeta = zeta(p, q, fp);
    let vertical = vertical_term(zeta, p.x, fp.alpha());
    DeltaBreakdown {
        dx,
        dy,
        zeta,
        vertical,
        total: dx + dy + vertical,
    }
}

/// Boundary-plane distance `|x - x'| + |y - y'| + |x|^(1/2) |y' - y|^(1/2)`.
///
/// On the plane the mixed term is always comparable to the vertical term of
/// [`delta`], so this three-term sum agrees with `delta` on embedded points
/// up to a factor depending only on `alpha` (audited, not assumed).
pub fn delta_plane(u: SurfacePoint, v: SurfacePoint, _fp: FrameParams) -> f64 {
    let dx = (v.x - u.x).abs();
    let dy = (v.y - u.y).abs();
    dx + dy + (u.x.abs() * dy).sqrt()
}

/// Homogeneous dilation `(x, y, z) -> (r x, r y, r^(alpha+1) z)`, `r >= 0`.
pub fn dilate(p: SpacePoint, r: f64, fp: FrameParams) -> Result<SpacePoint> {
    if !(r >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "r",
            value: r,
        });
    }
    let rz = pow_abs(r, fp.alpha() + 1.0);
    Ok(SpacePoint::new(r * p.x, r * p.y, rz * p.z))
}

/// A composition of the exact symmetries: translation in `y` and `z` and the
/// reflection `x -> -x`.
#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize)]
pub struct SymmetrySpec {
    pub translate_y: f64,
    pub translate_z: f64,
    pub reflect_x: bool,
}

/// Applies the symmetry; the quasi-distance is invariant under simultaneous
/// application to both arguments.
pub fn symmetry_transforms(p: SpacePoint, spec: SymmetrySpec) -> SpacePoint {
    let x = if spec.reflect_x { -p.x } else { p.x };
    SpacePoint::new(x, p.y + spec.translate_y, p.z + spec.translate_z)
}
