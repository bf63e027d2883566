//! Explicit horizontal path chains between boundary points, case
//! classification, normalization, and chain audits.
//!
//! Two constructions connect `u = (x, y, 0)` to `v = (x', y', 0)` through the
//! closed half-space `z >= 0`:
//!
//! * the characteristic chain (admissible when `y <= y'` and
//!   `0 <= |x| <= x'`) runs along `X2`, moves to the half offset `|x|/2`,
//!   climbs by a solved time `tau = |2x|^alpha (y'-y) / ((2x')^alpha -
//!   |x|^alpha)`, moves out to `x'`, and descends; the final descent lands on
//!   the plane exactly because of the choice of `tau`;
//! * the noncharacteristic chain (admissible when `y <= y'` and
//!   `x >= x' > 0`) uses `X2` and the diagonal field `Z = X1 + X2`: after a
//!   vertical budget `z' > 0` accumulates, a commutator-style rectangle of
//!   solved duration `tau` (the unique positive root of
//!   `tau ((x' + tau)^alpha - x'^alpha) = z'`) removes it.
//!
//! Chains are defined for every pair satisfying their algebraic
//! preconditions; the case gate from the boundary-plane distance only
//! selects which chain an estimator uses. Pairs violating the orientation
//! assumptions are rewritten by [`normalize`], which may insert a third
//! point and return two admissible pairs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flows::{flow, ControlSegment};
use crate::metric::{delta_plane, FrameParams, SpacePoint, SurfacePoint};
use crate::num::{pow_abs, pow_recip};
use crate::quad::adaptive_simpson;
use crate::roots::solve_increasing;
use crate::trace::ScalarField;

/// Trichotomy of a boundary pair relative to the characteristic line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CaseLabel {
    /// Both endpoints within `d / eps0` of the characteristic line.
    Characteristic,
    /// Both endpoints farther than `d / eps0` from it.
    Noncharacteristic,
    /// One of each; folds into the noncharacteristic treatment, since the far
    /// endpoint forces the near one to distance at least `(1/eps0 - 1) d`.
    Mixed,
}

/// Case-gate and root-solve tuning.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ChainConfig {
    /// Gate parameter in `(0, 1)`.
    pub eps0: f64,
    /// Accepted root residual, relative to `1 + z'`.
    pub root_tol: f64,
}

impl Default for ChainConfig {
    fn default() -> Self {
        Self {
            eps0: 0.1,
            root_tol: 1e-12,
        }
    }
}

impl ChainConfig {
    pub fn new(eps0: f64, root_tol: f64) -> Result<Self> {
        if !(eps0 > 0.0 && eps0 < 1.0) {
            return Err(Error::InvalidParameter {
                name: "eps0",
                value: eps0,
            });
        }
        if !(root_tol > 0.0) {
            return Err(Error::InvalidParameter {
                name: "root_tol",
                value: root_tol,
            });
        }
        Ok(Self { eps0, root_tol })
    }
}

/// Signed generator of a chain segment.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Generator {
    X1Pos,
    X1Neg,
    X2Pos,
    X2Neg,
    ZPos,
    ZNeg,
}

impl Generator {
    pub fn controls(self) -> (f64, f64) {
        match self {
            Generator::X1Pos => (1.0, 0.0),
            Generator::X1Neg => (-1.0, 0.0),
            Generator::X2Pos => (0.0, 1.0),
            Generator::X2Neg => (0.0, -1.0),
            Generator::ZPos => (1.0, 1.0),
            Generator::ZNeg => (-1.0, -1.0),
        }
    }
}

/// One generator applied for a nonnegative duration.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ChainSegment {
    pub generator: Generator,
    pub duration: f64,
}

impl ChainSegment {
    pub fn control_segment(&self) -> ControlSegment {
        let (e1, e2) = self.generator.controls();
        ControlSegment::new(e1, e2, self.duration)
    }
}

/// An explicit chain: intermediate points, per-segment generator and
/// duration, and the defining scalars.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChainSpec {
    pub case: CaseLabel,
    pub points: Vec<SpacePoint>,
    pub segments: Vec<ChainSegment>,
    pub sigma: Option<f64>,
    pub tau: f64,
    pub z_prime: Option<f64>,
}

impl ChainSpec {
    /// Replays the segments through the exact flows from the start point.
    pub fn replay(&self, fp: FrameParams) -> Vec<SpacePoint> {
        let mut pts = Vec::with_capacity(self.points.len());
        let mut cur = self.points[0];
        pts.push(cur);
        for seg in &self.segments {
            cur = flow(cur, &seg.control_segment(), fp);
            pts.push(cur);
        }
        pts
    }

    /// Largest per-coordinate mismatch between the stored points and the
    /// replayed flow, relative to `1 +` the point magnitude.
    pub fn max_replay_error(&self, fp: FrameParams) -> f64 {
        let replayed = self.replay(fp);
        let mut worst = 0.0f64;
        for (a, b) in replayed.iter().zip(&self.points) {
            let scale = 1.0 + b.x.abs().max(b.y.abs()).max(b.z.abs());
            let err = (a.x - b.x)
                .abs()
                .max((a.y - b.y).abs())
                .max((a.z - b.z).abs())
                / scale;
            worst = worst.max(err);
        }
        worst
    }

    /// Minimum `z` over dense samples of every segment.
    pub fn min_z_dense(&self, fp: FrameParams, per_segment: usize) -> f64 {
        let k = per_segment.max(1);
        let mut min_z = self.points[0].z;
        for (j, seg) in self.segments.iter().enumerate() {
            let base = self.points[j];
            let cs = seg.control_segment();
            for i in 1..=k {
                let t = seg.duration * i as f64 / k as f64;
                let part = ControlSegment::new(cs.e1(), cs.e2(), t);
                min_z = min_z.min(flow(base, &part, fp).z);
            }
        }
        min_z
    }

    /// Total duration weighted by the Euclidean control norm.
    pub fn cc_length(&self) -> f64 {
        self.segments
            .iter()
            .map(|s| s.duration * s.control_segment().euclid_speed())
            .sum()
    }
}

/// Case gate: compares the boundary-plane distance with `eps0` times each
/// endpoint's offset from the characteristic line.
///
/// Tie-breaks are those of the degenerate boundary: an equal pair away from
/// the line is noncharacteristic (vacuously), the origin pair is
/// characteristic.
pub fn classify(u: SurfacePoint, v: SurfacePoint, fp: FrameParams, cfg: &ChainConfig) -> CaseLabel {
    let d = delta_plane(u, v, fp);
    let near_u = d >= cfg.eps0 * u.x.abs();
    let near_v = d >= cfg.eps0 * v.x.abs();
    match (near_u, near_v) {
        (true, true) => CaseLabel::Characteristic,
        (false, false) => CaseLabel::Noncharacteristic,
        _ => CaseLabel::Mixed,
    }
}

/// A recorded normalization step.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub enum TransformStep {
    /// Endpoints exchanged to enforce `y <= y'`.
    Swapped,
    /// Both points reflected through the characteristic line.
    Reflected,
    /// Third point inserted; both returned pairs target it.
    ThirdPoint(SurfacePoint),
}

/// Result of [`normalize`]: one or two ordered pairs, each satisfying the
/// applicable chain's precondition, plus the transform log.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Normalization {
    pub case: CaseLabel,
    pub pairs: Vec<(SurfacePoint, SurfacePoint)>,
    pub steps: Vec<TransformStep>,
}

fn reflect(u: SurfacePoint) -> SurfacePoint {
    SurfacePoint::new(-u.x, u.y)
}

/// Rewrites `(u, v)` into chain-admissible ordered pairs: swap for
/// `y <= y'`, reflect for the sign convention, and insert a third point when
/// the orientation condition of the applicable chain fails.
pub fn normalize(
    u: SurfacePoint,
    v: SurfacePoint,
    fp: FrameParams,
    cfg: &ChainConfig,
) -> Result<Normalization> {
    let case = classify(u, v, fp, cfg);
    let mut steps = Vec::new();
    let (mut a, mut b) = if v.y < u.y {
        steps.push(TransformStep::Swapped);
        (v, u)
    } else {
        (u, v)
    };
    let pairs = match case {
        CaseLabel::Characteristic => {
            if a.x.abs() <= b.x.abs() {
                if b.x < 0.0 {
                    steps.push(TransformStep::Reflected);
                    a = reflect(a);
                    b = reflect(b);
                }
                vec![(a, b)]
            } else {
                // |a.x| > |b.x|: route both endpoints to a third point with
                // larger offset. Reflect first so the target offset is
                // nonnegative.
                if b.x < 0.0 {
                    steps.push(TransformStep::Reflected);
                    a = reflect(a);
                    b = reflect(b);
                }
                let third = if a.x > 0.0 {
                    SurfacePoint::new(2.0 * a.x - b.x, 2.0 * b.y - a.y)
                } else {
                    SurfacePoint::new(-a.x, 2.0 * b.y - a.y)
                };
                steps.push(TransformStep::ThirdPoint(third));
                vec![(a, third), (b, third)]
            }
        }
        CaseLabel::Noncharacteristic | CaseLabel::Mixed => {
            if a.x == 0.0 || b.x == 0.0 || a.x.signum() != b.x.signum() {
                return Err(Error::Precondition(
                    "noncharacteristic normalization needs both offsets nonzero with equal signs"
                        .into(),
                ));
            }
            if a.x < 0.0 {
                steps.push(TransformStep::Reflected);
                a = reflect(a);
                b = reflect(b);
            }
            if a.x >= b.x {
                vec![(a, b)]
            } else {
                let third = SurfacePoint::new(2.0 * a.x - b.x, 2.0 * b.y - a.y);
                if third.x <= 0.0 {
                    return Err(Error::Precondition(format!(
                        "third point offset {} not positive; pair too wide for the \
                         noncharacteristic construction",
                        third.x
                    )));
                }
                steps.push(TransformStep::ThirdPoint(third));
                vec![(a, third), (b, third)]
            }
        }
    };
    Ok(Normalization { case, pairs, steps })
}

/// The characteristic chain `u -> v` for `y <= y'`, `|x| <= x'`.
///
/// The pure characteristic pair `x = x' = 0` is accepted with `tau = 0`; the
/// construction degenerates gracefully there even though the orientation
/// assumption asks for `0 < |x|`.
pub fn char_chain(u: SurfacePoint, v: SurfacePoint, fp: FrameParams) -> Result<ChainSpec> {
    if v.y < u.y {
        return Err(Error::Precondition(format!(
            "characteristic chain needs y <= y', got {} > {}",
            u.y, v.y
        )));
    }
    if v.x < 0.0 || u.x.abs() > v.x {
        return Err(Error::Precondition(format!(
            "characteristic chain needs |x| <= x', got x = {}, x' = {}",
            u.x, v.x
        )));
    }
    let a = fp.alpha();
    let dy = v.y - u.y;
    let tau = if v.x == 0.0 {
        0.0
    } else {
        pow_abs(2.0 * u.x, a) * dy / (pow_abs(2.0 * v.x, a) - pow_abs(u.x, a))
    };
    let wx = pow_abs(u.x, a);
    let half = 0.5 * u.x.abs();
    let two_a = pow_abs(2.0, a);
    let z_mid = wx * dy;
    let z_high = wx * (dy + tau / two_a);
    let points = vec![
        SpacePoint::new(u.x, u.y, 0.0),
        SpacePoint::new(u.x, v.y, z_mid),
        SpacePoint::new(half, v.y, z_mid),
        SpacePoint::new(half, v.y + tau, z_high),
        SpacePoint::new(v.x, v.y + tau, z_high),
        SpacePoint::new(v.x, v.y, 0.0),
    ];
    let to_half = half - u.x;
    let segments = vec![
        ChainSegment {
            generator: Generator::X2Pos,
            duration: dy,
        },
        ChainSegment {
            generator: if to_half >= 0.0 {
                Generator::X1Pos
            } else {
                Generator::X1Neg
            },
            duration: to_half.abs(),
        },
        ChainSegment {
            generator: Generator::X2Pos,
            duration: tau,
        },
        ChainSegment {
            generator: Generator::X1Pos,
            duration: v.x - half,
        },
        ChainSegment {
            generator: Generator::X2Neg,
            duration: tau,
        },
    ];
    Ok(ChainSpec {
        case: CaseLabel::Characteristic,
        points,
        segments,
        sigma: None,
        tau,
        z_prime: None,
    })
}

/// Vertical budget accumulated by the first two noncharacteristic moves:
/// `z' = (y' - y) x^alpha + int_{x'}^{x} (x^alpha - t^alpha) dt`, positive
/// whenever `y' > y` or `x > x' > 0`.
pub fn nonchar_z_prime(x: f64, x_p: f64, dy: f64, fp: FrameParams) -> f64 {
    let a = fp.alpha();
    let sigma = dy + x - x_p;
    let z = sigma * pow_abs(x, a) - (pow_abs(x, a + 1.0) - pow_abs(x_p, a + 1.0)) / (a + 1.0);
    // Algebraically nonnegative on the admissible set; round-off may leave a
    // tiny negative residue for degenerate pairs.
    if z < 0.0 && z > -1e-12 * (1.0 + pow_abs(x, a + 1.0)) {
        0.0
    } else {
        z
    }
}

/// The unique `tau >= 0` with `tau ((x' + tau)^alpha - x'^alpha) = z'`,
/// where `z'` is the vertical budget of the pair `(x, x', dy)`.
pub fn tau_nonchar(x: f64, x_p: f64, dy: f64, fp: FrameParams, cfg: &ChainConfig) -> Result<f64> {
    if !(x_p > 0.0) || x < x_p || dy < 0.0 {
        return Err(Error::Precondition(format!(
            "tau solve needs x >= x' > 0 and dy >= 0, got x = {x}, x' = {x_p}, dy = {dy}"
        )));
    }
    let z_prime = nonchar_z_prime(x, x_p, dy, fp);
    if z_prime < 0.0 {
        return Err(Error::Precondition(format!(
            "negative vertical budget {z_prime}"
        )));
    }
    if z_prime == 0.0 {
        return Ok(0.0);
    }
    let a = fp.alpha();
    let wxp = pow_abs(x_p, a);
    let g = |t: f64| t * (pow_abs(x_p + t, a) - wxp) - z_prime;
    // Both asymptotic sizes of the root seed the bracket.
    let guess = pow_recip(z_prime, a + 1.0)
        .min((z_prime / (a * pow_abs(x_p, a - 1.0))).sqrt())
        .max(f64::MIN_POSITIVE);
    let tau = solve_increasing(g, guess)?;
    let residual = (tau * (pow_abs(x_p + tau, a) - wxp) - z_prime).abs();
    if residual > cfg.root_tol * (1.0 + z_prime) {
        return Err(Error::InvariantViolation(format!(
            "tau root residual {residual} exceeds tolerance"
        )));
    }
    Ok(tau)
}

/// The noncharacteristic chain `u -> v` for `y <= y'`, `x >= x' > 0`.
pub fn nonchar_chain(
    u: SurfacePoint,
    v: SurfacePoint,
    fp: FrameParams,
    cfg: &ChainConfig,
) -> Result<ChainSpec> {
    if v.y < u.y {
        return Err(Error::Precondition(format!(
            "noncharacteristic chain needs y <= y', got {} > {}",
            u.y, v.y
        )));
    }
    if !(v.x > 0.0) || u.x < v.x {
        return Err(Error::Precondition(format!(
            "noncharacteristic chain needs x >= x' > 0, got x = {}, x' = {}",
            u.x, v.x
        )));
    }
    let a = fp.alpha();
    let dy = v.y - u.y;
    let sigma = dy + u.x - v.x;
    let z_prime = nonchar_z_prime(u.x, v.x, dy, fp);
    let tau = tau_nonchar(u.x, v.x, dy, fp, cfg)?;
    let wx = pow_abs(u.x, a);
    let wxp = pow_abs(v.x, a);
    let wxt = pow_abs(v.x + tau, a);
    let rect = (pow_abs(v.x + tau, a + 1.0) - pow_abs(v.x, a + 1.0)) / (a + 1.0);
    let points = vec![
        SpacePoint::new(u.x, u.y, 0.0),
        SpacePoint::new(u.x, u.y + sigma, wx * sigma),
        SpacePoint::new(v.x, v.y, z_prime),
        SpacePoint::new(v.x, v.y + tau, z_prime + wxp * tau),
        SpacePoint::new(v.x + tau, v.y + 2.0 * tau, z_prime + wxp * tau + rect),
        SpacePoint::new(v.x + tau, v.y + tau, z_prime + wxp * tau + rect - wxt * tau),
        SpacePoint::new(v.x, v.y, 0.0),
    ];
    let segments = vec![
        ChainSegment {
            generator: Generator::X2Pos,
            duration: sigma,
        },
        ChainSegment {
            generator: Generator::ZNeg,
            duration: u.x - v.x,
        },
        ChainSegment {
            generator: Generator::X2Pos,
            duration: tau,
        },
        ChainSegment {
            generator: Generator::ZPos,
            duration: tau,
        },
        ChainSegment {
            generator: Generator::X2Neg,
            duration: tau,
        },
        ChainSegment {
            generator: Generator::ZNeg,
            duration: tau,
        },
    ];
    Ok(ChainSpec {
        case: CaseLabel::Noncharacteristic,
        points,
        segments,
        sigma: Some(sigma),
        tau,
        z_prime: Some(z_prime),
    })
}

/// Chain metrics for one boundary pair.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChainAudit {
    pub endpoint_err: f64,
    pub max_z_violation: f64,
    pub length: f64,
    pub length_over_delta: f64,
    pub chains: Vec<ChainSpec>,
}

/// Normalizes the pair, builds the applicable chain for each normalized
/// pair, and reports closure, confinement, and length metrics.
pub fn chain_audit(
    u: SurfacePoint,
    v: SurfacePoint,
    fp: FrameParams,
    cfg: &ChainConfig,
) -> Result<ChainAudit> {
    let norm = normalize(u, v, fp, cfg)?;
    let mut chains = Vec::with_capacity(norm.pairs.len());
    for &(s, t) in &norm.pairs {
        let chain = match norm.case {
            CaseLabel::Characteristic => char_chain(s, t, fp)?,
            CaseLabel::Noncharacteristic | CaseLabel::Mixed => nonchar_chain(s, t, fp, cfg)?,
        };
        chains.push(chain);
    }
    let mut endpoint_err = 0.0f64;
    let mut min_z = f64::INFINITY;
    let mut length = 0.0;
    for chain in &chains {
        endpoint_err = endpoint_err.max(chain.max_replay_error(fp));
        min_z = min_z.min(chain.min_z_dense(fp, 32));
        length += chain.cc_length();
    }
    let d = delta_plane(u, v, fp);
    Ok(ChainAudit {
        endpoint_err,
        max_z_violation: (-min_z).max(0.0),
        length,
        length_over_delta: if d > 0.0 { length / d } else { 0.0 },
        chains,
    })
}

/// Chain-length band: `length / delta_plane` stays below this for gated
/// pairs at the default `eps0 = 0.1`.
///
/// Counting segment durations in the worst gated corner: the characteristic
/// gate allows offsets up to `d / eps0`, a third-point rewrite doubles the
/// target offset, so the two chains travel at most `4 d / eps0` in `x`;
/// the vertical legs contribute at most `15 d` (swap budget plus the solved
/// times, each below twice its pair's `y` gap). That is `55 d` at the
/// default gate; observed maxima over random seeds stay near `21 d`.
pub fn chain_length_band(alpha: f64) -> f64 {
    let _ = alpha;
    64.0
}

/// Line integral of the X-gradient norm along the chain, in control
/// arclength: `sum_j int_0^{T_j} |Xf(gamma_j(t))| |e_j| dt`.
pub fn gradient_line_integral(f: &dyn ScalarField, chain: &ChainSpec, fp: FrameParams) -> f64 {
    let mut total = 0.0;
    for (j, seg) in chain.segments.iter().enumerate() {
        if seg.duration == 0.0 {
            continue;
        }
        let base = chain.points[j];
        let cs = seg.control_segment();
        let speed = cs.euclid_speed();
        let integrand = |t: f64| {
            let part = ControlSegment::new(cs.e1(), cs.e2(), t);
            let mut p = flow(base, &part, fp);
            // Chains stay in the closed half-space up to round-off.
            if p.z < 0.0 {
                p.z = 0.0;
            }
            let (g1, g2) = crate::trace::x_gradient_unchecked(f, p, fp);
            g1.hypot(g2) * speed
        };
        let t_end = seg.duration;
        let probe = [0.0, 0.25, 0.5, 0.75, 1.0]
            .iter()
            .map(|&s| integrand(s * t_end))
            .fold(0.0f64, f64::max);
        let tol = 1e-9 * (1.0 + probe * t_end);
        total += adaptive_simpson(integrand, 0.0, t_end, tol);
    }
    total
}

/// One row of the monotonicity report.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct MonotonicityEntry {
    pub eps0: f64,
    /// Max of `|d/dx' (x'^alpha tau_hat)| / x'^alpha` over the grid.
    pub tau_weighted_slope: f64,
    /// Max of `|phi'(t) + 1|` for the reparametrization map over the grid.
    pub reparam_deviation: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MonotonicityReport {
    pub alpha: f64,
    pub entries: Vec<MonotonicityEntry>,
    pub tau_slope_decreasing: bool,
    pub reparam_decreasing: bool,
}

/// Grid for the finite-difference monotonicity audits.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MonotonicityGrid {
    pub eps0_values: Vec<f64>,
    pub offsets: Vec<(f64, f64)>,
    pub x_factors: Vec<f64>,
    pub fd_step_rel: f64,
}

impl Default for MonotonicityGrid {
    fn default() -> Self {
        Self {
            eps0_values: vec![0.1, 0.05, 0.01],
            offsets: vec![(1.0, 0.0), (0.0, 1.0), (1.0, 1.0), (0.3, 0.7), (0.7, 0.3)],
            x_factors: vec![1.5, 2.0, 4.0, 8.0],
            fd_step_rel: 1e-5,
        }
    }
}

/// Vertical budget in offset coordinates `h = (x - x', sqrt((y'-y) x))`:
/// `z_hat = h2^2 (h1+x')^(alpha-1) + h1 (h1+x')^alpha
///          - ((x'+h1)^(alpha+1) - x'^(alpha+1)) / (alpha+1)`.
pub fn offset_z_prime(x_p: f64, h1: f64, h2: f64, fp: FrameParams) -> f64 {
    let a = fp.alpha();
    let x = x_p + h1;
    h2 * h2 * pow_abs(x, a - 1.0) + h1 * pow_abs(x, a)
        - (pow_abs(x, a + 1.0) - pow_abs(x_p, a + 1.0)) / (a + 1.0)
}

fn tau_hat(x_p: f64, h1: f64, h2: f64, fp: FrameParams) -> f64 {
    let z = offset_z_prime(x_p, h1, h2, fp).max(0.0);
    if z == 0.0 {
        return 0.0;
    }
    let a = fp.alpha();
    let wxp = pow_abs(x_p, a);
    let g = |t: f64| t * (pow_abs(x_p + t, a) - wxp) - z;
    let guess = pow_recip(z, a + 1.0).min((z / (a * pow_abs(x_p, a - 1.0))).sqrt());
    solve_increasing(g, guess.max(f64::MIN_POSITIVE)).unwrap_or(0.0)
}

/// Time-reparametrization map of the second noncharacteristic segment:
/// `phi(t) = (sigma_hat x^alpha + ((x-t)^(alpha+1) - x^(alpha+1))/(alpha+1))
///           / (x - t)^alpha` with `sigma_hat = h2^2/x + h1`.
fn reparam_phi(x: f64, h1: f64, h2: f64, t: f64, fp: FrameParams) -> f64 {
    let a = fp.alpha();
    let sigma_hat = h2 * h2 / x + h1;
    let xt = x - t;
    (sigma_hat * pow_abs(x, a) + (pow_abs(xt, a + 1.0) - pow_abs(x, a + 1.0)) / (a + 1.0))
        / pow_abs(xt, a)
}

/// Finite-difference audits of the two smallness estimates behind the
/// noncharacteristic chain: the weighted slope of the solved time and the
/// deviation of the time reparametrization from a shift. Both maxima must
/// decrease as `eps0` does.
pub fn monotonicity_audits(fp: FrameParams, grid: &MonotonicityGrid) -> Result<MonotonicityReport> {
    let mut entries = Vec::new();
    for &eps0 in &grid.eps0_values {
        if !(eps0 > 0.0 && eps0 < 1.0) {
            return Err(Error::InvalidParameter {
                name: "eps0",
                value: eps0,
            });
        }
        let mut slope_max: f64 = 0.0;
        let mut reparam_max: f64 = 0.0;
        for &(h1, h2) in &grid.offsets {
            let hn = h1.hypot(h2);
            for &fac in &grid.x_factors {
                let x_p = hn / eps0 * fac;
                // Weighted slope of tau_hat in the base offset.
                let dx = grid.fd_step_rel * x_p;
                let a = fp.alpha();
                let g_plus = pow_abs(x_p + dx, a) * tau_hat(x_p + dx, h1, h2, fp);
                let g_minus = pow_abs(x_p - dx, a) * tau_hat(x_p - dx, h1, h2, fp);
                let slope = ((g_plus - g_minus) / (2.0 * dx)).abs() / pow_abs(x_p, a);
                slope_max = slope_max.max(slope);
                // Reparametrization deviation along the segment.
                if h1 > 0.0 {
                    let x = x_p + h1;
                    for k in 0..8 {
                        let t = h1 * (k as f64 + 0.5) / 8.0;
                        let dt = grid.fd_step_rel * h1;
                        let d = (reparam_phi(x, h1, h2, t + dt, fp)
                            - reparam_phi(x, h1, h2, t - dt, fp))
                            / (2.0 * dt);
                        reparam_max = reparam_max.max((d + 1.0).abs());
                    }
                }
            }
        }
        entries.push(MonotonicityEntry {
            eps0,
            tau_weighted_slope: slope_max,
            reparam_deviation: reparam_max,
        });
    }
    let mut sorted = entries.clone();
    sorted.sort_by(|a, b| b.eps0.total_cmp(&a.eps0));
    let tau_dec = sorted
        .windows(2)
        .all(|w| w[1].tau_weighted_slope < w[0].tau_weighted_slope);
    let rep_dec = sorted
        .windows(2)
        .all(|w| w[1].reparam_deviation < w[0].reparam_deviation);
    Ok(MonotonicityReport {
        alpha: fp.alpha(),
        entries,
        tau_slope_decreasing: tau_dec,
        reparam_decreasing: rep_dec,
    })
}
