//! Bracketing root finder for increasing scalar maps on `[0, inf)`.
//!
//! Every scalar equation in the crate has the form `g(t) = target` with `g`
//! strictly increasing from `g(0) <= target`, so bracketing is certain:
//! double an initial guess until the sign changes, then bisect to float
//! collapse with a secant polish.

use crate::error::{Error, Result};

/// Solves `g(t) = 0` for increasing `g` with `g(0) <= 0`.
///
/// `hi_guess` seeds the bracket search (any positive value works; a good
/// guess just saves doublings).
pub fn solve_increasing<G: Fn(f64) -> f64>(g: G, hi_guess: f64) -> Result<f64> {
    let g0 = g(0.0);
    if g0 == 0.0 {
        return Ok(0.0);
    }
    if g0 > 0.0 {
        return Err(Error::Precondition(format!(
            "solve_increasing requires g(0) <= 0, got {g0}"
        )));
    }
    let mut lo = 0.0f64;
    let mut hi = if hi_guess.is_finite() && hi_guess > 0.0 {
        hi_guess
    } else {
        1.0
    };
    let mut ghi = g(hi);
    let mut doublings = 0;
    while ghi < 0.0 {
        lo = hi;
        hi *= 2.0;
        doublings += 1;
        if doublings > 2000 || !hi.is_finite() {
            return Err(Error::Bracketing(format!(
                "no sign change up to {hi} (g = {ghi})"
            )));
        }
        ghi = g(hi);
    }
    if ghi == 0.0 {
        return Ok(hi);
    }
    // Bisection to float collapse.
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let gm = g(mid);
        if gm == 0.0 {
            return Ok(mid);
        }
        if gm < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // Secant polish between the collapsed endpoints.
    let glo = g(lo);
    let ghi = g(hi);
    if ghi != glo {
        let t = lo - glo * (hi - lo) / (ghi - glo);
        if t.is_finite() && t >= lo && t <= hi {
            return Ok(t);
        }
    }
    Ok(0.5 * (lo + hi))
}
