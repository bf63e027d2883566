//! Small numeric kernels shared across modules.
//!
//! Powers go through `exp`/`log` only for genuinely non-integer exponents;
//! the integer and half-integer exponents that dominate the frame grids take
//! multiplication/sqrt fast paths.

/// `|x|^a` for `a >= 0`.
pub(crate) fn pow_abs(x: f64, a: f64) -> f64 {
    let t = x.abs();
    if a == 0.0 {
        return 1.0;
    }
    if a == 1.0 {
        return t;
    }
    if a == 2.0 {
        return t * t;
    }
    if a == 3.0 {
        return t * t * t;
    }
    if a == 4.0 {
        let s = t * t;
        return s * s;
    }
    if a == 0.5 {
        return t.sqrt();
    }
    if a == 1.5 {
        return t * t.sqrt();
    }
    if a == 2.5 {
        return t * t * t.sqrt();
    }
    if a.fract() == 0.0 && (1.0..=32.0).contains(&a) {
        return t.powi(a as i32);
    }
    t.powf(a)
}

/// `t^(1/n)` for `t >= 0`, `n >= 1`.
pub(crate) fn pow_recip(t: f64, n: f64) -> f64 {
    if n == 1.0 {
        t
    } else if n == 2.0 {
        t.sqrt()
    } else if n == 3.0 {
        t.cbrt()
    } else if n == 4.0 {
        t.sqrt().sqrt()
    } else {
        t.powf(1.0 / n)
    }
}

/// Signed antiderivative of `|w|^a`: `F(w) = sign(w) |w|^(a+1) / (a+1)`.
pub(crate) fn abs_pow_antideriv(w: f64, a: f64) -> f64 {
    // signum(0.0) is 1.0, but the factor |0|^(a+1) = 0 keeps F(0) = 0.
    w.signum() * pow_abs(w, a + 1.0) / (a + 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pow_abs_matches_powf() {
        for &a in &[1.0, 1.5, 2.0, 2.5, 3.0, 3.7, 0.5, 7.0] {
            for &x in &[-3.25f64, -1.0, 0.0, 0.7, 2.0, 10.0] {
                let got = pow_abs(x, a);
                let want = x.abs().powf(a);
                assert!(
                    (got - want).abs() <= 1e-13 * (1.0 + want),
                    "a={a} x={x}: {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn antideriv_is_odd_and_zero_at_zero() {
        assert_eq!(abs_pow_antideriv(0.0, 2.0), 0.0);
        let a = 1.5;
        let f = abs_pow_antideriv(1.3, a);
        let g = abs_pow_antideriv(-1.3, a);
        assert_eq!(f, -g);
    }
}
