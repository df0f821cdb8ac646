//! One-dimensional search: golden-section extremization, bisection and a
//! bracketing secant (Illinois) root finder.

use crate::error::{Error, Result};

/// `(3 - sqrt 5) / 2`, the golden-section step as a fraction of the bracket.
const GOLDEN: f64 = 0.381_966_011_250_105_1;

/// Location and value of an extremum found on a bracket.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extremum {
    pub x: f64,
    pub value: f64,
}

/// Maximizes a unimodal `f` on `[lo, hi]` by golden-section search until the
/// bracket is narrower than `xtol`. The endpoints are evaluated too, so a
/// maximum sitting on the boundary is returned exactly.
pub fn golden_section_max<F>(mut f: F, lo: f64, hi: f64, xtol: f64) -> Extremum
where
    F: FnMut(f64) -> f64,
{
    let (mut a, mut b) = (lo, hi);
    let mut x1 = a + GOLDEN * (b - a);
    let mut x2 = b - GOLDEN * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while b - a > xtol {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = b - GOLDEN * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = a + GOLDEN * (b - a);
            f1 = f(x1);
        }
        if x1 >= x2 {
            // bracket collapsed below the spacing of representable points
            break;
        }
    }
    let mut best = if f1 >= f2 {
        Extremum { x: x1, value: f1 }
    } else {
        Extremum { x: x2, value: f2 }
    };
    for x in [lo, hi] {
        let v = f(x);
        if v > best.value {
            best = Extremum { x, value: v };
        }
    }
    best
}

/// Minimizes a unimodal `f` on `[lo, hi]`; see [`golden_section_max`].
pub fn golden_section_min<F>(mut f: F, lo: f64, hi: f64, xtol: f64) -> Extremum
where
    F: FnMut(f64) -> f64,
{
    let e = golden_section_max(|x| -f(x), lo, hi, xtol);
    Extremum {
        x: e.x,
        value: -e.value,
    }
}

/// Bisection on a sign change of `g` over `[lo, hi]`. `g(lo)` and `g(hi)`
/// must have opposite signs (or one of them be zero).
pub fn bisect<G>(mut g: G, lo: f64, hi: f64, xtol: f64) -> Result<f64>
where
    G: FnMut(f64) -> f64,
{
    let (mut a, mut b) = (lo, hi);
    let ga = g(a);
    let gb = g(b);
    if ga == 0.0 {
        return Ok(a);
    }
    if gb == 0.0 {
        return Ok(b);
    }
    if ga.signum() == gb.signum() {
        return Err(Error::InvalidArgument(format!(
            "no sign change on [{lo}, {hi}]: g = {ga}, {gb}"
        )));
    }
    let neg_at_a = ga < 0.0;
    for _ in 0..2000 {
        let m = 0.5 * (a + b);
        if b - a <= xtol || m <= a || m >= b {
            return Ok(m);
        }
        let gm = g(m);
        if gm == 0.0 {
            return Ok(m);
        }
        if (gm < 0.0) == neg_at_a {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

/// Illinois (modified regula falsi) root finder on a sign-changing bracket.
/// Stops when the bracket or the step is below `rtol * |x|`.
pub fn illinois<G>(mut g: G, lo: f64, hi: f64, rtol: f64, max_iter: usize) -> Result<f64>
where
    G: FnMut(f64) -> f64,
{
    let (mut a, mut b) = (lo, hi);
    let (mut ga, mut gb) = (g(a), g(b));
    if ga == 0.0 {
        return Ok(a);
    }
    if gb == 0.0 {
        return Ok(b);
    }
    if ga.signum() == gb.signum() {
        return Err(Error::InvalidArgument(format!(
            "no sign change on [{lo}, {hi}]"
        )));
    }
    let mut side = 0i8;
    for _ in 0..max_iter {
        let c = (a * gb - b * ga) / (gb - ga);
        let gc = g(c);
        let scale = c.abs().max(f64::MIN_POSITIVE);
        if gc == 0.0 || (b - a).abs() <= rtol * scale {
            return Ok(c);
        }
        if gc.signum() == gb.signum() {
            if (c - b).abs() <= rtol * scale {
                return Ok(c);
            }
            b = c;
            gb = gc;
            if side == -1 {
                ga *= 0.5;
            }
            side = -1;
        } else {
            if (c - a).abs() <= rtol * scale {
                return Ok(c);
            }
            a = c;
            ga = gc;
            if side == 1 {
                gb *= 0.5;
            }
            side = 1;
        }
    }
    Err(Error::NoConvergence {
        what: "bracketing secant",
        iterations: max_iter,
    })
}

/// Five-point central difference of `f` at `x` with step `h`.
pub fn central_derivative<F>(f: &mut F, x: f64, h: f64) -> f64
where
    F: FnMut(f64) -> f64,
{
    (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h)
}
