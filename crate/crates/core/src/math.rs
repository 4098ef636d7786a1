//! Float helpers routed through `libm` so results do not depend on the
//! platform math library.

#[inline]
pub(crate) fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

/// `|t|^e * sign(t)`, with the `t = 0` term defined as `0` for every `e > 0`.
#[inline]
pub(crate) fn signed_pow(t: f64, e: f64) -> f64 {
    if t == 0.0 {
        0.0
    } else if e == 1.0 {
        t
    } else {
        libm::copysign(libm::pow(libm::fabs(t), e), t)
    }
}

#[inline]
pub(crate) fn abs_pow(t: f64, e: f64) -> f64 {
    let a = libm::fabs(t);
    if e == 1.0 {
        a
    } else if e == 2.0 {
        a * a
    } else {
        libm::pow(a, e)
    }
}

#[inline]
pub(crate) fn exp(x: f64) -> f64 {
    libm::exp(x)
}
