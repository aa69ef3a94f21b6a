//! Thin wrappers over `libm` so the rest of the crate reads like std code.

pub(crate) const TAU: f64 = core::f64::consts::TAU;

#[inline]
pub(crate) fn sin(x: f64) -> f64 {
    libm::sin(x)
}

#[inline]
pub(crate) fn cos(x: f64) -> f64 {
    libm::cos(x)
}

#[inline]
pub(crate) fn sinh(x: f64) -> f64 {
    libm::sinh(x)
}

#[inline]
pub(crate) fn cosh(x: f64) -> f64 {
    libm::cosh(x)
}

#[inline]
pub(crate) fn asinh(x: f64) -> f64 {
    libm::asinh(x)
}

#[inline]
pub(crate) fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub(crate) fn cbrt(x: f64) -> f64 {
    libm::cbrt(x)
}

#[inline]
pub(crate) fn floor(x: f64) -> f64 {
    libm::floor(x)
}

#[inline]
pub(crate) fn ceil(x: f64) -> f64 {
    libm::ceil(x)
}

#[inline]
pub(crate) fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub(crate) fn exp(x: f64) -> f64 {
    libm::exp(x)
}

/// `x - p * floor(x / p)`, folded into `[0, p)`.
#[inline]
pub(crate) fn rem_period(x: f64, p: f64) -> f64 {
    let r = x - p * floor(x / p);
    if r >= p || r < 0.0 {
        0.0
    } else {
        r
    }
}

/// Fractional part in `[0, 1)`.
#[inline]
pub(crate) fn fract(x: f64) -> f64 {
    rem_period(x, 1.0)
}
