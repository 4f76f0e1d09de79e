//! Elementary functions via `libm`, so results do not depend on the
//! platform's libm and the crate builds without `std`.

#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

#[inline]
pub fn cos(x: f64) -> f64 {
    libm::cos(x)
}

#[inline]
pub fn sin(x: f64) -> f64 {
    libm::sin(x)
}

/// `x^(1/d)` with an exact cube root for `d = 3`.
#[inline]
pub fn root(x: f64, d: u32) -> f64 {
    match d {
        1 => x,
        2 => libm::sqrt(x),
        3 => libm::cbrt(x),
        _ => libm::pow(x, 1.0 / d as f64),
    }
}
