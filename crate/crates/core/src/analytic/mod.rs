//! Spectral representation of real-analytic functions and the small amount of
//! calculus the renormalisation code needs on top of it.

pub mod cheb;
pub mod cheb2;
pub mod geometry;
pub mod remainder;
pub mod roots;

pub use cheb::{compose1, probes, Fn1};
pub use cheb2::{Basis2, Fn2};
pub use geometry::{Affine2, Box2, Interval, M2, V2};
pub use remainder::{
    composed_remainder, composition_first_variation, fd_jacobian, remainder_decomposition, Map2, Quadratic2,
    RemainderParts,
};

use crate::error::{Error, Result};

/// f'''/f' − (3/2)(f''/f')².
pub fn schwarzian(f: &Fn1, x: f64) -> Result<f64> {
    let d1 = f.derivative();
    let d2 = d1.derivative();
    let d3 = d2.derivative();
    schwarzian_from(d1.eval(x), d2.eval(x), d3.eval(x), x)
}

pub(crate) fn schwarzian_from(d1: f64, d2: f64, d3: f64, x: f64) -> Result<f64> {
    if d1.abs() <= 1e-12 {
        return Err(Error::CriticalPoint(x));
    }
    let r = d2 / d1;
    Ok(d3 / d1 - 1.5 * r * r)
}

/// |J||T| / (|L||R|) where L, R are the components of T \ J.
pub fn cross_ratio(j: Interval, t: Interval) -> Result<f64> {
    let l = j.lo - t.lo;
    let r = t.hi - j.hi;
    if l <= 0.0 || r <= 0.0 {
        return Err(Error::DegenerateGap);
    }
    Ok(j.len() * t.len() / (l * r))
}
