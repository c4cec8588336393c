#![allow(dead_code)]

pub mod oracle;

use std::sync::OnceLock;

use renorm_core::cantor::{tuned_tower, RenormTower};
use renorm_core::fixedpoint::{operator_spectrum, solve_fixed_point, superstable_parameter, FixedPointResult, SpectrumResult};
use renorm_core::henon::{Orientation, Thickening};
use renorm_core::unimodal::{UnimodalMap, UnimodalPermutation};
use renorm_core::Config;

pub fn doubling() -> &'static (FixedPointResult, SpectrumResult) {
    static FP: OnceLock<(FixedPointResult, SpectrumResult)> = OnceLock::new();
    FP.get_or_init(|| {
        let cfg = Config::default();
        let v = UnimodalPermutation::doubling();
        let fp = solve_fixed_point(&v, &UnimodalMap::logistic(3.57).unwrap(), 1e-9, &cfg).unwrap();
        let sp = operator_spectrum(&fp, &v, &cfg).unwrap();
        (fp, sp)
    })
}

pub fn period_three() -> &'static FixedPointResult {
    static FP: OnceLock<FixedPointResult> = OnceLock::new();
    FP.get_or_init(|| {
        let cfg = Config::default();
        let v = UnimodalPermutation::period_three();
        let a = superstable_parameter(&v, &cfg).unwrap();
        solve_fixed_point(&v, &UnimodalMap::logistic(a).unwrap(), 1e-9, &cfg).unwrap()
    })
}

/// Doubling tower for F_0 = (f_* + t·v, ε) tuned onto the stable manifold,
/// extended by F_*.
pub fn tuned(eps: impl Fn(f64, f64) -> f64, depth: usize) -> RenormTower {
    let cfg = Config::default();
    let (fp, sp) = doubling();
    let e = Thickening::from_fn(eps, &cfg).unwrap();
    let v = UnimodalPermutation::doubling();
    let t = tuned_tower(fp, sp, &v, &e, Orientation::Preserving, depth, &cfg).unwrap();
    t.tower.with_limit(&fp.f_star, &cfg).unwrap()
}

/// ε = 1e−2·y, depth 7, with its tip.
pub fn standard() -> &'static (RenormTower, renorm_core::cantor::Tip) {
    static T: OnceLock<(RenormTower, renorm_core::cantor::Tip)> = OnceLock::new();
    T.get_or_init(|| {
        let t = tuned(|_, y| 1e-2 * y, 7);
        let tip = renorm_core::cantor::tip(&t).unwrap();
        (t, tip)
    })
}

/// The degenerate tower of the doubling fixed point.
pub fn degenerate(depth: usize) -> RenormTower {
    let cfg = Config::default();
    let f = renorm_core::henon::HenonLikeMap::degenerate(doubling().0.f_star.clone(), &cfg);
    renorm_core::cantor::build_tower(&f, &UnimodalPermutation::doubling(), depth, &cfg).unwrap()
}
