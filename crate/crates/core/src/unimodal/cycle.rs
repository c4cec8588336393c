use serde::{Deserialize, Serialize};

use super::{UnimodalMap, UnimodalPermutation};
use crate::analytic::{roots, Fn1, Interval};
use crate::config::Config;
use crate::error::{Error, Result};

/// Renormalisation cycle of a unimodal map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenormCycle {
    pub p: usize,
    /// J^0, bounded by `boundary` and `preimage`.
    pub central: Interval,
    /// J^w: the component of f^{-(p-w)}(J^0) containing f^w(J^0).
    pub intervals: Vec<Interval>,
    /// f^w(J^0).
    pub images: Vec<Interval>,
    /// The p-periodic point on ∂J^0.
    pub boundary: f64,
    /// The other point of ∂J^0, with the same image as `boundary`.
    pub preimage: f64,
}

impl RenormCycle {
    /// h(x) = boundary + (preimage − boundary)·x maps J onto J^0.
    pub fn h(&self, x: f64) -> f64 {
        self.boundary + (self.preimage - self.boundary) * x
    }

    pub fn h_inv(&self, y: f64) -> f64 {
        (y - self.boundary) / (self.preimage - self.boundary)
    }

    /// Scaling ratio |J^0| / |J|.
    pub fn sigma(&self) -> f64 {
        self.central.len()
    }
}

/// Finds the renormalisation cycle of type υ, if f has one.
pub fn detect_renormalisable(
    f: &UnimodalMap,
    v: &UnimodalPermutation,
    cfg: &Config,
) -> Result<Option<RenormCycle>> {
    let p = v.p();
    let g = |x: f64| {
        let (y, d) = f.iterate_d(x, p);
        (y - x, d - 1.0)
    };
    let n = cfg.orbit_scan;
    let xs: Vec<f64> = (0..=n).map(|k| k as f64 / n as f64).collect();
    let gs: Vec<f64> = xs.iter().map(|&x| g(x).0).collect();
    let mut periodic = Vec::new();
    for k in 0..n {
        if gs[k] == 0.0 {
            periodic.push(xs[k]);
        } else if gs[k] * gs[k + 1] < 0.0 {
            if let Some(r) = roots::bracketed_newton(g, xs[k], xs[k + 1]) {
                periodic.push(r);
            }
        }
    }
    let mut found: Vec<RenormCycle> = Vec::new();
    for a in periodic {
        if a < 1e-9 || (a - f.c0()).abs() < 1e-9 {
            continue;
        }
        let (_, mult) = f.iterate_d(a, p);
        if mult <= 1.0 + cfg.expansion_margin {
            continue;
        }
        if let Some(c) = build_cycle(f, v, a, cfg) {
            if !found.iter().any(|o| o.central.hausdorff(&c.central) < 1e-8) {
                found.push(c);
            }
        }
    }
    match found.len() {
        0 => Ok(None),
        1 => Ok(found.pop()),
        _ => Err(Error::AmbiguousCycle(found.iter().map(|c| c.boundary).collect())),
    }
}

fn build_cycle(f: &UnimodalMap, v: &UnimodalPermutation, a: f64, cfg: &Config) -> Option<RenormCycle> {
    let p = v.p();
    let ahat = f.branch_preimage(f.eval(a), a < f.c0())?;
    let central = Interval::hull(a, ahat);
    let tol = 1e-10;
    let m = cfg.invariance_samples;
    let inside = (0..=m)
        .map(|k| central.lo + central.len() * k as f64 / m as f64)
        .chain(std::iter::once(f.c0()))
        .all(|x| central.contains(f.iterate(x, p), tol));
    if !inside {
        return None;
    }
    let mut intervals = vec![central];
    let mut images = vec![central];
    let mut image = central;
    for w in 1..p {
        image = f.interval_image(image);
        images.push(image);
        let k = p - w;
        let fd = |x: f64| f.iterate_d(x, k);
        let mut ends = Vec::new();
        for target in [a, ahat] {
            ends.extend(roots::find_roots(
                |x| {
                    let (y, d) = fd(x);
                    (y - target, d)
                },
                0.0,
                1.0,
                cfg.root_resolution,
            ));
        }
        let lo = ends.iter().copied().filter(|&r| r <= image.lo + 1e-9).fold(0.0, f64::max);
        let hi = ends.iter().copied().filter(|&r| r >= image.hi - 1e-9).fold(1.0, f64::min);
        if lo >= hi {
            return None;
        }
        intervals.push(Interval { lo, hi });
    }
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&i, &j| intervals[i].lo.partial_cmp(&intervals[j].lo).unwrap());
    for k in 1..p {
        if intervals[order[k - 1]].overlap(&intervals[order[k]]) > 1e-9 {
            return None;
        }
    }
    let mut pos = vec![0; p];
    for (rank, &w) in order.iter().enumerate() {
        pos[w] = rank;
    }
    if (0..p).any(|w| pos[(w + 1) % p] != v.apply(pos[w])) {
        return None;
    }
    Some(RenormCycle { p, central, intervals, images, boundary: a, preimage: ahat })
}

/// Samples of x ↦ h1⁻¹ f^p h1(x) with h1(0) = e0, h1(1) = e1, interpolated at
/// the given degree.
pub fn rescaled_return(f: &UnimodalMap, p: usize, e0: f64, e1: f64, degree: usize) -> Fn1 {
    Fn1::from_fn(Interval::UNIT, degree, |x| {
        (f.iterate(e0 + (e1 - e0) * x, p) - e0) / (e1 - e0)
    })
}

/// R f = h⁻¹ ∘ f^p ∘ h, with the orientation of h chosen so the result is in U.
pub fn renormalise_unimodal(f: &UnimodalMap, cycle: &RenormCycle, cfg: &Config) -> Result<UnimodalMap> {
    let (a, b) = (cycle.boundary, cycle.preimage);
    let mut valid = Vec::new();
    for (e0, e1) in [(a, b), (b, a)] {
        let g = rescaled_return(f, cycle.p, e0, e1, cfg.degree_1d);
        if g.check_tail(cfg.tail_tol).is_err() {
            continue;
        }
        if let Ok(m) = UnimodalMap::new(g, cfg) {
            if m.check_membership(cfg).is_ok() {
                valid.push(m);
            }
        }
    }
    if valid.len() != 1 {
        return Err(Error::NotRenormalisableInU);
    }
    Ok(valid.pop().unwrap())
}

/// Scope maps mt^w: J → J^w. mt^0 = h; for w ≥ 1, mt^w inverts h⁻¹ ∘ f^{p−w}
/// on J^w.
pub fn scope_functions(f: &UnimodalMap, cycle: &RenormCycle, cfg: &Config) -> Result<Vec<Fn1>> {
    let p = cycle.p;
    let (a, b) = (cycle.boundary, cycle.preimage);
    let mut out = vec![Fn1::linear(Interval::UNIT, a, b - a)];
    for w in 1..p {
        let jw = cycle.intervals[w];
        let k = p - w;
        // the branch of f^k on J^w must stay away from critical points
        let ds: Vec<f64> = (0..=64).map(|i| f.iterate_d(jw.lo + jw.len() * i as f64 / 64.0, k).1).collect();
        let min = ds.iter().fold(f64::INFINITY, |m, d| m.min(d.abs()));
        if min < 1e-8 || ds.iter().any(|d| d.signum() != ds[0].signum()) {
            return Err(Error::BranchSingular(format!("J^{w}")));
        }
        let pad = 1e-7 * jw.len();
        let (lo, hi) = ((jw.lo - pad).max(0.0), (jw.hi + pad).min(1.0));
        let failed = std::cell::Cell::new(false);
        let g = Fn1::from_fn(Interval::UNIT, cfg.degree_1d, |x| {
            let y = cycle.h(x);
            match roots::bracketed_newton(
                |t| {
                    let (v, d) = f.iterate_d(t, k);
                    (v - y, d)
                },
                lo,
                hi,
            ) {
                Some(t) => t,
                None => {
                    failed.set(true);
                    f64::NAN
                }
            }
        });
        if failed.get() {
            return Err(Error::BranchSingular(format!("J^{w}")));
        }
        out.push(g);
    }
    Ok(out)
}
