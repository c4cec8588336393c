use serde::{Deserialize, Serialize};

use super::{detect_renormalisable, renormalise_unimodal, scope_functions, UnimodalMap, UnimodalPermutation};
use crate::analytic::{roots, Fn1, Interval};
use crate::config::Config;
use crate::error::{Error, Result};

/// Limit of the normalised iterates [mt^{w^n}].
#[derive(Debug, Clone)]
pub struct UniversalU {
    pub u: Fn1,
    /// Multiplier of mt^w at its fixed point (signed).
    pub sigma_w: f64,
    pub fixed_point: f64,
    /// Sup-differences of successive iterates.
    pub diffs: Vec<f64>,
}

fn normalise(g: &Fn1) -> Fn1 {
    let (g0, g1) = (g.eval(0.0), g.eval(1.0));
    Fn1::new(
        g.domain(),
        g.coeffs()
            .iter()
            .enumerate()
            .map(|(k, c)| if k == 0 { (c - g0) / (g1 - g0) } else { c / (g1 - g0) })
            .collect(),
    )
}

/// Iterates u ← A(u ∘ mt^w) from u = id, where A is the affine map fixing the
/// endpoint normalisation u(0) = 0, u(1) = 1.
pub fn universal_u(
    f_star: &UnimodalMap,
    v: &UnimodalPermutation,
    w: usize,
    n_max: usize,
    cfg: &Config,
) -> Result<UniversalU> {
    if w >= v.p() {
        return Err(Error::BadInput(format!("digit {w} out of range")));
    }
    let cycle = detect_renormalisable(f_star, v, cfg)?.ok_or(Error::NotRenormalisable)?;
    let mt = scope_functions(f_star, &cycle, cfg)?.swap_remove(w);
    let nodes = Fn1::nodes(Interval::UNIT, cfg.degree_1d);
    let targets: Vec<f64> = nodes.iter().map(|&x| mt.eval(x)).collect();
    let mut u = Fn1::linear(Interval::UNIT, 0.0, 1.0);
    let mut diffs = Vec::new();
    for _ in 0..n_max {
        let vals: Vec<f64> = targets.iter().map(|&t| u.eval(t)).collect();
        let next = normalise(&Fn1::interpolate(Interval::UNIT, &vals));
        let d = nodes.iter().map(|&x| (next.eval(x) - u.eval(x)).abs()).fold(0.0, f64::max);
        diffs.push(d);
        u = next;
        if d < 1e-14 {
            break;
        }
    }
    if diffs.last().map_or(true, |&d| d >= 1e-9) {
        return Err(Error::NoConvergence(diffs));
    }
    let fixed = mt.axpy(-1.0, &Fn1::linear(Interval::UNIT, 0.0, 1.0)).find_roots(0.0, cfg.root_resolution);
    let fixed_point = *fixed.first().ok_or(Error::NoConvergence(diffs.clone()))?;
    let sigma_w = mt.derivative().eval(fixed_point);
    Ok(UniversalU { u, sigma_w, fixed_point, diffs })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundsRow {
    pub depth: usize,
    pub distortion: f64,
    pub geometry: f64,
    pub k0: f64,
    pub k1: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AprioriReport {
    pub rows: Vec<BoundsRow>,
    /// max distortion of f^i on J^w for i up to the transfer time.
    pub distortion_l: f64,
    /// max ratio of sibling lengths.
    pub geometry_k: f64,
    pub k0: f64,
    pub k1: f64,
    /// Set when 0 < k0 ≤ k1 < 1 fails.
    pub violation: bool,
}

/// Maximal cycle intervals J^w̄ for every word length 1..=depth. Entry
/// `[n - 1][r]` is the depth-n interval of the word with r(w̄) = r, i.e. the
/// component of f^{-q(w̄)}(J^{0ⁿ}) containing f^r(J^{0ⁿ}).
pub fn cycle_intervals(
    f: &UnimodalMap,
    v: &UnimodalPermutation,
    depth: usize,
    cfg: &Config,
) -> Result<Vec<Vec<Interval>>> {
    let p = v.p();
    let mut centrals = Vec::new();
    let mut g = f.clone();
    let (mut scale, mut shift) = (1.0, 0.0);
    for n in 0..depth {
        let cycle = detect_renormalisable(&g, v, cfg)
            .map_err(|e| e.at_stage(n))?
            .ok_or(Error::DepthUnreachable(n))?;
        let c = cycle.central;
        centrals.push(Interval::hull(shift + scale * c.lo, shift + scale * c.hi));
        if n + 1 < depth {
            let next = renormalise_unimodal(&g, &cycle, cfg).map_err(|_| Error::DepthUnreachable(n + 1))?;
            shift += scale * cycle.boundary;
            scale *= cycle.preimage - cycle.boundary;
            g = next;
        }
    }
    let mut levels = Vec::with_capacity(depth);
    for (k, central) in centrals.into_iter().enumerate() {
        let count = p.pow(k as u32 + 1);
        let mut level = vec![central];
        let mut tight = central;
        for r in 1..count {
            tight = f.interval_image(tight);
            let q = count - r;
            let lo = extend(f, q, central, tight.lo, -1.0, tight.len()).ok_or(Error::DepthUnreachable(k))?;
            let hi = extend(f, q, central, tight.hi, 1.0, tight.len()).ok_or(Error::DepthUnreachable(k))?;
            level.push(Interval { lo, hi });
        }
        levels.push(level);
    }
    Ok(levels)
}

// Walks from x in direction dir until f^q leaves c, then solves for the
// crossing.
fn extend(f: &UnimodalMap, q: usize, c: Interval, x: f64, dir: f64, scale: f64) -> Option<f64> {
    let mut prev = x;
    let mut step = scale.max(1e-14) / 16.0;
    for _ in 0..400 {
        let next = (prev + dir * step).clamp(0.0, 1.0);
        let y = f.iterate(next, q);
        if y < c.lo || y > c.hi {
            let target = if y < c.lo { c.lo } else { c.hi };
            let fd = |t: f64| {
                let (v, d) = f.iterate_d(t, q);
                (v - target, d)
            };
            // prev may already sit on the boundary up to rounding
            return roots::bracketed_newton(fd, prev.min(next), prev.max(next))
                .or_else(|| (fd(prev).0.abs() < 1e-12).then_some(prev));
        }
        if next == 0.0 || next == 1.0 {
            return Some(next);
        }
        prev = next;
        step *= 1.5;
    }
    None
}

/// Measures the real a priori bounds on the cycle intervals of depth 1..=depth.
pub fn apriori_bounds_report(
    f: &UnimodalMap,
    v: &UnimodalPermutation,
    depth: usize,
    cfg: &Config,
) -> Result<AprioriReport> {
    let p = v.p();
    let levels = cycle_intervals(f, v, depth, cfg)?;
    let mut rows = Vec::new();
    let mut parent: Vec<Interval> = vec![Interval::UNIT];
    for (k, level) in levels.into_iter().enumerate() {
        let n = k + 1;
        let count = level.len();
        let (mut k0, mut k1, mut geom) = (f64::INFINITY, 0.0f64, 1.0f64);
        let stride = count / p;
        for r in 0..stride {
            let lens: Vec<f64> = (0..p).map(|w| level[r + stride * w].len()).collect();
            let plen = parent[r].len();
            for &l in &lens {
                k0 = k0.min(l / plen);
                k1 = k1.max(l / plen);
            }
            let (mn, mx) = lens.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &l| (a.min(l), b.max(l)));
            geom = geom.max(mx / mn);
        }
        let mut dist = 0.0f64;
        for (r, j) in level.iter().enumerate().skip(1) {
            let q = count - r;
            // stay off the endpoints, where the next critical point may sit
            let mut xs: Vec<f64> = (0..9).map(|i| j.lo + j.len() * (0.02 + 0.96 * i as f64 / 8.0)).collect();
            let mut ds = vec![0.0f64; xs.len()];
            for _ in 0..q {
                for (x, d) in xs.iter_mut().zip(ds.iter_mut()) {
                    *d += f.deriv(*x).abs().ln();
                    *x = f.eval(*x);
                }
                let (mn, mx) = ds.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &d| (a.min(d), b.max(d)));
                dist = dist.max(mx - mn);
            }
        }
        rows.push(BoundsRow { depth: n, distortion: dist, geometry: geom, k0, k1 });
        parent = level;
    }
    let distortion_l = rows.iter().map(|r| r.distortion).fold(0.0, f64::max);
    let geometry_k = rows.iter().map(|r| r.geometry).fold(1.0, f64::max);
    let k0 = rows.iter().map(|r| r.k0).fold(f64::INFINITY, f64::min);
    let k1 = rows.iter().map(|r| r.k1).fold(0.0, f64::max);
    let violation = !(k0 > 0.0 && k0 <= k1 && k1 < 1.0);
    Ok(AprioriReport { rows, distortion_l, geometry_k, k0, k1, violation })
}
