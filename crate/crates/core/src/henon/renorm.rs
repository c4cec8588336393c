use rayon::prelude::*;
use serde::Serialize;

use super::{HenonLikeMap, Orientation, Thickening};
use crate::analytic::{roots, Affine2, Box2, Fn1, Fn2, Interval, M2, V2};
use crate::config::Config;
use crate::error::{Error, Result};
use crate::unimodal::{detect_renormalisable, RenormCycle, UnimodalMap, UnimodalPermutation};

/// Maximal monotone branch of f^{p−1} containing J^1.
pub fn branch_hint(f: &UnimodalMap, cycle: &RenormCycle, cfg: &Config) -> Interval {
    let j1 = cycle.intervals[1];
    let mid = j1.mid();
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for k in 0..cycle.p - 1 {
        let crit = roots::find_roots(
            |x| {
                let (y, d) = f.iterate_d(x, k);
                (y - f.c0(), d * f.deriv(y))
            },
            0.0,
            1.0,
            cfg.root_resolution,
        );
        for c in crit {
            if c <= mid {
                lo = lo.max(c);
            } else {
                hi = hi.min(c);
            }
        }
    }
    Interval { lo, hi }
}

/// Solves φ^{p−1}(u, y) = x_target for u on the hinted branch.
pub fn horizontal_inverse(map: &HenonLikeMap, p: usize, x_target: f64, y: f64, branch: Interval) -> Result<f64> {
    let k = p - 1;
    let fd = |u: f64| {
        let (v, gx, _) = map.phi_k_d(u, y, k);
        (v - x_target, gx)
    };
    let u = roots::bracketed_newton(fd, branch.lo, branch.hi).ok_or(Error::NearCriticalLocus(x_target))?;
    let (v, gx) = fd(u);
    if gx.abs() < 1e-8 || v.abs() > 1e-12 * (1.0 + x_target.abs()) {
        return Err(Error::NearCriticalLocus(u));
    }
    Ok(u)
}

#[derive(Debug, Clone, Serialize)]
pub struct PreRenormalisation {
    pub p: usize,
    /// B^0_diag = J^0 × J^0 with J^0 = [α, β] up to order.
    pub central_box_diag: Box2,
    pub alpha: f64,
    pub beta: f64,
    /// Critical point of g₋ = π_x G(·, α).
    pub c_hat: f64,
    /// I: B^0_diag → B.
    #[serde(skip)]
    pub rescale: Affine2,
    pub sigma_f: f64,
    pub branch: Interval,
    /// Distance from the horizontal preimage of B^0_diag to the critical
    /// locus of φ^{p−1}.
    pub critical_distance: f64,
}

/// π_x G(x, y) with its gradient, and the horizontal preimage u.
struct GEval {
    gx: f64,
    dgx: f64,
    dgy: f64,
    u: f64,
}

fn g_eval(map: &HenonLikeMap, p: usize, branch: Interval, x: f64, y: f64) -> Result<GEval> {
    let u = horizontal_inverse(map, p, x, y, branch)?;
    let (_, ax, ay) = map.phi_k_d(u, y, p - 1);
    let (g, bx, by) = map.phi_k_d(u, y, 2 * p - 1);
    // u_x = 1/a_x, u_y = −a_y/a_x
    Ok(GEval { gx: g, dgx: bx / ax, dgy: by - bx * ay / ax, u })
}

pub fn find_central_box(map: &HenonLikeMap, v: &UnimodalPermutation, cfg: &Config) -> Result<PreRenormalisation> {
    let p = v.p();
    let f = map.unimodal();
    let cycle = detect_renormalisable(f, v, cfg)?.ok_or(Error::NotRenormalisable)?;
    let branch = branch_hint(f, &cycle, cfg);
    let g = |x: f64, y: f64| g_eval(map, p, branch, x, y);

    let alpha = roots::newton(
        |x| match g(x, x) {
            Ok(e) => (e.gx - x, e.dgx + e.dgy - 1.0),
            Err(_) => (f64::NAN, f64::NAN),
        },
        cycle.boundary,
        1e-15,
        60,
    )
    .filter(|a| (a - cycle.boundary).abs() < 0.25 * cycle.sigma())
    .ok_or(Error::NoDiagonalFixedPoint)?;

    // turning point of g₋ near c0
    let w = cycle.sigma();
    let dg = |x: f64| g(x, alpha).map(|e| e.dgx).unwrap_or(f64::NAN);
    let c_hat = roots::bisect(dg, f.c0() - 0.25 * w, f.c0() + 0.25 * w)
        .ok_or_else(|| Error::InvalidMap("g₋ has no turning point near c0".into()))?;

    let ahat = cycle.preimage;
    let far = ahat + 0.2 * (ahat - alpha);
    let beta = roots::bracketed_newton(
        |x| match g(x, alpha) {
            Ok(e) => (e.gx - alpha, e.dgx),
            Err(_) => (f64::NAN, f64::NAN),
        },
        c_hat.min(far),
        c_hat.max(far),
    )
    .ok_or(Error::NotInvariant(f64::NAN))?;

    let j0 = Interval::hull(alpha, beta);
    let bx = Box2::square(j0);
    let slack = cfg.invariance_slack * map.thickening().sup() + 1e-12;
    let mut excess = 0.0f64;
    let mut tops = Vec::new();
    for z in bx.boundary_samples(cfg.invariance_samples) {
        tops.push(g(z.x, z.y)?.gx);
    }
    // the critical value of g₊ = π_x G(·, β)
    let dgp = |x: f64| g(x, beta).map(|e| e.dgx).unwrap_or(f64::NAN);
    if let Some(c) = roots::bisect(dgp, f.c0() - 0.25 * w, f.c0() + 0.25 * w) {
        tops.push(g(c, beta)?.gx);
    }
    tops.push(g(c_hat, alpha)?.gx);
    for t in tops {
        excess = excess.max(j0.lo - t).max(t - j0.hi);
    }
    if excess > slack {
        return Err(Error::NotInvariant(excess));
    }

    // distance from the horizontal preimage of the box to the critical locus
    let mut critical_distance = f64::INFINITY;
    for k in 0..=4 {
        let y = j0.lo + j0.len() * k as f64 / 4.0;
        let (u0, u1) = (g(j0.lo, y)?.u, g(j0.hi, y)?.u);
        let span = Interval::hull(u0, u1);
        for (end, is_crit) in [(branch.lo, branch.lo > 0.0), (branch.hi, branch.hi < 1.0)] {
            if !is_crit {
                continue;
            }
            // follow the critical point of φ^{p−1}(·, y) off the unimodal one
            let d = |u: f64| map.phi_k_d(u, y, p - 1).1;
            let r = 0.5 * span.hausdorff(&Interval { lo: end, hi: end }).min((end - span.mid()).abs());
            let c = roots::bisect(d, end - r, end + r).unwrap_or(end);
            critical_distance = critical_distance.min((c - span.lo).abs().min((c - span.hi).abs()));
        }
    }
    if critical_distance < 0.5 * cfg.gamma * j0.len() {
        return Err(Error::CriticalLocusProximity(critical_distance));
    }

    let s = beta - alpha;
    let rescale = Affine2::new(M2::identity() / s, V2::new(-alpha / s, -alpha / s))?;
    Ok(PreRenormalisation {
        p,
        central_box_diag: bx,
        alpha,
        beta,
        c_hat,
        rescale,
        sigma_f: s.abs(),
        branch,
        critical_distance,
    })
}

/// G = H ∘ F^p ∘ H̄ at z ∈ B^0_diag.
pub fn pre_renormalise(map: &HenonLikeMap, pr: &PreRenormalisation, z: V2) -> Result<V2> {
    Ok(V2::new(g_eval(map, pr.p, pr.branch, z.x, z.y)?.gx, z.x))
}

/// Both coordinates of G interpolated on B^0_diag.
pub fn pre_renormalised_fns(map: &HenonLikeMap, pr: &PreRenormalisation, cfg: &Config) -> Result<(Fn2, Fn2)> {
    let (nx, ny) = cfg.degree_2d;
    let d = pr.central_box_diag;
    let xs = Fn2::x_nodes(d, nx);
    let ys = Fn2::y_nodes(d, ny);
    let pts: Vec<(f64, f64)> = ys.iter().flat_map(|&y| xs.iter().map(move |&x| (x, y))).collect();
    let gx: Vec<f64> = pts
        .par_iter()
        .map(|&(x, y)| g_eval(map, pr.p, pr.branch, x, y).map(|e| e.gx))
        .collect::<Result<_>>()?;
    let gy: Vec<f64> = pts.iter().map(|&(x, _)| x).collect();
    Ok((Fn2::interpolate(d, nx, ny, &gx), Fn2::interpolate(d, nx, ny, &gy)))
}

#[derive(Debug, Clone)]
pub struct HenonRenormalisation {
    pub map: HenonLikeMap,
    pub pre: PreRenormalisation,
    /// sup|ε̃| / sup|ε|^p (NaN for degenerate input).
    pub eps_constant: f64,
}

/// R F = I ∘ G ∘ Ī.
///
/// The new thickening is integrated from det DG in product form,
/// Π det DF(F^k(u, y)) · ∂_xφ^{p−1}(F^p(u, y)) / ∂_xφ^{p−1}(u, y), which keeps
/// its relative accuracy when ε̃ is far below the rounding level of φ.
pub fn renormalise_henon(map: &HenonLikeMap, v: &UnimodalPermutation, cfg: &Config) -> Result<HenonRenormalisation> {
    let pre = find_central_box(map, v, cfg)?;
    let p = pre.p;
    let (alpha, beta) = (pre.alpha, pre.beta);

    // Of the four sign patterns of I only those with equal x and y scaling
    // keep the second coordinate π_x, and of those only α ↦ 0 keeps f̃(0) = 0.
    let mut valid = Vec::new();
    for (e0, e1) in [(alpha, beta), (beta, alpha)] {
        for same in [true, false] {
            let hx = |t: f64| e0 + (e1 - e0) * t;
            let hy = |t: f64| if same { hx(t) } else { e1 + (e0 - e1) * t };
            let second_ok = [0.2, 0.7].iter().all(|&t| {
                let z = V2::new(t, 0.4);
                // π_y of I∘G∘Ī equals hy⁻¹(hx(z.x))
                let back = (hx(z.x) - hy(0.0)) / (hy(1.0) - hy(0.0));
                (back - z.x).abs() < 1e-12
            });
            if !second_ok {
                continue;
            }
            let g0 = g_eval(map, p, pre.branch, hx(0.0), hy(0.0))?.gx;
            if ((g0 - e0) / (e1 - e0)).abs() < 1e-9 {
                valid.push((e0, e1));
            }
        }
    }
    if valid.len() != 1 {
        return Err(Error::OrientationFailure);
    }
    let (e0, e1) = valid[0];
    let h = |t: f64| e0 + (e1 - e0) * t;

    let fvals: Vec<f64> = Fn1::nodes(Interval::UNIT, cfg.degree_1d)
        .par_iter()
        .map(|&x| g_eval(map, p, pre.branch, h(x), e0).map(|e| (e.gx - e0) / (e1 - e0)))
        .collect::<Result<_>>()?;
    let f_new = Fn1::fit(Interval::UNIT, &fvals, cfg.tail_tol)?;
    let f_new = UnimodalMap::new(f_new, cfg)?;
    f_new.check_membership(cfg)?;

    if map.is_degenerate() {
        let out = HenonLikeMap::degenerate(f_new, cfg);
        return Ok(HenonRenormalisation { map: out, pre, eps_constant: f64::NAN });
    }

    let (nx, ny) = cfg.degree_2d;
    let xs = Fn2::x_nodes(Box2::UNIT, nx);
    let ys = Fn2::y_nodes(Box2::UNIT, ny);
    let pts: Vec<(f64, f64)> = ys.iter().flat_map(|&y| xs.iter().map(move |&x| (x, y))).collect();
    let jac: Vec<f64> = pts
        .par_iter()
        .map(|&(x, y)| {
            let (x, y) = (h(x), h(y));
            let u = horizontal_inverse(map, p, x, y, pre.branch)?;
            let z = V2::new(u, y);
            let jp = map.jacobian_along(z, p);
            let zp = map.orbit_d(z, p).z;
            let a = map.phi_k_d(u, y, p - 1).1;
            let b = map.phi_k_d(zp.x, zp.y, p - 1).1;
            Ok(jp * b / a)
        })
        .collect::<Result<_>>()?;
    let mean = jac.iter().sum::<f64>() / jac.len() as f64;
    let o = if mean < 0.0 { -1.0 } else { 1.0 };
    let jac: Vec<f64> = jac.iter().map(|j| o * j).collect();
    let eps = Fn2::interpolate(Box2::UNIT, nx, ny, &jac).integral_y();
    let sup = eps.sup_norm(41);
    let thick = Thickening::new(eps, sup)?;
    let eps_constant = sup / map.thickening().sup().powi(p as i32);
    let out = HenonLikeMap::new(f_new, thick, Orientation::from_sign(o))?;
    Ok(HenonRenormalisation { map: out, pre, eps_constant })
}

/// Splits φ of a map (φ, π_x) into f(x) = φ(x, 0) and a non-negative ε.
pub fn extract_parametrisation(
    phi: impl Fn(f64, f64) -> f64 + Sync,
    second: impl Fn(f64, f64) -> f64,
    cfg: &Config,
) -> Result<(Fn1, Thickening, Orientation)> {
    for i in 0..=10 {
        for j in 0..=10 {
            let (x, y) = (i as f64 / 10.0, j as f64 / 10.0);
            let d = (second(x, y) - x).abs();
            if d > 1e-12 {
                return Err(Error::ParametrisationFailure(d));
            }
        }
    }
    let f = Fn1::from_fn(Interval::UNIT, cfg.degree_1d, |x| phi(x, 0.0));
    let (nx, ny) = cfg.degree_2d;
    let d = Fn2::from_fn(Box2::UNIT, nx, ny, |x, y| phi(x, 0.0) - phi(x, y));
    let mean: f64 = d.grid_values().iter().sum();
    let o = if mean < 0.0 { -1.0 } else { 1.0 };
    let eps = d.scaled(o);
    let sup = eps.sup_norm(41);
    let thick = Thickening::new(eps.clone(), sup).map_err(|_| {
        let worst = (0..=100).map(|i| eps.eval(i as f64 / 100.0, 0.0).abs()).fold(0.0, f64::max);
        Error::ParametrisationFailure(worst)
    })?;
    Ok((f, thick, Orientation::from_sign(o)))
}

#[derive(Debug, Clone, Serialize)]
pub struct VariationalReport {
    pub w: usize,
    pub residual: f64,
    pub eps_bar: f64,
    /// residual / ε̄².
    pub constant: f64,
}

/// Compares φ^w with its first-order expansion in ε,
/// f^w + s·[L^w + ε(x, y)·(f^{w−1})'(f(x))] with φ = f + s·ε and
/// L^w(x) = Σ_{k=1}^{w−1} ε(f^k x, f^{k−1} x) Π_{i=k+1}^{w−1} f'(f^i x).
pub fn variational_check(map: &HenonLikeMap, w: usize) -> VariationalReport {
    let f = map.unimodal();
    let s = -map.orientation().sign();
    let eps = map.thickening();
    let n = 21;
    let mut residual = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let (x, y) = (i as f64 / (n - 1) as f64, j as f64 / (n - 1) as f64);
            let exact = map.orbit_d(V2::new(x, y), w).z.x;
            let orbit: Vec<f64> = (0..=w).map(|k| f.iterate(x, k)).collect();
            let mut l = 0.0;
            for k in 1..w {
                let prod: f64 = (k + 1..w).map(|i| f.deriv(orbit[i])).product();
                l += eps.eval(orbit[k], orbit[k - 1]) * prod;
            }
            let dfw1: f64 = (1..w).map(|i| f.deriv(orbit[i])).product();
            let approx = orbit[w] + s * (l + eps.eval(x, y) * dfw1);
            residual = residual.max((exact - approx).abs());
        }
    }
    let eps_bar = eps.sup();
    let constant = if eps_bar > 0.0 { residual / (eps_bar * eps_bar) } else { 0.0 };
    VariationalReport { w, residual, eps_bar, constant }
}

/// H(x, y) = (φ^{p−1}(x, y), y).
pub fn horizontal(map: &HenonLikeMap, p: usize, z: V2) -> V2 {
    V2::new(map.phi_k_d(z.x, z.y, p - 1).0, z.y)
}

/// H̄ = H⁻¹ on B^0_diag, row by row.
pub fn horizontal_bar(map: &HenonLikeMap, pr: &PreRenormalisation, z: V2) -> Result<V2> {
    Ok(V2::new(horizontal_inverse(map, pr.p, z.x, z.y, pr.branch)?, z.y))
}
