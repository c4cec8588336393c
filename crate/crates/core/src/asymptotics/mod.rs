//! Squeeze/tilt decompositions of the scope maps at the tip, universal
//! functions, line fields and the Hölder experiment.

mod holder;
mod linefield;

pub use holder::{alpha_bound, holder_experiment, HolderReport, HolderRow};
pub use linefield::{linefield_divergence_demo, projectivized_cocycle, LinefieldDemo, LinefieldRow, Projective};

use std::ops::Range;

use serde::Serialize;

use crate::analytic::{Fn1, Interval, M2, V2};
use crate::cantor::{RenormTower, Tip};
use crate::config::Config;
use crate::error::{Error, Result};
use crate::fixedpoint::FixedPointResult;
use crate::unimodal::{universal_u, UnimodalMap, UnimodalPermutation};

/// DΨ_n(τ_{n+1}) = σ_n·[[s_n, t_n], [0, 1]].
#[derive(Debug, Clone, Serialize)]
pub struct TipDecomposition {
    pub n: usize,
    pub sigma_n: f64,
    pub s_n: f64,
    pub t_n: f64,
    /// τ_{n+1}
    pub base: V2,
    /// τ_n = Ψ_n(τ_{n+1})
    pub image: V2,
}

impl TipDecomposition {
    pub fn matrix(&self) -> M2 {
        self.sigma_n * M2::new(self.s_n, self.t_n, 0.0, 1.0)
    }

    /// r_n(z), the x-component of D_n^{-1}(Ψ_n(τ_{n+1} + z) − τ_n) − z.
    pub fn remainder(&self, t: &RenormTower, z: V2) -> Result<f64> {
        let w = t.psi(self.n, self.base + z)? - self.image;
        Ok(unshear(self.sigma_n, self.s_n, self.t_n, w, z))
    }
}

fn unshear(sigma: f64, s: f64, t: f64, w: V2, z: V2) -> f64 {
    (w.x / sigma - t * z.y) / s - z.x
}

pub fn decompose_at_tip(t: &RenormTower, tip: &Tip, n: usize) -> Result<TipDecomposition> {
    let base = tip.at(n + 1);
    let (image, d) = t.psi_d(n, base)?;
    if d[(1, 0)].abs() > 1e-10 {
        return Err(Error::StructureViolation(d[(1, 0)]));
    }
    let sigma_n = d[(1, 1)];
    Ok(TipDecomposition { n, sigma_n, s_n: d[(0, 0)] / sigma_n, t_n: d[(0, 1)] / sigma_n, base, image })
}

/// DΨ_{m,n}(τ_{n+1}) for Ψ_{m,n} = Ψ_m ∘ … ∘ Ψ_n.
#[derive(Debug, Clone, Serialize)]
pub struct CompositeDecomposition {
    pub m: usize,
    pub n: usize,
    pub sigma_mn: f64,
    pub s_mn: f64,
    pub t_mn: f64,
    pub base: V2,
    pub image: V2,
    /// |t_{m,n}| / ε̄^{p^m}, with ε̄ = sup|ε_0|.
    pub tilt_constant: Option<f64>,
}

impl CompositeDecomposition {
    pub fn matrix(&self) -> M2 {
        self.sigma_mn * M2::new(self.s_mn, self.t_mn, 0.0, 1.0)
    }

    /// r_{m,n}(z).
    pub fn remainder(&self, t: &RenormTower, z: V2) -> Result<f64> {
        let w = psi_chain(t, self.m..self.n + 1, self.base + z)? - self.image;
        Ok(unshear(self.sigma_mn, self.s_mn, self.t_mn, w, z))
    }
}

/// Ψ_m ∘ … ∘ Ψ_{n−1} (z) for heights m..n; the identity when empty.
pub fn psi_chain(t: &RenormTower, heights: Range<usize>, z: V2) -> Result<V2> {
    heights.rev().try_fold(z, |z, k| t.psi(k, z))
}

/// psi_chain and its derivative by the chain rule.
pub fn psi_chain_d(t: &RenormTower, heights: Range<usize>, z: V2) -> Result<(V2, M2)> {
    heights.rev().try_fold((z, M2::identity()), |(z, d), k| {
        let (w, dk) = t.psi_d(k, z)?;
        Ok((w, dk * d))
    })
}

/// Composite of the decompositions at heights m..=n (given in order).
pub fn compose_decompositions(ds: &[TipDecomposition], eps_bar: Option<f64>, p: usize) -> Result<CompositeDecomposition> {
    let first = ds.first().ok_or_else(|| Error::BadInput("no decompositions".into()))?;
    if ds.windows(2).any(|w| w[1].n != w[0].n + 1) {
        return Err(Error::BadInput("heights are not contiguous".into()));
    }
    let (mut sigma, mut s, mut t) = (1.0, 1.0, 0.0);
    for d in ds {
        t += s * d.t_n;
        s *= d.s_n;
        sigma *= d.sigma_n;
    }
    let last = ds.last().unwrap();
    let tilt_constant = eps_bar.filter(|&e| e > 0.0).map(|e| t.abs() / e.powi(p.pow(first.n as u32) as i32));
    Ok(CompositeDecomposition {
        m: first.n,
        n: last.n,
        sigma_mn: sigma,
        s_mn: s,
        t_mn: t,
        base: last.base,
        image: first.image,
        tilt_constant,
    })
}

/// Decompositions at heights m..=n and their composite.
pub fn decompose_range(t: &RenormTower, tip: &Tip, m: usize, n: usize) -> Result<(Vec<TipDecomposition>, CompositeDecomposition)> {
    let ds = (m..=n).map(|k| decompose_at_tip(t, tip, k)).collect::<Result<Vec<_>>>()?;
    let eps = t.map(0)?.thickening().sup();
    let c = compose_decompositions(&ds, Some(eps), t.p())?;
    Ok((ds, c))
}

#[derive(Debug, Clone, Serialize)]
pub struct UniversalData {
    /// v_*(s) = (u_*(τ + s) − u_*(τ)) / u_*'(τ) on [−τ, 1 − τ].
    pub v_star: Fn1,
    /// a(x) = u_*'(x) / u_*'(f_*(x)) on [0, 1].
    pub a: Fn1,
    pub tau_star_x: f64,
    /// Fixed point of the presentation branch mt¹ (equals τ_*ₓ).
    pub branch_fixed_point: f64,
    #[serde(skip)]
    u: Fn1,
    #[serde(skip)]
    f_star: Option<UnimodalMap>,
}

impl UniversalData {
    pub fn a_at(&self, x: f64) -> f64 {
        self.a.eval(x)
    }

    /// v_*'(x − τ*ₓ) / v_*'(f_*(x) − τ*ₓ), evaluated through v_* itself.
    pub fn a_from_v(&self, x: f64) -> f64 {
        let dv = self.v_star.derivative();
        let f = self.f_star.as_ref().expect("universal data without f_*");
        dv.eval(x - self.tau_star_x) / dv.eval(f.eval(x) - self.tau_star_x)
    }

    pub fn u(&self) -> &Fn1 {
        &self.u
    }
}

pub fn universal_data(fp: &FixedPointResult, v: &UnimodalPermutation, cfg: &Config) -> Result<UniversalData> {
    if fp.residual >= 1e-8 {
        return Err(Error::BadInput(format!("fixed point residual {:e} too large", fp.residual)));
    }
    let f = &fp.f_star;
    let uu = universal_u(f, v, 1, 400, cfg)?;
    let du = uu.u.derivative();
    let tau = f.critical_value();
    let d0 = du.eval(tau);
    let u0 = uu.u.eval(tau);
    let dom = Interval::new(-tau, 1.0 - tau)?;
    let v_star = Fn1::from_fn(dom, cfg.degree_1d, |s| (uu.u.eval(tau + s) - u0) / d0);
    let a = Fn1::from_fn(Interval::UNIT, cfg.degree_1d, |x| du.eval(x) / du.eval(f.eval(x)));
    if crate::analytic::probes(Interval::UNIT, 201).any(|x| a.eval(x) <= 0.0) {
        return Err(Error::InvalidMap("a(x) is not positive on J".into()));
    }
    Ok(UniversalData { v_star, a, tau_star_x: tau, branch_fixed_point: uu.fixed_point, u: uu.u, f_star: Some(f.clone()) })
}

#[derive(Debug, Clone, Serialize)]
pub struct UniversalityRow {
    pub n: usize,
    /// log10 b^{pⁿ}
    pub log10_scale: f64,
    pub e_n: f64,
    /// sup |f_n − f_*| when the tower has a limit stage.
    pub f_distance: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct UniversalityReport {
    pub b: f64,
    pub rows: Vec<UniversalityRow>,
    /// Set when b^{pⁿ} dropped below 1e−250 before the end of the tower.
    pub underflow: bool,
    pub decreasing: bool,
    /// exp of the slope of log e_n against n.
    pub rho: Option<f64>,
    pub f_rate: Option<f64>,
}

const UNIV_GRID: usize = 101;

/// e_n = sup over a grid of |∂_yφ_n(x, y) / (b^{pⁿ} a(x)) − 1|. The sign of
/// ∂_yφ_n is the orientation and is dropped.
pub fn universality_report(t: &RenormTower, u: &UniversalData, b: f64) -> Result<UniversalityReport> {
    if b <= 0.0 || t.map(0)?.is_degenerate() {
        return Err(Error::Degenerate);
    }
    let grid: Vec<f64> = (0..UNIV_GRID).map(|i| i as f64 / (UNIV_GRID - 1) as f64).collect();
    let f_dist = t.summary().f_distance;
    let mut rows = Vec::new();
    let mut underflow = false;
    for (n, s) in t.stages().iter().enumerate() {
        let log10_scale = t.p().pow(n as u32) as f64 * b.log10();
        if log10_scale < -250.0 {
            underflow = true;
            break;
        }
        let scale = 10f64.powf(log10_scale);
        let eps = s.map.thickening();
        let mut e: f64 = 0.0;
        for &x in &grid {
            let ax = u.a_at(x);
            for &y in &grid {
                e = e.max((eps.dy(x, y).abs() / (scale * ax) - 1.0).abs());
            }
        }
        rows.push(UniversalityRow { n, log10_scale, e_n: e, f_distance: f_dist.as_ref().map(|d| d[n]) });
    }
    let decreasing = rows.windows(2).all(|w| w[1].e_n < w[0].e_n);
    let rho = log_slope(rows.iter().map(|r| (r.n as f64, r.e_n)));
    let f_rate = log_slope(rows.iter().filter_map(|r| r.f_distance.map(|d| (r.n as f64, d))));
    Ok(UniversalityReport { b, rows, underflow, decreasing, rho, f_rate })
}

/// exp of the least-squares slope of log y against x, over positive y.
pub(crate) fn log_slope(pts: impl Iterator<Item = (f64, f64)>) -> Option<f64> {
    let pts: Vec<(f64, f64)> = pts.filter(|&(_, y)| y > 0.0 && y.is_finite()).map(|(x, y)| (x, y.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some((sxy / sxx).exp())
}

#[derive(Debug, Clone, Serialize)]
pub struct KappaRow {
    pub n: usize,
    pub kappa: f64,
    /// |r_{m,n}(0, ±h) − κ h²|, the part not captured by the quadratic.
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct KappaEstimate {
    pub m: usize,
    pub kappa: f64,
    pub h: f64,
    pub rows: Vec<KappaRow>,
    /// ε̄^{p^m}
    pub eps_scale: f64,
}

/// κ_{m,n} from the symmetric quotient (r(0, h) + r(0, −h)) / 2h², and the
/// antisymmetric part as the fit residual.
pub fn kappa_fit(t: &RenormTower, tip: &Tip, m: usize, n: usize, h: f64) -> Result<KappaRow> {
    let (_, c) = decompose_range(t, tip, m, n)?;
    let rp = c.remainder(t, V2::new(0.0, h))?;
    let rm = c.remainder(t, V2::new(0.0, -h))?;
    Ok(KappaRow { n, kappa: (rp + rm) / (2.0 * h * h), residual: 0.5 * (rp - rm).abs() })
}

/// Heights past m used for κ; beyond that the 1/(σ s)^{n−m} amplification of
/// rounding in r_{m,n} dominates.
const KAPPA_SPAN: usize = 4;

/// κ_(m) as κ_{m,n} at the deepest n ≤ m + 4 below the tower depth.
pub fn kappa_estimate(t: &RenormTower, tip: &Tip, m: usize, h: f64) -> Result<KappaEstimate> {
    if t.depth() < m + 3 {
        return Err(Error::DepthUnreachable(m + 3));
    }
    let rows = (m + 1..t.depth().min(m + KAPPA_SPAN + 1))
        .map(|n| kappa_fit(t, tip, m, n, h))
        .collect::<Result<Vec<_>>>()?;
    let last = rows.last().unwrap();
    let eps_scale = t.map(0)?.thickening().sup().powi(t.p().pow(m as u32) as i32);
    if last.kappa == 0.0 && last.residual == 0.0 {
        return Ok(KappaEstimate { m, kappa: 0.0, h, rows, eps_scale });
    }
    if last.residual > last.kappa.abs() * h * h {
        return Err(Error::KappaUnresolved);
    }
    Ok(KappaEstimate { m, kappa: last.kappa, h, rows, eps_scale })
}
