//! Renormalisation towers F_n = R^n F, their scope maps Ψ_n, the pieces of
//! the Cantor attractor, the tip and the average Jacobian.

mod pieces;

pub use pieces::{
    average_jacobian, code_to_point, conjugacy_residuals, distortion_report, orbit_covering, pieces_at_depth,
    tip, AverageJacobian, CantorApprox, DistortionReport, DistortionRow, Piece, Tip,
};

use rayon::prelude::*;
use serde::Serialize;

use crate::analytic::{roots, Fn1, M2, V2};
use crate::config::Config;
use crate::error::{Error, Result};
use crate::fixedpoint::{FixedPointResult, SpectrumResult};
use crate::henon::{
    find_central_box, horizontal_inverse, renormalise_henon, HenonLikeMap, Orientation, PreRenormalisation,
    Thickening,
};
use crate::unimodal::{UnimodalMap, UnimodalPermutation};

#[derive(Debug, Clone)]
pub struct Stage {
    pub map: HenonLikeMap,
    pub pre: PreRenormalisation,
}

impl Stage {
    pub fn new(map: HenonLikeMap, v: &UnimodalPermutation, cfg: &Config) -> Result<Self> {
        let pre = find_central_box(&map, v, cfg)?;
        Ok(Stage { map, pre })
    }

    fn h(&self, t: f64) -> f64 {
        self.pre.alpha + (self.pre.beta - self.pre.alpha) * t
    }
}

/// F_0, …, F_N with F_{n+1} = R F_n, and optionally a limit stage used for
/// every height beyond N.
#[derive(Debug, Clone)]
pub struct RenormTower {
    v: UnimodalPermutation,
    stages: Vec<Stage>,
    limit: Option<Stage>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TowerSummary {
    pub depth: usize,
    pub eps_sup: Vec<f64>,
    pub orientation: Vec<Orientation>,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    /// sup |f_n − f_*| when the tower has a limit stage.
    pub f_distance: Option<Vec<f64>>,
}

pub fn build_tower(map: &HenonLikeMap, v: &UnimodalPermutation, depth: usize, cfg: &Config) -> Result<RenormTower> {
    let mut stages = Vec::with_capacity(depth + 1);
    let mut f = map.clone();
    for n in 0..depth {
        let r = renormalise_henon(&f, v, cfg).map_err(|e| e.at_stage(n))?;
        stages.push(Stage { map: f, pre: r.pre });
        f = r.map;
    }
    stages.push(Stage::new(f, v, cfg).map_err(|e| e.at_stage(depth))?);
    Ok(RenormTower { v: v.clone(), stages, limit: None })
}

impl RenormTower {
    /// Uses the degenerate fixed point F_* for every height past the computed
    /// ones. Deep stages are numerically indistinguishable from it once ε_n
    /// has underflowed and f_n is at the rounding floor.
    pub fn with_limit(mut self, f_star: &UnimodalMap, cfg: &Config) -> Result<Self> {
        let map = HenonLikeMap::degenerate(f_star.clone(), cfg);
        self.limit = Some(Stage::new(map, &self.v, cfg)?);
        Ok(self)
    }

    pub fn permutation(&self) -> &UnimodalPermutation {
        &self.v
    }

    pub fn p(&self) -> usize {
        self.v.p()
    }

    /// Number of renormalisations computed.
    pub fn depth(&self) -> usize {
        self.stages.len() - 1
    }

    pub fn has_limit(&self) -> bool {
        self.limit.is_some()
    }

    pub fn stage(&self, n: usize) -> Result<&Stage> {
        self.stages.get(n).or(self.limit.as_ref()).ok_or(Error::DepthUnreachable(n))
    }

    pub fn map(&self, n: usize) -> Result<&HenonLikeMap> {
        Ok(&self.stage(n)?.map)
    }

    pub fn stages(&self) -> &[Stage] {
        &self.stages
    }

    /// The tower of R F: heights shifted down by `k`.
    pub fn shifted(&self, k: usize) -> Result<RenormTower> {
        if k > self.depth() {
            return Err(Error::DepthUnreachable(k));
        }
        Ok(RenormTower { v: self.v.clone(), stages: self.stages[k..].to_vec(), limit: self.limit.clone() })
    }

    pub fn eps_sup(&self) -> Vec<f64> {
        self.stages.iter().map(|s| s.map.thickening().sup()).collect()
    }

    pub fn summary(&self) -> TowerSummary {
        let f_distance = self
            .limit
            .as_ref()
            .map(|l| self.stages.iter().map(|s| s.map.unimodal().distance(l.map.unimodal())).collect());
        TowerSummary {
            depth: self.depth(),
            eps_sup: self.eps_sup(),
            orientation: self.stages.iter().map(|s| s.map.orientation()).collect(),
            alpha: self.stages.iter().map(|s| s.pre.alpha).collect(),
            beta: self.stages.iter().map(|s| s.pre.beta).collect(),
            f_distance,
        }
    }

    /// Re-renormalises every stage and returns max_n |R F_n − F_{n+1}|.
    pub fn consistency(&self, cfg: &Config) -> Result<f64> {
        let d: Vec<f64> = (0..self.depth())
            .into_par_iter()
            .map(|n| {
                let r = renormalise_henon(&self.stages[n].map, &self.v, cfg)?;
                Ok(r.map.distance(&self.stages[n + 1].map))
            })
            .collect::<Result<_>>()?;
        Ok(d.into_iter().fold(0.0, f64::max))
    }

    /// Ψ_n = H̄_n ∘ Ī_n : B → B^0 of F_n.
    pub fn psi(&self, n: usize, z: V2) -> Result<V2> {
        let s = self.stage(n)?;
        let (x, y) = (s.h(z.x), s.h(z.y));
        let u = horizontal_inverse(&s.map, self.p(), x, y, s.pre.branch).map_err(|e| e.at_stage(n))?;
        Ok(V2::new(u, y))
    }

    /// Ψ_n(z) and DΨ_n(z), by implicit differentiation through H̄.
    pub fn psi_d(&self, n: usize, z: V2) -> Result<(V2, M2)> {
        let s = self.stage(n)?;
        let w = self.psi(n, z)?;
        let (_, ax, ay) = s.map.phi_k_d(w.x, w.y, self.p() - 1);
        let k = s.pre.beta - s.pre.alpha;
        Ok((w, M2::new(k / ax, -k * ay / ax, 0.0, k)))
    }

    /// Ψ^w_n = F_n^w ∘ Ψ_n.
    pub fn scope(&self, n: usize, w: usize, z: V2) -> Result<V2> {
        let z = self.psi(n, z)?;
        Ok(self.stage(n)?.map.orbit_d(z, w).z)
    }

    /// Ψ^{w̄} = Ψ^{w_0}_0 ∘ … ∘ Ψ^{w_{k−1}}_{k−1}, applied to z in the frame
    /// of F_k.
    pub fn scope_word(&self, digits: &[usize], z: V2) -> Result<V2> {
        digits.iter().enumerate().rev().try_fold(z, |z, (n, &w)| self.scope(n, w, z))
    }

    /// The fixed point of F_n near the interior fixed point of f_n.
    pub fn fixed_point(&self, n: usize) -> Result<V2> {
        let map = self.map(n)?;
        let a = map.unimodal().alpha();
        let x = roots::newton(
            |x| {
                let (p, px, py) = map.phi_d(x, x);
                (p - x, px + py - 1.0)
            },
            a,
            1e-15,
            50,
        )
        .ok_or(Error::NoDiagonalFixedPoint)?;
        Ok(V2::new(x, x))
    }
}

/// A tower whose initial unimodal part is moved along the unstable direction
/// of the fixed point so that the first few f_n stay near f_*.
#[derive(Debug, Clone)]
pub struct TunedTower {
    pub tower: RenormTower,
    /// F_0 = (f_* + t·v, ε).
    pub t: f64,
    /// Unstable component of f_K − f_* at the last secant step.
    pub defect: f64,
}

fn tuned_start(fp: &FixedPointResult, sp: &SpectrumResult, t: f64, cfg: &Config) -> Result<UnimodalMap> {
    let n = cfg.degree_1d;
    let f: Fn1 = fp.f_star.f().resized(n).axpy(t, &sp.eigenfunction.resized(n));
    UnimodalMap::new(f, cfg)
}

/// Secant search for t such that ⟨ℓ, f_K − f_*⟩ = 0 for K = 1, 2, 3 in turn
/// (capped by `depth`), followed by the full tower.
pub fn tuned_tower(
    fp: &FixedPointResult,
    sp: &SpectrumResult,
    v: &UnimodalPermutation,
    eps: &Thickening,
    orientation: Orientation,
    depth: usize,
    cfg: &Config,
) -> Result<TunedTower> {
    let star = fp.f_star.f().coeffs();
    let q = |t: f64, k: usize| -> Result<f64> {
        let mut f = HenonLikeMap::new(tuned_start(fp, sp, t, cfg)?, eps.clone(), orientation)?;
        for n in 0..k {
            f = renormalise_henon(&f, v, cfg).map_err(|e| e.at_stage(n))?.map;
        }
        let c = f.unimodal().f().coeffs();
        Ok(sp.left.iter().enumerate().map(|(i, l)| l * (c.get(i).copied().unwrap_or(0.0) - star.get(i).copied().unwrap_or(0.0))).sum())
    };
    let k_max = depth.clamp(1, 3);
    let (mut t0, mut t1) = (0.0, 1e-3);
    let mut q1 = 0.0;
    // K = 1 is always computable; each deeper K starts from the previous root
    for k in 1..=k_max {
        let mut q0 = q(t0, k)?;
        q1 = q(t1, k)?;
        for _ in 0..12 {
            if q1 == q0 {
                break;
            }
            let mut t2 = t1 - q1 * (t1 - t0) / (q1 - q0);
            // a long secant step can leave the renormalisable region; shorten it
            let mut q2 = q(t2, k);
            for _ in 0..30 {
                if q2.is_ok() {
                    break;
                }
                t2 = 0.5 * (t1 + t2);
                q2 = q(t2, k);
            }
            (t0, q0) = (t1, q1);
            (t1, q1) = (t2, q2?);
            if (t1 - t0).abs() < 1e-15 {
                break;
            }
        }
        t0 = t1 * (1.0 - 1e-3);
    }
    let f0 = HenonLikeMap::new(tuned_start(fp, sp, t1, cfg)?, eps.clone(), orientation)?;
    let tower = build_tower(&f0, v, depth, cfg)?;
    Ok(TunedTower { tower, t: t1, defect: q1 })
}
