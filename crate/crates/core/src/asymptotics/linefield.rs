use serde::Serialize;

use super::{decompose_at_tip, psi_chain_d};
use crate::analytic::V2;
use crate::cantor::{RenormTower, Tip};
use crate::error::{Error, Result};

/// DF_n^p(z) acting on slopes X = dx/dy: X ↦ ζ(X + η)/(X + θ).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Projective {
    pub zeta: f64,
    pub eta: f64,
    pub theta: f64,
    /// η − θ = −det DF^p / (∂_xφ^p ∂_xφ^{p−1}), free of the cancellation
    /// between η and θ.
    pub eta_minus_theta: f64,
}

impl Projective {
    pub fn apply(&self, x: f64) -> f64 {
        self.zeta * (x + self.eta) / (x + self.theta)
    }

    /// Through a triangular σ[[s, t], [0, 1]].
    pub fn shear(s: f64, t: f64, x: f64) -> f64 {
        s * x + t
    }
}

pub fn projectivized_cocycle(t: &RenormTower, n: usize, z: V2) -> Result<Projective> {
    let map = t.map(n)?;
    // rows of D F^p: ∇φ^p and ∇φ^{p−1}
    let d = map.orbit_d(z, t.p()).d;
    let det: f64 = {
        let mut w = z;
        let mut j = 1.0;
        for _ in 0..t.p() {
            j *= map.jacobian_det(w.x, w.y);
            w = map.step(w);
        }
        j
    };
    let (px, py, qx, qy) = (d[(0, 0)], d[(0, 1)], d[(1, 0)], d[(1, 1)]);
    if px == 0.0 || qx == 0.0 {
        return Err(Error::ProjectiveSingularity([z.x, z.y]));
    }
    Ok(Projective { zeta: px / qx, eta: py / px, theta: qy / qx, eta_minus_theta: -det / (px * qx) })
}

#[derive(Debug, Clone, Serialize)]
pub struct LinefieldRow {
    pub m: usize,
    /// |ς − τ| with ς = Ψ_{0,m−1}(F_m^p(τ_m)).
    pub base_distance: f64,
    /// |X(ς) − X(τ)|
    pub projective_gap: f64,
    /// t_{m,*}
    pub x_tau_m: f64,
    /// the image slope at ς_m
    pub x_sigma_m: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct LinefieldDemo {
    pub rows: Vec<LinefieldRow>,
    /// The table stopped early because t_{m,*} − t_m was no longer resolved.
    pub truncated: bool,
}

/// Starts from the candidate slope X_m(τ_m) = t_{m,*}, applies the return
/// F_m^p and pushes both slopes down to height 0.
pub fn linefield_divergence_demo(t: &RenormTower, tip: &Tip, ms: impl IntoIterator<Item = usize>) -> Result<LinefieldDemo> {
    if t.map(0)?.is_degenerate() {
        return Err(Error::Degenerate);
    }
    let mut rows = Vec::new();
    let mut truncated = false;
    for m in ms {
        let dm = decompose_at_tip(t, tip, m)?;
        // t_{m,*} − t_m = Σ_{i>m} s_{m,i−1} t_i, summed separately: t_m = −θ_m
        // at τ_m, so X + θ_m is the tail and X + η_m is tail + (η_m − θ_m)
        let (mut tail, mut s) = (0.0, dm.s_n);
        for i in m + 1..=t.depth() {
            let di = decompose_at_tip(t, tip, i)?;
            let inc = s * di.t_n;
            tail += inc;
            s *= di.s_n;
            if inc.abs() < 1e-14 * tail.abs() {
                break;
            }
        }
        if tail == 0.0 || !tail.is_finite() {
            truncated = true;
            break;
        }
        let tau_m = tip.at(m);
        let pr = projectivized_cocycle(t, m, tau_m)?;
        let x_tau = dm.t_n + tail;
        let x_sigma = pr.zeta * (tail + pr.eta_minus_theta) / tail;
        let sigma_m = t.map(m)?.orbit_d(tau_m, t.p()).z;

        let (z_tau, d_tau) = psi_chain_d(t, 0..m, tau_m)?;
        let (z_sig, d_sig) = psi_chain_d(t, 0..m, sigma_m)?;
        let push = |d: crate::analytic::M2, x: f64| (d[(0, 0)] * x + d[(0, 1)]) / d[(1, 1)];
        let gap = (push(d_sig, x_sigma) - push(d_tau, x_tau)).abs();
        rows.push(LinefieldRow {
            m,
            base_distance: (z_sig - z_tau).norm(),
            projective_gap: gap,
            x_tau_m: x_tau,
            x_sigma_m: x_sigma,
        });
    }
    Ok(LinefieldDemo { rows, truncated })
}
