use serde::Serialize;

use crate::analytic::{M2, V2};
use crate::cantor::{average_jacobian, tip, RenormTower, Tip};
use crate::config::Config;
use crate::error::{Error, Result};

/// Depth used for the average Jacobian of each tower.
const B_DEPTH: usize = 6;
/// Pairing requires b̃^{p^m} > K b^{p^m}.
const CONTRAST_K: f64 = 10.0;
/// Displacements below this are pushed by the derivative.
const LINEAR_BELOW: f64 = 1e-7;

#[derive(Debug, Clone, Serialize)]
pub struct HolderRow {
    pub m: usize,
    pub n: usize,
    pub d: f64,
    pub d_tilde: f64,
    pub alpha_emp: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct HolderReport {
    /// The smaller average Jacobian (no tilde).
    pub b: f64,
    pub b_tilde: f64,
    /// The second tower was the one with the smaller b.
    pub swapped: bool,
    /// ½(1 + log b̃ / log b), at most 1.
    pub alpha_bound: f64,
    /// ½(1 + log b_B / log b_A) in the caller's labelling.
    pub alpha_bound_uncapped: f64,
    pub alpha_emp_max: f64,
    pub rows: Vec<HolderRow>,
    pub pass: bool,
}

struct Side<'a> {
    t: &'a RenormTower,
    tip: Tip,
}

fn push(z: V2, d: V2, f: impl Fn(V2) -> Result<V2>, df: impl Fn(V2) -> Result<M2>) -> Result<(V2, V2)> {
    let fz = f(z)?;
    if d.norm() > LINEAR_BELOW {
        Ok((fz, f(z + d)? - fz))
    } else {
        Ok((fz, df(z)? * d))
    }
}

impl Side<'_> {
    /// |Ψ_{0,m−1} F_m Ψ_{m,n}(ς) − Ψ_{0,m−1} F_m Ψ_{m,n}(τ)| with τ the tip
    /// of F_{n+1} and ς = F_{n+1}(τ).
    fn witness(&self, m: usize, n: usize) -> Result<f64> {
        let t = self.t;
        let tau = self.tip.at(n + 1);
        let (mut z, mut d) = (tau, t.map(n + 1)?.step(tau) - tau);
        let psi = |k: usize| (move |w: V2| t.psi(k, w), move |w: V2| t.psi_d(k, w).map(|r| r.1));
        for k in (m..=n).rev() {
            let (f, df) = psi(k);
            (z, d) = push(z, d, f, df)?;
        }
        let fm = t.map(m)?;
        (z, d) = push(
            z,
            d,
            |w| Ok(fm.step(w)),
            |w| {
                let (_, px, py) = fm.phi_d(w.x, w.y);
                Ok(M2::new(px, py, 1.0, 0.0))
            },
        )?;
        for k in (0..m).rev() {
            let (f, df) = psi(k);
            (z, d) = push(z, d, f, df)?;
        }
        // hypot: the squared components underflow from m = 5 on
        Ok(d.x.hypot(d.y))
    }
}

/// ½(1 + log b̃ / log b), capped at 1, and uncapped.
pub fn alpha_bound(b: f64, b_tilde: f64) -> (f64, f64) {
    let a = 0.5 * (1.0 + b_tilde.ln() / b.ln());
    (a.min(1.0), a)
}

fn scaling(t: &RenormTower) -> Result<f64> {
    let s = t.stage(t.depth() + 1).or_else(|_| t.stage(t.depth()))?;
    Ok((s.pre.beta - s.pre.alpha).abs())
}

/// Empirical Hölder exponents of the tip-preserving code conjugacy between
/// two towers, against ½(1 + log b̃/log b).
pub fn holder_experiment(ta: &RenormTower, tb: &RenormTower, cfg: &Config) -> Result<HolderReport> {
    if ta.p() != tb.p() {
        return Err(Error::BadInput("towers have different combinatorics".into()));
    }
    let ba = average_jacobian(ta, B_DEPTH.min(ta.depth()), cfg)?.b;
    let bb = average_jacobian(tb, B_DEPTH.min(tb.depth()), cfg)?.b;
    if ba <= 0.0 || bb <= 0.0 {
        return Err(Error::Degenerate);
    }
    let alpha_bound_uncapped = alpha_bound(ba, bb).1;
    let identical = (ba - bb).abs() <= 1e-12 * ba;
    let swapped = bb < ba;
    let (b, b_tilde, plain, tilde) = if swapped { (bb, ba, tb, ta) } else { (ba, bb, ta, tb) };
    let alpha_bound = alpha_bound(b, b_tilde).0;
    if !identical && (1.0 - alpha_bound) < 0.02 {
        return Err(Error::InsufficientContrast(alpha_bound));
    }
    let sigma = scaling(plain)?;
    let p = plain.p() as f64;
    let a = Side { t: plain, tip: tip(plain)? };
    let at = Side { t: tilde, tip: tip(tilde)? };

    let mut rows = Vec::new();
    for m in 1.. {
        let pm = p.powi(m as i32);
        // the witness distances are of order b^{2p^m}
        if 2.0 * pm * b.log10() < -280.0 {
            break;
        }
        if !identical && pm * (b_tilde.ln() - b.ln()) <= CONTRAST_K.ln() {
            continue;
        }
        // σ^{n−m+1} ≤ b^{p^m} < σ^{n−m}
        let n = m + (pm * b.ln() / sigma.ln()).floor() as usize;
        let (d, d_tilde) = match (a.witness(m, n), at.witness(m, n)) {
            (Ok(d), Ok(dt)) => (d, dt),
            (Err(Error::DepthUnreachable(_)), _) | (_, Err(Error::DepthUnreachable(_))) => break,
            (Err(e), _) | (_, Err(e)) => return Err(e),
        };
        rows.push(HolderRow { m, n, d, d_tilde, alpha_emp: d_tilde.ln() / d.ln() });
    }
    let alpha_emp_max = rows.iter().map(|r| r.alpha_emp).fold(f64::NEG_INFINITY, f64::max);
    let pass = !rows.is_empty() && alpha_emp_max <= alpha_bound + 0.05;
    Ok(HolderReport { b, b_tilde, swapped, alpha_bound, alpha_bound_uncapped, alpha_emp_max, rows, pass })
}
