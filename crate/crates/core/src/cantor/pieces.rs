use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use super::RenormTower;
use crate::analytic::{Box2, V2};
use crate::config::Config;
use crate::error::{Error, Result};
use crate::henon::HenonLikeMap;
use crate::unimodal::Word;

#[derive(Debug, Clone, Serialize)]
pub struct Piece {
    pub word: Word,
    /// Bounding box of the sampled boundary, inflated by the configured margin.
    pub bbox: Box2,
    /// Ψ^{w̄}(ζ) with ζ the interior fixed point of F_n. These points form one
    /// periodic orbit of F of period p^n.
    pub center: V2,
    /// Ψ^{w̄}(1/2, 1/2).
    pub mid: V2,
    pub corners: [V2; 4],
    #[serde(skip)]
    pub samples: Vec<V2>,
}

impl Piece {
    pub fn diam(&self) -> f64 {
        self.bbox.diam()
    }

    fn points(&self) -> impl Iterator<Item = &V2> {
        self.samples.iter().chain([&self.mid, &self.center])
    }
}

/// Depth-n pieces B^{w̄} = Ψ^{w̄}(B), in the order of r(w̄).
#[derive(Debug, Clone, Serialize)]
pub struct CantorApprox {
    pub depth: usize,
    pub p: usize,
    pub pieces: Vec<Piece>,
    /// Fitted ratio of successive max piece diameters.
    pub diameter_ratio: Option<f64>,
    pub max_diameters: Vec<f64>,
}

impl CantorApprox {
    pub fn measure(&self) -> f64 {
        (self.p as f64).powi(-(self.depth as i32))
    }

    pub fn piece(&self, w: &Word) -> &Piece {
        &self.pieces[w.r() as usize]
    }

    /// Index of a piece whose box contains z.
    pub fn locate(&self, z: V2) -> Option<usize> {
        self.pieces.iter().position(|p| p.bbox.contains(z, 0.0))
    }

    pub fn write_csv(&self, map: &HenonLikeMap, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["word", "x_lo", "x_hi", "y_lo", "y_hi", "center_x", "center_y", "measure", "log_jacobian"])
            .map_err(|e| Error::Io(e.to_string()))?;
        for p in &self.pieces {
            let j = map.jacobian_det(p.center.x, p.center.y).abs().ln();
            let b = p.bbox;
            w.write_record([
                p.word.to_string(),
                b.x.lo.to_string(),
                b.x.hi.to_string(),
                b.y.lo.to_string(),
                b.y.hi.to_string(),
                p.center.x.to_string(),
                p.center.y.to_string(),
                self.measure().to_string(),
                j.to_string(),
            ])
            .map_err(|e| Error::Io(e.to_string()))?;
        }
        w.flush().map_err(|e| Error::Io(e.to_string()))
    }
}

fn overlap_fraction(a: &Box2, b: &Box2) -> f64 {
    a.intersection_area(b) / a.area().min(b.area()).max(f64::MIN_POSITIVE)
}

/// Overlap beyond this fraction of the smaller box counts as a collision.
/// Sibling pieces touch at periodic points, so their inflated boxes always
/// share a sliver.
const OVERLAP_FRACTION: f64 = 0.05;

pub fn pieces_at_depth(t: &RenormTower, n: usize, cfg: &Config) -> Result<CantorApprox> {
    let p = t.p();
    let base = Box2::UNIT.boundary_samples(cfg.piece_boundary_samples);
    let zeta = t.fixed_point(n)?;
    let words = Word::all(p, n);
    let pieces: Vec<Piece> = words
        .par_iter()
        .map(|w| {
            let f = |z: V2| t.scope_word(w.digits(), z);
            let samples = base.iter().map(|&z| f(z)).collect::<Result<Vec<_>>>()?;
            let corners = [
                f(V2::new(0.0, 0.0))?,
                f(V2::new(1.0, 0.0))?,
                f(V2::new(1.0, 1.0))?,
                f(V2::new(0.0, 1.0))?,
            ];
            let bbox = Box2::bounding(&samples).inflate(cfg.piece_inflation);
            Ok(Piece { word: w.clone(), bbox, center: f(zeta)?, mid: f(V2::new(0.5, 0.5))?, corners, samples })
        })
        .collect::<Result<_>>()?;

    for (i, a) in pieces.iter().enumerate() {
        for b in &pieces[i + 1..] {
            if overlap_fraction(&a.bbox, &b.bbox) > OVERLAP_FRACTION {
                return Err(Error::PiecesOverlap(a.word.to_string(), b.word.to_string()));
            }
        }
    }

    // nesting in the depth-(n−1) boxes
    let mut max_diameters = vec![1.0];
    if n > 0 {
        let parent = pieces_at_depth(t, n - 1, cfg)?;
        max_diameters = parent.max_diameters.clone();
        for pc in &pieces {
            let parent_word = Word::new(p, pc.word.digits()[..n - 1].to_vec())?;
            let q = parent.piece(&parent_word);
            let tol = cfg.piece_inflation + 1e-2 * q.diam();
            if !q.bbox.contains_box(&pc.bbox, tol) {
                return Err(Error::CylinderViolation(format!("piece {} not nested in {}", pc.word, q.word)));
            }
        }
        max_diameters.push(pieces.iter().map(Piece::diam).fold(0.0, f64::max));
    }
    let diameter_ratio = (max_diameters.len() >= 3).then(|| {
        let k = max_diameters.len() - 1;
        (max_diameters[k] / max_diameters[1]).powf(1.0 / (k - 1) as f64)
    });
    Ok(CantorApprox { depth: n, p, pieces, diameter_ratio, max_diameters })
}

/// The piece center coded by w.
pub fn code_to_point(c: &CantorApprox, w: &Word) -> Result<V2> {
    if w.len() != c.depth || w.p() != c.p {
        return Err(Error::BadInput(format!("word {w} has the wrong length or base")));
    }
    Ok(c.piece(w).center)
}

#[derive(Debug, Clone, Serialize)]
pub struct ConjugacyRow {
    pub word: String,
    pub residual: f64,
    pub diameter: f64,
    /// F(B^{w̄}) sampled inside the box of B^{1+w̄}.
    pub image_contained: bool,
}

/// dist(F(point(w̄)), point(1 + w̄)) for every word.
pub fn conjugacy_residuals(c: &CantorApprox, map: &HenonLikeMap) -> Vec<ConjugacyRow> {
    c.pieces
        .iter()
        .map(|pc| {
            let next = c.piece(&pc.word.successor());
            let residual = (map.step(pc.center) - next.center).norm();
            let tol = 1e-2 * next.diam() + map.thickening().sup();
            let image_contained = pc.points().all(|&z| next.bbox.contains(map.step(z), tol));
            ConjugacyRow { word: pc.word.to_string(), residual, diameter: next.diam(), image_contained }
        })
        .collect()
}

/// Pieces that no point of the orbit of z0 (of length `len`) visits.
pub fn orbit_covering(c: &CantorApprox, map: &HenonLikeMap, z0: V2, len: usize) -> Vec<Word> {
    let mut hit = vec![false; c.pieces.len()];
    let mut z = z0;
    for _ in 0..len {
        z = map.step(z);
        for (h, pc) in hit.iter_mut().zip(&c.pieces) {
            if !*h && pc.bbox.contains(z, 0.0) {
                *h = true;
            }
        }
    }
    c.pieces.iter().zip(hit).filter(|(_, h)| !h).map(|(p, _)| p.word.clone()).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct Tip {
    pub tau: V2,
    /// τ_n = Ψ_n(τ_{n+1}) for n = 0..=depth.
    pub tau_per_height: Vec<V2>,
    /// |Ψ_0 ∘ … ∘ Ψ_{k−1}(1/2, 1/2) − τ| for k = 1..=depth + 1.
    pub increments: Vec<f64>,
    /// τ at the heights below the computed ones (the fixed point of the
    /// deepest scope map).
    pub bottom: V2,
}

impl Tip {
    /// τ_k, the tip of F_k.
    pub fn at(&self, k: usize) -> V2 {
        self.tau_per_height.get(k).copied().unwrap_or(self.bottom)
    }
}

/// τ = ⋂ B^{0ⁿ}. The bottom of the chain is the fixed point of the deepest
/// available scope map (the limit stage when present).
pub fn tip(t: &RenormTower) -> Result<Tip> {
    let n = t.depth();
    if n < 2 {
        return Err(Error::BadInput("tip needs a tower of depth at least 2".into()));
    }
    let bottom = n + 1;
    let scope = if t.has_limit() { bottom } else { n };
    let mut z = V2::new(0.5, 0.5);
    let mut converged = false;
    for _ in 0..400 {
        let next = t.psi(scope, z).map_err(|_| Error::TipDiverged)?;
        let d = (next - z).norm();
        z = next;
        if d < 1e-15 {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::TipDiverged);
    }
    let bottom_tau = z;
    let mut taus = vec![z];
    for k in (0..bottom).rev() {
        let next = t.psi(k, *taus.last().unwrap())?;
        taus.push(next);
    }
    taus.reverse();
    taus.pop();
    let tau = taus[0];
    let mut increments = Vec::new();
    for k in 1..=bottom {
        let mut w = V2::new(0.5, 0.5);
        for j in (0..k).rev() {
            w = t.psi(j, w)?;
        }
        increments.push((w - tau).norm());
    }
    if increments.iter().any(|d| !d.is_finite()) || increments.last().copied().unwrap_or(0.0) > increments[0] {
        return Err(Error::TipDiverged);
    }
    Ok(Tip { tau, tau_per_height: taus, increments, bottom: bottom_tau })
}

#[derive(Debug, Clone, Serialize)]
pub struct AverageJacobian {
    pub b: f64,
    pub error_estimate: f64,
    /// |Jac F^{pⁿ}(z)|^{1/pⁿ} at the middle of B^{0ⁿ}.
    pub cross_check: f64,
    pub depth: usize,
    /// b at depths 1..=n.
    pub by_depth: Vec<f64>,
}

fn log_jac_orbit(map: &HenonLikeMap, z: V2, m: usize) -> f64 {
    let mut z = z;
    let mut s = 0.0;
    for _ in 0..m {
        s += map.jacobian_det(z.x, z.y).abs().ln();
        z = map.step(z);
    }
    s
}

fn b_at(t: &RenormTower, n: usize, cfg: &Config) -> Result<(f64, CantorApprox)> {
    let c = pieces_at_depth(t, n, cfg)?;
    let map = t.map(0)?;
    let s: f64 = c.pieces.iter().map(|pc| map.jacobian_det(pc.center.x, pc.center.y).abs().ln()).sum();
    Ok(((s / c.pieces.len() as f64).exp(), c))
}

/// b = exp(p^{−n} Σ log|Jac F(center(w̄))|) over the depth-n pieces.
pub fn average_jacobian(t: &RenormTower, n: usize, cfg: &Config) -> Result<AverageJacobian> {
    let map = t.map(0)?;
    if map.is_degenerate() {
        return Ok(AverageJacobian { b: 0.0, error_estimate: 0.0, cross_check: 0.0, depth: n, by_depth: vec![0.0; n] });
    }
    if n < 2 {
        return Err(Error::BadInput("average Jacobian needs depth at least 2".into()));
    }
    let mut by_depth = Vec::new();
    let mut last = None;
    for k in 1..=n {
        let (b, c) = b_at(t, k, cfg)?;
        by_depth.push(b);
        last = Some(c);
    }
    let c = last.unwrap();
    let b = by_depth[n - 1];
    let m = t.p().pow(n as u32);
    let z = c.piece(&Word::zeros(t.p(), n)).mid;
    let cross_check = (log_jac_orbit(map, z, m) / m as f64).exp();
    Ok(AverageJacobian { b, error_estimate: (b - by_depth[n - 2]).abs(), cross_check, depth: n, by_depth })
}

#[derive(Debug, Clone, Serialize)]
pub struct DistortionRow {
    pub depth: usize,
    /// Return time p^depth.
    pub m: usize,
    pub distortion: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DistortionReport {
    pub rows: Vec<DistortionRow>,
    pub decreasing: bool,
}

/// max over depth-k pieces and pairs of sample points of
/// |log Jac F^{p^k}(z₀) − log Jac F^{p^k}(z₁)|, for k = 0..=n.
pub fn distortion_report(t: &RenormTower, n: usize, cfg: &Config) -> Result<DistortionReport> {
    let map = t.map(0)?;
    if map.is_degenerate() {
        return Err(Error::InvalidMap("distortion needs a non-degenerate map".into()));
    }
    let mut rows = Vec::new();
    for k in 0..=n {
        let c = pieces_at_depth(t, k, cfg)?;
        let m = t.p().pow(k as u32);
        let d = c
            .pieces
            .par_iter()
            .map(|pc| {
                let logs: Vec<f64> = pc.points().map(|&z| log_jac_orbit(map, z, m)).collect();
                let (lo, hi) = logs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &l| (a.min(l), b.max(l)));
                hi - lo
            })
            .reduce(|| 0.0, f64::max);
        rows.push(DistortionRow { depth: k, m, distortion: d });
    }
    let decreasing = rows.windows(2).skip(1).all(|w| w[1].distortion <= w[0].distortion);
    Ok(DistortionReport { rows, decreasing })
}
