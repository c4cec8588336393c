//! Hénon-like maps F(x, y) = (f(x) − o·ε(x, y), x) and their renormalisation.

mod renorm;

pub use renorm::{
    branch_hint, extract_parametrisation, find_central_box, horizontal, horizontal_bar, horizontal_inverse, pre_renormalise,
    pre_renormalised_fns, renormalise_henon, variational_check, HenonRenormalisation,
    PreRenormalisation, VariationalReport,
};

use serde::{Deserialize, Serialize};

use crate::analytic::{Basis2, Box2, Fn1, Fn2, Map2, M2, V2};
use crate::config::Config;
use crate::error::{Error, Result};
use crate::unimodal::UnimodalMap;

/// Sign of det DF = o·∂_yε. Preserving is φ = f − ε, reversing φ = f + ε.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    Preserving,
    Reversing,
}

impl Orientation {
    pub fn sign(self) -> f64 {
        match self {
            Orientation::Preserving => 1.0,
            Orientation::Reversing => -1.0,
        }
    }

    pub fn from_sign(s: f64) -> Self {
        if s < 0.0 {
            Orientation::Reversing
        } else {
            Orientation::Preserving
        }
    }
}

/// ε ≥ 0 on B = J × J with ε(x, 0) = 0.
#[derive(Debug, Clone)]
pub struct Thickening {
    eps: Fn2,
    ex: Fn2,
    ey: Fn2,
    eps_bar: f64,
    zero: bool,
}

const PROBES: usize = 41;

impl Thickening {
    pub fn new(eps: Fn2, eps_bar: f64) -> Result<Self> {
        if eps.domain() != Box2::UNIT {
            return Err(Error::InvalidThickening("domain must be the unit square".into()));
        }
        let zero = eps.is_zero();
        let scale = eps.coeffs().iter().fold(0.0f64, |m, c| m.max(c.abs()));
        // relative floors so that deep towers with tiny ε validate too
        let tol = 1e-12f64.min(1e-9 * scale);
        for x in Fn2::x_nodes(Box2::UNIT, eps.degrees().0).into_iter().chain(crate::analytic::probes(Box2::UNIT.x, 101)) {
            let v = eps.eval(x, 0.0);
            if v.abs() > tol {
                return Err(Error::InvalidThickening(format!("eps({x:.4}, 0) = {v:.3e}")));
            }
        }
        let mut sup = 0.0f64;
        let mut b = Basis2::default();
        for j in 0..PROBES {
            for i in 0..PROBES {
                let (x, y) = (i as f64 / (PROBES - 1) as f64, j as f64 / (PROBES - 1) as f64);
                eps.fill_basis(x, y, &mut b);
                let v = eps.eval_basis(&b);
                if v < -tol {
                    return Err(Error::InvalidThickening(format!("eps({x:.3}, {y:.3}) = {v:.3e} < 0")));
                }
                sup = sup.max(v.abs());
            }
        }
        if sup > eps_bar * (1.0 + 1e-9) {
            return Err(Error::InvalidThickening(format!("sup |eps| = {sup:.3e} exceeds {eps_bar:.3e}")));
        }
        let (ex, ey) = (eps.dx(), eps.dy());
        Ok(Thickening { eps, ex, ey, eps_bar, zero })
    }

    pub fn zero(cfg: &Config) -> Self {
        let (nx, ny) = cfg.degree_2d;
        Thickening::new(Fn2::zero(Box2::UNIT, nx, ny), 0.0).unwrap()
    }

    /// ε(x, y) = c·y.
    pub fn linear(c: f64, cfg: &Config) -> Result<Self> {
        Thickening::from_fn(|_, y| c * y, cfg)
    }

    /// ε(x, y) = c·y·g(x).
    pub fn product(c: f64, g: &Fn1, cfg: &Config) -> Result<Self> {
        Thickening::from_fn(|x, y| c * y * g.eval(x), cfg)
    }

    /// Interpolates ε at the configured degrees; ε̄ is the measured sup.
    pub fn from_fn(e: impl Fn(f64, f64) -> f64, cfg: &Config) -> Result<Self> {
        let (nx, ny) = cfg.degree_2d;
        let eps = Fn2::from_fn(Box2::UNIT, nx, ny, e);
        let sup = eps.sup_norm(PROBES);
        Thickening::new(eps, sup)
    }

    pub fn eps(&self) -> &Fn2 {
        &self.eps
    }

    pub fn eps_bar(&self) -> f64 {
        self.eps_bar
    }

    pub fn sup(&self) -> f64 {
        self.eps.sup_norm(PROBES)
    }

    pub fn is_zero(&self) -> bool {
        self.zero
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        if self.zero {
            return 0.0;
        }
        self.eps.eval(x, y)
    }

    /// (ε, ε_x, ε_y) from one basis evaluation.
    pub fn eval_d(&self, x: f64, y: f64) -> (f64, f64, f64) {
        if self.zero {
            return (0.0, 0.0, 0.0);
        }
        let b = self.eps.basis(x, y);
        (self.eps.eval_basis(&b), self.ex.eval_basis(&b), self.ey.eval_basis(&b))
    }

    pub fn dy(&self, x: f64, y: f64) -> f64 {
        if self.zero {
            return 0.0;
        }
        self.ey.eval(x, y)
    }
}

/// Orbit of (x0, y0) under F with the derivative of the current point.
#[derive(Debug, Clone, Copy)]
pub struct OrbitPoint {
    pub z: V2,
    /// D(F^k) at the start point.
    pub d: M2,
}

#[derive(Debug, Clone)]
pub struct HenonLikeMap {
    f: UnimodalMap,
    df: Fn1,
    eps: Thickening,
    orientation: Orientation,
}

impl HenonLikeMap {
    /// Validates the sampled embedding condition: y ↦ ε(x, y) monotone on
    /// every probe row. Rows where ε vanishes identically are allowed.
    pub fn new(f: UnimodalMap, eps: Thickening, orientation: Orientation) -> Result<Self> {
        if !eps.is_zero() {
            let scale = eps.eps_bar().max(f64::MIN_POSITIVE);
            let n = 33;
            for i in 0..n {
                let x = i as f64 / (n - 1) as f64;
                let row: Vec<f64> = (0..n).map(|j| eps.eval(x, j as f64 / (n - 1) as f64)).collect();
                let up = row.windows(2).all(|w| w[1] - w[0] >= -1e-9 * scale);
                let down = row.windows(2).all(|w| w[1] - w[0] <= 1e-9 * scale);
                if !(up || down) {
                    return Err(Error::InvalidMap(format!("F is not injective on the row x = {x:.3}")));
                }
            }
        }
        let df = f.f().derivative();
        Ok(HenonLikeMap { f, df, eps, orientation })
    }

    /// (f ∘ π_x, π_x).
    pub fn degenerate(f: UnimodalMap, cfg: &Config) -> Self {
        HenonLikeMap::new(f, Thickening::zero(cfg), Orientation::Preserving).unwrap()
    }

    pub fn unimodal(&self) -> &UnimodalMap {
        &self.f
    }

    pub fn thickening(&self) -> &Thickening {
        &self.eps
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    pub fn is_degenerate(&self) -> bool {
        self.eps.is_zero()
    }

    pub fn domain(&self) -> Box2 {
        Box2::UNIT
    }

    pub fn phi(&self, x: f64, y: f64) -> f64 {
        self.f.eval(x) - self.orientation.sign() * self.eps.eval(x, y)
    }

    /// (φ, φ_x, φ_y).
    pub fn phi_d(&self, x: f64, y: f64) -> (f64, f64, f64) {
        let o = self.orientation.sign();
        let (e, ex, ey) = self.eps.eval_d(x, y);
        (self.f.eval(x) - o * e, self.df.eval(x) - o * ex, -o * ey)
    }

    /// det DF = o·∂_yε.
    pub fn jacobian_det(&self, x: f64, y: f64) -> f64 {
        self.orientation.sign() * self.eps.dy(x, y)
    }

    pub fn step(&self, z: V2) -> V2 {
        V2::new(self.phi(z.x, z.y), z.x)
    }

    /// F^k(z), failing at the first step that leaves B.
    pub fn apply(&self, z: V2, k: usize) -> Result<V2> {
        let mut z = z;
        for step in 0..k {
            z = self.step(z);
            if !self.domain().contains(z, 1e-9) {
                return Err(Error::DomainEscape { at: vec![z.x, z.y] }.at_stage(step + 1));
            }
        }
        Ok(z)
    }

    /// F^k(z) with D(F^k)(z), no domain checks.
    pub fn orbit_d(&self, z: V2, k: usize) -> OrbitPoint {
        let (mut x, mut y) = (z.x, z.y);
        // rows: gradient of the current x and y coordinates
        let (mut gx, mut gy) = ([1.0, 0.0], [0.0, 1.0]);
        for _ in 0..k {
            let (p, px, py) = self.phi_d(x, y);
            let g = [px * gx[0] + py * gy[0], px * gx[1] + py * gy[1]];
            gy = gx;
            gx = g;
            y = x;
            x = p;
        }
        OrbitPoint { z: V2::new(x, y), d: M2::new(gx[0], gx[1], gy[0], gy[1]) }
    }

    /// φ^k(x, y) and its gradient.
    pub fn phi_k_d(&self, x: f64, y: f64, k: usize) -> (f64, f64, f64) {
        let o = self.orbit_d(V2::new(x, y), k);
        (o.z.x, o.d[(0, 0)], o.d[(0, 1)])
    }

    /// φ^k sampled on the configured grid.
    pub fn phi_iterate(&self, k: usize, cfg: &Config) -> Fn2 {
        let (nx, ny) = cfg.degree_2d;
        Fn2::from_fn(Box2::UNIT, nx, ny, |x, y| self.orbit_d(V2::new(x, y), k).z.x)
    }

    /// Product of det DF along the first k points of the orbit of z.
    pub fn jacobian_along(&self, z: V2, k: usize) -> f64 {
        let (mut z, mut j) = (z, 1.0);
        for _ in 0..k {
            j *= self.jacobian_det(z.x, z.y);
            z = self.step(z);
        }
        j
    }

    /// Sup distance of φ to another map's φ on a probe grid.
    pub fn distance(&self, other: &HenonLikeMap) -> f64 {
        let n = 41;
        let mut d = 0.0f64;
        for j in 0..n {
            for i in 0..n {
                let (x, y) = (i as f64 / (n - 1) as f64, j as f64 / (n - 1) as f64);
                d = d.max((self.phi(x, y) - other.phi(x, y)).abs());
            }
        }
        d
    }
}

impl Map2 for HenonLikeMap {
    fn eval(&self, z: V2) -> V2 {
        self.step(z)
    }

    fn jacobian(&self, z: V2) -> M2 {
        let (_, px, py) = self.phi_d(z.x, z.y);
        M2::new(px, py, 1.0, 0.0)
    }

    fn domain(&self) -> Option<Box2> {
        Some(Box2::UNIT)
    }
}
