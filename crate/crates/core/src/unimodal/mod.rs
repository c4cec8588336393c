//! Unimodal maps of J = [0, 1], their renormalisation cycles and scope maps.

mod bounds;
mod cycle;
mod perm;

pub use bounds::{apriori_bounds_report, cycle_intervals, universal_u, AprioriReport, BoundsRow, UniversalU};
pub use cycle::{
    detect_renormalisable, renormalise_unimodal, rescaled_return, scope_functions, RenormCycle,
};
pub use perm::{UnimodalPermutation, Word};

use crate::analytic::{roots, schwarzian, Fn1, Interval};
use crate::config::Config;
use crate::error::{Error, Result};

/// A map f: J → R with f(0) = f(1) = 0 and a single interior critical point.
#[derive(Debug, Clone)]
pub struct UnimodalMap {
    f: Fn1,
    df: Fn1,
    c0: f64,
    alpha: f64,
}

impl UnimodalMap {
    /// Validates the shape of f: endpoint zeros, a unique turning point c0
    /// with f(c0) > c0, and an interior fixed point right of c0. Expansion at
    /// the fixed points is checked separately by `check_membership`, so that
    /// subcritical members of a family can still be represented.
    pub fn new(f: Fn1, cfg: &Config) -> Result<Self> {
        if f.domain() != Interval::UNIT {
            return Err(Error::InvalidMap("domain must be [0, 1]".into()));
        }
        let (f0, f1) = (f.eval(0.0), f.eval(1.0));
        if f0.abs() > cfg.endpoint_tol || f1.abs() > cfg.endpoint_tol {
            return Err(Error::InvalidMap(format!("f(0) = {f0:.3e}, f(1) = {f1:.3e}")));
        }
        let df = f.derivative();
        if !(df.eval(0.0) > 0.0 && df.eval(1.0) < 0.0) {
            return Err(Error::InvalidMap("f must increase at 0 and decrease at 1".into()));
        }
        let crit = df.find_roots(0.0, cfg.root_resolution);
        if crit.len() != 1 {
            return Err(Error::InvalidMap(format!("{} critical points", crit.len())));
        }
        let c0 = crit[0];
        if f.eval(c0) <= c0 {
            return Err(Error::InvalidMap("critical value below the critical point".into()));
        }
        let fixed = roots::find_roots(
            |x| (f.eval(x) - x, df.eval(x) - 1.0),
            c0,
            1.0,
            cfg.root_resolution,
        );
        let alpha = *fixed.first().ok_or_else(|| Error::InvalidMap("no fixed point right of c0".into()))?;
        Ok(UnimodalMap { f, df, c0, alpha })
    }

    /// x ↦ a x (1 − x), represented exactly.
    pub fn logistic(a: f64) -> Result<Self> {
        let f = Fn1::new(Interval::UNIT, vec![a / 8.0, 0.0, -a / 8.0]);
        UnimodalMap::new(f, &Config::default())
    }

    /// Both fixed points expanding by the configured margin.
    pub fn check_membership(&self, cfg: &Config) -> Result<()> {
        let d0 = self.df.eval(0.0).abs();
        let da = self.df.eval(self.alpha).abs();
        if d0 <= 1.0 + cfg.expansion_margin || da <= 1.0 + cfg.expansion_margin {
            return Err(Error::InvalidMap(format!("|f'(0)| = {d0:.6}, |f'(alpha)| = {da:.6}")));
        }
        Ok(())
    }

    pub fn f(&self) -> &Fn1 {
        &self.f
    }

    pub fn c0(&self) -> f64 {
        self.c0
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn critical_value(&self) -> f64 {
        self.f.eval(self.c0)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.f.eval(x)
    }

    pub fn deriv(&self, x: f64) -> f64 {
        self.df.eval(x)
    }

    pub fn iterate(&self, mut x: f64, k: usize) -> f64 {
        for _ in 0..k {
            x = self.f.eval(x);
        }
        x
    }

    /// (f^k(x), (f^k)'(x)).
    pub fn iterate_d(&self, mut x: f64, k: usize) -> (f64, f64) {
        let mut d = 1.0;
        for _ in 0..k {
            d *= self.df.eval(x);
            x = self.f.eval(x);
        }
        (x, d)
    }

    pub fn schwarzian(&self, x: f64) -> Result<f64> {
        schwarzian(&self.f, x)
    }

    /// f(I), accounting for the turning point.
    pub fn interval_image(&self, i: Interval) -> Interval {
        let (a, b) = (self.f.eval(i.lo), self.f.eval(i.hi));
        if i.lo < self.c0 && self.c0 < i.hi {
            Interval { lo: a.min(b), hi: self.critical_value() }
        } else {
            Interval::hull(a, b)
        }
    }

    /// Solution of f(x) = y on the left (x ≤ c0) or right branch.
    pub fn branch_preimage(&self, y: f64, right: bool) -> Option<f64> {
        let (lo, hi) = if right { (self.c0, 1.0) } else { (0.0, self.c0) };
        roots::bracketed_newton(|x| (self.f.eval(x) - y, self.df.eval(x)), lo, hi)
    }

    /// Sup distance on 1001 probes.
    pub fn distance(&self, other: &UnimodalMap) -> f64 {
        self.f.sup_distance(&other.f, 1001)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const A_INF: f64 = 3.5699456718695445;

    fn cfg() -> Config {
        Config::default()
    }

    #[test]
    fn logistic_cycles() {
        let cfg = cfg();
        let f = UnimodalMap::logistic(3.5).unwrap();
        let c = detect_renormalisable(&f, &UnimodalPermutation::doubling(), &cfg).unwrap().unwrap();
        assert!(c.central.contains(0.5, 0.0));
        // f² maps the interval into itself
        for k in 0..=1000 {
            let x = c.central.lo + c.central.len() * k as f64 / 1000.0;
            let y = 3.5 * x * (1.0 - x);
            assert!(c.central.contains(3.5 * y * (1.0 - y), 1e-12));
        }
        let f = UnimodalMap::logistic(2.8).unwrap();
        assert!(detect_renormalisable(&f, &UnimodalPermutation::doubling(), &cfg).unwrap().is_none());
        let f = UnimodalMap::logistic(3.84).unwrap();
        let c = detect_renormalisable(&f, &UnimodalPermutation::period_three(), &cfg).unwrap().unwrap();
        assert_eq!(c.intervals.len(), 3);
        assert!(c.central.contains(0.5, 0.0));
    }

    #[test]
    fn renormalised_logistic_is_valid() {
        let cfg = cfg();
        let f = UnimodalMap::logistic(3.5).unwrap();
        let c = detect_renormalisable(&f, &UnimodalPermutation::doubling(), &cfg).unwrap().unwrap();
        let g = renormalise_unimodal(&f, &c, &cfg).unwrap();
        g.check_membership(&cfg).unwrap();
        assert!(g.eval(0.0).abs() < 1e-10 && g.eval(1.0).abs() < 1e-10);
        for k in 0..=20 {
            let x = k as f64 / 20.0;
            if (x - g.c0()).abs() > 1e-3 {
                assert!(g.schwarzian(x).unwrap() < 0.0, "S at {x}");
            }
        }
    }

    #[test]
    fn scope_maps_invert_the_return_branches() {
        let cfg = cfg();
        for (a, v) in [(A_INF, UnimodalPermutation::doubling()), (3.84, UnimodalPermutation::period_three())] {
            let f = UnimodalMap::logistic(a).unwrap();
            let c = detect_renormalisable(&f, &v, &cfg).unwrap().unwrap();
            let mt = scope_functions(&f, &c, &cfg).unwrap();
            assert!(mt[0].nth_derivative(2).sup_norm(200) < 1e-12);
            for (w, m) in mt.iter().enumerate() {
                let ends = Interval::hull(m.eval(0.0), m.eval(1.0));
                assert!(ends.hausdorff(&c.intervals[w]) < 1e-9, "w={w}");
                let d = m.derivative();
                for k in 0..=50 {
                    let x = k as f64 / 50.0;
                    assert!(d.eval(x).abs() > 1e-3);
                    if w > 0 {
                        assert!((c.h_inv(f.iterate(m.eval(x), v.p() - w)) - x).abs() < 1e-9);
                    }
                }
            }
        }
    }

    #[test]
    fn composite_scope_identity() {
        // The composites mt^w_f ∘ mt^w̄_{Rf} present the depth-2 cycle. Since
        // f^w ∘ h = mt^w ∘ Rf for w ≥ 1, the composite (w, w̄) lands on the
        // interval with r = w + p·(w̄ − 1 mod p), and on r = p·w̄ for w = 0.
        let cfg = cfg();
        let v = UnimodalPermutation::doubling();
        let f = UnimodalMap::logistic(A_INF).unwrap();
        let c = detect_renormalisable(&f, &v, &cfg).unwrap().unwrap();
        let g = renormalise_unimodal(&f, &c, &cfg).unwrap();
        let cg = detect_renormalisable(&g, &v, &cfg).unwrap().unwrap();
        let (mf, mg) = (scope_functions(&f, &c, &cfg).unwrap(), scope_functions(&g, &cg, &cfg).unwrap());
        let levels = cycle_intervals(&f, &v, 2, &cfg).unwrap();
        for w in 0..2 {
            for wb in 0..2 {
                let img = Interval::hull(mf[w].eval(mg[wb].eval(0.0)), mf[w].eval(mg[wb].eval(1.0)));
                let r = if w == 0 { 2 * wb } else { w + 2 * ((wb + 1) % 2) };
                assert!(img.hausdorff(&levels[1][r]) < 1e-8, "{w}{wb}: {img:?} vs {:?}", levels[1][r]);
            }
        }
    }

    #[test]
    fn transfer_time_maps_onto_central() {
        let cfg = cfg();
        let v = UnimodalPermutation::doubling();
        let f = UnimodalMap::logistic(A_INF).unwrap();
        let levels = cycle_intervals(&f, &v, 4, &cfg).unwrap();
        for (k, level) in levels.iter().enumerate() {
            let n = k + 1;
            let central = level[0];
            for w in Word::all(2, n) {
                let j = level[w.r() as usize];
                let q = w.transfer_time() as usize;
                let img = Interval::hull(f.iterate(j.lo, q), f.iterate(j.hi, q));
                assert!(img.hausdorff(&central) < 1e-8, "{w}: {img:?} vs {central:?}");
            }
        }
    }

    #[test]
    fn induced_permutation() {
        let cfg = cfg();
        let v = UnimodalPermutation::doubling();
        let f = UnimodalMap::logistic(A_INF).unwrap();
        let level = cycle_intervals(&f, &v, 2, &cfg).unwrap().swap_remove(1);
        let mut order: Vec<usize> = (0..4).collect();
        order.sort_by(|&i, &j| level[i].lo.total_cmp(&level[j].lo));
        let mut pos = vec![0; 4];
        for (rank, &r) in order.iter().enumerate() {
            pos[r] = rank;
        }
        let mut perm = vec![0; 4];
        for r in 0..4 {
            perm[pos[r]] = pos[(r + 1) % 4];
        }
        let v2 = UnimodalPermutation::new(perm).unwrap();
        let once = |g: &UnimodalMap, v: &UnimodalPermutation| {
            let c = detect_renormalisable(g, v, &cfg).unwrap().unwrap();
            renormalise_unimodal(g, &c, &cfg).unwrap()
        };
        let twice = once(&once(&f, &v), &v);
        let direct = once(&f, &v2);
        assert!(twice.distance(&direct) < 1e-8, "{}", twice.distance(&direct));
    }

    #[test]
    fn scope_maps_depend_lipschitz_on_f() {
        let cfg = cfg();
        let v = UnimodalPermutation::doubling();
        let (f0, f1) = (UnimodalMap::logistic(3.55).unwrap(), UnimodalMap::logistic(3.5501).unwrap());
        let m0 = scope_functions(&f0, &detect_renormalisable(&f0, &v, &cfg).unwrap().unwrap(), &cfg).unwrap();
        let m1 = scope_functions(&f1, &detect_renormalisable(&f1, &v, &cfg).unwrap().unwrap(), &cfg).unwrap();
        let df = f0.distance(&f1);
        for w in 0..2 {
            let c = m0[w].sup_distance(&m1[w], 1001) / df;
            assert!(c.is_finite() && c < 50.0, "w={w}: C={c}");
        }
    }

    #[test]
    fn bounds_report_at_accumulation() {
        let cfg = cfg();
        let f = UnimodalMap::logistic(A_INF).unwrap();
        let rep = apriori_bounds_report(&f, &UnimodalPermutation::doubling(), 4, &cfg).unwrap();
        assert_eq!(rep.rows.len(), 4);
        assert!(!rep.violation, "{rep:?}");
        assert!(rep.distortion_l.is_finite() && rep.geometry_k >= 1.0);
        match apriori_bounds_report(&UnimodalMap::logistic(3.5).unwrap(), &UnimodalPermutation::doubling(), 3, &cfg) {
            Err(e) => assert_eq!(e.kind(), "depth-unreachable"),
            Ok(r) => panic!("{r:?}"),
        }
    }
}
