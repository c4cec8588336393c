//! Fixed points of the unimodal renormalisation operator and its spectrum.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::analytic::{roots, Fn1, Interval};
use crate::config::Config;
use crate::error::{Error, Result};
use crate::unimodal::{
    detect_renormalisable, renormalise_unimodal, RenormCycle, UnimodalMap, UnimodalPermutation,
};

#[derive(Debug, Clone)]
pub struct FixedPointResult {
    pub f_star: UnimodalMap,
    pub cycle: RenormCycle,
    /// |J^0|, the contraction of the affine rescaling.
    pub sigma: f64,
    /// sup |R f_* − f_*| on 1001 probes.
    pub residual: f64,
    pub newton_iterations: usize,
    /// Diagnostic only: f_*'' ≥ 0 on J^1.
    pub convex_on_j1: bool,
}

/// R on coefficient vectors, following the boundary point a and the critical
/// point by Newton from the given guesses.
#[derive(Debug, Clone, Copy)]
struct Tracked {
    a: f64,
    c0: f64,
}

fn iterate_d(f: &Fn1, df: &Fn1, mut x: f64, k: usize) -> (f64, f64) {
    let mut d = 1.0;
    for _ in 0..k {
        d *= df.eval(x);
        x = f.eval(x);
    }
    (x, d)
}

fn apply_tracked(c: &[f64], p: usize, guess: Tracked) -> Option<(Vec<f64>, Tracked)> {
    let f = Fn1::new(Interval::UNIT, c.to_vec());
    let df = f.derivative();
    let d2f = df.derivative();
    let c0 = roots::newton(|x| (df.eval(x), d2f.eval(x)), guess.c0, 1e-14, 60)?;
    let a = roots::newton(
        |x| {
            let (y, d) = iterate_d(&f, &df, x, p);
            (y - x, d - 1.0)
        },
        guess.a,
        1e-14,
        60,
    )?;
    let (lo, hi) = if a < c0 { (c0, 1.0) } else { (0.0, c0) };
    let fa = f.eval(a);
    let ahat = roots::bracketed_newton(|x| (f.eval(x) - fa, df.eval(x)), lo, hi)?;
    if !(0.0..=1.0).contains(&c0) || (ahat - a).abs() < 1e-14 {
        return None;
    }
    let vals: Vec<f64> = Fn1::nodes(Interval::UNIT, c.len() - 1)
        .into_iter()
        .map(|x| (iterate_d(&f, &df, a + (ahat - a) * x, p).0 - a) / (ahat - a))
        .collect();
    let out = Fn1::interpolate(Interval::UNIT, &vals);
    Some((out.coeffs().to_vec(), Tracked { a, c0 }))
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Finite-difference Jacobian of c ↦ R(c) at c, columns in parallel.
fn fd_jacobian(c: &[f64], rc: &[f64], p: usize, t: Tracked, step: f64) -> Option<DMatrix<f64>> {
    let n = c.len();
    let cols: Vec<Option<Vec<f64>>> = (0..n)
        .into_par_iter()
        .map(|j| {
            let mut cc = c.to_vec();
            cc[j] += step;
            let (r, _) = apply_tracked(&cc, p, t)?;
            Some(r.iter().zip(rc).map(|(a, b)| (a - b) / step).collect())
        })
        .collect();
    let mut m = DMatrix::zeros(n, n);
    for (j, col) in cols.into_iter().enumerate() {
        m.set_column(j, &DVector::from_vec(col?));
    }
    Some(m)
}

/// Newton's method for R_υ f = f in coefficient space, starting from `seed`.
pub fn solve_fixed_point(
    v: &UnimodalPermutation,
    seed: &UnimodalMap,
    tol: f64,
    cfg: &Config,
) -> Result<FixedPointResult> {
    let p = v.p();
    let n = cfg.newton_degree(p);
    let cycle = detect_renormalisable(seed, v, cfg)?.ok_or(Error::NotRenormalisable)?;
    let mut t = Tracked { a: cycle.boundary, c0: seed.c0() };
    let mut c = seed.f().resized(n).coeffs().to_vec();
    let mut iterations = 0;
    let mut best = f64::INFINITY;
    let failed = |c: &[f64], iterations, residual| Error::NewtonFailed { iterations, residual, last: c.to_vec() };
    loop {
        let Some((rc, t1)) = apply_tracked(&c, p, t) else {
            return Err(failed(&c, iterations, f64::NAN));
        };
        t = t1;
        let r: Vec<f64> = rc.iter().zip(&c).map(|(a, b)| a - b).collect();
        let res = max_abs(&r);
        if !res.is_finite() {
            return Err(failed(&c, iterations, res));
        }
        // stop at the noise floor, or once progress stalls below tol
        if res < 1e-13 || (res < tol && res > 0.1 * best) {
            break;
        }
        if iterations >= cfg.newton_max_iter {
            return Err(failed(&c, iterations, res));
        }
        best = best.min(res);
        let jac = fd_jacobian(&c, &rc, p, t, cfg.fd_step).ok_or_else(|| failed(&c, iterations, res))?;
        let m = jac - DMatrix::identity(c.len(), c.len());
        let dc = m.lu().solve(&DVector::from_iterator(r.len(), r.iter().map(|x| -x)))
            .ok_or_else(|| failed(&c, iterations, res))?;
        for (ci, d) in c.iter_mut().zip(dc.iter()) {
            *ci += d;
        }
        iterations += 1;
    }
    let f_star = UnimodalMap::new(Fn1::new(Interval::UNIT, c.clone()), cfg)
        .and_then(|f| f.check_membership(cfg).map(|_| f))
        .map_err(|_| failed(&c, iterations, f64::NAN))?;
    let cycle = detect_renormalisable(&f_star, v, cfg)?.ok_or_else(|| failed(&c, iterations, f64::NAN))?;
    let rf = renormalise_unimodal(&f_star, &cycle, cfg)?;
    let residual = rf.distance(&f_star);
    if residual >= tol {
        return Err(failed(&c, iterations, residual));
    }
    let d2 = f_star.f().nth_derivative(2);
    let j1 = cycle.intervals[1];
    let convex_on_j1 = (0..=64).all(|k| d2.eval(j1.lo + j1.len() * k as f64 / 64.0) >= 0.0);
    Ok(FixedPointResult {
        sigma: cycle.sigma(),
        f_star,
        cycle,
        residual,
        newton_iterations: iterations,
        convex_on_j1,
    })
}

/// Smallest logistic parameter in [3, 4] at which c0 = 1/2 is periodic with
/// period p and the map is renormalisable of type υ.
pub fn superstable_parameter(v: &UnimodalPermutation, cfg: &Config) -> Result<f64> {
    let p = v.p();
    let g = |a: f64| {
        let mut x = 0.5;
        for _ in 0..p {
            x = a * x * (1.0 - x);
        }
        x - 0.5
    };
    let steps = 20000;
    for k in 0..steps {
        let (a0, a1) = (3.0 + k as f64 / steps as f64, 3.0 + (k + 1) as f64 / steps as f64);
        if g(a0) * g(a1) > 0.0 {
            continue;
        }
        let Some(a) = roots::bisect(g, a0, a1) else { continue };
        let Ok(f) = UnimodalMap::logistic(a) else { continue };
        if let Ok(Some(_)) = detect_renormalisable(&f, v, cfg) {
            return Ok(a);
        }
    }
    Err(Error::NotRenormalisable)
}

#[derive(Debug, Clone, Serialize)]
pub struct Eigenvalue {
    pub re: f64,
    pub im: f64,
}

impl Eigenvalue {
    pub fn norm(&self) -> f64 {
        self.re.hypot(self.im)
    }
}

#[derive(Debug, Clone)]
pub struct SpectrumResult {
    pub unstable_eigenvalue: f64,
    /// Right eigenvector, as a function with sup norm 1.
    pub eigenfunction: Fn1,
    /// ‖L v − λ v‖ / ‖v‖ for the power-iteration pair.
    pub residual: f64,
    /// Left eigenvector, normalised so that ⟨ℓ, v⟩ = 1 in coefficient space.
    pub left: Vec<f64>,
    /// Eigenvalues by decreasing modulus (first five).
    pub top: Vec<Eigenvalue>,
    /// Leading stable eigenvalue other than the conjugacy modes (h')^j.
    pub stable: Option<Eigenvalue>,
    /// Its eigenfunction, if real.
    pub stable_direction: Option<Fn1>,
}

impl SpectrumResult {
    pub fn second_eigenvalue(&self) -> f64 {
        self.top.get(1).map_or(0.0, Eigenvalue::norm)
    }
}

fn power_iteration(m: &DMatrix<f64>, iters: usize) -> Option<(f64, DVector<f64>, f64)> {
    let n = m.nrows();
    let mut x = DVector::from_fn(n, |i, _| 1.0 / (1.0 + i as f64));
    x /= x.norm();
    let mut lambda = 0.0;
    let mut last = f64::NAN;
    for _ in 0..iters {
        let y = m * &x;
        lambda = x.dot(&y);
        let norm = y.norm();
        if norm == 0.0 || !norm.is_finite() {
            return None;
        }
        x = y / norm * lambda.signum();
        if (lambda - last).abs() < 1e-15 * lambda.abs() {
            break;
        }
        last = lambda;
    }
    let res = (m * &x - &x * lambda).norm() / x.norm();
    Some((lambda, x, res))
}

/// Spectrum of the finite-difference linearisation of R_υ at f_*.
///
/// The normalisation f(0) = f(1) = 0 on J already removes the affine
/// conjugacy directions, so the dominant eigenvalue is found by plain power
/// iteration.
pub fn operator_spectrum(fp: &FixedPointResult, v: &UnimodalPermutation, cfg: &Config) -> Result<SpectrumResult> {
    let p = v.p();
    let c = fp.f_star.f().coeffs().to_vec();
    let t = Tracked { a: fp.cycle.boundary, c0: fp.f_star.c0() };
    let (rc, t) = apply_tracked(&c, p, t).ok_or(Error::SpectrumFailed)?;
    let l = fd_jacobian(&c, &rc, p, t, cfg.fd_step).ok_or(Error::SpectrumFailed)?;
    let (lambda, x, residual) = power_iteration(&l, 2000).ok_or(Error::SpectrumFailed)?;
    if residual > 1e-6 || lambda.abs() <= 1.0 {
        return Err(Error::SpectrumFailed);
    }
    let (mu, y, _) = power_iteration(&l.transpose(), 2000).ok_or(Error::SpectrumFailed)?;
    if (mu - lambda).abs() > 1e-6 * lambda.abs() {
        return Err(Error::SpectrumFailed);
    }
    let eigenfunction = to_fn(x.as_slice());
    let v = DVector::from_column_slice(eigenfunction.coeffs());
    let left: Vec<f64> = (&y / y.dot(&v)).iter().copied().collect();
    let mut all: Vec<Eigenvalue> =
        l.complex_eigenvalues().iter().map(|z| Eigenvalue { re: z.re, im: z.im }).collect();
    all.sort_by(|a, b| b.norm().total_cmp(&a.norm()));
    let top = all[..5.min(all.len())].to_vec();
    // Conjugating f_* by x + εψ with ψ ~ (x − c0)^{j+1} gives eigenvalues
    // (h')^j; those directions are trivial and skipped when picking the
    // leading stable mode.
    let slope = fp.cycle.preimage - fp.cycle.boundary;
    let trivial = |e: &Eigenvalue| {
        e.im == 0.0 && (1..=3).any(|j| (e.re - slope.powi(j)).abs() < 1e-4 * slope.abs().powi(j))
    };
    let stable = all.iter().find(|e| e.norm() < 1.0 && !trivial(e)).cloned();
    let stable_direction = stable.as_ref().filter(|e| e.im == 0.0).and_then(|e| {
        // inverse iteration with a slightly shifted eigenvalue
        let shifted = &l - DMatrix::identity(c.len(), c.len()) * (e.re * (1.0 + 1e-8));
        let lu = shifted.lu();
        let mut z = DVector::from_element(c.len(), 1.0);
        for _ in 0..5 {
            z = lu.solve(&z)?;
            z /= z.norm();
        }
        Some(to_fn(z.as_slice()))
    });
    Ok(SpectrumResult {
        unstable_eigenvalue: lambda,
        eigenfunction,
        residual,
        left,
        top,
        stable,
        stable_direction,
    })
}

fn to_fn(c: &[f64]) -> Fn1 {
    let f = Fn1::new(Interval::UNIT, c.to_vec());
    let s = f.sup_norm(1001);
    f.scaled(1.0 / s)
}

#[derive(Debug, Clone, Serialize)]
pub struct RateProbe {
    /// sup |R^k f − f_*| for k = 0..
    pub distances: Vec<f64>,
    /// max_w Hausdorff distance of J^w(R^k f) to J^w(f_*).
    pub cycle_distances: Vec<f64>,
    /// Fitted geometric rate; None when the distances sit at the noise floor.
    pub rho: Option<f64>,
    pub at_noise_floor: bool,
}

/// Fits |R^k f − f_*| ~ ρ^k over the first n renormalisations.
pub fn convergence_rate_probe(
    f: &UnimodalMap,
    v: &UnimodalPermutation,
    n: usize,
    fp: &FixedPointResult,
    cfg: &Config,
) -> Result<RateProbe> {
    let floor = 1e-12;
    let mut g = f.clone();
    let (mut distances, mut cycle_distances) = (Vec::new(), Vec::new());
    for _ in 0..=n {
        distances.push(g.distance(&fp.f_star));
        let Ok(Some(cycle)) = detect_renormalisable(&g, v, cfg) else { break };
        let d = cycle
            .intervals
            .iter()
            .zip(&fp.cycle.intervals)
            .map(|(a, b)| a.hausdorff(b))
            .fold(0.0, f64::max);
        cycle_distances.push(d);
        match renormalise_unimodal(&g, &cycle, cfg) {
            Ok(next) => g = next,
            Err(_) => break,
        }
    }
    if distances.len() < 3 {
        return Err(Error::InsufficientData(distances.len()));
    }
    let usable: Vec<(f64, f64)> = distances
        .iter()
        .enumerate()
        .filter(|(_, &d)| d > floor)
        .map(|(k, &d)| (k as f64, d.ln()))
        .collect();
    if usable.len() < 3 {
        return Ok(RateProbe { distances, cycle_distances, rho: None, at_noise_floor: true });
    }
    let m = usable.len() as f64;
    let (sx, sy) = usable.iter().fold((0.0, 0.0), |(a, b), &(x, y)| (a + x, b + y));
    let (mx, my) = (sx / m, sy / m);
    let (sxy, sxx) = usable.iter().fold((0.0, 0.0), |(a, b), &(x, y)| (a + (x - mx) * (y - my), b + (x - mx).powi(2)));
    Ok(RateProbe { distances, cycle_distances, rho: Some((sxy / sxx).exp()), at_noise_floor: false })
}
