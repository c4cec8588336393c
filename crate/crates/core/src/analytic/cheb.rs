//! Chebyshev interpolation on Lobatto nodes.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::geometry::Interval;
use super::roots;
use crate::error::{Error, Result};

/// Lobatto nodes on [-1, 1] in ascending order.
pub fn lobatto(n: usize) -> Vec<f64> {
    if n == 0 {
        return vec![0.0];
    }
    (0..=n).map(|k| -(PI * k as f64 / n as f64).cos()).collect()
}

/// Coefficients of the degree-n interpolant through samples at ascending
/// Lobatto nodes.
pub fn transform(samples: &[f64]) -> Vec<f64> {
    let n = samples.len() - 1;
    if n == 0 {
        return vec![samples[0]];
    }
    let table: Vec<f64> = (0..2 * n).map(|m| (PI * m as f64 / n as f64).cos()).collect();
    let mut c = vec![0.0; n + 1];
    for (k, ck) in c.iter_mut().enumerate() {
        let mut s = 0.5 * (samples[0] + if k % 2 == 0 { samples[n] } else { -samples[n] });
        for (i, v) in samples.iter().enumerate().take(n).skip(1) {
            s += v * table[(i * k) % (2 * n)];
        }
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        *ck = sign * 2.0 * s / n as f64;
    }
    c[0] *= 0.5;
    c[n] *= 0.5;
    c
}

pub fn clenshaw(c: &[f64], t: f64) -> f64 {
    let (mut b1, mut b2) = (0.0, 0.0);
    for &ck in c.iter().skip(1).rev() {
        let b0 = ck + 2.0 * t * b1 - b2;
        b2 = b1;
        b1 = b0;
    }
    c[0] + t * b1 - b2
}

/// T_0(t), ..., T_n(t).
pub fn basis(t: f64, n: usize, out: &mut Vec<f64>) {
    out.clear();
    out.push(1.0);
    if n == 0 {
        return;
    }
    out.push(t);
    for k in 2..=n {
        let v = 2.0 * t * out[k - 1] - out[k - 2];
        out.push(v);
    }
}

/// Derivative in t, same length (top coefficient becomes zero).
pub fn deriv(c: &[f64]) -> Vec<f64> {
    let n = c.len() - 1;
    let mut d = vec![0.0; n + 1];
    if n == 0 {
        return d;
    }
    d[n - 1] = 2.0 * n as f64 * c[n];
    for k in (1..n).rev() {
        d[k - 1] = d[k + 1] + 2.0 * k as f64 * c[k];
    }
    d[0] *= 0.5;
    d
}

/// Antiderivative in t vanishing at t = -1; one degree higher.
pub fn integ(c: &[f64]) -> Vec<f64> {
    let n = c.len() - 1;
    let mut r = vec![0.0; n + 2];
    r[1] += c[0];
    if n >= 1 {
        r[2] += c[1] / 4.0;
    }
    for j in 2..=n {
        r[j + 1] += c[j] / (2.0 * (j + 1) as f64);
        r[j - 1] -= c[j] / (2.0 * (j - 1) as f64);
    }
    let at_minus_one = clenshaw(&r, -1.0);
    r[0] -= at_minus_one;
    r
}

/// Relative size of the last three coefficients. Short expansions are exact
/// by assumption and report zero.
pub fn relative_tail(c: &[f64]) -> f64 {
    let scale = c.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 || c.len() < 8 {
        return 0.0;
    }
    c[c.len() - 3..].iter().fold(0.0f64, |m, v| m.max(v.abs())) / scale
}

/// Real-analytic function on an interval, stored by Chebyshev coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fn1 {
    domain: Interval,
    coeffs: Vec<f64>,
}

impl Fn1 {
    pub fn new(domain: Interval, coeffs: Vec<f64>) -> Self {
        assert!(!coeffs.is_empty(), "Fn1 needs at least one coefficient");
        Fn1 { domain, coeffs }
    }

    pub fn nodes(domain: Interval, degree: usize) -> Vec<f64> {
        lobatto(degree).into_iter().map(|t| domain.from_unit(t)).collect()
    }

    /// Interpolant through samples at `nodes(domain, samples.len() - 1)`.
    pub fn interpolate(domain: Interval, samples: &[f64]) -> Self {
        Fn1::new(domain, transform(samples))
    }

    /// As `interpolate`, rejecting fits whose coefficient tail has not decayed.
    pub fn fit(domain: Interval, samples: &[f64], tol: f64) -> Result<Self> {
        let f = Fn1::interpolate(domain, samples);
        f.check_tail(tol)?;
        Ok(f)
    }

    pub fn from_fn(domain: Interval, degree: usize, f: impl Fn(f64) -> f64) -> Self {
        let s: Vec<f64> = Fn1::nodes(domain, degree).into_iter().map(f).collect();
        Fn1::interpolate(domain, &s)
    }

    pub fn constant(domain: Interval, v: f64) -> Self {
        Fn1::new(domain, vec![v])
    }

    /// x ↦ a + b·x
    pub fn linear(domain: Interval, a: f64, b: f64) -> Self {
        let h = 0.5 * domain.len();
        Fn1::new(domain, vec![a + b * domain.mid(), b * h])
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Highest index whose coefficient exceeds `tol` relative to the largest.
    pub fn effective_degree(&self, tol: f64) -> usize {
        let scale = self.coeffs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        self.coeffs.iter().rposition(|c| c.abs() > tol * scale).unwrap_or(0)
    }

    pub fn tail(&self) -> f64 {
        relative_tail(&self.coeffs)
    }

    pub fn check_tail(&self, tol: f64) -> Result<()> {
        let tail = self.tail();
        if tail > tol || !tail.is_finite() {
            return Err(Error::InsufficientResolution { degree: self.degree(), tail, tol });
        }
        Ok(())
    }

    pub fn eval(&self, x: f64) -> f64 {
        clenshaw(&self.coeffs, self.domain.to_unit(x))
    }

    pub fn derivative(&self) -> Fn1 {
        let s = 2.0 / self.domain.len();
        let d = deriv(&self.coeffs).into_iter().map(|v| v * s).collect();
        Fn1::new(self.domain, d)
    }

    pub fn nth_derivative(&self, order: usize) -> Fn1 {
        (0..order).fold(self.clone(), |f, _| f.derivative())
    }

    /// Antiderivative vanishing at the left end of the domain.
    pub fn integral(&self) -> Fn1 {
        let s = 0.5 * self.domain.len();
        let r = integ(&self.coeffs).into_iter().map(|v| v * s).collect();
        Fn1::new(self.domain, r)
    }

    /// Same function with `degree` coefficients kept (padding with zeros).
    pub fn resized(&self, degree: usize) -> Fn1 {
        let mut c = self.coeffs.clone();
        c.resize(degree + 1, 0.0);
        Fn1::new(self.domain, c)
    }

    pub fn scaled(&self, s: f64) -> Fn1 {
        Fn1::new(self.domain, self.coeffs.iter().map(|c| c * s).collect())
    }

    /// self + s·other on a common domain.
    pub fn axpy(&self, s: f64, other: &Fn1) -> Fn1 {
        assert_eq!(self.domain, other.domain, "axpy needs equal domains");
        let n = self.coeffs.len().max(other.coeffs.len());
        let c = (0..n)
            .map(|k| {
                self.coeffs.get(k).copied().unwrap_or(0.0)
                    + s * other.coeffs.get(k).copied().unwrap_or(0.0)
            })
            .collect();
        Fn1::new(self.domain, c)
    }

    /// Sup of |self - other| over `n` equispaced probes.
    pub fn sup_distance(&self, other: &Fn1, n: usize) -> f64 {
        probes(self.domain, n)
            .map(|x| (self.eval(x) - other.eval(x)).abs())
            .fold(0.0, f64::max)
    }

    pub fn sup_norm(&self, n: usize) -> f64 {
        probes(self.domain, n).map(|x| self.eval(x).abs()).fold(0.0, f64::max)
    }

    /// All solutions of f(x) = target in the domain.
    pub fn find_roots(&self, target: f64, resolution: f64) -> Vec<f64> {
        let df = self.derivative();
        roots::find_roots(
            |x| (self.eval(x) - target, df.eval(x)),
            self.domain.lo,
            self.domain.hi,
            resolution,
        )
    }
}

/// `n` equispaced points including both ends.
pub fn probes(d: Interval, n: usize) -> impl Iterator<Item = f64> {
    let n = n.max(2);
    (0..n).map(move |k| d.lo + d.len() * k as f64 / (n - 1) as f64)
}

/// f ∘ g, sampled on the nodes of g's domain.
pub fn compose1(f: &Fn1, g: &Fn1) -> Result<Fn1> {
    let margin = 1e-9 * f.domain.len();
    for x in probes(g.domain, 1000) {
        let y = g.eval(x);
        if !f.domain.contains(y, margin) {
            return Err(Error::DomainEscape { at: vec![x] });
        }
    }
    let degree = f.degree().max(g.degree());
    Ok(Fn1::from_fn(g.domain, degree, |x| f.eval(g.eval(x))))
}
