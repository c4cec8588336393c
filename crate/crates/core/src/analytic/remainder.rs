//! Second-order remainders of planar maps and the first variation of
//! compositions.

use super::geometry::{Affine2, Box2, M2, V2};
use crate::error::{Error, Result};

/// A smooth planar map with an exact derivative.
pub trait Map2: Sync {
    fn eval(&self, z: V2) -> V2;
    fn jacobian(&self, z: V2) -> M2;
    /// Region where `eval` is trusted, if restricted.
    fn domain(&self) -> Option<Box2> {
        None
    }
}

impl Map2 for Affine2 {
    fn eval(&self, z: V2) -> V2 {
        self.apply(z)
    }
    fn jacobian(&self, _z: V2) -> M2 {
        self.linear
    }
}

/// z ↦ c + A z + (zᵀ Q₀ z, zᵀ Q₁ z), with Q₀, Q₁ symmetric.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadratic2 {
    pub c: V2,
    pub a: M2,
    pub q: [M2; 2],
}

impl Quadratic2 {
    pub fn new(c: V2, a: M2, q0: M2, q1: M2) -> Self {
        let sym = |m: M2| (m + m.transpose()) * 0.5;
        Quadratic2 { c, a, q: [sym(q0), sym(q1)] }
    }
}

impl Map2 for Quadratic2 {
    fn eval(&self, z: V2) -> V2 {
        let quad = V2::new(z.dot(&(self.q[0] * z)), z.dot(&(self.q[1] * z)));
        self.c + self.a * z + quad
    }
    fn jacobian(&self, z: V2) -> M2 {
        let r0 = (self.q[0] * z * 2.0).transpose();
        let r1 = (self.q[1] * z * 2.0).transpose();
        self.a + M2::new(r0[0], r0[1], r1[0], r1[1])
    }
}

/// outer ∘ inner
pub struct Compose<'a> {
    pub outer: &'a dyn Map2,
    pub inner: &'a dyn Map2,
}

impl Map2 for Compose<'_> {
    fn eval(&self, z: V2) -> V2 {
        self.outer.eval(self.inner.eval(z))
    }
    fn jacobian(&self, z: V2) -> M2 {
        self.outer.jacobian(self.inner.eval(z)) * self.inner.jacobian(z)
    }
}

/// a + s·b
pub struct Perturbed<'a> {
    pub base: &'a dyn Map2,
    pub pert: &'a dyn Map2,
    pub scale: f64,
}

impl Map2 for Perturbed<'_> {
    fn eval(&self, z: V2) -> V2 {
        self.base.eval(z) + self.pert.eval(z) * self.scale
    }
    fn jacobian(&self, z: V2) -> M2 {
        self.base.jacobian(z) + self.pert.jacobian(z) * self.scale
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RemainderParts {
    pub value: V2,
    pub derivative: M2,
    pub remainder: V2,
}

fn checked_inverse(d: M2, at: V2) -> Result<M2> {
    let scale = d.abs().max().max(1e-300);
    if d.determinant().abs() <= 1e-14 * scale * scale {
        return Err(Error::SingularDerivative([at.x, at.y]));
    }
    d.try_inverse().ok_or(Error::SingularDerivative([at.x, at.y]))
}

/// Splits F(z0 + z1) = F(z0) + DF(z0)(z1 + R(z1)) and returns the pieces.
pub fn remainder_decomposition(f: &dyn Map2, z0: V2, z1: V2) -> Result<RemainderParts> {
    let value = f.eval(z0);
    let derivative = f.jacobian(z0);
    let inv = checked_inverse(derivative, z0)?;
    let remainder = inv * (f.eval(z0 + z1) - value) - z1;
    Ok(RemainderParts { value, derivative, remainder })
}

/// Remainder of F∘G at z0 assembled from the remainders of F and G:
/// R_G(z1) + DG⁻¹ R_F(G z0)(DG (z1 + R_G(z1))).
pub fn composed_remainder(f: &dyn Map2, g: &dyn Map2, z0: V2, z1: V2) -> Result<V2> {
    let rg = remainder_decomposition(g, z0, z1)?;
    let w = rg.derivative * (z1 + rg.remainder);
    let rf = remainder_decomposition(f, rg.value, w)?;
    let inv = checked_inverse(rg.derivative, z0)?;
    Ok(rg.remainder + inv * rf.remainder)
}

fn check_domain(m: &dyn Map2, z: V2) -> Result<()> {
    if let Some(d) = m.domain() {
        if !d.contains(z, 1e-12) {
            return Err(Error::DomainEscape { at: vec![z.x, z.y] });
        }
    }
    Ok(())
}

/// F_1 ∘ F_2 ∘ … ∘ F_n (F_n applied first).
pub fn compose_all(maps: &[&dyn Map2], z: V2) -> Result<V2> {
    let mut w = z;
    for m in maps.iter().rev() {
        check_domain(*m, w)?;
        w = m.eval(w);
    }
    Ok(w)
}

/// First variation of the n-fold composition in the direction (E_1, …, E_n):
/// Σ_i D(F_1∘…∘F_i)(z_i) E_{i+1}(z_{i+1}) with z_i = F_{i+1}∘…∘F_n(z).
pub fn composition_first_variation(maps: &[&dyn Map2], perts: &[&dyn Map2], z: V2) -> Result<V2> {
    let n = maps.len();
    if perts.len() != n {
        return Err(Error::BadInput("maps and perturbations differ in length".into()));
    }
    let mut zs = vec![V2::zeros(); n + 1];
    zs[n] = z;
    for k in (1..=n).rev() {
        check_domain(maps[k - 1], zs[k])?;
        zs[k - 1] = maps[k - 1].eval(zs[k]);
    }
    let mut prod = M2::identity();
    let mut sum = V2::zeros();
    for i in 0..n {
        sum += prod * perts[i].eval(zs[i + 1]);
        prod *= maps[i].jacobian(zs[i + 1]);
    }
    Ok(sum)
}

/// Central-difference Jacobian, for checking exact derivatives.
pub fn fd_jacobian(f: impl Fn(V2) -> V2, z: V2, h: f64) -> M2 {
    let ex = V2::new(h, 0.0);
    let ey = V2::new(0.0, h);
    let cx = (f(z + ex) - f(z - ex)) / (2.0 * h);
    let cy = (f(z + ey) - f(z - ey)) / (2.0 * h);
    M2::new(cx.x, cy.x, cx.y, cy.y)
}
