//! Tensor Chebyshev interpolation on a rectangle.

use serde::{Deserialize, Serialize};

use super::cheb::{self, lobatto};
use super::geometry::Box2;
use crate::error::{Error, Result};

/// Chebyshev values at a point, shared between functions of equal degrees.
#[derive(Debug, Clone, Default)]
pub struct Basis2 {
    tx: Vec<f64>,
    ty: Vec<f64>,
}

/// Coefficients are stored y-major: `coeffs[j * (nx + 1) + i]` multiplies
/// T_i(x) T_j(y). Sample grids use the same layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fn2 {
    domain: Box2,
    nx: usize,
    ny: usize,
    coeffs: Vec<f64>,
}

impl Fn2 {
    pub fn zero(domain: Box2, nx: usize, ny: usize) -> Self {
        Fn2 { domain, nx, ny, coeffs: vec![0.0; (nx + 1) * (ny + 1)] }
    }

    pub fn from_coeffs(domain: Box2, nx: usize, ny: usize, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != (nx + 1) * (ny + 1) {
            return Err(Error::BadInput(format!(
                "expected {} coefficients, got {}",
                (nx + 1) * (ny + 1),
                coeffs.len()
            )));
        }
        Ok(Fn2 { domain, nx, ny, coeffs })
    }

    pub fn x_nodes(domain: Box2, nx: usize) -> Vec<f64> {
        lobatto(nx).into_iter().map(|t| domain.x.from_unit(t)).collect()
    }

    pub fn y_nodes(domain: Box2, ny: usize) -> Vec<f64> {
        lobatto(ny).into_iter().map(|t| domain.y.from_unit(t)).collect()
    }

    pub fn interpolate(domain: Box2, nx: usize, ny: usize, samples: &[f64]) -> Self {
        assert_eq!(samples.len(), (nx + 1) * (ny + 1));
        let mut c = vec![0.0; samples.len()];
        for j in 0..=ny {
            let row = cheb::transform(&samples[j * (nx + 1)..(j + 1) * (nx + 1)]);
            c[j * (nx + 1)..(j + 1) * (nx + 1)].copy_from_slice(&row);
        }
        let mut col = vec![0.0; ny + 1];
        for i in 0..=nx {
            for j in 0..=ny {
                col[j] = c[j * (nx + 1) + i];
            }
            let t = cheb::transform(&col);
            for j in 0..=ny {
                c[j * (nx + 1) + i] = t[j];
            }
        }
        Fn2 { domain, nx, ny, coeffs: c }
    }

    pub fn fit(domain: Box2, nx: usize, ny: usize, samples: &[f64], tol: f64) -> Result<Self> {
        let f = Fn2::interpolate(domain, nx, ny, samples);
        f.check_tail(tol)?;
        Ok(f)
    }

    pub fn from_fn(domain: Box2, nx: usize, ny: usize, f: impl Fn(f64, f64) -> f64) -> Self {
        let xs = Fn2::x_nodes(domain, nx);
        let ys = Fn2::y_nodes(domain, ny);
        let mut s = Vec::with_capacity(xs.len() * ys.len());
        for &y in &ys {
            for &x in &xs {
                s.push(f(x, y));
            }
        }
        Fn2::interpolate(domain, nx, ny, &s)
    }

    pub fn domain(&self) -> Box2 {
        self.domain
    }

    pub fn degrees(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    /// Larger of the x- and y-direction relative tails.
    pub fn tail(&self) -> f64 {
        let scale = self.coeffs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if scale == 0.0 {
            return 0.0;
        }
        let mut t = 0.0f64;
        for j in 0..=self.ny {
            for i in 0..=self.nx {
                let in_x_tail = self.nx >= 8 && i + 3 > self.nx;
                let in_y_tail = self.ny >= 8 && j + 3 > self.ny;
                if in_x_tail || in_y_tail {
                    t = t.max(self.coeffs[j * (self.nx + 1) + i].abs());
                }
            }
        }
        t / scale
    }

    pub fn check_tail(&self, tol: f64) -> Result<()> {
        let tail = self.tail();
        if tail > tol || !tail.is_finite() {
            return Err(Error::InsufficientResolution { degree: self.nx.max(self.ny), tail, tol });
        }
        Ok(())
    }

    pub fn basis(&self, x: f64, y: f64) -> Basis2 {
        let mut b = Basis2::default();
        self.fill_basis(x, y, &mut b);
        b
    }

    pub fn fill_basis(&self, x: f64, y: f64, b: &mut Basis2) {
        cheb::basis(self.domain.x.to_unit(x), self.nx, &mut b.tx);
        cheb::basis(self.domain.y.to_unit(y), self.ny, &mut b.ty);
    }

    /// Evaluation against a basis built by a function of the same shape.
    pub fn eval_basis(&self, b: &Basis2) -> f64 {
        let w = self.nx + 1;
        let mut s = 0.0;
        for (j, ty) in b.ty.iter().enumerate() {
            let row = &self.coeffs[j * w..(j + 1) * w];
            let r: f64 = row.iter().zip(&b.tx).map(|(c, t)| c * t).sum();
            s += ty * r;
        }
        s
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.eval_basis(&self.basis(x, y))
    }

    /// Partial derivative in x; degrees unchanged.
    pub fn dx(&self) -> Fn2 {
        let w = self.nx + 1;
        let s = 2.0 / self.domain.x.len();
        let mut c = vec![0.0; self.coeffs.len()];
        for j in 0..=self.ny {
            let d = cheb::deriv(&self.coeffs[j * w..(j + 1) * w]);
            for i in 0..w {
                c[j * w + i] = d[i] * s;
            }
        }
        Fn2 { coeffs: c, ..self.clone() }
    }

    /// Partial derivative in y; degrees unchanged.
    pub fn dy(&self) -> Fn2 {
        let w = self.nx + 1;
        let s = 2.0 / self.domain.y.len();
        let mut c = vec![0.0; self.coeffs.len()];
        let mut col = vec![0.0; self.ny + 1];
        for i in 0..w {
            for j in 0..=self.ny {
                col[j] = self.coeffs[j * w + i];
            }
            let d = cheb::deriv(&col);
            for j in 0..=self.ny {
                c[j * w + i] = d[j] * s;
            }
        }
        Fn2 { coeffs: c, ..self.clone() }
    }

    /// ∫ from y.lo to y, truncated back to degree ny.
    pub fn integral_y(&self) -> Fn2 {
        let w = self.nx + 1;
        let s = 0.5 * self.domain.y.len();
        let mut c = vec![0.0; self.coeffs.len()];
        let mut col = vec![0.0; self.ny + 1];
        for i in 0..w {
            for j in 0..=self.ny {
                col[j] = self.coeffs[j * w + i];
            }
            let r = cheb::integ(&col);
            let top = r[self.ny + 1];
            for j in 0..=self.ny {
                c[j * w + i] = r[j] * s;
            }
            // drop T_{ny+1} and restore the zero at y.lo
            let sign = if (self.ny + 1) % 2 == 0 { 1.0 } else { -1.0 };
            c[i] += top * sign * s;
        }
        Fn2 { coeffs: c, ..self.clone() }
    }

    pub fn scaled(&self, a: f64) -> Fn2 {
        Fn2 { coeffs: self.coeffs.iter().map(|c| c * a).collect(), ..self.clone() }
    }

    /// Values on the interpolation grid, y-major.
    pub fn grid_values(&self) -> Vec<f64> {
        let xs = Fn2::x_nodes(self.domain, self.nx);
        let ys = Fn2::y_nodes(self.domain, self.ny);
        let mut b = Basis2::default();
        let mut out = Vec::with_capacity(xs.len() * ys.len());
        for &y in &ys {
            for &x in &xs {
                self.fill_basis(x, y, &mut b);
                out.push(self.eval_basis(&b));
            }
        }
        out
    }

    /// Max |f| over an n×n uniform grid including the boundary.
    pub fn sup_norm(&self, n: usize) -> f64 {
        let mut m = 0.0f64;
        let mut b = Basis2::default();
        for j in 0..n {
            let y = self.domain.y.lo + self.domain.y.len() * j as f64 / (n - 1) as f64;
            for i in 0..n {
                let x = self.domain.x.lo + self.domain.x.len() * i as f64 / (n - 1) as f64;
                self.fill_basis(x, y, &mut b);
                m = m.max(self.eval_basis(&b).abs());
            }
        }
        m
    }
}
