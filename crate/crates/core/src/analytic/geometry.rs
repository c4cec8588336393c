use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type V2 = Vector2<f64>;
pub type M2 = Matrix2<f64>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::BadInput(format!("invalid interval [{lo}, {hi}]")));
        }
        Ok(Interval { lo, hi })
    }

    /// Interval spanned by two points in either order.
    pub fn hull(a: f64, b: f64) -> Self {
        Interval { lo: a.min(b), hi: a.max(b) }
    }

    pub const UNIT: Interval = Interval { lo: 0.0, hi: 1.0 };

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, x: f64, tol: f64) -> bool {
        x >= self.lo - tol && x <= self.hi + tol
    }

    pub fn contains_interval(&self, other: &Interval, tol: f64) -> bool {
        other.lo >= self.lo - tol && other.hi <= self.hi + tol
    }

    /// Map t in [-1, 1] onto the interval.
    pub fn from_unit(&self, t: f64) -> f64 {
        0.5 * (self.lo + self.hi) + 0.5 * (self.hi - self.lo) * t
    }

    pub fn to_unit(&self, x: f64) -> f64 {
        (2.0 * x - self.lo - self.hi) / (self.hi - self.lo)
    }

    /// Length of the overlap of the interiors, zero if disjoint.
    pub fn overlap(&self, other: &Interval) -> f64 {
        (self.hi.min(other.hi) - self.lo.max(other.lo)).max(0.0)
    }

    pub fn hausdorff(&self, other: &Interval) -> f64 {
        (self.lo - other.lo).abs().max((self.hi - other.hi).abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Box2 {
    pub x: Interval,
    pub y: Interval,
}

impl Box2 {
    pub const UNIT: Box2 = Box2 { x: Interval::UNIT, y: Interval::UNIT };

    pub fn square(i: Interval) -> Self {
        Box2 { x: i, y: i }
    }

    pub fn center(&self) -> V2 {
        V2::new(self.x.mid(), self.y.mid())
    }

    pub fn contains(&self, z: V2, tol: f64) -> bool {
        self.x.contains(z.x, tol) && self.y.contains(z.y, tol)
    }

    pub fn diam(&self) -> f64 {
        self.x.len().hypot(self.y.len())
    }

    pub fn area(&self) -> f64 {
        self.x.len() * self.y.len()
    }

    pub fn intersection_area(&self, other: &Box2) -> f64 {
        self.x.overlap(&other.x) * self.y.overlap(&other.y)
    }

    pub fn inflate(&self, m: f64) -> Box2 {
        Box2 {
            x: Interval { lo: self.x.lo - m, hi: self.x.hi + m },
            y: Interval { lo: self.y.lo - m, hi: self.y.hi + m },
        }
    }

    pub fn contains_box(&self, other: &Box2, tol: f64) -> bool {
        self.x.contains_interval(&other.x, tol) && self.y.contains_interval(&other.y, tol)
    }

    /// Smallest box containing the points.
    pub fn bounding(points: &[V2]) -> Box2 {
        let mut b = Box2 {
            x: Interval { lo: f64::INFINITY, hi: f64::NEG_INFINITY },
            y: Interval { lo: f64::INFINITY, hi: f64::NEG_INFINITY },
        };
        for z in points {
            b.x.lo = b.x.lo.min(z.x);
            b.x.hi = b.x.hi.max(z.x);
            b.y.lo = b.y.lo.min(z.y);
            b.y.hi = b.y.hi.max(z.y);
        }
        b
    }

    /// `n` points spread along the boundary, starting at the lower-left corner
    /// and walking anticlockwise.
    pub fn boundary_samples(&self, n: usize) -> Vec<V2> {
        let per = n.max(4) / 4;
        let mut out = Vec::with_capacity(4 * per);
        let corners = [
            V2::new(self.x.lo, self.y.lo),
            V2::new(self.x.hi, self.y.lo),
            V2::new(self.x.hi, self.y.hi),
            V2::new(self.x.lo, self.y.hi),
        ];
        for k in 0..4 {
            let (a, b) = (corners[k], corners[(k + 1) % 4]);
            for i in 0..per {
                let s = i as f64 / per as f64;
                out.push(a + (b - a) * s);
            }
        }
        out
    }
}

/// z ↦ linear·z + offset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Affine2 {
    pub linear: M2,
    pub offset: V2,
}

impl Affine2 {
    pub fn new(linear: M2, offset: V2) -> Result<Self> {
        if linear.determinant().abs() < 1e-300 {
            return Err(Error::SingularDerivative([offset.x, offset.y]));
        }
        Ok(Affine2 { linear, offset })
    }

    pub fn identity() -> Self {
        Affine2 { linear: M2::identity(), offset: V2::zeros() }
    }

    pub fn apply(&self, z: V2) -> V2 {
        self.linear * z + self.offset
    }

    pub fn inverse(&self) -> Affine2 {
        let inv = self.linear.try_inverse().expect("invertible by construction");
        Affine2 { linear: inv, offset: -(inv * self.offset) }
    }

    /// self ∘ other
    pub fn compose(&self, other: &Affine2) -> Affine2 {
        Affine2 {
            linear: self.linear * other.linear,
            offset: self.linear * other.offset + self.offset,
        }
    }
}
