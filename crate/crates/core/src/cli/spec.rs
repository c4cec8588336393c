use serde::{Deserialize, Serialize};

use crate::analytic::{Box2, Fn1, Fn2, Interval};
use crate::cantor::{build_tower, tuned_tower, RenormTower};
use crate::config::Config;
use crate::error::{Error, Result};
use crate::fixedpoint::{operator_spectrum, solve_fixed_point, superstable_parameter, FixedPointResult, SpectrumResult};
use crate::henon::{HenonLikeMap, Orientation, Thickening};
use crate::unimodal::{UnimodalMap, UnimodalPermutation};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MapKind {
    /// x ↦ a x (1 − x)
    Logistic,
    /// Monomial coefficients on [0, 1].
    Polynomial,
    /// The renormalisation fixed point of the permutation; towers are tuned
    /// onto its stable manifold and extended by the fixed point.
    FixedPointSeed,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Parameters {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coeffs: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThickeningForm {
    /// ε = eps_bar·y
    LinearY,
    /// ε = eps_bar·y·g(x), `data` the monomial coefficients of g
    Separable,
    /// ε = Σ data[i][j] xⁱ yʲ, bounded by eps_bar
    CoeffMatrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ThickeningData {
    Vector(Vec<f64>),
    Matrix(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThickeningSpec {
    pub form: ThickeningForm,
    pub eps_bar: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data: Option<ThickeningData>,
}

/// A map description, read from TOML:
///
/// ```toml
/// schema = 1
/// kind = "fixed-point-seed"
/// permutation = "p=2; 0->1,1->0"
/// [thickening]
/// form = "linear-y"
/// eps_bar = 1e-2
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapSpecDocument {
    #[serde(default = "schema_version")]
    pub schema: u32,
    pub kind: MapKind,
    #[serde(default)]
    pub parameters: Parameters,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thickening: Option<ThickeningSpec>,
    #[serde(default = "default_orientation")]
    pub orientation: Orientation,
    /// One-line images, "p=3; 0->1,1->2,2->0". Defaults to period doubling.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub permutation: Option<String>,
}

fn schema_version() -> u32 {
    SCHEMA_VERSION
}

fn default_orientation() -> Orientation {
    Orientation::Preserving
}

fn bad(m: impl Into<String>) -> Error {
    Error::BadInput(m.into())
}

fn horner(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc * x + a)
}

impl MapSpecDocument {
    pub fn from_toml(s: &str) -> Result<Self> {
        let doc: MapSpecDocument = toml::from_str(s).map_err(|e| bad(e.to_string()))?;
        doc.validate()?;
        Ok(doc)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("spec documents always serialise")
    }

    /// Structural checks that do not need any numerics.
    pub fn validate(&self) -> Result<()> {
        if self.schema != SCHEMA_VERSION {
            return Err(bad(format!("unsupported schema {}", self.schema)));
        }
        let p = &self.parameters;
        match self.kind {
            MapKind::Logistic => {
                if p.a.is_none() || p.coeffs.is_some() {
                    return Err(bad("logistic takes exactly the parameter a"));
                }
            }
            MapKind::Polynomial => {
                if p.coeffs.is_none() || p.a.is_some() {
                    return Err(bad("polynomial takes exactly the parameter coeffs"));
                }
            }
            MapKind::FixedPointSeed => {
                if p.coeffs.is_some() {
                    return Err(bad("fixed-point-seed takes only an optional seed parameter a"));
                }
            }
        }
        if let Some(t) = &self.thickening {
            if !(t.eps_bar >= 0.0 && t.eps_bar.is_finite()) {
                return Err(bad("eps_bar must be finite and non-negative"));
            }
            match (t.form, &t.data) {
                (ThickeningForm::LinearY, None) => {}
                (ThickeningForm::Separable, Some(ThickeningData::Vector(_))) => {}
                (ThickeningForm::CoeffMatrix, Some(ThickeningData::Matrix(_))) => {}
                (form, _) => return Err(bad(format!("thickening data does not fit the form {form:?}"))),
            }
        }
        self.permutation()?;
        Ok(())
    }

    pub fn permutation(&self) -> Result<UnimodalPermutation> {
        match &self.permutation {
            Some(s) => UnimodalPermutation::parse(s),
            None => Ok(UnimodalPermutation::doubling()),
        }
    }

    /// The unimodal part. For a fixed-point seed this is the Newton seed.
    pub fn unimodal(&self, v: &UnimodalPermutation, cfg: &Config) -> Result<UnimodalMap> {
        match self.kind {
            MapKind::Logistic => UnimodalMap::logistic(self.parameters.a.unwrap_or_default()),
            MapKind::Polynomial => {
                let c = self.parameters.coeffs.clone().unwrap_or_default();
                let f = Fn1::from_fn(Interval::UNIT, (c.len() + 1).max(3), |x| horner(&c, x));
                UnimodalMap::new(f, cfg)
            }
            MapKind::FixedPointSeed => {
                let a = match self.parameters.a {
                    Some(a) => a,
                    None => superstable_parameter(v, cfg)?,
                };
                UnimodalMap::logistic(a)
            }
        }
    }

    pub fn thickening(&self, cfg: &Config) -> Result<Thickening> {
        let Some(t) = &self.thickening else {
            return Ok(Thickening::zero(cfg));
        };
        if t.eps_bar == 0.0 {
            return Ok(Thickening::zero(cfg));
        }
        let (nx, ny) = cfg.degree_2d;
        let c = t.eps_bar;
        let eps = match &t.data {
            None => Fn2::from_fn(Box2::UNIT, nx, ny, |_, y| c * y),
            Some(ThickeningData::Vector(g)) => Fn2::from_fn(Box2::UNIT, nx, ny, |x, y| c * y * horner(g, x)),
            Some(ThickeningData::Matrix(m)) => {
                if m.len() > nx + 1 || m.iter().any(|r| r.len() > ny + 1) {
                    return Err(bad(format!("coefficient matrix exceeds degrees {nx}×{ny}")));
                }
                Fn2::from_fn(Box2::UNIT, nx, ny, |x, y| horner(&m.iter().map(|r| horner(r, y)).collect::<Vec<_>>(), x))
            }
        };
        Thickening::new(eps, t.eps_bar)
    }

    /// Everything derived from the document: permutation, F_0 and, for a
    /// fixed-point seed, the fixed point with its spectrum.
    pub fn prepare(&self, perm_override: Option<&str>, cfg: &Config) -> Result<PreparedMap> {
        let v = match perm_override {
            Some(s) => UnimodalPermutation::parse(s)?,
            None => self.permutation()?,
        };
        let f = self.unimodal(&v, cfg)?;
        let eps = self.thickening(cfg)?;
        let fixed_point = match self.kind {
            MapKind::FixedPointSeed => {
                let fp = solve_fixed_point(&v, &f, 1e-9, cfg)?;
                let sp = operator_spectrum(&fp, &v, cfg)?;
                Some((fp, sp))
            }
            _ => None,
        };
        let map = match &fixed_point {
            Some((fp, _)) => HenonLikeMap::new(fp.f_star.clone(), eps.clone(), self.orientation)?,
            None => HenonLikeMap::new(f, eps.clone(), self.orientation)?,
        };
        Ok(PreparedMap { v, map, eps, orientation: self.orientation, fixed_point })
    }
}

#[derive(Debug, Clone)]
pub struct PreparedMap {
    pub v: UnimodalPermutation,
    /// F_0 as written (for a fixed-point seed, (f_*, ε) before tuning).
    pub map: HenonLikeMap,
    pub eps: Thickening,
    pub orientation: Orientation,
    pub fixed_point: Option<(FixedPointResult, SpectrumResult)>,
}

impl PreparedMap {
    pub fn tower(&self, depth: usize, cfg: &Config) -> Result<RenormTower> {
        match &self.fixed_point {
            Some((fp, sp)) if !self.eps.is_zero() => {
                let t = tuned_tower(fp, sp, &self.v, &self.eps, self.orientation, depth, cfg)?;
                t.tower.with_limit(&fp.f_star, cfg)
            }
            Some((fp, _)) => build_tower(&self.map, &self.v, depth, cfg)?.with_limit(&fp.f_star, cfg),
            None => build_tower(&self.map, &self.v, depth, cfg),
        }
    }
}
