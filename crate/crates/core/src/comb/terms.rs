use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::lattice::Lattice;
use crate::multi_index::{MultiIndex, Point};
use crate::schwartz::{GaussTerm, SmoothCutoff, VanHove};

pub(crate) fn cis(theta: f64) -> Complex64 {
    Complex64::from_polar(1.0, theta)
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn zero_point(p: &Point) -> bool {
    p.iter().all(|v| *v == 0.0)
}

/// `w D^order delta_x`, acting as `f -> w (-1)^{|order|} D^order f(x)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointAtom {
    pub x: Point,
    pub order: MultiIndex,
    #[serde(with = "crate::serde_util::cplx")]
    pub w: Complex64,
}

impl PointAtom {
    pub fn new(x: &[f64], order: MultiIndex, w: Complex64) -> Self {
        PointAtom {
            x: Point::from_slice(x),
            order,
            w,
        }
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub(crate) fn validate(&self, dim: usize) -> Result<()> {
        check_dim(dim, self.x.len())?;
        check_dim(dim, self.order.dim())?;
        if self.x.iter().any(|v| !v.is_finite()) || !self.w.is_finite() {
            return Err(Error::InvalidArgument("non-finite atom".into()));
        }
        Ok(())
    }
}

/// `sum_{p in Lambda + offset} w chi_m(p) D^order delta_p` with `chi_m(p) = e^{2 pi i m.p}`.
///
/// The modulation keeps the family closed under character multiplication; it
/// is zero for plain lattice combs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeTerm {
    pub lattice: Lattice,
    pub order: MultiIndex,
    #[serde(with = "crate::serde_util::cplx")]
    pub w: Complex64,
    pub offset: Point,
    #[serde(default, skip_serializing_if = "zero_point")]
    pub modulation: Point,
}

impl LatticeTerm {
    pub fn new(lattice: Lattice, order: MultiIndex, w: Complex64) -> Self {
        let d = lattice.dim();
        LatticeTerm {
            lattice,
            order,
            w,
            offset: Point::from_elem(0.0, d),
            modulation: Point::from_elem(0.0, d),
        }
    }

    pub fn with_offset(mut self, offset: &[f64]) -> Self {
        self.offset = Point::from_slice(offset);
        self
    }

    pub fn dim(&self) -> usize {
        self.lattice.dim()
    }

    pub fn is_modulated(&self) -> bool {
        !zero_point(&self.modulation)
    }

    pub(crate) fn validate(&self, dim: usize) -> Result<()> {
        check_dim(dim, self.lattice.dim())?;
        check_dim(dim, self.order.dim())?;
        check_dim(dim, self.offset.len())?;
        check_dim(dim, self.modulation.len())?;
        if !self.w.is_finite() || self.offset.iter().chain(&self.modulation).any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite lattice term".into()));
        }
        Ok(())
    }

    /// Offset reduced modulo `Lambda`, modulation modulo `Lambda*`.
    pub fn reduced(&self) -> LatticeTerm {
        let offset = self.lattice.reduce(&self.offset);
        let dual = self.lattice.dual();
        let modulation = dual.reduce(&self.modulation);
        // chi_m(p) = chi_{m'}(p) chi_k(offset) for m = m' + k, k in Lambda*
        let k: Point = self.modulation.iter().zip(&modulation).map(|(a, b)| a - b).collect();
        let w = if zero_point(&k) {
            self.w
        } else {
            self.w * cis(2.0 * PI * dot(&k, &offset))
        };
        LatticeTerm {
            lattice: self.lattice.clone(),
            order: self.order.clone(),
            w,
            offset,
            modulation,
        }
    }

    /// Weight of the atom at lattice point `p`.
    pub fn weight_at(&self, p: &[f64]) -> Complex64 {
        if self.is_modulated() {
            self.w * cis(2.0 * PI * dot(&self.modulation, p))
        } else {
            self.w
        }
    }

    /// Atoms at the points of `Lambda + offset` within `radius` of `center`.
    pub fn expand(&self, center: &[f64], radius: f64) -> Vec<PointAtom> {
        self.lattice
            .points_in_ball(&self.offset, center, radius)
            .into_iter()
            .map(|p| PointAtom {
                w: self.weight_at(&p),
                x: p,
                order: self.order.clone(),
            })
            .collect()
    }
}

/// Multiplication by `h_R(x - center)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub cutoff: SmoothCutoff,
    pub radius: f64,
    pub center: Point,
}

impl Window {
    pub fn value(&self, x: &[f64]) -> f64 {
        let y: Vec<f64> = x.iter().zip(&self.center).map(|(a, c)| a - c).collect();
        VanHove {
            cutoff: self.cutoff,
            radius: self.radius,
        }
        .eval(&y)
    }
}

/// A density against Lebesgue measure: `P(y) e^{2 pi i xi.y} [e^{-pi|y|^2/w^2}]`, `y = x - c`,
/// optionally restricted by a smooth window.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContinuousTerm {
    #[serde(flatten)]
    pub density: GaussTerm,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<Window>,
}

impl ContinuousTerm {
    pub fn new(density: GaussTerm) -> Self {
        ContinuousTerm { density, window: None }
    }

    pub fn dim(&self) -> usize {
        self.density.dim()
    }

    pub fn eval(&self, x: &[f64]) -> Complex64 {
        let v = self.density.eval(x);
        match &self.window {
            Some(w) => v * w.value(x),
            None => v,
        }
    }

    pub(crate) fn validate(&self, dim: usize) -> Result<()> {
        check_dim(dim, self.dim())?;
        self.density.validate()
    }

    pub fn is_damped(&self) -> bool {
        self.density.width.is_some()
    }

    pub(crate) fn require_unwindowed(&self, what: &str) -> Result<()> {
        if self.window.is_some() {
            return Err(Error::Unsupported(format!("{what} of a windowed density")));
        }
        Ok(())
    }
}
