//! Exact Fourier transforms of supported distributions and their spectral measures.

mod mean;

pub use mean::{
    candidates, diffraction_pp, eberlein_decompose, fb_coeff, is_null_wap, mean_dist, mean_fn,
    MeanResult, NullWapReport, DEFAULT_MEAN_TOL, DEFAULT_WINDOWS,
};

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::comb::{DistExpr, PointAtom};
use crate::comb::ContinuousTerm;
use crate::error::{check_dim, Error, Result};
use crate::lattice::Lattice;
use crate::multi_index::{MultiIndex, Point};
use crate::pairing::{apply, CompensatedSum};
use crate::poly::Poly;
use crate::schwartz::{GaussTerm, TestFunction};

fn cis(theta: f64) -> Complex64 {
    Complex64::from_polar(1.0, theta)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralAtom {
    pub freq: Point,
    #[serde(with = "crate::serde_util::cplx")]
    pub intensity: Complex64,
}

/// Atoms at `q in lattice + shift` with intensity `poly(q) e^{-2 pi i (q - shift).phase_offset}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralLattice {
    pub lattice: Lattice,
    pub shift: Point,
    pub phase_offset: Point,
    pub poly: Poly,
}

impl SpectralLattice {
    pub fn intensity(&self, q: &[f64]) -> Complex64 {
        let rel: f64 = q
            .iter()
            .zip(&self.shift)
            .zip(&self.phase_offset)
            .map(|((a, m), o)| (a - m) * o)
            .sum();
        let v = self.poly.eval(q);
        if rel == 0.0 {
            v
        } else {
            v * cis(-2.0 * PI * rel)
        }
    }

    /// Canonical representative: shift reduced modulo the lattice, phase offset
    /// modulo the dual.
    fn reduced(&self) -> SpectralLattice {
        let shift = self.lattice.reduce(&self.shift);
        let k: Point = self.shift.iter().zip(&shift).map(|(a, b)| a - b).collect();
        let poly = if k.iter().all(|v| *v == 0.0) {
            self.poly.clone()
        } else {
            self.poly.scale(cis(2.0 * PI * dot(&k, &self.phase_offset)))
        };
        SpectralLattice {
            lattice: self.lattice.clone(),
            phase_offset: self.lattice.dual().reduce(&self.phase_offset),
            shift,
            poly,
        }
    }

    pub fn points(&self, radius: f64) -> Vec<(Point, Complex64)> {
        let origin = vec![0.0; self.lattice.dim()];
        self.lattice
            .points_in_ball(&self.shift, &origin, radius)
            .into_iter()
            .map(|q| {
                let v = self.intensity(&q);
                (q, v)
            })
            .collect()
    }
}

/// A tempered measure: finite atoms, polynomially weighted lattice atoms and densities.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralMeasure {
    pub dimension: usize,
    pub atoms: Vec<SpectralAtom>,
    pub lattice_atoms: Vec<SpectralLattice>,
    pub continuous: Vec<ContinuousTerm>,
}

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}

impl SpectralMeasure {
    pub fn new(
        dimension: usize,
        atoms: Vec<SpectralAtom>,
        lattice_atoms: Vec<SpectralLattice>,
        continuous: Vec<ContinuousTerm>,
    ) -> Result<Self> {
        for l in &lattice_atoms {
            check_dim(dimension, l.lattice.dim())?;
        }
        // finite atoms and densities reuse the distribution canonical form
        let as_atoms: Vec<PointAtom> = atoms
            .into_iter()
            .map(|a| PointAtom {
                order: MultiIndex::zeros(a.freq.len()),
                x: a.freq,
                w: a.intensity,
            })
            .collect();
        let pp = DistExpr::new(dimension, as_atoms, Vec::new(), continuous)?;
        let atoms = pp
            .atoms()
            .iter()
            .map(|a| SpectralAtom {
                freq: a.x.clone(),
                intensity: a.w,
            })
            .collect();
        let mut merged: Vec<SpectralLattice> = Vec::new();
        for l in lattice_atoms {
            let l = l.reduced();
            let tol = 1e-12 * l.shift.iter().chain(&l.phase_offset).fold(1.0f64, |m, v| m.max(v.abs()));
            match merged.iter_mut().find(|o| {
                o.lattice.same_as(&l.lattice)
                    && close(&o.shift, &l.shift, tol)
                    && close(&o.phase_offset, &l.phase_offset, tol)
            }) {
                Some(o) => o.poly = o.poly.add(&l.poly),
                None => merged.push(l),
            }
        }
        merged.retain(|l| !l.poly.is_zero());
        Ok(SpectralMeasure {
            dimension,
            atoms,
            lattice_atoms: merged,
            continuous: pp.continuous().to_vec(),
        })
    }

    pub fn zero(dimension: usize) -> Self {
        SpectralMeasure {
            dimension,
            atoms: Vec::new(),
            lattice_atoms: Vec::new(),
            continuous: Vec::new(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.atoms.is_empty() && self.lattice_atoms.is_empty() && self.continuous.is_empty()
    }

    pub fn pp_part(&self) -> SpectralMeasure {
        SpectralMeasure {
            continuous: Vec::new(),
            ..self.clone()
        }
    }

    pub fn continuous_part(&self) -> SpectralMeasure {
        SpectralMeasure {
            atoms: Vec::new(),
            lattice_atoms: Vec::new(),
            ..self.clone()
        }
    }

    pub fn has_pp(&self) -> bool {
        !self.atoms.is_empty() || !self.lattice_atoms.is_empty()
    }

    pub fn add(&self, other: &SpectralMeasure) -> Result<SpectralMeasure> {
        check_dim(self.dimension, other.dimension)?;
        Self::new(
            self.dimension,
            self.atoms.iter().chain(&other.atoms).cloned().collect(),
            self.lattice_atoms.iter().chain(&other.lattice_atoms).cloned().collect(),
            self.continuous.iter().chain(&other.continuous).cloned().collect(),
        )
    }

    /// Point mass at `k`, summed over finite and lattice atoms.
    pub fn atom_at(&self, k: &[f64]) -> Complex64 {
        let tol = 1e-9 * k.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        let mut acc = CompensatedSum::default();
        for a in &self.atoms {
            if close(&a.freq, k, tol) {
                acc.add(a.intensity);
            }
        }
        for l in &self.lattice_atoms {
            let rel: Point = k.iter().zip(&l.shift).map(|(a, b)| a - b).collect();
            if l.lattice.contains(&rel) {
                acc.add(l.intensity(k));
            }
        }
        acc.value()
    }

    /// Every point mass in the ball of `radius` about the origin, ordered by frequency.
    pub fn atoms_in_ball(&self, radius: f64) -> Vec<(Point, Complex64)> {
        let mut out: Vec<PointAtom> = self
            .atoms
            .iter()
            .filter(|a| a.freq.iter().map(|v| v * v).sum::<f64>() <= radius * radius)
            .map(|a| PointAtom {
                x: a.freq.clone(),
                order: MultiIndex::zeros(self.dimension),
                w: a.intensity,
            })
            .collect();
        for l in &self.lattice_atoms {
            for (q, v) in l.points(radius) {
                out.push(PointAtom {
                    x: q,
                    order: MultiIndex::zeros(self.dimension),
                    w: v,
                });
            }
        }
        match DistExpr::from_atoms(self.dimension, out) {
            Ok(e) => e.atoms().iter().map(|a| (a.x.clone(), a.w)).collect(),
            Err(_) => Vec::new(),
        }
    }

    /// Density of the continuous part at `k`.
    pub fn density_at(&self, k: &[f64]) -> Complex64 {
        self.continuous.iter().map(|c| c.eval(k)).sum()
    }

    /// CSV rows `freq_0.., intensity_re, intensity_im, source`: point masses in the
    /// ball of `radius` (source `pp`), then the density sampled on a grid of
    /// spacing `step` over `[-radius, radius]^d` (source `cont`).
    pub fn to_csv(&self, radius: f64, step: f64) -> Result<String> {
        if !(radius > 0.0) || !(step > 0.0) {
            return Err(Error::InvalidArgument("radius and step must be positive".into()));
        }
        let d = self.dimension;
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header: Vec<String> = (0..d).map(|i| format!("freq_{i}")).collect();
        header.extend(["intensity_re", "intensity_im", "source"].map(String::from));
        let err = |e: csv::Error| Error::InvalidArgument(format!("csv: {e}"));
        w.write_record(&header).map_err(err)?;
        let row = |x: &[f64], v: Complex64, src: &str| -> Vec<String> {
            let mut r: Vec<String> = x.iter().map(|c| format!("{c:.16e}")).collect();
            r.push(format!("{:.16e}", v.re));
            r.push(format!("{:.16e}", v.im));
            r.push(src.to_string());
            r
        };
        for (q, v) in self.atoms_in_ball(radius) {
            w.write_record(row(&q, v, "pp")).map_err(err)?;
        }
        if !self.continuous.is_empty() {
            let n = (radius / step).floor() as i64;
            let mut idx = vec![-n; d];
            'grid: loop {
                let x: Vec<f64> = idx.iter().map(|&i| i as f64 * step).collect();
                w.write_record(row(&x, self.density_at(&x), "cont")).map_err(err)?;
                let mut axis = d;
                loop {
                    if axis == 0 {
                        break 'grid;
                    }
                    axis -= 1;
                    if idx[axis] < n {
                        idx[axis] += 1;
                        for v in idx.iter_mut().skip(axis + 1) {
                            *v = -n;
                        }
                        break;
                    }
                    if axis == 0 {
                        break 'grid;
                    }
                }
            }
        }
        let bytes = w.into_inner().map_err(|e| Error::InvalidArgument(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("ascii"))
    }
}

fn two_pi_i_pow(k: u32) -> Complex64 {
    Complex64::new(0.0, 2.0 * PI).powu(k)
}

/// Exact Fourier transform with kernel `e^{-2 pi i k.x}`.
///
/// Lattice terms go to dual-lattice atoms (Poisson summation), finite atoms to
/// polynomial-times-character densities, Gaussian densities to Gaussian
/// densities and character densities with constant amplitude to point masses.
pub fn fourier_exact(psi: &DistExpr) -> Result<SpectralMeasure> {
    let d = psi.dim();
    let origin = Point::from_elem(0.0, d);
    let mut atoms = Vec::new();
    let mut lattice_atoms = Vec::new();
    let mut continuous = Vec::new();
    for l in psi.lattices() {
        let c = l.w * l.lattice.density() * two_pi_i_pow(l.order.total());
        lattice_atoms.push(SpectralLattice {
            lattice: l.lattice.dual(),
            shift: l.modulation.clone(),
            phase_offset: l.offset.clone(),
            poly: Poly::monomial(l.order.clone(), c),
        });
    }
    for a in psi.atoms() {
        let poly = Poly::monomial(a.order.clone(), a.w * two_pi_i_pow(a.order.total()));
        let freq: Point = a.x.iter().map(|v| -v).collect();
        continuous.push(ContinuousTerm::new(GaussTerm::undamped(poly, &origin, &freq)));
    }
    for c in psi.continuous() {
        c.require_unwindowed("fourier transform")?;
        let t = &c.density;
        if t.width.is_some() {
            continuous.push(ContinuousTerm::new(t.fourier()?));
        } else if t.poly.is_constant() {
            // c e^{2 pi i xi.(x - c0)} -> c e^{-2 pi i xi.c0} delta_xi
            let amp = t.poly.coeff(&MultiIndex::zeros(d)) * cis(-2.0 * PI * dot(&t.freq, &t.center));
            atoms.push(SpectralAtom {
                freq: t.freq.clone(),
                intensity: amp,
            });
        } else {
            return Err(Error::Unsupported(
                "fourier transform of an undamped non-constant polynomial density".into(),
            ));
        }
    }
    SpectralMeasure::new(d, atoms, lattice_atoms, continuous)
}

/// `mu(f)` for a spectral measure.
pub fn apply_spectral(mu: &SpectralMeasure, f: &TestFunction) -> Result<Complex64> {
    check_dim(mu.dimension, f.dim())?;
    let mut acc = CompensatedSum::default();
    for a in &mu.atoms {
        acc.add(a.intensity * f.eval(&a.freq));
    }
    for l in &mu.lattice_atoms {
        for piece in f.split() {
            // the profile degree widens the reach like extra derivatives would
            let (center, radius) = piece.reach(l.poly.degree());
            for q in l.lattice.points_in_ball(&l.shift, &center, radius) {
                acc.add(l.intensity(&q) * piece.eval(&q));
            }
        }
    }
    if !mu.continuous.is_empty() {
        let dens = DistExpr::new(mu.dimension, Vec::new(), Vec::new(), mu.continuous.clone())?;
        acc.add(apply(&dens, f)?);
    }
    Ok(acc.value())
}

/// Diffraction of `D^alpha`-derived structures: the transform of `gamma`
/// weighted by `(2 pi)^{2|alpha|} k^{2 alpha}`.
pub fn diffract_derivative(gamma: &DistExpr, alpha: &MultiIndex) -> Result<SpectralMeasure> {
    check_dim(gamma.dim(), alpha.dim())?;
    let base = fourier_exact(gamma)?;
    if alpha.is_zero() {
        return Ok(base);
    }
    let two_a = alpha.scaled(2);
    let factor = (2.0 * PI).powi(2 * alpha.total() as i32);
    let weight = Poly::monomial(two_a.clone(), Complex64::new(factor, 0.0));
    let atoms = base
        .atoms
        .iter()
        .map(|a| SpectralAtom {
            freq: a.freq.clone(),
            intensity: a.intensity * (factor * two_a.monomial(&a.freq)),
        })
        .collect();
    let lattice_atoms = base
        .lattice_atoms
        .iter()
        .map(|l| SpectralLattice {
            poly: l.poly.mul(&weight),
            ..l.clone()
        })
        .collect();
    let continuous = base
        .continuous
        .iter()
        .map(|c| {
            let mut t = c.density.clone();
            // the density polynomial is in y = k - center
            t.poly = t.poly.mul(&weight.shift(&t.center));
            ContinuousTerm::new(t)
        })
        .collect();
    SpectralMeasure::new(base.dimension, atoms, lattice_atoms, continuous)
}

#[cfg(test)]
mod tests;
