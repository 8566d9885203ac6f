//! Volume averages, Fourier-Bohr coefficients and the pure-point / continuous split.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{fourier_exact, SpectralAtom, SpectralMeasure};
use crate::comb::{DistExpr, PointAtom};
use crate::error::{check_dim, Error, Result};
use crate::multi_index::{MultiIndex, Point};
use crate::pairing::{conv_eval, CompensatedSum};
use crate::quadrature;
use crate::schwartz::{GaussPolyFn, TestFunction};

pub const DEFAULT_WINDOWS: [u32; 4] = [25, 50, 100, 200];
pub const DEFAULT_MEAN_TOL: f64 = 1e-3;
/// Gauss-Legendre nodes per unit cell and axis.
const CELL_NODES: usize = 24;
const DIFFRACTION_FLOOR: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanResult {
    pub value: Complex64,
    /// `(n, average over [-n, n]^d)`.
    pub window_sequence: Vec<(u32, Complex64)>,
    pub converged: bool,
    /// Difference of the last two partial averages.
    pub residual: f64,
    /// Disagreement with the estimate from a second test function, when computed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub discrepancy: Option<f64>,
}

impl MeanResult {
    fn scaled(mut self, s: Complex64) -> Self {
        self.value *= s;
        for (_, v) in &mut self.window_sequence {
            *v *= s;
        }
        self.residual *= s.norm();
        self
    }
}

fn check_windows(windows: &[u32]) -> Result<()> {
    if windows.is_empty() || windows[0] == 0 || windows.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument(
            "windows must be a non-empty increasing list of positive integers".into(),
        ));
    }
    Ok(())
}

/// Cell lower corners of `[-n, n]^d` in odometer order.
fn cells(dim: usize, n: i64) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let mut idx = vec![-n; dim];
    loop {
        out.push(idx.clone());
        let mut axis = dim;
        loop {
            if axis == 0 {
                return out;
            }
            axis -= 1;
            if idx[axis] < n - 1 {
                idx[axis] += 1;
                for v in idx.iter_mut().skip(axis + 1) {
                    *v = -n;
                }
                break;
            }
        }
    }
}

/// `(1/(2n)^d) int_{[-n,n]^d} g` for each window `n`, by Gauss-Legendre on unit cells.
pub fn mean_fn<G>(dim: usize, g: G, windows: &[u32], tol: f64) -> Result<MeanResult>
where
    G: Fn(&[f64]) -> Complex64 + Sync,
{
    check_windows(windows)?;
    if dim == 0 {
        return Err(Error::InvalidArgument("dimension must be >= 1".into()));
    }
    let nmax = i64::from(*windows.last().expect("non-empty"));
    let corners = cells(dim, nmax);
    let nodes = match dim {
        1 => CELL_NODES,
        2 => 12,
        _ => 6,
    };
    let integrals: Vec<Complex64> = corners
        .par_iter()
        .map(|c| {
            let lo: Vec<f64> = c.iter().map(|&v| v as f64).collect();
            if dim == 1 {
                quadrature::composite(lo[0], lo[0] + 1.0, 1, nodes, |x| g(&[x]))
            } else {
                let hi: Vec<f64> = lo.iter().map(|v| v + 1.0).collect();
                quadrature::tensor_box(&lo, &hi, 1, nodes, &g)
            }
        })
        .collect();
    let window_sequence: Vec<(u32, Complex64)> = windows
        .iter()
        .map(|&n| {
            let n64 = i64::from(n);
            let mut acc = CompensatedSum::default();
            for (c, v) in corners.iter().zip(&integrals) {
                if c.iter().all(|&k| k >= -n64 && k < n64) {
                    acc.add(*v);
                }
            }
            (n, acc.value() / (2.0 * f64::from(n)).powi(dim as i32))
        })
        .collect();
    let value = window_sequence.last().expect("non-empty").1;
    let residual = match window_sequence.len() {
        1 => f64::INFINITY,
        k => (window_sequence[k - 1].1 - window_sequence[k - 2].1).norm(),
    };
    Ok(MeanResult {
        value,
        window_sequence,
        converged: residual < tol,
        residual,
        discrepancy: None,
    })
}

fn mean_single(psi: &DistExpr, f0: &TestFunction, windows: &[u32], tol: f64) -> Result<MeanResult> {
    let integral = f0.integral();
    if integral.norm() <= 1e-6 {
        return Err(Error::InvalidArgument("test function integral is too close to zero".into()));
    }
    // surface structural errors before the quadrature loop
    conv_eval(psi, f0, &vec![0.0; psi.dim()])?;
    let g = |t: &[f64]| conv_eval(psi, f0, t).unwrap_or(Complex64::new(f64::NAN, f64::NAN));
    Ok(mean_fn(psi.dim(), g, windows, tol)?.scaled(1.0 / integral))
}

/// Second test function for the well-definedness cross-check.
fn companion(dim: usize) -> TestFunction {
    let c: Vec<f64> = (0..dim).map(|i| 0.31 / (i + 1) as f64).collect();
    TestFunction::Gauss(GaussPolyFn::gaussian(&c, 0.7))
}

/// `M(psi) = M(psi * f0) / int f0`, cross-checked against a second test function.
pub fn mean_dist(psi: &DistExpr, f0: &TestFunction, windows: &[u32], tol: f64) -> Result<MeanResult> {
    check_dim(psi.dim(), f0.dim())?;
    let mut r = mean_single(psi, f0, windows, tol)?;
    let other = mean_single(psi, &companion(psi.dim()), windows, tol)?;
    r.discrepancy = Some((other.value - r.value).norm());
    Ok(r)
}

/// Fourier-Bohr coefficient `M(chi_{-x} psi)`.
pub fn fb_coeff(psi: &DistExpr, x: &[f64], windows: &[u32], tol: f64) -> Result<MeanResult> {
    check_dim(psi.dim(), x.len())?;
    let minus: Vec<f64> = x.iter().map(|v| -v).collect();
    let shifted = psi.char_multiply(&minus)?;
    mean_dist(&shifted, &TestFunction::unit_gaussian(psi.dim()), windows, tol)
}

/// Pure-point diffraction from Fourier-Bohr coefficients: atoms `|a_x|^2` at the candidates.
pub fn diffraction_pp(
    psi: &DistExpr,
    candidates: &[Point],
    windows: &[u32],
    tol: f64,
) -> Result<SpectralMeasure> {
    let d = psi.dim();
    for c in candidates {
        check_dim(d, c.len())?;
    }
    if psi.is_zero() {
        return Ok(SpectralMeasure::zero(d));
    }
    let coeffs: Vec<MeanResult> = candidates
        .par_iter()
        .map(|x| fb_coeff(psi, x, windows, tol))
        .collect::<Result<_>>()?;
    let atoms = candidates
        .iter()
        .zip(coeffs)
        .filter_map(|(x, a)| {
            let v = a.value.norm_sqr();
            (v >= DIFFRACTION_FLOOR).then(|| SpectralAtom {
                freq: x.clone(),
                intensity: Complex64::new(v, 0.0),
            })
        })
        .collect();
    SpectralMeasure::new(d, atoms, Vec::new(), Vec::new())
}

fn dedupe(dim: usize, pts: Vec<Point>) -> Result<Vec<Point>> {
    let atoms = pts
        .into_iter()
        .map(|x| PointAtom {
            x,
            order: MultiIndex::zeros(dim),
            w: Complex64::new(1.0, 0.0),
        })
        .collect();
    Ok(DistExpr::from_atoms(dim, atoms)?.atoms().iter().map(|a| a.x.clone()).collect())
}

/// Fejer-windowed Fourier estimate `|sum_p (1 - |p|/n)_+ w_p (2 pi i x)^alpha e^{-2 pi i x p}| / n`,
/// with point masses of the density part entering through the Fejer kernel.
fn windowed_fb_estimate(atoms: &[PointAtom], x: f64, n: f64, dense: &SpectralMeasure) -> f64 {
    let mut acc = CompensatedSum::default();
    for a in atoms {
        let taper = 1.0 - a.x[0].abs() / n;
        if taper <= 0.0 {
            continue;
        }
        let factor = Complex64::new(0.0, 2.0 * PI * x).powu(a.order.total());
        acc.add(a.w * factor * Complex64::from_polar(taper, -2.0 * PI * x * a.x[0]));
    }
    acc.add(dense.density_at(&[x]));
    let mut v = acc.value() / n;
    for a in &dense.atoms {
        let u = PI * n * (x - a.freq[0]);
        let kernel = if u == 0.0 { 1.0 } else { (u.sin() / u).powi(2) };
        v += a.intensity * kernel;
    }
    v.norm()
}

/// Candidate frequencies in the ball of `radius`.
///
/// Pure lattice combs use their dual lattices. Other one-dimensional inputs are
/// scanned on a grid of spacing `1/(4 n_max)` with a Fejer-windowed Fourier estimate,
/// and local maxima above `threshold` are polished by golden-section search.
pub fn candidates(psi: &DistExpr, radius: f64, windows: &[u32], threshold: f64) -> Result<Vec<Point>> {
    check_windows(windows)?;
    let d = psi.dim();
    if psi.atoms().is_empty() && psi.continuous().is_empty() {
        let origin = vec![0.0; d];
        let mut pts = Vec::new();
        for l in psi.lattices() {
            pts.extend(l.lattice.dual().points_in_ball(&l.modulation, &origin, radius));
        }
        return dedupe(d, pts);
    }
    if d != 1 {
        return Err(Error::Unsupported(
            "frequency scan is implemented for one-dimensional inputs".into(),
        ));
    }
    let n = f64::from(*windows.last().expect("non-empty"));
    let mut atoms: Vec<PointAtom> = psi.atoms().to_vec();
    for l in psi.lattices() {
        atoms.extend(l.expand(&[0.0], n));
    }
    let dense = fourier_exact(&DistExpr::new(1, Vec::new(), Vec::new(), psi.continuous().to_vec())?)?;
    let step = 1.0 / (4.0 * n);
    let m = (radius / step).floor() as i64;
    let grid: Vec<f64> = (-m..=m).map(|i| i as f64 * step).collect();
    let vals: Vec<f64> = grid
        .par_iter()
        .map(|&x| windowed_fb_estimate(&atoms, x, n, &dense))
        .collect();
    let mut pts = Vec::new();
    for i in 0..vals.len() {
        let left = if i > 0 { vals[i - 1] } else { f64::NEG_INFINITY };
        let right = if i + 1 < vals.len() { vals[i + 1] } else { f64::NEG_INFINITY };
        if vals[i] >= threshold && vals[i] >= left && vals[i] > right {
            let (mut a, mut b) = (grid[i] - step, grid[i] + step);
            let gr = (5f64.sqrt() - 1.0) / 2.0;
            let f = |x: f64| windowed_fb_estimate(&atoms, x, n, &dense);
            let (mut c, mut e) = (b - gr * (b - a), a + gr * (b - a));
            let (mut fc, mut fe) = (f(c), f(e));
            for _ in 0..60 {
                if fc > fe {
                    b = e;
                    e = c;
                    fe = fc;
                    c = b - gr * (b - a);
                    fc = f(c);
                } else {
                    a = c;
                    c = e;
                    fc = fe;
                    e = a + gr * (b - a);
                    fe = f(e);
                }
            }
            let x = 0.5 * (a + b);
            pts.push(Point::from_slice(&[x]));
        }
    }
    dedupe(1, pts)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NullWapReport {
    pub null: bool,
    pub coefficients: Vec<(Point, Complex64)>,
    pub offending: Vec<(Point, Complex64)>,
}

/// Whether every Fourier-Bohr coefficient at the candidates is below `tol`.
pub fn is_null_wap(psi: &DistExpr, candidates: &[Point], windows: &[u32], tol: f64) -> Result<NullWapReport> {
    for c in candidates {
        check_dim(psi.dim(), c.len())?;
    }
    let coefficients: Vec<(Point, Complex64)> = if psi.is_zero() {
        candidates.iter().map(|c| (c.clone(), Complex64::default())).collect()
    } else {
        candidates
            .par_iter()
            .map(|x| fb_coeff(psi, x, windows, tol).map(|r| (x.clone(), r.value)))
            .collect::<Result<_>>()?
    };
    let offending: Vec<_> = coefficients.iter().filter(|(_, v)| v.norm() >= tol).cloned().collect();
    Ok(NullWapReport {
        null: offending.is_empty(),
        coefficients,
        offending,
    })
}

/// `psi = psi_s + psi_0` with `psi_s` the part whose transform is pure point.
///
/// Every supported term has a transform that is either purely atomic (lattice
/// combs, character densities) or absolutely continuous (finite atoms, Gaussian
/// densities), so the split is made term by term and is exact.
pub fn eberlein_decompose(psi: &DistExpr) -> Result<(DistExpr, DistExpr)> {
    fourier_exact(psi)?;
    let d = psi.dim();
    let (undamped, damped): (Vec<_>, Vec<_>) = psi.continuous().iter().cloned().partition(|c| !c.is_damped());
    let s = DistExpr::new(d, Vec::new(), psi.lattices().to_vec(), undamped)?;
    let zero = DistExpr::new(d, psi.atoms().to_vec(), Vec::new(), damped)?;
    Ok((s, zero))
}
