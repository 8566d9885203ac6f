//! Quadrature rules. Node/weight generation is delegated to `gauss-quad`;
//! this module caches the rules and adds composite, tensor and adaptive drivers
//! for complex-valued integrands.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use gauss_quad::hermite::GaussHermite;
use gauss_quad::legendre::GaussLegendre;
use num_complex::Complex64;

type Rule = &'static [(f64, f64)];

fn cached(kind: u8, n: usize, build: impl FnOnce() -> Vec<(f64, f64)>) -> Rule {
    static CACHE: OnceLock<Mutex<HashMap<(u8, usize), Rule>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("quadrature cache poisoned");
    *guard
        .entry((kind, n))
        .or_insert_with(|| Box::leak(build().into_boxed_slice()))
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn legendre(n: usize) -> Rule {
    cached(0, n, || {
        GaussLegendre::new(n.max(2))
            .expect("degree >= 2")
            .as_node_weight_pairs()
            .to_vec()
    })
}

/// Gauss-Hermite nodes and weights for the weight `exp(-x^2)`.
pub fn hermite(n: usize) -> Rule {
    cached(1, n, || {
        GaussHermite::new(n.max(2))
            .expect("degree >= 2")
            .as_node_weight_pairs()
            .to_vec()
    })
}

/// Composite Gauss-Legendre over `[a, b]` split into `panels` equal pieces.
pub fn composite<F>(a: f64, b: f64, panels: usize, order: usize, mut f: F) -> Complex64
where
    F: FnMut(f64) -> Complex64,
{
    let rule = legendre(order);
    let h = (b - a) / panels as f64;
    let mut total = Complex64::default();
    for p in 0..panels {
        let lo = a + h * p as f64;
        let mid = lo + 0.5 * h;
        let mut panel = Complex64::default();
        for &(x, w) in rule {
            panel += f(mid + 0.5 * h * x) * w;
        }
        total += panel * (0.5 * h);
    }
    total
}

/// Tensor-product composite Gauss-Legendre over the box `[lo, hi]` (d <= 3 in practice).
pub fn tensor_box<F>(lo: &[f64], hi: &[f64], panels: usize, order: usize, f: F) -> Complex64
where
    F: Fn(&[f64]) -> Complex64,
{
    let d = lo.len();
    let rule = legendre(order);
    // 1-d node list per axis
    let axes: Vec<Vec<(f64, f64)>> = (0..d)
        .map(|i| {
            let h = (hi[i] - lo[i]) / panels as f64;
            let mut nodes = Vec::with_capacity(panels * rule.len());
            for p in 0..panels {
                let mid = lo[i] + h * (p as f64 + 0.5);
                for &(x, w) in rule {
                    nodes.push((mid + 0.5 * h * x, 0.5 * h * w));
                }
            }
            nodes
        })
        .collect();
    let mut idx = vec![0usize; d];
    let mut point = vec![0.0; d];
    let mut total = Complex64::default();
    loop {
        let mut w = 1.0;
        for i in 0..d {
            point[i] = axes[i][idx[i]].0;
            w *= axes[i][idx[i]].1;
        }
        total += f(&point) * w;
        let mut axis = d;
        loop {
            if axis == 0 {
                return total;
            }
            axis -= 1;
            idx[axis] += 1;
            if idx[axis] < axes[axis].len() {
                break;
            }
            idx[axis] = 0;
        }
    }
}

/// Adaptive Simpson quadrature with local tolerance `tol` (absolute).
pub fn adaptive_simpson<F>(a: f64, b: f64, tol: f64, f: F) -> Complex64
where
    F: Fn(f64) -> Complex64,
{
    fn recurse<F: Fn(f64) -> Complex64>(
        f: &F,
        a: f64,
        b: f64,
        fa: Complex64,
        fm: Complex64,
        fb: Complex64,
        whole: Complex64,
        tol: f64,
        depth: u32,
    ) -> Complex64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = (fa + flm * 4.0 + fm) * ((m - a) / 6.0);
        let right = (fm + frm * 4.0 + fb) * ((b - m) / 6.0);
        let delta = left + right - whole;
        if depth == 0 || delta.norm() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    // seed on a few panels so symmetric integrands cannot fool the first estimate
    let panels = 8;
    let h = (b - a) / panels as f64;
    let mut total = Complex64::default();
    for p in 0..panels {
        let lo = a + h * p as f64;
        let hi = lo + h;
        let (fa, fm, fb) = (f(lo), f(0.5 * (lo + hi)), f(hi));
        let whole = (fa + fm * 4.0 + fb) * (h / 6.0);
        total += recurse(&f, lo, hi, fa, fm, fb, whole, tol / panels as f64, 40);
    }
    total
}
