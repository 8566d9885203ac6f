//! Canonical forms: sorted, merged, zero-pruned term lists.

use std::cmp::Ordering;

use num_complex::Complex64;

use super::{ContinuousTerm, DistExpr, LatticeTerm, PointAtom};
use crate::multi_index::Point;

/// Absolute location tolerance for merging, scaled by the largest coordinate magnitude.
pub fn merge_tolerance(points: impl Iterator<Item = f64>) -> f64 {
    let scale = points.fold(1.0f64, |m, v| m.max(v.abs()));
    1e-12 * scale
}

fn cmp_points(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    a.len().cmp(&b.len())
}

/// Snaps nearby coordinates to a shared representative, one axis at a time:
/// sort by the axis, chain values closer than `tol`, use the first of each chain.
fn cluster(keys: &mut [Point], idx: &mut [usize], axis: usize, tol: f64) {
    if idx.len() <= 1 || axis >= keys[idx[0]].len() {
        return;
    }
    idx.sort_by(|&i, &j| keys[i][axis].total_cmp(&keys[j][axis]));
    let mut start = 0;
    while start < idx.len() {
        let rep = keys[idx[start]][axis];
        let mut end = start + 1;
        let mut last = rep;
        while end < idx.len() && keys[idx[end]][axis] - last <= tol {
            last = keys[idx[end]][axis];
            end += 1;
        }
        for &i in &idx[start..end] {
            keys[i][axis] = rep;
        }
        cluster(keys, &mut idx[start..end], axis + 1, tol);
        start = end;
    }
}

pub(super) fn atoms(mut atoms: Vec<PointAtom>) -> Vec<PointAtom> {
    atoms.retain(|a| a.w != Complex64::default());
    if atoms.len() <= 1 {
        return atoms;
    }
    let tol = merge_tolerance(atoms.iter().flat_map(|a| a.x.iter().copied()));
    let mut keys: Vec<Point> = atoms.iter().map(|a| a.x.clone()).collect();
    let mut idx: Vec<usize> = (0..atoms.len()).collect();
    cluster(&mut keys, &mut idx, 0, tol);
    // stable sort keeps the input order among equal (location, order), so the
    // merged weight is summed in a deterministic order
    idx.sort_by(|&i, &j| {
        cmp_points(&keys[i], &keys[j]).then_with(|| atoms[i].order.cmp(&atoms[j].order))
    });
    let mut out: Vec<PointAtom> = Vec::with_capacity(atoms.len());
    for i in idx {
        let a = &atoms[i];
        if let Some(last) = out.last_mut() {
            if cmp_points(&last.x, &keys[i]) == Ordering::Equal && last.order == a.order {
                last.w += a.w;
                continue;
            }
        }
        out.push(PointAtom {
            x: keys[i].clone(),
            order: a.order.clone(),
            w: a.w,
        });
    }
    out.retain(|a| a.w != Complex64::default());
    out
}

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}

pub(super) fn lattices(terms: Vec<LatticeTerm>) -> Vec<LatticeTerm> {
    let mut out: Vec<LatticeTerm> = Vec::with_capacity(terms.len());
    for t in terms {
        if t.w == Complex64::default() {
            continue;
        }
        let t = t.reduced();
        let tol = merge_tolerance(t.offset.iter().chain(&t.modulation).copied());
        match out.iter_mut().find(|o| {
            o.order == t.order
                && o.lattice.same_as(&t.lattice)
                && close(&o.offset, &t.offset, tol)
                && close(&o.modulation, &t.modulation, tol)
        }) {
            Some(o) => o.w += t.w,
            None => out.push(t),
        }
    }
    out.retain(|t| t.w != Complex64::default());
    out.sort_by(|a, b| {
        a.order
            .cmp(&b.order)
            .then_with(|| cmp_points(&a.offset, &b.offset))
            .then_with(|| cmp_points(&a.modulation, &b.modulation))
    });
    out
}

pub(super) fn continuous(terms: Vec<ContinuousTerm>) -> Vec<ContinuousTerm> {
    let mut out: Vec<ContinuousTerm> = Vec::with_capacity(terms.len());
    for t in terms {
        if t.density.poly.is_zero() {
            continue;
        }
        match out.iter_mut().find(|o| {
            o.density.center == t.density.center
                && o.density.freq == t.density.freq
                && o.density.width == t.density.width
                && o.window == t.window
        }) {
            Some(o) => o.density.poly = o.density.poly.add(&t.density.poly),
            None => out.push(t),
        }
    }
    out.retain(|t| !t.density.poly.is_zero());
    out
}

fn weight_close(a: Complex64, b: Complex64, scale: f64, tol: f64) -> bool {
    (a - b).norm() <= tol * scale
}

pub(super) fn approx_eq(a: &DistExpr, b: &DistExpr, tol: f64) -> bool {
    if a.dim != b.dim
        || a.atoms.len() != b.atoms.len()
        || a.lattices.len() != b.lattices.len()
        || a.continuous.len() != b.continuous.len()
    {
        return false;
    }
    let loc_tol = merge_tolerance(
        a.atoms
            .iter()
            .chain(&b.atoms)
            .flat_map(|t| t.x.iter().copied()),
    )
    .max(1e-12);
    let wscale = a
        .atoms
        .iter()
        .chain(&b.atoms)
        .map(|t| t.w.norm())
        .chain(a.lattices.iter().chain(&b.lattices).map(|t| t.w.norm()))
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let atoms_ok = a.atoms.iter().zip(&b.atoms).all(|(x, y)| {
        x.order == y.order && close(&x.x, &y.x, loc_tol) && weight_close(x.w, y.w, wscale, tol)
    });
    let lat_ok = a.lattices.iter().zip(&b.lattices).all(|(x, y)| {
        x.order == y.order
            && x.lattice.same_as(&y.lattice)
            && close(&x.offset, &y.offset, loc_tol)
            && close(&x.modulation, &y.modulation, loc_tol)
            && weight_close(x.w, y.w, wscale, tol)
    });
    let cont_ok = a.continuous.iter().zip(&b.continuous).all(|(x, y)| {
        let (p, q) = (&x.density, &y.density);
        let pscale = p.poly.abs_sum().max(q.poly.abs_sum()).max(f64::MIN_POSITIVE);
        close(&p.center, &q.center, loc_tol)
            && close(&p.freq, &q.freq, loc_tol)
            && p.width == q.width
            && x.window == y.window
            && p.poly.sub_norm(&q.poly) <= tol * pscale
    });
    atoms_ok && lat_ok && cont_ok
}
