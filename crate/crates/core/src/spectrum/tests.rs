use std::f64::consts::PI;

use num_complex::Complex64;

use super::*;
use crate::autocorr::exact_autocorr_lattice;
use crate::comb::LatticeTerm;
use crate::pairing::PairingBattery;
use crate::schwartz::GaussPolyFn;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn z() -> Lattice {
    Lattice::integer(1)
}

fn comb(l: Lattice, order: u32, w: f64) -> DistExpr {
    DistExpr::lattice_comb(l, MultiIndex::order1(order), c(w))
}

#[test]
fn poisson_on_z_against_theta_sum() {
    let hat = fourier_exact(&comb(z(), 0, 1.0)).unwrap();
    assert_eq!(hat.lattice_atoms.len(), 1);
    assert!(hat.lattice_atoms[0].lattice.same_as(&z()));
    // sum_n e^{-pi (n - c)^2} = sum_k e^{-pi k^2} e^{-2 pi i k c}
    let cc = 0.3;
    let direct: f64 = (-40..=40).map(|n: i32| (-PI * (f64::from(n) - cc).powi(2)).exp()).sum();
    let f = TestFunction::Gauss(GaussPolyFn::gaussian(&[cc], 1.0));
    let via_hat = apply_spectral(&hat, &f.fourier_fn().unwrap()).unwrap();
    assert!((via_hat - direct).norm() < 1e-13);
}

#[test]
fn scaled_lattice_transform() {
    let a = 2.0;
    let hat = fourier_exact(&comb(Lattice::scaled_integer(1, a).unwrap(), 0, 1.0)).unwrap();
    let l = &hat.lattice_atoms[0];
    assert!(l.lattice.same_as(&Lattice::scaled_integer(1, 0.5).unwrap()));
    assert!((l.intensity(&[0.5]) - 0.5).norm() < 1e-15);
}

#[test]
fn derivative_comb_autocorrelation_transform() {
    let phi = exact_autocorr_lattice(&LatticeTerm::new(z(), MultiIndex::order1(1), c(-1.0)));
    let hat = fourier_exact(&phi).unwrap();
    for n in -8..=8i32 {
        let v = hat.atom_at(&[f64::from(n)]);
        let want = 4.0 * PI * PI * f64::from(n * n);
        assert!((v.re - want).abs() <= 1e-12 * want.max(1.0), "n={n}");
        assert!(v.im.abs() <= 1e-12 * want.max(1.0));
    }
}

#[test]
fn parseval_bridge_on_gaussian_battery() {
    let rho = DistExpr::density(GaussTerm::gaussian(&[0.2], 1.1)).unwrap();
    let atoms = DistExpr::atom(&[0.3], MultiIndex::order1(2), Complex64::new(0.5, 1.0));
    for psi in [comb(z(), 0, 1.0), comb(z(), 1, 1.0), rho, atoms] {
        let hat = fourier_exact(&psi).unwrap();
        for f in &PairingBattery::gaussian_battery(1).functions {
            let lhs = apply(&psi, &f.fourier_fn().unwrap()).unwrap();
            let rhs = apply_spectral(&hat, f).unwrap();
            assert!((lhs - rhs).norm() <= 1e-8 * lhs.norm().max(1.0), "{lhs} vs {rhs}");
        }
    }
}

#[test]
fn constant_density_is_a_point_mass() {
    let lebesgue = DistExpr::density(GaussTerm::undamped(Poly::one(1), &[0.0], &[0.0])).unwrap();
    let hat = fourier_exact(&lebesgue).unwrap();
    assert_eq!(hat.atoms.len(), 1);
    assert_eq!(hat.atoms[0].intensity, c(1.0));
    let poly = DistExpr::density(GaussTerm::undamped(Poly::monomial(MultiIndex::order1(1), c(1.0)), &[0.0], &[0.0])).unwrap();
    assert!(fourier_exact(&poly).is_err());
}

#[test]
fn derivative_diffraction_rules() {
    let g = comb(z(), 0, 1.0);
    let same = diffract_derivative(&g, &MultiIndex::order1(0)).unwrap();
    assert_eq!(same, fourier_exact(&g).unwrap());
    let d1 = diffract_derivative(&g, &MultiIndex::order1(1)).unwrap();
    for n in 0..5 {
        let n = f64::from(n);
        assert!((d1.atom_at(&[n]).re - 4.0 * PI * PI * n * n).abs() < 1e-10);
    }
    // autocorrelation of delta_{2Z} is delta_{2Z}/2; atoms 4 pi^2 k^2 / 4 at k in Z/2
    let half = comb(Lattice::scaled_integer(1, 2.0).unwrap(), 0, 0.5);
    let d = diffract_derivative(&half, &MultiIndex::order1(1)).unwrap();
    for k in [0.5, 1.0, 1.5, 3.0] {
        assert!((d.atom_at(&[k]).re - PI * PI * k * k).abs() < 1e-10 * k * k * 40.0);
    }
    assert!(d.atom_at(&[0.25]).norm() == 0.0);
    // a density picks up the factor pointwise
    let rho = DistExpr::density(GaussTerm::gaussian(&[0.0], 1.0)).unwrap();
    let dr = diffract_derivative(&rho, &MultiIndex::order1(1)).unwrap();
    let k = 0.7;
    let want = 4.0 * PI * PI * k * k * (-PI * k * k).exp();
    assert!((dr.density_at(&[k]).re - want).abs() < 1e-13);
}

#[test]
fn modulated_and_offset_lattices_transform() {
    let t = LatticeTerm {
        modulation: Point::from_slice(&[0.25]),
        ..LatticeTerm::new(z(), MultiIndex::order1(0), c(1.0)).with_offset(&[0.4])
    };
    let psi = DistExpr::from_lattice_term(t).unwrap();
    let hat = fourier_exact(&psi).unwrap();
    for f in &PairingBattery::gaussian_battery(1).functions {
        let lhs = apply(&psi, &f.fourier_fn().unwrap()).unwrap();
        let rhs = apply_spectral(&hat, f).unwrap();
        assert!((lhs - rhs).norm() <= 1e-10 * lhs.norm().max(1.0));
    }
}

#[test]
fn csv_layout() {
    let hat = fourier_exact(&comb(z(), 0, 1.0).add(&DistExpr::density(GaussTerm::gaussian(&[0.0], 1.0)).unwrap()).unwrap()).unwrap();
    let csv = hat.to_csv(1.0, 0.5).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "freq_0,intensity_re,intensity_im,source");
    assert_eq!(lines[1], "-1.0000000000000000e0,1.0000000000000000e0,0.0000000000000000e0,pp");
    assert_eq!(lines.iter().filter(|l| l.ends_with(",pp")).count(), 3);
    assert_eq!(lines.iter().filter(|l| l.ends_with(",cont")).count(), 5);
    let v: f64 = lines[4].split(',').nth(1).unwrap().parse().unwrap();
    assert!((v - (-PI).exp()).abs() < 1e-15);
}

#[test]
fn mean_of_functions() {
    let w = &DEFAULT_WINDOWS;
    let one = mean_fn(1, |_| c(1.0), w, 1e-3).unwrap();
    assert!((one.value - 1.0).norm() < 1e-13 && one.converged);
    let cos = mean_fn(1, |x| c((2.0 * PI * x[0]).cos()), w, 1e-3).unwrap();
    assert!(cos.value.norm() < 1e-13);
    let g = TestFunction::unit_gaussian(1);
    let dz = comb(z(), 0, 1.0);
    let m = mean_fn(1, |t| crate::pairing::conv_eval(&dz, &g, t).unwrap(), w, 1e-3).unwrap();
    assert!((m.value - 1.0).norm() < 1e-12);
}

#[test]
fn means_of_distributions() {
    let w = &DEFAULT_WINDOWS;
    let g = TestFunction::unit_gaussian(1);
    let lebesgue = DistExpr::density(GaussTerm::undamped(Poly::one(1), &[0.0], &[0.0])).unwrap();
    let m = mean_dist(&lebesgue, &g, w, 1e-3).unwrap();
    assert!((m.value - 1.0).norm() < 1e-10);
    let m = mean_dist(&comb(z(), 0, 1.0), &g, w, 1e-3).unwrap();
    assert!((m.value - 1.0).norm() < 1e-10);
    assert!(m.discrepancy.unwrap() < 1e-10);
    let m = mean_dist(&comb(z(), 1, -1.0), &g, w, 1e-3).unwrap();
    assert!(m.value.norm() < 1e-10);
    let odd = TestFunction::Gauss(GaussPolyFn::monomial_gaussian(MultiIndex::order1(1), 1.0, c(1.0)));
    assert!(mean_dist(&lebesgue, &odd, w, 1e-3).is_err());
}

#[test]
fn fourier_bohr_coefficients() {
    let w = &DEFAULT_WINDOWS;
    let dz = comb(z(), 0, 1.0);
    for k in [-2.0, -1.0, 0.0, 1.0, 2.0] {
        assert!((fb_coeff(&dz, &[k], w, 1e-3).unwrap().value - 1.0).norm() < 1e-10);
    }
    assert!(fb_coeff(&dz, &[0.5], w, 1e-3).unwrap().value.norm() < 1e-10);
    let ddz = comb(z(), 1, -1.0);
    for n in 1..=3 {
        let a = fb_coeff(&ddz, &[f64::from(n)], w, 1e-3).unwrap().value;
        // chi_{-n} (-D delta_Z) = -D delta_Z - 2 pi i n delta_Z
        assert!((a - Complex64::new(0.0, -2.0 * PI * f64::from(n))).norm() < 1e-9);
    }
}

#[test]
fn pure_point_diffraction() {
    let w = &DEFAULT_WINDOWS;
    let pts: Vec<Point> = (0..4).map(|n| Point::from_slice(&[f64::from(n)])).collect();
    let d = diffraction_pp(&comb(z(), 0, 1.0), &pts[..3], w, 1e-3).unwrap();
    assert_eq!(d.atoms.len(), 3);
    assert!(d.atoms.iter().all(|a| (a.intensity - 1.0).norm() < 1e-9));
    let d = diffraction_pp(&comb(z(), 1, -1.0), &pts, w, 1e-3).unwrap();
    assert_eq!(d.atoms.len(), 3);
    for a in &d.atoms {
        let want = 4.0 * PI * PI * a.freq[0] * a.freq[0];
        assert!((a.intensity.re - want).abs() < 1e-8 * want);
    }
    assert!(diffraction_pp(&DistExpr::zero(1), &pts, w, 1e-3).unwrap().is_zero());
}

#[test]
fn candidate_sets() {
    let c2 = candidates(&comb(Lattice::scaled_integer(1, 2.0).unwrap(), 1, 1.0), 1.0, &DEFAULT_WINDOWS, 1e-3).unwrap();
    let xs: Vec<f64> = c2.iter().map(|p| p[0]).collect();
    assert_eq!(xs, vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
    // finite atoms on Z plus a density: the scan finds the integers only when they carry mass
    let psi = DistExpr::atom(&[0.0], MultiIndex::order1(0), c(1.0))
        .add(&DistExpr::density(GaussTerm::undamped(Poly::one(1), &[0.0], &[0.75])).unwrap())
        .unwrap();
    let found = candidates(&psi, 1.2, &[25, 50], 0.1).unwrap();
    assert_eq!(found.len(), 1);
    assert!((found[0][0] - 0.75).abs() < 1e-3);
}

#[test]
fn null_wap_detection() {
    let w = &DEFAULT_WINDOWS;
    let cand: Vec<Point> = [0.0, 1.0, -1.0, 2.0, -2.0].iter().map(|&k| Point::from_slice(&[k])).collect();
    let narrow = DistExpr::density(GaussTerm::gaussian(&[0.0], 0.1)).unwrap();
    let r = is_null_wap(&narrow, &cand, w, 1e-3).unwrap();
    assert!(r.null, "{:?}", r.offending);
    let r = is_null_wap(&comb(z(), 0, 1.0), &cand[..1], w, 1e-3).unwrap();
    assert!(!r.null);
    assert!((r.offending[0].1 - 1.0).norm() < 1e-10);
    assert!(is_null_wap(&DistExpr::zero(1), &cand, w, 1e-3).unwrap().null);
}

#[test]
fn decomposition_splits_and_recomposes() {
    let dz = comb(z(), 0, 1.0);
    let (s, o) = eberlein_decompose(&dz).unwrap();
    assert_eq!((s, o.is_zero()), (dz.clone(), true));
    let rho = DistExpr::density(GaussTerm::gaussian(&[0.0], 1.0)).unwrap();
    let (s, o) = eberlein_decompose(&rho).unwrap();
    assert!(s.is_zero());
    assert_eq!(o, rho);
    let psi = dz.add(&rho).unwrap().add(&DistExpr::delta(&[0.5])).unwrap();
    let (s, o) = eberlein_decompose(&psi).unwrap();
    assert_eq!(s.add(&o).unwrap(), psi);
    let hat = fourier_exact(&psi).unwrap();
    assert_eq!(fourier_exact(&s).unwrap(), hat.pp_part());
    assert_eq!(fourier_exact(&o).unwrap(), hat.continuous_part());
    assert!(!fourier_exact(&o).unwrap().has_pp());
}

