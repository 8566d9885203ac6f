use super::*;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn d1(k: u32) -> MultiIndex {
    MultiIndex::order1(k)
}

fn z() -> Lattice {
    Lattice::integer(1)
}

#[test]
fn translate_examples() {
    assert_eq!(DistExpr::delta(&[0.0]).translate(&[3.0]).unwrap(), DistExpr::delta(&[3.0]));
    let comb = DistExpr::lattice_comb(z(), d1(0), c(1.0));
    assert_eq!(comb.translate(&[1.0]).unwrap(), comb);
    let psi = DistExpr::atom(&[2.0], d1(1), c(1.0)).add(&DistExpr::delta(&[0.0])).unwrap();
    let want = DistExpr::atom(&[0.0], d1(1), c(1.0)).add(&DistExpr::delta(&[-2.0])).unwrap();
    assert_eq!(psi.translate(&[-2.0]).unwrap(), want);
}

#[test]
fn translate_round_trip() {
    let psi = DistExpr::atom(&[0.1, -0.3], MultiIndex::from_slice(&[1, 0]), Complex64::new(1.0, 2.0))
        .add(&DistExpr::lattice_comb(Lattice::integer(2), MultiIndex::zeros(2), c(0.5)))
        .unwrap();
    let back = psi.translate(&[0.7, 1.9]).unwrap().translate(&[-0.7, -1.9]).unwrap();
    assert!(back.approx_eq(&psi, 1e-15));
}

#[test]
fn reflect_and_tilde_examples() {
    assert_eq!(DistExpr::delta(&[3.0]).reflect(), DistExpr::delta(&[-3.0]));
    let d = DistExpr::atom(&[0.0], d1(1), c(1.0));
    assert_eq!(d.reflect(), DistExpr::atom(&[0.0], d1(1), c(-1.0)));
    assert_eq!(d.tilde(), DistExpr::atom(&[0.0], d1(1), c(-1.0)));
    let comb = DistExpr::lattice_comb(z(), d1(0), c(1.0));
    assert_eq!(comb.reflect(), comb);
    let a = DistExpr::atom(&[3.0], d1(0), Complex64::new(0.0, 2.0));
    assert_eq!(a.tilde(), DistExpr::atom(&[-3.0], d1(0), Complex64::new(0.0, -2.0)));
    assert_eq!(DistExpr::delta(&[0.0]).tilde(), DistExpr::delta(&[0.0]));
}

#[test]
fn involutions() {
    let lat = LatticeTerm::new(Lattice::scaled_integer(1, 2.0).unwrap(), d1(1), Complex64::new(0.3, -1.0))
        .with_offset(&[0.25]);
    let psi = DistExpr::new(
        1,
        vec![PointAtom::new(&[1.5], d1(2), Complex64::new(0.0, 1.0))],
        vec![lat],
        vec![],
    )
    .unwrap()
    .char_multiply(&[0.3])
    .unwrap();
    assert!(psi.reflect().reflect().approx_eq(&psi, 1e-15));
    assert!(psi.tilde().tilde().approx_eq(&psi, 1e-15));
}

#[test]
fn derivative_examples() {
    let comb = DistExpr::lattice_comb(z(), d1(0), c(1.0));
    assert_eq!(comb.derivative(&d1(1)).unwrap(), DistExpr::lattice_comb(z(), d1(1), c(1.0)));
    let d = DistExpr::atom(&[0.0], d1(1), c(1.0));
    assert_eq!(d.derivative(&d1(1)).unwrap(), DistExpr::atom(&[0.0], d1(2), c(1.0)));
}

#[test]
fn char_multiply_examples() {
    let y = 0.4;
    let x = 1.3;
    let got = DistExpr::delta(&[y]).char_multiply(&[x]).unwrap();
    assert!(got.approx_eq(&DistExpr::atom(&[y], d1(0), cis(2.0 * PI * x * y)), 1e-15));
    let d = DistExpr::atom(&[0.0], d1(1), c(1.0));
    assert_eq!(d.char_multiply(&[0.0]).unwrap(), d);
    let want = d
        .add(&DistExpr::atom(&[0.0], d1(0), Complex64::new(0.0, -2.0 * PI * x)))
        .unwrap();
    assert!(d.char_multiply(&[x]).unwrap().approx_eq(&want, 1e-15));
}

#[test]
fn char_multiply_by_dual_vector_is_trivial_on_the_lattice() {
    let comb = DistExpr::lattice_comb(z(), d1(0), c(1.0));
    assert_eq!(comb.char_multiply(&[3.0]).unwrap(), comb);
    let shifted = comb.translate(&[0.5]).unwrap().char_multiply(&[1.0]).unwrap();
    // chi_1 = -1 on Z + 1/2
    assert!(shifted.approx_eq(&comb.translate(&[0.5]).unwrap().scale(c(-1.0)), 1e-15));
}

#[test]
fn convolution_examples() {
    let a = DistExpr::delta(&[0.5]);
    let b = DistExpr::delta(&[1.25]);
    assert_eq!(a.convolve_finite(&b).unwrap(), DistExpr::delta(&[1.75]));
    let d = DistExpr::atom(&[0.0], d1(1), c(1.0));
    assert_eq!(d.convolve_finite(&d).unwrap(), DistExpr::atom(&[0.0], d1(2), c(1.0)));
    assert_eq!(d.convolve_finite(&d.tilde()).unwrap(), DistExpr::atom(&[0.0], d1(2), c(-1.0)));
    let comb = DistExpr::lattice_comb(z(), d1(0), c(1.0));
    assert!(matches!(comb.convolve_finite(&comb), Err(Error::Unsupported(_))));
}

#[test]
fn lattice_convolution_distributes() {
    let comb = DistExpr::lattice_comb(z(), d1(0), c(1.0));
    let theta = DistExpr::delta(&[0.0]).add(&DistExpr::delta(&[0.5])).unwrap();
    let got = comb.convolve_finite(&theta).unwrap();
    let want = comb.add(&comb.translate(&[0.5]).unwrap()).unwrap();
    assert_eq!(got, want);
}

#[test]
fn convolution_is_associative_and_commutative() {
    let a = DistExpr::atom(&[0.5], d1(1), Complex64::new(1.0, -1.0))
        .add(&DistExpr::delta(&[-1.0]))
        .unwrap();
    let b = DistExpr::atom(&[0.25], d1(0), c(2.0))
        .add(&DistExpr::atom(&[1.0], d1(2), c(-0.5)))
        .unwrap();
    let e = DistExpr::atom(&[-0.75], d1(1), Complex64::new(0.0, 3.0));
    assert_eq!(a.convolve_finite(&b).unwrap(), b.convolve_finite(&a).unwrap());
    let left = a.convolve_finite(&b).unwrap().convolve_finite(&e).unwrap();
    let right = a.convolve_finite(&b.convolve_finite(&e).unwrap()).unwrap();
    assert!(left.approx_eq(&right, 1e-15));
}

#[test]
fn cutoff_examples() {
    let h = SmoothCutoff::default();
    let d5 = DistExpr::delta(&[5.0]);
    assert_eq!(d5.cutoff(&h, 10.0).unwrap(), d5);
    assert!(d5.cutoff(&h, 3.0).unwrap().is_zero());
    let x = 3.4;
    let r = 3.0;
    let got = DistExpr::atom(&[x], d1(1), c(1.0)).cutoff(&h, r).unwrap();
    let vh = h.make_vanhove(r).unwrap();
    let want = DistExpr::atom(&[x], d1(1), c(vh.eval(&[x])))
        .add(&DistExpr::atom(&[x], d1(0), c(-vh.deriv_eval(&d1(1), &[x]).unwrap())))
        .unwrap();
    assert!(got.approx_eq(&want, 1e-15));
}

#[test]
fn cutoff_of_lattice_expands_ball() {
    let comb = DistExpr::lattice_comb(z(), d1(0), c(1.0));
    let cut = comb.cutoff(&SmoothCutoff::default(), 4.0).unwrap();
    assert!(cut.is_finite());
    // -4..=4 on the plateau; +-5 has h = 0 and is dropped
    assert_eq!(cut.atoms().len(), 9);
    assert!(cut.atoms().iter().all(|a| a.w == c(1.0)));
}

#[test]
fn canonical_merge_and_prune() {
    let e = DistExpr::from_atoms(
        1,
        vec![
            PointAtom::new(&[1.0], d1(0), c(1.0)),
            PointAtom::new(&[1.0 + 1e-14], d1(0), c(2.0)),
            PointAtom::new(&[-1.0], d1(1), c(1.0)),
            PointAtom::new(&[-1.0], d1(1), c(-1.0)),
        ],
    )
    .unwrap();
    assert_eq!(e, DistExpr::atom(&[1.0], d1(0), c(3.0)));
}

#[test]
fn json_round_trip() {
    let lat = LatticeTerm::new(Lattice::new(&[vec![1.0, 0.0], vec![0.5, 1.0]]).unwrap(), MultiIndex::from_slice(&[0, 1]), c(2.0));
    let g = GaussTerm::gaussian(&[0.0, 0.0], 1.5);
    let e = DistExpr::new(
        2,
        vec![PointAtom::new(&[0.5, 1.0], MultiIndex::from_slice(&[1, 0]), Complex64::new(0.0, 1.0))],
        vec![lat],
        vec![ContinuousTerm::new(g)],
    )
    .unwrap();
    let s = e.to_json();
    assert!(s.contains("\"atoms\"") && s.contains("\"lattices\"") && s.contains("\"continuous\""));
    assert_eq!(DistExpr::from_json(&s).unwrap(), e);
    assert!(DistExpr::from_json("{\"dim\": 1, \"atoms\": [{\"x\": [0, 1], \"order\": [0], \"w\": [1, 0]}]}").is_err());
}
