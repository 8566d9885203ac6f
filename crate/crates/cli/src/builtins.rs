//! Built-in scenarios reproducing the worked examples.

use std::f64::consts::PI;

use distcomb::schwartz::GaussTerm;
use distcomb::{DistExpr, Lattice, MultiIndex, Point};
use num_complex::Complex64;

use crate::scenario::{
    CoeffFamily, Expectation, Expected, Op, Part, Provenance, Quantity, Scenario, Step, Tolerance,
};

fn comb(lattice: Lattice, order: u32, w: f64) -> DistExpr {
    DistExpr::lattice_comb(lattice, MultiIndex::order1(order), Complex64::new(w, 0.0))
}

fn z() -> Lattice {
    Lattice::integer(1)
}

fn two_z() -> Lattice {
    Lattice::scaled_integer(1, 2.0).expect("valid lattice")
}

fn pt(x: f64) -> Point {
    Point::from_slice(&[x])
}

fn expect(step: Option<usize>, quantity: Quantity, value: f64, tolerance: Tolerance, provenance: Provenance, source: &str) -> Expectation {
    Expectation {
        step,
        quantity,
        value: Expected::Real(value),
        tolerance,
        provenance,
        source: source.into(),
    }
}

fn atoms(ks: impl Iterator<Item = f64>, f: impl Fn(f64) -> f64, tol: Tolerance, provenance: Provenance, source: &str) -> Vec<Expectation> {
    ks.map(|k| expect(None, Quantity::Atom { at: pt(k) }, f(k), tol, provenance, source))
        .collect()
}

fn scenario(name: &str, description: &str, input: Option<DistExpr>, pipeline: Vec<Step>, expected: Vec<Expectation>) -> Scenario {
    Scenario {
        name: name.into(),
        description: description.into(),
        input,
        pipeline,
        expected,
    }
}

const DERIVATIVE_COMB_SOURCE: &str = "diffraction of the derivative comb on Z: 4 pi^2 sum n^2 delta_n";
const SCALED_SOURCE: &str = "derivative comb on a lattice: (4 pi^2)^|alpha| dens(Lambda)^2 x^(2 alpha) at dual points";

fn derivative_comb_exact() -> Scenario {
    scenario(
        "derivative-comb-z-exact",
        "Closed-form autocorrelation and transform of -D delta_Z.",
        Some(comb(z(), 1, -1.0)),
        vec![Step::new(Op::ExactAutocorr), Step::new(Op::FourierExact)],
        atoms(
            (-4..=4).map(f64::from),
            |k| 4.0 * PI * PI * k * k,
            Tolerance::Rel(1e-12),
            Provenance::Reference,
            DERIVATIVE_COMB_SOURCE,
        ),
    )
}

fn derivative_comb_averaged() -> Scenario {
    let cands: Vec<Point> = (-4..=4).map(|n| pt(f64::from(n))).collect();
    scenario(
        "derivative-comb-z-fourier-bohr",
        "Pure-point diffraction of -D delta_Z from window-averaged Fourier-Bohr coefficients.",
        Some(comb(z(), 1, -1.0)),
        vec![Step::new(Op::DiffractionPp {
            candidates: Some(cands),
            radius: None,
            windows: distcomb::spectrum::DEFAULT_WINDOWS.to_vec(),
            tol: 1e-3,
            threshold: 0.05,
        })],
        atoms(
            (-4..=4).map(f64::from),
            |k| 4.0 * PI * PI * k * k,
            Tolerance::Rel(1e-2),
            Provenance::Reference,
            DERIVATIVE_COMB_SOURCE,
        ),
    )
}

fn derivative_comb_2z() -> Scenario {
    scenario(
        "derivative-comb-2z-exact",
        "Derivative comb on 2Z: intensities pi^2 k^2 on the dual lattice Z/2.",
        Some(comb(two_z(), 1, 1.0)),
        vec![Step::new(Op::ExactAutocorr), Step::new(Op::FourierExact)],
        atoms(
            (-8..=8).map(|j| 0.5 * f64::from(j)),
            |k| PI * PI * k * k,
            Tolerance::Rel(1e-10),
            Provenance::Reference,
            SCALED_SOURCE,
        ),
    )
}

fn derivative_transfer_2z() -> Scenario {
    scenario(
        "derivative-transfer-2z",
        "The same spectrum obtained by multiplying the diffraction of delta_2Z by (2 pi k)^2.",
        Some(comb(two_z(), 0, 1.0)),
        vec![
            Step::new(Op::ExactAutocorr),
            Step::new(Op::DiffractDerivative {
                alpha: MultiIndex::order1(1),
            }),
        ],
        atoms(
            (-8..=8).map(|j| 0.5 * f64::from(j)),
            |k| PI * PI * k * k,
            Tolerance::Rel(1e-10),
            Provenance::Derived,
            "(2 pi k)^2 times the transform dens^2 delta_(Z/2) of the comb autocorrelation",
        ),
    )
}

const RANDOM_SOURCE: &str = "random delta/delta' comb: c_n -> p^2, d_n -> 2p(1-p), e_n -> (1-p)^2 off zero; c_0 -> p, e_0 -> 1-p";

fn random_half() -> Scenario {
    let p = 0.5;
    let mut expected = Vec::new();
    for n in 0..=8i64 {
        let (c, d, e) = distcomb::stochastic::analytic_coeffs(p, n);
        for (family, v) in [(CoeffFamily::C, c), (CoeffFamily::D, d), (CoeffFamily::E, e)] {
            expected.push(expect(
                None,
                Quantity::Coefficient { family, n },
                v,
                Tolerance::StdErr(3.0),
                Provenance::Reference,
                RANDOM_SOURCE,
            ));
        }
    }
    scenario(
        "random-comb-half",
        "64 samples of the random delta/delta' comb with p = 1/2 on [-4096, 4096].",
        None,
        vec![Step::new(Op::RandomEnsemble {
            p,
            m: 4096,
            seeds: (0..64).collect(),
            n_max: 8,
        })],
        expected,
    )
}

/// All sites equal: every seed gives the same sample, with the sharp edge factor.
/// Two seeds keep the ensemble mean an exact average.
fn random_degenerate(name: &str, p: f64) -> Scenario {
    let m = 512u32;
    let mut expected = Vec::new();
    for n in 0..=8i64 {
        let edge = (2 * i64::from(m) + 1 - n) as f64 * (1.0 / (2.0 * f64::from(m)));
        let (c, e) = if p == 1.0 { (edge, 0.0) } else { (0.0, edge) };
        for (family, v) in [(CoeffFamily::C, c), (CoeffFamily::D, 0.0), (CoeffFamily::E, e)] {
            expected.push(expect(
                None,
                Quantity::Coefficient { family, n },
                v,
                Tolerance::Exact,
                Provenance::Derived,
                "deterministic comb: (2m + 1 - |n|) / 2m pairs at lag n",
            ));
        }
    }
    scenario(
        name,
        "Degenerate random comb: the sample is a truncated lattice comb for every seed.",
        None,
        vec![Step::new(Op::RandomEnsemble {
            p,
            m,
            seeds: vec![0, 1],
            n_max: 8,
        })],
        expected,
    )
}

fn power_law() -> Scenario {
    let sizes = vec![1 << 6, 1 << 8, 1 << 10, 1 << 12];
    let mut expected = vec![expect(
        None,
        Quantity::Decreasing,
        1.0,
        Tolerance::Exact,
        Provenance::Reference,
        "power-law weighted comb: autocorrelation approaches delta_Z as m grows",
    )];
    for &m in &sizes {
        expected.push(expect(
            None,
            Quantity::EnvelopeRatio { m },
            1.0,
            Tolerance::AtMost(1.0),
            Provenance::Reference,
            "off-zero lags: |phi_mu(l) - phi_Z(l)| <= 3 (log2 m)^2 / 2m",
        ));
    }
    scenario(
        "power-law-weights",
        "Comb on Z with weight n added at each power 2^n; distance of the autocorrelation from delta_Z.",
        None,
        vec![Step::new(Op::PowerLaw { sizes })],
        expected,
    )
}

fn decomposition() -> Scenario {
    let lattice = comb(z(), 0, 1.0);
    let density = DistExpr::density(GaussTerm::gaussian(&[0.0], 1.0)).expect("valid density");
    let psi = lattice.add(&density).expect("same dimension");
    let windows = vec![400, 800, 1600, 3200];
    let mut pipeline = vec![
        Step::new(Op::Decompose),
        Step::new(Op::SelectPart {
            part: Part::StronglyAlmostPeriodic,
        }),
        Step::from(
            Op::SelectPart {
                part: Part::NullWeaklyAlmostPeriodic,
            },
            0,
        ),
    ];
    let mut expected = vec![
        Expectation {
            step: Some(1),
            quantity: Quantity::Distribution,
            value: Expected::Dist(Box::new(lattice)),
            tolerance: Tolerance::Exact,
            provenance: Provenance::Trivial,
            source: "the lattice term has a pure-point transform".into(),
        },
        Expectation {
            step: Some(2),
            quantity: Quantity::Distribution,
            value: Expected::Dist(Box::new(density)),
            tolerance: Tolerance::Exact,
            provenance: Provenance::Trivial,
            source: "the Gaussian density has an absolutely continuous transform".into(),
        },
    ];
    for (i, k) in [0.0, 0.5, 1.0].into_iter().enumerate() {
        pipeline.push(Step::from(
            Op::FbCoeff {
                x: pt(k),
                windows: windows.clone(),
                tol: 1e-3,
            },
            2,
        ));
        expected.push(expect(
            Some(3 + i),
            Quantity::Value,
            0.0,
            Tolerance::Abs(1e-3),
            Provenance::Reference,
            "the null weakly almost periodic part has vanishing Fourier-Bohr coefficients",
        ));
    }
    scenario(
        "comb-plus-gaussian-decomposition",
        "delta_Z plus a Gaussian density split into its strongly almost periodic and null parts.",
        Some(psi),
        pipeline,
        expected,
    )
}

fn fourier_bohr_z() -> Scenario {
    let ks = [0.0, 1.0, -1.0, 2.0, -2.0, 0.5];
    let pipeline = ks
        .iter()
        .enumerate()
        .map(|(i, &k)| {
            let op = Op::FbCoeff {
                x: pt(k),
                windows: distcomb::spectrum::DEFAULT_WINDOWS.to_vec(),
                tol: 1e-3,
            };
            if i == 0 {
                Step::new(op)
            } else {
                Step::from_input(op)
            }
        })
        .collect();
    let expected = ks
        .iter()
        .enumerate()
        .map(|(i, &k)| {
            expect(
                Some(i),
                Quantity::Value,
                if k.fract() == 0.0 { 1.0 } else { 0.0 },
                Tolerance::Abs(1e-3),
                Provenance::Reference,
                "Fourier-Bohr coefficients of delta_Z: 1 on the dual lattice, 0 elsewhere",
            )
        })
        .collect();
    scenario(
        "delta-z-fourier-bohr",
        "Window averages of chi_(-k) delta_Z.",
        Some(comb(z(), 0, 1.0)),
        pipeline,
        expected,
    )
}

fn fourier_pairing(name: &str, description: &str, psi: DistExpr) -> Scenario {
    scenario(
        name,
        description,
        Some(psi),
        vec![Step::new(Op::FourierPairing {
            battery: crate::scenario::BatteryChoice::Gaussian,
        })],
        vec![expect(
            None,
            Quantity::Value,
            0.0,
            Tolerance::Abs(1e-8),
            Provenance::Reference,
            "Poisson summation: the transform of a lattice comb is dens times the dual comb",
        )],
    )
}

pub fn all() -> Vec<Scenario> {
    let density = DistExpr::density(GaussTerm::gaussian(&[0.2], 1.3)).expect("valid density");
    vec![
        derivative_comb_exact(),
        derivative_comb_averaged(),
        derivative_comb_2z(),
        derivative_transfer_2z(),
        random_half(),
        random_degenerate("random-comb-all-delta", 1.0),
        random_degenerate("random-comb-all-derivative", 0.0),
        power_law(),
        decomposition(),
        fourier_bohr_z(),
        fourier_pairing("fourier-pairing-delta-z", "psi(F f) against F psi (f) for delta_Z.", comb(z(), 0, 1.0)),
        fourier_pairing("fourier-pairing-delta-2z", "psi(F f) against F psi (f) for delta_2Z.", comb(two_z(), 0, 1.0)),
        fourier_pairing(
            "fourier-pairing-derivative-z",
            "psi(F f) against F psi (f) for D delta_Z.",
            comb(z(), 1, 1.0),
        ),
        fourier_pairing("fourier-pairing-gaussian-density", "psi(F f) against F psi (f) for a Gaussian density.", density),
    ]
}

pub fn find(name: &str) -> Option<Scenario> {
    all().into_iter().find(|s| s.name == name)
}
