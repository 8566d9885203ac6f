//! Output directory, JSON and CSV formatting.

use std::path::PathBuf;

use distcomb::stochastic::{analytic_coeffs, EnsembleStats, PowerLawReport};
use serde::Serialize;

pub const OUT_DIR_ENV: &str = "DISTCOMB_OUT_DIR";
pub const SPECTRUM_CSV_RADIUS: f64 = 8.0;
pub const SPECTRUM_CSV_STEP: f64 = 0.125;

/// `--out-dir`, then the environment, then `distcomb-out`.
pub fn out_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("distcomb-out"))
}

/// Only an explicit flag or the environment variable turns on file output for
/// the single-shot commands.
pub fn requested_out_dir(flag: Option<PathBuf>) -> Option<PathBuf> {
    flag.or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
}

pub fn pretty_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

/// 17 significant digits, enough to round-trip a double.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn csv_string(rows: Vec<Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

/// Per-seed rows followed by `mean` rows.
pub fn ensemble_csv(e: &EnsembleStats) -> String {
    let header = ["seed", "n", "c_emp", "c_analytic", "d_emp", "d_analytic", "e_emp", "e_analytic"];
    let mut rows = vec![header.iter().map(|s| s.to_string()).collect::<Vec<_>>()];
    let row = |seed: String, n: i64, c: f64, d: f64, ee: f64| {
        let (ca, da, ea) = analytic_coeffs(e.p, n);
        vec![seed, n.to_string(), num(c), num(ca), num(d), num(da), num(ee), num(ea)]
    };
    for (seed, coeffs) in e.seeds.iter().zip(&e.per_seed) {
        for (n, c) in &coeffs.c {
            rows.push(row(seed.to_string(), *n, *c, coeffs.d[n], coeffs.e[n]));
        }
    }
    for ((c, d), ee) in e.c.iter().zip(&e.d).zip(&e.e) {
        rows.push(row("mean".into(), c.n, c.mean, d.mean, ee.mean));
    }
    csv_string(rows)
}

pub fn power_law_csv(reports: &[PowerLawReport]) -> String {
    let mut rows = vec![vec!["m".to_string(), "residual".to_string()]];
    for r in reports {
        rows.push(vec![r.m.to_string(), num(r.residual)]);
    }
    csv_string(rows)
}
