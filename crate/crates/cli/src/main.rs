mod builtins;
mod output;
mod scenario;

use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use distcomb::autocorr::{autocorr_converge, RadiusSchedule};
use distcomb::pairing::{apply, sup_norm, tb_norm_table};
use distcomb::schwartz::{CutoffProfile, SmoothCutoff, TestFunction};
use distcomb::spectrum::{
    candidates, diffraction_pp, eberlein_decompose, fb_coeff, fourier_exact, is_null_wap, mean_dist,
    DEFAULT_MEAN_TOL, DEFAULT_WINDOWS,
};
use distcomb::stochastic::{ensemble, power_law_residual};
use distcomb::DistExpr;
use rayon::prelude::*;
use serde_json::json;

use scenario::{BatteryChoice, Scenario};

#[derive(Parser)]
#[command(name = "distcomb", version, about = "Dirac-comb algebra and diffraction of tempered distributions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// A distribution: a JSON file, `-` for stdin, or inline JSON.
#[derive(Args)]
struct InputArg {
    input: String,
}

#[derive(Args)]
struct AveragingArgs {
    /// Comma-separated increasing window half-widths.
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_WINDOWS)]
    windows: Vec<u32>,
    #[arg(long, default_value_t = DEFAULT_MEAN_TOL)]
    tol: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Profile {
    Bump,
    Logistic,
}

impl From<Profile> for CutoffProfile {
    fn from(p: Profile) -> Self {
        match p {
            Profile::Bump => CutoffProfile::BumpIntegral,
            Profile::Logistic => CutoffProfile::Logistic,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Battery {
    Default,
    Gaussian,
}

impl From<Battery> for BatteryChoice {
    fn from(b: Battery) -> Self {
        match b {
            Battery::Default => BatteryChoice::Default,
            Battery::Gaussian => BatteryChoice::Gaussian,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Route {
    /// Closed-form autocorrelation of the lattice terms, then its transform.
    Exact,
    /// Squared Fourier-Bohr coefficients at candidate frequencies.
    FourierBohr,
}

#[derive(Subcommand)]
enum Command {
    /// Pair a distribution with a test function.
    Pair {
        #[command(flatten)]
        input: InputArg,
        /// Test function JSON (file, `-` or inline); the unit Gaussian by default.
        #[arg(long)]
        function: Option<String>,
    },
    /// Sup norm of `psi * f` over a window.
    Supnorm {
        #[command(flatten)]
        input: InputArg,
        #[arg(long)]
        function: Option<String>,
        #[arg(long, default_value_t = 8.0)]
        window: f64,
    },
    /// Lower bounds for the translation-bounded norms up to order (M, N).
    Tbnorm {
        #[command(flatten)]
        input: InputArg,
        #[arg(long, default_value_t = 1)]
        m: u32,
        #[arg(long, default_value_t = 1)]
        n: u32,
        #[arg(long, value_enum, default_value = "default")]
        battery: Battery,
        #[arg(long, default_value_t = 8.0)]
        window: f64,
    },
    /// Smooth van Hove autocorrelation approximants along a radius schedule.
    Autocorr {
        #[command(flatten)]
        input: InputArg,
        /// Comma-separated radii; 8,16,...,256 by default.
        #[arg(long)]
        schedule: Option<RadiusSchedule>,
        #[arg(long, default_value_t = 1e-3)]
        tol: f64,
        #[arg(long, value_enum, default_value = "bump")]
        profile: Profile,
        #[arg(long, value_enum, default_value = "default")]
        battery: Battery,
        /// Print the residual CSV instead of the trace JSON.
        #[arg(long)]
        csv: bool,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Mean of a distribution over growing cubes.
    Mean {
        #[command(flatten)]
        input: InputArg,
        #[command(flatten)]
        averaging: AveragingArgs,
    },
    /// Fourier-Bohr coefficient at a frequency.
    Fb {
        #[command(flatten)]
        input: InputArg,
        /// Comma-separated frequency coordinates.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        x: Vec<f64>,
        #[command(flatten)]
        averaging: AveragingArgs,
    },
    /// Diffraction spectrum as CSV.
    Diffract {
        #[command(flatten)]
        input: InputArg,
        #[arg(long, value_enum, default_value = "exact")]
        route: Route,
        #[arg(long, default_value_t = 4.0)]
        radius: f64,
        /// Sampling step for densities in the CSV.
        #[arg(long, default_value_t = 0.125)]
        step: f64,
        /// Peak threshold of the candidate scan.
        #[arg(long, default_value_t = 0.05)]
        threshold: f64,
        #[command(flatten)]
        averaging: AveragingArgs,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Split into strongly almost periodic and null weakly almost periodic parts.
    Decompose {
        #[command(flatten)]
        input: InputArg,
        /// Also check the Fourier-Bohr coefficients of the null part up to this radius.
        #[arg(long)]
        check_radius: Option<f64>,
        #[command(flatten)]
        averaging: AveragingArgs,
    },
    /// Correlation coefficients of the random delta/delta' comb against their limits.
    RandomModel {
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 4096)]
        m: u32,
        /// A count (seeds 0..count) or a comma-separated list.
        #[arg(long, default_value = "64")]
        seeds: String,
        #[arg(long, default_value_t = 8)]
        nmax: u32,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Distance of the power-law comb autocorrelation from delta_Z.
    PowerLaw {
        #[arg(long, value_delimiter = ',', default_values_t = [64u32, 256, 1024, 4096])]
        m: Vec<u32>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Run a scenario file or a built-in scenario by name.
    Run {
        scenario: String,
        /// Scale every tolerance by this factor (0.1 tightens tenfold).
        #[arg(long, default_value_t = 1.0)]
        tol: f64,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Run every built-in scenario.
    Verify {
        /// Print the scenario names and exit.
        #[arg(long)]
        list: bool,
        /// Write the built-in scenarios as JSON files into this directory and exit.
        #[arg(long)]
        export: Option<PathBuf>,
        #[arg(long, default_value_t = 1.0)]
        tol: f64,
        /// Run scenarios one at a time.
        #[arg(long)]
        serial: bool,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

enum Failure {
    /// Bad arguments or unreadable input: exit 2.
    Usage(anyhow::Error),
    /// Computation finished but expectations were not met: exit 1.
    Expectation(String),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Usage(e)
    }
}

impl From<distcomb::Error> for Failure {
    fn from(e: distcomb::Error) -> Self {
        Failure::Usage(e.into())
    }
}

fn read_source(arg: &str) -> anyhow::Result<String> {
    if arg == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).context("reading stdin")?;
        Ok(s)
    } else if arg.trim_start().starts_with('{') {
        Ok(arg.to_string())
    } else {
        std::fs::read_to_string(arg).with_context(|| format!("reading {arg}"))
    }
}

fn load_dist(arg: &str) -> anyhow::Result<DistExpr> {
    DistExpr::from_json(&read_source(arg)?).map_err(|e| anyhow!("{arg}: {e}"))
}

fn load_function(arg: Option<&str>, dim: usize) -> anyhow::Result<TestFunction> {
    match arg {
        None => Ok(TestFunction::unit_gaussian(dim)),
        Some(s) => {
            let f: TestFunction = serde_json::from_str(&read_source(s)?).with_context(|| format!("parsing {s}"))?;
            if f.dim() != dim {
                bail!("test function has dimension {}, distribution has {dim}", f.dim());
            }
            Ok(f)
        }
    }
}

fn parse_seeds(s: &str) -> anyhow::Result<Vec<u64>> {
    if s.contains(',') {
        s.split(',')
            .map(|t| t.trim().parse().with_context(|| format!("bad seed '{t}'")))
            .collect()
    } else {
        let count: u64 = s.trim().parse().with_context(|| format!("bad seed count '{s}'"))?;
        Ok((0..count).collect())
    }
}

fn print_json<T: serde::Serialize>(v: &T) {
    print!("{}", output::pretty_json(v));
}

fn write_file(dir: &Path, name: &str, contents: &str) -> anyhow::Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    std::fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))
}

fn load_scenario(arg: &str) -> anyhow::Result<Scenario> {
    if let Some(s) = builtins::find(arg) {
        return Ok(s);
    }
    if !Path::new(arg).exists() && arg != "-" && !arg.trim_start().starts_with('{') {
        bail!("'{arg}' is neither a scenario file nor a built-in scenario (see `verify --list`)");
    }
    Scenario::parse(&read_source(arg)?).map_err(|e| anyhow!("{arg}: {e}"))
}

struct Outcome {
    name: String,
    passed: Result<(bool, usize, usize), String>,
}

fn run_one(s: &Scenario, tol: f64, dir: &Path) -> Outcome {
    let passed = scenario::execute(s, tol).map_err(|e| e.to_string()).and_then(|exec| {
        scenario::write_outputs(dir, &exec).map_err(|e| format!("writing outputs: {e}"))?;
        let total = exec.report.expectations.len();
        let ok = exec.report.expectations.iter().filter(|c| c.passed).count();
        Ok((exec.report.passed, ok, total))
    });
    Outcome {
        name: s.name.clone(),
        passed,
    }
}

fn outcome_line(o: &Outcome) -> String {
    match &o.passed {
        Ok((true, ok, total)) => format!("PASS {} ({ok}/{total} expectations)", o.name),
        Ok((false, ok, total)) => format!("FAIL {} ({ok}/{total} expectations)", o.name),
        Err(e) => format!("ERROR {}: {e}", o.name),
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Pair { input, function } => {
            let psi = load_dist(&input.input)?;
            let f = load_function(function.as_deref(), psi.dim())?;
            let v = apply(&psi, &f)?;
            print_json(&json!({ "value": [v.re, v.im] }));
        }
        Command::Supnorm { input, function, window } => {
            let psi = load_dist(&input.input)?;
            let f = load_function(function.as_deref(), psi.dim())?;
            print_json(&json!({ "sup": sup_norm(&psi, &f, window)?, "window": window }));
        }
        Command::Tbnorm {
            input,
            m,
            n,
            battery,
            window,
        } => {
            let psi = load_dist(&input.input)?;
            let b = BatteryChoice::from(battery).battery(psi.dim());
            print_json(&tb_norm_table(&psi, m, n, &b, window)?);
        }
        Command::Autocorr {
            input,
            schedule,
            tol,
            profile,
            battery,
            csv,
            out_dir,
        } => {
            let psi = load_dist(&input.input)?;
            let b = BatteryChoice::from(battery).battery(psi.dim());
            let trace = autocorr_converge(
                &psi,
                &SmoothCutoff::new(profile.into()),
                &schedule.unwrap_or_default(),
                &b,
                tol,
            )?;
            let residuals = trace.residuals_csv()?;
            if let Some(dir) = output::requested_out_dir(out_dir) {
                write_file(&dir, "trace.json", &output::pretty_json(&trace))?;
                write_file(&dir, "residuals.csv", &residuals)?;
            }
            if csv {
                print!("{residuals}");
            } else {
                print_json(&trace);
            }
        }
        Command::Mean { input, averaging } => {
            let psi = load_dist(&input.input)?;
            let f0 = TestFunction::unit_gaussian(psi.dim());
            print_json(&mean_dist(&psi, &f0, &averaging.windows, averaging.tol)?);
        }
        Command::Fb { input, x, averaging } => {
            let psi = load_dist(&input.input)?;
            print_json(&fb_coeff(&psi, &x, &averaging.windows, averaging.tol)?);
        }
        Command::Diffract {
            input,
            route,
            radius,
            step,
            threshold,
            averaging,
            out_dir,
        } => {
            let psi = load_dist(&input.input)?;
            let spectrum = match route {
                Route::Exact => fourier_exact(&distcomb::autocorr::exact_autocorr_lattices(&psi)?)?,
                Route::FourierBohr => {
                    let cands = candidates(&psi, radius, &averaging.windows, threshold)?;
                    diffraction_pp(&psi, &cands, &averaging.windows, averaging.tol)?
                }
            };
            let csv = spectrum.to_csv(radius, step)?;
            if let Some(dir) = output::requested_out_dir(out_dir) {
                write_file(&dir, "spectrum.csv", &csv)?;
                write_file(&dir, "spectrum.json", &output::pretty_json(&spectrum))?;
            }
            print!("{csv}");
        }
        Command::Decompose {
            input,
            check_radius,
            averaging,
        } => {
            let psi = load_dist(&input.input)?;
            let (s, o) = eberlein_decompose(&psi)?;
            let check = match check_radius {
                Some(r) => {
                    let cands = candidates(&psi, r, &averaging.windows, 0.05)?;
                    Some(is_null_wap(&o, &cands, &averaging.windows, averaging.tol)?)
                }
                None => None,
            };
            print_json(&json!({
                "strongly_almost_periodic": s,
                "null_weakly_almost_periodic": o,
                "null_check": check,
            }));
        }
        Command::RandomModel {
            p,
            m,
            seeds,
            nmax,
            out_dir,
        } => {
            let stats = ensemble(p, m, &parse_seeds(&seeds)?, nmax)?;
            let csv = output::ensemble_csv(&stats);
            if let Some(dir) = output::requested_out_dir(out_dir) {
                write_file(&dir, "random_model.csv", &csv)?;
            }
            print!("{csv}");
        }
        Command::PowerLaw { m, out_dir } => {
            let reports = m.iter().map(|&v| power_law_residual(v)).collect::<Result<Vec<_>, _>>()?;
            let csv = output::power_law_csv(&reports);
            if let Some(dir) = output::requested_out_dir(out_dir) {
                write_file(&dir, "power_law.csv", &csv)?;
            }
            print!("{csv}");
        }
        Command::Run { scenario, tol, out_dir } => {
            let s = load_scenario(&scenario)?;
            let dir = output::out_dir(out_dir);
            let exec = scenario::execute(&s, tol).map_err(|e| Failure::Usage(anyhow!("{}: {e}", s.name)))?;
            scenario::write_outputs(&dir, &exec).context("writing outputs")?;
            let ok = exec.report.expectations.iter().filter(|c| c.passed).count();
            let total = exec.report.expectations.len();
            println!(
                "{} {} ({ok}/{total} expectations) -> {}",
                if exec.report.passed { "PASS" } else { "FAIL" },
                s.name,
                dir.join(&s.name).display()
            );
            if !exec.report.passed {
                for c in exec.report.expectations.iter().filter(|c| !c.passed) {
                    println!("  failed: {}", serde_json::to_string(c).expect("serializable"));
                }
                return Err(Failure::Expectation(format!("{} failed", s.name)));
            }
        }
        Command::Verify {
            list,
            export,
            tol,
            serial,
            out_dir,
        } => {
            let all = builtins::all();
            if list {
                for s in &all {
                    println!("{}", s.name);
                }
                return Ok(());
            }
            if let Some(dir) = export {
                for s in &all {
                    write_file(&dir, &format!("{}.json", s.name), &output::pretty_json(&s.to_file()))?;
                }
                return Ok(());
            }
            let dir = output::out_dir(out_dir);
            let outcomes: Vec<Outcome> = if serial {
                all.iter().map(|s| run_one(s, tol, &dir)).collect()
            } else {
                all.par_iter().map(|s| run_one(s, tol, &dir)).collect()
            };
            let mut failed = 0;
            for o in &outcomes {
                println!("{}", outcome_line(o));
                if !matches!(o.passed, Ok((true, _, _))) {
                    failed += 1;
                }
            }
            println!("{} of {} scenarios passed", outcomes.len() - failed, outcomes.len());
            if failed > 0 {
                return Err(Failure::Expectation(format!("{failed} scenarios failed")));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Expectation(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
