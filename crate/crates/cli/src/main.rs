//! `hsk`: command-line front end.
//!
//! Exit codes: 0 success, 1 invariant violation or numerical failure,
//! 2 usage or configuration error.

mod config;

use std::f64::consts::PI;
use std::path::Path;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hsk_core::acceptance;
use hsk_core::cohomology::{self, Scenario};
use hsk_core::flat::{self, FlatModelOperator, PlaneField};
use hsk_core::higgs::HiggsField;
use hsk_core::hitchin;
use hsk_core::lattice::Lattice;
use hsk_core::linalg::CMat;
use hsk_core::ratmap::{self, RationalMap};
use hsk_core::spectral::SpectralCurve;
use hsk_core::{Error, C64};
use serde_json::{json, Value};

use config::RunConfig;

#[derive(Parser, Debug)]
#[command(name = "hsk", version, about = "Elliptic Higgs fields, spectral curves and flat-model checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Default)]
pub struct Common {
    /// JSON config file; flags override its entries.
    #[arg(long)]
    config: Option<String>,
    /// Rank.
    #[arg(long)]
    k: Option<i64>,
    /// Lattice modulus, e.g. `0+2i`.
    #[arg(long, allow_hyphen_values = true)]
    tau: Option<String>,
    /// Pole of the Higgs field, e.g. `0.3+0.4i`.
    #[arg(long, allow_hyphen_values = true)]
    xi0: Option<String>,
    /// Residue scale `v^T u`.
    #[arg(long, allow_hyphen_values = true)]
    epsilon: Option<String>,
    /// Seed for random fields and Lanczos starts.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for the report and CSV files.
    #[arg(long)]
    out: Option<String>,
    /// Grid points per side.
    #[arg(long)]
    grid: Option<usize>,
    /// Fourier cutoff of the flat model.
    #[arg(long)]
    cutoff: Option<i32>,
    /// Tolerance override for the command's main check.
    #[arg(long)]
    tol: Option<f64>,
    /// euclidean or poincare.
    #[arg(long)]
    metric: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Spectral curve of a seeded random field.
    ///
    /// CSV curve_samples.csv: xi_re, xi_im, w_re, w_im, sheet (points of the curve over a grid of the base).
    Curve(Common),
    /// Rational map of the spectral curve.
    ///
    /// CSV ratmap_samples.csv: w_re, w_im, r_re, r_im (map values on a circle).
    Ratmap(Common),
    /// Flat-model report for a twist.
    ///
    /// CSV flat_field.csv: x, y, amplitude of the solution to a bump source.
    Flatmodel {
        #[command(flatten)]
        common: Common,
        /// Twist as `a,b`.
        #[arg(long, allow_hyphen_values = true)]
        xi: Option<String>,
    },
    /// Characteristic-class scenarios.
    Chern(Common),
    /// Hitchin-equation residuals: k = 1 abelian solution, k = 2 Biquard model.
    ///
    /// With --out, writes configuration.json (header) and configuration.bin (f64 LE data).
    Hitchin(Common),
    /// Run the acceptance suite twice; criterion 12 compares the two reports.
    Selftest(Common),
}

/// Outcome of a command: the result body and its invariant table.
struct Outcome {
    result: Value,
    invariants: Vec<(String, bool)>,
    files: Vec<(String, String)>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, common, xi) = match &cli.command {
        Command::Curve(c) => ("curve", c, None),
        Command::Ratmap(c) => ("ratmap", c, None),
        Command::Flatmodel { common, xi } => ("flatmodel", common, xi.clone()),
        Command::Chern(c) => ("chern", c, None),
        Command::Hitchin(c) => ("hitchin", c, None),
        Command::Selftest(c) => ("selftest", c, None),
    };
    let cfg = match RunConfig::resolve(common, xi.as_deref()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("hsk {name}: {e}");
            return ExitCode::from(2);
        }
    };
    let out = match name {
        "curve" => curve(&cfg),
        "ratmap" => ratmap_cmd(&cfg),
        "flatmodel" => flatmodel(&cfg),
        "chern" => chern(&cfg),
        "hitchin" => hitchin_cmd(&cfg),
        _ => selftest(),
    };
    match out {
        Ok(o) => {
            let passed = o.invariants.iter().all(|(_, p)| *p);
            let report = json!({
                "schema": "hsk/1",
                "version": env!("CARGO_PKG_VERSION"),
                "command": name,
                "config": cfg.to_json(),
                "result": o.result,
                "invariants": o.invariants.iter().map(|(n, p)| json!({ "name": n, "passed": p })).collect::<Vec<_>>(),
                "passed": passed,
            });
            let text = serde_json::to_string_pretty(&report).expect("report serializes");
            emit(&text);
            if let Some(dir) = &cfg.out {
                if let Err(e) = write_outputs(dir, &text, &o.files) {
                    eprintln!("hsk {name}: {e}");
                    return ExitCode::from(1);
                }
            }
            if passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            let kind = format!("{e:?}").split('(').next().unwrap_or("Error").to_string();
            let diag = json!({
                "schema": "hsk/1",
                "version": env!("CARGO_PKG_VERSION"),
                "command": name,
                "config": cfg.to_json(),
                "error": { "kind": kind, "message": e.to_string() },
                "passed": false,
            });
            emit(&serde_json::to_string_pretty(&diag).expect("diagnostics serialize"));
            ExitCode::from(1)
        }
    }
}

/// Print to stdout, ignoring a closed pipe.
fn emit(text: &str) {
    use std::io::Write;
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn write_outputs(dir: &str, report: &str, files: &[(String, String)]) -> Result<(), Error> {
    let d = Path::new(dir);
    std::fs::create_dir_all(d)?;
    std::fs::write(d.join("report.json"), report)?;
    for (name, body) in files {
        std::fs::write(d.join(name), body)?;
    }
    Ok(())
}

fn build_curve(cfg: &RunConfig) -> Result<SpectralCurve, Error> {
    let lat = Lattice::new(cfg.tau)?;
    let field = HiggsField::random(cfg.k as usize, lat, cfg.xi0, cfg.epsilon, cfg.seed)?;
    SpectralCurve::build(&field)
}

fn curve(cfg: &RunConfig) -> Result<Outcome, Error> {
    let c = build_curve(cfg)?;
    let k = cfg.k;
    let genus = c.genus()?;
    let (b1, b2) = (c.pi1_count() as i64, c.pi2_count() as i64);
    let invariants = vec![
        ("genus = 2k-1".into(), genus == 2 * k - 1),
        ("pi2 branch points = 4k".into(), b2 == 4 * k),
        ("pi1 branch points = 4k-4".into(), b1 == 4 * k - 4),
        ("B2 = B1 + 4".into(), b2 == b1 + 4),
        ("homology = (k, 2)".into(), c.homology == (k as usize, 2)),
        ("involution symmetry".into(), c.involution_check()?),
        ("(+-xi0, inf) on the curve".into(), c.infinity_membership()?),
    ];
    let mut result = c.to_json();
    result["genus"] = json!(genus);
    result["branch_counts"] = json!([b1, b2]);
    let csv = c.sample_csv(cfg.grid.unwrap_or(32))?;
    Ok(Outcome { result, invariants, files: vec![("curve_samples.csv".into(), csv)] })
}

fn ratmap_cmd(cfg: &RunConfig) -> Result<Outcome, Error> {
    let c = build_curve(cfg)?;
    let m = RationalMap::extract(&c)?;
    let k = cfg.k as usize;
    let tol = cfg.tol.unwrap_or(1e-8);
    let ws: Vec<C64> = (0..50).map(|j| C64::from_polar(1.1 + 0.05 * j as f64, 0.4 + 0.37 * j as f64)).collect();
    let dist = ratmap::roundtrip_distance(&c, &m, &ws)?;
    let p0 = c.field.lattice.wp(cfg.xi0)?;
    let r_inf = m.eval_infinity().finite();
    let (rank, sv) = ratmap::param_jacobian_rank(&m)?;
    let invariants = vec![
        ("degree = k".into(), m.degree() == k),
        ("R(inf) = wp(xi0)".into(), r_inf.is_some_and(|z| (z - p0).norm() < 1e-7 * (1.0 + p0.norm()))),
        ("roundtrip Hausdorff distance".into(), dist < tol),
        ("deformation Jacobian rank = 2k+1".into(), rank == ratmap::param_count(k)),
    ];
    let mut result = m.to_json();
    result["degree"] = json!(m.degree());
    result["param_count"] = json!(ratmap::param_count(k));
    result["jacobian_rank"] = json!(rank);
    result["jacobian_singular_values"] = json!(sv);
    result["roundtrip_distance"] = json!(dist);
    let mut csv = String::from("w_re,w_im,r_re,r_im\n");
    for j in 0..64 {
        let w = C64::from_polar(1.5, 2.0 * PI * j as f64 / 64.0);
        if let Some(r) = m.eval(w)?.finite() {
            csv.push_str(&format!("{},{},{},{}\n", w.re, w.im, r.re, r.im));
        }
    }
    Ok(Outcome { result, invariants, files: vec![("ratmap.json".into(), m.to_json().to_string()), ("ratmap_samples.csv".into(), csv)] })
}

fn flatmodel(cfg: &RunConfig) -> Result<Outcome, Error> {
    let base = FlatModelOperator::new(cfg.xi, cfg.cutoff.unwrap_or(8))?;
    let op = FlatModelOperator::with_grid(cfg.xi, base.cutoff, base.extent, cfg.grid.unwrap_or(256))?;
    let report = flat::flat_report(&op, cfg.seed)?;
    let invariants = vec![
        ("k0 L1 norm = 2 pi".into(), (report.k0_l1 - 2.0 * PI).abs() < 1e-6),
        ("decay rate >= 0.95 lambda_min".into(), report.decay_rate >= 0.95 * report.lambda_min),
        ("Green norm <= 1 + C/lambda^2".into(), report.green_norm <= report.green_bound),
        ("relative Weitzenbock deviation < tol".into(), report.weitzenbock_rel < cfg.tol.unwrap_or(1e-12)),
    ];
    let mut files = vec![];
    if cfg.out.is_some() {
        let n0 = op.spectrum[0].1;
        let rho = PlaneField::bump(&op, [0.0, 0.0], 4.0 * op.h().max(0.125), &[(n0, C64::new(1.0, 0.0))]);
        files.push(("flat_field.csv".into(), flat::solve_flat(&op, &rho)?.to_csv()));
    }
    Ok(Outcome { result: serde_json::to_value(&report)?, invariants, files })
}

fn chern(cfg: &RunConfig) -> Result<Outcome, Error> {
    let k = cfg.k;
    let mut result = json!({});
    for s in Scenario::ALL {
        result[s.name()] = json!(cohomology::scenario(s, k).to_string());
    }
    result["deg_V"] = json!(cohomology::degree_of_v(k).to_string());
    result["rank_V"] = json!(cohomology::rank_of_v(k).to_string());
    result["scenarios"] = json!(Scenario::ALL.iter().map(|s| cohomology::scenario_json(*s, k)).collect::<Vec<_>>());
    let r = |s: &str| cohomology::ring_eval(s);
    let invariants = vec![
        ("ch_V = k - 2t^".into(), cohomology::ch_v(k) == r(&format!("{k} - 2 that"))?),
        ("ch_E_check = 2 - k t p".into(), cohomology::ch_e_check(k) == r(&format!("2 - {k} t p"))?),
        ("deg_I = 0".into(), cohomology::deg_i(k).is_zero()),
        ("index_c1 = -k".into(), cohomology::index_c1(k) == cohomology::RingElement::int(-k)),
        ("deg V = -2".into(), cohomology::degree_of_v(k).to_string() == "-2"),
    ];
    Ok(Outcome { result, invariants, files: vec![] })
}

fn hitchin_cmd(cfg: &RunConfig) -> Result<Outcome, Error> {
    let m = cfg.grid.unwrap_or(256);
    let tol = cfg.tol.unwrap_or(1e-9);
    let conf = match cfg.k {
        1 => hitchin::abelian_solution(Lattice::new(cfg.tau)?, cfg.xi0, C64::new(0.5, 0.1), cfg.epsilon, C64::new(0.2, -0.4), m, 0.08)?.0,
        2 => {
            let z = C64::new(0.0, 0.0);
            let b = CMat { n: 2, data: vec![C64::new(0.3, 0.2), z, z, C64::new(-0.1, 0.5)] };
            let phi0 = CMat { n: 2, data: vec![cfg.epsilon, z, z, -cfg.epsilon] };
            hitchin::biquard_model(&b, &phi0, 0.08, 0.5, m)?
        }
        k => return Err(Error::Validation(format!("hitchin supports k = 1 (abelian) or k = 2 (Biquard model), got {k}"))),
    }
    .with_metric(cfg.metric);
    let r = hitchin::residual(&conf)?;
    let flag = hitchin::conformal_flag_check(&conf)?;
    let invariants = vec![("residual below tol * scale".into(), r.passes(tol)), ("conformal flag invariance".into(), flag)];
    if let Some(dir) = &cfg.out {
        std::fs::create_dir_all(dir)?;
        conf.dump(&Path::new(dir).join("configuration"))?;
    }
    Ok(Outcome { result: hitchin::residual_json(&conf, &r), invariants, files: vec![] })
}

fn selftest() -> Result<Outcome, Error> {
    let first = acceptance::run_suite();
    let a = serde_json::to_string(&acceptance::report_json(&first))?;
    let b = serde_json::to_string(&acceptance::report_json(&acceptance::run_suite()))?;
    let det = acceptance::c12_determinism(&a, &b);
    for c in first.iter().chain(std::iter::once(&det)) {
        eprintln!("{}", c.line());
    }
    let invariants = first
        .iter()
        .chain(std::iter::once(&det))
        .map(|c| (format!("criterion {}: {}", c.id, c.name), c.ok()))
        .collect();
    let mut all = first.clone();
    all.push(det);
    Ok(Outcome { result: json!({ "criteria": all }), invariants, files: vec![] })
}
