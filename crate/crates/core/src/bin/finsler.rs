//! Command-line front end: evaluate invariants at a point, run verification
//! scenarios, query volume densities, and list what's built in.
//!
//! Exit codes: 0 on success/pass, 1 when a verification check fails, 2 on
//! usage or domain errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use finsler::error::{Error, Result};
use finsler::geom;
use finsler::metric::{builtin, parse_metric_str, Metric, CATALOG};
use finsler::verify::{self, VerificationReport, SCENARIOS};
use finsler::volume::{self, VolumeSpec};

#[derive(Parser)]
#[command(
    name = "finsler",
    version,
    about = "Finsler curvature invariants via dual numerical pipelines"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate curvature invariants at a tangent-bundle point (x, y).
    Eval {
        /// Metric: `builtin:NAME` or a path to a metric file.
        #[arg(long)]
        metric: String,
        /// Reference density for the weighted invariants: `self` (Σ ≡ 1),
        /// `alpha` (Riemannian-part density), `builtin:NAME`, or a file.
        #[arg(long, default_value = "self")]
        r#ref: String,
        /// Base point, comma-separated (e.g. `0.3,0`).
        #[arg(long)]
        x: String,
        /// Direction, comma-separated (e.g. `1,0`).
        #[arg(long)]
        y: String,
        /// Comma-separated invariant names. `wpric` prints both WPRic₀ and
        /// the gap WPRic₀ − Ric.
        #[arg(long, default_value = "F,spray,ric,S,pric,wpric")]
        invariants: String,
        /// Also write the results as JSON to this file.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Run verification scenarios and report per-check residual maxima.
    Verify {
        /// Scenario name, or `all`.
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Override the scenario's default sample count.
        #[arg(long)]
        samples: Option<usize>,
        /// Override every pinned tolerance in the suite.
        #[arg(long)]
        tol: Option<f64>,
        /// Write the report(s) as JSON to this file.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Volume density σ(x) and the coordinate volume of the unit ball.
    Volume {
        /// Metric: `builtin:NAME` or a path to a metric file.
        #[arg(long)]
        metric: String,
        /// Base point, comma-separated.
        #[arg(long)]
        x: String,
        #[arg(long, value_enum, default_value_t = Method::Quadrature)]
        method: Method,
        /// Also write the results as JSON to this file.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// List builtin metrics and registered verification scenarios.
    Catalog,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Quadrature,
    ClosedForm,
}

fn load_metric(arg: &str) -> Result<Metric> {
    if let Some(name) = arg.strip_prefix("builtin:") {
        return builtin(name);
    }
    let path = Path::new(arg);
    if path.is_file() {
        let src = std::fs::read_to_string(path)?;
        let name = path
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or("file-metric");
        return parse_metric_str(&src, name);
    }
    Err(Error::invalid(format!(
        "metric `{arg}` is neither `builtin:NAME` nor an existing file (see `finsler catalog`)"
    )))
}

fn parse_point(arg: &str, what: &str) -> Result<Vec<f64>> {
    arg.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<f64>()
                .map_err(|_| Error::invalid(format!("{what}: `{tok}` is not a number")))
        })
        .collect()
}

fn closed_form_spec(m: &Metric) -> Result<VolumeSpec> {
    match m.kind() {
        "riemannian" => Ok(VolumeSpec::RiemannianDensity),
        "randers" => Ok(VolumeSpec::ClosedFormRanders),
        "kropina" => Ok(VolumeSpec::ClosedFormKropina),
        other => Err(Error::invalid(format!(
            "no closed-form density for `{other}` metrics; use --method quadrature"
        ))),
    }
}

fn fmt_scalar(v: f64) -> String {
    format!("{v:.10}")
}

fn fmt_vec(v: &[f64]) -> String {
    let body: Vec<String> = v.iter().map(|c| fmt_scalar(*c)).collect();
    format!("[{}]", body.join(", "))
}

fn cmd_eval(
    metric: &str,
    reference: &str,
    x: &str,
    y: &str,
    invariants: &str,
    json_path: Option<&Path>,
) -> Result<()> {
    let m = load_metric(metric)?;
    let x = parse_point(x, "--x")?;
    let y = parse_point(y, "--y")?;
    let vol = VolumeSpec::preferred(&m);
    let bundle = match reference {
        "self" => geom::curvature_bundle(&m, &vol, &vol, &x, &y)?,
        "alpha" => geom::curvature_bundle(&m, &vol, &VolumeSpec::RiemannianDensity, &x, &y)?,
        other => {
            let rm = load_metric(other)?;
            let rv = VolumeSpec::preferred(&rm);
            geom::curvature_bundle_with_reference(&m, &vol, &rm, &rv, &x, &y)?
        }
    };
    let mut fields = serde_json::Map::new();
    for key in invariants.split(',') {
        let key = key.trim();
        match key.to_ascii_lowercase().as_str() {
            "f" => {
                println!("F = {}", fmt_scalar(bundle.f));
                fields.insert("F".into(), json!(bundle.f));
            }
            "g" => {
                println!("g = {}", fmt_vec(&bundle.g));
                fields.insert("g".into(), json!(bundle.g));
            }
            "spray" => {
                println!("spray = {}", fmt_vec(&bundle.spray));
                fields.insert("spray".into(), json!(bundle.spray));
            }
            "riemann" => {
                println!("riemann = {}", fmt_vec(&bundle.riemann));
                fields.insert("riemann".into(), json!(bundle.riemann));
            }
            "ric" => {
                println!("ric = {}", fmt_scalar(bundle.ric));
                fields.insert("ric".into(), json!(bundle.ric));
            }
            "s" => {
                println!("S = {}", fmt_scalar(bundle.s));
                fields.insert("S".into(), json!(bundle.s));
            }
            "sfrak" => {
                println!("sfrak = {}", fmt_scalar(bundle.s_frak));
                fields.insert("sfrak".into(), json!(bundle.s_frak));
            }
            "tau" => {
                println!("tau = {}", fmt_scalar(bundle.tau));
                fields.insert("tau".into(), json!(bundle.tau));
            }
            "sigma" => {
                println!("sigma = {}", fmt_scalar(bundle.sigma_f));
                fields.insert("sigma".into(), json!(bundle.sigma_f));
            }
            "theta" => {
                println!("theta = {}", fmt_scalar(bundle.theta));
                fields.insert("theta".into(), json!(bundle.theta));
            }
            "pric" => {
                println!("pric = {}", fmt_scalar(bundle.pric));
                fields.insert("pric".into(), json!(bundle.pric));
            }
            "wpric" => {
                println!("wpric0 = {}", fmt_scalar(bundle.wpric0));
                println!("wpric0 - ric = {}", fmt_scalar(bundle.wpric0 - bundle.ric));
                fields.insert("wpric0".into(), json!(bundle.wpric0));
                fields.insert("wpric0_minus_ric".into(), json!(bundle.wpric0 - bundle.ric));
            }
            other => {
                return Err(Error::invalid(format!(
                    "unknown invariant `{other}`; valid: F, g, spray, riemann, ric, S, sfrak, tau, sigma, theta, pric, wpric"
                )))
            }
        }
    }
    if let Some(path) = json_path {
        let doc = json!({
            "schema": 1,
            "metric": m.name,
            "x": x,
            "y": y,
            "ref": reference,
            "invariants": fields,
        });
        std::fs::write(path, format!("{}\n", serde_json::to_string_pretty(&doc)?))?;
    }
    Ok(())
}

fn print_report(rep: &VerificationReport) {
    let verdict = if rep.pass() { "PASS" } else { "FAIL" };
    println!(
        "scenario {}: {} (seed {}, {} samples, {} ms)",
        rep.scenario, verdict, rep.seed, rep.samples, rep.elapsed_ms
    );
    for c in &rep.checks {
        println!(
            "  {:32} max_abs {:10.3e}  max_rel {:10.3e}  tol {:.1e}  {}",
            c.name,
            c.max_abs,
            c.max_rel,
            c.tol,
            if c.pass { "pass" } else { "FAIL" }
        );
    }
}

fn cmd_verify(
    suite: &str,
    seed: u64,
    samples: Option<usize>,
    tol: Option<f64>,
    json_path: Option<&Path>,
) -> Result<bool> {
    let reports = if suite == "all" {
        verify::run_all(seed, samples, tol)?
    } else {
        vec![verify::run_scenario(suite, seed, samples, tol)?]
    };
    for rep in &reports {
        print_report(rep);
    }
    let pass = reports.iter().all(VerificationReport::pass);
    println!(
        "suite {}: {} ({} scenario{})",
        suite,
        if pass { "PASS" } else { "FAIL" },
        reports.len(),
        if reports.len() == 1 { "" } else { "s" }
    );
    if let Some(path) = json_path {
        let doc = if suite == "all" {
            serde_json::to_string_pretty(&reports)?
        } else {
            serde_json::to_string_pretty(&reports[0])?
        };
        std::fs::write(path, format!("{doc}\n"))?;
    }
    Ok(pass)
}

fn cmd_volume(metric: &str, x: &str, method: Method, json_path: Option<&Path>) -> Result<()> {
    let m = load_metric(metric)?;
    let x = parse_point(x, "--x")?;
    let spec = match method {
        Method::Quadrature => VolumeSpec::BusemannHausdorff,
        Method::ClosedForm => closed_form_spec(&m)?,
    };
    let density = volume::density_value(&m, &spec, &x)?;
    let ball = volume::euclidean_ball_volume(m.dim())? / density;
    println!("sigma = {}", fmt_scalar(density));
    println!("unit_ball_coordinate_volume = {}", fmt_scalar(ball));
    if let Some(path) = json_path {
        let doc = json!({
            "schema": 1,
            "metric": m.name,
            "x": x,
            "method": match method {
                Method::Quadrature => "quadrature",
                Method::ClosedForm => "closed-form",
            },
            "sigma": density,
            "unit_ball_coordinate_volume": ball,
        });
        std::fs::write(path, format!("{}\n", serde_json::to_string_pretty(&doc)?))?;
    }
    Ok(())
}

fn cmd_catalog() {
    println!("builtin metrics:");
    for entry in CATALOG {
        println!("  {entry}");
    }
    println!();
    println!("verification scenarios:");
    for s in SCENARIOS {
        println!("  {:28} [{} samples] {}", s.name, s.default_samples, s.summary);
    }
}

fn run(cli: Cli) -> Result<bool> {
    match cli.cmd {
        Cmd::Eval { metric, r#ref, x, y, invariants, json } => {
            cmd_eval(&metric, &r#ref, &x, &y, &invariants, json.as_deref())?;
            Ok(true)
        }
        Cmd::Verify { suite, seed, samples, tol, json } => {
            cmd_verify(&suite, seed, samples, tol, json.as_deref())
        }
        Cmd::Volume { metric, x, method, json } => {
            cmd_volume(&metric, &x, method, json.as_deref())?;
            Ok(true)
        }
        Cmd::Catalog => {
            cmd_catalog();
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
