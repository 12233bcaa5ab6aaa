mod output;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nalgebra::DVector;
use serde_json::{json, Value};

use psr_core::catalog::{classify_with, symmetry_dim_lower_bound, CLASS_TOL};
use psr_core::cubic::{extract_standard, p3_to_json, CubicForm, PolyJson, StandardFormPoly, SHAPE_TOL};
use psr_core::evolution::{evolve, extract_limit_with, horizon_r, ExtrapolationOptions};
use psr_core::hyperbolicity::{closedness_with, SphereMaxOptions, DEFAULT_SEED, DEFAULT_SING_TOL};
use psr_core::metric::{centro_affine_metric, dom_boundary_emit, intrinsic_metric};
use psr_core::registry::{example, motivating, ExampleParams};
use psr_core::standard_form::{gauge_by_name, standard_form_at};
use psr_core::{PsrError, BOUND};

use output::{matrix, number, render, vector};

#[derive(Parser, Debug)]
#[command(name = "psr", version, about = "Closedness, standard forms and limit geometries of cubic PSR manifolds")]
struct Cli {
    #[command(flatten)]
    config: RunConfig,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct RunConfig {
    /// Compact single-line JSON output.
    #[arg(long, global = true)]
    json: bool,
    /// Seed for multi-start optimizers; defaults to PSR_SEED or a fixed value.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Tolerance for the singular-at-infinity test.
    #[arg(long, global = true, default_value_t = DEFAULT_SING_TOL)]
    sing_tol: f64,
    /// Tolerance for catalog matching.
    #[arg(long, global = true, default_value_t = CLASS_TOL)]
    class_tol: f64,
    /// Accepted extrapolation error estimate.
    #[arg(long, global = true, default_value_t = 1e-4)]
    extrapolation_tol: f64,
    /// Frame normalization: symmetric, fixed or continuous.
    #[arg(long, global = true, default_value = "symmetric")]
    gauge: String,
    /// Write output to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Closedness verdict for a polynomial in standard form.
    Check { poly: PathBuf },
    /// Standard form of a polynomial at a point of its level set.
    StandardForm {
        poly: PathBuf,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        point: Vec<f64>,
    },
    /// Standard forms along the ray curve at `t_j = R j / k`.
    Evolve {
        poly: PathBuf,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        dir: Vec<f64>,
        #[arg(long, default_value_t = 10)]
        samples: usize,
    },
    /// Limit polynomial along a direction.
    Limit {
        poly: PathBuf,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        dir: Vec<f64>,
    },
    /// Match a limit polynomial against the catalog.
    Classify { poly: PathBuf },
    /// Kernel dimension of the first variation.
    SymmetryDim { poly: PathBuf },
    /// Boundary of the domain as CSV.
    DomPlot {
        poly: PathBuf,
        #[arg(long, default_value_t = 360)]
        resolution: usize,
    },
    /// Centro-affine metric at a point of the domain.
    Metric {
        poly: PathBuf,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        point: Vec<f64>,
    },
    /// Print a named example polynomial.
    Examples {
        /// Example name; omit to list all names.
        name: Option<String>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long, allow_hyphen_values = true)]
        b: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        c: Option<f64>,
        /// Curve parameter for the motivating example.
        #[arg(long, allow_hyphen_values = true)]
        t: Option<f64>,
    },
}

enum Output {
    Json(Value),
    Text(String),
}

fn read_poly(path: &PathBuf) -> Result<CubicForm, PsrError> {
    let text = fs::read_to_string(path).map_err(|e| PsrError::Parse(format!("{}: {e}", path.display())))?;
    PolyJson::parse(&text)?.to_cubic()
}

/// Standard form from either a full standard-form cubic or a bare `P3` (no `x`).
fn read_standard(path: &PathBuf) -> Result<StandardFormPoly, PsrError> {
    let h = read_poly(path)?;
    match extract_standard(&h, SHAPE_TOL) {
        Ok(sf) => Ok(sf),
        Err(err) => {
            if h.terms().all(|((i, _, _), _)| i > 0) {
                let p3 = CubicForm::from_terms(
                    h.dim() - 1,
                    h.terms().map(|((i, j, k), c)| ((i - 1, j - 1, k - 1), c)),
                )?;
                Ok(StandardFormPoly::new(p3))
            } else {
                Err(err)
            }
        }
    }
}

fn poly_value(p: &PolyJson) -> Value {
    serde_json::to_value(p).expect("polynomial serialization")
}

fn unit_dir(dir: &[f64], n: usize) -> Result<DVector<f64>, PsrError> {
    if dir.len() != n {
        return Err(PsrError::DimensionMismatch {
            expected: n,
            got: dir.len(),
        });
    }
    let v = DVector::from_column_slice(dir);
    let norm = v.norm();
    if !(norm > 0.0) {
        return Err(PsrError::OutOfRange("direction must be nonzero".into()));
    }
    Ok(v / norm)
}

fn seed(cfg: &RunConfig) -> Result<u64, PsrError> {
    if let Some(s) = cfg.seed {
        return Ok(s);
    }
    match std::env::var("PSR_SEED") {
        Ok(s) => s
            .trim()
            .parse()
            .map_err(|_| PsrError::Parse(format!("PSR_SEED is not an integer: {s}"))),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

fn check_config(cfg: &RunConfig) -> Result<(), PsrError> {
    for (name, v) in [
        ("sing-tol", cfg.sing_tol),
        ("class-tol", cfg.class_tol),
        ("extrapolation-tol", cfg.extrapolation_tol),
    ] {
        if !(v > 0.0) {
            return Err(PsrError::OutOfRange(format!("{name} must be positive, got {v}")));
        }
    }
    Ok(())
}

fn limit_json(sf: &StandardFormPoly, v: &DVector<f64>, cfg: &RunConfig) -> Result<Value, PsrError> {
    let gauge = gauge_by_name(&cfg.gauge)?;
    let opts = ExtrapolationOptions {
        tolerance: cfg.extrapolation_tol,
        ..ExtrapolationOptions::default()
    };
    let lim = extract_limit_with(sf, v, &opts, gauge.as_ref())?;
    let limit_sf = StandardFormPoly::new(lim.limit_p3.clone());
    Ok(json!({
        "direction": vector(v),
        "horizon": number(lim.horizon),
        "limit_p3": poly_value(&p3_to_json(&lim.limit_p3)),
        "limit_h": poly_value(&PolyJson::from_standard(&limit_sf)),
        "error_estimate": number(lim.extrapolation_error_estimate),
        "per_coefficient": Value::Array(lim.per_coefficient.iter().map(|&x| number(x)).collect()),
        "samples_used": lim.samples_used,
    }))
}

fn run(cli: &Cli) -> Result<Output, PsrError> {
    let cfg = &cli.config;
    check_config(cfg)?;
    match &cli.command {
        Command::Check { poly } => {
            let sf = read_standard(poly)?;
            let opts = SphereMaxOptions {
                seed: seed(cfg)?,
                ..SphereMaxOptions::default()
            };
            let v = closedness_with(&sf, cfg.sing_tol, &opts);
            Ok(Output::Json(json!({
                "status": v.status.as_str(),
                "max_value": number(v.max_value),
                "margin": number(v.margin),
                "argmax": Value::Array(v.argmax.iter().map(vector).collect()),
            })))
        }
        Command::StandardForm { poly, point } => {
            let h = read_poly(poly)?;
            if point.len() != h.dim() {
                return Err(PsrError::DimensionMismatch {
                    expected: h.dim(),
                    got: point.len(),
                });
            }
            let gauge = gauge_by_name(&cfg.gauge)?;
            let p = DVector::from_column_slice(point);
            let at = standard_form_at(&h, &p, gauge.as_ref(), None)?;
            Ok(Output::Json(json!({
                "A": matrix(at.transform.matrix()),
                "P3": poly_value(&p3_to_json(&at.sf.p3)),
                "h": poly_value(&PolyJson::from_standard(&at.sf)),
                "chart": at.chart,
            })))
        }
        Command::Evolve { poly, dir, samples } => {
            let sf = read_standard(poly)?;
            let v = unit_dir(dir, sf.n)?;
            if *samples == 0 {
                return Err(PsrError::OutOfRange("samples must be positive".into()));
            }
            let a = sf.p3.value(v.as_slice());
            let r = horizon_r(a)?;
            let schedule: Vec<f64> = (0..*samples).map(|j| r * j as f64 / *samples as f64).collect();
            let gauge = gauge_by_name(&cfg.gauge)?;
            let trace = evolve(&sf, &v, &schedule, gauge.as_ref())?;
            let samples: Vec<Value> = trace
                .samples
                .iter()
                .map(|s| {
                    json!({
                        "t": number(s.t),
                        "p3": poly_value(&p3_to_json(&s.sf.p3)),
                        "A": matrix(s.transform.matrix()),
                        "condition": number(s.condition),
                    })
                })
                .collect();
            Ok(Output::Json(json!({
                "direction": vector(&v),
                "horizon": number(trace.horizon),
                "samples": samples,
            })))
        }
        Command::Limit { poly, dir } => {
            let sf = read_standard(poly)?;
            let v = unit_dir(dir, sf.n)?;
            Ok(Output::Json(limit_json(&sf, &v, cfg)?))
        }
        Command::Classify { poly } => {
            let sf = read_standard(poly)?;
            let c = classify_with(&sf.p3, cfg.class_tol)?;
            Ok(Output::Json(json!({
                "variant": c.form.variant_name(),
                "m": c.form.m(),
                "F": Value::Array(c.form.f().iter().map(matrix).collect()),
                "residual": number(c.residual),
                "aligning_map": matrix(&c.aligning_map),
            })))
        }
        Command::SymmetryDim { poly } => {
            let sf = read_standard(poly)?;
            Ok(Output::Json(json!(symmetry_dim_lower_bound(&sf))))
        }
        Command::DomPlot { poly, resolution } => {
            let sf = read_standard(poly)?;
            let rows = dom_boundary_emit(&sf, *resolution)?;
            let mut w = csv::Writer::from_writer(Vec::new());
            let csv_err = |e: csv::Error| PsrError::Parse(e.to_string());
            let mut header: Vec<String> = if sf.n == 2 {
                vec!["theta".into()]
            } else {
                (1..=sf.n).map(|i| format!("q{i}")).collect()
            };
            header.push("radius".into());
            w.write_record(&header).map_err(csv_err)?;
            for r in &rows {
                let mut rec: Vec<String> = match r.theta {
                    Some(th) => vec![format!("{th:.16e}")],
                    None => r.direction.iter().map(|x| format!("{x:.16e}")).collect(),
                };
                rec.push(format!("{:.16e}", r.radius));
                w.write_record(&rec).map_err(csv_err)?;
            }
            let bytes = w.into_inner().map_err(|e| PsrError::Parse(e.to_string()))?;
            Ok(Output::Text(String::from_utf8(bytes).expect("utf8 csv")))
        }
        Command::Metric { poly, point } => {
            let sf = read_standard(poly)?;
            let y = DVector::from_column_slice(point);
            let g = centro_affine_metric(&sf, &y)?;
            let gi = intrinsic_metric(&sf, &y)?;
            let min_eig = g.g.clone().symmetric_eigenvalues().min();
            Ok(Output::Json(json!({
                "point": vector(&y),
                "g": matrix(&g.g),
                "g_intrinsic": matrix(&gi),
                "min_eigenvalue": number(min_eig),
            })))
        }
        Command::Examples { name, n, m, b, c, t } => {
            let Some(name) = name else {
                let names = psr_core::registry::EXAMPLE_NAMES;
                return Ok(Output::Json(json!(names)));
            };
            let params = ExampleParams {
                n: *n,
                m: *m,
                b: *b,
                c: *c,
            };
            let sf = example(name, &params)?;
            match t {
                None => Ok(Output::Json(poly_value(&PolyJson::from_standard(&sf)))),
                Some(t) if name == "motivating" => motivating_at_t(*t, cfg),
                Some(_) => Err(PsrError::OutOfRange("--t applies to the motivating example only".into())),
            }
        }
    }
}

/// `P3|_t` of the motivating example along the `y`-ray, using the limit at the ends.
fn motivating_at_t(t: f64, cfg: &RunConfig) -> Result<Output, PsrError> {
    let sf = motivating();
    let fwd = horizon_r(BOUND)?;
    let back = horizon_r(-BOUND)?;
    let end_tol = 1e-9;
    let p3 = if (t - fwd).abs() <= end_tol || (t + back).abs() <= end_tol {
        let v = DVector::from_vec(vec![t.signum(), 0.0]);
        let lim = limit_json(&sf, &v, cfg)?;
        lim["limit_p3"].clone()
    } else {
        let gauge = gauge_by_name(&cfg.gauge)?;
        let trace = evolve(&sf, &DVector::from_vec(vec![1.0, 0.0]), &[t], gauge.as_ref())?;
        poly_value(&p3_to_json(&trace.samples[0].sf.p3))
    };
    Ok(Output::Json(json!({ "name": "motivating", "t": number(t), "p3": p3 })))
}

fn emit(text: &str, out: &Option<PathBuf>) -> Result<(), PsrError> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| PsrError::Parse(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(&cli).and_then(|out| {
        let text = match out {
            Output::Json(v) => render(&v, !cli.config.json) + "\n",
            Output::Text(s) => s,
        };
        emit(&text, &cli.config.out)
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let err = json!({"error": {"kind": e.kind(), "message": e.to_string()}});
            eprintln!("{}", render(&err, false));
            ExitCode::from(2)
        }
    }
}
