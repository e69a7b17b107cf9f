mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use boolvol_core::balls::lens_area;
use boolvol_core::{
    asymptotic_fit, epsilon_signs, eval_to_atoms, hull_union_gap, mc_volume,
    monotonicity_experiment, parse, two_disk_oracle, v1_minmax, v_boolean_cones, v_boolean_def,
    AtomSet, BoolExpr, EstimatorOptions, ExperimentOptions, Method, PointConfig, Transform,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use config::{load_config, parse_count, ConfigError, RunConfig};
use report::{estimate_fields, estimate_json, estimate_row, Report, Table};

#[derive(Parser)]
#[command(
    name = "boolvol",
    version,
    about = "Boolean expressions of balls: atoms, coefficients and intrinsic volumes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// Number of variables
    #[arg(short = 'n', long)]
    n: Option<usize>,
    /// Boolean expression, e.g. "(x1 | x2) \ x3"
    #[arg(short = 'e', long = "expr")]
    expr: Option<String>,
    /// JSON run configuration
    #[arg(long)]
    config: Option<PathBuf>,
    /// Centers as "x,y;x,y;..."
    #[arg(long)]
    points: Option<String>,
    /// Write CSV instead of JSON
    #[arg(long)]
    csv: bool,
    #[arg(long, value_parser = parse_count)]
    samples: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Perturb the centers by uniform noise of this magnitude
    #[arg(long)]
    perturb: Option<f64>,
    /// Relative degeneracy tolerance
    #[arg(long)]
    tolerance: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum TransformArg {
    Complement,
    Dual,
    Contradual,
}

#[derive(Subcommand)]
enum Command {
    /// Atomic decomposition and structural class
    Atoms {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        transform: Option<TransformArg>,
    },
    /// Reduced Euler characteristic
    Euler {
        #[command(flatten)]
        common: Common,
    },
    /// Inclusion-exclusion coefficients over the unions
    Coeffs {
        #[command(flatten)]
        common: Common,
    },
    /// Pairwise signs of a read-once expression
    Epsilon {
        #[command(flatten)]
        common: Common,
    },
    /// Boolean intrinsic volume V_k
    Intrinsic {
        #[command(flatten)]
        common: Common,
        #[arg(short = 'k', long)]
        k: Option<usize>,
        /// definition, cones or minmax
        #[arg(long)]
        method: Option<String>,
    },
    /// Monte Carlo volume of a Boolean expression of balls
    Ballvol {
        #[command(flatten)]
        common: Common,
        #[arg(short = 'r', long)]
        radius: Option<f64>,
    },
    /// Large-radius fit of the three leading volume coefficients
    Asympt {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',')]
        radii: Option<Vec<f64>>,
    },
    /// Volume difference between the parallel body of the hull and the union
    Gap {
        #[command(flatten)]
        common: Common,
        #[arg(short = 'r', long)]
        radius: Option<f64>,
    },
    /// Monotonicity of V_1 under sign-constrained contractions
    Kp {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(short = 'd', long)]
        dim: Option<usize>,
        #[arg(long)]
        step: Option<f64>,
        #[arg(long)]
        attempts: Option<usize>,
    },
}

#[derive(Debug)]
struct CliError {
    numeric: bool,
    message: String,
    pointer: Option<String>,
}

impl CliError {
    fn validation(message: impl Into<String>) -> Self {
        CliError {
            numeric: false,
            message: message.into(),
            pointer: None,
        }
    }

    fn at(pointer: &str, message: impl Into<String>) -> Self {
        CliError {
            numeric: false,
            message: message.into(),
            pointer: Some(pointer.into()),
        }
    }

    fn to_json(&self) -> Value {
        let mut body = serde_json::Map::new();
        body.insert(
            "kind".into(),
            json!(if self.numeric {
                "numeric"
            } else {
                "validation"
            }),
        );
        body.insert("message".into(), json!(self.message));
        if let Some(p) = &self.pointer {
            body.insert("pointer".into(), json!(p));
        }
        json!({ "error": body })
    }

    fn exit_code(&self) -> u8 {
        if self.numeric {
            3
        } else {
            2
        }
    }
}

impl From<boolvol_core::Error> for CliError {
    fn from(e: boolvol_core::Error) -> Self {
        CliError {
            numeric: e.is_numeric(),
            message: e.to_string(),
            pointer: None,
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError {
            numeric: false,
            pointer: (!e.pointer.is_empty()).then(|| e.pointer.clone()),
            message: e.message,
        }
    }
}

fn parse_points(text: &str) -> Result<Vec<Vec<f64>>, CliError> {
    text.split(';')
        .enumerate()
        .map(|(i, row)| {
            row.split(',')
                .map(|c| {
                    c.trim().parse::<f64>().map_err(|_| {
                        CliError::at(
                            "/points",
                            format!("point row {i}: invalid coordinate {c:?}"),
                        )
                    })
                })
                .collect()
        })
        .collect()
}

/// Configuration file values overridden by command-line flags.
fn resolve(common: &Common) -> Result<RunConfig, CliError> {
    let mut cfg = match &common.config {
        Some(path) => load_config(path)?,
        None => RunConfig::default(),
    };
    if common.n.is_some() {
        cfg.n = common.n;
    }
    if let Some(e) = &common.expr {
        cfg.expr = Some(e.clone());
    }
    if let Some(p) = &common.points {
        let rows = parse_points(p)?;
        cfg.d = rows.first().map(Vec::len);
        cfg.points = Some(rows);
    }
    if let Some(s) = common.samples {
        cfg.samples = s;
    }
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if common.perturb.is_some() {
        cfg.perturb = common.perturb;
    }
    if let Some(t) = common.tolerance {
        cfg.tolerance = t;
    }
    Ok(cfg)
}

fn expression(cfg: &RunConfig) -> Result<(BoolExpr, usize), CliError> {
    let text = cfg
        .expr
        .as_deref()
        .ok_or_else(|| CliError::at("/expr", "an expression is required (-e or config expr)"))?;
    let expr = parse(text).map_err(|e| CliError::at("/expr", e.to_string()))?;
    let n = cfg
        .n
        .or(cfg.points.as_ref().map(Vec::len))
        .unwrap_or((expr.max_var() as usize).max(1));
    Ok((expr, n))
}

fn atoms(cfg: &RunConfig) -> Result<(AtomSet, BoolExpr, usize), CliError> {
    let (expr, n) = expression(cfg)?;
    Ok((eval_to_atoms(&expr, n)?, expr, n))
}

fn points(cfg: &RunConfig) -> Result<PointConfig, CliError> {
    let rows = cfg.points.clone().ok_or_else(|| {
        CliError::at(
            "/points",
            "centers are required (--points or config points)",
        )
    })?;
    let d = cfg.d.unwrap_or(rows[0].len());
    Ok(PointConfig::new(d, rows)?)
}

fn estimator_options(cfg: &RunConfig) -> EstimatorOptions {
    EstimatorOptions {
        samples: cfg.samples,
        seed: cfg.seed,
        perturb: cfg.perturb,
        tolerance: cfg.tolerance,
    }
}

fn cmd_atoms(cfg: &RunConfig, transform: Option<TransformArg>) -> Result<Report, CliError> {
    let (f, expr, n) = atoms(cfg)?;
    let (f, name) = match transform {
        None => (f, None),
        Some(TransformArg::Complement) => (f.transform(Transform::Complement), Some("complement")),
        Some(TransformArg::Dual) => (f.transform(Transform::Dual), Some("dual")),
        Some(TransformArg::Contradual) => (f.transform(Transform::Contradual), Some("contradual")),
    };
    let class = f.classify();
    let list: Vec<String> = f.atoms().map(|a| a.to_string()).collect();
    let facets = f
        .facets()
        .map(|fs| fs.iter().map(|s| s.to_string()).collect::<Vec<_>>());
    let mut table = Table::new(vec!["bit", "atom"]);
    for a in f.atoms() {
        table.push(vec![a.bits().to_string(), a.to_string()]);
    }
    let mut doc = serde_json::Map::new();
    doc.insert("n".into(), json!(n));
    doc.insert("expr".into(), json!(expr.to_string()));
    if let Some(name) = name {
        doc.insert("transform".into(), json!(name));
    }
    doc.insert("bits".into(), json!(f.to_bit_string()));
    doc.insert("count".into(), json!(f.atom_count()));
    doc.insert("atoms".into(), json!(list));
    doc.insert("in_c".into(), json!(class.in_c));
    doc.insert("in_l".into(), json!(class.in_l));
    doc.insert("facets".into(), json!(facets));
    Ok(Report {
        json: Value::Object(doc),
        table,
    })
}

fn cmd_euler(cfg: &RunConfig) -> Result<Report, CliError> {
    let (f, _, _) = atoms(cfg)?;
    let chi = f.reduced_euler();
    Ok(Report {
        json: json!({ "chi": chi }),
        table: Table::new(vec!["chi"]).row(vec![chi.to_string()]),
    })
}

fn cmd_coeffs(cfg: &RunConfig) -> Result<Report, CliError> {
    let (f, _, _) = atoms(cfg)?;
    let table_in = f.coefficients()?;
    let mut doc = serde_json::Map::new();
    let mut table = Table::new(vec!["set", "coefficient"]);
    for (set, m) in table_in.iter() {
        doc.insert(set.to_string(), json!(m));
        table.push(vec![set.to_string(), m.to_string()]);
    }
    Ok(Report {
        json: Value::Object(doc),
        table,
    })
}

fn cmd_epsilon(cfg: &RunConfig) -> Result<Report, CliError> {
    let (expr, n) = expression(cfg)?;
    let signs = epsilon_signs(&expr)?;
    if signs.n() != n {
        return Err(CliError::at(
            "/n",
            format!("n = {n} but the expression uses x1..x{}", signs.n()),
        ));
    }
    let mut doc = serde_json::Map::new();
    let mut table = Table::new(vec!["i", "j", "sign"]);
    for ((i, j), s) in signs.pairs() {
        doc.insert(format!("{{{},{}}}", i + 1, j + 1), json!(s));
        table.push(vec![
            (i + 1).to_string(),
            (j + 1).to_string(),
            s.to_string(),
        ]);
    }
    Ok(Report {
        json: Value::Object(doc),
        table,
    })
}

fn cmd_intrinsic(cfg: &RunConfig) -> Result<Report, CliError> {
    let (f, _, _) = atoms(cfg)?;
    let p = points(cfg)?;
    let k = cfg.k.unwrap_or(1);
    let method: Method = cfg.method.as_deref().unwrap_or("cones").parse()?;
    let opts = estimator_options(cfg);
    let report = match method {
        Method::Cones => v_boolean_cones(&f, &p, k, &opts)?,
        Method::Definition => v_boolean_def(&f, &p, k, &opts)?,
        Method::MinMax => {
            if k != 1 {
                return Err(CliError::at("/k", "the minmax method computes k = 1 only"));
            }
            v1_minmax(&f, &p, &opts)?
        }
    };
    let mut doc = estimate_fields(&report.estimate, method.as_str());
    let mut details = serde_json::Map::new();
    details.insert("k".into(), json!(k));
    details.insert("dim".into(), json!(p.dim()));
    if let Some((j, w)) = report.quermassintegral(p.dim()) {
        details.insert(
            "quermassintegral".into(),
            json!({"index": j, "value": w.value, "stderr": w.stderr}),
        );
    }
    if let Some(eta) = report.perturbation {
        details.insert("perturbation".into(), json!(eta));
        details.insert(
            "warning".into(),
            json!(format!(
                "centers perturbed by uniform noise of magnitude {eta}"
            )),
        );
    }
    if !report.cones.is_empty() {
        let cones: Vec<Value> = report
            .cones
            .iter()
            .map(|c| {
                let hist: serde_json::Map<String, Value> = c
                    .histogram
                    .iter()
                    .map(|(n, count)| (n.to_string(), json!(count)))
                    .collect();
                json!({
                    "subset": c.subset.to_string(),
                    "simplex_volume": c.simplex_volume,
                    "nu": c.estimate.value,
                    "stderr": c.estimate.stderr,
                    "histogram": hist,
                })
            })
            .collect();
        details.insert("cones".into(), json!(cones));
    }
    doc.insert("details".into(), Value::Object(details));
    let mut row = estimate_row(&report.estimate, method.as_str());
    row.push(k.to_string());
    Ok(Report {
        json: Value::Object(doc),
        table: Table::new(vec!["value", "stderr", "samples", "seed", "method", "k"]).row(row),
    })
}

fn radius(cfg: &RunConfig, flag: Option<f64>) -> Result<f64, CliError> {
    flag.or(cfg.radius)
        .ok_or_else(|| CliError::at("/radius", "a radius is required (-r or config radius)"))
}

fn cmd_ballvol(cfg: &RunConfig, r: f64) -> Result<Report, CliError> {
    let (f, _, n) = atoms(cfg)?;
    let p = points(cfg)?;
    let est = mc_volume(&f, &p, r, cfg.samples, cfg.seed)?;
    let mut doc = estimate_fields(&est, "hit-or-miss");
    let mut details = serde_json::Map::new();
    details.insert("radius".into(), json!(r));
    details.insert("n".into(), json!(n));
    details.insert("dim".into(), json!(p.dim()));
    if n == 2 && p.dim() == 2 {
        let l = p.diameter();
        details.insert("oracle".into(), json!(two_disk_oracle(&f, l, r)?));
        details.insert("lens".into(), json!(lens_area(r, l)));
    }
    doc.insert("details".into(), Value::Object(details));
    let mut row = estimate_row(&est, "hit-or-miss");
    row.push(r.to_string());
    Ok(Report {
        json: Value::Object(doc),
        table: Table::new(vec![
            "value", "stderr", "samples", "seed", "method", "radius",
        ])
        .row(row),
    })
}

fn cmd_asympt(cfg: &RunConfig) -> Result<Report, CliError> {
    let (f, _, _) = atoms(cfg)?;
    let p = points(cfg)?;
    let radii = cfg
        .radii
        .clone()
        .ok_or_else(|| CliError::at("/radii", "radii are required (--radii or config radii)"))?;
    let report = asymptotic_fit(&f, &p, &radii, &estimator_options(cfg))?;
    let d = report.dim;
    let powers = [d, d - 1, d - 2];
    let volumes: Vec<Value> = report
        .radii
        .iter()
        .zip(&report.volumes)
        .map(|(r, v)| json!({"radius": r, "value": v.value, "stderr": v.stderr}))
        .collect();
    let predicted: Vec<Value> = report.predicted.iter().map(estimate_json).collect();
    let doc = json!({
        "value": report.fitted,
        "stderr": report.fitted_stderr,
        "samples": cfg.samples,
        "seed": cfg.seed,
        "method": "weighted-least-squares",
        "details": {
            "powers": powers,
            "volumes": volumes,
            "predicted": predicted,
            "z_scores": report.z_scores(),
            "covariance": report.covariance,
            "residual": report.residual,
            "condition": report.condition,
        }
    });
    let mut table = Table::new(vec![
        "power",
        "fitted",
        "fitted_stderr",
        "predicted",
        "predicted_stderr",
    ]);
    for i in 0..3 {
        table.push(vec![
            powers[i].to_string(),
            report.fitted[i].to_string(),
            report.fitted_stderr[i].to_string(),
            report.predicted[i].value.to_string(),
            report.predicted[i].stderr.to_string(),
        ]);
    }
    Ok(Report { json: doc, table })
}

fn cmd_gap(cfg: &RunConfig, r: f64) -> Result<Report, CliError> {
    let p = points(cfg)?;
    let est = hull_union_gap(&p, r, cfg.samples, cfg.seed)?;
    let diameter = p.diameter();
    let mut doc = estimate_fields(&est, "shell-importance");
    doc.insert(
        "details".into(),
        json!({
            "radius": r,
            "dim": p.dim(),
            "diameter": diameter,
            "inner_radius": r - diameter * diameter / r,
        }),
    );
    let mut row = estimate_row(&est, "shell-importance");
    row.push(r.to_string());
    Ok(Report {
        json: Value::Object(doc),
        table: Table::new(vec![
            "value", "stderr", "samples", "seed", "method", "radius",
        ])
        .row(row),
    })
}

fn cmd_kp(cfg: &RunConfig, opts: ExperimentOptions) -> Result<Report, CliError> {
    let (expr, _) = expression(cfg)?;
    let report = monotonicity_experiment(&expr, &opts)?;
    let mut table = Table::new(vec![
        "trial",
        "first",
        "first_stderr",
        "second",
        "second_stderr",
        "difference",
        "difference_stderr",
        "violation",
    ]);
    let trials: Vec<Value> = report
        .outcomes
        .iter()
        .map(|o| {
            table.push(vec![
                o.trial.to_string(),
                o.first.value.to_string(),
                o.first.stderr.to_string(),
                o.second.value.to_string(),
                o.second.stderr.to_string(),
                o.difference.value.to_string(),
                o.difference.stderr.to_string(),
                o.violation.to_string(),
            ]);
            json!({
                "trial": o.trial,
                "first": estimate_json(&o.first),
                "second": estimate_json(&o.second),
                "difference": estimate_json(&o.difference),
                "violation": o.violation,
            })
        })
        .collect();
    let doc = json!({
        "value": report.violations,
        "samples": opts.samples,
        "seed": opts.seed,
        "method": "paired-width",
        "details": {
            "expr": expr.to_string(),
            "dim": opts.dim,
            "trials": report.trials,
            "skipped": report.skipped,
            "violations": report.violations,
            "min_margin": report.min_margin,
            "min_z": report.min_z,
            "outcomes": trials,
        }
    });
    Ok(Report { json: doc, table })
}

fn run(cli: Cli) -> Result<(Report, bool), CliError> {
    let (common, report) = match cli.command {
        Command::Atoms { common, transform } => {
            let cfg = resolve(&common)?;
            cfg.validate()?;
            (common.clone(), cmd_atoms(&cfg, transform)?)
        }
        Command::Euler { common } => {
            let cfg = resolve(&common)?;
            cfg.validate()?;
            (common.clone(), cmd_euler(&cfg)?)
        }
        Command::Coeffs { common } => {
            let cfg = resolve(&common)?;
            cfg.validate()?;
            (common.clone(), cmd_coeffs(&cfg)?)
        }
        Command::Epsilon { common } => {
            let cfg = resolve(&common)?;
            cfg.validate()?;
            (common.clone(), cmd_epsilon(&cfg)?)
        }
        Command::Intrinsic { common, k, method } => {
            let mut cfg = resolve(&common)?;
            if k.is_some() {
                cfg.k = k;
            }
            if method.is_some() {
                cfg.method = method;
            }
            cfg.validate()?;
            (common.clone(), cmd_intrinsic(&cfg)?)
        }
        Command::Ballvol { common, radius: r } => {
            let cfg = resolve(&common)?;
            let r = radius(&cfg, r)?;
            cfg.validate()?;
            (common.clone(), cmd_ballvol(&cfg, r)?)
        }
        Command::Asympt { common, radii } => {
            let mut cfg = resolve(&common)?;
            if radii.is_some() {
                cfg.radii = radii;
            }
            cfg.validate()?;
            (common.clone(), cmd_asympt(&cfg)?)
        }
        Command::Gap { common, radius: r } => {
            let cfg = resolve(&common)?;
            let r = radius(&cfg, r)?;
            cfg.validate()?;
            (common.clone(), cmd_gap(&cfg, r)?)
        }
        Command::Kp {
            common,
            trials,
            dim,
            step,
            attempts,
        } => {
            let mut cfg = resolve(&common)?;
            cfg.trials = trials.or(cfg.trials);
            cfg.step = step.or(cfg.step);
            cfg.attempts = attempts.or(cfg.attempts);
            cfg.validate()?;
            let defaults = ExperimentOptions::default();
            let dim = dim.or(cfg.d).unwrap_or(defaults.dim);
            if !(1..=8).contains(&dim) {
                return Err(CliError::at("/d", format!("d = {dim} is outside 1..=8")));
            }
            let opts = ExperimentOptions {
                trials: cfg.trials.unwrap_or(defaults.trials),
                dim,
                samples: cfg.samples,
                seed: cfg.seed,
                step: cfg.step.unwrap_or(defaults.step),
                attempts: cfg.attempts.unwrap_or(defaults.attempts),
            };
            (common.clone(), cmd_kp(&cfg, opts)?)
        }
    };
    Ok((report, common.csv))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let message = e.to_string();
            let first = message.lines().next().unwrap_or("invalid arguments");
            let err = CliError::validation(first.trim_start_matches("error: ").to_string());
            eprintln!("{}", err.to_json());
            return ExitCode::from(err.exit_code());
        }
    };
    match run(cli) {
        Ok((report, csv)) => {
            let stdout = std::io::stdout();
            if let Err(e) = report::write(&report, csv, stdout.lock()) {
                if e.kind() == std::io::ErrorKind::BrokenPipe {
                    return ExitCode::SUCCESS;
                }
                eprintln!(
                    "{}",
                    CliError::validation(format!("cannot write output: {e}")).to_json()
                );
                return ExitCode::from(2);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code())
        }
    }
}
