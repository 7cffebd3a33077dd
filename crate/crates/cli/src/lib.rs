//! Command implementations behind the `qso` binary.
//!
//! Every command returns its standard output and exit code instead of
//! printing, so the same code paths run in-process under test.
//!
//! Exit codes: 0 converged (or valid), 2 not converged (or invariant
//! violations found), 1 error.

use std::env;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand_xoshiro::rand_core::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;
use serde_json::{json, Map, Value};

use qso_core::dynamics::{
    analyze_quadratic_1d, find_fixed_point, iterate, quadratic_1d_coefficients, regularity_check,
    DynamicsError, FixedPointOptions, FixedPointReport, IterateOptions,
};
use qso_core::ingest::{self, CountsTable, LoadOptions, MeasureTable};
use qso_core::models::{self, Model, ModelSource};
use qso_core::operators::{validate_pq, ReducedDistribution};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_NOT_CONVERGED: i32 = 2;

/// Overrides the directory holding `rh.csv` and `abo.csv`.
pub const DATA_DIR_ENV: &str = "QSO_DATA_DIR";

const SIGNIFICANT_DIGITS: usize = 12;

#[derive(Debug, Parser)]
#[command(
    name = "qso",
    version,
    about = "Quadratic stochastic operators of bisexual populations"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Iterate the operator and print the trajectory.
    Run(RunArgs),
    /// Locate and classify a fixed point.
    Fixpoint(FixpointArgs),
    /// Check a measure-family file against the p:q invariants.
    Validate(ValidateArgs),
    /// Estimate a measure family from parent/child counts.
    Ingest(IngestArgs),
    /// Write an embedded table as a measure-family file.
    Export(ExportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelName {
    Trait,
    Multi,
    Rh,
    Abo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Table {
    Rh,
    Abo,
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    #[arg(
        long,
        value_enum,
        conflicts_with = "coeff_file",
        required_unless_present = "coeff_file"
    )]
    pub model: Option<ModelName>,
    /// Dominance weight of the trait model, in (0, 1/2).
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Comma-separated allele weights of the multi model, summing to 1/2.
    #[arg(long)]
    pub alphas: Option<String>,
    /// Measure-family CSV defining a non-Mendelian operator.
    #[arg(long)]
    pub coeff_file: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct StartArgs {
    /// `uniform`, `random`, `random:SEED`, or comma-separated coordinates.
    #[arg(long, default_value = "uniform")]
    pub start: String,
    /// Seed used by a bare `random` start.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    #[arg(long, default_value_t = 1_000_000)]
    pub max_iters: usize,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub start: StartArgs,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    /// Keep every STRIDE-th iterate; the start and the last point are always kept.
    #[arg(long, default_value_t = 1)]
    pub stride: usize,
}

#[derive(Debug, Clone, Args)]
pub struct FixpointArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub start: StartArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ValidateArgs {
    pub path: PathBuf,
    #[arg(long, default_value_t = ingest::TABLE_TOL)]
    pub tol: f64,
}

#[derive(Debug, Clone, Args)]
pub struct IngestArgs {
    pub counts: PathBuf,
    pub out: PathBuf,
    /// Pool daughters and sons of the same trait and split evenly.
    #[arg(long)]
    pub symmetrize: bool,
}

#[derive(Debug, Clone, Args)]
pub struct ExportArgs {
    #[arg(value_enum)]
    pub table: Table,
    /// Output path; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// What a command printed and how it ended.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub stdout: String,
    pub code: i32,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Self {
            stdout,
            code: EXIT_OK,
        }
    }
}

pub fn execute(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Fixpoint(args) => cmd_fixpoint(args),
        Command::Validate(args) => cmd_validate(args),
        Command::Ingest(args) => cmd_ingest(args),
        Command::Export(args) => cmd_export(args),
    }
}

/// Rounds to 12 significant digits; the shortest decimal of the result has
/// at most 12 digits.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x)
        .parse()
        .expect("formatted float parses")
}

fn num(x: f64) -> Value {
    // non-finite values have no JSON literal and become null
    serde_json::Number::from_f64(round_sig(x)).map_or(Value::Null, Value::Number)
}

fn vector(values: &[f64]) -> Value {
    Value::Array(values.iter().map(|&v| num(v)).collect())
}

fn data_dir() -> Option<PathBuf> {
    env::var_os(DATA_DIR_ENV).map(PathBuf::from)
}

fn parse_alphas(raw: &str) -> Result<Vec<f64>> {
    raw.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .with_context(|| format!("--alphas: '{s}' is not a number"))
        })
        .collect()
}

fn table_model(table: Table) -> Result<Model> {
    let Some(dir) = data_dir() else {
        return Ok(match table {
            Table::Rh => models::rh_model(),
            Table::Abo => models::abo_model(),
        });
    };
    let (file, renormalize) = match table {
        Table::Rh => ("rh.csv", false),
        Table::Abo => ("abo.csv", true),
    };
    let path = dir.join(file);
    let opts = LoadOptions {
        renormalize,
        ..LoadOptions::default()
    };
    let family = ingest::load_measure_family(&path, &opts)
        .with_context(|| format!("loading {}", path.display()))?;
    Ok(match table {
        Table::Rh => models::rh_model_from(&family)?,
        Table::Abo => models::abo_model_from(&family)?,
    })
}

pub fn build_model(args: &ModelArgs) -> Result<Model> {
    if let Some(path) = &args.coeff_file {
        let opts = LoadOptions {
            renormalize: true,
            ..LoadOptions::default()
        };
        let family = ingest::load_measure_family(path, &opts)
            .with_context(|| format!("loading {}", path.display()))?;
        let name = path
            .file_stem()
            .map_or_else(|| "file".into(), |s| s.to_string_lossy().into_owned());
        return Ok(models::from_measure_family(
            &name,
            &family,
            ModelSource::CoefficientFile,
        )?);
    }
    let Some(model) = args.model else {
        bail!("one of --model or --coeff-file is required");
    };
    match model {
        ModelName::Trait => {
            let alpha = args.alpha.context("--model trait needs --alpha")?;
            Ok(models::mendelian_trait(alpha)?)
        }
        ModelName::Multi => {
            let raw = args
                .alphas
                .as_deref()
                .context("--model multi needs --alphas")?;
            Ok(models::multi_allele(&parse_alphas(raw)?)?)
        }
        ModelName::Rh => table_model(Table::Rh),
        ModelName::Abo => table_model(Table::Abo),
    }
}

/// Seeded starts draw from xoshiro256++ seeded via SplitMix64, then map each
/// 64-bit output `u` to `E = −ln(1 − (u >> 11)·2⁻⁵³)` and normalize.
pub fn parse_start(spec: &str, seed: u64, n: usize) -> Result<ReducedDistribution> {
    let spec = spec.trim();
    let random = |seed: u64| {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
        ReducedDistribution::sample_uniform(n, &mut rng)
    };
    if spec == "uniform" {
        return Ok(ReducedDistribution::uniform(n));
    }
    if spec == "random" {
        return Ok(random(seed));
    }
    if let Some(s) = spec.strip_prefix("random:") {
        let seed = s
            .parse::<u64>()
            .with_context(|| format!("--start: bad seed '{s}'"))?;
        return Ok(random(seed));
    }
    let values = spec
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .with_context(|| format!("--start: '{s}' is not a number"))
        })
        .collect::<Result<Vec<_>>>()?;
    if values.len() != n {
        bail!(
            "--start has {} coordinates, the model has {n} types",
            values.len()
        );
    }
    Ok(ReducedDistribution::new(values)?)
}

pub fn cmd_run(args: &RunArgs) -> Result<Outcome> {
    let model = build_model(&args.model)?;
    let n = model.qso.n();
    let y0 = parse_start(&args.start.start, args.start.seed, n)?;
    let opts = IterateOptions {
        max_iters: args.start.max_iters,
        tol: args.start.tol,
        stride: args.stride,
    };
    let traj = iterate(&model.qso, &y0, &opts)?;
    let last = traj.points.len() - 1;
    // point i was recorded at iteration i·stride, except the final one
    let iter_of = |i: usize| {
        if i == last {
            traj.iterations
        } else {
            i * args.stride
        }
    };

    let stdout = match args.format {
        Format::Json => {
            let doc = json!({
                "points": traj.points.iter().map(|p| vector(p.values())).collect::<Vec<_>>(),
                "converged": traj.converged,
                "iterations": traj.iterations,
                "final_residual": num(traj.final_residual),
            });
            format!("{}\n", serde_json::to_string_pretty(&doc)?)
        }
        Format::Csv => {
            let mut out = String::from("iter");
            for k in 1..=n {
                out.push_str(&format!(",y{k}"));
            }
            out.push('\n');
            for (i, p) in traj.points.iter().enumerate() {
                out.push_str(&iter_of(i).to_string());
                for &v in p.values() {
                    out.push_str(&format!(",{}", round_sig(v)));
                }
                out.push('\n');
            }
            out
        }
    };
    Ok(Outcome {
        stdout,
        code: if traj.converged {
            EXIT_OK
        } else {
            EXIT_NOT_CONVERGED
        },
    })
}

fn fixpoint_json(model: &Model, report: &FixedPointReport, converged: bool) -> Result<Value> {
    let regularity = regularity_check(&model.qso);
    let mut doc = Map::new();
    doc.insert("model".into(), json!(model.descriptor.name));
    doc.insert("types".into(), json!(model.descriptor.type_labels));
    doc.insert("converged".into(), json!(converged));
    doc.insert("point".into(), vector(report.point.values()));
    doc.insert("residual".into(), num(report.residual));
    doc.insert("iterations".into(), json!(report.iterations));
    doc.insert(
        "spectral_radius".into(),
        num(report.jacobian_spectral_radius),
    );
    doc.insert(
        "classification".into(),
        json!(report.classification.as_str()),
    );
    doc.insert(
        "regularity".into(),
        json!({ "holds": regularity.holds, "margin": num(regularity.margin) }),
    );
    if let Some((a, b, c)) = quadratic_1d_coefficients(&model.qso) {
        let an = analyze_quadratic_1d(a, b, c)?;
        doc.insert("delta".into(), num(an.delta));
        doc.insert(
            "quadratic_1d".into(),
            json!({
                "a": num(a),
                "b": num(b),
                "c": num(c),
                "delta": num(an.delta),
                "fixed_points": vector(&an.fixed_points),
                "regime": an.regime.to_string(),
            }),
        );
    }
    Ok(Value::Object(doc))
}

pub fn cmd_fixpoint(args: &FixpointArgs) -> Result<Outcome> {
    let model = build_model(&args.model)?;
    let y0 = parse_start(&args.start.start, args.start.seed, model.qso.n())?;
    let opts = FixedPointOptions {
        tol: args.start.tol,
        max_iters: args.start.max_iters,
    };
    let (report, code) = match find_fixed_point(&model.qso, &y0, &opts) {
        Ok(report) => (report, EXIT_OK),
        Err(DynamicsError::NoConvergence { report }) => (*report, EXIT_NOT_CONVERGED),
        Err(e) => return Err(e.into()),
    };
    let doc = fixpoint_json(&model, &report, code == EXIT_OK)?;
    Ok(Outcome {
        stdout: format!("{}\n", serde_json::to_string_pretty(&doc)?),
        code,
    })
}

pub fn cmd_validate(args: &ValidateArgs) -> Result<Outcome> {
    let table = MeasureTable::load(&args.path)?;
    let report = validate_pq(&table.to_tensor(), args.tol);
    let code = if report.is_empty() {
        EXIT_OK
    } else {
        EXIT_NOT_CONVERGED
    };
    Ok(Outcome {
        stdout: format!("{}: {report}\n", args.path.display()),
        code,
    })
}

pub fn cmd_ingest(args: &IngestArgs) -> Result<Outcome> {
    let counts = CountsTable::load(&args.counts)?;
    let family = ingest::estimate_measures(counts.space(), &counts, args.symmetrize)?;
    ingest::save_measure_family(&family, &args.out)?;
    Ok(Outcome::ok(format!(
        "wrote {} parent pairs to {}\n",
        family.measures().len(),
        args.out.display()
    )))
}

fn embedded_table(table: Table) -> Result<String> {
    let file = match table {
        Table::Rh => "rh.csv",
        Table::Abo => "abo.csv",
    };
    match data_dir() {
        Some(dir) => read(&dir.join(file)),
        None => Ok(match table {
            Table::Rh => models::RH_TABLE,
            Table::Abo => models::ABO_TABLE,
        }
        .to_string()),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

/// Re-serializes the table as tabulated, without renormalization.
pub fn cmd_export(args: &ExportArgs) -> Result<Outcome> {
    let text = embedded_table(args.table)?;
    let family = ingest::parse_measure_family(&text, &LoadOptions::default())?;
    let csv = ingest::format_measure_family(&family)?;
    match &args.out {
        Some(path) => {
            fs::write(path, csv).with_context(|| format!("writing {}", path.display()))?;
            Ok(Outcome::ok(format!("wrote {}\n", path.display())))
        }
        None => Ok(Outcome::ok(csv)),
    }
}
