//! `satrisk` command-line interface.
//!
//! Numeric options can also come from a JSON file given with `--config`;
//! flags on the command line win. Exit codes: 0 success, 1 domain
//! violation, 2 input error, 3 resource cap.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::evaluate::{
    analytic_distribution, sobel, var_function, GridSpec, Pipeline, DEFAULT_GRID_POINTS,
    DEFAULT_POLICY_CAP,
};
use crate::export::{self, ArtifactWriter, RunManifest, TabulatedCdf};
use crate::inventory::{paper_pipeline, PaperConfig};
use crate::mdp::{induce_mrp, io, validate, Mdp, Model, Mrp, Policy};
use crate::simulate::{empirical_distribution, ks_distance, SimConfig};
use crate::transform::{io::sat_to_json, sat_case0, sat_case1, sat_case2, sat_case3};

#[derive(Debug, Parser)]
#[command(name = "satrisk", version, about = "State-augmentation transforms and risk-sensitive evaluation for finite MDPs")]
pub struct Cli {
    /// JSON file with default option values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Output directory.
    #[arg(long, short, global = true, env = "SATRISK_OUT")]
    pub out: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a model file and report every violation.
    Validate { model: PathBuf },
    /// Apply a state-augmentation transform.
    Transform(TransformArgs),
    /// Exact mean/variance and the analytic return CDF.
    Evaluate(EvaluateArgs),
    /// Monte Carlo empirical return CDF.
    Simulate(SimulateArgs),
    /// VaR function over all deterministic policies.
    Var(VarArgs),
    /// KS distance between two CDF CSV files.
    Compare { a: PathBuf, b: PathBuf },
    /// Reproduce the inventory example end to end.
    Paper {
        /// Output directory (overrides --out).
        outdir: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Debug, Args)]
pub struct TransformArgs {
    pub model: PathBuf,
    #[arg(long)]
    pub case: Option<u8>,
    /// Policy JSON; required for case 2.
    #[arg(long)]
    pub policy: Option<PathBuf>,
    /// Keep situation rewards undivided by γ (cases 2 and 3).
    #[arg(long)]
    pub no_compensate: bool,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    pub model: PathBuf,
    /// Policy JSON; required for MDPs.
    #[arg(long)]
    pub policy: Option<PathBuf>,
    #[arg(long)]
    pub pipeline: Option<Pipeline>,
    #[arg(long)]
    pub grid_points: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    pub model: PathBuf,
    #[arg(long)]
    pub policy: Option<PathBuf>,
    #[arg(long)]
    pub horizon: Option<usize>,
    #[arg(long)]
    pub batches: Option<usize>,
    #[arg(long)]
    pub per_batch: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct VarArgs {
    pub model: PathBuf,
    /// `N` points spanning the policies' supports, or `lo:hi:N`.
    #[arg(long)]
    pub grid: Option<String>,
    #[arg(long)]
    pub pipeline: Option<Pipeline>,
    #[arg(long)]
    pub policy_cap: Option<u128>,
}

/// Values a `--config` file may set.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub case: Option<u8>,
    pub compensate: Option<bool>,
    pub pipeline: Option<Pipeline>,
    pub grid: Option<String>,
    pub grid_points: Option<usize>,
    pub horizon: Option<usize>,
    pub batches: Option<usize>,
    pub per_batch: Option<usize>,
    pub seed: Option<u64>,
    pub policy_cap: Option<u128>,
    pub paper: Option<PaperConfig>,
}

impl FileConfig {
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
    }
}

impl clap::ValueEnum for Pipeline {
    fn value_variants<'a>() -> &'a [Self] {
        &[Pipeline::Transform, Pipeline::Simplify]
    }

    fn to_possible_value(&self) -> Option<clap::builder::PossibleValue> {
        Some(clap::builder::PossibleValue::new(match self {
            Pipeline::Transform => "transform",
            Pipeline::Simplify => "simplify",
        }))
    }
}

pub fn exit_code(err: &Error) -> u8 {
    match err {
        Error::CapExceeded { .. } => 3,
        Error::Parse(_) | Error::Io(_) | Error::Json(_) | Error::Csv(_) | Error::Config(_) => 2,
        _ => 1,
    }
}

/// Entry point used by the binary.
pub fn main_with_args(args: impl IntoIterator<Item = std::ffi::OsString>) -> ExitCode {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn out_dir(cli_out: &Option<PathBuf>) -> PathBuf {
    cli_out.clone().unwrap_or_else(|| PathBuf::from("."))
}

fn read_policy(path: &Path) -> Result<Policy> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum PolicyFile {
        Tagged(Policy),
        Plain(Vec<usize>),
    }
    let text = std::fs::read_to_string(path)?;
    match serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))? {
        PolicyFile::Tagged(p) => Ok(p),
        PolicyFile::Plain(a) => Ok(Policy::Deterministic(a)),
    }
}

/// Loads and validates a model. Violations are printed and become `None`.
fn load_valid(path: &Path) -> Result<Option<Model>> {
    let model = io::read_model(path)?;
    let violations = validate(&model);
    if violations.is_empty() {
        return Ok(Some(model));
    }
    for v in &violations {
        eprintln!("{}: {v}", path.display());
    }
    Ok(None)
}

fn require_mdp(model: Model) -> Result<Mdp> {
    match model {
        Model::Mdp(m) => Ok(m),
        Model::Mrp(_) => Err(Error::Config("this command needs an MDP".into())),
    }
}

/// The MRP to evaluate or simulate: the model itself, or the MDP under a policy.
fn target_mrp(model: Model, policy: Option<&Path>) -> Result<(Mrp, Option<(Mdp, Policy)>)> {
    match (model, policy) {
        (Model::Mrp(m), None) => Ok((m, None)),
        (Model::Mrp(_), Some(_)) => Err(Error::Config("a policy only applies to MDPs".into())),
        (Model::Mdp(_), None) => Err(Error::Config("an MDP needs --policy".into())),
        (Model::Mdp(m), Some(p)) => {
            let policy = read_policy(p)?;
            Ok((induce_mrp(&m, &policy)?, Some((m, policy))))
        }
    }
}

fn parse_grid(spec: &str) -> Result<GridSpec> {
    let bad = || Error::Config(format!("grid {spec:?} is neither N nor lo:hi:N"));
    let parts: Vec<&str> = spec.split(':').collect();
    match parts.as_slice() {
        [n] => Ok(GridSpec::Auto(n.parse().map_err(|_| bad())?)),
        [lo, hi, n] => {
            let (lo, hi): (f64, f64) = (lo.parse().map_err(|_| bad())?, hi.parse().map_err(|_| bad())?);
            let n: usize = n.parse().map_err(|_| bad())?;
            if !(hi > lo) || n < 2 {
                return Err(bad());
            }
            Ok(GridSpec::Explicit(crate::evaluate::linspace(lo, hi, n)))
        }
        _ => Err(bad()),
    }
}

fn inputs(paths: &[&Path]) -> Vec<String> {
    paths.iter().map(|p| p.display().to_string()).collect()
}

pub fn run(cli: Cli) -> Result<u8> {
    let file = match &cli.config {
        Some(p) => FileConfig::read(p)?,
        None => FileConfig::default(),
    };
    let out = out_dir(&cli.out);
    match cli.command {
        Command::Validate { model } => {
            let m = io::read_model(&model)?;
            let violations = validate(&m);
            for v in &violations {
                println!("{v}");
            }
            if violations.is_empty() {
                println!("ok");
                Ok(0)
            } else {
                Ok(1)
            }
        }
        Command::Transform(a) => {
            let Some(model) = load_valid(&a.model)? else { return Ok(1) };
            let case = a.case.or(file.case).ok_or_else(|| Error::Config("--case is required".into()))?;
            let compensate = if a.no_compensate { false } else { file.compensate.unwrap_or(true) };
            let result = match case {
                0 | 1 => {
                    let Model::Mrp(m) = model else {
                        return Err(Error::Config(format!("case {case} needs an MRP")));
                    };
                    if case == 0 { sat_case0(&m)? } else { sat_case1(&m)? }
                }
                2 => {
                    let p = a.policy.as_deref().ok_or_else(|| Error::Config("case 2 needs --policy".into()))?;
                    sat_case2(&require_mdp(model)?, &read_policy(p)?, compensate)?
                }
                3 => sat_case3(&require_mdp(model)?, compensate)?,
                other => return Err(Error::Config(format!("unknown case {other}"))),
            };
            let mut paths = vec![a.model.as_path()];
            paths.extend(a.policy.as_deref());
            let manifest = RunManifest::new(
                "transform",
                inputs(&paths),
                None,
                json!({ "case": case, "compensate": compensate }),
            );
            let mut w = ArtifactWriter::create(&out, manifest)?;
            w.text("transformed.json", "json", &sat_to_json(&result))?;
            w.finish()?;
            println!("case {case}: {} states -> {}", result.state_map.len(), out.join("transformed.json").display());
            Ok(0)
        }
        Command::Evaluate(a) => {
            let Some(model) = load_valid(&a.model)? else { return Ok(1) };
            let pipeline = a.pipeline.or(file.pipeline).unwrap_or(Pipeline::Transform);
            let points = a.grid_points.or(file.grid_points).unwrap_or(DEFAULT_GRID_POINTS);
            let mrp = match (&model, a.policy.as_deref()) {
                (Model::Mdp(m), Some(p)) => crate::evaluate::policy_mrp(m, &read_policy(p)?, pipeline)?,
                _ => crate::evaluate::evaluable_mrp(&target_mrp(model, a.policy.as_deref())?.0, pipeline)?,
            };
            let s = sobel(&mrp)?;
            let dist = analytic_distribution(&mrp)?;
            let (lo, hi) = dist.span(5.0);
            let grid = if hi > lo {
                crate::evaluate::linspace(lo, hi, points.max(2))
            } else {
                vec![lo - 1.0, lo, lo + 1.0]
            };
            let mut paths = vec![a.model.as_path()];
            paths.extend(a.policy.as_deref());
            let manifest = RunManifest::new(
                "evaluate",
                inputs(&paths),
                None,
                json!({ "pipeline": pipeline, "grid_points": points }),
            );
            let mut w = ArtifactWriter::create(&out, manifest)?;
            let mean = s.mean(mrp.initial());
            let variance = s.variance(mrp.initial());
            w.json("evaluation.json", &json!({ "mean": mean, "variance": variance, "sobel": s, "distribution": dist }))?;
            w.text("cdf.csv", "cdf", &export::cdf_csv(&dist, &grid)?)?;
            w.finish()?;
            println!("mean {mean}\nvariance {variance}");
            Ok(0)
        }
        Command::Simulate(a) => {
            let Some(model) = load_valid(&a.model)? else { return Ok(1) };
            let d = SimConfig::default();
            let cfg = SimConfig {
                horizon: a.horizon.or(file.horizon).unwrap_or(d.horizon),
                batches: a.batches.or(file.batches).unwrap_or(d.batches),
                trajectories_per_batch: a.per_batch.or(file.per_batch).unwrap_or(d.trajectories_per_batch),
                seed: a.seed.or(file.seed).unwrap_or(d.seed),
            };
            let (mrp, _) = target_mrp(model, a.policy.as_deref())?;
            let e = empirical_distribution(&mrp, &cfg)?;
            let mut paths = vec![a.model.as_path()];
            paths.extend(a.policy.as_deref());
            let manifest = RunManifest::new("simulate", inputs(&paths), Some(cfg.seed), serde_json::to_value(cfg)?);
            let mut w = ArtifactWriter::create(&out, manifest)?;
            w.text("cdf_empirical.csv", "empirical_cdf", &export::empirical_csv(&e)?)?;
            let pooled = e.pooled();
            w.json(
                "simulation.json",
                &json!({ "mean": pooled.mean(), "variance": pooled.variance(), "truncation_bound": e.truncation_bound }),
            )?;
            w.finish()?;
            println!("mean {}\ntruncation bound {}", pooled.mean(), e.truncation_bound);
            Ok(0)
        }
        Command::Var(a) => {
            let Some(model) = load_valid(&a.model)? else { return Ok(1) };
            let mdp = require_mdp(model)?;
            let pipeline = a.pipeline.or(file.pipeline).unwrap_or(Pipeline::Transform);
            let grid = match a.grid.or(file.grid) {
                Some(g) => parse_grid(&g)?,
                None => GridSpec::Auto(file.grid_points.unwrap_or(DEFAULT_GRID_POINTS)),
            };
            let cap = a.policy_cap.or(file.policy_cap).unwrap_or(DEFAULT_POLICY_CAP);
            let vf = var_function(&mdp, &grid, pipeline, cap)?;
            let manifest = RunManifest::new(
                "var",
                inputs(&[a.model.as_path()]),
                None,
                json!({ "pipeline": pipeline, "grid": vf.grid.len(), "grid_lo": vf.grid[0], "grid_hi": vf.grid[vf.grid.len() - 1], "policy_cap": cap.to_string() }),
            );
            let mut w = ArtifactWriter::create(&out, manifest)?;
            w.text("var_function.csv", "var_function", &export::var_function_csv(&vf, Some(&mdp))?)?;
            w.finish()?;
            println!("{} policies, {} grid points", vf.policies.len(), vf.grid.len());
            Ok(0)
        }
        Command::Compare { a, b } => {
            let fa = TabulatedCdf::from_csv(&a)?;
            let fb = TabulatedCdf::from_csv(&b)?;
            println!("{}", ks_distance(&fa, &fb)?);
            Ok(0)
        }
        Command::Paper { outdir, seed } => {
            let mut cfg = file.paper.unwrap_or_default();
            if let Some(s) = seed.or(file.seed) {
                cfg.sim.seed = s;
            }
            let dir = outdir.unwrap_or(out);
            let report = paper_pipeline(&dir, &cfg)?;
            let s = &report.summary;
            println!("KS(simplified, empirical)   {:.4}", s.ks_simplified_empirical);
            println!("KS(transformed, empirical)  {:.4}", s.ks_transformed_empirical);
            println!("KS(VaR functions)           {:.4}", s.ks_var_functions);
            println!("artifacts in {}", dir.display());
            Ok(0)
        }
    }
}
