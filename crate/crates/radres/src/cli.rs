//! `radres` subcommands: exponents, trace, estimate, martingale, soup,
//! kernels and chordal-limit.
//!
//! Exit codes: 0 on success, 2 on invalid input, 3 on numerical failure
//! (with a JSON diagnostic on stderr).

use std::ffi::OsString;
use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use radres_core::conformal::{extract_kernels, kernels};
use radres_core::loewner::extract_trace;
use radres_core::loopsoup::{Features, SoupConfig, SoupSampler};
use radres_core::restriction::{beta_of_rho, exponents_of_rho, residual_report, rho_of_beta, xi, RestrictionLaw};
use radres_core::sampler::{chordal_limit_experiment, sample_restriction, target, EstimateReport, FlowConfig, McConfig, SampleConfig, TestHull};
use radres_core::sle::{chordal_sle_driver, perfect_driver, radial_sle_driver, ForcePoint, SleParams};
use radres_core::Domain;
use serde_json::json;

use crate::error::{CliError, Result};
use crate::formats::{to_json, write_trace_csv, LawJson, LoopJson, MartingaleJson, RegionJson, ReportJson};
use crate::hulls::{parse_angle, parse_hull};
use crate::parallel::{par_estimate, par_geometric, par_martingale, pool};

#[derive(Parser, Debug)]
#[command(name = "radres", version, about = "Radial conformal restriction measures: samples, estimates and checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// ξ(β), ρ(β) and the exponents of the two-sided construction.
    Exponents(ExponentsArgs),
    /// Sample a curve (perfect, SLE, SLE(ρ)) or a restriction sample K.
    Trace(TraceArgs),
    /// Monte Carlo avoidance probabilities against the closed form.
    Estimate(EstimateArgs),
    /// Flatness of the avoidance martingale of SLE_{8/3}(ρ).
    Martingale(MartingaleArgs),
    /// One realisation of the loop soup of loops surrounding 0.
    Soup(SoupArgs),
    /// Kernel values, and with `--check` the residual report.
    Kernels(KernelArgs),
    /// Radial samples pushed towards the chordal limit.
    ChordalLimit(ChordalArgs),
}

#[derive(Args, Debug, Clone)]
pub struct LawArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    /// Use the maximal law P(ξ(β(ρ)), β(ρ)).
    #[arg(long, conflicts_with_all = ["alpha", "beta"])]
    pub rho: Option<f64>,
    /// Accept laws with α > ξ(β); only analytic values are produced.
    #[arg(long)]
    pub allow_inadmissible: bool,
}

impl LawArgs {
    /// The law and whether it can be sampled.
    fn law(&self) -> Result<(RestrictionLaw, bool)> {
        let law = match (self.rho, self.beta) {
            (Some(rho), _) => RestrictionLaw::maximal(beta_of_rho(rho))?,
            (None, Some(beta)) => law_of(self.alpha, beta)?,
            (None, None) => return Err(CliError::usage("give --beta (with optional --alpha) or --rho")),
        };
        if law.is_admissible() {
            return Ok((law, true));
        }
        if self.allow_inadmissible {
            return Ok((law, false));
        }
        Err(CliError::usage(format!(
            "law (α={}, β={}) is not admissible: need β ≥ 5/8 and α ≤ ξ(β); pass --allow-inadmissible for analytic values only",
            law.alpha, law.beta
        )))
    }
}

/// Values of α printed to a few digits may land just above ξ(β); those are
/// read as ξ(β) itself.
const ALPHA_SNAP: f64 = 1e-6;

fn law_of(alpha: Option<f64>, beta: f64) -> Result<RestrictionLaw> {
    let max = RestrictionLaw::maximal(beta);
    Ok(match (alpha, max) {
        (None, m) => m?,
        (Some(a), Ok(m)) if (a - m.alpha).abs() <= ALPHA_SNAP => m,
        (Some(a), _) => RestrictionLaw::new(a, beta),
    })
}

#[derive(Args, Debug, Clone)]
pub struct RunArgs {
    /// Base step: 1e-4 for the flow engine, 5e-5 for the geometric one.
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Parallel workers; results do not depend on this.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl RunArgs {
    fn pool(&self) -> Result<rayon::ThreadPool> {
        let n = self.workers.unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1));
        if n == 0 {
            return Err(CliError::usage("--workers must be positive"));
        }
        pool(n)
    }

    /// `--dt`, or `default` when absent.
    fn dt(&self, default: f64) -> Result<f64> {
        match self.dt {
            Some(dt) if !(dt > 0.0) => Err(CliError::usage("--dt must be positive")),
            Some(dt) => Ok(dt),
            None => Ok(default),
        }
    }
}

#[derive(Args, Debug)]
pub struct ExponentsArgs {
    #[arg(long, conflicts_with = "rho", allow_hyphen_values = true)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub rho: Option<f64>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
pub enum Curve {
    /// Radial SLE_κ(ρ) from 1 to 0.
    Radial,
    /// Chordal SLE_κ(ρ) from 0 to ∞.
    Chordal,
    /// The perfect radial curve with driver θ − t·cot(θ/2).
    Perfect,
    /// A restriction sample K: writes `<out>.right.csv`, `<out>.left.csv`, `<out>.region.json`.
    Sample,
}

#[derive(Args, Debug)]
pub struct TraceArgs {
    #[arg(long, value_enum, default_value_t = Curve::Radial)]
    pub curve: Curve,
    #[arg(long, default_value_t = 8.0 / 3.0)]
    pub kappa: f64,
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    pub rho: f64,
    /// `none`, `left` (1⁻ or 0⁻), `right` (1⁺ or 0⁺) or a position.
    #[arg(long, default_value = "none")]
    pub force: String,
    /// Angle of the perfect curve.
    #[arg(long, default_value = "pi")]
    pub theta: String,
    #[arg(long, default_value_t = 1.0)]
    pub horizon: f64,
    /// Law of a `sample` curve; without it the sample is P(ξ(β(ρ)), β(ρ)).
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub index: u64,
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Pull each tip this far into the domain; default dt^0.75.
    #[arg(long)]
    pub tip_offset: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
pub enum Engine {
    /// Hull images under the Loewner flow, with an exact stopping rule.
    Flow,
    /// Explicit samples of K and geometric hit tests.
    Geometric,
}

#[derive(Args, Debug)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub law: LawArgs,
    /// `perfect:<theta>,<t>`, `halfdisc:<x>,<eps>` or `polyline:<file>`; repeatable.
    #[arg(long = "hull", required = true)]
    pub hulls: Vec<String>,
    #[arg(long, default_value_t = 10_000)]
    pub n: u64,
    #[arg(long, value_enum, default_value_t = Engine::Flow)]
    pub engine: Engine,
    /// Capacity horizon of the curves.
    #[arg(long, default_value_t = 8.0)]
    pub t_max: f64,
    /// Shortest loop duration of the soup.
    #[arg(long, default_value_t = 1e-3)]
    pub t_min: f64,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Args, Debug)]
pub struct MartingaleArgs {
    #[arg(long)]
    pub rho: f64,
    #[arg(long, default_value = "perfect:pi,0.15")]
    pub hull: String,
    #[arg(long, default_value_t = 0.5)]
    pub t_end: f64,
    #[arg(long, default_value_t = 5)]
    pub checkpoints: usize,
    #[arg(long, default_value_t = 2000)]
    pub n: u64,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Args, Debug)]
pub struct SoupArgs {
    #[arg(long, default_value_t = 1.0)]
    pub intensity: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub t_min: f64,
    #[arg(long, default_value_t = 10.0)]
    pub t_max: f64,
    /// Points per loop.
    #[arg(long, default_value_t = 256)]
    pub resolution: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0)]
    pub index: u64,
    /// Hulls to hit-test every loop against; repeatable.
    #[arg(long = "hull")]
    pub hulls: Vec<String>,
    /// Include loop polylines in the output.
    #[arg(long)]
    pub points: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct KernelArgs {
    #[arg(long, default_value = "1", allow_hyphen_values = true)]
    pub x: String,
    #[arg(long, default_value = "2", allow_hyphen_values = true)]
    pub y: String,
    /// Residual sweep; exits 3 when a residual misses its bound.
    #[arg(long)]
    pub check: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ChordalArgs {
    #[command(flatten)]
    pub law: LawArgs,
    /// Centre of the half-disc hull B(x, r) ∩ H.
    #[arg(long, default_value_t = 2.0, allow_hyphen_values = true)]
    pub x: f64,
    #[arg(long, default_value_t = 0.5)]
    pub r: f64,
    #[arg(long, value_delimiter = ',', default_values_t = [0.5, 0.25, 0.1])]
    pub eps: Vec<f64>,
    /// Monte Carlo paths per ε; 0 gives the analytic ladder only.
    #[arg(long, default_value_t = 5000)]
    pub n: u64,
    #[command(flatten)]
    pub run: RunArgs,
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, format!("{text}\n")).map_err(|e| CliError::io(p.display().to_string(), e)),
        None => match writeln!(std::io::stdout().lock(), "{text}") {
            Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(CliError::io("<stdout>", e)),
            _ => Ok(()),
        },
    }
}

fn create(path: &Path) -> Result<File> {
    File::create(path).map_err(|e| CliError::io(path.display().to_string(), e))
}

fn force_point(s: &str) -> Result<ForcePoint> {
    Ok(match s {
        "none" => ForcePoint::None,
        "left" => ForcePoint::Left,
        "right" => ForcePoint::Right,
        v => ForcePoint::At(parse_angle(v)?),
    })
}

fn exponents(a: &ExponentsArgs) -> Result<()> {
    let (beta, rho) = match (a.beta, a.rho) {
        (Some(b), None) => (b, rho_of_beta(b)?),
        (None, Some(r)) => (beta_of_rho(r), r),
        _ => return Err(CliError::usage("give exactly one of --beta and --rho")),
    };
    let mut v = json!({ "beta": beta, "rho": rho, "xi": xi(beta)? });
    if rho >= 0.0 {
        let (alpha, gamma, _) = exponents_of_rho(rho)?;
        v["alpha"] = json!(alpha);
        v["gamma"] = json!(gamma);
    }
    emit(&None, &to_json(&v))
}

fn trace(a: &TraceArgs) -> Result<()> {
    if !(a.dt > 0.0 && a.horizon > 0.0) {
        return Err(CliError::usage("--dt and --horizon must be positive"));
    }
    if a.curve == Curve::Sample {
        return trace_sample(a);
    }
    let params = SleParams { kappa: a.kappa, rho: a.rho, force: force_point(&a.force)?, horizon: a.horizon, dt: a.dt, seed: a.seed };
    let (driver, domain) = match a.curve {
        Curve::Radial => (radial_sle_driver(&params, a.index)?.w, Domain::Disc),
        Curve::Chordal => (chordal_sle_driver(&params, a.index)?.w, Domain::HalfPlane),
        _ => (perfect_driver(parse_angle(&a.theta)?, a.horizon, a.dt)?, Domain::Disc),
    };
    let tr = extract_trace(&driver, domain, a.tip_offset.unwrap_or(a.dt.powf(0.75)))?;
    match &a.out {
        Some(p) => write_trace_csv(create(p)?, &tr.times, &tr.points),
        None => match write_trace_csv(std::io::stdout().lock(), &tr.times, &tr.points) {
            Err(CliError::Io { source, .. }) if source.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
            Err(CliError::Csv { source, .. }) if matches!(source.kind(), csv::ErrorKind::Io(e) if e.kind() == std::io::ErrorKind::BrokenPipe) => {
                Ok(())
            }
            r => r,
        },
    }
}

fn trace_sample(a: &TraceArgs) -> Result<()> {
    let law = match a.beta {
        Some(beta) => law_of(a.alpha, beta)?,
        None if a.alpha.is_some() => return Err(CliError::usage("--alpha needs --beta")),
        None => RestrictionLaw::maximal(beta_of_rho(a.rho))?,
    };
    if !law.is_admissible() {
        return Err(CliError::usage("inadmissible laws have no samples"));
    }
    let prefix = a.out.as_ref().ok_or_else(|| CliError::usage("a sample needs --out <prefix>"))?;
    let cfg = SampleConfig { dt: a.dt, ..Default::default() };
    let k = sample_restriction(law, &cfg, a.seed, a.index)?;
    let with = |ext: &str| PathBuf::from(format!("{}.{ext}", prefix.display()));
    write_trace_csv(create(&with("right.csv"))?, &k.right.times, &k.right.points)?;
    write_trace_csv(create(&with("left.csv"))?, &k.left.times, &k.left.points)?;
    let path = with("region.json");
    create(&path)?.write_all(to_json(&RegionJson::from(&k)).as_bytes()).map_err(|e| CliError::io(path.display().to_string(), e))
}

fn analytic_only(law: RestrictionLaw, h: &TestHull, dt: f64, seed: u64) -> ReportJson {
    ReportJson {
        law: LawJson { alpha: law.alpha, beta: law.beta },
        hull: h.name.clone(),
        n: 0,
        p_hat: None,
        se: None,
        target: target(law, &h.derivatives),
        z: None,
        dt,
        seed,
        wall_ms: None,
    }
}

fn mc_config(dt: f64, t_max: f64, t_min: f64) -> Result<McConfig> {
    let mut cfg = McConfig::default();
    cfg.flow = FlowConfig { dt, t_max, ..cfg.flow };
    cfg.soup.t_min = t_min;
    cfg.flow.validate()?;
    cfg.soup.validate()?;
    Ok(cfg)
}

fn estimate(a: &EstimateArgs) -> Result<()> {
    let dt = a.run.dt(match a.engine {
        Engine::Flow => FlowConfig::default().dt,
        Engine::Geometric => SampleConfig::default().dt,
    })?;
    let (law, ok) = a.law.law()?;
    let hulls = a.hulls.iter().map(|d| parse_hull(d)).collect::<Result<Vec<_>>>()?;
    let reports: Vec<ReportJson> = if !ok {
        hulls.iter().map(|h| analytic_only(law, h, dt, a.run.seed)).collect()
    } else {
        let pool = a.run.pool()?;
        let out: Vec<EstimateReport> = match a.engine {
            Engine::Flow => par_estimate(&pool, law, &hulls, a.n, &mc_config(dt, a.t_max, a.t_min)?, a.run.seed)?,
            Engine::Geometric => {
                let mut cfg = SampleConfig { dt, t_max: a.t_max, ..Default::default() };
                cfg.soup.t_min = a.t_min;
                cfg.validate()?;
                par_geometric(&pool, law, &hulls, a.n, &cfg, a.run.seed)?
            }
        };
        out.iter().map(ReportJson::from).collect()
    };
    emit(&a.run.out, &to_json(&reports))
}

fn martingale(a: &MartingaleArgs) -> Result<()> {
    let dt = a.run.dt(FlowConfig::default().dt)?;
    if a.checkpoints == 0 || a.n < 2 || !(a.t_end > 0.0) {
        return Err(CliError::usage("need --checkpoints ≥ 1, --n ≥ 2 and --t-end > 0"));
    }
    let hull = parse_hull(&a.hull)?;
    let cfg = FlowConfig { dt, ..Default::default() };
    let r = par_martingale(&a.run.pool()?, a.rho, &hull, cfg, a.t_end, a.checkpoints, a.n, a.run.seed)?;
    emit(&a.run.out, &to_json(&MartingaleJson::new(&r, &hull.name, a.n, dt, a.run.seed)))
}

fn soup(a: &SoupArgs) -> Result<()> {
    let cfg = SoupConfig { intensity: a.intensity, t_min: a.t_min, t_max: a.t_max, resolution: a.resolution, seed: a.seed };
    let hulls = a.hulls.iter().map(|d| parse_hull(d)).collect::<Result<Vec<_>>>()?;
    let polylines: Vec<_> = hulls.iter().flat_map(|h| h.components.iter().map(|c| c.points.clone())).collect();
    let sampler = SoupSampler::new(cfg)?;
    let loops = sampler.sample(a.index, &Features::new(&polylines));
    let v = json!({
        "intensity": a.intensity,
        "t_min": a.t_min,
        "t_max": a.t_max,
        "seed": a.seed,
        "index": a.index,
        "expected_proposals": cfg.expected_proposals(),
        "count": loops.len(),
        "hulls": hulls.iter().map(|h| h.name.clone()).collect::<Vec<_>>(),
        "loops": loops.iter().map(|l| LoopJson::new(l, a.points)).collect::<Vec<_>>(),
    });
    emit(&a.out, &to_json(&v))
}

fn kernel_values(a: &KernelArgs) -> Result<()> {
    let (x, y) = (parse_angle(&a.x)?, parse_angle(&a.y)?);
    let (f, g) = kernels(x, y)?;
    let (fe, ge) = extract_kernels(x, y, 0.05, 4)?;
    let mut v = json!({ "x": x, "y": y, "F": f, "G": g, "F_extracted": fe, "G_extracted": ge });
    if !a.check {
        return emit(&a.out, &to_json(&v));
    }
    let laws = [RestrictionLaw::new(5.0 / 48.0, 0.625), RestrictionLaw::new(2.0 / 3.0, 2.0), RestrictionLaw::new(-0.5, 1.0)];
    let grid = [-3.0, -1.5, -0.7, -0.3, 0.3, 0.7, 1.5, 3.0];
    let r = residual_report(&laws, &grid)?;
    let pass = r.commutation < 1e-9 && r.lambda_ode < 1e-9 && r.lambda_nu < 1e-12 && r.control_linear > 1e-3 && r.control_cubic > 1e-3;
    v["residuals"] = json!({
        "commutation": r.commutation,
        "lambda_ode": r.lambda_ode,
        "lambda_nu": r.lambda_nu,
        "control_linear": r.control_linear,
        "control_cubic": r.control_cubic,
        "pass": pass,
    });
    emit(&a.out, &to_json(&v))?;
    if pass {
        Ok(())
    } else {
        Err(CliError::Core(radres_core::Error::Numerical("kernel residuals out of bounds".into())))
    }
}

fn chordal_limit(a: &ChordalArgs) -> Result<()> {
    let dt = a.run.dt(FlowConfig::default().dt)?;
    let (law, ok) = a.law.law()?;
    let n = if ok { a.n } else { 0 };
    let cfg = mc_config(dt, FlowConfig::default().t_max, 1e-3)?;
    let pool = a.run.pool()?;
    // The experiment is sequential in ε; the Monte Carlo part fans out per ε.
    let mut r = chordal_limit_experiment(law, a.x, a.r, &a.eps, 0, &cfg, a.run.seed)?;
    if n > 0 {
        for &e in &a.eps {
            let h = radres_core::sampler::chordal_limit_hull(a.x, a.r, e)?;
            r.mc.extend(par_estimate(&pool, law, std::slice::from_ref(&h), n, &cfg, a.run.seed)?);
        }
    }
    let v = json!({
        "law": LawJson { alpha: law.alpha, beta: law.beta },
        "x": a.x,
        "r": a.r,
        "eps": r.eps,
        "analytic": r.analytic,
        "limit": r.limit,
        "monotone": r.monotone,
        "mc": r.mc.iter().map(ReportJson::from).collect::<Vec<_>>(),
    });
    emit(&a.run.out, &to_json(&v))
}

pub fn execute(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Exponents(a) => exponents(a),
        Command::Trace(a) => trace(a),
        Command::Estimate(a) => estimate(a),
        Command::Martingale(a) => martingale(a),
        Command::Soup(a) => soup(a),
        Command::Kernels(a) => kernel_values(a),
        Command::ChordalLimit(a) => chordal_limit(a),
    }
}

/// Parses `argv`, runs the subcommand and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", to_json(&e.diagnostic()));
            e.exit_code()
        }
    }
}
