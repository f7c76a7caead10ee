//! Dispatch of experiment commands to the library and artifact writing.

use std::fs;
use std::path::{Path, PathBuf};

use cflab::cfspace::{
    correlation_profile, decay_curve, freeness_witness, CompactOpen, MeasureValue, SpaceError,
};
use cflab::groups::{FiniteSubset, GroupDescriptor, GroupElement};
use cflab::io::{compact_open_from_value, element_from_value, scheme_from_value, scheme_to_string, LoadedScheme};
use cflab::scheme::{
    build_scheme, check_base, check_folner, check_mixing, check_square, check_triangle, classify, BuildParams,
    CFScheme, ConditionReport, FolnerSchedule,
};
use cflab::suspension::{
    coarsen_check, entropy_bound_curve, exact_covariance, mc_covariance, sample, SuspensionError, Thresholds,
};
use clap::ValueEnum;
use num_traits::ToPrimitive;
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::config::{eps_of, group_of, ConfigError, ExperimentConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Build,
    Check,
    Mixing,
    Entropy,
    Sample,
    Covariance,
    Freeness,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Build => "build",
            Command::Check => "check",
            Command::Mixing => "mixing",
            Command::Entropy => "entropy",
            Command::Sample => "sample",
            Command::Covariance => "covariance",
            Command::Freeness => "freeness",
        }
    }
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Failed(String),
    #[error("{path}: {source}")]
    File { path: PathBuf, source: std::io::Error },
}

impl From<SpaceError> for RunError {
    fn from(e: SpaceError) -> Self {
        RunError::Failed(e.to_string())
    }
}

impl From<SuspensionError> for RunError {
    fn from(e: SuspensionError) -> Self {
        RunError::Failed(e.to_string())
    }
}

impl From<cflab::scheme::SchemeError> for RunError {
    fn from(e: cflab::scheme::SchemeError) -> Self {
        RunError::Failed(e.to_string())
    }
}

/// Report plus data files of one run.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub report: Value,
    /// File name and contents, written next to `report.json`.
    pub artifacts: Vec<(String, Vec<u8>)>,
}

impl Outcome {
    pub fn pass(&self) -> bool {
        self.report["pass"].as_bool().unwrap_or(false)
    }

    /// 0 when every verdict passes, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.pass() {
            0
        } else {
            1
        }
    }
}

const DEFAULT_OUT: &str = "cflab-out";
const DEFAULT_TRIALS: u64 = 1000;
const DEFAULT_L_MAX: u64 = 1_000_000;

struct Context {
    cfg: ExperimentConfig,
    scheme: CFScheme,
    warnings: Vec<String>,
}

impl Context {
    fn group(&self) -> &GroupDescriptor {
        self.scheme.group()
    }

    fn budget(&self) -> usize {
        self.cfg.budget.unwrap_or(self.scheme.depth())
    }

    fn elements(&self, default: impl FnOnce(&GroupDescriptor) -> Vec<GroupElement>) -> Result<Vec<GroupElement>, RunError> {
        match &self.cfg.elements {
            Some(_) => elements_of(self.group(), &self.cfg),
            None => Ok(default(self.group())),
        }
    }

    /// A set from the config, defaulting to `X_0`.
    fn set(&self, v: Option<&Value>, name: &str) -> Result<CompactOpen, RunError> {
        match v {
            Some(v) => Ok(compact_open_from_value(&self.scheme, v, name).map_err(ConfigError::from)?),
            None => Ok(CompactOpen::level_set(&self.scheme, 0)?),
        }
    }

    fn eps(&self) -> Result<FolnerSchedule, RunError> {
        Ok(match &self.cfg.eps {
            Some(e) => FolnerSchedule::Constant(eps_of(e)?),
            None => FolnerSchedule::Default,
        })
    }
}

fn elements_of(group: &GroupDescriptor, cfg: &ExperimentConfig) -> Result<Vec<GroupElement>, RunError> {
    cfg.elements
        .iter()
        .flatten()
        .enumerate()
        .map(|(k, v)| Ok(element_from_value(group, v, &format!("elements[{k}]")).map_err(ConfigError::from)?))
        .collect()
}

fn load_scheme(cfg: &ExperimentConfig, require_build: bool) -> Result<LoadedScheme, RunError> {
    let group = cfg.group.as_ref().map(group_of).transpose()?;
    let loaded = match (&cfg.scheme, require_build) {
        (Some(_), true) => {
            return Err(ConfigError::Invalid("build takes --group and --depth, not --scheme".into()).into())
        }
        (Some(Value::String(path)), false) => {
            let text = fs::read_to_string(path).map_err(|e| RunError::File { path: path.into(), source: e })?;
            let v: Value = serde_json::from_str(&text).map_err(|e| {
                ConfigError::from(cflab::io::IoError::Syntax { line: e.line(), column: e.column(), msg: e.to_string() })
            })?;
            scheme_from_value(&v).map_err(ConfigError::from)?
        }
        (Some(v), false) => scheme_from_value(v).map_err(ConfigError::from)?,
        (None, _) => {
            let (Some(group), Some(depth)) = (&group, cfg.depth) else {
                return Err(ConfigError::Invalid("give --scheme, or --group together with --depth".into()).into());
            };
            let mut params = BuildParams::default();
            if let Some(e) = &cfg.eps {
                params.eps = FolnerSchedule::Constant(eps_of(e)?);
            }
            if let Some(l) = cfg.l_max {
                params.l_max = l;
            }
            for g in elements_of(group, cfg)? {
                if &g == group.identity() {
                    continue;
                }
                match classify(group, &g) {
                    Some(_) => params.torsion.push(g),
                    None => params.triangle.push(g),
                }
            }
            LoadedScheme { scheme: build_scheme(group, depth, &params)?, warnings: Vec::new() }
        }
    };
    if let Some(g) = &group {
        if g != loaded.scheme.group() {
            return Err(ConfigError::Invalid("group does not match the scheme's group".into()).into());
        }
    }
    Ok(loaded)
}

/// Runs one command. Errors are usage or computation failures; verdicts
/// are carried in the report.
pub fn run(command: Command, cfg: &ExperimentConfig) -> Result<Outcome, RunError> {
    cfg.validate()?;
    let loaded = load_scheme(cfg, command == Command::Build)?;
    let ctx = Context { cfg: cfg.clone(), scheme: loaded.scheme, warnings: loaded.warnings };
    let (results, artifacts, pass) = match command {
        Command::Build => build(&ctx)?,
        Command::Check => check(&ctx)?,
        Command::Mixing => mixing(&ctx)?,
        Command::Entropy => entropy(&ctx)?,
        Command::Sample => sampling(&ctx)?,
        Command::Covariance => covariance(&ctx)?,
        Command::Freeness => freeness(&ctx)?,
    };
    let report = json!({
        "command": command,
        "config": cfg,
        "warnings": ctx.warnings,
        "results": results,
        "pass": pass,
    });
    Ok(Outcome { report, artifacts })
}

type Produced = (Value, Vec<(String, Vec<u8>)>, bool);

fn certify(ctx: &Context) -> Result<(Vec<ConditionReport>, bool), RunError> {
    let s = &ctx.scheme;
    let k = FiniteSubset::from_elements(s.group().generators().iter().cloned());
    let reports = vec![check_base(s)?, check_folner(s, &k, &ctx.eps()?)?, check_mixing(s)?];
    let pass = reports.iter().all(|r| r.pass);
    Ok((reports, pass))
}

fn build(ctx: &Context) -> Result<Produced, RunError> {
    let (reports, pass) = certify(ctx)?;
    let s = &ctx.scheme;
    let sizes: Vec<String> = s.f_sets().iter().map(|f| f.len().to_string()).collect();
    let c_sizes: Vec<usize> = s.c_sets().iter().map(|c| c.len() as usize).collect();
    let results = json!({ "depth": s.depth(), "f_sizes": sizes, "c_sizes": c_sizes, "reports": reports });
    Ok((results, vec![("scheme.json".into(), scheme_to_string(s).into_bytes())], pass))
}

fn check(ctx: &Context) -> Result<Produced, RunError> {
    let (reports, mut pass) = certify(ctx)?;
    let s = &ctx.scheme;
    let mut freeness = Vec::new();
    for g in elements_of(ctx.group(), &ctx.cfg)? {
        if &g == ctx.group().identity() {
            continue;
        }
        if classify(ctx.group(), &g).is_some() {
            let r = check_square(s, &g)?;
            pass &= r.pass;
            freeness.push(json!({ "g": g, "square": r }));
        } else {
            let l_max = ctx.cfg.l_max.unwrap_or(DEFAULT_L_MAX);
            let levels = (0..s.depth()).map(|n| check_triangle(s, &g, n, l_max)).collect::<Result<Vec<_>, _>>()?;
            pass &= levels.iter().any(Option::is_some);
            freeness.push(json!({ "g": g, "triangle": levels }));
        }
    }
    Ok((json!({ "reports": reports, "freeness": freeness }), Vec::new(), pass))
}

fn ratio_row(r: u64, v: &MeasureValue) -> [String; 3] {
    [r.to_string(), v.numer().to_string(), v.denom().to_string()]
}

fn csv_bytes<R: AsRef<[String]>>(header: &[&str], rows: impl IntoIterator<Item = R>) -> Result<Vec<u8>, RunError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let fail = |e: csv::Error| RunError::Failed(e.to_string());
    w.write_record(header).map_err(fail)?;
    for row in rows {
        w.write_record(row.as_ref()).map_err(fail)?;
    }
    w.into_inner().map_err(|e| RunError::Failed(e.to_string()))
}

fn mixing(ctx: &Context) -> Result<Produced, RunError> {
    let s = &ctx.scheme;
    let a = ctx.set(ctx.cfg.a.as_ref(), "a")?;
    let b = match &ctx.cfg.b {
        Some(v) => ctx.set(Some(v), "b")?,
        None => a.clone(),
    };
    let budget = ctx.budget();
    match &ctx.cfg.radii {
        Some(radii) => {
            let curve = decay_curve(s, &a, &b, radii, budget)?;
            let zero_from = curve.iter().rev().take_while(|(_, v)| *v == MeasureValue::from_integer(0.into())).last();
            let r0 = zero_from.map(|(r, _)| *r);
            let tail: Vec<&MeasureValue> = curve.iter().filter(|(r, _)| r0.is_some_and(|r0| *r >= r0 / 2)).map(|(_, v)| v).collect();
            let monotone = r0.is_some() && tail.windows(2).all(|w| w[1] <= w[0]);
            let rows: Vec<[String; 3]> = curve.iter().map(|(r, v)| ratio_row(*r, v)).collect();
            let csv = csv_bytes(&["radius", "numerator", "denominator"], rows)?;
            let points: Vec<Value> = curve.iter().map(|(r, v)| json!({ "radius": r, "max": v.to_string() })).collect();
            let results = json!({ "curve": points, "r0": r0, "nonincreasing_from_half_r0": monotone });
            Ok((results, vec![("decay.csv".into(), csv)], monotone))
        }
        None => {
            let profile = correlation_profile(s, &a, &b, budget)?;
            let r0 = profile.zero_from();
            let increase = profile.first_increase_from(r0 / 2);
            let pass = r0 <= profile.radius_limit && increase.is_none();
            let mut rows: Vec<[String; 3]> = profile.peaks.iter().map(|(r, v)| ratio_row(*r, v)).collect();
            let zero = MeasureValue::from_integer(0.into());
            if r0 <= profile.radius_limit {
                rows.push(ratio_row(r0, &zero));
                if profile.radius_limit > r0 {
                    rows.push(ratio_row(profile.radius_limit, &zero));
                }
            }
            let csv = csv_bytes(&["radius", "numerator", "denominator"], rows)?;
            let peaks: Vec<Value> = profile.peaks.iter().map(|(r, v)| json!({ "radius": r, "max": v.to_string() })).collect();
            let results = json!({
                "budget": budget,
                "resolvable_radius": profile.radius_limit,
                "r0": r0,
                "nonzero_shells": peaks,
                "first_increase_after_half_r0": increase,
                "note": "radii absent from the curve have correlation exactly 0",
            });
            Ok((results, vec![("decay.csv".into(), csv)], pass))
        }
    }
}

fn entropy(ctx: &Context) -> Result<Produced, RunError> {
    let curve = entropy_bound_curve(&ctx.scheme)?;
    let rows: Vec<[String; 4]> = curve
        .points
        .iter()
        .map(|p| [p.level.to_string(), p.mu.numer().to_string(), p.mu.denom().to_string(), p.f_nats.to_string()])
        .collect();
    let csv = csv_bytes(&["n", "mu_num", "mu_den", "f_nats"], rows)?;
    let pass = curve.decreasing;
    Ok((serde_json::to_value(&curve).expect("serializable"), vec![("entropy.csv".into(), csv)], pass))
}

fn sampling(ctx: &Context) -> Result<Produced, RunError> {
    let s = &ctx.scheme;
    let region = ctx.set(ctx.cfg.a.as_ref(), "a")?;
    let m = ctx.cfg.level.unwrap_or(region.level());
    let seed = ctx.cfg.seed.unwrap_or(0);
    let x = sample(s, &region, m, seed)?;
    let mut artifacts = vec![("sample.json".into(), serde_json::to_vec_pretty(&x).expect("serializable"))];
    let mut results = json!({ "resolution": m, "seed": seed, "total": x.total(), "occupied": x.counts().len() });
    let mut pass = true;
    if let Some(trials) = ctx.cfg.trials {
        let blocks: Vec<CompactOpen> = region
            .names()
            .iter()
            .map(|f| CompactOpen::cylinder(s, region.level(), f))
            .collect::<Result<_, _>>()?;
        let stats = coarsen_check(s, &region, m, &blocks, trials, seed, &Thresholds::default())?;
        let rows: Vec<[String; 7]> = stats
            .blocks
            .iter()
            .enumerate()
            .map(|(k, b)| {
                [
                    k.to_string(),
                    b.mu.clone(),
                    b.mean.to_string(),
                    b.variance.to_string(),
                    b.chi2.to_string(),
                    b.df.to_string(),
                    b.p_value.to_string(),
                ]
            })
            .collect();
        artifacts.push((
            "coarsen.csv".into(),
            csv_bytes(&["block", "mu", "mean", "variance", "chi2", "df", "p_value"], rows)?,
        ));
        pass = stats.pass;
        results["coarsening"] = serde_json::to_value(&stats).expect("serializable");
    }
    Ok((results, artifacts, pass))
}

fn covariance(ctx: &Context) -> Result<Produced, RunError> {
    let s = &ctx.scheme;
    let a = ctx.set(ctx.cfg.a.as_ref(), "a")?;
    let b = match &ctx.cfg.b {
        Some(v) => ctx.set(Some(v), "b")?,
        None => a.clone(),
    };
    let budget = ctx.budget();
    let trials = ctx.cfg.trials.unwrap_or(DEFAULT_TRIALS);
    let seed = ctx.cfg.seed.unwrap_or(0);
    let th = Thresholds::default();
    let elements = ctx.elements(|g| std::iter::once(g.identity().clone()).chain(g.generators().iter().cloned()).collect())?;
    let mut rows = Vec::new();
    let mut entries = Vec::new();
    let mut pass = true;
    for g in &elements {
        let exact = exact_covariance(s, g, &a, &b, budget)?;
        let mc = mc_covariance(s, g, &a, &b, trials, seed, budget)?;
        let ok = mc.brackets(exact.to_f64().unwrap_or(f64::NAN), th.bracket_sigma);
        pass &= ok;
        rows.push([
            s.group().norm(g).to_string(),
            exact.numer().to_string(),
            exact.denom().to_string(),
            mc.estimate.to_string(),
            mc.stderr.to_string(),
        ]);
        entries.push(json!({
            "g": g,
            "exact": exact.to_string(),
            "estimate": mc.estimate,
            "stderr": mc.stderr,
            "bracketed": ok,
        }));
    }
    let csv = csv_bytes(&["g_norm", "exact_num", "exact_den", "mc_estimate", "stderr"], rows)?;
    let results = json!({ "trials": trials, "seed": seed, "sigma": th.bracket_sigma, "entries": entries });
    Ok((results, vec![("covariance.csv".into(), csv)], pass))
}

fn freeness(ctx: &Context) -> Result<Produced, RunError> {
    let s = &ctx.scheme;
    let l_max = ctx.cfg.l_max.unwrap_or(DEFAULT_L_MAX);
    let budget = ctx.budget();
    let elements = ctx.elements(|g| g.generators().to_vec())?;
    let mut entries = Vec::new();
    let mut pass = true;
    for g in &elements {
        match freeness_witness(s, g, l_max, budget) {
            Ok(w) => entries.push(json!({ "g": g, "found": true, "witness": w })),
            Err(SpaceError::WitnessNotFound(msg)) => {
                pass = false;
                entries.push(json!({ "g": g, "found": false, "reason": msg }));
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok((json!({ "l_max": l_max, "budget": budget, "elements": entries }), Vec::new(), pass))
}

/// Output directory of a config.
pub fn out_dir(cfg: &ExperimentConfig) -> PathBuf {
    cfg.out.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

/// Writes `report.json` and the artifacts into `dir`.
pub fn write_outcome(outcome: &Outcome, dir: &Path) -> Result<(), RunError> {
    let file_err = |path: &Path| {
        let path = path.to_path_buf();
        move |source| RunError::File { path, source }
    };
    fs::create_dir_all(dir).map_err(file_err(dir))?;
    let mut report = serde_json::to_vec_pretty(&outcome.report).expect("serializable");
    report.push(b'\n');
    let path = dir.join("report.json");
    fs::write(&path, report).map_err(file_err(&path))?;
    for (name, bytes) in &outcome.artifacts {
        let path = dir.join(name);
        fs::write(&path, bytes).map_err(file_err(&path))?;
    }
    Ok(())
}

/// Runs a command end to end and returns the process exit status:
/// 0 when all verdicts pass, 1 on a verdict failure (report written),
/// 2 on a usage, parse or computation error (no report).
pub fn execute(command: Command, cfg: &ExperimentConfig) -> i32 {
    let outcome = match run(command, cfg) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let dir = out_dir(cfg);
    if let Err(e) = write_outcome(&outcome, &dir) {
        eprintln!("error: {e}");
        return 2;
    }
    println!("{}: {} ({})", command.name(), if outcome.pass() { "pass" } else { "fail" }, dir.display());
    outcome.exit_code()
}
