//! Command-line front end.
//!
//! Every subcommand writes JSON lines to stdout, one record per result, and a
//! short human summary to stderr. Each record carries `tool` (the build
//! identifier), `command`, `seed` and `limits`. Exit codes: 0 success, 1 a
//! property check failed, 2 bad flags or input, 3 work limit exceeded, 4 no
//! consistent hypothesis (under the `error` policy).
//!
//! Stochastic subcommands require `--seed`. Each trial draws from a stream
//! keyed by the seed, a subcommand tag and the grid/trial coordinates, so the
//! output does not depend on `--jobs`.

mod config;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::classgen::{self, GenSpec};
use crate::domain::{ConceptClass, PrincipalIdeal};
use crate::empirics::{packing_lower_bounds, packing_number, ugc_curve, PackingMode};
use crate::error::{Error, Result};
use crate::format::{read_class, read_set, write_class};
use crate::learning::{pac_error_estimate, sample_complexity_bound, LearnerKind, PacConfig};
use crate::limits::WorkLimits;
use crate::measures::{DiscreteMeasure, MeasureSpec};
use crate::pointset::PointSet;
use crate::rng::RNG_ALGORITHM;
use crate::shattering::{is_strongly_shattered, vc_after_removal, vc_dimension, vc_mod_ideal, vc_thick, RemovalMode};
use crate::stone::{lift_witness, vc_on_stone};

pub use config::{ClassSource, ExperimentConfig, LoadedClass, TargetSpec};

const VERSION_TAG: &str = concat!(env!("CARGO_PKG_VERSION"), " (rng chacha8/splitmix64-key/v1)");

/// Build identifier printed by `--version` and embedded in every record.
pub const BUILD_ID: &str = concat!("vcmod ", env!("CARGO_PKG_VERSION"), " (rng chacha8/splitmix64-key/v1)");

#[derive(Parser, Debug)]
#[command(name = "vcmod", version = VERSION_TAG, about = "VC dimension modulo ideals, thick VC dimension and learnability simulations")]
struct Cli {
    /// Worker threads (default: all cores). Output does not depend on it.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Master seed; required by stochastic subcommands.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// JSON file overriding the default work limits.
    #[arg(long, global = true)]
    limits: Option<PathBuf>,
    /// Shortcut for the `search_nodes` limit.
    #[arg(long, global = true)]
    search_nodes: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Classical VC dimension.
    Vc(ClassArg),
    /// VC dimension over disjoint clusters of at least `--min-size` points.
    VcThick {
        #[command(flatten)]
        class: ClassArg,
        #[arg(long)]
        min_size: usize,
    },
    /// VC dimension modulo the ideal of subsets of a negligible set.
    VcMod(IdealArgs),
    /// Least VC dimension after removing at most `--budget` points.
    VcRemoval {
        #[command(flatten)]
        class: ClassArg,
        #[arg(long)]
        budget: usize,
        #[arg(long, value_enum, default_value = "exact")]
        mode: ModeArg,
    },
    /// Checks that the Stone-space and strong-shattering computations agree.
    StoneCheck(IdealArgs),
    /// Monte Carlo PAC error estimates from an experiment config.
    PacSim(SimArgs),
    /// Monte Carlo uniform-deviation curves from an experiment config.
    UgcSim(SimArgs),
    /// Packing number of the pattern class (`--d`) or of a class file.
    Packing {
        #[arg(long, conflicts_with = "class", required_unless_present = "class")]
        d: Option<usize>,
        /// Points per cluster of the pattern class.
        #[arg(long, default_value_t = 1, requires = "d")]
        cluster_size: usize,
        #[arg(long)]
        class: Option<PathBuf>,
        /// Measure as a JSON measure spec (uniform when absent); `--class` only.
        #[arg(long, requires = "class")]
        measure: Option<String>,
        /// Separation is `2·epsilon`.
        #[arg(long)]
        epsilon: f64,
        #[arg(long, value_enum, default_value = "exact")]
        mode: ModeArg,
    },
    /// Sample-complexity bound for VC dimension `d`.
    Bound {
        #[arg(long)]
        epsilon: f64,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        d: usize,
    },
    /// Writes a generated class in the class file format.
    #[command(subcommand)]
    Gen(GenCommand),
}

#[derive(Args, Debug)]
struct ClassArg {
    #[arg(long)]
    class: PathBuf,
}

#[derive(Args, Debug)]
struct IdealArgs {
    #[arg(long)]
    class: PathBuf,
    /// Set file with the negligible set `N`.
    #[arg(long)]
    negligible: PathBuf,
}

#[derive(Args, Debug)]
struct SimArgs {
    #[arg(long)]
    config: PathBuf,
    /// Also write the curve as CSV to this path.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Exact,
    Greedy,
}

#[derive(Subcommand, Debug)]
enum GenCommand {
    FiniteCofinite {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        t: usize,
    },
    Intervals {
        #[arg(long)]
        m: usize,
    },
    Thresholds {
        #[arg(long)]
        m: usize,
    },
    PowerSet {
        #[arg(long)]
        m: usize,
    },
    Patterns {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        cluster_size: usize,
    },
    Random {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        count: usize,
        #[arg(long)]
        density: f64,
    },
    ClusterDecorated {
        #[arg(long)]
        base: PathBuf,
        #[arg(long)]
        cluster_size: usize,
        #[arg(long)]
        noise: usize,
    },
}

/// Non-error outcome of a subcommand.
enum Outcome {
    Ok,
    CheckFailed,
}

struct Ctx<'a> {
    out: &'a mut (dyn Write + Send),
    err: &'a mut (dyn Write + Send),
    seed: Option<u64>,
    limits: WorkLimits,
}

impl Ctx<'_> {
    fn emit(&mut self, command: &str, payload: impl Serialize) -> Result<()> {
        let mut record = Map::new();
        record.insert("tool".into(), json!(BUILD_ID));
        record.insert("command".into(), json!(command));
        record.insert("seed".into(), json!(self.seed));
        record.insert("limits".into(), json!(self.limits));
        match serde_json::to_value(payload).map_err(|e| Error::Io(e.to_string()))? {
            Value::Object(fields) => record.extend(fields),
            other => {
                record.insert("result".into(), other);
            }
        }
        writeln!(self.out, "{}", Value::Object(record))?;
        self.out.flush()?;
        Ok(())
    }

    fn note(&mut self, line: impl AsRef<str>) {
        let _ = writeln!(self.err, "{}", line.as_ref());
    }

    fn require_seed(&self, command: &str) -> Result<u64> {
        self.seed.ok_or_else(|| Error::InvalidParameter(format!("`{command}` requires --seed")))
    }
}

/// Parses `args` (including the program name) and runs the command, writing to
/// the process's stdout and stderr. Returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let mut out = std::io::BufWriter::new(std::io::stdout());
    run(args, &mut out, &mut std::io::stderr())
}

/// Like [`main_with_args`] with explicit output streams.
pub fn run<I, T>(args: I, out: &mut (dyn Write + Send), err: &mut (dyn Write + Send)) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    return 0;
                }
                _ => 2,
            };
            let _ = write!(err, "{e}");
            return code;
        }
    };
    let limits = match load_limits(&cli) {
        Ok(l) => l,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return 2;
        }
    };
    let mut ctx = Ctx { out, err, seed: cli.seed, limits };
    let result = match cli.jobs {
        Some(0) => Err(Error::InvalidParameter("--jobs must be at least 1".into())),
        Some(jobs) => match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
            Ok(pool) => pool.install(|| dispatch(&cli.command, &mut ctx)),
            Err(e) => Err(Error::InvalidParameter(format!("thread pool: {e}"))),
        },
        None => dispatch(&cli.command, &mut ctx),
    };
    let _ = ctx.out.flush();
    match result {
        Ok(Outcome::Ok) => 0,
        Ok(Outcome::CheckFailed) => 1,
        Err(e) => {
            ctx.note(format!("error: {e}"));
            exit_code(&e)
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::WorkLimitExceeded { .. } => 3,
        Error::NoConsistentHypothesis => 4,
        _ => 2,
    }
}

fn load_limits(cli: &Cli) -> Result<WorkLimits> {
    let mut limits = match &cli.limits {
        Some(p) => serde_json::from_str(&std::fs::read_to_string(p)?)
            .map_err(|e| Error::InvalidParameter(format!("limits file: {e}")))?,
        None => WorkLimits::default(),
    };
    if let Some(n) = cli.search_nodes {
        limits.search_nodes = n;
    }
    Ok(limits)
}

fn load_ideal(class: &ConceptClass, path: &Path) -> Result<PrincipalIdeal> {
    let n = read_set(path)?;
    if n.len() != class.m() {
        return Err(Error::DomainMismatch { expected: class.m(), found: n.len() });
    }
    Ok(PrincipalIdeal::new(n))
}

fn dispatch(command: &Command, ctx: &mut Ctx) -> Result<Outcome> {
    let limits = ctx.limits;
    match command {
        Command::Vc(a) => {
            let class = read_class(&a.class)?;
            let r = vc_dimension(&class, &limits)?;
            ctx.note(format!("vc = {} ({} search nodes)", r.dimension, r.nodes));
            ctx.emit("vc", json!({ "m": class.m(), "concepts": class.len(), "vc": r.dimension, "detail": r }))?;
        }
        Command::VcThick { class, min_size } => {
            let class = read_class(&class.class)?;
            let r = vc_thick(&class, *min_size, &limits)?;
            ctx.note(format!("vc_thick(min_size = {min_size}) = {}", r.dimension));
            ctx.emit("vc-thick", json!({ "min_size": min_size, "vc_thick": r.dimension, "detail": r }))?;
        }
        Command::VcMod(a) => {
            let class = read_class(&a.class)?;
            let ideal = load_ideal(&class, &a.negligible)?;
            let r = vc_mod_ideal(&class, &ideal, &limits)?;
            ctx.note(format!("vc_mod = {}", r.dimension));
            ctx.emit(
                "vc-mod",
                json!({ "negligible": ideal.negligible(), "vc_mod": r.dimension, "detail": r }),
            )?;
        }
        Command::VcRemoval { class, budget, mode } => {
            let class = read_class(&class.class)?;
            let mode = match mode {
                ModeArg::Exact => RemovalMode::Exact,
                ModeArg::Greedy => RemovalMode::Greedy,
            };
            let r = vc_after_removal(&class, *budget, mode, &limits)?;
            ctx.note(format!(
                "vc after removing {:?} = {}{}",
                r.removed,
                r.dimension,
                if r.heuristic { " (greedy upper bound)" } else { "" }
            ));
            ctx.emit("vc-removal", json!({ "budget": budget, "vc": r.dimension, "detail": r }))?;
        }
        Command::StoneCheck(a) => return stone_check(a, ctx),
        Command::PacSim(a) => return pac_sim(a, ctx),
        Command::UgcSim(a) => return ugc_sim(a, ctx),
        Command::Packing { d, cluster_size, class, measure, epsilon, mode } => {
            let mode = match mode {
                ModeArg::Exact => PackingMode::Exact,
                ModeArg::Greedy => PackingMode::Greedy,
            };
            return match (d, class) {
                (Some(d), _) => packing_patterns(*d, *cluster_size, *epsilon, mode, ctx),
                (None, Some(path)) => {
                    let class = read_class(path)?;
                    let measure = match measure {
                        Some(text) => serde_json::from_str::<MeasureSpec>(text)
                            .map_err(|e| Error::InvalidParameter(format!("--measure: {e}")))?
                            .build(class.m())?,
                        None => DiscreteMeasure::uniform(class.m())?,
                    };
                    let r = packing_number(&class, &measure, 2.0 * epsilon, mode, &limits)?;
                    ctx.note(format!("packing number at {} = {}{}", 2.0 * epsilon, r.size, exact_tag(r.exact)));
                    ctx.emit(
                        "packing",
                        json!({
                            "epsilon": epsilon,
                            "separation": 2.0 * epsilon,
                            "atom_bound": measure.atom_bound(),
                            "packing": r,
                        }),
                    )?;
                    Ok(Outcome::Ok)
                }
                (None, None) => Err(Error::InvalidParameter("packing needs --d or --class".into())),
            };
        }
        Command::Bound { epsilon, delta, d } => {
            let bound = sample_complexity_bound(*epsilon, *delta, *d)?;
            ctx.note(format!("s({epsilon}, {delta}, {d}) = {bound}"));
            ctx.emit("bound", json!({ "epsilon": epsilon, "delta": delta, "d": d, "bound": bound }))?;
        }
        Command::Gen(g) => {
            let class = generate(g, ctx)?;
            ctx.note(format!("generated {} concepts on {} points", class.len(), class.m()));
            ctx.out.write_all(write_class(&class).as_bytes())?;
        }
    }
    Ok(Outcome::Ok)
}

fn exact_tag(exact: bool) -> &'static str {
    if exact {
        ""
    } else {
        " (greedy lower bound)"
    }
}

fn generate(g: &GenCommand, ctx: &Ctx) -> Result<ConceptClass> {
    let spec = match g {
        GenCommand::FiniteCofinite { m, t } => GenSpec::FiniteCofinite { m: *m, t: *t },
        GenCommand::Intervals { m } => GenSpec::Intervals { m: *m },
        GenCommand::Thresholds { m } => GenSpec::Thresholds { m: *m },
        GenCommand::PowerSet { m } => GenSpec::PowerSet { m: *m },
        GenCommand::Patterns { d, cluster_size } => GenSpec::Patterns { d: *d, cluster_size: *cluster_size },
        GenCommand::Random { m, count, density } => {
            GenSpec::Random { m: *m, count: *count, density: *density, seed: ctx.require_seed("gen random")? }
        }
        GenCommand::ClusterDecorated { base, cluster_size, noise } => {
            let seed = ctx.require_seed("gen cluster-decorated")?;
            let base = read_class(base)?;
            return classgen::gen_cluster_decorated(&base, *cluster_size, *noise, seed);
        }
    };
    spec.generate(&ctx.limits)
}

fn stone_check(a: &IdealArgs, ctx: &mut Ctx) -> Result<Outcome> {
    let limits = ctx.limits;
    let class = read_class(&a.class)?;
    let ideal = load_ideal(&class, &a.negligible)?;
    let direct = vc_mod_ideal(&class, &ideal, &limits)?;
    let stone = vc_on_stone(&class, &ideal, &limits)?;
    let lifted = lift_witness(&class, &ideal, &stone.carvers)?;
    let witness_valid = is_strongly_shattered(&class, &lifted)?.is_some();
    let equal = direct.dimension == stone.dimension;
    ctx.note(format!(
        "vc_mod = {}, vc_stone = {}, {} ({} of {} atoms survive); lifted witness {}",
        direct.dimension,
        stone.dimension,
        if equal { "equal" } else { "MISMATCH" },
        stone.surviving_atoms,
        stone.atoms,
        if witness_valid { "valid" } else { "INVALID" }
    ));
    ctx.emit(
        "stone-check",
        json!({
            "vc_mod": direct.dimension,
            "vc_stone": stone.dimension,
            "equal": equal,
            "witness_valid": witness_valid,
            "stone": stone,
            "lifted_witness": lifted,
        }),
    )?;
    Ok(if equal && witness_valid { Outcome::Ok } else { Outcome::CheckFailed })
}

/// The `2^d` pattern class under the mixture of uniform measures on its `d`
/// clusters with weights `1/d`, against the combinatorial packing bound.
fn packing_patterns(d: usize, cluster_size: usize, epsilon: f64, mode: PackingMode, ctx: &mut Ctx) -> Result<Outcome> {
    let bounds = packing_lower_bounds(d, epsilon)?;
    let class = classgen::gen_patterns(d, cluster_size)?;
    let measure = pattern_mixture(d, cluster_size)?;
    let r = packing_number(&class, &measure, 2.0 * epsilon, mode, &ctx.limits)?;
    let meets = r.size as f64 >= bounds.combinatorial;
    ctx.note(format!(
        "d = {d}, eps = {epsilon}: packing {}{} vs bounds {:.4} / {:.4}",
        r.size,
        exact_tag(r.exact),
        bounds.combinatorial,
        bounds.chernoff_okamoto
    ));
    ctx.emit(
        "packing",
        json!({
            "d": d,
            "cluster_size": cluster_size,
            "epsilon": epsilon,
            "separation": 2.0 * epsilon,
            "atom_bound": measure.atom_bound(),
            "packing": r,
            "bounds": bounds,
            "meets_combinatorial": meets,
        }),
    )?;
    Ok(if meets && bounds.ordering_holds { Outcome::Ok } else { Outcome::CheckFailed })
}

/// Mixture with weight `1/d` on the uniform measure of each of `d` clusters.
pub fn pattern_mixture(d: usize, cluster_size: usize) -> Result<DiscreteMeasure> {
    let m = d * cluster_size;
    let parts = (0..d)
        .map(|i| DiscreteMeasure::uniform_on(&PointSet::from_points(m, i * cluster_size..(i + 1) * cluster_size).expect("in range")))
        .collect::<Result<Vec<_>>>()?;
    DiscreteMeasure::mixture(&parts, &vec![1.0 / d as f64; d])
}

fn load_experiment(a: &SimArgs, ctx: &Ctx, command: &str) -> Result<(ExperimentConfig, LoadedClass, Vec<DiscreteMeasure>, u64)> {
    let seed = ctx.require_seed(command)?;
    let config = ExperimentConfig::read(&a.config)?;
    let class = LoadedClass::load(&config.class, &ctx.limits)?;
    let measures = config.measures.iter().map(|s| s.build(class.m())).collect::<Result<Vec<_>>>()?;
    if measures.is_empty() || config.n_grid.is_empty() {
        return Err(Error::InvalidParameter("config needs at least one measure and one sample size".into()));
    }
    Ok((config, class, measures, seed))
}

fn pac_sim(a: &SimArgs, ctx: &mut Ctx) -> Result<Outcome> {
    let (config, class, measures, seed) = load_experiment(a, ctx, "pac-sim")?;
    let learner = config
        .learner
        .clone()
        .ok_or_else(|| Error::InvalidParameter("pac-sim config needs a learner".into()))?;
    let family = class.family(learner.order.as_deref())?;
    let targets = config.targets.iter().map(|t| class.target(t)).collect::<Result<Vec<_>>>()?;
    if targets.is_empty() {
        return Err(Error::InvalidParameter("pac-sim config needs at least one target".into()));
    }
    let mut csv = String::from("target,measure,n,n_atom_bound,mean_error,std_error,max_error,epsilon,exceedance\n");
    for (ti, target) in targets.iter().enumerate() {
        for (mi, measure) in measures.iter().enumerate() {
            for (gi, &n) in config.n_grid.iter().enumerate() {
                let pac = PacConfig {
                    n,
                    trials: config.trials,
                    seed,
                    epsilons: config.epsilons.clone(),
                    policy: config.policy,
                    stream: vec![ti as u64, mi as u64, gi as u64],
                };
                let est = pac_error_estimate(family.as_ref(), learner.kind, target, measure, &pac)?;
                ctx.note(format!(
                    "target {ti} measure {mi} n = {n}: mean error {:.4} ± {:.4}",
                    est.mean_error, est.std_error
                ));
                for e in &est.exceedance {
                    let _ = writeln!(
                        csv,
                        "{ti},{mi},{n},{},{},{},{},{},{}",
                        est.n_atom_bound, est.mean_error, est.std_error, est.max_error, e.epsilon, e.fraction
                    );
                }
                ctx.emit(
                    "pac-sim",
                    json!({
                        "learner": match learner.kind { LearnerKind::Enumeration => "enumeration", LearnerKind::Adversarial => "adversarial" },
                        "family": family.describe(),
                        "target": ti,
                        "target_in_class": class.contains(target),
                        "measure": mi,
                        "grid": gi,
                        "delta": config.delta,
                        "estimate": est,
                    }),
                )?;
            }
        }
    }
    write_csv(a, &csv)?;
    Ok(Outcome::Ok)
}

fn ugc_sim(a: &SimArgs, ctx: &mut Ctx) -> Result<Outcome> {
    let (config, class, measures, seed) = load_experiment(a, ctx, "ugc-sim")?;
    if config.epsilons.is_empty() {
        return Err(Error::InvalidParameter("ugc-sim config needs at least one epsilon".into()));
    }
    let family = class.family(None)?;
    let mut csv = String::from("epsilon,n,n_atom_bound,probability,std_error,worst_measure\n");
    for (ei, &epsilon) in config.epsilons.iter().enumerate() {
        let curve = ugc_curve(family.as_ref(), &measures, &config.n_grid, epsilon, config.trials, seed)?;
        for (gi, point) in curve.iter().enumerate() {
            let below = config.delta.map(|d| point.probability <= d);
            ctx.note(format!(
                "eps = {epsilon} n = {}: P(sup dev >= eps) = {:.4} ± {:.4}",
                point.n, point.probability, point.std_error
            ));
            let _ = writeln!(
                csv,
                "{epsilon},{},{},{},{},{}",
                point.n, point.n_atom_bound, point.probability, point.std_error, point.worst_measure
            );
            ctx.emit(
                "ugc-sim",
                json!({
                    "family": family.describe(),
                    "epsilon_index": ei,
                    "grid": gi,
                    "delta": config.delta,
                    "below_delta": below,
                    "rng": RNG_ALGORITHM,
                    "point": point,
                }),
            )?;
        }
    }
    write_csv(a, &csv)?;
    Ok(Outcome::Ok)
}

fn write_csv(a: &SimArgs, csv: &str) -> Result<()> {
    if let Some(path) = &a.csv {
        std::fs::write(path, csv)?;
    }
    Ok(())
}
