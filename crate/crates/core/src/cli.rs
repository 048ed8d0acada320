//! The `punctlab` command-line front end.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::Error;
use crate::fnexpr::HoloExpr;
use crate::lipschitz::{self, doubling_schedule, invariance_check, lipschitz_estimate, marty_test, MartyConfig};
use crate::maps::{Bound, HoloMap, Mobius, QPeriodic};
use crate::metrics::{self, check_radii, diameter_profile, geometric_radii, Disk};
use crate::report::{env_seed, Provenance, Report, SCHEMA};
use crate::singularity::{self, GrowthConfig, LvConfig, LvOutcome, PrincipleConfig};
use crate::sphere::{chordal, to_unit_sphere, SpherePoint};
use crate::zalcman::{self, CaseTag, GridSample, RescalingResult, ZalcmanConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_INCONCLUSIVE: i32 = 2;

const DEFAULT_RADII: &str = "1e-1:1e-6";

#[derive(Parser, Debug)]
#[command(name = "punctlab", version, about = "Normal families, rescaling and isolated singularities of maps into the Riemann sphere")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Chordal, Poincaré and punctured-disk distances
    Metrics(MetricsArgs),
    /// Chordal diameters of image circles
    Diam(DiamArgs),
    /// Lipschitz-on-disks estimate and Möbius invariance check
    Lip(LipArgs),
    /// Normality test for a family f_k
    Marty(MartyArgs),
    /// Zalcman rescaling of a family f_k
    Zalcman(ZalcmanArgs),
    /// Rescaling dichotomy at the singularity at 0
    Rescale(RescaleArgs),
    /// Lehto–Virtanen witness search
    Lv(LvArgs),
    /// Julia exceptionality indicator
    Julia(JuliaArgs),
    /// Print the JSON schema of reports
    Schema,
}

#[derive(Args, Debug)]
struct Output {
    /// Write the JSON report here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write plot data as CSV
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Seed for randomized sampling (default: $PUNCTLAB_SEED or 0)
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Builtin {
    /// q-periodic theta quotient, q = 1/10
    Qperiodic,
}

#[derive(Args, Debug, Serialize)]
struct Target {
    /// Function of z, e.g. "exp(1/z)"
    #[arg(long = "fn", required_unless_present = "builtin", conflicts_with = "builtin")]
    #[serde(rename = "fn")]
    function: Option<String>,
    /// Built-in map used instead of an expression
    #[arg(long, value_enum)]
    builtin: Option<Builtin>,
}

#[derive(Clone, Debug, Serialize)]
struct Radii(Vec<f64>);

fn parse_radii(s: &str) -> Result<Radii, String> {
    let radii = if let Some((a, b)) = s.split_once(':') {
        let a: f64 = a.trim().parse().map_err(|_| format!("bad radius {a:?}"))?;
        let b: f64 = b.trim().parse().map_err(|_| format!("bad radius {b:?}"))?;
        geometric_radii(a, b).map_err(|e| e.to_string())?
    } else {
        let v = s
            .split(',')
            .map(|t| t.trim().parse::<f64>().map_err(|_| format!("bad radius {t:?}")))
            .collect::<Result<Vec<_>, _>>()?;
        check_radii(&v).map_err(|e| e.to_string())?;
        v
    };
    Ok(Radii(radii))
}

fn parse_list(s: &str) -> Result<Vec<i64>, String> {
    s.split(',').map(|t| t.trim().parse::<i64>().map_err(|_| format!("bad integer {t:?}"))).collect()
}

#[derive(Clone, Debug, Serialize)]
struct Ks(Vec<i64>);

fn parse_ks(s: &str) -> Result<Ks, String> {
    let v = parse_list(s)?;
    if v.is_empty() {
        return Err("empty k list".into());
    }
    Ok(Ks(v))
}

/// A complex constant written in the expression grammar, e.g. `0.3-2i`.
fn parse_complex(s: &str) -> Result<Complex64, String> {
    let e = HoloExpr::parse(s).map_err(|e| e.to_string())?;
    if e.uses_k() || e.uses_z() {
        return Err(format!("{s:?} is not a constant"));
    }
    match e.eval(Complex64::new(0.0, 0.0), None) {
        Ok(SpherePoint::Finite(c)) => Ok(c),
        Ok(SpherePoint::Infinity) => Err(format!("{s:?} is infinite")),
        Err(e) => Err(e.to_string()),
    }
}

/// A complex constant or `inf`.
fn parse_sphere(s: &str) -> Result<SpherePoint, String> {
    if s.trim().eq_ignore_ascii_case("inf") {
        Ok(SpherePoint::Infinity)
    } else {
        parse_complex(s).map(SpherePoint::Finite)
    }
}

#[derive(Args, Debug, Serialize)]
struct MetricsArgs {
    /// Chordal distance between two points of the sphere
    #[arg(long, num_args = 2, value_names = ["P", "Q"], value_parser = parse_sphere, allow_hyphen_values = true)]
    chordal: Option<Vec<SpherePoint>>,
    /// Poincaré distance in D(center, radius)
    #[arg(long, num_args = 2, value_names = ["Z", "W"], value_parser = parse_complex, allow_hyphen_values = true)]
    poincare: Option<Vec<Complex64>>,
    /// Comparison bounds on D(center, inner) inside D(center, radius)
    #[arg(long, num_args = 2, value_names = ["Z", "W"], value_parser = parse_complex, allow_hyphen_values = true, requires = "inner")]
    bounds: Option<Vec<Complex64>>,
    #[arg(long, default_value = "0", value_parser = parse_complex, allow_hyphen_values = true)]
    center: Complex64,
    #[arg(long, default_value_t = 1.0)]
    radius: f64,
    #[arg(long)]
    inner: Option<f64>,
    /// Hyperbolic distance in the punctured unit disk
    #[arg(long, num_args = 2, value_names = ["Z", "W"], value_parser = parse_complex, allow_hyphen_values = true)]
    punctured_distance: Option<Vec<Complex64>>,
    /// Hyperbolic length of |z| = r in the punctured unit disk
    #[arg(long, value_name = "R")]
    punctured_length: Option<f64>,
    #[command(flatten)]
    #[serde(skip)]
    output: Output,
}

#[derive(Args, Debug, Serialize)]
struct DiamArgs {
    #[command(flatten)]
    target: Target,
    /// Radii as `start:end` (decades) or a comma separated list
    #[arg(long, default_value = DEFAULT_RADII, value_parser = parse_radii)]
    radii: Radii,
    #[arg(long, default_value_t = metrics::DEFAULT_CIRCLE_SAMPLES)]
    samples: usize,
    #[command(flatten)]
    #[serde(skip)]
    output: Output,
}

#[derive(Args, Debug, Serialize)]
struct LipArgs {
    #[arg(long = "fn")]
    #[serde(rename = "fn")]
    function: String,
    /// Family parameter
    #[arg(long)]
    k: Option<i64>,
    #[arg(long, default_value = "0", value_parser = parse_complex, allow_hyphen_values = true)]
    center: Complex64,
    #[arg(long, default_value_t = 0.5)]
    radius: f64,
    #[arg(long, default_value_t = lipschitz::DEFAULT_BUDGET)]
    budget: usize,
    /// Source disk of a Möbius map onto D(center, radius); enables the invariance check
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true, requires = "from_radius")]
    from_center: Option<Complex64>,
    #[arg(long)]
    from_radius: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    rotation: f64,
    /// Automorphism parameter, |alpha| < 1
    #[arg(long, default_value = "0", value_parser = parse_complex, allow_hyphen_values = true)]
    alpha: Complex64,
    #[command(flatten)]
    #[serde(skip)]
    output: Output,
}

#[derive(Args, Debug, Serialize)]
struct MartyArgs {
    #[arg(long = "fn")]
    #[serde(rename = "fn")]
    function: String,
    #[arg(long, default_value = "0", value_parser = parse_complex, allow_hyphen_values = true)]
    center: Complex64,
    #[arg(long, default_value_t = 0.5)]
    radius: f64,
    /// Use k = 1, 2, 4, ... up to this value
    #[arg(long, default_value_t = 4096, conflicts_with = "ks")]
    k_max: i64,
    /// Explicit comma separated k values
    #[arg(long, value_parser = parse_ks)]
    ks: Option<Ks>,
    #[arg(long, default_value_t = lipschitz::DEFAULT_THRESHOLD)]
    threshold: f64,
    #[arg(long, default_value_t = lipschitz::DEFAULT_TAIL)]
    tail: usize,
    #[arg(long, default_value_t = lipschitz::DEFAULT_BUDGET)]
    budget: usize,
    #[command(flatten)]
    #[serde(skip)]
    output: Output,
}

#[derive(Args, Debug, Serialize)]
struct ZalcmanOpts {
    #[arg(long, default_value_t = zalcman::DEFAULT_INNER_RADIUS)]
    inner_radius: f64,
    #[arg(long, default_value_t = zalcman::DEFAULT_TEST_RADIUS)]
    test_radius: f64,
    #[arg(long, default_value_t = zalcman::DEFAULT_TOLERANCE)]
    tol: f64,
    #[arg(long, default_value_t = zalcman::DEFAULT_SPREAD_FLOOR)]
    spread_floor: f64,
    #[arg(long = "zalcman-budget", default_value_t = zalcman::DEFAULT_BUDGET)]
    zalcman_budget: usize,
}

impl ZalcmanOpts {
    fn config(&self) -> ZalcmanConfig {
        ZalcmanConfig {
            inner_radius: self.inner_radius,
            test_radius: self.test_radius,
            tolerance: self.tol,
            spread_floor: self.spread_floor,
            budget: self.zalcman_budget,
        }
    }
}

#[derive(Args, Debug, Serialize)]
struct ZalcmanArgs {
    #[arg(long = "fn")]
    #[serde(rename = "fn")]
    function: String,
    /// Use k = 2, 4, ..., 2^N
    #[arg(long, default_value_t = 20, conflicts_with = "ks")]
    k_max_exp: u32,
    #[arg(long, value_parser = parse_ks)]
    ks: Option<Ks>,
    /// Zoom center for the double rescaling
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true, requires = "zoom_radii")]
    at: Option<Complex64>,
    /// Zoom radii paired with the k schedule
    #[arg(long, value_parser = parse_radii)]
    zoom_radii: Option<Radii>,
    #[command(flatten)]
    zalcman: ZalcmanOpts,
    #[command(flatten)]
    #[serde(skip)]
    output: Output,
}

#[derive(Args, Debug, Serialize)]
struct RescaleArgs {
    #[command(flatten)]
    target: Target,
    #[arg(long, default_value = DEFAULT_RADII, value_parser = parse_radii)]
    radii: Radii,
    #[arg(long, default_value_t = 1e-3)]
    collapse: f64,
    #[arg(long, default_value_t = 1e3)]
    trace_threshold: f64,
    #[arg(long, default_value_t = 3)]
    trace_tail: usize,
    #[arg(long, default_value_t = singularity_budget())]
    budget: usize,
    #[arg(long, default_value_t = 0.1)]
    diam_threshold: f64,
    #[command(flatten)]
    zalcman: ZalcmanOpts,
    #[command(flatten)]
    #[serde(skip)]
    output: Output,
}

fn singularity_budget() -> usize {
    PrincipleConfig::default().budget
}

#[derive(Args, Debug, Serialize)]
struct LvArgs {
    #[command(flatten)]
    target: Target,
    #[arg(long, default_value = DEFAULT_RADII, value_parser = parse_radii)]
    radii: Radii,
    #[arg(long, default_value_t = 0.1)]
    threshold: f64,
    #[command(flatten)]
    #[serde(skip)]
    output: Output,
}

#[derive(Args, Debug, Serialize)]
struct JuliaArgs {
    #[command(flatten)]
    target: Target,
    #[arg(long, default_value = DEFAULT_RADII, value_parser = parse_radii)]
    radii: Radii,
    #[arg(long, default_value_t = 1e3)]
    threshold: f64,
    #[arg(long, default_value_t = 3)]
    tail: usize,
    #[command(flatten)]
    #[serde(skip)]
    output: Output,
}

enum Map {
    Expr(HoloExpr),
    QPeriodic(QPeriodic),
}

impl HoloMap for Map {
    fn value(&self, z: Complex64) -> crate::Result<SpherePoint> {
        match self {
            Map::Expr(e) => e.eval(z, None),
            Map::QPeriodic(q) => q.value(z),
        }
    }
    fn sharp(&self, z: Complex64) -> crate::Result<f64> {
        match self {
            Map::Expr(e) => e.spherical_derivative(z, None),
            Map::QPeriodic(q) => q.sharp(z),
        }
    }
}

impl Target {
    fn build(&self) -> crate::Result<(Map, String)> {
        match (&self.function, self.builtin) {
            (Some(text), _) => {
                let e = HoloExpr::parse(text)?;
                if e.uses_k() {
                    return Err(Error::MissingParameter);
                }
                Ok((Map::Expr(e), text.clone()))
            }
            (None, Some(Builtin::Qperiodic)) => {
                let q = QPeriodic::standard();
                let name = q.to_string();
                Ok((Map::QPeriodic(q), name))
            }
            (None, None) => Err(Error::invalid("either --fn or --builtin is required")),
        }
    }
}

/// A finished command before it is written out.
struct Outcome {
    report: Report,
    csv: Option<String>,
    inconclusive: bool,
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable")
}

fn seed_of(output: &Output) -> Result<u64, String> {
    match output.seed {
        Some(s) => Ok(s),
        None => env_seed(),
    }
}

fn grid_csv(samples: &[GridSample]) -> String {
    let mut s = String::from("v_re,v_im,x,y,z\n");
    for g in samples {
        let p = to_unit_sphere(g.value);
        let _ = writeln!(s, "{},{},{},{},{}", g.v.re, g.v.im, p[0], p[1], p[2]);
    }
    s
}

fn metrics_cmd(a: &MetricsArgs, seed: u64) -> crate::Result<Outcome> {
    let mut result = serde_json::Map::new();
    if let Some(p) = &a.chordal {
        result.insert("chordal".into(), json!(chordal(p[0], p[1])));
    }
    let disk = Disk::new(a.center, a.radius)?;
    if let Some(p) = &a.poincare {
        result.insert("poincare_distance".into(), json!(metrics::poincare_distance(&disk, p[0], p[1])?));
    }
    if let (Some(p), Some(r)) = (&a.bounds, a.inner) {
        let (lo, hi) = metrics::comparison_bounds(&disk, r, p[0], p[1])?;
        let d = metrics::poincare_distance(&disk, p[0], p[1])?;
        result.insert("comparison_bounds".into(), json!({"lower": lo, "distance": d, "upper": hi}));
    }
    if let Some(p) = &a.punctured_distance {
        result.insert("punctured_distance".into(), json!(metrics::punctured_distance(p[0], p[1])?));
    }
    if let Some(r) = a.punctured_length {
        result.insert("punctured_circle_length".into(), json!(metrics::punctured_circle_length(r)?));
    }
    if result.is_empty() {
        return Err(Error::invalid("metrics: request at least one quantity (see --help)"));
    }
    Ok(Outcome {
        report: Report::new("metrics", None, to_value(a), Value::Object(result), Provenance::new(seed)),
        csv: None,
        inconclusive: false,
    })
}

fn diam_cmd(a: &DiamArgs, seed: u64) -> crate::Result<Outcome> {
    let (f, name) = a.target.build()?;
    let profile = diameter_profile(&f, &a.radii.0, a.samples)?;
    let prov = Provenance::new(seed)
        .sample("samples_per_circle", a.samples)
        .sample("refinement_rounds", metrics::REFINEMENT_ROUNDS);
    Ok(Outcome {
        csv: Some(profile.to_csv()),
        report: Report::new("diam", Some(name), to_value(a), to_value(&profile), prov),
        inconclusive: false,
    })
}

fn lip_cmd(a: &LipArgs, seed: u64) -> crate::Result<Outcome> {
    let e = HoloExpr::parse(&a.function)?;
    if e.uses_k() && a.k.is_none() {
        return Err(Error::MissingParameter);
    }
    let f = Bound::new(&e, a.k);
    let disk = Disk::new(a.center, a.radius)?;
    let est = lipschitz_estimate(&f, &disk, a.budget, seed)?;
    let mut result = json!({ "estimate": est });
    if let (Some(c), Some(r)) = (a.from_center, a.from_radius) {
        let src = Disk::new(c, r)?;
        let phi = Mobius::disk_to_disk(&src, &disk, a.rotation, a.alpha)?;
        let d = invariance_check(&f, &disk, &src, &phi, a.budget, seed)?;
        result["invariance"] = json!({ "source": src, "discrepancy": d });
    }
    let prov = Provenance::new(seed)
        .sample("budget", a.budget)
        .sample("starts", crate::optimize::STARTS)
        .sample("ascent_iterations", crate::optimize::ASCENT_ITERATIONS);
    Ok(Outcome {
        report: Report::new("lip", Some(a.function.clone()), to_value(a), result, prov),
        csv: None,
        inconclusive: false,
    })
}

fn marty_cmd(a: &MartyArgs, seed: u64) -> crate::Result<Outcome> {
    let e = HoloExpr::parse(&a.function)?;
    let ks = a.ks.as_ref().map_or_else(|| doubling_schedule(a.k_max), |k| k.0.clone());
    let cfg = MartyConfig { threshold: a.threshold, tail: a.tail, budget: a.budget, seed };
    let verdict = marty_test(&e, a.center, a.radius, &ks, &cfg)?;
    let mut csv = String::from("k,L\n");
    for (k, l) in &verdict.trace {
        let _ = writeln!(csv, "{k},{l}");
    }
    let prov = Provenance::new(seed).sample("budget", a.budget).sample("tail", a.tail).tolerance("threshold", a.threshold);
    Ok(Outcome {
        report: Report::new("marty", Some(a.function.clone()), to_value(a), to_value(&verdict), prov),
        csv: Some(csv),
        inconclusive: false,
    })
}

fn zalcman_provenance(seed: u64, z: &ZalcmanConfig) -> Provenance {
    Provenance::new(seed)
        .sample("grid_side", zalcman::GRID_SIDE)
        .sample("budget", z.budget)
        .tolerance("residual", z.tolerance)
        .tolerance("spread_floor", z.spread_floor)
        .tolerance("pair_step", zalcman::PAIR_STEP)
}

fn rescaling_outcome(command: &str, name: String, params: Value, result: Value, res: &RescalingResult, prov: Provenance) -> Outcome {
    Outcome {
        csv: Some(grid_csv(&res.limit_samples)),
        inconclusive: res.case_tag == CaseTag::Inconclusive,
        report: Report::new(command, Some(name), params, result, prov),
    }
}

fn zalcman_cmd(a: &ZalcmanArgs, seed: u64) -> crate::Result<Outcome> {
    let e = HoloExpr::parse(&a.function)?;
    let ks = a.ks.as_ref().map_or_else(|| zalcman::power_schedule(a.k_max_exp), |k| k.0.clone());
    let cfg = a.zalcman.config();
    let res = match (a.at, &a.zoom_radii) {
        (Some(at), Some(radii)) => zalcman::double_rescale(&e, at, &radii.0, &ks, &cfg)?,
        _ => zalcman::extract_rescaling(&e, &ks, &cfg)?,
    };
    let prov = zalcman_provenance(seed, &cfg);
    Ok(rescaling_outcome("zalcman", a.function.clone(), to_value(a), to_value(&res), &res, prov))
}

fn rescale_cmd(a: &RescaleArgs, seed: u64) -> crate::Result<Outcome> {
    let (f, name) = a.target.build()?;
    let cfg = PrincipleConfig {
        radii: a.radii.0.clone(),
        collapse: a.collapse,
        trace_threshold: a.trace_threshold,
        trace_tail: a.trace_tail,
        budget: a.budget,
        seed,
        zalcman: a.zalcman.config(),
        lv: LvConfig { diam_threshold: a.diam_threshold, ..LvConfig::default() },
        ..PrincipleConfig::default()
    };
    let p = singularity::rescaling_principle(&f, &cfg)?;
    let mut result = to_value(&p.result);
    result["branch"] = to_value(&p.branch);
    result["diameters"] = to_value(&p.diameters);
    result["halfdisk"] = to_value(&p.halfdisk.entries);
    result["unit_circle_diameters"] = to_value(&p.unit_circle_diameters);
    let prov = zalcman_provenance(seed, &cfg.zalcman)
        .sample("halfdisk_budget", cfg.budget)
        .sample("annulus_angles", cfg.annulus.angles)
        .sample("annulus_radii", cfg.annulus.radii)
        .tolerance("collapse", cfg.collapse)
        .tolerance("trace_threshold", cfg.trace_threshold)
        .tolerance("annulus_residual", cfg.annulus.tolerance)
        .tolerance("diam_threshold", cfg.lv.diam_threshold);
    Ok(rescaling_outcome("rescale", name, to_value(a), result, &p.result, prov))
}

fn lv_cmd(a: &LvArgs, seed: u64) -> crate::Result<Outcome> {
    let (f, name) = a.target.build()?;
    let cfg = LvConfig { diam_threshold: a.threshold, ..LvConfig::default() };
    let out = singularity::lv_witness(&f, &a.radii.0, &cfg)?;
    let mut csv = String::from("radius,diameter\n");
    if let LvOutcome::Witness(w) = &out {
        for (z, d) in w.second_centers.iter().zip(&w.diameters) {
            let _ = writeln!(csv, "{},{}", z.norm(), d);
        }
    }
    let prov = Provenance::new(seed)
        .sample("cluster_samples", cfg.cluster_samples)
        .sample("diameter_samples", cfg.diameter_samples)
        .tolerance("cluster_radius", cfg.cluster_radius)
        .tolerance("neighborhood_radius", cfg.neighborhood_radius)
        .tolerance("collapse", cfg.collapse)
        .tolerance("bisection", cfg.bisection_tolerance)
        .tolerance("diam_threshold", cfg.diam_threshold);
    Ok(Outcome {
        report: Report::new("lv", Some(name), to_value(a), to_value(&out), prov),
        csv: Some(csv),
        inconclusive: false,
    })
}

fn julia_cmd(a: &JuliaArgs, seed: u64) -> crate::Result<Outcome> {
    let (f, name) = a.target.build()?;
    let cfg = GrowthConfig { threshold: a.threshold, tail: a.tail };
    let p = singularity::julia_indicator(&f, &a.radii.0, &cfg)?;
    let mut csv = String::from("radius,sup,theta\n");
    for e in &p.entries {
        let _ = writeln!(csv, "{},{},{}", e.radius, e.sup, e.theta);
    }
    let prov = Provenance::new(seed)
        .sample("angle_samples", singularity_angle_samples())
        .sample("tail", a.tail)
        .tolerance("threshold", a.threshold);
    Ok(Outcome {
        report: Report::new("julia", Some(name), to_value(a), to_value(&p), prov),
        csv: Some(csv),
        inconclusive: false,
    })
}

fn singularity_angle_samples() -> usize {
    crate::singularity::ANGLE_SAMPLES
}

fn output_of(c: &Command) -> Option<&Output> {
    Some(match c {
        Command::Metrics(a) => &a.output,
        Command::Diam(a) => &a.output,
        Command::Lip(a) => &a.output,
        Command::Marty(a) => &a.output,
        Command::Zalcman(a) => &a.output,
        Command::Rescale(a) => &a.output,
        Command::Lv(a) => &a.output,
        Command::Julia(a) => &a.output,
        Command::Schema => return None,
    })
}

/// Run the tool on `args` (program name first) and return the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
        }
    };
    let Some(output) = output_of(&cli.command) else {
        println!("{SCHEMA}");
        return EXIT_OK;
    };
    let seed = match seed_of(output) {
        Ok(s) => s,
        Err(msg) => {
            eprintln!("error: {msg}");
            return EXIT_ERROR;
        }
    };
    let start = Instant::now();
    let outcome = match &cli.command {
        Command::Metrics(a) => metrics_cmd(a, seed),
        Command::Diam(a) => diam_cmd(a, seed),
        Command::Lip(a) => lip_cmd(a, seed),
        Command::Marty(a) => marty_cmd(a, seed),
        Command::Zalcman(a) => zalcman_cmd(a, seed),
        Command::Rescale(a) => rescale_cmd(a, seed),
        Command::Lv(a) => lv_cmd(a, seed),
        Command::Julia(a) => julia_cmd(a, seed),
        Command::Schema => unreachable!("handled above"),
    };
    let mut outcome = match outcome {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_ERROR;
        }
    };
    outcome.report.timing.elapsed_ms = start.elapsed().as_secs_f64() * 1e3;

    let json = outcome.report.to_json();
    match &output.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, json + "\n") {
                eprintln!("error: cannot write {}: {e}", path.display());
                return EXIT_ERROR;
            }
        }
        None => {
            let mut out = std::io::stdout().lock();
            if let Err(e) = writeln!(out, "{json}") {
                if e.kind() != std::io::ErrorKind::BrokenPipe {
                    eprintln!("error: {e}");
                    return EXIT_ERROR;
                }
            }
        }
    }
    if let Some(path) = &output.csv {
        match &outcome.csv {
            Some(csv) => {
                if let Err(e) = std::fs::write(path, csv) {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    return EXIT_ERROR;
                }
            }
            None => eprintln!("warning: {} has no plot data; --csv ignored", outcome.report.command),
        }
    }
    if outcome.inconclusive {
        EXIT_INCONCLUSIVE
    } else {
        EXIT_OK
    }
}
