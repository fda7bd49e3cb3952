use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use foamlab_core::cluster::{from_json, json_string, to_json, ClusterDocument, SvgStyle};
use foamlab_core::constructions::{decorate, mobius_image, scale_three_sided, PresetSpec};
use foamlab_core::desitter::verify_correspondence;
use foamlab_core::equilibrium::{classify, pressure_report, solve, SolveOptions};
use foamlab_core::geometry::MobiusMap;
use foamlab_core::variation::{continue_family, stability_report, tangent_dimension};
use foamlab_core::{Cluster, Error, TolerancePolicy};
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use thiserror::Error;

#[derive(Parser)]
#[command(name = "foamlab", version, about = "Planar soap-bubble cluster toolkit")]
struct Cli {
    /// Seed for randomized sub-steps (Mobius fuzzing, solver restarts).
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[arg(long, global = true, value_enum, default_value_t = Profile::Default)]
    tol_profile: Profile,

    #[command(subcommand)]
    verb: Verb,
}

#[derive(Clone, Copy, ValueEnum)]
enum Profile {
    Strict,
    Default,
    Loose,
}

impl Profile {
    fn policy(self) -> TolerancePolicy {
        match self {
            Profile::Strict => TolerancePolicy::strict(),
            Profile::Default => TolerancePolicy::default(),
            Profile::Loose => TolerancePolicy::loose(),
        }
    }
}

#[derive(Subcommand)]
enum Verb {
    /// Build a preset cluster.
    New(NewArgs),
    /// Validate and classify a cluster; exits 1 unless it is an equilibrium.
    Check(Input),
    /// Solve for an equilibrium with prescribed areas.
    Solve(SolveArgs),
    /// Region pressures; exits 1 when they depend on the path.
    Pressures(Input),
    /// Local dimension of the equilibrium family modulo rigid motions.
    Dim(DimArgs),
    /// Discrete second-variation spectrum and stability class.
    Stability(StabilityArgs),
    /// Apply a Mobius map given by coefficients or drawn from `--seed`.
    Mobius(MobiusArgs),
    /// Insert a three-sided bubble at a vertex.
    Decorate(DecorateArgs),
    /// Shrink (or grow) a three-sided bubble; factor 0 removes it.
    Shrink(ShrinkArgs),
    /// Check the junction triples in de Sitter space; exits 1 on failure.
    Desitter(DesitterArgs),
    /// Write an SVG picture.
    Render(RenderArgs),
    /// Follow the equilibrium family to new areas.
    Continue(ContinueArgs),
}

#[derive(Args)]
struct Input {
    /// Cluster JSON file.
    input: PathBuf,
}

#[derive(Args)]
struct Output {
    /// Output file; standard output when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct NewArgs {
    /// One of double, triple, four, two_lens, necklace, flower,
    /// quasi_two_lens, quasi_four, arc_triangle.
    kind: String,
    #[arg(long)]
    r1: Option<f64>,
    #[arg(long)]
    r2: Option<f64>,
    #[arg(long)]
    scale: Option<f64>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    areas: Option<Vec<f64>>,
    #[arg(long)]
    t_left: Option<f64>,
    #[arg(long)]
    t_right: Option<f64>,
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long)]
    lens: Option<f64>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    slide: Option<f64>,
    #[arg(long)]
    r_left: Option<f64>,
    #[arg(long)]
    r_right: Option<f64>,
    #[arg(long)]
    s: Option<f64>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    shape: Option<Vec<f64>>,
    #[command(flatten)]
    out: Output,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    input: Input,
    /// Target areas of regions 1..n; the current areas when omitted.
    #[arg(long, value_delimiter = ',')]
    areas: Option<Vec<f64>>,
    /// Solver settings as `key = value` lines.
    #[arg(long)]
    options: Option<PathBuf>,
    #[arg(long)]
    max_iter: Option<usize>,
    /// Extra attempts from jittered starts after a failure; needs `--seed`.
    #[arg(long, default_value_t = 0)]
    restarts: usize,
    #[command(flatten)]
    out: Output,
}

#[derive(Args)]
struct DimArgs {
    #[command(flatten)]
    input: Input,
    /// Hold the region areas fixed.
    #[arg(long)]
    fix_areas: bool,
}

#[derive(Args)]
struct StabilityArgs {
    #[command(flatten)]
    input: Input,
    /// Points per edge.
    #[arg(long, default_value_t = 64)]
    m: usize,
}

#[derive(Args)]
struct MobiusArgs {
    #[command(flatten)]
    input: Input,
    /// `a, b, c, d` of `(az + b) / (cz + d)` as eight reals (re, im pairs).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    coeffs: Option<Vec<f64>>,
    #[command(flatten)]
    out: Output,
}

#[derive(Args)]
struct DecorateArgs {
    #[command(flatten)]
    input: Input,
    #[arg(long)]
    vertex: usize,
    /// Circumradius of the inserted triangle in the normalized picture.
    #[arg(long, default_value_t = 0.1)]
    size: f64,
    #[command(flatten)]
    out: Output,
}

#[derive(Args)]
struct ShrinkArgs {
    #[command(flatten)]
    input: Input,
    /// The three-sided region.
    #[arg(long)]
    region: usize,
    #[arg(long, default_value_t = 0.0)]
    factor: f64,
    #[command(flatten)]
    out: Output,
}

#[derive(Args)]
struct DesitterArgs {
    #[command(flatten)]
    input: Input,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
}

#[derive(Args)]
struct RenderArgs {
    #[command(flatten)]
    input: Input,
    #[arg(long, default_value_t = 600.0)]
    width: f64,
    /// Fill regions by pressure.
    #[arg(long)]
    pressures: bool,
    #[command(flatten)]
    out: Output,
}

#[derive(Args)]
struct ContinueArgs {
    #[command(flatten)]
    input: Input,
    #[arg(long, value_delimiter = ',', required = true)]
    areas: Vec<f64>,
    #[arg(long, default_value_t = 10)]
    steps: usize,
    #[command(flatten)]
    out: Output,
}

#[derive(Debug, Error)]
enum Failure {
    /// Valid input, negative verdict.
    #[error("{0}")]
    Check(String),
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    NonConvergence(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Check(_) => 1,
            Failure::Input(_) => 2,
            Failure::NonConvergence(_) => 3,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::NonConvergence { .. } | Error::TopologyBreakdown(_) => Failure::NonConvergence(e.to_string()),
            Error::NotConcurrent { .. } | Error::PathInconsistent { .. } => Failure::Check(e.to_string()),
            Error::Domain(_) | Error::Structural(_) | Error::Parse(_) => Failure::Input(e.to_string()),
        }
    }
}

type Outcome = Result<(), Failure>;

fn read_cluster(path: &Path) -> Result<Cluster, Failure> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))?;
    from_json(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn emit(out: &Output, text: &str) -> Outcome {
    match &out.output {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::Input(format!("cannot write {}: {e}", p.display()))),
        None => {
            write_stdout(text);
            Ok(())
        }
    }
}

// a closed pipe downstream is not an error worth a panic
fn write_stdout(text: &str) {
    use std::io::Write;
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn print(v: &impl serde::Serialize) {
    write_stdout(&json_string(v));
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("foamlab: {f}");
            ExitCode::from(f.code())
        }
    }
}

fn run(cli: &Cli) -> Outcome {
    let policy = cli.tol_profile.policy();
    match &cli.verb {
        Verb::New(a) => new(a),
        Verb::Check(a) => check(&read_cluster(&a.input)?, &policy),
        Verb::Solve(a) => solve_verb(a, cli.seed),
        Verb::Pressures(a) => {
            let c = read_cluster(&a.input)?;
            let r = pressure_report(&c)?;
            print(&r);
            if r.defect > policy.pressure_defect * r.scale {
                return Err(Error::PathInconsistent { defect: r.defect / r.scale }.into());
            }
            Ok(())
        }
        Verb::Dim(a) => {
            let c = read_cluster(&a.input.input)?;
            let r = tangent_dimension(&c, a.fix_areas, &policy)?;
            print(&json!({ "fix_areas": a.fix_areas, "nullity": r.nullity, "gap_ratio": r.gap_ratio,
                "ambiguous": r.ambiguous, "singular_values": r.singular_values }));
            Ok(())
        }
        Verb::Stability(a) => {
            let c = read_cluster(&a.input.input)?;
            let r = stability_report(&c, a.m, &policy)?;
            let mut v = serde_json::to_value(&r).map_err(|e| Failure::Input(e.to_string()))?;
            v["classification"] = Value::String(r.classification.to_string());
            print(&v);
            Ok(())
        }
        Verb::Mobius(a) => mobius(a, cli.seed),
        Verb::Decorate(a) => {
            let c = read_cluster(&a.input.input)?;
            emit(&a.out, &to_json(&decorate(&c, a.vertex, a.size)?))
        }
        Verb::Shrink(a) => {
            let c = read_cluster(&a.input.input)?;
            emit(&a.out, &to_json(&scale_three_sided(&c, a.region, a.factor)?))
        }
        Verb::Desitter(a) => {
            let c = read_cluster(&a.input.input)?;
            let r = verify_correspondence(&c, a.tol)?;
            print(&r);
            if r.pass {
                Ok(())
            } else {
                Err(Failure::Check(format!(
                    "junctions off their geodesics (collinearity {:.3e}, spacing {:.3e}, antipodality {:.3e})",
                    r.max_collinearity, r.max_spacing, r.max_antipodality
                )))
            }
        }
        Verb::Render(a) => {
            let c = read_cluster(&a.input.input)?;
            let mut style = SvgStyle { width: a.width, ..SvgStyle::default() };
            if a.pressures {
                style.pressures = Some(pressure_report(&c)?.pressures);
            }
            emit(&a.out, &foamlab_core::cluster::to_svg(&c, &style))
        }
        Verb::Continue(a) => {
            let c = read_cluster(&a.input.input)?;
            let (path, err) = match continue_family(&c, &a.areas, a.steps, &SolveOptions::default()) {
                Ok(p) => (p, None),
                Err(partial) => (partial.path.clone(), Some(partial)),
            };
            let docs: Vec<ClusterDocument> = path.iter().map(ClusterDocument::from).collect();
            emit(&a.out, &json_string(&docs))?;
            match err {
                None => Ok(()),
                Some(p) => Err(Failure::NonConvergence(p.to_string())),
            }
        }
    }
}

fn new(a: &NewArgs) -> Outcome {
    let spec = PresetSpec::default_for(&a.kind)?;
    let mut v = serde_json::to_value(&spec).expect("presets serialize");
    let overrides: [(&str, Option<Value>); 14] = [
        ("r1", a.r1.map(Value::from)),
        ("r2", a.r2.map(Value::from)),
        ("scale", a.scale.map(Value::from)),
        ("areas", a.areas.clone().map(Value::from)),
        ("t_left", a.t_left.map(Value::from)),
        ("t_right", a.t_right.map(Value::from)),
        ("radius", a.radius.map(Value::from)),
        ("lens", a.lens.map(Value::from)),
        ("k", a.k.map(Value::from)),
        ("slide", a.slide.map(Value::from)),
        ("r_left", a.r_left.map(Value::from)),
        ("r_right", a.r_right.map(Value::from)),
        ("s", a.s.map(Value::from)),
        ("shape", a.shape.clone().map(Value::from)),
    ];
    for (flag, got, want) in [("areas", &a.areas, 3), ("shape", &a.shape, 2)] {
        if got.as_ref().is_some_and(|g| g.len() != want) {
            return Err(Failure::Input(format!("--{flag} takes {want} comma-separated values")));
        }
    }
    let obj = v.as_object_mut().expect("presets serialize as objects");
    for (key, val) in overrides {
        let Some(val) = val else { continue };
        if !obj.contains_key(key) {
            return Err(Failure::Input(format!("--{} does not apply to `{}`", key.replace('_', "-"), a.kind)));
        }
        obj.insert(key.into(), val);
    }
    let spec: PresetSpec = serde_json::from_value(v).map_err(|e| Failure::Input(e.to_string()))?;
    if matches!(spec, PresetSpec::ArcTriangle { .. }) {
        let t = spec.build_arc_triangle()?;
        let doc = json!({
            "kind": "arc_triangle",
            "vertices": t.vertices.iter().map(|p| [p.x, p.y]).collect::<Vec<_>>(),
            "bulges": t.arcs.iter().map(|a| a.bulge).collect::<Vec<_>>(),
            "interior_angles": t.interior_angles()?,
        });
        return emit(&a.out, &json_string(&doc));
    }
    emit(&a.out, &to_json(&spec.build()?))
}

fn check(c: &Cluster, policy: &TolerancePolicy) -> Outcome {
    let report = c.validate();
    if !report.is_valid() {
        let failed: Vec<&str> = report.failures().map(|f| f.name).collect();
        print(&json!({ "valid": false, "failed_checks": failed }));
        return Err(Failure::Check(format!("invalid cluster: {}", failed.join(", "))));
    }
    let cl = classify(c, policy.residual)?;
    print(&cl);
    match cl.verdict {
        foamlab_core::equilibrium::Verdict::Equilibrium => Ok(()),
        v => Err(Failure::Check(format!("verdict {v}"))),
    }
}

fn solve_verb(a: &SolveArgs, seed: Option<u64>) -> Outcome {
    let c = read_cluster(&a.input.input)?;
    let mut opts = match &a.options {
        Some(p) => {
            let text =
                std::fs::read_to_string(p).map_err(|e| Failure::Input(format!("cannot read {}: {e}", p.display())))?;
            SolveOptions::from_kv(&text)?
        }
        None => SolveOptions::default(),
    };
    if let Some(m) = a.max_iter {
        opts.max_iter = m;
    }
    let target = match &a.areas {
        Some(t) => t.clone(),
        None => c.region_areas()?,
    };
    let mut rng = match (a.restarts, seed) {
        (0, _) => None,
        (_, Some(s)) => Some(ChaCha8Rng::seed_from_u64(s)),
        (_, None) => return Err(Failure::Input("--restarts needs an explicit --seed".into())),
    };
    let mut result = solve(&c, &target, &opts);
    for _ in 0..a.restarts {
        if result.is_ok() {
            break;
        }
        let rng = rng.as_mut().expect("seeded above");
        let jitter = 1e-3 * c.diameter();
        let s: Vec<f64> = c.state().iter().map(|x| x + jitter * rng.gen_range(-1.0..1.0)).collect();
        result = solve(&c.with_state(&s), &target, &opts);
    }
    let out = result?;
    eprintln!("solved in {} iterations, residual {:.3e}", out.iterations, out.history.last().copied().unwrap_or(0.0));
    emit(&a.out, &to_json(&out.cluster))
}

fn mobius(a: &MobiusArgs, seed: Option<u64>) -> Outcome {
    let c = read_cluster(&a.input.input)?;
    let m = match (&a.coeffs, seed) {
        (Some(k), _) => {
            if k.len() != 8 {
                return Err(Failure::Input("--coeffs takes 8 comma-separated values".into()));
            }
            let z = |i: usize| Complex::new(k[2 * i], k[2 * i + 1]);
            MobiusMap::new(z(0), z(1), z(2), z(3))?
        }
        (None, Some(s)) => {
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            MobiusMap::random_off_disc(&mut rng, c.centroid(), c.diameter())
        }
        (None, None) => return Err(Failure::Input("give --coeffs or an explicit --seed".into())),
    };
    emit(&a.out, &to_json(&mobius_image(&c, &m)?))
}
