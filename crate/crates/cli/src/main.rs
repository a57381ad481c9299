use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::json;

use plhomeo::certificate::Certificate;
use plhomeo::fibered2d::{find_relation_fibered, FiberedMap};
use plhomeo::linearcert::{matrix_relation_search, pingpong_check, PingPongData, ProjArc};
use plhomeo::num::{Mat2, Rational};
use plhomeo::pa2d::{pa_free_certificate, prescribed_derivative_homeo, PaMap, Point};
use plhomeo::perturb::{break_relation, PerturbError, Perturbable, PerturbationRun};
use plhomeo::pl1d::{bump_pl, random_pl, PlMap};
use plhomeo::projcircle::{classify_h_pair, fixed_points_proj, ProjCircleMap};
use plhomeo::structure1d::classify_pair;
use plhomeo::words::Word;

#[derive(Parser)]
#[command(name = "plhomeo", version, about = "Exact computation with piecewise-linear and piecewise-projective homeomorphisms")]
struct Cli {
    #[command(flatten)]
    budget: Budget,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Budget {
    /// Word length bound for witness searches.
    #[arg(long, global = true, default_value_t = 8)]
    depth: usize,
    /// Word length bound for relation searches.
    #[arg(long, global = true, default_value_t = 8)]
    max_len: usize,
    /// Number of perturbation steps allowed.
    #[arg(long, global = true, default_value_t = 4)]
    max_steps: usize,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads for the matrix relation search.
    #[arg(long, global = true, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    jobs: u64,
    /// Re-verify every emitted certificate from its serialized form.
    #[arg(long, global = true)]
    verify: bool,
    /// Write the result here instead of standard output.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Maps of the unit interval.
    #[command(subcommand)]
    Pl(PlCommand),
    /// Fibered maps of the unit square.
    #[command(subcommand)]
    Fibered(FiberedCommand),
    /// Piecewise-affine maps of the unit square.
    #[command(subcommand)]
    Pa(PaCommand),
    /// Pairs of 2x2 matrices.
    #[command(subcommand)]
    Matrix(MatrixCommand),
    /// Piecewise-projective maps of the projective line.
    #[command(subcommand)]
    Proj(ProjCommand),
    /// Breaking relations by local perturbation.
    #[command(subcommand)]
    Perturb(PerturbCommand),
    /// Re-verify a certificate file.
    Verify { certificate: PathBuf },
}

#[derive(Subcommand)]
enum PlCommand {
    Eval { map: PathBuf, x: String },
    Compose { f: PathBuf, g: PathBuf },
    Invert { map: PathBuf },
    Support { map: PathBuf },
    /// Identity outside [a, b], sending y to y + t.
    Bump { a: String, b: String, y: String, t: String },
    Random {
        #[arg(long, default_value_t = 4)]
        breaks: usize,
        #[arg(long, default_value_t = 16)]
        denom: i64,
    },
    /// Classify the group generated by a pair file {"f", "g"}.
    Classify { pair: PathBuf },
}

#[derive(Subcommand)]
enum FiberedCommand {
    Compose { f: PathBuf, g: PathBuf },
    /// The restriction to the vertical fiber over x.
    Fiber { map: PathBuf, x: String },
    Relation { pair: PathBuf },
}

#[derive(Subcommand)]
enum PaCommand {
    Compose { f: PathBuf, g: PathBuf },
    /// Maps fixing a point with prescribed linear parts, from {"a", "b"}.
    DerivativePair {
        matrices: PathBuf,
        #[arg(long, default_value = "1/2,1/2")]
        point: String,
        #[arg(long, default_value = "1/4")]
        radius: String,
    },
    /// Certify freeness of {"f", "g", "point"} through the linear parts.
    Freecheck { pair: PathBuf },
}

#[derive(Subcommand)]
enum MatrixCommand {
    Relations {
        pair: PathBuf,
        /// Search for relations up to sign.
        #[arg(long)]
        projective: bool,
    },
    /// Check the ping-pong arcs in "arcs", or the standard arcs if absent.
    Pingpong { pair: PathBuf },
}

#[derive(Subcommand)]
enum ProjCommand {
    Compose { f: PathBuf, g: PathBuf },
    Fixedpoints { map: PathBuf },
    /// Classify {"f", "g", "arc"} where both maps fix the arc.
    ClassifyH { pair: PathBuf },
}

#[derive(Subcommand)]
enum PerturbCommand {
    /// Break the relation in {"f", "g", "word", "point"}.
    Run {
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Space::Pl)]
        space: Space,
    },
    Replay {
        log: PathBuf,
        #[arg(long, value_enum, default_value_t = Space::Pl)]
        space: Space,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Space {
    Pl,
    Fibered,
}

enum Failure {
    Input(String),
    Verification(String),
}

struct Outcome {
    json: String,
    inconclusive: bool,
}

impl Outcome {
    fn value<T: Serialize>(v: &T) -> Self {
        Outcome { json: serde_json::to_string_pretty(v).expect("values serialize"), inconclusive: false }
    }
}

#[derive(Deserialize)]
struct Pair<T> {
    f: T,
    g: T,
}

#[derive(Deserialize)]
struct MatrixPair {
    a: Mat2,
    b: Mat2,
    #[serde(default)]
    arcs: Option<PingPongData>,
}

#[derive(Deserialize)]
struct PaInput {
    f: PaMap,
    g: PaMap,
    point: Point,
}

#[derive(Serialize)]
struct PaOutput<'a> {
    f: &'a PaMap,
    g: &'a PaMap,
    point: &'a Point,
}

#[derive(Deserialize)]
struct HInput {
    f: ProjCircleMap,
    g: ProjCircleMap,
    arc: ProjArc,
}

#[derive(Deserialize)]
#[serde(bound = "G: Perturbable")]
struct PerturbInput<G: Perturbable> {
    f: G,
    g: G,
    word: Word,
    point: G::Point,
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn rational(s: &str) -> Result<Rational, Failure> {
    s.parse().map_err(|e| Failure::Input(format!("{s:?}: {e}")))
}

fn point(s: &str) -> Result<Point, Failure> {
    let (x, y) = s.split_once(',').ok_or_else(|| Failure::Input(format!("expected x,y but got {s:?}")))?;
    Ok((rational(x)?, rational(y)?))
}

fn input<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Input(e.to_string())
}

fn emit(cert: Certificate, verify: bool) -> Result<Outcome, Failure> {
    let json = cert.to_json();
    if verify {
        let replayed = Certificate::replay(&json).map_err(|e| Failure::Verification(e.to_string()))?;
        if replayed.to_json() != json {
            return Err(Failure::Verification("replayed certificate differs from the emitted one".into()));
        }
    }
    Ok(Outcome { inconclusive: cert.claim().is_inconclusive(), json })
}

fn perturb_run<G: Perturbable>(path: &Path, budget: &Budget) -> Result<Outcome, Failure> {
    let inp: PerturbInput<G> = read_json(path)?;
    match break_relation(&inp.f, &inp.g, &inp.word, &inp.point, budget.max_steps) {
        Ok(run) => {
            if budget.verify {
                let reparsed: PerturbationRun<G> = serde_json::from_str(&run.to_json()).map_err(input)?;
                reparsed.replay().map_err(|e| Failure::Verification(e.to_string()))?;
            }
            Ok(Outcome { json: run.to_json(), inconclusive: false })
        }
        Err(PerturbError::Precondition(msg)) => Err(Failure::Input(msg)),
        Err(e) => Ok(Outcome {
            json: serde_json::to_string_pretty(&json!({"kind": "Inconclusive", "reason": e.to_string()}))
                .expect("values serialize"),
            inconclusive: true,
        }),
    }
}

fn perturb_replay<G: Perturbable>(path: &Path) -> Result<Outcome, Failure> {
    let run: PerturbationRun<G> = read_json(path)?;
    let log = run.replay().map_err(|e| Failure::Verification(e.to_string()))?;
    Ok(Outcome::value(&json!({"verified": true, "verification_log": log})))
}

fn run(cli: &Cli) -> Result<Outcome, Failure> {
    let b = &cli.budget;
    match &cli.command {
        Command::Pl(cmd) => match cmd {
            PlCommand::Eval { map, x } => {
                let f: PlMap = read_json(map)?;
                let x = rational(x)?;
                let value = f.eval(&x).map_err(input)?;
                Ok(Outcome::value(&json!({"x": x, "value": value})))
            }
            PlCommand::Compose { f, g } => {
                let (f, g): (PlMap, PlMap) = (read_json(f)?, read_json(g)?);
                Ok(Outcome::value(&f.compose(&g)))
            }
            PlCommand::Invert { map } => Ok(Outcome::value(&read_json::<PlMap>(map)?.inverse())),
            PlCommand::Support { map } => Ok(Outcome::value(&read_json::<PlMap>(map)?.support_fix())),
            PlCommand::Bump { a, b, y, t } => {
                let f = bump_pl(&rational(a)?, &rational(b)?, &rational(y)?, &rational(t)?).map_err(input)?;
                Ok(Outcome::value(&f))
            }
            PlCommand::Random { breaks, denom } => {
                Ok(Outcome::value(&random_pl(b.seed, *breaks, *denom).map_err(input)?))
            }
            PlCommand::Classify { pair } => {
                let p: Pair<PlMap> = read_json(pair)?;
                emit(classify_pair(&p.f, &p.g, b.depth), b.verify)
            }
        },
        Command::Fibered(cmd) => match cmd {
            FiberedCommand::Compose { f, g } => {
                let (f, g): (FiberedMap, FiberedMap) = (read_json(f)?, read_json(g)?);
                Ok(Outcome::value(&f.compose(&g)))
            }
            FiberedCommand::Fiber { map, x } => {
                let f: FiberedMap = read_json(map)?;
                Ok(Outcome::value(&f.fiber_restriction(&rational(x)?).map_err(input)?))
            }
            FiberedCommand::Relation { pair } => {
                let p: Pair<FiberedMap> = read_json(pair)?;
                emit(find_relation_fibered(&p.f, &p.g, b.max_len), b.verify)
            }
        },
        Command::Pa(cmd) => match cmd {
            PaCommand::Compose { f, g } => {
                let (f, g): (PaMap, PaMap) = (read_json(f)?, read_json(g)?);
                Ok(Outcome::value(&f.compose(&g)))
            }
            PaCommand::DerivativePair { matrices, point: p, radius } => {
                let m: MatrixPair = read_json(matrices)?;
                let (p, r) = (point(p)?, rational(radius)?);
                let f = prescribed_derivative_homeo(&m.a, &p, &r).map_err(input)?;
                let g = prescribed_derivative_homeo(&m.b, &p, &r).map_err(input)?;
                Ok(Outcome::value(&PaOutput { f: &f, g: &g, point: &p }))
            }
            PaCommand::Freecheck { pair } => {
                let p: PaInput = read_json(pair)?;
                let cert = pa_free_certificate(&p.f, &p.g, &p.point).map_err(Failure::Verification)?;
                emit(cert, b.verify)
            }
        },
        Command::Matrix(cmd) => match cmd {
            MatrixCommand::Relations { pair, projective } => {
                let m: MatrixPair = read_json(pair)?;
                emit(matrix_relation_search(&m.a, &m.b, b.max_len, *projective, b.jobs as usize), b.verify)
            }
            MatrixCommand::Pingpong { pair } => {
                let m: MatrixPair = read_json(pair)?;
                let arcs = m.arcs.unwrap_or_else(PingPongData::sanov);
                let cert = pingpong_check(&m.a, &m.b, &arcs).map_err(|e| Failure::Verification(e.0))?;
                emit(cert, b.verify)
            }
        },
        Command::Proj(cmd) => match cmd {
            ProjCommand::Compose { f, g } => {
                let (f, g): (ProjCircleMap, ProjCircleMap) = (read_json(f)?, read_json(g)?);
                Ok(Outcome::value(&f.compose(&g)))
            }
            ProjCommand::Fixedpoints { map } => {
                let record = fixed_points_proj(&read_json(map)?);
                if !record.verify() {
                    return Err(Failure::Verification("a listed point is not fixed".into()));
                }
                Ok(Outcome::value(&json!({"fixed_points": record, "verified": true})))
            }
            ProjCommand::ClassifyH { pair } => {
                let p: HInput = read_json(pair)?;
                emit(classify_h_pair(&p.f, &p.g, &p.arc, b.depth).map_err(input)?, b.verify)
            }
        },
        Command::Perturb(cmd) => match cmd {
            PerturbCommand::Run { input, space: Space::Pl } => perturb_run::<PlMap>(input, b),
            PerturbCommand::Run { input, space: Space::Fibered } => perturb_run::<FiberedMap>(input, b),
            PerturbCommand::Replay { log, space: Space::Pl } => perturb_replay::<PlMap>(log),
            PerturbCommand::Replay { log, space: Space::Fibered } => perturb_replay::<FiberedMap>(log),
        },
        Command::Verify { certificate } => {
            let text = fs::read_to_string(certificate).map_err(input)?;
            let cert = Certificate::replay(&text).map_err(|e| match e {
                plhomeo::certificate::CertError::Parse(m) => Failure::Input(m),
                plhomeo::certificate::CertError::Verification(m) => Failure::Verification(m),
            })?;
            emit(cert, false)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (outcome, code) = match run(&cli) {
        Ok(o) => {
            let code = if o.inconclusive { 3 } else { 0 };
            (o, code)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
        Err(Failure::Verification(msg)) => {
            eprintln!("verification failed: {msg}");
            return ExitCode::from(1);
        }
    };
    let text = outcome.json + "\n";
    let written = match &cli.budget.output {
        Some(path) => fs::write(path, text).map_err(|e| format!("{}: {e}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    };
    if let Err(msg) = written {
        eprintln!("error: {msg}");
        return ExitCode::from(2);
    }
    ExitCode::from(code)
}
