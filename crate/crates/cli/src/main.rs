//! `quadcount`: run, verify and benchmark the 4-cycle counters on update streams.

mod config;
mod runner;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use quadcount::main_engine::{MHat, MainConfig};
use quadcount::oracle;
use quadcount::params::{self, OmegaModel, ParamSet, SolveOptions};
use quadcount::stream::{self, GenKind, GenSpec, LayeredSpec, Mode, Stream};
use quadcount::VertexRef;

use runner::EngineKind;

#[derive(Parser, Debug)]
#[command(name = "quadcount", version, about = "Exact fully dynamic 4-cycle counting")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Print the running 4-cycle total after every update.
    Run(RunArgs),
    /// Write a seeded workload stream.
    Gen(GenArgs),
    /// Replay a stream through an engine and the brute-force oracle in lockstep.
    Verify(RunArgs),
    /// Like run, and write per-update work metrics as CSV.
    Bench(RunArgs),
    /// Print the parameter constraint report as CSV.
    Params(ParamsArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    General,
    Layered,
}

#[derive(Args, Debug, Clone)]
struct RunArgs {
    /// Update stream file.
    stream: PathBuf,
    #[arg(long, value_enum)]
    engine: Option<EngineKind>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// `auto` or a fixed reference edge count.
    #[arg(long)]
    m_hat: Option<String>,
    /// `best`, `current`, or `eps,delta,eps1,eps2`.
    #[arg(long)]
    params: Option<String>,
    #[arg(long)]
    budget_multiplier: Option<u64>,
    /// key = value file; command-line flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Write final work counters as key=value lines.
    #[arg(long)]
    metrics: Option<PathBuf>,
    /// Bench CSV output path.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// After the run, print the number of 2-paths from layer-1 x to layer-3 y.
    #[arg(long, num_args = 2, value_names = ["X", "Y"])]
    wedges: Option<Vec<u32>>,
    /// Testing aid for verify: offset the engine's total from this update on.
    #[arg(long, hide = true)]
    inject_fault: Option<usize>,
}

#[derive(Args, Debug)]
struct GenArgs {
    #[arg(long, default_value = "uniform")]
    kind: GenKind,
    #[arg(long, default_value_t = 30)]
    n: u32,
    #[arg(long, default_value_t = 1000)]
    steps: usize,
    #[arg(long, default_value_t = 0.3)]
    delete_fraction: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Emit a layered A/B/C/D stream instead of a general one.
    #[arg(long)]
    layered: bool,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ParamsArgs {
    /// `best`, `current`, or `eps,delta,eps1,eps2`.
    #[arg(long, default_value = "best")]
    params: String,
    /// Solve for parameters at this resolution (e.g. 1/24) instead.
    #[arg(long)]
    solve: Option<String>,
    /// ω model for --solve: `best`, `table`, or `square:<omega>`.
    #[arg(long, default_value = "best")]
    model: String,
}

/// Failure with its process exit code.
#[derive(Debug)]
enum Failure {
    Usage(anyhow::Error),
    Parse(anyhow::Error),
    Engine(anyhow::Error),
    Divergence(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Parse(_) => 2,
            Failure::Engine(_) => 3,
            Failure::Divergence(_) => 4,
        }
    }
}

type Res<T> = std::result::Result<T, Failure>;

fn usage(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Usage(e.into())
}

/// Settings after merging the config file under the flags.
struct Settings {
    engine: EngineKind,
    mode: Mode,
    main: MainConfig,
    metrics: Option<PathBuf>,
    csv: Option<PathBuf>,
}

fn parse_params(s: &str) -> anyhow::Result<ParamSet> {
    match s {
        "best" => Ok(ParamSet::best_possible()),
        "current" => Ok(ParamSet::current_best()),
        _ => {
            let v: Vec<params::Q> = s.split(',').map(|t| params::qdec(t.trim())).collect::<Result<_, _>>()?;
            let [eps, delta, eps1, eps2] = <[params::Q; 4]>::try_from(v).map_err(|_| anyhow!("expected eps,delta,eps1,eps2"))?;
            Ok(ParamSet { eps, delta, eps1, eps2, omega: OmegaModel::BestPossible })
        }
    }
}

fn parse_model(s: &str) -> anyhow::Result<OmegaModel> {
    match s {
        "best" => Ok(OmegaModel::BestPossible),
        "table" => Ok(OmegaModel::current_best_table()),
        _ => match s.strip_prefix("square:") {
            Some(w) => Ok(OmegaModel::SquareInterp(params::qdec(w)?)),
            None => Err(anyhow!("unknown model {s:?}")),
        },
    }
}

fn settings(a: &RunArgs) -> Res<Settings> {
    let file = match &a.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display())).map_err(usage)?;
            config::parse(&text).map_err(usage)?
        }
        None => Default::default(),
    };
    let get = |k: &str| file.get(k).cloned();
    let engine = match a.engine {
        Some(e) => e,
        None => match get("engine") {
            Some(s) => EngineKind::from_str(&s, true).map_err(|e| usage(anyhow!(e)))?,
            None => EngineKind::Main,
        },
    };
    let mode = match a.mode {
        Some(ModeArg::General) => Mode::General,
        Some(ModeArg::Layered) => Mode::Layered,
        None => match get("mode").as_deref() {
            None | Some("general") => Mode::General,
            Some("layered") => Mode::Layered,
            Some(o) => return Err(usage(anyhow!("unknown mode {o:?}"))),
        },
    };
    let params = parse_params(&a.params.clone().or(get("params")).unwrap_or_else(|| "best".into())).map_err(usage)?;
    let m_hat = match a.m_hat.clone().or(get("m_hat")).as_deref() {
        None | Some("auto") => MHat::Auto,
        Some(n) => MHat::Fixed(n.parse().map_err(|_| usage(anyhow!("bad m_hat {n:?}")))?),
    };
    let budget_multiplier = match (a.budget_multiplier, get("budget_multiplier")) {
        (Some(b), _) => b,
        (None, Some(s)) => s.parse().map_err(|_| usage(anyhow!("bad budget_multiplier {s:?}")))?,
        (None, None) => params::DEFAULT_BUDGET_MULTIPLIER,
    };
    Ok(Settings {
        engine,
        mode,
        main: MainConfig { params, m_hat, budget_multiplier },
        metrics: a.metrics.clone().or(get("metrics").map(PathBuf::from)),
        csv: a.csv.clone().or(get("csv").map(PathBuf::from)),
    })
}

fn load(path: &Path, mode: Mode) -> Res<Stream> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display())).map_err(usage)?;
    stream::parse(&text, mode).map_err(|e| Failure::Parse(anyhow!("{}: {e}", path.display())))
}

fn engine_err(i: usize, e: quadcount::Error) -> Failure {
    Failure::Engine(anyhow!("update {}: {e}", i + 1))
}

fn write_file(path: &Path, body: &str) -> Res<()> {
    std::fs::write(path, body).with_context(|| format!("writing {}", path.display())).map_err(Failure::Engine)
}

fn run(a: &RunArgs, bench: bool) -> Res<()> {
    let s = settings(a)?;
    let stream = load(&a.stream, s.mode)?;
    let n = stream.len();
    let mut c = runner::build(s.engine, stream, &s.main).map_err(usage)?;
    let mut out = String::new();
    let mut csv = String::from("update,wall_ns,elementary_ops,job_backlog,rebuild\n");
    for i in 0..n {
        let before = c.snapshot();
        let t0 = Instant::now();
        let total = c.step(i).map_err(|e| engine_err(i, e))?;
        let wall = t0.elapsed().as_nanos();
        let after = c.snapshot();
        let _ = writeln!(out, "{total}");
        if bench {
            let rebuild = (after.rebuilds > before.rebuilds) as u8;
            let _ = writeln!(csv, "{},{wall},{},{},{rebuild}", i + 1, after.ops - before.ops, after.backlog);
        }
    }
    if let Some(w) = &a.wedges {
        let g = c.layered_graph().ok_or_else(|| usage(anyhow!("--wedges needs --mode layered")))?;
        let k = oracle::brute_2paths(g, VertexRef::new(1, w[0]), VertexRef::new(3, w[1])).map_err(|e| engine_err(n, e))?;
        let _ = writeln!(out, "wedges {} {} {k}", w[0], w[1]);
    }
    print!("{out}");
    if bench {
        let path = s.csv.clone().unwrap_or_else(|| PathBuf::from("bench.csv"));
        write_file(&path, &csv)?;
    }
    if let Some(p) = &s.metrics {
        write_file(p, &c.snapshot().render())?;
    }
    Ok(())
}

fn verify(a: &RunArgs) -> Res<()> {
    let s = settings(a)?;
    let stream = load(&a.stream, s.mode)?;
    let n = stream.len();
    let mut eng = runner::build(s.engine, stream.clone(), &s.main).map_err(usage)?;
    let mut ora = runner::build(EngineKind::Oracle, stream, &s.main).map_err(usage)?;
    for i in 0..n {
        let want = ora.step(i).map_err(|e| engine_err(i, e))?;
        let mut got = eng.step(i).map_err(|e| engine_err(i, e))?;
        if a.inject_fault.is_some_and(|k| i + 1 >= k) {
            got += 1;
        }
        if got != want {
            return Err(Failure::Divergence(format!("divergence at update {}: engine {got}, oracle {want}", i + 1)));
        }
    }
    println!("ok {n} updates");
    Ok(())
}

fn gen(a: &GenArgs) -> Res<()> {
    let s = if a.layered {
        let hub_bias = match a.kind {
            GenKind::Uniform => 0.0,
            GenKind::Hub => 0.5,
            GenKind::SlidingWindow => return Err(usage(anyhow!("sliding-window streams are general only"))),
        };
        let spec = LayeredSpec {
            n: a.n,
            steps: a.steps,
            delete_fraction: a.delete_fraction,
            hub_bias,
            seed: a.seed,
            ..LayeredSpec::default()
        };
        Stream::Layered(stream::gen_layered(&spec).map_err(usage)?)
    } else {
        let spec = GenSpec { kind: a.kind, n: a.n, steps: a.steps, delete_fraction: a.delete_fraction, seed: a.seed };
        Stream::General(stream::gen_general(&spec).map_err(usage)?)
    };
    let text = stream::write(&s);
    match &a.out {
        Some(p) => write_file(p, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn params_cmd(a: &ParamsArgs) -> Res<()> {
    let p = match &a.solve {
        Some(res) => {
            let res = params::qdec(res).map_err(usage)?;
            let model = parse_model(&a.model).map_err(usage)?;
            let p = params::solve_params(&model, &res, &SolveOptions::default()).map_err(|e| Failure::Engine(e.into()))?;
            eprintln!("eps={} delta={} eps1={} eps2={}", p.eps, p.delta, p.eps1, p.eps2);
            p
        }
        None => parse_params(&a.params).map_err(usage)?,
    };
    let mut out = String::from("name,lhs,rhs,slack\n");
    for r in params::constraint_report(&p) {
        let f = |x: &params::Q| format!("{:.9}", params::to_f64(x));
        let _ = writeln!(out, "{},{},{},{}", r.name, f(&r.lhs), f(&r.rhs), f(&r.slack()));
    }
    print!("{out}");
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let r = match &cli.cmd {
        Cmd::Run(a) => run(a, false),
        Cmd::Bench(a) => run(a, true),
        Cmd::Verify(a) => verify(a),
        Cmd::Gen(a) => gen(a),
        Cmd::Params(a) => params_cmd(a),
    };
    match r {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Divergence(msg) => println!("{msg}"),
                Failure::Usage(e) | Failure::Parse(e) | Failure::Engine(e) => eprintln!("error: {e:#}"),
            }
            ExitCode::from(f.code())
        }
    }
}
