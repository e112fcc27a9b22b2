use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use discset::awvd::{check_center_ownership, check_coverage_monotone, check_star_shaped};
use discset::bench::{corpus, run_bench, to_csv, BenchOptions};
use discset::exact::{exact_ds, exact_is, DEFAULT_NODE_BUDGET};
use discset::geom::{check_general_position, contains_object, ShapeKind};
use discset::instance::{bitset_from, generate_random, is_feasible, GeneratorConfig, Instance, Problem};
use discset::local_search::{local_search, verify_local_optimality, Exchange, LocalSearchConfig};
use discset::reductions::{embed_a1, embed_a3_strips, embed_a5_shadows, special3ds_from_cubic, CubicGraph};
use discset::Error;

#[derive(Parser)]
#[command(name = "discset", version, about = "Discrete independent/dominating set toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Shape {
    Disk,
    Square,
}

impl From<Shape> for ShapeKind {
    fn from(s: Shape) -> Self {
        match s {
            Shape::Disk => ShapeKind::Disk,
            Shape::Square => ShapeKind::Square,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Embedding {
    A1,
    A3,
    A5,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random instance.
    Gen {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value = "disk")]
        shape: Shape,
        #[arg(long, default_value_t = 80)]
        min_extent: i64,
        #[arg(long, default_value_t = 300)]
        max_extent: i64,
        #[arg(long, default_value_t = 1000)]
        window: i64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run local search and write the solution with its trace.
    Solve {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        problem: Problem,
        #[arg(long)]
        t: usize,
        /// Seed for the candidate ranking; 0 keeps index order.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        max_passes: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run an exact oracle.
    Exact {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        problem: Problem,
        #[arg(long, default_value_t = DEFAULT_NODE_BUDGET)]
        budget: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check general position, cell properties and, given a solution, its
    /// feasibility and local optimality.
    Verify {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        solution: Option<PathBuf>,
        /// Overrides the exchange bound recorded in the solution file.
        #[arg(long)]
        t: Option<usize>,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build the set system and embeddings from a cubic graph in DIMACS format.
    Reduce {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long, value_enum, value_delimiter = ',', default_value = "a1")]
        embed: Vec<Embedding>,
        #[arg(long, default_value_t = 1_000_000)]
        epsilon_scale: i64,
    },
    /// Sweep t over a seeded corpus (or given instances) and emit CSV.
    Bench {
        #[arg(long, default_value_t = 50)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        m: usize,
        #[arg(long, default_value_t = 30)]
        n: usize,
        #[arg(long, value_enum, value_delimiter = ',', default_value = "disk")]
        shape: Vec<Shape>,
        #[arg(long, value_delimiter = ',', default_value = "is")]
        problem: Vec<Problem>,
        #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
        t: Vec<usize>,
        #[arg(long, default_value_t = DEFAULT_NODE_BUDGET)]
        budget: u64,
        /// Write 0 for elapsed_ms so the CSV is byte-identical across runs.
        #[arg(long)]
        omit_timing: bool,
        /// Instance files to use instead of a generated corpus.
        #[arg(long = "instance")]
        instances: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum Failure {
    Lib(Error),
    Check(String),
    Budget(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Lib(Error::Io(e))
    }
}

type CmdResult = Result<(), Failure>;

#[derive(Serialize, Deserialize)]
struct SolutionFile {
    problem: Problem,
    t: usize,
    seed: u64,
    size: usize,
    selected: Vec<usize>,
    trace: TraceFile,
}

#[derive(Serialize, Deserialize)]
struct TraceFile {
    passes: usize,
    converged: bool,
    elapsed_ms: u128,
    exchanges: Vec<Exchange>,
}

fn emit(out: &Option<PathBuf>, text: &str) -> CmdResult {
    match out {
        Some(path) => fs::write(path, text)?,
        None => println!("{text}"),
    }
    Ok(())
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| {
        Failure::Lib(Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
    })
}

fn run(cmd: Command) -> CmdResult {
    match cmd {
        Command::Gen { seed, m, n, shape, min_extent, max_extent, window, out } => {
            let cfg = GeneratorConfig {
                min_extent,
                max_extent,
                window,
                ..GeneratorConfig::new(seed, m, n, shape.into())
            };
            emit(&out, &generate_random(&cfg)?.to_json())
        }
        Command::Solve { instance, problem, t, seed, max_passes, out } => {
            let inst = Instance::from_json(&read(&instance)?)?;
            let cfg = LocalSearchConfig { max_passes, order_seed: seed, ..LocalSearchConfig::new(t) };
            let (sol, trace) = local_search(&inst, problem, &cfg)?;
            let file = SolutionFile {
                problem,
                t,
                seed,
                size: sol.size(),
                selected: sol.indices(),
                trace: TraceFile {
                    passes: trace.passes,
                    converged: trace.converged,
                    elapsed_ms: trace.elapsed.as_millis(),
                    exchanges: trace.exchanges,
                },
            };
            emit(&out, &serde_json::to_string_pretty(&file).expect("solution serializes"))
        }
        Command::Exact { instance, problem, budget, out } => {
            let inst = Instance::from_json(&read(&instance)?)?;
            let result = match problem {
                Problem::Is => exact_is(&inst, budget),
                Problem::Ds => exact_ds(&inst, budget),
            };
            let text = serde_json::to_string_pretty(&json!({ "problem": problem, "result": result }))
                .expect("result serializes");
            emit(&out, &text)?;
            if result.proven {
                Ok(())
            } else {
                Err(Failure::Budget(format!("node budget {budget} exhausted")))
            }
        }
        Command::Verify { instance, solution, t, trials, seed, out } => {
            let inst = Instance::from_json(&read(&instance)?)?;
            verify(&inst, solution.as_deref(), t, trials, seed, &out)
        }
        Command::Reduce { graph, out_dir, embed, epsilon_scale } => {
            let g = CubicGraph::parse_dimacs(&read(&graph)?)?;
            let sys = special3ds_from_cubic(&g);
            fs::create_dir_all(&out_dir)?;
            let sys_path = out_dir.join("set_system.json");
            fs::write(&sys_path, sys.to_json())?;
            let mut outputs = vec![sys_path.display().to_string()];
            for e in embed {
                let (name, inst) = match e {
                    Embedding::A1 => ("a1_rectangles.json", embed_a1(&sys, epsilon_scale)?),
                    Embedding::A3 => ("a3_strips.json", embed_a3_strips(&sys)?),
                    Embedding::A5 => ("a5_shadows.json", embed_a5_shadows(&sys)?),
                };
                let path = out_dir.join(name);
                fs::write(&path, inst.to_json())?;
                outputs.push(path.display().to_string());
            }
            let summary = json!({
                "vertices": g.vertex_count(),
                "edges": g.edges().len(),
                "sets": sys.len(),
                "universe": sys.universe(),
                "outputs": outputs,
            });
            println!("{}", serde_json::to_string_pretty(&summary).expect("summary serializes"));
            Ok(())
        }
        Command::Bench { count, seed, m, n, shape, problem, t, budget, omit_timing, instances, out } => {
            let corpus = if instances.is_empty() {
                let kinds: Vec<ShapeKind> = shape.into_iter().map(Into::into).collect();
                corpus(count, seed, m, n, &kinds)?
            } else {
                instances
                    .iter()
                    .map(|p| Ok((p.display().to_string(), Instance::from_json(&read(p)?)?)))
                    .collect::<Result<Vec<_>, Failure>>()?
            };
            let opts = BenchOptions { problems: problem, ts: t, node_budget: budget, order_seed: 0, omit_timing };
            let csv = to_csv(&run_bench(&corpus, &opts)?);
            match out {
                Some(path) => fs::write(path, csv)?,
                None => print!("{csv}"),
            }
            Ok(())
        }
    }
}

fn verify(
    inst: &Instance,
    solution: Option<&Path>,
    t: Option<usize>,
    trials: usize,
    seed: u64,
    out: &Option<PathBuf>,
) -> CmdResult {
    let objects = inst.objects();
    let mut failures = Vec::new();
    let general_position = check_general_position(objects, inst.points());

    let nested = objects
        .iter()
        .enumerate()
        .any(|(i, a)| objects.iter().enumerate().any(|(j, b)| i != j && contains_object(a, b)));
    let (center, star) = if nested {
        (None, None)
    } else {
        (
            Some(check_center_ownership(objects, 0, seed)?),
            Some(check_star_shaped(objects, trials, seed)?),
        )
    };
    let monotone = check_coverage_monotone(objects, inst.points(), trials, seed);
    for (name, rep) in [("center_ownership", &center), ("star_shaped", &star)] {
        if rep.as_ref().is_some_and(|r| !r.is_clean()) {
            failures.push(format!("{name} violations"));
        }
    }
    if !monotone.is_clean() {
        failures.push("coverage_monotone violations".into());
    }

    let mut solution_report = serde_json::Value::Null;
    if let Some(path) = solution {
        let file: SolutionFile = serde_json::from_str(&read(path)?).map_err(|e| Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        let t = t.unwrap_or(file.t);
        let sel = bitset_from(inst.m(), &file.selected)?;
        let feasible = is_feasible(inst, &sel, file.problem);
        let locally_optimal = feasible && verify_local_optimality(inst, &sel, file.problem, t)?;
        if !feasible {
            failures.push(format!("solution is not {}-feasible", file.problem));
        } else if !locally_optimal {
            failures.push(format!("solution is not {t}-locally optimal"));
        }
        solution_report = json!({
            "problem": file.problem,
            "t": t,
            "size": sel.count_ones(..),
            "feasible": feasible,
            "locally_optimal": locally_optimal,
        });
    }

    let report = json!({
        "general_position_violations": general_position,
        "cell_checks_skipped": nested.then_some("instance has nested objects"),
        "center_ownership": center,
        "star_shaped": star,
        "coverage_monotone": monotone,
        "solution": solution_report,
        "failures": failures,
    });
    emit(out, &serde_json::to_string_pretty(&report).expect("report serializes"))?;
    if failures.is_empty() {
        Ok(())
    } else {
        Err(Failure::Check(failures.join("; ")))
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::Scale(_) => "scale",
        Error::IndexOutOfRange { .. } => "index_out_of_range",
        Error::Infeasible(_) => "infeasible",
        Error::Parse { .. } => "parse",
        Error::InvalidField { .. } => "invalid_field",
        Error::NotCubic(_) => "not_cubic",
        Error::MissingEdge(..) => "missing_edge",
        Error::NotSpecialShape(_) => "not_special_shape",
        Error::Construction(_) => "construction",
        Error::Precondition(_) => "precondition",
        Error::Io(_) => "io",
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let message = e.render().to_string();
            eprintln!("{}", json!({ "error": "usage", "message": message.trim_end(), "exit_code": 1 }));
            return ExitCode::from(1);
        }
    };
    let (code, kind, message) = match run(cli.command) {
        Ok(()) => return ExitCode::SUCCESS,
        Err(Failure::Lib(e)) => (2, error_kind(&e), e.to_string()),
        Err(Failure::Check(msg)) => (2, "verification_failed", msg),
        Err(Failure::Budget(msg)) => (3, "budget_exhausted", msg),
    };
    eprintln!("{}", json!({ "error": kind, "message": message, "exit_code": code }));
    ExitCode::from(code)
}
