//! `planloop`: run experiments, generate problems, and inspect paths.
//!
//! Exit codes: 0 ok, 1 path incorrect (`verify`), 2 usage or missing file,
//! 3 authentication or transport failure, 4 domain error.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::AtomicBool;

use clap::{Parser, Subcommand, ValueEnum};

use planloop::closed_loop::{self, ExperimentConfig, ExperimentMetadata, RunSpec};
use planloop::geometry::{verify_path, PathCandidate};
use planloop::hints::{compute_hints, HintStrategy};
use planloop::llm::{self, parse_response, prompt, AgentConfig, LlmError, Provider, ScriptPolicy, ScriptedAgent};
use planloop::metrics::{self, Grouping, TableFormat};
use planloop::number;
use planloop::oracle::{self, Envelope, Objective, OracleConfig};
use planloop::problems::{self, GeneratorConfig, Problem, ProblemError};
use planloop::render::{render_image, RenderSettings};

#[derive(Parser)]
#[command(name = "planloop", version, about = "Closed-loop path planning with language-model agents")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the closed loop over a set of problems and write results JSONL.
    Run(RunArgs),
    /// Write seeded random problem files.
    Generate(GenerateArgs),
    /// Check a path; exits 0 only if it is correct.
    Verify(PathArgs),
    /// Print the feedback a strategy would give for a path.
    Hint(HintArgs),
    /// Render a problem (and optionally a path) to PNG.
    Render(RenderArgs),
    /// Solve a problem with the reference planner.
    Oracle(OracleArgs),
    /// Export oracle solutions as a fine-tuning dataset.
    ExportFinetune(ExportArgs),
    /// Aggregate a results JSONL into S%, N and PL.
    Report(ReportArgs),
}

#[derive(clap::Args)]
struct RunArgs {
    /// `suite`, a directory of problem files, or comma-separated suite names / files.
    #[arg(long, default_value = "suite")]
    problems: String,
    /// Hint strategy: none, C, CFP or CFPI.
    #[arg(long, default_value = "CFP", value_parser = parse_strategy)]
    strategy: HintStrategy,
    /// Agent as `provider:model`, e.g. `gpt4o:gpt-4o` or `scripted:follow-free-space`.
    #[arg(long, value_parser = parse_agent)]
    agent: AgentConfig,
    /// Runs per problem [default: 10 for the suite, 1 otherwise].
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    repeats: Option<u64>,
    /// Iteration budget per run [default: 20 for the suite, 5 otherwise].
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    max_iters: Option<u64>,
    /// Results JSONL; metadata goes to `<out>.meta.json`.
    #[arg(long, default_value = "results.jsonl")]
    out: PathBuf,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    workers: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Free-space hint slices.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    slice_count: Option<u64>,
    /// Sampling temperature; omitted to keep the provider default.
    #[arg(long)]
    temperature: Option<f64>,
    /// Request timeout in seconds.
    #[arg(long, default_value_t = 120.0)]
    timeout: f64,
    #[arg(long, default_value_t = 3)]
    max_retries: u32,
    /// Requests per minute shared by all workers.
    #[arg(long)]
    rpm: Option<u32>,
    /// Override the provider endpoint.
    #[arg(long)]
    base_url: Option<String>,
}

#[derive(clap::Args)]
struct GenerateArgs {
    /// Obstacles per problem.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    k: u64,
    #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u64).range(1..))]
    n_instances: u64,
    /// Instance i uses seed + i.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Regenerate until the oracle finds a path.
    #[arg(long)]
    require_solvable: bool,
    /// Tiles in the placement grid.
    #[arg(long, default_value_t = 9, value_parser = clap::value_parser!(u64).range(1..))]
    grid_tiles: u64,
    /// Relative tile expansion.
    #[arg(long, default_value_t = 0.2)]
    overlap: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(clap::Args)]
struct PathArgs {
    /// Problem file or suite name.
    problem: String,
    /// Inline `[[x, y], ...]` or `@file`.
    #[arg(long)]
    path: String,
    /// Print the report as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(clap::Args)]
struct HintArgs {
    problem: String,
    #[arg(long)]
    path: String,
    #[arg(long, default_value = "CFP", value_parser = parse_strategy)]
    strategy: HintStrategy,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    slice_count: Option<u64>,
    /// Print the hint bundle as JSON instead of the feedback message.
    #[arg(long)]
    json: bool,
    /// Where to write the image hint, if the strategy includes one.
    #[arg(long)]
    image_out: Option<PathBuf>,
}

#[derive(clap::Args)]
struct RenderArgs {
    problem: String,
    #[arg(long)]
    path: Option<String>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 512, value_parser = clap::value_parser!(u32).range(1..))]
    width: u32,
    #[arg(long, default_value_t = 512, value_parser = clap::value_parser!(u32).range(1..))]
    height: u32,
}

#[derive(Clone, Copy, ValueEnum)]
enum ObjectiveArg {
    MinLength,
    MinSegments,
}

#[derive(clap::Args)]
struct OracleArgs {
    problem: String,
    /// Print only `solvable` or `unsolvable`.
    #[arg(long)]
    decide: bool,
    #[arg(long, value_enum, default_value = "min-length")]
    objective: ObjectiveArg,
    /// Clearance as a fraction of the workspace diagonal.
    #[arg(long, default_value = "0.001")]
    epsilon_fraction: String,
}

#[derive(Clone, Copy, ValueEnum)]
enum EnvelopeArg {
    PromptCompletion,
    Chat,
}

#[derive(clap::Args)]
struct ExportArgs {
    #[arg(long)]
    problems: String,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "prompt-completion")]
    envelope: EnvelopeArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum GroupArg {
    ByProblem,
    ByObstacleCount,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Markdown,
}

#[derive(clap::Args)]
struct ReportArgs {
    results: PathBuf,
    #[arg(long, value_enum, default_value = "by-problem")]
    group: GroupArg,
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,
}

fn parse_strategy(s: &str) -> Result<HintStrategy, String> {
    HintStrategy::from_name(s).ok_or_else(|| format!("unknown strategy `{s}` (expected none, C, CFP or CFPI)"))
}

fn parse_agent(s: &str) -> Result<AgentConfig, String> {
    let config = AgentConfig::parse(s)?;
    if config.provider == Provider::Scripted {
        ScriptPolicy::parse(&config.model_id)?;
    }
    Ok(config)
}

enum CliError {
    Incorrect,
    Usage(String),
    Infrastructure(String),
    Domain(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Incorrect => 1,
            CliError::Usage(_) => 2,
            CliError::Infrastructure(_) => 3,
            CliError::Domain(_) => 4,
        }
    }
}

impl From<LlmError> for CliError {
    fn from(e: LlmError) -> Self {
        match e {
            LlmError::Script(m) => CliError::Usage(m),
            other => CliError::Infrastructure(other.to_string()),
        }
    }
}

type CliResult = Result<(), CliError>;

fn read_file(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))
}

fn write_file(path: &Path, bytes: &[u8]) -> CliResult {
    fs::write(path, bytes).map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))
}

fn load_problem_file(path: &Path) -> Result<Problem, CliError> {
    problems::load_problem(&read_file(path)?).map_err(|e| match e {
        ProblemError::Parse(_) | ProblemError::Invalid(_) => CliError::Domain(format!("{}: {e}", path.display())),
    })
}

/// A problem file path, or a handcrafted suite name.
fn load_one(spec: &str) -> Result<Problem, CliError> {
    let path = Path::new(spec);
    if path.is_file() {
        return load_problem_file(path);
    }
    problems::suite_problem(spec)
        .ok_or_else(|| CliError::Usage(format!("no problem file or suite problem named `{spec}`")))
}

fn load_many(spec: &str) -> Result<Vec<Problem>, CliError> {
    if spec == "suite" {
        return Ok(problems::handcrafted_suite());
    }
    let path = Path::new(spec);
    if path.is_dir() {
        let mut files: Vec<PathBuf> = fs::read_dir(path)
            .map_err(|e| CliError::Usage(format!("cannot list {spec}: {e}")))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        files.sort();
        if files.is_empty() {
            return Err(CliError::Usage(format!("no .json problem files in {spec}")));
        }
        return files.iter().map(|f| load_problem_file(f)).collect();
    }
    spec.split(',').map(|s| load_one(s.trim())).collect()
}

fn read_path(arg: &str) -> Result<PathCandidate, CliError> {
    let text = match arg.strip_prefix('@') {
        Some(file) => read_file(Path::new(file))?,
        None => arg.to_string(),
    };
    parse_response(&text)
        .map(|p| p.path())
        .map_err(|e| CliError::Usage(format!("cannot read path: {e}")))
}

fn is_suite(problems: &[Problem]) -> bool {
    problems.iter().all(|p| problems::suite_index(&p.name).is_some())
}

fn cmd_run(args: RunArgs) -> CliResult {
    let problems = load_many(&args.problems)?;
    let mut agent = args.agent;
    agent.temperature = args.temperature;
    agent.timeout = std::time::Duration::try_from_secs_f64(args.timeout)
        .ok()
        .filter(|d| !d.is_zero())
        .ok_or_else(|| CliError::Usage("--timeout must be positive".into()))?;
    agent.max_retries = args.max_retries;
    agent.requests_per_minute = args.rpm;
    agent.base_url = args.base_url;
    let mut strategy = args.strategy;
    if let Some(n) = args.slice_count {
        strategy.slice_count = n as usize;
    }
    let base = if is_suite(&problems) {
        ExperimentConfig::handcrafted(problems, strategy, agent)
    } else {
        ExperimentConfig::random(problems, strategy, agent)
    };
    let config = ExperimentConfig {
        repeats_per_problem: args.repeats.map_or(base.repeats_per_problem, |r| r as usize),
        max_iterations: args.max_iters.map_or(base.max_iterations, |m| m as usize),
        seed: args.seed,
        workers: args.workers as usize,
        ..base
    };
    config.validate().map_err(CliError::Usage)?;
    // Fail fast on missing credentials before any run starts.
    llm::build_agent(&config.agent)?;

    let factory = |_: &Problem, spec: RunSpec| -> Result<Box<dyn llm::Agent>, LlmError> {
        if config.agent.provider == Provider::Scripted {
            let policy = match ScriptPolicy::parse(&config.agent.model_id).map_err(LlmError::Script)? {
                ScriptPolicy::RandomWalk(s) => ScriptPolicy::RandomWalk(s.wrapping_add(spec.seed)),
                other => other,
            };
            return Ok(Box::new(ScriptedAgent::new(policy)));
        }
        llm::build_agent(&config.agent)
    };
    let mut file = fs::File::create(&args.out)
        .map_err(|e| CliError::Usage(format!("cannot create {}: {e}", args.out.display())))?;
    let cancel = AtomicBool::new(false);
    let started = closed_loop::unix_now();
    let outcome = closed_loop::run_experiment(&config, &factory, Some(&mut file), &cancel);
    let finished = closed_loop::unix_now();
    if let Some(e) = &outcome.sink_error {
        return Err(CliError::Usage(format!("writing {}: {e}", args.out.display())));
    }
    let meta = ExperimentMetadata::new(&config, &outcome, started, finished);
    let mut meta_path = args.out.clone().into_os_string();
    meta_path.push(".meta.json");
    let meta_json = serde_json::to_string_pretty(&meta).expect("metadata serializes");
    write_file(Path::new(&meta_path), format!("{meta_json}\n").as_bytes())?;

    let successes = outcome.records.iter().filter(|r| r.success).count();
    println!(
        "{} runs, {} successful; results in {}",
        outcome.records.len(),
        successes,
        args.out.display()
    );
    let infra: Vec<&String> = outcome.records.iter().filter_map(|r| r.error.as_ref()).collect();
    if let Some(first) = infra.first() {
        return Err(CliError::Infrastructure(format!("{} runs failed: {first}", infra.len())));
    }
    Ok(())
}

fn cmd_generate(args: GenerateArgs) -> CliResult {
    if !(args.overlap.is_finite() && args.overlap >= 0.0) {
        return Err(CliError::Usage("--overlap must be a non-negative number".into()));
    }
    fs::create_dir_all(&args.out).map_err(|e| CliError::Usage(format!("cannot create {}: {e}", args.out.display())))?;
    for i in 0..args.n_instances {
        let mut config = GeneratorConfig::new(args.k as usize, args.seed.wrapping_add(i));
        config.grid_tiles = args.grid_tiles as usize;
        config.overlap = args.overlap;
        config.require_solvable = args.require_solvable;
        let problem = problems::generate_random(&config).map_err(|e| CliError::Domain(e.to_string()))?;
        let file = args.out.join(format!("{}.json", problem.name));
        write_file(&file, problem.to_json().as_bytes())?;
    }
    println!("wrote {} problems to {}", args.n_instances, args.out.display());
    Ok(())
}

fn cmd_verify(args: PathArgs) -> CliResult {
    let problem = load_one(&args.problem)?;
    let path = read_path(&args.path)?;
    let report = verify_path(&problem, &path).map_err(|e| CliError::Usage(e.to_string()))?;
    if args.json {
        println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    } else {
        let yes = |b: bool| if b { "yes" } else { "no" };
        println!("starts in I: {}", yes(report.starts_in_initial));
        println!("ends in G: {}", yes(report.ends_in_goal));
        let waypoints = path.waypoints();
        for c in &report.segment_collisions {
            println!(
                "segment {} from {} to {} intersects obstacle {}",
                c.segment_index,
                waypoints[c.segment_index],
                waypoints[c.segment_index + 1],
                c.obstacle_index
            );
        }
        println!("{}", if report.is_correct { "correct" } else { "incorrect" });
    }
    if report.is_correct {
        Ok(())
    } else {
        Err(CliError::Incorrect)
    }
}

fn cmd_hint(args: HintArgs) -> CliResult {
    let problem = load_one(&args.problem)?;
    let path = read_path(&args.path)?;
    let mut strategy = args.strategy;
    if let Some(n) = args.slice_count {
        strategy.slice_count = n as usize;
    }
    let bundle = compute_hints(&problem, &path, &strategy, &RenderSettings::default())
        .map_err(|e| CliError::Usage(e.to_string()))?;
    if let (Some(out), Some(img)) = (&args.image_out, &bundle.image) {
        write_file(out, &img.pixels)?;
    }
    if args.json {
        println!("{}", serde_json::to_string_pretty(&bundle).expect("bundle serializes"));
    } else {
        match prompt::feedback_prompt(&bundle) {
            Ok(msg) => println!("{}", msg.text),
            Err(_) => println!("{}", prompt::NO_HINT_MESSAGE),
        }
    }
    Ok(())
}

fn cmd_render(args: RenderArgs) -> CliResult {
    let problem = load_one(&args.problem)?;
    let path = args.path.as_deref().map(read_path).transpose()?;
    let settings = RenderSettings { width: args.width, height: args.height, ..RenderSettings::default() };
    let image = render_image(&problem, path.as_ref(), &settings);
    write_file(&args.out, &image.pixels)?;
    println!("wrote {} ({}x{}, sha256 {})", args.out.display(), image.width, image.height, image.sha256);
    Ok(())
}

fn cmd_oracle(args: OracleArgs) -> CliResult {
    let problem = load_one(&args.problem)?;
    let fraction = number::parse_decimal(&args.epsilon_fraction)
        .ok()
        .filter(|f| *f > number::int(0) && *f < number::int(1))
        .ok_or_else(|| CliError::Usage("--epsilon-fraction must be a decimal in (0, 1)".into()))?;
    let config = OracleConfig {
        epsilon_fraction: fraction,
        objective: match args.objective {
            ObjectiveArg::MinLength => Objective::MinEuclideanLength,
            ObjectiveArg::MinSegments => Objective::MinSegments,
        },
    };
    let result = oracle::plan(&problem, &config);
    if args.decide {
        println!("{}", if result.solvable { "solvable" } else { "unsolvable" });
        return Ok(());
    }
    match (&result.path, result.cost) {
        (Some(path), Some(cost)) => {
            println!("{}", path.to_array_string());
            println!("cost: {cost}");
        }
        _ => println!("unsolvable"),
    }
    Ok(())
}

fn cmd_export(args: ExportArgs) -> CliResult {
    let problems = load_many(&args.problems)?;
    let records = oracle::export_finetune_dataset(&problems, &OracleConfig::default())
        .map_err(|e| CliError::Domain(e.to_string()))?;
    let envelope = match args.envelope {
        EnvelopeArg::PromptCompletion => Envelope::PromptCompletion,
        EnvelopeArg::Chat => Envelope::Chat,
    };
    write_file(&args.out, oracle::dataset_to_jsonl(&records, envelope).as_bytes())?;
    println!("wrote {} records to {}", records.len(), args.out.display());
    Ok(())
}

fn cmd_report(args: ReportArgs) -> CliResult {
    let text = read_file(&args.results)?;
    let records = closed_loop::read_records(&text)
        .map_err(|e| CliError::Domain(format!("{}: {e}", args.results.display())))?;
    let grouping = match args.group {
        GroupArg::ByProblem => Grouping::ByProblem,
        GroupArg::ByObstacleCount => Grouping::ByObstacleCount,
    };
    let rows = metrics::aggregate(&records, grouping).map_err(|e| CliError::Domain(e.to_string()))?;
    let flagged: usize = rows.iter().map(|r| r.flagged).sum();
    if flagged > 0 {
        eprintln!("warning: {flagged} records claimed success but did not re-verify");
    }
    let format = match args.format {
        FormatArg::Csv => TableFormat::Csv,
        FormatArg::Markdown => TableFormat::Markdown,
    };
    print!("{}", metrics::render_table(&rows, format));
    std::io::stdout().flush().ok();
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Generate(a) => cmd_generate(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Hint(a) => cmd_hint(a),
        Command::Render(a) => cmd_render(a),
        Command::Oracle(a) => cmd_oracle(a),
        Command::ExportFinetune(a) => cmd_export(a),
        Command::Report(a) => cmd_report(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match &e {
                CliError::Incorrect => {}
                CliError::Usage(m) | CliError::Infrastructure(m) | CliError::Domain(m) => {
                    eprintln!("error: {m}")
                }
            }
            ExitCode::from(e.code())
        }
    }
}
