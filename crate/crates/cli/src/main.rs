//! `mechforge`: compile, plan, simulate, generate and bench from the shell.
//!
//! Exit codes: 0 success, 1 internal error, 2 unreadable or invalid input,
//! 3 compile, 4 mesh, 5 emit, 64 usage.

use clap::{Args, Parser, Subcommand};
use mechforge::emit::{estimate_print_time_with, read_manifest, PrintParams};
use mechforge::generation::{
    analyze, generate_spec, render_table, run_benchmark, GenerationContext, GenerationError,
    GenerativeClient, StubClient,
};
use mechforge::pipeline::{compile_artifacts, CompileOptions, PipelineError};
use mechforge::plan::{plan_workflow, read_plan, render_listing, write_plan};
use mechforge::sim::{read_topology, report, simulate, write_timeline, SimError, Topology};
use mechforge::spec::CellParams;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const EXIT_INTERNAL: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_USAGE: u8 = 64;

const PLAN_JSON: &str = "plan.json";
const TIMELINE_JSON: &str = "timeline.json";
const ANALYSIS_TXT: &str = "analysis.txt";
const SPEC_JSON: &str = "spec.json";

#[derive(Debug, Parser)]
#[command(
    name = "mechforge",
    version,
    about = "Planar mechanism compiler and production-line model"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compile a mechanism document into STL, G-code, manifest and SVG preview.
    Compile(CompileArgs),
    /// Plan robot assembly from a manifest.
    Plan(PlanArgs),
    /// Simulate print, delivery and assembly and print the stage table.
    Simulate(SimulateArgs),
    /// Turn a request into a mechanism document and compile it.
    Generate(GenerateArgs),
    /// Score recorded generations and print the results table.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
struct CellArgs {
    /// Assembly robots in the cell (1 or 2).
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u8).range(1..=2))]
    robots: u8,
}

impl CellArgs {
    fn cell(&self) -> CellParams {
        CellParams {
            num_manipulators: self.robots,
            ..CellParams::default()
        }
    }
}

#[derive(Debug, Args)]
struct BuildArgs {
    /// Radial clearance added to every hole, mm.
    #[arg(long, default_value_t = mechforge::compiler::DEFAULT_CLEARANCE_MM)]
    clearance: f64,
    /// Contouring grid cells across the larger side of each part.
    #[arg(long, default_value_t = mechforge::mesh::DEFAULT_RESOLUTION)]
    resolution: usize,
    /// Slicer layer height, mm.
    #[arg(long)]
    layer_height: Option<f64>,
    /// Perimeter loops per layer.
    #[arg(long)]
    perimeters: Option<u32>,
    /// Infill density in [0, 1].
    #[arg(long)]
    infill_density: Option<f64>,
    #[command(flatten)]
    cell: CellArgs,
}

impl BuildArgs {
    fn options(&self) -> CompileOptions {
        let d = PrintParams::default();
        CompileOptions {
            clearance: self.clearance,
            resolution: self.resolution,
            cell: self.cell.cell(),
            print: PrintParams {
                layer_height: self.layer_height.unwrap_or(d.layer_height),
                perimeters: self.perimeters.unwrap_or(d.perimeters),
                infill_density: self.infill_density.unwrap_or(d.infill_density),
                ..d
            },
        }
    }
}

#[derive(Debug, Args)]
struct CompileArgs {
    /// Mechanism document (JSON).
    spec: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    build: BuildArgs,
}

#[derive(Debug, Args)]
struct PlanArgs {
    /// Assembly manifest written by `compile`.
    manifest: PathBuf,
    /// Directory for plan.json; the listing always goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    cell: CellArgs,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Plan written by `plan`.
    plan: PathBuf,
    /// G-code whose print time drives the print stage.
    gcode: PathBuf,
    /// Line topology JSON; built-in defaults when absent.
    #[arg(long)]
    topology: Option<PathBuf>,
    /// Directory for timeline.json; the stage table always goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    cell: CellArgs,
}

#[derive(Debug, Args)]
struct GenerateArgs {
    /// Natural-language request, or @FILE to read it from a file.
    prompt: String,
    /// Output directory: analysis.txt, spec.json and all compile outputs.
    #[arg(long)]
    out: PathBuf,
    /// Directory with recorded analysis.txt and spec.json responses.
    #[arg(long, conflicts_with = "live")]
    stub: Option<PathBuf>,
    /// Call the model named by MODEL_ENDPOINT, MODEL_NAME and MODEL_API_KEY.
    #[arg(long)]
    live: bool,
    #[command(flatten)]
    build: BuildArgs,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// Fixture root: <model>/<mechanism>/{prompt.txt, analysis.txt, spec.json}.
    dir: PathBuf,
}

/// A failed command: exit code and message.
#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }

    fn input(message: impl Into<String>) -> Self {
        Failure::new(EXIT_INPUT, message)
    }
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        Failure::new(e.exit_code() as u8, e.to_string())
    }
}

impl From<SimError> for Failure {
    fn from(e: SimError) -> Self {
        match e {
            SimError::ResourceConflict { .. } => Failure::new(EXIT_INTERNAL, e.to_string()),
            _ => Failure::input(e.to_string()),
        }
    }
}

impl From<GenerationError> for Failure {
    fn from(e: GenerationError) -> Self {
        Failure::input(e.to_string())
    }
}

fn read(path: &Path) -> Result<Vec<u8>, Failure> {
    std::fs::read(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

/// Writes every file or none. Files are staged in a sibling temporary
/// directory; a fresh `out` is created by one rename, an existing one receives
/// one rename per file.
fn write_outputs(out: &Path, files: &BTreeMap<String, Vec<u8>>) -> Result<(), Failure> {
    let io = |what: &str, e: std::io::Error| Failure::new(EXIT_INTERNAL, format!("{what}: {e}"));
    let parent = match out.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    std::fs::create_dir_all(&parent).map_err(|e| io(&parent.display().to_string(), e))?;
    let stage = tempfile::Builder::new()
        .prefix(".mechforge-")
        .tempdir_in(&parent)
        .map_err(|e| io("staging directory", e))?;
    for (name, bytes) in files {
        let p = stage.path().join(name);
        if let Some(dir) = p.parent() {
            std::fs::create_dir_all(dir).map_err(|e| io(&dir.display().to_string(), e))?;
        }
        std::fs::write(&p, bytes).map_err(|e| io(&p.display().to_string(), e))?;
    }
    if !out.exists() {
        let staged = stage.keep();
        return std::fs::rename(&staged, out).map_err(|e| {
            let _ = std::fs::remove_dir_all(&staged);
            io(&out.display().to_string(), e)
        });
    }
    if !out.is_dir() {
        return Err(Failure::input(format!(
            "{} exists and is not a directory",
            out.display()
        )));
    }
    for name in files.keys() {
        let dst = out.join(name);
        if let Some(dir) = dst.parent() {
            std::fs::create_dir_all(dir).map_err(|e| io(&dir.display().to_string(), e))?;
        }
        std::fs::rename(stage.path().join(name), &dst)
            .map_err(|e| io(&dst.display().to_string(), e))?;
    }
    Ok(())
}

fn cmd_compile(args: &CompileArgs) -> Result<(), Failure> {
    let doc = read(&args.spec)?;
    let artifacts = compile_artifacts(&doc, &args.build.options())?;
    for w in &artifacts.warnings {
        eprintln!("warning: {w}");
    }
    write_outputs(&args.out, &artifacts.files)?;
    for name in artifacts.files.keys() {
        println!("{}", args.out.join(name).display());
    }
    println!("estimated print time: {:.2} min", artifacts.print_time_min);
    Ok(())
}

fn cmd_plan(args: &PlanArgs) -> Result<(), Failure> {
    let manifest =
        read_manifest(&read(&args.manifest)?).map_err(|e| Failure::input(e.to_string()))?;
    let plan =
        plan_workflow(&manifest, &args.cell.cell()).map_err(|e| Failure::input(e.to_string()))?;
    if let Some(out) = &args.out {
        write_outputs(
            out,
            &BTreeMap::from([(PLAN_JSON.to_owned(), write_plan(&plan))]),
        )?;
    }
    print!("{}", render_listing(&plan));
    Ok(())
}

fn cmd_simulate(args: &SimulateArgs) -> Result<(), Failure> {
    let plan = read_plan(&read(&args.plan)?).map_err(|e| Failure::input(e.to_string()))?;
    let gcode_bytes = read(&args.gcode)?;
    let topology = match &args.topology {
        Some(p) => read_topology(&read(p)?)?,
        None => Topology::default(),
    };
    let gcode = std::str::from_utf8(&gcode_bytes)
        .map_err(|e| Failure::input(format!("{}: {e}", args.gcode.display())))?;
    let minutes = estimate_print_time_with(gcode, topology.heatup_min)
        .map_err(|e| Failure::input(format!("{}: {e}", args.gcode.display())))?;
    let timeline = simulate(&plan, minutes, &topology, &args.cell.cell())?;
    if let Some(out) = &args.out {
        write_outputs(
            out,
            &BTreeMap::from([(TIMELINE_JSON.to_owned(), write_timeline(&timeline))]),
        )?;
    }
    print!("{}", report(&timeline));
    Ok(())
}

#[cfg(feature = "live")]
fn live_client() -> Result<Box<dyn GenerativeClient>, Failure> {
    use mechforge::generation::{HttpTransport, LiveClient};
    Ok(Box::new(LiveClient::from_env(HttpTransport::default())?))
}

#[cfg(not(feature = "live"))]
fn live_client() -> Result<Box<dyn GenerativeClient>, Failure> {
    Err(Failure::new(
        EXIT_USAGE,
        "--live needs a build with the `live` feature (cargo build --features live)",
    ))
}

fn cmd_generate(args: &GenerateArgs) -> Result<(), Failure> {
    let prompt = match args.prompt.strip_prefix('@') {
        Some(path) => String::from_utf8_lossy(&read(Path::new(path))?).into_owned(),
        None => args.prompt.clone(),
    };
    let client: Box<dyn GenerativeClient> = if args.live {
        live_client()?
    } else {
        match &args.stub {
            Some(dir) => Box::new(StubClient::from_dir(dir)?),
            None => Box::new(StubClient::default()),
        }
    };
    let ctx = GenerationContext::default();
    let analysis = analyze(&prompt, &ctx, client.as_ref())?;
    let document = generate_spec(&analysis, &ctx, client.as_ref())?;
    let mut artifacts = compile_artifacts(&document, &args.build.options())?;
    artifacts
        .files
        .insert(ANALYSIS_TXT.to_owned(), analysis.into_bytes());
    artifacts.files.insert(SPEC_JSON.to_owned(), document);
    write_outputs(&args.out, &artifacts.files)?;
    for name in artifacts.files.keys() {
        println!("{}", args.out.join(name).display());
    }
    Ok(())
}

fn cmd_bench(args: &BenchArgs) -> Result<(), Failure> {
    let table = run_benchmark(&args.dir)?;
    print!("{}", render_table(&table));
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match &cli.command {
        Command::Compile(a) => cmd_compile(a),
        Command::Plan(a) => cmd_plan(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Generate(a) => cmd_generate(a),
        Command::Bench(a) => cmd_bench(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
