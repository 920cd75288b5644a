//! `fiberloom derive|optimize|plan|enumerate <project>`

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use fiberloom::export::{path_export, render_svg, svg_file_name};
use fiberloom::ilp::enumerate_feasible;
use fiberloom::pattern::{layer_program, solve_all_layers, LayerSolution};
use fiberloom::plan::Planner;
use fiberloom::project::Project;
use fiberloom::report::*;

const PATHS_FILE: &str = "paths.txt";
const CHECK_FILE: &str = "check.json";

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Core(#[from] fiberloom::Error),
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use fiberloom::Error as E;
        match self {
            CliError::Usage(_) | CliError::Io { .. } => 2,
            CliError::Core(e) => match e {
                E::InfeasibleLayer { .. } => 3,
                E::JunctionTooTight { .. }
                | E::Layout { .. }
                | E::Geometry { .. }
                | E::Singular { .. }
                | E::SelfIntersection { .. }
                | E::DuplicatePoints(_)
                | E::ParameterRange { .. } => 4,
                E::Intractable { .. } => 5,
                _ => 2,
            },
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Records,
}

#[derive(Debug, Parser)]
#[command(name = "fiberloom", version, about = "Layered continuous-fiber patterns and Bezier path plans")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Project file (TOML).
    project: PathBuf,
    /// Number of layers; defaults to the project's `n_layers`.
    #[arg(long)]
    layers: Option<usize>,
    /// Residual exponent; defaults to the project's `p`.
    #[arg(long)]
    p: Option<f64>,
    /// Require at least one bundle on every realizable non-crossing connection.
    #[arg(long)]
    require_edge_bows: bool,
    #[arg(long, value_enum, default_value = "table")]
    format: Format,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Connections, loops and usage matrices.
    Derive(Common),
    /// Solve every layer and report the patterns.
    Optimize {
        #[command(flatten)]
        common: Common,
        /// Also write `patterns.json` here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Path plans, SVGs and path exports for solved layers.
    Plan {
        #[command(flatten)]
        common: Common,
        /// Pattern record written by `optimize --format records`; solved
        /// afresh when omitted.
        #[arg(long)]
        patterns: Option<PathBuf>,
        #[arg(long, conflicts_with = "all")]
        layer: Option<usize>,
        #[arg(long)]
        all: bool,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// All feasible loop counts of one layer, per sheet.
    Enumerate {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1)]
        layer: usize,
    },
}

fn load(c: &Common) -> Result<Project> {
    let mut p = Project::load(&c.project)?;
    if let Some(n) = c.layers {
        p.params.n_layers = n;
    }
    if let Some(x) = c.p {
        p.params.p = x;
    }
    p.params.require_edge_bows |= c.require_edge_bows;
    p.params.validate(&p.graph)?;
    Ok(p)
}

/// Writes via a temporary file in the target directory and renames it.
fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let io = |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).map_err(io)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(contents).map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("records serialize");
    s.push('\n');
    s
}

fn derive(c: &Common) -> Result<String> {
    let p = load(c)?;
    Ok(match c.format {
        Format::Table => derive_report(&p.graph),
        Format::Records => json(&GraphRecord::new(&p.name, &p.graph)),
    })
}

fn optimize(c: &Common, out: Option<&Path>) -> Result<String> {
    let p = load(c)?;
    let history = solve_all_layers(&p.graph, &p.params)?;
    let record = PatternRecord::new(&p.name, p.params.p, &history, &p.graph);
    if let Some(dir) = out {
        write_atomic(&dir.join("patterns.json"), json(&record).as_bytes())?;
    }
    Ok(match c.format {
        Format::Table => pattern_table(&history, &p.graph),
        Format::Records => json(&record),
    })
}

fn read_patterns(path: &Path, p: &Project) -> Result<Vec<LayerSolution>> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let record: PatternRecord = serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    if record.schema_version != RECORD_VERSION {
        return Err(CliError::Usage(format!(
            "{}: record version {} is not supported",
            path.display(),
            record.schema_version
        )));
    }
    for l in &record.layers {
        let fits = p
            .graph
            .sheets
            .get(l.sheet)
            .is_some_and(|s| s.loops.len() == l.x.len());
        if !fits {
            return Err(CliError::Usage(format!(
                "{}: layer {} does not match the project's sheets",
                path.display(),
                l.layer
            )));
        }
    }
    Ok(record.layers)
}

fn plan(c: &Common, patterns: Option<&Path>, layer: Option<usize>, all: bool, out: &Path) -> Result<String> {
    let p = load(c)?;
    let layers = match patterns {
        Some(path) => read_patterns(path, &p)?,
        None => solve_all_layers(&p.graph, &p.params)?.layers,
    };
    let chosen: Vec<&LayerSolution> = match (layer, all) {
        (Some(n), _) => {
            let l = layers.iter().find(|l| l.layer == n).ok_or_else(|| {
                CliError::Usage(format!("layer {n} is outside the history (1..={})", layers.len()))
            })?;
            vec![l]
        }
        (None, true) => layers.iter().collect(),
        (None, false) => return Err(CliError::Usage("give --layer N or --all".into())),
    };
    let planner = Planner::new(&p.graph, p.plan)?;
    let planned = chosen
        .par_iter()
        .map(|l| planner.plan_solution(l))
        .collect::<fiberloom::Result<Vec<_>>>()?;
    let mut checks = Vec::new();
    let mut plans = Vec::new();
    for (plan, report) in planned {
        let svg = render_svg(&plan, &p.graph, p.plan.fiber_width, true);
        write_atomic(&out.join(svg_file_name(plan.layer)), svg.as_bytes())?;
        checks.push(LayerCheck {
            layer: plan.layer,
            report,
            warnings: plan.warnings.clone(),
        });
        plans.push(plan);
    }
    write_atomic(&out.join(PATHS_FILE), path_export(&plans).as_bytes())?;
    let record = CheckRecord {
        schema_version: RECORD_VERSION,
        layers: checks,
    };
    write_atomic(&out.join(CHECK_FILE), json(&record).as_bytes())?;
    Ok(match c.format {
        Format::Table => check_text(&record.layers),
        Format::Records => json(&record),
    })
}

fn enumerate(c: &Common, layer: usize) -> Result<String> {
    if layer == 0 {
        return Err(CliError::Usage("layers are numbered from 1".into()));
    }
    let mut p = load(c)?;
    p.params.n_layers = layer - 1;
    let history = solve_all_layers(&p.graph, &p.params)?;
    let mut rows = Vec::new();
    for s in p.graph.sheets.iter().filter(|s| !s.loops.is_empty()) {
        let prog = layer_program(&p.graph, &p.params, s.id, layer, &history)?;
        rows.extend(mark_dominated(s.id, enumerate_feasible(&prog)?));
    }
    Ok(match c.format {
        Format::Table => feasible_table(layer, &rows),
        Format::Records => json(&FeasibleRecord {
            schema_version: RECORD_VERSION,
            layer,
            rows,
        }),
    })
}

fn run(cli: &Cli) -> Result<String> {
    match &cli.command {
        Command::Derive(c) => derive(c),
        Command::Optimize { common, out } => optimize(common, out.as_deref()),
        Command::Plan {
            common,
            patterns,
            layer,
            all,
            out,
        } => plan(common, patterns.as_deref(), *layer, *all, out),
        Command::Enumerate { common, layer } => enumerate(common, *layer),
    }
}

fn configure_threads() -> Result<()> {
    let Ok(v) = std::env::var("FIBERLOOM_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("FIBERLOOM_THREADS must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(e.to_string()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match configure_threads().and_then(|()| run(&cli)) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("fiberloom: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
