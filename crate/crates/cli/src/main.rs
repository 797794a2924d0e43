use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use arcsmith_core::count::{count_points, CountMode, PointCount, DEFAULT_ENUMERATION_LIMIT};
use arcsmith_core::graph::{match_report, minimal_model, DualGraph, GraphFile};
use arcsmith_core::harness::pipeline::check_applicable;
use arcsmith_core::harness::wedge::wedge_report;
use arcsmith_core::harness::{parse_tasks, run_pipeline, SurfaceDefinition};
use arcsmith_core::intersect::{local_intersection_multiplicity, LocalPair, Multiplicity};
use arcsmith_core::jet::{base_change, fiber_at, generate_jet_system, Fiber, JetSystem};
use arcsmith_core::{expr::format_polynomial, CoefficientRing};

mod text;

#[derive(Parser)]
#[command(
    name = "arcsmith",
    version,
    about = "Jet schemes, dual graphs and arc experiments for surface singularities"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Write the JSON result to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Stdout format.
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Json)]
    format: OutputFormat,
    /// Cap on q^(n m) for exhaustive enumeration.
    #[arg(long, global = true, env = "ARCSMITH_LIMIT")]
    limit: Option<u64>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Json,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Jet-scheme equations F_jq at one level.
    Jet {
        #[arg(long = "def")]
        definition: PathBuf,
        #[arg(long)]
        level: usize,
    },
    /// Special or generic fiber of a Z_(p) family.
    Fiber {
        #[arg(long = "def")]
        definition: PathBuf,
        #[arg(long)]
        at: Fiber,
        /// Also report jet statistics at this level.
        #[arg(long)]
        level: Option<usize>,
    },
    /// Points of the level-M jet scheme over F_q.
    Count {
        #[arg(long = "def")]
        definition: PathBuf,
        #[arg(long)]
        level: usize,
        #[arg(long)]
        q: u64,
        /// Estimate from this many uniform samples instead of enumerating.
        #[arg(long)]
        sample: Option<u64>,
        #[arg(long, requires = "sample")]
        seed: Option<u64>,
    },
    /// Dual-graph calculus.
    Graph {
        #[arg(value_enum)]
        action: GraphAction,
        #[arg(long)]
        g1: PathBuf,
        #[arg(long)]
        g2: Option<PathBuf>,
    },
    /// Local intersection multiplicity at the origin of two curves in x, y.
    Intersect {
        #[arg(long)]
        f: String,
        #[arg(long)]
        g: String,
        #[arg(long, default_value = "Q")]
        field: CoefficientRing,
        #[arg(long, default_value_t = 16)]
        cap: usize,
    },
    /// Wedge of a chart-coordinate arc, e.g. --arc "0, t^2, t^3".
    Wedge {
        #[arg(long = "def")]
        definition: PathBuf,
        #[arg(long)]
        arc: String,
        #[arg(long)]
        frame: String,
        #[arg(long, default_value_t = 6)]
        precision: usize,
    },
    /// Run pipeline tasks and persist the report.
    Run {
        #[arg(long = "def")]
        definition: PathBuf,
        /// Comma-separated: jet, fibers, counts, graphs, condition_no, intersections, or all.
        #[arg(long, default_value = "")]
        tasks: String,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum GraphAction {
    Minimal,
    Nr,
    Match,
}

fn load_definition(path: &Path) -> Result<(SurfaceDefinition, Vec<u8>)> {
    SurfaceDefinition::load(path).with_context(|| format!("loading {}", path.display()))
}

fn load_graph(path: &Path) -> Result<(DualGraph, GraphFile)> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let file: GraphFile =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let g = DualGraph::new(file.vertices.clone(), &file.edges)
        .with_context(|| format!("graph {}", path.display()))?;
    Ok((g, file))
}

fn emit<T: Serialize>(common: &Common, value: &T, text: impl FnOnce() -> String) -> Result<()> {
    let mut json = serde_json::to_string_pretty(value)?;
    json.push('\n');
    if let Some(path) = &common.out {
        fs::write(path, &json).with_context(|| format!("writing {}", path.display()))?;
    }
    match (common.format, &common.out) {
        (OutputFormat::Text, _) => print!("{}", text()),
        (OutputFormat::Json, None) => print!("{json}"),
        (OutputFormat::Json, Some(_)) => {}
    }
    Ok(())
}

#[derive(Serialize)]
struct JetOutput<'a> {
    ring: String,
    level: usize,
    variables: Vec<String>,
    statistics: arcsmith_core::jet::JetStatistics,
    system: &'a JetSystem,
    equations: Vec<Vec<String>>,
}

fn jet_output(js: &JetSystem) -> JetOutput<'_> {
    let names = js.variable_names();
    JetOutput {
        ring: js.ring().to_string(),
        level: js.level(),
        statistics: js.statistics(),
        equations: js
            .equations()
            .iter()
            .map(|row| row.iter().map(|p| format_polynomial(p, &names)).collect())
            .collect(),
        variables: names,
        system: js,
    }
}

#[derive(Serialize)]
struct FiberOutput {
    fiber: Fiber,
    ring: String,
    variables: Vec<String>,
    relations: Vec<String>,
    statistics: Option<arcsmith_core::jet::JetStatistics>,
}

fn run(cli: Cli) -> Result<ExitCode> {
    let common = &cli.common;
    let limit = common.limit.unwrap_or(DEFAULT_ENUMERATION_LIMIT);
    match cli.command {
        Command::Jet { definition, level } => {
            let (def, _) = load_definition(&definition)?;
            let js = generate_jet_system(&def.triple()?, level)?;
            let out = jet_output(&js);
            emit(common, &out, || {
                text::jet(&out.statistics, &out.equations, &js)
            })?;
        }
        Command::Fiber {
            definition,
            at,
            level,
        } => {
            let (def, _) = load_definition(&definition)?;
            let f = fiber_at(&def.triple()?, at)?;
            let statistics = level
                .map(|m| generate_jet_system(&f, m))
                .transpose()?
                .map(|js| js.statistics());
            let out = FiberOutput {
                fiber: at,
                ring: f.ring().to_string(),
                variables: f.variables().to_vec(),
                relations: f.relation_strings(),
                statistics,
            };
            emit(common, &out, || {
                text::fiber(&out.ring, &out.relations, out.statistics.as_ref())
            })?;
        }
        Command::Count {
            definition,
            level,
            q,
            sample,
            seed,
        } => {
            let (def, _) = load_definition(&definition)?;
            let tri = def.triple()?;
            let field = CoefficientRing::prime_field(q)?;
            if !tri.ring().maps_to(&field) {
                bail!("no ring map {} -> {field}", tri.ring());
            }
            let js = generate_jet_system(&base_change(&tri, field)?, level)?;
            let mode = match sample {
                Some(budget) => CountMode::Sampled {
                    budget,
                    seed: seed
                        .or(def.experiment.seed)
                        .context("--sample needs --seed or experiment.seed")?,
                },
                None => CountMode::Exhaustive,
            };
            let pc: PointCount = count_points(&js, mode, limit)?;
            emit(common, &pc, || text::count(&pc))?;
        }
        Command::Graph { action, g1, g2 } => {
            let (a, _) = load_graph(&g1)?;
            match action {
                GraphAction::Minimal => {
                    let mm = minimal_model(&a);
                    emit(common, &mm, || text::minimal(&a, &mm))?;
                }
                GraphAction::Nr => {
                    let mm = minimal_model(&a);
                    let out =
                        serde_json::json!({ "n_r": mm.graph.len(), "essential": mm.essential });
                    emit(common, &out, || format!("N_r = {}\n", mm.graph.len()))?;
                }
                GraphAction::Match => {
                    let Some(g2) = g2 else {
                        bail!("graph match needs --g2")
                    };
                    let (b, _) = load_graph(&g2)?;
                    let r = match_report(&a, &b)?;
                    emit(common, &r, || text::matching(&r))?;
                }
            }
        }
        Command::Intersect { f, g, field, cap } => {
            let pair = LocalPair::parse(field, &f, &g)?;
            let m: Multiplicity = local_intersection_multiplicity(&pair, cap)?;
            emit(common, &m, || match m {
                Multiplicity::Finite {
                    multiplicity,
                    stabilized_at,
                } => {
                    format!("multiplicity {multiplicity} (stabilized at degree {stabilized_at})\n")
                }
                Multiplicity::NotIsolated { cap } => {
                    format!("not isolated (no stabilization up to degree {cap})\n")
                }
            })?;
        }
        Command::Wedge {
            definition,
            arc,
            frame,
            precision,
        } => {
            let (def, _) = load_definition(&definition)?;
            let r = wedge_report(&def, &arc, &frame, precision)?;
            emit(common, &r, || text::wedge(&r))?;
        }
        Command::Run { definition, tasks } => {
            let (def, bytes) = load_definition(&definition)?;
            let tasks = parse_tasks(&tasks).map_err(anyhow::Error::msg)?;
            check_applicable(&def, &tasks)?;
            let report = run_pipeline(&def, &bytes, &tasks, common.limit)?;
            let json = report.to_json();
            if let Some(path) = &common.out {
                fs::write(path, &json).with_context(|| format!("writing {}", path.display()))?;
            }
            match (common.format, &common.out) {
                (OutputFormat::Text, _) => print!("{}", text::report(&report)),
                (OutputFormat::Json, None) => print!("{json}"),
                (OutputFormat::Json, Some(_)) => {}
            }
            return Ok(ExitCode::from(report.exit_code() as u8));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
