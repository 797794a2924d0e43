use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::definition::{DefinitionError, SurfaceDefinition};
use crate::arc::{sample_condition_no, ConditionNoReport, LiftConfig};
use crate::count::{
    count_points, CountMode, DimensionTable, PointCount, DEFAULT_ENUMERATION_LIMIT,
};
use crate::expr::format_polynomial;
use crate::graph::{
    check_goodness, family_invariance_check, intersection_matrix, is_negative_definite,
    minimal_model, DualGraph, Goodness, InvarianceReport,
};
use crate::heuristic::Heuristic;
use crate::intersect::{local_intersection_multiplicity, Multiplicity};
use crate::jet::{
    base_change, certify_projection, fiber_at, generate_jet_system, Fiber, JetStatistics,
    JetSystem, NiceTriplePresentation,
};
use crate::ring::CoefficientRing;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Jet,
    Fibers,
    Counts,
    Graphs,
    ConditionNo,
    Intersections,
}

impl Task {
    pub const ALL: [Task; 6] = [
        Task::Jet,
        Task::Fibers,
        Task::Counts,
        Task::Graphs,
        Task::ConditionNo,
        Task::Intersections,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Task::Jet => "jet",
            Task::Fibers => "fibers",
            Task::Counts => "counts",
            Task::Graphs => "graphs",
            Task::ConditionNo => "condition_no",
            Task::Intersections => "intersections",
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Task {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Task::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| {
                format!("unknown task `{s}` (expected jet, fibers, counts, graphs, condition_no or intersections)")
            })
    }
}

/// Comma-separated task names (or `all`), returned in execution order.
pub fn parse_tasks(s: &str) -> Result<Vec<Task>, String> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        if part == "all" {
            out.extend(Task::ALL);
        } else {
            out.push(part.parse()?);
        }
    }
    out.sort();
    out.dedup();
    Ok(out)
}

/// Rejects tasks the definition has no data for.
pub fn check_applicable(def: &SurfaceDefinition, tasks: &[Task]) -> Result<(), DefinitionError> {
    let localized = matches!(def.ring, CoefficientRing::LocalizedIntegers(_));
    for t in tasks {
        let problem = match t {
            Task::Fibers if !localized => Some("needs a family over Z_(p)"),
            Task::Graphs if def.graphs.special.is_none() && def.graphs.generic.is_none() => {
                Some("needs [graphs.special] or [graphs.generic]")
            }
            Task::ConditionNo if !localized => Some("needs a family over Z_(p)"),
            Task::ConditionNo if def.frames.is_empty() => Some("no chart frame supplied"),
            Task::ConditionNo if def.experiment.condition_no.is_none() => {
                Some("needs [experiment.condition_no]")
            }
            _ => None,
        };
        if let Some(p) = problem {
            return Err(DefinitionError::Invalid(format!("task {t}: {p}")));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ToolInfo {
    pub name: &'static str,
    pub version: &'static str,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InputInfo {
    pub name: String,
    pub ring: String,
    pub sha256: String,
    pub seed: Option<u64>,
    pub enumeration_limit: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct JetLevel {
    pub statistics: JetStatistics,
    /// `equations[j-1][q-1]` is `F_jq`.
    pub equations: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProjectionCheck {
    pub m_hi: usize,
    pub m_lo: usize,
    pub certified: bool,
    pub certified_equations: usize,
    pub detail: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BaseChangeCheck {
    pub target: String,
    pub level: usize,
    pub commutes: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct JetSection {
    pub relations: Vec<String>,
    pub levels: Vec<JetLevel>,
    pub projections: Vec<ProjectionCheck>,
    pub base_change: Vec<BaseChangeCheck>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FiberSummary {
    pub ring: String,
    pub relations: Vec<String>,
    pub statistics: Vec<JetStatistics>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FibersSection {
    pub special: FiberSummary,
    pub generic: FiberSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountEntry {
    pub q: u64,
    pub level: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result: Option<PointCount>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub skipped: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountsSection {
    pub entries: Vec<CountEntry>,
    pub dimension: DimensionTable,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GraphSummary {
    pub vertices: usize,
    pub matrix: Vec<Vec<i64>>,
    pub negative_definite: bool,
    pub goodness: Result<Goodness, String>,
    pub minimal_matrix: Vec<Vec<i64>>,
    pub essential: Vec<u32>,
    pub contracted: Vec<u32>,
    pub n_r: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GraphsSection {
    pub special: Option<GraphSummary>,
    pub generic: Option<GraphSummary>,
    pub comparison: Option<InvarianceReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntersectionEntry {
    pub label: String,
    pub field: String,
    pub f: String,
    pub g: String,
    pub result: Multiplicity,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntersectionsSection {
    pub entries: Vec<IntersectionEntry>,
    /// Sum over all entries when every one is isolated.
    pub total: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NrValues {
    pub special: Option<usize>,
    pub generic: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NnStatus {
    pub computed: bool,
    pub reason: &'static str,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NashCounting {
    pub n_r: NrValues,
    pub n_n: NnStatus,
    /// `N_n <= N_r` is reported as context, never checked.
    pub inequality: &'static str,
    pub inequality_asserted: bool,
    pub heuristic: Heuristic,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ComponentEvidence {
    pub implemented: bool,
    pub note: &'static str,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct OracleTally {
    pub passed: usize,
    pub failed: usize,
    pub checks: Vec<Check>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TaskError {
    pub task: Task,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub schema: u32,
    pub tool: ToolInfo,
    pub input: InputInfo,
    pub tasks: Vec<Task>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub jet: Option<JetSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fibers: Option<FibersSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counts: Option<CountsSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub graphs: Option<GraphsSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub condition_no: Option<ConditionNoReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub intersections: Option<IntersectionsSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nash_counting: Option<NashCounting>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub component_evidence: Option<ComponentEvidence>,
    /// Internal certifications: truncation maps, base change, fiber coherence.
    pub certifications: OracleTally,
    pub task_errors: Vec<TaskError>,
}

impl ExperimentReport {
    /// 0 when every certification passed and no task failed, else 1.
    pub fn exit_code(&self) -> i32 {
        if self.certifications.failed == 0 && self.task_errors.is_empty() {
            0
        } else {
            1
        }
    }

    /// Pretty JSON with a trailing newline; identical inputs give identical bytes.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn grid(js: &JetSystem) -> Vec<Vec<String>> {
    let names = js.variable_names();
    js.equations()
        .iter()
        .map(|row| row.iter().map(|p| format_polynomial(p, &names)).collect())
        .collect()
}

struct Run<'a> {
    def: &'a SurfaceDefinition,
    tri: NiceTriplePresentation,
    limit: u64,
    report: ExperimentReport,
}

impl Run<'_> {
    fn certify(&mut self, name: String, passed: bool, detail: String) {
        let c = &mut self.report.certifications;
        if passed {
            c.passed += 1;
        } else {
            c.failed += 1;
        }
        c.checks.push(Check {
            name,
            passed,
            detail,
        });
    }

    fn fail(&mut self, task: Task, message: impl fmt::Display) {
        self.report.task_errors.push(TaskError {
            task,
            message: message.to_string(),
        });
    }

    fn levels(&self) -> Vec<usize> {
        let mut l = self.def.experiment.levels.clone();
        l.sort_unstable();
        l.dedup();
        l
    }

    fn base_change_targets(&self) -> Vec<CoefficientRing> {
        let mut targets = Vec::new();
        match self.tri.ring() {
            CoefficientRing::Integers => {
                for &p in &self.def.experiment.primes {
                    targets.push(CoefficientRing::prime_field(p).expect("validated"));
                }
                targets.push(CoefficientRing::Rationals);
            }
            CoefficientRing::LocalizedIntegers(p) => {
                targets.push(CoefficientRing::PrimeField(p));
                targets.push(CoefficientRing::Rationals);
            }
            _ => {}
        }
        targets.sort_by_key(|r| r.to_string());
        targets.dedup();
        targets
    }

    fn jet(&mut self) -> Result<(), String> {
        let levels = self.levels();
        let systems = levels
            .iter()
            .map(|&m| generate_jet_system(&self.tri, m))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| e.to_string())?;
        let mut projections = Vec::new();
        for (a, hi) in systems.iter().enumerate() {
            for lo in &systems[..a] {
                let check = match certify_projection(hi, lo) {
                    Ok(p) => ProjectionCheck {
                        m_hi: p.m_hi,
                        m_lo: p.m_lo,
                        certified: true,
                        certified_equations: p.certified_equations,
                        detail: None,
                    },
                    Err(e) => ProjectionCheck {
                        m_hi: hi.level(),
                        m_lo: lo.level(),
                        certified: false,
                        certified_equations: 0,
                        detail: Some(e.to_string()),
                    },
                };
                let detail = check
                    .detail
                    .clone()
                    .unwrap_or_else(|| format!("{} equations", check.certified_equations));
                self.certify(
                    format!("project_jet {} -> {}", check.m_hi, check.m_lo),
                    check.certified,
                    detail,
                );
                projections.push(check);
            }
        }
        let mut bc = Vec::new();
        for target in self.base_change_targets() {
            let reduced_tri = base_change(&self.tri, target).map_err(|e| e.to_string())?;
            for (js, &m) in systems.iter().zip(&levels) {
                let commutes = match (
                    generate_jet_system(&reduced_tri, m),
                    js.reduce_coefficients(target),
                ) {
                    (Ok(a), Ok(b)) => a == b,
                    _ => false,
                };
                self.certify(
                    format!("base change to {target} at level {m}"),
                    commutes,
                    if commutes {
                        "grids equal".into()
                    } else {
                        "grids differ".into()
                    },
                );
                bc.push(BaseChangeCheck {
                    target: target.to_string(),
                    level: m,
                    commutes,
                });
            }
        }
        self.report.jet = Some(JetSection {
            relations: self.tri.relation_strings(),
            levels: systems
                .iter()
                .map(|js| JetLevel {
                    statistics: js.statistics(),
                    equations: grid(js),
                })
                .collect(),
            projections,
            base_change: bc,
        });
        Ok(())
    }

    fn fibers(&mut self) -> Result<(), String> {
        let summary = |which: Fiber,
                       levels: &[usize],
                       tri: &NiceTriplePresentation|
         -> Result<FiberSummary, String> {
            let f = fiber_at(tri, which).map_err(|e| e.to_string())?;
            let statistics = levels
                .iter()
                .map(|&m| generate_jet_system(&f, m).map(|js| js.statistics()))
                .collect::<Result<_, _>>()
                .map_err(|e| e.to_string())?;
            Ok(FiberSummary {
                ring: f.ring().to_string(),
                relations: f.relation_strings(),
                statistics,
            })
        };
        let levels = self.levels();
        self.report.fibers = Some(FibersSection {
            special: summary(Fiber::Special, &levels, &self.tri)?,
            generic: summary(Fiber::Generic, &levels, &self.tri)?,
        });
        Ok(())
    }

    fn counts(&mut self) -> Result<(), String> {
        let e = &self.def.experiment;
        let mut primes = e.primes.clone();
        primes.sort_unstable();
        primes.dedup();
        let (budget, seed) = (e.sample_budget, e.seed.unwrap_or(0));
        let mut entries = Vec::new();
        let mut counts = Vec::new();
        for q in primes {
            let field = CoefficientRing::prime_field(q).map_err(|e| e.to_string())?;
            if !self.tri.ring().maps_to(&field) {
                for m in self.levels() {
                    entries.push(CountEntry {
                        q,
                        level: m,
                        result: None,
                        skipped: Some(format!("no ring map {} -> {field}", self.tri.ring())),
                    });
                }
                continue;
            }
            let reduced = base_change(&self.tri, field).map_err(|e| e.to_string())?;
            for m in self.levels() {
                let js = generate_jet_system(&reduced, m).map_err(|e| e.to_string())?;
                let grid = q.checked_pow((js.nvars()) as u32);
                let mode = match grid {
                    Some(g) if g <= self.limit => CountMode::Exhaustive,
                    _ if budget > 0 => CountMode::Sampled { budget, seed },
                    _ => {
                        entries.push(CountEntry {
                            q,
                            level: m,
                            result: None,
                            skipped: Some(format!(
                                "grid {q}^{} exceeds the enumeration limit {} and sample_budget is 0",
                                js.nvars(),
                                self.limit
                            )),
                        });
                        continue;
                    }
                };
                let pc = count_points(&js, mode, self.limit).map_err(|e| e.to_string())?;
                if matches!(self.tri.ring(), CoefficientRing::LocalizedIntegers(p) if p.get() == q)
                {
                    // Jets of the special fiber against the family's jets pushed mod p.
                    let family = generate_jet_system(&self.tri, m)
                        .and_then(|f| Ok(f.reduce_coefficients(field)?))
                        .map_err(|e| e.to_string())?;
                    let other =
                        count_points(&family, mode, self.limit).map_err(|e| e.to_string())?;
                    self.certify(
                        format!("fiber coherence at q = {q}, level {m}"),
                        other == pc,
                        format!("{} vs {}", pc.value(), other.value()),
                    );
                }
                counts.push(pc.clone());
                entries.push(CountEntry {
                    q,
                    level: m,
                    result: Some(pc),
                    skipped: None,
                });
            }
        }
        self.report.counts = Some(CountsSection {
            entries,
            dimension: DimensionTable::from_counts(&counts),
        });
        Ok(())
    }

    fn graphs(&mut self) -> Result<(), String> {
        let summarize = |g: &DualGraph, points: Option<&[crate::graph::PointIncidence]>| {
            let mm = minimal_model(g);
            GraphSummary {
                vertices: g.len(),
                matrix: intersection_matrix(g).entries,
                negative_definite: is_negative_definite(&intersection_matrix(g)),
                goodness: check_goodness(g, points).map_err(|e| e.to_string()),
                minimal_matrix: intersection_matrix(&mm.graph).entries,
                essential: mm.essential.iter().copied().collect(),
                contracted: mm.contracted.clone(),
                n_r: mm.graph.len(),
            }
        };
        let special = self.def.special_graph().map_err(|e| e.to_string())?;
        let generic = self.def.generic_graph().map_err(|e| e.to_string())?;
        let sp_points = self
            .def
            .graphs
            .special
            .as_ref()
            .and_then(|f| f.points.as_deref());
        let gen_points = self
            .def
            .graphs
            .generic
            .as_ref()
            .and_then(|f| f.points.as_deref());
        let comparison = match (&special, &generic) {
            (Some(a), Some(b)) => Some(family_invariance_check(a, b).map_err(|e| e.to_string())?),
            _ => None,
        };
        self.report.graphs = Some(GraphsSection {
            special: special.as_ref().map(|g| summarize(g, sp_points)),
            generic: generic.as_ref().map(|g| summarize(g, gen_points)),
            comparison,
        });
        Ok(())
    }

    fn condition_no(&mut self) -> Result<(), String> {
        let spec = self.def.experiment.condition_no.clone().expect("checked");
        let frames = self.def.frames().map_err(|e| e.to_string())?;
        let q = self.tri.ring().prime().expect("checked");
        let config = LiftConfig {
            level: spec.level,
            q,
            budget: spec.budget,
            seed: self.def.experiment.seed.unwrap_or(0),
            limit: self.limit,
        };
        let r = sample_condition_no(&self.tri, &frames, config).map_err(|e| e.to_string())?;
        self.report.condition_no = Some(r);
        Ok(())
    }

    fn intersections(&mut self) -> Result<(), String> {
        let pairs = self.def.intersection_pairs().map_err(|e| e.to_string())?;
        let vars = ["x".to_string(), "y".to_string()];
        let mut entries = Vec::new();
        for (label, pair, cap) in pairs {
            let result =
                local_intersection_multiplicity(&pair, cap).map_err(|e| format!("{label}: {e}"))?;
            entries.push(IntersectionEntry {
                label,
                field: pair.field().to_string(),
                f: format_polynomial(pair.f(), &vars),
                g: format_polynomial(pair.g(), &vars),
                result,
            });
        }
        let total = entries
            .iter()
            .map(|e| e.result.value())
            .sum::<Option<u64>>();
        self.report.intersections = Some(IntersectionsSection { entries, total });
        Ok(())
    }
}

const NN_REASON: &str =
    "irreducible components of the arc space are not computable from finite jet data";

const COMPONENT_NOTE: &str = "point counts cannot distinguish irreducible components, so no \
component-level evidence (such as bijectivity of the induced map on components) is emitted; \
this remains an open question";

/// Runs `tasks` (in execution order) on a validated definition. `source` is
/// the raw input, hashed into the report; `limit` caps enumeration grids.
pub fn run_pipeline(
    def: &SurfaceDefinition,
    source: &[u8],
    tasks: &[Task],
    limit: Option<u64>,
) -> Result<ExperimentReport, DefinitionError> {
    check_applicable(def, tasks)?;
    let tri = def.triple()?;
    let limit = limit
        .or(def.experiment.limit)
        .unwrap_or(DEFAULT_ENUMERATION_LIMIT);
    let mut tasks = tasks.to_vec();
    tasks.sort();
    tasks.dedup();
    let report = ExperimentReport {
        schema: SCHEMA_VERSION,
        tool: ToolInfo {
            name: "arcsmith",
            version: env!("CARGO_PKG_VERSION"),
        },
        input: InputInfo {
            name: def.name.clone(),
            ring: def.ring.to_string(),
            sha256: sha256_hex(source),
            seed: def.experiment.seed,
            enumeration_limit: limit,
        },
        tasks: tasks.clone(),
        jet: None,
        fibers: None,
        counts: None,
        graphs: None,
        condition_no: None,
        intersections: None,
        nash_counting: None,
        component_evidence: None,
        certifications: OracleTally::default(),
        task_errors: Vec::new(),
    };
    let mut run = Run {
        def,
        tri,
        limit,
        report,
    };
    for &t in &tasks {
        let result = match t {
            Task::Jet => run.jet(),
            Task::Fibers => run.fibers(),
            Task::Counts => run.counts(),
            Task::Graphs => run.graphs(),
            Task::ConditionNo => run.condition_no(),
            Task::Intersections => run.intersections(),
        };
        if let Err(e) = result {
            run.fail(t, e);
        }
    }
    if tasks
        .iter()
        .any(|t| matches!(t, Task::Counts | Task::Graphs))
    {
        let g = run.report.graphs.as_ref();
        run.report.nash_counting = Some(NashCounting {
            n_r: NrValues {
                special: g.and_then(|g| g.special.as_ref()).map(|s| s.n_r),
                generic: g.and_then(|g| g.generic.as_ref()).map(|s| s.n_r),
            },
            n_n: NnStatus {
                computed: false,
                reason: NN_REASON,
            },
            inequality: "N_n <= N_r",
            inequality_asserted: false,
            heuristic: Heuristic::new("N_r comes from user-supplied graphs; N_n is not computed"),
        });
    }
    if tasks.contains(&Task::Counts) {
        run.report.component_evidence = Some(ComponentEvidence {
            implemented: false,
            note: COMPONENT_NOTE,
        });
    }
    Ok(run.report)
}
