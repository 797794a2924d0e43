//! Surface definition files (TOML or JSON, same schema).

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arc::{ArcError, ChartFrame, FrameCase};
use crate::expr::parse_polynomial;
use crate::graph::{DualGraph, GraphError, GraphFile};
use crate::intersect::{IntersectError, LocalPair};
use crate::jet::{JetError, NiceTriplePresentation};
use crate::ring::{CoefficientRing, RingError};

#[derive(Debug, Error)]
pub enum DefinitionError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("invalid TOML: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("ring: {0}")]
    Ring(#[from] RingError),
    #[error("relations: {0}")]
    Jet(#[from] JetError),
    #[error("frame: {0}")]
    Frame(#[from] ArcError),
    #[error("graph `{which}`: {source}")]
    Graph { which: String, source: GraphError },
    #[error("intersection `{label}`: {source}")]
    Intersection {
        label: String,
        source: IntersectError,
    },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameSpec {
    pub name: String,
    pub case: FrameCase,
    pub coordinates: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chart: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphsSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub special: Option<GraphFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generic: Option<GraphFile>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConditionNoSpec {
    pub level: usize,
    pub budget: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntersectionSpec {
    pub label: String,
    pub f: String,
    pub g: String,
    #[serde(default = "rationals")]
    pub field: String,
    #[serde(default = "default_cap")]
    pub cap: usize,
}

fn rationals() -> String {
    "Q".into()
}

fn default_cap() -> usize {
    16
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    #[serde(default)]
    pub levels: Vec<usize>,
    #[serde(default)]
    pub primes: Vec<u64>,
    /// Samples per count when the grid exceeds the enumeration limit;
    /// 0 means such counts are skipped.
    #[serde(default)]
    pub sample_budget: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub limit: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub condition_no: Option<ConditionNoSpec>,
    #[serde(default)]
    pub intersections: Vec<IntersectionSpec>,
}

/// The declarative input of a pipeline run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceDefinition {
    pub name: String,
    pub ring: CoefficientRing,
    pub variables: Vec<String>,
    pub relations: Vec<String>,
    #[serde(default)]
    pub frames: Vec<FrameSpec>,
    #[serde(default)]
    pub graphs: GraphsSpec,
    #[serde(default)]
    pub experiment: ExperimentSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Toml,
    Json,
}

impl Format {
    /// `.json` files are JSON, everything else TOML.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("json") => Format::Json,
            _ => Format::Toml,
        }
    }
}

impl SurfaceDefinition {
    pub fn parse(text: &str, format: Format) -> Result<Self, DefinitionError> {
        let def: SurfaceDefinition = match format {
            Format::Toml => toml::from_str(text)?,
            Format::Json => serde_json::from_str(text)?,
        };
        def.validate()?;
        Ok(def)
    }

    /// Reads a file; returns the definition and the raw bytes (for hashing).
    pub fn load(path: &Path) -> Result<(Self, Vec<u8>), DefinitionError> {
        let bytes = std::fs::read(path).map_err(|source| DefinitionError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let text = String::from_utf8_lossy(&bytes);
        let def = Self::parse(&text, Format::from_path(path))?;
        Ok((def, bytes))
    }

    /// Checks everything that can be checked without running a task.
    pub fn validate(&self) -> Result<(), DefinitionError> {
        self.triple()?;
        self.frames()?;
        self.special_graph()?;
        self.generic_graph()?;
        self.intersection_pairs()?;
        let e = &self.experiment;
        let samples = e.sample_budget > 0 || e.condition_no.as_ref().is_some_and(|c| c.budget > 0);
        if samples && e.seed.is_none() {
            return Err(DefinitionError::Invalid(
                "experiment.seed is required when sampling is requested".into(),
            ));
        }
        if let Some(p) = e
            .primes
            .iter()
            .find(|p| CoefficientRing::prime_field(**p).is_err())
        {
            return Err(DefinitionError::Invalid(format!(
                "experiment.primes: {p} is not prime"
            )));
        }
        if e.levels.contains(&0) {
            return Err(DefinitionError::Invalid(
                "experiment.levels must be at least 1".into(),
            ));
        }
        Ok(())
    }

    pub fn triple(&self) -> Result<NiceTriplePresentation, DefinitionError> {
        Ok(NiceTriplePresentation::parse(
            &self.name,
            self.ring,
            self.variables.clone(),
            &self.relations,
        )?)
    }

    pub fn frames(&self) -> Result<Vec<ChartFrame>, DefinitionError> {
        self.frames
            .iter()
            .map(|f| {
                let chart = match &f.chart {
                    None => None,
                    Some(ch) => Some(
                        ch.iter()
                            .map(|s| {
                                parse_polynomial(s, &f.coordinates, self.ring)
                                    .map_err(ArcError::from)
                            })
                            .collect::<Result<Vec<_>, _>>()?,
                    ),
                };
                Ok(ChartFrame::new(
                    f.name.clone(),
                    f.case,
                    f.coordinates.clone(),
                    chart,
                )?)
            })
            .collect()
    }

    pub fn frame(&self, name: &str) -> Result<ChartFrame, DefinitionError> {
        self.frames()?
            .into_iter()
            .find(|f| f.name() == name)
            .ok_or_else(|| DefinitionError::Invalid(format!("no frame named `{name}`")))
    }

    fn graph(
        &self,
        which: &str,
        file: Option<&GraphFile>,
    ) -> Result<Option<DualGraph>, DefinitionError> {
        file.map(|f| {
            DualGraph::new(f.vertices.clone(), &f.edges).map_err(|source| DefinitionError::Graph {
                which: which.into(),
                source,
            })
        })
        .transpose()
    }

    pub fn special_graph(&self) -> Result<Option<DualGraph>, DefinitionError> {
        self.graph("special", self.graphs.special.as_ref())
    }

    pub fn generic_graph(&self) -> Result<Option<DualGraph>, DefinitionError> {
        self.graph("generic", self.graphs.generic.as_ref())
    }

    pub fn intersection_pairs(&self) -> Result<Vec<(String, LocalPair, usize)>, DefinitionError> {
        self.experiment
            .intersections
            .iter()
            .map(|s| {
                let wrap = |source: IntersectError| DefinitionError::Intersection {
                    label: s.label.clone(),
                    source,
                };
                let field: CoefficientRing =
                    s.field.parse().map_err(|e: RingError| wrap(e.into()))?;
                let pair = LocalPair::parse(field, &s.f, &s.g).map_err(wrap)?;
                Ok((s.label.clone(), pair, s.cap))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const A1: &str = r#"
name = "A1"
ring = "Z"
variables = ["Y1", "Y2", "Y3"]
relations = ["Y1*Y2 - Y3^2"]

[experiment]
levels = [1, 2]
primes = [2, 3]
"#;

    #[test]
    fn toml_and_json_agree() {
        let t = SurfaceDefinition::parse(A1, Format::Toml).unwrap();
        let json = serde_json::to_string(&t).unwrap();
        let j = SurfaceDefinition::parse(&json, Format::Json).unwrap();
        assert_eq!(t, j);
        assert_eq!(t.triple().unwrap().relation_strings(), vec!["Y1*Y2 - Y3^2"]);
    }

    #[test]
    fn seed_required_for_sampling() {
        let text = format!("{A1}sample_budget = 100\n");
        let err = SurfaceDefinition::parse(&text, Format::Toml).unwrap_err();
        assert!(err.to_string().contains("seed"));
        let ok = format!("{A1}sample_budget = 100\nseed = 4\n");
        assert!(SurfaceDefinition::parse(&ok, Format::Toml).is_ok());
    }

    #[test]
    fn rejects_bad_inputs() {
        let constant = A1.replace("Y1*Y2 - Y3^2", "Y1*Y2 - 1");
        assert!(matches!(
            SurfaceDefinition::parse(&constant, Format::Toml),
            Err(DefinitionError::Jet(JetError::ConstantTerm { .. }))
        ));
        let unknown = A1.replace("Y3^2", "Z^2");
        assert!(SurfaceDefinition::parse(&unknown, Format::Toml).is_err());
        let prime = A1.replace("[2, 3]", "[2, 4]");
        assert!(SurfaceDefinition::parse(&prime, Format::Toml).is_err());
        let extra = format!("{A1}bogus = 1\n");
        assert!(SurfaceDefinition::parse(&extra, Format::Toml).is_err());
    }

    #[test]
    fn frames_and_graphs() {
        let text = format!(
            "{}{}",
            A1.split("[experiment]").next().unwrap(),
            r#"
[[frames]]
name = "chart"
case = "two_components"
coordinates = ["u", "x1", "x2"]
chart = ["x1", "x1*x2^2", "x1*x2"]

[graphs.special]
vertices = [{ id = 1, self = -2, genus = 0, label = "E1" }]
edges = []
"#
        );
        let def = SurfaceDefinition::parse(&text, Format::Toml).unwrap();
        assert_eq!(def.frame("chart").unwrap().chart().unwrap().len(), 3);
        assert!(def.frame("missing").is_err());
        assert_eq!(def.special_graph().unwrap().unwrap().len(), 1);
        assert!(def.generic_graph().unwrap().is_none());
    }
}
