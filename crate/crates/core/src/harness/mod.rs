//! Definition files, the task pipeline and its JSON report.

pub mod definition;
pub mod pipeline;
pub mod wedge;

pub use definition::{DefinitionError, Format, SurfaceDefinition};
pub use pipeline::{parse_tasks, run_pipeline, ExperimentReport, Task, SCHEMA_VERSION};
