use serde::Serialize;

/// Marker attached to every report field that is finite-level evidence
/// rather than a proved statement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Heuristic {
    pub heuristic: bool,
    pub not_a_theorem: bool,
    pub note: &'static str,
}

impl Heuristic {
    pub const fn new(note: &'static str) -> Self {
        Heuristic {
            heuristic: true,
            not_a_theorem: true,
            note,
        }
    }
}
