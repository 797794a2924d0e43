//! Jet scheme equations, resolution dual graphs and finite-field arc
//! experiments for surface singularities.

pub mod arc;
pub mod corpus;
pub mod count;
pub mod expr;
pub mod graph;
pub mod harness;
pub mod heuristic;
pub mod intersect;
pub mod jet;
pub mod ring;

pub use ring::{
    Algebra, BivariateSeries, CoefficientRing, Monomial, Prime, RingError, Scalar, SparsePoly,
    TruncatedSeries,
};

// Each book chapter is checked as a doc-test; one module per chapter keeps
// failures traceable.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/intro.md")]
    struct Intro;
    #[doc = include_str!("../../../book/src/rings.md")]
    struct Rings;
    #[doc = include_str!("../../../book/src/jets.md")]
    struct Jets;
    #[doc = include_str!("../../../book/src/counting.md")]
    struct Counting;
    #[doc = include_str!("../../../book/src/arcs.md")]
    struct Arcs;
    #[doc = include_str!("../../../book/src/graphs.md")]
    struct Graphs;
    #[doc = include_str!("../../../book/src/intersections.md")]
    struct Intersections;
    #[doc = include_str!("../../../book/src/cli.md")]
    struct Cli;
}
