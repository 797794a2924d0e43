//! Truncated arcs and wedges over a field, the wedge attached to an arc in
//! a resolution chart, and sampled lifting experiments on special-fiber jets.

use std::fmt;
use std::ops::ControlFlow;

use num_traits::Zero;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::count::{block_rng, CountError, FpSystem};
use crate::expr::{format_polynomial, parse_polynomial, ParseError};
use crate::heuristic::Heuristic;
use crate::jet::{
    fiber_at, generate_jet_system, ArcAssignment, Fiber, JetError, NiceTriplePresentation,
};
use crate::ring::{
    BivariateSeries, CoefficientRing, RingError, Scalar, SparsePoly, TruncatedSeries,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArcError {
    #[error("arcs need coefficients in a field, got {0}")]
    NotAField(CoefficientRing),
    #[error("an arc needs at least one component")]
    Empty,
    #[error("components have mixed precision or ring")]
    Mixed,
    #[error("expected {expected} components, got {got}")]
    ComponentCount { expected: usize, got: usize },
    #[error("the u-component is nonzero, so the arc is not in the special fiber")]
    NotInSpecialFiber,
    #[error("invalid chart frame: {0}")]
    BadFrame(String),
    #[error("configuration error: no chart frame supplied")]
    NoFrame,
    #[error("configuration error: frame `{0}` has no chart polynomials")]
    NoChart(String),
    #[error("lifting experiments need a triple over Z_(p), got {0}")]
    NotLocalized(CoefficientRing),
    #[error("special-fiber sampling needs q = p = {p}, got q = {q}")]
    FieldMismatch { q: u64, p: u64 },
    #[error("lift search over {count} candidates exceeds the limit {limit}")]
    LimitExceeded { count: String, limit: u64 },
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Ring(#[from] RingError),
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error(transparent)]
    Count(#[from] CountError),
}

fn t_name() -> Vec<String> {
    vec!["t".into()]
}

fn ut_names() -> Vec<String> {
    vec!["u".into(), "t".into()]
}

fn series_to_poly(s: &TruncatedSeries) -> SparsePoly {
    SparsePoly::from_terms(
        s.ring(),
        1,
        s.coeffs()
            .iter()
            .enumerate()
            .map(|(k, c)| (vec![k as u32], c.clone())),
    )
    .expect("normalized")
}

fn bivariate_to_poly(s: &BivariateSeries) -> SparsePoly {
    SparsePoly::from_terms(
        s.ring(),
        2,
        s.terms()
            .into_iter()
            .map(|(a, b, c)| (vec![a as u32, b as u32], c)),
    )
    .expect("normalized")
}

/// Text form of a series in `t`, e.g. `t^3 + 2*t`.
pub fn format_series(s: &TruncatedSeries) -> String {
    format_polynomial(&series_to_poly(s), &t_name())
}

/// Text form of a series in `u, t`.
pub fn format_bivariate(s: &BivariateSeries) -> String {
    format_polynomial(&bivariate_to_poly(s), &ut_names())
}

/// Parses a polynomial in `t` and truncates it mod `t^(precision+1)`.
pub fn parse_series(
    src: &str,
    field: CoefficientRing,
    precision: usize,
) -> Result<TruncatedSeries, ArcError> {
    let p = parse_polynomial(src, &t_name(), field)?;
    let mut coeffs = vec![Scalar::zero(); precision + 1];
    for (m, c) in p.terms() {
        let k = m.exponents()[0] as usize;
        if k <= precision {
            coeffs[k] = c.clone();
        }
    }
    Ok(TruncatedSeries::from_coeffs(field, precision, coeffs)?)
}

/// Parses a polynomial in `u, t` as a bivariate truncated series.
pub fn parse_bivariate(
    src: &str,
    field: CoefficientRing,
    precision: (usize, usize),
) -> Result<BivariateSeries, ArcError> {
    let p = parse_polynomial(src, &ut_names(), field)?;
    let terms = p.terms().map(|(m, c)| {
        let e = m.exponents();
        (e[0] as usize, e[1] as usize, c.clone())
    });
    Ok(BivariateSeries::from_terms(
        field,
        precision.0,
        precision.1,
        terms,
    )?)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Arc {
    field: CoefficientRing,
    components: Vec<TruncatedSeries>,
}

impl Arc {
    pub fn new(field: CoefficientRing, components: Vec<TruncatedSeries>) -> Result<Self, ArcError> {
        if !field.is_field() {
            return Err(ArcError::NotAField(field));
        }
        let first = components.first().ok_or(ArcError::Empty)?;
        let n = first.precision();
        if components
            .iter()
            .any(|c| c.precision() != n || c.ring() != field)
        {
            return Err(ArcError::Mixed);
        }
        Ok(Arc { field, components })
    }

    /// Components in the expression grammar, in the variable `t`.
    pub fn parse<S: AsRef<str>>(
        field: CoefficientRing,
        precision: usize,
        components: &[S],
    ) -> Result<Self, ArcError> {
        let cs = components
            .iter()
            .map(|s| parse_series(s.as_ref(), field, precision))
            .collect::<Result<_, _>>()?;
        Arc::new(field, cs)
    }

    pub fn field(&self) -> CoefficientRing {
        self.field
    }

    pub fn precision(&self) -> usize {
        self.components[0].precision()
    }

    pub fn components(&self) -> &[TruncatedSeries] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// All constant coefficients vanish: the closed point goes to the origin.
    pub fn is_s_arc(&self) -> bool {
        self.components
            .iter()
            .all(TruncatedSeries::in_maximal_ideal)
    }
}

impl fmt::Display for Arc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.components.iter().map(format_series).collect();
        write!(f, "({})", parts.join(", "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Wedge {
    field: CoefficientRing,
    components: Vec<BivariateSeries>,
}

impl Wedge {
    pub fn new(field: CoefficientRing, components: Vec<BivariateSeries>) -> Result<Self, ArcError> {
        if !field.is_field() {
            return Err(ArcError::NotAField(field));
        }
        let first = components.first().ok_or(ArcError::Empty)?;
        let prec = first.precision();
        if components
            .iter()
            .any(|c| c.precision() != prec || c.ring() != field)
        {
            return Err(ArcError::Mixed);
        }
        Ok(Wedge { field, components })
    }

    pub fn parse<S: AsRef<str>>(
        field: CoefficientRing,
        precision: (usize, usize),
        components: &[S],
    ) -> Result<Self, ArcError> {
        let cs = components
            .iter()
            .map(|s| parse_bivariate(s.as_ref(), field, precision))
            .collect::<Result<_, _>>()?;
        Wedge::new(field, cs)
    }

    pub fn field(&self) -> CoefficientRing {
        self.field
    }

    /// `(N_u, N_t)`.
    pub fn precision(&self) -> (usize, usize) {
        self.components[0].precision()
    }

    pub fn components(&self) -> &[BivariateSeries] {
        &self.components
    }
}

impl fmt::Display for Wedge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.components.iter().map(format_bivariate).collect();
        write!(f, "({})", parts.join(", "))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrameCase {
    /// The exceptional locus is `x1 = 0`.
    SingleComponent,
    /// `x1 = 0` and `x2 = 0` are two exceptional components meeting along
    /// the `u`-axis.
    TwoComponents,
}

/// Coordinates `(u, x1[, x2])` of a resolution chart, and optionally the
/// chart map giving each surface coordinate `Y_i` as a polynomial in them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChartFrame {
    name: String,
    case: FrameCase,
    coordinates: Vec<String>,
    chart: Option<Vec<SparsePoly>>,
}

impl ChartFrame {
    pub fn new(
        name: impl Into<String>,
        case: FrameCase,
        coordinates: Vec<String>,
        chart: Option<Vec<SparsePoly>>,
    ) -> Result<Self, ArcError> {
        let name = name.into();
        match (case, coordinates.len()) {
            (FrameCase::SingleComponent, 2 | 3) | (FrameCase::TwoComponents, 3) => {}
            (FrameCase::TwoComponents, k) => {
                return Err(ArcError::BadFrame(format!(
                    "two-component frame `{name}` needs coordinates (u, x1, x2), got {k}"
                )))
            }
            (_, k) => {
                return Err(ArcError::BadFrame(format!(
                    "frame `{name}` needs 2 or 3 coordinates, got {k}"
                )))
            }
        }
        for (a, c) in coordinates.iter().enumerate() {
            if coordinates[..a].contains(c) {
                return Err(ArcError::BadFrame(format!("repeated coordinate `{c}`")));
            }
        }
        if let Some(ch) = &chart {
            if let Some(bad) = ch.iter().find(|p| p.nvars() != coordinates.len()) {
                return Err(ArcError::BadFrame(format!(
                    "chart polynomial has {} variables, frame has {}",
                    bad.nvars(),
                    coordinates.len()
                )));
            }
        }
        Ok(ChartFrame {
            name,
            case,
            coordinates,
            chart,
        })
    }

    /// Frame whose chart is given as one expression per surface coordinate.
    pub fn parse_chart<S: AsRef<str>>(
        name: impl Into<String>,
        case: FrameCase,
        coordinates: Vec<String>,
        ring: CoefficientRing,
        chart: &[S],
    ) -> Result<Self, ArcError> {
        let polys = chart
            .iter()
            .map(|s| parse_polynomial(s.as_ref(), &coordinates, ring))
            .collect::<Result<Vec<_>, _>>()?;
        ChartFrame::new(name, case, coordinates, Some(polys))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn case(&self) -> FrameCase {
        self.case
    }

    pub fn coordinates(&self) -> &[String] {
        &self.coordinates
    }

    pub fn chart(&self) -> Option<&[SparsePoly]> {
        self.chart.as_deref()
    }

    pub fn chart_strings(&self) -> Option<Vec<String>> {
        self.chart.as_ref().map(|ch| {
            ch.iter()
                .map(|p| format_polynomial(p, &self.coordinates))
                .collect()
        })
    }
}

/// Sends `u` to `u t` and keeps the remaining chart coordinates.
pub fn wedge_from_arc(arc: &Arc, frame: &ChartFrame) -> Result<Wedge, ArcError> {
    if arc.len() != frame.coordinates.len() {
        return Err(ArcError::ComponentCount {
            expected: frame.coordinates.len(),
            got: arc.len(),
        });
    }
    if !arc.components[0].is_zero() {
        return Err(ArcError::NotInSpecialFiber);
    }
    let n = arc.precision();
    let field = arc.field;
    let ut = BivariateSeries::from_terms(field, n, n, [(1, 1, field.one())])?;
    let mut comps = vec![ut];
    comps.extend(
        arc.components[1..]
            .iter()
            .map(|c| BivariateSeries::from_t_series(c, n)),
    );
    Wedge::new(field, comps)
}

/// The arc at `u = 0`.
pub fn specialize_at_zero(w: &Wedge) -> Arc {
    Arc {
        field: w.field,
        components: w
            .components
            .iter()
            .map(BivariateSeries::at_u_zero)
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FiberWitness {
    pub holds: bool,
    /// Lowest term of the `u`-component, e.g. `u*t`.
    pub certificate: Option<String>,
}

/// Whether the wedge's `u`-component is nonzero, i.e. the induced arc over
/// `K((u))` leaves the special fiber.
pub fn generic_fiber_witness(w: &Wedge) -> FiberWitness {
    let lowest = w.components[0].lowest_term();
    FiberWitness {
        holds: lowest.is_some(),
        certificate: lowest.map(|(a, b, c)| {
            let (nu, nt) = w.precision();
            let term = BivariateSeries::from_terms(w.field, nu, nt, [(a, b, c)]).expect("in range");
            format_bivariate(&term)
        }),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ContactOrder {
    Finite(usize),
    /// Every coefficient up to the arc's precision vanishes.
    AtLeast(usize),
}

impl fmt::Display for ContactOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ContactOrder::Finite(k) => write!(f, "{k}"),
            ContactOrder::AtLeast(k) => write!(f, ">= {k}"),
        }
    }
}

/// `ord_t g(arc)`, computed modulo `t^(N+1)`.
pub fn contact_order(arc: &Arc, g: &SparsePoly) -> Result<ContactOrder, ArcError> {
    if g.nvars() != arc.len() {
        return Err(ArcError::ComponentCount {
            expected: g.nvars(),
            got: arc.len(),
        });
    }
    let value = g
        .reduce_coefficients(arc.field)?
        .evaluate_in(&arc.components)?;
    Ok(match value.order() {
        Some(k) => ContactOrder::Finite(k),
        None => ContactOrder::AtLeast(arc.precision() + 1),
    })
}

/// Image of a chart-coordinate wedge on the surface.
pub fn push_forward(w: &Wedge, frame: &ChartFrame) -> Result<Vec<BivariateSeries>, ArcError> {
    let chart = frame
        .chart()
        .ok_or_else(|| ArcError::NoChart(frame.name.clone()))?;
    if w.components.len() != frame.coordinates.len() {
        return Err(ArcError::ComponentCount {
            expected: frame.coordinates.len(),
            got: w.components.len(),
        });
    }
    chart
        .iter()
        .map(|h| Ok(h.reduce_coefficients(w.field)?.evaluate_in(&w.components)?))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LiftConfig {
    pub level: usize,
    /// Residue field size; must equal `p`.
    pub q: u64,
    /// Number of special-fiber jets to process.
    pub budget: u64,
    pub seed: u64,
    /// Cap on enumerated grids and on lift-search candidates per frame.
    pub limit: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LiftExample {
    pub jet: Vec<String>,
    pub frame: String,
    pub chart_arc: String,
    pub wedge: String,
    pub witness: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionNoReport {
    pub level: usize,
    pub field: String,
    /// `exhaustive` when the special-fiber grid was enumerated, else `sampled`.
    pub mode: &'static str,
    pub attempted: u64,
    pub lifted: u64,
    pub fraction: Option<f64>,
    pub examples: Vec<LiftExample>,
    /// Jets for which no frame produced a lift (first few).
    pub unlifted: Vec<Vec<String>>,
    pub label: &'static str,
    pub heuristic: Heuristic,
}

const MAX_EXAMPLES: usize = 5;

pub const EVIDENCE_LABEL: &str = "finite-level evidence, not a proof";

const LIFT_NOTE: &str = "special-fiber jets written as specializations of wedges built in \
user-supplied charts; tests that no component of the jet scheme lies in the special fiber";

struct Lifter<'a> {
    field: CoefficientRing,
    level: usize,
    frames: &'a [ChartFrame],
    charts: Vec<Vec<SparsePoly>>,
    relations: Vec<SparsePoly>,
    limit: u64,
}

impl Lifter<'_> {
    fn candidates(&self, frame: &ChartFrame) -> Result<u64, ArcError> {
        let p = self.field.prime().expect("prime field");
        let digits = (frame.coordinates.len() - 1) * (self.level + 1);
        match p.checked_pow(digits as u32) {
            Some(c) if c <= self.limit => Ok(c),
            _ => Err(ArcError::LimitExceeded {
                count: format!("{p}^{digits}"),
                limit: self.limit,
            }),
        }
    }

    /// Chart arc `(0, phi_1, ...)` for candidate number `index`, digits in
    /// base `p`, coefficient-major within each component.
    fn chart_arc(&self, arity: usize, mut index: u64) -> Arc {
        let p = self.field.prime().expect("prime field");
        let m = self.level;
        let mut comps = vec![TruncatedSeries::zero(self.field, m)];
        for _ in 1..arity {
            let coeffs = (0..=m)
                .map(|_| {
                    let d = index % p;
                    index /= p;
                    self.field.from_i64(d as i64)
                })
                .collect();
            comps.push(TruncatedSeries::from_coeffs(self.field, m, coeffs).expect("normalized"));
        }
        Arc {
            field: self.field,
            components: comps,
        }
    }

    fn lift(&self, jet: &[TruncatedSeries]) -> Result<Option<LiftExample>, ArcError> {
        for (frame, chart) in self.frames.iter().zip(&self.charts) {
            let arity = frame.coordinates.len();
            for index in 0..self.candidates(frame)? {
                let arc = self.chart_arc(arity, index);
                let hits = chart.iter().zip(jet).all(|(h, z)| {
                    h.evaluate_in(&arc.components)
                        .map(|v| &v == z)
                        .unwrap_or(false)
                });
                if !hits {
                    continue;
                }
                let wedge = wedge_from_arc(&arc, frame)?;
                let witness = generic_fiber_witness(&wedge);
                let back = specialize_at_zero(&wedge);
                let image = push_forward(&wedge, frame)?;
                let image_at_zero: Vec<TruncatedSeries> =
                    image.iter().map(BivariateSeries::at_u_zero).collect();
                let residuals_vanish = self
                    .relations
                    .iter()
                    .map(|f| f.evaluate_in(&image_at_zero))
                    .collect::<Result<Vec<_>, _>>()?
                    .iter()
                    .all(TruncatedSeries::is_zero);
                if witness.holds && back == arc && image_at_zero == jet && residuals_vanish {
                    let image_wedge = Wedge::new(self.field, image)?;
                    return Ok(Some(LiftExample {
                        jet: jet.iter().map(format_series).collect(),
                        frame: frame.name.clone(),
                        chart_arc: arc.to_string(),
                        wedge: image_wedge.to_string(),
                        witness: witness.certificate.unwrap_or_default(),
                    }));
                }
            }
        }
        Ok(None)
    }
}

/// Enumerates (or samples, if the grid exceeds `limit`) level-`m`
/// special-fiber jets and tries to write each as the special fiber of a
/// wedge built in one of the chart frames. Evidence only.
pub fn sample_condition_no(
    tri: &NiceTriplePresentation,
    frames: &[ChartFrame],
    config: LiftConfig,
) -> Result<ConditionNoReport, ArcError> {
    let CoefficientRing::LocalizedIntegers(p) = tri.ring() else {
        return Err(ArcError::NotLocalized(tri.ring()));
    };
    if config.q != p.get() {
        return Err(ArcError::FieldMismatch {
            q: config.q,
            p: p.get(),
        });
    }
    if frames.is_empty() {
        return Err(ArcError::NoFrame);
    }
    let field = CoefficientRing::PrimeField(p);
    let mut charts = Vec::with_capacity(frames.len());
    for f in frames {
        let chart = f.chart().ok_or_else(|| ArcError::NoChart(f.name.clone()))?;
        if chart.len() != tri.nvars() {
            return Err(ArcError::BadFrame(format!(
                "frame `{}` gives {} chart polynomials for {} surface coordinates",
                f.name,
                chart.len(),
                tri.nvars()
            )));
        }
        charts.push(
            chart
                .iter()
                .map(|h| h.reduce_coefficients(field))
                .collect::<Result<Vec<_>, _>>()?,
        );
    }
    let special = fiber_at(tri, Fiber::Special)?;
    let mut report = ConditionNoReport {
        level: config.level,
        field: field.to_string(),
        mode: "exhaustive",
        attempted: 0,
        lifted: 0,
        fraction: None,
        examples: Vec::new(),
        unlifted: Vec::new(),
        label: EVIDENCE_LABEL,
        heuristic: Heuristic::new(LIFT_NOTE),
    };
    if config.budget == 0 {
        return Ok(report);
    }

    let js = generate_jet_system(&special, config.level)?;
    let fp = FpSystem::compile(&js)?;
    let mut jets: Vec<Vec<u64>> = Vec::new();
    match fp.grid_size() {
        Some(g) if g <= config.limit => {
            fp.for_each_solution(config.limit, |pt| {
                jets.push(pt.to_vec());
                if jets.len() as u64 >= config.budget {
                    ControlFlow::Break(())
                } else {
                    ControlFlow::Continue(())
                }
            })?;
        }
        _ => {
            report.mode = "sampled";
            // At most `limit` draws in total.
            let mut block = 0;
            let mut drawn = 0u64;
            'outer: while drawn < config.limit {
                let mut rng = block_rng(config.seed, block);
                for _ in 0..1024 {
                    let pt: Vec<u64> = (0..fp.nvars())
                        .map(|_| rng.random_range(0..fp.prime()))
                        .collect();
                    drawn += 1;
                    if fp.is_solution(&pt) {
                        jets.push(pt);
                        if jets.len() as u64 >= config.budget {
                            break 'outer;
                        }
                    }
                    if drawn >= config.limit {
                        break 'outer;
                    }
                }
                block += 1;
            }
        }
    }

    let lifter = Lifter {
        field,
        level: config.level,
        frames,
        charts,
        relations: special.relations().to_vec(),
        limit: config.limit,
    };
    let n = tri.nvars();
    for pt in &jets {
        let flat: Vec<Scalar> = pt.iter().map(|v| field.from_i64(*v as i64)).collect();
        let jet = ArcAssignment::from_flat(field, n, config.level, &flat)?.series();
        report.attempted += 1;
        match lifter.lift(&jet)? {
            Some(ex) => {
                report.lifted += 1;
                if report.examples.len() < MAX_EXAMPLES {
                    report.examples.push(ex);
                }
            }
            None if report.unlifted.len() < MAX_EXAMPLES => {
                report
                    .unlifted
                    .push(jet.iter().map(format_series).collect());
            }
            None => {}
        }
    }
    report.fraction =
        (report.attempted > 0).then(|| report.lifted as f64 / report.attempted as f64);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::numbered_vars;

    fn q() -> CoefficientRing {
        CoefficientRing::Rationals
    }

    fn f5() -> CoefficientRing {
        CoefficientRing::prime_field(5).unwrap()
    }

    fn frame3(case: FrameCase) -> ChartFrame {
        ChartFrame::new("c", case, vec!["u".into(), "x1".into(), "x2".into()], None).unwrap()
    }

    fn wedge(field: CoefficientRing, prec: usize, comps: &[&str]) -> Wedge {
        Wedge::parse(field, (prec, prec), comps).unwrap()
    }

    #[test]
    fn wedge_examples() {
        let fr = frame3(FrameCase::TwoComponents);
        let a = Arc::parse(q(), 4, &["0", "t^2", "t^3"]).unwrap();
        assert_eq!(
            wedge_from_arc(&a, &fr).unwrap(),
            wedge(q(), 4, &["u*t", "t^2", "t^3"])
        );
        let a = Arc::parse(q(), 3, &["0", "0", "t"]).unwrap();
        assert_eq!(wedge_from_arc(&a, &fr).unwrap().to_string(), "(u*t, 0, t)");
        let a = Arc::parse(f5(), 3, &["0", "t", "t"]).unwrap();
        assert_eq!(
            wedge_from_arc(&a, &fr).unwrap(),
            wedge(f5(), 3, &["u*t", "t", "t"])
        );
        let bad = Arc::parse(q(), 3, &["t", "t", "t"]).unwrap();
        assert_eq!(wedge_from_arc(&bad, &fr), Err(ArcError::NotInSpecialFiber));
    }

    #[test]
    fn specialization_examples() {
        let s = |w: &[&str]| specialize_at_zero(&wedge(q(), 3, w));
        assert_eq!(
            s(&["u*t", "t^2", "t^3"]),
            Arc::parse(q(), 3, &["0", "t^2", "t^3"]).unwrap()
        );
        assert_eq!(
            s(&["u*t", "0", "t"]),
            Arc::parse(q(), 3, &["0", "0", "t"]).unwrap()
        );
        assert_eq!(s(&["u^2*t + u*t^2", "t", "0"]).to_string(), "(0, t, 0)");
    }

    #[test]
    fn witness_examples() {
        let w = generic_fiber_witness(&wedge(q(), 4, &["u*t", "t^2", "t^3"]));
        assert!(w.holds);
        assert_eq!(w.certificate.as_deref(), Some("u*t"));
        assert!(!generic_fiber_witness(&wedge(q(), 4, &["0", "t^2", "t^3"])).holds);
        let w = generic_fiber_witness(&wedge(q(), 5, &["u^3*t^2", "t", "t"]));
        assert_eq!(w.certificate.as_deref(), Some("u^3*t^2"));
    }

    #[test]
    fn contact_examples() {
        let vars = numbered_vars("Y", 3);
        let g = parse_polynomial("Y1*Y2 - Y3^2", &vars, q()).unwrap();
        let on = Arc::parse(q(), 6, &["t", "t", "t"]).unwrap();
        assert_eq!(contact_order(&on, &g).unwrap(), ContactOrder::AtLeast(7));
        let off = Arc::parse(q(), 6, &["t", "2*t", "t"]).unwrap();
        assert_eq!(contact_order(&off, &g).unwrap(), ContactOrder::Finite(2));
        let cusp = Arc::parse(q(), 6, &["t^2", "t^3"]).unwrap();
        let y1 = parse_polynomial("Y1", &numbered_vars("Y", 2), q()).unwrap();
        assert_eq!(contact_order(&cusp, &y1).unwrap(), ContactOrder::Finite(2));
        assert_eq!(ContactOrder::AtLeast(7).to_string(), ">= 7");
    }

    #[test]
    fn s_arcs_and_fields() {
        assert!(Arc::parse(q(), 3, &["t", "t^2"]).unwrap().is_s_arc());
        assert!(!Arc::parse(q(), 3, &["1 + t", "t^2"]).unwrap().is_s_arc());
        assert_eq!(
            Arc::parse(CoefficientRing::Integers, 3, &["t"]),
            Err(ArcError::NotAField(CoefficientRing::Integers))
        );
    }

    #[test]
    fn frames_validate() {
        let two = vec!["u".to_string(), "x1".to_string()];
        assert!(ChartFrame::new("a", FrameCase::SingleComponent, two.clone(), None).is_ok());
        assert!(matches!(
            ChartFrame::new("b", FrameCase::TwoComponents, two, None),
            Err(ArcError::BadFrame(_))
        ));
        let dup = vec!["u".to_string(), "x".to_string(), "x".to_string()];
        assert!(ChartFrame::new("c", FrameCase::TwoComponents, dup, None).is_err());
    }

    fn a1_over_z2() -> NiceTriplePresentation {
        let r = CoefficientRing::localized(2).unwrap();
        NiceTriplePresentation::parse("A1", r, numbered_vars("Y", 3), &["Y1*Y2 - Y3^2"]).unwrap()
    }

    fn blow_up_chart(ring: CoefficientRing) -> ChartFrame {
        ChartFrame::parse_chart(
            "blow-up",
            FrameCase::TwoComponents,
            vec!["u".into(), "x1".into(), "x2".into()],
            ring,
            &["x1", "x1*x2^2", "x1*x2"],
        )
        .unwrap()
    }

    fn config(level: usize, q: u64, budget: u64) -> LiftConfig {
        LiftConfig {
            level,
            q,
            budget,
            seed: 7,
            limit: 1_000_000,
        }
    }

    #[test]
    fn a1_lifting_processes_every_jet() {
        let tri = a1_over_z2();
        let fr = blow_up_chart(tri.ring());
        let r = sample_condition_no(&tri, &[fr], config(2, 2, 1000)).unwrap();
        assert_eq!(r.mode, "exhaustive");
        assert_eq!(r.attempted, 32);
        assert!(r.lifted > 0 && r.lifted <= 32);
        assert_eq!(r.label, EVIDENCE_LABEL);
        assert!(r.heuristic.not_a_theorem);
        assert!(r.examples.len() <= MAX_EXAMPLES);
        assert!(r.examples.iter().all(|e| e.witness == "u*t"));
    }

    #[test]
    fn smooth_triple_lifts_completely() {
        let r = CoefficientRing::localized(3).unwrap();
        let tri =
            NiceTriplePresentation::parse("smooth", r, numbered_vars("Y", 1), &["Y1"]).unwrap();
        let fr = ChartFrame::parse_chart(
            "identity",
            FrameCase::SingleComponent,
            vec!["u".into(), "x1".into()],
            r,
            &["x1"],
        )
        .unwrap();
        let rep = sample_condition_no(&tri, &[fr], config(1, 3, 100)).unwrap();
        assert_eq!((rep.attempted, rep.lifted), (1, 1));
        assert_eq!(rep.fraction, Some(1.0));
    }

    #[test]
    fn lifting_configuration() {
        let tri = a1_over_z2();
        let fr = blow_up_chart(tri.ring());
        let empty = sample_condition_no(&tri, std::slice::from_ref(&fr), config(2, 2, 0)).unwrap();
        assert_eq!((empty.attempted, empty.lifted), (0, 0));
        assert!(empty.examples.is_empty() && empty.fraction.is_none());
        assert_eq!(
            sample_condition_no(&tri, &[], config(2, 2, 5)),
            Err(ArcError::NoFrame)
        );
        assert!(matches!(
            sample_condition_no(&tri, std::slice::from_ref(&fr), config(2, 3, 5)),
            Err(ArcError::FieldMismatch { q: 3, p: 2 })
        ));
        let no_chart = frame3(FrameCase::TwoComponents);
        assert!(matches!(
            sample_condition_no(&tri, &[no_chart], config(2, 2, 5)),
            Err(ArcError::NoChart(_))
        ));
    }

    #[test]
    fn sampled_mode_is_seeded() {
        let tri = a1_over_z2();
        let fr = blow_up_chart(tri.ring());
        let mut c = config(3, 2, 10);
        c.limit = 300;
        let a = sample_condition_no(&tri, std::slice::from_ref(&fr), c).unwrap();
        let b = sample_condition_no(&tri, std::slice::from_ref(&fr), c).unwrap();
        assert_eq!(a.mode, "sampled");
        assert_eq!(a, b);
        assert!(a.attempted <= 10);
    }

    #[test]
    fn pushed_wedge_keeps_special_residuals() {
        let tri = a1_over_z2();
        let field = CoefficientRing::prime_field(2).unwrap();
        let fr = blow_up_chart(tri.ring());
        let fr = ChartFrame::new(
            fr.name(),
            fr.case(),
            fr.coordinates().to_vec(),
            Some(
                fr.chart()
                    .unwrap()
                    .iter()
                    .map(|h| h.reduce_coefficients(field).unwrap())
                    .collect(),
            ),
        )
        .unwrap();
        let arc = Arc::parse(field, 4, &["0", "t", "t + t^2"]).unwrap();
        let image = push_forward(&wedge_from_arc(&arc, &fr).unwrap(), &fr).unwrap();
        let at_zero: Vec<_> = image.iter().map(BivariateSeries::at_u_zero).collect();
        let f = tri.relations()[0].reduce_coefficients(field).unwrap();
        assert!(f.evaluate_in(&at_zero).unwrap().is_zero());
    }
}
