//! Finite presentations of nice triples and their level-`m` jet equations.
//!
//! A triple is presented as `Λ[[Y1..Yn]] / (f1..fs)` with every `f_j`
//! vanishing at the origin. A level-`m` jet is a substitution
//! `Y_i = a_i1 t + ... + a_im t^m` into `A[t]/(t^(m+1))`; expanding `f_j`
//! under the generic substitution `Y_i = Σ_q A_iq t^q` gives
//! `f_j = Σ_q F_jq(A) t^q`, and the `F_jq` cut out the level-`m` jet scheme.
//! The `t^0` coefficient is identically zero, so `q` runs over `1..=m`.

use std::fmt;

use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::expr::{self, ParseError};
use crate::ring::{Algebra, CoefficientRing, RingError, Scalar, SparsePoly, TruncatedSeries};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum JetError {
    #[error(transparent)]
    Ring(#[from] RingError),
    #[error("relation {index}: {source}")]
    Parse { index: usize, source: ParseError },
    #[error("relation {index} has a nonzero constant term")]
    ConstantTerm { index: usize },
    #[error("a presentation needs at least one variable")]
    NoVariables,
    #[error("relation {index} lives in {got} variables, expected {expected}")]
    RelationArity {
        index: usize,
        got: usize,
        expected: usize,
    },
    #[error("relation {index} is over {got}, expected {expected}")]
    RelationRing {
        index: usize,
        got: CoefficientRing,
        expected: CoefficientRing,
    },
    #[error("jet level must be at least 1")]
    LevelZero,
    #[error("assignment has shape {got:?}, expected {expected:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        got: (usize, usize),
    },
    #[error("{to} is not an algebra over {from}")]
    NoAlgebraStructure {
        from: CoefficientRing,
        to: CoefficientRing,
    },
    #[error("resource limit exceeded: {0}")]
    LimitExceeded(String),
    #[error("truncation certificate failed: F_{j},{q} differs between levels {m_hi} and {m_lo}")]
    Certification {
        j: usize,
        q: usize,
        m_hi: usize,
        m_lo: usize,
    },
    #[error("projection needs m_hi >= m_lo, got {m_hi} < {m_lo}")]
    LevelOrder { m_hi: usize, m_lo: usize },
    #[error("fibers are only defined for triples over Z_(p), got {0}")]
    WrongFiberRing(CoefficientRing),
}

/// `Λ[[Y1..Yn]]/(f1..fs)` with `I = (Y1..Yn)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NiceTriplePresentation {
    label: String,
    ring: CoefficientRing,
    variables: Vec<String>,
    relations: Vec<SparsePoly>,
}

impl NiceTriplePresentation {
    pub fn new(
        label: impl Into<String>,
        ring: CoefficientRing,
        variables: Vec<String>,
        relations: Vec<SparsePoly>,
    ) -> Result<Self, JetError> {
        if variables.is_empty() {
            return Err(JetError::NoVariables);
        }
        let n = variables.len();
        for (index, f) in relations.iter().enumerate() {
            if f.nvars() != n {
                return Err(JetError::RelationArity {
                    index,
                    got: f.nvars(),
                    expected: n,
                });
            }
            if f.ring() != ring {
                return Err(JetError::RelationRing {
                    index,
                    got: f.ring(),
                    expected: ring,
                });
            }
            if !f.constant_term().is_zero() {
                return Err(JetError::ConstantTerm { index });
            }
        }
        Ok(NiceTriplePresentation {
            label: label.into(),
            ring,
            variables,
            relations,
        })
    }

    /// Parses relation strings in the given variables.
    pub fn parse<S: AsRef<str>>(
        label: impl Into<String>,
        ring: CoefficientRing,
        variables: Vec<String>,
        relations: &[S],
    ) -> Result<Self, JetError> {
        let polys = relations
            .iter()
            .enumerate()
            .map(|(index, src)| {
                expr::parse_polynomial(src.as_ref(), &variables, ring)
                    .map_err(|source| JetError::Parse { index, source })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(label, ring, variables, polys)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn ring(&self) -> CoefficientRing {
        self.ring
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn nvars(&self) -> usize {
        self.variables.len()
    }

    pub fn relations(&self) -> &[SparsePoly] {
        &self.relations
    }

    pub fn relation_strings(&self) -> Vec<String> {
        self.relations
            .iter()
            .map(|f| expr::format_polynomial(f, &self.variables))
            .collect()
    }

    /// Same relations listed in a different order (`order[k]` is the old
    /// index of the new `k`-th relation).
    pub fn permuted(&self, order: &[usize]) -> Self {
        NiceTriplePresentation {
            label: self.label.clone(),
            ring: self.ring,
            variables: self.variables.clone(),
            relations: order.iter().map(|&k| self.relations[k].clone()).collect(),
        }
    }
}

/// Bounds on generation cost. The defaults are far above desk-scale use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct JetLimits {
    pub max_level: usize,
    pub max_terms: usize,
}

impl Default for JetLimits {
    fn default() -> Self {
        JetLimits {
            max_level: 64,
            max_terms: 2_000_000,
        }
    }
}

/// Index of `A_ij` (1-based `i`, `j`) among the `n * m` jet variables.
pub fn jet_variable_index(m: usize, i: usize, j: usize) -> usize {
    (i - 1) * m + (j - 1)
}

/// Names `A{i}_{j}` in variable-index order.
pub fn jet_variable_names(n: usize, m: usize) -> Vec<String> {
    let mut out = Vec::with_capacity(n * m);
    for i in 1..=n {
        for j in 1..=m {
            out.push(format!("A{i}_{j}"));
        }
    }
    out
}

/// The equation grid `F_jq`, `j = 1..s`, `q = 1..m`, in the `n * m` variables
/// `A_ij`. Zero equations are kept so the grid shape never changes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JetSystem {
    ring: CoefficientRing,
    n: usize,
    m: usize,
    equations: Vec<Vec<SparsePoly>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct JetStatistics {
    pub level: usize,
    pub variables: usize,
    pub equations: usize,
    pub nonzero_equations: usize,
    pub max_degree: u32,
    pub total_terms: usize,
}

impl JetSystem {
    pub fn ring(&self) -> CoefficientRing {
        self.ring
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn level(&self) -> usize {
        self.m
    }

    pub fn num_relations(&self) -> usize {
        self.equations.len()
    }

    pub fn nvars(&self) -> usize {
        self.n * self.m
    }

    /// `F_jq` with 1-based `j` and `q`.
    pub fn equation(&self, j: usize, q: usize) -> &SparsePoly {
        &self.equations[j - 1][q - 1]
    }

    pub fn equations(&self) -> &[Vec<SparsePoly>] {
        &self.equations
    }

    pub fn all_equations(&self) -> impl Iterator<Item = &SparsePoly> {
        self.equations.iter().flatten()
    }

    pub fn variable_names(&self) -> Vec<String> {
        jet_variable_names(self.n, self.m)
    }

    pub fn statistics(&self) -> JetStatistics {
        JetStatistics {
            level: self.m,
            variables: self.nvars(),
            equations: self.equations.iter().map(Vec::len).sum(),
            nonzero_equations: self.all_equations().filter(|f| !f.is_zero()).count(),
            max_degree: self
                .all_equations()
                .filter_map(SparsePoly::total_degree)
                .max()
                .unwrap_or(0),
            total_terms: self.all_equations().map(SparsePoly::num_terms).sum(),
        }
    }

    pub fn reduce_coefficients(&self, target: CoefficientRing) -> Result<JetSystem, RingError> {
        Ok(JetSystem {
            ring: target,
            n: self.n,
            m: self.m,
            equations: self
                .equations
                .iter()
                .map(|row| row.iter().map(|f| f.reduce_coefficients(target)).collect())
                .collect::<Result<_, _>>()?,
        })
    }

    /// Whether every `F_jq` vanishes at the assignment.
    pub fn is_solution(&self, a: &ArcAssignment) -> Result<bool, JetError> {
        if a.shape() != (self.n, self.m) {
            return Err(JetError::ShapeMismatch {
                expected: (self.n, self.m),
                got: a.shape(),
            });
        }
        let point = a.to_point_in(self.ring)?;
        for f in self.all_equations() {
            if !f.evaluate(&point)?.is_zero() {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

#[derive(Serialize, Deserialize)]
struct JetSystemWire {
    ring: CoefficientRing,
    n: usize,
    m: usize,
    equations: Vec<Vec<Vec<(Vec<u32>, String)>>>,
}

impl Serialize for JetSystem {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        JetSystemWire {
            ring: self.ring,
            n: self.n,
            m: self.m,
            equations: self
                .equations
                .iter()
                .map(|row| row.iter().map(SparsePoly::to_wire).collect())
                .collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for JetSystem {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let w = JetSystemWire::deserialize(deserializer)?;
        let nvars = w.n * w.m;
        let equations = w
            .equations
            .iter()
            .map(|row| {
                if row.len() != w.m {
                    return Err(serde::de::Error::custom(format!(
                        "equation row has {} entries, expected {}",
                        row.len(),
                        w.m
                    )));
                }
                row.iter()
                    .map(|p| {
                        SparsePoly::from_wire(w.ring, nvars, p).map_err(serde::de::Error::custom)
                    })
                    .collect()
            })
            .collect::<Result<_, _>>()?;
        Ok(JetSystem {
            ring: w.ring,
            n: w.n,
            m: w.m,
            equations,
        })
    }
}

/// A point `a_ij` of the jet functor with values in `A`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArcAssignment {
    ring: CoefficientRing,
    values: Vec<Vec<Scalar>>,
}

impl ArcAssignment {
    /// `values[i][j]` is `a_{i+1, j+1}`; rows must have equal length.
    pub fn new(ring: CoefficientRing, values: Vec<Vec<Scalar>>) -> Result<Self, JetError> {
        let m = values.first().map_or(0, Vec::len);
        if let Some(bad) = values.iter().find(|r| r.len() != m) {
            return Err(JetError::ShapeMismatch {
                expected: (values.len(), m),
                got: (values.len(), bad.len()),
            });
        }
        let values = values
            .into_iter()
            .map(|row| row.iter().map(|c| ring.normalize(c)).collect())
            .collect::<Result<_, _>>()?;
        Ok(ArcAssignment { ring, values })
    }

    /// Inverse of [`ArcAssignment::flat`].
    pub fn from_flat(
        ring: CoefficientRing,
        n: usize,
        m: usize,
        flat: &[Scalar],
    ) -> Result<Self, JetError> {
        if flat.len() != n * m {
            return Err(JetError::ShapeMismatch {
                expected: (n, m),
                got: (flat.len(), 1),
            });
        }
        Self::new(
            ring,
            flat.chunks(m.max(1)).map(<[Scalar]>::to_vec).collect(),
        )
    }

    pub fn ring(&self) -> CoefficientRing {
        self.ring
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.values.len(), self.values.first().map_or(0, Vec::len))
    }

    pub fn value(&self, i: usize, j: usize) -> &Scalar {
        &self.values[i - 1][j - 1]
    }

    /// Values in jet-variable order (see [`jet_variable_index`]).
    pub fn flat(&self) -> Vec<Scalar> {
        self.values.iter().flatten().cloned().collect()
    }

    fn to_point_in(&self, ring: CoefficientRing) -> Result<Vec<Scalar>, JetError> {
        if self.ring == ring {
            return Ok(self.flat());
        }
        // Push the equations to A with `reduce_coefficients` first.
        Err(JetError::Ring(RingError::RingMismatch {
            left: ring,
            right: self.ring,
        }))
    }

    /// The truncated arcs `z_i = Σ_j a_ij t^j`.
    pub fn series(&self) -> Vec<TruncatedSeries> {
        let m = self.shape().1;
        self.values
            .iter()
            .map(|row| {
                let mut c = vec![Scalar::zero()];
                c.extend(row.iter().cloned());
                TruncatedSeries::from_coeffs(self.ring, m, c).expect("normalized")
            })
            .collect()
    }
}

/// Drops all monomials of total degree above `m`; they vanish under any
/// substitution from `(t) ⊂ A[t]/(t^(m+1))`.
pub fn truncate_relation(f: &SparsePoly, m: usize) -> SparsePoly {
    f.truncate_degree(m.min(u32::MAX as usize) as u32)
}

/// Series in `t` with polynomial coefficients, used for the generic
/// substitution.
#[derive(Clone)]
struct PolySeries {
    ring: CoefficientRing,
    coeffs: Vec<SparsePoly>,
}

impl Algebra for PolySeries {
    fn ring(&self) -> CoefficientRing {
        self.ring
    }

    fn zero_like(&self) -> Self {
        let nv = self.coeffs[0].nvars();
        PolySeries {
            ring: self.ring,
            coeffs: vec![SparsePoly::zero(self.ring, nv); self.coeffs.len()],
        }
    }

    fn one_like(&self) -> Self {
        let mut s = self.zero_like();
        s.coeffs[0] = SparsePoly::constant(self.ring, s.coeffs[0].nvars(), self.ring.one());
        s
    }

    fn add(&self, other: &Self) -> Self {
        PolySeries {
            ring: self.ring,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a.add_unchecked(b))
                .collect(),
        }
    }

    fn mul(&self, other: &Self) -> Self {
        let len = self.coeffs.len();
        let mut out = self.zero_like();
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate().take(len - i) {
                if !b.is_zero() {
                    out.coeffs[i + j] = out.coeffs[i + j].add_unchecked(&a.mul_unchecked(b));
                }
            }
        }
        out
    }

    fn scale(&self, c: &Scalar) -> Self {
        PolySeries {
            ring: self.ring,
            coeffs: self.coeffs.iter().map(|p| p.scale(c)).collect(),
        }
    }

    fn is_zero(&self) -> bool {
        self.coeffs.iter().all(SparsePoly::is_zero)
    }
}

pub fn generate_jet_system(tri: &NiceTriplePresentation, m: usize) -> Result<JetSystem, JetError> {
    generate_jet_system_with(tri, m, &JetLimits::default())
}

pub fn generate_jet_system_with(
    tri: &NiceTriplePresentation,
    m: usize,
    limits: &JetLimits,
) -> Result<JetSystem, JetError> {
    if m == 0 {
        return Err(JetError::LevelZero);
    }
    if m > limits.max_level {
        return Err(JetError::LimitExceeded(format!(
            "level {m} above the configured maximum {}",
            limits.max_level
        )));
    }
    let ring = tri.ring();
    let n = tri.nvars();
    let nv = n * m;
    let generic: Vec<PolySeries> = (1..=n)
        .map(|i| {
            let mut coeffs = vec![SparsePoly::zero(ring, nv)];
            for j in 1..=m {
                coeffs.push(SparsePoly::variable(ring, nv, jet_variable_index(m, i, j)));
            }
            PolySeries { ring, coeffs }
        })
        .collect();

    let rows: Vec<Result<Vec<SparsePoly>, JetError>> = tri
        .relations()
        .par_iter()
        .map(|f| {
            let f = truncate_relation(f, m);
            let expanded = f.evaluate_in(&generic)?;
            debug_assert!(expanded.coeffs[0].is_zero());
            Ok(expanded.coeffs.into_iter().skip(1).collect())
        })
        .collect();
    let equations = rows.into_iter().collect::<Result<Vec<_>, _>>()?;
    let terms: usize = equations.iter().flatten().map(SparsePoly::num_terms).sum();
    if terms > limits.max_terms {
        return Err(JetError::LimitExceeded(format!(
            "{terms} terms above the configured maximum {}",
            limits.max_terms
        )));
    }
    Ok(JetSystem {
        ring,
        n,
        m,
        equations,
    })
}

/// Evaluates each `f_j` at `z_i = Σ_j a_ij t^j` inside `A[t]/(t^(m+1))`.
///
/// All residuals vanish exactly when the assignment is an `A`-point of the
/// level-`m` jet scheme, i.e. when every `F_jq` vanishes there.
pub fn evaluate_arc(
    tri: &NiceTriplePresentation,
    a: &ArcAssignment,
    m: usize,
) -> Result<Vec<TruncatedSeries>, JetError> {
    if a.shape() != (tri.nvars(), m) {
        return Err(JetError::ShapeMismatch {
            expected: (tri.nvars(), m),
            got: a.shape(),
        });
    }
    if !tri.ring().maps_to(&a.ring()) {
        return Err(JetError::NoAlgebraStructure {
            from: tri.ring(),
            to: a.ring(),
        });
    }
    let z = a.series();
    tri.relations()
        .iter()
        .map(|f| Ok(f.reduce_coefficients(a.ring())?.evaluate_in(&z)?))
        .collect()
}

/// The forgetful map from level `m_hi` jets to level `m_lo` jets together
/// with its certificate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct JetProjection {
    pub m_hi: usize,
    pub m_lo: usize,
    /// `(name, index at m_hi, index at m_lo)` for every kept variable.
    pub kept: Vec<(String, usize, usize)>,
    pub certified_equations: usize,
}

impl fmt::Display for JetProjection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "level {} -> {}: {} variables kept, {} equations certified",
            self.m_hi,
            self.m_lo,
            self.kept.len(),
            self.certified_equations
        )
    }
}

/// Checks that `F_jq` agrees between two generated levels for `q <= m_lo`.
pub fn certify_projection(hi: &JetSystem, lo: &JetSystem) -> Result<JetProjection, JetError> {
    let (m_hi, m_lo) = (hi.level(), lo.level());
    if m_hi < m_lo {
        return Err(JetError::LevelOrder { m_hi, m_lo });
    }
    let n = hi.n();
    let mut mapping = vec![None; hi.nvars()];
    let mut kept = Vec::new();
    let names = lo.variable_names();
    for i in 1..=n {
        for j in 1..=m_lo {
            let (h, l) = (
                jet_variable_index(m_hi, i, j),
                jet_variable_index(m_lo, i, j),
            );
            mapping[h] = Some(l);
            kept.push((names[l].clone(), h, l));
        }
    }
    let mut certified = 0;
    for j in 1..=hi.num_relations() {
        for q in 1..=m_lo {
            let projected = hi.equation(j, q).remap_vars(lo.nvars(), &mapping);
            if projected.as_ref() != Some(lo.equation(j, q)) {
                return Err(JetError::Certification { j, q, m_hi, m_lo });
            }
            certified += 1;
        }
    }
    Ok(JetProjection {
        m_hi,
        m_lo,
        kept,
        certified_equations: certified,
    })
}

/// Truncation map `R_{m_lo} -> R_{m_hi}` (jets forget their top coefficients),
/// certified by regenerating both levels.
pub fn project_jet(
    tri: &NiceTriplePresentation,
    m_hi: usize,
    m_lo: usize,
) -> Result<JetProjection, JetError> {
    if m_hi < m_lo {
        return Err(JetError::LevelOrder { m_hi, m_lo });
    }
    let hi = generate_jet_system(tri, m_hi)?;
    let lo = generate_jet_system(tri, m_lo)?;
    certify_projection(&hi, &lo)
}

/// Base change of the presentation along `Λ -> target`.
pub fn base_change(
    tri: &NiceTriplePresentation,
    target: CoefficientRing,
) -> Result<NiceTriplePresentation, JetError> {
    let relations = tri
        .relations()
        .iter()
        .map(|f| f.reduce_coefficients(target))
        .collect::<Result<Vec<_>, _>>()?;
    NiceTriplePresentation::new(tri.label(), target, tri.variables().to_vec(), relations)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Fiber {
    /// Closed point: residue field `F_p`.
    Special,
    /// Generic point: fraction field `Q`.
    Generic,
}

impl std::str::FromStr for Fiber {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "special" => Ok(Fiber::Special),
            "generic" => Ok(Fiber::Generic),
            other => Err(format!(
                "unknown fiber `{other}` (expected special or generic)"
            )),
        }
    }
}

/// Fiber of a triple over `Z_(p)` at the closed or generic point.
pub fn fiber_at(
    tri: &NiceTriplePresentation,
    which: Fiber,
) -> Result<NiceTriplePresentation, JetError> {
    let CoefficientRing::LocalizedIntegers(p) = tri.ring() else {
        return Err(JetError::WrongFiberRing(tri.ring()));
    };
    let target = match which {
        Fiber::Special => CoefficientRing::PrimeField(p),
        Fiber::Generic => CoefficientRing::Rationals,
    };
    base_change(tri, target)
}
