//! Local intersection multiplicity of two plane curve germs at the origin,
//! as the length of `k[x,y]_(x,y) / (f, g)`.
//!
//! `D(d) = dim k[x,y]/(f, g, m^d)` is nondecreasing in `d`. Once
//! `D(d+1) = D(d)`, Nakayama gives `m^d ⊂ (f, g)` locally, so `D(d)` is the
//! local length. A common branch through the origin makes `D` grow forever;
//! the degree cap turns that into a `not isolated` answer.

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::expr::{parse_polynomial, ParseError};
use crate::ring::{CoefficientRing, Monomial, RingError, Scalar, SparsePoly};
use num_traits::Zero;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IntersectError {
    #[error("intersection multiplicities need a field, got {0}")]
    NotAField(CoefficientRing),
    #[error("expected polynomials in 2 variables, got {0}")]
    Arity(usize),
    #[error("{0} does not vanish at the origin")]
    ConstantTerm(&'static str),
    #[error("degree cap must be at least 1")]
    ZeroCap,
    #[error("curves share a branch through point `{point}` (no stabilization up to degree {cap})")]
    NotIsolated { point: String, cap: usize },
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Ring(#[from] RingError),
}

/// Two germs through the origin of the affine plane.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalPair {
    field: CoefficientRing,
    f: SparsePoly,
    g: SparsePoly,
}

impl LocalPair {
    pub fn new(
        field: CoefficientRing,
        f: SparsePoly,
        g: SparsePoly,
    ) -> Result<Self, IntersectError> {
        if !field.is_field() {
            return Err(IntersectError::NotAField(field));
        }
        for p in [&f, &g] {
            if p.nvars() != 2 {
                return Err(IntersectError::Arity(p.nvars()));
            }
        }
        let f = f.reduce_coefficients(field)?;
        let g = g.reduce_coefficients(field)?;
        if !f.constant_term().is_zero() {
            return Err(IntersectError::ConstantTerm("f"));
        }
        if !g.constant_term().is_zero() {
            return Err(IntersectError::ConstantTerm("g"));
        }
        Ok(LocalPair { field, f, g })
    }

    /// Both curves as expressions in `x, y`.
    pub fn parse(field: CoefficientRing, f: &str, g: &str) -> Result<Self, IntersectError> {
        let vars = ["x".to_string(), "y".to_string()];
        let f = parse_polynomial(f, &vars, field)?;
        let g = parse_polynomial(g, &vars, field)?;
        LocalPair::new(field, f, g)
    }

    pub fn field(&self) -> CoefficientRing {
        self.field
    }

    pub fn f(&self) -> &SparsePoly {
        &self.f
    }

    pub fn g(&self) -> &SparsePoly {
        &self.g
    }

    pub fn swapped(&self) -> Self {
        LocalPair {
            field: self.field,
            f: self.g.clone(),
            g: self.f.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Multiplicity {
    Finite {
        multiplicity: u64,
        stabilized_at: usize,
    },
    NotIsolated {
        cap: usize,
    },
}

impl Multiplicity {
    pub fn value(&self) -> Option<u64> {
        match self {
            Multiplicity::Finite { multiplicity, .. } => Some(*multiplicity),
            Multiplicity::NotIsolated { .. } => None,
        }
    }
}

impl Serialize for Multiplicity {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Wire {
            #[serde(skip_serializing_if = "Option::is_none")]
            multiplicity: Option<u64>,
            #[serde(skip_serializing_if = "std::ops::Not::not")]
            not_isolated: bool,
            stabilized_at: Option<usize>,
            cap: Option<usize>,
        }
        let w = match *self {
            Multiplicity::Finite {
                multiplicity,
                stabilized_at,
            } => Wire {
                multiplicity: Some(multiplicity),
                not_isolated: false,
                stabilized_at: Some(stabilized_at),
                cap: None,
            },
            Multiplicity::NotIsolated { cap } => Wire {
                multiplicity: None,
                not_isolated: true,
                stabilized_at: None,
                cap: Some(cap),
            },
        };
        w.serialize(s)
    }
}

/// Row-echelon basis over a field, rows stored densely.
struct Echelon<'a> {
    field: &'a CoefficientRing,
    rows: Vec<(usize, Vec<Scalar>)>,
}

impl Echelon<'_> {
    fn insert(&mut self, mut v: Vec<Scalar>) {
        for (pivot, row) in &self.rows {
            if v[*pivot].is_zero() {
                continue;
            }
            let c = v[*pivot].clone();
            for (x, r) in v.iter_mut().zip(row) {
                if !r.is_zero() {
                    *x = self.field.sub(x, &self.field.mul(&c, r));
                }
            }
        }
        let Some(pivot) = v.iter().position(|x| !x.is_zero()) else {
            return;
        };
        let inv = self.field.inv(&v[pivot]).expect("field");
        for x in v.iter_mut() {
            *x = self.field.mul(x, &inv);
        }
        // Keep earlier rows reduced against the new pivot.
        for (_, row) in self.rows.iter_mut() {
            if row[pivot].is_zero() {
                continue;
            }
            let c = row[pivot].clone();
            for (x, r) in row.iter_mut().zip(&v) {
                if !r.is_zero() {
                    *x = self.field.sub(x, &self.field.mul(&c, r));
                }
            }
        }
        self.rows.push((pivot, v));
    }
}

/// Dense index of `x^a y^b` among monomials of degree `< d`, by degree then
/// `b`.
fn monomial_index(a: usize, b: usize) -> usize {
    let k = a + b;
    k * (k + 1) / 2 + b
}

/// `dim k[x,y]/(f, g, m^d)`.
pub fn truncated_colength(pair: &LocalPair, d: usize) -> u64 {
    let total = d * (d + 1) / 2;
    let mut basis = Echelon {
        field: &pair.field,
        rows: Vec::new(),
    };
    for h in [&pair.f, &pair.g] {
        let Some(low) = h.order() else { continue };
        let low = low as usize;
        for k in 0..d.saturating_sub(low) {
            for b in 0..=k {
                let a = k - b;
                let mut v = vec![Scalar::zero(); total];
                for (m, c) in h.terms() {
                    let e = m.exponents();
                    let (x, y) = (e[0] as usize + a, e[1] as usize + b);
                    if x + y < d {
                        v[monomial_index(x, y)] = c.clone();
                    }
                }
                basis.insert(v);
            }
        }
    }
    (total - basis.rows.len()) as u64
}

/// Length of the local quotient at the origin, or `NotIsolated` if
/// `D(d)` has not stabilized by `d = cap`.
pub fn local_intersection_multiplicity(
    pair: &LocalPair,
    degree_cap: usize,
) -> Result<Multiplicity, IntersectError> {
    if degree_cap == 0 {
        return Err(IntersectError::ZeroCap);
    }
    let mut prev = truncated_colength(pair, 1);
    for d in 2..=degree_cap {
        let cur = truncated_colength(pair, d);
        if cur == prev {
            return Ok(Multiplicity::Finite {
                multiplicity: cur,
                stabilized_at: d - 1,
            });
        }
        prev = cur;
    }
    Ok(Multiplicity::NotIsolated { cap: degree_cap })
}

/// Sum of local multiplicities over labelled points; stops at the first
/// point where the curves are not isolated.
pub fn pairwise_total_intersection(
    pairs: &[(String, LocalPair)],
    degree_cap: usize,
) -> Result<u64, IntersectError> {
    let mut total = 0;
    for (label, pair) in pairs {
        match local_intersection_multiplicity(pair, degree_cap)? {
            Multiplicity::Finite { multiplicity, .. } => total += multiplicity,
            Multiplicity::NotIsolated { cap } => {
                return Err(IntersectError::NotIsolated {
                    point: label.clone(),
                    cap,
                })
            }
        }
    }
    Ok(total)
}

/// Lowest-degree homogeneous part.
pub fn tangent_cone(p: &SparsePoly) -> SparsePoly {
    let Some(low) = p.order() else {
        return p.clone();
    };
    SparsePoly::from_terms(
        p.ring(),
        p.nvars(),
        p.terms()
            .filter(|(m, _)| m.degree() == low)
            .map(|(m, c): (&Monomial, &Scalar)| (m.exponents().to_vec(), c.clone())),
    )
    .expect("normalized")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q() -> CoefficientRing {
        CoefficientRing::Rationals
    }

    fn mult(f: &str, g: &str) -> Multiplicity {
        local_intersection_multiplicity(&LocalPair::parse(q(), f, g).unwrap(), 12).unwrap()
    }

    #[test]
    fn examples() {
        assert_eq!(mult("x", "y").value(), Some(1));
        assert_eq!(mult("y", "y - x^2").value(), Some(2));
        assert_eq!(mult("y", "y^2 - x^3").value(), Some(3));
        assert_eq!(mult("y", "x*y"), Multiplicity::NotIsolated { cap: 12 });
    }

    #[test]
    fn colengths_grow_along_a_common_branch() {
        let p = LocalPair::parse(q(), "y", "x*y").unwrap();
        let ds: Vec<u64> = (1..6).map(|d| truncated_colength(&p, d)).collect();
        assert_eq!(ds, vec![1, 2, 3, 4, 5]);
    }

    #[test]
    fn tacnode_and_cusps() {
        // Two smooth branches with contact order 2: tacnode pair.
        assert_eq!(mult("y - x^2", "y + x^2").value(), Some(2));
        // Cusp against its tangent line and against a transversal line.
        assert_eq!(mult("y^2 - x^3", "x").value(), Some(2));
        // Two cusps with the same tangent: 2 * 3 = 6.
        assert_eq!(mult("y^2 - x^3", "y^2 + x^3").value(), Some(6));
        assert_eq!(mult("x^2 - y^3", "y^2 - x^3").value(), Some(4));
    }

    #[test]
    fn over_prime_fields() {
        let f5 = CoefficientRing::prime_field(5).unwrap();
        let p = LocalPair::parse(f5, "y", "y - x^2").unwrap();
        assert_eq!(
            local_intersection_multiplicity(&p, 8).unwrap().value(),
            Some(2)
        );
        // y^2 - x^2 = (y - x)(y + x) except over F_2 where it is (y + x)^2.
        let f2 = CoefficientRing::prime_field(2).unwrap();
        let p = LocalPair::parse(f2, "y^2 - x^2", "y + x").unwrap();
        assert!(matches!(
            local_intersection_multiplicity(&p, 8).unwrap(),
            Multiplicity::NotIsolated { .. }
        ));
    }

    #[test]
    fn preconditions() {
        assert_eq!(
            LocalPair::parse(q(), "x + 1", "y"),
            Err(IntersectError::ConstantTerm("f"))
        );
        assert_eq!(
            LocalPair::parse(CoefficientRing::Integers, "x", "y"),
            Err(IntersectError::NotAField(CoefficientRing::Integers))
        );
        let p = LocalPair::parse(q(), "x", "y").unwrap();
        assert_eq!(
            local_intersection_multiplicity(&p, 0),
            Err(IntersectError::ZeroCap)
        );
        assert!(matches!(
            local_intersection_multiplicity(&p, 1).unwrap(),
            Multiplicity::NotIsolated { cap: 1 }
        ));
    }

    #[test]
    fn totals() {
        let pair = |f: &str, g: &str| LocalPair::parse(q(), f, g).unwrap();
        let two = vec![
            ("P".to_string(), pair("x", "y")),
            ("Q".to_string(), pair("x", "y")),
        ];
        assert_eq!(pairwise_total_intersection(&two, 8).unwrap(), 2);
        let mixed = vec![
            ("P".to_string(), pair("y", "y - x^2")),
            ("Q".to_string(), pair("x", "y")),
        ];
        assert_eq!(pairwise_total_intersection(&mixed, 8).unwrap(), 3);
        assert_eq!(pairwise_total_intersection(&[], 8).unwrap(), 0);
        let bad = vec![
            ("P".to_string(), pair("x", "y")),
            ("R".to_string(), pair("y", "x*y")),
        ];
        assert_eq!(
            pairwise_total_intersection(&bad, 8),
            Err(IntersectError::NotIsolated {
                point: "R".into(),
                cap: 8
            })
        );
    }

    #[test]
    fn json_shape() {
        let fin = serde_json::to_string(&mult("y", "y - x^2")).unwrap();
        assert_eq!(fin, r#"{"multiplicity":2,"stabilized_at":2,"cap":null}"#);
        let inf = serde_json::to_string(&mult("y", "x*y")).unwrap();
        assert_eq!(
            inf,
            r#"{"not_isolated":true,"stabilized_at":null,"cap":12}"#
        );
    }

    #[test]
    fn cones() {
        let p = LocalPair::parse(q(), "y^2 - x^3 + x*y", "x").unwrap();
        let c = tangent_cone(p.f());
        assert_eq!(c.total_degree(), Some(2));
        assert_eq!(c.num_terms(), 2);
    }
}
