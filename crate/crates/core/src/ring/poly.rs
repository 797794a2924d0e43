use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Zero};

use super::{parse_scalar, Algebra, CoefficientRing, RingError, Scalar};

/// Exponent vector of a monomial, ordered graded-lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn new(exponents: Vec<u32>) -> Self {
        Monomial(exponents)
    }

    pub fn one(nvars: usize) -> Self {
        Monomial(vec![0; nvars])
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Sparse polynomial over a [`CoefficientRing`] in a fixed number of
/// variables. Zero coefficients are never stored.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SparsePoly {
    ring: CoefficientRing,
    nvars: usize,
    terms: BTreeMap<Monomial, Scalar>,
}

impl SparsePoly {
    pub fn zero(ring: CoefficientRing, nvars: usize) -> Self {
        SparsePoly {
            ring,
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(ring: CoefficientRing, nvars: usize, c: Scalar) -> Self {
        let mut p = Self::zero(ring, nvars);
        if !c.is_zero() {
            p.terms.insert(Monomial::one(nvars), c);
        }
        p
    }

    /// The `i`-th variable (0-based).
    pub fn variable(ring: CoefficientRing, nvars: usize, i: usize) -> Self {
        assert!(
            i < nvars,
            "variable index {i} out of range for {nvars} variables"
        );
        let mut e = vec![0; nvars];
        e[i] = 1;
        let mut p = Self::zero(ring, nvars);
        p.terms.insert(Monomial(e), Scalar::one());
        p
    }

    /// Builds a polynomial from raw terms, normalizing every coefficient into
    /// `ring` and merging repeated monomials.
    pub fn from_terms<I>(ring: CoefficientRing, nvars: usize, terms: I) -> Result<Self, RingError>
    where
        I: IntoIterator<Item = (Vec<u32>, Scalar)>,
    {
        let mut p = Self::zero(ring, nvars);
        for (e, c) in terms {
            if e.len() != nvars {
                return Err(RingError::BadExponentLength {
                    got: e.len(),
                    expected: nvars,
                });
            }
            let c = ring.normalize(&c)?;
            p.add_term(Monomial(e), c);
        }
        Ok(p)
    }

    pub(crate) fn add_term(&mut self, m: Monomial, c: Scalar) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(v) => {
                let s = self.ring.add(v, &c);
                if s.is_zero() {
                    self.terms.remove(&m);
                } else {
                    *v = s;
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn ring(&self) -> CoefficientRing {
        self.ring
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Terms in descending graded-lex order (leading term first).
    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Scalar)> + '_ {
        self.terms.iter().rev()
    }

    pub fn coefficient(&self, m: &Monomial) -> Scalar {
        self.terms.get(m).cloned().unwrap_or_else(Scalar::zero)
    }

    pub fn constant_term(&self) -> Scalar {
        self.coefficient(&Monomial::one(self.nvars))
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().next_back().map(Monomial::degree)
    }

    /// Lowest total degree of a term; `None` for the zero polynomial.
    pub fn order(&self) -> Option<u32> {
        self.terms.keys().next().map(Monomial::degree)
    }

    /// Indices of variables that occur with positive exponent.
    pub fn variables_used(&self) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        for m in self.terms.keys() {
            for (i, e) in m.0.iter().enumerate() {
                if *e > 0 {
                    out.insert(i);
                }
            }
        }
        out
    }

    fn check_compatible(&self, other: &SparsePoly) -> Result<(), RingError> {
        if self.ring != other.ring {
            return Err(RingError::RingMismatch {
                left: self.ring,
                right: other.ring,
            });
        }
        if self.nvars != other.nvars {
            return Err(RingError::ArityMismatch {
                left: self.nvars,
                right: other.nvars,
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &SparsePoly) -> Result<SparsePoly, RingError> {
        self.check_compatible(other)?;
        Ok(self.add_unchecked(other))
    }

    pub fn sub(&self, other: &SparsePoly) -> Result<SparsePoly, RingError> {
        self.check_compatible(other)?;
        Ok(self.add_unchecked(&other.neg()))
    }

    pub fn mul(&self, other: &SparsePoly) -> Result<SparsePoly, RingError> {
        self.check_compatible(other)?;
        Ok(self.mul_unchecked(other))
    }

    pub(crate) fn add_unchecked(&self, other: &SparsePoly) -> SparsePoly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub(crate) fn mul_unchecked(&self, other: &SparsePoly) -> SparsePoly {
        let mut out = SparsePoly::zero(self.ring, self.nvars);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(ma.mul(mb), self.ring.mul(ca, cb));
            }
        }
        out
    }

    pub fn neg(&self) -> SparsePoly {
        SparsePoly {
            ring: self.ring,
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), self.ring.neg(c)))
                .collect(),
        }
    }

    /// Multiplies by a ring element.
    pub fn scale(&self, c: &Scalar) -> SparsePoly {
        let mut out = SparsePoly::zero(self.ring, self.nvars);
        for (m, v) in &self.terms {
            out.add_term(m.clone(), self.ring.mul(v, c));
        }
        out
    }

    pub fn pow(&self, e: u32) -> SparsePoly {
        let mut acc = SparsePoly::constant(self.ring, self.nvars, Scalar::one());
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul_unchecked(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul_unchecked(&base);
            }
        }
        acc
    }

    /// Drops every monomial of total degree greater than `m`.
    pub fn truncate_degree(&self, m: u32) -> SparsePoly {
        SparsePoly {
            ring: self.ring,
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .filter(|(mono, _)| mono.degree() <= m)
                .map(|(mono, c)| (mono.clone(), c.clone()))
                .collect(),
        }
    }

    /// Image under the canonical coefficient homomorphism into `target`.
    pub fn reduce_coefficients(&self, target: CoefficientRing) -> Result<SparsePoly, RingError> {
        if !self.ring.maps_to(&target) {
            return Err(RingError::UnsupportedMap {
                from: self.ring,
                to: target,
            });
        }
        let mut out = SparsePoly::zero(target, self.nvars);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), target.normalize(c)?);
        }
        Ok(out)
    }

    /// Evaluates at a point of `ring^nvars`.
    pub fn evaluate(&self, point: &[Scalar]) -> Result<Scalar, RingError> {
        if point.len() != self.nvars {
            return Err(RingError::ArityMismatch {
                left: self.nvars,
                right: point.len(),
            });
        }
        let r = self.ring;
        let mut acc = Scalar::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (x, e) in point.iter().zip(&m.0) {
                for _ in 0..*e {
                    t = r.mul(&t, x);
                }
            }
            acc = r.add(&acc, &t);
        }
        Ok(acc)
    }

    /// Substitutes the `i`-th variable by `args[i]` inside a commutative
    /// algebra over the same coefficient ring.
    pub fn evaluate_in<T: Algebra>(&self, args: &[T]) -> Result<T, RingError> {
        if args.len() != self.nvars {
            return Err(RingError::ArityMismatch {
                left: self.nvars,
                right: args.len(),
            });
        }
        if let Some(a) = args.iter().find(|a| a.ring() != self.ring) {
            return Err(RingError::RingMismatch {
                left: self.ring,
                right: a.ring(),
            });
        }
        let template = match args.first() {
            Some(a) => a.zero_like(),
            None => return Err(RingError::NoVariables),
        };
        // powers[i][k] = args[i]^k, filled on demand.
        let mut powers: Vec<Vec<T>> = args.iter().map(|a| vec![a.one_like()]).collect();
        let mut acc = template;
        for (m, c) in &self.terms {
            let mut t = acc.one_like().scale(c);
            for (i, &e) in m.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                while powers[i].len() <= e as usize {
                    let next = powers[i].last().unwrap().mul(&args[i]);
                    powers[i].push(next);
                }
                t = t.mul(&powers[i][e as usize]);
                if t.is_zero() {
                    break;
                }
            }
            acc = acc.add(&t);
        }
        Ok(acc)
    }

    /// Rewrites the polynomial in `new_nvars` variables, sending variable `i`
    /// to `mapping[i]`. Fails if a variable mapped to `None` occurs.
    pub fn remap_vars(&self, new_nvars: usize, mapping: &[Option<usize>]) -> Option<SparsePoly> {
        let mut out = SparsePoly::zero(self.ring, new_nvars);
        for (m, c) in &self.terms {
            let mut e = vec![0; new_nvars];
            for (i, &k) in m.0.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                e[mapping.get(i).copied().flatten()?] += k;
            }
            out.add_term(Monomial(e), c.clone());
        }
        Some(out)
    }

    /// Canonical wire form: `[[exponents...], "coefficient"]` in descending
    /// graded-lex order.
    pub fn to_wire(&self) -> Vec<(Vec<u32>, String)> {
        self.terms()
            .map(|(m, c)| (m.0.clone(), c.to_string()))
            .collect()
    }

    pub fn from_wire(
        ring: CoefficientRing,
        nvars: usize,
        wire: &[(Vec<u32>, String)],
    ) -> Result<SparsePoly, RingError> {
        let terms = wire
            .iter()
            .map(|(e, c)| Ok((e.clone(), parse_scalar(c, &ring)?)))
            .collect::<Result<Vec<_>, RingError>>()?;
        SparsePoly::from_terms(ring, nvars, terms)
    }
}

/// Polynomial composition: `f.evaluate_in(&[g1, ..., gk])` substitutes `g_i`
/// for the `i`-th variable.
impl Algebra for SparsePoly {
    fn ring(&self) -> CoefficientRing {
        self.ring
    }

    fn zero_like(&self) -> Self {
        SparsePoly::zero(self.ring, self.nvars)
    }

    fn one_like(&self) -> Self {
        SparsePoly::constant(self.ring, self.nvars, Scalar::one())
    }

    fn add(&self, other: &Self) -> Self {
        self.add_unchecked(other)
    }

    fn mul(&self, other: &Self) -> Self {
        self.mul_unchecked(other)
    }

    fn scale(&self, c: &Scalar) -> Self {
        SparsePoly::scale(self, c)
    }

    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::TruncatedSeries;
    use num_rational::BigRational;
    use proptest::prelude::*;

    fn int(v: i64) -> Scalar {
        BigRational::from_integer(v.into())
    }

    fn poly(ring: CoefficientRing, nvars: usize, terms: &[(&[u32], i64)]) -> SparsePoly {
        SparsePoly::from_terms(
            ring,
            nvars,
            terms.iter().map(|(e, c)| (e.to_vec(), int(*c))),
        )
        .unwrap()
    }

    #[test]
    fn cancellation() {
        let z = CoefficientRing::Integers;
        let a = poly(z, 2, &[(&[1, 0], 1), (&[0, 1], 1)]);
        let b = poly(z, 2, &[(&[0, 1], -1)]);
        assert_eq!(a.add(&b).unwrap(), SparsePoly::variable(z, 2, 0));
    }

    #[test]
    fn squares_mod_two() {
        let f2 = CoefficientRing::prime_field(2).unwrap();
        let y1 = SparsePoly::variable(f2, 2, 0);
        let y2 = SparsePoly::variable(f2, 2, 1);
        assert_eq!(y1.mul(&y1).unwrap(), poly(f2, 2, &[(&[2, 0], 1)]));
        let s = y1.add(&y2).unwrap();
        // 2*Y1*Y2 vanishes in characteristic 2.
        assert_eq!(
            s.mul(&s).unwrap(),
            poly(f2, 2, &[(&[2, 0], 1), (&[0, 2], 1)])
        );
    }

    #[test]
    fn mismatched_rings_are_rejected() {
        let a = SparsePoly::variable(CoefficientRing::Integers, 1, 0);
        let b = SparsePoly::variable(CoefficientRing::Rationals, 1, 0);
        assert!(matches!(a.add(&b), Err(RingError::RingMismatch { .. })));
        let c = SparsePoly::variable(CoefficientRing::Integers, 2, 0);
        assert!(matches!(a.mul(&c), Err(RingError::ArityMismatch { .. })));
    }

    #[test]
    fn reduction_examples() {
        let z = CoefficientRing::Integers;
        let f5 = CoefficientRing::prime_field(5).unwrap();
        let a = poly(z, 2, &[(&[1, 0], 3), (&[0, 1], 5)]);
        assert_eq!(
            a.reduce_coefficients(f5).unwrap(),
            poly(f5, 2, &[(&[1, 0], 3)])
        );

        let b = poly(z, 3, &[(&[1, 1, 0], 1), (&[0, 0, 2], -1), (&[3, 0, 0], -5)]);
        assert_eq!(
            b.reduce_coefficients(f5).unwrap(),
            poly(f5, 3, &[(&[1, 1, 0], 1), (&[0, 0, 2], 4)])
        );

        let z5 = CoefficientRing::localized(5).unwrap();
        let c = SparsePoly::from_terms(z5, 1, [(vec![1], BigRational::new(1.into(), 3.into()))])
            .unwrap();
        assert_eq!(
            c.reduce_coefficients(f5).unwrap(),
            poly(f5, 1, &[(&[1], 2)])
        );

        let q = SparsePoly::variable(CoefficientRing::Rationals, 1, 0);
        assert!(matches!(
            q.reduce_coefficients(f5),
            Err(RingError::UnsupportedMap { .. })
        ));
    }

    #[test]
    fn grlex_order_and_wire() {
        let z = CoefficientRing::Integers;
        let f = poly(z, 3, &[(&[0, 0, 2], -1), (&[1, 1, 0], 1), (&[1, 0, 0], 2)]);
        let wire = f.to_wire();
        assert_eq!(
            wire,
            vec![
                (vec![1, 1, 0], "1".to_string()),
                (vec![0, 0, 2], "-1".to_string()),
                (vec![1, 0, 0], "2".to_string()),
            ]
        );
        assert_eq!(SparsePoly::from_wire(z, 3, &wire).unwrap(), f);
        assert_eq!(f.total_degree(), Some(2));
        assert_eq!(f.order(), Some(1));
    }

    #[test]
    fn truncation_and_remap() {
        let z = CoefficientRing::Integers;
        let f = poly(z, 2, &[(&[1, 0], 1), (&[0, 3], -1)]);
        assert_eq!(f.truncate_degree(2), poly(z, 2, &[(&[1, 0], 1)]));
        let g = f.remap_vars(3, &[Some(2), Some(0)]).unwrap();
        assert_eq!(g, poly(z, 3, &[(&[0, 0, 1], 1), (&[3, 0, 0], -1)]));
        assert!(f.remap_vars(1, &[Some(0), None]).is_none());
    }

    fn ring_strategy() -> impl Strategy<Value = CoefficientRing> {
        prop_oneof![
            Just(CoefficientRing::Integers),
            Just(CoefficientRing::Rationals),
            Just(CoefficientRing::prime_field(3).unwrap()),
            Just(CoefficientRing::prime_field(5).unwrap()),
            Just(CoefficientRing::localized(5).unwrap()),
        ]
    }

    fn raw_terms() -> impl Strategy<Value = Vec<(Vec<u32>, i64, i64)>> {
        prop::collection::vec(
            (
                prop::collection::vec(0u32..3, 3),
                -6i64..7,
                prop_oneof![Just(1i64), Just(2), Just(3), Just(7)],
            ),
            0..5,
        )
    }

    fn build(ring: CoefficientRing, raw: &[(Vec<u32>, i64, i64)]) -> SparsePoly {
        let terms = raw.iter().filter_map(|(e, n, d)| {
            let x = BigRational::new((*n).into(), (*d).into());
            ring.normalize(&x).ok().map(|c| (e.clone(), c))
        });
        SparsePoly::from_terms(ring, 3, terms).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn ring_axioms(ring in ring_strategy(), a in raw_terms(), b in raw_terms(), c in raw_terms()) {
            let (a, b, c) = (build(ring, &a), build(ring, &b), build(ring, &c));
            prop_assert_eq!(a.mul(&b).unwrap().mul(&c).unwrap(), a.mul(&b.mul(&c).unwrap()).unwrap());
            prop_assert_eq!(a.add(&b).unwrap().add(&c).unwrap(), a.add(&b.add(&c).unwrap()).unwrap());
            prop_assert_eq!(
                a.mul(&b.add(&c).unwrap()).unwrap(),
                a.mul(&b).unwrap().add(&a.mul(&c).unwrap()).unwrap()
            );
            prop_assert_eq!(a.mul(&b).unwrap(), b.mul(&a).unwrap());
            prop_assert!(a.sub(&a).unwrap().is_zero());
            for (_, v) in a.terms() {
                prop_assert!(!v.is_zero());
            }
        }

        #[test]
        fn reduction_is_a_homomorphism(a in raw_terms(), b in raw_terms(), which in 0usize..4) {
            let pairs = [
                (CoefficientRing::Integers, CoefficientRing::prime_field(5).unwrap()),
                (CoefficientRing::localized(5).unwrap(), CoefficientRing::prime_field(5).unwrap()),
                (CoefficientRing::localized(3).unwrap(), CoefficientRing::Rationals),
                (CoefficientRing::Integers, CoefficientRing::localized(2).unwrap()),
            ];
            let (src, dst) = pairs[which];
            let (a, b) = (build(src, &a), build(src, &b));
            let r = |p: &SparsePoly| p.reduce_coefficients(dst).unwrap();
            prop_assert_eq!(r(&a.mul(&b).unwrap()), r(&a).mul(&r(&b)).unwrap());
            prop_assert_eq!(r(&a.add(&b).unwrap()), r(&a).add(&r(&b)).unwrap());
        }

        #[test]
        fn series_product_matches_truncated_poly_product(
            a in prop::collection::vec(-5i64..6, 1..6),
            b in prop::collection::vec(-5i64..6, 1..6),
            m in 0usize..6,
        ) {
            let ring = CoefficientRing::Integers;
            let as_poly = |c: &[i64]| SparsePoly::from_terms(
                ring, 1, c.iter().enumerate().map(|(k, v)| (vec![k as u32], int(*v)))).unwrap();
            let as_series = |c: &[i64]| TruncatedSeries::from_coeffs(
                ring, m, c.iter().map(|v| int(*v)).collect()).unwrap();
            let prod = as_series(&a).mul(&as_series(&b)).unwrap();
            let expected = as_poly(&a).mul(&as_poly(&b)).unwrap().truncate_degree(m as u32);
            for q in 0..=m {
                prop_assert_eq!(prod.coeff(q), expected.coefficient(&Monomial::new(vec![q as u32])));
            }
        }
    }
}
