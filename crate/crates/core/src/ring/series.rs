use num_traits::{One, Zero};

use super::{CoefficientRing, RingError, Scalar};

/// A commutative algebra over a coefficient ring that polynomials can be
/// evaluated in (see [`SparsePoly::evaluate_in`](super::SparsePoly::evaluate_in)).
pub trait Algebra: Clone {
    fn ring(&self) -> CoefficientRing;
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn add(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn scale(&self, c: &Scalar) -> Self;
    fn is_zero(&self) -> bool;
}

/// Element of `A[t]/(t^(m+1))`, stored as its `m + 1` coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TruncatedSeries {
    ring: CoefficientRing,
    coeffs: Vec<Scalar>,
}

impl TruncatedSeries {
    pub fn zero(ring: CoefficientRing, precision: usize) -> Self {
        TruncatedSeries {
            ring,
            coeffs: vec![Scalar::zero(); precision + 1],
        }
    }

    /// `c * t^k`, or zero when `k` exceeds the precision.
    pub fn monomial(ring: CoefficientRing, precision: usize, k: usize, c: Scalar) -> Self {
        let mut s = Self::zero(ring, precision);
        if k <= precision {
            s.coeffs[k] = c;
        }
        s
    }

    /// Builds a series from coefficients of `1, t, t^2, ...`; missing ones are
    /// zero and those beyond the precision are discarded.
    pub fn from_coeffs(
        ring: CoefficientRing,
        precision: usize,
        coeffs: Vec<Scalar>,
    ) -> Result<Self, RingError> {
        let mut s = Self::zero(ring, precision);
        for (k, c) in coeffs.into_iter().enumerate().take(precision + 1) {
            s.coeffs[k] = ring.normalize(&c)?;
        }
        Ok(s)
    }

    pub fn ring(&self) -> CoefficientRing {
        self.ring
    }

    /// The truncation order `m`: the series lives modulo `t^(m+1)`.
    pub fn precision(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, k: usize) -> Scalar {
        self.coeffs.get(k).cloned().unwrap_or_else(Scalar::zero)
    }

    pub fn coeffs(&self) -> &[Scalar] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    /// Lies in the ideal `(t)`, i.e. has zero constant coefficient.
    pub fn in_maximal_ideal(&self) -> bool {
        self.coeffs[0].is_zero()
    }

    /// Index of the first nonzero coefficient.
    pub fn order(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    fn check(&self, other: &Self) -> Result<(), RingError> {
        if self.ring != other.ring {
            return Err(RingError::RingMismatch {
                left: self.ring,
                right: other.ring,
            });
        }
        if self.coeffs.len() != other.coeffs.len() {
            return Err(RingError::PrecisionMismatch {
                left: self.precision(),
                right: other.precision(),
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, RingError> {
        self.check(other)?;
        Ok(Algebra::add(self, other))
    }

    pub fn sub(&self, other: &Self) -> Result<Self, RingError> {
        self.check(other)?;
        let r = self.ring;
        Ok(TruncatedSeries {
            ring: r,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| r.sub(a, b))
                .collect(),
        })
    }

    /// Product modulo `t^(m+1)`.
    pub fn mul(&self, other: &Self) -> Result<Self, RingError> {
        self.check(other)?;
        Ok(Algebra::mul(self, other))
    }

    /// Image under the canonical coefficient map.
    pub fn reduce_coefficients(&self, target: CoefficientRing) -> Result<Self, RingError> {
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| self.ring.map_element(c, &target))
            .collect::<Result<_, _>>()?;
        Ok(TruncatedSeries {
            ring: target,
            coeffs,
        })
    }
}

impl Algebra for TruncatedSeries {
    fn ring(&self) -> CoefficientRing {
        self.ring
    }

    fn zero_like(&self) -> Self {
        Self::zero(self.ring, self.precision())
    }

    fn one_like(&self) -> Self {
        Self::monomial(self.ring, self.precision(), 0, Scalar::one())
    }

    fn add(&self, other: &Self) -> Self {
        let r = self.ring;
        TruncatedSeries {
            ring: r,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| r.add(a, b))
                .collect(),
        }
    }

    fn mul(&self, other: &Self) -> Self {
        let r = self.ring;
        let m = self.precision();
        let mut out = vec![Scalar::zero(); m + 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate().take(m + 1 - i) {
                if !b.is_zero() {
                    out[i + j] = r.add(&out[i + j], &r.mul(a, b));
                }
            }
        }
        TruncatedSeries {
            ring: r,
            coeffs: out,
        }
    }

    fn scale(&self, c: &Scalar) -> Self {
        let r = self.ring;
        TruncatedSeries {
            ring: r,
            coeffs: self.coeffs.iter().map(|a| r.mul(a, c)).collect(),
        }
    }

    fn is_zero(&self) -> bool {
        TruncatedSeries::is_zero(self)
    }
}

/// Element of `A[u, t]/(u^(N_u+1), t^(N_t+1))`; `coeffs[a][b]` multiplies
/// `u^a t^b`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BivariateSeries {
    ring: CoefficientRing,
    coeffs: Vec<Vec<Scalar>>,
}

impl BivariateSeries {
    pub fn zero(ring: CoefficientRing, precision_u: usize, precision_t: usize) -> Self {
        BivariateSeries {
            ring,
            coeffs: vec![vec![Scalar::zero(); precision_t + 1]; precision_u + 1],
        }
    }

    /// Builds a series from `(u-degree, t-degree, coefficient)` triples;
    /// terms beyond either precision are discarded.
    pub fn from_terms<I>(
        ring: CoefficientRing,
        precision_u: usize,
        precision_t: usize,
        terms: I,
    ) -> Result<Self, RingError>
    where
        I: IntoIterator<Item = (usize, usize, Scalar)>,
    {
        let mut s = Self::zero(ring, precision_u, precision_t);
        for (a, b, c) in terms {
            if a <= precision_u && b <= precision_t {
                let c = ring.normalize(&c)?;
                s.coeffs[a][b] = ring.add(&s.coeffs[a][b], &c);
            }
        }
        Ok(s)
    }

    /// Embeds a series in `t` (constant in `u`).
    pub fn from_t_series(s: &TruncatedSeries, precision_u: usize) -> Self {
        let mut out = Self::zero(s.ring(), precision_u, s.precision());
        out.coeffs[0] = s.coeffs().to_vec();
        out
    }

    pub fn ring(&self) -> CoefficientRing {
        self.ring
    }

    pub fn precision(&self) -> (usize, usize) {
        (self.coeffs.len() - 1, self.coeffs[0].len() - 1)
    }

    pub fn coeff(&self, a: usize, b: usize) -> Scalar {
        self.coeffs
            .get(a)
            .and_then(|row| row.get(b))
            .cloned()
            .unwrap_or_else(Scalar::zero)
    }

    /// The series in `t` obtained by setting `u = 0`.
    pub fn at_u_zero(&self) -> TruncatedSeries {
        TruncatedSeries {
            ring: self.ring,
            coeffs: self.coeffs[0].clone(),
        }
    }

    /// Nonzero term of least total degree, ties going to the lower `u`-power.
    pub fn lowest_term(&self) -> Option<(usize, usize, Scalar)> {
        let (nu, nt) = self.precision();
        for d in 0..=(nu + nt) {
            for a in 0..=d.min(nu) {
                let b = d - a;
                if b <= nt && !self.coeffs[a][b].is_zero() {
                    return Some((a, b, self.coeffs[a][b].clone()));
                }
            }
        }
        None
    }

    /// Nonzero terms in `(u-degree, t-degree)` lexicographic order.
    pub fn terms(&self) -> Vec<(usize, usize, Scalar)> {
        let mut out = Vec::new();
        for (a, row) in self.coeffs.iter().enumerate() {
            for (b, c) in row.iter().enumerate() {
                if !c.is_zero() {
                    out.push((a, b, c.clone()));
                }
            }
        }
        out
    }
}

impl Algebra for BivariateSeries {
    fn ring(&self) -> CoefficientRing {
        self.ring
    }

    fn zero_like(&self) -> Self {
        let (nu, nt) = self.precision();
        Self::zero(self.ring, nu, nt)
    }

    fn one_like(&self) -> Self {
        let mut s = self.zero_like();
        s.coeffs[0][0] = Scalar::one();
        s
    }

    fn add(&self, other: &Self) -> Self {
        let r = self.ring;
        BivariateSeries {
            ring: r,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(x, y)| x.iter().zip(y).map(|(a, b)| r.add(a, b)).collect())
                .collect(),
        }
    }

    fn mul(&self, other: &Self) -> Self {
        let r = self.ring;
        let (nu, nt) = self.precision();
        let mut out = self.zero_like();
        for (a1, row1) in self.coeffs.iter().enumerate() {
            for (b1, c1) in row1.iter().enumerate() {
                if c1.is_zero() {
                    continue;
                }
                for (a2, row2) in other.coeffs.iter().enumerate().take(nu + 1 - a1) {
                    for (b2, c2) in row2.iter().enumerate().take(nt + 1 - b1) {
                        if !c2.is_zero() {
                            let cell = &mut out.coeffs[a1 + a2][b1 + b2];
                            *cell = r.add(cell, &r.mul(c1, c2));
                        }
                    }
                }
            }
        }
        out
    }

    fn scale(&self, c: &Scalar) -> Self {
        let r = self.ring;
        BivariateSeries {
            ring: r,
            coeffs: self
                .coeffs
                .iter()
                .map(|row| row.iter().map(|a| r.mul(a, c)).collect())
                .collect(),
        }
    }

    fn is_zero(&self) -> bool {
        self.coeffs.iter().flatten().all(Zero::is_zero)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    fn s(ring: CoefficientRing, m: usize, c: &[i64]) -> TruncatedSeries {
        TruncatedSeries::from_coeffs(
            ring,
            m,
            c.iter()
                .map(|v| BigRational::from_integer((*v).into()))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn product_examples() {
        let z = CoefficientRing::Integers;
        assert!(s(z, 1, &[0, 1]).mul(&s(z, 1, &[0, 1])).unwrap().is_zero());
        assert_eq!(
            s(z, 2, &[1, 1]).mul(&s(z, 2, &[1, -1])).unwrap(),
            s(z, 2, &[1, 0, -1])
        );
        assert_eq!(
            s(z, 3, &[0, 1, 1]).mul(&s(z, 3, &[0, 1, 1])).unwrap(),
            s(z, 3, &[0, 0, 1, 2])
        );
    }

    #[test]
    fn precision_mismatch() {
        let z = CoefficientRing::Integers;
        assert!(matches!(
            s(z, 1, &[1]).mul(&s(z, 2, &[1])),
            Err(RingError::PrecisionMismatch { left: 1, right: 2 })
        ));
    }

    #[test]
    fn maximal_ideal_membership() {
        let z = CoefficientRing::Integers;
        assert!(s(z, 3, &[0, 2, 1]).in_maximal_ideal());
        assert!(!s(z, 3, &[1, 2]).in_maximal_ideal());
        assert_eq!(s(z, 3, &[0, 0, 5]).order(), Some(2));
        assert_eq!(s(z, 3, &[]).order(), None);
    }

    #[test]
    fn bivariate_product_truncates_both_directions() {
        let z = CoefficientRing::Integers;
        let one = BigRational::from_integer(1.into());
        let ut = BivariateSeries::from_terms(z, 2, 2, [(1, 1, one.clone())]).unwrap();
        let sq = Algebra::mul(&ut, &ut);
        assert_eq!(sq.terms(), vec![(2, 2, one.clone())]);
        assert!(Algebra::mul(&sq, &ut).is_zero());
        let w = BivariateSeries::from_terms(z, 3, 3, [(2, 1, one.clone()), (1, 2, one.clone())])
            .unwrap();
        assert_eq!(w.lowest_term(), Some((1, 2, one)));
    }
}
