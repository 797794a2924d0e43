//! Exact coefficient rings, sparse multivariate polynomials and truncated
//! power series.
//!
//! Every coefficient is stored as a [`BigRational`] that has been normalized
//! for its ring: integers for `Z`, canonical representatives in `[0, p)` for
//! `F_p`, and reduced fractions with `p`-free denominators for `Z_(p)`.

mod poly;
mod series;

pub use poly::{Monomial, SparsePoly};
pub use series::{Algebra, BivariateSeries, TruncatedSeries};

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Ring element. Always normalized for the ring it belongs to.
pub type Scalar = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RingError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("ring mismatch: {left} vs {right}")]
    RingMismatch {
        left: CoefficientRing,
        right: CoefficientRing,
    },
    #[error("variable count mismatch: {left} vs {right}")]
    ArityMismatch { left: usize, right: usize },
    #[error("precision mismatch: {left} vs {right}")]
    PrecisionMismatch { left: usize, right: usize },
    #[error("no canonical homomorphism {from} -> {to}")]
    UnsupportedMap {
        from: CoefficientRing,
        to: CoefficientRing,
    },
    #[error("{value} is not an element of {ring}")]
    NotInRing {
        value: String,
        ring: CoefficientRing,
    },
    #[error("exponent vector has length {got}, expected {expected}")]
    BadExponentLength { got: usize, expected: usize },
    #[error("substitution needs at least one variable to fix the target algebra")]
    NoVariables,
    #[error("unrecognized ring `{0}` (expected Z, Q, F_p or Z_(p))")]
    BadRingSpec(String),
}

/// A prime number. Construction checks primality.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Prime(u64);

impl Prime {
    pub fn new(p: u64) -> Result<Self, RingError> {
        if is_prime(p) {
            Ok(Prime(p))
        } else {
            Err(RingError::NotPrime(p))
        }
    }

    pub fn get(self) -> u64 {
        self.0
    }
}

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d.saturating_mul(d) <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Coefficient rings supported throughout the crate.
///
/// `LocalizedIntegers(p)` is `Z_(p)`: the rationals whose denominators are
/// prime to `p`. It is a discrete valuation ring with residue field `F_p` and
/// fraction field `Q`, which is exactly what a one-parameter family with a
/// characteristic-`p` special fiber and a characteristic-0 generic fiber
/// needs at any finite jet level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CoefficientRing {
    Integers,
    Rationals,
    PrimeField(Prime),
    LocalizedIntegers(Prime),
}

impl CoefficientRing {
    pub fn prime_field(p: u64) -> Result<Self, RingError> {
        Ok(CoefficientRing::PrimeField(Prime::new(p)?))
    }

    pub fn localized(p: u64) -> Result<Self, RingError> {
        Ok(CoefficientRing::LocalizedIntegers(Prime::new(p)?))
    }

    /// The prime attached to `F_p` or `Z_(p)`.
    pub fn prime(&self) -> Option<u64> {
        match self {
            CoefficientRing::PrimeField(p) | CoefficientRing::LocalizedIntegers(p) => Some(p.get()),
            _ => None,
        }
    }

    pub fn is_field(&self) -> bool {
        matches!(
            self,
            CoefficientRing::Rationals | CoefficientRing::PrimeField(_)
        )
    }

    pub fn zero(&self) -> Scalar {
        Scalar::zero()
    }

    pub fn one(&self) -> Scalar {
        Scalar::one()
    }

    /// Reads an arbitrary rational as an element of this ring.
    pub fn normalize(&self, x: &BigRational) -> Result<Scalar, RingError> {
        let not_in_ring = || RingError::NotInRing {
            value: x.to_string(),
            ring: *self,
        };
        match self {
            CoefficientRing::Integers => {
                if x.is_integer() {
                    Ok(x.clone())
                } else {
                    Err(not_in_ring())
                }
            }
            CoefficientRing::Rationals => Ok(x.clone()),
            CoefficientRing::PrimeField(p) => {
                let p = BigInt::from(p.get());
                let den = x.denom().mod_floor(&p);
                if den.is_zero() {
                    return Err(not_in_ring());
                }
                let inv = mod_inverse(&den, &p).ok_or_else(not_in_ring)?;
                let v = (x.numer().mod_floor(&p) * inv).mod_floor(&p);
                Ok(BigRational::from_integer(v))
            }
            CoefficientRing::LocalizedIntegers(p) => {
                let p = BigInt::from(p.get());
                if x.denom().mod_floor(&p).is_zero() {
                    Err(not_in_ring())
                } else {
                    Ok(x.clone())
                }
            }
        }
    }

    pub fn from_i64(&self, v: i64) -> Scalar {
        self.reduce(BigRational::from_integer(BigInt::from(v)))
    }

    /// Normalizes the result of an operation that never leaves the ring
    /// (sums and products of ring elements).
    fn reduce(&self, x: BigRational) -> Scalar {
        match self {
            CoefficientRing::PrimeField(p) => {
                debug_assert!(x.is_integer());
                let p = BigInt::from(p.get());
                BigRational::from_integer(x.numer().mod_floor(&p))
            }
            _ => x,
        }
    }

    pub fn add(&self, a: &Scalar, b: &Scalar) -> Scalar {
        self.reduce(a + b)
    }

    pub fn sub(&self, a: &Scalar, b: &Scalar) -> Scalar {
        self.reduce(a - b)
    }

    pub fn neg(&self, a: &Scalar) -> Scalar {
        self.reduce(-a)
    }

    pub fn mul(&self, a: &Scalar, b: &Scalar) -> Scalar {
        self.reduce(a * b)
    }

    /// Multiplicative inverse, if `a` is a unit.
    pub fn inv(&self, a: &Scalar) -> Option<Scalar> {
        if a.is_zero() {
            return None;
        }
        match self {
            CoefficientRing::Integers => {
                if a.abs().is_one() {
                    Some(a.clone())
                } else {
                    None
                }
            }
            CoefficientRing::Rationals => Some(a.recip()),
            CoefficientRing::PrimeField(_) => self.normalize(&a.recip()).ok(),
            CoefficientRing::LocalizedIntegers(_) => self.normalize(&a.recip()).ok(),
        }
    }

    /// Whether a canonical ring homomorphism `self -> target` exists.
    pub fn maps_to(&self, target: &CoefficientRing) -> bool {
        use CoefficientRing::*;
        match (self, target) {
            (a, b) if a == b => true,
            (Integers, _) => true,
            (LocalizedIntegers(p), PrimeField(q)) => p == q,
            (LocalizedIntegers(_), Rationals) => true,
            _ => false,
        }
    }

    /// Applies the canonical homomorphism `self -> target` to one element.
    pub fn map_element(&self, x: &Scalar, target: &CoefficientRing) -> Result<Scalar, RingError> {
        if !self.maps_to(target) {
            return Err(RingError::UnsupportedMap {
                from: *self,
                to: *target,
            });
        }
        target.normalize(x)
    }

    /// Small-integer view of an `F_p` element.
    pub fn residue_u64(&self, x: &Scalar) -> Option<u64> {
        match self {
            CoefficientRing::PrimeField(_) => x.numer().to_u64(),
            _ => None,
        }
    }
}

fn mod_inverse(a: &BigInt, p: &BigInt) -> Option<BigInt> {
    let e = a.extended_gcd(p);
    if e.gcd.is_one() {
        Some(e.x.mod_floor(p))
    } else {
        None
    }
}

impl fmt::Display for CoefficientRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoefficientRing::Integers => write!(f, "Z"),
            CoefficientRing::Rationals => write!(f, "Q"),
            CoefficientRing::PrimeField(p) => write!(f, "F_{}", p.get()),
            CoefficientRing::LocalizedIntegers(p) => write!(f, "Z_({})", p.get()),
        }
    }
}

impl FromStr for CoefficientRing {
    type Err = RingError;

    /// Accepts `Z`, `Q`, `F_p`, `GF(p)` and `Z_(p)`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let bad = || RingError::BadRingSpec(s.to_string());
        let parse_p = |digits: &str| digits.parse::<u64>().map_err(|_| bad());
        match t.as_str() {
            "Z" | "ZZ" => return Ok(CoefficientRing::Integers),
            "Q" | "QQ" => return Ok(CoefficientRing::Rationals),
            _ => {}
        }
        if let Some(rest) = t.strip_prefix("Z_(").and_then(|r| r.strip_suffix(')')) {
            return CoefficientRing::localized(parse_p(rest)?);
        }
        if let Some(rest) = t.strip_prefix("GF(").and_then(|r| r.strip_suffix(')')) {
            return CoefficientRing::prime_field(parse_p(rest)?);
        }
        if let Some(rest) = t.strip_prefix("F_") {
            return CoefficientRing::prime_field(parse_p(rest)?);
        }
        Err(bad())
    }
}

impl Serialize for CoefficientRing {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for CoefficientRing {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Parses a coefficient string such as `"3"` or `"-1/3"` into the ring.
pub fn parse_scalar(s: &str, ring: &CoefficientRing) -> Result<Scalar, RingError> {
    let bad = || RingError::NotInRing {
        value: s.to_string(),
        ring: *ring,
    };
    let x = match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            BigRational::new(n, d)
        }
        None => BigRational::from_integer(s.trim().parse().map_err(|_| bad())?),
    };
    ring.normalize(&x)
}
