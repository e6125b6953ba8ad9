//! Extended values `T ∪ {-inf, +inf}`.

use std::fmt;
use std::ops::Neg;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

/// An element of `T ∪ {-inf, +inf}`.
///
/// The derived order relies on variant order: `NegInf < Fin(_) < PosInf`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Extended<T> {
    NegInf,
    Fin(T),
    PosInf,
}

/// Integer-valued extended value used by the untimed solver.
pub type ExtValue = Extended<i64>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArithError {
    #[error("undefined sum +inf + -inf")]
    InfMinusInf,
    #[error("integer overflow while accumulating weights")]
    Overflow,
}

impl<T> Extended<T> {
    pub fn is_finite(&self) -> bool {
        matches!(self, Extended::Fin(_))
    }

    pub fn finite(&self) -> Option<&T> {
        match self {
            Extended::Fin(v) => Some(v),
            _ => None,
        }
    }

    pub fn map<U>(self, f: impl FnOnce(T) -> U) -> Extended<U> {
        match self {
            Extended::NegInf => Extended::NegInf,
            Extended::PosInf => Extended::PosInf,
            Extended::Fin(v) => Extended::Fin(f(v)),
        }
    }
}

impl ExtValue {
    /// Saturating sum; `+inf + -inf` is rejected.
    pub fn checked_add(self, rhs: ExtValue) -> Result<ExtValue, ArithError> {
        use Extended::*;
        match (self, rhs) {
            (PosInf, NegInf) | (NegInf, PosInf) => Err(ArithError::InfMinusInf),
            (PosInf, _) | (_, PosInf) => Ok(PosInf),
            (NegInf, _) | (_, NegInf) => Ok(NegInf),
            (Fin(a), Fin(b)) => a.checked_add(b).map(Fin).ok_or(ArithError::Overflow),
        }
    }

    /// `weight + self` for a finite edge weight; never mixes infinities.
    pub fn plus_weight(&self, weight: i64) -> Result<ExtValue, ArithError> {
        match self {
            Extended::Fin(v) => v
                .checked_add(weight)
                .map(Extended::Fin)
                .ok_or(ArithError::Overflow),
            other => Ok(other.clone()),
        }
    }
}

impl<T: Neg<Output = T>> Neg for Extended<T> {
    type Output = Extended<T>;
    fn neg(self) -> Self::Output {
        match self {
            Extended::NegInf => Extended::PosInf,
            Extended::PosInf => Extended::NegInf,
            Extended::Fin(v) => Extended::Fin(-v),
        }
    }
}

impl<T: fmt::Display> fmt::Display for Extended<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Extended::NegInf => f.write_str("-inf"),
            Extended::PosInf => f.write_str("+inf"),
            Extended::Fin(v) => write!(f, "{v}"),
        }
    }
}

/// Parses `-inf`, `+inf` (or `inf`) and plain integers.
impl std::str::FromStr for ExtValue {
    type Err = std::num::ParseIntError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "-inf" => Ok(Extended::NegInf),
            "+inf" | "inf" => Ok(Extended::PosInf),
            t => t.parse::<i64>().map(Extended::Fin),
        }
    }
}

// Integers serialize as JSON numbers, infinities as the strings "-inf"/"+inf".
impl Serialize for ExtValue {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Extended::Fin(v) => s.serialize_i64(*v),
            Extended::NegInf => s.serialize_str("-inf"),
            Extended::PosInf => s.serialize_str("+inf"),
        }
    }
}

impl<'de> Deserialize<'de> for ExtValue {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct ExtVisitor;
        impl Visitor<'_> for ExtVisitor {
            type Value = ExtValue;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("an integer or one of \"-inf\", \"+inf\"")
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<ExtValue, E> {
                Ok(Extended::Fin(v))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<ExtValue, E> {
                i64::try_from(v)
                    .map(Extended::Fin)
                    .map_err(|_| E::custom("integer out of range"))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<ExtValue, E> {
                v.parse().map_err(|_| E::custom(format!("bad extended value {v:?}")))
            }
        }
        d.deserialize_any(ExtVisitor)
    }
}
