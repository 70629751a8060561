//! Extended real numbers `[-inf, +inf]` without NaN.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul};

use serde::de::{self, Deserializer, Visitor};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// A real number or one of the two infinities. NaN is unrepresentable.
///
/// Addition follows measure-theoretic conventions for the cases that arise
/// with log-MGFs and variance proxies: `finite + inf = inf`. The indefinite
/// form `inf + (-inf)` cannot be constructed through [`Add`]; it panics, since
/// no operation in this crate combines opposite infinities.
#[derive(Clone, Copy, PartialEq)]
pub struct ExtendedReal(f64);

impl ExtendedReal {
    pub const ZERO: Self = ExtendedReal(0.0);
    pub const INFINITY: Self = ExtendedReal(f64::INFINITY);
    pub const NEG_INFINITY: Self = ExtendedReal(f64::NEG_INFINITY);

    /// Wraps `x`, rejecting NaN.
    pub fn new(x: f64) -> Result<Self> {
        if x.is_nan() {
            Err(Error::NotANumber("ExtendedReal::new"))
        } else {
            Ok(ExtendedReal(x))
        }
    }

    pub fn finite(x: f64) -> Result<Self> {
        if x.is_finite() {
            Ok(ExtendedReal(x))
        } else {
            Err(Error::domain("ExtendedReal::finite", format!("{x} is not finite")))
        }
    }

    pub(crate) fn from_f64_unchecked(x: f64) -> Self {
        debug_assert!(!x.is_nan());
        ExtendedReal(x)
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_finite(self) -> bool {
        self.0.is_finite()
    }

    pub fn is_pos_infinite(self) -> bool {
        self.0 == f64::INFINITY
    }

    /// Finite value, or `None` for either infinity.
    pub fn as_finite(self) -> Option<f64> {
        self.0.is_finite().then_some(self.0)
    }

    pub fn max(self, other: Self) -> Self {
        if self >= other {
            self
        } else {
            other
        }
    }

    pub fn min(self, other: Self) -> Self {
        if self <= other {
            self
        } else {
            other
        }
    }

    /// Multiplication by a nonnegative scalar with the convention `0 * inf = 0`.
    pub fn scale(self, c: f64) -> Self {
        assert!(c >= 0.0, "scale factor must be nonnegative");
        if c == 0.0 {
            ExtendedReal::ZERO
        } else {
            ExtendedReal(self.0 * c)
        }
    }
}

impl PartialOrd for ExtendedReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Eq for ExtendedReal {}

impl Ord for ExtendedReal {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl Add for ExtendedReal {
    type Output = ExtendedReal;

    fn add(self, rhs: Self) -> Self {
        let s = self.0 + rhs.0;
        assert!(!s.is_nan(), "indefinite sum of opposite infinities");
        ExtendedReal(s)
    }
}

impl Mul<f64> for ExtendedReal {
    type Output = ExtendedReal;

    fn mul(self, c: f64) -> Self {
        self.scale(c)
    }
}

impl std::iter::Sum for ExtendedReal {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(ExtendedReal::ZERO, |a, b| a + b)
    }
}

impl TryFrom<f64> for ExtendedReal {
    type Error = Error;

    fn try_from(x: f64) -> Result<Self> {
        ExtendedReal::new(x)
    }
}

impl From<ExtendedReal> for f64 {
    fn from(x: ExtendedReal) -> f64 {
        x.0
    }
}

impl fmt::Debug for ExtendedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for ExtendedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 == f64::INFINITY {
            f.write_str("inf")
        } else if self.0 == f64::NEG_INFINITY {
            f.write_str("-inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

// JSON has no infinities: finite values serialize as numbers, infinities as
// the strings "inf" / "-inf".
impl Serialize for ExtendedReal {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            s.serialize_f64(self.0)
        } else if self.0 > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }
}

impl<'de> serde::Deserialize<'de> for ExtendedReal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = ExtendedReal;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a number or \"inf\" / \"-inf\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<ExtendedReal, E> {
                ExtendedReal::new(v).map_err(E::custom)
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<ExtendedReal, E> {
                Ok(ExtendedReal(v as f64))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<ExtendedReal, E> {
                Ok(ExtendedReal(v as f64))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<ExtendedReal, E> {
                match v {
                    "inf" => Ok(ExtendedReal::INFINITY),
                    "-inf" => Ok(ExtendedReal::NEG_INFINITY),
                    _ => Err(E::invalid_value(de::Unexpected::Str(v), &self)),
                }
            }
        }
        d.deserialize_any(V)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_nan() {
        assert!(ExtendedReal::new(f64::NAN).is_err());
        assert!(ExtendedReal::new(f64::INFINITY).is_ok());
    }

    #[test]
    fn finite_plus_infinity_is_infinity() {
        let s = ExtendedReal::finite(3.0).unwrap() + ExtendedReal::INFINITY;
        assert!(s.is_pos_infinite());
    }

    #[test]
    fn total_order() {
        let mut v = vec![
            ExtendedReal::INFINITY,
            ExtendedReal::finite(-1.0).unwrap(),
            ExtendedReal::NEG_INFINITY,
            ExtendedReal::ZERO,
        ];
        v.sort();
        assert_eq!(v[0], ExtendedReal::NEG_INFINITY);
        assert_eq!(v[3], ExtendedReal::INFINITY);
    }

    #[test]
    fn zero_times_infinity_is_zero() {
        assert_eq!(ExtendedReal::INFINITY.scale(0.0), ExtendedReal::ZERO);
    }

    #[test]
    fn json_round_trip() {
        let xs = [ExtendedReal::INFINITY, ExtendedReal::finite(0.21).unwrap()];
        let s = serde_json::to_string(&xs).unwrap();
        assert_eq!(s, r#"["inf",0.21]"#);
        let back: Vec<ExtendedReal> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, xs);
    }
}
