//! Totally ordered extended reals `[-inf, +inf]`, the codomain of every
//! stability index.
//!
//! Only the operations the stability calculus needs are defined: comparison,
//! min/max, negation and sign. Sums of opposite infinities are a logic error
//! and panic, so no `inf - inf` can leak into a report.

use std::cmp::Ordering;
use std::fmt;

use serde::de::{self, Deserializer, Visitor};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtReal {
    NegInf,
    Finite(f64),
    PosInf,
}

pub use ExtReal::{Finite, NegInf, PosInf};

impl ExtReal {
    /// Wraps a float, mapping IEEE infinities to the symbolic ends. NaN panics.
    pub fn from_f64(v: f64) -> Self {
        assert!(!v.is_nan(), "NaN has no place in an extended-real index");
        if v == f64::INFINITY {
            PosInf
        } else if v == f64::NEG_INFINITY {
            NegInf
        } else {
            Finite(v)
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Finite(_))
    }

    pub fn is_pos_inf(self) -> bool {
        matches!(self, PosInf)
    }

    pub fn is_neg_inf(self) -> bool {
        matches!(self, NegInf)
    }

    /// Strictly positive (including `+inf`).
    pub fn is_positive(self) -> bool {
        match self {
            PosInf => true,
            NegInf => false,
            Finite(v) => v > 0.0,
        }
    }

    pub fn neg(self) -> Self {
        match self {
            PosInf => NegInf,
            NegInf => PosInf,
            Finite(v) => Finite(-v),
        }
    }

    /// -1, 0 or +1.
    pub fn signum(self) -> i8 {
        match self {
            PosInf => 1,
            NegInf => -1,
            Finite(v) => {
                if v > 0.0 {
                    1
                } else if v < 0.0 {
                    -1
                } else {
                    0
                }
            }
        }
    }

    /// Difference, defined except for `inf - inf` which panics: the index
    /// calculus never forms it, so reaching it means a bug upstream.
    pub fn sub(self, rhs: Self) -> Self {
        match (self, rhs) {
            (PosInf, PosInf) | (NegInf, NegInf) => {
                panic!("inf - inf formed; logic error upstream")
            }
            (PosInf, _) | (_, NegInf) => PosInf,
            (NegInf, _) | (_, PosInf) => NegInf,
            (Finite(a), Finite(b)) => Finite(a - b),
        }
    }

    pub fn min(self, rhs: Self) -> Self {
        if self <= rhs {
            self
        } else {
            rhs
        }
    }

    pub fn max(self, rhs: Self) -> Self {
        if self >= rhs {
            self
        } else {
            rhs
        }
    }

    /// Finite payload, if any.
    pub fn finite(self) -> Option<f64> {
        match self {
            Finite(v) => Some(v),
            _ => None,
        }
    }
}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        let rank = |e: &ExtReal| match e {
            NegInf => 0u8,
            Finite(_) => 1,
            PosInf => 2,
        };
        match (self, other) {
            (Finite(a), Finite(b)) => a.partial_cmp(b),
            (a, b) => rank(a).partial_cmp(&rank(b)),
        }
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PosInf => write!(f, "inf"),
            NegInf => write!(f, "-inf"),
            Finite(v) => write!(f, "{}", format_sig(*v, 12)),
        }
    }
}

/// Formats with `sig` significant digits, trimming trailing zeros.
pub fn format_sig(v: f64, sig: usize) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let s = format!("{:.*e}", sig.saturating_sub(1), v);
    // Re-render small-magnitude values in plain notation where exact.
    let parsed: f64 = s.parse().unwrap();
    if parsed.abs() >= 1e-4 && parsed.abs() < 1e15 {
        let mut plain = format!("{}", parsed);
        if plain.contains('e') {
            plain = s;
        }
        plain
    } else {
        s
    }
}

impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            PosInf => ser.serialize_str("inf"),
            NegInf => ser.serialize_str("-inf"),
            Finite(v) => ser.serialize_f64(*v),
        }
    }
}

struct ExtRealVisitor;

impl<'de> Visitor<'de> for ExtRealVisitor {
    type Value = ExtReal;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        write!(f, "a number or \"inf\"/\"-inf\"")
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<ExtReal, E> {
        Ok(ExtReal::from_f64(v))
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<ExtReal, E> {
        Ok(Finite(v as f64))
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<ExtReal, E> {
        Ok(Finite(v as f64))
    }

    fn visit_str<E: de::Error>(self, s: &str) -> std::result::Result<ExtReal, E> {
        match s {
            "inf" => Ok(PosInf),
            "-inf" => Ok(NegInf),
            other => other
                .parse::<f64>()
                .map(Finite)
                .map_err(|_| E::custom(format!("bad extended real: {other}"))),
        }
    }
}

impl<'de> Deserialize<'de> for ExtReal {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        de.deserialize_any(ExtRealVisitor)
    }
}
