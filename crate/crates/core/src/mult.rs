//! Values in ℕ ∪ {∞}: edge multiplicities, degrees and shares.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, Mul};

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A count in ℕ ∪ {∞}.
///
/// Bundles always carry `Fin(k)` with `k >= 1` or `Inf`; `Fin(0)` only shows
/// up as the result of a sum (a degree, an adjacency entry).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mult {
    Fin(u64),
    Inf,
}

impl Mult {
    pub const ZERO: Mult = Mult::Fin(0);
    pub const ONE: Mult = Mult::Fin(1);

    pub fn is_zero(self) -> bool {
        self == Mult::ZERO
    }

    pub fn is_inf(self) -> bool {
        self == Mult::Inf
    }

    pub fn finite(self) -> Option<u64> {
        match self {
            Mult::Fin(k) => Some(k),
            Mult::Inf => None,
        }
    }
}

impl Default for Mult {
    fn default() -> Self {
        Mult::ZERO
    }
}

impl From<u64> for Mult {
    fn from(k: u64) -> Self {
        Mult::Fin(k)
    }
}

impl Add for Mult {
    type Output = Mult;

    fn add(self, rhs: Mult) -> Mult {
        match (self, rhs) {
            (Mult::Fin(a), Mult::Fin(b)) => Mult::Fin(a.checked_add(b).expect("multiplicity overflow")),
            _ => Mult::Inf,
        }
    }
}

impl Mul for Mult {
    type Output = Mult;

    /// `0 · ∞ = 0`: an empty family of infinite families is empty.
    fn mul(self, rhs: Mult) -> Mult {
        match (self, rhs) {
            (Mult::Fin(0), _) | (_, Mult::Fin(0)) => Mult::ZERO,
            (Mult::Fin(a), Mult::Fin(b)) => Mult::Fin(a.checked_mul(b).expect("multiplicity overflow")),
            _ => Mult::Inf,
        }
    }
}

impl Sum for Mult {
    fn sum<I: Iterator<Item = Mult>>(iter: I) -> Mult {
        iter.fold(Mult::ZERO, Add::add)
    }
}

impl fmt::Display for Mult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mult::Fin(k) => write!(f, "{k}"),
            Mult::Inf => f.write_str("inf"),
        }
    }
}

impl Serialize for Mult {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Mult::Fin(k) => s.serialize_u64(*k),
            Mult::Inf => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Mult {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct MultVisitor;

        impl Visitor<'_> for MultVisitor {
            type Value = Mult;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a non-negative integer or \"inf\"")
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Mult, E> {
                Ok(Mult::Fin(v))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Mult, E> {
                u64::try_from(v)
                    .map(Mult::Fin)
                    .map_err(|_| E::custom(format!("negative count {v}")))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Mult, E> {
                match v {
                    "inf" | "Inf" | "∞" | "infinity" => Ok(Mult::Inf),
                    other => other
                        .parse::<u64>()
                        .map(Mult::Fin)
                        .map_err(|_| E::custom(format!("expected a count or \"inf\", got {other:?}"))),
                }
            }
        }

        d.deserialize_any(MultVisitor)
    }
}
