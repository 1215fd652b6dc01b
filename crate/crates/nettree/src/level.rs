//! Tree levels: integers plus the two sentinel levels of the leaf and root
//! layers. `NEG_INF` sorts below every integer and `POS_INF` above, and the
//! scale `tau^level` is 0 at `NEG_INF` and infinite at `POS_INF` in every
//! threshold comparison.

use serde::de::{self, Deserializer, Visitor};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Level {
    NegInf,
    Finite(i32),
    PosInf,
}

impl Level {
    pub fn is_finite(self) -> bool {
        matches!(self, Level::Finite(_))
    }

    pub fn finite(self) -> Option<i32> {
        match self {
            Level::Finite(k) => Some(k),
            _ => None,
        }
    }

    /// The level one above; sentinels are fixed points.
    pub fn succ(self) -> Level {
        match self {
            Level::Finite(k) => Level::Finite(k + 1),
            s => s,
        }
    }

    /// The level one below; sentinels are fixed points.
    pub fn pred(self) -> Level {
        match self {
            Level::Finite(k) => Level::Finite(k - 1),
            s => s,
        }
    }

    /// `tau^level` under the sentinel conventions.
    pub fn scale(self, tau: f64) -> f64 {
        match self {
            Level::NegInf => 0.0,
            Level::Finite(k) => tau.powi(k),
            Level::PosInf => f64::INFINITY,
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Level::NegInf => write!(f, "-inf"),
            Level::Finite(k) => write!(f, "{k}"),
            Level::PosInf => write!(f, "+inf"),
        }
    }
}

// JSON encoding: a plain integer, or the strings "-inf" / "+inf".
impl Serialize for Level {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Level::NegInf => serializer.serialize_str("-inf"),
            Level::PosInf => serializer.serialize_str("+inf"),
            Level::Finite(k) => serializer.serialize_i32(*k),
        }
    }
}

struct LevelVisitor;

impl Visitor<'_> for LevelVisitor {
    type Value = Level;

    fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "an integer level or \"-inf\"/\"+inf\"")
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<Level, E> {
        i32::try_from(v)
            .map(Level::Finite)
            .map_err(|_| E::custom(format!("level {v} out of range")))
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<Level, E> {
        i32::try_from(v)
            .map(Level::Finite)
            .map_err(|_| E::custom(format!("level {v} out of range")))
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<Level, E> {
        match v {
            "-inf" => Ok(Level::NegInf),
            "+inf" => Ok(Level::PosInf),
            other => Err(E::custom(format!("unknown level string '{other}'"))),
        }
    }
}

impl<'de> Deserialize<'de> for Level {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Level, D::Error> {
        deserializer.deserialize_any(LevelVisitor)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordering() {
        assert!(Level::NegInf < Level::Finite(i32::MIN));
        assert!(Level::Finite(i32::MAX) < Level::PosInf);
        assert!(Level::Finite(-3) < Level::Finite(2));
    }

    #[test]
    fn scale_sentinels() {
        assert_eq!(Level::NegInf.scale(6.0), 0.0);
        assert_eq!(Level::PosInf.scale(6.0), f64::INFINITY);
        assert_eq!(Level::Finite(2).scale(2.0), 4.0);
        assert_eq!(Level::Finite(-1).scale(2.0), 0.5);
    }

    #[test]
    fn json_round_trip() {
        for l in [Level::NegInf, Level::PosInf, Level::Finite(-7), Level::Finite(12)] {
            let s = serde_json::to_string(&l).unwrap();
            let back: Level = serde_json::from_str(&s).unwrap();
            assert_eq!(l, back);
        }
        assert_eq!(serde_json::to_string(&Level::Finite(3)).unwrap(), "3");
        assert_eq!(serde_json::to_string(&Level::PosInf).unwrap(), "\"+inf\"");
    }
}
