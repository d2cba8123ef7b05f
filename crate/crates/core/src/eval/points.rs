use std::fmt;
use std::ops::{Add, AddAssign};

use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

/// A non-negative score with half-point granularity, stored as a count of halves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Points(u64);

impl Points {
    pub const ZERO: Points = Points(0);
    pub const HALF: Points = Points(1);
    pub const ONE: Points = Points(2);

    pub fn from_halves(halves: u64) -> Self {
        Points(halves)
    }

    pub fn halves(self) -> u64 {
        self.0
    }

    /// Accepts non-negative multiples of 0.5.
    pub fn from_f64(value: f64) -> Option<Self> {
        let halves = value * 2.0;
        if !value.is_finite() || value < 0.0 || halves.fract() != 0.0 || halves > u64::MAX as f64 {
            return None;
        }
        Some(Points(halves as u64))
    }

    pub fn as_f64(self) -> f64 {
        self.0 as f64 / 2.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl Add for Points {
    type Output = Points;

    fn add(self, rhs: Points) -> Points {
        Points(self.0 + rhs.0)
    }
}

impl AddAssign for Points {
    fn add_assign(&mut self, rhs: Points) {
        self.0 += rhs.0;
    }
}

impl std::iter::Sum for Points {
    fn sum<I: Iterator<Item = Points>>(iter: I) -> Points {
        iter.fold(Points::ZERO, Add::add)
    }
}

impl fmt::Display for Points {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_multiple_of(2) {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}.5", self.0 / 2)
        }
    }
}

impl Serialize for Points {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        if self.0.is_multiple_of(2) {
            serializer.serialize_u64(self.0 / 2)
        } else {
            serializer.serialize_f64(self.as_f64())
        }
    }
}

impl<'de> Deserialize<'de> for Points {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let value = f64::deserialize(deserializer)?;
        Points::from_f64(value)
            .ok_or_else(|| de::Error::custom(format!("{value} is not a non-negative multiple of 0.5")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_point_arithmetic() {
        assert_eq!(Points::HALF + Points::HALF, Points::ONE);
        assert_eq!(Points::from_f64(4.5).unwrap().to_string(), "4.5");
        assert_eq!(Points::from_f64(13.0).unwrap().to_string(), "13");
        assert!(Points::from_f64(0.25).is_none());
        assert!(Points::from_f64(-1.0).is_none());
    }

    #[test]
    fn serde_uses_plain_numbers() {
        let p: Points = serde_json::from_str("2.5").unwrap();
        assert_eq!(p.halves(), 5);
        assert_eq!(serde_json::to_string(&p).unwrap(), "2.5");
        assert_eq!(serde_json::to_string(&Points::ONE).unwrap(), "1");
        assert!(serde_json::from_str::<Points>("0.3").is_err());
    }
}
