use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::Add;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Utility or welfare value: an exact integer, or the inadmissible `NegInf`.
///
/// `NegInf` absorbs addition and compares below every finite value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Welfare {
    NegInf,
    Finite(i64),
}

impl Welfare {
    pub const ZERO: Welfare = Welfare::Finite(0);

    pub fn is_finite(self) -> bool {
        matches!(self, Welfare::Finite(_))
    }

    pub fn finite(self) -> Option<i64> {
        match self {
            Welfare::Finite(v) => Some(v),
            Welfare::NegInf => None,
        }
    }

    /// Multiplies by a non-negative count. A zero count yields zero even for
    /// `NegInf`: the term is absent rather than inadmissible.
    pub fn times(self, count: u64) -> Welfare {
        if count == 0 {
            return Welfare::ZERO;
        }
        match self {
            Welfare::NegInf => Welfare::NegInf,
            Welfare::Finite(v) => {
                let c = i64::try_from(count).expect("count exceeds i64");
                Welfare::Finite(v.checked_mul(c).expect("welfare overflow"))
            }
        }
    }
}

impl Default for Welfare {
    fn default() -> Self {
        Welfare::ZERO
    }
}

impl From<i64> for Welfare {
    fn from(v: i64) -> Self {
        Welfare::Finite(v)
    }
}

impl Add for Welfare {
    type Output = Welfare;

    fn add(self, rhs: Welfare) -> Welfare {
        match (self, rhs) {
            (Welfare::Finite(a), Welfare::Finite(b)) => {
                Welfare::Finite(a.checked_add(b).expect("welfare overflow"))
            }
            _ => Welfare::NegInf,
        }
    }
}

impl Sum for Welfare {
    fn sum<I: Iterator<Item = Welfare>>(iter: I) -> Welfare {
        iter.fold(Welfare::ZERO, |acc, w| acc + w)
    }
}

impl PartialOrd for Welfare {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Welfare {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Welfare::NegInf, Welfare::NegInf) => Ordering::Equal,
            (Welfare::NegInf, Welfare::Finite(_)) => Ordering::Less,
            (Welfare::Finite(_), Welfare::NegInf) => Ordering::Greater,
            (Welfare::Finite(a), Welfare::Finite(b)) => a.cmp(b),
        }
    }
}

impl fmt::Display for Welfare {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Welfare::NegInf => f.write_str("-inf"),
            Welfare::Finite(v) => write!(f, "{v}"),
        }
    }
}

// JSON form: an integer, or the string "-inf".
impl Serialize for Welfare {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Welfare::NegInf => serializer.serialize_str("-inf"),
            Welfare::Finite(v) => serializer.serialize_i64(*v),
        }
    }
}

impl<'de> Deserialize<'de> for Welfare {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct WelfareVisitor;

        impl Visitor<'_> for WelfareVisitor {
            type Value = Welfare;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an integer or \"-inf\"")
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Welfare, E> {
                Ok(Welfare::Finite(v))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Welfare, E> {
                i64::try_from(v)
                    .map(Welfare::Finite)
                    .map_err(|_| E::custom("welfare out of range"))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Welfare, E> {
                match v {
                    "-inf" => Ok(Welfare::NegInf),
                    other => Err(E::invalid_value(de::Unexpected::Str(other), &self)),
                }
            }
        }

        deserializer.deserialize_any(WelfareVisitor)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neg_inf_absorbs_addition() {
        assert_eq!(Welfare::NegInf + Welfare::Finite(5), Welfare::NegInf);
        assert_eq!(Welfare::Finite(-3) + Welfare::NegInf, Welfare::NegInf);
        assert_eq!(Welfare::NegInf + Welfare::NegInf, Welfare::NegInf);
        assert_eq!(
            Welfare::Finite(2) + Welfare::Finite(-7),
            Welfare::Finite(-5)
        );
    }

    #[test]
    fn neg_inf_is_below_everything() {
        assert!(Welfare::NegInf < Welfare::Finite(i64::MIN));
        assert!(Welfare::Finite(-1) < Welfare::Finite(0));
    }

    #[test]
    fn zero_count_of_neg_inf_is_zero() {
        assert_eq!(Welfare::NegInf.times(0), Welfare::ZERO);
        assert_eq!(Welfare::NegInf.times(2), Welfare::NegInf);
        assert_eq!(Welfare::Finite(-2).times(3), Welfare::Finite(-6));
    }

    #[test]
    fn json_round_trip() {
        let s = serde_json::to_string(&vec![Welfare::NegInf, Welfare::Finite(-4)]).unwrap();
        assert_eq!(s, r#"["-inf",-4]"#);
        let back: Vec<Welfare> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, vec![Welfare::NegInf, Welfare::Finite(-4)]);
        assert!(serde_json::from_str::<Welfare>("\"inf\"").is_err());
    }
}
