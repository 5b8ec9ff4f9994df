//! Slopes on a torus boundary component.
//!
//! A slope is a reduced fraction `p/q` in `Q ∪ {∞}` with `q ≥ 0`; `∞` is stored
//! as `1/0`. Slopes are acted on by `GL2(Z)` through [`MoebiusMap`].

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::arith::gcd;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SlopeError {
    #[error("0/0 is not a slope")]
    ZeroZero,
    #[error("integer overflow in slope arithmetic")]
    Overflow,
    #[error("cannot parse slope from {0:?}")]
    Parse(String),
    #[error("matrix [[{0},{1}],[{2},{3}]] is not in GL2(Z)")]
    NotInvertible(i64, i64, i64, i64),
}

/// A reduced slope `num/den` with `den ≥ 0`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct Slope {
    num: i64,
    den: i64,
}

impl Slope {
    pub const INF: Slope = Slope { num: 1, den: 0 };
    pub const ZERO: Slope = Slope { num: 0, den: 1 };

    pub fn num(self) -> i64 {
        self.num
    }

    pub fn den(self) -> i64 {
        self.den
    }

    pub fn int(k: i64) -> Slope {
        Slope { num: k, den: 1 }
    }

    pub fn is_inf(self) -> bool {
        self.den == 0
    }

    pub fn is_integer(self) -> bool {
        self.den == 1
    }

    /// Reduces `p/q` from wide integers, failing if the result leaves `i64`.
    pub fn from_i128(p: i128, q: i128) -> Result<Slope, SlopeError> {
        if p == 0 && q == 0 {
            return Err(SlopeError::ZeroZero);
        }
        let g = gcd(p, q);
        let (mut p, mut q) = (p / g, q / g);
        if q < 0 || (q == 0 && p < 0) {
            p = -p;
            q = -q;
        }
        Ok(Slope {
            num: i64::try_from(p).map_err(|_| SlopeError::Overflow)?,
            den: i64::try_from(q).map_err(|_| SlopeError::Overflow)?,
        })
    }

    pub fn neg(self) -> Slope {
        if self.is_inf() {
            self
        } else {
            Slope { num: -self.num, den: self.den }
        }
    }

    /// `self + k` for an integer `k`.
    pub fn add_int(self, k: i64) -> Result<Slope, SlopeError> {
        apply_moebius(MoebiusMap::new(1, k, 0, 1)?, self)
    }

    /// The pair `(p, q)` used as a Seifert fibre or presentation entry.
    pub fn pair(self) -> (i64, i64) {
        (self.num, self.den)
    }
}

/// Canonical slope constructor.
pub fn make_slope(p: i64, q: i64) -> Result<Slope, SlopeError> {
    Slope::from_i128(p as i128, q as i128)
}

/// Geometric intersection number `|ad − bc|`.
pub fn distance(s1: Slope, s2: Slope) -> u128 {
    let v = s1.num as i128 * s2.den as i128 - s2.num as i128 * s1.den as i128;
    v.unsigned_abs()
}

impl Ord for Slope {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.den == 0, self.num, self.den).cmp(&(other.den == 0, other.num, other.den))
    }
}

impl PartialOrd for Slope {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Slope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 0 {
            write!(f, "inf")
        } else if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl FromStr for Slope {
    type Err = SlopeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        if matches!(t, "inf" | "∞" | "infinity" | "Inf") {
            return Ok(Slope::INF);
        }
        let bad = || SlopeError::Parse(s.to_string());
        match t.split_once('/') {
            Some((p, q)) => {
                let p: i64 = p.trim().parse().map_err(|_| bad())?;
                let q: i64 = q.trim().parse().map_err(|_| bad())?;
                make_slope(p, q)
            }
            None => Ok(Slope::int(t.parse().map_err(|_| bad())?)),
        }
    }
}

impl Serialize for Slope {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Slope {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// `x ↦ (αx + β)/(γx + δ)` with `|αδ − βγ| = 1`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct MoebiusMap {
    pub alpha: i64,
    pub beta: i64,
    pub gamma: i64,
    pub delta: i64,
}

impl MoebiusMap {
    pub const IDENTITY: MoebiusMap = MoebiusMap { alpha: 1, beta: 0, gamma: 0, delta: 1 };
    /// `x ↦ 1/x`
    pub const RECIP: MoebiusMap = MoebiusMap { alpha: 0, beta: 1, gamma: 1, delta: 0 };
    /// `x ↦ −x`
    pub const NEG: MoebiusMap = MoebiusMap { alpha: -1, beta: 0, gamma: 0, delta: 1 };
    /// `x ↦ 1 − x`
    pub const ONE_MINUS: MoebiusMap = MoebiusMap { alpha: -1, beta: 1, gamma: 0, delta: 1 };
    /// `x ↦ x/(x − 1)`
    pub const X_OVER_X_MINUS_ONE: MoebiusMap = MoebiusMap { alpha: 1, beta: 0, gamma: 1, delta: -1 };
    /// `x ↦ (x − 1)/x`
    pub const X_MINUS_ONE_OVER_X: MoebiusMap = MoebiusMap { alpha: 1, beta: -1, gamma: 1, delta: 0 };
    /// `x ↦ 1/(1 − x)`
    pub const ONE_OVER_ONE_MINUS: MoebiusMap = MoebiusMap { alpha: 0, beta: 1, gamma: -1, delta: 1 };

    pub fn new(alpha: i64, beta: i64, gamma: i64, delta: i64) -> Result<MoebiusMap, SlopeError> {
        let det = alpha as i128 * delta as i128 - beta as i128 * gamma as i128;
        if det.abs() != 1 {
            return Err(SlopeError::NotInvertible(alpha, beta, gamma, delta));
        }
        Ok(MoebiusMap { alpha, beta, gamma, delta })
    }

    pub fn det(&self) -> i64 {
        self.alpha * self.delta - self.beta * self.gamma
    }

    /// `x ↦ x + k`
    pub fn shift(k: i64) -> MoebiusMap {
        MoebiusMap { alpha: 1, beta: k, gamma: 0, delta: 1 }
    }

    /// Matrix product: `self.compose(other)` acts as `other` first, then `self`.
    pub fn compose(&self, other: &MoebiusMap) -> Result<MoebiusMap, SlopeError> {
        let m = |a: i64, b: i64, c: i64, d: i64| -> Result<i64, SlopeError> {
            a.checked_mul(b).and_then(|x| c.checked_mul(d).and_then(|y| x.checked_add(y))).ok_or(SlopeError::Overflow)
        };
        Ok(MoebiusMap {
            alpha: m(self.alpha, other.alpha, self.beta, other.gamma)?,
            beta: m(self.alpha, other.beta, self.beta, other.delta)?,
            gamma: m(self.gamma, other.alpha, self.delta, other.gamma)?,
            delta: m(self.gamma, other.beta, self.delta, other.delta)?,
        })
    }

    pub fn inverse(&self) -> MoebiusMap {
        let d = self.det();
        MoebiusMap { alpha: d * self.delta, beta: -d * self.beta, gamma: -d * self.gamma, delta: d * self.alpha }
    }

    /// Equality as maps on slopes (`M` and `−M` act identically).
    pub fn same_action(&self, other: &MoebiusMap) -> bool {
        self == other
            || (self.alpha == -other.alpha
                && self.beta == -other.beta
                && self.gamma == -other.gamma
                && self.delta == -other.delta)
    }
}

pub fn apply_moebius(m: MoebiusMap, s: Slope) -> Result<Slope, SlopeError> {
    let (p, q) = (s.num as i128, s.den as i128);
    Slope::from_i128(m.alpha as i128 * p + m.beta as i128 * q, m.gamma as i128 * p + m.delta as i128 * q)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sl(s: &str) -> Slope {
        s.parse().unwrap()
    }

    #[test]
    fn canonical_forms() {
        assert_eq!(make_slope(2, 4).unwrap(), sl("1/2"));
        assert_eq!(make_slope(-5, 0).unwrap(), Slope::INF);
        assert_eq!(make_slope(1, -2).unwrap(), sl("-1/2"));
        assert_eq!(make_slope(0, 0), Err(SlopeError::ZeroZero));
        assert_eq!(make_slope(0, -7).unwrap(), Slope::ZERO);
    }

    #[test]
    fn distances() {
        assert_eq!(distance(Slope::INF, Slope::ZERO), 1);
        assert_eq!(distance(Slope::int(-3), Slope::ZERO), 3);
        assert_eq!(distance(Slope::int(-3), Slope::int(-1)), 2);
    }

    #[test]
    fn moebius_examples() {
        assert_eq!(apply_moebius(MoebiusMap::IDENTITY, sl("7/3")).unwrap(), sl("7/3"));
        // a/(a−b) at a = 1, b = 2
        let expect = Slope::from_i128(1, 1 - 2).unwrap();
        assert_eq!(apply_moebius(MoebiusMap::X_OVER_X_MINUS_ONE, sl("1/2")).unwrap(), expect);
        assert_eq!(expect, Slope::int(-1));
        assert_eq!(apply_moebius(MoebiusMap::RECIP, Slope::INF).unwrap(), Slope::ZERO);
        assert!(MoebiusMap::new(2, 0, 0, 1).is_err());
    }

    #[test]
    fn parse_and_print() {
        for s in ["inf", "0", "-3", "5/2", "-14/5"] {
            assert_eq!(sl(s).to_string(), s);
        }
        assert_eq!(sl("1/0"), Slope::INF);
        assert_eq!(sl(" 6/-4 "), sl("-3/2"));
        assert!("x".parse::<Slope>().is_err());
        assert!("1/".parse::<Slope>().is_err());
    }

    #[test]
    fn serde_roundtrip() {
        let v = vec![sl("1/2"), Slope::INF, Slope::int(-3)];
        let j = serde_json::to_string(&v).unwrap();
        assert_eq!(j, r#"["1/2","inf","-3"]"#);
        let back: Vec<Slope> = serde_json::from_str(&j).unwrap();
        assert_eq!(back, v);
    }
}
