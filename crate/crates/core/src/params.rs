//! Exact parameters: the right-hand-side ratio `r` and the exponents `ε`, `k`.
//!
//! All of them are rationals. Thresholds of the form `n^k` are irrational in
//! general, so comparisons against them are done by raising both sides to
//! the exponent's denominator and comparing integers.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::Zero;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Exact ratio `p/q`, reduced.
pub type Ratio = num_rational::Ratio<u64>;

/// Largest denominator accepted for an [`Exponent`]. Exact comparisons raise
/// integers to this power.
pub const MAX_EXPONENT_DENOMINATOR: u64 = 1000;

/// Parses `p/q` into a reduced ratio. Decimal notation is rejected so that no
/// value is silently rounded.
pub fn parse_ratio(s: &str) -> Result<Ratio> {
    let (p, q) = s
        .trim()
        .split_once('/')
        .ok_or_else(|| Error::param(format!("ratio `{s}` must be written p/q")))?;
    let p: u64 = parse_digits(p).ok_or_else(|| Error::param(format!("bad numerator in `{s}`")))?;
    let q: u64 =
        parse_digits(q).ok_or_else(|| Error::param(format!("bad denominator in `{s}`")))?;
    if q == 0 {
        return Err(Error::param(format!("zero denominator in `{s}`")));
    }
    Ok(Ratio::new(p, q))
}

/// Parses `p/q` and checks `0 < r < 1`.
pub fn parse_unit_ratio(s: &str) -> Result<Ratio> {
    let r = parse_ratio(s)?;
    check_open_unit(r)?;
    Ok(r)
}

pub fn check_open_unit(r: Ratio) -> Result<()> {
    if *r.numer() == 0 || r.numer() >= r.denom() {
        return Err(Error::param(format!("ratio {r} must lie in (0, 1)")));
    }
    Ok(())
}

fn parse_digits(s: &str) -> Option<u64> {
    let s = s.trim();
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

/// A rational exponent in the open interval (0, 1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Exponent {
    num: u64,
    den: u64,
}

impl Exponent {
    pub fn new(num: u64, den: u64) -> Result<Self> {
        if den == 0 {
            return Err(Error::param("exponent denominator is zero"));
        }
        let r = Ratio::new(num, den);
        let (num, den) = (*r.numer(), *r.denom());
        if num == 0 || num >= den {
            return Err(Error::param(format!(
                "exponent {num}/{den} must lie in (0, 1)"
            )));
        }
        if den > MAX_EXPONENT_DENOMINATOR {
            return Err(Error::param(format!(
                "exponent {num}/{den}: denominator above {MAX_EXPONENT_DENOMINATOR}"
            )));
        }
        Ok(Exponent { num, den })
    }

    pub fn numer(&self) -> u64 {
        self.num
    }

    pub fn denom(&self) -> u64 {
        self.den
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// `1 − self`.
    pub fn complement(&self) -> Exponent {
        Exponent {
            num: self.den - self.num,
            den: self.den,
        }
    }

    /// `⌊n^self⌋`, exact.
    pub fn floor_power(&self, n: u64) -> u64 {
        floor_rational_power(n, self.num, self.den)
    }

    /// Whether `n^self` is an integer.
    pub fn power_is_integral(&self, n: u64) -> bool {
        let m = self.floor_power(n);
        BigUint::from(m).pow(self.den as u32) == BigUint::from(n).pow(self.num as u32)
    }
}

/// Largest `j` with `j^den ≤ n^num`, i.e. `⌊n^{num/den}⌋` for `num ≤ den`.
fn floor_rational_power(n: u64, num: u64, den: u64) -> u64 {
    let target = BigUint::from(n).pow(num as u32);
    let (mut lo, mut hi) = (0u64, n.max(1));
    while lo < hi {
        let mid = lo + (hi - lo).div_ceil(2);
        if BigUint::from(mid).pow(den as u32) <= target {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    lo
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // Terminating decimals print as decimals, everything else as p/q.
        let (mut twos, mut fives, mut rest) = (0u32, 0u32, self.den);
        while rest % 2 == 0 {
            rest /= 2;
            twos += 1;
        }
        while rest % 5 == 0 {
            rest /= 5;
            fives += 1;
        }
        if rest != 1 {
            return write!(f, "{}/{}", self.num, self.den);
        }
        let digits = twos.max(fives);
        let scaled = self.num * 10u64.pow(digits) / self.den;
        write!(f, "0.{:0width$}", scaled, width = digits as usize)
    }
}

impl FromStr for Exponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.contains('/') {
            let r = parse_ratio(s)?;
            return Exponent::new(*r.numer(), *r.denom());
        }
        let (int, frac) = s.split_once('.').unwrap_or((s, ""));
        let bad = || Error::param(format!("exponent `{s}` is not a decimal or p/q"));
        if !(int.is_empty() || int.bytes().all(|b| b == b'0')) {
            return Err(Error::param(format!("exponent `{s}` must lie in (0, 1)")));
        }
        if frac.is_empty() || frac.len() > 18 || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let num: u64 = frac.parse().map_err(|_| bad())?;
        Exponent::new(num, 10u64.pow(frac.len() as u32))
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Str(String),
            Num(f64),
        }
        let text = match Repr::deserialize(d)? {
            Repr::Str(s) => s,
            // Shortest round-trip rendering, so 0.9 reads back as 9/10.
            Repr::Num(x) => format!("{x}"),
        };
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// The constants `0 < k < ε < 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Constants {
    pub epsilon: Exponent,
    pub k: Exponent,
}

impl Constants {
    pub fn new(epsilon: Exponent, k: Exponent) -> Result<Self> {
        let c = Constants { epsilon, k };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        // k < ε  ⇔  k.num·ε.den < ε.num·k.den
        let lhs = self.k.num as u128 * self.epsilon.den as u128;
        let rhs = self.epsilon.num as u128 * self.k.den as u128;
        if lhs >= rhs {
            return Err(Error::param(format!(
                "need 0 < k < epsilon < 1, got k={} epsilon={}",
                self.k, self.epsilon
            )));
        }
        Ok(())
    }

    /// `m = ⌊n^{1−ε}⌋`, the largest number of fixed variables covered.
    pub fn m(&self, n: usize) -> usize {
        self.epsilon.complement().floor_power(n as u64) as usize
    }
}

/// Exact test of `lhs · n^k ≤ rhs` for a rational exponent `k`.
///
/// Both sides are raised to `k`'s denominator, so the comparison is exact.
#[derive(Debug, Clone)]
pub struct PowerScale {
    n_pow_num: BigUint,
    den: u32,
}

impl PowerScale {
    pub fn new(n: u64, k: Exponent) -> Self {
        PowerScale {
            n_pow_num: BigUint::from(n).pow(k.num as u32),
            den: k.den as u32,
        }
    }

    /// `lhs · n^k ≤ rhs`.
    pub fn scaled_le(&self, lhs: &BigUint, rhs: &BigUint) -> bool {
        if lhs.is_zero() {
            return true;
        }
        lhs.pow(self.den) * &self.n_pow_num <= rhs.pow(self.den)
    }

    /// `lhs · n^k ≥ rhs`.
    pub fn scaled_ge(&self, lhs: &BigUint, rhs: &BigUint) -> bool {
        lhs.pow(self.den) * &self.n_pow_num >= rhs.pow(self.den)
    }

    /// Precomputes `rhs^den` for repeated `scaled_le` calls against one bound.
    pub fn bound(&self, rhs: &BigUint) -> ScaledBound<'_> {
        ScaledBound {
            scale: self,
            rhs_pow: rhs.pow(self.den),
        }
    }
}

pub struct ScaledBound<'a> {
    scale: &'a PowerScale,
    rhs_pow: BigUint,
}

impl ScaledBound<'_> {
    pub fn admits(&self, lhs: &BigUint) -> bool {
        if lhs.is_zero() {
            return true;
        }
        lhs.pow(self.scale.den) * &self.scale.n_pow_num <= self.rhs_pow
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratio_parsing() {
        assert_eq!(parse_ratio("1/2").unwrap(), Ratio::new(1, 2));
        assert_eq!(parse_ratio("2/4").unwrap(), Ratio::new(1, 2));
        assert!(parse_ratio("0.5").is_err());
        assert!(parse_ratio("1/0").is_err());
        assert!(parse_ratio("-1/2").is_err());
        assert!(parse_unit_ratio("1/1").is_err());
        assert!(parse_unit_ratio("0/3").is_err());
        assert!(parse_unit_ratio("9/10").is_ok());
    }

    #[test]
    fn exponent_parsing_and_display() {
        let e: Exponent = "0.9".parse().unwrap();
        assert_eq!((e.numer(), e.denom()), (9, 10));
        assert_eq!(e.to_string(), "0.9");
        assert_eq!(e.complement().to_string(), "0.1");
        assert_eq!("0.25".parse::<Exponent>().unwrap().to_string(), "0.25");
        assert_eq!(".5".parse::<Exponent>().unwrap().to_string(), "0.5");
        assert_eq!("1/3".parse::<Exponent>().unwrap().to_string(), "1/3");
        assert!("1.0".parse::<Exponent>().is_err());
        assert!("0".parse::<Exponent>().is_err());
        assert!("0.0".parse::<Exponent>().is_err());
        assert!("0.0001".parse::<Exponent>().is_err());
        assert!("abc".parse::<Exponent>().is_err());
    }

    #[test]
    fn exponent_from_json_number() {
        let e: Exponent = serde_json::from_str("0.9").unwrap();
        assert_eq!(e, "9/10".parse().unwrap());
        let e: Exponent = serde_json::from_str("\"0.5\"").unwrap();
        assert_eq!(serde_json::to_string(&e).unwrap(), "\"0.5\"");
    }

    #[test]
    fn floor_power_is_exact() {
        let tenth = Exponent::new(1, 10).unwrap();
        // 1024^{0.1} = 2 exactly; f64 evaluation of 1 - 0.9 would land below it.
        assert_eq!(tenth.floor_power(1024), 2);
        assert_eq!(tenth.floor_power(1023), 1);
        assert!(tenth.power_is_integral(1024));
        let half = Exponent::new(1, 2).unwrap();
        assert_eq!(half.floor_power(16), 4);
        assert_eq!(half.floor_power(24), 4);
        assert_eq!(half.floor_power(25), 5);
        assert_eq!(half.floor_power(1), 1);
    }

    #[test]
    fn constants_order() {
        let e = Exponent::new(1, 2).unwrap();
        let k = Exponent::new(1, 4).unwrap();
        assert!(Constants::new(e, k).is_ok());
        assert!(Constants::new(k, e).is_err());
        assert!(Constants::new(e, e).is_err());
        assert_eq!(Constants::new(e, k).unwrap().m(4), 2);
    }

    #[test]
    fn power_scale_boundary_is_exact() {
        // 20 · 4^{1/2} ≤ 40 holds with equality.
        let s = PowerScale::new(4, Exponent::new(1, 2).unwrap());
        assert!(s.scaled_le(&BigUint::from(20u32), &BigUint::from(40u32)));
        assert!(!s.scaled_le(&BigUint::from(21u32), &BigUint::from(40u32)));
        let b = s.bound(&BigUint::from(40u32));
        assert!(b.admits(&BigUint::from(20u32)));
        assert!(!b.admits(&BigUint::from(21u32)));
    }
}
