//! Exact arithmetic on the circle ℝ/ℤ and the dynamics of the angle
//! d-tupling map `t ↦ d·t mod 1`.
//!
//! Angles are measured in revolutions and stored as reduced arbitrary-precision
//! rationals in `[0, 1)`. Nothing in this module touches floating point.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Degree `d ≥ 2` of the covering map.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Degree(u32);

impl Degree {
    pub fn new(d: u32) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidDegree(d));
        }
        Ok(Degree(d))
    }

    pub fn get(self) -> u32 {
        self.0
    }

    pub fn as_usize(self) -> usize {
        self.0 as usize
    }

    pub(crate) fn big(self) -> BigInt {
        BigInt::from(self.0)
    }
}

impl fmt::Display for Degree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl Serialize for Degree {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_u32(self.0)
    }
}

impl<'de> Deserialize<'de> for Degree {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let d = u32::deserialize(de)?;
        Degree::new(d).map_err(serde::de::Error::custom)
    }
}

/// A point of the circle, an exact rational in `[0, 1)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CirclePoint(BigRational);

impl CirclePoint {
    /// Reduces `value` modulo 1.
    pub fn new(value: BigRational) -> Self {
        let floor = value.floor();
        CirclePoint(value - floor)
    }

    pub fn from_ratio(num: i64, den: i64) -> Result<Self> {
        if den == 0 {
            return Err(Error::MalformedAngle(format!("{num}/{den}")));
        }
        Ok(Self::new(BigRational::new(num.into(), den.into())))
    }

    /// Convenience constructor for tests and literals; panics on a zero denominator.
    pub fn frac(num: i64, den: i64) -> Self {
        Self::from_ratio(num, den).expect("nonzero denominator")
    }

    pub fn zero() -> Self {
        CirclePoint(BigRational::zero())
    }

    pub fn value(&self) -> &BigRational {
        &self.0
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    /// Counterclockwise distance from `self` to `other`, in `[0, 1)`.
    pub fn ccw_distance_to(&self, other: &CirclePoint) -> BigRational {
        let diff = &other.0 - &self.0;
        if diff.is_negative() {
            diff + BigRational::one()
        } else {
            diff
        }
    }

    /// Shorter-arc distance, in `[0, 1/2]`.
    pub fn distance(&self, other: &CirclePoint) -> BigRational {
        let a = self.ccw_distance_to(other);
        let b = other.ccw_distance_to(self);
        a.min(b)
    }

    pub fn add(&self, delta: &BigRational) -> CirclePoint {
        CirclePoint::new(&self.0 + delta)
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(0.0)
    }
}

impl fmt::Display for CirclePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

impl FromStr for CirclePoint {
    type Err = Error;

    /// Accepts the rational form `p/q` only; see [`parse_angle`] for d-nary strings.
    fn from_str(s: &str) -> Result<Self> {
        parse_rational(s)
    }
}

impl Serialize for CirclePoint {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for CirclePoint {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(de)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}

/// `d·t mod 1`.
pub fn sigma(d: Degree, t: &CirclePoint) -> CirclePoint {
    CirclePoint::new(&t.0 * BigRational::from_integer(d.big()))
}

/// `σ_d^n(t)`.
pub fn sigma_iter(d: Degree, t: &CirclePoint, n: usize) -> CirclePoint {
    let mut x = t.clone();
    for _ in 0..n {
        x = sigma(d, &x);
    }
    x
}

/// The `d` preimages `(t + i)/d`, in ascending order.
pub fn preimages(d: Degree, t: &CirclePoint) -> Vec<CirclePoint> {
    let dd = BigRational::from_integer(d.big());
    (0..d.get()).map(|i| CirclePoint((&t.0 + BigRational::from_integer(i.into())) / &dd)).collect()
}

/// The `d − 1` fixed points `i/(d − 1)`.
pub fn fixed_points(d: Degree) -> Vec<CirclePoint> {
    let n = i64::from(d.get()) - 1;
    (0..n).map(|i| CirclePoint::frac(i, n)).collect()
}

/// True iff `t` lies in the open counterclockwise arc from `a` to `b`.
///
/// When `a == b` the arc is the whole circle minus `a`.
pub fn in_arc(t: &CirclePoint, a: &CirclePoint, b: &CirclePoint) -> bool {
    if t == a {
        return false;
    }
    if a == b {
        return true;
    }
    a.ccw_distance_to(t) < a.ccw_distance_to(b)
}

/// True iff `t` lies in the closed counterclockwise arc from `a` to `b`.
pub fn in_closed_arc(t: &CirclePoint, a: &CirclePoint, b: &CirclePoint) -> bool {
    t == a || t == b || in_arc(t, a, b)
}

/// Length of the counterclockwise arc from `a` to `b`; a full turn when `a == b`.
pub fn arc_length(a: &CirclePoint, b: &CirclePoint) -> BigRational {
    if a == b {
        BigRational::one()
    } else {
        a.ccw_distance_to(b)
    }
}

/// Eventual-periodicity data of a forward orbit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Orbit {
    pub preperiod: usize,
    pub cycle: Vec<CirclePoint>,
}

impl Orbit {
    pub fn period(&self) -> usize {
        self.cycle.len()
    }
}

/// Iterates `σ_d` from `t` until a point repeats.
pub fn orbit(d: Degree, t: &CirclePoint) -> Orbit {
    let mut seen: HashMap<CirclePoint, usize> = HashMap::new();
    let mut path = Vec::new();
    let mut x = t.clone();
    loop {
        if let Some(&start) = seen.get(&x) {
            let cycle = path.split_off(start);
            return Orbit { preperiod: start, cycle };
        }
        seen.insert(x.clone(), path.len());
        path.push(x.clone());
        x = sigma(d, &x);
    }
}

/// Eventually periodic base-`d` expansion: `0.pre (period)^∞`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DnaryString {
    pub base: Degree,
    pub preperiod: Vec<u8>,
    pub period: Vec<u8>,
}

impl DnaryString {
    pub fn value(&self) -> CirclePoint {
        let d = BigInt::from(self.base.get());
        let digits_value = |ds: &[u8]| ds.iter().fold(BigInt::zero(), |acc, &x| acc * &d + BigInt::from(x));
        let m = self.preperiod.len() as u32;
        let l = self.period.len() as u32;
        let dm = num_traits::pow(d.clone(), m as usize);
        let pre = BigRational::new(digits_value(&self.preperiod), dm.clone());
        let per_den = dm * (num_traits::pow(d.clone(), l as usize) - BigInt::one());
        let per = BigRational::new(digits_value(&self.period), per_den);
        CirclePoint::new(pre + per)
    }
}

impl fmt::Display for DnaryString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for x in &self.preperiod {
            write!(f, "{x}")?;
        }
        f.write_str("_")?;
        for x in &self.period {
            write!(f, "{x}")?;
        }
        Ok(())
    }
}

fn check_string_base(d: Degree) -> Result<()> {
    if d.get() > 10 {
        Err(Error::BaseTooLarge(d.get()))
    } else {
        Ok(())
    }
}

/// Parses `[digits]_digits` in base `d`.
pub fn parse_dnary(s: &str, d: Degree) -> Result<CirclePoint> {
    check_string_base(d)?;
    let malformed = || Error::MalformedAngle(s.to_string());
    let (pre, per) = s.split_once('_').ok_or_else(malformed)?;
    if per.is_empty() {
        return Err(malformed());
    }
    let to_digits = |part: &str| -> Result<Vec<u8>> {
        part.chars()
            .map(|c| {
                let v = c.to_digit(10).ok_or_else(malformed)?;
                if v >= d.get() {
                    Err(Error::DigitOutOfRange { digit: v, base: d.get() })
                } else {
                    Ok(v as u8)
                }
            })
            .collect()
    };
    let ds = DnaryString { base: d, preperiod: to_digits(pre)?, period: to_digits(per)? };
    Ok(ds.value())
}

/// Canonical expansion: minimal preperiod, minimal period, never an all-`(d−1)` tail.
pub fn render_dnary(t: &CirclePoint, d: Degree) -> Result<DnaryString> {
    check_string_base(d)?;
    let db = d.big();
    let den = t.denom().clone();
    // Split den = smooth * coprime where smooth's primes all divide d.
    let mut coprime = den.clone();
    loop {
        let g = coprime.gcd(&db);
        if g.is_one() {
            break;
        }
        while (&coprime % &g).is_zero() {
            coprime /= &g;
        }
    }
    let smooth = &den / &coprime;
    let mut preperiod_len = 0usize;
    let mut power = BigInt::one();
    while !(&power % &smooth).is_zero() {
        power *= &db;
        preperiod_len += 1;
    }
    let period_len = if coprime.is_one() {
        1
    } else {
        let mut k = 1usize;
        let mut acc = &db % &coprime;
        while !acc.is_one() {
            acc = (acc * &db) % &coprime;
            k += 1;
        }
        k
    };
    let mut rem = t.numer().clone();
    let mut digits = Vec::with_capacity(preperiod_len + period_len);
    for _ in 0..preperiod_len + period_len {
        rem *= &db;
        let (q, r) = rem.div_rem(&den);
        digits.push(q.to_u8().expect("digit below base"));
        rem = r;
    }
    let period = digits.split_off(preperiod_len);
    Ok(DnaryString { base: d, preperiod: digits, period })
}

fn parse_int(s: &str) -> Option<BigInt> {
    let body = s.strip_prefix('-').unwrap_or(s);
    if body.is_empty() || !body.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

fn parse_rational(s: &str) -> Result<CirclePoint> {
    let malformed = || Error::MalformedAngle(s.to_string());
    let (p, q) = s.trim().split_once('/').ok_or_else(malformed)?;
    let p = parse_int(p).ok_or_else(malformed)?;
    let q = parse_int(q).ok_or_else(malformed)?;
    if q.is_zero() {
        return Err(malformed());
    }
    Ok(CirclePoint::new(BigRational::new(p, q)))
}

/// Parses an angle literal: `p/q` for any degree, or a d-nary string `[digits]_digits`.
pub fn parse_angle(s: &str, d: Degree) -> Result<CirclePoint> {
    let s = s.trim();
    if s.contains('/') {
        parse_rational(s)
    } else if s.contains('_') {
        parse_dnary(s, d)
    } else {
        Err(Error::MalformedAngle(s.to_string()))
    }
}

/// Parses a comma-separated list of angle literals.
pub fn parse_angle_list(s: &str, d: Degree) -> Result<Vec<CirclePoint>> {
    s.split(',').filter(|p| !p.trim().is_empty()).map(|p| parse_angle(p, d)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn deg(d: u32) -> Degree {
        Degree::new(d).unwrap()
    }

    fn p(n: i64, m: i64) -> CirclePoint {
        CirclePoint::frac(n, m)
    }

    #[test]
    fn sigma_examples() {
        assert_eq!(sigma(deg(2), &p(1, 7)), p(2, 7));
        assert_eq!(sigma(deg(3), &p(0, 1)), p(0, 1));
        assert_eq!(sigma(deg(5), &p(3, 4)), p(3, 4));
    }

    #[test]
    fn preimage_examples() {
        assert_eq!(preimages(deg(2), &p(0, 1)), vec![p(0, 1), p(1, 2)]);
        assert_eq!(preimages(deg(2), &p(2, 7)), vec![p(1, 7), p(9, 14)]);
        assert_eq!(preimages(deg(5), &p(1, 4)), vec![p(1, 20), p(1, 4), p(9, 20), p(13, 20), p(17, 20)]);
    }

    #[test]
    fn fixed_point_examples() {
        assert_eq!(fixed_points(deg(2)), vec![p(0, 1)]);
        assert_eq!(fixed_points(deg(3)), vec![p(0, 1), p(1, 2)]);
        assert_eq!(fixed_points(deg(5)), vec![p(0, 1), p(1, 4), p(1, 2), p(3, 4)]);
    }

    #[test]
    fn dnary_examples() {
        assert_eq!(parse_dnary("_001", deg(2)).unwrap(), p(1, 7));
        assert_eq!(parse_dnary("_0", deg(5)).unwrap(), p(0, 1));
        assert_eq!(parse_dnary("1_3", deg(4)).unwrap(), p(1, 2));
        assert_eq!(render_dnary(&p(1, 7), deg(2)).unwrap().to_string(), "_001");
        assert_eq!(render_dnary(&p(1, 2), deg(2)).unwrap().to_string(), "1_0");
        assert_eq!(render_dnary(&p(0, 1), deg(3)).unwrap().to_string(), "_0");
        assert_eq!(render_dnary(&p(1, 4), deg(5)).unwrap().to_string(), "_1");
    }

    #[test]
    fn dnary_errors() {
        assert!(matches!(parse_dnary("012", deg(3)), Err(Error::MalformedAngle(_))));
        assert!(matches!(parse_dnary("0_", deg(3)), Err(Error::MalformedAngle(_))));
        assert!(matches!(parse_dnary("_3", deg(3)), Err(Error::DigitOutOfRange { digit: 3, base: 3 })));
        assert!(matches!(parse_dnary("_1", deg(11)), Err(Error::BaseTooLarge(11))));
        assert!(render_dnary(&p(1, 3), deg(12)).is_err());
        // rational syntax still works in large bases
        assert_eq!(parse_angle("1/11", deg(12)).unwrap(), p(1, 11));
    }

    #[test]
    fn rational_literals_normalize() {
        assert_eq!(parse_angle("2/4", deg(2)).unwrap(), p(1, 2));
        assert_eq!(parse_angle("9/7", deg(2)).unwrap(), p(2, 7));
        assert_eq!(parse_angle("-1/4", deg(2)).unwrap(), p(3, 4));
        assert!(parse_angle("1/0", deg(2)).is_err());
        assert!(parse_angle("a/3", deg(2)).is_err());
        assert!(parse_angle("0.5", deg(2)).is_err());
    }

    #[test]
    fn in_arc_examples() {
        assert!(in_arc(&p(1, 4), &p(0, 1), &p(1, 2)));
        assert!(!in_arc(&p(3, 4), &p(0, 1), &p(1, 2)));
        assert!(in_arc(&p(0, 1), &p(3, 4), &p(1, 4)));
        assert!(!in_arc(&p(1, 2), &p(0, 1), &p(1, 2)));
    }

    #[test]
    fn orbit_examples() {
        let o = orbit(deg(2), &p(1, 7));
        assert_eq!(o.preperiod, 0);
        assert_eq!(o.cycle, vec![p(1, 7), p(2, 7), p(4, 7)]);
        let o = orbit(deg(2), &p(1, 2));
        assert_eq!((o.preperiod, o.cycle), (1, vec![p(0, 1)]));
        let o = orbit(deg(3), &p(1, 8));
        assert_eq!((o.preperiod, o.cycle), (0, vec![p(1, 8), p(3, 8)]));
    }

    #[test]
    fn degree_rejects_small() {
        assert!(Degree::new(1).is_err());
        assert!(Degree::new(0).is_err());
    }

    #[test]
    fn fixed_points_match_brute_force() {
        for d in 2..=9u32 {
            let dd = deg(d);
            // every fixed point has denominator dividing d - 1
            let n = i64::from(d) - 1;
            let brute: Vec<_> = (0..n).map(|k| p(k, n)).filter(|t| sigma(dd, t) == *t).collect();
            assert_eq!(fixed_points(dd), brute);
        }
    }

    #[test]
    fn periodic_points_are_k_over_d_q_minus_one() {
        for d in 2..=4u32 {
            let dd = deg(d);
            for q in 1..=6u32 {
                let n = i64::from(d).pow(q) - 1;
                for k in 0..n {
                    let o = orbit(dd, &p(k, n));
                    assert_eq!(o.preperiod, 0);
                    assert_eq!(q as usize % o.period(), 0);
                }
                // conversely, anything fixed by σ^q has denominator dividing d^q - 1
                for den in 1..=60i64 {
                    for num in 0..den {
                        let t = p(num, den);
                        if sigma_iter(dd, &t, q as usize) == t {
                            assert_eq!(n % t.denom().to_i64().unwrap(), 0);
                        }
                    }
                }
            }
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn point() -> impl Strategy<Value = CirclePoint> {
            (0i64..5000, 1i64..5000).prop_map(|(n, m)| CirclePoint::frac(n, m))
        }

        proptest! {
            #[test]
            fn preimages_map_back(t in point(), d in 2u32..9) {
                let dd = deg(d);
                let pre = preimages(dd, &t);
                prop_assert_eq!(pre.len(), d as usize);
                let step = BigRational::new(1.into(), BigInt::from(d));
                for w in pre.windows(2) {
                    prop_assert_eq!(w[0].ccw_distance_to(&w[1]), step.clone());
                }
                for x in &pre {
                    prop_assert_eq!(sigma(dd, x), t.clone());
                }
            }

            #[test]
            fn dnary_round_trip(t in point(), d in 2u32..=10) {
                let dd = deg(d);
                let s = render_dnary(&t, dd).unwrap();
                prop_assert!(!s.period.iter().all(|&x| u32::from(x) == d - 1));
                prop_assert_eq!(parse_dnary(&s.to_string(), dd).unwrap(), t);
            }

            #[test]
            fn circular_order_trichotomy(a in point(), b in point(), t in point()) {
                prop_assume!(a != b && t != a && t != b);
                let x = in_arc(&t, &a, &b);
                let y = in_arc(&t, &b, &a);
                prop_assert!(x ^ y);
            }
        }
    }
}
