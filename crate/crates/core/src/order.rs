//! Ordering prime bags.
//!
//! [`partial_compare`] only uses structural rules that never need the primes'
//! magnitudes: equality, multiplicity domination, and the doubling-beats-
//! successor rule that follows from Bertrand's postulate. [`exact_compare`]
//! decides every pair by enclosing `ln(a/b)` in intervals of increasing
//! precision, falling back to exact integer comparison.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::pbnum::{PrimeBag, Sign, Special, Unit};
use crate::primes::{self, PrimeIndex};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OrderResult {
    Less,
    Equal,
    Greater,
    Incomparable,
}

impl OrderResult {
    pub fn reverse(self) -> Self {
        match self {
            OrderResult::Less => OrderResult::Greater,
            OrderResult::Greater => OrderResult::Less,
            other => other,
        }
    }
}

impl From<std::cmp::Ordering> for OrderResult {
    fn from(o: std::cmp::Ordering) -> Self {
        match o {
            std::cmp::Ordering::Less => OrderResult::Less,
            std::cmp::Ordering::Equal => OrderResult::Equal,
            std::cmp::Ordering::Greater => OrderResult::Greater,
        }
    }
}

/// Replace one member of index `k` by a member of index `k + 1` (Rule 2:
/// apply the prime successor to that member).
pub fn increment_member(a: &PrimeBag, k: PrimeIndex) -> Result<PrimeBag> {
    let m = a.multiplicity_of(k);
    if !(m >= BigRational::one()) {
        return Err(Error::Domain(format!("{a} has no member {k} to increment")));
    }
    let one = BigRational::one();
    let mut entries: Vec<(PrimeIndex, BigRational)> = a
        .entries()
        .iter()
        .map(|(i, m)| (*i, m.value().clone()))
        .collect();
    entries.push((k, -one.clone()));
    entries.push((k.succ(), one));
    Ok(PrimeBag::from_entries(entries).with_sign(a.sign()).with_unit(a.unit()))
}

/// Cheap, sound comparison of natural bags; `Incomparable` when no
/// structural rule applies.
pub fn partial_compare(a: &PrimeBag, b: &PrimeBag) -> Result<OrderResult> {
    a.require_natural("partial comparison")?;
    b.require_natural("partial comparison")?;
    if a == b {
        return Ok(OrderResult::Equal);
    }
    if let Some(o) = domination(a, b) {
        return Ok(o);
    }
    if doubling_beats_successor(a, b) {
        return Ok(OrderResult::Greater);
    }
    if doubling_beats_successor(b, a) {
        return Ok(OrderResult::Less);
    }
    Ok(OrderResult::Incomparable)
}

/// Sub-bag rule: if every multiplicity of `a` is at most that of `b`, `a` divides `b`.
fn domination(a: &PrimeBag, b: &PrimeBag) -> Option<OrderResult> {
    let (mut a_le, mut b_le) = (true, true);
    let (ea, eb) = (a.entries(), b.entries());
    let (mut i, mut j) = (0, 0);
    while i < ea.len() || j < eb.len() {
        match (ea.get(i), eb.get(j)) {
            (Some((ka, ma)), Some((kb, mb))) if ka == kb => {
                if ma.value() > mb.value() {
                    a_le = false;
                }
                if mb.value() > ma.value() {
                    b_le = false;
                }
                i += 1;
                j += 1;
            }
            (Some((ka, _)), Some((kb, _))) if ka > kb => {
                a_le = false;
                i += 1;
            }
            (Some(_), None) => {
                a_le = false;
                i += 1;
            }
            _ => {
                b_le = false;
                j += 1;
            }
        }
        if !a_le && !b_le {
            return None;
        }
    }
    match (a_le, b_le) {
        (true, false) => Some(OrderResult::Less),
        (false, true) => Some(OrderResult::Greater),
        _ => None,
    }
}

/// True when `a = 2c` and `b` is `c` with one member incremented. Since
/// `p_{k+1} < 2 p_k`, `a > b`.
fn doubling_beats_successor(a: &PrimeBag, b: &PrimeBag) -> bool {
    let two = PrimeIndex::new_unchecked(1);
    if a.multiplicity_of(two) < BigRational::one() {
        return false;
    }
    // b / c must be exactly {k+1: 1, k: -1} for some k, with c = a / 2.
    let mut diff: Vec<(PrimeIndex, BigRational)> = b
        .entries()
        .iter()
        .map(|(k, m)| (*k, m.value().clone()))
        .collect();
    diff.extend(a.entries().iter().map(|(k, m)| (*k, -m.value().clone())));
    diff.push((two, BigRational::one()));
    let diff = PrimeBag::from_entries(diff);
    match diff.entries() {
        [(hi, up), (lo, down)] => {
            *hi == lo.succ() && up.value().is_one() && (-down.value()).is_one()
        }
        _ => false,
    }
}

/// Settings for the interval ladder in [`exact_compare`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CompareConfig {
    pub start_bits: u32,
    pub max_bits: u32,
}

impl Default for CompareConfig {
    fn default() -> Self {
        CompareConfig {
            start_bits: 64,
            max_bits: 4096,
        }
    }
}

/// Total order on finite, positive, real bags.
pub fn exact_compare(a: &PrimeBag, b: &PrimeBag) -> Result<OrderResult> {
    exact_compare_with(a, b, &CompareConfig::default())
}

pub fn exact_compare_with(a: &PrimeBag, b: &PrimeBag, config: &CompareConfig) -> Result<OrderResult> {
    for x in [a, b] {
        if x.unit() == Unit::Imaginary {
            return Err(Error::Domain(format!("{x} is imaginary; imaginary numbers are not ordered")));
        }
        if !x.is_positive_real() {
            return Err(Error::Domain(format!(
                "exact comparison expects finite positive bags, got {x}; use compare_signed"
            )));
        }
    }
    // Canonical bags are equal iff their values are.
    if a == b {
        return Ok(OrderResult::Equal);
    }
    let coeffs = log_ratio_coefficients(a, b);
    let mut bits = config.start_bits.max(8);
    loop {
        let iv = weighted_log_sum(&coeffs, bits);
        if iv.lo.is_positive() {
            return Ok(OrderResult::Greater);
        }
        if iv.hi.is_negative() {
            return Ok(OrderResult::Less);
        }
        if bits >= config.max_bits {
            break;
        }
        bits = (bits * 2).min(config.max_bits);
    }
    exact_integer_compare(&coeffs)
}

/// Integer coefficients `c_k` with `ln(a/b) * L = sum c_k ln p_k`, where `L`
/// clears every multiplicity denominator.
fn log_ratio_coefficients(a: &PrimeBag, b: &PrimeBag) -> Vec<(PrimeIndex, BigInt)> {
    let mut diff: Vec<(PrimeIndex, BigRational)> = a
        .entries()
        .iter()
        .map(|(k, m)| (*k, m.value().clone()))
        .collect();
    diff.extend(b.entries().iter().map(|(k, m)| (*k, -m.value().clone())));
    let diff = PrimeBag::from_entries(diff);
    let l = diff
        .entries()
        .iter()
        .fold(BigInt::one(), |acc, (_, m)| acc.lcm(m.value().denom()));
    diff.entries()
        .iter()
        .map(|(k, m)| (*k, (m.value() * BigRational::from_integer(l.clone())).to_integer()))
        .collect()
}

fn exact_integer_compare(coeffs: &[(PrimeIndex, BigInt)]) -> Result<OrderResult> {
    let mut pos = BigUint::one();
    let mut neg = BigUint::one();
    for (k, c) in coeffs {
        let p = BigUint::from(primes::nth_prime(*k)?);
        let e = c
            .magnitude()
            .to_u32()
            .ok_or_else(|| Error::Resource(format!("exponent {c} too large for exact comparison")))?;
        if c.is_positive() {
            pos *= p.pow(e);
        } else {
            neg *= p.pow(e);
        }
    }
    Ok(pos.cmp(&neg).into())
}

/// Closed interval `[lo, hi] * 2^-scale` with integer endpoints.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interval {
    pub lo: BigInt,
    pub hi: BigInt,
    pub scale: u32,
}

impl Interval {
    pub fn contains_f64(&self, x: f64) -> bool {
        self.lo_f64() <= x && x <= self.hi_f64()
    }

    pub fn lo_f64(&self) -> f64 {
        scaled_to_f64(&self.lo, self.scale)
    }

    pub fn hi_f64(&self) -> f64 {
        scaled_to_f64(&self.hi, self.scale)
    }

    pub fn midpoint_f64(&self) -> f64 {
        (self.lo_f64() + self.hi_f64()) / 2.0
    }

    /// Rational endpoints.
    pub fn bounds(&self) -> (BigRational, BigRational) {
        let d = BigInt::one() << self.scale;
        (
            BigRational::new(self.lo.clone(), d.clone()),
            BigRational::new(self.hi.clone(), d),
        )
    }

    pub fn width(&self) -> BigRational {
        BigRational::new(&self.hi - &self.lo, BigInt::one() << self.scale)
    }

    fn scaled(&self, c: &BigInt) -> Interval {
        let (a, b) = (&self.lo * c, &self.hi * c);
        if c.is_negative() {
            Interval { lo: b, hi: a, scale: self.scale }
        } else {
            Interval { lo: a, hi: b, scale: self.scale }
        }
    }

    fn add(&mut self, other: &Interval) {
        debug_assert_eq!(self.scale, other.scale);
        self.lo += &other.lo;
        self.hi += &other.hi;
    }
}

fn scaled_to_f64(v: &BigInt, scale: u32) -> f64 {
    let bits = v.bits() as i64;
    let shift = (bits - 60).max(0);
    let top = (v >> shift as usize).to_f64().unwrap_or(0.0);
    top * 2f64.powi((shift - scale as i64) as i32)
}

/// Enclosure of `ln(value)`, with sentinels for Zero and Infinity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LogEnclosure {
    /// ln 0
    NegInfinity,
    /// ln inf
    PosInfinity,
    Finite(Interval),
}

/// Rigorous enclosure of `ln(value(a))` of width at most
/// `2^(1 - precision) * max(1, |midpoint|)`.
pub fn log_value(a: &PrimeBag, precision: u32) -> Result<LogEnclosure> {
    match a.special() {
        Special::Zero => return Ok(LogEnclosure::NegInfinity),
        Special::Infinity => return Ok(LogEnclosure::PosInfinity),
        Special::Finite => {}
    }
    if !a.is_positive_real() {
        return Err(Error::Domain(format!("logarithm needs a positive real value, got {a}")));
    }
    let l = a
        .entries()
        .iter()
        .fold(BigInt::one(), |acc, (_, m)| acc.lcm(m.value().denom()));
    let coeffs: Vec<(PrimeIndex, BigInt)> = a
        .entries()
        .iter()
        .map(|(k, m)| (*k, (m.value() * BigRational::from_integer(l.clone())).to_integer()))
        .collect();
    let target = BigRational::new(BigInt::one(), BigInt::one() << precision.saturating_sub(1));
    let mut bits = precision + 4 + l.bits() as u32;
    loop {
        let sum = weighted_log_sum(&coeffs, bits);
        let iv = Interval {
            lo: sum.lo.div_floor(&l),
            hi: sum.hi.div_ceil(&l),
            scale: sum.scale,
        };
        if iv.width() <= target {
            return Ok(LogEnclosure::Finite(iv));
        }
        bits += 16;
    }
}

/// Enclosure of `sum c_k ln p_k` with working precision at least `bits`.
fn weighted_log_sum(coeffs: &[(PrimeIndex, BigInt)], bits: u32) -> Interval {
    let total: BigInt = coeffs.iter().map(|(_, c)| c.abs()).sum();
    let guard = total.bits() as u32 + (coeffs.len().max(1) as u64).ilog2() + 10;
    let scale = bits + guard;
    let mut acc = Interval {
        lo: BigInt::zero(),
        hi: BigInt::zero(),
        scale,
    };
    for (k, c) in coeffs {
        let p = primes::nth_prime(*k).expect("index of a cached prime");
        acc.add(&ln_prime(p, scale).scaled(c));
    }
    acc
}

fn ln_cache() -> &'static Mutex<HashMap<(u64, u32), Interval>> {
    static CACHE: OnceLock<Mutex<HashMap<(u64, u32), Interval>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// Enclosure of `ln p` at the given scale.
fn ln_prime(p: u64, scale: u32) -> Interval {
    if let Some(iv) = ln_cache().lock().unwrap().get(&(p, scale)) {
        return iv.clone();
    }
    let iv = ln_natural(p, scale);
    let mut cache = ln_cache().lock().unwrap();
    if cache.len() > 1 << 16 {
        cache.clear();
    }
    cache.insert((p, scale), iv.clone());
    iv
}

/// `ln n = e ln 2 + 2 atanh((n - 2^e) / (n + 2^e))` with `2^e <= n < 2^(e+1)`.
fn ln_natural(n: u64, scale: u32) -> Interval {
    let ln2 = atanh_scaled(&BigInt::one(), &BigInt::from(3), scale).scaled(&BigInt::from(2));
    let e = 63 - n.leading_zeros() as u64;
    let mut out = ln2.scaled(&BigInt::from(e));
    let pow = 1u64 << e;
    if n != pow {
        let m = atanh_scaled(&BigInt::from(n - pow), &BigInt::from(n + pow), scale).scaled(&BigInt::from(2));
        out.add(&m);
    }
    out
}

/// Enclosure of `atanh(num/den) * 2^scale` for `0 < num/den <= 1/3`.
///
/// Every truncation rounds down, so the computed sum is a lower bound; the
/// error per term is below 2.2 units and the tail after the first vanishing
/// term below 1.3 units.
fn atanh_scaled(num: &BigInt, den: &BigInt, scale: u32) -> Interval {
    let z2n = num * num;
    let z2d = den * den;
    let mut t = (num << scale as usize) / den;
    let mut sum = BigInt::zero();
    let mut terms = 0u64;
    let mut j = 0u64;
    while !t.is_zero() {
        sum += &t / BigInt::from(2 * j + 1);
        t = t * &z2n / &z2d;
        j += 1;
        terms += 1;
    }
    let err = BigInt::from(3 * terms + 2);
    Interval {
        hi: &sum + err,
        lo: sum,
        scale,
    }
}

/// Order on arbitrary finite real bags: negatives below Zero below positives.
pub fn compare_signed(a: &PrimeBag, b: &PrimeBag) -> Result<OrderResult> {
    fn rank(x: &PrimeBag) -> Result<i8> {
        if x.unit() == Unit::Imaginary {
            return Err(Error::Domain(format!("{x} is imaginary; imaginary numbers are not ordered")));
        }
        Ok(match (x.special(), x.sign()) {
            (Special::Zero, _) => 0,
            (Special::Infinity, _) => 2,
            (Special::Finite, Sign::Minus) => -1,
            (Special::Finite, Sign::Plus) => 1,
        })
    }
    let (ra, rb) = (rank(a)?, rank(b)?);
    if ra != rb {
        return Ok(ra.cmp(&rb).into());
    }
    match ra {
        1 => exact_compare(a, b),
        -1 => exact_compare(&a.negate(), &b.negate()).map(OrderResult::reverse),
        0 => Ok(OrderResult::Equal),
        _ => Err(Error::UndefinedForm("inf compared with inf".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::validate;

    fn pb(s: &str) -> PrimeBag {
        validate(s).unwrap()
    }

    // 50-digit references
    const LN2: &str = "0.69314718055994530941723212145817656807550013436025";
    const LN3: &str = "1.09861228866810969139524523692252570464749055782274";

    fn decimal(s: &str) -> BigRational {
        let (int, frac) = s.split_once('.').unwrap();
        let digits: BigInt = format!("{int}{frac}").parse().unwrap();
        BigRational::new(digits, BigInt::from(10).pow(frac.len() as u32))
    }

    fn enclosure(s: &str, precision: u32) -> Interval {
        match log_value(&pb(s), precision).unwrap() {
            LogEnclosure::Finite(iv) => iv,
            other => panic!("{other:?}"),
        }
    }

    fn assert_encloses(iv: &Interval, x: &BigRational, precision: u32) {
        let (lo, hi) = iv.bounds();
        assert!(lo <= *x && *x <= hi);
        let mid = (&lo + &hi) / BigRational::from_integer(2.into());
        let bound = BigRational::new(BigInt::one(), BigInt::one() << (precision - 1))
            * mid.abs().max(BigRational::one());
        assert!(iv.width() <= bound);
    }

    #[test]
    fn log_examples() {
        let zero = enclosure("{}", 64);
        assert_encloses(&zero, &BigRational::zero(), 64);
        for prec in [20, 64, 150] {
            assert_encloses(&enclosure("{1}", prec), &decimal(LN2), prec);
            assert_encloses(&enclosure("{2,1}", prec), &(decimal(LN2) + decimal(LN3)), prec);
            assert_encloses(&enclosure("{1:1/2}", prec), &(decimal(LN2) / BigRational::from_integer(2.into())), prec);
            assert_encloses(&enclosure("{-2}", prec), &-decimal(LN3), prec);
        }
        assert_eq!(log_value(&pb("0"), 64).unwrap(), LogEnclosure::NegInfinity);
        assert_eq!(log_value(&pb("inf"), 64).unwrap(), LogEnclosure::PosInfinity);
        assert!(log_value(&pb("-{1}"), 64).is_err());
    }

    #[test]
    fn ln_matches_f64_for_many_primes() {
        for k in 1..300 {
            let p = primes::nth_prime(PrimeIndex::new(k).unwrap()).unwrap();
            let iv = ln_prime(p, 80);
            let x = (p as f64).ln();
            assert!((iv.midpoint_f64() - x).abs() < 1e-12, "{p}");
        }
    }

    #[test]
    fn exact_examples() {
        use OrderResult::*;
        assert_eq!(exact_compare(&pb("{2,2}"), &pb("{3,1}")).unwrap(), Less);
        assert_eq!(exact_compare(&pb("{3,2}"), &pb("{4,1}")).unwrap(), Greater);
        assert_eq!(exact_compare(&pb("{1:1/2}"), &pb("{}")).unwrap(), Greater);
        assert_eq!(exact_compare(&pb("{2,1}"), &pb("{2,1}")).unwrap(), Equal);
        assert_eq!(exact_compare(&pb("{-1}"), &pb("{-2}")).unwrap(), Greater);
        assert!(exact_compare(&pb("i{1}"), &pb("{1}")).is_err());
        assert!(exact_compare(&pb("-{1}"), &pb("{1}")).is_err());
    }

    #[test]
    fn exact_fallback_agrees() {
        // 2^1000 * 3 vs 2^1001: a tiny ladder forces the integer fallback.
        let config = CompareConfig { start_bits: 8, max_bits: 8 };
        let a = pb("{1:1000,2:1}");
        let b = pb("{1:1001}");
        assert_eq!(exact_compare_with(&a, &b, &config).unwrap(), OrderResult::Greater);
        // 3^12 = 531441 vs 2^19 = 524288
        let a = pb("{2:12}");
        let b = pb("{1:19}");
        assert_eq!(exact_compare_with(&a, &b, &config).unwrap(), OrderResult::Greater);
        assert_eq!(exact_compare(&a, &b).unwrap(), OrderResult::Greater);
    }

    #[test]
    fn partial_examples() {
        use OrderResult::*;
        assert_eq!(partial_compare(&pb("{1}"), &pb("{2,1}")).unwrap(), Less);
        assert_eq!(partial_compare(&pb("{2,1,1}"), &pb("{3,1}")).unwrap(), Greater);
        assert_eq!(partial_compare(&pb("{3,1}"), &pb("{2,1,1}")).unwrap(), Less);
        assert_eq!(partial_compare(&pb("{2,2}"), &pb("{3,1}")).unwrap(), Incomparable);
        assert_eq!(partial_compare(&pb("{3,1}"), &pb("{3,1}")).unwrap(), Equal);
        assert!(partial_compare(&pb("{-1}"), &pb("{1}")).is_err());
    }

    #[test]
    fn increment_member_is_rule_two() {
        assert_eq!(increment_member(&pb("{2,1}"), PrimeIndex::new(1).unwrap()).unwrap(), pb("{2,2}"));
        assert_eq!(increment_member(&pb("{2,1}"), PrimeIndex::new(2).unwrap()).unwrap(), pb("{3,1}"));
        assert!(increment_member(&pb("{2,1}"), PrimeIndex::new(3).unwrap()).is_err());
    }

    #[test]
    fn signed_comparison() {
        use OrderResult::*;
        assert_eq!(compare_signed(&pb("-{1}"), &pb("{1}")).unwrap(), Less);
        assert_eq!(compare_signed(&pb("-{1}"), &pb("-{2}")).unwrap(), Greater);
        assert_eq!(compare_signed(&pb("0"), &pb("-{}")).unwrap(), Greater);
        assert_eq!(compare_signed(&pb("0"), &pb("{-5}")).unwrap(), Less);
        assert_eq!(compare_signed(&pb("inf"), &pb("{9}")).unwrap(), Greater);
        assert!(compare_signed(&pb("i{}"), &pb("{}")).is_err());
    }
}
