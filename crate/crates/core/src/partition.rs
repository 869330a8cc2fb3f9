//! Natural prime bags of weight `n` are exactly the partitions of `n`.
//!
//! The weight of a bag is the sum of its member indices, which is also the
//! number of interior brace pairs of its nested-bracket form. Reading the
//! member indices as parts gives a bijection with integer partitions, so
//! there are `P(n)` bags of weight `n`, exactly one of which (`{n}`) is prime.

use std::f64::consts::PI;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::pbnum::PrimeBag;
use crate::primes::PrimeIndex;

/// Default largest weight [`enumerate_weight`] will expand (P(60) = 966467).
pub const DEFAULT_ENUMERATION_CEILING: u64 = 60;

/// A partition with parts in non-increasing order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Partition {
    parts: Vec<u64>,
}

impl Partition {
    pub fn new(mut parts: Vec<u64>) -> Result<Self> {
        if parts.contains(&0) {
            return Err(Error::Domain("partition parts must be positive".into()));
        }
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Ok(Partition { parts })
    }

    pub fn parts(&self) -> &[u64] {
        &self.parts
    }

    pub fn sum(&self) -> u64 {
        self.parts.iter().sum()
    }

    /// Part `k` becomes a member of prime index `k`.
    pub fn to_prime_bag(&self) -> PrimeBag {
        PrimeBag::from_entries(
            self.parts
                .iter()
                .map(|&k| (PrimeIndex::new_unchecked(k), BigRational::one())),
        )
    }

    pub fn from_prime_bag(a: &PrimeBag) -> Result<Self> {
        a.require_natural("partition")?;
        let mut parts = Vec::new();
        for (k, m) in a.entries() {
            let count = m
                .value()
                .numer()
                .to_u64()
                .ok_or_else(|| Error::Resource(format!("multiplicity {m} too large to list")))?;
            parts.extend(std::iter::repeat_n(k.get(), count as usize));
        }
        Ok(Partition { parts })
    }
}

impl std::fmt::Display for Partition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.parts.is_empty() {
            return f.write_str("0");
        }
        let text: Vec<String> = self.parts.iter().map(u64::to_string).collect();
        f.write_str(&text.join("+"))
    }
}

/// Sum of member indices weighted by multiplicity.
pub fn weight(a: &PrimeBag) -> Result<BigUint> {
    a.require_natural("weight")?;
    Ok(a
        .entries()
        .iter()
        .map(|(k, m)| BigUint::from(k.get()) * m.value().numer().magnitude())
        .sum())
}

/// Partitions of `n` in reverse-lexicographic order, largest part first.
pub struct Partitions {
    current: Option<Vec<u64>>,
}

impl Partitions {
    pub fn new(n: u64) -> Self {
        Partitions {
            current: Some(if n == 0 { Vec::new() } else { vec![n] }),
        }
    }
}

impl Iterator for Partitions {
    type Item = Partition;

    fn next(&mut self) -> Option<Partition> {
        let parts = self.current.take()?;
        // Successor: decrement the rightmost part above 1 and refill the
        // remainder greedily with parts no larger than it.
        let mut next = parts.clone();
        let mut ones = 0;
        while next.last() == Some(&1) {
            next.pop();
            ones += 1;
        }
        if let Some(last) = next.pop() {
            let bound = last - 1;
            let mut rest = ones + 1 + bound;
            while rest > 0 {
                let part = bound.min(rest);
                next.push(part);
                rest -= part;
            }
            self.current = Some(next);
        }
        Some(Partition { parts })
    }
}

/// All natural bags of weight `n`, in reverse-lexicographic partition order.
pub fn enumerate_weight(n: u64) -> Result<Vec<PrimeBag>> {
    enumerate_weight_with(n, DEFAULT_ENUMERATION_CEILING)
}

pub fn enumerate_weight_with(n: u64, ceiling: u64) -> Result<Vec<PrimeBag>> {
    check_ceiling(n, ceiling)?;
    Ok(Partitions::new(n).map(|p| p.to_prime_bag()).collect())
}

fn check_ceiling(n: u64, ceiling: u64) -> Result<()> {
    if n > ceiling {
        Err(Error::Resource(format!(
            "weight {n} exceeds the enumeration ceiling {ceiling}"
        )))
    } else {
        Ok(())
    }
}

/// P(n) by the parts-bounded dynamic program.
pub fn partition_count(n: u64) -> BigUint {
    let n = n as usize;
    let mut ways = vec![BigUint::zero(); n + 1];
    ways[0] = BigUint::one();
    for part in 1..=n {
        for total in part..=n {
            let add = ways[total - part].clone();
            ways[total] += add;
        }
    }
    ways.swap_remove(n)
}

/// Hardy-Ramanujan approximation `exp(pi sqrt(2n/3)) / (4 n sqrt 3)`.
pub fn hr_estimate(n: u64) -> f64 {
    hr_log_estimate(n).exp()
}

fn hr_log_estimate(n: u64) -> f64 {
    let n = n as f64;
    PI * (2.0 * n / 3.0).sqrt() - (4.0 * n * 3f64.sqrt()).ln()
}

/// `hr_estimate(n) / P(n)`, computed in log space.
pub fn hr_ratio(n: u64) -> f64 {
    let p = partition_count(n);
    (hr_log_estimate(n) - ln_biguint(&p)).exp()
}

fn ln_biguint(x: &BigUint) -> f64 {
    let bits = x.bits();
    let shift = bits.saturating_sub(64);
    let top = (x >> shift).to_f64().unwrap();
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// How an element of the well-ordered stream was produced from its weight
/// predecessor.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Derivation {
    /// The empty bag.
    Base,
    /// Added a member `{}`, i.e. doubled `from`.
    Rule1 { from: PrimeBag },
    /// Wrapped one member of index `member - 1` of `from` into index `member`.
    Rule2 { from: PrimeBag, member: PrimeIndex },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrderedEntry {
    pub weight: u64,
    pub bag: PrimeBag,
    pub derivation: Derivation,
}

/// Every natural bag of weight `<= max_weight`, grouped by weight and, within
/// a group, in [`enumerate_weight`] order.
pub fn generate_ordered(max_weight: u64) -> Result<impl Iterator<Item = OrderedEntry>> {
    check_ceiling(max_weight, DEFAULT_ENUMERATION_CEILING)?;
    Ok((0..=max_weight).flat_map(|w| {
        Partitions::new(w).map(move |p| {
            let derivation = derive(&p);
            OrderedEntry {
                weight: w,
                bag: p.to_prime_bag(),
                derivation,
            }
        })
    }))
}

fn derive(p: &Partition) -> Derivation {
    let parts = p.parts();
    match parts.last() {
        None => Derivation::Base,
        Some(1) => Derivation::Rule1 {
            from: Partition {
                parts: parts[..parts.len() - 1].to_vec(),
            }
            .to_prime_bag(),
        },
        Some(&smallest) => {
            let mut from = parts.to_vec();
            *from.last_mut().unwrap() = smallest - 1;
            Derivation::Rule2 {
                from: Partition { parts: from }.to_prime_bag(),
                member: PrimeIndex::new_unchecked(smallest),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pbnum::{mul, validate};

    /// Euler's pentagonal-number recurrence, independent of the DP.
    fn pentagonal(n: usize) -> Vec<BigUint> {
        let mut p = vec![BigUint::zero(); n + 1];
        p[0] = BigUint::one();
        for m in 1..=n {
            let mut plus = BigUint::zero();
            let mut minus = BigUint::zero();
            for k in 1.. {
                let g1 = k * (3 * k - 1) / 2;
                if g1 > m {
                    break;
                }
                let g2 = k * (3 * k + 1) / 2;
                let sign_plus = k % 2 == 1;
                for g in [g1, g2] {
                    if g <= m {
                        if sign_plus {
                            plus += &p[m - g];
                        } else {
                            minus += &p[m - g];
                        }
                    }
                }
            }
            p[m] = plus - minus;
        }
        p
    }

    fn pb(s: &str) -> PrimeBag {
        validate(s).unwrap()
    }

    #[test]
    fn weight_examples() {
        assert_eq!(weight(&pb("{}")).unwrap(), 0u32.into());
        assert_eq!(weight(&pb("{2,1}")).unwrap(), 3u32.into());
        assert_eq!(weight(&pb("{1,1,1}")).unwrap(), 3u32.into());
        assert_eq!(crate::BracketTree::parse("{{{}},{}}").unwrap().weight(), 3);
        assert!(weight(&pb("{-1}")).is_err());
    }

    #[test]
    fn enumeration_examples() {
        let show = |n| -> Vec<String> { enumerate_weight(n).unwrap().iter().map(|b| b.to_string()).collect() };
        assert_eq!(show(4), ["{4}", "{3,1}", "{2,2}", "{2,1,1}", "{1,1,1,1}"]);
        assert_eq!(show(0), ["{}"]);
        assert_eq!(show(2), ["{2}", "{1,1}"]);
        assert!(matches!(enumerate_weight(61), Err(Error::Resource(_))));
        let text: Vec<String> = Partitions::new(4).map(|p| p.to_string()).collect();
        assert_eq!(text, ["4", "3+1", "2+2", "2+1+1", "1+1+1+1"]);
    }

    #[test]
    fn counts_match_pentagonal_recurrence() {
        let oracle = pentagonal(500);
        assert_eq!(oracle[100], BigUint::from(190_569_292u64));
        for n in [0usize, 1, 2, 10, 50, 100, 250, 500] {
            assert_eq!(partition_count(n as u64), oracle[n], "{n}");
        }
        let first: Vec<u64> = (1..=10).map(|n| partition_count(n).to_u64().unwrap()).collect();
        assert_eq!(first, [1, 2, 3, 5, 7, 11, 15, 22, 30, 42]);
        assert_eq!(partition_count(4), 5u32.into());
        // P(n) exceeds u64 near n = 400
        assert!(partition_count(420).bits() > 64);
    }

    #[test]
    fn hardy_ramanujan_values() {
        assert!((hr_estimate(1) - 1.8772).abs() < 1e-3);
        let est100 = hr_estimate(100);
        assert!((est100 / 1.9931e8 - 1.0).abs() < 1e-3, "{est100}");
        // The asymptotic overestimates: P(500) = 2300165032574323995027.
        let r500 = hr_ratio(500);
        assert!((r500 - 1.020095).abs() < 1e-5, "{r500}");
        assert!((r500 - 1.0).abs() < 0.12);
        assert!((1.0 - hr_ratio(500)).abs() < (1.0 - hr_ratio(50)).abs());
    }

    #[test]
    fn ordered_stream_start() {
        let got: Vec<(String, u64)> = generate_ordered(2).unwrap().map(|e| (e.bag.to_string(), e.weight)).collect();
        let want = [("{}", 0), ("{1}", 1), ("{2}", 2), ("{1,1}", 2)];
        assert_eq!(got.len(), want.len());
        for ((b, w), (eb, ew)) in got.iter().zip(want) {
            assert_eq!((b.as_str(), *w), (eb, ew));
        }
    }

    #[test]
    fn derivations_are_rule_applications() {
        for e in generate_ordered(14).unwrap() {
            match &e.derivation {
                Derivation::Base => assert_eq!(e.weight, 0),
                Derivation::Rule1 { from } => {
                    assert_eq!(weight(from).unwrap(), BigUint::from(e.weight - 1));
                    assert_eq!(mul(from, &pb("{1}")).unwrap(), e.bag);
                }
                Derivation::Rule2 { from, member } => {
                    assert_eq!(weight(from).unwrap(), BigUint::from(e.weight - 1));
                    let prev = PrimeIndex::new(member.get() - 1).unwrap();
                    assert_eq!(crate::order::increment_member(from, prev).unwrap(), e.bag);
                }
            }
        }
    }

    #[test]
    fn groups_biject_with_partitions() {
        for n in 0..=20u64 {
            let bags = enumerate_weight(n).unwrap();
            assert_eq!(BigUint::from(bags.len()), partition_count(n));
            let mut seen = std::collections::HashSet::new();
            let mut primes = 0;
            for b in &bags {
                let p = Partition::from_prime_bag(b).unwrap();
                assert_eq!(p.sum(), n);
                assert_eq!(&p.to_prime_bag(), b);
                assert!(seen.insert(p));
                if crate::is_prime_pb(b).unwrap() {
                    primes += 1;
                }
            }
            assert_eq!(primes, usize::from(n > 0));
        }
    }
}
