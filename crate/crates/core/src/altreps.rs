//! Two non-unique bag representations of the naturals.
//!
//! A [`DecBag`] is a bag of powers of ten: `{1,0,0}` is 10 + 1 + 1 = 12, and
//! `{1}` and ten copies of `{0}` both denote 10. Addition is bag union.
//! A [`MulBag`] is a bag of integer factors: `{4,2}` and `{2,2,2}` both
//! denote 8. Multiplication is bag union; factoring every member turns it
//! into the unique prime bag.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::pbnum::PrimeBag;
use crate::primes;
use crate::work::Work;

const MAX_REPEAT: u64 = 16;

/// Bag of decimal exponents; the value is `sum 10^e` over members.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct DecBag {
    counts: BTreeMap<u64, BigUint>,
}

impl DecBag {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_members(members: &[u64]) -> Self {
        let mut bag = DecBag::new();
        for &e in members {
            bag.insert(e, BigUint::one());
        }
        bag
    }

    /// The normal-form bag of `n`: one member per unit of each decimal digit.
    pub fn from_natural(n: &BigUint) -> Self {
        let mut bag = DecBag::new();
        for (e, d) in n.to_str_radix(10).bytes().rev().enumerate() {
            if d != b'0' {
                bag.insert(e as u64, BigUint::from(d - b'0'));
            }
        }
        bag
    }

    pub fn insert(&mut self, exponent: u64, count: BigUint) {
        if !count.is_zero() {
            *self.counts.entry(exponent).or_default() += count;
        }
    }

    pub fn count(&self, exponent: u64) -> BigUint {
        self.counts.get(&exponent).cloned().unwrap_or_default()
    }

    /// Total number of members.
    pub fn len(&self) -> BigUint {
        self.counts.values().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// (exponent, multiplicity) pairs by ascending exponent.
    pub fn counts(&self) -> impl Iterator<Item = (u64, &BigUint)> {
        self.counts.iter().map(|(e, c)| (*e, c))
    }

    pub fn is_normal(&self) -> bool {
        let nine = BigUint::from(9u32);
        self.counts.values().all(|c| *c <= nine)
    }

    fn take(&mut self, exponent: u64, count: &BigUint) -> bool {
        match self.counts.get_mut(&exponent) {
            Some(c) if &*c >= count => {
                *c -= count;
                if c.is_zero() {
                    self.counts.remove(&exponent);
                }
                true
            }
            _ => false,
        }
    }

    /// Break one member `10^f` (smallest `f > exponent`) down until a
    /// `10^exponent` member is available.
    fn borrow_for(&mut self, exponent: u64) -> bool {
        let Some((&f, _)) = self.counts.range(exponent + 1..).next() else {
            return false;
        };
        self.take(f, &BigUint::one());
        for e in exponent..f {
            let n = if e == exponent { 10u32 } else { 9u32 };
            self.insert(e, BigUint::from(n));
        }
        true
    }
}

impl fmt::Display for DecBag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_members(f, self.counts.iter().rev().map(|(e, c)| (e.to_string(), c)))
    }
}

fn write_members<'a>(
    f: &mut fmt::Formatter<'_>,
    members: impl Iterator<Item = (String, &'a BigUint)>,
) -> fmt::Result {
    f.write_str("{")?;
    let mut first = true;
    for (label, count) in members {
        let n = count.to_u64().filter(|&n| n <= MAX_REPEAT);
        let reps = n.unwrap_or(1);
        for _ in 0..reps {
            if !first {
                f.write_str(",")?;
            }
            first = false;
            match n {
                Some(_) => f.write_str(&label)?,
                None => write!(f, "{label}:{count}")?,
            }
        }
    }
    f.write_str("}")
}

pub fn decbag_value(a: &DecBag) -> BigUint {
    let ten = BigUint::from(10u32);
    a.counts
        .iter()
        .map(|(e, c)| c * ten.pow(*e as u32))
        .sum()
}

/// Addition is bag union.
pub fn decbag_add(a: &DecBag, b: &DecBag) -> DecBag {
    decbag_add_counted(a, b, &mut Work::new())
}

pub fn decbag_add_counted(a: &DecBag, b: &DecBag, work: &mut Work) -> DecBag {
    let mut out = a.clone();
    for (e, c) in &b.counts {
        work.tick();
        out.insert(*e, c.clone());
    }
    work.add(a.counts.len() as u64);
    out
}

/// Subtraction is bag difference after borrowing from higher exponents.
pub fn decbag_sub(a: &DecBag, b: &DecBag) -> Result<DecBag> {
    if decbag_value(a) < decbag_value(b) {
        return Err(Error::Underflow(format!(
            "{a} = {} is smaller than {b} = {}",
            decbag_value(a),
            decbag_value(b)
        )));
    }
    let mut out = a.clone();
    for (e, c) in &b.counts {
        let mut normalized = false;
        while out.count(*e) < *c {
            if out.borrow_for(*e) {
                continue;
            }
            // Nothing above to borrow from: the value sits in lower exponents.
            if normalized {
                unreachable!("value check guarantees a borrow source");
            }
            out = decbag_normalize(&out);
            normalized = true;
        }
        out.take(*e, c);
    }
    Ok(out)
}

/// Multiplication distributes: every pair of members contributes `e1 + e2`.
pub fn decbag_mul(a: &DecBag, b: &DecBag) -> DecBag {
    decbag_mul_counted(a, b, &mut Work::new())
}

pub fn decbag_mul_counted(a: &DecBag, b: &DecBag, work: &mut Work) -> DecBag {
    let mut out = DecBag::new();
    for (e1, c1) in &a.counts {
        for (e2, c2) in &b.counts {
            work.tick();
            out.insert(e1 + e2, c1 * c2);
        }
    }
    out
}

/// Carry every ten copies of `10^e` into one `10^(e+1)`.
pub fn decbag_normalize(a: &DecBag) -> DecBag {
    let ten = BigUint::from(10u32);
    let mut out = DecBag::new();
    let mut carry = BigUint::zero();
    let mut e = match a.counts.keys().next() {
        Some(&e) => e,
        None => return out,
    };
    let top = *a.counts.keys().next_back().unwrap();
    while e <= top || !carry.is_zero() {
        let total = a.count(e) + &carry;
        let digit = &total % &ten;
        carry = total / &ten;
        out.insert(e, digit);
        e += 1;
    }
    out
}

/// Default bound on [`MulBag`] members, keeping member factoring trivial.
pub const DEFAULT_MULBAG_MEMBER_CAP: u64 = 1 << 20;

/// Bag of integer factors `>= 2`; the value is their product.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct MulBag {
    /// Descending.
    members: Vec<u64>,
}

impl MulBag {
    pub fn new(members: Vec<u64>) -> Result<Self> {
        Self::with_cap(members, DEFAULT_MULBAG_MEMBER_CAP)
    }

    pub fn with_cap(mut members: Vec<u64>, cap: u64) -> Result<Self> {
        if let Some(&bad) = members.iter().find(|&&m| m < 2) {
            return Err(Error::Domain(format!("multiplicative bag members must be >= 2, got {bad}")));
        }
        if let Some(&big) = members.iter().find(|&&m| m > cap) {
            return Err(Error::Resource(format!("member {big} exceeds the member cap {cap}")));
        }
        members.sort_unstable_by(|a, b| b.cmp(a));
        Ok(MulBag { members })
    }

    pub fn members(&self) -> &[u64] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

impl fmt::Display for MulBag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let text: Vec<String> = self.members.iter().map(u64::to_string).collect();
        write!(f, "{{{}}}", text.join(","))
    }
}

pub fn mulbag_value(a: &MulBag) -> BigUint {
    a.members.iter().map(|&m| BigUint::from(m)).product()
}

/// Multiplication is bag union.
pub fn mulbag_mul(a: &MulBag, b: &MulBag) -> MulBag {
    mulbag_mul_counted(a, b, &mut Work::new())
}

pub fn mulbag_mul_counted(a: &MulBag, b: &MulBag, work: &mut Work) -> MulBag {
    let mut members = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        work.tick();
        let take_a = j >= b.len() || (i < a.len() && a.members[i] >= b.members[j]);
        if take_a {
            members.push(a.members[i]);
            i += 1;
        } else {
            members.push(b.members[j]);
            j += 1;
        }
    }
    MulBag { members }
}

/// Factor every member by trial division and collect the prime indices.
pub fn mulbag_to_pb(a: &MulBag) -> Result<PrimeBag> {
    let table = primes::table();
    let mut entries = Vec::new();
    for &m in &a.members {
        let mut rest = m;
        let mut primes_found = Vec::new();
        table.with_primes(|ps| {
            for &p in ps {
                let p = p as u64;
                if p * p > rest {
                    break;
                }
                while rest % p == 0 {
                    primes_found.push(p);
                    rest /= p;
                }
            }
        });
        if rest > 1 {
            primes_found.push(rest);
        }
        for p in primes_found {
            entries.push((table.prime_index(p)?, BigRational::one()));
        }
    }
    Ok(PrimeBag::from_entries(entries))
}

/// Parse `{e, e, e:count, ...}` into a [`DecBag`].
pub fn parse_decbag(text: &str) -> Result<DecBag> {
    let mut bag = DecBag::new();
    for (member, count) in parse_members(text)? {
        bag.insert(member, count);
    }
    Ok(bag)
}

/// Parse `{m, m, m:count, ...}` into a [`MulBag`].
pub fn parse_mulbag(text: &str) -> Result<MulBag> {
    let mut members = Vec::new();
    for (member, count) in parse_members(text)? {
        let n = count
            .to_usize()
            .filter(|&n| n <= 1 << 24)
            .ok_or_else(|| Error::Resource(format!("repeat count {count} too large")))?;
        members.extend(std::iter::repeat_n(member, n));
    }
    MulBag::new(members)
}

fn parse_members(text: &str) -> Result<Vec<(u64, BigUint)>> {
    let t = text.trim();
    let inner = t
        .strip_prefix('{')
        .and_then(|s| s.strip_suffix('}'))
        .ok_or_else(|| Error::parse(0, format!("expected a braced bag, got {text:?}")))?;
    if inner.trim().is_empty() {
        return Ok(Vec::new());
    }
    inner
        .split(',')
        .map(|item| {
            let item = item.trim();
            let (m, c) = match item.split_once(':') {
                Some((m, c)) => (m.trim(), c.trim()),
                None => (item, "1"),
            };
            let member = m
                .parse::<u64>()
                .map_err(|_| Error::parse(0, format!("bad member {m:?}")))?;
            let count = c
                .parse::<BigUint>()
                .map_err(|_| Error::parse(0, format!("bad count {c:?}")))?;
            Ok((member, count))
        })
        .collect()
}
