//! The prime-bag number type.
//!
//! A [`PrimeBag`] stores a number as a finite map from prime index to a
//! nonzero exact rational multiplicity, plus a bag-level sign, an optional
//! imaginary unit, and the two specials Zero and Infinity. Multiplication,
//! division, gcd, lcm and exponentiation are multiplicity-wise merges and
//! never touch the primes themselves.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign as BigSign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::primes::PrimeIndex;
use crate::work::Work;

/// Integer multiplicities up to this magnitude print as repeated members.
const MAX_REPEAT: u64 = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Special {
    Finite,
    Zero,
    Infinity,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    fn flip(self) -> Self {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    fn times(self, other: Sign) -> Sign {
        if self == other {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Unit {
    Real,
    Imaginary,
}

/// Exact nonzero rational multiplicity of a prime index.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Multiplicity(BigRational);

impl Multiplicity {
    pub fn new(q: BigRational) -> Option<Self> {
        if q.is_zero() {
            None
        } else {
            Some(Multiplicity(q))
        }
    }

    pub fn from_integer(n: i64) -> Option<Self> {
        Self::new(BigRational::from_integer(n.into()))
    }

    pub fn one() -> Self {
        Multiplicity(BigRational::one())
    }

    pub fn value(&self) -> &BigRational {
        &self.0
    }

    pub fn into_value(self) -> BigRational {
        self.0
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_positive_integer(&self) -> bool {
        self.is_integer() && self.is_positive()
    }

    /// The multiplicity as an integer, if it is one.
    pub fn to_integer(&self) -> Option<BigInt> {
        self.is_integer().then(|| self.0.to_integer())
    }
}

impl fmt::Display for Multiplicity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

/// Which number system a bag belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NumberClass {
    /// Positive naturals: finite, positive, real, positive integer multiplicities.
    NaturalPB,
    /// Integer multiplicities of any sign, either bag sign, or Zero.
    RationalPB,
    /// Everything else: fractional multiplicities, imaginary unit, Infinity.
    ExtendedPB,
}

/// Operation domain gate, ordered from most to least restrictive.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NumberMode {
    Natural,
    Rational,
    Extended,
}

impl NumberMode {
    pub fn admits(self, class: NumberClass) -> bool {
        match self {
            NumberMode::Natural => class == NumberClass::NaturalPB,
            NumberMode::Rational => class <= NumberClass::RationalPB,
            NumberMode::Extended => true,
        }
    }

    /// Fail with a mode error unless `bag` lies in this mode's domain.
    pub fn check(self, bag: &PrimeBag) -> Result<()> {
        let class = bag.classify();
        if self.admits(class) {
            Ok(())
        } else {
            Err(Error::Mode(format!(
                "{bag} is {class:?}, outside {self:?} mode"
            )))
        }
    }
}

impl FromStr for NumberMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "natural" => Ok(NumberMode::Natural),
            "rational" => Ok(NumberMode::Rational),
            "extended" => Ok(NumberMode::Extended),
            other => Err(Error::parse(0, format!("unknown mode {other:?}"))),
        }
    }
}

/// A number as sign x unit x product of primes raised to rational powers.
///
/// Entries are kept sorted by descending prime index with no zero
/// multiplicities, so structural equality is value equality.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PrimeBag {
    special: Special,
    sign: Sign,
    unit: Unit,
    entries: Vec<(PrimeIndex, Multiplicity)>,
}

impl Default for PrimeBag {
    fn default() -> Self {
        Self::one()
    }
}

impl PrimeBag {
    /// The empty bag, the number 1.
    pub fn one() -> Self {
        PrimeBag {
            special: Special::Finite,
            sign: Sign::Plus,
            unit: Unit::Real,
            entries: Vec::new(),
        }
    }

    pub fn zero() -> Self {
        PrimeBag {
            special: Special::Zero,
            ..Self::one()
        }
    }

    pub fn infinity() -> Self {
        PrimeBag {
            special: Special::Infinity,
            ..Self::one()
        }
    }

    /// The singleton bag holding the `k`-th prime once.
    pub fn prime(k: PrimeIndex) -> Self {
        PrimeBag {
            entries: vec![(k, Multiplicity::one())],
            ..Self::one()
        }
    }

    /// Build a positive real bag from (index, multiplicity) pairs; repeated
    /// indices accumulate and zero totals vanish.
    pub fn from_entries<I>(entries: I) -> Self
    where
        I: IntoIterator<Item = (PrimeIndex, BigRational)>,
    {
        let mut raw: Vec<(PrimeIndex, BigRational)> = entries.into_iter().collect();
        raw.sort_by_key(|e| std::cmp::Reverse(e.0));
        let mut out: Vec<(PrimeIndex, Multiplicity)> = Vec::with_capacity(raw.len());
        let mut iter = raw.into_iter().peekable();
        while let Some((k, mut q)) = iter.next() {
            while let Some((k2, _)) = iter.peek() {
                if *k2 != k {
                    break;
                }
                q += iter.next().unwrap().1;
            }
            if let Some(m) = Multiplicity::new(q) {
                out.push((k, m));
            }
        }
        PrimeBag {
            entries: out,
            ..Self::one()
        }
    }

    /// Natural-number bag from a list of member indices, e.g. `[2, 1, 1]` is 12.
    pub fn from_members(members: &[u64]) -> Result<Self> {
        let entries = members
            .iter()
            .map(|&k| Ok((PrimeIndex::new(k)?, BigRational::one())))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_entries(entries))
    }

    pub(crate) fn from_sorted_entries(entries: Vec<(PrimeIndex, Multiplicity)>) -> Self {
        debug_assert!(entries.windows(2).all(|w| w[0].0 > w[1].0));
        PrimeBag {
            entries,
            ..Self::one()
        }
    }

    pub fn special(&self) -> Special {
        self.special
    }

    pub fn sign(&self) -> Sign {
        self.sign
    }

    pub fn unit(&self) -> Unit {
        self.unit
    }

    pub fn is_finite(&self) -> bool {
        self.special == Special::Finite
    }

    pub fn is_zero(&self) -> bool {
        self.special == Special::Zero
    }

    pub fn is_infinity(&self) -> bool {
        self.special == Special::Infinity
    }

    /// Entries in descending index order.
    pub fn entries(&self) -> &[(PrimeIndex, Multiplicity)] {
        &self.entries
    }

    /// Number of distinct prime indices present.
    pub fn entry_count(&self) -> usize {
        self.entries.len()
    }

    pub fn with_sign(mut self, sign: Sign) -> Self {
        if self.is_finite() {
            self.sign = sign;
        }
        self
    }

    pub fn with_unit(mut self, unit: Unit) -> Self {
        if self.is_finite() {
            self.unit = unit;
        }
        self
    }

    /// Bag-level negation.
    pub fn negate(&self) -> Self {
        let sign = self.sign.flip();
        self.clone().with_sign(sign)
    }

    pub fn classify(&self) -> NumberClass {
        match self.special {
            Special::Zero => NumberClass::RationalPB,
            Special::Infinity => NumberClass::ExtendedPB,
            Special::Finite => {
                if self.unit == Unit::Imaginary || !self.entries.iter().all(|(_, m)| m.is_integer())
                {
                    NumberClass::ExtendedPB
                } else if self.sign == Sign::Plus
                    && self.entries.iter().all(|(_, m)| m.is_positive())
                {
                    NumberClass::NaturalPB
                } else {
                    NumberClass::RationalPB
                }
            }
        }
    }

    pub fn is_natural(&self) -> bool {
        self.classify() == NumberClass::NaturalPB
    }

    /// Finite, positive and real (multiplicities may be any rational).
    pub fn is_positive_real(&self) -> bool {
        self.is_finite() && self.sign == Sign::Plus && self.unit == Unit::Real
    }

    pub(crate) fn require_natural(&self, op: &str) -> Result<()> {
        if self.is_natural() {
            Ok(())
        } else {
            Err(Error::Mode(format!(
                "{op} is defined for natural prime bags only, got {self}"
            )))
        }
    }

    /// Multiplicity of prime index `k`; zero when absent.
    pub fn multiplicity_of(&self, k: PrimeIndex) -> BigRational {
        self.entries
            .binary_search_by(|(i, _)| k.cmp(i))
            .map(|pos| self.entries[pos].1.value().clone())
            .unwrap_or_else(|_| BigRational::zero())
    }

    /// Total member count: the sum of multiplicities for natural bags, the
    /// number of distinct entries otherwise. Specials count as zero.
    pub fn bag_member_count(&self) -> BigUint {
        if self.is_natural() {
            self.entries
                .iter()
                .map(|(_, m)| m.value().numer().magnitude().clone())
                .sum()
        } else if self.is_finite() {
            BigUint::from(self.entries.len())
        } else {
            BigUint::zero()
        }
    }

    /// Multiplicity map with every exponent negated: 1/x.
    pub fn reciprocal(&self) -> Self {
        match self.special {
            Special::Zero => Self::infinity(),
            Special::Infinity => Self::zero(),
            Special::Finite => PrimeBag {
                special: Special::Finite,
                // 1/i = -i
                sign: match self.unit {
                    Unit::Real => self.sign,
                    Unit::Imaginary => self.sign.flip(),
                },
                unit: self.unit,
                entries: self
                    .entries
                    .iter()
                    .map(|(k, m)| (*k, Multiplicity(-m.value().clone())))
                    .collect(),
            },
        }
    }

    /// Render as nested braces; only natural bags have a bracket form.
    pub fn to_bracket_string(&self) -> Result<String> {
        self.require_natural("bracket form")?;
        let mut out = String::from("{");
        let mut first = true;
        for (k, m) in &self.entries {
            let depth = k.get() as usize;
            let copies = m.value().numer().to_usize().unwrap_or(usize::MAX);
            for _ in 0..copies {
                if !first {
                    out.push(',');
                }
                first = false;
                out.extend(std::iter::repeat_n('{', depth));
                out.extend(std::iter::repeat_n('}', depth));
            }
        }
        out.push('}');
        Ok(out)
    }
}

// ---------------------------------------------------------------------------
// Formatting

impl fmt::Display for PrimeBag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.special {
            Special::Zero => return f.write_str("0"),
            Special::Infinity => return f.write_str("inf"),
            Special::Finite => {}
        }
        if self.sign == Sign::Minus {
            f.write_str("-")?;
        }
        if self.unit == Unit::Imaginary {
            f.write_str("i")?;
        }
        f.write_str("{")?;
        // Positive multiplicities by descending index, then negative ones by
        // ascending index, i.e. members sorted by signed value descending.
        let (pos, neg): (Vec<_>, Vec<_>) = self.entries.iter().partition(|(_, m)| m.is_positive());
        let mut first = true;
        let mut sep = |f: &mut fmt::Formatter<'_>| -> fmt::Result {
            if !first {
                f.write_str(",")?;
            }
            first = false;
            Ok(())
        };
        for (k, m) in pos.into_iter().chain(neg.into_iter().rev()) {
            let q = m.value();
            let repeat = q.is_integer()
                && q.numer().magnitude() <= &BigUint::from(MAX_REPEAT);
            if repeat {
                let count = q.numer().magnitude().to_u64().unwrap();
                let minus = if q.is_negative() { "-" } else { "" };
                for _ in 0..count {
                    sep(f)?;
                    write!(f, "{minus}{k}")?;
                }
            } else {
                sep(f)?;
                write!(f, "{k}:{m}")?;
            }
        }
        f.write_str("}")
    }
}

// ---------------------------------------------------------------------------
// Parsing

/// Nested-brace tree; in a valid bracket-form bag every member is a tower.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BracketTree {
    pub children: Vec<BracketTree>,
}

impl BracketTree {
    /// Parse one brace group (`{...}`) with comma-separated children.
    pub fn parse(text: &str) -> Result<Self> {
        let mut p = Parser::new(text);
        p.skip_ws();
        let tree = p.tree()?;
        p.skip_ws();
        p.expect_end()?;
        Ok(tree)
    }

    /// Depth of a pure tower (each node has at most one child), else `None`.
    pub fn tower_depth(&self) -> Option<u64> {
        let mut depth = 1;
        let mut node = self;
        loop {
            match node.children.as_slice() {
                [] => return Some(depth),
                [only] => {
                    depth += 1;
                    node = only;
                }
                _ => return None,
            }
        }
    }

    /// Interior brace pairs: every node except the root.
    pub fn weight(&self) -> u64 {
        self.children.iter().map(|c| 1 + c.weight()).sum()
    }

    /// Interpret this tree as a bag whose members are towers.
    pub fn to_prime_bag(&self) -> Result<PrimeBag> {
        let mut entries = Vec::with_capacity(self.children.len());
        for (i, member) in self.children.iter().enumerate() {
            let depth = member.tower_depth().ok_or_else(|| {
                Error::parse(
                    0,
                    format!(
                        "member {} is not a tower of braces (a bag member must be {{}}, {{{{}}}}, ...); \
                         write non-tower numbers in index form like {{2,1}}",
                        i + 1
                    ),
                )
            })?;
            entries.push((PrimeIndex::new_unchecked(depth), BigRational::one()));
        }
        Ok(PrimeBag::from_entries(entries))
    }
}

struct Parser<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        Parser {
            src,
            bytes: src.as_bytes(),
            pos: 0,
        }
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(|b| b.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    fn eat(&mut self, b: u8) -> bool {
        if self.peek() == Some(b) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, b: u8) -> Result<()> {
        if self.eat(b) {
            Ok(())
        } else {
            Err(self.error(format!("expected '{}'", b as char)))
        }
    }

    fn expect_end(&self) -> Result<()> {
        if self.pos == self.bytes.len() {
            Ok(())
        } else {
            Err(self.error("unexpected trailing input"))
        }
    }

    fn error(&self, message: impl Into<String>) -> Error {
        let found = match self.src[self.pos..].chars().next() {
            Some(c) => format!(" (found {c:?})"),
            None => " (found end of input)".into(),
        };
        Error::parse(self.pos, message.into() + &found)
    }

    fn digits(&mut self) -> Result<BigUint> {
        let start = self.pos;
        while self.peek().is_some_and(|b| b.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("expected digits"));
        }
        Ok(self.src[start..self.pos].parse().unwrap())
    }

    fn tree(&mut self) -> Result<BracketTree> {
        self.expect(b'{')?;
        let mut children = Vec::new();
        self.skip_ws();
        if self.eat(b'}') {
            return Ok(BracketTree { children });
        }
        loop {
            self.skip_ws();
            children.push(self.tree()?);
            self.skip_ws();
            if self.eat(b',') {
                continue;
            }
            self.expect(b'}')?;
            return Ok(BracketTree { children });
        }
    }

    fn rational(&mut self) -> Result<BigRational> {
        let negative = self.eat(b'-');
        let numer = self.digits()?;
        let denom = if self.eat(b'/') {
            let d = self.digits()?;
            if d.is_zero() {
                return Err(self.error("zero denominator"));
            }
            d
        } else {
            BigUint::one()
        };
        let sign = if negative { BigSign::Minus } else { BigSign::Plus };
        Ok(BigRational::new(
            BigInt::from_biguint(sign, numer),
            BigInt::from(denom),
        ))
    }

    fn index_body(&mut self) -> Result<PrimeBag> {
        let mut entries = Vec::new();
        loop {
            self.skip_ws();
            let entry_start = self.pos;
            let negative = self.eat(b'-');
            let k = self.digits()?;
            let k = k
                .to_u64()
                .ok_or_else(|| Error::parse(entry_start, "prime index too large"))?;
            if k == 0 {
                return Err(Error::parse(entry_start, "prime index 0 is not valid; indices start at 1"));
            }
            self.skip_ws();
            let mut q = if self.eat(b':') {
                self.skip_ws();
                let at = self.pos;
                let q = self.rational()?;
                if q.is_zero() {
                    return Err(Error::parse(at, "explicit zero multiplicity"));
                }
                q
            } else {
                BigRational::one()
            };
            if negative {
                q = -q;
            }
            entries.push((PrimeIndex::new_unchecked(k), q));
            self.skip_ws();
            if self.eat(b',') {
                continue;
            }
            self.expect(b'}')?;
            return Ok(PrimeBag::from_entries(entries));
        }
    }

    fn finite(&mut self) -> Result<PrimeBag> {
        let open = self.pos;
        self.expect(b'{')?;
        self.skip_ws();
        match self.peek() {
            Some(b'}') => {
                self.pos += 1;
                Ok(PrimeBag::one())
            }
            Some(b'{') => {
                self.pos = open;
                let tree = self.tree()?;
                tree.to_prime_bag().map_err(|e| match e {
                    Error::Parse { message, .. } => Error::parse(open, message),
                    other => other,
                })
            }
            _ => self.index_body(),
        }
    }

    fn prime_bag(&mut self) -> Result<PrimeBag> {
        self.skip_ws();
        let negative = self.eat(b'-');
        self.skip_ws();
        if self.src[self.pos..].starts_with("inf") {
            self.pos += 3;
            return Ok(PrimeBag::infinity());
        }
        let imaginary = self.eat(b'i');
        self.skip_ws();
        if self.eat(b'0') {
            return Ok(PrimeBag::zero());
        }
        let mut bag = self.finite()?;
        if negative {
            bag.sign = Sign::Minus;
        }
        if imaginary {
            bag.unit = Unit::Imaginary;
        }
        Ok(bag)
    }
}

/// Parse a literal in index form (`{2,1,1}`, `-i{1:1/2}`, `0`, `inf`) or
/// nested-bracket form (`{{{}},{}}`) into its canonical bag.
pub fn validate(text: &str) -> Result<PrimeBag> {
    let mut p = Parser::new(text);
    let bag = p.prime_bag()?;
    p.skip_ws();
    p.expect_end()?;
    Ok(bag)
}

/// Parse a literal at the start of `text`; returns the bag and the bytes consumed.
pub fn parse_prefix(text: &str) -> Result<(PrimeBag, usize)> {
    let mut p = Parser::new(text);
    let bag = p.prime_bag()?;
    Ok((bag, p.pos))
}

impl FromStr for PrimeBag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        validate(s)
    }
}

// ---------------------------------------------------------------------------
// Arithmetic

type Entries = Vec<(PrimeIndex, Multiplicity)>;

/// Merge two descending entry lists, combining coinciding indices with `f`.
fn merge<F>(a: &[(PrimeIndex, Multiplicity)], b: &[(PrimeIndex, Multiplicity)], work: &mut Work, mut f: F) -> Entries
where
    F: FnMut(Option<&BigRational>, Option<&BigRational>) -> Option<BigRational>,
{
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        work.tick();
        let (k, q) = match (a.get(i), b.get(j)) {
            (Some((ka, ma)), Some((kb, mb))) => match ka.cmp(kb) {
                Ordering::Greater => {
                    i += 1;
                    (*ka, f(Some(ma.value()), None))
                }
                Ordering::Less => {
                    j += 1;
                    (*kb, f(None, Some(mb.value())))
                }
                Ordering::Equal => {
                    i += 1;
                    j += 1;
                    (*ka, f(Some(ma.value()), Some(mb.value())))
                }
            },
            (Some((ka, ma)), None) => {
                i += 1;
                (*ka, f(Some(ma.value()), None))
            }
            (None, Some((kb, mb))) => {
                j += 1;
                (*kb, f(None, Some(mb.value())))
            }
            (None, None) => unreachable!(),
        };
        if let Some(m) = q.and_then(Multiplicity::new) {
            out.push((k, m));
        }
    }
    out
}

/// Multiplication: additive union of multiplicities.
pub fn mul(a: &PrimeBag, b: &PrimeBag) -> Result<PrimeBag> {
    mul_counted(a, b, &mut Work::new())
}

pub fn mul_counted(a: &PrimeBag, b: &PrimeBag, work: &mut Work) -> Result<PrimeBag> {
    match (a.special, b.special) {
        (Special::Zero, Special::Infinity) | (Special::Infinity, Special::Zero) => {
            return Err(Error::UndefinedForm("0 * inf".into()))
        }
        (Special::Zero, _) | (_, Special::Zero) => return Ok(PrimeBag::zero()),
        (Special::Infinity, _) | (_, Special::Infinity) => return Ok(PrimeBag::infinity()),
        _ => {}
    }
    let mut sign = a.sign.times(b.sign);
    let unit = match (a.unit, b.unit) {
        (Unit::Imaginary, Unit::Imaginary) => {
            sign = sign.flip();
            Unit::Real
        }
        (Unit::Real, Unit::Real) => Unit::Real,
        _ => Unit::Imaginary,
    };
    let entries = merge(&a.entries, &b.entries, work, |x, y| match (x, y) {
        (Some(x), Some(y)) => Some(x + y),
        (Some(x), None) | (None, Some(x)) => Some(x.clone()),
        (None, None) => None,
    });
    Ok(PrimeBag {
        special: Special::Finite,
        sign,
        unit,
        entries,
    })
}

/// Product of many bags as one n-ary additive union.
pub fn mul_all(bags: &[PrimeBag]) -> Result<PrimeBag> {
    let mut acc = PrimeBag::one();
    let mut finite = Vec::with_capacity(bags.len());
    for b in bags {
        if b.is_finite() {
            finite.push(b);
        } else {
            acc = mul(&acc, b)?;
        }
    }
    let mut sign = Sign::Plus;
    let mut imaginary = 0u32;
    for b in &finite {
        sign = sign.times(b.sign);
        if b.unit == Unit::Imaginary {
            imaginary += 1;
        }
    }
    let union = PrimeBag::from_entries(
        finite
            .iter()
            .flat_map(|b| b.entries.iter().map(|(k, m)| (*k, m.value().clone()))),
    );
    if imaginary % 4 >= 2 {
        sign = sign.flip();
    }
    let unit = if imaginary % 2 == 1 { Unit::Imaginary } else { Unit::Real };
    mul(&acc, &union.with_sign(sign).with_unit(unit))
}

/// How division treats multiplicities that would go negative.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DivMode {
    /// Natural bags only: zero-truncated multiset difference.
    NaturalTruncated,
    /// Multiply by the reciprocal; the inverse of [`mul`].
    Exact,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Quotient {
    pub bag: PrimeBag,
    /// Indices whose multiplicity was clamped at zero (truncated mode only);
    /// non-empty means the divisor did not divide the dividend.
    pub truncated: Vec<PrimeIndex>,
}

impl Quotient {
    pub fn is_exact(&self) -> bool {
        self.truncated.is_empty()
    }
}

pub fn div(a: &PrimeBag, b: &PrimeBag, mode: DivMode) -> Result<Quotient> {
    match mode {
        DivMode::Exact => {
            if b.is_zero() {
                return Err(Error::UndefinedForm("division by zero".into()));
            }
            Ok(Quotient {
                bag: mul(a, &b.reciprocal())?,
                truncated: Vec::new(),
            })
        }
        DivMode::NaturalTruncated => {
            for x in [a, b] {
                if !x.is_natural() {
                    return Err(Error::Mode(format!(
                        "truncated division needs natural operands, got {x}"
                    )));
                }
            }
            let mut truncated = Vec::new();
            let mut work = Work::new();
            let mut result = Vec::with_capacity(a.entries.len());
            let mut j = 0;
            for (k, m) in &a.entries {
                while j < b.entries.len() && b.entries[j].0 > *k {
                    truncated.push(b.entries[j].0);
                    j += 1;
                }
                if j < b.entries.len() && b.entries[j].0 == *k {
                    let diff = m.value() - b.entries[j].1.value();
                    if diff.is_negative() {
                        truncated.push(*k);
                    } else if let Some(m) = Multiplicity::new(diff) {
                        result.push((*k, m));
                    }
                    j += 1;
                } else {
                    result.push((*k, m.clone()));
                }
                work.tick();
            }
            truncated.extend(b.entries[j..].iter().map(|(k, _)| *k));
            truncated.sort_by(|x, y| y.cmp(x));
            Ok(Quotient {
                bag: PrimeBag::from_sorted_entries(result),
                truncated,
            })
        }
    }
}

/// Exact division, `a * (1/b)`.
pub fn div_exact(a: &PrimeBag, b: &PrimeBag) -> Result<PrimeBag> {
    div(a, b, DivMode::Exact).map(|q| q.bag)
}

/// Greatest common divisor: multiplicity-wise minimum (bag intersection).
pub fn gcd(a: &PrimeBag, b: &PrimeBag) -> Result<PrimeBag> {
    gcd_counted(a, b, &mut Work::new())
}

pub fn gcd_counted(a: &PrimeBag, b: &PrimeBag, work: &mut Work) -> Result<PrimeBag> {
    a.require_natural("gcd")?;
    b.require_natural("gcd")?;
    let entries = merge(&a.entries, &b.entries, work, |x, y| match (x, y) {
        (Some(x), Some(y)) => Some(x.min(y).clone()),
        _ => None,
    });
    Ok(PrimeBag::from_sorted_entries(entries))
}

/// Least common multiple: multiplicity-wise maximum.
pub fn lcm(a: &PrimeBag, b: &PrimeBag) -> Result<PrimeBag> {
    a.require_natural("lcm")?;
    b.require_natural("lcm")?;
    let entries = merge(&a.entries, &b.entries, &mut Work::new(), |x, y| match (x, y) {
        (Some(x), Some(y)) => Some(x.max(y).clone()),
        (Some(x), None) | (None, Some(x)) => Some(x.clone()),
        (None, None) => None,
    });
    Ok(PrimeBag::from_sorted_entries(entries))
}

/// Exponentiation by an exact rational: every multiplicity is scaled by `q`.
///
/// Outside [`NumberMode::Extended`] a fractional resulting multiplicity is
/// an irrationality error naming the offending prime index.
pub fn pow(a: &PrimeBag, q: &BigRational, mode: NumberMode) -> Result<PrimeBag> {
    if !a.is_finite() {
        return Err(Error::Domain(format!("cannot raise {a} to a power")));
    }
    let phase = match (a.sign, a.unit) {
        (Sign::Plus, Unit::Real) => 0,
        (Sign::Plus, Unit::Imaginary) => 1,
        (Sign::Minus, Unit::Real) => 2,
        (Sign::Minus, Unit::Imaginary) => 3,
    };
    if phase != 0 && !q.is_integer() {
        return Err(Error::Domain(format!(
            "fractional power {q} of negative or imaginary {a} is not supported"
        )));
    }
    if q.is_zero() {
        return Ok(PrimeBag::one());
    }
    let mut entries = Vec::with_capacity(a.entries.len());
    for (k, m) in &a.entries {
        let scaled = m.value() * q;
        if mode != NumberMode::Extended && !scaled.is_integer() {
            return Err(Error::Irrational {
                index: k.get(),
                multiplicity: Multiplicity(scaled).to_string(),
            });
        }
        entries.push((*k, Multiplicity(scaled)));
    }
    let phase = if phase == 0 {
        0
    } else {
        q.to_integer().mod_floor(&BigInt::from(4)).to_u32().unwrap() * phase % 4
    };
    let (sign, unit) = match phase {
        0 => (Sign::Plus, Unit::Real),
        1 => (Sign::Plus, Unit::Imaginary),
        2 => (Sign::Minus, Unit::Real),
        _ => (Sign::Minus, Unit::Imaginary),
    };
    let out = PrimeBag {
        special: Special::Finite,
        sign,
        unit,
        entries,
    };
    mode.check(&out)?;
    Ok(out)
}

/// A natural bag is prime iff it is a single member with multiplicity one;
/// decided from the entry count and the first entry alone.
pub fn is_prime_pb(a: &PrimeBag) -> Result<bool> {
    is_prime_pb_counted(a, &mut Work::new())
}

pub fn is_prime_pb_counted(a: &PrimeBag, work: &mut Work) -> Result<bool> {
    if a.special != Special::Finite || a.sign != Sign::Plus || a.unit != Unit::Real {
        return Err(Error::Mode(format!("primality is defined for natural prime bags, got {a}")));
    }
    work.tick();
    Ok(match a.entries.as_slice() {
        [(_, m)] => {
            if !m.is_positive_integer() {
                return Err(Error::Mode(format!("primality is defined for natural prime bags, got {a}")));
            }
            m.value().is_one()
        }
        // More than one entry: composite, or not natural at all.
        _ => {
            if a.entries.first().is_some_and(|(_, m)| !m.is_positive_integer()) {
                return Err(Error::Mode(format!(
                    "primality is defined for natural prime bags, got {a}"
                )));
            }
            false
        }
    })
}

/// The prime factorization, read straight off the entries.
pub fn factor_pb(a: &PrimeBag) -> Result<Vec<(PrimeIndex, BigUint)>> {
    factor_pb_counted(a, &mut Work::new())
}

pub fn factor_pb_counted(a: &PrimeBag, work: &mut Work) -> Result<Vec<(PrimeIndex, BigUint)>> {
    a.require_natural("factorization")?;
    Ok(a
        .entries
        .iter()
        .map(|(k, m)| {
            work.tick();
            (*k, m.value().numer().magnitude().clone())
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pb(s: &str) -> PrimeBag {
        validate(s).unwrap_or_else(|e| panic!("{s}: {e}"))
    }

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn k(i: u64) -> PrimeIndex {
        PrimeIndex::new(i).unwrap()
    }

    #[test]
    fn parse_examples() {
        assert_eq!(pb("{}"), PrimeBag::one());
        assert_eq!(pb("{{{}}}"), PrimeBag::prime(k(2)));
        let twelve = pb("{2,1,1}");
        assert_eq!(twelve.multiplicity_of(k(1)), q(2, 1));
        assert_eq!(twelve.multiplicity_of(k(2)), q(1, 1));
        assert_eq!(twelve.entry_count(), 2);
        assert_eq!(pb(" { 1 , 1 , 2 } "), twelve);
        assert_eq!(pb("{{{}},{},{}}"), twelve);
        assert_eq!(pb("{1:1/2}").multiplicity_of(k(1)), q(1, 2));
        assert_eq!(pb("{1,-1}"), PrimeBag::one());
        assert!(pb("0").is_zero());
        assert!(pb("inf").is_infinity());
        let neg = pb("-i{1}");
        assert_eq!((neg.sign(), neg.unit()), (Sign::Minus, Unit::Imaginary));
    }

    #[test]
    fn parse_errors() {
        for bad in ["{", "{1", "{1,}", "{0}", "{1:0}", "{{}", "{{},{{},{}}}", "{1,{}}", "{}}", "x", "{1:1/0}", "{a}"] {
            assert!(matches!(validate(bad), Err(Error::Parse { .. })), "{bad}");
        }
        // non-tower member message points at the index form
        let Err(Error::Parse { message, .. }) = validate("{{{},{}}}") else {
            panic!()
        };
        assert!(message.contains("index form"));
    }

    #[test]
    fn canonical_format() {
        assert_eq!(pb("{1,1,3}").to_string(), "{3,1,1}");
        assert_eq!(pb("{1:1/2}").to_string(), "{1:1/2}");
        assert_eq!(pb("{-3,2,1}").to_string(), "{2,1,-3}");
        assert_eq!(pb("{-2,1,-2}").to_string(), "{1,-2,-2}");
        assert_eq!(pb("-{-1}").to_string(), "-{-1}");
        assert_eq!(pb("i{1}").to_string(), "i{1}");
        assert_eq!(pb("{1:17}").to_string(), "{1:17}");
        assert_eq!(pb("{1:-20,2:7/3}").to_string(), "{2:7/3,1:-20}");
        assert_eq!(PrimeBag::zero().to_string(), "0");
        assert_eq!(PrimeBag::infinity().to_string(), "inf");
        assert_eq!(pb("-0"), PrimeBag::zero());
        assert_eq!(pb("{2,1}").to_bracket_string().unwrap(), "{{{}},{}}");
        assert!(pb("{-1}").to_bracket_string().is_err());
    }

    #[test]
    fn mul_examples() {
        assert_eq!(mul(&pb("{1}"), &pb("{2}")).unwrap(), pb("{2,1}"));
        assert_eq!(mul(&pb("{1}"), &pb("{1}")).unwrap(), pb("{1,1}"));
        assert_eq!(mul(&pb("{1}"), &pb("{-1}")).unwrap(), pb("{}"));
        assert_eq!(mul(&pb("{1}"), &pb("{-2,-2}")).unwrap().to_string(), "{1,-2,-2}");
        assert_eq!(mul(&pb("i{1}"), &pb("i{1}")).unwrap().to_string(), "-{1,1}");
        assert_eq!(mul(&pb("i{1}"), &pb("{1}")).unwrap().to_string(), "i{1,1}");
        assert_eq!(mul(&pb("i{1}"), &pb("-{1}")).unwrap().to_string(), "-i{1,1}");
        assert_eq!(mul(&pb("-{1}"), &pb("{1}")).unwrap().to_string(), "-{1,1}");
        assert_eq!(mul(&pb("-{1}"), &pb("-{1}")).unwrap().to_string(), "{1,1}");
        assert_eq!(mul(&pb("{1:1/2}"), &pb("{1:1/2}")).unwrap(), pb("{1}"));
        assert!(mul(&pb("{3}"), &pb("inf")).unwrap().is_infinity());
        assert!(mul(&pb("{3}"), &pb("0")).unwrap().is_zero());
        assert!(matches!(mul(&pb("0"), &pb("inf")), Err(Error::UndefinedForm(_))));
    }

    #[test]
    fn div_examples() {
        let d = |a: &str, b: &str| div_exact(&pb(a), &pb(b)).unwrap().to_string();
        assert_eq!(d("{2,1}", "{2}"), "{1}");
        assert_eq!(d("{2,1}", "{1}"), "{2}");
        assert_eq!(d("{2,1}", "{3}"), "{2,1,-3}");
        assert_eq!(d("{-1}", "{-1}"), "{}");
        assert_eq!(d("i{1}", "i{}"), "{1}");
        assert!(matches!(div_exact(&pb("{1}"), &pb("0")), Err(Error::UndefinedForm(_))));
        assert!(div_exact(&pb("{1}"), &pb("inf")).unwrap().is_zero());

        // {b,a,a} / {a} with a = 1, b = 2
        let t = div(&pb("{2,1,1}"), &pb("{1}"), DivMode::NaturalTruncated).unwrap();
        assert_eq!(t.bag, pb("{2,1}"));
        assert!(t.is_exact());
        let t = div(&pb("{2,1}"), &pb("{3}"), DivMode::NaturalTruncated).unwrap();
        assert_eq!(t.bag, pb("{2,1}"));
        assert_eq!(t.truncated, vec![k(3)]);
        let t = div(&pb("{2}"), &pb("{2,2,1}"), DivMode::NaturalTruncated).unwrap();
        assert_eq!(t.bag, pb("{}"));
        assert_eq!(t.truncated, vec![k(2), k(1)]);
        assert!(matches!(
            div(&pb("{-1}"), &pb("{1}"), DivMode::NaturalTruncated),
            Err(Error::Mode(_))
        ));
    }

    #[test]
    fn gcd_lcm_examples() {
        let g = |a: &str, b: &str| gcd(&pb(a), &pb(b)).unwrap().to_string();
        assert_eq!(g("{1,1}", "{2,1}"), "{1}");
        assert_eq!(g("{3,1,1,1}", "{3,2,1,1}"), "{3,1,1}");
        assert_eq!(g("{2}", "{1}"), "{}");
        let l = |a: &str, b: &str| lcm(&pb(a), &pb(b)).unwrap().to_string();
        assert_eq!(l("{1,1}", "{2,1}"), "{2,1,1}");
        assert_eq!(l("{}", "{2}"), "{2}");
        assert_eq!(l("{1}", "{1}"), "{1}");
        assert!(matches!(gcd(&pb("{-1}"), &pb("{1}")), Err(Error::Mode(_))));
        assert!(matches!(lcm(&pb("{1}"), &pb("0")), Err(Error::Mode(_))));
    }

    #[test]
    fn pow_examples() {
        let p = |a: &str, n: i64, d: i64, mode| pow(&pb(a), &q(n, d), mode);
        use NumberMode::*;
        assert_eq!(p("{1}", 2, 1, Natural).unwrap(), pb("{1,1}"));
        assert_eq!(p("{1}", 3, 1, Natural).unwrap(), pb("{1,1,1}"));
        assert_eq!(p("{2,1}", 2, 1, Natural).unwrap().to_string(), "{2,2,1,1}");
        assert_eq!(p("{1,1}", 1, 2, Natural).unwrap(), pb("{1}"));
        assert_eq!(p("{2,1}", 0, 1, Natural).unwrap(), pb("{}"));
        assert!(matches!(
            p("{1}", 1, 2, Natural),
            Err(Error::Irrational { index: 1, .. })
        ));
        assert!(matches!(p("{1}", 1, 2, Rational), Err(Error::Irrational { .. })));
        assert_eq!(p("{1}", 1, 2, Extended).unwrap().to_string(), "{1:1/2}");
        assert!(matches!(p("{1}", -1, 1, Natural), Err(Error::Mode(_))));
        assert_eq!(p("{1}", -1, 1, Rational).unwrap().to_string(), "{-1}");
        assert_eq!(p("i{1}", 2, 1, Extended).unwrap().to_string(), "-{1,1}");
        assert_eq!(p("i{}", 3, 1, Extended).unwrap().to_string(), "-i{}");
        assert_eq!(p("i{}", -1, 1, Extended).unwrap().to_string(), "-i{}");
        assert_eq!(p("-{1}", 3, 1, Rational).unwrap().to_string(), "-{1,1,1}");
        assert!(matches!(p("-{1}", 1, 2, Extended), Err(Error::Domain(_))));
        assert!(matches!(p("0", 2, 1, Extended), Err(Error::Domain(_))));
    }

    #[test]
    fn primality_and_factors() {
        assert!(is_prime_pb(&pb("{3}")).unwrap());
        assert!(!is_prime_pb(&pb("{1,1}")).unwrap());
        assert!(!is_prime_pb(&pb("{}")).unwrap());
        assert!(!is_prime_pb(&pb("{2,1}")).unwrap());
        assert!(is_prime_pb(&pb("{-1}")).is_err());
        assert!(is_prime_pb(&pb("-{3}")).is_err());

        let f = factor_pb(&pb("{2,1}")).unwrap();
        assert_eq!(f, vec![(k(2), 1u32.into()), (k(1), 1u32.into())]);
        assert!(factor_pb(&pb("{}")).unwrap().is_empty());
        assert_eq!(factor_pb(&pb("{3,3}")).unwrap(), vec![(k(3), 2u32.into())]);
        assert!(factor_pb(&pb("{1:1/2}")).is_err());
    }

    #[test]
    fn counting() {
        assert_eq!(pb("{1,1,2}").multiplicity_of(k(1)), q(2, 1));
        assert_eq!(pb("{}").multiplicity_of(k(5)), q(0, 1));
        assert_eq!(pb("{2,1,1}").bag_member_count(), 3u32.into());
        assert_eq!(pb("{1:1/2,2}").bag_member_count(), 2u32.into());
    }

    #[test]
    fn classification() {
        use NumberClass::*;
        assert_eq!(pb("{}").classify(), NaturalPB);
        assert_eq!(pb("{3,1}").classify(), NaturalPB);
        assert_eq!(pb("{-1}").classify(), RationalPB);
        assert_eq!(pb("-{1}").classify(), RationalPB);
        assert_eq!(pb("0").classify(), RationalPB);
        assert_eq!(pb("inf").classify(), ExtendedPB);
        assert_eq!(pb("i{}").classify(), ExtendedPB);
        assert_eq!(pb("{1:1/3}").classify(), ExtendedPB);
    }

    #[test]
    fn reciprocal_involution() {
        for s in ["{}", "{2,1,-3}", "-i{1:1/2}", "0", "inf"] {
            let a = pb(s);
            assert_eq!(a.reciprocal().reciprocal(), a, "{s}");
        }
        assert_eq!(mul(&pb("{-1}"), &pb("{-1}").reciprocal()).unwrap(), pb("{}"));
    }
}
