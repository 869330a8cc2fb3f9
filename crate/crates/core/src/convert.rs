//! The bridge between prime bags and positional numbers.
//!
//! Evaluating a bag multiplies its primes out; encoding a positional number
//! means factoring it. Both directions return a [`ConversionReceipt`] that
//! counts the work done, so the cost of crossing representations can be
//! compared against the cheap bag operations. Addition and subtraction exist
//! only as round trips through this bridge.

use num_bigint::{BigInt, BigUint, RandBigInt, Sign as BigSign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::pbnum::{self, PrimeBag, Sign, Special, Unit};
use crate::primes::{self, PrimalityConfig, PrimeIndex};
use crate::work::Work;

/// Arbitrary-precision rational in lowest terms with positive denominator.
pub type ExactRational = BigRational;

/// Work accounting for one conversion.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ConversionReceipt {
    /// Digit count of positional inputs, entry count of bag inputs.
    pub input_size: u64,
    pub trial_divisions: u64,
    pub rho_iterations: u64,
    pub primality_tests: u64,
    pub index_lookups: u64,
    /// Schoolbook limb-product count of the multiplications performed while
    /// evaluating bags.
    pub evaluation_limb_ops: u64,
}

impl ConversionReceipt {
    pub fn total_work(&self) -> u64 {
        self.trial_divisions
            + self.rho_iterations
            + self.primality_tests
            + self.index_lookups
            + self.evaluation_limb_ops
    }

    /// Accumulate another receipt into this one.
    pub fn absorb(&mut self, other: &ConversionReceipt) {
        self.input_size += other.input_size;
        self.trial_divisions += other.trial_divisions;
        self.rho_iterations += other.rho_iterations;
        self.primality_tests += other.primality_tests;
        self.index_lookups += other.index_lookups;
        self.evaluation_limb_ops += other.evaluation_limb_ops;
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FactorConfig {
    /// Trial division uses cached primes up to this bound before Pollard rho.
    pub trial_bound: u64,
    /// Maximum rho iterations per conversion.
    pub work_ceiling: u64,
    /// Seed for the rho polynomial constants and starting points.
    pub seed: u64,
    pub primality: PrimalityConfig,
}

impl Default for FactorConfig {
    fn default() -> Self {
        FactorConfig {
            trial_bound: 4096,
            work_ceiling: 10_000_000,
            seed: 0x9e37_79b9_7f4a_7c15,
            primality: PrimalityConfig::default(),
        }
    }
}

fn limbs(n: &BigUint) -> u64 {
    n.bits().div_ceil(64).max(1)
}

/// Balanced product tree, counting limb products.
fn product(mut terms: Vec<BigUint>, receipt: &mut ConversionReceipt) -> BigUint {
    if terms.is_empty() {
        return BigUint::one();
    }
    while terms.len() > 1 {
        let mut next = Vec::with_capacity(terms.len().div_ceil(2));
        let mut it = terms.into_iter();
        while let Some(a) = it.next() {
            match it.next() {
                Some(b) => {
                    receipt.evaluation_limb_ops += limbs(&a) * limbs(&b);
                    next.push(a * b);
                }
                None => next.push(a),
            }
        }
        terms = next;
    }
    terms.pop().unwrap()
}

/// Exact value of a finite real bag with integer multiplicities.
pub fn pb_to_rational(a: &PrimeBag) -> Result<ExactRational> {
    pb_to_rational_counted(a, &mut ConversionReceipt::default())
}

pub fn pb_to_rational_counted(a: &PrimeBag, receipt: &mut ConversionReceipt) -> Result<ExactRational> {
    match a.special() {
        Special::Zero => return Ok(ExactRational::zero()),
        Special::Infinity => return Err(Error::Domain("infinity has no rational value".into())),
        Special::Finite => {}
    }
    if a.unit() == Unit::Imaginary {
        return Err(Error::Domain(format!("{a} is imaginary and has no rational value")));
    }
    receipt.input_size += a.entry_count() as u64;
    let mut numer = Vec::new();
    let mut denom = Vec::new();
    for (k, m) in a.entries() {
        let Some(e) = m.to_integer() else {
            return Err(Error::Irrational {
                index: k.get(),
                multiplicity: m.to_string(),
            });
        };
        let exp = e
            .magnitude()
            .to_u32()
            .ok_or_else(|| Error::Resource(format!("exponent {e} of prime index {k} is too large to evaluate")))?;
        let p = BigUint::from(primes::nth_prime(*k)?);
        receipt.index_lookups += 1;
        let power = pow_counted(&p, exp, receipt);
        if e.is_positive() {
            numer.push(power);
        } else {
            denom.push(power);
        }
    }
    let n = product(numer, receipt);
    let d = product(denom, receipt);
    let sign = match a.sign() {
        Sign::Plus => BigSign::Plus,
        Sign::Minus => BigSign::Minus,
    };
    Ok(ExactRational::new_raw(BigInt::from_biguint(sign, n), BigInt::from(d)))
}

fn pow_counted(base: &BigUint, mut exp: u32, receipt: &mut ConversionReceipt) -> BigUint {
    let mut acc = BigUint::one();
    let mut b = base.clone();
    while exp > 0 {
        if exp & 1 == 1 {
            receipt.evaluation_limb_ops += limbs(&acc) * limbs(&b);
            acc *= &b;
        }
        exp >>= 1;
        if exp > 0 {
            receipt.evaluation_limb_ops += limbs(&b) * limbs(&b);
            b = &b * &b;
        }
    }
    acc
}

/// Prime factorization `n = prod p^e`, largest primes last is not guaranteed;
/// the result is sorted ascending by prime.
pub fn factorize(n: &BigUint, config: &FactorConfig, receipt: &mut ConversionReceipt) -> Result<Vec<(BigUint, u32)>> {
    let mut found: Vec<(BigUint, u32)> = Vec::new();
    if n.is_zero() {
        return Err(Error::Domain("0 has no prime factorization".into()));
    }
    let mut rest = n.clone();
    trial_divide(&mut rest, config.trial_bound, &mut found, receipt)?;
    if !rest.is_one() {
        let mut rng = ChaCha20Rng::seed_from_u64(config.seed);
        let mut pending = vec![rest];
        while let Some(m) = pending.pop() {
            receipt.primality_tests += 1;
            if primes::is_prime_counted(&m, &config.primality, &mut Work::new()) {
                push_factor(&mut found, m, 1);
                continue;
            }
            if let Some(r) = perfect_square_root(&m) {
                pending.push(r.clone());
                pending.push(r);
                continue;
            }
            match brent_rho(&m, config, &mut rng, receipt) {
                Some(d) => {
                    let other = &m / &d;
                    pending.push(d);
                    pending.push(other);
                }
                None => {
                    found.sort();
                    return Err(Error::ConversionTimeout {
                        ceiling: config.work_ceiling,
                        partial: found.iter().map(|(p, e)| (p.to_string(), *e)).collect(),
                        cofactor: pending
                            .iter()
                            .chain(std::iter::once(&m))
                            .fold(BigUint::one(), |acc, x| acc * x)
                            .to_string(),
                    });
                }
            }
        }
    }
    found.sort();
    Ok(found)
}

fn push_factor(found: &mut Vec<(BigUint, u32)>, p: BigUint, e: u32) {
    match found.iter_mut().find(|(q, _)| *q == p) {
        Some(entry) => entry.1 += e,
        None => found.push((p, e)),
    }
}

fn perfect_square_root(m: &BigUint) -> Option<BigUint> {
    let r = m.sqrt();
    (&r * &r == *m).then_some(r)
}

fn trial_divide(
    rest: &mut BigUint,
    bound: u64,
    found: &mut Vec<(BigUint, u32)>,
    receipt: &mut ConversionReceipt,
) -> Result<()> {
    let table = primes::table();
    table.ensure_through(bound.min(table.ceiling() - 1))?;
    if let Some(mut small) = rest.to_u64() {
        table.with_primes(|ps| {
            for &p in ps {
                let p = p as u64;
                if p > bound || p * p > small {
                    break;
                }
                receipt.trial_divisions += 1;
                if small % p == 0 {
                    let mut e = 0;
                    while small % p == 0 {
                        small /= p;
                        e += 1;
                        receipt.trial_divisions += 1;
                    }
                    found.push((BigUint::from(p), e));
                }
            }
        });
        *rest = BigUint::from(small);
        if small > 1 && (small as u128) < (bound as u128 + 1).pow(2) {
            // Fewer than two prime factors above the bound remain.
            found.push((BigUint::from(small), 1));
            *rest = BigUint::one();
        }
        return Ok(());
    }
    table.with_primes(|ps| {
        for &p in ps {
            if p as u64 > bound {
                break;
            }
            receipt.trial_divisions += 1;
            if (&*rest % p).is_zero() {
                let mut e = 0;
                while (&*rest % p).is_zero() {
                    *rest /= p;
                    e += 1;
                    receipt.trial_divisions += 1;
                }
                found.push((BigUint::from(p), e));
            }
        }
    });
    Ok(())
}

/// Brent's variant of Pollard rho with batched gcds. Returns a nontrivial
/// divisor of the odd composite `n`, or `None` once the work ceiling is hit.
fn brent_rho(n: &BigUint, config: &FactorConfig, rng: &mut ChaCha20Rng, receipt: &mut ConversionReceipt) -> Option<BigUint> {
    const BATCH: u64 = 128;
    if n.is_even() {
        return Some(BigUint::from(2u32));
    }
    let one = BigUint::one();
    loop {
        let c = rng.gen_biguint_range(&one, n);
        let mut y = rng.gen_biguint_range(&one, n);
        let step = |v: &BigUint| (v * v + &c) % n;
        let mut g = one.clone();
        let mut r = 1u64;
        let mut q = one.clone();
        let mut x;
        let mut ys;
        loop {
            x = y.clone();
            for _ in 0..r {
                y = step(&y);
            }
            receipt.rho_iterations += r;
            let mut k = 0;
            ys = y.clone();
            while k < r && g.is_one() {
                ys = y.clone();
                let batch = BATCH.min(r - k);
                for _ in 0..batch {
                    y = step(&y);
                    let diff = if x > y { &x - &y } else { &y - &x };
                    q = (q * diff) % n;
                }
                receipt.rho_iterations += batch;
                g = q.gcd(n);
                k += batch;
            }
            r *= 2;
            if receipt.rho_iterations > config.work_ceiling {
                return None;
            }
            if !g.is_one() {
                break;
            }
        }
        if &g == n {
            // Batch overshot; replay it one gcd at a time.
            loop {
                ys = step(&ys);
                receipt.rho_iterations += 1;
                let diff = if x > ys { &x - &ys } else { &ys - &x };
                g = diff.gcd(n);
                if !g.is_one() {
                    break;
                }
            }
        }
        if &g != n {
            return Some(g);
        }
        if receipt.rho_iterations > config.work_ceiling {
            return None;
        }
    }
}

fn factors_to_entries(
    factors: Vec<(BigUint, u32)>,
    negate: bool,
    receipt: &mut ConversionReceipt,
) -> Result<Vec<(PrimeIndex, BigRational)>> {
    factors
        .into_iter()
        .map(|(p, e)| {
            receipt.index_lookups += 1;
            let k = primes::prime_index(&p)?;
            let e = BigRational::from_integer(BigInt::from(e));
            Ok((k, if negate { -e } else { e }))
        })
        .collect()
}

/// Encode a positive natural by factoring it.
pub fn natural_to_pb(n: &BigUint) -> Result<(PrimeBag, ConversionReceipt)> {
    natural_to_pb_with(n, &FactorConfig::default())
}

pub fn natural_to_pb_with(n: &BigUint, config: &FactorConfig) -> Result<(PrimeBag, ConversionReceipt)> {
    if n.is_zero() {
        return Err(Error::Domain(
            "0 is not a natural prime bag; convert it as a rational to get Zero".into(),
        ));
    }
    let mut receipt = ConversionReceipt {
        input_size: n.to_string().len() as u64,
        ..Default::default()
    };
    let factors = factorize(n, config, &mut receipt)?;
    let entries = factors_to_entries(factors, false, &mut receipt)?;
    Ok((PrimeBag::from_entries(entries), receipt))
}

/// Encode a rational: numerator primes positive, denominator primes negative.
pub fn rational_to_pb(q: &ExactRational) -> Result<(PrimeBag, ConversionReceipt)> {
    rational_to_pb_with(q, &FactorConfig::default())
}

pub fn rational_to_pb_with(q: &ExactRational, config: &FactorConfig) -> Result<(PrimeBag, ConversionReceipt)> {
    let mut receipt = ConversionReceipt::default();
    if q.is_zero() {
        return Ok((PrimeBag::zero(), receipt));
    }
    let numer = q.numer().magnitude().clone();
    let denom = q.denom().magnitude().clone();
    receipt.input_size = (numer.to_string().len() + denom.to_string().len()) as u64;
    let mut entries = factors_to_entries(factorize(&numer, config, &mut receipt)?, false, &mut receipt)?;
    entries.extend(factors_to_entries(factorize(&denom, config, &mut receipt)?, true, &mut receipt)?);
    let sign = if q.is_negative() { Sign::Minus } else { Sign::Plus };
    Ok((PrimeBag::from_entries(entries).with_sign(sign), receipt))
}

/// Addition by evaluating both operands and factoring the sum.
pub fn add(a: &PrimeBag, b: &PrimeBag) -> Result<(PrimeBag, ConversionReceipt)> {
    combine(a, b, |x, y| x + y)
}

/// Subtraction by evaluating both operands and factoring the difference.
pub fn sub(a: &PrimeBag, b: &PrimeBag) -> Result<(PrimeBag, ConversionReceipt)> {
    combine(a, b, |x, y| x - y)
}

fn combine(
    a: &PrimeBag,
    b: &PrimeBag,
    op: impl FnOnce(ExactRational, ExactRational) -> ExactRational,
) -> Result<(PrimeBag, ConversionReceipt)> {
    let mut receipt = ConversionReceipt::default();
    let x = pb_to_rational_counted(a, &mut receipt)?;
    let y = pb_to_rational_counted(b, &mut receipt)?;
    let (bag, back) = rational_to_pb(&op(x, y))?;
    receipt.absorb(&back);
    Ok((bag, receipt))
}

/// Truncated Euler product for pi^2:
/// `6 * prod_{k<=K} 1 / (1 - p_k^-2)`, built from bags and evaluated once.
pub fn euler_pi_squared(terms: u64) -> Result<ExactRational> {
    if terms == 0 {
        return Err(Error::Domain("the Euler product needs at least one term".into()));
    }
    let one = PrimeBag::one();
    let two = BigRational::from_integer(2.into());
    let mut factors = Vec::with_capacity(terms as usize);
    for k in 1..=terms {
        let inv_prime = PrimeBag::prime(PrimeIndex::new(k)?).reciprocal();
        let inv_square = pbnum::pow(&inv_prime, &two, pbnum::NumberMode::Rational)?;
        // 1 - p^-2 only exists positionally: this is a conversion round trip.
        let (factor, _) = sub(&one, &inv_square)?;
        factors.push(factor);
    }
    let denominator = pbnum::mul_all(&factors)?;
    let six = PrimeBag::from_members(&[2, 1])?;
    let bag = pbnum::mul(&six, &denominator.reciprocal())?;
    pb_to_rational(&bag)
}
