//! Prime indexing and primality.
//!
//! Primes are addressed by their 1-based position in the prime sequence:
//! index 1 is 2, index 2 is 3, index 3 is 5. The [`PrimeTable`] keeps a
//! monotone, lazily extended list of primes below a hard ceiling; the free
//! functions in this module use a process-wide table with the default
//! ceiling of 2^32.

use std::fmt;
use std::sync::{OnceLock, RwLock};

use num_bigint::{BigUint, RandBigInt};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};
use crate::work::Work;

/// Default ceiling of the prime cache: every prime below 2^32 is indexable.
pub const DEFAULT_PRIME_CEILING: u64 = 1 << 32;

const INITIAL_SIEVE: u64 = 1 << 17;
const SEGMENT: u64 = 1 << 20;

/// 1-based position in the sequence of primes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PrimeIndex(u64);

impl PrimeIndex {
    pub fn new(k: u64) -> Result<Self> {
        if k == 0 {
            Err(Error::Domain("prime index 0 is not valid; indices start at 1".into()))
        } else {
            Ok(PrimeIndex(k))
        }
    }

    pub const fn get(self) -> u64 {
        self.0
    }

    /// The index of the next prime.
    pub fn succ(self) -> Self {
        PrimeIndex(self.0 + 1)
    }

    pub(crate) const fn new_unchecked(k: u64) -> Self {
        PrimeIndex(k)
    }
}

impl fmt::Display for PrimeIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

struct Sieved {
    primes: Vec<u32>,
    /// Every prime below `limit` is in `primes`.
    limit: u64,
}

/// Monotone prime cache backed by an on-demand segmented sieve.
///
/// Readers share the lock; extension takes it exclusively and only ever
/// appends, so an answer never changes once given.
pub struct PrimeTable {
    ceiling: u64,
    inner: RwLock<Sieved>,
}

impl PrimeTable {
    /// A table holding primes below `ceiling` (clamped to 2^32).
    pub fn with_ceiling(ceiling: u64) -> Self {
        let ceiling = ceiling.clamp(2, DEFAULT_PRIME_CEILING);
        let limit = INITIAL_SIEVE.min(ceiling);
        let primes = simple_sieve(limit);
        PrimeTable {
            ceiling,
            inner: RwLock::new(Sieved { primes, limit }),
        }
    }

    pub fn ceiling(&self) -> u64 {
        self.ceiling
    }

    /// Current extent of the cache: every prime below this bound is known.
    pub fn sieved_limit(&self) -> u64 {
        self.inner.read().unwrap().limit
    }

    /// Make sure every prime `<= bound` is cached.
    pub fn ensure_through(&self, bound: u64) -> Result<()> {
        if bound < self.inner.read().unwrap().limit {
            return Ok(());
        }
        if bound >= self.ceiling {
            return Err(Error::Resource(format!(
                "primes up to {bound} exceed the prime cache ceiling {}",
                self.ceiling
            )));
        }
        let mut guard = self.inner.write().unwrap();
        while guard.limit <= bound {
            let target = (bound + 1).max(guard.limit.saturating_mul(2)).min(self.ceiling);
            extend_sieve(&mut guard, target);
        }
        Ok(())
    }

    /// Run `f` over the cached primes below the current limit.
    pub fn with_primes<R>(&self, f: impl FnOnce(&[u32]) -> R) -> R {
        let guard = self.inner.read().unwrap();
        f(&guard.primes)
    }

    pub fn nth_prime(&self, k: PrimeIndex) -> Result<u64> {
        let idx = (k.get() - 1) as usize;
        {
            let guard = self.inner.read().unwrap();
            if let Some(&p) = guard.primes.get(idx) {
                return Ok(p as u64);
            }
        }
        let mut guard = self.inner.write().unwrap();
        while guard.primes.len() <= idx {
            if guard.limit >= self.ceiling {
                return Err(Error::Resource(format!(
                    "prime index {k} lies beyond the prime cache ceiling {} ({} primes)",
                    self.ceiling,
                    guard.primes.len()
                )));
            }
            let target = nth_prime_upper_bound(k.get())
                .max(guard.limit.saturating_mul(2))
                .min(self.ceiling);
            extend_sieve(&mut guard, target);
        }
        Ok(guard.primes[idx] as u64)
    }

    pub fn prime_index(&self, p: u64) -> Result<PrimeIndex> {
        if p < 2 {
            return Err(Error::NotPrime {
                value: p.to_string(),
                factor: None,
            });
        }
        if p >= self.ceiling {
            return if is_prime_u64(p) {
                Err(Error::Resource(format!(
                    "index of prime {p} lies beyond the prime cache ceiling {}",
                    self.ceiling
                )))
            } else {
                Err(Error::NotPrime {
                    value: p.to_string(),
                    factor: smallest_factor_u64(p).map(|f| f.to_string()),
                })
            };
        }
        self.ensure_through(p)?;
        let guard = self.inner.read().unwrap();
        match guard.primes.binary_search(&(p as u32)) {
            Ok(i) => Ok(PrimeIndex(i as u64 + 1)),
            Err(_) => Err(Error::NotPrime {
                value: p.to_string(),
                factor: smallest_factor_u64(p).map(|f| f.to_string()),
            }),
        }
    }
}

fn nth_prime_upper_bound(k: u64) -> u64 {
    if k < 6 {
        return 14;
    }
    let k = k as f64;
    // p_k < k (ln k + ln ln k) for k >= 6
    (k * (k.ln() + k.ln().ln())).ceil() as u64 + 1
}

fn simple_sieve(limit: u64) -> Vec<u32> {
    let n = limit as usize;
    let mut composite = vec![false; n.max(2)];
    let mut primes = Vec::new();
    for i in 2..n {
        if !composite[i] {
            primes.push(i as u32);
            let mut j = i * i;
            while j < n {
                composite[j] = true;
                j += i;
            }
        }
    }
    primes
}

/// Sieve `[sieved.limit, target)` in segments and append the primes found.
fn extend_sieve(sieved: &mut Sieved, target: u64) {
    let mut lo = sieved.limit;
    while lo < target {
        let hi = (lo + SEGMENT).min(target);
        let mut composite = vec![false; (hi - lo) as usize];
        // Base primes up to sqrt(2^32) live in the initial sieve.
        for &p in sieved.primes.iter() {
            let p = p as u64;
            if p * p >= hi {
                break;
            }
            let mut start = (p * p).max(lo.div_ceil(p) * p);
            while start < hi {
                composite[(start - lo) as usize] = true;
                start += p;
            }
        }
        let base = sieved.primes.len();
        for (off, &c) in composite.iter().enumerate() {
            let n = lo + off as u64;
            if !c && n >= 2 {
                sieved.primes.push(n as u32);
            }
        }
        debug_assert!(sieved.primes[base..].windows(2).all(|w| w[0] < w[1]));
        lo = hi;
    }
    sieved.limit = target;
}

/// The process-wide prime table.
pub fn table() -> &'static PrimeTable {
    static TABLE: OnceLock<PrimeTable> = OnceLock::new();
    TABLE.get_or_init(|| PrimeTable::with_ceiling(DEFAULT_PRIME_CEILING))
}

/// The k-th prime (1-based).
pub fn nth_prime(k: PrimeIndex) -> Result<u64> {
    table().nth_prime(k)
}

/// Inverse of [`nth_prime`].
pub fn prime_index(p: &BigUint) -> Result<PrimeIndex> {
    match p.to_u64() {
        Some(p) => table().prime_index(p),
        None => {
            if is_prime_natural(p) {
                Err(Error::Resource(format!(
                    "index of prime {p} lies beyond the prime cache ceiling {}",
                    table().ceiling()
                )))
            } else {
                Err(Error::NotPrime {
                    value: p.to_string(),
                    factor: small_factor_big(p).map(|f| f.to_string()),
                })
            }
        }
    }
}

/// The smallest prime strictly greater than the prime `p`.
pub fn prime_successor(p: &BigUint) -> Result<BigUint> {
    if !is_prime_natural(p) {
        return Err(Error::NotPrime {
            value: p.to_string(),
            factor: small_factor_big(p),
        });
    }
    let mut n = p + 1u32;
    if n.is_even() && n > BigUint::from(2u32) {
        n += 1u32;
    }
    while !is_prime_natural(&n) {
        n += 2u32;
    }
    Ok(n)
}

fn small_factor_big(n: &BigUint) -> Option<String> {
    table().with_primes(|primes| {
        primes
            .iter()
            .take(1000)
            .find(|&&p| (n % p).is_zero() && n != &BigUint::from(p))
            .map(|p| p.to_string())
    })
}

fn smallest_factor_u64(n: u64) -> Option<u64> {
    if n < 4 {
        return None;
    }
    let mut d = 2u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            return Some(d);
        }
        d += if d == 2 { 1 } else { 2 };
        if d > 1 << 20 {
            return None;
        }
    }
    None
}

/// Settings for the strong-probable-prime test used above 64 bits.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PrimalityConfig {
    /// Random bases tried; error probability is at most 4^-rounds.
    pub rounds: u32,
    pub seed: u64,
}

impl Default for PrimalityConfig {
    fn default() -> Self {
        PrimalityConfig {
            rounds: 64,
            seed: 0x0005_eed0_fb16_5eed,
        }
    }
}

const SMALL_PRIMES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// Primality of an arbitrary-precision natural.
///
/// Deterministic below 2^64 (fixed witness set); above that a seeded
/// Miller-Rabin test with the default 64 rounds (error below 2^-128).
pub fn is_prime_natural(n: &BigUint) -> bool {
    is_prime_counted(n, &PrimalityConfig::default(), &mut Work::new())
}

/// [`is_prime_natural`] with an explicit configuration, counting modular
/// multiplications in `work`.
pub fn is_prime_counted(n: &BigUint, config: &PrimalityConfig, work: &mut Work) -> bool {
    if let Some(small) = n.to_u64() {
        return is_prime_u64_counted(small, work);
    }
    if n.is_even() {
        return false;
    }
    for p in SMALL_PRIMES {
        work.tick();
        if (n % p).is_zero() {
            return false;
        }
    }
    let one = BigUint::one();
    let n_minus_1 = n - &one;
    let s = n_minus_1.trailing_zeros().unwrap_or(0);
    let d = &n_minus_1 >> s;
    let limbs = n.bits().div_ceil(64);
    let mut rng = ChaCha20Rng::seed_from_u64(config.seed);
    let two = BigUint::from(2u32);
    'witness: for _ in 0..config.rounds {
        let a = rng.gen_biguint_range(&two, &n_minus_1);
        let mut x = a.modpow(&d, n);
        work.add(d.bits() * limbs * limbs);
        if x == one || x == n_minus_1 {
            continue;
        }
        for _ in 1..s {
            x = (&x * &x) % n;
            work.add(limbs * limbs);
            if x == n_minus_1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Deterministic primality for 64-bit values.
pub fn is_prime_u64(n: u64) -> bool {
    is_prime_u64_counted(n, &mut Work::new())
}

fn is_prime_u64_counted(n: u64, work: &mut Work) -> bool {
    if n < 2 {
        return false;
    }
    for p in SMALL_PRIMES {
        work.tick();
        if n == p {
            return true;
        }
        if n.is_multiple_of(p) {
            return false;
        }
    }
    if n < 41 * 41 {
        return true;
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for a in SMALL_PRIMES {
        let mut x = pow_mod_u64(a, d, n, work);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod_u64(x, x, n);
            work.tick();
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

#[inline]
pub(crate) fn mul_mod_u64(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod_u64(mut base: u64, mut exp: u64, m: u64, work: &mut Work) -> u64 {
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod_u64(acc, base, m);
            work.tick();
        }
        base = mul_mod_u64(base, base, m);
        work.tick();
        exp >>= 1;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eratosthenes(limit: usize) -> Vec<u64> {
        let mut sieve = vec![true; limit + 1];
        sieve[0] = false;
        sieve[1] = false;
        let mut i = 2;
        while i * i <= limit {
            if sieve[i] {
                for j in (i * i..=limit).step_by(i) {
                    sieve[j] = false;
                }
            }
            i += 1;
        }
        (0..=limit).filter(|&i| sieve[i]).map(|i| i as u64).collect()
    }

    fn idx(k: u64) -> PrimeIndex {
        PrimeIndex::new(k).unwrap()
    }

    #[test]
    fn sieve_oracle_values() {
        let oracle = eratosthenes(10_000);
        assert_eq!(oracle[999], 7919);
        assert_eq!(nth_prime(idx(1)).unwrap(), 2);
        assert_eq!(nth_prime(idx(3)).unwrap(), 5);
        assert_eq!(nth_prime(idx(1000)).unwrap(), 7919);
        for (i, &p) in oracle.iter().enumerate() {
            assert_eq!(nth_prime(idx(i as u64 + 1)).unwrap(), p);
        }
    }

    #[test]
    fn successor_examples() {
        let s = |p: u64| prime_successor(&BigUint::from(p)).unwrap();
        assert_eq!(s(2), BigUint::from(3u32));
        assert_eq!(s(3), BigUint::from(5u32));
        assert_eq!(s(7907), BigUint::from(7919u32));
        assert!(matches!(
            prime_successor(&BigUint::from(8u32)),
            Err(Error::NotPrime { .. })
        ));
    }

    #[test]
    fn index_examples() {
        assert_eq!(prime_index(&BigUint::from(2u32)).unwrap(), idx(1));
        assert_eq!(prime_index(&BigUint::from(5u32)).unwrap(), idx(3));
        match prime_index(&BigUint::from(6u32)) {
            Err(Error::NotPrime { factor, .. }) => assert_eq!(factor.as_deref(), Some("2")),
            other => panic!("unexpected {other:?}"),
        }
        assert!(prime_index(&BigUint::from(1u32)).is_err());
        assert!(PrimeIndex::new(0).is_err());
    }

    #[test]
    fn primality_examples() {
        assert!(!is_prime_natural(&BigUint::from(1u32)));
        assert!(is_prime_natural(&BigUint::from(7919u32)));
        assert!(!is_prime_natural(&BigUint::from(7917u32)));
        assert_eq!(7917 % 3, 0);
        // Carmichael and strong pseudoprimes to small bases
        for n in [561u64, 1105, 1729, 2047, 3215031751, 3825123056546413051] {
            assert!(!is_prime_u64(n), "{n}");
        }
        // 2^89 - 1 and 2^127 - 1 are Mersenne primes; 2^67 - 1 is not
        let m = |e: u32| (BigUint::one() << e) - 1u32;
        assert!(is_prime_natural(&m(89)));
        assert!(is_prime_natural(&m(127)));
        assert!(!is_prime_natural(&m(67)));
    }

    #[test]
    fn primality_matches_sieve() {
        let oracle = eratosthenes(20_000);
        let mut it = oracle.iter().peekable();
        for n in 0..=20_000u64 {
            let expected = it.peek().is_some_and(|&&p| p == n);
            if expected {
                it.next();
            }
            assert_eq!(is_prime_u64(n), expected, "{n}");
        }
    }

    #[test]
    fn table_invariants_first_2000() {
        for k in 1..=2000u64 {
            let p = nth_prime(idx(k)).unwrap();
            let next = nth_prime(idx(k + 1)).unwrap();
            assert!(is_prime_u64(p));
            assert_eq!(table().prime_index(p).unwrap(), idx(k));
            assert_eq!(prime_successor(&BigUint::from(p)).unwrap(), BigUint::from(next));
            assert!(next < 2 * p, "Bertrand fails at {p}");
        }
    }

    #[test]
    fn ceiling_is_enforced() {
        let t = PrimeTable::with_ceiling(100);
        assert_eq!(t.nth_prime(idx(25)).unwrap(), 97);
        assert!(matches!(t.nth_prime(idx(26)), Err(Error::Resource(_))));
        assert!(matches!(t.prime_index(101), Err(Error::Resource(_))));
        assert!(matches!(t.prime_index(102), Err(Error::NotPrime { .. })));
    }

    #[test]
    fn extension_is_monotone() {
        let t = PrimeTable::with_ceiling(1 << 24);
        let first: Vec<u64> = (1..=500).map(|k| t.nth_prime(idx(k)).unwrap()).collect();
        t.ensure_through(3_000_000).unwrap();
        let again: Vec<u64> = (1..=500).map(|k| t.nth_prime(idx(k)).unwrap()).collect();
        assert_eq!(first, again);
        assert_eq!(t.nth_prime(idx(200_000)).unwrap(), 2_750_159);
    }
}
