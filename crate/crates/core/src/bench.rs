//! Deterministic scaling measurements.
//!
//! Every measurement records an operation counter (entry visits, digit
//! operations, modular multiplications, rho iterations) alongside wall time.
//! Counters depend only on the seed, so slopes fitted on them are stable.
//! Wall time is recorded for reference and never asserted on.

use std::io::{self, Write};
use std::time::Instant;

use num_bigint::{BigUint, RandBigInt};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::altreps::{self, DecBag, MulBag};
use crate::convert::{self, FactorConfig};
use crate::error::{Error, Result};
use crate::pbnum::{self, PrimeBag};
use crate::primes::{self, PrimalityConfig, PrimeIndex};
use crate::work::Work;

/// Largest operand size accepted by any ladder.
pub const MAX_SIZE: u64 = 1 << 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BenchOp {
    Mul,
    Gcd,
    Factor,
    Primality,
    Add,
    NaturalToPb,
    /// Busy loop of `size^exponent` steps, for checking the fit itself.
    Calibration,
}

impl BenchOp {
    pub fn name(self) -> &'static str {
        match self {
            BenchOp::Mul => "mul",
            BenchOp::Gcd => "gcd",
            BenchOp::Factor => "factor",
            BenchOp::Primality => "primality",
            BenchOp::Add => "add",
            BenchOp::NaturalToPb => "natural_to_pb",
            BenchOp::Calibration => "calibration",
        }
    }

    /// Representations that implement this operation.
    pub fn representations(self) -> &'static [Representation] {
        use Representation::*;
        match self {
            BenchOp::Mul => &[Pb, Positional, DecBag, MulBag],
            BenchOp::Gcd | BenchOp::Factor | BenchOp::Primality => &[Pb, Positional],
            BenchOp::Add => &[Pb, Positional, DecBag],
            BenchOp::NaturalToPb => &[Positional],
            BenchOp::Calibration => &[Pb, Positional, DecBag, MulBag],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Representation {
    Pb,
    Positional,
    #[serde(rename = "decbag")]
    DecBag,
    #[serde(rename = "mulbag")]
    MulBag,
}

impl Representation {
    pub fn name(self) -> &'static str {
        match self {
            Representation::Pb => "pb",
            Representation::Positional => "positional",
            Representation::DecBag => "decbag",
            Representation::MulBag => "mulbag",
        }
    }
}

/// How operands of size `n` are drawn.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Distribution {
    /// `n` entries (bags) with random distinct indices; for positional
    /// operands, an `n`-digit natural.
    RandomPb,
    /// Uniform `n`-digit naturals, converted to the representation untimed.
    RandomNDigitNatural,
    /// `n`-digit semiprimes with balanced factors.
    WorstCasePrime,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchSpec {
    pub op: BenchOp,
    pub repr: Representation,
    pub sizes: Vec<u64>,
    pub repetitions: u32,
    pub distribution: Distribution,
    pub seed: u64,
    /// Cost exponent for [`BenchOp::Calibration`].
    #[serde(default)]
    pub exponent: Option<f64>,
    /// Rho iteration ceiling for conversions.
    #[serde(default)]
    pub work_ceiling: Option<u64>,
}

impl BenchSpec {
    pub fn new(op: BenchOp, repr: Representation, sizes: Vec<u64>, distribution: Distribution, seed: u64) -> Self {
        BenchSpec {
            op,
            repr,
            sizes,
            repetitions: 5,
            distribution,
            seed,
            exponent: None,
            work_ceiling: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.sizes.is_empty() {
            return Err(Error::Domain("size ladder is empty".into()));
        }
        if self.sizes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Domain("size ladder must be strictly increasing".into()));
        }
        if self.sizes[0] == 0 {
            return Err(Error::Domain("sizes must be positive".into()));
        }
        if self.repetitions < 5 {
            return Err(Error::Domain(format!(
                "at least 5 repetitions per size are required, got {}",
                self.repetitions
            )));
        }
        if !self.op.representations().contains(&self.repr) {
            return Err(Error::Domain(format!(
                "{} is not implemented for the {} representation",
                self.op.name(),
                self.repr.name()
            )));
        }
        if self.op == BenchOp::Calibration && self.exponent.is_none_or(|e| !(0.0..=4.0).contains(&e)) {
            return Err(Error::Domain("calibration needs an exponent in [0, 4]".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SizePoint {
    pub size: u64,
    pub median_counter: f64,
    /// Median absolute deviation of the counter.
    pub counter_mad: f64,
    pub median_wall_ns: u64,
    /// Median decimal digit count of the operand values.
    pub value_digits: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Series {
    pub op: BenchOp,
    pub repr: Representation,
    pub distribution: Distribution,
    pub points: Vec<SizePoint>,
    /// Least-squares slope of ln(counter) against ln(size).
    pub slope: Option<f64>,
    pub r2: Option<f64>,
    /// Set when a size hit a resource ceiling; later sizes were skipped.
    pub incomplete: bool,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct BenchReport {
    pub series: Vec<Series>,
}

impl BenchReport {
    pub fn series_for(&self, repr: Representation) -> Option<&Series> {
        self.series.iter().find(|s| s.repr == repr)
    }

    pub fn is_complete(&self) -> bool {
        self.series.iter().all(|s| !s.incomplete)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    JsonLines,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "jsonl" | "json-lines" => Ok(ReportFormat::JsonLines),
            other => Err(Error::parse(0, format!("unknown report format {other:?}"))),
        }
    }
}

/// Measure one operation on one representation across the size ladder.
pub fn run_bench(spec: &BenchSpec) -> Result<BenchReport> {
    spec.validate()?;
    let mut series = Series {
        op: spec.op,
        repr: spec.repr,
        distribution: spec.distribution,
        points: Vec::new(),
        slope: None,
        r2: None,
        incomplete: false,
        notes: Vec::new(),
    };
    'sizes: for &size in &spec.sizes {
        if size > MAX_SIZE {
            series.incomplete = true;
            series.notes.push(format!("size {size} exceeds the ceiling {MAX_SIZE}"));
            break;
        }
        let mut counters = Vec::with_capacity(spec.repetitions as usize);
        let mut walls = Vec::with_capacity(spec.repetitions as usize);
        let mut digits = Vec::with_capacity(spec.repetitions as usize);
        for rep in 0..spec.repetitions {
            let mut rng = ChaCha20Rng::seed_from_u64(mix(spec.seed, size, rep as u64));
            match measure(spec, size, &mut rng) {
                Ok(m) => {
                    counters.push(m.counter as f64);
                    walls.push(m.wall_ns);
                    digits.push(m.value_digits);
                }
                Err(e) if e.class() == crate::error::ErrorClass::Resource => {
                    series.incomplete = true;
                    series.notes.push(format!("size {size}: {e}"));
                    break 'sizes;
                }
                Err(e) => return Err(e),
            }
        }
        let median_counter = median_f64(&mut counters);
        let mut deviations: Vec<f64> = counters.iter().map(|c| (c - median_counter).abs()).collect();
        series.points.push(SizePoint {
            size,
            median_counter,
            counter_mad: median_f64(&mut deviations),
            median_wall_ns: median_u64(&mut walls),
            value_digits: median_u64(&mut digits),
        });
    }
    let xs: Vec<f64> = series.points.iter().map(|p| (p.size as f64).ln()).collect();
    let ys: Vec<f64> = series.points.iter().map(|p| p.median_counter.max(1.0).ln()).collect();
    if let Some((slope, r2)) = fit_loglog(&xs, &ys) {
        series.slope = Some(slope);
        series.r2 = Some(r2);
    }
    Ok(BenchReport { series: vec![series] })
}

/// One series per representation that implements `op`, on a shared ladder.
pub fn compare_representations(op: BenchOp, sizes: &[u64], seed: u64) -> Result<BenchReport> {
    let reprs = op.representations();
    if reprs.len() < 2 {
        return Err(Error::Domain(format!("{} has only one representation", op.name())));
    }
    let mut report = BenchReport::default();
    for &repr in reprs {
        let distribution = match (op, repr) {
            (BenchOp::Add, Representation::Pb) => Distribution::RandomNDigitNatural,
            (BenchOp::Factor, Representation::Positional) => Distribution::WorstCasePrime,
            _ => Distribution::RandomPb,
        };
        let mut spec = BenchSpec::new(op, repr, sizes.to_vec(), distribution, seed);
        if op == BenchOp::Calibration {
            spec.exponent = Some(1.0);
        }
        report.series.extend(run_bench(&spec)?.series);
    }
    Ok(report)
}

/// Write one row per (series, size) in the requested format.
pub fn export_report<W: Write>(report: &BenchReport, format: ReportFormat, out: &mut W) -> io::Result<()> {
    #[derive(Serialize)]
    struct Row<'a> {
        op: &'a str,
        repr: &'a str,
        size: u64,
        counter: f64,
        wall_ns: u64,
        slope: Option<f64>,
        r2: Option<f64>,
    }
    if format == ReportFormat::Csv {
        writeln!(out, "op,repr,size,counter,wall_ns,slope,r2")?;
    }
    for s in &report.series {
        for p in &s.points {
            let row = Row {
                op: s.op.name(),
                repr: s.repr.name(),
                size: p.size,
                counter: p.median_counter,
                wall_ns: p.median_wall_ns,
                slope: s.slope,
                r2: s.r2,
            };
            match format {
                ReportFormat::Csv => writeln!(
                    out,
                    "{},{},{},{},{},{},{}",
                    row.op,
                    row.repr,
                    row.size,
                    row.counter,
                    row.wall_ns,
                    opt(row.slope),
                    opt(row.r2)
                )?,
                ReportFormat::JsonLines => {
                    serde_json::to_writer(&mut *out, &row).map_err(io::Error::other)?;
                    writeln!(out)?;
                }
            }
        }
    }
    Ok(())
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| format!("{v:.6}")).unwrap_or_default()
}

/// Least-squares fit of `y = a + b x`; returns `(b, r^2)`.
pub fn fit_loglog(xs: &[f64], ys: &[f64]) -> Option<(f64, f64)> {
    let n = xs.len();
    if n < 2 || n != ys.len() {
        return None;
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    // A perfectly flat series is explained exactly by its mean.
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    Some((slope, r2))
}

fn median_f64(xs: &mut [f64]) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        (xs[n / 2 - 1] + xs[n / 2]) / 2.0
    }
}

fn median_u64(xs: &mut [u64]) -> u64 {
    xs.sort_unstable();
    xs[(xs.len() - 1) / 2]
}

fn mix(seed: u64, size: u64, rep: u64) -> u64 {
    let mut z = seed ^ size.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ rep.wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

struct Measurement {
    counter: u64,
    wall_ns: u64,
    value_digits: u64,
}

fn digits_of(n: &BigUint) -> u64 {
    n.to_str_radix(10).len() as u64
}

fn timed<T>(f: impl FnOnce() -> Result<T>) -> Result<(T, u64)> {
    let start = Instant::now();
    let out = f()?;
    Ok((out, start.elapsed().as_nanos() as u64))
}

fn measure(spec: &BenchSpec, n: u64, rng: &mut ChaCha20Rng) -> Result<Measurement> {
    use BenchOp as Op;
    use Representation as R;
    let factor_config = FactorConfig {
        work_ceiling: spec.work_ceiling.unwrap_or(FactorConfig::default().work_ceiling),
        seed: rng.gen(),
        ..FactorConfig::default()
    };
    let mut work = Work::new();
    let (wall_ns, value_digits) = match (spec.op, spec.repr) {
        (Op::Calibration, _) => {
            let steps = (n as f64).powf(spec.exponent.unwrap_or(1.0)).round() as u64;
            let ((), ns) = timed(|| {
                for _ in 0..steps {
                    work.tick();
                    std::hint::black_box(&work);
                }
                Ok(())
            })?;
            (ns, 0)
        }
        (Op::Mul | Op::Gcd, R::Pb) => {
            let a = operand_pb(spec.distribution, n, rng)?;
            let b = operand_pb(spec.distribution, n, rng)?;
            let (_, ns) = timed(|| match spec.op {
                Op::Mul => pbnum::mul_counted(&a, &b, &mut work),
                _ => pbnum::gcd_counted(&a, &b, &mut work),
            })?;
            (ns, pb_digits(&a))
        }
        (Op::Factor, R::Pb) => {
            let a = operand_pb(spec.distribution, n, rng)?;
            let (_, ns) = timed(|| pbnum::factor_pb_counted(&a, &mut work))?;
            (ns, pb_digits(&a))
        }
        (Op::Primality, R::Pb) => {
            let a = operand_pb(spec.distribution, n, rng)?;
            let (_, ns) = timed(|| pbnum::is_prime_pb_counted(&a, &mut work))?;
            (ns, pb_digits(&a))
        }
        (Op::Add, R::Pb) => {
            let x = operand_natural(spec.distribution, n, rng);
            let y = operand_natural(spec.distribution, n, rng);
            let (a, _) = convert::natural_to_pb_with(&x, &factor_config)?;
            let (b, _) = convert::natural_to_pb_with(&y, &factor_config)?;
            let ((_, receipt), ns) = timed(|| convert::add(&a, &b))?;
            work.add(receipt.total_work());
            (ns, digits_of(&x))
        }
        (Op::Mul | Op::Gcd | Op::Add, R::Positional) => {
            let x = operand_natural(spec.distribution, n, rng);
            let y = operand_natural(spec.distribution, n, rng);
            let (xd, yd) = (to_digits(&x), to_digits(&y));
            let (_, ns) = timed(|| {
                match spec.op {
                    Op::Mul => drop(schoolbook_mul(&xd, &yd, &mut work)),
                    Op::Add => drop(schoolbook_add(&xd, &yd, &mut work)),
                    _ => drop(euclid_gcd(&x, &y, &mut work)),
                }
                Ok(())
            })?;
            (ns, digits_of(&x))
        }
        (Op::Factor, R::Positional) => {
            let x = operand_natural(spec.distribution, n, rng);
            let mut receipt = convert::ConversionReceipt::default();
            let (_, ns) = timed(|| convert::factorize(&x, &factor_config, &mut receipt))?;
            work.add(receipt.total_work());
            (ns, digits_of(&x))
        }
        (Op::NaturalToPb, R::Positional) => {
            let x = operand_natural(spec.distribution, n, rng);
            let ((_, receipt), ns) = timed(|| convert::natural_to_pb_with(&x, &factor_config))?;
            work.add(receipt.total_work());
            (ns, digits_of(&x))
        }
        (Op::Primality, R::Positional) => {
            let x = operand_natural(spec.distribution, n, rng);
            let config = PrimalityConfig { seed: rng.gen(), ..PrimalityConfig::default() };
            let (_, ns) = timed(|| Ok(primes::is_prime_counted(&x, &config, &mut work)))?;
            (ns, digits_of(&x))
        }
        (Op::Mul | Op::Add, R::DecBag) => {
            let a = operand_decbag(spec.distribution, n, rng);
            let b = operand_decbag(spec.distribution, n, rng);
            let (_, ns) = timed(|| {
                match spec.op {
                    Op::Mul => drop(altreps::decbag_mul_counted(&a, &b, &mut work)),
                    _ => drop(altreps::decbag_add_counted(&a, &b, &mut work)),
                }
                Ok(())
            })?;
            (ns, digits_of(&altreps::decbag_value(&a)))
        }
        (Op::Mul, R::MulBag) => {
            let a = operand_mulbag(n, rng)?;
            let b = operand_mulbag(n, rng)?;
            let (_, ns) = timed(|| Ok(altreps::mulbag_mul_counted(&a, &b, &mut work)))?;
            (ns, digits_of(&altreps::mulbag_value(&a)))
        }
        (op, repr) => {
            return Err(Error::Domain(format!("{} is not implemented for {}", op.name(), repr.name())))
        }
    };
    Ok(Measurement { counter: work.steps, wall_ns, value_digits })
}

fn pb_digits(a: &PrimeBag) -> u64 {
    // ln(value) / ln(10), from the entries; bags here are natural.
    let ln: f64 = a
        .entries()
        .iter()
        .map(|(k, m)| {
            let p = primes::nth_prime(*k).unwrap_or(2) as f64;
            let e: f64 = num_traits::ToPrimitive::to_f64(m.value()).unwrap_or(1.0);
            e * p.ln()
        })
        .sum();
    (ln / std::f64::consts::LN_10).floor() as u64 + 1
}

/// A natural bag of `n` distinct random indices with multiplicities 1..=3.
pub fn random_pb(n: u64, rng: &mut impl Rng) -> Result<PrimeBag> {
    let span = (4 * n).max(64);
    let mut picked = std::collections::BTreeSet::new();
    while (picked.len() as u64) < n {
        picked.insert(rng.gen_range(1..=span));
    }
    let entries = picked
        .into_iter()
        .map(|k| {
            let m = BigRational::from_integer(rng.gen_range(1..=3u32).into());
            Ok((PrimeIndex::new(k)?, m))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PrimeBag::from_entries(entries))
}

/// Uniform natural with exactly `n` decimal digits.
pub fn random_natural(n: u64, rng: &mut impl Rng) -> BigUint {
    let ten = BigUint::from(10u32);
    let lo = ten.pow(n as u32 - 1);
    let hi = &lo * &ten;
    rng.gen_biguint_range(&lo, &hi)
}

/// A semiprime of about `n` digits with factors of about `n/2` digits each.
pub fn random_semiprime(n: u64, rng: &mut impl Rng) -> BigUint {
    let lo_digits = (n / 2).max(1);
    let hi_digits = (n - lo_digits).max(1);
    random_prime(lo_digits, rng) * random_prime(hi_digits, rng)
}

fn random_prime(digits: u64, rng: &mut impl Rng) -> BigUint {
    let mut p = random_natural(digits, rng);
    if p.is_even() {
        p += 1u32;
    }
    loop {
        if primes::is_prime_natural(&p) {
            return p;
        }
        p += 2u32;
    }
}

fn operand_natural(distribution: Distribution, n: u64, rng: &mut impl Rng) -> BigUint {
    match distribution {
        Distribution::WorstCasePrime => random_semiprime(n, rng),
        _ => random_natural(n, rng),
    }
}

fn operand_pb(distribution: Distribution, n: u64, rng: &mut impl Rng) -> Result<PrimeBag> {
    match distribution {
        Distribution::RandomPb => random_pb(n, rng),
        _ => {
            // Encoding is setup, not part of the measured operation.
            let x = operand_natural(distribution, n, rng);
            Ok(convert::natural_to_pb(&x)?.0)
        }
    }
}

fn operand_decbag(distribution: Distribution, n: u64, rng: &mut impl Rng) -> DecBag {
    match distribution {
        Distribution::RandomPb => {
            let members: Vec<u64> = (0..n).map(|_| rng.gen_range(0..n)).collect();
            DecBag::from_members(&members)
        }
        _ => DecBag::from_natural(&operand_natural(distribution, n, rng)),
    }
}

fn operand_mulbag(n: u64, rng: &mut impl Rng) -> Result<MulBag> {
    MulBag::new((0..n).map(|_| rng.gen_range(2..=1000)).collect())
}

/// Little-endian decimal digits.
pub fn to_digits(n: &BigUint) -> Vec<u8> {
    n.to_radix_le(10)
}

pub fn from_digits(d: &[u8]) -> BigUint {
    BigUint::from_radix_le(d, 10).unwrap_or_default()
}

/// Digit-serial addition; one step per digit position.
pub fn schoolbook_add(a: &[u8], b: &[u8], work: &mut Work) -> Vec<u8> {
    let mut out = Vec::with_capacity(a.len().max(b.len()) + 1);
    let mut carry = 0u8;
    for i in 0..a.len().max(b.len()) {
        work.tick();
        let s = a.get(i).unwrap_or(&0) + b.get(i).unwrap_or(&0) + carry;
        out.push(s % 10);
        carry = s / 10;
    }
    if carry > 0 {
        out.push(carry);
    }
    out
}

/// Digit-by-digit long multiplication; one step per digit product.
pub fn schoolbook_mul(a: &[u8], b: &[u8], work: &mut Work) -> Vec<u8> {
    let mut acc = vec![0u32; a.len() + b.len()];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            work.tick();
            acc[i + j] += x as u32 * y as u32;
        }
        // Keep cells small so they cannot overflow on long operands.
        let mut carry = 0;
        for cell in acc.iter_mut().skip(i) {
            let v = *cell + carry;
            *cell = v % 10;
            carry = v / 10;
        }
    }
    let mut out: Vec<u8> = acc.into_iter().map(|c| c as u8).collect();
    while out.len() > 1 && out.last() == Some(&0) {
        out.pop();
    }
    out
}

/// Euclid's algorithm charged at schoolbook long-division cost: each
/// remainder step costs `digits(b) * (digits(a) - digits(b) + 1)`.
pub fn euclid_gcd(a: &BigUint, b: &BigUint, work: &mut Work) -> BigUint {
    let (mut a, mut b) = (a.clone(), b.clone());
    if a < b {
        std::mem::swap(&mut a, &mut b);
    }
    while !b.is_zero() {
        let (da, db) = (digits_of(&a), digits_of(&b));
        work.add(db * (da - db + 1));
        let r = &a % &b;
        a = std::mem::replace(&mut b, r);
    }
    a
}
