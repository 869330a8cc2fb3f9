//! Prime bags: numbers as multisets of prime indices.
//!
//! The number 12 is the bag `{2,1,1}`: prime index 2 (the prime 3) once and
//! prime index 1 (the prime 2) twice. In this representation multiplication,
//! division, gcd, exponentiation, primality and factorization are cheap
//! multiset operations, while addition and ordering need a detour through
//! positional arithmetic.

pub mod altreps;
pub mod bench;
pub mod convert;
pub mod error;
pub mod order;
pub mod partition;
pub mod pbnum;
pub mod primes;
pub mod work;

pub use altreps::{
    decbag_add, decbag_mul, decbag_normalize, decbag_sub, decbag_value, mulbag_mul, mulbag_to_pb,
    mulbag_value, DecBag, MulBag,
};
pub use bench::{compare_representations, export_report, run_bench, BenchReport, BenchSpec};
pub use convert::{
    add, euler_pi_squared, natural_to_pb, pb_to_rational, rational_to_pb, sub, ConversionReceipt,
    ExactRational, FactorConfig,
};
pub use error::{Error, ErrorClass, Result};
pub use order::{compare_signed, exact_compare, log_value, partial_compare, LogEnclosure, OrderResult};
pub use partition::{
    enumerate_weight, generate_ordered, hr_estimate, partition_count, weight, Derivation, Partition,
};
pub use pbnum::{
    div, div_exact, factor_pb, gcd, is_prime_pb, lcm, mul, pow, validate, BracketTree, DivMode,
    Multiplicity, NumberClass, NumberMode, PrimeBag, Quotient, Sign, Special, Unit,
};
pub use primes::{is_prime_natural, nth_prime, prime_index, prime_successor, PrimeIndex};
pub use work::Work;
