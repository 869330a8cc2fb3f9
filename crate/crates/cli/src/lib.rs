//! The `pb` command line.
//!
//! [`dispatch`] maps an argument vector to a [`CommandOutcome`] without
//! touching the process, so the binary is a thin wrapper and tests drive the
//! exact same code path.

use std::fmt::Write as _;
use std::fs;

use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{Signed, Zero};
use serde_json::{json, Value};

use primebag::bench::{self, BenchSpec, ReportFormat};
use primebag::convert::{self, ConversionReceipt, ExactRational};
use primebag::order::{self, LogEnclosure, OrderResult};
use primebag::partition;
use primebag::pbnum::{self, NumberMode, PrimeBag, Special, Unit};
use primebag::{altreps, Error, ErrorClass};

pub mod expr;

pub const EXIT_OK: i32 = 0;
pub const EXIT_DOMAIN: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;
pub const EXIT_PARSE: i32 = 4;

/// Largest `--digits` accepted by [`render_decimal`].
pub const MAX_DIGITS: usize = 10_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CommandOutcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

#[derive(Parser, Debug)]
#[command(name = "pb", version, about = "Prime-bag calculator", disable_help_subcommand = true)]
struct Cli {
    /// Emit exactly one JSON document on standard output.
    #[arg(long, global = true)]
    json: bool,
    /// Domain gate for operands and results.
    #[arg(long, global = true, value_enum, default_value_t = ModeArg::Rational)]
    mode: ModeArg,
    /// Show conversion receipts and other diagnostics.
    #[arg(long, short, global = true)]
    verbose: bool,
    /// Decimal digits after the point in rendered values.
    #[arg(long, global = true, default_value_t = 12)]
    digits: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Natural,
    Rational,
    Extended,
}

impl From<ModeArg> for NumberMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Natural => NumberMode::Natural,
            ModeArg::Rational => NumberMode::Rational,
            ModeArg::Extended => NumberMode::Extended,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate an expression of PB literals with + - * / ^ and parentheses.
    Eval {
        #[arg(allow_hyphen_values = true)]
        expr: String,
    },
    /// Convert a number (n, -n, a/b) to a PB, or a PB literal to its value.
    Convert {
        #[arg(allow_hyphen_values = true)]
        value: String,
    },
    /// Prime factorization of a PB or a positive natural.
    Factor {
        #[arg(allow_hyphen_values = true)]
        value: String,
    },
    /// Primality of a PB or a natural.
    Isprime {
        #[arg(allow_hyphen_values = true)]
        value: String,
    },
    /// Greatest common divisor: per-index minimum.
    Gcd {
        #[arg(allow_hyphen_values = true)]
        a: String,
        #[arg(allow_hyphen_values = true)]
        b: String,
    },
    /// Least common multiple: per-index maximum.
    Lcm {
        #[arg(allow_hyphen_values = true)]
        a: String,
        #[arg(allow_hyphen_values = true)]
        b: String,
    },
    /// Compare with the structural rules and exactly.
    Cmp {
        #[arg(allow_hyphen_values = true)]
        a: String,
        #[arg(allow_hyphen_values = true)]
        b: String,
    },
    /// Every PB of weight n, one per partition of n.
    Partitions { n: u64 },
    /// Truncated Euler product for pi^2 over the first K primes.
    Pi2 { terms: u64 },
    /// Powers-of-ten bags: add | sub | mul | normalize | value.
    Decbag {
        op: String,
        a: String,
        b: Option<String>,
    },
    /// Integer-factor bags: mul | value | topb.
    Mulbag {
        op: String,
        a: String,
        b: Option<String>,
    },
    /// Run a benchmark described by a JSON spec file.
    Bench {
        spec: String,
        /// Write the report here instead of standard output.
        #[arg(long)]
        out: Option<String>,
        #[arg(long, default_value = "csv")]
        format: String,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Eval { .. } => "eval",
            Command::Convert { .. } => "convert",
            Command::Factor { .. } => "factor",
            Command::Isprime { .. } => "isprime",
            Command::Gcd { .. } => "gcd",
            Command::Lcm { .. } => "lcm",
            Command::Cmp { .. } => "cmp",
            Command::Partitions { .. } => "partitions",
            Command::Pi2 { .. } => "pi2",
            Command::Decbag { .. } => "decbag",
            Command::Mulbag { .. } => "mulbag",
            Command::Bench { .. } => "bench",
        }
    }

    fn inputs(&self) -> Vec<String> {
        match self {
            Command::Eval { expr } => vec![expr.clone()],
            Command::Convert { value } | Command::Factor { value } | Command::Isprime { value } => {
                vec![value.clone()]
            }
            Command::Gcd { a, b } | Command::Lcm { a, b } | Command::Cmp { a, b } => vec![a.clone(), b.clone()],
            Command::Partitions { n } => vec![n.to_string()],
            Command::Pi2 { terms } => vec![terms.to_string()],
            Command::Decbag { op, a, b } | Command::Mulbag { op, a, b } => {
                let mut v = vec![op.clone(), a.clone()];
                v.extend(b.clone());
                v
            }
            Command::Bench { spec, .. } => vec![spec.clone()],
        }
    }
}

/// What a command produced: human text and the JSON `result`.
struct Output {
    text: String,
    result: Value,
    receipts: Vec<ConversionReceipt>,
    diagnostics: Vec<String>,
}

impl Output {
    fn new(text: impl Into<String>, result: Value) -> Self {
        Output {
            text: text.into(),
            result,
            receipts: Vec::new(),
            diagnostics: Vec::new(),
        }
    }
}

struct Ctx {
    mode: NumberMode,
    verbose: bool,
    digits: usize,
}

pub fn exit_code(e: &Error) -> i32 {
    match e.class() {
        ErrorClass::Domain => EXIT_DOMAIN,
        ErrorClass::Resource => EXIT_RESOURCE,
        ErrorClass::Parse => EXIT_PARSE,
    }
}

/// Run one invocation; `argv[0]` is the program name.
pub fn dispatch<I, S>(argv: I) -> CommandOutcome
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => CommandOutcome {
                    code: EXIT_OK,
                    stdout: text,
                    stderr: String::new(),
                },
                _ => CommandOutcome {
                    code: EXIT_PARSE,
                    stdout: String::new(),
                    stderr: text,
                },
            };
        }
    };
    let ctx = Ctx {
        mode: cli.mode.into(),
        verbose: cli.verbose,
        digits: cli.digits,
    };
    let outcome = if ctx.digits > MAX_DIGITS {
        Err(Error::Domain(format!("--digits must be at most {MAX_DIGITS}")))
    } else {
        run(&cli.command, &ctx)
    };
    let name = cli.command.name();
    let inputs = cli.command.inputs();
    match outcome {
        Ok(out) => {
            let stdout = if cli.json {
                let mut doc = json!({
                    "command": name,
                    "inputs": inputs,
                    "result": out.result,
                    "diagnostics": out.diagnostics,
                });
                if !out.receipts.is_empty() {
                    doc["receipts"] = serde_json::to_value(&out.receipts).unwrap_or(Value::Null);
                }
                format!("{doc}\n")
            } else {
                let mut s = out.text;
                if ctx.verbose {
                    for r in &out.receipts {
                        let _ = writeln!(s, "receipt: {}", receipt_line(r));
                    }
                }
                s
            };
            let stderr = if cli.json || out.diagnostics.is_empty() {
                String::new()
            } else {
                out.diagnostics.iter().map(|d| format!("{d}\n")).collect()
            };
            CommandOutcome {
                code: EXIT_OK,
                stdout,
                stderr,
            }
        }
        Err(e) => {
            let stdout = if cli.json {
                let doc = json!({
                    "command": name,
                    "inputs": inputs,
                    "result": Value::Null,
                    "diagnostics": [e.to_string()],
                });
                format!("{doc}\n")
            } else {
                String::new()
            };
            CommandOutcome {
                code: exit_code(&e),
                stdout,
                stderr: format!("pb: {e}\n"),
            }
        }
    }
}

fn receipt_line(r: &ConversionReceipt) -> String {
    format!(
        "input_size={} trial_divisions={} rho_iterations={} primality_tests={} index_lookups={} evaluation_limb_ops={} total={}",
        r.input_size,
        r.trial_divisions,
        r.rho_iterations,
        r.primality_tests,
        r.index_lookups,
        r.evaluation_limb_ops,
        r.total_work()
    )
}

fn run(cmd: &Command, ctx: &Ctx) -> primebag::Result<Output> {
    match cmd {
        Command::Eval { expr } => cmd_eval(expr, ctx),
        Command::Convert { value } => cmd_convert(value, ctx),
        Command::Factor { value } => cmd_factor(value),
        Command::Isprime { value } => cmd_isprime(value),
        Command::Gcd { a, b } => cmd_gcd_lcm(a, b, true, ctx),
        Command::Lcm { a, b } => cmd_gcd_lcm(a, b, false, ctx),
        Command::Cmp { a, b } => cmd_cmp(a, b, ctx),
        Command::Partitions { n } => cmd_partitions(*n),
        Command::Pi2 { terms } => cmd_pi2(*terms, ctx),
        Command::Decbag { op, a, b } => cmd_decbag(op, a, b.as_deref()),
        Command::Mulbag { op, a, b } => cmd_mulbag(op, a, b.as_deref()),
        Command::Bench { spec, out, format } => cmd_bench(spec, out.as_deref(), format, ctx),
    }
}

fn looks_like_pb(s: &str) -> bool {
    let t = s.trim().trim_start_matches('-').trim_start();
    let t = t.strip_prefix('i').unwrap_or(t).trim_start();
    t.starts_with('{') || s.trim().trim_start_matches('-') == "inf"
}

/// A PB literal, or a positional number converted to one.
fn operand(s: &str, receipts: &mut Vec<ConversionReceipt>) -> primebag::Result<PrimeBag> {
    if looks_like_pb(s) {
        return pbnum::validate(s);
    }
    let q = parse_number(s)?;
    let (bag, receipt) = convert::rational_to_pb(&q)?;
    receipts.push(receipt);
    Ok(bag)
}

/// `n`, `-n`, `a/b` or a terminating decimal such as `0.25`.
pub fn parse_number(s: &str) -> primebag::Result<ExactRational> {
    let t = s.trim();
    let bad = || Error::Parse {
        offset: 0,
        message: format!("{t:?} is neither a PB literal nor a number"),
    };
    if let Some((int, frac)) = t.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let negative = int.starts_with('-');
        let whole: BigInt = if int.is_empty() || int == "-" {
            BigInt::zero()
        } else {
            int.parse().map_err(|_| bad())?
        };
        let frac_n: BigInt = frac.parse().map_err(|_| bad())?;
        let scale = BigInt::from(10u32).pow(frac.len() as u32);
        let magnitude = whole.abs() * &scale + frac_n;
        let numer = if negative { -magnitude } else { magnitude };
        return Ok(ExactRational::new(numer, scale));
    }
    let q: ExactRational = t.parse().map_err(|_| bad())?;
    Ok(q)
}

/// Exact value and truncated decimal expansion: "1/3 = 0.33..", "1/4 = 0.25", "6".
pub fn render_decimal(q: &ExactRational, digits: usize) -> String {
    if q.is_integer() {
        return q.numer().to_string();
    }
    format!("{} = {}", q, decimal_expansion(q, digits))
}

/// The decimal digits of `q` truncated after `digits` places, ".." when cut.
pub fn decimal_expansion(q: &ExactRational, digits: usize) -> String {
    let mut s = String::new();
    if q.is_negative() {
        s.push('-');
    }
    let numer = q.numer().magnitude();
    let denom = q.denom().magnitude();
    let (int, mut rem) = numer.div_rem(denom);
    s.push_str(&int.to_string());
    if rem.is_zero() {
        return s;
    }
    s.push('.');
    let ten = BigUint::from(10u32);
    for _ in 0..digits {
        rem *= &ten;
        let (d, r) = rem.div_rem(denom);
        s.push_str(&d.to_string());
        rem = r;
        if rem.is_zero() {
            return s;
        }
    }
    s.push_str("..");
    s
}

/// Human rendering of a bag's value.
fn value_text(bag: &PrimeBag, digits: usize) -> String {
    match bag.special() {
        Special::Zero => return "0".into(),
        Special::Infinity => return "inf".into(),
        Special::Finite => {}
    }
    let real = bag.clone().with_unit(Unit::Real);
    let prefix = if bag.unit() == Unit::Imaginary { "i*" } else { "" };
    match convert::pb_to_rational(&real) {
        Ok(q) => {
            let r = render_decimal(&q, digits);
            if prefix.is_empty() {
                r
            } else if q.is_negative() {
                format!("-i*({})", render_decimal(&-q, digits))
            } else {
                format!("i*({r})")
            }
        }
        Err(_) => approx_text(&real, digits)
            .map(|a| format!("{prefix}~{a}"))
            .unwrap_or_else(|| "(irrational)".into()),
    }
}

/// Decimal approximation of an irrational real bag via its log enclosure.
fn approx_text(bag: &PrimeBag, digits: usize) -> Option<String> {
    let magnitude = if bag.sign() == primebag::Sign::Minus { bag.negate() } else { bag.clone() };
    match order::log_value(&magnitude, 64).ok()? {
        LogEnclosure::Finite(iv) => {
            let v = iv.midpoint_f64().exp();
            let sign = if bag.sign() == primebag::Sign::Minus { "-" } else { "" };
            Some(format!("{sign}{:.*}", digits.min(15), v))
        }
        _ => None,
    }
}

fn bag_json(bag: &PrimeBag, ctx: &Ctx) -> Value {
    let mut v = json!({ "pb": bag.to_string(), "class": format!("{:?}", bag.classify()) });
    if let Some(q) = bag_value(bag) {
        v["value"] = json!(q.to_string());
        v["decimal"] = json!(render_decimal(&q, ctx.digits));
    } else {
        v["decimal"] = json!(value_text(bag, ctx.digits));
    }
    v
}

fn bag_value(bag: &PrimeBag) -> Option<ExactRational> {
    match bag.special() {
        Special::Zero => Some(ExactRational::zero()),
        Special::Infinity => None,
        Special::Finite if bag.unit() == Unit::Real => convert::pb_to_rational(bag).ok(),
        Special::Finite => None,
    }
}

fn bag_line(bag: &PrimeBag, ctx: &Ctx) -> String {
    format!("{} = {}\n", bag, value_text(bag, ctx.digits))
}

fn cmd_eval(text: &str, ctx: &Ctx) -> primebag::Result<Output> {
    let mut receipts = Vec::new();
    let bag = expr::evaluate(text, ctx.mode, &mut receipts)?;
    let mut out = Output::new(bag_line(&bag, ctx), bag_json(&bag, ctx));
    out.receipts = receipts;
    Ok(out)
}

fn cmd_convert(text: &str, ctx: &Ctx) -> primebag::Result<Output> {
    if looks_like_pb(text) {
        let bag = pbnum::validate(text)?;
        ctx.mode.check(&bag)?;
        return Ok(Output::new(bag_line(&bag, ctx), bag_json(&bag, ctx)));
    }
    let q = parse_number(text)?;
    let (bag, receipt) = convert::rational_to_pb(&q)?;
    ctx.mode.check(&bag)?;
    let mut out = Output::new(format!("{bag}\n"), bag_json(&bag, ctx));
    out.receipts.push(receipt);
    Ok(out)
}

fn cmd_factor(text: &str) -> primebag::Result<Output> {
    let mut receipts = Vec::new();
    let bag = operand(text, &mut receipts)?;
    let factors = pbnum::factor_pb(&bag)?;
    let mut pairs = Vec::new();
    let mut powers = Vec::new();
    let mut rows = Vec::new();
    for (k, e) in &factors {
        let p = primebag::nth_prime(*k)?;
        pairs.push(format!("({k},{e})"));
        powers.push(if e == &BigUint::from(1u32) { p.to_string() } else { format!("{p}^{e}") });
        rows.push(json!({ "index": k.get(), "prime": p.to_string(), "multiplicity": e.to_string() }));
    }
    let product = if powers.is_empty() { "1".to_string() } else { powers.join(" * ") };
    let text = format!("[{}]\n{} = {}\n", pairs.join(","), bag, product);
    let mut out = Output::new(text, json!({ "pb": bag.to_string(), "factors": rows }));
    out.receipts = receipts;
    Ok(out)
}

fn cmd_isprime(text: &str) -> primebag::Result<Output> {
    let prime = if looks_like_pb(text) {
        pbnum::is_prime_pb(&pbnum::validate(text)?)?
    } else {
        let q = parse_number(text)?;
        if !q.is_integer() || q.is_negative() {
            return Err(Error::Domain(format!("primality is defined for naturals, got {q}")));
        }
        primebag::is_prime_natural(q.numer().magnitude())
    };
    Ok(Output::new(format!("{prime}\n"), json!(prime)))
}

fn cmd_gcd_lcm(a: &str, b: &str, gcd: bool, ctx: &Ctx) -> primebag::Result<Output> {
    let mut receipts = Vec::new();
    let x = operand(a, &mut receipts)?;
    let y = operand(b, &mut receipts)?;
    let bag = if gcd { pbnum::gcd(&x, &y)? } else { pbnum::lcm(&x, &y)? };
    let mut out = Output::new(bag_line(&bag, ctx), bag_json(&bag, ctx));
    out.receipts = receipts;
    Ok(out)
}

fn order_name(o: OrderResult) -> &'static str {
    match o {
        OrderResult::Less => "Less",
        OrderResult::Equal => "Equal",
        OrderResult::Greater => "Greater",
        OrderResult::Incomparable => "Incomparable",
    }
}

fn cmd_cmp(a: &str, b: &str, ctx: &Ctx) -> primebag::Result<Output> {
    let mut receipts = Vec::new();
    let x = operand(a, &mut receipts)?;
    let y = operand(b, &mut receipts)?;
    ctx.mode.check(&x)?;
    ctx.mode.check(&y)?;
    let exact = order::compare_signed(&x, &y)?;
    let mut out = match order::partial_compare(&x, &y) {
        Ok(partial) => Output::new(
            format!("partial: {}\nexact: {}\n", order_name(partial), order_name(exact)),
            json!({ "partial": order_name(partial), "exact": order_name(exact) }),
        ),
        Err(e) => {
            let mut out = Output::new(
                format!("partial: n/a\nexact: {}\n", order_name(exact)),
                json!({ "partial": Value::Null, "exact": order_name(exact) }),
            );
            out.diagnostics.push(format!("partial comparison unavailable: {e}"));
            out
        }
    };
    out.receipts = receipts;
    Ok(out)
}

fn cmd_partitions(n: u64) -> primebag::Result<Output> {
    let bags = partition::enumerate_weight(n)?;
    let count = partition::partition_count(n);
    let mut text = format!("P({n}) = {count}\n");
    let mut rows = Vec::new();
    for bag in &bags {
        let p = partition::Partition::from_prime_bag(bag)?;
        let value = convert::pb_to_rational(bag)?;
        let prime = pbnum::is_prime_pb(bag)?;
        let _ = writeln!(text, "{p}\t{bag}\t{value}{}", if prime { "\tprime" } else { "" });
        rows.push(json!({ "partition": p.to_string(), "pb": bag.to_string(), "value": value.to_string(), "prime": prime }));
    }
    let estimate = partition::hr_estimate(n);
    let _ = writeln!(text, "hardy-ramanujan estimate = {estimate:.6e}");
    Ok(Output::new(
        text,
        json!({ "n": n, "count": count.to_string(), "bags": rows, "hr_estimate": estimate }),
    ))
}

fn cmd_pi2(terms: u64, ctx: &Ctx) -> primebag::Result<Output> {
    let q = convert::euler_pi_squared(terms)?;
    let decimal = decimal_expansion(&q, ctx.digits);
    // Exact fractions grow with every prime; only short ones are worth printing.
    let short = q.numer().bits() + q.denom().bits() <= 200;
    let text = if q.is_integer() {
        format!("{}\n", q.numer())
    } else if short {
        format!("{q} = {decimal}\n")
    } else {
        format!("{decimal}\n")
    };
    let mut result = json!({ "terms": terms, "decimal": decimal });
    if short || ctx.verbose {
        result["value"] = json!(q.to_string());
    }
    Ok(Output::new(text, result))
}

fn need<'a>(b: Option<&'a str>, op: &str) -> primebag::Result<&'a str> {
    b.ok_or_else(|| Error::Parse {
        offset: 0,
        message: format!("{op} needs two operands"),
    })
}

fn cmd_decbag(op: &str, a: &str, b: Option<&str>) -> primebag::Result<Output> {
    let x = altreps::parse_decbag(a)?;
    let bag = match op {
        "add" => altreps::decbag_add(&x, &altreps::parse_decbag(need(b, op)?)?),
        "sub" => altreps::decbag_sub(&x, &altreps::parse_decbag(need(b, op)?)?)?,
        "mul" => altreps::decbag_mul(&x, &altreps::parse_decbag(need(b, op)?)?),
        "normalize" => altreps::decbag_normalize(&x),
        "value" => x,
        other => {
            return Err(Error::Parse {
                offset: 0,
                message: format!("unknown decbag operation {other:?}; expected add, sub, mul, normalize or value"),
            })
        }
    };
    let value = altreps::decbag_value(&bag);
    Ok(Output::new(
        format!("{bag} = {value}\n"),
        json!({ "bag": bag.to_string(), "value": value.to_string(), "normal": bag.is_normal() }),
    ))
}

fn cmd_mulbag(op: &str, a: &str, b: Option<&str>) -> primebag::Result<Output> {
    let x = altreps::parse_mulbag(a)?;
    let bag = match op {
        "mul" => altreps::mulbag_mul(&x, &altreps::parse_mulbag(need(b, op)?)?),
        "value" => x,
        "topb" => {
            let pb = altreps::mulbag_to_pb(&x)?;
            let value = altreps::mulbag_value(&x);
            return Ok(Output::new(
                format!("{pb} = {value}\n"),
                json!({ "pb": pb.to_string(), "value": value.to_string() }),
            ));
        }
        other => {
            return Err(Error::Parse {
                offset: 0,
                message: format!("unknown mulbag operation {other:?}; expected mul, value or topb"),
            })
        }
    };
    let value = altreps::mulbag_value(&bag);
    Ok(Output::new(
        format!("{bag} = {value}\n"),
        json!({ "bag": bag.to_string(), "value": value.to_string() }),
    ))
}

fn cmd_bench(path: &str, out_path: Option<&str>, format: &str, ctx: &Ctx) -> primebag::Result<Output> {
    let format: ReportFormat = format.parse()?;
    let text = fs::read_to_string(path).map_err(|e| Error::Resource(format!("cannot read {path}: {e}")))?;
    let spec: BenchSpec = serde_json::from_str(&text).map_err(|e| Error::Parse {
        offset: 0,
        message: format!("bench spec {path}: {e}"),
    })?;
    let report = bench::run_bench(&spec)?;
    let mut bytes = Vec::new();
    bench::export_report(&report, format, &mut bytes).map_err(|e| Error::Resource(e.to_string()))?;
    let exported = String::from_utf8_lossy(&bytes).into_owned();
    let mut diagnostics = Vec::new();
    for s in &report.series {
        if ctx.verbose {
            diagnostics.push(format!(
                "{} on {}: slope {} r2 {}",
                s.op.name(),
                s.repr.name(),
                s.slope.map_or("n/a".into(), |v| format!("{v:.3}")),
                s.r2.map_or("n/a".into(), |v| format!("{v:.3}")),
            ));
        }
        diagnostics.extend(s.notes.iter().cloned());
    }
    let text = match out_path {
        Some(p) => {
            fs::write(p, &bytes).map_err(|e| Error::Resource(format!("cannot write {p}: {e}")))?;
            format!("wrote {p}\n")
        }
        None => exported,
    };
    let mut out = Output::new(text, serde_json::to_value(&report).unwrap_or(Value::Null));
    out.diagnostics = diagnostics;
    Ok(out)
}
