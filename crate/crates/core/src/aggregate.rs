//! count, count_distinct, sum and avg over answer bags, in exact rational
//! arithmetic.
//!
//! Over a bag that is only a lower bound, `count` and `sum` of nonnegative
//! values are returned with `exact = false`; `avg` and `count_distinct` are
//! refused.

use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::chase::ChaseConfig;
use crate::eval::{evaluate_certain_bag, EvalError, EvalMode};
use crate::model::{AnswerBag, Term, Ucq};
use crate::textio::Program;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AggregateFn {
    Count,
    CountDistinct,
    Sum,
    Avg,
}

impl AggregateFn {
    pub fn name(self) -> &'static str {
        match self {
            AggregateFn::Count => "count",
            AggregateFn::CountDistinct => "count_distinct",
            AggregateFn::Sum => "sum",
            AggregateFn::Avg => "avg",
        }
    }

    pub fn needs_argument(self) -> bool {
        matches!(self, AggregateFn::Sum | AggregateFn::Avg)
    }
}

impl FromStr for AggregateFn {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "count" => Ok(AggregateFn::Count),
            "count_distinct" => Ok(AggregateFn::CountDistinct),
            "sum" => Ok(AggregateFn::Sum),
            "avg" => Ok(AggregateFn::Avg),
            other => Err(format!("unknown aggregate function `{other}`")),
        }
    }
}

impl fmt::Display for AggregateFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AggregateSpec {
    pub func: AggregateFn,
    /// 1-based column; required by sum and avg.
    pub arg_position: Option<usize>,
}

impl AggregateSpec {
    pub fn count() -> Self {
        AggregateSpec {
            func: AggregateFn::Count,
            arg_position: None,
        }
    }

    pub fn count_distinct() -> Self {
        AggregateSpec {
            func: AggregateFn::CountDistinct,
            arg_position: None,
        }
    }

    pub fn sum(position: usize) -> Self {
        AggregateSpec {
            func: AggregateFn::Sum,
            arg_position: Some(position),
        }
    }

    pub fn avg(position: usize) -> Self {
        AggregateSpec {
            func: AggregateFn::Avg,
            arg_position: Some(position),
        }
    }

    pub fn validate(&self, arity: usize) -> Result<(), AggregateError> {
        match self.arg_position {
            None if self.func.needs_argument() => Err(AggregateError::MissingArgument(self.func)),
            Some(p) if p == 0 || p > arity => {
                Err(AggregateError::BadPosition { position: p, arity })
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AggregateError {
    #[error("non-numeric aggregate column: `{0}`")]
    NonNumeric(String),
    #[error("undefined average")]
    UndefinedAverage,
    #[error("inexact input: rerun with higher chase level or rewrite mode")]
    InexactInput,
    #[error("{0} needs an argument position")]
    MissingArgument(AggregateFn),
    #[error("argument position {position} is outside 1..={arity}")]
    BadPosition { position: usize, arity: usize },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AggregateValue {
    pub value: BigRational,
    pub exact: bool,
}

/// Parses `-12`, `3.25` and the like into an exact rational.
pub fn parse_decimal(s: &str) -> Option<BigRational> {
    let (negative, digits) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let (int, frac) = match digits.split_once('.') {
        Some((i, f)) => (i, f),
        None => (digits, ""),
    };
    let all_digits = |p: &str| p.bytes().all(|b| b.is_ascii_digit());
    if int.is_empty()
        || !all_digits(int)
        || !all_digits(frac)
        || (digits.contains('.') && frac.is_empty())
    {
        return None;
    }
    let numer: BigInt = format!("{int}{frac}").parse().ok()?;
    let denom = num_traits::pow(BigInt::from(10), frac.len());
    let value = BigRational::new(numer, denom);
    Some(if negative { -value } else { value })
}

fn numeric(t: &Term) -> Result<BigRational, AggregateError> {
    match t {
        Term::Const(c) => parse_decimal(c).ok_or_else(|| AggregateError::NonNumeric(c.to_string())),
        other => Err(AggregateError::NonNumeric(other.to_string())),
    }
}

fn to_rational(n: &BigUint) -> BigRational {
    BigRational::from_integer(BigInt::from(n.clone()))
}

pub fn aggregate(bag: &AnswerBag, spec: &AggregateSpec) -> Result<AggregateValue, AggregateError> {
    spec.validate(bag.arity())?;
    let exact = bag.exactness().is_exact();
    let column = |tuple: &[Term]| numeric(&tuple[spec.arg_position.expect("validated") - 1]);
    let value = match spec.func {
        AggregateFn::Count => to_rational(&bag.total()),
        AggregateFn::CountDistinct => {
            if !exact {
                return Err(AggregateError::InexactInput);
            }
            BigRational::from_integer(bag.len().into())
        }
        AggregateFn::Sum => {
            let mut sum = BigRational::zero();
            for (t, m) in bag.iter() {
                let v = column(t)?;
                if !exact && v.is_negative() {
                    return Err(AggregateError::InexactInput);
                }
                sum += v * to_rational(m);
            }
            sum
        }
        AggregateFn::Avg => {
            let mut sum = BigRational::zero();
            for (t, m) in bag.iter() {
                sum += column(t)? * to_rational(m);
            }
            if !exact {
                return Err(AggregateError::InexactInput);
            }
            if bag.is_empty() {
                return Err(AggregateError::UndefinedAverage);
            }
            sum / to_rational(&bag.total())
        }
    };
    Ok(AggregateValue { value, exact })
}

/// Aggregates the certain answers of `q_aux`.
pub fn aggregate_certain(
    q_aux: &Ucq,
    program: &Program,
    spec: &AggregateSpec,
    config: &ChaseConfig,
    mode: EvalMode,
) -> Result<AggregateValue, AggregateError> {
    spec.validate(q_aux.arity())?;
    let bag = evaluate_certain_bag(q_aux, program, config, mode)?;
    aggregate(&bag, spec)
}

/// `value` with 12 significant digits, trailing zeros removed, switching to
/// exponent notation for very large or very small magnitudes.
pub fn to_decimal(value: &BigRational) -> String {
    const DIGITS: i64 = 12;
    if value.is_zero() {
        return "0".to_string();
    }
    let sign = if value.is_negative() { "-" } else { "" };
    let mag = value.abs();
    let ten = BigRational::from_integer(10.into());
    // exponent e with 10^e <= mag < 10^(e+1)
    let mut e: i64 = mag.numer().to_string().len() as i64 - mag.denom().to_string().len() as i64;
    let pow = |k: i64| -> BigRational {
        if k >= 0 {
            num_traits::pow(ten.clone(), k as usize)
        } else {
            num_traits::pow(ten.clone(), (-k) as usize).recip()
        }
    };
    while mag < pow(e) {
        e -= 1;
    }
    while mag >= pow(e + 1) {
        e += 1;
    }
    let scaled = &mag * pow(DIGITS - 1 - e);
    let half = BigRational::new(1.into(), 2.into());
    let mut digits = (scaled + half).floor().to_integer();
    if digits.to_string().len() as i64 > DIGITS {
        digits /= 10;
        e += 1;
    }
    let text = digits.to_string();
    let (int_part, frac_part): (String, String);
    if (-4..DIGITS).contains(&e) {
        if e >= 0 {
            let split = (e + 1) as usize;
            int_part = text[..split].to_string();
            frac_part = text[split..].to_string();
        } else {
            int_part = "0".to_string();
            frac_part = format!("{}{}", "0".repeat((-e - 1) as usize), text);
        }
        let frac = frac_part.trim_end_matches('0');
        if frac.is_empty() {
            format!("{sign}{int_part}")
        } else {
            format!("{sign}{int_part}.{frac}")
        }
    } else {
        let mantissa_frac = text[1..].trim_end_matches('0');
        let exp_sign = if e < 0 { '-' } else { '+' };
        let mantissa = if mantissa_frac.is_empty() {
            text[..1].to_string()
        } else {
            format!("{}.{}", &text[..1], mantissa_frac)
        };
        format!("{sign}{mantissa}e{exp_sign}{:02}", e.abs())
    }
}

/// `fn=<fn> value=<p/q> (<decimal>) exact=<bool>`
pub fn render_aggregate(func: AggregateFn, v: &AggregateValue) -> String {
    format!(
        "fn={} value={}/{} ({}) exact={}",
        func,
        v.value.numer(),
        v.value.denom(),
        to_decimal(&v.value),
        v.exact
    )
}
