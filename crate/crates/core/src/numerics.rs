//! Certified scalar arithmetic.
//!
//! Every comparison made by the rest of the crate goes through
//! [`Scalar::try_cmp`], which is exact for rationals and refuses to answer
//! for overlapping intervals. The core algorithms are generic over
//! [`Scalar`]; the crate ships three instances:
//!
//! * [`BigRational`] - exact, the primary path for rational slopes;
//! * [`ExactScalar`] - rational or dyadic interval, so named irrationals
//!   such as `sqrt2` can flow through the same code;
//! * `f64` - uncertified, used for fast sweeps and plotting.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Default working precision for interval values, in bits.
pub const DEFAULT_PRECISION_BITS: u32 = 128;

/// Ordered field with fallible comparison.
pub trait Scalar:
    Clone
    + fmt::Debug
    + Send
    + Sync
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    fn from_ratio(num: i64, den: i64) -> Self;

    fn try_div(&self, rhs: &Self) -> Result<Self>;

    fn try_cmp(&self, rhs: &Self) -> Result<Ordering>;

    /// Conservative minimum; for intervals this never needs a comparison.
    fn min_of(&self, rhs: &Self) -> Self;

    fn max_of(&self, rhs: &Self) -> Self;

    fn abs_val(&self) -> Self;

    fn to_f64(&self) -> f64;

    /// `true` when the value is exact (no enclosure width).
    fn is_exact(&self) -> bool;

    /// Compact human-readable form (`p/q` for rationals).
    fn render(&self) -> String;

    fn to_json(&self) -> serde_json::Value;

    fn half() -> Self {
        Self::from_ratio(1, 2)
    }

    fn try_lt(&self, rhs: &Self) -> Result<bool> {
        Ok(self.try_cmp(rhs)? == Ordering::Less)
    }

    fn try_le(&self, rhs: &Self) -> Result<bool> {
        Ok(self.try_cmp(rhs)? != Ordering::Greater)
    }

    fn try_gt(&self, rhs: &Self) -> Result<bool> {
        Ok(self.try_cmp(rhs)? == Ordering::Greater)
    }

    fn try_ge(&self, rhs: &Self) -> Result<bool> {
        Ok(self.try_cmp(rhs)? != Ordering::Less)
    }

    fn try_eq(&self, rhs: &Self) -> Result<bool> {
        Ok(self.try_cmp(rhs)? == Ordering::Equal)
    }

    /// Exact-or-failing minimum, for places where the witness matters.
    fn try_min(&self, rhs: &Self) -> Result<Self> {
        Ok(if self.try_le(rhs)? {
            self.clone()
        } else {
            rhs.clone()
        })
    }
}

/// Sort with a fallible comparator; the first comparison error wins.
pub fn try_sort<S: Scalar>(values: &mut [S]) -> Result<()> {
    try_sort_by_key(values, |v| v)
}

pub fn try_sort_by_key<T, S: Scalar>(items: &mut [T], key: impl Fn(&T) -> &S) -> Result<()> {
    let mut failure = None;
    items.sort_by(|a, b| match key(a).try_cmp(key(b)) {
        Ok(o) => o,
        Err(e) => {
            failure.get_or_insert(e);
            Ordering::Equal
        }
    });
    match failure {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

// ---------------------------------------------------------------------------
// BigRational

impl Scalar for BigRational {
    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(num.into(), den.into())
    }

    fn try_div(&self, rhs: &Self) -> Result<Self> {
        if rhs.is_zero() {
            return Err(Error::ZeroDenominator(format!("{} / 0", self)));
        }
        Ok(self / rhs)
    }

    fn try_cmp(&self, rhs: &Self) -> Result<Ordering> {
        Ok(self.cmp(rhs))
    }

    fn min_of(&self, rhs: &Self) -> Self {
        self.min(rhs).clone()
    }

    fn max_of(&self, rhs: &Self) -> Self {
        self.max(rhs).clone()
    }

    fn abs_val(&self) -> Self {
        self.abs()
    }

    fn to_f64(&self) -> f64 {
        ratio_to_f64(self)
    }

    fn is_exact(&self) -> bool {
        true
    }

    fn render(&self) -> String {
        format!("{}/{}", self.numer(), self.denom())
    }

    fn to_json(&self) -> serde_json::Value {
        serde_json::Value::String(self.render())
    }
}

fn ratio_to_f64(q: &BigRational) -> f64 {
    if let Some(v) = ToPrimitive::to_f64(q) {
        if v.is_finite() {
            return v;
        }
    }
    // Very large numerators and denominators: scale both down first.
    let n = q.numer().bits() as i64;
    let d = q.denom().bits() as i64;
    let shift = (n.max(d) - 1000).max(0) as u64;
    let nn = (q.numer() >> shift).to_f64().unwrap_or(f64::NAN);
    let dd = (q.denom() >> shift).to_f64().unwrap_or(f64::NAN);
    nn / dd
}

// ---------------------------------------------------------------------------
// f64

impl Scalar for f64 {
    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }

    fn try_div(&self, rhs: &Self) -> Result<Self> {
        if *rhs == 0.0 {
            return Err(Error::ZeroDenominator(format!("{} / 0", self)));
        }
        Ok(self / rhs)
    }

    fn try_cmp(&self, rhs: &Self) -> Result<Ordering> {
        self.partial_cmp(rhs)
            .ok_or_else(|| Error::PrecisionExhausted(format!("NaN in {} vs {}", self, rhs)))
    }

    fn min_of(&self, rhs: &Self) -> Self {
        self.min(*rhs)
    }

    fn max_of(&self, rhs: &Self) -> Self {
        self.max(*rhs)
    }

    fn abs_val(&self) -> Self {
        self.abs()
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn is_exact(&self) -> bool {
        false
    }

    fn render(&self) -> String {
        format!("{}", self)
    }

    fn to_json(&self) -> serde_json::Value {
        serde_json::json!(self)
    }
}

// ---------------------------------------------------------------------------
// Dyadic intervals

/// Closed interval `[lo, hi]` with dyadic endpoints rounded outward to
/// `bits` fractional bits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interval {
    lo: BigRational,
    hi: BigRational,
    bits: u32,
}

impl Interval {
    /// Builds an enclosure of `[lo, hi]`, rounding outward.
    pub fn new(lo: BigRational, hi: BigRational, bits: u32) -> Result<Self> {
        if lo > hi {
            return Err(Error::InvalidArgument(format!(
                "interval with lo {} > hi {}",
                lo, hi
            )));
        }
        Ok(Interval {
            lo: round_down(&lo, bits),
            hi: round_up(&hi, bits),
            bits,
        })
    }

    pub fn point(q: &BigRational, bits: u32) -> Self {
        Interval {
            lo: round_down(q, bits),
            hi: round_up(q, bits),
            bits,
        }
    }

    pub fn lo(&self) -> &BigRational {
        &self.lo
    }

    pub fn hi(&self) -> &BigRational {
        &self.hi
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }

    pub fn contains(&self, q: &BigRational) -> bool {
        &self.lo <= q && q <= &self.hi
    }

    fn rounded(lo: BigRational, hi: BigRational, bits: u32) -> Self {
        Interval {
            lo: round_down(&lo, bits),
            hi: round_up(&hi, bits),
            bits,
        }
    }
}

fn pow2(bits: u32) -> BigInt {
    BigInt::one() << bits as usize
}

fn round_down(q: &BigRational, bits: u32) -> BigRational {
    let scale = pow2(bits);
    let scaled = q * BigRational::from_integer(scale.clone());
    BigRational::new(scaled.floor().to_integer(), scale)
}

fn round_up(q: &BigRational, bits: u32) -> BigRational {
    let scale = pow2(bits);
    let scaled = q * BigRational::from_integer(scale.clone());
    BigRational::new(scaled.ceil().to_integer(), scale)
}

/// Exact decimal expansion of a dyadic rational.
fn dyadic_decimal(q: &BigRational) -> String {
    let den = q.denom();
    let k = den.trailing_zeros().unwrap_or(0);
    debug_assert!((den >> k as usize).is_one(), "non-dyadic value {}", q);
    let five = BigInt::from(5u32);
    let digits = q.numer().abs() * num_traits::pow(five, k as usize);
    let mut s = digits.to_string();
    let k = k as usize;
    if k > 0 {
        if s.len() <= k {
            s = format!("{}{}", "0".repeat(k - s.len() + 1), s);
        }
        s.insert(s.len() - k, '.');
        let trimmed = s.trim_end_matches('0').trim_end_matches('.').to_string();
        s = trimmed;
    }
    if q.is_negative() {
        format!("-{}", s)
    } else {
        s
    }
}

// ---------------------------------------------------------------------------
// ExactScalar

/// A certified number: an exact rational, or a dyadic interval enclosure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExactScalar {
    Rational(BigRational),
    Interval(Interval),
}

impl ExactScalar {
    pub fn rational(num: i64, den: i64) -> Self {
        ExactScalar::Rational(BigRational::new(num.into(), den.into()))
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            ExactScalar::Rational(q) => Some(q),
            ExactScalar::Interval(_) => None,
        }
    }

    /// `[lo, hi]` bounds; equal for rationals.
    pub fn bounds(&self) -> (BigRational, BigRational) {
        match self {
            ExactScalar::Rational(q) => (q.clone(), q.clone()),
            ExactScalar::Interval(iv) => (iv.lo.clone(), iv.hi.clone()),
        }
    }

    /// True value is guaranteed to lie within the returned bounds.
    pub fn contains(&self, q: &BigRational) -> bool {
        let (lo, hi) = self.bounds();
        &lo <= q && q <= &hi
    }

    fn bits(&self) -> Option<u32> {
        match self {
            ExactScalar::Rational(_) => None,
            ExactScalar::Interval(iv) => Some(iv.bits),
        }
    }

    fn combine(
        &self,
        rhs: &Self,
        exact: impl Fn(&BigRational, &BigRational) -> BigRational,
        enclose: impl Fn(&Interval, &Interval) -> (BigRational, BigRational),
    ) -> Self {
        match (self, rhs) {
            (ExactScalar::Rational(a), ExactScalar::Rational(b)) => {
                ExactScalar::Rational(exact(a, b))
            }
            _ => {
                let bits = self.bits().max(rhs.bits()).unwrap_or(DEFAULT_PRECISION_BITS);
                let a = self.to_interval(bits);
                let b = rhs.to_interval(bits);
                let (lo, hi) = enclose(&a, &b);
                ExactScalar::Interval(Interval::rounded(lo, hi, bits))
            }
        }
    }

    /// Exact point interval (no rounding) used as an operand.
    fn to_interval(&self, bits: u32) -> Interval {
        match self {
            ExactScalar::Rational(q) => Interval {
                lo: q.clone(),
                hi: q.clone(),
                bits,
            },
            ExactScalar::Interval(iv) => iv.clone(),
        }
    }
}

impl fmt::Display for ExactScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

fn minmax4(v: [BigRational; 4]) -> (BigRational, BigRational) {
    let lo = v.iter().min().cloned().unwrap();
    let hi = v.iter().max().cloned().unwrap();
    (lo, hi)
}

impl Add for ExactScalar {
    type Output = ExactScalar;
    fn add(self, rhs: Self) -> Self {
        self.combine(&rhs, |a, b| a + b, |a, b| (&a.lo + &b.lo, &a.hi + &b.hi))
    }
}

impl Sub for ExactScalar {
    type Output = ExactScalar;
    fn sub(self, rhs: Self) -> Self {
        self.combine(&rhs, |a, b| a - b, |a, b| (&a.lo - &b.hi, &a.hi - &b.lo))
    }
}

impl Mul for ExactScalar {
    type Output = ExactScalar;
    fn mul(self, rhs: Self) -> Self {
        self.combine(
            &rhs,
            |a, b| a * b,
            |a, b| {
                minmax4([
                    &a.lo * &b.lo,
                    &a.lo * &b.hi,
                    &a.hi * &b.lo,
                    &a.hi * &b.hi,
                ])
            },
        )
    }
}

impl Neg for ExactScalar {
    type Output = ExactScalar;
    fn neg(self) -> Self {
        match self {
            ExactScalar::Rational(q) => ExactScalar::Rational(-q),
            ExactScalar::Interval(iv) => ExactScalar::Interval(Interval {
                lo: -iv.hi,
                hi: -iv.lo,
                bits: iv.bits,
            }),
        }
    }
}

impl Zero for ExactScalar {
    fn zero() -> Self {
        ExactScalar::Rational(BigRational::zero())
    }
    fn is_zero(&self) -> bool {
        match self {
            ExactScalar::Rational(q) => q.is_zero(),
            ExactScalar::Interval(iv) => iv.lo.is_zero() && iv.hi.is_zero(),
        }
    }
}

impl One for ExactScalar {
    fn one() -> Self {
        ExactScalar::Rational(BigRational::one())
    }
}

impl Scalar for ExactScalar {
    fn from_ratio(num: i64, den: i64) -> Self {
        ExactScalar::rational(num, den)
    }

    fn try_div(&self, rhs: &Self) -> Result<Self> {
        match (self, rhs) {
            (ExactScalar::Rational(a), ExactScalar::Rational(b)) => {
                Ok(ExactScalar::Rational(a.try_div(b)?))
            }
            _ => {
                let (lo, hi) = rhs.bounds();
                if !(lo.is_positive() || hi.is_negative()) {
                    return Err(Error::PrecisionExhausted(format!(
                        "divisor {} encloses zero",
                        rhs.render()
                    )));
                }
                let bits = self.bits().max(rhs.bits()).unwrap_or(DEFAULT_PRECISION_BITS);
                let a = self.to_interval(bits);
                let (rlo, rhi) = (hi.recip(), lo.recip());
                let (lo, hi) = minmax4([&a.lo * &rlo, &a.lo * &rhi, &a.hi * &rlo, &a.hi * &rhi]);
                Ok(ExactScalar::Interval(Interval::rounded(lo, hi, bits)))
            }
        }
    }

    fn try_cmp(&self, rhs: &Self) -> Result<Ordering> {
        if let (ExactScalar::Rational(a), ExactScalar::Rational(b)) = (self, rhs) {
            return Ok(a.cmp(b));
        }
        let (alo, ahi) = self.bounds();
        let (blo, bhi) = rhs.bounds();
        if ahi < blo {
            Ok(Ordering::Less)
        } else if alo > bhi {
            Ok(Ordering::Greater)
        } else if alo == ahi && blo == bhi && alo == blo {
            Ok(Ordering::Equal)
        } else {
            Err(Error::PrecisionExhausted(format!(
                "cannot order {} and {}",
                self.render(),
                rhs.render()
            )))
        }
    }

    fn min_of(&self, rhs: &Self) -> Self {
        self.combine(
            rhs,
            |a, b| a.min(b).clone(),
            |a, b| (a.lo.clone().min(b.lo.clone()), a.hi.clone().min(b.hi.clone())),
        )
    }

    fn max_of(&self, rhs: &Self) -> Self {
        self.combine(
            rhs,
            |a, b| a.max(b).clone(),
            |a, b| (a.lo.clone().max(b.lo.clone()), a.hi.clone().max(b.hi.clone())),
        )
    }

    fn abs_val(&self) -> Self {
        match self {
            ExactScalar::Rational(q) => ExactScalar::Rational(q.abs()),
            ExactScalar::Interval(iv) => {
                let (lo, hi) = if iv.lo.is_negative() && iv.hi.is_positive() {
                    (BigRational::zero(), iv.hi.clone().max(-iv.lo.clone()))
                } else {
                    let a = iv.lo.abs();
                    let b = iv.hi.abs();
                    (a.clone().min(b.clone()), a.max(b))
                };
                ExactScalar::Interval(Interval {
                    lo,
                    hi,
                    bits: iv.bits,
                })
            }
        }
    }

    fn to_f64(&self) -> f64 {
        match self {
            ExactScalar::Rational(q) => ratio_to_f64(q),
            ExactScalar::Interval(iv) => ratio_to_f64(&((&iv.lo + &iv.hi) / BigRational::from_integer(2.into()))),
        }
    }

    fn is_exact(&self) -> bool {
        matches!(self, ExactScalar::Rational(_))
    }

    fn render(&self) -> String {
        match self {
            ExactScalar::Rational(q) => q.render(),
            ExactScalar::Interval(iv) => format!(
                "[{}, {}]",
                dyadic_decimal(&iv.lo),
                dyadic_decimal(&iv.hi)
            ),
        }
    }

    fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("scalar serialization cannot fail")
    }
}

impl Serialize for ExactScalar {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ExactScalar::Rational(q) => serializer.serialize_str(&q.render()),
            ExactScalar::Interval(iv) => {
                let mut map = serializer.serialize_map(Some(3))?;
                map.serialize_entry("lo", &dyadic_decimal(&iv.lo))?;
                map.serialize_entry("hi", &dyadic_decimal(&iv.hi))?;
                map.serialize_entry("bits", &iv.bits)?;
                map.end()
            }
        }
    }
}

impl From<BigRational> for ExactScalar {
    fn from(q: BigRational) -> Self {
        ExactScalar::Rational(q)
    }
}

// ---------------------------------------------------------------------------
// Parsing

/// Parses `"p/q"`, a decimal literal, or a named constant.
///
/// Named constants: `sqrt2`, `sqrt3`, `sqrt5`, `golden` (alias `phi`).
/// Irrationals become intervals of width at most `2^-precision`.
pub fn parse_scalar(text: &str, precision: u32) -> Result<ExactScalar> {
    let t = text.trim();
    let malformed = || Error::MalformedNumber(text.to_string());
    if t.is_empty() {
        return Err(malformed());
    }
    match t {
        "sqrt2" => return Ok(ExactScalar::Interval(sqrt_interval(2, precision))),
        "sqrt3" => return Ok(ExactScalar::Interval(sqrt_interval(3, precision))),
        "sqrt5" => return Ok(ExactScalar::Interval(sqrt_interval(5, precision))),
        "golden" | "phi" => {
            // (1 + sqrt5) / 2; halving keeps the width under 2^-precision.
            let r5 = sqrt_interval(5, precision);
            let half = BigRational::new(1.into(), 2.into());
            let lo = (BigRational::one() + r5.lo) * &half;
            let hi = (BigRational::one() + r5.hi) * &half;
            return Ok(ExactScalar::Interval(Interval::rounded(lo, hi, precision + 1)));
        }
        _ => {}
    }
    if let Some((p, q)) = t.split_once('/') {
        let num = BigInt::from_str(p.trim()).map_err(|_| malformed())?;
        let den = BigInt::from_str(q.trim()).map_err(|_| malformed())?;
        if den.is_zero() {
            return Err(Error::ZeroDenominator(text.to_string()));
        }
        return Ok(ExactScalar::Rational(BigRational::new(num, den)));
    }
    parse_decimal(t).map(ExactScalar::Rational).ok_or_else(malformed)
}

fn parse_decimal(t: &str) -> Option<BigRational> {
    let (mantissa, exponent) = match t.find(['e', 'E']) {
        Some(i) => (&t[..i], t[i + 1..].parse::<i32>().ok()?),
        None => (t, 0),
    };
    let (neg, body) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{}{}", int_part, frac_part);
    let mut num = BigInt::from_str(&digits).ok()?;
    if neg {
        num = -num;
    }
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10u32);
    let q = if scale >= 0 {
        BigRational::from_integer(num * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(num, num_traits::pow(ten, (-scale) as usize))
    };
    Some(q)
}

/// Enclosure of `sqrt(n)` with width at most `2^-bits`.
pub fn sqrt_interval(n: u32, bits: u32) -> Interval {
    let scaled = BigUint::from(n) << (2 * bits as usize);
    let root = scaled.sqrt();
    let exact = &root * &root == scaled;
    let scale = pow2(bits);
    let lo_num = BigInt::from_biguint(Sign::Plus, root);
    let hi_num = if exact {
        lo_num.clone()
    } else {
        &lo_num + BigInt::one()
    };
    Interval {
        lo: BigRational::new(lo_num, scale.clone()),
        hi: BigRational::new(hi_num, scale),
        bits,
    }
}

/// Exact comparison of two scalars; convenience wrapper over [`Scalar::try_cmp`].
pub fn compare(a: &ExactScalar, b: &ExactScalar) -> Result<Ordering> {
    a.try_cmp(b)
}

/// Smallest power of two `2^e` with `2^e >= q > 0`, as an exponent.
pub fn ceil_log2(q: &BigRational) -> i64 {
    let n = q.numer().bits() as i64;
    let d = q.denom().bits() as i64;
    let mut e = n - d;
    let two = BigRational::from_integer(2.into());
    let p = |e: i64| {
        if e >= 0 {
            num_traits::pow(two.clone(), e as usize)
        } else {
            num_traits::pow(two.clone(), (-e) as usize).recip()
        }
    };
    while &p(e) < q {
        e += 1;
    }
    while e > i64::MIN && &p(e - 1) >= q {
        e -= 1;
    }
    e
}
