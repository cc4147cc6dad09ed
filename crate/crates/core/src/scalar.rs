//! Scalar arithmetic over exact rationals or fixed-precision binary floats.
//!
//! Exact values stay exact until a float enters an operation; mixed
//! operations promote to the float's precision. Square roots always
//! produce floats.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use dashu::base::{Abs, Sign, Signed, SquareRoot};
use dashu::float::round::mode::HalfEven;
use dashu::float::{Context, FBig};
use dashu::integer::{IBig, UBig};
use dashu::rational::RBig;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

pub type BigFloat = FBig<HalfEven, 2>;

pub const DEFAULT_PRECISION: usize = 256;
pub const MIN_PRECISION: usize = 64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScalarError {
    #[error("cannot parse number `{0}`")]
    Parse(String),
    #[error("square root requested in rational mode")]
    SqrtInRationalMode,
    #[error("square root of a negative number")]
    NegativeSqrt,
    #[error("decimal literal `{0}` in rational mode; pass it as p/q")]
    DecimalInRationalMode(String),
    #[error("precision {0} is below the minimum of {MIN_PRECISION} bits")]
    Precision(usize),
}

/// Scalar arithmetic policy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Exact where inputs are exact, floats where a root or decimal appears.
    #[default]
    Auto,
    /// Exact only; anything needing a square root is rejected.
    Rational,
    /// Everything is converted to big floats up front.
    Float,
}

impl FromStr for Mode {
    type Err = ScalarError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "auto" => Ok(Mode::Auto),
            "rational" => Ok(Mode::Rational),
            "float" => Ok(Mode::Float),
            _ => Err(ScalarError::Parse(s.to_string())),
        }
    }
}

/// Mode plus float precision in bits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NumCtx {
    pub mode: Mode,
    pub precision: usize,
}

impl Default for NumCtx {
    fn default() -> Self {
        NumCtx {
            mode: Mode::Auto,
            precision: DEFAULT_PRECISION,
        }
    }
}

impl NumCtx {
    pub fn new(mode: Mode, precision: usize) -> Result<Self, ScalarError> {
        if precision < MIN_PRECISION {
            return Err(ScalarError::Precision(precision));
        }
        Ok(NumCtx { mode, precision })
    }

    pub fn float(precision: usize) -> Self {
        NumCtx {
            mode: Mode::Float,
            precision,
        }
    }

    /// Parses `p/q`, an integer, or a decimal literal under this context.
    pub fn parse(&self, s: &str) -> Result<Scalar, ScalarError> {
        let s = s.trim();
        let (value, decimal) = parse_rational(s)?;
        match self.mode {
            Mode::Rational if decimal => Err(ScalarError::DecimalInRationalMode(s.to_string())),
            Mode::Float => Ok(Scalar::Float(rational_to_float(&value, self.precision))),
            _ if decimal => Ok(Scalar::Float(rational_to_float(&value, self.precision))),
            _ => Ok(Scalar::Exact(value)),
        }
    }

    /// Applies the mode to a value that was built exactly.
    pub fn adopt(&self, x: Scalar) -> Scalar {
        match self.mode {
            Mode::Float => x.to_float(self.precision),
            _ => x,
        }
    }

    pub fn sqrt(&self, x: &Scalar) -> Result<Scalar, ScalarError> {
        if self.mode == Mode::Rational {
            return Err(ScalarError::SqrtInRationalMode);
        }
        x.sqrt(self.precision)
    }
}

fn parse_rational(s: &str) -> Result<(RBig, bool), ScalarError> {
    let err = || ScalarError::Parse(s.to_string());
    if let Some((p, q)) = s.split_once('/') {
        let p = IBig::from_str(p.trim()).map_err(|_| err())?;
        let q = IBig::from_str(q.trim()).map_err(|_| err())?;
        if q == IBig::ZERO {
            return Err(err());
        }
        return Ok((RBig::from_parts_signed(p, q), false));
    }
    if let Ok(i) = IBig::from_str(s) {
        return Ok((RBig::from(i), false));
    }
    // decimal with optional exponent
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i64>().map_err(|_| err())?),
        None => (s, 0),
    };
    let (neg, body) = match mantissa.strip_prefix('-') {
        Some(b) => (true, b),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(err());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(err());
    }
    let digits = format!("{int_part}{frac_part}");
    let mut num = IBig::from_str(if digits.is_empty() { "0" } else { &digits }).map_err(|_| err())?;
    if neg {
        num = -num;
    }
    let scale = exp - frac_part.len() as i64;
    let ten = UBig::from(10u8);
    let value = if scale >= 0 {
        RBig::from(num * IBig::from(ten.pow(scale as usize)))
    } else {
        RBig::from_parts(num, ten.pow((-scale) as usize))
    };
    Ok((value, true))
}

pub fn rational_to_float(r: &RBig, precision: usize) -> BigFloat {
    let ctx = Context::<HalfEven>::new(precision);
    let num = BigFloat::from(r.numerator().clone());
    let den = BigFloat::from(IBig::from(r.denominator().clone()));
    ctx.div(num.repr(), den.repr()).expect("nonzero denominator").value()
}

fn float_to_rational(f: &BigFloat) -> RBig {
    RBig::try_from(f.clone()).expect("finite float")
}

/// Exact rational or big float.
#[derive(Clone, Debug)]
pub enum Scalar {
    Exact(RBig),
    Float(BigFloat),
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar::Exact(RBig::ZERO)
    }

    pub fn one() -> Self {
        Scalar::Exact(RBig::ONE)
    }

    pub fn int(n: i64) -> Self {
        Scalar::Exact(RBig::from(n))
    }

    pub fn ratio(p: i64, q: i64) -> Self {
        assert!(q != 0, "zero denominator");
        Scalar::Exact(RBig::from_parts_signed(IBig::from(p), IBig::from(q)))
    }

    pub fn from_f64(x: f64, precision: usize) -> Self {
        let r = RBig::try_from(x).expect("finite f64");
        Scalar::Float(rational_to_float(&r, precision))
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Scalar::Exact(_))
    }

    pub fn as_rational(&self) -> Option<&RBig> {
        match self {
            Scalar::Exact(r) => Some(r),
            Scalar::Float(_) => None,
        }
    }

    /// Float precision, or `None` for exact values.
    pub fn precision(&self) -> Option<usize> {
        match self {
            Scalar::Exact(_) => None,
            Scalar::Float(f) => Some(f.precision()),
        }
    }

    pub fn to_float(&self, precision: usize) -> Scalar {
        Scalar::Float(self.big_float(precision))
    }

    pub fn big_float(&self, precision: usize) -> BigFloat {
        match self {
            Scalar::Exact(r) => rational_to_float(r, precision),
            Scalar::Float(f) => f.clone().with_precision(precision).value(),
        }
    }

    /// Exact rational value of the number as stored (floats are dyadic).
    pub fn to_rational(&self) -> RBig {
        match self {
            Scalar::Exact(r) => r.clone(),
            Scalar::Float(f) => float_to_rational(f),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Scalar::Exact(r) => r.to_f64().value(),
            Scalar::Float(f) => f.to_f64().value(),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Exact(r) => r.is_zero(),
            Scalar::Float(f) => f.repr().significand().is_zero(),
        }
    }

    pub fn sign(&self) -> Ordering {
        if self.is_zero() {
            return Ordering::Equal;
        }
        let s = match self {
            Scalar::Exact(r) => r.sign(),
            Scalar::Float(f) => f.sign(),
        };
        match s {
            Sign::Positive => Ordering::Greater,
            Sign::Negative => Ordering::Less,
        }
    }

    pub fn is_positive(&self) -> bool {
        self.sign() == Ordering::Greater
    }

    pub fn is_negative(&self) -> bool {
        self.sign() == Ordering::Less
    }

    pub fn abs(&self) -> Scalar {
        match self {
            Scalar::Exact(r) => Scalar::Exact(r.clone().abs()),
            Scalar::Float(f) => Scalar::Float(f.clone().abs()),
        }
    }

    pub fn recip(&self) -> Scalar {
        Scalar::one() / self
    }

    pub fn powi(&self, e: i64) -> Scalar {
        if e < 0 {
            return self.powi(-e).recip();
        }
        match self {
            Scalar::Exact(r) => {
                let (n, d) = r.clone().into_parts();
                let e = e as usize;
                Scalar::Exact(RBig::from_parts(n.pow(e), d.pow(e)))
            }
            Scalar::Float(_) => {
                let mut acc = Scalar::one();
                let mut base = self.clone();
                let mut e = e as u64;
                while e > 0 {
                    if e & 1 == 1 {
                        acc = &acc * &base;
                    }
                    base = &base * &base;
                    e >>= 1;
                }
                acc
            }
        }
    }

    pub fn square(&self) -> Scalar {
        self * self
    }

    /// Square root as a float. Exact inputs are rounded once at `precision`.
    pub fn sqrt(&self, precision: usize) -> Result<Scalar, ScalarError> {
        if self.is_negative() {
            return Err(ScalarError::NegativeSqrt);
        }
        if self.is_zero() {
            return Ok(Scalar::Float(BigFloat::ZERO.with_precision(precision).value()));
        }
        let f = self.big_float(precision + 16);
        Ok(Scalar::Float(f.sqrt().with_precision(precision).value()))
    }

    /// Exact square root when the value is a square of a rational.
    pub fn sqrt_exact(&self) -> Option<Scalar> {
        let r = self.as_rational()?;
        if r.is_negative() {
            return None;
        }
        let n = r.numerator().clone().into_parts().1;
        let d = r.denominator();
        let sn = n.sqrt();
        let sd = d.sqrt();
        if &sn * &sn == n && &sd * &sd == *d {
            Some(Scalar::Exact(RBig::from_parts(IBig::from(sn), sd)))
        } else {
            None
        }
    }

    pub fn min(self, other: Scalar) -> Scalar {
        if other < self {
            other
        } else {
            self
        }
    }

    pub fn max(self, other: Scalar) -> Scalar {
        if other > self {
            other
        } else {
            self
        }
    }

    pub fn floor(&self) -> IBig {
        match self {
            Scalar::Exact(r) => r.floor(),
            Scalar::Float(f) => f.floor().to_int().value(),
        }
    }

    /// `p/q` for exact values; a round-trip tagged dyadic for floats.
    pub fn encode(&self) -> String {
        match self {
            Scalar::Exact(r) => format_rational(r),
            Scalar::Float(f) => format!("{}@{}", format_rational(&float_to_rational(f)), f.precision()),
        }
    }

    pub fn decode(s: &str) -> Result<Scalar, ScalarError> {
        match s.split_once('@') {
            Some((r, p)) => {
                let prec: usize = p.parse().map_err(|_| ScalarError::Parse(s.to_string()))?;
                let (r, _) = parse_rational(r)?;
                Ok(Scalar::Float(rational_to_float(&r, prec)))
            }
            None => {
                let (r, decimal) = parse_rational(s)?;
                if decimal {
                    return Err(ScalarError::Parse(s.to_string()));
                }
                Ok(Scalar::Exact(r))
            }
        }
    }

    /// Decimal rendering with `digits` significant digits for floats.
    pub fn to_decimal(&self, digits: usize) -> String {
        let f = match self {
            Scalar::Exact(r) => rational_to_float(r, (digits as f64 * 3.33) as usize + 16),
            Scalar::Float(f) => f.clone(),
        };
        let d = f.with_base_and_precision::<10>(digits).value();
        let sig = d.repr().significand();
        if sig.is_zero() {
            return "0".into();
        }
        let mut s = sig.to_string();
        let neg = s.starts_with('-');
        if neg {
            s.remove(0);
        }
        let exp10 = d.repr().exponent() + s.len() as isize - 1;
        if (-6..21).contains(&exp10) {
            return d.to_string();
        }
        let s = s.trim_end_matches('0');
        let (head, tail) = s.split_at(1);
        let sign = if neg { "-" } else { "" };
        if tail.is_empty() {
            format!("{sign}{head}e{exp10}")
        } else {
            format!("{sign}{head}.{tail}e{exp10}")
        }
    }
}

pub fn format_rational(r: &RBig) -> String {
    if r.denominator() == &UBig::ONE {
        r.numerator().to_string()
    } else {
        format!("{}/{}", r.numerator(), r.denominator())
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Exact(r) => f.write_str(&format_rational(r)),
            Scalar::Float(x) => write!(f, "{}", x.to_f64().value()),
        }
    }
}

impl From<i64> for Scalar {
    fn from(n: i64) -> Self {
        Scalar::int(n)
    }
}

impl From<RBig> for Scalar {
    fn from(r: RBig) -> Self {
        Scalar::Exact(r)
    }
}

impl From<BigFloat> for Scalar {
    fn from(f: BigFloat) -> Self {
        Scalar::Float(f)
    }
}

impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.encode())
    }
}

impl<'de> Deserialize<'de> for Scalar {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Scalar::decode(&s).map_err(serde::de::Error::custom)
    }
}

fn promote(a: &Scalar, b: &Scalar) -> (BigFloat, BigFloat) {
    let p = a.precision().into_iter().chain(b.precision()).max().unwrap_or(DEFAULT_PRECISION);
    (a.big_float(p), b.big_float(p))
}

macro_rules! binop {
    ($tr:ident, $m:ident, $op:tt) => {
        impl<'a, 'b> $tr<&'b Scalar> for &'a Scalar {
            type Output = Scalar;
            fn $m(self, rhs: &'b Scalar) -> Scalar {
                match (self, rhs) {
                    (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(a $op b),
                    (Scalar::Float(a), Scalar::Float(b)) if a.precision() == b.precision() => Scalar::Float(a $op b),
                    _ => {
                        let (a, b) = promote(self, rhs);
                        Scalar::Float(a $op b)
                    }
                }
            }
        }
        impl $tr<Scalar> for Scalar {
            type Output = Scalar;
            fn $m(self, rhs: Scalar) -> Scalar {
                (&self).$m(&rhs)
            }
        }
        impl<'b> $tr<&'b Scalar> for Scalar {
            type Output = Scalar;
            fn $m(self, rhs: &'b Scalar) -> Scalar {
                (&self).$m(rhs)
            }
        }
        impl<'a> $tr<Scalar> for &'a Scalar {
            type Output = Scalar;
            fn $m(self, rhs: Scalar) -> Scalar {
                self.$m(&rhs)
            }
        }
        impl $tr<i64> for Scalar {
            type Output = Scalar;
            fn $m(self, rhs: i64) -> Scalar {
                (&self).$m(&Scalar::int(rhs))
            }
        }
        impl<'a> $tr<i64> for &'a Scalar {
            type Output = Scalar;
            fn $m(self, rhs: i64) -> Scalar {
                self.$m(&Scalar::int(rhs))
            }
        }
    };
}

binop!(Add, add, +);
binop!(Sub, sub, -);
binop!(Mul, mul, *);
binop!(Div, div, /);

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match self {
            Scalar::Exact(r) => Scalar::Exact(-r),
            Scalar::Float(f) => Scalar::Float(-f),
        }
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -self.clone()
    }
}

impl PartialEq for Scalar {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Scalar {}

impl PartialOrd for Scalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Comparison is exact: floats are compared through their dyadic values.
impl Ord for Scalar {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => a.cmp(b),
            (Scalar::Float(a), Scalar::Float(b)) => a.partial_cmp(b).expect("finite floats"),
            (Scalar::Exact(a), Scalar::Float(b)) => a.cmp(&float_to_rational(b)),
            (Scalar::Float(a), Scalar::Exact(b)) => float_to_rational(a).cmp(b),
        }
    }
}

impl std::iter::Sum for Scalar {
    fn sum<I: Iterator<Item = Scalar>>(iter: I) -> Scalar {
        iter.fold(Scalar::zero(), |a, b| a + b)
    }
}

impl<'a> std::iter::Sum<&'a Scalar> for Scalar {
    fn sum<I: Iterator<Item = &'a Scalar>>(iter: I) -> Scalar {
        iter.fold(Scalar::zero(), |a, b| a + b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> Scalar {
        NumCtx::default().parse(s).unwrap()
    }

    #[test]
    fn parses_rationals_and_decimals() {
        assert_eq!(q("2/6"), Scalar::ratio(1, 3));
        assert!(q("2/6").is_exact());
        assert_eq!(q("-7"), Scalar::int(-7));
        let d = q("0.1");
        assert!(!d.is_exact());
        assert!((d.to_f64() - 0.1).abs() < 1e-17);
        assert!((q("-2.5e-3").to_f64() + 0.0025).abs() < 1e-18);
        assert!(NumCtx::default().parse("1/0").is_err());
        assert!(NumCtx::default().parse("abc").is_err());
        let rational = NumCtx::new(Mode::Rational, 256).unwrap();
        assert!(matches!(rational.parse("0.5"), Err(ScalarError::DecimalInRationalMode(_))));
        assert!(rational.sqrt(&Scalar::int(2)).is_err());
    }

    #[test]
    fn mixed_ops_promote() {
        let a = Scalar::ratio(1, 3);
        let b = Scalar::int(2).sqrt(128).unwrap();
        let c = &a + &b;
        assert_eq!(c.precision(), Some(128));
        assert!((c.to_f64() - (1.0 / 3.0 + 2f64.sqrt())).abs() < 1e-15);
        assert_eq!((&a * &a), Scalar::ratio(1, 9));
    }

    #[test]
    fn sqrt_precision() {
        let r = Scalar::int(2).sqrt(256).unwrap();
        let err = (&r * &r - Scalar::int(2)).abs();
        assert!(err < Scalar::int(2).powi(-250));
        assert_eq!(Scalar::ratio(9, 4).sqrt_exact(), Some(Scalar::ratio(3, 2)));
        assert_eq!(Scalar::ratio(2, 1).sqrt_exact(), None);
        assert!(Scalar::int(-1).sqrt(64).is_err());
    }

    #[test]
    fn exact_comparison_across_kinds() {
        let third = Scalar::ratio(1, 3);
        let f = third.to_float(64);
        assert_ne!(f, third);
        assert_eq!(Scalar::ratio(1, 2).to_float(64), Scalar::ratio(1, 2));
    }

    #[test]
    fn encode_round_trip() {
        for x in [Scalar::ratio(-3, 7), Scalar::int(5), Scalar::int(3).sqrt(200).unwrap()] {
            let back = Scalar::decode(&x.encode()).unwrap();
            assert_eq!(back, x);
            assert_eq!(back.precision(), x.precision());
        }
    }

    #[test]
    fn powers() {
        assert_eq!(Scalar::ratio(2, 3).powi(3), Scalar::ratio(8, 27));
        assert_eq!(Scalar::ratio(2, 3).powi(-2), Scalar::ratio(9, 4));
        let f = Scalar::ratio(1, 2).to_float(64).powi(10);
        assert_eq!(f, Scalar::ratio(1, 1024));
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(Scalar::ratio(1, 4).to_decimal(5), "0.25");
        assert!(Scalar::int(2).sqrt(256).unwrap().to_decimal(20).starts_with("1.414213562373095048"));
        assert_eq!(Scalar::ratio(-3, 1).powi(-400).to_decimal(4), "1.417e-191");
        assert_eq!(Scalar::int(10).powi(30).to_decimal(6), "1e30");
    }
}
