//! Exact univariate polynomials over the rationals.
//!
//! Coefficients are arbitrary-precision rationals kept in canonical form
//! (lowest terms, positive denominator) and stored densely in ascending
//! powers with trailing zeros stripped, so structural equality coincides with
//! polynomial equality. The zero polynomial has no coefficients.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Exact rational number, always reduced with a positive denominator.
pub type Rational = BigRational;

pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Formats as `"num/den"`, e.g. `"-1/2"`, `"0/1"`, `"3/1"`.
pub fn format_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parses `"p/q"` or an integer literal. Decimal and exponent notation are
/// rejected: parameters must be exact.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let text = text.trim();
    let bad = || Error::Parse(format!("expected an integer or p/q rational, got {text:?}"));
    let parse_int = |s: &str| -> Result<BigInt> {
        let s = s.trim();
        let digits = s.strip_prefix(['-', '+']).unwrap_or(s);
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        s.parse::<BigInt>().map_err(|_| bad())
    };
    match text.split_once('/') {
        Some((n, d)) => {
            let n = parse_int(n)?;
            let d = parse_int(d)?;
            if d.is_zero() {
                return Err(Error::Parse(format!("zero denominator in {text:?}")));
            }
            Ok(Rational::new(n, d))
        }
        None => Ok(Rational::from_integer(parse_int(text)?)),
    }
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Exact value of a finite double.
pub fn f64_to_rational(x: f64) -> Option<Rational> {
    Rational::from_float(x)
}

/// Serde adapter for `Rational` fields as `"num/den"` strings.
pub mod serde_rational {
    use super::*;

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
        let text = String::deserialize(d)?;
        parse_rational(&text).map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct RationalPoly {
    coeffs: Vec<Rational>,
}

impl RationalPoly {
    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        Self::from_coeffs(vec![c])
    }

    /// The monomial `s`.
    pub fn x() -> Self {
        Self::from_coeffs(vec![Rational::zero(), Rational::one()])
    }

    /// Builds from ascending-power coefficients, stripping trailing zeros.
    pub fn from_coeffs(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn from_ints(coeffs: &[i64]) -> Self {
        Self::from_coeffs(coeffs.iter().map(|&c| int(c)).collect())
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    /// Coefficient of `s^i` (zero past the degree).
    pub fn coeff(&self, i: usize) -> Rational {
        self.coeffs.get(i).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&Rational> {
        self.coeffs.last()
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self::from_coeffs(self.coeffs.iter().map(|a| a * c).collect())
    }

    /// Divides by the leading coefficient. The zero polynomial stays zero.
    pub fn monic(&self) -> Self {
        match self.leading() {
            Some(lead) => {
                let inv = lead.recip();
                self.scale(&inv)
            }
            None => Self::zero(),
        }
    }

    pub fn derivative(&self) -> Self {
        Self::from_coeffs(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * int(k as i64))
                .collect(),
        )
    }

    pub fn nth_derivative(&self, n: usize) -> Self {
        (0..n).fold(self.clone(), |p, _| p.derivative())
    }

    /// Composition `self(inner(s))`.
    pub fn compose(&self, inner: &RationalPoly) -> Self {
        self.coeffs
            .iter()
            .rev()
            .fold(Self::zero(), |acc, c| &(&acc * inner) + &Self::constant(c.clone()))
    }

    pub fn eval_exact(&self, s: &Rational) -> Rational {
        self.coeffs
            .iter()
            .rev()
            .fold(Rational::zero(), |acc, c| acc * s + c)
    }

    pub fn eval_float(&self, s: f64) -> f64 {
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * s + rational_to_f64(c))
    }

    pub fn to_float(&self) -> FloatPoly {
        FloatPoly::new(self.coeffs.iter().map(rational_to_f64).collect())
    }

    /// Largest coefficient magnitude, zero for the zero polynomial.
    pub fn max_abs_coeff(&self) -> Rational {
        self.coeffs
            .iter()
            .map(|c| c.abs())
            .max()
            .unwrap_or_else(Rational::zero)
    }

    pub fn to_strings(&self) -> Vec<String> {
        self.coeffs.iter().map(format_rational).collect()
    }

    pub fn from_strings<S: AsRef<str>>(items: &[S]) -> Result<Self> {
        items
            .iter()
            .map(|s| parse_rational(s.as_ref()))
            .collect::<Result<Vec<_>>>()
            .map(Self::from_coeffs)
    }
}

impl fmt::Debug for RationalPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RationalPoly({self})")
    }
}

impl fmt::Display for RationalPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let negative = c.is_negative();
            let mag = c.abs();
            if first {
                if negative {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if negative { '-' } else { '+' })?;
            }
            first = false;
            let show_coeff = k == 0 || !mag.is_one();
            if show_coeff {
                write!(f, "{mag}")?;
            }
            match k {
                0 => {}
                1 => write!(f, "s")?,
                _ => write!(f, "s^{k}")?,
            }
        }
        Ok(())
    }
}

impl Serialize for RationalPoly {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_strings().serialize(s)
    }
}

impl<'de> Deserialize<'de> for RationalPoly {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let items = Vec::<String>::deserialize(d)?;
        Self::from_strings(&items).map_err(serde::de::Error::custom)
    }
}

impl Add<&RationalPoly> for &RationalPoly {
    type Output = RationalPoly;
    fn add(self, rhs: &RationalPoly) -> RationalPoly {
        let len = self.coeffs.len().max(rhs.coeffs.len());
        RationalPoly::from_coeffs((0..len).map(|i| self.coeff(i) + rhs.coeff(i)).collect())
    }
}

impl Sub<&RationalPoly> for &RationalPoly {
    type Output = RationalPoly;
    fn sub(self, rhs: &RationalPoly) -> RationalPoly {
        let len = self.coeffs.len().max(rhs.coeffs.len());
        RationalPoly::from_coeffs((0..len).map(|i| self.coeff(i) - rhs.coeff(i)).collect())
    }
}

impl Mul<&RationalPoly> for &RationalPoly {
    type Output = RationalPoly;
    fn mul(self, rhs: &RationalPoly) -> RationalPoly {
        if self.is_zero() || rhs.is_zero() {
            return RationalPoly::zero();
        }
        let mut out = vec![Rational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        RationalPoly::from_coeffs(out)
    }
}

impl Neg for &RationalPoly {
    type Output = RationalPoly;
    fn neg(self) -> RationalPoly {
        RationalPoly::from_coeffs(self.coeffs.iter().map(|c| -c).collect())
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<RationalPoly> for RationalPoly {
            type Output = RationalPoly;
            fn $m(self, rhs: RationalPoly) -> RationalPoly {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&RationalPoly> for RationalPoly {
            type Output = RationalPoly;
            fn $m(self, rhs: &RationalPoly) -> RationalPoly {
                (&self).$m(rhs)
            }
        }
        impl $tr<RationalPoly> for &RationalPoly {
            type Output = RationalPoly;
            fn $m(self, rhs: RationalPoly) -> RationalPoly {
                self.$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for RationalPoly {
    type Output = RationalPoly;
    fn neg(self) -> RationalPoly {
        -&self
    }
}

/// Double-precision copy of a polynomial for fast repeated evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct FloatPoly {
    coeffs: Vec<f64>,
}

impl FloatPoly {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn eval(&self, s: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * s + c)
    }

    /// `(p(s), p'(s))` by a single Horner pass.
    pub fn eval_with_derivative(&self, s: f64) -> (f64, f64) {
        let mut p = 0.0;
        let mut dp = 0.0;
        for &c in self.coeffs.iter().rev() {
            dp = dp * s + p;
            p = p * s + c;
        }
        (p, dp)
    }

    /// `Σ |c_k| |s|^k`, the natural scale of rounding error in `eval`.
    pub fn eval_scale(&self, s: f64) -> f64 {
        let a = s.abs();
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * a + c.abs())
    }

    /// Sign and natural log of `|p(s)|`, usable far outside the range where
    /// `eval` would overflow. Returns sign 0 for an exact zero.
    pub fn signed_log_abs(&self, s: f64) -> (f64, f64) {
        let Some(n) = self.coeffs.len().checked_sub(1) else {
            return (0.0, f64::NEG_INFINITY);
        };
        let value = if s.abs() <= 1.0 {
            self.eval(s)
        } else {
            // p(s) = s^n q(1/s) with q the reversed polynomial.
            let t = s.recip();
            let q = self.coeffs.iter().fold(0.0, |acc, &c| acc * t + c);
            if q == 0.0 {
                return (0.0, f64::NEG_INFINITY);
            }
            let sign = q.signum() * if s < 0.0 && n % 2 == 1 { -1.0 } else { 1.0 };
            return (sign, q.abs().ln() + n as f64 * s.abs().ln());
        };
        if value == 0.0 {
            (0.0, f64::NEG_INFINITY)
        } else {
            (value.signum(), value.abs().ln())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(c: &[i64]) -> RationalPoly {
        RationalPoly::from_ints(c)
    }

    #[test]
    fn difference_of_squares() {
        assert_eq!(&p(&[1, 1]) * &p(&[-1, 1]), p(&[-1, 0, 1]));
    }

    #[test]
    fn additive_identity_and_scaling() {
        let q = RationalPoly::from_coeffs(vec![rat(-1, 2), int(0), int(1)]);
        assert_eq!(&q + &RationalPoly::zero(), q);
        assert_eq!(q.scale(&int(2)), p(&[-1, 0, 2]));
        assert!(q.scale(&int(0)).is_zero());
    }

    #[test]
    fn derivatives() {
        let q = RationalPoly::from_coeffs(vec![rat(-1, 2), int(0), int(1)]);
        assert_eq!(q.derivative(), p(&[0, 2]));
        assert!(p(&[7]).derivative().is_zero());
        assert_eq!(p(&[0, 0, 0, 1]).nth_derivative(2), p(&[0, 6]));
    }

    #[test]
    fn exact_evaluation() {
        let q = RationalPoly::from_coeffs(vec![rat(-1, 2), int(0), int(1)]);
        assert_eq!(q.eval_exact(&int(1)), rat(1, 2));
        assert_eq!(RationalPoly::zero().eval_exact(&rat(3, 7)), int(0));
        let r = RationalPoly::from_coeffs(vec![rat(-1, 5), int(1)]);
        assert_eq!(r.eval_exact(&rat(1, 5)), int(0));
    }

    #[test]
    fn canonical_form() {
        let q = RationalPoly::from_coeffs(vec![rat(2, 4), int(0), int(0)]);
        assert_eq!(q.degree(), Some(0));
        assert_eq!(q.coeffs()[0], rat(1, 2));
        assert_eq!(rat(3, -6), rat(-1, 2));
        assert_eq!(format_rational(&rat(3, -6)), "-1/2");
        assert_eq!(format_rational(&int(0)), "0/1");
        assert!(RationalPoly::from_ints(&[0, 0]).is_zero());
        assert_eq!(RationalPoly::zero().degree(), None);
    }

    #[test]
    fn parse_and_format() {
        assert_eq!(parse_rational("-10/1").unwrap(), int(-10));
        assert_eq!(parse_rational("6/-4").unwrap(), rat(-3, 2));
        assert_eq!(parse_rational("  7 ").unwrap(), int(7));
        assert!(parse_rational("1.5").is_err());
        assert!(parse_rational("1e3").is_err());
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("").is_err());
        let q = RationalPoly::from_coeffs(vec![rat(-1, 2), int(0), int(1)]);
        let json = serde_json::to_string(&q).unwrap();
        assert_eq!(json, r#"["-1/2","0/1","1/1"]"#);
        let back: RationalPoly = serde_json::from_str(&json).unwrap();
        assert_eq!(back, q);
    }

    #[test]
    fn display() {
        let q = RationalPoly::from_coeffs(vec![rat(-1, 2), int(0), int(1)]);
        assert_eq!(q.to_string(), "s^2 - 1/2");
        assert_eq!(p(&[0, -3]).to_string(), "-3s");
        assert_eq!(RationalPoly::zero().to_string(), "0");
    }

    #[test]
    fn compose_affine() {
        // (s^2 - 1)(2s + 1) = 4s^2 + 4s
        let q = p(&[-1, 0, 1]).compose(&p(&[1, 2]));
        assert_eq!(q, p(&[0, 4, 4]));
    }

    #[test]
    fn signed_log_abs_matches_direct() {
        let q = p(&[3, -2, 0, 1]).to_float();
        for &s in &[-7.5, -1.0, -0.3, 0.0, 0.5, 2.0, 40.0] {
            let v = q.eval(s);
            let (sg, lg) = q.signed_log_abs(s);
            assert_eq!(sg, v.signum());
            assert!((lg.exp() - v.abs()).abs() <= 1e-12 * v.abs().max(1.0));
        }
        let (sg, lg) = q.signed_log_abs(1e200);
        assert_eq!(sg, 1.0);
        assert!((lg - 600.0 * 10f64.ln()).abs() < 1e-9);
    }

    fn small_rational() -> impl Strategy<Value = Rational> {
        (-20i64..=20, 1i64..=6).prop_map(|(n, d)| rat(n, d))
    }

    fn small_poly(max_len: usize) -> impl Strategy<Value = RationalPoly> {
        prop::collection::vec(small_rational(), 0..=max_len).prop_map(RationalPoly::from_coeffs)
    }

    proptest! {
        #[test]
        fn ring_axioms(a in small_poly(5), b in small_poly(5), c in small_poly(5)) {
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
            prop_assert_eq!(&a + &b, &b + &a);
            prop_assert_eq!(&a * &b, &b * &a);
            prop_assert!((&a - &a).is_zero());
        }

        #[test]
        fn product_degree(a in small_poly(6), b in small_poly(6)) {
            if let (Some(da), Some(db)) = (a.degree(), b.degree()) {
                prop_assert_eq!((&a * &b).degree(), Some(da + db));
            }
        }

        #[test]
        fn leibniz_rule(a in small_poly(9), b in small_poly(9)) {
            let lhs = (&a * &b).derivative();
            let rhs = &(&a.derivative() * &b) + &(&a * &b.derivative());
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn float_eval_agrees_with_exact(
            coeffs in prop::collection::vec(-1000i64..=1000, 1..=6),
            num in -1000i64..=1000,
            den in 1i64..=8,
        ) {
            let q = RationalPoly::from_ints(&coeffs);
            let s = rat(num, den);
            let exact = rational_to_f64(&q.eval_exact(&s));
            let approx = q.eval_float(rational_to_f64(&s));
            let scale = q.to_float().eval_scale(rational_to_f64(&s)).max(1.0);
            // Relative to the evaluation scale: cancellation in Horner can
            // make the value itself arbitrarily small.
            prop_assert!((exact - approx).abs() <= 1e-12 * scale);
        }
    }
}
