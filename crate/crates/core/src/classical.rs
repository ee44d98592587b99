//! Hermite, Laguerre and Jacobi polynomials over the complex rationals, and
//! the classical form of `Φ_l` in each of the six cases.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exactpoly::{format_rational, int, rat, rational_to_f64, FloatPoly, Rational, RationalPoly};
use crate::polygen::PolySystemSlice;
use crate::system::{CaseTag, HyperSystem};

pub type ComplexRational = Complex<Rational>;

pub fn complex(re: Rational, im: Rational) -> ComplexRational {
    Complex::new(re, im)
}

pub fn real(re: Rational) -> ComplexRational {
    Complex::new(re, Rational::zero())
}

pub fn imag_unit() -> ComplexRational {
    Complex::new(Rational::zero(), Rational::one())
}

fn creal(n: i64) -> ComplexRational {
    real(int(n))
}

fn format_complex(z: &ComplexRational) -> String {
    if z.im.is_zero() {
        format_rational(&z.re)
    } else {
        let sign = if z.im.is_negative() { '-' } else { '+' };
        format!("{}{}{}i", format_rational(&z.re), sign, format_rational(&z.im.abs()))
    }
}

/// Polynomial in `s` with complex-rational coefficients (low degree first,
/// no trailing zeros).
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexPoly {
    coeffs: Vec<ComplexRational>,
}

impl ComplexPoly {
    pub fn from_coeffs(mut coeffs: Vec<ComplexRational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: ComplexRational) -> Self {
        Self::from_coeffs(vec![c])
    }

    /// `c₀ + c₁ s`.
    pub fn affine(c0: ComplexRational, c1: ComplexRational) -> Self {
        Self::from_coeffs(vec![c0, c1])
    }

    pub fn from_real(p: &RationalPoly) -> Self {
        Self::from_coeffs(p.coeffs().iter().cloned().map(real).collect())
    }

    pub fn coeffs(&self) -> &[ComplexRational] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> ComplexRational {
        self.coeffs.get(i).cloned().unwrap_or_else(Complex::zero)
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn scale(&self, c: &ComplexRational) -> Self {
        Self::from_coeffs(self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn eval(&self, s: &ComplexRational) -> ComplexRational {
        self.coeffs.iter().rev().fold(Complex::zero(), |acc, c| acc * s + c)
    }

    pub fn is_real(&self) -> bool {
        self.coeffs.iter().all(|c| c.im.is_zero())
    }

    pub fn real_part(&self) -> RationalPoly {
        RationalPoly::from_coeffs(self.coeffs.iter().map(|c| c.re.clone()).collect())
    }

    pub fn imag_part(&self) -> RationalPoly {
        RationalPoly::from_coeffs(self.coeffs.iter().map(|c| c.im.clone()).collect())
    }
}

impl Add for &ComplexPoly {
    type Output = ComplexPoly;
    fn add(self, rhs: &ComplexPoly) -> ComplexPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        ComplexPoly::from_coeffs((0..n).map(|i| self.coeff(i) + rhs.coeff(i)).collect())
    }
}

impl Sub for &ComplexPoly {
    type Output = ComplexPoly;
    fn sub(self, rhs: &ComplexPoly) -> ComplexPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        ComplexPoly::from_coeffs((0..n).map(|i| self.coeff(i) - rhs.coeff(i)).collect())
    }
}

impl Mul for &ComplexPoly {
    type Output = ComplexPoly;
    fn mul(self, rhs: &ComplexPoly) -> ComplexPoly {
        if self.coeffs.is_empty() || rhs.coeffs.is_empty() {
            return ComplexPoly::zero();
        }
        let mut out = vec![Complex::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] = &out[i + j] + a * b;
            }
        }
        ComplexPoly::from_coeffs(out)
    }
}

impl Neg for &ComplexPoly {
    type Output = ComplexPoly;
    fn neg(self) -> ComplexPoly {
        ComplexPoly::from_coeffs(self.coeffs.iter().map(|c| -c).collect())
    }
}

/// `H_l(x(s))` with `H_{n+1} = 2x H_n − 2n H_{n−1}`.
pub fn hermite_poly(l: usize, x: &ComplexPoly) -> ComplexPoly {
    let mut prev = ComplexPoly::constant(creal(1));
    if l == 0 {
        return prev;
    }
    let two_x = x.scale(&creal(2));
    let mut cur = two_x.clone();
    for n in 1..l {
        let next = &(&two_x * &cur) - &prev.scale(&creal(2 * n as i64));
        prev = cur;
        cur = next;
    }
    cur
}

/// `L_l^p(x(s))` with `(n+1) L_{n+1} = (2n+1+p−x) L_n − (n+p) L_{n−1}`.
pub fn laguerre_poly(l: usize, p: &ComplexRational, x: &ComplexPoly) -> ComplexPoly {
    let mut prev = ComplexPoly::constant(creal(1));
    if l == 0 {
        return prev;
    }
    let mut cur = &ComplexPoly::constant(creal(1) + p) - x;
    for n in 1..l {
        let nn = creal(n as i64);
        let lin = &ComplexPoly::constant(creal(2 * n as i64 + 1) + p) - x;
        let next = (&(&lin * &cur) - &prev.scale(&(&nn + p))).scale(&(creal(1) / creal(n as i64 + 1)));
        prev = cur;
        cur = next;
    }
    cur
}

/// `P_l^{(p,q)}(x(s))` by the three-term recurrence; where its leading
/// factor `2n(n+p+q)(2n+p+q−2)` vanishes the explicit binomial sum is used.
pub fn jacobi_poly(l: usize, p: &ComplexRational, q: &ComplexRational, x: &ComplexPoly) -> ComplexPoly {
    let one = ComplexPoly::constant(creal(1));
    if l == 0 {
        return one;
    }
    let half = real(rat(1, 2));
    let pq = p + q;
    let p1 = &ComplexPoly::constant((p - q) * &half) + &x.scale(&((&pq + creal(2)) * &half));
    let mut prev = one;
    let mut cur = p1;
    for n in 2..=l {
        let nn = creal(n as i64);
        let k = creal(2 * n as i64) + &pq;
        let denom = creal(2) * &nn * (&nn + &pq) * (&k - creal(2));
        if denom.is_zero() {
            return jacobi_poly_explicit(l, p, q, x);
        }
        let lin = &x.scale(&(&k * (&k - creal(2)))) + &ComplexPoly::constant(p * p - q * q);
        let a = (&lin * &cur).scale(&(&k - creal(1)));
        let b = prev.scale(&(creal(2) * (&nn + p - creal(1)) * (&nn + q - creal(1)) * &k));
        let next = (&a - &b).scale(&(creal(1) / denom));
        prev = cur;
        cur = next;
    }
    cur
}

/// `binom(z, j) = z (z−1) ⋯ (z−j+1) / j!`.
fn gen_binomial(z: &ComplexRational, j: usize) -> ComplexRational {
    (0..j).fold(creal(1), |acc, i| acc * (z - creal(i as i64)) / creal(i as i64 + 1))
}

/// `Σ_k binom(l+p, l−k) binom(l+q, k) ((x−1)/2)^k ((x+1)/2)^{l−k}`.
pub fn jacobi_poly_explicit(l: usize, p: &ComplexRational, q: &ComplexRational, x: &ComplexPoly) -> ComplexPoly {
    let half = real(rat(1, 2));
    let minus = (x - &ComplexPoly::constant(creal(1))).scale(&half);
    let plus = (x + &ComplexPoly::constant(creal(1))).scale(&half);
    let lp = creal(l as i64) + p;
    let lq = creal(l as i64) + q;
    let pow = |base: &ComplexPoly, e: usize| (0..e).fold(ComplexPoly::constant(creal(1)), |acc, _| &acc * base);
    (0..=l).fold(ComplexPoly::zero(), |acc, k| {
        let c = gen_binomial(&lp, l - k) * gen_binomial(&lq, k);
        &acc + &(&pow(&minus, k) * &pow(&plus, l - k)).scale(&c)
    })
}

pub fn hermite(l: usize, x: &ComplexRational) -> ComplexRational {
    hermite_poly(l, &ComplexPoly::constant(x.clone())).coeff(0)
}

pub fn laguerre(l: usize, p: &ComplexRational, x: &ComplexRational) -> ComplexRational {
    laguerre_poly(l, p, &ComplexPoly::constant(x.clone())).coeff(0)
}

pub fn jacobi(l: usize, p: &ComplexRational, q: &ComplexRational, x: &ComplexRational) -> ComplexRational {
    jacobi_poly(l, p, q, &ComplexPoly::constant(x.clone())).coeff(0)
}

/// Exact square root of a non-negative rational, if it is rational.
pub fn rational_sqrt(r: &Rational) -> Option<Rational> {
    if r.is_negative() {
        return None;
    }
    let n = r.numer().sqrt();
    let d = r.denom().sqrt();
    (&n * &n == *r.numer() && &d * &d == *r.denom()).then(|| Rational::new(n, d))
}

#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    Hermite,
    Laguerre { p: Rational },
    Jacobi { p: ComplexRational, q: ComplexRational },
}

#[derive(Debug, Clone, PartialEq)]
pub enum ArgTransform {
    /// `x = c s + d`.
    Affine { scale: Rational, shift: Rational },
    /// `x = c s + d` with `c = √c²` irrational; `d = −β/(2c)`.
    AffineIrrational { scale_squared: Rational, beta: Rational },
    /// `(s/β)^l · f(β/s)`.
    Reciprocal { beta: Rational },
    /// `i^l · f(i s)`.
    Imaginary,
}

/// The classical polynomial and argument substitution for one case.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalRef {
    pub l: usize,
    pub family: Family,
    pub transform: ArgTransform,
}

impl fmt::Display for ClassicalRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let l = self.l;
        let head = match &self.family {
            Family::Hermite => format!("H_{l}"),
            Family::Laguerre { p } => format!("L_{l}^({})", format_rational(p)),
            Family::Jacobi { p, q } => format!("P_{l}^({}, {})", format_complex(p), format_complex(q)),
        };
        match &self.transform {
            ArgTransform::Affine { scale, shift } => {
                write!(f, "{head}({}*s + {})", format_rational(scale), format_rational(shift))
            }
            ArgTransform::AffineIrrational { scale_squared, beta } => write!(
                f,
                "{head}(sqrt({c2})*s - {b}/(2*sqrt({c2})))",
                c2 = format_rational(scale_squared),
                b = format_rational(beta)
            ),
            ArgTransform::Reciprocal { beta } => {
                let b = format_rational(beta);
                write!(f, "(s/{b})^{l} * {head}({b}/s)")
            }
            ArgTransform::Imaginary => write!(f, "i^{l} * {head}(i*s)"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ReferenceForm {
    Exact(RationalPoly),
    /// Coefficients in floating point (irrational Hermite scaling).
    Float(FloatPoly),
}

/// The classical expression expanded as a polynomial in `s`.
#[derive(Debug, Clone, PartialEq)]
pub struct Theorem2Reference {
    pub classical: ClassicalRef,
    pub form: ReferenceForm,
    /// For the imaginary substitution: whether every coefficient of the
    /// expansion has zero imaginary part. Always `true` otherwise.
    pub imaginary_part_zero: bool,
}

impl Theorem2Reference {
    pub fn eval_f64(&self, s: f64) -> f64 {
        match &self.form {
            ReferenceForm::Exact(p) => p.eval_float(s),
            ReferenceForm::Float(p) => p.eval(s),
        }
    }

    pub fn eval_exact(&self, s: &Rational) -> Option<Rational> {
        match &self.form {
            ReferenceForm::Exact(p) => Some(p.eval_exact(s)),
            ReferenceForm::Float(_) => None,
        }
    }
}

/// Coefficients of `p(c s + d)` in floating point.
fn compose_affine_f64(p: &RationalPoly, c: f64, d: f64) -> FloatPoly {
    let mut out: Vec<f64> = Vec::new();
    for a in p.coeffs().iter().rev() {
        // out ← out·(c s + d) + a
        let mut next = vec![0.0; out.len() + 1];
        for (i, v) in out.iter().enumerate() {
            next[i] += v * d;
            next[i + 1] += v * c;
        }
        next[0] += rational_to_f64(a);
        out = next;
    }
    FloatPoly::new(out)
}

/// The classical polynomial proportional to `Φ_l` for the case of `sys`.
pub fn theorem2_reference(sys: &HyperSystem, l: usize) -> Result<Theorem2Reference> {
    sys.check_index(l)?;
    let a = sys.alpha().clone();
    let b = sys.beta().clone();
    let half = rat(1, 2);
    let one = Rational::one();
    let s = ComplexPoly::affine(creal(0), creal(1));
    let exact = |classical: ClassicalRef, p: ComplexPoly| Theorem2Reference {
        classical,
        imaginary_part_zero: p.is_real(),
        form: ReferenceForm::Exact(p.real_part()),
    };
    Ok(match sys.case() {
        CaseTag::Const => {
            let c2 = -&a * &half;
            match rational_sqrt(&c2) {
                Some(c) => {
                    let shift = -&b / (int(2) * &c);
                    let x = ComplexPoly::affine(real(shift.clone()), real(c.clone()));
                    let cref = ClassicalRef {
                        l,
                        family: Family::Hermite,
                        transform: ArgTransform::Affine { scale: c, shift },
                    };
                    exact(cref, hermite_poly(l, &x))
                }
                None => {
                    let h = hermite_poly(l, &s).real_part();
                    let c = rational_to_f64(&c2).sqrt();
                    let d = -rational_to_f64(&b) / (2.0 * c);
                    Theorem2Reference {
                        classical: ClassicalRef {
                            l,
                            family: Family::Hermite,
                            transform: ArgTransform::AffineIrrational { scale_squared: c2, beta: b },
                        },
                        form: ReferenceForm::Float(compose_affine_f64(&h, c, d)),
                        imaginary_part_zero: true,
                    }
                }
            }
        }
        CaseTag::Linear => {
            let p = &b - &one;
            let x = ComplexPoly::affine(creal(0), real(-&a));
            let cref = ClassicalRef {
                l,
                family: Family::Laguerre { p: p.clone() },
                transform: ArgTransform::Affine { scale: -&a, shift: Rational::zero() },
            };
            exact(cref, laguerre_poly(l, &real(p), &x))
        }
        CaseTag::OneMinusS2 => {
            let p = real(-(&a + &b) * &half - &one);
            let q = real((-&a + &b) * &half - &one);
            let cref = ClassicalRef {
                l,
                family: Family::Jacobi { p: p.clone(), q: q.clone() },
                transform: ArgTransform::Affine { scale: one.clone(), shift: Rational::zero() },
            };
            exact(cref, jacobi_poly(l, &p, &q, &s))
        }
        CaseTag::S2MinusOne => {
            let p = real((&a - &b) * &half - &one);
            let q = real((&a + &b) * &half - &one);
            let x = ComplexPoly::affine(creal(0), creal(-1));
            let cref = ClassicalRef {
                l,
                family: Family::Jacobi { p: p.clone(), q: q.clone() },
                transform: ArgTransform::Affine { scale: -one.clone(), shift: Rational::zero() },
            };
            exact(cref, jacobi_poly(l, &p, &q, &x))
        }
        CaseTag::S2 => {
            let p = int(1) - &a - int(2 * l as i64);
            let lag = laguerre_poly(l, &real(p.clone()), &s).real_part();
            // (s/β)^l Σ a_k (β/s)^k = Σ a_k β^{k−l} s^{l−k}
            let mut coeffs = vec![Rational::zero(); l + 1];
            for (k, ak) in lag.coeffs().iter().enumerate() {
                let bpow = num_traits::pow(b.clone(), k.abs_diff(l));
                let factor = if k >= l { bpow } else { one.clone() / bpow };
                coeffs[l - k] = ak * factor;
            }
            let cref = ClassicalRef {
                l,
                family: Family::Laguerre { p },
                transform: ArgTransform::Reciprocal { beta: b },
            };
            Theorem2Reference {
                classical: cref,
                form: ReferenceForm::Exact(RationalPoly::from_coeffs(coeffs)),
                imaginary_part_zero: true,
            }
        }
        CaseTag::S2PlusOne => {
            let p = complex(&a * &half - &one, &b * &half);
            let q = p.conj();
            let i = imag_unit();
            let x = ComplexPoly::affine(creal(0), i.clone());
            let il = (0..l).fold(creal(1), |acc, _| acc * &i);
            let cref = ClassicalRef {
                l,
                family: Family::Jacobi { p: p.clone(), q: q.clone() },
                transform: ArgTransform::Imaginary,
            };
            exact(cref, jacobi_poly(l, &p, &q, &x).scale(&il))
        }
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum Proportionality {
    /// `f = c · g`.
    Constant(Rational),
    Mismatch,
}

/// `count` distinct rational sample points.
pub fn sample_points(count: usize) -> Vec<Rational> {
    (0..count).map(|k| rat(3 * k as i64 + 1, 7)).collect()
}

/// Exact test of `f = c · g` at the given points. Needs more points than
/// either degree so that agreement at the points implies identity.
pub fn proportionality_check(f: &RationalPoly, g: &RationalPoly, points: &[Rational]) -> Result<Proportionality> {
    let needed = f.degree().unwrap_or(0).max(g.degree().unwrap_or(0)) + 1;
    if points.len() < needed {
        return Err(Error::InvalidIndex(format!(
            "{} sample points given, {needed} needed",
            points.len()
        )));
    }
    let fv: Vec<Rational> = points.iter().map(|s| f.eval_exact(s)).collect();
    let gv: Vec<Rational> = points.iter().map(|s| g.eval_exact(s)).collect();
    let Some(pivot) = gv.iter().position(|v| !v.is_zero()) else {
        return Err(Error::AllZero);
    };
    let c = &fv[pivot] / &gv[pivot];
    let ok = fv.iter().zip(&gv).all(|(a, b)| *a == &c * b);
    Ok(if ok { Proportionality::Constant(c) } else { Proportionality::Mismatch })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FloatProportionality {
    pub constant: f64,
    /// Largest `|f − c g| / Σ|f_k||s|^k` over the sample points.
    pub max_deviation: f64,
    pub proportional: bool,
}

/// Least-squares `c` in `f ≈ c · g`, accepted when every point deviates by
/// at most `tol` relative to the evaluation scale of `f`.
pub fn proportionality_check_float(
    f: &RationalPoly,
    g: &FloatPoly,
    points: &[f64],
    tol: f64,
) -> Result<FloatProportionality> {
    let ff = f.to_float();
    let fv: Vec<f64> = points.iter().map(|&s| ff.eval(s)).collect();
    let gv: Vec<f64> = points.iter().map(|&s| g.eval(s)).collect();
    let gg: f64 = gv.iter().map(|v| v * v).sum();
    if gg == 0.0 {
        return Err(Error::AllZero);
    }
    let c = fv.iter().zip(&gv).map(|(a, b)| a * b).sum::<f64>() / gg;
    let max_deviation = points
        .iter()
        .zip(fv.iter().zip(&gv))
        .map(|(&s, (a, b))| (a - c * b).abs() / ff.eval_scale(s).max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max);
    Ok(FloatProportionality { constant: c, max_deviation, proportional: max_deviation <= tol })
}

#[derive(Debug, Clone, Serialize)]
pub struct Theorem2Verdict {
    pub l: usize,
    pub reference: String,
    pub exact: bool,
    /// `Φ_l = c · reference`; `"p/q"` when exact.
    pub constant: String,
    pub proportional: bool,
    pub imaginary_part_zero: bool,
    pub max_deviation: Option<f64>,
}

impl Theorem2Verdict {
    pub fn passed(&self) -> bool {
        self.proportional && self.imaginary_part_zero
    }
}

pub const FLOAT_PROPORTIONALITY_TOL: f64 = 1e-10;

pub fn check_theorem2(slice: &PolySystemSlice, l: usize) -> Result<Theorem2Verdict> {
    let sys = slice.sys();
    let phi = slice.phi(l)?;
    let r = theorem2_reference(sys, l)?;
    let reference = r.classical.to_string();
    Ok(match &r.form {
        ReferenceForm::Exact(g) => {
            let verdict = proportionality_check(phi, g, &sample_points(l + 2))?;
            let (proportional, constant) = match verdict {
                Proportionality::Constant(c) => (true, format_rational(&c)),
                Proportionality::Mismatch => (false, "mismatch".to_string()),
            };
            Theorem2Verdict {
                l,
                reference,
                exact: true,
                constant,
                proportional,
                imaginary_part_zero: r.imaginary_part_zero,
                max_deviation: None,
            }
        }
        ReferenceForm::Float(g) => {
            let v = proportionality_check_float(phi, g, &sys.interior_points(20), FLOAT_PROPORTIONALITY_TOL)?;
            Theorem2Verdict {
                l,
                reference,
                exact: false,
                constant: format!("{:.16e}", v.constant),
                proportional: v.proportional,
                imaginary_part_zero: true,
                max_deviation: Some(v.max_deviation),
            }
        }
    })
}
