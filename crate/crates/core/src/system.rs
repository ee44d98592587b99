//! The six canonical hypergeometric-type systems `σ y'' + τ y' + λ y = 0`.
//!
//! Each case fixes `σ`; the parameters `α, β` fix `τ(s) = α s + β`. The
//! weight `ρ` solves the Pearson equation `(σρ)' = τρ`, and the interval
//! `(a, b)` is where `σ > 0`, `ρ > 0` and `σρ` vanishes at both ends.

use std::fmt;
use std::str::FromStr;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactpoly::{format_rational, int, rat, rational_to_f64, serde_rational, Rational, RationalPoly};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseTag {
    /// σ = 1, Hermite-like.
    Const,
    /// σ = s, Laguerre-like.
    Linear,
    /// σ = 1 − s², Jacobi-like.
    OneMinusS2,
    /// σ = s² − 1.
    S2MinusOne,
    /// σ = s².
    S2,
    /// σ = s² + 1.
    S2PlusOne,
}

impl CaseTag {
    pub const ALL: [CaseTag; 6] = [
        CaseTag::Const,
        CaseTag::Linear,
        CaseTag::OneMinusS2,
        CaseTag::S2MinusOne,
        CaseTag::S2,
        CaseTag::S2PlusOne,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CaseTag::Const => "const",
            CaseTag::Linear => "linear",
            CaseTag::OneMinusS2 => "one_minus_s2",
            CaseTag::S2MinusOne => "s2_minus_one",
            CaseTag::S2 => "s2",
            CaseTag::S2PlusOne => "s2_plus_one",
        }
    }

    /// `(σ₀, σ₁, σ₂)` with `σ = σ₂ s² + σ₁ s + σ₀`.
    pub fn sigma_coeffs(self) -> [i64; 3] {
        match self {
            CaseTag::Const => [1, 0, 0],
            CaseTag::Linear => [0, 1, 0],
            CaseTag::OneMinusS2 => [1, 0, -1],
            CaseTag::S2MinusOne => [-1, 0, 1],
            CaseTag::S2 => [0, 0, 1],
            CaseTag::S2PlusOne => [1, 0, 1],
        }
    }

    pub fn sigma_label(self) -> &'static str {
        match self {
            CaseTag::Const => "1",
            CaseTag::Linear => "s",
            CaseTag::OneMinusS2 => "1-s^2",
            CaseTag::S2MinusOne => "s^2-1",
            CaseTag::S2 => "s^2",
            CaseTag::S2PlusOne => "s^2+1",
        }
    }

    /// Whether only finitely many polynomials are orthogonal (ν < ∞).
    pub fn is_finite_family(self) -> bool {
        matches!(self, CaseTag::S2MinusOne | CaseTag::S2 | CaseTag::S2PlusOne)
    }

    pub fn interval(self) -> (f64, f64) {
        match self {
            CaseTag::Const | CaseTag::S2PlusOne => (f64::NEG_INFINITY, f64::INFINITY),
            CaseTag::Linear | CaseTag::S2 => (0.0, f64::INFINITY),
            CaseTag::OneMinusS2 => (-1.0, 1.0),
            CaseTag::S2MinusOne => (1.0, f64::INFINITY),
        }
    }
}

impl fmt::Display for CaseTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Accepts the snake-case name or the σ label (`"s"`, `"1-s^2"`, …).
impl FromStr for CaseTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CaseTag::ALL
            .into_iter()
            .find(|c| c.name() == s || c.sigma_label() == s)
            .ok_or_else(|| Error::Parse(format!("unknown case {s:?}")))
    }
}

/// The index bound ν: polynomials `Φ_l` are orthogonal for integers `l < ν`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Cutoff {
    Infinite,
    Finite(Rational),
}

impl Cutoff {
    pub fn admits(&self, l: usize) -> bool {
        match self {
            Cutoff::Infinite => true,
            Cutoff::Finite(nu) => int(l as i64) < *nu,
        }
    }

    /// Largest admissible index, `None` when unbounded.
    pub fn max_index(&self) -> Option<usize> {
        match self {
            Cutoff::Infinite => None,
            Cutoff::Finite(nu) => {
                let ceil = nu.ceil().to_integer();
                let top: i64 = (ceil - 1u8).try_into().unwrap_or(i64::MAX);
                Some(top.max(0) as usize)
            }
        }
    }

    /// Number of admissible indices `0 ≤ l < min(ν, cap)`.
    pub fn count_up_to(&self, cap: usize) -> usize {
        match self.max_index() {
            None => cap,
            Some(top) => (top + 1).min(cap),
        }
    }
}

impl fmt::Display for Cutoff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cutoff::Infinite => f.write_str("inf"),
            Cutoff::Finite(nu) => f.write_str(&format_rational(nu)),
        }
    }
}

/// A point of `(a, b)` together with its distances to the endpoints, so that
/// weights with endpoint power singularities can be evaluated without
/// cancellation. Distances to infinite endpoints are `+∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SPoint {
    pub s: f64,
    pub from_a: f64,
    pub to_b: f64,
}

impl SPoint {
    pub fn new(interval: (f64, f64), s: f64) -> Self {
        Self { s, from_a: s - interval.0, to_b: interval.1 - s }
    }
}

/// JSON form `{"case": ..., "alpha": "p/q", "beta": "p/q"}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemDescriptor {
    pub case: CaseTag,
    #[serde(with = "serde_rational")]
    pub alpha: Rational,
    #[serde(with = "serde_rational")]
    pub beta: Rational,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HyperSystem {
    case: CaseTag,
    alpha: Rational,
    beta: Rational,
    sigma: RationalPoly,
    tau: RationalPoly,
    af: f64,
    bf: f64,
}

fn check_admissible(case: CaseTag, alpha: &Rational, beta: &Rational) -> Result<()> {
    let zero = Rational::zero();
    let fail = |msg: &str| Err(Error::Inadmissible(format!("case {case} requires {msg}")));
    match case {
        CaseTag::Const | CaseTag::S2PlusOne => {
            if *alpha >= zero {
                return fail("alpha<0");
            }
        }
        CaseTag::Linear | CaseTag::S2 => {
            if *alpha >= zero {
                return fail("alpha<0");
            }
            if *beta <= zero {
                return fail("beta>0");
            }
        }
        CaseTag::OneMinusS2 => {
            if !(*alpha < *beta && *beta < -alpha) {
                return fail("alpha<beta<-alpha");
            }
        }
        CaseTag::S2MinusOne => {
            if !(-beta < *alpha && *alpha < zero) {
                return fail("-beta<alpha<0");
            }
        }
    }
    Ok(())
}

/// `e · ln(x)` with the convention `0 · ln(0) = 0`.
fn pow_term(e: f64, ln_x: f64) -> f64 {
    if e == 0.0 {
        0.0
    } else {
        e * ln_x
    }
}

impl HyperSystem {
    /// Validates `(α, β)` against the strict admissibility inequalities of
    /// the chosen case.
    pub fn new(case: CaseTag, alpha: Rational, beta: Rational) -> Result<Self> {
        check_admissible(case, &alpha, &beta)?;
        let sigma = RationalPoly::from_ints(&case.sigma_coeffs());
        let tau = RationalPoly::from_coeffs(vec![beta.clone(), alpha.clone()]);
        let (af, bf) = case.interval();
        let sys = Self { case, alpha, beta, sigma, tau, af, bf };
        for s in sys.interior_points(32) {
            let pt = SPoint::new(sys.interval(), s);
            if !(sys.sigma_f64(s) > 0.0 && sys.log_weight(&pt).is_finite()) {
                return Err(Error::Inadmissible(format!("sigma or rho not positive at s = {s}")));
            }
        }
        Ok(sys)
    }

    pub fn from_descriptor(d: &SystemDescriptor) -> Result<Self> {
        Self::new(d.case, d.alpha.clone(), d.beta.clone())
    }

    pub fn descriptor(&self) -> SystemDescriptor {
        SystemDescriptor { case: self.case, alpha: self.alpha.clone(), beta: self.beta.clone() }
    }

    pub fn case(&self) -> CaseTag {
        self.case
    }

    pub fn alpha(&self) -> &Rational {
        &self.alpha
    }

    pub fn beta(&self) -> &Rational {
        &self.beta
    }

    pub fn sigma(&self) -> &RationalPoly {
        &self.sigma
    }

    pub fn tau(&self) -> &RationalPoly {
        &self.tau
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.af, self.bf)
    }

    pub fn contains(&self, s: f64) -> bool {
        self.af < s && s < self.bf
    }

    pub fn interval_label(&self) -> String {
        let show = |x: f64| {
            if x == f64::INFINITY {
                "inf".to_string()
            } else if x == f64::NEG_INFINITY {
                "-inf".to_string()
            } else {
                format!("{x}")
            }
        };
        format!("({},{})", show(self.af), show(self.bf))
    }

    /// `σ₂` with `σ''/2 = σ₂`.
    fn sigma2(&self) -> Rational {
        self.sigma.coeff(2)
    }

    /// `λ_l = −σ''/2 · l(l−1) − τ' · l`.
    pub fn lambda(&self, l: usize) -> Rational {
        let l = int(l as i64);
        -(self.sigma2() * &l * (&l - Rational::one())) - &self.alpha * &l
    }

    pub fn lambda_f64(&self, l: usize) -> f64 {
        rational_to_f64(&self.lambda(l))
    }

    /// ν = ∞ for σ ∈ {1, s, 1−s²}; (1−α)/2 otherwise.
    pub fn nu(&self) -> Cutoff {
        if self.case.is_finite_family() {
            Cutoff::Finite((Rational::one() - &self.alpha) / int(2))
        } else {
            Cutoff::Infinite
        }
    }

    pub fn check_index(&self, l: usize) -> Result<()> {
        if self.nu().admits(l) {
            Ok(())
        } else {
            Err(Error::IndexBeyondCutoff { index: l, nu: self.nu().to_string() })
        }
    }

    /// Strict growth of `λ_0 < λ_1 < …` over the admissible range
    /// (first 50 values for infinite families).
    pub fn lambda_strictly_increasing(&self) -> bool {
        let count = self.nu().count_up_to(50);
        self.first_non_increase(count).is_none()
    }

    /// First `l < count` with `λ_l ≤ λ_{l−1}`, ignoring the cutoff.
    pub fn first_non_increase(&self, count: usize) -> Option<usize> {
        (1..count).find(|&l| self.lambda(l) <= self.lambda(l - 1))
    }

    pub fn sigma_f64(&self, s: f64) -> f64 {
        let [c0, c1, c2] = self.case.sigma_coeffs();
        c0 as f64 + s * (c1 as f64 + s * c2 as f64)
    }

    pub fn sigma_prime_f64(&self, s: f64) -> f64 {
        let [_, c1, c2] = self.case.sigma_coeffs();
        c1 as f64 + 2.0 * c2 as f64 * s
    }

    pub fn tau_f64(&self, s: f64) -> f64 {
        rational_to_f64(&self.alpha) * s + rational_to_f64(&self.beta)
    }

    /// `ln σ(s)` using the endpoint distances where σ vanishes.
    pub fn log_sigma(&self, pt: &SPoint) -> f64 {
        let s = pt.s;
        match self.case {
            CaseTag::Const => 0.0,
            CaseTag::Linear => pt.from_a.ln(),
            CaseTag::OneMinusS2 => pt.from_a.ln() + pt.to_b.ln(),
            CaseTag::S2MinusOne => pt.from_a.ln() + (s + 1.0).ln(),
            CaseTag::S2 => 2.0 * s.abs().ln(),
            CaseTag::S2PlusOne => 2.0 * s.hypot(1.0).ln(),
        }
    }

    /// `ln ρ(s)`.
    pub fn log_weight(&self, pt: &SPoint) -> f64 {
        let a = rational_to_f64(&self.alpha);
        let b = rational_to_f64(&self.beta);
        let s = pt.s;
        match self.case {
            CaseTag::Const => a * s * s / 2.0 + b * s,
            CaseTag::Linear => pow_term(b - 1.0, pt.from_a.ln()) + a * s,
            CaseTag::OneMinusS2 => {
                let (e1, e2) = self.jacobi_exponents();
                pow_term(e1, pt.from_a.ln()) + pow_term(e2, pt.to_b.ln())
            }
            CaseTag::S2MinusOne => {
                let (e1, e2) = self.jacobi_exponents();
                pow_term(e1, (s + 1.0).ln()) + pow_term(e2, pt.from_a.ln())
            }
            CaseTag::S2 => pow_term(a - 2.0, s.ln()) - b / s,
            CaseTag::S2PlusOne => pow_term(a / 2.0 - 1.0, 2.0 * s.hypot(1.0).ln()) + b * s.atan(),
        }
    }

    /// Exponents of `(1+s)` and `(1−s)` (case 1−s²) or of `(s+1)` and
    /// `(s−1)` (case s²−1) in the weight.
    fn jacobi_exponents(&self) -> (f64, f64) {
        let (e1, e2) = self.jacobi_exponents_exact();
        (rational_to_f64(&e1), rational_to_f64(&e2))
    }

    fn jacobi_exponents_exact(&self) -> (Rational, Rational) {
        let a = &self.alpha;
        let b = &self.beta;
        let half = rat(1, 2);
        match self.case {
            CaseTag::OneMinusS2 => (
                -(a - b) * &half - Rational::one(),
                -(a + b) * &half - Rational::one(),
            ),
            _ => ((a - b) * &half - Rational::one(), (a + b) * &half - Rational::one()),
        }
    }

    /// `ρ_m(s₀) = σ^m(s₀) ρ(s₀)`.
    pub fn weight(&self, m: usize, s0: f64) -> Result<f64> {
        if !self.contains(s0) {
            return Err(Error::OutOfDomain { point: s0, domain: self.interval_label() });
        }
        let pt = SPoint::new(self.interval(), s0);
        Ok(self.log_weight_m(m, &pt).exp())
    }

    pub fn log_weight_m(&self, m: usize, pt: &SPoint) -> f64 {
        let base = self.log_weight(pt);
        if m == 0 {
            base
        } else {
            base + m as f64 * self.log_sigma(pt)
        }
    }

    /// Human-readable weight with the parameters substituted.
    pub fn weight_formula(&self) -> String {
        let r = |x: &Rational| {
            if x.is_integer() {
                x.to_integer().to_string()
            } else {
                format!("({})", x)
            }
        };
        let a = &self.alpha;
        let b = &self.beta;
        match self.case {
            CaseTag::Const => format!("exp({}*s^2/2 + {}*s)", r(a), r(b)),
            CaseTag::Linear => format!("s^{} * exp({}*s)", r(&(b - Rational::one())), r(a)),
            CaseTag::OneMinusS2 => {
                let (e1, e2) = self.jacobi_exponents_exact();
                format!("(1+s)^{} * (1-s)^{}", r(&e1), r(&e2))
            }
            CaseTag::S2MinusOne => {
                let (e1, e2) = self.jacobi_exponents_exact();
                format!("(s+1)^{} * (s-1)^{}", r(&e1), r(&e2))
            }
            CaseTag::S2 => format!("s^{} * exp(-{}/s)", r(&(a - int(2))), r(b)),
            CaseTag::S2PlusOne => {
                format!("(1+s^2)^{} * exp({}*atan(s))", r(&(a / int(2) - Rational::one())), r(b))
            }
        }
    }

    /// `n` Chebyshev-spaced points strictly inside `(a, b)`; infinite
    /// endpoints are reached through a rational map of `(−1, 1)`.
    pub fn interior_points(&self, n: usize) -> Vec<f64> {
        let (a, b) = self.interval();
        let scale = self.natural_scale();
        (0..n)
            .map(|k| {
                let t = -((2 * k + 1) as f64 * std::f64::consts::PI / (2 * n) as f64).cos();
                match (a.is_finite(), b.is_finite()) {
                    (true, true) => 0.5 * (a + b) + 0.5 * (b - a) * t,
                    (true, false) => a + scale * (1.0 + t) / (1.0 - t),
                    (false, false) => self.center() + scale * t / (1.0 - t * t),
                    (false, true) => b - scale * (1.0 - t) / (1.0 + t),
                }
            })
            .collect()
    }

    /// Rough location of the bulk of the weight (used to centre rules).
    pub fn center(&self) -> f64 {
        let a = rational_to_f64(&self.alpha);
        let b = rational_to_f64(&self.beta);
        match self.case {
            CaseTag::Const => -b / a,
            CaseTag::S2PlusOne => 0.0,
            CaseTag::Linear => (b / -a).max(1e-3),
            CaseTag::S2 => (b / -a).max(1e-3),
            CaseTag::OneMinusS2 => 0.0,
            CaseTag::S2MinusOne => 2.0,
        }
    }

    /// Rough width of the weight (used to scale rules).
    pub fn natural_scale(&self) -> f64 {
        let a = rational_to_f64(&self.alpha);
        let b = rational_to_f64(&self.beta);
        match self.case {
            CaseTag::Const => 1.0 / (-a).sqrt(),
            CaseTag::Linear => (b.max(1.0)) / -a,
            CaseTag::S2 => (b / -a).max(1e-3),
            CaseTag::OneMinusS2 => 1.0,
            CaseTag::S2MinusOne | CaseTag::S2PlusOne => 1.0,
        }
    }
}

impl fmt::Display for HyperSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}(alpha={}, beta={})",
            self.case,
            format_rational(&self.alpha),
            format_rational(&self.beta)
        )
    }
}

/// Convenience constructor from integer pairs `(num, den)`.
pub fn make_system(case: CaseTag, alpha: (i64, i64), beta: (i64, i64)) -> Result<HyperSystem> {
    HyperSystem::new(case, rat(alpha.0, alpha.1), rat(beta.0, beta.1))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sys(case: CaseTag, a: i64, b: i64) -> HyperSystem {
        make_system(case, (a, 1), (b, 1)).unwrap()
    }

    #[test]
    fn admissibility() {
        let s = sys(CaseTag::OneMinusS2, -3, 1);
        assert_eq!(s.interval(), (-1.0, 1.0));
        for case in CaseTag::ALL {
            assert!(matches!(
                make_system(case, (0, 1), (1, 2)),
                Err(Error::Inadmissible(_))
            ));
        }
        let err = make_system(CaseTag::Linear, (-1, 1), (0, 1)).unwrap_err();
        assert!(err.to_string().contains("beta>0"));
        assert!(make_system(CaseTag::OneMinusS2, (-3, 1), (3, 1)).is_err());
        assert!(make_system(CaseTag::OneMinusS2, (-3, 1), (-3, 1)).is_err());
        assert!(make_system(CaseTag::S2MinusOne, (-8, 1), (2, 1)).is_err());
        assert!(make_system(CaseTag::S2MinusOne, (-2, 1), (2, 1)).is_err());
        assert!(make_system(CaseTag::S2MinusOne, (-8, 1), (10, 1)).is_ok());
        assert!(make_system(CaseTag::S2, (-6, 1), (-4, 1)).is_err());
        assert!(make_system(CaseTag::S2PlusOne, (-1, 1), (-7, 1)).is_ok());
    }

    #[test]
    fn eigenvalues() {
        assert_eq!(sys(CaseTag::OneMinusS2, -3, 1).lambda(2), int(8));
        for case in CaseTag::ALL {
            let s = crate::samples::default_samples(case).remove(0);
            assert_eq!(s.lambda(0), int(0));
        }
        assert_eq!(sys(CaseTag::S2, -6, 2).lambda(3), int(12));
    }

    #[test]
    fn cutoff() {
        assert_eq!(sys(CaseTag::Const, -2, 0).nu(), Cutoff::Infinite);
        assert_eq!(sys(CaseTag::Const, -2, 0).nu().to_string(), "inf");
        let nu = sys(CaseTag::S2, -10, 2).nu();
        assert_eq!(nu, Cutoff::Finite(rat(11, 2)));
        assert_eq!(nu.max_index(), Some(5));
        let nu = sys(CaseTag::S2PlusOne, -1, 0).nu();
        assert_eq!(nu, Cutoff::Finite(int(1)));
        assert_eq!(nu.max_index(), Some(0));
        assert!(nu.admits(0) && !nu.admits(1));
        // Integer ν is itself excluded.
        let nu = sys(CaseTag::S2, -5, 1).nu();
        assert_eq!(nu, Cutoff::Finite(int(3)));
        assert_eq!(nu.max_index(), Some(2));
    }

    #[test]
    fn weights() {
        let w = sys(CaseTag::Const, -2, 0).weight(0, 0.0).unwrap();
        assert_eq!(w, 1.0);
        let w = sys(CaseTag::Linear, -1, 1).weight(0, 2.0).unwrap();
        assert!((w - (-2.0f64).exp()).abs() < 1e-15);
        let w = sys(CaseTag::S2, -6, 2).weight(0, 1.0).unwrap();
        assert!((w - (-2.0f64).exp()).abs() < 1e-15);
        let w = sys(CaseTag::S2, -6, 2).weight(2, 2.0).unwrap();
        let expect = 16.0 * 2f64.powi(-8) * (-1.0f64).exp();
        assert!((w - expect).abs() < 1e-15 * expect);
        assert!(matches!(
            sys(CaseTag::Linear, -1, 1).weight(0, -1.0),
            Err(Error::OutOfDomain { .. })
        ));
        assert!(sys(CaseTag::OneMinusS2, -3, 1).weight(0, 1.0).is_err());
    }

    #[test]
    fn monotone_eigenvalues() {
        assert!(sys(CaseTag::Const, -2, 0).lambda_strictly_increasing());
        let s = sys(CaseTag::S2, -6, 2);
        assert!(s.lambda_strictly_increasing());
        let lam: Vec<_> = (0..4).map(|l| s.lambda(l)).collect();
        assert_eq!(lam, vec![int(0), int(6), int(10), int(12)]);
        assert_eq!(s.first_non_increase(5), Some(4));
        assert_eq!(s.lambda(4), int(12));
    }

    #[test]
    fn pearson_identity_numerically() {
        // d/ds ln(σρ) = τ/σ, checked by central differences.
        for case in CaseTag::ALL {
            for s in crate::samples::default_samples(case) {
                for x in s.interior_points(9) {
                    let h = 1e-5 * x.abs().max(1e-2);
                    let f = |y: f64| {
                        let pt = SPoint::new(s.interval(), y);
                        s.log_weight(&pt) + s.log_sigma(&pt)
                    };
                    let lhs = (f(x + h) - f(x - h)) / (2.0 * h);
                    let rhs = s.tau_f64(x) / s.sigma_f64(x);
                    assert!(
                        (lhs - rhs).abs() < 1e-6 * (1.0 + rhs.abs()),
                        "{s} at {x}: {lhs} vs {rhs}"
                    );
                }
            }
        }
    }

    #[test]
    fn descriptor_json() {
        let json = r#"{"case":"s2","alpha":"-10/1","beta":"2/1"}"#;
        let d: SystemDescriptor = serde_json::from_str(json).unwrap();
        let s = HyperSystem::from_descriptor(&d).unwrap();
        assert_eq!(s.nu().to_string(), "11/2");
        assert_eq!(serde_json::to_string(&s.descriptor()).unwrap(), json);
        assert!(serde_json::from_str::<SystemDescriptor>(
            r#"{"case":"s2","alpha":"-1.5","beta":"2"}"#
        )
        .is_err());
    }
}
