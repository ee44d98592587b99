//! Associated special functions `Φ_{l,m} = κ^m Φ_l^{(m)}` (`κ = √σ`) and
//! the operators `H_m`, `A_m`, `A_m⁺` acting on them.
//!
//! Every function here is carried as a pair `(m, p)` meaning `κ^m(s) p(s)`.
//! On that representation the operators close over rational polynomials:
//!
//! * `A_m  = κ d/ds − m κ'`             : `(m, p)   ↦ (m+1, p')`
//! * `A_m⁺ = −κ d/ds − τ/κ − (m−1) κ'`  : `(m+1, q) ↦ (m, −σ q' − (τ + m σ') q)`
//! * `H_m`                              : `(m, p)   ↦ (m, −σ p'' − (τ + m σ') p' + λ_m p)`
//!
//! so all the ladder identities become exact polynomial identities.

use std::fmt;

use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exactpoly::{int, Rational, RationalPoly};
use crate::polygen::PolySystemSlice;
use crate::system::HyperSystem;

/// `κ^m(s) · p(s)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HalfPowerFn {
    pub m: usize,
    pub p: RationalPoly,
}

impl HalfPowerFn {
    pub fn new(m: usize, p: RationalPoly) -> Self {
        Self { m, p }
    }

    pub fn zero(m: usize) -> Self {
        Self::new(m, RationalPoly::zero())
    }

    pub fn is_zero(&self) -> bool {
        self.p.is_zero()
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Self::new(self.m, self.p.scale(c))
    }

    /// Difference of two functions with the same half-power index.
    pub fn sub(&self, other: &HalfPowerFn) -> Result<Self> {
        if self.m != other.m {
            return Err(Error::InvalidIndex(format!(
                "cannot subtract kappa^{} and kappa^{} representations",
                self.m, other.m
            )));
        }
        Ok(Self::new(self.m, &self.p - &other.p))
    }

    /// Pointwise value `σ(s)^{m/2} p(s)`.
    pub fn eval(&self, sys: &HyperSystem, s: f64) -> f64 {
        let kappa_m = if self.m == 0 { 1.0 } else { sys.sigma_f64(s).sqrt().powi(self.m as i32) };
        kappa_m * self.p.eval_float(s)
    }
}

impl fmt::Display for HalfPowerFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "kappa^{} * ({})", self.m, self.p)
    }
}

/// `Φ_{l,m} = (m, Φ_l^{(m)})` for `0 ≤ m ≤ l < ν`.
pub fn assoc_from_phi(slice: &PolySystemSlice, l: usize, m: usize) -> Result<HalfPowerFn> {
    if m > l {
        return Err(Error::InvalidIndex(format!("m = {m} exceeds l = {l}")));
    }
    let phi = slice.phi(l)?;
    Ok(HalfPowerFn::new(m, phi.nth_derivative(m)))
}

fn require_admitted(sys: &HyperSystem, idx: usize) -> Result<()> {
    sys.check_index(idx)
}

/// Raising operator `A_m` on `(m, p)`; requires `m + 1 < ν`.
pub fn apply_a(sys: &HyperSystem, f: &HalfPowerFn) -> Result<HalfPowerFn> {
    require_admitted(sys, f.m + 1)?;
    Ok(HalfPowerFn::new(f.m + 1, f.p.derivative()))
}

/// Lowering operator `A_m⁺` on `(m+1, q)`; requires `m + 1 ≥ 1` and `m + 1 < ν`.
pub fn apply_a_plus(sys: &HyperSystem, g: &HalfPowerFn) -> Result<HalfPowerFn> {
    if g.m == 0 {
        return Err(Error::InvalidIndex("A+ needs a kappa^(m+1) argument with m+1 >= 1".into()));
    }
    require_admitted(sys, g.m)?;
    let m = g.m - 1;
    let sigma = sys.sigma();
    let shift = sys.tau() + &sigma.derivative().scale(&int(m as i64));
    let p = -(&(sigma * &g.p.derivative()) + &(&shift * &g.p));
    Ok(HalfPowerFn::new(m, p))
}

/// `H_m` on `(m, p)`, written through the derivative equation
/// `σ φ'' + (τ + m σ') φ' + (λ_l − λ_m) φ = 0` of `φ = Φ_l^{(m)}`.
pub fn apply_h(sys: &HyperSystem, m: usize, f: &HalfPowerFn) -> Result<HalfPowerFn> {
    if f.m != m {
        return Err(Error::InvalidIndex(format!("H_{m} applied to a kappa^{} function", f.m)));
    }
    let sigma = sys.sigma();
    let d1 = f.p.derivative();
    let d2 = d1.derivative();
    let shift = sys.tau() + &sigma.derivative().scale(&int(m as i64));
    let p = &(&f.p.scale(&sys.lambda(m)) - &(sigma * &d2)) - &(&shift * &d1);
    Ok(HalfPowerFn::new(m, p))
}

/// The pair `A_m`, `A_m⁺` for a fixed `m` with `m + 1 < ν`.
#[derive(Debug, Clone)]
pub struct LadderPair<'a> {
    sys: &'a HyperSystem,
    m: usize,
}

impl<'a> LadderPair<'a> {
    pub fn new(sys: &'a HyperSystem, m: usize) -> Result<Self> {
        require_admitted(sys, m + 1)?;
        Ok(Self { sys, m })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn raise(&self, f: &HalfPowerFn) -> Result<HalfPowerFn> {
        if f.m != self.m {
            return Err(Error::InvalidIndex(format!("A_{} applied to kappa^{}", self.m, f.m)));
        }
        apply_a(self.sys, f)
    }

    pub fn lower(&self, g: &HalfPowerFn) -> Result<HalfPowerFn> {
        if g.m != self.m + 1 {
            return Err(Error::InvalidIndex(format!("A+_{} applied to kappa^{}", self.m, g.m)));
        }
        apply_a_plus(self.sys, g)
    }

    /// Human-readable operator forms.
    pub fn describe(&self) -> (String, String) {
        let m = self.m as i64;
        (
            format!("A_{m} = kappa d/ds - {m} kappa'"),
            format!("A+_{m} = -kappa d/ds - tau/kappa - ({}) kappa'", m - 1),
        )
    }
}

/// Residual of the recurrence in `m` in the `κ^{m−1}` representation:
/// `σ p_{m+1} + (τ + (m−1)σ') p_m + (λ_l − λ_{m−1}) p_{m−1}` with
/// `p_j = Φ_l^{(j)}`. For `m = l` the first term vanishes (terminal form).
pub fn check_theorem3_recurrence(slice: &PolySystemSlice, l: usize, m: usize) -> Result<RationalPoly> {
    if m == 0 || m > l {
        return Err(Error::InvalidIndex(format!("recurrence needs 1 <= m <= l, got l = {l}, m = {m}")));
    }
    let sys = slice.sys();
    let phi = slice.phi(l)?;
    let p_prev = phi.nth_derivative(m - 1);
    let p_m = p_prev.derivative();
    let p_next = p_m.derivative();
    let sigma = sys.sigma();
    let shift = sys.tau() + &sigma.derivative().scale(&int(m as i64 - 1));
    let coeff = sys.lambda(l) - sys.lambda(m - 1);
    Ok(&(&(sigma * &p_next) + &(&shift * &p_m)) + &p_prev.scale(&coeff))
}

/// `Φ_{l,m}` rebuilt from `Φ_{l,l}` by applying `A_k⁺ / (λ_l − λ_k)` for
/// `k = l−1, …, m`.
pub fn lower_chain(slice: &PolySystemSlice, l: usize, m: usize) -> Result<HalfPowerFn> {
    if m >= l {
        return Err(Error::InvalidIndex(format!("lower chain needs m < l, got l = {l}, m = {m}")));
    }
    let sys = slice.sys();
    let lam_l = sys.lambda(l);
    let mut f = assoc_from_phi(slice, l, l)?;
    for k in (m..l).rev() {
        let gap = &lam_l - sys.lambda(k);
        if gap.is_zero() {
            return Err(Error::Numerical(format!("lambda_{l} = lambda_{k} in lowering chain")));
        }
        f = apply_a_plus(sys, &f)?.scale(&gap.recip());
    }
    Ok(f)
}

/// Exact residual of one operator identity, as the largest coefficient of
/// `lhs − rhs` in absolute value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityResidual {
    pub identity: &'static str,
    pub l: usize,
    pub m: usize,
    #[serde(with = "crate::exactpoly::serde_rational")]
    pub residual: Rational,
}

fn residual_of(identity: &'static str, l: usize, m: usize, lhs: &HalfPowerFn, rhs: &HalfPowerFn) -> Result<IdentityResidual> {
    let diff = lhs.sub(rhs)?;
    Ok(IdentityResidual { identity, l, m, residual: diff.p.max_abs_coeff() })
}

/// Residuals of every ladder identity at `(l, m)`: the eigen-equation of
/// `H_m` and, for `m ≥ 1`, the recurrence in `m`; for `m < l` also raising,
/// lowering, the lowering chain, both factorizations and both intertwining
/// relations.
pub fn ladder_identity_residuals(slice: &PolySystemSlice, l: usize, m: usize) -> Result<Vec<IdentityResidual>> {
    let sys = slice.sys();
    let f = assoc_from_phi(slice, l, m)?;
    let lam_l = sys.lambda(l);
    let mut out = vec![residual_of("eigen", l, m, &apply_h(sys, m, &f)?, &f.scale(&lam_l))?];
    if m >= 1 {
        let r = check_theorem3_recurrence(slice, l, m)?;
        out.push(IdentityResidual { identity: "recurrence_in_m", l, m, residual: r.max_abs_coeff() });
    }
    if m < l {
        let g = assoc_from_phi(slice, l, m + 1)?;
        let lam_m = sys.lambda(m);
        let af = apply_a(sys, &f)?;
        let apg = apply_a_plus(sys, &g)?;
        out.push(residual_of("raise", l, m, &af, &g)?);
        out.push(residual_of("lower", l, m, &apg, &f.scale(&(&lam_l - &lam_m)))?);
        out.push(residual_of("chain", l, m, &lower_chain(slice, l, m)?, &f)?);
        let hf = apply_h(sys, m, &f)?;
        let hg = apply_h(sys, m + 1, &g)?;
        out.push(residual_of(
            "factorization_lower",
            l,
            m,
            &apply_a_plus(sys, &af)?,
            &hf.sub(&f.scale(&lam_m))?,
        )?);
        out.push(residual_of(
            "factorization_upper",
            l,
            m,
            &apply_a(sys, &apg)?,
            &hg.sub(&g.scale(&lam_m))?,
        )?);
        out.push(residual_of(
            "intertwining_plus",
            l,
            m,
            &apply_h(sys, m, &apg)?,
            &apply_a_plus(sys, &hg)?,
        )?);
        out.push(residual_of(
            "intertwining_minus",
            l,
            m,
            &apply_a(sys, &hf)?,
            &apply_h(sys, m + 1, &af)?,
        )?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactpoly::rat;
    use crate::samples::default_samples;
    use crate::system::{make_system, CaseTag};

    fn hermite_slice() -> PolySystemSlice {
        let sys = make_system(CaseTag::Const, (-2, 1), (0, 1)).unwrap();
        PolySystemSlice::new(&sys, 4).unwrap()
    }

    fn hp(m: usize, c: &[i64]) -> HalfPowerFn {
        HalfPowerFn::new(m, RationalPoly::from_ints(c))
    }

    #[test]
    fn associated_functions() {
        let slice = hermite_slice();
        let phi2 = RationalPoly::from_coeffs(vec![rat(-1, 2), int(0), int(1)]);
        assert_eq!(assoc_from_phi(&slice, 2, 0).unwrap(), HalfPowerFn::new(0, phi2));
        assert_eq!(assoc_from_phi(&slice, 2, 1).unwrap(), hp(1, &[0, 2]));
        assert_eq!(assoc_from_phi(&slice, 2, 2).unwrap(), hp(2, &[2]));
        assert_eq!(assoc_from_phi(&slice, 4, 4).unwrap(), hp(4, &[24]));
        assert!(assoc_from_phi(&slice, 2, 3).is_err());
        assert!(assoc_from_phi(&slice, 5, 0).is_err());
    }

    #[test]
    fn raising_and_lowering_examples() {
        let slice = hermite_slice();
        let sys = slice.sys();
        let f = assoc_from_phi(&slice, 2, 0).unwrap();
        assert_eq!(apply_a(sys, &f).unwrap(), hp(1, &[0, 2]));
        assert_eq!(apply_a(sys, &hp(3, &[5])).unwrap(), HalfPowerFn::zero(4));
        let twice = apply_a(sys, &apply_a(sys, &f).unwrap()).unwrap();
        assert_eq!(twice, HalfPowerFn::new(2, f.p.nth_derivative(2)));

        assert_eq!(apply_a_plus(sys, &hp(1, &[0, 2])).unwrap(), hp(0, &[-2, 0, 4]));
        assert_eq!(apply_a_plus(sys, &HalfPowerFn::zero(2)).unwrap(), HalfPowerFn::zero(1));
        assert!(apply_a_plus(sys, &hp(0, &[1])).is_err());

        let jac = make_system(CaseTag::OneMinusS2, (-5, 1), (1, 1)).unwrap();
        let js = PolySystemSlice::new(&jac, 1).unwrap();
        let phi1 = assoc_from_phi(&js, 1, 0).unwrap();
        let back = apply_a_plus(&jac, &apply_a(&jac, &phi1).unwrap()).unwrap();
        assert_eq!(back, phi1.scale(&int(5)));
        assert_eq!(back.p, RationalPoly::from_ints(&[-1, 5]));
    }

    #[test]
    fn operators_respect_the_cutoff() {
        let sys = make_system(CaseTag::S2, (-6, 1), (2, 1)).unwrap();
        // ν = 7/2: A_2 exists (3 < ν), A_3 does not.
        assert!(apply_a(&sys, &hp(2, &[1])).is_ok());
        assert!(apply_a(&sys, &hp(3, &[1])).is_err());
        assert!(apply_a_plus(&sys, &hp(3, &[1])).is_ok());
        assert!(apply_a_plus(&sys, &hp(4, &[1])).is_err());
        assert!(LadderPair::new(&sys, 2).is_ok());
        assert!(LadderPair::new(&sys, 3).is_err());
    }

    #[test]
    fn hamiltonian_eigen_identity() {
        let slice = hermite_slice();
        let sys = slice.sys();
        let f = assoc_from_phi(&slice, 2, 0).unwrap();
        assert_eq!(apply_h(sys, 0, &f).unwrap(), f.scale(&int(4)));
        assert!(apply_h(sys, 1, &HalfPowerFn::zero(1)).unwrap().is_zero());
        assert!(apply_h(sys, 1, &f).is_err());

        let morse = make_system(CaseTag::S2, (-6, 1), (2, 1)).unwrap();
        let ms = PolySystemSlice::new(&morse, 1).unwrap();
        let f = assoc_from_phi(&ms, 1, 0).unwrap();
        assert_eq!(apply_h(&morse, 0, &f).unwrap(), f.scale(&int(6)));
    }

    #[test]
    fn recurrence_in_m() {
        let slice = hermite_slice();
        assert!(check_theorem3_recurrence(&slice, 2, 1).unwrap().is_zero());
        assert!(check_theorem3_recurrence(&slice, 2, 2).unwrap().is_zero());
        assert!(check_theorem3_recurrence(&slice, 1, 1).unwrap().is_zero());
        assert!(check_theorem3_recurrence(&slice, 2, 0).is_err());
        assert!(check_theorem3_recurrence(&slice, 2, 3).is_err());
    }

    #[test]
    fn lowering_chain() {
        let slice = hermite_slice();
        let f = lower_chain(&slice, 2, 0).unwrap();
        assert_eq!(f, assoc_from_phi(&slice, 2, 0).unwrap());
        assert_eq!(lower_chain(&slice, 3, 2).unwrap(), assoc_from_phi(&slice, 3, 2).unwrap());
        let scarf = make_system(CaseTag::S2PlusOne, (-4, 1), (2, 1)).unwrap();
        let ss = PolySystemSlice::new(&scarf, 1).unwrap();
        assert_eq!(lower_chain(&ss, 1, 0).unwrap(), assoc_from_phi(&ss, 1, 0).unwrap());
        assert!(lower_chain(&slice, 2, 2).is_err());
    }

    /// Literal second-order operator `H_m` on `σ^{m/2} p`, evaluated in
    /// floating point with κ kept explicit.
    fn h_literal(sys: &HyperSystem, m: usize, p: &RationalPoly, s: f64) -> f64 {
        let mf = m as f64;
        let sg = sys.sigma_f64(s);
        let sg1 = sys.sigma_prime_f64(s);
        let sg2 = 2.0 * crate::exactpoly::rational_to_f64(&sys.sigma().coeff(2));
        let tau = sys.tau_f64(s);
        let tau1 = crate::exactpoly::rational_to_f64(sys.alpha());
        let fp = p.to_float();
        let (p0, p1) = fp.eval_with_derivative(s);
        let p2 = p.nth_derivative(2).eval_float(s);
        let h = mf / 2.0;
        let f = sg.powf(h) * p0;
        let f1 = h * sg.powf(h - 1.0) * sg1 * p0 + sg.powf(h) * p1;
        let f2 = h * (h - 1.0) * sg.powf(h - 2.0) * sg1 * sg1 * p0
            + h * sg.powf(h - 1.0) * sg2 * p0
            + 2.0 * h * sg.powf(h - 1.0) * sg1 * p1
            + sg.powf(h) * p2;
        let pot = mf * (mf - 2.0) / 4.0 * sg1 * sg1 / sg + mf * tau / 2.0 * sg1 / sg
            - 0.5 * mf * (mf - 2.0) * sg2
            - mf * tau1;
        -sg * f2 - tau * f1 + pot * f
    }

    #[test]
    fn polynomial_form_matches_literal_operator() {
        for case in CaseTag::ALL {
            for sys in default_samples(case) {
                let slice = PolySystemSlice::up_to(&sys, 5);
                for l in 0..=slice.l_max() {
                    for m in 0..=l {
                        let f = assoc_from_phi(&slice, l, m).unwrap();
                        let hf = apply_h(&sys, m, &f).unwrap();
                        for s in sys.interior_points(7) {
                            let lit = h_literal(&sys, m, &f.p, s);
                            let poly = hf.eval(&sys, s);
                            let scale = 1.0 + poly.abs() + h_literal(&sys, m, &f.p, s).abs();
                            assert!(
                                (lit - poly).abs() < 1e-7 * scale * (1.0 + s.abs()).powi(l as i32 + 2),
                                "{sys} l={l} m={m} s={s}: {lit} vs {poly}"
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn identity_residual_report() {
        let slice = hermite_slice();
        let r = ladder_identity_residuals(&slice, 3, 1).unwrap();
        assert_eq!(r.len(), 9);
        assert!(r.iter().all(|x| x.residual.is_zero()));
        assert_eq!(ladder_identity_residuals(&slice, 2, 2).unwrap().len(), 2);
        assert_eq!(ladder_identity_residuals(&slice, 2, 0).unwrap().len(), 8);
    }

    #[test]
    fn ladder_identities_on_all_samples() {
        for case in CaseTag::ALL {
            for sys in default_samples(case) {
                let slice = PolySystemSlice::up_to(&sys, 10);
                let top = slice.l_max();
                for l in 0..=top {
                    for m in 0..l {
                        let f = assoc_from_phi(&slice, l, m).unwrap();
                        let g = assoc_from_phi(&slice, l, m + 1).unwrap();
                        let gap = sys.lambda(l) - sys.lambda(m);
                        assert_eq!(apply_a(&sys, &f).unwrap(), g);
                        assert_eq!(apply_a_plus(&sys, &g).unwrap(), f.scale(&gap));
                        assert_eq!(lower_chain(&slice, l, m).unwrap(), f);
                        // Factorization: A⁺A = H_m − λ_m, A A⁺ = H_{m+1} − λ_m.
                        let lam_m = sys.lambda(m);
                        let lhs = apply_a_plus(&sys, &apply_a(&sys, &f).unwrap()).unwrap();
                        let rhs = apply_h(&sys, m, &f).unwrap().sub(&f.scale(&lam_m)).unwrap();
                        assert_eq!(lhs, rhs);
                        let lhs = apply_a(&sys, &apply_a_plus(&sys, &g).unwrap()).unwrap();
                        let rhs = apply_h(&sys, m + 1, &g).unwrap().sub(&g.scale(&lam_m)).unwrap();
                        assert_eq!(lhs, rhs);
                        // Intertwining.
                        let lhs = apply_h(&sys, m, &apply_a_plus(&sys, &g).unwrap()).unwrap();
                        let rhs = apply_a_plus(&sys, &apply_h(&sys, m + 1, &g).unwrap()).unwrap();
                        assert_eq!(lhs, rhs);
                        let lhs = apply_a(&sys, &apply_h(&sys, m, &f).unwrap()).unwrap();
                        let rhs = apply_h(&sys, m + 1, &apply_a(&sys, &f).unwrap()).unwrap();
                        assert_eq!(lhs, rhs);
                    }
                    for m in 0..=l {
                        let f = assoc_from_phi(&slice, l, m).unwrap();
                        assert_eq!(f.p.degree(), Some(l - m));
                        assert_eq!(apply_h(&sys, m, &f).unwrap(), f.scale(&sys.lambda(l)));
                        if m >= 1 {
                            assert!(check_theorem3_recurrence(&slice, l, m).unwrap().is_zero());
                        }
                    }
                }
            }
        }
    }
}
