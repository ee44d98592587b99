//! Polynomial solutions `Φ_l` of `σ Φ'' + τ Φ' + λ_l Φ = 0`.
//!
//! Two independent generators are provided: a backward coefficient
//! recursion (primary) and the Rodrigues formula evaluated through the
//! Pearson identity (oracle). Both return the monic normalization, so they
//! must agree structurally.

use nalgebra::DMatrix;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exactpoly::{int, serde_rational, Rational, RationalPoly};
use crate::system::HyperSystem;

/// Monic `Φ_l` by backward recursion on the coefficients.
///
/// With `σ = σ₂s² + σ₁s + σ₀` and `τ = τ₁s + τ₀`, the `s^k` coefficient of
/// the ODE gives
/// `(λ_l − λ_k) c_k + (k+1)(kσ₁ + τ₀) c_{k+1} + (k+2)(k+1) σ₀ c_{k+2} = 0`,
/// solved downward from `c_l = 1`. `λ_l ≠ λ_k` for `k < l < ν`.
pub fn generate_phi(sys: &HyperSystem, l: usize) -> Result<RationalPoly> {
    sys.check_index(l)?;
    let sigma = sys.sigma();
    let (s0, s1) = (sigma.coeff(0), sigma.coeff(1));
    let t0 = sys.tau().coeff(0);
    let lam_l = sys.lambda(l);

    let mut c = vec![Rational::zero(); l + 2];
    c[l] = Rational::one();
    for k in (0..l).rev() {
        let denom = &lam_l - sys.lambda(k);
        if denom.is_zero() {
            return Err(Error::Numerical(format!("lambda_{l} = lambda_{k} in backward recursion")));
        }
        let kk = int(k as i64);
        let mut acc = (&kk + Rational::one()) * (&kk * &s1 + &t0) * &c[k + 1];
        if k + 2 <= l {
            acc += (&kk + int(2)) * (&kk + Rational::one()) * &s0 * &c[k + 2];
        }
        c[k] = -acc / denom;
    }
    c.truncate(l + 1);
    Ok(RationalPoly::from_coeffs(c))
}

/// Monic `Φ_l` from `[σ^l ρ]^{(l)} / ρ`.
///
/// The running derivative is kept as `σ^k ρ q(s)`; by `(σρ)' = τρ`,
/// `d/ds (σ^k ρ q) = σ^{k−1} ρ [(τ + (k−1)σ') q + σ q']`.
pub fn generate_phi_rodrigues(sys: &HyperSystem, l: usize) -> Result<RationalPoly> {
    sys.check_index(l)?;
    Ok(rodrigues_raw(sys, l).monic())
}

/// Unnormalized Rodrigues numerator `q` with `[σ^l ρ]^{(l)} = ρ q`.
pub fn rodrigues_raw(sys: &HyperSystem, l: usize) -> RationalPoly {
    let sigma = sys.sigma();
    let dsigma = sigma.derivative();
    let tau = sys.tau();
    let mut q = RationalPoly::one();
    for k in (1..=l).rev() {
        let shift = tau + &dsigma.scale(&int(k as i64 - 1));
        q = &(&shift * &q) + &(sigma * &q.derivative());
    }
    q
}

/// `σ Φ'' + τ Φ' + λ Φ`.
pub fn ode_residual(sys: &HyperSystem, phi: &RationalPoly, lambda: &Rational) -> RationalPoly {
    let d1 = phi.derivative();
    let d2 = d1.derivative();
    &(&(sys.sigma() * &d2) + &(sys.tau() * &d1)) + &phi.scale(lambda)
}

/// `Φ_0, …, Φ_{l_max}` for one system, all monic.
#[derive(Debug, Clone)]
pub struct PolySystemSlice {
    sys: HyperSystem,
    polys: Vec<RationalPoly>,
}

impl PolySystemSlice {
    pub fn new(sys: &HyperSystem, l_max: usize) -> Result<Self> {
        sys.check_index(l_max)?;
        let polys = (0..=l_max).map(|l| generate_phi(sys, l)).collect::<Result<Vec<_>>>()?;
        Ok(Self { sys: sys.clone(), polys })
    }

    /// All admissible indices up to `cap` inclusive.
    pub fn up_to(sys: &HyperSystem, cap: usize) -> Self {
        let top = sys.nu().max_index().map_or(cap, |m| m.min(cap));
        Self::new(sys, top).expect("indices within cutoff")
    }

    pub fn sys(&self) -> &HyperSystem {
        &self.sys
    }

    pub fn l_max(&self) -> usize {
        self.polys.len() - 1
    }

    pub fn phi(&self, l: usize) -> Result<&RationalPoly> {
        self.polys.get(l).ok_or_else(|| match self.sys.check_index(l) {
            Err(e) => e,
            Ok(()) => Error::InvalidIndex(format!("l = {l} not generated (l_max = {})", self.l_max())),
        })
    }

    pub fn polys(&self) -> &[RationalPoly] {
        &self.polys
    }
}

/// `s Φ_l = α_l Φ_{l+1} + β_l Φ_l + γ_l Φ_{l−1}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecurrenceCoeffs {
    pub l: usize,
    #[serde(with = "serde_rational")]
    pub alpha: Rational,
    #[serde(with = "serde_rational")]
    pub beta: Rational,
    #[serde(serialize_with = "serialize_opt_rational")]
    pub gamma: Option<Rational>,
    /// Left-over polynomial after subtracting the three terms; zero when the
    /// recurrence holds.
    pub residual: RationalPoly,
}

fn serialize_opt_rational<S: serde::Serializer>(
    r: &Option<Rational>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    match r {
        Some(r) => s.serialize_str(&crate::exactpoly::format_rational(r)),
        None => s.serialize_none(),
    }
}

/// Exact three-term recurrence coefficients at index `l` (needs `l+1 < ν`).
pub fn recurrence_coeffs(slice: &PolySystemSlice, l: usize) -> Result<RecurrenceCoeffs> {
    slice.sys.check_index(l + 1)?;
    let phi_l = slice.phi(l)?;
    let phi_next = slice.phi(l + 1)?;
    let s_phi = &RationalPoly::x() * phi_l;

    let alpha = s_phi.leading().cloned().unwrap_or_else(Rational::zero)
        / phi_next.leading().cloned().expect("nonzero Φ_{l+1}");
    let mut rem = &s_phi - &phi_next.scale(&alpha);
    let beta = rem.coeff(l) / phi_l.leading().cloned().expect("nonzero Φ_l");
    rem = &rem - &phi_l.scale(&beta);
    let gamma = if l == 0 {
        None
    } else {
        let prev = slice.phi(l - 1)?;
        let g = rem.coeff(l - 1) / prev.leading().cloned().expect("nonzero Φ_{l-1}");
        rem = &rem - &prev.scale(&g);
        Some(g)
    };
    Ok(RecurrenceCoeffs { l, alpha, beta, gamma, residual: rem })
}

/// Diagonal similarity scaling (Parlett–Reinsch, radix 2) to improve the
/// conditioning of the companion eigenproblem.
fn balance(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    let radix = 2.0f64;
    let mut converged = false;
    while !converged {
        converged = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += m[(j, i)].abs();
                    r += m[(i, j)].abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut cc = c;
            let mut rr = r;
            while cc < rr / radix {
                f *= radix;
                cc *= radix;
                rr /= radix;
            }
            while cc > rr * radix {
                f /= radix;
                cc /= radix;
                rr *= radix;
            }
            if (cc + rr) < 0.95 * s {
                converged = false;
                for j in 0..n {
                    m[(i, j)] /= f;
                }
                for j in 0..n {
                    m[(j, i)] *= f;
                }
            }
        }
    }
}

/// Real zeros of `Φ_l`, ascending, from the balanced companion matrix and a
/// Newton polish. Fails if any eigenvalue is not real, lies outside `(a, b)`,
/// or leaves a residual above `1e−8` of the evaluation scale.
pub fn phi_zeros(slice: &PolySystemSlice, l: usize) -> Result<Vec<f64>> {
    let phi = slice.phi(l)?;
    if l == 0 {
        return Ok(Vec::new());
    }
    let fp = phi.monic().to_float();
    let c = fp.coeffs();
    let n = l;
    let mut comp = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        comp[(0, j)] = -c[n - 1 - j];
    }
    for i in 1..n {
        comp[(i, i - 1)] = 1.0;
    }
    balance(&mut comp);
    let eig = comp
        .schur()
        .complex_eigenvalues();

    let (a, b) = slice.sys.interval();
    let mut zeros = Vec::with_capacity(n);
    for z in eig.iter() {
        let scale = z.norm().max(1.0);
        if z.im.abs() > 1e-6 * scale {
            return Err(Error::Numerical(format!("zero {z} of Phi_{l} is not real")));
        }
        let mut x = z.re;
        for _ in 0..8 {
            let (p, dp) = fp.eval_with_derivative(x);
            if dp == 0.0 {
                break;
            }
            let step = p / dp;
            x -= step;
            if step.abs() <= 1e-16 * x.abs() {
                break;
            }
        }
        zeros.push(x);
    }
    zeros.sort_by(f64::total_cmp);

    for &z in &zeros {
        if !(a < z && z < b) {
            return Err(Error::Numerical(format!("zero {z} of Phi_{l} outside {}", slice.sys.interval_label())));
        }
        let res = fp.eval(z).abs();
        if res > 1e-8 * fp.eval_scale(z) {
            return Err(Error::Numerical(format!("residual {res:e} at zero {z} of Phi_{l}")));
        }
    }
    for w in zeros.windows(2) {
        let gap = w[1] - w[0];
        if gap <= 1e-9 * w[0].abs().max(w[1].abs()).max(1.0) {
            return Err(Error::Numerical(format!("zeros {} and {} of Phi_{l} not separated", w[0], w[1])));
        }
    }
    Ok(zeros)
}

/// Strict interlacing: each zero of `inner` lies between consecutive zeros
/// of `outer` (which has one more zero).
pub fn interlaces(inner: &[f64], outer: &[f64], tol: f64) -> bool {
    if outer.len() != inner.len() + 1 {
        return false;
    }
    inner
        .iter()
        .enumerate()
        .all(|(i, &z)| outer[i] + tol < z && z + tol < outer[i + 1])
}
