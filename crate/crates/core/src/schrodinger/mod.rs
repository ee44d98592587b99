//! Schrödinger form of the associated equations.
//!
//! A change of variable `x ↦ s(x)` with `ds/dx = ±κ(s(x))` turns
//! `Φ_{l,m}` into `Ψ_{l,m}(x) = √(κρ) Φ_{l,m}(s(x))`, an eigenfunction of
//! `−d²/dx² + V_m` with eigenvalue `λ_l`. The potentials factor through the
//! superpotential `W_m`:
//!
//! ```text
//! 𝒜_m  =  ε d/dx + W_m        𝒜_m⁺ = −ε d/dx + W_m
//! V_m     − λ_m = W_m² − ε Ẇ_m
//! V_{m+1} − λ_m = W_m² + ε Ẇ_m
//! ```
//!
//! where `ε = ±1` is the sign of `ds/dx / κ`.

pub mod fd;

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exactpoly::{rational_to_f64, FloatPoly};
use crate::polygen::PolySystemSlice;
use crate::quad::{norm_squared, QuadRule};
use crate::ladder::assoc_from_phi;
use crate::system::{CaseTag, HyperSystem, SPoint};

pub use fd::{default_window, fd_eigensolve, SpectrumReport};

/// The substitution `s = s(x)` used for one case.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChangeOfVariable {
    pub case: CaseTag,
    /// `s(x)` as text, e.g. `"cos x"`.
    pub label: &'static str,
    pub x_domain: (f64, f64),
    /// `+1` if `ds/dx = κ(s(x))`, `−1` if `ds/dx = −κ(s(x))`.
    pub sign: f64,
}

pub fn change_of_variable(case: CaseTag) -> ChangeOfVariable {
    let inf = f64::INFINITY;
    let (label, x_domain, sign) = match case {
        CaseTag::Const => ("x", (-inf, inf), 1.0),
        CaseTag::Linear => ("x^2/4", (0.0, inf), 1.0),
        CaseTag::OneMinusS2 => ("cos x", (0.0, PI), -1.0),
        CaseTag::S2MinusOne => ("cosh x", (0.0, inf), 1.0),
        CaseTag::S2 => ("exp x", (-inf, inf), 1.0),
        CaseTag::S2PlusOne => ("sinh x", (-inf, inf), 1.0),
    };
    ChangeOfVariable { case, label, x_domain, sign }
}

impl ChangeOfVariable {
    pub fn s_of_x(&self, x: f64) -> f64 {
        match self.case {
            CaseTag::Const => x,
            CaseTag::Linear => x * x / 4.0,
            CaseTag::OneMinusS2 => x.cos(),
            CaseTag::S2MinusOne => x.cosh(),
            CaseTag::S2 => x.exp(),
            CaseTag::S2PlusOne => x.sinh(),
        }
    }

    pub fn x_of_s(&self, s: f64) -> f64 {
        match self.case {
            CaseTag::Const => s,
            CaseTag::Linear => 2.0 * s.sqrt(),
            CaseTag::OneMinusS2 => s.acos(),
            CaseTag::S2MinusOne => s.acosh(),
            CaseTag::S2 => s.ln(),
            CaseTag::S2PlusOne => s.asinh(),
        }
    }

    /// `s(x)` with distances to the finite ends of `(a, b)` computed from
    /// the distances of `x` to the ends of `(a′, b′)`.
    pub fn s_point(&self, xp: &SPoint) -> SPoint {
        let x = xp.s;
        let s = self.s_of_x(x);
        let inf = f64::INFINITY;
        match self.case {
            CaseTag::Const | CaseTag::S2PlusOne => SPoint { s, from_a: inf, to_b: inf },
            CaseTag::Linear | CaseTag::S2 => SPoint { s, from_a: s, to_b: inf },
            CaseTag::OneMinusS2 => {
                let near_pi = (0.5 * xp.to_b).sin();
                let near_zero = (0.5 * xp.from_a).sin();
                SPoint { s, from_a: 2.0 * near_pi * near_pi, to_b: 2.0 * near_zero * near_zero }
            }
            CaseTag::S2MinusOne => {
                let h = (0.5 * x).sinh();
                SPoint { s, from_a: 2.0 * h * h, to_b: inf }
            }
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        x > self.x_domain.0 && x < self.x_domain.1
    }

    pub fn domain_label(&self) -> String {
        let f = |v: f64| {
            if v == f64::INFINITY {
                "inf".to_string()
            } else if v == f64::NEG_INFINITY {
                "-inf".to_string()
            } else if v == PI {
                "pi".to_string()
            } else {
                v.to_string()
            }
        };
        format!("({},{})", f(self.x_domain.0), f(self.x_domain.1))
    }
}

/// `V_m`, `W_m` and the eigenfunctions `Ψ_{l,m}` of one system at one `m`.
#[derive(Debug, Clone)]
pub struct PotentialModel {
    sys: HyperSystem,
    m: usize,
    cov: ChangeOfVariable,
}

impl PotentialModel {
    pub fn new(sys: &HyperSystem, m: usize) -> Result<Self> {
        sys.check_index(m)?;
        Ok(Self { sys: sys.clone(), m, cov: change_of_variable(sys.case()) })
    }

    pub fn sys(&self) -> &HyperSystem {
        &self.sys
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn change(&self) -> &ChangeOfVariable {
        &self.cov
    }

    pub fn sign(&self) -> f64 {
        self.cov.sign
    }

    pub fn x_domain(&self) -> (f64, f64) {
        self.cov.x_domain
    }

    pub fn x_point(&self, x: f64) -> Result<SPoint> {
        if !self.cov.contains(x) {
            return Err(Error::OutOfDomain { point: x, domain: self.cov.domain_label() });
        }
        Ok(SPoint::new(self.cov.x_domain, x))
    }

    fn sigma_at(&self, sp: &SPoint) -> f64 {
        self.sys.log_sigma(sp).exp()
    }

    /// `N(s) = 2τ + (2m−1)σ'`, so that `W_m = −N / (4κ)`.
    fn n_at(&self, s: f64) -> f64 {
        2.0 * self.sys.tau_f64(s) + (2.0 * self.m as f64 - 1.0) * self.sys.sigma_prime_f64(s)
    }

    fn n_prime(&self) -> f64 {
        let sigma2 = self.sys.case().sigma_coeffs()[2] as f64;
        2.0 * rational_to_f64(self.sys.alpha()) + (2.0 * self.m as f64 - 1.0) * 2.0 * sigma2
    }

    /// `W_m` at an x-point carrying its endpoint distances.
    pub fn w_at(&self, xp: &SPoint) -> f64 {
        let sp = self.cov.s_point(xp);
        -self.n_at(sp.s) / (4.0 * self.sigma_at(&sp).sqrt())
    }

    /// `Ẇ_m = ε (−N'/4 + N σ' / (8σ))`.
    pub fn w_dot_at(&self, xp: &SPoint) -> f64 {
        let sp = self.cov.s_point(xp);
        let sigma = self.sigma_at(&sp);
        let n = self.n_at(sp.s);
        self.sign() * (-self.n_prime() / 4.0 + n * self.sys.sigma_prime_f64(sp.s) / (8.0 * sigma))
    }

    pub fn v_at(&self, xp: &SPoint) -> f64 {
        let w = self.w_at(xp);
        self.sys.lambda_f64(self.m) + w * w - self.sign() * self.w_dot_at(xp)
    }

    /// `V_{m+1}` from `W_m` alone (the supersymmetric partner).
    pub fn partner_v_at(&self, xp: &SPoint) -> f64 {
        let w = self.w_at(xp);
        self.sys.lambda_f64(self.m) + w * w + self.sign() * self.w_dot_at(xp)
    }

    pub fn superpotential(&self, x: f64) -> Result<f64> {
        Ok(self.w_at(&self.x_point(x)?))
    }

    pub fn superpotential_dot(&self, x: f64) -> Result<f64> {
        Ok(self.w_dot_at(&self.x_point(x)?))
    }

    pub fn potential(&self, x: f64) -> Result<f64> {
        Ok(self.v_at(&self.x_point(x)?))
    }

    pub fn partner_potential(&self, x: f64) -> Result<f64> {
        Ok(self.partner_v_at(&self.x_point(x)?))
    }

    /// `lim V_m` at the infinite end(s) for the families with a cutoff.
    pub fn continuum_edge(&self) -> Option<f64> {
        if !self.sys.case().is_finite_family() {
            return None;
        }
        let am = alpha_m(&self.sys, self.m);
        Some(self.sys.lambda_f64(self.m) + am * am)
    }

    /// Largest relative deviation of `ds/dx` (central differences) from
    /// `ε κ(s(x))` over interior points.
    pub fn check_change_of_variable(&self, points: &[f64]) -> f64 {
        points
            .iter()
            .map(|&x| {
                let h = 1e-5 * x.abs().max(1e-2);
                let d = (self.cov.s_of_x(x + h) - self.cov.s_of_x(x - h)) / (2.0 * h);
                let kappa = self.sigma_at(&self.cov.s_point(&SPoint::new(self.cov.x_domain, x))).sqrt();
                (d - self.sign() * kappa).abs() / kappa.max(1e-300)
            })
            .fold(0.0, f64::max)
    }

    /// `ln |√(κρ) κ^m|` at an x-point.
    fn log_envelope(&self, xp: &SPoint) -> f64 {
        let sp = self.cov.s_point(xp);
        (self.m as f64 + 0.5) * 0.5 * self.sys.log_sigma(&sp) + 0.5 * self.sys.log_weight(&sp)
    }

    /// `n` equally spaced points strictly inside `window`.
    pub fn interior_grid(window: (f64, f64), n: usize) -> Vec<f64> {
        let h = (window.1 - window.0) / (n + 1) as f64;
        (1..=n).map(|i| window.0 + i as f64 * h).collect()
    }
}

/// `α_m = (1 − α − 2m)/2`.
pub fn alpha_m(sys: &HyperSystem, m: usize) -> f64 {
    (1.0 - rational_to_f64(sys.alpha()) - 2.0 * m as f64) / 2.0
}

/// `α′_m = (−1 − α + 2m)/2`.
pub fn alpha_m_prime(sys: &HyperSystem, m: usize) -> f64 {
    (-1.0 - rational_to_f64(sys.alpha()) + 2.0 * m as f64) / 2.0
}

/// Closed forms of `W_m` for the four trigonometric / hyperbolic /
/// exponential substitutions; `None` for `σ = 1` and `σ = s`.
pub fn closed_form_w(sys: &HyperSystem, m: usize, x: f64) -> Option<f64> {
    let am = alpha_m(sys, m);
    let ap = alpha_m_prime(sys, m);
    let d = -rational_to_f64(sys.beta()) / 2.0;
    match sys.case() {
        CaseTag::OneMinusS2 => Some(ap / x.tan() + d / x.sin()),
        CaseTag::S2MinusOne => Some(am / x.tanh() + d / x.sinh()),
        CaseTag::S2 => Some(am + d * (-x).exp()),
        CaseTag::S2PlusOne => Some(am * x.tanh() + d / x.cosh()),
        CaseTag::Const | CaseTag::Linear => None,
    }
}

/// `W_m` on `(0, π)` written with half angles, `σ = 1 − s²` only.
pub fn closed_form_w_half_angle(sys: &HyperSystem, m: usize, x: f64) -> Option<f64> {
    if sys.case() != CaseTag::OneMinusS2 {
        return None;
    }
    let ap = alpha_m_prime(sys, m);
    let d = -rational_to_f64(sys.beta()) / 2.0;
    let t = (0.5 * x).tan();
    Some((ap + d) / 2.0 / t - (ap - d) / 2.0 * t)
}

/// Closed forms of `V_m`, as for [`closed_form_w`].
pub fn closed_form_v(sys: &HyperSystem, m: usize, x: f64) -> Option<f64> {
    let am = alpha_m(sys, m);
    let ap = alpha_m_prime(sys, m);
    let d = -rational_to_f64(sys.beta()) / 2.0;
    let lm = sys.lambda_f64(m);
    match sys.case() {
        CaseTag::OneMinusS2 => {
            let (csc, cot) = (1.0 / x.sin(), 1.0 / x.tan());
            Some((ap * ap - ap + d * d) * csc * csc + (2.0 * ap - 1.0) * d * cot * csc - ap * ap + lm)
        }
        CaseTag::S2MinusOne => {
            let (csch, coth) = (1.0 / x.sinh(), 1.0 / x.tanh());
            Some((am * am + am + d * d) * csch * csch + (2.0 * am + 1.0) * d * coth * csch + am * am + lm)
        }
        CaseTag::S2 => {
            let e = (-x).exp();
            Some(d * d * e * e + (2.0 * am + 1.0) * d * e + am * am + lm)
        }
        CaseTag::S2PlusOne => {
            let (sech, tanh) = (1.0 / x.cosh(), x.tanh());
            Some((-am * am - am + d * d) * sech * sech + (2.0 * am + 1.0) * d * tanh * sech + am * am + lm)
        }
        CaseTag::Const | CaseTag::Linear => None,
    }
}

/// `Ψ_{l,m}` for one `l` of a [`PotentialModel`].
#[derive(Debug, Clone)]
pub struct BoundState {
    pub l: usize,
    pub m: usize,
    /// `Φ_l^{(m)}` in floating point.
    pub p: FloatPoly,
    pub lambda: f64,
}

impl BoundState {
    pub fn new(model: &PotentialModel, slice: &PolySystemSlice, l: usize) -> Result<Self> {
        let f = assoc_from_phi(slice, l, model.m())?;
        Ok(Self { l, m: model.m(), p: f.p.to_float(), lambda: model.sys().lambda_f64(l) })
    }

    pub fn eval_at(&self, model: &PotentialModel, xp: &SPoint) -> f64 {
        let sp = model.change().s_point(xp);
        let (sgn, lp) = self.p.signed_log_abs(sp.s);
        if sgn == 0.0 {
            return 0.0;
        }
        let v = sgn * (lp + model.log_envelope(xp)).exp();
        if v.is_nan() {
            0.0
        } else {
            v
        }
    }

    pub fn eval(&self, model: &PotentialModel, x: f64) -> Result<f64> {
        Ok(self.eval_at(model, &model.x_point(x)?))
    }

    /// `∫ Ψ² dx` over `(a′, b′)`.
    pub fn norm_squared_x(&self, model: &PotentialModel) -> Result<f64> {
        let (lo, hi) = model.x_domain();
        let mut rule = QuadRule::for_interval(lo, hi);
        if lo == f64::NEG_INFINITY {
            rule.center = model.change().x_of_s(model.sys().center());
        }
        rule.integrate(|xp| {
            let v = self.eval_at(model, xp);
            v * v
        })
    }
}

pub fn psi_eval(model: &PotentialModel, slice: &PolySystemSlice, l: usize, x: f64) -> Result<f64> {
    BoundState::new(model, slice, l)?.eval(model, x)
}

/// `(∫ Ψ_{l,m}² dx, ∫ Φ_{l,m}² ρ ds)`.
pub fn norm_pair(model: &PotentialModel, slice: &PolySystemSlice, l: usize) -> Result<(f64, f64)> {
    let bs = BoundState::new(model, slice, l)?;
    let x_side = bs.norm_squared_x(model)?;
    let f = assoc_from_phi(slice, l, model.m())?;
    let s_side = norm_squared(model.sys(), &f, &QuadRule::for_system(model.sys()))?;
    Ok((x_side, s_side))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LadderDirection {
    /// `𝒜_m`: level `m` to level `m+1`.
    Raise,
    /// `𝒜_m⁺`: level `m+1` to level `m`.
    Lower,
}

/// First derivative on a uniform grid: five-point central stencil inside,
/// second-order one-sided formulas at the two ends on each side.
pub fn grid_derivative(values: &[f64], h: f64) -> Vec<f64> {
    let n = values.len();
    let f = values;
    (0..n)
        .map(|i| {
            if i >= 2 && i + 2 < n {
                (f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2]) / (12.0 * h)
            } else if i + 2 < n {
                (-3.0 * f[i] + 4.0 * f[i + 1] - f[i + 2]) / (2.0 * h)
            } else {
                (3.0 * f[i] - 4.0 * f[i - 1] + f[i - 2]) / (2.0 * h)
            }
        })
        .collect()
}

/// Applies `𝒜_m = ε d/dx + W_m` or `𝒜_m⁺ = −ε d/dx + W_m` to values on a
/// uniform grid strictly inside `(a′, b′)`.
pub fn x_ladder_apply(
    model: &PotentialModel,
    direction: LadderDirection,
    grid: &[f64],
    values: &[f64],
) -> Result<Vec<f64>> {
    if grid.len() != values.len() || grid.len() < 5 {
        return Err(Error::InvalidIndex(format!(
            "grid of {} points with {} values",
            grid.len(),
            values.len()
        )));
    }
    let window = grid[grid.len() - 1] - grid[0];
    let h = grid[1] - grid[0];
    let limit = 1e-3 * window;
    if h > limit * (1.0 + 1e-12) {
        return Err(Error::GridTooCoarse { h, limit });
    }
    let d = grid_derivative(values, h);
    let eps = match direction {
        LadderDirection::Raise => model.sign(),
        LadderDirection::Lower => -model.sign(),
    };
    grid.iter()
        .zip(values.iter().zip(&d))
        .map(|(&x, (&v, &dv))| Ok(eps * dv + model.superpotential(x)? * v))
        .collect()
}

/// `|a − b| / max(1, |a|, |b|)`.
fn rel_dev(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

/// Largest deviations of the pointwise identities over a set of x-points.
#[derive(Debug, Clone, Serialize)]
pub struct PointwiseReport {
    /// `V_m − λ_m` against `W_m² − ε Ẇ_m` with the closed-form `Ẇ_m`.
    pub riccati_analytic: f64,
    /// Closed-form `Ẇ_m` against a central difference of `W_m`.
    pub riccati_numerical: f64,
    /// `V_{m+1}` of the next model against `λ_m + W_m² + ε Ẇ_m`.
    pub partner: Option<f64>,
    /// `W_m` against `−ε Ψ̇_{m,m} / Ψ_{m,m}`.
    pub ground_state_w: f64,
    /// `V_m` against `Ψ̈_{m,m} / Ψ_{m,m} + λ_m`.
    pub ground_state_v: f64,
    /// `W_m`, `V_m` against the printed closed forms, where those exist.
    pub closed_form: Option<f64>,
}

pub const RICCATI_ANALYTIC_TOL: f64 = 1e-8;
pub const RICCATI_NUMERICAL_TOL: f64 = 1e-5;
pub const GROUND_STATE_TOL: f64 = 1e-5;
pub const CLOSED_FORM_TOL: f64 = 1e-10;
pub const NORM_TOL: f64 = 1e-6;
pub const CHANGE_OF_VARIABLE_TOL: f64 = 1e-6;

impl PointwiseReport {
    pub fn passed(&self) -> bool {
        self.riccati_analytic <= RICCATI_ANALYTIC_TOL
            && self.riccati_numerical <= RICCATI_NUMERICAL_TOL
            && self.partner.is_none_or(|d| d <= RICCATI_ANALYTIC_TOL)
            && self.ground_state_w <= GROUND_STATE_TOL
            && self.ground_state_v <= GROUND_STATE_TOL
            && self.closed_form.is_none_or(|d| d <= CLOSED_FORM_TOL)
    }
}

/// `n` equally spaced points across the region where `Ψ_{m,m}` is above
/// `1e−6` of its peak.
pub fn sample_points_x(model: &PotentialModel, n: usize) -> Result<Vec<f64>> {
    Ok(PotentialModel::interior_grid(default_window(model, 1, 1e-6)?, n))
}

pub fn pointwise_report(model: &PotentialModel, slice: &PolySystemSlice, points: &[f64]) -> Result<PointwiseReport> {
    let sys = model.sys();
    let m = model.m();
    let lm = sys.lambda_f64(m);
    let eps = model.sign();
    let next = if sys.nu().admits(m + 1) { Some(PotentialModel::new(sys, m + 1)?) } else { None };
    let ground = BoundState::new(model, slice, m)?;
    let has_closed = closed_form_w(sys, m, 1.0).is_some();
    let mut r = PointwiseReport {
        riccati_analytic: 0.0,
        riccati_numerical: 0.0,
        partner: next.as_ref().map(|_| 0.0),
        ground_state_w: 0.0,
        ground_state_v: 0.0,
        closed_form: has_closed.then_some(0.0),
    };
    for &x in points {
        let xp = model.x_point(x)?;
        let w = model.w_at(&xp);
        let wd = model.w_dot_at(&xp);
        let v = model.v_at(&xp);
        let scale = 1.0 + w * w + wd.abs() + lm.abs();

        r.riccati_analytic = r.riccati_analytic.max((v - lm - (w * w - eps * wd)).abs() / scale);
        let h = 1e-5 * x.abs().max(1e-1).min(xp.from_a).min(xp.to_b);
        let wd_num = (model.superpotential(x + h)? - model.superpotential(x - h)?) / (2.0 * h);
        r.riccati_numerical = r.riccati_numerical.max((wd - wd_num).abs() / scale);
        if let (Some(nm), Some(p)) = (&next, r.partner.as_mut()) {
            *p = p.max((nm.v_at(&xp) - model.partner_v_at(&xp)).abs() / scale);
        }

        // Step resolves both the endpoint distance and the local rate |W|.
        let hg = 1e-4 * (1.0 + x.abs()).min(xp.from_a).min(xp.to_b).min(10.0 / (1.0 + w.abs()));
        let f0 = ground.eval(model, x)?;
        let fp = ground.eval(model, x + hg)?;
        let fm = ground.eval(model, x - hg)?;
        let w_num = -eps * (fp - fm) / (2.0 * hg * f0);
        let v_num = (fp - 2.0 * f0 + fm) / (hg * hg * f0) + lm;
        r.ground_state_w = r.ground_state_w.max(rel_dev(w, w_num));
        r.ground_state_v = r.ground_state_v.max(rel_dev(v, v_num));

        if let Some(c) = r.closed_form.as_mut() {
            let wc = closed_form_w(sys, m, x).expect("closed form exists");
            let vc = closed_form_v(sys, m, x).expect("closed form exists");
            *c = c.max(rel_dev(w, wc)).max(rel_dev(v, vc));
            if let Some(wh) = closed_form_w_half_angle(sys, m, x) {
                *c = c.max(rel_dev(w, wh));
            }
        }
    }
    Ok(r)
}
