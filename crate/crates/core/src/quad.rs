//! Weighted inner products on `(a, b)` by double-exponential quadrature.
//!
//! Finite intervals use tanh–sinh, half-lines exp–sinh and the real line
//! sinh–sinh; each refinement halves the step and reuses the previous
//! nodes. Composite Gauss–Legendre (64 nodes per panel) covers finite
//! windows with smooth integrands.

use std::f64::consts::FRAC_PI_2;
use std::sync::OnceLock;

use serde::Serialize;

use crate::error::{Error, Result};
use num_traits::{One, Zero};

use crate::exactpoly::{rational_to_f64, FloatPoly, Rational, RationalPoly};
use crate::ladder::{apply_a, apply_a_plus, assoc_from_phi, HalfPowerFn};
use crate::polygen::{generate_phi, rodrigues_raw, PolySystemSlice};
use crate::system::{CaseTag, HyperSystem, SPoint};

pub const DEFAULT_TOL_ABS: f64 = 1e-10;
pub const DEFAULT_TOL_REL: f64 = 1e-8;

const GL_NODES: usize = 64;
const MAX_LEVEL: usize = 12;
const INTEGRAL_REL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum RuleKind {
    TanhSinh,
    ExpSinh,
    SinhSinh,
    GaussLegendre { panels: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadRule {
    pub lo: f64,
    pub hi: f64,
    pub kind: RuleKind,
    /// Centre (sinh–sinh) of the transformed rule.
    pub center: f64,
    /// Length scale of the transformed rule.
    pub scale: f64,
    /// Absolute tolerance on successive refinements.
    pub tol_abs: f64,
    /// Relative tolerance used by ratio-type checks built on this rule.
    pub tol_rel: f64,
}

impl QuadRule {
    /// Double-exponential rule matched to the endpoints of `(lo, hi)`.
    pub fn for_interval(lo: f64, hi: f64) -> Self {
        let kind = match (lo.is_finite(), hi.is_finite()) {
            (true, true) => RuleKind::TanhSinh,
            (true, false) => RuleKind::ExpSinh,
            (false, false) => RuleKind::SinhSinh,
            (false, true) => RuleKind::ExpSinh,
        };
        Self {
            lo,
            hi,
            kind,
            center: 0.0,
            scale: 1.0,
            tol_abs: DEFAULT_TOL_ABS,
            tol_rel: DEFAULT_TOL_REL,
        }
    }

    /// Rule on `(a, b)` centred and scaled on the weight of `sys`.
    pub fn for_system(sys: &HyperSystem) -> Self {
        let (a, b) = sys.interval();
        let mut rule = Self::for_interval(a, b);
        match rule.kind {
            RuleKind::SinhSinh => {
                rule.center = sys.center();
                rule.scale = sys.natural_scale();
            }
            RuleKind::ExpSinh => rule.scale = sys.natural_scale(),
            _ => {}
        }
        rule
    }

    pub fn gauss_legendre(lo: f64, hi: f64, panels: usize) -> Self {
        Self {
            lo,
            hi,
            kind: RuleKind::GaussLegendre { panels: panels.max(1) },
            center: 0.5 * (lo + hi),
            scale: 0.5 * (hi - lo),
            tol_abs: DEFAULT_TOL_ABS,
            tol_rel: DEFAULT_TOL_REL,
        }
    }

    pub fn with_tolerances(mut self, tol_abs: f64, tol_rel: f64) -> Self {
        self.tol_abs = tol_abs;
        self.tol_rel = tol_rel;
        self
    }

    /// `∫ f` over `(lo, hi)`. The integrand receives the node with accurate
    /// distances to the finite endpoints.
    pub fn integrate<F: Fn(&SPoint) -> f64>(&self, f: F) -> Result<f64> {
        match self.kind {
            RuleKind::GaussLegendre { panels } => self.integrate_gl(&f, panels),
            _ => self.integrate_de(&f),
        }
    }

    fn integrate_gl<F: Fn(&SPoint) -> f64>(&self, f: &F, panels: usize) -> Result<f64> {
        let coarse = gauss_legendre_sum(f, self.lo, self.hi, panels);
        let fine = gauss_legendre_sum(f, self.lo, self.hi, 2 * panels);
        let delta = (fine - coarse).abs();
        let tol = self.tol_abs.max(1e-13 * fine.abs());
        if delta > 10.0 * tol || !fine.is_finite() {
            return Err(Error::NonConvergence { delta, tol });
        }
        Ok(fine)
    }

    /// Node, weight, or `None` once the node is no longer representable.
    fn de_node(&self, t: f64) -> Option<(SPoint, f64)> {
        let u = FRAC_PI_2 * t.sinh();
        let dudt = FRAC_PI_2 * t.cosh();
        match self.kind {
            RuleKind::TanhSinh => {
                let hw = 0.5 * (self.hi - self.lo);
                let e = (-2.0 * u.abs()).exp();
                let near = hw * 2.0 * e / (1.0 + e);
                let far = hw * 2.0 / (1.0 + e);
                if near == 0.0 {
                    return None;
                }
                let (from_lo, to_hi) = if u < 0.0 { (near, far) } else { (far, near) };
                let s = if u < 0.0 { self.lo + from_lo } else { self.hi - to_hi };
                let w = hw * dudt * 4.0 * e / ((1.0 + e) * (1.0 + e));
                Some((SPoint { s, from_a: from_lo, to_b: to_hi }, w))
            }
            RuleKind::ExpSinh => {
                if u.abs() > 700.0 {
                    return None;
                }
                let d = self.scale * u.exp();
                if d == 0.0 || !d.is_finite() {
                    return None;
                }
                let w = d * dudt;
                if self.lo.is_finite() {
                    Some((SPoint { s: self.lo + d, from_a: d, to_b: f64::INFINITY }, w))
                } else {
                    Some((SPoint { s: self.hi - d, from_a: f64::INFINITY, to_b: d }, w))
                }
            }
            RuleKind::SinhSinh => {
                if u.abs() > 700.0 {
                    return None;
                }
                let s = self.center + self.scale * u.sinh();
                let w = self.scale * u.cosh() * dudt;
                if !s.is_finite() || !w.is_finite() {
                    return None;
                }
                Some((SPoint { s, from_a: f64::INFINITY, to_b: f64::INFINITY }, w))
            }
            RuleKind::GaussLegendre { .. } => unreachable!("not a double-exponential rule"),
        }
    }

    /// Sum of `w f` over `t = k h` in one direction (`sign = ±1`), with `k`
    /// restricted to odd values when `odd_only`. Returns `(sum, abs_sum)`.
    fn de_branch<F: Fn(&SPoint) -> f64>(&self, f: &F, h: f64, sign: f64, odd_only: bool) -> (f64, f64) {
        let mut sum = 0.0;
        let mut abs_sum = 0.0;
        let step = if odd_only { 2 } else { 1 };
        let mut k: usize = 1;
        let mut small_run = 0;
        loop {
            let t = sign * k as f64 * h;
            let Some((pt, w)) = self.de_node(t) else { break };
            let fx = f(&pt);
            let term = if fx == 0.0 || w == 0.0 { 0.0 } else { w * fx };
            sum += term;
            abs_sum += term.abs();
            if term.abs() <= 1e-20 * abs_sum || term == 0.0 {
                small_run += 1;
                if small_run >= 3 && t.abs() > 1.0 {
                    break;
                }
            } else {
                small_run = 0;
            }
            k += step;
            if t.abs() > 8.0 {
                break;
            }
        }
        (sum, abs_sum)
    }

    fn integrate_de<F: Fn(&SPoint) -> f64>(&self, f: &F) -> Result<f64> {
        let mut h = 1.0;
        let (pt0, w0) = self.de_node(0.0).expect("centre node is representable");
        let c0 = w0 * f(&pt0);
        let (p, pa) = self.de_branch(f, h, 1.0, false);
        let (n, na) = self.de_branch(f, h, -1.0, false);
        let mut raw = c0 + p + n;
        let mut abs_raw = c0.abs() + pa + na;
        let mut estimate = h * raw;
        let mut delta = f64::INFINITY;
        let mut tol = self.tol_abs;
        for level in 1..=MAX_LEVEL {
            h *= 0.5;
            let (p, pa) = self.de_branch(f, h, 1.0, true);
            let (n, na) = self.de_branch(f, h, -1.0, true);
            raw += p + n;
            abs_raw += pa + na;
            let next = h * raw;
            delta = (next - estimate).abs();
            estimate = next;
            // Both absolute and relative accuracy are asked for, but never
            // below the rounding floor of a few ulps of ∫|f|.
            let floor = 64.0 * f64::EPSILON * h * abs_raw;
            tol = floor.max(self.tol_abs.min(INTEGRAL_REL_TOL * estimate.abs()));
            if !estimate.is_finite() {
                return Err(Error::NonConvergence { delta: f64::INFINITY, tol });
            }
            if level >= 3 && delta <= tol {
                return Ok(estimate);
            }
        }
        if delta > 10.0 * tol {
            Err(Error::NonConvergence { delta, tol })
        } else {
            Ok(estimate)
        }
    }
}

/// 64-point Gauss–Legendre nodes and weights on `[−1, 1]`.
fn gl_table() -> &'static (Vec<f64>, Vec<f64>) {
    static TABLE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    TABLE.get_or_init(|| {
        let n = GL_NODES;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        (nodes, weights)
    })
}

fn gauss_legendre_sum<F: Fn(&SPoint) -> f64>(f: &F, lo: f64, hi: f64, panels: usize) -> f64 {
    let (nodes, weights) = gl_table();
    let width = (hi - lo) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let a = lo + p as f64 * width;
        let half = 0.5 * width;
        let mid = a + half;
        for (x, w) in nodes.iter().zip(weights) {
            let s = mid + half * x;
            let pt = SPoint { s, from_a: s - lo, to_b: hi - s };
            total += w * half * f(&pt);
        }
    }
    total
}

/// Exact point about which polynomials are re-expanded before float
/// evaluation: the peak `−β/α` of the weight where it is rational.
fn expansion_center(sys: &HyperSystem) -> Rational {
    match sys.case() {
        CaseTag::Const | CaseTag::Linear | CaseTag::S2 => -(sys.beta() / sys.alpha()),
        _ => Rational::zero(),
    }
}

/// `p(s)` as a float polynomial in `s − c`. Monomial evaluation far from
/// the origin cancels badly for shifted weights.
fn shifted(p: &RationalPoly, c: &Rational) -> FloatPoly {
    p.compose(&RationalPoly::from_coeffs(vec![c.clone(), Rational::one()])).to_float()
}

/// Integrand `σ^m p_f p_g ρ` evaluated in log form; `pf`, `pg` are in
/// powers of `s − c`.
fn product_integrand<'a>(
    sys: &'a HyperSystem,
    m: usize,
    c: f64,
    pf: &'a FloatPoly,
    pg: &'a FloatPoly,
) -> impl Fn(&SPoint) -> f64 + 'a {
    move |pt: &SPoint| {
        let t = pt.s - c;
        let (sf, lf) = pf.signed_log_abs(t);
        let (sg, lg) = pg.signed_log_abs(t);
        if sf == 0.0 || sg == 0.0 {
            return 0.0;
        }
        let lw = sys.log_weight_m(m, pt);
        let v = sf * sg * (lf + lg + lw).exp();
        if v.is_nan() {
            0.0
        } else {
            v
        }
    }
}

/// `⟨f, g⟩ = ∫ σ^m p_f p_g ρ ds` over `(a, b)`.
pub fn inner_product(sys: &HyperSystem, f: &HalfPowerFn, g: &HalfPowerFn, rule: &QuadRule) -> Result<f64> {
    if f.m != g.m {
        return Err(Error::InvalidIndex(format!(
            "inner product of kappa^{} and kappa^{} functions",
            f.m, g.m
        )));
    }
    let c = expansion_center(sys);
    let pf = shifted(&f.p, &c);
    let pg = shifted(&g.p, &c);
    rule.integrate(product_integrand(sys, f.m, rational_to_f64(&c), &pf, &pg))
}

pub fn norm_squared(sys: &HyperSystem, f: &HalfPowerFn, rule: &QuadRule) -> Result<f64> {
    inner_product(sys, f, f, rule)
}

/// Gram matrix of `{Φ_{l,m} : m ≤ l ≤ l_max}`; entry `[i][j]` is for
/// `l = m + i`, `k = m + j`. In the finite families off-diagonal pairs with
/// `l + k ≥ −α` are outside the proven range and left as `None`.
#[derive(Debug, Clone, Serialize)]
pub struct GramMatrix {
    pub m: usize,
    pub entries: Vec<Vec<Option<f64>>>,
}

impl GramMatrix {
    /// Largest `|G_lk| / √(G_ll G_kk)` over computed off-diagonal pairs.
    pub fn max_offdiag_rel(&self) -> f64 {
        let n = self.entries.len();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                if let (Some(g), Some(a), Some(b)) =
                    (self.entries[i][j], self.entries[i][i], self.entries[j][j])
                {
                    worst = worst.max(g.abs() / (a * b).sqrt());
                }
            }
        }
        worst
    }

    pub fn skipped_pairs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (i, row) in self.entries.iter().enumerate() {
            for (j, e) in row.iter().enumerate() {
                if e.is_none() {
                    out.push((self.m + i, self.m + j));
                }
            }
        }
        out
    }
}

/// Whether the orthogonality of `Φ_{l,m}`, `Φ_{k,m}` is covered by the
/// boundary-decay argument (`l + k < −α` in the finite families).
pub fn pair_in_proven_range(sys: &HyperSystem, l: usize, k: usize) -> bool {
    if !sys.case().is_finite_family() {
        return true;
    }
    ((l + k) as f64) < -rational_to_f64(sys.alpha())
}

pub fn orthogonality_matrix(sys: &HyperSystem, m: usize, l_max: usize, rule: &QuadRule) -> Result<GramMatrix> {
    let slice = PolySystemSlice::new(sys, l_max)?;
    if m > l_max {
        return Err(Error::InvalidIndex(format!("m = {m} exceeds l_max = {l_max}")));
    }
    let funcs = (m..=l_max)
        .map(|l| assoc_from_phi(&slice, l, m))
        .collect::<Result<Vec<_>>>()?;
    let n = funcs.len();
    let mut entries = vec![vec![None; n]; n];
    for i in 0..n {
        for j in i..n {
            let (l, k) = (m + i, m + j);
            if i != j && !pair_in_proven_range(sys, l, k) {
                continue;
            }
            let v = inner_product(sys, &funcs[i], &funcs[j], rule)?;
            entries[i][j] = Some(v);
            entries[j][i] = Some(v);
        }
    }
    Ok(GramMatrix { m, entries })
}

#[derive(Debug, Clone, Serialize)]
pub struct NormStep {
    pub m: usize,
    /// `‖Φ_{l,m+1}‖² / ‖Φ_{l,m}‖²`.
    pub ratio: f64,
    /// `λ_l − λ_m`.
    pub expected: f64,
}

impl NormStep {
    pub fn residual(&self) -> f64 {
        self.ratio - self.expected
    }

    pub fn relative_residual(&self) -> f64 {
        self.residual().abs() / self.expected.abs()
    }
}

/// Norm ratios along the ladder `Φ_{l,0}, …, Φ_{l,l}`.
pub fn norm_ladder_check(sys: &HyperSystem, l: usize, rule: &QuadRule) -> Result<Vec<NormStep>> {
    let slice = PolySystemSlice::new(sys, l)?;
    let norms = (0..=l)
        .map(|m| norm_squared(sys, &assoc_from_phi(&slice, l, m)?, rule))
        .collect::<Result<Vec<_>>>()?;
    Ok((0..l)
        .map(|m| NormStep {
            m,
            ratio: norms[m + 1] / norms[m],
            expected: rational_to_f64(&(sys.lambda(l) - sys.lambda(m))),
        })
        .collect())
}

/// `(⟨A_m Φ_{l,m}, Φ_{k,m+1}⟩, ⟨Φ_{l,m}, A_m⁺ Φ_{k,m+1}⟩)`.
pub fn adjointness_pair(
    slice: &PolySystemSlice,
    l: usize,
    k: usize,
    m: usize,
    rule: &QuadRule,
) -> Result<(f64, f64)> {
    let sys = slice.sys();
    let f = assoc_from_phi(slice, l, m)?;
    let g = assoc_from_phi(slice, k, m + 1)?;
    let lhs = inner_product(sys, &apply_a(sys, &f)?, &g, rule)?;
    let rhs = inner_product(sys, &f, &apply_a_plus(sys, &g)?, rule)?;
    Ok((lhs, rhs))
}

/// The degree-`l` polynomial used for the integrability test. Inside the
/// cutoff this is `Φ_l`; beyond it no degree-`l` solution need exist, so the
/// Rodrigues numerator is used when it keeps degree `l` and `s^l` otherwise.
pub fn test_polynomial(sys: &HyperSystem, l: usize) -> RationalPoly {
    if sys.nu().admits(l) {
        return generate_phi(sys, l).expect("index within cutoff");
    }
    let raw = rodrigues_raw(sys, l);
    if raw.degree() == Some(l) {
        raw.monic()
    } else {
        let mut c = vec![crate::exactpoly::int(0); l + 1];
        c[l] = crate::exactpoly::int(1);
        RationalPoly::from_coeffs(c)
    }
}

/// Sequence of integrals of `f` over pieces that march geometrically toward
/// one endpoint of `(lo, hi)`.
fn endpoint_pieces<F: Fn(&SPoint) -> f64>(f: &F, lo: f64, hi: f64, toward_hi: bool, count: usize) -> Vec<f64> {
    let (nodes, weights) = gl_table();
    let mut out = Vec::with_capacity(count);
    let infinite = if toward_hi { !hi.is_finite() } else { !lo.is_finite() };
    let finite_len = if lo.is_finite() && hi.is_finite() { hi - lo } else { f64::INFINITY };
    for j in 0..count {
        // Piece in log coordinates: distance d = d0 · e^u, u ∈ [0, ln 2].
        let d0 = if infinite {
            2f64.powi(j as i32)
        } else {
            0.25 * finite_len.min(1.0) * 0.5f64.powi(j as i32 + 1)
        };
        let half = 0.5 * std::f64::consts::LN_2;
        let mut piece = 0.0;
        for (x, w) in nodes.iter().zip(weights) {
            let u = half * (1.0 + x);
            let d = d0 * u.exp();
            let jac = d * half;
            let pt = if infinite {
                let s = if toward_hi { d } else { -d };
                SPoint { s, from_a: s - lo, to_b: hi - s }
            } else if toward_hi {
                SPoint { s: hi - d, from_a: finite_len - d, to_b: d }
            } else {
                SPoint { s: lo + d, from_a: d, to_b: finite_len - d }
            };
            piece += w * jac * f(&pt);
        }
        out.push(piece);
    }
    out
}

/// Whether `∫ |κ^m p|² ρ ds` converges, judged from integrals over pieces
/// `[R, 2R]` (toward infinite endpoints) or `[d/2, d]` (toward finite ones):
/// the trailing pieces must shrink geometrically.
pub fn square_integrability_check(sys: &HyperSystem, l: usize, m: usize, _rule: &QuadRule) -> bool {
    if m > l {
        return false;
    }
    let p = test_polynomial(sys, l).nth_derivative(m).to_float();
    let integrand = product_integrand(sys, m, 0.0, &p, &p);
    let (lo, hi) = sys.interval();
    const PIECES: usize = 64;
    const TAIL: usize = 8;
    [false, true].into_iter().all(|toward_hi| {
        let pieces = endpoint_pieces(&integrand, lo, hi, toward_hi, PIECES);
        let tail = &pieces[PIECES - TAIL - 1..];
        if tail.iter().any(|v| !v.is_finite()) {
            return false;
        }
        tail.windows(2).all(|w| {
            let (prev, next) = (w[0].abs(), w[1].abs());
            next == 0.0 || (prev > 0.0 && next / prev < 1.0 - 1e-6)
        })
    })
}
