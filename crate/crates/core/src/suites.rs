//! Named verification suites run over a set of systems, with per-check
//! residuals collected into a serialisable report.

use std::fmt;
use std::str::FromStr;

use num_traits::Zero;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::classical::check_theorem2;
use crate::error::{Error, Result};
use crate::exactpoly::{format_rational, Rational};
use crate::ladder::ladder_identity_residuals;
use crate::polygen::{
    generate_phi, generate_phi_rodrigues, interlaces, ode_residual, phi_zeros, recurrence_coeffs, PolySystemSlice,
};
use crate::quad::{
    norm_ladder_check, orthogonality_matrix, square_integrability_check, QuadRule, DEFAULT_TOL_ABS, DEFAULT_TOL_REL,
};
use crate::samples::{default_samples, random_admissible};
use crate::schrodinger::{
    norm_pair, pointwise_report, sample_points_x, PotentialModel, CHANGE_OF_VARIABLE_TOL, CLOSED_FORM_TOL,
    GROUND_STATE_TOL, NORM_TOL, RICCATI_ANALYTIC_TOL, RICCATI_NUMERICAL_TOL,
};
use crate::system::{CaseTag, HyperSystem, SystemDescriptor};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Ode,
    Rodrigues,
    Orthogonality,
    Theorem2,
    Ladder,
    Norms,
    Recurrence,
    Schrodinger,
}

impl Suite {
    pub const ALL: [Suite; 8] = [
        Suite::Ode,
        Suite::Rodrigues,
        Suite::Orthogonality,
        Suite::Theorem2,
        Suite::Ladder,
        Suite::Norms,
        Suite::Recurrence,
        Suite::Schrodinger,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Ode => "ode",
            Suite::Rodrigues => "rodrigues",
            Suite::Orthogonality => "orthogonality",
            Suite::Theorem2 => "theorem2",
            Suite::Ladder => "ladder",
            Suite::Norms => "norms",
            Suite::Recurrence => "recurrence",
            Suite::Schrodinger => "schrodinger",
        }
    }

    /// Largest `l` examined when none is given (always capped by ν).
    pub fn default_l_max(self) -> usize {
        match self {
            Suite::Ode | Suite::Rodrigues => 12,
            Suite::Ladder | Suite::Recurrence => 10,
            Suite::Theorem2 => 8,
            Suite::Orthogonality | Suite::Norms => 6,
            Suite::Schrodinger => 3,
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown suite {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Residual {
    /// Exact value as `"num/den"`.
    Exact(String),
    Float(f64),
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckRecord {
    pub check: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<Residual>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl CheckRecord {
    fn new(check: &str) -> Self {
        Self { check: check.to_string(), l: None, m: None, k: None, status: Status::Pass, residual: None, detail: None }
    }

    fn l(mut self, l: usize) -> Self {
        self.l = Some(l);
        self
    }

    fn m(mut self, m: usize) -> Self {
        self.m = Some(m);
        self
    }

    fn k(mut self, k: usize) -> Self {
        self.k = Some(k);
        self
    }

    fn exact(mut self, r: &Rational) -> Self {
        self.status = if r.is_zero() { Status::Pass } else { Status::Fail };
        self.residual = Some(Residual::Exact(format_rational(r)));
        self
    }

    fn within(mut self, value: f64, tol: f64) -> Self {
        self.status = if value <= tol { Status::Pass } else { Status::Fail };
        self.residual = Some(Residual::Float(value));
        self
    }

    fn holds(mut self, ok: bool) -> Self {
        self.status = if ok { Status::Pass } else { Status::Fail };
        self
    }

    fn skipped(mut self, why: &str) -> Self {
        self.status = Status::Skipped;
        self.detail = Some(why.to_string());
        self
    }

    fn detail(mut self, d: impl Into<String>) -> Self {
        self.detail = Some(d.into());
        self
    }

    fn error(check: &str, e: &Error) -> Self {
        let mut r = Self::new(check);
        r.status = Status::Fail;
        r.detail = Some(e.to_string());
        r
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SystemReport {
    pub system: SystemDescriptor,
    pub nu: String,
    pub passed: bool,
    pub checks: Vec<CheckRecord>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub passed: bool,
    pub tol_abs: f64,
    pub tol_rel: f64,
    pub systems: Vec<SystemReport>,
}

impl SuiteReport {
    pub fn count(&self, status: Status) -> usize {
        self.systems.iter().flat_map(|s| &s.checks).filter(|c| c.status == status).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteOptions {
    pub l_max: Option<usize>,
    pub tol_abs: f64,
    pub tol_rel: f64,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self { l_max: None, tol_abs: DEFAULT_TOL_ABS, tol_rel: DEFAULT_TOL_REL }
    }
}

/// The built-in grid for one case (or all cases), plus two seeded random
/// admissible systems per case when a seed is given.
pub fn suite_systems(case: Option<CaseTag>, seed: Option<u64>) -> Vec<HyperSystem> {
    let cases: Vec<CaseTag> = case.map_or_else(|| CaseTag::ALL.to_vec(), |c| vec![c]);
    let mut out: Vec<HyperSystem> = cases.iter().flat_map(|&c| default_samples(c)).collect();
    if let Some(seed) = seed {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for &c in &cases {
            for _ in 0..2 {
                out.push(random_admissible(c, &mut rng));
            }
        }
    }
    out
}

pub fn run_suite(suite: Suite, systems: &[HyperSystem], opts: &SuiteOptions) -> SuiteReport {
    let systems: Vec<SystemReport> = systems.par_iter().map(|sys| run_on_system(suite, sys, opts)).collect();
    SuiteReport {
        suite,
        passed: systems.iter().all(|s| s.passed),
        tol_abs: opts.tol_abs,
        tol_rel: opts.tol_rel,
        systems,
    }
}

pub fn run_on_system(suite: Suite, sys: &HyperSystem, opts: &SuiteOptions) -> SystemReport {
    let cap = opts.l_max.unwrap_or(suite.default_l_max());
    let slice = PolySystemSlice::up_to(sys, cap);
    let rule = QuadRule::for_system(sys).with_tolerances(opts.tol_abs, opts.tol_rel);
    let checks = match suite {
        Suite::Ode => ode_checks(&slice),
        Suite::Rodrigues => rodrigues_checks(&slice),
        Suite::Orthogonality => orthogonality_checks(&slice, &rule, opts),
        Suite::Theorem2 => theorem2_checks(&slice),
        Suite::Ladder => ladder_checks(&slice),
        Suite::Norms => norm_checks(&slice, &rule, opts),
        Suite::Recurrence => recurrence_checks(&slice),
        Suite::Schrodinger => schrodinger_checks(&slice),
    };
    SystemReport {
        system: sys.descriptor(),
        nu: sys.nu().to_string(),
        passed: checks.iter().all(|c| c.status != Status::Fail),
        checks,
    }
}

fn ode_checks(slice: &PolySystemSlice) -> Vec<CheckRecord> {
    let sys = slice.sys();
    (0..=slice.l_max())
        .flat_map(|l| {
            let phi = slice.phi(l).expect("within slice");
            let res = ode_residual(sys, phi, &sys.lambda(l)).max_abs_coeff();
            let monic = phi.degree() == Some(l) && phi.leading().is_some_and(|c| *c == Rational::from_integer(1.into()));
            vec![
                CheckRecord::new("ode_residual").l(l).exact(&res),
                CheckRecord::new("monic_degree_l").l(l).holds(monic),
            ]
        })
        .collect()
}

fn rodrigues_checks(slice: &PolySystemSlice) -> Vec<CheckRecord> {
    let sys = slice.sys();
    (0..=slice.l_max())
        .map(|l| {
            let name = "rodrigues_equals_recursion";
            match (generate_phi(sys, l), generate_phi_rodrigues(sys, l)) {
                (Ok(a), Ok(b)) => CheckRecord::new(name).l(l).exact(&(&a - &b).max_abs_coeff()),
                (Err(e), _) | (_, Err(e)) => CheckRecord::error(name, &e).l(l),
            }
        })
        .collect()
}

fn orthogonality_checks(slice: &PolySystemSlice, rule: &QuadRule, opts: &SuiteOptions) -> Vec<CheckRecord> {
    let sys = slice.sys();
    let top = slice.l_max();
    let mut out = Vec::new();
    for m in 0..=top.min(1) {
        match orthogonality_matrix(sys, m, top, rule) {
            Ok(g) => {
                for (i, row) in g.entries.iter().enumerate() {
                    for (j, e) in row.iter().enumerate().skip(i) {
                        let (l, k) = (m + i, m + j);
                        let rec = CheckRecord::new(if i == j { "norm_positive" } else { "orthogonal" }).l(l).k(k).m(m);
                        out.push(match (e, i == j) {
                            (None, _) => rec.skipped("l + k >= -alpha"),
                            (Some(v), true) => rec.holds(*v > 0.0 && v.is_finite()).detail(format!("{v:e}")),
                            (Some(v), false) => {
                                let d = (row[i].unwrap() * g.entries[j][j].unwrap()).sqrt();
                                rec.within(v.abs() / d, opts.tol_rel)
                            }
                        });
                    }
                }
            }
            Err(e) => out.push(CheckRecord::error("orthogonal", &e).m(m)),
        }
    }
    for l in 0..=top {
        for m in 0..=l {
            out.push(CheckRecord::new("square_integrable").l(l).m(m).holds(square_integrability_check(sys, l, m, rule)));
        }
    }
    if let Some(last) = sys.nu().max_index() {
        let l = last + 1;
        out.push(
            CheckRecord::new("not_square_integrable_beyond_cutoff")
                .l(l)
                .m(0)
                .holds(!square_integrability_check(sys, l, 0, rule)),
        );
    }
    out
}

fn theorem2_checks(slice: &PolySystemSlice) -> Vec<CheckRecord> {
    (0..=slice.l_max())
        .map(|l| match check_theorem2(slice, l) {
            Ok(v) => {
                let mut rec = CheckRecord::new("classical_proportional").l(l).holds(v.passed());
                rec.residual = v.max_deviation.map(Residual::Float);
                rec.detail(format!(
                    "Phi_{l} = {} * {}{}",
                    v.constant,
                    v.reference,
                    if v.imaginary_part_zero { "" } else { " (imaginary part nonzero)" }
                ))
            }
            Err(e) => CheckRecord::error("classical_proportional", &e).l(l),
        })
        .collect()
}

fn ladder_checks(slice: &PolySystemSlice) -> Vec<CheckRecord> {
    let mut out = Vec::new();
    for l in 0..=slice.l_max() {
        for m in 0..=l {
            match ladder_identity_residuals(slice, l, m) {
                Ok(rs) => out.extend(rs.iter().map(|r| CheckRecord::new(r.identity).l(l).m(m).exact(&r.residual))),
                Err(e) => out.push(CheckRecord::error("ladder", &e).l(l).m(m)),
            }
        }
    }
    out
}

fn norm_checks(slice: &PolySystemSlice, rule: &QuadRule, opts: &SuiteOptions) -> Vec<CheckRecord> {
    let sys = slice.sys();
    let mut out = Vec::new();
    for l in 1..=slice.l_max() {
        match norm_ladder_check(sys, l, rule) {
            Ok(steps) => out.extend(steps.iter().map(|st| {
                CheckRecord::new("norm_ratio")
                    .l(l)
                    .m(st.m)
                    .within(st.relative_residual(), opts.tol_rel)
                    .detail(format!("ratio {:.16e}, expected {}", st.ratio, st.expected))
            })),
            Err(e) => out.push(CheckRecord::error("norm_ratio", &e).l(l)),
        }
    }
    out
}

fn recurrence_checks(slice: &PolySystemSlice) -> Vec<CheckRecord> {
    let sys = slice.sys();
    let top = slice.l_max();
    let mut out = Vec::new();
    for l in 0..top {
        out.push(match recurrence_coeffs(slice, l) {
            Ok(r) => CheckRecord::new("three_term").l(l).exact(&r.residual.max_abs_coeff()),
            Err(e) => CheckRecord::error("three_term", &e).l(l),
        });
    }
    let mut prev: Option<Vec<f64>> = None;
    for l in 1..=top {
        match phi_zeros(slice, l) {
            Ok(z) => {
                let sep = z.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
                let phi = slice.phi(l).expect("within slice").to_float();
                let res = z.iter().map(|&x| phi.eval(x).abs() / phi.eval_scale(x)).fold(0.0, f64::max);
                let inside = z.iter().all(|&x| sys.contains(x));
                out.push(CheckRecord::new("zeros_inside").l(l).holds(inside && z.len() == l));
                out.push(CheckRecord::new("zero_residual").l(l).within(res, 1e-8));
                if l >= 2 {
                    out.push(CheckRecord::new("zero_separation").l(l).holds(sep > 1e-9).detail(format!("{sep:e}")));
                }
                if let Some(p) = &prev {
                    out.push(CheckRecord::new("interlacing").l(l - 1).k(l).holds(interlaces(p, &z, 1e-9)));
                }
                prev = Some(z);
            }
            Err(e) => {
                out.push(CheckRecord::error("zeros_inside", &e).l(l));
                prev = None;
            }
        }
    }
    out
}

fn schrodinger_checks(slice: &PolySystemSlice) -> Vec<CheckRecord> {
    let sys = slice.sys();
    let top = slice.l_max();
    let mut out = Vec::new();
    for m in 0..=top.min(2) {
        let model = match PotentialModel::new(sys, m) {
            Ok(x) => x,
            Err(e) => {
                out.push(CheckRecord::error("model", &e).m(m));
                continue;
            }
        };
        let pts = match sample_points_x(&model, 32) {
            Ok(p) => p,
            Err(e) => {
                out.push(CheckRecord::error("sample_points", &e).m(m));
                continue;
            }
        };
        out.push(
            CheckRecord::new("change_of_variable")
                .m(m)
                .within(model.check_change_of_variable(&pts), CHANGE_OF_VARIABLE_TOL),
        );
        match pointwise_report(&model, slice, &pts) {
            Ok(r) => {
                out.push(CheckRecord::new("riccati_analytic").m(m).within(r.riccati_analytic, RICCATI_ANALYTIC_TOL));
                out.push(CheckRecord::new("riccati_numerical").m(m).within(r.riccati_numerical, RICCATI_NUMERICAL_TOL));
                if let Some(p) = r.partner {
                    out.push(CheckRecord::new("partner_potential").m(m).within(p, RICCATI_ANALYTIC_TOL));
                }
                out.push(CheckRecord::new("ground_state_w").m(m).within(r.ground_state_w, GROUND_STATE_TOL));
                out.push(CheckRecord::new("ground_state_v").m(m).within(r.ground_state_v, GROUND_STATE_TOL));
                if let Some(c) = r.closed_form {
                    out.push(CheckRecord::new("closed_form").m(m).within(c, CLOSED_FORM_TOL));
                }
            }
            Err(e) => out.push(CheckRecord::error("pointwise", &e).m(m)),
        }
        for l in m..=top.min(m + 2) {
            out.push(match norm_pair(&model, slice, l) {
                Ok((x_side, s_side)) => CheckRecord::new("norm_equality")
                    .l(l)
                    .m(m)
                    .within((x_side - s_side).abs() / s_side.abs(), NORM_TOL),
                Err(e) => CheckRecord::error("norm_equality", &e).l(l).m(m),
            });
        }
    }
    out
}
