//! Finite-difference spectrum of `−d²/dx² + V_m` on a truncated window.
//!
//! Three-point Laplacian with Dirichlet ends gives a symmetric tridiagonal
//! matrix; its lowest eigenvalues are isolated by Sturm-sequence bisection.

use serde::Serialize;

use super::{BoundState, PotentialModel};
use crate::error::{Error, Result};
use crate::polygen::PolySystemSlice;
use crate::system::{SPoint, SystemDescriptor};

pub const MIN_GRID: usize = 500;
/// Targeted states must fall below this fraction of their peak at the
/// window ends.
pub const BOUNDARY_FRACTION: f64 = 1e-8;

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumReport {
    pub system: SystemDescriptor,
    pub m: usize,
    pub n_grid: usize,
    pub window: (f64, f64),
    pub h: f64,
    /// Lowest eigenvalues of the discretised operator, ascending.
    pub fd_eigenvalues: Vec<f64>,
    /// `λ_l` for the targeted `l = m, m+1, …` with `l < ν`.
    pub analytic: Vec<f64>,
    /// `fd − λ` for the matched levels.
    pub residuals: Vec<f64>,
    pub continuum_edge: Option<f64>,
}

impl SpectrumReport {
    /// Largest `|fd − λ| / max(1, |λ|)`.
    pub fn max_relative_residual(&self) -> f64 {
        self.residuals
            .iter()
            .zip(&self.analytic)
            .map(|(r, l)| r.abs() / l.abs().max(1.0))
            .fold(0.0, f64::max)
    }
}

/// Bound states `Ψ_{l,m}` for `l = m, …, m + levels − 1`, stopping at the
/// cutoff.
pub fn targeted_states(model: &PotentialModel, levels: usize) -> Result<Vec<BoundState>> {
    if levels == 0 {
        return Err(Error::InvalidIndex("at least one level must be targeted".into()));
    }
    let m = model.m();
    let slice = PolySystemSlice::up_to(model.sys(), m + levels - 1);
    (m..=slice.l_max()).map(|l| BoundState::new(model, &slice, l)).collect()
}

fn envelope(model: &PotentialModel, states: &[BoundState], xp: &SPoint) -> f64 {
    states.iter().map(|b| b.eval_at(model, xp).abs()).fold(0.0, f64::max)
}

/// Window outside of which every targeted `|Ψ|` stays below
/// `threshold · peak`. Finite ends of `(a′, b′)` are kept as they are.
pub fn default_window(model: &PotentialModel, levels: usize, threshold: f64) -> Result<(f64, f64)> {
    let states = targeted_states(model, levels)?;
    let (lo, hi) = model.x_domain();
    let start = {
        let x = model.change().x_of_s(model.sys().center());
        if x.is_finite() && x > lo && x < hi {
            x
        } else if lo.is_finite() && hi.is_finite() {
            0.5 * (lo + hi)
        } else if lo.is_finite() {
            lo + 1.0
        } else {
            0.0
        }
    };
    const STEP: f64 = 0.01;
    const MAX_STEPS: usize = 200_000;
    const QUIET_RUN: usize = 300;
    let scan = |dir: f64| -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        let mut peak: f64 = 0.0;
        let mut quiet = 0;
        for k in 1..=MAX_STEPS {
            let x = start + dir * k as f64 * STEP;
            if x <= lo || x >= hi {
                break;
            }
            let v = envelope(model, &states, &SPoint::new((lo, hi), x));
            peak = peak.max(v);
            out.push((x, v));
            if v < 1e-3 * threshold * peak {
                quiet += 1;
                if quiet >= QUIET_RUN {
                    break;
                }
            } else {
                quiet = 0;
            }
        }
        out
    };
    let left = scan(-1.0);
    let right = scan(1.0);
    let centre = envelope(model, &states, &SPoint::new((lo, hi), start));
    let peak = left.iter().chain(&right).map(|p| p.1).fold(centre, f64::max);
    let cut = |side: &[(f64, f64)], end: f64| -> f64 {
        if end.is_finite() {
            return end;
        }
        let last = side.iter().rposition(|p| p.1 >= threshold * peak);
        match last {
            Some(i) => side[(i + 5).min(side.len() - 1)].0,
            None => side.first().map_or(start, |p| p.0),
        }
    };
    Ok((cut(&left, lo), cut(&right, hi)))
}

/// Checks that every targeted state is below [`BOUNDARY_FRACTION`] of its
/// peak at both window ends. At an end that coincides with a finite end of
/// `(a′, b′)` the one-sided limit is used.
pub fn check_window(model: &PotentialModel, states: &[BoundState], window: (f64, f64)) -> Result<()> {
    let (lo, hi) = model.x_domain();
    let (a, b) = window;
    let width = b - a;
    let probe = |x: f64| -> SPoint {
        let delta = 1e-30 * width;
        if x == lo {
            SPoint { s: lo + delta, from_a: delta, to_b: hi - lo - delta }
        } else if x == hi {
            SPoint { s: hi - delta, from_a: hi - lo - delta, to_b: delta }
        } else {
            SPoint::new((lo, hi), x)
        }
    };
    let ends = [probe(a), probe(b)];
    let grid = PotentialModel::interior_grid(window, 4001);
    for st in states {
        let peak = grid
            .iter()
            .map(|&x| st.eval_at(model, &SPoint::new((lo, hi), x)).abs())
            .fold(0.0, f64::max);
        for e in &ends {
            let v = st.eval_at(model, e).abs();
            if !v.is_finite() || v >= BOUNDARY_FRACTION * peak {
                return Err(Error::WindowTooSmall(format!(
                    "|Psi_{{{},{}}}({:.6})| = {:.3e} is not below {:.0e} of its peak {:.3e} on [{}, {}]",
                    st.l, st.m, e.s, v, BOUNDARY_FRACTION, peak, a, b
                )));
            }
        }
    }
    Ok(())
}

/// Number of eigenvalues below `lam` of the symmetric tridiagonal matrix
/// with diagonal `diag` and constant off-diagonal `e` (`e2 = e²`).
fn sturm_count(diag: &[f64], e2: f64, lam: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for (i, d) in diag.iter().enumerate() {
        q = d - lam - if i == 0 { 0.0 } else { e2 / q };
        if q == 0.0 {
            q = -f64::EPSILON * (d.abs() + lam.abs() + 1.0);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// The `k` smallest eigenvalues, ascending.
pub fn tridiagonal_lowest(diag: &[f64], off: f64, k: usize) -> Vec<f64> {
    let e2 = off * off;
    let lo0 = diag.iter().fold(f64::INFINITY, |a, &d| a.min(d)) - 2.0 * off.abs();
    let hi0 = diag.iter().fold(f64::NEG_INFINITY, |a, &d| a.max(d)) + 2.0 * off.abs();
    let mut out = Vec::with_capacity(k);
    let mut floor = lo0;
    for idx in 0..k.min(diag.len()) {
        let (mut lo, mut hi) = (floor, hi0);
        for _ in 0..300 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if sturm_count(diag, e2, mid) > idx {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo <= 4.0 * f64::EPSILON * lo.abs().max(hi.abs()).max(1.0) {
                break;
            }
        }
        let v = 0.5 * (lo + hi);
        out.push(v);
        floor = lo;
    }
    out
}

/// Lowest `levels` eigenvalues of `−d²/dx² + V_m` on `window` with `n_grid`
/// interior points, compared with `λ_m, λ_{m+1}, …` below the cutoff.
pub fn fd_eigensolve(
    model: &PotentialModel,
    n_grid: usize,
    window: (f64, f64),
    levels: usize,
) -> Result<SpectrumReport> {
    let (lo, hi) = model.x_domain();
    let (a, b) = window;
    if !(a.is_finite() && b.is_finite() && a < b && a >= lo && b <= hi) {
        let point = if a < lo || !a.is_finite() { a } else { b };
        return Err(Error::OutOfDomain { point, domain: model.change().domain_label() });
    }
    let h = (b - a) / (n_grid + 1) as f64;
    if n_grid < MIN_GRID {
        return Err(Error::GridTooCoarse { h, limit: (b - a) / (MIN_GRID + 1) as f64 });
    }
    let states = targeted_states(model, levels)?;
    check_window(model, &states, window)?;
    let grid = PotentialModel::interior_grid(window, n_grid);
    let inv_h2 = 1.0 / (h * h);
    let diag: Vec<f64> = grid
        .iter()
        .map(|&x| 2.0 * inv_h2 + model.v_at(&SPoint::new((lo, hi), x)))
        .collect();
    if let Some(bad) = diag.iter().position(|d| !d.is_finite()) {
        return Err(Error::Numerical(format!("potential is not finite at x = {}", grid[bad])));
    }
    let fd_eigenvalues = tridiagonal_lowest(&diag, -inv_h2, levels);
    let analytic: Vec<f64> = states.iter().map(|s| s.lambda).collect();
    let residuals = fd_eigenvalues.iter().zip(&analytic).map(|(f, l)| f - l).collect();
    Ok(SpectrumReport {
        system: model.sys().descriptor(),
        m: model.m(),
        n_grid,
        window,
        h,
        fd_eigenvalues,
        analytic,
        residuals,
        continuum_edge: model.continuum_edge(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::{make_system, CaseTag};
    use std::f64::consts::PI;

    #[test]
    fn sturm_bisection_on_known_matrix() {
        // diag 2, off −1, n = 50: eigenvalues 2 − 2cos(kπ/51).
        let n = 50;
        let ev = tridiagonal_lowest(&vec![2.0; n], -1.0, 3);
        for (k, v) in ev.iter().enumerate() {
            let exact = 2.0 - 2.0 * ((k + 1) as f64 * PI / (n + 1) as f64).cos();
            assert!((v - exact).abs() < 1e-13);
        }
    }

    #[test]
    fn harmonic_spectrum() {
        let sys = make_system(CaseTag::Const, (-2, 1), (0, 1)).unwrap();
        let model = PotentialModel::new(&sys, 0).unwrap();
        let r = fd_eigensolve(&model, 2000, (-8.0, 8.0), 3).unwrap();
        for (f, l) in r.fd_eigenvalues.iter().zip([0.0, 2.0, 4.0]) {
            assert!((f - l).abs() < 1e-3, "{f} vs {l}");
        }
        assert_eq!(r.analytic, vec![0.0, 2.0, 4.0]);
        assert!(matches!(fd_eigensolve(&model, 100, (-8.0, 8.0), 3), Err(Error::GridTooCoarse { .. })));
        assert!(matches!(fd_eigensolve(&model, 2000, (-3.0, 3.0), 3), Err(Error::WindowTooSmall(_))));
    }

    #[test]
    fn morse_spectrum() {
        let sys = make_system(CaseTag::S2, (-6, 1), (4, 1)).unwrap();
        let model = PotentialModel::new(&sys, 0).unwrap();
        // Narrow window cuts the weakly bound top level.
        assert!(matches!(fd_eigensolve(&model, 4000, (-2.0, 12.0), 4), Err(Error::WindowTooSmall(_))));
        let window = default_window(&model, 4, BOUNDARY_FRACTION * 1e-2).unwrap();
        let r = fd_eigensolve(&model, 4000, window, 6).unwrap();
        assert_eq!(r.analytic, vec![0.0, 6.0, 10.0, 12.0]);
        assert!(r.max_relative_residual() < 1e-2, "{r:?}");
        assert_eq!(r.fd_eigenvalues.len(), 6);
        assert!(r.fd_eigenvalues[4] > 12.0);
    }

    #[test]
    fn poschl_teller_spectrum() {
        let sys = make_system(CaseTag::OneMinusS2, (-4, 1), (0, 1)).unwrap();
        let model = PotentialModel::new(&sys, 0).unwrap();
        let eps = 1e-6;
        let r = fd_eigensolve(&model, 3000, (eps, PI - eps), 3).unwrap();
        assert_eq!(r.analytic, vec![0.0, 4.0, 10.0]);
        assert!(r.max_relative_residual() < 1e-2, "{r:?}");
        assert!(default_window(&model, 3, 1e-10).unwrap() == (0.0, PI));
    }
}
