//! Two-mode truncations of the v-equation.
//!
//! Fourier kind: `v ≈ a - b cos x`. Taylor kind: `v ≈ a + b x²`.
//! Both are planar systems whose blow-up is integrated with the shared
//! Dormand–Prince integrator after removing the singular time dependence.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrator::{integrate, Direction, EventSpec, IntegratorConfig, StoreMode};

type C64 = Complex64;

const DENOM_FLOOR: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TwoModeKind {
    Fourier,
    Taylor,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoModeState {
    pub a: f64,
    pub b: f64,
}

/// `(da/dt, db/dt)` for `v ≈ a - b cos x`.
pub fn fourier_two_mode_rhs(s: TwoModeState) -> Result<(f64, f64)> {
    let TwoModeState { a, b } = s;
    let d = b * b - 2.0 * a * a;
    if d.abs() < DENOM_FLOOR {
        return Err(Error::Domain { formula: "Fourier two-mode system", detail: format!("b² - 2a² = {d:e}") });
    }
    Ok(((2.0 * a * b * b + 2.0 * a * a - b * b) / d, b * (2.0 * a * a - 3.0 * b * b) / d))
}

/// `(da/dt, db/dt)` for `v ≈ a + b x²`.
pub fn taylor_two_mode_rhs(s: TwoModeState) -> Result<(f64, f64)> {
    let TwoModeState { a, b } = s;
    if !(a > 0.0) {
        return Err(Error::Domain { formula: "Taylor two-mode system", detail: format!("a = {a} <= 0") });
    }
    Ok((2.0 * b - 1.0, -8.0 * b * b / a))
}

/// First integral `2 log b + 1/b + 8 log a` of the Taylor system.
pub fn taylor_conserved_quantity(s: TwoModeState) -> f64 {
    2.0 * s.b.ln() + 1.0 / s.b + 8.0 * s.a.ln()
}

/// Sampled solution of a two-mode system.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct TwoModeSolution {
    pub kind: Option<TwoModeKind>,
    pub alpha: f64,
    pub epsilon: f64,
    pub t: Vec<f64>,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    /// Blow-up time estimate of the truncation.
    pub t_c_prime: f64,
    /// Fourier kind: time at which `b = a`, where the ansatz vanishes at `x = 0`.
    pub t_ansatz_zero: Option<f64>,
}

impl TwoModeSolution {
    /// Blow-up observable: `a - b` (Fourier) or `a` (Taylor).
    pub fn observable(&self, i: usize) -> f64 {
        match self.kind {
            Some(TwoModeKind::Taylor) => self.a[i],
            _ => self.a[i] - self.b[i],
        }
    }
}

fn two_mode_config() -> IntegratorConfig {
    IntegratorConfig { rtol: 1e-12, atol: 1e-14, h_init: 1e-4, h_min: 1e-16, h_max: 0.05, ..Default::default() }
}

/// Integrates the chosen system from `(a, b) = (α, ε)` to its blow-up.
///
/// The Fourier system is integrated in a rescaled time `σ` with
/// `dt/dσ = (2a² - b²)/(a² + b²)`, which removes the pole at `b² = 2a²`; there `t` reaches
/// its maximum, which is reported as `t_c_prime`. The `b = a` crossing is
/// recorded on the way. The Taylor system is integrated in `t` down to
/// `a = 10⁻³` and then in `ℓ = log a` to `a ≈ e^{-40}`, where the remaining
/// time `a / (1 - 2b)` is added.
pub fn solve_two_mode(kind: TwoModeKind, alpha: f64, epsilon: f64) -> Result<TwoModeSolution> {
    if !(alpha > 0.0 && epsilon >= 0.0 && epsilon < alpha) {
        return Err(Error::InvalidParams(format!("need 0 <= epsilon < alpha, got alpha={alpha}, epsilon={epsilon}")));
    }
    match kind {
        TwoModeKind::Fourier => solve_fourier(alpha, epsilon),
        TwoModeKind::Taylor => solve_taylor(alpha, epsilon),
    }
}

fn solve_fourier(alpha: f64, epsilon: f64) -> Result<TwoModeSolution> {
    let mut sol = TwoModeSolution { kind: Some(TwoModeKind::Fourier), alpha, epsilon, ..Default::default() };
    if epsilon == 0.0 {
        // b stays 0 and a = α - t reaches zero only as σ → ∞
        sol.t = vec![0.0, alpha];
        sol.a = vec![alpha, 0.0];
        sol.b = vec![0.0, 0.0];
        sol.t_c_prime = alpha;
        sol.t_ansatz_zero = Some(alpha);
        return Ok(sol);
    }
    let rhs = |_s: f64, y: &[C64], dy: &mut [C64]| {
        let (a, b) = (y[1].re, y[2].re);
        let norm = a * a + b * b;
        dy[0] = C64::new((2.0 * a * a - b * b) / norm, 0.0);
        dy[1] = C64::new(-(2.0 * a * b * b + 2.0 * a * a - b * b) / norm, 0.0);
        dy[2] = C64::new(-b * (2.0 * a * a - 3.0 * b * b) / norm, 0.0);
        Ok(())
    };
    let events = [
        // b = √2 a, written linearly so that a step cannot jump across the fold
        EventSpec::new(|y: &[C64]| y[2].re - std::f64::consts::SQRT_2 * y[1].re).direction(Direction::Increasing),
        EventSpec::new(|y: &[C64]| y[1].re - y[2].re).direction(Direction::Decreasing).terminal(false),
    ];
    let y0 = [C64::new(0.0, 0.0), C64::new(alpha, 0.0), C64::new(epsilon, 0.0)];
    let s_end = 10.0 * alpha + 10.0;
    let cfg = two_mode_config();
    let (tr, hit) = integrate(rhs, &y0, 0.0, s_end, &cfg, &events)?;
    let hit = hit.ok_or(Error::EventNotReached { t: tr.last_state().map_or(f64::NAN, |y| y[0].re) })?;
    for y in &tr.states {
        sol.t.push(y[0].re);
        sol.a.push(y[1].re);
        sol.b.push(y[2].re);
    }
    sol.t_c_prime = hit.state[0].re;
    sol.t_ansatz_zero = tr.events.first().map(|e| e.state[0].re);
    Ok(sol)
}

const TAYLOR_SWITCH: f64 = 1e-3;
const TAYLOR_LOG_END: f64 = -40.0;

fn solve_taylor(alpha: f64, epsilon: f64) -> Result<TwoModeSolution> {
    let mut sol = TwoModeSolution { kind: Some(TwoModeKind::Taylor), alpha, epsilon, ..Default::default() };
    let cfg = two_mode_config();
    let rhs_t = |t: f64, y: &[C64], dy: &mut [C64]| {
        // a stage overshooting a = 0 rejects the step instead of failing the run
        let (da, db) = taylor_two_mode_rhs(TwoModeState { a: y[0].re, b: y[1].re })
            .map_err(|_| Error::NonFiniteRhs { t: C64::new(t, 0.0) })?;
        dy[0] = C64::new(da, 0.0);
        dy[1] = C64::new(db, 0.0);
        Ok(())
    };
    let y0 = [C64::new(alpha, 0.0), C64::new(epsilon, 0.0)];
    let mut t_end = 0.0;
    let mut b_switch = epsilon;
    if alpha > TAYLOR_SWITCH {
        let ev = [EventSpec::new(|y: &[C64]| y[0].re - TAYLOR_SWITCH).direction(Direction::Decreasing)];
        let (tr, hit) = integrate(rhs_t, &y0, 0.0, 10.0 * alpha + 10.0, &cfg, &ev)?;
        let hit = hit.ok_or(Error::EventNotReached { t: tr.last_time().unwrap_or(f64::NAN) })?;
        for (t, y) in tr.times.iter().zip(&tr.states) {
            sol.t.push(*t);
            sol.a.push(y[0].re);
            sol.b.push(y[1].re);
        }
        t_end = hit.t;
        b_switch = hit.state[1].re;
    }
    // state (t, b) as functions of ℓ = log a
    let rhs_l = |l: f64, y: &[C64], dy: &mut [C64]| {
        let b = y[1].re;
        let den = 2.0 * b - 1.0;
        if den.abs() < DENOM_FLOOR {
            return Err(Error::NonFiniteRhs { t: C64::new(l, 0.0) });
        }
        dy[0] = C64::new(l.exp() / den, 0.0);
        dy[1] = C64::new(-8.0 * b * b / den, 0.0);
        Ok(())
    };
    let l0 = alpha.min(TAYLOR_SWITCH).ln();
    let y0 = [C64::new(t_end, 0.0), C64::new(b_switch, 0.0)];
    // ℓ decreases; integrate in λ = -ℓ
    let rhs_lam = |lam: f64, y: &[C64], dy: &mut [C64]| {
        rhs_l(-lam, y, dy)?;
        dy.iter_mut().for_each(|v| *v = -*v);
        Ok(())
    };
    let cfg_l = IntegratorConfig { store: StoreMode::All, h_max: 0.5, ..cfg };
    let (tr, _) = integrate(rhs_lam, &y0, -l0, -TAYLOR_LOG_END, &cfg_l, &[])?;
    for (lam, y) in tr.times.iter().zip(&tr.states).skip(1) {
        sol.t.push(y[0].re);
        sol.a.push((-lam).exp());
        sol.b.push(y[1].re);
    }
    let (a_end, b_end) = (TAYLOR_LOG_END.exp(), sol.b.last().copied().unwrap_or(b_switch));
    sol.t_c_prime = sol.t.last().copied().unwrap_or(0.0) + a_end / (1.0 - 2.0 * b_end);
    Ok(sol)
}

/// Fitted near-blow-up behaviour of a two-mode solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NearBlowup {
    pub kind: TwoModeKind,
    /// Event time the forms are anchored at.
    pub t_c: f64,
    /// `a_c` (Fourier) or `b_c` (Taylor).
    pub constant: f64,
    /// Time of the sample the constant was matched at.
    pub t_fit: f64,
}

impl NearBlowup {
    /// Predicted `(a, b)` at time `t < t_c`.
    pub fn predict(&self, t: f64) -> (f64, f64) {
        let s = self.t_c - t;
        match self.kind {
            TwoModeKind::Fourier => {
                let ac = self.constant;
                (ac + (1.0 + 2.0 * ac) * s, ac - ac * s)
            }
            TwoModeKind::Taylor => (s, 1.0 / (8.0 * (-s.ln() + self.constant))),
        }
    }

    /// Ratio of the fitted constant to its small-ε prediction:
    /// `a_c / (ε e^{-α})` or `8 ε b_c`.
    pub fn consistency_ratio(&self, alpha: f64, epsilon: f64) -> f64 {
        match self.kind {
            TwoModeKind::Fourier => self.constant / (epsilon * (-alpha).exp()),
            TwoModeKind::Taylor => 8.0 * epsilon * self.constant,
        }
    }
}

pub const FIT_WINDOW: (f64, f64) = (1e-4, 1e-3);

/// Matches the near-blow-up forms at the last sample whose blow-up
/// observable lies in [`FIT_WINDOW`].
///
/// The Fourier forms are anchored at the `b = a` crossing, the Taylor forms
/// at `a = 0`.
pub fn near_blowup_forms(sol: &TwoModeSolution) -> Result<NearBlowup> {
    let kind = sol.kind.ok_or_else(|| Error::InvalidParams("solution without kind".into()))?;
    let t_c = match kind {
        TwoModeKind::Fourier => sol.t_ansatz_zero.ok_or(Error::EventNotReached { t: sol.t_c_prime })?,
        TwoModeKind::Taylor => sol.t_c_prime,
    };
    let idx = (0..sol.t.len())
        .rev()
        .find(|&i| sol.t[i] <= t_c && (FIT_WINDOW.0..=FIT_WINDOW.1).contains(&sol.observable(i)))
        .ok_or_else(|| Error::FitOutOfRange(format!("no sample with observable in {FIT_WINDOW:?}")))?;
    let s = t_c - sol.t[idx];
    let constant = match kind {
        TwoModeKind::Fourier => (sol.a[idx] - s) / (1.0 + 2.0 * s),
        TwoModeKind::Taylor => 1.0 / (8.0 * sol.b[idx]) + s.ln(),
    };
    Ok(NearBlowup { kind, t_c, constant, t_fit: sol.t[idx] })
}

fn poly_mul(p: &[f64], q: &[f64]) -> Vec<f64> {
    if p.is_empty() || q.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0.0; p.len() + q.len() - 1];
    for (i, a) in p.iter().enumerate() {
        for (j, b) in q.iter().enumerate() {
            out[i + j] += a * b;
        }
    }
    out
}

fn poly_dx(p: &[f64]) -> Vec<f64> {
    p.iter().enumerate().skip(1).map(|(i, a)| i as f64 * a).collect()
}

/// `v (v_t - v_xx + 1) + 2 v_x²` for `v` and `v_t` given as power series
/// in `x` (coefficient of `x^i` at index `i`). Vanishes for exact solutions.
pub fn taylor_residual(v: &[f64], v_t: &[f64]) -> Vec<f64> {
    let vxx = poly_dx(&poly_dx(v));
    let len = v_t.len().max(vxx.len()).max(1);
    let inner: Vec<f64> = (0..len)
        .map(|i| v_t.get(i).unwrap_or(&0.0) - vxx.get(i).unwrap_or(&0.0) + if i == 0 { 1.0 } else { 0.0 })
        .collect();
    let vx = poly_dx(v);
    let mut out = poly_mul(v, &inner);
    for (i, a) in poly_mul(&vx, &vx).into_iter().enumerate() {
        if i >= out.len() {
            out.push(0.0);
        }
        out[i] += 2.0 * a;
    }
    out
}

/// Phase-plane lattice rows `(a, b, da/dt, db/dt)`; points where the rhs is
/// undefined are skipped.
pub fn phase_plane(kind: TwoModeKind, a_range: (f64, f64), b_range: (f64, f64), n: usize) -> Vec<[f64; 4]> {
    let lerp = |r: (f64, f64), i: usize| r.0 + (r.1 - r.0) * i as f64 / (n.max(2) - 1) as f64;
    let mut rows = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let s = TwoModeState { a: lerp(a_range, i), b: lerp(b_range, j) };
            let r = match kind {
                TwoModeKind::Fourier => fourier_two_mode_rhs(s),
                TwoModeKind::Taylor => taylor_two_mode_rhs(s),
            };
            if let Ok((da, db)) = r {
                rows.push([s.a, s.b, da, db]);
            }
        }
    }
    rows
}
