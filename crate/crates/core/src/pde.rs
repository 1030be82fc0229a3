//! The reciprocal equation `v_t = v_xx - 1 - 2 v_x²/v` as a spectral ODE
//! system in the Fourier coefficients of `v`.

use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::asymptotics;
use crate::error::{Error, Result};
use crate::integrator::{
    integrate, integrate_path, ContourPath, Direction, EventSpec, IntegratorConfig, Segment, StoreMode, Trajectory,
};
use crate::reduced::{solve_two_mode, TwoModeKind};
use crate::spectral::{node, padded_grid_size, FourierField, GridValues, Samples, Transform, DEFAULT_DIVISION_FLOOR};

type C64 = Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub alpha: f64,
    pub epsilon: f64,
    pub n_modes: usize,
    pub integrator: IntegratorConfig,
    pub division_floor: f64,
}

impl ModelParams {
    pub fn new(alpha: f64, epsilon: f64) -> Self {
        Self {
            alpha,
            epsilon,
            n_modes: 128,
            integrator: IntegratorConfig::default(),
            division_floor: DEFAULT_DIVISION_FLOOR,
        }
    }

    pub fn with_modes(mut self, n_modes: usize) -> Self {
        self.n_modes = n_modes;
        self
    }

    pub fn with_store(mut self, store: StoreMode) -> Self {
        self.integrator.store = store;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.epsilon >= 0.0 && self.epsilon < self.alpha) {
            return Err(Error::InvalidParams(format!(
                "need 0 <= epsilon < alpha, got alpha = {}, epsilon = {}",
                self.alpha, self.epsilon
            )));
        }
        if self.n_modes < 8 {
            return Err(Error::InvalidParams(format!("n_modes = {} < 8", self.n_modes)));
        }
        self.integrator.validate()
    }
}

/// Pseudospectral right-hand side with reusable buffers.
pub struct VEquation {
    n: usize,
    transform: Arc<Transform>,
    floor: f64,
    v_re: Vec<f64>,
    v_im: Vec<f64>,
    vx_re: Vec<f64>,
    vx_im: Vec<f64>,
    q: Vec<C64>,
}

impl VEquation {
    pub fn new(n_modes: usize, floor: f64) -> Self {
        let m = padded_grid_size(n_modes);
        Self {
            n: n_modes,
            transform: Transform::cached(m),
            floor,
            v_re: vec![0.0; m],
            v_im: vec![0.0; m],
            vx_re: vec![0.0; m],
            vx_im: vec![0.0; m],
            q: vec![C64::new(0.0, 0.0); 2 * n_modes + 1],
        }
    }

    pub fn n_modes(&self) -> usize {
        self.n
    }

    /// `dc/dt` for coefficients `c`.
    ///
    /// Only `v_x²/v` is formed on the grid; the linear terms are applied to
    /// the coefficients directly so they carry no transform roundoff.
    pub fn rhs(&mut self, c: &[C64], dc: &mut [C64]) -> Result<()> {
        let n = self.n;
        let m = self.v_re.len();
        let v_cplx = self.transform.synthesize_into(c, n, 0, &mut self.v_re, &mut self.v_im);
        let vx_cplx = self.transform.synthesize_into(c, n, 1, &mut self.vx_re, &mut self.vx_im);
        let cplx = v_cplx || vx_cplx;

        let (mut min_abs, mut j_min) = (f64::INFINITY, 0);
        if cplx {
            for j in 0..m {
                let v = C64::new(self.v_re[j], self.v_im[j]);
                let a = v.norm();
                if a < min_abs {
                    min_abs = a;
                    j_min = j;
                }
                let vx = C64::new(self.vx_re[j], self.vx_im[j]);
                let q = vx * vx / v;
                self.v_re[j] = q.re;
                self.v_im[j] = q.im;
            }
        } else {
            for j in 0..m {
                let v = self.v_re[j];
                if v.abs() < min_abs {
                    min_abs = v.abs();
                    j_min = j;
                }
                self.v_re[j] = self.vx_re[j] * self.vx_re[j] / v;
            }
        }
        if !(min_abs >= self.floor) {
            return Err(Error::DivisorTooSmall { min_abs, x: node(j_min, m) });
        }
        let im = cplx.then_some(self.v_im.as_slice());
        self.transform.analyze_into(&self.v_re, im, n, &mut self.q);
        for i in 0..=2 * n {
            let k = i as f64 - n as f64;
            dc[i] = c[i] * (-k * k) - self.q[i] * 2.0;
        }
        dc[n] -= 1.0;
        Ok(())
    }
}

/// `α - ε cos x`. Panics if `n_modes` is zero.
pub fn initial_field(params: &ModelParams) -> FourierField {
    FourierField::from_cosines(params.n_modes, &[params.alpha, -params.epsilon]).expect("n_modes >= 1")
}

/// `α + ε V(x)` for a user-supplied profile, sampled on the padded grid.
pub fn initial_field_with_profile(params: &ModelParams, profile: impl Fn(f64) -> f64) -> Result<FourierField> {
    let m = padded_grid_size(params.n_modes);
    let g = GridValues::from_fn(m, |x| C64::new(params.alpha + params.epsilon * profile(x), 0.0));
    FourierField::analyze(&g, params.n_modes)
}

/// Right-hand side of the v-equation as a field.
pub fn v_rhs(field: &FourierField) -> Result<FourierField> {
    v_rhs_with_floor(field, DEFAULT_DIVISION_FLOOR)
}

pub fn v_rhs_with_floor(field: &FourierField, floor: f64) -> Result<FourierField> {
    let mut eq = VEquation::new(field.n_modes(), floor);
    let mut dc = vec![C64::new(0.0, 0.0); field.coeffs().len()];
    eq.rhs(field.coeffs(), &mut dc)?;
    FourierField::new(field.n_modes(), dc)
}

/// Detected blow-up time and the analytic estimates for it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BlowupReport {
    pub alpha: f64,
    pub epsilon: f64,
    pub n_modes: usize,
    pub t_c: f64,
    pub state_at_tc: FourierField,
    pub t_hat: f64,
    pub t_tilde: f64,
    pub t_c_prime: Option<f64>,
    pub delta_hat: f64,
    pub delta_tilde: f64,
    pub delta_prime: Option<f64>,
    pub steps: usize,
}

/// Re `v(0, t) = Re Σ c_k`.
pub fn core_value(c: &[C64]) -> f64 {
    c.iter().map(|c| c.re).sum()
}

/// Integrates from `α - ε cos x` until `v(0, t)` reaches zero.
pub fn solve_to_blowup(params: &ModelParams) -> Result<(Trajectory, BlowupReport)> {
    params.validate()?;
    solve_from(params, &initial_field(params))
}

/// As [`solve_to_blowup`] from an arbitrary even initial field.
pub fn solve_from(params: &ModelParams, init: &FourierField) -> Result<(Trajectory, BlowupReport)> {
    params.validate()?;
    let n = params.n_modes;
    let mut eq = VEquation::new(n, params.division_floor);
    let events = [EventSpec::new(core_value).direction(Direction::Decreasing)];
    let t1 = 2.0 * params.alpha + 1.0;
    let (tr, hit) =
        integrate(|_t, c: &[C64], dc: &mut [C64]| eq.rhs(c, dc), init.coeffs(), 0.0, t1, &params.integrator, &events)?;
    let hit = hit.ok_or(Error::EventNotReached { t: t1 })?;
    let state = FourierField::new(n, hit.state.clone())?;
    let t_c = hit.t;
    let (alpha, eps) = (params.alpha, params.epsilon);
    let t_hat = asymptotics::t_hat(alpha, eps);
    let t_tilde = asymptotics::t_tilde(alpha, eps)?;
    let t_c_prime = solve_two_mode(TwoModeKind::Fourier, alpha, eps).ok().map(|s| s.t_c_prime);
    let report = BlowupReport {
        alpha,
        epsilon: eps,
        n_modes: n,
        t_c,
        state_at_tc: state,
        t_hat,
        t_tilde,
        t_c_prime,
        delta_hat: t_hat - t_c,
        delta_tilde: t_tilde - t_c,
        delta_prime: t_c_prime.map(|t| t - t_c),
        steps: tr.stats.accepted,
    };
    Ok((tr, report))
}

/// States at the sorted `times`, integrating piecewise from `init` at
/// `t = 0`. Stops at the first failure and returns what was reached.
pub fn sample_until_failure(
    params: &ModelParams,
    init: &FourierField,
    times: &[f64],
) -> (Vec<(f64, FourierField)>, Option<Error>) {
    let n = init.n_modes();
    let mut eq = VEquation::new(n, params.division_floor);
    let mut out = Vec::with_capacity(times.len());
    let mut y = init.coeffs().to_vec();
    let mut t = 0.0;
    let mut cfg = params.integrator;
    cfg.store = StoreMode::Endpoints;
    for &target in times {
        if target > t {
            match integrate(|_t, c: &[C64], dc: &mut [C64]| eq.rhs(c, dc), &y, t, target, &cfg, &[]) {
                Ok((tr, _)) => y = tr.last_state().expect("non-empty").to_vec(),
                Err(e) => return (out, Some(e)),
            }
            t = target;
        }
        out.push((t, FourierField::from_parts_unchecked(n, y.clone())));
    }
    (out, None)
}

/// `u = 1/v` on the padded grid and its coefficients `a_k`, `|k| <= N`.
pub fn u_from_v(field: &FourierField, floor: f64) -> Result<(GridValues, FourierField)> {
    let n = field.n_modes();
    let t = Transform::cached(padded_grid_size(n));
    let v = t.synthesize(field.coeffs(), n, 0);
    v.check_floor(floor)?;
    let u: Vec<C64> = v.to_complex().iter().map(|v| v.inv()).collect();
    let coeffs = t.analyze_samples(&Samples::from_complex(&u), n);
    Ok((GridValues::new(u), coeffs))
}

/// Flatness `u(0) - u(π)` evaluated two ways.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Flatness {
    /// From `1/v(0) - 1/v(π)`.
    pub pointwise: f64,
    /// From `4 Σ a_{2k+1}`.
    pub from_coeffs: f64,
}

pub fn flatness(field: &FourierField) -> Result<Flatness> {
    let v0 = field.sum().re;
    let vpi = field.alternating_sum().re;
    let (_, a) = u_from_v(field, DEFAULT_DIVISION_FLOOR)?;
    let n = field.n_modes() as i64;
    let odd: f64 = (1..=n).step_by(2).map(|k| a.coeff(k).re).sum();
    Ok(Flatness { pointwise: 1.0 / v0 - 1.0 / vpi, from_coeffs: 4.0 * odd })
}

/// Adds `i·η_k` to `c_k` and `c_{-k}`, with `η_k` iid uniform on
/// `(-|amplitude|, |amplitude|)` drawn from a ChaCha8 stream seeded by
/// `seed`. A negative amplitude gives exactly `-η` for the same seed.
pub fn seed_imaginary_noise(field: &FourierField, amplitude: f64, seed: u64) -> FourierField {
    if amplitude == 0.0 {
        return field.clone();
    }
    let n = field.n_modes();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = field.coeffs().to_vec();
    for k in 0..=n {
        let eta = amplitude * (2.0 * rng.gen::<f64>() - 1.0);
        c[n + k].im += eta;
        if k > 0 {
            c[n - k].im += eta;
        }
    }
    FourierField::from_parts_unchecked(n, c)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContinuationMethod {
    NoiseSeeded,
    ComplexPath,
}

#[derive(Debug, Clone)]
pub struct ContinuationResult {
    pub method: ContinuationMethod,
    pub rng_seed: u64,
    pub amplitude: f64,
    /// Real-axis samples (all stored steps).
    pub trajectory: Trajectory,
    /// States at the requested output times.
    pub snapshots: Vec<(f64, FourierField)>,
    /// Time at which `Re v(0, t)` first crosses zero.
    pub t_c: Option<f64>,
    /// Sign of `Im v(0, t)` just after `t_c`; 0 if it never separates from zero.
    pub branch_sign: i8,
}

impl ContinuationResult {
    pub fn snapshot_at(&self, t: f64) -> Option<&FourierField> {
        self.snapshots.iter().find(|(s, _)| (s - t).abs() <= 1e-12 * t.abs().max(1.0)).map(|(_, f)| f)
    }
}

pub const DEFAULT_NOISE_AMPLITUDE: f64 = 1e-16;

#[derive(Debug, Clone)]
pub struct ContinuationOptions {
    pub t_end: f64,
    /// Additional times at which to record snapshots.
    pub output_times: Vec<f64>,
    pub seed: u64,
    pub amplitude: f64,
}

impl ContinuationOptions {
    pub fn new(t_end: f64, seed: u64) -> Self {
        Self { t_end, output_times: Vec::new(), seed, amplitude: DEFAULT_NOISE_AMPLITUDE }
    }
}

fn schedule(t_start: f64, t_end: f64, extra: &[f64]) -> Vec<f64> {
    let mut ts: Vec<f64> = extra.iter().copied().filter(|&t| t > t_start && t < t_end).collect();
    ts.push(t_end);
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    ts
}

/// Appends `piece` to `acc`, dropping the duplicated first sample.
fn append(acc: &mut Trajectory, piece: Trajectory) {
    let skip = usize::from(!acc.is_empty());
    acc.times.extend(piece.times.iter().skip(skip));
    acc.points.extend(piece.points.iter().skip(skip));
    acc.states.extend(piece.states.into_iter().skip(skip));
    acc.events.extend(piece.events);
    acc.stats.accepted += piece.stats.accepted;
    acc.stats.rejected += piece.stats.rejected;
    acc.stats.rhs_evals += piece.stats.rhs_evals;
}

/// Real-time integration of a complex state through `targets`, recording a
/// snapshot at each target.
fn march(
    eq: &mut VEquation,
    cfg: &IntegratorConfig,
    y0: Vec<C64>,
    t0: f64,
    targets: &[f64],
    track_tc: bool,
    out: &mut ContinuationResult,
) -> Result<Vec<C64>> {
    let n = eq.n_modes();
    let mut y = y0;
    let mut t = t0;
    for &target in targets {
        let events: Vec<EventSpec<'_>> = if track_tc && out.t_c.is_none() {
            vec![EventSpec::new(core_value).direction(Direction::Decreasing).terminal(false)]
        } else {
            Vec::new()
        };
        let (piece, _) = integrate(|_t, c: &[C64], dc: &mut [C64]| eq.rhs(c, dc), &y, t, target, cfg, &events)?;
        if let Some(ev) = piece.events.first() {
            out.t_c.get_or_insert(ev.t);
        }
        y = piece.last_state().expect("non-empty").to_vec();
        t = target;
        append(&mut out.trajectory, piece);
        out.snapshots.push((t, FourierField::new(n, y.clone())?));
    }
    Ok(y)
}

fn branch_sign(tr: &Trajectory, t_c: Option<f64>) -> i8 {
    let Some(t_c) = t_c else { return 0 };
    tr.times
        .iter()
        .zip(&tr.states)
        .filter(|(t, _)| **t > t_c)
        .map(|(_, s)| s.iter().map(|c| c.im).sum::<f64>())
        .find(|im| im.abs() >= 1e-8)
        .map_or(0, |im| if im > 0.0 { 1 } else { -1 })
}

/// Integrates the noise-seeded complex system through the blow-up time.
pub fn continue_past_blowup(params: &ModelParams, opts: &ContinuationOptions) -> Result<ContinuationResult> {
    params.validate()?;
    let init = seed_imaginary_noise(&initial_field(params), opts.amplitude, opts.seed);
    let mut out = ContinuationResult {
        method: ContinuationMethod::NoiseSeeded,
        rng_seed: opts.seed,
        amplitude: opts.amplitude,
        trajectory: Trajectory::default(),
        snapshots: vec![(0.0, init.clone())],
        t_c: None,
        branch_sign: 0,
    };
    let mut eq = VEquation::new(params.n_modes, params.division_floor);
    let targets = schedule(0.0, opts.t_end, &opts.output_times);
    march(&mut eq, &params.integrator, init.coeffs().to_vec(), 0.0, &targets, true, &mut out)?;
    out.branch_sign = branch_sign(&out.trajectory, out.t_c);
    Ok(out)
}

/// Default detour radius: `min(10ε, t_c/2)`.
pub fn default_path_radius(epsilon: f64, t_c: f64) -> f64 {
    (10.0 * epsilon).min(0.5 * t_c)
}

/// Integrates along the real axis to `center - radius`, around a half
/// circle (upper or lower) and along the real axis to `t_end`.
pub fn continue_complex_path(
    params: &ModelParams,
    center: f64,
    radius: f64,
    t_end: f64,
    upper: bool,
    output_times: &[f64],
) -> Result<ContinuationResult> {
    params.validate()?;
    if !(radius > 0.0 && center - radius > 0.0 && center + radius < t_end) {
        return Err(Error::InvalidParams(format!(
            "detour of radius {radius} around {center} must fit in (0, {t_end})"
        )));
    }
    let init = initial_field(params);
    let mut out = ContinuationResult {
        method: ContinuationMethod::ComplexPath,
        rng_seed: 0,
        amplitude: 0.0,
        trajectory: Trajectory::default(),
        snapshots: vec![(0.0, init.clone())],
        t_c: Some(center),
        branch_sign: 0,
    };
    let mut eq = VEquation::new(params.n_modes, params.division_floor);
    let cfg = params.integrator;
    let (t_in, t_out) = (center - radius, center + radius);
    let before = schedule(0.0, t_in, &output_times.iter().copied().filter(|&t| t < t_in).collect::<Vec<_>>());
    let y = march(&mut eq, &cfg, init.coeffs().to_vec(), 0.0, &before, false, &mut out)?;
    out.snapshots.pop();

    let arc = ContourPath {
        segments: vec![Segment::Arc {
            center: C64::new(center, 0.0),
            radius,
            theta0: std::f64::consts::PI,
            theta1: if upper { 0.0 } else { 2.0 * std::f64::consts::PI },
        }],
    };
    let arc_tr = integrate_path(|_t, c: &[C64], dc: &mut [C64]| eq.rhs(c, dc), &y, &arc, &cfg)?;
    let y = arc_tr.last_state().expect("non-empty").to_vec();

    let after = schedule(t_out, t_end, output_times);
    march(&mut eq, &cfg, y, t_out, &after, false, &mut out)?;
    out.branch_sign = branch_sign(&out.trajectory, Some(center));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn initial_field_examples() {
        let f = initial_field(&ModelParams::new(1.0, 0.01));
        assert_eq!(f.coeff(0), c(1.0));
        assert_eq!(f.coeff(1), c(-0.005));
        assert_eq!(f.coeff(-1), c(-0.005));
        let flat = initial_field(&ModelParams::new(0.5, 0.0));
        assert!((1..=128).all(|k| flat.coeff(k) == c(0.0) && flat.coeff(-k) == c(0.0)));

        let p = ModelParams::new(1.0, 0.01).with_modes(16);
        let g = initial_field_with_profile(&p, |x| -x.cos()).unwrap();
        assert!(g.max_distance(&initial_field(&p)) < 1e-16);
    }

    #[test]
    fn rhs_of_constant_is_minus_one() {
        let r = v_rhs(&FourierField::constant(16, 0.7)).unwrap();
        assert_eq!(r.coeff(0), c(-1.0));
        assert!((1..=16).all(|k| r.coeff(k) == c(0.0)));
    }

    #[test]
    fn rhs_reports_small_divisor() {
        let f = FourierField::from_cosines(16, &[0.5, -0.5]).unwrap();
        assert!(matches!(v_rhs(&f), Err(Error::DivisorTooSmall { .. })));
    }

    #[test]
    fn perturbation_residual_identity() {
        // ṽ(ṽ_t - rhs(ṽ)) = 2 ε² e^{-2t} sin² x = ε² e^{-2t} (1 - cos 2x)
        for (alpha, eps, t0) in [(1.0, 0.01, 0.3), (0.25, 0.1, 0.1), (4.0, 0.1, 2.5)] {
            let n = 32;
            let decay = eps * f64::exp(-t0);
            let v = FourierField::from_cosines(n, &[alpha - t0, -decay]).unwrap();
            let vt = FourierField::from_cosines(n, &[-1.0, decay]).unwrap();
            let r = v_rhs(&v).unwrap();
            let diff = FourierField::new(n, vt.coeffs().iter().zip(r.coeffs()).map(|(a, b)| a - b).collect()).unwrap();
            let res = v.convolve(&diff).unwrap();
            let e2 = decay * decay;
            for k in -(n as i64)..=n as i64 {
                let want = match k.abs() {
                    0 => e2,
                    2 => -0.5 * e2,
                    _ => 0.0,
                };
                assert!((res.coeff(k) - c(want)).norm() <= 1e-11, "k={k}: {}", res.coeff(k));
            }
        }
    }

    /// Pointwise evaluation of the rhs on 4096 nodes followed by a naive DFT.
    fn rhs_oracle(cos: &[f64], n_out: usize) -> Vec<C64> {
        let m = 4096;
        let eval = |x: f64| {
            let (mut v, mut vx, mut vxx) = (0.0, 0.0, 0.0);
            for (k, a) in cos.iter().enumerate() {
                let kf = k as f64;
                v += a * (kf * x).cos();
                vx -= a * kf * (kf * x).sin();
                vxx -= a * kf * kf * (kf * x).cos();
            }
            vxx - 1.0 - 2.0 * vx * vx / v
        };
        let vals: Vec<f64> = (0..m).map(|j| eval(node(j, m))).collect();
        (-(n_out as i64)..=n_out as i64)
            .map(|k| {
                vals.iter()
                    .enumerate()
                    .map(|(j, &v)| C64::from_polar(v, -(k as f64) * node(j, m)))
                    .sum::<C64>()
                    / m as f64
            })
            .collect()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]

        #[test]
        fn rhs_matches_fine_grid_oracle(a in proptest::collection::vec(-0.1f64..0.1, 5)) {
            let n = 32;
            let mut cos = vec![1.0];
            cos.extend(a.iter().enumerate().map(|(i, x)| x / (i + 1) as f64));
            let f = FourierField::from_cosines(n, &cos).unwrap();
            let r = v_rhs(&f).unwrap();
            let oracle = rhs_oracle(&cos, 12);
            for (i, o) in oracle.iter().enumerate() {
                let k = i as i64 - 12;
                prop_assert!((r.coeff(k) - o).norm() <= 1e-11, "k={} {} vs {}", k, r.coeff(k), o);
            }
            prop_assert_eq!(r.parity(), crate::spectral::Parity::EvenReal);
        }

        #[test]
        fn noise_is_deterministic_and_antisymmetric(seed in any::<u64>()) {
            let f = initial_field(&ModelParams::new(1.0, 0.1).with_modes(16));
            let a = seed_imaginary_noise(&f, 1e-16, seed);
            let b = seed_imaginary_noise(&f, 1e-16, seed);
            let m = seed_imaginary_noise(&f, -1e-16, seed);
            prop_assert_eq!(&a, &b);
            prop_assert_eq!(m, a.conjugate_function());
            prop_assert!(a.max_abs_imag() <= 1e-16);
        }
    }

    #[test]
    fn noise_amplitude_zero_is_identity() {
        let f = initial_field(&ModelParams::new(1.0, 0.1).with_modes(16));
        assert_eq!(seed_imaginary_noise(&f, 0.0, 7), f);
        let g = seed_imaginary_noise(&f, 1e-16, 7);
        assert_eq!(g.parity(), crate::spectral::Parity::EvenReal);
        let g = seed_imaginary_noise(&f, 1e-12, 7);
        assert_eq!(g.parity(), crate::spectral::Parity::GeneralComplex);
    }

    #[test]
    fn u_reconstruction() {
        let (u, a) = u_from_v(&FourierField::constant(16, 0.5), 1e-13).unwrap();
        assert!(u.values().iter().all(|v| (v - c(2.0)).norm() < 1e-15));
        assert_abs_diff_eq!(a.coeff(0).re, 2.0, epsilon = 1e-15);

        let f = initial_field(&ModelParams::new(1.0, 0.01));
        let (_, a) = u_from_v(&f, 1e-13).unwrap();
        for k in 0..6 {
            let want = asymptotics::initial_u_coeff(k, 1.0, 0.01);
            assert_abs_diff_eq!(a.coeff(k).re, want, epsilon = 1e-15);
            assert_eq!(a.coeff(k), a.coeff(-k).conj());
            assert!(a.coeff(k).im.abs() < 1e-17);
        }
        assert_abs_diff_eq!(a.coeff(1).re, 0.005, epsilon = 1e-6);
    }

    #[test]
    fn flatness_examples() {
        let f = flatness(&FourierField::constant(16, 0.5)).unwrap();
        assert_eq!(f.pointwise, 0.0);
        assert!(f.from_coeffs.abs() < 1e-15);
        let f = flatness(&initial_field(&ModelParams::new(1.0, 0.01))).unwrap();
        let exact = 2.0 * 0.01 / (1.0 - 1e-4);
        assert_abs_diff_eq!(f.pointwise, exact, epsilon = 1e-15);
        assert_abs_diff_eq!(f.from_coeffs, exact, epsilon = 1e-13);
    }

    #[test]
    fn flat_solution_blows_up_at_alpha() {
        let p = ModelParams::new(0.25, 0.0).with_modes(16);
        let (_, r) = solve_to_blowup(&p).unwrap();
        assert_abs_diff_eq!(r.t_c, 0.25, epsilon = 1e-12);
    }

    #[test]
    fn blowup_report_small_case() {
        let p = ModelParams::new(1.0, 0.1).with_modes(64).with_store(StoreMode::Endpoints);
        let (tr, r) = solve_to_blowup(&p).unwrap();
        assert!(r.t_c < 1.0 && r.t_c > 0.9);
        assert!(r.state_at_tc.sum().re.abs() <= 1e-12);
        assert_eq!(tr.len(), 2);
        assert_abs_diff_eq!(r.delta_hat, r.t_hat - r.t_c, epsilon = 0.0);
    }

    #[test]
    fn complex_path_without_singularity_matches_real_run() {
        let p = ModelParams::new(1.0, 0.0).with_modes(16);
        let res = continue_complex_path(&p, 0.5, 0.1, 0.8, true, &[]).unwrap();
        let (_, end) = res.snapshots.last().unwrap();
        assert!((end.coeff(0) - c(0.2)).norm() <= 1e-10);
        assert!(end.max_abs_imag() <= 1e-10);
    }
}
