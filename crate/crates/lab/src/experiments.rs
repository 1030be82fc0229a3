//! Data products behind each CLI command, kept free of I/O so the
//! acceptance suite can call them directly.

use std::f64::consts::PI;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use blowup_core::asymptotics::{self, AsymptoticConstants, DEFAULT_QUAD_TOL};
use blowup_core::integrator::StoreMode;
use blowup_core::pde::{
    continue_complex_path, continue_past_blowup, default_path_radius, flatness, solve_to_blowup, u_from_v,
    BlowupReport, ContinuationOptions, ContinuationResult, ModelParams,
};
use blowup_core::singularity::{
    build_track, default_shift, track_at, track_shifted, SingularityTrack, TrackOptions,
};
use blowup_core::spectral::{node, DEFAULT_DIVISION_FLOOR};
use blowup_core::{FourierField, Result};
use serde::Serialize;

pub const TABLE1_ALPHAS: [f64; 3] = [0.25, 1.0, 4.0];
pub const TABLE1_EPSILONS: [f64; 3] = [0.1, 0.01, 0.001];

/// Runs `f` over `items` on up to `jobs` scoped threads, preserving order.
pub fn par_map<T: Sync, R: Send>(items: &[T], jobs: usize, f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let jobs = jobs.clamp(1, items.len().max(1));
    if jobs == 1 {
        return items.iter().map(f).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<R>>> = Mutex::new(items.iter().map(|_| None).collect());
    std::thread::scope(|s| {
        for _ in 0..jobs {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= items.len() {
                    break;
                }
                let r = f(&items[i]);
                slots.lock().expect("worker panicked")[i] = Some(r);
            });
        }
    });
    slots.into_inner().expect("worker panicked").into_iter().map(|r| r.expect("every slot filled")).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct Table1Row {
    pub alpha: f64,
    pub epsilon: f64,
    pub t_c: f64,
    pub d_prime: Option<f64>,
    pub d_hat: f64,
    pub d_tilde: f64,
    pub error: Option<String>,
}

pub fn table1_cell(base: &ModelParams, alpha: f64, epsilon: f64) -> Table1Row {
    let p = ModelParams { alpha, epsilon, ..*base }.with_store(StoreMode::Endpoints);
    match solve_to_blowup(&p) {
        Ok((_, r)) => Table1Row {
            alpha,
            epsilon,
            t_c: r.t_c,
            d_prime: r.delta_prime,
            d_hat: r.delta_hat,
            d_tilde: r.delta_tilde,
            error: r.delta_prime.is_none().then(|| "two-mode system did not reach its fold".to_string()),
        },
        Err(e) => Table1Row {
            alpha,
            epsilon,
            t_c: f64::NAN,
            d_prime: None,
            d_hat: f64::NAN,
            d_tilde: f64::NAN,
            error: Some(e.to_string()),
        },
    }
}

pub fn table1(base: &ModelParams, jobs: usize) -> Vec<Table1Row> {
    let cells: Vec<(f64, f64)> =
        TABLE1_ALPHAS.iter().flat_map(|&a| TABLE1_EPSILONS.iter().map(move |&e| (a, e))).collect();
    par_map(&cells, jobs, |&(a, e)| table1_cell(base, a, e))
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ErrorRow {
    pub k: usize,
    pub t: f64,
    pub err_first_order: f64,
    pub err_second_scale: f64,
}

fn max_rel(values: &[f64], xs: &[f64], approx: impl Fn(f64) -> Option<f64>) -> f64 {
    xs.iter().zip(values).fold(0.0, |m, (&x, &v)| match approx(x) {
        Some(a) => m.max(((a - v) / v).abs()),
        None => f64::NAN,
    })
}

/// Max relative error over the collocation grid of the first-order and
/// second-timescale approximations, at every accepted step.
pub fn error_curves(params: &ModelParams) -> Result<(BlowupReport, Vec<ErrorRow>)> {
    let p = params.with_store(StoreMode::All);
    let (tr, report) = solve_to_blowup(&p)?;
    let k = asymptotics::constants(p.alpha, DEFAULT_QUAD_TOL)?;
    let m = 4 * p.n_modes;
    let xs: Vec<f64> = (0..m).map(|j| node(j, m)).collect();
    let (a, e, t_c) = (p.alpha, p.epsilon, report.t_c);
    let mut rows = Vec::with_capacity(tr.len());
    for (i, (&t, s)) in tr.times.iter().zip(&tr.states).enumerate() {
        let v: Vec<f64> = FourierField::new(p.n_modes, s.clone())?.synthesize(m)?.values().iter().map(|z| z.re).collect();
        rows.push(ErrorRow {
            k: i,
            t,
            err_first_order: max_rel(&v, &xs, |x| Some(asymptotics::perturbation_v(x, t, a, e))),
            err_second_scale: max_rel(&v, &xs, |x| asymptotics::v_timescale2(x, t, a, e, t_c, &k).ok()),
        });
    }
    Ok((report, rows))
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ProfileRow {
    pub x: f64,
    pub v: f64,
    pub global: Option<f64>,
    pub local: Option<f64>,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct CoeffRow {
    pub k: usize,
    pub abs_c: f64,
    pub law_global: Option<f64>,
    pub law_local: Option<f64>,
}

/// Positive half of the profile: a uniform lattice on `[0.01, π]` followed
/// by a logarithmic one from `1e-7` to `1e-2`. Below about `1e-5` the solver
/// values are dominated by roundoff in the summation.
pub fn profile_lattice() -> Vec<f64> {
    let mut xs: Vec<f64> = (0..=50).map(|i| 10f64.powf(-7.0 + 5.0 * i as f64 / 50.0)).collect();
    xs.extend((1..=400).map(|i| 0.01 + (PI - 0.01) * i as f64 / 400.0));
    xs
}

pub fn profile_rows(state: &FourierField, p: &ModelParams, k: &AsymptoticConstants, xs: &[f64]) -> Vec<ProfileRow> {
    xs.iter()
        .map(|&x| ProfileRow {
            x,
            v: state.value_at(x).re,
            global: asymptotics::blowup_profile_global(x, p.alpha, p.epsilon, k).ok(),
            local: asymptotics::blowup_profile_local(x, p.alpha, p.epsilon).ok(),
        })
        .collect()
}

pub fn coefficient_rows(state: &FourierField, p: &ModelParams) -> Vec<CoeffRow> {
    (0..=state.n_modes())
        .map(|k| CoeffRow {
            k,
            abs_c: state.coeff(k as i64).norm(),
            law_global: asymptotics::coeff_decay_global(k as f64, p.alpha, p.epsilon).ok(),
            law_local: asymptotics::coeff_decay_local(k as f64).ok(),
        })
        .collect()
}

pub fn blowup_profile(params: &ModelParams) -> Result<(BlowupReport, Vec<ProfileRow>, Vec<CoeffRow>)> {
    let p = params.with_store(StoreMode::Endpoints);
    let (_, report) = solve_to_blowup(&p)?;
    let k = asymptotics::constants(p.alpha, DEFAULT_QUAD_TOL)?;
    let rows = profile_rows(&report.state_at_tc, &p, &k, &profile_lattice());
    let coeffs = coefficient_rows(&report.state_at_tc, &p);
    Ok((report, rows, coeffs))
}

/// Log-log least-squares slope of `|c_k|` over `k_lo..=k_hi`.
pub fn decay_slope(rows: &[CoeffRow], k_lo: usize, k_hi: usize) -> f64 {
    let (xs, ys): (Vec<f64>, Vec<f64>) = rows
        .iter()
        .filter(|r| r.k >= k_lo && r.k <= k_hi && r.abs_c > 0.0)
        .map(|r| ((r.k as f64).ln(), r.abs_c.ln()))
        .unzip();
    blowup_core::singularity::linear_fit(&xs, &ys).0
}

pub struct SingularityReport {
    pub t_c: f64,
    /// Real-line estimates: coarse over `[0, t_c)` and refined towards `t_c`.
    pub track: SingularityTrack,
    /// Fit estimates from the complex-shifted frame.
    pub shifted: SingularityTrack,
    pub shift: f64,
}

/// Sample times `t_c - s` for `s` log-spaced in `[s_min, s_max]`, ascending in `t`.
pub fn approach_times(t_c: f64, s_min: f64, s_max: f64, n: usize) -> Vec<f64> {
    let (a, b) = (s_max.ln(), s_min.ln());
    (0..n).map(|i| t_c - (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}

pub fn singularity(params: &ModelParams) -> Result<SingularityReport> {
    let p = params.with_store(StoreMode::Endpoints);
    let (_, report) = solve_to_blowup(&p)?;
    let t_c = report.t_c;
    let s_max = (20.0 * p.epsilon).min(0.5 * t_c);
    let mut times: Vec<f64> = (0..100).map(|i| (t_c - s_max) * i as f64 / 100.0).collect();
    times.extend(approach_times(t_c, 1e-7, s_max, 160));
    let track = track_at(&p, &times, &TrackOptions::default());
    let shift = default_shift(p.alpha, p.epsilon);
    let coarse: Vec<f64> = (0..200).map(|i| t_c * i as f64 / 200.0).collect();
    let shifted = track_shifted(&p, shift, &coarse, 1.0);
    Ok(SingularityReport { t_c, track, shifted, shift })
}

/// Track over the stored steps of a full solve.
pub fn singularity_on_steps(params: &ModelParams, stride: usize) -> Result<SingularityTrack> {
    let (tr, _) = solve_to_blowup(&params.with_store(StoreMode::Stride(stride)))?;
    Ok(build_track(&tr, &TrackOptions::default()))
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct FlatnessRow {
    pub t: f64,
    pub f: f64,
    pub f_approx: Option<f64>,
    pub rel_err: Option<f64>,
}

pub fn flatness_series(params: &ModelParams, stride: usize) -> Result<(BlowupReport, Vec<FlatnessRow>)> {
    let (tr, report) = solve_to_blowup(&params.with_store(StoreMode::Stride(stride)))?;
    let mut rows = Vec::new();
    for (&t, s) in tr.times.iter().zip(&tr.states) {
        let Ok(fl) = flatness(&FourierField::new(params.n_modes, s.clone())?) else { continue };
        let approx = asymptotics::flatness_approx(t, params.alpha, params.epsilon).ok();
        rows.push(FlatnessRow { t, f: fl.pointwise, f_approx: approx, rel_err: approx.map(|a| (fl.pointwise - a).abs() / a) });
    }
    Ok((report, rows))
}

/// Default continuation snapshot times as multiples of `t_c`.
pub const SNAPSHOT_FACTORS: [f64; 7] = [0.0, 0.5, 1.0, 1.25, 1.5, 2.0, 3.0];

#[derive(Debug, Clone, Serialize)]
pub struct ContinuationSummary {
    pub t_c: f64,
    pub seed: u64,
    pub amplitude: f64,
    pub branch_sign: i8,
    pub max_imag_before_tc: f64,
    pub max_imag_at_1_25_tc: f64,
    pub u_pi_at_1_5_tc: f64,
    pub u_pi_peak: f64,
    pub t_u_pi_peak: f64,
    pub t_end: f64,
    /// `max_x |u + 1/t|·t` at `t_end`.
    pub deviation_at_end: f64,
    pub path_radius: Option<f64>,
    /// Distance at `3 t_c` between the upper-path solution and the nearer noise branch.
    pub path_vs_noise_at_3tc: Option<f64>,
}

pub struct ContinuationReport {
    pub summary: ContinuationSummary,
    pub noise: ContinuationResult,
    pub path: Option<ContinuationResult>,
}

fn u_pi(v: &FourierField) -> f64 {
    1.0 / v.alternating_sum().norm()
}

/// Noise-seeded continuation to `t_end`, recording [`SNAPSHOT_FACTORS`], `extra`
/// times and a fine lattice on `[1.5 t_c, 3 t_c]`; optionally also the upper
/// complex-time detour.
pub fn continuation(params: &ModelParams, t_end: f64, seed: u64, amplitude: f64, extra: &[f64], path: bool) -> Result<ContinuationReport> {
    let (_, report) = solve_to_blowup(&params.with_store(StoreMode::Endpoints))?;
    let t_c = report.t_c;
    let mut times: Vec<f64> = SNAPSHOT_FACTORS.iter().map(|f| f * t_c).filter(|&t| t > 0.0).collect();
    times.extend((0..=300).map(|i| t_c * (1.5 + 1.5 * i as f64 / 300.0)));
    times.extend_from_slice(extra);
    let mut opts = ContinuationOptions::new(t_end, seed);
    opts.amplitude = amplitude;
    opts.output_times = times;
    let noise = continue_past_blowup(&params.with_store(StoreMode::Endpoints), &opts)?;

    let before = noise.snapshots.iter().filter(|(t, _)| *t < t_c).fold(0.0f64, |m, (_, f)| m.max(f.max_abs_imag()));
    let at = |t: f64| noise.snapshot_at(t).expect("scheduled snapshot");
    let (t_peak, peak) = noise
        .snapshots
        .iter()
        .filter(|(t, _)| *t >= 1.5 * t_c && *t <= 3.0 * t_c)
        .map(|(t, f)| (*t, u_pi(f)))
        .fold((f64::NAN, 0.0), |best, cur| if cur.1 > best.1 { cur } else { best });
    let end = at(t_end);
    let (grid, _) = u_from_v(end, 0.0)?;
    let deviation = grid.values().iter().fold(0.0f64, |m, u| m.max((u + 1.0 / t_end).norm())) * t_end;

    let (path_res, radius, dist) = if path && t_end > 3.0 * t_c {
        let r = default_path_radius(params.epsilon, t_c);
        let res = continue_complex_path(&params.with_store(StoreMode::Endpoints), t_c, r, 3.0 * t_c, true, &[2.0 * t_c])?;
        let z = res.snapshot_at(3.0 * t_c).expect("path end");
        let here = at(3.0 * t_c);
        let d = z.max_distance(here).min(z.max_distance(&here.conjugate_function()));
        (Some(res), Some(r), Some(d))
    } else {
        (None, None, None)
    };

    let summary = ContinuationSummary {
        t_c,
        seed,
        amplitude,
        branch_sign: noise.branch_sign,
        max_imag_before_tc: before,
        max_imag_at_1_25_tc: at(1.25 * t_c).max_abs_imag(),
        u_pi_at_1_5_tc: u_pi(at(1.5 * t_c)),
        u_pi_peak: peak,
        t_u_pi_peak: t_peak,
        t_end,
        deviation_at_end: deviation,
        path_radius: radius,
        path_vs_noise_at_3tc: dist,
    };
    Ok(ContinuationReport { summary, noise, path: path_res })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SnapshotRow {
    pub t: f64,
    pub k: usize,
    pub abs_c: f64,
    pub law_local: Option<f64>,
}

/// `|c_k|` shortly before, at and shortly after `t_c` (the latter from the
/// noise-seeded continuation).
pub fn fourier_snapshots(params: &ModelParams, seed: u64, offset: f64) -> Result<(f64, Vec<SnapshotRow>)> {
    let (_, report) = solve_to_blowup(&params.with_store(StoreMode::Endpoints))?;
    let t_c = report.t_c;
    let (before, after) = (t_c * (1.0 - offset), t_c * (1.0 + offset));
    let mut opts = ContinuationOptions::new(after, seed);
    opts.output_times = vec![before];
    let cont = continue_past_blowup(&params.with_store(StoreMode::Endpoints), &opts)?;
    let mut rows = Vec::new();
    let mut push = |t: f64, f: &FourierField, overlay: bool| {
        for k in 0..=f.n_modes() {
            let law_local = if overlay { asymptotics::coeff_decay_local(k as f64).ok() } else { None };
            rows.push(SnapshotRow { t, k, abs_c: f.coeff(k as i64).norm(), law_local });
        }
    };
    push(before, cont.snapshot_at(before).expect("scheduled"), false);
    push(t_c, &report.state_at_tc, true);
    push(after, cont.snapshot_at(after).expect("scheduled"), false);
    Ok((t_c, rows))
}

/// `u = 1/v` on the padded grid as `(x, Re u, Im u)`.
pub fn u_samples(v: &FourierField) -> Result<Vec<(f64, f64, f64)>> {
    let (grid, _) = u_from_v(v, DEFAULT_DIVISION_FLOOR * 1e-3)?;
    Ok(grid.points().into_iter().zip(grid.values()).map(|(x, u)| (x, u.re, u.im)).collect())
}
