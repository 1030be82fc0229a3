//! Estimates of the complex singularity `x = iy` nearest the real axis.
//!
//! Two estimators: a log-linear fit to the decay of the coefficients of
//! `u = 1/v`, and a direct root search for `v(iy) = 0`.

use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::asymptotics::{singularity_y, Regime};
use crate::error::{Error, Result};
use crate::integrator::Trajectory;
use crate::pde::{initial_field, sample_until_failure, u_from_v, ModelParams};
use crate::spectral::{FourierField, DEFAULT_DIVISION_FLOOR};

/// Coefficients below `ROUNDOFF_FACTOR · ε_mach · max|c_k|` are treated as noise.
pub const ROUNDOFF_FACTOR: f64 = 100.0;
pub const MIN_USABLE_MODES: usize = 8;
/// Modes kept clear at the top of the spectrum: a fit is only reported
/// when the coefficients reach the noise floor below `N - TAIL_MARGIN`.
pub const TAIL_MARGIN: usize = 8;
/// Lowest mode used by fits in a shifted frame.
pub const SHIFTED_K_LO: usize = 4;

fn noise_floor(f: &FourierField) -> f64 {
    let peak = f.coeffs().iter().fold(0.0f64, |m, c| m.max(c.norm()));
    ROUNDOFF_FACTOR * f64::EPSILON * peak
}

/// Magnitude of mode `k >= 0`, averaged over `±k`.
fn mode_abs(f: &FourierField, k: usize) -> f64 {
    let k = k as i64;
    0.5 * (f.coeff(k).norm() + f.coeff(-k).norm())
}

/// Last mode before the coefficients first drop under the noise floor.
pub fn k_floor(f: &FourierField) -> usize {
    let floor = noise_floor(f);
    (1..=f.n_modes()).take_while(|&k| mode_abs(f, k) > floor).last().unwrap_or(0)
}

/// Default window `[max(8, N/8), min(N - 8, k_floor)]`.
pub fn default_k_range(f: &FourierField) -> (usize, usize) {
    let n = f.n_modes();
    (8.max(n / 8), n.saturating_sub(8).min(k_floor(f)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StripFit {
    pub y: f64,
    pub prefactor: f64,
    pub exponent: f64,
    /// RMS residual of `log|a_k|`.
    pub residual: f64,
    pub k_lo: usize,
    pub k_hi: usize,
}

fn usable_modes(f: &FourierField, k_range: Option<(usize, usize)>, floor: f64) -> Result<Vec<(f64, f64)>> {
    let (lo, hi) = k_range.unwrap_or_else(|| default_k_range(f));
    let pts: Vec<(f64, f64)> = (lo.max(1)..=hi.min(f.n_modes()))
        .map(|k| (k as f64, mode_abs(f, k)))
        .filter(|&(_, a)| a > floor)
        .map(|(k, a)| (k, a.ln()))
        .collect();
    if pts.len() < MIN_USABLE_MODES {
        return Err(Error::FitWindowTooShort { usable: pts.len(), needed: MIN_USABLE_MODES });
    }
    Ok(pts)
}

fn rms(r: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = r.fold((0.0, 0usize), |(s, n), x| (s + x * x, n + 1));
    (s / n as f64).sqrt()
}

/// Fits `log|a_k| = log C + p log k - k y` with `p` fixed, skipping modes
/// under the roundoff floor.
pub fn fit_strip_width(u: &FourierField, k_range: Option<(usize, usize)>, exponent: f64) -> Result<StripFit> {
    fit_strip_width_above(u, k_range, exponent, noise_floor(u))
}

/// As [`fit_strip_width`] with an explicit magnitude floor; `0` keeps every
/// nonzero mode (for exactly known coefficients).
pub fn fit_strip_width_above(
    u: &FourierField,
    k_range: Option<(usize, usize)>,
    exponent: f64,
    floor: f64,
) -> Result<StripFit> {
    let pts = usable_modes(u, k_range, floor)?;
    let z: Vec<(f64, f64)> = pts.iter().map(|&(k, l)| (k, l - exponent * k.ln())).collect();
    let n = z.len() as f64;
    let (mk, mz) = z.iter().fold((0.0, 0.0), |(a, b), &(k, l)| (a + k / n, b + l / n));
    let (sxy, sxx) = z.iter().fold((0.0, 0.0), |(a, b), &(k, l)| (a + (k - mk) * (l - mz), b + (k - mk).powi(2)));
    let slope = sxy / sxx;
    let icpt = mz - slope * mk;
    let residual = rms(z.iter().map(|&(k, l)| l - icpt - slope * k));
    Ok(StripFit {
        y: -slope,
        prefactor: icpt.exp(),
        exponent,
        residual,
        k_lo: pts[0].0 as usize,
        k_hi: pts[pts.len() - 1].0 as usize,
    })
}

/// Three-parameter fit with free algebraic exponent; diagnostic only.
pub fn fit_strip_width_free(u: &FourierField, k_range: Option<(usize, usize)>) -> Result<StripFit> {
    let pts = usable_modes(u, k_range, noise_floor(u))?;
    let mut ata = [[0.0; 3]; 3];
    let mut atb = [0.0; 3];
    for &(k, l) in &pts {
        let row = [1.0, k.ln(), -k];
        for i in 0..3 {
            atb[i] += row[i] * l;
            for j in 0..3 {
                ata[i][j] += row[i] * row[j];
            }
        }
    }
    let [c, p, y] = solve3(ata, atb).ok_or_else(|| Error::FitOutOfRange("singular normal equations".into()))?;
    let residual = rms(pts.iter().map(|&(k, l)| l - c - p * k.ln() + y * k));
    Ok(StripFit {
        y,
        prefactor: c.exp(),
        exponent: p,
        residual,
        k_lo: pts[0].0 as usize,
        k_hi: pts[pts.len() - 1].0 as usize,
    })
}

fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..3 {
            let f = a[r][col] / a[col][col];
            for c in col..3 {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for r in (0..3).rev() {
        let s: f64 = (r + 1..3).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

/// Copy of `v` with modes past the noise floor removed, so that evaluation
/// off the real axis is not swamped by amplified roundoff.
pub fn denoised(v: &FourierField) -> FourierField {
    let kf = k_floor(v) as i64;
    let n = v.n_modes() as i64;
    let coeffs = (-n..=n).map(|k| if k.abs() <= kf { v.coeff(k) } else { Complex64::new(0.0, 0.0) }).collect();
    FourierField::from_parts_unchecked(v.n_modes(), coeffs)
}

fn re_v_iy(v: &FourierField, y: f64) -> Result<f64> {
    Ok(v.eval_at(Complex64::new(0.0, y))?.re)
}

/// Root of `Re v(iy)` in `bracket`, bisection then secant to 1e-10.
pub fn root_on_axis(v: &FourierField, bracket: (f64, f64)) -> Result<f64> {
    let (mut lo, mut hi) = bracket;
    let (mut flo, fhi) = (re_v_iy(v, lo)?, re_v_iy(v, hi)?);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::NoSignChange { lo, hi });
    }
    while hi - lo > 1e-6 * hi.max(1e-3) {
        let mid = 0.5 * (lo + hi);
        let fm = re_v_iy(v, mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (re_v_iy(v, a)?, re_v_iy(v, b)?);
    for _ in 0..50 {
        if (b - a).abs() <= 1e-10 || fb == fa {
            break;
        }
        let c = b - fb * (b - a) / (fb - fa);
        if !(c >= lo && c <= hi) {
            break;
        }
        a = b;
        fa = fb;
        b = c;
        fb = re_v_iy(v, b)?;
    }
    Ok(b)
}

/// First sign change of `Re v(iy)` on `(0, y_max]`, refined with [`root_on_axis`].
pub fn first_root_on_axis(v: &FourierField, y_max: f64) -> Result<f64> {
    let v = denoised(v);
    let top = k_floor(&v).max(1) as f64;
    let y_max = y_max.min(690.0 / top);
    let f0 = re_v_iy(&v, 0.0)?;
    let n_scan = 600;
    let y_min = 1e-4f64.min(y_max / n_scan as f64);
    let ratio = (y_max / y_min).powf(1.0 / (n_scan - 1) as f64);
    let mut prev = 0.0;
    let mut y = y_min;
    for _ in 0..n_scan {
        let f = re_v_iy(&v, y)?;
        if f == 0.0 || f.signum() != f0.signum() {
            return root_on_axis(&v, (prev, y));
        }
        prev = y;
        y *= ratio;
    }
    Err(Error::NoSignChange { lo: 0.0, hi: y_max })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrackMethod {
    Fit,
    Root,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackOptions {
    pub method: TrackMethod,
    pub stride: usize,
    pub k_range: Option<(usize, usize)>,
    pub exponent: f64,
    pub y_max: f64,
}

impl Default for TrackOptions {
    fn default() -> Self {
        Self { method: TrackMethod::Both, stride: 1, k_range: None, exponent: 1.0, y_max: 20.0 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SingularityTrack {
    pub times: Vec<f64>,
    pub y_fit: Vec<Option<f64>>,
    pub y_root: Vec<Option<f64>>,
    pub fit_quality: Vec<Option<f64>>,
    /// `|y_lower - y_upper|` between fits on the two halves of the window.
    pub window_spread: Vec<Option<f64>>,
}

impl SingularityTrack {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn usable(&self, i: usize) -> bool {
        self.y_fit[i].is_some() || self.y_root[i].is_some()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t,y_fit,y_root,residual,window_spread,usable")?;
        let s = |v: Option<f64>| v.map_or_else(|| "NaN".to_string(), |x| format!("{x:.12e}"));
        for i in 0..self.len() {
            writeln!(
                w,
                "{:.12e},{},{},{},{},{}",
                self.times[i],
                s(self.y_fit[i]),
                s(self.y_root[i]),
                s(self.fit_quality[i]),
                s(self.window_spread[i]),
                u8::from(self.usable(i))
            )?;
        }
        Ok(())
    }

    /// Track joined with every asymptotic regime; columns that do not apply
    /// at a time are `NaN`.
    pub fn write_overlay_csv<W: Write>(&self, mut w: W, t_c: f64, alpha: f64, epsilon: f64) -> std::io::Result<()> {
        write!(w, "t,y_fit,y_root")?;
        for r in Regime::ALL {
            write!(w, ",{}", r.name())?;
        }
        writeln!(w)?;
        let s = |v: Option<f64>| v.map_or_else(|| "NaN".to_string(), |x| format!("{x:.12e}"));
        for i in 0..self.len() {
            let t = self.times[i];
            write!(w, "{t:.12e},{},{}", s(self.y_fit[i]), s(self.y_root[i]))?;
            for r in Regime::ALL {
                write!(w, ",{}", s(singularity_y(r, t, Some(t_c), alpha, epsilon).ok()))?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

fn check_resolved(u: &FourierField) -> Result<()> {
    let n = u.n_modes();
    let kf = k_floor(u);
    if kf + TAIL_MARGIN > n {
        return Err(Error::FitOutOfRange(format!("coefficients above the noise floor up to k = {kf} of {n}")));
    }
    Ok(())
}

/// Fit estimate subject to the resolution checks, with the window spread.
pub fn fit_estimate(v: &FourierField, opts: &TrackOptions) -> Result<(StripFit, Option<f64>)> {
    let (_, u) = u_from_v(v, DEFAULT_DIVISION_FLOOR)?;
    check_resolved(&u)?;
    let fit = fit_strip_width(&u, opts.k_range, opts.exponent)?;
    let mid = (fit.k_lo + fit.k_hi) / 2;
    let spread = match (
        fit_strip_width(&u, Some((fit.k_lo, mid)), opts.exponent),
        fit_strip_width(&u, Some((mid, fit.k_hi)), opts.exponent),
    ) {
        (Ok(a), Ok(b)) => Some((a.y - b.y).abs()),
        _ => None,
    };
    Ok((fit, spread))
}

pub fn build_track(tr: &Trajectory, opts: &TrackOptions) -> SingularityTrack {
    let mut track = SingularityTrack::default();
    for (t, state) in tr.times.iter().zip(&tr.states).step_by(opts.stride.max(1)) {
        let n = (state.len() - 1) / 2;
        let field = FourierField::from_parts_unchecked(n, state.clone());
        track.times.push(*t);
        let fit = match opts.method {
            TrackMethod::Root => None,
            _ => fit_estimate(&field, opts).ok(),
        };
        let root = match opts.method {
            TrackMethod::Fit => None,
            _ => first_root_on_axis(&field, opts.y_max).ok(),
        };
        track.y_fit.push(fit.map(|(f, _)| f.y));
        track.fit_quality.push(fit.map(|(f, _)| f.residual));
        track.window_spread.push(fit.and_then(|(_, s)| s));
        track.y_root.push(root);
    }
    track
}

/// `v(ξ + i·shift)` as a function of real `ξ`: `c_k → c_k e^{-k·shift}`.
///
/// The equation is invariant under complex translation of `x`, so the
/// shifted field evolves under the same right-hand side as long as no
/// singularity crosses the line `Im x = shift`. Structure far up the
/// imaginary axis, which is below roundoff in the real-line coefficients,
/// is then resolved directly.
pub fn shift_up(v: &FourierField, shift: f64) -> FourierField {
    let n = v.n_modes() as i64;
    // exact zeros stay zero; e^{kL} alone overflows for large |k|
    let coeffs = (-n..=n)
        .map(|k| {
            let c = v.coeff(k);
            if c == Complex64::new(0.0, 0.0) { c } else { c * (-(k as f64) * shift).exp() }
        })
        .collect();
    FourierField::from_parts_unchecked(v.n_modes(), coeffs)
}

/// Shift that places the `t = 0` singularity of `α - ε cos x` roughly 0.7
/// above the line.
pub fn default_shift(alpha: f64, epsilon: f64) -> f64 {
    (alpha / epsilon).ln()
}

/// Strip-width estimate from a field given on the line `Im x = shift`;
/// returns the fit with `y` measured from the real axis.
pub fn fit_shifted(v_shifted: &FourierField, shift: f64, exponent: f64) -> Result<StripFit> {
    let (_, u) = u_from_v(v_shifted, DEFAULT_DIVISION_FLOOR)?;
    check_resolved(&u)?;
    let hi = k_floor(&u).min(u.n_modes() - TAIL_MARGIN);
    let mut fit = fit_strip_width(&u, Some((SHIFTED_K_LO, hi)), exponent)?;
    fit.y += shift;
    Ok(fit)
}

/// Fit track computed in the frame shifted by `shift`, sampled at `times`.
/// Sampling stops once the shifted integration fails, typically when the
/// singularity reaches the line.
pub fn track_shifted(params: &ModelParams, shift: f64, times: &[f64], exponent: f64) -> SingularityTrack {
    let init = shift_up(&initial_field(params), shift);
    let (samples, _) = sample_until_failure(params, &init, times);
    let mut track = SingularityTrack::default();
    for (t, v) in samples {
        let fit = fit_shifted(&v, shift, exponent).ok();
        track.times.push(t);
        track.y_fit.push(fit.map(|f| f.y));
        track.fit_quality.push(fit.map(|f| f.residual));
        track.window_spread.push(None);
        track.y_root.push(None);
    }
    track
}

/// Real-line track at `times`, sampled by piecewise integration.
pub fn track_at(params: &ModelParams, times: &[f64], opts: &TrackOptions) -> SingularityTrack {
    let (samples, _) = sample_until_failure(params, &initial_field(params), times);
    let mut tr = Trajectory::default();
    for (t, v) in samples {
        tr.times.push(t);
        tr.points.push(v.sum());
        tr.states.push(v.into_coeffs());
    }
    build_track(&tr, opts)
}

/// Least-squares slope and intercept of `ys` against `xs`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Slope of `y²` against `(t_c - t) log(1/(t_c - t))` over samples with
/// `t_c - t` in `[s_lo, s_hi]`.
pub fn impingement_slope(times: &[f64], ys: &[Option<f64>], t_c: f64, s_lo: f64, s_hi: f64) -> Option<(f64, usize)> {
    let (xs, y2): (Vec<f64>, Vec<f64>) = times
        .iter()
        .zip(ys)
        .filter_map(|(&t, y)| {
            let s = t_c - t;
            (s >= s_lo && s <= s_hi).then_some(())?;
            let y = (*y)?;
            Some((s * (1.0 / s).ln(), y * y))
        })
        .unzip();
    (xs.len() >= 2).then(|| (linear_fit(&xs, &y2).0, xs.len()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asymptotics::initial_u_coeff;
    use crate::integrator::StoreMode;
    use crate::pde::solve_to_blowup;
    use approx::assert_abs_diff_eq;

    fn from_modes(n: usize, a: impl Fn(usize) -> f64) -> FourierField {
        let cos: Vec<f64> = (0..=n).map(|k| if k == 0 { a(0) } else { 2.0 * a(k) }).collect();
        FourierField::from_cosines(n, &cos).unwrap()
    }

    #[test]
    fn synthetic_second_order_pole() {
        let f = from_modes(64, |k| 3.0 * k as f64 * (-0.7 * k as f64).exp());
        let fit = fit_strip_width(&f, Some((8, 40)), 1.0).unwrap();
        assert_abs_diff_eq!(fit.y, 0.7, epsilon = 1e-10);
        assert_abs_diff_eq!(fit.prefactor, 3.0, epsilon = 1e-9);
        assert!(fit.residual <= 1e-10);

        let free = fit_strip_width_free(&f, Some((8, 40))).unwrap();
        assert_abs_diff_eq!(free.exponent, 1.0, epsilon = 1e-8);
        assert_abs_diff_eq!(free.y, 0.7, epsilon = 1e-9);
    }

    #[test]
    fn initial_pole_fit_matches_closed_form() {
        let (alpha, eps) = (1.0, 0.1);
        let u = from_modes(64, |k| initial_u_coeff(k as i64, alpha, eps));
        let fit = fit_strip_width_above(&u, Some((10, 40)), 0.0, 0.0).unwrap();
        let want = (alpha / eps).acosh();
        assert!((fit.y / want - 1.0).abs() < 0.02, "{} vs {want}", fit.y);
    }

    #[test]
    fn fit_rejects_short_windows() {
        let f = from_modes(16, |k| (-0.5 * k as f64).exp());
        assert!(matches!(fit_strip_width(&f, Some((3, 7)), 1.0), Err(Error::FitWindowTooShort { usable: 5, .. })));
        let steep = from_modes(64, |k| (-6.0 * k as f64).exp());
        assert!(fit_strip_width(&steep, None, 1.0).is_err());
    }

    #[test]
    fn root_of_two_mode_field() {
        for (a, e) in [(1.0, 0.1), (1.0, 0.001), (0.25, 0.1)] {
            let v = initial_field(&ModelParams::new(a, e));
            let want = (a / e).acosh();
            assert_abs_diff_eq!(first_root_on_axis(&v, 20.0).unwrap(), want, epsilon = 1e-10);
            assert_abs_diff_eq!(root_on_axis(&v, (0.5 * want, 2.0 * want)).unwrap(), want, epsilon = 1e-10);
        }
    }

    #[test]
    fn no_root_for_flat_field() {
        let v = FourierField::constant(32, 0.5);
        assert!(matches!(first_root_on_axis(&v, 20.0), Err(Error::NoSignChange { .. })));
        assert!(matches!(root_on_axis(&v, (0.1, 1.0)), Err(Error::NoSignChange { .. })));
    }

    #[test]
    fn flat_trajectory_has_no_roots() {
        let p = ModelParams::new(0.5, 0.0).with_modes(16).with_store(StoreMode::Stride(50));
        let (tr, _) = solve_to_blowup(&p).unwrap();
        let track = build_track(&tr, &TrackOptions::default());
        assert!(!track.is_empty());
        assert!(track.y_root.iter().all(Option::is_none));
    }

    #[test]
    fn impingement_slope_of_exact_law() {
        let t_c = 1.0;
        let times: Vec<f64> = (1..100).map(|i| t_c - 1e-4 * i as f64).collect();
        let ys: Vec<Option<f64>> = times.iter().map(|t| crate::asymptotics::y_impingement(t_c - t).ok()).collect();
        let (slope, n) = impingement_slope(&times, &ys, t_c, 0.5e-4, 1.1e-2).unwrap();
        assert_eq!(n, 99);
        assert_abs_diff_eq!(slope, 8.0, epsilon = 1e-9);
    }

    #[test]
    fn shifted_frame_matches_real_frame() {
        let p = ModelParams::new(1.0, 0.1).with_modes(64);
        let v = initial_field(&p);
        let shifted = shift_up(&v, 2.0);
        for xi in [-1.0, 0.3, 2.5] {
            let direct = v.eval_at(Complex64::new(xi, 2.0)).unwrap();
            assert!((shifted.value_at(xi) - direct).norm() < 1e-13);
        }
        let fit = fit_shifted(&shifted, 2.0, 0.0).unwrap();
        let want = 10.0f64.acosh();
        assert!((fit.y / want - 1.0).abs() < 0.02, "{} vs {want}", fit.y);
    }

    #[test]
    fn large_shift_keeps_empty_modes_finite() {
        let v = initial_field(&ModelParams::new(1.0, 0.001));
        let s = shift_up(&v, 7.0);
        assert!(s.coeffs().iter().all(|c| c.is_finite()));
        assert!((s.coeff(-1).re + 0.0005 * 7.0f64.exp()).abs() < 1e-12);
    }

    #[test]
    fn shifted_track_rises_first() {
        let p = ModelParams::new(1.0, 0.01).with_modes(64);
        let track = track_shifted(&p, default_shift(1.0, 0.01), &[0.0, 0.05, 0.1], 1.0);
        let ys: Vec<f64> = track.y_fit.iter().map(|y| y.unwrap()).collect();
        assert!(ys[1] > ys[0] && ys[2] > ys[1], "{ys:?}");
    }

    #[test]
    fn track_csv_layout() {
        let track = SingularityTrack {
            times: vec![0.0, 0.5],
            y_fit: vec![None, Some(1.0)],
            y_root: vec![Some(2.0), None],
            fit_quality: vec![None, Some(1e-3)],
            window_spread: vec![None, None],
        };
        let mut buf = Vec::new();
        track.write_csv(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[0], "t,y_fit,y_root,residual,window_spread,usable");
        assert!(lines[1].starts_with("0.000000000000e0,NaN,2.0"));
        assert!(lines[2].ends_with(",NaN,1"));
    }
}
