//! Closed-form asymptotic approximations for `v_t = v_xx - 1 - 2 v_x²/v`
//! with initial data `v(x, 0) = α - ε cos x`.
//!
//! Everything here is a pure function of its arguments. Regime-specific
//! formulas reject arguments outside their domain with [`Error::Domain`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub mod quadrature {
    //! Adaptive Gauss–Kronrod (7, 15) quadrature.

    use crate::error::{Error, Result};

    const XGK: [f64; 8] = [
        0.991_455_371_120_812_6,
        0.949_107_912_342_758_5,
        0.864_864_423_359_769_1,
        0.741_531_185_599_394_4,
        0.586_087_235_467_691_1,
        0.405_845_151_377_397_2,
        0.207_784_955_007_898_5,
        0.0,
    ];
    const WGK: [f64; 8] = [
        0.022_935_322_010_529_22,
        0.063_092_092_629_978_55,
        0.104_790_010_322_250_2,
        0.140_653_259_715_525_9,
        0.169_004_726_639_267_9,
        0.190_350_578_064_785_4,
        0.204_432_940_075_298_9,
        0.209_482_141_084_728_0,
    ];
    const WG: [f64; 4] = [
        0.129_484_966_168_869_7,
        0.279_705_391_489_276_7,
        0.381_830_050_505_118_9,
        0.417_959_183_673_469_4,
    ];

    const MAX_INTERVALS: usize = 4000;

    fn rule(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let fc = f(c);
        let mut k = fc * WGK[7];
        let mut g = fc * WG[3];
        for j in 0..7 {
            let x = h * XGK[j];
            let s = f(c - x) + f(c + x);
            k += WGK[j] * s;
            if j % 2 == 1 {
                g += WG[j / 2] * s;
            }
        }
        (k * h, ((k - g) * h).abs())
    }

    /// `∫_a^b f` to absolute accuracy `tol`; returns the value and the
    /// summed error estimate.
    pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<(f64, f64)> {
        let mut done = (0.0, 0.0);
        let mut stack = vec![(a, b, rule(&f, a, b))];
        let mut intervals = 1;
        while let Some((lo, hi, (val, err))) = stack.pop() {
            let share = tol * (hi - lo) / (b - a);
            if err <= share || hi - lo <= 1e-14 * (b - a).abs() {
                done.0 += val;
                done.1 += err;
                continue;
            }
            intervals += 1;
            if intervals > MAX_INTERVALS {
                let rest: f64 = stack.iter().map(|s| s.2 .1).sum::<f64>() + err;
                return Err(Error::QuadratureNonConvergence { estimate: done.1 + rest });
            }
            let mid = 0.5 * (lo + hi);
            stack.push((lo, mid, rule(&f, lo, mid)));
            stack.push((mid, hi, rule(&f, mid, hi)));
        }
        Ok(done)
    }
}

/// Constants of the second-order blow-up-time correction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticConstants {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub beta1: f64,
    pub gamma1: f64,
    pub beta2: f64,
    pub gamma2: f64,
    pub quadrature_error_bound: f64,
}

/// `T = (t - t_c)/ε` and `τ = -ε log(-T)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimescaleCoords {
    pub big_t: f64,
    pub tau: f64,
}

impl TimescaleCoords {
    pub fn new(t: f64, t_c: f64, epsilon: f64) -> Result<Self> {
        let big_t = (t - t_c) / epsilon;
        if !(big_t < 0.0) {
            return Err(domain("timescale", format!("T = {big_t} must be negative")));
        }
        Ok(Self { big_t, tau: -epsilon * (-big_t).ln() })
    }
}

fn domain(formula: &'static str, detail: String) -> Error {
    Error::Domain { formula, detail }
}

/// First-order solution `α - t - ε e^{-t} cos x`.
pub fn perturbation_v(x: f64, t: f64, alpha: f64, epsilon: f64) -> f64 {
    alpha - t - epsilon * (-t).exp() * x.cos()
}

/// First-order blow-up time estimate `α - ε e^{-α}`.
pub fn t_hat(alpha: f64, epsilon: f64) -> f64 {
    alpha - epsilon * (-alpha).exp()
}

pub const DEFAULT_QUAD_TOL: f64 = 1e-12;

/// `C1 = e^{-2α} log α`, and `C2`, `C3` by quadrature in `s = α - t`:
/// `C2 = e^{-2α} ∫_0^α (e^{2s} - 1)/s ds`, `C3 = e^{-2α} ∫_0^α (e^{-2s} - 1)/s ds`.
pub fn constants(alpha: f64, quad_tol: f64) -> Result<AsymptoticConstants> {
    if !(alpha > 0.0) {
        return Err(Error::InvalidParams(format!("alpha = {alpha} must be positive")));
    }
    let pref = (-2.0 * alpha).exp();
    let kernel = |sign: f64| move |s: f64| if s == 0.0 { 2.0 * sign } else { (2.0 * sign * s).exp_m1() / s };
    let tol = quad_tol / pref / 2.0;
    let (i2, e2) = quadrature::integrate(kernel(1.0), 0.0, alpha, tol)?;
    let (i3, e3) = quadrature::integrate(kernel(-1.0), 0.0, alpha, tol)?;
    let c1 = pref * alpha.ln();
    let c2 = pref * i2;
    let c3 = pref * i3;
    Ok(AsymptoticConstants {
        c1,
        c2,
        c3,
        beta1: -(-alpha).exp(),
        gamma1: 0.5 * (-alpha).exp(),
        beta2: -2.0 * c1 - c2 - c3,
        gamma2: 2.0 * (c1 + c3),
        quadrature_error_bound: pref * (e2 + e3),
    })
}

/// Second-order blow-up time estimate `α - ε e^{-α} - (2C1 + C2 + C3) ε²`.
pub fn t_tilde(alpha: f64, epsilon: f64) -> Result<f64> {
    let k = constants(alpha, DEFAULT_QUAD_TOL)?;
    Ok(t_tilde_with(alpha, epsilon, &k))
}

pub fn t_tilde_with(alpha: f64, epsilon: f64, k: &AsymptoticConstants) -> f64 {
    t_hat(alpha, epsilon) + k.beta2 * epsilon * epsilon
}

/// Second-timescale approximation of `v`, valid for `t_c - t = O(ε)`.
pub fn v_timescale2(x: f64, t: f64, alpha: f64, epsilon: f64, t_c: f64, k: &AsymptoticConstants) -> Result<f64> {
    let ea = (-alpha).exp();
    let s2h = (0.5 * x).sin().powi(2);
    let s2 = x.sin().powi(2);
    let arg = (t_c - t) / epsilon + 2.0 * ea * s2h;
    if !(arg > 0.0) {
        return Err(domain("second-timescale profile", format!("log argument {arg} at x = {x}, t = {t}")));
    }
    let e2 = epsilon * epsilon;
    Ok(t_c - t + 2.0 * epsilon * ea * s2h + 2.0 * e2 * epsilon.ln() * ea * ea * s2 + epsilon * (t - t_c) * ea * x.cos()
        + 2.0 * e2 * s2 * (ea * ea * arg.ln() + k.c1 + k.c3))
}

/// Global blow-up profile at `t = t_c`, for `x = O(1)`.
pub fn blowup_profile_global(x: f64, alpha: f64, epsilon: f64, k: &AsymptoticConstants) -> Result<f64> {
    let ea = (-alpha).exp();
    let lead = 2.0 * epsilon * ea * (0.5 * x).sin().powi(2);
    if !(lead > 0.0) {
        return Err(domain("global blow-up profile", format!("x = {x} sits on the blow-up point")));
    }
    Ok(lead + 2.0 * epsilon * epsilon * x.sin().powi(2) * (ea * ea * lead.ln() + k.c1 + k.c3))
}

/// Local blow-up profile at `t = t_c`, for `x` exponentially small.
pub fn blowup_profile_local(x: f64, alpha: f64, epsilon: f64) -> Result<f64> {
    if !(x != 0.0 && x.abs() < 1.0) {
        return Err(domain("local blow-up profile", format!("requires 0 < |x| < 1, got {x}")));
    }
    let a = epsilon * (-alpha).exp();
    Ok(a * x * x / (2.0 - 8.0 * a * (x * x).ln()))
}

/// `|c_k(t_c)| ≈ 4 ε² e^{-2α} / k³` from the global profile.
pub fn coeff_decay_global(k: f64, alpha: f64, epsilon: f64) -> Result<f64> {
    check_k(k)?;
    Ok(4.0 * epsilon * epsilon * (-2.0 * alpha).exp() / k.powi(3))
}

/// `|c_k(t_c)| ≈ 1 / (16 k³ log² k)` from the local profile.
pub fn coeff_decay_local(k: f64) -> Result<f64> {
    check_k(k)?;
    Ok(1.0 / (16.0 * k.powi(3) * k.ln().powi(2)))
}

fn check_k(k: f64) -> Result<()> {
    if k < 3.0 {
        return Err(domain("coefficient decay law", format!("k = {k} < 3")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `arccosh((α - t) e^t / ε)` from the first-order solution.
    Naive,
    /// `t → 0⁺` on the first time scale.
    Early,
    /// `t → α⁻` on the first time scale.
    LateI,
    /// Second time scale, `T = (t - t_c)/ε = O(1)`.
    ScaleII,
    /// Final time scale with the logarithmic correction.
    ScaleIII,
    /// `√(8 (t_c - t) log(1/(t_c - t)))`.
    Impingement,
}

impl Regime {
    pub const ALL: [Regime; 6] =
        [Regime::Naive, Regime::Early, Regime::LateI, Regime::ScaleII, Regime::ScaleIII, Regime::Impingement];

    pub fn name(self) -> &'static str {
        match self {
            Regime::Naive => "naive",
            Regime::Early => "early",
            Regime::LateI => "late_1",
            Regime::ScaleII => "scale_2",
            Regime::ScaleIII => "scale_3",
            Regime::Impingement => "impingement",
        }
    }

    fn needs_tc(self) -> bool {
        matches!(self, Regime::ScaleII | Regime::ScaleIII | Regime::Impingement)
    }
}

/// Position `y` of the singularity at `x = iy` predicted by `regime`.
pub fn singularity_y(regime: Regime, t: f64, t_c: Option<f64>, alpha: f64, epsilon: f64) -> Result<f64> {
    let t_c = match (regime.needs_tc(), t_c) {
        (true, None) => return Err(Error::InvalidParams(format!("regime {} needs t_c", regime.name()))),
        (_, tc) => tc.unwrap_or(f64::NAN),
    };
    match regime {
        Regime::Naive => y_naive(t, alpha, epsilon),
        Regime::Early => y_early(t, alpha, epsilon),
        Regime::LateI => y_late(t, alpha, epsilon),
        Regime::ScaleII => y_scale2((t - t_c) / epsilon, alpha),
        Regime::ScaleIII => y_scale3((t - t_c) / epsilon, alpha, epsilon),
        Regime::Impingement => y_impingement(t_c - t),
    }
}

pub fn y_naive(t: f64, alpha: f64, epsilon: f64) -> Result<f64> {
    let arg = (alpha - t) * t.exp() / epsilon;
    if !(arg >= 1.0) {
        return Err(domain("naive singularity position", format!("arccosh argument {arg} < 1")));
    }
    Ok(arg.acosh())
}

pub fn y_early(t: f64, alpha: f64, epsilon: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&t) {
        return Err(domain("early singularity position", format!("requires 0 <= t < 1, got {t}")));
    }
    let drift = if t == 0.0 { 0.0 } else { (2.0 * t * (1.0 / t).ln()).sqrt() };
    Ok((2.0 * alpha / epsilon).ln() + drift)
}

pub fn y_late(t: f64, alpha: f64, epsilon: f64) -> Result<f64> {
    if !(t < alpha) {
        return Err(domain("late singularity position", format!("requires t < alpha, got {t}")));
    }
    Ok((2.0 / epsilon).ln() + alpha + (alpha - t).ln())
}

/// Second-timescale position as a function of `T <= 0`.
pub fn y_scale2(big_t: f64, alpha: f64) -> Result<f64> {
    if !(big_t <= 0.0) {
        return Err(domain("second-timescale singularity position", format!("T = {big_t} > 0")));
    }
    let m = (-big_t) * alpha.exp();
    Ok((1.0 + m + (2.0 * m + m * m).sqrt()).ln())
}

pub fn y_scale3(big_t: f64, alpha: f64, epsilon: f64) -> Result<f64> {
    if !(big_t < 0.0) {
        return Err(domain("final-timescale singularity position", format!("T = {big_t} must be negative")));
    }
    let corr = 1.0 - 4.0 * epsilon * (-alpha).exp() * (-big_t).ln();
    if !(corr >= 0.0) {
        return Err(domain("final-timescale singularity position", format!("negative correction {corr}")));
    }
    Ok((2.0 * alpha.exp() * (-big_t)).sqrt() * corr.sqrt())
}

/// Impingement law in terms of `s = t_c - t`, `0 < s < 1`.
pub fn y_impingement(s: f64) -> Result<f64> {
    if !(s > 0.0 && s < 1.0) {
        return Err(domain("impingement law", format!("requires 0 < t_c - t < 1, got {s}")));
    }
    Ok((8.0 * s * (1.0 / s).ln()).sqrt())
}

/// Leading-order flatness `4 a_1 = 2 ε e^{-t} / (α - t)²`.
pub fn flatness_approx(t: f64, alpha: f64, epsilon: f64) -> Result<f64> {
    if !(t < alpha) {
        return Err(domain("flatness approximation", format!("requires t < alpha, got {t}")));
    }
    Ok(2.0 * epsilon * (-t).exp() / (alpha - t).powi(2))
}

/// Time at which the profile turns from flattening to steepening.
pub fn turning_time(alpha: f64) -> Option<f64> {
    (alpha > 2.0).then_some(alpha - 2.0)
}

/// Minimal flatness `ε e^{2-α} / 2`, reached at the turning time.
pub fn minimal_flatness(alpha: f64, epsilon: f64) -> Option<f64> {
    turning_time(alpha).map(|_| 0.5 * epsilon * (2.0 - alpha).exp())
}

/// Closed-form Fourier coefficients of `u(x, 0) = 1/(α - ε cos x)`.
pub fn initial_u_coeff(k: i64, alpha: f64, epsilon: f64) -> f64 {
    let r = alpha / epsilon;
    let root = (r * r - 1.0).sqrt();
    (r + root).powi(-(k.abs() as i32)) / (epsilon * root)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaylorEstimates {
    pub t_c: f64,
    pub beta1: f64,
    pub gamma1: f64,
    pub beta2: f64,
    pub gamma2: f64,
}

/// Estimates for initial data `α + ε x²`.
pub fn taylor_case_estimates(alpha: f64, epsilon: f64) -> TaylorEstimates {
    TaylorEstimates {
        t_c: alpha + 2.0 * alpha * epsilon - 16.0 * alpha * epsilon * epsilon,
        beta1: 2.0 * alpha,
        gamma1: 1.0,
        beta2: -16.0 * alpha,
        gamma2: -8.0 * alpha.ln(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    /// `e^{-2α} Σ_{n≥1} (2σα)^n / (n·n!)`, the series of the C2/C3 integrals.
    fn series_constant(alpha: f64, sigma: f64) -> f64 {
        let z = 2.0 * sigma * alpha;
        let mut term = 1.0;
        let mut sum = 0.0;
        for n in 1..200 {
            term *= z / n as f64;
            sum += term / n as f64;
        }
        (-2.0 * alpha).exp() * sum
    }

    #[test]
    fn quadrature_basic() {
        let (v, e) = quadrature::integrate(|x| x.sin(), 0.0, std::f64::consts::PI, 1e-13).unwrap();
        assert_abs_diff_eq!(v, 2.0, epsilon = 1e-13);
        assert!(e < 1e-13);
        let (v, _) = quadrature::integrate(|x| x.sqrt(), 0.0, 1.0, 1e-12).unwrap();
        assert_abs_diff_eq!(v, 2.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn constants_match_series_oracle() {
        for alpha in [0.25, 1.0, 4.0] {
            let k = constants(alpha, 1e-12).unwrap();
            assert_abs_diff_eq!(k.c2, series_constant(alpha, 1.0), epsilon = 1e-12);
            assert_abs_diff_eq!(k.c3, series_constant(alpha, -1.0), epsilon = 1e-12);
            assert!(k.gamma1 > 0.0);
            assert!(k.quadrature_error_bound <= 1e-12);
        }
    }

    #[test]
    fn constants_at_alpha_one() {
        let k = constants(1.0, 1e-12).unwrap();
        assert_eq!(k.c1, 0.0);
        // e^{-2}(Ei(2) - γ - log 2) and -e^{-2} Ein(2) via mpmath
        assert_abs_diff_eq!(k.c2, 0.498_557_8, epsilon = 1e-7);
        assert_abs_diff_eq!(k.c3, -0.178_542_9, epsilon = 1e-7);
        let k = constants(0.25, 1e-12).unwrap();
        assert_abs_diff_eq!(k.c1, -0.840_830_03, epsilon = 1e-8);
        assert!(constants(0.0, 1e-12).is_err());
    }

    #[test]
    fn constants_stable_under_tolerance() {
        for alpha in [0.25, 1.0, 4.0] {
            let a = constants(alpha, 1e-10).unwrap();
            let b = constants(alpha, 5e-11).unwrap();
            assert!((a.c2 - b.c2).abs() <= 1e-9 && (a.c3 - b.c3).abs() <= 1e-9);
        }
    }

    #[test]
    fn blow_up_time_estimates() {
        assert_abs_diff_eq!(t_hat(0.25, 0.01), 0.242_211_99, epsilon = 1e-7);
        assert_abs_diff_eq!(t_hat(4.0, 0.001), 3.999_981_68, epsilon = 1e-8);
        assert_eq!(t_hat(1.0, 0.0), 1.0);
        assert_abs_diff_eq!(t_tilde(1.0, 0.01).unwrap(), 0.996_289_2, epsilon = 1e-7);
        assert_eq!(t_tilde(2.0, 0.0).unwrap(), 2.0);
        let k = constants(1.0, 1e-12).unwrap();
        let eps = 0.03;
        assert_abs_diff_eq!(
            t_tilde(1.0, eps).unwrap() - t_hat(1.0, eps),
            -(2.0 * k.c1 + k.c2 + k.c3) * eps * eps,
            epsilon = 1e-16
        );
    }

    #[test]
    fn perturbation_endpoints() {
        assert_eq!(perturbation_v(0.0, 0.0, 1.0, 0.1), 0.9);
        assert_abs_diff_eq!(perturbation_v(std::f64::consts::PI, 0.0, 1.0, 0.1), 1.1, epsilon = 1e-15);
    }

    #[test]
    fn profiles() {
        let k = constants(1.0, 1e-12).unwrap();
        let pi = std::f64::consts::PI;
        assert_abs_diff_eq!(blowup_profile_global(pi, 1.0, 0.001, &k).unwrap(), 7.357_589e-4, epsilon = 1e-10);
        assert!(blowup_profile_global(0.0, 1.0, 0.001, &k).is_err());
        assert_abs_diff_eq!(
            v_timescale2(pi, 0.9, 1.0, 0.001, 0.9, &k).unwrap(),
            2.0 * 0.001 * (-1.0f64).exp(),
            epsilon = 1e-15
        );
        assert!(v_timescale2(0.0, 0.95, 1.0, 0.001, 0.9, &k).is_err());

        let local = blowup_profile_local(1e-6, 1.0, 0.001).unwrap();
        assert_abs_diff_eq!(local / 1.7676e-16, 1.0, epsilon = 1e-4);
        assert!(blowup_profile_local(1.0, 1.0, 0.001).is_err());
        assert!(blowup_profile_local(0.0, 1.0, 0.001).is_err());
        // v/x² decreases (logarithmically) towards 0 as x → 0
        let ratio = |x: f64| blowup_profile_local(x, 1.0, 0.001).unwrap() / (x * x);
        assert!(ratio(1e-150) < ratio(1e-50) && ratio(1e-50) < ratio(1e-3));
    }

    #[test]
    fn local_and_global_profiles_overlap() {
        let k = constants(1.0, 1e-12).unwrap();
        let agree = (0..=200).map(|i| 10f64.powf(-4.0 + 2.0 * i as f64 / 200.0)).any(|x| {
            let g = blowup_profile_global(x, 1.0, 0.001, &k).unwrap();
            let l = blowup_profile_local(x, 1.0, 0.001).unwrap();
            ((g - l) / l).abs() <= 0.1
        });
        assert!(agree);
    }

    #[test]
    fn decay_laws() {
        assert_abs_diff_eq!(coeff_decay_global(8.0, 1.0, 0.01).unwrap() / 1.0573e-7, 1.0, epsilon = 1e-4);
        assert_abs_diff_eq!(coeff_decay_local(64.0).unwrap() / 1.378e-8, 1.0, epsilon = 1e-3);
        assert!(coeff_decay_local(2.0).is_err());
    }

    #[test]
    fn singularity_regimes() {
        let y = singularity_y(Regime::Naive, 0.0, None, 1.0, 0.1).unwrap();
        assert_abs_diff_eq!(y, 2.993_222_846_126_381, epsilon = 1e-12);
        assert_eq!(y_scale2(0.0, 1.0).unwrap(), 0.0);
        assert!(singularity_y(Regime::ScaleII, 0.5, None, 1.0, 0.1).is_err());
        assert!(y_naive(0.999, 1.0, 0.1).is_err());

        // scale II against late I at (t_c - t)/ε = 100
        let (alpha, eps) = (1.0, 0.001);
        let t_c = 0.999_631;
        let t = t_c - 100.0 * eps;
        let y2 = singularity_y(Regime::ScaleII, t, Some(t_c), alpha, eps).unwrap();
        let y1 = singularity_y(Regime::LateI, t, Some(t_c), alpha, eps).unwrap();
        assert!(((y2 - y1) / y1).abs() <= 0.02, "{y2} vs {y1}");

        assert!(y_impingement(0.0).is_err());
        assert_abs_diff_eq!(y_impingement(0.01).unwrap(), (0.08 * 100f64.ln()).sqrt(), epsilon = 1e-15);
        assert!(y_scale3(-1.0, 1.0, 0.001).unwrap() > 0.0);
        assert_eq!(y_early(0.0, 1.0, 0.1).unwrap(), 20f64.ln());
    }

    #[test]
    fn flatness_and_turning_time() {
        assert_abs_diff_eq!(flatness_approx(0.0, 1.0, 0.01).unwrap(), 0.02, epsilon = 1e-16);
        assert_abs_diff_eq!(flatness_approx(0.0, 1.0, 0.01).unwrap(), 2.0 * 0.01 / (1.0 - 1e-4), epsilon = 1e-5);
        assert_eq!(turning_time(4.0), Some(2.0));
        assert_eq!(turning_time(1.0), None);
        assert_abs_diff_eq!(minimal_flatness(4.0, 0.01).unwrap(), 6.766_764e-4, epsilon = 1e-9);
    }

    #[test]
    fn taylor_estimates() {
        let e = taylor_case_estimates(1.0, 0.1);
        assert_abs_diff_eq!(e.t_c, 1.04, epsilon = 1e-15);
        assert_eq!(e.gamma2, 0.0);
        assert_eq!(taylor_case_estimates(1.5, 0.0).t_c, 1.5);
    }

    #[test]
    fn initial_coefficients() {
        // a_0 = 1/√(α² - ε²)
        assert_abs_diff_eq!(initial_u_coeff(0, 1.0, 0.01), 1.0 / (1.0f64 - 1e-4).sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(initial_u_coeff(1, 1.0, 0.01), 0.005_000_375_031, epsilon = 1e-12);
        assert_eq!(initial_u_coeff(3, 1.0, 0.2), initial_u_coeff(-3, 1.0, 0.2));
    }

    proptest! {
        #[test]
        fn timescale2_reduces_to_global_profile(x in 0.01f64..3.1, alpha in 0.2f64..4.0, eps in 1e-4f64..0.1) {
            let k = constants(alpha, 1e-12).unwrap();
            let t_c = alpha - eps;
            let a = v_timescale2(x, t_c, alpha, eps, t_c, &k).unwrap();
            let b = blowup_profile_global(x, alpha, eps, &k).unwrap();
            prop_assert!((a - b).abs() <= 1e-14 * b.abs().max(1e-300) + 1e-18);
        }

        #[test]
        fn scale2_increasing_in_minus_t(m1 in 0.0f64..50.0, d in 1e-6f64..10.0, alpha in 0.2f64..4.0) {
            prop_assert!(y_scale2(-(m1 + d), alpha).unwrap() > y_scale2(-m1, alpha).unwrap());
        }

        #[test]
        fn profiles_are_even(x in 0.01f64..0.99, alpha in 0.2f64..4.0, eps in 1e-4f64..0.1) {
            let k = constants(alpha, 1e-12).unwrap();
            prop_assert_eq!(blowup_profile_global(x, alpha, eps, &k).unwrap(), blowup_profile_global(-x, alpha, eps, &k).unwrap());
            prop_assert_eq!(blowup_profile_local(x, alpha, eps).unwrap(), blowup_profile_local(-x, alpha, eps).unwrap());
        }
    }
}
