//! Dormand–Prince 5(4) integrator over complex state vectors.
//!
//! Supports adaptive stepping with a PI controller, 4th-order dense output,
//! event location on the dense interpolant, fixed-step runs for order checks
//! and integration along piecewise-smooth contours in the complex t-plane.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

type C64 = Complex64;

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFETY: f64 = 0.9;
const BETA: f64 = 0.04;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 5.0;

/// Which accepted steps are kept in the returned [`Trajectory`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StoreMode {
    All,
    Stride(usize),
    Endpoints,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: f64,
    pub h_min: f64,
    pub h_max: f64,
    pub max_steps: usize,
    pub store: StoreMode,
    /// Keep interpolation data for every stored step.
    pub dense: bool,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rtol: 1e-12,
            atol: 1e-12,
            h_init: 1e-4,
            h_min: 1e-14,
            h_max: 1.0,
            max_steps: 1_000_000,
            store: StoreMode::All,
            dense: false,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.rtol > 0.0
            && self.atol > 0.0
            && self.h_min > 0.0
            && self.h_min <= self.h_init
            && self.h_init <= self.h_max
            && self.max_steps > 0;
        if !ok {
            return Err(Error::InvalidParams(format!("inconsistent integrator config {self:?}")));
        }
        if let StoreMode::Stride(0) = self.store {
            return Err(Error::InvalidParams("store stride must be positive".into()));
        }
        Ok(())
    }
}

/// Continuous extension of one accepted step.
#[derive(Debug, Clone)]
pub struct DenseSegment {
    pub t0: f64,
    pub h: f64,
    rcont: [Vec<C64>; 5],
}

impl DenseSegment {
    pub fn t1(&self) -> f64 {
        self.t0 + self.h
    }

    pub fn eval(&self, t: f64) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.rcont[0].len()];
        self.eval_into(t, &mut out);
        out
    }

    pub fn eval_into(&self, t: f64, out: &mut [C64]) {
        let theta = (t - self.t0) / self.h;
        let theta1 = 1.0 - theta;
        let [r1, r2, r3, r4, r5] = &self.rcont;
        for i in 0..out.len() {
            out[i] = r1[i] + (r2[i] + (r3[i] + (r4[i] + r5[i] * theta1) * theta) * theta1) * theta;
        }
    }
}

/// Accepted steps of an integration run.
///
/// `times` is the integration parameter (time for real runs, arclength for
/// contour runs); `points` holds the matching complex time.
#[derive(Debug, Clone, Default)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub points: Vec<C64>,
    pub states: Vec<Vec<C64>>,
    pub dense: Vec<DenseSegment>,
    pub events: Vec<EventHit>,
    pub stats: StepStats,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last_state(&self) -> Option<&[C64]> {
        self.states.last().map(|s| s.as_slice())
    }

    pub fn last_time(&self) -> Option<f64> {
        self.times.last().copied()
    }

    /// Evaluates the dense interpolant at `t`; requires `dense = true`.
    pub fn dense_at(&self, t: f64) -> Option<Vec<C64>> {
        let idx = self.dense.partition_point(|seg| seg.t1() < t);
        let seg = self.dense.get(idx)?;
        (t >= seg.t0 - 1e-15 * seg.t0.abs().max(1.0)).then(|| seg.eval(t))
    }

    /// CSV with a `t` column followed by `re_i, im_i` pairs.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let dim = self.states.first().map_or(0, |s| s.len());
        write!(w, "t")?;
        for i in 0..dim {
            write!(w, ",re_{i},im_{i}")?;
        }
        writeln!(w)?;
        for (t, s) in self.times.iter().zip(&self.states) {
            write!(w, "{t:.17e}")?;
            for c in s {
                write!(w, ",{:.17e},{:.17e}", c.re, c.im)?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Any,
    Decreasing,
    Increasing,
}

/// A scalar function of the state whose zero crossing is an event.
pub struct EventSpec<'a> {
    pub observable: Box<dyn Fn(&[C64]) -> f64 + 'a>,
    pub direction: Direction,
    pub root_tol: f64,
    /// Stop the integration at the event.
    pub terminal: bool,
}

impl<'a> EventSpec<'a> {
    pub fn new(observable: impl Fn(&[C64]) -> f64 + 'a) -> Self {
        Self { observable: Box::new(observable), direction: Direction::Any, root_tol: 1e-13, terminal: true }
    }

    pub fn direction(mut self, d: Direction) -> Self {
        self.direction = d;
        self
    }

    pub fn root_tol(mut self, tol: f64) -> Self {
        self.root_tol = tol;
        self
    }

    pub fn terminal(mut self, terminal: bool) -> Self {
        self.terminal = terminal;
        self
    }

    fn crosses(&self, g0: f64, g1: f64) -> bool {
        let down = g0 > 0.0 && g1 <= 0.0;
        let up = g0 < 0.0 && g1 >= 0.0;
        match self.direction {
            Direction::Any => down || up,
            Direction::Decreasing => down,
            Direction::Increasing => up,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EventHit {
    pub index: usize,
    pub t: f64,
    pub state: Vec<C64>,
    pub value: f64,
}

/// Integrates `y' = rhs(t, y)` on `[t0, t1]`.
///
/// Returns the trajectory and the first terminal event, if any. Non-terminal
/// events are recorded in `Trajectory::events`.
pub fn integrate<F>(
    mut rhs: F,
    y0: &[C64],
    t0: f64,
    t1: f64,
    cfg: &IntegratorConfig,
    events: &[EventSpec<'_>],
) -> Result<(Trajectory, Option<EventHit>)>
where
    F: FnMut(f64, &[C64], &mut [C64]) -> Result<()>,
{
    let mut stepper = Stepper::new(y0.len());
    stepper.run(&mut rhs, &|t| C64::new(t, 0.0), y0, t0, t1, cfg, events)
}

/// A straight segment or circular arc in the complex t-plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Segment {
    Line { from: C64, to: C64 },
    /// `center + radius·e^{iθ}` for θ running from `theta0` to `theta1`.
    Arc { center: C64, radius: f64, theta0: f64, theta1: f64 },
}

impl Segment {
    pub fn length(&self) -> f64 {
        match *self {
            Segment::Line { from, to } => (to - from).norm(),
            Segment::Arc { radius, theta0, theta1, .. } => radius * (theta1 - theta0).abs(),
        }
    }

    /// Point and derivative `dt/ds` at arclength `s`.
    pub fn at(&self, s: f64) -> (C64, C64) {
        let len = self.length();
        match *self {
            Segment::Line { from, to } => {
                let d = (to - from) / len;
                (from + d * s, d)
            }
            Segment::Arc { center, radius, theta0, theta1 } => {
                let dtheta = (theta1 - theta0) / len;
                let th = theta0 + dtheta * s;
                let e = C64::from_polar(1.0, th);
                (center + e * radius, C64::i() * e * (radius * dtheta))
            }
        }
    }

    pub fn start(&self) -> C64 {
        self.at(0.0).0
    }

    pub fn end(&self) -> C64 {
        match *self {
            Segment::Line { to, .. } => to,
            Segment::Arc { center, radius, theta1, .. } => center + C64::from_polar(radius, theta1),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ContourPath {
    pub segments: Vec<Segment>,
}

impl ContourPath {
    pub fn line(from: C64, to: C64) -> Self {
        Self { segments: vec![Segment::Line { from, to }] }
    }

    /// Real axis from `t_start` to `center - radius`, a half circle around
    /// `center` (through `center + i·radius` when `upper`), then the real axis
    /// to `t_end`. Zero-length pieces are dropped.
    pub fn semicircle_detour(t_start: f64, center: f64, radius: f64, t_end: f64, upper: bool) -> Self {
        let theta1 = if upper { 0.0 } else { 2.0 * PI };
        let segments = vec![
            Segment::Line { from: C64::new(t_start, 0.0), to: C64::new(center - radius, 0.0) },
            Segment::Arc { center: C64::new(center, 0.0), radius, theta0: PI, theta1 },
            Segment::Line { from: C64::new(center + radius, 0.0), to: C64::new(t_end, 0.0) },
        ];
        Self { segments: segments.into_iter().filter(|s| s.length() > 0.0).collect() }
    }

    pub fn length(&self) -> f64 {
        self.segments.iter().map(Segment::length).sum()
    }
}

/// Integrates `dy/ds = rhs(t(s), y)·t'(s)` along `path`, segment by segment.
pub fn integrate_path<F>(mut rhs: F, y0: &[C64], path: &ContourPath, cfg: &IntegratorConfig) -> Result<Trajectory>
where
    F: FnMut(C64, &[C64], &mut [C64]) -> Result<()>,
{
    let mut stepper = Stepper::new(y0.len());
    let mut out = Trajectory::default();
    let mut y = y0.to_vec();
    let mut s_offset = 0.0;
    for (i, seg) in path.segments.iter().enumerate() {
        let seg = *seg;
        let len = seg.length();
        let mut f = |s: f64, y: &[C64], dy: &mut [C64]| {
            let (t, dt) = seg.at(s);
            rhs(t, y, dy)?;
            dy.iter_mut().for_each(|v| *v *= dt);
            Ok(())
        };
        let (tr, _) = stepper.run(&mut f, &|s| seg.at(s).0, &y, 0.0, len, cfg, &[])?;
        y = tr.last_state().expect("non-empty").to_vec();
        let skip = usize::from(i > 0);
        out.times.extend(tr.times.iter().skip(skip).map(|s| s + s_offset));
        out.points.extend(tr.points.iter().skip(skip));
        out.states.extend(tr.states.into_iter().skip(skip));
        out.dense.extend(tr.dense.into_iter().map(|mut d| {
            d.t0 += s_offset;
            d
        }));
        out.stats.accepted += tr.stats.accepted;
        out.stats.rejected += tr.stats.rejected;
        out.stats.rhs_evals += tr.stats.rhs_evals;
        s_offset += len;
    }
    if out.states.is_empty() {
        out.times.push(0.0);
        out.points.push(path.segments.first().map_or(C64::new(0.0, 0.0), |s| s.start()));
        out.states.push(y);
    }
    Ok(out)
}

/// `n` equal steps of the 5th-order solution, no error control.
pub fn integrate_fixed<F>(mut rhs: F, y0: &[C64], t0: f64, t1: f64, n: usize) -> Result<Vec<C64>>
where
    F: FnMut(f64, &[C64], &mut [C64]) -> Result<()>,
{
    let mut st = Stepper::new(y0.len());
    let h = (t1 - t0) / n as f64;
    let mut y = y0.to_vec();
    rhs(t0, &y, &mut st.k[0])?;
    for i in 0..n {
        let t = t0 + h * i as f64;
        st.step(&mut rhs, t, &y, h)?;
        y.copy_from_slice(&st.y_new);
        st.k.swap(0, 6);
    }
    Ok(y)
}

/// Least-squares slope of `log err` against `log h`.
pub fn observed_order(samples: &[(f64, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = samples.iter().map(|&(h, e)| (h.ln(), e.ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Observed convergence order of fixed-step runs against a known solution.
pub fn order_check<F>(mut rhs: F, y0: &[C64], t0: f64, t1: f64, exact: &[C64], hs: &[f64]) -> Result<f64>
where
    F: FnMut(f64, &[C64], &mut [C64]) -> Result<()>,
{
    let mut samples = Vec::with_capacity(hs.len());
    for &h in hs {
        let n = ((t1 - t0) / h).round().max(1.0) as usize;
        let y = integrate_fixed(&mut rhs, y0, t0, t1, n)?;
        let err = y.iter().zip(exact).fold(0.0f64, |m, (a, b)| m.max((a - b).norm()));
        samples.push(((t1 - t0) / n as f64, err));
    }
    Ok(observed_order(&samples))
}

struct Stepper {
    k: [Vec<C64>; 7],
    y_stage: Vec<C64>,
    y_new: Vec<C64>,
    evals: usize,
}

impl Stepper {
    fn new(dim: usize) -> Self {
        let z = vec![C64::new(0.0, 0.0); dim];
        Self { k: std::array::from_fn(|_| z.clone()), y_stage: z.clone(), y_new: z, evals: 0 }
    }

    /// One Dormand–Prince step from `(t, y)` with `k[0] = f(t, y)` already set.
    /// Leaves the 5th-order solution in `y_new` and `f(t+h, y_new)` in `k[6]`.
    fn step<F>(&mut self, rhs: &mut F, t: f64, y: &[C64], h: f64) -> Result<()>
    where
        F: FnMut(f64, &[C64], &mut [C64]) -> Result<()>,
    {
        let stages: [(f64, &[f64]); 6] = [
            (C2, &[A21]),
            (C3, &[A31, A32]),
            (C4, &[A41, A42, A43]),
            (C5, &[A51, A52, A53, A54]),
            (1.0, &[A61, A62, A63, A64, A65]),
            (1.0, &[A71, 0.0, A73, A74, A75, A76]),
        ];
        for (s, (c, a)) in stages.iter().enumerate() {
            let target = if s == 5 { &mut self.y_new } else { &mut self.y_stage };
            for i in 0..y.len() {
                let mut acc = C64::new(0.0, 0.0);
                for (j, &aj) in a.iter().enumerate() {
                    if aj != 0.0 {
                        acc += self.k[j][i] * aj;
                    }
                }
                target[i] = y[i] + acc * h;
            }
            let (head, tail) = self.k.split_at_mut(s + 1);
            let _ = head;
            let src = if s == 5 { &self.y_new } else { &self.y_stage };
            self.evals += 1;
            rhs(t + c * h, src, &mut tail[0])?;
            if tail[0].iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFiniteRhs { t: C64::new(t + c * h, 0.0) });
            }
        }
        Ok(())
    }

    fn error_norm(&self, y: &[C64], h: f64, cfg: &IntegratorConfig) -> f64 {
        let k = &self.k;
        let mut err = 0.0f64;
        for i in 0..y.len() {
            let e = (k[0][i] * E1 + k[2][i] * E3 + k[3][i] * E4 + k[4][i] * E5 + k[5][i] * E6 + k[6][i] * E7) * h;
            let sc = cfg.atol + cfg.rtol * y[i].norm().max(self.y_new[i].norm());
            err = err.max(e.norm() / sc);
        }
        err
    }

    fn dense_segment(&self, t: f64, y: &[C64], h: f64) -> DenseSegment {
        let k = &self.k;
        let n = y.len();
        let mut r = std::array::from_fn::<Vec<C64>, 5, _>(|_| Vec::with_capacity(n));
        for i in 0..n {
            let ydiff = self.y_new[i] - y[i];
            let bspl = k[0][i] * h - ydiff;
            r[0].push(y[i]);
            r[1].push(ydiff);
            r[2].push(bspl);
            r[3].push(ydiff - k[6][i] * h - bspl);
            r[4].push((k[0][i] * D1 + k[2][i] * D3 + k[3][i] * D4 + k[4][i] * D5 + k[5][i] * D6 + k[6][i] * D7) * h);
        }
        DenseSegment { t0: t, h, rcont: r }
    }

    /// Root of the event observable inside the step just taken.
    ///
    /// Bisection and then Illinois-secant iterations on the dense output give
    /// a root to `root_tol`; the state there is then polished with secant
    /// iterations on genuine Runge–Kutta steps from the step start, whose
    /// error is far below that of the 4th-order interpolant.
    fn locate<F>(&self, rhs: &mut F, ev: &EventSpec<'_>, seg: &DenseSegment, y: &[C64], g0: f64, g1: f64) -> (f64, Vec<C64>)
    where
        F: FnMut(f64, &[C64], &mut [C64]) -> Result<()>,
    {
        if g1 == 0.0 {
            return (seg.t1(), self.y_new.clone());
        }
        let phi = |t: f64| (ev.observable)(&seg.eval(t));
        let (mut ta, mut tb, mut ga, mut gb) = (seg.t0, seg.t1(), g0, g1);
        while tb - ta > 1e-3 * seg.h {
            let tm = 0.5 * (ta + tb);
            let gm = phi(tm);
            if gm == 0.0 {
                ta = tm;
                tb = tm;
                break;
            }
            if (gm > 0.0) == (ga > 0.0) {
                ta = tm;
                ga = gm;
            } else {
                tb = tm;
                gb = gm;
            }
        }
        let mut side = 0i8;
        for _ in 0..200 {
            if tb - ta <= ev.root_tol {
                break;
            }
            let tm = (ta * gb - tb * ga) / (gb - ga);
            let tm = if tm > ta && tm < tb { tm } else { 0.5 * (ta + tb) };
            let gm = phi(tm);
            if gm == 0.0 {
                ta = tm;
                tb = tm;
                break;
            }
            if (gm > 0.0) == (ga > 0.0) {
                ta = tm;
                ga = gm;
                if side == -1 {
                    gb *= 0.5;
                }
                side = -1;
            } else {
                tb = tm;
                gb = gm;
                if side == 1 {
                    ga *= 0.5;
                }
                side = 1;
            }
        }
        let t_dense = if ga.abs() < gb.abs() { ta } else { tb };
        let mut best_t = t_dense;
        let mut best_y = seg.eval(t_dense);
        let mut best_g = (ev.observable)(&best_y).abs();

        let t0 = seg.t0;
        let mut pol = Stepper::new(y.len());
        pol.k[0].copy_from_slice(&self.k[0]);
        let mut psi = |tau: f64, pol: &mut Stepper| -> Option<(f64, Vec<C64>)> {
            if tau <= t0 {
                return None;
            }
            pol.step(rhs, t0, y, tau - t0)
                .ok().map(|_| ((ev.observable)(&pol.y_new), pol.y_new.clone()))
        };
        let delta = (1e-6 * seg.h).max(10.0 * ev.root_tol);
        let (mut tp, mut tc) = (t_dense - delta, t_dense);
        let mut gp = match psi(tp, &mut pol) {
            Some((g, _)) => g,
            None => return (best_t, best_y),
        };
        for _ in 0..8 {
            let Some((gc, yc)) = psi(tc, &mut pol) else { break };
            if gc.abs() < best_g {
                best_g = gc.abs();
                best_t = tc;
                best_y = yc;
            }
            if gc == 0.0 || gc == gp {
                break;
            }
            let tn = tc - gc * (tc - tp) / (gc - gp);
            if !tn.is_finite() || (tn - tc).abs() > seg.h {
                break;
            }
            let small = (tn - tc).abs() <= 1e-3 * ev.root_tol;
            tp = tc;
            gp = gc;
            tc = tn;
            if small {
                break;
            }
        }
        (best_t, best_y)
    }

    #[allow(clippy::too_many_arguments)]
    fn run<F>(
        &mut self,
        rhs: &mut F,
        point: &dyn Fn(f64) -> C64,
        y0: &[C64],
        t0: f64,
        t1: f64,
        cfg: &IntegratorConfig,
        events: &[EventSpec<'_>],
    ) -> Result<(Trajectory, Option<EventHit>)>
    where
        F: FnMut(f64, &[C64], &mut [C64]) -> Result<()>,
    {
        cfg.validate()?;
        self.evals = 0;
        let mut tr = Trajectory::default();
        let mut y = y0.to_vec();
        let mut t = t0;
        tr.times.push(t);
        tr.points.push(point(t));
        tr.states.push(y.clone());

        let mut g: Vec<f64> = events.iter().map(|e| (e.observable)(&y)).collect();
        if let Some(i) = events.iter().position(|e| (e.observable)(&y) == 0.0) {
            let hit = EventHit { index: i, t, state: y.clone(), value: 0.0 };
            if events[i].terminal {
                return Ok((tr, Some(hit)));
            }
            tr.events.push(hit);
        }

        self.evals += 1;
        rhs(t, &y, &mut self.k[0])?;
        if self.k[0].iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteRhs { t: point(t) });
        }

        let mut h = cfg.h_init.min(cfg.h_max).min(t1 - t0);
        let mut err_old = 1e-4f64;
        let mut rejected_last = false;
        let mut since_store = 0usize;

        while t < t1 {
            if tr.stats.accepted + tr.stats.rejected >= cfg.max_steps {
                return Err(Error::MaxStepsExceeded { t: point(t), max_steps: cfg.max_steps, state: y });
            }
            let last = t + h >= t1 || t + 1.01 * h >= t1;
            if last {
                h = t1 - t;
            }

            let err = match self.step(rhs, t, &y, h) {
                Ok(()) => self.error_norm(&y, h, cfg),
                Err(e) if e.is_step_recoverable() => f64::INFINITY,
                Err(e) => return Err(e),
            };

            if !(err <= 1.0) {
                tr.stats.rejected += 1;
                let fac = if err.is_finite() { (SAFETY * err.powf(-0.2)).max(FAC_MIN) } else { 0.25 };
                h *= fac.min(1.0);
                rejected_last = true;
                if h < cfg.h_min {
                    return Err(Error::StiffnessOrSingularity { t: point(t), h, state: y });
                }
                continue;
            }

            tr.stats.accepted += 1;
            let t_new = if last { t1 } else { t + h };

            let mut hit = None;
            for (i, ev) in events.iter().enumerate() {
                let g_new = (ev.observable)(&self.y_new);
                if ev.crosses(g[i], g_new) {
                    let seg = self.dense_segment(t, &y, h);
                    let (t_star, state) = self.locate(rhs, ev, &seg, &y, g[i], g_new);
                    let value = (ev.observable)(&state);
                    let h_i = EventHit { index: i, t: t_star, state, value };
                    if ev.terminal {
                        if hit.as_ref().map_or(true, |p: &EventHit| h_i.t < p.t) {
                            hit = Some(h_i);
                        }
                    } else {
                        tr.events.push(h_i);
                    }
                }
                g[i] = g_new;
            }

            if let Some(hit) = hit {
                if cfg.dense {
                    tr.dense.push(self.dense_segment(t, &y, h));
                }
                tr.times.push(hit.t);
                tr.points.push(point(hit.t));
                tr.states.push(hit.state.clone());
                tr.stats.rhs_evals = self.evals;
                return Ok((tr, Some(hit)));
            }

            if cfg.dense {
                tr.dense.push(self.dense_segment(t, &y, h));
            }
            y.copy_from_slice(&self.y_new);
            t = t_new;
            self.k.swap(0, 6);

            since_store += 1;
            let store = match cfg.store {
                StoreMode::All => true,
                StoreMode::Stride(n) => since_store >= n,
                StoreMode::Endpoints => false,
            };
            if store || t >= t1 {
                tr.times.push(t);
                tr.points.push(point(t));
                tr.states.push(y.clone());
                since_store = 0;
            }

            let mut fac = SAFETY * err.max(1e-10).powf(-(0.2 - 0.75 * BETA)) * err_old.powf(BETA);
            fac = fac.clamp(FAC_MIN, FAC_MAX);
            if rejected_last {
                fac = fac.min(1.0);
            }
            err_old = err.max(1e-4);
            rejected_last = false;
            h = (h * fac).min(cfg.h_max);
        }
        tr.stats.rhs_evals = self.evals;
        Ok((tr, None))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn decay(_t: f64, y: &[C64], dy: &mut [C64]) -> Result<()> {
        dy[0] = -y[0];
        Ok(())
    }

    #[test]
    fn exponential_decay() {
        let (tr, ev) = integrate(decay, &[c(1.0)], 0.0, 1.0, &IntegratorConfig::default(), &[]).unwrap();
        assert!(ev.is_none());
        assert_eq!(tr.last_time(), Some(1.0));
        assert_abs_diff_eq!(tr.last_state().unwrap()[0].re, (-1.0f64).exp(), epsilon = 1e-11);
        assert!(tr.times.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn immediate_event_at_start() {
        let ev = [EventSpec::new(|y: &[C64]| y[0].re - 1.0)];
        let (_, hit) =
            integrate(|_, _, dy: &mut [C64]| Ok(dy[0] = c(0.0)), &[c(1.0)], 0.5, 1.0, &Default::default(), &ev).unwrap();
        assert_eq!(hit.unwrap().t, 0.5);
    }

    #[test]
    fn flat_line_event() {
        let ev = [EventSpec::new(|y: &[C64]| y[0].re).direction(Direction::Decreasing)];
        let (tr, hit) =
            integrate(|_, _, dy: &mut [C64]| Ok(dy[0] = c(-1.0)), &[c(0.25)], 0.0, 1.0, &Default::default(), &ev).unwrap();
        let hit = hit.unwrap();
        assert_abs_diff_eq!(hit.t, 0.25, epsilon = 1e-12);
        assert!(hit.value.abs() <= 1e-12);
        assert_eq!(tr.last_time(), Some(hit.t));
    }

    #[test]
    fn event_on_oscillation_respects_direction() {
        // y = cos t: decreasing zero at π/2, increasing at 3π/2
        let rhs = |_: f64, y: &[C64], dy: &mut [C64]| {
            dy[0] = -y[1];
            dy[1] = y[0];
            Ok(())
        };
        let y0 = [c(1.0), c(0.0)];
        let up = [EventSpec::new(|y: &[C64]| y[0].re).direction(Direction::Increasing)];
        let (_, hit) = integrate(rhs, &y0, 0.0, 10.0, &Default::default(), &up).unwrap();
        let hit = hit.unwrap();
        assert_abs_diff_eq!(hit.t, 1.5 * PI, epsilon = 1e-12);
        assert!(hit.value.abs() <= 1e-12);

        let any = [EventSpec::new(|y: &[C64]| y[0].re).terminal(false)];
        let (tr, hit) = integrate(rhs, &y0, 0.0, 10.0, &Default::default(), &any).unwrap();
        assert!(hit.is_none());
        let ts: Vec<f64> = tr.events.iter().map(|e| e.t).collect();
        assert_eq!(ts.len(), 3);
        for (k, t) in ts.iter().enumerate() {
            assert_abs_diff_eq!(*t, (k as f64 + 0.5) * PI, epsilon = 1e-11);
        }
    }

    #[test]
    fn singular_rhs_reports_stiffness() {
        // y' = y², y(0) = 1 blows up at t = 1
        let rhs = |_: f64, y: &[C64], dy: &mut [C64]| Ok(dy[0] = y[0] * y[0]);
        let cfg = IntegratorConfig { h_min: 1e-12, ..Default::default() };
        match integrate(rhs, &[c(1.0)], 0.0, 2.0, &cfg, &[]) {
            Err(Error::StiffnessOrSingularity { t, state, .. }) => {
                assert!((t.re - 1.0).abs() < 1e-3);
                assert!(state[0].re > 1e3);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn max_steps_and_config_validation() {
        let cfg = IntegratorConfig { max_steps: 3, h_init: 1e-3, h_max: 1e-3, ..Default::default() };
        assert!(matches!(integrate(decay, &[c(1.0)], 0.0, 1.0, &cfg, &[]), Err(Error::MaxStepsExceeded { .. })));
        let bad = IntegratorConfig { rtol: 0.0, ..Default::default() };
        assert!(matches!(integrate(decay, &[c(1.0)], 0.0, 1.0, &bad, &[]), Err(Error::InvalidParams(_))));
    }

    #[test]
    fn non_finite_rhs_is_reported() {
        let rhs = |_: f64, _: &[C64], dy: &mut [C64]| Ok(dy[0] = c(f64::NAN));
        assert!(matches!(
            integrate(rhs, &[c(1.0)], 0.0, 1.0, &Default::default(), &[]),
            Err(Error::NonFiniteRhs { .. })
        ));
    }

    fn growth(_t: C64, y: &[C64], dy: &mut [C64]) -> Result<()> {
        dy[0] = y[0];
        Ok(())
    }

    #[test]
    fn straight_and_detour_paths() {
        let cfg = IntegratorConfig::default();
        let e = std::f64::consts::E;
        let straight = integrate_path(growth, &[c(1.0)], &ContourPath::line(c(0.0), c(1.0)), &cfg).unwrap();
        assert!((straight.last_state().unwrap()[0] - c(e)).norm() < 1e-11);

        let arc = ContourPath { segments: vec![Segment::Arc { center: c(0.5), radius: 0.5, theta0: PI, theta1: 0.0 }] };
        let tr = integrate_path(growth, &[c(1.0)], &arc, &cfg).unwrap();
        assert!((tr.last_state().unwrap()[0] - c(e)).norm() < 1e-10);
        assert!(tr.points.iter().all(|p| p.im >= -1e-15));
        assert!(tr.points.iter().any(|p| p.im > 0.4));

        for upper in [true, false] {
            let p = ContourPath::semicircle_detour(0.0, 0.5, 0.2, 1.0, upper);
            assert_eq!(p.segments.len(), 3);
            let mid = p.segments[1].at(p.segments[1].length() / 2.0).0;
            assert_abs_diff_eq!(mid.im, if upper { 0.2 } else { -0.2 }, epsilon = 1e-14);
            let tr = integrate_path(growth, &[c(1.0)], &p, &cfg).unwrap();
            assert!((tr.last_state().unwrap()[0] - c(e)).norm() < 1e-10);
        }
    }

    #[test]
    fn quarter_circle_exponential() {
        // y' = i y has y = e^{it}; on the real axis |y| = 1
        let rot = |_t: C64, y: &[C64], dy: &mut [C64]| Ok(dy[0] = C64::i() * y[0]);
        let arc = ContourPath { segments: vec![Segment::Arc { center: c(0.0), radius: 1.0, theta0: 0.0, theta1: PI / 2.0 }] };
        let tr = integrate_path(rot, &[(C64::i()).exp()], &arc, &IntegratorConfig::default()).unwrap();
        let want = (C64::i() * C64::i()).exp();
        assert!((tr.last_state().unwrap()[0] - want).norm() < 1e-10);

        let line = ContourPath::line(c(0.0), c(2.0 * PI));
        let tr = integrate_path(rot, &[c(1.0)], &line, &IntegratorConfig::default()).unwrap();
        for s in &tr.states {
            assert_abs_diff_eq!(s[0].norm(), 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn fifth_order_on_linear_problem() {
        let exact = [c((-1.0f64).exp())];
        let p = order_check(decay, &[c(1.0)], 0.0, 1.0, &exact, &[0.1, 0.05, 0.025]).unwrap();
        assert!((p - 5.0).abs() <= 0.3, "order {p}");
    }

    #[test]
    fn fifth_order_on_quadrature_problem() {
        let exact = [c(1.0f64.sin())];
        let rhs = |t: f64, _: &[C64], dy: &mut [C64]| Ok(dy[0] = c(t.cos()));
        let p = order_check(rhs, &[c(0.0)], 0.0, 1.0, &exact, &[0.1, 0.05, 0.025]).unwrap();
        assert!((p - 5.0).abs() <= 0.3, "order {p}");
    }

    #[test]
    fn dense_output_is_fourth_order() {
        let mut samples = Vec::new();
        for h in [0.2, 0.1, 0.05] {
            let cfg = IntegratorConfig { h_init: h, h_min: h, h_max: h, rtol: 1.0, atol: 1.0, dense: true, ..Default::default() };
            let (tr, _) = integrate(decay, &[c(1.0)], 0.0, 1.0, &cfg, &[]).unwrap();
            let mut err = 0.0f64;
            for seg in &tr.dense {
                let t = seg.t0 + 0.37 * seg.h;
                err = err.max((seg.eval(t)[0].re - (-t).exp()).abs());
            }
            samples.push((h, err));
        }
        assert!(observed_order(&samples) >= 4.0, "{samples:?}");
    }

    #[test]
    fn dense_reproduces_nodes() {
        let cfg = IntegratorConfig { dense: true, ..Default::default() };
        let (tr, _) = integrate(decay, &[c(1.0)], 0.0, 1.0, &cfg, &[]).unwrap();
        assert_eq!(tr.dense.len(), tr.len() - 1);
        for (t, s) in tr.times.iter().zip(&tr.states).skip(1) {
            let d = tr.dense_at(*t).unwrap();
            assert!((d[0] - s[0]).norm() < 1e-12);
        }
    }

    #[test]
    fn tolerance_monotonicity() {
        // at loose tolerances the step sequence is set by the start-up ramp,
        // not by the tolerance, so the check covers the tolerance-limited range
        let mut prev = f64::INFINITY;
        for tol in (0..16).map(|i| 1e-8 * 0.5f64.powi(i)) {
            let cfg = IntegratorConfig { rtol: tol, atol: tol, ..Default::default() };
            let (tr, _) = integrate(decay, &[c(1.0)], 0.0, 1.0, &cfg, &[]).unwrap();
            let err = (tr.last_state().unwrap()[0].re - (-1.0f64).exp()).abs();
            assert!(err <= prev * (1.0 + 1e-12), "tol {tol}: {err} > {prev}");
            prev = err;
        }
    }

    #[test]
    fn real_problems_stay_real() {
        let rhs = |_: f64, y: &[C64], dy: &mut [C64]| {
            dy[0] = -y[1] * y[0];
            dy[1] = y[0] - y[1];
            Ok(())
        };
        let (tr, _) = integrate(rhs, &[c(1.0), c(0.3)], 0.0, 3.0, &Default::default(), &[]).unwrap();
        assert!(tr.states.iter().flatten().all(|v| v.im == 0.0));
    }

    #[test]
    fn store_modes() {
        let all = integrate(decay, &[c(1.0)], 0.0, 1.0, &Default::default(), &[]).unwrap().0;
        let cfg = IntegratorConfig { store: StoreMode::Endpoints, ..Default::default() };
        let ends = integrate(decay, &[c(1.0)], 0.0, 1.0, &cfg, &[]).unwrap().0;
        assert_eq!(ends.len(), 2);
        assert_eq!(ends.last_state(), all.last_state());
        let cfg = IntegratorConfig { store: StoreMode::Stride(3), ..Default::default() };
        let stride = integrate(decay, &[c(1.0)], 0.0, 1.0, &cfg, &[]).unwrap().0;
        assert!(stride.len() < all.len() && stride.len() > 2);
    }

    #[test]
    fn csv_export() {
        let cfg = IntegratorConfig { store: StoreMode::Endpoints, ..Default::default() };
        let (tr, _) = integrate(decay, &[c(1.0)], 0.0, 1.0, &cfg, &[]).unwrap();
        let mut buf = Vec::new();
        tr.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "t,re_0,im_0");
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("0.00000000000000000e0,1.00000000000000000e0,"));
    }
}
