//! Truncated Fourier-series algebra on the periodic interval [-π, π).
//!
//! A [`FourierField`] stores coefficients `c_k`, `k = -N..=N`, of
//! `v(x) = Σ c_k e^{ikx}`. Nonlinear operations are formed pseudospectrally:
//! the operands are sampled on a zero-padded grid of `M >= 3N + 1` nodes
//! `x_j = -π + 2πj/M`, combined pointwise and transformed back, which is
//! exact for products of band-limited fields.
//!
//! Samples are always handled as a pair of real arrays (real and imaginary
//! part of `v(x_j)`), each going through a real-input FFT. A field whose
//! coefficients are exactly Hermitian therefore produces an imaginary part that
//! is identically zero rather than roundoff-sized, and stays exactly real
//! under every operation here. The post-blow-up continuation depends on this:
//! the imaginary part of the solution must only come from deliberately seeded
//! noise.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default lower bound on `min |g(x_j)|` accepted by [`FourierField::divide`].
pub const DEFAULT_DIVISION_FLOOR: f64 = 1e-13;

/// Absolute tolerance used when classifying a field as even and real.
pub const PARITY_TOL: f64 = 1e-13;

/// Smallest power of two that is at least `3N + 1`.
pub fn padded_grid_size(n_modes: usize) -> usize {
    (3 * n_modes + 1).next_power_of_two()
}

/// Collocation node `x_j = -π + 2πj/M`.
#[inline]
pub fn node(j: usize, m: usize) -> f64 {
    -PI + 2.0 * PI * j as f64 / m as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    EvenReal,
    GeneralComplex,
}

/// Complex samples on the equispaced grid `x_j = -π + 2πj/M`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridValues {
    values: Vec<Complex64>,
}

impl GridValues {
    pub fn new(values: Vec<Complex64>) -> Self {
        Self { values }
    }

    pub fn from_real(values: &[f64]) -> Self {
        Self { values: values.iter().map(|&v| Complex64::new(v, 0.0)).collect() }
    }

    /// Samples `f` at the `m` collocation nodes.
    pub fn from_fn(m: usize, f: impl Fn(f64) -> Complex64) -> Self {
        Self { values: (0..m).map(|j| f(node(j, m))).collect() }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn points(&self) -> Vec<f64> {
        let m = self.values.len();
        (0..m).map(|j| node(j, m)).collect()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }
}

/// Coefficients `c_{-N..=N}` of a truncated Fourier series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "FieldRepr", try_from = "FieldRepr")]
pub struct FourierField {
    n_modes: usize,
    coeffs: Vec<Complex64>,
    parity: Parity,
}

#[derive(Serialize, Deserialize)]
struct FieldRepr {
    n_modes: usize,
    coeffs: Vec<[f64; 2]>,
}

impl From<FourierField> for FieldRepr {
    fn from(f: FourierField) -> Self {
        FieldRepr { n_modes: f.n_modes, coeffs: f.coeffs.iter().map(|c| [c.re, c.im]).collect() }
    }
}

impl TryFrom<FieldRepr> for FourierField {
    type Error = Error;

    fn try_from(r: FieldRepr) -> Result<Self> {
        FourierField::new(r.n_modes, r.coeffs.into_iter().map(|[re, im]| Complex64::new(re, im)).collect())
    }
}

impl FourierField {
    pub fn new(n_modes: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != 2 * n_modes + 1 {
            return Err(Error::LengthMismatch { expected: 2 * n_modes + 1, got: coeffs.len() });
        }
        if let Some(i) = coeffs.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFiniteField { k: i as i64 - n_modes as i64 });
        }
        let parity = detect_parity(n_modes, &coeffs);
        Ok(Self { n_modes, coeffs, parity })
    }

    pub(crate) fn from_parts_unchecked(n_modes: usize, coeffs: Vec<Complex64>) -> Self {
        debug_assert_eq!(coeffs.len(), 2 * n_modes + 1);
        let parity = detect_parity(n_modes, &coeffs);
        Self { n_modes, coeffs, parity }
    }

    pub fn zeros(n_modes: usize) -> Self {
        Self { n_modes, coeffs: vec![Complex64::new(0.0, 0.0); 2 * n_modes + 1], parity: Parity::EvenReal }
    }

    pub fn constant(n_modes: usize, value: f64) -> Self {
        let mut f = Self::zeros(n_modes);
        f.coeffs[n_modes] = Complex64::new(value, 0.0);
        f
    }

    /// Real cosine series `a_0 + Σ_{k≥1} a_k cos(kx)`.
    pub fn from_cosines(n_modes: usize, cosines: &[f64]) -> Result<Self> {
        if cosines.len() > n_modes + 1 {
            return Err(Error::LengthMismatch { expected: n_modes + 1, got: cosines.len() });
        }
        let mut f = Self::zeros(n_modes);
        for (k, &a) in cosines.iter().enumerate() {
            if k == 0 {
                f.coeffs[n_modes] = Complex64::new(a, 0.0);
            } else {
                f.coeffs[n_modes + k] = Complex64::new(a / 2.0, 0.0);
                f.coeffs[n_modes - k] = Complex64::new(a / 2.0, 0.0);
            }
        }
        Ok(f)
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    /// Coefficient `c_k`; zero outside the truncation.
    pub fn coeff(&self, k: i64) -> Complex64 {
        if k.unsigned_abs() as usize > self.n_modes {
            return Complex64::new(0.0, 0.0);
        }
        self.coeffs[(k + self.n_modes as i64) as usize]
    }

    pub fn set_coeff(&mut self, k: i64, value: Complex64) {
        let idx = (k + self.n_modes as i64) as usize;
        self.coeffs[idx] = value;
        self.parity = detect_parity(self.n_modes, &self.coeffs);
    }

    /// `v(0) = Σ c_k`.
    pub fn sum(&self) -> Complex64 {
        self.coeffs.iter().sum()
    }

    /// `v(π) = Σ (-1)^k c_k`.
    pub fn alternating_sum(&self) -> Complex64 {
        let n = self.n_modes as i64;
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, &c)| if (i as i64 - n) % 2 == 0 { c } else { -c })
            .sum()
    }

    pub fn max_abs_imag(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.im.abs()))
    }

    /// True when `c_{-k}` is bitwise the conjugate of `c_k`, i.e. the
    /// function is real on the real line without any roundoff.
    pub fn is_exactly_real(&self) -> bool {
        let n = self.n_modes;
        (0..=n).all(|k| self.coeffs[n + k] == self.coeffs[n - k].conj())
    }

    /// Coefficients of the complex conjugate function, `conj(v(x))`.
    pub fn conjugate_function(&self) -> Self {
        let n = self.n_modes;
        let coeffs = (0..=2 * n).map(|i| self.coeffs[2 * n - i].conj()).collect();
        Self::from_parts_unchecked(n, coeffs)
    }

    /// Max-norm distance between coefficient vectors.
    pub fn max_distance(&self, other: &Self) -> f64 {
        self.coeffs.iter().zip(&other.coeffs).fold(0.0, |m, (a, b)| m.max((a - b).norm()))
    }

    /// Forward transform `c_k = (1/M) Σ_j v_j e^{-ikx_j}` truncated to `|k| <= n_modes`.
    pub fn analyze(values: &GridValues, n_modes: usize) -> Result<Self> {
        let m = values.len();
        check_grid(m, n_modes)?;
        let t = Transform::cached(m);
        let re: Vec<f64> = values.values.iter().map(|v| v.re).collect();
        let im: Vec<f64> = values.values.iter().map(|v| v.im).collect();
        let im = if im.iter().all(|&x| x == 0.0) { None } else { Some(im.as_slice()) };
        let mut out = vec![Complex64::new(0.0, 0.0); 2 * n_modes + 1];
        t.analyze_into(&re, im, n_modes, &mut out);
        Ok(Self::from_parts_unchecked(n_modes, out))
    }

    /// `v_j = Σ_k c_k e^{ikx_j}` on `grid_size` nodes.
    pub fn synthesize(&self, grid_size: usize) -> Result<GridValues> {
        check_grid(grid_size, self.n_modes)?;
        let samples = Transform::cached(grid_size).synthesize(&self.coeffs, self.n_modes, 0);
        Ok(GridValues::new(samples.to_complex()))
    }

    /// Spectral derivative, `c_k ↦ (ik)^order c_k`.
    pub fn differentiate(&self, order: u32) -> Result<Self> {
        if !(1..=2).contains(&order) {
            return Err(Error::UnsupportedOrder(order));
        }
        let n = self.n_modes as i64;
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, &c)| derivative_factor(i as i64 - n, order, c))
            .collect();
        Ok(Self::from_parts_unchecked(self.n_modes, coeffs))
    }

    /// Dealiased product `f g`, truncated to `|k| <= N`.
    pub fn convolve(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let n = self.n_modes;
        let t = Transform::cached(padded_grid_size(n));
        let f = t.synthesize(&self.coeffs, n, 0);
        let g = t.synthesize(&other.coeffs, n, 0);
        Ok(t.analyze_samples(&f.mul(&g), n))
    }

    /// Quotient `f / g` formed on the padded grid.
    ///
    /// Fails with [`Error::DivisorTooSmall`] when `|g|` drops below `floor`
    /// at any padded node.
    pub fn divide(&self, other: &Self, floor: f64) -> Result<Self> {
        self.check_same(other)?;
        let n = self.n_modes;
        let t = Transform::cached(padded_grid_size(n));
        let f = t.synthesize(&self.coeffs, n, 0);
        let g = t.synthesize(&other.coeffs, n, 0);
        g.check_floor(floor)?;
        Ok(t.analyze_samples(&f.div(&g), n))
    }

    /// Analytic continuation `Σ c_k e^{ikz}` at a complex point.
    pub fn eval_at(&self, z: Complex64) -> Result<Complex64> {
        let n = self.n_modes;
        let top = (0..=n).rev().find(|&k| self.coeffs[n + k] != Complex64::new(0.0, 0.0) || self.coeffs[n - k] != Complex64::new(0.0, 0.0));
        if (top.unwrap_or(0) as f64) * z.im.abs() > 700.0 {
            return Err(Error::Overflow { im: z.im, n_modes: n });
        }
        let w = (Complex64::i() * z).exp();
        let w_inv = w.inv();
        let mut pos = self.coeffs[2 * n];
        for k in (0..n).rev() {
            pos = pos * w + self.coeffs[n + k];
        }
        let mut neg = Complex64::new(0.0, 0.0);
        if n > 0 {
            neg = self.coeffs[0];
            for k in (1..n).rev() {
                neg = neg * w_inv + self.coeffs[n - k];
            }
            neg *= w_inv;
        }
        Ok(pos + neg)
    }

    /// Value at a real point.
    pub fn value_at(&self, x: f64) -> Complex64 {
        let n = self.n_modes as i64;
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, &c)| c * Complex64::from_polar(1.0, (i as i64 - n) as f64 * x))
            .sum()
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.n_modes != other.n_modes {
            return Err(Error::LengthMismatch { expected: self.coeffs.len(), got: other.coeffs.len() });
        }
        Ok(())
    }
}

fn check_grid(m: usize, n_modes: usize) -> Result<()> {
    if m < 2 * n_modes + 1 {
        return Err(Error::GridTooSmall { grid: m, n_modes, needed: 2 * n_modes + 1 });
    }
    Ok(())
}

fn detect_parity(n: usize, coeffs: &[Complex64]) -> Parity {
    let even_real = (0..=n).all(|k| {
        let (p, m) = (coeffs[n + k], coeffs[n - k]);
        p.im.abs() <= PARITY_TOL && m.im.abs() <= PARITY_TOL && (p.re - m.re).abs() <= PARITY_TOL
    });
    if even_real {
        Parity::EvenReal
    } else {
        Parity::GeneralComplex
    }
}

#[inline]
pub(crate) fn derivative_factor(k: i64, order: u32, c: Complex64) -> Complex64 {
    let kf = k as f64;
    match order {
        0 => c,
        1 => Complex64::new(-c.im * kf, c.re * kf),
        _ => c * (-kf * kf),
    }
}

/// Real and imaginary parts of samples; `im == None` means identically zero.
#[derive(Debug, Clone)]
pub(crate) struct Samples {
    pub re: Vec<f64>,
    pub im: Option<Vec<f64>>,
}

impl Samples {
    pub fn len(&self) -> usize {
        self.re.len()
    }

    #[inline]
    pub fn at(&self, j: usize) -> Complex64 {
        Complex64::new(self.re[j], self.im.as_ref().map_or(0.0, |im| im[j]))
    }

    pub fn to_complex(&self) -> Vec<Complex64> {
        (0..self.len()).map(|j| self.at(j)).collect()
    }

    pub fn from_complex(values: &[Complex64]) -> Self {
        let re = values.iter().map(|v| v.re).collect();
        let im: Vec<f64> = values.iter().map(|v| v.im).collect();
        let im = if im.iter().all(|&x| x == 0.0) { None } else { Some(im) };
        Self { re, im }
    }

    fn zip_with(&self, other: &Self, op: impl Fn(Complex64, Complex64) -> Complex64, real_op: impl Fn(f64, f64) -> f64) -> Self {
        if self.im.is_none() && other.im.is_none() {
            let re = self.re.iter().zip(&other.re).map(|(&a, &b)| real_op(a, b)).collect();
            return Self { re, im: None };
        }
        let vals: Vec<Complex64> = (0..self.len()).map(|j| op(self.at(j), other.at(j))).collect();
        Self::from_complex(&vals)
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a * b, |a, b| a * b)
    }

    pub fn div(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a / b, |a, b| a / b)
    }

    /// Errors if any `|v_j| < floor`, reporting the worst node.
    pub fn check_floor(&self, floor: f64) -> Result<()> {
        let m = self.len();
        let (j, min_abs) = (0..m)
            .map(|j| (j, self.at(j).norm()))
            .fold((0, f64::INFINITY), |acc, (j, a)| if a < acc.1 { (j, a) } else { acc });
        if min_abs < floor || !min_abs.is_finite() {
            return Err(Error::DivisorTooSmall { min_abs, x: node(j, m) });
        }
        Ok(())
    }
}

/// Cached real-FFT plans for one grid size.
pub(crate) struct Transform {
    m: usize,
    forward: Arc<dyn RealToComplex<f64>>,
    inverse: Arc<dyn ComplexToReal<f64>>,
}

impl Transform {
    pub fn cached(m: usize) -> Arc<Transform> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Transform>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut map = cache.lock().unwrap_or_else(|e| e.into_inner());
        map.entry(m)
            .or_insert_with(|| {
                let mut planner = RealFftPlanner::<f64>::new();
                Arc::new(Transform { m, forward: planner.plan_fft_forward(m), inverse: planner.plan_fft_inverse(m) })
            })
            .clone()
    }

    /// Samples of `Σ (ik)^order c_k e^{ikx_j}`.
    pub fn synthesize(&self, coeffs: &[Complex64], n: usize, order: u32) -> Samples {
        let mut re = vec![0.0; self.m];
        let mut im = vec![0.0; self.m];
        let has_im = self.synthesize_into(coeffs, n, order, &mut re, &mut im);
        Samples { re, im: has_im.then_some(im) }
    }

    /// Writes real and imaginary sample parts; returns false (and leaves `im`
    /// zeroed) when the imaginary part vanishes identically.
    pub fn synthesize_into(&self, coeffs: &[Complex64], n: usize, order: u32, re: &mut [f64], im: &mut [f64]) -> bool {
        let half = self.m / 2 + 1;
        let mut p = vec![Complex64::new(0.0, 0.0); half];
        let mut q = vec![Complex64::new(0.0, 0.0); half];
        let mut q_zero = true;
        for k in 0..=n {
            let ck = derivative_factor(k as i64, order, coeffs[n + k]);
            let cmk = derivative_factor(-(k as i64), order, coeffs[n - k]).conj();
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            p[k] = (ck + cmk) * (0.5 * sign);
            let d = ck - cmk;
            // (d / 2i) without a complex division
            q[k] = Complex64::new(d.im, -d.re) * (0.5 * sign);
            q_zero &= q[k] == Complex64::new(0.0, 0.0);
        }
        p[0].im = 0.0;
        q[0].im = 0.0;
        self.inverse.process(&mut p, re).expect("c2r length");
        if q_zero {
            im.iter_mut().for_each(|x| *x = 0.0);
            false
        } else {
            self.inverse.process(&mut q, im).expect("c2r length");
            true
        }
    }

    pub fn analyze_samples(&self, s: &Samples, n: usize) -> FourierField {
        let mut out = vec![Complex64::new(0.0, 0.0); 2 * n + 1];
        self.analyze_into(&s.re, s.im.as_deref(), n, &mut out);
        FourierField::from_parts_unchecked(n, out)
    }

    /// Coefficients `k = -n..=n` of samples `re + i im`.
    pub fn analyze_into(&self, re: &[f64], im: Option<&[f64]>, n: usize, out: &mut [Complex64]) {
        let half = self.m / 2 + 1;
        let scale = 1.0 / self.m as f64;
        let mut buf = re.to_vec();
        let mut p = vec![Complex64::new(0.0, 0.0); half];
        self.forward.process(&mut buf, &mut p).expect("r2c length");
        let mut q = vec![Complex64::new(0.0, 0.0); half];
        if let Some(im) = im {
            buf.copy_from_slice(im);
            self.forward.process(&mut buf, &mut q).expect("r2c length");
        }
        for k in 0..=n {
            let s = if k % 2 == 0 { scale } else { -scale };
            let (pk, qk) = (p[k], q[k]);
            out[n + k] = Complex64::new(pk.re - qk.im, pk.im + qk.re) * s;
            if k > 0 {
                out[n - k] = Complex64::new(pk.re + qk.im, qk.re - pk.im) * s;
            }
        }
    }
}
