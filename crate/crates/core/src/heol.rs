//! Model-free outer loop: per-axis homeostat `ë = F + Δw` closed with an
//! intelligent PD and an algebraic estimate of `F` over a sliding window.
//!
//! The tracking error is `e = ζ* − ζ` and the Brunovský input is
//! `w = ζ̈* − Δw`. On the plant `ζ̈ = w + d` this gives `F = −d`, so the
//! disturbance estimate reported to callers is `−F̂`.
//!
//! Two feedback variants are provided. [`HeolVariant::WithDerivative`] uses
//! `Δw = −(Kp e + Kd ė + F̂)` with `F̂` estimated from `e`.
//! [`HeolVariant::Riachy`] estimates `𝓕 = F + Kd ė` from the signal
//! `Y = e + Kd ∫e` and uses `Δw = −(𝓕̂ + Kp e)`, so `ė` is never needed.

use std::collections::VecDeque;

use crate::error::{HeolError, Result};
use crate::flatness::BrunovskyInputs;
use crate::trajectory::ReferencePoint;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IpdGains {
    pub kp: f64,
    pub kd: f64,
}

impl Default for IpdGains {
    fn default() -> Self {
        Self { kp: 1.0, kd: 2.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HeolVariant {
    WithDerivative,
    #[default]
    Riachy,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeolConfig {
    /// Shared by both axes.
    pub gains: IpdGains,
    /// Estimation horizon `T` in seconds.
    pub horizon: f64,
    pub variant: HeolVariant,
    /// Controller period in seconds.
    pub dt: f64,
}

impl Default for HeolConfig {
    fn default() -> Self {
        Self { gains: IpdGains::default(), horizon: 1.0, variant: HeolVariant::default(), dt: 1e-3 }
    }
}

impl HeolConfig {
    pub fn validate(&self) -> Result<()> {
        let IpdGains { kp, kd } = self.gains;
        if !(kp > 0.0 && kd > 0.0) || !kp.is_finite() || !kd.is_finite() {
            return Err(HeolError::InvalidParams(format!("iPD gains must be positive (Kp = {kp}, Kd = {kd})")));
        }
        if self.dt <= 0.0 || !self.dt.is_finite() {
            return Err(HeolError::InvalidParams(format!("controller period {} must be positive", self.dt)));
        }
        if self.horizon < 10.0 * self.dt * (1.0 - 1e-9) || !self.horizon.is_finite() {
            return Err(HeolError::InvalidParams(format!(
                "estimation horizon {} must cover at least 10 controller periods of {}",
                self.horizon, self.dt
            )));
        }
        Ok(())
    }

    /// Number of samples held by the sliding window, `ceil(T/dt) + 1`.
    pub fn window_len(&self) -> usize {
        let n = self.horizon / self.dt;
        // tolerate representation error when T is a multiple of dt
        let n = if (n - n.round()).abs() < 1e-9 * n { n.round() } else { n.ceil() };
        n as usize + 1
    }
}

/// One window entry. `delta_w` is the correction applied from `t` onwards.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub signal: f64,
    pub delta_w: f64,
}

/// Nominal Brunovský inputs: the reference accelerations.
pub fn nominal_control(reference: &ReferencePoint) -> BrunovskyInputs {
    BrunovskyInputs { wx: reference.x[2], wy: reference.y[2] }
}

/// Weight of the signal in the estimation kernel, without the `60/T⁵` factor.
#[inline]
fn signal_kernel(sigma: f64, horizon: f64) -> f64 {
    let rest = horizon - sigma;
    rest * rest - 4.0 * rest * sigma + sigma * sigma
}

/// Weight of the input in the estimation kernel, without the `60/T⁵` factor.
/// Zero at both ends of the window.
#[inline]
fn input_kernel(sigma: f64, horizon: f64) -> f64 {
    let rest = horizon - sigma;
    -0.5 * rest * rest * sigma * sigma
}

/// Algebraic estimate of `F` in `g̈ = F + Δw` from the samples in `[now − T, now]`,
/// by composite trapezoid over the sample times.
///
/// The signal is detrended by the line through its first and last window
/// samples before integration. The kernel annihilates affine signals, so this
/// leaves the exact integral unchanged, but it keeps large offsets (such as the
/// running integral inside `Y = e + Kd ∫e`) out of the quadrature error.
///
/// `window` must be time-ordered. Samples after `now` are ignored.
pub fn estimate_f(window: &[Sample], horizon: f64, now: f64) -> Result<f64> {
    let tol = 1e-9 * horizon.max(now.abs());
    let start = now - horizon;
    let used: Vec<&Sample> = window.iter().filter(|s| s.t >= start - tol && s.t <= now + tol).collect();
    let (Some(first), Some(last)) = (used.first(), used.last()) else {
        return Err(HeolError::WindowNotWarm { span: 0.0, horizon });
    };
    let span = last.t - first.t;
    if span < horizon - tol || (now - last.t).abs() > tol {
        return Err(HeolError::WindowNotWarm { span, horizon });
    }
    let slope = (last.signal - first.signal) / span;
    let integrand = |s: &Sample| {
        let sigma = s.t - start;
        let detrended = s.signal - first.signal - slope * (s.t - first.t);
        signal_kernel(sigma, horizon) * detrended + input_kernel(sigma, horizon) * s.delta_w
    };
    let acc: f64 =
        used.windows(2).map(|pair| 0.5 * (pair[1].t - pair[0].t) * (integrand(pair[0]) + integrand(pair[1]))).sum();
    Ok(60.0 / horizon.powi(5) * acc)
}

/// Precomputed weights of [`estimate_f`] for a uniform window, with the
/// detrending folded into the two end weights.
#[derive(Debug, Clone)]
pub struct KernelWeights {
    horizon: f64,
    signal: Vec<f64>,
    input: Vec<f64>,
}

impl KernelWeights {
    pub fn new(horizon: f64, len: usize) -> Self {
        assert!(len >= 2, "window needs at least two samples");
        let h = horizon / (len - 1) as f64;
        let scale = 60.0 / horizon.powi(5);
        let mut signal = Vec::with_capacity(len);
        let mut input = Vec::with_capacity(len);
        for j in 0..len {
            let sigma = j as f64 * h;
            let trap = if j == 0 || j == len - 1 { 0.5 * h } else { h };
            signal.push(scale * trap * signal_kernel(sigma, horizon));
            input.push(scale * trap * input_kernel(sigma, horizon));
        }
        // g_j - g_0 - (g_N - g_0) σ_j / T
        let sum: f64 = signal.iter().sum();
        let first_moment: f64 = signal.iter().enumerate().map(|(j, w)| w * j as f64 * h).sum::<f64>() / horizon;
        signal[0] += first_moment - sum;
        signal[len - 1] -= first_moment;
        Self { horizon, signal, input }
    }

    pub fn len(&self) -> usize {
        self.signal.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signal.is_empty()
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Estimate from exactly `len()` uniformly spaced samples, oldest first.
    pub fn apply<'a>(&self, window: impl IntoIterator<Item = &'a Sample>) -> f64 {
        window
            .into_iter()
            .zip(self.signal.iter().zip(&self.input))
            .map(|(s, (ws, wi))| ws * s.signal + wi * s.delta_w)
            .sum()
    }
}

pub fn ipd_delta(e: f64, e_dot: f64, f_hat: f64, gains: IpdGains) -> f64 {
    -(gains.kp * e + gains.kd * e_dot + f_hat)
}

pub fn ipd_delta_riachy(e: f64, fcal_hat: f64, kp: f64) -> f64 {
    -(fcal_hat + kp * e)
}

/// Memory of one axis of the homeostat.
#[derive(Debug, Clone, Default)]
pub struct HeolAxisState {
    pub window: VecDeque<Sample>,
    /// Trapezoidal `∫e` since the first sample.
    pub integral_acc: f64,
    /// Last homeostat estimate (`F̂`, or `𝓕̂` for the Riachy variant).
    pub last_f_hat: f64,
    last_e: Option<f64>,
}

impl HeolAxisState {
    pub fn with_capacity(len: usize) -> Self {
        Self { window: VecDeque::with_capacity(len), ..Default::default() }
    }
}

/// Advances `∫e` by one trapezoid and returns `Y = e + Kd ∫e`.
pub fn riachy_signal(state: &mut HeolAxisState, e: f64, kd: f64, dt: f64) -> f64 {
    if let Some(prev) = state.last_e {
        state.integral_acc += 0.5 * (prev + e) * dt;
    }
    state.last_e = Some(e);
    e + kd * state.integral_acc
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisOutput {
    pub e: f64,
    pub delta_w: f64,
    /// Homeostat estimate used in the control law.
    pub f_hat: f64,
}

fn axis_step(
    cfg: &HeolConfig,
    weights: &KernelWeights,
    state: &mut HeolAxisState,
    t: f64,
    e: f64,
    e_dot: f64,
) -> AxisOutput {
    let signal = match cfg.variant {
        HeolVariant::WithDerivative => e,
        HeolVariant::Riachy => riachy_signal(state, e, cfg.gains.kd, cfg.dt),
    };
    if let Some(last) = state.window.back() {
        debug_assert!(t > last.t, "window timestamps must increase");
    }
    if state.window.len() == weights.len() {
        state.window.pop_front();
    }
    // The input weight vanishes at the newest sample, so the placeholder does
    // not enter the estimate.
    state.window.push_back(Sample { t, signal, delta_w: 0.0 });

    let f_hat = if state.window.len() == weights.len() { weights.apply(&state.window) } else { 0.0 };
    let delta_w = match cfg.variant {
        HeolVariant::WithDerivative => ipd_delta(e, e_dot, f_hat, cfg.gains),
        HeolVariant::Riachy => ipd_delta_riachy(e, f_hat, cfg.gains.kp),
    };
    if let Some(last) = state.window.back_mut() {
        last.delta_w = delta_w;
    }
    state.last_f_hat = f_hat;
    AxisOutput { e, delta_w, f_hat }
}

/// Position and inertial velocity fed to the outer loop.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Measurement {
    pub x: f64,
    pub y: f64,
    pub vx: f64,
    pub vy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeolOutput {
    pub w: BrunovskyInputs,
    pub x: AxisOutput,
    pub y: AxisOutput,
}

impl HeolOutput {
    /// Estimated additive disturbance on each axis (`−F̂`).
    pub fn disturbance(&self) -> (f64, f64) {
        (-self.x.f_hat, -self.y.f_hat)
    }
}

/// The two-axis HEOL outer loop.
#[derive(Debug, Clone)]
pub struct HeolController {
    cfg: HeolConfig,
    weights: KernelWeights,
    x: HeolAxisState,
    y: HeolAxisState,
}

impl HeolController {
    pub fn new(cfg: HeolConfig) -> Result<Self> {
        cfg.validate()?;
        let len = cfg.window_len();
        // the uniform weights assume the window spans exactly (len - 1) periods
        let weights = KernelWeights::new(cfg.dt * (len - 1) as f64, len);
        Ok(Self { cfg, weights, x: HeolAxisState::with_capacity(len), y: HeolAxisState::with_capacity(len) })
    }

    pub fn config(&self) -> &HeolConfig {
        &self.cfg
    }

    pub fn axis_states(&self) -> (&HeolAxisState, &HeolAxisState) {
        (&self.x, &self.y)
    }

    /// One controller period. Must be called every `cfg.dt` seconds.
    pub fn step(&mut self, reference: &ReferencePoint, meas: &Measurement) -> HeolOutput {
        let t = reference.t;
        let ex = reference.x[0] - meas.x;
        let ey = reference.y[0] - meas.y;
        let ex_dot = reference.x[1] - meas.vx;
        let ey_dot = reference.y[1] - meas.vy;
        let x = axis_step(&self.cfg, &self.weights, &mut self.x, t, ex, ex_dot);
        let y = axis_step(&self.cfg, &self.weights, &mut self.y, t, ey, ey_dot);
        let nominal = nominal_control(reference);
        HeolOutput { w: BrunovskyInputs { wx: nominal.wx - x.delta_w, wy: nominal.wy - y.delta_w }, x, y }
    }
}
