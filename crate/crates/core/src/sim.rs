//! Fixed-step closed-loop simulation of the guidance cascade:
//! HEOL outer loop → heading autopilot → vessel model, under a constant
//! inertial disturbance.

use crate::autopilot::{AutopilotGains, HeadingAutopilot};
use crate::dynamics::{ControlInputs, InertialForce, PlantModel, VesselParams, VesselState, VesselStateDerivative};
use crate::error::{HeolError, Result};
use crate::flatness::{physical_from_brunovsky, unwrap_heading, BrunovskyInputs};
use crate::heol::{HeolConfig, HeolController, Measurement};
use crate::trajectory::{ReferencePoint, TrajectorySpec};

/// Classical RK4 step of `ds/dt = f(t, s)`.
///
/// Zero-order-hold inputs are obtained by letting `f` ignore `t`.
pub fn rk4_step<F>(f: F, t: f64, state: &VesselState, dt: f64) -> Result<VesselState>
where
    F: Fn(f64, &VesselState) -> VesselStateDerivative,
{
    let s0 = state.to_array();
    let shifted = |k: &[f64; 6], h: f64| {
        let mut out = s0;
        for (o, d) in out.iter_mut().zip(k) {
            *o += h * d;
        }
        VesselState::from_array(out)
    };
    let k1 = f(t, state).to_array();
    let k2 = f(t + 0.5 * dt, &shifted(&k1, 0.5 * dt)).to_array();
    let k3 = f(t + 0.5 * dt, &shifted(&k2, 0.5 * dt)).to_array();
    let k4 = f(t + dt, &shifted(&k3, dt)).to_array();
    let mut next = s0;
    for i in 0..6 {
        next[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    let next = VesselState::from_array(next);
    if !next.is_finite() {
        return Err(HeolError::NonFiniteState { t: t + dt, state: format!("{next:?}") });
    }
    Ok(next)
}

/// How the heading reference reaches the vessel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HeadingMode {
    Autopilot(AutopilotGains),
    /// Heading is set to the reference at every plant step, keeping the
    /// inertial velocity; approximates an infinitely fast inner loop.
    Ideal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub model: PlantModel,
    /// Damping assumed by the guidance law; may differ from the plant's.
    pub controller_beta: f64,
    pub trajectory: TrajectorySpec,
    pub wind: InertialForce,
    pub initial_state: VesselState,
    pub heol: HeolConfig,
    pub heading: HeadingMode,
    pub duration: f64,
    pub dt_plant: f64,
    /// The controller runs on every k-th plant step.
    pub control_decimation: usize,
    /// Error norm used for `RunMetrics::convergence_time`.
    pub convergence_threshold: f64,
}

impl ScenarioConfig {
    /// Hovercraft on the line `x* = 2t` with a 10 m lateral offset and a
    /// −50 normalized force along the inertial y axis.
    pub fn hovercraft_line() -> Self {
        Self {
            model: PlantModel::Hovercraft { beta: 10.0, gamma: 1.0 },
            controller_beta: 10.0,
            trajectory: TrajectorySpec::Line { speed: 2.0 },
            wind: InertialForce { fx: 0.0, fy: -50.0 },
            initial_state: VesselState { y: 10.0, u: 2.0, ..Default::default() },
            heol: HeolConfig::default(),
            heading: HeadingMode::Autopilot(AutopilotGains::default()),
            duration: 60.0,
            dt_plant: 1e-3,
            control_decimation: 1,
            convergence_threshold: 0.1,
        }
    }

    /// Otter-like vessel on a 50 m circle with a 15 m offset along x and
    /// the same disturbance; the guidance uses the surge damping.
    pub fn otter_circle() -> Self {
        let radius = 50.0;
        let omega = 0.02;
        Self {
            model: PlantModel::SurfaceVessel(VesselParams {
                a: 0.58,
                b: -1.72,
                c: -0.7,
                beta_u: 10.0,
                beta_v: 15.0,
                gamma: 1.0,
            }),
            controller_beta: 10.0,
            trajectory: TrajectorySpec::Circle { center: (0.0, 0.0), radius, omega, phase: 0.0 },
            wind: InertialForce { fx: 0.0, fy: -50.0 },
            initial_state: VesselState {
                x: radius + 15.0,
                psi: std::f64::consts::FRAC_PI_2,
                u: radius * omega,
                ..Default::default()
            },
            heol: HeolConfig::default(),
            heading: HeadingMode::Autopilot(AutopilotGains::default()),
            // one period plus 20 %
            duration: 1.2 * std::f64::consts::TAU / omega,
            dt_plant: 1e-3,
            control_decimation: 1,
            convergence_threshold: 0.1,
        }
    }

    pub fn control_period(&self) -> f64 {
        self.dt_plant * self.control_decimation as f64
    }

    pub fn steps(&self) -> usize {
        (self.duration / self.dt_plant).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(HeolError::InvalidParams(msg));
        if self.dt_plant <= 0.0 || !self.dt_plant.is_finite() {
            return bad(format!("dt_plant = {} must be positive", self.dt_plant));
        }
        if self.duration <= 0.0 || !self.duration.is_finite() {
            return bad(format!("duration = {} must be positive", self.duration));
        }
        if self.control_decimation == 0 {
            return bad("control_decimation must be at least 1".into());
        }
        if self.controller_beta <= 0.0 || !self.controller_beta.is_finite() {
            return bad(format!("controller_beta = {} must be positive", self.controller_beta));
        }
        let period = self.control_period();
        if (self.heol.dt - period).abs() > 1e-9 * period {
            return bad(format!("heol.dt = {} does not match the control period {period}", self.heol.dt));
        }
        if !self.initial_state.is_finite() {
            return bad("initial state is not finite".into());
        }
        if !(self.wind.fx.is_finite() && self.wind.fy.is_finite()) {
            return bad("wind is not finite".into());
        }
        self.model.params().validate()?;
        self.trajectory.validate()?;
        self.heol.validate()?;
        if let HeadingMode::Autopilot(g) = &self.heading {
            g.validate()?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogRecord {
    pub t: f64,
    pub state: VesselState,
    pub reference: ReferencePoint,
    pub e_x: f64,
    pub e_y: f64,
    /// Estimated disturbance on each axis.
    pub f_hat_x: f64,
    pub f_hat_y: f64,
    pub w: BrunovskyInputs,
    pub fu: f64,
    pub psi_ref: f64,
    pub gamma_r: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunLog {
    pub records: Vec<LogRecord>,
    /// Times at which the heading reference was undefined and held.
    pub singular_events: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunMetrics {
    pub rms_error_x: f64,
    pub rms_error_y: f64,
    pub max_abs_error_x: f64,
    pub max_abs_error_y: f64,
    /// `None` when the error never settles below the threshold.
    pub convergence_time: Option<f64>,
    pub f_hat_x_mean: f64,
    pub f_hat_y_mean: f64,
    pub f_hat_x_std: f64,
    pub f_hat_y_std: f64,
    pub singular_events: usize,
}

fn mean_std(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.clone().count().max(1) as f64;
    let mean = values.clone().sum::<f64>() / n;
    let var = values.map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Error and estimate statistics over the second half of the run.
pub fn compute_metrics(log: &RunLog, threshold: f64) -> RunMetrics {
    let records = &log.records;
    let t_end = records.last().map_or(0.0, |r| r.t);
    let tail: Vec<&LogRecord> = records.iter().filter(|r| r.t >= 0.5 * t_end).collect();
    let n = tail.len().max(1) as f64;
    let rms = |f: fn(&LogRecord) -> f64| (tail.iter().map(|r| f(r).powi(2)).sum::<f64>() / n).sqrt();
    let max_abs = |f: fn(&LogRecord) -> f64| tail.iter().map(|r| f(r).abs()).fold(0.0, f64::max);
    let (fx_mean, fx_std) = mean_std(tail.iter().map(|r| r.f_hat_x));
    let (fy_mean, fy_std) = mean_std(tail.iter().map(|r| r.f_hat_y));

    let converged = |r: &LogRecord| r.e_x.hypot(r.e_y) < threshold;
    let convergence_time = match records.iter().rposition(|r| !converged(r)) {
        None => records.first().map(|r| r.t),
        Some(i) if i + 1 < records.len() => Some(records[i + 1].t),
        Some(_) => None,
    };

    RunMetrics {
        rms_error_x: rms(|r| r.e_x),
        rms_error_y: rms(|r| r.e_y),
        max_abs_error_x: max_abs(|r| r.e_x),
        max_abs_error_y: max_abs(|r| r.e_y),
        convergence_time,
        f_hat_x_mean: fx_mean,
        f_hat_y_mean: fy_mean,
        f_hat_x_std: fx_std,
        f_hat_y_std: fy_std,
        singular_events: log.singular_events.len(),
    }
}

/// Rotates the body velocity so the inertial velocity is preserved under a
/// new heading.
fn reorient(state: &VesselState, psi: f64) -> VesselState {
    let (vx, vy) = state.inertial_velocity();
    let (s, c) = psi.sin_cos();
    VesselState { psi, u: vx * c + vy * s, v: -vx * s + vy * c, r: 0.0, ..*state }
}

pub fn run_scenario(cfg: &ScenarioConfig) -> Result<(RunLog, RunMetrics)> {
    cfg.validate()?;
    let n = cfg.steps();
    let dt = cfg.dt_plant;
    let mut heol = HeolController::new(cfg.heol)?;
    let mut autopilot = match cfg.heading {
        HeadingMode::Autopilot(g) => Some(HeadingAutopilot::new(g)),
        HeadingMode::Ideal => None,
    };

    let mut log = RunLog { records: Vec::with_capacity(n + 1), singular_events: Vec::new() };
    let mut state = cfg.initial_state;
    let mut psi_ref = state.psi;
    let mut fu = 0.0;
    let mut w = BrunovskyInputs::default();
    let (mut e, mut f_hat) = ((0.0, 0.0), (0.0, 0.0));

    for i in 0..=n {
        let t = i as f64 * dt;
        let reference = cfg.trajectory.sample(t);

        if i % cfg.control_decimation == 0 {
            let (vx, vy) = state.inertial_velocity();
            let out = heol.step(&reference, &Measurement { x: state.x, y: state.y, vx, vy });
            w = out.w;
            e = (out.x.e, out.y.e);
            f_hat = out.disturbance();
            match physical_from_brunovsky(w, reference.x[1], reference.y[1], cfg.controller_beta) {
                Ok((psi, force)) => {
                    psi_ref = unwrap_heading(psi_ref, psi);
                    fu = force;
                }
                Err(HeolError::Singularity { .. }) => {
                    fu = 0.0;
                    log.singular_events.push(t);
                }
                Err(other) => return Err(other),
            }
        }

        let gamma_r = match autopilot.as_mut() {
            Some(ap) => ap.step(psi_ref, state.psi, state.r, dt),
            None => {
                state = reorient(&state, psi_ref);
                0.0
            }
        };

        log.records.push(LogRecord {
            t,
            state,
            reference,
            e_x: e.0,
            e_y: e.1,
            f_hat_x: f_hat.0,
            f_hat_y: f_hat.1,
            w,
            fu,
            psi_ref,
            gamma_r,
        });

        if i < n {
            let ctrl = ControlInputs { fu, gamma_r };
            state = rk4_step(|_, s| cfg.model.derivative(s, &ctrl, &cfg.wind), t, &state, dt)?;
        }
    }

    let metrics = compute_metrics(&log, cfg.convergence_threshold);
    Ok((log, metrics))
}
