//! Inner-loop heading autopilot: PID on the wrapped heading error with rate
//! feedback on the D term.

use std::f64::consts::{PI, TAU};

use crate::error::{HeolError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AutopilotGains {
    pub kp: f64,
    pub kd: f64,
    pub ki: f64,
}

impl Default for AutopilotGains {
    fn default() -> Self {
        Self { kp: 25.0, kd: 10.0, ki: 0.0 }
    }
}

impl AutopilotGains {
    pub fn validate(&self) -> Result<()> {
        if !(self.kp > 0.0 && self.kd > 0.0 && self.ki >= 0.0) || !(self.kp + self.kd + self.ki).is_finite() {
            return Err(HeolError::InvalidParams(format!(
                "autopilot gains need Kp > 0, Kd > 0, Ki >= 0 (got {}, {}, {})",
                self.kp, self.kd, self.ki
            )));
        }
        Ok(())
    }
}

/// Maps an angle to `(−π, π]`.
pub fn wrap_to_pi(angle: f64) -> f64 {
    let w = angle.rem_euclid(TAU);
    if w > PI {
        w - TAU
    } else {
        w
    }
}

/// Trapezoidal integrator of the heading error.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct IntegratorState {
    pub integral: f64,
    last_err: Option<f64>,
}

pub fn autopilot_step(
    psi_ref: f64,
    psi: f64,
    r: f64,
    gains: &AutopilotGains,
    integ: &mut IntegratorState,
    dt: f64,
) -> f64 {
    let err = wrap_to_pi(psi_ref - psi);
    if let Some(prev) = integ.last_err {
        integ.integral += 0.5 * (prev + err) * dt;
    }
    integ.last_err = Some(err);
    gains.kp * err - gains.kd * r + gains.ki * integ.integral
}

#[derive(Debug, Clone, Default)]
pub struct HeadingAutopilot {
    pub gains: AutopilotGains,
    pub state: IntegratorState,
}

impl HeadingAutopilot {
    pub fn new(gains: AutopilotGains) -> Self {
        Self { gains, state: IntegratorState::default() }
    }

    pub fn step(&mut self, psi_ref: f64, psi: f64, r: f64, dt: f64) -> f64 {
        autopilot_step(psi_ref, psi, r, &self.gains, &mut self.state, dt)
    }
}
