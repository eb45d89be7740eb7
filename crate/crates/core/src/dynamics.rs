//! Planar maneuvering models of a surface vessel and of its circular-hull
//! simplification (the "hovercraft").
//!
//! All forces and moments are normalized by the effective mass or inertia, so
//! the controls are accelerations. The disturbance is a constant force given in
//! the inertial frame and rotated into the body frame before it is added to the
//! surge and sway equations.

use crate::error::{HeolError, Result};

/// Physical vessel parameters with added-mass and linear damping terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    pub m: f64,
    pub iz: f64,
    pub x_udot: f64,
    pub y_vdot: f64,
    pub n_rdot: f64,
    pub du: f64,
    pub dv: f64,
    pub dr: f64,
}

/// Reduced coefficients of the normalized surface vessel model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VesselParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub beta_u: f64,
    pub beta_v: f64,
    pub gamma: f64,
}

impl VesselParams {
    /// Circular hull: equal added masses in surge and sway, equal damping.
    pub fn hovercraft(beta: f64, gamma: f64) -> Self {
        Self { a: 1.0, b: -1.0, c: 0.0, beta_u: beta, beta_v: beta, gamma }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.a, self.b, self.c, self.beta_u, self.beta_v, self.gamma];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(HeolError::InvalidParams("non-finite vessel coefficient".into()));
        }
        if self.beta_u <= 0.0 || self.beta_v <= 0.0 || self.gamma <= 0.0 {
            return Err(HeolError::InvalidParams(format!(
                "damping must be positive (beta_u = {}, beta_v = {}, gamma = {})",
                self.beta_u, self.beta_v, self.gamma
            )));
        }
        if self.a <= 0.0 {
            return Err(HeolError::InvalidParams(format!("mass ratio a = {} must be positive", self.a)));
        }
        Ok(())
    }

    pub fn is_hovercraft(&self) -> bool {
        self.a == 1.0 && self.b == -1.0 && self.c == 0.0 && self.beta_u == self.beta_v
    }
}

/// Reduces physical parameters to the normalized model coefficients.
pub fn reduce_params(p: &PhysicalParams) -> Result<VesselParams> {
    let mu = p.m - p.x_udot;
    let mv = p.m - p.y_vdot;
    let ir = p.iz - p.n_rdot;
    for (name, d) in [("m - Xudot", mu), ("m - Yvdot", mv), ("Iz - Nrdot", ir)] {
        if d <= 0.0 || !d.is_finite() {
            return Err(HeolError::InvalidParams(format!("{name} = {d} must be positive")));
        }
    }
    let a = mv / mu;
    Ok(VesselParams {
        a,
        b: -1.0 / a,
        c: (p.x_udot - p.y_vdot) / ir,
        beta_u: p.du / mu,
        beta_v: p.dv / mv,
        gamma: p.dr / ir,
    })
}

/// Pose in the inertial frame and velocities in the body frame.
///
/// `psi` is kept unwrapped.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct VesselState {
    pub x: f64,
    pub y: f64,
    pub psi: f64,
    pub u: f64,
    pub v: f64,
    pub r: f64,
}

impl VesselState {
    pub fn to_array(self) -> [f64; 6] {
        [self.x, self.y, self.psi, self.u, self.v, self.r]
    }

    pub fn from_array(a: [f64; 6]) -> Self {
        Self { x: a[0], y: a[1], psi: a[2], u: a[3], v: a[4], r: a[5] }
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }

    /// Inertial-frame velocity.
    pub fn inertial_velocity(&self) -> (f64, f64) {
        body_to_inertial_velocity(self)
    }
}

/// Time derivative of a [`VesselState`].
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct VesselStateDerivative {
    pub x_dot: f64,
    pub y_dot: f64,
    pub psi_dot: f64,
    pub u_dot: f64,
    pub v_dot: f64,
    pub r_dot: f64,
}

impl VesselStateDerivative {
    pub fn to_array(self) -> [f64; 6] {
        [self.x_dot, self.y_dot, self.psi_dot, self.u_dot, self.v_dot, self.r_dot]
    }
}

/// Normalized surge force and yaw moment.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ControlInputs {
    pub fu: f64,
    pub gamma_r: f64,
}

/// Normalized disturbance force expressed in the inertial frame.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct InertialForce {
    pub fx: f64,
    pub fy: f64,
}

impl InertialForce {
    pub const ZERO: Self = Self { fx: 0.0, fy: 0.0 };

    /// Components in a body frame rotated by `psi`.
    pub fn to_body(self, psi: f64) -> (f64, f64) {
        let (s, c) = psi.sin_cos();
        (self.fx * c + self.fy * s, -self.fx * s + self.fy * c)
    }
}

pub fn body_to_inertial_velocity(s: &VesselState) -> (f64, f64) {
    let (sin, cos) = s.psi.sin_cos();
    (s.u * cos - s.v * sin, s.u * sin + s.v * cos)
}

pub fn surface_vessel_derivative(
    s: &VesselState,
    ctrl: &ControlInputs,
    p: &VesselParams,
    wind: &InertialForce,
) -> VesselStateDerivative {
    let (x_dot, y_dot) = body_to_inertial_velocity(s);
    let (wind_u, wind_v) = wind.to_body(s.psi);
    VesselStateDerivative {
        x_dot,
        y_dot,
        psi_dot: s.r,
        u_dot: ctrl.fu + p.a * s.v * s.r - p.beta_u * s.u + wind_u,
        v_dot: p.b * s.u * s.r - p.beta_v * s.v + wind_v,
        r_dot: ctrl.gamma_r + p.c * s.u * s.v - p.gamma * s.r,
    }
}

pub fn hovercraft_derivative(
    s: &VesselState,
    ctrl: &ControlInputs,
    beta: f64,
    gamma: f64,
    wind: &InertialForce,
) -> VesselStateDerivative {
    surface_vessel_derivative(s, ctrl, &VesselParams::hovercraft(beta, gamma), wind)
}

/// The plant a scenario integrates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PlantModel {
    Hovercraft { beta: f64, gamma: f64 },
    SurfaceVessel(VesselParams),
}

impl PlantModel {
    pub fn params(&self) -> VesselParams {
        match *self {
            PlantModel::Hovercraft { beta, gamma } => VesselParams::hovercraft(beta, gamma),
            PlantModel::SurfaceVessel(p) => p,
        }
    }

    pub fn gamma(&self) -> f64 {
        self.params().gamma
    }

    pub fn derivative(&self, s: &VesselState, ctrl: &ControlInputs, wind: &InertialForce) -> VesselStateDerivative {
        match self {
            PlantModel::Hovercraft { beta, gamma } => hovercraft_derivative(s, ctrl, *beta, *gamma, wind),
            PlantModel::SurfaceVessel(p) => surface_vessel_derivative(s, ctrl, p, wind),
        }
    }
}
