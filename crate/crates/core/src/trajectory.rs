//! Analytic flat-output references with exact derivatives up to order 4.

use crate::error::{HeolError, Result};

/// Number of stored derivative orders (0 through 4).
pub const ORDERS: usize = 5;

/// A reference sample: `x[k]` and `y[k]` are the k-th time derivatives.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ReferencePoint {
    pub t: f64,
    pub x: [f64; ORDERS],
    pub y: [f64; ORDERS],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TrajectorySpec {
    /// Straight line along the inertial x axis through the origin.
    Line {
        speed: f64,
    },
    Circle {
        center: (f64, f64),
        radius: f64,
        omega: f64,
        phase: f64,
    },
}

impl TrajectorySpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            TrajectorySpec::Line { speed } if !speed.is_finite() => {
                Err(HeolError::InvalidParams(format!("line speed {speed} is not finite")))
            }
            TrajectorySpec::Circle { radius, omega, .. }
                if radius <= 0.0 || !radius.is_finite() || omega == 0.0 || !omega.is_finite() =>
            {
                Err(HeolError::InvalidParams(format!(
                    "circle needs radius > 0 and omega != 0 (radius = {radius}, omega = {omega})"
                )))
            }
            _ => Ok(()),
        }
    }

    pub fn sample(&self, t: f64) -> ReferencePoint {
        match *self {
            TrajectorySpec::Line { speed } => {
                ReferencePoint { t, x: [speed * t, speed, 0.0, 0.0, 0.0], y: [0.0; ORDERS] }
            }
            TrajectorySpec::Circle { center, radius, omega, phase } => {
                let (s, c) = (omega * t + phase).sin_cos();
                let w2 = omega * omega;
                let w3 = w2 * omega;
                let w4 = w2 * w2;
                ReferencePoint {
                    t,
                    x: [center.0 + radius * c, -radius * omega * s, -radius * w2 * c, radius * w3 * s, radius * w4 * c],
                    y: [center.1 + radius * s, radius * omega * c, -radius * w2 * s, -radius * w3 * c, radius * w4 * s],
                }
            }
        }
    }
}
