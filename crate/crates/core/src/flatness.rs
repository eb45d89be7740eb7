//! Flatness algebra for the hovercraft model.
//!
//! With the flat output `(x, y)` the heading is the direction of the vector
//! `(ẍ + βẋ, ÿ + βẏ)` and the surge force is its length. The same relation
//! gives the input change to the two double integrators `ẍ = wx`, `ÿ = wy`
//! and its inverse, which the online controller evaluates on reference
//! velocities.

use std::f64::consts::{PI, TAU};

use crate::dynamics::VesselState;
use crate::error::{HeolError, Result};
use crate::trajectory::ReferencePoint;

/// Below this norm of both atan2 arguments the heading is undefined.
pub const SINGULARITY_EPS: f64 = 1e-9;

/// Inputs of the two decoupled double integrators.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BrunovskyInputs {
    pub wx: f64,
    pub wy: f64,
}

/// States and inputs of the hovercraft recovered from the flat output.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FlatFeedforward {
    pub psi: f64,
    pub r: f64,
    pub gamma_r: f64,
    pub u: f64,
    pub v: f64,
    pub fu: f64,
}

impl FlatFeedforward {
    /// Vessel state consistent with this feedforward at the reference position.
    pub fn state_at(&self, reference: &ReferencePoint) -> VesselState {
        VesselState { x: reference.x[0], y: reference.y[0], psi: self.psi, u: self.u, v: self.v, r: self.r }
    }
}

fn checked_atan2(num: f64, den: f64) -> Result<f64> {
    if num.abs() < SINGULARITY_EPS && den.abs() < SINGULARITY_EPS {
        return Err(HeolError::Singularity { num, den });
    }
    Ok(num.atan2(den))
}

/// Heading of the hovercraft following a flat output; `xd = (ẋ, ẍ)`, `yd = (ẏ, ÿ)`.
pub fn flat_heading(xd: (f64, f64), yd: (f64, f64), beta: f64) -> Result<f64> {
    checked_atan2(yd.1 + beta * yd.0, xd.1 + beta * xd.0)
}

/// Open-loop states and inputs for a reference, with heading rate and
/// acceleration obtained by differentiating `atan2(N, D)` in closed form.
pub fn flat_feedforward(reference: &ReferencePoint, beta: f64, gamma: f64) -> Result<FlatFeedforward> {
    let (x, y) = (&reference.x, &reference.y);
    // N = ÿ + βẏ and D = ẍ + βẋ with their first two derivatives.
    let n = [y[2] + beta * y[1], y[3] + beta * y[2], y[4] + beta * y[3]];
    let d = [x[2] + beta * x[1], x[3] + beta * x[2], x[4] + beta * x[3]];

    let psi = checked_atan2(n[0], d[0])?;
    let norm2 = n[0] * n[0] + d[0] * d[0];
    let cross = n[1] * d[0] - n[0] * d[1];
    let psi_dot = cross / norm2;
    let cross_dot = n[2] * d[0] - n[0] * d[2];
    let norm2_dot = 2.0 * (n[0] * n[1] + d[0] * d[1]);
    let psi_ddot = (cross_dot * norm2 - cross * norm2_dot) / (norm2 * norm2);

    let (s, c) = psi.sin_cos();
    Ok(FlatFeedforward {
        psi,
        r: psi_dot,
        gamma_r: psi_ddot + gamma * psi_dot,
        u: x[1] * c + y[1] * s,
        v: -x[1] * s + y[1] * c,
        fu: d[0] * c + n[0] * s,
    })
}

pub fn brunovsky_from_physical(fu: f64, psi: f64, vx: f64, vy: f64, beta: f64) -> BrunovskyInputs {
    let (s, c) = psi.sin_cos();
    BrunovskyInputs { wx: fu * c - beta * vx, wy: fu * s - beta * vy }
}

/// Heading reference and surge force realizing `w`, compensating damping
/// with the given (reference) velocities. The returned force is never negative.
pub fn physical_from_brunovsky(w: BrunovskyInputs, vx_ref: f64, vy_ref: f64, beta: f64) -> Result<(f64, f64)> {
    let px = w.wx + beta * vx_ref;
    let py = w.wy + beta * vy_ref;
    let psi = checked_atan2(py, px)?;
    let (s, c) = psi.sin_cos();
    Ok((psi, px * c + py * s))
}

/// Shifts `new_psi` by a multiple of 2π so that it lies within π of `prev_psi`.
pub fn unwrap_heading(prev_psi: f64, new_psi: f64) -> f64 {
    let k = ((prev_psi - new_psi) / TAU).round();
    let mut out = new_psi + k * TAU;
    // round() can leave the result just outside the band near odd multiples of π
    if out - prev_psi > PI {
        out -= TAU;
    } else if out - prev_psi < -PI {
        out += TAU;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{hovercraft_derivative, ControlInputs, InertialForce};
    use crate::sim::rk4_step;
    use crate::trajectory::TrajectorySpec;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn heading_along_axes() {
        assert_eq!(flat_heading((1.0, 0.0), (0.0, 0.0), 10.0).unwrap(), 0.0);
        assert_eq!(flat_heading((0.0, 0.0), (1.0, 0.0), 10.0).unwrap(), FRAC_PI_2);
    }

    #[test]
    fn heading_singularity() {
        assert!(matches!(flat_heading((0.0, 0.0), (0.0, 0.0), 10.0), Err(HeolError::Singularity { .. })));
        assert!(physical_from_brunovsky(BrunovskyInputs { wx: -10.0, wy: 0.0 }, 1.0, 0.0, 10.0).is_err());
    }

    #[test]
    fn line_feedforward() {
        let p = TrajectorySpec::Line { speed: 2.0 }.sample(4.0);
        let ff = flat_feedforward(&p, 10.0, 1.0).unwrap();
        assert_eq!(ff.psi, 0.0);
        assert_eq!(ff.r, 0.0);
        assert_eq!(ff.gamma_r, 0.0);
        assert_eq!(ff.u, 2.0);
        assert_eq!(ff.v, 0.0);
        assert_eq!(ff.fu, 20.0);
    }

    #[test]
    fn circle_feedforward_at_start() {
        let spec = TrajectorySpec::Circle { center: (0.0, 0.0), radius: 1.0, omega: 1.0, phase: 0.0 };
        let ff = flat_feedforward(&spec.sample(0.0), 10.0, 1.0).unwrap();
        assert_abs_diff_eq!(ff.psi, 10.0f64.atan2(-1.0), epsilon = 1e-15);
        assert!(ff.fu.is_finite() && ff.gamma_r.is_finite());
    }

    #[test]
    fn feedforward_rates_match_finite_differences() {
        let spec = TrajectorySpec::Circle { center: (1.0, 2.0), radius: 5.0, omega: 0.7, phase: 0.2 };
        let h = 1e-5;
        for &t in &[0.3, 1.7, 4.0] {
            let f = |t| flat_feedforward(&spec.sample(t), 3.0, 1.0).unwrap();
            let (lo, mid, hi) = (f(t - h), f(t), f(t + h));
            let psi_dot_fd = unwrap_heading(mid.psi, hi.psi) - unwrap_heading(mid.psi, lo.psi);
            assert_abs_diff_eq!(psi_dot_fd / (2.0 * h), mid.r, epsilon = 1e-6);
            assert_abs_diff_eq!((hi.r - lo.r) / (2.0 * h), mid.gamma_r - mid.r, epsilon = 1e-6);
        }
    }

    #[test]
    fn brunovsky_steady_cruise() {
        assert_eq!(brunovsky_from_physical(20.0, 0.0, 2.0, 0.0, 10.0), BrunovskyInputs { wx: 0.0, wy: 0.0 });
        assert_eq!(brunovsky_from_physical(0.0, 1.234, 0.0, 0.0, 10.0), BrunovskyInputs { wx: 0.0, wy: 0.0 });
    }

    #[test]
    fn reconstruct_examples() {
        let (psi, fu) = physical_from_brunovsky(BrunovskyInputs::default(), 2.0, 0.0, 10.0).unwrap();
        assert_eq!((psi, fu), (0.0, 20.0));
        let (psi, fu) = physical_from_brunovsky(BrunovskyInputs::default(), 0.0, 1.0, 10.0).unwrap();
        assert_eq!(psi, FRAC_PI_2);
        assert_abs_diff_eq!(fu, 10.0, epsilon = 1e-14);
    }

    #[test]
    fn unwrap_examples() {
        assert_abs_diff_eq!(unwrap_heading(3.1, -3.1), -3.1 + TAU, epsilon = 1e-15);
        assert_eq!(unwrap_heading(0.0, 0.1), 0.1);
    }

    // Integrate the hovercraft open loop with known smooth inputs, then
    // recover the heading from the recorded flat output derivatives.
    #[test]
    fn heading_recovered_from_open_loop_run() {
        let (beta, gamma) = (10.0, 1.0);
        let inputs = |t: f64| ControlInputs { fu: 15.0 + 3.0 * (0.5 * t).sin(), gamma_r: 0.4 * (0.3 * t).cos() };
        let mut s = VesselState { u: 1.5, ..Default::default() };
        let dt = 1e-3;
        let mut t = 0.0;
        for _ in 0..5000 {
            s = rk4_step(|tt, st| hovercraft_derivative(st, &inputs(tt), beta, gamma, &InertialForce::ZERO), t, &s, dt)
                .unwrap();
            t += dt;
        }
        let d = hovercraft_derivative(&s, &inputs(t), beta, gamma, &InertialForce::ZERO);
        let (vx, vy) = s.inertial_velocity();
        // ẍ from the inertial-frame form of the model
        let (sn, cs) = s.psi.sin_cos();
        let ax = d.u_dot * cs - s.u * s.r * sn - d.v_dot * sn - s.v * s.r * cs;
        let ay = d.u_dot * sn + s.u * s.r * cs + d.v_dot * cs - s.v * s.r * sn;
        let psi = flat_heading((vx, ax), (vy, ay), beta).unwrap();
        assert_abs_diff_eq!(unwrap_heading(s.psi, psi), s.psi, epsilon = 1e-6);
    }

    proptest! {
        #[test]
        fn reconstruction_inverts_input_change(
            wx in -60.0..60.0f64,
            wy in -60.0..60.0f64,
            vx in -5.0..5.0f64,
            vy in -5.0..5.0f64,
            beta in 0.5..20.0f64,
        ) {
            let w = BrunovskyInputs { wx, wy };
            prop_assume!((wx + beta * vx).hypot(wy + beta * vy) > 1e-3);
            let (psi, fu) = physical_from_brunovsky(w, vx, vy, beta).unwrap();
            prop_assert!(fu >= 0.0);
            prop_assert!((fu - (wx + beta * vx).hypot(wy + beta * vy)).abs() < 1e-12 * (1.0 + fu));
            let back = brunovsky_from_physical(fu, psi, vx, vy, beta);
            prop_assert!((back.wx - wx).abs() < 1e-12 * (1.0 + fu));
            prop_assert!((back.wy - wy).abs() < 1e-12 * (1.0 + fu));
        }

        #[test]
        fn physical_round_trip(fu in 0.01..60.0f64, psi in -3.1..3.1f64, vx in -5.0..5.0f64, vy in -5.0..5.0f64) {
            let w = brunovsky_from_physical(fu, psi, vx, vy, 10.0);
            let (p2, f2) = physical_from_brunovsky(w, vx, vy, 10.0).unwrap();
            prop_assert!((f2 - fu).abs() < 1e-11);
            prop_assert!((unwrap_heading(psi, p2) - psi).abs() < 1e-11);
        }

        #[test]
        fn heading_scale_invariant(a in -10.0..10.0f64, b in -10.0..10.0f64, k in 0.01..100.0f64) {
            prop_assume!(a.hypot(b) > 1e-3);
            let h1 = flat_heading((a, 0.0), (b, 0.0), 1.0).unwrap();
            let h2 = flat_heading((k * a, 0.0), (k * b, 0.0), 1.0).unwrap();
            prop_assert!((h1 - h2).abs() < 1e-12);
        }

        #[test]
        fn unwrap_stays_within_pi(prev in -100.0..100.0f64, new in -10.0..10.0f64) {
            let u = unwrap_heading(prev, new);
            prop_assert!((u - prev).abs() <= PI + 1e-12);
            let turns = (u - new) / TAU;
            prop_assert!((turns - turns.round()).abs() < 1e-9);
        }

        #[test]
        fn unwrapped_random_walk(steps in prop::collection::vec(-1.5..1.5f64, 1..200)) {
            let mut true_angle = 0.0f64;
            let mut prev = 0.0;
            for inc in steps {
                true_angle += inc;
                let wrapped = true_angle.sin().atan2(true_angle.cos());
                let u = unwrap_heading(prev, wrapped);
                prop_assert!((u - prev).abs() < FRAC_PI_2);
                prop_assert!((u - true_angle).abs() < 1e-9);
                prev = u;
            }
        }
    }
}
