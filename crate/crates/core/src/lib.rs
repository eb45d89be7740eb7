//! Guidance and control of surface vessels with HEOL: flatness-based
//! feedforward on a hovercraft model closed by model-free intelligent PD
//! loops, with a PID heading autopilot as the inner stage of the cascade.

pub mod autopilot;
pub mod dynamics;
pub mod error;
pub mod flatness;
pub mod heol;
pub mod sim;
pub mod trajectory;

pub use autopilot::{wrap_to_pi, AutopilotGains, HeadingAutopilot};
pub use dynamics::{
    body_to_inertial_velocity, hovercraft_derivative, reduce_params, surface_vessel_derivative, ControlInputs,
    InertialForce, PhysicalParams, PlantModel, VesselParams, VesselState, VesselStateDerivative,
};
pub use error::{HeolError, Result};
pub use flatness::{
    brunovsky_from_physical, flat_feedforward, flat_heading, physical_from_brunovsky, unwrap_heading, BrunovskyInputs,
    FlatFeedforward,
};
pub use heol::{estimate_f, HeolConfig, HeolController, HeolVariant, IpdGains, Measurement};
pub use sim::{compute_metrics, rk4_step, run_scenario, HeadingMode, LogRecord, RunLog, RunMetrics, ScenarioConfig};
pub use trajectory::{ReferencePoint, TrajectorySpec};
