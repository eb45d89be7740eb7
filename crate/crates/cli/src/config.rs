//! Flat `key = value` scenario files with dotted keys.
//!
//! ```text
//! # hovercraft on a straight line
//! model = hovercraft
//! hovercraft.beta = 10
//! trajectory = line
//! trajectory.speed = 2
//! duration = 60
//! ```
//!
//! Every key in a file must be used by the selected model and trajectory,
//! so typos surface as errors instead of silently falling back to defaults.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use heol_core::{
    AutopilotGains, HeadingMode, HeolConfig, HeolVariant, InertialForce, IpdGains, PlantModel, ScenarioConfig,
    TrajectorySpec, VesselParams, VesselState,
};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("line {line}: `{key}` is set twice")]
    Duplicate { line: usize, key: String },
    #[error("override `{0}` is not of the form key=value")]
    BadOverride(String),
    #[error("missing required key `{0}`")]
    Missing(&'static str),
    #[error("`{key} = {value}`: expected {expected}")]
    BadValue { key: String, value: String, expected: &'static str },
    #[error("unused keys for this model/trajectory: {}", .0.join(", "))]
    Unused(Vec<String>),
    #[error(transparent)]
    Invalid(#[from] heol_core::HeolError),
}

/// Parsed but not yet interpreted key/value pairs.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig {
    entries: BTreeMap<String, String>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut entries = BTreeMap::new();
        for (idx, line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let content = line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .filter(|(k, v)| !k.is_empty() && !v.is_empty())
                .ok_or_else(|| ConfigError::Syntax { line: line_no, text: content.to_string() })?;
            if entries.insert(key.to_string(), value.to_string()).is_some() {
                return Err(ConfigError::Duplicate { line: line_no, key: key.to_string() });
            }
        }
        Ok(Self { entries })
    }

    /// Applies a `key=value` override, replacing any value from the file.
    pub fn set_override(&mut self, spec: &str) -> Result<(), ConfigError> {
        let (key, value) = spec
            .split_once('=')
            .map(|(k, v)| (k.trim(), v.trim()))
            .filter(|(k, v)| !k.is_empty() && !v.is_empty())
            .ok_or_else(|| ConfigError::BadOverride(spec.to_string()))?;
        self.entries.insert(key.to_string(), value.to_string());
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn to_scenario(&self) -> Result<ScenarioConfig, ConfigError> {
        let mut r = Reader { raw: &self.entries, used: BTreeSet::new() };
        let cfg = build(&mut r)?;
        let unused: Vec<String> = self.entries.keys().filter(|k| !r.used.contains(k.as_str())).cloned().collect();
        if !unused.is_empty() {
            return Err(ConfigError::Unused(unused));
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

struct Reader<'a> {
    raw: &'a BTreeMap<String, String>,
    used: BTreeSet<&'static str>,
}

impl Reader<'_> {
    fn text(&mut self, key: &'static str) -> Option<&str> {
        self.used.insert(key);
        self.raw.get(key).map(String::as_str)
    }

    fn num_or(&mut self, key: &'static str, default: Option<f64>) -> Result<f64, ConfigError> {
        match self.text(key) {
            None => default.ok_or(ConfigError::Missing(key)),
            Some(v) => v.parse::<f64>().map_err(|_| ConfigError::BadValue {
                key: key.into(),
                value: v.into(),
                expected: "a number",
            }),
        }
    }

    fn num(&mut self, key: &'static str) -> Result<f64, ConfigError> {
        self.num_or(key, None)
    }

    fn choice<T: Copy>(
        &mut self,
        key: &'static str,
        default: Option<T>,
        options: &[(&str, T)],
        expected: &'static str,
    ) -> Result<T, ConfigError> {
        let Some(v) = self.text(key) else {
            return default.ok_or(ConfigError::Missing(key));
        };
        options.iter().find(|(name, _)| *name == v).map(|(_, t)| *t).ok_or_else(|| ConfigError::BadValue {
            key: key.into(),
            value: v.into(),
            expected,
        })
    }
}

#[derive(Clone, Copy)]
enum ModelKind {
    Hovercraft,
    SurfaceVessel,
}

#[derive(Clone, Copy)]
enum TrajectoryKind {
    Line,
    Circle,
}

#[derive(Clone, Copy)]
enum ModeKind {
    Pid,
    Ideal,
}

fn build(r: &mut Reader) -> Result<ScenarioConfig, ConfigError> {
    let model = match r.choice(
        "model",
        None,
        &[("hovercraft", ModelKind::Hovercraft), ("surface_vessel", ModelKind::SurfaceVessel)],
        "hovercraft or surface_vessel",
    )? {
        ModelKind::Hovercraft => {
            PlantModel::Hovercraft { beta: r.num("hovercraft.beta")?, gamma: r.num("hovercraft.gamma")? }
        }
        ModelKind::SurfaceVessel => PlantModel::SurfaceVessel(VesselParams {
            a: r.num("vessel.a")?,
            b: r.num("vessel.b")?,
            c: r.num("vessel.c")?,
            beta_u: r.num("vessel.beta_u")?,
            beta_v: r.num("vessel.beta_v")?,
            gamma: r.num("vessel.gamma")?,
        }),
    };
    let controller_beta = r.num_or("controller_beta", Some(model.params().beta_u))?;

    let trajectory = match r.choice(
        "trajectory",
        None,
        &[("line", TrajectoryKind::Line), ("circle", TrajectoryKind::Circle)],
        "line or circle",
    )? {
        TrajectoryKind::Line => TrajectorySpec::Line { speed: r.num("trajectory.speed")? },
        TrajectoryKind::Circle => TrajectorySpec::Circle {
            center: (r.num_or("trajectory.center_x", Some(0.0))?, r.num_or("trajectory.center_y", Some(0.0))?),
            radius: r.num("trajectory.radius")?,
            omega: r.num("trajectory.omega")?,
            phase: r.num_or("trajectory.phase", Some(0.0))?,
        },
    };

    let wind = InertialForce { fx: r.num_or("wind.fx", Some(0.0))?, fy: r.num_or("wind.fy", Some(0.0))? };
    let initial_state = VesselState {
        x: r.num_or("initial.x", Some(0.0))?,
        y: r.num_or("initial.y", Some(0.0))?,
        psi: r.num_or("initial.psi", Some(0.0))?,
        u: r.num_or("initial.u", Some(0.0))?,
        v: r.num_or("initial.v", Some(0.0))?,
        r: r.num_or("initial.r", Some(0.0))?,
    };

    let dt_plant = r.num_or("dt_plant", Some(1e-3))?;
    let decimation = r.num_or("control_decimation", Some(1.0))?;
    if !(decimation >= 1.0 && decimation.fract() == 0.0 && decimation <= u32::MAX as f64) {
        return Err(ConfigError::BadValue {
            key: "control_decimation".into(),
            value: decimation.to_string(),
            expected: "a positive integer",
        });
    }
    let control_decimation = decimation as usize;

    let heol_default = HeolConfig::default();
    let heol = HeolConfig {
        gains: IpdGains {
            kp: r.num_or("heol.Kp", Some(heol_default.gains.kp))?,
            kd: r.num_or("heol.Kd", Some(heol_default.gains.kd))?,
        },
        horizon: r.num_or("heol.T", Some(heol_default.horizon))?,
        variant: r.choice(
            "heol.variant",
            Some(heol_default.variant),
            &[("riachy", HeolVariant::Riachy), ("derivative", HeolVariant::WithDerivative)],
            "riachy or derivative",
        )?,
        dt: dt_plant * control_decimation as f64,
    };

    let heading = match r.choice(
        "autopilot.mode",
        Some(ModeKind::Pid),
        &[("pid", ModeKind::Pid), ("ideal", ModeKind::Ideal)],
        "pid or ideal",
    )? {
        ModeKind::Pid => {
            let d = AutopilotGains::default();
            HeadingMode::Autopilot(AutopilotGains {
                kp: r.num_or("autopilot.Kp", Some(d.kp))?,
                kd: r.num_or("autopilot.Kd", Some(d.kd))?,
                ki: r.num_or("autopilot.Ki", Some(d.ki))?,
            })
        }
        ModeKind::Ideal => HeadingMode::Ideal,
    };

    Ok(ScenarioConfig {
        model,
        controller_beta,
        trajectory,
        wind,
        initial_state,
        heol,
        heading,
        duration: r.num("duration")?,
        dt_plant,
        control_decimation,
        convergence_threshold: r.num_or("metrics.threshold", Some(0.1))?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Value {
    Num(f64),
    Int(usize),
    Text(&'static str),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            // shortest representation that parses back to the same f64
            Value::Num(x) => write!(f, "{x}"),
            Value::Int(n) => write!(f, "{n}"),
            Value::Text(s) => f.write_str(s),
        }
    }
}

/// Every key needed to reproduce `cfg`, in file order.
pub fn entries(cfg: &ScenarioConfig) -> Vec<(&'static str, Value)> {
    use Value::*;
    let mut out = Vec::new();
    match cfg.model {
        PlantModel::Hovercraft { beta, gamma } => {
            out.push(("model", Text("hovercraft")));
            out.push(("hovercraft.beta", Num(beta)));
            out.push(("hovercraft.gamma", Num(gamma)));
        }
        PlantModel::SurfaceVessel(p) => {
            out.push(("model", Text("surface_vessel")));
            out.push(("vessel.a", Num(p.a)));
            out.push(("vessel.b", Num(p.b)));
            out.push(("vessel.c", Num(p.c)));
            out.push(("vessel.beta_u", Num(p.beta_u)));
            out.push(("vessel.beta_v", Num(p.beta_v)));
            out.push(("vessel.gamma", Num(p.gamma)));
        }
    }
    out.push(("controller_beta", Num(cfg.controller_beta)));
    match cfg.trajectory {
        TrajectorySpec::Line { speed } => {
            out.push(("trajectory", Text("line")));
            out.push(("trajectory.speed", Num(speed)));
        }
        TrajectorySpec::Circle { center, radius, omega, phase } => {
            out.push(("trajectory", Text("circle")));
            out.push(("trajectory.center_x", Num(center.0)));
            out.push(("trajectory.center_y", Num(center.1)));
            out.push(("trajectory.radius", Num(radius)));
            out.push(("trajectory.omega", Num(omega)));
            out.push(("trajectory.phase", Num(phase)));
        }
    }
    out.push(("wind.fx", Num(cfg.wind.fx)));
    out.push(("wind.fy", Num(cfg.wind.fy)));
    let s = cfg.initial_state;
    out.extend([
        ("initial.x", Num(s.x)),
        ("initial.y", Num(s.y)),
        ("initial.psi", Num(s.psi)),
        ("initial.u", Num(s.u)),
        ("initial.v", Num(s.v)),
        ("initial.r", Num(s.r)),
    ]);
    out.push(("heol.Kp", Num(cfg.heol.gains.kp)));
    out.push(("heol.Kd", Num(cfg.heol.gains.kd)));
    out.push(("heol.T", Num(cfg.heol.horizon)));
    out.push((
        "heol.variant",
        Text(match cfg.heol.variant {
            HeolVariant::Riachy => "riachy",
            HeolVariant::WithDerivative => "derivative",
        }),
    ));
    match cfg.heading {
        HeadingMode::Autopilot(g) => {
            out.push(("autopilot.mode", Text("pid")));
            out.push(("autopilot.Kp", Num(g.kp)));
            out.push(("autopilot.Kd", Num(g.kd)));
            out.push(("autopilot.Ki", Num(g.ki)));
        }
        HeadingMode::Ideal => out.push(("autopilot.mode", Text("ideal"))),
    }
    out.push(("duration", Num(cfg.duration)));
    out.push(("dt_plant", Num(cfg.dt_plant)));
    out.push(("control_decimation", Int(cfg.control_decimation)));
    out.push(("metrics.threshold", Num(cfg.convergence_threshold)));
    out
}

pub fn render(cfg: &ScenarioConfig) -> String {
    entries(cfg).iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
}

/// The two reference experiments, by file stem.
pub fn builtin_scenarios() -> [(&'static str, &'static str, ScenarioConfig); 2] {
    [
        (
            "hovercraft_line",
            "hovercraft tracking x = 2t with a 10 m lateral offset under a -50 crosswind",
            ScenarioConfig::hovercraft_line(),
        ),
        (
            "otter_circle",
            "Otter-like vessel on a 50 m circle with a 15 m offset under a -50 crosswind",
            ScenarioConfig::otter_circle(),
        ),
    ]
}
