use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HeolError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// Both atan2 arguments fell below the singularity epsilon.
    #[error("heading is undefined: atan2 arguments ({num:e}, {den:e}) are both below epsilon")]
    Singularity { num: f64, den: f64 },

    #[error("estimator window spans {span} s, horizon is {horizon} s")]
    WindowNotWarm { span: f64, horizon: f64 },

    #[error("state became non-finite at t = {t} s: {state}")]
    NonFiniteState { t: f64, state: String },
}

pub type Result<T, E = HeolError> = std::result::Result<T, E>;
