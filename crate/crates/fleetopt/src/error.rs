//! Error type shared by the whole crate.

use std::fmt;

#[derive(Debug)]
pub enum FleetError {
    /// Filesystem failure while reading or writing `path`.
    Io { path: String, source: std::io::Error },
    /// Malformed input file (JSON, CSV, GTFS, LP).
    Parse { context: String, message: String },
    /// An instance or config invariant is violated; names the first offender.
    Validation(String),
    /// Deadhead matrix has no entry for the requested location pair.
    MissingDeadhead { from: String, to: String },
    /// Greedy construction could not assign this trip to any vehicle.
    Infeasible { trip: String },
    /// No sequence of charging-slot insertions keeps this vehicle above the floor.
    ChargingRepairFailed { vehicle: String },
    /// Every neighbor candidate failed validation within the retry budget.
    NeighborExhausted { retries: u32 },
    /// Projected MILP variable count exceeds the configured cap.
    ModelTooLarge { vars: u64, cap: u64 },
    /// Exhaustive search completed without finding any feasible solution.
    SearchInfeasible { nodes_explored: u64 },
    /// Time limit hit before any feasible solution was found.
    TimeLimit,
    /// Telemetry cleaning removed every point.
    EmptyAfterFilter,
    /// Telemetry timestamps are not strictly increasing.
    NonMonotonicTimestamps { index: usize },
    /// Road network has too few connected segments to generate routes.
    DegenerateNetwork,
    /// No weather/traffic row within the join horizon of a sample timestamp.
    FeatureJoinGap { ts_s: i64, horizon_s: i64 },
    /// Fewer samples than encoded features plus intercept.
    InsufficientSamples { have: usize, need: usize },
    /// Segment features do not match the model's encoding.
    EncodingMismatch(String),
}

impl fmt::Display for FleetError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Io { path, source } => write!(f, "i/o error on {path}: {source}"),
            Self::Parse { context, message } => write!(f, "parse error in {context}: {message}"),
            Self::Validation(msg) => write!(f, "validation error: {msg}"),
            Self::MissingDeadhead { from, to } => {
                write!(f, "missing deadhead entry from '{from}' to '{to}'")
            }
            Self::Infeasible { trip } => write!(f, "no feasible assignment for trip '{trip}'"),
            Self::ChargingRepairFailed { vehicle } => {
                write!(f, "charging repair failed for vehicle '{vehicle}'")
            }
            Self::NeighborExhausted { retries } => {
                write!(f, "no valid neighbor after {retries} retries")
            }
            Self::ModelTooLarge { vars, cap } => {
                write!(f, "model too large: {vars} variables exceed cap {cap}")
            }
            Self::SearchInfeasible { nodes_explored } => {
                write!(f, "instance infeasible (search exhausted, {nodes_explored} nodes)")
            }
            Self::TimeLimit => write!(f, "time limit reached without an incumbent"),
            Self::EmptyAfterFilter => write!(f, "no telemetry points left after filtering"),
            Self::NonMonotonicTimestamps { index } => {
                write!(f, "timestamps not strictly increasing at point {index}")
            }
            Self::DegenerateNetwork => write!(f, "network has fewer than 2 connected segments"),
            Self::FeatureJoinGap { ts_s, horizon_s } => {
                write!(f, "no feature row within {horizon_s}s of timestamp {ts_s}")
            }
            Self::InsufficientSamples { have, need } => {
                write!(f, "need at least {need} samples, got {have}")
            }
            Self::EncodingMismatch(msg) => write!(f, "encoding mismatch: {msg}"),
        }
    }
}

impl std::error::Error for FleetError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Self::Io { source, .. } => Some(source),
            _ => None,
        }
    }
}

pub type Result<T> = std::result::Result<T, FleetError>;

impl FleetError {
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Self::Io { path: path.into(), source }
    }

    pub fn parse(context: impl Into<String>, message: impl fmt::Display) -> Self {
        Self::Parse { context: context.into(), message: message.to_string() }
    }
}
