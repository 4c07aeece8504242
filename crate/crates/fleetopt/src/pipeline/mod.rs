//! Telemetry-to-energy-table pipeline: trace cleaning and labeling, map
//! matching against a road network, per-segment sample generation, and the
//! linear energy model used to predict per-trip energies.

pub mod matching;
pub mod network;
pub mod regression;
pub mod samples;
pub mod telemetry;

pub use matching::{evaluate_matching, map_match, map_match_seq, MatchConfig, SegmentIndex};
pub use network::{NetworkGeometry, NetworkNode, NetworkWay, RoadNetwork, WayGeometry};
pub use regression::{fit_ols, predict_trip_energy, LinearModel, SegmentFeatures};
pub use samples::{
    make_samples, read_samples_csv, write_samples_csv, EnergySample, TrafficSeries, WeatherRow,
    WeatherSeries, DEFAULT_JOIN_HORIZON_S,
};
pub use telemetry::{
    clean_and_label, read_trace_csv, write_trace_csv, CleanConfig, CleanedTrace, TelemetryPoint,
    DEFAULT_KWH_PER_GALLON,
};
