//! Multi-marker identity tracking and online gesture following.
//!
//! - [`assignment`]: Kuhn-Munkres minimum-cost matching.
//! - [`tracker`]: blob registry with living/death/birth/kill lifecycle.
//! - [`vmo`]: Variable Markov Oracle built incrementally from a feature series.
//! - [`follower`]: online matching of a live stream against a frozen oracle,
//!   plus categorical and temporal mappings.
//! - [`io`], [`sim`], [`metrics`]: line-delimited JSON streams, synthetic
//!   scenarios and evaluation.

pub mod assignment;
pub mod error;
pub mod exec;
pub mod follower;
pub mod io;
pub mod metrics;
pub mod pipeline;
pub mod sim;
pub mod tracker;
pub mod types;
pub mod vmo;

pub use assignment::{solve_assignment, AssignmentResult, CostMatrix};
pub use error::{Error, Result};
pub use exec::Execution;
pub use follower::{
    follower_init, map_categorical, map_temporal, track_step, Follower, FollowerState,
    MappingConfig,
};
pub use tracker::{Action, Blob, BlobState, Registry, TrackEvent, TrackUpdate, TrackerConfig};
pub use types::{distance, MarkerFrame, Point3, Position};
pub use vmo::{select_threshold, Oracle};
