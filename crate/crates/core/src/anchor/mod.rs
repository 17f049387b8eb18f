//! Anchor-driven matching loop.
//!
//! Each outer round scores the current map by local distortion, keeps the
//! low-distortion pairs as anchors, restricts the transport plan to anchor
//! neighborhoods and re-solves the relaxed assignment there. A final pass
//! completes the map from signatures measured relative to the anchors.

mod correspondence;
mod distortion;
mod init;
mod nn;
mod pipeline;
mod postprocess;
pub(crate) mod select;
mod surface;

pub(crate) use correspondence::csv_err;
pub use correspondence::{AnchorSet, Correspondence};
pub use distortion::local_distortion;
pub use init::{random_init, shot_like_init};
pub use pipeline::{
    linear_schedule, outer_log_csv, run_pipeline, write_outer_log, InitMode, OuterRecord,
    PipelineConfig, PipelineOutput,
};
pub use postprocess::{farthest_subset, postprocess, PostprocessMode, PostprocessParams};
pub use select::{build_pattern, select_anchors};
pub use surface::Surface;
