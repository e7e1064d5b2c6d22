//! Independent Monte Carlo validation path: physical SINR synthesis over a
//! sampled station field, deadline-truncated service times, and a
//! discrete-event M/G/1 queue.

mod field;
mod queue;
pub(crate) mod stats;

pub use field::{
    choose_window_radius, sample_field, sample_service_time, FieldSampler, GeometrySettings,
    SinrSample,
};
pub use queue::{run_queue, run_queue_replicated, QueueConfig, ServiceModel, SimError, SimReport};
