//! HTTP service around the placement controller.
//!
//! * `POST /v1/placements` places a workload (admission failures are a 200
//!   with `chosen: null`); replaying a `request_id` returns the stored bytes.
//! * `DELETE /v1/placements/{request_id}` rolls back the most recent commit.
//! * `GET /v1/state` returns the last published snapshot.

pub mod api;
pub mod app;
pub mod config;
pub mod decision_log;

pub use app::{router, AppState, ServiceError, ServiceOptions};
pub use config::{ConfigError, ServiceConfig};
pub use decision_log::{DecisionLog, LogRecord};
