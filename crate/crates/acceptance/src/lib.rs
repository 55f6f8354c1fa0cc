//! Independent oracles and seeded generators used by the acceptance suite.
//!
//! Nothing here calls into the routing or analysis caches it is used to
//! check: routing is re-derived by exhaustive path enumeration and saturation
//! audits rebuild loads from scratch with the uncached per-demand router.

pub mod audit;
pub mod gen;
pub mod oracle;

use std::path::PathBuf;

/// Workspace `fixtures/` directory.
pub fn fixtures_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}
