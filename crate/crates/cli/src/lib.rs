//! Command-line front end for reference-aware model explanations.
//!
//! Everything the binary does is reachable through this library: parsing
//! and validating run configs, executing requests into JSON/SVG artifacts,
//! and the serialization helpers themselves.

pub mod artifact;
pub mod config;
pub mod runner;
pub mod svg;

pub use artifact::{emit_json, Artifact, ParsedEnvelope, ReferenceInfo};
pub use config::{RequestSpec, RunConfig};
pub use runner::{run, run_contrast, run_drift, Manifest, ManifestEntry, RunOutcome, Workspace};
