//! Randomised and hand-built benchmark instances.

pub mod fixtures;
mod generate;

pub use fixtures::{fixture, fixtures, FIXTURE_NAMES};
pub use generate::{desk_suite, generate, GenerationError, InstanceSpec};
