//! Library side of the scenario runner: file format, result writers, and
//! the run pipeline the `fieldplan` binary drives.

pub mod output;
pub mod runner;
pub mod scenario;

/// The shadowing demo scenario shipped with the binary.
pub const SHADOWING_SCENARIO: &str = include_str!("../../../scenarios/shadowing.toml");

/// Two-input competition scenario (also available as a repo file).
pub const COMPETITION_SCENARIO: &str = include_str!("../../../scenarios/competition.toml");
