//! Environment abstraction the exploration loop drives.
//!
//! Implemented by the simulated apps; a real-device adapter would implement
//! the same surface. Widget actions are executed against a concrete target
//! rectangle (the detected box), since the engine has no access to any
//! platform widget handle.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::actions::Action;
use crate::vision::{Image, WidgetBox};

#[derive(Debug, Error)]
pub enum EnvError {
    #[error("environment crashed; reset required before further steps")]
    NeedsReset,
    #[error("invalid screen id {0}")]
    InvalidScreen(u32),
}

/// What a single executed action did, as ground truth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutcomeKind {
    Moved,
    Stayed,
    Crashed,
    Reset,
}

/// Ground-truth trace of one executed action.
#[derive(Debug, Clone)]
pub struct EnvStep {
    pub kind: OutcomeKind,
    pub from_screen: u32,
    pub to_screen: u32,
    /// Canonical identity of the transition rule that fired, if any.
    pub fired: Option<String>,
    pub crash_id: Option<u32>,
}

/// Static facts about the app under test, for logs and reports.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnvDescriptor {
    pub app_seed: u64,
    pub screen_count: u32,
}

pub trait Environment {
    /// Returns to the start screen and clears runtime state.
    fn reset(&mut self);

    /// Renders the current screen at the current dimensions.
    fn screenshot(&self) -> Image;

    /// Executes an action. Widget actions carry the detected target box.
    fn execute(&mut self, action: &Action, target: Option<WidgetBox>) -> Result<EnvStep, EnvError>;

    fn current_screen(&self) -> u32;

    fn descriptor(&self) -> EnvDescriptor;
}
