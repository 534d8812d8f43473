//! Deterministic simulated GUI apps: seeded screen-graph generation, a pixel
//! renderer with typed widget grammars, action execution semantics, injected
//! crashes, and ground-truth coverage accounting.

mod generate;
mod render;

pub use generate::{generate_app, GenParams};
pub use render::{ground_truth_boxes, render};

use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use thiserror::Error;

use crate::actions::{Action, ActionKind};
use crate::agent::{EnvDescriptor, EnvError, EnvStep, Environment, EpisodeLog, OutcomeKind};
use crate::embedding::WidgetType;
use crate::vision::{iou, Image, WidgetBox};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("need at least 2 screens, got {0}")]
    TooFewScreens(u32),
    #[error("infeasible packing: cannot fit {wanted} widgets on a {width}x{height} screen")]
    InfeasiblePacking {
        wanted: usize,
        width: u32,
        height: u32,
    },
    #[error("invalid screen id {0}")]
    InvalidScreen(u32),
    #[error("log was produced against app seed {log_seed}, not {app_seed}")]
    AppLogMismatch { log_seed: u64, app_seed: u64 },
}

/// A simulated app: screens, transition rules, and injected crashes.
/// Fully determined by its generation seed and parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimApp {
    pub seed: u64,
    pub nominal_width: u32,
    pub nominal_height: u32,
    pub start: u32,
    pub screens: Vec<Screen>,
    pub transitions: Vec<TransitionRule>,
    pub crashes: Vec<CrashRule>,
    /// Fraction of screens reachable from the start, ignoring guards.
    pub reachable_fraction: f64,
}

impl SimApp {
    pub fn screen(&self, id: u32) -> Result<&Screen, SimError> {
        self.screens
            .get(id as usize)
            .ok_or(SimError::InvalidScreen(id))
    }

    /// Canonical JSON with stable field order (byte-identical round-trips).
    pub fn to_canonical_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("app serializes")
    }

    pub fn from_json(text: &str) -> Result<SimApp, serde_json::Error> {
        serde_json::from_str(text)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Screen {
    pub id: u32,
    pub background: u8,
    pub widgets: Vec<SimWidget>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimWidget {
    pub bounds: WidgetBox,
    pub widget_type: WidgetType,
    pub style_seed: u64,
}

/// Guard flag a transition may require.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Guard {
    PermissionGranted,
    NetworkOn,
}

/// Matches an executed action: kind, ground-truth widget slot, and an
/// optional parameter bucket (swipe direction, window grow/shrink).
/// A rule with no bucket matches any parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Trigger {
    pub kind: ActionKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slot: Option<u8>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bucket: Option<i8>,
}

impl Trigger {
    pub fn on_slot(kind: ActionKind, slot: u8) -> Self {
        Trigger {
            kind,
            slot: Some(slot),
            bucket: None,
        }
    }

    pub fn bare(kind: ActionKind) -> Self {
        Trigger {
            kind,
            slot: None,
            bucket: None,
        }
    }

    pub fn with_bucket(kind: ActionKind, bucket: i8) -> Self {
        Trigger {
            kind,
            slot: None,
            bucket: Some(bucket),
        }
    }

    /// Stable text identity, e.g. `click@2`, `swipe#-1`.
    pub fn canonical(&self) -> String {
        let mut s = self.kind.name().to_string();
        if let Some(slot) = self.slot {
            s.push('@');
            s.push_str(&slot.to_string());
        }
        if let Some(bucket) = self.bucket {
            s.push('#');
            s.push_str(&bucket.to_string());
        }
        s
    }

    fn matches(&self, kind: ActionKind, slot: Option<u8>, bucket: Option<i8>) -> bool {
        self.kind == kind && self.slot == slot && (self.bucket.is_none() || self.bucket == bucket)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TransitionRule {
    pub from: u32,
    pub trigger: Trigger,
    pub to: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub requires: Option<Guard>,
}

impl TransitionRule {
    /// Identity string recorded in episode logs when the rule fires.
    pub fn canonical(&self) -> String {
        format!("{}:{}>{}", self.from, self.trigger.canonical(), self.to)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CrashRule {
    pub id: u32,
    pub screen: u32,
    pub trigger: Trigger,
}

/// Result of executing one action against the simulator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepOutcome {
    Moved(u32),
    Stayed,
    Crashed(u32),
    Reset(u32),
}

/// Per-session mutable runtime over an immutable [`SimApp`].
#[derive(Debug, Clone)]
pub struct SimEnvironment {
    app: SimApp,
    current: u32,
    nav_stack: Vec<u32>,
    permission_granted: bool,
    network_on: bool,
    landscape: bool,
    window_scale: f64,
    crashed: bool,
}

/// Hit-test threshold: a detected target selects the ground-truth slot it
/// overlaps with IoU above 0.5.
pub const HIT_TEST_IOU: f64 = 0.5;

impl SimEnvironment {
    pub fn new(app: SimApp) -> Self {
        let start = app.start;
        SimEnvironment {
            app,
            current: start,
            nav_stack: Vec::new(),
            permission_granted: false,
            network_on: false,
            landscape: false,
            window_scale: 1.0,
            crashed: false,
        }
    }

    pub fn app(&self) -> &SimApp {
        &self.app
    }

    /// Current render dimensions (orientation and window scale applied).
    pub fn current_dims(&self) -> (usize, usize) {
        let w = (self.app.nominal_width as f64 * self.window_scale).round() as usize;
        let h = (self.app.nominal_height as f64 * self.window_scale).round() as usize;
        let (w, h) = if self.landscape { (h, w) } else { (w, h) };
        (w.max(24), h.max(24))
    }

    /// Ground-truth widget boxes at the current render dimensions.
    pub fn current_ground_truth(&self) -> Vec<(WidgetBox, WidgetType)> {
        let (w, h) = self.current_dims();
        ground_truth_boxes(&self.app, self.current, w, h).expect("current screen is valid")
    }

    fn hit_test(&self, target: &WidgetBox) -> Option<u8> {
        let truth = self.current_ground_truth();
        let mut best: Option<(u8, f64)> = None;
        for (slot, (bounds, _)) in truth.iter().enumerate() {
            let v = iou(target, bounds);
            if v > HIT_TEST_IOU && best.map_or(true, |(_, bv)| v > bv) {
                best = Some((slot as u8, v));
            }
        }
        best.map(|(slot, _)| slot)
    }

    /// Executes an action, returning the typed outcome.
    pub fn exec_step(
        &mut self,
        action: &Action,
        target: Option<WidgetBox>,
    ) -> Result<StepOutcome, EnvError> {
        if self.crashed {
            return Err(EnvError::NeedsReset);
        }
        let kind = action.kind;

        // Page-level dimension changes never leave the screen.
        match kind {
            ActionKind::OrientationSwitch => {
                self.landscape = !self.landscape;
                return Ok(StepOutcome::Stayed);
            }
            ActionKind::WindowSize => {
                let ratio = action.parameter.unwrap_or(1.0).clamp(0.25, 2.0);
                self.window_scale = ratio;
                return Ok(StepOutcome::Stayed);
            }
            _ => {}
        }

        // Resolve the trigger form of this action.
        let (slot, bucket) = if kind.is_widget_action() {
            let Some(target) = target else {
                return Ok(StepOutcome::Stayed);
            };
            let Some(slot) = self.hit_test(&target) else {
                return Ok(StepOutcome::Stayed); // hit nothing interactive
            };
            let bucket = action.payload.map(|p| p as i8);
            (Some(slot), bucket)
        } else {
            let bucket = action.parameter.map(|p| if p < 0.0 { -1i8 } else { 1i8 });
            (None, bucket)
        };

        // Crash rules take precedence.
        for rule in &self.app.crashes {
            if rule.screen == self.current && rule.trigger.matches(kind, slot, bucket) {
                self.crashed = true;
                return Ok(StepOutcome::Crashed(rule.id));
            }
        }

        // Explicit transition rules.
        for rule in &self.app.transitions {
            if rule.from == self.current && rule.trigger.matches(kind, slot, bucket) {
                let satisfied = match rule.requires {
                    None => true,
                    Some(Guard::PermissionGranted) => self.permission_granted,
                    Some(Guard::NetworkOn) => self.network_on,
                };
                if !satisfied {
                    return Ok(StepOutcome::Stayed);
                }
                self.nav_stack.push(self.current);
                self.current = rule.to;
                return Ok(StepOutcome::Moved(rule.to));
            }
        }

        // System semantics.
        match kind {
            ActionKind::Return => match self.nav_stack.pop() {
                Some(prev) => {
                    self.current = prev;
                    Ok(StepOutcome::Moved(prev))
                }
                None => Ok(StepOutcome::Stayed),
            },
            ActionKind::AccessGrant => {
                self.permission_granted = true;
                Ok(StepOutcome::Stayed)
            }
            ActionKind::AccessDeny => {
                self.permission_granted = false;
                Ok(StepOutcome::Stayed)
            }
            ActionKind::NetworkSwitch => {
                self.network_on = !self.network_on;
                Ok(StepOutcome::Stayed)
            }
            _ => Ok(StepOutcome::Stayed),
        }
    }

    /// The transition rule that would fire, for log bookkeeping.
    fn fired_rule(&self, from: u32, to: u32, kind: ActionKind, slot: Option<u8>, bucket: Option<i8>) -> Option<String> {
        self.app
            .transitions
            .iter()
            .find(|r| r.from == from && r.to == to && r.trigger.matches(kind, slot, bucket))
            .map(TransitionRule::canonical)
    }
}

impl Environment for SimEnvironment {
    fn reset(&mut self) {
        self.current = self.app.start;
        self.nav_stack.clear();
        self.permission_granted = false;
        self.network_on = false;
        self.landscape = false;
        self.window_scale = 1.0;
        self.crashed = false;
    }

    fn screenshot(&self) -> Image {
        let (w, h) = self.current_dims();
        render(&self.app, self.current, w, h).expect("current screen is valid")
    }

    fn execute(&mut self, action: &Action, target: Option<WidgetBox>) -> Result<EnvStep, EnvError> {
        let from = self.current;
        // Recompute trigger identity for log purposes before state changes.
        let (slot, bucket) = if action.kind.is_widget_action() {
            let slot = target.as_ref().and_then(|t| self.hit_test(t));
            (slot, action.payload.map(|p| p as i8))
        } else {
            (
                None,
                action.parameter.map(|p| if p < 0.0 { -1i8 } else { 1i8 }),
            )
        };
        let outcome = self.exec_step(action, target)?;
        Ok(match outcome {
            StepOutcome::Moved(to) => {
                // `return` pops the stack without a rule; real rule moves are
                // recorded with the rule identity.
                let fired = self.fired_rule(from, to, action.kind, slot, bucket);
                EnvStep {
                    kind: OutcomeKind::Moved,
                    from_screen: from,
                    to_screen: to,
                    fired,
                    crash_id: None,
                }
            }
            StepOutcome::Stayed => EnvStep {
                kind: OutcomeKind::Stayed,
                from_screen: from,
                to_screen: from,
                fired: None,
                crash_id: None,
            },
            StepOutcome::Crashed(id) => EnvStep {
                kind: OutcomeKind::Crashed,
                from_screen: from,
                to_screen: from,
                fired: None,
                crash_id: Some(id),
            },
            StepOutcome::Reset(to) => EnvStep {
                kind: OutcomeKind::Reset,
                from_screen: from,
                to_screen: to,
                fired: None,
                crash_id: None,
            },
        })
    }

    fn current_screen(&self) -> u32 {
        self.current
    }

    fn descriptor(&self) -> EnvDescriptor {
        EnvDescriptor {
            app_seed: self.app.seed,
            screen_count: self.app.screens.len() as u32,
        }
    }
}

/// Ground-truth coverage of an episode log against its app.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoverageReport {
    pub screens_visited: Vec<u32>,
    pub screen_coverage: f64,
    pub transitions_fired: Vec<String>,
    pub transition_coverage: f64,
    pub crashes_found: Vec<u32>,
    /// Cumulative unique screens after each step.
    pub screen_curve: Vec<usize>,
}

/// Computes coverage; errors when the log belongs to a different app.
pub fn coverage(app: &SimApp, log: &EpisodeLog) -> Result<CoverageReport, SimError> {
    if log.meta.app_seed != app.seed {
        return Err(SimError::AppLogMismatch {
            log_seed: log.meta.app_seed,
            app_seed: app.seed,
        });
    }
    let mut screens: BTreeSet<u32> = BTreeSet::new();
    let mut transitions: BTreeSet<String> = BTreeSet::new();
    let mut crashes: BTreeSet<u32> = BTreeSet::new();
    let mut curve = Vec::with_capacity(log.steps.len());
    for step in &log.steps {
        screens.insert(step.from_screen);
        screens.insert(step.screen_id);
        if let Some(f) = &step.fired {
            transitions.insert(f.clone());
        }
        if let Some(c) = step.crash_id {
            crashes.insert(c);
        }
        curve.push(screens.len());
    }
    let total_screens = app.screens.len().max(1);
    let total_transitions = app.transitions.len();
    Ok(CoverageReport {
        screen_coverage: screens.len() as f64 / total_screens as f64,
        screens_visited: screens.into_iter().collect(),
        transition_coverage: if total_transitions == 0 {
            0.0
        } else {
            transitions.len() as f64 / total_transitions as f64
        },
        transitions_fired: transitions.into_iter().collect(),
        crashes_found: crashes.into_iter().collect(),
        screen_curve: curve,
    })
}
