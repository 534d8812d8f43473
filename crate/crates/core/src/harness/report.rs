//! Reports: a pure function of the episode log and its app. Recomputing a
//! report from its log reproduces it byte for byte, so all "timing" fields
//! are deterministic counters, never wall-clock readings.

use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

use super::HarnessError;
use crate::actions::ActionKind;
use crate::agent::EpisodeLog;
use crate::simenv::{coverage, SimApp};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionShare {
    pub kind: String,
    pub count: usize,
    pub percent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrashSighting {
    pub crash_id: u32,
    pub first_step: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub step: usize,
    pub screens: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegistryStats {
    pub pages: usize,
    pub new_page_events: usize,
    pub observations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunCounters {
    pub steps: usize,
    pub crash_events: usize,
    pub moves: usize,
    pub stays: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub policy: String,
    pub app_seed: u64,
    pub session_seed: u64,
    pub platform: String,
    pub budget: usize,
    pub total_screens: u32,
    pub screen_coverage: f64,
    pub screens_visited: Vec<u32>,
    pub total_transitions: usize,
    pub transition_coverage: f64,
    pub transitions_fired: Vec<String>,
    pub crashes: Vec<CrashSighting>,
    pub coverage_curve: Vec<CurvePoint>,
    pub action_distribution: Vec<ActionShare>,
    pub registry: RegistryStats,
    pub counters: RunCounters,
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Report, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// Per-kind percentage table over a log's executed actions; errors on an
/// empty log. Rows are ordered by kind id and omit unused kinds.
pub fn action_distribution(log: &EpisodeLog) -> Result<Vec<ActionShare>, HarnessError> {
    if log.steps.is_empty() {
        return Err(HarnessError::EmptyLog);
    }
    let mut counts = [0usize; crate::actions::ACTION_KIND_COUNT];
    for s in &log.steps {
        counts[s.action.kind.id() as usize] += 1;
    }
    let total = log.steps.len() as f64;
    Ok(ActionKind::all()
        .iter()
        .filter(|k| counts[k.id() as usize] > 0)
        .map(|k| ActionShare {
            kind: k.name().to_string(),
            count: counts[k.id() as usize],
            percent: 100.0 * counts[k.id() as usize] as f64 / total,
        })
        .collect())
}

/// Builds the report for a log against the app it was produced on.
pub fn build_report(log: &EpisodeLog, app: &SimApp) -> Result<Report, HarnessError> {
    let cov = coverage(app, log)?;
    let distribution = if log.steps.is_empty() {
        Vec::new()
    } else {
        action_distribution(log)?
    };

    let mut crash_first: Vec<CrashSighting> = Vec::new();
    let mut seen_crashes = BTreeSet::new();
    let mut pages = BTreeSet::new();
    let mut new_pages = 0usize;
    let mut moves = 0usize;
    let mut stays = 0usize;
    let mut crash_events = 0usize;
    for s in &log.steps {
        pages.insert(s.page_entry_id);
        if s.is_new_page {
            new_pages += 1;
        }
        match s.outcome {
            crate::agent::OutcomeKind::Moved | crate::agent::OutcomeKind::Reset => moves += 1,
            crate::agent::OutcomeKind::Stayed => stays += 1,
            crate::agent::OutcomeKind::Crashed => crash_events += 1,
        }
        if let Some(id) = s.crash_id {
            if seen_crashes.insert(id) {
                crash_first.push(CrashSighting {
                    crash_id: id,
                    first_step: s.step,
                });
            }
        }
    }
    crash_first.sort_by_key(|c| c.crash_id);

    Ok(Report {
        policy: log.meta.policy.clone(),
        app_seed: log.meta.app_seed,
        session_seed: log.meta.session_seed,
        platform: match log.meta.platform {
            crate::actions::Platform::Mobile => "mobile".into(),
            crate::actions::Platform::Web => "web".into(),
        },
        budget: log.meta.budget,
        total_screens: app.screens.len() as u32,
        screen_coverage: cov.screen_coverage,
        screens_visited: cov.screens_visited,
        total_transitions: app.transitions.len(),
        transition_coverage: cov.transition_coverage,
        transitions_fired: cov.transitions_fired,
        crashes: crash_first,
        coverage_curve: cov
            .screen_curve
            .iter()
            .enumerate()
            .map(|(i, screens)| CurvePoint {
                step: i + 1,
                screens: *screens,
            })
            .collect(),
        action_distribution: distribution,
        registry: RegistryStats {
            pages: pages.len(),
            new_page_events: new_pages,
            // Initial observation plus one per step.
            observations: log.steps.len() + 1,
        },
        counters: RunCounters {
            steps: log.steps.len(),
            crash_events,
            moves,
            stays,
        },
    })
}

/// Which ground-truth universe a coverage set ranges over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UniverseKind {
    Screens,
    Transitions,
}

/// A coverage set tied to one app and universe.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoverageSet {
    pub app_seed: u64,
    pub universe: UniverseKind,
    pub items: BTreeSet<String>,
}

impl CoverageSet {
    pub fn screens(report: &Report) -> CoverageSet {
        CoverageSet {
            app_seed: report.app_seed,
            universe: UniverseKind::Screens,
            items: report.screens_visited.iter().map(u32::to_string).collect(),
        }
    }

    pub fn transitions(report: &Report) -> CoverageSet {
        CoverageSet {
            app_seed: report.app_seed,
            universe: UniverseKind::Transitions,
            items: report.transitions_fired.iter().cloned().collect(),
        }
    }

    fn universe_tag(&self) -> String {
        format!("{:?}/{}", self.universe, self.app_seed)
    }
}

/// Cross-coverage: the fraction of `a`'s covered items that `b` missed
/// (`|a \ b| / |a|`, 0 for empty `a`).
pub fn cross_coverage(a: &CoverageSet, b: &CoverageSet) -> Result<f64, HarnessError> {
    if a.app_seed != b.app_seed || a.universe != b.universe {
        return Err(HarnessError::UniverseMismatch {
            a: a.universe_tag(),
            b: b.universe_tag(),
        });
    }
    if a.items.is_empty() {
        return Ok(0.0);
    }
    let only_a = a.items.difference(&b.items).count();
    Ok(only_a as f64 / a.items.len() as f64)
}

/// Companion: the number of items covered by both.
pub fn intersection_coverage(a: &CoverageSet, b: &CoverageSet) -> Result<usize, HarnessError> {
    if a.app_seed != b.app_seed || a.universe != b.universe {
        return Err(HarnessError::UniverseMismatch {
            a: a.universe_tag(),
            b: b.universe_tag(),
        });
    }
    Ok(a.items.intersection(&b.items).count())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(app_seed: u64, items: &[&str]) -> CoverageSet {
        CoverageSet {
            app_seed,
            universe: UniverseKind::Screens,
            items: items.iter().map(|s| s.to_string()).collect(),
        }
    }

    #[test]
    fn cross_coverage_of_identical_sets_is_zero() {
        let a = set(1, &["1", "2", "3"]);
        assert_eq!(cross_coverage(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn cross_coverage_of_disjoint_sets_is_one() {
        let a = set(1, &["1", "2"]);
        let b = set(1, &["3"]);
        assert_eq!(cross_coverage(&a, &b).unwrap(), 1.0);
    }

    #[test]
    fn cross_coverage_hand_case() {
        // {1,2,3,4} vs {3,4,5}: |a \ b| = 2, |a| = 4.
        let a = set(1, &["1", "2", "3", "4"]);
        let b = set(1, &["3", "4", "5"]);
        assert_eq!(cross_coverage(&a, &b).unwrap(), 0.5);
        assert_eq!(intersection_coverage(&a, &b).unwrap(), 2);
    }

    #[test]
    fn empty_a_is_zero_by_definition() {
        let a = set(1, &[]);
        let b = set(1, &["1"]);
        assert_eq!(cross_coverage(&a, &b).unwrap(), 0.0);
    }

    #[test]
    fn cross_plus_intersection_fraction_is_one() {
        let a = set(1, &["1", "2", "3", "4"]);
        let b = set(1, &["3", "4", "5"]);
        let cross = cross_coverage(&a, &b).unwrap();
        let inter = intersection_coverage(&a, &b).unwrap() as f64 / a.items.len() as f64;
        assert!((cross + inter - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mismatched_universes_error() {
        let a = set(1, &["1"]);
        let b = set(2, &["1"]);
        assert!(matches!(
            cross_coverage(&a, &b),
            Err(HarnessError::UniverseMismatch { .. })
        ));
    }
}
