//! The benchmark suite: many seeded apps x repetitions x policies, run in
//! parallel, aggregated into medians, a Wilcoxon comparison, and CSV rows.

use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::path::Path;

use super::config::{PolicyKind, RunConfig};
use super::runner::run_on_app;
use super::stats::{median, wilcoxon_signed_rank_greater};
use super::HarnessError;
use crate::par;
use crate::simenv::generate_app;

/// Suite definition: the cross product of app seeds, repetitions, and
/// policies over a shared base configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct BenchSuite {
    pub app_seeds: Vec<u64>,
    pub repetitions: u64,
    pub policies: Vec<PolicyKind>,
    pub base: RunConfig,
}

impl Default for BenchSuite {
    fn default() -> Self {
        BenchSuite::canonical()
    }
}

impl BenchSuite {
    /// The canonical benchmark: 20 generated apps (seeds 1-20, ~30 screens,
    /// crash rate 0.03), 300-step budget, 5 repetitions per policy, with the
    /// small test-mode network so the whole suite runs on a desktop CPU.
    pub fn canonical() -> Self {
        let mut base = RunConfig::default();
        base.budget = 300;
        base.network.hidden_width = 16;
        base.network.hidden_layers = 4;
        BenchSuite {
            app_seeds: (1..=20).collect(),
            repetitions: 5,
            policies: vec![PolicyKind::Dqn, PolicyKind::Random],
            base,
        }
    }

    pub fn from_json(text: &str) -> Result<BenchSuite, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// One run's result row.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchRun {
    pub app_seed: u64,
    pub policy: String,
    pub repetition: u64,
    pub agent_seed: u64,
    pub screen_coverage: f64,
    pub transition_coverage: f64,
    pub unique_screens: usize,
    pub total_screens: u32,
    pub crashes: Vec<u32>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolicyAggregate {
    pub policy: String,
    pub median_screen_coverage: f64,
    pub mean_screen_coverage: f64,
    pub median_transition_coverage: f64,
    /// Distinct (app, crash id) pairs found across all runs.
    pub distinct_crashes: usize,
}

/// Paired comparison of the learning agent against the random baseline.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Comparison {
    pub dqn_median: f64,
    pub random_median: f64,
    pub relative_median_improvement: f64,
    /// One-sided Wilcoxon signed-rank p over per-app median coverage pairs.
    pub wilcoxon_p: f64,
    pub dqn_crashes: usize,
    pub random_crashes: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchSummary {
    pub runs: Vec<BenchRun>,
    pub per_policy: Vec<PolicyAggregate>,
    pub comparison: Option<Comparison>,
}

/// Deterministic per-run agent seed.
fn agent_seed(app_seed: u64, policy: PolicyKind, rep: u64) -> u64 {
    let policy_tag = match policy {
        PolicyKind::Dqn => 1u64,
        PolicyKind::Random => 2,
        PolicyKind::Monkey => 3,
    };
    1_000_000 + app_seed * 1_000 + policy_tag * 100 + rep
}

/// Runs the whole suite. Independent runs execute in parallel when the
/// `parallel` feature is enabled; each run owns its environment, registry,
/// memory, and network, so results are identical either way.
pub fn run_bench(suite: &BenchSuite) -> Result<BenchSummary, HarnessError> {
    let mut specs: Vec<(u64, PolicyKind, u64)> = Vec::new();
    for &app_seed in &suite.app_seeds {
        for &policy in &suite.policies {
            for rep in 0..suite.repetitions {
                specs.push((app_seed, policy, rep));
            }
        }
    }

    let results = par::map_slice(&specs, |(app_seed, policy, rep)| -> Result<BenchRun, String> {
        let mut cfg = suite.base.clone();
        cfg.seeds.app = *app_seed;
        cfg.policy = *policy;
        cfg.seeds.agent = agent_seed(*app_seed, *policy, *rep);
        let app = generate_app(&cfg.app.gen_params(*app_seed)).map_err(|e| e.to_string())?;
        let artifacts = run_on_app(&cfg, &app).map_err(|e| e.to_string())?;
        Ok(BenchRun {
            app_seed: *app_seed,
            policy: policy.name().to_string(),
            repetition: *rep,
            agent_seed: cfg.seeds.agent,
            screen_coverage: artifacts.report.screen_coverage,
            transition_coverage: artifacts.report.transition_coverage,
            unique_screens: artifacts.report.screens_visited.len(),
            total_screens: artifacts.report.total_screens,
            crashes: artifacts
                .report
                .crashes
                .iter()
                .map(|c| c.crash_id)
                .collect(),
        })
    });
    let mut runs = Vec::with_capacity(results.len());
    for r in results {
        match r {
            Ok(row) => runs.push(row),
            Err(message) => {
                return Err(HarnessError::Config {
                    path: "bench".into(),
                    message,
                })
            }
        }
    }

    let mut per_policy = Vec::new();
    for &policy in &suite.policies {
        let name = policy.name();
        let rows: Vec<&BenchRun> = runs.iter().filter(|r| r.policy == name).collect();
        if rows.is_empty() {
            continue;
        }
        let coverages: Vec<f64> = rows.iter().map(|r| r.screen_coverage).collect();
        let transitions: Vec<f64> = rows.iter().map(|r| r.transition_coverage).collect();
        let mut crash_set: BTreeSet<(u64, u32)> = BTreeSet::new();
        for r in &rows {
            for c in &r.crashes {
                crash_set.insert((r.app_seed, *c));
            }
        }
        per_policy.push(PolicyAggregate {
            policy: name.to_string(),
            median_screen_coverage: median(&coverages),
            mean_screen_coverage: coverages.iter().sum::<f64>() / coverages.len() as f64,
            median_transition_coverage: median(&transitions),
            distinct_crashes: crash_set.len(),
        });
    }

    let comparison = build_comparison(suite, &runs, &per_policy);
    Ok(BenchSummary {
        runs,
        per_policy,
        comparison,
    })
}

fn build_comparison(
    suite: &BenchSuite,
    runs: &[BenchRun],
    per_policy: &[PolicyAggregate],
) -> Option<Comparison> {
    let dqn = per_policy.iter().find(|p| p.policy == "dqn")?;
    let random = per_policy.iter().find(|p| p.policy == "random")?;
    // Paired per-app medians over repetitions.
    let mut dqn_by_app = Vec::new();
    let mut random_by_app = Vec::new();
    for &app_seed in &suite.app_seeds {
        let of = |policy: &str| -> Vec<f64> {
            runs.iter()
                .filter(|r| r.app_seed == app_seed && r.policy == policy)
                .map(|r| r.screen_coverage)
                .collect()
        };
        let d = of("dqn");
        let r = of("random");
        if d.is_empty() || r.is_empty() {
            return None;
        }
        dqn_by_app.push(median(&d));
        random_by_app.push(median(&r));
    }
    let relative = if random.median_screen_coverage > 0.0 {
        (dqn.median_screen_coverage - random.median_screen_coverage)
            / random.median_screen_coverage
    } else {
        f64::INFINITY
    };
    Some(Comparison {
        dqn_median: dqn.median_screen_coverage,
        random_median: random.median_screen_coverage,
        relative_median_improvement: relative,
        wilcoxon_p: wilcoxon_signed_rank_greater(&dqn_by_app, &random_by_app),
        dqn_crashes: dqn.distinct_crashes,
        random_crashes: random.distinct_crashes,
    })
}

/// Writes the per-run rows as CSV.
pub fn write_csv(summary: &BenchSummary, path: &Path) -> Result<(), HarnessError> {
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record([
        "app_seed",
        "policy",
        "repetition",
        "agent_seed",
        "screen_coverage",
        "transition_coverage",
        "unique_screens",
        "total_screens",
        "crashes_found",
    ])?;
    for r in &summary.runs {
        writer.write_record([
            r.app_seed.to_string(),
            r.policy.clone(),
            r.repetition.to_string(),
            r.agent_seed.to_string(),
            format!("{:.6}", r.screen_coverage),
            format!("{:.6}", r.transition_coverage),
            r.unique_screens.to_string(),
            r.total_screens.to_string(),
            r.crashes.len().to_string(),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tiny_suite_runs_and_aggregates() {
        let mut suite = BenchSuite::canonical();
        suite.app_seeds = vec![1, 2];
        suite.repetitions = 1;
        suite.base.budget = 12;
        suite.base.app.screens = 4;
        suite.base.dims.d_img = 16;
        suite.base.dims.d_loc = 16;
        suite.base.dims.d_layout = 8;
        suite.base.network.hidden_width = 8;
        suite.base.network.hidden_layers = 2;
        suite.base.agent.batch_size = 8;
        let summary = run_bench(&suite).unwrap();
        assert_eq!(summary.runs.len(), 4);
        assert_eq!(summary.per_policy.len(), 2);
        assert!(summary.comparison.is_some());
    }

    #[test]
    fn suite_json_round_trips_with_defaults() {
        let text = r#"{"app_seeds": [5], "repetitions": 2}"#;
        let suite = BenchSuite::from_json(text).unwrap();
        assert_eq!(suite.app_seeds, vec![5]);
        assert_eq!(suite.repetitions, 2);
        assert_eq!(suite.policies.len(), 2);
    }
}
