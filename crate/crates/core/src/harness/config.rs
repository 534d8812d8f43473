//! Run configuration: seeds, dimensions, thresholds, agent hyper-parameters,
//! budget, platform, and policy. Serializable with full defaults so partial
//! config files stay valid.

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::actions::{ActionConfig, Platform};
use crate::agent::DqnParams;
use crate::embedding::{EmbedDims, SimilarityParams};
use crate::simenv::GenParams;
use crate::vision::VisionConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolicyKind {
    Dqn,
    Random,
    Monkey,
}

impl PolicyKind {
    pub fn name(&self) -> &'static str {
        match self {
            PolicyKind::Dqn => "dqn",
            PolicyKind::Random => "random",
            PolicyKind::Monkey => "monkey",
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct Seeds {
    pub app: u64,
    pub agent: u64,
    pub encoder: u64,
}

impl Default for Seeds {
    fn default() -> Self {
        Seeds {
            app: 1,
            agent: 1,
            encoder: 7,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct NetworkShape {
    pub hidden_width: usize,
    pub hidden_layers: usize,
}

impl Default for NetworkShape {
    fn default() -> Self {
        NetworkShape {
            hidden_width: 512,
            hidden_layers: 4,
        }
    }
}

/// Layout-encoder selection: training-free structural features, or the
/// recurrent encoder trained on a seeded corpus at startup.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EncoderKind {
    Structural,
    Trained,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct EncoderConfig {
    pub kind: EncoderKind,
    /// Corpus size when training (the recipe default is 100 strings).
    pub corpus_size: usize,
    pub epochs: usize,
    pub learning_rate: f64,
}

impl Default for EncoderConfig {
    fn default() -> Self {
        EncoderConfig {
            kind: EncoderKind::Structural,
            corpus_size: 100,
            epochs: 5,
            learning_rate: 0.02,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct AppGenConfig {
    pub screens: u32,
    pub widgets_min: usize,
    pub widgets_max: usize,
    pub edge_density: f64,
    pub crash_rate: f64,
}

impl Default for AppGenConfig {
    fn default() -> Self {
        AppGenConfig {
            screens: 30,
            widgets_min: 3,
            widgets_max: 8,
            edge_density: 0.3,
            crash_rate: 0.03,
        }
    }
}

impl AppGenConfig {
    pub fn gen_params(&self, seed: u64) -> GenParams {
        GenParams {
            seed,
            n_screens: self.screens,
            widgets_min: self.widgets_min,
            widgets_max: self.widgets_max,
            edge_density: self.edge_density,
            crash_rate: self.crash_rate,
        }
    }
}

/// Thresholds grouped as in the module contracts.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct Thresholds {
    pub similarity: SimilarityParams,
    pub vision: VisionConfig,
    pub gap_threshold: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            similarity: SimilarityParams::default(),
            vision: VisionConfig::default(),
            gap_threshold: 0.05,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub seeds: Seeds,
    pub dims: EmbedDims,
    pub network: NetworkShape,
    pub thresholds: Thresholds,
    pub agent: DqnParams,
    pub encoder: EncoderConfig,
    pub actions: ActionConfig,
    pub app: AppGenConfig,
    pub platform: Platform,
    pub policy: PolicyKind,
    pub budget: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seeds: Seeds::default(),
            dims: EmbedDims::default(),
            network: NetworkShape::default(),
            thresholds: Thresholds::default(),
            agent: DqnParams::default(),
            encoder: EncoderConfig::default(),
            actions: ActionConfig::default(),
            app: AppGenConfig::default(),
            platform: Platform::Mobile,
            policy: PolicyKind::Dqn,
            budget: 300,
        }
    }
}

impl RunConfig {
    /// Validates documented ranges; collects every violation with its field
    /// path.
    pub fn validate(&self) -> Result<(), Vec<HarnessError>> {
        let mut issues = Vec::new();
        let mut check = |ok: bool, path: &str, message: String| {
            if !ok {
                issues.push(HarnessError::Config {
                    path: path.to_string(),
                    message,
                });
            }
        };
        let s = &self.thresholds.similarity;
        check(
            (0.0..=1.0).contains(&s.same_page_threshold),
            "thresholds.similarity.same_page_threshold",
            format!("{} outside [0, 1]", s.same_page_threshold),
        );
        check(
            (0.0..=1.0).contains(&s.iou_threshold),
            "thresholds.similarity.iou_threshold",
            format!("{} outside [0, 1]", s.iou_threshold),
        );
        check(
            (s.widget_weight + s.layout_weight - 1.0).abs() < 1e-9,
            "thresholds.similarity",
            format!(
                "weights {} + {} must sum to 1",
                s.widget_weight, s.layout_weight
            ),
        );
        let v = &self.thresholds.vision;
        check(
            v.canny_low >= 0.0 && v.canny_low <= v.canny_high,
            "thresholds.vision",
            format!("canny thresholds ({}, {}) invalid", v.canny_low, v.canny_high),
        );
        check(
            (0.0..=1.0).contains(&v.min_area_fraction),
            "thresholds.vision.min_area_fraction",
            format!("{} outside [0, 1]", v.min_area_fraction),
        );
        check(
            (0.0..=1.0).contains(&self.thresholds.gap_threshold),
            "thresholds.gap_threshold",
            format!("{} outside [0, 1]", self.thresholds.gap_threshold),
        );
        check(
            (0.0..=1.0).contains(&self.agent.gamma),
            "agent.gamma",
            format!("{} outside [0, 1]", self.agent.gamma),
        );
        check(
            self.agent.temperature > 0.0,
            "agent.temperature",
            format!("{} must be positive", self.agent.temperature),
        );
        check(
            self.agent.batch_size % 2 == 0 && self.agent.batch_size > 0,
            "agent.batch_size",
            format!("{} must be a positive even count", self.agent.batch_size),
        );
        check(
            self.agent.memory_capacity >= self.agent.batch_size,
            "agent.memory_capacity",
            format!(
                "{} smaller than batch size {}",
                self.agent.memory_capacity, self.agent.batch_size
            ),
        );
        let d = &self.dims;
        let square = |x: usize| {
            let s = (x as f64).sqrt().round() as usize;
            s * s == x && x > 0
        };
        check(
            square(d.d_img),
            "dims.d_img",
            format!("{} is not a perfect square", d.d_img),
        );
        check(
            square(d.d_loc),
            "dims.d_loc",
            format!("{} is not a perfect square", d.d_loc),
        );
        check(d.d_layout > 0, "dims.d_layout", "must be positive".into());
        check(
            self.network.hidden_width > 0 && self.network.hidden_layers > 0,
            "network",
            "hidden width and depth must be positive".into(),
        );
        check(
            self.app.screens >= 2,
            "app.screens",
            format!("{} below the minimum of 2", self.app.screens),
        );
        check(
            self.app.widgets_min >= 1 && self.app.widgets_min <= self.app.widgets_max,
            "app.widgets",
            format!(
                "bad widget range [{}, {}]",
                self.app.widgets_min, self.app.widgets_max
            ),
        );
        if issues.is_empty() {
            Ok(())
        } else {
            Err(issues)
        }
    }

    pub fn from_json(text: &str) -> Result<RunConfig, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid() {
        assert!(RunConfig::default().validate().is_ok());
    }

    #[test]
    fn violations_carry_field_paths() {
        let mut cfg = RunConfig::default();
        cfg.agent.temperature = -1.0;
        cfg.dims.d_img = 15;
        let issues = cfg.validate().unwrap_err();
        let text: Vec<String> = issues.iter().map(|e| e.to_string()).collect();
        assert!(text.iter().any(|t| t.contains("agent.temperature")));
        assert!(text.iter().any(|t| t.contains("dims.d_img")));
    }

    #[test]
    fn partial_json_fills_defaults() {
        let cfg = RunConfig::from_json(r#"{"budget": 50, "policy": "random"}"#).unwrap();
        assert_eq!(cfg.budget, 50);
        assert_eq!(cfg.policy, PolicyKind::Random);
        assert_eq!(cfg.agent.batch_size, 64);
        assert_eq!(cfg.dims.d_img, 64);
    }

    #[test]
    fn config_json_round_trips() {
        let cfg = RunConfig::default();
        let back = RunConfig::from_json(&cfg.to_json()).unwrap();
        assert_eq!(cfg.to_json(), back.to_json());
    }
}
