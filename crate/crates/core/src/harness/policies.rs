//! Baseline policies: structure-aware uniform random, and the blind
//! coordinate monkey.

use rand::Rng;

use crate::actions::{Action, ActionKind, Platform, INPUT_PAYLOADS};
use crate::agent::{AgentError, ChoiceContext, ExplorationPolicy, PolicyChoice, Transition};
use crate::vision::WidgetBox;

/// Draws uniformly from the applicable action set.
pub struct RandomPolicy;

impl ExplorationPolicy for RandomPolicy {
    fn name(&self) -> &'static str {
        "random"
    }

    fn choose(&mut self, ctx: &mut ChoiceContext<'_>) -> Result<PolicyChoice, AgentError> {
        if ctx.candidates.is_empty() {
            return Err(AgentError::NoCandidates);
        }
        let idx = ctx.rng.gen_range(0..ctx.candidates.len());
        Ok(PolicyChoice {
            action: ctx.candidates[idx].action.clone(),
            override_target: None,
            q_summary: None,
        })
    }

    fn record(&mut self, _transition: Transition) {}

    fn train_if_due(&mut self, _step: usize) -> Result<Option<f64>, AgentError> {
        Ok(None)
    }
}

/// Blind pseudo-random event generator: a random kind at a random
/// coordinate, so clicks may land on nothing interactive.
pub struct MonkeyPolicy {
    pub platform: Platform,
}

impl ExplorationPolicy for MonkeyPolicy {
    fn name(&self) -> &'static str {
        "monkey"
    }

    fn choose(&mut self, ctx: &mut ChoiceContext<'_>) -> Result<PolicyChoice, AgentError> {
        let kinds: Vec<ActionKind> = ActionKind::all()
            .into_iter()
            .filter(|k| k.scope().applies_to(self.platform))
            .collect();
        let kind = kinds[ctx.rng.gen_range(0..kinds.len())];
        let mut action = Action::bare(kind);
        let mut override_target = None;
        if kind.is_widget_action() {
            let x = ctx.rng.gen_range(0..ctx.screen_width.max(3) - 2);
            let y = ctx.rng.gen_range(0..ctx.screen_height.max(3) - 2);
            override_target = Some(WidgetBox::new(x, y, 2, 2));
            if kind == ActionKind::Input {
                let idx = ctx.rng.gen_range(0..INPUT_PAYLOADS.len());
                action.payload = Some(idx);
                action.parameter = Some(idx as f64 / (INPUT_PAYLOADS.len() - 1) as f64);
            }
        } else {
            match kind {
                ActionKind::Swipe => {
                    action.parameter = Some(if ctx.rng.gen_bool(0.5) { 1.0 } else { -1.0 });
                }
                ActionKind::WindowSize => {
                    action.parameter = Some(ctx.rng.gen_range(0.25..2.0));
                }
                ActionKind::OrientationSwitch => {
                    action.parameter = Some(1.0);
                }
                _ => {}
            }
        }
        Ok(PolicyChoice {
            action,
            override_target,
            q_summary: None,
        })
    }

    fn record(&mut self, _transition: Transition) {}

    fn train_if_due(&mut self, _step: usize) -> Result<Option<f64>, AgentError> {
        Ok(None)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agent::ActionCandidate;
    use crate::embedding::{EmbedDims, LayoutEncoder, StateEmbedder};
    use crate::vision::{Image, VisionConfig};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ctx_page() -> crate::embedding::PageState {
        let embedder = StateEmbedder::new(
            EmbedDims {
                d_img: 4,
                d_loc: 4,
                d_layout: 4,
            },
            VisionConfig::default(),
            0.05,
            LayoutEncoder::structural(4),
        );
        embedder.page_state(&Image::filled(64, 64, 128)).unwrap()
    }

    #[test]
    fn single_candidate_random_policy_returns_it() {
        let page = ctx_page();
        let candidates = vec![ActionCandidate {
            action: Action::bare(ActionKind::Return),
            embedding: vec![0.0],
        }];
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut ctx = ChoiceContext {
            page: &page,
            candidates: &candidates,
            screen_width: 64,
            screen_height: 64,
            rng: &mut rng,
        };
        let choice = RandomPolicy.choose(&mut ctx).unwrap();
        assert_eq!(choice.action.kind, ActionKind::Return);
    }

    #[test]
    fn monkey_targets_are_blind_coordinates() {
        let page = ctx_page();
        let candidates: Vec<ActionCandidate> = vec![];
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut monkey = MonkeyPolicy {
            platform: Platform::Mobile,
        };
        let mut widget_actions = 0;
        for _ in 0..200 {
            let mut ctx = ChoiceContext {
                page: &page,
                candidates: &candidates,
                screen_width: 360,
                screen_height: 640,
                rng: &mut rng,
            };
            let choice = monkey.choose(&mut ctx).unwrap();
            assert!(choice.action.kind.scope().applies_to(Platform::Mobile));
            if choice.action.kind.is_widget_action() {
                widget_actions += 1;
                assert!(choice.action.target.is_none());
                let b = choice.override_target.unwrap();
                assert!(b.right() <= 360 && b.bottom() <= 640);
            }
        }
        assert!(widget_actions > 0);
    }
}
