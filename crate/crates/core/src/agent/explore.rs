//! The exploration session loop and the DQN policy.
//!
//! One session is strictly sequential: screenshot -> page state -> registry
//! -> applicable actions -> policy choice -> environment step -> reward ->
//! transition record -> periodic retraining. The loop itself is policy
//! agnostic so the baselines (uniform random, coordinate monkey) replay the
//! exact same bookkeeping; only the choice and the learning hooks differ.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{
    reward, select_action, AgentError, EnvStep, Environment, ExplorationMemory, OutcomeKind,
    QNetwork, Transition,
};
use crate::actions::{applicable_actions, embed_action, Action, ActionConfig, Platform};
use crate::embedding::{PageState, StateEmbedder};
use crate::vision::WidgetBox;

/// An applicable action with its embedding.
#[derive(Debug, Clone)]
pub struct ActionCandidate {
    pub action: Action,
    pub embedding: Vec<f64>,
}

/// Q-value digest logged per step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QSummary {
    pub max: f64,
    pub min: f64,
    pub mean: f64,
    pub chosen: f64,
}

impl QSummary {
    pub fn from_values(values: &[f64], chosen: usize) -> QSummary {
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        QSummary {
            max,
            min,
            mean,
            chosen: values[chosen],
        }
    }
}

/// What a policy decided for one step.
#[derive(Debug, Clone)]
pub struct PolicyChoice {
    pub action: Action,
    /// Raw coordinate target overriding the page's widget box (monkey).
    pub override_target: Option<WidgetBox>,
    pub q_summary: Option<QSummary>,
}

/// Per-step context handed to the policy.
pub struct ChoiceContext<'a> {
    pub page: &'a PageState,
    pub candidates: &'a [ActionCandidate],
    pub screen_width: usize,
    pub screen_height: usize,
    pub rng: &'a mut ChaCha8Rng,
}

pub trait ExplorationPolicy {
    fn name(&self) -> &'static str;

    fn choose(&mut self, ctx: &mut ChoiceContext<'_>) -> Result<PolicyChoice, AgentError>;

    /// Observes the completed transition (learning policies store it).
    fn record(&mut self, transition: Transition);

    /// Called after every step; a learning policy may train and report the
    /// final-epoch loss.
    fn train_if_due(&mut self, step: usize) -> Result<Option<f64>, AgentError>;

    /// Learned network, when the policy has one (for persistence).
    fn network(&self) -> Option<&QNetwork> {
        None
    }
}

/// DQN hyper-parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DqnParams {
    pub gamma: f64,
    pub temperature: f64,
    pub system_weight: f64,
    pub train_interval: usize,
    pub batch_size: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub memory_capacity: usize,
}

impl Default for DqnParams {
    fn default() -> Self {
        DqnParams {
            gamma: 0.9,
            temperature: 1.0,
            system_weight: 0.5,
            train_interval: 10,
            batch_size: 64,
            epochs: 5,
            learning_rate: 0.01,
            memory_capacity: 10_000,
        }
    }
}

/// Curiosity-driven deep-Q policy: Boltzmann selection over category-weighted
/// Q-values, exploration memory, recent/random batch sampling, and periodic
/// retraining against the live-network targets.
pub struct DqnPolicy {
    pub net: QNetwork,
    pub memory: ExplorationMemory,
    pub params: DqnParams,
    rng: ChaCha8Rng,
}

impl DqnPolicy {
    pub fn new(net: QNetwork, params: DqnParams, seed: u64) -> Self {
        DqnPolicy {
            memory: ExplorationMemory::new(params.memory_capacity),
            net,
            params,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

/// Target Q-value for a stored transition against the given (live) network:
/// `r + gamma * max over next actions of Q(s', a')`.
pub fn target_q(t: &Transition, net: &QNetwork, gamma: f64) -> Result<f64, AgentError> {
    let mut best = f64::NEG_INFINITY;
    for a in &t.next_actions {
        let q = net.q_value(&t.next_state, a)?;
        if q > best {
            best = q;
        }
    }
    if !best.is_finite() {
        // Degenerate: no next actions recorded. The loop never produces this
        // (system actions always exist), but stay total.
        best = 0.0;
    }
    Ok(t.reward + gamma * best)
}

impl ExplorationPolicy for DqnPolicy {
    fn name(&self) -> &'static str {
        "dqn"
    }

    fn choose(&mut self, ctx: &mut ChoiceContext<'_>) -> Result<PolicyChoice, AgentError> {
        let pairs: Vec<(Action, Vec<f64>)> = ctx
            .candidates
            .iter()
            .map(|c| (c.action.clone(), c.embedding.clone()))
            .collect();
        let outcome = select_action(
            &self.net,
            &ctx.page.state_vec,
            &pairs,
            self.params.temperature,
            self.params.system_weight,
            ctx.rng,
        )?;
        Ok(PolicyChoice {
            action: ctx.candidates[outcome.index].action.clone(),
            override_target: None,
            q_summary: Some(QSummary::from_values(&outcome.q_values, outcome.index)),
        })
    }

    fn record(&mut self, transition: Transition) {
        self.memory.push(transition);
    }

    fn train_if_due(&mut self, step: usize) -> Result<Option<f64>, AgentError> {
        if self.params.train_interval == 0 || step % self.params.train_interval != 0 {
            return Ok(None);
        }
        if self.memory.len() < self.params.batch_size {
            return Ok(None);
        }
        let batch = self.memory.sample_batch(self.params.batch_size, &mut self.rng)?;
        // Targets are computed lazily at training time on the live network.
        let mut samples = Vec::with_capacity(batch.len());
        for t in &batch {
            let target = target_q(t, &self.net, self.params.gamma)?;
            let mut input = Vec::with_capacity(t.state.len() + t.action.len());
            input.extend_from_slice(&t.state);
            input.extend_from_slice(&t.action);
            samples.push(super::TrainSample { input, target });
        }
        let loss = self.net.train(
            &samples,
            self.params.learning_rate,
            self.params.epochs,
            &mut self.rng,
        )?;
        Ok(Some(loss))
    }

    fn network(&self) -> Option<&QNetwork> {
        Some(&self.net)
    }
}

/// Session-level configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SessionConfig {
    pub budget: usize,
    pub platform: Platform,
    pub seed: u64,
    pub action_config: ActionConfig,
}

/// Log header: enough to recompute every report field.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetaRecord {
    #[serde(rename = "type")]
    pub record_type: String,
    pub policy: String,
    pub app_seed: u64,
    pub app_screens: u32,
    pub session_seed: u64,
    pub budget: usize,
    pub platform: Platform,
}

/// One step of the episode log.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StepRecord {
    #[serde(rename = "type")]
    pub record_type: String,
    pub step: usize,
    pub page_entry_id: usize,
    pub is_new_page: bool,
    pub action: Action,
    pub reward: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q_summary: Option<QSummary>,
    pub from_screen: u32,
    pub screen_id: u32,
    pub outcome: OutcomeKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fired: Option<String>,
    #[serde(rename = "crash", skip_serializing_if = "Option::is_none")]
    pub crash_id: Option<u32>,
}

/// Replayable episode log (newline-delimited JSON on disk).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EpisodeLog {
    pub meta: MetaRecord,
    pub steps: Vec<StepRecord>,
}

impl EpisodeLog {
    pub fn to_ndjson(&self) -> String {
        let mut out = serde_json::to_string(&self.meta).expect("meta serializes");
        out.push('\n');
        for s in &self.steps {
            out.push_str(&serde_json::to_string(s).expect("step serializes"));
            out.push('\n');
        }
        out
    }

    pub fn from_ndjson(text: &str) -> Result<EpisodeLog, serde_json::Error> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let meta: MetaRecord = serde_json::from_str(lines.next().unwrap_or("{}"))?;
        let mut steps = Vec::new();
        for line in lines {
            steps.push(serde_json::from_str(line)?);
        }
        Ok(EpisodeLog { meta, steps })
    }
}

/// Everything known about the page the session currently sits on.
struct CurrentPage {
    page: PageState,
    entry_id: usize,
    candidates: Vec<ActionCandidate>,
}

/// Runs one exploration session against an environment.
///
/// The caller provides a freshly reset environment. Rewards and registry
/// bookkeeping follow the curiosity rule: the reward of a step uses the
/// source entry's visit count and the destination entry's (m, n) as found on
/// arrival; the executed action is marked on the source entry afterwards. On
/// a crash the environment is reset and the start page is observed as the
/// destination.
pub fn run_session(
    env: &mut dyn Environment,
    embedder: &StateEmbedder,
    policy: &mut dyn ExplorationPolicy,
    registry: &mut super::PageRegistry,
    cfg: &SessionConfig,
) -> Result<EpisodeLog, AgentError> {
    let descriptor = env.descriptor();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let widget_dim = embedder.dims.widget_dim();

    let observe = |env: &dyn Environment,
                   registry: &mut super::PageRegistry|
     -> Result<(CurrentPage, bool), AgentError> {
        let img = env.screenshot();
        let page = embedder.page_state(&img)?;
        let actions = applicable_actions(&page, cfg.platform, &cfg.action_config);
        let mut candidates = Vec::with_capacity(actions.len());
        for action in actions {
            let embedding = embed_action(&action, &page, widget_dim)?;
            candidates.push(ActionCandidate { action, embedding });
        }
        let outcome = registry.register(page.clone(), candidates.len());
        Ok((
            CurrentPage {
                page,
                entry_id: outcome.entry_id,
                candidates,
            },
            outcome.is_new,
        ))
    };

    let (mut current, _) = observe(env, registry)?;
    let mut steps = Vec::with_capacity(cfg.budget);

    for step in 1..=cfg.budget {
        let img_dims = {
            let img = env.screenshot();
            (img.width(), img.height())
        };
        let choice = {
            let mut ctx = ChoiceContext {
                page: &current.page,
                candidates: &current.candidates,
                screen_width: img_dims.0,
                screen_height: img_dims.1,
                rng: &mut rng,
            };
            policy.choose(&mut ctx)?
        };
        let action = choice.action;
        let target_box = choice.override_target.or_else(|| {
            action
                .target
                .and_then(|t| current.page.widgets.get(t).map(|w| w.bounds))
        });
        let action_embedding = if choice.override_target.is_some() {
            // Blind coordinate actions have no page widget to embed.
            let mut blind = action.clone();
            blind.target = None;
            embed_action(&blind, &current.page, widget_dim)?
        } else {
            embed_action(&action, &current.page, widget_dim)?
        };

        let env_step: EnvStep = env.execute(&action, target_box)?;
        if env_step.kind == OutcomeKind::Crashed {
            env.reset();
        }

        let source_entry = current.entry_id;
        let source_visits = registry.visits(source_entry);
        let source_state = current.page.state_vec.clone();

        let (next, is_new) = observe(env, registry)?;
        let m_next = registry.applicable_count(next.entry_id);
        let n_next = registry.executed_count(next.entry_id);
        let step_reward = reward(m_next, n_next, source_visits)?;

        policy.record(Transition {
            state: source_state,
            action: action_embedding,
            next_state: next.page.state_vec.clone(),
            reward: step_reward,
            next_actions: next.candidates.iter().map(|c| c.embedding.clone()).collect(),
        });
        registry.mark_executed(source_entry, action.identity());
        policy.train_if_due(step)?;

        steps.push(StepRecord {
            record_type: "step".into(),
            step,
            page_entry_id: next.entry_id,
            is_new_page: is_new,
            action,
            reward: step_reward,
            q_summary: choice.q_summary,
            from_screen: env_step.from_screen,
            screen_id: env.current_screen(),
            outcome: env_step.kind,
            fired: env_step.fired,
            crash_id: env_step.crash_id,
        });
        current = next;
    }

    Ok(EpisodeLog {
        meta: MetaRecord {
            record_type: "meta".into(),
            policy: policy.name().into(),
            app_seed: descriptor.app_seed,
            app_screens: descriptor.screen_count,
            session_seed: cfg.seed,
            budget: cfg.budget,
            platform: cfg.platform,
        },
        steps,
    })
}

/// The curiosity-driven exploration entry point: a DQN policy over the
/// environment with the standard bookkeeping.
pub fn explore(
    env: &mut dyn Environment,
    embedder: &StateEmbedder,
    policy: &mut DqnPolicy,
    registry: &mut super::PageRegistry,
    cfg: &SessionConfig,
) -> Result<EpisodeLog, AgentError> {
    run_session(env, embedder, policy, registry, cfg)
}
