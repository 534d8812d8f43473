//! Wires one full run end to end: app, embedder, policy, session, report.

use std::path::Path;

use super::config::{EncoderKind, PolicyKind, RunConfig};
use super::policies::{MonkeyPolicy, RandomPolicy};
use super::report::{build_report, Report};
use super::HarnessError;
use crate::actions::action_embedding_dim;
use crate::agent::{
    run_session, DqnPolicy, EpisodeLog, Environment, ExplorationPolicy, PageRegistry, QNetwork,
    SessionConfig,
};
use crate::embedding::{
    build_distance_pairs, generate_layout_corpus, train_layout_encoder, EncoderTrainConfig,
    LayoutEncoder, StateEmbedder,
};
use crate::simenv::{generate_app, SimApp, SimEnvironment};

/// Everything a run produces.
pub struct RunArtifacts {
    pub report: Report,
    pub log: EpisodeLog,
    pub network: Option<QNetwork>,
}

/// Builds the embedder configured by `cfg` (training the layout encoder
/// from the seeded corpus when requested).
pub fn build_embedder(cfg: &RunConfig) -> Result<StateEmbedder, HarnessError> {
    let encoder = match cfg.encoder.kind {
        EncoderKind::Structural => LayoutEncoder::structural(cfg.dims.d_layout),
        EncoderKind::Trained => {
            let corpus = generate_layout_corpus(cfg.seeds.encoder, cfg.encoder.corpus_size);
            let pairs = build_distance_pairs(&corpus);
            let trained = train_layout_encoder(
                &pairs,
                &EncoderTrainConfig {
                    hidden: cfg.dims.d_layout,
                    epochs: cfg.encoder.epochs,
                    learning_rate: cfg.encoder.learning_rate,
                    grad_clip: 2.0,
                    seed: cfg.seeds.encoder,
                },
            )?;
            LayoutEncoder::Recurrent(trained)
        }
    };
    Ok(StateEmbedder::new(
        cfg.dims,
        cfg.thresholds.vision.clone(),
        cfg.thresholds.gap_threshold,
        encoder,
    ))
}

/// Generates the app named by the config's app seed and parameters.
pub fn build_app(cfg: &RunConfig) -> Result<SimApp, HarnessError> {
    Ok(generate_app(&cfg.app.gen_params(cfg.seeds.app))?)
}

/// Runs a configured session against the given app.
pub fn run_on_app(cfg: &RunConfig, app: &SimApp) -> Result<RunArtifacts, HarnessError> {
    let embedder = build_embedder(cfg)?;
    let mut env = SimEnvironment::new(app.clone());
    env.reset();
    let mut registry = PageRegistry::new(cfg.thresholds.similarity);
    let session = SessionConfig {
        budget: cfg.budget,
        platform: cfg.platform,
        seed: cfg.seeds.agent,
        action_config: cfg.actions.clone(),
    };

    let mut policy: Box<dyn ExplorationPolicy> = match cfg.policy {
        PolicyKind::Dqn => {
            let input_dim = cfg.dims.state_dim() + action_embedding_dim(cfg.dims.widget_dim());
            let net = QNetwork::new(
                input_dim,
                cfg.network.hidden_width,
                cfg.network.hidden_layers,
                cfg.seeds.agent,
            );
            // The policy's own stream is offset from the session stream.
            Box::new(DqnPolicy::new(net, cfg.agent.clone(), cfg.seeds.agent ^ 0x9e37_79b9))
        }
        PolicyKind::Random => Box::new(RandomPolicy),
        PolicyKind::Monkey => Box::new(MonkeyPolicy {
            platform: cfg.platform,
        }),
    };

    let log = run_session(&mut env, &embedder, policy.as_mut(), &mut registry, &session)?;
    let report = build_report(&log, app)?;
    Ok(RunArtifacts {
        report,
        log,
        network: policy.network().cloned(),
    })
}

/// Full run from config alone: generates the app, runs, and optionally
/// writes `episode.ndjson`, `report.json`, `app.json`, and (for the DQN
/// policy) `weights.bin` into `out_dir`.
pub fn run(cfg: &RunConfig, out_dir: Option<&Path>) -> Result<RunArtifacts, HarnessError> {
    let app = build_app(cfg)?;
    let artifacts = run_on_app(cfg, &app)?;
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("episode.ndjson"), artifacts.log.to_ndjson())?;
        std::fs::write(dir.join("report.json"), artifacts.report.to_json())?;
        std::fs::write(dir.join("app.json"), app.to_canonical_json())?;
        if let Some(net) = &artifacts.network {
            net.save(&dir.join("weights.bin"))?;
        }
    }
    Ok(artifacts)
}
