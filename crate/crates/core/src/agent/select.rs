//! Boltzmann (SoftMax) action selection over category-weighted Q-values.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{AgentError, QNetwork};
use crate::actions::{Action, ActionCategory};

/// The chosen candidate plus the full distribution and raw Q-values.
#[derive(Debug, Clone)]
pub struct SelectionOutcome {
    pub index: usize,
    pub probabilities: Vec<f64>,
    pub q_values: Vec<f64>,
}

/// Weight applied to a Q-value before SoftMax: widget and page actions get
/// 1, system actions get `system_weight` (default 0.5) to discourage
/// leaving the app all the time.
pub fn category_weight(action: &Action, system_weight: f64) -> f64 {
    match action.kind.category() {
        ActionCategory::Widget | ActionCategory::Page => 1.0,
        ActionCategory::System => system_weight,
    }
}

/// Boltzmann selection: logits are `weight * Q / temperature`, probabilities
/// come from a numerically stable SoftMax, and the sample is drawn from the
/// seeded source. Returns both the sample and the full distribution.
pub fn select_action(
    net: &QNetwork,
    state: &[f64],
    candidates: &[(Action, Vec<f64>)],
    temperature: f64,
    system_weight: f64,
    rng: &mut ChaCha8Rng,
) -> Result<SelectionOutcome, AgentError> {
    if candidates.is_empty() {
        return Err(AgentError::NoCandidates);
    }
    assert!(temperature > 0.0, "Boltzmann temperature must be positive");
    let mut q_values = Vec::with_capacity(candidates.len());
    let mut logits = Vec::with_capacity(candidates.len());
    for (action, embedding) in candidates {
        let q = net.q_value(state, embedding)?;
        q_values.push(q);
        logits.push(category_weight(action, system_weight) * q / temperature);
    }
    let probabilities = softmax(&logits);
    let draw: f64 = rng.gen();
    let mut acc = 0.0;
    let mut index = probabilities.len() - 1;
    for (i, p) in probabilities.iter().enumerate() {
        acc += p;
        if draw < acc {
            index = i;
            break;
        }
    }
    Ok(SelectionOutcome {
        index,
        probabilities,
        q_values,
    })
}

/// Numerically stable SoftMax.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::actions::ActionKind;
    use rand::SeedableRng;

    fn constant_net(dim: usize) -> QNetwork {
        // Zeroed network outputs 0 for any input.
        let mut net = QNetwork::new(dim, 4, 1, 0);
        let zeros = vec![0.0; net.parameters().len()];
        net.set_parameters(&zeros);
        net
    }

    #[test]
    fn single_candidate_is_always_chosen() {
        let net = constant_net(4);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let candidates = vec![(Action::bare(ActionKind::Return), vec![0.0, 0.0])];
        let out = select_action(&net, &[0.0, 0.0], &candidates, 1.0, 0.5, &mut rng).unwrap();
        assert_eq!(out.index, 0);
        assert_eq!(out.probabilities, vec![1.0]);
    }

    #[test]
    fn equal_q_widget_actions_split_evenly() {
        let net = constant_net(4);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let candidates = vec![
            (Action::on_widget(ActionKind::Click, 0), vec![0.0, 0.0]),
            (Action::on_widget(ActionKind::Click, 1), vec![0.0, 0.0]),
        ];
        let out = select_action(&net, &[0.0, 0.0], &candidates, 1.0, 0.5, &mut rng).unwrap();
        assert!((out.probabilities[0] - 0.5).abs() < 1e-12);
        assert!((out.probabilities[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn probabilities_sum_to_one() {
        let p = softmax(&[0.4, -2.0, 1.7, 0.0, 3.1]);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn raising_a_q_value_raises_its_probability() {
        let p1 = softmax(&[1.0, 1.0, 1.0]);
        let p2 = softmax(&[1.5, 1.0, 1.0]);
        assert!(p2[0] > p1[0]);
        assert!(p2[1] < p1[1]);
    }

    #[test]
    fn system_weight_hand_case() {
        // Widget Q = 1.0 vs system Q = 1.0 at temperature 1: logits (1, 0.5),
        // probabilities (e^1, e^0.5) / Z = (0.6225, 0.3775).
        let weights = [1.0f64, 0.5];
        let logits: Vec<f64> = weights.iter().map(|w| w * 1.0 / 1.0).collect();
        let p = softmax(&logits);
        assert!((p[0] - 0.6225).abs() < 1e-3);
        assert!((p[1] - 0.3775).abs() < 1e-3);
    }

    #[test]
    fn sampling_is_seed_deterministic() {
        let net = constant_net(4);
        let candidates: Vec<(Action, Vec<f64>)> = (0..6)
            .map(|i| (Action::on_widget(ActionKind::Click, i), vec![0.0, 0.0]))
            .collect();
        let pick = |seed: u64| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..10)
                .map(|_| {
                    select_action(&net, &[0.0, 0.0], &candidates, 1.0, 0.5, &mut rng)
                        .unwrap()
                        .index
                })
                .collect::<Vec<_>>()
        };
        assert_eq!(pick(42), pick(42));
    }
}
