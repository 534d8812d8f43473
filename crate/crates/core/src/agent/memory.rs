//! Exploration memory: an insertion-ordered ring of transitions with the
//! recent-half + random-half batch sampling rule.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::collections::VecDeque;

use super::AgentError;

/// One recorded step: state, action embedding, successor state, reward, and
/// the successor's applicable action embeddings.
#[derive(Debug, Clone)]
pub struct Transition {
    pub state: Vec<f64>,
    pub action: Vec<f64>,
    pub next_state: Vec<f64>,
    pub reward: f64,
    pub next_actions: Vec<Vec<f64>>,
}

/// Ring buffer preserving insertion order; evicts oldest-first at capacity.
#[derive(Debug)]
pub struct ExplorationMemory {
    buf: VecDeque<Transition>,
    capacity: usize,
}

impl ExplorationMemory {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity >= 1);
        ExplorationMemory {
            buf: VecDeque::with_capacity(capacity.min(4096)),
            capacity,
        }
    }

    pub fn push(&mut self, t: Transition) {
        if self.buf.len() == self.capacity {
            self.buf.pop_front();
        }
        self.buf.push_back(t);
    }

    pub fn len(&self) -> usize {
        self.buf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buf.is_empty()
    }

    pub fn get(&self, idx: usize) -> &Transition {
        &self.buf[idx]
    }

    /// Samples `n` transitions: the `n/2` newest records plus `n/2` drawn
    /// uniformly without replacement from the remainder. `n` must be even
    /// and at most the current size.
    pub fn sample_batch(&self, n: usize, rng: &mut ChaCha8Rng) -> Result<Vec<&Transition>, AgentError> {
        if n % 2 != 0 {
            return Err(AgentError::OddBatchSize(n));
        }
        if self.buf.len() < n {
            return Err(AgentError::InsufficientMemory {
                have: self.buf.len(),
                need: n,
            });
        }
        let half = n / 2;
        let split = self.buf.len() - half;
        let mut batch: Vec<&Transition> = Vec::with_capacity(n);
        for i in split..self.buf.len() {
            batch.push(&self.buf[i]);
        }
        // Partial Fisher-Yates over the remainder indices.
        let mut rest: Vec<usize> = (0..split).collect();
        for k in 0..half {
            let j = rng.gen_range(k..rest.len());
            rest.swap(k, j);
            batch.push(&self.buf[rest[k]]);
        }
        Ok(batch)
    }

    /// Indices of the `n/2` newest records (for tests and diagnostics).
    pub fn newest_indices(&self, half: usize) -> Vec<usize> {
        (self.buf.len().saturating_sub(half)..self.buf.len()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn t(tag: f64) -> Transition {
        Transition {
            state: vec![tag],
            action: vec![tag],
            next_state: vec![tag],
            reward: tag,
            next_actions: vec![vec![tag]],
        }
    }

    fn filled(n: usize) -> ExplorationMemory {
        let mut mem = ExplorationMemory::new(10_000);
        for i in 0..n {
            mem.push(t(i as f64));
        }
        mem
    }

    #[test]
    fn eviction_is_oldest_first() {
        let mut mem = ExplorationMemory::new(3);
        for i in 0..5 {
            mem.push(t(i as f64));
        }
        assert_eq!(mem.len(), 3);
        assert_eq!(mem.get(0).reward, 2.0);
        assert_eq!(mem.get(2).reward, 4.0);
    }

    #[test]
    fn memory_size_exactly_n_returns_everything() {
        let mem = filled(10);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let batch = mem.sample_batch(10, &mut rng).unwrap();
        let mut tags: Vec<f64> = batch.iter().map(|t| t.reward).collect();
        tags.sort_by(f64::total_cmp);
        assert_eq!(tags, (0..10).map(|i| i as f64).collect::<Vec<_>>());
    }

    #[test]
    fn newest_half_is_always_present() {
        let mem = filled(100);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let batch = mem.sample_batch(10, &mut rng).unwrap();
            let tags: Vec<f64> = batch.iter().map(|t| t.reward).collect();
            for newest in 95..100 {
                assert!(tags.contains(&(newest as f64)), "missing record {newest}");
            }
            // No duplicates: the random half is drawn without replacement.
            let mut sorted = tags.clone();
            sorted.sort_by(f64::total_cmp);
            sorted.dedup();
            assert_eq!(sorted.len(), 10);
        }
    }

    #[test]
    fn sampling_is_deterministic_for_a_fixed_seed() {
        let mem = filled(64);
        let collect = |seed: u64| -> Vec<f64> {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            mem.sample_batch(16, &mut rng)
                .unwrap()
                .iter()
                .map(|t| t.reward)
                .collect()
        };
        assert_eq!(collect(3), collect(3));
    }

    #[test]
    fn insufficient_records_is_an_error() {
        let mem = filled(5);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(
            mem.sample_batch(6, &mut rng),
            Err(AgentError::InsufficientMemory { have: 5, need: 6 })
        ));
    }

    #[test]
    fn odd_batch_size_is_rejected() {
        let mem = filled(8);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(
            mem.sample_batch(3, &mut rng),
            Err(AgentError::OddBatchSize(3))
        ));
    }
}
