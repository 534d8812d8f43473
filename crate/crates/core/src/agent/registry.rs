//! Page registry: similarity-matched page entries with transition counts and
//! per-entry executed-action bookkeeping.

use std::collections::BTreeSet;

use crate::actions::ActionIdentity;
use crate::embedding::{page_similarity, PageState, SimilarityParams};

/// One registered page: a representative state, its visit count N, the
/// applicable-action count m frozen at first registration, and the set of
/// executed action identities (n = |executed|).
#[derive(Debug)]
pub struct RegistryEntry {
    pub page: PageState,
    pub visits: u64,
    pub applicable_count: usize,
    executed: BTreeSet<ActionIdentity>,
}

impl RegistryEntry {
    pub fn executed_count(&self) -> usize {
        self.executed.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RegisterOutcome {
    pub entry_id: usize,
    pub visits: u64,
    pub is_new: bool,
}

#[derive(Debug)]
pub struct PageRegistry {
    entries: Vec<RegistryEntry>,
    params: SimilarityParams,
    observations: u64,
}

impl PageRegistry {
    pub fn new(params: SimilarityParams) -> Self {
        PageRegistry {
            entries: Vec::new(),
            params,
            observations: 0,
        }
    }

    /// Registers an observation: the entry with the highest page similarity
    /// at or above the threshold absorbs it (ties break to the lowest entry
    /// id); otherwise a new entry is appended with N = 1.
    pub fn register(&mut self, page: PageState, applicable_count: usize) -> RegisterOutcome {
        self.observations += 1;
        let mut best: Option<(usize, f64)> = None;
        for (id, entry) in self.entries.iter().enumerate() {
            let sim = page_similarity(&entry.page, &page, &self.params);
            let better = match best {
                None => sim >= self.params.same_page_threshold,
                Some((_, best_sim)) => sim > best_sim,
            };
            if better && sim >= self.params.same_page_threshold {
                best = Some((id, sim));
            }
        }
        match best {
            Some((id, _)) => {
                self.entries[id].visits += 1;
                RegisterOutcome {
                    entry_id: id,
                    visits: self.entries[id].visits,
                    is_new: false,
                }
            }
            None => {
                self.entries.push(RegistryEntry {
                    page,
                    visits: 1,
                    applicable_count,
                    executed: BTreeSet::new(),
                });
                RegisterOutcome {
                    entry_id: self.entries.len() - 1,
                    visits: 1,
                    is_new: true,
                }
            }
        }
    }

    /// Marks an action identity executed on the entry; true when new.
    pub fn mark_executed(&mut self, entry_id: usize, identity: ActionIdentity) -> bool {
        self.entries[entry_id].executed.insert(identity)
    }

    pub fn visits(&self, entry_id: usize) -> u64 {
        self.entries[entry_id].visits
    }

    pub fn applicable_count(&self, entry_id: usize) -> usize {
        self.entries[entry_id].applicable_count
    }

    pub fn executed_count(&self, entry_id: usize) -> usize {
        self.entries[entry_id].executed.len()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Total observations: must equal the sum of entry visit counts.
    pub fn observations(&self) -> u64 {
        self.observations
    }

    pub fn entries(&self) -> &[RegistryEntry] {
        &self.entries
    }
}
