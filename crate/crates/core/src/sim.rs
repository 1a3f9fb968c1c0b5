//! Seeded pseudorandom walks through a model, for inspection and debugging.

use crate::compile::CompiledModel;
use crate::error::CheckError;
use crate::semantics::{initial_states, successors, ActionProfile, State};

/// SplitMix64: tiny, seedable, and stable across platforms and releases,
/// so identical seeds always reproduce identical runs.
#[derive(Debug, Clone)]
pub struct SplitMix64(u64);

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64(seed)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    /// Uniform-enough index below `n` (n > 0).
    pub fn below(&mut self, n: usize) -> usize {
        ((self.next_u64() as u128 * n as u128) >> 64) as usize
    }
}

#[derive(Debug, Clone)]
pub struct SimStep {
    pub state: State,
    pub profile: ActionProfile,
    pub next: State,
}

/// Walk `steps` transitions from a uniformly chosen initial state. The walk
/// is a pure function of the seed.
pub fn simulate(m: &CompiledModel, seed: u64, steps: usize) -> Result<Vec<SimStep>, CheckError> {
    let init = initial_states(m);
    if init.is_empty() {
        return Err(CheckError::NoInitialStates);
    }
    let mut rng = SplitMix64::new(seed);
    let mut cur = init[rng.below(init.len())].clone();
    let mut out = Vec::with_capacity(steps);
    for _ in 0..steps {
        let succ = successors(m, &cur);
        // Totality: every agent always has an action and execution never
        // returns an empty set.
        let (profile, next) = succ[rng.below(succ.len())].clone();
        out.push(SimStep {
            state: cur.clone(),
            profile,
            next: next.clone(),
        });
        cur = next;
    }
    Ok(out)
}

/// Changed variables between two states, as `name: old -> new` strings.
pub fn state_delta(m: &CompiledModel, from: &State, to: &State) -> Vec<String> {
    m.vars
        .iter()
        .enumerate()
        .filter(|(i, _)| from.get(*i) != to.get(*i))
        .map(|(i, v)| {
            let dom = &m.domains[v.domain];
            format!(
                "{}: {} -> {}",
                v.name,
                dom.render_raw(from.get(i)),
                dom.render_raw(to.get(i))
            )
        })
        .collect()
}
