//! Reachable state-graph construction.
//!
//! `build_graph` computes the breadth-first closure of [`successors`] from
//! the initial states. The frontier of each layer may be expanded by
//! several worker threads; results are merged in frontier order and nodes
//! are renumbered canonically (sorted by state value) afterwards, so the
//! resulting graph is identical whatever the thread count or exploration
//! order.

use crate::compile::{ActionId, CompiledModel};
use crate::error::CheckError;
use crate::semantics::{
    atom_bits, fairness_bits, initial_states, render_profile, successors, State,
};
use std::collections::HashMap;

pub type StateId = u32;
pub type ProfileId = u32;

#[derive(Debug, Clone, Copy)]
pub struct BuildOptions {
    /// Maximum number of reachable states before an explicit resource error.
    pub node_budget: usize,
    /// Worker threads for frontier expansion.
    pub threads: usize,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            node_budget: 5_000_000,
            threads: 1,
        }
    }
}

/// The reachable graph: canonical node numbering, CSR edges labelled by
/// interned action profiles, and per-node valuations of the specification
/// atoms and fairness constraints.
#[derive(Debug, Clone)]
pub struct StateGraph {
    pub states: Vec<State>,
    pub initial: Vec<StateId>,
    /// CSR offsets into `edges`, length `states.len() + 1`.
    pub edge_offsets: Vec<usize>,
    /// Edges sorted by (source, profile, destination).
    pub edges: Vec<(ProfileId, StateId)>,
    /// Interned action profiles in canonical (lexicographic) order.
    pub profiles: Vec<Box<[ActionId]>>,
    /// Per-node valuation of the model's atom table.
    pub atom_bits: Vec<u64>,
    /// Per-node valuation of the fairness constraints.
    pub fairness_bits: Vec<u32>,
    /// CSR of deduplicated successor states, sorted per node.
    pub succ_offsets: Vec<usize>,
    pub succs: Vec<StateId>,
}

impl StateGraph {
    pub fn node_count(&self) -> usize {
        self.states.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges_of(&self, n: StateId) -> &[(ProfileId, StateId)] {
        &self.edges[self.edge_offsets[n as usize]..self.edge_offsets[n as usize + 1]]
    }

    pub fn succs_of(&self, n: StateId) -> &[StateId] {
        &self.succs[self.succ_offsets[n as usize]..self.succ_offsets[n as usize + 1]]
    }

    pub fn state_index(&self, s: &State) -> Option<StateId> {
        self.states.binary_search(s).ok().map(|i| i as StateId)
    }

    /// First edge from `from` to `to`, as (profile, destination).
    pub fn edge_between(&self, from: StateId, to: StateId) -> Option<(ProfileId, StateId)> {
        self.edges_of(from).iter().copied().find(|&(_, d)| d == to)
    }

    /// Deterministic DOT rendering: node label is the variable assignment,
    /// edge label the action profile.
    pub fn to_dot(&self, m: &CompiledModel) -> String {
        let mut out = String::from("digraph states {\n  rankdir=LR;\n  node [shape=box];\n");
        for (i, s) in self.states.iter().enumerate() {
            let shape = if self.initial.contains(&(i as StateId)) {
                ", peripheries=2"
            } else {
                ""
            };
            out.push_str(&format!(
                "  s{} [label=\"s{}\\n{}\"{}];\n",
                i,
                i,
                s.render(m).replace(", ", "\\n"),
                shape
            ));
        }
        for src in 0..self.states.len() {
            for &(p, dst) in self.edges_of(src as StateId) {
                out.push_str(&format!(
                    "  s{} -> s{} [label=\"{}\"];\n",
                    src,
                    dst,
                    render_profile(m, &self.profiles[p as usize])
                ));
            }
        }
        out.push_str("}\n");
        out
    }
}

pub fn build_graph(m: &CompiledModel, opts: BuildOptions) -> Result<StateGraph, CheckError> {
    let init = initial_states(m);
    if init.is_empty() {
        return Err(CheckError::NoInitialStates);
    }
    let threads = opts.threads.max(1);

    // Discovery-order interning; renumbered canonically afterwards.
    let mut index: HashMap<State, u32> = HashMap::new();
    let mut states: Vec<State> = Vec::new();
    let mut adj: Vec<Vec<(u32, u32)>> = Vec::new(); // (tmp profile id, dst)
    let mut profile_index: HashMap<Box<[ActionId]>, u32> = HashMap::new();
    let mut profiles: Vec<Box<[ActionId]>> = Vec::new();

    type Expanded = (u32, Vec<(Box<[ActionId]>, State)>);
    let mut frontier: Vec<u32> = Vec::new();
    for s in init {
        if !index.contains_key(&s) {
            let id = states.len() as u32;
            index.insert(s.clone(), id);
            states.push(s);
            adj.push(Vec::new());
            frontier.push(id);
        }
    }
    let initial_set: Vec<State> = states.clone();

    while !frontier.is_empty() {
        // Expand the layer, in parallel when asked to.
        let expansions: Vec<Expanded> = if threads == 1 {
            frontier
                .iter()
                .map(|&id| (id, successors(m, &states[id as usize])))
                .collect()
        } else {
            let chunk = frontier.len().div_ceil(threads);
            let snapshot: Vec<(u32, State)> = frontier
                .iter()
                .map(|&id| (id, states[id as usize].clone()))
                .collect();
            let mut results: Vec<Vec<Expanded>> = Vec::with_capacity(threads);
            std::thread::scope(|scope| {
                let handles: Vec<_> = snapshot
                    .chunks(chunk.max(1))
                    .map(|part| {
                        scope.spawn(move || {
                            part.iter()
                                .map(|(id, s)| (*id, successors(m, s)))
                                .collect::<Vec<_>>()
                        })
                    })
                    .collect();
                for h in handles {
                    results.push(h.join().expect("worker panicked"));
                }
            });
            results.into_iter().flatten().collect()
        };

        let mut next = Vec::new();
        for (src, succ) in expansions {
            for (profile, state) in succ {
                let pid = match profile_index.get(&profile) {
                    Some(&p) => p,
                    None => {
                        let p = profiles.len() as u32;
                        profile_index.insert(profile.clone(), p);
                        profiles.push(profile);
                        p
                    }
                };
                let dst = match index.get(&state) {
                    Some(&d) => d,
                    None => {
                        if states.len() >= opts.node_budget {
                            return Err(CheckError::NodeBudgetExceeded {
                                limit: opts.node_budget,
                            });
                        }
                        let d = states.len() as u32;
                        index.insert(state.clone(), d);
                        states.push(state);
                        adj.push(Vec::new());
                        next.push(d);
                        d
                    }
                };
                adj[src as usize].push((pid, dst));
            }
        }
        frontier = next;
    }
    drop(index);

    // Canonical renumbering: nodes sorted by state value, profiles sorted
    // lexicographically. The output then depends only on the node and edge
    // sets, not on exploration order.
    let n = states.len();
    let mut node_order: Vec<u32> = (0..n as u32).collect();
    node_order.sort_by(|&a, &b| states[a as usize].cmp(&states[b as usize]));
    let mut node_rank = vec![0u32; n];
    for (rank, &old) in node_order.iter().enumerate() {
        node_rank[old as usize] = rank as u32;
    }
    let mut profile_order: Vec<u32> = (0..profiles.len() as u32).collect();
    profile_order.sort_by(|&a, &b| profiles[a as usize].cmp(&profiles[b as usize]));
    let mut profile_rank = vec![0u32; profiles.len()];
    for (rank, &old) in profile_order.iter().enumerate() {
        profile_rank[old as usize] = rank as u32;
    }

    let sorted_states: Vec<State> = node_order
        .iter()
        .map(|&old| states[old as usize].clone())
        .collect();
    let sorted_profiles: Vec<Box<[ActionId]>> = profile_order
        .iter()
        .map(|&old| profiles[old as usize].clone())
        .collect();

    let mut edge_offsets = Vec::with_capacity(n + 1);
    let mut edges = Vec::new();
    let mut succ_offsets = Vec::with_capacity(n + 1);
    let mut succs = Vec::new();
    edge_offsets.push(0);
    succ_offsets.push(0);
    for &old in &node_order {
        let mut es: Vec<(u32, u32)> = adj[old as usize]
            .iter()
            .map(|&(p, d)| (profile_rank[p as usize], node_rank[d as usize]))
            .collect();
        es.sort_unstable();
        es.dedup();
        let mut ds: Vec<u32> = es.iter().map(|&(_, d)| d).collect();
        ds.sort_unstable();
        ds.dedup();
        edges.extend(es);
        succs.extend(ds);
        edge_offsets.push(edges.len());
        succ_offsets.push(succs.len());
    }

    let mut initial: Vec<u32> = initial_set
        .iter()
        .map(|s| {
            sorted_states
                .binary_search(s)
                .expect("initial state interned") as u32
        })
        .collect();
    initial.sort_unstable();

    let atom_bits_v: Vec<u64> = sorted_states.iter().map(|s| atom_bits(m, s)).collect();
    let fairness_bits_v: Vec<u32> = sorted_states.iter().map(|s| fairness_bits(m, s)).collect();

    Ok(StateGraph {
        states: sorted_states,
        initial,
        edge_offsets,
        edges,
        profiles: sorted_profiles,
        atom_bits: atom_bits_v,
        fairness_bits: fairness_bits_v,
        succ_offsets,
        succs,
    })
}
