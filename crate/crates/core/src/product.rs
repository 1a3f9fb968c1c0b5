//! Product of a state graph with a generalized Büchi automaton, and
//! fair-cycle detection on it.
//!
//! Acceptance sets of the product are the automaton's sets plus one set per
//! fairness constraint, containing the product nodes whose model state
//! satisfies the constraint. An accepting fair lasso is a reachable
//! nontrivial SCC intersecting every set; the witness cycle is stitched
//! from shortest intra-SCC paths through one representative per set.
//!
//! Product edges are not materialized: successors are generated on demand
//! from the model graph's deduplicated successor lists and the automaton's
//! transitions, with the automaton node's literal constraints checked
//! against the destination state's atom valuation.

use crate::buchi::Gba;
use crate::error::CheckError;
use crate::graph::{StateGraph, StateId};
use crate::scc::tarjan_sccs;
use std::collections::{HashMap, VecDeque};

pub type ProductNodeId = u32;

#[derive(Debug)]
pub struct Product<'a> {
    pub graph: &'a StateGraph,
    pub gba: &'a Gba,
    /// (model state, automaton node) pairs, in discovery order.
    pub nodes: Vec<(StateId, u32)>,
    index: HashMap<(u32, u32), u32>,
    /// Acceptance membership per node: automaton sets in the low bits,
    /// fairness sets above them.
    pub accept: Vec<u64>,
    pub accept_sets: usize,
    pub initial: Vec<ProductNodeId>,
}

impl<'a> Product<'a> {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn full_mask(&self) -> u64 {
        if self.accept_sets >= 64 {
            u64::MAX
        } else {
            (1u64 << self.accept_sets) - 1
        }
    }

    pub fn succs(&self, node: ProductNodeId) -> Vec<ProductNodeId> {
        let (s, q) = self.nodes[node as usize];
        let mut out = Vec::new();
        for &s2 in self.graph.succs_of(s) {
            let letter = self.graph.atom_bits[s2 as usize];
            for &q2 in &self.gba.succs[q as usize] {
                if self.gba.consistent(q2, letter) {
                    if let Some(&id) = self.index.get(&(s2, q2 as u32)) {
                        out.push(id);
                    }
                }
            }
        }
        out
    }
}

/// Explore the product of `graph` and the automaton for the negated
/// specification, lifting fairness constraints to extra acceptance sets.
pub fn build_product<'a>(
    graph: &'a StateGraph,
    gba: &'a Gba,
    fairness_count: usize,
    budget: usize,
) -> Result<Product<'a>, CheckError> {
    let mut product = Product {
        graph,
        gba,
        nodes: Vec::new(),
        index: HashMap::new(),
        accept: Vec::new(),
        accept_sets: gba.acceptance_sets + fairness_count,
        initial: Vec::new(),
    };
    assert!(product.accept_sets <= 64, "too many acceptance sets");

    let mut queue = VecDeque::new();
    let push = |product: &mut Product<'a>,
                queue: &mut VecDeque<u32>,
                s: StateId,
                q: usize|
     -> Result<Option<u32>, CheckError> {
        if let Some(&id) = product.index.get(&(s, q as u32)) {
            return Ok(Some(id));
        }
        if !product
            .gba
            .consistent(q, product.graph.atom_bits[s as usize])
        {
            return Ok(None);
        }
        if product.nodes.len() >= budget {
            return Err(CheckError::ProductBudgetExceeded { limit: budget });
        }
        let id = product.nodes.len() as u32;
        product.index.insert((s, q as u32), id);
        product.nodes.push((s, q as u32));
        let fair = product.graph.fairness_bits[s as usize] as u64;
        product
            .accept
            .push(product.gba.nodes[q].accept | (fair << product.gba.acceptance_sets));
        queue.push_back(id);
        Ok(Some(id))
    };

    for &s in &graph.initial {
        for &q in &gba.initial {
            if let Some(id) = push(&mut product, &mut queue, s, q)? {
                if !product.initial.contains(&id) {
                    product.initial.push(id);
                }
            }
        }
    }
    while let Some(id) = queue.pop_front() {
        let (s, q) = product.nodes[id as usize];
        // Clone the successor lists up front; `push` borrows mutably.
        let model_succs: Vec<StateId> = graph.succs_of(s).to_vec();
        for s2 in model_succs {
            for qi in 0..gba.succs[q as usize].len() {
                let q2 = gba.succs[q as usize][qi];
                push(&mut product, &mut queue, s2, q2)?;
            }
        }
    }
    Ok(product)
}

/// A lasso in the product: `prefix` leads from an initial node to
/// `cycle[0]`; `cycle` is nonempty and closes back on itself.
#[derive(Debug, Clone)]
pub struct ProductLasso {
    pub prefix: Vec<ProductNodeId>,
    pub cycle: Vec<ProductNodeId>,
}

/// Find a reachable nontrivial SCC intersecting every acceptance set and
/// stitch a witness lasso through it, or report emptiness.
pub fn find_fair_accepting_lasso(p: &Product<'_>) -> Option<ProductLasso> {
    let n = p.len();
    if n == 0 {
        return None;
    }
    let full = p.full_mask();
    let sccs = tarjan_sccs(n, |v| {
        p.succs(v as u32).into_iter().map(|x| x as usize).collect()
    });

    // Membership map: node -> SCC index.
    let mut scc_of = vec![usize::MAX; n];
    for (k, comp) in sccs.iter().enumerate() {
        for &v in comp {
            scc_of[v] = k;
        }
    }
    // Candidate SCCs: nontrivial and covering all acceptance sets.
    let mut candidate = vec![false; sccs.len()];
    for (k, comp) in sccs.iter().enumerate() {
        let mask = comp.iter().fold(0u64, |acc, &v| acc | p.accept[v]);
        if mask & full != full {
            continue;
        }
        let nontrivial = comp.len() > 1
            || p.succs(comp[0] as u32)
                .iter()
                .any(|&w| w as usize == comp[0]);
        candidate[k] = nontrivial;
    }
    if !candidate.iter().any(|&c| c) {
        return None;
    }

    // Shortest prefix: multi-source BFS from the initial nodes.
    let mut parent = vec![u32::MAX; n];
    let mut dist = vec![u32::MAX; n];
    let mut queue = VecDeque::new();
    for &i in &p.initial {
        if dist[i as usize] == u32::MAX {
            dist[i as usize] = 0;
            parent[i as usize] = i; // self-parent marks a root
            queue.push_back(i);
        }
    }
    let mut entry: Option<u32> = None;
    while let Some(v) = queue.pop_front() {
        if candidate[scc_of[v as usize]] {
            entry = Some(v);
            break;
        }
        for w in p.succs(v) {
            if dist[w as usize] == u32::MAX {
                dist[w as usize] = dist[v as usize] + 1;
                parent[w as usize] = v;
                queue.push_back(w);
            }
        }
    }
    let entry = entry?;
    let mut prefix = Vec::new();
    let mut cur = entry;
    while parent[cur as usize] != cur {
        prefix.push(cur);
        cur = parent[cur as usize];
    }
    prefix.push(cur);
    prefix.reverse();
    let entry = prefix.pop().expect("prefix contains the entry node");
    // `prefix` now holds the nodes strictly before the cycle start.

    // Stitch the cycle inside the SCC: visit one representative per
    // acceptance set, then return to the entry node.
    let scc_id = scc_of[entry as usize];
    let in_scc = |v: u32| scc_of[v as usize] == scc_id;
    let bfs_path = |from: u32, goal: &dyn Fn(u32) -> bool| -> Option<Vec<u32>> {
        // Shortest nonempty path from `from` to a goal node within the SCC.
        let mut parent: HashMap<u32, u32> = HashMap::new();
        let mut queue = VecDeque::new();
        for w in p.succs(from) {
            if in_scc(w) && !parent.contains_key(&w) {
                parent.insert(w, from);
                queue.push_back(w);
            }
        }
        while let Some(v) = queue.pop_front() {
            if goal(v) {
                let mut path = vec![v];
                let mut cur = v;
                while parent[&cur] != from {
                    cur = parent[&cur];
                    path.push(cur);
                }
                path.reverse();
                return Some(path);
            }
            for w in p.succs(v) {
                if in_scc(w) && !parent.contains_key(&w) {
                    parent.insert(w, v);
                    queue.push_back(w);
                }
            }
        }
        None
    };

    let mut cycle = vec![entry];
    let mut cur = entry;
    for set in 0..p.accept_sets {
        let bit = 1u64 << set;
        if cycle.iter().any(|&v| p.accept[v as usize] & bit != 0) {
            continue;
        }
        let path = bfs_path(cur, &|v| p.accept[v as usize] & bit != 0)
            .expect("SCC intersects every acceptance set");
        cur = *path.last().unwrap();
        cycle.extend(path);
    }
    if cur != entry {
        let back = bfs_path(cur, &|v| v == entry).expect("SCC is strongly connected");
        cycle.extend(back);
        cycle.pop(); // drop the repeated entry node
    } else if cycle.len() == 1 {
        // Zero acceptance sets were missing; force a real cycle.
        let back = bfs_path(entry, &|v| v == entry).expect("nontrivial SCC has a cycle");
        cycle.extend(back);
        cycle.pop();
    }
    Some(ProductLasso { prefix, cycle })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::buchi::ltl_to_gba;
    use crate::compile::compile;
    use crate::graph::{build_graph, BuildOptions};
    use crate::ltl::{normalize, LtlNode};
    use crate::parser::parse_model;

    const ESCROW: &str = include_str!("../../../examples/escrow.swapmc");

    #[test]
    fn single_node_gba_times_graph_has_graph_size() {
        let m = compile(
            &parse_model("x : Bool\ninit_cond = x == False\ntransitions begin x := neg x end\n")
                .unwrap(),
        )
        .unwrap();
        let g = build_graph(&m, BuildOptions::default()).unwrap();
        let gba = ltl_to_gba(&LtlNode::True);
        let p = build_product(&g, &gba, 0, 1 << 20).unwrap();
        assert_eq!(p.len(), g.node_count());
        // Any reachable cycle is accepted when there are no sets.
        let lasso = find_fair_accepting_lasso(&p).expect("toggle cycle");
        assert!(!lasso.cycle.is_empty());
    }

    #[test]
    fn escrow_product_carries_gba_plus_two_fairness_sets() {
        let m = compile(&parse_model(ESCROW).unwrap()).unwrap();
        let g = build_graph(&m, BuildOptions::default()).unwrap();
        // Negation of spec 1, in NNF.
        let spec = &m.specs[0];
        let gba = ltl_to_gba(&normalize(&LtlNode::not(spec.body.clone())));
        let p = build_product(&g, &gba, m.fairness.len(), 1 << 24).unwrap();
        assert_eq!(p.accept_sets, gba.acceptance_sets + 2);
        assert!(!p.is_empty());
    }

    #[test]
    fn no_fair_cycle_when_fairness_unsatisfiable() {
        // turn is constant AliceP; fairness demanding turn == BobP
        // infinitely often leaves no fair cycle.
        let src = "type P = {AliceP2,BobP2}\nturn2 : P\n\
                   init_cond = turn2 == AliceP2\n\
                   transitions begin skip end\n\
                   fairness = turn2 == BobP2\n";
        let m = compile(&parse_model(src).unwrap()).unwrap();
        let g = build_graph(&m, BuildOptions::default()).unwrap();
        let gba = ltl_to_gba(&LtlNode::True);
        let p = build_product(&g, &gba, m.fairness.len(), 1 << 20).unwrap();
        assert!(find_fair_accepting_lasso(&p).is_none());
        // Exhaustive cross-check: the only cycle is the self-loop, and it
        // fails the fairness set.
        assert_eq!(g.node_count(), 1);
        assert_eq!(g.fairness_bits[0], 0);
    }

    #[test]
    fn product_budget_is_enforced() {
        let m = compile(&parse_model(ESCROW).unwrap()).unwrap();
        let g = build_graph(&m, BuildOptions::default()).unwrap();
        let gba = ltl_to_gba(&LtlNode::True);
        let err = build_product(&g, &gba, m.fairness.len(), 10).unwrap_err();
        assert_eq!(err, CheckError::ProductBudgetExceeded { limit: 10 });
    }
}

#[cfg(test)]
mod lasso_shape_tests {
    use super::*;
    use crate::buchi::ltl_to_gba;
    use crate::compile::compile;
    use crate::graph::{build_graph, BuildOptions};
    use crate::ltl::LtlNode;
    use crate::parser::parse_model;

    #[test]
    fn self_loop_gives_empty_prefix_one_step_cycle() {
        // One state with a self-loop; a single-node product in every
        // acceptance set yields the minimal lasso.
        let m = compile(
            &parse_model("x : Bool\ninit_cond = x == True\ntransitions begin skip end\n").unwrap(),
        )
        .unwrap();
        let g = build_graph(&m, BuildOptions::default()).unwrap();
        assert_eq!(g.node_count(), 1);
        let gba = ltl_to_gba(&LtlNode::True);
        let p = build_product(&g, &gba, 0, 1 << 10).unwrap();
        assert_eq!(p.len(), 1);
        let lasso = find_fair_accepting_lasso(&p).expect("self-loop accepted");
        assert!(lasso.prefix.is_empty());
        assert_eq!(lasso.cycle.len(), 1);
    }

    #[test]
    fn gba_dot_renders() {
        let gba = ltl_to_gba(&LtlNode::until(LtlNode::Atom(0), LtlNode::Atom(1)));
        let dot = gba.to_dot();
        assert!(dot.starts_with("digraph"));
        assert!(dot.contains("q0"));
    }
}
