//! Translation of NNF LTL formulas to generalized Büchi automata by
//! tableau expansion.
//!
//! Nodes are built on the fly from obligation sets (the classic
//! New/Old/Next expansion); two nodes with equal processed and next-state
//! obligations are merged. Each node carries the literal constraints its
//! position of the word must satisfy, so a run over a word requires every
//! visited node to be consistent with the letter at its position.
//! Acceptance is generalized and node-based: one acceptance set per
//! Until-type subformula (`U`, and `F` as `True U`), containing the nodes
//! where that obligation is absent or discharged. `G` is expanded
//! directly as `x /\ X G x` and contributes no acceptance set.

use crate::ltl::{is_nnf, AtomId, AtomSet, LtlNode};
use std::collections::{BTreeSet, HashMap};

pub type GbaNodeId = usize;

#[derive(Debug, Clone)]
pub struct GbaNode {
    /// Atoms that must hold at this node's position.
    pub pos: AtomSet,
    /// Atoms that must be false at this node's position.
    pub neg: AtomSet,
    /// Acceptance sets this node belongs to, as a bit mask.
    pub accept: u64,
    /// Processed obligations, kept for inspection and DOT output.
    pub obligations: Vec<LtlNode<AtomId>>,
}

/// Generalized Büchi automaton over atom valuations.
#[derive(Debug, Clone)]
pub struct Gba {
    pub nodes: Vec<GbaNode>,
    pub initial: Vec<GbaNodeId>,
    pub succs: Vec<Vec<GbaNodeId>>,
    /// Number of acceptance sets (one per Until-type subformula).
    pub acceptance_sets: usize,
}

impl Gba {
    /// A node is consistent with a letter iff its literal constraints hold.
    pub fn consistent(&self, node: GbaNodeId, letter: AtomSet) -> bool {
        let n = &self.nodes[node];
        (letter & n.pos) == n.pos && (letter & n.neg) == 0
    }

    /// All acceptance sets, as a mask.
    pub fn full_accept_mask(&self) -> u64 {
        if self.acceptance_sets == 64 {
            u64::MAX
        } else {
            (1u64 << self.acceptance_sets) - 1
        }
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph gba {\n  rankdir=LR;\n");
        for (i, n) in self.nodes.iter().enumerate() {
            let obls: Vec<String> = n.obligations.iter().map(|o| format!("{o:?}")).collect();
            let init = if self.initial.contains(&i) {
                ", peripheries=2"
            } else {
                ""
            };
            out.push_str(&format!(
                "  q{} [label=\"q{} acc={:b}\\n{}\"{}];\n",
                i,
                i,
                n.accept,
                obls.join("\\n").replace('"', "'"),
                init
            ));
        }
        for (i, ss) in self.succs.iter().enumerate() {
            for &j in ss {
                out.push_str(&format!("  q{i} -> q{j};\n"));
            }
        }
        out.push_str("}\n");
        out
    }
}

type Obligations = BTreeSet<LtlNode<AtomId>>;
/// A finished tableau node is identified by its (old, next) obligations.
type NodeKey = (Obligations, Obligations);

/// Tableau node under construction.
#[derive(Debug, Clone)]
struct Expansion {
    incoming: Vec<Option<GbaNodeId>>, // None = initial edge
    new: Obligations,
    old: Obligations,
    next: Obligations,
}

struct Builder {
    done: HashMap<NodeKey, GbaNodeId>,
    nodes: Vec<NodeKey>,
    incoming: Vec<Vec<Option<GbaNodeId>>>,
}

/// Translate an NNF formula into a GBA whose language is exactly the set of
/// infinite words satisfying it.
pub fn ltl_to_gba(f: &LtlNode<AtomId>) -> Gba {
    assert!(is_nnf(f), "ltl_to_gba requires negation normal form");
    let mut b = Builder {
        done: HashMap::new(),
        nodes: Vec::new(),
        incoming: Vec::new(),
    };
    let start = Expansion {
        incoming: vec![None],
        new: BTreeSet::from([f.clone()]),
        old: BTreeSet::new(),
        next: BTreeSet::new(),
    };
    expand(start, &mut b);

    // Collect Until-type subformulas for the acceptance sets.
    let mut untils = Vec::new();
    collect_untils(f, &mut untils);
    untils.sort();
    untils.dedup();

    let n = b.nodes.len();
    let mut nodes = Vec::with_capacity(n);
    let mut succs = vec![Vec::new(); n];
    let mut initial = Vec::new();
    for (id, (old, _next)) in b.nodes.iter().enumerate() {
        let mut pos = 0u64;
        let mut neg = 0u64;
        for o in old {
            match o {
                LtlNode::Atom(a) => pos |= 1 << *a,
                LtlNode::Not(inner) => {
                    if let LtlNode::Atom(a) = &**inner {
                        neg |= 1 << *a;
                    }
                }
                _ => {}
            }
        }
        // Acceptance: for each Until-type g = a U b (or F b), the node is in
        // g's set iff g not in old, or b in old.
        let mut accept = 0u64;
        for (k, u) in untils.iter().enumerate() {
            let rhs = match u {
                LtlNode::Until(_, b) => (**b).clone(),
                LtlNode::Eventually(b) => (**b).clone(),
                _ => unreachable!(),
            };
            if !old.contains(u) || old.contains(&rhs) {
                accept |= 1 << k;
            }
        }
        nodes.push(GbaNode {
            pos,
            neg,
            accept,
            obligations: old.iter().cloned().collect(),
        });
        for inc in &b.incoming[id] {
            match inc {
                None => initial.push(id),
                Some(src) => succs[*src].push(id),
            }
        }
    }
    initial.sort_unstable();
    initial.dedup();
    for ss in &mut succs {
        ss.sort_unstable();
        ss.dedup();
    }
    Gba {
        nodes,
        initial,
        succs,
        acceptance_sets: untils.len(),
    }
}

fn collect_untils(f: &LtlNode<AtomId>, out: &mut Vec<LtlNode<AtomId>>) {
    match f {
        LtlNode::Until(a, b) => {
            out.push(f.clone());
            collect_untils(a, out);
            collect_untils(b, out);
        }
        LtlNode::Eventually(x) => {
            out.push(f.clone());
            collect_untils(x, out);
        }
        LtlNode::True | LtlNode::False | LtlNode::Atom(_) => {}
        LtlNode::Not(x) | LtlNode::Next(x) | LtlNode::Always(x) => collect_untils(x, out),
        LtlNode::And(a, b)
        | LtlNode::Or(a, b)
        | LtlNode::Implies(a, b)
        | LtlNode::WeakUntil(a, b)
        | LtlNode::Release(a, b) => {
            collect_untils(a, out);
            collect_untils(b, out);
        }
    }
}

fn expand(mut node: Expansion, b: &mut Builder) {
    let Some(f) = node.new.iter().next().cloned() else {
        // Fully processed: merge with an equal node or create one, then
        // expand its next-position obligations.
        let key = (node.old.clone(), node.next.clone());
        if let Some(&id) = b.done.get(&key) {
            b.incoming[id].extend(node.incoming);
            return;
        }
        let id = b.nodes.len();
        b.done.insert(key.clone(), id);
        b.nodes.push(key);
        b.incoming.push(node.incoming);
        let succ = Expansion {
            incoming: vec![Some(id)],
            new: node.next.clone(),
            old: BTreeSet::new(),
            next: BTreeSet::new(),
        };
        expand(succ, b);
        return;
    };
    node.new.remove(&f);
    match &f {
        LtlNode::False => {} // inconsistent node, dropped
        LtlNode::True => expand(node, b),
        LtlNode::Atom(_) => {
            let negated = LtlNode::not(f.clone());
            if node.old.contains(&negated) {
                return;
            }
            node.old.insert(f);
            expand(node, b);
        }
        LtlNode::Not(inner) => {
            debug_assert!(matches!(**inner, LtlNode::Atom(_)));
            if node.old.contains(inner) {
                return;
            }
            node.old.insert(f);
            expand(node, b);
        }
        LtlNode::And(x, y) => {
            for g in [x, y] {
                if !node.old.contains(g) {
                    node.new.insert((**g).clone());
                }
            }
            node.old.insert(f);
            expand(node, b);
        }
        LtlNode::Or(x, y) => {
            node.old.insert(f.clone());
            let mut left = node.clone();
            if !left.old.contains(x) {
                left.new.insert((**x).clone());
            }
            expand(left, b);
            let mut right = node;
            if !right.old.contains(y) {
                right.new.insert((**y).clone());
            }
            expand(right, b);
        }
        LtlNode::Next(x) => {
            node.old.insert(f.clone());
            node.next.insert((**x).clone());
            expand(node, b);
        }
        // a U b: either b now, or a now and the Until again next.
        LtlNode::Until(x, y) => {
            node.old.insert(f.clone());
            let mut keep = node.clone();
            if !keep.old.contains(x) {
                keep.new.insert((**x).clone());
            }
            keep.next.insert(f.clone());
            expand(keep, b);
            let mut discharge = node;
            if !discharge.old.contains(y) {
                discharge.new.insert((**y).clone());
            }
            expand(discharge, b);
        }
        // F x = True U x.
        LtlNode::Eventually(x) => {
            node.old.insert(f.clone());
            let mut keep = node.clone();
            keep.next.insert(f.clone());
            expand(keep, b);
            let mut discharge = node;
            if !discharge.old.contains(x) {
                discharge.new.insert((**x).clone());
            }
            expand(discharge, b);
        }
        // a R b: b now, and either a now (released) or the Release again.
        LtlNode::Release(x, y) => {
            node.old.insert(f.clone());
            let mut keep = node.clone();
            if !keep.old.contains(y) {
                keep.new.insert((**y).clone());
            }
            keep.next.insert(f.clone());
            expand(keep, b);
            let mut release = node;
            for g in [x, y] {
                if !release.old.contains(g) {
                    release.new.insert((**g).clone());
                }
            }
            expand(release, b);
        }
        // G x = x and G x again next.
        LtlNode::Always(x) => {
            node.old.insert(f.clone());
            if !node.old.contains(x) {
                node.new.insert((**x).clone());
            }
            node.next.insert(f.clone());
            expand(node, b);
        }
        LtlNode::Implies(_, _) | LtlNode::WeakUntil(_, _) => {
            unreachable!("ltl_to_gba requires NNF input")
        }
    }
}

/// Does the GBA accept the ultimately periodic word `prefix . cycle^omega`?
///
/// Decided by taking the product of the automaton with the lasso's position
/// graph and checking generalized-Büchi emptiness on it: a reachable
/// nontrivial strongly connected component whose nodes jointly cover every
/// acceptance set certifies acceptance.
pub fn gba_accepts_lasso(gba: &Gba, prefix: &[AtomSet], cycle: &[AtomSet]) -> bool {
    assert!(!cycle.is_empty());
    if gba.nodes.is_empty() {
        return false;
    }
    let positions = prefix.len() + cycle.len();
    let nq = gba.nodes.len();
    let letter = |i: usize| {
        if i < prefix.len() {
            prefix[i]
        } else {
            cycle[i - prefix.len()]
        }
    };
    let succ_pos = |i: usize| {
        if i + 1 < positions {
            i + 1
        } else {
            prefix.len()
        }
    };

    // Reachable product pairs (position, node), densely renumbered.
    let key = |p: usize, q: usize| p * nq + q;
    let mut id_of = vec![usize::MAX; positions * nq];
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    let mut stack = Vec::new();
    for &q in &gba.initial {
        if gba.consistent(q, letter(0)) && id_of[key(0, q)] == usize::MAX {
            id_of[key(0, q)] = pairs.len();
            pairs.push((0, q));
            stack.push((0usize, q));
        }
    }
    while let Some((p, q)) = stack.pop() {
        let np = succ_pos(p);
        for &nxt in &gba.succs[q] {
            if gba.consistent(nxt, letter(np)) && id_of[key(np, nxt)] == usize::MAX {
                id_of[key(np, nxt)] = pairs.len();
                pairs.push((np, nxt));
                stack.push((np, nxt));
            }
        }
    }
    let n = pairs.len();
    if n == 0 {
        return false;
    }
    let succs_of = |i: usize| -> Vec<usize> {
        let (p, q) = pairs[i];
        let np = succ_pos(p);
        gba.succs[q]
            .iter()
            .filter(|&&nxt| gba.consistent(nxt, letter(np)))
            .map(|&nxt| id_of[key(np, nxt)])
            .filter(|&j| j != usize::MAX)
            .collect()
    };

    // Iterative Tarjan over the product.
    let full = gba.full_accept_mask();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut scc_stack: Vec<usize> = Vec::new();
    let mut counter = 0usize;
    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        let mut call: Vec<(usize, Vec<usize>, usize)> = vec![(root, succs_of(root), 0)];
        index[root] = counter;
        low[root] = counter;
        counter += 1;
        scc_stack.push(root);
        on_stack[root] = true;
        while let Some((v, succs, i)) = call.last_mut() {
            if *i < succs.len() {
                let w = succs[*i];
                *i += 1;
                if index[w] == usize::MAX {
                    index[w] = counter;
                    low[w] = counter;
                    counter += 1;
                    scc_stack.push(w);
                    on_stack[w] = true;
                    call.push((w, succs_of(w), 0));
                } else if on_stack[w] {
                    let v = *v;
                    low[v] = low[v].min(index[w]);
                }
            } else {
                let (v, succs, _) = call.pop().unwrap();
                if let Some((parent, _, _)) = call.last() {
                    low[*parent] = low[*parent].min(low[v]);
                }
                if low[v] == index[v] {
                    // Pop the SCC rooted at v and test acceptance coverage.
                    let mut members = Vec::new();
                    loop {
                        let w = scc_stack.pop().unwrap();
                        on_stack[w] = false;
                        members.push(w);
                        if w == v {
                            break;
                        }
                    }
                    let nontrivial =
                        members.len() > 1 || succs.contains(&v) || succs_of(v).contains(&v);
                    if nontrivial {
                        let mask = members
                            .iter()
                            .fold(0u64, |acc, &w| acc | gba.nodes[pairs[w].1].accept);
                        if mask & full == full {
                            return true;
                        }
                    }
                }
            }
        }
    }
    false
}
