//! Verification of `A`-quantified specifications under unconditional
//! fairness, with independently validated lasso counterexamples.
//!
//! `check` negates the specification body, translates it to a generalized
//! Büchi automaton, products it with the reachable graph (fairness
//! constraints become extra acceptance sets), and looks for a fair
//! accepting lasso. A refutation is validated by
//! [`validate_counterexample`], which reuses only [`successors`] and
//! [`eval_on_lasso`] — not the automaton or product machinery.

use crate::buchi::ltl_to_gba;
use crate::compile::CompiledModel;
use crate::error::CheckError;
use crate::graph::{StateGraph, StateId};
use crate::ltl::{eval_on_lasso, normalize, AtomSet, LtlNode};
use crate::product::{build_product, find_fair_accepting_lasso, ProductLasso};
use crate::scc::tarjan_sccs;
use crate::semantics::{atom_bits, eval_bool, successors, ActionProfile, State};
use serde_json::{json, Value as Json};
use std::collections::VecDeque;
use std::time::Instant;

/// A refutation witness: a finite prefix from an initial state followed by
/// a repeating cycle. Each step pairs the state with the action profile
/// chosen in it; the successor of the last cycle step is the first cycle
/// step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LassoTrace {
    pub prefix: Vec<(State, ActionProfile)>,
    pub cycle: Vec<(State, ActionProfile)>,
}

impl LassoTrace {
    pub fn first_state(&self) -> &State {
        self.prefix
            .first()
            .map(|(s, _)| s)
            .unwrap_or_else(|| &self.cycle[0].0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Holds,
    Refuted(Box<LassoTrace>),
    /// The specification holds, but some initial state admits no fair run
    /// at all, so it holds vacuously there.
    Vacuous,
}

impl Outcome {
    pub fn is_refuted(&self) -> bool {
        matches!(self, Outcome::Refuted(_))
    }

    pub fn name(&self) -> &'static str {
        match self {
            Outcome::Holds => "holds",
            Outcome::Refuted(_) => "refuted",
            Outcome::Vacuous => "vacuous",
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct CheckStats {
    pub reachable_states: usize,
    pub reachable_edges: usize,
    pub product_states: usize,
    pub millis: u128,
}

#[derive(Debug, Clone)]
pub struct Verdict {
    pub label: String,
    pub outcome: Outcome,
    pub stats: CheckStats,
}

/// Budget for the product exploration.
#[derive(Debug, Clone, Copy)]
pub struct CheckOptions {
    pub product_budget: usize,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            product_budget: 20_000_000,
        }
    }
}

/// Check one specification by index against a prebuilt reachable graph.
pub fn check(
    m: &CompiledModel,
    graph: &StateGraph,
    spec_index: usize,
    opts: CheckOptions,
) -> Result<Verdict, CheckError> {
    if spec_index >= m.specs.len() {
        return Err(CheckError::SpecIndexOutOfRange {
            index: spec_index,
            count: m.specs.len(),
        });
    }
    let spec = &m.specs[spec_index];
    let start = Instant::now();

    let negated = normalize(&LtlNode::not(spec.body.clone()));
    let gba = ltl_to_gba(&negated);
    let product = build_product(graph, &gba, m.fairness.len(), opts.product_budget)?;
    let lasso = find_fair_accepting_lasso(&product);

    let outcome = match lasso {
        Some(pl) => {
            let trace = resolve_trace(graph, &product, &pl);
            let failures = validate_counterexample_report(m, &spec.body, &trace);
            assert!(
                failures.is_empty(),
                "internal error: produced counterexample fails validation: {failures:?}"
            );
            Outcome::Refuted(Box::new(trace))
        }
        None => {
            if some_initial_state_has_no_fair_run(graph, m.fairness.len()) {
                Outcome::Vacuous
            } else {
                Outcome::Holds
            }
        }
    };
    Ok(Verdict {
        label: spec.label.clone(),
        outcome,
        stats: CheckStats {
            reachable_states: graph.node_count(),
            reachable_edges: graph.edge_count(),
            product_states: product.len(),
            millis: start.elapsed().as_millis(),
        },
    })
}

/// Check one specification selected by its label (verbatim, or modulo
/// whitespace normalization for multi-line labels).
pub fn check_by_label(
    m: &CompiledModel,
    graph: &StateGraph,
    label: &str,
    opts: CheckOptions,
) -> Result<Verdict, CheckError> {
    let idx = m
        .spec_by_label(label)
        .ok_or_else(|| CheckError::UnknownSpecLabel {
            label: label.to_string(),
        })?;
    check(m, graph, idx, opts)
}

/// Map a product-level lasso to model states and action profiles. For each
/// model edge the lowest-numbered profile connecting the pair is chosen.
fn resolve_trace(
    graph: &StateGraph,
    product: &crate::product::Product<'_>,
    pl: &ProductLasso,
) -> LassoTrace {
    let to_state = |n: u32| product.nodes[n as usize].0;
    let prefix_states: Vec<StateId> = pl.prefix.iter().map(|&n| to_state(n)).collect();
    let cycle_states: Vec<StateId> = pl.cycle.iter().map(|&n| to_state(n)).collect();
    let step = |s: StateId, next: StateId| -> (State, ActionProfile) {
        let (p, _) = graph
            .edge_between(s, next)
            .expect("product edge implies a model edge");
        (
            graph.states[s as usize].clone(),
            graph.profiles[p as usize].clone(),
        )
    };
    let mut prefix = Vec::new();
    for i in 0..prefix_states.len() {
        let next = if i + 1 < prefix_states.len() {
            prefix_states[i + 1]
        } else {
            cycle_states[0]
        };
        prefix.push(step(prefix_states[i], next));
    }
    let mut cycle = Vec::new();
    for i in 0..cycle_states.len() {
        let next = cycle_states[(i + 1) % cycle_states.len()];
        cycle.push(step(cycle_states[i], next));
    }
    LassoTrace { prefix, cycle }
}

/// True iff some initial state cannot start any run satisfying every
/// fairness constraint infinitely often. Decided on the model graph: a fair
/// run exists from a state iff it can reach a nontrivial SCC whose states
/// jointly satisfy every fairness constraint.
pub fn some_initial_state_has_no_fair_run(graph: &StateGraph, fairness_count: usize) -> bool {
    let n = graph.node_count();
    let full: u32 = if fairness_count >= 32 {
        u32::MAX
    } else {
        (1u32 << fairness_count) - 1
    };
    let sccs = tarjan_sccs(n, |v| {
        graph
            .succs_of(v as StateId)
            .iter()
            .map(|&x| x as usize)
            .collect()
    });
    let mut fair_node = vec![false; n];
    for comp in &sccs {
        let mask = comp
            .iter()
            .fold(0u32, |acc, &v| acc | graph.fairness_bits[v]);
        if mask & full != full {
            continue;
        }
        let nontrivial = comp.len() > 1
            || graph
                .succs_of(comp[0] as StateId)
                .contains(&(comp[0] as u32));
        if nontrivial {
            for &v in comp {
                fair_node[v] = true;
            }
        }
    }
    // Backward reachability from fair SCCs.
    let mut preds: Vec<Vec<u32>> = vec![Vec::new(); n];
    for v in 0..n {
        for &w in graph.succs_of(v as StateId) {
            preds[w as usize].push(v as u32);
        }
    }
    let mut can_reach = fair_node.clone();
    let mut queue: VecDeque<usize> = (0..n).filter(|&v| fair_node[v]).collect();
    while let Some(v) = queue.pop_front() {
        for &p in &preds[v] {
            if !can_reach[p as usize] {
                can_reach[p as usize] = true;
                queue.push_back(p as usize);
            }
        }
    }
    graph.initial.iter().any(|&i| !can_reach[i as usize])
}

/// Independent validation of a refutation trace. True iff
/// 1. every step is a genuine edge per [`successors`],
/// 2. the prefix starts at an initial state,
/// 3. every fairness constraint holds at some cycle state, and
/// 4. the negated body holds on the state-sampled atom word of the lasso.
pub fn validate_counterexample(
    m: &CompiledModel,
    spec_body: &LtlNode<crate::ltl::AtomId>,
    trace: &LassoTrace,
) -> bool {
    validate_counterexample_report(m, spec_body, trace).is_empty()
}

/// As [`validate_counterexample`], but enumerating every failed condition.
pub fn validate_counterexample_report(
    m: &CompiledModel,
    spec_body: &LtlNode<crate::ltl::AtomId>,
    trace: &LassoTrace,
) -> Vec<String> {
    let mut failures = Vec::new();
    if trace.cycle.is_empty() {
        failures.push("cycle is empty".to_string());
        return failures;
    }

    // (2) the run starts at an initial state.
    let first = trace.first_state();
    if !first.in_domains(m) || !eval_bool(&m.init, m, first, None, None) {
        failures.push("first state does not satisfy init_cond".to_string());
    }

    // (1) consecutive steps are edges per successors().
    let steps: Vec<&(State, ActionProfile)> =
        trace.prefix.iter().chain(trace.cycle.iter()).collect();
    for (i, (s, p)) in steps.iter().enumerate() {
        let expected_next: &State = if i + 1 < steps.len() {
            &steps[i + 1].0
        } else {
            &trace.cycle[0].0
        };
        let succ = successors(m, s);
        if !succ.iter().any(|(sp, st)| sp == p && st == expected_next) {
            failures.push(format!(
                "step {i}: ({}, profile) -> {} is not an edge of the model",
                s.render(m),
                expected_next.render(m)
            ));
        }
    }

    // (3) fairness holds somewhere on the cycle.
    for (fi, f) in m.fairness.iter().enumerate() {
        if !trace
            .cycle
            .iter()
            .any(|(s, _)| eval_bool(f, m, s, None, None))
        {
            failures.push(format!("fairness constraint {fi} never holds on the cycle"));
        }
    }

    // (4) the negated body holds on the lasso's atom word.
    let prefix_word: Vec<AtomSet> = trace.prefix.iter().map(|(s, _)| atom_bits(m, s)).collect();
    let cycle_word: Vec<AtomSet> = trace.cycle.iter().map(|(s, _)| atom_bits(m, s)).collect();
    let negated = LtlNode::not(spec_body.clone());
    if !eval_on_lasso(&negated, &prefix_word, &cycle_word) {
        failures.push("negated specification body does not hold on the lasso word".to_string());
    }
    failures
}

/// Render a verdict as the JSON report document.
pub fn verdict_to_json(m: &CompiledModel, model_name: &str, v: &Verdict) -> Json {
    let mut doc = json!({
        "model": model_name,
        "spec_label": v.label,
        "outcome": v.outcome.name(),
        "stats": {
            "states": v.stats.reachable_states,
            "product_states": v.stats.product_states,
            "millis": v.stats.millis as u64,
        },
    });
    if let Outcome::Refuted(trace) = &v.outcome {
        let step_json = |(s, p): &(State, ActionProfile)| -> Json {
            let state: serde_json::Map<String, Json> = m
                .vars
                .iter()
                .enumerate()
                .map(|(i, var)| {
                    let dom = &m.domains[var.domain];
                    let raw = s.get(i);
                    let val = match dom.kind {
                        crate::compile::CompiledDomainKind::Bool => json!(raw != 0),
                        crate::compile::CompiledDomainKind::IntRange(_, _) => json!(raw),
                        crate::compile::CompiledDomainKind::Enum(_) => {
                            json!(dom.render_raw(raw))
                        }
                    };
                    (var.name.clone(), val)
                })
                .collect();
            let actions: serde_json::Map<String, Json> = m
                .agents
                .iter()
                .zip(p.iter())
                .map(|(a, &act)| (a.name.clone(), json!(a.actions[act])))
                .collect();
            json!({"state": state, "actions": actions})
        };
        doc["trace"] = json!({
            "prefix": trace.prefix.iter().map(step_json).collect::<Vec<_>>(),
            "cycle": trace.cycle.iter().map(step_json).collect::<Vec<_>>(),
        });
    }
    doc
}
