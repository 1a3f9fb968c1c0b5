//! Executable semantics: expression evaluation, initial-state enumeration,
//! action selection, and transition execution.
//!
//! A [`State`] is a total assignment to the declared variables, stored as
//! one raw `i64` slot per variable in declaration order (booleans as 0/1,
//! enum constants by declaration index, integers as their value). Equal
//! assignments compare, hash, and order identically, which makes state
//! ordering canonical.

use crate::compile::{
    ActionId, AgentId, CompiledDomain, CompiledDomainKind, CompiledExpr, CompiledModel,
    CompiledStmt, Value, VarId,
};
use std::collections::HashSet;

/// Total assignment of raw values to declared variables.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct State(pub Box<[i64]>);

impl State {
    pub fn get(&self, v: VarId) -> i64 {
        self.0[v]
    }

    pub fn with(&self, v: VarId, raw: i64) -> State {
        let mut slots = self.0.clone();
        slots[v] = raw;
        State(slots)
    }

    /// `x=False, y=AliceH, t=3` style rendering.
    pub fn render(&self, m: &CompiledModel) -> String {
        m.vars
            .iter()
            .enumerate()
            .map(|(i, v)| format!("{}={}", v.name, m.domains[v.domain].render_raw(self.0[i])))
            .collect::<Vec<_>>()
            .join(", ")
    }

    /// True iff every slot lies in its variable's domain.
    pub fn in_domains(&self, m: &CompiledModel) -> bool {
        self.0
            .iter()
            .zip(&m.vars)
            .all(|(raw, v)| m.domains[v.domain].contains_raw(*raw))
    }
}

/// One action choice per agent, indexed by agent id.
pub type ActionProfile = Box<[ActionId]>;

pub fn render_profile(m: &CompiledModel, p: &[ActionId]) -> String {
    m.agents
        .iter()
        .zip(p)
        .map(|(a, &act)| format!("{}:{}", a.name, a.actions[act]))
        .collect::<Vec<_>>()
        .join(", ")
}

/// Clamp a raw integer into a range domain; identity for other domains.
pub fn clamp_raw(dom: &CompiledDomain, raw: i64) -> i64 {
    match dom.kind {
        CompiledDomainKind::IntRange(lo, hi) => raw.clamp(lo, hi),
        _ => raw,
    }
}

/// Next-state bindings for primed references inside a nondeterministic
/// assignment: the listed variables and their candidate raw values.
pub type PrimedEnv<'a> = (&'a [VarId], &'a [i64]);

/// Evaluate an expression in a state.
///
/// `profile` is required when the expression contains action propositions
/// (transition block); `primed` when it contains primed references
/// (nondeterministic-assignment conditions). Arithmetic over a range type
/// saturates at the type's bounds, so evaluation is total on validated
/// models.
pub fn eval_expr(
    e: &CompiledExpr,
    m: &CompiledModel,
    s: &State,
    profile: Option<&[ActionId]>,
    primed: Option<PrimedEnv<'_>>,
) -> Value {
    match e {
        CompiledExpr::Bool(b) => Value::Bool(*b),
        CompiledExpr::Int(n) => Value::Int(*n, None),
        CompiledExpr::EnumConst(d, i) => Value::Enum(*d, *i),
        CompiledExpr::Var(v) => {
            let dom = m.vars[*v].domain;
            raw_to_value(&m.domains[dom], dom, s.get(*v))
        }
        CompiledExpr::Primed(v) => {
            let (vars, vals) = primed.expect("primed reference outside nondet condition");
            let idx = vars
                .iter()
                .position(|x| x == v)
                .expect("primed reference not in nondet variable list");
            let dom = m.vars[*v].domain;
            raw_to_value(&m.domains[dom], dom, vals[idx])
        }
        CompiledExpr::ActionIs(agent, action) => {
            let p = profile.expect("action proposition outside transition execution");
            Value::Bool(p[*agent] == *action)
        }
        CompiledExpr::Not(x) => Value::Bool(!eval_expr(x, m, s, profile, primed).as_bool()),
        CompiledExpr::And(a, b) => Value::Bool(
            eval_expr(a, m, s, profile, primed).as_bool()
                && eval_expr(b, m, s, profile, primed).as_bool(),
        ),
        CompiledExpr::Or(a, b) => Value::Bool(
            eval_expr(a, m, s, profile, primed).as_bool()
                || eval_expr(b, m, s, profile, primed).as_bool(),
        ),
        CompiledExpr::Implies(a, b) => Value::Bool(
            !eval_expr(a, m, s, profile, primed).as_bool()
                || eval_expr(b, m, s, profile, primed).as_bool(),
        ),
        CompiledExpr::Cmp(op, a, b) => {
            let va = eval_expr(a, m, s, profile, primed);
            let vb = eval_expr(b, m, s, profile, primed);
            Value::Bool(compare(*op, va.raw(), vb.raw()))
        }
        CompiledExpr::Arith(op, a, b, dom) => {
            let va = eval_expr(a, m, s, profile, primed).raw();
            let vb = eval_expr(b, m, s, profile, primed).raw();
            let raw = match op {
                crate::ast::ArithOp::Add => va.saturating_add(vb),
                crate::ast::ArithOp::Sub => va.saturating_sub(vb),
            };
            match dom {
                Some(d) => Value::Int(clamp_raw(&m.domains[*d], raw), Some(*d)),
                None => Value::Int(raw, None),
            }
        }
    }
}

fn raw_to_value(dom: &CompiledDomain, dom_id: usize, raw: i64) -> Value {
    match dom.kind {
        CompiledDomainKind::Bool => Value::Bool(raw != 0),
        CompiledDomainKind::Enum(_) => Value::Enum(dom_id, raw),
        CompiledDomainKind::IntRange(_, _) => Value::Int(raw, Some(dom_id)),
    }
}

fn compare(op: crate::ast::CmpOp, a: i64, b: i64) -> bool {
    use crate::ast::CmpOp::*;
    match op {
        Eq => a == b,
        Ne => a != b,
        Lt => a < b,
        Le => a <= b,
        Gt => a > b,
        Ge => a >= b,
    }
}

pub fn eval_bool(
    e: &CompiledExpr,
    m: &CompiledModel,
    s: &State,
    profile: Option<&[ActionId]>,
    primed: Option<PrimedEnv<'_>>,
) -> bool {
    eval_expr(e, m, s, profile, primed).as_bool()
}

/// Atom-table valuation of a state as a bit set.
pub fn atom_bits(m: &CompiledModel, s: &State) -> u64 {
    let mut bits = 0u64;
    for (i, a) in m.atoms.iter().enumerate() {
        if eval_bool(a, m, s, None, None) {
            bits |= 1 << i;
        }
    }
    bits
}

/// Fairness-constraint valuation of a state as a bit set.
pub fn fairness_bits(m: &CompiledModel, s: &State) -> u32 {
    let mut bits = 0u32;
    for (i, f) in m.fairness.iter().enumerate() {
        if eval_bool(f, m, s, None, None) {
            bits |= 1 << i;
        }
    }
    bits
}

/// Exactly the total assignments satisfying `init_cond`, in canonical
/// (lexicographic) order.
///
/// Enumeration assigns variables in declaration order and prunes a partial
/// assignment as soon as some fully-assigned conjunct of `init_cond` is
/// false. An empty result means the model is vacuous; callers report that
/// as a distinct outcome.
pub fn initial_states(m: &CompiledModel) -> Vec<State> {
    let conjuncts = m.init.conjuncts();
    let n = m.vars.len();
    // Conjunct -> first depth at which all of its variables are assigned.
    let mut check_at: Vec<Vec<&CompiledExpr>> = vec![Vec::new(); n + 1];
    for c in conjuncts {
        let mut vars = Vec::new();
        c.collect_vars(&mut vars);
        let depth = vars.iter().map(|v| v + 1).max().unwrap_or(0);
        check_at[depth].push(c);
    }

    let mut out = Vec::new();
    let mut slots = vec![0i64; n];
    // Depth-0 conjuncts are constants.
    let dummy = State(Box::from([]));
    for c in &check_at[0] {
        let constant = eval_bool(c, m, &dummy, None, None);
        if !constant {
            return Vec::new();
        }
    }
    fn rec(
        m: &CompiledModel,
        check_at: &[Vec<&CompiledExpr>],
        slots: &mut Vec<i64>,
        depth: usize,
        out: &mut Vec<State>,
    ) {
        if depth == slots.len() {
            out.push(State(slots.clone().into_boxed_slice()));
            return;
        }
        let dom = &m.domains[m.vars[depth].domain];
        for raw in dom.raw_values() {
            slots[depth] = raw;
            // Partial-assignment pruning: all conjuncts whose variables are
            // now fully assigned must hold.
            let probe = State(slots.clone().into_boxed_slice());
            if check_at[depth + 1]
                .iter()
                .all(|c| eval_bool(c, m, &probe, None, None))
            {
                rec(m, check_at, slots, depth + 1, out);
            }
        }
    }
    rec(m, &check_at, &mut slots, 0, &mut out);
    out
}

/// Actions available to an agent in a state: all branches whose guards
/// hold; the otherwise action exactly when no guard holds; the synthesized
/// skip-equivalent when nothing holds and there is no otherwise branch.
/// Returned sorted by action id, without duplicates.
pub fn enabled_actions(m: &CompiledModel, agent: AgentId, s: &State) -> Vec<ActionId> {
    let a = &m.agents[agent];
    let mut out: Vec<ActionId> = a
        .branches
        .iter()
        .filter(|(g, _)| eval_bool(g, m, s, None, None))
        .map(|&(_, act)| act)
        .collect();
    if out.is_empty() {
        out.push(a.fallback);
    }
    out.sort_unstable();
    out.dedup();
    out
}

/// All states reachable by executing one statement under a fixed action
/// profile, deduplicated, in deterministic order.
pub fn exec_statement(
    stmt: &CompiledStmt,
    m: &CompiledModel,
    s: &State,
    profile: &[ActionId],
) -> Vec<State> {
    let mut out = exec(stmt, m, s, profile);
    dedup_states(&mut out);
    out
}

fn exec(stmt: &CompiledStmt, m: &CompiledModel, s: &State, profile: &[ActionId]) -> Vec<State> {
    match stmt {
        CompiledStmt::Skip => vec![s.clone()],
        CompiledStmt::Assign(v, e) => {
            let val = eval_expr(e, m, s, Some(profile), None);
            let dom = &m.domains[m.vars[*v].domain];
            vec![s.with(*v, clamp_raw(dom, val.raw()))]
        }
        CompiledStmt::Seq(stmts) => {
            let mut states = vec![s.clone()];
            for st in stmts {
                let mut next = Vec::new();
                for t in &states {
                    next.extend(exec(st, m, t, profile));
                }
                dedup_states(&mut next);
                states = next;
            }
            states
        }
        CompiledStmt::Guarded {
            branches,
            otherwise,
        } => {
            let mut out = Vec::new();
            for (g, body) in branches {
                if eval_bool(g, m, s, Some(profile), None) {
                    out.extend(exec(body, m, s, profile));
                }
            }
            if out.is_empty() {
                match otherwise {
                    Some(body) => out = exec(body, m, s, profile),
                    // No true guard and no otherwise-branch: skip.
                    None => out.push(s.clone()),
                }
            }
            out
        }
        CompiledStmt::Nondet { vars, cond } => {
            // Every assignment to the listed variables (others unchanged)
            // such that the condition holds, primed references reading the
            // candidate.
            let domains: Vec<&CompiledDomain> =
                vars.iter().map(|&v| &m.domains[m.vars[v].domain]).collect();
            let mut candidate: Vec<i64> = vars.iter().map(|&v| s.get(v)).collect();
            let mut out = Vec::new();
            odometer(&domains, &mut candidate, 0, &mut |cand| {
                if eval_bool(cond, m, s, Some(profile), Some((vars, cand))) {
                    let mut slots = s.0.clone();
                    for (i, &v) in vars.iter().enumerate() {
                        slots[v] = cand[i];
                    }
                    out.push(State(slots));
                }
            });
            out
        }
    }
}

fn odometer(
    domains: &[&CompiledDomain],
    candidate: &mut Vec<i64>,
    depth: usize,
    visit: &mut impl FnMut(&[i64]),
) {
    if depth == domains.len() {
        visit(candidate);
        return;
    }
    for raw in domains[depth].raw_values() {
        candidate[depth] = raw;
        odometer(domains, candidate, depth + 1, visit);
    }
}

fn dedup_states(states: &mut Vec<State>) {
    let mut seen = HashSet::with_capacity(states.len());
    states.retain(|s| seen.insert(s.clone()));
}

/// All `(profile, successor)` pairs from a state: the product of each
/// agent's enabled actions, each executed against the transition block.
/// Duplicate pairs are removed; order is deterministic (profiles in
/// lexicographic action-id order, then execution order).
pub fn successors(m: &CompiledModel, s: &State) -> Vec<(ActionProfile, State)> {
    let per_agent: Vec<Vec<ActionId>> = (0..m.agents.len())
        .map(|a| enabled_actions(m, a, s))
        .collect();
    let mut out = Vec::new();
    let mut profile: Vec<ActionId> = vec![0; m.agents.len()];
    fn rec(
        m: &CompiledModel,
        s: &State,
        per_agent: &[Vec<ActionId>],
        profile: &mut Vec<ActionId>,
        agent: usize,
        out: &mut Vec<(ActionProfile, State)>,
    ) {
        if agent == per_agent.len() {
            for t in exec_statement(&m.transitions, m, s, profile) {
                out.push((profile.clone().into_boxed_slice(), t));
            }
            return;
        }
        for &a in &per_agent[agent] {
            profile[agent] = a;
            rec(m, s, per_agent, profile, agent + 1, out);
        }
    }
    rec(m, s, &per_agent, &mut profile, 0, &mut out);
    let mut seen = HashSet::with_capacity(out.len());
    out.retain(|p| seen.insert(p.clone()));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compile::compile;
    use crate::parser::parse_model;

    const ESCROW: &str = include_str!("../../../examples/escrow.swapmc");
    const HTLC: &str = include_str!("../../../examples/htlc.swapmc");

    fn model(src: &str) -> CompiledModel {
        compile(&parse_model(src).unwrap()).unwrap()
    }

    /// Independent oracle: enumerate the full state product and filter by
    /// init_cond, no pruning.
    fn brute_force_initials(m: &CompiledModel) -> Vec<State> {
        let domains: Vec<&CompiledDomain> = m.vars.iter().map(|v| &m.domains[v.domain]).collect();
        let mut out = Vec::new();
        let mut slots = vec![0i64; m.vars.len()];
        odometer(&domains, &mut slots, 0, &mut |cand| {
            let s = State(cand.to_vec().into_boxed_slice());
            if eval_bool(&m.init, m, &s, None, None) {
                out.push(s);
            }
        });
        out
    }

    #[test]
    fn escrow_initial_states_have_expected_shape() {
        let m = model(ESCROW);
        let init = initial_states(&m);
        // holdera=AliceH, holderb=BobH, playedCoop*, rest false; strategies
        // and turn free: 3 * 3 * 2.
        assert_eq!(init.len(), 18);
        let holdera = m.var_id("holdera").unwrap();
        let s = &init[0];
        assert!(eval_bool(
            &CompiledExpr::Cmp(
                crate::ast::CmpOp::Eq,
                Box::new(CompiledExpr::Var(holdera)),
                Box::new(CompiledExpr::EnumConst(m.vars[holdera].domain, 0)),
            ),
            &m,
            s,
            None,
            None
        ));
        // Cross-check against the unpruned product filter.
        assert_eq!(init, brute_force_initials(&m));
    }

    #[test]
    fn escrow_initials_exact_set() {
        let m = model(ESCROW);
        let init: HashSet<State> = initial_states(&m).into_iter().collect();
        // Construct the expected 18 states literally.
        let var = |n: &str| m.var_id(n).unwrap();
        let mut expected = HashSet::new();
        for sa in 0..3i64 {
            for sb in 0..3i64 {
                for turn in 0..2i64 {
                    let mut slots = vec![0i64; m.vars.len()];
                    slots[var("holdera")] = 0; // AliceH
                    slots[var("holderb")] = 1; // BobH
                    slots[var("playedCoopA")] = 1;
                    slots[var("playedCoopB")] = 1;
                    slots[var("strategyA")] = sa;
                    slots[var("strategyB")] = sb;
                    slots[var("turn")] = turn;
                    expected.insert(State(slots.into_boxed_slice()));
                }
            }
        }
        assert_eq!(init, expected);
    }

    #[test]
    fn false_init_cond_yields_empty_set() {
        let m = model("x : Bool\ninit_cond = False\ntransitions begin skip end\n");
        assert!(initial_states(&m).is_empty());
    }

    #[test]
    fn htlc_has_nine_initial_states() {
        let m = model(HTLC);
        let init = initial_states(&m);
        // Everything pinned except the two strategy variables.
        assert_eq!(init.len(), 9);
        let sa = m.var_id("strategyA").unwrap();
        let sb = m.var_id("strategyB").unwrap();
        let time = m.var_id("time").unwrap();
        let ta = m.var_id("timeoutA").unwrap();
        let tb = m.var_id("timeoutB").unwrap();
        let combos: HashSet<(i64, i64)> = init.iter().map(|s| (s.get(sa), s.get(sb))).collect();
        assert_eq!(combos.len(), 9);
        for s in &init {
            assert_eq!(s.get(time), 0);
            assert_eq!(s.get(ta), 8);
            assert_eq!(s.get(tb), 6);
        }
    }

    /// Same structure as the full model, shrunk so the unpruned product
    /// filter stays cheap; validates the pruning enumerator against it.
    #[test]
    fn shrunken_htlc_initials_match_brute_force() {
        let src = HTLC
            .replace("type Time = {0..20}", "type Time = {0..6}")
            .replace(
                "timeoutA == 8 /\\ timeoutB == 6",
                "timeoutA == 3 /\\ timeoutB == 2",
            );
        let m = model(&src);
        let init = initial_states(&m);
        assert_eq!(init.len(), 9);
        assert_eq!(init, brute_force_initials(&m));
    }

    #[test]
    fn saturating_arithmetic_clamps_to_domain() {
        let m = model(
            "type T = {0..20}\nt : T\ninit_cond = t == 20\n\
             transitions begin t := t + 1 end\n",
        );
        let t = m.var_id("t").unwrap();
        // Check all 21 domain points against the clamp oracle.
        let plus_one = match &m.transitions {
            CompiledStmt::Seq(ss) => match &ss[0] {
                CompiledStmt::Assign(_, e) => e.clone(),
                other => panic!("unexpected {other:?}"),
            },
            CompiledStmt::Assign(_, e) => e.clone(),
            other => panic!("unexpected {other:?}"),
        };
        for v in 0..=20i64 {
            let s = State(vec![v].into_boxed_slice());
            let got = eval_expr(&plus_one, &m, &s, None, None).raw();
            let expected = (v + 1).clamp(0, 20);
            assert_eq!(got, expected, "at t={v}");
        }
        let _ = t;
    }

    #[test]
    fn neg_true_is_false() {
        let m = model("x : Bool\ninit_cond = x\ntransitions begin skip end\n");
        let e = CompiledExpr::Not(Box::new(CompiledExpr::Bool(true)));
        let s = State(vec![1].into_boxed_slice());
        assert!(!eval_bool(&e, &m, &s, None, None));
    }

    #[test]
    fn escrow_guard_expressions_in_initial_state() {
        let m = model(ESCROW);
        let init = initial_states(&m);
        // `holdera == AliceH` holds in every initial state.
        let holdera = m.var_id("holdera").unwrap();
        for s in &init {
            assert_eq!(s.get(holdera), 0);
        }
    }

    #[test]
    fn enabled_actions_escrow_cooperate_deposit() {
        let m = model(ESCROW);
        // strategyA=Cooperate, deposits false: only Deposit.
        let init = initial_states(&m);
        let sa = m.var_id("strategyA").unwrap();
        let alice = m.agent_id("Alice").unwrap();
        let s = init.iter().find(|s| s.get(sa) == 0).unwrap();
        let acts = enabled_actions(&m, alice, s);
        let names: Vec<&str> = acts
            .iter()
            .map(|&a| m.agents[alice].actions[a].as_str())
            .collect();
        assert_eq!(names, vec!["Deposit"]);
    }

    #[test]
    fn enabled_actions_escrow_random_has_all_five() {
        let m = model(ESCROW);
        let init = initial_states(&m);
        let sa = m.var_id("strategyA").unwrap();
        let alice = m.agent_id("Alice").unwrap();
        // Random is constant index 2 in {Cooperate,Recover,Random}.
        let s = init.iter().find(|s| s.get(sa) == 2).unwrap();
        let acts = enabled_actions(&m, alice, s);
        let mut names: Vec<&str> = acts
            .iter()
            .map(|&a| m.agents[alice].actions[a].as_str())
            .collect();
        names.sort_unstable();
        assert_eq!(
            names,
            vec!["Cancel", "Deposit", "Finalize", "GiveToOther", "Skip"]
        );
    }

    #[test]
    fn enabled_actions_escrow_recover_undeposited_falls_through() {
        let m = model(ESCROW);
        let init = initial_states(&m);
        let sa = m.var_id("strategyA").unwrap();
        let alice = m.agent_id("Alice").unwrap();
        // Recover with deposited=false: no guard holds, otherwise gives Skip.
        let s = init.iter().find(|s| s.get(sa) == 1).unwrap();
        let acts = enabled_actions(&m, alice, s);
        let names: Vec<&str> = acts
            .iter()
            .map(|&a| m.agents[alice].actions[a].as_str())
            .collect();
        assert_eq!(names, vec!["Skip"]);
    }

    #[test]
    fn nondet_assignment_over_bool_yields_two_states() {
        let m = model(
            "x : Bool\ny : Bool\ninit_cond = x /\\ y\ntransitions begin [[ x | True ]] end\n",
        );
        let s = State(vec![1, 1].into_boxed_slice());
        let states = exec_statement(&m.transitions, &m, &s, &[]);
        assert_eq!(states.len(), 2);
        // y untouched in both.
        assert!(states.iter().all(|t| t.get(1) == 1));
    }

    #[test]
    fn skip_execution_is_identity() {
        let m = model("x : Bool\ninit_cond = x\ntransitions begin skip end\n");
        let s = State(vec![1].into_boxed_slice());
        assert_eq!(exec_statement(&m.transitions, &m, &s, &[]), vec![s.clone()]);
    }

    #[test]
    fn escrow_deposit_transition_has_18_successor_states() {
        let m = model(ESCROW);
        let init = initial_states(&m);
        let sa = m.var_id("strategyA").unwrap();
        let sb = m.var_id("strategyB").unwrap();
        let turn = m.var_id("turn").unwrap();
        // turn=AliceP, both strategies Cooperate.
        let s = init
            .iter()
            .find(|s| s.get(sa) == 0 && s.get(sb) == 0 && s.get(turn) == 0)
            .unwrap();
        let alice = m.agent_id("Alice").unwrap();
        let bob = m.agent_id("Bob").unwrap();
        let deposit = m.agents[alice]
            .actions
            .iter()
            .position(|a| a == "Deposit")
            .unwrap();
        let bob_deposit = m.agents[bob]
            .actions
            .iter()
            .position(|a| a == "Deposit")
            .unwrap();
        let mut profile = vec![0; 2];
        profile[alice] = deposit;
        profile[bob] = bob_deposit;
        let succ = exec_statement(&m.transitions, &m, s, &profile);
        // strategyA x strategyB x turn re-randomized: 18 distinct states.
        assert_eq!(succ.len(), 18);
        let deposited_a = m.var_id("depositedA").unwrap();
        let holdera = m.var_id("holdera").unwrap();
        let contract = 2; // {AliceH,BobH,Contract,Other}
        for t in &succ {
            assert_eq!(t.get(deposited_a), 1);
            assert_eq!(t.get(holdera), contract);
        }
        // Cross-check against an independent relational interpreter.
        let oracle = relational_exec(&m, s, &profile);
        let engine: HashSet<State> = succ.into_iter().collect();
        assert_eq!(engine, oracle);
    }

    /// Independent statement interpreter: denotes each statement as a
    /// relation computed by enumerating candidate next-states over the full
    /// variable product, rather than by targeted updates.
    fn relational_exec(m: &CompiledModel, s: &State, profile: &[ActionId]) -> HashSet<State> {
        fn denote(
            m: &CompiledModel,
            stmt: &CompiledStmt,
            s: &State,
            profile: &[ActionId],
        ) -> HashSet<State> {
            match stmt {
                CompiledStmt::Skip => HashSet::from([s.clone()]),
                CompiledStmt::Assign(v, e) => {
                    let val = eval_expr(e, m, s, Some(profile), None).raw();
                    let dom = &m.domains[m.vars[*v].domain];
                    HashSet::from([s.with(*v, clamp_raw(dom, val))])
                }
                CompiledStmt::Seq(ss) => {
                    let mut cur = HashSet::from([s.clone()]);
                    for st in ss {
                        let mut next = HashSet::new();
                        for t in &cur {
                            next.extend(denote(m, st, t, profile));
                        }
                        cur = next;
                    }
                    cur
                }
                CompiledStmt::Guarded {
                    branches,
                    otherwise,
                } => {
                    let mut out = HashSet::new();
                    let mut any = false;
                    for (g, body) in branches {
                        if eval_bool(g, m, s, Some(profile), None) {
                            any = true;
                            out.extend(denote(m, body, s, profile));
                        }
                    }
                    if !any {
                        match otherwise {
                            Some(body) => out = denote(m, body, s, profile),
                            None => {
                                out.insert(s.clone());
                            }
                        }
                    }
                    out
                }
                CompiledStmt::Nondet { vars, cond } => {
                    // Enumerate every total candidate state and keep those
                    // that agree with s off the listed variables and satisfy
                    // the condition.
                    let domains: Vec<&CompiledDomain> =
                        m.vars.iter().map(|v| &m.domains[v.domain]).collect();
                    let mut out = HashSet::new();
                    let mut slots = vec![0i64; m.vars.len()];
                    odometer(&domains, &mut slots, 0, &mut |cand| {
                        for (i, &raw) in cand.iter().enumerate() {
                            if !vars.contains(&i) && raw != s.get(i) {
                                return;
                            }
                        }
                        let primed_vals: Vec<i64> = vars.iter().map(|&v| cand[v]).collect();
                        if eval_bool(cond, m, s, Some(profile), Some((vars, &primed_vals))) {
                            out.insert(State(cand.to_vec().into_boxed_slice()));
                        }
                    });
                    out
                }
            }
        }
        denote(m, &m.transitions, s, profile)
    }

    #[test]
    fn escrow_random_profile_count_is_25() {
        let m = model(ESCROW);
        let init = initial_states(&m);
        let sa = m.var_id("strategyA").unwrap();
        let sb = m.var_id("strategyB").unwrap();
        let s = init
            .iter()
            .find(|s| s.get(sa) == 2 && s.get(sb) == 2)
            .unwrap();
        let profiles: HashSet<ActionProfile> =
            successors(&m, s).into_iter().map(|(p, _)| p).collect();
        assert_eq!(profiles.len(), 25);
    }

    #[test]
    fn skip_transitions_yield_profiles_times_self() {
        let m = model("type S = {A0,B0}\nx : S\ninit_cond = x == A0\ntransitions begin skip end\n");
        let s = State(vec![0].into_boxed_slice());
        let succ = successors(&m, &s);
        assert_eq!(succ.len(), 1); // no agents: one empty profile
        assert_eq!(succ[0].1, s);
    }

    #[test]
    fn htlc_time_saturates_in_successors() {
        let m = model(HTLC);
        // Build a state at time=20 by starting from an initial state and
        // forcing the time slot.
        let init = initial_states(&m);
        let time = m.var_id("time").unwrap();
        let s = init[0].with(time, 20);
        for (_, t) in successors(&m, &s) {
            assert_eq!(t.get(time), 20, "time must stay saturated");
        }
    }
}
