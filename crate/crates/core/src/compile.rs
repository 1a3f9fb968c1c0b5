//! Static validation and lowering of a parsed model.
//!
//! Validation resolves every identifier, type-checks every expression, and
//! reports all violations with source locations. Lowering produces a
//! [`CompiledModel`] in which defines are pre-expanded, names are replaced
//! by dense indices, and each specification formula is rewritten over a
//! shared atom table (atoms are whole boolean expressions compared
//! structurally after define expansion).
//!
//! Integer arithmetic is typed nominally: both operands of `+`/`-` must
//! come from the same declared range type (integer literals adopt the other
//! operand's type), and evaluation clamps the result to that range. A
//! `+`/`-` whose statically inferred interval can leave the range draws a
//! load-time warning.

use crate::ast::{self, ArithOp, CmpOp, DomainKind, ExprKind, ModelIr, SourceSpan, StatementKind};
use crate::ltl::{AtomId, LtlNode};
use std::collections::HashMap;
use std::fmt;

pub type DomainId = usize;
pub type VarId = usize;
pub type AgentId = usize;
pub type ActionId = usize;

/// The builtin boolean domain is always id 0.
pub const BOOL_DOMAIN: DomainId = 0;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub span: SourceSpan,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.span, self.message)
    }
}

/// All type and scoping violations found in a model, plus warnings.
#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub errors: Vec<Diagnostic>,
    pub warnings: Vec<Diagnostic>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.errors.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.errors {
            writeln!(f, "error: {e}")?;
        }
        for w in &self.warnings {
            writeln!(f, "warning: {w}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CompiledDomainKind {
    Bool,
    Enum(Vec<String>),
    IntRange(i64, i64),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompiledDomain {
    pub name: String,
    pub kind: CompiledDomainKind,
}

impl CompiledDomain {
    pub fn size(&self) -> u64 {
        match &self.kind {
            CompiledDomainKind::Bool => 2,
            CompiledDomainKind::Enum(cs) => cs.len() as u64,
            CompiledDomainKind::IntRange(lo, hi) => (hi - lo + 1) as u64,
        }
    }

    /// Raw slot values in canonical order.
    pub fn raw_values(&self) -> Vec<i64> {
        match &self.kind {
            CompiledDomainKind::Bool => vec![0, 1],
            CompiledDomainKind::Enum(cs) => (0..cs.len() as i64).collect(),
            CompiledDomainKind::IntRange(lo, hi) => (*lo..=*hi).collect(),
        }
    }

    pub fn contains_raw(&self, raw: i64) -> bool {
        match &self.kind {
            CompiledDomainKind::Bool => raw == 0 || raw == 1,
            CompiledDomainKind::Enum(cs) => raw >= 0 && (raw as usize) < cs.len(),
            CompiledDomainKind::IntRange(lo, hi) => raw >= *lo && raw <= *hi,
        }
    }

    /// Human-readable rendering of a raw slot value.
    pub fn render_raw(&self, raw: i64) -> String {
        match &self.kind {
            CompiledDomainKind::Bool => {
                if raw == 0 {
                    "False".into()
                } else {
                    "True".into()
                }
            }
            CompiledDomainKind::Enum(cs) => cs
                .get(raw as usize)
                .cloned()
                .unwrap_or_else(|| format!("<{raw}>")),
            CompiledDomainKind::IntRange(_, _) => raw.to_string(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CompiledVar {
    pub name: String,
    pub domain: DomainId,
}

/// A runtime value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Value {
    Bool(bool),
    /// Integer with its nominal range, or `None` for a bare literal.
    Int(i64, Option<DomainId>),
    /// Enum constant as (domain, declaration index).
    Enum(DomainId, i64),
}

impl Value {
    pub fn as_bool(&self) -> bool {
        match self {
            Value::Bool(b) => *b,
            _ => panic!("expected boolean value, got {self:?}"),
        }
    }

    /// The raw i64 stored in a state slot for this value.
    pub fn raw(&self) -> i64 {
        match self {
            Value::Bool(b) => *b as i64,
            Value::Int(v, _) => *v,
            Value::Enum(_, i) => *i,
        }
    }
}

/// Expression with all names resolved; defines no longer occur.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum CompiledExpr {
    Bool(bool),
    Int(i64),
    EnumConst(DomainId, i64),
    Var(VarId),
    Primed(VarId),
    ActionIs(AgentId, ActionId),
    Cmp(CmpOp, Box<CompiledExpr>, Box<CompiledExpr>),
    /// Arithmetic clamped to the given range domain (None for pure-literal
    /// arithmetic, which is never clamped).
    Arith(
        ArithOp,
        Box<CompiledExpr>,
        Box<CompiledExpr>,
        Option<DomainId>,
    ),
    Not(Box<CompiledExpr>),
    And(Box<CompiledExpr>, Box<CompiledExpr>),
    Or(Box<CompiledExpr>, Box<CompiledExpr>),
    Implies(Box<CompiledExpr>, Box<CompiledExpr>),
}

impl CompiledExpr {
    /// Set of state variables read (plain references only).
    pub fn collect_vars(&self, out: &mut Vec<VarId>) {
        match self {
            CompiledExpr::Var(v) => out.push(*v),
            CompiledExpr::Primed(_)
            | CompiledExpr::Bool(_)
            | CompiledExpr::Int(_)
            | CompiledExpr::EnumConst(_, _)
            | CompiledExpr::ActionIs(_, _) => {}
            CompiledExpr::Not(x) => x.collect_vars(out),
            CompiledExpr::Cmp(_, a, b)
            | CompiledExpr::Arith(_, a, b, _)
            | CompiledExpr::And(a, b)
            | CompiledExpr::Or(a, b)
            | CompiledExpr::Implies(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    /// Split a conjunction into its top-level conjuncts.
    pub fn conjuncts(&self) -> Vec<&CompiledExpr> {
        match self {
            CompiledExpr::And(a, b) => {
                let mut v = a.conjuncts();
                v.extend(b.conjuncts());
                v
            }
            _ => vec![self],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CompiledStmt {
    Assign(VarId, CompiledExpr),
    Seq(Vec<CompiledStmt>),
    Guarded {
        branches: Vec<(CompiledExpr, CompiledStmt)>,
        otherwise: Option<Box<CompiledStmt>>,
    },
    Nondet {
        vars: Vec<VarId>,
        cond: CompiledExpr,
    },
    Skip,
}

#[derive(Debug, Clone)]
pub struct CompiledAgent {
    pub name: String,
    /// Action names; index is the agent-local [`ActionId`].
    pub actions: Vec<String>,
    /// Protocol branches with formals substituted by the bound variables.
    pub branches: Vec<(CompiledExpr, ActionId)>,
    pub otherwise: Option<ActionId>,
    /// Chosen when no branch guard holds and there is no otherwise branch;
    /// a synthesized skip-equivalent never referenced by the transition
    /// block.
    pub fallback: ActionId,
}

#[derive(Debug, Clone)]
pub struct CompiledSpec {
    pub label: String,
    /// Body of the `A`-quantified formula over atom-table indices.
    pub body: LtlNode<AtomId>,
    pub source: ast::SpecFormula,
}

/// A validated, fully resolved model ready for state-space exploration.
#[derive(Debug, Clone)]
pub struct CompiledModel {
    pub domains: Vec<CompiledDomain>,
    pub vars: Vec<CompiledVar>,
    pub init: CompiledExpr,
    pub agents: Vec<CompiledAgent>,
    pub transitions: CompiledStmt,
    pub fairness: Vec<CompiledExpr>,
    pub specs: Vec<CompiledSpec>,
    /// Shared table of specification atoms (boolean state expressions).
    pub atoms: Vec<CompiledExpr>,
    pub warnings: Vec<Diagnostic>,
}

impl CompiledModel {
    pub fn var_id(&self, name: &str) -> Option<VarId> {
        self.vars.iter().position(|v| v.name == name)
    }

    pub fn domain_of(&self, v: VarId) -> &CompiledDomain {
        &self.domains[self.vars[v].domain]
    }

    pub fn agent_id(&self, name: &str) -> Option<AgentId> {
        self.agents.iter().position(|a| a.name == name)
    }

    /// Find a specification by verbatim label, or by label equality after
    /// whitespace normalization (labels may contain newlines).
    pub fn spec_by_label(&self, label: &str) -> Option<usize> {
        if let Some(i) = self.specs.iter().position(|s| s.label == label) {
            return Some(i);
        }
        let norm = normalize_ws(label);
        self.specs
            .iter()
            .position(|s| normalize_ws(&s.label) == norm)
    }
}

/// Collapse whitespace runs to single spaces and trim.
pub fn normalize_ws(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Expand define references in an expression by capture-free substitution.
///
/// Defines may reference previously declared defines; cycles are reported by
/// validation, and a cyclic reference is left unexpanded here to keep the
/// function total.
pub fn expand_defines(e: &ast::Expr, m: &ModelIr) -> ast::Expr {
    let mut in_progress = Vec::new();
    expand_rec(e, m, &mut in_progress)
}

fn expand_rec(e: &ast::Expr, m: &ModelIr, in_progress: &mut Vec<String>) -> ast::Expr {
    let kind = match &e.kind {
        ExprKind::Ident(name) => {
            if let Some(d) = m.define(name) {
                if in_progress.iter().any(|n| n == name) {
                    // Cycle; validation rejects this model.
                    ExprKind::Ident(name.clone())
                } else {
                    in_progress.push(name.clone());
                    let expanded = expand_rec(&d.body, m, in_progress);
                    in_progress.pop();
                    return expanded;
                }
            } else {
                ExprKind::Ident(name.clone())
            }
        }
        ExprKind::True => ExprKind::True,
        ExprKind::False => ExprKind::False,
        ExprKind::Int(n) => ExprKind::Int(*n),
        ExprKind::Primed(n) => ExprKind::Primed(n.clone()),
        ExprKind::ActionProp(a, b) => ExprKind::ActionProp(a.clone(), b.clone()),
        ExprKind::Cmp(op, a, b) => ExprKind::Cmp(
            *op,
            Box::new(expand_rec(a, m, in_progress)),
            Box::new(expand_rec(b, m, in_progress)),
        ),
        ExprKind::Arith(op, a, b) => ExprKind::Arith(
            *op,
            Box::new(expand_rec(a, m, in_progress)),
            Box::new(expand_rec(b, m, in_progress)),
        ),
        ExprKind::Not(x) => ExprKind::Not(Box::new(expand_rec(x, m, in_progress))),
        ExprKind::And(a, b) => ExprKind::And(
            Box::new(expand_rec(a, m, in_progress)),
            Box::new(expand_rec(b, m, in_progress)),
        ),
        ExprKind::Or(a, b) => ExprKind::Or(
            Box::new(expand_rec(a, m, in_progress)),
            Box::new(expand_rec(b, m, in_progress)),
        ),
        ExprKind::Implies(a, b) => ExprKind::Implies(
            Box::new(expand_rec(a, m, in_progress)),
            Box::new(expand_rec(b, m, in_progress)),
        ),
    };
    ast::Expr::new(kind, e.span)
}

/// Run all static checks and return the report; the model is not lowered.
pub fn validate_model(m: &ModelIr) -> ValidationReport {
    match Compiler::new(m).run() {
        Ok(model) => ValidationReport {
            errors: Vec::new(),
            warnings: model.warnings,
        },
        Err(report) => report,
    }
}

/// Validate and lower. A model with any error is rejected.
pub fn compile(m: &ModelIr) -> Result<CompiledModel, ValidationReport> {
    Compiler::new(m).run()
}

/// Inferred expression type.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Ty {
    Bool,
    Enum(DomainId),
    /// Integer; `None` means a bare literal that adopts a range on use.
    Int(Option<DomainId>),
}

impl Ty {
    fn describe(&self, domains: &[CompiledDomain]) -> String {
        match self {
            Ty::Bool => "Bool".into(),
            Ty::Enum(d) => domains[*d].name.clone(),
            Ty::Int(Some(d)) => domains[*d].name.clone(),
            Ty::Int(None) => "integer literal".into(),
        }
    }
}

/// Static integer interval for range-overflow warnings.
#[derive(Debug, Clone, Copy)]
struct Interval(i64, i64);

/// Where an expression appears, which controls what may be referenced.
#[derive(Clone, Copy)]
struct ExprCtx<'a> {
    /// Formal parameters in scope (protocol guards); when set, state
    /// variables and defines are out of scope.
    params: Option<&'a [(String, DomainId)]>,
    /// Action propositions allowed (transition block only).
    actions_ok: bool,
    /// Primed references allowed, naming only these variables.
    primed_vars: Option<&'a [VarId]>,
    /// What to call this context in diagnostics.
    what: &'a str,
}

struct Compiler<'a> {
    src: &'a ModelIr,
    report: ValidationReport,
    domains: Vec<CompiledDomain>,
    domain_ids: HashMap<String, DomainId>,
    /// Enum constant name -> (domain, index). Constants are globally unique.
    constants: HashMap<String, (DomainId, i64)>,
    vars: Vec<CompiledVar>,
    var_ids: HashMap<String, VarId>,
    agents: Vec<CompiledAgent>,
    agent_ids: HashMap<String, AgentId>,
    atoms: Vec<CompiledExpr>,
    atom_ids: HashMap<CompiledExpr, AtomId>,
}

impl<'a> Compiler<'a> {
    fn new(src: &'a ModelIr) -> Self {
        Compiler {
            src,
            report: ValidationReport::default(),
            domains: vec![CompiledDomain {
                name: "Bool".into(),
                kind: CompiledDomainKind::Bool,
            }],
            domain_ids: HashMap::from([("Bool".to_string(), BOOL_DOMAIN)]),
            constants: HashMap::new(),
            vars: Vec::new(),
            var_ids: HashMap::new(),
            agents: Vec::new(),
            agent_ids: HashMap::new(),
            atoms: Vec::new(),
            atom_ids: HashMap::new(),
        }
    }

    fn error(&mut self, span: SourceSpan, message: impl Into<String>) {
        self.report.errors.push(Diagnostic {
            span,
            message: message.into(),
        });
    }

    fn warn(&mut self, span: SourceSpan, message: impl Into<String>) {
        self.report.warnings.push(Diagnostic {
            span,
            message: message.into(),
        });
    }

    fn run(mut self) -> Result<CompiledModel, ValidationReport> {
        self.collect_domains();
        self.collect_vars();
        self.check_name_clashes();
        self.check_defines();
        let proto_ok = self.validate_protocols();
        let agents_src = self.src.agents.clone();
        for a in &agents_src {
            self.compile_agent(a, &proto_ok);
        }

        // init_cond
        let init = match &self.src.init_cond {
            Some(e) => {
                let ctx = ExprCtx {
                    params: None,
                    actions_ok: false,
                    primed_vars: None,
                    what: "init_cond",
                };
                self.lower_bool(e, ctx)
            }
            None => {
                self.error(SourceSpan::synthetic(), "missing init_cond declaration");
                None
            }
        };

        // transitions
        let transitions = match &self.src.transitions {
            Some(t) => self.lower_stmt(t),
            None => {
                self.error(SourceSpan::synthetic(), "missing transitions block");
                None
            }
        };

        // fairness
        let mut fairness = Vec::new();
        let fairness_src = self.src.fairness.clone();
        for f in &fairness_src {
            let ctx = ExprCtx {
                params: None,
                actions_ok: false,
                primed_vars: None,
                what: "fairness constraint",
            };
            if let Some(e) = self.lower_bool(f, ctx) {
                fairness.push(e);
            }
        }
        if fairness.len() > 32 {
            self.error(
                SourceSpan::synthetic(),
                format!("too many fairness constraints ({}, max 32)", fairness.len()),
            );
        }

        // specs
        let mut specs = Vec::new();
        let specs_src = self.src.specs.clone();
        for s in &specs_src {
            if let Some(body) = self.lower_formula(&s.formula.body) {
                specs.push(CompiledSpec {
                    label: s.label.clone(),
                    body,
                    source: s.formula.clone(),
                });
            }
        }
        if self.atoms.len() > 64 {
            self.error(
                SourceSpan::synthetic(),
                format!(
                    "too many distinct specification atoms ({}, max 64)",
                    self.atoms.len()
                ),
            );
        }

        if !self.report.errors.is_empty() {
            return Err(self.report);
        }
        Ok(CompiledModel {
            domains: self.domains,
            vars: self.vars,
            init: init.expect("validated"),
            agents: self.agents,
            transitions: transitions.expect("validated"),
            fairness,
            specs,
            atoms: self.atoms,
            warnings: self.report.warnings,
        })
    }

    fn collect_domains(&mut self) {
        for d in &self.src.domains {
            if self.domain_ids.contains_key(&d.name) {
                self.error(d.span, format!("duplicate type name `{}`", d.name));
                continue;
            }
            let kind = match &d.kind {
                DomainKind::Boolean => CompiledDomainKind::Bool,
                DomainKind::IntRange(lo, hi) => {
                    if lo > hi {
                        self.error(
                            d.span,
                            format!("empty range {{{lo}..{hi}}} in type `{}`", d.name),
                        );
                        continue;
                    }
                    if (*hi as i128 - *lo as i128) > 1_000_000 {
                        self.error(d.span, format!("range of type `{}` is too large", d.name));
                        continue;
                    }
                    CompiledDomainKind::IntRange(*lo, *hi)
                }
                DomainKind::Enum(cs) => {
                    if cs.is_empty() {
                        self.error(d.span, format!("type `{}` has no constants", d.name));
                        continue;
                    }
                    CompiledDomainKind::Enum(cs.clone())
                }
            };
            let id = self.domains.len();
            self.domain_ids.insert(d.name.clone(), id);
            if let CompiledDomainKind::Enum(cs) = &kind {
                for (i, c) in cs.iter().enumerate() {
                    if let Some((other, _)) = self.constants.get(c) {
                        let other = self.domains[*other].name.clone();
                        self.error(
                            d.span,
                            format!(
                                "constant `{c}` in type `{}` already declared in type `{other}` \
                                 (constants share one namespace)",
                                d.name
                            ),
                        );
                    } else {
                        self.constants.insert(c.clone(), (id, i as i64));
                    }
                }
            }
            self.domains.push(CompiledDomain {
                name: d.name.clone(),
                kind,
            });
        }
    }

    fn collect_vars(&mut self) {
        for v in &self.src.vars {
            let Some(&dom) = self.domain_ids.get(&v.domain) else {
                self.error(v.span, format!("unknown type `{}`", v.domain));
                continue;
            };
            if self.var_ids.contains_key(&v.name) {
                self.error(v.span, format!("duplicate variable `{}`", v.name));
                continue;
            }
            let id = self.vars.len();
            self.var_ids.insert(v.name.clone(), id);
            self.vars.push(CompiledVar {
                name: v.name.clone(),
                domain: dom,
            });
        }
    }

    /// Variables, defines, agents, and enum constants share one namespace.
    fn check_name_clashes(&mut self) {
        let mut seen: HashMap<&str, &'static str> = HashMap::new();
        for v in &self.src.vars {
            seen.insert(&v.name, "variable");
        }
        let mut clashes = Vec::new();
        for d in &self.src.defines {
            if let Some(prev) = seen.get(d.name.as_str()) {
                clashes.push((d.span, format!("`{}` is already a {prev}", d.name)));
            } else {
                seen.insert(&d.name, "define");
            }
        }
        for a in &self.src.agents {
            if let Some(prev) = seen.get(a.name.as_str()) {
                clashes.push((a.span, format!("`{}` is already a {prev}", a.name)));
            } else {
                seen.insert(&a.name, "agent");
            }
        }
        for (c, _) in self.constants.clone() {
            if seen.contains_key(c.as_str()) {
                let prev = seen[c.as_str()];
                clashes.push((
                    SourceSpan::synthetic(),
                    format!("constant `{c}` is already a {prev}"),
                ));
            }
        }
        for (span, msg) in clashes {
            self.error(span, msg);
        }
        // Duplicate defines and agents among themselves.
        let mut names = HashMap::new();
        for d in &self.src.defines {
            if names.insert(d.name.clone(), ()).is_some() {
                self.error(d.span, format!("duplicate define `{}`", d.name));
            }
        }
        let mut names = HashMap::new();
        for a in &self.src.agents {
            if names.insert(a.name.clone(), ()).is_some() {
                self.error(a.span, format!("duplicate agent `{}`", a.name));
            }
        }
    }

    /// Reject define cycles and type-check each body.
    fn check_defines(&mut self) {
        // Cycle detection by depth-first walk over define references.
        #[derive(Clone, Copy, PartialEq)]
        enum Mark {
            Visiting,
            Done,
        }
        fn refs(e: &ast::Expr, m: &ModelIr, out: &mut Vec<String>) {
            match &e.kind {
                ExprKind::Ident(n) => {
                    if m.define(n).is_some() {
                        out.push(n.clone());
                    }
                }
                ExprKind::Not(x) => refs(x, m, out),
                ExprKind::Cmp(_, a, b)
                | ExprKind::Arith(_, a, b)
                | ExprKind::And(a, b)
                | ExprKind::Or(a, b)
                | ExprKind::Implies(a, b) => {
                    refs(a, m, out);
                    refs(b, m, out);
                }
                _ => {}
            }
        }
        let mut marks: HashMap<String, Mark> = HashMap::new();
        let mut cycles = Vec::new();
        for d in &self.src.defines {
            let mut stack = vec![(d.name.clone(), false)];
            while let Some((name, children_done)) = stack.pop() {
                if children_done {
                    marks.insert(name, Mark::Done);
                    continue;
                }
                match marks.get(&name) {
                    Some(Mark::Done) => continue,
                    Some(Mark::Visiting) => {
                        cycles.push(name.clone());
                        marks.insert(name, Mark::Done);
                        continue;
                    }
                    None => {}
                }
                marks.insert(name.clone(), Mark::Visiting);
                stack.push((name.clone(), true));
                if let Some(def) = self.src.define(&name) {
                    let mut out = Vec::new();
                    refs(&def.body, self.src, &mut out);
                    for r in out {
                        if marks.get(&r) == Some(&Mark::Visiting) {
                            cycles.push(r);
                        } else if marks.get(&r) != Some(&Mark::Done) {
                            stack.push((r, false));
                        }
                    }
                }
            }
        }
        cycles.sort();
        cycles.dedup();
        for name in cycles {
            let span = self.src.define(&name).map(|d| d.span).unwrap_or_default();
            self.error(span, format!("cyclic define chain through `{name}`"));
        }

        // Type-check bodies (after expansion, so nested defines resolve).
        let defines = self.src.defines.clone();
        for d in &defines {
            let expanded = expand_defines(&d.body, self.src);
            let ctx = ExprCtx {
                params: None,
                actions_ok: false,
                primed_vars: None,
                what: "define body",
            };
            self.lower_expr(&expanded, ctx);
        }
    }

    /// Check every protocol abstractly against its formal scope, whether or
    /// not an agent uses it. Returns which protocols are usable.
    fn validate_protocols(&mut self) -> HashMap<String, bool> {
        let mut ok = HashMap::new();
        let protocols = self.src.protocols.clone();
        let mut names: HashMap<&str, ()> = HashMap::new();
        for p in &protocols {
            if names.insert(&p.name, ()).is_some() {
                self.error(p.span, format!("duplicate protocol {:?}", p.name));
            }
        }
        for p in &protocols {
            let before = self.report.errors.len();
            let mut params: Vec<(String, DomainId)> = Vec::new();
            for (pname, ptype) in &p.params {
                let Some(&dom) = self.domain_ids.get(ptype) else {
                    self.error(
                        p.span,
                        format!("unknown type `{ptype}` for parameter `{pname}`"),
                    );
                    continue;
                };
                if params.iter().any(|(n, _)| n == pname) {
                    self.error(
                        p.span,
                        format!("duplicate parameter `{pname}` in protocol {:?}", p.name),
                    );
                }
                params.push((pname.clone(), dom));
            }
            if params.len() == p.params.len() {
                for b in &p.branches {
                    let ctx = ExprCtx {
                        params: Some(&params),
                        actions_ok: false,
                        primed_vars: None,
                        what: "protocol guard",
                    };
                    self.lower_bool(&b.guard, ctx);
                    if b.action.is_empty() {
                        self.error(p.span, "empty action name".to_string());
                    }
                }
            }
            ok.insert(p.name.clone(), self.report.errors.len() == before);
        }
        ok
    }

    fn compile_agent(&mut self, a: &ast::AgentDecl, proto_ok: &HashMap<String, bool>) {
        let Some(proto) = self.src.protocol(&a.protocol).cloned() else {
            self.error(
                a.span,
                format!("agent `{}` uses unknown protocol {:?}", a.name, a.protocol),
            );
            return;
        };
        if !proto_ok.get(&a.protocol).copied().unwrap_or(false) {
            // Protocol itself is invalid; errors already reported.
            return;
        }
        // Formal parameter table (known valid).
        let mut params: Vec<(String, DomainId)> = Vec::new();
        for (pname, ptype) in &proto.params {
            let dom = self.domain_ids[ptype];
            params.push((pname.clone(), dom));
        }
        if a.bindings.len() != params.len() {
            self.error(
                a.span,
                format!(
                    "agent `{}` binds {} variables but protocol {:?} has {} parameters",
                    a.name,
                    a.bindings.len(),
                    proto.name,
                    params.len()
                ),
            );
            return;
        }
        // Bindings: env var per formal, domains must match.
        let mut subst: HashMap<String, String> = HashMap::new();
        let mut ok = true;
        for (bound, (pname, pdom)) in a.bindings.iter().zip(&params) {
            let Some(&vid) = self.var_ids.get(bound) else {
                self.error(
                    a.span,
                    format!("agent `{}` binds unknown variable `{bound}`", a.name),
                );
                ok = false;
                continue;
            };
            if self.vars[vid].domain != *pdom {
                self.error(
                    a.span,
                    format!(
                        "agent `{}`: variable `{bound}` has type `{}` but parameter `{pname}` \
                         expects `{}`",
                        a.name, self.domains[self.vars[vid].domain].name, self.domains[*pdom].name
                    ),
                );
                ok = false;
            }
            subst.insert(pname.clone(), bound.clone());
        }
        if !ok {
            return;
        }

        // Lower guards with formals substituted by the bound variables.
        let mut actions: Vec<String> = Vec::new();
        let action_id = |actions: &mut Vec<String>, name: &str| -> ActionId {
            match actions.iter().position(|a| a == name) {
                Some(i) => i,
                None => {
                    actions.push(name.to_string());
                    actions.len() - 1
                }
            }
        };
        let mut branches = Vec::new();
        for b in &proto.branches {
            let substituted = substitute_idents(&b.guard, &subst);
            let ctx = ExprCtx {
                params: None,
                actions_ok: false,
                primed_vars: None,
                what: "protocol guard",
            };
            if let Some(g) = self.lower_bool(&substituted, ctx) {
                let id = action_id(&mut actions, &b.action);
                branches.push((g, id));
            }
        }
        let otherwise = proto
            .otherwise
            .as_ref()
            .map(|name| action_id(&mut actions, name));
        let fallback = match otherwise {
            Some(id) => id,
            None => {
                // Synthesized skip-equivalent, distinct from declared actions.
                actions.push("Skip".to_string());
                actions.len() - 1
            }
        };
        let id = self.agents.len();
        self.agent_ids.insert(a.name.clone(), id);
        self.agents.push(CompiledAgent {
            name: a.name.clone(),
            actions,
            branches,
            otherwise,
            fallback,
        });
    }

    fn lower_stmt(&mut self, s: &ast::Statement) -> Option<CompiledStmt> {
        match &s.kind {
            StatementKind::Skip => Some(CompiledStmt::Skip),
            StatementKind::Assign(name, e) => {
                let Some(&vid) = self.var_ids.get(name) else {
                    self.error(
                        s.span,
                        format!("assignment to undeclared variable `{name}`"),
                    );
                    return None;
                };
                let ctx = ExprCtx {
                    params: None,
                    actions_ok: true,
                    primed_vars: None,
                    what: "assignment",
                };
                let expanded = expand_defines(e, self.src);
                let (ce, ty) = self.lower_expr(&expanded, ctx)?;
                let vdom = self.vars[vid].domain;
                self.check_assignable(s.span, name, vdom, ty);
                Some(CompiledStmt::Assign(vid, ce))
            }
            StatementKind::Seq(ss) => {
                let mut out = Vec::new();
                for st in ss {
                    out.push(self.lower_stmt(st)?);
                }
                Some(CompiledStmt::Seq(out))
            }
            StatementKind::Guarded {
                branches,
                otherwise,
            } => {
                if otherwise.is_none() {
                    self.warn(
                        s.span,
                        "guarded choice without otherwise-branch behaves as skip when no guard \
                         holds",
                    );
                }
                let mut out = Vec::new();
                for (g, body) in branches {
                    let ctx = ExprCtx {
                        params: None,
                        actions_ok: true,
                        primed_vars: None,
                        what: "guard",
                    };
                    let expanded = expand_defines(g, self.src);
                    let cg = self.lower_bool(&expanded, ctx)?;
                    let cb = self.lower_stmt(body)?;
                    out.push((cg, cb));
                }
                let co = match otherwise {
                    Some(b) => Some(Box::new(self.lower_stmt(b)?)),
                    None => None,
                };
                Some(CompiledStmt::Guarded {
                    branches: out,
                    otherwise: co,
                })
            }
            StatementKind::Nondet { vars, cond } => {
                let mut vids = Vec::new();
                for name in vars {
                    let Some(&vid) = self.var_ids.get(name) else {
                        self.error(
                            s.span,
                            format!("nondeterministic assignment to undeclared variable `{name}`"),
                        );
                        return None;
                    };
                    if vids.contains(&vid) {
                        self.error(
                            s.span,
                            format!(
                                "variable `{name}` listed twice in nondeterministic assignment"
                            ),
                        );
                    }
                    vids.push(vid);
                }
                let ctx = ExprCtx {
                    params: None,
                    actions_ok: true,
                    primed_vars: Some(&vids),
                    what: "nondeterministic assignment condition",
                };
                let expanded = expand_defines(cond, self.src);
                let cc = self.lower_bool(&expanded, ctx)?;
                Some(CompiledStmt::Nondet {
                    vars: vids,
                    cond: cc,
                })
            }
        }
    }

    fn lower_formula(&mut self, f: &LtlNode<ast::Expr>) -> Option<LtlNode<AtomId>> {
        match f {
            LtlNode::True => Some(LtlNode::True),
            LtlNode::False => Some(LtlNode::False),
            LtlNode::Atom(e) => {
                let ctx = ExprCtx {
                    params: None,
                    actions_ok: false,
                    primed_vars: None,
                    what: "specification atom",
                };
                let expanded = expand_defines(e, self.src);
                let ce = self.lower_bool(&expanded, ctx)?;
                let id = match self.atom_ids.get(&ce) {
                    Some(&id) => id,
                    None => {
                        let id = self.atoms.len() as AtomId;
                        self.atom_ids.insert(ce.clone(), id);
                        self.atoms.push(ce);
                        id
                    }
                };
                Some(LtlNode::Atom(id))
            }
            LtlNode::Not(x) => Some(LtlNode::not(self.lower_formula(x)?)),
            LtlNode::Next(x) => Some(LtlNode::next(self.lower_formula(x)?)),
            LtlNode::Always(x) => Some(LtlNode::always(self.lower_formula(x)?)),
            LtlNode::Eventually(x) => Some(LtlNode::eventually(self.lower_formula(x)?)),
            LtlNode::And(a, b) => {
                Some(LtlNode::and(self.lower_formula(a)?, self.lower_formula(b)?))
            }
            LtlNode::Or(a, b) => Some(LtlNode::or(self.lower_formula(a)?, self.lower_formula(b)?)),
            LtlNode::Implies(a, b) => Some(LtlNode::implies(
                self.lower_formula(a)?,
                self.lower_formula(b)?,
            )),
            LtlNode::Until(a, b) => Some(LtlNode::until(
                self.lower_formula(a)?,
                self.lower_formula(b)?,
            )),
            LtlNode::WeakUntil(a, b) => Some(LtlNode::weak_until(
                self.lower_formula(a)?,
                self.lower_formula(b)?,
            )),
            LtlNode::Release(a, b) => Some(LtlNode::release(
                self.lower_formula(a)?,
                self.lower_formula(b)?,
            )),
        }
    }

    fn check_assignable(&mut self, span: SourceSpan, name: &str, vdom: DomainId, ty: Ty) {
        let ok = match (&self.domains[vdom].kind, ty) {
            (CompiledDomainKind::Bool, Ty::Bool) => true,
            (CompiledDomainKind::Enum(_), Ty::Enum(d)) => d == vdom,
            (CompiledDomainKind::IntRange(_, _), Ty::Int(None)) => true,
            (CompiledDomainKind::IntRange(_, _), Ty::Int(Some(d))) => d == vdom,
            _ => false,
        };
        if !ok {
            self.error(
                span,
                format!(
                    "cannot assign {} value to `{name}` of type `{}`",
                    ty.describe(&self.domains),
                    self.domains[vdom].name
                ),
            );
        }
    }

    fn lower_bool(&mut self, e: &ast::Expr, ctx: ExprCtx<'_>) -> Option<CompiledExpr> {
        let expanded;
        let e = if ctx.params.is_none() {
            // Defines are macros; the compiled form only contains primitive
            // expressions.
            expanded = expand_defines(e, self.src);
            &expanded
        } else {
            e
        };
        let (ce, ty) = self.lower_expr(e, ctx)?;
        if ty != Ty::Bool {
            self.error(
                e.span,
                format!(
                    "{} must be boolean, found {}",
                    ctx.what,
                    ty.describe(&self.domains)
                ),
            );
            return None;
        }
        Some(ce)
    }

    fn lower_expr(&mut self, e: &ast::Expr, ctx: ExprCtx<'_>) -> Option<(CompiledExpr, Ty)> {
        match &e.kind {
            ExprKind::True => Some((CompiledExpr::Bool(true), Ty::Bool)),
            ExprKind::False => Some((CompiledExpr::Bool(false), Ty::Bool)),
            ExprKind::Int(n) => Some((CompiledExpr::Int(*n), Ty::Int(None))),
            ExprKind::Ident(name) => self.lower_ident(name, e.span, ctx),
            ExprKind::Primed(name) => {
                let Some(allowed) = ctx.primed_vars else {
                    self.error(
                        e.span,
                        format!(
                            "primed reference `{name}'` outside a nondeterministic-assignment \
                             condition"
                        ),
                    );
                    return None;
                };
                let Some(&vid) = self.var_ids.get(name) else {
                    self.error(
                        e.span,
                        format!("primed reference to unknown variable `{name}`"),
                    );
                    return None;
                };
                if !allowed.contains(&vid) {
                    self.error(
                        e.span,
                        format!(
                            "primed reference `{name}'` does not name a variable of this \
                             nondeterministic assignment"
                        ),
                    );
                    return None;
                }
                let ty = self.domain_ty(self.vars[vid].domain);
                Some((CompiledExpr::Primed(vid), ty))
            }
            ExprKind::ActionProp(agent, action) => {
                if !ctx.actions_ok {
                    self.error(
                        e.span,
                        format!(
                            "action proposition `{agent}.{action}` is only allowed in the \
                             transition block (found in {})",
                            ctx.what
                        ),
                    );
                    return None;
                }
                let Some(&aid) = self.agent_ids.get(agent) else {
                    self.error(e.span, format!("unknown agent `{agent}`"));
                    return None;
                };
                let Some(act) = self.agents[aid]
                    .actions
                    .iter()
                    .position(|a| a == action)
                    .filter(|&i| {
                        // The synthesized fallback is not referenceable.
                        self.agents[aid].otherwise.is_some() || i != self.agents[aid].fallback
                    })
                else {
                    self.error(
                        e.span,
                        format!("agent `{agent}` has no action `{action}` in its protocol"),
                    );
                    return None;
                };
                Some((CompiledExpr::ActionIs(aid, act), Ty::Bool))
            }
            ExprKind::Not(x) => {
                let (cx, ty) = self.lower_expr(x, ctx)?;
                if ty != Ty::Bool {
                    self.error(
                        x.span,
                        format!(
                            "`neg` needs a boolean, found {}",
                            ty.describe(&self.domains)
                        ),
                    );
                    return None;
                }
                Some((CompiledExpr::Not(Box::new(cx)), Ty::Bool))
            }
            ExprKind::And(a, b) | ExprKind::Or(a, b) | ExprKind::Implies(a, b) => {
                let (ca, ta) = self.lower_expr(a, ctx)?;
                let (cb, tb) = self.lower_expr(b, ctx)?;
                for (t, sub) in [(ta, a), (tb, b)] {
                    if t != Ty::Bool {
                        self.error(
                            sub.span,
                            format!(
                                "boolean connective applied to {}",
                                t.describe(&self.domains)
                            ),
                        );
                        return None;
                    }
                }
                let node = match &e.kind {
                    ExprKind::And(_, _) => CompiledExpr::And(Box::new(ca), Box::new(cb)),
                    ExprKind::Or(_, _) => CompiledExpr::Or(Box::new(ca), Box::new(cb)),
                    _ => CompiledExpr::Implies(Box::new(ca), Box::new(cb)),
                };
                Some((node, Ty::Bool))
            }
            ExprKind::Cmp(op, a, b) => {
                let (ca, ta) = self.lower_expr(a, ctx)?;
                let (cb, tb) = self.lower_expr(b, ctx)?;
                let unified = self.unify(e.span, ta, tb)?;
                if matches!(op, CmpOp::Lt | CmpOp::Le | CmpOp::Gt | CmpOp::Ge)
                    && !matches!(unified, Ty::Int(_))
                {
                    self.error(
                        e.span,
                        format!(
                            "order comparison needs integer operands, found {}",
                            unified.describe(&self.domains)
                        ),
                    );
                    return None;
                }
                Some((CompiledExpr::Cmp(*op, Box::new(ca), Box::new(cb)), Ty::Bool))
            }
            ExprKind::Arith(op, a, b) => {
                let (ca, ta) = self.lower_expr(a, ctx)?;
                let (cb, tb) = self.lower_expr(b, ctx)?;
                for (t, sub) in [(ta, a), (tb, b)] {
                    if !matches!(t, Ty::Int(_)) {
                        self.error(
                            sub.span,
                            format!(
                                "arithmetic needs integer operands, found {}",
                                t.describe(&self.domains)
                            ),
                        );
                        return None;
                    }
                }
                let unified = self.unify(e.span, ta, tb)?;
                let dom = match unified {
                    Ty::Int(d) => d,
                    _ => unreachable!(),
                };
                if let Some(d) = dom {
                    self.check_arith_range(e.span, *op, &ca, &cb, d);
                }
                Some((
                    CompiledExpr::Arith(*op, Box::new(ca), Box::new(cb), dom),
                    Ty::Int(dom),
                ))
            }
        }
    }

    fn lower_ident(
        &mut self,
        name: &str,
        span: SourceSpan,
        ctx: ExprCtx<'_>,
    ) -> Option<(CompiledExpr, Ty)> {
        if let Some(params) = ctx.params {
            // Protocol scope: formals and constants only.
            if params.iter().any(|(n, _)| n == name) {
                let dom = params.iter().find(|(n, _)| n == name).unwrap().1;
                // Placeholder; the caller substitutes formals before the
                // real lowering, so this path is only used for abstract
                // validation of the protocol itself.
                return Some((CompiledExpr::Var(usize::MAX), self.domain_ty(dom)));
            }
            if let Some(&(d, i)) = self.constants.get(name) {
                return Some((CompiledExpr::EnumConst(d, i), Ty::Enum(d)));
            }
            self.error(
                span,
                format!(
                    "protocol guards may reference only formal parameters and constants; \
                     `{name}` is neither"
                ),
            );
            return None;
        }
        if let Some(&vid) = self.var_ids.get(name) {
            let ty = self.domain_ty(self.vars[vid].domain);
            return Some((CompiledExpr::Var(vid), ty));
        }
        if let Some(&(d, i)) = self.constants.get(name) {
            return Some((CompiledExpr::EnumConst(d, i), Ty::Enum(d)));
        }
        if self.src.define(name).is_some() {
            // Defines are expanded before lowering; hitting one here means
            // the reference is cyclic (reported by check_defines).
            return None;
        }
        if self.agent_ids.contains_key(name) {
            self.error(span, format!("agent `{name}` used as a value"));
            return None;
        }
        self.error(span, format!("unresolved identifier `{name}`"));
        None
    }

    fn domain_ty(&self, d: DomainId) -> Ty {
        match self.domains[d].kind {
            CompiledDomainKind::Bool => Ty::Bool,
            CompiledDomainKind::Enum(_) => Ty::Enum(d),
            CompiledDomainKind::IntRange(_, _) => Ty::Int(Some(d)),
        }
    }

    fn unify(&mut self, span: SourceSpan, a: Ty, b: Ty) -> Option<Ty> {
        match (a, b) {
            (Ty::Bool, Ty::Bool) => Some(Ty::Bool),
            (Ty::Enum(x), Ty::Enum(y)) if x == y => Some(Ty::Enum(x)),
            (Ty::Int(None), Ty::Int(d)) | (Ty::Int(d), Ty::Int(None)) => Some(Ty::Int(d)),
            (Ty::Int(Some(x)), Ty::Int(Some(y))) if x == y => Some(Ty::Int(Some(x))),
            _ => {
                self.error(
                    span,
                    format!(
                        "type mismatch: {} vs {}",
                        a.describe(&self.domains),
                        b.describe(&self.domains)
                    ),
                );
                None
            }
        }
    }

    /// Warn when the inferred interval of `a op b` can leave the range.
    fn check_arith_range(
        &mut self,
        span: SourceSpan,
        op: ArithOp,
        a: &CompiledExpr,
        b: &CompiledExpr,
        dom: DomainId,
    ) {
        let (lo, hi) = match self.domains[dom].kind {
            CompiledDomainKind::IntRange(lo, hi) => (lo, hi),
            _ => return,
        };
        let ia = self.static_interval(a);
        let ib = self.static_interval(b);
        let (rlo, rhi) = match op {
            ArithOp::Add => (ia.0.saturating_add(ib.0), ia.1.saturating_add(ib.1)),
            ArithOp::Sub => (ia.0.saturating_sub(ib.1), ia.1.saturating_sub(ib.0)),
        };
        if rlo < lo || rhi > hi {
            self.warn(
                span,
                format!(
                    "arithmetic may exceed range `{}` ({}..{}); results saturate at the bounds",
                    self.domains[dom].name, lo, hi
                ),
            );
        }
    }

    fn static_interval(&self, e: &CompiledExpr) -> Interval {
        match e {
            CompiledExpr::Int(n) => Interval(*n, *n),
            CompiledExpr::Var(v) | CompiledExpr::Primed(v) => {
                if *v == usize::MAX {
                    return Interval(i64::MIN, i64::MAX);
                }
                match self.domains[self.vars[*v].domain].kind {
                    CompiledDomainKind::IntRange(lo, hi) => Interval(lo, hi),
                    _ => Interval(0, 0),
                }
            }
            CompiledExpr::Arith(_, _, _, Some(d)) => match self.domains[*d].kind {
                // Post-saturation, the node's value lies within its range.
                CompiledDomainKind::IntRange(lo, hi) => Interval(lo, hi),
                _ => Interval(i64::MIN, i64::MAX),
            },
            CompiledExpr::Arith(op, a, b, None) => {
                let ia = self.static_interval(a);
                let ib = self.static_interval(b);
                match op {
                    ArithOp::Add => Interval(ia.0.saturating_add(ib.0), ia.1.saturating_add(ib.1)),
                    ArithOp::Sub => Interval(ia.0.saturating_sub(ib.1), ia.1.saturating_sub(ib.0)),
                }
            }
            _ => Interval(i64::MIN, i64::MAX),
        }
    }
}

/// Rename identifiers per the substitution map (protocol formal -> bound
/// environment variable). Only `Ident` leaves are rewritten.
fn substitute_idents(e: &ast::Expr, subst: &HashMap<String, String>) -> ast::Expr {
    let kind = match &e.kind {
        ExprKind::Ident(n) => ExprKind::Ident(subst.get(n).cloned().unwrap_or_else(|| n.clone())),
        ExprKind::True => ExprKind::True,
        ExprKind::False => ExprKind::False,
        ExprKind::Int(n) => ExprKind::Int(*n),
        ExprKind::Primed(n) => ExprKind::Primed(subst.get(n).cloned().unwrap_or_else(|| n.clone())),
        ExprKind::ActionProp(a, b) => ExprKind::ActionProp(a.clone(), b.clone()),
        ExprKind::Cmp(op, a, b) => ExprKind::Cmp(
            *op,
            Box::new(substitute_idents(a, subst)),
            Box::new(substitute_idents(b, subst)),
        ),
        ExprKind::Arith(op, a, b) => ExprKind::Arith(
            *op,
            Box::new(substitute_idents(a, subst)),
            Box::new(substitute_idents(b, subst)),
        ),
        ExprKind::Not(x) => ExprKind::Not(Box::new(substitute_idents(x, subst))),
        ExprKind::And(a, b) => ExprKind::And(
            Box::new(substitute_idents(a, subst)),
            Box::new(substitute_idents(b, subst)),
        ),
        ExprKind::Or(a, b) => ExprKind::Or(
            Box::new(substitute_idents(a, subst)),
            Box::new(substitute_idents(b, subst)),
        ),
        ExprKind::Implies(a, b) => ExprKind::Implies(
            Box::new(substitute_idents(a, subst)),
            Box::new(substitute_idents(b, subst)),
        ),
    };
    ast::Expr::new(kind, e.span)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_model;

    const ESCROW: &str = include_str!("../../../examples/escrow.swapmc");
    const HTLC: &str = include_str!("../../../examples/htlc.swapmc");

    #[test]
    fn escrow_validates_cleanly() {
        let m = parse_model(ESCROW).unwrap();
        let report = validate_model(&m);
        assert!(report.is_ok(), "unexpected errors: {report}");
        let compiled = compile(&m).unwrap();
        assert_eq!(compiled.agents.len(), 2);
        assert_eq!(compiled.specs.len(), 5);
        assert_eq!(compiled.fairness.len(), 2);
        // Alice's protocol instance: Deposit, Finalize, Cancel, Skip,
        // GiveToOther, with Skip also the otherwise action.
        let alice = &compiled.agents[0];
        assert_eq!(
            alice.actions,
            vec!["Deposit", "Finalize", "Cancel", "Skip", "GiveToOther"]
        );
        assert_eq!(alice.otherwise, Some(3));
    }

    #[test]
    fn htlc_validates_with_saturation_warning() {
        let m = parse_model(HTLC).unwrap();
        let report = validate_model(&m);
        assert!(report.is_ok(), "unexpected errors: {report}");
        // `time := time + 1` against Time = {0..20} must warn.
        assert!(
            report
                .warnings
                .iter()
                .any(|w| w.message.contains("saturate")),
            "expected a range-saturation warning, got: {report}"
        );
    }

    #[test]
    fn bool_variable_rejects_integer_assignment() {
        let src = "x : Bool\ninit_cond = x\ntransitions begin x := 3 end\n";
        let m = parse_model(src).unwrap();
        let report = validate_model(&m);
        assert_eq!(report.errors.len(), 1, "got: {report}");
        assert!(report.errors[0].message.contains("cannot assign"));
    }

    #[test]
    fn undeclared_action_proposition_is_scoping_error() {
        let src = "x : Bool\ninit_cond = x\ntransitions begin \
                   if Carol.Deposit -> x := True [] otherwise -> skip fi end\n";
        let m = parse_model(src).unwrap();
        let report = validate_model(&m);
        assert_eq!(report.errors.len(), 1, "got: {report}");
        assert!(report.errors[0].message.contains("unknown agent `Carol`"));
    }

    #[test]
    fn define_expansion_matches_manual_substitution() {
        let m = parse_model(ESCROW).unwrap();
        let swapped = crate::ast::Expr::new(
            crate::ast::ExprKind::Ident("swapped".into()),
            SourceSpan::synthetic(),
        );
        let expanded = expand_defines(&swapped, &m);
        let expected = crate::parser::parse_model(
            "holdera : Bool\ninit_cond = holdera == BobH /\\ holderb == AliceH\n\
             transitions begin skip end",
        )
        .unwrap()
        .init_cond
        .unwrap();
        assert_eq!(expanded, expected);
        // Idempotent: expanding an already-expanded expression is identity.
        assert_eq!(expand_defines(&expanded, &m), expanded);
    }

    #[test]
    fn nested_defines_expand_to_fixpoint() {
        let src = "a : Bool\nb : Bool\n\
                   define d1 = a /\\ b\n\
                   define d2 = d1 \\/ a\n\
                   init_cond = d2\ntransitions begin skip end\n";
        let m = parse_model(src).unwrap();
        assert!(validate_model(&m).is_ok());
        let d2 = crate::ast::Expr::new(
            crate::ast::ExprKind::Ident("d2".into()),
            SourceSpan::synthetic(),
        );
        // Oracle: repeated single-step substitution until fixpoint.
        let mut manual = d2.clone();
        loop {
            let next = single_step(&manual, &m);
            if next == manual {
                break;
            }
            manual = next;
        }
        assert_eq!(expand_defines(&d2, &m), manual);

        fn single_step(e: &crate::ast::Expr, m: &ModelIr) -> crate::ast::Expr {
            use crate::ast::{Expr, ExprKind};
            let kind = match &e.kind {
                ExprKind::Ident(n) => match m.define(n) {
                    Some(d) => d.body.kind.clone(),
                    None => ExprKind::Ident(n.clone()),
                },
                ExprKind::Not(x) => ExprKind::Not(Box::new(single_step(x, m))),
                ExprKind::And(a, b) => {
                    ExprKind::And(Box::new(single_step(a, m)), Box::new(single_step(b, m)))
                }
                ExprKind::Or(a, b) => {
                    ExprKind::Or(Box::new(single_step(a, m)), Box::new(single_step(b, m)))
                }
                other => other.clone(),
            };
            Expr::new(kind, e.span)
        }
    }

    #[test]
    fn cyclic_defines_rejected() {
        let src = "x : Bool\ndefine a = b\ndefine b = a\n\
                   init_cond = x\ntransitions begin skip end\n";
        let m = parse_model(src).unwrap();
        let report = validate_model(&m);
        assert!(!report.is_ok());
        assert!(report.errors.iter().any(|e| e.message.contains("cyclic")));
    }

    #[test]
    fn mutating_one_identifier_never_silently_accepted() {
        // Rename each identifier occurrence in a small valid model; the
        // mutant either still validates or produces at least one error.
        let src = "type T = {A1,B1}\nx : T\ny : Bool\n\
                   define d = x == A1\n\
                   init_cond = d /\\ neg y\n\
                   transitions begin if y -> x := B1 [] otherwise -> skip fi end\n";
        let m = parse_model(src).unwrap();
        assert!(validate_model(&m).is_ok());
        for (needle, replacement) in [
            ("x ==", "z =="),
            ("neg y", "neg z"),
            ("if y ->", "if z ->"),
            ("x := B1", "z := B1"),
            ("x := B1", "x := Z9"),
            ("define d", "define q"),
        ] {
            let mutant_src = src.replacen(needle, replacement, 1);
            assert_ne!(mutant_src, src);
            match parse_model(&mutant_src) {
                Ok(mutant) => {
                    let report = validate_model(&mutant);
                    // Either still fine or rejected with a diagnostic;
                    // never a silent panic or an empty rejection.
                    if !report.is_ok() {
                        assert!(!report.errors.is_empty());
                    }
                }
                Err(errs) => assert!(!errs.is_empty()),
            }
        }
        // A mutation introducing an unresolved name is definitely an error.
        let mutant = parse_model(&src.replacen("init_cond = d", "init_cond = nosuch", 1)).unwrap();
        assert!(!validate_model(&mutant).is_ok());
    }

    #[test]
    fn guarded_choice_without_otherwise_warns() {
        let src = "x : Bool\ninit_cond = x\n\
                   transitions begin if x -> x := False fi end\n";
        let m = parse_model(src).unwrap();
        let report = validate_model(&m);
        assert!(report.is_ok());
        assert!(report
            .warnings
            .iter()
            .any(|w| w.message.contains("otherwise")));
    }
}

#[cfg(test)]
mod scoping_tests {
    use super::*;
    use crate::parser::parse_model;

    fn errors_of(src: &str) -> Vec<String> {
        let m = parse_model(src).unwrap();
        validate_model(&m)
            .errors
            .into_iter()
            .map(|d| d.message)
            .collect()
    }

    #[test]
    fn primed_reference_outside_nondet_rejected() {
        let errs = errors_of("x : Bool\ninit_cond = x'\ntransitions begin skip end\n");
        assert!(
            errs.iter().any(|e| e.contains("primed reference")),
            "{errs:?}"
        );
    }

    #[test]
    fn primed_reference_to_unlisted_variable_rejected() {
        let errs = errors_of(
            "x : Bool\ny : Bool\ninit_cond = x\n\
             transitions begin [[ x | y' == True ]] end\n",
        );
        assert!(
            errs.iter().any(|e| e.contains("does not name a variable")),
            "{errs:?}"
        );
    }

    #[test]
    fn agent_binding_arity_and_domain_checked() {
        let base = "type S = {A1,B1}\nx : S\ny : Bool\ninit_cond = y\n\
                    transitions begin skip end\n\
                    protocol \"p\" (s : S) begin do s == A1 -> <<Go>> [] otherwise -> <<Wait>> od end\n";
        let errs = errors_of(&format!("{base}agent Ag \"p\" (x,y)\n"));
        assert!(
            errs.iter().any(|e| e.contains("binds 2 variables")),
            "{errs:?}"
        );
        let errs = errors_of(&format!("{base}agent Ag \"p\" (y)\n"));
        assert!(errs.iter().any(|e| e.contains("expects `S`")), "{errs:?}");
        let ok = parse_model(&format!("{base}agent Ag \"p\" (x)\n")).unwrap();
        assert!(validate_model(&ok).is_ok());
    }

    #[test]
    fn action_proposition_outside_transitions_rejected() {
        let src = "x : Bool\ninit_cond = x\n\
                   transitions begin skip end\n\
                   fairness = Ag.Go\n\
                   protocol \"p\" (s : Bool) begin do s -> <<Go>> [] otherwise -> <<Wait>> od end\n\
                   agent Ag \"p\" (x)\n";
        let errs = errors_of(src);
        assert!(
            errs.iter()
                .any(|e| e.contains("only allowed in the transition block")),
            "{errs:?}"
        );
    }

    #[test]
    fn protocol_guard_must_not_read_environment() {
        let src = "x : Bool\ny : Bool\ninit_cond = x\n\
                   transitions begin skip end\n\
                   protocol \"p\" (s : Bool) begin do y -> <<Go>> [] otherwise -> <<Wait>> od end\n\
                   agent Ag \"p\" (x)\n";
        let errs = errors_of(src);
        assert!(
            errs.iter()
                .any(|e| e.contains("only formal parameters and constants")),
            "{errs:?}"
        );
    }

    #[test]
    fn spec_atoms_reject_action_propositions() {
        let src = "x : Bool\ninit_cond = x\n\
                   transitions begin skip end\n\
                   protocol \"p\" (s : Bool) begin do s -> <<Go>> [] otherwise -> <<Wait>> od end\n\
                   agent Ag \"p\" (x)\n\
                   spec_obs = \"bad\" A(G Ag.Go)\n";
        let errs = errors_of(src);
        assert!(!errs.is_empty());
    }

    #[test]
    fn comparisons_across_domains_rejected() {
        let errs = errors_of(
            "type S = {A1,B1}\ntype T = {C1,D1}\nx : S\ny : T\n\
             init_cond = x == y\ntransitions begin skip end\n",
        );
        assert!(errs.iter().any(|e| e.contains("type mismatch")), "{errs:?}");
        // Order comparison on enums is rejected too.
        let errs =
            errors_of("type S = {A1,B1}\nx : S\ninit_cond = x < B1\ntransitions begin skip end\n");
        assert!(
            errs.iter().any(|e| e.contains("order comparison")),
            "{errs:?}"
        );
    }

    #[test]
    fn mixed_range_arithmetic_rejected() {
        let errs = errors_of(
            "type T1 = {0..5}\ntype T2 = {0..9}\na : T1\nb : T2\n\
             init_cond = a + b == 3\ntransitions begin skip end\n",
        );
        assert!(errs.iter().any(|e| e.contains("type mismatch")), "{errs:?}");
    }

    #[test]
    fn global_constant_namespace_enforced() {
        let errs = errors_of(
            "type S = {A1,B1}\ntype T = {B1,C1}\nx : S\n\
             init_cond = x == A1\ntransitions begin skip end\n",
        );
        assert!(
            errs.iter()
                .any(|e| e.contains("constants share one namespace")),
            "{errs:?}"
        );
    }
}
