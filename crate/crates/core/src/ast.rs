//! Syntax-level model representation.
//!
//! This is what the parser produces and the pretty-printer consumes: names
//! are unresolved strings, define references are still present, and every
//! node carries a source span for diagnostics. Spans are ignored by
//! structural equality so that parse/print round-trips compare equal.

use crate::ltl::LtlNode;
use std::fmt;

/// 1-based source position of a token or construct.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SourceSpan {
    pub line: u32,
    pub column: u32,
    pub length: u32,
}

impl SourceSpan {
    pub fn new(line: u32, column: u32, length: u32) -> Self {
        SourceSpan {
            line,
            column,
            length,
        }
    }

    /// Span for synthesized nodes with no source location.
    pub fn synthetic() -> Self {
        SourceSpan {
            line: 1,
            column: 1,
            length: 0,
        }
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

impl Default for SourceSpan {
    fn default() -> Self {
        SourceSpan::synthetic()
    }
}

/// A type declaration's shape.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DomainKind {
    /// `type T = {A,B,C}` with constants in declaration order.
    Enum(Vec<String>),
    /// `type T = {lo..hi}`.
    IntRange(i64, i64),
    /// The builtin `Bool`.
    Boolean,
}

#[derive(Debug, Clone)]
pub struct DomainDecl {
    pub name: String,
    pub kind: DomainKind,
    pub span: SourceSpan,
}

impl PartialEq for DomainDecl {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.kind == other.kind
    }
}
impl Eq for DomainDecl {}

#[derive(Debug, Clone)]
pub struct VarDecl {
    pub name: String,
    /// Type name as written; `Bool` is builtin.
    pub domain: String,
    pub span: SourceSpan,
}

impl PartialEq for VarDecl {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.domain == other.domain
    }
}
impl Eq for VarDecl {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "==",
            CmpOp::Ne => "/=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ArithOp {
    Add,
    Sub,
}

impl ArithOp {
    pub fn symbol(self) -> &'static str {
        match self {
            ArithOp::Add => "+",
            ArithOp::Sub => "-",
        }
    }
}

/// An expression over the environment state.
///
/// Identifiers are unresolved at this level: `Ident` may name a variable, a
/// define, an enum constant, or (inside a protocol) a formal parameter.
#[derive(Debug, Clone)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExprKind {
    True,
    False,
    Int(i64),
    Ident(String),
    /// `x'`: next-state reference, legal only in `[[ vars | cond ]]` conditions.
    Primed(String),
    /// `Agent.Action`: true iff the agent selected that action this step.
    ActionProp(String, String),
    Cmp(CmpOp, Box<Expr>, Box<Expr>),
    Arith(ArithOp, Box<Expr>, Box<Expr>),
    Not(Box<Expr>),
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
    Implies(Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn new(kind: ExprKind, span: SourceSpan) -> Self {
        Expr { kind, span }
    }
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}
impl Eq for Expr {}

/// One transition-block statement.
#[derive(Debug, Clone)]
pub struct Statement {
    pub kind: StatementKind,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StatementKind {
    /// `x := e`
    Assign(String, Expr),
    /// `if g -> s [] g -> s [] otherwise -> s fi`
    Guarded {
        branches: Vec<(Expr, Statement)>,
        otherwise: Option<Box<Statement>>,
    },
    /// `begin s ; s ; ... end`
    Seq(Vec<Statement>),
    /// `[[ x,y | cond ]]`: nondeterministic assignment to the listed
    /// variables constrained by a relation over plain and primed references.
    Nondet {
        vars: Vec<String>,
        cond: Expr,
    },
    Skip,
}

impl Statement {
    pub fn new(kind: StatementKind, span: SourceSpan) -> Self {
        Statement { kind, span }
    }
}

impl PartialEq for Statement {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}
impl Eq for Statement {}

/// One `guard -> <<Action>>` branch of a protocol, after any nested
/// action-choice `if` has been flattened into guard conjunctions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProtocolBranch {
    pub guard: Expr,
    pub action: String,
}

#[derive(Debug, Clone)]
pub struct ProtocolDecl {
    pub name: String,
    /// Formal parameters: (name, type name).
    pub params: Vec<(String, String)>,
    pub branches: Vec<ProtocolBranch>,
    /// Action of the `otherwise ->` branch, if present.
    pub otherwise: Option<String>,
    pub span: SourceSpan,
}

impl PartialEq for ProtocolDecl {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.params == other.params
            && self.branches == other.branches
            && self.otherwise == other.otherwise
    }
}
impl Eq for ProtocolDecl {}

#[derive(Debug, Clone)]
pub struct AgentDecl {
    pub name: String,
    pub protocol: String,
    /// Environment variables aliased positionally to the protocol's formals.
    pub bindings: Vec<String>,
    pub span: SourceSpan,
}

impl PartialEq for AgentDecl {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.protocol == other.protocol
            && self.bindings == other.bindings
    }
}
impl Eq for AgentDecl {}

#[derive(Debug, Clone)]
pub struct DefineDecl {
    pub name: String,
    pub body: Expr,
    pub span: SourceSpan,
}

impl PartialEq for DefineDecl {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.body == other.body
    }
}
impl Eq for DefineDecl {}

/// An `A`-quantified specification formula over state expressions.
///
/// Weak-until is desugared at parse time, so `body` never contains
/// [`LtlNode::WeakUntil`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpecFormula {
    pub body: LtlNode<Expr>,
}

#[derive(Debug, Clone)]
pub struct SpecDecl {
    pub label: String,
    pub formula: SpecFormula,
    pub span: SourceSpan,
}

impl PartialEq for SpecDecl {
    fn eq(&self, other: &Self) -> bool {
        self.label == other.label && self.formula == other.formula
    }
}
impl Eq for SpecDecl {}

/// A parsed model: the in-memory form of a `.swapmc` file.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ModelIr {
    pub domains: Vec<DomainDecl>,
    pub vars: Vec<VarDecl>,
    pub defines: Vec<DefineDecl>,
    pub init_cond: Option<Expr>,
    pub agents: Vec<AgentDecl>,
    pub protocols: Vec<ProtocolDecl>,
    pub transitions: Option<Statement>,
    pub fairness: Vec<Expr>,
    pub specs: Vec<SpecDecl>,
}

impl ModelIr {
    pub fn domain(&self, name: &str) -> Option<&DomainDecl> {
        self.domains.iter().find(|d| d.name == name)
    }

    pub fn define(&self, name: &str) -> Option<&DefineDecl> {
        self.defines.iter().find(|d| d.name == name)
    }

    pub fn protocol(&self, name: &str) -> Option<&ProtocolDecl> {
        self.protocols.iter().find(|p| p.name == name)
    }
}
