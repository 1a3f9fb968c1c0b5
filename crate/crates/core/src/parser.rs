//! Recursive-descent parser for `.swapmc` model files and specification
//! formulas.
//!
//! Operator precedence, tightest first: arithmetic, comparisons, `neg`,
//! unary temporal `G`/`F`/`X`, binary temporal `U`/`W` (right-associative),
//! `/\`, `\/`, `=>` (right-associative). In formula position the names `A`,
//! `G`, `F`, `X`, `U` and `W` are reserved for the quantifier and temporal
//! operators.
//!
//! Protocol bodies accept a nested `if ... fi` action choice inside a
//! `do` branch (the guarded groups both bundled scripts use); these are
//! flattened into plain `guard -> <<Action>>` branches by conjoining guards,
//! so the in-memory protocol is always a flat branch list.

use crate::ast::*;
use crate::lexer::{tokenize, LexError, Tok, Token};
use crate::ltl::LtlNode;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub span: SourceSpan,
    pub message: String,
    pub expected: Vec<String>,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.span, self.message)?;
        if !self.expected.is_empty() {
            write!(f, " (expected {})", self.expected.join(", "))?;
        }
        Ok(())
    }
}

impl From<LexError> for ParseError {
    fn from(e: LexError) -> Self {
        ParseError {
            span: e.span,
            message: e.message,
            expected: Vec::new(),
        }
    }
}

/// Parse a complete model file.
pub fn parse_model(text: &str) -> Result<ModelIr, Vec<ParseError>> {
    let tokens = tokenize(text).map_err(|e| vec![e.into()])?;
    let mut p = Parser {
        tokens,
        pos: 0,
        errors: Vec::new(),
    };
    let model = p.model();
    if p.errors.is_empty() {
        Ok(model)
    } else {
        Err(p.errors)
    }
}

/// Parse a standalone `A`-quantified specification formula.
pub fn parse_formula(text: &str) -> Result<SpecFormula, ParseError> {
    let tokens = tokenize(text).map_err(ParseError::from)?;
    let mut p = Parser {
        tokens,
        pos: 0,
        errors: Vec::new(),
    };
    let f = p.spec_formula()?;
    p.expect(Tok::Eof)?;
    Ok(f)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    errors: Vec<ParseError>,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos.min(self.tokens.len() - 1)].tok
    }

    fn peek_span(&self) -> SourceSpan {
        self.tokens[self.pos.min(self.tokens.len() - 1)].span
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos.min(self.tokens.len() - 1)].clone();
        if self.pos < self.tokens.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: Tok) -> PResult<Token> {
        if self.peek() == &t {
            Ok(self.bump())
        } else {
            Err(self.err_expected(&[t.to_string()]))
        }
    }

    fn err_expected(&self, expected: &[String]) -> ParseError {
        ParseError {
            span: self.peek_span(),
            message: format!("unexpected {}", self.peek()),
            expected: expected.to_vec(),
        }
    }

    fn ident(&mut self) -> PResult<(String, SourceSpan)> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                let sp = self.peek_span();
                self.bump();
                Ok((s, sp))
            }
            _ => Err(self.err_expected(&["identifier".into()])),
        }
    }

    fn string(&mut self) -> PResult<(String, SourceSpan)> {
        match self.peek().clone() {
            Tok::Str(s) => {
                let sp = self.peek_span();
                self.bump();
                Ok((s, sp))
            }
            _ => Err(self.err_expected(&["string literal".into()])),
        }
    }

    // ---- model items -------------------------------------------------

    fn model(&mut self) -> ModelIr {
        let mut m = ModelIr::default();
        if matches!(self.peek(), Tok::Eof) {
            self.errors.push(ParseError {
                span: self.peek_span(),
                message: "empty input: expected declaration".into(),
                expected: vec!["declaration".into()],
            });
            return m;
        }
        while !matches!(self.peek(), Tok::Eof) {
            match self.item(&mut m) {
                Ok(()) => {}
                Err(e) => {
                    self.errors.push(e);
                    self.sync_to_item();
                }
            }
        }
        m
    }

    /// Skip tokens until something that can plausibly start an item.
    fn sync_to_item(&mut self) {
        loop {
            match self.peek() {
                Tok::Eof
                | Tok::Type
                | Tok::Define
                | Tok::InitCond
                | Tok::Agent
                | Tok::Transitions
                | Tok::Fairness
                | Tok::SpecObs
                | Tok::Protocol => return,
                _ => {
                    self.bump();
                }
            }
        }
    }

    fn item(&mut self, m: &mut ModelIr) -> PResult<()> {
        match self.peek().clone() {
            Tok::Type => {
                let d = self.type_decl()?;
                m.domains.push(d);
            }
            Tok::Define => {
                self.bump();
                let (name, span) = self.ident()?;
                self.expect(Tok::Eq)?;
                let body = self.expr()?;
                m.defines.push(DefineDecl { name, body, span });
            }
            Tok::InitCond => {
                let span = self.peek_span();
                self.bump();
                self.expect(Tok::Eq)?;
                let e = self.expr()?;
                if m.init_cond.is_some() {
                    return Err(ParseError {
                        span,
                        message: "duplicate init_cond".into(),
                        expected: Vec::new(),
                    });
                }
                m.init_cond = Some(e);
            }
            Tok::Agent => {
                self.bump();
                let (name, span) = self.ident()?;
                let (protocol, _) = self.string()?;
                self.expect(Tok::LParen)?;
                let mut bindings = vec![self.ident()?.0];
                while self.eat(&Tok::Comma) {
                    bindings.push(self.ident()?.0);
                }
                self.expect(Tok::RParen)?;
                m.agents.push(AgentDecl {
                    name,
                    protocol,
                    bindings,
                    span,
                });
            }
            Tok::Transitions => {
                let span = self.peek_span();
                self.bump();
                let body = self.statement()?;
                if m.transitions.is_some() {
                    return Err(ParseError {
                        span,
                        message: "duplicate transitions block".into(),
                        expected: Vec::new(),
                    });
                }
                m.transitions = Some(body);
            }
            Tok::Fairness => {
                self.bump();
                self.expect(Tok::Eq)?;
                m.fairness.push(self.expr()?);
            }
            Tok::SpecObs => {
                let span = self.peek_span();
                self.bump();
                self.expect(Tok::Eq)?;
                let (label, _) = self.string()?;
                let formula = self.spec_formula()?;
                m.specs.push(SpecDecl {
                    label,
                    formula,
                    span,
                });
            }
            Tok::Protocol => {
                let d = self.protocol_decl()?;
                m.protocols.push(d);
            }
            Tok::Ident(_) => {
                // variable declaration: ID : typeref
                let (name, span) = self.ident()?;
                self.expect(Tok::Colon)?;
                let (domain, _) = self.type_ref()?;
                m.vars.push(VarDecl { name, domain, span });
            }
            _ => {
                return Err(self.err_expected(&["declaration".into()]));
            }
        }
        Ok(())
    }

    fn type_ref(&mut self) -> PResult<(String, SourceSpan)> {
        // `Bool` is an ordinary identifier token; builtinness is resolved
        // during validation.
        self.ident()
    }

    fn type_decl(&mut self) -> PResult<DomainDecl> {
        self.expect(Tok::Type)?;
        let (name, span) = self.ident()?;
        self.expect(Tok::Eq)?;
        self.expect(Tok::LBrace)?;
        let kind = match self.peek().clone() {
            Tok::Int(_) | Tok::Minus => {
                let lo = self.signed_int()?;
                self.expect(Tok::DotDot)?;
                let hi = self.signed_int()?;
                DomainKind::IntRange(lo, hi)
            }
            Tok::Ident(_) => {
                let mut consts = vec![self.ident()?.0];
                while self.eat(&Tok::Comma) {
                    consts.push(self.ident()?.0);
                }
                DomainKind::Enum(consts)
            }
            _ => return Err(self.err_expected(&["constant list".into(), "integer range".into()])),
        };
        self.expect(Tok::RBrace)?;
        Ok(DomainDecl { name, kind, span })
    }

    fn signed_int(&mut self) -> PResult<i64> {
        let negative = self.eat(&Tok::Minus);
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(if negative { -n } else { n })
            }
            _ => Err(self.err_expected(&["integer".into()])),
        }
    }

    // ---- statements ---------------------------------------------------

    fn statement(&mut self) -> PResult<Statement> {
        let span = self.peek_span();
        match self.peek().clone() {
            Tok::Skip => {
                self.bump();
                Ok(Statement::new(StatementKind::Skip, span))
            }
            Tok::Begin => {
                self.bump();
                let mut stmts = vec![self.statement()?];
                while self.eat(&Tok::Semi) {
                    stmts.push(self.statement()?);
                }
                self.expect(Tok::End)?;
                Ok(Statement::new(StatementKind::Seq(stmts), span))
            }
            Tok::If => {
                self.bump();
                let mut branches = Vec::new();
                let mut otherwise: Option<Box<Statement>> = None;
                loop {
                    if self.eat(&Tok::Otherwise) {
                        self.expect(Tok::Arrow)?;
                        let body = self.statement()?;
                        if otherwise.is_some() {
                            return Err(ParseError {
                                span,
                                message: "duplicate otherwise branch".into(),
                                expected: Vec::new(),
                            });
                        }
                        otherwise = Some(Box::new(body));
                    } else {
                        let guard = self.expr()?;
                        self.expect(Tok::Arrow)?;
                        let body = self.statement()?;
                        branches.push((guard, body));
                    }
                    if !self.eat(&Tok::Box) {
                        break;
                    }
                }
                self.expect(Tok::Fi)?;
                Ok(Statement::new(
                    StatementKind::Guarded {
                        branches,
                        otherwise,
                    },
                    span,
                ))
            }
            Tok::LBrackBrack => {
                self.bump();
                let mut vars = vec![self.ident()?.0];
                while self.eat(&Tok::Comma) {
                    vars.push(self.ident()?.0);
                }
                self.expect(Tok::Bar)?;
                let cond = self.expr()?;
                self.expect(Tok::RBrackBrack)?;
                Ok(Statement::new(StatementKind::Nondet { vars, cond }, span))
            }
            Tok::Ident(_) => {
                let (name, _) = self.ident()?;
                self.expect(Tok::Assign)?;
                let e = self.expr()?;
                Ok(Statement::new(StatementKind::Assign(name, e), span))
            }
            _ => Err(self.err_expected(&["statement".into()])),
        }
    }

    // ---- protocols ----------------------------------------------------

    fn protocol_decl(&mut self) -> PResult<ProtocolDecl> {
        let span = self.peek_span();
        self.expect(Tok::Protocol)?;
        let (name, _) = self.string()?;
        self.expect(Tok::LParen)?;
        let mut params = Vec::new();
        loop {
            let (pname, _) = self.ident()?;
            self.expect(Tok::Colon)?;
            let (ty, _) = self.type_ref()?;
            params.push((pname, ty));
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        self.expect(Tok::RParen)?;
        self.expect(Tok::Begin)?;
        self.expect(Tok::Do)?;

        let mut branches = Vec::new();
        let mut otherwise = None;
        loop {
            if self.eat(&Tok::Otherwise) {
                self.expect(Tok::Arrow)?;
                let action = self.action_name()?;
                if otherwise.is_some() {
                    return Err(ParseError {
                        span,
                        message: "duplicate otherwise branch in protocol".into(),
                        expected: Vec::new(),
                    });
                }
                otherwise = Some(action);
            } else {
                let guard = self.expr()?;
                self.expect(Tok::Arrow)?;
                let body = self.protocol_body()?;
                flatten_protocol_body(guard, &body, &mut branches);
            }
            if !self.eat(&Tok::Box) {
                break;
            }
        }
        self.expect(Tok::Od)?;
        self.expect(Tok::End)?;
        Ok(ProtocolDecl {
            name,
            params,
            branches,
            otherwise,
            span,
        })
    }

    fn action_name(&mut self) -> PResult<String> {
        self.expect(Tok::LAngleAngle)?;
        let (name, _) = self.ident()?;
        self.expect(Tok::RAngleAngle)?;
        Ok(name)
    }

    /// A branch body: either `<<Action>>` or a nested `if` action choice.
    fn protocol_body(&mut self) -> PResult<ProtoBody> {
        match self.peek() {
            Tok::LAngleAngle => Ok(ProtoBody::Action(self.action_name()?)),
            Tok::If => {
                self.bump();
                let mut branches = Vec::new();
                let mut otherwise = None;
                loop {
                    if self.eat(&Tok::Otherwise) {
                        self.expect(Tok::Arrow)?;
                        let body = self.protocol_body()?;
                        if otherwise.is_some() {
                            return Err(ParseError {
                                span: self.peek_span(),
                                message: "duplicate otherwise branch in protocol".into(),
                                expected: Vec::new(),
                            });
                        }
                        otherwise = Some(Box::new(body));
                    } else {
                        let inner = self.expr()?;
                        self.expect(Tok::Arrow)?;
                        branches.push((inner, self.protocol_body()?));
                    }
                    if !self.eat(&Tok::Box) {
                        break;
                    }
                }
                self.expect(Tok::Fi)?;
                Ok(ProtoBody::Choice {
                    branches,
                    otherwise,
                })
            }
            _ => Err(self.err_expected(&["`<<`".into(), "`if`".into()])),
        }
    }

    // ---- expressions ----------------------------------------------------

    fn expr(&mut self) -> PResult<Expr> {
        self.expr_implies()
    }

    fn expr_implies(&mut self) -> PResult<Expr> {
        let lhs = self.expr_or()?;
        if self.eat(&Tok::Implies) {
            let rhs = self.expr_implies()?;
            let span = lhs.span;
            Ok(Expr::new(
                ExprKind::Implies(Box::new(lhs), Box::new(rhs)),
                span,
            ))
        } else {
            Ok(lhs)
        }
    }

    fn expr_or(&mut self) -> PResult<Expr> {
        let mut lhs = self.expr_and()?;
        while self.eat(&Tok::OrOp) {
            let rhs = self.expr_and()?;
            let span = lhs.span;
            lhs = Expr::new(ExprKind::Or(Box::new(lhs), Box::new(rhs)), span);
        }
        Ok(lhs)
    }

    fn expr_and(&mut self) -> PResult<Expr> {
        let mut lhs = self.expr_neg()?;
        while self.eat(&Tok::AndOp) {
            let rhs = self.expr_neg()?;
            let span = lhs.span;
            lhs = Expr::new(ExprKind::And(Box::new(lhs), Box::new(rhs)), span);
        }
        Ok(lhs)
    }

    fn expr_neg(&mut self) -> PResult<Expr> {
        if self.peek() == &Tok::Neg {
            let span = self.peek_span();
            self.bump();
            let e = self.expr_neg()?;
            Ok(Expr::new(ExprKind::Not(Box::new(e)), span))
        } else {
            self.expr_cmp()
        }
    }

    fn expr_cmp(&mut self) -> PResult<Expr> {
        let lhs = self.expr_arith()?;
        let op = match self.peek() {
            Tok::EqEq => Some(CmpOp::Eq),
            Tok::Ne => Some(CmpOp::Ne),
            Tok::Lt => Some(CmpOp::Lt),
            Tok::Le => Some(CmpOp::Le),
            Tok::Gt => Some(CmpOp::Gt),
            Tok::Ge => Some(CmpOp::Ge),
            _ => None,
        };
        if let Some(op) = op {
            self.bump();
            let rhs = self.expr_arith()?;
            let span = lhs.span;
            Ok(Expr::new(
                ExprKind::Cmp(op, Box::new(lhs), Box::new(rhs)),
                span,
            ))
        } else {
            Ok(lhs)
        }
    }

    fn expr_arith(&mut self) -> PResult<Expr> {
        let mut lhs = self.expr_primary()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => ArithOp::Add,
                Tok::Minus => ArithOp::Sub,
                _ => break,
            };
            self.bump();
            let rhs = self.expr_primary()?;
            let span = lhs.span;
            lhs = Expr::new(ExprKind::Arith(op, Box::new(lhs), Box::new(rhs)), span);
        }
        Ok(lhs)
    }

    fn expr_primary(&mut self) -> PResult<Expr> {
        let span = self.peek_span();
        match self.peek().clone() {
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::True => {
                self.bump();
                Ok(Expr::new(ExprKind::True, span))
            }
            Tok::False => {
                self.bump();
                Ok(Expr::new(ExprKind::False, span))
            }
            Tok::Int(n) => {
                self.bump();
                Ok(Expr::new(ExprKind::Int(n), span))
            }
            Tok::Minus => {
                self.bump();
                match self.peek().clone() {
                    Tok::Int(n) => {
                        self.bump();
                        Ok(Expr::new(ExprKind::Int(-n), span))
                    }
                    _ => Err(self.err_expected(&["integer".into()])),
                }
            }
            Tok::Ident(name) => {
                self.bump();
                if self.eat(&Tok::Dot) {
                    let (action, _) = self.ident()?;
                    Ok(Expr::new(ExprKind::ActionProp(name, action), span))
                } else if self.eat(&Tok::Prime) {
                    Ok(Expr::new(ExprKind::Primed(name), span))
                } else {
                    Ok(Expr::new(ExprKind::Ident(name), span))
                }
            }
            _ => Err(self.err_expected(&["expression".into()])),
        }
    }

    // ---- formulas -------------------------------------------------------

    fn spec_formula(&mut self) -> PResult<SpecFormula> {
        // Top-level `A ( body )`.
        match self.peek().clone() {
            Tok::Ident(s) if s == "A" => {
                self.bump();
            }
            _ => return Err(self.err_expected(&["`A`".into()])),
        }
        self.expect(Tok::LParen)?;
        let body = self.formula()?;
        self.expect(Tok::RParen)?;
        Ok(SpecFormula { body })
    }

    fn formula(&mut self) -> PResult<LtlNode<Expr>> {
        self.formula_implies()
    }

    fn formula_implies(&mut self) -> PResult<LtlNode<Expr>> {
        let lhs = self.formula_or()?;
        if self.eat(&Tok::Implies) {
            let rhs = self.formula_implies()?;
            Ok(LtlNode::implies(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn formula_or(&mut self) -> PResult<LtlNode<Expr>> {
        let mut lhs = self.formula_and()?;
        while self.eat(&Tok::OrOp) {
            let rhs = self.formula_and()?;
            lhs = LtlNode::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn formula_and(&mut self) -> PResult<LtlNode<Expr>> {
        let mut lhs = self.formula_until()?;
        while self.eat(&Tok::AndOp) {
            let rhs = self.formula_until()?;
            lhs = LtlNode::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn formula_until(&mut self) -> PResult<LtlNode<Expr>> {
        let lhs = self.formula_unary()?;
        let op = match self.peek() {
            Tok::Ident(s) if s == "U" => Some(false),
            Tok::Ident(s) if s == "W" => Some(true),
            _ => None,
        };
        if let Some(weak) = op {
            self.bump();
            let rhs = self.formula_until()?;
            if weak {
                // Desugared at parse: a W b = (a U b) \/ G (a /\ neg b).
                Ok(LtlNode::or(
                    LtlNode::until(lhs.clone(), rhs.clone()),
                    LtlNode::always(LtlNode::and(lhs, LtlNode::not(rhs))),
                ))
            } else {
                Ok(LtlNode::until(lhs, rhs))
            }
        } else {
            Ok(lhs)
        }
    }

    fn formula_unary(&mut self) -> PResult<LtlNode<Expr>> {
        match self.peek().clone() {
            Tok::Ident(s) if s == "G" => {
                self.bump();
                Ok(LtlNode::always(self.formula_unary()?))
            }
            Tok::Ident(s) if s == "F" => {
                self.bump();
                Ok(LtlNode::eventually(self.formula_unary()?))
            }
            Tok::Ident(s) if s == "X" => {
                self.bump();
                Ok(LtlNode::next(self.formula_unary()?))
            }
            _ => self.formula_neg(),
        }
    }

    fn formula_neg(&mut self) -> PResult<LtlNode<Expr>> {
        if self.peek() == &Tok::Neg {
            // `neg` binds tighter than the temporal prefixes, so its operand
            // is again at the neg/comparison level.
            self.bump();
            let inner = self.formula_neg()?;
            Ok(LtlNode::not(inner))
        } else {
            self.formula_primary()
        }
    }

    fn formula_primary(&mut self) -> PResult<LtlNode<Expr>> {
        match self.peek().clone() {
            Tok::Ident(s) if s == "A" && self.tokens[self.pos + 1].tok == Tok::LParen => {
                Err(ParseError {
                    span: self.peek_span(),
                    message: "path quantifier only at top level".into(),
                    expected: Vec::new(),
                })
            }
            Tok::LParen => {
                self.bump();
                let inner = self.formula()?;
                self.expect(Tok::RParen)?;
                // `(e) == x` and friends: if the parenthesized group was a
                // plain state expression, it may continue as an arithmetic
                // or comparison operand.
                if let LtlNode::Atom(e) = inner {
                    let e = self.continue_expr(e)?;
                    Ok(expr_to_atom(e))
                } else {
                    Ok(inner)
                }
            }
            _ => {
                // A state-expression atom at comparison precedence.
                let e = self.expr_cmp()?;
                Ok(expr_to_atom(e))
            }
        }
    }

    /// Continue expression-level parsing after a parenthesized expression
    /// that turned out to be an arithmetic or comparison operand.
    fn continue_expr(&mut self, mut lhs: Expr) -> PResult<Expr> {
        loop {
            let op = match self.peek() {
                Tok::Plus => Some(ArithOp::Add),
                Tok::Minus => Some(ArithOp::Sub),
                _ => None,
            };
            let Some(op) = op else { break };
            self.bump();
            let rhs = self.expr_primary()?;
            let span = lhs.span;
            lhs = Expr::new(ExprKind::Arith(op, Box::new(lhs), Box::new(rhs)), span);
        }
        let op = match self.peek() {
            Tok::EqEq => Some(CmpOp::Eq),
            Tok::Ne => Some(CmpOp::Ne),
            Tok::Lt => Some(CmpOp::Lt),
            Tok::Le => Some(CmpOp::Le),
            Tok::Gt => Some(CmpOp::Gt),
            Tok::Ge => Some(CmpOp::Ge),
            _ => None,
        };
        if let Some(op) = op {
            self.bump();
            let rhs = self.expr_arith()?;
            let span = lhs.span;
            lhs = Expr::new(ExprKind::Cmp(op, Box::new(lhs), Box::new(rhs)), span);
        }
        Ok(lhs)
    }
}

/// Formula atoms that are literally `True`/`False` become the corresponding
/// formula constants, keeping one canonical representation.
fn expr_to_atom(e: Expr) -> LtlNode<Expr> {
    match e.kind {
        ExprKind::True => LtlNode::True,
        ExprKind::False => LtlNode::False,
        _ => LtlNode::Atom(e),
    }
}

/// Unflattened protocol branch body.
enum ProtoBody {
    Action(String),
    Choice {
        branches: Vec<(Expr, ProtoBody)>,
        otherwise: Option<Box<ProtoBody>>,
    },
}

/// Lower a (possibly nested) action choice into flat `guard -> action`
/// branches by conjoining guards; a nested `otherwise` becomes the negation
/// of its sibling guards.
fn flatten_protocol_body(guard: Expr, body: &ProtoBody, out: &mut Vec<ProtocolBranch>) {
    match body {
        ProtoBody::Action(a) => out.push(ProtocolBranch {
            guard,
            action: a.clone(),
        }),
        ProtoBody::Choice {
            branches,
            otherwise,
        } => {
            for (inner, b) in branches {
                flatten_protocol_body(and_expr(guard.clone(), inner.clone()), b, out);
            }
            if let Some(b) = otherwise {
                let siblings: Vec<Expr> = branches.iter().map(|(g, _)| g.clone()).collect();
                let none_held = negate_disjunction(&siblings, guard.span);
                flatten_protocol_body(and_expr(guard.clone(), none_held), b, out);
            }
        }
    }
}

fn and_expr(a: Expr, b: Expr) -> Expr {
    let span = a.span;
    Expr::new(ExprKind::And(Box::new(a), Box::new(b)), span)
}

/// `neg (g1 \/ g2 \/ ...)`, or `True` when the list is empty.
fn negate_disjunction(guards: &[Expr], span: SourceSpan) -> Expr {
    let Some(first) = guards.first() else {
        return Expr::new(ExprKind::True, span);
    };
    let mut disj = first.clone();
    for g in &guards[1..] {
        disj = Expr::new(ExprKind::Or(Box::new(disj), Box::new(g.clone())), span);
    }
    Expr::new(ExprKind::Not(Box::new(disj)), span)
}

#[cfg(test)]
mod tests {
    use super::*;

    const ESCROW: &str = include_str!("../../../examples/escrow.swapmc");
    const HTLC: &str = include_str!("../../../examples/htlc.swapmc");

    #[test]
    fn escrow_script_parses() {
        let m = parse_model(ESCROW).expect("escrow should parse");
        assert_eq!(m.agents.len(), 2);
        assert_eq!(m.protocols.len(), 1);
        assert_eq!(m.specs.len(), 5);
        assert_eq!(m.fairness.len(), 2);
        assert_eq!(m.domains.len(), 3);
        assert_eq!(m.vars.len(), 10);
        assert!(m.init_cond.is_some());
        assert!(m.transitions.is_some());
        // Labels carry the script's line breaks verbatim.
        assert!(m.specs[0].label.contains('\n'));
        assert!(m.specs[3].label.starts_with("(FALSE) Alice is always able"));
        assert!(m.specs[4].label.starts_with("(FALSE) Bob is always able"));
    }

    #[test]
    fn htlc_script_parses() {
        let m = parse_model(HTLC).expect("htlc should parse");
        assert_eq!(m.agents.len(), 2);
        assert_eq!(m.protocols.len(), 2);
        assert_eq!(m.specs.len(), 3);
        assert_eq!(m.fairness.len(), 0);
        // The protocols' nested if action choices flatten: playerA has
        // 4 cooperate branches + 6 random branches.
        let pa = m.protocol("playerA").unwrap();
        assert_eq!(pa.branches.len(), 10);
        assert!(pa.otherwise.is_some());
        let pb = m.protocol("playerB").unwrap();
        assert_eq!(pb.branches.len(), 8);
    }

    #[test]
    fn empty_input_is_an_error() {
        let errs = parse_model("").unwrap_err();
        assert!(errs[0].message.contains("expected declaration"));
    }

    #[test]
    fn formula_precedence_until_binds_tighter_than_or() {
        let f = parse_formula("A(p U q \\/ r)").unwrap();
        let p = || {
            LtlNode::Atom(Expr::new(
                ExprKind::Ident("p".into()),
                SourceSpan::synthetic(),
            ))
        };
        let q = || {
            LtlNode::Atom(Expr::new(
                ExprKind::Ident("q".into()),
                SourceSpan::synthetic(),
            ))
        };
        let r = || {
            LtlNode::Atom(Expr::new(
                ExprKind::Ident("r".into()),
                SourceSpan::synthetic(),
            ))
        };
        assert_eq!(f.body, LtlNode::or(LtlNode::until(p(), q()), r()));
    }

    #[test]
    fn formula_unary_chain() {
        let f = parse_formula("A(G F alice_safe)").unwrap();
        let safe = || {
            LtlNode::Atom(Expr::new(
                ExprKind::Ident("alice_safe".into()),
                SourceSpan::synthetic(),
            ))
        };
        assert_eq!(f.body, LtlNode::always(LtlNode::eventually(safe())));
    }

    #[test]
    fn comparison_binds_tighter_than_temporal_prefix() {
        let f = parse_formula("A(G strategyA == Cooperate)").unwrap();
        match f.body {
            LtlNode::Always(inner) => match *inner {
                LtlNode::Atom(e) => assert!(matches!(e.kind, ExprKind::Cmp(CmpOp::Eq, _, _))),
                other => panic!("expected comparison atom, got {other:?}"),
            },
            other => panic!("expected G, got {other:?}"),
        }
    }

    #[test]
    fn weak_until_desugars_at_parse() {
        let f = parse_formula("A(a W b)").unwrap();
        let a = || {
            LtlNode::Atom(Expr::new(
                ExprKind::Ident("a".into()),
                SourceSpan::synthetic(),
            ))
        };
        let b = || {
            LtlNode::Atom(Expr::new(
                ExprKind::Ident("b".into()),
                SourceSpan::synthetic(),
            ))
        };
        assert_eq!(
            f.body,
            LtlNode::or(
                LtlNode::until(a(), b()),
                LtlNode::always(LtlNode::and(a(), LtlNode::not(b())))
            )
        );
    }

    #[test]
    fn nested_path_quantifier_rejected() {
        let e = parse_formula("A(G A(p))").unwrap_err();
        assert!(e.message.contains("path quantifier only at top level"));
    }

    #[test]
    fn parse_errors_carry_spans() {
        let errs = parse_model("x : Bool\ny :").unwrap_err();
        assert_eq!(errs[0].span.line, 2);
    }
}
