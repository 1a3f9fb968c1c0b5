//! Pretty-printer: renders a model back to concrete syntax.
//!
//! The output is normalized (declaration groups in a fixed order, canonical
//! spacing, flattened protocol branches) but re-parses to an IR structurally
//! equal to the input. `Release` has no surface syntax and is printed via
//! its `neg`/`Until` encoding, so formulas containing it do not round-trip
//! exactly; the parser never produces it.

use crate::ast::*;
use crate::ltl::LtlNode;
use std::fmt::Write;

pub fn pretty_print(m: &ModelIr) -> String {
    let mut out = String::new();
    for d in &m.domains {
        match &d.kind {
            DomainKind::Enum(cs) => {
                let _ = writeln!(out, "type {} = {{{}}}", d.name, cs.join(","));
            }
            DomainKind::IntRange(lo, hi) => {
                if *lo < 0 {
                    let _ = writeln!(out, "type {} = {{ {}..{} }}", d.name, lo, hi);
                } else {
                    let _ = writeln!(out, "type {} = {{{}..{}}}", d.name, lo, hi);
                }
            }
            DomainKind::Boolean => {
                // Builtin; never declared, nothing to print.
            }
        }
    }
    if !m.domains.is_empty() {
        out.push('\n');
    }
    for v in &m.vars {
        let _ = writeln!(out, "{} : {}", v.name, v.domain);
    }
    if !m.vars.is_empty() {
        out.push('\n');
    }
    for d in &m.defines {
        let _ = writeln!(out, "define {} = {}", d.name, print_expr(&d.body));
    }
    if !m.defines.is_empty() {
        out.push('\n');
    }
    if let Some(init) = &m.init_cond {
        let _ = writeln!(out, "init_cond = {}\n", print_expr(init));
    }
    for a in &m.agents {
        let _ = writeln!(
            out,
            "agent {} {} ({})",
            a.name,
            quote(&a.protocol),
            a.bindings.join(",")
        );
    }
    if !m.agents.is_empty() {
        out.push('\n');
    }
    if let Some(t) = &m.transitions {
        out.push_str("transitions\n");
        print_stmt(&mut out, t, 0);
        out.push_str("\n\n");
    }
    for f in &m.fairness {
        let _ = writeln!(out, "fairness = {}", print_expr(f));
    }
    if !m.fairness.is_empty() {
        out.push('\n');
    }
    for s in &m.specs {
        let _ = writeln!(out, "spec_obs = {}", quote(&s.label));
        let _ = writeln!(out, "  A({})\n", print_formula(&s.formula.body, 0));
    }
    for p in &m.protocols {
        let params: Vec<String> = p.params.iter().map(|(n, t)| format!("{n} : {t}")).collect();
        let _ = writeln!(out, "protocol {} ({})", quote(&p.name), params.join(", "));
        out.push_str("begin\ndo\n");
        let mut first = true;
        for b in &p.branches {
            let lead = if first { "   " } else { "[] " };
            first = false;
            let _ = writeln!(out, "{lead}{} -> <<{}>>", print_expr(&b.guard), b.action);
        }
        if let Some(a) = &p.otherwise {
            let lead = if first { "   " } else { "[] " };
            let _ = writeln!(out, "{lead}otherwise -> <<{a}>>");
        }
        out.push_str("od\nend\n\n");
    }
    out
}

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            _ => out.push(c),
        }
    }
    out.push('"');
    out
}

fn indent(out: &mut String, level: usize) {
    for _ in 0..level {
        out.push_str("  ");
    }
}

fn print_stmt(out: &mut String, s: &Statement, level: usize) {
    match &s.kind {
        StatementKind::Skip => {
            indent(out, level);
            out.push_str("skip");
        }
        StatementKind::Assign(v, e) => {
            indent(out, level);
            let _ = write!(out, "{v} := {}", print_expr(e));
        }
        StatementKind::Seq(stmts) => {
            indent(out, level);
            out.push_str("begin\n");
            for (i, st) in stmts.iter().enumerate() {
                print_stmt(out, st, level + 1);
                if i + 1 < stmts.len() {
                    out.push_str(" ;");
                }
                out.push('\n');
            }
            indent(out, level);
            out.push_str("end");
        }
        StatementKind::Guarded {
            branches,
            otherwise,
        } => {
            indent(out, level);
            out.push_str("if\n");
            let mut first = true;
            for (g, body) in branches {
                indent(out, level);
                let _ = writeln!(
                    out,
                    "{} {} ->",
                    if first { "  " } else { "[]" },
                    print_expr(g)
                );
                first = false;
                print_stmt(out, body, level + 2);
                out.push('\n');
            }
            if let Some(body) = otherwise {
                indent(out, level);
                let _ = writeln!(out, "{} otherwise ->", if first { "  " } else { "[]" });
                print_stmt(out, body, level + 2);
                out.push('\n');
            }
            indent(out, level);
            out.push_str("fi");
        }
        StatementKind::Nondet { vars, cond } => {
            indent(out, level);
            let _ = write!(out, "[[ {} | {} ]]", vars.join(","), print_expr(cond));
        }
    }
}

// Expression precedence levels, loosest to tightest; `print_expr_prec`
// parenthesizes a node whenever its level is below the context minimum.
const L_IMPLIES: u8 = 1;
const L_OR: u8 = 2;
const L_AND: u8 = 3;
const L_NOT: u8 = 4;
const L_CMP: u8 = 5;
const L_ARITH: u8 = 6;
const L_PRIMARY: u8 = 7;

pub fn print_expr(e: &Expr) -> String {
    print_expr_prec(e, 0)
}

fn expr_level(e: &Expr) -> u8 {
    match &e.kind {
        ExprKind::Implies(_, _) => L_IMPLIES,
        ExprKind::Or(_, _) => L_OR,
        ExprKind::And(_, _) => L_AND,
        ExprKind::Not(_) => L_NOT,
        ExprKind::Cmp(_, _, _) => L_CMP,
        ExprKind::Arith(_, _, _) => L_ARITH,
        _ => L_PRIMARY,
    }
}

fn print_expr_prec(e: &Expr, min: u8) -> String {
    let lvl = expr_level(e);
    let body = match &e.kind {
        ExprKind::True => "True".to_string(),
        ExprKind::False => "False".to_string(),
        ExprKind::Int(n) => {
            if *n < 0 {
                format!("({n})")
            } else {
                n.to_string()
            }
        }
        ExprKind::Ident(s) => s.clone(),
        ExprKind::Primed(s) => format!("{s}'"),
        ExprKind::ActionProp(a, act) => format!("{a}.{act}"),
        ExprKind::Cmp(op, l, r) => format!(
            "{} {} {}",
            print_expr_prec(l, L_ARITH),
            op.symbol(),
            print_expr_prec(r, L_ARITH)
        ),
        ExprKind::Arith(op, l, r) => format!(
            "{} {} {}",
            print_expr_prec(l, L_ARITH),
            op.symbol(),
            print_expr_prec(r, L_PRIMARY)
        ),
        ExprKind::Not(x) => format!("neg {}", print_expr_prec(x, L_NOT)),
        ExprKind::And(l, r) => format!(
            "{} /\\ {}",
            print_expr_prec(l, L_AND),
            print_expr_prec(r, L_AND + 1)
        ),
        ExprKind::Or(l, r) => format!(
            "{} \\/ {}",
            print_expr_prec(l, L_OR),
            print_expr_prec(r, L_OR + 1)
        ),
        ExprKind::Implies(l, r) => format!(
            "{} => {}",
            print_expr_prec(l, L_IMPLIES + 1),
            print_expr_prec(r, L_IMPLIES)
        ),
    };
    if lvl < min {
        format!("({body})")
    } else {
        body
    }
}

// Formula levels: => 1, \/ 2, /\ 3, U/W 4, G/F/X 5, neg 6, atoms 7.
const F_IMPLIES: u8 = 1;
const F_OR: u8 = 2;
const F_AND: u8 = 3;
const F_UNTIL: u8 = 4;
const F_UNARY: u8 = 5;
const F_NEG: u8 = 6;
const F_ATOM: u8 = 7;

pub fn print_formula(f: &LtlNode<Expr>, min: u8) -> String {
    let (lvl, body) = match f {
        LtlNode::True => (F_ATOM, "True".to_string()),
        LtlNode::False => (F_ATOM, "False".to_string()),
        // Atoms sit at comparison precedence in the formula grammar; looser
        // expressions are parenthesized by the expression printer.
        LtlNode::Atom(e) => (F_ATOM, print_expr_prec(e, L_CMP)),
        LtlNode::Not(x) => (F_NEG, format!("neg {}", print_formula(x, F_NEG))),
        LtlNode::Next(x) => (F_UNARY, format!("X {}", print_formula(x, F_UNARY))),
        LtlNode::Always(x) => (F_UNARY, format!("G {}", print_formula(x, F_UNARY))),
        LtlNode::Eventually(x) => (F_UNARY, format!("F {}", print_formula(x, F_UNARY))),
        LtlNode::Until(a, b) => (
            F_UNTIL,
            format!(
                "{} U {}",
                print_formula(a, F_UNTIL + 1),
                print_formula(b, F_UNTIL)
            ),
        ),
        // No surface syntax of their own; print the equivalent form the
        // parser would have produced.
        LtlNode::WeakUntil(a, b) => {
            let desugared = LtlNode::or(
                LtlNode::until((**a).clone(), (**b).clone()),
                LtlNode::always(LtlNode::and((**a).clone(), LtlNode::not((**b).clone()))),
            );
            return print_formula(&desugared, min);
        }
        LtlNode::Release(a, b) => {
            let encoded = LtlNode::not(LtlNode::until(
                LtlNode::not((**a).clone()),
                LtlNode::not((**b).clone()),
            ));
            return print_formula(&encoded, min);
        }
        LtlNode::And(a, b) => (
            F_AND,
            format!(
                "{} /\\ {}",
                print_formula(a, F_AND),
                print_formula(b, F_AND + 1)
            ),
        ),
        LtlNode::Or(a, b) => (
            F_OR,
            format!(
                "{} \\/ {}",
                print_formula(a, F_OR),
                print_formula(b, F_OR + 1)
            ),
        ),
        LtlNode::Implies(a, b) => (
            F_IMPLIES,
            format!(
                "{} => {}",
                print_formula(a, F_IMPLIES + 1),
                print_formula(b, F_IMPLIES)
            ),
        ),
    };
    if lvl < min {
        format!("({body})")
    } else {
        body
    }
}
