//! Parse/print round-trip properties and parser totality.

use swapmc_core::ast::*;
use swapmc_core::ltl::LtlNode;
use swapmc_core::sim::SplitMix64;
use swapmc_core::{parse_model, pretty_print};

const ESCROW: &str = include_str!("../../../examples/escrow.swapmc");
const HTLC: &str = include_str!("../../../examples/htlc.swapmc");
const HTLC_REVERSED: &str = include_str!("../../../examples/htlc-reversed.swapmc");

#[test]
fn bundled_scripts_round_trip() {
    for (name, src) in [
        ("escrow", ESCROW),
        ("htlc", HTLC),
        ("htlc-reversed", HTLC_REVERSED),
    ] {
        let m1 = parse_model(src).unwrap_or_else(|e| panic!("{name} must parse: {e:?}"));
        let printed = pretty_print(&m1);
        let m2 = parse_model(&printed)
            .unwrap_or_else(|e| panic!("{name} printed form must re-parse: {e:?}\n{printed}"));
        assert_eq!(m1, m2, "{name} round-trip changed the IR");
    }
}

#[test]
fn skip_only_model_round_trips() {
    let src = "x : Bool\ninit_cond = x\ntransitions begin skip end\n";
    let m1 = parse_model(src).unwrap();
    let m2 = parse_model(&pretty_print(&m1)).unwrap();
    assert_eq!(m1, m2);
}

#[test]
fn spec_labels_survive_verbatim() {
    // Labels keep their internal line breaks through parse and print.
    for src in [ESCROW, HTLC] {
        let m = parse_model(src).unwrap();
        let again = parse_model(&pretty_print(&m)).unwrap();
        for (a, b) in m.specs.iter().zip(&again.specs) {
            assert_eq!(a.label, b.label);
        }
    }
}

#[test]
fn two_hundred_random_irs_round_trip() {
    for seed in 0..200u64 {
        let mut rng = SplitMix64::new(0x5eed_0000 + seed);
        let m1 = gen_model(&mut rng);
        let printed = pretty_print(&m1);
        let m2 = parse_model(&printed).unwrap_or_else(|e| {
            panic!("seed {seed}: printed model must re-parse: {e:?}\n{printed}")
        });
        assert_eq!(m1, m2, "seed {seed}: round-trip changed the IR\n{printed}");
    }
}

#[test]
fn parser_never_panics_on_mutated_and_random_input() {
    // Random mutations of a real script plus raw random bytes; the parser
    // must return a result, never panic, on anything up to 1 MB.
    let mut rng = SplitMix64::new(0xf0220522);
    for round in 0..300 {
        let input = if round % 2 == 0 {
            mutate(ESCROW, &mut rng)
        } else {
            random_text(&mut rng)
        };
        let r = std::panic::catch_unwind(|| parse_model(&input).map(|_| ()));
        assert!(r.is_ok(), "parser panicked on round {round}: {input:?}");
    }
    // One large input near the size bound.
    let big: String = ESCROW.chars().cycle().take(1_000_000).collect();
    let r = std::panic::catch_unwind(|| parse_model(&big).map(|_| ()));
    assert!(r.is_ok(), "parser panicked on the 1 MB input");
}

fn mutate(src: &str, rng: &mut SplitMix64) -> String {
    let mut bytes = src.as_bytes().to_vec();
    for _ in 0..rng.below(8) + 1 {
        match rng.below(3) {
            0 if !bytes.is_empty() => {
                // truncate
                let at = rng.below(bytes.len());
                bytes.truncate(at);
            }
            1 if !bytes.is_empty() => {
                // flip a byte to printable ASCII
                let at = rng.below(bytes.len());
                bytes[at] = b' ' + (rng.below(95) as u8);
            }
            _ => {
                // splice a fragment somewhere else
                let frag: Vec<u8> = b"[[ x | x' /= ]] {- neg".to_vec();
                let at = rng.below(bytes.len() + 1);
                for (i, b) in frag.into_iter().enumerate() {
                    bytes.insert(at + i, b);
                }
            }
        }
    }
    String::from_utf8_lossy(&bytes).into_owned()
}

fn random_text(rng: &mut SplitMix64) -> String {
    let len = rng.below(2000);
    (0..len)
        .map(|_| {
            let c = rng.below(100) as u8;
            if c < 95 {
                (b' ' + c) as char
            } else {
                '\n'
            }
        })
        .collect()
}

// ---- random IR generator -------------------------------------------------

fn ident(prefix: &str, i: usize) -> String {
    format!("{prefix}{i}")
}

struct Gen<'a> {
    rng: &'a mut SplitMix64,
    domains: Vec<DomainDecl>,
    var_names: Vec<String>,
    const_names: Vec<String>,
    define_names: Vec<String>,
}

fn gen_model(rng: &mut SplitMix64) -> ModelIr {
    let mut g = Gen {
        rng,
        domains: Vec::new(),
        var_names: Vec::new(),
        const_names: Vec::new(),
        define_names: Vec::new(),
    };
    let mut m = ModelIr::default();

    let ndomains = g.rng.below(3);
    for i in 0..ndomains {
        let kind = if g.rng.below(2) == 0 {
            let n = 1 + g.rng.below(3);
            let consts: Vec<String> = (0..n).map(|j| ident(&format!("K{i}x"), j)).collect();
            g.const_names.extend(consts.clone());
            DomainKind::Enum(consts)
        } else {
            let lo = g.rng.below(5) as i64 - 2;
            let hi = lo + g.rng.below(6) as i64;
            DomainKind::IntRange(lo, hi)
        };
        let d = DomainDecl {
            name: ident("T", i),
            kind,
            span: SourceSpan::synthetic(),
        };
        g.domains.push(d.clone());
        m.domains.push(d);
    }

    let nvars = 1 + g.rng.below(4);
    for i in 0..nvars {
        let domain = if g.domains.is_empty() || g.rng.below(2) == 0 {
            "Bool".to_string()
        } else {
            let k = g.rng.below(g.domains.len());
            g.domains[k].name.clone()
        };
        let name = ident("v", i);
        g.var_names.push(name.clone());
        m.vars.push(VarDecl {
            name,
            domain,
            span: SourceSpan::synthetic(),
        });
    }

    for i in 0..g.rng.below(3) {
        let body = g.expr(2, false, None);
        let name = ident("d", i);
        g.define_names.push(name.clone());
        m.defines.push(DefineDecl {
            name,
            body,
            span: SourceSpan::synthetic(),
        });
    }

    if g.rng.below(4) > 0 {
        m.init_cond = Some(g.expr(3, false, None));
    }

    let nprotocols = g.rng.below(3);
    for i in 0..nprotocols {
        let nparams = 1 + g.rng.below(3);
        let params: Vec<(String, String)> = (0..nparams)
            .map(|j| {
                let ty = if g.domains.is_empty() || g.rng.below(2) == 0 {
                    "Bool".to_string()
                } else {
                    g.domains[g.rng.below(g.domains.len())].name.clone()
                };
                (ident("p", j), ty)
            })
            .collect();
        let nbranches = 1 + g.rng.below(3);
        let branches: Vec<ProtocolBranch> = (0..nbranches)
            .map(|j| ProtocolBranch {
                guard: g.param_guard(&params),
                action: ident("Act", j),
            })
            .collect();
        let otherwise = if g.rng.below(2) == 0 {
            Some("Idle".to_string())
        } else {
            None
        };
        m.protocols.push(ProtocolDecl {
            name: ident("proto", i),
            params,
            branches,
            otherwise,
            span: SourceSpan::synthetic(),
        });
    }

    for i in 0..g.rng.below(3).min(m.protocols.len()) {
        let p = &m.protocols[g.rng.below(m.protocols.len())];
        let bindings: Vec<String> = (0..p.params.len())
            .map(|_| g.var_names[g.rng.below(g.var_names.len())].clone())
            .collect();
        m.agents.push(AgentDecl {
            name: ident("Agent", i),
            protocol: p.name.clone(),
            bindings,
            span: SourceSpan::synthetic(),
        });
    }

    if g.rng.below(4) > 0 {
        m.transitions = Some(g.stmt(3));
    }

    for _ in 0..g.rng.below(3) {
        let f = g.expr(2, false, None);
        m.fairness.push(f);
    }

    let labels = [
        "plain label",
        "multi\nline label",
        "label with \"quotes\" and \\backslash\\",
    ];
    for i in 0..g.rng.below(4) {
        let label = labels[g.rng.below(labels.len())].to_string();
        let formula = SpecFormula { body: g.formula(3) };
        m.specs.push(SpecDecl {
            label: format!("{label} {i}"),
            formula,
            span: SourceSpan::synthetic(),
        });
    }
    m
}

impl Gen<'_> {
    fn leaf(&mut self, actions: bool, primed: Option<&[String]>) -> Expr {
        let span = SourceSpan::synthetic();
        let kind = match self.rng.below(8) {
            0 => ExprKind::True,
            1 => ExprKind::False,
            2 => ExprKind::Int(self.rng.below(10) as i64 - 2),
            3 if !self.const_names.is_empty() => {
                ExprKind::Ident(self.const_names[self.rng.below(self.const_names.len())].clone())
            }
            4 if !self.define_names.is_empty() => {
                ExprKind::Ident(self.define_names[self.rng.below(self.define_names.len())].clone())
            }
            5 if actions => ExprKind::ActionProp("Agent0".into(), "Act0".into()),
            6 => match primed {
                Some(vars) if !vars.is_empty() => {
                    ExprKind::Primed(vars[self.rng.below(vars.len())].clone())
                }
                _ => ExprKind::Ident(self.var_names[self.rng.below(self.var_names.len())].clone()),
            },
            _ => ExprKind::Ident(self.var_names[self.rng.below(self.var_names.len())].clone()),
        };
        Expr::new(kind, span)
    }

    fn expr(&mut self, depth: usize, actions: bool, primed: Option<&[String]>) -> Expr {
        let span = SourceSpan::synthetic();
        if depth == 0 {
            return self.leaf(actions, primed);
        }
        let kind = match self.rng.below(7) {
            0 => {
                let ops = [
                    CmpOp::Eq,
                    CmpOp::Ne,
                    CmpOp::Lt,
                    CmpOp::Le,
                    CmpOp::Gt,
                    CmpOp::Ge,
                ];
                ExprKind::Cmp(
                    ops[self.rng.below(ops.len())],
                    Box::new(self.expr(depth - 1, actions, primed)),
                    Box::new(self.expr(depth - 1, actions, primed)),
                )
            }
            1 => ExprKind::Arith(
                if self.rng.below(2) == 0 {
                    ArithOp::Add
                } else {
                    ArithOp::Sub
                },
                Box::new(self.expr(depth - 1, actions, primed)),
                Box::new(self.expr(depth - 1, actions, primed)),
            ),
            2 => ExprKind::Not(Box::new(self.expr(depth - 1, actions, primed))),
            3 => ExprKind::And(
                Box::new(self.expr(depth - 1, actions, primed)),
                Box::new(self.expr(depth - 1, actions, primed)),
            ),
            4 => ExprKind::Or(
                Box::new(self.expr(depth - 1, actions, primed)),
                Box::new(self.expr(depth - 1, actions, primed)),
            ),
            5 => ExprKind::Implies(
                Box::new(self.expr(depth - 1, actions, primed)),
                Box::new(self.expr(depth - 1, actions, primed)),
            ),
            _ => return self.leaf(actions, primed),
        };
        Expr::new(kind, span)
    }

    fn param_guard(&mut self, params: &[(String, String)]) -> Expr {
        let span = SourceSpan::synthetic();
        let p = &params[self.rng.below(params.len())].0;
        Expr::new(
            ExprKind::Cmp(
                CmpOp::Eq,
                Box::new(Expr::new(ExprKind::Ident(p.clone()), span)),
                Box::new(Expr::new(ExprKind::True, span)),
            ),
            span,
        )
    }

    fn stmt(&mut self, depth: usize) -> Statement {
        let span = SourceSpan::synthetic();
        if depth == 0 {
            return Statement::new(StatementKind::Skip, span);
        }
        let kind = match self.rng.below(5) {
            0 => StatementKind::Assign(
                self.var_names[self.rng.below(self.var_names.len())].clone(),
                self.expr(2, true, None),
            ),
            1 => {
                let n = 1 + self.rng.below(3);
                StatementKind::Seq((0..n).map(|_| self.stmt(depth - 1)).collect())
            }
            2 => {
                let n = 1 + self.rng.below(3);
                let branches = (0..n)
                    .map(|_| (self.expr(2, true, None), self.stmt(depth - 1)))
                    .collect();
                let otherwise = if self.rng.below(2) == 0 {
                    Some(Box::new(self.stmt(depth - 1)))
                } else {
                    None
                };
                StatementKind::Guarded {
                    branches,
                    otherwise,
                }
            }
            3 => {
                let n = 1 + self.rng.below(2.min(self.var_names.len()));
                let vars: Vec<String> = (0..n)
                    .map(|_| self.var_names[self.rng.below(self.var_names.len())].clone())
                    .collect();
                let cond = self.expr(2, true, Some(&vars));
                StatementKind::Nondet { vars, cond }
            }
            _ => StatementKind::Skip,
        };
        Statement::new(kind, span)
    }

    fn formula(&mut self, depth: usize) -> LtlNode<Expr> {
        if depth == 0 {
            // Atoms sit at comparison precedence; boolean connectives in an
            // atom would re-parse as formula connectives.
            let span = SourceSpan::synthetic();
            let v = self.var_names[self.rng.below(self.var_names.len())].clone();
            return match self.rng.below(3) {
                0 => LtlNode::Atom(Expr::new(ExprKind::Ident(v), span)),
                1 => LtlNode::Atom(Expr::new(
                    ExprKind::Cmp(
                        CmpOp::Eq,
                        Box::new(Expr::new(ExprKind::Ident(v), span)),
                        Box::new(Expr::new(ExprKind::Int(self.rng.below(5) as i64), span)),
                    ),
                    span,
                )),
                _ => LtlNode::True,
            };
        }
        match self.rng.below(9) {
            0 => LtlNode::not(self.formula(depth - 1)),
            1 => LtlNode::and(self.formula(depth - 1), self.formula(depth - 1)),
            2 => LtlNode::or(self.formula(depth - 1), self.formula(depth - 1)),
            3 => LtlNode::implies(self.formula(depth - 1), self.formula(depth - 1)),
            4 => LtlNode::next(self.formula(depth - 1)),
            5 => LtlNode::always(self.formula(depth - 1)),
            6 => LtlNode::eventually(self.formula(depth - 1)),
            7 => LtlNode::until(self.formula(depth - 1), self.formula(depth - 1)),
            _ => self.formula(0),
        }
    }
}
