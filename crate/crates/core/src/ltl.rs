//! Linear temporal logic formulas, negation normal form, and exact
//! evaluation on ultimately periodic words.
//!
//! `LtlNode<A>` is generic over the atom type: the parser produces formulas
//! whose atoms are state expressions, while the automaton pipeline works on
//! formulas over dense [`AtomId`]s with per-state valuations cached as bit
//! sets.

/// Index into a model's atom table.
pub type AtomId = u32;

/// A valuation of up to 64 atoms, bit `i` = truth of atom `i`.
pub type AtomSet = u64;

/// An LTL formula tree.
///
/// `WeakUntil` is surface syntax only: the parser desugars `a W b` into
/// `(a U b) \/ G (a /\ neg b)`, and [`normalize`] performs the same
/// expansion if handed one directly.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LtlNode<A> {
    True,
    False,
    Atom(A),
    Not(Box<LtlNode<A>>),
    And(Box<LtlNode<A>>, Box<LtlNode<A>>),
    Or(Box<LtlNode<A>>, Box<LtlNode<A>>),
    Implies(Box<LtlNode<A>>, Box<LtlNode<A>>),
    Next(Box<LtlNode<A>>),
    Always(Box<LtlNode<A>>),
    Eventually(Box<LtlNode<A>>),
    Until(Box<LtlNode<A>>, Box<LtlNode<A>>),
    WeakUntil(Box<LtlNode<A>>, Box<LtlNode<A>>),
    /// Dual of `Until`; produced by negation pushing, not by the parser.
    Release(Box<LtlNode<A>>, Box<LtlNode<A>>),
}

impl<A> LtlNode<A> {
    #[allow(clippy::should_implement_trait)]
    pub fn not(f: LtlNode<A>) -> Self {
        LtlNode::Not(Box::new(f))
    }
    pub fn and(a: LtlNode<A>, b: LtlNode<A>) -> Self {
        LtlNode::And(Box::new(a), Box::new(b))
    }
    pub fn or(a: LtlNode<A>, b: LtlNode<A>) -> Self {
        LtlNode::Or(Box::new(a), Box::new(b))
    }
    pub fn implies(a: LtlNode<A>, b: LtlNode<A>) -> Self {
        LtlNode::Implies(Box::new(a), Box::new(b))
    }
    pub fn next(f: LtlNode<A>) -> Self {
        LtlNode::Next(Box::new(f))
    }
    pub fn always(f: LtlNode<A>) -> Self {
        LtlNode::Always(Box::new(f))
    }
    pub fn eventually(f: LtlNode<A>) -> Self {
        LtlNode::Eventually(Box::new(f))
    }
    pub fn until(a: LtlNode<A>, b: LtlNode<A>) -> Self {
        LtlNode::Until(Box::new(a), Box::new(b))
    }
    pub fn weak_until(a: LtlNode<A>, b: LtlNode<A>) -> Self {
        LtlNode::WeakUntil(Box::new(a), Box::new(b))
    }
    pub fn release(a: LtlNode<A>, b: LtlNode<A>) -> Self {
        LtlNode::Release(Box::new(a), Box::new(b))
    }

    /// Rewrite every atom through `f`, preserving structure.
    pub fn map_atoms<B>(&self, f: &mut impl FnMut(&A) -> B) -> LtlNode<B> {
        match self {
            LtlNode::True => LtlNode::True,
            LtlNode::False => LtlNode::False,
            LtlNode::Atom(a) => LtlNode::Atom(f(a)),
            LtlNode::Not(x) => LtlNode::not(x.map_atoms(f)),
            LtlNode::And(a, b) => LtlNode::and(a.map_atoms(f), b.map_atoms(f)),
            LtlNode::Or(a, b) => LtlNode::or(a.map_atoms(f), b.map_atoms(f)),
            LtlNode::Implies(a, b) => LtlNode::implies(a.map_atoms(f), b.map_atoms(f)),
            LtlNode::Next(x) => LtlNode::next(x.map_atoms(f)),
            LtlNode::Always(x) => LtlNode::always(x.map_atoms(f)),
            LtlNode::Eventually(x) => LtlNode::eventually(x.map_atoms(f)),
            LtlNode::Until(a, b) => LtlNode::until(a.map_atoms(f), b.map_atoms(f)),
            LtlNode::WeakUntil(a, b) => LtlNode::weak_until(a.map_atoms(f), b.map_atoms(f)),
            LtlNode::Release(a, b) => LtlNode::release(a.map_atoms(f), b.map_atoms(f)),
        }
    }

    /// Visit every atom in the formula.
    pub fn for_each_atom(&self, f: &mut impl FnMut(&A)) {
        match self {
            LtlNode::True | LtlNode::False => {}
            LtlNode::Atom(a) => f(a),
            LtlNode::Not(x) | LtlNode::Next(x) | LtlNode::Always(x) | LtlNode::Eventually(x) => {
                x.for_each_atom(f)
            }
            LtlNode::And(a, b)
            | LtlNode::Or(a, b)
            | LtlNode::Implies(a, b)
            | LtlNode::Until(a, b)
            | LtlNode::WeakUntil(a, b)
            | LtlNode::Release(a, b) => {
                a.for_each_atom(f);
                b.for_each_atom(f);
            }
        }
    }

    /// Number of temporal operators (X, G, F, U, W, R) in the tree.
    pub fn temporal_op_count(&self) -> usize {
        match self {
            LtlNode::True | LtlNode::False | LtlNode::Atom(_) => 0,
            LtlNode::Not(x) => x.temporal_op_count(),
            LtlNode::And(a, b) | LtlNode::Or(a, b) | LtlNode::Implies(a, b) => {
                a.temporal_op_count() + b.temporal_op_count()
            }
            LtlNode::Next(x) | LtlNode::Always(x) | LtlNode::Eventually(x) => {
                1 + x.temporal_op_count()
            }
            LtlNode::Until(a, b) | LtlNode::WeakUntil(a, b) | LtlNode::Release(a, b) => {
                1 + a.temporal_op_count() + b.temporal_op_count()
            }
        }
    }
}

/// Negation normal form.
///
/// Negations are pushed down to atoms, `=>` and `W` are expanded, and
/// `neg (a U b)` / `neg (a R b)` swap into their duals. `G` and `F` are kept
/// as primitives rather than rewritten through `U`/`R`; the automaton
/// translation expands them directly.
pub fn normalize<A: Clone>(f: &LtlNode<A>) -> LtlNode<A> {
    match f {
        LtlNode::True | LtlNode::False | LtlNode::Atom(_) => f.clone(),
        LtlNode::And(a, b) => LtlNode::and(normalize(a), normalize(b)),
        LtlNode::Or(a, b) => LtlNode::or(normalize(a), normalize(b)),
        LtlNode::Implies(a, b) => {
            LtlNode::or(normalize(&LtlNode::not((**a).clone())), normalize(b))
        }
        LtlNode::Next(x) => LtlNode::next(normalize(x)),
        LtlNode::Always(x) => LtlNode::always(normalize(x)),
        LtlNode::Eventually(x) => LtlNode::eventually(normalize(x)),
        LtlNode::Until(a, b) => LtlNode::until(normalize(a), normalize(b)),
        LtlNode::Release(a, b) => LtlNode::release(normalize(a), normalize(b)),
        // a W b  =  (a U b) \/ G (a /\ neg b)
        LtlNode::WeakUntil(a, b) => LtlNode::or(
            LtlNode::until(normalize(a), normalize(b)),
            LtlNode::always(LtlNode::and(
                normalize(a),
                normalize(&LtlNode::not((**b).clone())),
            )),
        ),
        LtlNode::Not(inner) => match &**inner {
            LtlNode::True => LtlNode::False,
            LtlNode::False => LtlNode::True,
            LtlNode::Atom(a) => LtlNode::not(LtlNode::Atom(a.clone())),
            LtlNode::Not(x) => normalize(x),
            LtlNode::And(a, b) => LtlNode::or(
                normalize(&LtlNode::not((**a).clone())),
                normalize(&LtlNode::not((**b).clone())),
            ),
            LtlNode::Or(a, b) => LtlNode::and(
                normalize(&LtlNode::not((**a).clone())),
                normalize(&LtlNode::not((**b).clone())),
            ),
            LtlNode::Implies(a, b) => {
                LtlNode::and(normalize(a), normalize(&LtlNode::not((**b).clone())))
            }
            LtlNode::Next(x) => LtlNode::next(normalize(&LtlNode::not((**x).clone()))),
            LtlNode::Always(x) => LtlNode::eventually(normalize(&LtlNode::not((**x).clone()))),
            LtlNode::Eventually(x) => LtlNode::always(normalize(&LtlNode::not((**x).clone()))),
            LtlNode::Until(a, b) => LtlNode::release(
                normalize(&LtlNode::not((**a).clone())),
                normalize(&LtlNode::not((**b).clone())),
            ),
            LtlNode::Release(a, b) => LtlNode::until(
                normalize(&LtlNode::not((**a).clone())),
                normalize(&LtlNode::not((**b).clone())),
            ),
            LtlNode::WeakUntil(a, b) => {
                // neg (a W b) = neg ((a U b) \/ G (a /\ neg b))
                let w = normalize(&LtlNode::weak_until((**a).clone(), (**b).clone()));
                normalize(&LtlNode::not(w))
            }
        },
    }
}

/// True iff the formula is in negation normal form (negation only on atoms,
/// no `=>`, no `W`).
pub fn is_nnf<A>(f: &LtlNode<A>) -> bool {
    match f {
        LtlNode::True | LtlNode::False | LtlNode::Atom(_) => true,
        LtlNode::Not(x) => matches!(**x, LtlNode::Atom(_)),
        LtlNode::Implies(_, _) | LtlNode::WeakUntil(_, _) => false,
        LtlNode::And(a, b) | LtlNode::Or(a, b) | LtlNode::Until(a, b) | LtlNode::Release(a, b) => {
            is_nnf(a) && is_nnf(b)
        }
        LtlNode::Next(x) | LtlNode::Always(x) | LtlNode::Eventually(x) => is_nnf(x),
    }
}

/// Truth of `f` at position 0 of the ultimately periodic word
/// `prefix . cycle^omega`.
///
/// Works positionally on the first `prefix.len() + cycle.len()` positions,
/// with the successor of the last one wrapping to the cycle start. Temporal
/// operators are solved as fixpoints over those positions (least for
/// `U`/`F`, greatest for `R`/`W`/`G`), which is exact on ultimately periodic
/// words. The formula need not be in normal form.
///
/// Panics if `cycle` is empty.
pub fn eval_on_lasso(f: &LtlNode<AtomId>, prefix: &[AtomSet], cycle: &[AtomSet]) -> bool {
    assert!(!cycle.is_empty(), "lasso cycle must be nonempty");
    let n = prefix.len() + cycle.len();
    let word: Vec<AtomSet> = prefix.iter().chain(cycle.iter()).copied().collect();
    let succ = |i: usize| if i + 1 < n { i + 1 } else { prefix.len() };
    eval_positions(f, &word, &succ)[0]
}

fn eval_positions(
    f: &LtlNode<AtomId>,
    word: &[AtomSet],
    succ: &impl Fn(usize) -> usize,
) -> Vec<bool> {
    let n = word.len();
    match f {
        LtlNode::True => vec![true; n],
        LtlNode::False => vec![false; n],
        LtlNode::Atom(a) => word.iter().map(|w| w & (1 << *a) != 0).collect(),
        LtlNode::Not(x) => {
            let v = eval_positions(x, word, succ);
            v.into_iter().map(|b| !b).collect()
        }
        LtlNode::And(a, b) => {
            let va = eval_positions(a, word, succ);
            let vb = eval_positions(b, word, succ);
            va.into_iter().zip(vb).map(|(x, y)| x && y).collect()
        }
        LtlNode::Or(a, b) => {
            let va = eval_positions(a, word, succ);
            let vb = eval_positions(b, word, succ);
            va.into_iter().zip(vb).map(|(x, y)| x || y).collect()
        }
        LtlNode::Implies(a, b) => {
            let va = eval_positions(a, word, succ);
            let vb = eval_positions(b, word, succ);
            va.into_iter().zip(vb).map(|(x, y)| !x || y).collect()
        }
        LtlNode::Next(x) => {
            let v = eval_positions(x, word, succ);
            (0..n).map(|i| v[succ(i)]).collect()
        }
        // F x: least fixpoint of  Fx = x \/ X Fx
        LtlNode::Eventually(x) => {
            let v = eval_positions(x, word, succ);
            least_fixpoint(n, succ, |i, next| v[i] || next)
        }
        // G x: greatest fixpoint of  Gx = x /\ X Gx
        LtlNode::Always(x) => {
            let v = eval_positions(x, word, succ);
            greatest_fixpoint(n, succ, |i, next| v[i] && next)
        }
        // a U b: least fixpoint of  U = b \/ (a /\ X U)
        LtlNode::Until(a, b) => {
            let va = eval_positions(a, word, succ);
            let vb = eval_positions(b, word, succ);
            least_fixpoint(n, succ, |i, next| vb[i] || (va[i] && next))
        }
        // a W b: greatest fixpoint of the same equation.
        LtlNode::WeakUntil(a, b) => {
            let va = eval_positions(a, word, succ);
            let vb = eval_positions(b, word, succ);
            greatest_fixpoint(n, succ, |i, next| vb[i] || (va[i] && next))
        }
        // a R b: greatest fixpoint of  R = b /\ (a \/ X R)
        LtlNode::Release(a, b) => {
            let va = eval_positions(a, word, succ);
            let vb = eval_positions(b, word, succ);
            greatest_fixpoint(n, succ, |i, next| vb[i] && (va[i] || next))
        }
    }
}

fn least_fixpoint(
    n: usize,
    succ: &impl Fn(usize) -> usize,
    step: impl Fn(usize, bool) -> bool,
) -> Vec<bool> {
    let mut v = vec![false; n];
    loop {
        let mut changed = false;
        for i in (0..n).rev() {
            let new = step(i, v[succ(i)]);
            if new != v[i] {
                v[i] = new;
                changed = true;
            }
        }
        if !changed {
            return v;
        }
    }
}

fn greatest_fixpoint(
    n: usize,
    succ: &impl Fn(usize) -> usize,
    step: impl Fn(usize, bool) -> bool,
) -> Vec<bool> {
    let mut v = vec![true; n];
    loop {
        let mut changed = false;
        for i in (0..n).rev() {
            let new = step(i, v[succ(i)]);
            if new != v[i] {
                v[i] = new;
                changed = true;
            }
        }
        if !changed {
            return v;
        }
    }
}

/// Enumerate every lasso word over `atoms` atoms with prefix length up to
/// `max_prefix` and cycle length 1..=`max_cycle`, invoking `visit` on each.
pub fn for_each_lasso(
    atoms: u32,
    max_prefix: usize,
    max_cycle: usize,
    visit: &mut impl FnMut(&[AtomSet], &[AtomSet]),
) {
    let letters: Vec<AtomSet> = (0..(1u64 << atoms)).collect();
    fn rec_cycle(
        letters: &[AtomSet],
        prefix: &[AtomSet],
        cycle: &mut Vec<AtomSet>,
        max_cycle: usize,
        visit: &mut impl FnMut(&[AtomSet], &[AtomSet]),
    ) {
        if !cycle.is_empty() {
            visit(prefix, cycle);
        }
        if cycle.len() == max_cycle {
            return;
        }
        for &l in letters {
            cycle.push(l);
            rec_cycle(letters, prefix, cycle, max_cycle, visit);
            cycle.pop();
        }
    }
    fn rec_prefix(
        letters: &[AtomSet],
        prefix: &mut Vec<AtomSet>,
        max_prefix: usize,
        max_cycle: usize,
        visit: &mut impl FnMut(&[AtomSet], &[AtomSet]),
    ) {
        let mut cycle = Vec::new();
        rec_cycle(letters, prefix, &mut cycle, max_cycle, visit);
        if prefix.len() == max_prefix {
            return;
        }
        for &l in letters {
            prefix.push(l);
            rec_prefix(letters, prefix, max_prefix, max_cycle, visit);
            prefix.pop();
        }
    }
    let mut prefix = Vec::new();
    rec_prefix(&letters, &mut prefix, max_prefix, max_cycle, visit);
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> LtlNode<AtomId> {
        LtlNode::Atom(0)
    }
    fn q() -> LtlNode<AtomId> {
        LtlNode::Atom(1)
    }
    const P: AtomSet = 1;
    const Q: AtomSet = 2;

    #[test]
    fn g_on_all_true_cycle() {
        assert!(eval_on_lasso(&LtlNode::always(p()), &[], &[P]));
    }

    #[test]
    fn f_on_all_false_lasso() {
        assert!(!eval_on_lasso(&LtlNode::eventually(p()), &[0], &[0]));
    }

    #[test]
    fn until_discharged_in_cycle() {
        // (p U q) on prefix [p], cycle [q]: stable under longer unrollings.
        let f = LtlNode::until(p(), q());
        assert!(eval_on_lasso(&f, &[P], &[Q]));
        // Unroll the cycle 8 times; the verdict must not change.
        let unrolled: Vec<AtomSet> = std::iter::once(P)
            .chain(std::iter::repeat_n(Q, 8))
            .collect();
        assert!(eval_on_lasso(&f, &unrolled, &[Q]));
    }

    #[test]
    fn until_needs_eventual_q() {
        let f = LtlNode::until(p(), q());
        assert!(!eval_on_lasso(&f, &[], &[P]));
        // Weak until is satisfied by p forever.
        let w = LtlNode::weak_until(p(), q());
        assert!(eval_on_lasso(&w, &[], &[P]));
    }

    #[test]
    fn nnf_dualities() {
        // neg F p -> G neg p
        let f = LtlNode::not(LtlNode::eventually(p()));
        assert_eq!(normalize(&f), LtlNode::always(LtlNode::not(p())));
        // neg (p U q) -> (neg p) R (neg q)
        let f = LtlNode::not(LtlNode::until(p(), q()));
        assert_eq!(
            normalize(&f),
            LtlNode::release(LtlNode::not(p()), LtlNode::not(q()))
        );
        // a W b -> (a U b) \/ G (a /\ neg b)
        let f = LtlNode::weak_until(p(), q());
        assert_eq!(
            normalize(&f),
            LtlNode::or(
                LtlNode::until(p(), q()),
                LtlNode::always(LtlNode::and(p(), LtlNode::not(q())))
            )
        );
    }

    #[test]
    fn normalize_output_is_nnf() {
        let shapes: Vec<LtlNode<AtomId>> = vec![
            LtlNode::not(LtlNode::implies(p(), LtlNode::until(p(), q()))),
            LtlNode::not(LtlNode::weak_until(p(), q())),
            LtlNode::not(LtlNode::not(LtlNode::eventually(p()))),
            LtlNode::not(LtlNode::release(p(), q())),
        ];
        for f in shapes {
            assert!(is_nnf(&normalize(&f)), "not NNF: {:?}", normalize(&f));
        }
    }

    /// normalize preserves semantics on every lasso with prefix <= 3,
    /// period <= 3 over two atoms.
    #[test]
    fn normalize_preserves_bounded_lasso_semantics() {
        let shapes: Vec<LtlNode<AtomId>> = vec![
            LtlNode::not(LtlNode::until(p(), q())),
            LtlNode::not(LtlNode::release(p(), q())),
            LtlNode::weak_until(p(), q()),
            LtlNode::not(LtlNode::weak_until(p(), q())),
            LtlNode::implies(LtlNode::always(p()), LtlNode::eventually(q())),
            LtlNode::not(LtlNode::and(LtlNode::eventually(p()), LtlNode::always(q()))),
            LtlNode::not(LtlNode::next(LtlNode::until(p(), q()))),
        ];
        for f in &shapes {
            let g = normalize(f);
            for_each_lasso(2, 3, 3, &mut |prefix, cycle| {
                assert_eq!(
                    eval_on_lasso(f, prefix, cycle),
                    eval_on_lasso(&g, prefix, cycle),
                    "disagreement on {:?} / {:?} for {:?}",
                    prefix,
                    cycle,
                    f
                );
            });
        }
    }
}
