//! Finitary (F+G)-terms.
//!
//! An F-node is one transition step whose children are terms. A G-node is an
//! infinite stream of contexts over terms, plugged into each other along a
//! spine; only ultimately periodic streams are representable, stored as
//! canonical [`Lasso`]es.

mod lasso;

use std::cmp::Ordering;
use std::collections::hash_map::DefaultHasher;
use std::collections::BTreeSet;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::signature::{ContextElem, FElem, OpId, Signature, SignatureError};

pub use lasso::Lasso;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TermError {
    #[error(transparent)]
    Signature(#[from] SignatureError),
    #[error("a G-node needs a nonempty period")]
    EmptyPeriod,
    #[error("expected a G-node")]
    NotGNode,
    #[error("expected an F-node")]
    NotFNode,
    #[error("no subterm at position {0:?}")]
    BadPosition(Vec<Step>),
    #[error("signature has no operation of arity 0 or 1, so it has no finite terms")]
    NoFiniteTerms,
}

/// Lexicographically ordered `(major, minor)` rank.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Rank {
    pub major: usize,
    pub minor: usize,
}

impl Rank {
    pub fn new(major: usize, minor: usize) -> Self {
        Rank { major, minor }
    }
}

impl fmt::Display for Rank {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.major, self.minor)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TermNode {
    F(FElem<Term>),
    G(Lasso<ContextElem<Term>>),
}

#[derive(Debug)]
struct TermInner {
    node: TermNode,
    hash: u64,
    size: usize,
    rank: Rank,
}

/// A shared, immutable finitary term.
///
/// Terms are totally ordered: F-nodes before G-nodes, then by operation
/// index, then lexicographically on canonical tuples or lassos.
#[derive(Clone)]
pub struct Term(Arc<TermInner>);

impl PartialEq for Term {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.hash == other.0.hash && self.0.node == other.0.node)
    }
}

impl Eq for Term {}

impl Hash for Term {
    fn hash<H: Hasher>(&self, state: &mut H) {
        state.write_u64(self.0.hash);
    }
}

impl PartialOrd for Term {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Term {
    fn cmp(&self, other: &Self) -> Ordering {
        if Arc::ptr_eq(&self.0, &other.0) {
            return Ordering::Equal;
        }
        self.0.node.cmp(&other.0.node)
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0.node {
            TermNode::F(e) => write!(f, "F({}, {:?})", e.op().0, e.tuple()),
            TermNode::G(l) => write!(f, "G({:?}, {:?})", l.prefix(), l.period()),
        }
    }
}

/// One step of a position inside a term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Step {
    /// The `k`-th entry of an F-node's canonical tuple.
    Child(usize),
    /// Side `side` of the context at index `context` of the lasso
    /// (prefix first, then one copy of the period).
    Side { context: usize, side: usize },
}

impl Term {
    fn from_node(node: TermNode) -> Term {
        let mut h = DefaultHasher::new();
        node.hash(&mut h);
        let (size, rank) = match &node {
            TermNode::F(e) => {
                let size = 1 + e.tuple().iter().map(Term::size).sum::<usize>();
                let major = e.tuple().iter().map(|t| t.rank().major).max().unwrap_or(0);
                let minor = 1 + e.tuple().iter().map(|t| t.rank().minor).max().unwrap_or(0);
                (size, Rank { major, minor })
            }
            TermNode::G(l) => {
                let size = 1 + l
                    .elements()
                    .map(|c| 1 + c.sides().iter().map(Term::size).sum::<usize>())
                    .sum::<usize>();
                let major = 1 + l
                    .elements()
                    .flat_map(|c| c.sides())
                    .map(|t| t.rank().major)
                    .max()
                    .unwrap_or(0);
                (size, Rank { major, minor: 0 })
            }
        };
        Term(Arc::new(TermInner {
            node,
            hash: h.finish(),
            size,
            rank,
        }))
    }

    /// F-node from an operation and raw children.
    pub fn f(sig: &Signature, op: OpId, children: Vec<Term>) -> Result<Term, TermError> {
        Ok(Term::from_elem(sig.canonical_tuple(op, children)?))
    }

    /// F-node by operation name.
    pub fn f_named(sig: &Signature, op: &str, children: Vec<Term>) -> Result<Term, TermError> {
        Term::f(sig, sig.lookup(op)?, children)
    }

    pub fn from_elem(elem: FElem<Term>) -> Term {
        Term::from_node(TermNode::F(elem))
    }

    /// G-node for `prefix · period^ω`.
    pub fn g(
        prefix: Vec<ContextElem<Term>>,
        period: Vec<ContextElem<Term>>,
    ) -> Result<Term, TermError> {
        Lasso::new(prefix, period)
            .map(Term::from_stream)
            .ok_or(TermError::EmptyPeriod)
    }

    pub fn from_stream(stream: Lasso<ContextElem<Term>>) -> Term {
        Term::from_node(TermNode::G(stream))
    }

    pub fn node(&self) -> &TermNode {
        &self.0.node
    }

    pub fn as_f(&self) -> Option<&FElem<Term>> {
        match &self.0.node {
            TermNode::F(e) => Some(e),
            TermNode::G(_) => None,
        }
    }

    pub fn as_g(&self) -> Option<&Lasso<ContextElem<Term>>> {
        match &self.0.node {
            TermNode::F(_) => None,
            TermNode::G(l) => Some(l),
        }
    }

    pub fn is_g(&self) -> bool {
        self.as_g().is_some()
    }

    /// Node count: an F-node counts one plus its children, a G-node one plus,
    /// for each stored context, one plus its sides.
    pub fn size(&self) -> usize {
        self.0.size
    }

    pub fn rank(&self) -> Rank {
        self.0.rank
    }

    /// Immediate subterms: the children of an F-node or the context sides of a G-node.
    pub fn subterms(&self) -> BTreeSet<Term> {
        match &self.0.node {
            TermNode::F(e) => e.base(),
            TermNode::G(l) => l
                .elements()
                .flat_map(|c| c.sides().iter().cloned())
                .collect(),
        }
    }

    /// The term and all its transitive subterms.
    pub fn subterm_closure(&self) -> BTreeSet<Term> {
        let mut seen = BTreeSet::new();
        let mut stack = vec![self.clone()];
        while let Some(t) = stack.pop() {
            if seen.insert(t.clone()) {
                stack.extend(t.subterms());
            }
        }
        seen
    }

    /// Every position in the term, the root (empty position) first.
    pub fn positions(&self) -> Vec<Vec<Step>> {
        let mut out = Vec::new();
        let mut cur = Vec::new();
        self.collect_positions(&mut cur, &mut out);
        out
    }

    fn collect_positions(&self, cur: &mut Vec<Step>, out: &mut Vec<Vec<Step>>) {
        out.push(cur.clone());
        match &self.0.node {
            TermNode::F(e) => {
                for (k, child) in e.tuple().iter().enumerate() {
                    cur.push(Step::Child(k));
                    child.collect_positions(cur, out);
                    cur.pop();
                }
            }
            TermNode::G(l) => {
                for (i, c) in l.elements().enumerate() {
                    for (j, side) in c.sides().iter().enumerate() {
                        cur.push(Step::Side {
                            context: i,
                            side: j,
                        });
                        side.collect_positions(cur, out);
                        cur.pop();
                    }
                }
            }
        }
    }

    fn child_at(&self, step: Step) -> Option<&Term> {
        match (&self.0.node, step) {
            (TermNode::F(e), Step::Child(k)) => e.tuple().get(k),
            (TermNode::G(l), Step::Side { context, side }) => {
                l.elements().nth(context).and_then(|c| c.sides().get(side))
            }
            _ => None,
        }
    }

    pub fn subterm_at(&self, pos: &[Step]) -> Option<Term> {
        let mut cur = self;
        for &s in pos {
            cur = cur.child_at(s)?;
        }
        Some(cur.clone())
    }

    /// Replaces the subterm at `pos`, re-canonicalizing every node on the way up.
    pub fn replace_at(&self, sig: &Signature, pos: &[Step], new: Term) -> Result<Term, TermError> {
        let Some((&first, rest)) = pos.split_first() else {
            return Ok(new);
        };
        let bad = || TermError::BadPosition(pos.to_vec());
        let child = self.child_at(first).ok_or_else(bad)?;
        let replaced = child.replace_at(sig, rest, new)?;
        match (&self.0.node, first) {
            (TermNode::F(e), Step::Child(k)) => {
                let mut children = e.tuple().to_vec();
                children[k] = replaced;
                Term::f(sig, e.op(), children)
            }
            (TermNode::G(l), Step::Side { context, side }) => {
                let c = l.elements().nth(context).ok_or_else(bad)?;
                let mut sides = c.sides().to_vec();
                sides[side] = replaced;
                let c2 = sig.canonical_context(c.op(), c.hole(), sides)?;
                Ok(Term::from_stream(l.replace_element(context, c2)))
            }
            _ => Err(bad()),
        }
    }

    pub fn display<'a>(&'a self, sig: &'a Signature) -> TermDisplay<'a> {
        TermDisplay { term: self, sig }
    }
}

/// Coherence rewrite left to right: a G-node becomes the F-node obtained by
/// plugging the G-node of its tail into its head.
pub fn unfold_step(sig: &Signature, g: &Term) -> Result<Term, TermError> {
    let l = g.as_g().ok_or(TermError::NotGNode)?;
    let tail = Term::from_stream(l.tail());
    Ok(Term::from_elem(sig.plug(l.head(), tail)))
}

/// Coherence rewrite right to left: every G-node obtained by prepending a
/// context of the F-node to a G-node child.
pub fn fold_candidates(sig: &Signature, f: &Term) -> Result<Vec<Term>, TermError> {
    let e = f.as_f().ok_or(TermError::NotFNode)?;
    let mut out: Vec<Term> = sig
        .decompositions(e)
        .into_iter()
        .filter_map(|(c, child)| child.as_g().map(|l| Term::from_stream(l.cons(c))))
        .collect();
    out.sort();
    out.dedup();
    Ok(out)
}

pub struct TermDisplay<'a> {
    term: &'a Term,
    sig: &'a Signature,
}

impl TermDisplay<'_> {
    fn context(&self, f: &mut fmt::Formatter<'_>, c: &ContextElem<Term>) -> fmt::Result {
        write!(f, "{}(", self.sig.name(c.op()))?;
        let arity = c.sides().len() + 1;
        let mut sides = c.sides().iter();
        for k in 0..arity {
            if k > 0 {
                write!(f, ", ")?;
            }
            if k == c.hole() {
                write!(f, "_")?;
            } else {
                let side = sides.next().expect("arity matches sides");
                write!(f, "{}", side.display(self.sig))?;
            }
        }
        write!(f, ")")
    }
}

impl fmt::Display for TermDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.term.node() {
            TermNode::F(e) => {
                write!(f, "{}", self.sig.name(e.op()))?;
                if e.arity() > 0 {
                    write!(f, "(")?;
                    for (k, t) in e.tuple().iter().enumerate() {
                        if k > 0 {
                            write!(f, ", ")?;
                        }
                        write!(f, "{}", t.display(self.sig))?;
                    }
                    write!(f, ")")?;
                }
                Ok(())
            }
            TermNode::G(l) => {
                for c in l.prefix() {
                    self.context(f, c)?;
                    write!(f, "·")?;
                }
                write!(f, "(")?;
                for (i, c) in l.period().iter().enumerate() {
                    if i > 0 {
                        write!(f, "·")?;
                    }
                    self.context(f, c)?;
                }
                write!(f, ")^ω")
            }
        }
    }
}

/// Helpers for building terms over the polynomial test signature.
pub mod build {
    use super::*;

    pub fn leaf(sig: &Signature, op: &str) -> Term {
        Term::f_named(sig, op, vec![]).expect("nullary operation")
    }

    pub fn ctx(sig: &Signature, op: &str, hole: usize, sides: Vec<Term>) -> ContextElem<Term> {
        sig.canonical_context(sig.lookup(op).expect("known operation"), hole, sides)
            .expect("well-formed context")
    }

    /// `c^ω` for a single context.
    pub fn omega(c: ContextElem<Term>) -> Term {
        Term::from_stream(Lasso::constant(c))
    }
}

#[cfg(test)]
mod tests {
    use super::build::*;
    use super::*;
    use crate::signature::library;
    use proptest::prelude::*;

    fn poly() -> Signature {
        Signature::new(&library::polynomial()).unwrap()
    }

    fn uomega(sig: &Signature) -> Term {
        omega(ctx(sig, "u", 0, vec![]))
    }

    #[test]
    fn subterm_examples() {
        let sig = poly();
        let x = leaf(&sig, "a");
        let y = uomega(&sig);
        let t = Term::f_named(&sig, "b", vec![x.clone(), y.clone()]).unwrap();
        assert_eq!(t.subterms(), [x.clone(), y.clone()].into_iter().collect());
        let g = omega(ctx(&sig, "b", 0, vec![x.clone()]));
        assert_eq!(g.subterms(), [x].into_iter().collect());
        assert!(y.subterms().is_empty());
    }

    #[test]
    fn rank_examples() {
        let sig = poly();
        let a = leaf(&sig, "a");
        assert_eq!(a.rank(), Rank::new(0, 1));
        let u = uomega(&sig);
        assert_eq!(u.rank(), Rank::new(1, 0));
        let g = omega(ctx(&sig, "b", 1, vec![u.clone()]));
        assert_eq!(g.rank(), Rank::new(2, 0));
        let f = Term::f_named(
            &sig,
            "u",
            vec![Term::f_named(&sig, "u", vec![g.clone()]).unwrap()],
        )
        .unwrap();
        assert_eq!(f.rank(), Rank::new(2, 2));
        assert_eq!(a.size(), 1);
        assert_eq!(u.size(), 2);
        assert_eq!(g.size(), 4);
    }

    #[test]
    fn unfold_and_fold() {
        let sig = poly();
        let u = uomega(&sig);
        let f = unfold_step(&sig, &u).unwrap();
        assert_eq!(f, Term::f_named(&sig, "u", vec![u.clone()]).unwrap());
        assert_eq!(f.rank(), Rank::new(1, 1));
        assert_eq!(fold_candidates(&sig, &f).unwrap(), vec![u.clone()]);

        let a = leaf(&sig, "a");
        let c0 = ctx(&sig, "b", 0, vec![a.clone()]);
        let c1 = ctx(&sig, "u", 0, vec![]);
        let g = Term::g(vec![c0.clone()], vec![c1.clone()]).unwrap();
        let expected = Term::from_elem(sig.plug(&c0, omega(c1)));
        assert_eq!(unfold_step(&sig, &g).unwrap(), expected);

        assert!(fold_candidates(&sig, &a).unwrap().is_empty());
        let h = Term::f_named(&sig, "b", vec![a.clone(), u.clone()]).unwrap();
        assert_eq!(fold_candidates(&sig, &h).unwrap().len(), 1);
        assert_eq!(unfold_step(&sig, &a), Err(TermError::NotGNode));
        assert_eq!(fold_candidates(&sig, &u), Err(TermError::NotFNode));
    }

    #[test]
    fn ordering_conventions() {
        let sig = poly();
        let a = leaf(&sig, "a");
        let u = uomega(&sig);
        assert_eq!(a.cmp(&a.clone()), Ordering::Equal);
        assert!(a < u);
        let ua = Term::f_named(&sig, "u", vec![a.clone()]).unwrap();
        assert!(a < ua);
        assert!(ua < u);
    }

    #[test]
    fn display_format() {
        let sig = poly();
        let a = leaf(&sig, "a");
        let g = Term::g(
            vec![ctx(&sig, "b", 0, vec![a.clone()])],
            vec![ctx(&sig, "u", 0, vec![])],
        )
        .unwrap();
        assert_eq!(g.display(&sig).to_string(), "b(_, a)·(u(_))^ω");
        let f = Term::f_named(&sig, "b", vec![a.clone(), g]).unwrap();
        assert_eq!(f.display(&sig).to_string(), "b(a, b(_, a)·(u(_))^ω)");
    }

    #[test]
    fn positions_and_replacement() {
        let sig = poly();
        let a = leaf(&sig, "a");
        let u = uomega(&sig);
        let g = omega(ctx(&sig, "b", 1, vec![a.clone()]));
        let t = Term::f_named(&sig, "b", vec![g.clone(), u.clone()]).unwrap();
        let pos = t.positions();
        assert_eq!(pos.len(), 4);
        for p in &pos {
            let s = t.subterm_at(p).unwrap();
            assert_eq!(t.replace_at(&sig, p, s).unwrap(), t);
        }
        let p = vec![
            Step::Child(0),
            Step::Side {
                context: 0,
                side: 0,
            },
        ];
        assert_eq!(t.subterm_at(&p), Some(a.clone()));
        let t2 = t.replace_at(&sig, &p, u.clone()).unwrap();
        assert_eq!(
            t2.subterm_at(&[Step::Child(0)]).unwrap(),
            omega(ctx(&sig, "b", 1, vec![u.clone()]))
        );
        assert!(t.replace_at(&sig, &[Step::Child(5)], a).is_err());
    }

    fn term_strategy() -> impl Strategy<Value = Term> {
        let sig = Arc::new(poly());
        let s2 = sig.clone();
        let leaf_s = prop_oneof![
            Just(leaf(&sig, "a")),
            Just(omega(ctx(&sig, "u", 0, vec![]))),
        ];
        leaf_s.prop_recursive(3, 12, 2, move |inner| {
            let sig = s2.clone();
            let sig2 = s2.clone();
            prop_oneof![
                (inner.clone(), inner.clone()).prop_map(move |(x, y)| Term::f_named(
                    &sig,
                    "b",
                    vec![x, y]
                )
                .unwrap()),
                (inner, 0usize..2, 0usize..2).prop_map(move |(x, hole, pre)| {
                    let c = ctx(&sig2, "b", hole, vec![x]);
                    let u = ctx(&sig2, "u", 0, vec![]);
                    let prefix = if pre == 1 { vec![u] } else { vec![] };
                    Term::g(prefix, vec![c]).unwrap()
                }),
            ]
        })
    }

    proptest! {
        #[test]
        fn order_is_total(a in term_strategy(), b in term_strategy(), c in term_strategy()) {
            prop_assert_eq!(a.cmp(&b), b.cmp(&a).reverse());
            prop_assert_eq!(a.cmp(&b) == Ordering::Equal, a == b);
            if a <= b && b <= c {
                prop_assert!(a <= c);
            }
        }

        #[test]
        fn rank_laws(t in term_strategy()) {
            let r = t.rank();
            if t.is_g() {
                prop_assert_eq!(r.minor, 0);
            } else {
                prop_assert!(r.minor >= 1);
            }
            for s in t.subterms() {
                prop_assert!(s.rank() < r);
            }
        }

        #[test]
        fn fold_inverts_unfold(t in term_strategy()) {
            let sig = poly();
            if t.is_g() {
                let f = unfold_step(&sig, &t).unwrap();
                prop_assert!(fold_candidates(&sig, &f).unwrap().contains(&t));
            }
        }
    }
}
