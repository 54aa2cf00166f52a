//! Ranks of states of thin coalgebras and extraction of normal terms.
//!
//! In a thin coalgebra every cyclic component is a simple loop. A loop state
//! is best represented by the G-node running around its loop, whose major
//! rank is one more than the largest major rank of the loop's exits. Any
//! other state is either an F-node over its successors, or a G-node whose
//! spine descends through one decomposition into a G-represented successor;
//! the spine is only worth taking when it does not raise the major rank
//! above that of the F-node.

mod oracle;

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::coalgebra::{minimize, PointedCoalgebra};
use crate::semantics::unfold;
use crate::signature::{ContextElem, Signature};
use crate::terms::{Rank, Term};
use crate::thinness::{verdict_from, NonThinWitness};

pub use oracle::{brute_force_normal, BruteForceOracle};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NormalFormError {
    #[error("coalgebra is not thin (state {} has two incomparable cycles)", .0.state())]
    NotThin(Box<NonThinWitness>),
    #[error("no normal term of size at most {bound} represents this behaviour")]
    BoundExceeded { bound: usize },
    #[error("term was not registered with the oracle")]
    UnknownTerm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StateKind {
    F,
    G,
}

impl fmt::Display for StateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateKind::F => write!(f, "F"),
            StateKind::G => write!(f, "G"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateEntry {
    pub rank: Rank,
    pub kind: StateKind,
    /// True for members of a cyclic component.
    pub on_loop: bool,
    /// Least possible largest side major along a spine from this state, if
    /// a spine exists.
    pub spine_value: Option<usize>,
    /// Decompositions `(context, next)` attaining `spine_value`.
    pub spine: Vec<(ContextElem<usize>, usize)>,
}

/// Ranks of the states reachable from the root; `None` elsewhere.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateRankTable {
    pub entries: Vec<Option<StateEntry>>,
    root: usize,
    /// Reachable components, sinks first.
    components: Vec<Vec<usize>>,
}

impl StateRankTable {
    pub fn root(&self) -> usize {
        self.root
    }

    pub fn rank(&self, state: usize) -> Option<Rank> {
        self.entries[state].as_ref().map(|e| e.rank)
    }

    pub fn root_rank(&self) -> Rank {
        self.rank(self.root).expect("root is reachable")
    }

    fn entry(&self, state: usize) -> &StateEntry {
        self.entries[state].as_ref().expect("state is reachable")
    }
}

fn not_thin(
    pc: &PointedCoalgebra,
    cond: &crate::coalgebra::Condensation,
) -> Option<NormalFormError> {
    verdict_from(pc, cond)
        .witness
        .map(|w| NormalFormError::NotThin(Box::new(w)))
}

/// Least-rank dynamic programme over the condensation.
pub fn state_ranks(pc: &PointedCoalgebra) -> Result<StateRankTable, NormalFormError> {
    let c = pc.coalgebra();
    let sig = c.signature();
    let cond = c.sccs_from(pc.root());
    if let Some(e) = not_thin(pc, &cond) {
        return Err(e);
    }
    let mut entries: Vec<Option<StateEntry>> = vec![None; c.n_states()];
    for (id, comp) in cond.components.iter().enumerate() {
        if cond.cyclic[id] {
            let exit_major = comp
                .iter()
                .flat_map(|&s| c.transition(s).tuple().iter())
                .filter(|&&x| cond.component_of[x] != Some(id))
                .map(|&x| entries[x].as_ref().expect("exits are done").rank.major)
                .max();
            let major = 1 + exit_major.unwrap_or(0);
            for &s in comp {
                let step = sig
                    .decompositions(c.transition(s))
                    .into_iter()
                    .find(|(_, x)| cond.component_of[*x] == Some(id))
                    .expect("loop states have an edge on the loop");
                entries[s] = Some(StateEntry {
                    rank: Rank::new(major, 0),
                    kind: StateKind::G,
                    on_loop: true,
                    spine_value: Some(major - 1),
                    spine: vec![step],
                });
            }
        } else {
            let s = comp[0];
            let t = c.transition(s);
            let child = |x: &usize| entries[*x].as_ref().expect("successors are done");
            let f_rank = Rank::new(
                t.tuple()
                    .iter()
                    .map(|x| child(x).rank.major)
                    .max()
                    .unwrap_or(0),
                1 + t
                    .tuple()
                    .iter()
                    .map(|x| child(x).rank.minor)
                    .max()
                    .unwrap_or(0),
            );
            let mut best: Option<usize> = None;
            let mut spine = Vec::new();
            for (ctx, x) in sig.decompositions(t) {
                let Some(sv) = child(&x).spine_value else {
                    continue;
                };
                let side = ctx
                    .sides()
                    .iter()
                    .map(|y| child(y).rank.major)
                    .max()
                    .unwrap_or(0);
                let v = side.max(sv);
                match best {
                    Some(b) if v > b => {}
                    Some(b) if v == b => spine.push((ctx, x)),
                    _ => {
                        best = Some(v);
                        spine = vec![(ctx, x)];
                    }
                }
            }
            let (rank, kind) = match best {
                Some(g) if g < f_rank.major => (Rank::new(1 + g, 0), StateKind::G),
                _ => (f_rank, StateKind::F),
            };
            entries[s] = Some(StateEntry {
                rank,
                kind,
                on_loop: false,
                spine_value: best,
                spine,
            });
        }
    }
    Ok(StateRankTable {
        entries,
        root: pc.root(),
        components: cond.components,
    })
}

/// Builds the term of every reachable state as selected by `table`.
fn extract_terms(
    sig: &Signature,
    pc: &PointedCoalgebra,
    table: &StateRankTable,
) -> Vec<Option<Term>> {
    let c = pc.coalgebra();
    let mut terms: Vec<Option<Term>> = vec![None; c.n_states()];
    for comp in &table.components {
        let first = table.entry(comp[0]);
        if first.on_loop {
            let contexts: Vec<(usize, ContextElem<Term>)> = comp
                .iter()
                .map(|&s| {
                    let (ctx, next) = &table.entry(s).spine[0];
                    let mapped = sig.map_ctx(ctx, |y| terms[*y].clone().expect("exits are done"));
                    (*next, mapped)
                })
                .collect();
            let at = |s: usize| comp.binary_search(&s).expect("loop member");
            for (i, &s) in comp.iter().enumerate() {
                let mut period = Vec::with_capacity(comp.len());
                let mut j = i;
                loop {
                    period.push(contexts[j].1.clone());
                    j = at(contexts[j].0);
                    if j == i {
                        break;
                    }
                }
                terms[s] = Some(Term::g(vec![], period).expect("loop has a context"));
            }
        } else {
            let s = comp[0];
            let term = match first.kind {
                StateKind::F => Term::from_elem(sig.map_elem(c.transition(s), |y| {
                    terms[*y].clone().expect("successors are done")
                })),
                StateKind::G => first
                    .spine
                    .iter()
                    .map(|(ctx, x)| {
                        let rest = terms[*x].as_ref().expect("successors are done");
                        let stream = rest.as_g().expect("spine continues into a G-node");
                        let head = sig.map_ctx(ctx, |y| terms[*y].clone().expect("sides are done"));
                        Term::from_stream(stream.cons(head))
                    })
                    .min()
                    .expect("G-kind states have a spine"),
            };
            terms[s] = Some(term);
        }
    }
    terms
}

/// The normal term of the root's behaviour.
pub fn extract_normal(pc: &PointedCoalgebra) -> Result<Term, NormalFormError> {
    let (m, _) = minimize(pc);
    let table = state_ranks(&m)?;
    let terms = extract_terms(m.signature(), &m, &table);
    let t = terms[m.root()].clone().expect("root is reachable");
    debug_assert_eq!(t.rank(), table.root_rank());
    Ok(t)
}

/// Normal terms for every state reachable from the root of a minimal coalgebra.
pub fn extract_all_normal(pc: &PointedCoalgebra) -> Result<Vec<Option<Term>>, NormalFormError> {
    let table = state_ranks(pc)?;
    Ok(extract_terms(pc.signature(), pc, &table))
}

/// The normal form of `t`: its behaviour's normal term.
pub fn normalize(sig: &std::sync::Arc<Signature>, t: &Term) -> Term {
    extract_normal(&unfold(sig, t).pc).expect("unfoldings of terms are thin")
}
