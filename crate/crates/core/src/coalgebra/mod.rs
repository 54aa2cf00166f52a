//! Finite coalgebras over a signature, their successor multigraphs, paths and
//! behavioural equivalence.

mod refine;
mod scc;

use std::fmt;
use std::sync::Arc;

use num_bigint::BigUint;
use serde::Serialize;
use thiserror::Error;

use crate::signature::{FElem, OpId, Signature, SignatureError};

pub use refine::{beh_equal, minimize, refine_partition};
pub use scc::Condensation;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CoalgebraError {
    #[error("state {state} is out of range (coalgebra has {n_states} states)")]
    StateOutOfRange { state: usize, n_states: usize },
    #[error("transition of state {state} refers to state {target}, but there are only {n_states} states")]
    TargetOutOfRange {
        state: usize,
        target: usize,
        n_states: usize,
    },
    #[error("expected {expected} transitions, got {got}")]
    TransitionCount { expected: usize, got: usize },
    #[error("coalgebras are over different signatures")]
    SignatureMismatch,
    #[error(transparent)]
    Signature(#[from] SignatureError),
}

/// A finite coalgebra: states `0..n` and a transition `state -> F(state)`.
#[derive(Debug, Clone)]
pub struct Coalgebra {
    sig: Arc<Signature>,
    transitions: Vec<FElem<usize>>,
}

impl PartialEq for Coalgebra {
    fn eq(&self, other: &Self) -> bool {
        same_signature(&self.sig, &other.sig) && self.transitions == other.transitions
    }
}

impl Eq for Coalgebra {}

pub(crate) fn same_signature(a: &Arc<Signature>, b: &Arc<Signature>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

impl Coalgebra {
    /// Builds a coalgebra from already canonical transitions.
    pub fn new(
        sig: Arc<Signature>,
        transitions: Vec<FElem<usize>>,
    ) -> Result<Self, CoalgebraError> {
        let n = transitions.len();
        for (state, t) in transitions.iter().enumerate() {
            sig.op(t.op())?;
            if let Some(&target) = t.tuple().iter().find(|&&x| x >= n) {
                return Err(CoalgebraError::TargetOutOfRange {
                    state,
                    target,
                    n_states: n,
                });
            }
        }
        Ok(Coalgebra { sig, transitions })
    }

    /// Builds a coalgebra from raw `(op, tuple)` pairs, canonicalizing each tuple.
    pub fn from_raw(
        sig: Arc<Signature>,
        raw: impl IntoIterator<Item = (OpId, Vec<usize>)>,
    ) -> Result<Self, CoalgebraError> {
        let transitions = raw
            .into_iter()
            .map(|(op, tuple)| sig.canonical_tuple(op, tuple))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(sig, transitions)
    }

    /// Like [`Coalgebra::from_raw`] with operations given by name.
    pub fn from_named(
        sig: Arc<Signature>,
        raw: &[(&str, Vec<usize>)],
    ) -> Result<Self, CoalgebraError> {
        let ops = raw
            .iter()
            .map(|(name, tuple)| Ok((sig.lookup(name)?, tuple.clone())))
            .collect::<Result<Vec<_>, SignatureError>>()?;
        Self::from_raw(sig, ops)
    }

    pub fn signature(&self) -> &Arc<Signature> {
        &self.sig
    }

    pub fn n_states(&self) -> usize {
        self.transitions.len()
    }

    pub fn transitions(&self) -> &[FElem<usize>] {
        &self.transitions
    }

    pub fn transition(&self, state: usize) -> &FElem<usize> {
        &self.transitions[state]
    }

    pub fn check_state(&self, state: usize) -> Result<(), CoalgebraError> {
        if state < self.n_states() {
            Ok(())
        } else {
            Err(CoalgebraError::StateOutOfRange {
                state,
                n_states: self.n_states(),
            })
        }
    }

    /// Number of edges of the successor multigraph.
    pub fn n_edges(&self) -> usize {
        self.transitions.iter().map(|t| t.arity()).sum()
    }

    /// `Suc(t)`: pairs `(t', k)` with `k` below the multiplicity of `t'` in
    /// the transition of `t`, sorted.
    pub fn successors(&self, state: usize) -> Result<Vec<(usize, usize)>, CoalgebraError> {
        self.check_state(state)?;
        Ok(successors_of(&self.transitions[state]))
    }

    pub fn pointed(self, root: usize) -> Result<PointedCoalgebra, CoalgebraError> {
        PointedCoalgebra::new(self, root)
    }

    /// States reachable from `root`, in breadth-first order.
    pub fn reachable_from(&self, root: usize) -> Vec<usize> {
        let mut seen = vec![false; self.n_states()];
        let mut order = vec![root];
        seen[root] = true;
        let mut i = 0;
        while i < order.len() {
            let s = order[i];
            i += 1;
            for &x in self.transitions[s].tuple() {
                if !seen[x] {
                    seen[x] = true;
                    order.push(x);
                }
            }
        }
        order
    }

    /// Strongly connected components of the whole successor graph.
    pub fn sccs(&self) -> Condensation {
        scc::condense(self, 0..self.n_states())
    }

    /// Strongly connected components of the part reachable from `root`.
    pub fn sccs_from(&self, root: usize) -> Condensation {
        scc::condense(self, std::iter::once(root))
    }

    /// Cycles through `state` of length at most `maxlen`, in lexicographic order.
    pub fn cycles_through(&self, state: usize, maxlen: usize) -> Vec<FinitePath> {
        let mut out = Vec::new();
        let mut path = FinitePath::new(state);
        self.cycle_dfs(state, maxlen, &mut path, &mut |p| {
            out.push(p.clone());
            true
        });
        out
    }

    /// Depth-first enumeration of cycles; `visit` returns false to stop.
    pub(crate) fn cycle_dfs(
        &self,
        target: usize,
        maxlen: usize,
        path: &mut FinitePath,
        visit: &mut dyn FnMut(&FinitePath) -> bool,
    ) -> bool {
        if path.len() == maxlen {
            return true;
        }
        let here = path.end();
        for (next, k) in successors_of(&self.transitions[here]) {
            path.push(k, next);
            if next == target && !visit(path) {
                path.pop();
                return false;
            }
            if !self.cycle_dfs(target, maxlen, path, visit) {
                path.pop();
                return false;
            }
            path.pop();
        }
        true
    }

    /// Disjoint union; states of `other` are shifted by `self.n_states()`.
    pub fn disjoint_union(&self, other: &Coalgebra) -> Result<Coalgebra, CoalgebraError> {
        if !same_signature(&self.sig, &other.sig) {
            return Err(CoalgebraError::SignatureMismatch);
        }
        let offset = self.n_states();
        let mut transitions = self.transitions.clone();
        transitions.extend(
            other
                .transitions
                .iter()
                .map(|t| self.sig.map_elem(t, |&x| x + offset)),
        );
        Ok(Coalgebra {
            sig: self.sig.clone(),
            transitions,
        })
    }

    pub fn display_state(&self, state: usize) -> String {
        let t = &self.transitions[state];
        let args: Vec<String> = t.tuple().iter().map(|x| x.to_string()).collect();
        format!("{}({})", self.sig.name(t.op()), args.join(", "))
    }
}

pub(crate) fn successors_of(t: &FElem<usize>) -> Vec<(usize, usize)> {
    let mut xs = t.tuple().to_vec();
    xs.sort_unstable();
    let mut out = Vec::with_capacity(xs.len());
    for (i, &x) in xs.iter().enumerate() {
        let k = if i > 0 && xs[i - 1] == x {
            out.last()
                .map(|&(_, k): &(usize, usize)| k + 1)
                .unwrap_or(0)
        } else {
            0
        };
        out.push((x, k));
    }
    out
}

/// A coalgebra with a distinguished root state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointedCoalgebra {
    coalg: Coalgebra,
    root: usize,
}

impl PointedCoalgebra {
    pub fn new(coalg: Coalgebra, root: usize) -> Result<Self, CoalgebraError> {
        coalg.check_state(root)?;
        Ok(PointedCoalgebra { coalg, root })
    }

    pub fn coalgebra(&self) -> &Coalgebra {
        &self.coalg
    }

    pub fn into_coalgebra(self) -> Coalgebra {
        self.coalg
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn signature(&self) -> &Arc<Signature> {
        self.coalg.signature()
    }

    pub fn n_states(&self) -> usize {
        self.coalg.n_states()
    }

    pub fn with_root(&self, root: usize) -> Result<Self, CoalgebraError> {
        PointedCoalgebra::new(self.coalg.clone(), root)
    }

    /// All paths of length `depth` from the root, in lexicographic order of
    /// their `(state, multiplicity)` steps.
    pub fn paths_to_depth(&self, depth: usize) -> Vec<FinitePath> {
        let mut out = Vec::new();
        let mut path = FinitePath::new(self.root);
        self.paths_dfs(depth, &mut path, &mut out);
        out
    }

    fn paths_dfs(&self, depth: usize, path: &mut FinitePath, out: &mut Vec<FinitePath>) {
        if path.len() == depth {
            out.push(path.clone());
            return;
        }
        for (next, k) in successors_of(self.coalg.transition(path.end())) {
            path.push(k, next);
            self.paths_dfs(depth, path, out);
            path.pop();
        }
    }

    /// Number of paths of length `depth` from the root.
    pub fn path_count(&self, depth: usize) -> BigUint {
        let n = self.n_states();
        let mut counts = vec![BigUint::from(1u32); n];
        for _ in 0..depth {
            counts = (0..n)
                .map(|s| {
                    self.coalg
                        .transition(s)
                        .tuple()
                        .iter()
                        .map(|&x| &counts[x])
                        .sum()
                })
                .collect();
        }
        counts[self.root].clone()
    }

    /// Breadth-first shortest path from the root to `target`, if reachable.
    pub fn access_path(&self, target: usize) -> Option<FinitePath> {
        shortest_path(&self.coalg, self.root, target, |_| true)
    }

    /// Restriction to the states reachable from the root, renumbered in
    /// breadth-first order. Also returns the old-to-new index map.
    pub fn restrict_reachable(&self) -> (PointedCoalgebra, Vec<Option<usize>>) {
        let order = self.coalg.reachable_from(self.root);
        let mut index = vec![None; self.n_states()];
        for (i, &s) in order.iter().enumerate() {
            index[s] = Some(i);
        }
        let sig = self.coalg.sig.clone();
        let transitions = order
            .iter()
            .map(|&s| {
                sig.map_elem(self.coalg.transition(s), |&x| {
                    index[x].expect("successor of a reachable state is reachable")
                })
            })
            .collect();
        (
            PointedCoalgebra {
                coalg: Coalgebra { sig, transitions },
                root: 0,
            },
            index,
        )
    }
}

/// BFS over successor edges restricted to states accepted by `allowed`.
/// A path from a state to itself is empty. Every step takes the first copy
/// of its edge, so multiplicity indices are 0.
pub(crate) fn shortest_path(
    c: &Coalgebra,
    from: usize,
    to: usize,
    allowed: impl Fn(usize) -> bool,
) -> Option<FinitePath> {
    const NONE: u32 = u32::MAX;
    let mut parent = vec![NONE; c.n_states()];
    parent[from] = from as u32;
    let mut queue = vec![from];
    let mut head = 0;
    let mut found = from == to;
    while !found && head < queue.len() {
        let s = queue[head];
        head += 1;
        for &x in c.transition(s).tuple() {
            if parent[x] == NONE && allowed(x) {
                parent[x] = s as u32;
                queue.push(x);
                if x == to {
                    found = true;
                    break;
                }
            }
        }
    }
    if !found {
        return None;
    }
    let mut states = vec![to];
    let mut cur = to;
    while cur != from {
        cur = parent[cur] as usize;
        states.push(cur);
    }
    let mut path = FinitePath::new(from);
    for &x in states.iter().rev().skip(1) {
        path.push(0, x);
    }
    Some(path)
}

/// A finite path `t0 k1 t1 ... km tm` in the successor multigraph.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct FinitePath {
    states: Vec<usize>,
    mults: Vec<usize>,
}

impl FinitePath {
    pub fn new(start: usize) -> Self {
        FinitePath {
            states: vec![start],
            mults: Vec::new(),
        }
    }

    /// Builds a path from a start state and `(multiplicity, state)` steps.
    pub fn from_steps(start: usize, steps: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut p = FinitePath::new(start);
        for (k, x) in steps {
            p.push(k, x);
        }
        p
    }

    pub fn push(&mut self, k: usize, state: usize) {
        self.mults.push(k);
        self.states.push(state);
    }

    pub fn pop(&mut self) {
        if self.mults.pop().is_some() {
            self.states.pop();
        }
    }

    /// Number of steps.
    pub fn len(&self) -> usize {
        self.mults.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mults.is_empty()
    }

    pub fn start(&self) -> usize {
        self.states[0]
    }

    pub fn end(&self) -> usize {
        *self.states.last().expect("paths have a start state")
    }

    pub fn states(&self) -> &[usize] {
        &self.states
    }

    pub fn mults(&self) -> &[usize] {
        &self.mults
    }

    /// `(multiplicity, state)` steps after the start.
    pub fn steps(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.mults
            .iter()
            .copied()
            .zip(self.states[1..].iter().copied())
    }

    pub fn is_prefix_of(&self, other: &FinitePath) -> bool {
        self.len() <= other.len()
            && self.states[..] == other.states[..self.states.len()]
            && self.mults[..] == other.mults[..self.mults.len()]
    }

    pub fn comparable(&self, other: &FinitePath) -> bool {
        self.is_prefix_of(other) || other.is_prefix_of(self)
    }

    /// Concatenation; `other` must start where `self` ends.
    pub fn concat(&self, other: &FinitePath) -> FinitePath {
        debug_assert_eq!(self.end(), other.start());
        let mut p = self.clone();
        for (k, x) in other.steps() {
            p.push(k, x);
        }
        p
    }

    /// True iff every step is a successor with multiplicity of the previous state.
    pub fn is_valid_in(&self, c: &Coalgebra) -> bool {
        if self.states.iter().any(|&s| s >= c.n_states()) {
            return false;
        }
        self.states
            .windows(2)
            .zip(&self.mults)
            .all(|(w, &k)| successors_of(c.transition(w[0])).contains(&(w[1], k)))
    }

    pub fn is_cycle(&self) -> bool {
        !self.is_empty() && self.start() == self.end()
    }
}

impl fmt::Display for FinitePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.states[0])?;
        for (k, x) in self.steps() {
            write!(f, " {k} {x}")?;
        }
        Ok(())
    }
}

/// Small coalgebras used by tests across the crate.
pub mod fixtures {
    use super::*;
    use crate::signature::library;

    pub fn server_signature() -> Arc<Signature> {
        Arc::new(Signature::new(&library::server()).expect("valid signature"))
    }

    pub fn bag_signature() -> Arc<Signature> {
        Arc::new(Signature::new(&library::bag(2)).expect("valid signature"))
    }

    pub fn polynomial_signature() -> Arc<Signature> {
        Arc::new(Signature::new(&library::polynomial()).expect("valid signature"))
    }

    /// `s -> spawn(s, w1, w2)`, `w1 -> step(w1)`, `w2 -> done`; root `s`.
    pub fn server() -> PointedCoalgebra {
        Coalgebra::from_named(
            server_signature(),
            &[
                ("spawn", vec![0, 1, 2]),
                ("step", vec![1]),
                ("done", vec![]),
            ],
        )
        .and_then(|c| c.pointed(0))
        .expect("valid fixture")
    }

    /// `s -> {s, s}`.
    pub fn bag_loop() -> PointedCoalgebra {
        Coalgebra::from_named(bag_signature(), &[("bag2", vec![0, 0])])
            .and_then(|c| c.pointed(0))
            .expect("valid fixture")
    }

    /// `s -> b(s, s)` over the polynomial signature.
    pub fn full_binary_tree() -> PointedCoalgebra {
        Coalgebra::from_named(polynomial_signature(), &[("b", vec![0, 0])])
            .and_then(|c| c.pointed(0))
            .expect("valid fixture")
    }

    /// A seven-state unfolding of the bag loop: a depth-two tree of bags whose
    /// leaves point back to the root.
    pub fn bag_tree_with_back_edges() -> PointedCoalgebra {
        Coalgebra::from_named(
            bag_signature(),
            &[
                ("bag2", vec![1, 2]),
                ("bag2", vec![3, 4]),
                ("bag2", vec![5, 6]),
                ("bag2", vec![0, 0]),
                ("bag2", vec![0, 0]),
                ("bag2", vec![0, 0]),
                ("bag2", vec![0, 0]),
            ],
        )
        .and_then(|c| c.pointed(0))
        .expect("valid fixture")
    }

    /// A cycle of `n` unary `u` steps over the polynomial signature.
    pub fn u_cycle(n: usize) -> PointedCoalgebra {
        let raw: Vec<(&str, Vec<usize>)> = (0..n).map(|i| ("u", vec![(i + 1) % n])).collect();
        Coalgebra::from_named(polynomial_signature(), &raw)
            .and_then(|c| c.pointed(0))
            .expect("valid fixture")
    }
}
