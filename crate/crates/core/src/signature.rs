//! Analytic functor signatures.
//!
//! A signature is a list of operation symbols, each with a finite arity and a
//! permutation group acting on the argument positions. An element of `F X` is
//! an operation together with an orbit of argument tuples; a context (an
//! element of the derivative `F' X`) is the same with one position replaced by
//! a hole.
//!
//! Orbits are stored as their lexicographically least member. For contexts the
//! hole is treated as a value ordered below every element, so the canonical
//! representative is the least full-length sequence with the hole in place.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default bound on the arity of operations whose group must be enumerated.
pub const DEFAULT_ARITY_CAP: usize = 8;

/// A permutation of `{0, .., n-1}` written as its image array: `p[k]` is the
/// image of `k`.
pub type Perm = Vec<usize>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SignatureError {
    #[error("operation `{op}`: arity {arity} exceeds the group enumeration cap {cap}")]
    ArityCapExceeded {
        op: String,
        arity: usize,
        cap: usize,
    },
    #[error("operation `{op}`: generator {generator:?} is not a permutation of 0..{arity}")]
    MalformedPermutation {
        op: String,
        arity: usize,
        generator: Vec<usize>,
    },
    #[error("duplicate operation id `{0}`")]
    DuplicateOp(String),
    #[error("unknown operation `{0}`")]
    UnknownOp(String),
    #[error("operation index {0} is out of range")]
    UnknownOpIndex(usize),
    #[error("operation `{op}` has arity {arity}, got {got} arguments")]
    LengthMismatch {
        op: String,
        arity: usize,
        got: usize,
    },
    #[error("operation `{op}` has arity {arity}, hole position {hole} is out of range")]
    HoleOutOfRange {
        op: String,
        arity: usize,
        hole: usize,
    },
}

/// Index of an operation symbol within its signature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct OpId(pub usize);

impl fmt::Display for OpId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// An operation symbol as written in a signature file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OperationSymbol {
    pub id: String,
    pub arity: usize,
    #[serde(default)]
    pub generators: Vec<Perm>,
}

/// The declarative form of a signature, matching the signature file format.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignatureSpec {
    pub ops: Vec<OperationSymbol>,
}

impl SignatureSpec {
    pub fn op(mut self, id: &str, arity: usize, generators: Vec<Perm>) -> Self {
        self.ops.push(OperationSymbol {
            id: id.to_string(),
            arity,
            generators,
        });
        self
    }
}

/// A finite permutation group, stored as the full sorted list of its elements.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PermGroup {
    arity: usize,
    elements: Vec<Perm>,
}

impl PermGroup {
    pub fn trivial(arity: usize) -> Self {
        PermGroup {
            arity,
            elements: vec![identity(arity)],
        }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    /// Elements in lexicographic order; the identity is always first.
    pub fn elements(&self) -> &[Perm] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn contains(&self, p: &[usize]) -> bool {
        self.elements
            .binary_search_by(|e| e.as_slice().cmp(p))
            .is_ok()
    }

    pub fn is_trivial(&self) -> bool {
        self.elements.len() == 1
    }

    pub fn is_symmetric(&self) -> bool {
        self.elements.len() == factorial(self.arity)
    }
}

pub fn identity(n: usize) -> Perm {
    (0..n).collect()
}

/// `(a ∘ b)(k) = a(b(k))`.
pub fn compose(a: &[usize], b: &[usize]) -> Perm {
    b.iter().map(|&k| a[k]).collect()
}

pub fn inverse(p: &[usize]) -> Perm {
    let mut inv = vec![0; p.len()];
    for (k, &v) in p.iter().enumerate() {
        inv[v] = k;
    }
    inv
}

fn factorial(n: usize) -> usize {
    (1..=n).product()
}

fn is_permutation(p: &[usize], n: usize) -> bool {
    if p.len() != n {
        return false;
    }
    let mut seen = vec![false; n];
    for &v in p {
        if v >= n || seen[v] {
            return false;
        }
        seen[v] = true;
    }
    true
}

/// Closes a generating set under composition.
pub fn enumerate_group(
    generators: &[Perm],
    arity: usize,
    cap: usize,
) -> Result<PermGroup, SignatureError> {
    enumerate_named("<anonymous>", generators, arity, cap)
}

fn enumerate_named(
    op: &str,
    generators: &[Perm],
    arity: usize,
    cap: usize,
) -> Result<PermGroup, SignatureError> {
    for g in generators {
        if !is_permutation(g, arity) {
            return Err(SignatureError::MalformedPermutation {
                op: op.to_string(),
                arity,
                generator: g.clone(),
            });
        }
    }
    let id = identity(arity);
    let gens: Vec<&Perm> = generators.iter().filter(|g| **g != id).collect();
    if gens.is_empty() {
        return Ok(PermGroup::trivial(arity));
    }
    if arity > cap {
        return Err(SignatureError::ArityCapExceeded {
            op: op.to_string(),
            arity,
            cap,
        });
    }
    let mut seen: HashSet<Perm> = HashSet::new();
    seen.insert(id.clone());
    let mut frontier = vec![id];
    while let Some(p) = frontier.pop() {
        for g in &gens {
            let q = compose(g, &p);
            if seen.insert(q.clone()) {
                frontier.push(q);
            }
        }
    }
    let mut elements: Vec<Perm> = seen.into_iter().collect();
    elements.sort();
    Ok(PermGroup { arity, elements })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum GroupShape {
    Trivial,
    Symmetric,
    General,
}

/// A compiled operation symbol with its enumerated group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Operation {
    name: String,
    arity: usize,
    generators: Vec<Perm>,
    group: PermGroup,
    shape: GroupShape,
}

impl Operation {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn generators(&self) -> &[Perm] {
        &self.generators
    }

    pub fn group(&self) -> &PermGroup {
        &self.group
    }

    fn canonical_tuple<E: Ord + Clone>(&self, mut raw: Vec<E>) -> Vec<E> {
        match self.shape {
            GroupShape::Trivial => raw,
            GroupShape::Symmetric => {
                raw.sort();
                raw
            }
            GroupShape::General => {
                // The orbit of φ is {φ ∘ σ : σ ∈ H}; candidate σ reads raw[σ[k]] at k.
                let mut best = &self.group.elements[0];
                for sigma in &self.group.elements[1..] {
                    let ord = sigma
                        .iter()
                        .zip(best.iter())
                        .map(|(&a, &b)| raw[a].cmp(&raw[b]))
                        .find(|o| o.is_ne());
                    if ord == Some(std::cmp::Ordering::Less) {
                        best = sigma;
                    }
                }
                best.iter().map(|&k| raw[k].clone()).collect()
            }
        }
    }

    fn canonical_context<E: Ord + Clone>(&self, hole: usize, sides: Vec<E>) -> (usize, Vec<E>) {
        match self.shape {
            GroupShape::Trivial => (hole, sides),
            GroupShape::Symmetric => {
                let mut sides = sides;
                sides.sort();
                (0, sides)
            }
            GroupShape::General => {
                let mut full: Vec<Option<&E>> = Vec::with_capacity(self.arity);
                let mut it = sides.iter();
                for k in 0..self.arity {
                    full.push(if k == hole { None } else { it.next() });
                }
                let mut best = &self.group.elements[0];
                for sigma in &self.group.elements[1..] {
                    let ord = sigma
                        .iter()
                        .zip(best.iter())
                        .map(|(&a, &b)| full[a].cmp(&full[b]))
                        .find(|o| o.is_ne());
                    if ord == Some(std::cmp::Ordering::Less) {
                        best = sigma;
                    }
                }
                let mut new_hole = 0;
                let mut new_sides = Vec::with_capacity(sides.len());
                for (k, &src) in best.iter().enumerate() {
                    match full[src] {
                        None => new_hole = k,
                        Some(e) => new_sides.push(e.clone()),
                    }
                }
                (new_hole, new_sides)
            }
        }
    }
}

/// An element of `F E`: an operation and the canonical member of a tuple orbit.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FElem<E> {
    op: OpId,
    tuple: Vec<E>,
}

impl<E> FElem<E> {
    pub fn op(&self) -> OpId {
        self.op
    }

    pub fn tuple(&self) -> &[E] {
        &self.tuple
    }

    pub fn arity(&self) -> usize {
        self.tuple.len()
    }
}

impl<E: Ord + Clone> FElem<E> {
    /// The image of the tuple.
    pub fn base(&self) -> BTreeSet<E> {
        self.tuple.iter().cloned().collect()
    }
}

/// An element of `F' E`: an operation, a hole position and the values at the
/// remaining positions (in position order), canonical under the group action.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ContextElem<E> {
    op: OpId,
    hole: usize,
    sides: Vec<E>,
}

impl<E> ContextElem<E> {
    pub fn op(&self) -> OpId {
        self.op
    }

    pub fn hole(&self) -> usize {
        self.hole
    }

    pub fn sides(&self) -> &[E] {
        &self.sides
    }

    /// Side values paired with their argument positions.
    pub fn positioned_sides(&self) -> impl Iterator<Item = (usize, &E)> {
        let hole = self.hole;
        self.sides
            .iter()
            .enumerate()
            .map(move |(i, e)| (if i < hole { i } else { i + 1 }, e))
    }
}

impl<E: Ord + Clone> ContextElem<E> {
    pub fn base(&self) -> BTreeSet<E> {
        self.sides.iter().cloned().collect()
    }
}

/// A compiled signature: operations with their enumerated symmetry groups.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Signature {
    ops: Vec<Operation>,
    by_name: HashMap<String, OpId>,
}

impl Signature {
    pub fn new(spec: &SignatureSpec) -> Result<Self, SignatureError> {
        Self::with_arity_cap(spec, DEFAULT_ARITY_CAP)
    }

    /// Compiles `spec`; operations with a nontrivial generating set must have
    /// arity at most `cap`.
    pub fn with_arity_cap(spec: &SignatureSpec, cap: usize) -> Result<Self, SignatureError> {
        let mut ops = Vec::with_capacity(spec.ops.len());
        let mut by_name = HashMap::new();
        for (i, sym) in spec.ops.iter().enumerate() {
            if by_name.insert(sym.id.clone(), OpId(i)).is_some() {
                return Err(SignatureError::DuplicateOp(sym.id.clone()));
            }
            let group = enumerate_named(&sym.id, &sym.generators, sym.arity, cap)?;
            let shape = if group.is_trivial() {
                GroupShape::Trivial
            } else if group.is_symmetric() {
                GroupShape::Symmetric
            } else {
                GroupShape::General
            };
            ops.push(Operation {
                name: sym.id.clone(),
                arity: sym.arity,
                generators: sym.generators.clone(),
                group,
                shape,
            });
        }
        Ok(Signature { ops, by_name })
    }

    pub fn spec(&self) -> SignatureSpec {
        SignatureSpec {
            ops: self
                .ops
                .iter()
                .map(|o| OperationSymbol {
                    id: o.name.clone(),
                    arity: o.arity,
                    generators: o.generators.clone(),
                })
                .collect(),
        }
    }

    pub fn ops(&self) -> &[Operation] {
        &self.ops
    }

    pub fn op_ids(&self) -> impl Iterator<Item = OpId> {
        (0..self.ops.len()).map(OpId)
    }

    pub fn op(&self, id: OpId) -> Result<&Operation, SignatureError> {
        self.ops
            .get(id.0)
            .ok_or(SignatureError::UnknownOpIndex(id.0))
    }

    pub fn lookup(&self, name: &str) -> Result<OpId, SignatureError> {
        self.by_name
            .get(name)
            .copied()
            .ok_or_else(|| SignatureError::UnknownOp(name.to_string()))
    }

    pub fn name(&self, id: OpId) -> &str {
        &self.ops[id.0].name
    }

    pub fn arity(&self, id: OpId) -> usize {
        self.ops[id.0].arity
    }

    /// True iff every group is trivial.
    pub fn is_polynomial(&self) -> bool {
        self.ops.iter().all(|o| o.group.is_trivial())
    }

    pub fn max_arity(&self) -> usize {
        self.ops.iter().map(|o| o.arity).max().unwrap_or(0)
    }

    pub fn canonical_tuple<E: Ord + Clone>(
        &self,
        op: OpId,
        raw: Vec<E>,
    ) -> Result<FElem<E>, SignatureError> {
        let o = self.op(op)?;
        if raw.len() != o.arity {
            return Err(SignatureError::LengthMismatch {
                op: o.name.clone(),
                arity: o.arity,
                got: raw.len(),
            });
        }
        Ok(FElem {
            op,
            tuple: o.canonical_tuple(raw),
        })
    }

    /// `sides` lists the values at every position except `hole`, in position order.
    pub fn canonical_context<E: Ord + Clone>(
        &self,
        op: OpId,
        hole: usize,
        sides: Vec<E>,
    ) -> Result<ContextElem<E>, SignatureError> {
        let o = self.op(op)?;
        if hole >= o.arity {
            return Err(SignatureError::HoleOutOfRange {
                op: o.name.clone(),
                arity: o.arity,
                hole,
            });
        }
        if sides.len() + 1 != o.arity {
            return Err(SignatureError::LengthMismatch {
                op: o.name.clone(),
                arity: o.arity,
                got: sides.len() + 1,
            });
        }
        let (hole, sides) = o.canonical_context(hole, sides);
        Ok(ContextElem { op, hole, sides })
    }

    /// Fills the hole of `context` with `x`.
    pub fn plug<E: Ord + Clone>(&self, context: &ContextElem<E>, x: E) -> FElem<E> {
        let o = &self.ops[context.op.0];
        let mut raw = Vec::with_capacity(o.arity);
        raw.extend(context.sides[..context.hole].iter().cloned());
        raw.push(x);
        raw.extend(context.sides[context.hole..].iter().cloned());
        FElem {
            op: context.op,
            tuple: o.canonical_tuple(raw),
        }
    }

    /// All orbit-distinct ways of writing `elem` as a context with one
    /// occurrence plugged in, sorted.
    pub fn decompositions<E: Ord + Clone>(&self, elem: &FElem<E>) -> Vec<(ContextElem<E>, E)> {
        let o = &self.ops[elem.op.0];
        let mut out: BTreeSet<(ContextElem<E>, E)> = BTreeSet::new();
        for u in 0..elem.tuple.len() {
            let sides: Vec<E> = elem
                .tuple
                .iter()
                .enumerate()
                .filter(|(k, _)| *k != u)
                .map(|(_, e)| e.clone())
                .collect();
            let (hole, sides) = o.canonical_context(u, sides);
            out.insert((
                ContextElem {
                    op: elem.op,
                    hole,
                    sides,
                },
                elem.tuple[u].clone(),
            ));
        }
        out.into_iter().collect()
    }

    pub fn map_elem<E, E2: Ord + Clone>(
        &self,
        elem: &FElem<E>,
        mut f: impl FnMut(&E) -> E2,
    ) -> FElem<E2> {
        let o = &self.ops[elem.op.0];
        let raw: Vec<E2> = elem.tuple.iter().map(&mut f).collect();
        FElem {
            op: elem.op,
            tuple: o.canonical_tuple(raw),
        }
    }

    pub fn map_ctx<E, E2: Ord + Clone>(
        &self,
        context: &ContextElem<E>,
        mut f: impl FnMut(&E) -> E2,
    ) -> ContextElem<E2> {
        let o = &self.ops[context.op.0];
        let sides: Vec<E2> = context.sides.iter().map(&mut f).collect();
        let (hole, sides) = o.canonical_context(context.hole, sides);
        ContextElem {
            op: context.op,
            hole,
            sides,
        }
    }

    /// Fallible variant of [`Signature::map_elem`].
    pub fn try_map_elem<E, E2: Ord + Clone, Err>(
        &self,
        elem: &FElem<E>,
        mut f: impl FnMut(&E) -> Result<E2, Err>,
    ) -> Result<FElem<E2>, Err> {
        let o = &self.ops[elem.op.0];
        let raw = elem
            .tuple
            .iter()
            .map(&mut f)
            .collect::<Result<Vec<_>, _>>()?;
        Ok(FElem {
            op: elem.op,
            tuple: o.canonical_tuple(raw),
        })
    }

    /// Applies `sigma` to a raw tuple: the result reads `raw[σ⁻¹(k)]` at `k`.
    pub fn act_on_tuple<E: Clone>(sigma: &[usize], raw: &[E]) -> Vec<E> {
        let inv = inverse(sigma);
        inv.iter().map(|&k| raw[k].clone()).collect()
    }
}

/// Signatures used throughout the examples and tests.
pub mod library {
    use super::*;

    /// Nullary `a`, unary `u`, binary `b`; all groups trivial.
    pub fn polynomial() -> SignatureSpec {
        SignatureSpec::default()
            .op("a", 0, vec![])
            .op("u", 1, vec![])
            .op("b", 2, vec![])
    }

    /// Bags of size 0 to `max`, each with the full symmetric group.
    pub fn bag(max: usize) -> SignatureSpec {
        let mut spec = SignatureSpec::default();
        for n in 0..=max {
            let mut gens = Vec::new();
            if n >= 2 {
                let mut swap = identity(n);
                swap.swap(0, 1);
                gens.push(swap);
                let rot: Perm = (0..n).map(|k| (k + 1) % n).collect();
                gens.push(rot);
            }
            spec = spec.op(&format!("bag{n}"), n, gens);
        }
        spec
    }

    /// Leaf, unary step and a ternary operation whose last two positions may swap.
    pub fn server() -> SignatureSpec {
        SignatureSpec::default()
            .op("done", 0, vec![])
            .op("step", 1, vec![])
            .op("spawn", 3, vec![vec![0, 2, 1]])
    }

    /// One operation `opK` of each arity `K` from 0 to `max`, all groups trivial.
    pub fn arities(max: usize) -> SignatureSpec {
        let mut spec = SignatureSpec::default();
        for n in 0..=max {
            spec = spec.op(&format!("op{n}"), n, vec![]);
        }
        spec
    }

    /// Cyclic lists of length 0 to `max`.
    pub fn cyclic(max: usize) -> SignatureSpec {
        let mut spec = SignatureSpec::default();
        for n in 0..=max {
            let gens = if n >= 2 {
                vec![(0..n).map(|k| (k + 1) % n).collect()]
            } else {
                vec![]
            };
            spec = spec.op(&format!("cyc{n}"), n, gens);
        }
        spec
    }
}
