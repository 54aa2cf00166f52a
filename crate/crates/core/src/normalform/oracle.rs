//! Exhaustive search for normal terms among all terms up to a size bound.
//!
//! A term is normal iff its subterms are normal and no normal term of
//! strictly smaller rank has the same behaviour. Restricted to a pool closed
//! under subterms, this is decided by walking the pool in rank order.
//! Behaviours are compared by partition refinement on the joint unfolding of
//! the pool, independently of the normal-form extraction.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use super::NormalFormError;
use crate::coalgebra::refine_partition;
use crate::semantics::Unfolder;
use crate::signature::{ContextElem, OpId, Signature};
use crate::terms::{Rank, Term};

pub struct BruteForceOracle {
    bound: usize,
    pool: Vec<Term>,
    class_of: HashMap<Term, usize>,
    normal: BTreeMap<usize, Term>,
    /// Classes in which more than one pool term passed the normality test.
    ambiguous: BTreeSet<usize>,
}

/// All splits of `total` into `parts` positive summands.
fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 0 {
        return if total == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    for first in 1..=total.saturating_sub(parts - 1) {
        for mut rest in compositions(total - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

fn products<T: Clone>(choices: &[&[T]]) -> Vec<Vec<T>> {
    let mut out = vec![Vec::new()];
    for opts in choices {
        let mut next = Vec::with_capacity(out.len() * opts.len());
        for prefix in &out {
            for o in opts.iter() {
                let mut v = prefix.clone();
                v.push(o.clone());
                next.push(v);
            }
        }
        out = next;
    }
    out
}

/// Every canonical term of size at most `bound`, grouped by size.
pub(crate) fn enumerate_terms(sig: &Signature, bound: usize) -> Vec<Vec<Term>> {
    let mut by_size: Vec<BTreeSet<Term>> = vec![BTreeSet::new(); bound + 1];
    let mut ctx_by_size: Vec<BTreeSet<ContextElem<Term>>> = vec![BTreeSet::new(); bound + 1];
    let ops: Vec<OpId> = sig.op_ids().collect();
    for n in 1..=bound {
        let frozen: Vec<Vec<Term>> = by_size
            .iter()
            .map(|s| s.iter().cloned().collect())
            .collect();
        for &op in &ops {
            let k = sig.arity(op);
            for sizes in compositions(n - 1, k) {
                let opts: Vec<&[Term]> = sizes.iter().map(|&s| frozen[s].as_slice()).collect();
                for children in products(&opts) {
                    let t = Term::f(sig, op, children).expect("arity matches");
                    by_size[t.size()].insert(t);
                }
            }
            if k > 0 {
                for sizes in compositions(n - 1, k - 1) {
                    let opts: Vec<&[Term]> = sizes.iter().map(|&s| frozen[s].as_slice()).collect();
                    for sides in products(&opts) {
                        for hole in 0..k {
                            let c = sig
                                .canonical_context(op, hole, sides.clone())
                                .expect("arity matches");
                            ctx_by_size[n].insert(c);
                        }
                    }
                }
            }
        }
        // G-nodes of size n: context sequences of total size n - 1, split into prefix and period.
        let ctxs: Vec<Vec<ContextElem<Term>>> = ctx_by_size
            .iter()
            .map(|s| s.iter().cloned().collect())
            .collect();
        for len in 1..n {
            for sizes in compositions(n - 1, len) {
                let opts: Vec<&[ContextElem<Term>]> =
                    sizes.iter().map(|&s| ctxs[s].as_slice()).collect();
                for seq in products(&opts) {
                    for split in 0..len {
                        let t = Term::g(seq[..split].to_vec(), seq[split..].to_vec())
                            .expect("nonempty period");
                        by_size[t.size()].insert(t);
                    }
                }
            }
        }
    }
    by_size
        .into_iter()
        .map(|s| s.into_iter().collect())
        .collect()
}

impl BruteForceOracle {
    /// Builds the pool of all terms of size at most `bound` and classifies it;
    /// `extra` terms are unfolded alongside so they can be queried.
    pub fn new(sig: &Arc<Signature>, bound: usize, extra: &[Term]) -> Self {
        let pool: Vec<Term> = enumerate_terms(sig, bound).into_iter().flatten().collect();
        let mut unfolder = Unfolder::new(sig.clone());
        let mut states = HashMap::new();
        for t in pool.iter().chain(extra) {
            states.insert(t.clone(), unfolder.add(t));
        }
        let root = states.values().next().copied().unwrap_or(0);
        let unfolded = unfolder.finish(root);
        let block = refine_partition(unfolded.pc.coalgebra());
        let class_of: HashMap<Term, usize> =
            states.into_iter().map(|(t, s)| (t, block[s])).collect();

        let mut sorted = pool.clone();
        sorted.sort_by(|a, b| a.rank().cmp(&b.rank()).then_with(|| a.cmp(b)));
        let mut is_normal: BTreeSet<Term> = BTreeSet::new();
        let mut best_rank: HashMap<usize, Rank> = HashMap::new();
        let mut normal: BTreeMap<usize, Term> = BTreeMap::new();
        let mut ambiguous = BTreeSet::new();
        let mut i = 0;
        while i < sorted.len() {
            let r = sorted[i].rank();
            let mut j = i;
            let mut found = Vec::new();
            while j < sorted.len() && sorted[j].rank() == r {
                let t = &sorted[j];
                let class = class_of[t];
                let beaten = best_rank.get(&class).is_some_and(|&b| b < r);
                if !beaten && t.subterms().iter().all(|s| is_normal.contains(s)) {
                    found.push((class, t.clone()));
                }
                j += 1;
            }
            for (class, t) in found {
                best_rank.entry(class).or_insert(r);
                match normal.get(&class) {
                    Some(existing) if existing.rank() == r => {
                        ambiguous.insert(class);
                    }
                    Some(_) => {}
                    None => {
                        normal.insert(class, t.clone());
                    }
                }
                is_normal.insert(t);
            }
            i = j;
        }
        BruteForceOracle {
            bound,
            pool,
            class_of,
            normal,
            ambiguous,
        }
    }

    pub fn pool(&self) -> &[Term] {
        &self.pool
    }

    /// Whether two pool terms passed the normality test in the class of `t`.
    pub fn is_ambiguous(&self, t: &Term) -> bool {
        self.class_of
            .get(t)
            .is_some_and(|c| self.ambiguous.contains(c))
    }

    /// The least-rank normal pool term with the behaviour of `t`.
    pub fn query(&self, t: &Term) -> Result<Term, NormalFormError> {
        let class = self.class_of.get(t).ok_or(NormalFormError::UnknownTerm)?;
        self.normal
            .get(class)
            .cloned()
            .ok_or(NormalFormError::BoundExceeded { bound: self.bound })
    }
}

/// One-off oracle query for `t`.
pub fn brute_force_normal(
    sig: &Arc<Signature>,
    t: &Term,
    bound: usize,
) -> Result<Term, NormalFormError> {
    BruteForceOracle::new(sig, bound, std::slice::from_ref(t)).query(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coalgebra::fixtures::*;
    use crate::normalform::normalize;
    use crate::terms::build::*;

    #[test]
    fn compositions_count() {
        assert_eq!(compositions(4, 2).len(), 3);
        assert_eq!(compositions(0, 0), vec![Vec::<usize>::new()]);
        assert!(compositions(1, 2).is_empty());
    }

    #[test]
    fn small_pool_contents() {
        let sig = polynomial_signature();
        let by_size = enumerate_terms(&sig, 2);
        let names: Vec<String> = by_size
            .iter()
            .flatten()
            .map(|t| t.display(&sig).to_string())
            .collect();
        assert_eq!(names, vec!["a", "u(a)", "(u(_))^ω"]);
        for (n, ts) in by_size.iter().enumerate() {
            assert!(ts.iter().all(|t| t.size() == n));
        }
    }

    #[test]
    fn oracle_examples() {
        let sig = polynomial_signature();
        let u = omega(ctx(&sig, "u", 0, vec![]));
        assert_eq!(brute_force_normal(&sig, &u, 3).unwrap(), u);
        let f = Term::f_named(&sig, "u", vec![u.clone()]).unwrap();
        assert_eq!(
            brute_force_normal(&sig, &f, 3).unwrap(),
            normalize(&sig, &f)
        );
        let a = leaf(&sig, "a");
        let deep = omega(ctx(&sig, "b", 0, vec![omega(ctx(&sig, "b", 1, vec![a]))]));
        assert_eq!(
            brute_force_normal(&sig, &deep, 3),
            Err(NormalFormError::BoundExceeded { bound: 3 })
        );
    }
}
