//! Operational semantics: unfolding terms into finite coalgebras.
//!
//! An F-node steps to its own element; a G-node steps to its head context
//! with the G-node of its tail plugged into the hole. States are canonical
//! terms, so the reached set is the closure of the root under children,
//! context sides and stream tails, which is finite for lassos.

use std::collections::HashMap;
use std::sync::Arc;

use crate::coalgebra::{refine_partition, Coalgebra, CoalgebraError, PointedCoalgebra};
use crate::signature::{FElem, Signature};
use crate::terms::{Term, TermNode};
use crate::thinness::is_thin;

/// The unfolding of a term, with the state assigned to every reached term.
#[derive(Debug, Clone)]
pub struct UnfoldResult {
    pub pc: PointedCoalgebra,
    /// `terms[s]` is the term whose behaviour state `s` carries.
    pub terms: Vec<Term>,
    pub index: HashMap<Term, usize>,
}

/// Incrementally unfolds several terms into one shared coalgebra.
pub struct Unfolder {
    sig: Arc<Signature>,
    terms: Vec<Term>,
    index: HashMap<Term, usize>,
    transitions: Vec<Option<FElem<usize>>>,
}

impl Unfolder {
    pub fn new(sig: Arc<Signature>) -> Self {
        Unfolder {
            sig,
            terms: Vec::new(),
            index: HashMap::new(),
            transitions: Vec::new(),
        }
    }

    fn intern(&mut self, t: &Term, pending: &mut Vec<usize>) -> usize {
        if let Some(&s) = self.index.get(t) {
            return s;
        }
        let s = self.terms.len();
        self.terms.push(t.clone());
        self.index.insert(t.clone(), s);
        self.transitions.push(None);
        pending.push(s);
        s
    }

    /// Adds `t` and everything it reaches; returns the state of `t`.
    pub fn add(&mut self, t: &Term) -> usize {
        let mut pending = Vec::new();
        let root = self.intern(t, &mut pending);
        while let Some(s) = pending.pop() {
            let term = self.terms[s].clone();
            let sig = self.sig.clone();
            let elem = match term.node() {
                TermNode::F(e) => sig.map_elem(e, |c| self.intern(c, &mut pending)),
                TermNode::G(l) => {
                    let tail = Term::from_stream(l.tail());
                    let next = self.intern(&tail, &mut pending);
                    let head = sig.map_ctx(l.head(), |c| self.intern(c, &mut pending));
                    sig.plug(&head, next)
                }
            };
            self.transitions[s] = Some(elem);
        }
        root
    }

    pub fn state_of(&self, t: &Term) -> Option<usize> {
        self.index.get(t).copied()
    }

    pub fn finish(self, root: usize) -> UnfoldResult {
        let transitions = self
            .transitions
            .into_iter()
            .map(|t| t.expect("every interned term is expanded"))
            .collect();
        let c = Coalgebra::new(self.sig, transitions).expect("states come from the index");
        UnfoldResult {
            pc: PointedCoalgebra::new(c, root).expect("root was interned"),
            terms: self.terms,
            index: self.index,
        }
    }
}

pub fn unfold(sig: &Arc<Signature>, t: &Term) -> UnfoldResult {
    let mut u = Unfolder::new(sig.clone());
    let root = u.add(t);
    u.finish(root)
}

/// True iff `a` and `b` denote the same behaviour.
pub fn beh_equal_terms(sig: &Arc<Signature>, a: &Term, b: &Term) -> bool {
    let mut u = Unfolder::new(sig.clone());
    let sa = u.add(a);
    let sb = u.add(b);
    let r = u.finish(sa);
    let block = refine_partition(r.pc.coalgebra());
    block[sa] == block[sb]
}

/// Like [`beh_equal_terms`] for terms over possibly different signatures.
pub fn beh_equal_terms_checked(
    sig_a: &Arc<Signature>,
    a: &Term,
    sig_b: &Arc<Signature>,
    b: &Term,
) -> Result<bool, CoalgebraError> {
    if !crate::coalgebra::same_signature(sig_a, sig_b) {
        return Err(CoalgebraError::SignatureMismatch);
    }
    Ok(beh_equal_terms(sig_a, a, b))
}

/// Whether the behaviour of `t` is thin (it always should be).
pub fn check_constructible_thin(sig: &Arc<Signature>, t: &Term) -> bool {
    is_thin(&unfold(sig, t).pc).thin
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coalgebra::fixtures::*;
    use crate::coalgebra::{beh_equal, minimize};
    use crate::gen::random_term;
    use crate::terms::build::*;
    use crate::terms::{fold_candidates, unfold_step, Lasso};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn unfold_examples() {
        let sig = polynomial_signature();
        let u = omega(ctx(&sig, "u", 0, vec![]));
        let r = unfold(&sig, &u);
        assert_eq!(r.pc, u_cycle(1));

        let f = Term::f_named(&sig, "b", vec![u.clone(), u.clone()]).unwrap();
        let r = unfold(&sig, &f);
        assert_eq!(r.pc.n_states(), 2);
        assert_eq!(r.terms[r.pc.root()], f);

        let ssig = server_signature();
        let w1 = omega(ctx(&ssig, "step", 0, vec![]));
        let w2 = leaf(&ssig, "done");
        let g = omega(ctx(&ssig, "spawn", 0, vec![w1, w2]));
        let r = unfold(&ssig, &g);
        assert!(beh_equal(&r.pc, &server()).unwrap());
        assert_eq!(minimize(&r.pc).0.n_states(), 3);
    }

    #[test]
    fn transitions_follow_the_branch_map() {
        let sig = polynomial_signature();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..200 {
            let t = random_term(&sig, 14, &mut rng).unwrap();
            let r = unfold(&sig, &t);
            let c = r.pc.coalgebra();
            for (s, term) in r.terms.iter().enumerate() {
                let expected = match term.node() {
                    TermNode::F(e) => sig.map_elem(e, |x| r.index[x]),
                    TermNode::G(l) => {
                        let tail = Term::from_stream(l.tail());
                        sig.plug(&sig.map_ctx(l.head(), |x| r.index[x]), r.index[&tail])
                    }
                };
                assert_eq!(c.transition(s), &expected);
            }
        }
    }

    #[test]
    fn beh_equal_examples() {
        let sig = polynomial_signature();
        let a = leaf(&sig, "a");
        assert!(beh_equal_terms(&sig, &a, &a));
        let c = ctx(&sig, "b", 0, vec![a.clone()]);
        let g1 = Term::from_stream(Lasso::constant(c.clone()));
        let g2 = Term::g(vec![c.clone()], vec![c]).unwrap();
        assert_eq!(g1, g2);
        assert!(beh_equal_terms(&sig, &g1, &g2));
        let u = omega(ctx(&sig, "u", 0, vec![]));
        assert!(!beh_equal_terms(&sig, &u, &g1));
        assert!(beh_equal_terms_checked(&sig, &u, &server_signature(), &u).is_err());
    }

    #[test]
    fn unfold_step_is_sound() {
        for sig in [polynomial_signature(), server_signature(), bag_signature()] {
            let mut rng = ChaCha8Rng::seed_from_u64(4);
            for _ in 0..300 {
                let t = random_term(&sig, 14, &mut rng).unwrap();
                assert!(check_constructible_thin(&sig, &t));
                for pos in t.positions() {
                    let s = t.subterm_at(&pos).unwrap();
                    let rewritten = if s.is_g() {
                        unfold_step(&sig, &s).unwrap()
                    } else {
                        let folds = fold_candidates(&sig, &s).unwrap();
                        if folds.is_empty() {
                            continue;
                        }
                        folds[rng.random_range(0..folds.len())].clone()
                    };
                    let t2 = t.replace_at(&sig, &pos, rewritten).unwrap();
                    assert!(beh_equal_terms(&sig, &t, &t2));
                }
            }
        }
    }
}
