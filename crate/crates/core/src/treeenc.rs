//! Tree encodings of terms over polynomial signatures and Cantor-Bendixson
//! ranks of regular thin trees.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::rc::Rc;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::coalgebra::PointedCoalgebra;
use crate::semantics::unfold;
use crate::signature::{ContextElem, Signature};
use crate::terms::{Term, TermNode};
use crate::thinness::{verdict_from, NonThinWitness};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeEncError {
    #[error("tree encodings need a polynomial signature (operation `{0}` has a nontrivial group)")]
    NotPolynomial(String),
    #[error("coalgebra is not thin (state {} has two incomparable cycles)", .0.state())]
    NotThin(Box<NonThinWitness>),
}

/// A prefix-closed set of words over branch directions, truncated at `depth`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WordTree {
    pub depth: usize,
    pub words: BTreeSet<Vec<usize>>,
}

impl WordTree {
    pub fn is_prefix_closed(&self) -> bool {
        self.words
            .iter()
            .all(|w| w.is_empty() || self.words.contains(&w[..w.len() - 1]))
            && self.words.contains(&Vec::new())
    }

    /// Words as text, sorted: `ε` for the empty word, digits concatenated
    /// when every letter is below ten and dot-separated otherwise.
    pub fn lines(&self) -> Vec<String> {
        let dotted = self.words.iter().flatten().any(|&k| k >= 10);
        self.words
            .iter()
            .map(|w| {
                if w.is_empty() {
                    "ε".to_string()
                } else if dotted {
                    w.iter()
                        .map(|k| k.to_string())
                        .collect::<Vec<_>>()
                        .join(".")
                } else {
                    w.iter().map(|k| k.to_string()).collect()
                }
            })
            .collect()
    }
}

impl fmt::Display for WordTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for line in self.lines() {
            writeln!(f, "{line}")?;
        }
        Ok(())
    }
}

pub fn assert_polynomial(sig: &Signature) -> bool {
    sig.is_polynomial()
}

fn require_polynomial(sig: &Signature) -> Result<(), TreeEncError> {
    match sig.ops().iter().find(|o| !o.group().is_trivial()) {
        Some(o) => Err(TreeEncError::NotPolynomial(o.name().to_string())),
        None => Ok(()),
    }
}

type Words = Rc<BTreeSet<Vec<usize>>>;

struct Encoder {
    memo: HashMap<(Term, usize), Words>,
}

fn prefixed(into: &mut BTreeSet<Vec<usize>>, prefix: &[usize], words: &BTreeSet<Vec<usize>>) {
    for w in words {
        let mut v = prefix.to_vec();
        v.extend_from_slice(w);
        into.insert(v);
    }
}

impl Encoder {
    fn enc(&mut self, t: &Term, depth: usize) -> Words {
        if let Some(w) = self.memo.get(&(t.clone(), depth)) {
            return w.clone();
        }
        let mut out = BTreeSet::new();
        match t.node() {
            TermNode::F(e) => {
                out.insert(Vec::new());
                if depth > 0 {
                    for (k, child) in e.tuple().iter().enumerate() {
                        let sub = self.enc(child, depth - 1);
                        prefixed(&mut out, &[k], &sub);
                    }
                }
            }
            TermNode::G(l) => {
                let mut spine = Vec::new();
                for n in 0..=depth {
                    let c = l.at(n);
                    let glued = self.context(c, depth - n);
                    prefixed(&mut out, &spine, &glued);
                    spine.push(c.hole());
                }
            }
        }
        let out = Rc::new(out);
        self.memo.insert((t.clone(), depth), out.clone());
        out
    }

    /// The context's own node with its side trees glued in, hole dropped.
    fn context(&mut self, c: &ContextElem<Term>, depth: usize) -> BTreeSet<Vec<usize>> {
        let mut out = BTreeSet::from([Vec::new()]);
        if depth > 0 {
            for (k, side) in c.positioned_sides() {
                let sub = self.enc(side, depth - 1);
                prefixed(&mut out, &[k], &sub);
            }
        }
        out
    }
}

/// Structural tree encoding of `t`, truncated at `depth`.
pub fn enc(sig: &Signature, t: &Term, depth: usize) -> Result<WordTree, TreeEncError> {
    require_polynomial(sig)?;
    let mut e = Encoder {
        memo: HashMap::new(),
    };
    let words = (*e.enc(t, depth)).clone();
    Ok(WordTree { depth, words })
}

/// Domain of the behaviour of `t`, read off its unfolding to `depth`.
pub fn dom_tree(sig: &Arc<Signature>, t: &Term, depth: usize) -> Result<WordTree, TreeEncError> {
    require_polynomial(sig)?;
    let u = unfold(sig, t);
    let c = u.pc.coalgebra();
    let mut words = BTreeSet::new();
    let mut level = vec![(Vec::new(), u.pc.root())];
    for d in 0..=depth {
        let mut next = Vec::new();
        for (w, s) in level {
            if d < depth {
                for (k, &x) in c.transition(s).tuple().iter().enumerate() {
                    let mut v = w.clone();
                    v.push(k);
                    next.push((v, x));
                }
            }
            words.insert(w);
        }
        level = next;
    }
    Ok(WordTree { depth, words })
}

/// Cantor-Bendixson rank of the tree unravelled from the root: along the
/// condensation, a loop adds one to the largest rank among its exits.
pub fn cb_rank(pc: &PointedCoalgebra) -> Result<usize, TreeEncError> {
    let c = pc.coalgebra();
    require_polynomial(c.signature())?;
    let cond = c.sccs_from(pc.root());
    if let Some(w) = verdict_from(pc, &cond).witness {
        return Err(TreeEncError::NotThin(Box::new(w)));
    }
    let mut value = vec![0usize; cond.len()];
    for id in 0..cond.len() {
        let below = cond.edges[id].iter().map(|&d| value[d]).max().unwrap_or(0);
        value[id] = if cond.cyclic[id] { 1 + below } else { below };
    }
    Ok(value[cond.comp(pc.root())])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coalgebra::fixtures::*;
    use crate::coalgebra::{minimize, Coalgebra};
    use crate::gen::random_term;
    use crate::normalform::normalize;
    use crate::terms::build::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn words(ws: &[&[usize]]) -> BTreeSet<Vec<usize>> {
        ws.iter().map(|w| w.to_vec()).collect()
    }

    #[test]
    fn polynomial_check() {
        assert!(assert_polynomial(&polynomial_signature()));
        assert!(!assert_polynomial(&bag_signature()));
        assert!(!assert_polynomial(&server_signature()));
        let t = leaf(&bag_signature(), "bag0");
        assert!(matches!(
            enc(&bag_signature(), &t, 2),
            Err(TreeEncError::NotPolynomial(_))
        ));
    }

    #[test]
    fn enc_examples() {
        let sig = polynomial_signature();
        let u = omega(ctx(&sig, "u", 0, vec![]));
        let e = enc(&sig, &u, 3).unwrap();
        assert_eq!(e.words, words(&[&[], &[0], &[0, 0], &[0, 0, 0]]));
        assert_eq!(e.lines(), vec!["ε", "0", "00", "000"]);

        let a = leaf(&sig, "a");
        let f = Term::f_named(&sig, "b", vec![a.clone(), u.clone()]).unwrap();
        let mut expected = BTreeSet::from([vec![]]);
        prefixed(&mut expected, &[0], &enc(&sig, &a, 2).unwrap().words);
        prefixed(&mut expected, &[1], &enc(&sig, &u, 2).unwrap().words);
        assert_eq!(enc(&sig, &f, 3).unwrap().words, expected);

        let g = omega(ctx(&sig, "b", 1, vec![u.clone()]));
        assert_eq!(
            enc(&sig, &g, 2).unwrap().words,
            words(&[&[], &[0], &[1], &[0, 0], &[1, 0], &[1, 1]])
        );
        assert_eq!(enc(&sig, &a, 5).unwrap().words, words(&[&[]]));
    }

    #[test]
    fn enc_matches_dom() {
        let sig = polynomial_signature();
        let u = omega(ctx(&sig, "u", 0, vec![]));
        assert_eq!(enc(&sig, &u, 3).unwrap(), dom_tree(&sig, &u, 3).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..100 {
            let t = random_term(&sig, 14, &mut rng).unwrap();
            for d in [1, 4, 7] {
                let e = enc(&sig, &t, d).unwrap();
                assert!(e.is_prefix_closed());
                assert_eq!(e, dom_tree(&sig, &t, d).unwrap());
            }
        }
    }

    #[test]
    fn cb_examples() {
        assert_eq!(cb_rank(&u_cycle(1)).unwrap(), 1);
        let c = Coalgebra::from_named(polynomial_signature(), &[("b", vec![0, 1]), ("u", vec![1])])
            .unwrap();
        assert_eq!(cb_rank(&c.pointed(0).unwrap()).unwrap(), 2);
        assert!(matches!(
            cb_rank(&full_binary_tree()),
            Err(TreeEncError::NotThin(_))
        ));
        assert!(matches!(
            cb_rank(&server()),
            Err(TreeEncError::NotPolynomial(_))
        ));
    }

    #[test]
    fn cb_rank_is_normal_major() {
        let sig = polynomial_signature();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..200 {
            let t = random_term(&sig, 16, &mut rng).unwrap();
            let m = minimize(&unfold(&sig, &t).pc).0;
            assert_eq!(cb_rank(&m).unwrap(), normalize(&sig, &t).rank().major);
        }
    }
}
