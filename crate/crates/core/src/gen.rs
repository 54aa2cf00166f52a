//! Seeded random coalgebras and terms.

use std::sync::Arc;

use rand::seq::IndexedRandom;
use rand::Rng;

use crate::coalgebra::Coalgebra;
use crate::signature::{OpId, Signature};
use crate::terms::{Lasso, Term, TermError};

/// Picks an arity whose expectation is `mean`, mixing the two available
/// arities closest to it.
fn pick_arity(by_arity: &[(usize, Vec<OpId>)], mean: f64, rng: &mut impl Rng) -> usize {
    let lo = by_arity
        .iter()
        .rev()
        .find(|(a, _)| (*a as f64) <= mean)
        .unwrap_or(&by_arity[0]);
    let hi = by_arity
        .iter()
        .find(|(a, _)| (*a as f64) >= mean)
        .unwrap_or(&by_arity[by_arity.len() - 1]);
    if lo.0 >= hi.0 {
        return lo.0;
    }
    let p_hi = (mean - lo.0 as f64) / (hi.0 - lo.0) as f64;
    if rng.random_bool(p_hi.clamp(0.0, 1.0)) {
        hi.0
    } else {
        lo.0
    }
}

fn ops_by_arity(sig: &Signature) -> Vec<(usize, Vec<OpId>)> {
    let mut by: Vec<(usize, Vec<OpId>)> = Vec::new();
    for op in sig.op_ids() {
        let a = sig.arity(op);
        match by.iter_mut().find(|(x, _)| *x == a) {
            Some((_, v)) => v.push(op),
            None => by.push((a, vec![op])),
        }
    }
    by.sort();
    by
}

/// A coalgebra on `n` states whose mean out-degree is close to `mean_degree`
/// (clamped to the arities the signature offers). Targets are uniform.
pub fn random_coalgebra(
    sig: &Arc<Signature>,
    n: usize,
    mean_degree: f64,
    rng: &mut impl Rng,
) -> Coalgebra {
    let by_arity = ops_by_arity(sig);
    let raw: Vec<(OpId, Vec<usize>)> = (0..n)
        .map(|_| {
            let a = pick_arity(&by_arity, mean_degree, rng);
            let ops = &by_arity
                .iter()
                .find(|(x, _)| *x == a)
                .expect("arity exists")
                .1;
            let op = *ops.choose(rng).expect("nonempty");
            (op, (0..a).map(|_| rng.random_range(0..n)).collect())
        })
        .collect();
    Coalgebra::from_raw(sig.clone(), raw).expect("generated targets are in range")
}

/// A coalgebra with `copies` copies of each state of a random `base_n`-state
/// coalgebra; every target is redirected to a random copy. Projection onto
/// the base is a coalgebra morphism, so minimization is rarely trivial.
pub fn random_expanded_coalgebra(
    sig: &Arc<Signature>,
    base_n: usize,
    copies: usize,
    mean_degree: f64,
    rng: &mut impl Rng,
) -> Coalgebra {
    let base = random_coalgebra(sig, base_n, mean_degree, rng);
    let raw: Vec<(OpId, Vec<usize>)> = (0..base_n * copies)
        .map(|s| {
            let t = base.transition(s / copies);
            let tuple = t
                .tuple()
                .iter()
                .map(|&x| x * copies + rng.random_range(0..copies))
                .collect();
            (t.op(), tuple)
        })
        .collect();
    Coalgebra::from_raw(sig.clone(), raw).expect("generated targets are in range")
}

/// A random finitary term of size roughly at most `budget`.
///
/// G-nodes get a prefix of length 0 or 1 and a period of length 1 or 2.
pub fn random_term(sig: &Signature, budget: usize, rng: &mut impl Rng) -> Result<Term, TermError> {
    let nullary: Vec<OpId> = sig.op_ids().filter(|&o| sig.arity(o) == 0).collect();
    let unary: Vec<OpId> = sig.op_ids().filter(|&o| sig.arity(o) == 1).collect();
    if nullary.is_empty() && unary.is_empty() {
        return Err(TermError::NoFiniteTerms);
    }
    let gen = TermGen {
        sig,
        nullary,
        unary,
        positive: sig.op_ids().filter(|&o| sig.arity(o) > 0).collect(),
    };
    gen.term(budget, rng)
}

struct TermGen<'a> {
    sig: &'a Signature,
    nullary: Vec<OpId>,
    unary: Vec<OpId>,
    positive: Vec<OpId>,
}

impl TermGen<'_> {
    fn leaf(&self, rng: &mut impl Rng) -> Result<Term, TermError> {
        let use_nullary =
            self.unary.is_empty() || (!self.nullary.is_empty() && rng.random_bool(0.5));
        if use_nullary {
            Term::f(
                self.sig,
                *self.nullary.choose(rng).expect("nonempty"),
                vec![],
            )
        } else {
            let op = *self.unary.choose(rng).expect("nonempty");
            let c = self.sig.canonical_context(op, 0, vec![])?;
            Ok(Term::from_stream(Lasso::constant(c)))
        }
    }

    fn split(&self, budget: usize, parts: usize, rng: &mut impl Rng) -> Vec<usize> {
        (0..parts)
            .map(|_| {
                let share = (budget / parts.max(1)).max(1);
                rng.random_range(1..=share)
            })
            .collect()
    }

    fn term(&self, budget: usize, rng: &mut impl Rng) -> Result<Term, TermError> {
        if budget <= 2 {
            return self.leaf(rng);
        }
        if rng.random_bool(0.5) {
            let fits: Vec<OpId> = self
                .sig
                .op_ids()
                .filter(|&o| self.sig.arity(o) < budget)
                .collect();
            let op = *fits
                .choose(rng)
                .expect("budget admits nullary or unary ops");
            let budgets = self.split(budget - 1, self.sig.arity(op), rng);
            let children = budgets
                .into_iter()
                .map(|b| self.term(b, rng))
                .collect::<Result<Vec<_>, _>>()?;
            Term::f(self.sig, op, children)
        } else {
            let prefix_len = rng.random_range(0..=1);
            let period_len = rng.random_range(1..=2);
            let mut contexts = Vec::new();
            let per = (budget - 1) / (prefix_len + period_len);
            for _ in 0..prefix_len + period_len {
                let fits: Vec<OpId> = self
                    .positive
                    .iter()
                    .copied()
                    .filter(|&o| self.sig.arity(o) <= per.max(1))
                    .collect();
                let op = match fits.choose(rng) {
                    Some(&op) => op,
                    None => *self.unary.choose(rng).unwrap_or(&self.positive[0]),
                };
                let arity = self.sig.arity(op);
                let hole = rng.random_range(0..arity);
                let budgets = self.split(per.saturating_sub(1).max(1), arity - 1, rng);
                let sides = budgets
                    .into_iter()
                    .map(|b| self.term(b, rng))
                    .collect::<Result<Vec<_>, _>>()?;
                contexts.push(self.sig.canonical_context(op, hole, sides)?);
            }
            let period = contexts.split_off(prefix_len);
            Term::g(contexts, period)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coalgebra::fixtures::*;
    use crate::coalgebra::PointedCoalgebra;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn same_seed_same_output() {
        let sig = polynomial_signature();
        let a = random_coalgebra(&sig, 50, 1.5, &mut ChaCha8Rng::seed_from_u64(3));
        let b = random_coalgebra(&sig, 50, 1.5, &mut ChaCha8Rng::seed_from_u64(3));
        assert_eq!(a, b);
        let s = server_signature();
        let x = random_term(&s, 20, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let y = random_term(&s, 20, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(x, y);
    }

    #[test]
    fn mean_degree_is_respected() {
        let sig = polynomial_signature();
        let c = random_coalgebra(&sig, 10_000, 1.5, &mut ChaCha8Rng::seed_from_u64(1));
        let mean = c.n_edges() as f64 / c.n_states() as f64;
        assert!((mean - 1.5).abs() < 0.05, "{mean}");
    }

    #[test]
    fn expansion_projects_onto_base() {
        let sig = bag_signature();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let c = random_expanded_coalgebra(&sig, 4, 3, 1.0, &mut rng);
        assert_eq!(c.n_states(), 12);
        let pc = PointedCoalgebra::new(c, 0).unwrap();
        assert!(crate::coalgebra::minimize(&pc).0.n_states() <= 4);
    }

    #[test]
    fn terms_need_small_arities() {
        let spec = crate::signature::SignatureSpec::default().op("b", 2, vec![]);
        let sig = Signature::new(&spec).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(
            random_term(&sig, 5, &mut rng),
            Err(TermError::NoFiniteTerms)
        );
    }

    #[test]
    fn term_sizes_stay_bounded() {
        let sig = polynomial_signature();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut saw_g = false;
        for _ in 0..200 {
            let t = random_term(&sig, 16, &mut rng).unwrap();
            saw_g |= t.is_g();
            assert!(t.size() <= 40, "{}", t.size());
        }
        assert!(saw_g);
    }
}
