//! Shared inputs for the criterion benchmarks.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thincoalg_core::gen::{random_coalgebra, random_term};
use thincoalg_core::signature::{library, Signature};
use thincoalg_core::{PointedCoalgebra, Term};

/// Random coalgebra over one operation of each arity 0 to 6, rooted at 0.
pub fn coalgebra(n: usize, mean_degree: f64, seed: u64) -> PointedCoalgebra {
    let sig = Arc::new(Signature::new(&library::arities(6)).expect("valid signature"));
    random_coalgebra(&sig, n, mean_degree, &mut ChaCha8Rng::seed_from_u64(seed))
        .pointed(0)
        .expect("nonempty")
}

/// A long `u`-cycle: thin, one component.
pub fn thin_cycle(n: usize) -> PointedCoalgebra {
    thincoalg_core::coalgebra::fixtures::u_cycle(n)
}

pub fn polynomial() -> Arc<Signature> {
    Arc::new(Signature::new(&library::polynomial()).expect("valid signature"))
}

pub fn terms(sig: &Signature, count: usize, budget: usize, seed: u64) -> Vec<Term> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| random_term(sig, budget, &mut rng).expect("signature has constants"))
        .collect()
}
