//! Partition refinement for behavioural equivalence.

use std::collections::HashMap;

use super::{Coalgebra, CoalgebraError, PointedCoalgebra};
use crate::signature::FElem;

/// Coarsest partition in which two states share a block iff their
/// transitions, with states replaced by block ids, are equal elements of `F`.
/// Block ids are numbered by first occurrence.
pub fn refine_partition(c: &Coalgebra) -> Vec<usize> {
    let sig = c.signature();
    let n = c.n_states();
    let mut block = vec![0usize; n];
    let mut n_blocks = usize::from(n > 0);
    loop {
        let mut ids: HashMap<(usize, FElem<usize>), usize> = HashMap::with_capacity(n);
        let mut next = vec![0usize; n];
        for s in 0..n {
            let key = (block[s], sig.map_elem(c.transition(s), |&x| block[x]));
            let fresh = ids.len();
            next[s] = *ids.entry(key).or_insert(fresh);
        }
        let count = ids.len();
        block = next;
        if count == n_blocks {
            return block;
        }
        n_blocks = count;
    }
}

/// Quotient of the part reachable from the root by behavioural equivalence.
///
/// Returns the minimal pointed coalgebra (states numbered breadth-first from
/// the root) and, for every original state, its image if reachable.
pub fn minimize(pc: &PointedCoalgebra) -> (PointedCoalgebra, Vec<Option<usize>>) {
    let (reach, index) = pc.restrict_reachable();
    let c = reach.coalgebra();
    let sig = c.signature().clone();
    let block = refine_partition(c);

    let n_blocks = block.iter().copied().max().map_or(0, |m| m + 1);
    let mut rep = vec![usize::MAX; n_blocks];
    for s in (0..c.n_states()).rev() {
        rep[block[s]] = s;
    }
    let mut new_id = vec![usize::MAX; n_blocks];
    let mut order = vec![block[0]];
    new_id[block[0]] = 0;
    let mut i = 0;
    while i < order.len() {
        let b = order[i];
        i += 1;
        for &x in c.transition(rep[b]).tuple() {
            if new_id[block[x]] == usize::MAX {
                new_id[block[x]] = order.len();
                order.push(block[x]);
            }
        }
    }
    let transitions = order
        .iter()
        .map(|&b| sig.map_elem(c.transition(rep[b]), |&x| new_id[block[x]]))
        .collect();
    let quotient = Coalgebra { sig, transitions };
    let mapping = index.iter().map(|i| i.map(|s| new_id[block[s]])).collect();
    (
        PointedCoalgebra {
            coalg: quotient,
            root: 0,
        },
        mapping,
    )
}

/// True iff the roots of `a` and `b` have the same behaviour.
pub fn beh_equal(a: &PointedCoalgebra, b: &PointedCoalgebra) -> Result<bool, CoalgebraError> {
    let u = a.coalgebra().disjoint_union(b.coalgebra())?;
    let block = refine_partition(&u);
    Ok(block[a.root()] == block[a.n_states() + b.root()])
}
