//! Thinness of finite pointed coalgebras.
//!
//! A reachable state sees two incomparable cycles exactly when its strongly
//! connected component is not a simple loop, i.e. some member has two edges
//! (counted with multiplicity) staying inside the component. Checking this on
//! the condensation takes time linear in states plus edges.

use std::fmt;

use num_bigint::BigUint;
use serde::Serialize;

use crate::coalgebra::{shortest_path, successors_of, Condensation, FinitePath, PointedCoalgebra};

/// Two incomparable cycles through a state reachable from the root.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NonThinWitness {
    pub access: FinitePath,
    pub cycle1: FinitePath,
    pub cycle2: FinitePath,
}

impl NonThinWitness {
    pub fn state(&self) -> usize {
        self.cycle1.start()
    }

    /// Replays the witness against `pc`.
    pub fn is_valid_for(&self, pc: &PointedCoalgebra) -> bool {
        let c = pc.coalgebra();
        let s = self.state();
        self.access.start() == pc.root()
            && self.access.end() == s
            && self.access.is_valid_in(c)
            && self.cycle1.is_cycle()
            && self.cycle2.is_cycle()
            && self.cycle2.start() == s
            && self.cycle1.is_valid_in(c)
            && self.cycle2.is_valid_in(c)
            && !self.cycle1.comparable(&self.cycle2)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ThinVerdict {
    pub thin: bool,
    pub witness: Option<NonThinWitness>,
}

/// A member of a cyclic component whose in-component out-degree (with
/// multiplicity) is not one: the root if it qualifies, otherwise the first
/// in component discovery order.
fn offending_state(pc: &PointedCoalgebra, cond: &Condensation) -> Option<usize> {
    let c = pc.coalgebra();
    let offends = |s: usize, id: usize| {
        let internal = c
            .transition(s)
            .tuple()
            .iter()
            .filter(|&&x| cond.component_of[x] == Some(id))
            .count();
        internal != 1
    };
    let root_id = cond.comp(pc.root());
    if cond.cyclic[root_id] && offends(pc.root(), root_id) {
        return Some(pc.root());
    }
    cond.components
        .iter()
        .enumerate()
        .filter(|&(id, _)| cond.cyclic[id])
        .find_map(|(id, comp)| comp.iter().copied().find(|&s| offends(s, id)))
}

/// Linear-time thinness check with a witness on failure.
pub fn is_thin(pc: &PointedCoalgebra) -> ThinVerdict {
    let cond = pc.coalgebra().sccs_from(pc.root());
    verdict_from(pc, &cond)
}

pub(crate) fn verdict_from(pc: &PointedCoalgebra, cond: &Condensation) -> ThinVerdict {
    match offending_state(pc, cond) {
        None => ThinVerdict {
            thin: true,
            witness: None,
        },
        Some(s) => ThinVerdict {
            thin: false,
            witness: Some(witness_at(pc, cond, s)),
        },
    }
}

fn witness_at(pc: &PointedCoalgebra, cond: &Condensation, s: usize) -> NonThinWitness {
    let c = pc.coalgebra();
    let id = cond.comp(s);
    let access = pc.access_path(s).expect("offending state is reachable");
    let internal: Vec<(usize, usize)> = successors_of(c.transition(s))
        .into_iter()
        .filter(|&(x, _)| cond.component_of[x] == Some(id))
        .collect();
    let close = |(x, k): (usize, usize)| {
        let back = shortest_path(c, x, s, |y| cond.component_of[y] == Some(id))
            .expect("members of a component reach each other");
        FinitePath::from_steps(s, [(k, x)]).concat(&back)
    };
    NonThinWitness {
        access,
        cycle1: close(internal[0]),
        cycle2: close(internal[1]),
    }
}

/// Brute-force check: enumerates cycles of length at most `maxlen` through
/// every reachable state and looks for two incomparable ones.
pub fn oracle_is_thin(pc: &PointedCoalgebra, maxlen: usize) -> bool {
    let c = pc.coalgebra();
    for t in c.reachable_from(pc.root()) {
        let mut chain: Vec<FinitePath> = Vec::new();
        let mut ok = true;
        let mut path = FinitePath::new(t);
        c.cycle_dfs(t, maxlen, &mut path, &mut |cyc| {
            if chain.iter().any(|p| !p.comparable(cyc)) {
                ok = false;
                return false;
            }
            chain.push(cyc.clone());
            true
        });
        if !ok {
            return false;
        }
    }
    true
}

/// Cardinality class of the set of infinite paths from the root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PathCountClass {
    Zero,
    Finite(BigUint),
    CountablyInfinite,
    Uncountable,
}

impl PathCountClass {
    pub fn name(&self) -> &'static str {
        match self {
            PathCountClass::Zero => "zero",
            PathCountClass::Finite(_) => "finite",
            PathCountClass::CountablyInfinite => "countably-infinite",
            PathCountClass::Uncountable => "uncountable",
        }
    }
}

/// Serialized as `{"class": name}` plus a decimal string `"count"` for finite classes.
impl Serialize for PathCountClass {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut m = s.serialize_map(None)?;
        m.serialize_entry("class", self.name())?;
        if let PathCountClass::Finite(n) = self {
            m.serialize_entry("count", &n.to_string())?;
        }
        m.end()
    }
}

impl fmt::Display for PathCountClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PathCountClass::Zero => write!(f, "zero"),
            PathCountClass::Finite(n) => write!(f, "finite({n})"),
            PathCountClass::CountablyInfinite => write!(f, "countably-infinite"),
            PathCountClass::Uncountable => write!(f, "uncountable"),
        }
    }
}

/// Classifies the infinite paths from the root.
///
/// Non-thin coalgebras have uncountably many. In a thin one every cyclic
/// component is a loop; there are infinitely many paths iff some loop can
/// reach another loop, and otherwise each infinite path is a choice of a
/// finite route into one loop.
pub fn count_infinite_paths_class(pc: &PointedCoalgebra) -> PathCountClass {
    let c = pc.coalgebra();
    let cond = c.sccs_from(pc.root());
    if offending_state(pc, &cond).is_some() {
        return PathCountClass::Uncountable;
    }
    // loops_below[id]: the component reaches a cyclic component (itself included).
    let mut loops_below = vec![false; cond.len()];
    for id in 0..cond.len() {
        loops_below[id] = cond.cyclic[id] || cond.edges[id].iter().any(|&d| loops_below[d]);
        if cond.cyclic[id] && cond.edges[id].iter().any(|&d| loops_below[d]) {
            return PathCountClass::CountablyInfinite;
        }
    }
    if !cond.cyclic.iter().any(|&b| b) {
        return PathCountClass::Zero;
    }
    let mut count: Vec<BigUint> = vec![BigUint::default(); c.n_states()];
    for (id, comp) in cond.components.iter().enumerate() {
        if cond.cyclic[id] {
            // The loop's only infinite path stays on it.
            for &s in comp {
                count[s] = BigUint::from(1u32);
            }
        } else {
            let s = comp[0];
            count[s] = c.transition(s).tuple().iter().map(|&x| &count[x]).sum();
        }
    }
    PathCountClass::Finite(count[pc.root()].clone())
}
