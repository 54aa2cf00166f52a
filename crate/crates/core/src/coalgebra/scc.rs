//! Iterative Tarjan SCC and the condensation DAG.

use super::Coalgebra;

/// Strongly connected components in reverse topological order: every edge
/// between components goes from a later component to an earlier one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Condensation {
    pub components: Vec<Vec<usize>>,
    /// Component of each state; `None` for states not visited.
    pub component_of: Vec<Option<usize>>,
    /// Distinct successor components of each component, sorted.
    pub edges: Vec<Vec<usize>>,
    /// True for components containing an edge (more than one state, or a self-loop).
    pub cyclic: Vec<bool>,
}

impl Condensation {
    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn comp(&self, state: usize) -> usize {
        self.component_of[state].expect("state was visited")
    }
}

const UNVISITED: u32 = u32::MAX;
/// `index` of a state whose component is known; `low` then holds the component.
const DONE: u32 = u32::MAX - 1;

// Each state is a record `[index, low, degree, target records...]` in one
// array, so a visit touches one region of memory.
const INDEX: usize = 0;
const LOW: usize = 1;
const DEGREE: usize = 2;
const HEADER: usize = 3;

pub(super) fn condense(c: &Coalgebra, roots: impl IntoIterator<Item = usize>) -> Condensation {
    let n = c.n_states();
    let mut record = Vec::with_capacity(n);
    let mut len = 0usize;
    for t in c.transitions() {
        record.push(len as u32);
        len += HEADER + t.arity();
    }
    assert!(
        len < DONE as usize,
        "coalgebra too large for 32-bit indices"
    );
    let mut data = Vec::with_capacity(len);
    for t in c.transitions() {
        data.extend([UNVISITED, 0, t.arity() as u32]);
        data.extend(t.tuple().iter().map(|&x| record[x]));
    }

    let mut stack: Vec<u32> = Vec::new();
    let mut n_components = 0u32;
    let mut next_index = 0u32;
    // (record, offset of the next target to explore)
    let mut call: Vec<(usize, usize)> = Vec::new();

    for root in roots {
        let r = record[root] as usize;
        if data[r + INDEX] != UNVISITED {
            continue;
        }
        data[r + INDEX] = next_index;
        data[r + LOW] = next_index;
        next_index += 1;
        stack.push(r as u32);
        call.push((r, r + HEADER));
        while let Some(&mut (v, ref mut pos)) = call.last_mut() {
            if *pos < v + HEADER + data[v + DEGREE] as usize {
                let w = data[*pos] as usize;
                *pos += 1;
                let wi = data[w + INDEX];
                if wi == UNVISITED {
                    data[w + INDEX] = next_index;
                    data[w + LOW] = next_index;
                    next_index += 1;
                    stack.push(w as u32);
                    call.push((w, w + HEADER));
                } else if wi != DONE {
                    data[v + LOW] = data[v + LOW].min(wi);
                }
                continue;
            }
            call.pop();
            let low = data[v + LOW];
            if let Some(&(parent, _)) = call.last() {
                data[parent + LOW] = data[parent + LOW].min(low);
            }
            if low == data[v + INDEX] {
                loop {
                    let w = stack.pop().expect("tarjan stack holds the component") as usize;
                    data[w + INDEX] = DONE;
                    data[w + LOW] = n_components;
                    if w == v {
                        break;
                    }
                }
                n_components += 1;
            }
        }
    }

    let mut components: Vec<Vec<usize>> = vec![Vec::new(); n_components as usize];
    let mut component_of: Vec<Option<usize>> = vec![None; n];
    for (s, &r) in record.iter().enumerate() {
        let r = r as usize;
        if data[r + INDEX] == DONE {
            let id = data[r + LOW] as usize;
            components[id].push(s);
            component_of[s] = Some(id);
        }
    }
    let mut edges = vec![Vec::new(); components.len()];
    let mut cyclic = vec![false; components.len()];
    for (id, comp) in components.iter().enumerate() {
        cyclic[id] = comp.len() > 1;
        for &s in comp {
            let r = record[s] as usize;
            for &x in &data[r + HEADER..r + HEADER + data[r + DEGREE] as usize] {
                let cx = data[x as usize + LOW] as usize;
                if cx == id {
                    cyclic[id] = true;
                } else {
                    edges[id].push(cx);
                }
            }
        }
        edges[id].sort_unstable();
        edges[id].dedup();
    }
    Condensation {
        components,
        component_of,
        edges,
        cyclic,
    }
}
