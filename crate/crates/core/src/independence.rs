//! Exact independence number by branch and bound.
//!
//! The independence number of `G` equals the clique number of the complement,
//! so the search runs a Tomita-style max-clique over bitset adjacency with
//! greedy-coloring upper bounds. Exact or refused — never approximated: the
//! result is the classical (NCHV) bound of an inequality and an approximation
//! would corrupt verdicts downstream.

use crate::error::{Error, Result};
use crate::graph::ExclusivityGraph;

/// Default vertex cap for the exact search (also the bitset width limit).
pub const DEFAULT_ALPHA_CAP: usize = 64;

pub fn independence_number(g: &ExclusivityGraph) -> Result<u32> {
    independence_number_capped(g, DEFAULT_ALPHA_CAP)
}

pub fn independence_number_capped(g: &ExclusivityGraph, cap: usize) -> Result<u32> {
    let cap = cap.min(DEFAULT_ALPHA_CAP);
    if g.n() > cap {
        return Err(Error::SizeLimit { n: g.n(), cap });
    }
    let adj = g.complement().adjacency_bitsets();
    let all = if g.n() == 64 {
        u64::MAX
    } else {
        (1u64 << g.n()) - 1
    };
    let mut best = 0;
    expand(&adj, all, 0, &mut best);
    Ok(best)
}

fn expand(adj: &[u64], candidates: u64, size: u32, best: &mut u32) {
    if candidates == 0 {
        *best = (*best).max(size);
        return;
    }
    let (order, colors) = greedy_color(adj, candidates);
    let mut pool = candidates;
    for i in (0..order.len()).rev() {
        // Colors are nondecreasing along `order`, so once one fails the
        // bound every earlier vertex fails it too.
        if size + colors[i] <= *best {
            return;
        }
        let v = order[i];
        let next = pool & adj[v];
        if next == 0 {
            *best = (*best).max(size + 1);
        } else {
            expand(adj, next, size + 1, best);
        }
        pool &= !(1 << v);
    }
}

/// Greedy coloring of the subgraph induced by `candidates`. Returns vertices
/// in nondecreasing color order; `size + color` bounds any clique extending
/// through that vertex.
fn greedy_color(adj: &[u64], candidates: u64) -> (Vec<usize>, Vec<u32>) {
    let mut order = Vec::with_capacity(candidates.count_ones() as usize);
    let mut colors = Vec::with_capacity(order.capacity());
    let mut uncolored = candidates;
    let mut color = 0;
    while uncolored != 0 {
        color += 1;
        let mut available = uncolored;
        while available != 0 {
            let v = available.trailing_zeros() as usize;
            order.push(v);
            colors.push(color);
            uncolored &= !(1 << v);
            available &= !(1 << v) & !adj[v];
        }
    }
    (order, colors)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn heptagon_family() {
        let c7 = ExclusivityGraph::cycle(7).unwrap();
        assert_eq!(independence_number(&c7).unwrap(), 3);
        assert_eq!(independence_number(&c7.complement()).unwrap(), 2);
        assert_eq!(
            independence_number(&c7.or_product(&c7.complement())).unwrap(),
            6
        );
    }

    #[test]
    fn degenerate_families() {
        for n in 1..=8 {
            let empty = ExclusivityGraph::edgeless(n).unwrap();
            assert_eq!(independence_number(&empty).unwrap(), n as u32);
            let full = ExclusivityGraph::complete(n).unwrap();
            assert_eq!(independence_number(&full).unwrap(), 1);
        }
    }

    #[test]
    fn cap_is_enforced() {
        let g = ExclusivityGraph::edgeless(65).unwrap();
        assert!(matches!(
            independence_number(&g),
            Err(Error::SizeLimit { .. })
        ));
        let g10 = ExclusivityGraph::cycle(10).unwrap();
        assert!(matches!(
            independence_number_capped(&g10, 9),
            Err(Error::SizeLimit { cap: 9, .. })
        ));
    }
}
