//! Finite combinatorial categories: graphs, linear orders, and free abelian
//! groups.
//!
//! Graphs are canonicalized by the least adjacency code under vertex
//! permutation, reading the upper triangle row by row with the `(0, 1)` bit
//! most significant. Enumeration lists one representative per isomorphism
//! class, ordered by size and then by canonical code; the per-size class
//! lists are cached process-wide. Linear orders are canonicalized by
//! renumbering and enumerated by size, free abelian groups by rank.

use super::Obj;
use crate::error::{Error, Result};
use crate::lattice::{IntLattice, IntMatrix};
use num_bigint::BigInt;
use std::collections::BTreeMap;
use std::sync::{Arc, Mutex, OnceLock};

/// Largest vertex count for which graph canonicalization is offered.
pub(crate) const MAX_GRAPH_CANON: usize = 8;
/// Largest vertex count for which the per-size class list is enumerated.
/// (Size 7 already means scanning 2^21 codes against 5040 permutations.)
const MAX_GRAPH_ENUM: usize = 6;

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut items: Vec<usize> = (0..n).collect();
    fn heap(k: usize, items: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k <= 1 {
            out.push(items.clone());
            return;
        }
        for i in 0..k {
            heap(k - 1, items, out);
            if k.is_multiple_of(2) {
                items.swap(i, k - 1);
            } else {
                items.swap(0, k - 1);
            }
        }
    }
    heap(n, &mut items, &mut out);
    out
}

/// Lex-ordered list of vertex pairs `(i, j)` with `i < j`.
fn pairs(n: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            out.push((i, j));
        }
    }
    out
}

/// Position of pair `(i, j)` in the lex order of `pairs(n)`.
fn pair_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * (2 * n - i - 1) / 2 + (j - i - 1)
}

/// Bit of the adjacency code carrying pair `(i, j)`: the lex-first pair is
/// the most significant bit, so numeric order on codes is row-major lex
/// order on adjacency matrices.
fn code_bit(n: usize, i: usize, j: usize) -> u32 {
    let total = n * (n - 1) / 2;
    (total - 1 - pair_index(n, i, j)) as u32
}

pub(crate) fn edges_to_code(n: usize, edges: &[(usize, usize)]) -> u64 {
    let mut code = 0u64;
    for &(i, j) in edges {
        code |= 1 << code_bit(n, i, j);
    }
    code
}

pub(crate) fn code_to_edges(n: usize, code: u64) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for (i, j) in pairs(n) {
        if code >> code_bit(n, i, j) & 1 == 1 {
            edges.push((i, j));
        }
    }
    edges
}

/// Least adjacency code of the isomorphism class of `code`.
fn canonical_code(n: usize, code: u64, perms: &[Vec<usize>]) -> u64 {
    if n < 2 {
        return 0;
    }
    let pair_list = pairs(n);
    let mut best = u64::MAX;
    for q in perms {
        let mut c = 0u64;
        for &(a, b) in &pair_list {
            let (i, j) = if q[a] < q[b] { (q[a], q[b]) } else { (q[b], q[a]) };
            if code >> code_bit(n, i, j) & 1 == 1 {
                c |= 1 << code_bit(n, a, b);
            }
        }
        if c < best {
            best = c;
        }
    }
    best
}

/// True when no permutation strictly lowers the code; walks the bits from
/// most significant down so almost all non-canonical codes bail out early.
fn is_canonical_code(n: usize, code: u64, perms: &[Vec<usize>], pair_list: &[(usize, usize)]) -> bool {
    'perm: for q in perms {
        for &(a, b) in pair_list {
            let bit = code >> code_bit(n, a, b) & 1;
            let (i, j) = if q[a] < q[b] { (q[a], q[b]) } else { (q[b], q[a]) };
            let qbit = code >> code_bit(n, i, j) & 1;
            if qbit < bit {
                return false;
            }
            if qbit > bit {
                continue 'perm;
            }
        }
    }
    true
}

/// Sorted canonical codes of all graph classes on `n` vertices.
pub(crate) fn graphs_of_size(n: usize) -> Result<Arc<Vec<u64>>> {
    if n > MAX_GRAPH_ENUM {
        return Err(Error::Domain(format!(
            "graph class enumeration is implemented for sizes up to {MAX_GRAPH_ENUM} (got {n})"
        )));
    }
    static CACHE: OnceLock<Mutex<BTreeMap<usize, Arc<Vec<u64>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(BTreeMap::new()));
    let mut guard = cache.lock().expect("graph class cache poisoned");
    if let Some(list) = guard.get(&n) {
        return Ok(Arc::clone(list));
    }
    let perms = permutations(n);
    let pair_list = pairs(n);
    let total = n * n.saturating_sub(1) / 2;
    let mut codes = Vec::new();
    for code in 0..(1u64 << total) {
        if is_canonical_code(n, code, &perms, &pair_list) {
            codes.push(code);
        }
    }
    let list = Arc::new(codes);
    guard.insert(n, Arc::clone(&list));
    Ok(list)
}

pub(crate) fn graph_object(index: u64) -> Result<Obj> {
    let mut remaining = index;
    for n in 0..=MAX_GRAPH_ENUM {
        let classes = graphs_of_size(n)?;
        if (remaining as usize) < classes.len() {
            let code = classes[remaining as usize];
            return Ok(Obj::Graph {
                n,
                edges: code_to_edges(n, code),
            });
        }
        remaining -= classes.len() as u64;
    }
    Err(Error::Domain(format!(
        "graph object index {index} needs classes beyond size {MAX_GRAPH_ENUM}"
    )))
}

pub(crate) fn graph_canonical(n: usize, edges: &[(usize, usize)]) -> Result<Obj> {
    if n > MAX_GRAPH_CANON {
        return Err(Error::Domain(format!(
            "graph canonicalization is implemented for sizes up to {MAX_GRAPH_CANON} (got {n})"
        )));
    }
    for &(i, j) in edges {
        if i >= j || j >= n {
            return Err(Error::Input(format!(
                "invalid edge ({i}, {j}) in a graph on {n} vertices"
            )));
        }
    }
    let code = edges_to_code(n, edges);
    let canon = canonical_code(n, code, &permutations(n));
    Ok(Obj::Graph {
        n,
        edges: code_to_edges(n, canon),
    })
}

pub(crate) fn graph_index(n: usize, edges: &[(usize, usize)]) -> Option<u64> {
    if n > MAX_GRAPH_ENUM {
        return None;
    }
    let canon = match graph_canonical(n, edges) {
        Ok(Obj::Graph { edges, .. }) => edges_to_code(n, &edges),
        _ => return None,
    };
    let mut offset = 0u64;
    for k in 0..n {
        offset += graphs_of_size(k).ok()?.len() as u64;
    }
    let classes = graphs_of_size(n).ok()?;
    classes
        .binary_search(&canon)
        .ok()
        .map(|i| offset + i as u64)
}

/// Adjacency test on a sorted edge list over arbitrary ids.
pub(crate) fn adjacent(edges: &[(usize, usize)], a: u64, b: u64) -> bool {
    if a == b {
        return false;
    }
    let (i, j) = if a < b { (a, b) } else { (b, a) };
    edges.binary_search(&(i as usize, j as usize)).is_ok()
}

pub(crate) fn graph_emb_ok(
    n: usize,
    edges: &[(usize, usize)],
    tn: usize,
    tedges: &[(usize, usize)],
    map: &[u64],
) -> bool {
    if map.len() != n {
        return false;
    }
    for (k, &v) in map.iter().enumerate() {
        if v >= tn as u64 || map[..k].contains(&v) {
            return false;
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if adjacent(edges, i as u64, j as u64) != adjacent(tedges, map[i], map[j]) {
                return false;
            }
        }
    }
    true
}

/// First induced embedding of the pattern graph into the target, assigning
/// pattern vertices in order and trying target ids in ascending order.
pub(crate) fn find_induced(
    n: usize,
    edges: &[(usize, usize)],
    tn: usize,
    tedges: &[(usize, usize)],
) -> Option<Vec<u64>> {
    fn extend(
        n: usize,
        edges: &[(usize, usize)],
        tn: usize,
        tedges: &[(usize, usize)],
        partial: &mut Vec<u64>,
    ) -> bool {
        let k = partial.len();
        if k == n {
            return true;
        }
        'cand: for v in 0..tn as u64 {
            if partial.contains(&v) {
                continue;
            }
            for (i, &w) in partial.iter().enumerate() {
                if adjacent(edges, i as u64, k as u64) != adjacent(tedges, w, v) {
                    continue 'cand;
                }
            }
            partial.push(v);
            if extend(n, edges, tn, tedges, partial) {
                return true;
            }
            partial.pop();
        }
        false
    }
    let mut partial = Vec::with_capacity(n);
    extend(n, edges, tn, tedges, &mut partial).then_some(partial)
}

pub(crate) fn order_object(index: u64) -> Obj {
    Obj::Order {
        points: (0..index).collect(),
    }
}

/// Position of an id in the order sequence.
pub(crate) fn order_pos(points: &[u64], id: u64) -> Option<usize> {
    points.iter().position(|&p| p == id)
}

pub(crate) fn order_emb_ok(k: usize, target_points: &[u64], map: &[u64]) -> bool {
    if map.len() != k {
        return false;
    }
    let mut last: Option<usize> = None;
    for &id in map {
        let Some(pos) = order_pos(target_points, id) else {
            return false;
        };
        if last.is_some_and(|prev| prev >= pos) {
            return false;
        }
        last = Some(pos);
    }
    true
}

pub(crate) fn rows_to_matrix(ambient: usize, rows: &[Vec<i64>]) -> Result<IntMatrix> {
    let big: Vec<Vec<BigInt>> = rows
        .iter()
        .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
        .collect();
    IntMatrix::from_rows(ambient, big)
}

pub(crate) fn abelian_emb_ok(rank: usize, trank: usize, rows: &[Vec<i64>], require_pure: bool) -> bool {
    if rows.len() != rank || rows.iter().any(|r| r.len() != trank) {
        return false;
    }
    if rank == 0 {
        return true;
    }
    let Ok(m) = rows_to_matrix(trank, rows) else {
        return false;
    };
    let lat = IntLattice::from_generators(trank, &m);
    lat.rank() == rank && (!require_pure || lat.is_pure())
}

/// Identity-block inclusion of `Z^rank` into `Z^trank`.
pub(crate) fn abelian_inclusion(rank: usize, trank: usize) -> Vec<Vec<i64>> {
    (0..rank)
        .map(|i| {
            let mut row = vec![0i64; trank];
            row[i] = 1;
            row
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_indexing_is_lex() {
        let p = pairs(4);
        assert_eq!(p, vec![(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]);
        for (k, &(i, j)) in p.iter().enumerate() {
            assert_eq!(pair_index(4, i, j), k);
        }
        let code = edges_to_code(4, &[(0, 1)]);
        assert_eq!(code, 1 << 5, "lex-first pair sits at the most significant bit");
    }

    #[test]
    fn codes_round_trip_through_edges() {
        for code in 0..64u64 {
            let edges = code_to_edges(4, code);
            assert_eq!(edges_to_code(4, &edges), code);
            assert!(edges.windows(2).all(|w| w[0] < w[1]), "edge list sorted");
        }
    }

    #[test]
    fn class_counts_match_the_graph_census() {
        // Numbers of graphs on n unlabelled vertices.
        let expected = [1usize, 1, 2, 4, 11, 34];
        for (n, &count) in expected.iter().enumerate() {
            assert_eq!(graphs_of_size(n).unwrap().len(), count, "size {n}");
        }
    }

    #[test]
    fn enumeration_is_canonical_and_indexed() {
        for index in 0..53 {
            let obj = graph_object(index).unwrap();
            let Obj::Graph { n, edges } = &obj else { unreachable!() };
            assert_eq!(graph_canonical(*n, edges).unwrap(), obj);
            assert_eq!(graph_index(*n, edges), Some(index));
        }
        // The triangle is the last graph on three vertices.
        assert_eq!(
            graph_object(7).unwrap(),
            Obj::Graph {
                n: 3,
                edges: vec![(0, 1), (0, 2), (1, 2)]
            }
        );
    }

    #[test]
    fn canonicalization_identifies_isomorphic_graphs() {
        let a = graph_canonical(4, &[(0, 1), (1, 2)]).unwrap();
        let b = graph_canonical(4, &[(2, 3), (1, 3)]).unwrap();
        let c = graph_canonical(4, &[(0, 3), (1, 2)]).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c, "a path and a perfect matching are not isomorphic");
    }

    #[test]
    fn graph_embeddings_are_induced() {
        let stage_edges = vec![(0, 1), (1, 2)];
        assert!(graph_emb_ok(2, &[(0, 1)], 3, &stage_edges, &[1, 2]));
        assert!(!graph_emb_ok(2, &[(0, 1)], 3, &stage_edges, &[0, 2]), "not an edge");
        assert!(!graph_emb_ok(2, &[], 3, &stage_edges, &[0, 1]), "edge where none expected");
        assert!(!graph_emb_ok(2, &[(0, 1)], 3, &stage_edges, &[1, 1]), "not injective");

        let found = find_induced(3, &[(0, 1), (1, 2)], 3, &stage_edges).unwrap();
        assert_eq!(found, vec![0, 1, 2]);
        assert!(find_induced(3, &[(0, 1), (0, 2), (1, 2)], 3, &stage_edges).is_none());
    }

    #[test]
    fn order_embeddings_preserve_position() {
        let points = vec![5, 1, 7];
        assert!(order_emb_ok(2, &points, &[5, 7]));
        assert!(order_emb_ok(2, &points, &[1, 7]));
        assert!(!order_emb_ok(2, &points, &[7, 5]), "order reversed");
        assert!(!order_emb_ok(2, &points, &[5, 9]), "unknown id");
        assert!(order_emb_ok(0, &points, &[]));
    }

    #[test]
    fn abelian_embeddings_check_rank_and_purity() {
        let incl = abelian_inclusion(2, 3);
        assert!(abelian_emb_ok(2, 3, &incl, true));
        let doubled = vec![vec![1, 0], vec![0, 2]];
        assert!(abelian_emb_ok(2, 2, &doubled, false), "injective");
        assert!(!abelian_emb_ok(2, 2, &doubled, true), "index two, not pure");
        let degenerate = vec![vec![1, 1], vec![2, 2]];
        assert!(!abelian_emb_ok(2, 2, &degenerate, false), "rank drops");
    }
}
