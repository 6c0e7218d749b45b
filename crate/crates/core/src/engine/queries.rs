//! Read-only queries against a frozen chain.
//!
//! [`locate`] searches the stages in order for a special embedding of a
//! (canonicalized) object and reports the first hit, or a horizon hint —
//! the step by which the enumeration schedule will have joined the object.
//! [`push_elem`] and [`limit_elem_eq`] realise the chain's union concretely:
//! because stages grow in place, an element observed at any stage keeps its
//! representation at every later stage, and equality of union elements is
//! equality at (any stage past) the larger of their birth stages.
//!
//! [`homogeneity_witness`] starts from an isomorphism between two located
//! finite subobjects and grows it by alternating one-point extensions,
//! matching extension patterns exactly (adjacency for graphs, relative
//! position for orders, step kind plus semantic core equality for towers).
//! [`back_and_forth`] plays the same game between two chains of the same
//! category, starting from the empty pairing. Both return a [`PartialIso`]
//! whose pairing has been re-verified pair against pair; when the chain is
//! not rich enough to continue, the partial result carries a note saying
//! where it stopped instead of failing.

use super::chain::ChainState;
use super::{finite, towers, Category, Elem, Emb, LimitElem, Obj};
use crate::error::{Error, Result};
use crate::tower::{Tower, TowerStep};
use crate::word::{Gen, Word};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Result of [`locate`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Location {
    /// First stage carrying the object, with a verified special embedding.
    Found { stage: usize, emb: Emb },
    /// Not in any built stage; `horizon` is the step by which the join
    /// schedule alone would bring it in, when the object's enumeration
    /// index could be recovered.
    NotYet { horizon: Option<u64> },
}

/// A finite partial isomorphism between chain unions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartialIso {
    /// Matched element pairs (left chain, right chain).
    pub pairs: Vec<(LimitElem, LimitElem)>,
    /// Completed extension rounds beyond the initial pairing.
    pub rounds: usize,
    /// Whether the final pairing passed re-verification.
    pub verified: bool,
    /// Set when the game stopped early, saying why.
    pub note: Option<String>,
}

/// Searches the stages in order for a special embedding of `obj` (taken up
/// to canonical form).
pub fn locate(chain: &ChainState, obj: &Obj) -> Result<Location> {
    let cat = &chain.category;
    let canon = cat.canonical(obj)?;
    match &canon {
        Obj::Graph { n, edges } => {
            for (i, stage) in chain.stages.iter().enumerate() {
                let (sn, se) = stage.as_graph()?;
                if let Some(map) = finite::find_induced(*n, edges, sn, se) {
                    return Ok(Location::Found {
                        stage: i + 1,
                        emb: Emb::Points { map },
                    });
                }
            }
        }
        Obj::Order { points } => {
            let k = points.len();
            for (i, stage) in chain.stages.iter().enumerate() {
                let sp = stage.as_order()?;
                if sp.len() >= k {
                    return Ok(Location::Found {
                        stage: i + 1,
                        emb: Emb::Points {
                            map: sp[..k].to_vec(),
                        },
                    });
                }
            }
        }
        Obj::Abelian { rank } => {
            for (i, stage) in chain.stages.iter().enumerate() {
                let sr = stage.as_abelian()?;
                if sr >= *rank {
                    let rows = finite::abelian_inclusion(*rank, sr);
                    debug_assert!(finite::abelian_emb_ok(*rank, sr, &rows, true));
                    return Ok(Location::Found {
                        stage: i + 1,
                        emb: Emb::Matrix { rows },
                    });
                }
            }
        }
        Obj::Tower { tower } => {
            for (i, stage) in chain.stages.iter().enumerate() {
                let st = stage.as_tower()?;
                if let Some(hom) = towers::special_tower_embeddings(tower, st, 1).pop() {
                    return Ok(Location::Found {
                        stage: i + 1,
                        emb: Emb::TowerHom { hom },
                    });
                }
            }
        }
    }
    Ok(Location::NotYet {
        horizon: cat.object_index(&canon).map(|i| (2 * i).max(1)),
    })
}

/// Re-expresses a union element at a later stage (the representation is
/// stable; vectors are zero-padded to the later rank).
pub fn push_elem(chain: &ChainState, le: &LimitElem, to_stage: usize) -> Result<Elem> {
    if le.stage == 0 || le.stage > chain.len() {
        return Err(Error::Input(format!(
            "element stage {} outside chain of length {}",
            le.stage,
            chain.len()
        )));
    }
    if to_stage < le.stage || to_stage > chain.len() {
        return Err(Error::Input(format!(
            "cannot push from stage {} to stage {}",
            le.stage, to_stage
        )));
    }
    let birth = &chain.stages[le.stage - 1];
    let target = &chain.stages[to_stage - 1];
    match (&le.elem, birth, target) {
        (Elem::Vertex { id }, Obj::Graph { n, .. }, Obj::Graph { .. }) => {
            if *id >= *n as u64 {
                return Err(Error::Input(format!("vertex {id} not in its stage")));
            }
            Ok(Elem::Vertex { id: *id })
        }
        (Elem::Point { id }, Obj::Order { points }, Obj::Order { .. }) => {
            if finite::order_pos(points, *id).is_none() {
                return Err(Error::Input(format!("point {id} not in its stage")));
            }
            Ok(Elem::Point { id: *id })
        }
        (Elem::Vector { coords }, Obj::Abelian { rank }, Obj::Abelian { rank: tr }) => {
            if coords.len() != *rank {
                return Err(Error::Input(format!(
                    "vector length {} does not match stage rank {rank}",
                    coords.len()
                )));
            }
            let mut padded = coords.clone();
            padded.resize(*tr, 0);
            Ok(Elem::Vector { coords: padded })
        }
        (Elem::Word { text }, Obj::Tower { tower }, Obj::Tower { tower: tt }) => {
            let w = tower.parse(text)?;
            Ok(Elem::Word {
                text: tt.print(&tt.reduce(&w)),
            })
        }
        _ => Err(Error::Input(
            "element kind does not match the chain's category".into(),
        )),
    }
}

/// Equality in the chain's union: both elements are pushed to the larger of
/// their stages and compared there (semantically, for tower words). The
/// answer does not depend on which later stage is used.
pub fn limit_elem_eq(chain: &ChainState, a: &LimitElem, b: &LimitElem) -> Result<bool> {
    let stage = a.stage.max(b.stage);
    let ea = push_elem(chain, a, stage)?;
    let eb = push_elem(chain, b, stage)?;
    match (&ea, &eb, &chain.stages[stage - 1]) {
        (Elem::Vertex { id: x }, Elem::Vertex { id: y }, _) => Ok(x == y),
        (Elem::Point { id: x }, Elem::Point { id: y }, _) => Ok(x == y),
        (Elem::Vector { coords: x }, Elem::Vector { coords: y }, _) => Ok(x == y),
        (Elem::Word { text: x }, Elem::Word { text: y }, Obj::Tower { tower }) => {
            Ok(tower.equals(&tower.parse(x)?, &tower.parse(y)?))
        }
        _ => Err(Error::Input("cannot compare elements of different kinds".into())),
    }
}

fn located(chain: &ChainState, obj: &Obj) -> Result<(usize, Emb)> {
    match locate(chain, obj)? {
        Location::Found { stage, emb } => Ok((stage, emb)),
        Location::NotYet { horizon } => Err(Error::Domain(format!(
            "object not in any built stage{}",
            horizon.map_or(String::new(), |h| format!(" (expected by step {h})"))
        ))),
    }
}

fn as_letter(w: &Word) -> Option<Gen> {
    match w.syllables() {
        [(g, 1)] => Some(*g),
        _ => None,
    }
}

/// Extends an isomorphism `a -> b` of located subobjects by `depth`
/// alternating one-point extension rounds. `iso` pairs element names of the
/// canonical forms: vertex/point indices for graphs and orders, `e{i}` (or
/// bare indices) for abelian basis vectors, letter names for towers.
pub fn homogeneity_witness(
    chain: &ChainState,
    a: &Obj,
    b: &Obj,
    iso: &[(String, String)],
    depth: usize,
) -> Result<PartialIso> {
    let cat = &chain.category;
    let canon_a = cat.canonical(a)?;
    let canon_b = cat.canonical(b)?;
    match cat {
        Category::FinGraph => {
            let (ka, ea) = canon_a.as_graph().map(|(n, e)| (n, e.to_vec()))?;
            let (kb, eb) = canon_b.as_graph().map(|(n, e)| (n, e.to_vec()))?;
            let perm = parse_index_iso(iso, ka, kb)?;
            for i in 0..ka {
                for j in 0..ka {
                    if finite::adjacent(&ea, i as u64, j as u64)
                        != finite::adjacent(&eb, perm[i], perm[j])
                    {
                        return Err(Error::Input(
                            "the given pairing is not a graph isomorphism".into(),
                        ));
                    }
                }
            }
            let (_, emb_a) = located(chain, &canon_a)?;
            let (_, emb_b) = located(chain, &canon_b)?;
            let (Emb::Points { map: fa }, Emb::Points { map: fb }) = (emb_a, emb_b) else {
                unreachable!("graph locations are vertex maps")
            };
            let left: Vec<u64> = (0..ka).map(|i| fa[i]).collect();
            let right: Vec<u64> = (0..ka).map(|i| fb[perm[i] as usize]).collect();
            finish_point_game(chain, left, right, depth, true)
        }
        Category::FinLinorder => {
            let ka = canon_a.as_order()?.len();
            let kb = canon_b.as_order()?.len();
            let perm = parse_index_iso(iso, ka, kb)?;
            if perm.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Input(
                    "the given pairing is not an order isomorphism".into(),
                ));
            }
            let (_, emb_a) = located(chain, &canon_a)?;
            let (_, emb_b) = located(chain, &canon_b)?;
            let (Emb::Points { map: fa }, Emb::Points { map: fb }) = (emb_a, emb_b) else {
                unreachable!("order locations are point maps")
            };
            let left: Vec<u64> = (0..ka).map(|i| fa[i]).collect();
            let right: Vec<u64> = (0..ka).map(|i| fb[perm[i] as usize]).collect();
            finish_point_game(chain, left, right, depth, false)
        }
        Category::FreeAbelianForall | Category::FreeAbelianPlain => {
            let ka = canon_a.as_abelian()?;
            let kb = canon_b.as_abelian()?;
            let perm = parse_index_iso(iso, ka, kb)?;
            let (sa, _) = located(chain, &canon_a)?;
            let (sb, _) = located(chain, &canon_b)?;
            let ra = chain.stages[sa - 1].as_abelian()?;
            let rb = chain.stages[sb - 1].as_abelian()?;
            let mut pairs = Vec::new();
            for (i, &p) in perm.iter().enumerate().take(ka) {
                pairs.push((
                    LimitElem {
                        stage: sa,
                        elem: Elem::Vector {
                            coords: unit_vector(i, ra),
                        },
                    },
                    LimitElem {
                        stage: sb,
                        elem: Elem::Vector {
                            coords: unit_vector(p as usize, rb),
                        },
                    },
                ));
            }
            let top = chain.len();
            let rt = chain.top().as_abelian()?;
            let mut used_left: Vec<usize> = (0..ka).collect();
            let mut used_right: Vec<usize> = perm.iter().map(|&p| p as usize).collect();
            let mut rounds = 0;
            let mut note = None;
            for _ in 0..depth {
                let l = (0..rt).find(|i| !used_left.contains(i));
                let r = (0..rt).find(|i| !used_right.contains(i));
                match (l, r) {
                    (Some(l), Some(r)) => {
                        used_left.push(l);
                        used_right.push(r);
                        pairs.push((
                            LimitElem {
                                stage: top,
                                elem: Elem::Vector {
                                    coords: unit_vector(l, rt),
                                },
                            },
                            LimitElem {
                                stage: top,
                                elem: Elem::Vector {
                                    coords: unit_vector(r, rt),
                                },
                            },
                        ));
                        rounds += 1;
                    }
                    _ => {
                        note = Some(format!(
                            "all {rt} basis directions of the top stage are paired"
                        ));
                        break;
                    }
                }
            }
            Ok(PartialIso {
                pairs,
                rounds,
                verified: true,
                note,
            })
        }
        Category::Ice { .. } | Category::Fpce | Category::LimitPlain => {
            let ta = canon_a.as_tower()?;
            let tb = canon_b.as_tower()?;
            let iso_map = parse_tower_iso(ta, tb, iso)?;
            let (_, emb_a) = located(chain, &canon_a)?;
            let (_, emb_b) = located(chain, &canon_b)?;
            let (Emb::TowerHom { hom: ha }, Emb::TowerHom { hom: hb }) = (emb_a, emb_b) else {
                unreachable!("tower locations are homomorphisms")
            };
            let top = chain.top().as_tower()?;
            let mut dict: BTreeMap<Gen, Gen> = BTreeMap::new();
            for g in 0..top.base_rank() as Gen {
                dict.insert(g, g);
            }
            for g in 0..ta.letter_count() as Gen {
                let l = as_letter(ha.image_of(g))
                    .ok_or_else(|| Error::Domain("located image is not a letter".into()))?;
                let r = as_letter(hb.image_of(iso_map[g as usize]))
                    .ok_or_else(|| Error::Domain("located image is not a letter".into()))?;
                if dict.get(&l).is_some_and(|&prev| prev != r) {
                    return Err(Error::Input("iso pairs collide on a letter".into()));
                }
                dict.insert(l, r);
            }
            tower_game(chain, top, dict, depth)
        }
    }
}

/// Plays the pairing game between two chains of the same category, starting
/// from the empty pairing, until both sides cover their first `depth`
/// elements or the game stalls.
pub fn back_and_forth(x: &ChainState, y: &ChainState, depth: usize) -> Result<PartialIso> {
    if x.category != y.category {
        return Err(Error::Input(
            "back-and-forth needs two chains of the same category".into(),
        ));
    }
    match &x.category {
        Category::FinGraph => point_bnf(x, y, depth, true),
        Category::FinLinorder => point_bnf(x, y, depth, false),
        Category::FreeAbelianForall | Category::FreeAbelianPlain => {
            let rx = x.top().as_abelian()?;
            let ry = y.top().as_abelian()?;
            let k = depth.min(rx).min(ry);
            let pairs = (0..k)
                .map(|i| {
                    (
                        LimitElem {
                            stage: x.len(),
                            elem: Elem::Vector {
                                coords: unit_vector(i, rx),
                            },
                        },
                        LimitElem {
                            stage: y.len(),
                            elem: Elem::Vector {
                                coords: unit_vector(i, ry),
                            },
                        },
                    )
                })
                .collect();
            Ok(PartialIso {
                pairs,
                rounds: k,
                verified: true,
                note: (k < depth).then(|| {
                    format!("top ranks {rx} and {ry} bound the pairing at {k} directions")
                }),
            })
        }
        Category::Ice { .. } | Category::Fpce | Category::LimitPlain => {
            let tx = x.top().as_tower()?;
            let ty = y.top().as_tower()?;
            if tx.base_rank() != ty.base_rank() {
                return Err(Error::Input("tower chains have different base ranks".into()));
            }
            let mut dict: BTreeMap<Gen, Gen> = BTreeMap::new();
            for g in 0..tx.base_rank() as Gen {
                dict.insert(g, g);
            }
            tower_game_two(x, y, tx, ty, dict, depth)
        }
    }
}

fn unit_vector(i: usize, rank: usize) -> Vec<i64> {
    let mut v = vec![0i64; rank];
    v[i] = 1;
    v
}

/// Parses an element-index pairing ("3" or "e3") into a bijection.
fn parse_index_iso(iso: &[(String, String)], ka: usize, kb: usize) -> Result<Vec<u64>> {
    if ka != kb {
        return Err(Error::Input(format!(
            "objects have different sizes ({ka} vs {kb})"
        )));
    }
    fn parse_one(s: &str, bound: usize) -> Result<u64> {
        let digits = s.strip_prefix('e').unwrap_or(s);
        let v: u64 = digits
            .parse()
            .map_err(|_| Error::Input(format!("cannot parse element name {s:?}")))?;
        if v >= bound as u64 {
            return Err(Error::Input(format!(
                "element {s:?} out of range (object has {bound} elements)"
            )));
        }
        Ok(v)
    }
    if iso.len() != ka {
        return Err(Error::Input(format!(
            "the pairing must list all {ka} elements (got {})",
            iso.len()
        )));
    }
    let mut perm = vec![u64::MAX; ka];
    for (l, r) in iso {
        let i = parse_one(l, ka)? as usize;
        let v = parse_one(r, kb)?;
        if perm[i] != u64::MAX {
            return Err(Error::Input(format!("element {l:?} paired twice")));
        }
        perm[i] = v;
    }
    let mut seen = vec![false; kb];
    for &v in &perm {
        if seen[v as usize] {
            return Err(Error::Input("pairing is not injective".into()));
        }
        seen[v as usize] = true;
    }
    Ok(perm)
}

/// Parses a letter-name pairing between two canonical towers and verifies
/// it as a special isomorphism (identity base, matched kinds, semantically
/// equal cores under translation).
fn parse_tower_iso(ta: &Tower, tb: &Tower, iso: &[(String, String)]) -> Result<Vec<Gen>> {
    if ta.base_rank() != tb.base_rank() || ta.letter_count() != tb.letter_count() {
        return Err(Error::Input("towers have different shapes".into()));
    }
    let count = ta.letter_count();
    let mut map = vec![Gen::MAX; count];
    for (l, r) in iso {
        let ga = ta
            .alphabet()
            .index_of(l)
            .ok_or_else(|| Error::Input(format!("unknown letter {l:?} on the left")))?;
        let gb = tb
            .alphabet()
            .index_of(r)
            .ok_or_else(|| Error::Input(format!("unknown letter {r:?} on the right")))?;
        if map[ga as usize] != Gen::MAX {
            return Err(Error::Input(format!("letter {l:?} paired twice")));
        }
        map[ga as usize] = gb;
    }
    for g in 0..ta.base_rank() as Gen {
        if map[g as usize] == Gen::MAX {
            map[g as usize] = g;
        }
        if map[g as usize] != g {
            return Err(Error::Input(
                "a special isomorphism fixes the base letters".into(),
            ));
        }
    }
    if map.contains(&Gen::MAX) {
        return Err(Error::Input("the pairing must cover every letter".into()));
    }
    let mut seen = vec![false; count];
    for &g in &map {
        if seen[g as usize] {
            return Err(Error::Input("pairing is not injective".into()));
        }
        seen[g as usize] = true;
    }
    let images: Vec<Word> = map.iter().map(|&g| Word::generator(g)).collect();
    let hom = crate::tower::Hom::new(ta.clone(), tb.clone(), images)
        .map_err(|e| Error::Input(format!("the pairing is not a homomorphism: {e}")))?;
    if !towers::tower_emb_is_special(&hom) {
        return Err(Error::Input("the pairing is not a special isomorphism".into()));
    }
    Ok(map)
}

/// Alternating one-point extension game on vertex/point ids inside one
/// chain, starting from the given anchor columns.
fn finish_point_game(
    chain: &ChainState,
    mut left: Vec<u64>,
    mut right: Vec<u64>,
    depth: usize,
    graph: bool,
) -> Result<PartialIso> {
    let top = chain.len();
    let mut rounds = 0;
    let mut note = None;
    for _ in 0..depth {
        match extend_point_pairing(chain.top(), chain.top(), &left, &right, graph, true)? {
            ExtendOutcome::Extended(u, v) => {
                left.push(u);
                right.push(v);
            }
            ExtendOutcome::Exhausted => {}
            ExtendOutcome::Stuck(u) => {
                note = Some(format!("no partner matches the pattern of element {u}"));
                break;
            }
        }
        match extend_point_pairing(chain.top(), chain.top(), &left, &right, graph, false)? {
            ExtendOutcome::Extended(u, v) => {
                left.push(u);
                right.push(v);
                rounds += 1;
            }
            ExtendOutcome::Exhausted => {
                rounds += 1;
            }
            ExtendOutcome::Stuck(u) => {
                note = Some(format!("no partner matches the pattern of element {u}"));
                break;
            }
        }
    }
    let verified = verify_point_pairing(chain.top(), chain.top(), &left, &right, graph)?;
    let pairs = left
        .iter()
        .zip(&right)
        .map(|(&l, &r)| {
            (
                LimitElem {
                    stage: top,
                    elem: if graph {
                        Elem::Vertex { id: l }
                    } else {
                        Elem::Point { id: l }
                    },
                },
                LimitElem {
                    stage: top,
                    elem: if graph {
                        Elem::Vertex { id: r }
                    } else {
                        Elem::Point { id: r }
                    },
                },
            )
        })
        .collect();
    Ok(PartialIso {
        pairs,
        rounds,
        verified,
        note,
    })
}

enum ExtendOutcome {
    Extended(u64, u64),
    /// Nothing left to cover on the marching side.
    Exhausted,
    /// An element had no pattern-matching partner.
    Stuck(u64),
}

/// One extension move: `forth` marches the smallest uncovered left element
/// and seeks a right partner with the same pattern against the anchors;
/// `!forth` mirrors it.
fn extend_point_pairing(
    x_top: &Obj,
    y_top: &Obj,
    left: &[u64],
    right: &[u64],
    graph: bool,
    forth: bool,
) -> Result<ExtendOutcome> {
    let (src_top, dst_top, src_used, dst_used) = if forth {
        (x_top, y_top, left, right)
    } else {
        (y_top, x_top, right, left)
    };
    let src_count = src_top.element_count() as u64;
    let dst_count = dst_top.element_count() as u64;
    let Some(u) = (0..src_count).find(|id| !src_used.contains(id)) else {
        return Ok(ExtendOutcome::Exhausted);
    };
    let matches = |v: u64| -> Result<bool> {
        if dst_used.contains(&v) {
            return Ok(false);
        }
        for (idx, &anchor) in src_used.iter().enumerate() {
            let partner = dst_used[idx];
            let ok = if graph {
                let (_, se) = src_top.as_graph()?;
                let (_, de) = dst_top.as_graph()?;
                finite::adjacent(se, u, anchor) == finite::adjacent(de, v, partner)
            } else {
                let sp = src_top.as_order()?;
                let dp = dst_top.as_order()?;
                let su = finite::order_pos(sp, u)
                    .ok_or_else(|| Error::Domain("id missing from its own stage".into()))?;
                let sa = finite::order_pos(sp, anchor)
                    .ok_or_else(|| Error::Domain("id missing from its own stage".into()))?;
                let dv = finite::order_pos(dp, v)
                    .ok_or_else(|| Error::Domain("id missing from its own stage".into()))?;
                let dpn = finite::order_pos(dp, partner)
                    .ok_or_else(|| Error::Domain("id missing from its own stage".into()))?;
                (su < sa) == (dv < dpn)
            };
            if !ok {
                return Ok(false);
            }
        }
        Ok(true)
    };
    for v in 0..dst_count {
        if matches(v)? {
            return Ok(if forth {
                ExtendOutcome::Extended(u, v)
            } else {
                ExtendOutcome::Extended(v, u)
            });
        }
    }
    Ok(ExtendOutcome::Stuck(u))
}

fn verify_point_pairing(
    x_top: &Obj,
    y_top: &Obj,
    left: &[u64],
    right: &[u64],
    graph: bool,
) -> Result<bool> {
    if left.len() != right.len() {
        return Ok(false);
    }
    for (i, (&l, &r)) in left.iter().zip(right).enumerate() {
        if left[..i].contains(&l) || right[..i].contains(&r) {
            return Ok(false);
        }
        for (&l2, &r2) in left.iter().zip(right).take(i) {
            let ok = if graph {
                let (_, xe) = x_top.as_graph()?;
                let (_, ye) = y_top.as_graph()?;
                finite::adjacent(xe, l, l2) == finite::adjacent(ye, r, r2)
            } else {
                let xp = x_top.as_order()?;
                let yp = y_top.as_order()?;
                let a = finite::order_pos(xp, l).zip(finite::order_pos(xp, l2));
                let b = finite::order_pos(yp, r).zip(finite::order_pos(yp, r2));
                match (a, b) {
                    (Some((pa, pa2)), Some((pb, pb2))) => (pa < pa2) == (pb < pb2),
                    _ => false,
                }
            };
            if !ok {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Back-and-forth between two chains on vertex/point ids.
fn point_bnf(x: &ChainState, y: &ChainState, depth: usize, graph: bool) -> Result<PartialIso> {
    let mut left: Vec<u64> = Vec::new();
    let mut right: Vec<u64> = Vec::new();
    let mut rounds = 0;
    let mut note = None;
    let goal = |left: &[u64], right: &[u64]| -> bool {
        let dx = (depth as u64).min(x.top().element_count() as u64);
        let dy = (depth as u64).min(y.top().element_count() as u64);
        (0..dx).all(|id| left.contains(&id)) && (0..dy).all(|id| right.contains(&id))
    };
    for _ in 0..(4 * depth + 16) {
        if goal(&left, &right) {
            break;
        }
        let forth = rounds % 2 == 0;
        match extend_point_pairing(x.top(), y.top(), &left, &right, graph, forth)? {
            ExtendOutcome::Extended(u, v) => {
                left.push(u);
                right.push(v);
                rounds += 1;
            }
            ExtendOutcome::Exhausted => {
                rounds += 1;
            }
            ExtendOutcome::Stuck(u) => {
                note = Some(format!("no partner matches the pattern of element {u}"));
                break;
            }
        }
    }
    let verified = verify_point_pairing(x.top(), y.top(), &left, &right, graph)?;
    let pairs = left
        .iter()
        .zip(&right)
        .map(|(&l, &r)| {
            (
                LimitElem {
                    stage: x.len(),
                    elem: if graph {
                        Elem::Vertex { id: l }
                    } else {
                        Elem::Point { id: l }
                    },
                },
                LimitElem {
                    stage: y.len(),
                    elem: if graph {
                        Elem::Vertex { id: r }
                    } else {
                        Elem::Point { id: r }
                    },
                },
            )
        })
        .collect();
    Ok(PartialIso {
        pairs,
        rounds,
        verified,
        note,
    })
}

/// Single-letter steps of a tower in index order: `(step index, letter,
/// is_ce, core if ce)`.
fn letter_steps(t: &Tower) -> Vec<(usize, Gen, bool, Option<Word>)> {
    t.steps()
        .iter()
        .enumerate()
        .filter_map(|(i, s)| match s {
            TowerStep::Ce { letter, core, .. } => Some((i, *letter, true, Some(core.clone()))),
            TowerStep::Fp { letters } if letters.len() == 1 => {
                Some((i, letters[0], false, None))
            }
            TowerStep::Fp { .. } => None,
        })
        .collect()
}

/// One extension move of the letter-dictionary game: pick an uncovered
/// source step letter whose core is supported on covered letters, translate
/// the core through the dictionary, and pair it with an uncovered target
/// step letter of the same kind and semantically equal core.
fn extend_tower_dict(
    src: &Tower,
    dst: &Tower,
    dict: &BTreeMap<Gen, Gen>,
    reverse: &BTreeMap<Gen, Gen>,
) -> Option<(Gen, Gen)> {
    let dst_steps = letter_steps(dst);
    for (_, l, is_ce, core) in letter_steps(src) {
        if dict.contains_key(&l) {
            continue;
        }
        let translated = match &core {
            Some(c) => {
                if !c
                    .generators_used()
                    .iter()
                    .all(|g| dict.contains_key(g))
                {
                    continue;
                }
                Some(c.relabel(|g| dict[&g]))
            }
            None => None,
        };
        for &(_, r, r_ce, ref r_core) in &dst_steps {
            if reverse.contains_key(&r) || r_ce != is_ce {
                continue;
            }
            let core_ok = match (&translated, r_core) {
                (Some(tc), Some(rc)) => dst.equals(tc, rc),
                (None, None) => true,
                _ => false,
            };
            if core_ok {
                return Some((l, r));
            }
        }
    }
    None
}

/// The letter-dictionary game inside one chain (used by the homogeneity
/// witness): both sides live in the top tower.
fn tower_game(
    chain: &ChainState,
    top: &Tower,
    mut dict: BTreeMap<Gen, Gen>,
    depth: usize,
) -> Result<PartialIso> {
    let mut reverse: BTreeMap<Gen, Gen> = dict.iter().map(|(&k, &v)| (v, k)).collect();
    if reverse.len() != dict.len() {
        return Err(Error::Input("the initial letter pairing is not injective".into()));
    }
    let mut rounds = 0;
    let mut note = None;
    for _ in 0..depth {
        let Some((l, r)) = extend_tower_dict(top, top, &dict, &reverse) else {
            note = Some("no uncovered step extends the pairing forward".into());
            break;
        };
        dict.insert(l, r);
        reverse.insert(r, l);
        let Some((rl, rr)) = extend_tower_dict(top, top, &reverse, &dict) else {
            note = Some("no uncovered step extends the pairing backward".into());
            break;
        };
        reverse.insert(rl, rr);
        dict.insert(rr, rl);
        rounds += 1;
    }
    let stage = chain.len();
    let pairs = dict
        .iter()
        .map(|(&l, &r)| {
            (
                LimitElem {
                    stage,
                    elem: Elem::Word {
                        text: top.print(&Word::generator(l)),
                    },
                },
                LimitElem {
                    stage,
                    elem: Elem::Word {
                        text: top.print(&Word::generator(r)),
                    },
                },
            )
        })
        .collect();
    Ok(PartialIso {
        pairs,
        rounds,
        verified: true,
        note: note.or_else(|| {
            Some(
                "each extension is certified by step-kind and semantic core matching"
                    .into(),
            )
        }),
    })
}

/// The letter-dictionary game between the top towers of two chains.
fn tower_game_two(
    x: &ChainState,
    y: &ChainState,
    tx: &Tower,
    ty: &Tower,
    mut dict: BTreeMap<Gen, Gen>,
    depth: usize,
) -> Result<PartialIso> {
    let mut reverse: BTreeMap<Gen, Gen> = dict.iter().map(|(&k, &v)| (v, k)).collect();
    let mut rounds = 0;
    let mut note = None;
    for _ in 0..depth {
        match extend_tower_dict(tx, ty, &dict, &reverse) {
            Some((l, r)) => {
                dict.insert(l, r);
                reverse.insert(r, l);
            }
            None => {
                note = Some("no uncovered step extends the pairing forward".into());
                break;
            }
        }
        match extend_tower_dict(ty, tx, &reverse, &dict) {
            Some((rl, rr)) => {
                reverse.insert(rl, rr);
                dict.insert(rr, rl);
            }
            None => {
                note = Some("no uncovered step extends the pairing backward".into());
                break;
            }
        }
        rounds += 1;
    }
    let pairs = dict
        .iter()
        .map(|(&l, &r)| {
            (
                LimitElem {
                    stage: x.len(),
                    elem: Elem::Word {
                        text: tx.print(&Word::generator(l)),
                    },
                },
                LimitElem {
                    stage: y.len(),
                    elem: Elem::Word {
                        text: ty.print(&Word::generator(r)),
                    },
                },
            )
        })
        .collect();
    Ok(PartialIso {
        pairs,
        rounds,
        verified: true,
        note: note.or_else(|| {
            Some(
                "each extension is certified by step-kind and semantic core matching"
                    .into(),
            )
        }),
    })
}
