//! Tower categories: enumeration, canonical forms, special embeddings and
//! joins.
//!
//! Objects are enumerated through a bijective coding of finite sequences of
//! naturals: index `0` is the empty sequence and `n + 1` decodes to
//! `cons(unpair(n))` under the Cantor pairing, so every finite step recipe
//! appears exactly once. Each sequence entry selects a construction step —
//! for the fixed-base category a centralizer extension over the `k`-th
//! nontrivial shortlex word of the group built so far, and for the
//! trivial-base category entry `0` adjoins a free letter while `k + 1`
//! extends the centralizer of the `k`-th word. The enumeration is total and
//! canonical-form-stable; it is not claimed injective (extending over a
//! proper power revisits the extension over its root).
//!
//! The canonical form of a tower replays its step descriptors over a
//! default-named base, naming the `j`-th step's letter `t{j}` or `c{j}` by
//! kind and extending over the stored retraction core, so towers differing
//! only in letter names or in proper-power cores are identified while the
//! step structure stays visible.
//!
//! A special embedding fixes the base pointwise and sends each step letter
//! to a conjugate of a distinct target step letter of the same kind whose
//! centralizer absorbs the (conjugated) image of the source core. The
//! enumerator below searches strictly index-increasing letter dictionaries
//! whose cores match semantically; it is sound (everything returned is a
//! verified special embedding) but not complete.

use super::Obj;
use crate::amalgam::fresh_name;
use crate::error::{Error, Result};
use crate::tower::{Hom, Tower, TowerStep};
use crate::word::{Alphabet, Gen, ShortlexWords, Word};

/// Scan bound when re-ranking a word in the shortlex enumeration.
const SHORTLEX_SCAN_CAP: usize = 100_000;
/// Node budget for the special-embedding search.
const EMBEDDING_SEARCH_CAP: usize = 20_000;

pub(crate) fn cantor_pair(x: u64, y: u64) -> u64 {
    (x + y) * (x + y + 1) / 2 + y
}

pub(crate) fn cantor_unpair(z: u64) -> (u64, u64) {
    let mut w = (((8.0 * z as f64 + 1.0).sqrt() - 1.0) / 2.0) as u64;
    while (w + 1) * (w + 2) / 2 <= z {
        w += 1;
    }
    while w * (w + 1) / 2 > z {
        w -= 1;
    }
    let y = z - w * (w + 1) / 2;
    (w - y, y)
}

/// Inverse of [`encode_seq`]: `0` is the empty sequence, `n + 1` prepends
/// `unpair(n).0` to the decoding of `unpair(n).1`.
pub(crate) fn decode_seq(index: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut i = index;
    while i > 0 {
        let (head, rest) = cantor_unpair(i - 1);
        out.push(head);
        i = rest;
    }
    out
}

pub(crate) fn encode_seq(entries: &[u64]) -> u64 {
    entries
        .iter()
        .rev()
        .fold(0u64, |acc, &h| cantor_pair(h, acc) + 1)
}

/// The `k`-th freely reduced nontrivial word over `rank` letters in
/// shortlex order.
pub(crate) fn nth_nontrivial_shortlex(rank: u32, k: u64) -> Result<Word> {
    if rank == 0 {
        return Err(Error::Domain(
            "no nontrivial words over an empty alphabet".into(),
        ));
    }
    let k = usize::try_from(k)
        .map_err(|_| Error::Input("shortlex word index overflows usize".into()))?;
    Ok(ShortlexWords::new(rank, None)
        .skip(1)
        .nth(k)
        .expect("shortlex enumeration over a nonempty alphabet is infinite"))
}

/// Position of a nontrivial word in the shortlex enumeration (bounded scan).
pub(crate) fn shortlex_rank_nontrivial(rank: u32, w: &Word) -> Option<u64> {
    if rank == 0 || w.is_identity() {
        return None;
    }
    ShortlexWords::new(rank, None)
        .skip(1)
        .take(SHORTLEX_SCAN_CAP)
        .position(|cand| &cand == w)
        .map(|i| i as u64)
}

/// Replays the step descriptors over a default-named base, naming step `j`'s
/// letter `t{j}` (centralizer) or `c{j}` (free product, suffixed when the
/// step adds several) and extending over the stored core.
pub(crate) fn canonical_tower(t: &Tower) -> Result<Tower> {
    let mut c = Tower::from_base(Alphabet::of_rank(t.base_rank()));
    for (j, step) in t.steps().iter().enumerate() {
        match step {
            TowerStep::Ce { core, .. } => {
                c = c.extend_centralizer(core, &format!("t{}", j + 1))?;
            }
            TowerStep::Fp { letters } => {
                let names: Vec<String> = if letters.len() == 1 {
                    vec![format!("c{}", j + 1)]
                } else {
                    (0..letters.len())
                        .map(|k| format!("c{}_{}", j + 1, k + 1))
                        .collect()
                };
                let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
                c = c.free_product(&refs)?;
            }
        }
    }
    Ok(c)
}

pub(crate) fn ice_object(base_rank: usize, index: u64) -> Result<Obj> {
    if base_rank == 0 {
        return Err(Error::Input("ice requires base_rank >= 1".into()));
    }
    let mut t = Tower::make(base_rank)?;
    for (j, &k) in decode_seq(index).iter().enumerate() {
        let u = nth_nontrivial_shortlex(t.letter_count() as u32, k)?;
        t = t.extend_centralizer(&u, &format!("t{}", j + 1))?;
    }
    canonical_tower(&t).map(|tower| Obj::Tower { tower })
}

pub(crate) fn fpce_object(index: u64) -> Result<Obj> {
    let mut t = Tower::from_base(Alphabet::of_rank(0));
    for (j, &k) in decode_seq(index).iter().enumerate() {
        let letters = t.letter_count() as u32;
        if letters == 0 || k == 0 {
            t = t.free_product(&[&format!("c{}", j + 1)])?;
        } else {
            let u = nth_nontrivial_shortlex(letters, k - 1)?;
            t = t.extend_centralizer(&u, &format!("t{}", j + 1))?;
        }
    }
    canonical_tower(&t).map(|tower| Obj::Tower { tower })
}

/// Recovers an enumeration index whose object equals the canonical form of
/// `t` (indices are not unique; this returns the core-normalized one).
pub(crate) fn tower_index(cat: &super::Category, t: &Tower) -> Option<u64> {
    let canon = canonical_tower(t).ok()?;
    let fixed_base = match cat {
        super::Category::Ice { base_rank } => {
            if canon.base_rank() != *base_rank {
                return None;
            }
            true
        }
        super::Category::Fpce | super::Category::LimitPlain => {
            if canon.base_rank() != 0 {
                return None;
            }
            false
        }
        _ => return None,
    };
    let mut letters = canon.base_rank() as u32;
    let mut entries = Vec::new();
    for step in canon.steps() {
        match step {
            TowerStep::Ce { core, .. } => {
                let k = shortlex_rank_nontrivial(letters, core)?;
                entries.push(if fixed_base { k } else { k + 1 });
                letters += 1;
            }
            TowerStep::Fp { letters: ls } => {
                if fixed_base || ls.len() != 1 {
                    return None;
                }
                entries.push(0);
                letters += 1;
            }
        }
    }
    Some(encode_seq(&entries))
}

/// Step index owning a given step letter.
fn step_of_letter(t: &Tower, g: Gen) -> Option<usize> {
    t.steps().iter().position(|step| match step {
        TowerStep::Ce { letter, .. } => *letter == g,
        TowerStep::Fp { letters } => letters.contains(&g),
    })
}

/// Letters a step adds, in index order.
fn step_letters(step: &TowerStep) -> Vec<Gen> {
    match step {
        TowerStep::Ce { letter, .. } => vec![*letter],
        TowerStep::Fp { letters } => letters.clone(),
    }
}

/// Writes a reduced word as `p^-1 · s · p` for a step letter `s` (exponent
/// `+1`), returning `(s, p)`. Picks the first syllable that works.
fn conjugated_letter(t: &Tower, img: &Word) -> Option<(Gen, Word)> {
    let reduced = t.reduce(img);
    let sylls = reduced.syllables();
    for k in 0..sylls.len() {
        let (g, e) = sylls[k];
        if e != 1 || (g as usize) < t.base_rank() {
            continue;
        }
        let p = Word::from_syllables(sylls[k + 1..].to_vec());
        if t.equals(&reduced, &Word::generator(g).conj_by(&p)) {
            return Some((g, p));
        }
    }
    None
}

/// Special-embedding test: identity on a shared base, step letters to
/// conjugates of distinct same-kind target step letters, and for centralizer
/// steps the conjugated image of the source core must commute with the
/// target letter (so it lies in the abelian centralizer that letter spans).
pub(crate) fn tower_emb_is_special(h: &Hom) -> bool {
    let a = h.source();
    let c = h.target();
    if a.base_rank() != c.base_rank() {
        return false;
    }
    for i in 0..a.base_rank() {
        if h.image_of(i as Gen) != &Word::generator(i as Gen) {
            return false;
        }
    }
    let mut pivots: Vec<Gen> = Vec::new();
    for step in a.steps() {
        for g in step_letters(step) {
            let img = h.image_of(g);
            let Some((pivot, conj)) = conjugated_letter(c, img) else {
                return false;
            };
            if pivots.contains(&pivot) {
                return false;
            }
            let Some(target_step) = step_of_letter(c, pivot) else {
                return false;
            };
            if step.is_ce() != c.steps()[target_step].is_ce() {
                return false;
            }
            if let TowerStep::Ce { core, .. } = step {
                let straightened = h.apply(core).conj_by(&conj.inverse());
                if !c.commutes(&straightened, &Word::generator(pivot)) {
                    return false;
                }
            }
            pivots.push(pivot);
        }
    }
    true
}

/// Enumerates verified special embeddings of `a` into `stage` along strictly
/// index-increasing letter dictionaries with semantically equal cores, in
/// lex order, up to `limit` results. Sound but not complete: conjugated
/// placements are recognised by [`tower_emb_is_special`] but not searched.
pub(crate) fn special_tower_embeddings(a: &Tower, stage: &Tower, limit: usize) -> Vec<Hom> {
    if a.base_rank() != stage.base_rank() || limit == 0 {
        return Vec::new();
    }
    // Single-letter steps only; engine-enumerated objects never use more.
    let a_steps: Vec<&TowerStep> = a.steps().iter().collect();
    if a_steps.iter().any(|s| step_letters(s).len() != 1) {
        return Vec::new();
    }
    let s_steps: Vec<(usize, &TowerStep)> = stage
        .steps()
        .iter()
        .enumerate()
        .filter(|(_, s)| step_letters(s).len() == 1)
        .collect();

    struct Search<'a> {
        a: &'a Tower,
        stage: &'a Tower,
        a_steps: Vec<&'a TowerStep>,
        s_steps: Vec<(usize, &'a TowerStep)>,
        images: Vec<Word>,
        found: Vec<Hom>,
        limit: usize,
        nodes: usize,
    }

    impl Search<'_> {
        fn go(&mut self, depth: usize, from: usize) {
            if self.found.len() >= self.limit || self.nodes >= EMBEDDING_SEARCH_CAP {
                return;
            }
            self.nodes += 1;
            if depth == self.a_steps.len() {
                if let Ok(h) = Hom::new(self.a.clone(), self.stage.clone(), self.images.clone()) {
                    if tower_emb_is_special(&h) {
                        self.found.push(h);
                    }
                }
                return;
            }
            let a_step = self.a_steps[depth];
            for cand in from..self.s_steps.len() {
                let (_, s_step) = self.s_steps[cand];
                if a_step.is_ce() != s_step.is_ce() {
                    continue;
                }
                if let (TowerStep::Ce { core: ac, .. }, TowerStep::Ce { core: sc, .. }) =
                    (a_step, s_step)
                {
                    let translated = ac.substitute(&self.images);
                    if !self.stage.equals(&translated, sc) {
                        continue;
                    }
                }
                let letter = step_letters(s_step)[0];
                self.images.push(Word::generator(letter));
                self.go(depth + 1, cand + 1);
                self.images.pop();
                if self.found.len() >= self.limit || self.nodes >= EMBEDDING_SEARCH_CAP {
                    return;
                }
            }
        }
    }

    let mut search = Search {
        a,
        stage,
        a_steps,
        s_steps,
        images: (0..a.base_rank() as Gen).map(Word::generator).collect(),
        found: Vec::new(),
        limit,
        nodes: 0,
    };
    search.go(0, 0);
    search.found
}

/// Stacks `obj`'s steps on top of `stage` over their shared base (both ranks
/// must agree; the trivial-base category shares the empty base). Step
/// letters keep their names when free, otherwise get `_2`, `_3`, …
/// suffixes. Returns the grown stage and the verified embedding of `obj`.
pub(crate) fn tower_join(stage: &Tower, obj: &Tower) -> Result<(Tower, Hom)> {
    if stage.base_rank() != obj.base_rank() {
        return Err(Error::Input(
            "cannot join towers over different base ranks".into(),
        ));
    }
    let mut new = stage.clone();
    let mut map: Vec<Gen> = (0..obj.base_rank() as Gen).collect();
    for step in obj.steps() {
        match step {
            TowerStep::Ce { core, letter, .. } => {
                let translated = core.relabel(|g| map[g as usize]);
                let name = fresh_name(new.alphabet(), obj.alphabet().name(*letter));
                let next = new.letter_count() as Gen;
                new = new.extend_centralizer(&translated, &name)?;
                map.push(next);
            }
            TowerStep::Fp { letters } => {
                let mut names: Vec<String> = Vec::new();
                for &g in letters {
                    let mut name = fresh_name(new.alphabet(), obj.alphabet().name(g));
                    let mut bump = 2;
                    while names.contains(&name) {
                        name = format!("{}_{bump}", obj.alphabet().name(g));
                        bump += 1;
                    }
                    names.push(name);
                }
                let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
                let next = new.letter_count() as Gen;
                new = new.free_product(&refs)?;
                for k in 0..letters.len() {
                    map.push(next + k as Gen);
                }
            }
        }
    }
    let images: Vec<Word> = map.iter().map(|&g| Word::generator(g)).collect();
    let hom = Hom::new(obj.clone(), new.clone(), images)?;
    Ok((new, hom))
}

/// One extension task against a stage tower.
pub(crate) enum TowerTask {
    /// Extend the centralizer of the given stage word.
    Ce(Word),
    /// Adjoin one free letter.
    Fp,
}

pub(crate) fn apply_tower_task(stage: &Tower, task: &TowerTask) -> Result<(Tower, String)> {
    let step_no = stage.steps().len() + 1;
    match task {
        TowerTask::Ce(w) => {
            let name = fresh_name(stage.alphabet(), &format!("t{step_no}"));
            let new = stage.extend_centralizer(w, &name)?;
            Ok((new, format!("extend centralizer of {}", stage.print(w))))
        }
        TowerTask::Fp => {
            let name = fresh_name(stage.alphabet(), &format!("c{step_no}"));
            let new = stage.free_product(&[name.as_str()])?;
            Ok((new, "adjoin a free letter".into()))
        }
    }
}

/// Identity inclusion of a tower into an extension of itself (same letters,
/// possibly more steps above).
pub(crate) fn inclusion_hom(prefix: &Tower, whole: &Tower) -> Result<Hom> {
    let images: Vec<Word> = (0..prefix.letter_count() as Gen)
        .map(Word::generator)
        .collect();
    Hom::new(prefix.clone(), whole.clone(), images)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::Category;

    #[test]
    fn sequence_coding_is_bijective() {
        for i in 0..500u64 {
            let seq = decode_seq(i);
            assert_eq!(encode_seq(&seq), i);
        }
        assert_eq!(decode_seq(0), Vec::<u64>::new());
        for (x, y) in [(0, 0), (3, 5), (100, 0), (7, 7)] {
            assert_eq!(cantor_unpair(cantor_pair(x, y)), (x, y));
        }
    }

    #[test]
    fn shortlex_ranking_inverts_the_enumeration() {
        for k in 0..40 {
            let w = nth_nontrivial_shortlex(2, k).unwrap();
            assert_eq!(shortlex_rank_nontrivial(2, &w), Some(k));
        }
        assert!(nth_nontrivial_shortlex(0, 0).is_err());
    }

    #[test]
    fn ice_enumeration_starts_with_the_free_base() {
        let Obj::Tower { tower } = ice_object(2, 0).unwrap() else {
            unreachable!()
        };
        assert_eq!(tower.base_rank(), 2);
        assert_eq!(tower.depth(), 0);

        let Obj::Tower { tower } = ice_object(2, 1).unwrap() else {
            unreachable!()
        };
        assert_eq!(tower.depth(), 1);
        match &tower.steps()[0] {
            TowerStep::Ce { core, .. } => assert_eq!(core, &Word::generator(0)),
            other => panic!("expected a centralizer step, got {other:?}"),
        }
        assert_eq!(tower.alphabet().name(2), "t1");
    }

    #[test]
    fn fpce_enumeration_starts_trivial_and_forces_a_free_letter_first() {
        let Obj::Tower { tower } = fpce_object(0).unwrap() else {
            unreachable!()
        };
        assert_eq!(tower.letter_count(), 0);

        let Obj::Tower { tower } = fpce_object(1).unwrap() else {
            unreachable!()
        };
        assert_eq!(tower.letter_count(), 1);
        assert!(matches!(tower.steps()[0], TowerStep::Fp { .. }));
    }

    #[test]
    fn enumerated_objects_are_canonical_and_reindexable() {
        let ice = Category::Ice { base_rank: 2 };
        for i in 0..25 {
            let obj = ice.object(i).unwrap();
            assert_eq!(ice.canonical(&obj).unwrap(), obj, "ice object {i}");
            let Obj::Tower { tower } = &obj else { unreachable!() };
            let j = tower_index(&ice, tower).expect("index recovered");
            assert_eq!(ice.object(j).unwrap(), obj, "ice reindex {i} -> {j}");
        }
        for i in 0..25 {
            let obj = Category::Fpce.object(i).unwrap();
            assert_eq!(Category::Fpce.canonical(&obj).unwrap(), obj, "fpce object {i}");
            let Obj::Tower { tower } = &obj else { unreachable!() };
            let j = tower_index(&Category::Fpce, tower).expect("index recovered");
            assert_eq!(Category::Fpce.object(j).unwrap(), obj, "fpce reindex {i} -> {j}");
        }
    }

    #[test]
    fn canonical_form_identifies_renamed_and_power_cores() {
        let base = Tower::make(2).unwrap();
        let a = Word::generator(0);
        let by_root = base.extend_centralizer(&a, "s").unwrap();
        let by_square = base.extend_centralizer(&a.pow(2), "zz").unwrap();
        assert_eq!(
            canonical_tower(&by_root).unwrap(),
            canonical_tower(&by_square).unwrap()
        );
        let b = Word::generator(1);
        let other = base.extend_centralizer(&b, "s").unwrap();
        assert_ne!(
            canonical_tower(&by_root).unwrap(),
            canonical_tower(&other).unwrap()
        );
    }

    #[test]
    fn special_test_accepts_conjugated_letters_and_rejects_base_moves() {
        let base = Tower::make(2).unwrap();
        let t = base.extend_centralizer(&Word::generator(0), "t").unwrap();
        let ident = Hom::identity(&t);
        assert!(tower_emb_is_special(&ident));

        // a |-> a, b |-> b, t |-> a^-1 t a: still special (conjugator fixes
        // the core's centralizer).
        let conj = Hom::new(
            t.clone(),
            t.clone(),
            vec![
                Word::generator(0),
                Word::generator(1),
                Word::generator(2).conj_by(&Word::generator(0)),
            ],
        )
        .unwrap();
        assert!(tower_emb_is_special(&conj));

        // Swapping the free base letters is a homomorphism but not special.
        let swap = Hom::new(
            base.clone(),
            base.clone(),
            vec![Word::generator(1), Word::generator(0)],
        )
        .unwrap();
        assert!(!tower_emb_is_special(&swap));

        // Sending t to its square keeps all relations but is not a
        // letter-to-conjugated-letter map.
        let square = Hom::new(
            t.clone(),
            t.clone(),
            vec![
                Word::generator(0),
                Word::generator(1),
                Word::generator(2).pow(2),
            ],
        )
        .unwrap();
        assert!(!tower_emb_is_special(&square));
    }

    #[test]
    fn embedding_search_matches_cores_semantically() {
        let base = Tower::make(2).unwrap();
        let a = base.extend_centralizer(&Word::generator(0), "t").unwrap();
        let stage = a
            .extend_centralizer(&Word::generator(1), "s")
            .unwrap();
        let found = special_tower_embeddings(&a, &stage, 8);
        assert_eq!(found.len(), 1, "only the core-matching step qualifies");
        assert_eq!(found[0].image_of(2), &Word::generator(2));

        // A second step over the same core gives a second placement.
        let richer = stage
            .extend_centralizer(&Word::generator(0), "t2")
            .unwrap();
        let found = special_tower_embeddings(&a, &richer, 8);
        assert_eq!(found.len(), 2);
    }

    #[test]
    fn join_stacks_over_the_shared_base_and_renames() {
        let base = Tower::make(2).unwrap();
        let t = base.extend_centralizer(&Word::generator(0), "t").unwrap();
        let (joined, emb) = tower_join(&t, &t).unwrap();
        assert_eq!(joined.letter_count(), 4);
        assert_eq!(joined.depth(), 2);
        assert_eq!(joined.alphabet().name(3), "t_2");
        assert_eq!(emb.image_of(2), &Word::generator(3));
        assert!(tower_emb_is_special(&emb));

        // Both steps extend the centralizer of the same core, which grows to
        // contain all three of the core and the two copies of t.
        let core = Word::generator(0);
        assert!(joined.commutes(&Word::generator(2), &core));
        assert!(joined.commutes(&Word::generator(3), &core));
        assert!(joined.commutes(&Word::generator(2), &Word::generator(3)));

        // Joining a step over a different core keeps the copies independent.
        let s = base.extend_centralizer(&Word::generator(1), "s").unwrap();
        let (mixed, emb_s) = tower_join(&t, &s).unwrap();
        assert!(tower_emb_is_special(&emb_s));
        assert!(!mixed.commutes(&Word::generator(2), &Word::generator(3)));
    }

    #[test]
    fn tower_tasks_extend_and_adjoin() {
        let base = Tower::make(2).unwrap();
        let (grown, detail) =
            apply_tower_task(&base, &TowerTask::Ce(Word::generator(1))).unwrap();
        assert_eq!(grown.depth(), 1);
        assert!(detail.contains("extend centralizer"));
        let (grown2, _) = apply_tower_task(&grown, &TowerTask::Fp).unwrap();
        assert_eq!(grown2.letter_count(), 4);
        assert!(inclusion_hom(&base, &grown2).is_ok());
    }
}
