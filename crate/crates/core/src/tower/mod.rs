//! Groups built from a free base by iterated centralizer extensions (CE
//! steps) and free products with free groups (FP steps).
//!
//! A CE step on a group `G` with a chosen nontrivial `u` adjoins a fresh
//! letter `t` subject to `[c, t] = 1` for every `c` in the centralizer
//! `C_G(u)` — the amalgam `G ∗_{C} (C × ⟨t⟩)`. An FP step adjoins fresh free
//! letters. Elements are plain words over the accumulated alphabet; equality
//! is decided by Britton reduction (see [`Tower::reduce`]), which is sound,
//! complete and idempotent at every level.
//!
//! Centralizer membership is operationalized as commutation with `u`: every
//! tower level is a CSA group, where commutation with a nontrivial element
//! characterizes membership in its (abelian) centralizer. Each CE step also
//! records a designated `core` element ρ (the primitive root of `u` when `u`
//! is a base word, `u` itself otherwise) used as the target of big-power
//! retractions, and a witness basis of centralizer elements used to verify
//! homomorphisms.
//!
//! Towers, elements and homs are immutable values; all operations here are
//! pure. The ℤ[t]-exponentiation session in [`zt`] is the one mutable
//! entity.

mod hom;
mod reduce;
mod retract;
mod zt;

pub use hom::Hom;
pub use retract::{
    discriminate_to_free, discriminate_to_free_with_caps, discriminating_hom,
    discriminating_hom_with_cap, level_retraction, DEFAULT_EXP_CAP, DEFAULT_SUBST_CAP,
};
pub use zt::{Polynomial, ZtSession};

use crate::error::{Error, Result};
use crate::word::{parse_word, word_to_text, Alphabet, Gen, Word};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// One layer of a tower.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TowerStep {
    /// Centralizer extension by `letter` over the element `u` of the group
    /// below. `core` is the retraction target ρ; `basis` lists witness
    /// generators of the centralizer below (always containing `core`).
    Ce {
        u: Word,
        letter: Gen,
        core: Word,
        basis: Vec<Word>,
    },
    /// Free product with the free group on `letters`.
    Fp { letters: Vec<Gen> },
}

impl TowerStep {
    pub fn is_ce(&self) -> bool {
        matches!(self, TowerStep::Ce { .. })
    }

    fn letters_added(&self) -> usize {
        match self {
            TowerStep::Ce { .. } => 1,
            TowerStep::Fp { letters } => letters.len(),
        }
    }

    fn relabel(&self, map: impl Fn(Gen) -> Gen) -> TowerStep {
        match self {
            TowerStep::Ce {
                u,
                letter,
                core,
                basis,
            } => TowerStep::Ce {
                u: u.relabel(&map),
                letter: map(*letter),
                core: core.relabel(&map),
                basis: basis.iter().map(|b| b.relabel(&map)).collect(),
            },
            TowerStep::Fp { letters } => TowerStep::Fp {
                letters: letters.iter().map(|&g| map(g)).collect(),
            },
        }
    }
}

/// A free base plus an ordered list of steps. Generator indices are assigned
/// in construction order: base letters first, then each step's letters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tower {
    alphabet: Alphabet,
    base_rank: usize,
    steps: Vec<TowerStep>,
}

impl Tower {
    /// Free group of the given positive rank with default letter names.
    pub fn make(rank: usize) -> Result<Tower> {
        if rank == 0 {
            return Err(Error::Domain(
                "tower base must have rank at least 1 (the trivial base arises only \
                 via free-product steps over an empty base)"
                    .into(),
            ));
        }
        Ok(Tower::from_base(Alphabet::of_rank(rank)))
    }

    /// Free group on an arbitrary alphabet (rank 0 allowed: the trivial
    /// group, extendable by FP steps only).
    pub fn from_base(alphabet: Alphabet) -> Tower {
        let base_rank = alphabet.rank();
        Tower {
            alphabet,
            base_rank,
            steps: Vec::new(),
        }
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn base_rank(&self) -> usize {
        self.base_rank
    }

    pub fn steps(&self) -> &[TowerStep] {
        &self.steps
    }

    pub fn depth(&self) -> usize {
        self.steps.len()
    }

    /// Total number of generators (base plus all step letters).
    pub fn letter_count(&self) -> usize {
        self.alphabet.rank()
    }

    /// Number of generators available below step `height` (base letters plus
    /// the letters of all earlier steps).
    pub(crate) fn letters_below(&self, height: usize) -> usize {
        self.base_rank
            + self.steps[..height]
                .iter()
                .map(TowerStep::letters_added)
                .sum::<usize>()
    }

    /// The lower tower consisting of the first `height` steps.
    pub fn prefix(&self, height: usize) -> Tower {
        assert!(height <= self.depth());
        let n = self.letters_below(height);
        let alphabet = Alphabet::new(self.alphabet.names()[..n].iter().cloned())
            .expect("prefix of a valid alphabet");
        Tower {
            alphabet,
            base_rank: self.base_rank,
            steps: self.steps[..height].to_vec(),
        }
    }

    pub(crate) fn check_element(&self, w: &Word) -> Result<()> {
        if let Some(g) = w.max_gen() {
            if g as usize >= self.letter_count() {
                return Err(Error::Input(format!(
                    "word uses generator index {g} outside the tower's alphabet"
                )));
            }
        }
        Ok(())
    }

    /// Appends a centralizer extension over `u` with a fresh letter.
    ///
    /// Records the step core ρ (primitive root of `u` for base words, `u`
    /// otherwise) and the witness basis: ρ together with every earlier CE
    /// letter that commutes with `u` here (the same-ladder letters).
    pub fn extend_centralizer(&self, u: &Word, letter: &str) -> Result<Tower> {
        self.check_element(u)?;
        if self.is_trivial(u) {
            return Err(Error::Domain(
                "cannot extend the centralizer of the identity".into(),
            ));
        }
        let mut alphabet = self.alphabet.clone();
        let letter_gen = alphabet.push(letter)?;
        let core = match u.max_gen() {
            Some(g) if (g as usize) < self.base_rank => u.primitive_root()?.0,
            _ => u.clone(),
        };
        let mut basis = vec![core.clone()];
        for step in &self.steps {
            if let TowerStep::Ce { letter: t, .. } = step {
                let tw = Word::generator(*t);
                if !basis.contains(&tw) && self.commutes(u, &tw) {
                    basis.push(tw);
                }
            }
        }
        let mut steps = self.steps.clone();
        steps.push(TowerStep::Ce {
            u: u.clone(),
            letter: letter_gen,
            core,
            basis,
        });
        Ok(Tower {
            alphabet,
            base_rank: self.base_rank,
            steps,
        })
    }

    /// Appends a free-product step adjoining the given fresh letters.
    pub fn free_product(&self, letters: &[&str]) -> Result<Tower> {
        if letters.is_empty() {
            return Err(Error::Input(
                "free-product step needs at least one letter".into(),
            ));
        }
        let mut alphabet = self.alphabet.clone();
        let mut gens = Vec::with_capacity(letters.len());
        for name in letters {
            gens.push(alphabet.push(name)?);
        }
        let mut steps = self.steps.clone();
        steps.push(TowerStep::Fp { letters: gens });
        Ok(Tower {
            alphabet,
            base_rank: self.base_rank,
            steps,
        })
    }

    pub fn parse(&self, text: &str) -> Result<Word> {
        parse_word(&self.alphabet, text)
    }

    pub fn print(&self, w: &Word) -> String {
        word_to_text(&self.alphabet, w)
    }
}

/// Free product of two towers: bases concatenate, then the left steps, then
/// the right steps. Since a CE step's centralizer is unchanged by adjoining
/// an independent free factor below it, the result presents `T1 ∗ T2` with
/// the identity on (possibly renamed) generators.
#[derive(Clone, Debug)]
pub struct FreeProductResult {
    pub tower: Tower,
    /// Generator index maps from each factor into the product.
    pub left_map: Vec<Gen>,
    pub right_map: Vec<Gen>,
    /// (old, new) names for right-factor letters renamed to avoid clashes.
    pub renames: Vec<(String, String)>,
}

pub fn free_multiply(left: &Tower, right: &Tower) -> FreeProductResult {
    let mut names: Vec<String> = Vec::with_capacity(left.letter_count() + right.letter_count());
    let mut renames = Vec::new();
    let fresh = |taken: &[String], old: &str| -> String {
        if !taken.contains(&old.to_string()) {
            return old.to_string();
        }
        let mut i = 2;
        loop {
            let cand = format!("{old}_{i}");
            if !taken.contains(&cand) {
                return cand;
            }
            i += 1;
        }
    };

    // Base letters: left then right; then left step letters, then right's.
    for n in &left.alphabet.names()[..left.base_rank] {
        names.push(n.clone());
    }
    let mut right_map = vec![0 as Gen; right.letter_count()];
    for (i, n) in right.alphabet.names()[..right.base_rank].iter().enumerate() {
        let new = fresh(&names, n);
        if &new != n {
            renames.push((n.clone(), new.clone()));
        }
        right_map[i] = names.len() as Gen;
        names.push(new);
    }
    let mut left_map = vec![0 as Gen; left.letter_count()];
    for (i, item) in left_map.iter_mut().enumerate().take(left.base_rank) {
        *item = i as Gen;
    }
    for (i, n) in left.alphabet.names()[left.base_rank..].iter().enumerate() {
        let old_idx = left.base_rank + i;
        let new = fresh(&names, n);
        if &new != n {
            renames.push((n.clone(), new.clone()));
        }
        left_map[old_idx] = names.len() as Gen;
        names.push(new);
    }
    for (i, n) in right.alphabet.names()[right.base_rank..].iter().enumerate() {
        let old_idx = right.base_rank + i;
        let new = fresh(&names, n);
        if &new != n {
            renames.push((n.clone(), new.clone()));
        }
        right_map[old_idx] = names.len() as Gen;
        names.push(new);
    }

    let alphabet = Alphabet::new(names).expect("freshened names are valid and distinct");
    let mut steps = Vec::with_capacity(left.steps.len() + right.steps.len());
    for s in &left.steps {
        steps.push(s.relabel(|g| left_map[g as usize]));
    }
    for s in &right.steps {
        steps.push(s.relabel(|g| right_map[g as usize]));
    }
    FreeProductResult {
        tower: Tower {
            alphabet,
            base_rank: left.base_rank + right.base_rank,
            steps,
        },
        left_map,
        right_map,
        renames,
    }
}

/// Rewrites the step list so every FP contribution merges into the base and
/// the CE steps follow in their original order. The underlying group is
/// unchanged: FP letters never occur in any CE step's `u`, and adjoining an
/// independent free factor below a CE step does not alter the extended
/// centralizer. Returns the new tower and the generator bijection
/// (old index → new index); names are preserved.
pub fn fpce_normalize(t: &Tower) -> (Tower, Vec<Gen>) {
    let total = t.letter_count();
    let mut fp_letters: Vec<Gen> = Vec::new();
    let mut ce_indices: Vec<usize> = Vec::new();
    for (i, s) in t.steps.iter().enumerate() {
        match s {
            TowerStep::Fp { letters } => fp_letters.extend(letters.iter().copied()),
            TowerStep::Ce { .. } => ce_indices.push(i),
        }
    }
    let new_base = t.base_rank + fp_letters.len();
    let mut map = vec![0 as Gen; total];
    for (g, slot) in map.iter_mut().enumerate().take(t.base_rank) {
        *slot = g as Gen;
    }
    for (i, &g) in fp_letters.iter().enumerate() {
        map[g as usize] = (t.base_rank + i) as Gen;
    }
    let mut next = new_base as Gen;
    for &si in &ce_indices {
        if let TowerStep::Ce { letter, .. } = &t.steps[si] {
            map[*letter as usize] = next;
            next += 1;
        }
    }
    let mut names = vec![String::new(); total];
    for g in 0..total {
        names[map[g] as usize] = t.alphabet.name(g as Gen).to_string();
    }
    let alphabet = Alphabet::new(names).expect("permutation of a valid alphabet");
    let steps: Vec<TowerStep> = ce_indices
        .iter()
        .map(|&si| t.steps[si].relabel(|g| map[g as usize]))
        .collect();
    let tower = Tower {
        alphabet,
        base_rank: new_base,
        steps,
    };
    (tower, map)
}

// ---------------------------------------------------------------------------
// JSON form
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct TowerDoc {
    base: Vec<String>,
    steps: Vec<StepDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum StepDoc {
    Ce { u: String, letter: String },
    Fp { letters: Vec<String> },
}

impl Serialize for Tower {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let steps = self
            .steps
            .iter()
            .map(|step| match step {
                TowerStep::Ce { u, letter, .. } => StepDoc::Ce {
                    u: self.print(u),
                    letter: self.alphabet.name(*letter).to_string(),
                },
                TowerStep::Fp { letters } => StepDoc::Fp {
                    letters: letters
                        .iter()
                        .map(|&g| self.alphabet.name(g).to_string())
                        .collect(),
                },
            })
            .collect();
        TowerDoc {
            base: self.alphabet.names()[..self.base_rank].to_vec(),
            steps,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Tower {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let doc = TowerDoc::deserialize(d)?;
        let base = Alphabet::new(doc.base).map_err(|e| D::Error::custom(e.to_string()))?;
        let mut t = Tower::from_base(base);
        for step in doc.steps {
            t = match step {
                StepDoc::Ce { u, letter } => {
                    let word = t.parse(&u).map_err(|e| D::Error::custom(e.to_string()))?;
                    t.extend_centralizer(&word, &letter)
                        .map_err(|e| D::Error::custom(e.to_string()))?
                }
                StepDoc::Fp { letters } => {
                    let refs: Vec<&str> = letters.iter().map(String::as_str).collect();
                    t.free_product(&refs)
                        .map_err(|e| D::Error::custom(e.to_string()))?
                }
            };
        }
        Ok(t)
    }
}
