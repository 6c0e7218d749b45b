//! Constructive amalgamation of centralizer-extension towers.
//!
//! Given a span of towers `A ⊇ C ⊆ B` (both legs extending the common `C`
//! by centralizer-extension steps), [`ice_amalgamate`] builds a cocone: a
//! tower `D` with verified homomorphisms `g1: A → D` and `g2: B → D` that
//! agree on `C`.  The construction absorbs `B`'s steps into `D = A` one at a
//! time.  For each incoming step over `u₂` there are two outcomes:
//!
//! * some unconsumed step of `A` extends a centralizer `C(u₁)` conjugate to
//!   `C(u₂)` — witnessed by `d` with `u₁ᵈ` commuting with `u₂` — and the
//!   incoming letter is identified with `d⁻¹ t₁ d` instead of enlarging `D`;
//! * no step of `A` qualifies, and `D` gains a fresh step extending the
//!   centralizer of (the transported) `u₂`.
//!
//! Conjugacy of centralizers is decided automatically where that is sound:
//! commuting representatives share a centralizer; representatives that
//! cyclically reduce into the free base are decided by exact free-group
//! conjugacy of their primitive roots (up to inversion); a base
//! representative is never conjugate to one that keeps step letters after
//! cyclic reduction.  Anything else is *undetermined*: the caller must
//! supply a conjugator witness, and a missing witness is an explicit error,
//! never a silent guess.
//!
//! [`limit_group_amalgam`] is the interleaved variant used for ∀-theories:
//! instead of identifying letters it always stacks, extending each incoming
//! centralizer *as computed in the accumulated tower*, so conjugate
//! centralizers yield commuting ladder letters rather than a collapse.  It
//! returns verified embeddings of both legs plus a discrimination
//! certificate: a homomorphism onto the left leg injective on a supplied
//! finite sample.  [`jep_product`] does the analogous job for free products,
//! and [`ap_failure_demo`] reproduces the classical obstruction showing why
//! a quotient identifying `a²b²` with a square admits no such cocone.

use std::collections::BTreeSet;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::tower::{
    discriminating_hom_with_cap, fpce_normalize, free_multiply, Hom, Tower, TowerStep,
    DEFAULT_EXP_CAP, DEFAULT_SUBST_CAP,
};
use crate::word::{
    commutes as free_commutes, conjugator, three_squares_scan, word_to_text, Alphabet, Gen,
    ShortlexWords, Word,
};

/// A conjugacy witness for one pair of centralizer-extension steps: the
/// `left`-th suffix step of `A` and the `right`-th suffix step of `B`, with
/// `conjugator` a word `d` over `C` such that `u_left`ᵈ commutes with
/// `u_right`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConjugacyWitness {
    pub left: usize,
    pub right: usize,
    pub conjugator: Word,
}

/// A span `A ⊇ C ⊆ B`: two towers extending the common tower `C` by
/// centralizer-extension steps only.  Extensions are literal: `C`'s
/// generators keep their indices and names in `A` and `B`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Span {
    c: Tower,
    a: Tower,
    b: Tower,
    witnesses: Vec<ConjugacyWitness>,
}

fn require_ce_suffix(ext: &Tower, c: &Tower, leg: &str) -> Result<()> {
    if ext.depth() < c.depth() || ext.prefix(c.depth()) != *c {
        return Err(Error::Input(format!(
            "tower {leg} does not extend the span base: the first {} steps must equal the base tower",
            c.depth()
        )));
    }
    for (i, step) in ext.steps()[c.depth()..].iter().enumerate() {
        if !step.is_ce() {
            return Err(Error::Input(format!(
                "suffix step {i} of tower {leg} is a free factor; amalgamation spans take centralizer-extension steps only"
            )));
        }
    }
    Ok(())
}

impl Span {
    pub fn new(c: Tower, a: Tower, b: Tower, witnesses: Vec<ConjugacyWitness>) -> Result<Span> {
        require_ce_suffix(&a, &c, "A")?;
        require_ce_suffix(&b, &c, "B")?;
        let mut seen = BTreeSet::new();
        for w in &witnesses {
            if w.left >= a.depth() - c.depth() || w.right >= b.depth() - c.depth() {
                return Err(Error::Input(format!(
                    "witness refers to step pair ({}, {}) outside the span",
                    w.left, w.right
                )));
            }
            if !seen.insert((w.left, w.right)) {
                return Err(Error::Input(format!(
                    "duplicate witness for step pair ({}, {})",
                    w.left, w.right
                )));
            }
            c.check_element(&w.conjugator)?;
        }
        Ok(Span { c, a, b, witnesses })
    }

    pub fn base(&self) -> &Tower {
        &self.c
    }

    pub fn left(&self) -> &Tower {
        &self.a
    }

    pub fn right(&self) -> &Tower {
        &self.b
    }

    pub fn witnesses(&self) -> &[ConjugacyWitness] {
        &self.witnesses
    }

    /// The verified inclusion homomorphism `C → A`.
    pub fn inclusion_left(&self) -> Hom {
        inclusion(&self.c, &self.a)
    }

    /// The verified inclusion homomorphism `C → B`.
    pub fn inclusion_right(&self) -> Hom {
        inclusion(&self.c, &self.b)
    }

    fn witness_for(&self, left: usize, right: usize) -> Option<&Word> {
        self.witnesses
            .iter()
            .find(|w| w.left == left && w.right == right)
            .map(|w| &w.conjugator)
    }
}

/// Identity-on-generators hom from a tower into a literal step-suffix
/// extension of it.
fn inclusion(small: &Tower, big: &Tower) -> Hom {
    debug_assert_eq!(big.prefix(small.depth()), *small);
    let images = (0..small.letter_count())
        .map(|g| Word::generator(g as Gen))
        .collect();
    Hom::new(small.clone(), big.clone(), images).expect("literal suffix inclusion is a hom")
}

// --- serde ------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct WitnessDoc {
    left: usize,
    right: usize,
    conjugator: String,
}

#[derive(Serialize, Deserialize)]
struct SpanDoc {
    c: Tower,
    a: Tower,
    b: Tower,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    witnesses: Vec<WitnessDoc>,
}

impl Serialize for Span {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SpanDoc {
            c: self.c.clone(),
            a: self.a.clone(),
            b: self.b.clone(),
            witnesses: self
                .witnesses
                .iter()
                .map(|w| WitnessDoc {
                    left: w.left,
                    right: w.right,
                    conjugator: self.c.print(&w.conjugator),
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Span {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let doc = SpanDoc::deserialize(d)?;
        let witnesses = doc
            .witnesses
            .into_iter()
            .map(|w| {
                Ok(ConjugacyWitness {
                    left: w.left,
                    right: w.right,
                    conjugator: doc.c.parse(&w.conjugator).map_err(D::Error::custom)?,
                })
            })
            .collect::<std::result::Result<Vec<_>, D::Error>>()?;
        Span::new(doc.c, doc.a, doc.b, witnesses).map_err(D::Error::custom)
    }
}

/// A completed amalgamation square: `D` together with verified homs from
/// both legs that agree on the span base.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cocone {
    pub d: Tower,
    pub g1: Hom,
    pub g2: Hom,
}

impl Cocone {
    /// Checks this cocone against its span: sources and target line up and
    /// the square commutes on every generator of the base.
    pub fn verify(&self, span: &Span) -> Result<()> {
        if self.g1.source() != span.left() || self.g2.source() != span.right() {
            return Err(Error::Input(
                "cocone homs do not start at the span legs".into(),
            ));
        }
        if self.g1.target() != &self.d || self.g2.target() != &self.d {
            return Err(Error::Input("cocone homs do not land in D".into()));
        }
        for g in 0..span.base().letter_count() as Gen {
            let left = self.g1.image_of(g).clone();
            let right = self.g2.image_of(g).clone();
            if !self.d.equals(&left, &right) {
                return Err(Error::Input(format!(
                    "cocone square does not commute on generator {}",
                    span.base().alphabet().name(g)
                )));
            }
        }
        Ok(())
    }
}

/// Result of deciding whether two centralizers `C(u1)`, `C(u2)` are
/// conjugate in a tower.
enum Conjugacy {
    /// `u1`ᵈ commutes with `u2` for the returned `d` (verified).
    Yes(Word),
    /// Provably not conjugate.
    No,
    /// Not decidable here without a witness.
    Unknown,
}

/// Cyclic reduction inside a tower: returns `(core, conj)` with
/// `w = conj · core · conj⁻¹` and no syllable rotation of `core` shortening
/// further under tower reduction.  A pinch or cancellation in the *cyclic*
/// word always straddles some syllable boundary, so rotating to that
/// boundary exposes it linearly and strictly shortens; a word stuck under
/// every rotation is therefore cyclically reduced, and the per-letter
/// syllable counts of such a word are conjugacy invariants.
fn cyclic_reduce_in(t: &Tower, w: &Word) -> (Word, Word) {
    let mut core = t.reduce(w);
    let mut conj = Word::identity();
    'outer: loop {
        let sylls = core.syllables().to_vec();
        if sylls.len() < 2 {
            break;
        }
        let mut prefix = Word::identity();
        for &(g, e) in &sylls[..sylls.len() - 1] {
            prefix = prefix.mul(&Word::from_gen_pow(g, e));
            let cand = t.reduce(&core.conj_by(&prefix));
            if cand.letter_len() < core.letter_len() {
                conj = conj.mul(&prefix);
                core = cand;
                continue 'outer;
            }
        }
        break;
    }
    (core, conj)
}

/// The syllable rotations of a cyclically reduced word, paired with the
/// conjugating prefix: `(rot, p)` with `rot = p⁻¹ · w · p`.
fn syllable_rotations(t: &Tower, w: &Word) -> Vec<(Word, Word)> {
    let mut out = vec![(w.clone(), Word::identity())];
    let sylls = w.syllables().to_vec();
    let mut prefix = Word::identity();
    for &(g, e) in sylls.iter().take(sylls.len().saturating_sub(1)) {
        prefix = prefix.mul(&Word::from_gen_pow(g, e));
        out.push((t.reduce(&w.conj_by(&prefix)), prefix.clone()));
    }
    out
}

fn is_base_word(t: &Tower, w: &Word) -> bool {
    w.max_gen().is_none_or(|g| (g as usize) < t.base_rank())
}

/// Decides conjugacy of the centralizers of `u1` and `u2` in `t`.
/// A supplied witness is verified and trusted-or-rejected, never ignored.
fn centralizer_conjugacy(
    t: &Tower,
    u1: &Word,
    u2: &Word,
    witness: Option<&Word>,
) -> Result<Conjugacy> {
    if let Some(d) = witness {
        t.check_element(d)?;
        if t.commutes(&u1.conj_by(d), u2) {
            return Ok(Conjugacy::Yes(d.clone()));
        }
        return Err(Error::Input(format!(
            "supplied witness {} does not conjugate the centralizer of {} onto that of {}",
            t.print(d),
            t.print(u1),
            t.print(u2)
        )));
    }
    if t.commutes(u1, u2) {
        return Ok(Conjugacy::Yes(Word::identity()));
    }
    let (r1, c1) = cyclic_reduce_in(t, u1);
    let (r2, c2) = cyclic_reduce_in(t, u2);
    match (is_base_word(t, &r1), is_base_word(t, &r2)) {
        (true, true) => {
            let (p1, _) = r1.primitive_root()?;
            let (p2, _) = r2.primitive_root()?;
            let g = conjugator(&p1, &p2).or_else(|| conjugator(&p1, &p2.inverse()));
            match g {
                Some(g) => {
                    let d = c1.mul(&g).mul(&c2.inverse());
                    debug_assert!(t.commutes(&u1.conj_by(&d), u2));
                    if t.commutes(&u1.conj_by(&d), u2) {
                        Ok(Conjugacy::Yes(d))
                    } else {
                        Ok(Conjugacy::Unknown)
                    }
                }
                None => Ok(Conjugacy::No),
            }
        }
        // A cyclically reduced word that keeps step letters is conjugate
        // only to words that keep step letters.
        (true, false) | (false, true) => Ok(Conjugacy::No),
        (false, false) => {
            for (rot, p) in syllable_rotations(t, &r1) {
                if rot == r2 || rot == r2.inverse() {
                    let d = c1.mul(&p).mul(&c2.inverse());
                    if t.commutes(&u1.conj_by(&d), u2) {
                        return Ok(Conjugacy::Yes(d));
                    }
                }
            }
            Ok(Conjugacy::Unknown)
        }
    }
}

/// First generator name not yet in `taken`: `old` itself, else `old_2`,
/// `old_3`, ….
pub(crate) fn fresh_name(taken: &Alphabet, old: &str) -> String {
    if taken.index_of(old).is_none() {
        return old.to_string();
    }
    for k in 2.. {
        let cand = format!("{old}_{k}");
        if taken.index_of(&cand).is_none() {
            return cand;
        }
    }
    unreachable!()
}

/// Amalgamates a span of centralizer-extension towers into a cocone.
///
/// `D` starts as the left leg `A` and absorbs the right leg's steps one at
/// a time: an incoming step whose centralizer is (verifiably) conjugate to
/// that of an unconsumed `A`-step is identified with it via the conjugator;
/// otherwise, if non-conjugacy is provable against every remaining `A`-step,
/// the step is stacked on top.  Undetermined conjugacy is an error asking
/// for a witness.
pub fn ice_amalgamate(span: &Span) -> Result<Cocone> {
    let c = span.base();
    let a = span.left();
    let b = span.right();
    let a_suffix: Vec<usize> = (c.depth()..a.depth()).collect();
    let mut d = a.clone();
    let mut b_images: Vec<Word> = (0..c.letter_count() as Gen).map(Word::generator).collect();
    let mut used: BTreeSet<usize> = BTreeSet::new();

    for (j, step) in b.steps()[c.depth()..].iter().enumerate() {
        let TowerStep::Ce { u, .. } = step else {
            unreachable!("validated CE-only in Span::new")
        };
        let u_here = d.reduce(&u.substitute(&b_images));
        let b_letter_name = b.alphabet().name((c.letter_count() + j) as Gen);

        let mut identified: Option<Word> = None;
        let mut undetermined: Option<(usize, String)> = None;
        for (i, &ai) in a_suffix.iter().enumerate() {
            if used.contains(&i) {
                continue;
            }
            let TowerStep::Ce { u: ua, letter, .. } = &a.steps()[ai] else {
                unreachable!()
            };
            match centralizer_conjugacy(&d, ua, &u_here, span.witness_for(i, j))? {
                Conjugacy::Yes(g) => {
                    identified = Some(Word::generator(*letter).conj_by(&g));
                    used.insert(i);
                    break;
                }
                Conjugacy::No => {}
                Conjugacy::Unknown => {
                    if undetermined.is_none() {
                        undetermined = Some((i, d.print(ua)));
                    }
                }
            }
        }

        if let Some(img) = identified {
            b_images.push(img);
            continue;
        }
        if let Some((i, ua_text)) = undetermined {
            return Err(Error::NeedsWitness(format!(
                "conjugacy of the centralizers of {} (left step {}) and {} (right step {}) is undetermined above the base; supply a conjugator witness for pair ({}, {})",
                ua_text,
                i,
                d.print(&u_here),
                j,
                i,
                j
            )));
        }
        let name = fresh_name(d.alphabet(), b_letter_name);
        d = d.extend_centralizer(&u_here, &name)?;
        b_images.push(Word::generator((d.letter_count() - 1) as Gen));
    }

    let g1 = inclusion(a, &d);
    let g2 = Hom::new(b.clone(), d.clone(), b_images)?;
    Ok(Cocone { d, g1, g2 })
}

/// The interleaved amalgam for ∀-theories, with embeddings and a
/// discrimination certificate.
#[derive(Clone, Debug)]
pub struct LimitAmalgam {
    /// The combined tower: the left leg with the right leg's steps stacked
    /// on top, each extending the centralizer computed in the whole tower
    /// built so far.
    pub n: Tower,
    /// Verified embedding of the left leg (identity on generators).
    pub emb_l: Hom,
    /// Verified embedding of the right leg.
    pub emb_m: Hom,
    /// Images in `n` of the generators of both legs, left first.
    pub gamma_gens: Vec<Word>,
    /// Retraction `n → left leg`, injective on the requested sample.
    pub cert: Hom,
}

/// Builds the interleaved amalgam of a span: `N` = left leg + right-leg
/// steps re-based on the accumulated tower.  Conjugate centralizers are
/// *not* identified — both ladder letters survive and commute through the
/// shared centralizer, which is checked for every supplied witness.  The
/// returned certificate is a retraction onto the left leg, found by the
/// doubling exponent search and verified injective on `sample` (textual
/// words over `N`'s generators).
pub fn limit_group_amalgam(span: &Span, sample: &[String]) -> Result<LimitAmalgam> {
    limit_group_amalgam_with_cap(span, sample, DEFAULT_EXP_CAP)
}

pub fn limit_group_amalgam_with_cap(
    span: &Span,
    sample: &[String],
    exp_cap: i64,
) -> Result<LimitAmalgam> {
    let k = span.base();
    let l = span.left();
    let m = span.right();
    let mut n = l.clone();
    let mut m_images: Vec<Word> = (0..k.letter_count() as Gen).map(Word::generator).collect();

    for (j, step) in m.steps()[k.depth()..].iter().enumerate() {
        let TowerStep::Ce { u, .. } = step else {
            unreachable!("validated CE-only in Span::new")
        };
        let u_here = n.reduce(&u.substitute(&m_images));
        let name = fresh_name(n.alphabet(), m.alphabet().name((k.letter_count() + j) as Gen));
        n = n.extend_centralizer(&u_here, &name)?;
        m_images.push(Word::generator((n.letter_count() - 1) as Gen));
    }

    // Witnessed conjugate-case relations: if u_left^d commutes with u_right
    // in the base, the left ladder letter conjugated by d must commute with
    // the right ladder letter in N.
    for w in span.witnesses() {
        let TowerStep::Ce { u: ul, letter, .. } = &l.steps()[k.depth() + w.left] else {
            unreachable!()
        };
        let t_right = m_images[k.letter_count() + w.right].clone();
        let s_left = Word::generator(*letter);
        if !n.commutes(&ul.conj_by(&w.conjugator), &t_right) {
            return Err(Error::Input(format!(
                "witness for pair ({}, {}) does not hold: the conjugated centralizer representative fails to commute with the right ladder letter",
                w.left, w.right
            )));
        }
        if !n.commutes(&s_left.conj_by(&w.conjugator), &t_right) {
            return Err(Error::Input(format!(
                "witness for pair ({}, {}) does not yield the commuting-ladders relation",
                w.left, w.right
            )));
        }
    }

    let emb_l = inclusion(l, &n);
    let emb_m = Hom::new(m.clone(), n.clone(), m_images.clone())?;

    let mut gamma_gens: Vec<Word> = (0..l.letter_count() as Gen).map(Word::generator).collect();
    gamma_gens.extend(m_images[k.letter_count()..].iter().cloned());

    let parsed: Vec<Word> = sample
        .iter()
        .map(|s| n.parse(s))
        .collect::<Result<Vec<_>>>()?;
    let levels = m.depth() - k.depth();
    let cert = discriminating_hom_with_cap(&n, &parsed, levels, exp_cap)?;

    Ok(LimitAmalgam {
        n,
        emb_l,
        emb_m,
        gamma_gens,
        cert,
    })
}

/// Result of [`jep_product`]: the normalized free product and a verified
/// retraction onto the (normalized) left factor.
#[derive(Clone, Debug)]
pub struct JepProduct {
    /// The normalized product: merged free base, then the left factor's
    /// centralizer-extension steps, then the right factor's.
    pub p: Tower,
    /// The normalized left factor (the certificate's target).
    pub l: Tower,
    /// Retraction `p → l`, injective on the requested sample.
    pub cert: Hom,
    /// (old, new) names for right-factor generators renamed in the merge.
    pub renames: Vec<(String, String)>,
}

/// Free product of two towers with an existential-closedness certificate
/// for the left factor.
///
/// `P` is the free product of the two factors, each normalized so its free
/// base absorbs any free-product steps before the bases are merged.
/// The certificate first retracts the right factor's ladder letters by the
/// doubling exponent search, then substitutes the right factor's base
/// letters by shortlex-enumerated words of the left base, and verifies the
/// composite injective on `sample` (textual words over `P`).  Requires the
/// left factor nonabelian: at least two base generators after
/// normalization.
pub fn jep_product(l: &Tower, m: &Tower, sample: &[String]) -> Result<JepProduct> {
    jep_product_with_caps(l, m, sample, DEFAULT_EXP_CAP, DEFAULT_SUBST_CAP)
}

pub fn jep_product_with_caps(
    l: &Tower,
    m: &Tower,
    sample: &[String],
    exp_cap: i64,
    subst_cap: u64,
) -> Result<JepProduct> {
    let (l_norm, _) = fpce_normalize(l);
    if l_norm.base_rank() < 2 {
        return Err(Error::Domain(
            "existential closedness certificate needs a nonabelian left factor (base rank >= 2 after normalization)".into(),
        ));
    }
    // Normalize both factors first, then multiply: the product then has the
    // merged free base up front (left factor's, then right's) followed by the
    // left factor's ladder steps and the right's, so the normalized left
    // factor is a literal prefix shape and needs no further permutation.
    let (m_norm, _) = fpce_normalize(m);
    let product = free_multiply(&l_norm, &m_norm);
    let p = product.tower;

    let parsed: Vec<Word> = sample
        .iter()
        .map(|s| p.parse(s))
        .collect::<Result<Vec<_>>>()?;
    let mut working: Vec<Word> = vec![Word::identity()];
    for x in &parsed {
        let r = p.reduce(x);
        if !working.iter().any(|w| p.equals(w, &r)) {
            working.push(r);
        }
    }

    // Peel the right factor's ladder letters (they sit on top of p).
    let m_ce = m_norm.depth();
    let peel = discriminating_hom_with_cap(&p, &working, m_ce, exp_cap)?;
    let mid = peel.target().clone();
    let working_mid: Vec<Word> = working.iter().map(|w| peel.apply(w)).collect();

    // mid's letters: l base ++ m base ++ l ladder letters.
    let l_base = l_norm.base_rank();
    let m_base = mid.base_rank() - l_base;
    let l_letters = mid.letter_count() - mid.base_rank();
    debug_assert_eq!(l_letters, l_norm.depth());

    // Target: the normalized left factor, with mid's m-base letters mapped
    // to searched words of the left base.
    let shift_down = |g: Gen| -> Gen {
        if (g as usize) < l_base {
            g
        } else {
            (g as usize - m_base) as Gen
        }
    };
    let mut substituted: Option<Hom> = None;
    if m_base == 0 {
        let images = (0..mid.letter_count() as Gen)
            .map(|g| Word::generator(shift_down(g)))
            .collect();
        substituted = Some(Hom::new(mid.clone(), l_norm.clone(), images)?);
    } else {
        let m_base_names: Vec<String> = (l_base..l_base + m_base)
            .map(|g| mid.alphabet().name(g as Gen).to_string())
            .collect();
        let exhausted = |shell: usize| Error::Search {
            what: "base substitution for free letters of the right factor".into(),
            cap: subst_cap,
            attempted: m_base_names
                .iter()
                .map(|n| (n.clone(), shell as i64))
                .collect(),
        };
        let mut shells: Vec<Word> = Vec::new();
        let mut shortlex = ShortlexWords::new(l_base as u32, None);
        let mut attempts: u64 = 0;
        'shell: for shell in 0.. {
            while shells.len() < shell + 1 {
                match shortlex.next() {
                    Some(w) => shells.push(w),
                    None => break 'shell,
                }
            }
            let mut idx = vec![0usize; m_base];
            loop {
                if idx.contains(&shell) || shell == 0 {
                    attempts += 1;
                    if attempts > subst_cap {
                        return Err(exhausted(shell));
                    }
                    let images: Vec<Word> = (0..mid.letter_count() as Gen)
                        .map(|g| {
                            let gu = g as usize;
                            if gu >= l_base && gu < l_base + m_base {
                                shells[idx[gu - l_base]].clone()
                            } else {
                                Word::generator(shift_down(g))
                            }
                        })
                        .collect();
                    let cand = Hom::new(mid.clone(), l_norm.clone(), images)?;
                    let imgs: Vec<Word> = working_mid.iter().map(|w| cand.apply(w)).collect();
                    let mut injective = true;
                    'pairs: for x in 0..imgs.len() {
                        for y in x + 1..imgs.len() {
                            if l_norm.equals(&imgs[x], &imgs[y]) {
                                injective = false;
                                break 'pairs;
                            }
                        }
                    }
                    if injective {
                        substituted = Some(cand);
                        break 'shell;
                    }
                }
                let mut advanced = false;
                for pos in (0..m_base).rev() {
                    if idx[pos] < shell {
                        idx[pos] += 1;
                        advanced = true;
                        break;
                    }
                    idx[pos] = 0;
                }
                if !advanced {
                    break;
                }
            }
        }
        if substituted.is_none() {
            return Err(exhausted(shells.len()));
        }
    }
    let subst = substituted.expect("set on success paths");
    let cert = Hom::compose(&subst, &peel)?;

    for x in 0..parsed.len() {
        for y in x + 1..parsed.len() {
            if !p.equals(&parsed[x], &parsed[y]) && l_norm.equals(&cert.apply(&parsed[x]), &cert.apply(&parsed[y])) {
                return Err(Error::Search {
                    what: "verified certificate lost injectivity on the sample".into(),
                    cap: subst_cap,
                    attempted: vec![],
                });
            }
        }
    }

    Ok(JepProduct {
        p,
        l: l_norm,
        cert,
        renames: product.renames,
    })
}

/// The span of the classical amalgamation failure: one copy of ℤ mapping
/// onto `a²b²` in `F(a,b)`, the other onto `c²` in `F(c)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SquaresSpan {
    pub left_base: Vec<String>,
    pub left_image: String,
    pub right_base: Vec<String>,
    pub right_image: String,
}

impl Default for SquaresSpan {
    fn default() -> Self {
        SquaresSpan {
            left_base: vec!["a".into(), "b".into()],
            left_image: "a^2 b^2".into(),
            right_base: vec!["c".into()],
            right_image: "c^2".into(),
        }
    }
}

/// Machine-checkable obstruction report produced by [`ap_failure_demo`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApFailureReport {
    pub span: SquaresSpan,
    pub scan_max_len: u64,
    pub words_scanned: u64,
    /// All solutions (x, y, z) of x²y²z² = 1 found at the scanned scale,
    /// as words over the left base.
    pub solutions: Vec<[String; 3]>,
    /// Every scanned solution has pairwise commuting entries.
    pub all_commuting: bool,
    /// Whether the left generators commute (they never do).
    pub generators_commute: bool,
    pub obstructed: bool,
    pub narrative: Vec<String>,
}

/// Reproduces the obstruction to amalgamating `z ↦ a²b²` with `z ↦ c²`:
/// a cocone would make `a²b²` a square, so `a²b²z² = 1` for some `z`; the
/// scan certifies that every such relation at the given scale forces its
/// entries to commute, and `a`, `b` do not commute.  Deterministic output.
pub fn ap_failure_demo(max_len: u64) -> Result<ApFailureReport> {
    let span = SquaresSpan::default();
    let f2 = Alphabet::new(["a", "b"])?;
    let report = three_squares_scan(2, max_len)?;
    let solutions: Vec<[String; 3]> = report
        .solutions
        .iter()
        .map(|[x, y, z]| {
            [
                word_to_text(&f2, x),
                word_to_text(&f2, y),
                word_to_text(&f2, z),
            ]
        })
        .collect();
    let a = Word::generator(0);
    let b = Word::generator(1);
    let generators_commute = free_commutes(&a, &b);
    let obstructed = report.all_commuting && !generators_commute;
    let narrative = vec![
        "span: Z -> F(a,b) by z -> a^2 b^2 and Z -> F(c) by z -> c^2".to_string(),
        "a cocone would identify a^2 b^2 with the square c^2, so a^2 b^2 z^2 = 1 for z = image(c)^-1".to_string(),
        format!(
            "scanning all |x|, |y| <= {}: {} solutions of x^2 y^2 z^2 = 1, all with pairwise commuting entries: {}",
            max_len, solutions.len(), report.all_commuting
        ),
        "a and b do not commute, so (a, b, z) is never such a solution".to_string(),
        format!(
            "verdict: obstructed = {} — no cocone exists among groups where squares force commutation at this scale",
            obstructed
        ),
    ];
    Ok(ApFailureReport {
        span,
        scan_max_len: max_len,
        words_scanned: report.words_scanned,
        solutions,
        all_commuting: report.all_commuting,
        generators_commute,
        obstructed,
        narrative,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn f2() -> Tower {
        Tower::make(2).unwrap()
    }

    fn ce(t: &Tower, u: &str, letter: &str) -> Tower {
        let w = t.parse(u).unwrap();
        t.extend_centralizer(&w, letter).unwrap()
    }

    fn span(c: &Tower, a: &Tower, b: &Tower) -> Span {
        Span::new(c.clone(), a.clone(), b.clone(), vec![]).unwrap()
    }

    fn witness(c: &Tower, left: usize, right: usize, d: &str) -> ConjugacyWitness {
        ConjugacyWitness {
            left,
            right,
            conjugator: c.parse(d).unwrap(),
        }
    }

    #[test]
    fn span_validation_rejects_malformed_spans() {
        let c = f2();
        let a = ce(&c, "a", "s");
        let b = ce(&c, "b", "t");

        // Legs must extend the base, not the other way around.
        assert!(matches!(
            Span::new(a.clone(), c.clone(), b.clone(), vec![]),
            Err(Error::Input(_))
        ));
        // A leg over a different base is not an extension even at depth 0.
        let c3 = Tower::make(3).unwrap();
        assert!(matches!(
            Span::new(c3, a.clone(), b.clone(), vec![]),
            Err(Error::Input(_))
        ));
        // Free-product suffix steps are out of scope for spans.
        let fp = c.free_product(&["c"]).unwrap();
        assert!(matches!(
            Span::new(c.clone(), a.clone(), fp, vec![]),
            Err(Error::Input(_))
        ));
        // Witness indices must address suffix steps.
        assert!(matches!(
            Span::new(c.clone(), a.clone(), b.clone(), vec![witness(&c, 1, 0, "b")]),
            Err(Error::Input(_))
        ));
        // One witness per pair.
        assert!(matches!(
            Span::new(
                c.clone(),
                a.clone(),
                b.clone(),
                vec![witness(&c, 0, 0, "b"), witness(&c, 0, 0, "a")]
            ),
            Err(Error::Input(_))
        ));
        // Witness conjugators are words over the base tower.
        let stray = ConjugacyWitness {
            left: 0,
            right: 0,
            conjugator: Word::generator(7),
        };
        assert!(matches!(
            Span::new(c.clone(), a.clone(), b.clone(), vec![stray]),
            Err(Error::Input(_))
        ));

        let sp = Span::new(c.clone(), a.clone(), b.clone(), vec![witness(&c, 0, 0, "b")])
            .unwrap();
        assert_eq!(sp.base(), &c);
        assert_eq!(sp.left(), &a);
        assert_eq!(sp.right(), &b);
        assert_eq!(sp.witnesses().len(), 1);
        let inc = sp.inclusion_left();
        assert_eq!(inc.source(), &c);
        assert_eq!(inc.target(), &a);
    }

    #[test]
    fn ice_stacks_independent_centralizers() {
        let c = f2();
        let a = ce(&c, "a", "s");
        let b = ce(&c, "b", "t");
        let sp = span(&c, &a, &b);
        let cone = ice_amalgamate(&sp).unwrap();
        cone.verify(&sp).unwrap();
        assert_eq!(cone.d, ce(&a, "b", "t"));
        let names: Vec<&str> = cone.d.alphabet().names().iter().map(|s| s.as_str()).collect();
        assert_eq!(names, ["a", "b", "s", "t"]);
        assert_eq!(cone.d.print(cone.g2.image_of(2)), "t");
        assert_eq!(cone.g1.source(), &a);
        for g in 0..a.letter_count() as Gen {
            assert_eq!(cone.g1.image_of(g), &Word::generator(g));
        }

        // The cocone serializes with its verified homs and round-trips.
        let json = serde_json::to_string(&cone).unwrap();
        let back: Cocone = serde_json::from_str(&json).unwrap();
        assert_eq!(back, cone);
    }

    #[test]
    fn ice_renames_clashing_stacked_letters() {
        let c = f2();
        let a = ce(&c, "a", "s");
        let b = ce(&c, "b", "s");
        let cone = ice_amalgamate(&span(&c, &a, &b)).unwrap();
        let names: Vec<&str> = cone.d.alphabet().names().iter().map(|s| s.as_str()).collect();
        assert_eq!(names, ["a", "b", "s", "s_2"]);
        assert_eq!(cone.d.print(cone.g2.image_of(2)), "s_2");
    }

    #[test]
    fn ice_identifies_conjugate_centralizers_with_witness() {
        let c = f2();
        let a = ce(&c, "a", "s");
        let b = ce(&c, "b^-1 a b", "t");
        let sp = Span::new(c.clone(), a.clone(), b.clone(), vec![witness(&c, 0, 0, "b")])
            .unwrap();
        let cone = ice_amalgamate(&sp).unwrap();
        cone.verify(&sp).unwrap();
        assert_eq!(cone.d, a, "conjugate centralizers collapse into the left leg");
        assert_eq!(cone.d.print(cone.g2.image_of(2)), "b^-1 s b");

        // The same pair is found automatically: base-word conjugacy is
        // decided exactly, no witness needed.
        let sp2 = span(&c, &a, &b);
        let cone2 = ice_amalgamate(&sp2).unwrap();
        cone2.verify(&sp2).unwrap();
        assert_eq!(cone2.d, a);
        assert_eq!(cone2.d.print(cone2.g2.image_of(2)), "b^-1 s b");
    }

    #[test]
    fn ice_identity_span_returns_the_base() {
        let c = f2();
        let sp = span(&c, &c, &c);
        let cone = ice_amalgamate(&sp).unwrap();
        cone.verify(&sp).unwrap();
        assert_eq!(cone.d, c);
        assert_eq!(cone.g1.images(), cone.g2.images());
    }

    #[test]
    fn ice_shared_centralizer_identifies_letters() {
        let c = f2();
        let a = ce(&c, "a", "s");

        // Same representative.
        let b = ce(&c, "a", "t");
        let cone = ice_amalgamate(&span(&c, &a, &b)).unwrap();
        assert_eq!(cone.d, a);
        assert_eq!(cone.d.print(cone.g2.image_of(2)), "s");

        // A power of the same root shares the centralizer.
        let b2 = ce(&c, "a^2", "t");
        let cone2 = ice_amalgamate(&span(&c, &a, &b2)).unwrap();
        assert_eq!(cone2.d, a);
        assert_eq!(cone2.d.print(cone2.g2.image_of(2)), "s");
    }

    #[test]
    fn ice_stacks_non_conjugate_roots() {
        let c = f2();
        let a = ce(&c, "a^2", "s");
        let b = ce(&c, "b^3", "t");
        let sp = span(&c, &a, &b);
        let cone = ice_amalgamate(&sp).unwrap();
        cone.verify(&sp).unwrap();
        assert_eq!(cone.d.depth(), 2);
        let TowerStep::Ce { core, .. } = &cone.d.steps()[1] else {
            panic!("stacked step must be a centralizer extension")
        };
        assert_eq!(cone.d.print(core), "b");
    }

    #[test]
    fn ice_base_and_step_words_never_share_a_centralizer() {
        // u2 keeps its step letter under every cyclic rotation, so it cannot
        // be conjugate to the base word u1: the step stacks.
        let c = ce(&f2(), "a b", "t");
        let a = ce(&c, "a", "s1");
        let b = ce(&c, "t b t b", "t1");
        let sp = span(&c, &a, &b);
        let cone = ice_amalgamate(&sp).unwrap();
        cone.verify(&sp).unwrap();
        assert_eq!(cone.d.depth(), 3);
        assert_eq!(cone.d.print(cone.g2.image_of(3)), "t1");
    }

    #[test]
    fn ice_detects_conjugacy_hidden_behind_a_wrap_pinch() {
        // a b t a t^-1 a b cyclically reduces to a base word only through a
        // pinch that no single-syllable rotation exposes; the rotation scan
        // must still find it and identify the two centralizers.
        let c = ce(&f2(), "a b", "t");
        let a = ce(&c, "a b t a t^-1 a b", "s1");
        let b = ce(&c, "a b a b a", "t1");
        let sp = span(&c, &a, &b);
        let cone = ice_amalgamate(&sp).unwrap();
        cone.verify(&sp).unwrap();
        assert_eq!(cone.d, a, "conjugate centralizers must identify, not stack");
    }

    #[test]
    fn ice_above_base_needs_witness_and_verifies_it() {
        let c = ce(&f2(), "a", "t");
        let a = ce(&c, "b t", "s1");
        let b = ce(&c, "b t^2", "s2");
        let err = ice_amalgamate(&span(&c, &a, &b)).unwrap_err();
        assert!(matches!(err, Error::NeedsWitness(_)));
        assert!(err.to_string().contains("pair (0, 0)"));

        // A wrong witness is rejected, not ignored.
        let sp_bad = Span::new(
            c.clone(),
            a.clone(),
            b.clone(),
            vec![witness(&c, 0, 0, "a")],
        )
        .unwrap();
        assert!(matches!(ice_amalgamate(&sp_bad), Err(Error::Input(_))));

        // A correct witness for a genuinely conjugate pair identifies.
        let b2 = ce(&c, "a^-1 b t a", "s2");
        let sp_ok = Span::new(
            c.clone(),
            a.clone(),
            b2.clone(),
            vec![witness(&c, 0, 0, "a")],
        )
        .unwrap();
        let cone = ice_amalgamate(&sp_ok).unwrap();
        cone.verify(&sp_ok).unwrap();
        assert_eq!(cone.d, a);
        assert_eq!(cone.d.print(cone.g2.image_of(3)), "a^-1 s1 a");
    }

    #[test]
    fn ice_two_step_absorption_identifies_crosswise() {
        let c = f2();
        let a = ce(&ce(&c, "a", "s1"), "b", "s2");
        let b = ce(&ce(&c, "b", "t1"), "a", "t2");
        let sp = span(&c, &a, &b);
        let cone = ice_amalgamate(&sp).unwrap();
        cone.verify(&sp).unwrap();
        assert_eq!(cone.d, a);
        assert_eq!(cone.d.print(cone.g2.image_of(2)), "s2");
        assert_eq!(cone.d.print(cone.g2.image_of(3)), "s1");

        // Mixed outcome: one step identifies, the other stacks.
        let b2 = ce(&ce(&c, "b", "t1"), "a b", "t2");
        let sp2 = span(&c, &a, &b2);
        let cone2 = ice_amalgamate(&sp2).unwrap();
        cone2.verify(&sp2).unwrap();
        assert_eq!(cone2.d.depth(), 3);
        assert_eq!(cone2.d.print(cone2.g2.image_of(2)), "s2");
        assert_eq!(cone2.d.print(cone2.g2.image_of(3)), "t2");
    }

    #[test]
    fn ice_consumes_each_left_step_at_most_once() {
        let c = f2();
        let a = ce(&c, "a", "s1");
        let b = ce(&ce(&c, "a", "t1"), "a^2", "t2");
        let sp = span(&c, &a, &b);
        let cone = ice_amalgamate(&sp).unwrap();
        cone.verify(&sp).unwrap();
        // The first incoming step takes s1; the second, though in the same
        // centralizer class, must stack to keep the left leg embedded.
        assert_eq!(cone.d.depth(), 2);
        assert_eq!(cone.d.print(cone.g2.image_of(2)), "s1");
        assert_eq!(cone.d.print(cone.g2.image_of(3)), "t2");
    }

    #[test]
    fn ice_is_symmetric_up_to_step_order() {
        let c = f2();
        let a = ce(&c, "a", "s");
        let b = ce(&c, "b", "t");
        let d1 = ice_amalgamate(&span(&c, &a, &b)).unwrap().d;
        let d2 = ice_amalgamate(&span(&c, &b, &a)).unwrap().d;
        let sig = |t: &Tower| {
            let mut v: Vec<(String, String)> = t
                .steps()
                .iter()
                .map(|s| {
                    let TowerStep::Ce { u, core, .. } = s else {
                        panic!("CE spans produce CE cocones")
                    };
                    (t.print(u), t.print(core))
                })
                .collect();
            v.sort();
            v
        };
        assert_eq!(sig(&d1), sig(&d2));

        // In the conjugate case both orders collapse to a single step.
        let b3 = ce(&c, "b^-1 a b", "t");
        let d3 = ice_amalgamate(&span(&c, &a, &b3)).unwrap().d;
        let d4 = ice_amalgamate(&span(&c, &b3, &a)).unwrap().d;
        assert_eq!(d3.depth(), 1);
        assert_eq!(d4.depth(), 1);
        assert_eq!(d3, a);
        assert_eq!(d4, b3);
    }

    #[test]
    fn cocone_square_commutes_on_base_words() {
        let c = ce(&f2(), "a", "t");
        let a = ce(&c, "b", "s1");
        let b = ce(&c, "a t", "t1");
        let sp = span(&c, &a, &b);
        let cone = ice_amalgamate(&sp).unwrap();
        cone.verify(&sp).unwrap();
        for w in ["a b", "t a^-1", "b t b^-1", "a^2 t^-1 b"] {
            let x = c.parse(w).unwrap();
            let via_a = cone.g1.apply(&sp.inclusion_left().apply(&x));
            let via_b = cone.g2.apply(&sp.inclusion_right().apply(&x));
            assert!(cone.d.equals(&via_a, &via_b), "{w}");
        }

        // verify() rejects a cocone wired to the wrong span.
        let other = span(&c, &a, &ce(&c, "b", "t1"));
        assert!(cone.verify(&other).is_err());
    }

    #[test]
    fn limit_amalgam_matches_iterated_ice_for_independent_roots() {
        let k = f2();
        let l = ce(&k, "a", "s1");
        let m = ce(&k, "b", "t1");
        let sp = span(&k, &l, &m);
        let lim = limit_group_amalgam(&sp, &["s1 t1 s1^-1 t1^-1".to_string()]).unwrap();
        assert_eq!(lim.n, ice_amalgamate(&sp).unwrap().d);
        assert_eq!(lim.n.depth(), 2);
        assert_eq!(lim.emb_l.source(), &l);
        assert_eq!(lim.emb_m.source(), &m);
        assert_eq!(lim.n.print(lim.emb_m.image_of(2)), "t1");
        assert_eq!(lim.gamma_gens.len(), 4);

        // The certificate retracts onto L, sending t1 to a power of its
        // centralizer representative, and separates the sample from 1.
        assert_eq!(lim.cert.source(), &lim.n);
        assert_eq!(lim.cert.target(), &l);
        assert_eq!(l.print(lim.cert.image_of(3)), "b");
        let w = lim.n.parse("s1 t1 s1^-1 t1^-1").unwrap();
        assert!(!l.is_trivial(&lim.cert.apply(&w)));
    }

    #[test]
    fn limit_amalgam_conjugate_case_keeps_commuting_ladders() {
        let k = f2();
        let l = ce(&k, "a", "s1");
        let m = ce(&k, "a", "t1");
        let sp = span(&k, &l, &m);
        let lim = limit_group_amalgam(&sp, &[]).unwrap();
        assert_eq!(lim.n.depth(), 2);
        let s1 = lim.n.parse("s1").unwrap();
        let t1 = lim.n.parse("t1").unwrap();
        let b = lim.n.parse("b").unwrap();
        assert!(lim.n.commutes(&s1, &t1), "ladders over one centralizer commute");
        assert!(!lim.n.commutes(&t1, &b));
        assert!(!lim.n.equals(&s1, &t1), "the ladder letters stay distinct");
        // Contrast: the identifying construction collapses this span.
        assert_eq!(ice_amalgamate(&sp).unwrap().d.depth(), 1);
    }

    #[test]
    fn limit_amalgam_verifies_witnessed_conjugacies() {
        let k = f2();
        let l = ce(&k, "a", "s1");
        let m = ce(&k, "b^-1 a b", "t1");
        let sp = Span::new(k.clone(), l.clone(), m.clone(), vec![witness(&k, 0, 0, "b")])
            .unwrap();
        let lim = limit_group_amalgam(&sp, &[]).unwrap();
        let s1 = lim.n.parse("s1").unwrap();
        let t1 = lim.n.parse("t1").unwrap();
        let conj_s1 = lim.n.parse("b^-1 s1 b").unwrap();
        assert!(lim.n.commutes(&conj_s1, &t1), "witnessed ladders commute after transport");
        assert!(!lim.n.commutes(&s1, &t1));

        // A false witness is an input error.
        let sp_bad = Span::new(k.clone(), l.clone(), m.clone(), vec![witness(&k, 0, 0, "a")])
            .unwrap();
        let err = limit_group_amalgam(&sp_bad, &[]).unwrap_err();
        assert!(matches!(err, Error::Input(_)));
        assert!(err.to_string().contains("pair (0, 0)"));
    }

    #[test]
    fn limit_amalgam_with_empty_legs() {
        let k = f2();
        let l = ce(&k, "a", "s1");

        // Empty right leg: N is the left leg, certificate is the identity.
        let sp = span(&k, &l, &k);
        let lim = limit_group_amalgam(&sp, &["a b".to_string()]).unwrap();
        assert_eq!(lim.n, l);
        assert_eq!(lim.cert.target(), &l);
        let w = l.parse("a b").unwrap();
        assert_eq!(lim.cert.apply(&w), w);

        // Empty left leg: N realizes the right leg on the nose.
        let m = ce(&k, "b", "t1");
        let sp2 = span(&k, &k, &m);
        let lim2 = limit_group_amalgam(&sp2, &["t1".to_string()]).unwrap();
        assert_eq!(lim2.n, m);
        assert_eq!(lim2.cert.target(), &k);
        assert_eq!(k.print(lim2.cert.image_of(2)), "b");
    }

    #[test]
    fn limit_amalgam_agrees_with_ice_on_small_independent_spans() {
        let k = f2();
        let cases: Vec<(Tower, Tower)> = vec![
            (ce(&ce(&k, "a", "s1"), "b", "s2"), k.clone()),
            (k.clone(), ce(&ce(&k, "a", "t1"), "t1^2 a", "t2")),
            (ce(&k, "a^2", "s1"), ce(&k, "b^3", "t1")),
            (ce(&k, "a b", "s1"), ce(&k, "b^-1 a^2 b", "t1")),
        ];
        for (l, m) in cases {
            let sp = span(&k, &l, &m);
            let lim = limit_group_amalgam(&sp, &[]).unwrap();
            let cone = ice_amalgamate(&sp).unwrap();
            assert_eq!(lim.n, cone.d, "L = {:?}, M = {:?}", l.alphabet(), m.alphabet());
        }
    }

    #[test]
    fn limit_amalgam_cert_search_reports_attempts() {
        let k = f2();
        let l = ce(&k, "a", "s1");
        let m = ce(&k, "a", "t1");
        let sp = span(&k, &l, &m);
        let err = limit_group_amalgam_with_cap(&sp, &["t1 a^-1".to_string()], 1).unwrap_err();
        match err {
            Error::Search { cap, attempted, .. } => {
                assert_eq!(cap, 1);
                assert_eq!(attempted, vec![("t1".to_string(), 1)]);
            }
            other => panic!("expected search exhaustion, got {other:?}"),
        }
    }

    #[test]
    fn jep_product_embeds_and_retracts() {
        let l = f2();
        let m = Tower::from_base(Alphabet::new(["c"]).unwrap());
        let jp = jep_product(&l, &m, &["c a c^-1 a^-1".to_string()]).unwrap();
        assert_eq!(jp.p.base_rank(), 3);
        assert_eq!(jp.p.depth(), 0);
        assert_eq!(jp.l, l);
        assert!(jp.renames.is_empty());
        assert_eq!(jp.cert.source(), &jp.p);
        assert_eq!(jp.cert.target(), &jp.l);
        // The free letter lands on the least base word that keeps the
        // sampled commutator alive.
        assert_eq!(jp.l.print(jp.cert.image_of(2)), "b");
        let w = jp.p.parse("c a c^-1 a^-1").unwrap();
        assert!(!jp.l.is_trivial(&jp.cert.apply(&w)));
    }

    #[test]
    fn jep_product_accepts_empty_sample() {
        let l = f2();
        let m = Tower::from_base(Alphabet::new(["c"]).unwrap());
        let jp = jep_product(&l, &m, &[]).unwrap();
        let c_img = jp.cert.apply(&jp.p.parse("c").unwrap());
        assert!(jp.l.is_trivial(&c_img), "any retraction serves an empty sample");
    }

    #[test]
    fn jep_product_normalizes_fp_factors_first() {
        let l = f2();
        let m_base = Tower::from_base(Alphabet::new(["c"]).unwrap());
        let m = m_base.free_product(&["d"]).unwrap();
        let m = {
            let cw = m.parse("c").unwrap();
            m.extend_centralizer(&cw, "t").unwrap()
        };
        let jp = jep_product(
            &l,
            &m,
            &["c a c^-1 a^-1".to_string(), "d b".to_string()],
        )
        .unwrap();
        assert_eq!(jp.p.base_rank(), 4);
        assert_eq!(jp.p.depth(), 1);
        let names: Vec<&str> = jp.p.alphabet().names().iter().map(|s| s.as_str()).collect();
        assert_eq!(names, ["a", "b", "c", "d", "t"]);
        assert_eq!(jp.l.print(jp.cert.image_of(2)), "b");
        assert!(jp.l.is_trivial(jp.cert.image_of(3)));
        // t was peeled to a power of c and then substituted along with it.
        assert_eq!(jp.l.print(jp.cert.image_of(4)), "b");
        // Certificate stays injective on the parsed sample.
        let x = jp.p.parse("c a c^-1 a^-1").unwrap();
        let y = jp.p.parse("d b").unwrap();
        assert!(!jp.l.equals(&jp.cert.apply(&x), &jp.cert.apply(&y)));
    }

    #[test]
    fn jep_product_renames_clashing_letters() {
        let l = f2();
        let m = f2();
        let jp = jep_product(&l, &m, &["a a_2^-1".to_string()]).unwrap();
        assert_eq!(
            jp.renames,
            vec![
                ("a".to_string(), "a_2".to_string()),
                ("b".to_string(), "b_2".to_string())
            ]
        );
        let w = jp.p.parse("a a_2^-1").unwrap();
        assert!(!jp.l.is_trivial(&jp.cert.apply(&w)));
    }

    #[test]
    fn jep_product_rejects_abelian_left_factor() {
        let m = f2();
        let l1 = Tower::make(1).unwrap();
        assert!(matches!(jep_product(&l1, &m, &[]), Err(Error::Domain(_))));
        let l_ce = ce(&Tower::make(1).unwrap(), "a", "t");
        assert!(matches!(jep_product(&l_ce, &m, &[]), Err(Error::Domain(_))));
    }

    #[test]
    fn jep_product_substitution_cap_reports_attempts() {
        let l = f2();
        let m = Tower::from_base(Alphabet::new(["c"]).unwrap());
        let err = jep_product_with_caps(
            &l,
            &m,
            &["c a c^-1 a^-1".to_string()],
            DEFAULT_EXP_CAP,
            2,
        )
        .unwrap_err();
        match err {
            Error::Search { what, cap, attempted } => {
                assert!(what.contains("base substitution"));
                assert_eq!(cap, 2);
                assert_eq!(attempted, vec![("c".to_string(), 2)]);
            }
            other => panic!("expected search exhaustion, got {other:?}"),
        }
    }

    #[test]
    fn demo_is_deterministic_and_obstructed() {
        let r1 = ap_failure_demo(3).unwrap();
        let r2 = ap_failure_demo(3).unwrap();
        let s1 = serde_json::to_string(&r1).unwrap();
        assert_eq!(s1, serde_json::to_string(&r2).unwrap());
        assert!(r1.obstructed);
        assert!(r1.all_commuting);
        assert!(!r1.generators_commute);
        assert!(!r1.solutions.is_empty());
        assert!(r1.words_scanned > 0);
        assert_eq!(r1.span, SquaresSpan::default());
        assert_eq!(r1.narrative.len(), 5);
        assert_eq!(
            r1.narrative[0],
            "span: Z -> F(a,b) by z -> a^2 b^2 and Z -> F(c) by z -> c^2"
        );

        // The verdict holds already at the smallest scanning depth.
        let shallow = ap_failure_demo(1).unwrap();
        assert!(shallow.obstructed);
        assert!(shallow.scan_max_len < r1.scan_max_len);

        let back: ApFailureReport = serde_json::from_str(&s1).unwrap();
        assert_eq!(back, r1);
    }

    #[test]
    fn span_serde_round_trips_and_revalidates() {
        let c = f2();
        let a = ce(&c, "a", "s");
        let b = ce(&c, "b^-1 a b", "t");
        let sp = Span::new(c.clone(), a.clone(), b.clone(), vec![witness(&c, 0, 0, "b")])
            .unwrap();
        let json = serde_json::to_string(&sp).unwrap();
        assert!(json.contains("\"conjugator\":\"b\""));
        let back: Span = serde_json::from_str(&json).unwrap();
        assert_eq!(back, sp);

        // Tampering with a witness index fails span validation on read.
        let bad = json.replace("\"left\":0", "\"left\":9");
        assert!(serde_json::from_str::<Span>(&bad).is_err());

        // Witness-free spans leave the field out entirely.
        let plain = serde_json::to_string(&span(&c, &a, &b)).unwrap();
        assert!(!plain.contains("witnesses"));
    }

    #[test]
    fn prefix_spans_absorb_into_the_longer_leg() {
        let c = f2();
        let a1 = ce(&c, "a", "s1");
        let a2 = ce(&a1, "b", "s2");
        assert!(Span::new(c.clone(), c.clone(), c.clone(), vec![]).is_ok());
        assert!(Span::new(c.clone(), a2.clone(), a1.clone(), vec![]).is_ok());

        // A leg amalgamated with its own prefix absorbs it.
        let sp = Span::new(a1.clone(), a2.clone(), a1.clone(), vec![]).unwrap();
        let cone = ice_amalgamate(&sp).unwrap();
        cone.verify(&sp).unwrap();
        assert_eq!(cone.d, a2);

        // And with itself, every step identifies.
        let sp2 = Span::new(a1.clone(), a2.clone(), a2.clone(), vec![]).unwrap();
        let cone2 = ice_amalgamate(&sp2).unwrap();
        cone2.verify(&sp2).unwrap();
        assert_eq!(cone2.d, a2);
        assert_eq!(cone2.d.print(cone2.g2.image_of(3)), "s2");
    }

    fn leg_strategy() -> impl Strategy<Value = Vec<&'static str>> {
        let pool = prop::sample::select(vec![
            "a", "b", "a^2", "b^3", "a b", "b a", "b^-1 a b", "a b a^-1",
        ]);
        prop::collection::vec(pool, 0..=2)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn randomized_base_spans_amalgamate_symmetrically(
            us in leg_strategy(),
            vs in leg_strategy(),
        ) {
            let c = f2();
            let mut a = c.clone();
            for (i, u) in us.iter().enumerate() {
                a = ce(&a, u, &format!("s{}", i + 1));
            }
            let mut b = c.clone();
            for (j, v) in vs.iter().enumerate() {
                b = ce(&b, v, &format!("t{}", j + 1));
            }
            let sp = span(&c, &a, &b);
            let cone = ice_amalgamate(&sp).unwrap();
            prop_assert!(cone.verify(&sp).is_ok());

            // Depth bookkeeping: every incoming step identifies or stacks.
            prop_assert!(cone.d.depth() >= a.depth());
            prop_assert!(cone.d.depth() <= a.depth() + b.depth());

            // Base-word roots are decided exactly, so the swap amalgamates
            // to the same depth (identified pairs match up classwise).
            let swapped = span(&c, &b, &a);
            let cone_swapped = ice_amalgamate(&swapped).unwrap();
            prop_assert!(cone_swapped.verify(&swapped).is_ok());
            prop_assert_eq!(cone_swapped.d.depth(), cone.d.depth());

            // The interleaved amalgam stacks everything and embeds both legs.
            let lim = limit_group_amalgam(&sp, &[]).unwrap();
            prop_assert_eq!(lim.n.depth(), a.depth() + b.depth());
            prop_assert_eq!(lim.emb_l.source(), &a);
            prop_assert_eq!(lim.emb_m.source(), &b);
        }
    }
}
