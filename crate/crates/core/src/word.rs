//! Exact algebra of freely reduced words in finite-rank free groups.
//!
//! Words are stored in syllable form `(generator, exponent)` so that the huge
//! exponents produced by big-power retractions stay compact. Everything here
//! is a pure function over immutable values: reduction, cyclic reduction,
//! primitive roots, conjugacy by canonical rotation, commutation, shortlex
//! enumeration, and the brute-force three-squares scan.
//!
//! Text grammar (used by all modules and the CLI): a word is whitespace
//! separated tokens, each `GEN` or `GEN^INT`, where `GEN` matches
//! `[a-z][a-z0-9_]*` and `INT` is a nonzero signed decimal. The identity is
//! the single token `1`. Serialization always emits the freely reduced form.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::fmt;

/// Generator index into an [`Alphabet`] (or a tower's generator table).
pub type Gen = u32;
/// Syllable exponent. Desk-scale searches stay far below the i64 range.
pub type Exp = i64;

/// Ordered list of distinct generator names. The order is fixed and drives
/// enumeration and serialization.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Alphabet {
    names: Vec<String>,
}

/// `[a-z][a-z0-9_]*`
pub fn valid_gen_name(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_lowercase() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
}

impl Alphabet {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Result<Self> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        for (i, n) in names.iter().enumerate() {
            if !valid_gen_name(n) {
                return Err(Error::Input(format!("invalid generator name {n:?}")));
            }
            if names[..i].contains(n) {
                return Err(Error::Input(format!("duplicate generator name {n:?}")));
            }
        }
        Ok(Alphabet { names })
    }

    /// Default names `a`, `b`, ..., `z`, then `x26`, `x27`, ...
    pub fn of_rank(rank: usize) -> Self {
        let names = (0..rank).map(default_gen_name).collect();
        Alphabet { names }
    }

    pub fn rank(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, g: Gen) -> &str {
        &self.names[g as usize]
    }

    pub fn index_of(&self, name: &str) -> Option<Gen> {
        self.names.iter().position(|n| n == name).map(|i| i as Gen)
    }

    /// Appends a fresh name, erroring on collisions.
    pub fn push(&mut self, name: &str) -> Result<Gen> {
        if !valid_gen_name(name) {
            return Err(Error::Input(format!("invalid generator name {name:?}")));
        }
        if self.index_of(name).is_some() {
            return Err(Error::Input(format!("generator name {name:?} already in use")));
        }
        self.names.push(name.to_string());
        Ok((self.names.len() - 1) as Gen)
    }
}

pub fn default_gen_name(i: usize) -> String {
    if i < 26 {
        ((b'a' + i as u8) as char).to_string()
    } else {
        format!("x{i}")
    }
}

/// A freely reduced word: adjacent syllables have distinct generators and all
/// exponents are nonzero. The empty list is the identity.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Word {
    syllables: Vec<(Gen, Exp)>,
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word[")?;
        for (i, (g, e)) in self.syllables.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "g{g}^{e}")?;
        }
        write!(f, "]")
    }
}

impl Word {
    pub fn identity() -> Self {
        Word::default()
    }

    pub fn is_identity(&self) -> bool {
        self.syllables.is_empty()
    }

    /// Free reduction: merges equal-generator neighbours, drops zero exponents.
    pub fn from_syllables(raw: impl IntoIterator<Item = (Gen, Exp)>) -> Self {
        let mut out: Vec<(Gen, Exp)> = Vec::new();
        for (g, e) in raw {
            push_reduced(&mut out, g, e);
        }
        Word { syllables: out }
    }

    pub fn generator(g: Gen) -> Self {
        Word {
            syllables: vec![(g, 1)],
        }
    }

    pub fn from_gen_pow(g: Gen, e: Exp) -> Self {
        if e == 0 {
            Word::identity()
        } else {
            Word {
                syllables: vec![(g, e)],
            }
        }
    }

    pub fn syllables(&self) -> &[(Gen, Exp)] {
        &self.syllables
    }

    /// Reduced letter length: the sum of |exponent|.
    pub fn letter_len(&self) -> u64 {
        self.syllables.iter().map(|&(_, e)| e.unsigned_abs()).sum()
    }

    pub fn max_gen(&self) -> Option<Gen> {
        self.syllables.iter().map(|&(g, _)| g).max()
    }

    pub fn generators_used(&self) -> Vec<Gen> {
        let mut gens: Vec<Gen> = self.syllables.iter().map(|&(g, _)| g).collect();
        gens.sort_unstable();
        gens.dedup();
        gens
    }

    pub fn inverse(&self) -> Word {
        Word {
            syllables: self.syllables.iter().rev().map(|&(g, e)| (g, -e)).collect(),
        }
    }

    pub fn mul(&self, rhs: &Word) -> Word {
        let mut out = self.syllables.clone();
        for &(g, e) in &rhs.syllables {
            push_reduced(&mut out, g, e);
        }
        Word { syllables: out }
    }

    pub fn pow(&self, n: Exp) -> Word {
        if n == 0 || self.is_identity() {
            return Word::identity();
        }
        let base = if n < 0 { self.inverse() } else { self.clone() };
        // Cyclic factorization keeps repeated squaring trivial: w = c m c^-1
        // gives w^k = c m^k c^-1 where m^k is a plain syllable repeat.
        let (core, conj) = base.cyclic_reduce();
        let k = n.unsigned_abs();
        let mut mid = Vec::new();
        if core.syllables.len() == 1 {
            let (g, e) = core.syllables[0];
            mid.push((g, e.checked_mul(k as Exp).expect("exponent overflow")));
        } else {
            for _ in 0..k {
                for &s in &core.syllables {
                    mid.push(s);
                }
            }
        }
        let mut out = conj.syllables.clone();
        for (g, e) in mid {
            push_reduced(&mut out, g, e);
        }
        for &(g, e) in conj.inverse().syllables() {
            push_reduced(&mut out, g, e);
        }
        Word { syllables: out }
    }

    /// `g^-1 · self · g`.
    pub fn conj_by(&self, g: &Word) -> Word {
        g.inverse().mul(self).mul(g)
    }

    /// `self · other · self^-1 · other^-1`.
    pub fn commutator(&self, other: &Word) -> Word {
        self.mul(other).mul(&self.inverse()).mul(&other.inverse())
    }

    /// Substitutes `images[g]` for each generator `g`; used by tower homs.
    pub fn substitute(&self, images: &[Word]) -> Word {
        let mut out: Vec<(Gen, Exp)> = Vec::new();
        for &(g, e) in &self.syllables {
            let img = &images[g as usize];
            if img.syllables.len() == 1 {
                let (h, f) = img.syllables[0];
                push_reduced(&mut out, h, f.checked_mul(e).expect("exponent overflow"));
                continue;
            }
            let img_pow = img.pow(e);
            for &(h, f) in &img_pow.syllables {
                push_reduced(&mut out, h, f);
            }
        }
        Word { syllables: out }
    }

    /// Renames generators through `map` (total on the generators used).
    pub fn relabel(&self, map: impl Fn(Gen) -> Gen) -> Word {
        Word::from_syllables(self.syllables.iter().map(|&(g, e)| (map(g), e)))
    }

    /// Peels matched ends: returns `(core, conj)` with
    /// `self = conj · core · conj^-1` and, whenever the core has at least two
    /// syllables, distinct first and last generators. That is slightly
    /// stronger than "first and last letters do not cancel" and makes the
    /// cyclic syllable sequence canonical for rotation matching.
    pub fn cyclic_reduce(&self) -> (Word, Word) {
        let mut core = self.syllables.clone();
        let mut conj: Vec<(Gen, Exp)> = Vec::new();
        while core.len() >= 2 {
            let (g1, e1) = core[0];
            let (gk, ek) = core[core.len() - 1];
            if g1 != gk {
                break;
            }
            // w = g^e1 · mid · g^ek  =  g^e1 · (mid · g^(e1+ek)) · g^-e1
            push_reduced(&mut conj, g1, e1);
            let mut mid: Vec<(Gen, Exp)> = core[1..core.len() - 1].to_vec();
            let s = e1 + ek;
            if s != 0 {
                mid.push((g1, s));
            }
            core = mid;
        }
        (Word { syllables: core }, Word { syllables: conj })
    }

    /// Largest n with `self = root^n`; root is primitive (not a proper power)
    /// and n is positive. Errors on the identity.
    pub fn primitive_root(&self) -> Result<(Word, u64)> {
        if self.is_identity() {
            return Err(Error::Domain(
                "primitive root of the identity is undefined".into(),
            ));
        }
        let (core, conj) = self.cyclic_reduce();
        let k = core.syllables.len();
        let (root_core, n) = if k == 1 {
            let (g, e) = core.syllables[0];
            (
                Word::from_gen_pow(g, if e > 0 { 1 } else { -1 }),
                e.unsigned_abs(),
            )
        } else {
            // A folded cyclically reduced word is a proper power exactly when
            // its syllable sequence is periodic; scan periods in order.
            let mut found = (core.clone(), 1u64);
            for p in 1..k {
                if k % p != 0 {
                    continue;
                }
                if (p..k).all(|i| core.syllables[i] == core.syllables[i % p]) {
                    found = (
                        Word {
                            syllables: core.syllables[..p].to_vec(),
                        },
                        (k / p) as u64,
                    );
                    break;
                }
            }
            found
        };
        let root = conj.mul(&root_core).mul(&conj.inverse());
        Ok((root, n))
    }

    /// Shortlex comparison: by reduced letter length, then lexicographic on
    /// the letter sequence with letters ordered a < a^-1 < b < b^-1 < ...
    pub fn shortlex_cmp(&self, other: &Word) -> Ordering {
        self.letter_len()
            .cmp(&other.letter_len())
            .then_with(|| cmp_letter_runs(&self.syllables, &other.syllables))
    }
}

fn push_reduced(out: &mut Vec<(Gen, Exp)>, g: Gen, e: Exp) {
    if e == 0 {
        return;
    }
    match out.last_mut() {
        Some((h, f)) if *h == g => {
            *f += e;
            if *f == 0 {
                out.pop();
            }
        }
        _ => out.push((g, e)),
    }
}

/// Letter rank: positive letter of generator g is 2g, its inverse 2g+1.
fn syllable_run(s: (Gen, Exp)) -> (u64, u64) {
    let (g, e) = s;
    let rank = 2 * g as u64 + if e < 0 { 1 } else { 0 };
    (rank, e.unsigned_abs())
}

/// Lexicographic comparison of letter sequences given as syllable runs.
fn cmp_letter_runs(a: &[(Gen, Exp)], b: &[(Gen, Exp)]) -> Ordering {
    let mut ia = 0;
    let mut ib = 0;
    let mut run_a = (0u64, 0u64);
    let mut run_b = (0u64, 0u64);
    loop {
        if run_a.1 == 0 {
            if ia == a.len() {
                return if run_b.1 == 0 && ib == b.len() {
                    Ordering::Equal
                } else {
                    Ordering::Less
                };
            }
            run_a = syllable_run(a[ia]);
            ia += 1;
        }
        if run_b.1 == 0 {
            if ib == b.len() {
                return Ordering::Greater;
            }
            run_b = syllable_run(b[ib]);
            ib += 1;
        }
        match run_a.0.cmp(&run_b.0) {
            Ordering::Equal => {
                let step = run_a.1.min(run_b.1);
                run_a.1 -= step;
                run_b.1 -= step;
            }
            other => return other,
        }
    }
}

/// true iff `reduce(w1 w2 w1^-1 w2^-1)` is the identity.
pub fn commutes(w1: &Word, w2: &Word) -> bool {
    w1.commutator(w2).is_identity()
}

fn rotate(sylls: &[(Gen, Exp)], j: usize) -> Vec<(Gen, Exp)> {
    let mut out = sylls[j..].to_vec();
    out.extend_from_slice(&sylls[..j]);
    out
}

/// Index of the least rotation (at syllable boundaries) of a folded
/// cyclically reduced syllable sequence, under the letter order of
/// [`Word::shortlex_cmp`]. Ties resolve to the smallest index.
fn least_rotation(sylls: &[(Gen, Exp)]) -> usize {
    let mut best = 0;
    for j in 1..sylls.len() {
        if cmp_letter_runs(&rotate(sylls, j), &rotate(sylls, best)) == Ordering::Less {
            best = j;
        }
    }
    best
}

/// Exact free-group conjugacy: returns some `g` with `g^-1 w1 g = w2` when the
/// words are conjugate. Decided by matching canonical (least) rotations of the
/// cyclically reduced syllable sequences.
pub fn conjugator(w1: &Word, w2: &Word) -> Option<Word> {
    let (c1, p1) = w1.cyclic_reduce();
    let (c2, p2) = w2.cyclic_reduce();
    if c1.syllables.len() != c2.syllables.len() || c1.letter_len() != c2.letter_len() {
        return None;
    }
    if c1.is_identity() {
        return Some(Word::identity());
    }
    let j1 = least_rotation(&c1.syllables);
    let j2 = least_rotation(&c2.syllables);
    if rotate(&c1.syllables, j1) != rotate(&c2.syllables, j2) {
        return None;
    }
    // rot(w, j) = prefix_j(w)^-1 · w · prefix_j(w); equal canonical rotations
    // give c2 = q^-1 c1 q with q = prefix_j1(c1) · prefix_j2(c2)^-1, hence
    // g = p1 · q · p2^-1 conjugates w1 to w2.
    let u1 = Word {
        syllables: c1.syllables[..j1].to_vec(),
    };
    let u2 = Word {
        syllables: c2.syllables[..j2].to_vec(),
    };
    let g = p1.mul(&u1).mul(&u2.inverse()).mul(&p2.inverse());
    debug_assert_eq!(w1.conj_by(&g), *w2);
    Some(g)
}

/// Iterator over all freely reduced words of a rank-r free group in shortlex
/// order: identity first, then length 1, 2, ... `max_len = None` enumerates
/// forever (callers cap by count).
pub struct ShortlexWords {
    rank: u32,
    max_len: Option<u64>,
    /// Letter ranks of the last emitted word; empty before the identity.
    state: Vec<u64>,
    started: bool,
}

impl ShortlexWords {
    pub fn new(rank: u32, max_len: Option<u64>) -> Self {
        assert!(rank >= 1, "shortlex enumeration needs rank >= 1");
        ShortlexWords {
            rank,
            max_len,
            state: Vec::new(),
            started: false,
        }
    }

    fn top_rank(&self) -> u64 {
        2 * self.rank as u64 - 1
    }

    fn is_cancelling(a: u64, b: u64) -> bool {
        a ^ 1 == b
    }
}

impl Iterator for ShortlexWords {
    type Item = Word;

    fn next(&mut self) -> Option<Word> {
        if !self.started {
            self.started = true;
            return Some(Word::identity());
        }
        // Advance the odometer within the current length, else grow.
        let top = self.top_rank();
        let mut i = self.state.len();
        loop {
            if i == 0 {
                // All words of this length exhausted: start length+1.
                let new_len = self.state.len() as u64 + 1;
                if let Some(m) = self.max_len {
                    if new_len > m {
                        return None;
                    }
                }
                self.state.clear();
                for _ in 0..new_len {
                    let mut r = 0;
                    if let Some(&p) = self.state.last() {
                        while Self::is_cancelling(p, r) {
                            r += 1;
                        }
                    }
                    self.state.push(r);
                }
                break;
            }
            i -= 1;
            let prev = if i == 0 { None } else { Some(self.state[i - 1]) };
            let mut r = self.state[i] + 1;
            loop {
                if r > top {
                    break;
                }
                match prev {
                    Some(p) if Self::is_cancelling(p, r) => r += 1,
                    _ => break,
                }
            }
            if r <= top {
                self.state[i] = r;
                // Reset the suffix to the smallest valid letters.
                for j in i + 1..self.state.len() {
                    let p = self.state[j - 1];
                    let mut s = 0;
                    while Self::is_cancelling(p, s) {
                        s += 1;
                    }
                    self.state[j] = s;
                }
                break;
            }
        }
        let word = Word::from_syllables(self.state.iter().map(|&r| {
            let g = (r / 2) as Gen;
            let e = if r % 2 == 0 { 1 } else { -1 };
            (g, e)
        }));
        debug_assert_eq!(word.letter_len() as usize, self.state.len());
        Some(word)
    }
}

/// Report of the exhaustive three-squares scan.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SquaresReport {
    pub rank: u32,
    pub max_len: u64,
    pub words_scanned: u64,
    /// All triples (x, y, z) of reduced length <= max_len with x²y²z² = 1,
    /// in shortlex order of (x, y); z is determined by (x, y).
    pub solutions: Vec<[Word; 3]>,
    /// Whether every solution has pairwise commuting entries.
    pub all_commuting: bool,
}

/// Enumerates every triple of words of reduced length `<= max_len` over a
/// rank-`rank` alphabet with `x²y²z² = 1`. Roots are unique in free groups,
/// so for each (x, y) the candidate z is the unique square root of (x²y²)^-1;
/// pairs whose product is longer than any admissible z² are pruned first.
pub fn three_squares_scan(rank: u32, max_len: u64) -> Result<SquaresReport> {
    if rank < 2 {
        return Err(Error::Domain(
            "three-squares scan needs alphabet rank >= 2".into(),
        ));
    }
    if max_len == 0 {
        return Err(Error::Domain("max_len must be positive".into()));
    }
    let words: Vec<Word> = ShortlexWords::new(rank, Some(max_len)).collect();
    let mut solutions = Vec::new();
    let mut all_commuting = true;
    for x in &words {
        let x2 = x.pow(2);
        for y in &words {
            let u = x2.mul(&y.pow(2));
            // z² is a square of a word of length <= max_len, so its reduced
            // length is at most 2·max_len.
            if u.letter_len() > 2 * max_len {
                continue;
            }
            let z = match square_root(&u.inverse()) {
                Some(z) => z,
                None => continue,
            };
            if z.letter_len() > max_len {
                continue;
            }
            debug_assert!(x2.mul(&y.pow(2)).mul(&z.pow(2)).is_identity());
            let commuting =
                commutes(x, y) && commutes(y, &z) && commutes(x, &z);
            all_commuting &= commuting;
            solutions.push([x.clone(), y.clone(), z.clone()]);
        }
    }
    Ok(SquaresReport {
        rank,
        max_len,
        words_scanned: words.len() as u64,
        solutions,
        all_commuting,
    })
}

/// Unique square root in a free group, when it exists.
pub fn square_root(w: &Word) -> Option<Word> {
    if w.is_identity() {
        return Some(Word::identity());
    }
    let (root, n) = w.primitive_root().expect("nontrivial word");
    if n % 2 != 0 {
        return None;
    }
    Some(root.pow((n / 2) as Exp))
}

// ---------------------------------------------------------------------------
// Text grammar
// ---------------------------------------------------------------------------

/// Parses the word text grammar over a declared alphabet.
pub fn parse_word(alpha: &Alphabet, text: &str) -> Result<Word> {
    let tokens: Vec<(usize, &str)> = tokenize(text);
    if tokens.is_empty() {
        return Err(Error::Input(
            "empty word text; the identity is written \"1\"".into(),
        ));
    }
    if tokens.len() == 1 && tokens[0].1 == "1" {
        return Ok(Word::identity());
    }
    let mut sylls = Vec::with_capacity(tokens.len());
    for (pos, tok) in tokens {
        if tok == "1" {
            return Err(Error::Input(format!(
                "token \"1\" at byte {pos} must stand alone to denote the identity"
            )));
        }
        let (gen_part, exp) = match tok.split_once('^') {
            None => (tok, 1),
            Some((g, e)) => {
                let exp: Exp = e.parse().map_err(|_| {
                    Error::Input(format!("bad exponent {e:?} in token {tok:?} at byte {pos}"))
                })?;
                if exp == 0 {
                    return Err(Error::Input(format!(
                        "zero exponent in token {tok:?} at byte {pos}"
                    )));
                }
                (g, exp)
            }
        };
        let g = alpha.index_of(gen_part).ok_or_else(|| {
            Error::Input(format!(
                "unknown generator {gen_part:?} in token {tok:?} at byte {pos}"
            ))
        })?;
        sylls.push((g, exp));
    }
    Ok(Word::from_syllables(sylls))
}

fn tokenize(text: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in text.char_indices() {
        if c.is_whitespace() {
            if let Some(s) = start.take() {
                out.push((s, &text[s..i]));
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push((s, &text[s..]));
    }
    out
}

/// Emits the freely reduced form in the text grammar.
pub fn word_to_text(alpha: &Alphabet, w: &Word) -> String {
    if w.is_identity() {
        return "1".to_string();
    }
    let mut parts = Vec::with_capacity(w.syllables().len());
    for &(g, e) in w.syllables() {
        if e == 1 {
            parts.push(alpha.name(g).to_string());
        } else {
            parts.push(format!("{}^{}", alpha.name(g), e));
        }
    }
    parts.join(" ")
}
