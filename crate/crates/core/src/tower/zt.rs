//! Exponentiation by integer polynomials.
//!
//! A tower with a single centralizer-extension ladder over a root `r`,
//!
//! ```text
//! F ⊂ F(r, s1) ⊂ F(r, s1)(s1, s2) ⊂ …
//! ```
//!
//! carries a family of formal powers of `r`: the element
//! `r^{p0} s1^{p1} s2^{p2} ⋯ sd^{pd}` behaves like `r` raised to the
//! polynomial `p(t) = p0 + p1 t + ⋯ + pd t^d`.  Substituting a concrete
//! integer `k` for `t` — by retracting each ladder letter onto the `k`-th
//! power of the letter below it — sends the formal power to the honest
//! power `r^{p(k)}`.
//!
//! [`ZtSession`] manages these ladders.  It owns a growing master tower and
//! a registry of ladders keyed by the canonical root they sit over, so
//! repeated exponentiations of the same root (or of its powers, inverses and
//! conjugates, which share the root) reuse the same ladder letters instead
//! of piling up parallel copies.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::de::Deserializer;
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::word::{Gen, Word};

use super::retract::level_retraction;
use super::{Hom, Tower};

/// An integer polynomial in one variable `t`, stored as coefficients in
/// increasing degree with trailing zeros trimmed.  The zero polynomial has
/// an empty coefficient list.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Polynomial {
    coeffs: Vec<i64>,
}

impl Polynomial {
    /// Builds a polynomial from coefficients `[p0, p1, …]` (constant term
    /// first), trimming trailing zeros.
    pub fn new(mut coeffs: Vec<i64>) -> Polynomial {
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        Polynomial { coeffs }
    }

    /// The zero polynomial.
    pub fn zero() -> Polynomial {
        Polynomial { coeffs: Vec::new() }
    }

    /// The constant polynomial `c`.
    pub fn constant(c: i64) -> Polynomial {
        Polynomial::new(vec![c])
    }

    /// The monomial `t`.
    pub fn t() -> Polynomial {
        Polynomial::new(vec![0, 1])
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree of the polynomial, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Coefficient of `t^i` (zero beyond the stored degree).
    pub fn coeff(&self, i: usize) -> i64 {
        self.coeffs.get(i).copied().unwrap_or(0)
    }

    /// Coefficients in increasing degree, trailing zeros trimmed.
    pub fn coeffs(&self) -> &[i64] {
        &self.coeffs
    }

    /// Pointwise sum, with overflow reported rather than wrapped.
    pub fn checked_add(&self, other: &Polynomial) -> Result<Polynomial> {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let c = self
                .coeff(i)
                .checked_add(other.coeff(i))
                .ok_or_else(|| Error::Domain("polynomial coefficient overflow".into()))?;
            out.push(c);
        }
        Ok(Polynomial::new(out))
    }

    /// Evaluates the polynomial at the integer `k`, reporting overflow
    /// instead of wrapping.
    pub fn evaluate(&self, k: i64) -> Result<i64> {
        let mut acc: i64 = 0;
        for &c in self.coeffs.iter().rev() {
            acc = acc
                .checked_mul(k)
                .and_then(|v| v.checked_add(c))
                .ok_or_else(|| Error::Domain(format!("polynomial evaluation overflows at t = {k}")))?;
        }
        Ok(acc)
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, &c) in self.coeffs.iter().enumerate() {
            if c == 0 {
                continue;
            }
            if first {
                if c < 0 {
                    write!(f, "-")?;
                }
                first = false;
            } else if c < 0 {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let a = c.unsigned_abs();
            match i {
                0 => write!(f, "{a}")?,
                _ => {
                    if a != 1 {
                        write!(f, "{a}")?;
                    }
                    if i == 1 {
                        write!(f, "t")?;
                    } else {
                        write!(f, "t^{i}")?;
                    }
                }
            }
        }
        Ok(())
    }
}

impl Serialize for Polynomial {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.coeffs.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Polynomial {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        Ok(Polynomial::new(Vec::<i64>::deserialize(deserializer)?))
    }
}

impl FromStr for Polynomial {
    type Err = Error;

    /// Parses either a JSON coefficient list (`"[2,3]"`, constant term
    /// first) or polynomial text such as `"2+3t"`, `"t^2 - 1"`, `"-t"`.
    fn from_str(s: &str) -> Result<Polynomial> {
        let trimmed = s.trim();
        if trimmed.starts_with('[') {
            let coeffs: Vec<i64> = serde_json::from_str(trimmed)
                .map_err(|e| Error::Input(format!("bad coefficient list {trimmed:?}: {e}")))?;
            return Ok(Polynomial::new(coeffs));
        }
        let compact: String = trimmed.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Err(Error::Input("empty polynomial".into()));
        }
        let bad = || Error::Input(format!("bad polynomial {trimmed:?}"));
        let mut coeffs: Vec<i64> = Vec::new();
        let mut add_term = |deg: usize, c: i64| {
            if coeffs.len() <= deg {
                coeffs.resize(deg + 1, 0);
            }
            coeffs[deg] = coeffs[deg].checked_add(c).ok_or_else(bad)?;
            Ok(())
        };
        let bytes = compact.as_bytes();
        let mut i = 0;
        while i < bytes.len() {
            let neg = match bytes[i] {
                b'+' => {
                    i += 1;
                    false
                }
                b'-' => {
                    i += 1;
                    true
                }
                _ if i == 0 => false,
                _ => return Err(bad()),
            };
            let digits_start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let coeff_digits = &compact[digits_start..i];
            let has_t = i < bytes.len() && bytes[i] == b't';
            if !has_t && coeff_digits.is_empty() {
                return Err(bad());
            }
            let mut c: i64 = if coeff_digits.is_empty() {
                1
            } else {
                coeff_digits.parse().map_err(|_| bad())?
            };
            if neg {
                c = c.checked_neg().ok_or_else(bad)?;
            }
            let mut deg = 0usize;
            if has_t {
                i += 1;
                deg = 1;
                if i < bytes.len() && bytes[i] == b'^' {
                    i += 1;
                    let exp_start = i;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                    if exp_start == i {
                        return Err(bad());
                    }
                    deg = compact[exp_start..i].parse().map_err(|_| bad())?;
                }
            }
            add_term(deg, c)?;
        }
        Ok(Polynomial::new(coeffs))
    }
}

/// One ladder of the session: the chain of centralizer extensions carrying
/// the formal powers of a single canonical root.
#[derive(Clone, Debug)]
struct Ladder {
    root: Word,
    /// Ladder letters `s1, s2, …`, lowest first.
    letters: Vec<Gen>,
    /// Index (height) of each ladder step inside the master tower.
    step_indices: Vec<usize>,
}

/// A session for exponentiating free-group elements by integer polynomials.
///
/// The session owns a master tower that starts at a free base and grows one
/// centralizer extension at a time as higher-degree exponents are requested.
/// Each nontrivial base element `g` determines a canonical root `r` (the
/// cyclically reduced primitive root, taken in its shortlex-smaller
/// orientation) with `g = c · r^m · c⁻¹`, and all elements sharing `r` share
/// one ladder.
pub struct ZtSession {
    tower: Tower,
    ladders: BTreeMap<String, Ladder>,
}

impl ZtSession {
    /// Starts a session over the free group on the given tower's base.
    /// The tower must have no steps yet.
    pub fn new(base: Tower) -> Result<ZtSession> {
        if base.depth() != 0 {
            return Err(Error::Input(
                "exponentiation session must start from a bare free base".into(),
            ));
        }
        Ok(ZtSession {
            tower: base,
            ladders: BTreeMap::new(),
        })
    }

    /// The master tower holding every ladder built so far.
    pub fn tower(&self) -> &Tower {
        &self.tower
    }

    /// Number of generators of the original free base.
    pub fn base_rank(&self) -> usize {
        self.tower.base_rank()
    }

    /// Splits `g` as `c · r^m · c⁻¹` with `r` the canonical (cyclically
    /// reduced, shortlex-least orientation) primitive root.
    fn canonical_root(&self, g: &Word) -> Result<(Word, i64, Word)> {
        let (prim, n) = g.primitive_root()?;
        let n = i64::try_from(n)
            .map_err(|_| Error::Domain("exponentiation base power exceeds i64".into()))?;
        let (core, conj) = prim.cyclic_reduce();
        let inv = core.inverse();
        if inv.shortlex_cmp(&core) == std::cmp::Ordering::Less {
            Ok((inv, -n, conj))
        } else {
            Ok((core, n, conj))
        }
    }

    fn fresh_ladder_name(&self) -> String {
        for j in 1.. {
            let name = format!("s{j}");
            if self.tower.alphabet().index_of(&name).is_none() {
                return name;
            }
        }
        unreachable!()
    }

    /// Extends the ladder for `key` until it has `want` letters.
    fn grow_ladder(&mut self, key: &str, root: &Word, want: usize) -> Result<()> {
        loop {
            let (have, top_letter) = match self.ladders.get(key) {
                Some(l) => (l.letters.len(), l.letters.last().copied()),
                None => (0, None),
            };
            if have >= want {
                return Ok(());
            }
            let u = match top_letter {
                Some(letter) => Word::generator(letter),
                None => root.clone(),
            };
            let name = self.fresh_ladder_name();
            let step_index = self.tower.depth();
            self.tower = self.tower.extend_centralizer(&u, &name)?;
            let letter = self
                .tower
                .alphabet()
                .index_of(&name)
                .expect("freshly added letter");
            let ladder = self.ladders.entry(key.to_owned()).or_insert_with(|| Ladder {
                root: root.clone(),
                letters: Vec::new(),
                step_indices: Vec::new(),
            });
            debug_assert_eq!(&ladder.root, root, "ladder key must determine its root");
            ladder.letters.push(letter);
            ladder.step_indices.push(step_index);
        }
    }

    /// Raises the base element `g` to the polynomial `p`.
    ///
    /// Returns the smallest prefix of the master tower containing the
    /// needed ladder, together with the element
    /// `c · ( r^{m·p0} · s1^{m·p1} ⋯ sd^{m·pd} ) · c⁻¹` representing
    /// `g^{p(t)}` in it.  The zero polynomial yields the identity in the
    /// bare base.  `g` must be a nontrivial word over the base generators.
    pub fn exp(&mut self, g: &Word, p: &Polynomial) -> Result<(Tower, Word)> {
        if let Some(mg) = g.max_gen() {
            if (mg as usize) >= self.tower.base_rank() {
                return Err(Error::Input(
                    "exponentiation base must be a word over the base generators".into(),
                ));
            }
        }
        if g.is_identity() {
            return Err(Error::Domain(
                "exponentiation base must be nontrivial".into(),
            ));
        }
        if p.is_zero() {
            return Ok((self.tower.prefix(0), Word::identity()));
        }
        let (root, m, conj) = self.canonical_root(g)?;
        let key = self.tower.print(&root);
        let degree = p.degree().expect("nonzero polynomial");
        self.grow_ladder(&key, &root, degree)?;
        let ladder = &self.ladders[&key];
        let scaled = |i: usize| -> Result<i64> {
            m.checked_mul(p.coeff(i))
                .ok_or_else(|| Error::Domain("exponent overflows i64".into()))
        };
        let mut w = root.pow(scaled(0)?);
        for (j, &letter) in ladder.letters.iter().take(degree).enumerate() {
            w = w.mul(&Word::from_gen_pow(letter, scaled(j + 1)?));
        }
        let element = conj.mul(&w).mul(&conj.inverse());
        let height = if degree == 0 {
            0
        } else {
            ladder.step_indices[degree - 1] + 1
        };
        Ok((self.tower.prefix(height), element))
    }

    /// The evaluation retraction `t ↦ k` for the root of `g`: a retraction
    /// of the full master tower onto its base that sends each ladder letter
    /// of `g`'s ladder to the `k`-th power of the rung below it and retracts
    /// every other ladder with exponent 1.  Applying it to `exp(g, p)`
    /// yields `g^{p(k)}` in the base.  `k` must be nonzero.
    pub fn eval_hom(&self, g: &Word, k: i64) -> Result<Hom> {
        if k == 0 {
            return Err(Error::Domain("evaluation point must be nonzero".into()));
        }
        let (root, _, _) = self.canonical_root(g)?;
        let key = self.tower.print(&root);
        let own_steps: Vec<usize> = self
            .ladders
            .get(&key)
            .map(|l| l.step_indices.clone())
            .unwrap_or_default();
        let mut composite = Hom::identity(&self.tower);
        let mut current = self.tower.clone();
        for height in (0..self.tower.depth()).rev() {
            let exponent = if own_steps.contains(&height) { k } else { 1 };
            let retraction = level_retraction(&current, exponent)?;
            let next = retraction.target().clone();
            composite = Hom::compose(&retraction, &composite)?;
            current = next;
        }
        Ok(composite)
    }
}
