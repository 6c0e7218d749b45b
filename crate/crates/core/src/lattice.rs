//! Exact integer lattice algebra in ℤⁿ.
//!
//! Everything runs on arbitrary-precision integers; no floating point. Maps
//! act on row vectors (`v ↦ v·M`), so an injective map ℤᵃ → ℤᵇ is an a×b
//! matrix of full row rank, and lattice bases are stored as rows in Hermite
//! normal form (the canonical representative, making lattice equality a
//! syntactic comparison).
//!
//! The module provides the oracles behind the free-abelian chain categories:
//! pure closures (ℚ-span ∩ ℤⁿ), direct complements of pure sublattices,
//! tuple-type comparison with closure isomorphisms, the rank
//! `m1 + m2 − rank(closure)` amalgam with pure embeddings, the torsion-free
//! pushout for plain embeddings, and unimodular automorphism extension.

use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;
use std::str::FromStr;

// ---------------------------------------------------------------------------
// Matrices
// ---------------------------------------------------------------------------

/// Dense integer matrix, row-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<BigInt>,
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "IntMatrix{}x{}[", self.rows, self.cols)?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, "; ")?;
            }
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{}", self.get(i, j))?;
            }
        }
        write!(f, "]")
    }
}

impl IntMatrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        IntMatrix {
            rows,
            cols,
            entries: vec![BigInt::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = IntMatrix::zero(n, n);
        for i in 0..n {
            m.set(i, i, BigInt::one());
        }
        m
    }

    pub fn from_rows(cols: usize, rows: Vec<Vec<BigInt>>) -> Result<Self> {
        for r in &rows {
            if r.len() != cols {
                return Err(Error::Input(format!(
                    "ragged matrix: expected {cols} columns, found a row of length {}",
                    r.len()
                )));
            }
        }
        let nrows = rows.len();
        Ok(IntMatrix {
            rows: nrows,
            cols,
            entries: rows.into_iter().flatten().collect(),
        })
    }

    pub fn from_i64(rows: &[&[i64]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        IntMatrix::from_rows(
            cols,
            rows.iter()
                .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
                .collect(),
        )
        .expect("rectangular literal")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigInt) {
        self.entries[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_vec(&self, i: usize) -> Vec<BigInt> {
        self.row(i).to_vec()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Zero::is_zero)
    }

    pub fn transpose(&self) -> IntMatrix {
        let mut m = IntMatrix::zero(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m.set(j, i, self.get(i, j).clone());
            }
        }
        m
    }

    pub fn mul(&self, rhs: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, rhs.rows, "matrix shape mismatch");
        let mut out = IntMatrix::zero(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let add = a * rhs.get(k, j);
                    let cur = out.get(i, j) + add;
                    out.set(i, j, cur);
                }
            }
        }
        out
    }

    /// Stacks `self` on top of `other` (equal column counts).
    pub fn vstack(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.cols, "vstack column mismatch");
        let mut entries = self.entries.clone();
        entries.extend(other.entries.iter().cloned());
        IntMatrix {
            rows: self.rows + other.rows,
            cols: self.cols,
            entries,
        }
    }

    fn swap_rows(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for c in 0..self.cols {
            self.entries.swap(i * self.cols + c, j * self.cols + c);
        }
    }

    fn negate_row(&mut self, i: usize) {
        for c in 0..self.cols {
            let v = -self.get(i, c).clone();
            self.set(i, c, v);
        }
    }

    /// row_i -= q · row_j
    fn row_sub_mul(&mut self, i: usize, j: usize, q: &BigInt) {
        for c in 0..self.cols {
            let v = self.get(i, c) - q * self.get(j, c);
            self.set(i, c, v);
        }
    }

    /// row_i += q · row_j
    fn row_add_mul(&mut self, i: usize, j: usize, q: &BigInt) {
        for c in 0..self.cols {
            let v = self.get(i, c) + q * self.get(j, c);
            self.set(i, c, v);
        }
    }

    fn swap_cols(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for r in 0..self.rows {
            self.entries.swap(r * self.cols + i, r * self.cols + j);
        }
    }

    /// col_j -= q · col_i
    fn col_sub_mul(&mut self, j: usize, i: usize, q: &BigInt) {
        for r in 0..self.rows {
            let v = self.get(r, j) - q * self.get(r, i);
            self.set(r, j, v);
        }
    }

    /// Exact determinant by fraction-free (Bareiss) elimination.
    pub fn det(&self) -> BigInt {
        assert_eq!(self.rows, self.cols, "determinant of a non-square matrix");
        let n = self.rows;
        if n == 0 {
            return BigInt::one();
        }
        let mut a = self.clone();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if a.get(k, k).is_zero() {
                match (k + 1..n).find(|&i| !a.get(i, k).is_zero()) {
                    Some(i) => {
                        a.swap_rows(k, i);
                        sign = -sign;
                    }
                    None => return BigInt::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = (a.get(i, j) * a.get(k, k) - a.get(i, k) * a.get(k, j)) / &prev;
                    a.set(i, j, v);
                }
                a.set(i, k, BigInt::zero());
            }
            prev = a.get(k, k).clone();
        }
        sign * a.get(n - 1, n - 1).clone()
    }

    pub fn is_unimodular(&self) -> bool {
        self.rows == self.cols && self.det().abs().is_one()
    }

    /// Rank over ℚ (= number of nonzero HNF rows).
    pub fn rank(&self) -> usize {
        let (h, _) = hermite_normal_form(self);
        (0..h.rows)
            .filter(|&i| h.row(i).iter().any(|x| !x.is_zero()))
            .count()
    }

    /// Inverse of a unimodular matrix (errors otherwise).
    pub fn inverse_unimodular(&self) -> Result<IntMatrix> {
        if self.rows != self.cols {
            return Err(Error::Domain("inverse of a non-square matrix".into()));
        }
        let (h, u) = hermite_normal_form(self);
        if h != IntMatrix::identity(self.rows) {
            return Err(Error::Domain(
                "matrix is not unimodular (HNF is not the identity)".into(),
            ));
        }
        Ok(u)
    }

    /// The i-th row as the image of e_i: applies `v ↦ v·M` to `v`.
    pub fn apply_row(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(v.len(), self.rows, "vector/matrix shape mismatch");
        let mut out = vec![BigInt::zero(); self.cols];
        for (i, coeff) in v.iter().enumerate() {
            if coeff.is_zero() {
                continue;
            }
            for (j, slot) in out.iter_mut().enumerate() {
                *slot += coeff * self.get(i, j);
            }
        }
        out
    }
}

// JSON form: array of arrays of decimal integers (arbitrary precision).
impl Serialize for IntMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<JsonInt>> = (0..self.rows)
            .map(|i| self.row(i).iter().map(|x| JsonInt(x.clone())).collect())
            .collect();
        rows.serialize(s)
    }
}

impl<'de> Deserialize<'de> for IntMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows: Vec<Vec<JsonInt>> = Vec::deserialize(d)?;
        let cols = rows.first().map_or(0, |r| r.len());
        IntMatrix::from_rows(
            cols,
            rows.into_iter()
                .map(|r| r.into_iter().map(|x| x.0).collect())
                .collect(),
        )
        .map_err(|e| D::Error::custom(e.to_string()))
    }
}

/// BigInt carried through serde_json's arbitrary-precision number token.
#[derive(Clone, Debug)]
pub(crate) struct JsonInt(pub BigInt);

impl Serialize for JsonInt {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let n = serde_json::Number::from_str(&self.0.to_string())
            .map_err(|e| serde::ser::Error::custom(e.to_string()))?;
        n.serialize(s)
    }
}

impl<'de> Deserialize<'de> for JsonInt {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let n = serde_json::Number::deserialize(d)?;
        let big = BigInt::from_str(&n.to_string())
            .map_err(|_| D::Error::custom(format!("expected an integer, found {n}")))?;
        Ok(JsonInt(big))
    }
}

pub fn vec_from_i64(v: &[i64]) -> Vec<BigInt> {
    v.iter().map(|&x| BigInt::from(x)).collect()
}

// ---------------------------------------------------------------------------
// Normal forms
// ---------------------------------------------------------------------------

/// Row Hermite normal form: returns (H, U) with U unimodular, H = U·M,
/// pivots positive, zeros below pivots, entries above pivots reduced into
/// [0, pivot), zero rows last. Deterministic pivot choice (smallest |entry|,
/// then smallest row index).
pub fn hermite_normal_form(m: &IntMatrix) -> (IntMatrix, IntMatrix) {
    let mut a = m.clone();
    let mut u = IntMatrix::identity(m.rows);
    let (rows, cols) = (m.rows, m.cols);
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        loop {
            let mut piv: Option<usize> = None;
            for i in r..rows {
                if a.get(i, c).is_zero() {
                    continue;
                }
                piv = Some(match piv {
                    None => i,
                    Some(p) => {
                        if a.get(i, c).abs() < a.get(p, c).abs() {
                            i
                        } else {
                            p
                        }
                    }
                });
            }
            let Some(p) = piv else { break };
            if p != r {
                a.swap_rows(r, p);
                u.swap_rows(r, p);
            }
            let mut done = true;
            for i in r + 1..rows {
                if a.get(i, c).is_zero() {
                    continue;
                }
                let q = a.get(i, c) / a.get(r, c);
                if !q.is_zero() {
                    a.row_sub_mul(i, r, &q);
                    u.row_sub_mul(i, r, &q);
                }
                if !a.get(i, c).is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if a.get(r, c).is_zero() {
            continue;
        }
        if a.get(r, c).is_negative() {
            a.negate_row(r);
            u.negate_row(r);
        }
        for i in 0..r {
            let q = a.get(i, c).div_floor(a.get(r, c));
            if !q.is_zero() {
                a.row_sub_mul(i, r, &q);
                u.row_sub_mul(i, r, &q);
            }
        }
        r += 1;
    }
    debug_assert_eq!(u.clone().mul(m), a);
    (a, u)
}

/// Smith normal form with all four transforms: S = U·M·V diagonal with
/// d₁ | d₂ | … ≥ 0, and V·Vinv = I.
pub struct SnfFull {
    pub s: IntMatrix,
    pub u: IntMatrix,
    pub v: IntMatrix,
    pub vinv: IntMatrix,
}

pub fn smith_normal_form_full(m: &IntMatrix) -> SnfFull {
    let mut a = m.clone();
    let (rows, cols) = (m.rows, m.cols);
    let mut u = IntMatrix::identity(rows);
    let mut v = IntMatrix::identity(cols);
    let mut vinv = IntMatrix::identity(cols);
    let lim = rows.min(cols);
    let mut t = 0;
    while t < lim {
        // Pivot: smallest |entry| in the trailing submatrix.
        let mut piv: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                if a.get(i, j).is_zero() {
                    continue;
                }
                piv = Some(match piv {
                    None => (i, j),
                    Some((pi, pj)) => {
                        if a.get(i, j).abs() < a.get(pi, pj).abs() {
                            (i, j)
                        } else {
                            (pi, pj)
                        }
                    }
                });
            }
        }
        let Some((pi, pj)) = piv else { break };
        a.swap_rows(t, pi);
        u.swap_rows(t, pi);
        a.swap_cols(t, pj);
        v.swap_cols(t, pj);
        vinv.swap_rows(t, pj);

        // Clear the pivot row and column; any remainder shrinks the pivot,
        // so restart pivot selection.
        let mut clean = true;
        for i in t + 1..rows {
            if a.get(i, t).is_zero() {
                continue;
            }
            let q = a.get(i, t) / a.get(t, t);
            if !q.is_zero() {
                a.row_sub_mul(i, t, &q);
                u.row_sub_mul(i, t, &q);
            }
            if !a.get(i, t).is_zero() {
                clean = false;
            }
        }
        for j in t + 1..cols {
            if a.get(t, j).is_zero() {
                continue;
            }
            let q = a.get(t, j) / a.get(t, t);
            if !q.is_zero() {
                a.col_sub_mul(j, t, &q);
                v.col_sub_mul(j, t, &q);
                vinv.row_add_mul(t, j, &q);
            }
            if !a.get(t, j).is_zero() {
                clean = false;
            }
        }
        if !clean {
            continue;
        }
        // Divisibility: pull a bad row up so the pivot gcd shrinks next pass.
        let one = BigInt::one();
        let bad = (t + 1..rows)
            .flat_map(|i| (t + 1..cols).map(move |j| (i, j)))
            .find(|&(i, j)| !(a.get(i, j) % a.get(t, t)).is_zero());
        if let Some((i, _)) = bad {
            a.row_add_mul(t, i, &one);
            u.row_add_mul(t, i, &one);
            continue;
        }
        if a.get(t, t).is_negative() {
            a.negate_row(t);
            u.negate_row(t);
        }
        t += 1;
    }
    debug_assert_eq!(v.clone().mul(&vinv), IntMatrix::identity(cols));
    debug_assert_eq!(u.clone().mul(m).mul(&v), a);
    SnfFull { s: a, u, v, vinv }
}

pub fn smith_normal_form(m: &IntMatrix) -> (IntMatrix, IntMatrix, IntMatrix) {
    let f = smith_normal_form_full(m);
    (f.s, f.u, f.v)
}

/// Nonzero diagonal entries of the Smith form (the invariant factors).
pub fn invariant_factors(m: &IntMatrix) -> Vec<BigInt> {
    let (s, _, _) = smith_normal_form(m);
    (0..s.rows().min(s.cols()))
        .map(|i| s.get(i, i).clone())
        .filter(|d| !d.is_zero())
        .collect()
}

// ---------------------------------------------------------------------------
// Lattices and tuples
// ---------------------------------------------------------------------------

/// A subgroup of ℤⁿ, stored as a full-row-rank basis in row HNF (zero rows
/// dropped). Equal lattices compare equal syntactically.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntLattice {
    ambient: usize,
    basis: IntMatrix,
}

impl IntLattice {
    /// Canonicalizes arbitrary generating rows via HNF.
    pub fn from_generators(ambient: usize, gens: &IntMatrix) -> Self {
        assert_eq!(gens.cols(), ambient, "generator width mismatch");
        let (h, _) = hermite_normal_form(gens);
        let rows: Vec<Vec<BigInt>> = (0..h.rows())
            .filter(|&i| h.row(i).iter().any(|x| !x.is_zero()))
            .map(|i| h.row_vec(i))
            .collect();
        IntLattice {
            ambient,
            basis: IntMatrix::from_rows(ambient, rows).expect("rectangular"),
        }
    }

    pub fn zero(ambient: usize) -> Self {
        IntLattice {
            ambient,
            basis: IntMatrix::zero(0, ambient),
        }
    }

    pub fn full(ambient: usize) -> Self {
        IntLattice {
            ambient,
            basis: IntMatrix::identity(ambient),
        }
    }

    pub fn ambient_rank(&self) -> usize {
        self.ambient
    }

    pub fn rank(&self) -> usize {
        self.basis.rows()
    }

    pub fn basis(&self) -> &IntMatrix {
        &self.basis
    }

    /// Integer coordinates of `v` in the HNF basis, if `v` lies in the lattice.
    pub fn coords(&self, v: &[BigInt]) -> Option<Vec<BigInt>> {
        assert_eq!(v.len(), self.ambient, "ambient rank mismatch");
        let mut rest = v.to_vec();
        let mut xs = Vec::with_capacity(self.rank());
        for i in 0..self.rank() {
            let p = (0..self.ambient)
                .find(|&j| !self.basis.get(i, j).is_zero())
                .expect("nonzero basis row");
            let (q, r) = rest[p].div_rem(self.basis.get(i, p));
            if !r.is_zero() {
                return None;
            }
            for (j, slot) in rest.iter_mut().enumerate() {
                *slot = &*slot - &q * self.basis.get(i, j);
            }
            xs.push(q);
        }
        if rest.iter().all(Zero::is_zero) {
            Some(xs)
        } else {
            None
        }
    }

    pub fn contains(&self, v: &[BigInt]) -> bool {
        self.coords(v).is_some()
    }

    /// Pure in ℤⁿ ⟺ all Smith invariant factors of the basis equal 1.
    pub fn is_pure(&self) -> bool {
        invariant_factors(&self.basis).iter().all(One::is_one)
    }
}

impl Serialize for IntLattice {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Doc<'a> {
            ambient_rank: usize,
            basis: &'a IntMatrix,
        }
        Doc {
            ambient_rank: self.ambient,
            basis: &self.basis,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for IntLattice {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Doc {
            ambient_rank: usize,
            basis: IntMatrix,
        }
        let doc = Doc::deserialize(d)?;
        if doc.basis.rows() > 0 && doc.basis.cols() != doc.ambient_rank {
            return Err(D::Error::custom("basis width differs from ambient rank"));
        }
        let gens = if doc.basis.rows() == 0 {
            IntMatrix::zero(0, doc.ambient_rank)
        } else {
            doc.basis
        };
        Ok(IntLattice::from_generators(doc.ambient_rank, &gens))
    }
}

/// A tuple of vectors in a common ℤⁿ.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TupleZ {
    pub ambient_rank: usize,
    vectors: Vec<Vec<BigInt>>,
}

impl Serialize for TupleZ {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Doc {
            ambient_rank: usize,
            vectors: Vec<Vec<JsonInt>>,
        }
        Doc {
            ambient_rank: self.ambient_rank,
            vectors: self
                .vectors
                .iter()
                .map(|v| v.iter().map(|x| JsonInt(x.clone())).collect())
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for TupleZ {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Doc {
            ambient_rank: usize,
            vectors: Vec<Vec<JsonInt>>,
        }
        let doc = Doc::deserialize(d)?;
        TupleZ::new(
            doc.ambient_rank,
            doc.vectors
                .into_iter()
                .map(|v| v.into_iter().map(|x| x.0).collect())
                .collect(),
        )
        .map_err(|e| D::Error::custom(e.to_string()))
    }
}

impl TupleZ {
    pub fn new(ambient_rank: usize, vectors: Vec<Vec<BigInt>>) -> Result<Self> {
        for v in &vectors {
            if v.len() != ambient_rank {
                return Err(Error::Input(format!(
                    "tuple vector of length {} in ambient rank {ambient_rank}",
                    v.len()
                )));
            }
        }
        Ok(TupleZ {
            ambient_rank,
            vectors,
        })
    }

    pub fn from_i64(ambient_rank: usize, vectors: &[&[i64]]) -> Self {
        TupleZ::new(
            ambient_rank,
            vectors.iter().map(|v| vec_from_i64(v)).collect(),
        )
        .expect("well-shaped literal")
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vector(&self, i: usize) -> Vec<BigInt> {
        self.vectors[i].clone()
    }

    pub fn matrix(&self) -> IntMatrix {
        IntMatrix::from_rows(
            self.ambient_rank,
            (0..self.len()).map(|i| self.vector(i)).collect(),
        )
        .expect("validated at construction")
    }
}

// ---------------------------------------------------------------------------
// Pure closures and complements
// ---------------------------------------------------------------------------

/// Smallest pure subgroup of ℤⁿ containing the tuple: the ℚ-span intersected
/// with ℤⁿ. With S = U·M·V and r nonzero invariant factors, the saturation is
/// the ℤ-span of the first r rows of V⁻¹ (a direct summand by unimodularity).
pub fn pure_closure(t: &TupleZ) -> IntLattice {
    let n = t.ambient_rank;
    if t.is_empty() {
        return IntLattice::zero(n);
    }
    let m = t.matrix();
    let f = smith_normal_form_full(&m);
    let r = (0..m.rows().min(n))
        .filter(|&i| !f.s.get(i, i).is_zero())
        .count();
    let rows: Vec<Vec<BigInt>> = (0..r).map(|i| f.vinv.row_vec(i)).collect();
    let gens = IntMatrix::from_rows(n, rows).expect("rectangular");
    let closure = IntLattice::from_generators(n, &gens);
    debug_assert_eq!(closure.rank(), r);
    closure
}

/// Direct complement of a pure sublattice: K with ℤⁿ = L ⊕ K. Deterministic:
/// the trailing rows of V⁻¹ from the (deterministic) Smith reduction of L's
/// HNF basis, re-canonicalized by HNF.
pub fn direct_complement(l: &IntLattice) -> Result<IntLattice> {
    let factors = invariant_factors(l.basis());
    if let Some(bad) = factors.iter().find(|d| !d.is_one()) {
        return Err(Error::Domain(format!(
            "lattice is not pure: invariant factor {bad} != 1"
        )));
    }
    let n = l.ambient_rank();
    let k = l.rank();
    let f = smith_normal_form_full(l.basis());
    let rows: Vec<Vec<BigInt>> = (k..n).map(|i| f.vinv.row_vec(i)).collect();
    let gens = IntMatrix::from_rows(n, rows).expect("rectangular");
    let comp = IntLattice::from_generators(n, &gens);
    debug_assert_eq!(comp.rank(), n - k);
    debug_assert!(l.basis().vstack(comp.basis()).is_unimodular() || n == 0);
    Ok(comp)
}

// ---------------------------------------------------------------------------
// Universal types of tuples
// ---------------------------------------------------------------------------

/// Isomorphism pure_closure(b) → pure_closure(c) carrying b to c, expressed
/// in the two HNF basis coordinate systems.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeIso {
    pub source: IntLattice,
    pub target: IntLattice,
    /// r×r unimodular matrix: source basis coordinates → target basis
    /// coordinates.
    pub basis_matrix: IntMatrix,
}

impl LatticeIso {
    /// Image in the target's ambient space of a vector of the source lattice.
    pub fn apply(&self, v: &[BigInt]) -> Option<Vec<BigInt>> {
        let coords = self.source.coords(v)?;
        let mapped = self.basis_matrix.apply_row(&coords);
        Some(self.target.basis().apply_row(&mapped))
    }
}

/// Decides ∀-type equality of two tuples: returns the isomorphism of pure
/// closures carrying b to c componentwise when it exists. The closure
/// isomorphism is unique (the tuples ℚ-span their closures), so failure of
/// integrality or unimodularity is a definitive "no".
pub fn same_universal_type(b: &TupleZ, c: &TupleZ) -> Result<Option<LatticeIso>> {
    if b.len() != c.len() {
        return Err(Error::Domain(format!(
            "tuples have different lengths: {} vs {}",
            b.len(),
            c.len()
        )));
    }
    let lb = pure_closure(b);
    let lc = pure_closure(c);
    let r = lb.rank();
    if lc.rank() != r {
        return Ok(None);
    }
    if r == 0 {
        return Ok(Some(LatticeIso {
            source: lb,
            target: lc,
            basis_matrix: IntMatrix::zero(0, 0),
        }));
    }
    let k = b.len();
    let mut beta_rows = Vec::with_capacity(k);
    let mut gamma_rows = Vec::with_capacity(k);
    for i in 0..k {
        beta_rows.push(lb.coords(&b.vector(i)).expect("tuple lies in its closure"));
        gamma_rows.push(lc.coords(&c.vector(i)).expect("tuple lies in its closure"));
    }
    let beta = IntMatrix::from_rows(r, beta_rows).expect("rectangular");
    let gamma = IntMatrix::from_rows(r, gamma_rows).expect("rectangular");
    // Solve beta · A = gamma exactly; beta has full column rank r.
    let (h, u) = hermite_normal_form(&beta);
    let gamma_t = u.mul(&gamma);
    // Dependent rows of beta must impose the same relations on gamma.
    for i in r..k {
        if gamma_t.row(i).iter().any(|x| !x.is_zero()) {
            return Ok(None);
        }
    }
    // h's top r×r block is upper triangular with positive diagonal.
    let mut a = IntMatrix::zero(r, r);
    for i in (0..r).rev() {
        for j in 0..r {
            let mut acc = gamma_t.get(i, j).clone();
            for l in i + 1..r {
                acc -= h.get(i, l) * a.get(l, j);
            }
            let (q, rem) = acc.div_rem(h.get(i, i));
            if !rem.is_zero() {
                return Ok(None);
            }
            a.set(i, j, q);
        }
    }
    if !a.is_unimodular() {
        return Ok(None);
    }
    debug_assert_eq!(beta.mul(&a), gamma);
    Ok(Some(LatticeIso {
        source: lb,
        target: lc,
        basis_matrix: a,
    }))
}

// ---------------------------------------------------------------------------
// Amalgamation, pushout, automorphism extension
// ---------------------------------------------------------------------------

/// Result of the tuple amalgam D = Z₁ × B × Z₂ with pure coordinate
/// embeddings g1, g2 agreeing on the tuples.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TupleAmalgam {
    pub rank: usize,
    pub g1: IntMatrix,
    pub g2: IntMatrix,
}

/// Unique integer coordinates of ℤⁿ in the splitting L ⊕ K: returns the
/// unimodular change-of-basis P⁻¹ where P stacks the two bases.
fn splitting_coords(l: &IntLattice, k: &IntLattice) -> IntMatrix {
    let p = l.basis().vstack(k.basis());
    p.inverse_unimodular()
        .expect("direct sum decomposition is unimodular")
}

/// Strong amalgam of two type-equal tuples: rank N = m1 + m2 − rank(closure),
/// both embeddings direct factors, g1(b) = g2(c) componentwise.
pub fn amalgamate_tuples(b: &TupleZ, c: &TupleZ) -> Result<TupleAmalgam> {
    let iso = same_universal_type(b, c)?.ok_or_else(|| {
        Error::Domain("tuples do not have the same universal type (same_universal_type)".into())
    })?;
    let m1 = b.ambient_rank;
    let m2 = c.ambient_rank;
    let r = iso.source.rank();
    let n = m1 + m2 - r;
    let lb = &iso.source;
    let lc = &iso.target;
    let z1 = direct_complement(lb)?;
    let z2 = direct_complement(lc)?;
    // Coordinate blocks of ℤᴺ: [Z1 | B | Z2] with widths m1−r, r, m2−r.
    let p1inv = splitting_coords(lb, &z1);
    let p2inv = splitting_coords(lc, &z2);
    let mut e1 = IntMatrix::zero(m1, n);
    for i in 0..r {
        e1.set(i, (m1 - r) + i, BigInt::one());
    }
    for j in 0..m1 - r {
        e1.set(r + j, j, BigInt::one());
    }
    let ainv = iso.basis_matrix.inverse_unimodular()?;
    let mut e2 = IntMatrix::zero(m2, n);
    for i in 0..r {
        for j in 0..r {
            e2.set(i, (m1 - r) + j, ainv.get(i, j).clone());
        }
    }
    for j in 0..m2 - r {
        e2.set(r + j, (m1 - r) + r + j, BigInt::one());
    }
    let g1 = p1inv.mul(&e1);
    let g2 = p2inv.mul(&e2);
    for i in 0..b.len() {
        debug_assert_eq!(g1.apply_row(&b.vector(i)), g2.apply_row(&c.vector(i)));
    }
    Ok(TupleAmalgam { rank: n, g1, g2 })
}

/// Pushout in torsion-free abelian groups of a span A ←f1− C −f2→ B of
/// injective maps: D = ℤ^{a+b} / sat(rowspace [f1 | −f2]).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Pushout {
    pub rank: usize,
    pub g1: IntMatrix,
    pub g2: IntMatrix,
}

pub fn pushout_torsionfree(f1: &IntMatrix, f2: &IntMatrix) -> Result<Pushout> {
    if f1.rows() != f2.rows() {
        return Err(Error::Domain(format!(
            "span legs disagree on the common domain: {} vs {} rows",
            f1.rows(),
            f2.rows()
        )));
    }
    let c = f1.rows();
    let a = f1.cols();
    let b = f2.cols();
    if f1.rank() != c {
        return Err(Error::Domain("f1 is not injective (row rank deficient)".into()));
    }
    if f2.rank() != c {
        return Err(Error::Domain("f2 is not injective (row rank deficient)".into()));
    }
    // K = [f1 | -f2], c × (a+b).
    let mut k_rows = Vec::with_capacity(c);
    for i in 0..c {
        let mut row = f1.row_vec(i);
        row.extend(f2.row(i).iter().map(|x| -x.clone()));
        k_rows.push(row);
    }
    let k = IntMatrix::from_rows(a + b, k_rows).expect("rectangular");
    let kt = TupleZ::new(a + b, (0..c).map(|i| k.row_vec(i)).collect())?;
    let sat = pure_closure(&kt);
    let w = direct_complement(&sat)?;
    let n = a + b - c;
    debug_assert_eq!(w.rank(), n);
    let pinv = splitting_coords(&sat, &w);
    // Projection ℤ^{a+b} → ℤᴺ: keep the W-coordinates.
    let mut e = IntMatrix::zero(a + b, n);
    for j in 0..n {
        e.set(c + j, j, BigInt::one());
    }
    let proj = pinv.mul(&e);
    let g1_rows: Vec<Vec<BigInt>> = (0..a).map(|i| proj.row_vec(i)).collect();
    let g2_rows: Vec<Vec<BigInt>> = (a..a + b).map(|i| proj.row_vec(i)).collect();
    let g1 = IntMatrix::from_rows(n, g1_rows).expect("rectangular");
    let g2 = IntMatrix::from_rows(n, g2_rows).expect("rectangular");
    debug_assert_eq!(f1.mul(&g1), f2.mul(&g2));
    Ok(Pushout { rank: n, g1, g2 })
}

/// Extends the closure isomorphism of two type-equal tuples in the same ℤⁿ
/// across direct complements to a unimodular automorphism mapping b to c.
pub fn extend_to_automorphism(b: &TupleZ, c: &TupleZ) -> Result<IntMatrix> {
    if b.ambient_rank != c.ambient_rank {
        return Err(Error::Domain(
            "tuples must live in the same ambient ℤⁿ".into(),
        ));
    }
    let iso = same_universal_type(b, c)?.ok_or_else(|| {
        Error::Domain("tuples do not have the same universal type (same_universal_type)".into())
    })?;
    let _n = b.ambient_rank;
    let lb = &iso.source;
    let lc = &iso.target;
    let zb = direct_complement(lb)?;
    let zc = direct_complement(lc)?;
    let pbinv = splitting_coords(lb, &zb);
    // x with coords (α, ζ) maps to α·(A·H_C) + ζ·H_{Z_C}.
    let top = iso.basis_matrix.mul(lc.basis());
    let q = top.vstack(zc.basis());
    let t = pbinv.mul(&q);
    debug_assert!(t.is_unimodular());
    for i in 0..b.len() {
        debug_assert_eq!(t.apply_row(&b.vector(i)), c.vector(i));
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;
    use proptest::prelude::*;

    // --- independent test-side oracles -----------------------------------

    /// ℚ-membership of v in the row space of m, by rational elimination.
    fn in_q_span(m: &IntMatrix, v: &[BigInt]) -> bool {
        let mut rows: Vec<Vec<BigRational>> = (0..m.rows())
            .map(|i| {
                m.row(i)
                    .iter()
                    .map(|x| BigRational::from_integer(x.clone()))
                    .collect()
            })
            .collect();
        let mut target: Vec<BigRational> = v
            .iter()
            .map(|x| BigRational::from_integer(x.clone()))
            .collect();
        let cols = m.cols();
        let mut used = vec![false; rows.len()];
        for c in 0..cols {
            let Some(p) = (0..rows.len())
                .find(|&i| !used[i] && !rows[i][c].is_zero())
            else {
                continue;
            };
            used[p] = true;
            let pivot = rows[p][c].clone();
            if !target[c].is_zero() {
                let f = &target[c] / &pivot;
                for j in 0..cols {
                    let sub = &f * &rows[p][j];
                    target[j] -= sub;
                }
            }
            let pivot_row = rows[p].clone();
            for (i, row) in rows.iter_mut().enumerate() {
                if i == p || used[i] || row[c].is_zero() {
                    continue;
                }
                let f = &row[c] / &pivot;
                for (slot, pv) in row.iter_mut().zip(&pivot_row) {
                    *slot -= &f * pv;
                }
            }
        }
        target.iter().all(|x| x.is_zero())
    }

    /// Rational rank by plain elimination.
    fn q_rank(m: &IntMatrix) -> usize {
        let mut rows: Vec<Vec<BigRational>> = (0..m.rows())
            .map(|i| {
                m.row(i)
                    .iter()
                    .map(|x| BigRational::from_integer(x.clone()))
                    .collect()
            })
            .collect();
        let cols = m.cols();
        let mut rank = 0;
        for c in 0..cols {
            let Some(p) = (rank..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
                continue;
            };
            rows.swap(rank, p);
            let pivot = rows[rank][c].clone();
            let pivot_row = rows[rank].clone();
            for row in rows.iter_mut().skip(rank + 1) {
                if row[c].is_zero() {
                    continue;
                }
                let f = &row[c] / &pivot;
                for (slot, pv) in row.iter_mut().zip(&pivot_row) {
                    *slot -= &f * pv;
                }
            }
            rank += 1;
        }
        rank
    }

    /// Determinant by cofactor expansion (exponential; n ≤ 6 only).
    fn det_cofactor(m: &IntMatrix) -> BigInt {
        let n = m.rows();
        assert_eq!(n, m.cols());
        if n == 0 {
            return BigInt::one();
        }
        if n == 1 {
            return m.get(0, 0).clone();
        }
        let mut acc = BigInt::zero();
        for j in 0..n {
            if m.get(0, j).is_zero() {
                continue;
            }
            let minor_rows: Vec<Vec<BigInt>> = (1..n)
                .map(|i| {
                    (0..n)
                        .filter(|&jj| jj != j)
                        .map(|jj| m.get(i, jj).clone())
                        .collect()
                })
                .collect();
            let minor = IntMatrix::from_rows(n - 1, minor_rows).unwrap();
            let term = m.get(0, j) * det_cofactor(&minor);
            if j % 2 == 0 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        acc
    }

    /// gcd of all maximal minors: 1 ⟺ the rows span a pure sublattice.
    fn maximal_minor_gcd(m: &IntMatrix) -> BigInt {
        let r = m.rows();
        let n = m.cols();
        assert!(r <= n);
        let mut cols: Vec<usize> = (0..r).collect();
        let mut g = BigInt::zero();
        loop {
            let sub_rows: Vec<Vec<BigInt>> = (0..r)
                .map(|i| cols.iter().map(|&j| m.get(i, j).clone()).collect())
                .collect();
            let sub = IntMatrix::from_rows(r, sub_rows).unwrap();
            g = g.gcd(&det_cofactor(&sub));
            // next combination
            let mut i = r;
            loop {
                if i == 0 {
                    return g;
                }
                i -= 1;
                if cols[i] < n - (r - i) {
                    cols[i] += 1;
                    for j in i + 1..r {
                        cols[j] = cols[j - 1] + 1;
                    }
                    break;
                }
            }
        }
    }

    /// Full saturation oracle: checks result == ℚ-span(t) ∩ ℤⁿ using only
    /// test-side elimination plus the minor-gcd purity criterion.
    fn assert_is_saturation(t: &TupleZ, result: &IntLattice) {
        let m = t.matrix();
        // result ⊆ saturation: every basis row is integral and in the ℚ-span.
        for i in 0..result.rank() {
            assert!(in_q_span(&m, result.basis().row(i)), "row outside span");
        }
        // span(t) ⊆ result.
        for i in 0..t.len() {
            assert!(result.contains(&t.vector(i)), "tuple vector not in result");
        }
        // ranks agree, and result is pure (gcd of maximal minors is 1), hence
        // result contains the smallest pure subgroup over span(t) — equality.
        assert_eq!(result.rank(), q_rank(&m), "rank mismatch");
        if result.rank() > 0 {
            assert!(maximal_minor_gcd(result.basis()).is_one(), "result not pure");
        }
    }

    // --- frozen examples ---------------------------------------------------

    #[test]
    fn hnf_examples() {
        let m = IntMatrix::from_i64(&[&[2, 4], &[1, 2]]);
        let (h, u) = hermite_normal_form(&m);
        assert_eq!(h, IntMatrix::from_i64(&[&[1, 2], &[0, 0]]));
        assert_eq!(u.mul(&m), h);
        assert!(u.is_unimodular());

        let id = IntMatrix::identity(3);
        let (h, u) = hermite_normal_form(&id);
        assert_eq!(h, id);
        assert_eq!(u, IntMatrix::identity(3));

        let m = IntMatrix::from_i64(&[&[0, 3]]);
        let (h, _) = hermite_normal_form(&m);
        assert_eq!(h, m);
    }

    #[test]
    fn snf_examples() {
        let m = IntMatrix::from_i64(&[&[2, 0], &[0, 3]]);
        let (s, u, v) = smith_normal_form(&m);
        assert_eq!(s, IntMatrix::from_i64(&[&[1, 0], &[0, 6]]));
        assert_eq!(u.mul(&m).mul(&v), s);
        assert!(u.is_unimodular() && v.is_unimodular());

        let z = IntMatrix::zero(2, 3);
        let (s, _, _) = smith_normal_form(&z);
        assert_eq!(s, z);

        let m = IntMatrix::from_i64(&[&[4]]);
        let (s, _, _) = smith_normal_form(&m);
        assert_eq!(s, m);
    }

    #[test]
    fn pure_closure_examples() {
        let t = TupleZ::from_i64(2, &[&[2, 4]]);
        let l = pure_closure(&t);
        assert_eq!(l.basis(), &IntMatrix::from_i64(&[&[1, 2]]));
        assert_is_saturation(&t, &l);

        let t = TupleZ::from_i64(3, &[]);
        assert_eq!(pure_closure(&t), IntLattice::zero(3));

        let t = TupleZ::from_i64(2, &[&[2, 0], &[0, 3]]);
        let l = pure_closure(&t);
        assert_eq!(l, IntLattice::full(2));
        assert_is_saturation(&t, &l);
    }

    #[test]
    fn pure_closure_box_agreement() {
        // Literal brute force at small scale: membership in the closure agrees
        // with rational span membership on the whole box [-5,5]³.
        let t = TupleZ::from_i64(3, &[&[2, 4, 0], &[0, 0, 3]]);
        let l = pure_closure(&t);
        let m = t.matrix();
        for x in -5i64..=5 {
            for y in -5i64..=5 {
                for z in -5i64..=5 {
                    let v = vec_from_i64(&[x, y, z]);
                    assert_eq!(l.contains(&v), in_q_span(&m, &v), "{x} {y} {z}");
                }
            }
        }
    }

    #[test]
    fn direct_complement_examples() {
        let l = IntLattice::from_generators(2, &IntMatrix::from_i64(&[&[1, 0]]));
        let k = direct_complement(&l).unwrap();
        assert_eq!(k.basis(), &IntMatrix::from_i64(&[&[0, 1]]));

        let l = IntLattice::from_generators(2, &IntMatrix::from_i64(&[&[1, 2]]));
        let k = direct_complement(&l).unwrap();
        let stacked = l.basis().vstack(k.basis());
        assert!(det_cofactor(&stacked).abs().is_one());

        let l = IntLattice::full(3);
        assert_eq!(direct_complement(&l).unwrap().rank(), 0);

        let not_pure = IntLattice::from_generators(2, &IntMatrix::from_i64(&[&[2, 0]]));
        assert!(direct_complement(&not_pure).is_err());
    }

    #[test]
    fn same_type_examples() {
        // b = (2) in ℤ, c = (2,0) in ℤ²: closure iso 1 ↦ (1,0).
        let b = TupleZ::from_i64(1, &[&[2]]);
        let c = TupleZ::from_i64(2, &[&[2, 0]]);
        let iso = same_universal_type(&b, &c).unwrap().expect("same type");
        assert_eq!(iso.apply(&vec_from_i64(&[1])), Some(vec_from_i64(&[1, 0])));
        assert_eq!(iso.apply(&vec_from_i64(&[2])), Some(vec_from_i64(&[2, 0])));

        // b = (2), c = (1): no isomorphism can send 2 ↦ 1.
        let b = TupleZ::from_i64(1, &[&[2]]);
        let c = TupleZ::from_i64(1, &[&[1]]);
        assert!(same_universal_type(&b, &c).unwrap().is_none());

        // empty tuples: zero map on zero lattices.
        let b = TupleZ::from_i64(1, &[]);
        let c = TupleZ::from_i64(3, &[]);
        let iso = same_universal_type(&b, &c).unwrap().expect("trivial type");
        assert_eq!(iso.source.rank(), 0);

        // mismatched lengths are a domain error.
        let b = TupleZ::from_i64(1, &[&[1]]);
        let c = TupleZ::from_i64(1, &[]);
        assert!(same_universal_type(&b, &c).is_err());
    }

    #[test]
    fn amalgamate_examples() {
        // b = (2,0), c = (0,2): closure rank 1, N = 3, g1(b) = g2(c).
        let b = TupleZ::from_i64(2, &[&[2, 0]]);
        let c = TupleZ::from_i64(2, &[&[0, 2]]);
        let am = amalgamate_tuples(&b, &c).unwrap();
        assert_eq!(am.rank, 3);
        assert_eq!(
            am.g1.apply_row(&b.vector(0)),
            am.g2.apply_row(&c.vector(0))
        );
        for g in [&am.g1, &am.g2] {
            assert_eq!(g.rank(), 2);
            assert!(invariant_factors(g).iter().all(|d| d.is_one()), "pure image");
        }

        // empty tuples over ℤ¹: the two coordinate inclusions into ℤ².
        let b = TupleZ::from_i64(1, &[]);
        let c = TupleZ::from_i64(1, &[]);
        let am = amalgamate_tuples(&b, &c).unwrap();
        assert_eq!(am.rank, 2);
        let stacked = am.g1.vstack(&am.g2);
        assert!(stacked.is_unimodular());

        // b = (1,0) in ℤ², c = (1) in ℤ: N = 2 + 1 - 1 = 2.
        let b = TupleZ::from_i64(2, &[&[1, 0]]);
        let c = TupleZ::from_i64(1, &[&[1]]);
        let am = amalgamate_tuples(&b, &c).unwrap();
        assert_eq!(am.rank, 2);
        assert_eq!(
            am.g1.apply_row(&b.vector(0)),
            am.g2.apply_row(&c.vector(0))
        );
    }

    #[test]
    fn pushout_examples() {
        // C = ℤ, A = B = ℤ, both maps ×2: D = ℤ with g1 = g2 = ±1.
        let two = IntMatrix::from_i64(&[&[2]]);
        let p = pushout_torsionfree(&two, &two).unwrap();
        assert_eq!(p.rank, 1);
        assert_eq!(p.g1, p.g2);
        assert!(p.g1.get(0, 0).abs().is_one());

        // C = 0: D = A ⊕ B with coordinate inclusions.
        let f1 = IntMatrix::zero(0, 2);
        let f2 = IntMatrix::zero(0, 1);
        let p = pushout_torsionfree(&f1, &f2).unwrap();
        assert_eq!(p.rank, 3);
        assert_eq!(p.g1, IntMatrix::from_i64(&[&[1, 0, 0], &[0, 1, 0]]));
        assert_eq!(p.g2, IntMatrix::from_i64(&[&[0, 0, 1]]));

        // C = ℤ, A = ℤ² via (1,0), B = ℤ via identity: D = ℤ².
        let f1 = IntMatrix::from_i64(&[&[1, 0]]);
        let f2 = IntMatrix::from_i64(&[&[1]]);
        let p = pushout_torsionfree(&f1, &f2).unwrap();
        assert_eq!(p.rank, 2);
        assert_eq!(f1.mul(&p.g1), f2.mul(&p.g2));
        assert_eq!(p.g1.rank(), 2);
        assert_eq!(p.g2.rank(), 1);

        // Non-injective leg is a domain error.
        let bad = IntMatrix::from_i64(&[&[0]]);
        assert!(pushout_torsionfree(&bad, &two).is_err());
    }

    #[test]
    fn automorphism_examples() {
        let b = TupleZ::from_i64(2, &[&[1, 0]]);
        let c = TupleZ::from_i64(2, &[&[0, 1]]);
        let t = extend_to_automorphism(&b, &c).unwrap();
        assert_eq!(t, IntMatrix::from_i64(&[&[0, 1], &[1, 0]]));

        let b = TupleZ::from_i64(2, &[&[2, 0]]);
        let c = TupleZ::from_i64(2, &[&[2, 2]]);
        let t = extend_to_automorphism(&b, &c).unwrap();
        assert_eq!(t, IntMatrix::from_i64(&[&[1, 1], &[0, 1]]));
        assert!(det_cofactor(&t).abs().is_one());

        let b = TupleZ::from_i64(3, &[&[1, 2, 3], &[0, 1, 0]]);
        let t = extend_to_automorphism(&b, &b).unwrap();
        for i in 0..b.len() {
            assert_eq!(t.apply_row(&b.vector(i)), b.vector(i));
        }
    }

    #[test]
    fn serde_round_trips() {
        let m = IntMatrix::from_i64(&[&[1, -2], &[30000000000000000, 4]]);
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(s, "[[1,-2],[30000000000000000,4]]");
        let back: IntMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);

        // A value beyond i64/u64 must survive via arbitrary precision.
        let big = BigInt::from_str("123456789012345678901234567890").unwrap();
        let m = IntMatrix::from_rows(1, vec![vec![big.clone()]]).unwrap();
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(s, "[[123456789012345678901234567890]]");
        let back: IntMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(back.get(0, 0), &big);

        let t = TupleZ::from_i64(2, &[&[2, 4]]);
        let s = serde_json::to_string(&t).unwrap();
        assert_eq!(s, r#"{"ambient_rank":2,"vectors":[[2,4]]}"#);
        let back: TupleZ = serde_json::from_str(&s).unwrap();
        assert_eq!(back, t);

        let l = pure_closure(&t);
        let s = serde_json::to_string(&l).unwrap();
        let back: IntLattice = serde_json::from_str(&s).unwrap();
        assert_eq!(back, l);
    }

    // --- property suites ---------------------------------------------------

    fn arb_matrix(max_dim: usize) -> impl Strategy<Value = IntMatrix> {
        (1..=max_dim, 1..=max_dim).prop_flat_map(|(r, c)| {
            prop::collection::vec(-5i64..=5, r * c).prop_map(move |vals| {
                let rows = vals
                    .chunks(c)
                    .map(|ch| ch.iter().map(|&x| BigInt::from(x)).collect())
                    .collect();
                IntMatrix::from_rows(c, rows).unwrap()
            })
        })
    }

    fn arb_span() -> impl Strategy<Value = (IntMatrix, IntMatrix)> {
        (1..=2usize, 1..=3usize, 1..=3usize).prop_flat_map(|(c, a, b)| {
            let a = a.max(c);
            let b = b.max(c);
            (
                prop::collection::vec(-5i64..=5, c * a),
                prop::collection::vec(-5i64..=5, c * b),
            )
                .prop_map(move |(v1, v2)| {
                    let to_rows = |vals: &[i64], w: usize| {
                        vals.chunks(w)
                            .map(|ch| ch.iter().map(|&x| BigInt::from(x)).collect())
                            .collect()
                    };
                    (
                        IntMatrix::from_rows(a, to_rows(&v1, a)).unwrap(),
                        IntMatrix::from_rows(b, to_rows(&v2, b)).unwrap(),
                    )
                })
        })
    }

    fn arb_tuple(max_dim: usize) -> impl Strategy<Value = TupleZ> {
        (1..=max_dim, 0..=3usize).prop_flat_map(|(n, k)| {
            prop::collection::vec(-5i64..=5, n * k).prop_map(move |vals| {
                let vectors = vals
                    .chunks(n)
                    .map(|ch| ch.iter().map(|&x| BigInt::from(x)).collect())
                    .collect();
                TupleZ::new(n, vectors).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn hnf_transform_is_unimodular(m in arb_matrix(4)) {
            let (h, u) = hermite_normal_form(&m);
            prop_assert_eq!(u.mul(&m), h.clone());
            prop_assert!(det_cofactor(&u).abs().is_one());
            // zero rows trail
            let nz: Vec<bool> = (0..h.rows())
                .map(|i| h.row(i).iter().any(|x| !x.is_zero()))
                .collect();
            let mut seen_zero = false;
            for z in nz {
                if !z { seen_zero = true; }
                prop_assert!(!(z && seen_zero), "zero row above a nonzero row");
            }
        }

        #[test]
        fn snf_transforms_and_divisibility(m in arb_matrix(4)) {
            let f = smith_normal_form_full(&m);
            prop_assert_eq!(f.u.mul(&m).mul(&f.v), f.s.clone());
            prop_assert!(det_cofactor(&f.u).abs().is_one());
            prop_assert!(det_cofactor(&f.v).abs().is_one());
            prop_assert_eq!(f.v.mul(&f.vinv), IntMatrix::identity(m.cols()));
            let d: Vec<BigInt> = (0..m.rows().min(m.cols()))
                .map(|i| f.s.get(i, i).clone())
                .collect();
            for i in 0..d.len() {
                prop_assert!(!d[i].is_negative());
                if i + 1 < d.len() && !d[i].is_zero() {
                    prop_assert!((&d[i + 1] % &d[i]).is_zero(), "divisibility chain");
                }
                if d[i].is_zero() && i + 1 < d.len() {
                    prop_assert!(d[i + 1].is_zero());
                }
            }
            for i in 0..f.s.rows() {
                for j in 0..f.s.cols() {
                    if i != j {
                        prop_assert!(f.s.get(i, j).is_zero());
                    }
                }
            }
        }

        #[test]
        fn pure_closure_is_the_saturation(t in arb_tuple(4)) {
            let l = pure_closure(&t);
            assert_is_saturation(&t, &l);
        }

        #[test]
        fn complement_stacks_unimodularly(t in arb_tuple(4)) {
            let l = pure_closure(&t);
            let k = direct_complement(&l).unwrap();
            if l.ambient_rank() > 0 {
                let stacked = l.basis().vstack(k.basis());
                prop_assert!(det_cofactor(&stacked).abs().is_one());
            }
        }

        #[test]
        fn amalgam_laws(t in arb_tuple(3), perm in any::<bool>()) {
            // Build a type-equal pair by permuting coordinates (an automorphism).
            let n = t.ambient_rank;
            let c_vectors: Vec<Vec<BigInt>> = (0..t.len())
                .map(|i| {
                    let mut v = t.vector(i);
                    if perm && n >= 2 { v.swap(0, 1); }
                    v
                })
                .collect();
            let c = TupleZ::new(n, c_vectors).unwrap();
            if let Some(_iso) = same_universal_type(&t, &c).unwrap() {
                let am = amalgamate_tuples(&t, &c).unwrap();
                prop_assert_eq!(am.rank, 2 * n - pure_closure(&t).rank());
                for i in 0..t.len() {
                    prop_assert_eq!(
                        am.g1.apply_row(&t.vector(i)),
                        am.g2.apply_row(&c.vector(i))
                    );
                }
                for g in [&am.g1, &am.g2] {
                    prop_assert_eq!(g.rank(), n);
                    prop_assert!(invariant_factors(g).iter().all(|d| d.is_one()));
                }
                let auto = extend_to_automorphism(&t, &c).unwrap();
                prop_assert!(det_cofactor(&auto).abs().is_one());
                for i in 0..t.len() {
                    prop_assert_eq!(auto.apply_row(&t.vector(i)), c.vector(i));
                }
            }
        }

        #[test]
        fn pushout_square_commutes((f1, f2) in arb_span()) {
            prop_assume!(f1.rank() == f1.rows() && f2.rank() == f2.rows());
            let p = pushout_torsionfree(&f1, &f2).unwrap();
            prop_assert_eq!(f1.mul(&p.g1), f2.mul(&p.g2));
            prop_assert_eq!(p.rank, f1.cols() + f2.cols() - f1.rows());
            prop_assert_eq!(p.g1.rank(), f1.cols());
            prop_assert_eq!(p.g2.rank(), f2.cols());
        }
    }
}
