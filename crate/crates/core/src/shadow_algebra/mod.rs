//! Group rings of finitely generated abelian groups, matrices over them,
//! diagonal-sum traces valued in twisted-conjugacy classes, Fox calculus,
//! and the augmentation back to plain integers.
//!
//! Group elements are canonical coordinate vectors (see
//! [`crate::fundamental_group::AbelianStructure`]); the ring context
//! [`GroupRing`] knows only the per-coordinate moduli, which is all that
//! addition of exponents needs.

pub mod ei;

use std::collections::BTreeMap;

use crate::error::Result;
use crate::fundamental_group::{ShadowClassSet, Word};
use crate::{CoreError, Int, IntMatrix};
use num_integer::Integer;
use num_traits::{One, Zero};

/// Ring context: the group ring Z[Q] for Q with the given coordinate
/// moduli (0 = free coordinate, d >= 2 = torsion).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupRing {
    pub moduli: Vec<Int>,
}

impl GroupRing {
    pub fn new(moduli: Vec<Int>) -> Self {
        GroupRing { moduli }
    }

    pub fn coords(&self) -> usize {
        self.moduli.len()
    }

    pub fn normalize(&self, key: &mut [Int]) {
        for (x, d) in key.iter_mut().zip(&self.moduli) {
            if !d.is_zero() {
                *x = x.mod_floor(d);
            }
        }
    }

    pub fn group_add(&self, a: &[Int], b: &[Int]) -> Vec<Int> {
        let mut out: Vec<Int> = a.iter().zip(b).map(|(x, y)| x + y).collect();
        self.normalize(&mut out);
        out
    }

    pub fn group_neg(&self, a: &[Int]) -> Vec<Int> {
        let mut out: Vec<Int> = a.iter().map(|x| -x).collect();
        self.normalize(&mut out);
        out
    }

    pub fn group_zero(&self) -> Vec<Int> {
        vec![Int::zero(); self.coords()]
    }

    /// Applies an integer matrix to a group element (a twist).
    pub fn group_twist(&self, mat: &IntMatrix, a: &[Int]) -> Vec<Int> {
        let mut out = mat.apply(a);
        self.normalize(&mut out);
        out
    }

    pub fn mul(&self, a: &GroupRingElem, b: &GroupRingElem) -> GroupRingElem {
        let mut terms: BTreeMap<Vec<Int>, Int> = BTreeMap::new();
        for (ka, ca) in &a.terms {
            for (kb, cb) in &b.terms {
                let key = self.group_add(ka, kb);
                let entry = terms.entry(key).or_insert_with(Int::zero);
                *entry += ca * cb;
            }
        }
        GroupRingElem::from_map(terms)
    }

    /// Applies a twist to every group element of a ring element.
    pub fn twist_elem(&self, mat: &IntMatrix, a: &GroupRingElem) -> GroupRingElem {
        let mut terms: BTreeMap<Vec<Int>, Int> = BTreeMap::new();
        for (k, c) in &a.terms {
            let key = self.group_twist(mat, k);
            let entry = terms.entry(key).or_insert_with(Int::zero);
            *entry += c;
        }
        GroupRingElem::from_map(terms)
    }
}

/// Element of the group ring: finitely many (group element, coefficient)
/// terms with normalized keys.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GroupRingElem {
    pub terms: BTreeMap<Vec<Int>, Int>,
}

impl GroupRingElem {
    pub fn zero() -> Self {
        GroupRingElem { terms: BTreeMap::new() }
    }

    pub fn from_map(map: BTreeMap<Vec<Int>, Int>) -> Self {
        let terms = map.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        GroupRingElem { terms }
    }

    /// The identity group element with coefficient one.
    pub fn one(ring: &GroupRing) -> Self {
        Self::of(ring.group_zero())
    }

    /// A single group element with coefficient one.
    pub fn of(key: Vec<Int>) -> Self {
        GroupRingElem { terms: BTreeMap::from([(key, Int::one())]) }
    }

    pub fn with_coeff(key: Vec<Int>, coeff: Int) -> Self {
        Self::from_map(BTreeMap::from([(key, coeff)]))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut terms = self.terms.clone();
        for (k, c) in &other.terms {
            let entry = terms.entry(k.clone()).or_insert_with(Int::zero);
            *entry += c;
        }
        Self::from_map(terms)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        GroupRingElem {
            terms: self.terms.iter().map(|(k, c)| (k.clone(), -c)).collect(),
        }
    }

    pub fn scale(&self, s: &Int) -> Self {
        if s.is_zero() {
            return Self::zero();
        }
        GroupRingElem {
            terms: self.terms.iter().map(|(k, c)| (k.clone(), c * s)).collect(),
        }
    }

    /// Sum of coefficients: the augmentation Z[Q] -> Z.
    pub fn augmentation(&self) -> Int {
        self.terms.values().sum()
    }

    /// Number of coordinates of the underlying group, when any term exists.
    pub fn key_len(&self) -> Option<usize> {
        self.terms.keys().next().map(|k| k.len())
    }
}

/// Matrix over a group ring, stored sparsely.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrMatrix {
    rows: usize,
    cols: usize,
    entries: BTreeMap<(usize, usize), GroupRingElem>,
}

impl GrMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        GrMatrix { rows, cols, entries: BTreeMap::new() }
    }

    pub fn identity(n: usize, ring: &GroupRing) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, GroupRingElem::one(ring));
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn set(&mut self, i: usize, j: usize, value: GroupRingElem) {
        assert!(i < self.rows && j < self.cols, "index out of range");
        if value.is_zero() {
            self.entries.remove(&(i, j));
        } else {
            self.entries.insert((i, j), value);
        }
    }

    pub fn get(&self, i: usize, j: usize) -> GroupRingElem {
        assert!(i < self.rows && j < self.cols, "index out of range");
        self.entries.get(&(i, j)).cloned().unwrap_or_default()
    }

    pub fn add_to(&mut self, i: usize, j: usize, value: &GroupRingElem) {
        let cur = self.get(i, j);
        self.set(i, j, cur.add(value));
    }

    pub fn entries(&self) -> impl Iterator<Item = (&(usize, usize), &GroupRingElem)> {
        self.entries.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (&(i, j), v) in &other.entries {
            out.add_to(i, j, v);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        GrMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|(&k, v)| (k, v.neg())).collect(),
        }
    }

    pub fn mul(&self, other: &Self, ring: &GroupRing) -> Self {
        assert_eq!(self.cols, other.rows, "shape mismatch in group-ring mul");
        let mut out = Self::zeros(self.rows, other.cols);
        for (&(i, k), a) in &self.entries {
            for jj in 0..other.cols {
                if let Some(b) = other.entries.get(&(k, jj)) {
                    let prod = ring.mul(a, b);
                    out.add_to(i, jj, &prod);
                }
            }
        }
        out
    }

    /// Applies a twist to every entry.
    pub fn twist(&self, mat: &IntMatrix, ring: &GroupRing) -> Self {
        GrMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .map(|(&k, v)| (k, ring.twist_elem(mat, v)))
                .collect(),
        }
    }

    /// Entrywise augmentation to an integer matrix.
    pub fn augment(&self) -> IntMatrix {
        let mut m = IntMatrix::zeros(self.rows, self.cols);
        for (&(i, j), v) in &self.entries {
            m[(i, j)] = v.augmentation();
        }
        m
    }
}

/// Trace valued in twisted-conjugacy classes: coefficients per canonical
/// class representative.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TraceVector {
    pub terms: BTreeMap<Vec<Int>, Int>,
}

impl TraceVector {
    pub fn zero() -> Self {
        TraceVector { terms: BTreeMap::new() }
    }

    pub fn from_map(map: BTreeMap<Vec<Int>, Int>) -> Self {
        let terms = map.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        TraceVector { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut terms = self.terms.clone();
        for (k, c) in &other.terms {
            let entry = terms.entry(k.clone()).or_insert_with(Int::zero);
            *entry += c;
        }
        Self::from_map(terms)
    }

    pub fn neg(&self) -> Self {
        TraceVector {
            terms: self.terms.iter().map(|(k, c)| (k.clone(), -c)).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, s: &Int) -> Self {
        if s.is_zero() {
            return Self::zero();
        }
        TraceVector {
            terms: self.terms.iter().map(|(k, c)| (k.clone(), c * s)).collect(),
        }
    }

    /// Sum of coefficients.
    pub fn augmentation(&self) -> Int {
        self.terms.values().sum()
    }

    /// Number of classes with nonzero coefficient.
    pub fn essential_count(&self) -> usize {
        self.terms.len()
    }

    /// Pushes every class through a map into another class set; used to
    /// compare traces computed in different presentations and to include
    /// subspace traces into the ambient one.
    pub fn map_classes(&self, f: impl Fn(&[Int]) -> Vec<Int>) -> TraceVector {
        let mut terms: BTreeMap<Vec<Int>, Int> = BTreeMap::new();
        for (k, c) in &self.terms {
            let entry = terms.entry(f(k)).or_insert_with(Int::zero);
            *entry += c;
        }
        Self::from_map(terms)
    }
}

/// Sum of diagonal entries, projected to twisted-conjugacy classes.
pub fn stallings_trace(m: &GrMatrix, sh: &ShadowClassSet) -> Result<TraceVector> {
    if m.rows() != m.cols() {
        return Err(CoreError::internal(format!(
            "trace of a {}x{} matrix",
            m.rows(),
            m.cols()
        )));
    }
    let mut terms: BTreeMap<Vec<Int>, Int> = BTreeMap::new();
    for (&(i, j), v) in m.entries() {
        if i != j {
            continue;
        }
        for (k, c) in &v.terms {
            if k.len() != sh.coords() {
                return Err(CoreError::internal(
                    "group-ring entry does not match the class set's group",
                ));
            }
            let class = sh.class_of(k);
            let entry = terms.entry(class).or_insert_with(Int::zero);
            *entry += c;
        }
    }
    Ok(TraceVector::from_map(terms))
}

/// Augmentation of a matrix trace without class projection; equals the
/// augmentation of any Stallings trace of the same matrix.
pub fn diagonal_augmentation(m: &GrMatrix) -> Int {
    let mut acc = Int::zero();
    for (&(i, j), v) in m.entries() {
        if i == j {
            acc += v.augmentation();
        }
    }
    acc
}

/// Free derivative of a word with respect to one generator, evaluated in
/// the group ring through the given images of generators.
///
/// The product rule d(uv) = d(u) + u d(v) determines everything from
/// d(g)/d(g) = 1 and d(g^-1)/d(g) = -g^-1; integer powers expand to
/// geometric sums.
pub fn fox_derivative(
    w: &Word,
    gen: usize,
    gen_images: &[Vec<Int>],
    ring: &GroupRing,
) -> GroupRingElem {
    let mut acc = GroupRingElem::zero();
    let mut prefix = ring.group_zero();
    for &(g, e) in &w.0 {
        let img = &gen_images[g];
        if g == gen {
            if e > 0 {
                // d(g^e) = 1 + g + ... + g^(e-1)
                let mut power = prefix.clone();
                for _ in 0..e {
                    acc = acc.add(&GroupRingElem::of(power.clone()));
                    power = ring.group_add(&power, img);
                }
            } else {
                // d(g^-k) = -(g^-1 + ... + g^-k)
                let neg_img = ring.group_neg(img);
                let mut power = prefix.clone();
                for _ in 0..(-e) {
                    power = ring.group_add(&power, &neg_img);
                    acc = acc.sub(&GroupRingElem::of(power.clone()));
                }
            }
        }
        // Advance the prefix by g^e.
        let mut step = img.clone();
        for x in step.iter_mut() {
            *x = x.clone() * Int::from(e);
        }
        prefix = ring.group_add(&prefix, &step);
    }
    acc
}

/// Value of a word in the group ring: a single group element term.
pub fn word_value(w: &Word, gen_images: &[Vec<Int>], ring: &GroupRing) -> GroupRingElem {
    let mut acc = ring.group_zero();
    for &(g, e) in &w.0 {
        let mut step = gen_images[g].clone();
        for x in step.iter_mut() {
            *x = x.clone() * Int::from(e);
        }
        acc = ring.group_add(&acc, &step);
    }
    GroupRingElem::of(acc)
}
