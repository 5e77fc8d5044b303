//! Fundamental group presentations, abelianizations, and twisted conjugacy.
//!
//! Presentations come from edge paths of simplicial components or straight
//! from cellular input. All downstream invariants are computed on the
//! abelianization, where twisted-conjugacy classes form the cokernel of
//! (identity minus twist) and admit canonical representatives via a Hermite
//! form, so infinite class sets are handled exactly. Whenever a
//! presentation is not recognized as abelian (or free of rank at most one)
//! the class data is flagged as potentially coarser than the honest
//! nonabelian class set.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::complexes::{ChainScope, SimplicialPair, VertexSelfMap};
use crate::error::Result;
use crate::snf::{column_hermite, smith_normal_form, ColumnHermite};
use crate::{int, CoreError, Int, IntMatrix, Rat, RatMatrix};
use num_integer::Integer;
use num_traits::{One, Zero};

/// Free-group word over indexed generators: (generator, exponent) pairs.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct Word(pub Vec<(usize, i64)>);

impl Word {
    pub fn identity() -> Self {
        Word(Vec::new())
    }

    pub fn letter(gen: usize, exp: i64) -> Self {
        Word(vec![(gen, exp)]).reduced()
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_empty()
    }

    /// Merges adjacent equal-generator letters and drops zero exponents.
    pub fn reduced(&self) -> Word {
        let mut out: Vec<(usize, i64)> = Vec::with_capacity(self.0.len());
        for &(g, e) in &self.0 {
            if e == 0 {
                continue;
            }
            match out.last_mut() {
                Some((lg, le)) if *lg == g => {
                    *le += e;
                    if *le == 0 {
                        out.pop();
                    }
                }
                _ => out.push((g, e)),
            }
        }
        Word(out)
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut letters = self.0.clone();
        letters.extend_from_slice(&other.0);
        Word(letters).reduced()
    }

    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|&(g, e)| (g, -e)).collect())
    }

    pub fn pow(&self, n: i64) -> Word {
        if n == 0 {
            return Word::identity();
        }
        let base = if n > 0 { self.clone() } else { self.inverse() };
        let mut acc = Word::identity();
        for _ in 0..n.abs() {
            acc = acc.concat(&base);
        }
        acc
    }

    /// Total exponent per generator.
    pub fn exponents(&self, n_gens: usize) -> Vec<Int> {
        let mut v = vec![Int::zero(); n_gens];
        for &(g, e) in &self.0 {
            assert!(g < n_gens, "letter out of range");
            v[g] += int(e);
        }
        v
    }

    /// Substitutes `images[g]` for each generator g.
    pub fn substitute(&self, images: &[Word]) -> Word {
        let mut acc = Word::identity();
        for &(g, e) in &self.0 {
            acc = acc.concat(&images[g].pow(e));
        }
        acc
    }

    pub fn display(&self, gen_names: &[String]) -> String {
        if self.0.is_empty() {
            return "1".to_string();
        }
        self.0
            .iter()
            .map(|&(g, e)| {
                if e == 1 {
                    gen_names[g].clone()
                } else {
                    format!("{}^{}", gen_names[g], e)
                }
            })
            .collect::<Vec<_>>()
            .join("*")
    }
}

/// Finite group presentation.
#[derive(Debug, Clone)]
pub struct Presentation {
    pub generators: Vec<String>,
    pub relators: Vec<Word>,
}

impl Presentation {
    pub fn free(generators: Vec<String>) -> Self {
        Presentation { generators, relators: Vec::new() }
    }

    pub fn generator_index(&self, name: &str) -> Option<usize> {
        self.generators.iter().position(|g| g == name)
    }

    /// Exponent matrix of the relators: one column per relator.
    pub fn relator_matrix(&self) -> IntMatrix {
        let n = self.generators.len();
        let r = self.relators.len();
        let mut m = IntMatrix::zeros(n, r);
        for (j, w) in self.relators.iter().enumerate() {
            for (i, e) in w.exponents(n).into_iter().enumerate() {
                m[(i, j)] = e;
            }
        }
        m
    }

    /// Syntactic recognition of presentations whose group is definitely
    /// abelian: at most one generator, or every pairwise commutator of
    /// generators appears among the relators (up to cyclic rotation and
    /// inversion). This is deliberately conservative; a false negative only
    /// downgrades the report to "abelianized" precision.
    pub fn recognized_abelian(&self) -> bool {
        let n = self.generators.len();
        if n <= 1 {
            return true;
        }
        for i in 0..n {
            for j in i + 1..n {
                let comm = Word(vec![(i, 1), (j, 1), (i, -1), (j, -1)]);
                if !self.relators.iter().any(|r| cyclically_equal(r, &comm)) {
                    return false;
                }
            }
        }
        true
    }

    pub fn is_free(&self) -> bool {
        self.relators.iter().all(|r| r.is_identity())
    }

    /// Whether abelianized class data is exact for this presentation: true
    /// for recognized-abelian groups and for free groups of rank at most
    /// one. Free groups of higher rank have genuinely finer twisted
    /// conjugacy, and unrecognized presentations are treated pessimistically.
    pub fn shadow_exact(&self) -> bool {
        self.recognized_abelian() || (self.is_free() && self.generators.len() <= 1)
    }
}

fn cyclically_equal(a: &Word, b: &Word) -> bool {
    // Compare as letter strings (exponent ±1 expansion) up to rotation and
    // inversion. Words here are tiny.
    let expand = |w: &Word| -> Vec<(usize, i64)> {
        let mut out = Vec::new();
        for &(g, e) in &w.reduced().0 {
            let step = if e > 0 { 1 } else { -1 };
            for _ in 0..e.abs() {
                out.push((g, step));
            }
        }
        out
    };
    let xa = expand(a);
    let xb = expand(b);
    if xa.len() != xb.len() {
        return false;
    }
    if xa.is_empty() {
        return true;
    }
    let inv: Vec<(usize, i64)> = xa.iter().rev().map(|&(g, e)| (g, -e)).collect();
    for cand in [xa, inv] {
        for shift in 0..cand.len() {
            let rotated: Vec<(usize, i64)> = cand[shift..]
                .iter()
                .chain(&cand[..shift])
                .copied()
                .collect();
            if rotated == xb {
                return true;
            }
        }
    }
    false
}

/// Homomorphism between presented groups, by images of generators.
#[derive(Debug, Clone)]
pub struct GroupHom {
    pub images: Vec<Word>,
}

impl GroupHom {
    pub fn apply(&self, w: &Word) -> Word {
        w.substitute(&self.images)
    }

    /// Exponent matrix on abelianizations of the generator bases:
    /// target-generators by source-generators.
    pub fn exponent_matrix(&self, target_gens: usize) -> IntMatrix {
        let n_src = self.images.len();
        let mut m = IntMatrix::zeros(target_gens, n_src);
        for (j, w) in self.images.iter().enumerate() {
            for (i, e) in w.exponents(target_gens).into_iter().enumerate() {
                m[(i, j)] = e;
            }
        }
        m
    }

    /// Checks that every relator of the source maps to the identity of the
    /// target. The check is exact for recognized free targets (free
    /// reduction) and abelian targets (exponents modulo the relator
    /// lattice); otherwise only the abelianized condition is checked.
    pub fn verify(
        &self,
        source: &Presentation,
        target: &Presentation,
        target_ab: &AbelianStructure,
    ) -> Result<()> {
        if self.images.len() != source.generators.len() {
            return Err(CoreError::invalid(format!(
                "homomorphism lists {} images for {} generators",
                self.images.len(),
                source.generators.len()
            )));
        }
        for w in &self.images {
            for &(g, _) in &w.0 {
                if g >= target.generators.len() {
                    return Err(CoreError::invalid(
                        "homomorphism image uses an unknown target generator",
                    ));
                }
            }
        }
        for r in &source.relators {
            let image = self.apply(r);
            if target.is_free() {
                if !image.is_identity() {
                    return Err(CoreError::invalid(format!(
                        "relator maps to nontrivial element of a free group: {:?}",
                        image
                    )));
                }
                continue;
            }
            let exps = image.exponents(target.generators.len());
            if !target_ab.normal_form(&exps).iter().all(|x| x.is_zero()) {
                return Err(CoreError::invalid(
                    "relator image is nontrivial in the abelianized target",
                ));
            }
        }
        Ok(())
    }
}

/// Abelianization of a presentation in canonical coordinates.
///
/// Smith form of the relator matrix gives u * m * v = d; writing y = u * x
/// for generator-exponent vectors x, the group is the direct sum of Z/d_i
/// in the y-coordinates. Coordinates with d_i = 1 are dropped; the
/// surviving ones (torsion first, then free) are the canonical coordinates
/// used everywhere downstream.
#[derive(Debug, Clone)]
pub struct AbelianStructure {
    pub n_gens: usize,
    u: IntMatrix,
    u_inv: IntMatrix,
    kept: Vec<usize>,
    /// Modulus per canonical coordinate: 0 for free, d >= 2 for torsion.
    pub moduli: Vec<Int>,
}

impl AbelianStructure {
    pub fn new(p: &Presentation) -> Self {
        let n = p.generators.len();
        let m = p.relator_matrix();
        let s = smith_normal_form(&m);
        let diag = s.diagonal();
        let mut kept = Vec::new();
        let mut moduli = Vec::new();
        for i in 0..n {
            let d = diag.get(i).cloned().unwrap_or_else(Int::zero);
            if d.is_one() {
                continue;
            }
            kept.push(i);
            moduli.push(d);
        }
        let u_inv = invert_unimodular(&s.u);
        AbelianStructure { n_gens: n, u: s.u, u_inv, kept, moduli }
    }

    /// Number of canonical coordinates.
    pub fn coords(&self) -> usize {
        self.kept.len()
    }

    pub fn free_rank(&self) -> usize {
        self.moduli.iter().filter(|d| d.is_zero()).count()
    }

    pub fn torsion(&self) -> Vec<Int> {
        self.moduli.iter().filter(|d| !d.is_zero()).cloned().collect()
    }

    pub fn is_trivial_group(&self) -> bool {
        self.kept.is_empty()
    }

    /// Canonical coordinates of a generator-exponent vector.
    pub fn normal_form(&self, exps: &[Int]) -> Vec<Int> {
        assert_eq!(exps.len(), self.n_gens, "exponent vector length mismatch");
        let y = self.u.apply(exps);
        let mut out: Vec<Int> = self.kept.iter().map(|&i| y[i].clone()).collect();
        self.reduce(&mut out);
        out
    }

    pub fn word_normal_form(&self, w: &Word) -> Vec<Int> {
        self.normal_form(&w.exponents(self.n_gens))
    }

    /// Reduces torsion coordinates into [0, d).
    pub fn reduce(&self, elem: &mut [Int]) {
        for (x, d) in elem.iter_mut().zip(&self.moduli) {
            if !d.is_zero() {
                *x = x.mod_floor(d);
            }
        }
    }

    pub fn zero(&self) -> Vec<Int> {
        vec![Int::zero(); self.kept.len()]
    }

    pub fn add(&self, a: &[Int], b: &[Int]) -> Vec<Int> {
        let mut out: Vec<Int> = a.iter().zip(b).map(|(x, y)| x + y).collect();
        self.reduce(&mut out);
        out
    }

    pub fn neg(&self, a: &[Int]) -> Vec<Int> {
        let mut out: Vec<Int> = a.iter().map(|x| -x).collect();
        self.reduce(&mut out);
        out
    }

    /// A generator-exponent vector representing the element: the canonical
    /// section obtained by placing the element in the kept y-coordinates
    /// and pulling back through u.
    pub fn section(&self, elem: &[Int]) -> Vec<Int> {
        assert_eq!(elem.len(), self.kept.len(), "element length mismatch");
        let mut y = vec![Int::zero(); self.n_gens];
        for (slot, x) in self.kept.iter().zip(elem) {
            y[*slot] = x.clone();
        }
        self.u_inv.apply(&y)
    }

    /// Conjugates a map on generator exponents into canonical coordinates.
    /// `p` is target-generators by source-generators; both sides use this
    /// structure (endomorphism case).
    pub fn twist_matrix(&self, p: &IntMatrix) -> IntMatrix {
        assert_eq!(p.rows(), self.n_gens);
        assert_eq!(p.cols(), self.n_gens);
        let conj = self.u.mul(p).mul(&self.u_inv);
        let mut out = IntMatrix::zeros(self.kept.len(), self.kept.len());
        for (a, &i) in self.kept.iter().enumerate() {
            for (b, &j) in self.kept.iter().enumerate() {
                out[(a, b)] = conj[(i, j)].clone();
            }
        }
        out
    }

    /// Map on canonical coordinates induced by a hom into another group,
    /// given its exponent matrix (target-generators by source-generators).
    pub fn induced_map(&self, target: &AbelianStructure, p: &IntMatrix) -> IntMatrix {
        assert_eq!(p.cols(), self.n_gens);
        assert_eq!(p.rows(), target.n_gens);
        let mut out = IntMatrix::zeros(target.coords(), self.coords());
        for b in 0..self.coords() {
            let mut e = self.zero();
            e[b] = Int::one();
            let x = self.section(&e);
            let image = target.normal_form(&p.apply(&x));
            for (a, val) in image.into_iter().enumerate() {
                out[(a, b)] = val;
            }
        }
        out
    }

    /// Named-word form of an element, through the canonical section.
    pub fn element_word(&self, elem: &[Int]) -> Vec<(usize, Int)> {
        self.section(elem)
            .into_iter()
            .enumerate()
            .filter(|(_, e)| !e.is_zero())
            .collect()
    }
}

fn invert_unimodular(u: &IntMatrix) -> IntMatrix {
    let ru: RatMatrix = u.map(|x| Rat::from_integer(x.clone()));
    let inv = ru.inverse().expect("unimodular matrix is invertible");
    inv.map(|q| {
        assert!(q.is_integer(), "inverse of unimodular matrix must be integral");
        q.to_integer()
    })
}

/// Twisted conjugacy classes of an abelian group: the cokernel of
/// (identity - twist) together with the torsion relations, with canonical
/// representatives through a column Hermite form. Works uniformly for
/// finite and infinite class sets.
#[derive(Debug, Clone)]
pub struct ShadowClassSet {
    pub moduli: Vec<Int>,
    pub twist: IntMatrix,
    hnf: ColumnHermite<Int>,
    pub class_free_rank: usize,
    pub class_torsion: Vec<Int>,
}

pub fn twisted_conjugacy_classes(moduli: &[Int], twist: &IntMatrix) -> ShadowClassSet {
    let k = moduli.len();
    assert_eq!(twist.rows(), k);
    assert_eq!(twist.cols(), k);
    let torsion_cols: Vec<usize> = (0..k).filter(|&i| !moduli[i].is_zero()).collect();
    let mut lattice = IntMatrix::zeros(k, k + torsion_cols.len());
    let id = IntMatrix::identity(k);
    let diff = id.sub(twist);
    for i in 0..k {
        for j in 0..k {
            lattice[(i, j)] = diff[(i, j)].clone();
        }
    }
    for (extra, &i) in torsion_cols.iter().enumerate() {
        lattice[(i, k + extra)] = moduli[i].clone();
    }
    let hnf = column_hermite(&lattice);
    let s = smith_normal_form(&lattice);
    let diag = s.diagonal();
    let rank = s.rank();
    let class_free_rank = k - rank;
    let class_torsion: Vec<Int> = diag
        .into_iter()
        .filter(|d| !d.is_zero() && !d.is_one())
        .collect();
    ShadowClassSet {
        moduli: moduli.to_vec(),
        twist: twist.clone(),
        hnf,
        class_free_rank,
        class_torsion,
    }
}

impl ShadowClassSet {
    pub fn coords(&self) -> usize {
        self.moduli.len()
    }

    /// Canonical representative of the class of an element.
    pub fn class_of(&self, elem: &[Int]) -> Vec<Int> {
        self.hnf.reduce(elem)
    }

    pub fn is_finite(&self) -> bool {
        self.class_free_rank == 0
    }

    /// Number of classes when finite.
    pub fn count(&self) -> Option<Int> {
        if self.is_finite() {
            let from_torsion: Int = self.class_torsion.iter().product();
            Some(from_torsion)
        } else {
            None
        }
    }

    /// All classes by canonical representative, when finite.
    pub fn enumerate(&self) -> Option<Vec<Vec<Int>>> {
        if !self.is_finite() {
            return None;
        }
        // Finite means every coordinate row carries a Hermite pivot; the
        // canonical representatives are exactly the box of residues.
        let mut ranges: Vec<Int> = vec![Int::one(); self.coords()];
        for &(r, c) in &self.hnf.pivots {
            ranges[r] = self.hnf.h[(r, c)].clone();
        }
        let mut out: Vec<Vec<Int>> = vec![Vec::new()];
        for bound in &ranges {
            let mut next = Vec::new();
            for prefix in &out {
                let mut x = Int::zero();
                while &x < bound {
                    let mut item = prefix.clone();
                    item.push(x.clone());
                    next.push(item);
                    x += 1;
                }
                if bound.is_zero() {
                    // Unreachable for finite sets; keep the prefix to fail loudly.
                    next.push(prefix.clone());
                }
            }
            out = next;
        }
        Some(out)
    }
}

/// Class pushforward along a group map, for comparing A-classes inside B.
pub struct ClassMap<'a> {
    pub matrix: IntMatrix,
    pub source: &'a ShadowClassSet,
    pub target: &'a ShadowClassSet,
}

/// Builds the pushforward of shadow classes along `matrix` (canonical
/// coordinates of the source to canonical coordinates of the target),
/// verifying that the map intertwines the twists and kills source torsion.
pub fn pushforward_classes<'a>(
    matrix: &IntMatrix,
    source: &'a ShadowClassSet,
    target: &'a ShadowClassSet,
) -> Result<ClassMap<'a>> {
    let ka = source.coords();
    let kb = target.coords();
    assert_eq!(matrix.rows(), kb);
    assert_eq!(matrix.cols(), ka);
    let reduce_b = |v: Vec<Int>| -> Vec<Int> {
        let mut v = v;
        for (x, d) in v.iter_mut().zip(&target.moduli) {
            if !d.is_zero() {
                *x = x.mod_floor(d);
            }
        }
        v
    };
    // Source torsion must die: matrix * (d_i e_i) = 0 in the target group.
    for i in 0..ka {
        if source.moduli[i].is_zero() {
            continue;
        }
        let col: Vec<Int> = (0..kb)
            .map(|r| matrix[(r, i)].clone() * source.moduli[i].clone())
            .collect();
        if !reduce_b(col).iter().all(|x| x.is_zero()) {
            return Err(CoreError::invalid(
                "class pushforward is not defined: source torsion survives",
            ));
        }
    }
    // Intertwining with the twists, as maps into the target group.
    let left = matrix.mul(&source.twist);
    let right = target.twist.mul(matrix);
    for j in 0..ka {
        let diff: Vec<Int> = (0..kb)
            .map(|r| left[(r, j)].clone() - right[(r, j)].clone())
            .collect();
        if !reduce_b(diff).iter().all(|x| x.is_zero()) {
            return Err(CoreError::invalid(
                "class pushforward does not intertwine the twists",
            ));
        }
    }
    Ok(ClassMap { matrix: matrix.clone(), source, target })
}

impl ClassMap<'_> {
    pub fn apply(&self, class_rep: &[Int]) -> Vec<Int> {
        let image = self.matrix.apply(class_rep);
        self.target.class_of(&image)
    }
}

/// Spanning tree selection for edge-path presentations.
#[derive(Debug, Clone, Default)]
pub enum TreeSpec {
    /// Deterministic breadth-first tree from the least vertex, neighbors in
    /// ascending order.
    #[default]
    Bfs,
    /// Breadth-first with a vertex priority order: listed vertices are
    /// visited first, in list order, then the rest ascending.
    Priority(Vec<usize>),
    /// Explicit spanning tree as a set of edges (validated).
    Explicit(BTreeSet<(usize, usize)>),
}

/// Edge-path presentation of one component, with the spanning-tree data
/// needed to lift chains to the universal cover.
#[derive(Debug, Clone)]
pub struct EdgePathData {
    pub presentation: Presentation,
    pub basepoint: usize,
    pub component: BTreeSet<usize>,
    pub scope: ChainScope,
    pub tree_edges: BTreeSet<(usize, usize)>,
    /// Generator index per non-tree edge (u, v), u < v.
    pub gen_edges: Vec<(usize, usize)>,
    edge_gen: BTreeMap<(usize, usize), usize>,
    parent: BTreeMap<usize, usize>,
}

/// Builds the edge-path presentation of the component of the A- or full
/// subcomplex containing `component`'s vertices. Generators are the
/// non-tree edges; relators are the 2-simplex boundary words with tree
/// edges deleted. The basepoint is the least vertex of the component.
pub fn edge_path_presentation(
    pair: &SimplicialPair,
    component: &BTreeSet<usize>,
    scope: ChainScope,
    tree: &TreeSpec,
) -> Result<EdgePathData> {
    assert!(matches!(scope, ChainScope::A | ChainScope::B));
    let in_scope_edge = |idx: usize| -> bool {
        match scope {
            ChainScope::A => pair.is_in_a(1, idx),
            _ => true,
        }
    };
    let edges: Vec<(usize, usize)> = pair
        .simplices(1)
        .iter()
        .enumerate()
        .filter(|(i, e)| in_scope_edge(*i) && component.contains(&e[0]) && component.contains(&e[1]))
        .map(|(_, e)| (e[0], e[1]))
        .collect();
    let basepoint = *component.first().expect("component is nonempty");

    let tree_edges: BTreeSet<(usize, usize)> = match tree {
        TreeSpec::Explicit(set) => {
            for &(u, v) in set {
                if !edges.contains(&(u.min(v), u.max(v))) {
                    return Err(CoreError::invalid(format!(
                        "explicit tree edge ({u},{v}) is not an edge of the scoped component",
                    )));
                }
            }
            if set.len() + 1 != component.len() {
                return Err(CoreError::invalid(format!(
                    "explicit tree has {} edges for {} vertices",
                    set.len(),
                    component.len()
                )));
            }
            set.iter().map(|&(u, v)| (u.min(v), u.max(v))).collect()
        }
        TreeSpec::Bfs | TreeSpec::Priority(_) => {
            let rank: BTreeMap<usize, usize> = match tree {
                TreeSpec::Priority(order) => {
                    order.iter().enumerate().map(|(i, &v)| (v, i)).collect()
                }
                _ => BTreeMap::new(),
            };
            let key = |v: usize| (rank.get(&v).copied().unwrap_or(usize::MAX), v);
            let mut adj: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
            for &(u, v) in &edges {
                adj.entry(u).or_default().push(v);
                adj.entry(v).or_default().push(u);
            }
            for nbrs in adj.values_mut() {
                nbrs.sort_by_key(|&v| key(v));
            }
            let mut seen: BTreeSet<usize> = BTreeSet::from([basepoint]);
            let mut queue = VecDeque::from([basepoint]);
            let mut t = BTreeSet::new();
            while let Some(v) = queue.pop_front() {
                for &w in adj.get(&v).into_iter().flatten() {
                    if seen.insert(w) {
                        t.insert((v.min(w), v.max(w)));
                        queue.push_back(w);
                    }
                }
            }
            t
        }
    };

    // The tree must span the component (this also validates explicit trees).
    let mut parent: BTreeMap<usize, usize> = BTreeMap::new();
    {
        let mut adj: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for &(u, v) in &tree_edges {
            adj.entry(u).or_default().push(v);
            adj.entry(v).or_default().push(u);
        }
        let mut seen = BTreeSet::from([basepoint]);
        let mut queue = VecDeque::from([basepoint]);
        while let Some(v) = queue.pop_front() {
            for &w in adj.get(&v).into_iter().flatten() {
                if seen.insert(w) {
                    parent.insert(w, v);
                    queue.push_back(w);
                }
            }
        }
        if seen.len() != component.len() {
            return Err(CoreError::invalid(
                "spanning tree does not reach every vertex of the component",
            ));
        }
    }

    let gen_edges: Vec<(usize, usize)> = edges
        .iter()
        .copied()
        .filter(|e| !tree_edges.contains(e))
        .collect();
    let edge_gen: BTreeMap<(usize, usize), usize> = gen_edges
        .iter()
        .enumerate()
        .map(|(i, &e)| (e, i))
        .collect();
    let generators: Vec<String> = gen_edges
        .iter()
        .map(|&(u, v)| format!("{}-{}", pair.vertex_name(u), pair.vertex_name(v)))
        .collect();

    let mut data = EdgePathData {
        presentation: Presentation::free(generators),
        basepoint,
        component: component.clone(),
        scope,
        tree_edges,
        gen_edges,
        edge_gen,
        parent,
    };

    // Relators from scoped 2-simplices.
    let in_scope_tri = |idx: usize| -> bool {
        match scope {
            ChainScope::A => pair.is_in_a(2, idx),
            _ => true,
        }
    };
    let mut relators = Vec::new();
    for (i, t) in pair.simplices(2).iter().enumerate() {
        if !in_scope_tri(i) || !component.contains(&t[0]) {
            continue;
        }
        let (u, v, w) = (t[0], t[1], t[2]);
        let word = data
            .edge_word(u, v)
            .concat(&data.edge_word(v, w))
            .concat(&data.edge_word(u, w).inverse());
        if !word.is_identity() {
            relators.push(word);
        }
    }
    data.presentation.relators = relators;
    Ok(data)
}

impl EdgePathData {
    /// Group element of the loop tree-path + edge + tree-path for a
    /// directed edge traversal u -> v. Tree edges give the identity.
    pub fn edge_word(&self, u: usize, v: usize) -> Word {
        if u == v {
            return Word::identity();
        }
        let key = (u.min(v), u.max(v));
        if self.tree_edges.contains(&key) {
            return Word::identity();
        }
        let g = *self
            .edge_gen
            .get(&key)
            .unwrap_or_else(|| panic!("edge ({u},{v}) not in scoped component"));
        Word::letter(g, if u < v { 1 } else { -1 })
    }

    /// Vertices from v up to the basepoint along the tree.
    fn chain_to_base(&self, v: usize) -> Vec<usize> {
        let mut chain = vec![v];
        let mut cur = v;
        while let Some(&p) = self.parent.get(&cur) {
            chain.push(p);
            cur = p;
        }
        chain
    }

    /// Directed tree path between two vertices.
    pub fn tree_path(&self, from: usize, to: usize) -> Vec<(usize, usize)> {
        let up = self.chain_to_base(from);
        let down = self.chain_to_base(to);
        // Strip the common tail.
        let mut ui = up.len();
        let mut di = down.len();
        while ui > 0 && di > 0 && up[ui - 1] == down[di - 1] {
            ui -= 1;
            di -= 1;
        }
        let mut path = Vec::new();
        for i in 0..ui {
            path.push((up[i], up[i + 1]));
        }
        for i in (0..di).rev() {
            path.push((down[i + 1], down[i]));
        }
        path
    }

    /// Word of the image of a directed path under the vertex map. Images of
    /// collapsed edges are skipped; surviving edges must exist in the
    /// scoped complex, which the validated simplicial condition guarantees.
    pub fn image_path_word(&self, path: &[(usize, usize)], map: &VertexSelfMap) -> Word {
        let mut acc = Word::identity();
        for &(a, b) in path {
            let (fa, fb) = (map.images[a], map.images[b]);
            acc = acc.concat(&self.edge_word(fa, fb));
        }
        acc
    }

    /// Deck correction at a vertex: the class of the image of the tree path
    /// from the basepoint, closed up through the tree. Used to anchor
    /// lifted chain maps.
    pub fn vertex_correction(&self, v: usize, map: &VertexSelfMap) -> Word {
        let path = self.tree_path(self.basepoint, v);
        self.image_path_word(&path, map)
    }

    /// Induced endomorphism on the edge-path presentation: each generator
    /// loop maps to the word of its image loop. The basepoint conjugation
    /// is a tree path, hence trivial as a word.
    pub fn induced_hom(&self, map: &VertexSelfMap) -> GroupHom {
        let images = self
            .gen_edges
            .iter()
            .map(|&(u, v)| {
                let mut path = self.tree_path(self.basepoint, u);
                path.push((u, v));
                path.extend(self.tree_path(v, self.basepoint));
                self.image_path_word(&path, map)
            })
            .collect();
        GroupHom { images }
    }

    /// Word, in this presentation's generators, of the loop defining
    /// generator `gen` of another edge-path presentation. The loop is built
    /// from the other presentation's tree, then read off through this
    /// presentation's edge words; the connecting basepoint path is a tree
    /// path here, hence contributes nothing.
    ///
    /// Transporting every generator this way gives the
    /// change-of-presentation homomorphism, both between two trees of the
    /// same component and from an A-component presentation into the
    /// presentation of the B-component containing it.
    pub fn loop_word_of_generator(&self, other: &EdgePathData, gen: usize) -> Word {
        let (u, v) = other.gen_edges[gen];
        let mut path = other.tree_path(other.basepoint, u);
        path.push((u, v));
        path.extend(other.tree_path(v, other.basepoint));
        let mut acc = Word::identity();
        for &(a, b) in &path {
            acc = acc.concat(&self.edge_word(a, b));
        }
        acc.reduced()
    }
}
