//! Finite complex pairs and their rational chain data.
//!
//! Two input tiers share the downstream pipeline. The simplicial tier is a
//! finite simplicial pair (B, A) with a self-map given on vertices; the
//! cellular tier is a presentation-style CW pair with one vertex per side,
//! generators as 1-cells, attaching words for 2-cells, and explicit
//! boundary vectors above that.
//!
//! This module owns the combinatorial data, its validation, connected
//! components, and everything rational: chain complexes, chain maps,
//! Lefschetz numbers at chain level and on homology. Group-ring data lives
//! in [`crate::covers`].

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Diagnostic, Result};
use crate::{rat, CoreError, Int, Rat, RatMatrix};
use num_traits::Zero;

/// A simplex as a strictly increasing list of vertex ids.
pub type Simplex = Vec<usize>;

/// Simplicial pair (B, A): a finite complex with an A-flag per simplex.
#[derive(Debug, Clone)]
pub struct SimplicialPair {
    names: Vec<String>,
    /// dims[k] lists the k-simplices in lexicographic order. dims[0] is all
    /// vertices as singletons.
    dims: Vec<Vec<Simplex>>,
    /// a_flags[k][i] says whether dims[k][i] lies in A.
    a_flags: Vec<Vec<bool>>,
    /// Lookup from simplex to its index within its dimension.
    index: Vec<BTreeMap<Simplex, usize>>,
}

/// Self-map of a pair, given by its values on vertices.
#[derive(Debug, Clone)]
pub struct VertexSelfMap {
    pub images: Vec<usize>,
}

impl SimplicialPair {
    /// Builds the pair from raw data. Vertex ids are positions in `names`.
    /// Simplices may arrive unsorted; they are sorted here. Duplicate
    /// vertices inside a simplex are rejected later by `validate`.
    pub fn new(
        names: Vec<String>,
        higher: Vec<Vec<Simplex>>,
        a_simplices: Vec<Simplex>,
    ) -> Self {
        let mut dims: Vec<Vec<Simplex>> = Vec::with_capacity(higher.len() + 1);
        dims.push((0..names.len()).map(|v| vec![v]).collect());
        for level in higher {
            let mut level: Vec<Simplex> = level
                .into_iter()
                .map(|mut s| {
                    s.sort_unstable();
                    s
                })
                .collect();
            level.sort();
            level.dedup();
            dims.push(level);
        }
        while dims.len() > 1 && dims.last().is_some_and(|d| d.is_empty()) {
            dims.pop();
        }
        let index: Vec<BTreeMap<Simplex, usize>> = dims
            .iter()
            .map(|level| {
                level
                    .iter()
                    .enumerate()
                    .map(|(i, s)| (s.clone(), i))
                    .collect()
            })
            .collect();
        let a_set: BTreeSet<Simplex> = a_simplices
            .into_iter()
            .map(|mut s| {
                s.sort_unstable();
                s
            })
            .collect();
        let a_flags = dims
            .iter()
            .map(|level| level.iter().map(|s| a_set.contains(s)).collect())
            .collect();
        SimplicialPair { names, dims, a_flags, index }
    }

    pub fn vertex_count(&self) -> usize {
        self.names.len()
    }

    pub fn vertex_name(&self, v: usize) -> &str {
        &self.names[v]
    }

    pub fn vertex_id(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Top dimension of the complex.
    pub fn dim(&self) -> usize {
        self.dims.len() - 1
    }

    /// Top dimension of the A-subcomplex; None when A is empty.
    pub fn dim_a(&self) -> Option<usize> {
        (0..self.dims.len())
            .rev()
            .find(|&k| self.a_flags[k].iter().any(|&f| f))
    }

    pub fn simplices(&self, k: usize) -> &[Simplex] {
        if k < self.dims.len() {
            &self.dims[k]
        } else {
            &[]
        }
    }

    pub fn is_in_a(&self, k: usize, i: usize) -> bool {
        self.a_flags[k][i]
    }

    pub fn simplex_index(&self, s: &[usize]) -> Option<(usize, usize)> {
        let k = s.len() - 1;
        self.index
            .get(k)
            .and_then(|m| m.get(s).map(|&i| (k, i)))
    }

    pub fn contains(&self, s: &[usize]) -> bool {
        self.simplex_index(s).is_some()
    }

    pub fn simplex_in_a(&self, s: &[usize]) -> bool {
        self.simplex_index(s)
            .map(|(k, i)| self.a_flags[k][i])
            .unwrap_or(false)
    }

    /// All edges as (u, v), u < v.
    pub fn edges(&self) -> &[Simplex] {
        self.simplices(1)
    }

    /// Checks the pair and a candidate self-map. Returns all findings; the
    /// pair is usable when no error-level finding is present.
    pub fn validate(&self, map: &VertexSelfMap) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        let n = self.names.len();
        if n == 0 {
            out.push(Diagnostic::error("complex has no vertices"));
            return out;
        }
        {
            let mut seen = BTreeSet::new();
            for name in &self.names {
                if !seen.insert(name) {
                    out.push(Diagnostic::error(format!("duplicate vertex name {name:?}")));
                }
            }
        }
        for (k, level) in self.dims.iter().enumerate().skip(1) {
            for s in level {
                if s.len() != k + 1 {
                    out.push(Diagnostic::error(format!(
                        "degenerate simplex {} listed in dimension {k}",
                        self.format_simplex(s)
                    )));
                    continue;
                }
                if s.iter().any(|&v| v >= n) {
                    out.push(Diagnostic::error("simplex references unknown vertex"));
                    continue;
                }
                if s.windows(2).any(|w| w[0] == w[1]) {
                    out.push(Diagnostic::error(format!(
                        "simplex {} repeats a vertex",
                        self.format_simplex(s)
                    )));
                    continue;
                }
                for f in faces(s) {
                    if !self.contains(&f) {
                        out.push(Diagnostic::error(format!(
                            "face-closure violated: {} is listed but its face {} is not",
                            self.format_simplex(s),
                            self.format_simplex(&f)
                        )));
                    }
                }
            }
        }
        // A must be a subcomplex.
        for (k, level) in self.dims.iter().enumerate() {
            for (i, s) in level.iter().enumerate() {
                if !self.a_flags[k][i] || k == 0 {
                    continue;
                }
                for f in faces(s) {
                    if !self.simplex_in_a(&f) {
                        out.push(Diagnostic::error(format!(
                            "face-closure violated in A: {} is A-flagged but its face {} is not",
                            self.format_simplex(s),
                            self.format_simplex(&f)
                        )));
                    }
                }
            }
        }
        // The map must be simplicial and respect A.
        if map.images.len() != n {
            out.push(Diagnostic::error(format!(
                "vertex map covers {} of {} vertices",
                map.images.len(),
                n
            )));
            return out;
        }
        if let Some(&bad) = map.images.iter().find(|&&v| v >= n) {
            out.push(Diagnostic::error(format!("vertex map hits unknown vertex id {bad}")));
            return out;
        }
        for (k, level) in self.dims.iter().enumerate() {
            for (i, s) in level.iter().enumerate() {
                let image = image_vertex_set(map, s);
                if !self.contains(&image) {
                    out.push(Diagnostic::error(format!(
                        "map is not simplicial: {} lands on {} which is not a simplex",
                        self.format_simplex(s),
                        self.format_simplex(&image)
                    )));
                    continue;
                }
                if self.a_flags[k][i] && !self.simplex_in_a(&image) {
                    out.push(Diagnostic::error(format!(
                        "map does not preserve A: image of {} leaves A",
                        self.format_simplex(s)
                    )));
                }
            }
        }
        out
    }

    pub fn format_simplex(&self, s: &[usize]) -> String {
        let names: Vec<&str> = s
            .iter()
            .map(|&v| self.names.get(v).map(|n| n.as_str()).unwrap_or("?"))
            .collect();
        format!("[{}]", names.join(","))
    }

    /// Connected components of the 1-skeleton restricted to a scope.
    fn scoped_components(&self, a_only: bool) -> Vec<BTreeSet<usize>> {
        let in_scope: Vec<bool> = (0..self.names.len())
            .map(|v| !a_only || self.a_flags[0][v])
            .collect();
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); self.names.len()];
        for (i, e) in self.simplices(1).iter().enumerate() {
            if a_only && !self.a_flags[1][i] {
                continue;
            }
            adj[e[0]].push(e[1]);
            adj[e[1]].push(e[0]);
        }
        let mut seen = vec![false; self.names.len()];
        let mut comps = Vec::new();
        for start in 0..self.names.len() {
            if seen[start] || !in_scope[start] {
                continue;
            }
            let mut comp = BTreeSet::new();
            let mut queue = std::collections::VecDeque::from([start]);
            seen[start] = true;
            while let Some(v) = queue.pop_front() {
                comp.insert(v);
                for &w in &adj[v] {
                    if !seen[w] {
                        seen[w] = true;
                        queue.push_back(w);
                    }
                }
            }
            comps.push(comp);
        }
        comps
    }

    /// Component decomposition of the pair together with the self-map's
    /// action on components.
    pub fn components(&self, map: &VertexSelfMap) -> Components {
        let b_sets = self.scoped_components(false);
        let a_sets = self.scoped_components(true);
        let b_comps: Vec<Component> = b_sets
            .iter()
            .enumerate()
            .map(|(i, set)| {
                let invariant = set
                    .iter()
                    .all(|&v| set.contains(&map.images[v]));
                let has_relative_part = self.dims.iter().enumerate().any(|(k, level)| {
                    level.iter().enumerate().any(|(j, s)| {
                        !self.a_flags[k][j] && set.contains(&s[0])
                    })
                });
                Component {
                    label: format!("B{i}"),
                    vertices: set.clone(),
                    invariant,
                    has_relative_part,
                }
            })
            .collect();
        let a_comps: Vec<Component> = a_sets
            .iter()
            .enumerate()
            .map(|(i, set)| {
                let invariant = set.iter().all(|&v| set.contains(&map.images[v]));
                Component {
                    label: format!("A{i}"),
                    vertices: set.clone(),
                    invariant,
                    has_relative_part: false,
                }
            })
            .collect();
        let a_in_b = a_sets
            .iter()
            .map(|aset| {
                let v = *aset.first().expect("component is nonempty");
                b_sets
                    .iter()
                    .position(|bset| bset.contains(&v))
                    .expect("A-vertex lies in some B-component")
            })
            .collect();
        Components { a_comps, b_comps, a_in_b }
    }

    /// Rational chain complex for a scope: the A-subcomplex, the full
    /// complex, or the relative complex (B-basis with A-simplices dropped).
    /// Optionally restricted to one component's vertex set.
    pub fn rational_complex(
        &self,
        scope: ChainScope,
        component: Option<&BTreeSet<usize>>,
    ) -> RationalComplex {
        let mut basis: Vec<Vec<Simplex>> = Vec::new();
        for (k, level) in self.dims.iter().enumerate() {
            let chosen: Vec<Simplex> = level
                .iter()
                .enumerate()
                .filter(|(i, s)| {
                    let in_a = self.a_flags[k][*i];
                    let scope_ok = match scope {
                        ChainScope::A => in_a,
                        ChainScope::B => true,
                        ChainScope::Relative => !in_a,
                    };
                    let comp_ok = component.is_none_or(|set| set.contains(&s[0]));
                    scope_ok && comp_ok
                })
                .map(|(_, s)| s.clone())
                .collect();
            basis.push(chosen);
        }
        while basis.len() > 1 && basis.last().is_some_and(|b| b.is_empty()) {
            basis.pop();
        }
        let index: Vec<BTreeMap<Simplex, usize>> = basis
            .iter()
            .map(|level| level.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect())
            .collect();
        let mut boundaries = vec![RatMatrix::zeros(0, basis[0].len())];
        for k in 1..basis.len() {
            let mut d = RatMatrix::zeros(basis[k - 1].len(), basis[k].len());
            for (j, s) in basis[k].iter().enumerate() {
                for (pos, f) in faces(s).into_iter().enumerate() {
                    // Faces outside the basis (dropped A-simplices in the
                    // relative scope) contribute nothing.
                    if let Some(&i) = index[k - 1].get(&f) {
                        let sign = if pos % 2 == 0 { rat(1) } else { rat(-1) };
                        d[(i, j)] = d[(i, j)].clone() + sign;
                    }
                }
            }
            boundaries.push(d);
        }
        RationalComplex { basis, boundaries }
    }

    /// Rational chain map induced by the vertex map on a scoped complex.
    /// The source and target are the same complex; degenerate images give
    /// zero columns.
    pub fn rational_chain_map(
        &self,
        complex: &RationalComplex,
        map: &VertexSelfMap,
    ) -> Vec<RatMatrix> {
        let index: Vec<BTreeMap<Simplex, usize>> = complex
            .basis
            .iter()
            .map(|level| level.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect())
            .collect();
        complex
            .basis
            .iter()
            .enumerate()
            .map(|(k, level)| {
                let mut m = RatMatrix::zeros(level.len(), level.len());
                for (j, s) in level.iter().enumerate() {
                    if let Some((image, sign)) = oriented_image(map, s) {
                        if let Some(&i) = index[k].get(&image) {
                            m[(i, j)] = rat(sign);
                        }
                    }
                }
                m
            })
            .collect()
    }
}

/// Scope selector for chain data extracted from a pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChainScope {
    A,
    B,
    Relative,
}

/// One connected component with bookkeeping used by the invariants.
#[derive(Debug, Clone)]
pub struct Component {
    pub label: String,
    pub vertices: BTreeSet<usize>,
    /// True when the self-map sends the component into itself.
    pub invariant: bool,
    /// For B-components: whether some simplex lies outside A.
    pub has_relative_part: bool,
}

#[derive(Debug, Clone)]
pub struct Components {
    pub a_comps: Vec<Component>,
    pub b_comps: Vec<Component>,
    /// a_in_b[i] is the index of the B-component containing A-component i.
    pub a_in_b: Vec<usize>,
}

/// All proper faces of codimension one, in boundary-operator order: the i-th
/// entry drops the i-th vertex.
pub fn faces(s: &[usize]) -> Vec<Simplex> {
    (0..s.len())
        .map(|i| {
            s.iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &v)| v)
                .collect()
        })
        .collect()
}

/// Sorted, deduplicated image vertex set of a simplex.
pub fn image_vertex_set(map: &VertexSelfMap, s: &[usize]) -> Simplex {
    let mut image: Vec<usize> = s.iter().map(|&v| map.images[v]).collect();
    image.sort_unstable();
    image.dedup();
    image
}

/// Image simplex with orientation sign, or None when the image degenerates.
pub fn oriented_image(map: &VertexSelfMap, s: &[usize]) -> Option<(Simplex, i64)> {
    let image: Vec<usize> = s.iter().map(|&v| map.images[v]).collect();
    let mut sorted = image.clone();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return None;
    }
    // Sign of the permutation sorting `image` by counting inversions.
    let mut inversions = 0;
    for i in 0..image.len() {
        for j in i + 1..image.len() {
            if image[i] > image[j] {
                inversions += 1;
            }
        }
    }
    let sign = if inversions % 2 == 0 { 1 } else { -1 };
    Some((sorted, sign))
}

/// A chain complex of finite-dimensional rational vector spaces.
#[derive(Debug, Clone)]
pub struct RationalComplex {
    /// Basis labels per degree; only used for bookkeeping and tests.
    pub basis: Vec<Vec<Simplex>>,
    /// boundaries[k] maps degree k to degree k-1. boundaries[0] has zero
    /// rows so indices line up.
    pub boundaries: Vec<RatMatrix>,
}

impl RationalComplex {
    /// Wraps bare boundary matrices (used when the complex does not come
    /// from simplices and has no meaningful basis labels).
    pub fn from_boundaries(boundaries: Vec<RatMatrix>) -> Self {
        let basis = boundaries
            .iter()
            .map(|b| (0..b.cols()).map(|_| Vec::new()).collect())
            .collect();
        RationalComplex { basis, boundaries }
    }

    pub fn top_degree(&self) -> usize {
        self.boundaries.len() - 1
    }

    pub fn rank(&self, k: usize) -> usize {
        self.boundaries.get(k).map_or(0, |b| b.cols())
    }

    /// Euler characteristic as the alternating sum of chain ranks.
    pub fn euler_characteristic(&self) -> i64 {
        (0..self.boundaries.len())
            .map(|k| {
                let r = self.rank(k) as i64;
                if k % 2 == 0 {
                    r
                } else {
                    -r
                }
            })
            .sum()
    }

    /// Checks the boundary condition on consecutive degrees.
    pub fn verify_boundary_squares_to_zero(&self) -> Result<()> {
        for k in 2..self.boundaries.len() {
            let composite = self.boundaries[k - 1].mul(&self.boundaries[k]);
            if !composite.is_zero() {
                return Err(CoreError::internal(format!(
                    "rational boundary fails d^2 = 0 between degrees {k} and {}",
                    k - 2
                )));
            }
        }
        Ok(())
    }

    /// Lefschetz number at chain level: alternating sum of matrix traces.
    pub fn lefschetz_chain(&self, f: &[RatMatrix]) -> Rat {
        let mut acc = Rat::zero();
        for (k, m) in f.iter().enumerate() {
            let t = m.trace();
            acc = if k % 2 == 0 { acc + t } else { acc - t };
        }
        acc
    }

    /// Lefschetz number computed on rational homology. Independent of the
    /// chain-level route: homology bases are extracted per degree, the map
    /// is projected, and traces are summed with signs.
    pub fn lefschetz_homology(&self, f: &[RatMatrix]) -> Rat {
        let mut acc = Rat::zero();
        for k in 0..self.boundaries.len() {
            let t = self.homology_trace(k, &f[k]);
            acc = if k % 2 == 0 { acc + t } else { acc - t };
        }
        acc
    }

    /// Trace of the induced map on H_k.
    fn homology_trace(&self, k: usize, f_k: &RatMatrix) -> Rat {
        let n_k = self.rank(k);
        if n_k == 0 {
            return Rat::zero();
        }
        let cycles = self.boundaries[k].nullspace();
        let boundaries_in = if k + 1 < self.boundaries.len() {
            self.boundaries[k + 1].clone()
        } else {
            RatMatrix::zeros(n_k, 0)
        };
        // Column-reduce [image | cycles]: pivots inside the image block pick
        // an independent boundary basis, pivots inside the cycle block pick
        // homology representatives extending it.
        let stacked = boundaries_in.hstack(&cycles);
        let reduced = stacked.row_reduce();
        let b_cols: Vec<usize> = reduced
            .pivots
            .iter()
            .copied()
            .filter(|&c| c < boundaries_in.cols())
            .collect();
        let h_cols: Vec<usize> = reduced
            .pivots
            .iter()
            .copied()
            .filter(|&c| c >= boundaries_in.cols())
            .collect();
        if h_cols.is_empty() {
            return Rat::zero();
        }
        let all_rows: Vec<usize> = (0..n_k).collect();
        let basis = stacked.select(&all_rows, &b_cols.iter().chain(&h_cols).copied().collect::<Vec<_>>());
        let reps = stacked.select(&all_rows, &h_cols);
        let images = f_k.mul(&reps);
        let coeffs = basis
            .solve(&images)
            .expect("chain map must preserve cycles up to boundaries");
        let mut tr = Rat::zero();
        for (j, _) in h_cols.iter().enumerate() {
            tr = tr + coeffs[(b_cols.len() + j, j)].clone();
        }
        tr
    }
}

/// Integer value of a rational that is known to be an integer.
pub fn expect_integer(r: &Rat) -> Result<Int> {
    if r.is_integer() {
        Ok(r.to_integer())
    } else {
        Err(CoreError::internal(format!("expected integer, got {r}")))
    }
}

/// Cellular pair input: one vertex, named 1-cells, attaching words in
/// dimension 2, explicit boundary vectors above.
#[derive(Debug, Clone)]
pub struct CellularPairData {
    /// 1-cells: (name, lies in A).
    pub generators: Vec<(String, bool)>,
    /// cells[d] lists the (d+2)-cells, so cells[0] is dimension 2.
    pub cells: Vec<Vec<CwCell>>,
    /// Whether the unique 0-cell lies in A. Forced true when any generator
    /// or cell is A-flagged.
    pub vertex_in_a: bool,
    /// Images of generators under the self-map, as words.
    pub phi: Vec<(String, NamedWord)>,
    /// Images of cells of dimension two and higher.
    pub cell_images: Vec<(String, CellImage)>,
}

/// One cell of dimension at least two.
#[derive(Debug, Clone)]
pub struct CwCell {
    pub name: String,
    pub in_a: bool,
    /// Attaching word for 2-cells.
    pub attach: Option<NamedWord>,
    /// Boundary vector for cells of dimension at least three. For cells
    /// outside A this is the relative boundary: A-cells already dropped.
    pub boundary: Option<NamedVector>,
}

/// Word in named generators.
pub type NamedWord = Vec<(String, i64)>;
/// Integer combination of group elements written as words.
pub type NamedRingElem = Vec<(i64, NamedWord)>;
/// Vector over named cells with group-ring coefficients.
pub type NamedVector = Vec<(String, NamedRingElem)>;

/// Image of one higher cell: derived from the boundary equation in the top
/// degree, or supplied explicitly (and then verified).
#[derive(Debug, Clone)]
pub enum CellImage {
    Derive,
    Explicit(NamedVector),
}

impl CellularPairData {
    pub fn has_a(&self) -> bool {
        self.vertex_in_a
    }

    /// Dimension of the A-subcomplex; None when A is empty.
    pub fn dim_a(&self) -> Option<usize> {
        if !self.vertex_in_a {
            return None;
        }
        let mut d = 0;
        if self.generators.iter().any(|(_, a)| *a) {
            d = 1;
        }
        for (i, level) in self.cells.iter().enumerate() {
            if level.iter().any(|c| c.in_a) {
                d = i + 2;
            }
        }
        Some(d)
    }

    pub fn dim_b(&self) -> usize {
        let mut d = 0;
        if !self.generators.is_empty() {
            d = 1;
        }
        for (i, level) in self.cells.iter().enumerate() {
            if !level.is_empty() {
                d = i + 2;
            }
        }
        d
    }

    fn gen_in_a(&self, name: &str) -> Option<bool> {
        self.generators
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, a)| *a)
    }

    fn cell(&self, dim: usize, name: &str) -> Option<&CwCell> {
        self.cells
            .get(dim.checked_sub(2)?)
            .and_then(|level| level.iter().find(|c| c.name == name))
    }

    /// Structural validation: names, dimensions, A-closure, coverage of the
    /// map data. Chain-level checks (boundaries square to zero, supplied
    /// images satisfy the chain-map equation) happen while the equivariant
    /// complexes are built.
    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        let mut names = BTreeSet::new();
        for (g, _) in &self.generators {
            if !names.insert(g.clone()) {
                out.push(Diagnostic::error(format!("duplicate cell name {g:?}")));
            }
        }
        for level in &self.cells {
            for c in level {
                if !names.insert(c.name.clone()) {
                    out.push(Diagnostic::error(format!("duplicate cell name {:?}", c.name)));
                }
            }
        }
        let any_a = self.generators.iter().any(|(_, a)| *a)
            || self.cells.iter().flatten().any(|c| c.in_a);
        if any_a && !self.vertex_in_a {
            out.push(Diagnostic::error(
                "A-flagged cells present but the 0-cell is not in A",
            ));
        }
        let check_word = |out: &mut Vec<Diagnostic>, w: &NamedWord, a_only: bool, what: &str| {
            for (g, _) in w {
                match self.gen_in_a(g) {
                    None => out.push(Diagnostic::error(format!(
                        "{what} references unknown generator {g:?}"
                    ))),
                    Some(false) if a_only => out.push(Diagnostic::error(format!(
                        "{what} lies in A but its word uses non-A generator {g:?}"
                    ))),
                    _ => {}
                }
            }
        };
        for (di, level) in self.cells.iter().enumerate() {
            let dim = di + 2;
            for c in level {
                match (dim, &c.attach, &c.boundary) {
                    (2, Some(w), None) => check_word(&mut out, w, c.in_a, &format!("2-cell {:?}", c.name)),
                    (2, _, _) => out.push(Diagnostic::error(format!(
                        "2-cell {:?} needs exactly an attaching word",
                        c.name
                    ))),
                    (_, None, Some(vec)) => {
                        for (target, elem) in vec {
                            let Some(t) = self.cell(dim - 1, target) else {
                                out.push(Diagnostic::error(format!(
                                    "boundary of {:?} references unknown {}-cell {target:?}",
                                    c.name,
                                    dim - 1
                                )));
                                continue;
                            };
                            if c.in_a && !t.in_a {
                                out.push(Diagnostic::error(format!(
                                    "boundary of A-cell {:?} references non-A cell {target:?}",
                                    c.name
                                )));
                            }
                            if !c.in_a && t.in_a {
                                out.push(Diagnostic::error(format!(
                                    "relative boundary of {:?} references A-cell {target:?}; \
                                     drop A-components from relative boundaries",
                                    c.name
                                )));
                            }
                            for (_, w) in elem {
                                check_word(&mut out, w, c.in_a, &format!("boundary of {:?}", c.name));
                            }
                        }
                    }
                    _ => out.push(Diagnostic::error(format!(
                        "{dim}-cell {:?} needs exactly a boundary vector",
                        c.name
                    ))),
                }
            }
        }
        // phi covers the generators bijectively and respects A.
        let mut phi_seen = BTreeSet::new();
        for (g, w) in &self.phi {
            if self.gen_in_a(g).is_none() {
                out.push(Diagnostic::error(format!("phi maps unknown generator {g:?}")));
                continue;
            }
            if !phi_seen.insert(g.clone()) {
                out.push(Diagnostic::error(format!("phi lists {g:?} twice")));
            }
            let a_only = self.gen_in_a(g) == Some(true);
            check_word(&mut out, w, a_only, &format!("phi({g:?})"));
        }
        for (g, _) in &self.generators {
            if !phi_seen.contains(g) {
                out.push(Diagnostic::error(format!("phi misses generator {g:?}")));
            }
        }
        // cell_images covers every higher cell and respects A and dimension.
        let mut img_seen = BTreeSet::new();
        for (name, image) in &self.cell_images {
            let Some((dim, c)) = self.find_cell(name) else {
                out.push(Diagnostic::error(format!(
                    "cell_images references unknown cell {name:?}"
                )));
                continue;
            };
            if !img_seen.insert(name.clone()) {
                out.push(Diagnostic::error(format!("cell_images lists {name:?} twice")));
            }
            if let CellImage::Explicit(vec) = image {
                for (target, elem) in vec {
                    let Some(t) = self.cell(dim, target) else {
                        out.push(Diagnostic::error(format!(
                            "image of {name:?} references unknown {dim}-cell {target:?}"
                        )));
                        continue;
                    };
                    if c.in_a && !t.in_a {
                        out.push(Diagnostic::error(format!(
                            "image of A-cell {name:?} references non-A cell {target:?}"
                        )));
                    }
                    if !c.in_a && t.in_a {
                        out.push(Diagnostic::error(format!(
                            "relative image of {name:?} references A-cell {target:?}; \
                             drop A-components from relative images",
                        )));
                    }
                    for (_, w) in elem {
                        check_word(&mut out, w, c.in_a, &format!("image of {name:?}"));
                    }
                }
            }
        }
        for level in &self.cells {
            for c in level {
                if !img_seen.contains(&c.name) {
                    out.push(Diagnostic::error(format!(
                        "cell_images misses cell {:?}",
                        c.name
                    )));
                }
            }
        }
        out
    }

    fn find_cell(&self, name: &str) -> Option<(usize, &CwCell)> {
        for (di, level) in self.cells.iter().enumerate() {
            if let Some(c) = level.iter().find(|c| c.name == name) {
                return Some((di + 2, c));
            }
        }
        None
    }

    pub fn image_of(&self, name: &str) -> Option<&CellImage> {
        self.cell_images
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, img)| img)
    }

    pub fn phi_of(&self, name: &str) -> Option<&NamedWord> {
        self.phi.iter().find(|(n, _)| n == name).map(|(_, w)| w)
    }
}

/// Either input tier, after parsing.
#[derive(Debug, Clone)]
pub enum PairData {
    Simplicial { pair: SimplicialPair, map: VertexSelfMap },
    Cellular(CellularPairData),
}

/// Rational boundary data for the three scoped complexes of a simplicial
/// pair, without component restriction.
pub struct RationalChainData {
    pub a: RationalComplex,
    pub b: RationalComplex,
    pub relative: RationalComplex,
}

pub fn rational_chain_data(pair: &SimplicialPair) -> RationalChainData {
    RationalChainData {
        a: pair.rational_complex(ChainScope::A, None),
        b: pair.rational_complex(ChainScope::B, None),
        relative: pair.rational_complex(ChainScope::Relative, None),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("v{i}")).collect()
    }

    fn circle3() -> SimplicialPair {
        SimplicialPair::new(
            names(3),
            vec![vec![vec![0, 1], vec![0, 2], vec![1, 2]]],
            vec![],
        )
    }

    fn circle3_with_arc() -> SimplicialPair {
        SimplicialPair::new(
            names(3),
            vec![vec![vec![0, 1], vec![0, 2], vec![1, 2]]],
            vec![vec![1], vec![2], vec![1, 2]],
        )
    }

    fn identity_map(n: usize) -> VertexSelfMap {
        VertexSelfMap { images: (0..n).collect() }
    }

    #[test]
    fn validate_accepts_good_pairs() {
        let pair = circle3_with_arc();
        let diags = pair.validate(&identity_map(3));
        assert!(diags.iter().all(|d| d.severity != crate::Severity::Error), "{diags:?}");
    }

    #[test]
    fn validate_rejects_missing_face() {
        let pair = SimplicialPair::new(
            names(3),
            vec![
                vec![vec![0, 1], vec![0, 2]],
                vec![vec![0, 1, 2]],
            ],
            vec![],
        );
        let diags = pair.validate(&identity_map(3));
        assert!(
            diags.iter().any(|d| d.message.contains("face-closure violated")),
            "{diags:?}"
        );
    }

    #[test]
    fn validate_rejects_nonsimplicial_map() {
        // Collapsing an edge of the bare circle to the missing chord is not
        // simplicial; collapsing along an existing edge is.
        let pair = circle3();
        let bad = VertexSelfMap { images: vec![0, 0, 0] };
        let diags = pair.validate(&bad);
        assert!(diags.iter().all(|d| d.severity != crate::Severity::Error), "constant maps are simplicial");

        let square = SimplicialPair::new(
            names(4),
            vec![vec![vec![0, 1], vec![1, 2], vec![2, 3], vec![0, 3]]],
            vec![],
        );
        let fold = VertexSelfMap { images: vec![0, 1, 0, 1] };
        // Edge [1,2] maps onto {1,0} which exists; edge [2,3] onto {0,1};
        // edge [0,3] onto {0,1}: all fine. Now break it: send 3 to 2, so
        // [2,3] lands on {0,2} which is not an edge.
        let broken = VertexSelfMap { images: vec![0, 1, 0, 2] };
        assert!(square.validate(&fold).iter().all(|d| d.severity != crate::Severity::Error));
        assert!(square
            .validate(&broken)
            .iter()
            .any(|d| d.message.contains("not simplicial")));
    }

    #[test]
    fn validate_rejects_a_leak() {
        let pair = circle3_with_arc();
        // v1 is in A but maps to v0 which is not.
        let leak = VertexSelfMap { images: vec![0, 0, 2] };
        let diags = pair.validate(&leak);
        assert!(diags.iter().any(|d| d.message.contains("does not preserve A")));
    }

    #[test]
    fn components_of_disjoint_circles() {
        // Two triangles sharing nothing: vertices 0-2 and 3-5, A = first circle.
        let pair = SimplicialPair::new(
            names(6),
            vec![vec![
                vec![0, 1], vec![0, 2], vec![1, 2],
                vec![3, 4], vec![3, 5], vec![4, 5],
            ]],
            vec![
                vec![0], vec![1], vec![2],
                vec![0, 1], vec![0, 2], vec![1, 2],
            ],
        );
        let comps = pair.components(&identity_map(6));
        assert_eq!(comps.a_comps.len(), 1);
        assert_eq!(comps.b_comps.len(), 2);
        assert!(comps.b_comps[0].invariant && comps.b_comps[1].invariant);
        assert!(!comps.b_comps[0].has_relative_part);
        assert!(comps.b_comps[1].has_relative_part);
        assert_eq!(comps.a_in_b, vec![0]);
    }

    #[test]
    fn component_swap_is_not_invariant() {
        let pair = SimplicialPair::new(
            names(6),
            vec![vec![
                vec![0, 1], vec![0, 2], vec![1, 2],
                vec![3, 4], vec![3, 5], vec![4, 5],
            ]],
            vec![],
        );
        let swap = VertexSelfMap { images: vec![3, 4, 5, 0, 1, 2] };
        let comps = pair.components(&swap);
        assert!(comps.b_comps.iter().all(|c| !c.invariant));
    }

    #[test]
    fn components_invariant_under_relabeling() {
        let mut rng = StdRng::seed_from_u64(0x5eed_0010);
        for _ in 0..30 {
            let n = rng.gen_range(2..7);
            // Random graph.
            let mut edges = Vec::new();
            for u in 0..n {
                for v in u + 1..n {
                    if rng.gen_bool(0.4) {
                        edges.push(vec![u, v]);
                    }
                }
            }
            let pair = SimplicialPair::new(names(n), vec![edges.clone()], vec![]);
            let comps = pair.components(&identity_map(n));
            // Relabel with a random permutation.
            let mut perm: Vec<usize> = (0..n).collect();
            perm.shuffle(&mut rng);
            let new_names: Vec<String> = {
                let mut v = vec![String::new(); n];
                for (old, &new) in perm.iter().enumerate() {
                    v[new] = format!("v{old}");
                }
                v
            };
            let new_edges: Vec<Simplex> = edges
                .iter()
                .map(|e| e.iter().map(|&v| perm[v]).collect())
                .collect();
            let pair2 = SimplicialPair::new(new_names, vec![new_edges], vec![]);
            let comps2 = pair2.components(&identity_map(n));
            // Compare partitions as sets of name-sets.
            let to_names = |pair: &SimplicialPair, comps: &[Component]| -> BTreeSet<BTreeSet<String>> {
                comps
                    .iter()
                    .map(|c| c.vertices.iter().map(|&v| pair.vertex_name(v).to_string()).collect())
                    .collect()
            };
            assert_eq!(to_names(&pair, &comps.b_comps), to_names(&pair2, &comps2.b_comps));
        }
    }

    #[test]
    fn boundary_squares_to_zero_on_filled_triangle() {
        let pair = SimplicialPair::new(
            names(3),
            vec![
                vec![vec![0, 1], vec![0, 2], vec![1, 2]],
                vec![vec![0, 1, 2]],
            ],
            vec![],
        );
        let c = pair.rational_complex(ChainScope::B, None);
        c.verify_boundary_squares_to_zero().unwrap();
        assert_eq!(c.euler_characteristic(), 3 - 3 + 1);
    }

    #[test]
    fn relative_complex_drops_a() {
        let pair = circle3_with_arc();
        let rel = pair.rational_complex(ChainScope::Relative, None);
        assert_eq!(rel.rank(0), 1); // v0
        assert_eq!(rel.rank(1), 2); // [0,1], [0,2]
        // d[0,1] = v1 - v0 but v1 is dropped: only -v0 remains.
        assert_eq!(rel.boundaries[1][(0, 0)], rat(-1));
    }

    #[test]
    fn lefschetz_identity_is_euler_characteristic() {
        let pair = SimplicialPair::new(
            names(3),
            vec![
                vec![vec![0, 1], vec![0, 2], vec![1, 2]],
                vec![vec![0, 1, 2]],
            ],
            vec![],
        );
        let c = pair.rational_complex(ChainScope::B, None);
        let f = pair.rational_chain_map(&c, &identity_map(3));
        assert_eq!(c.lefschetz_chain(&f), rat(1));
        assert_eq!(c.lefschetz_homology(&f), rat(1));
    }

    #[test]
    fn lefschetz_reflection_of_circle() {
        // Reflection fixing v0: chain and homology routes agree on L = 2.
        let pair = circle3();
        let refl = VertexSelfMap { images: vec![0, 2, 1] };
        assert!(pair.validate(&refl).iter().all(|d| d.severity != crate::Severity::Error));
        let c = pair.rational_complex(ChainScope::B, None);
        let f = pair.rational_chain_map(&c, &refl);
        assert_eq!(c.lefschetz_chain(&f), rat(2));
        assert_eq!(c.lefschetz_homology(&f), rat(2));
    }

    #[test]
    fn lefschetz_rotation_is_zero() {
        let pair = circle3();
        let rot = VertexSelfMap { images: vec![1, 2, 0] };
        let c = pair.rational_complex(ChainScope::B, None);
        let f = pair.rational_chain_map(&c, &rot);
        assert_eq!(c.lefschetz_chain(&f), rat(0));
        assert_eq!(c.lefschetz_homology(&f), rat(0));
    }

    #[test]
    fn cw_validation_catches_structural_errors() {
        let good = CellularPairData {
            generators: vec![("a".into(), true), ("b".into(), false)],
            cells: vec![vec![CwCell {
                name: "e".into(),
                in_a: false,
                attach: Some(vec![("a".into(), 1), ("b".into(), 1), ("a".into(), -1), ("b".into(), -1)]),
                boundary: None,
            }]],
            vertex_in_a: true,
            phi: vec![
                ("a".into(), vec![("a".into(), 4)]),
                ("b".into(), vec![("b".into(), 3)]),
            ],
            cell_images: vec![("e".into(), CellImage::Derive)],
        };
        assert!(good.validate().is_empty(), "{:?}", good.validate());
        assert_eq!(good.dim_a(), Some(1));
        assert_eq!(good.dim_b(), 2);

        let mut bad = good.clone();
        bad.phi.pop();
        assert!(bad.validate().iter().any(|d| d.message.contains("phi misses")));

        let mut bad = good.clone();
        bad.phi[0].1 = vec![("b".into(), 1)];
        assert!(bad
            .validate()
            .iter()
            .any(|d| d.message.contains("non-A generator")));

        let mut bad = good.clone();
        bad.cell_images.clear();
        assert!(bad.validate().iter().any(|d| d.message.contains("misses cell")));
    }
}
