//! Small categories in which every endomorphism is invertible, modules
//! over them, and the bicategorical bookkeeping the trace machinery needs:
//! composition of modules (two independent routes), shadows of bimodules,
//! and duality data with its verification.
//!
//! Automorphism groups here are cyclic, which keeps the bookkeeping
//! elementary while still exercising every structural feature: nontrivial
//! endomorphism actions, non-invertible arrows between objects, and
//! free-rank/torsion extraction through integer normal forms.

use std::collections::BTreeSet;

use crate::error::Result;
use crate::snf::smith_normal_form;
use crate::{CoreError, Int, IntMatrix};
use num_traits::{One, Zero};

use super::{GrMatrix, GroupRing, GroupRingElem};

/// A finite category with objects 0..n, cyclic automorphism groups, and at
/// most one generating non-invertible arrow between distinct objects.
///
/// Hom(a, b) for related a < b is a free orbit of the target group: its
/// elements are g . t for g in Aut(b). Endomorphisms are exactly the
/// automorphisms, so the category is an EI-category.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EICategory {
    aut_orders: Vec<usize>,
    related: BTreeSet<(usize, usize)>,
}

/// A basis morphism: the automorphism part `g` (an exponent modulo the
/// target's group order), composed with the generating arrow when
/// `src != dst`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Morphism {
    pub src: usize,
    pub dst: usize,
    pub g: usize,
}

impl EICategory {
    /// Builds a category; `related` must be transitively closed and only
    /// contain pairs (a, b) with a < b.
    pub fn new(aut_orders: Vec<usize>, related: BTreeSet<(usize, usize)>) -> Result<Self> {
        let n = aut_orders.len();
        if aut_orders.iter().any(|&k| k == 0) {
            return Err(CoreError::computation("automorphism group orders must be positive"));
        }
        for &(a, b) in &related {
            if a >= b || b >= n {
                return Err(CoreError::computation(format!(
                    "related pair ({a}, {b}) is not an ordered pair of distinct objects"
                )));
            }
        }
        for &(a, b) in &related {
            for &(c, d) in &related {
                if b == c && !related.contains(&(a, d)) {
                    return Err(CoreError::computation(format!(
                        "related pairs are not transitively closed: ({a}, {b}) and ({c}, {d}) \
                         without ({a}, {d})"
                    )));
                }
            }
        }
        Ok(EICategory { aut_orders, related })
    }

    pub fn objects(&self) -> usize {
        self.aut_orders.len()
    }

    pub fn aut_order(&self, c: usize) -> usize {
        self.aut_orders[c]
    }

    pub fn hom_size(&self, a: usize, b: usize) -> usize {
        if a == b {
            self.aut_orders[a]
        } else if self.related.contains(&(a, b)) {
            self.aut_orders[b]
        } else {
            0
        }
    }

    /// Every basis morphism of the category, in a fixed order.
    pub fn morphisms(&self) -> Vec<Morphism> {
        let mut out = Vec::new();
        for a in 0..self.objects() {
            for b in 0..self.objects() {
                for g in 0..self.hom_size(a, b) {
                    out.push(Morphism { src: a, dst: b, g });
                }
            }
        }
        out
    }

    /// Composite `second . first`; both automorphism parts live in the
    /// final target's group, and the generating arrows compose to the
    /// generating arrow (orbit freeness on the left, triviality on the
    /// right).
    pub fn compose(&self, second: &Morphism, first: &Morphism) -> Morphism {
        assert_eq!(first.dst, second.src, "morphisms do not compose");
        let n = self.aut_orders[second.dst];
        let g = if first.dst == second.dst {
            (second.g + first.g) % n
        } else {
            second.g % n
        };
        Morphism { src: first.src, dst: second.dst, g }
    }

    pub fn identity(&self, c: usize) -> Morphism {
        Morphism { src: c, dst: c, g: 0 }
    }
}

/// A module over an EI-category supported on automorphisms: each object
/// carries a finitely generated free module over its group ring and every
/// non-invertible arrow acts as zero.
///
/// One struct serves both variances; only the direction in which the
/// automorphism action is applied differs, and that choice is made at the
/// point of use.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EIModule {
    pub ranks: Vec<usize>,
}

impl EIModule {
    pub fn new(ranks: Vec<usize>) -> Self {
        EIModule { ranks }
    }

    /// Free abelian rank of the value at `c`: rank * |Aut(c)|.
    pub fn abelian_rank(&self, cat: &EICategory, c: usize) -> usize {
        self.ranks[c] * cat.aut_order(c)
    }

    /// Index of the basis element (copy i, group exponent g) at object c.
    pub fn basis_index(&self, cat: &EICategory, c: usize, i: usize, g: usize) -> usize {
        i * cat.aut_order(c) + g
    }
}

/// Free-rank and torsion invariants of a finitely presented abelian group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AbelianInvariants {
    pub free_rank: usize,
    /// Torsion coefficients > 1, in divisibility order.
    pub torsion: Vec<Int>,
}

fn cokernel_invariants(generators: usize, relations: &IntMatrix) -> AbelianInvariants {
    assert_eq!(relations.rows(), generators);
    let snf = smith_normal_form(relations);
    let mut torsion = Vec::new();
    let mut nonzero = 0usize;
    for d in snf.diagonal() {
        if d.is_zero() {
            continue;
        }
        nonzero += 1;
        if !d.is_one() {
            torsion.push(d);
        }
    }
    AbelianInvariants { free_rank: generators - nonzero, torsion }
}

/// Rewrites a list of torsion coefficients as invariant factors (each
/// dividing the next), so differently assembled results compare equal.
fn canonical_torsion(coeffs: Vec<Int>) -> Vec<Int> {
    if coeffs.len() <= 1 {
        return coeffs;
    }
    let diag = IntMatrix::diagonal(coeffs);
    let snf = smith_normal_form(&diag);
    snf.diagonal().into_iter().filter(|d| !d.is_one()).collect()
}

/// Composition (balanced tensor) of a contravariant module `x` and a
/// covariant module `y`, computed as one global coequalizer: generators
/// are the pairwise tensors over each object, relations identify the two
/// ways every basis morphism can act.
pub fn eimodule_compose(cat: &EICategory, x: &EIModule, y: &EIModule) -> AbelianInvariants {
    // Offsets into the generator list: object c contributes
    // abelian_rank(x, c) * abelian_rank(y, c) pairwise tensors.
    let mut offsets = Vec::with_capacity(cat.objects() + 1);
    let mut total = 0usize;
    for c in 0..cat.objects() {
        offsets.push(total);
        total += x.abelian_rank(cat, c) * y.abelian_rank(cat, c);
    }
    offsets.push(total);
    let pair_index = |c: usize, xi: usize, yi: usize| {
        offsets[c] + xi * y.abelian_rank(cat, c) + yi
    };

    let mut relation_cols: Vec<Vec<Int>> = Vec::new();
    for f in cat.morphisms() {
        let (a, b) = (f.src, f.dst);
        for i in 0..x.ranks[b] {
            for gx in 0..cat.aut_order(b) {
                for j in 0..y.ranks[a] {
                    for gy in 0..cat.aut_order(a) {
                        let mut col = vec![Int::zero(); total];
                        // Contravariant action of f on x lands at the source.
                        if a == b {
                            // x . f at object a: exponent gx + f.g.
                            let xi = x.basis_index(cat, a, i, (gx + f.g) % cat.aut_order(a));
                            let yi = y.basis_index(cat, a, j, gy);
                            col[pair_index(a, xi, yi)] += Int::one();
                        }
                        // Covariant action of f on y lands at the target.
                        if a == b {
                            let xi = x.basis_index(cat, b, i, gx);
                            let yi = y.basis_index(cat, b, j, (f.g + gy) % cat.aut_order(b));
                            col[pair_index(b, xi, yi)] -= Int::one();
                        }
                        // Non-invertible f: both actions are zero, so the
                        // relation vanishes identically and the column stays
                        // zero; it is kept to exercise the generic route.
                        relation_cols.push(col);
                    }
                }
            }
        }
    }
    let relations = if relation_cols.is_empty() {
        IntMatrix::zeros(total, 0)
    } else {
        let cols = relation_cols.len();
        let mut m = IntMatrix::zeros(total, cols);
        for (j, col) in relation_cols.iter().enumerate() {
            for (i, v) in col.iter().enumerate() {
                if !v.is_zero() {
                    m[(i, j)] = v.clone();
                }
            }
        }
        m
    };
    cokernel_invariants(total, &relations)
}

/// The same composition computed objectwise: modules supported on
/// automorphisms tensor object by object over each group ring, and the
/// results add up. Both routes must agree.
pub fn eimodule_compose_pointwise(
    cat: &EICategory,
    x: &EIModule,
    y: &EIModule,
) -> AbelianInvariants {
    let mut free_rank = 0usize;
    let mut torsion: Vec<Int> = Vec::new();
    for c in 0..cat.objects() {
        let n = cat.aut_order(c);
        let gens = x.abelian_rank(cat, c) * y.abelian_rank(cat, c);
        let pair = |xi: usize, yi: usize| xi * y.abelian_rank(cat, c) + yi;
        let mut cols: Vec<Vec<Int>> = Vec::new();
        for h in 0..n {
            for i in 0..x.ranks[c] {
                for gx in 0..n {
                    for j in 0..y.ranks[c] {
                        for gy in 0..n {
                            let mut col = vec![Int::zero(); gens];
                            let xi = x.basis_index(cat, c, i, (gx + h) % n);
                            let yi = y.basis_index(cat, c, j, gy);
                            col[pair(xi, yi)] += Int::one();
                            let xi = x.basis_index(cat, c, i, gx);
                            let yi = y.basis_index(cat, c, j, (h + gy) % n);
                            col[pair(xi, yi)] -= Int::one();
                            cols.push(col);
                        }
                    }
                }
            }
        }
        let relations = if cols.is_empty() {
            IntMatrix::zeros(gens, 0)
        } else {
            let mut m = IntMatrix::zeros(gens, cols.len());
            for (j, col) in cols.iter().enumerate() {
                for (i, v) in col.iter().enumerate() {
                    if !v.is_zero() {
                        m[(i, j)] = v.clone();
                    }
                }
            }
            m
        };
        let inv = cokernel_invariants(gens, &relations);
        free_rank += inv.free_rank;
        torsion.extend(inv.torsion);
    }
    AbelianInvariants { free_rank, torsion: canonical_torsion(torsion) }
}

/// A bimodule over an EI-category, presented by its abelian-group basis at
/// each ordered pair of objects together with the two morphism actions on
/// basis elements (as signed basis images; here all actions are basis
/// permutations so a single index suffices).
pub trait EIBimodule {
    fn cat(&self) -> &EICategory;
    /// Basis size of the value at (source a, target b).
    fn basis_size(&self, a: usize, b: usize) -> usize;
    /// Action on the source slot: for f: a' -> a, maps the value at (a, b)
    /// to the value at (a', b).
    fn act_source(&self, f: &Morphism, b: usize, idx: usize) -> usize;
    /// Action on the target slot: for f: b -> b', maps the value at (a, b)
    /// to the value at (a, b').
    fn act_target(&self, f: &Morphism, a: usize, idx: usize) -> usize;
}

/// The hom-bimodule of the category itself: the value at (a, b) is the
/// free abelian group on Hom(a, b), with precomposition and composition
/// as the two actions.
pub struct HomBimodule<'a> {
    pub cat: &'a EICategory,
}

impl<'a> HomBimodule<'a> {
    fn hom_list(&self, a: usize, b: usize) -> Vec<Morphism> {
        (0..self.cat.hom_size(a, b))
            .map(|g| Morphism { src: a, dst: b, g })
            .collect()
    }

    fn hom_index(&self, m: &Morphism) -> usize {
        m.g
    }
}

impl<'a> EIBimodule for HomBimodule<'a> {
    fn cat(&self) -> &EICategory {
        self.cat
    }

    fn basis_size(&self, a: usize, b: usize) -> usize {
        self.cat.hom_size(a, b)
    }

    fn act_source(&self, f: &Morphism, b: usize, idx: usize) -> usize {
        // Precompose: h in Hom(f.dst, b) goes to h . f in Hom(f.src, b).
        let h = self.hom_list(f.dst, b)[idx];
        self.hom_index(&self.cat.compose(&h, f))
    }

    fn act_target(&self, f: &Morphism, a: usize, idx: usize) -> usize {
        // Postcompose: h in Hom(a, f.src) goes to f . h in Hom(a, f.dst).
        let h = self.hom_list(a, f.src)[idx];
        self.hom_index(&self.cat.compose(f, &h))
    }
}

/// One-object bimodule over a cyclic group of order n: basis indexed by
/// group exponents, target action by left addition, source action through
/// an endomorphism (multiplication by `twist`).
pub struct TwistedCyclicBimodule {
    pub cat: EICategory,
    pub twist: usize,
}

impl TwistedCyclicBimodule {
    pub fn new(order: usize, twist: usize) -> Result<Self> {
        let cat = EICategory::new(vec![order], BTreeSet::new())?;
        Ok(TwistedCyclicBimodule { cat, twist })
    }
}

impl EIBimodule for TwistedCyclicBimodule {
    fn cat(&self) -> &EICategory {
        &self.cat
    }

    fn basis_size(&self, _a: usize, _b: usize) -> usize {
        self.cat.aut_order(0)
    }

    fn act_source(&self, f: &Morphism, _b: usize, idx: usize) -> usize {
        let n = self.cat.aut_order(0);
        (idx + self.twist * f.g) % n
    }

    fn act_target(&self, f: &Morphism, _a: usize, idx: usize) -> usize {
        let n = self.cat.aut_order(0);
        (f.g + idx) % n
    }
}

/// Shadow of a bimodule: the coequalizer identifying the two ways a
/// morphism can act on diagonal values. Generators are the bases of the
/// diagonal values; for every basis morphism f: a -> b and every basis
/// element of the value at (b, a), the source action (landing at (a, a))
/// is identified with the target action (landing at (b, b)).
pub fn eimodule_shadow(bimodule: &dyn EIBimodule) -> AbelianInvariants {
    let cat = bimodule.cat();
    let mut offsets = Vec::with_capacity(cat.objects() + 1);
    let mut total = 0usize;
    for c in 0..cat.objects() {
        offsets.push(total);
        total += bimodule.basis_size(c, c);
    }
    offsets.push(total);

    let mut cols: Vec<Vec<Int>> = Vec::new();
    for f in cat.morphisms() {
        let (a, b) = (f.src, f.dst);
        for idx in 0..bimodule.basis_size(b, a) {
            let mut col = vec![Int::zero(); total];
            let src_img = bimodule.act_source(&f, a, idx);
            col[offsets[a] + src_img] += Int::one();
            let dst_img = bimodule.act_target(&f, b, idx);
            col[offsets[b] + dst_img] -= Int::one();
            cols.push(col);
        }
    }
    let relations = if cols.is_empty() {
        IntMatrix::zeros(total, 0)
    } else {
        let mut m = IntMatrix::zeros(total, cols.len());
        for (j, col) in cols.iter().enumerate() {
            for (i, v) in col.iter().enumerate() {
                if !v.is_zero() {
                    m[(i, j)] = v.clone();
                }
            }
        }
        m
    };
    cokernel_invariants(total, &relations)
}

/// Duality data for a free module: per object, coevaluation and evaluation
/// matrices over the object's group ring.
#[derive(Debug, Clone)]
pub struct DualData {
    /// (coevaluation, evaluation) per object; both are square of size
    /// ranks[c] over Z[Aut(c)].
    pub pairing: Vec<(GrMatrix, GrMatrix)>,
}

/// Canonical duality data for a free module: identity coevaluation and
/// evaluation in the standard bases.
pub fn build_dual(cat: &EICategory, module: &EIModule) -> DualData {
    let mut pairing = Vec::with_capacity(cat.objects());
    for c in 0..cat.objects() {
        let ring = GroupRing::new(vec![Int::from(cat.aut_order(c))]);
        let r = module.ranks[c];
        pairing.push((GrMatrix::identity(r, &ring), GrMatrix::identity(r, &ring)));
    }
    DualData { pairing }
}

/// Checks the two triangle identities for the claimed duality data: the
/// composites (evaluation after coevaluation) in both orders must be
/// identity matrices over each group ring. Returns the objects at which
/// verification fails.
pub fn verify_snake(cat: &EICategory, module: &EIModule, dual: &DualData) -> Vec<usize> {
    let mut failures = Vec::new();
    if dual.pairing.len() != cat.objects() {
        return (0..cat.objects()).collect();
    }
    for c in 0..cat.objects() {
        let ring = GroupRing::new(vec![Int::from(cat.aut_order(c))]);
        let r = module.ranks[c];
        let (coev, ev) = &dual.pairing[c];
        if coev.rows() != r || coev.cols() != r || ev.rows() != r || ev.cols() != r {
            failures.push(c);
            continue;
        }
        let id = GrMatrix::identity(r, &ring);
        let first = coev.mul(ev, &ring);
        let second = ev.mul(coev, &ring);
        if first != id || second != id {
            failures.push(c);
        }
    }
    failures
}

/// Corrupts duality data at one object by adding a nontrivial group
/// element to an entry of the evaluation matrix. Used to check that
/// verification actually fails on wrong data.
pub fn corrupt_dual(dual: &mut DualData, object: usize) {
    let (_, ev) = &mut dual.pairing[object];
    if ev.rows() == 0 {
        return;
    }
    let cur = ev.get(0, 0);
    ev.set(0, 0, cur.add(&GroupRingElem::of(vec![Int::one()])));
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fundamental_group::twisted_conjugacy_classes;
    use crate::int;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn chain_category(orders: &[usize]) -> EICategory {
        let mut related = BTreeSet::new();
        for a in 0..orders.len() {
            for b in (a + 1)..orders.len() {
                related.insert((a, b));
            }
        }
        EICategory::new(orders.to_vec(), related).unwrap()
    }

    #[test]
    fn category_validation() {
        assert!(EICategory::new(vec![2, 0], BTreeSet::new()).is_err());
        assert!(EICategory::new(vec![2, 3], BTreeSet::from([(1, 0)])).is_err());
        // (0,1) and (1,2) without (0,2) is not closed.
        assert!(EICategory::new(vec![1, 1, 1], BTreeSet::from([(0, 1), (1, 2)])).is_err());
        assert!(
            EICategory::new(vec![1, 1, 1], BTreeSet::from([(0, 1), (1, 2), (0, 2)])).is_ok()
        );
    }

    #[test]
    fn composition_is_associative_and_unital() {
        let cat = chain_category(&[2, 3, 4]);
        let morphisms = cat.morphisms();
        for f in &morphisms {
            let id_src = cat.identity(f.src);
            let id_dst = cat.identity(f.dst);
            assert_eq!(cat.compose(f, &id_src), *f);
            assert_eq!(cat.compose(&id_dst, f), *f);
        }
        for f in &morphisms {
            for g in &morphisms {
                if g.src != f.dst {
                    continue;
                }
                for h in &morphisms {
                    if h.src != g.dst {
                        continue;
                    }
                    let left = cat.compose(&cat.compose(h, g), f);
                    let right = cat.compose(h, &cat.compose(g, f));
                    assert_eq!(left, right);
                }
            }
        }
    }

    #[test]
    fn compose_routes_agree_on_small_cases() {
        let cat = chain_category(&[2, 3]);
        let x = EIModule::new(vec![1, 2]);
        let y = EIModule::new(vec![2, 1]);
        let a = eimodule_compose(&cat, &x, &y);
        let b = eimodule_compose_pointwise(&cat, &x, &y);
        assert_eq!(a, b);
        // Objectwise: rank(X(c) tensor Y(c) over Z[G_c]) as an abelian
        // group is rank_X * rank_Y * |G_c|: 1*2*2 + 2*1*3 = 10 free.
        assert_eq!(a.free_rank, 10);
        assert!(a.torsion.is_empty());
    }

    #[test]
    fn compose_routes_agree_randomly() {
        let mut rng = StdRng::seed_from_u64(0x5eed_0040);
        for _ in 0..25 {
            let n_obj = rng.gen_range(1..4);
            let orders: Vec<usize> = (0..n_obj).map(|_| rng.gen_range(1..4)).collect();
            let mut related = BTreeSet::new();
            for a in 0..n_obj {
                for b in (a + 1)..n_obj {
                    if rng.gen_bool(0.5) {
                        related.insert((a, b));
                    }
                }
            }
            // Transitive closure.
            loop {
                let mut added = false;
                let pairs: Vec<_> = related.iter().cloned().collect();
                for &(a, b) in &pairs {
                    for &(c, d) in &pairs {
                        if b == c && related.insert((a, d)) {
                            added = true;
                        }
                    }
                }
                if !added {
                    break;
                }
            }
            let cat = EICategory::new(orders, related).unwrap();
            let x = EIModule::new((0..n_obj).map(|_| rng.gen_range(0..3)).collect());
            let y = EIModule::new((0..n_obj).map(|_| rng.gen_range(0..3)).collect());
            assert_eq!(
                eimodule_compose(&cat, &x, &y),
                eimodule_compose_pointwise(&cat, &x, &y)
            );
        }
    }

    #[test]
    fn shadow_of_cyclic_group_hom_bimodule() {
        // For a one-object category with cyclic (abelian) automorphisms,
        // conjugation is trivial, so the shadow of the hom-bimodule is free
        // on the group elements themselves.
        let cat = EICategory::new(vec![3], BTreeSet::new()).unwrap();
        let shadow = eimodule_shadow(&HomBimodule { cat: &cat });
        assert_eq!(shadow.free_rank, 3);
        assert!(shadow.torsion.is_empty());
    }

    #[test]
    fn shadow_with_noninvertible_arrows() {
        // Two objects with trivial groups and one arrow: shadow generators
        // id_0, id_1 get identified through the arrow (t . id_0 = id_1 . t
        // as diagonal actions of t on Hom(1, 0)... Hom(1, 0) is empty here,
        // while Hom(0, 1) = {t} contributes no diagonal relation since its
        // value sits off-diagonal. Relations only come from endomorphisms,
        // which are identities, so the shadow is free of rank 2.
        let cat = chain_category(&[1, 1]);
        let shadow = eimodule_shadow(&HomBimodule { cat: &cat });
        assert_eq!(shadow.free_rank, 2);
        assert!(shadow.torsion.is_empty());
    }

    #[test]
    fn twisted_shadow_matches_class_count() {
        // The shadow of the twisted bimodule over Z/n is free on the
        // twisted-conjugacy classes; compare against the lattice-based
        // class count for the same data.
        let mut rng = StdRng::seed_from_u64(0x5eed_0041);
        for _ in 0..30 {
            let n = rng.gen_range(1..8usize);
            let t = rng.gen_range(0..n.max(1));
            let bimodule = TwistedCyclicBimodule::new(n, t).unwrap();
            let shadow = eimodule_shadow(&bimodule);
            assert!(shadow.torsion.is_empty());
            let classes = twisted_conjugacy_classes(
                &[Int::from(n)],
                &IntMatrix::from_rows(vec![vec![int(t as i64)]]),
            );
            assert_eq!(
                Some(Int::from(shadow.free_rank)),
                classes.count(),
                "n={n} t={t}"
            );
        }
    }

    #[test]
    fn snake_accepts_canonical_and_rejects_corrupted() {
        let cat = chain_category(&[2, 3]);
        let module = EIModule::new(vec![2, 1]);
        let dual = build_dual(&cat, &module);
        assert!(verify_snake(&cat, &module, &dual).is_empty());

        let mut bad = dual.clone();
        corrupt_dual(&mut bad, 1);
        assert_eq!(verify_snake(&cat, &module, &bad), vec![1]);
    }

    #[test]
    fn snake_rejects_wrong_shapes() {
        let cat = chain_category(&[2]);
        let module = EIModule::new(vec![2]);
        let other = EIModule::new(vec![3]);
        let dual = build_dual(&cat, &other);
        assert_eq!(verify_snake(&cat, &module, &dual), vec![0]);
    }
}
