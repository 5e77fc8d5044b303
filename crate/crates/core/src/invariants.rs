//! Headline invariants of a relative self-map and their cross-checks.
//!
//! The analysis runs per connected component. For every map-invariant
//! A-component the lifted chain map is traced over the component's
//! fundamental group; for every invariant B-component the same happens on
//! the relative complex and, on the simplicial tier, on the full complex.
//! The full-complex trace must equal the image of the A-part plus the
//! relative part, which ties the three computations together and yields
//! the Nielsen counts. A verdict records whether the zero-trace
//! removability criterion applies to the input.
//!
//! Every identity the theory promises is checked while computing; a
//! failure aborts with an internal error rather than producing a report
//! built on inconsistent data.

use std::collections::{BTreeMap, BTreeSet};

use crate::complexes::{
    CellularPairData, ChainScope, PairData, RationalComplex, SimplicialPair, VertexSelfMap,
};
use crate::covers::{
    fox_chain_map, lift_chain_complex, lift_chain_map, transport_hom, CwSide,
    EquivariantChainMap, LiftedComplex,
};
use crate::error::Result;
use crate::fundamental_group::{
    pushforward_classes, twisted_conjugacy_classes, AbelianStructure, EdgePathData, GroupHom,
    Presentation, ShadowClassSet, TreeSpec, Word,
};
use crate::shadow_algebra::TraceVector;
use crate::{int, CoreError, Int, Rat, RatMatrix, Severity};
use num_traits::{One, Zero};

/// Hypotheses supplied by the user that the combinatorial data cannot
/// certify, plus optional dimension declarations that override the
/// dimensions of the given complexes (a cell model may present a manifold
/// in lower dimension than the manifold itself).
#[derive(Debug, Clone, Default)]
pub struct Assertions {
    pub closed_smooth_manifold_a: bool,
    pub closed_smooth_manifold_b: bool,
    pub declared_dim_a: Option<usize>,
    pub declared_dim_b: Option<usize>,
}

/// Knobs for the analysis.
#[derive(Debug, Clone, Default)]
pub struct Options {
    /// Spanning-tree choice for the simplicial tier.
    pub tree: TreeSpec,
    /// Skip the redundant homology-level and rational cross-checks. The
    /// structural identities (augmentation, trace splitting) always run.
    pub no_crosscheck: bool,
    /// Radius for the experimental word-ball conjugacy search.
    pub bounded_conjugacy: Option<u32>,
}

/// Shape of a twisted-conjugacy class set: the group it lives over, the
/// invariant factors of the class group, and the classes themselves when
/// there are few enough to list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShadowDescriptor {
    /// Invariant factors of the abelianized fundamental group (0 = free).
    pub group_moduli: Vec<Int>,
    pub class_free_rank: usize,
    pub class_torsion: Vec<Int>,
    /// Number of classes when finite.
    pub class_count: Option<Int>,
    /// Canonical representatives as words, when finite and small.
    pub classes: Option<Vec<String>>,
    /// False when the class data lives on the abelianization of a group
    /// that was not recognized as abelian or free of rank one, so the
    /// classes may be coarser than the true twisted-conjugacy classes.
    pub exact: bool,
}

/// The trace of one component in its class set.
#[derive(Debug, Clone)]
pub struct TracePart {
    pub component: String,
    pub shadow: ShadowDescriptor,
    /// Formatted representative and coefficient per nonzero class.
    pub terms: Vec<(String, Int)>,
    pub trace: TraceVector,
    pub essential: usize,
}

/// Chain-level Lefschetz numbers per invariant component: the A-components
/// carry the restriction of the map, the B-components the induced map on
/// the relative complex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelativeLefschetz {
    pub a_components: Vec<(String, Int)>,
    pub b_components: Vec<(String, Int)>,
}

/// The relative trace: an A-part per invariant A-component and a relative
/// B-part per invariant B-component.
#[derive(Debug, Clone)]
pub struct RelativeTrace {
    pub a_parts: Vec<TracePart>,
    pub b_parts: Vec<TracePart>,
    /// True when any involved class set is only abelianized.
    pub abelianized: bool,
}

/// The Nielsen count and the three quantities it is assembled from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NielsenNumbers {
    /// Essential classes of the restriction to A.
    pub on_a: usize,
    /// Essential classes of the map on all of B.
    pub absolute: usize,
    /// Essential classes of the map on B that contain the image of an
    /// essential class of the restriction.
    pub shared: usize,
    /// on_a + absolute - shared.
    pub relative: usize,
}

/// What the removability check decided.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Conclusion {
    Deformable,
    NotDeformable,
    TraceZeroButHypothesesUnverified,
    InconclusiveAbelianized,
}

impl Conclusion {
    pub fn as_str(self) -> &'static str {
        match self {
            Conclusion::Deformable => "deformable",
            Conclusion::NotDeformable => "not-deformable",
            Conclusion::TraceZeroButHypothesesUnverified => {
                "trace-zero-but-hypotheses-unverified"
            }
            Conclusion::InconclusiveAbelianized => "inconclusive-abelianized",
        }
    }
}

/// The dimension and manifold hypotheses of the removability theorem, as
/// far as they could be read off or were asserted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HypothesisRecord {
    /// Effective dimension of A (declared value if given); None when A is
    /// empty.
    pub dim_a: Option<usize>,
    /// Effective dimension of B (declared value if given).
    pub dim_b: usize,
    /// True when any dimension was declared rather than measured.
    pub dims_declared: bool,
    /// dim A >= 3 and dim B - dim A >= 2; with empty A, dim B >= 3.
    pub dimensions_ok: bool,
    pub manifold_a_asserted: bool,
    pub manifold_b_asserted: bool,
    pub all_met: bool,
}

#[derive(Debug, Clone)]
pub struct DeformabilityVerdict {
    /// Whether the whole relative trace (all A-parts and B-parts) is zero.
    pub trace_zero: bool,
    /// Whether every involved class set is exact.
    pub shadow_exact: bool,
    pub hypotheses: HypothesisRecord,
    pub conclusion: Conclusion,
    pub explanation: String,
}

/// Which internal identities were verified while computing, and which
/// optional ones the caller turned off.
#[derive(Debug, Clone, Default)]
pub struct ConsistencyReport {
    pub passed: Vec<String>,
    pub skipped: Vec<String>,
}

impl ConsistencyReport {
    fn pass(&mut self, name: String) {
        self.passed.push(name);
    }
}

/// Result of the experimental bounded conjugacy search on one component.
#[derive(Debug, Clone)]
pub struct BoundedConjugacyReport {
    pub component: String,
    pub radius: u32,
    /// Reduced words of length at most `radius` in the free generators.
    pub ball_size: usize,
    /// Orbits of twisted conjugation by ball elements, restricted to the
    /// ball. For a free group this bounds the class count among the
    /// enumerated words from above.
    pub orbits: usize,
    /// Distinct abelianized classes among the same words: a lower bound.
    pub abelianized_classes: usize,
    pub note: String,
}

/// Component labels with their invariance flags.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentSummary {
    pub a: Vec<(String, bool)>,
    pub b: Vec<(String, bool)>,
}

/// Everything the analysis produced.
#[derive(Debug, Clone)]
pub struct PairAnalysis {
    pub tier: String,
    pub components: ComponentSummary,
    pub lefschetz: RelativeLefschetz,
    pub trace: RelativeTrace,
    /// Traces of the map on the full (non-relative) complex per invariant
    /// B-component; these feed the absolute Nielsen count.
    pub absolute_parts: Vec<TracePart>,
    pub nielsen: NielsenNumbers,
    pub verdict: DeformabilityVerdict,
    pub consistency: ConsistencyReport,
    pub bounded_conjugacy: Vec<BoundedConjugacyReport>,
    pub warnings: Vec<String>,
}

/// Formats a group element given in canonical coordinates as a word in the
/// presentation's generators.
pub fn format_element(ab: &AbelianStructure, names: &[String], elem: &[Int]) -> String {
    let letters = ab.element_word(elem);
    if letters.is_empty() {
        return "1".to_string();
    }
    letters
        .iter()
        .map(|(g, e)| {
            if e.is_one() {
                names[*g].clone()
            } else {
                format!("{}^{}", names[*g], e)
            }
        })
        .collect::<Vec<_>>()
        .join("*")
}

fn format_trace(ab: &AbelianStructure, names: &[String], tv: &TraceVector) -> Vec<(String, Int)> {
    tv.terms
        .iter()
        .map(|(k, v)| (format_element(ab, names, k), v.clone()))
        .collect()
}

const CLASS_LIST_CAP: usize = 64;

/// Builds the printable description of a class set.
pub fn describe_shadow(
    ab: &AbelianStructure,
    names: &[String],
    sh: &ShadowClassSet,
    exact: bool,
) -> ShadowDescriptor {
    let class_count = sh.count();
    let small = matches!(&class_count, Some(n) if *n <= int(CLASS_LIST_CAP as i64));
    let classes = if small {
        sh.enumerate()
            .map(|reps| reps.iter().map(|r| format_element(ab, names, r)).collect())
    } else {
        None
    };
    ShadowDescriptor {
        group_moduli: ab.moduli.clone(),
        class_free_rank: sh.class_free_rank,
        class_torsion: sh.class_torsion.clone(),
        class_count,
        classes,
        exact,
    }
}

/// Working data of one traced side (an A-component, or the relative or
/// full complex of a B-component).
struct SideWork {
    ab: AbelianStructure,
    names: Vec<String>,
    pres: Presentation,
    hom: GroupHom,
    exact: bool,
    sh: ShadowClassSet,
    trace: TraceVector,
    lefschetz: Int,
}

impl SideWork {
    fn part(&self, label: &str) -> TracePart {
        TracePart {
            component: label.to_string(),
            shadow: describe_shadow(&self.ab, &self.names, &self.sh, self.exact),
            terms: format_trace(&self.ab, &self.names, &self.trace),
            trace: self.trace.clone(),
            essential: self.trace.essential_count(),
        }
    }
}

fn side_from_lift(
    lifted: &LiftedComplex,
    hom: GroupHom,
    cmap: &EquivariantChainMap,
) -> Result<SideWork> {
    let sh = twisted_conjugacy_classes(&lifted.ab.moduli, &cmap.twist);
    let trace = cmap.alternating_trace(&sh)?;
    let lefschetz = cmap.alternating_augmented_trace();
    Ok(SideWork {
        ab: lifted.ab.clone(),
        names: lifted.edge_data.presentation.generators.clone(),
        pres: lifted.edge_data.presentation.clone(),
        hom,
        exact: lifted.edge_data.presentation.shadow_exact(),
        sh,
        trace,
        lefschetz,
    })
}

fn side_from_cw(side: &CwSide) -> Result<SideWork> {
    let sh = twisted_conjugacy_classes(&side.ab.moduli, &side.map.twist);
    let trace = side.map.alternating_trace(&sh)?;
    let lefschetz = side.map.alternating_augmented_trace();
    Ok(SideWork {
        ab: side.ab.clone(),
        names: side.presentation.generators.clone(),
        pres: side.presentation.clone(),
        hom: side.hom.clone(),
        exact: side.presentation.shadow_exact(),
        sh,
        trace,
        lefschetz,
    })
}

struct AItem {
    label: String,
    invariant: bool,
    /// Index of the B-component containing this A-component.
    in_b: usize,
    work: Option<SideWork>,
    edge: Option<EdgePathData>,
    /// Images in the B-class set of the essential classes of the A-part.
    pushed_essential: BTreeSet<Vec<Int>>,
}

struct BItem {
    label: String,
    invariant: bool,
    rel: Option<SideWork>,
    abs_trace: Option<TraceVector>,
}

fn check_augmentation(
    report: &mut ConsistencyReport,
    what: &str,
    trace: &TraceVector,
    lefschetz: &Int,
) -> Result<()> {
    let aug = trace.augmentation();
    if &aug != lefschetz {
        return Err(CoreError::internal(format!(
            "trace augmentation on the {what} is {aug} but the chain Lefschetz number is {lefschetz}"
        )));
    }
    report.pass(format!("trace augmentation equals Lefschetz number ({what})"));
    Ok(())
}

fn check_chain_vs_homology(
    report: &mut ConsistencyReport,
    what: &str,
    complex: &RationalComplex,
    maps: &[RatMatrix],
    lefschetz: &Int,
) -> Result<()> {
    let chain = complex.lefschetz_chain(maps);
    let homology = complex.lefschetz_homology(maps);
    if chain != homology {
        return Err(CoreError::internal(format!(
            "chain-level trace {chain} and homology-level trace {homology} disagree on the {what}"
        )));
    }
    if chain != Rat::from_integer(lefschetz.clone()) {
        return Err(CoreError::internal(format!(
            "rational trace {chain} disagrees with the equivariant Lefschetz number {lefschetz} on the {what}"
        )));
    }
    report.pass(format!("chain trace equals homology trace ({what})"));
    Ok(())
}

fn check_augmentation_matches_rational(
    report: &mut ConsistencyReport,
    what: &str,
    pair: &SimplicialPair,
    map: &VertexSelfMap,
    scope: ChainScope,
    vertices: &BTreeSet<usize>,
    lifted: &LiftedComplex,
    cmap: &EquivariantChainMap,
) -> Result<()> {
    let rational = pair.rational_complex(scope, Some(vertices));
    if rational.boundaries != lifted.complex.augmented_rational().boundaries {
        return Err(CoreError::internal(format!(
            "augmented lifted boundaries disagree with the rational complex on the {what}"
        )));
    }
    if pair.rational_chain_map(&rational, map) != cmap.augmented_rational() {
        return Err(CoreError::internal(format!(
            "augmented lifted chain map disagrees with the rational chain map on the {what}"
        )));
    }
    report.pass(format!("augmented lift matches rational chain data ({what})"));
    Ok(())
}

/// Pushes the trace and the essential classes of an A-part into the
/// B-class set along a coordinate map of abelianizations.
fn push_a_part(
    matrix: &crate::IntMatrix,
    a_work: &SideWork,
    target: &ShadowClassSet,
) -> Result<(TraceVector, BTreeSet<Vec<Int>>)> {
    let class_map = pushforward_classes(matrix, &a_work.sh, target)
        .map_err(|e| CoreError::internal(format!("inclusion-induced class map is invalid: {e}")))?;
    let pushed = a_work.trace.map_classes(|c| class_map.apply(c));
    let mut essential = BTreeSet::new();
    for (key, coeff) in &a_work.trace.terms {
        if !coeff.is_zero() {
            essential.insert(class_map.apply(key));
        }
    }
    Ok((pushed, essential))
}

/// Runs the analysis on either tier.
pub fn analyze(
    input: &PairData,
    assertions: &Assertions,
    options: &Options,
) -> Result<PairAnalysis> {
    match input {
        PairData::Simplicial { pair, map } => analyze_simplicial(pair, map, assertions, options),
        PairData::Cellular(data) => analyze_cw(data, assertions, options),
    }
}

pub fn analyze_simplicial(
    pair: &SimplicialPair,
    map: &VertexSelfMap,
    assertions: &Assertions,
    options: &Options,
) -> Result<PairAnalysis> {
    let diags = pair.validate(map);
    if diags.iter().any(|d| d.severity == Severity::Error) {
        return Err(CoreError::InvalidInput(diags));
    }
    let mut warnings: Vec<String> = diags.into_iter().map(|d| d.message).collect();
    let comps = pair.components(map);
    let mut report = ConsistencyReport::default();
    if options.no_crosscheck {
        report
            .skipped
            .push("homology-level and rational cross-checks (disabled by caller)".to_string());
    }

    let mut a_items: Vec<AItem> = Vec::new();
    for (i, comp) in comps.a_comps.iter().enumerate() {
        let label = comp.label.clone();
        if !comp.invariant {
            warnings.push(format!(
                "component {label} is not mapped into itself; it carries no fixed point classes and is excluded from the invariants"
            ));
            a_items.push(AItem {
                label,
                invariant: false,
                in_b: comps.a_in_b[i],
                work: None,
                edge: None,
                pushed_essential: BTreeSet::new(),
            });
            continue;
        }
        let what = format!("A side of {label}");
        let lifted = lift_chain_complex(pair, &comp.vertices, ChainScope::A, &options.tree)?;
        let (hom, cmap) = lift_chain_map(pair, map, &lifted)?;
        let work = side_from_lift(&lifted, hom, &cmap)?;
        check_augmentation(&mut report, &what, &work.trace, &work.lefschetz)?;
        if !options.no_crosscheck {
            check_chain_vs_homology(
                &mut report,
                &what,
                &lifted.complex.augmented_rational(),
                &cmap.augmented_rational(),
                &work.lefschetz,
            )?;
            check_augmentation_matches_rational(
                &mut report,
                &what,
                pair,
                map,
                ChainScope::A,
                &comp.vertices,
                &lifted,
                &cmap,
            )?;
        }
        a_items.push(AItem {
            label,
            invariant: true,
            in_b: comps.a_in_b[i],
            work: Some(work),
            edge: Some(lifted.edge_data),
            pushed_essential: BTreeSet::new(),
        });
    }

    let mut b_items: Vec<BItem> = Vec::new();
    for (bi, comp) in comps.b_comps.iter().enumerate() {
        let label = comp.label.clone();
        if !comp.invariant {
            warnings.push(format!(
                "component {label} is not mapped into itself; it carries no fixed point classes and is excluded from the invariants"
            ));
            b_items.push(BItem { label, invariant: false, rel: None, abs_trace: None });
            continue;
        }
        let lifted_rel =
            lift_chain_complex(pair, &comp.vertices, ChainScope::Relative, &options.tree)?;
        let (_, cmap_rel) = lift_chain_map(pair, map, &lifted_rel)?;
        let lifted_abs = lift_chain_complex(pair, &comp.vertices, ChainScope::B, &options.tree)?;
        let (hom_abs, cmap_abs) = lift_chain_map(pair, map, &lifted_abs)?;
        if cmap_rel.twist != cmap_abs.twist {
            return Err(CoreError::internal(format!(
                "relative and full lifts of {label} disagree on the coefficient twist"
            )));
        }
        let rel_work = side_from_lift(&lifted_rel, hom_abs.clone(), &cmap_rel)?;
        let abs_trace = cmap_abs.alternating_trace(&rel_work.sh)?;
        let abs_lefschetz = cmap_abs.alternating_augmented_trace();
        check_augmentation(
            &mut report,
            &format!("relative part of {label}"),
            &rel_work.trace,
            &rel_work.lefschetz,
        )?;
        check_augmentation(
            &mut report,
            &format!("full complex of {label}"),
            &abs_trace,
            &abs_lefschetz,
        )?;
        if !options.no_crosscheck {
            check_chain_vs_homology(
                &mut report,
                &format!("relative part of {label}"),
                &lifted_rel.complex.augmented_rational(),
                &cmap_rel.augmented_rational(),
                &rel_work.lefschetz,
            )?;
            check_chain_vs_homology(
                &mut report,
                &format!("full complex of {label}"),
                &lifted_abs.complex.augmented_rational(),
                &cmap_abs.augmented_rational(),
                &abs_lefschetz,
            )?;
            check_augmentation_matches_rational(
                &mut report,
                &format!("relative part of {label}"),
                pair,
                map,
                ChainScope::Relative,
                &comp.vertices,
                &lifted_rel,
                &cmap_rel,
            )?;
            check_augmentation_matches_rational(
                &mut report,
                &format!("full complex of {label}"),
                pair,
                map,
                ChainScope::B,
                &comp.vertices,
                &lifted_abs,
                &cmap_abs,
            )?;
        }

        // The full-complex trace must split as the image of the A-parts
        // plus the relative part.
        let mut sum = rel_work.trace.clone();
        for item in a_items.iter_mut() {
            if item.in_b != bi || !item.invariant {
                continue;
            }
            let a_work = item.work.as_ref().expect("invariant item has work");
            let a_edge = item.edge.as_ref().expect("invariant item has edge data");
            let iota = transport_hom(&lifted_abs.edge_data, a_edge);
            let n_b = lifted_abs.edge_data.presentation.generators.len();
            let matrix = a_work.ab.induced_map(&lifted_abs.ab, &iota.exponent_matrix(n_b));
            let (pushed, essential) = push_a_part(&matrix, a_work, &rel_work.sh)?;
            sum = sum.add(&pushed);
            item.pushed_essential = essential;
        }
        if sum != abs_trace {
            return Err(CoreError::internal(format!(
                "trace on the full complex of {label} does not equal the image of the A-part plus the relative part"
            )));
        }
        report.pass(format!(
            "full-complex trace splits as A-image plus relative part ({label})"
        ));
        b_items.push(BItem {
            label,
            invariant: true,
            rel: Some(rel_work),
            abs_trace: Some(abs_trace),
        });
    }

    let has_a = !comps.a_comps.is_empty();
    assemble(
        "simplicial",
        a_items,
        b_items,
        report,
        warnings,
        has_a,
        pair.dim_a(),
        pair.dim(),
        assertions,
        options,
    )
}

pub fn analyze_cw(
    data: &CellularPairData,
    assertions: &Assertions,
    options: &Options,
) -> Result<PairAnalysis> {
    let diags = data.validate();
    if diags.iter().any(|d| d.severity == Severity::Error) {
        return Err(CoreError::InvalidInput(diags));
    }
    let mut warnings: Vec<String> = diags.into_iter().map(|d| d.message).collect();
    if !matches!(options.tree, TreeSpec::Bfs) {
        warnings.push(
            "spanning-tree selection has no effect on the cellular tier (single vertex)"
                .to_string(),
        );
    }
    let mut report = ConsistencyReport::default();
    if options.no_crosscheck {
        report
            .skipped
            .push("homology-level and rational cross-checks (disabled by caller)".to_string());
    }

    let assembly = fox_chain_map(data)?;

    let mut a_items: Vec<AItem> = Vec::new();
    if let Some(side) = &assembly.a {
        let work = side_from_cw(side)?;
        check_augmentation(&mut report, "A side of A0", &work.trace, &work.lefschetz)?;
        if !options.no_crosscheck {
            check_chain_vs_homology(
                &mut report,
                "A side of A0",
                &side.complex.augmented_rational(),
                &side.map.augmented_rational(),
                &work.lefschetz,
            )?;
        }
        a_items.push(AItem {
            label: "A0".to_string(),
            invariant: true,
            in_b: 0,
            work: Some(work),
            edge: None,
            pushed_essential: BTreeSet::new(),
        });
    }

    let rel_work = side_from_cw(&assembly.relative)?;
    check_augmentation(
        &mut report,
        "relative part of B0",
        &rel_work.trace,
        &rel_work.lefschetz,
    )?;
    if !options.no_crosscheck {
        check_chain_vs_homology(
            &mut report,
            "relative part of B0",
            &assembly.relative.complex.augmented_rational(),
            &assembly.relative.map.augmented_rational(),
            &rel_work.lefschetz,
        )?;
    }

    // On this tier the cells outside A are exactly the relative cells, so
    // the full-complex trace is the image of the A-part plus the relative
    // part by construction. The simplicial tier cross-checks the same
    // identity against an independent full-complex computation.
    let mut abs_trace = rel_work.trace.clone();
    if let Some(item) = a_items.first_mut() {
        let a_work = item.work.as_ref().expect("A side has work");
        let iota = assembly.iota.as_ref().expect("A side comes with inclusion data");
        let (pushed, essential) = push_a_part(iota, a_work, &rel_work.sh)?;
        abs_trace = abs_trace.add(&pushed);
        item.pushed_essential = essential;
    }
    let b_items = vec![BItem {
        label: "B0".to_string(),
        invariant: true,
        rel: Some(rel_work),
        abs_trace: Some(abs_trace),
    }];

    let has_a = data.has_a();
    assemble(
        "cw",
        a_items,
        b_items,
        report,
        warnings,
        has_a,
        data.dim_a(),
        data.dim_b(),
        assertions,
        options,
    )
}

#[allow(clippy::too_many_arguments)]
fn assemble(
    tier: &str,
    a_items: Vec<AItem>,
    b_items: Vec<BItem>,
    mut report: ConsistencyReport,
    mut warnings: Vec<String>,
    has_a: bool,
    dim_a: Option<usize>,
    dim_b: usize,
    assertions: &Assertions,
    options: &Options,
) -> Result<PairAnalysis> {
    let on_a: usize = a_items
        .iter()
        .filter_map(|it| it.work.as_ref())
        .map(|w| w.trace.essential_count())
        .sum();
    let absolute: usize = b_items
        .iter()
        .filter_map(|it| it.abs_trace.as_ref())
        .map(TraceVector::essential_count)
        .sum();
    let mut shared = 0usize;
    for (bi, item) in b_items.iter().enumerate() {
        let Some(abs) = &item.abs_trace else { continue };
        let mut pushed: BTreeSet<&Vec<Int>> = BTreeSet::new();
        for a in a_items.iter().filter(|a| a.in_b == bi) {
            pushed.extend(a.pushed_essential.iter());
        }
        shared += abs
            .terms
            .iter()
            .filter(|(k, v)| !v.is_zero() && pushed.contains(k))
            .count();
    }
    let nielsen = NielsenNumbers { on_a, absolute, shared, relative: on_a + absolute - shared };

    let traced_a = || a_items.iter().filter_map(|it| it.work.as_ref());
    let traced_b = || b_items.iter().filter_map(|it| it.rel.as_ref());
    let trace_zero =
        traced_a().all(|w| w.trace.is_zero()) && traced_b().all(|w| w.trace.is_zero());
    let exact = traced_a().all(|w| w.exact) && traced_b().all(|w| w.exact);
    if !exact {
        warnings.push(
            "class data lives on the abelianized fundamental group; classes may merge, so class counts are lower bounds and a zero trace is not conclusive"
                .to_string(),
        );
    }

    if (nielsen.relative == 0) != trace_zero {
        return Err(CoreError::internal(format!(
            "Nielsen number {} contradicts trace vanishing {}",
            nielsen.relative, trace_zero
        )));
    }
    report.pass("Nielsen number vanishes exactly when the relative trace does".to_string());

    let verdict = build_verdict(trace_zero, exact, has_a, dim_a, dim_b, assertions);

    let lefschetz = RelativeLefschetz {
        a_components: a_items
            .iter()
            .filter(|it| it.invariant)
            .map(|it| (it.label.clone(), it.work.as_ref().expect("traced").lefschetz.clone()))
            .collect(),
        b_components: b_items
            .iter()
            .filter(|it| it.invariant)
            .map(|it| (it.label.clone(), it.rel.as_ref().expect("traced").lefschetz.clone()))
            .collect(),
    };
    let trace = RelativeTrace {
        a_parts: a_items
            .iter()
            .filter(|it| it.invariant)
            .map(|it| it.work.as_ref().expect("traced").part(&it.label))
            .collect(),
        b_parts: b_items
            .iter()
            .filter(|it| it.invariant)
            .map(|it| it.rel.as_ref().expect("traced").part(&it.label))
            .collect(),
        abelianized: !exact,
    };
    let absolute_parts = b_items
        .iter()
        .filter(|it| it.invariant)
        .map(|it| {
            let rel = it.rel.as_ref().expect("traced");
            let abs = it.abs_trace.as_ref().expect("traced");
            TracePart {
                component: it.label.clone(),
                shadow: describe_shadow(&rel.ab, &rel.names, &rel.sh, rel.exact),
                terms: format_trace(&rel.ab, &rel.names, abs),
                trace: abs.clone(),
                essential: abs.essential_count(),
            }
        })
        .collect();

    let mut bounded_conjugacy = Vec::new();
    if let Some(radius) = options.bounded_conjugacy {
        for it in &a_items {
            if let Some(w) = &it.work {
                bounded_conjugacy.push(bounded_conjugacy_search(
                    &it.label, &w.pres, &w.hom, &w.ab, &w.sh, radius,
                )?);
            }
        }
        for it in &b_items {
            if let Some(w) = &it.rel {
                bounded_conjugacy.push(bounded_conjugacy_search(
                    &it.label, &w.pres, &w.hom, &w.ab, &w.sh, radius,
                )?);
            }
        }
    }

    let components = ComponentSummary {
        a: a_items.iter().map(|it| (it.label.clone(), it.invariant)).collect(),
        b: b_items.iter().map(|it| (it.label.clone(), it.invariant)).collect(),
    };

    Ok(PairAnalysis {
        tier: tier.to_string(),
        components,
        lefschetz,
        trace,
        absolute_parts,
        nielsen,
        verdict,
        consistency: report,
        bounded_conjugacy,
        warnings,
    })
}

fn build_verdict(
    trace_zero: bool,
    exact: bool,
    has_a: bool,
    dim_a: Option<usize>,
    dim_b: usize,
    assertions: &Assertions,
) -> DeformabilityVerdict {
    let dims_declared =
        assertions.declared_dim_a.is_some() || assertions.declared_dim_b.is_some();
    let eff_dim_a = if has_a { assertions.declared_dim_a.or(dim_a) } else { None };
    let eff_dim_b = assertions.declared_dim_b.unwrap_or(dim_b);
    let dimensions_ok = match eff_dim_a {
        Some(da) => da >= 3 && eff_dim_b >= da + 2,
        None => eff_dim_b >= 3,
    };
    let manifolds_ok =
        assertions.closed_smooth_manifold_b && (eff_dim_a.is_none() || assertions.closed_smooth_manifold_a);
    let hypotheses = HypothesisRecord {
        dim_a: eff_dim_a,
        dim_b: eff_dim_b,
        dims_declared,
        dimensions_ok,
        manifold_a_asserted: assertions.closed_smooth_manifold_a,
        manifold_b_asserted: assertions.closed_smooth_manifold_b,
        all_met: dimensions_ok && manifolds_ok,
    };
    let (conclusion, explanation) = if !trace_zero {
        (
            Conclusion::NotDeformable,
            "the relative trace is nonzero, so every map in the relative homotopy class has a fixed point".to_string(),
        )
    } else if !exact {
        (
            Conclusion::InconclusiveAbelianized,
            "the trace vanishes, but it was computed in a coarsened class set; vanishing there does not certify that the full invariant vanishes".to_string(),
        )
    } else if hypotheses.all_met {
        (
            Conclusion::Deformable,
            "the relative trace vanishes in an exact class set and the dimension and manifold hypotheses hold, so the map can be deformed, relative to the subspace, to one without fixed points".to_string(),
        )
    } else {
        (
            Conclusion::TraceZeroButHypothesesUnverified,
            "the relative trace vanishes, but the dimension or manifold hypotheses of the removability theorem are not verified for this input".to_string(),
        )
    };
    DeformabilityVerdict {
        trace_zero,
        shadow_exact: exact,
        hypotheses,
        conclusion,
        explanation,
    }
}

/// Chain-level Lefschetz numbers per invariant component.
pub fn relative_lefschetz(
    input: &PairData,
    assertions: &Assertions,
    options: &Options,
) -> Result<RelativeLefschetz> {
    Ok(analyze(input, assertions, options)?.lefschetz)
}

/// The trace pair (A-parts, relative B-parts).
pub fn relative_reidemeister(
    input: &PairData,
    assertions: &Assertions,
    options: &Options,
) -> Result<RelativeTrace> {
    Ok(analyze(input, assertions, options)?.trace)
}

/// The Nielsen count together with the three numbers it combines.
pub fn relative_nielsen(
    input: &PairData,
    assertions: &Assertions,
    options: &Options,
) -> Result<NielsenNumbers> {
    Ok(analyze(input, assertions, options)?.nielsen)
}

/// The removability verdict.
pub fn deformability_verdict(
    input: &PairData,
    assertions: &Assertions,
    options: &Options,
) -> Result<DeformabilityVerdict> {
    Ok(analyze(input, assertions, options)?.verdict)
}

/// The list of identities verified during the computation. Any failed
/// identity surfaces as an internal error instead of a report.
pub fn consistency_report(
    input: &PairData,
    assertions: &Assertions,
    options: &Options,
) -> Result<ConsistencyReport> {
    Ok(analyze(input, assertions, options)?.consistency)
}

const BALL_CAP: usize = 20_000;

fn dsu_find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Experimental search over the ball of reduced words of bounded length in
/// the free generators of a presentation: unions words related by twisted
/// conjugation with conjugators from the ball, and counts the orbits and
/// the abelianized classes met.
///
/// Words are compared by free reduction only; the presentation's relations
/// are not applied. For a free group the orbit count bounds the number of
/// twisted-conjugacy classes among the enumerated words from above and the
/// abelianized count bounds it from below. For other presentations neither
/// bound is reliable. The result is informational, never used in verdicts.
pub fn bounded_conjugacy_search(
    component: &str,
    pres: &Presentation,
    hom: &GroupHom,
    ab: &AbelianStructure,
    sh: &ShadowClassSet,
    radius: u32,
) -> Result<BoundedConjugacyReport> {
    let n = pres.generators.len();
    let mut ball: Vec<Word> = vec![Word::identity()];
    let mut seen: BTreeSet<Word> = ball.iter().cloned().collect();
    let mut frontier = ball.clone();
    for _ in 0..radius {
        let mut next = Vec::new();
        for w in &frontier {
            for g in 0..n {
                for e in [1i64, -1] {
                    let cand = w.concat(&Word::letter(g, e));
                    if seen.insert(cand.clone()) {
                        if seen.len() > BALL_CAP {
                            return Err(CoreError::computation(format!(
                                "conjugacy search ball exceeds {BALL_CAP} words at radius {radius}; use a smaller radius"
                            )));
                        }
                        ball.push(cand.clone());
                        next.push(cand);
                    }
                }
            }
        }
        frontier = next;
    }

    let index: BTreeMap<&Word, usize> = ball.iter().enumerate().map(|(i, w)| (w, i)).collect();
    let mut parent: Vec<usize> = (0..ball.len()).collect();
    for (i, w) in ball.iter().enumerate() {
        for g in 0..n {
            for e in [1i64, -1] {
                let conj = Word::letter(g, e)
                    .concat(w)
                    .concat(&hom.images[g].pow(e).inverse());
                if let Some(&j) = index.get(&conj) {
                    let ri = dsu_find(&mut parent, i);
                    let rj = dsu_find(&mut parent, j);
                    if ri != rj {
                        parent[ri] = rj;
                    }
                }
            }
        }
    }
    let mut roots = BTreeSet::new();
    for i in 0..ball.len() {
        roots.insert(dsu_find(&mut parent, i));
    }
    let mut ab_classes = BTreeSet::new();
    for w in &ball {
        ab_classes.insert(sh.class_of(&ab.word_normal_form(w)));
    }

    Ok(BoundedConjugacyReport {
        component: component.to_string(),
        radius,
        ball_size: ball.len(),
        orbits: roots.len(),
        abelianized_classes: ab_classes.len(),
        note: "experimental: free reduction only, relations not applied, conjugators restricted to the ball; informational, not used in any verdict".to_string(),
    })
}
