//! Report structures and the two renderers.
//!
//! The JSON and text formats are produced from the same `Report` value, so
//! they carry identical data. JSON field order is the declaration order
//! below and every collection is a vector, which makes the serialized form
//! deterministic byte for byte.

use reltrace_core::invariants::{PairAnalysis, TracePart};
use reltrace_core::{int_to_i64, CoreError, Int};
use serde::Serialize;

fn to_i64(v: &Int, what: &str) -> Result<i64, CoreError> {
    int_to_i64(v).ok_or_else(|| {
        CoreError::computation(format!("{what} {v} exceeds the 64-bit range of the report format"))
    })
}

#[derive(Debug, Serialize)]
pub struct Report {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub tier: String,
    pub command: String,
    pub components: ComponentsOut,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lefschetz: Option<LefschetzOut>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reidemeister: Option<TraceOut>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nielsen: Option<NielsenOut>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<VerdictOut>,
    pub consistency: ConsistencyOut,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub bounded_conjugacy: Vec<BoundedOut>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Serialize)]
pub struct ComponentsOut {
    #[serde(rename = "A")]
    pub a: Vec<ComponentOut>,
    #[serde(rename = "B")]
    pub b: Vec<ComponentOut>,
}

#[derive(Debug, Serialize)]
pub struct ComponentOut {
    pub label: String,
    pub invariant: bool,
}

#[derive(Debug, Serialize)]
pub struct LefschetzOut {
    #[serde(rename = "A")]
    pub a: Vec<(String, i64)>,
    #[serde(rename = "B")]
    pub b: Vec<(String, i64)>,
}

#[derive(Debug, Serialize)]
pub struct TraceOut {
    #[serde(rename = "A_parts")]
    pub a_parts: Vec<PartOut>,
    #[serde(rename = "B_parts")]
    pub b_parts: Vec<PartOut>,
    pub absolute_parts: Vec<PartOut>,
    pub abelianized: bool,
}

#[derive(Debug, Serialize)]
pub struct PartOut {
    pub component: String,
    pub shadow: ShadowOut,
    /// Formatted class representative with its integer coefficient;
    /// zero-coefficient classes are omitted.
    pub terms: Vec<(String, i64)>,
    pub augmentation: i64,
    pub essential: usize,
}

#[derive(Debug, Serialize)]
pub struct ShadowOut {
    /// Moduli of the abelianized group, zero meaning a free factor.
    pub group_moduli: Vec<i64>,
    pub class_free_rank: usize,
    pub class_torsion: Vec<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub class_count: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classes: Option<Vec<String>>,
    pub exact: bool,
}

#[derive(Debug, Serialize)]
pub struct NielsenOut {
    #[serde(rename = "on_A")]
    pub on_a: usize,
    pub absolute: usize,
    pub shared: usize,
    pub relative: usize,
}

#[derive(Debug, Serialize)]
pub struct VerdictOut {
    pub trace_zero: bool,
    pub shadow_exact: bool,
    pub hypotheses: HypothesesOut,
    pub conclusion: String,
    pub explanation: String,
}

#[derive(Debug, Serialize)]
pub struct HypothesesOut {
    #[serde(rename = "dim_A", skip_serializing_if = "Option::is_none")]
    pub dim_a: Option<usize>,
    #[serde(rename = "dim_B")]
    pub dim_b: usize,
    pub dims_declared: bool,
    pub dimensions_ok: bool,
    #[serde(rename = "manifold_A_asserted")]
    pub manifold_a_asserted: bool,
    #[serde(rename = "manifold_B_asserted")]
    pub manifold_b_asserted: bool,
    pub all_met: bool,
}

#[derive(Debug, Serialize)]
pub struct ConsistencyOut {
    pub passed: Vec<String>,
    pub skipped: Vec<String>,
}

#[derive(Debug, Serialize)]
pub struct BoundedOut {
    pub component: String,
    pub radius: u32,
    pub ball_size: usize,
    pub orbits: usize,
    pub abelianized_classes: usize,
    pub note: String,
}

#[derive(Debug, Serialize)]
pub struct CheckReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub tier: String,
    pub command: String,
    pub valid: bool,
    pub errors: Vec<String>,
    pub warnings: Vec<String>,
}

fn convert_part(part: &TracePart) -> Result<PartOut, CoreError> {
    let mut terms = Vec::with_capacity(part.terms.len());
    let mut augmentation = 0i64;
    for (rep, coeff) in &part.terms {
        let c = to_i64(coeff, "trace coefficient")?;
        augmentation = augmentation
            .checked_add(c)
            .ok_or_else(|| CoreError::computation("trace augmentation exceeds the 64-bit range"))?;
        terms.push((rep.clone(), c));
    }
    let sh = &part.shadow;
    Ok(PartOut {
        component: part.component.clone(),
        shadow: ShadowOut {
            group_moduli: sh
                .group_moduli
                .iter()
                .map(|m| to_i64(m, "group modulus"))
                .collect::<Result<_, _>>()?,
            class_free_rank: sh.class_free_rank,
            class_torsion: sh
                .class_torsion
                .iter()
                .map(|m| to_i64(m, "class-group modulus"))
                .collect::<Result<_, _>>()?,
            class_count: match &sh.class_count {
                Some(c) => Some(to_i64(c, "class count")?),
                None => None,
            },
            classes: sh.classes.clone(),
            exact: sh.exact,
        },
        terms,
        augmentation,
        essential: part.essential,
    })
}

fn convert_components(pairs: &[(String, bool)]) -> Vec<ComponentOut> {
    pairs
        .iter()
        .map(|(label, invariant)| ComponentOut { label: label.clone(), invariant: *invariant })
        .collect()
}

fn convert_lefschetz(pairs: &[(String, Int)]) -> Result<Vec<(String, i64)>, CoreError> {
    pairs
        .iter()
        .map(|(label, v)| Ok((label.clone(), to_i64(v, "Lefschetz number")?)))
        .collect()
}

impl Report {
    /// Builds the report for one command from a finished analysis. Sections
    /// a command does not ask for are omitted; `all` includes everything.
    pub fn from_analysis(
        name: Option<String>,
        command: &str,
        analysis: &PairAnalysis,
    ) -> Result<Self, CoreError> {
        let want_lefschetz = matches!(command, "lefschetz" | "all");
        let want_trace = matches!(command, "reidemeister" | "nielsen" | "deformable" | "all");
        let want_nielsen = matches!(command, "nielsen" | "all");
        let want_verdict = matches!(command, "deformable" | "all");

        let lefschetz = if want_lefschetz {
            Some(LefschetzOut {
                a: convert_lefschetz(&analysis.lefschetz.a_components)?,
                b: convert_lefschetz(&analysis.lefschetz.b_components)?,
            })
        } else {
            None
        };
        let reidemeister = if want_trace {
            Some(TraceOut {
                a_parts: analysis
                    .trace
                    .a_parts
                    .iter()
                    .map(convert_part)
                    .collect::<Result<_, _>>()?,
                b_parts: analysis
                    .trace
                    .b_parts
                    .iter()
                    .map(convert_part)
                    .collect::<Result<_, _>>()?,
                absolute_parts: analysis
                    .absolute_parts
                    .iter()
                    .map(convert_part)
                    .collect::<Result<_, _>>()?,
                abelianized: analysis.trace.abelianized,
            })
        } else {
            None
        };
        let nielsen = if want_nielsen {
            Some(NielsenOut {
                on_a: analysis.nielsen.on_a,
                absolute: analysis.nielsen.absolute,
                shared: analysis.nielsen.shared,
                relative: analysis.nielsen.relative,
            })
        } else {
            None
        };
        let verdict = if want_verdict {
            let v = &analysis.verdict;
            let h = &v.hypotheses;
            Some(VerdictOut {
                trace_zero: v.trace_zero,
                shadow_exact: v.shadow_exact,
                hypotheses: HypothesesOut {
                    dim_a: h.dim_a,
                    dim_b: h.dim_b,
                    dims_declared: h.dims_declared,
                    dimensions_ok: h.dimensions_ok,
                    manifold_a_asserted: h.manifold_a_asserted,
                    manifold_b_asserted: h.manifold_b_asserted,
                    all_met: h.all_met,
                },
                conclusion: v.conclusion.as_str().to_string(),
                explanation: v.explanation.clone(),
            })
        } else {
            None
        };
        Ok(Report {
            name,
            tier: analysis.tier.clone(),
            command: command.to_string(),
            components: ComponentsOut {
                a: convert_components(&analysis.components.a),
                b: convert_components(&analysis.components.b),
            },
            lefschetz,
            reidemeister,
            nielsen,
            verdict,
            consistency: ConsistencyOut {
                passed: analysis.consistency.passed.clone(),
                skipped: analysis.consistency.skipped.clone(),
            },
            bounded_conjugacy: analysis
                .bounded_conjugacy
                .iter()
                .map(|b| BoundedOut {
                    component: b.component.clone(),
                    radius: b.radius,
                    ball_size: b.ball_size,
                    orbits: b.orbits,
                    abelianized_classes: b.abelianized_classes,
                    note: b.note.clone(),
                })
                .collect(),
            warnings: analysis.warnings.clone(),
        })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialization cannot fail");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let push = |out: &mut String, line: &str| {
            out.push_str(line);
            out.push('\n');
        };
        if let Some(name) = &self.name {
            push(&mut out, &format!("document: {name}"));
        }
        push(&mut out, &format!("tier: {}", self.tier));
        push(&mut out, &format!("command: {}", self.command));
        push(&mut out, "components:");
        for (side, list) in [("A", &self.components.a), ("B", &self.components.b)] {
            if list.is_empty() {
                push(&mut out, &format!("  {side}: (none)"));
            }
            for c in list {
                let tag = if c.invariant { "invariant" } else { "not invariant" };
                push(&mut out, &format!("  {side}: {} ({tag})", c.label));
            }
        }
        if let Some(l) = &self.lefschetz {
            push(&mut out, "lefschetz:");
            for (side, list) in [("A", &l.a), ("B", &l.b)] {
                for (label, v) in list {
                    push(&mut out, &format!("  {side} {label}: {v}"));
                }
            }
        }
        if let Some(t) = &self.reidemeister {
            push(
                &mut out,
                &format!("reidemeister (abelianized: {}):", t.abelianized),
            );
            for (section, parts) in [
                ("A-part", &t.a_parts),
                ("B-part", &t.b_parts),
                ("absolute", &t.absolute_parts),
            ] {
                for p in parts {
                    render_part(&mut out, section, p);
                }
            }
        }
        if let Some(n) = &self.nielsen {
            push(&mut out, "nielsen:");
            push(&mut out, &format!("  on A: {}", n.on_a));
            push(&mut out, &format!("  absolute: {}", n.absolute));
            push(&mut out, &format!("  shared: {}", n.shared));
            push(&mut out, &format!("  relative: {}", n.relative));
        }
        if let Some(v) = &self.verdict {
            push(&mut out, "verdict:");
            push(&mut out, &format!("  trace zero: {}", v.trace_zero));
            push(&mut out, &format!("  shadow exact: {}", v.shadow_exact));
            let h = &v.hypotheses;
            let dim_a = match h.dim_a {
                Some(d) => d.to_string(),
                None => "(empty A)".to_string(),
            };
            push(
                &mut out,
                &format!(
                    "  hypotheses: dim A {dim_a}, dim B {}, dims declared {}, dimensions ok {}, manifold A asserted {}, manifold B asserted {}, all met {}",
                    h.dim_b,
                    h.dims_declared,
                    h.dimensions_ok,
                    h.manifold_a_asserted,
                    h.manifold_b_asserted,
                    h.all_met
                ),
            );
            push(&mut out, &format!("  conclusion: {}", v.conclusion));
            push(&mut out, &format!("  explanation: {}", v.explanation));
        }
        push(&mut out, "consistency:");
        for line in &self.consistency.passed {
            push(&mut out, &format!("  passed: {line}"));
        }
        for line in &self.consistency.skipped {
            push(&mut out, &format!("  skipped: {line}"));
        }
        if !self.bounded_conjugacy.is_empty() {
            push(&mut out, "bounded conjugacy:");
            for b in &self.bounded_conjugacy {
                push(
                    &mut out,
                    &format!(
                        "  {}: radius {}, ball size {}, orbits {}, abelianized classes {}",
                        b.component, b.radius, b.ball_size, b.orbits, b.abelianized_classes
                    ),
                );
                push(&mut out, &format!("    note: {}", b.note));
            }
        }
        if self.warnings.is_empty() {
            push(&mut out, "warnings: (none)");
        } else {
            push(&mut out, "warnings:");
            for w in &self.warnings {
                push(&mut out, &format!("  {w}"));
            }
        }
        out
    }
}

fn render_part(out: &mut String, section: &str, p: &PartOut) {
    let mut line = format!("  {section} [{}]: ", p.component);
    if p.terms.is_empty() {
        line.push('0');
    } else {
        for (i, (rep, coeff)) in p.terms.iter().enumerate() {
            let mag = coeff.abs();
            if i == 0 {
                if *coeff < 0 {
                    line.push('-');
                }
            } else if *coeff < 0 {
                line.push_str(" - ");
            } else {
                line.push_str(" + ");
            }
            if mag == 1 {
                line.push_str(&format!("[{rep}]"));
            } else {
                line.push_str(&format!("{mag}*[{rep}]"));
            }
        }
    }
    out.push_str(&line);
    out.push('\n');
    let sh = &p.shadow;
    out.push_str(&format!(
        "    shadow: group moduli {:?}, class free rank {}, class torsion {:?}",
        sh.group_moduli, sh.class_free_rank, sh.class_torsion
    ));
    if let Some(c) = &sh.class_count {
        out.push_str(&format!(", {c} classes"));
    }
    out.push_str(if sh.exact { ", exact" } else { ", abelianized" });
    out.push('\n');
    if let Some(classes) = &sh.classes {
        out.push_str(&format!("    classes: {}\n", classes.join(", ")));
    }
    out.push_str(&format!(
        "    augmentation: {}, essential classes: {}\n",
        p.augmentation, p.essential
    ));
}

impl CheckReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialization cannot fail");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        if let Some(name) = &self.name {
            out.push_str(&format!("document: {name}\n"));
        }
        out.push_str(&format!("tier: {}\n", self.tier));
        out.push_str(&format!("command: {}\n", self.command));
        out.push_str(&format!("valid: {}\n", self.valid));
        if self.errors.is_empty() {
            out.push_str("errors: (none)\n");
        } else {
            out.push_str("errors:\n");
            for e in &self.errors {
                out.push_str(&format!("  {e}\n"));
            }
        }
        if self.warnings.is_empty() {
            out.push_str("warnings: (none)\n");
        } else {
            out.push_str("warnings:\n");
            for w in &self.warnings {
                out.push_str(&format!("  {w}\n"));
            }
        }
        out
    }
}
