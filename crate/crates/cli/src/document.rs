//! The JSON input format and its conversion to the library's types.
//!
//! One document describes one problem: a pair of complexes on one of the
//! two tiers, the self-map, and optional hypothesis assertions. Schema
//! errors and name-resolution errors are reported as invalid input with
//! the offending key named.

use std::collections::BTreeMap;

use reltrace_core::complexes::{
    CellImage, CellularPairData, CwCell, PairData, SimplicialPair, VertexSelfMap,
};
use reltrace_core::error::Result;
use reltrace_core::invariants::Assertions;
use reltrace_core::CoreError;
use serde::Deserialize;

/// A word in named generators: list of [name, exponent] pairs.
pub type WordDoc = Vec<(String, i64)>;
/// A group-ring element: list of [coefficient, word] pairs.
pub type RingElemDoc = Vec<(i64, WordDoc)>;
/// A vector over named cells: list of [cell, element] pairs.
pub type VectorDoc = Vec<(String, RingElemDoc)>;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputDocument {
    #[serde(default)]
    pub name: Option<String>,
    pub tier: String,
    #[serde(default)]
    pub simplicial: Option<SimplicialDoc>,
    #[serde(default)]
    pub cw: Option<CwDoc>,
    #[serde(default)]
    pub assertions: Option<AssertionsDoc>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimplicialDoc {
    pub vertices: Vec<String>,
    /// simplices[k] lists the (k+1)-dimensional simplices by vertex names;
    /// the vertices themselves are not repeated here.
    #[serde(default)]
    pub simplices: Vec<Vec<Vec<String>>>,
    #[serde(default, rename = "A_simplices")]
    pub a_simplices: Vec<Vec<String>>,
    /// Image vertex per vertex; must cover every vertex.
    pub vertex_map: BTreeMap<String, String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CwDoc {
    #[serde(default)]
    pub generators: Vec<GeneratorDoc>,
    /// cells[d] lists the (d+2)-cells.
    #[serde(default)]
    pub cells: Vec<Vec<CellDoc>>,
    /// Marks the base vertex as part of A even when no generator or higher
    /// cell is; implied true as soon as anything else is flagged.
    #[serde(default, rename = "vertex_in_A")]
    pub vertex_in_a: bool,
    pub map: CwMapDoc,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorDoc {
    pub name: String,
    #[serde(default, rename = "in_A")]
    pub in_a: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellDoc {
    pub name: String,
    #[serde(default, rename = "in_A")]
    pub in_a: bool,
    /// Attaching word; 2-cells only.
    #[serde(default)]
    pub attach: Option<WordDoc>,
    /// Boundary vector; cells of dimension at least three. For cells
    /// outside A this is the relative boundary, with A-cells dropped.
    #[serde(default)]
    pub boundary: Option<VectorDoc>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CwMapDoc {
    /// Image word per generator.
    pub phi: BTreeMap<String, WordDoc>,
    /// Image vector or the string "derive" per cell of dimension >= 2.
    #[serde(default)]
    pub cell_images: BTreeMap<String, CellImageDoc>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum CellImageDoc {
    Keyword(String),
    Explicit(VectorDoc),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssertionsDoc {
    #[serde(default, rename = "closed_smooth_manifold_A")]
    pub closed_smooth_manifold_a: bool,
    #[serde(default, rename = "closed_smooth_manifold_B")]
    pub closed_smooth_manifold_b: bool,
    #[serde(default, rename = "dim_A")]
    pub dim_a: Option<usize>,
    #[serde(default, rename = "dim_B")]
    pub dim_b: Option<usize>,
}

impl InputDocument {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text)
            .map_err(|e| CoreError::invalid(format!("document does not match the schema: {e}")))
    }

    pub fn assertions(&self) -> Assertions {
        match &self.assertions {
            Some(a) => Assertions {
                closed_smooth_manifold_a: a.closed_smooth_manifold_a,
                closed_smooth_manifold_b: a.closed_smooth_manifold_b,
                declared_dim_a: a.dim_a,
                declared_dim_b: a.dim_b,
            },
            None => Assertions::default(),
        }
    }

    /// Converts the payload of the declared tier, rejecting documents with
    /// no payload, a mismatched payload, or both payloads.
    pub fn to_pair(&self) -> Result<PairData> {
        match self.tier.as_str() {
            "simplicial" => {
                if self.cw.is_some() {
                    return Err(CoreError::invalid(
                        "tier is \"simplicial\" but a cw payload is present",
                    ));
                }
                let doc = self.simplicial.as_ref().ok_or_else(|| {
                    CoreError::invalid("tier is \"simplicial\" but the simplicial payload is missing")
                })?;
                let (pair, map) = doc.to_core()?;
                Ok(PairData::Simplicial { pair, map })
            }
            "cw" => {
                if self.simplicial.is_some() {
                    return Err(CoreError::invalid(
                        "tier is \"cw\" but a simplicial payload is present",
                    ));
                }
                let doc = self
                    .cw
                    .as_ref()
                    .ok_or_else(|| CoreError::invalid("tier is \"cw\" but the cw payload is missing"))?;
                Ok(PairData::Cellular(doc.to_core()?))
            }
            other => Err(CoreError::invalid(format!(
                "unknown tier {other:?}; expected \"simplicial\" or \"cw\""
            ))),
        }
    }
}

impl SimplicialDoc {
    pub fn to_core(&self) -> Result<(SimplicialPair, VertexSelfMap)> {
        let index: BTreeMap<&str, usize> = self
            .vertices
            .iter()
            .enumerate()
            .map(|(i, n)| (n.as_str(), i))
            .collect();
        if index.len() != self.vertices.len() {
            return Err(CoreError::invalid("duplicate vertex names"));
        }
        let resolve = |names: &[String], what: &str| -> Result<Vec<usize>> {
            names
                .iter()
                .map(|n| {
                    index.get(n.as_str()).copied().ok_or_else(|| {
                        CoreError::invalid(format!("unknown vertex {n:?} in {what}"))
                    })
                })
                .collect()
        };
        let mut higher = Vec::with_capacity(self.simplices.len());
        for (k, level) in self.simplices.iter().enumerate() {
            let mut out = Vec::with_capacity(level.len());
            for s in level {
                out.push(resolve(s, &format!("simplices[{k}]"))?);
            }
            higher.push(out);
        }
        let mut a_simplices = Vec::with_capacity(self.a_simplices.len());
        for s in &self.a_simplices {
            a_simplices.push(resolve(s, "A_simplices")?);
        }
        let mut images = Vec::with_capacity(self.vertices.len());
        for n in &self.vertices {
            let image = self.vertex_map.get(n).ok_or_else(|| {
                CoreError::invalid(format!("vertex_map is missing vertex {n:?}"))
            })?;
            images.push(*index.get(image.as_str()).ok_or_else(|| {
                CoreError::invalid(format!("vertex_map sends {n:?} to unknown vertex {image:?}"))
            })?);
        }
        for key in self.vertex_map.keys() {
            if !index.contains_key(key.as_str()) {
                return Err(CoreError::invalid(format!(
                    "vertex_map contains unknown vertex {key:?}"
                )));
            }
        }
        Ok((
            SimplicialPair::new(self.vertices.clone(), higher, a_simplices),
            VertexSelfMap { images },
        ))
    }
}

impl CwDoc {
    pub fn to_core(&self) -> Result<CellularPairData> {
        let generators: Vec<(String, bool)> = self
            .generators
            .iter()
            .map(|g| (g.name.clone(), g.in_a))
            .collect();
        let cells: Vec<Vec<CwCell>> = self
            .cells
            .iter()
            .map(|level| {
                level
                    .iter()
                    .map(|c| CwCell {
                        name: c.name.clone(),
                        in_a: c.in_a,
                        attach: c.attach.clone(),
                        boundary: c.boundary.clone(),
                    })
                    .collect()
            })
            .collect();
        let any_a = self.generators.iter().any(|g| g.in_a)
            || self.cells.iter().flatten().any(|c| c.in_a);
        let phi = self
            .map
            .phi
            .iter()
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect();
        let mut cell_images = Vec::with_capacity(self.map.cell_images.len());
        for (name, image) in &self.map.cell_images {
            let converted = match image {
                CellImageDoc::Keyword(s) if s == "derive" => CellImage::Derive,
                CellImageDoc::Keyword(s) => {
                    return Err(CoreError::invalid(format!(
                        "cell image for {name:?} is the unknown keyword {s:?}; expected \"derive\" or a vector"
                    )));
                }
                CellImageDoc::Explicit(v) => CellImage::Explicit(v.clone()),
            };
            cell_images.push((name.clone(), converted));
        }
        Ok(CellularPairData {
            generators,
            cells,
            vertex_in_a: self.vertex_in_a || any_a,
            phi,
            cell_images,
        })
    }
}
