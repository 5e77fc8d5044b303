//! Command dispatch for the fixed point invariant tool.
//!
//! `run` is the whole program minus argument parsing and process exit, so
//! the integration tests can call it directly and compare outputs without
//! spawning a binary.

pub mod document;
pub mod report;

use std::time::Instant;

use document::InputDocument;
use reltrace_core::complexes::PairData;
use reltrace_core::error::Severity;
use reltrace_core::fundamental_group::TreeSpec;
use reltrace_core::invariants::{analyze, Conclusion, Options};
use reltrace_core::CoreError;
use report::{CheckReport, Report};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Check,
    Lefschetz,
    Reidemeister,
    Nielsen,
    Deformable,
    All,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::Check => "check",
            Command::Lefschetz => "lefschetz",
            Command::Reidemeister => "reidemeister",
            Command::Nielsen => "nielsen",
            Command::Deformable => "deformable",
            Command::All => "all",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Text,
    Json,
}

#[derive(Debug, Clone, Default)]
pub struct Flags {
    pub format: Format,
    /// Overrides the tier declared in the document.
    pub tier: Option<String>,
    /// Spanning tree as a vertex priority list, by vertex name.
    pub tree: Option<Vec<String>>,
    pub no_crosscheck: bool,
    pub bounded_conjugacy: Option<u32>,
}

#[derive(Debug)]
pub struct RunOutput {
    pub exit_code: i32,
    pub stdout: String,
    pub stderr: String,
}

fn failure(code: i32, err: &CoreError) -> RunOutput {
    RunOutput { exit_code: code, stdout: String::new(), stderr: format!("error: {err}\n") }
}

fn error_exit(err: CoreError) -> RunOutput {
    let code = match &err {
        CoreError::InvalidInput(_) => 1,
        CoreError::Computation(_) | CoreError::Internal(_) => 2,
    };
    failure(code, &err)
}

/// Resolves the --tree vertex names against the document. On the cellular
/// tier there is nothing to resolve; a non-default spec is passed through
/// so the analysis can warn that it has no effect.
fn resolve_tree(doc: &InputDocument, flags: &Flags, pair: &PairData) -> Result<TreeSpec, CoreError> {
    let Some(names) = &flags.tree else {
        return Ok(TreeSpec::Bfs);
    };
    match pair {
        PairData::Cellular(_) => Ok(TreeSpec::Priority(Vec::new())),
        PairData::Simplicial { .. } => {
            let doc = doc
                .simplicial
                .as_ref()
                .expect("simplicial pair implies simplicial payload");
            let mut ids = Vec::with_capacity(names.len());
            for name in names {
                let id = doc.vertices.iter().position(|v| v == name).ok_or_else(|| {
                    CoreError::invalid(format!("--tree names unknown vertex {name:?}"))
                })?;
                ids.push(id);
            }
            Ok(TreeSpec::Priority(ids))
        }
    }
}

fn run_check(doc: &InputDocument, pair: &PairData, flags: &Flags) -> RunOutput {
    let diags = match pair {
        PairData::Simplicial { pair, map } => pair.validate(map),
        PairData::Cellular(data) => data.validate(),
    };
    let errors: Vec<String> = diags
        .iter()
        .filter(|d| d.severity == Severity::Error)
        .map(|d| d.message.clone())
        .collect();
    let warnings: Vec<String> = diags
        .iter()
        .filter(|d| d.severity == Severity::Warning)
        .map(|d| d.message.clone())
        .collect();
    let valid = errors.is_empty();
    let report = CheckReport {
        name: doc.name.clone(),
        tier: doc.tier.clone(),
        command: "check".to_string(),
        valid,
        errors: errors.clone(),
        warnings,
    };
    let stdout = match flags.format {
        Format::Json => report.to_json(),
        Format::Text => report.to_text(),
    };
    let stderr = if valid {
        String::new()
    } else {
        format!("error: {}\n", CoreError::InvalidInput(diags))
    };
    RunOutput { exit_code: if valid { 0 } else { 1 }, stdout, stderr }
}

pub fn run(command: Command, document_text: &str, flags: &Flags) -> RunOutput {
    let mut doc = match InputDocument::parse(document_text) {
        Ok(doc) => doc,
        Err(err) => return error_exit(err),
    };
    if let Some(tier) = &flags.tier {
        doc.tier = tier.clone();
    }
    let pair = match doc.to_pair() {
        Ok(pair) => pair,
        Err(err) => return error_exit(err),
    };
    if command == Command::Check {
        return run_check(&doc, &pair, flags);
    }
    let tree = match resolve_tree(&doc, flags, &pair) {
        Ok(tree) => tree,
        Err(err) => return error_exit(err),
    };
    let options = Options {
        tree,
        no_crosscheck: flags.no_crosscheck,
        bounded_conjugacy: flags.bounded_conjugacy,
    };
    let started = Instant::now();
    let analysis = match analyze(&pair, &doc.assertions(), &options) {
        Ok(analysis) => analysis,
        Err(err) => return error_exit(err),
    };
    let report = match Report::from_analysis(doc.name.clone(), command.as_str(), &analysis) {
        Ok(report) => report,
        Err(err) => return error_exit(err),
    };
    let stdout = match flags.format {
        Format::Json => report.to_json(),
        Format::Text => report.to_text(),
    };
    // Timing goes to stderr only; the report itself must be byte-identical
    // across runs.
    let stderr = format!("analysis completed in {:?}\n", started.elapsed());
    let exit_code = if command == Command::Deformable
        && matches!(
            analysis.verdict.conclusion,
            Conclusion::TraceZeroButHypothesesUnverified | Conclusion::InconclusiveAbelianized
        ) {
        3
    } else {
        0
    };
    RunOutput { exit_code, stdout, stderr }
}
