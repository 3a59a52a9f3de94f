//! End-to-end analysis of a single app: parse, instrument, taint, extract
//! triggers, compute feature vectors.
//!
//! Scoring is deliberately not part of this module — the pipeline output
//! is model-independent, so one analysis pass can feed training, scoring,
//! and plain inspection alike.

use std::time::{Duration, Instant};

use thiserror::Error;

use crate::callgraph::CallGraph;
use crate::catalog::Catalog;
use crate::features::{extract_vector, FeatureVector};
use crate::instrument::{instrument, InstrumentError};
use crate::taint::{run_taint, DEFAULT_TIMEOUT};
use crate::tir::{parse_program, MethodSig, ParseError, Program};
use crate::trigger::{extract_triggers, Trigger};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Instrument(#[from] InstrumentError),
}

#[derive(Debug, Clone)]
pub struct AnalysisOptions {
    /// Call-graph depth bound for reachability-based features.
    pub depth_limit: usize,
    /// Wall-clock budget for the taint fixpoint.
    pub timeout: Duration,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self { depth_limit: 20, timeout: DEFAULT_TIMEOUT }
    }
}

/// One guarded conditional with its descriptor.
#[derive(Debug, Clone)]
pub struct AnalyzedTrigger {
    pub trigger: Trigger,
    pub vector: FeatureVector,
}

/// Wall-clock milliseconds per phase.
#[derive(Debug, Clone, Copy, Default)]
pub struct PhaseTimings {
    pub parse_ms: f64,
    pub taint_ms: f64,
    pub features_ms: f64,
}

#[derive(Debug, Clone)]
pub struct AppAnalysis {
    pub name: String,
    pub original: Program,
    pub instrumented: Program,
    pub triggers: Vec<AnalyzedTrigger>,
    /// True if the taint pass ran out of budget; `triggers` is then a
    /// (sound but possibly incomplete) partial result.
    pub timed_out: bool,
    pub pending_methods: Vec<MethodSig>,
    pub timings: PhaseTimings,
}

/// Runs the full analysis over one app's source text. Triggers and
/// features are computed against the *original* program; instrumentation
/// exists only to give the taint pass uniform source/sink shapes.
pub fn analyze_source(
    name: &str,
    text: &str,
    cat: &Catalog,
    opts: &AnalysisOptions,
) -> Result<AppAnalysis, PipelineError> {
    let t0 = Instant::now();
    let original = parse_program(text)?;
    let parse_ms = ms_since(t0);

    let t1 = Instant::now();
    let (instrumented, sources, sinks) = instrument(&original, cat)?;
    let taint = run_taint(&instrumented, cat, &sources, &sinks, opts.timeout);
    let taint_ms = ms_since(t1);

    let t2 = Instant::now();
    let triggers = extract_triggers(&original, &taint.hits);
    let cg = CallGraph::build(&original);
    let triggers = triggers
        .into_iter()
        .map(|trigger| {
            let vector = extract_vector(&trigger, &original, &cg, cat, opts.depth_limit);
            AnalyzedTrigger { trigger, vector }
        })
        .collect();
    let features_ms = ms_since(t2);

    Ok(AppAnalysis {
        name: name.to_string(),
        original,
        instrumented,
        triggers,
        timed_out: taint.timed_out,
        pending_methods: taint.pending_methods,
        timings: PhaseTimings { parse_ms, taint_ms, features_ms },
    })
}

fn ms_since(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}
