//! Static trigger analysis for TIR, a small text-based three-address IR.
//!
//! The pipeline mirrors how suspicious, rarely-executed behavior hides in
//! real applications: a guard condition reads some environment value (device
//! identity, country code, wall-clock time, screen state, ...) and gates a
//! payload on it. We make those guards observable and then decide which of
//! them look anomalous:
//!
//! 1. [`tir`] parses and re-emits programs.
//! 2. [`instrument`] marks every `if` with a probe call and rewrites
//!    environment field reads into source calls.
//! 3. [`taint`] propagates source taint to the probes; each guard whose
//!    condition can carry source-derived data becomes an *entry point hit*.
//! 4. [`trigger`] turns hits into triggers with their true/false branch sets
//!    (computed from dominators on the original, uninstrumented CFG).
//! 5. [`features`] summarizes each trigger's guarded code as a 9-dimensional
//!    vector (sensitive-API counts, native/dynload/reflection/service flags,
//!    condition reuse, exclusivity counts, branch divergence).
//! 6. [`ocsvm`] trains a one-class SVM on benign triggers and flags vectors
//!    that fall outside the learned region.
//!
//! [`corpus`] generates labeled synthetic apps (plus a concrete interpreter
//! that serves as a ground-truth taint oracle) and [`pipeline`] wires the
//! phases together for the CLI.

pub mod callgraph;
pub mod catalog;
pub mod cfg;
pub mod corpus;
pub mod features;
pub mod instrument;
pub mod ocsvm;
pub mod pipeline;
pub mod report;
pub mod taint;
pub mod tir;
pub mod trigger;
