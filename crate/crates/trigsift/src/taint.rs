//! Inter-procedural forward taint analysis from source calls to guarded
//! conditionals.
//!
//! The analysis is flow-sensitive within a method (locals get strong
//! updates) and context-insensitive across methods: actual-argument taint is
//! joined into a single per-callee formal summary, return taint is a single
//! per-method summary, and static fields are one global, weakly-updated map.
//! Propagation:
//!
//! 1. `x = call S(...)` with `S` a catalog source (or an instrumented
//!    `BuildClass` getter) taints `x` with provenance `(S, call site)`.
//! 2. copies and binary ops propagate the union of their operands' taint;
//! 3. app-method calls push taint into formals and pull the callee's return
//!    taint; externals without a body pass argument taint through to their
//!    return value;
//! 4. `setfield` / `field` reads go through the global field map.
//!
//! Branching on tainted data does not taint the branch bodies (no implicit
//! flows). A hit is recorded for every registered if-statement whose
//! condition variables may carry taint; taint is read at the if itself, so
//! edges that jump straight to the conditional's label are covered.

use std::collections::BTreeMap;
use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use crate::catalog::{Catalog, BUILD_CLASS};
use crate::cfg::Cfg;
use crate::instrument::{SinkRegistry, SourceRegistry};
use crate::tir::{Instr, Method, MethodSig, Operand, Program, Rhs};

/// Where a taint mark came from: the source signature plus the statement
/// that introduced it.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Provenance {
    /// Catalog key of the source, e.g. `Tel.getNetworkCountryIso` or
    /// `BuildClass.getBuild_BRAND`.
    pub sig: String,
    pub method: MethodSig,
    pub label: String,
}

/// A conditional whose condition may observe source-derived data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntryPointHit {
    pub method: MethodSig,
    /// Label of the original if-statement.
    pub label: String,
    pub sources: BTreeSet<Provenance>,
}

#[derive(Debug, Clone)]
pub struct TaintResult {
    /// Hits in program order (method order, then body order).
    pub hits: Vec<EntryPointHit>,
    /// True if the per-app budget expired before the fixpoint was reached;
    /// `hits` then holds whatever had been established so far.
    pub timed_out: bool,
    /// Methods still awaiting (re-)analysis when the budget expired.
    pub pending_methods: Vec<MethodSig>,
}

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(60);

type TaintSet = BTreeSet<Provenance>;
/// Per-variable taint at one program point.
type VarFacts = BTreeMap<String, TaintSet>;

struct MethodInfo<'p> {
    sig: MethodSig,
    method: &'p Method,
    cfg: Cfg,
}

/// Immutable shape of the program: method table and dependency edges used
/// to schedule re-analysis.
struct ProgInfo<'p> {
    methods: Vec<MethodInfo<'p>>,
    index_of: BTreeMap<MethodSig, usize>,
    /// callers[i] = methods containing a call that resolves to method i.
    callers: Vec<BTreeSet<usize>>,
    /// Methods that load a given static field.
    field_readers: BTreeMap<(String, String), BTreeSet<usize>>,
}

impl<'p> ProgInfo<'p> {
    fn build(p: &'p Program) -> Self {
        let mut methods = Vec::new();
        for class in &p.classes {
            for method in &class.methods {
                methods.push(MethodInfo {
                    sig: method.sig_in(&class.name),
                    method,
                    cfg: Cfg::build(&class.name, method),
                });
            }
        }
        let index_of: BTreeMap<MethodSig, usize> =
            methods.iter().enumerate().map(|(i, m)| (m.sig.clone(), i)).collect();

        let mut callers = vec![BTreeSet::new(); methods.len()];
        let mut field_readers: BTreeMap<(String, String), BTreeSet<usize>> = BTreeMap::new();
        for (i, info) in methods.iter().enumerate() {
            for stmt in &info.method.body {
                if let Some(call) = stmt.instr.call() {
                    if let Some(&j) = index_of.get(&call.sig()) {
                        callers[j].insert(i);
                    }
                }
                if let Instr::Assign { rhs: Rhs::FieldLoad { class, field }, .. } = &stmt.instr {
                    field_readers
                        .entry((class.clone(), field.clone()))
                        .or_default()
                        .insert(i);
                }
            }
        }
        ProgInfo { methods, index_of, callers, field_readers }
    }
}

/// Mutable analysis state: summaries, global field taint, scheduling.
struct State {
    /// Joined taint of each formal parameter, per method.
    formals: Vec<Vec<TaintSet>>,
    /// Joined return-value taint, per method.
    rets: Vec<TaintSet>,
    fields: BTreeMap<(String, String), TaintSet>,
    worklist: BTreeSet<usize>,
    /// Per method: registered if-label -> observed source set.
    hits: Vec<BTreeMap<String, TaintSet>>,
}

fn join_into(dst: &mut TaintSet, src: &TaintSet) -> bool {
    let before = dst.len();
    dst.extend(src.iter().cloned());
    dst.len() != before
}

fn operand_taint(facts: &VarFacts, op: &Operand) -> TaintSet {
    match op.as_var() {
        Some(v) => facts.get(v).cloned().unwrap_or_default(),
        None => TaintSet::new(),
    }
}

/// Taint produced by a call expression, pushing argument taint into app
/// callees as a side effect.
#[allow(clippy::too_many_arguments)]
fn call_taint(
    call: &crate::tir::CallExpr,
    facts: &VarFacts,
    prog: &ProgInfo<'_>,
    st: &mut State,
    cat: &Catalog,
    srcreg: &SourceRegistry,
    me: &MethodSig,
    label: &str,
) -> TaintSet {
    if let Some(&j) = prog.index_of.get(&call.sig()) {
        for (pos, arg) in call.args.iter().enumerate() {
            if let Some(t) = facts.get(arg) {
                if join_into(&mut st.formals[j][pos], t) {
                    st.worklist.insert(j);
                }
            }
        }
        return st.rets[j].clone();
    }
    // External call: pass argument taint through, plus fresh provenance if
    // this is a source.
    let mut t = TaintSet::new();
    for arg in &call.args {
        if let Some(at) = facts.get(arg) {
            t.extend(at.iter().cloned());
        }
    }
    let key = call.key();
    let is_source =
        cat.is_source(&key) || (call.class == BUILD_CLASS && srcreg.is_generated(&call.method));
    if is_source {
        t.insert(Provenance { sig: key, method: me.clone(), label: label.to_string() });
    }
    t
}

#[allow(clippy::too_many_arguments)]
fn transfer(
    stmt: &crate::tir::Stmt,
    facts: &mut VarFacts,
    prog: &ProgInfo<'_>,
    st: &mut State,
    cat: &Catalog,
    srcreg: &SourceRegistry,
    me_idx: usize,
    me: &MethodSig,
) {
    match &stmt.instr {
        Instr::Assign { dst, rhs } => {
            let t = match rhs {
                Rhs::Const(_) => TaintSet::new(),
                Rhs::Var(y) => facts.get(y).cloned().unwrap_or_default(),
                Rhs::FieldLoad { class, field } => {
                    let mut t = st
                        .fields
                        .get(&(class.clone(), field.clone()))
                        .cloned()
                        .unwrap_or_default();
                    if cat.is_source_field(class, field) {
                        t.insert(Provenance {
                            sig: format!("{class}.{field}"),
                            method: me.clone(),
                            label: stmt.label.clone(),
                        });
                    }
                    t
                }
                Rhs::Bin { lhs, rhs, .. } => {
                    let mut t = facts.get(lhs).cloned().unwrap_or_default();
                    t.extend(operand_taint(facts, rhs));
                    t
                }
                Rhs::Call(call) => {
                    call_taint(call, facts, prog, st, cat, srcreg, me, &stmt.label)
                }
            };
            facts.insert(dst.clone(), t); // strong update
        }
        Instr::Call(call) => {
            call_taint(call, facts, prog, st, cat, srcreg, me, &stmt.label);
        }
        Instr::SetField { class, field, src } => {
            let t = facts.get(src).cloned().unwrap_or_default();
            if !t.is_empty() {
                let key = (class.clone(), field.clone());
                let slot = st.fields.entry(key.clone()).or_default();
                if join_into(slot, &t) {
                    if let Some(readers) = prog.field_readers.get(&key) {
                        st.worklist.extend(readers.iter().copied());
                    }
                }
            }
        }
        // No implicit flows: branching on tainted data taints nothing.
        Instr::If { .. } | Instr::Goto { .. } | Instr::Return { .. } => {}
    }
    let _ = me_idx;
}

fn join_facts(dst: &mut VarFacts, src: &VarFacts) -> bool {
    let mut changed = false;
    for (var, t) in src {
        let slot = dst.entry(var.clone()).or_default();
        changed |= join_into(slot, t);
    }
    changed
}

/// Flow-sensitive fixpoint over one method; updates summaries, schedules
/// dependents, and records hits at registered if-statements.
fn analyze_method(
    i: usize,
    prog: &ProgInfo<'_>,
    st: &mut State,
    cat: &Catalog,
    srcreg: &SourceRegistry,
    sinks: &SinkRegistry,
) {
    let info = &prog.methods[i];
    let body = &info.method.body;
    let cfg = &info.cfg;
    let n = cfg.n_nodes();

    // OUT facts per node; Entry's OUT binds formals to their joined taint.
    let mut out: Vec<VarFacts> = vec![VarFacts::new(); n];
    let mut entry_env = VarFacts::new();
    for (pos, param) in info.method.params.iter().enumerate() {
        let t = &st.formals[i][pos];
        if !t.is_empty() {
            entry_env.insert(param.clone(), t.clone());
        }
    }
    out[Cfg::ENTRY] = entry_env;

    // Propagate along edges from Entry so unreachable statements contribute
    // no facts.
    let mut in_facts: Vec<VarFacts> = vec![VarFacts::new(); n];
    let mut seen = vec![false; n];
    let mut node_list: BTreeSet<usize> =
        cfg.succs[Cfg::ENTRY].iter().copied().filter(|&s| s != cfg.exit()).collect();
    while let Some(node) = node_list.pop_first() {
        let first_visit = !seen[node];
        seen[node] = true;
        let mut inf = VarFacts::new();
        for &p in &cfg.preds[node] {
            join_facts(&mut inf, &out[p]);
        }
        in_facts[node] = inf.clone();
        transfer(&body[node - 1], &mut inf, prog, st, cat, srcreg, i, &info.sig);
        if first_visit || inf != out[node] {
            out[node] = inf;
            for &s in &cfg.succs[node] {
                if s != cfg.exit() {
                    node_list.insert(s);
                }
            }
        }
    }

    // Hits: read condition-variable taint at the if-statement itself.
    let mut hits = BTreeMap::new();
    for (idx, stmt) in body.iter().enumerate() {
        if !matches!(stmt.instr, Instr::If { .. }) {
            continue;
        }
        if !sinks.contains_site(&info.sig, &stmt.label) {
            continue;
        }
        let mut observed = TaintSet::new();
        for var in stmt.instr.condition_vars() {
            if let Some(t) = in_facts[idx + 1].get(var) {
                observed.extend(t.iter().cloned());
            }
        }
        if !observed.is_empty() {
            hits.insert(stmt.label.clone(), observed);
        }
    }
    st.hits[i] = hits;

    // Return summary: join IN-facts of every `return v`.
    let mut ret = TaintSet::new();
    for (idx, stmt) in body.iter().enumerate() {
        if let Instr::Return { value: Some(v) } = &stmt.instr {
            if let Some(t) = in_facts[idx + 1].get(v.as_str()) {
                ret.extend(t.iter().cloned());
            }
        }
    }
    if join_into(&mut st.rets[i], &ret) {
        st.worklist.extend(prog.callers[i].iter().copied());
    }
}

/// Run the analysis over an instrumented program. `timeout` bounds wall
/// time; on expiry the partial result is returned with `timed_out` set.
pub fn run_taint(
    p: &Program,
    cat: &Catalog,
    sources: &SourceRegistry,
    sinks: &SinkRegistry,
    timeout: Duration,
) -> TaintResult {
    let prog = ProgInfo::build(p);
    let n = prog.methods.len();
    let mut st = State {
        formals: prog.methods.iter().map(|m| vec![TaintSet::new(); m.method.params.len()]).collect(),
        rets: vec![TaintSet::new(); n],
        fields: BTreeMap::new(),
        worklist: (0..n).collect(),
        hits: vec![BTreeMap::new(); n],
    };

    let deadline = Instant::now() + timeout;
    let mut timed_out = false;
    while let Some(i) = st.worklist.pop_first() {
        if Instant::now() >= deadline {
            st.worklist.insert(i);
            timed_out = true;
            break;
        }
        analyze_method(i, &prog, &mut st, cat, sources, sinks);
    }

    let mut hits = Vec::new();
    for (i, info) in prog.methods.iter().enumerate() {
        for stmt in &info.method.body {
            if let Some(observed) = st.hits[i].get(&stmt.label) {
                hits.push(EntryPointHit {
                    method: info.sig.clone(),
                    label: stmt.label.clone(),
                    sources: observed.clone(),
                });
            }
        }
    }
    let pending_methods: Vec<MethodSig> =
        st.worklist.iter().map(|&i| prog.methods[i].sig.clone()).collect();
    TaintResult { hits, timed_out, pending_methods }
}
