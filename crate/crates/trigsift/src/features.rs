//! The nine-dimensional description of a trigger: how much sensitive
//! behavior it guards and how lopsided that behavior is.
//!
//! v = ⟨S, N, D, R, B, P, M₁, S₁, J⟩ where, for guarded code Γ:
//!
//! * **S** — distinct sensitive signatures reachable from Γ;
//! * **N, D, R, B** — flags: Γ reaches native / dynamic-loading /
//!   reflection / background-service calls;
//! * **P** — a condition variable is read somewhere in Γ before being
//!   reassigned;
//! * **M₁** — app methods called at Γ sites whose only incoming edge is
//!   that site;
//! * **S₁** — sensitive signatures from S whose every call site in the
//!   whole program is owned by Γ;
//! * **J** — Jaccard distance between the sensitive sets reachable from the
//!   two branches.
//!
//! All reachability shares one `depth_limit` so the features stay mutually
//! consistent. Counts are per distinct signature, not per call site.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::callgraph::{CallGraph, CallSite};
use crate::catalog::Catalog;
use crate::cfg::Cfg;
use crate::tir::{Instr, Method, MethodSig, Program, Rhs};
use crate::trigger::Trigger;

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub s: u32,
    pub n: u8,
    pub d: u8,
    pub r: u8,
    pub b: u8,
    pub p: u8,
    pub m1: u32,
    pub s1: u32,
    pub j: f64,
}

impl FeatureVector {
    pub const DIM: usize = 9;

    pub fn as_array(&self) -> [f64; Self::DIM] {
        [
            f64::from(self.s),
            f64::from(self.n),
            f64::from(self.d),
            f64::from(self.r),
            f64::from(self.b),
            f64::from(self.p),
            f64::from(self.m1),
            f64::from(self.s1),
            self.j,
        ]
    }

    /// The nine feature columns of a CSV row.
    pub fn csv_fields(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.s, self.n, self.d, self.r, self.b, self.p, self.m1, self.s1, self.j
        )
    }
}

pub const CSV_HEADER: &str = "app,method,label,S,N,D,R,B,P,M1,S1,J";

/// One CSV row for a trigger's vector.
pub fn csv_record(app: &str, trigger: &Trigger, v: &FeatureVector) -> String {
    format!("{},{},{},{}", app, trigger.method, trigger.label, v.csv_fields())
}

fn roots_of(method: &MethodSig, labels: &BTreeSet<String>) -> Vec<(MethodSig, String)> {
    labels.iter().map(|l| (method.clone(), l.clone())).collect()
}

/// Distinct sensitive signatures (catalog keys) reachable from the given
/// statements of `method` within `depth_limit` call hops.
pub fn sensitive_reachable(
    cg: &CallGraph,
    cat: &Catalog,
    method: &MethodSig,
    labels: &BTreeSet<String>,
    depth_limit: usize,
) -> BTreeSet<String> {
    cg.reachable_external_calls(&roots_of(method, labels), depth_limit)
        .into_iter()
        .map(|site| site.callee.key())
        .filter(|key| cat.is_sensitive(key))
        .collect()
}

pub fn feature_s(t: &Trigger, cg: &CallGraph, cat: &Catalog, depth_limit: usize) -> u32 {
    sensitive_reachable(cg, cat, &t.method, &t.guarded(), depth_limit).len() as u32
}

/// (N, D, R, B): whether Γ reaches a native, dynamic-loading, reflection or
/// service call.
pub fn feature_flags(
    t: &Trigger,
    cg: &CallGraph,
    cat: &Catalog,
    depth_limit: usize,
) -> (u8, u8, u8, u8) {
    let reached = cg.reachable_external_calls(&roots_of(&t.method, &t.guarded()), depth_limit);
    let (mut n, mut d, mut r, mut b) = (0, 0, 0, 0);
    for site in &reached {
        let key = site.callee.key();
        n |= u8::from(cat.native.contains(&key));
        d |= u8::from(cat.dynload.contains(&key));
        r |= u8::from(cat.reflect.contains(&key));
        b |= u8::from(cat.service.contains(&key));
    }
    (n, d, r, b)
}

fn reads_var(instr: &Instr, v: &str) -> bool {
    match instr {
        Instr::Assign { rhs, .. } => match rhs {
            Rhs::Var(y) => y == v,
            Rhs::Const(_) | Rhs::FieldLoad { .. } => false,
            Rhs::Bin { lhs, rhs, .. } => lhs == v || rhs.as_var() == Some(v),
            Rhs::Call(c) => c.args.iter().any(|a| a == v),
        },
        Instr::If { var, rhs, .. } => var == v || rhs.as_var() == Some(v),
        Instr::Goto { .. } => false,
        Instr::Return { value } => value.as_deref() == Some(v),
        Instr::Call(c) => c.args.iter().any(|a| a == v),
        Instr::SetField { src, .. } => src == v,
    }
}

fn defines_var(instr: &Instr, v: &str) -> bool {
    matches!(instr, Instr::Assign { dst, .. } if dst == v)
}

/// 1 iff some condition variable is read in Γ before being redefined, along
/// some Γ-internal path starting at either branch edge of the trigger.
/// A statement like `x = x + 1` reads `x` before killing it.
pub fn feature_p(t: &Trigger, program: &Program) -> u8 {
    let method = program.find_method(&t.method).expect("trigger method not in program");
    feature_p_in(t, &t.method.class, method)
}

fn feature_p_in(t: &Trigger, class: &str, method: &Method) -> u8 {
    let cfg = Cfg::build(class, method);
    let c_node = cfg.node_of_label(&t.label).expect("trigger label not in method");
    let gamma = t.guarded();
    let idx = method.stmt_index(&t.label).unwrap();
    let in_gamma = |node: usize| {
        cfg.label_of_node(node).map(|l| gamma.contains(l)).unwrap_or(false)
    };

    for var in method.body[idx].instr.condition_vars() {
        let mut stack: Vec<usize> =
            cfg.succs[c_node].iter().copied().filter(|&s| in_gamma(s)).collect();
        let mut visited: BTreeSet<usize> = stack.iter().copied().collect();
        while let Some(node) = stack.pop() {
            let instr = &method.body[node - 1].instr;
            if reads_var(instr, var) {
                return 1;
            }
            if defines_var(instr, var) {
                continue; // killed along this path
            }
            for &s in &cfg.succs[node] {
                if in_gamma(s) && visited.insert(s) {
                    stack.push(s);
                }
            }
        }
    }
    0
}

/// Whether a call site belongs to the guarded region: either it is one of
/// the trigger's own Γ statements, or its enclosing method is Γ-only.
fn site_owned(
    site: &CallSite,
    t: &Trigger,
    gamma: &BTreeSet<String>,
    gamma_only: &BTreeSet<MethodSig>,
) -> bool {
    (site.caller == t.method && gamma.contains(&site.label)) || gamma_only.contains(&site.caller)
}

/// App methods every one of whose call sites is Γ-owned, computed as a
/// greatest fixpoint. Entry methods are excluded outright: they are
/// externally invocable, so their bodies are never "only reachable from Γ"
/// even when nothing in the program calls them.
fn gamma_only_methods(
    t: &Trigger,
    program: &Program,
    cg: &CallGraph,
    gamma: &BTreeSet<String>,
) -> BTreeSet<MethodSig> {
    let entries: BTreeSet<MethodSig> =
        program.entry_methods().map(|(c, m)| m.sig_in(c)).collect();
    let mut sites_of: BTreeMap<&MethodSig, Vec<&CallSite>> = BTreeMap::new();
    for m in cg.app_methods() {
        for site in cg.calls_from(m) {
            if cg.is_defined(&site.callee) {
                sites_of.entry(&site.callee).or_default().push(site);
            }
        }
    }

    let mut g: BTreeSet<MethodSig> =
        cg.app_methods().filter(|m| !entries.contains(m)).cloned().collect();
    loop {
        let violating: Vec<MethodSig> = g
            .iter()
            .filter(|m| {
                sites_of
                    .get(m)
                    .map(|sites| !sites.iter().all(|s| site_owned(s, t, gamma, &g)))
                    .unwrap_or(false)
            })
            .cloned()
            .collect();
        if violating.is_empty() {
            return g;
        }
        for m in violating {
            g.remove(&m);
        }
    }
}

/// (M₁, S₁).
///
/// M₁ counts distinct app methods called directly at Γ statements whose
/// program-wide fan-in is exactly that one site. S₁ counts the sensitive
/// signatures from the S set whose every call site in the program is
/// Γ-owned (directly in Γ, or inside a Γ-only method).
pub fn feature_m1_s1(
    t: &Trigger,
    program: &Program,
    cg: &CallGraph,
    cat: &Catalog,
    depth_limit: usize,
) -> (u32, u32) {
    let gamma = t.guarded();
    let method = program.find_method(&t.method).expect("trigger method not in program");

    let mut singly_called = BTreeSet::new();
    for stmt in &method.body {
        if !gamma.contains(&stmt.label) {
            continue;
        }
        let Some(call) = stmt.instr.call() else { continue };
        let sig = call.sig();
        if cg.is_defined(&sig) && cg.incoming_edges(&sig) == 1 {
            singly_called.insert(sig);
        }
    }

    let gamma_only = gamma_only_methods(t, program, cg, &gamma);
    let s_set = sensitive_reachable(cg, cat, &t.method, &gamma, depth_limit);
    let mut s1 = 0;
    for key in &s_set {
        let everywhere_owned = cg.app_methods().all(|m| {
            cg.calls_from(m).iter().all(|site| {
                !(cg.is_external(&site.callee) && site.callee.key() == *key)
                    || site_owned(site, t, &gamma, &gamma_only)
            })
        });
        if everywhere_owned {
            s1 += 1;
        }
    }
    (singly_called.len() as u32, s1)
}

/// Jaccard distance, with the all-quiet case (both sets empty) defined as
/// zero dissimilarity.
pub fn jaccard_distance(a: &BTreeSet<String>, b: &BTreeSet<String>) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 0.0;
    }
    let inter = a.intersection(b).count() as f64;
    let union = a.union(b).count() as f64;
    1.0 - inter / union
}

pub fn feature_j(t: &Trigger, cg: &CallGraph, cat: &Catalog, depth_limit: usize) -> f64 {
    let x_t = sensitive_reachable(cg, cat, &t.method, &t.true_branch, depth_limit);
    let x_f = sensitive_reachable(cg, cat, &t.method, &t.false_branch, depth_limit);
    jaccard_distance(&x_t, &x_f)
}

pub fn extract_vector(
    t: &Trigger,
    program: &Program,
    cg: &CallGraph,
    cat: &Catalog,
    depth_limit: usize,
) -> FeatureVector {
    let (n, d, r, b) = feature_flags(t, cg, cat, depth_limit);
    let (m1, s1) = feature_m1_s1(t, program, cg, cat, depth_limit);
    FeatureVector {
        s: feature_s(t, cg, cat, depth_limit),
        n,
        d,
        r,
        b,
        p: feature_p(t, program),
        m1,
        s1,
        j: feature_j(t, cg, cat, depth_limit),
    }
}
