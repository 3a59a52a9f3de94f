//! Whole-program call graph.
//!
//! Call resolution is exact on `(class, name, arity)`. A call whose target
//! has no body in the program is an *external* — typically a platform API —
//! and becomes a leaf node. The graph records every call statement as its
//! own edge, so fan-in counts distinct call sites, not distinct callers.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt::Write;

use crate::tir::{MethodSig, Program};

/// One call site: the statement `label` inside `caller` invoking `callee`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct CallSite {
    pub caller: MethodSig,
    pub label: String,
    pub callee: MethodSig,
}

#[derive(Debug, Clone)]
pub struct CallGraph {
    /// Methods defined in the program, with their outgoing call sites in
    /// statement order.
    edges: BTreeMap<MethodSig, Vec<CallSite>>,
    /// Callees that appear at some site but have no body.
    externals: BTreeSet<MethodSig>,
    /// Distinct call statements targeting each method.
    fan_in: HashMap<MethodSig, usize>,
}

impl CallGraph {
    pub fn build(program: &Program) -> CallGraph {
        let defined: BTreeSet<MethodSig> =
            program.methods().map(|(c, m)| m.sig_in(c)).collect();
        let mut edges: BTreeMap<MethodSig, Vec<CallSite>> =
            defined.iter().cloned().map(|s| (s, Vec::new())).collect();
        let mut externals = BTreeSet::new();
        let mut fan_in: HashMap<MethodSig, usize> = HashMap::new();

        for (class, method) in program.methods() {
            let caller = method.sig_in(class);
            for stmt in &method.body {
                let Some(call) = stmt.instr.call() else { continue };
                let callee = call.sig();
                *fan_in.entry(callee.clone()).or_insert(0) += 1;
                if !defined.contains(&callee) {
                    externals.insert(callee.clone());
                }
                edges.get_mut(&caller).unwrap().push(CallSite {
                    caller: caller.clone(),
                    label: stmt.label.clone(),
                    callee,
                });
            }
        }
        CallGraph { edges, externals, fan_in }
    }

    pub fn is_defined(&self, sig: &MethodSig) -> bool {
        self.edges.contains_key(sig)
    }

    pub fn is_external(&self, sig: &MethodSig) -> bool {
        self.externals.contains(sig)
    }

    pub fn externals(&self) -> impl Iterator<Item = &MethodSig> {
        self.externals.iter()
    }

    pub fn app_methods(&self) -> impl Iterator<Item = &MethodSig> {
        self.edges.keys()
    }

    /// Outgoing call sites of a defined method, in statement order.
    pub fn calls_from(&self, sig: &MethodSig) -> &[CallSite] {
        self.edges.get(sig).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Number of distinct call statements anywhere in the program whose
    /// target is `sig`.
    pub fn incoming_edges(&self, sig: &MethodSig) -> usize {
        self.fan_in.get(sig).copied().unwrap_or(0)
    }

    /// External call sites reachable from the root statements.
    ///
    /// Calls made by the root statements themselves are at depth 0; stepping
    /// into an application callee costs one, so with `depth_limit = 0` only
    /// the roots' own calls are reported. Externals encountered at any
    /// admitted depth come back with the site that issues them. Each method
    /// is entered at most once (at its shallowest depth), which both
    /// terminates recursion cycles and keeps the result monotone in
    /// `depth_limit` and in `roots`.
    pub fn reachable_external_calls(
        &self,
        roots: &[(MethodSig, String)],
        depth_limit: usize,
    ) -> BTreeSet<CallSite> {
        let mut root_labels: BTreeMap<&MethodSig, BTreeSet<&str>> = BTreeMap::new();
        for (method, label) in roots {
            root_labels.entry(method).or_default().insert(label.as_str());
        }

        let mut found = BTreeSet::new();
        let mut entered: BTreeSet<MethodSig> = BTreeSet::new();
        let mut queue: VecDeque<(MethodSig, usize)> = VecDeque::new();

        let admit = |site: &CallSite,
                         depth: usize,
                         found: &mut BTreeSet<CallSite>,
                         queue: &mut VecDeque<(MethodSig, usize)>,
                         entered: &mut BTreeSet<MethodSig>| {
            if self.is_external(&site.callee) {
                found.insert(site.clone());
            } else if depth < depth_limit && entered.insert(site.callee.clone()) {
                queue.push_back((site.callee.clone(), depth + 1));
            }
        };

        for (method, labels) in &root_labels {
            for site in self.calls_from(method) {
                if labels.contains(site.label.as_str()) {
                    admit(site, 0, &mut found, &mut queue, &mut entered);
                }
            }
        }
        while let Some((method, depth)) = queue.pop_front() {
            for site in self.calls_from(&method) {
                admit(site, depth, &mut found, &mut queue, &mut entered);
            }
        }
        found
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph callgraph {\n");
        for ext in &self.externals {
            let _ = writeln!(out, "  \"{ext}\" [shape=box];");
        }
        for sites in self.edges.values() {
            for site in sites {
                let _ = writeln!(
                    out,
                    "  \"{}\" -> \"{}\" [label=\"{}\"];",
                    site.caller, site.callee, site.label
                );
            }
        }
        out.push_str("}\n");
        out
    }
}
