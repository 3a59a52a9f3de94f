//! Turns taint hits into triggers: the guarded condition, its two branch
//! sets over the original program's labels, and a coarse type derived from
//! the provenance sources.

use std::collections::BTreeMap;
use std::collections::BTreeSet;

use crate::catalog::BUILD_CLASS;
use crate::cfg::{branch_sets, dominator_tree, Cfg};
use crate::taint::{EntryPointHit, Provenance};
use crate::tir::{Instr, MethodSig, Program};

/// A taint-confirmed conditional together with the code it guards.
///
/// `true_branch` / `false_branch` are labels of the original program, never
/// of inserted instrumentation. The guarded region is their union; the
/// condition itself belongs to neither side.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trigger {
    pub method: MethodSig,
    /// Label of the guarding if-statement.
    pub label: String,
    /// Human-readable condition, e.g. `countryCode == "us"`.
    pub condition: String,
    pub true_branch: BTreeSet<String>,
    pub false_branch: BTreeSet<String>,
    pub sources: BTreeSet<Provenance>,
    /// Family of the provenance sources, e.g. `Telephony`; `Mixed` when the
    /// sources span several families.
    pub trigger_type: String,
}

impl Trigger {
    /// Γ: everything the condition guards, both polarities together.
    pub fn guarded(&self) -> BTreeSet<String> {
        self.true_branch.union(&self.false_branch).cloned().collect()
    }
}

const FAMILIES: &[(&str, &str)] = &[
    ("Tel", "Telephony"),
    ("Gps", "Location"),
    ("Net", "Internet"),
    ("Db", "Database"),
    ("Conn", "Connectivity"),
    ("Wifi", "Wi-Fi"),
    ("Power", "Power"),
    ("Audio", "Audio"),
    ("Cam", "Camera"),
    ("Build", "Build"),
    ("Sys", "System"),
];

fn family_of_class(class: &str) -> String {
    for (prefix, family) in FAMILIES {
        if class == *prefix {
            return (*family).to_string();
        }
    }
    class.to_string()
}

/// Family of one provenance signature. Instrumented getters
/// (`BuildClass.get<C>_<F>`) report the family of the underlying class `C`.
fn family_of_sig(sig: &str) -> String {
    let (class, member) = match sig.split_once('.') {
        Some(pair) => pair,
        None => return sig.to_string(),
    };
    if class == BUILD_CLASS {
        if let Some(rest) = member.strip_prefix("get") {
            if let Some((orig_class, _field)) = rest.split_once('_') {
                return family_of_class(orig_class);
            }
        }
    }
    family_of_class(class)
}

/// The trigger's family: the single family of its sources, or `Mixed` when
/// they disagree. Empty source sets (which extraction never produces) map
/// to `Unknown`.
pub fn trigger_type(sources: &BTreeSet<Provenance>) -> String {
    let families: BTreeSet<String> = sources.iter().map(|p| family_of_sig(&p.sig)).collect();
    match families.len() {
        0 => "Unknown".to_string(),
        1 => families.into_iter().next().unwrap(),
        _ => "Mixed".to_string(),
    }
}

/// Materialize one trigger per hit, with branch sets computed on the
/// original (pre-instrumentation) program.
///
/// # Panics
/// If a hit does not name an if-statement of `original` — hits must come
/// from a taint run over an instrumentation of this same program.
pub fn extract_triggers(original: &Program, hits: &[EntryPointHit]) -> Vec<Trigger> {
    // One CFG + dominator tree per method that actually has hits.
    let mut analyses: BTreeMap<MethodSig, (Cfg, crate::cfg::DomTree)> = BTreeMap::new();
    let mut triggers = Vec::with_capacity(hits.len());

    for hit in hits {
        let method = original
            .find_method(&hit.method)
            .unwrap_or_else(|| panic!("hit in unknown method {}", hit.method));
        let (cfg, dom) = analyses.entry(hit.method.clone()).or_insert_with(|| {
            let cfg = Cfg::build(&hit.method.class, method);
            let dom = dominator_tree(&cfg);
            (cfg, dom)
        });
        let node = cfg
            .node_of_label(&hit.label)
            .unwrap_or_else(|| panic!("hit at unknown label {}.{}", hit.method, hit.label));
        let idx = method.stmt_index(&hit.label).unwrap();
        let condition = match &method.body[idx].instr {
            Instr::If { var, op, rhs, .. } => format!("{var} {op} {rhs}"),
            other => panic!("hit at non-if statement {other}"),
        };
        let sets = branch_sets(cfg, dom, node);
        triggers.push(Trigger {
            method: hit.method.clone(),
            label: hit.label.clone(),
            condition,
            true_branch: sets.true_branch,
            false_branch: sets.false_branch,
            sources: hit.sources.clone(),
            trigger_type: trigger_type(&hit.sources),
        });
    }
    triggers
}
