//! Program rewrites that expose triggers to the taint analysis.
//!
//! Two passes, both purely syntactic and label-preserving:
//!
//! * [`instrument_ifs`] inserts `call IfClass.ifMethod_<k>(vars...)`
//!   immediately before every conditional, carrying the condition's
//!   variables (constants are skipped). The sink registry maps each
//!   `ifMethod_<k>` back to the original if-statement.
//! * [`instrument_field_sources`] rewrites `x = field C.F`, for every `C.F`
//!   in the catalog's `source_fields`, into `x = call BuildClass.get<C>_<F>()`
//!   so that field reads look like ordinary source calls downstream.
//!
//! `IfClass` and `BuildClass` are reserved: a program that already mentions
//! them is rejected rather than instrumented twice.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::catalog::{Catalog, BUILD_CLASS, IF_CLASS};
use crate::tir::{CallExpr, Instr, MethodSig, Program, Rhs, Stmt};

#[derive(Debug, Error)]
pub enum InstrumentError {
    #[error("program already references instrumentation class `{0}`")]
    AlreadyInstrumented(String),
}

/// Maps each inserted `ifMethod_<k>` to the original if-statement.
#[derive(Debug, Clone, Default)]
pub struct SinkRegistry {
    by_index: BTreeMap<u32, (MethodSig, String)>,
    by_site: BTreeMap<(MethodSig, String), u32>,
}

impl SinkRegistry {
    fn insert(&mut self, k: u32, method: MethodSig, label: String) {
        self.by_index.insert(k, (method.clone(), label.clone()));
        self.by_site.insert((method, label), k);
    }

    pub fn method_name(k: u32) -> String {
        format!("ifMethod_{k}")
    }

    pub fn get(&self, k: u32) -> Option<&(MethodSig, String)> {
        self.by_index.get(&k)
    }

    /// Whether the if-statement at `label` in `method` is a registered sink.
    pub fn contains_site(&self, method: &MethodSig, label: &str) -> bool {
        self.by_site.contains_key(&(method.clone(), label.to_string()))
    }

    /// Registered sites in counter order (program traversal order).
    pub fn iter(&self) -> impl Iterator<Item = (u32, &(MethodSig, String))> {
        self.by_index.iter().map(|(k, site)| (*k, site))
    }

    pub fn len(&self) -> usize {
        self.by_index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_index.is_empty()
    }
}

/// Maps each generated `BuildClass` getter name to the field it replaced.
#[derive(Debug, Clone, Default)]
pub struct SourceRegistry {
    by_name: BTreeMap<String, (String, String)>,
}

impl SourceRegistry {
    pub fn is_generated(&self, method_name: &str) -> bool {
        self.by_name.contains_key(method_name)
    }

    /// The `(class, field)` a generated getter stands for.
    pub fn field_of(&self, method_name: &str) -> Option<&(String, String)> {
        self.by_name.get(method_name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &(String, String))> {
        self.by_name.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.by_name.is_empty()
    }
}

/// Name of the getter that stands in for a load of `class.field`.
pub fn generated_source_name(class: &str, field: &str) -> String {
    format!("get{class}_{field}")
}

fn reject_reserved(p: &Program, class: &str) -> Result<(), InstrumentError> {
    let bail = || Err(InstrumentError::AlreadyInstrumented(class.to_string()));
    for c in &p.classes {
        if c.name == class {
            return bail();
        }
        for m in &c.methods {
            for stmt in &m.body {
                let mentions = match &stmt.instr {
                    Instr::Assign { rhs: Rhs::Call(call), .. } => call.class == class,
                    Instr::Assign { rhs: Rhs::FieldLoad { class: c, .. }, .. } => c == class,
                    Instr::Call(call) => call.class == class,
                    Instr::SetField { class: c, .. } => c == class,
                    _ => false,
                };
                if mentions {
                    return bail();
                }
            }
        }
    }
    Ok(())
}

/// Insert a sink call before every if-statement. The counter `k` advances in
/// (class, method, statement) traversal order, so numbering is stable across
/// runs and re-emits.
pub fn instrument_ifs(p: &Program) -> Result<(Program, SinkRegistry), InstrumentError> {
    reject_reserved(p, IF_CLASS)?;
    let mut out = p.clone();
    let mut registry = SinkRegistry::default();
    let mut k: u32 = 0;

    for class in &mut out.classes {
        for method in &mut class.methods {
            let mut taken: BTreeSet<String> =
                method.body.iter().map(|s| s.label.clone()).collect();
            let mut body = Vec::with_capacity(method.body.len());
            for stmt in method.body.drain(..) {
                if let Instr::If { .. } = &stmt.instr {
                    let mut label = format!("ifm{k}");
                    let mut bump = 0usize;
                    while taken.contains(&label) {
                        label = format!("ifm{k}_{bump}");
                        bump += 1;
                    }
                    taken.insert(label.clone());
                    body.push(Stmt {
                        label,
                        instr: Instr::Call(CallExpr {
                            class: IF_CLASS.to_string(),
                            method: SinkRegistry::method_name(k),
                            args: stmt
                                .instr
                                .condition_vars()
                                .into_iter()
                                .map(String::from)
                                .collect(),
                        }),
                    });
                    registry.insert(
                        k,
                        MethodSig {
                            class: class.name.clone(),
                            name: method.name.clone(),
                            arity: method.params.len(),
                        },
                        stmt.label.clone(),
                    );
                    k += 1;
                }
                body.push(stmt);
            }
            method.body = body;
        }
    }
    Ok((out, registry))
}

/// Rewrite loads of catalog source fields into `BuildClass` getter calls.
pub fn instrument_field_sources(
    p: &Program,
    cat: &Catalog,
) -> Result<(Program, SourceRegistry), InstrumentError> {
    reject_reserved(p, BUILD_CLASS)?;
    let mut out = p.clone();
    let mut registry = SourceRegistry::default();

    for class in &mut out.classes {
        for method in &mut class.methods {
            for stmt in &mut method.body {
                let Instr::Assign { rhs, .. } = &mut stmt.instr else { continue };
                let Rhs::FieldLoad { class: fc, field } = rhs else { continue };
                if !cat.is_source_field(fc, field) {
                    continue;
                }
                let name = generated_source_name(fc, field);
                registry.by_name.insert(name.clone(), (fc.clone(), field.clone()));
                *rhs = Rhs::Call(CallExpr {
                    class: BUILD_CLASS.to_string(),
                    method: name,
                    args: Vec::new(),
                });
            }
        }
    }
    Ok((out, registry))
}

/// Both passes: field sources first (so the getters exist before sinks are
/// numbered), then if-sinks.
pub fn instrument(
    p: &Program,
    cat: &Catalog,
) -> Result<(Program, SourceRegistry, SinkRegistry), InstrumentError> {
    let (p, sources) = instrument_field_sources(p, cat)?;
    let (p, sinks) = instrument_ifs(&p)?;
    Ok((p, sources, sinks))
}
