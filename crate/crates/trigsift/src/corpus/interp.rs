//! A concrete interpreter used as a taint oracle.
//!
//! Statically we claim a conditional is source-dependent; dynamically we
//! can check it. The interpreter runs a program under one concrete binding
//! of external inputs, tagging every value with the set of source
//! signatures it was derived from, and records which conditionals actually
//! tested a tagged value. Enumerating all bindings of a finite input
//! domain then gives ground truth: a conditional the static analysis
//! misses but the interpreter tags under some binding is a genuine false
//! negative.
//!
//! Semantics are deliberately total — missing locals read as `0`,
//! arithmetic wraps, division by zero yields `0`, comparisons between
//! mismatched types are simply false (except `!=`) — so the oracle never
//! gets stuck on a program the static side accepts. Only runaway execution
//! (step budget, call depth) aborts a run.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::{Catalog, BUILD_CLASS, IF_CLASS};
use crate::tir::{BinOp, CallExpr, Const, Instr, Method, MethodSig, Operand, Program, RelOp, Rhs};

/// Total statements executed across all entry points of one run.
const STEP_LIMIT: usize = 100_000;
const CALL_DEPTH_LIMIT: usize = 256;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum InterpError {
    #[error("execution exceeded {STEP_LIMIT} steps")]
    StepLimit,
    #[error("call depth exceeded {CALL_DEPTH_LIMIT}")]
    CallDepth,
}

/// A runtime value. Untagged in JSON so input domains read naturally
/// (`[200, 500]`, `["us", "de"]`).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Int(i64),
    Str(String),
}

/// A value plus the source signatures it transitively depends on.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Tagged {
    pub v: Value,
    pub tags: BTreeSet<String>,
}

impl Default for Value {
    fn default() -> Self {
        Value::Int(0)
    }
}

impl Tagged {
    fn plain(v: Value) -> Self {
        Tagged { v, tags: BTreeSet::new() }
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunResult {
    /// Every executed statement, in order, as (method, label).
    pub trace: Vec<(MethodSig, String)>,
    /// Conditionals that compared at least one tagged value.
    pub tagged_conditions: BTreeSet<(MethodSig, String)>,
}

/// Runs every entry method in program order under the given input binding.
/// `inputs` maps external signatures (`Net.getResponseCode`) and source
/// fields (`Build.MODEL`) to the value they produce; anything unbound
/// yields `0`. Static fields persist across entry methods within a run.
pub fn interpret(
    program: &Program,
    inputs: &BTreeMap<String, Value>,
    cat: &Catalog,
) -> Result<RunResult, InterpError> {
    let mut m = Machine {
        program,
        cat,
        inputs,
        fields: BTreeMap::new(),
        steps: 0,
        out: RunResult::default(),
    };
    for (class, method) in program.entry_methods() {
        let args = vec![Tagged::default(); method.params.len()];
        m.run_method(class, method, args, 0)?;
    }
    Ok(m.out)
}

/// Cartesian product of the input domains: every way of choosing one value
/// per key. No domains means a single empty binding. Keys with an empty
/// value list are skipped (they fall back to the interpreter's default).
pub fn enumerate_bindings(
    domains: &BTreeMap<String, Vec<Value>>,
) -> Vec<BTreeMap<String, Value>> {
    let mut out = vec![BTreeMap::new()];
    for (key, values) in domains {
        if values.is_empty() {
            continue;
        }
        out = out
            .into_iter()
            .flat_map(|binding| {
                values.iter().map(move |v| {
                    let mut b = binding.clone();
                    b.insert(key.clone(), v.clone());
                    b
                })
            })
            .collect();
    }
    out
}

struct Machine<'a> {
    program: &'a Program,
    cat: &'a Catalog,
    inputs: &'a BTreeMap<String, Value>,
    fields: BTreeMap<(String, String), Tagged>,
    steps: usize,
    out: RunResult,
}

impl Machine<'_> {
    fn run_method(
        &mut self,
        class: &str,
        method: &Method,
        args: Vec<Tagged>,
        depth: usize,
    ) -> Result<Tagged, InterpError> {
        if depth > CALL_DEPTH_LIMIT {
            return Err(InterpError::CallDepth);
        }
        let sig = method.sig_in(class);
        let mut locals: BTreeMap<String, Tagged> =
            method.params.iter().cloned().zip(args).collect();
        let mut pc = 0usize;
        while let Some(stmt) = method.body.get(pc) {
            self.steps += 1;
            if self.steps > STEP_LIMIT {
                return Err(InterpError::StepLimit);
            }
            self.out.trace.push((sig.clone(), stmt.label.clone()));
            match &stmt.instr {
                Instr::Assign { dst, rhs } => {
                    let v = self.eval_rhs(rhs, &locals, depth)?;
                    locals.insert(dst.clone(), v);
                    pc += 1;
                }
                Instr::If { var, op, rhs, target } => {
                    let lhs = local(&locals, var);
                    let rv = operand(&locals, rhs);
                    if !lhs.tags.is_empty() || !rv.tags.is_empty() {
                        self.out
                            .tagged_conditions
                            .insert((sig.clone(), stmt.label.clone()));
                    }
                    if compare(*op, &lhs.v, &rv.v) {
                        pc = method.stmt_index(target).unwrap_or(method.body.len());
                    } else {
                        pc += 1;
                    }
                }
                Instr::Goto { target } => {
                    pc = method.stmt_index(target).unwrap_or(method.body.len());
                }
                Instr::Return { value } => {
                    return Ok(value
                        .as_ref()
                        .map(|v| local(&locals, v))
                        .unwrap_or_default());
                }
                Instr::Call(call) => {
                    self.eval_call(call, &locals, depth)?;
                    pc += 1;
                }
                Instr::SetField { class, field, src } => {
                    let v = local(&locals, src);
                    self.fields.insert((class.clone(), field.clone()), v);
                    pc += 1;
                }
            }
        }
        Ok(Tagged::default())
    }

    fn eval_rhs(
        &mut self,
        rhs: &Rhs,
        locals: &BTreeMap<String, Tagged>,
        depth: usize,
    ) -> Result<Tagged, InterpError> {
        Ok(match rhs {
            Rhs::Call(call) => self.eval_call(call, locals, depth)?,
            Rhs::Var(v) => local(locals, v),
            Rhs::Const(c) => Tagged::plain(const_value(c)),
            Rhs::FieldLoad { class, field } => self.field_value(class, field),
            Rhs::Bin { lhs, op, rhs } => {
                binop(local(locals, lhs), *op, operand(locals, rhs))
            }
        })
    }

    /// Statics set by the program win; otherwise a source field reads from
    /// the input binding and picks up its tag.
    fn field_value(&self, class: &str, field: &str) -> Tagged {
        if let Some(t) = self.fields.get(&(class.to_string(), field.to_string())) {
            return t.clone();
        }
        let key = format!("{class}.{field}");
        let v = self.inputs.get(&key).cloned().unwrap_or_default();
        let mut tags = BTreeSet::new();
        if self.cat.is_source_field(class, field) {
            tags.insert(key);
        }
        Tagged { v, tags }
    }

    fn eval_call(
        &mut self,
        call: &CallExpr,
        locals: &BTreeMap<String, Tagged>,
        depth: usize,
    ) -> Result<Tagged, InterpError> {
        let args: Vec<Tagged> = call.args.iter().map(|a| local(locals, a)).collect();

        // Observer sinks inserted by instrumentation are inert here.
        if call.class == IF_CLASS {
            return Ok(Tagged::default());
        }
        // Generated field getters behave exactly like the loads they
        // replaced, so instrumentation can't change a run's outcome.
        if call.class == BUILD_CLASS {
            if let Some((class, field)) =
                call.method.strip_prefix("get").and_then(|rest| rest.split_once('_'))
            {
                return Ok(self.field_value(class, field));
            }
            return Ok(Tagged::default());
        }
        if let Some(callee) = self.program.find_method(&call.sig()) {
            let class = call.class.clone();
            return self.run_method(&class, callee, args, depth + 1);
        }

        // External: produce the bound input value; taint passes through
        // arguments and a source signature adds its own tag.
        let key = call.key();
        let v = self.inputs.get(&key).cloned().unwrap_or_default();
        let mut tags: BTreeSet<String> = BTreeSet::new();
        for a in &args {
            tags.extend(a.tags.iter().cloned());
        }
        if self.cat.is_source(&key) {
            tags.insert(key);
        }
        Ok(Tagged { v, tags })
    }
}

fn local(locals: &BTreeMap<String, Tagged>, name: &str) -> Tagged {
    locals.get(name).cloned().unwrap_or_default()
}

fn operand(locals: &BTreeMap<String, Tagged>, op: &Operand) -> Tagged {
    match op {
        Operand::Var(v) => local(locals, v),
        Operand::Const(c) => Tagged::plain(const_value(c)),
    }
}

fn const_value(c: &Const) -> Value {
    match c {
        Const::Int(i) => Value::Int(*i),
        Const::Str(s) => Value::Str(s.clone()),
    }
}

fn compare(op: RelOp, a: &Value, b: &Value) -> bool {
    use Value::*;
    match (a, b) {
        (Int(x), Int(y)) => rel(op, x.cmp(y)),
        (Str(x), Str(y)) => rel(op, x.cmp(y)),
        // Mixed types: only equality is meaningful, and it never holds.
        _ => matches!(op, RelOp::Ne),
    }
}

fn rel(op: RelOp, ord: std::cmp::Ordering) -> bool {
    match op {
        RelOp::Eq => ord.is_eq(),
        RelOp::Ne => ord.is_ne(),
        RelOp::Lt => ord.is_lt(),
        RelOp::Le => ord.is_le(),
        RelOp::Gt => ord.is_gt(),
        RelOp::Ge => ord.is_ge(),
    }
}

fn binop(a: Tagged, op: BinOp, b: Tagged) -> Tagged {
    use Value::*;
    let v = match (&a.v, op, &b.v) {
        (Int(x), BinOp::Add, Int(y)) => Int(x.wrapping_add(*y)),
        (Int(x), BinOp::Sub, Int(y)) => Int(x.wrapping_sub(*y)),
        (Int(x), BinOp::Mul, Int(y)) => Int(x.wrapping_mul(*y)),
        (Int(_), BinOp::Div, Int(0)) | (Int(_), BinOp::Rem, Int(0)) => Int(0),
        (Int(x), BinOp::Div, Int(y)) => Int(x.wrapping_div(*y)),
        (Int(x), BinOp::Rem, Int(y)) => Int(x.wrapping_rem(*y)),
        (Str(x), BinOp::Add, Str(y)) => Str(format!("{x}{y}")),
        _ => Int(0),
    };
    let mut tags = a.tags;
    tags.extend(b.tags);
    Tagged { v, tags }
}
