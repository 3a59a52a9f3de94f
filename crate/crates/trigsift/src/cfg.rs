//! Per-method control-flow graphs, dominators, and branch sets.
//!
//! Every method gets a CFG with synthetic `Entry` and `Exit` nodes; node `0`
//! is `Entry`, statement `i` maps to node `i + 1`, and the last node is
//! `Exit`. An `if` has exactly two outgoing edges: the explicit goto target
//! (true) and the fall-through successor (false).
//!
//! Dominators are computed with the classic iterative scheme over a reverse
//! postorder: `idom(n)` converges to the immediate dominator after repeated
//! intersection of the predecessors' dominator chains. Unreachable nodes
//! have no dominator entry.
//!
//! For a conditional `c`, the *true branch set* holds the statements that
//! execute iff `c`'s condition held: statements strictly dominated by `c`,
//! reachable from `c`'s true successor without passing through `c` again,
//! and not reachable from the false successor the same way. Removing `c`
//! before the reachability queries is what keeps loop back-edges from
//! leaking one branch into the other, and join nodes (reachable from both
//! successors) stay out of both sets.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt::Write;

use crate::tir::{Instr, Method, MethodSig};

pub type NodeId = usize;

/// Control-flow graph of a single method body.
#[derive(Debug, Clone)]
pub struct Cfg {
    pub sig: MethodSig,
    /// Statement labels, indexed by statement position (node `i + 1`).
    pub labels: Vec<String>,
    pub succs: Vec<Vec<NodeId>>,
    pub preds: Vec<Vec<NodeId>>,
    /// For each `if` node: `(true_successor, false_successor)`.
    pub branch: BTreeMap<NodeId, (NodeId, NodeId)>,
    label_to_node: HashMap<String, NodeId>,
}

impl Cfg {
    pub const ENTRY: NodeId = 0;

    pub fn exit(&self) -> NodeId {
        self.labels.len() + 1
    }

    pub fn n_nodes(&self) -> usize {
        self.labels.len() + 2
    }

    pub fn node_of_label(&self, label: &str) -> Option<NodeId> {
        self.label_to_node.get(label).copied()
    }

    /// The statement label of `n`, or `None` for `Entry`/`Exit`.
    pub fn label_of_node(&self, n: NodeId) -> Option<&str> {
        if n == Self::ENTRY || n == self.exit() {
            None
        } else {
            self.labels.get(n - 1).map(|s| s.as_str())
        }
    }

    pub fn is_stmt(&self, n: NodeId) -> bool {
        n != Self::ENTRY && n != self.exit()
    }

    /// Build the CFG for `method` (belonging to class `class`). The method
    /// must be structurally valid: goto targets defined, body non-empty.
    pub fn build(class: &str, method: &Method) -> Cfg {
        let n = method.body.len();
        let exit = n + 1;
        let mut labels = Vec::with_capacity(n);
        let mut label_to_node = HashMap::with_capacity(n);
        for (i, stmt) in method.body.iter().enumerate() {
            labels.push(stmt.label.clone());
            label_to_node.insert(stmt.label.clone(), i + 1);
        }

        let mut succs = vec![Vec::new(); n + 2];
        let mut branch = BTreeMap::new();
        succs[Self::ENTRY].push(1);
        for (i, stmt) in method.body.iter().enumerate() {
            let node = i + 1;
            let fall = if i + 1 < n { i + 2 } else { exit };
            match &stmt.instr {
                Instr::If { target, .. } => {
                    let t = label_to_node[target.as_str()];
                    succs[node].push(t);
                    succs[node].push(fall);
                    branch.insert(node, (t, fall));
                }
                Instr::Goto { target } => succs[node].push(label_to_node[target.as_str()]),
                Instr::Return { .. } => succs[node].push(exit),
                _ => succs[node].push(fall),
            }
        }

        let mut preds = vec![Vec::new(); n + 2];
        for (from, ss) in succs.iter().enumerate() {
            for &to in ss {
                preds[to].push(from);
            }
        }

        Cfg { sig: method.sig_in(class), labels, succs, preds, branch, label_to_node }
    }

    /// Nodes reachable from `start` while never entering `skip`. If `start`
    /// itself is `skip`, nothing is reachable.
    fn reach_without(&self, start: NodeId, skip: NodeId) -> Vec<bool> {
        let mut seen = vec![false; self.n_nodes()];
        if start == skip {
            return seen;
        }
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        while let Some(n) = queue.pop_front() {
            for &s in &self.succs[n] {
                if s != skip && !seen[s] {
                    seen[s] = true;
                    queue.push_back(s);
                }
            }
        }
        seen
    }

    /// Graphviz rendering; with a dominator tree, immediate-dominator edges
    /// are added as dashed arrows.
    pub fn to_dot(&self, dom: Option<&DomTree>) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "digraph \"{}\" {{", self.sig);
        let name = |n: NodeId| -> String {
            if n == Self::ENTRY {
                "Entry".into()
            } else if n == self.exit() {
                "Exit".into()
            } else {
                self.labels[n - 1].clone()
            }
        };
        for n in 0..self.n_nodes() {
            let _ = writeln!(out, "  \"{}\";", name(n));
        }
        for n in 0..self.n_nodes() {
            if let Some(&(t, f)) = self.branch.get(&n) {
                let _ = writeln!(out, "  \"{}\" -> \"{}\" [label=\"T\"];", name(n), name(t));
                let _ = writeln!(out, "  \"{}\" -> \"{}\" [label=\"F\"];", name(n), name(f));
            } else {
                for &s in &self.succs[n] {
                    let _ = writeln!(out, "  \"{}\" -> \"{}\";", name(n), name(s));
                }
            }
        }
        if let Some(dom) = dom {
            for n in 0..self.n_nodes() {
                if n != Self::ENTRY {
                    if let Some(id) = dom.idom(n) {
                        let _ = writeln!(out, "  \"{}\" -> \"{}\" [style=dashed];", name(id), name(n));
                    }
                }
            }
        }
        out.push_str("}\n");
        out
    }
}

/// Immediate-dominator tree over a [`Cfg`]. Queries on unreachable nodes
/// report no dominance at all.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DomTree {
    idom: Vec<Option<NodeId>>,
    rpo_index: Vec<Option<usize>>,
}

impl DomTree {
    pub fn reachable(&self, n: NodeId) -> bool {
        self.rpo_index[n].is_some()
    }

    /// Immediate dominator of `n`; `None` for `Entry` and unreachable nodes.
    pub fn idom(&self, n: NodeId) -> Option<NodeId> {
        if n == Cfg::ENTRY {
            None
        } else {
            self.idom[n]
        }
    }

    /// Non-strict dominance: every path from `Entry` to `n` passes `d`.
    pub fn dominates(&self, d: NodeId, n: NodeId) -> bool {
        if !self.reachable(d) || !self.reachable(n) {
            return false;
        }
        let mut cur = n;
        loop {
            if cur == d {
                return true;
            }
            match self.idom(cur) {
                Some(next) => cur = next,
                None => return false,
            }
        }
    }

    pub fn strictly_dominates(&self, d: NodeId, n: NodeId) -> bool {
        d != n && self.dominates(d, n)
    }
}

/// Compute the dominator tree by iterating to a fixpoint in reverse
/// postorder, intersecting predecessor dominator chains.
pub fn dominator_tree(cfg: &Cfg) -> DomTree {
    let n = cfg.n_nodes();

    // Depth-first postorder from Entry; reversing gives the RPO.
    let mut postorder = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    let mut stack: Vec<(NodeId, usize)> = vec![(Cfg::ENTRY, 0)];
    seen[Cfg::ENTRY] = true;
    while let Some(&mut (node, ref mut next)) = stack.last_mut() {
        if *next < cfg.succs[node].len() {
            let s = cfg.succs[node][*next];
            *next += 1;
            if !seen[s] {
                seen[s] = true;
                stack.push((s, 0));
            }
        } else {
            postorder.push(node);
            stack.pop();
        }
    }
    let rpo: Vec<NodeId> = postorder.into_iter().rev().collect();
    let mut rpo_index = vec![None; n];
    for (i, &node) in rpo.iter().enumerate() {
        rpo_index[node] = Some(i);
    }

    let mut idom: Vec<Option<NodeId>> = vec![None; n];
    idom[Cfg::ENTRY] = Some(Cfg::ENTRY);

    let intersect = |idom: &[Option<NodeId>], a: NodeId, b: NodeId| -> NodeId {
        let (mut a, mut b) = (a, b);
        while a != b {
            while rpo_index[a].unwrap() > rpo_index[b].unwrap() {
                a = idom[a].unwrap();
            }
            while rpo_index[b].unwrap() > rpo_index[a].unwrap() {
                b = idom[b].unwrap();
            }
        }
        a
    };

    let mut changed = true;
    while changed {
        changed = false;
        for &node in rpo.iter().skip(1) {
            let mut new_idom: Option<NodeId> = None;
            for &p in &cfg.preds[node] {
                if idom[p].is_none() {
                    continue;
                }
                new_idom = Some(match new_idom {
                    None => p,
                    Some(cur) => intersect(&idom, cur, p),
                });
            }
            if new_idom.is_some() && idom[node] != new_idom {
                idom[node] = new_idom;
                changed = true;
            }
        }
    }

    // Entry's self-loop was only scaffolding for the intersection walk.
    idom[Cfg::ENTRY] = None;
    DomTree { idom, rpo_index }
}

/// The statements guarded by one arm of conditional `c`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BranchSets {
    /// Statements that execute iff the condition held (true edge taken).
    pub true_branch: BTreeSet<String>,
    /// Statements that execute iff the condition failed.
    pub false_branch: BTreeSet<String>,
}

impl BranchSets {
    /// The guarded region: both arms together.
    pub fn guarded(&self) -> BTreeSet<String> {
        self.true_branch.union(&self.false_branch).cloned().collect()
    }
}

/// Branch sets of the conditional at node `c`, per the rule described in the
/// module docs. `c` must be an `if` node of `cfg`; an unreachable `c` yields
/// empty sets.
pub fn branch_sets(cfg: &Cfg, dom: &DomTree, c: NodeId) -> BranchSets {
    let mut out = BranchSets::default();
    let &(t, f) = cfg.branch.get(&c).expect("branch_sets target must be an if node");
    if !dom.reachable(c) {
        return out;
    }
    let reach_t = cfg.reach_without(t, c);
    let reach_f = cfg.reach_without(f, c);
    for node in 1..=cfg.labels.len() {
        if node == c || !dom.strictly_dominates(c, node) {
            continue;
        }
        let label = cfg.labels[node - 1].clone();
        match (reach_t[node], reach_f[node]) {
            (true, false) => {
                out.true_branch.insert(label);
            }
            (false, true) => {
                out.false_branch.insert(label);
            }
            _ => {}
        }
    }
    out
}
