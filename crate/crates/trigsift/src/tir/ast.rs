use std::fmt;

/// Fully qualified method identity: methods are distinguished by class,
/// name and arity, so `A.f/1` and `A.f/2` are different methods.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MethodSig {
    pub class: String,
    pub name: String,
    pub arity: usize,
}

impl MethodSig {
    pub fn new(class: impl Into<String>, name: impl Into<String>, arity: usize) -> Self {
        MethodSig { class: class.into(), name: name.into(), arity }
    }

    /// Catalog-style key without the arity, e.g. `Tel.getDeviceId`.
    pub fn key(&self) -> String {
        format!("{}.{}", self.class, self.name)
    }
}

impl fmt::Display for MethodSig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}/{}", self.class, self.name, self.arity)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Const {
    Int(i64),
    Str(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Operand {
    Var(String),
    Const(Const),
}

impl Operand {
    pub fn as_var(&self) -> Option<&str> {
        match self {
            Operand::Var(v) => Some(v),
            Operand::Const(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RelOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Rem,
}

/// `Class.method(arg, ...)` — argument positions hold variables only.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CallExpr {
    pub class: String,
    pub method: String,
    pub args: Vec<String>,
}

impl CallExpr {
    pub fn sig(&self) -> MethodSig {
        MethodSig::new(self.class.clone(), self.method.clone(), self.args.len())
    }

    /// Catalog-style key without the arity.
    pub fn key(&self) -> String {
        format!("{}.{}", self.class, self.method)
    }
}

/// Right-hand side of an assignment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Rhs {
    Call(CallExpr),
    Var(String),
    Const(Const),
    FieldLoad { class: String, field: String },
    Bin { lhs: String, op: BinOp, rhs: Operand },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Instr {
    Assign { dst: String, rhs: Rhs },
    If { var: String, op: RelOp, rhs: Operand, target: String },
    Goto { target: String },
    Return { value: Option<String> },
    /// Statement-position call whose result is discarded.
    Call(CallExpr),
    SetField { class: String, field: String, src: String },
}

impl Instr {
    /// The variables read by an `if` condition, in source order and without
    /// duplicates. Constants never appear.
    pub fn condition_vars(&self) -> Vec<&str> {
        match self {
            Instr::If { var, rhs, .. } => match rhs.as_var() {
                Some(r) if r != var => vec![var, r],
                _ => vec![var],
            },
            _ => Vec::new(),
        }
    }

    /// The call expression contained in this instruction, if any.
    pub fn call(&self) -> Option<&CallExpr> {
        match self {
            Instr::Assign { rhs: Rhs::Call(c), .. } | Instr::Call(c) => Some(c),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stmt {
    pub label: String,
    pub instr: Instr,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Method {
    pub name: String,
    pub params: Vec<String>,
    pub is_entry: bool,
    pub body: Vec<Stmt>,
}

impl Method {
    pub fn sig_in(&self, class: &str) -> MethodSig {
        MethodSig::new(class, self.name.clone(), self.params.len())
    }

    pub fn stmt_index(&self, label: &str) -> Option<usize> {
        self.body.iter().position(|s| s.label == label)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Class {
    pub name: String,
    pub methods: Vec<Method>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Program {
    pub classes: Vec<Class>,
}

impl Program {
    /// All methods in program order, paired with their class name.
    pub fn methods(&self) -> impl Iterator<Item = (&str, &Method)> {
        self.classes
            .iter()
            .flat_map(|c| c.methods.iter().map(move |m| (c.name.as_str(), m)))
    }

    pub fn find_method(&self, sig: &MethodSig) -> Option<&Method> {
        self.classes.iter().find(|c| c.name == sig.class).and_then(|c| {
            c.methods
                .iter()
                .find(|m| m.name == sig.name && m.params.len() == sig.arity)
        })
    }

    pub fn entry_methods(&self) -> impl Iterator<Item = (&str, &Method)> {
        self.methods().filter(|(_, m)| m.is_entry)
    }
}

impl fmt::Display for Const {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Const::Int(i) => write!(f, "{i}"),
            Const::Str(s) => {
                write!(f, "\"")?;
                for ch in s.chars() {
                    match ch {
                        '"' => write!(f, "\\\"")?,
                        '\\' => write!(f, "\\\\")?,
                        '\n' => write!(f, "\\n")?,
                        '\t' => write!(f, "\\t")?,
                        c => write!(f, "{c}")?,
                    }
                }
                write!(f, "\"")
            }
        }
    }
}

impl fmt::Display for Operand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Operand::Var(v) => write!(f, "{v}"),
            Operand::Const(c) => write!(f, "{c}"),
        }
    }
}

impl fmt::Display for RelOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RelOp::Eq => "==",
            RelOp::Ne => "!=",
            RelOp::Lt => "<",
            RelOp::Le => "<=",
            RelOp::Gt => ">",
            RelOp::Ge => ">=",
        })
    }
}

impl fmt::Display for BinOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Rem => "%",
        })
    }
}

impl fmt::Display for CallExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}({})", self.class, self.method, self.args.join(", "))
    }
}

impl fmt::Display for Rhs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rhs::Call(c) => write!(f, "call {c}"),
            Rhs::Var(v) => write!(f, "{v}"),
            Rhs::Const(c) => write!(f, "{c}"),
            Rhs::FieldLoad { class, field } => write!(f, "field {class}.{field}"),
            Rhs::Bin { lhs, op, rhs } => write!(f, "{lhs} {op} {rhs}"),
        }
    }
}

impl fmt::Display for Instr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Instr::Assign { dst, rhs } => write!(f, "{dst} = {rhs}"),
            Instr::If { var, op, rhs, target } => write!(f, "if {var} {op} {rhs} goto {target}"),
            Instr::Goto { target } => write!(f, "goto {target}"),
            Instr::Return { value: Some(v) } => write!(f, "return {v}"),
            Instr::Return { value: None } => write!(f, "return"),
            Instr::Call(c) => write!(f, "call {c}"),
            Instr::SetField { class, field, src } => write!(f, "setfield {class}.{field} = {src}"),
        }
    }
}

impl fmt::Display for Stmt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.label, self.instr)
    }
}
