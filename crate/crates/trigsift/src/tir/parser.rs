use std::collections::{HashMap, HashSet};

use super::ast::*;
use super::lexer::{lex, Spanned, Tok};
use super::ParseError;

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek2(&self) -> &Tok {
        &self.toks[(self.pos + 1).min(self.toks.len() - 1)].tok
    }

    fn next(&mut self) -> Spanned {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, message: String) -> ParseError {
        let s = &self.toks[self.pos];
        ParseError::Syntax { line: s.line, col: s.col, message }
    }

    fn expect(&mut self, want: Tok) -> Result<(), ParseError> {
        if *self.peek() == want {
            self.next();
            Ok(())
        } else {
            Err(self.error(format!("expected {}, found {}", want.describe(), self.peek().describe())))
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.next();
                Ok(s)
            }
            other => Err(self.error(format!("expected {what}, found {}", other.describe()))),
        }
    }

    fn program(&mut self) -> Result<Program, ParseError> {
        let mut classes = Vec::new();
        while *self.peek() != Tok::Eof {
            classes.push(self.class()?);
        }
        if classes.is_empty() {
            return Err(self.error("expected `class`, found end of input".into()));
        }
        Ok(Program { classes })
    }

    fn class(&mut self) -> Result<Class, ParseError> {
        self.expect(Tok::KwClass)?;
        let name = self.ident("class name")?;
        self.expect(Tok::LBrace)?;
        let mut methods = Vec::new();
        while *self.peek() != Tok::RBrace {
            methods.push(self.method()?);
        }
        self.expect(Tok::RBrace)?;
        Ok(Class { name, methods })
    }

    fn method(&mut self) -> Result<Method, ParseError> {
        let is_entry = if *self.peek() == Tok::KwEntry {
            self.next();
            true
        } else {
            false
        };
        let name = self.ident("method name")?;
        self.expect(Tok::LParen)?;
        let mut params = Vec::new();
        if *self.peek() != Tok::RParen {
            loop {
                params.push(self.ident("parameter name")?);
                if *self.peek() == Tok::Comma {
                    self.next();
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::RParen)?;
        self.expect(Tok::LBrace)?;
        let mut body = Vec::new();
        while *self.peek() != Tok::RBrace {
            body.push(self.stmt()?);
        }
        if body.is_empty() {
            return Err(self.error("method body must contain at least one statement".into()));
        }
        self.expect(Tok::RBrace)?;
        Ok(Method { name, params, is_entry, body })
    }

    fn stmt(&mut self) -> Result<Stmt, ParseError> {
        let label = self.ident("statement label")?;
        self.expect(Tok::Colon)?;
        let instr = self.instr()?;
        Ok(Stmt { label, instr })
    }

    /// True when the upcoming tokens start a new statement (`IDENT ":"`) or
    /// close the method. Used to decide whether `return` carries a value.
    fn at_stmt_boundary(&self) -> bool {
        match self.peek() {
            Tok::RBrace | Tok::Eof => true,
            Tok::Ident(_) => *self.peek2() == Tok::Colon,
            _ => false,
        }
    }

    fn instr(&mut self) -> Result<Instr, ParseError> {
        match self.peek().clone() {
            Tok::KwIf => {
                self.next();
                let var = self.ident("condition variable")?;
                let op = match self.next() {
                    Spanned { tok: Tok::Rel(op), .. } => op,
                    s => {
                        self.pos -= 1;
                        return Err(self.error(format!(
                            "expected relational operator, found {}",
                            s.tok.describe()
                        )));
                    }
                };
                let rhs = self.operand()?;
                self.expect(Tok::KwGoto)?;
                let target = self.ident("goto target label")?;
                Ok(Instr::If { var, op, rhs, target })
            }
            Tok::KwGoto => {
                self.next();
                let target = self.ident("goto target label")?;
                Ok(Instr::Goto { target })
            }
            Tok::KwReturn => {
                self.next();
                if self.at_stmt_boundary() {
                    Ok(Instr::Return { value: None })
                } else {
                    let value = self.ident("return variable")?;
                    Ok(Instr::Return { value: Some(value) })
                }
            }
            Tok::KwCall => {
                self.next();
                Ok(Instr::Call(self.callexpr()?))
            }
            Tok::KwSetField => {
                self.next();
                let class = self.ident("class name")?;
                self.expect(Tok::Dot)?;
                let field = self.ident("field name")?;
                self.expect(Tok::Assign)?;
                let src = self.ident("source variable")?;
                Ok(Instr::SetField { class, field, src })
            }
            Tok::Ident(_) => {
                let dst = self.ident("assignment target")?;
                self.expect(Tok::Assign)?;
                let rhs = self.rhs()?;
                Ok(Instr::Assign { dst, rhs })
            }
            other => Err(self.error(format!("expected instruction, found {}", other.describe()))),
        }
    }

    fn rhs(&mut self) -> Result<Rhs, ParseError> {
        match self.peek().clone() {
            Tok::KwCall => {
                self.next();
                Ok(Rhs::Call(self.callexpr()?))
            }
            Tok::KwField => {
                self.next();
                let class = self.ident("class name")?;
                self.expect(Tok::Dot)?;
                let field = self.ident("field name")?;
                Ok(Rhs::FieldLoad { class, field })
            }
            Tok::Int(i) => {
                self.next();
                Ok(Rhs::Const(Const::Int(i)))
            }
            Tok::Str(s) => {
                self.next();
                Ok(Rhs::Const(Const::Str(s)))
            }
            Tok::Ident(_) => {
                let lhs = self.ident("variable")?;
                if let Tok::Bin(op) = *self.peek() {
                    self.next();
                    let rhs = self.operand()?;
                    Ok(Rhs::Bin { lhs, op, rhs })
                } else {
                    Ok(Rhs::Var(lhs))
                }
            }
            other => Err(self.error(format!(
                "expected call, field load, literal or variable, found {}",
                other.describe()
            ))),
        }
    }

    fn operand(&mut self) -> Result<Operand, ParseError> {
        match self.peek().clone() {
            Tok::Ident(_) => Ok(Operand::Var(self.ident("operand")?)),
            Tok::Int(i) => {
                self.next();
                Ok(Operand::Const(Const::Int(i)))
            }
            Tok::Str(s) => {
                self.next();
                Ok(Operand::Const(Const::Str(s)))
            }
            other => Err(self.error(format!(
                "expected variable or literal operand, found {}",
                other.describe()
            ))),
        }
    }

    fn callexpr(&mut self) -> Result<CallExpr, ParseError> {
        let class = self.ident("class name")?;
        self.expect(Tok::Dot)?;
        let method = self.ident("method name")?;
        self.expect(Tok::LParen)?;
        let mut args = Vec::new();
        if *self.peek() != Tok::RParen {
            loop {
                args.push(self.ident("call argument")?);
                if *self.peek() == Tok::Comma {
                    self.next();
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::RParen)?;
        Ok(CallExpr { class, method, args })
    }
}

/// Parse and validate a TIR program.
pub fn parse_program(src: &str) -> Result<Program, ParseError> {
    let toks = lex(src)?;
    let mut p = Parser { toks, pos: 0 };
    let program = p.program()?;
    validate(&program)?;
    Ok(program)
}

/// Check the structural invariants of a [`Program`]. Parsed programs have
/// already been checked; this is exposed so rewritten or generated programs
/// can be re-checked.
pub fn validate(p: &Program) -> Result<(), ParseError> {
    let err = |m: String| Err(ParseError::Validation(m));

    let mut class_names = HashSet::new();
    for class in &p.classes {
        if !class_names.insert(class.name.as_str()) {
            return err(format!("duplicate class `{}`", class.name));
        }
    }

    let mut sigs = HashSet::new();
    for (class, method) in p.methods() {
        let sig = method.sig_in(class);
        if !sigs.insert(sig.clone()) {
            return err(format!("duplicate method `{sig}`"));
        }

        let mut labels: HashMap<&str, usize> = HashMap::new();
        for (i, stmt) in method.body.iter().enumerate() {
            if labels.insert(stmt.label.as_str(), i).is_some() {
                return err(format!("duplicate label {} in {sig}", stmt.label));
            }
        }
        for stmt in &method.body {
            let target = match &stmt.instr {
                Instr::If { target, .. } | Instr::Goto { target } => Some(target),
                _ => None,
            };
            if let Some(target) = target {
                if !labels.contains_key(target.as_str()) {
                    return err(format!("undefined label {target} in {sig}"));
                }
            }
        }
        match method.body.last().map(|s| &s.instr) {
            Some(Instr::Return { .. }) | Some(Instr::Goto { .. }) => {}
            _ => return err(format!("method {sig} does not end in return or goto")),
        }
    }

    if !p.methods().any(|(_, m)| m.is_entry) {
        return err("program has no entry method".into());
    }
    Ok(())
}
