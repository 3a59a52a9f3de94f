use super::ast::{BinOp, RelOp};
use super::ParseError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int(i64),
    Str(String),
    KwClass,
    KwEntry,
    KwIf,
    KwGoto,
    KwReturn,
    KwCall,
    KwSetField,
    KwField,
    LBrace,
    RBrace,
    LParen,
    RParen,
    Comma,
    Colon,
    Dot,
    Assign,
    Rel(RelOp),
    Bin(BinOp),
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Int(i) => format!("integer `{i}`"),
            Tok::Str(_) => "string literal".into(),
            Tok::KwClass => "`class`".into(),
            Tok::KwEntry => "`entry`".into(),
            Tok::KwIf => "`if`".into(),
            Tok::KwGoto => "`goto`".into(),
            Tok::KwReturn => "`return`".into(),
            Tok::KwCall => "`call`".into(),
            Tok::KwSetField => "`setfield`".into(),
            Tok::KwField => "`field`".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Assign => "`=`".into(),
            Tok::Rel(op) => format!("`{op}`"),
            Tok::Bin(op) => format!("`{op}`"),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Spanned {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_continue(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

/// Tokenize `src`. A `-` directly followed by a digit is a negative integer
/// literal unless the previous token could end an expression (identifier,
/// literal or `)`), in which case it is the subtraction operator.
pub fn lex(src: &str) -> Result<Vec<Spanned>, ParseError> {
    let mut out: Vec<Spanned> = Vec::new();
    let mut chars = src.chars().peekable();
    let (mut line, mut col) = (1usize, 1usize);

    macro_rules! bump {
        () => {{
            let c = chars.next();
            if let Some(c) = c {
                if c == '\n' {
                    line += 1;
                    col = 1;
                } else {
                    col += 1;
                }
            }
            c
        }};
    }

    loop {
        let (tline, tcol) = (line, col);
        let c = match chars.peek().copied() {
            None => break,
            Some(c) => c,
        };
        if c.is_whitespace() {
            bump!();
            continue;
        }
        if c == '#' {
            while let Some(&n) = chars.peek() {
                if n == '\n' {
                    break;
                }
                bump!();
            }
            continue;
        }

        let err = |message: String| ParseError::Syntax { line: tline, col: tcol, message };

        let tok = if is_ident_start(c) {
            let mut s = String::new();
            while let Some(&n) = chars.peek() {
                if !is_ident_continue(n) {
                    break;
                }
                s.push(n);
                bump!();
            }
            match s.as_str() {
                "class" => Tok::KwClass,
                "entry" => Tok::KwEntry,
                "if" => Tok::KwIf,
                "goto" => Tok::KwGoto,
                "return" => Tok::KwReturn,
                "call" => Tok::KwCall,
                "setfield" => Tok::KwSetField,
                "field" => Tok::KwField,
                _ => Tok::Ident(s),
            }
        } else if c.is_ascii_digit() {
            let mut s = String::new();
            while let Some(&n) = chars.peek() {
                if !n.is_ascii_digit() {
                    break;
                }
                s.push(n);
                bump!();
            }
            Tok::Int(s.parse::<i64>().map_err(|_| err(format!("integer literal `{s}` out of range")))?)
        } else if c == '"' {
            bump!();
            let mut s = String::new();
            loop {
                match bump!() {
                    None => return Err(err("unterminated string literal".into())),
                    Some('"') => break,
                    Some('\\') => match bump!() {
                        Some('"') => s.push('"'),
                        Some('\\') => s.push('\\'),
                        Some('n') => s.push('\n'),
                        Some('t') => s.push('\t'),
                        Some(other) => return Err(err(format!("unknown escape `\\{other}`"))),
                        None => return Err(err("unterminated string literal".into())),
                    },
                    Some(ch) => s.push(ch),
                }
            }
            Tok::Str(s)
        } else {
            bump!();
            match c {
                '{' => Tok::LBrace,
                '}' => Tok::RBrace,
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                ',' => Tok::Comma,
                ':' => Tok::Colon,
                '.' => Tok::Dot,
                '+' => Tok::Bin(BinOp::Add),
                '*' => Tok::Bin(BinOp::Mul),
                '/' => Tok::Bin(BinOp::Div),
                '%' => Tok::Bin(BinOp::Rem),
                '-' => {
                    let neg_literal = matches!(chars.peek(), Some(d) if d.is_ascii_digit())
                        && !matches!(
                            out.last().map(|s| &s.tok),
                            Some(Tok::Ident(_)) | Some(Tok::Int(_)) | Some(Tok::Str(_)) | Some(Tok::RParen)
                        );
                    if neg_literal {
                        let mut s = String::from("-");
                        while let Some(&n) = chars.peek() {
                            if !n.is_ascii_digit() {
                                break;
                            }
                            s.push(n);
                            bump!();
                        }
                        Tok::Int(
                            s.parse::<i64>()
                                .map_err(|_| err(format!("integer literal `{s}` out of range")))?,
                        )
                    } else {
                        Tok::Bin(BinOp::Sub)
                    }
                }
                '=' => {
                    if chars.peek() == Some(&'=') {
                        bump!();
                        Tok::Rel(RelOp::Eq)
                    } else {
                        Tok::Assign
                    }
                }
                '!' => {
                    if chars.peek() == Some(&'=') {
                        bump!();
                        Tok::Rel(RelOp::Ne)
                    } else {
                        return Err(err("expected `!=`".into()));
                    }
                }
                '<' => {
                    if chars.peek() == Some(&'=') {
                        bump!();
                        Tok::Rel(RelOp::Le)
                    } else {
                        Tok::Rel(RelOp::Lt)
                    }
                }
                '>' => {
                    if chars.peek() == Some(&'=') {
                        bump!();
                        Tok::Rel(RelOp::Ge)
                    } else {
                        Tok::Rel(RelOp::Gt)
                    }
                }
                other => return Err(err(format!("unexpected character `{other}`"))),
            }
        };
        out.push(Spanned { tok, line: tline, col: tcol });
    }
    out.push(Spanned { tok: Tok::Eof, line, col });
    Ok(out)
}
