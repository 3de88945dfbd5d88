//! Limit-state expressions: a small recursive-descent parser and evaluator.
//!
//! Grammar, loosest binding first:
//!
//! ```text
//! expr    = term (("+" | "-") term)*
//! term    = unary (("*" | "/") unary)*
//! unary   = ("-" | "+") unary | power
//! power   = primary ("^" unary)?
//! primary = number | ident | ident "(" expr ")" | "(" expr ")"
//! ```
//!
//! so `-x^2` is `-(x^2)` and `2^3^2` is `2^(3^2)`. Recognized functions are
//! `sqrt`, `exp`, `ln`, `sin`, `cos`, `tan` and `abs`.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Function {
    Sqrt,
    Exp,
    Ln,
    Sin,
    Cos,
    Tan,
    Abs,
}

impl Function {
    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sqrt" => Function::Sqrt,
            "exp" => Function::Exp,
            "ln" => Function::Ln,
            "sin" => Function::Sin,
            "cos" => Function::Cos,
            "tan" => Function::Tan,
            "abs" => Function::Abs,
            _ => return None,
        })
    }

    fn apply(self, x: f64) -> f64 {
        match self {
            Function::Sqrt => x.sqrt(),
            Function::Exp => x.exp(),
            Function::Ln => x.ln(),
            Function::Sin => x.sin(),
            Function::Cos => x.cos(),
            Function::Tan => x.tan(),
            Function::Abs => x.abs(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Number(f64),
    Variable(String),
    Neg(Box<Expr>),
    Call(Function, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Number(f64),
    Ident(String),
    Op(char),
    Open,
    Close,
    End,
}

fn tokenize(text: &str) -> Result<Vec<(usize, Token)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut k = 0;
    while k < bytes.len() {
        let c = bytes[k];
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => k += 1,
            b'+' | b'-' | b'*' | b'/' | b'^' => {
                out.push((k, Token::Op(c as char)));
                k += 1;
            }
            b'(' => {
                out.push((k, Token::Open));
                k += 1;
            }
            b')' => {
                out.push((k, Token::Close));
                k += 1;
            }
            b'0'..=b'9' | b'.' => {
                let start = k;
                while k < bytes.len() && (bytes[k].is_ascii_digit() || bytes[k] == b'.') {
                    k += 1;
                }
                if k < bytes.len() && (bytes[k] == b'e' || bytes[k] == b'E') {
                    let mut j = k + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        while j < bytes.len() && bytes[j].is_ascii_digit() {
                            j += 1;
                        }
                        k = j;
                    }
                }
                let lexeme = &text[start..k];
                let value = lexeme
                    .parse::<f64>()
                    .map_err(|_| Error::Syntax { offset: start, message: format!("malformed number `{lexeme}`") })?;
                out.push((start, Token::Number(value)));
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let start = k;
                while k < bytes.len() && (bytes[k].is_ascii_alphanumeric() || bytes[k] == b'_') {
                    k += 1;
                }
                out.push((start, Token::Ident(text[start..k].to_string())));
            }
            _ => {
                let ch = text[k..].chars().next().unwrap_or('\u{fffd}');
                return Err(Error::UnknownCharacter { offset: k, ch });
            }
        }
    }
    out.push((text.len(), Token::End));
    Ok(out)
}

struct Parser {
    tokens: Vec<(usize, Token)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos].1
    }

    fn offset(&self) -> usize {
        self.tokens[self.pos].0
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].1.clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::Syntax { offset: self.offset(), message: message.into() })
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Token::Op('+') => BinaryOp::Add,
                Token::Op('-') => BinaryOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(self.term()?));
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Token::Op('*') => BinaryOp::Mul,
                Token::Op('/') => BinaryOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(self.unary()?));
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        match self.peek() {
            Token::Op('-') => {
                self.bump();
                Ok(Expr::Neg(Box::new(self.unary()?)))
            }
            Token::Op('+') => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.primary()?;
        if matches!(self.peek(), Token::Op('^')) {
            self.bump();
            let exponent = self.unary()?;
            return Ok(Expr::Binary(BinaryOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr> {
        let start = self.offset();
        match self.bump() {
            Token::Number(v) => Ok(Expr::Number(v)),
            Token::Ident(name) => {
                if matches!(self.peek(), Token::Open) {
                    let Some(f) = Function::from_name(&name) else {
                        return Err(Error::Syntax { offset: start, message: format!("unknown function `{name}`") });
                    };
                    self.bump();
                    let arg = self.expr()?;
                    self.expect_close()?;
                    return Ok(Expr::Call(f, Box::new(arg)));
                }
                Ok(Expr::Variable(name))
            }
            Token::Open => {
                let inner = self.expr()?;
                self.expect_close()?;
                Ok(inner)
            }
            Token::End => Err(Error::Syntax { offset: start, message: "unexpected end of input".into() }),
            other => Err(Error::Syntax { offset: start, message: format!("unexpected {}", describe(&other)) }),
        }
    }

    fn expect_close(&mut self) -> Result<()> {
        if matches!(self.peek(), Token::Close) {
            self.bump();
            Ok(())
        } else {
            self.error("expected `)`")
        }
    }
}

fn describe(t: &Token) -> String {
    match t {
        Token::Number(v) => format!("number {v}"),
        Token::Ident(s) => format!("identifier `{s}`"),
        Token::Op(c) => format!("operator `{c}`"),
        Token::Open => "`(`".into(),
        Token::Close => "`)`".into(),
        Token::End => "end of input".into(),
    }
}

/// A parsed limit-state function `g`.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitState {
    expr: Expr,
    source: String,
}

impl LimitState {
    pub fn parse(text: &str) -> Result<Self> {
        if text.trim().is_empty() {
            return Err(Error::Syntax { offset: 0, message: "empty expression".into() });
        }
        let mut p = Parser { tokens: tokenize(text)?, pos: 0 };
        let expr = p.expr()?;
        if !matches!(p.peek(), Token::End) {
            let t = p.peek().clone();
            return p.error(format!("unexpected {}", describe(&t)));
        }
        Ok(Self { expr, source: text.to_string() })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    /// Names of all variables referenced.
    pub fn variables(&self) -> BTreeSet<String> {
        fn walk(e: &Expr, out: &mut BTreeSet<String>) {
            match e {
                Expr::Number(_) => {}
                Expr::Variable(v) => {
                    out.insert(v.clone());
                }
                Expr::Neg(a) | Expr::Call(_, a) => walk(a, out),
                Expr::Binary(_, a, b) => {
                    walk(a, out);
                    walk(b, out);
                }
            }
        }
        let mut out = BTreeSet::new();
        walk(&self.expr, &mut out);
        out
    }

    /// Evaluates with named values; non-finite results are errors.
    pub fn eval(&self, values: &BTreeMap<String, f64>) -> Result<f64> {
        let names: Vec<String> = values.keys().cloned().collect();
        let bound = self.bind(&names, &BTreeMap::new())?;
        let v = bound.eval(&values.values().copied().collect::<Vec<_>>());
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Evaluation(format!("`{}` is not finite at the given point", self.source)))
        }
    }

    /// Resolves every variable to a position in `slots` or to a constant.
    pub fn bind(&self, slots: &[String], constants: &BTreeMap<String, f64>) -> Result<BoundLimitState> {
        fn go(e: &Expr, slots: &[String], constants: &BTreeMap<String, f64>) -> Result<Node> {
            Ok(match e {
                Expr::Number(v) => Node::Const(*v),
                Expr::Variable(name) => match slots.iter().position(|s| s == name) {
                    Some(k) => Node::Slot(k),
                    None => Node::Const(*constants.get(name).ok_or_else(|| Error::UnboundVariable(name.clone()))?),
                },
                Expr::Neg(a) => Node::Neg(Box::new(go(a, slots, constants)?)),
                Expr::Call(f, a) => Node::Call(*f, Box::new(go(a, slots, constants)?)),
                Expr::Binary(op, a, b) => {
                    Node::Binary(*op, Box::new(go(a, slots, constants)?), Box::new(go(b, slots, constants)?))
                }
            })
        }
        Ok(BoundLimitState { root: go(&self.expr, slots, constants)?, arity: slots.len() })
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Const(f64),
    Slot(usize),
    Neg(Box<Node>),
    Call(Function, Box<Node>),
    Binary(BinaryOp, Box<Node>, Box<Node>),
}

impl Node {
    fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Node::Const(v) => *v,
            Node::Slot(k) => x[*k],
            Node::Neg(a) => -a.eval(x),
            Node::Call(f, a) => f.apply(a.eval(x)),
            Node::Binary(op, a, b) => {
                let (a, b) = (a.eval(x), b.eval(x));
                match op {
                    BinaryOp::Add => a + b,
                    BinaryOp::Sub => a - b,
                    BinaryOp::Mul => a * b,
                    BinaryOp::Div => a / b,
                    BinaryOp::Pow => pow(a, b),
                }
            }
        }
    }
}

fn pow(a: f64, b: f64) -> f64 {
    if b.fract() == 0.0 && b.abs() <= i32::MAX as f64 {
        a.powi(b as i32)
    } else {
        a.powf(b)
    }
}

/// A limit state with variables resolved to vector positions.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundLimitState {
    root: Node,
    arity: usize,
}

impl BoundLimitState {
    pub fn arity(&self) -> usize {
        self.arity
    }

    /// May return a non-finite value where `g` is undefined.
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.root.eval(x)
    }
}
