//! Arithmetic expressions over variable and parameter names.
//!
//! Precedence, tightest first: `^` (right-associative, `**` is accepted as a
//! synonym), unary minus, `* /`, `+ -`. `heav(0)` is 1.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use indexmap::IndexMap;
use log::warn;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExprError {
    #[error("syntax error at position {pos}: {msg}")]
    SyntaxError { pos: usize, msg: String },
    #[error("unknown function `{0}`")]
    UnknownFunction(String),
    #[error("`{name}` takes {expected} argument(s), got {found}")]
    ArityError { name: String, expected: usize, found: usize },
    #[error("unbound identifier `{0}`")]
    UnboundIdentifier(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Tanh,
    Exp,
    Log,
    Sqrt,
    Abs,
    Min,
    Max,
    Heav,
}

impl Func {
    pub const ALL: [Func; 11] = [
        Func::Sin,
        Func::Cos,
        Func::Tan,
        Func::Tanh,
        Func::Exp,
        Func::Log,
        Func::Sqrt,
        Func::Abs,
        Func::Min,
        Func::Max,
        Func::Heav,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Tanh => "tanh",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
            Func::Min => "min",
            Func::Max => "max",
            Func::Heav => "heav",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            Func::Min | Func::Max => 2,
            _ => 1,
        }
    }

    fn from_name(s: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == s)
    }

    fn apply(self, a: &[f64]) -> f64 {
        let x = a[0];
        let y = match self {
            Func::Sin => x.sin(),
            Func::Cos => x.cos(),
            Func::Tan => x.tan(),
            Func::Tanh => x.tanh(),
            Func::Exp => x.exp(),
            Func::Log => x.ln(),
            Func::Sqrt => x.sqrt(),
            Func::Abs => x.abs(),
            Func::Min => x.min(a[1]),
            Func::Max => x.max(a[1]),
            Func::Heav => {
                if x >= 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        };
        if y.is_nan() && a.iter().all(|v| !v.is_nan()) {
            warn!("{}({:?}) is outside its domain, result is NaN", self.name(), a);
        }
        y
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "^",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(String),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

/// Name lookup used by [`Expr::eval`].
pub trait Environment {
    fn get(&self, name: &str) -> Option<f64>;
    /// Every bound name, for the case-insensitive fallback.
    fn names(&self) -> Vec<String>;
}

macro_rules! map_env {
    ($t:ty) => {
        impl Environment for $t {
            fn get(&self, name: &str) -> Option<f64> {
                <$t>::get(self, name).copied()
            }
            fn names(&self) -> Vec<String> {
                self.keys().cloned().collect()
            }
        }
    };
}
map_env!(HashMap<String, f64>);
map_env!(BTreeMap<String, f64>);
map_env!(IndexMap<String, f64>);

fn resolve(env: &dyn Environment, name: &str) -> Result<f64, ExprError> {
    if let Some(v) = env.get(name) {
        return Ok(v);
    }
    for k in env.names() {
        if k.eq_ignore_ascii_case(name) {
            warn!("identifier `{}` matched `{}` ignoring case", name, k);
            return env.get(&k).ok_or_else(|| ExprError::UnboundIdentifier(name.into()));
        }
    }
    Err(ExprError::UnboundIdentifier(name.to_string()))
}

impl Expr {
    pub fn eval(&self, env: &dyn Environment) -> Result<f64, ExprError> {
        Ok(match self {
            Expr::Num(x) => *x,
            Expr::Var(name) => resolve(env, name)?,
            Expr::Neg(e) => -e.eval(env)?,
            Expr::Bin(op, a, b) => {
                let (a, b) = (a.eval(env)?, b.eval(env)?);
                binop(*op, a, b)
            }
            Expr::Call(f, args) => {
                let vals = args.iter().map(|a| a.eval(env)).collect::<Result<Vec<_>, _>>()?;
                f.apply(&vals)
            }
        })
    }

    /// Identifiers in first-appearance order.
    pub fn identifiers(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_idents(&mut out);
        out
    }

    fn collect_idents(&self, out: &mut Vec<String>) {
        match self {
            Expr::Num(_) => {}
            Expr::Var(n) => {
                if !out.contains(n) {
                    out.push(n.clone());
                }
            }
            Expr::Neg(e) => e.collect_idents(out),
            Expr::Bin(_, a, b) => {
                a.collect_idents(out);
                b.collect_idents(out);
            }
            Expr::Call(_, args) => args.iter().for_each(|a| a.collect_idents(out)),
        }
    }

    /// Resolve identifiers against `names` once, so evaluation over many
    /// samples is a slice lookup.
    pub fn bind(&self, names: &[&str]) -> Result<Bound, ExprError> {
        Ok(Bound(self.bind_inner(names)?))
    }

    fn bind_inner(&self, names: &[&str]) -> Result<Node, ExprError> {
        Ok(match self {
            Expr::Num(x) => Node::Num(*x),
            Expr::Var(n) => {
                let i = crate::model::lookup(names, n, "identifier")
                    .ok_or_else(|| ExprError::UnboundIdentifier(n.clone()))?;
                Node::Slot(i)
            }
            Expr::Neg(e) => Node::Neg(Box::new(e.bind_inner(names)?)),
            Expr::Bin(op, a, b) => Node::Bin(*op, Box::new(a.bind_inner(names)?), Box::new(b.bind_inner(names)?)),
            Expr::Call(f, args) => Node::Call(*f, args.iter().map(|a| a.bind_inner(names)).collect::<Result<_, _>>()?),
        })
    }
}

fn binop(op: BinOp, a: f64, b: f64) -> f64 {
    match op {
        BinOp::Add => a + b,
        BinOp::Sub => a - b,
        BinOp::Mul => a * b,
        BinOp::Div => a / b,
        BinOp::Pow => {
            let y = a.powf(b);
            if y.is_nan() && !a.is_nan() && !b.is_nan() {
                warn!("{}^{} is outside its domain, result is NaN", a, b);
            }
            y
        }
    }
}

#[derive(Debug, Clone)]
enum Node {
    Num(f64),
    Slot(usize),
    Neg(Box<Node>),
    Bin(BinOp, Box<Node>, Box<Node>),
    Call(Func, Vec<Node>),
}

/// An expression whose identifiers are positions into a value slice.
#[derive(Debug, Clone)]
pub struct Bound(Node);

impl Bound {
    pub fn eval(&self, values: &[f64]) -> f64 {
        fn go(n: &Node, v: &[f64]) -> f64 {
            match n {
                Node::Num(x) => *x,
                Node::Slot(i) => v[*i],
                Node::Neg(e) => -go(e, v),
                Node::Bin(op, a, b) => binop(*op, go(a, v), go(b, v)),
                Node::Call(f, args) => {
                    let mut buf = [0.0; 2];
                    for (k, a) in args.iter().enumerate() {
                        buf[k] = go(a, v);
                    }
                    f.apply(&buf[..args.len()])
                }
            }
        }
        go(&self.0, values)
    }
}

impl fmt::Display for Expr {
    /// Fully parenthesized, so the printed text re-parses to the same tree
    /// up to negative literals.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(x) => {
                if *x < 0.0 || (*x == 0.0 && x.is_sign_negative()) {
                    write!(f, "(-{:?})", -x)
                } else {
                    write!(f, "{:?}", x)
                }
            }
            Expr::Var(n) => write!(f, "{}", n),
            Expr::Neg(e) => write!(f, "(-{})", e),
            Expr::Bin(op, a, b) => write!(f, "({}{}{})", a, op.symbol(), b),
            Expr::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (k, a) in args.iter().enumerate() {
                    if k > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{}", a)?;
                }
                write!(f, ")")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    Comma,
    End,
}

fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>, ExprError> {
    let b = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < b.len() {
        let c = b[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if c.is_ascii_digit() || (c == '.' && b.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            while i < b.len() && (b[i].is_ascii_digit() || b[i] == b'.') {
                i += 1;
            }
            if i < b.len() && (b[i] == b'e' || b[i] == b'E') {
                let mut j = i + 1;
                if j < b.len() && (b[j] == b'+' || b[j] == b'-') {
                    j += 1;
                }
                if j < b.len() && b[j].is_ascii_digit() {
                    while j < b.len() && b[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let s = &text[start..i];
            let x = s.parse().map_err(|_| ExprError::SyntaxError { pos: start, msg: format!("bad number `{}`", s) })?;
            out.push((Tok::Num(x), start));
        } else if c.is_ascii_alphabetic() || c == '_' {
            while i < b.len() && (b[i].is_ascii_alphanumeric() || b[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Ident(text[start..i].to_string()), start));
        } else {
            i += 1;
            let t = match c {
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                ',' => Tok::Comma,
                '*' if b.get(i) == Some(&b'*') => {
                    i += 1;
                    Tok::Op('^')
                }
                '+' | '-' | '*' | '/' | '^' => Tok::Op(c),
                _ => return Err(ExprError::SyntaxError { pos: start, msg: format!("unexpected character `{}`", c) }),
            };
            out.push((t, start));
        }
    }
    out.push((Tok::End, text.len()));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    k: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.k].0
    }

    fn pos(&self) -> usize {
        self.toks[self.k].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.k].0.clone();
        if self.k + 1 < self.toks.len() {
            self.k += 1;
        }
        t
    }

    fn fail<T>(&self, msg: &str) -> Result<T, ExprError> {
        Err(ExprError::SyntaxError { pos: self.pos(), msg: msg.to_string() })
    }

    fn sum(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.product()?;
        while let Tok::Op(c @ ('+' | '-')) = *self.peek() {
            self.bump();
            let rhs = self.product()?;
            let op = if c == '+' { BinOp::Add } else { BinOp::Sub };
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn product(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.unary()?;
        while let Tok::Op(c @ ('*' | '/')) = *self.peek() {
            self.bump();
            let rhs = self.unary()?;
            let op = if c == '*' { BinOp::Mul } else { BinOp::Div };
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        match self.peek() {
            Tok::Op('-') => {
                self.bump();
                Ok(Expr::Neg(Box::new(self.unary()?)))
            }
            Tok::Op('+') => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.primary()?;
        if *self.peek() == Tok::Op('^') {
            self.bump();
            // exponent may carry its own sign: 2^-1
            let exp = self.unary()?;
            return Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, ExprError> {
        let pos = self.pos();
        match self.bump() {
            Tok::Num(x) => Ok(Expr::Num(x)),
            Tok::Ident(name) => {
                if *self.peek() != Tok::LParen {
                    return Ok(Expr::Var(name));
                }
                let func = Func::from_name(&name).ok_or_else(|| ExprError::UnknownFunction(name.clone()))?;
                self.bump();
                let mut args = Vec::new();
                if *self.peek() != Tok::RParen {
                    loop {
                        args.push(self.sum()?);
                        if *self.peek() == Tok::Comma {
                            self.bump();
                        } else {
                            break;
                        }
                    }
                }
                if *self.peek() != Tok::RParen {
                    return self.fail("expected `)`");
                }
                self.bump();
                if args.len() != func.arity() {
                    return Err(ExprError::ArityError { name, expected: func.arity(), found: args.len() });
                }
                Ok(Expr::Call(func, args))
            }
            Tok::LParen => {
                let e = self.sum()?;
                if *self.peek() != Tok::RParen {
                    return self.fail("expected `)`");
                }
                self.bump();
                Ok(e)
            }
            _ => Err(ExprError::SyntaxError { pos, msg: "expected a number, name or `(`".to_string() }),
        }
    }
}

pub fn parse_expr(text: &str) -> Result<Expr, ExprError> {
    let mut p = Parser { toks: tokenize(text)?, k: 0 };
    let e = p.sum()?;
    if *p.peek() != Tok::End {
        return p.fail("unexpected trailing input");
    }
    Ok(e)
}

pub fn eval_expr(e: &Expr, env: &dyn Environment) -> Result<f64, ExprError> {
    e.eval(env)
}
