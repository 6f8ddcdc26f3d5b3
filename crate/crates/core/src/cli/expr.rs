//! Arithmetic expressions over one variable with complex evaluation.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := ('-' | '+') unary | power
//! power   := primary ('^' unary)?
//! primary := number | 'i' | 'pi' | var | func '(' expr ')' | '(' expr ')'
//! ```

use std::fmt;
use std::sync::Arc;

use crate::chebfun::C64;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sinh,
    Cosh,
    Tanh,
    Sech,
    Sqrt,
    Abs,
}

impl Func {
    pub const ALL: [Func; 11] = [
        Func::Sin,
        Func::Cos,
        Func::Tan,
        Func::Exp,
        Func::Log,
        Func::Sinh,
        Func::Cosh,
        Func::Tanh,
        Func::Sech,
        Func::Sqrt,
        Func::Abs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Tanh => "tanh",
            Func::Sech => "sech",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
        }
    }

    fn from_name(s: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == s)
    }

    fn apply(self, z: C64) -> C64 {
        match self {
            Func::Sin => z.sin(),
            Func::Cos => z.cos(),
            Func::Tan => z.tan(),
            Func::Exp => z.exp(),
            Func::Log => z.ln(),
            Func::Sinh => z.sinh(),
            Func::Cosh => z.cosh(),
            Func::Tanh => z.tanh(),
            Func::Sech => z.cosh().inv(),
            Func::Sqrt => z.sqrt(),
            Func::Abs => C64::new(z.norm(), 0.0),
        }
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
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    /// The imaginary unit `i`.
    Imag,
    Pi,
    Var,
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn eval(&self, v: C64) -> C64 {
        match self {
            Expr::Num(x) => C64::new(*x, 0.0),
            Expr::Imag => C64::new(0.0, 1.0),
            Expr::Pi => C64::new(std::f64::consts::PI, 0.0),
            Expr::Var => v,
            Expr::Neg(e) => -e.eval(v),
            Expr::Call(f, e) => f.apply(e.eval(v)),
            Expr::Bin(op, a, b) => {
                let (a, b) = (a.eval(v), b.eval(v));
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => a / b,
                    BinOp::Pow => pow(a, b),
                }
            }
        }
    }

    /// True when the expression does not mention the variable.
    pub fn is_constant(&self) -> bool {
        match self {
            Expr::Var => false,
            Expr::Num(_) | Expr::Imag | Expr::Pi => true,
            Expr::Neg(e) | Expr::Call(_, e) => e.is_constant(),
            Expr::Bin(_, a, b) => a.is_constant() && b.is_constant(),
        }
    }
}

fn pow(a: C64, b: C64) -> C64 {
    // integer powers exactly, so (-2)^2 stays real
    if b.im == 0.0 && b.re.fract() == 0.0 && b.re.abs() <= 64.0 {
        return a.powi(b.re as i32);
    }
    if a == C64::new(0.0, 0.0) {
        return if b.re > 0.0 { a } else { C64::new(f64::NAN, f64::NAN) };
    }
    a.powc(b)
}

/// Prints with every compound subexpression parenthesized; reparsing gives
/// the same tree.
struct Printer<'a> {
    e: &'a Expr,
    var: &'a str,
}

impl fmt::Display for Printer<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sub = |e| Printer { e, var: self.var };
        match self.e {
            Expr::Num(x) => write!(f, "{x:?}"),
            Expr::Imag => f.write_str("i"),
            Expr::Pi => f.write_str("pi"),
            Expr::Var => f.write_str(self.var),
            Expr::Neg(e) => write!(f, "(-{})", sub(e)),
            Expr::Call(func, e) => write!(f, "{}({})", func.name(), sub(e)),
            Expr::Bin(op, a, b) => write!(f, "({} {} {})", sub(a), op.symbol(), sub(b)),
        }
    }
}

/// A parsed expression together with its variable name.
#[derive(Debug, Clone, PartialEq)]
pub struct Expression {
    pub expr: Expr,
    pub var: String,
}

impl Expression {
    pub fn parse(text: &str, var: &str) -> Result<Self> {
        let expr = Parser::new(text, var).parse()?;
        Ok(Self {
            expr,
            var: var.to_string(),
        })
    }

    pub fn eval(&self, v: C64) -> C64 {
        self.expr.eval(v)
    }

    pub fn eval_real(&self, x: f64) -> C64 {
        self.expr.eval(C64::new(x, 0.0))
    }

    pub fn is_constant(&self) -> bool {
        self.expr.is_constant()
    }

    /// `f(x)` as a shareable closure.
    pub fn into_fn(self) -> Arc<dyn Fn(f64) -> C64 + Send + Sync> {
        Arc::new(move |x| self.eval_real(x))
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        Printer {
            e: &self.expr,
            var: &self.var,
        }
        .fmt(f)
    }
}

/// Parses and evaluates a constant expression such as `pi/2` or `3+4*i`.
pub fn constant(text: &str) -> Result<C64> {
    let e = Expression::parse(text, "x")?;
    if !e.is_constant() {
        return Err(Error::Parse {
            position: 0,
            message: format!("'{text}' must be a constant"),
        });
    }
    Ok(e.eval(C64::new(0.0, 0.0)))
}

/// Real constant expression.
pub fn real_constant(text: &str) -> Result<f64> {
    let z = constant(text)?;
    if z.im != 0.0 || !z.re.is_finite() {
        return Err(Error::Parse {
            position: 0,
            message: format!("'{text}' must be a finite real number"),
        });
    }
    Ok(z.re)
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    End,
}

struct Parser<'a> {
    src: &'a str,
    var: &'a str,
    pos: usize,
    tok: Tok,
    tok_pos: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str, var: &'a str) -> Self {
        Self {
            src,
            var,
            pos: 0,
            tok: Tok::End,
            tok_pos: 0,
        }
    }

    fn err(&self, message: impl Into<String>) -> Error {
        Error::Parse {
            position: self.tok_pos,
            message: message.into(),
        }
    }

    fn describe(&self) -> String {
        match &self.tok {
            Tok::Num(x) => format!("number {x}"),
            Tok::Ident(s) => format!("'{s}'"),
            Tok::Op(c) => format!("'{c}'"),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::End => "end of input".into(),
        }
    }

    fn advance(&mut self) -> Result<()> {
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() && bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        self.tok_pos = self.pos;
        if self.pos >= bytes.len() {
            self.tok = Tok::End;
            return Ok(());
        }
        let c = bytes[self.pos];
        if c.is_ascii_digit() || c == b'.' {
            let start = self.pos;
            while self.pos < bytes.len() && (bytes[self.pos].is_ascii_digit() || bytes[self.pos] == b'.') {
                self.pos += 1;
            }
            if self.pos < bytes.len() && (bytes[self.pos] == b'e' || bytes[self.pos] == b'E') {
                let mut k = self.pos + 1;
                if k < bytes.len() && (bytes[k] == b'+' || bytes[k] == b'-') {
                    k += 1;
                }
                if k < bytes.len() && bytes[k].is_ascii_digit() {
                    while k < bytes.len() && bytes[k].is_ascii_digit() {
                        k += 1;
                    }
                    self.pos = k;
                }
            }
            let text = &self.src[start..self.pos];
            let v: f64 = text
                .parse()
                .map_err(|_| self.err(format!("malformed number '{text}'")))?;
            if !v.is_finite() {
                return Err(self.err(format!("number '{text}' is out of range")));
            }
            self.tok = Tok::Num(v);
        } else if c.is_ascii_alphabetic() || c == b'_' {
            let start = self.pos;
            while self.pos < bytes.len() && (bytes[self.pos].is_ascii_alphanumeric() || bytes[self.pos] == b'_') {
                self.pos += 1;
            }
            self.tok = Tok::Ident(self.src[start..self.pos].to_string());
        } else {
            self.pos += 1;
            self.tok = match c {
                b'+' | b'-' | b'*' | b'/' | b'^' => Tok::Op(c as char),
                b'(' => Tok::LParen,
                b')' => Tok::RParen,
                _ => {
                    let ch = self.src[self.tok_pos..].chars().next().unwrap_or('?');
                    return Err(self.err(format!("unexpected character '{ch}'")));
                }
            };
        }
        Ok(())
    }

    fn parse(mut self) -> Result<Expr> {
        if self.src.trim().is_empty() {
            return Err(self.err("empty expression"));
        }
        self.advance()?;
        let e = self.expr()?;
        if self.tok != Tok::End {
            return Err(self.err(format!("expected operator or end of input, found {}", self.describe())));
        }
        Ok(e)
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        while let Tok::Op(c @ ('+' | '-')) = self.tok {
            self.advance()?;
            let rhs = self.term()?;
            let op = if c == '+' { BinOp::Add } else { BinOp::Sub };
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        while let Tok::Op(c @ ('*' | '/')) = self.tok {
            self.advance()?;
            let rhs = self.unary()?;
            let op = if c == '*' { BinOp::Mul } else { BinOp::Div };
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr> {
        match self.tok {
            Tok::Op('-') => {
                self.advance()?;
                Ok(Expr::Neg(Box::new(self.unary()?)))
            }
            Tok::Op('+') => {
                self.advance()?;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.primary()?;
        if self.tok == Tok::Op('^') {
            self.advance()?;
            let exp = self.unary()?;
            return Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr> {
        match self.tok.clone() {
            Tok::Num(v) => {
                self.advance()?;
                Ok(Expr::Num(v))
            }
            Tok::LParen => {
                self.advance()?;
                let e = self.expr()?;
                self.expect_rparen()?;
                Ok(e)
            }
            Tok::Ident(name) => {
                let at = self.tok_pos;
                self.advance()?;
                if let Some(func) = Func::from_name(&name) {
                    if self.tok != Tok::LParen {
                        return Err(self.err(format!("expected '(' after '{name}', found {}", self.describe())));
                    }
                    self.advance()?;
                    let arg = self.expr()?;
                    self.expect_rparen()?;
                    return Ok(Expr::Call(func, Box::new(arg)));
                }
                match name.as_str() {
                    "i" => Ok(Expr::Imag),
                    "pi" => Ok(Expr::Pi),
                    n if n == self.var => Ok(Expr::Var),
                    _ => {
                        self.tok_pos = at;
                        Err(Error::UnknownIdentifier(name))
                    }
                }
            }
            _ => Err(self.err(format!(
                "expected a number, identifier or '(', found {}",
                self.describe()
            ))),
        }
    }

    fn expect_rparen(&mut self) -> Result<()> {
        if self.tok != Tok::RParen {
            return Err(self.err(format!("expected ')', found {}", self.describe())));
        }
        self.advance()
    }
}
