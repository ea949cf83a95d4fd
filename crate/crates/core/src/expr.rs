//! Small arithmetic expressions for coefficient functions in config files.
//!
//! Supported: numbers, `pi`, the variables `t`, `x`, `y`, `u`, the binary
//! operators `+ - * / ^`, unary minus, parentheses and the functions
//! `sin`, `cos`, `exp`, `sqrt`, `abs`.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Var {
    T,
    X,
    Y,
    U,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Func {
    Sin,
    Cos,
    Exp,
    Sqrt,
    Abs,
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Num(f64),
    Var(Var),
    Neg(Box<Node>),
    Bin(char, Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

/// A parsed expression in `t`, `x`, `y` and `u`.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    source: String,
    root: Node,
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Op(char),
}

fn tokenize(src: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            // exponent part, e.g. 1e-3
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            let v = text
                .parse()
                .map_err(|_| Error::Expr(format!("bad number '{text}' in '{src}'")))?;
            out.push(Token::Num(v));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Token::Ident(chars[start..i].iter().collect()));
        } else if "+-*/^()".contains(c) {
            out.push(Token::Op(c));
            i += 1;
        } else {
            return Err(Error::Expr(format!("unexpected character '{c}' in '{src}'")));
        }
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    src: &'a str,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn eat_op(&mut self, op: char) -> bool {
        if self.peek() == Some(&Token::Op(op)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn fail<T>(&self, what: &str) -> Result<T> {
        Err(Error::Expr(format!("{what} at token {} in '{}'", self.pos, self.src)))
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some(Token::Op(c)) if *c == '+' || *c == '-' => *c,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(self.term()?));
        }
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Some(Token::Op(c)) if *c == '*' || *c == '/' => *c,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(self.unary()?));
        }
    }

    fn unary(&mut self) -> Result<Node> {
        if self.eat_op('-') {
            return Ok(Node::Neg(Box::new(self.unary()?)));
        }
        if self.eat_op('+') {
            return self.unary();
        }
        let base = self.atom()?;
        if self.eat_op('^') {
            return Ok(Node::Bin('^', Box::new(base), Box::new(self.unary()?)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node> {
        let Some(tok) = self.peek().cloned() else {
            return self.fail("unexpected end of expression");
        };
        self.pos += 1;
        match tok {
            Token::Num(v) => Ok(Node::Num(v)),
            Token::Op('(') => {
                let inner = self.expr()?;
                if !self.eat_op(')') {
                    return self.fail("missing ')'");
                }
                Ok(inner)
            }
            Token::Ident(name) => {
                let func = match name.as_str() {
                    "sin" => Some(Func::Sin),
                    "cos" => Some(Func::Cos),
                    "exp" => Some(Func::Exp),
                    "sqrt" => Some(Func::Sqrt),
                    "abs" => Some(Func::Abs),
                    _ => None,
                };
                if let Some(func) = func {
                    if !self.eat_op('(') {
                        return self.fail(&format!("'{name}' needs an argument in parentheses"));
                    }
                    let arg = self.expr()?;
                    if !self.eat_op(')') {
                        return self.fail("missing ')'");
                    }
                    return Ok(Node::Call(func, Box::new(arg)));
                }
                match name.as_str() {
                    "t" => Ok(Node::Var(Var::T)),
                    "x" => Ok(Node::Var(Var::X)),
                    "y" => Ok(Node::Var(Var::Y)),
                    "u" => Ok(Node::Var(Var::U)),
                    "pi" => Ok(Node::Num(std::f64::consts::PI)),
                    _ => self.fail(&format!("unknown identifier '{name}'")),
                }
            }
            Token::Op(c) => self.fail(&format!("unexpected '{c}'")),
        }
    }
}

fn eval(node: &Node, t: f64, x: &[f64], u: f64) -> f64 {
    match node {
        Node::Num(v) => *v,
        Node::Var(Var::T) => t,
        Node::Var(Var::X) => x.first().copied().unwrap_or(0.0),
        Node::Var(Var::Y) => x.get(1).copied().unwrap_or(0.0),
        Node::Var(Var::U) => u,
        Node::Neg(a) => -eval(a, t, x, u),
        Node::Bin(op, a, b) => {
            let (a, b) = (eval(a, t, x, u), eval(b, t, x, u));
            match op {
                '+' => a + b,
                '-' => a - b,
                '*' => a * b,
                '/' => a / b,
                _ => a.powf(b),
            }
        }
        Node::Call(f, a) => {
            let a = eval(a, t, x, u);
            match f {
                Func::Sin => a.sin(),
                Func::Cos => a.cos(),
                Func::Exp => a.exp(),
                Func::Sqrt => a.sqrt(),
                Func::Abs => a.abs(),
            }
        }
    }
}

fn mentions(node: &Node, var: Var) -> bool {
    match node {
        Node::Var(v) => *v == var,
        Node::Num(_) => false,
        Node::Neg(a) | Node::Call(_, a) => mentions(a, var),
        Node::Bin(_, a, b) => mentions(a, var) || mentions(b, var),
    }
}

impl Expr {
    pub fn parse(src: &str) -> Result<Self> {
        let mut p = Parser {
            tokens: tokenize(src)?,
            pos: 0,
            src,
        };
        let root = p.expr()?;
        if p.pos != p.tokens.len() {
            return p.fail("trailing input");
        }
        Ok(Self {
            source: src.to_string(),
            root,
        })
    }

    pub fn eval(&self, t: f64, x: &[f64], u: f64) -> f64 {
        eval(&self.root, t, x, u)
    }

    /// True if the expression reads the solution value `u` or time `t`;
    /// initial data may only depend on `x` and `y`.
    pub fn depends_on_state(&self) -> bool {
        mentions(&self.root, Var::U) || mentions(&self.root, Var::T)
    }
}
