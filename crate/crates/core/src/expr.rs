//! Parsing and evaluation of scalar mathematical expressions.
//!
//! Problem definitions are plain text formulas such as
//! `cos(x) - 0.25*sin(2*x) - 0.5*x`. [`parse`] turns such a string into an
//! [`Expression`] against a declared set of variable names, and
//! [`Expression::eval`] computes its value for concrete bindings. Parsing and
//! evaluation are separate steps: an expression is parsed once and evaluated
//! many times.
//!
//! The grammar:
//!
//! ```text
//! expr   := term (('+'|'-') term)*
//! term   := factor (('*'|'/') factor)*
//! factor := '-' factor | power
//! power  := atom ('^' factor)?
//! atom   := NUMBER | NAME | NAME '(' expr ')' | '(' expr ')'
//! ```
//!
//! `^` is right-associative and binds tighter than unary minus, so `-x^2`
//! means `-(x^2)` and `2^3^2` means `2^(3^2)`. Known functions:
//! `sin cos tan exp log sqrt abs`, all unary; `log` is the natural logarithm.
//! Known constants: `pi` and `e`, folded to literals at parse time (a declared
//! variable of the same name shadows the constant). Whitespace is
//! insignificant; numbers accept decimal and scientific notation.
//!
//! Evaluation is plain IEEE double precision. Non-finite results (overflow,
//! `log` of a non-positive value, division by zero) are returned as-is.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

/// Binary operators, in source syntax `+ - * / ^`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinaryOp {
    fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
            BinaryOp::Pow => "^",
        }
    }

    fn apply(self, lhs: f64, rhs: f64) -> f64 {
        match self {
            BinaryOp::Add => lhs + rhs,
            BinaryOp::Sub => lhs - rhs,
            BinaryOp::Mul => lhs * rhs,
            BinaryOp::Div => lhs / rhs,
            BinaryOp::Pow => lhs.powf(rhs),
        }
    }
}

/// The built-in unary functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Function {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
    Abs,
}

impl Function {
    fn from_name(name: &str) -> Option<Function> {
        Some(match name {
            "sin" => Function::Sin,
            "cos" => Function::Cos,
            "tan" => Function::Tan,
            "exp" => Function::Exp,
            "log" => Function::Log,
            "sqrt" => Function::Sqrt,
            "abs" => Function::Abs,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Function::Sin => "sin",
            Function::Cos => "cos",
            Function::Tan => "tan",
            Function::Exp => "exp",
            Function::Log => "log",
            Function::Sqrt => "sqrt",
            Function::Abs => "abs",
        }
    }

    fn apply(self, x: f64) -> f64 {
        match self {
            Function::Sin => x.sin(),
            Function::Cos => x.cos(),
            Function::Tan => x.tan(),
            Function::Exp => x.exp(),
            Function::Log => x.ln(),
            Function::Sqrt => x.sqrt(),
            Function::Abs => x.abs(),
        }
    }
}

/// A parsed expression tree.
///
/// Immutable after parsing; evaluation is pure, so a single tree can be
/// evaluated concurrently from multiple threads.
#[derive(Debug, Clone, PartialEq)]
pub enum Expression {
    /// A numeric literal (constants `pi` and `e` are folded into this).
    Number(f64),
    /// A variable declared at parse time.
    Variable(String),
    /// Unary negation.
    Neg(Box<Expression>),
    /// A binary operation.
    Binary(BinaryOp, Box<Expression>, Box<Expression>),
    /// Application of a built-in function.
    Call(Function, Box<Expression>),
}

/// Errors produced by [`parse`]. Positions are 1-based character offsets.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at position {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("unknown identifier `{name}` at position {position}")]
    UnknownIdentifier { name: String, position: usize },
    #[error("`{name}` is not a function (position {position})")]
    NotAFunction { name: String, position: usize },
    #[error("function `{name}` takes exactly one argument (position {position})")]
    Arity { name: String, position: usize },
}

/// Errors produced by [`Expression::eval`].
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("no binding for variable `{0}`")]
    MissingBinding(String),
}

impl Expression {
    /// Evaluates the expression with the given variable bindings.
    ///
    /// Every variable occurring in the tree must have a binding. Non-finite
    /// results are returned as ordinary values, not trapped.
    pub fn eval(&self, bindings: &[(&str, f64)]) -> Result<f64, EvalError> {
        match self {
            Expression::Number(v) => Ok(*v),
            Expression::Variable(name) => bindings
                .iter()
                .find(|(n, _)| n == name)
                .map(|&(_, v)| v)
                .ok_or_else(|| EvalError::MissingBinding(name.clone())),
            Expression::Neg(inner) => Ok(-inner.eval(bindings)?),
            Expression::Binary(op, lhs, rhs) => {
                Ok(op.apply(lhs.eval(bindings)?, rhs.eval(bindings)?))
            }
            Expression::Call(func, arg) => Ok(func.apply(arg.eval(bindings)?)),
        }
    }

    /// The set of variable names occurring in the tree.
    pub fn variables(&self) -> BTreeSet<&str> {
        let mut set = BTreeSet::new();
        self.collect_variables(&mut set);
        set
    }

    fn collect_variables<'a>(&'a self, set: &mut BTreeSet<&'a str>) {
        match self {
            Expression::Number(_) => {}
            Expression::Variable(name) => {
                set.insert(name.as_str());
            }
            Expression::Neg(inner) => inner.collect_variables(set),
            Expression::Binary(_, lhs, rhs) => {
                lhs.collect_variables(set);
                rhs.collect_variables(set);
            }
            Expression::Call(_, arg) => arg.collect_variables(set),
        }
    }

    // Precedence of this node when printed: + - are 1, * / are 2, unary
    // minus 3, ^ 4, atoms 5. A negative literal prints with a leading minus
    // and therefore behaves like a negation node.
    fn precedence(&self) -> u8 {
        match self {
            Expression::Number(v) if v.is_sign_negative() => 3,
            Expression::Number(_) | Expression::Variable(_) | Expression::Call(..) => 5,
            Expression::Neg(_) => 3,
            Expression::Binary(BinaryOp::Add | BinaryOp::Sub, ..) => 1,
            Expression::Binary(BinaryOp::Mul | BinaryOp::Div, ..) => 2,
            Expression::Binary(BinaryOp::Pow, ..) => 4,
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, min_prec: u8) -> fmt::Result {
        if self.precedence() < min_prec {
            write!(f, "(")?;
            self.fmt_prec(f, 0)?;
            write!(f, ")")
        } else {
            match self {
                Expression::Number(v) => write!(f, "{v}"),
                Expression::Variable(name) => write!(f, "{name}"),
                Expression::Neg(inner) => {
                    write!(f, "-")?;
                    inner.fmt_prec(f, 3)
                }
                Expression::Binary(op, lhs, rhs) => {
                    // Left-associative operators keep an equal-precedence
                    // child bare on the left only; `^` keeps its right-hand
                    // side bare down to factor level.
                    let (lmin, rmin) = match op {
                        BinaryOp::Add | BinaryOp::Sub => (1, 2),
                        BinaryOp::Mul | BinaryOp::Div => (2, 3),
                        BinaryOp::Pow => (5, 3),
                    };
                    lhs.fmt_prec(f, lmin)?;
                    write!(f, "{}", op.symbol())?;
                    rhs.fmt_prec(f, rmin)
                }
                Expression::Call(func, arg) => {
                    write!(f, "{}(", func.name())?;
                    arg.fmt_prec(f, 0)?;
                    write!(f, ")")
                }
            }
        }
    }
}

impl fmt::Display for Expression {
    /// Prints the expression so that re-parsing it yields the same tree.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Number(f64),
    Name(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Number(v) => write!(f, "number `{v}`"),
            Tok::Name(n) => write!(f, "`{n}`"),
            Tok::Plus => write!(f, "`+`"),
            Tok::Minus => write!(f, "`-`"),
            Tok::Star => write!(f, "`*`"),
            Tok::Slash => write!(f, "`/`"),
            Tok::Caret => write!(f, "`^`"),
            Tok::LParen => write!(f, "`(`"),
            Tok::RParen => write!(f, "`)`"),
            Tok::Comma => write!(f, "`,`"),
        }
    }
}

struct Token {
    tok: Tok,
    pos: usize,
}

fn tokenize(source: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = source.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let pos = i + 1;
        match c {
            _ if c.is_whitespace() => i += 1,
            '+' | '-' | '*' | '/' | '^' | '(' | ')' | ',' => {
                let tok = match c {
                    '+' => Tok::Plus,
                    '-' => Tok::Minus,
                    '*' => Tok::Star,
                    '/' => Tok::Slash,
                    '^' => Tok::Caret,
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    _ => Tok::Comma,
                };
                tokens.push(Token { tok, pos });
                i += 1;
            }
            '0'..='9' | '.' => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                if i < chars.len() && chars[i] == '.' {
                    i += 1;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                if chars[start..i].iter().all(|&c| c == '.') {
                    return Err(ParseError::Syntax {
                        position: pos,
                        message: "malformed number".into(),
                    });
                }
                // Consume an exponent only when it is actually one; a bare
                // trailing `e` stays a separate token.
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
                let value = text.parse::<f64>().map_err(|_| ParseError::Syntax {
                    position: pos,
                    message: format!("malformed number `{text}`"),
                })?;
                tokens.push(Token {
                    tok: Tok::Number(value),
                    pos,
                });
            }
            _ if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                let name: String = chars[start..i].iter().collect();
                tokens.push(Token {
                    tok: Tok::Name(name),
                    pos,
                });
            }
            other => {
                return Err(ParseError::Syntax {
                    position: pos,
                    message: format!("unexpected character `{other}`"),
                })
            }
        }
    }
    Ok(tokens)
}

struct Parser<'a> {
    tokens: Vec<Token>,
    idx: usize,
    vars: &'a [&'a str],
    end_pos: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.idx)
    }

    fn advance(&mut self) -> Option<&Token> {
        let t = self.tokens.get(self.idx);
        if t.is_some() {
            self.idx += 1;
        }
        t
    }

    fn unexpected(&self, expected: &str) -> ParseError {
        match self.peek() {
            Some(t) => ParseError::Syntax {
                position: t.pos,
                message: format!("expected {expected}, found {}", t.tok),
            },
            None => ParseError::Syntax {
                position: self.end_pos,
                message: format!("expected {expected}, found end of input"),
            },
        }
    }

    fn expr(&mut self) -> Result<Expression, ParseError> {
        let mut lhs = self.term()?;
        while let Some(op) = self.peek().and_then(|t| match t.tok {
            Tok::Plus => Some(BinaryOp::Add),
            Tok::Minus => Some(BinaryOp::Sub),
            _ => None,
        }) {
            self.advance();
            let rhs = self.term()?;
            lhs = Expression::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expression, ParseError> {
        let mut lhs = self.factor()?;
        while let Some(op) = self.peek().and_then(|t| match t.tok {
            Tok::Star => Some(BinaryOp::Mul),
            Tok::Slash => Some(BinaryOp::Div),
            _ => None,
        }) {
            self.advance();
            let rhs = self.factor()?;
            lhs = Expression::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Expression, ParseError> {
        if matches!(self.peek(), Some(t) if t.tok == Tok::Minus) {
            self.advance();
            Ok(Expression::Neg(Box::new(self.factor()?)))
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Expression, ParseError> {
        let base = self.atom()?;
        if matches!(self.peek(), Some(t) if t.tok == Tok::Caret) {
            self.advance();
            let exponent = self.factor()?;
            Ok(Expression::Binary(
                BinaryOp::Pow,
                Box::new(base),
                Box::new(exponent),
            ))
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<Expression, ParseError> {
        let (tok, pos) = match self.advance() {
            Some(t) => (t.tok.clone(), t.pos),
            None => {
                return Err(ParseError::Syntax {
                    position: self.end_pos,
                    message: "expected an operand, found end of input".into(),
                })
            }
        };
        match tok {
            Tok::Number(v) => Ok(Expression::Number(v)),
            Tok::LParen => {
                let inner = self.expr()?;
                match self.peek() {
                    Some(t) if t.tok == Tok::RParen => {
                        self.advance();
                        Ok(inner)
                    }
                    _ => Err(self.unexpected("`)`")),
                }
            }
            Tok::Name(name) => {
                if matches!(self.peek(), Some(t) if t.tok == Tok::LParen) {
                    self.call(name, pos)
                } else if self.vars.contains(&name.as_str()) {
                    Ok(Expression::Variable(name))
                } else if name == "pi" {
                    Ok(Expression::Number(std::f64::consts::PI))
                } else if name == "e" {
                    Ok(Expression::Number(std::f64::consts::E))
                } else if Function::from_name(&name).is_some() {
                    Err(ParseError::Syntax {
                        position: pos,
                        message: format!("function `{name}` needs a parenthesized argument"),
                    })
                } else {
                    Err(ParseError::UnknownIdentifier {
                        name,
                        position: pos,
                    })
                }
            }
            other => Err(ParseError::Syntax {
                position: pos,
                message: format!("expected an operand, found {other}"),
            }),
        }
    }

    fn call(&mut self, name: String, pos: usize) -> Result<Expression, ParseError> {
        let func = match Function::from_name(&name) {
            Some(f) => f,
            None if self.vars.contains(&name.as_str()) => {
                return Err(ParseError::NotAFunction {
                    name,
                    position: pos,
                })
            }
            None => {
                return Err(ParseError::UnknownIdentifier {
                    name,
                    position: pos,
                })
            }
        };
        self.advance(); // consume `(`
        if matches!(self.peek(), Some(t) if t.tok == Tok::RParen) {
            return Err(ParseError::Arity {
                name,
                position: pos,
            });
        }
        let arg = self.expr()?;
        match self.peek() {
            Some(t) if t.tok == Tok::RParen => {
                self.advance();
                Ok(Expression::Call(func, Box::new(arg)))
            }
            Some(t) if t.tok == Tok::Comma => Err(ParseError::Arity {
                name,
                position: t.pos,
            }),
            _ => Err(self.unexpected("`)`")),
        }
    }
}

/// Parses `source` into an [`Expression`].
///
/// `allowed_vars` declares the variable names the expression may reference;
/// any other bare identifier must be a known constant, and any applied
/// identifier must be a known function.
pub fn parse(source: &str, allowed_vars: &[&str]) -> Result<Expression, ParseError> {
    let tokens = tokenize(source)?;
    if tokens.is_empty() {
        return Err(ParseError::Syntax {
            position: 1,
            message: "empty expression".into(),
        });
    }
    let mut parser = Parser {
        tokens,
        idx: 0,
        vars: allowed_vars,
        end_pos: source.chars().count() + 1,
    };
    let expression = parser.expr()?;
    if let Some(t) = parser.peek() {
        return Err(ParseError::Syntax {
            position: t.pos,
            message: format!("unexpected {} after the expression", t.tok),
        });
    }
    Ok(expression)
}
