//! A small smooth expression language for family functions and vector fields.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := unary ('^' factor)?
//! unary  := '-'? atom
//! atom   := number | ident | ident '(' expr (',' expr)* ')' | '(' expr ')'
//! ```
//!
//! Binary operators are left-associative, `^` is right-associative and binds a
//! leading minus to its base (`-a^2` is `(-a)^2`). Variables are `s1, s2, ...`
//! (family arguments), `x1, x2, ...` (point coordinates) and `y1, y2, ...`
//! (tangent coordinates). The only functions are `sqrt`, `exp` and `log`;
//! `abs`, `min` and `max` are deliberately absent so every expression stays
//! smooth on its domain.

use std::fmt;

use thiserror::Error;

use crate::ad::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("syntax error at byte {offset}: expected {}, found {found}", expected.join(" | "))]
    Syntax {
        offset: usize,
        expected: Vec<String>,
        found: String,
    },
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },
    #[error("`{name}` at byte {offset} takes {expected} argument(s), found {found}")]
    Arity {
        name: String,
        offset: usize,
        expected: usize,
        found: usize,
    },
    #[error("variable `{name}` is not available here (allowed: {allowed})")]
    DisallowedVariable { name: String, allowed: String },
    #[error("empty expression")]
    Empty,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VarFamily {
    S,
    X,
    Y,
}

/// A variable reference such as `s2` or `y10` (indices are 1-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Var {
    pub family: VarFamily,
    pub index: usize,
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self.family {
            VarFamily::S => 's',
            VarFamily::X => 'x',
            VarFamily::Y => 'y',
        };
        write!(f, "{c}{}", self.index)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sqrt,
    Exp,
    Log,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Sqrt => "sqrt",
            Func::Exp => "exp",
            Func::Log => "log",
        }
    }

    fn lookup(name: &str) -> Option<Func> {
        match name {
            "sqrt" => Some(Func::Sqrt),
            "exp" => Some(Func::Exp),
            "log" => Some(Func::Log),
            _ => None,
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

/// Parsed expression. Numeric literals are finite and non-negative; negation
/// is always an explicit [`Expr::Neg`] node.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(Var),
    Neg(Box<Expr>),
    Call(Func, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
}

/// Number of variables of each family an expression may reference.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct VarSet {
    pub s: usize,
    pub x: usize,
    pub y: usize,
}

impl VarSet {
    pub fn family_args(count: usize) -> Self {
        VarSet { s: count, x: 0, y: 0 }
    }

    pub fn tangent(dim: usize) -> Self {
        VarSet { s: 0, x: 0, y: dim }
    }

    pub fn point(dim: usize) -> Self {
        VarSet { s: 0, x: dim, y: 0 }
    }

    pub fn point_tangent(dim: usize) -> Self {
        VarSet { s: 0, x: dim, y: dim }
    }

    fn allows(&self, v: Var) -> bool {
        let limit = match v.family {
            VarFamily::S => self.s,
            VarFamily::X => self.x,
            VarFamily::Y => self.y,
        };
        v.index >= 1 && v.index <= limit
    }

    fn describe(&self) -> String {
        let mut parts = Vec::new();
        for (c, k) in [('s', self.s), ('x', self.x), ('y', self.y)] {
            if k > 0 {
                parts.push(format!("{c}1..{c}{k}"));
            }
        }
        if parts.is_empty() {
            "none".to_string()
        } else {
            parts.join(", ")
        }
    }
}

impl Expr {
    /// Evaluate with variables supplied by `lookup`.
    pub fn eval<D: Scalar>(&self, lookup: &impl Fn(Var) -> D) -> D {
        match self {
            Expr::Num(v) => D::from(*v),
            Expr::Var(v) => lookup(*v),
            Expr::Neg(a) => -a.eval(lookup),
            Expr::Call(f, a) => {
                let a = a.eval(lookup);
                match f {
                    Func::Sqrt => a.sqrt(),
                    Func::Exp => a.exp(),
                    Func::Log => a.ln(),
                }
            }
            Expr::Binary(op, a, b) => {
                if *op == BinOp::Pow {
                    return pow(a.eval(lookup), b, lookup);
                }
                let a = a.eval(lookup);
                let b = b.eval(lookup);
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => a / b,
                    BinOp::Pow => unreachable!(),
                }
            }
        }
    }

    /// Evaluate an expression over `s1..sk` bound to `args`.
    pub fn eval_args<D: Scalar>(&self, args: &[D]) -> D {
        self.eval(&|v: Var| args[v.index - 1])
    }

    /// Evaluate an expression over `x1..` and `y1..`.
    pub fn eval_point_tangent<D: Scalar>(&self, x: &[D], y: &[D]) -> D {
        self.eval(&|v: Var| match v.family {
            VarFamily::X => x[v.index - 1],
            VarFamily::Y => y[v.index - 1],
            VarFamily::S => D::zero(),
        })
    }

    pub fn variables(&self) -> Vec<Var> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut Vec<Var>) {
        match self {
            Expr::Num(_) => {}
            Expr::Var(v) => {
                if !out.contains(v) {
                    out.push(*v)
                }
            }
            Expr::Neg(a) | Expr::Call(_, a) => a.collect_vars(out),
            Expr::Binary(_, a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    /// Reject variables outside `allowed`.
    pub fn check_vars(&self, allowed: &VarSet) -> Result<(), ExprError> {
        for v in self.variables() {
            if !allowed.allows(v) {
                return Err(ExprError::DisallowedVariable {
                    name: v.to_string(),
                    allowed: allowed.describe(),
                });
            }
        }
        Ok(())
    }

    pub fn depth(&self) -> usize {
        match self {
            Expr::Num(_) | Expr::Var(_) => 1,
            Expr::Neg(a) | Expr::Call(_, a) => 1 + a.depth(),
            Expr::Binary(_, a, b) => 1 + a.depth().max(b.depth()),
        }
    }
}

fn pow<D: Scalar>(base: D, exponent: &Expr, lookup: &impl Fn(Var) -> D) -> D {
    if let Some(c) = exponent.constant() {
        if c.fract() == 0.0 && c.abs() <= 64.0 {
            return base.powi(c as i32);
        }
        return base.powf(c);
    }
    (base.ln() * exponent.eval(lookup)).exp()
}

impl Expr {
    /// Value of a variable-free subtree.
    fn constant(&self) -> Option<f64> {
        match self {
            Expr::Num(v) => Some(*v),
            Expr::Var(_) => None,
            _ if self.variables().is_empty() => Some(self.eval::<f64>(&|_| 0.0)),
            _ => None,
        }
    }
}

/// Canonical, fully parenthesised form; `parse_expr` reads it back to the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Var(v) => write!(f, "{v}"),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
            Expr::Binary(op, a, b) => write!(f, "({a}{}{b})", op.symbol()),
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

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(v) => format!("number {v}"),
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Op(c) => format!("`{c}`"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::End => "end of input".into(),
        }
    }
}

fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>, ExprError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if c.is_ascii_digit() || c == '.' {
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let lit = &text[start..i];
            let value: f64 = lit.parse().map_err(|_| ExprError::Syntax {
                offset: start,
                expected: vec!["number".into()],
                found: format!("`{lit}`"),
            })?;
            out.push((Tok::Num(value), start));
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Ident(text[start..i].to_string()), start));
            continue;
        }
        let tok = match c {
            '+' | '-' | '*' | '/' | '^' => Tok::Op(c),
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ',' => Tok::Comma,
            _ => {
                let ch = text[start..].chars().next().unwrap_or(c);
                return Err(ExprError::Syntax {
                    offset: start,
                    expected: vec!["operator".into(), "operand".into()],
                    found: format!("`{ch}`"),
                });
            }
        };
        out.push((tok, start));
        i += c.len_utf8();
    }
    out.push((Tok::End, text.len()));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &[&str]) -> ExprError {
        ExprError::Syntax {
            offset: self.offset(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: self.peek().describe(),
        }
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.term()?;
        while let Tok::Op(c @ ('+' | '-')) = *self.peek() {
            self.bump();
            let rhs = self.term()?;
            let op = if c == '+' { BinOp::Add } else { BinOp::Sub };
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.factor()?;
        while let Tok::Op(c @ ('*' | '/')) = *self.peek() {
            self.bump();
            let rhs = self.factor()?;
            let op = if c == '*' { BinOp::Mul } else { BinOp::Div };
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Expr, ExprError> {
        let base = self.unary()?;
        if *self.peek() == Tok::Op('^') {
            self.bump();
            let exponent = self.factor()?;
            return Ok(Expr::Binary(BinOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if *self.peek() == Tok::Op('-') {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.atom()?)));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Expr, ExprError> {
        const OPERAND: &[&str] = &["number", "identifier", "`(`", "`-`"];
        match self.peek().clone() {
            Tok::Num(v) => {
                self.bump();
                Ok(Expr::Num(v))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.expr()?;
                if *self.peek() != Tok::RParen {
                    return Err(self.error(&["`)`", "operator"]));
                }
                self.bump();
                Ok(inner)
            }
            Tok::Ident(name) => {
                let offset = self.offset();
                self.bump();
                if *self.peek() == Tok::LParen {
                    self.bump();
                    let mut args = vec![self.expr()?];
                    while *self.peek() == Tok::Comma {
                        self.bump();
                        args.push(self.expr()?);
                    }
                    if *self.peek() != Tok::RParen {
                        return Err(self.error(&["`)`", "`,`", "operator"]));
                    }
                    self.bump();
                    let func = Func::lookup(&name)
                        .ok_or(ExprError::UnknownIdentifier { name: name.clone(), offset })?;
                    if args.len() != 1 {
                        return Err(ExprError::Arity {
                            name,
                            offset,
                            expected: 1,
                            found: args.len(),
                        });
                    }
                    Ok(Expr::Call(func, Box::new(args.pop().unwrap())))
                } else {
                    parse_var(&name)
                        .map(Expr::Var)
                        .ok_or(ExprError::UnknownIdentifier { name, offset })
                }
            }
            _ => Err(self.error(OPERAND)),
        }
    }
}

fn parse_var(name: &str) -> Option<Var> {
    let mut chars = name.chars();
    let family = match chars.next()? {
        's' => VarFamily::S,
        'x' => VarFamily::X,
        'y' => VarFamily::Y,
        _ => return None,
    };
    let digits = chars.as_str();
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) || digits.starts_with('0') {
        return None;
    }
    Some(Var {
        family,
        index: digits.parse().ok()?,
    })
}

/// Parse an expression. Errors carry the byte offset of the offending token.
pub fn parse_expr(text: &str) -> Result<Expr, ExprError> {
    if text.trim().is_empty() {
        return Err(ExprError::Empty);
    }
    let mut p = Parser {
        toks: tokenize(text)?,
        pos: 0,
    };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(p.error(&["operator", "end of input"]));
    }
    Ok(e)
}

/// Parse and restrict variables to `allowed`.
pub fn parse_with(text: &str, allowed: &VarSet) -> Result<Expr, ExprError> {
    let e = parse_expr(text)?;
    e.check_vars(allowed)?;
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn euclidean_family_function() {
        let e = parse_expr("sqrt(s1^2+s2+s3)").unwrap();
        let v: f64 = e.eval_args(&[3.0, 9.0, 7.0]);
        assert!((v - 5.0).abs() < 1e-15);
        e.check_vars(&VarSet::family_args(3)).unwrap();
    }

    #[test]
    fn syntax_error_offset() {
        match parse_expr("s1+*s2") {
            Err(ExprError::Syntax { offset, .. }) => assert_eq!(offset, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_identifier_and_arity() {
        assert!(matches!(
            parse_expr("abs(s1)"),
            Err(ExprError::UnknownIdentifier { .. })
        ));
        assert!(matches!(
            parse_expr("min(s1)"),
            Err(ExprError::UnknownIdentifier { .. })
        ));
        assert!(matches!(
            parse_expr("q + 1"),
            Err(ExprError::UnknownIdentifier { offset: 0, .. })
        ));
        assert!(matches!(
            parse_expr("sqrt(s1, s2)"),
            Err(ExprError::Arity { found: 2, .. })
        ));
        assert!(matches!(
            parse_with("y4", &VarSet::tangent(3)),
            Err(ExprError::DisallowedVariable { .. })
        ));
        assert_eq!(parse_expr("  "), Err(ExprError::Empty));
    }

    #[test]
    fn associativity() {
        let v: f64 = parse_expr("2^3^2").unwrap().eval_args(&[]);
        assert_eq!(v, 512.0);
        let v: f64 = parse_expr("8-3-2").unwrap().eval_args(&[]);
        assert_eq!(v, 3.0);
        let v: f64 = parse_expr("8/4/2").unwrap().eval_args(&[]);
        assert_eq!(v, 1.0);
        let v: f64 = parse_expr("-2^2").unwrap().eval_args(&[]);
        assert_eq!(v, 4.0);
        let v: f64 = parse_expr("1.5e-1*2").unwrap().eval_args(&[]);
        assert!((v - 0.3).abs() < 1e-16);
    }

    #[test]
    fn integer_power_of_negative_base() {
        let v: f64 = parse_expr("s1^2").unwrap().eval_args(&[-3.0]);
        assert_eq!(v, 9.0);
    }

    #[test]
    fn print_is_reparsable() {
        let e = parse_expr("sqrt(s1^2+s2+s3)+0.1*s1 - (-s2)/exp(log(s3))").unwrap();
        let again = parse_expr(&e.to_string()).unwrap();
        assert_eq!(e, again);
    }
}
