//! Expression language for metric data.
//!
//! Grammar (tightest first): `^` (right-associative), unary `-`, `* /`,
//! `+ -`. Atoms are decimal literals, coordinates `x1..xn` / `y1..yn`
//! (1-based), parenthesized expressions, and the unary functions
//! `sqrt exp ln sin cos`. Evaluation is generic over a [`Scalar`], so one
//! AST walks both plain `f64` and order-4 jets.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::jet::{JetSpace, MultiJet};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coord {
    X,
    Y,
}

/// A coordinate reference; `index` is 0-based internally.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VarRef {
    pub coord: Coord,
    pub index: usize,
}

impl fmt::Display for VarRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self.coord {
            Coord::X => 'x',
            Coord::Y => 'y',
        };
        write!(f, "{}{}", c, self.index + 1)
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

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sqrt,
    Exp,
    Ln,
    Sin,
    Cos,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Sqrt => "sqrt",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sin => "sin",
            Func::Cos => "cos",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Lit(f64),
    Var(VarRef),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Fun(Func, Box<Expr>),
}

// Builders used by the metric catalog; keeping construction in Rust avoids
// re-parsing strings for formulas we own.
impl Expr {
    pub fn lit(v: f64) -> Expr {
        // Normalized so that printed forms reparse to the same tree: the
        // parser only ever produces nonnegative literals under `Neg`.
        if v < 0.0 {
            Expr::Neg(Box::new(Expr::Lit(-v)))
        } else {
            Expr::Lit(v)
        }
    }

    pub fn x(i: usize) -> Expr {
        Expr::Var(VarRef { coord: Coord::X, index: i })
    }

    pub fn y(i: usize) -> Expr {
        Expr::Var(VarRef { coord: Coord::Y, index: i })
    }

    pub fn sqrt(self) -> Expr {
        Expr::Fun(Func::Sqrt, Box::new(self))
    }

    pub fn pow(self, e: Expr) -> Expr {
        Expr::Bin(BinOp::Pow, Box::new(self), Box::new(e))
    }

    pub fn sq(self) -> Expr {
        self.pow(Expr::lit(2.0))
    }

    /// Largest y-index mentioned (for dimension checks); likewise for x.
    pub fn max_index(&self, coord: Coord) -> Option<usize> {
        match self {
            Expr::Lit(_) => None,
            Expr::Var(v) => (v.coord == coord).then_some(v.index),
            Expr::Neg(e) | Expr::Fun(_, e) => e.max_index(coord),
            Expr::Bin(_, a, b) => match (a.max_index(coord), b.max_index(coord)) {
                (Some(i), Some(j)) => Some(i.max(j)),
                (i, j) => i.or(j),
            },
        }
    }

    /// Constant-folds variable-free subtrees (used to route `^`).
    fn fold_const(&self) -> Option<f64> {
        match self {
            Expr::Lit(v) => Some(*v),
            Expr::Var(_) => None,
            Expr::Neg(e) => e.fold_const().map(|v| -v),
            Expr::Fun(f, e) => {
                let v = e.fold_const()?;
                Some(match f {
                    Func::Sqrt => v.sqrt(),
                    Func::Exp => v.exp(),
                    Func::Ln => v.ln(),
                    Func::Sin => v.sin(),
                    Func::Cos => v.cos(),
                })
            }
            Expr::Bin(op, a, b) => {
                let (a, b) = (a.fold_const()?, b.fold_const()?);
                Some(match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => a / b,
                    BinOp::Pow => a.powf(b),
                })
            }
        }
    }
}

impl std::ops::Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::Bin(BinOp::Add, Box::new(self), Box::new(rhs))
    }
}

impl std::ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::Bin(BinOp::Sub, Box::new(self), Box::new(rhs))
    }
}

impl std::ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::Bin(BinOp::Mul, Box::new(self), Box::new(rhs))
    }
}

impl std::ops::Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        Expr::Bin(BinOp::Div, Box::new(self), Box::new(rhs))
    }
}

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::Neg(Box::new(self))
    }
}

// ---------------------------------------------------------------------------
// Printing. Levels: 1 add/sub, 2 mul/div, 3 unary minus, 4 pow, 5 atom.
// Parenthesization is minimal but exact: parse(print(e)) == e structurally.
// ---------------------------------------------------------------------------

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write(f, self, 1)
    }
}

fn level(e: &Expr) -> u8 {
    match e {
        Expr::Bin(BinOp::Add | BinOp::Sub, ..) => 1,
        Expr::Bin(BinOp::Mul | BinOp::Div, ..) => 2,
        Expr::Neg(_) => 3,
        Expr::Lit(v) if *v < 0.0 => 3,
        Expr::Bin(BinOp::Pow, ..) => 4,
        _ => 5,
    }
}

fn write(f: &mut fmt::Formatter<'_>, e: &Expr, min: u8) -> fmt::Result {
    let lv = level(e);
    if lv < min {
        f.write_str("(")?;
        write(f, e, 1)?;
        return f.write_str(")");
    }
    match e {
        Expr::Lit(v) => write!(f, "{:?}", v),
        Expr::Var(v) => write!(f, "{}", v),
        Expr::Neg(inner) => {
            f.write_str("-")?;
            write(f, inner, 3)
        }
        Expr::Fun(func, arg) => {
            write!(f, "{}(", func.name())?;
            write(f, arg, 1)?;
            f.write_str(")")
        }
        Expr::Bin(op, a, b) => {
            let (sym, la, lb) = match op {
                BinOp::Add => (" + ", 1, 2),
                BinOp::Sub => (" - ", 1, 2),
                BinOp::Mul => (" * ", 2, 3),
                BinOp::Div => (" / ", 2, 3),
                BinOp::Pow => ("^", 5, 3),
            };
            write(f, a, la)?;
            f.write_str(sym)?;
            write(f, b, lb)
        }
    }
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

struct Parser<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
}

/// Parses a single expression; the whole input must be consumed.
pub fn parse(src: &str) -> Result<Expr> {
    let mut p = Parser { src, bytes: src.as_bytes(), pos: 0 };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.bytes.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(e)
}

impl<'a> Parser<'a> {
    fn err(&self, message: &str) -> Error {
        Error::Parse { offset: self.pos, message: message.into() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn eat(&mut self, b: u8) -> bool {
        if self.peek() == Some(b) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut acc = self.term()?;
        loop {
            if self.eat(b'+') {
                acc = acc + self.term()?;
            } else if self.eat(b'-') {
                acc = acc - self.term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut acc = self.unary()?;
        loop {
            if self.eat(b'*') {
                acc = acc * self.unary()?;
            } else if self.eat(b'/') {
                acc = acc / self.unary()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat(b'-') {
            Ok(-self.unary()?)
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.eat(b'^') {
            // Exponent admits unary minus: x^-2. Right-associative.
            Ok(base.pow(self.unary()?))
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.err("expected `)`"));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.ident(),
            Some(_) => Err(self.err("expected a number, coordinate, function, or `(`")),
            None => Err(self.err("unexpected end of input")),
        }
    }

    fn number(&mut self) -> Result<Expr> {
        let start = self.pos;
        while matches!(self.bytes.get(self.pos), Some(b) if b.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.bytes.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            while matches!(self.bytes.get(self.pos), Some(b) if b.is_ascii_digit()) {
                self.pos += 1;
            }
        }
        if matches!(self.bytes.get(self.pos), Some(b'e' | b'E')) {
            let mark = self.pos;
            self.pos += 1;
            if matches!(self.bytes.get(self.pos), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if matches!(self.bytes.get(self.pos), Some(b) if b.is_ascii_digit()) {
                while matches!(self.bytes.get(self.pos), Some(b) if b.is_ascii_digit()) {
                    self.pos += 1;
                }
            } else {
                self.pos = mark; // `e` belonged to an identifier after all
            }
        }
        let text = &self.src[start..self.pos];
        text.parse::<f64>().map(Expr::Lit).map_err(|_| Error::Parse {
            offset: start,
            message: format!("invalid number `{text}`"),
        })
    }

    fn ident(&mut self) -> Result<Expr> {
        let start = self.pos;
        while matches!(self.bytes.get(self.pos), Some(b) if b.is_ascii_alphanumeric() || *b == b'_')
        {
            self.pos += 1;
        }
        let name = &self.src[start..self.pos];
        if let Some(func) = match name {
            "sqrt" => Some(Func::Sqrt),
            "exp" => Some(Func::Exp),
            "ln" => Some(Func::Ln),
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            _ => None,
        } {
            if !self.eat(b'(') {
                return Err(self.err("expected `(` after function name"));
            }
            let arg = self.expr()?;
            if !self.eat(b')') {
                return Err(self.err("expected `)`"));
            }
            return Ok(Expr::Fun(func, Box::new(arg)));
        }
        // Coordinates: x<k> or y<k>, k ≥ 1.
        let coord = match name.as_bytes().first() {
            Some(b'x') => Some(Coord::X),
            Some(b'y') => Some(Coord::Y),
            _ => None,
        };
        if let Some(coord) = coord {
            if let Ok(k) = name[1..].parse::<usize>() {
                if k >= 1 {
                    return Ok(Expr::Var(VarRef { coord, index: k - 1 }));
                }
            }
        }
        Err(Error::UnknownIdentifier { offset: start, name: name.into() })
    }
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

/// Arithmetic shared by `f64` and [`MultiJet`] evaluation. `constant_like`
/// exists because jets need a space to materialize constants in.
pub trait Scalar: Clone {
    fn constant_like(proto: &Self, c: f64) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn div(&self, o: &Self) -> Result<Self>;
    fn sqrt(&self) -> Result<Self>;
    fn exp(&self) -> Result<Self>;
    fn ln(&self) -> Result<Self>;
    fn sin(&self) -> Result<Self>;
    fn cos(&self) -> Result<Self>;
    fn powi(&self, n: i32) -> Result<Self>;
    fn powf(&self, p: f64) -> Result<Self>;
    fn value(&self) -> f64;
}

impl Scalar for f64 {
    fn constant_like(_: &Self, c: f64) -> Self {
        c
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn div(&self, o: &Self) -> Result<Self> {
        if *o == 0.0 {
            return Err(Error::Singular { what: "division", value: *o });
        }
        Ok(self / o)
    }
    fn sqrt(&self) -> Result<Self> {
        if *self < 0.0 {
            return Err(Error::Singular { what: "sqrt", value: *self });
        }
        Ok(f64::sqrt(*self))
    }
    fn exp(&self) -> Result<Self> {
        let e = f64::exp(*self);
        if !e.is_finite() {
            return Err(Error::NonFinite { what: "exp".into() });
        }
        Ok(e)
    }
    fn ln(&self) -> Result<Self> {
        if !(*self > 0.0) {
            return Err(Error::Singular { what: "ln", value: *self });
        }
        Ok(f64::ln(*self))
    }
    fn sin(&self) -> Result<Self> {
        Ok(f64::sin(*self))
    }
    fn cos(&self) -> Result<Self> {
        Ok(f64::cos(*self))
    }
    fn powi(&self, n: i32) -> Result<Self> {
        if *self == 0.0 && n < 0 {
            return Err(Error::Singular { what: "pow", value: 0.0 });
        }
        Ok(f64::powi(*self, n))
    }
    fn powf(&self, p: f64) -> Result<Self> {
        if *self < 0.0 || (*self == 0.0 && p < 0.0) {
            return Err(Error::Singular { what: "pow", value: *self });
        }
        Ok(f64::powf(*self, p))
    }
    fn value(&self) -> f64 {
        *self
    }
}

impl Scalar for MultiJet {
    fn constant_like(proto: &Self, c: f64) -> Self {
        MultiJet::constant(proto.space(), c)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        MultiJet::mul(self, o)
    }
    fn neg(&self) -> Self {
        self.scale(-1.0)
    }
    fn div(&self, o: &Self) -> Result<Self> {
        MultiJet::div(self, o)
    }
    fn sqrt(&self) -> Result<Self> {
        MultiJet::sqrt(self)
    }
    fn exp(&self) -> Result<Self> {
        MultiJet::exp(self)
    }
    fn ln(&self) -> Result<Self> {
        MultiJet::ln(self)
    }
    fn sin(&self) -> Result<Self> {
        MultiJet::sin(self)
    }
    fn cos(&self) -> Result<Self> {
        MultiJet::cos(self)
    }
    fn powi(&self, n: i32) -> Result<Self> {
        MultiJet::powi(self, n)
    }
    fn powf(&self, p: f64) -> Result<Self> {
        MultiJet::powf(self, p)
    }
    fn value(&self) -> f64 {
        MultiJet::value(self)
    }
}

/// Coordinate bindings for evaluation; slices are indexed by `VarRef::index`.
pub struct Bindings<'a, T> {
    pub x: &'a [T],
    pub y: &'a [T],
}

impl<'a, T: Scalar> Bindings<'a, T> {
    fn lookup(&self, v: VarRef) -> Result<&T> {
        let slice = match v.coord {
            Coord::X => self.x,
            Coord::Y => self.y,
        };
        slice.get(v.index).ok_or(Error::UnboundVariable {
            name: v.to_string(),
            dim: slice.len(),
        })
    }

    fn proto(&self) -> &T {
        self.x.first().or_else(|| self.y.first()).expect("bindings cannot be empty")
    }
}

pub fn eval<T: Scalar>(e: &Expr, b: &Bindings<T>) -> Result<T> {
    match e {
        Expr::Lit(v) => Ok(T::constant_like(b.proto(), *v)),
        Expr::Var(v) => Ok(b.lookup(*v)?.clone()),
        Expr::Neg(inner) => Ok(eval(inner, b)?.neg()),
        Expr::Fun(f, arg) => {
            let a = eval(arg, b)?;
            match f {
                Func::Sqrt => a.sqrt(),
                Func::Exp => a.exp(),
                Func::Ln => a.ln(),
                Func::Sin => a.sin(),
                Func::Cos => a.cos(),
            }
        }
        Expr::Bin(op, lhs, rhs) => {
            let a = eval(lhs, b)?;
            match op {
                BinOp::Add => Ok(a.add(&eval(rhs, b)?)),
                BinOp::Sub => Ok(a.sub(&eval(rhs, b)?)),
                BinOp::Mul => Ok(a.mul(&eval(rhs, b)?)),
                BinOp::Div => a.div(&eval(rhs, b)?),
                BinOp::Pow => match rhs.fold_const() {
                    Some(p) if p.round() == p && p.abs() <= 64.0 => a.powi(p as i32),
                    Some(p) => a.powf(p),
                    // Variable exponent: a^b = exp(b·ln a).
                    None => eval(rhs, b)?.mul(&a.ln()?).exp(),
                },
            }
        }
    }
}

/// Convenience: evaluate on plain numbers.
pub fn eval_f64(e: &Expr, x: &[f64], y: &[f64]) -> Result<f64> {
    eval(e, &Bindings { x, y })
}

/// Convenience: evaluate on jets from a shared space.
pub fn eval_jet(e: &Expr, x: &[MultiJet], y: &[MultiJet]) -> Result<MultiJet> {
    eval(e, &Bindings { x, y })
}

/// Jet bindings for a state (x, y) with x-variables 0..n and y-variables
/// n..2n of a 2n-variable space — the layout the curvature pipeline uses.
pub fn lift_state(space: &Arc<JetSpace>, x: &[f64], y: &[f64]) -> (Vec<MultiJet>, Vec<MultiJet>) {
    let n = x.len();
    assert_eq!(y.len(), n);
    assert_eq!(space.num_vars(), 2 * n);
    let xs = (0..n).map(|i| MultiJet::variable(space, i, x[i])).collect();
    let ys = (0..n).map(|i| MultiJet::variable(space, n + i, y[i])).collect();
    (xs, ys)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::space;
    use approx::assert_relative_eq;

    fn num(src: &str) -> f64 {
        eval_f64(&parse(src).unwrap(), &[1.0, 2.0], &[3.0, 4.0]).unwrap()
    }

    #[test]
    fn precedence_and_associativity() {
        assert_relative_eq!(num("2+3*4^2"), 50.0);
        assert_relative_eq!(num("-2^2"), -4.0); // ^ binds tighter than unary -
        assert_relative_eq!(num("2^-2"), 0.25);
        assert_relative_eq!(num("2^3^2"), 512.0); // right-associative
        assert_relative_eq!(num("(2^3)^2"), 64.0);
        assert_relative_eq!(num("6/3/2"), 1.0); // left-associative
        assert_relative_eq!(num("1 - 2 - 3"), -4.0);
        assert_relative_eq!(num("(x1 + y2) * sqrt(y1^2 + y2^2)"), 25.0);
    }

    #[test]
    fn literals() {
        assert_relative_eq!(num("0.5"), 0.5);
        assert_relative_eq!(num("1e-7"), 1e-7);
        assert_relative_eq!(num("2.5E+2"), 250.0);
    }

    #[test]
    fn parse_errors_carry_byte_offsets() {
        match parse("x1 + @") {
            Err(Error::Parse { offset, .. }) => assert_eq!(offset, 5),
            other => panic!("expected parse error, got {other:?}"),
        }
        match parse("1 + foo(2)") {
            Err(Error::UnknownIdentifier { offset, name }) => {
                assert_eq!(offset, 4);
                assert_eq!(name, "foo");
            }
            other => panic!("expected unknown identifier, got {other:?}"),
        }
        assert!(parse("x0").is_err()); // coordinates are 1-based
        assert!(parse("1 2").is_err());
        assert!(parse("(1+2").is_err());
        assert!(parse("").is_err());
    }

    #[test]
    fn unbound_variable_is_reported_at_eval() {
        let e = parse("y3").unwrap();
        match eval_f64(&e, &[0.0, 0.0], &[1.0, 2.0]) {
            Err(Error::UnboundVariable { name, dim }) => {
                assert_eq!(name, "y3");
                assert_eq!(dim, 2);
            }
            other => panic!("expected unbound variable, got {other:?}"),
        }
    }

    #[test]
    fn division_by_zero_is_singular() {
        let e = parse("1 / (x1 - 1)").unwrap();
        assert!(matches!(eval_f64(&e, &[1.0], &[0.0]), Err(Error::Singular { .. })));
    }

    #[test]
    fn print_parse_roundtrip() {
        let cases = [
            "x1 + y2 * 3.0",
            "-(x1 + 1.0)^2",
            "x1^-2",
            "x1^y1^2.0",
            "(x1^y1)^2.0",
            "sqrt(x1 / (y1 - y2))",
            "-x1 - -y1",
            "1.0 - (2.0 - 3.0)",
            "(x1 + 2.0) / (y1 * y2)",
            "exp(ln(sin(cos(x1))))",
        ];
        for src in cases {
            let ast = parse(src).unwrap();
            let printed = ast.to_string();
            let reparsed = parse(&printed).unwrap_or_else(|e| {
                panic!("printed form `{printed}` failed to reparse: {e}")
            });
            assert_eq!(ast, reparsed, "round-trip mismatch via `{printed}`");
        }
    }

    #[test]
    fn jet_eval_matches_direct_computation() {
        let src = "sqrt(x1^2 + y2) * exp(y1) - x2 / y2";
        let e = parse(src).unwrap();
        let sp = space(4);
        let (x, y) = lift_state(&sp, &[1.2, -0.4], &[0.3, 2.0]);
        let jet = eval_jet(&e, &x, &y).unwrap();

        let direct = |x: &[f64], y: &[f64]| (x[0] * x[0] + y[1]).sqrt() * y[0].exp() - x[1] / y[1];
        assert_relative_eq!(jet.value(), direct(&[1.2, -0.4], &[0.3, 2.0]), max_relative = 1e-14);

        // Audit one first and one mixed second derivative against fd.
        let f = |p: &[f64]| Ok(direct(&p[..2], &p[2..]));
        let fd1 = crate::fd::finite_difference_audit(f, &[1.2, -0.4, 0.3, 2.0], &[1]).unwrap();
        assert_relative_eq!(jet.d1(0), fd1, max_relative = 1e-7);
        let fd2 =
            crate::fd::finite_difference_audit(f, &[1.2, -0.4, 0.3, 2.0], &[1, 0, 0, 1]).unwrap();
        assert_relative_eq!(jet.derivative(&[1, 0, 0, 1]), fd2, max_relative = 1e-6);
    }

    #[test]
    fn variable_exponent_routes_through_exp_ln() {
        let e = parse("x1^y1").unwrap();
        assert_relative_eq!(eval_f64(&e, &[2.0], &[3.5]).unwrap(), 2.0f64.powf(3.5));
        assert!(eval_f64(&e, &[-2.0], &[3.5]).is_err()); // needs ln(base)
    }

    mod prop {
        use super::*;
        use proptest::prelude::*;

        fn arb_expr() -> impl Strategy<Value = Expr> {
            let leaf = prop_oneof![
                (0.0..10.0f64).prop_map(Expr::lit),
                (0usize..3).prop_map(Expr::x),
                (0usize..3).prop_map(Expr::y),
            ];
            leaf.prop_recursive(5, 48, 2, |inner| {
                prop_oneof![
                    (inner.clone(), inner.clone()).prop_map(|(a, b)| a + b),
                    (inner.clone(), inner.clone()).prop_map(|(a, b)| a - b),
                    (inner.clone(), inner.clone()).prop_map(|(a, b)| a * b),
                    (inner.clone(), inner.clone()).prop_map(|(a, b)| a / b),
                    (inner.clone(), inner.clone()).prop_map(|(a, b)| a.pow(b)),
                    inner.clone().prop_map(|a| -a),
                    inner.clone().prop_map(|a| a.sqrt()),
                    inner.prop_map(|a| Expr::Fun(Func::Cos, Box::new(a))),
                ]
            })
        }

        proptest! {
            #[test]
            fn printed_trees_reparse_identically(e in arb_expr()) {
                let printed = e.to_string();
                let reparsed = parse(&printed).unwrap();
                prop_assert_eq!(e, reparsed, "via `{}`", printed);
            }
        }
    }

    #[test]
    fn max_index_scan() {
        let e = parse("x1 * y3 + sqrt(y2)").unwrap();
        assert_eq!(e.max_index(Coord::X), Some(0));
        assert_eq!(e.max_index(Coord::Y), Some(2));
        assert_eq!(parse("1.5").unwrap().max_index(Coord::X), None);
    }
}
