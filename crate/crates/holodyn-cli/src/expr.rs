//! Map expressions: complex literals (a+bi), the variable z, the operators
//! + - * / ^ (integer exponents), and parentheses. Expressions compile to
//! rational maps by polynomial normalization.

use holodyn::{DynError, Polynomial, RationalMap};
use num_complex::Complex64;

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(Complex64),
    Z,
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Pow(Box<Expr>, i64),
}

#[derive(Clone, Debug, thiserror::Error)]
#[error("syntax error at position {pos}: {msg}")]
pub struct ParseError {
    pub pos: usize,
    pub msg: String,
}

#[derive(Clone, Debug)]
pub struct MapExpression {
    pub source: String,
    pub tree: Expr,
}

struct Parser<'a> {
    text: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, msg: &str) -> Result<T, ParseError> {
        Err(ParseError { pos: self.pos, msg: msg.into() })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.text.len() && self.text[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.text.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    let rhs = self.term()?;
                    lhs = fold_add(lhs, rhs);
                }
                Some(b'-') => {
                    self.pos += 1;
                    let rhs = self.term()?;
                    lhs = fold_sub(lhs, rhs);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    let rhs = self.unary()?;
                    lhs = fold_mul(lhs, rhs);
                }
                Some(b'/') => {
                    self.pos += 1;
                    let rhs = self.unary()?;
                    lhs = fold_div(lhs, rhs);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            let inner = self.unary()?;
            return Ok(fold_neg(inner));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let exponent = self.integer()?;
            return Ok(fold_pow(base, exponent));
        }
        Ok(base)
    }

    fn integer(&mut self) -> Result<i64, ParseError> {
        self.skip_ws();
        let negative = if self.peek() == Some(b'-') {
            self.pos += 1;
            true
        } else {
            false
        };
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.text.len() && self.text[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("expected an integer exponent");
        }
        let digits = std::str::from_utf8(&self.text[start..self.pos]).unwrap();
        match digits.parse::<i64>() {
            Ok(v) => Ok(if negative { -v } else { v }),
            Err(_) => self.err("exponent out of range"),
        }
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if self.peek() != Some(b')') {
                    return self.err("expected ')'");
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(b'z') | Some(b'Z') => {
                self.pos += 1;
                Ok(Expr::Z)
            }
            Some(b'i') => {
                self.pos += 1;
                Ok(Expr::Num(Complex64::new(0.0, 1.0)))
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) => self.err(&format!("unexpected character '{}'", c as char)),
            None => self.err("unexpected end of input"),
        }
    }

    fn number(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        let mut seen_dot = false;
        while self.pos < self.text.len() {
            let c = self.text[self.pos];
            if c.is_ascii_digit() {
                self.pos += 1;
            } else if c == b'.' && !seen_dot {
                seen_dot = true;
                self.pos += 1;
            } else {
                break;
            }
        }
        let lexeme = std::str::from_utf8(&self.text[start..self.pos]).unwrap();
        let value: f64 = match lexeme.parse() {
            Ok(v) => v,
            Err(_) => return self.err(&format!("bad number literal '{lexeme}'")),
        };
        if self.pos < self.text.len() && self.text[self.pos] == b'i' {
            self.pos += 1;
            Ok(Expr::Num(Complex64::new(0.0, value)))
        } else {
            Ok(Expr::Num(Complex64::new(value, 0.0)))
        }
    }
}

// constant folding keeps the tree canonical, so parse(print(tree)) == tree
fn fold_add(a: Expr, b: Expr) -> Expr {
    match (a, b) {
        (Expr::Num(x), Expr::Num(y)) => Expr::Num(x + y),
        (a, b) => Expr::Add(Box::new(a), Box::new(b)),
    }
}
fn fold_sub(a: Expr, b: Expr) -> Expr {
    match (a, b) {
        (Expr::Num(x), Expr::Num(y)) => Expr::Num(x - y),
        (a, b) => Expr::Sub(Box::new(a), Box::new(b)),
    }
}
fn fold_mul(a: Expr, b: Expr) -> Expr {
    match (a, b) {
        (Expr::Num(x), Expr::Num(y)) => Expr::Num(x * y),
        (a, b) => Expr::Mul(Box::new(a), Box::new(b)),
    }
}
fn fold_div(a: Expr, b: Expr) -> Expr {
    match (a, b) {
        (Expr::Num(x), Expr::Num(y)) if y.norm() > 0.0 => Expr::Num(x / y),
        (a, b) => Expr::Div(Box::new(a), Box::new(b)),
    }
}
fn fold_neg(a: Expr) -> Expr {
    match a {
        Expr::Num(x) => Expr::Num(-x),
        a => Expr::Neg(Box::new(a)),
    }
}
fn fold_pow(a: Expr, k: i64) -> Expr {
    match a {
        Expr::Num(x) => Expr::Num(x.powi(k as i32)),
        a => Expr::Pow(Box::new(a), k),
    }
}

pub fn parse_map(text: &str) -> Result<MapExpression, ParseError> {
    if text.trim().is_empty() {
        return Err(ParseError { pos: 0, msg: "empty expression".into() });
    }
    let mut parser = Parser { text: text.as_bytes(), pos: 0 };
    let tree = parser.expr()?;
    parser.skip_ws();
    if parser.pos != parser.text.len() {
        return parser.err("trailing input");
    }
    Ok(MapExpression { source: text.to_string(), tree })
}

fn fmt_f64(x: f64) -> String {
    format!("{x}")
}

fn precedence(e: &Expr) -> u8 {
    match e {
        Expr::Add(..) | Expr::Sub(..) => 1,
        Expr::Mul(..) | Expr::Div(..) => 2,
        Expr::Neg(..) => 3,
        Expr::Pow(..) => 4,
        Expr::Num(_) | Expr::Z => 5,
    }
}

fn print_expr(e: &Expr, out: &mut String) {
    let wrap = |child: &Expr, min: u8, out: &mut String| {
        if precedence(child) < min {
            out.push('(');
            print_expr(child, out);
            out.push(')');
        } else {
            print_expr(child, out);
        }
    };
    match e {
        Expr::Num(c) => {
            if c.im == 0.0 {
                if c.re < 0.0 {
                    out.push('(');
                    out.push_str(&fmt_f64(c.re));
                    out.push(')');
                } else {
                    out.push_str(&fmt_f64(c.re));
                }
            } else if c.re == 0.0 {
                if c.im < 0.0 {
                    out.push_str(&format!("({}i)", fmt_f64(c.im)));
                } else {
                    out.push_str(&fmt_f64(c.im));
                    out.push('i');
                }
            } else {
                let sign = if c.im < 0.0 { "-" } else { "+" };
                out.push_str(&format!("({}{}{}i)", fmt_f64(c.re), sign, fmt_f64(c.im.abs())));
            }
        }
        Expr::Z => out.push('z'),
        Expr::Add(a, b) => {
            wrap(a, 1, out);
            out.push('+');
            wrap(b, 2, out);
        }
        Expr::Sub(a, b) => {
            wrap(a, 1, out);
            out.push('-');
            wrap(b, 2, out);
        }
        Expr::Mul(a, b) => {
            wrap(a, 2, out);
            out.push('*');
            wrap(b, 3, out);
        }
        Expr::Div(a, b) => {
            wrap(a, 2, out);
            out.push('/');
            wrap(b, 3, out);
        }
        Expr::Neg(a) => {
            out.push('-');
            wrap(a, 3, out);
        }
        Expr::Pow(a, k) => {
            wrap(a, 5, out);
            out.push('^');
            out.push_str(&k.to_string());
        }
    }
}

impl MapExpression {
    pub fn print(&self) -> String {
        let mut s = String::new();
        print_expr(&self.tree, &mut s);
        s
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        eval_expr(&self.tree, z)
    }

    /// Compile to a rational map. The second value flags that a common
    /// numerator/denominator factor was simplified away numerically.
    pub fn compile(&self) -> Result<(RationalMap, bool), DynError> {
        let (num, den) = lower(&self.tree);
        let mut simplified = false;
        let (num, den) = match cancel_common_roots(&num, &den)? {
            Some((n, d)) => {
                simplified = true;
                (n, d)
            }
            None => (num, den),
        };
        Ok((RationalMap::new(num, den)?, simplified))
    }
}

fn eval_expr(e: &Expr, z: Complex64) -> Complex64 {
    match e {
        Expr::Num(c) => *c,
        Expr::Z => z,
        Expr::Add(a, b) => eval_expr(a, z) + eval_expr(b, z),
        Expr::Sub(a, b) => eval_expr(a, z) - eval_expr(b, z),
        Expr::Mul(a, b) => eval_expr(a, z) * eval_expr(b, z),
        Expr::Div(a, b) => eval_expr(a, z) / eval_expr(b, z),
        Expr::Neg(a) => -eval_expr(a, z),
        Expr::Pow(a, k) => eval_expr(a, z).powi(*k as i32),
    }
}

/// Lower to a numerator/denominator polynomial pair.
fn lower(e: &Expr) -> (Polynomial, Polynomial) {
    let one = Polynomial::one;
    match e {
        Expr::Num(c) => (Polynomial::constant(*c), one()),
        Expr::Z => (Polynomial::z(), one()),
        Expr::Add(a, b) => {
            let (na, da) = lower(a);
            let (nb, db) = lower(b);
            (na.mul(&db).add(&nb.mul(&da)), da.mul(&db))
        }
        Expr::Sub(a, b) => {
            let (na, da) = lower(a);
            let (nb, db) = lower(b);
            (na.mul(&db).sub(&nb.mul(&da)), da.mul(&db))
        }
        Expr::Mul(a, b) => {
            let (na, da) = lower(a);
            let (nb, db) = lower(b);
            (na.mul(&nb), da.mul(&db))
        }
        Expr::Div(a, b) => {
            let (na, da) = lower(a);
            let (nb, db) = lower(b);
            (na.mul(&db), da.mul(&nb))
        }
        Expr::Neg(a) => {
            let (na, da) = lower(a);
            (na.scale(Complex64::new(-1.0, 0.0)), da)
        }
        Expr::Pow(a, k) => {
            let (na, da) = lower(a);
            let (mut n, mut d) = (Polynomial::one(), Polynomial::one());
            for _ in 0..k.unsigned_abs() {
                n = n.mul(&na);
                d = d.mul(&da);
            }
            if *k < 0 {
                (d, n)
            } else {
                (n, d)
            }
        }
    }
}

/// Detect and remove shared roots (within 1e-9). Returns None when nothing
/// cancels, so callers can keep exact coefficients in the common case.
fn cancel_common_roots(
    num: &Polynomial,
    den: &Polynomial,
) -> Result<Option<(Polynomial, Polynomial)>, DynError> {
    if num.degree() < 1 || den.degree() < 1 {
        return Ok(None);
    }
    let nr = num.roots()?;
    let dr = den.roots()?;
    let mut num_roots: Vec<Complex64> = Vec::new();
    for r in &nr {
        for _ in 0..r.multiplicity {
            num_roots.push(r.value);
        }
    }
    let mut den_roots: Vec<Complex64> = Vec::new();
    for r in &dr {
        for _ in 0..r.multiplicity {
            den_roots.push(r.value);
        }
    }
    let mut cancelled = false;
    let mut keep_den: Vec<Complex64> = Vec::new();
    for d in den_roots {
        if let Some(idx) = num_roots.iter().position(|n| (n - d).norm() < 1e-9) {
            num_roots.swap_remove(idx);
            cancelled = true;
        } else {
            keep_den.push(d);
        }
    }
    if !cancelled {
        return Ok(None);
    }
    Ok(Some((
        Polynomial::from_roots(num.leading(), &num_roots),
        Polynomial::from_roots(den.leading(), &keep_den),
    )))
}
