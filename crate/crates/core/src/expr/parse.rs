//! Text syntax for expressions.
//!
//! ```text
//! expr    = term { ("+" | "-") term } ;
//! term    = unary { ("*" | "/") unary } ;
//! unary   = ("-" | "+") unary | power ;
//! power   = primary [ "^" [ "-" | "+" ] integer ] ;
//! primary = number | number "i" | "i" | variable
//!         | ("exp" | "conj") "(" expr ")" | "(" expr ")" ;
//! variable = "z" index | "zb" index ;      (* index in 1..=n *)
//! number  = digits [ "." digits ] [ ("e" | "E") [ "+" | "-" ] digits ] ;
//! ```
//!
//! Homogeneous coordinates of projective scenes use `x0..xn` and
//! `xb0..xbn` in place of `z1..zn`, `zb1..zbn`.
//!
//! Whitespace is ignored between tokens. A complex literal such as
//! `2+3i` is simply the sum of a real and an imaginary number.

use super::Expr;
use num_complex::Complex64;

/// Parse failure with a 1-based column into the input text.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ParseError {
    #[error("syntax error at column {column}: {message}")]
    Syntax { column: usize, message: String },
    #[error("unknown variable '{name}' at column {column}")]
    UnknownVariable { column: usize, name: String },
    #[error("variable '{name}' at column {column} is out of range for dimension {dim}")]
    IndexOutOfRange { column: usize, name: String, dim: usize },
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Imag(f64),
    Ident(String),
    Sym(char),
    End,
}

fn syntax(column: usize, message: impl Into<String>) -> ParseError {
    ParseError::Syntax { column, message: message.into() }
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
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
            let s: String = chars[start..i].iter().collect();
            let v: f64 = s.parse().map_err(|_| syntax(col, format!("malformed number '{s}'")))?;
            // an 'i' glued to a number makes it imaginary, unless it starts an identifier
            if i < chars.len() && chars[i] == 'i' && !chars.get(i + 1).is_some_and(|c| c.is_alphanumeric()) {
                i += 1;
                out.push((Tok::Imag(v), col));
            } else {
                out.push((Tok::Num(v), col));
            }
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((Tok::Ident(chars[start..i].iter().collect()), col));
        } else if "+-*/^()".contains(c) {
            out.push((Tok::Sym(c), col));
            i += 1;
        } else {
            return Err(syntax(col, format!("unexpected character '{c}'")));
        }
    }
    out.push((Tok::End, chars.len() + 1));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    dim: usize,
    homogeneous: bool,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn col(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        if *self.peek() == Tok::Sym(c) {
            self.bump();
            Ok(())
        } else {
            Err(syntax(self.col(), format!("expected '{c}'")))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut terms = vec![self.term()?];
        loop {
            match self.peek() {
                Tok::Sym('+') => {
                    self.bump();
                    terms.push(self.term()?);
                }
                Tok::Sym('-') => {
                    self.bump();
                    terms.push(self.term()?.neg());
                }
                _ => return Ok(Expr::sum(terms)),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Tok::Sym('*') => {
                    self.bump();
                    acc = acc.mul(&self.unary()?);
                }
                Tok::Sym('/') => {
                    self.bump();
                    acc = acc.div(&self.unary()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            Tok::Sym('-') => {
                self.bump();
                Ok(self.unary()?.neg())
            }
            Tok::Sym('+') => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if *self.peek() != Tok::Sym('^') {
            return Ok(base);
        }
        self.bump();
        let mut sign = 1i64;
        match self.peek() {
            Tok::Sym('-') => {
                sign = -1;
                self.bump();
            }
            Tok::Sym('+') => {
                self.bump();
            }
            _ => {}
        }
        let col = self.col();
        match self.bump().0 {
            Tok::Num(v) if v.fract() == 0.0 && v.abs() <= i32::MAX as f64 => Ok(base.powi((sign * v as i64) as i32)),
            _ => Err(syntax(col, "exponent must be an integer literal")),
        }
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let (tok, col) = self.bump();
        match tok {
            Tok::Num(v) => Ok(Expr::real(v)),
            Tok::Imag(v) => Ok(Expr::constant(Complex64::new(0.0, v))),
            Tok::Sym('(') => {
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Ident(name) => self.ident(name, col),
            Tok::End => Err(syntax(col, "unexpected end of input")),
            Tok::Sym(c) => Err(syntax(col, format!("unexpected '{c}'"))),
        }
    }

    fn ident(&mut self, name: String, col: usize) -> Result<Expr, ParseError> {
        match name.as_str() {
            "i" => return Ok(Expr::imag_unit()),
            "exp" | "conj" => {
                self.expect('(')?;
                let arg = self.expr()?;
                self.expect(')')?;
                return Ok(if name == "exp" { arg.exp() } else { arg.conj() });
            }
            _ => {}
        }
        let (hol, anti, base) = if self.homogeneous { ("x", "xb", 0) } else { ("z", "zb", 1) };
        let (conj, digits) = if let Some(d) = name.strip_prefix(anti) {
            (true, d)
        } else if let Some(d) = name.strip_prefix(hol) {
            (false, d)
        } else {
            return Err(ParseError::UnknownVariable { column: col, name });
        };
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(ParseError::UnknownVariable { column: col, name });
        }
        let k: usize = digits.parse().unwrap_or(usize::MAX);
        if k < base || k - base >= self.dim {
            return Err(ParseError::IndexOutOfRange { column: col, name, dim: self.dim });
        }
        let idx = k - base;
        Ok(if conj { Expr::zb(idx) } else { Expr::z(idx) })
    }
}

/// Parses `text` as an expression in the coordinates `z1..zn`, `zb1..zbn`
/// and returns its normal form.
pub fn parse(text: &str, n: usize) -> Result<Expr, ParseError> {
    parse_with(text, n, false)
}

/// Parses a polynomial in homogeneous coordinates `x0..x{m-1}` (and their
/// conjugates `xb0..`); `x_k` becomes the expression variable of index `k`.
pub fn parse_homogeneous(text: &str, m: usize) -> Result<Expr, ParseError> {
    parse_with(text, m, true)
}

fn parse_with(text: &str, n: usize, homogeneous: bool) -> Result<Expr, ParseError> {
    let mut p = Parser { toks: lex(text)?, pos: 0, dim: n, homogeneous };
    let e = p.expr()?;
    match p.peek() {
        Tok::End => Ok(e),
        _ => Err(syntax(p.col(), "unexpected trailing input")),
    }
}
