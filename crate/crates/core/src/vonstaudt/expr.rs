//! Integer polynomial expressions in `x`: `+ - * ^ ( )`, integer literals,
//! implicit multiplication (`3x`, `2(x+1)`).

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

use crate::exact::{ExactError, IntPolynomial};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(BigInt),
    X,
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
}

fn lex(s: &str) -> Result<Vec<Tok>, ExactError> {
    let mut out = Vec::new();
    let mut chars = s.chars().peekable();
    while let Some(&c) = chars.peek() {
        match c {
            c if c.is_whitespace() => {
                chars.next();
            }
            '0'..='9' => {
                let mut digits = String::new();
                while let Some(&d) = chars.peek().filter(|d| d.is_ascii_digit()) {
                    digits.push(d);
                    chars.next();
                }
                out.push(Tok::Num(digits.parse().unwrap()));
            }
            _ => {
                chars.next();
                out.push(match c {
                    'x' => Tok::X,
                    '+' => Tok::Plus,
                    '-' => Tok::Minus,
                    '*' => Tok::Star,
                    '^' => Tok::Caret,
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    _ => return Err(ExactError::Parse(format!("unexpected character {c:?}"))),
                });
            }
        }
    }
    Ok(out)
}

type Coeffs = Vec<BigInt>;

fn add(a: &Coeffs, b: &Coeffs, sign: i32) -> Coeffs {
    let n = a.len().max(b.len());
    (0..n)
        .map(|i| {
            let x = a.get(i).cloned().unwrap_or_default();
            let y = b.get(i).cloned().unwrap_or_default();
            if sign < 0 {
                x - y
            } else {
                x + y
            }
        })
        .collect()
}

fn mul(a: &Coeffs, b: &Coeffs) -> Coeffs {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
}

const MAX_DEGREE: usize = 64;

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn expr(&mut self) -> Result<Coeffs, ExactError> {
        let mut acc = self.term()?;
        while let Some(t @ (Tok::Plus | Tok::Minus)) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.term()?;
            acc = add(&acc, &rhs, if t == Tok::Plus { 1 } else { -1 });
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Coeffs, ExactError> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.pos += 1;
                }
                Some(Tok::X | Tok::LParen | Tok::Num(_)) => {}
                _ => break,
            }
            let rhs = self.unary()?;
            acc = mul(&acc, &rhs);
            if acc.len() > MAX_DEGREE + 1 {
                return Err(ExactError::Parse("degree too large".into()));
            }
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Coeffs, ExactError> {
        if self.peek() == Some(&Tok::Minus) {
            self.pos += 1;
            let v = self.unary()?;
            return Ok(v.into_iter().map(|c| -c).collect());
        }
        if self.peek() == Some(&Tok::Plus) {
            self.pos += 1;
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Coeffs, ExactError> {
        let base = self.atom()?;
        if self.peek() != Some(&Tok::Caret) {
            return Ok(base);
        }
        self.pos += 1;
        let e = match self.bump() {
            Some(Tok::Num(n)) => n
                .to_usize()
                .filter(|&e| e <= MAX_DEGREE)
                .ok_or_else(|| ExactError::Parse("exponent too large".into()))?,
            _ => return Err(ExactError::Parse("expected exponent".into())),
        };
        let mut acc = vec![BigInt::from(1)];
        for _ in 0..e {
            acc = mul(&acc, &base);
        }
        Ok(acc)
    }

    fn atom(&mut self) -> Result<Coeffs, ExactError> {
        match self.bump() {
            Some(Tok::Num(n)) => Ok(vec![n]),
            Some(Tok::X) => Ok(vec![BigInt::zero(), BigInt::from(1)]),
            Some(Tok::LParen) => {
                let v = self.expr()?;
                match self.bump() {
                    Some(Tok::RParen) => Ok(v),
                    _ => Err(ExactError::Parse("missing ')'".into())),
                }
            }
            Some(t) => Err(ExactError::Parse(format!("unexpected token {t:?}"))),
            None => Err(ExactError::Parse("unexpected end of input".into())),
        }
    }
}

/// Parse an integer polynomial in `x`.
pub fn parse_polynomial(s: &str) -> Result<IntPolynomial, ExactError> {
    let toks = lex(s)?;
    if toks.is_empty() {
        return Err(ExactError::Parse("empty polynomial".into()));
    }
    let mut p = Parser { toks, pos: 0 };
    let v = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(ExactError::Parse(format!("trailing input in {s:?}")));
    }
    Ok(IntPolynomial::new(v))
}
