//! Amplitude expressions: a tiny arithmetic language over integers, `i`,
//! `sqrt` and the four operations, evaluated to a complex scalar.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := INT | DECIMAL | 'i' | 'sqrt' '(' expr ')' | '(' expr ')' | '-' factor
//! ```

use std::fmt;

use num_complex::Complex;
use num_traits::Zero;
use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AmplitudeExpr {
    Int(u64),
    /// Decimal literal kept verbatim so it renders back unchanged.
    Decimal(String),
    I,
    Sqrt(Box<AmplitudeExpr>),
    Neg(Box<AmplitudeExpr>),
    Add(Box<AmplitudeExpr>, Box<AmplitudeExpr>),
    Sub(Box<AmplitudeExpr>, Box<AmplitudeExpr>),
    Mul(Box<AmplitudeExpr>, Box<AmplitudeExpr>),
    Div(Box<AmplitudeExpr>, Box<AmplitudeExpr>),
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum EvalError {
    #[error("square root of a value that is not a nonnegative real ({0})")]
    SqrtDomain(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("literal `{0}` is not representable")]
    BadLiteral(String),
    #[error("expression does not evaluate to a finite number")]
    NonFinite,
}

/// Syntax error; `offset` is the 0-based character position in the source.
#[derive(Clone, Debug, PartialEq, Error)]
#[error("{message} at offset {offset}")]
pub struct ExprSyntaxError {
    pub offset: usize,
    pub message: String,
}

impl AmplitudeExpr {
    pub fn parse(src: &str) -> Result<Self, ExprSyntaxError> {
        let tokens = tokenize(src)?;
        let mut parser = Parser {
            tokens,
            pos: 0,
            end: src.chars().count(),
        };
        let expr = parser.expr()?;
        match parser.peek() {
            None => Ok(expr),
            Some((offset, tok)) => Err(ExprSyntaxError {
                offset,
                message: format!("unexpected {tok}"),
            }),
        }
    }

    /// Literal expression that evaluates (bit-exactly, for the type it was
    /// rendered from) to `value`.
    pub fn from_value<T: Scalar>(value: Complex<T>) -> Self {
        let lit = |v: T| AmplitudeExpr::Decimal(format!("{:.16e}", v.abs()));
        let real = |v: T| {
            if v.is_sign_negative() {
                AmplitudeExpr::Neg(Box::new(lit(v)))
            } else {
                lit(v)
            }
        };
        let imag = AmplitudeExpr::Mul(Box::new(lit(value.im)), Box::new(AmplitudeExpr::I));
        if value.im.is_zero() {
            real(value.re)
        } else if value.re.is_zero() {
            if value.im.is_sign_negative() {
                AmplitudeExpr::Neg(Box::new(imag))
            } else {
                imag
            }
        } else if value.im.is_sign_negative() {
            AmplitudeExpr::Sub(Box::new(real(value.re)), Box::new(imag))
        } else {
            AmplitudeExpr::Add(Box::new(real(value.re)), Box::new(imag))
        }
    }

    pub fn eval<T: Scalar>(&self) -> Result<Complex<T>, EvalError> {
        let v = self.eval_inner::<T>()?;
        if v.re.is_finite() && v.im.is_finite() {
            Ok(v)
        } else {
            Err(EvalError::NonFinite)
        }
    }

    fn eval_inner<T: Scalar>(&self) -> Result<Complex<T>, EvalError> {
        use AmplitudeExpr::*;
        Ok(match self {
            Int(n) => Complex::new(
                T::from_u64(*n).ok_or_else(|| EvalError::BadLiteral(n.to_string()))?,
                T::zero(),
            ),
            Decimal(s) => Complex::new(
                s.parse::<T>()
                    .map_err(|_| EvalError::BadLiteral(s.clone()))?,
                T::zero(),
            ),
            I => Complex::i(),
            Sqrt(arg) => {
                let v = arg.eval_inner::<T>()?;
                if !v.im.is_zero() || v.re < T::zero() {
                    return Err(EvalError::SqrtDomain(arg.to_string()));
                }
                Complex::new(v.re.sqrt(), T::zero())
            }
            Neg(arg) => -arg.eval_inner::<T>()?,
            Add(a, b) => a.eval_inner::<T>()? + b.eval_inner::<T>()?,
            Sub(a, b) => a.eval_inner::<T>()? - b.eval_inner::<T>()?,
            Mul(a, b) => a.eval_inner::<T>()? * b.eval_inner::<T>()?,
            Div(a, b) => {
                let num = a.eval_inner::<T>()?;
                if let Sqrt(radicand) = b.as_ref() {
                    let r = radicand.eval_inner::<T>()?;
                    if num.im.is_zero() && r.im.is_zero() && r.re > T::zero() {
                        return Ok(Complex::new(quotient_by_sqrt(num.re, r.re), T::zero()));
                    }
                }
                let den = b.eval_inner::<T>()?;
                if den.is_zero() {
                    return Err(EvalError::DivisionByZero);
                }
                // real divisors divide componentwise; the generic complex
                // formula would round 1/sqrt(2) differently
                if den.im.is_zero() {
                    Complex::new(num.re / den.re, num.im / den.re)
                } else {
                    num / den
                }
            }
        })
    }

    fn precedence(&self) -> u8 {
        use AmplitudeExpr::*;
        match self {
            Add(..) | Sub(..) => 1,
            Mul(..) | Div(..) => 2,
            Neg(_) => 3,
            Int(_) | Decimal(_) | I | Sqrt(_) => 4,
        }
    }
}

impl fmt::Display for AmplitudeExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use AmplitudeExpr::*;
        let wrap = |f: &mut fmt::Formatter<'_>, e: &AmplitudeExpr, paren: bool| {
            if paren {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        };
        let p = self.precedence();
        match self {
            Int(n) => write!(f, "{n}"),
            Decimal(s) => f.write_str(s),
            I => f.write_str("i"),
            Sqrt(a) => write!(f, "sqrt({a})"),
            Neg(a) => {
                f.write_str("-")?;
                wrap(f, a, a.precedence() < p)
            }
            Add(a, b) | Sub(a, b) | Mul(a, b) | Div(a, b) => {
                let op = match self {
                    Add(..) => " + ",
                    Sub(..) => " - ",
                    Mul(..) => "*",
                    _ => "/",
                };
                wrap(f, a, a.precedence() < p)?;
                f.write_str(op)?;
                wrap(f, b, b.precedence() <= p)
            }
        }
    }
}

/// `a / sqrt(b)` with one compensated Newton step, so results like
/// `1/sqrt(2)` come out correctly rounded instead of an ulp low.
fn quotient_by_sqrt<T: Scalar>(a: T, b: T) -> T {
    let r = a / b.sqrt();
    if r.is_zero() || !r.is_finite() {
        return r;
    }
    // r²·b − a², with the rounding error of each product recovered by fma
    let h = r * r;
    let h_lo = r.mul_add(r, -h);
    let p = h * b;
    let p_lo = h.mul_add(b, -p);
    let s = a * a;
    let s_lo = a.mul_add(a, -s);
    let residual = (p - s) + (p_lo - s_lo) + h_lo * b;
    r - residual / ((r + r) * b)
}

#[derive(Clone, Debug, PartialEq)]
enum Token {
    Int(u64),
    Decimal(String),
    I,
    Sqrt,
    Plus,
    Minus,
    Star,
    Slash,
    LParen,
    RParen,
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Int(n) => write!(f, "number `{n}`"),
            Token::Decimal(s) => write!(f, "number `{s}`"),
            Token::I => f.write_str("`i`"),
            Token::Sqrt => f.write_str("`sqrt`"),
            Token::Plus => f.write_str("`+`"),
            Token::Minus => f.write_str("`-`"),
            Token::Star => f.write_str("`*`"),
            Token::Slash => f.write_str("`/`"),
            Token::LParen => f.write_str("`(`"),
            Token::RParen => f.write_str("`)`"),
        }
    }
}

fn tokenize(src: &str) -> Result<Vec<(usize, Token)>, ExprSyntaxError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut pos = 0;
    let err = |offset, message: String| ExprSyntaxError { offset, message };
    while pos < chars.len() {
        let c = chars[pos];
        let start = pos;
        match c {
            c if c.is_whitespace() => {
                pos += 1;
                continue;
            }
            '+' | '-' | '*' | '/' | '(' | ')' => {
                pos += 1;
                out.push((
                    start,
                    match c {
                        '+' => Token::Plus,
                        '-' => Token::Minus,
                        '*' => Token::Star,
                        '/' => Token::Slash,
                        '(' => Token::LParen,
                        _ => Token::RParen,
                    },
                ));
            }
            '0'..='9' => {
                while pos < chars.len() && chars[pos].is_ascii_digit() {
                    pos += 1;
                }
                let mut decimal = false;
                if pos < chars.len() && chars[pos] == '.' {
                    decimal = true;
                    pos += 1;
                    let frac = pos;
                    while pos < chars.len() && chars[pos].is_ascii_digit() {
                        pos += 1;
                    }
                    if pos == frac {
                        return Err(err(pos, "expected digits after `.`".into()));
                    }
                }
                if pos < chars.len() && (chars[pos] == 'e' || chars[pos] == 'E') {
                    decimal = true;
                    pos += 1;
                    if pos < chars.len() && (chars[pos] == '+' || chars[pos] == '-') {
                        pos += 1;
                    }
                    let exp = pos;
                    while pos < chars.len() && chars[pos].is_ascii_digit() {
                        pos += 1;
                    }
                    if pos == exp {
                        return Err(err(pos, "expected exponent digits".into()));
                    }
                }
                let text: String = chars[start..pos].iter().collect();
                let tok = if decimal {
                    Token::Decimal(text)
                } else {
                    Token::Int(
                        text.parse()
                            .map_err(|_| err(start, format!("integer `{text}` too large")))?,
                    )
                };
                out.push((start, tok));
            }
            c if c.is_alphabetic() => {
                while pos < chars.len() && chars[pos].is_alphanumeric() {
                    pos += 1;
                }
                let word: String = chars[start..pos].iter().collect();
                match word.as_str() {
                    "i" => out.push((start, Token::I)),
                    "sqrt" => out.push((start, Token::Sqrt)),
                    _ => return Err(err(start, format!("unknown identifier `{word}`"))),
                }
            }
            other => return Err(err(start, format!("unexpected character `{other}`"))),
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<(usize, Token)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<(usize, &Token)> {
        self.tokens.get(self.pos).map(|(o, t)| (*o, t))
    }

    fn bump(&mut self) -> Option<(usize, Token)> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn expect(&mut self, want: Token) -> Result<(), ExprSyntaxError> {
        match self.bump() {
            Some((_, t)) if t == want => Ok(()),
            Some((offset, t)) => Err(ExprSyntaxError {
                offset,
                message: format!("expected {want}, found {t}"),
            }),
            None => Err(ExprSyntaxError {
                offset: self.end,
                message: format!("expected {want}, found end of expression"),
            }),
        }
    }

    fn expr(&mut self) -> Result<AmplitudeExpr, ExprSyntaxError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some((_, Token::Plus)) => {
                    self.pos += 1;
                    lhs = AmplitudeExpr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some((_, Token::Minus)) => {
                    self.pos += 1;
                    lhs = AmplitudeExpr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<AmplitudeExpr, ExprSyntaxError> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Some((_, Token::Star)) => {
                    self.pos += 1;
                    lhs = AmplitudeExpr::Mul(Box::new(lhs), Box::new(self.factor()?));
                }
                Some((_, Token::Slash)) => {
                    self.pos += 1;
                    lhs = AmplitudeExpr::Div(Box::new(lhs), Box::new(self.factor()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<AmplitudeExpr, ExprSyntaxError> {
        match self.bump() {
            Some((_, Token::Int(n))) => Ok(AmplitudeExpr::Int(n)),
            Some((_, Token::Decimal(s))) => Ok(AmplitudeExpr::Decimal(s)),
            Some((_, Token::I)) => Ok(AmplitudeExpr::I),
            Some((_, Token::Sqrt)) => {
                self.expect(Token::LParen)?;
                let inner = self.expr()?;
                self.expect(Token::RParen)?;
                Ok(AmplitudeExpr::Sqrt(Box::new(inner)))
            }
            Some((_, Token::LParen)) => {
                let inner = self.expr()?;
                self.expect(Token::RParen)?;
                Ok(inner)
            }
            Some((_, Token::Minus)) => Ok(AmplitudeExpr::Neg(Box::new(self.factor()?))),
            Some((offset, t)) => Err(ExprSyntaxError {
                offset,
                message: format!("expected a value, found {t}"),
            }),
            None => Err(ExprSyntaxError {
                offset: self.end,
                message: "expected a value, found end of expression".into(),
            }),
        }
    }
}

/// Parses and evaluates in one go.
pub fn eval_amplitude<T: Scalar>(src: &str) -> Result<Complex<T>, AmplitudeError> {
    Ok(AmplitudeExpr::parse(src)?.eval()?)
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum AmplitudeError {
    #[error(transparent)]
    Syntax(#[from] ExprSyntaxError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}
