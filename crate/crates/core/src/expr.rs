//! Text syntax for scalars and algebra elements.
//!
//! ```text
//! expr  := ['+'|'-'] term (('+'|'-') term)*
//! term  := power (['*'|'/'] power)*        juxtaposition multiplies
//! power := atom ['^' exp]                  exp := ['-'] uint | '(' ['-'] uint ')'
//! atom  := uint | 'q' | 's' | generator | '(' expr ')'
//! generator := 'x' uint ['*']
//! ```
//!
//! A `*` written directly after a generator's digits marks the adjoint, so
//! `x1*x2` is `x1* x2`; put a space before `*` to mean a product. Division and
//! negative exponents are only allowed on scalars.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use thiserror::Error;

use crate::ncalgebra::{AlgebraId, Generator, NCPoly};
use crate::presentations::Alphabet;
use crate::qscalar::{QScalar, ScalarError};

const MAX_EXPONENT: i64 = 4096;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax(String),
    UnknownGenerator(String),
    Scalar(ScalarError),
}

/// `position` is a 0-based character offset into the input.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ParseError {
    pub position: usize,
    pub kind: ParseErrorKind,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let col = self.position + 1;
        match &self.kind {
            ParseErrorKind::Syntax(m) => write!(f, "syntax error at column {col}: {m}"),
            ParseErrorKind::UnknownGenerator(g) => write!(f, "unknown generator `{g}` at column {col}"),
            ParseErrorKind::Scalar(e) => write!(f, "at column {col}: {e}"),
        }
    }
}

impl ParseError {
    pub fn message(&self) -> String {
        match &self.kind {
            ParseErrorKind::Syntax(m) => m.clone(),
            ParseErrorKind::UnknownGenerator(g) => format!("unknown generator `{g}`"),
            ParseErrorKind::Scalar(e) => e.to_string(),
        }
    }
}

/// Parses an element of the algebra with the given generators.
pub fn parse_poly(text: &str, alphabet: &Alphabet) -> Result<NCPoly, ParseError> {
    Parser::new(text, Some(*alphabet)).run()
}

/// Parses an element of `Q(s)`.
pub fn parse_scalar(text: &str) -> Result<QScalar, ParseError> {
    let p = Parser::new(text, None).run()?;
    Ok(p.as_constant().expect("no generators without an alphabet"))
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
    alphabet: Option<Alphabet>,
    id: AlgebraId,
}

impl Parser {
    fn new(text: &str, alphabet: Option<Alphabet>) -> Self {
        let id = alphabet.map(|a| a.algebra).unwrap_or_else(AlgebraId::fresh);
        Parser { chars: text.chars().collect(), pos: 0, alphabet, id }
    }

    fn err<T>(&self, at: usize, msg: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError { position: at, kind: ParseErrorKind::Syntax(msg.into()) })
    }

    fn scalar_err(at: usize, e: ScalarError) -> ParseError {
        ParseError { position: at, kind: ParseErrorKind::Scalar(e) }
    }

    fn skip_ws(&mut self) {
        while self.chars.get(self.pos).is_some_and(|c| c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn run(mut self) -> Result<NCPoly, ParseError> {
        if self.peek().is_none() {
            return self.err(self.pos, "empty expression");
        }
        let p = self.expr()?;
        match self.peek() {
            None => Ok(p),
            Some(c) => self.err(self.pos, format!("unexpected `{c}`")),
        }
    }

    fn expr(&mut self) -> Result<NCPoly, ParseError> {
        let mut negate = false;
        match self.peek() {
            Some('-') => {
                negate = true;
                self.pos += 1;
            }
            Some('+') => self.pos += 1,
            _ => {}
        }
        let first = self.term()?;
        let mut acc = if negate { -&first } else { first };
        loop {
            match self.peek() {
                Some('+') => {
                    self.pos += 1;
                    acc = &acc + &self.term()?;
                }
                Some('-') => {
                    self.pos += 1;
                    acc = &acc - &self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn starts_atom(c: char) -> bool {
        c.is_ascii_digit() || c == '(' || c == 'q' || c == 's' || c == 'x'
    }

    fn term(&mut self) -> Result<NCPoly, ParseError> {
        let mut acc = self.power()?;
        loop {
            match self.peek() {
                Some('*') => {
                    self.pos += 1;
                    acc = &acc * &self.power()?;
                }
                Some('/') => {
                    self.pos += 1;
                    let at = self.pos;
                    let d = self.power()?;
                    let Some(c) = d.as_constant() else {
                        return self.err(at, "can only divide by a scalar");
                    };
                    let inv = c.inv().map_err(|e| Self::scalar_err(at, e))?;
                    acc = acc.scale(&inv);
                }
                Some(c) if Self::starts_atom(c) => acc = &acc * &self.power()?,
                _ => return Ok(acc),
            }
        }
    }

    fn power(&mut self) -> Result<NCPoly, ParseError> {
        let at = self.peek().map(|_| self.pos).unwrap_or(self.pos);
        let base = self.atom()?;
        if self.peek() != Some('^') {
            return Ok(base);
        }
        self.pos += 1;
        let paren = self.peek() == Some('(');
        if paren {
            self.pos += 1;
        }
        let neg = self.peek() == Some('-');
        if neg {
            self.pos += 1;
        }
        let exp_at = self.pos;
        let digits = self.uint_text();
        if digits.is_empty() {
            return self.err(exp_at, "expected an integer exponent");
        }
        let mag: i64 = match digits.parse() {
            Ok(v) if v <= MAX_EXPONENT => v,
            _ => return self.err(exp_at, "exponent too large"),
        };
        if paren {
            if self.peek() != Some(')') {
                return self.err(self.pos, "expected `)`");
            }
            self.pos += 1;
        }
        let e = if neg { -mag } else { mag };
        if e >= 0 {
            return Ok(base.pow(e as u32));
        }
        let Some(c) = base.as_constant() else {
            return self.err(at, "negative powers are only allowed on scalars");
        };
        let v = c.pow(e as i32).map_err(|err| Self::scalar_err(at, err))?;
        Ok(NCPoly::constant(self.id, v))
    }

    fn uint_text(&mut self) -> String {
        let start = self.pos;
        while self.chars.get(self.pos).is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        self.chars[start..self.pos].iter().collect()
    }

    fn atom(&mut self) -> Result<NCPoly, ParseError> {
        let at = self.pos;
        match self.peek() {
            None => self.err(at, "unexpected end of input"),
            Some('(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if self.peek() != Some(')') {
                    return self.err(self.pos, "expected `)`");
                }
                self.pos += 1;
                Ok(inner)
            }
            Some('q') => {
                self.pos += 1;
                Ok(NCPoly::constant(self.id, QScalar::q()))
            }
            Some('s') => {
                self.pos += 1;
                Ok(NCPoly::constant(self.id, QScalar::s()))
            }
            Some(c) if c.is_ascii_digit() => {
                let digits = self.uint_text();
                let n: BigInt = digits.parse().expect("digits parse");
                Ok(NCPoly::constant(self.id, QScalar::from_rational(BigRational::from_integer(n))))
            }
            Some('x') => {
                self.pos += 1;
                let digits = self.uint_text();
                if digits.is_empty() {
                    return self.err(self.pos, "expected generator index after `x`");
                }
                let starred = self.chars.get(self.pos) == Some(&'*');
                if starred {
                    self.pos += 1;
                }
                let name = format!("x{digits}{}", if starred { "*" } else { "" });
                let unknown = || ParseError { position: at, kind: ParseErrorKind::UnknownGenerator(name.clone()) };
                let level: usize = digits.parse().map_err(|_| unknown())?;
                let Some(alphabet) = self.alphabet else {
                    return Err(unknown());
                };
                if level > 255 || (level == 0 && starred) {
                    return Err(unknown());
                }
                let g = Generator::new(level, starred);
                if !alphabet.contains(g) {
                    return Err(unknown());
                }
                Ok(NCPoly::generator(self.id, g))
            }
            Some(c) => self.err(at, format!("unexpected `{c}`")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ncalgebra::Word;

    fn s3() -> Alphabet {
        Alphabet::for_dim(4)
    }

    #[test]
    fn scalars() {
        assert_eq!(parse_scalar("(1+q)*(1+q^-1)").unwrap().to_string(), "(q^-1+2+q)");
        assert_eq!(parse_scalar("1/2*q^(-1)").unwrap(), QScalar::ratio(1, 2) * QScalar::q_pow(-1));
        assert_eq!(parse_scalar("s^2").unwrap(), QScalar::q());
        assert_eq!(parse_scalar("-3").unwrap(), QScalar::from_int(-3));
        assert!(matches!(parse_scalar("1/(1-1)").unwrap_err().kind, ParseErrorKind::Scalar(_)));
    }

    #[test]
    fn polynomials() {
        let a = s3();
        let p = parse_poly("(1+q)*x1^2", &a).unwrap();
        let w = Word::new(vec![Generator::x(1), Generator::x(1)]);
        assert_eq!(p.term_count(), 1);
        assert_eq!(p.coeff(&w), &QScalar::one() + &QScalar::q());

        let r = parse_poly("x2* x2 + x1* x1", &a).unwrap();
        assert_eq!(r.term_count(), 2);
        assert_eq!(r.coeff(&Word::new(vec![Generator::x_star(2), Generator::x(2)])), QScalar::one());

        // star binds to the generator, a spaced `*` multiplies
        let starred = parse_poly("x1*x2", &a).unwrap();
        let product = parse_poly("x1 * x2", &a).unwrap();
        assert_eq!(starred.coeff(&Word::new(vec![Generator::x_star(1), Generator::x(2)])), QScalar::one());
        assert_eq!(product.coeff(&Word::new(vec![Generator::x(1), Generator::x(2)])), QScalar::one());
    }

    #[test]
    fn errors_carry_positions() {
        let a = s3();
        let e = parse_poly("", &a).unwrap_err();
        assert_eq!(e.position, 0);
        let e = parse_poly("x1 + x0", &a).unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::UnknownGenerator("x0".into()));
        assert_eq!(e.position, 5);
        let e = parse_poly("x1 + ", &a).unwrap_err();
        assert!(matches!(e.kind, ParseErrorKind::Syntax(_)));
        assert!(parse_poly("x1^-1", &a).is_err());
        assert!(parse_poly("1/x1", &a).is_err());
        assert!(parse_poly("(x1", &a).is_err());
    }

    #[test]
    fn display_round_trip() {
        let a = s3();
        for text in ["(1-q) x1* x1 + 1/2*q^-1 x2 x1* - 3", "s^-3 x2* + (q+q^2)/(-1+q) x1 x1", "0", "-x1"] {
            let p = parse_poly(text, &a).unwrap();
            let again = parse_poly(&p.to_string(), &a).unwrap();
            assert_eq!(p, again, "{text} -> {p}");
        }
    }
}
