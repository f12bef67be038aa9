//! Text syntax for forms: `e127 - 1/2 e{1,10,12} + 3`.
//!
//! Single-digit shorthand (`e127`) is only accepted in dimension at most 9;
//! above that every blade must be braced. The printer emits the canonical
//! order of [`Blade`] with lowest-terms coefficients.

use std::fmt;

use num_traits::{One, Signed};
use thiserror::Error;

use crate::form::{Blade, Form, FormError};
use crate::scalar::{self, Scalar};

/// Largest dimension in which `e127`-style shorthand is unambiguous.
pub const SHORTHAND_MAX_DIM: usize = 9;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("column {column}: {kind}")]
pub struct LiteralError {
    /// 1-based character column within the literal.
    pub column: usize,
    pub kind: LiteralErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LiteralErrorKind {
    #[error("unexpected character '{0}'")]
    Unexpected(char),
    #[error("unexpected end of input")]
    UnexpectedEnd,
    #[error("invalid coefficient '{0}'")]
    BadCoefficient(String),
    #[error("shorthand blade '{0}' is ambiguous in dimension {1}; use braces, e.g. e{{1,10}}")]
    AmbiguousShorthand(String, usize),
    #[error("index {index} out of range 1..={dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("duplicate index {0} in a monomial")]
    DuplicateIndex(usize),
    #[error("empty literal")]
    Empty,
    #[error("expected a combination of basis vectors")]
    NotAVector,
}

pub fn write_form(f: &mut fmt::Formatter<'_>, form: &Form) -> fmt::Result {
    if form.is_zero() {
        return write!(f, "0");
    }
    let braced = form.dim() > SHORTHAND_MAX_DIM;
    for (k, (blade, coeff)) in form.terms().enumerate() {
        let negative = coeff.is_negative();
        match (k, negative) {
            (0, true) => write!(f, "-")?,
            (0, false) => {}
            (_, true) => write!(f, " - ")?,
            (_, false) => write!(f, " + ")?,
        }
        let magnitude = coeff.abs();
        if blade == Blade::SCALAR {
            write!(f, "{magnitude}")?;
            continue;
        }
        if !magnitude.is_one() {
            write!(f, "{magnitude} ")?;
        }
        write_blade(f, blade, braced)?;
    }
    Ok(())
}

pub fn write_blade(f: &mut impl fmt::Write, blade: Blade, braced: bool) -> fmt::Result {
    write!(f, "e")?;
    if braced {
        write!(f, "{{")?;
        for (k, i) in blade.indices().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, "}}")
    } else {
        blade.indices().try_for_each(|i| write!(f, "{i}"))
    }
}

/// Parses a form literal in ambient dimension `dim`.
pub fn parse_form(text: &str, dim: usize) -> Result<Form, LiteralError> {
    Parser::new(text, dim).form()
}

/// Parses a 1-form literal into coordinates `(v_1, ..., v_dim)`.
pub fn parse_vector(text: &str, dim: usize) -> Result<Vec<Scalar>, LiteralError> {
    let form = parse_form(text, dim)?;
    if !form.is_homogeneous_of(1) {
        return Err(LiteralError {
            column: 1,
            kind: LiteralErrorKind::NotAVector,
        });
    }
    let mut out = vec![scalar::zero(); dim];
    for (blade, c) in form.terms() {
        out[blade.max_index() - 1] = c.clone();
    }
    Ok(out)
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
    dim: usize,
}

impl Parser {
    fn new(text: &str, dim: usize) -> Self {
        Parser {
            chars: text.chars().collect(),
            pos: 0,
            dim,
        }
    }

    fn err(&self, kind: LiteralErrorKind) -> LiteralError {
        LiteralError {
            column: self.pos + 1,
            kind,
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn form(&mut self) -> Result<Form, LiteralError> {
        let mut out = Form::zero(self.dim);
        self.skip_ws();
        if self.peek().is_none() {
            return Err(self.err(LiteralErrorKind::Empty));
        }
        let mut first = true;
        loop {
            self.skip_ws();
            let Some(c) = self.peek() else {
                if first {
                    return Err(self.err(LiteralErrorKind::UnexpectedEnd));
                }
                return Ok(out);
            };
            let negative = match c {
                '+' => {
                    self.pos += 1;
                    false
                }
                '-' => {
                    self.pos += 1;
                    true
                }
                _ if first => false,
                other => return Err(self.err(LiteralErrorKind::Unexpected(other))),
            };
            self.skip_ws();
            let (blade, odd, coeff) = self.term()?;
            let mut coeff = coeff;
            if negative != odd {
                coeff = -coeff;
            }
            out.add_term(blade, coeff);
            first = false;
        }
    }

    /// `[coefficient] [*] [blade]`, at least one of the two present.
    fn term(&mut self) -> Result<(Blade, bool, Scalar), LiteralError> {
        let coeff = self.coefficient()?;
        self.skip_ws();
        if coeff.is_some() && self.peek() == Some('*') {
            self.pos += 1;
            self.skip_ws();
        }
        match self.peek() {
            Some('e') => {
                let (odd, blade) = self.blade()?;
                Ok((blade, odd, coeff.unwrap_or_else(scalar::one)))
            }
            _ => match coeff {
                Some(c) => Ok((Blade::SCALAR, false, c)),
                None => Err(match self.peek() {
                    Some(ch) => self.err(LiteralErrorKind::Unexpected(ch)),
                    None => self.err(LiteralErrorKind::UnexpectedEnd),
                }),
            },
        }
    }

    fn coefficient(&mut self) -> Result<Option<Scalar>, LiteralError> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            while p.peek().is_some_and(|c| c.is_ascii_digit()) {
                p.pos += 1;
            }
        };
        digits(self);
        if self.pos == start {
            return Ok(None);
        }
        let save = self.pos;
        self.skip_ws();
        if self.peek() == Some('/') {
            self.pos += 1;
            self.skip_ws();
            let dstart = self.pos;
            digits(self);
            if self.pos == dstart {
                return Err(self.err(LiteralErrorKind::BadCoefficient(
                    self.chars[start..self.pos].iter().collect(),
                )));
            }
        } else {
            self.pos = save;
        }
        let text: String = self.chars[start..self.pos].iter().filter(|c| !c.is_whitespace()).collect();
        match scalar::parse(&text) {
            Some(value) => Ok(Some(value)),
            None => Err(LiteralError {
                column: start + 1,
                kind: LiteralErrorKind::BadCoefficient(text),
            }),
        }
    }

    fn blade(&mut self) -> Result<(bool, Blade), LiteralError> {
        let start = self.pos;
        self.pos += 1; // 'e'
        let mut indices = Vec::new();
        if self.peek() == Some('{') {
            self.pos += 1;
            loop {
                self.skip_ws();
                let nstart = self.pos;
                while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                    self.pos += 1;
                }
                if self.pos == nstart {
                    return Err(match self.peek() {
                        Some(c) => self.err(LiteralErrorKind::Unexpected(c)),
                        None => self.err(LiteralErrorKind::UnexpectedEnd),
                    });
                }
                let text: String = self.chars[nstart..self.pos].iter().collect();
                indices.push(text.parse::<usize>().unwrap_or(usize::MAX));
                self.skip_ws();
                match self.peek() {
                    Some(',') => self.pos += 1,
                    Some('}') => {
                        self.pos += 1;
                        break;
                    }
                    Some(c) => return Err(self.err(LiteralErrorKind::Unexpected(c))),
                    None => return Err(self.err(LiteralErrorKind::UnexpectedEnd)),
                }
            }
        } else {
            let dstart = self.pos;
            while let Some(d) = self.peek().and_then(|c| c.to_digit(10)) {
                indices.push(d as usize);
                self.pos += 1;
            }
            if self.pos == dstart {
                return Err(match self.peek() {
                    Some(c) => self.err(LiteralErrorKind::Unexpected(c)),
                    None => self.err(LiteralErrorKind::UnexpectedEnd),
                });
            }
            if self.dim > SHORTHAND_MAX_DIM && indices.len() > 1 {
                let token: String = self.chars[start..self.pos].iter().collect();
                return Err(LiteralError {
                    column: start + 1,
                    kind: LiteralErrorKind::AmbiguousShorthand(token, self.dim),
                });
            }
        }
        if let Some(&bad) = indices.iter().find(|&&i| i == 0 || i > self.dim) {
            return Err(LiteralError {
                column: start + 1,
                kind: LiteralErrorKind::IndexOutOfRange { index: bad, dim: self.dim },
            });
        }
        Blade::from_indices(&indices).map_err(|e| LiteralError {
            column: start + 1,
            kind: match e {
                FormError::DuplicateIndex(i) => LiteralErrorKind::DuplicateIndex(i),
                _ => LiteralErrorKind::IndexOutOfRange {
                    index: indices.iter().copied().max().unwrap_or(0),
                    dim: self.dim,
                },
            },
        })
    }
}

/// Canonical text of a form (same as `Display`).
pub fn format_form(form: &Form) -> String {
    form.to_string()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;

    fn f(dim: usize, terms: &[(i64, &[usize])]) -> Form {
        Form::from_terms(dim, terms.iter().map(|(c, i)| (*c, *i))).unwrap()
    }

    #[test]
    fn parses_shorthand_and_coefficients() {
        let form = parse_form("e127 - e245 + 1/2 e12 + 3", 7).unwrap();
        let mut expected = f(7, &[(1, &[1, 2, 7]), (-1, &[2, 4, 5]), (3, &[])]);
        expected += &Form::term(7, ratio(1, 2), &[1, 2]).unwrap();
        assert_eq!(form, expected);
        assert_eq!(parse_form("  -e1+2e2 ", 3).unwrap(), f(3, &[(-1, &[1]), (2, &[2])]));
        assert_eq!(parse_form("2 * e12", 3).unwrap(), f(3, &[(2, &[1, 2])]));
    }

    #[test]
    fn unsorted_monomials_pick_up_the_permutation_sign() {
        assert_eq!(parse_form("e21", 3).unwrap(), f(3, &[(-1, &[1, 2])]));
        assert_eq!(parse_form("-e617", 7).unwrap(), f(7, &[(1, &[1, 6, 7])]));
    }

    #[test]
    fn braced_indices() {
        let form = parse_form("e{1,10,12} - e{3}", 12).unwrap();
        assert_eq!(form, f(12, &[(1, &[1, 10, 12]), (-1, &[3])]));
        assert_eq!(form.to_string(), "-e{3} + e{1,10,12}");
    }

    #[test]
    fn errors() {
        assert_eq!(parse_form("e11", 7).unwrap_err().kind, LiteralErrorKind::DuplicateIndex(1));
        assert_eq!(
            parse_form("e18", 7).unwrap_err().kind,
            LiteralErrorKind::IndexOutOfRange { index: 8, dim: 7 }
        );
        assert!(matches!(
            parse_form("e12", 10).unwrap_err().kind,
            LiteralErrorKind::AmbiguousShorthand(_, 10)
        ));
        assert_eq!(parse_form("", 3).unwrap_err().kind, LiteralErrorKind::Empty);
        let err = parse_form("e1 e2", 3).unwrap_err();
        assert_eq!(err.kind, LiteralErrorKind::Unexpected('e'));
        assert_eq!(err.column, 4);
        assert!(parse_form("1/0 e1", 3).is_err());
        assert!(parse_form("e1 +", 3).is_err());
    }

    #[test]
    fn canonical_printing() {
        let form = parse_form("e347 + e127 - 1/2 e12 + 1 - 2 e3", 7).unwrap();
        assert_eq!(form.to_string(), "1 - 2 e3 - 1/2 e12 + e127 + e347");
        assert_eq!(Form::zero(4).to_string(), "0");
        assert_eq!(parse_form("0", 4).unwrap(), Form::zero(4));
        assert_eq!(parse_form("-3/2", 4).unwrap().to_string(), "-3/2");
    }

    #[test]
    fn vectors() {
        assert_eq!(
            parse_vector("-e3 + 2 e1", 3).unwrap(),
            vec![crate::scalar::int(2), crate::scalar::int(0), crate::scalar::int(-1)]
        );
        assert!(parse_vector("e12", 3).is_err());
    }
}
