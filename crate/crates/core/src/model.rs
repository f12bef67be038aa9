//! The `.g2t` model format.
//!
//! ```text
//! # comment
//! algebra g dim 7
//!   d e3 = e17
//!   bracket [1,5] = -e4
//! form phi on g = e127 + e347
//! fiber a on g = span(e6)
//! task solve-h g phi a expect dimension 15
//! ```

use std::collections::BTreeMap;
use std::fmt;

use num_traits::Zero;
use thiserror::Error;

use crate::form::Form;
use crate::lie::{LieAlgebra, SpanIdeal};
use crate::literal::{self, LiteralErrorKind};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {kind}")]
pub struct ModelError {
    pub line: usize,
    pub column: usize,
    pub kind: ModelErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelErrorKind {
    #[error("{0}")]
    Syntax(String),
    #[error(transparent)]
    Literal(LiteralErrorKind),
    #[error("unknown algebra '{0}'")]
    UnknownAlgebra(String),
    #[error("'{0}' is already declared")]
    Duplicate(String),
    #[error("index {index} out of range 1..={dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("structure constant c^{k}_{{{i},{j}}} given twice")]
    DuplicateConstant { i: usize, j: usize, k: usize },
    #[error("invalid declaration: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlgebraDecl {
    pub name: String,
    pub algebra: LieAlgebra,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormDecl {
    pub name: String,
    pub algebra: String,
    pub form: Form,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiberDecl {
    pub name: String,
    pub algebra: String,
    pub span: SpanIdeal,
}

#[derive(Debug, Clone, Eq)]
pub struct Task {
    pub command: String,
    pub args: Vec<String>,
    /// source line, 0 for tasks built in code; ignored by equality
    pub line: usize,
}

impl PartialEq for Task {
    fn eq(&self, other: &Self) -> bool {
        self.command == other.command && self.args == other.args
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ModelFile {
    pub algebras: Vec<AlgebraDecl>,
    pub forms: Vec<FormDecl>,
    pub fibers: Vec<FiberDecl>,
    pub tasks: Vec<Task>,
}

impl ModelFile {
    pub fn algebra(&self, name: &str) -> Option<&LieAlgebra> {
        self.algebras.iter().find(|a| a.name == name).map(|a| &a.algebra)
    }

    pub fn form(&self, name: &str) -> Option<&FormDecl> {
        self.forms.iter().find(|f| f.name == name)
    }

    pub fn fiber(&self, name: &str) -> Option<&FiberDecl> {
        self.fibers.iter().find(|f| f.name == name)
    }

    fn name_taken(&self, name: &str) -> bool {
        self.algebra(name).is_some() || self.form(name).is_some() || self.fiber(name).is_some()
    }
}

fn is_name(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

struct Line<'a> {
    number: usize,
    text: &'a str,
}

impl<'a> Line<'a> {
    fn err(&self, column: usize, kind: ModelErrorKind) -> ModelError {
        ModelError {
            line: self.number,
            column,
            kind,
        }
    }

    /// 1-based column of a subslice of `text`.
    fn column_of(&self, part: &str) -> usize {
        let offset = part.as_ptr() as usize - self.text.as_ptr() as usize;
        self.text[..offset].chars().count() + 1
    }

    fn syntax(&self, part: &str, message: impl Into<String>) -> ModelError {
        self.err(self.column_of(part), ModelErrorKind::Syntax(message.into()))
    }

    fn literal(&self, expr: &str, dim: usize) -> Result<Form, ModelError> {
        literal::parse_form(expr, dim)
            .map_err(|e| self.err(self.column_of(expr) + e.column - 1, ModelErrorKind::Literal(e.kind)))
    }

    fn vector(&self, expr: &str, dim: usize) -> Result<Vec<Scalar>, ModelError> {
        literal::parse_vector(expr, dim)
            .map_err(|e| self.err(self.column_of(expr) + e.column - 1, ModelErrorKind::Literal(e.kind)))
    }
}

/// Splits off the first whitespace-delimited word.
fn word(s: &str) -> (&str, &str) {
    let s = s.trim_start();
    let end = s.find(char::is_whitespace).unwrap_or(s.len());
    (&s[..end], &s[end..])
}

/// `(lhs, rhs)` around the first `=`, both trimmed.
fn split_eq(s: &str) -> Option<(&str, &str)> {
    let pos = s.find('=')?;
    Some((s[..pos].trim(), s[pos + 1..].trim()))
}

struct PendingAlgebra {
    name: String,
    dim: usize,
    constants: BTreeMap<(usize, usize, usize), Scalar>,
    /// `(line, column)` of the first body line, for build errors
    origin: (usize, usize),
}

impl PendingAlgebra {
    fn set(&mut self, line: &Line, at: &str, i: usize, j: usize, k: usize, c: Scalar) -> Result<(), ModelError> {
        if c.is_zero() {
            return Ok(());
        }
        let (key, c) = if i < j { ((i, j, k), c) } else { ((j, i, k), -c) };
        if self.constants.insert(key, c).is_some() {
            return Err(line.err(
                line.column_of(at),
                ModelErrorKind::DuplicateConstant {
                    i: key.0,
                    j: key.1,
                    k: key.2,
                },
            ));
        }
        Ok(())
    }

    fn finish(self) -> Result<AlgebraDecl, ModelError> {
        let mut grouped: BTreeMap<(usize, usize), Vec<Scalar>> = BTreeMap::new();
        for ((i, j, k), c) in self.constants {
            grouped.entry((i, j)).or_insert_with(|| vec![Scalar::zero(); self.dim])[k - 1] = c;
        }
        let algebra = LieAlgebra::from_brackets(self.dim, grouped.into_iter().map(|((i, j), v)| (i, j, v)))
            .map_err(|e| ModelError {
                line: self.origin.0,
                column: self.origin.1,
                kind: ModelErrorKind::Invalid(e.to_string()),
            })?;
        Ok(AlgebraDecl {
            name: self.name,
            algebra,
        })
    }
}

fn parse_index(line: &Line, token: &str, dim: usize) -> Result<usize, ModelError> {
    let index: usize = token
        .trim()
        .parse()
        .map_err(|_| line.syntax(token, format!("expected a basis index, found '{}'", token.trim())))?;
    if index == 0 || index > dim {
        return Err(line.err(line.column_of(token), ModelErrorKind::IndexOutOfRange { index, dim }));
    }
    Ok(index)
}

pub fn parse_model(text: &str) -> Result<ModelFile, ModelError> {
    let mut model = ModelFile::default();
    let mut pending: Option<PendingAlgebra> = None;

    for (number, raw) in text.lines().enumerate() {
        let line = Line {
            number: number + 1,
            text: raw,
        };
        let content = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        if content.trim().is_empty() {
            continue;
        }
        let (keyword, rest) = word(content);
        match keyword {
            "d" | "bracket" => {
                let Some(alg) = pending.as_mut() else {
                    return Err(line.syntax(keyword, format!("'{keyword}' outside an algebra block")));
                };
                if alg.constants.is_empty() {
                    alg.origin = (line.number, line.column_of(keyword));
                }
                let (lhs, rhs) =
                    split_eq(rest).ok_or_else(|| line.syntax(keyword, "expected '=' in structure line"))?;
                if rhs.is_empty() {
                    return Err(line.syntax(lhs, "missing right-hand side"));
                }
                if keyword == "d" {
                    let k_text = lhs
                        .strip_prefix('e')
                        .map(|s| s.trim_start_matches('{').trim_end_matches('}'))
                        .ok_or_else(|| line.syntax(lhs, "expected 'd e<k> = <2-form>'"))?;
                    let k = parse_index(&line, k_text, alg.dim)?;
                    let form = line.literal(rhs, alg.dim)?;
                    if !form.is_homogeneous_of(2) {
                        return Err(line.syntax(rhs, "differential of a 1-form must be a 2-form"));
                    }
                    for (blade, c) in form.terms() {
                        let mut idx = blade.indices();
                        let (i, j) = (idx.next().unwrap(), idx.next().unwrap());
                        alg.set(&line, rhs, i, j, k, -c.clone())?;
                    }
                } else {
                    let inner = lhs
                        .strip_prefix('[')
                        .and_then(|s| s.strip_suffix(']'))
                        .ok_or_else(|| line.syntax(lhs, "expected 'bracket [i,j] = <vector>'"))?;
                    let (a, b) = inner
                        .split_once(',')
                        .ok_or_else(|| line.syntax(inner, "expected two indices"))?;
                    let i = parse_index(&line, a, alg.dim)?;
                    let j = parse_index(&line, b, alg.dim)?;
                    if i == j {
                        return Err(line.syntax(lhs, "bracket of a basis vector with itself is zero"));
                    }
                    let v = line.vector(rhs, alg.dim)?;
                    for (k, c) in v.into_iter().enumerate() {
                        alg.set(&line, rhs, i, j, k + 1, c)?;
                    }
                }
            }
            _ => {
                if let Some(done) = pending.take() {
                    model.algebras.push(done.finish()?);
                }
                match keyword {
                    "algebra" => {
                        let (name, rest) = word(rest);
                        let (dim_kw, rest) = word(rest);
                        let (dim_text, rest) = word(rest);
                        if !is_name(name) {
                            return Err(line.syntax(keyword, "expected 'algebra <name> dim <n>'"));
                        }
                        if dim_kw != "dim" || !rest.trim().is_empty() {
                            return Err(line.syntax(name, "expected 'algebra <name> dim <n>'"));
                        }
                        let dim: usize = dim_text
                            .parse()
                            .map_err(|_| line.syntax(dim_text, "dimension must be a positive integer"))?;
                        if dim == 0 || dim > crate::form::MAX_DIM {
                            return Err(line.syntax(dim_text, format!("dimension must be in 1..={}", crate::form::MAX_DIM)));
                        }
                        if model.name_taken(name) {
                            return Err(line.err(line.column_of(name), ModelErrorKind::Duplicate(name.into())));
                        }
                        pending = Some(PendingAlgebra {
                            name: name.to_string(),
                            dim,
                            constants: BTreeMap::new(),
                            origin: (line.number, 1),
                        });
                    }
                    "form" | "fiber" => {
                        let (name, rest) = word(rest);
                        let (on, rest) = word(rest);
                        let (alg_name, rest) = word(rest);
                        if !is_name(name) || on != "on" {
                            return Err(line.syntax(keyword, format!("expected '{keyword} <name> on <algebra> = ...'")));
                        }
                        if model.name_taken(name) {
                            return Err(line.err(line.column_of(name), ModelErrorKind::Duplicate(name.into())));
                        }
                        let dim = model
                            .algebra(alg_name)
                            .ok_or_else(|| {
                                line.err(line.column_of(alg_name), ModelErrorKind::UnknownAlgebra(alg_name.into()))
                            })?
                            .dim();
                        let rhs = rest
                            .trim_start()
                            .strip_prefix('=')
                            .map(str::trim)
                            .ok_or_else(|| line.syntax(alg_name, "expected '=' after the algebra name"))?;
                        if rhs.is_empty() {
                            return Err(line.syntax(alg_name, "missing right-hand side"));
                        }
                        if keyword == "form" {
                            let form = line.literal(rhs, dim)?;
                            model.forms.push(FormDecl {
                                name: name.into(),
                                algebra: alg_name.into(),
                                form,
                            });
                        } else {
                            let span = parse_span(&line, rhs, dim)?;
                            model.fibers.push(FiberDecl {
                                name: name.into(),
                                algebra: alg_name.into(),
                                span,
                            });
                        }
                    }
                    "task" => {
                        let mut tokens = rest.split_whitespace();
                        let command = tokens
                            .next()
                            .ok_or_else(|| line.syntax(keyword, "missing task command"))?;
                        model.tasks.push(Task {
                            command: command.into(),
                            args: tokens.map(String::from).collect(),
                            line: line.number,
                        });
                    }
                    other => return Err(line.syntax(other, format!("unknown keyword '{other}'"))),
                }
            }
        }
    }
    if let Some(done) = pending.take() {
        model.algebras.push(done.finish()?);
    }
    Ok(model)
}

fn parse_span(line: &Line, rhs: &str, dim: usize) -> Result<SpanIdeal, ModelError> {
    let inner = rhs
        .strip_prefix("span")
        .map(str::trim_start)
        .and_then(|s| s.strip_prefix('('))
        .and_then(|s| s.strip_suffix(')'))
        .ok_or_else(|| line.syntax(rhs, "expected 'span(e<i>, ...)'"))?;
    let mut gens = Vec::new();
    if !inner.trim().is_empty() {
        for item in split_top_level_commas(inner) {
            let v = line.vector(item.trim(), dim)?;
            let mut nonzero = v.iter().enumerate().filter(|(_, c)| !c.is_zero());
            match (nonzero.next(), nonzero.next()) {
                (Some((i, c)), None) if crate::scalar::is_unit(c) && c > &Scalar::zero() => gens.push(i + 1),
                _ => return Err(line.syntax(item, "fiber generators must be basis vectors e<i>")),
            }
        }
    }
    SpanIdeal::new(dim, gens).map_err(|e| line.err(line.column_of(rhs), ModelErrorKind::Invalid(e.to_string())))
}

/// Splits on commas outside braces, so `e{10}, e{11}` yields two items.
fn split_top_level_commas(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0usize;
    let mut start = 0;
    for (i, c) in s.char_indices() {
        match c {
            '{' => depth += 1,
            '}' => depth = depth.saturating_sub(1),
            ',' if depth == 0 => {
                out.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(&s[start..]);
    out
}

fn write_index_blade(f: &mut fmt::Formatter<'_>, index: usize, dim: usize) -> fmt::Result {
    if dim > literal::SHORTHAND_MAX_DIM {
        write!(f, "e{{{index}}}")
    } else {
        write!(f, "e{index}")
    }
}

/// Canonical printer: algebras as `d e<k>` lines, then fibers, forms and tasks.
impl fmt::Display for ModelFile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for decl in &self.algebras {
            let g = &decl.algebra;
            writeln!(f, "algebra {} dim {}", decl.name, g.dim())?;
            for k in 1..=g.dim() {
                let de = g.basis_differential(k);
                if !de.is_zero() {
                    write!(f, "  d ")?;
                    write_index_blade(f, k, g.dim())?;
                    writeln!(f, " = {de}")?;
                }
            }
        }
        for fiber in &self.fibers {
            write!(f, "fiber {} on {} = span(", fiber.name, fiber.algebra)?;
            for (n, &i) in fiber.span.generators().iter().enumerate() {
                if n > 0 {
                    write!(f, ", ")?;
                }
                write_index_blade(f, i, fiber.span.dim())?;
            }
            writeln!(f, ")")?;
        }
        for form in &self.forms {
            writeln!(f, "form {} on {} = {}", form.name, form.algebra, form.form)?;
        }
        for task in &self.tasks {
            write!(f, "task {}", task.command)?;
            for arg in &task.args {
                write!(f, " {arg}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::int;

    const SMALL: &str = "\
# Heisenberg times a line
algebra h dim 4
  bracket [1,2] = e3   # central
fiber z on h = span(e3)
form w on h = e12 - 1/2 e34
task differential w
";

    #[test]
    fn parses_declarations() {
        let m = parse_model(SMALL).unwrap();
        let h = m.algebra("h").unwrap();
        assert_eq!(h.bracket(1, 2), vec![int(0), int(0), int(1), int(0)]);
        assert_eq!(h.basis_differential(3), &literal::parse_form("-e12", 4).unwrap());
        assert_eq!(m.fiber("z").unwrap().span.generators(), &[3]);
        assert_eq!(m.form("w").unwrap().form.to_string(), "e12 - 1/2 e34");
        assert_eq!(
            m.tasks,
            vec![Task {
                command: "differential".into(),
                args: vec!["w".into()],
                line: 6
            }]
        );
    }

    #[test]
    fn differential_and_bracket_lines_agree() {
        let a = parse_model("algebra g dim 3\n d e3 = -e12\n").unwrap();
        let b = parse_model("algebra g dim 3\n bracket [2,1] = -e3\n").unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn form_round_trips_byte_identically() {
        let text = "algebra g dim 7\nform phi on g = e127 + e347\n";
        let m = parse_model(text).unwrap();
        assert_eq!(m.to_string(), text);
    }

    #[test]
    fn canonical_print_round_trip() {
        let m = parse_model(SMALL).unwrap();
        let printed = m.to_string();
        let again = parse_model(&printed).unwrap();
        assert_eq!(again, m);
        assert_eq!(again.to_string(), printed);
    }

    #[test]
    fn braced_indices_in_large_dimension() {
        let text = "algebra big dim 12\n  d e{12} = e{1,10}\nfiber f on big = span(e{12}, e{11})\n";
        let m = parse_model(text).unwrap();
        assert_eq!(m.fiber("f").unwrap().span.generators(), &[11, 12]);
        assert_eq!(parse_model(&m.to_string()).unwrap(), m);
        let err = parse_model("algebra big dim 12\nform x on big = e110\n").unwrap_err();
        assert!(matches!(err.kind, ModelErrorKind::Literal(LiteralErrorKind::AmbiguousShorthand(..))));
        assert_eq!((err.line, err.column), (2, 17));
    }

    #[test]
    fn errors_carry_positions() {
        let err = parse_model("algebra g dim 7\n  d e3 = e11\n").unwrap_err();
        assert_eq!(err.kind, ModelErrorKind::Literal(LiteralErrorKind::DuplicateIndex(1)));
        assert_eq!(err.line, 2);
        let err = parse_model("form x on nowhere = e1\n").unwrap_err();
        assert_eq!(err.kind, ModelErrorKind::UnknownAlgebra("nowhere".into()));
        assert_eq!((err.line, err.column), (1, 11));
        let err = parse_model("algebra g dim 3\n  d e4 = e12\n").unwrap_err();
        assert_eq!(err.kind, ModelErrorKind::IndexOutOfRange { index: 4, dim: 3 });
        let err = parse_model("algebra g dim 3\nform g on g = 1\n").unwrap_err();
        assert_eq!(err.kind, ModelErrorKind::Duplicate("g".into()));
        let err = parse_model("  d e1 = e23\n").unwrap_err();
        assert!(matches!(err.kind, ModelErrorKind::Syntax(_)));
        let err = parse_model("algebra g dim 3\n d e3 = e12\n bracket [1,2] = -e3\n").unwrap_err();
        assert_eq!(err.kind, ModelErrorKind::DuplicateConstant { i: 1, j: 2, k: 3 });
        let err = parse_model("algebra g dim 3\nfiber a on g = span(e1 + e2)\n").unwrap_err();
        assert!(matches!(err.kind, ModelErrorKind::Syntax(_)));
        let err = parse_model("widget\n").unwrap_err();
        assert!(err.to_string().starts_with("line 1, column 1:"));
    }

    #[test]
    fn empty_model() {
        assert_eq!(parse_model("# nothing\n\n").unwrap(), ModelFile::default());
    }
}
