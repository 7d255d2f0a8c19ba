//! Text format for CSPs.
//!
//! ```text
//! # comment
//! var x in {a, b}
//! var y in {c, d}
//! con C1 on (x, y) {(a, c), (b, d)}
//! ```
//!
//! Variables are numbered in declaration order; a constraint must list its
//! variables in that order. The constraint name is optional.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use thiserror::Error;

use crate::csp::{atom, Atom, Csp};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax,
    DuplicateVariable,
    UnknownVariable,
    OutOfOrder,
    ArityMismatch,
    AtomOutsideDomain,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub kind: ParseErrorKind,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Word(String),
    Punct(char),
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let mut out = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let body = raw.split('#').next().unwrap_or("");
        let mut chars = body.char_indices().peekable();
        while let Some(&(start, c)) = chars.peek() {
            if c.is_whitespace() {
                chars.next();
            } else if "{}(),".contains(c) {
                out.push((line, Tok::Punct(c)));
                chars.next();
            } else if is_word_char(c) {
                let mut end = start;
                while let Some(&(i, c)) = chars.peek() {
                    if !is_word_char(c) {
                        break;
                    }
                    end = i + c.len_utf8();
                    chars.next();
                }
                out.push((line, Tok::Word(body[start..end].to_string())));
            } else {
                return Err(ParseError {
                    line,
                    kind: ParseErrorKind::Syntax,
                    message: format!("unexpected character {c:?}"),
                });
            }
        }
    }
    Ok(out)
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || "_-.'".contains(c)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    last_line: usize,
}

impl Parser {
    fn line(&self) -> usize {
        self.toks.get(self.pos).map_or(self.last_line, |t| t.0)
    }

    fn err(&self, kind: ParseErrorKind, message: String) -> ParseError {
        ParseError {
            line: self.line(),
            kind,
            message,
        }
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.1)
    }

    fn peek2(&self) -> Option<&Tok> {
        self.toks.get(self.pos + 1).map(|t| &t.1)
    }

    fn word(&mut self, what: &str) -> Result<String, ParseError> {
        match self.peek() {
            Some(Tok::Word(w)) => {
                let w = w.clone();
                self.pos += 1;
                Ok(w)
            }
            other => Err(self.err(ParseErrorKind::Syntax, format!("expected {what}, found {}", describe(other)))),
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<(), ParseError> {
        match self.peek() {
            Some(Tok::Word(w)) if w == kw => {
                self.pos += 1;
                Ok(())
            }
            other => Err(self.err(ParseErrorKind::Syntax, format!("expected `{kw}`, found {}", describe(other)))),
        }
    }

    fn punct(&mut self, c: char) -> Result<(), ParseError> {
        match self.peek() {
            Some(Tok::Punct(p)) if *p == c => {
                self.pos += 1;
                Ok(())
            }
            other => Err(self.err(ParseErrorKind::Syntax, format!("expected `{c}`, found {}", describe(other)))),
        }
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Punct(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    /// `open word (, word)* close`, possibly empty.
    fn word_list(&mut self, open: char, close: char, what: &str) -> Result<Vec<(usize, String)>, ParseError> {
        self.punct(open)?;
        let mut out = Vec::new();
        if self.eat(close) {
            return Ok(out);
        }
        loop {
            let line = self.line();
            out.push((line, self.word(what)?));
            if self.eat(close) {
                return Ok(out);
            }
            self.punct(',')?;
        }
    }
}

fn describe(t: Option<&Tok>) -> String {
    match t {
        None => "end of input".into(),
        Some(Tok::Word(w)) => format!("`{w}`"),
        Some(Tok::Punct(c)) => format!("`{c}`"),
    }
}

pub fn parse_csp(text: &str) -> Result<Csp, ParseError> {
    let toks = tokenize(text)?;
    let last_line = text.lines().count().max(1);
    let mut ps = Parser { toks, pos: 0, last_line };
    let mut csp = Csp::new();
    while ps.peek().is_some() {
        let stmt_line = ps.line();
        match ps.word("`var` or `con`")?.as_str() {
            "var" => {
                let name = ps.word("variable name")?;
                ps.keyword("in")?;
                let atoms = ps.word_list('{', '}', "atom")?;
                if csp.variable_index(&name).is_some() {
                    return Err(ParseError {
                        line: stmt_line,
                        kind: ParseErrorKind::DuplicateVariable,
                        message: format!("variable {name} declared twice"),
                    });
                }
                csp.add_variable(&name, atoms.iter().map(|(_, a)| a.as_str()))
                    .expect("name checked above");
            }
            "con" => parse_constraint(&mut ps, &mut csp)?,
            other => {
                return Err(ParseError {
                    line: stmt_line,
                    kind: ParseErrorKind::Syntax,
                    message: format!("expected `var` or `con`, found `{other}`"),
                })
            }
        }
    }
    Ok(csp)
}

fn parse_constraint(ps: &mut Parser, csp: &mut Csp) -> Result<(), ParseError> {
    let name = match (ps.peek(), ps.peek2()) {
        (Some(Tok::Word(w)), Some(Tok::Punct('('))) if w == "on" => None,
        _ => Some(ps.word("constraint name or `on`")?),
    };
    ps.keyword("on")?;
    let vars = ps.word_list('(', ')', "variable name")?;
    let mut scope = Vec::with_capacity(vars.len());
    for (line, v) in &vars {
        let i = csp.variable_index(v).ok_or_else(|| ParseError {
            line: *line,
            kind: ParseErrorKind::UnknownVariable,
            message: format!("unknown variable {v}"),
        })?;
        if scope.last().is_some_and(|&prev| prev >= i) {
            return Err(ParseError {
                line: *line,
                kind: ParseErrorKind::OutOfOrder,
                message: format!("variable {v} is out of declaration order in the constraint"),
            });
        }
        scope.push(i);
    }
    if scope.is_empty() {
        return Err(ps.err(ParseErrorKind::Syntax, "constraint on no variables".into()));
    }
    ps.punct('{')?;
    let mut tuples: BTreeSet<Vec<Atom>> = BTreeSet::new();
    while !ps.eat('}') {
        let line = ps.line();
        let items = ps.word_list('(', ')', "atom")?;
        if items.len() != scope.len() {
            return Err(ParseError {
                line,
                kind: ParseErrorKind::ArityMismatch,
                message: format!("tuple has {} values, the constraint has {} variables", items.len(), scope.len()),
            });
        }
        let mut t = Vec::with_capacity(items.len());
        for ((line, a), &i) in items.iter().zip(&scope) {
            let a = atom(a);
            if !csp.domain(i).contains(&a) {
                return Err(ParseError {
                    line: *line,
                    kind: ParseErrorKind::AtomOutsideDomain,
                    message: format!("{a} is not in the domain of {}", csp.variables()[i]),
                });
            }
            t.push(a);
        }
        tuples.insert(t);
        if ps.peek() != Some(&Tok::Punct('}')) {
            ps.punct(',')?;
        }
    }
    csp.add_constraint_on(name.as_deref(), scope, tuples)
        .map_err(|e| ps.err(ParseErrorKind::Syntax, e.to_string()))?;
    Ok(())
}

/// One `var` line per variable, atoms sorted.
pub fn print_domains(p: &Csp) -> String {
    let mut out = String::new();
    for (v, d) in p.variables().iter().zip(p.domains()) {
        let atoms: Vec<&str> = d.iter().map(|a| a.as_ref()).collect();
        writeln!(out, "var {v} in {{{}}}", atoms.join(", ")).expect("write to string");
    }
    out
}

/// One `con` line per constraint, tuples sorted.
pub fn print_constraints(p: &Csp) -> String {
    let mut out = String::new();
    for c in p.constraints() {
        let vars: Vec<&str> = c.scope().iter().map(|&i| p.variables()[i].as_str()).collect();
        let tuples: Vec<String> = c
            .tuples()
            .iter()
            .map(|t| format!("({})", t.iter().map(|a| a.as_ref()).collect::<Vec<_>>().join(", ")))
            .collect();
        writeln!(out, "con {} on ({}) {{{}}}", c.name(), vars.join(", "), tuples.join(", ")).expect("write to string");
    }
    out
}

/// The canonical text of `p`: all `var` lines, then all `con` lines.
pub fn print_csp(p: &Csp) -> String {
    print_domains(p) + &print_constraints(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::csp::Relation;

    #[test]
    fn example_one_constraint() {
        let p = parse_csp("var x in {a,b}\nvar y in {c,d}\ncon on (x,y) {(a,c),(b,d)}\n").unwrap();
        assert_eq!(p.constraint(0).name(), "C_x_y");
        assert_eq!(p.constraint(0).relation().unwrap(), Relation::from_strs(&[("a", "c"), ("b", "d")]));
    }

    #[test]
    fn empty_and_comments() {
        assert_eq!(parse_csp("").unwrap().num_variables(), 0);
        let p = parse_csp("# nothing\n\nvar x in {} # empty domain\n").unwrap();
        assert!(p.domain(0).is_empty());
    }

    #[test]
    fn multi_line_constraint_and_named_on() {
        let text = "var on in {a}\nvar y in {b}\ncon on (on, y) {\n  (a, b),\n}\n";
        let p = parse_csp(text).unwrap();
        assert_eq!(p.constraint(0).tuples().len(), 1);
        let q = parse_csp("var x in {a}\ncon on on (x) {(a)}").unwrap();
        assert_eq!(q.constraint(0).name(), "on");
    }

    fn kind_and_line(text: &str) -> (ParseErrorKind, usize) {
        let e = parse_csp(text).unwrap_err();
        (e.kind, e.line)
    }

    #[test]
    fn distinct_errors_with_lines() {
        let head = "var x in {a}\nvar y in {b}\n";
        assert_eq!(kind_and_line(&format!("{head}con on (x, z) {{}}")), (ParseErrorKind::UnknownVariable, 3));
        assert_eq!(kind_and_line(&format!("{head}con on (y, x) {{}}")), (ParseErrorKind::OutOfOrder, 3));
        assert_eq!(kind_and_line(&format!("{head}\ncon on (x, y) {{(a)}}")), (ParseErrorKind::ArityMismatch, 4));
        assert_eq!(kind_and_line(&format!("{head}con on (x, y) {{(a, q)}}")), (ParseErrorKind::AtomOutsideDomain, 3));
        assert_eq!(kind_and_line(&format!("{head}var x in {{a}}")), (ParseErrorKind::DuplicateVariable, 3));
        assert_eq!(kind_and_line("variable x"), (ParseErrorKind::Syntax, 1));
        assert_eq!(kind_and_line("var x in {a"), (ParseErrorKind::Syntax, 1));
        assert_eq!(kind_and_line("var x in {a}\n$"), (ParseErrorKind::Syntax, 2));
    }

    #[test]
    fn print_parse_round_trip() {
        let text = "var y in {d, c}\nvar x in {b,a}\ncon K on (y, x) {(d,b), (c,a)}\n";
        let p = parse_csp(text).unwrap();
        let canon = print_csp(&p);
        assert_eq!(canon, "var y in {c, d}\nvar x in {a, b}\ncon K on (y, x) {(c, a), (d, b)}\n");
        assert_eq!(parse_csp(&canon).unwrap(), p);
        assert_eq!(print_csp(&parse_csp(&canon).unwrap()), canon);
    }
}
