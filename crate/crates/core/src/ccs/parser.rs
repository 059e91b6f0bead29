use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use super::semantics::{check_guarded, GuardViolation};
use super::{Action, Environment, Process, Relabelling};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{kind} at line {line}, column {column}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("unexpected character `{0}`")]
    Lexical(char),
    #[error("unbalanced `{0}`")]
    Unbalanced(char),
    #[error("expected {expected}, found {found}")]
    Unexpected { expected: String, found: String },
    #[error("unknown identifier `{0}`")]
    UnknownIdentifier(String),
    #[error("`{0}` is defined more than once")]
    DuplicateDefinition(String),
    #[error("no `main` definition")]
    MissingMain,
    #[error("choice operand is not action-guarded")]
    UnguardedChoice,
    #[error("unguarded recursion: {}", fmt_violations(.0))]
    UnguardedRecursion(Vec<GuardViolation>),
}

fn fmt_violations(v: &[GuardViolation]) -> String {
    v.iter().map(|g| g.to_string()).collect::<Vec<_>>().join("; ")
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Tau,
    Zero,
    Quote,
    Dot,
    Plus,
    Bar,
    Backslash,
    Slash,
    Comma,
    Equals,
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Newline,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Ident(s) => return write!(f, "identifier `{s}`"),
            Tok::Tau => "`tau`",
            Tok::Zero => "`0`",
            Tok::Quote => "`'`",
            Tok::Dot => "`.`",
            Tok::Plus => "`+`",
            Tok::Bar => "`|`",
            Tok::Backslash => "`\\`",
            Tok::Slash => "`/`",
            Tok::Comma => "`,`",
            Tok::Equals => "`=`",
            Tok::LParen => "`(`",
            Tok::RParen => "`)`",
            Tok::LBrace => "`{`",
            Tok::RBrace => "`}`",
            Tok::LBracket => "`[`",
            Tok::RBracket => "`]`",
            Tok::Newline => "end of line",
            Tok::Eof => "end of input",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let mut out = Vec::new();
    let mut stack: Vec<(char, usize, usize)> = Vec::new();
    for (li, raw) in text.lines().enumerate() {
        let line = li + 1;
        let content = raw.split('#').next().unwrap_or("");
        let chars: Vec<char> = content.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let column = i + 1;
            if c.is_whitespace() {
                i += 1;
                continue;
            }
            if c.is_alphabetic() || c == '_' {
                let start = i;
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                let word: String = chars[start..i].iter().collect();
                let tok = if word == "tau" { Tok::Tau } else { Tok::Ident(word) };
                out.push(Spanned { tok, line, column });
                continue;
            }
            let tok = match c {
                '0' => Tok::Zero,
                '\'' => Tok::Quote,
                '.' => Tok::Dot,
                '+' => Tok::Plus,
                '|' => Tok::Bar,
                '\\' => Tok::Backslash,
                '/' => Tok::Slash,
                ',' => Tok::Comma,
                '=' => Tok::Equals,
                '(' | '{' | '[' => {
                    stack.push((c, line, column));
                    match c {
                        '(' => Tok::LParen,
                        '{' => Tok::LBrace,
                        _ => Tok::LBracket,
                    }
                }
                ')' | '}' | ']' => {
                    let open = match c {
                        ')' => '(',
                        '}' => '{',
                        _ => '[',
                    };
                    match stack.pop() {
                        Some((o, ..)) if o == open => {}
                        _ => {
                            return Err(ParseError { line, column, kind: ParseErrorKind::Unbalanced(c) })
                        }
                    }
                    match c {
                        ')' => Tok::RParen,
                        '}' => Tok::RBrace,
                        _ => Tok::RBracket,
                    }
                }
                other => {
                    return Err(ParseError { line, column, kind: ParseErrorKind::Lexical(other) })
                }
            };
            out.push(Spanned { tok, line, column });
            i += 1;
        }
        out.push(Spanned { tok: Tok::Newline, line, column: chars.len() + 1 });
    }
    if let Some((c, line, column)) = stack.pop() {
        return Err(ParseError { line, column, kind: ParseErrorKind::Unbalanced(c) });
    }
    let (line, column) = out.last().map(|s| (s.line, s.column)).unwrap_or((1, 1));
    out.push(Spanned { tok: Tok::Eof, line, column });
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    depth: usize,
}

impl Parser {
    fn peek(&mut self) -> &Tok {
        if self.depth > 0 {
            while self.toks[self.pos].tok == Tok::Newline {
                self.pos += 1;
            }
        }
        &self.toks[self.pos].tok
    }

    fn skip_newlines(&mut self) {
        while self.toks[self.pos].tok == Tok::Newline {
            self.pos += 1;
        }
    }

    fn bump(&mut self) -> Tok {
        self.peek();
        let t = self.toks[self.pos].tok.clone();
        if t != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn error(&self, kind: ParseErrorKind) -> ParseError {
        let s = &self.toks[self.pos];
        ParseError { line: s.line, column: s.column, kind }
    }

    fn unexpected(&mut self, expected: &str) -> ParseError {
        let found = self.peek().to_string();
        self.error(ParseErrorKind::Unexpected { expected: expected.to_owned(), found })
    }

    fn expect(&mut self, tok: Tok, expected: &str) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(expected))
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            _ => Err(self.unexpected("a name")),
        }
    }

    /// parallel := sum ('|' sum)*
    fn parallel(&mut self) -> Result<Process, ParseError> {
        let mut p = self.sum()?;
        while *self.peek() == Tok::Bar {
            self.bump();
            self.skip_newlines();
            let q = self.sum()?;
            p = Process::par(p, q);
        }
        Ok(p)
    }

    /// sum := prefixed ('+' prefixed)*, every operand a guarded choice
    fn sum(&mut self) -> Result<Process, ParseError> {
        let first_pos = self.pos;
        let first = self.prefixed()?;
        if *self.peek() != Tok::Plus {
            return Ok(first);
        }
        let mut summands = Vec::new();
        let mut operand = first;
        let mut operand_pos = first_pos;
        loop {
            match operand {
                Process::Choice(s) => summands.extend(s),
                _ => {
                    self.pos = operand_pos;
                    return Err(self.error(ParseErrorKind::UnguardedChoice));
                }
            }
            if *self.peek() != Tok::Plus {
                break;
            }
            self.bump();
            self.skip_newlines();
            operand_pos = self.pos;
            operand = self.prefixed()?;
        }
        Ok(Process::Choice(summands))
    }

    /// prefixed := action '.' prefixed | postfix
    fn prefixed(&mut self) -> Result<Process, ParseError> {
        let action = match self.peek().clone() {
            Tok::Tau => Some(Action::Tau),
            Tok::Quote => None,
            Tok::Ident(_) => None,
            _ => return self.postfix(),
        };
        match action {
            Some(tau) => {
                self.bump();
                if *self.peek() == Tok::Dot {
                    self.bump();
                    let then = self.prefixed()?;
                    Ok(Process::prefix(tau, then))
                } else {
                    self.postfix_ops(Process::prefix(tau, Process::nil()))
                }
            }
            None if *self.peek() == Tok::Quote => {
                self.bump();
                let name = self.ident()?;
                let act = Action::Coname(name);
                if *self.peek() == Tok::Dot {
                    self.bump();
                    let then = self.prefixed()?;
                    Ok(Process::prefix(act, then))
                } else {
                    self.postfix_ops(Process::prefix(act, Process::nil()))
                }
            }
            None => {
                let name = self.ident()?;
                if *self.peek() == Tok::Dot {
                    self.bump();
                    let then = self.prefixed()?;
                    Ok(Process::prefix(Action::Name(name), then))
                } else {
                    // Resolved later: agent identifier or `name.0` sugar.
                    self.postfix_ops(Process::Agent(name))
                }
            }
        }
    }

    fn postfix(&mut self) -> Result<Process, ParseError> {
        let atom = match self.peek().clone() {
            Tok::Zero => {
                self.bump();
                Process::nil()
            }
            Tok::LParen => {
                self.bump();
                self.depth += 1;
                let p = self.parallel()?;
                self.depth -= 1;
                self.expect(Tok::RParen, "`)`")?;
                p
            }
            _ => return Err(self.unexpected("a process")),
        };
        self.postfix_ops(atom)
    }

    fn postfix_ops(&mut self, mut p: Process) -> Result<Process, ParseError> {
        loop {
            match self.peek() {
                Tok::Backslash => {
                    self.bump();
                    let names = if *self.peek() == Tok::LBrace {
                        self.bump();
                        self.depth += 1;
                        let mut names = BTreeSet::new();
                        if *self.peek() != Tok::RBrace {
                            names.insert(self.ident()?);
                            while *self.peek() == Tok::Comma {
                                self.bump();
                                names.insert(self.ident()?);
                            }
                        }
                        self.depth -= 1;
                        self.expect(Tok::RBrace, "`}` or `,`")?;
                        names
                    } else {
                        BTreeSet::from([self.ident()?])
                    };
                    p = Process::Restrict(Box::new(p), names);
                }
                Tok::LBracket => {
                    self.bump();
                    self.depth += 1;
                    let mut pairs = Vec::new();
                    loop {
                        let new = self.ident()?;
                        self.expect(Tok::Slash, "`/`")?;
                        let old = self.ident()?;
                        pairs.push((old, new));
                        if *self.peek() == Tok::Comma {
                            self.bump();
                        } else {
                            break;
                        }
                    }
                    self.depth -= 1;
                    self.expect(Tok::RBracket, "`]` or `,`")?;
                    p = Process::Relabel(Box::new(p), pairs.into_iter().collect::<Relabelling>());
                }
                _ => return Ok(p),
            }
        }
    }
}

/// Replaces `Agent(x)` by `x.0` where `x` is a lowercase undefined name.
fn resolve(p: Process, env: &Environment, at: (usize, usize)) -> Result<Process, ParseError> {
    Ok(match p {
        Process::Agent(x) if env.contains(&x) => Process::Agent(x),
        Process::Agent(x) => {
            if x.chars().next().is_some_and(|c| c.is_lowercase()) {
                Process::prefix(Action::Name(x), Process::nil())
            } else {
                return Err(ParseError {
                    line: at.0,
                    column: at.1,
                    kind: ParseErrorKind::UnknownIdentifier(x),
                });
            }
        }
        Process::Choice(s) => Process::Choice(
            s.into_iter()
                .map(|(a, q)| resolve(q, env, at).map(|q| (a, q)))
                .collect::<Result<_, _>>()?,
        ),
        Process::Par(l, r) => Process::par(resolve(*l, env, at)?, resolve(*r, env, at)?),
        Process::Restrict(q, l) => Process::Restrict(Box::new(resolve(*q, env, at)?), l),
        Process::Relabel(q, f) => Process::Relabel(Box::new(resolve(*q, env, at)?), f),
    })
}

/// Parses CCS text into its defining equations and the process under
/// analysis, then checks that all recursion is guarded.
///
/// Identifier resolution: a bare identifier is an agent when it has a
/// definition; otherwise a lowercase one abbreviates `name.0` and an
/// uppercase one is an unknown identifier.
pub fn parse(text: &str) -> Result<(Environment, Process), ParseError> {
    let toks = lex(text)?;
    let has_defs = toks
        .windows(2)
        .any(|w| matches!(w[0].tok, Tok::Ident(_)) && w[1].tok == Tok::Equals);
    let mut p = Parser { toks, pos: 0, depth: 0 };

    let mut raw: Vec<(String, Process, (usize, usize))> = Vec::new();
    let mut env = Environment::new();
    if has_defs {
        loop {
            p.skip_newlines();
            if *p.peek() == Tok::Eof {
                break;
            }
            let at = (p.toks[p.pos].line, p.toks[p.pos].column);
            let name = p.ident()?;
            p.expect(Tok::Equals, "`=`")?;
            p.skip_newlines();
            let body = p.parallel()?;
            match p.peek() {
                Tok::Newline | Tok::Eof => {}
                _ => return Err(p.unexpected("an operator or end of line")),
            }
            if env.define(name.clone(), Process::nil()).is_some() {
                return Err(ParseError { line: at.0, column: at.1, kind: ParseErrorKind::DuplicateDefinition(name) });
            }
            raw.push((name, body, at));
        }
    } else {
        p.skip_newlines();
        let at = (p.toks[p.pos].line, p.toks[p.pos].column);
        let body = p.parallel()?;
        p.skip_newlines();
        if *p.peek() != Tok::Eof {
            return Err(p.unexpected("an operator or end of input"));
        }
        raw.push(("main".to_owned(), body, at));
    }

    let mut resolved = Environment::new();
    let mut root = None;
    for (name, body, at) in raw {
        let body = resolve(body, &env, at)?;
        if name == "main" {
            root = Some(body.clone());
        }
        if has_defs {
            resolved.define(name, body);
        }
    }
    let root = root.ok_or(ParseError { line: 1, column: 1, kind: ParseErrorKind::MissingMain })?;
    check_guarded(&resolved, &root)
        .map_err(|v| ParseError { line: 1, column: 1, kind: ParseErrorKind::UnguardedRecursion(v) })?;
    Ok((resolved, root))
}
