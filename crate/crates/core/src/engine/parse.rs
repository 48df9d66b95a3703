//! Recursive-descent parser for the rule language.
//!
//! Syntax: `head :- lit1, ..., litk.` with `not pred(...)` for negation,
//! infix integer comparisons, `|X - Y|` absolute difference, `X^2` squaring
//! and `%` line comments. Rules are newline-terminated statements ending in
//! a period.

use std::collections::HashMap;

use thiserror::Error;

use crate::logic::{Atom, Sym, Term};

use super::ast::{CmpOp, Constraint, Expr, Program, Rule};

#[derive(Clone, Debug, Error, PartialEq)]
pub enum ParseError {
    #[error("syntax error at line {line}, column {col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("unsafe variable {var} in rule at line {line}: not bound by a positive body literal or an arithmetic equality")]
    UnsafeRule { var: String, line: usize },
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Lower(String),
    Upper(String),
    Int(i64),
    If,     // :-
    Dot,
    Comma,
    LParen,
    RParen,
    Pipe,
    Plus,
    Minus,
    Star,
    Caret,
    Cmp(CmpOp),
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
    line: usize,
    col: usize,
}

type Spanned = (Tok, usize, usize);

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            src: src.as_bytes(),
            pos: 0,
            line: 1,
            col: 1,
        }
    }

    fn bump(&mut self) -> u8 {
        let b = self.src[self.pos];
        self.pos += 1;
        if b == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        b
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn tokenize(mut self) -> Result<Vec<Spanned>, ParseError> {
        let mut out = Vec::new();
        while let Some(b) = self.peek() {
            let (line, col) = (self.line, self.col);
            match b {
                b' ' | b'\t' | b'\r' | b'\n' => {
                    self.bump();
                }
                b'%' => {
                    while self.peek().is_some_and(|c| c != b'\n') {
                        self.bump();
                    }
                }
                b'0'..=b'9' => {
                    let mut n: i64 = 0;
                    while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                        n = n
                            .checked_mul(10)
                            .and_then(|m| m.checked_add((self.bump() - b'0') as i64))
                            .ok_or_else(|| ParseError::Syntax {
                                line,
                                col,
                                msg: "integer literal overflows i64".into(),
                            })?;
                    }
                    out.push((Tok::Int(n), line, col));
                }
                b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                    let start = self.pos;
                    while self
                        .peek()
                        .is_some_and(|c| c.is_ascii_alphanumeric() || c == b'_')
                    {
                        self.bump();
                    }
                    let word = std::str::from_utf8(&self.src[start..self.pos])
                        .unwrap()
                        .to_string();
                    let tok = if word.as_bytes()[0].is_ascii_lowercase() {
                        Tok::Lower(word)
                    } else {
                        Tok::Upper(word)
                    };
                    out.push((tok, line, col));
                }
                b':' => {
                    self.bump();
                    if self.peek() == Some(b'-') {
                        self.bump();
                        out.push((Tok::If, line, col));
                    } else {
                        return Err(ParseError::Syntax {
                            line,
                            col,
                            msg: "expected `:-`".into(),
                        });
                    }
                }
                b'.' => {
                    self.bump();
                    out.push((Tok::Dot, line, col));
                }
                b',' => {
                    self.bump();
                    out.push((Tok::Comma, line, col));
                }
                b'(' => {
                    self.bump();
                    out.push((Tok::LParen, line, col));
                }
                b')' => {
                    self.bump();
                    out.push((Tok::RParen, line, col));
                }
                b'|' => {
                    self.bump();
                    out.push((Tok::Pipe, line, col));
                }
                b'+' => {
                    self.bump();
                    out.push((Tok::Plus, line, col));
                }
                b'-' => {
                    self.bump();
                    out.push((Tok::Minus, line, col));
                }
                b'*' => {
                    self.bump();
                    out.push((Tok::Star, line, col));
                }
                b'^' => {
                    self.bump();
                    out.push((Tok::Caret, line, col));
                }
                b'=' => {
                    self.bump();
                    out.push((Tok::Cmp(CmpOp::Eq), line, col));
                }
                b'!' => {
                    self.bump();
                    if self.peek() == Some(b'=') {
                        self.bump();
                        out.push((Tok::Cmp(CmpOp::Ne), line, col));
                    } else {
                        return Err(ParseError::Syntax {
                            line,
                            col,
                            msg: "expected `!=`".into(),
                        });
                    }
                }
                b'<' => {
                    self.bump();
                    if self.peek() == Some(b'=') {
                        self.bump();
                        out.push((Tok::Cmp(CmpOp::Le), line, col));
                    } else {
                        out.push((Tok::Cmp(CmpOp::Lt), line, col));
                    }
                }
                b'>' => {
                    self.bump();
                    if self.peek() == Some(b'=') {
                        self.bump();
                        out.push((Tok::Cmp(CmpOp::Ge), line, col));
                    } else {
                        out.push((Tok::Cmp(CmpOp::Gt), line, col));
                    }
                }
                other => {
                    return Err(ParseError::Syntax {
                        line,
                        col,
                        msg: format!("unexpected byte `{}`", other as char),
                    });
                }
            }
        }
        Ok(out)
    }
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    vars: HashMap<String, u32>,
    var_names: Vec<String>,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _, _)| t)
    }

    fn span(&self) -> (usize, usize) {
        self.toks
            .get(self.pos)
            .or_else(|| self.toks.last())
            .map(|&(_, l, c)| (l, c))
            .unwrap_or((1, 1))
    }

    fn err(&self, msg: impl Into<String>) -> ParseError {
        let (line, col) = self.span();
        ParseError::Syntax {
            line,
            col,
            msg: msg.into(),
        }
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(t, _, _)| t.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: &Tok, what: &str) -> Result<(), ParseError> {
        match self.peek() {
            Some(t) if t == want => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.err(format!("expected {what}"))),
        }
    }

    fn var_slot(&mut self, name: &str) -> u32 {
        if let Some(&v) = self.vars.get(name) {
            return v;
        }
        let v = self.var_names.len() as u32;
        self.vars.insert(name.to_string(), v);
        self.var_names.push(name.to_string());
        v
    }

    fn parse_term(&mut self) -> Result<Term, ParseError> {
        match self.next() {
            Some(Tok::Int(n)) => Ok(Term::Int(n)),
            Some(Tok::Minus) => match self.next() {
                Some(Tok::Int(n)) => Ok(Term::Int(-n)),
                _ => Err(self.err("expected integer after `-` in term")),
            },
            Some(Tok::Upper(name)) => {
                let v = self.var_slot(&name);
                match self.peek() {
                    Some(Tok::Plus) => {
                        self.pos += 1;
                        match self.next() {
                            Some(Tok::Int(d)) => Ok(Term::Off(v, d)),
                            _ => Err(self.err("expected integer offset after `+`")),
                        }
                    }
                    Some(Tok::Minus) => {
                        self.pos += 1;
                        match self.next() {
                            Some(Tok::Int(d)) => Ok(Term::Off(v, -d)),
                            _ => Err(self.err("expected integer offset after `-`")),
                        }
                    }
                    _ => Ok(Term::Var(v)),
                }
            }
            Some(Tok::Lower(name)) => {
                if self.peek() == Some(&Tok::LParen) {
                    self.pos += 1;
                    let args = self.parse_termlist()?;
                    self.expect(&Tok::RParen, "`)`")?;
                    Ok(Term::App(Sym::new(&name), args))
                } else {
                    Ok(Term::Sym(Sym::new(&name)))
                }
            }
            _ => Err(self.err("expected term")),
        }
    }

    fn parse_termlist(&mut self) -> Result<Vec<Term>, ParseError> {
        let mut terms = vec![self.parse_term()?];
        while self.peek() == Some(&Tok::Comma) {
            self.pos += 1;
            terms.push(self.parse_term()?);
        }
        Ok(terms)
    }

    fn parse_atom(&mut self) -> Result<Atom, ParseError> {
        let name = match self.next() {
            Some(Tok::Lower(n)) => n,
            _ => return Err(self.err("expected predicate name")),
        };
        let args = if self.peek() == Some(&Tok::LParen) {
            self.pos += 1;
            let args = self.parse_termlist()?;
            self.expect(&Tok::RParen, "`)`")?;
            args
        } else {
            Vec::new()
        };
        Ok(Atom {
            pred: Sym::new(&name),
            args,
        })
    }

    fn parse_expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.parse_mul()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    let rhs = self.parse_mul()?;
                    lhs = Expr::Add(Box::new(lhs), Box::new(rhs));
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    let rhs = self.parse_mul()?;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn parse_mul(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.parse_unary()?;
        while self.peek() == Some(&Tok::Star) {
            self.pos += 1;
            let rhs = self.parse_unary()?;
            lhs = Expr::Mul(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn parse_unary(&mut self) -> Result<Expr, ParseError> {
        let base = self.parse_primary()?;
        if self.peek() == Some(&Tok::Caret) {
            self.pos += 1;
            match self.next() {
                Some(Tok::Int(k)) if (0..=8).contains(&k) => {
                    Ok(Expr::Pow(Box::new(base), k as u32))
                }
                _ => Err(self.err("expected small nonnegative exponent after `^`")),
            }
        } else {
            Ok(base)
        }
    }

    fn parse_primary(&mut self) -> Result<Expr, ParseError> {
        match self.next() {
            Some(Tok::Int(n)) => Ok(Expr::Const(n)),
            Some(Tok::Upper(name)) => Ok(Expr::Var(self.var_slot(&name))),
            Some(Tok::Minus) => {
                let inner = self.parse_primary()?;
                Ok(Expr::Neg(Box::new(inner)))
            }
            Some(Tok::LParen) => {
                let e = self.parse_expr()?;
                self.expect(&Tok::RParen, "`)`")?;
                Ok(e)
            }
            Some(Tok::Pipe) => {
                let e = self.parse_expr()?;
                self.expect(&Tok::Pipe, "closing `|`")?;
                Ok(Expr::Abs(Box::new(e)))
            }
            _ => Err(self.err("expected integer expression")),
        }
    }

    /// One body item: `not atom`, an atom, or a comparison.
    fn parse_body_item(
        &mut self,
        pos: &mut Vec<Atom>,
        neg: &mut Vec<Atom>,
        cons: &mut Vec<Constraint>,
    ) -> Result<(), ParseError> {
        match self.peek() {
            Some(Tok::Lower(w)) if w == "not" => {
                self.pos += 1;
                neg.push(self.parse_atom()?);
                Ok(())
            }
            Some(Tok::Lower(_)) => {
                let atom = self.parse_atom()?;
                if matches!(self.peek(), Some(Tok::Cmp(_))) {
                    return Err(self.err("predicates cannot appear in comparisons"));
                }
                pos.push(atom);
                Ok(())
            }
            _ => {
                let lhs = self.parse_expr()?;
                let op = match self.next() {
                    Some(Tok::Cmp(op)) => op,
                    _ => return Err(self.err("expected comparison operator")),
                };
                let rhs = self.parse_expr()?;
                cons.push(Constraint { op, lhs, rhs });
                Ok(())
            }
        }
    }

    fn parse_statement(&mut self) -> Result<(Rule, usize), ParseError> {
        self.vars.clear();
        self.var_names.clear();
        let line = self.span().0;
        let head = self.parse_atom()?;
        let mut body_pos = Vec::new();
        let mut body_neg = Vec::new();
        let mut constraints = Vec::new();
        match self.peek() {
            Some(Tok::Dot) => {
                self.pos += 1;
            }
            Some(Tok::If) => {
                self.pos += 1;
                loop {
                    self.parse_body_item(&mut body_pos, &mut body_neg, &mut constraints)?;
                    match self.next() {
                        Some(Tok::Comma) => continue,
                        Some(Tok::Dot) => break,
                        _ => return Err(self.err("expected `,` or `.`")),
                    }
                }
            }
            _ => return Err(self.err("expected `:-` or `.` after head")),
        }
        Ok((
            Rule {
                head,
                body_pos,
                body_neg,
                constraints,
                var_names: std::mem::take(&mut self.var_names),
            },
            line,
        ))
    }
}

/// Safety: every variable in the head, a negative literal, or a constraint
/// must be bound by a positive literal or by an arithmetic equality over
/// already-bound variables. Returns the first unbound variable.
fn unsafe_var(rule: &Rule) -> Option<u32> {
    let n = rule.var_count();
    let mut bound = vec![false; n];
    for atom in &rule.body_pos {
        let mut vs = Vec::new();
        for arg in &atom.args {
            arg.collect_vars(&mut vs);
        }
        for v in vs {
            bound[v as usize] = true;
        }
    }
    // Equality constraints may bind one side once the other is fully bound.
    loop {
        let mut changed = false;
        for c in &rule.constraints {
            if c.op != CmpOp::Eq {
                continue;
            }
            for (target, source) in [(&c.lhs, &c.rhs), (&c.rhs, &c.lhs)] {
                if let Some(v) = target.as_var() {
                    if bound[v as usize] {
                        continue;
                    }
                    let mut vs = Vec::new();
                    source.collect_vars(&mut vs);
                    if vs.iter().all(|&u| bound[u as usize]) {
                        bound[v as usize] = true;
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    let mut need = Vec::new();
    for arg in &rule.head.args {
        arg.collect_vars(&mut need);
    }
    for atom in &rule.body_neg {
        for arg in &atom.args {
            arg.collect_vars(&mut need);
        }
    }
    for c in &rule.constraints {
        c.collect_vars(&mut need);
    }
    need.into_iter().find(|&v| !bound[v as usize])
}

/// Parse a program from text, checking the safety invariant on every rule.
pub fn parse_program(text: &str) -> Result<Program, ParseError> {
    let toks = Lexer::new(text).tokenize()?;
    let mut parser = Parser {
        toks,
        pos: 0,
        vars: HashMap::new(),
        var_names: Vec::new(),
    };
    let mut program = Program::default();
    while parser.peek().is_some() {
        let (rule, line) = parser.parse_statement()?;
        if let Some(v) = unsafe_var(&rule) {
            return Err(ParseError::UnsafeRule {
                var: rule.var_names[v as usize].clone(),
                line,
            });
        }
        if rule.body_pos.is_empty()
            && rule.body_neg.is_empty()
            && rule.constraints.is_empty()
        {
            debug_assert!(rule.head.is_ground());
            program.facts.push(rule.head);
        } else {
            program.rules.push(rule);
        }
    }
    Ok(program)
}

/// Parse a single goal atom (may contain variables); returns the pattern and
/// the variable names by slot.
pub fn parse_goal(text: &str) -> Result<(Atom, Vec<String>), ParseError> {
    let toks = Lexer::new(text).tokenize()?;
    let mut parser = Parser {
        toks,
        pos: 0,
        vars: HashMap::new(),
        var_names: Vec::new(),
    };
    let atom = parser.parse_atom()?;
    if parser.peek() == Some(&Tok::Dot) {
        parser.pos += 1;
    }
    if parser.peek().is_some() {
        return Err(parser.err("unexpected trailing tokens after goal"));
    }
    Ok((atom, parser.var_names))
}
