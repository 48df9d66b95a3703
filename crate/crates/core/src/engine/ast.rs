//! Rule-language AST: normal rules with negation-as-failure and integer
//! arithmetic constraints.

use std::fmt;

use crate::logic::{Atom, Term};

/// Integer expression over rule variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Const(i64),
    Var(u32),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    /// `e ^ k`, k a small nonnegative literal exponent.
    Pow(Box<Expr>, u32),
    /// `|e|` absolute value; written `|a - b|` for absolute difference.
    Abs(Box<Expr>),
    Neg(Box<Expr>),
}

impl Expr {
    pub fn collect_vars(&self, out: &mut Vec<u32>) {
        match self {
            Expr::Const(_) => {}
            Expr::Var(v) => out.push(*v),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Expr::Pow(a, _) | Expr::Abs(a) | Expr::Neg(a) => a.collect_vars(out),
        }
    }

    /// If this is a bare variable, return it.
    pub fn as_var(&self) -> Option<u32> {
        match self {
            Expr::Var(v) => Some(*v),
            _ => None,
        }
    }

    /// Recognize `Var`, `Var + c`, `Var - c` shapes (used by the
    /// stratification analysis to relate time arguments).
    pub fn as_var_offset(&self) -> Option<(u32, i64)> {
        match self {
            Expr::Var(v) => Some((*v, 0)),
            Expr::Add(a, b) => match (a.as_ref(), b.as_ref()) {
                (Expr::Var(v), Expr::Const(c)) => Some((*v, *c)),
                (Expr::Const(c), Expr::Var(v)) => Some((*v, *c)),
                _ => None,
            },
            Expr::Sub(a, b) => match (a.as_ref(), b.as_ref()) {
                (Expr::Var(v), Expr::Const(c)) => Some((*v, -*c)),
                _ => None,
            },
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn holds(self, a: i64, b: i64) -> bool {
        match self {
            CmpOp::Eq => a == b,
            CmpOp::Ne => a != b,
            CmpOp::Lt => a < b,
            CmpOp::Le => a <= b,
            CmpOp::Gt => a > b,
            CmpOp::Ge => a >= b,
        }
    }
}

/// An arithmetic comparison between two integer expressions. An equality
/// with an unbound variable on one side acts as a binding assignment.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constraint {
    pub op: CmpOp,
    pub lhs: Expr,
    pub rhs: Expr,
}

impl Constraint {
    pub fn collect_vars(&self, out: &mut Vec<u32>) {
        self.lhs.collect_vars(out);
        self.rhs.collect_vars(out);
    }
}

/// A normal rule: `head :- body_pos, not body_neg, constraints.`
///
/// Safety invariant (checked by the parser): every variable in the head, a
/// negative literal, or a constraint is bound by a positive body literal or
/// by a chain of arithmetic equalities rooted in bound variables.
#[derive(Clone, Debug, PartialEq)]
pub struct Rule {
    pub head: Atom,
    pub body_pos: Vec<Atom>,
    pub body_neg: Vec<Atom>,
    pub constraints: Vec<Constraint>,
    /// Variable names by slot index, for display and error messages.
    pub var_names: Vec<String>,
}

impl Rule {
    pub fn var_count(&self) -> usize {
        self.var_names.len()
    }
}

/// A parsed program: rules plus ground facts.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Program {
    pub rules: Vec<Rule>,
    pub facts: Vec<Atom>,
}

impl Program {
    pub fn is_empty(&self) -> bool {
        self.rules.is_empty() && self.facts.is_empty()
    }

    /// Concatenate two programs.
    pub fn extend(&mut self, other: Program) {
        self.rules.extend(other.rules);
        self.facts.extend(other.facts);
    }
}

// ---------------------------------------------------------------------------
// Display: re-render in the surface syntax.
// ---------------------------------------------------------------------------

fn fmt_term(t: &Term, names: &[String], f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match t {
        Term::Int(v) => write!(f, "{v}"),
        Term::Sym(s) => write!(f, "{s}"),
        Term::Var(v) => write!(f, "{}", names[*v as usize]),
        Term::Off(v, d) if *d >= 0 => write!(f, "{}+{}", names[*v as usize], d),
        Term::Off(v, d) => write!(f, "{}-{}", names[*v as usize], -d),
        Term::App(s, args) => {
            write!(f, "{s}(")?;
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                fmt_term(a, names, f)?;
            }
            write!(f, ")")
        }
    }
}

fn fmt_atom(a: &Atom, names: &[String], f: &mut fmt::Formatter<'_>) -> fmt::Result {
    write!(f, "{}", a.pred)?;
    if !a.args.is_empty() {
        write!(f, "(")?;
        for (i, t) in a.args.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            fmt_term(t, names, f)?;
        }
        write!(f, ")")?;
    }
    Ok(())
}

fn fmt_expr(e: &Expr, names: &[String], f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match e {
        Expr::Const(c) => write!(f, "{c}"),
        Expr::Var(v) => write!(f, "{}", names[*v as usize]),
        Expr::Add(a, b) => {
            fmt_expr(a, names, f)?;
            write!(f, " + ")?;
            fmt_expr(b, names, f)
        }
        Expr::Sub(a, b) => {
            fmt_expr(a, names, f)?;
            write!(f, " - ")?;
            maybe_paren(b, names, f)
        }
        Expr::Mul(a, b) => {
            maybe_paren(a, names, f)?;
            write!(f, " * ")?;
            maybe_paren(b, names, f)
        }
        Expr::Pow(a, k) => {
            maybe_paren(a, names, f)?;
            write!(f, "^{k}")
        }
        Expr::Abs(a) => {
            write!(f, "|")?;
            fmt_expr(a, names, f)?;
            write!(f, "|")
        }
        Expr::Neg(a) => {
            write!(f, "-")?;
            maybe_paren(a, names, f)
        }
    }
}

fn maybe_paren(e: &Expr, names: &[String], f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match e {
        Expr::Add(..) | Expr::Sub(..) => {
            write!(f, "(")?;
            fmt_expr(e, names, f)?;
            write!(f, ")")
        }
        _ => fmt_expr(e, names, f),
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_atom(&self.head, &self.var_names, f)?;
        let total = self.body_pos.len() + self.body_neg.len() + self.constraints.len();
        if total > 0 {
            write!(f, " :- ")?;
            let mut i = 0;
            for a in &self.body_pos {
                if i > 0 {
                    write!(f, ", ")?;
                }
                fmt_atom(a, &self.var_names, f)?;
                i += 1;
            }
            for a in &self.body_neg {
                if i > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "not ")?;
                fmt_atom(a, &self.var_names, f)?;
                i += 1;
            }
            for c in &self.constraints {
                if i > 0 {
                    write!(f, ", ")?;
                }
                fmt_expr(&c.lhs, &self.var_names, f)?;
                let op = match c.op {
                    CmpOp::Eq => "=",
                    CmpOp::Ne => "!=",
                    CmpOp::Lt => "<",
                    CmpOp::Le => "<=",
                    CmpOp::Gt => ">",
                    CmpOp::Ge => ">=",
                };
                write!(f, " {op} ")?;
                fmt_expr(&c.rhs, &self.var_names, f)?;
                i += 1;
            }
        }
        write!(f, ".")
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for fact in &self.facts {
            writeln!(f, "{fact}.")?;
        }
        for rule in &self.rules {
            writeln!(f, "{rule}")?;
        }
        Ok(())
    }
}
