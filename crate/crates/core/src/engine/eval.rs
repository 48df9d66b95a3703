//! Bottom-up evaluation of a locally-stratified program.
//!
//! Non-temporal strata run a standard (semi-naive or naive) fixpoint.
//! Temporal strata run frame by frame: at every time point the stratum's
//! within-frame groups are evaluated in dependency order with the rule's
//! head time argument pre-bound to the current frame, so negation on
//! earlier frames and on earlier groups always reads completed relations.

use std::collections::{BTreeMap, HashMap, HashSet};

use thiserror::Error;

use crate::facts::FactBase;
use crate::logic::{Atom, Sym, Term};

use super::ast::{CmpOp, Expr, Program, Rule};
use super::parse::{parse_goal, ParseError};
use super::stratify::{stratify, StratifyError};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error(transparent)]
    Stratify(#[from] StratifyError),
    #[error("integer overflow in constraint evaluation")]
    Overflow,
    #[error("type error: {0}")]
    Type(String),
    #[error("resource cap exceeded: more than {0} derived atoms")]
    ResourceCap(usize),
}

#[derive(Debug, Error)]
pub enum QueryError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("unknown predicate {0} in goal")]
    UnknownPredicate(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    SemiNaive,
    Naive,
}

#[derive(Clone, Copy, Debug)]
pub struct EvalOptions {
    pub strategy: Strategy,
    /// Hard limit on the total number of atoms in the model.
    pub max_atoms: usize,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            strategy: Strategy::SemiNaive,
            max_atoms: 8_000_000,
        }
    }
}

/// Why an atom is in the model: either a seeded fact or one witnessing rule
/// instantiation (the first derivation found).
#[derive(Clone, Debug)]
pub enum Justification {
    Fact,
    Derived { rule_idx: usize, body: Vec<Atom> },
}

// ---------------------------------------------------------------------------
// Relations
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Mode {
    /// stable + delta (everything up to the current iteration)
    Full,
    /// only the previous iteration's additions
    Delta,
    /// everything before the previous iteration
    Stable,
}

#[derive(Debug, Default)]
struct Relation {
    atoms: Vec<Atom>,
    set: HashSet<Atom>,
    by_time: HashMap<i64, Vec<usize>>,
    time_pos: Option<usize>,
    /// Region markers for semi-naive evaluation.
    old_len: usize,
    cur_len: usize,
}

impl Relation {
    fn range(&self, mode: Mode) -> std::ops::Range<usize> {
        match mode {
            Mode::Full => 0..self.cur_len,
            Mode::Delta => self.old_len..self.cur_len,
            Mode::Stable => 0..self.old_len,
        }
    }

    fn push(&mut self, atom: Atom) -> bool {
        if !self.set.insert(atom.clone()) {
            return false;
        }
        if let Some(p) = self.time_pos {
            if let Some(t) = atom.args.get(p).and_then(Term::as_int) {
                self.by_time.entry(t).or_default().push(self.atoms.len());
            }
        }
        self.atoms.push(atom);
        true
    }
}

struct Db {
    rel: BTreeMap<Sym, Relation>,
    atom_count: usize,
    max_atoms: usize,
    provenance: HashMap<Atom, Justification>,
}

impl Db {
    fn relation(&self, pred: Sym) -> Option<&Relation> {
        self.rel.get(&pred)
    }

    fn insert_fact(&mut self, atom: Atom) -> Result<bool, EvalError> {
        let rel = self.rel.entry(atom.pred).or_default();
        if rel.push(atom) {
            self.atom_count += 1;
            if self.atom_count > self.max_atoms {
                return Err(EvalError::ResourceCap(self.max_atoms));
            }
            Ok(true)
        } else {
            Ok(false)
        }
    }

    fn insert_derived(
        &mut self,
        atom: Atom,
        why: impl FnOnce() -> Justification,
    ) -> Result<bool, EvalError> {
        let rel = self.rel.entry(atom.pred).or_default();
        if rel.push(atom.clone()) {
            self.atom_count += 1;
            if self.atom_count > self.max_atoms {
                return Err(EvalError::ResourceCap(self.max_atoms));
            }
            self.provenance.entry(atom).or_insert_with(why);
            Ok(true)
        } else {
            Ok(false)
        }
    }

    fn refresh_all(&mut self) {
        for rel in self.rel.values_mut() {
            rel.cur_len = rel.atoms.len();
        }
    }
}

// ---------------------------------------------------------------------------
// Bindings, matching, arithmetic
// ---------------------------------------------------------------------------

type Bindings = Vec<Option<Term>>;

fn match_term(pattern: &Term, value: &Term, b: &mut Bindings) -> bool {
    match pattern {
        Term::Int(_) | Term::Sym(_) => pattern == value,
        Term::Var(v) => match &b[*v as usize] {
            Some(bound) => bound == value,
            None => {
                b[*v as usize] = Some(value.clone());
                true
            }
        },
        Term::Off(v, d) => match value {
            Term::Int(i) => match &b[*v as usize] {
                Some(Term::Int(bound)) => *bound == i - d,
                Some(_) => false,
                None => {
                    b[*v as usize] = Some(Term::Int(i - d));
                    true
                }
            },
            _ => false,
        },
        Term::App(s, args) => match value {
            Term::App(s2, args2) if s == s2 && args.len() == args2.len() => {
                args.iter().zip(args2).all(|(p, v)| match_term(p, v, b))
            }
            _ => false,
        },
    }
}

fn match_atom(pattern: &Atom, atom: &Atom, b: &Bindings) -> Option<Bindings> {
    if pattern.pred != atom.pred || pattern.args.len() != atom.args.len() {
        return None;
    }
    let mut trial = b.clone();
    for (p, v) in pattern.args.iter().zip(&atom.args) {
        if !match_term(p, v, &mut trial) {
            return None;
        }
    }
    Some(trial)
}

/// Instantiate a term under complete bindings; must produce a ground term.
fn subst(term: &Term, b: &Bindings) -> Result<Term, EvalError> {
    Ok(match term {
        Term::Int(_) | Term::Sym(_) => term.clone(),
        Term::Var(v) => b[*v as usize]
            .clone()
            .expect("safety: head/negative variables are bound"),
        Term::Off(v, d) => match &b[*v as usize] {
            Some(Term::Int(i)) => {
                Term::Int(i.checked_add(*d).ok_or(EvalError::Overflow)?)
            }
            Some(other) => {
                return Err(EvalError::Type(format!(
                    "arithmetic offset applied to non-integer {other}"
                )))
            }
            None => unreachable!("safety: offset variables are bound"),
        },
        Term::App(s, args) => Term::App(
            *s,
            args.iter()
                .map(|a| subst(a, b))
                .collect::<Result<Vec<_>, _>>()?,
        ),
    })
}

fn subst_atom(atom: &Atom, b: &Bindings) -> Result<Atom, EvalError> {
    Ok(Atom {
        pred: atom.pred,
        args: atom
            .args
            .iter()
            .map(|t| subst(t, b))
            .collect::<Result<Vec<_>, _>>()?,
    })
}

fn eval_expr(e: &Expr, b: &Bindings) -> Result<i64, EvalError> {
    Ok(match e {
        Expr::Const(c) => *c,
        Expr::Var(v) => match &b[*v as usize] {
            Some(Term::Int(i)) => *i,
            Some(other) => {
                return Err(EvalError::Type(format!(
                    "arithmetic on non-integer term {other}"
                )))
            }
            None => unreachable!("safety: constraint variables are bound"),
        },
        Expr::Add(a, c) => eval_expr(a, b)?
            .checked_add(eval_expr(c, b)?)
            .ok_or(EvalError::Overflow)?,
        Expr::Sub(a, c) => eval_expr(a, b)?
            .checked_sub(eval_expr(c, b)?)
            .ok_or(EvalError::Overflow)?,
        Expr::Mul(a, c) => eval_expr(a, b)?
            .checked_mul(eval_expr(c, b)?)
            .ok_or(EvalError::Overflow)?,
        Expr::Pow(a, k) => {
            let base = eval_expr(a, b)?;
            let mut acc: i64 = 1;
            for _ in 0..*k {
                acc = acc.checked_mul(base).ok_or(EvalError::Overflow)?;
            }
            acc
        }
        Expr::Abs(a) => eval_expr(a, b)?.checked_abs().ok_or(EvalError::Overflow)?,
        Expr::Neg(a) => eval_expr(a, b)?.checked_neg().ok_or(EvalError::Overflow)?,
    })
}

// ---------------------------------------------------------------------------
// Rule schedules
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
enum Step {
    /// Join with positive literal k; `intra_rank` is its position among the
    /// fixpoint-internal literals in join order, if internal.
    Pos { lit: usize, intra_rank: Option<usize> },
    Neg(usize),
    Filter(usize),
    /// Equality constraint binding variable `var`.
    Bind { cons: usize, var: u32 },
}

struct Schedule {
    steps: Vec<Step>,
    intra_count: usize,
}

fn term_vars(t: &Term) -> Vec<u32> {
    let mut out = Vec::new();
    t.collect_vars(&mut out);
    out
}

fn atom_vars(a: &Atom) -> Vec<u32> {
    let mut out = Vec::new();
    for t in &a.args {
        t.collect_vars(&mut out);
    }
    out
}

/// Literal selectivity: prefer patterns with more bound/constant top-level
/// positions. Deterministic tie-break by original order.
fn boundness(atom: &Atom, bound: &[bool]) -> usize {
    let mut score = 0;
    for arg in &atom.args {
        match arg {
            Term::Int(_) | Term::Sym(_) => score += 2,
            Term::Var(v) if bound[*v as usize] => score += 2,
            Term::Off(v, _) if bound[*v as usize] => score += 2,
            Term::App(..) => {
                let vs = term_vars(arg);
                if vs.iter().all(|&v| bound[v as usize]) {
                    score += 2;
                } else {
                    score += 1;
                }
            }
            _ => {}
        }
    }
    score
}

fn build_schedule(rule: &Rule, prebound: &[bool], intra: &[usize]) -> Schedule {
    let n = rule.var_count();
    let mut bound = prebound.to_vec();
    bound.resize(n, false);
    let mut steps = Vec::new();
    let mut pos_left: Vec<usize> = (0..rule.body_pos.len()).collect();
    let mut neg_left: Vec<usize> = (0..rule.body_neg.len()).collect();
    let mut cons_left: Vec<usize> = (0..rule.constraints.len()).collect();
    let mut intra_rank = 0usize;

    loop {
        // Flush everything that is ready.
        let mut progress = true;
        while progress {
            progress = false;
            cons_left.retain(|&k| {
                let c = &rule.constraints[k];
                let mut vs = Vec::new();
                c.collect_vars(&mut vs);
                if vs.iter().all(|&v| bound[v as usize]) {
                    steps.push(Step::Filter(k));
                    progress = true;
                    return false;
                }
                if c.op == CmpOp::Eq {
                    for (target, source) in [(&c.lhs, &c.rhs), (&c.rhs, &c.lhs)] {
                        if let Some(v) = target.as_var() {
                            if !bound[v as usize] {
                                let mut sv = Vec::new();
                                source.collect_vars(&mut sv);
                                if sv.iter().all(|&u| bound[u as usize]) {
                                    steps.push(Step::Bind { cons: k, var: v });
                                    bound[v as usize] = true;
                                    progress = true;
                                    return false;
                                }
                            }
                        }
                    }
                }
                true
            });
            neg_left.retain(|&k| {
                let vs = atom_vars(&rule.body_neg[k]);
                if vs.iter().all(|&v| bound[v as usize]) {
                    steps.push(Step::Neg(k));
                    progress = true;
                    false
                } else {
                    true
                }
            });
        }
        if pos_left.is_empty() {
            break;
        }
        // Greedy: the most-bound remaining literal joins next.
        let (pick_idx, &lit) = pos_left
            .iter()
            .enumerate()
            .max_by_key(|(i, &l)| (boundness(&rule.body_pos[l], &bound), usize::MAX - i))
            .unwrap();
        pos_left.remove(pick_idx);
        let rank = if intra.contains(&lit) {
            let r = intra_rank;
            intra_rank += 1;
            Some(r)
        } else {
            None
        };
        steps.push(Step::Pos { lit, intra_rank: rank });
        for v in atom_vars(&rule.body_pos[lit]) {
            bound[v as usize] = true;
        }
    }
    debug_assert!(neg_left.is_empty() && cons_left.is_empty(), "unsafe rule slipped through");
    Schedule {
        steps,
        intra_count: intra_rank,
    }
}

// ---------------------------------------------------------------------------
// Join
// ---------------------------------------------------------------------------

struct RuleRun<'a> {
    rule: &'a Rule,
    schedule: &'a Schedule,
    /// Mode per intra rank for the current delta choice.
    delta_rank: Option<usize>,
    naive: bool,
}

fn run_schedule(
    db: &Db,
    run: &RuleRun,
    step_idx: usize,
    bindings: &mut Bindings,
    out: &mut Vec<Bindings>,
) -> Result<(), EvalError> {
    let Some(step) = run.schedule.steps.get(step_idx) else {
        out.push(bindings.clone());
        return Ok(());
    };
    match step {
        Step::Pos { lit, intra_rank } => {
            let pattern = &run.rule.body_pos[*lit];
            let Some(rel) = db.relation(pattern.pred) else {
                return Ok(());
            };
            let mode = match (run.naive, intra_rank, run.delta_rank) {
                (true, _, _) | (_, None, _) => Mode::Full,
                (false, Some(r), Some(d)) => {
                    if *r < d {
                        Mode::Full
                    } else if *r == d {
                        Mode::Delta
                    } else {
                        Mode::Stable
                    }
                }
                (false, Some(_), None) => Mode::Full,
            };
            let range = rel.range(mode);
            // Use the time index when the pattern's time argument is ground.
            let indexed: Option<Vec<usize>> = rel.time_pos.and_then(|p| {
                pattern.args.get(p).and_then(|arg| {
                    let t = match arg {
                        Term::Int(i) => Some(*i),
                        Term::Var(v) => match &bindings[*v as usize] {
                            Some(Term::Int(i)) => Some(*i),
                            _ => None,
                        },
                        Term::Off(v, d) => match &bindings[*v as usize] {
                            Some(Term::Int(i)) => i.checked_add(*d),
                            _ => None,
                        },
                        _ => None,
                    }?;
                    Some(
                        rel.by_time
                            .get(&t)
                            .map(|v| {
                                v.iter()
                                    .copied()
                                    .filter(|i| range.contains(i))
                                    .collect()
                            })
                            .unwrap_or_default(),
                    )
                })
            });
            match indexed {
                Some(idxs) => {
                    for i in idxs {
                        if let Some(mut next) = match_atom(pattern, &rel.atoms[i], bindings)
                        {
                            run_schedule(db, run, step_idx + 1, &mut next, out)?;
                        }
                    }
                }
                None => {
                    for i in range {
                        if let Some(mut next) = match_atom(pattern, &rel.atoms[i], bindings)
                        {
                            run_schedule(db, run, step_idx + 1, &mut next, out)?;
                        }
                    }
                }
            }
            Ok(())
        }
        Step::Neg(k) => {
            let ground = subst_atom(&run.rule.body_neg[*k], bindings)?;
            let present = db
                .relation(ground.pred)
                .is_some_and(|rel| rel.set.contains(&ground));
            if present {
                Ok(())
            } else {
                run_schedule(db, run, step_idx + 1, bindings, out)
            }
        }
        Step::Filter(k) => {
            let c = &run.rule.constraints[*k];
            let lhs = eval_expr(&c.lhs, bindings)?;
            let rhs = eval_expr(&c.rhs, bindings)?;
            if c.op.holds(lhs, rhs) {
                run_schedule(db, run, step_idx + 1, bindings, out)
            } else {
                Ok(())
            }
        }
        Step::Bind { cons, var } => {
            let c = &run.rule.constraints[*cons];
            let source = if c.lhs.as_var() == Some(*var) {
                &c.rhs
            } else {
                &c.lhs
            };
            let value = eval_expr(source, bindings)?;
            let prev = bindings[*var as usize].replace(Term::Int(value));
            debug_assert!(prev.is_none());
            run_schedule(db, run, step_idx + 1, bindings, out)?;
            bindings[*var as usize] = None;
            Ok(())
        }
    }
}

// ---------------------------------------------------------------------------
// Fixpoints
// ---------------------------------------------------------------------------

/// One rule instance scheduled for a fixpoint: the rule plus pre-bindings
/// (the head time variable in temporal evaluation).
struct Job<'a> {
    rule_idx: usize,
    rule: &'a Rule,
    prebind: Vec<(u32, i64)>,
    intra: Vec<usize>,
}

fn fixpoint(
    db: &mut Db,
    jobs: &[Job],
    preds: &std::collections::BTreeSet<Sym>,
    strategy: Strategy,
) -> Result<(), EvalError> {
    db.refresh_all();
    for p in preds {
        if let Some(rel) = db.rel.get_mut(p) {
            rel.old_len = 0;
        }
    }
    let naive = strategy == Strategy::Naive;
    let prepared: Vec<(Bindings, Schedule)> = jobs
        .iter()
        .map(|job| {
            let mut bindings: Bindings = vec![None; job.rule.var_count()];
            let mut prebound = vec![false; job.rule.var_count()];
            for &(v, val) in &job.prebind {
                bindings[v as usize] = Some(Term::Int(val));
                prebound[v as usize] = true;
            }
            (bindings, build_schedule(job.rule, &prebound, &job.intra))
        })
        .collect();
    let mut first = true;
    loop {
        let mut inserted = false;
        for (job, (bindings, schedule)) in jobs.iter().zip(&prepared) {
            let delta_choices: Vec<Option<usize>> = if naive {
                vec![None]
            } else if schedule.intra_count == 0 {
                if first {
                    vec![None]
                } else {
                    continue;
                }
            } else {
                (0..schedule.intra_count).map(Some).collect()
            };
            let mut solutions = Vec::new();
            for delta_rank in delta_choices {
                let run = RuleRun {
                    rule: job.rule,
                    schedule: &schedule,
                    delta_rank,
                    naive,
                };
                run_schedule(db, &run, 0, &mut bindings.clone(), &mut solutions)?;
            }
            for sol in solutions {
                let head = subst_atom(&job.rule.head, &sol)?;
                debug_assert!(head.is_ground());
                let rule_idx = job.rule_idx;
                let rule = job.rule;
                let body = || Justification::Derived {
                    rule_idx,
                    body: rule
                        .body_pos
                        .iter()
                        .map(|a| subst_atom(a, &sol).expect("body is ground"))
                        .collect(),
                };
                if db.insert_derived(head, body)? {
                    inserted = true;
                }
            }
        }
        // Advance regions: last iteration's additions become the new delta.
        let mut any_delta = false;
        for p in preds {
            if let Some(rel) = db.rel.get_mut(p) {
                rel.old_len = rel.cur_len;
                rel.cur_len = rel.atoms.len();
                if rel.old_len != rel.cur_len {
                    any_delta = true;
                }
            }
        }
        first = false;
        if !inserted && !any_delta {
            return Ok(());
        }
        if naive && !inserted {
            return Ok(());
        }
    }
}

// ---------------------------------------------------------------------------
// Model
// ---------------------------------------------------------------------------

/// The perfect model of a locally-stratified program.
#[derive(Debug)]
pub struct Model {
    rel: BTreeMap<Sym, Relation>,
    provenance: HashMap<Atom, Justification>,
}

impl Model {
    pub fn contains(&self, atom: &Atom) -> bool {
        self.rel
            .get(&atom.pred)
            .is_some_and(|r| r.set.contains(atom))
    }

    pub fn atoms_of(&self, pred: Sym) -> &[Atom] {
        self.rel.get(&pred).map(|r| r.atoms.as_slice()).unwrap_or(&[])
    }

    pub fn predicates(&self) -> impl Iterator<Item = Sym> + '_ {
        self.rel.keys().copied()
    }

    pub fn all_atoms(&self) -> impl Iterator<Item = &Atom> {
        self.rel.values().flat_map(|r| r.atoms.iter())
    }

    pub fn len(&self) -> usize {
        self.rel.values().map(|r| r.atoms.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn justification(&self, atom: &Atom) -> Option<Justification> {
        if let Some(j) = self.provenance.get(atom) {
            return Some(j.clone());
        }
        self.contains(atom).then_some(Justification::Fact)
    }

    pub fn has_predicate(&self, pred: Sym) -> bool {
        self.rel.contains_key(&pred)
    }

    /// All bindings of the pattern's variables against the model,
    /// deterministically ordered.
    pub fn matches(&self, pattern: &Atom, var_count: usize) -> Vec<Vec<Option<Term>>> {
        let mut out = Vec::new();
        if let Some(rel) = self.rel.get(&pattern.pred) {
            let empty: Bindings = vec![None; var_count];
            for atom in &rel.atoms {
                if let Some(b) = match_atom(pattern, atom, &empty) {
                    out.push(b);
                }
            }
        }
        out.sort();
        out.dedup();
        out
    }

    /// Parse and run a goal like `answer(q0, C)`, returning one map of
    /// variable name to term per match, deterministically ordered.
    pub fn query(&self, goal: &str) -> Result<Vec<BTreeMap<String, Term>>, QueryError> {
        let (pattern, names) = parse_goal(goal)?;
        if !self.rel.contains_key(&pattern.pred) {
            return Err(QueryError::UnknownPredicate(pattern.pred.to_string()));
        }
        let subs = self.matches(&pattern, names.len());
        Ok(subs
            .into_iter()
            .map(|b| {
                names
                    .iter()
                    .cloned()
                    .zip(b)
                    .filter_map(|(n, t)| t.map(|t| (n, t)))
                    .collect()
            })
            .collect())
    }

    /// One atom per line, sorted; used by golden tests.
    pub fn dump(&self) -> String {
        let mut lines: Vec<String> = self.all_atoms().map(|a| format!("{a}.")).collect();
        lines.sort();
        let mut out = lines.join("\n");
        if !out.is_empty() {
            out.push('\n');
        }
        out
    }
}

/// Evaluate `program` over `fb` and return the perfect model.
pub fn evaluate(
    program: &Program,
    fb: &FactBase,
    opts: &EvalOptions,
) -> Result<Model, EvalError> {
    let plan = stratify(program)?;
    let mut db = Db {
        rel: BTreeMap::new(),
        atom_count: 0,
        max_atoms: opts.max_atoms,
        provenance: HashMap::new(),
    };
    // Register time positions before seeding so indexes are built on insert.
    for (pred, pos) in &plan.time_pos {
        db.rel.entry(*pred).or_default().time_pos = Some(*pos);
    }
    for pred in fb.predicates() {
        let rel = db.rel.entry(pred).or_default();
        if rel.time_pos.is_none() {
            rel.time_pos = fb.time_pos_of(pred);
        }
    }
    // Make every program predicate known, even if it derives nothing.
    for rule in &program.rules {
        db.rel.entry(rule.head.pred).or_default();
        for a in rule.body_pos.iter().chain(rule.body_neg.iter()) {
            db.rel.entry(a.pred).or_default();
        }
    }
    for atom in fb.all_atoms() {
        db.insert_fact(atom.clone())?;
    }
    for fact in &program.facts {
        db.insert_fact(fact.clone())?;
    }

    let horizon = fb.time_horizon as i64;
    for stratum in &plan.strata {
        let rules: Vec<(usize, &Rule)> = program
            .rules
            .iter()
            .enumerate()
            .filter(|(_, r)| stratum.preds.contains(&r.head.pred))
            .collect();
        if rules.is_empty() {
            continue;
        }
        if !stratum.temporal {
            let jobs: Vec<Job> = rules
                .iter()
                .map(|&(idx, rule)| Job {
                    rule_idx: idx,
                    rule,
                    prebind: Vec::new(),
                    intra: intra_literals(rule, &stratum.preds),
                })
                .collect();
            fixpoint(&mut db, &jobs, &stratum.preds, opts.strategy)?;
        } else {
            for t in 0..=horizon {
                for group in &stratum.frame_order {
                    let mut jobs = Vec::new();
                    for &(idx, rule) in &rules {
                        if !group.contains(&rule.head.pred) {
                            continue;
                        }
                        let time_pos = plan.time_pos[&rule.head.pred];
                        let head_time = &rule.head.args[time_pos];
                        let prebind = match head_time {
                            Term::Int(c) => {
                                if *c != t {
                                    continue;
                                }
                                Vec::new()
                            }
                            Term::Var(v) => vec![(*v, t)],
                            Term::Off(v, d) => vec![(*v, t - d)],
                            other => {
                                return Err(EvalError::Type(format!(
                                    "non-integer head time argument {other}"
                                )))
                            }
                        };
                        jobs.push(Job {
                            rule_idx: idx,
                            rule,
                            prebind,
                            intra: intra_literals(rule, group),
                        });
                    }
                    if !jobs.is_empty() {
                        fixpoint(&mut db, &jobs, group, opts.strategy)?;
                    }
                }
            }
        }
    }

    Ok(Model {
        rel: db.rel,
        provenance: db.provenance,
    })
}

fn intra_literals(rule: &Rule, preds: &std::collections::BTreeSet<Sym>) -> Vec<usize> {
    rule.body_pos
        .iter()
        .enumerate()
        .filter(|(_, a)| preds.contains(&a.pred))
        .map(|(i, _)| i)
        .collect()
}
