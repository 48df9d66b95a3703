//! Local stratification analysis.
//!
//! Classic stratification fails on the event-calculus program: `happens`
//! depends through negation on `holdsAt`, which depends positively on
//! `happens` at earlier times. The analysis therefore certifies negative
//! cycles that are discharged by strictly decreasing time arguments and
//! marks the affected predicates as *temporal*: the evaluator runs them
//! frame by frame, with a within-frame sub-order for same-time negative
//! dependencies.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use thiserror::Error;

use crate::logic::{Sym, Term};

use super::ast::{CmpOp, Program, Rule};

#[derive(Debug, Error)]
pub enum StratifyError {
    #[error("unstratifiable program: negative cycle {}", format_cycle(.cycle))]
    Unstratifiable { cycle: Vec<String> },
}

fn format_cycle(cycle: &[String]) -> String {
    cycle.join(" -> ")
}

/// One evaluation stratum: a set of predicates evaluated together.
#[derive(Clone, Debug)]
pub struct Stratum {
    pub preds: BTreeSet<Sym>,
    /// True when the stratum must be evaluated frame by frame, i.e. its
    /// negative dependencies are discharged only by decreasing time.
    pub temporal: bool,
    /// For temporal strata: the within-frame evaluation order. Each group is
    /// one fixpoint; groups run in order at every frame.
    pub frame_order: Vec<BTreeSet<Sym>>,
}

/// The full evaluation plan.
#[derive(Clone, Debug)]
pub struct StrataPlan {
    pub strata: Vec<Stratum>,
    /// Inferred time-argument position per predicate (single position only;
    /// predicates with several time arguments index on the last one).
    pub time_pos: BTreeMap<Sym, usize>,
}

impl StrataPlan {
    /// The temporal flag per predicate.
    pub fn temporal_preds(&self) -> BTreeSet<Sym> {
        self.strata
            .iter()
            .filter(|s| s.temporal)
            .flat_map(|s| s.preds.iter().copied())
            .collect()
    }

    pub fn stratum_of(&self, pred: Sym) -> Option<usize> {
        self.strata.iter().position(|s| s.preds.contains(&pred))
    }
}

// ---------------------------------------------------------------------------
// Time-sort inference
// ---------------------------------------------------------------------------

/// Argument positions holding time values, inferred by propagating from the
/// built-in `time/1` and `next_time/2` predicates through shared variables.
fn infer_time_positions(program: &Program) -> BTreeMap<Sym, BTreeSet<usize>> {
    let mut marks: BTreeMap<Sym, BTreeSet<usize>> = BTreeMap::new();
    marks.entry(Sym::new("time")).or_default().insert(0);
    let nt = Sym::new("next_time");
    marks.entry(nt).or_default().extend([0usize, 1]);

    loop {
        let mut changed = false;
        for rule in &program.rules {
            // Variables known to carry time in this rule.
            let mut time_vars: BTreeSet<u32> = BTreeSet::new();
            let atoms = std::iter::once(&rule.head)
                .chain(rule.body_pos.iter())
                .chain(rule.body_neg.iter());
            for atom in atoms.clone() {
                if let Some(positions) = marks.get(&atom.pred) {
                    for &p in positions {
                        if let Some(Term::Var(v) | Term::Off(v, _)) = atom.args.get(p) {
                            time_vars.insert(*v);
                        }
                    }
                }
            }
            if time_vars.is_empty() {
                continue;
            }
            for atom in atoms {
                for (i, arg) in atom.args.iter().enumerate() {
                    if let Term::Var(v) | Term::Off(v, _) = arg {
                        if time_vars.contains(v)
                            && marks.entry(atom.pred).or_default().insert(i)
                        {
                            changed = true;
                        }
                    }
                }
            }
        }
        if !changed {
            return marks;
        }
    }
}

// ---------------------------------------------------------------------------
// Per-rule time-offset resolution
// ---------------------------------------------------------------------------

/// Union-find over a rule's time variables with additive offsets, built from
/// `next_time(T1, T2)` literals (`T2 = T1 + 1`) and linear equality
/// constraints (`T2 = T1 + c`).
struct OffsetGraph {
    parent: Vec<u32>,
    /// Offset of the variable relative to its parent.
    delta: Vec<i64>,
}

impl OffsetGraph {
    fn new(n: usize) -> Self {
        OffsetGraph {
            parent: (0..n as u32).collect(),
            delta: vec![0; n],
        }
    }

    /// (root, offset of v relative to root)
    fn find(&mut self, v: u32) -> (u32, i64) {
        if self.parent[v as usize] == v {
            return (v, 0);
        }
        let (root, up) = self.find(self.parent[v as usize]);
        self.parent[v as usize] = root;
        self.delta[v as usize] += up;
        (root, self.delta[v as usize])
    }

    /// Record `a = b + d`.
    fn relate(&mut self, a: u32, b: u32, d: i64) {
        let (ra, oa) = self.find(a);
        let (rb, ob) = self.find(b);
        if ra != rb {
            // a = b + d  =>  ra + oa... express ra in terms of rb:
            // a = ra + oa, b = rb + ob, a = b + d => ra = rb + (ob + d - oa)
            self.parent[ra as usize] = rb;
            self.delta[ra as usize] = ob + d - oa;
        }
    }
}

fn build_offsets(rule: &Rule) -> OffsetGraph {
    let mut g = OffsetGraph::new(rule.var_count());
    let nt = Sym::new("next_time");
    for atom in &rule.body_pos {
        if atom.pred == nt && atom.args.len() == 2 {
            if let (Term::Var(a), Term::Var(b)) = (&atom.args[0], &atom.args[1]) {
                g.relate(*b, *a, 1);
            }
        }
    }
    for c in &rule.constraints {
        if c.op == CmpOp::Eq {
            for (lhs, rhs) in [(&c.lhs, &c.rhs), (&c.rhs, &c.lhs)] {
                if let (Some(a), Some((b, d))) = (lhs.as_var(), rhs.as_var_offset()) {
                    g.relate(a, b, d);
                }
            }
        }
    }
    g
}

/// Time value of a term: either linear in a variable or constant.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum TimeVal {
    Linear(u32, i64),
    Const(i64),
}

fn time_val(term: &Term) -> Option<TimeVal> {
    match term {
        Term::Var(v) => Some(TimeVal::Linear(*v, 0)),
        Term::Off(v, d) => Some(TimeVal::Linear(*v, *d)),
        Term::Int(c) => Some(TimeVal::Const(*c)),
        _ => None,
    }
}

/// head_time - body_time when resolvable.
fn edge_weight(g: &mut OffsetGraph, head: TimeVal, body: TimeVal) -> Option<i64> {
    match (head, body) {
        (TimeVal::Const(a), TimeVal::Const(b)) => Some(a - b),
        (TimeVal::Linear(v, d), TimeVal::Linear(u, e)) => {
            let (rv, ov) = g.find(v);
            let (ru, ou) = g.find(u);
            if rv == ru {
                Some((ov + d) - (ou + e))
            } else {
                None
            }
        }
        _ => None,
    }
}

// ---------------------------------------------------------------------------
// Dependency graph and SCCs
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
struct Edge {
    to: Sym,
    negative: bool,
    /// head_time - body_time, when both predicates have a single time
    /// argument and the rule relates them.
    weight: Option<i64>,
}

fn single_time_pos(marks: &BTreeMap<Sym, BTreeSet<usize>>, pred: Sym) -> Option<usize> {
    marks.get(&pred).and_then(|s| {
        if s.len() == 1 {
            s.iter().next().copied()
        } else {
            None
        }
    })
}

fn dependency_graph(
    program: &Program,
    marks: &BTreeMap<Sym, BTreeSet<usize>>,
) -> BTreeMap<Sym, Vec<Edge>> {
    let mut graph: BTreeMap<Sym, Vec<Edge>> = BTreeMap::new();
    for fact in &program.facts {
        graph.entry(fact.pred).or_default();
    }
    for rule in &program.rules {
        let head = rule.head.pred;
        graph.entry(head).or_default();
        let mut offsets = build_offsets(rule);
        let head_time = single_time_pos(marks, head)
            .and_then(|p| rule.head.args.get(p))
            .and_then(time_val);
        for (atoms, negative) in [(&rule.body_pos, false), (&rule.body_neg, true)] {
            for atom in atoms.iter() {
                graph.entry(atom.pred).or_default();
                let body_time = single_time_pos(marks, atom.pred)
                    .and_then(|p| atom.args.get(p))
                    .and_then(time_val);
                let weight = match (head_time, body_time) {
                    (Some(h), Some(b)) => edge_weight(&mut offsets, h, b),
                    _ => None,
                };
                graph.entry(head).or_default().push(Edge {
                    to: atom.pred,
                    negative,
                    weight,
                });
            }
        }
    }
    graph
}

/// Tarjan's strongly connected components; returns components in reverse
/// topological order (dependencies before dependents).
fn sccs(graph: &BTreeMap<Sym, Vec<Edge>>) -> Vec<BTreeSet<Sym>> {
    struct State<'g> {
        graph: &'g BTreeMap<Sym, Vec<Edge>>,
        index: HashMap<Sym, usize>,
        low: HashMap<Sym, usize>,
        on_stack: BTreeSet<Sym>,
        stack: Vec<Sym>,
        next: usize,
        out: Vec<BTreeSet<Sym>>,
    }
    fn visit(s: &mut State, v: Sym) {
        s.index.insert(v, s.next);
        s.low.insert(v, s.next);
        s.next += 1;
        s.stack.push(v);
        s.on_stack.insert(v);
        if let Some(edges) = s.graph.get(&v) {
            let targets: Vec<Sym> = edges.iter().map(|e| e.to).collect();
            for w in targets {
                if !s.index.contains_key(&w) {
                    visit(s, w);
                    let lw = s.low[&w];
                    let lv = s.low.get_mut(&v).unwrap();
                    *lv = (*lv).min(lw);
                } else if s.on_stack.contains(&w) {
                    let iw = s.index[&w];
                    let lv = s.low.get_mut(&v).unwrap();
                    *lv = (*lv).min(iw);
                }
            }
        }
        if s.low[&v] == s.index[&v] {
            let mut comp = BTreeSet::new();
            while let Some(w) = s.stack.pop() {
                s.on_stack.remove(&w);
                comp.insert(w);
                if w == v {
                    break;
                }
            }
            s.out.push(comp);
        }
    }
    let mut state = State {
        graph,
        index: HashMap::new(),
        low: HashMap::new(),
        on_stack: BTreeSet::new(),
        stack: Vec::new(),
        next: 0,
        out: Vec::new(),
    };
    for &v in graph.keys() {
        if !state.index.contains_key(&v) {
            visit(&mut state, v);
        }
    }
    state.out
}

/// Find a cycle through the edge `from -> to` inside `component`, for error
/// reporting. Returns the predicate names around the cycle.
fn cycle_witness(
    graph: &BTreeMap<Sym, Vec<Edge>>,
    component: &BTreeSet<Sym>,
    from: Sym,
    to: Sym,
) -> Vec<String> {
    if from == to {
        return vec![from.to_string(), to.to_string()];
    }
    // BFS from `to` until we reach `from`, staying inside the component.
    let mut prev: BTreeMap<Sym, Sym> = BTreeMap::new();
    let mut seen: BTreeSet<Sym> = BTreeSet::new();
    let mut queue = std::collections::VecDeque::new();
    queue.push_back(to);
    seen.insert(to);
    while let Some(v) = queue.pop_front() {
        if v == from {
            break;
        }
        for e in graph.get(&v).into_iter().flatten() {
            if component.contains(&e.to) && seen.insert(e.to) {
                prev.insert(e.to, v);
                queue.push_back(e.to);
            }
        }
    }
    // Walk prev links from `from` back to `to`; reversing gives the forward
    // path to -> ... -> from.
    let mut back = vec![from];
    let mut cur = from;
    while cur != to {
        match prev.get(&cur) {
            Some(&p) => {
                back.push(p);
                cur = p;
            }
            None => break,
        }
    }
    back.reverse();
    let mut cycle: Vec<String> = vec![from.to_string()];
    cycle.extend(back.iter().map(|s| s.to_string()));
    cycle
}

/// Compute the stratification plan or report a negative cycle.
pub fn stratify(program: &Program) -> Result<StrataPlan, StratifyError> {
    let marks = infer_time_positions(program);
    let graph = dependency_graph(program, &marks);
    let components = sccs(&graph);

    let mut strata = Vec::new();
    for comp in components {
        // Intra-component edges.
        let mut internal: Vec<(Sym, &Edge)> = Vec::new();
        for &p in &comp {
            for e in graph.get(&p).into_iter().flatten() {
                if comp.contains(&e.to) {
                    internal.push((p, e));
                }
            }
        }
        let has_negative = internal.iter().any(|(_, e)| e.negative);
        if !has_negative {
            strata.push(Stratum {
                preds: comp,
                temporal: false,
                frame_order: Vec::new(),
            });
            continue;
        }

        // Temporal discharge: every member needs exactly one time argument,
        // every internal edge a known nonnegative weight, and no negative
        // edge may sit on a zero-weight cycle.
        let fail = |from: Sym, to: Sym| -> StratifyError {
            StratifyError::Unstratifiable {
                cycle: cycle_witness(&graph, &comp, from, to),
            }
        };
        for (from, e) in &internal {
            if single_time_pos(&marks, *from).is_none()
                || single_time_pos(&marks, e.to).is_none()
                || !matches!(e.weight, Some(w) if w >= 0)
            {
                return Err(fail(*from, e.to));
            }
        }

        // Zero-weight subgraph condensation gives the within-frame order.
        let mut zero_graph: BTreeMap<Sym, Vec<Edge>> = BTreeMap::new();
        for &p in &comp {
            zero_graph.entry(p).or_default();
        }
        for (from, e) in &internal {
            if e.weight == Some(0) {
                zero_graph.entry(*from).or_default().push((*e).clone());
            }
        }
        let zero_comps = sccs(&zero_graph);
        for zc in &zero_comps {
            for (from, e) in &internal {
                if e.negative
                    && e.weight == Some(0)
                    && zc.contains(from)
                    && zc.contains(&e.to)
                {
                    return Err(fail(*from, e.to));
                }
            }
        }

        strata.push(Stratum {
            preds: comp,
            temporal: true,
            frame_order: zero_comps,
        });
    }

    let mut time_pos = BTreeMap::new();
    for (pred, positions) in &marks {
        if let Some(&p) = positions.iter().next_back() {
            time_pos.insert(*pred, p);
        }
    }
    Ok(StrataPlan { strata, time_pos })
}

#[cfg(test)]
mod tests {
    use super::super::parse::parse_program;
    use super::*;

    #[test]
    fn positive_program_single_strata() {
        let p = parse_program("q(X) :- p(X).\np(1).").unwrap();
        let plan = stratify(&p).unwrap();
        assert!(plan.strata.iter().all(|s| !s.temporal));
        assert!(plan.temporal_preds().is_empty());
    }

    #[test]
    fn odd_loop_unstratifiable() {
        let p = parse_program("p :- not p.").unwrap();
        let err = stratify(&p).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("negative cycle"), "{msg}");
        assert!(msg.contains('p'), "{msg}");
    }

    #[test]
    fn negation_on_lower_stratum_is_fine() {
        let p = parse_program("r(X) :- p(X), not q(X).\np(1).\nq(2).").unwrap();
        let plan = stratify(&p).unwrap();
        let r = Sym::new("r");
        let q = Sym::new("q");
        assert!(plan.stratum_of(q).unwrap() < plan.stratum_of(r).unwrap());
    }

    #[test]
    fn event_calculus_core_is_temporal() {
        let text = "\
holdsAt(F,0) :- initially(F).
clipped(F,T) :- happens(E,T), terminates(E,F), time(T).
holdsAt(F,T+1) :- happens(E,T), initiates(E,F), not clipped(F,T), time(T).
holdsAt(F,T+1) :- holdsAt(F,T), not clipped(F,T), time(T).
happens(move(V),T1) :- disp_greater(9,V,T1,T2), next_time(T1,T2), not holdsAt(moving(V),T1).
disp_greater(9,V,T1,T2) :- displacement(D,V,T1,T2), D > 9.
displacement(D,V,T1,T2) :- position(V,X1,Y1,T1), position(V,X2,Y2,T2), next_time(T1,T2), D = (X1 - X2)^2 + (Y1 - Y2)^2.
initially(moving(V)) :- disp_greater(9,V,0,1).
";
        let p = parse_program(text).unwrap();
        let plan = stratify(&p).unwrap();
        let temporal = plan.temporal_preds();
        let expected: BTreeSet<Sym> = ["happens", "holdsAt", "clipped"]
            .iter()
            .map(|s| Sym::new(s))
            .collect();
        assert_eq!(temporal, expected);
        // Within-frame order: holdsAt before happens before clipped.
        let stratum = plan
            .strata
            .iter()
            .find(|s| s.temporal)
            .expect("temporal stratum");
        let pos = |name: &str| {
            stratum
                .frame_order
                .iter()
                .position(|g| g.contains(&Sym::new(name)))
                .unwrap()
        };
        assert!(pos("holdsAt") < pos("happens"));
        assert!(pos("happens") < pos("clipped"));
    }

    #[test]
    fn time_positions_inferred() {
        let text = "q(V,T2) :- p(V,T1), next_time(T1,T2).";
        let p = parse_program(text).unwrap();
        let plan = stratify(&p).unwrap();
        assert_eq!(plan.time_pos.get(&Sym::new("p")), Some(&1));
        assert_eq!(plan.time_pos.get(&Sym::new("q")), Some(&1));
    }

    #[test]
    fn same_time_negative_cycle_rejected() {
        // a and b negate each other at the same time point: no frame order
        // can discharge this.
        let text = "a(T) :- time(T), not b(T).\nb(T) :- time(T), not a(T).";
        let p = parse_program(text).unwrap();
        assert!(stratify(&p).is_err());
    }
}
