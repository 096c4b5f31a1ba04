//! Executable semantics for cross-checking the prover: SLD resolution
//! without occur check, bounded constructor rewriting, and the rewrite
//! sequence a successful derivation induces in the transformed TRS.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::rc::Rc;

use rand::Rng;
use serde::Serialize;

use crate::filter::ArgumentFilter;
use crate::frontend::{print_term, Program, QuerySpec};
use crate::term::{Atom, Symbol, Term, Var, VarGen};
use crate::transform::{accumulated_vars, in_symbol, out_symbol, u_term, Trs};
use crate::unify::{match_term, Node, NodeId, TermGraph};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Success,
    Failure,
    DepthExceeded,
    /// The overall resolution budget ran out before the tree was explored.
    BudgetExceeded,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SearchMode {
    FirstSuccess,
    /// Explores the whole tree up to the depth bound.
    Exhaustive,
}

#[derive(Clone, Copy, Debug)]
pub struct SldOptions {
    pub depth_bound: usize,
    pub mode: SearchMode,
    /// Resolution attempts over the whole search.
    pub budget: u64,
}

impl SldOptions {
    pub fn first_success(depth_bound: usize) -> SldOptions {
        SldOptions { depth_bound, mode: SearchMode::FirstSuccess, budget: 5_000_000 }
    }

    pub fn exhaustive(depth_bound: usize) -> SldOptions {
        SldOptions { depth_bound, mode: SearchMode::Exhaustive, budget: 5_000_000 }
    }
}

/// One resolution step: the clause used (0-based) and where its renamed
/// variables live in the final store.
#[derive(Clone, Debug)]
pub struct ResolutionStep {
    pub clause: usize,
    pub renaming: BTreeMap<Var, NodeId>,
}

#[derive(Clone, Debug)]
pub struct DerivationTrace {
    pub outcome: Outcome,
    /// Steps of the successful branch, empty otherwise.
    pub steps: Vec<ResolutionStep>,
    /// Bindings at the end of the successful branch (or of the last state).
    pub store: TermGraph,
    pub query_vars: BTreeMap<Var, NodeId>,
    pub query: Vec<Atom>,
    pub successes: usize,
    pub max_depth: usize,
}

impl DerivationTrace {
    /// Query variables with their bindings; cyclic ones are printed with
    /// back-references.
    pub fn answer(&self) -> Vec<(String, String)> {
        self.query_vars
            .iter()
            .map(|(v, &n)| {
                let shown = match self.store.to_term(n) {
                    Some(t) => print_term(&t),
                    None => self.store.display(n),
                };
                (v.name.to_string(), shown)
            })
            .collect()
    }

    /// The answer-instantiated query atoms, if they are finite.
    pub fn instantiated_query(&self) -> Option<Vec<Atom>> {
        self.query.iter().map(|a| instantiate_atom(a, &self.query_vars, &self.store)).collect()
    }
}

#[derive(Clone, Debug)]
enum Cell {
    Var(Option<usize>, Var),
    App(Symbol, Vec<usize>),
}

struct Goals {
    pred: Symbol,
    args: Vec<usize>,
    next: Option<Rc<Goals>>,
}

struct Choice {
    goals: Option<Rc<Goals>>,
    next_clause: usize,
    trail_mark: usize,
    heap_mark: usize,
    depth: usize,
}

struct Machine<'a> {
    prog: &'a Program,
    by_pred: BTreeMap<Symbol, Vec<usize>>,
    cells: Vec<Cell>,
    trail: Vec<usize>,
}

impl Machine<'_> {
    fn deref(&self, mut x: usize) -> usize {
        while let Cell::Var(Some(y), _) = self.cells[x] {
            x = y;
        }
        x
    }

    fn build(&mut self, t: &Term, vars: &mut BTreeMap<Var, usize>) -> usize {
        match t {
            Term::Var(v) => {
                if let Some(&c) = vars.get(v) {
                    return c;
                }
                self.cells.push(Cell::Var(None, v.clone()));
                let c = self.cells.len() - 1;
                vars.insert(v.clone(), c);
                c
            }
            Term::App(f, args) => {
                let kids = args.iter().map(|a| self.build(a, vars)).collect();
                self.cells.push(Cell::App(f.clone(), kids));
                self.cells.len() - 1
            }
        }
    }

    fn bind(&mut self, x: usize, y: usize) {
        if let Cell::Var(b, _) = &mut self.cells[x] {
            *b = Some(y);
        }
        self.trail.push(x);
    }

    /// Rational unification: App pairs already under comparison are
    /// assumed equal, so cyclic structures terminate.
    fn unify(&mut self, a: usize, b: usize) -> bool {
        let mut stack = vec![(a, b)];
        let mut seen: HashSet<(usize, usize)> = HashSet::new();
        while let Some((x, y)) = stack.pop() {
            let (x, y) = (self.deref(x), self.deref(y));
            if x == y {
                continue;
            }
            match (&self.cells[x], &self.cells[y]) {
                (Cell::Var(..), _) => self.bind(x, y),
                (_, Cell::Var(..)) => self.bind(y, x),
                (Cell::App(f, xs), Cell::App(g, ys)) => {
                    if f != g {
                        return false;
                    }
                    if seen.insert((x, y)) {
                        stack.extend(xs.iter().copied().zip(ys.iter().copied()));
                    }
                }
            }
        }
        true
    }

    fn undo(&mut self, trail_mark: usize, heap_mark: usize) {
        while self.trail.len() > trail_mark {
            let v = self.trail.pop().expect("non-empty");
            if let Cell::Var(b, _) = &mut self.cells[v] {
                *b = None;
            }
        }
        self.cells.truncate(heap_mark);
    }

    fn export(&self) -> TermGraph {
        let mut g = TermGraph::default();
        for i in 0..self.cells.len() {
            let r = self.deref(i);
            let n = match &self.cells[r] {
                Cell::Var(_, v) => Node::Var(Var::new(r as u32, &v.name)),
                Cell::App(f, kids) => Node::App(f.clone(), kids.iter().map(|&k| self.deref(k)).collect()),
            };
            g.add(n);
        }
        g
    }
}

/// SLD resolution with the leftmost selection rule, clauses in program
/// order and depth-first backtracking, without occur check.
pub fn sld_derive(prog: &Program, query: &[Atom], opts: &SldOptions) -> DerivationTrace {
    let mut by_pred: BTreeMap<Symbol, Vec<usize>> = BTreeMap::new();
    for (k, c) in prog.clauses.iter().enumerate() {
        by_pred.entry(c.head.pred.clone()).or_default().push(k);
    }
    let mut m = Machine { prog, by_pred, cells: Vec::new(), trail: Vec::new() };
    let mut query_vars = BTreeMap::new();
    let mut goals: Option<Rc<Goals>> = None;
    let mut built = Vec::new();
    for a in query {
        let args: Vec<usize> = a.args.iter().map(|t| m.build(t, &mut query_vars)).collect();
        built.push((a.pred.clone(), args));
    }
    for (pred, args) in built.into_iter().rev() {
        goals = Some(Rc::new(Goals { pred, args, next: goals }));
    }
    let mut stack = vec![Choice { goals, next_clause: 0, trail_mark: 0, heap_mark: m.cells.len(), depth: 0 }];
    let mut steps: Vec<ResolutionStep> = Vec::new();
    let mut successes = 0;
    let mut exceeded = false;
    let mut max_depth = 0;
    let mut attempts: u64 = 0;
    let finish = |m: &Machine, outcome, steps: Vec<ResolutionStep>, successes, max_depth| DerivationTrace {
        outcome,
        steps,
        store: m.export(),
        query_vars: query_vars.iter().map(|(v, &c)| (v.clone(), m.deref(c))).collect(),
        query: query.to_vec(),
        successes,
        max_depth,
    };
    while let Some(top) = stack.last_mut() {
        max_depth = max_depth.max(top.depth);
        let Some(g) = top.goals.clone() else {
            successes += 1;
            if opts.mode == SearchMode::FirstSuccess {
                steps.truncate(top.depth);
                return finish(&m, Outcome::Success, steps, successes, max_depth);
            }
            stack.pop();
            continue;
        };
        if top.depth >= opts.depth_bound {
            exceeded = true;
            stack.pop();
            continue;
        }
        let cands = m.by_pred.get(&g.pred).map(|v| v.as_slice()).unwrap_or(&[]);
        if top.next_clause >= cands.len() {
            stack.pop();
            continue;
        }
        let ci = cands[top.next_clause];
        top.next_clause += 1;
        let (trail_mark, heap_mark, depth) = (top.trail_mark, top.heap_mark, top.depth);
        m.undo(trail_mark, heap_mark);
        attempts += 1;
        if attempts > opts.budget {
            return finish(&m, Outcome::BudgetExceeded, Vec::new(), successes, max_depth);
        }
        let clause = &m.prog.clauses[ci];
        let mut ren = BTreeMap::new();
        let mut ok = true;
        for (t, &arg) in clause.head.args.iter().zip(&g.args) {
            let c = m.build(t, &mut ren);
            if !m.unify(c, arg) {
                ok = false;
                break;
            }
        }
        if !ok {
            continue;
        }
        let mut next = g.next.clone();
        let body: Vec<(Symbol, Vec<usize>)> = clause
            .body
            .iter()
            .map(|b| (b.pred.clone(), b.args.iter().map(|t| m.build(t, &mut ren)).collect()))
            .collect();
        for (pred, args) in body.into_iter().rev() {
            next = Some(Rc::new(Goals { pred, args, next }));
        }
        for v in clause.vars() {
            ren.entry(v.clone()).or_insert_with(|| {
                m.cells.push(Cell::Var(None, v.clone()));
                m.cells.len() - 1
            });
        }
        steps.truncate(depth);
        steps.push(ResolutionStep { clause: ci, renaming: ren });
        let (tm, hm) = (m.trail.len(), m.cells.len());
        stack.push(Choice { goals: next, next_clause: 0, trail_mark: tm, heap_mark: hm, depth: depth + 1 });
    }
    let outcome = if exceeded {
        Outcome::DepthExceeded
    } else if successes > 0 {
        Outcome::Success
    } else {
        Outcome::Failure
    };
    finish(&m, outcome, Vec::new(), successes, max_depth)
}

fn instantiate(t: &Term, ren: &BTreeMap<Var, NodeId>, g: &TermGraph) -> Option<Term> {
    match t {
        Term::Var(v) => g.to_term(*ren.get(v)?),
        Term::App(f, args) => {
            Some(Term::App(f.clone(), args.iter().map(|a| instantiate(a, ren, g)).collect::<Option<_>>()?))
        }
    }
}

fn instantiate_atom(a: &Atom, ren: &BTreeMap<Var, NodeId>, g: &TermGraph) -> Option<Atom> {
    Some(Atom::new(a.pred.clone(), a.args.iter().map(|t| instantiate(t, ren, g)).collect::<Option<_>>()?))
}

/// Proof tree of a successful derivation for a single-atom query.
#[derive(Clone, Debug)]
pub struct ProofTree {
    pub step: usize,
    pub children: Vec<ProofTree>,
}

fn tree_from(prog: &Program, steps: &[ResolutionStep], next: &mut usize) -> Option<ProofTree> {
    let k = *next;
    let st = steps.get(k)?;
    *next += 1;
    let mut children = Vec::new();
    for _ in &prog.clauses[st.clause].body {
        children.push(tree_from(prog, steps, next)?);
    }
    Some(ProofTree { step: k, children })
}

pub fn proof_tree(prog: &Program, trace: &DerivationTrace) -> Option<ProofTree> {
    let mut next = 0;
    let t = tree_from(prog, &trace.steps, &mut next)?;
    (next == trace.steps.len()).then_some(t)
}

fn sequence(prog: &Program, trace: &DerivationTrace, node: &ProofTree) -> Option<Vec<Term>> {
    let st = &trace.steps[node.step];
    let c = &prog.clauses[st.clause];
    let g = &trace.store;
    let head = instantiate_atom(&c.head, &st.renaming, g)?;
    let p_in = Term::App(in_symbol(&c.head.pred), head.args.clone());
    let p_out = Term::App(out_symbol(&c.head.pred), head.args.clone());
    let mut out = vec![p_in];
    let acc = accumulated_vars(&c.head, &c.body);
    for (i, child) in node.children.iter().enumerate() {
        let sub = sequence(prog, trace, child)?;
        let vars: Vec<Term> =
            acc[i].iter().map(|v| instantiate(&Term::Var(v.clone()), &st.renaming, g)).collect::<Option<_>>()?;
        for s in sub {
            let Term::App(sym, mut args) = u_term(st.clause + 1, i + 1, s, &[]) else { unreachable!() };
            args.extend(vars.iter().cloned());
            out.push(Term::App(sym.with_arity(args.len()), args));
        }
    }
    out.push(p_out);
    Some(out)
}

/// The rewrite sequence from `p_in(t)σ` to `p_out(t)σ` that mirrors a
/// successful derivation of a single-atom query. `None` if some binding is
/// infinite.
pub fn simulation_sequence(prog: &Program, trace: &DerivationTrace) -> Option<Vec<Term>> {
    if trace.outcome != Outcome::Success || trace.query.len() != 1 {
        return None;
    }
    let tree = proof_tree(prog, trace)?;
    sequence(prog, trace, &tree)
}

fn is_constructor_term(t: &Term, defined: &BTreeSet<Symbol>) -> bool {
    match t {
        Term::Var(_) => true,
        Term::App(f, args) => !defined.contains(f) && args.iter().all(|a| is_constructor_term(a, defined)),
    }
}

/// Whether `s → t` is one constructor rewrite step of `r`. Variables that
/// only occur on a rule's right-hand side are read off `t`.
pub fn rewrite_step_valid(r: &Trs, s: &Term, t: &Term) -> bool {
    let defined = r.defined();
    for pos in s.positions() {
        let (Some(sub), Some(tsub)) = (s.at(&pos), t.at(&pos)) else {
            continue;
        };
        if s.replace_at(&pos, tsub.clone()).as_ref() != Some(t) {
            continue;
        }
        for rule in &r.rules {
            let mut sigma = BTreeMap::new();
            if !match_term(&rule.lhs, sub, &mut sigma) || !match_term(&rule.rhs, tsub, &mut sigma) {
                continue;
            }
            if sigma.values().all(|v| is_constructor_term(v, &defined)) {
                return true;
            }
        }
    }
    false
}

#[derive(Clone, Copy, Debug)]
pub struct RewriteLimits {
    pub step_bound: usize,
    /// Successors explored per term.
    pub branching: usize,
    /// Terms visited overall.
    pub node_budget: usize,
}

impl RewriteLimits {
    pub fn new(step_bound: usize) -> RewriteLimits {
        RewriteLimits { step_bound, branching: 16, node_budget: 200_000 }
    }
}

struct Rewriter<'a> {
    r: &'a Trs,
    defined: BTreeSet<Symbol>,
    constants: Vec<Symbol>,
    gen: VarGen,
    limits: RewriteLimits,
    visited: usize,
}

impl Rewriter<'_> {
    fn successors(&mut self, t: &Term) -> Vec<Term> {
        let mut out: Vec<Term> = Vec::new();
        for pos in t.positions() {
            let sub = t.at(&pos).expect("own position");
            for rule in &self.r.rules {
                let mut sigma = BTreeMap::new();
                if !match_term(&rule.lhs, sub, &mut sigma)
                    || !sigma.values().all(|v| is_constructor_term(v, &self.defined))
                {
                    continue;
                }
                let extra: Vec<Var> = rule.rhs.vars().into_iter().filter(|v| !sigma.contains_key(v)).collect();
                let mut choices: Vec<Option<Term>> = vec![None];
                if !extra.is_empty() {
                    choices.extend(self.candidates(t).into_iter().map(Some));
                }
                for ch in choices {
                    let mut s2 = sigma.clone();
                    for v in &extra {
                        let val = match &ch {
                            None => Term::Var(self.gen.fresh()),
                            Some(c) => c.clone(),
                        };
                        s2.insert(v.clone(), val);
                    }
                    let next = t.replace_at(&pos, rule.rhs.substitute(&s2)).expect("own position");
                    if !out.contains(&next) {
                        out.push(next);
                    }
                }
            }
        }
        out.truncate(self.limits.branching);
        out
    }

    /// Values tried for right-hand-side-only variables: the constants of
    /// the TRS and the ground constructor subterms of `t`.
    fn candidates(&self, t: &Term) -> Vec<Term> {
        let mut out: Vec<Term> = self.constants.iter().map(|c| Term::App(c.clone(), Vec::new())).collect();
        for sub in t.subterms() {
            if sub.is_ground() && is_constructor_term(sub, &self.defined) && !out.contains(sub) {
                out.push(sub.clone());
            }
        }
        out
    }

    fn longest(&mut self, t: &Term, depth: usize) -> usize {
        self.visited += 1;
        if depth >= self.limits.step_bound || self.visited > self.limits.node_budget {
            return depth;
        }
        let mut best = depth;
        for s in self.successors(t) {
            best = best.max(self.longest(&s, depth + 1));
            if best >= self.limits.step_bound || self.visited > self.limits.node_budget {
                break;
            }
        }
        best
    }
}

/// Length of the longest constructor rewrite sequence from `t` found within
/// the limits. Right-hand-side-only variables are instantiated by a fresh
/// variable, a constant of the TRS or a ground constructor subterm of the
/// term being rewritten (all of them by the same value).
pub fn rewrite_bounded(r: &Trs, t: &Term, limits: RewriteLimits) -> usize {
    let defined = r.defined();
    let constants: Vec<Symbol> = r.constructors().into_iter().filter(|c| c.arity == 0).collect();
    let gen = VarGen::above(std::iter::once(t).chain(r.rules.iter().flat_map(|x| [&x.lhs, &x.rhs])));
    let mut rw = Rewriter { r, defined, constants, gen, limits, visited: 0 };
    rw.longest(t, 0)
}

/// The predicate queries are asked for: the first `%query:` predicate, else
/// the first predicate named by a `%filter:` line, else the head of the
/// first clause.
pub fn entry_predicate(prog: &Program, spec: &QuerySpec) -> Option<Symbol> {
    let preds = prog.predicates();
    if let Some(q) = spec.queries.first() {
        return preds.iter().find(|p| *p.name == *q.name && p.arity == q.modes.len()).cloned();
    }
    for f in &spec.filters {
        if let Some(p) = preds.iter().find(|p| *p.name == *f.name && f.arity.is_none_or(|a| a == p.arity)) {
            return Some(p.clone());
        }
    }
    prog.clauses.first().map(|c| c.head.pred.clone())
}

fn random_term<R: Rng>(
    funs: &[Symbol],
    pi: &ArgumentFilter,
    depth: usize,
    ground: bool,
    gen: &mut VarGen,
    rng: &mut R,
) -> Term {
    if !ground && rng.random_bool(0.3) {
        return Term::Var(gen.fresh_named("Q"));
    }
    let consts: Vec<&Symbol> = funs.iter().filter(|f| f.arity == 0).collect();
    let pool: Vec<&Symbol> = if depth == 0 { consts } else { funs.iter().collect() };
    let f = pool[rng.random_range(0..pool.len())];
    let args = (1..=f.arity)
        .map(|i| {
            let keep = ground && pi.keeps(f, i).unwrap_or(true);
            random_term(funs, pi, depth - 1, keep, gen, rng)
        })
        .collect();
    Term::App(f.clone(), args)
}

/// A query `p(t1,..,tn)` from the class described by `pi` (a filter over
/// the program's function symbols and predicates): kept positions hold
/// terms whose kept parts are ground, built over the program's function
/// symbols up to depth `max_depth`; other positions may hold variables.
pub fn sample_query<R: Rng>(prog: &Program, pi: &ArgumentFilter, p: &Symbol, max_depth: usize, rng: &mut R) -> Atom {
    let funs: Vec<Symbol> = prog.signature_functions().into_iter().collect();
    let mut gen = VarGen::new(0);
    let args = (1..=p.arity)
        .map(|i| {
            let ground = pi.keeps(p, i).unwrap_or(true);
            let d = rng.random_range(0..=max_depth);
            random_term(&funs, pi, d, ground, &mut gen, rng)
        })
        .collect();
    Atom::new(p.clone(), args)
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct CheckReport {
    pub queries: usize,
    pub successes: usize,
    pub failures: usize,
    pub depth_exceeded: usize,
    pub budget_exceeded: usize,
    /// Successful derivations whose rewrite sequence was checked.
    pub simulated: usize,
    /// Rewrite sequences with an invalid step or too few steps.
    pub simulation_failures: usize,
    /// Queries that ran past the depth bound, printed.
    pub non_terminating: Vec<String>,
}

/// Samples queries from the class and runs them through SLD resolution;
/// for each success the induced rewrite sequence in `rp` is checked.
pub fn cross_check<R: Rng>(
    prog: &Program,
    spec: &QuerySpec,
    rp: &Trs,
    samples: usize,
    depth_bound: usize,
    rng: &mut R,
) -> crate::Result<CheckReport> {
    let pi = spec.initial_filter(prog)?;
    let mut rep = CheckReport::default();
    let Some(p) = entry_predicate(prog, spec) else {
        return Ok(rep);
    };
    for _ in 0..samples {
        let q = sample_query(prog, &pi, &p, 4, rng);
        rep.queries += 1;
        let tr = sld_derive(prog, std::slice::from_ref(&q), &SldOptions::exhaustive(depth_bound));
        match tr.outcome {
            Outcome::Success => rep.successes += 1,
            Outcome::Failure => rep.failures += 1,
            Outcome::DepthExceeded => {
                rep.depth_exceeded += 1;
                rep.non_terminating.push(q.to_string());
            }
            Outcome::BudgetExceeded => rep.budget_exceeded += 1,
        }
        if tr.outcome == Outcome::Success {
            let first = sld_derive(prog, std::slice::from_ref(&q), &SldOptions::first_success(depth_bound));
            if let Some(seq) = simulation_sequence(prog, &first) {
                rep.simulated += 1;
                let ok = seq.len() > first.steps.len() && seq.windows(2).all(|w| rewrite_step_valid(rp, &w[0], &w[1]));
                if !ok {
                    rep.simulation_failures += 1;
                }
            }
        }
    }
    Ok(rep)
}
