#![allow(dead_code)]

use std::collections::BTreeSet;
use std::time::Duration;

use proptest::prelude::*;
use proptest::test_runner::{Config as PtConfig, RngSeed, TestCaseError, TestRunner};

use lpterm::dp::processors::verify_reduction_pair;
use lpterm::filter::ArgumentFilter;
use lpterm::frontend::{parse_program, Program};
use lpterm::oracle::{rewrite_step_valid, simulation_sequence, sld_derive, Outcome, SldOptions};
use lpterm::prove::{prove, Config, ProofNode, Step};
use lpterm::refine::{
    check_variable_condition, heuristic_choose, refine_basic, refine_modesplit, unlabel, Heuristic, HeuristicKind,
};
use lpterm::term::{Atom, Position, Symbol, Term, Var};
use lpterm::transform::{extend_initial_filter, transform_new, Rule, Trs};
use lpterm::typing::infer_types;
use lpterm::unify::{is_variant, unify_finite, unify_rational};

pub const SEED: u64 = 0x1f2e_3d4c;

pub fn config(cases: u32) -> PtConfig {
    PtConfig { cases, rng_seed: RngSeed::Fixed(SEED), failure_persistence: None, ..PtConfig::default() }
}

pub const CASES: u32 = 1000;

/// Runs `check` on `CASES` generated inputs with the fixed seed. `check`
/// reports whether the case exercised the property; the count is returned.
pub fn run_property<S: Strategy>(strategy: S, check: impl Fn(S::Value) -> Result<bool, String>) -> Result<usize, String>
where
    S::Value: std::fmt::Debug,
{
    let exercised = std::cell::Cell::new(0usize);
    let mut runner = TestRunner::new(config(CASES));
    runner
        .run(&strategy, |v| {
            let hit = check(v).map_err(TestCaseError::fail)?;
            exercised.set(exercised.get() + usize::from(hit));
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    Ok(exercised.get())
}

pub fn always<T>(f: impl Fn(T) -> Result<(), String>) -> impl Fn(T) -> Result<bool, String> {
    move |v| f(v).map(|_| true)
}

pub fn corpus(name: &str) -> String {
    let path = format!("{}/../../corpus/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"))
}

// ---------------------------------------------------------------- terms

fn var(k: u32) -> Term {
    Term::Var(Var::new(k, ["X", "Y", "Z", "W"][k as usize]))
}

fn sym(name: &str, arity: usize) -> Symbol {
    Symbol::function(name, arity)
}

/// Terms over `a, b, s/1, c/2` and four variables.
pub fn term(depth: u32) -> impl Strategy<Value = Term> {
    let leaf =
        prop_oneof![(0u32..4).prop_map(var), Just(Term::constant(sym("a", 0))), Just(Term::constant(sym("b", 0))),];
    leaf.prop_recursive(depth, 24, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|t| Term::app(sym("s", 1), vec![t])),
            (inner.clone(), inner).prop_map(|(x, y)| Term::app(sym("c", 2), vec![x, y])),
        ]
    })
}

/// `unify_finite` and `unify_rational` agree: a finite unifier implies a
/// rational one with the same (acyclic) instance up to renaming, and a
/// rational unifier without a finite one has a cyclic instance.
pub fn unify_agreement((s, t): (Term, Term)) -> Result<(), String> {
    let fin = unify_finite(&s, &t);
    let rat = unify_rational(&s, &t);
    match (fin, rat) {
        (Some(sigma), Some(mu)) => {
            let fs = s.substitute(&sigma);
            if fs != t.substitute(&sigma) {
                return Err(format!("finite unifier does not unify {s} and {t}"));
            }
            let rs = mu.apply(&s);
            let Some(rs_term) = rs.to_term() else {
                return Err(format!("rational instance of {s} is cyclic though a finite unifier exists"));
            };
            if !is_variant(&fs, &rs_term) {
                return Err(format!("instances differ: {fs} vs {rs_term}"));
            }
            if mu.apply(&t).to_term().as_ref() != Some(&rs_term) {
                return Err("rational unifier does not unify".into());
            }
            Ok(())
        }
        (Some(_), None) => Err(format!("rational unification failed on unifiable {s}, {t}")),
        (None, Some(mu)) => {
            if mu.apply(&s).is_acyclic() {
                Err(format!("only rational unifier found for {s}, {t} but its instance is finite"))
            } else {
                Ok(())
            }
        }
        (None, None) => Ok(()),
    }
}

/// With a filter keeping every argument, filtered finiteness is acyclicity.
pub fn finite_under_full_filter((s, t): (Term, Term)) -> Result<(), String> {
    if let Some(mu) = unify_rational(&s, &t) {
        let g = mu.apply(&s);
        let mut syms = BTreeSet::new();
        s.symbols(&mut syms);
        t.symbols(&mut syms);
        let pi = ArgumentFilter::full(syms.iter());
        if g.is_finite_under_filter(&pi).map_err(|e| e.to_string())? != g.is_acyclic() {
            return Err(format!("finiteness under the full filter differs from acyclicity for {s}, {t}"));
        }
    }
    Ok(())
}

// ---------------------------------------------------------------- programs

fn prolog_term(depth: u32) -> BoxedStrategy<String> {
    let leaf = prop_oneof![
        3 => prop::sample::select(vec!["X", "Y", "Z", "W"]).prop_map(str::to_string),
        1 => prop::sample::select(vec!["a", "b", "[]"]).prop_map(str::to_string),
    ];
    leaf.prop_recursive(depth, 12, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|t| format!("s({t})")),
            (inner.clone(), inner).prop_map(|(x, y)| format!("[{x}|{y}]")),
        ]
    })
    .boxed()
}

const PREDS: [(&str, usize); 3] = [("p", 2), ("q", 1), ("r", 2)];

fn prolog_atom() -> impl Strategy<Value = String> {
    (0usize..3, prop::collection::vec(prolog_term(2), 2)).prop_map(|(k, args)| {
        let (name, n) = PREDS[k];
        format!("{name}({})", args[..n].join(", "))
    })
}

fn prolog_clause() -> impl Strategy<Value = String> {
    (prolog_atom(), prop::collection::vec(prolog_atom(), 0..=2)).prop_map(|(h, body)| {
        if body.is_empty() {
            format!("{h}.")
        } else {
            format!("{h} :- {}.", body.join(", "))
        }
    })
}

/// Definite programs with at most four clauses and two body atoms each.
pub fn program_source() -> impl Strategy<Value = String> {
    prop::collection::vec(prolog_clause(), 1..=4).prop_map(|cs| cs.join("\n"))
}

pub fn program(src: &str) -> Program {
    parse_program(src).unwrap_or_else(|e| panic!("generated program does not parse: {e}\n{src}"))
}

/// A program plus a random query filter `π(p) ⊆ {1..n}` per predicate.
pub fn program_with_filter() -> impl Strategy<Value = (String, Vec<Vec<bool>>)> {
    (program_source(), prop::collection::vec(prop::collection::vec(any::<bool>(), 2), 3))
}

fn initial_filter(prog: &Program, keep: &[Vec<bool>]) -> ArgumentFilter {
    let funs = prog.signature_functions();
    let preds = prog.predicates();
    let mut pi = ArgumentFilter::full(funs.iter().chain(preds.iter()));
    for p in &preds {
        let k = PREDS.iter().position(|(n, a)| *n == &*p.name && *a == p.arity).expect("known predicate");
        pi.set(p.clone(), (1..=p.arity).filter(|&i| keep[k][i - 1]));
    }
    pi
}

fn heuristic(kind: HeuristicKind, prog: &Program) -> Heuristic {
    let types = matches!(kind, HeuristicKind::Tb | HeuristicKind::Tb2).then(|| infer_types(prog));
    Heuristic::new(kind, types)
}

/// Every heuristic choice `(f, i)` at a position `pos` of a right-hand side
/// of `R_P` satisfies: some `pos'` with `pos'·i` a prefix of `pos` has root
/// `f`. At variable positions, `om2`, `tb` and `tb2` never cut the first
/// argument of a `u` symbol.
pub fn heuristic_prefix(src: String) -> Result<(), String> {
    let prog = program(&src);
    let rp = transform_new(&prog);
    for kind in HeuristicKind::ALL {
        let h = heuristic(kind, &prog);
        for r in &rp.rules {
            let var_pos: BTreeSet<Position> = r.rhs.var_positions().into_iter().map(|(p, _)| p).collect();
            for pos in r.rhs.positions() {
                if pos.is_root() {
                    continue;
                }
                let (f, i) = heuristic_choose(&h, &r.rhs, &pos).map_err(|e| e.to_string())?;
                let ok = (0..pos.0.len()).any(|k| {
                    pos.0[k] == i && r.rhs.at(&Position(pos.0[..k].to_vec())).and_then(|t| t.root()) == Some(&f)
                });
                if !ok {
                    return Err(format!("{kind}: ({f}, {i}) violates the prefix condition at {pos} of {r}"));
                }
                if kind.keeps_u_first_argument() && var_pos.contains(&pos) && f.is_u() && i == 1 {
                    return Err(format!("{kind}: cut the first argument of {f} at {pos} of {r}"));
                }
            }
        }
    }
    Ok(())
}

/// Refinement results satisfy the variable condition on `R` and `DP(R)`;
/// mode splitting only adds labelled copies of existing rules.
pub fn refinement_variable_condition((src, keep): (String, Vec<Vec<bool>>)) -> Result<(), String> {
    let prog = program(&src);
    let rp = transform_new(&prog);
    let pi0 = initial_filter(&prog, &keep);
    for kind in HeuristicKind::ALL {
        let h = heuristic(kind, &prog);
        let basic = refine_basic(&extend_initial_filter(&pi0, &rp.symbols()), &h, &rp).map_err(|e| e.to_string())?;
        if let Err(e) = check_variable_condition(&basic.trs, &basic.filter) {
            let (r, v) = *e;
            return Err(format!("{kind}, basic: {v} in {r}"));
        }
        let split = refine_modesplit(&pi0, &h, &rp).map_err(|e| e.to_string())?;
        if let Err(e) = check_variable_condition(&split.trs, &split.filter) {
            let (r, v) = *e;
            return Err(format!("{kind}, mode splitting: {v} in {r}"));
        }
        let back = unlabel(&split.trs);
        let orig: BTreeSet<String> = rp.rules.iter().map(|r| r.to_string()).collect();
        let got: BTreeSet<String> = back.rules.iter().map(|r| r.to_string()).collect();
        if orig != got {
            return Err(format!("{kind}: unlabelled rules differ from the transformation"));
        }
    }
    Ok(())
}

fn check_proof(n: &ProofNode) -> Result<(), String> {
    match &n.step {
        Step::ReductionPair { strict, interp } => {
            if !verify_reduction_pair(&n.problem, strict, interp) {
                return Err(format!("witness does not re-verify:\n{}\n{interp}", n.problem));
            }
            let rest = &n.children[0].problem;
            let expect: Vec<usize> = n.problem.ids.iter().copied().filter(|k| !strict.contains(k)).collect();
            if rest.ids != expect {
                return Err("reduction pair step did not remove exactly the strict pairs".into());
            }
        }
        Step::DependencyGraph { sccs } => {
            let mut seen = BTreeSet::new();
            for (c, child) in sccs.iter().zip(&n.children) {
                if child.problem.ids != *c || c.iter().any(|k| !n.problem.ids.contains(k) || !seen.insert(*k)) {
                    return Err("dependency graph components are not disjoint subsets".into());
                }
            }
        }
        Step::ArgumentFilter => {
            let child = &n.children[0].problem;
            let f = &n.problem.filter;
            let filt = |t: &Trs| -> Vec<Rule> {
                t.rules.iter().map(|r| Rule::new(f.apply(&r.lhs).unwrap(), f.apply(&r.rhs).unwrap())).collect()
            };
            if child.pairs.rules != filt(&n.problem.pairs) || child.rules.rules != filt(&n.problem.rules) {
                return Err("argument filter processor output differs from syntactic filtering".into());
            }
        }
        Step::Open(_) => {}
    }
    n.children.iter().try_for_each(check_proof)
}

pub fn quick_config(kind: HeuristicKind) -> Config {
    Config { heuristic: kind, timeout: Duration::from_secs(20), node_limit: 200_000, ..Config::default() }
}

/// Every processor step of a proof is locally checkable.
pub fn proof_steps_recheck((src, keep): (String, Vec<Vec<bool>>)) -> Result<(), String> {
    let prog = program(&src);
    let mut text = String::new();
    for (k, (name, n)) in PREDS.iter().enumerate() {
        let keep: Vec<String> = (1..=*n).filter(|&i| keep[k][i - 1]).map(|i| i.to_string()).collect();
        if prog.predicates().iter().any(|p| &*p.name == *name) {
            text.push_str(&format!("%filter: {name}=[{}]\n", keep.join(",")));
        }
    }
    let spec = lpterm::frontend::parse_query_spec(&text).map_err(|e| e.to_string())?;
    for kind in [HeuristicKind::Tb2, HeuristicKind::Im] {
        let a = prove(&prog, &spec, &quick_config(kind)).map_err(|e| e.to_string())?;
        check_proof(&a.proof)?;
    }
    Ok(())
}

fn ground_term(depth: u32) -> BoxedStrategy<String> {
    let leaf = prop::sample::select(vec!["a", "b", "[]"]).prop_map(str::to_string);
    leaf.prop_recursive(depth, 8, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|t| format!("s({t})")),
            (inner.clone(), inner).prop_map(|(x, y)| format!("[{x}|{y}]")),
        ]
    })
    .boxed()
}

pub fn program_with_query() -> impl Strategy<Value = (String, usize, Vec<String>)> {
    (program_source(), 0usize..3, prop::collection::vec(ground_term(2), 2))
}

/// A successful derivation of `n` steps for a ground query induces a valid
/// constructor rewrite sequence of at least `n` steps from `p_in(t)σ` to
/// `p_out(t)σ`. Returns whether the case was exercised.
pub fn simulation((src, k, args): (String, usize, Vec<String>)) -> Result<bool, String> {
    let prog = program(&src);
    let present: Vec<Symbol> = prog.predicates().into_iter().collect();
    let pred = present[k % present.len()].clone();
    let (name, n) = (pred.name.to_string(), pred.arity);
    let q = parse_program(&format!("{name}({}).", args[..n].join(", "))).map_err(|e| e.to_string())?;
    let mut q: Atom = q.clauses[0].head.clone();
    let mut tr = sld_derive(&prog, std::slice::from_ref(&q), &SldOptions::first_success(20));
    if tr.outcome != Outcome::Success {
        // Fall back to a ground instance of an answer to the most general query.
        let general = Atom::new(pred.clone(), (0..n as u32).map(var).collect());
        let gt = sld_derive(&prog, std::slice::from_ref(&general), &SldOptions::first_success(20));
        if gt.outcome != Outcome::Success {
            return Ok(false);
        }
        let Some(inst) = gt.instantiated_query() else {
            return Ok(false);
        };
        let mut ground = std::collections::BTreeMap::new();
        for v in inst[0].vars() {
            ground.insert(v, Term::constant(sym("a", 0)));
        }
        q = inst[0].substitute(&ground);
        tr = sld_derive(&prog, std::slice::from_ref(&q), &SldOptions::first_success(20));
        if tr.outcome != Outcome::Success {
            return Ok(false);
        }
    }
    let Some(seq) = simulation_sequence(&prog, &tr) else {
        return Ok(false);
    };
    let rp = transform_new(&prog);
    let inst = &tr.instantiated_query().expect("finite when the sequence is")[0];
    let start = Term::App(lpterm::transform::in_symbol(&pred), inst.args.clone());
    let end = Term::App(lpterm::transform::out_symbol(&pred), inst.args.clone());
    if seq.first() != Some(&start) || seq.last() != Some(&end) {
        return Err(format!("sequence does not connect {start} and {end}"));
    }
    if seq.len() - 1 < tr.steps.len() {
        return Err(format!("{} rewrite steps for {} resolution steps", seq.len() - 1, tr.steps.len()));
    }
    for w in seq.windows(2) {
        if !rewrite_step_valid(&rp, &w[0], &w[1]) {
            return Err(format!("invalid step {} -> {}\n{src}", w[0], w[1]));
        }
    }
    Ok(true)
}
