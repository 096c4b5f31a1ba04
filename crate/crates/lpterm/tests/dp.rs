mod common;

use std::collections::BTreeSet;

use lpterm::dp::graph::{estimated_dependency_graph, has_arc};
use lpterm::dp::pairs::{cap, dependency_pairs};
use lpterm::dp::processors::{
    argument_filter_processor, dependency_graph_processor, reduction_pair_processor, verify_reduction_pair, DpProblem,
    ReductionPairOutcome, SearchLimits,
};
use lpterm::filter::ArgumentFilter;
use lpterm::frontend::parse_program;
use lpterm::term::{Symbol, Term, Var, VarGen};
use lpterm::transform::{transform_new, Rule, Trs};

const EX12: &str = "p(X,X).\np(f(X),g(Y)) :- p(f(X),f(Z)), p(Z,g(Y)).";

fn ex12_trs() -> Trs {
    transform_new(&parse_program(EX12).unwrap())
}

/// Full filter on `R` and `DP(R)` with the listed overrides, symbols given
/// by their printed name.
fn filter(r: &Trs, d: &Trs, entries: &[(&str, &[usize])]) -> ArgumentFilter {
    let syms: BTreeSet<Symbol> = r.symbols().into_iter().chain(d.symbols()).collect();
    let mut pi = ArgumentFilter::full(syms.iter());
    for (name, keep) in entries {
        let s = syms.iter().find(|s| s.to_string() == *name).unwrap_or_else(|| panic!("{name}"));
        pi.set(s.clone(), keep.iter().copied());
    }
    pi
}

/// The refined filter used for the example's termination proof.
fn proof_filter(r: &Trs, d: &Trs) -> ArgumentFilter {
    filter(
        r,
        d,
        &[
            ("p_in", &[1]),
            ("P_in", &[1]),
            ("u_2_1", &[1, 2]),
            ("U_2_1", &[1, 2]),
            ("u_2_2", &[1, 2, 4]),
            ("U_2_2", &[1, 2, 4]),
            ("g", &[]),
        ],
    )
}

fn limits(max_coeff: u8) -> SearchLimits {
    SearchLimits { max_coeff, node_limit: 1_000_000, deadline: None }
}

#[test]
fn four_dependency_pairs() {
    let d = dependency_pairs(&ex12_trs());
    let shown: Vec<String> = d.rules.iter().map(|r| r.to_string()).collect();
    assert_eq!(
        shown,
        vec![
            "P_in(f(X), g(Y)) -> P_in(f(X), f(Z))",
            "P_in(f(X), g(Y)) -> U_2_1(p_in(f(X), f(Z)), X, Y)",
            "U_2_1(p_out(f(X), f(Z)), X, Y) -> P_in(Z, g(Y))",
            "U_2_1(p_out(f(X), f(Z)), X, Y) -> U_2_2(p_in(Z, g(Y)), X, Y, Z)",
        ]
    );
}

#[test]
fn no_pairs_without_defined_rhs_symbols() {
    let a = Symbol::function("a", 0);
    let b = Symbol::function("b", 0);
    let f = Symbol::function("f", 1);
    let r = Trs::new(vec![Rule::new(Term::app(f, vec![Term::constant(a)]), Term::constant(b))]);
    assert!(dependency_pairs(&r).is_empty());
}

#[test]
fn safeinv_pairs() {
    let src = "nat(0). nat(s(X)) :- nat(X). inv(neg(X),pos(X)). inv(pos(X),neg(X)).
               safeinv(X,neg(Y)) :- inv(X,neg(Y)), nat(Y). safeinv(X,pos(Y)) :- inv(X,pos(Y)), nat(Y).";
    let d = dependency_pairs(&transform_new(&parse_program(src).unwrap()));
    assert!(d.rules.iter().any(|r| r.to_string() == "SAFEINV_in(X, neg(Y)) -> INV_in(X, neg(Y))"));
}

#[test]
fn cap_examples() {
    let r = ex12_trs();
    let d = dependency_pairs(&r);
    let defined = r.defined();
    let mut gen = VarGen::new(100);
    let c = cap(&d.rules[1].rhs, &defined, &mut gen);
    let Term::App(_, args) = &c else { panic!() };
    assert!(args[0].as_var().is_some());
    assert_eq!(args[1].to_string(), "X");
    let c4 = cap(&d.rules[3].rhs, &defined, &mut gen);
    let Term::App(_, args4) = &c4 else { panic!() };
    assert!(args4[0].as_var().is_some());
    assert_ne!(args4[0], args[0]);
    let unchanged = cap(&d.rules[0].lhs, &defined, &mut gen);
    assert_eq!(unchanged, d.rules[0].lhs);
}

#[test]
fn estimated_graph_arcs() {
    let r = ex12_trs();
    let d = dependency_pairs(&r);
    let pi = proof_filter(&r, &d);
    let adj = estimated_dependency_graph(&d.rules, &r.defined(), &pi, false).unwrap();
    let arcs: BTreeSet<(usize, usize)> =
        adj.iter().enumerate().flat_map(|(i, s)| s.iter().map(move |&j| (i + 1, j + 1))).collect();
    assert_eq!(arcs, BTreeSet::from([(3, 1), (3, 2), (2, 3), (2, 4)]));
    assert!(!has_arc(&d.rules[0], &d.rules[0], &r.defined(), &pi, false).unwrap());
}

#[test]
fn self_loop_over_empty_rules() {
    let f = Symbol::function("f", 1).mark();
    let x = Term::Var(Var::new(0, "X"));
    let pair = Rule::new(Term::app(f.clone(), vec![x.clone()]), Term::app(f.clone(), vec![x]));
    let pi = ArgumentFilter::full([&f]);
    assert!(has_arc(&pair, &pair, &BTreeSet::new(), &pi, false).unwrap());
}

#[test]
fn graph_processor_and_reduction_pair() {
    let r = ex12_trs();
    let d = dependency_pairs(&r);
    let pi = proof_filter(&r, &d);
    let prob = DpProblem::new(d, r, pi, false);
    let (sccs, subs) = dependency_graph_processor(&prob).unwrap();
    assert_eq!(sccs, vec![vec![2, 3]]);
    let ReductionPairOutcome::Removed { strict, interp, rest } =
        reduction_pair_processor(&subs[0], &limits(1)).unwrap()
    else {
        panic!("expected an order")
    };
    assert!(strict.contains(&3));
    assert!(verify_reduction_pair(&subs[0], &strict, &interp));
    let (sccs, _) = dependency_graph_processor(&rest).unwrap();
    assert!(sccs.is_empty());
}

#[test]
fn hand_written_interpretation_verifies() {
    let r = ex12_trs();
    let d = dependency_pairs(&r);
    let pi = proof_filter(&r, &d);
    let prob = DpProblem::new(d, r, pi, false);
    let (_, subs) = dependency_graph_processor(&prob).unwrap();
    let sub = &subs[0];
    let mut interp = lpterm::dp::poly::PolyInterp::default();
    for (s, keep) in sub.filter.iter() {
        let name = s.to_string();
        let c: Vec<u64> = match name.as_str() {
            "f" => vec![1, 1],
            "g" => vec![0],
            "p_out" => vec![0, 0, 1],
            "P_in" | "p_in" | "U_2_1" | "u_2_1" | "u_2_2" | "U_2_2" => {
                let mut v = vec![0; keep.len() + 1];
                v[1] = 1;
                v
            }
            _ => vec![0; keep.len() + 1],
        };
        interp.coeffs.insert(s.clone(), c);
    }
    assert!(verify_reduction_pair(sub, &[3], &interp));
    assert!(!verify_reduction_pair(sub, &[2, 3], &interp));
}

#[test]
fn empty_problem() {
    let prob = DpProblem::new(Trs::default(), ex12_trs(), ArgumentFilter::new(), false);
    let (sccs, subs) = dependency_graph_processor(&prob).unwrap();
    assert!(sccs.is_empty() && subs.is_empty());
}

#[test]
fn argument_filter_processor_filters_syntactically() {
    let r = ex12_trs();
    let d = dependency_pairs(&r);
    let pi = proof_filter(&r, &d);
    let out = argument_filter_processor(&DpProblem::new(d, r, pi, false)).unwrap();
    assert!(out.filter.is_identity());
    assert_eq!(out.pairs.rules[1].to_string(), "P_in(f(X)) -> U_2_1(p_in(f(X)), X)");
    let ident = argument_filter_processor(&out).unwrap();
    assert_eq!(ident.pairs, out.pairs);
    assert_eq!(ident.rules, out.rules);
}

#[test]
fn polynomial_degree_five_needed() {
    let src = common::corpus("fg.pl");
    let prog = parse_program(&src).unwrap();
    let spec = lpterm::frontend::parse_query_spec(&src).unwrap();
    let cfg = lpterm::prove::Config { max_coeff: 1, ..Default::default() };
    let prepared = lpterm::prove::prepare(&prog, &spec, &cfg).unwrap();
    let (_, subs) = dependency_graph_processor(&prepared.problem).unwrap();
    assert_eq!(subs.len(), 1);
    assert!(matches!(reduction_pair_processor(&subs[0], &limits(1)).unwrap(), ReductionPairOutcome::NoOrder));
    let ReductionPairOutcome::Removed { strict, interp, .. } = reduction_pair_processor(&subs[0], &limits(5)).unwrap()
    else {
        panic!("expected an order with coefficients up to 5")
    };
    assert!(verify_reduction_pair(&subs[0], &strict, &interp));
}
