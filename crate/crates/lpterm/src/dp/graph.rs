use std::collections::BTreeSet;

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;

use crate::dp::pairs::cap;
use crate::error::Result;
use crate::filter::ArgumentFilter;
use crate::term::{rename_apart, Symbol, Term, VarGen};
use crate::transform::Rule;
use crate::unify::unify_rational;

fn ren(t: &Term, gen: &mut VarGen) -> Term {
    match t {
        Term::Var(_) => Term::Var(gen.fresh()),
        Term::App(f, args) => Term::App(f.clone(), args.iter().map(|a| ren(a, gen)).collect()),
    }
}

/// Whether the pair `from` can be followed by `to`: `CAP(t)` and a variant
/// of `to`'s lhs unify, and the instance is finite under `pi`. With
/// `rename` set, variables of `CAP(t)` are also made linear, as needed for
/// ordinary (non-constructor) rewriting.
pub fn has_arc(from: &Rule, to: &Rule, defined: &BTreeSet<Symbol>, pi: &ArgumentFilter, rename: bool) -> Result<bool> {
    let mut gen = VarGen::above([&from.lhs, &from.rhs, &to.lhs, &to.rhs]);
    let mut capped = cap(&from.rhs, defined, &mut gen);
    if rename {
        capped = ren(&capped, &mut gen);
    }
    let u = rename_apart(&[&to.lhs], &mut gen).pop().expect("one term");
    match unify_rational(&capped, &u) {
        None => Ok(false),
        Some(mu) => mu.apply(&u).is_finite_under_filter(pi),
    }
}

/// Adjacency lists of the estimated dependency graph.
pub fn estimated_dependency_graph(
    pairs: &[Rule],
    defined: &BTreeSet<Symbol>,
    pi: &ArgumentFilter,
    rename: bool,
) -> Result<Vec<Vec<usize>>> {
    let mut adj = vec![Vec::new(); pairs.len()];
    for (i, p) in pairs.iter().enumerate() {
        for (j, q) in pairs.iter().enumerate() {
            if has_arc(p, q, defined, pi, rename)? {
                adj[i].push(j);
            }
        }
    }
    Ok(adj)
}

/// Nontrivial strongly connected components: more than one node, or a
/// single node with a self-arc. Sorted by smallest member.
pub fn nontrivial_sccs(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut g: DiGraph<(), ()> = DiGraph::new();
    let nodes: Vec<_> = (0..adj.len()).map(|_| g.add_node(())).collect();
    for (i, succ) in adj.iter().enumerate() {
        for &j in succ {
            g.add_edge(nodes[i], nodes[j], ());
        }
    }
    let mut out: Vec<Vec<usize>> = tarjan_scc(&g)
        .into_iter()
        .map(|c| {
            let mut v: Vec<usize> = c.into_iter().map(|n| n.index()).collect();
            v.sort_unstable();
            v
        })
        .filter(|c| c.len() > 1 || adj[c[0]].contains(&c[0]))
        .collect();
    out.sort();
    out
}
