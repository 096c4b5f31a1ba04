use std::collections::BTreeSet;

use crate::filter::ArgumentFilter;
use crate::term::{Position, Symbol, Term, VarGen};
use crate::transform::{Rule, Trs};

/// A dependency pair together with the rule and rhs position it came from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SourcedPair {
    pub pair: Rule,
    pub rule: usize,
    pub pos: Position,
}

fn mark_root(t: &Term) -> Term {
    match t {
        Term::App(f, args) => Term::App(f.mark(), args.clone()),
        Term::Var(_) => t.clone(),
    }
}

fn postorder(t: &Term, path: &mut Vec<usize>, out: &mut Vec<(Position, Term)>) {
    if let Term::App(_, args) = t {
        for (k, a) in args.iter().enumerate() {
            path.push(k + 1);
            postorder(a, path, out);
            path.pop();
        }
    }
    out.push((Position(path.clone()), t.clone()));
}

/// Dependency pairs with provenance. Subterms of a right-hand side are
/// visited innermost first.
pub fn dependency_pairs_sourced(r: &Trs) -> Vec<SourcedPair> {
    let defined = r.defined();
    let mut out: Vec<SourcedPair> = Vec::new();
    for (k, rule) in r.rules.iter().enumerate() {
        let mut subs = Vec::new();
        postorder(&rule.rhs, &mut Vec::new(), &mut subs);
        for (pos, t) in subs {
            if t.root().is_some_and(|f| defined.contains(f)) {
                let pair = Rule::new(mark_root(&rule.lhs), mark_root(&t));
                if !out.iter().any(|p| p.pair == pair) {
                    out.push(SourcedPair { pair, rule: k, pos });
                }
            }
        }
    }
    out
}

pub fn dependency_pairs(r: &Trs) -> Trs {
    Trs::new(dependency_pairs_sourced(r).into_iter().map(|p| p.pair).collect())
}

/// Replaces every subterm with a defined root by a distinct fresh variable.
pub fn cap(t: &Term, defined: &BTreeSet<Symbol>, gen: &mut VarGen) -> Term {
    match t {
        Term::Var(_) => t.clone(),
        Term::App(f, _) if defined.contains(f) => Term::Var(gen.fresh()),
        Term::App(f, args) => Term::App(f.clone(), args.iter().map(|a| cap(a, defined, gen)).collect()),
    }
}

/// Adds `π(F) = π(f)` for tuple symbols of `pairs` that `pi` does not map.
pub fn mirror_tuple_filters(pi: &mut ArgumentFilter, pairs: &Trs) {
    for s in pairs.symbols() {
        if s.is_tuple() && !pi.contains(&s) {
            match pi.get(&s.unmark()) {
                Ok(k) => {
                    let k = k.to_vec();
                    pi.set(s, k)
                }
                Err(_) => pi.set_full(&s),
            }
        }
    }
}

/// Overwrites every tuple symbol's filter with its lower-case original's.
pub fn force_tuple_mirrors(pi: &mut ArgumentFilter, pairs: &Trs) {
    for s in pairs.symbols() {
        if s.is_tuple() {
            let k = pi.get(&s.unmark()).map(|k| k.to_vec()).unwrap_or_else(|_| (1..=s.arity).collect());
            pi.set(s, k);
        }
    }
}
