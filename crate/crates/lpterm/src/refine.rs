//! Argument filter refinement: heuristics, the basic refinement loop and
//! refinement with labelled mode-splitting copies.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::dp::pairs::{dependency_pairs_sourced, force_tuple_mirrors, mirror_tuple_filters};
use crate::error::{Error, Result};
use crate::filter::ArgumentFilter;
use crate::term::{Label, Position, Symbol, SymbolKind, Term, Var};
use crate::transform::{Rule, Trs};
use crate::typing::TypeAssignment;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum HeuristicKind {
    /// innermost
    Im,
    /// outermost
    Om,
    /// outermost, never cutting the first argument of `u` symbols
    Om2,
    /// type-based, skipping reflexive positions of function symbols
    Tb,
    /// type-based, skipping unbounded positions of function symbols
    Tb2,
}

impl HeuristicKind {
    pub const ALL: [HeuristicKind; 5] =
        [HeuristicKind::Im, HeuristicKind::Om, HeuristicKind::Om2, HeuristicKind::Tb, HeuristicKind::Tb2];

    /// Whether tuple symbols may be left to mirror their lower-case
    /// originals after refining `R` alone.
    pub fn keeps_u_first_argument(self) -> bool {
        !matches!(self, HeuristicKind::Im | HeuristicKind::Om)
    }
}

impl fmt::Display for HeuristicKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            HeuristicKind::Im => "im",
            HeuristicKind::Om => "om",
            HeuristicKind::Om2 => "om2",
            HeuristicKind::Tb => "tb",
            HeuristicKind::Tb2 => "tb2",
        };
        write!(f, "{s}")
    }
}

impl FromStr for HeuristicKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "im" => Ok(HeuristicKind::Im),
            "om" => Ok(HeuristicKind::Om),
            "om2" | "om'" => Ok(HeuristicKind::Om2),
            "tb" => Ok(HeuristicKind::Tb),
            "tb2" | "tb'" => Ok(HeuristicKind::Tb2),
            _ => Err(format!("unknown heuristic '{s}' (expected im, om, om2, tb or tb2)")),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Heuristic {
    pub kind: HeuristicKind,
    pub types: Option<TypeAssignment>,
}

impl Heuristic {
    pub fn new(kind: HeuristicKind, types: Option<TypeAssignment>) -> Heuristic {
        assert!(
            types.is_some() || !matches!(kind, HeuristicKind::Tb | HeuristicKind::Tb2),
            "type-based heuristics need a type assignment"
        );
        Heuristic { kind, types }
    }

    fn skips(&self, f: &Symbol, i: usize) -> bool {
        if !f.is_program_function() {
            return false;
        }
        let ta = self.types.as_ref().expect("checked in constructor");
        match self.kind {
            HeuristicKind::Tb => ta.reflexive(f).contains(&i),
            HeuristicKind::Tb2 => ta.unbounded(f).contains(&i),
            _ => false,
        }
    }
}

/// Picks `(f, i)` such that `pos'·i` is a prefix of `pos` and
/// `root(t|pos') = f`.
pub fn heuristic_choose(h: &Heuristic, t: &Term, pos: &Position) -> Result<(Symbol, usize)> {
    if pos.is_root() {
        return Err(Error::NoChoice);
    }
    let root_of = |p: &Position| -> Result<Symbol> { t.at(p).and_then(|s| s.root().cloned()).ok_or(Error::NoChoice) };
    match h.kind {
        HeuristicKind::Im => {
            let (p, i) = pos.split_last().expect("non-root");
            Ok((root_of(&p)?, i))
        }
        HeuristicKind::Om => Ok((root_of(&Position::root())?, pos.0[0])),
        HeuristicKind::Om2 => {
            let mut k = 0;
            loop {
                let here = Position(pos.0[..k].to_vec());
                let f = root_of(&here)?;
                let i = pos.0[k];
                if i == 1 && f.is_u() && k + 1 < pos.0.len() {
                    k += 1;
                    continue;
                }
                return Ok((f, i));
            }
        }
        HeuristicKind::Tb | HeuristicKind::Tb2 => {
            let (mut p, mut i) = pos.split_last().expect("non-root");
            loop {
                let f = root_of(&p)?;
                if h.skips(&f, i) && !p.is_root() {
                    let (q, j) = p.split_last().expect("non-root");
                    p = q;
                    i = j;
                    continue;
                }
                return Ok((f, i));
            }
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Decision {
    pub rule: String,
    pub position: String,
    pub variable: String,
    pub symbol: String,
    pub index: usize,
    /// Set when the choice introduced or reused a labelled copy.
    pub relabelled_to: Option<String>,
}

#[derive(Clone, Debug)]
pub struct RefinementResult {
    pub filter: ArgumentFilter,
    pub trs: Trs,
    pub trace: Vec<Decision>,
}

struct Violation {
    /// Index into the rules, or into the pairs when `in_pair` is set.
    index: usize,
    in_pair: bool,
    pos: Position,
    var: Var,
}

fn first_violation(rule: &Rule, pi: &ArgumentFilter) -> Result<Option<(Position, Var)>> {
    let lhs_vars: BTreeSet<Var> = pi.apply(&rule.lhs)?.var_set();
    for (pos, v) in rule.rhs.var_positions() {
        if !lhs_vars.contains(&v) && pi.is_kept_position(&rule.rhs, &pos.0)? {
            return Ok(Some((pos, v)));
        }
    }
    Ok(None)
}

fn find_violation(rules: &[Rule], pairs: Option<&[Rule]>, pi: &ArgumentFilter) -> Result<Option<Violation>> {
    for (k, r) in rules.iter().enumerate() {
        if let Some((pos, var)) = first_violation(r, pi)? {
            return Ok(Some(Violation { index: k, in_pair: false, pos, var }));
        }
    }
    if let Some(pairs) = pairs {
        for (k, r) in pairs.iter().enumerate() {
            if let Some((pos, var)) = first_violation(r, pi)? {
                return Ok(Some(Violation { index: k, in_pair: true, pos, var }));
            }
        }
    }
    Ok(None)
}

/// Checks `V(π(r)) ⊆ V(π(ℓ))` on `R` and `DP(R)`. Tuple symbols missing
/// from `π` are read with their lower-case original's filter.
pub fn check_variable_condition(r: &Trs, pi: &ArgumentFilter) -> std::result::Result<(), Box<(Rule, Var)>> {
    let pairs = crate::dp::pairs::dependency_pairs(r);
    let mut pi = pi.clone();
    mirror_tuple_filters(&mut pi, &pairs);
    for rule in r.rules.iter().chain(pairs.rules.iter()) {
        match first_violation(rule, &pi) {
            Ok(None) => {}
            Ok(Some((_, v))) => return Err(Box::new((rule.clone(), v))),
            Err(_) => {
                let v = rule.rhs.vars().into_iter().next().unwrap_or(crate::term::Var::fresh(0));
                return Err(Box::new((rule.clone(), v)));
            }
        }
    }
    Ok(())
}

fn ensure_all(pi: &mut ArgumentFilter, trs: &Trs) {
    for s in trs.symbols() {
        if !pi.contains(&s) {
            match (&s.kind, &s.label) {
                (SymbolKind::In, Some(l)) => pi.set(s.clone(), l.indices().iter().copied()),
                _ => pi.set_full(&s),
            }
        }
    }
}

/// Refines `pi0` until the variable condition holds.
pub fn refine_basic(pi0: &ArgumentFilter, h: &Heuristic, r: &Trs) -> Result<RefinementResult> {
    let scan_pairs = !h.kind.keeps_u_first_argument();
    let sourced = dependency_pairs_sourced(r);
    let pairs = Trs::new(sourced.iter().map(|p| p.pair.clone()).collect());
    let mut pi = pi0.clone();
    ensure_all(&mut pi, r);
    mirror_tuple_filters(&mut pi, &pairs);
    let mut trace = Vec::new();
    loop {
        let v = find_violation(&r.rules, scan_pairs.then_some(pairs.rules.as_slice()), &pi)?;
        let Some(v) = v else { break };
        let rule = if v.in_pair { &pairs.rules[v.index] } else { &r.rules[v.index] };
        let (f, i) = heuristic_choose(h, &rule.rhs, &v.pos)?;
        let removed = pi.remove(&f, i);
        debug_assert!(removed, "heuristic must pick a kept argument");
        if !removed {
            return Err(Error::NoChoice);
        }
        trace.push(Decision {
            rule: rule.to_string(),
            position: v.pos.to_string(),
            variable: v.var.name.to_string(),
            symbol: f.to_string(),
            index: i,
            relabelled_to: None,
        });
    }
    if !scan_pairs {
        force_tuple_mirrors(&mut pi, &pairs);
    }
    Ok(RefinementResult { filter: pi, trs: r.clone(), trace })
}

/// Rules of the block of `p_in`: those rooted by `p_in` followed through
/// the chain of `u` symbols they lead to.
fn block(trs: &Trs, start: &Symbol) -> Vec<usize> {
    let mut out = Vec::new();
    let mut frontier: Vec<Symbol> = vec![start.clone()];
    let mut seen: BTreeSet<Symbol> = BTreeSet::new();
    while let Some(s) = frontier.pop() {
        if !seen.insert(s.clone()) {
            continue;
        }
        for (k, r) in trs.rules.iter().enumerate() {
            if r.lhs.root() == Some(&s) && !out.contains(&k) {
                out.push(k);
                if let Some(g) = r.rhs.root() {
                    if g.kind == SymbolKind::U {
                        frontier.push(g.clone());
                    }
                }
            }
        }
    }
    out.sort_unstable();
    out
}

fn label_root(t: &Term, l: &Label) -> Term {
    match t {
        Term::App(f, args) => Term::App(f.with_label(Some(l.clone())), args.clone()),
        Term::Var(_) => t.clone(),
    }
}

struct Splitter<'a> {
    pristine: &'a Trs,
    rules: Vec<Rule>,
    introduced: BTreeSet<Symbol>,
}

impl Splitter<'_> {
    /// Introduces `p_in^J` (for unlabelled `p_in`) with its copied block.
    fn introduce(&mut self, p_in: &Symbol, j: &Label, pi: &mut ArgumentFilter) -> Symbol {
        let labelled = p_in.with_label(Some(j.clone()));
        if self.introduced.insert(labelled.clone()) {
            for k in block(self.pristine, p_in) {
                let r = &self.pristine.rules[k];
                self.rules.push(Rule::new(label_root(&r.lhs, j), label_root(&r.rhs, j)));
            }
            pi.set(labelled.clone(), j.indices().iter().copied());
            ensure_all(pi, &Trs::new(self.rules.clone()));
        }
        labelled
    }

    /// Replaces `p_in^I` at `at` in the rhs of rule `k` by `p_in^J` and
    /// relabels the matching `p_out` in the follower rule.
    fn relabel(&mut self, k: usize, at: &Position, new_in: &Symbol) {
        let rhs = &self.rules[k].rhs;
        let old = rhs.at(at).expect("valid position").clone();
        let replaced = rhs.replace_at(at, old.with_root(new_in.clone())).expect("valid position");
        self.rules[k].rhs = replaced;
        if at.0 != [1] {
            return;
        }
        let Some(u) = self.rules[k].rhs.root().cloned() else {
            return;
        };
        let old_in = old.root().expect("function-rooted").clone();
        let old_out = Symbol { kind: SymbolKind::Out, ..old_in };
        let new_out = Symbol { kind: SymbolKind::Out, ..new_in.clone() };
        for r in self.rules.iter_mut() {
            if r.lhs.root() == Some(&u) {
                if let Some(first) = r.lhs.args().first() {
                    if first.root() == Some(&old_out) {
                        let nf = first.with_root(new_out.clone());
                        r.lhs = r.lhs.replace_at(&Position(vec![1]), nf).expect("valid position");
                    }
                }
            }
        }
    }
}

/// Refinement with labelled copies of predicate blocks. `pi0` is the
/// query-class filter over the program's function symbols and predicates.
pub fn refine_modesplit(pi0: &ArgumentFilter, h: &Heuristic, rp: &Trs) -> Result<RefinementResult> {
    let scan_pairs = !h.kind.keeps_u_first_argument();
    let mut sp = Splitter { pristine: rp, rules: rp.rules.clone(), introduced: BTreeSet::new() };
    let mut pi = ArgumentFilter::new();
    for (s, keep) in pi0.iter() {
        if s.kind == SymbolKind::Function {
            pi.set(s.clone(), keep.iter().copied());
        }
    }
    ensure_all(&mut pi, rp);
    // Step 1: copies for predicates whose query filter is not full.
    for (s, keep) in pi0.iter() {
        if s.kind == SymbolKind::Predicate && keep.len() < s.arity {
            let p_in = crate::transform::in_symbol(s);
            sp.introduce(&p_in, &Label::new(keep.iter().copied()), &mut pi);
        }
    }
    let mut trace = Vec::new();
    loop {
        let trs = Trs::new(sp.rules.clone());
        let sourced = if scan_pairs { dependency_pairs_sourced(&trs) } else { Vec::new() };
        let pair_rules: Vec<Rule> = sourced.iter().map(|p| p.pair.clone()).collect();
        if scan_pairs {
            mirror_tuple_filters(&mut pi, &Trs::new(pair_rules.clone()));
        }
        let v = find_violation(&sp.rules, scan_pairs.then_some(pair_rules.as_slice()), &pi)?;
        let Some(v) = v else { break };
        let rule = if v.in_pair { pair_rules[v.index].clone() } else { sp.rules[v.index].clone() };
        let (f, i) = heuristic_choose(h, &rule.rhs, &v.pos)?;
        let mut decision = Decision {
            rule: rule.to_string(),
            position: v.pos.to_string(),
            variable: v.var.name.to_string(),
            symbol: f.to_string(),
            index: i,
            relabelled_to: None,
        };
        if f.kind == SymbolKind::In {
            // Position of the chosen symbol inside the offending rhs.
            let mut at = v.pos.clone();
            while !at.0.is_empty() && rule.rhs.at(&at).and_then(|t| t.root()) != Some(&f) {
                at.0.pop();
            }
            let (k, at) = if v.in_pair {
                let src = &sourced[v.index];
                let mut full = src.pos.0.clone();
                full.extend(at.0.iter().copied());
                (src.rule, Position(full))
            } else {
                (v.index, at)
            };
            let j = f.effective_label().without(i);
            let new_in = sp.introduce(&f.unlabelled(), &j, &mut pi);
            sp.relabel(k, &at, &new_in);
            ensure_all(&mut pi, &Trs::new(sp.rules.clone()));
            decision.relabelled_to = Some(new_in.to_string());
        } else if !pi.remove(&f, i) {
            return Err(Error::NoChoice);
        }
        trace.push(decision);
    }
    let trs = Trs::new(sp.rules);
    let pairs = crate::dp::pairs::dependency_pairs(&trs);
    if scan_pairs {
        mirror_tuple_filters(&mut pi, &pairs);
    } else {
        force_tuple_mirrors(&mut pi, &pairs);
    }
    ensure_all(&mut pi, &trs);
    Ok(RefinementResult { filter: pi, trs, trace })
}

/// Erases labels and removes duplicate rules, keeping first occurrences.
pub fn unlabel(trs: &Trs) -> Trs {
    let mut out = Trs::default();
    for r in &trs.rules {
        out.push_unique(r.map_symbols(&mut |s| s.unlabelled()));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse_program;
    use crate::term::Var;
    use crate::transform::{extend_initial_filter, transform_new};
    use crate::typing::infer_types;

    fn v(id: u32, n: &str) -> Term {
        Term::Var(Var::new(id, n))
    }

    fn sample() -> Term {
        let f = Symbol::function("f", 1);
        let p_in = Symbol::new("p", 2, SymbolKind::In);
        let u1 = Symbol::new("u1", 3, SymbolKind::U);
        Term::app(
            u1,
            vec![
                Term::app(p_in, vec![Term::app(f.clone(), vec![v(0, "X")]), Term::app(f, vec![v(2, "Z")])]),
                v(0, "X"),
                v(1, "Y"),
            ],
        )
    }

    #[test]
    fn heuristics_on_example_term() {
        let p = parse_program("p(X,X).\np(f(X),g(Y)) :- p(f(X),f(Z)), p(Z,g(W)).").unwrap();
        let ta = infer_types(&p);
        let t = sample();
        let pos = Position(vec![1, 2, 1]);
        let pick = |k| {
            let (s, i) = heuristic_choose(&Heuristic::new(k, Some(ta.clone())), &t, &pos).unwrap();
            format!("{s}/{i}")
        };
        assert_eq!(pick(HeuristicKind::Im), "f/1");
        assert_eq!(pick(HeuristicKind::Om), "u1/1");
        assert_eq!(pick(HeuristicKind::Om2), "p_in/2");
        assert_eq!(pick(HeuristicKind::Tb), "p_in/2");
        let p_out = Symbol::new("p", 2, SymbolKind::Out);
        let t2 = Term::app(
            p_out,
            vec![
                Term::app(Symbol::function("f", 1), vec![v(0, "X")]),
                Term::app(Symbol::function("g", 1), vec![v(1, "Y")]),
            ],
        );
        let (s, i) =
            heuristic_choose(&Heuristic::new(HeuristicKind::Tb, Some(ta)), &t2, &Position(vec![2, 1])).unwrap();
        assert_eq!(format!("{s}/{i}"), "g/1");
    }

    fn ex12() -> (crate::frontend::Program, Trs) {
        let p = parse_program("p(X,X).\np(f(X),g(Y)) :- p(f(X),f(Z)), p(Z,g(Y)).").unwrap();
        let r = transform_new(&p);
        (p, r)
    }

    fn filter_of(pi: &ArgumentFilter, shown: &str) -> Vec<usize> {
        pi.iter().find(|(s, _)| s.to_string() == shown).map(|(_, k)| k.to_vec()).unwrap_or_else(|| panic!("{shown}"))
    }

    #[test]
    fn basic_refinement_om2() {
        let (p, r) = ex12();
        let pi0 = extend_initial_filter(
            &ArgumentFilter::full(p.signature_functions().iter().chain(p.predicates().iter())),
            &r.symbols(),
        );
        let res = refine_basic(&pi0, &Heuristic::new(HeuristicKind::Om2, None), &r).unwrap();
        assert_eq!(filter_of(&res.filter, "p_in"), vec![1]);
        assert_eq!(filter_of(&res.filter, "u_2_1"), vec![1, 2]);
        assert_eq!(filter_of(&res.filter, "u_2_2"), vec![1, 2, 4]);
        assert_eq!(filter_of(&res.filter, "P_in"), vec![1]);
        assert!(check_variable_condition(&r, &res.filter).is_ok());
    }

    #[test]
    fn basic_refinement_im() {
        let (p, r) = ex12();
        let pi0 = extend_initial_filter(
            &ArgumentFilter::full(p.signature_functions().iter().chain(p.predicates().iter())),
            &r.symbols(),
        );
        let res = refine_basic(&pi0, &Heuristic::new(HeuristicKind::Im, None), &r).unwrap();
        assert_eq!(filter_of(&res.filter, "f"), Vec::<usize>::new());
        assert_eq!(filter_of(&res.filter, "P_in"), vec![2]);
        assert_eq!(filter_of(&res.filter, "U_2_1"), vec![1, 3]);
        assert!(check_variable_condition(&r, &res.filter).is_ok());
    }

    #[test]
    fn variable_condition_witness() {
        let (p, r) = ex12();
        let full = extend_initial_filter(
            &ArgumentFilter::full(p.signature_functions().iter().chain(p.predicates().iter())),
            &r.symbols(),
        );
        let (rule, var) = *check_variable_condition(&r, &full).unwrap_err();
        assert_eq!(rule, r.rules[1]);
        assert_eq!(&*var.name, "Z");
        assert!(check_variable_condition(&Trs::default(), &ArgumentFilter::new()).is_ok());
    }
}
