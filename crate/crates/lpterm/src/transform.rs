//! Logic programs to term rewrite systems.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::filter::ArgumentFilter;
use crate::frontend::{check_well_moded, Mode, Moding, Program};
use crate::term::{Atom, Symbol, SymbolKind, Term, Var};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rule {
    pub lhs: Term,
    pub rhs: Term,
}

impl Rule {
    pub fn new(lhs: Term, rhs: Term) -> Rule {
        Rule { lhs, rhs }
    }

    pub fn map_symbols(&self, f: &mut impl FnMut(&Symbol) -> Symbol) -> Rule {
        Rule { lhs: self.lhs.map_symbols(f), rhs: self.rhs.map_symbols(f) }
    }

    pub fn max_var_id(&self) -> Option<u32> {
        self.lhs.max_var_id().max(self.rhs.max_var_id())
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {}", self.lhs, self.rhs)
    }
}

impl Serialize for Rule {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Trs {
    pub rules: Vec<Rule>,
}

impl Trs {
    pub fn new(rules: Vec<Rule>) -> Trs {
        Trs { rules }
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    /// Appends `r` unless an identical rule is present.
    pub fn push_unique(&mut self, r: Rule) -> bool {
        if self.rules.contains(&r) {
            false
        } else {
            self.rules.push(r);
            true
        }
    }

    /// Roots of left-hand sides.
    pub fn defined(&self) -> BTreeSet<Symbol> {
        self.rules.iter().filter_map(|r| r.lhs.root().cloned()).collect()
    }

    pub fn symbols(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        for r in &self.rules {
            r.lhs.symbols(&mut out);
            r.rhs.symbols(&mut out);
        }
        out
    }

    pub fn constructors(&self) -> BTreeSet<Symbol> {
        let d = self.defined();
        self.symbols().into_iter().filter(|s| !d.contains(s)).collect()
    }

    pub fn max_var_id(&self) -> Option<u32> {
        self.rules.iter().filter_map(|r| r.max_var_id()).max()
    }
}

impl fmt::Display for Trs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.rules {
            writeln!(f, "{r}")?;
        }
        Ok(())
    }
}

pub fn in_symbol(p: &Symbol) -> Symbol {
    Symbol::new(&p.name, p.arity, SymbolKind::In)
}

pub fn out_symbol(p: &Symbol) -> Symbol {
    Symbol::new(&p.name, p.arity, SymbolKind::Out)
}

/// `u_{c,i}` for clause `c` and body position `i`, both 1-based.
pub fn u_symbol(clause: usize, i: usize, arity: usize) -> Symbol {
    Symbol::new(&format!("u_{clause}_{i}"), arity, SymbolKind::U)
}

fn wrap(sym: Symbol, args: &[Term]) -> Term {
    Term::app(sym, args.to_vec())
}

fn push_vars(acc: &mut Vec<Var>, terms: &[Term]) {
    for t in terms {
        t.collect_vars(acc);
    }
}

pub(crate) fn u_term(c: usize, i: usize, first: Term, vars: &[Var]) -> Term {
    let mut args = vec![first];
    args.extend(vars.iter().cloned().map(Term::Var));
    Term::app(u_symbol(c, i, args.len()), args)
}

/// Accumulated variable lists `V(s)`, `V(s) ∪ V(s1)`, ... of clause `c`.
pub(crate) fn accumulated_vars(head: &Atom, body: &[Atom]) -> Vec<Vec<Var>> {
    let mut acc = Vec::new();
    push_vars(&mut acc, &head.args);
    let mut out = vec![acc.clone()];
    for b in body {
        push_vars(&mut acc, &b.args);
        out.push(acc.clone());
    }
    out
}

/// The transformation into a TRS for infinitary constructor rewriting.
pub fn transform_new(prog: &Program) -> Trs {
    let mut rules = Vec::new();
    for (ci, c) in prog.clauses.iter().enumerate() {
        let cn = ci + 1;
        let p_in = in_symbol(&c.head.pred);
        let p_out = out_symbol(&c.head.pred);
        if c.body.is_empty() {
            rules.push(Rule::new(wrap(p_in, &c.head.args), wrap(p_out, &c.head.args)));
            continue;
        }
        let acc = accumulated_vars(&c.head, &c.body);
        let k = c.body.len();
        let first = wrap(in_symbol(&c.body[0].pred), &c.body[0].args);
        rules.push(Rule::new(wrap(p_in, &c.head.args), u_term(cn, 1, first, &acc[0])));
        for i in 1..=k {
            let b = &c.body[i - 1];
            let lhs = u_term(cn, i, wrap(out_symbol(&b.pred), &b.args), &acc[i - 1]);
            let rhs = if i < k {
                let nb = &c.body[i];
                u_term(cn, i + 1, wrap(in_symbol(&nb.pred), &nb.args), &acc[i])
            } else {
                wrap(p_out.clone(), &c.head.args)
            };
            rules.push(Rule::new(lhs, rhs));
        }
    }
    Trs::new(rules)
}

fn select(a: &Atom, m: &Moding, mode: Mode) -> Vec<Term> {
    m.positions(&a.pred, mode).into_iter().map(|i| a.args[i - 1].clone()).collect()
}

fn moded_symbol(p: &Symbol, kind: SymbolKind, arity: usize) -> Symbol {
    Symbol::new(&p.name, arity, kind)
}

/// The classical transformation for well-moded programs. Symbol names agree
/// with [`transform_new`]; extra variables of `u` symbols keep the order
/// they have there.
pub fn transform_classical(prog: &Program, m: &Moding) -> Result<Trs> {
    check_well_moded(prog, m).map_err(Error::NotWellModed)?;
    let mut rules = Vec::new();
    let vars_of = |ts: &[Term]| {
        let mut v = Vec::new();
        push_vars(&mut v, ts);
        v.into_iter().collect::<BTreeSet<Var>>()
    };
    for (ci, c) in prog.clauses.iter().enumerate() {
        let cn = ci + 1;
        let h_in = select(&c.head, m, Mode::In);
        let h_out = select(&c.head, m, Mode::Out);
        let p_in = moded_symbol(&c.head.pred, SymbolKind::In, h_in.len());
        let p_out = moded_symbol(&c.head.pred, SymbolKind::Out, h_out.len());
        if c.body.is_empty() {
            rules.push(Rule::new(wrap(p_in, &h_in), wrap(p_out, &h_out)));
            continue;
        }
        let order = accumulated_vars(&c.head, &c.body);
        let mut avail = vars_of(&h_in);
        let mut lists = Vec::new();
        for (i, full) in order.iter().enumerate().take(c.body.len()) {
            if i > 0 {
                avail.extend(vars_of(&select(&c.body[i - 1], m, Mode::Out)));
            }
            lists.push(full.iter().filter(|v| avail.contains(v)).cloned().collect::<Vec<Var>>());
        }
        let call = |b: &Atom| {
            let ins = select(b, m, Mode::In);
            wrap(moded_symbol(&b.pred, SymbolKind::In, ins.len()), &ins)
        };
        let ret = |b: &Atom| {
            let outs = select(b, m, Mode::Out);
            wrap(moded_symbol(&b.pred, SymbolKind::Out, outs.len()), &outs)
        };
        let k = c.body.len();
        rules.push(Rule::new(wrap(p_in, &h_in), u_term(cn, 1, call(&c.body[0]), &lists[0])));
        for i in 1..=k {
            let lhs = u_term(cn, i, ret(&c.body[i - 1]), &lists[i - 1]);
            let rhs = if i < k { u_term(cn, i + 1, call(&c.body[i]), &lists[i]) } else { wrap(p_out.clone(), &h_out) };
            rules.push(Rule::new(lhs, rhs));
        }
    }
    Ok(Trs::new(rules))
}

/// Filter induced by a moding: `p_in`, `P_in` keep input positions,
/// `p_out` keeps output positions, all other symbols are kept whole.
pub fn induced_filter<'a>(m: &Moding, symbols: impl IntoIterator<Item = &'a Symbol>) -> ArgumentFilter {
    let mut pi = ArgumentFilter::new();
    for s in symbols {
        let pred = Symbol::predicate(&s.name, s.arity);
        let keep = match s.kind {
            SymbolKind::In | SymbolKind::Tuple(crate::term::Base::In) => m.positions(&pred, Mode::In),
            SymbolKind::Out => m.positions(&pred, Mode::Out),
            _ => (1..=s.arity).collect(),
        };
        pi.set(s.clone(), keep);
    }
    pi
}

/// Extends a filter on the program signature to the symbols of its TRS:
/// `p_in` and `P_in` get `π(p)`, function symbols keep `π(f)`, anything
/// else is kept whole.
pub fn extend_initial_filter<'a>(pi: &ArgumentFilter, symbols: impl IntoIterator<Item = &'a Symbol>) -> ArgumentFilter {
    let mut out = ArgumentFilter::new();
    for (s, keep) in pi.iter() {
        if s.kind == SymbolKind::Function {
            out.set(s.clone(), keep.iter().copied());
        }
    }
    for s in symbols {
        let keep: Vec<usize> = match s.kind {
            SymbolKind::In | SymbolKind::Tuple(crate::term::Base::In) if s.label.is_none() => {
                match pi.get(&Symbol::predicate(&s.name, s.arity)) {
                    Ok(k) => k.to_vec(),
                    Err(_) => (1..=s.arity).collect(),
                }
            }
            SymbolKind::Function => match pi.get(s) {
                Ok(k) => k.to_vec(),
                Err(_) => (1..=s.arity).collect(),
            },
            _ => (1..=s.arity).collect(),
        };
        out.set(s.clone(), keep);
    }
    out
}
