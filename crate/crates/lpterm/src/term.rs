use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use serde::Serialize;

/// Kind of the symbol a tuple symbol `F` was minted from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Base {
    Function,
    In,
    Out,
    U,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum SymbolKind {
    Function,
    Predicate,
    In,
    Out,
    U,
    Tuple(Base),
}

/// Sorted set of argument indices attached to a labelled copy such as `append_in^{2,3}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Label(Vec<usize>);

impl Label {
    pub fn new(indices: impl IntoIterator<Item = usize>) -> Label {
        let set: BTreeSet<usize> = indices.into_iter().collect();
        Label(set.into_iter().collect())
    }

    pub fn full(arity: usize) -> Label {
        Label((1..=arity).collect())
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn without(&self, i: usize) -> Label {
        Label(self.0.iter().copied().filter(|&j| j != i).collect())
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, i) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, "}}")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol {
    pub name: Arc<str>,
    pub arity: usize,
    pub kind: SymbolKind,
    pub label: Option<Label>,
}

impl Symbol {
    pub fn new(name: &str, arity: usize, kind: SymbolKind) -> Symbol {
        Symbol { name: Arc::from(name), arity, kind, label: None }
    }

    pub fn function(name: &str, arity: usize) -> Symbol {
        Symbol::new(name, arity, SymbolKind::Function)
    }

    pub fn predicate(name: &str, arity: usize) -> Symbol {
        Symbol::new(name, arity, SymbolKind::Predicate)
    }

    pub fn with_label(&self, label: Option<Label>) -> Symbol {
        Symbol { label, ..self.clone() }
    }

    pub fn with_arity(&self, arity: usize) -> Symbol {
        Symbol { arity, ..self.clone() }
    }

    pub fn unlabelled(&self) -> Symbol {
        self.with_label(None)
    }

    /// The label, reading an unlabelled symbol as labelled with every position.
    pub fn effective_label(&self) -> Label {
        self.label.clone().unwrap_or_else(|| Label::full(self.arity))
    }

    pub fn is_tuple(&self) -> bool {
        matches!(self.kind, SymbolKind::Tuple(_))
    }

    /// True for symbols of the original program's function signature.
    pub fn is_program_function(&self) -> bool {
        self.kind == SymbolKind::Function
    }

    pub fn is_u(&self) -> bool {
        matches!(self.kind, SymbolKind::U | SymbolKind::Tuple(Base::U))
    }

    pub fn mark(&self) -> Symbol {
        let base = match self.kind {
            SymbolKind::Function | SymbolKind::Predicate => Base::Function,
            SymbolKind::In => Base::In,
            SymbolKind::Out => Base::Out,
            SymbolKind::U => Base::U,
            SymbolKind::Tuple(_) => return self.clone(),
        };
        Symbol { kind: SymbolKind::Tuple(base), ..self.clone() }
    }

    pub fn unmark(&self) -> Symbol {
        let kind = match self.kind {
            SymbolKind::Tuple(Base::Function) => SymbolKind::Function,
            SymbolKind::Tuple(Base::In) => SymbolKind::In,
            SymbolKind::Tuple(Base::Out) => SymbolKind::Out,
            SymbolKind::Tuple(Base::U) => SymbolKind::U,
            k => k,
        };
        Symbol { kind, ..self.clone() }
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = &*self.name;
        match self.kind {
            SymbolKind::Function | SymbolKind::Predicate => write!(f, "{name}")?,
            SymbolKind::In => write!(f, "{name}_in")?,
            SymbolKind::Out => write!(f, "{name}_out")?,
            SymbolKind::U => write!(f, "{name}")?,
            SymbolKind::Tuple(Base::Function) => write!(f, "{}", name.to_uppercase())?,
            SymbolKind::Tuple(Base::In) => write!(f, "{}_in", name.to_uppercase())?,
            SymbolKind::Tuple(Base::Out) => write!(f, "{}_out", name.to_uppercase())?,
            SymbolKind::Tuple(Base::U) => write!(f, "{}", name.to_uppercase())?,
        }
        if let Some(l) = &self.label {
            write!(f, "^{l}")?;
        }
        Ok(())
    }
}

/// A variable. Identity is the numeric id; the name is only used for printing.
#[derive(Clone, Debug)]
pub struct Var {
    pub id: u32,
    pub name: Arc<str>,
}

impl Var {
    pub fn new(id: u32, name: &str) -> Var {
        Var { id, name: Arc::from(name) }
    }

    pub fn fresh(id: u32) -> Var {
        Var { id, name: Arc::from(format!("_{id}").as_str()) }
    }
}

impl PartialEq for Var {
    fn eq(&self, other: &Var) -> bool {
        self.id == other.id
    }
}

impl Eq for Var {}

impl Hash for Var {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.id.hash(state)
    }
}

impl PartialOrd for Var {
    fn partial_cmp(&self, other: &Var) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Var {
    fn cmp(&self, other: &Var) -> Ordering {
        self.id.cmp(&other.id)
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name)
    }
}

/// Root `ε` is the empty sequence; indices are 1-based.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize)]
pub struct Position(pub Vec<usize>);

impl Position {
    pub fn root() -> Position {
        Position(Vec::new())
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    pub fn child(&self, i: usize) -> Position {
        let mut v = self.0.clone();
        v.push(i);
        Position(v)
    }

    /// Splits `pos·i` into `(pos, i)`.
    pub fn split_last(&self) -> Option<(Position, usize)> {
        let (&last, init) = self.0.split_last()?;
        Some((Position(init.to_vec()), last))
    }

    pub fn is_prefix_of(&self, other: &Position) -> bool {
        other.0.starts_with(&self.0)
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "ε");
        }
        let parts: Vec<String> = self.0.iter().map(|i| i.to_string()).collect();
        write!(f, "{}", parts.join("."))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(Var),
    App(Symbol, Vec<Term>),
}

impl Term {
    pub fn var(v: Var) -> Term {
        Term::Var(v)
    }

    pub fn app(sym: Symbol, args: Vec<Term>) -> Term {
        debug_assert_eq!(sym.arity, args.len(), "arity mismatch for {sym}");
        Term::App(sym, args)
    }

    pub fn constant(sym: Symbol) -> Term {
        Term::App(sym, Vec::new())
    }

    pub fn root(&self) -> Option<&Symbol> {
        match self {
            Term::Var(_) => None,
            Term::App(f, _) => Some(f),
        }
    }

    pub fn args(&self) -> &[Term] {
        match self {
            Term::Var(_) => &[],
            Term::App(_, a) => a,
        }
    }

    pub fn as_var(&self) -> Option<&Var> {
        match self {
            Term::Var(v) => Some(v),
            _ => None,
        }
    }

    /// Variables in first-occurrence (preorder, left to right) order.
    pub fn vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    pub fn collect_vars(&self, out: &mut Vec<Var>) {
        match self {
            Term::Var(v) => {
                if !out.contains(v) {
                    out.push(v.clone());
                }
            }
            Term::App(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    pub fn var_set(&self) -> BTreeSet<Var> {
        self.vars().into_iter().collect()
    }

    pub fn max_var_id(&self) -> Option<u32> {
        match self {
            Term::Var(v) => Some(v.id),
            Term::App(_, args) => args.iter().filter_map(|a| a.max_var_id()).max(),
        }
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::App(_, args) => args.iter().all(|a| a.is_ground()),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Term::Var(_) => 1,
            Term::App(_, args) => 1 + args.iter().map(|a| a.size()).sum::<usize>(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Term::Var(_) => 0,
            Term::App(_, args) => 1 + args.iter().map(|a| a.depth()).max().unwrap_or(0),
        }
    }

    pub fn at(&self, pos: &Position) -> Option<&Term> {
        let mut t = self;
        for &i in &pos.0 {
            t = t.args().get(i.checked_sub(1)?)?;
        }
        Some(t)
    }

    pub fn replace_at(&self, pos: &Position, new: Term) -> Option<Term> {
        self.replace_from(&pos.0, new)
    }

    fn replace_from(&self, path: &[usize], new: Term) -> Option<Term> {
        match path.split_first() {
            None => Some(new),
            Some((&i, rest)) => match self {
                Term::Var(_) => None,
                Term::App(f, args) => {
                    let k = i.checked_sub(1)?;
                    let child = args.get(k)?.replace_from(rest, new)?;
                    let mut args = args.clone();
                    args[k] = child;
                    Some(Term::App(f.clone(), args))
                }
            },
        }
    }

    /// All positions in preorder (parents before children, leftmost first).
    pub fn positions(&self) -> Vec<Position> {
        let mut out = Vec::new();
        self.walk(&mut Vec::new(), &mut |p, _| out.push(Position(p.to_vec())));
        out
    }

    /// Positions of variable occurrences, leftmost first.
    pub fn var_positions(&self) -> Vec<(Position, Var)> {
        let mut out = Vec::new();
        self.walk(&mut Vec::new(), &mut |p, t| {
            if let Term::Var(v) = t {
                out.push((Position(p.to_vec()), v.clone()));
            }
        });
        out
    }

    fn walk(&self, path: &mut Vec<usize>, f: &mut impl FnMut(&[usize], &Term)) {
        f(path, self);
        if let Term::App(_, args) = self {
            for (k, a) in args.iter().enumerate() {
                path.push(k + 1);
                a.walk(path, f);
                path.pop();
            }
        }
    }

    pub fn subterms(&self) -> Vec<&Term> {
        let mut out = vec![self];
        let mut k = 0;
        while k < out.len() {
            let t = out[k];
            out.extend(t.args().iter());
            k += 1;
        }
        out
    }

    pub fn symbols(&self, out: &mut BTreeSet<Symbol>) {
        if let Term::App(f, args) = self {
            out.insert(f.clone());
            args.iter().for_each(|a| a.symbols(out));
        }
    }

    pub fn substitute(&self, s: &BTreeMap<Var, Term>) -> Term {
        match self {
            Term::Var(v) => s.get(v).cloned().unwrap_or_else(|| self.clone()),
            Term::App(f, args) => Term::App(f.clone(), args.iter().map(|a| a.substitute(s)).collect()),
        }
    }

    pub fn map_symbols(&self, f: &mut impl FnMut(&Symbol) -> Symbol) -> Term {
        match self {
            Term::Var(_) => self.clone(),
            Term::App(g, args) => {
                let g2 = f(g);
                Term::App(g2, args.iter().map(|a| a.map_symbols(f)).collect())
            }
        }
    }

    /// Replaces the root symbol, keeping the arguments.
    pub fn with_root(&self, sym: Symbol) -> Term {
        match self {
            Term::Var(_) => self.clone(),
            Term::App(_, args) => Term::App(sym, args.clone()),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{v}"),
            Term::App(g, args) => {
                write!(f, "{g}")?;
                if !args.is_empty() {
                    write!(f, "(")?;
                    for (k, a) in args.iter().enumerate() {
                        if k > 0 {
                            write!(f, ", ")?;
                        }
                        write!(f, "{a}")?;
                    }
                    write!(f, ")")?;
                }
                Ok(())
            }
        }
    }
}

impl Serialize for Symbol {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl Serialize for Var {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.name)
    }
}

impl Serialize for Term {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub pred: Symbol,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(pred: Symbol, args: Vec<Term>) -> Atom {
        debug_assert_eq!(pred.arity, args.len());
        Atom { pred, args }
    }

    pub fn vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        for a in &self.args {
            a.collect_vars(&mut out);
        }
        out
    }

    /// The atom read as a term rooted by its predicate symbol.
    pub fn to_term(&self) -> Term {
        Term::App(self.pred.clone(), self.args.clone())
    }

    pub fn substitute(&self, s: &BTreeMap<Var, Term>) -> Atom {
        Atom { pred: self.pred.clone(), args: self.args.iter().map(|a| a.substitute(s)).collect() }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_term())
    }
}

/// Hands out variable ids above everything seen so far.
#[derive(Clone, Debug)]
pub struct VarGen {
    next: u32,
}

impl VarGen {
    pub fn new(start: u32) -> VarGen {
        VarGen { next: start }
    }

    pub fn above<'a>(terms: impl IntoIterator<Item = &'a Term>) -> VarGen {
        let max = terms.into_iter().filter_map(|t| t.max_var_id()).max();
        VarGen { next: max.map_or(0, |m| m + 1) }
    }

    pub fn fresh(&mut self) -> Var {
        let v = Var::fresh(self.next);
        self.next += 1;
        v
    }

    pub fn fresh_named(&mut self, name: &str) -> Var {
        let v = Var::new(self.next, name);
        self.next += 1;
        v
    }

    pub fn peek(&self) -> u32 {
        self.next
    }
}

/// Renames every variable of `terms` consistently to fresh ones from `gen`.
pub fn rename_apart(terms: &[&Term], gen: &mut VarGen) -> Vec<Term> {
    let mut map = BTreeMap::new();
    for t in terms {
        for v in t.vars() {
            map.entry(v.clone()).or_insert_with(|| {
                let fresh = gen.fresh_named(&format!("{}'", v.name));
                Term::Var(fresh)
            });
        }
    }
    terms.iter().map(|t| t.substitute(&map)).collect()
}
