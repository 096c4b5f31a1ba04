//! Simple type inference on argument positions.

use std::collections::{BTreeMap, BTreeSet};

use crate::frontend::Program;
use crate::term::{Symbol, Term, Var};

/// Argument position `(symbol, index)`; for a function `f/n` the index
/// `n + 1` is its result position.
pub type PosKey = (Symbol, usize);

#[derive(Clone, Debug)]
pub struct TypeAssignment {
    class_of: BTreeMap<PosKey, usize>,
    classes: Vec<Vec<PosKey>>,
    unbounded: BTreeMap<Symbol, BTreeSet<usize>>,
}

struct Uf {
    parent: Vec<usize>,
}

impl Uf {
    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.parent[r] != r {
            r = self.parent[r];
        }
        let mut y = x;
        while self.parent[y] != r {
            let n = self.parent[y];
            self.parent[y] = r;
            y = n;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

fn visit(t: &Term, at: usize, keys: &BTreeMap<PosKey, usize>, uf: &mut Uf, occ: &mut BTreeMap<Var, Vec<usize>>) {
    match t {
        Term::Var(v) => occ.entry(v.clone()).or_default().push(at),
        Term::App(f, args) => {
            uf.union(keys[&(f.clone(), f.arity + 1)], at);
            for (j, a) in args.iter().enumerate() {
                visit(a, keys[&(f.clone(), j + 1)], keys, uf, occ);
            }
        }
    }
}

pub fn infer_types(prog: &Program) -> TypeAssignment {
    let funs = prog.signature_functions();
    let preds = prog.predicates();
    let mut all: Vec<PosKey> = Vec::new();
    for f in &funs {
        all.extend((1..=f.arity + 1).map(|i| (f.clone(), i)));
    }
    for p in &preds {
        all.extend((1..=p.arity).map(|i| (p.clone(), i)));
    }
    all.sort();
    let keys: BTreeMap<PosKey, usize> = all.iter().cloned().enumerate().map(|(k, p)| (p, k)).collect();
    let mut uf = Uf { parent: (0..all.len()).collect() };
    for c in &prog.clauses {
        let mut occ: BTreeMap<Var, Vec<usize>> = BTreeMap::new();
        for a in std::iter::once(&c.head).chain(c.body.iter()) {
            for (i, t) in a.args.iter().enumerate() {
                visit(t, keys[&(a.pred.clone(), i + 1)], &keys, &mut uf, &mut occ);
            }
        }
        for positions in occ.values() {
            for w in positions.windows(2) {
                uf.union(w[0], w[1]);
            }
        }
    }
    // Roots are the smallest members, so classes come out ordered by them.
    let mut by_root: BTreeMap<usize, Vec<PosKey>> = BTreeMap::new();
    for (k, key) in all.iter().enumerate() {
        by_root.entry(uf.find(k)).or_default().push(key.clone());
    }
    let classes: Vec<Vec<PosKey>> = by_root.into_values().collect();
    let mut class_of = BTreeMap::new();
    for (id, members) in classes.iter().enumerate() {
        for m in members {
            class_of.insert(m.clone(), id);
        }
    }
    let mut ta = TypeAssignment { class_of, classes, unbounded: BTreeMap::new() };
    ta.unbounded = ta.compute_unbounded(&funs);
    ta
}

impl TypeAssignment {
    pub fn type_of(&self, sym: &Symbol, i: usize) -> Option<usize> {
        self.class_of.get(&(sym.clone(), i)).copied()
    }

    /// `τ(f)` as a list of type ids (result last for functions).
    pub fn tuple(&self, sym: &Symbol) -> Vec<usize> {
        let n = if sym.is_program_function() { sym.arity + 1 } else { sym.arity };
        (1..=n).filter_map(|i| self.type_of(sym, i)).collect()
    }

    pub fn classes(&self) -> &[Vec<PosKey>] {
        &self.classes
    }

    pub fn type_name(id: usize) -> String {
        format!("t{id}")
    }

    /// Function symbols whose result type is `ty`.
    pub fn constructors(&self, ty: usize) -> Vec<Symbol> {
        self.classes[ty]
            .iter()
            .filter(|(s, i)| s.is_program_function() && *i == s.arity + 1)
            .map(|(s, _)| s.clone())
            .collect()
    }

    pub fn reflexive(&self, f: &Symbol) -> BTreeSet<usize> {
        let Some(res) = self.type_of(f, f.arity + 1) else {
            return BTreeSet::new();
        };
        (1..=f.arity).filter(|&i| self.type_of(f, i) == Some(res)).collect()
    }

    pub fn unbounded(&self, f: &Symbol) -> BTreeSet<usize> {
        self.unbounded.get(f).cloned().unwrap_or_default()
    }

    fn compute_unbounded(&self, funs: &BTreeSet<Symbol>) -> BTreeMap<Symbol, BTreeSet<usize>> {
        let mut unb: BTreeMap<Symbol, BTreeSet<usize>> = funs.iter().map(|f| (f.clone(), self.reflexive(f))).collect();
        loop {
            let mut changed = false;
            for f in funs {
                for i in 1..=f.arity {
                    if unb[f].contains(&i) {
                        continue;
                    }
                    let Some(ty) = self.type_of(f, i) else {
                        continue;
                    };
                    if self.constructors(ty).iter().any(|g| !unb[g].is_empty()) {
                        unb.get_mut(f).expect("present").insert(i);
                        changed = true;
                    }
                }
            }
            if !changed {
                return unb;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse_program;

    fn key_names(ta: &TypeAssignment) -> Vec<Vec<String>> {
        ta.classes().iter().map(|c| c.iter().map(|(s, i)| format!("{}{}", s.name, i)).collect()).collect()
    }

    #[test]
    fn example_classes() {
        let p = parse_program("p(X,X).\np(f(X),g(Y)) :- p(f(X),f(Z)), p(Z,g(W)).").unwrap();
        let ta = infer_types(&p);
        let classes = key_names(&ta);
        let big: BTreeSet<String> = ["p1", "p2", "f1", "f2", "g2"].iter().map(|s| s.to_string()).collect();
        assert!(classes.iter().any(|c| c.iter().cloned().collect::<BTreeSet<_>>() == big));
        assert!(classes.iter().any(|c| c == &vec!["g1".to_string()]));
        let f = Symbol::function("f", 1);
        let g = Symbol::function("g", 1);
        assert_eq!(ta.reflexive(&f), BTreeSet::from([1]));
        assert!(ta.reflexive(&g).is_empty());
        assert!(ta.unbounded(&g).is_empty());
    }

    #[test]
    fn safeinv_unbounded() {
        let src = "nat(0). nat(s(X)) :- nat(X). inv(neg(X),pos(X)). inv(pos(X),neg(X)).
                   safeinv(X,neg(Y)) :- inv(X,neg(Y)), nat(Y). safeinv(X,pos(Y)) :- inv(X,pos(Y)), nat(Y).";
        let ta = infer_types(&parse_program(src).unwrap());
        let s = Symbol::function("s", 1);
        let zero = Symbol::function("0", 0);
        let neg = Symbol::function("neg", 1);
        let pos = Symbol::function("pos", 1);
        let ts = ta.tuple(&s);
        assert_eq!(ts[0], ts[1]);
        assert_eq!(ta.tuple(&zero), vec![ts[0]]);
        let tn = ta.tuple(&neg);
        assert_eq!(tn[0], ts[0]);
        assert_ne!(tn[1], ts[0]);
        assert_eq!(ta.tuple(&pos), tn);
        assert!(ta.reflexive(&neg).is_empty());
        assert_eq!(ta.unbounded(&neg), BTreeSet::from([1]));
        assert_eq!(ta.unbounded(&s), BTreeSet::from([1]));
        assert!(ta.reflexive(&zero).is_empty());
    }

    #[test]
    fn single_fact() {
        let ta = infer_types(&parse_program("q(a).").unwrap());
        let a = Symbol::function("a", 0);
        let q = Symbol::predicate("q", 1);
        assert_eq!(ta.tuple(&a), ta.tuple(&q));
    }
}
