use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::term::{Atom, Symbol, Term};

/// Maps each symbol `f/n` to the sorted subset of `{1..n}` that survives filtering.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ArgumentFilter {
    map: BTreeMap<Symbol, Vec<usize>>,
}

impl ArgumentFilter {
    pub fn new() -> ArgumentFilter {
        ArgumentFilter::default()
    }

    /// The identity filter on the given symbols.
    pub fn full<'a>(symbols: impl IntoIterator<Item = &'a Symbol>) -> ArgumentFilter {
        let mut pi = ArgumentFilter::new();
        for s in symbols {
            pi.set_full(s);
        }
        pi
    }

    pub fn set(&mut self, sym: Symbol, indices: impl IntoIterator<Item = usize>) {
        let mut v: Vec<usize> = indices.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        assert!(v.iter().all(|&i| i >= 1 && i <= sym.arity), "filter index out of range for {sym}");
        self.map.insert(sym, v);
    }

    pub fn set_full(&mut self, sym: &Symbol) {
        self.map.insert(sym.clone(), (1..=sym.arity).collect());
    }

    /// Adds a full entry unless the symbol is already mapped.
    pub fn ensure(&mut self, sym: &Symbol) {
        if !self.map.contains_key(sym) {
            self.set_full(sym);
        }
    }

    pub fn get(&self, sym: &Symbol) -> Result<&[usize]> {
        self.map.get(sym).map(|v| v.as_slice()).ok_or_else(|| Error::UnmappedSymbol(sym.to_string()))
    }

    pub fn contains(&self, sym: &Symbol) -> bool {
        self.map.contains_key(sym)
    }

    pub fn keeps(&self, sym: &Symbol, i: usize) -> Result<bool> {
        Ok(self.get(sym)?.contains(&i))
    }

    /// Removes index `i` from `π(sym)`; returns whether it was present.
    pub fn remove(&mut self, sym: &Symbol, i: usize) -> bool {
        match self.map.get_mut(sym) {
            Some(v) => {
                let before = v.len();
                v.retain(|&j| j != i);
                v.len() != before
            }
            None => false,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Symbol, &[usize])> {
        self.map.iter().map(|(s, v)| (s, v.as_slice()))
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().all(|(s, v)| v.len() == s.arity)
    }

    /// The symbol `f/n` becomes `f/|π(f)|` in the filtered signature.
    pub fn filtered_symbol(&self, sym: &Symbol) -> Result<Symbol> {
        Ok(sym.with_arity(self.get(sym)?.len()))
    }

    pub fn apply(&self, t: &Term) -> Result<Term> {
        match t {
            Term::Var(_) => Ok(t.clone()),
            Term::App(f, args) => {
                let keep = self.get(f)?;
                let mut out = Vec::with_capacity(keep.len());
                for &i in keep {
                    out.push(self.apply(&args[i - 1])?);
                }
                Ok(Term::App(f.with_arity(keep.len()), out))
            }
        }
    }

    pub fn apply_atom(&self, a: &Atom) -> Result<Atom> {
        let keep = self.get(&a.pred)?;
        let mut out = Vec::with_capacity(keep.len());
        for &i in keep {
            out.push(self.apply(&a.args[i - 1])?);
        }
        Ok(Atom { pred: a.pred.with_arity(keep.len()), args: out })
    }

    /// Positions of `t` that survive filtering: every step passes a kept index.
    pub fn is_kept_position(&self, t: &Term, pos: &[usize]) -> Result<bool> {
        let mut cur = t;
        for &i in pos {
            match cur {
                Term::Var(_) => return Ok(false),
                Term::App(f, args) => {
                    if !self.keeps(f, i)? {
                        return Ok(false);
                    }
                    match args.get(i - 1) {
                        Some(a) => cur = a,
                        None => return Ok(false),
                    }
                }
            }
        }
        Ok(true)
    }
}

impl fmt::Display for ArgumentFilter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (s, v) in &self.map {
            let idx: Vec<String> = v.iter().map(|i| i.to_string()).collect();
            writeln!(f, "pi({s}) = {{{}}}", idx.join(","))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::{SymbolKind, Var};

    #[test]
    fn filters_nested_terms() {
        let x = Term::Var(Var::new(0, "X"));
        let y = Term::Var(Var::new(1, "Y"));
        let z = Term::Var(Var::new(2, "Z"));
        let fs = Symbol::function("f", 1);
        let p_in = Symbol::new("p", 2, SymbolKind::In);
        let u1 = Symbol::new("u1", 3, SymbolKind::U);
        let f = |t: Term| Term::app(fs.clone(), vec![t]);
        let t = Term::app(u1.clone(), vec![Term::app(p_in.clone(), vec![f(x.clone()), f(z)]), x.clone(), y]);
        let mut pi = ArgumentFilter::new();
        pi.set(u1, [1, 2]);
        pi.set(p_in, [1]);
        pi.set(fs.clone(), [1]);
        assert_eq!(pi.apply(&t).unwrap().to_string(), "u1(p_in(f(X)), X)");
        assert_eq!(pi.apply(&x).unwrap(), x);
        let g = Symbol::function("g", 1);
        assert!(matches!(pi.apply(&Term::app(g, vec![x])), Err(Error::UnmappedSymbol(_))));
    }
}
