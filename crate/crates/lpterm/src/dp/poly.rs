//! Linear polynomial interpretations with natural coefficients, found by a
//! small finite-domain constraint solver.
//!
//! Interpretations range over the filtered signature: a symbol `f` with
//! `π(f) = {i1 < .. < ik}` gets `c0 + c1·x1 + .. + ck·xk`, where `xj` stands
//! for argument `ij`. They are keyed by the unfiltered symbol so that two
//! symbols never collide after filtering.

use std::collections::BTreeMap;
use std::fmt;
use std::time::Instant;

use serde::Serialize;

use crate::error::Result;
use crate::filter::ArgumentFilter;
use crate::term::{Symbol, Term, Var};
use crate::transform::Rule;

/// Coefficients `[c0, c1, .., ck]` of `c0 + c1·x1 + .. + ck·xk`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PolyInterp {
    pub coeffs: BTreeMap<Symbol, Vec<u64>>,
}

impl PolyInterp {
    /// Evaluates `π(t)` to a linear form over its variables (`None` is the
    /// constant part). Missing symbols yield `None`.
    pub fn eval(&self, t: &Term, pi: &ArgumentFilter) -> Option<BTreeMap<Option<Var>, u128>> {
        let mut out = BTreeMap::new();
        match t {
            Term::Var(v) => {
                out.insert(Some(v.clone()), 1);
            }
            Term::App(f, args) => {
                let c = self.coeffs.get(f)?;
                let keep = pi.get(f).ok()?;
                if c.len() != keep.len() + 1 {
                    return None;
                }
                out.insert(None, c[0] as u128);
                for (k, &i) in keep.iter().enumerate() {
                    if c[k + 1] == 0 {
                        continue;
                    }
                    for (key, val) in self.eval(args.get(i - 1)?, pi)? {
                        *out.entry(key).or_insert(0) += c[k + 1] as u128 * val;
                    }
                }
            }
        }
        Some(out)
    }

    /// `[l] - [r]` has only non-negative coefficients; for `strict` the
    /// constant part is at least 1.
    pub fn decreases(&self, r: &Rule, pi: &ArgumentFilter, strict: bool) -> Option<bool> {
        let l = self.eval(&r.lhs, pi)?;
        let rr = self.eval(&r.rhs, pi)?;
        let get = |m: &BTreeMap<Option<Var>, u128>, k: &Option<Var>| m.get(k).copied().unwrap_or(0);
        for k in l.keys().chain(rr.keys()) {
            if get(&l, k) < get(&rr, k) {
                return Some(false);
            }
        }
        if strict {
            return Some(get(&l, &None) > get(&rr, &None));
        }
        Some(true)
    }
}

impl fmt::Display for PolyInterp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (s, c) in &self.coeffs {
            writeln!(f, "{}", render_entry(s, c))?;
        }
        Ok(())
    }
}

pub fn render_entry(s: &Symbol, c: &[u64]) -> String {
    let args: Vec<String> = (1..c.len()).map(|i| format!("x{i}")).collect();
    let lhs = if args.is_empty() { format!("[{s}]") } else { format!("[{s}]({})", args.join(",")) };
    let mut parts = Vec::new();
    for (i, &ci) in c.iter().enumerate().skip(1) {
        match ci {
            0 => {}
            1 => parts.push(format!("x{i}")),
            _ => parts.push(format!("{ci}*x{i}")),
        }
    }
    if c[0] > 0 || parts.is_empty() {
        parts.push(c[0].to_string());
    }
    format!("{lhs} = {}", parts.join(" + "))
}

impl Serialize for PolyInterp {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut m = s.serialize_map(Some(self.coeffs.len()))?;
        for (sym, c) in &self.coeffs {
            m.serialize_entry(&sym.to_string(), c)?;
        }
        m.end()
    }
}

type Mono = Vec<u32>;

/// Polynomial over coefficient unknowns with integer coefficients.
#[derive(Clone, Debug, Default)]
struct Poly(BTreeMap<Mono, i64>);

impl Poly {
    fn add_scaled(&mut self, other: &Poly, sign: i64) {
        for (m, c) in &other.0 {
            let e = self.0.entry(m.clone()).or_insert(0);
            *e += sign * c;
            if *e == 0 {
                self.0.remove(m);
            }
        }
    }

    fn times_unknown(&self, u: u32) -> Poly {
        let mut out = Poly::default();
        for (m, c) in &self.0 {
            let mut m2 = m.clone();
            let at = m2.partition_point(|&x| x <= u);
            m2.insert(at, u);
            *out.0.entry(m2).or_insert(0) += c;
        }
        out
    }
}

type Lin = BTreeMap<Option<Var>, Poly>;

/// Translates filtered rules into constraints over coefficient unknowns.
pub struct Encoder<'a> {
    pi: &'a ArgumentFilter,
    symbols: BTreeMap<Symbol, u32>,
    unknowns: Vec<(Symbol, usize)>,
}

/// `Σ c·Π x ≥ k` over unknowns.
#[derive(Clone, Debug)]
pub struct Constraint {
    terms: Vec<(i64, Mono)>,
    k: i64,
}

impl<'a> Encoder<'a> {
    pub fn new(pi: &'a ArgumentFilter) -> Encoder<'a> {
        Encoder { pi, symbols: BTreeMap::new(), unknowns: Vec::new() }
    }

    fn unknown(&mut self, f: &Symbol, arity: usize, i: usize) -> u32 {
        let base = match self.symbols.get(f) {
            Some(&b) => b,
            None => {
                let b = self.unknowns.len() as u32;
                for j in 0..=arity {
                    self.unknowns.push((f.clone(), j));
                }
                self.symbols.insert(f.clone(), b);
                b
            }
        };
        base + i as u32
    }

    fn interp(&mut self, t: &Term) -> Result<Lin> {
        let mut out = Lin::new();
        match t {
            Term::Var(v) => {
                let mut p = Poly::default();
                p.0.insert(Vec::new(), 1);
                out.insert(Some(v.clone()), p);
            }
            Term::App(f, args) => {
                let keep = self.pi.get(f)?;
                let c0 = self.unknown(f, keep.len(), 0);
                let mut p = Poly::default();
                p.0.insert(vec![c0], 1);
                out.insert(None, p);
                for (k, &i) in keep.iter().enumerate() {
                    let ck = self.unknown(f, keep.len(), k + 1);
                    for (key, poly) in self.interp(&args[i - 1])? {
                        out.entry(key).or_default().add_scaled(&poly.times_unknown(ck), 1);
                    }
                }
            }
        }
        Ok(out)
    }

    /// Weak constraints for `l ≿ r`, and separately the constant-part
    /// difference used to require strictness.
    pub fn encode(&mut self, r: &Rule) -> Result<(Vec<Constraint>, Constraint)> {
        let l = self.interp(&r.lhs)?;
        let rr = self.interp(&r.rhs)?;
        let mut diff: Lin = l;
        for (k, p) in rr {
            diff.entry(k).or_default().add_scaled(&p, -1);
        }
        diff.entry(None).or_default();
        let to_con = |p: &Poly, k: i64| Constraint { terms: p.0.iter().map(|(m, c)| (*c, m.clone())).collect(), k };
        let weak = diff.values().map(|p| to_con(p, 0)).collect();
        let strict = to_con(&diff[&None], 1);
        Ok((weak, strict))
    }

    pub fn num_unknowns(&self) -> usize {
        self.unknowns.len()
    }

    pub fn decode(&self, values: &[u8]) -> PolyInterp {
        let mut coeffs: BTreeMap<Symbol, Vec<u64>> = BTreeMap::new();
        for (u, (f, i)) in self.unknowns.iter().enumerate() {
            let e = coeffs.entry(f.clone()).or_default();
            if e.len() <= *i {
                e.resize(*i + 1, 0);
            }
            e[*i] = values[u] as u64;
        }
        PolyInterp { coeffs }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveOutcome {
    Sat(Vec<u8>),
    Unsat,
    /// Node budget or deadline exhausted.
    GaveUp,
}

type Dom = u8;

fn lo(d: Dom) -> i64 {
    d.trailing_zeros() as i64
}

fn hi(d: Dom) -> i64 {
    7 - d.leading_zeros() as i64
}

/// Depth-first search over coefficient domains `0..=max` with bounds
/// propagation and conflict-weighted variable ordering.
pub struct Solver {
    cons: Vec<Constraint>,
    vars_of: Vec<Vec<u32>>,
    occurs: Vec<Vec<usize>>,
    weights: Vec<u64>,
    max: u8,
    nodes: u64,
    node_limit: u64,
    deadline: Option<Instant>,
    gave_up: bool,
}

impl Solver {
    pub fn new(n: usize, cons: Vec<Constraint>, max: u8, node_limit: u64, deadline: Option<Instant>) -> Solver {
        assert!(max <= 7);
        let mut occurs = vec![Vec::new(); n];
        let mut vars_of = Vec::with_capacity(cons.len());
        for (ci, c) in cons.iter().enumerate() {
            let mut vs: Vec<u32> = c.terms.iter().flat_map(|(_, m)| m.iter().copied()).collect();
            vs.sort_unstable();
            vs.dedup();
            for &v in &vs {
                occurs[v as usize].push(ci);
            }
            vars_of.push(vs);
        }
        let weights = vec![1; cons.len()];
        Solver { cons, vars_of, occurs, weights, max, nodes: 0, node_limit, deadline, gave_up: false }
    }

    fn bound(&self, ci: usize, doms: &[Dom], fix: Option<(u32, i64)>) -> i64 {
        let mut total = 0i64;
        for (c, m) in &self.cons[ci].terms {
            let mut prod = 1i64;
            for &x in m {
                let d = doms[x as usize];
                let val = match fix {
                    Some((y, v)) if y == x => v,
                    _ if *c > 0 => hi(d),
                    _ => lo(d),
                };
                prod *= val;
                if prod == 0 {
                    break;
                }
            }
            total += c * prod;
        }
        total
    }

    fn propagate(&mut self, doms: &mut [Dom], mut queue: Vec<usize>) -> bool {
        let mut queued = vec![false; self.cons.len()];
        for &c in &queue {
            queued[c] = true;
        }
        while let Some(ci) = queue.pop() {
            queued[ci] = false;
            let k = self.cons[ci].k;
            if self.bound(ci, doms, None) < k {
                self.weights[ci] += 1;
                return false;
            }
            for idx in 0..self.vars_of[ci].len() {
                let x = self.vars_of[ci][idx];
                let d = doms[x as usize];
                if d.count_ones() == 1 {
                    continue;
                }
                let mut nd: Dom = 0;
                for v in 0..=self.max {
                    if d & (1 << v) != 0 && self.bound(ci, doms, Some((x, v as i64))) >= k {
                        nd |= 1 << v;
                    }
                }
                if nd == 0 {
                    self.weights[ci] += 1;
                    return false;
                }
                if nd != d {
                    doms[x as usize] = nd;
                    for &c2 in &self.occurs[x as usize] {
                        if !queued[c2] {
                            queued[c2] = true;
                            queue.push(c2);
                        }
                    }
                }
            }
        }
        true
    }

    fn pick(&self, doms: &[Dom]) -> Option<u32> {
        let mut best: Option<(u32, u64, u64)> = None;
        for (x, &d) in doms.iter().enumerate() {
            let size = d.count_ones() as u64;
            if size <= 1 {
                continue;
            }
            let w: u64 = self.occurs[x].iter().map(|&c| self.weights[c]).sum::<u64>().max(1);
            // minimise size / w, comparing size*w_best < size_best*w
            let better = match best {
                None => true,
                Some((_, bs, bw)) => size * bw < bs * w,
            };
            if better {
                best = Some((x as u32, size, w));
            }
        }
        best.map(|b| b.0)
    }

    fn dfs(&mut self, doms: &mut [Dom]) -> Option<Vec<u8>> {
        self.nodes += 1;
        if self.nodes > self.node_limit {
            self.gave_up = true;
            return None;
        }
        if self.nodes.is_multiple_of(1024) {
            if let Some(d) = self.deadline {
                if Instant::now() >= d {
                    self.gave_up = true;
                    return None;
                }
            }
        }
        let Some(x) = self.pick(doms) else {
            return Some(doms.iter().map(|&d| lo(d) as u8).collect());
        };
        let d = doms[x as usize];
        for v in 0..=self.max {
            if d & (1 << v) == 0 {
                continue;
            }
            let mut next = doms.to_vec();
            next[x as usize] = 1 << v;
            let queue = self.occurs[x as usize].clone();
            if self.propagate(&mut next, queue) {
                if let Some(sol) = self.dfs(&mut next) {
                    return Some(sol);
                }
            }
            if self.gave_up {
                return None;
            }
        }
        None
    }

    pub fn solve(&mut self) -> SolveOutcome {
        let n = self.occurs.len();
        let full: Dom = ((1u16 << (self.max + 1)) - 1) as Dom;
        let mut doms = vec![full; n];
        let all: Vec<usize> = (0..self.cons.len()).collect();
        if !self.propagate(&mut doms, all) {
            return SolveOutcome::Unsat;
        }
        match self.dfs(&mut doms) {
            Some(s) => SolveOutcome::Sat(s),
            None if self.gave_up => SolveOutcome::GaveUp,
            None => SolveOutcome::Unsat,
        }
    }

    pub fn nodes(&self) -> u64 {
        self.nodes
    }
}
