//! Syntactic unification over finite trees (with occur check) and over
//! rational trees (union-find, no occur check).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::Result;
use crate::filter::ArgumentFilter;
use crate::term::{Symbol, Term, Var};

/// An idempotent substitution over finite terms.
pub type TermSubst = BTreeMap<Var, Term>;

fn deref<'a>(mut t: &'a Term, b: &'a TermSubst) -> &'a Term {
    while let Term::Var(v) = t {
        match b.get(v) {
            Some(u) => t = u,
            None => break,
        }
    }
    t
}

fn occurs(v: &Var, t: &Term, b: &TermSubst) -> bool {
    match deref(t, b) {
        Term::Var(w) => w == v,
        Term::App(_, args) => args.iter().any(|a| occurs(v, a, b)),
    }
}

fn resolve(t: &Term, b: &TermSubst) -> Term {
    match deref(t, b) {
        Term::Var(v) => Term::Var(v.clone()),
        Term::App(f, args) => Term::App(f.clone(), args.iter().map(|a| resolve(a, b)).collect()),
    }
}

/// Most general unifier over finite terms, or `None` on clash or occur-check failure.
pub fn unify_finite(s: &Term, t: &Term) -> Option<TermSubst> {
    unify_finite_all(&[(s.clone(), t.clone())])
}

pub fn unify_finite_all(eqs: &[(Term, Term)]) -> Option<TermSubst> {
    let mut b = TermSubst::new();
    let mut work: Vec<(Term, Term)> = eqs.to_vec();
    while let Some((s, t)) = work.pop() {
        let s = deref(&s, &b).clone();
        let t = deref(&t, &b).clone();
        match (&s, &t) {
            (Term::Var(x), Term::Var(y)) if x == y => {}
            (Term::Var(x), _) => {
                if occurs(x, &t, &b) {
                    return None;
                }
                b.insert(x.clone(), t.clone());
            }
            (_, Term::Var(y)) => {
                if occurs(y, &s, &b) {
                    return None;
                }
                b.insert(y.clone(), s.clone());
            }
            (Term::App(f, fa), Term::App(g, ga)) => {
                if f != g {
                    return None;
                }
                for (a, c) in fa.iter().zip(ga.iter()) {
                    work.push((a.clone(), c.clone()));
                }
            }
        }
    }
    let keys: Vec<Var> = b.keys().cloned().collect();
    let mut out = TermSubst::new();
    for k in keys {
        let r = resolve(&Term::Var(k.clone()), &b);
        out.insert(k, r);
    }
    Some(out)
}

/// Matching: finds `σ` with `pattern σ = t`, extending `sigma`.
pub fn match_term(pattern: &Term, t: &Term, sigma: &mut TermSubst) -> bool {
    match pattern {
        Term::Var(v) => match sigma.get(v) {
            Some(u) => u == t,
            None => {
                sigma.insert(v.clone(), t.clone());
                true
            }
        },
        Term::App(f, pa) => match t {
            Term::App(g, ta) if f == g => pa.iter().zip(ta.iter()).all(|(p, u)| match_term(p, u, sigma)),
            _ => false,
        },
    }
}

pub type NodeId = usize;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Node {
    Var(Var),
    App(Symbol, Vec<NodeId>),
}

/// A possibly cyclic term graph.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TermGraph {
    pub nodes: Vec<Node>,
}

impl TermGraph {
    pub fn add(&mut self, n: Node) -> NodeId {
        self.nodes.push(n);
        self.nodes.len() - 1
    }

    /// Adds `t`, sharing variable nodes through `vars`.
    pub fn add_term(&mut self, t: &Term, vars: &mut BTreeMap<Var, NodeId>) -> NodeId {
        match t {
            Term::Var(v) => {
                if let Some(&n) = vars.get(v) {
                    return n;
                }
                let n = self.add(Node::Var(v.clone()));
                vars.insert(v.clone(), n);
                n
            }
            Term::App(f, args) => {
                let kids = args.iter().map(|a| self.add_term(a, vars)).collect();
                self.add(Node::App(f.clone(), kids))
            }
        }
    }

    /// True iff no cycle is reachable from `root` along edges kept by `pi`.
    pub fn is_finite_under_filter(&self, root: NodeId, pi: &ArgumentFilter) -> Result<bool> {
        // 0 = unvisited, 1 = on stack, 2 = done
        let mut state = vec![0u8; self.nodes.len()];
        let mut stack: Vec<(NodeId, usize)> = vec![(root, 0)];
        state[root] = 1;
        while let Some(&mut (n, ref mut k)) = stack.last_mut() {
            let next = match &self.nodes[n] {
                Node::Var(_) => None,
                Node::App(f, kids) => {
                    let keep = pi.get(f)?;
                    if *k < keep.len() {
                        let c = kids[keep[*k] - 1];
                        *k += 1;
                        Some(c)
                    } else {
                        None
                    }
                }
            };
            match next {
                Some(c) => match state[c] {
                    1 => return Ok(false),
                    0 => {
                        state[c] = 1;
                        stack.push((c, 0));
                    }
                    _ => {}
                },
                None => {
                    state[n] = 2;
                    stack.pop();
                }
            }
        }
        Ok(true)
    }

    pub fn is_acyclic_from(&self, root: NodeId) -> bool {
        let mut on = vec![false; self.nodes.len()];
        let mut done = vec![false; self.nodes.len()];
        self.acyclic_rec(root, &mut on, &mut done)
    }

    fn acyclic_rec(&self, n: NodeId, on: &mut [bool], done: &mut [bool]) -> bool {
        if done[n] {
            return true;
        }
        if on[n] {
            return false;
        }
        on[n] = true;
        if let Node::App(_, kids) = &self.nodes[n] {
            for &c in kids {
                if !self.acyclic_rec(c, on, done) {
                    return false;
                }
            }
        }
        on[n] = false;
        done[n] = true;
        true
    }

    /// Unfolds the graph into a finite term; `None` if a cycle is reachable.
    pub fn to_term(&self, root: NodeId) -> Option<Term> {
        if !self.is_acyclic_from(root) {
            return None;
        }
        Some(self.unfold(root))
    }

    fn unfold(&self, n: NodeId) -> Term {
        match &self.nodes[n] {
            Node::Var(v) => Term::Var(v.clone()),
            Node::App(f, kids) => Term::App(f.clone(), kids.iter().map(|&c| self.unfold(c)).collect()),
        }
    }

    /// Prints the term rooted at `root`; a node reached again on its own
    /// path is printed as a back-reference `@k` to the label `@k:` it got.
    pub fn display(&self, root: NodeId) -> String {
        let mut targets = BTreeSet::new();
        let mut on = vec![false; self.nodes.len()];
        self.find_back_targets(root, &mut on, &mut targets, &mut BTreeSet::new());
        let labels: BTreeMap<NodeId, usize> = targets.iter().enumerate().map(|(k, &n)| (n, k)).collect();
        let mut out = String::new();
        let mut on = vec![false; self.nodes.len()];
        self.print(root, &labels, &mut on, &mut out);
        out
    }

    fn find_back_targets(
        &self,
        n: NodeId,
        on: &mut [bool],
        targets: &mut BTreeSet<NodeId>,
        done: &mut BTreeSet<NodeId>,
    ) {
        if on[n] {
            targets.insert(n);
            return;
        }
        if done.contains(&n) {
            return;
        }
        on[n] = true;
        if let Node::App(_, kids) = &self.nodes[n] {
            for &c in kids {
                self.find_back_targets(c, on, targets, done);
            }
        }
        on[n] = false;
        done.insert(n);
    }

    fn print(&self, n: NodeId, labels: &BTreeMap<NodeId, usize>, on: &mut [bool], out: &mut String) {
        if on[n] {
            out.push_str(&format!("@{}", labels[&n]));
            return;
        }
        match &self.nodes[n] {
            Node::Var(v) => out.push_str(&v.to_string()),
            Node::App(f, kids) => {
                if let Some(l) = labels.get(&n) {
                    out.push_str(&format!("@{l}:"));
                }
                out.push_str(&f.to_string());
                if !kids.is_empty() {
                    on[n] = true;
                    out.push('(');
                    for (k, &c) in kids.iter().enumerate() {
                        if k > 0 {
                            out.push_str(", ");
                        }
                        self.print(c, labels, on, out);
                    }
                    out.push(')');
                    on[n] = false;
                }
            }
        }
    }
}

/// A term graph with a designated root.
#[derive(Clone, Debug)]
pub struct GraphTerm {
    pub graph: TermGraph,
    pub root: NodeId,
}

impl GraphTerm {
    pub fn to_term(&self) -> Option<Term> {
        self.graph.to_term(self.root)
    }

    pub fn is_finite_under_filter(&self, pi: &ArgumentFilter) -> Result<bool> {
        self.graph.is_finite_under_filter(self.root, pi)
    }

    pub fn is_acyclic(&self) -> bool {
        self.graph.is_acyclic_from(self.root)
    }
}

impl fmt::Display for GraphTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.graph.display(self.root))
    }
}

/// A rational unifier: every variable is bound to a node of a shared graph
/// in which each equivalence class is a single node.
#[derive(Clone, Debug)]
pub struct Substitution {
    pub graph: TermGraph,
    pub bindings: BTreeMap<Var, NodeId>,
}

impl Substitution {
    pub fn lookup(&self, v: &Var) -> Option<GraphTerm> {
        self.bindings.get(v).map(|&n| GraphTerm { graph: self.graph.clone(), root: n })
    }

    /// Instantiates `t`; variables not in the domain stay as they are.
    pub fn apply(&self, t: &Term) -> GraphTerm {
        let mut graph = self.graph.clone();
        let mut vars: BTreeMap<Var, NodeId> = self.bindings.clone();
        let root = graph.add_term(t, &mut vars);
        GraphTerm { graph, root }
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }
}

/// Unification without occur check. Fails only on a symbol clash.
pub fn unify_rational(s: &Term, t: &Term) -> Option<Substitution> {
    unify_rational_all(&[(s.clone(), t.clone())])
}

pub fn unify_rational_all(eqs: &[(Term, Term)]) -> Option<Substitution> {
    let mut g = TermGraph::default();
    let mut vars = BTreeMap::new();
    let mut work = Vec::new();
    for (s, t) in eqs {
        let a = g.add_term(s, &mut vars);
        let b = g.add_term(t, &mut vars);
        work.push((a, b));
    }
    let mut uf = UnionFind { parent: (0..g.nodes.len()).collect() };
    while let Some((a, b)) = work.pop() {
        let (ra, rb) = (uf.find(a), uf.find(b));
        if ra == rb {
            continue;
        }
        match (&g.nodes[ra], &g.nodes[rb]) {
            (Node::Var(_), _) => uf.parent[ra] = rb,
            (_, Node::Var(_)) => uf.parent[rb] = ra,
            (Node::App(f, fk), Node::App(h, hk)) => {
                if f != h {
                    return None;
                }
                let pairs: Vec<(usize, usize)> = fk.iter().copied().zip(hk.iter().copied()).collect();
                uf.parent[ra] = rb;
                work.extend(pairs);
            }
        }
    }
    // One node per class, children pointing at class representatives.
    let mut index = BTreeMap::new();
    let mut out = TermGraph::default();
    for n in 0..g.nodes.len() {
        let r = uf.find(n);
        if let std::collections::btree_map::Entry::Vacant(e) = index.entry(r) {
            e.insert(out.nodes.len());
            out.nodes.push(Node::Var(Var::fresh(0)));
        }
    }
    for (&r, &k) in &index {
        out.nodes[k] = match &g.nodes[r] {
            Node::Var(v) => Node::Var(v.clone()),
            Node::App(f, kids) => {
                let kids = kids.iter().map(|&c| index[&uf.find(c)]).collect();
                Node::App(f.clone(), kids)
            }
        };
    }
    let mut bindings = BTreeMap::new();
    for (v, &n) in &vars {
        bindings.insert(v.clone(), index[&uf.find(n)]);
    }
    Some(Substitution { graph: out, bindings })
}

/// True iff `a` and `b` are equal up to a bijective renaming of variables.
pub fn is_variant(a: &Term, b: &Term) -> bool {
    fn go(a: &Term, b: &Term, fw: &mut BTreeMap<Var, Var>, bw: &mut BTreeMap<Var, Var>) -> bool {
        match (a, b) {
            (Term::Var(x), Term::Var(y)) => {
                let ok_f = fw.entry(x.clone()).or_insert_with(|| y.clone()) == y;
                let ok_b = bw.entry(y.clone()).or_insert_with(|| x.clone()) == x;
                ok_f && ok_b
            }
            (Term::App(f, fa), Term::App(g, ga)) => f == g && fa.iter().zip(ga.iter()).all(|(x, y)| go(x, y, fw, bw)),
            _ => false,
        }
    }
    go(a, b, &mut BTreeMap::new(), &mut BTreeMap::new())
}
