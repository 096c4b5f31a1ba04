//! DP problems and the processors working on them.

use std::collections::BTreeSet;
use std::fmt;
use std::time::Instant;

use sha2::{Digest, Sha256};

use crate::dp::graph::{estimated_dependency_graph, nontrivial_sccs};
use crate::dp::poly::{Constraint, Encoder, PolyInterp, SolveOutcome, Solver};
use crate::error::Result;
use crate::filter::ArgumentFilter;
use crate::term::Symbol;
use crate::transform::{Rule, Trs};

/// `(D, R, π)`. `ids` numbers the pairs of `D` as in the initial problem so
/// proofs can refer to them; `linear_caps` selects the graph estimate for
/// ordinary rewriting.
#[derive(Clone, Debug)]
pub struct DpProblem {
    pub pairs: Trs,
    pub ids: Vec<usize>,
    pub rules: Trs,
    pub filter: ArgumentFilter,
    pub linear_caps: bool,
}

impl DpProblem {
    pub fn new(pairs: Trs, rules: Trs, filter: ArgumentFilter, linear_caps: bool) -> DpProblem {
        let ids = (1..=pairs.len()).collect();
        DpProblem { pairs, ids, rules, filter, linear_caps }
    }

    fn subproblem(&self, keep: &[usize]) -> DpProblem {
        DpProblem {
            pairs: Trs::new(keep.iter().map(|&k| self.pairs.rules[k].clone()).collect()),
            ids: keep.iter().map(|&k| self.ids[k]).collect(),
            rules: self.rules.clone(),
            filter: self.filter.clone(),
            linear_caps: self.linear_caps,
        }
    }

    /// First 16 hex digits of the SHA-256 of the rendered problem.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_string().as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    pub fn defined(&self) -> BTreeSet<Symbol> {
        self.rules.defined()
    }
}

impl fmt::Display for DpProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "pairs:")?;
        for (id, p) in self.ids.iter().zip(&self.pairs.rules) {
            writeln!(f, "  ({id}) {p}")?;
        }
        writeln!(f, "rules:")?;
        for r in &self.rules.rules {
            writeln!(f, "  {r}")?;
        }
        writeln!(f, "filter:")?;
        for line in self.filter.to_string().lines() {
            writeln!(f, "  {line}")?;
        }
        Ok(())
    }
}

/// One sub-problem per nontrivial SCC of the estimated dependency graph.
/// The components are returned as pair ids alongside.
pub fn dependency_graph_processor(d: &DpProblem) -> Result<(Vec<Vec<usize>>, Vec<DpProblem>)> {
    let adj = estimated_dependency_graph(&d.pairs.rules, &d.defined(), &d.filter, d.linear_caps)?;
    let sccs = nontrivial_sccs(&adj);
    let ids = sccs.iter().map(|c| c.iter().map(|&k| d.ids[k]).collect()).collect();
    let subs = sccs.iter().map(|c| d.subproblem(c)).collect();
    Ok((ids, subs))
}

#[derive(Clone, Debug)]
pub enum ReductionPairOutcome {
    /// Pair ids oriented strictly, the witness and the remaining problem.
    Removed {
        strict: Vec<usize>,
        interp: PolyInterp,
        rest: DpProblem,
    },
    NoOrder,
    /// Search budget or deadline exhausted.
    GaveUp,
}

/// Search limits for one constraint solving call.
#[derive(Clone, Copy, Debug)]
pub struct SearchLimits {
    pub max_coeff: u8,
    pub node_limit: u64,
    pub deadline: Option<Instant>,
}

struct Encoded {
    n: usize,
    weak: Vec<Constraint>,
    strict: Vec<Constraint>,
}

fn encode(enc: &mut Encoder, d: &DpProblem) -> Result<Encoded> {
    let mut weak = Vec::new();
    let mut strict = Vec::new();
    for r in &d.rules.rules {
        weak.extend(enc.encode(r)?.0);
    }
    for p in &d.pairs.rules {
        let (w, s) = enc.encode(p)?;
        weak.extend(w);
        strict.push(s);
    }
    Ok(Encoded { n: enc.num_unknowns(), weak, strict })
}

enum Attempt {
    Sat(Vec<u8>),
    Unsat,
    GaveUp,
}

fn attempt(e: &Encoded, strict: &[usize], lim: &SearchLimits) -> Attempt {
    let mut cons = e.weak.clone();
    cons.extend(strict.iter().map(|&k| e.strict[k].clone()));
    let mut s = Solver::new(e.n, cons, lim.max_coeff, lim.node_limit, lim.deadline);
    match s.solve() {
        SolveOutcome::Sat(v) => Attempt::Sat(v),
        SolveOutcome::Unsat => Attempt::Unsat,
        SolveOutcome::GaveUp => Attempt::GaveUp,
    }
}

fn strictly_oriented(interp: &PolyInterp, d: &DpProblem) -> Vec<usize> {
    (0..d.pairs.len()).filter(|&k| interp.decreases(&d.pairs.rules[k], &d.filter, true) == Some(true)).collect()
}

/// Linear polynomial interpretation over the filtered signature orienting
/// all rules and pairs weakly and at least one pair strictly. Among the
/// models found, the one orienting most pairs strictly is used; the strict
/// set is grown greedily, so it is maximal but not necessarily maximum.
pub fn reduction_pair_processor(d: &DpProblem, lim: &SearchLimits) -> Result<ReductionPairOutcome> {
    if d.pairs.is_empty() {
        return Ok(ReductionPairOutcome::NoOrder);
    }
    let mut enc = Encoder::new(&d.filter);
    let e = encode(&mut enc, d)?;
    let n = d.pairs.len();
    let mut covered = vec![false; n];
    let mut best: Option<(Vec<usize>, PolyInterp)> = None;
    let mut gave_up = false;
    // Seeds are tried from the last pair backwards; among equally large
    // strict sets the first one found wins.
    for j in (0..n).rev() {
        if covered[j] {
            continue;
        }
        let mut vals = match attempt(&e, &[j], lim) {
            Attempt::Sat(v) => v,
            Attempt::Unsat => continue,
            Attempt::GaveUp => {
                gave_up = true;
                break;
            }
        };
        let mut set = strictly_oriented(&enc.decode(&vals), d);
        for k in 0..n {
            if set.contains(&k) {
                continue;
            }
            let mut trial = set.clone();
            trial.push(k);
            trial.sort_unstable();
            match attempt(&e, &trial, lim) {
                Attempt::Sat(v) => {
                    vals = v;
                    set = strictly_oriented(&enc.decode(&vals), d);
                }
                Attempt::Unsat => {}
                Attempt::GaveUp => {
                    gave_up = true;
                    break;
                }
            }
        }
        for &k in &set {
            covered[k] = true;
        }
        if best.as_ref().is_none_or(|(b, _)| set.len() > b.len()) {
            best = Some((set, enc.decode(&vals)));
        }
        if gave_up || best.as_ref().is_some_and(|(b, _)| b.len() == n) {
            break;
        }
    }
    match best {
        Some((set, interp)) => {
            let keep: Vec<usize> = (0..n).filter(|k| !set.contains(k)).collect();
            let strict = set.iter().map(|&k| d.ids[k]).collect();
            Ok(ReductionPairOutcome::Removed { strict, interp, rest: d.subproblem(&keep) })
        }
        None if gave_up => Ok(ReductionPairOutcome::GaveUp),
        None => Ok(ReductionPairOutcome::NoOrder),
    }
}

/// Recomputes every inequality of a reduction pair step from the witness:
/// rules and remaining pairs weakly, removed pairs strictly.
pub fn verify_reduction_pair(d: &DpProblem, strict: &[usize], interp: &PolyInterp) -> bool {
    if strict.is_empty() {
        return false;
    }
    let rules_ok = d.rules.rules.iter().all(|r| interp.decreases(r, &d.filter, false) == Some(true));
    let pairs_ok = d.ids.iter().zip(&d.pairs.rules).all(|(id, p)| {
        let s = strict.contains(id);
        interp.decreases(p, &d.filter, s) == Some(true)
    });
    rules_ok && pairs_ok
}

/// `(π(D), π(R), id)`.
pub fn argument_filter_processor(d: &DpProblem) -> Result<DpProblem> {
    let apply = |t: &Trs| -> Result<Trs> {
        let mut out = Trs::default();
        for r in &t.rules {
            out.rules.push(Rule::new(d.filter.apply(&r.lhs)?, d.filter.apply(&r.rhs)?));
        }
        Ok(out)
    };
    let pairs = apply(&d.pairs)?;
    let rules = apply(&d.rules)?;
    let filter = ArgumentFilter::full(pairs.symbols().iter().chain(rules.symbols().iter()));
    Ok(DpProblem { pairs, ids: d.ids.clone(), rules, filter, linear_caps: d.linear_caps })
}
