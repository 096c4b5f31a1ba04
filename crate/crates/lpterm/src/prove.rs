//! The analysis pipeline from a program and its query class to a proof.

use std::fmt::{self, Write as _};
use std::time::{Duration, Instant};

use serde::Serialize;
use serde_json::{json, Value};

use crate::dp::pairs::{dependency_pairs, mirror_tuple_filters};
use crate::dp::poly::render_entry;
use crate::dp::processors::{
    argument_filter_processor, dependency_graph_processor, reduction_pair_processor, DpProblem, ReductionPairOutcome,
    SearchLimits,
};
use crate::error::Result;
use crate::filter::ArgumentFilter;
use crate::frontend::{parse_program, parse_query_spec, Program, QuerySpec};
use crate::refine::{refine_basic, refine_modesplit, Decision, Heuristic, HeuristicKind};
use crate::transform::{extend_initial_filter, transform_classical, transform_new, Trs};
use crate::typing::infer_types;

#[derive(Clone, Debug)]
pub struct Config {
    pub heuristic: HeuristicKind,
    pub mode_splitting: bool,
    /// Largest polynomial coefficient, 1 to 5.
    pub max_coeff: u8,
    pub timeout: Duration,
    /// Classical transformation of well-moded programs, identity filter,
    /// ordinary rewriting.
    pub classical: bool,
    /// Processor applications allowed along one branch of the proof.
    pub max_steps: usize,
    /// Search nodes per constraint solving call.
    pub node_limit: u64,
}

impl Default for Config {
    fn default() -> Config {
        Config {
            heuristic: HeuristicKind::Tb2,
            mode_splitting: true,
            max_coeff: 2,
            timeout: Duration::from_secs(60),
            classical: false,
            max_steps: 50,
            node_limit: 2_000_000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OpenReason {
    NoOrder,
    StepBound,
    SearchBudget,
    Timeout,
}

impl fmt::Display for OpenReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            OpenReason::NoOrder => "no reduction pair found",
            OpenReason::StepBound => "processor application bound reached",
            OpenReason::SearchBudget => "search budget exhausted",
            OpenReason::Timeout => "timeout",
        };
        write!(f, "{s}")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Terminating,
    Unknown(OpenReason),
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Terminating => write!(f, "TERMINATING"),
            Verdict::Unknown(r) => write!(f, "UNKNOWN ({r})"),
        }
    }
}

#[derive(Clone, Debug)]
pub enum Step {
    /// Pair ids of each nontrivial SCC.
    DependencyGraph {
        sccs: Vec<Vec<usize>>,
    },
    ReductionPair {
        strict: Vec<usize>,
        interp: crate::dp::poly::PolyInterp,
    },
    ArgumentFilter,
    Open(OpenReason),
}

#[derive(Clone, Debug)]
pub struct ProofNode {
    pub hash: String,
    pub problem: DpProblem,
    pub step: Step,
    pub children: Vec<ProofNode>,
    pub finite: bool,
}

impl ProofNode {
    fn leaf(problem: DpProblem, reason: OpenReason) -> ProofNode {
        ProofNode { hash: problem.hash(), problem, step: Step::Open(reason), children: Vec::new(), finite: false }
    }

    fn inner(problem: DpProblem, step: Step, children: Vec<ProofNode>) -> ProofNode {
        let finite = children.iter().all(|c| c.finite);
        ProofNode { hash: problem.hash(), problem, step, children, finite }
    }

    /// Nodes in pre-order.
    pub fn walk(&self) -> Vec<&ProofNode> {
        let mut out = vec![self];
        for c in &self.children {
            out.extend(c.walk());
        }
        out
    }

    fn open_reasons(&self) -> Vec<OpenReason> {
        self.walk()
            .into_iter()
            .filter_map(|n| match n.step {
                Step::Open(r) => Some(r),
                _ => None,
            })
            .collect()
    }
}

/// Everything the pipeline produced before the proof search.
#[derive(Clone, Debug)]
pub struct Prepared {
    pub trs: Trs,
    pub filter: ArgumentFilter,
    pub trace: Vec<Decision>,
    pub problem: DpProblem,
}

#[derive(Clone, Debug)]
pub struct Analysis {
    pub verdict: Verdict,
    pub prepared: Prepared,
    pub proof: ProofNode,
    pub config: Config,
}

/// Transformation, filter refinement and the initial DP problem.
pub fn prepare(prog: &Program, spec: &QuerySpec, cfg: &Config) -> Result<Prepared> {
    if cfg.classical {
        let m = spec.moding(prog)?;
        let trs = transform_classical(prog, &m)?;
        let pairs = dependency_pairs(&trs);
        let filter = ArgumentFilter::full(trs.symbols().iter().chain(pairs.symbols().iter()));
        let problem = DpProblem::new(pairs, trs.clone(), filter.clone(), true);
        return Ok(Prepared { trs, filter, trace: Vec::new(), problem });
    }
    let rp = transform_new(prog);
    let pi0 = spec.initial_filter(prog)?;
    let types = matches!(cfg.heuristic, HeuristicKind::Tb | HeuristicKind::Tb2).then(|| infer_types(prog));
    let h = Heuristic::new(cfg.heuristic, types);
    let refined = if cfg.mode_splitting {
        refine_modesplit(&pi0, &h, &rp)?
    } else {
        let pi = extend_initial_filter(&pi0, &rp.symbols());
        refine_basic(&pi, &h, &rp)?
    };
    let pairs = dependency_pairs(&refined.trs);
    let mut filter = refined.filter.clone();
    mirror_tuple_filters(&mut filter, &pairs);
    let problem = DpProblem::new(pairs, refined.trs.clone(), filter.clone(), false);
    Ok(Prepared { trs: refined.trs, filter, trace: refined.trace, problem })
}

struct Search<'a> {
    cfg: &'a Config,
    deadline: Instant,
}

impl Search<'_> {
    fn check(&self, steps: usize) -> Option<OpenReason> {
        if Instant::now() >= self.deadline {
            Some(OpenReason::Timeout)
        } else if steps >= self.cfg.max_steps {
            Some(OpenReason::StepBound)
        } else {
            None
        }
    }

    fn graph(&self, d: DpProblem, steps: usize) -> Result<ProofNode> {
        if let Some(r) = self.check(steps) {
            return Ok(ProofNode::leaf(d, r));
        }
        let (sccs, subs) = dependency_graph_processor(&d)?;
        let mut children = Vec::new();
        for s in subs {
            children.push(self.order(s, steps + 1, false)?);
        }
        Ok(ProofNode::inner(d, Step::DependencyGraph { sccs }, children))
    }

    fn order(&self, d: DpProblem, steps: usize, filtered: bool) -> Result<ProofNode> {
        if let Some(r) = self.check(steps) {
            return Ok(ProofNode::leaf(d, r));
        }
        let lim = SearchLimits {
            max_coeff: self.cfg.max_coeff,
            node_limit: self.cfg.node_limit,
            deadline: Some(self.deadline),
        };
        match reduction_pair_processor(&d, &lim)? {
            ReductionPairOutcome::Removed { strict, interp, rest } => {
                let child = self.graph(rest, steps + 1)?;
                Ok(ProofNode::inner(d, Step::ReductionPair { strict, interp }, vec![child]))
            }
            ReductionPairOutcome::NoOrder if !filtered && !d.filter.is_identity() => {
                let next = argument_filter_processor(&d)?;
                let child = self.order(next, steps + 1, true)?;
                Ok(ProofNode::inner(d, Step::ArgumentFilter, vec![child]))
            }
            ReductionPairOutcome::NoOrder => Ok(ProofNode::leaf(d, OpenReason::NoOrder)),
            ReductionPairOutcome::GaveUp if Instant::now() >= self.deadline => {
                Ok(ProofNode::leaf(d, OpenReason::Timeout))
            }
            ReductionPairOutcome::GaveUp => Ok(ProofNode::leaf(d, OpenReason::SearchBudget)),
        }
    }
}

/// Searches for a proof that no infinite chain exists for the prepared
/// problem.
pub fn prove_prepared(prepared: Prepared, cfg: &Config, started: Instant) -> Result<Analysis> {
    let search = Search { cfg, deadline: started + cfg.timeout };
    let proof = search.graph(prepared.problem.clone(), 0)?;
    let verdict = if proof.finite {
        Verdict::Terminating
    } else {
        let reasons = proof.open_reasons();
        let r = if reasons.contains(&OpenReason::Timeout) { OpenReason::Timeout } else { reasons[0] };
        Verdict::Unknown(r)
    };
    Ok(Analysis { verdict, prepared, proof, config: cfg.clone() })
}

pub fn prove(prog: &Program, spec: &QuerySpec, cfg: &Config) -> Result<Analysis> {
    let started = Instant::now();
    let prepared = prepare(prog, spec, cfg)?;
    prove_prepared(prepared, cfg, started)
}

/// Parses program text with its `%query:` / `%filter:` directives and runs
/// the analysis.
pub fn analyze_source(src: &str, cfg: &Config) -> Result<Analysis> {
    let prog = parse_program(src)?;
    let spec = parse_query_spec(src)?;
    prove(&prog, &spec, cfg)
}

fn ids(v: &[usize]) -> String {
    v.iter().map(|k| format!("({k})")).collect::<Vec<_>>().join(", ")
}

fn render_node(n: &ProofNode, depth: usize, out: &mut String) {
    let pad = "  ".repeat(depth);
    let status = if n.finite { "finite" } else { "open" };
    let _ = writeln!(out, "{pad}[{}] {} pair(s), {status}", n.hash, n.problem.pairs.len());
    match &n.step {
        Step::DependencyGraph { sccs } => {
            if sccs.is_empty() {
                let _ = writeln!(out, "{pad}  dependency graph: no nontrivial SCCs");
            } else {
                let list: Vec<String> = sccs.iter().map(|c| format!("{{{}}}", ids(c))).collect();
                let _ = writeln!(out, "{pad}  dependency graph: SCCs {}", list.join(" "));
            }
        }
        Step::ReductionPair { strict, interp } => {
            let _ = writeln!(out, "{pad}  reduction pair: removes {}", ids(strict));
            for (s, c) in &interp.coeffs {
                let _ = writeln!(out, "{pad}    {}", render_entry(s, c));
            }
        }
        Step::ArgumentFilter => {
            let _ = writeln!(out, "{pad}  argument filter: filter applied, identity from here on");
        }
        Step::Open(r) => {
            let _ = writeln!(out, "{pad}  open: {r}");
            for (id, p) in n.problem.ids.iter().zip(&n.problem.pairs.rules) {
                let _ = writeln!(out, "{pad}    ({id}) {p}");
            }
        }
    }
    for c in &n.children {
        render_node(c, depth + 1, out);
    }
}

impl Analysis {
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let c = &self.config;
        let _ = writeln!(out, "verdict: {}", self.verdict);
        if c.classical {
            let _ = writeln!(out, "setting: classical transformation, max coeff {}", c.max_coeff);
        } else {
            let split = if c.mode_splitting { "on" } else { "off" };
            let _ =
                writeln!(out, "setting: heuristic {}, mode splitting {split}, max coeff {}", c.heuristic, c.max_coeff);
        }
        let _ = writeln!(out, "\nrules ({}):", self.prepared.trs.len());
        for r in &self.prepared.trs.rules {
            let _ = writeln!(out, "  {r}");
        }
        let _ = writeln!(out, "\nfilter:");
        for line in self.prepared.filter.to_string().lines() {
            let _ = writeln!(out, "  {line}");
        }
        if !self.prepared.trace.is_empty() {
            let _ = writeln!(out, "\nrefinement:");
            for d in &self.prepared.trace {
                let relabel = d.relabelled_to.as_ref().map(|s| format!(", relabelled to {s}")).unwrap_or_default();
                let _ = writeln!(
                    out,
                    "  {} at {} ({}): drop ({}, {}){relabel}",
                    d.rule, d.position, d.variable, d.symbol, d.index
                );
            }
        }
        let _ = writeln!(out, "\ndependency pairs:");
        let p = &self.prepared.problem;
        for (id, r) in p.ids.iter().zip(&p.pairs.rules) {
            let _ = writeln!(out, "  ({id}) {r}");
        }
        let _ = writeln!(out, "\nproof:");
        render_node(&self.proof, 1, &mut out);
        out
    }

    pub fn to_json(&self) -> Value {
        fn node(n: &ProofNode) -> Value {
            let (processor, params) = match &n.step {
                Step::DependencyGraph { sccs } => ("dependency-graph", json!({ "sccs": sccs })),
                Step::ReductionPair { strict, interp } => {
                    ("reduction-pair", json!({ "strict": strict, "interpretation": interp }))
                }
                Step::ArgumentFilter => ("argument-filter", json!({})),
                Step::Open(r) => ("none", json!({ "reason": r })),
            };
            json!({
                "hash": n.hash,
                "pairs": n.problem.ids,
                "processor": processor,
                "parameters": params,
                "status": if n.finite { "finite" } else { "open" },
                "children": n.children.iter().map(node).collect::<Vec<_>>(),
            })
        }
        let c = &self.config;
        let p = &self.prepared.problem;
        let filter: serde_json::Map<String, Value> =
            self.prepared.filter.iter().map(|(s, k)| (s.to_string(), json!(k))).collect();
        json!({
            "verdict": match self.verdict { Verdict::Terminating => "TERMINATING", Verdict::Unknown(_) => "UNKNOWN" },
            "reason": match self.verdict { Verdict::Terminating => Value::Null, Verdict::Unknown(r) => json!(r) },
            "config": {
                "heuristic": c.heuristic.to_string(),
                "mode_splitting": c.mode_splitting,
                "max_coeff": c.max_coeff,
                "classical": c.classical,
            },
            "rules": self.prepared.trs.rules,
            "filter": filter,
            "refinement": self.prepared.trace,
            "pairs": p.ids.iter().zip(&p.pairs.rules).map(|(i, r)| json!({ "id": i, "pair": r })).collect::<Vec<_>>(),
            "proof": node(&self.proof),
        })
    }
}
