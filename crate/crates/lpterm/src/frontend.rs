//! Reader for definite logic programs and `%query:` / `%filter:` directives.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::filter::ArgumentFilter;
use crate::term::{Atom, Symbol, SymbolKind, Term, Var};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Clause {
    pub head: Atom,
    pub body: Vec<Atom>,
}

impl Clause {
    pub fn vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        for a in std::iter::once(&self.head).chain(self.body.iter()) {
            for t in &a.args {
                t.collect_vars(&mut out);
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Program {
    pub clauses: Vec<Clause>,
    /// Constant added when the clauses mention none.
    pub fresh_constant: Option<Symbol>,
}

impl Program {
    pub fn new(clauses: Vec<Clause>) -> Program {
        let mut p = Program { clauses, fresh_constant: None };
        let funs = p.functions();
        if !funs.iter().any(|f| f.arity == 0) {
            let names: BTreeSet<&str> = funs.iter().map(|f| &*f.name).collect();
            let mut name = String::from("bot");
            let mut k = 1;
            while names.contains(name.as_str()) {
                name = format!("bot_{k}");
                k += 1;
            }
            p.fresh_constant = Some(Symbol::function(&name, 0));
        }
        p
    }

    /// Function symbols occurring in the clauses.
    pub fn functions(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        for c in &self.clauses {
            for a in std::iter::once(&c.head).chain(c.body.iter()) {
                for t in &a.args {
                    t.symbols(&mut out);
                }
            }
        }
        out
    }

    /// Function symbols including the fresh constant, if one was added.
    pub fn signature_functions(&self) -> BTreeSet<Symbol> {
        let mut out = self.functions();
        out.extend(self.fresh_constant.iter().cloned());
        out
    }

    pub fn predicates(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        for c in &self.clauses {
            out.insert(c.head.pred.clone());
            for a in &c.body {
                out.insert(a.pred.clone());
            }
        }
        out
    }

    /// Clause indices (0-based) whose head uses `p`.
    pub fn clauses_of(&self, p: &Symbol) -> Vec<usize> {
        (0..self.clauses.len()).filter(|&i| &self.clauses[i].head.pred == p).collect()
    }

    pub fn max_var_id(&self) -> Option<u32> {
        self.clauses.iter().flat_map(|c| c.vars()).map(|v| v.id).max()
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.clauses {
            writeln!(f, "{}", print_clause(c))?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Mode {
    In,
    Out,
}

/// Per-predicate argument modes.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Moding {
    pub modes: BTreeMap<Symbol, Vec<Mode>>,
}

impl Moding {
    pub fn get(&self, p: &Symbol) -> Vec<Mode> {
        self.modes.get(p).cloned().unwrap_or_else(|| vec![Mode::In; p.arity])
    }

    pub fn positions(&self, p: &Symbol, m: Mode) -> Vec<usize> {
        self.get(p).iter().enumerate().filter(|(_, &x)| x == m).map(|(i, _)| i + 1).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QueryDirective {
    pub name: String,
    pub modes: Vec<Mode>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FilterDirective {
    pub name: String,
    pub arity: Option<usize>,
    pub keep: Vec<usize>,
    pub line: usize,
}

/// Query class as read from the directives, before resolving names
/// against a program.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct QuerySpec {
    pub queries: Vec<QueryDirective>,
    pub filters: Vec<FilterDirective>,
}

impl QuerySpec {
    pub fn entry_name(&self) -> Option<&str> {
        self.queries.first().map(|q| q.name.as_str())
    }

    /// Moding over all predicates of `prog`; predicates without a `%query:`
    /// line are read as all-input.
    pub fn moding(&self, prog: &Program) -> Result<Moding> {
        let preds = prog.predicates();
        let mut m = Moding::default();
        for p in &preds {
            m.modes.insert(p.clone(), vec![Mode::In; p.arity]);
        }
        for q in &self.queries {
            let p = preds
                .iter()
                .find(|p| *p.name == q.name && p.arity == q.modes.len())
                .ok_or_else(|| Error::UnknownSymbol(format!("{}/{}", q.name, q.modes.len())))?;
            m.modes.insert(p.clone(), q.modes.clone());
        }
        Ok(m)
    }

    /// Initial filter over the program's function symbols and predicates:
    /// everything full, predicates from `%query:` restricted to their input
    /// positions, then explicit `%filter:` entries.
    pub fn initial_filter(&self, prog: &Program) -> Result<ArgumentFilter> {
        let funs = prog.signature_functions();
        let preds = prog.predicates();
        let mut pi = ArgumentFilter::full(funs.iter().chain(preds.iter()));
        let m = self.moding(prog)?;
        for q in &self.queries {
            let p = preds.iter().find(|p| *p.name == q.name && p.arity == q.modes.len()).expect("resolved above");
            pi.set(p.clone(), m.positions(p, Mode::In));
        }
        for fd in &self.filters {
            let cands: Vec<&Symbol> = funs
                .iter()
                .chain(preds.iter())
                .filter(|s| *s.name == fd.name && fd.arity.is_none_or(|a| a == s.arity))
                .collect();
            let sym = match cands.as_slice() {
                [s] => (*s).clone(),
                [] => return Err(Error::UnknownSymbol(fd.name.clone())),
                _ => return Err(Error::UnknownSymbol(format!("{} is ambiguous, write name/arity", fd.name))),
            };
            if let Some(&bad) = fd.keep.iter().find(|&&i| i < 1 || i > sym.arity) {
                return Err(Error::Syntax {
                    line: fd.line,
                    col: 1,
                    msg: format!("index {bad} out of range for {}/{}", sym.name, sym.arity),
                });
            }
            pi.set(sym, fd.keep.iter().copied());
        }
        Ok(pi)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Condition {
    /// Output variables of the head must be produced.
    A,
    /// Input variables of the i-th body atom must be available.
    B(usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    /// 1-based clause index.
    pub clause: usize,
    pub condition: Condition,
    pub vars: Vec<String>,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cond = match self.condition {
            Condition::A => "(a) head output".to_string(),
            Condition::B(i) => format!("(b) input of body atom {i}"),
        };
        write!(f, "clause {}, condition {}, variables {}", self.clause, cond, self.vars.join(","))
    }
}

fn mode_vars(a: &Atom, m: &Moding, mode: Mode) -> BTreeSet<Var> {
    let mut out = Vec::new();
    for i in m.positions(&a.pred, mode) {
        a.args[i - 1].collect_vars(&mut out);
    }
    out.into_iter().collect()
}

pub fn check_well_moded(prog: &Program, m: &Moding) -> std::result::Result<(), Violation> {
    for (ci, c) in prog.clauses.iter().enumerate() {
        let mut known = mode_vars(&c.head, m, Mode::In);
        for (bi, b) in c.body.iter().enumerate() {
            let need = mode_vars(b, m, Mode::In);
            let missing: Vec<String> = need.difference(&known).map(|v| v.name.to_string()).collect();
            if !missing.is_empty() {
                return Err(Violation { clause: ci + 1, condition: Condition::B(bi + 1), vars: missing });
            }
            known.extend(mode_vars(b, m, Mode::Out));
        }
        let out = mode_vars(&c.head, m, Mode::Out);
        let missing: Vec<String> = out.difference(&known).map(|v| v.name.to_string()).collect();
        if !missing.is_empty() {
            return Err(Violation { clause: ci + 1, condition: Condition::A, vars: missing });
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// lexer

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Var(String),
    Name(String),
    Int(String),
    Punct(char),
    End,
    Eof,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
    /// Name directly followed by `(`.
    functional: bool,
}

const SYMBOL_CHARS: &str = "+-*/\\^<>=~:.?@#&$";

fn lex(src: &str, line0: usize, col0: usize) -> Result<Vec<Token>> {
    let chars: Vec<char> = src.chars().collect();
    let mut toks = Vec::new();
    let (mut i, mut line, mut col) = (0usize, line0, col0);
    macro_rules! bump {
        () => {{
            if chars[i] == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            i += 1;
        }};
    }
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            bump!();
            continue;
        }
        if c == '%' {
            while i < chars.len() && chars[i] != '\n' {
                bump!();
            }
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'*') {
            let (l, co) = (line, col);
            bump!();
            bump!();
            loop {
                if i >= chars.len() {
                    return Err(Error::Syntax { line: l, col: co, msg: "unterminated block comment".into() });
                }
                if chars[i] == '*' && chars.get(i + 1) == Some(&'/') {
                    bump!();
                    bump!();
                    break;
                }
                bump!();
            }
            continue;
        }
        let (tl, tc) = (line, col);
        let tok = if c.is_alphabetic() || c == '_' {
            let mut s = String::new();
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                s.push(chars[i]);
                bump!();
            }
            if c.is_uppercase() || c == '_' {
                Tok::Var(s)
            } else {
                Tok::Name(s)
            }
        } else if c.is_ascii_digit() {
            let mut s = String::new();
            while i < chars.len() && chars[i].is_ascii_digit() {
                s.push(chars[i]);
                bump!();
            }
            Tok::Int(s)
        } else if c == '\'' {
            bump!();
            let mut s = String::new();
            loop {
                if i >= chars.len() {
                    return Err(Error::Syntax { line: tl, col: tc, msg: "unterminated quoted atom".into() });
                }
                if chars[i] == '\'' {
                    if chars.get(i + 1) == Some(&'\'') {
                        s.push('\'');
                        bump!();
                        bump!();
                        continue;
                    }
                    bump!();
                    break;
                }
                if chars[i] == '\\' && i + 1 < chars.len() {
                    bump!();
                }
                s.push(chars[i]);
                bump!();
            }
            Tok::Name(s)
        } else if c == '.' && chars.get(i + 1).is_none_or(|n| n.is_whitespace() || *n == '%') {
            bump!();
            Tok::End
        } else if "()[]|,!;{}".contains(c) {
            bump!();
            Tok::Punct(c)
        } else if SYMBOL_CHARS.contains(c) {
            let mut s = String::new();
            while i < chars.len() && SYMBOL_CHARS.contains(chars[i]) {
                if chars[i] == '.' && chars.get(i + 1).is_none_or(|n| n.is_whitespace() || *n == '%') && !s.is_empty() {
                    break;
                }
                s.push(chars[i]);
                bump!();
            }
            Tok::Name(s)
        } else {
            return Err(Error::Syntax { line: tl, col: tc, msg: format!("unexpected character '{c}'") });
        };
        let functional = matches!(tok, Tok::Name(_)) && chars.get(i) == Some(&'(');
        toks.push(Token { tok, line: tl, col: tc, functional });
    }
    toks.push(Token { tok: Tok::Eof, line, col, functional: false });
    Ok(toks)
}

// ---------------------------------------------------------------------------
// parser

const BUILTINS: &[&str] = &[
    "call",
    "not",
    "is",
    "findall",
    "bagof",
    "setof",
    "assert",
    "asserta",
    "assertz",
    "retract",
    "write",
    "writeln",
    "nl",
    "read",
    "true",
    "fail",
    "false",
    "functor",
    "arg",
    "copy_term",
    "atom",
    "number",
    "var",
    "nonvar",
    "atomic",
    "ground",
    "halt",
    "once",
    "forall",
    "between",
    "length",
    "format",
];

const INFIX_BUILTINS: &[&str] =
    &["=", "\\=", "==", "\\==", "is", "<", ">", "=<", ">=", "=:=", "=\\=", "=..", "@<", "@>", "@=<", "@>=", "->"];

struct Parser {
    toks: Vec<Token>,
    k: usize,
    vars: BTreeMap<String, Var>,
    next_var: u32,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.k]
    }

    fn next(&mut self) -> Token {
        let t = self.toks[self.k].clone();
        if self.k + 1 < self.toks.len() {
            self.k += 1;
        }
        t
    }

    fn err<T>(&self, t: &Token, msg: impl Into<String>) -> Result<T> {
        Err(Error::Syntax { line: t.line, col: t.col, msg: msg.into() })
    }

    fn unsupported<T>(&self, t: &Token, what: impl Into<String>) -> Result<T> {
        Err(Error::Unsupported { line: t.line, col: t.col, what: what.into() })
    }

    fn expect(&mut self, p: char) -> Result<()> {
        let t = self.next();
        if t.tok == Tok::Punct(p) {
            Ok(())
        } else {
            self.err(&t, format!("expected '{p}'"))
        }
    }

    fn clause(&mut self) -> Result<Clause> {
        self.vars.clear();
        let head = self.goal(true)?;
        let t = self.next();
        let body = match &t.tok {
            Tok::End => Vec::new(),
            Tok::Name(n) if n == ":-" => {
                let mut body = vec![self.goal(false)?];
                loop {
                    let t = self.next();
                    match &t.tok {
                        Tok::End => break,
                        Tok::Punct(',') => body.push(self.goal(false)?),
                        Tok::Punct(';') => return self.unsupported(&t, "disjunction"),
                        Tok::Punct('|') => return self.unsupported(&t, "disjunction"),
                        Tok::Name(n) if INFIX_BUILTINS.contains(&n.as_str()) => {
                            return self.unsupported(&t, format!("built-in {n}"))
                        }
                        _ => return self.err(&t, "expected ',' or '.' after body atom"),
                    }
                }
                body
            }
            Tok::Name(n) if INFIX_BUILTINS.contains(&n.as_str()) => {
                return self.unsupported(&t, format!("built-in {n}"))
            }
            _ => return self.err(&t, "expected ':-' or '.' after clause head"),
        };
        Ok(Clause { head, body })
    }

    fn goal(&mut self, head: bool) -> Result<Atom> {
        let t = self.next();
        match &t.tok {
            Tok::Punct('!') => self.unsupported(&t, "cut"),
            Tok::Name(n) if n == "\\+" => self.unsupported(&t, "negation"),
            Tok::Name(n) if !head && (n == "not" || n == "\\+") => self.unsupported(&t, "negation"),
            Tok::Name(n) if !head && BUILTINS.contains(&n.as_str()) => self.unsupported(&t, format!("built-in {n}")),
            Tok::Name(n) if n == ":-" && head => self.unsupported(&t, "directive"),
            Tok::Var(_) if !head => self.unsupported(&t, "meta-call"),
            Tok::Punct('(') if !head => self.unsupported(&t, "control construct"),
            Tok::Name(n) => {
                let n = n.clone();
                let args = if t.functional { self.args()? } else { Vec::new() };
                let nt = self.peek().clone();
                if let Tok::Name(op) = &nt.tok {
                    if INFIX_BUILTINS.contains(&op.as_str()) {
                        return self.unsupported(&nt, format!("built-in {op}"));
                    }
                }
                Ok(Atom::new(Symbol::predicate(&n, args.len()), args))
            }
            _ => self.err(&t, "expected an atom"),
        }
    }

    fn args(&mut self) -> Result<Vec<Term>> {
        self.expect('(')?;
        let mut args = vec![self.term()?];
        loop {
            let t = self.next();
            match t.tok {
                Tok::Punct(',') => args.push(self.term()?),
                Tok::Punct(')') => return Ok(args),
                Tok::Name(ref op) if op != ":-" && SYMBOL_CHARS.contains(op.chars().next().unwrap_or(' ')) => {
                    return self.unsupported(&t, format!("operator expression '{op}'"))
                }
                _ => return self.err(&t, "expected ',' or ')'"),
            }
        }
    }

    fn var(&mut self, name: &str) -> Term {
        if name == "_" {
            let v = Var::new(self.next_var, "_");
            self.next_var += 1;
            return Term::Var(v);
        }
        if let Some(v) = self.vars.get(name) {
            return Term::Var(v.clone());
        }
        let v = Var::new(self.next_var, name);
        self.next_var += 1;
        self.vars.insert(name.to_string(), v.clone());
        Term::Var(v)
    }

    fn term(&mut self) -> Result<Term> {
        let t = self.next();
        let term = match &t.tok {
            Tok::Var(n) => {
                let n = n.clone();
                self.var(&n)
            }
            Tok::Int(n) => Term::constant(Symbol::function(n, 0)),
            Tok::Name(n) => {
                let n = n.clone();
                let args = if t.functional { self.args()? } else { Vec::new() };
                Term::app(Symbol::function(&n, args.len()), args)
            }
            Tok::Punct('[') => self.list()?,
            Tok::Punct('!') => return self.unsupported(&t, "cut"),
            _ => return self.err(&t, "expected a term"),
        };
        Ok(term)
    }

    fn list(&mut self) -> Result<Term> {
        if self.peek().tok == Tok::Punct(']') {
            self.next();
            return Ok(nil());
        }
        let mut items = vec![self.term()?];
        let tail;
        loop {
            let t = self.next();
            match t.tok {
                Tok::Punct(',') => items.push(self.term()?),
                Tok::Punct('|') => {
                    tail = self.term()?;
                    self.expect(']')?;
                    break;
                }
                Tok::Punct(']') => {
                    tail = nil();
                    break;
                }
                _ => return self.err(&t, "expected ',', '|' or ']' in list"),
            }
        }
        Ok(items.into_iter().rev().fold(tail, |acc, x| cons(x, acc)))
    }
}

pub fn nil() -> Term {
    Term::constant(Symbol::function("[]", 0))
}

pub fn cons(head: Term, tail: Term) -> Term {
    Term::app(Symbol::function(".", 2), vec![head, tail])
}

/// Parses the clauses of a program. Directive comments are ignored here.
pub fn parse_program(src: &str) -> Result<Program> {
    let toks = lex(src, 1, 1)?;
    let mut p = Parser { toks, k: 0, vars: BTreeMap::new(), next_var: 0 };
    let mut clauses = Vec::new();
    while p.peek().tok != Tok::Eof {
        clauses.push(p.clause()?);
    }
    Ok(Program::new(clauses))
}

fn parse_modes(body: &str, line: usize, col: usize) -> Result<QueryDirective> {
    let toks = lex(body, line, col)?;
    let bad = |t: &Token, msg: &str| Error::Syntax { line: t.line, col: t.col, msg: msg.to_string() };
    let mut it = toks.iter().filter(|t| t.tok != Tok::End).peekable();
    let head = it.next().ok_or_else(|| bad(&toks[0], "expected a predicate"))?;
    let name = match &head.tok {
        Tok::Name(n) => n.clone(),
        _ => return Err(bad(head, "expected a predicate name")),
    };
    let mut modes = Vec::new();
    if head.functional {
        it.next();
        loop {
            let t = it.next().ok_or_else(|| bad(head, "unterminated mode list"))?;
            match &t.tok {
                Tok::Name(m) if m == "i" => modes.push(Mode::In),
                Tok::Name(m) if m == "o" => modes.push(Mode::Out),
                _ => return Err(bad(t, "mode must be i or o")),
            }
            let sep = it.next().ok_or_else(|| bad(head, "unterminated mode list"))?;
            match sep.tok {
                Tok::Punct(',') => continue,
                Tok::Punct(')') => break,
                _ => return Err(bad(sep, "expected ',' or ')'")),
            }
        }
    }
    if let Some(t) = it.next() {
        if t.tok != Tok::Eof {
            return Err(bad(t, "trailing input after query"));
        }
    }
    Ok(QueryDirective { name, modes })
}

fn parse_filters(body: &str, line: usize, col: usize) -> Result<Vec<FilterDirective>> {
    let toks = lex(body, line, col)?;
    let bad = |t: &Token, msg: &str| Error::Syntax { line: t.line, col: t.col, msg: msg.to_string() };
    let mut out = Vec::new();
    let mut k = 0;
    loop {
        let t = &toks[k];
        if matches!(t.tok, Tok::Eof) {
            break;
        }
        if matches!(t.tok, Tok::End | Tok::Punct(',')) {
            k += 1;
            continue;
        }
        let name = match &t.tok {
            Tok::Name(n) => n.clone(),
            Tok::Int(n) => n.clone(),
            Tok::Punct('[') if toks[k + 1].tok == Tok::Punct(']') => {
                k += 1;
                "[]".to_string()
            }
            _ => return Err(bad(t, "expected a symbol name")),
        };
        k += 1;
        let mut arity = None;
        let mut eq = &toks[k];
        // `name/2 = [...]` lexes as name, "/", int, "=" or with "/" glued.
        if let Tok::Name(op) = &eq.tok {
            if op == "/" {
                match &toks[k + 1].tok {
                    Tok::Int(n) => arity = n.parse().ok(),
                    _ => return Err(bad(&toks[k + 1], "expected an arity")),
                }
                k += 2;
                eq = &toks[k];
            }
        }
        match &eq.tok {
            Tok::Name(op) if op == "=" => k += 1,
            _ => return Err(bad(eq, "expected '='")),
        }
        if toks[k].tok != Tok::Punct('[') {
            return Err(bad(&toks[k], "expected '['"));
        }
        k += 1;
        let mut keep = Vec::new();
        loop {
            let t = &toks[k];
            k += 1;
            match &t.tok {
                Tok::Punct(']') => break,
                Tok::Punct(',') => {}
                Tok::Int(n) => keep.push(n.parse::<usize>().map_err(|_| bad(t, "bad index"))?),
                _ => return Err(bad(t, "expected an argument index")),
            }
        }
        out.push(FilterDirective { name, arity, keep, line });
    }
    Ok(out)
}

/// Reads the `%query:` and `%filter:` directives of a program file.
pub fn parse_query_spec(src: &str) -> Result<QuerySpec> {
    let mut spec = QuerySpec::default();
    for (ln, line) in src.lines().enumerate() {
        let trimmed = line.trim_start();
        if !trimmed.starts_with('%') {
            continue;
        }
        let offset = line.len() - trimmed.len();
        let mut marks: Vec<(usize, &str)> = Vec::new();
        for key in ["%query:", "%filter:"] {
            marks.extend(trimmed.match_indices(key).map(|(i, _)| (i, key)));
        }
        marks.sort();
        for (j, &(start, key)) in marks.iter().enumerate() {
            let end = marks.get(j + 1).map_or(trimmed.len(), |m| m.0);
            let body = &trimmed[start + key.len()..end];
            let col = offset + start + key.len() + 1;
            if key == "%query:" {
                spec.queries.push(parse_modes(body, ln + 1, col)?);
            } else {
                spec.filters.extend(parse_filters(body, ln + 1, col)?);
            }
        }
    }
    Ok(spec)
}

// ---------------------------------------------------------------------------
// printing

fn quote_name(n: &str) -> String {
    let plain =
        n.chars().next().is_some_and(|c| c.is_lowercase()) && n.chars().all(|c| c.is_alphanumeric() || c == '_');
    let digits = !n.is_empty() && n.chars().all(|c| c.is_ascii_digit());
    let symbolic = !n.is_empty() && n.chars().all(|c| SYMBOL_CHARS.contains(c)) && n != ".";
    if plain || digits || symbolic || n == "[]" {
        n.to_string()
    } else {
        format!("'{}'", n.replace('\'', "''"))
    }
}

/// Prints a term in Prolog syntax, using list notation for `'.'/2`.
pub fn print_term(t: &Term) -> String {
    match t {
        Term::Var(v) => v.name.to_string(),
        Term::App(f, args) if &*f.name == "." && args.len() == 2 => {
            let mut items = vec![print_term(&args[0])];
            let mut tail = &args[1];
            loop {
                match tail {
                    Term::App(g, a) if &*g.name == "." && a.len() == 2 => {
                        items.push(print_term(&a[0]));
                        tail = &a[1];
                    }
                    Term::App(g, a) if &*g.name == "[]" && a.is_empty() => {
                        return format!("[{}]", items.join(", "));
                    }
                    _ => return format!("[{}|{}]", items.join(", "), print_term(tail)),
                }
            }
        }
        Term::App(f, args) => {
            if args.is_empty() {
                quote_name(&f.name)
            } else {
                let a: Vec<String> = args.iter().map(print_term).collect();
                format!("{}({})", quote_name(&f.name), a.join(", "))
            }
        }
    }
}

pub fn print_atom(a: &Atom) -> String {
    if a.args.is_empty() {
        quote_name(&a.pred.name)
    } else {
        let args: Vec<String> = a.args.iter().map(print_term).collect();
        format!("{}({})", quote_name(&a.pred.name), args.join(", "))
    }
}

pub fn print_clause(c: &Clause) -> String {
    if c.body.is_empty() {
        format!("{}.", print_atom(&c.head))
    } else {
        let b: Vec<String> = c.body.iter().map(print_atom).collect();
        format!("{} :- {}.", print_atom(&c.head), b.join(", "))
    }
}

/// True if `s` is a predicate symbol of the program signature.
pub fn is_predicate(s: &Symbol) -> bool {
    s.kind == SymbolKind::Predicate
}
