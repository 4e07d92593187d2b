//! A second interpreter, written straight against the syntax tree.
//!
//! It fixes a tape length `L`, runs every one of the `2^L` tapes
//! deterministically in a flat loop and counts traces. When some tape runs
//! dry, `L` grows and the loop starts over.

use num_bigint::BigInt;
use num_rational::BigRational;
use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;
use ucrc::behavior::{Environment, Node, Obs, View};
use ucrc::bits::Bits;
use ucrc::lang::{BinOp, Expr, OracleDecl, OracleKind, Pattern, Role, Stmt, WholeProgram};
use ucrc::semantics::{Budget, Event, Trace};

/// Exact trace distribution from tape counting.
#[derive(Debug)]
pub struct Flat {
    pub tape_bits: u32,
    pub counts: BTreeMap<Trace, u64>,
}

impl Flat {
    pub fn tapes(&self) -> u64 {
        1u64 << self.tape_bits
    }

    pub fn prob(&self, t: &Trace) -> BigRational {
        let c = self.counts.get(t).copied().unwrap_or(0);
        BigRational::new(BigInt::from(c), BigInt::from(1u8) << self.tape_bits)
    }

    pub fn dist(&self) -> BTreeMap<Trace, BigRational> {
        self.counts
            .keys()
            .map(|t| (t.clone(), self.prob(t)))
            .collect()
    }
}

/// Tape ran out; the run needs at least this many bits.
struct Dry(u32);

enum End {
    Ret(Vec<Bits>),
    Yield,
    Timeout,
}

type Loc = (usize, usize);

struct Machine<'a> {
    w: &'a WholeProgram,
    n: u32,
    limit: Option<u64>,
    tape: u64,
    len: u32,
    pos: u32,
    steps: u64,
    vars: HashMap<(Loc, u32), HashMap<String, Bits>>,
    alloc: HashMap<Loc, u32>,
    tables: HashMap<(usize, String), Vec<Vec<Bits>>>,
}

fn idx_width(bound: u32) -> u32 {
    (1..64).find(|&w| (1u64 << w) >= bound as u64).unwrap()
}

fn bound_of(w: &WholeProgram, (c, o): Loc) -> Option<u32> {
    let p = &w.components[c].program;
    let r = p.oracles[o].replication.as_ref()?;
    Some(p.replications.iter().find(|x| &x.index == r).unwrap().bound)
}

fn find_oracle(w: &WholeProgram, from: usize, name: &str) -> Loc {
    let mut order = vec![from];
    order.extend((0..w.components.len()).filter(|&c| c != from));
    for c in order {
        if let Some(o) = w.components[c]
            .program
            .oracles
            .iter()
            .position(|x| x.name == name)
        {
            return (c, o);
        }
    }
    panic!("no oracle {name}")
}

fn binds(s: &Stmt, out: &mut Vec<String>) {
    match s {
        Stmt::Sample { var, next, .. } | Stmt::Let { var, next, .. } => {
            out.push(var.clone());
            binds(next, out);
        }
        Stmt::Insert { next, .. } => binds(next, out),
        Stmt::Get {
            pattern, then, els, ..
        } => {
            for p in pattern {
                if let Pattern::Bind(v) = p {
                    out.push(v.clone());
                }
            }
            binds(then, out);
            binds(els, out);
        }
        Stmt::Find {
            index, then, els, ..
        } => {
            out.push(index.clone());
            binds(then, out);
            binds(els, out);
        }
        Stmt::If { then, els, .. } => {
            binds(then, out);
            binds(els, out);
        }
        _ => {}
    }
}

fn is_local(d: &OracleDecl, v: &str) -> bool {
    let mut names: Vec<String> = d.params.iter().map(|p| p.name.clone()).collect();
    binds(&d.body, &mut names);
    names.iter().any(|x| x == v)
}

fn is_find_index(d: &OracleDecl, v: &str) -> bool {
    fn go(s: &Stmt, v: &str) -> bool {
        match s {
            Stmt::Find {
                index, then, els, ..
            } => index == v || go(then, v) || go(els, v),
            Stmt::Sample { next, .. } | Stmt::Let { next, .. } | Stmt::Insert { next, .. } => {
                go(next, v)
            }
            Stmt::Get { then, els, .. } | Stmt::If { then, els, .. } => go(then, v) || go(els, v),
            _ => false,
        }
    }
    go(&d.body, v)
}

impl Machine<'_> {
    fn decl(&self, (c, o): Loc) -> &OracleDecl {
        &self.w.components[c].program.oracles[o]
    }

    fn tick(&mut self, k: u64) -> bool {
        self.steps += k;
        self.limit.is_none_or(|l| self.steps <= l)
    }

    fn draw(&mut self, k: u32) -> Result<Bits, Dry> {
        if self.pos + k > self.len {
            return Err(Dry(self.pos + k));
        }
        let v = if k == 0 {
            0
        } else {
            (self.tape >> self.pos) & ((1u64 << k) - 1)
        };
        self.pos += k;
        Ok(Bits::new(v, k))
    }

    fn var(&self, at: Loc, inst: u32, v: &str) -> Option<Bits> {
        self.vars.get(&(at, inst)).and_then(|m| m.get(v)).copied()
    }

    fn set(&mut self, at: Loc, inst: u32, v: &str, b: Bits) {
        self.vars
            .entry((at, inst))
            .or_default()
            .insert(v.to_string(), b);
    }

    fn foreign(&self, at: Loc, inst: u32, var: &str, index: &Option<String>) -> (Loc, u32) {
        let c = at.0;
        let perm = self.w.components[c]
            .program
            .reads
            .iter()
            .find(|r| r.var == var)
            .expect("read permission");
        let target = find_oracle(self.w, c, &perm.oracle);
        let d = self.decl(at);
        let i = match index {
            None => 1,
            Some(ix) if is_find_index(d, ix) => {
                self.var(at, inst, ix).expect("find index").value() as u32 + 1
            }
            Some(ix) if d.replication.as_deref() == Some(ix.as_str()) => inst,
            Some(ix) => panic!("unknown index {ix}"),
        };
        (target, i)
    }

    fn eval(&self, e: &Expr, at: Loc, inst: u32) -> Bits {
        let d = self.decl(at);
        match e {
            Expr::Var(v) if is_local(d, v) => {
                self.var(at, inst, v).expect("local read before assignment")
            }
            Expr::Var(v) => {
                assert_eq!(d.replication.as_deref(), Some(v.as_str()));
                Bits::new(inst as u64 - 1, idx_width(bound_of(self.w, at).unwrap()))
            }
            Expr::Foreign { var, index, .. } => {
                let (t, i) = self.foreign(at, inst, var, index);
                self.var(t, i, var)
                    .expect("foreign read of undefined variable")
            }
            Expr::Lit(b) => *b,
            Expr::Zero(w) => Bits::new(0, w.at(self.n)),
            Expr::Not(x) => Bits::bit(!self.eval(x, at, inst).is_true()),
            Expr::Bin(BinOp::And, a, b) => {
                Bits::bit(self.eval(a, at, inst).is_true() && self.eval(b, at, inst).is_true())
            }
            Expr::Bin(BinOp::Or, a, b) => {
                Bits::bit(self.eval(a, at, inst).is_true() || self.eval(b, at, inst).is_true())
            }
            Expr::Bin(op, a, b) => {
                let (x, y) = (self.eval(a, at, inst), self.eval(b, at, inst));
                match op {
                    BinOp::Eq => Bits::bit(x == y),
                    BinOp::Neq => Bits::bit(x != y),
                    BinOp::Xor => {
                        assert_eq!(x.width(), y.width());
                        Bits::new(x.value() ^ y.value(), x.width())
                    }
                    BinOp::Concat => {
                        Bits::new((x.value() << y.width()) | y.value(), x.width() + y.width())
                    }
                    _ => unreachable!(),
                }
            }
            Expr::Trunc(w, x) => {
                let v = self.eval(x, at, inst);
                let k = w.at(self.n);
                Bits::new(v.value() >> (v.width() - k), k)
            }
            Expr::Inc(m, x) => {
                let v = self.eval(x, at, inst);
                Bits::new((v.value() + 1) % m, v.width())
            }
            Expr::Defined(refs) => Bits::bit(refs.iter().all(|r| {
                let (t, i) = self.foreign(at, inst, &r.var, &r.index);
                self.var(t, i, &r.var).is_some()
            })),
            Expr::Prim { name, width, args } => {
                let a: Vec<Bits> = args.iter().map(|x| self.eval(x, at, inst)).collect();
                match name.as_str() {
                    "prg" => ucrc::primitives::prg(&a[0]),
                    "prf" => ucrc::primitives::prf(&a[0], &a[1], width.unwrap().at(self.n)),
                    _ => panic!("primitive {name}"),
                }
            }
        }
    }

    fn exec(&mut self, body: &Stmt, mut at: Loc, inst: u32) -> Result<End, Dry> {
        let mut s = body;
        loop {
            match s {
                Stmt::Sample { var, width, next } => {
                    let k = width.at(self.n);
                    if !self.tick(1 + k as u64) {
                        return Ok(End::Timeout);
                    }
                    let b = self.draw(k)?;
                    self.set(at, inst, var, b);
                    s = next;
                }
                Stmt::Let { var, expr, next } => {
                    if !self.tick(1) {
                        return Ok(End::Timeout);
                    }
                    let b = self.eval(expr, at, inst);
                    self.set(at, inst, var, b);
                    s = next;
                }
                Stmt::Insert {
                    table,
                    values,
                    next,
                } => {
                    if !self.tick(1) {
                        return Ok(End::Timeout);
                    }
                    let row: Vec<Bits> = values.iter().map(|x| self.eval(x, at, inst)).collect();
                    self.tables
                        .entry((at.0, table.clone()))
                        .or_default()
                        .push(row);
                    s = next;
                }
                Stmt::Get {
                    table,
                    pattern,
                    cond,
                    then,
                    els,
                } => {
                    let rows = self
                        .tables
                        .get(&(at.0, table.clone()))
                        .cloned()
                        .unwrap_or_default();
                    let keys: Vec<Option<Bits>> = pattern
                        .iter()
                        .map(|p| match p {
                            Pattern::Match(x) => Some(self.eval(x, at, inst)),
                            Pattern::Bind(_) => None,
                        })
                        .collect();
                    let mut scanned = 0;
                    let mut hit = false;
                    for row in &rows {
                        scanned += 1;
                        if keys
                            .iter()
                            .zip(row)
                            .any(|(k, v)| k.is_some_and(|k| k != *v))
                        {
                            continue;
                        }
                        let before = self.vars.get(&(at, inst)).cloned();
                        for (p, v) in pattern.iter().zip(row) {
                            if let Pattern::Bind(x) = p {
                                self.set(at, inst, x, *v);
                            }
                        }
                        if cond
                            .as_ref()
                            .is_none_or(|c| self.eval(c, at, inst).is_true())
                        {
                            hit = true;
                            break;
                        }
                        match before {
                            Some(m) => {
                                self.vars.insert((at, inst), m);
                            }
                            None => {
                                self.vars.remove(&(at, inst));
                            }
                        }
                    }
                    if !self.tick(1 + scanned) {
                        return Ok(End::Timeout);
                    }
                    s = if hit { then } else { els };
                }
                Stmt::Find {
                    index,
                    bound,
                    cond,
                    then,
                    els,
                } => {
                    let b = bound.at(self.n);
                    let mut examined = 0;
                    let mut hit = false;
                    for j in 0..b {
                        examined += 1;
                        self.set(at, inst, index, Bits::new(j as u64, idx_width(b)));
                        if self.eval(cond, at, inst).is_true() {
                            hit = true;
                            break;
                        }
                    }
                    if !self.tick(1 + examined) {
                        return Ok(End::Timeout);
                    }
                    s = if hit { then } else { els };
                }
                Stmt::If { cond, then, els } => {
                    if !self.tick(1) {
                        return Ok(End::Timeout);
                    }
                    s = if self.eval(cond, at, inst).is_true() {
                        then
                    } else {
                        els
                    };
                }
                Stmt::Return(es) => {
                    if !self.tick(1) {
                        return Ok(End::Timeout);
                    }
                    return Ok(End::Ret(
                        es.iter().map(|x| self.eval(x, at, inst)).collect(),
                    ));
                }
                Stmt::Yield => {
                    return Ok(if self.tick(1) {
                        End::Yield
                    } else {
                        End::Timeout
                    })
                }
                Stmt::Run { oracle, args } => {
                    if !self.tick(1) {
                        return Ok(End::Timeout);
                    }
                    let vals: Vec<Bits> = args.iter().map(|x| self.eval(x, at, inst)).collect();
                    let target = find_oracle(self.w, at.0, oracle);
                    let a = self.alloc.entry(target).or_insert(0);
                    *a = (*a).max(inst);
                    let params: Vec<String> = self
                        .decl(target)
                        .params
                        .iter()
                        .map(|p| p.name.clone())
                        .collect();
                    for (p, v) in params.iter().zip(vals) {
                        self.set(target, inst, p, v);
                    }
                    at = target;
                    s = &self.w.components[at.0].program.oracles[at.1].body;
                }
            }
        }
    }

    fn call(&mut self, name: &str, args: &[Bits]) -> Result<(Role, End), Dry> {
        let at = self
            .w
            .components
            .iter()
            .enumerate()
            .find_map(|(c, comp)| {
                comp.program.exports.iter().any(|e| e == name).then(|| {
                    (
                        c,
                        comp.program
                            .oracles
                            .iter()
                            .position(|o| o.name == name)
                            .unwrap(),
                    )
                })
            })
            .expect("exported");
        let role = self.w.components[at.0].role;
        let cap = bound_of(self.w, at).unwrap_or(1);
        let used = self.alloc.get(&at).copied().unwrap_or(0);
        if used >= cap {
            return Ok((
                role,
                if self.tick(1) {
                    End::Yield
                } else {
                    End::Timeout
                },
            ));
        }
        let inst = used + 1;
        self.alloc.insert(at, inst);
        let params: Vec<String> = self
            .decl(at)
            .params
            .iter()
            .map(|p| p.name.clone())
            .collect();
        for (p, v) in params.iter().zip(args) {
            self.set(at, inst, p, *v);
        }
        let w = self.w;
        Ok((
            role,
            self.exec(&w.components[at.0].program.oracles[at.1].body, at, inst)?,
        ))
    }
}

fn project(view: View, values: &[Bits]) -> Obs {
    match view {
        View::Full => Obs::Ret(values.to_vec()),
        View::Prefix(k) => {
            let (mut v, mut w) = (0u64, 0u32);
            for b in values {
                v = (v << b.width()) | b.value();
                w += b.width();
            }
            let k = k.min(w);
            Obs::Ret(vec![Bits::new(if k == 0 { 0 } else { v >> (w - k) }, k)])
        }
    }
}

fn run_tape(
    w: &WholeProgram,
    env: &Environment,
    n: u32,
    limit: Option<u64>,
    tape: u64,
    len: u32,
) -> Result<Trace, Dry> {
    let mut m = Machine {
        w,
        n,
        limit,
        tape,
        len,
        pos: 0,
        steps: 0,
        vars: HashMap::new(),
        alloc: HashMap::new(),
        tables: HashMap::new(),
    };
    for (c, comp) in w.components.iter().enumerate() {
        for (o, d) in comp.program.oracles.iter().enumerate() {
            if d.kind == OracleKind::Init {
                m.alloc.insert((c, o), 1);
                if let End::Timeout = m.exec(&d.body, (c, o), 1)? {
                    return Ok(vec![Event::Timeout]);
                }
            }
        }
    }
    let mut trace = Vec::new();
    let mut node = &env.root;
    loop {
        match node {
            Node::Decide(b) => {
                trace.push(Event::Decide(*b));
                return Ok(trace);
            }
            Node::Call {
                action,
                branches,
                default,
            } => {
                trace.push(Event::Call {
                    oracle: Arc::clone(&action.oracle),
                    args: action.args.clone(),
                });
                let (origin, end) = m.call(&action.oracle, &action.args)?;
                let obs = match end {
                    End::Timeout => {
                        trace.push(Event::Timeout);
                        return Ok(trace);
                    }
                    End::Yield => {
                        trace.push(Event::Yield { origin });
                        Obs::Yield
                    }
                    End::Ret(values) => {
                        let o = project(env.view, &values);
                        trace.push(Event::Return { origin, values });
                        o
                    }
                };
                node = branches
                    .iter()
                    .find(|(o, _)| *o == obs)
                    .map(|(_, c)| c)
                    .unwrap_or(default);
            }
        }
    }
}

/// Counts traces over every tape. Panics past `max_bits` tape bits.
pub fn enumerate(
    w: &WholeProgram,
    env: &Environment,
    n: u32,
    budget: Budget,
    max_bits: u32,
) -> Flat {
    let limit = budget.limit(n);
    let mut len = 0;
    loop {
        assert!(len <= max_bits, "needs more than {max_bits} tape bits");
        let mut counts = BTreeMap::new();
        let mut need = 0;
        for tape in 0..(1u64 << len) {
            match run_tape(w, env, n, limit, tape, len) {
                Ok(t) => *counts.entry(t).or_insert(0) += 1,
                Err(Dry(k)) => need = need.max(k),
            }
        }
        if need == 0 {
            return Flat {
                tape_bits: len,
                counts,
            };
        }
        len = need;
    }
}
