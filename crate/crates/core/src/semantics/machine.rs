//! Exact small-step interpreter over resolved programs.
//!
//! A call runs one oracle invocation to completion and returns every
//! execution branch together with its probability; sampling forks the
//! branch once per value.

use super::budget::Budget;
use super::ir::*;
use crate::bits::{Bits, MAX_WIDTH};
use crate::lang::validate::index_width;
use crate::lang::{BinOp, Role};
use crate::primitives;
use crate::prob::Dyadic;
use std::sync::Arc;

/// Widest single sample the interpreter will fork on.
pub const MAX_SAMPLE_WIDTH: u32 = 24;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct State {
    /// Slots of every oracle instance, laid out by `Machine::base`.
    vars: Vec<Option<Bits>>,
    /// Per oracle, the number of instances handed out so far.
    alloc: Vec<u32>,
    /// Rows are shared between the states a sample forks.
    tables: Vec<Arc<Vec<Arc<[Bits]>>>>,
    pub steps: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Outcome {
    Return(Vec<Bits>),
    Yield,
    Timeout,
}

#[derive(Clone, Debug)]
pub struct Branch {
    pub outcome: Outcome,
    pub state: State,
    pub weight: Dyadic,
    /// Bits sampled on this branch during this call.
    pub sampled: u32,
}

#[derive(Clone, Debug)]
pub struct Machine {
    pub ir: Arc<Ir>,
    pub n: u32,
    pub limit: Option<u64>,
    /// Instances reserved per oracle: the largest replication bound.
    cap: u32,
    /// First slot of each oracle, then the total.
    base: Arc<[usize]>,
}

#[derive(Clone, Copy)]
struct Frame {
    oracle: u32,
    inst: u32,
}

impl Machine {
    pub fn new(ir: Arc<Ir>, n: u32, budget: Budget) -> Self {
        let cap = ir
            .oracles
            .iter()
            .map(|o| if o.replicated { o.bound } else { 1 })
            .max()
            .unwrap_or(1);
        let mut base = vec![0];
        for o in &ir.oracles {
            base.push(base.last().unwrap() + cap as usize * o.nslots());
        }
        Machine {
            ir,
            n,
            limit: budget.limit(n),
            cap,
            base: base.into(),
        }
    }

    fn empty_state(&self) -> State {
        State {
            vars: vec![None; *self.base.last().unwrap()],
            alloc: vec![0; self.ir.oracles.len()],
            tables: vec![Arc::new(Vec::new()); self.ir.tables.len()],
            steps: 0,
        }
    }

    fn slot_index(&self, oracle: u32, inst: u32, slot: u32) -> Option<usize> {
        if inst == 0 || inst > self.cap {
            return None;
        }
        let o = oracle as usize;
        Some(self.base[o] + (inst as usize - 1) * self.ir.oracles[o].nslots() + slot as usize)
    }

    fn err(&self, fr: Frame, message: impl Into<String>) -> ModelError {
        ModelError::Eval {
            oracle: self.ir.oracles[fr.oracle as usize].name.clone(),
            message: message.into(),
        }
    }

    /// Runs the init blocks. Every branch ends in `Return([])` or `Timeout`.
    pub fn initial(&self) -> Result<Vec<Branch>, ModelError> {
        let mut cur = vec![Branch {
            outcome: Outcome::Return(Vec::new()),
            state: self.empty_state(),
            weight: Dyadic::ONE,
            sampled: 0,
        }];
        for &o in &self.ir.inits {
            let mut next = Vec::new();
            for b in cur {
                if b.outcome == Outcome::Timeout {
                    next.push(b);
                    continue;
                }
                let mut st = b.state;
                st.alloc[o as usize] = 1;
                let fr = Frame { oracle: o, inst: 1 };
                let mut out = Vec::new();
                self.exec(
                    &self.ir.oracles[o as usize].body,
                    fr,
                    st,
                    b.weight,
                    b.sampled,
                    &mut out,
                )?;
                for mut x in out {
                    if x.outcome != Outcome::Timeout {
                        x.outcome = Outcome::Return(Vec::new());
                    }
                    next.push(x);
                }
            }
            cur = next;
        }
        Ok(cur)
    }

    /// Role of the program that answers calls to an exported oracle.
    pub fn origin(&self, oracle: &str) -> Option<Role> {
        self.ir
            .export(oracle)
            .map(|o| self.ir.oracles[o as usize].role)
    }

    /// One environment call to an exported oracle.
    pub fn call(&self, st: &State, oracle: &str, args: &[Bits]) -> Result<Vec<Branch>, ModelError> {
        let o = self
            .ir
            .export(oracle)
            .ok_or_else(|| ModelError::NotExported(oracle.to_string()))?;
        let decl = &self.ir.oracles[o as usize];
        if decl.params.len() != args.len() {
            return Err(ModelError::Arity {
                oracle: oracle.to_string(),
                expected: decl.params.len(),
                got: args.len(),
            });
        }
        for (i, ((_, w), a)) in decl.params.iter().zip(args).enumerate() {
            if w.at(self.n) != a.width() {
                return Err(ModelError::ArgWidth {
                    oracle: oracle.to_string(),
                    index: i,
                    expected: w.at(self.n),
                    got: a.width(),
                });
            }
        }
        let mut st = st.clone();
        let cap = if decl.replicated { decl.bound } else { 1 };
        let mut out = Vec::new();
        if st.alloc[o as usize] >= cap {
            // refused: the oracle has no fresh instance left
            let outcome = if self.tick(&mut st, 1) {
                Outcome::Yield
            } else {
                Outcome::Timeout
            };
            out.push(Branch {
                outcome,
                state: st,
                weight: Dyadic::ONE,
                sampled: 0,
            });
            return Ok(out);
        }
        st.alloc[o as usize] += 1;
        let fr = Frame {
            oracle: o,
            inst: st.alloc[o as usize],
        };
        for ((slot, _), a) in decl.params.iter().zip(args) {
            self.set(&mut st, fr, *slot, *a);
        }
        self.exec(&decl.body, fr, st, Dyadic::ONE, 0, &mut out)?;
        Ok(out)
    }

    /// Adds steps; false when the budget is exceeded.
    fn tick(&self, st: &mut State, k: u64) -> bool {
        st.steps += k;
        self.limit.is_none_or(|l| st.steps <= l)
    }

    fn set(&self, st: &mut State, fr: Frame, slot: u32, v: Bits) {
        let i = self
            .slot_index(fr.oracle, fr.inst, slot)
            .expect("instance within the reserved range");
        st.vars[i] = Some(v);
    }

    fn get(&self, st: &State, oracle: u32, inst: u32, slot: u32) -> Option<Bits> {
        st.vars[self.slot_index(oracle, inst, slot)?]
    }

    fn timeout(st: State, w: Dyadic, sampled: u32, out: &mut Vec<Branch>) {
        out.push(Branch {
            outcome: Outcome::Timeout,
            state: st,
            weight: w,
            sampled,
        });
    }

    fn exec<'a>(
        &'a self,
        mut s: &'a IStmt,
        mut fr: Frame,
        mut st: State,
        w: Dyadic,
        sampled: u32,
        out: &mut Vec<Branch>,
    ) -> Result<(), ModelError> {
        loop {
            match s {
                IStmt::Sample { slot, width, next } => {
                    let k = width.at(self.n);
                    if k > MAX_SAMPLE_WIDTH {
                        return Err(self.err(
                            fr,
                            format!("sample of {k} bits exceeds the enumeration limit"),
                        ));
                    }
                    if !self.tick(&mut st, 1 + k as u64) {
                        Self::timeout(st, w, sampled, out);
                        return Ok(());
                    }
                    let cw = w.shift_down(k);
                    let count = 1u64 << k;
                    let mut last = Some(st);
                    for v in 0..count {
                        let mut st2 = if v + 1 == count {
                            last.take().expect("state kept for the last value")
                        } else {
                            last.clone().expect("state kept for the last value")
                        };
                        self.set(&mut st2, fr, *slot, Bits::new(v, k));
                        self.exec(next, fr, st2, cw, sampled + k, out)?;
                    }
                    return Ok(());
                }
                IStmt::Let { slot, expr, next } => {
                    if !self.tick(&mut st, 1) {
                        Self::timeout(st, w, sampled, out);
                        return Ok(());
                    }
                    let v = self.eval(expr, fr, &st)?;
                    self.set(&mut st, fr, *slot, v);
                    s = next;
                }
                IStmt::Insert {
                    table,
                    values,
                    next,
                } => {
                    if !self.tick(&mut st, 1) {
                        Self::timeout(st, w, sampled, out);
                        return Ok(());
                    }
                    let row: Vec<Bits> = values
                        .iter()
                        .map(|e| self.eval(e, fr, &st))
                        .collect::<Result<_, _>>()?;
                    let cols = &self.ir.tables[*table as usize].columns;
                    for (c, v) in cols.iter().zip(&row) {
                        if c.at(self.n) != v.width() {
                            return Err(self.err(fr, "insert width mismatch"));
                        }
                    }
                    Arc::make_mut(&mut st.tables[*table as usize]).push(row.into());
                    s = next;
                }
                IStmt::Get {
                    table,
                    pattern,
                    cond,
                    then,
                    els,
                } => {
                    let keys: Vec<Option<Bits>> = pattern
                        .iter()
                        .map(|p| match p {
                            IPat::Match(e) => self.eval(e, fr, &st).map(Some),
                            IPat::Bind(_) => Ok(None),
                        })
                        .collect::<Result<_, _>>()?;
                    let nrows = st.tables[*table as usize].len();
                    let mut scanned = 0u64;
                    let mut hit = false;
                    for r in 0..nrows {
                        scanned += 1;
                        let row = st.tables[*table as usize][r].clone();
                        let matches = keys
                            .iter()
                            .zip(row.iter())
                            .all(|(k, v)| k.is_none_or(|k| k == *v));
                        if !matches {
                            continue;
                        }
                        let saved: Vec<(u32, Option<Bits>)> = pattern
                            .iter()
                            .filter_map(|p| match p {
                                IPat::Bind(slot) => {
                                    Some((*slot, self.get(&st, fr.oracle, fr.inst, *slot)))
                                }
                                _ => None,
                            })
                            .collect();
                        for (p, v) in pattern.iter().zip(row.iter()) {
                            if let IPat::Bind(slot) = p {
                                self.set(&mut st, fr, *slot, *v);
                            }
                        }
                        let ok = match cond {
                            Some(c) => self.eval(c, fr, &st)?.is_true(),
                            None => true,
                        };
                        if ok {
                            hit = true;
                            break;
                        }
                        for (slot, old) in saved {
                            self.restore(&mut st, fr, slot, old);
                        }
                    }
                    if !self.tick(&mut st, 1 + scanned) {
                        Self::timeout(st, w, sampled, out);
                        return Ok(());
                    }
                    s = if hit { then } else { els };
                }
                IStmt::Find {
                    slot,
                    bound,
                    cond,
                    then,
                    els,
                } => {
                    let b = bound.at(self.n);
                    let iw = index_width(b);
                    let mut hit = false;
                    let mut examined = 0u64;
                    for j in 1..=b {
                        examined += 1;
                        self.set(&mut st, fr, *slot, Bits::new(j as u64 - 1, iw));
                        if self.eval(cond, fr, &st)?.is_true() {
                            hit = true;
                            break;
                        }
                    }
                    if !self.tick(&mut st, 1 + examined) {
                        Self::timeout(st, w, sampled, out);
                        return Ok(());
                    }
                    s = if hit { then } else { els };
                }
                IStmt::If { cond, then, els } => {
                    if !self.tick(&mut st, 1) {
                        Self::timeout(st, w, sampled, out);
                        return Ok(());
                    }
                    s = if self.eval(cond, fr, &st)?.is_true() {
                        then
                    } else {
                        els
                    };
                }
                IStmt::Return(es) => {
                    if !self.tick(&mut st, 1) {
                        Self::timeout(st, w, sampled, out);
                        return Ok(());
                    }
                    let vals = es
                        .iter()
                        .map(|e| self.eval(e, fr, &st))
                        .collect::<Result<_, _>>()?;
                    out.push(Branch {
                        outcome: Outcome::Return(vals),
                        state: st,
                        weight: w,
                        sampled,
                    });
                    return Ok(());
                }
                IStmt::Yield => {
                    let outcome = if self.tick(&mut st, 1) {
                        Outcome::Yield
                    } else {
                        Outcome::Timeout
                    };
                    out.push(Branch {
                        outcome,
                        state: st,
                        weight: w,
                        sampled,
                    });
                    return Ok(());
                }
                IStmt::Run { oracle, args } => {
                    if !self.tick(&mut st, 1) {
                        Self::timeout(st, w, sampled, out);
                        return Ok(());
                    }
                    let vals: Vec<Bits> = args
                        .iter()
                        .map(|e| self.eval(e, fr, &st))
                        .collect::<Result<_, _>>()?;
                    let target = &self.ir.oracles[*oracle as usize];
                    let nfr = Frame {
                        oracle: *oracle,
                        inst: fr.inst,
                    };
                    if st.alloc[*oracle as usize] < fr.inst {
                        st.alloc[*oracle as usize] = fr.inst;
                    }
                    for ((slot, pw), v) in target.params.iter().zip(vals) {
                        if pw.at(self.n) != v.width() {
                            return Err(self.err(
                                fr,
                                format!("argument width mismatch running `{}`", target.name),
                            ));
                        }
                        self.set(&mut st, nfr, *slot, v);
                    }
                    fr = nfr;
                    s = &target.body;
                }
            }
        }
    }

    fn restore(&self, st: &mut State, fr: Frame, slot: u32, old: Option<Bits>) {
        if let Some(i) = self.slot_index(fr.oracle, fr.inst, slot) {
            st.vars[i] = old;
        }
    }

    fn instance_of(&self, ix: IIndex, fr: Frame, st: &State) -> Result<u32, ModelError> {
        Ok(match ix {
            IIndex::One => 1,
            IIndex::Current => fr.inst,
            IIndex::Slot(s) => {
                let v = self
                    .get(st, fr.oracle, fr.inst, s)
                    .ok_or_else(|| self.err(fr, "find index read before assignment"))?;
                v.value() as u32 + 1
            }
        })
    }

    fn eval(&self, e: &IExpr, fr: Frame, st: &State) -> Result<Bits, ModelError> {
        Ok(match e {
            IExpr::Local(s) => self.get(st, fr.oracle, fr.inst, *s).ok_or_else(|| {
                let name = &self.ir.oracles[fr.oracle as usize].slot_names[*s as usize];
                self.err(fr, format!("variable `{name}` read before assignment"))
            })?,
            IExpr::Instance(w) => Bits::new(fr.inst as u64 - 1, *w),
            IExpr::Foreign {
                oracle,
                slot,
                index,
            } => {
                let inst = self.instance_of(*index, fr, st)?;
                self.get(st, *oracle, inst, *slot).ok_or_else(|| {
                    let o = &self.ir.oracles[*oracle as usize];
                    self.err(
                        fr,
                        format!(
                            "foreign read of undefined `{}` of `{}`[{inst}]",
                            o.slot_names[*slot as usize], o.name
                        ),
                    )
                })?
            }
            IExpr::Lit(b) => *b,
            IExpr::Zero(w) => Bits::zero(w.at(self.n)),
            IExpr::Not(x) => {
                let v = self.eval(x, fr, st)?;
                Bits::bit(!v.is_true())
            }
            IExpr::Bin(op, a, b) => match op {
                BinOp::And => {
                    if !self.eval(a, fr, st)?.is_true() {
                        Bits::bit(false)
                    } else {
                        Bits::bit(self.eval(b, fr, st)?.is_true())
                    }
                }
                BinOp::Or => {
                    if self.eval(a, fr, st)?.is_true() {
                        Bits::bit(true)
                    } else {
                        Bits::bit(self.eval(b, fr, st)?.is_true())
                    }
                }
                _ => {
                    let x = self.eval(a, fr, st)?;
                    let y = self.eval(b, fr, st)?;
                    match op {
                        BinOp::Eq | BinOp::Neq => {
                            if x.width() != y.width() {
                                return Err(self.err(fr, "comparison of different widths"));
                            }
                            Bits::bit((x == y) == (*op == BinOp::Eq))
                        }
                        BinOp::Xor => x
                            .xor(&y)
                            .ok_or_else(|| self.err(fr, "xor of different widths"))?,
                        BinOp::Concat => x.concat(&y).ok_or_else(|| {
                            self.err(fr, format!("concatenation wider than {MAX_WIDTH} bits"))
                        })?,
                        _ => unreachable!(),
                    }
                }
            },
            IExpr::Trunc(w, x) => {
                let v = self.eval(x, fr, st)?;
                v.truncate(w.at(self.n))
                    .ok_or_else(|| self.err(fr, "truncation beyond width"))?
            }
            IExpr::Inc(m, x) => self.eval(x, fr, st)?.increment_mod(*m),
            IExpr::Defined(refs) => {
                let mut all = true;
                for (o, s, ix) in refs {
                    let inst = self.instance_of(*ix, fr, st)?;
                    if self.get(st, *o, inst, *s).is_none() {
                        all = false;
                        break;
                    }
                }
                Bits::bit(all)
            }
            IExpr::Prg(x) => {
                let s = self.eval(x, fr, st)?;
                if s.width() == 0 || 4 * s.width() > MAX_WIDTH {
                    return Err(self.err(fr, "prg seed width out of range"));
                }
                primitives::prg(&s)
            }
            IExpr::Prf(w, k, x) => {
                let k = self.eval(k, fr, st)?;
                let x = self.eval(x, fr, st)?;
                if k.width() == 0 {
                    return Err(self.err(fr, "prf key must be nonempty"));
                }
                primitives::prf(&k, &x, w.at(self.n))
            }
        })
    }
}

/// Merges branches with equal outcome and state, summing weights.
pub fn merge(branches: Vec<Branch>) -> Vec<Branch> {
    let mut index: rustc_hash::FxHashMap<(Outcome, State), usize> =
        rustc_hash::FxHashMap::default();
    let mut out: Vec<Branch> = Vec::new();
    for b in branches {
        let key = (b.outcome.clone(), b.state.clone());
        match index.get(&key) {
            Some(&i) => out[i].weight = out[i].weight.add(b.weight),
            None => {
                index.insert(key, out.len());
                out.push(b);
            }
        }
    }
    out
}
