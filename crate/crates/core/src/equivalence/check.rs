//! Deciding the relations over explicit environment lists and bounded classes.
//!
//! Over a bounded class the best distinguisher is found by backward induction
//! on the tree of (call, observation) histories: at every node the
//! environment either decides or makes the call whose observation-wise
//! continuation values sum highest. The winning tree is then re-run through
//! the ordinary enumerator so reported numbers never come from the search.

use super::profile::{Counterexample, DiffEntry, DiffProfile, EquivError, Verdict};
use super::spec::{CallSpace, EnvClass, EquivKind, EquivSpec};
use crate::behavior::canonical::{canonical_env, prefix_mass};
use crate::behavior::{behav, Action, Behavior, Environment, Node, Obs, View};
use crate::prob::{self, Dyadic, Prob};
use crate::semantics::{
    acceptance, Budget, Event, Executable, Machine, Outcome, State, Trace, TraceDist,
};
use rayon::prelude::*;
use rustc_hash::FxHashMap;
use std::collections::BTreeMap;
use std::sync::Arc;

/// Largest call space a bounded search will accept per `n`.
pub const DEFAULT_CALL_CEILING: u128 = 4096;

/// One side of a comparison.
#[derive(Clone, Copy)]
pub struct Side<'a> {
    pub exe: &'a Executable,
    pub budget: Budget,
}

fn holds_at(kind: &EquivKind, n: u32, adv: &Prob) -> bool {
    kind.bound_holds(n, adv)
}

/// The environment that replays the first differing trace and accepts on it.
fn trace_distinguisher(
    mu: &[Event],
    left: &TraceDist,
    right: &TraceDist,
    reason: &str,
) -> Counterexample {
    let body: Trace = match mu.last() {
        Some(Event::Decide(_)) | Some(Event::Timeout) => mu[..mu.len() - 1].to_vec(),
        _ => mu.to_vec(),
    };
    // a trailing call without a response is dropped; the timeout case is
    // distinguished by its parent prefix
    let body = if body.len() % 2 == 1 {
        body[..body.len() - 1].to_vec()
    } else {
        body
    };
    let env = canonical_env(&body).expect("trace prefix is well formed");
    Counterexample {
        env,
        n: left.n,
        left_one: prefix_mass(left, &body).to_ratio(),
        right_one: prefix_mass(right, &body).to_ratio(),
        reason: reason.to_string(),
    }
}

/// Compares two materialised behaviours environment by environment.
pub fn compare_behaviors(
    b1: &Behavior,
    b2: &Behavior,
    kind: &EquivKind,
) -> Result<Verdict, EquivError> {
    if b1.grid != b2.grid {
        return Err(EquivError::GridMismatch(b1.grid.clone(), b2.grid.clone()));
    }
    if b1.envs.len() != b2.envs.len()
        || b1
            .envs
            .iter()
            .zip(b2.envs.iter())
            .any(|(a, b)| a.name != b.name)
    {
        return Err(EquivError::EnvMismatch);
    }
    let mut entries = Vec::new();
    let mut counterexample = None;
    for (e, env) in b1.envs.iter().enumerate() {
        for (i, &n) in b1.grid.iter().enumerate() {
            let (d1, d2) = (&b1.slices[e][i], &b2.slices[e][i]);
            let (x, y) = (d1.bits().one, d2.bits().one);
            let adv = prob::abs(&(x.clone() - y.clone()));
            if counterexample.is_none() {
                let cx = |reason: &str| Counterexample {
                    env: env.clone(),
                    n,
                    left_one: x.clone(),
                    right_one: y.clone(),
                    reason: reason.to_string(),
                };
                counterexample = match kind {
                    EquivKind::Perfect if d1.entries != d2.entries => Some(if adv > prob::zero() {
                        cx("final-bit distributions differ")
                    } else {
                        let mut diff: Vec<&Trace> = d1
                            .entries
                            .keys()
                            .chain(d2.entries.keys())
                            .filter(|t| d1.prob(t) != d2.prob(t))
                            .collect();
                        diff.sort();
                        trace_distinguisher(diff[0], d1, d2, "trace distributions differ")
                    }),
                    EquivKind::Refinement if !d1.support_subset(d2) => {
                        let mut extra: Vec<&Trace> =
                            d1.entries.keys().filter(|t| d2.prob(t).is_zero()).collect();
                        extra.sort();
                        Some(trace_distinguisher(
                            extra[0],
                            d1,
                            d2,
                            "trace outside the right support",
                        ))
                    }
                    k if !holds_at(k, n, &adv) => Some(cx("advantage above bound")),
                    _ => None,
                };
            }
            entries.push(DiffEntry {
                env_id: env.name.clone(),
                n,
                adv,
            });
        }
    }
    let profile = DiffProfile::new(entries);
    Ok(Verdict {
        holds: counterexample.is_none(),
        kind: kind.clone(),
        monotone: profile.non_increasing(),
        profile,
        counterexample,
    })
}

/// Signed dyadic used by the search.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Sd {
    num: i128,
    exp: u32,
}

impl Sd {
    const ZERO: Sd = Sd { num: 0, exp: 0 };

    fn of(d: Dyadic) -> Sd {
        let (num, exp) = d.parts();
        Sd {
            num: num as i128,
            exp,
        }
    }

    fn align(self, o: Sd) -> (i128, i128, u32) {
        let exp = self.exp.max(o.exp);
        (self.num << (exp - self.exp), o.num << (exp - o.exp), exp)
    }

    fn add(self, o: Sd) -> Sd {
        let (a, b, exp) = self.align(o);
        Sd { num: a + b, exp }
    }

    fn sub(self, o: Sd) -> Sd {
        let (a, b, exp) = self.align(o);
        Sd { num: a - b, exp }
    }

    fn neg(self) -> Sd {
        Sd {
            num: -self.num,
            exp: self.exp,
        }
    }

    fn gt(self, o: Sd) -> bool {
        let (a, b, _) = self.align(o);
        a > b
    }

    fn to_prob(self) -> Prob {
        Prob::new(
            self.num.into(),
            num_bigint::BigInt::from(1) << self.exp as usize,
        )
    }
}

type Group = Vec<(State, Dyadic)>;

fn mass(g: &Group) -> Dyadic {
    g.iter().map(|(_, w)| *w).sum()
}

fn merge(g: Group) -> Group {
    if g.len() < 2 {
        return g;
    }
    let mut index: FxHashMap<State, usize> = FxHashMap::default();
    let mut out: Group = Vec::new();
    for (s, w) in g {
        match index.get(&s) {
            Some(&i) => out[i].1 = out[i].1.add(w),
            None => {
                index.insert(s.clone(), out.len());
                out.push((s, w));
            }
        }
    }
    out
}

fn start(m: &Machine) -> Result<(Group, Dyadic), EquivError> {
    let mut live = Vec::new();
    let mut lost = Dyadic::ZERO;
    for b in m.initial()? {
        if b.outcome == Outcome::Timeout {
            lost = lost.add(b.weight);
        } else {
            live.push((b.state, b.weight));
        }
    }
    Ok((merge(live), lost))
}

/// Outcomes of `a` on every state of a group, by full outcome.
fn step(m: &Machine, g: &Group, a: &Action) -> Result<BTreeMap<OutcomeKey, Group>, EquivError> {
    let mut out: BTreeMap<OutcomeKey, Group> = BTreeMap::new();
    for (s, w) in g {
        for b in m.call(s, &a.oracle, &a.args)? {
            out.entry(OutcomeKey::of(&b.outcome))
                .or_default()
                .push((b.state, w.mul(b.weight)));
        }
    }
    Ok(out.into_iter().map(|(k, g)| (k, merge(g))).collect())
}

/// Orderable form of an outcome.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum OutcomeKey {
    Ret(Vec<crate::bits::Bits>),
    Yield,
    Timeout,
}

impl OutcomeKey {
    fn of(o: &Outcome) -> OutcomeKey {
        match o {
            Outcome::Return(v) => OutcomeKey::Ret(v.clone()),
            Outcome::Yield => OutcomeKey::Yield,
            Outcome::Timeout => OutcomeKey::Timeout,
        }
    }

    fn outcome(&self) -> Outcome {
        match self {
            OutcomeKey::Ret(v) => Outcome::Return(v.clone()),
            OutcomeKey::Yield => Outcome::Yield,
            OutcomeKey::Timeout => Outcome::Timeout,
        }
    }

    fn event(&self, origin: crate::lang::Role) -> Event {
        match self {
            OutcomeKey::Ret(v) => Event::Return {
                origin,
                values: v.clone(),
            },
            OutcomeKey::Yield => Event::Yield { origin },
            OutcomeKey::Timeout => Event::Timeout,
        }
    }
}

struct Search<'a> {
    ml: Machine,
    mr: Machine,
    view: View,
    actions: &'a [Action],
}

/// Per observation, the left and right groups after one call.
type Split = BTreeMap<Obs, (Group, Group)>;

/// Accepting here is worth `sign * (ml - mr)`; rejecting is worth nothing.
fn leaf(ml: Dyadic, mr: Dyadic, sign: bool) -> (Sd, Node) {
    let here = Sd::of(ml).sub(Sd::of(mr));
    let here = if sign { here } else { here.neg() };
    if here.gt(Sd::ZERO) {
        (here, Node::Decide(true))
    } else {
        (Sd::ZERO, Node::Decide(false))
    }
}

impl Search<'_> {
    fn split(&self, l: &Group, r: &Group, a: &Action) -> Result<Split, EquivError> {
        let mut out: Split = BTreeMap::new();
        for (k, g) in step(&self.ml, l, a)? {
            if let Some(o) = self.view.observe(&k.outcome()) {
                out.entry(o).or_default().0.extend(g);
            }
        }
        for (k, g) in step(&self.mr, r, a)? {
            if let Some(o) = self.view.observe(&k.outcome()) {
                out.entry(o).or_default().1.extend(g);
            }
        }
        Ok(out
            .into_iter()
            .map(|(o, (a, b))| (o, (merge(a), merge(b))))
            .collect())
    }

    /// Best achievable `sign * (Pr_l[1] - Pr_r[1])` restricted to this node,
    /// with a tree attaining it.
    fn best(
        &self,
        l: &Group,
        r: &Group,
        depth: usize,
        sign: bool,
    ) -> Result<(Sd, Node), EquivError> {
        let mut best = leaf(mass(l), mass(r), sign);
        if depth == 0 {
            return Ok(best);
        }
        for a in self.actions {
            let (v, branches) = if depth == 1 {
                let mut total = Sd::ZERO;
                let mut branches = Vec::new();
                for (o, (ml, mr)) in self.masses(l, r, a)? {
                    let (v, node) = leaf(ml, mr, sign);
                    total = total.add(v);
                    if node != Node::Decide(false) {
                        branches.push((o, node));
                    }
                }
                (total, branches)
            } else {
                let mut total = Sd::ZERO;
                let mut branches = Vec::new();
                for (o, (gl, gr)) in self.split(l, r, a)? {
                    let (v, node) = self.best(&gl, &gr, depth - 1, sign)?;
                    total = total.add(v);
                    if node != Node::Decide(false) {
                        branches.push((o, node));
                    }
                }
                (total, branches)
            };
            if v.gt(best.0) {
                best = (v, Node::call(a.clone(), branches, Node::Decide(false)));
            }
        }
        Ok(best)
    }

    /// Per observation, the masses after one call; states are not kept.
    fn masses(
        &self,
        l: &Group,
        r: &Group,
        a: &Action,
    ) -> Result<BTreeMap<Obs, (Dyadic, Dyadic)>, EquivError> {
        let mut out: BTreeMap<Obs, (Dyadic, Dyadic)> = BTreeMap::new();
        for (side, m, g) in [(0, &self.ml, l), (1, &self.mr, r)] {
            for (s, w) in g {
                for b in m.call(s, &a.oracle, &a.args)? {
                    if let Some(o) = self.view.observe(&b.outcome) {
                        let e = out.entry(o).or_insert((Dyadic::ZERO, Dyadic::ZERO));
                        let slot = if side == 0 { &mut e.0 } else { &mut e.1 };
                        *slot = slot.add(w.mul(b.weight));
                    }
                }
            }
        }
        Ok(out)
    }

    /// First history (in canonical order) whose masses violate the relation.
    fn exact(
        &self,
        l: &Group,
        r: &Group,
        depth: usize,
        refine: bool,
        history: &mut Trace,
    ) -> Result<Option<Trace>, EquivError> {
        if depth == 0 {
            return Ok(None);
        }
        for a in self.actions {
            let sl = step(&self.ml, l, a)?;
            let sr = step(&self.mr, r, a)?;
            let origin = self
                .ml
                .origin(&a.oracle)
                .unwrap_or(crate::lang::Role::Program);
            let mut keys: Vec<&OutcomeKey> = sl.keys().chain(sr.keys()).collect();
            keys.sort();
            keys.dedup();
            let empty = Group::new();
            history.push(Event::Call {
                oracle: a.oracle.clone(),
                args: a.args.clone(),
            });
            for k in keys {
                let gl = sl.get(k).unwrap_or(&empty);
                let gr = sr.get(k).unwrap_or(&empty);
                let (ml, mr) = (mass(gl), mass(gr));
                let bad = if refine {
                    !ml.is_zero() && mr.is_zero()
                } else {
                    ml != mr
                };
                history.push(k.event(origin));
                if bad {
                    return Ok(Some(history.clone()));
                }
                if *k != OutcomeKey::Timeout {
                    if let Some(h) = self.exact(gl, gr, depth - 1, refine, history)? {
                        return Ok(Some(h));
                    }
                }
                history.pop();
            }
            history.pop();
        }
        Ok(None)
    }
}

/// Environment accepting exactly when `h` (minus a trailing timeout) was replayed.
fn history_env(h: &[Event]) -> Environment {
    if let Some(Event::Timeout) = h.last() {
        let body = &h[..h.len() - 2];
        let Some(Event::Call { oracle, args }) = h.get(h.len() - 2) else {
            unreachable!("timeout follows a call")
        };
        let mut node = Node::call(
            Action {
                oracle: oracle.clone(),
                args: args.clone(),
            },
            vec![],
            Node::Decide(true),
        );
        let pairs: Vec<&[Event]> = body.chunks(2).collect();
        for p in pairs.into_iter().rev() {
            let Event::Call { oracle, args } = &p[0] else {
                unreachable!()
            };
            let obs = match &p[1] {
                Event::Return { values, .. } => Obs::Ret(values.clone()),
                _ => Obs::Yield,
            };
            node = Node::call(
                Action {
                    oracle: oracle.clone(),
                    args: args.clone(),
                },
                vec![(obs, node)],
                Node::Decide(false),
            );
        }
        Environment::new("distinguisher", View::Full, node)
    } else {
        let mut e = canonical_env(h).expect("history is well formed");
        e.name = "distinguisher".into();
        e
    }
}

/// Exact acceptance probabilities of one environment on both sides.
pub fn evaluate(
    left: Side,
    right: Side,
    env: &Environment,
    n: u32,
) -> Result<(Prob, Prob), EquivError> {
    let (a, _) = acceptance(left.exe, env, n, left.budget)?;
    let (b, _) = acceptance(right.exe, env, n, right.budget)?;
    Ok((a.to_ratio(), b.to_ratio()))
}

/// Worst distinguisher of the bounded class at one `n`, with its exact advantage.
pub fn worst_bounded(
    left: Side,
    right: Side,
    depth: usize,
    view: View,
    calls: &CallSpace,
    n: u32,
    ceiling: u128,
) -> Result<(Environment, Prob, Prob), EquivError> {
    let actions = calls.actions(left.exe, n, ceiling)?;
    let s = Search {
        ml: left.exe.machine(n, left.budget),
        mr: right.exe.machine(n, right.budget),
        view,
        actions: &actions,
    };
    let (l, _) = start(&s.ml)?;
    let (r, _) = start(&s.mr)?;
    let mut signs: Vec<(Sd, Node)> = [true, false]
        .par_iter()
        .map(|&sg| s.best(&l, &r, depth, sg))
        .collect::<Result<_, _>>()?;
    let pick = if signs[1].0.gt(signs[0].0) { 1 } else { 0 };
    let (v, root) = signs.swap_remove(pick);
    let env = Environment::new(format!("worst-n{n}"), view, root);
    let (x, y) = evaluate(left, right, &env, n)?;
    debug_assert_eq!(prob::abs(&(x.clone() - y.clone())), v.to_prob());
    Ok((env, x, y))
}

/// First violating history of Perfect (or, with `refine`, Refinement) over the class.
fn exact_bounded(
    left: Side,
    right: Side,
    depth: usize,
    calls: &CallSpace,
    n: u32,
    refine: bool,
    ceiling: u128,
) -> Result<Option<Counterexample>, EquivError> {
    let actions = calls.actions(left.exe, n, ceiling)?;
    let s = Search {
        ml: left.exe.machine(n, left.budget),
        mr: right.exe.machine(n, right.budget),
        view: View::Full,
        actions: &actions,
    };
    let (l, lost_l) = start(&s.ml)?;
    let (r, lost_r) = start(&s.mr)?;
    let root_bad = if refine {
        !lost_l.is_zero() && lost_r.is_zero()
    } else {
        lost_l != lost_r
    };
    if root_bad {
        let env = Environment::new("distinguisher", View::Full, Node::Decide(true));
        let (x, y) = evaluate(left, right, &env, n)?;
        return Ok(Some(Counterexample {
            env,
            n,
            left_one: x,
            right_one: y,
            reason: "initialisation diverges".into(),
        }));
    }
    let Some(h) = s.exact(&l, &r, depth, refine, &mut Vec::new())? else {
        return Ok(None);
    };
    let env = history_env(&h);
    let (x, y) = evaluate(left, right, &env, n)?;
    Ok(Some(Counterexample {
        env,
        n,
        left_one: x,
        right_one: y,
        reason: if refine {
            format!(
                "history outside the right support: {}",
                crate::semantics::format_trace(&h)
            )
        } else {
            format!(
                "history masses differ: {}",
                crate::semantics::format_trace(&h)
            )
        },
    }))
}

/// Decides `left ≡ right` under `spec` on every grid point.
pub fn equiv_check(
    left: Side,
    right: Side,
    spec: &EquivSpec,
    grid: &[u32],
    ceiling: u128,
) -> Result<Verdict, EquivError> {
    match &spec.class {
        EnvClass::Explicit(envs) => {
            let (a, b) = rayon::join(
                || behav(left.exe, envs.clone(), grid, left.budget),
                || behav(right.exe, envs.clone(), grid, right.budget),
            );
            compare_behaviors(&a?, &b?, &spec.kind)
        }
        EnvClass::Bounded { depth, view, calls } => {
            for &n in grid {
                calls.actions(left.exe, n, ceiling)?;
            }
            let per_n: Vec<(Environment, Prob, Prob)> = grid
                .par_iter()
                .map(|&n| worst_bounded(left, right, *depth, *view, calls, n, ceiling))
                .collect::<Result<_, _>>()?;
            let mut entries = Vec::new();
            let mut counterexample = None;
            for (&n, (env, x, y)) in grid.iter().zip(&per_n) {
                let adv = prob::abs(&(x.clone() - y.clone()));
                if counterexample.is_none() && !holds_at(&spec.kind, n, &adv) {
                    counterexample = Some(Counterexample {
                        env: env.clone(),
                        n,
                        left_one: x.clone(),
                        right_one: y.clone(),
                        reason: "advantage above bound".into(),
                    });
                }
                entries.push(DiffEntry {
                    env_id: env.name.clone(),
                    n,
                    adv,
                });
            }
            if counterexample.is_none() {
                let refine = match spec.kind {
                    EquivKind::Perfect => Some(false),
                    EquivKind::Refinement => Some(true),
                    _ => None,
                };
                if let Some(refine) = refine {
                    for &n in grid {
                        if let Some(c) =
                            exact_bounded(left, right, *depth, calls, n, refine, ceiling)?
                        {
                            counterexample = Some(c);
                            break;
                        }
                    }
                }
            }
            let profile = DiffProfile::new(entries);
            Ok(Verdict {
                holds: counterexample.is_none(),
                kind: spec.kind.clone(),
                monotone: profile.non_increasing(),
                profile,
                counterexample,
            })
        }
    }
}

/// Convenience for explicit lists.
pub fn explicit(envs: Vec<Environment>) -> EnvClass {
    EnvClass::Explicit(Arc::new(envs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::behavior::EnvAlphabet;
    use crate::bits::Bits;
    use crate::lang::{parse_program, WholeProgram};
    use crate::prob::ratio;

    fn exe(src: &str) -> Executable {
        Executable::new(&WholeProgram::single(parse_program(src).unwrap())).unwrap()
    }

    fn side(e: &Executable) -> Side<'_> {
        Side {
            exe: e,
            budget: Budget::Unbounded,
        }
    }

    fn alphabet() -> EnvAlphabet {
        EnvAlphabet {
            calls: vec![Action::new("O", vec![])],
            responses: vec![
                Obs::Ret(vec![Bits::new(0, 1)]),
                Obs::Ret(vec![Bits::new(1, 1)]),
            ],
        }
    }

    const COIN: &str = "let O() := b <- sample(1); return(b).";
    const BIASED: &str =
        "let O() := b <- sample(2); if b == 0b11 then return(0b1) else return(0b0).";
    const ONE: &str = "let O() := return(0b1).";

    #[test]
    fn reflexive_under_every_kind() {
        let c = exe(COIN);
        let spec_kinds = ["perfect", "refine", "stat:1/4", "comp:c=1,N=0"];
        for k in spec_kinds {
            let spec = EquivSpec {
                kind: EquivKind::parse(k).unwrap(),
                class: explicit(alphabet().enumerate(2, 1000).unwrap()),
            };
            assert!(
                equiv_check(side(&c), side(&c), &spec, &[1, 2], 100)
                    .unwrap()
                    .holds
            );
        }
    }

    #[test]
    fn coin_against_biased_coin() {
        let (c, b) = (exe(COIN), exe(BIASED));
        let class = explicit(alphabet().enumerate(1, 1000).unwrap());
        let v = equiv_check(
            side(&c),
            side(&b),
            &EquivSpec {
                kind: EquivKind::Perfect,
                class: class.clone(),
            },
            &[1],
            100,
        )
        .unwrap();
        assert!(!v.holds);
        assert_eq!(v.profile.curve(), vec![(1, ratio(1, 4))]);
        let cx = v.counterexample.unwrap();
        assert_eq!(cx.advantage(), ratio(1, 4));
        let stat = EquivSpec {
            kind: EquivKind::parse("stat:1/4").unwrap(),
            class,
        };
        assert!(
            equiv_check(side(&c), side(&b), &stat, &[1], 100)
                .unwrap()
                .holds
        );
    }

    #[test]
    fn bounded_search_matches_explicit_enumeration() {
        let (c, b, o) = (exe(COIN), exe(BIASED), exe(ONE));
        for (x, y) in [(&c, &b), (&b, &c), (&o, &c), (&c, &o)] {
            for depth in 0..=2 {
                let ex = EquivSpec {
                    kind: EquivKind::Perfect,
                    class: explicit(alphabet().enumerate(depth, 10_000).unwrap()),
                };
                let bd = EquivSpec {
                    kind: EquivKind::Perfect,
                    class: EnvClass::Bounded {
                        depth,
                        view: View::Full,
                        calls: CallSpace::AllArgs,
                    },
                };
                let a = equiv_check(side(x), side(y), &ex, &[1], 100).unwrap();
                let z = equiv_check(side(x), side(y), &bd, &[1], 100).unwrap();
                assert_eq!(a.profile.curve(), z.profile.curve(), "depth {depth}");
                assert_eq!(a.holds, z.holds);
            }
        }
    }

    #[test]
    fn refinement_is_not_symmetric() {
        let (o, c) = (exe(ONE), exe(COIN));
        let spec = EquivSpec {
            kind: EquivKind::Refinement,
            class: explicit(alphabet().enumerate(1, 1000).unwrap()),
        };
        assert!(
            equiv_check(side(&o), side(&c), &spec, &[1], 100)
                .unwrap()
                .holds
        );
        let v = equiv_check(side(&c), side(&o), &spec, &[1], 100).unwrap();
        assert!(!v.holds);
        let bspec = EquivSpec {
            kind: EquivKind::Refinement,
            class: EnvClass::Bounded {
                depth: 1,
                view: View::Full,
                calls: CallSpace::AllArgs,
            },
        };
        assert!(
            equiv_check(side(&o), side(&c), &bspec, &[1], 100)
                .unwrap()
                .holds
        );
        let v = equiv_check(side(&c), side(&o), &bspec, &[1], 100).unwrap();
        let cx = v.counterexample.unwrap();
        assert!(cx.left_one > prob::zero());
        assert_eq!(cx.right_one, prob::zero());
    }

    #[test]
    fn perfect_counterexample_when_only_traces_differ() {
        // same final-bit behaviour under every environment, different traces
        let a = exe("let O() := return(0b1). let P() := return(0b0).");
        let b = exe("let O() := return(0b1). let P() := yield.");
        let alphabet = EnvAlphabet {
            calls: vec![Action::new("P", vec![])],
            responses: vec![],
        };
        let spec = EquivSpec {
            kind: EquivKind::Perfect,
            class: explicit(alphabet.enumerate(1, 100).unwrap()),
        };
        let v = equiv_check(side(&a), side(&b), &spec, &[1], 100).unwrap();
        assert!(!v.holds);
        assert_eq!(v.counterexample.unwrap().advantage(), prob::one());
    }
}
