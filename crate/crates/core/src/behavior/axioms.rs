//! Consistency checks of the trace model against Axioms 1, 2 and 4.
//!
//! Axiom 3 (non-probabilistic environments suffice) is what justifies
//! representing environments as decision trees; it is assumed, not tested.

use super::canonical::{accepted, canonical_env, prefix_mass};
use super::env::Environment;
use crate::prob::{self, Dyadic};
use crate::semantics::{
    enumerate_traces, format_trace, run, Budget, Event, Executable, ModelError, Trace, TraceDist,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;
use std::fmt;

/// A closed program and the environments its checks draw from.
#[derive(Clone, Debug)]
pub struct AxiomModel {
    pub id: String,
    pub exe: Executable,
    pub envs: Vec<Environment>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AxiomLine {
    pub axiom: u8,
    pub pass: bool,
    pub model: String,
    pub checks: usize,
    pub detail: String,
}

impl fmt::Display for AxiomLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "axiom={} status={} model={} detail=checks:{} {}",
            self.axiom,
            if self.pass { "pass" } else { "fail" },
            self.model,
            self.checks,
            self.detail
        )
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AxiomReport {
    pub lines: Vec<AxiomLine>,
}

impl AxiomReport {
    pub fn all_pass(&self) -> bool {
        self.lines.iter().all(|l| l.pass)
    }

    /// Number of checks made for one axiom across all models.
    pub fn checks(&self, axiom: u8) -> usize {
        self.lines
            .iter()
            .filter(|l| l.axiom == axiom)
            .map(|l| l.checks)
            .sum()
    }

    pub fn to_text(&self) -> String {
        self.lines.iter().map(|l| format!("{l}\n")).collect()
    }
}

pub struct AxiomConfig<'a> {
    pub grid: Vec<u32>,
    /// Samples per axiom per model.
    pub samples: usize,
    pub seed: u64,
    pub budget: Budget,
    /// The extraction function under test.
    pub beta: &'a (dyn Fn(&[Event]) -> Option<bool> + Sync),
}

struct Cache<'a> {
    model: &'a AxiomModel,
    budget: Budget,
    dists: HashMap<(usize, u32), TraceDist>,
}

impl Cache<'_> {
    fn dist(&mut self, e: usize, n: u32) -> Result<&TraceDist, ModelError> {
        if !self.dists.contains_key(&(e, n)) {
            let d = enumerate_traces(&self.model.exe, &self.model.envs[e], n, self.budget)?;
            self.dists.insert((e, n), d);
        }
        Ok(&self.dists[&(e, n)])
    }
}

fn sorted_traces(d: &TraceDist) -> Vec<Trace> {
    let mut v: Vec<Trace> = d.entries.keys().cloned().collect();
    v.sort();
    v
}

/// Flips the low bit of the first value of the last response in `mu`, if any.
fn mutate(mu: &[Event]) -> Option<Trace> {
    let mut t = mu.to_vec();
    match t.last_mut()? {
        Event::Return { values, .. } if !values.is_empty() && values[0].width() > 0 => {
            let v = values[0];
            values[0] = crate::bits::Bits::new(v.value() ^ 1, v.width());
            Some(t)
        }
        _ => None,
    }
}

fn fmt_p(d: Dyadic) -> String {
    prob::format(&d.to_ratio())
}

struct Tally {
    checks: usize,
    failure: Option<String>,
}

impl Tally {
    fn record(&mut self, ok: bool, detail: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok && self.failure.is_none() {
            self.failure = Some(detail());
        }
    }

    fn line(self, axiom: u8, model: &str) -> AxiomLine {
        AxiomLine {
            axiom,
            pass: self.failure.is_none(),
            model: model.to_string(),
            checks: self.checks,
            detail: self.failure.unwrap_or_else(|| "all exact".to_string()),
        }
    }
}

fn axiom1(c: &mut Cache, cfg: &AxiomConfig, rng: &mut ChaCha8Rng) -> Result<Tally, ModelError> {
    let mut t = Tally {
        checks: 0,
        failure: None,
    };
    for _ in 0..cfg.samples {
        let e = rng.gen_range(0..c.model.envs.len());
        let n = cfg.grid[rng.gen_range(0..cfg.grid.len())];
        let d = c.dist(e, n)?.clone();
        let traces = sorted_traces(&d);
        let full = &traces[rng.gen_range(0..traces.len())];
        let responses = full
            .iter()
            .filter(|e| !matches!(e, Event::Call { .. }) && !e.is_terminal())
            .count();
        let k = rng.gen_range(0..=responses);
        let mu = full[..2 * k].to_vec();
        let mut candidates = vec![mu.clone()];
        if rng.gen_bool(0.5) {
            candidates.extend(mutate(&mu));
        }
        for mu in candidates {
            let rho = prefix_mass(&d, &mu);
            let z = canonical_env(&mu).expect("prefix of a trace is well formed");
            let got = enumerate_traces(&c.model.exe, &z, n, cfg.budget)?.prob(&accepted(&mu));
            // producible iff the canonical environment accepts it with the same mass
            t.record(got == rho, || {
                format!(
                    "n={n} prefix={} rho={} canonical={}",
                    format_trace(&mu),
                    fmt_p(rho),
                    fmt_p(got)
                )
            });
        }
    }
    Ok(t)
}

fn axiom2(c: &mut Cache, cfg: &AxiomConfig, rng: &mut ChaCha8Rng) -> Result<Tally, ModelError> {
    let mut t = Tally {
        checks: 0,
        failure: None,
    };
    for _ in 0..cfg.samples {
        let e = rng.gen_range(0..c.model.envs.len());
        let n = cfg.grid[rng.gen_range(0..cfg.grid.len())];
        let d = c.dist(e, n)?.clone();
        let decided: Vec<Trace> = sorted_traces(&d)
            .into_iter()
            .filter(|t| matches!(t.last(), Some(Event::Decide(_))))
            .collect();
        if decided.is_empty() {
            continue;
        }
        let full = &decided[rng.gen_range(0..decided.len())];
        let p = d.prob(full);
        let mu = &full[..full.len() - 1];
        let z = canonical_env(mu).expect("trace is well formed");
        let got = enumerate_traces(&c.model.exe, &z, n, cfg.budget)?.prob(&accepted(mu));
        t.record(got == p, || {
            format!(
                "n={n} env={} trace={} p={} canonical={}",
                c.model.envs[e].name,
                format_trace(full),
                fmt_p(p),
                fmt_p(got)
            )
        });
        // any other environment admitting the same actions agrees too
        let e2 = rng.gen_range(0..c.model.envs.len());
        let d2 = c.dist(e2, n)?;
        let p2 = d2.prob(full);
        if !p2.is_zero() {
            t.record(p2 == p, || {
                format!(
                    "n={n} trace={} p[{}]={} p[{}]={}",
                    format_trace(full),
                    c.model.envs[e].name,
                    fmt_p(p),
                    c.model.envs[e2].name,
                    fmt_p(p2)
                )
            });
        }
    }
    Ok(t)
}

fn axiom4(c: &mut Cache, cfg: &AxiomConfig, rng: &mut ChaCha8Rng) -> Result<Tally, ModelError> {
    let mut t = Tally {
        checks: 0,
        failure: None,
    };
    for _ in 0..cfg.samples {
        let e = rng.gen_range(0..c.model.envs.len());
        let n = cfg.grid[rng.gen_range(0..cfg.grid.len())];
        let r = run(&c.model.exe, &c.model.envs[e], n, cfg.budget)?;
        let b = r.dist.bits_with(cfg.beta);
        let (one, zero) = (r.decided_one.to_ratio(), r.decided_zero.to_ratio());
        t.record(b.one == one && b.zero == zero, || {
            format!(
                "n={n} env={} exec1={} sum1={} exec0={} sum0={}",
                c.model.envs[e].name,
                prob::format(&one),
                prob::format(&b.one),
                prob::format(&zero),
                prob::format(&b.zero)
            )
        });
    }
    Ok(t)
}

/// Runs the three checks on every model; one report line per (axiom, model).
pub fn axiom_suite(models: &[AxiomModel], cfg: &AxiomConfig) -> Result<AxiomReport, ModelError> {
    let mut report = AxiomReport::default();
    for (i, m) in models.iter().enumerate() {
        if m.envs.is_empty() {
            continue;
        }
        let mut cache = Cache {
            model: m,
            budget: cfg.budget,
            dists: HashMap::new(),
        };
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(i as u64));
        report
            .lines
            .push(axiom1(&mut cache, cfg, &mut rng)?.line(1, &m.id));
        report
            .lines
            .push(axiom2(&mut cache, cfg, &mut rng)?.line(2, &m.id));
        report
            .lines
            .push(axiom4(&mut cache, cfg, &mut rng)?.line(4, &m.id));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::behavior::env::{Action, EnvAlphabet, Obs};
    use crate::bits::Bits;
    use crate::lang::{parse_program, WholeProgram};
    use crate::semantics::final_bit;

    fn model(src: &str) -> AxiomModel {
        let exe = Executable::new(&WholeProgram::single(parse_program(src).unwrap())).unwrap();
        let alphabet = EnvAlphabet {
            calls: vec![Action::new("O", vec![]), Action::new("P", vec![])],
            responses: vec![
                Obs::Ret(vec![Bits::new(0, 1)]),
                Obs::Ret(vec![Bits::new(1, 1)]),
                Obs::Yield,
            ],
        };
        AxiomModel {
            id: "m".into(),
            exe,
            envs: alphabet.enumerate(2, 20_000).unwrap(),
        }
    }

    const SRC: &str = "init G := s <- sample(1); yield. reads G.s. let O() := b <- sample(1); return(b ^ s[]). let P() := find j <= 4 suchthat 0b0 then yield else return(s[]).";

    #[test]
    fn sampled_model_satisfies_axioms() {
        let cfg = AxiomConfig {
            grid: vec![1, 2],
            samples: 60,
            seed: 7,
            budget: Budget::Unbounded,
            beta: &final_bit,
        };
        let r = axiom_suite(&[model(SRC)], &cfg).unwrap();
        assert!(r.all_pass(), "{}", r.to_text());
        assert!(r.checks(1) >= 60);
    }

    #[test]
    fn broken_extraction_is_caught() {
        let broken = |t: &[Event]| match t.last() {
            Some(Event::Timeout) => Some(true),
            _ => final_bit(t),
        };
        let cfg = AxiomConfig {
            grid: vec![1],
            samples: 60,
            seed: 7,
            // P needs more than this and times out
            budget: Budget::poly(0, 0, 8),
            beta: &broken,
        };
        let r = axiom_suite(&[model(SRC)], &cfg).unwrap();
        let l = r.lines.iter().find(|l| l.axiom == 4).unwrap();
        assert!(!l.pass);
        assert!(l
            .to_string()
            .starts_with("axiom=4 status=fail model=m detail="));
    }
}
