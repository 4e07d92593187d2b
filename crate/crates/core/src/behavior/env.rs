//! Deterministic environments as finite decision trees.

use crate::bits::Bits;
use crate::semantics::machine::Outcome;
use std::fmt::{self, Write};
use std::sync::Arc;
use thiserror::Error;

/// How much of each response the environment gets to branch on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum View {
    Full,
    /// The leading `k` bits of the concatenated returned values.
    Prefix(u32),
}

/// What the environment observes after a call that did not time out.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Obs {
    Ret(Vec<Bits>),
    Yield,
}

impl View {
    pub fn observe(&self, o: &Outcome) -> Option<Obs> {
        match o {
            Outcome::Timeout => None,
            Outcome::Yield => Some(Obs::Yield),
            Outcome::Return(vs) => Some(match self {
                View::Full => Obs::Ret(vs.clone()),
                View::Prefix(k) => {
                    let all = vs.iter().fold(Bits::empty(), |acc, v| {
                        acc.concat(v).expect("response wider than 64 bits")
                    });
                    Obs::Ret(vec![all.truncate((*k).min(all.width())).unwrap()])
                }
            }),
        }
    }
}

impl fmt::Display for View {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            View::Full => f.write_str("full"),
            View::Prefix(k) => write!(f, "{k}"),
        }
    }
}

impl fmt::Display for Obs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Obs::Yield => f.write_str("yield"),
            Obs::Ret(vs) => {
                let parts: Vec<String> = vs.iter().map(|b| b.to_string()).collect();
                write!(f, "ret({})", parts.join(","))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Action {
    pub oracle: Arc<str>,
    pub args: Vec<Bits>,
}

impl Action {
    pub fn new(oracle: &str, args: Vec<Bits>) -> Self {
        Action {
            oracle: Arc::from(oracle),
            args,
        }
    }
}

impl Action {
    /// Parses `O(01,1)`.
    pub fn parse(s: &str) -> Option<Action> {
        let s = s.trim();
        let open = s.find('(')?;
        let args = parse_bits_list(s[open + 1..].strip_suffix(')')?)?;
        Some(Action::new(s[..open].trim(), args))
    }
}

impl Obs {
    /// Parses `ret(01,1)` or `yield`.
    pub fn parse(s: &str) -> Option<Obs> {
        parse_obs(s.trim())
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.args.iter().map(|b| b.to_string()).collect();
        write!(f, "{}({})", self.oracle, parts.join(","))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Node {
    Decide(bool),
    Call {
        action: Action,
        branches: Vec<(Obs, Node)>,
        /// Taken when no branch matches.
        default: Box<Node>,
    },
}

impl Node {
    pub fn call(action: Action, branches: Vec<(Obs, Node)>, default: Node) -> Node {
        Node::Call {
            action,
            branches,
            default: Box::new(default),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Node::Decide(_) => 0,
            Node::Call {
                branches, default, ..
            } => {
                1 + branches
                    .iter()
                    .map(|(_, c)| c.depth())
                    .chain([default.depth()])
                    .max()
                    .unwrap_or(0)
            }
        }
    }

    pub fn child(&self, obs: &Obs) -> Option<&Node> {
        match self {
            Node::Decide(_) => None,
            Node::Call {
                branches, default, ..
            } => Some(
                branches
                    .iter()
                    .find(|(o, _)| o == obs)
                    .map(|(_, c)| c)
                    .unwrap_or(default),
            ),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Environment {
    pub name: String,
    pub view: View,
    pub root: Node,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct EnvParseError {
    pub line: usize,
    pub message: String,
}

impl Environment {
    pub fn new(name: impl Into<String>, view: View, root: Node) -> Self {
        Environment {
            name: name.into(),
            view,
            root,
        }
    }

    pub fn constant(name: impl Into<String>, b: bool) -> Self {
        Environment::new(name, View::Full, Node::Decide(b))
    }

    pub fn depth(&self) -> usize {
        self.root.depth()
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("env {} view={}\n", self.name, self.view);
        write_node(&mut s, &self.root, 0, None);
        s
    }

    pub fn parse(text: &str) -> Result<Environment, EnvParseError> {
        let lines: Vec<(usize, &str)> = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
            .collect();
        let Some(&(hl, header)) = lines.first() else {
            return Err(EnvParseError {
                line: 1,
                message: "empty environment file".into(),
            });
        };
        let mut parts = header.split_whitespace();
        let bad = |line: usize, m: &str| EnvParseError {
            line: line + 1,
            message: m.to_string(),
        };
        if parts.next() != Some("env") {
            return Err(bad(hl, "expected `env NAME view=...`"));
        }
        let name = parts
            .next()
            .ok_or_else(|| bad(hl, "missing environment name"))?
            .to_string();
        let view = match parts.next().and_then(|v| v.strip_prefix("view=")) {
            None | Some("full") => View::Full,
            Some(k) => View::Prefix(k.parse().map_err(|_| bad(hl, "bad view"))?),
        };
        let mut pos = 1;
        let root = parse_node(&lines, &mut pos, 0, false)?.1;
        if pos != lines.len() {
            return Err(bad(lines[pos].0, "unexpected line"));
        }
        Ok(Environment { name, view, root })
    }
}

fn write_node(s: &mut String, n: &Node, indent: usize, label: Option<&str>) {
    let pad = "  ".repeat(indent);
    let lab = label.map(|l| format!("[obs={l}] ")).unwrap_or_default();
    match n {
        Node::Decide(b) => writeln!(s, "{pad}{lab}-> decide {}", *b as u8).unwrap(),
        Node::Call {
            action,
            branches,
            default,
        } => {
            writeln!(s, "{pad}{lab}-> call {action}").unwrap();
            for (o, c) in branches {
                write_node(s, c, indent + 1, Some(&o.to_string()));
            }
            write_node(s, default, indent + 1, Some("*"));
        }
    }
}

fn parse_bits_list(s: &str) -> Option<Vec<Bits>> {
    if s.is_empty() {
        return Some(Vec::new());
    }
    s.split(',').map(|p| Bits::parse_binary(p.trim())).collect()
}

fn parse_obs(s: &str) -> Option<Obs> {
    if s == "yield" {
        return Some(Obs::Yield);
    }
    let inner = s.strip_prefix("ret(")?.strip_suffix(')')?;
    parse_bits_list(inner).map(Obs::Ret)
}

/// Parses one node line at `indent`, then its children. Returns the branch label.
fn parse_node(
    lines: &[(usize, &str)],
    pos: &mut usize,
    indent: usize,
    labelled: bool,
) -> Result<(Option<String>, Node), EnvParseError> {
    let (ln, raw) = lines[*pos];
    let bad = |m: String| EnvParseError {
        line: ln + 1,
        message: m,
    };
    let ind = raw.len() - raw.trim_start_matches(' ').len();
    if ind != indent * 2 {
        return Err(bad(format!("expected indentation {}", indent * 2)));
    }
    let mut body = raw.trim();
    let mut label = None;
    if labelled {
        let rest = body
            .strip_prefix("[obs=")
            .ok_or_else(|| bad("expected `[obs=...]`".into()))?;
        let close = rest
            .find(']')
            .ok_or_else(|| bad("unclosed `[obs=`".into()))?;
        label = Some(rest[..close].to_string());
        body = rest[close + 1..].trim();
    }
    let body = body
        .strip_prefix("->")
        .ok_or_else(|| bad("expected `->`".into()))?
        .trim();
    *pos += 1;
    if let Some(b) = body.strip_prefix("decide ") {
        let v = match b.trim() {
            "0" => false,
            "1" => true,
            _ => return Err(bad("decide takes 0 or 1".into())),
        };
        return Ok((label, Node::Decide(v)));
    }
    let call = body
        .strip_prefix("call ")
        .ok_or_else(|| bad("expected `call` or `decide`".into()))?;
    let open = call.find('(').ok_or_else(|| bad("expected `(`".into()))?;
    let oracle = call[..open].trim();
    let args = call[open + 1..]
        .strip_suffix(')')
        .and_then(parse_bits_list)
        .ok_or_else(|| bad("malformed arguments".into()))?;
    let mut branches = Vec::new();
    let mut default = None;
    while *pos < lines.len() {
        let (_, next) = lines[*pos];
        let ni = next.len() - next.trim_start_matches(' ').len();
        if ni <= indent * 2 {
            break;
        }
        let (lab, child) = parse_node(lines, pos, indent + 1, true)?;
        let lab = lab.unwrap_or_default();
        if lab == "*" {
            default = Some(child);
        } else {
            let o = parse_obs(&lab).ok_or_else(|| bad(format!("bad observation `{lab}`")))?;
            branches.push((o, child));
        }
    }
    Ok((
        label,
        Node::call(
            Action::new(oracle, args),
            branches,
            default.unwrap_or(Node::Decide(false)),
        ),
    ))
}

/// Calls and responses that enumerated environments range over.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EnvAlphabet {
    pub calls: Vec<Action>,
    pub responses: Vec<Obs>,
}

impl EnvAlphabet {
    /// Closed-form number of trees of the given depth.
    pub fn count(&self, depth: usize) -> u128 {
        let mut c: u128 = 2;
        for _ in 0..depth {
            let per = c
                .checked_pow(self.responses.len() as u32)
                .unwrap_or(u128::MAX);
            c = 2u128.saturating_add((self.calls.len() as u128).saturating_mul(per));
        }
        c
    }

    fn trees(&self, depth: usize) -> Vec<Node> {
        let mut out = vec![Node::Decide(false), Node::Decide(true)];
        if depth == 0 {
            return out;
        }
        let sub = self.trees(depth - 1);
        for a in &self.calls {
            let k = self.responses.len();
            let mut idx = vec![0usize; k];
            loop {
                let branches = self
                    .responses
                    .iter()
                    .zip(&idx)
                    .map(|(o, &i)| (o.clone(), sub[i].clone()))
                    .collect();
                out.push(Node::call(a.clone(), branches, Node::Decide(false)));
                // odometer, last response varies fastest
                let mut p = k;
                loop {
                    if p == 0 {
                        break;
                    }
                    p -= 1;
                    idx[p] += 1;
                    if idx[p] < sub.len() {
                        break;
                    }
                    idx[p] = 0;
                    if p == 0 {
                        p = usize::MAX;
                        break;
                    }
                }
                if p == usize::MAX || k == 0 {
                    break;
                }
            }
        }
        out
    }

    /// Every environment up to `depth`, in canonical order, named `z0, z1, ...`.
    pub fn enumerate(
        &self,
        depth: usize,
        ceiling: u128,
    ) -> Result<Vec<Environment>, SpaceTooLarge> {
        let count = self.count(depth);
        if count > ceiling {
            return Err(SpaceTooLarge { count, ceiling });
        }
        Ok(self
            .trees(depth)
            .into_iter()
            .enumerate()
            .map(|(i, root)| Environment::new(format!("z{i}"), View::Full, root))
            .collect())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("enumeration space of {count} exceeds the ceiling {ceiling}")]
pub struct SpaceTooLarge {
    pub count: u128,
    pub ceiling: u128,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn alphabet(calls: usize) -> EnvAlphabet {
        EnvAlphabet {
            calls: (0..calls)
                .map(|i| Action::new(&format!("O{i}"), vec![]))
                .collect(),
            responses: vec![
                Obs::Ret(vec![Bits::new(0, 1)]),
                Obs::Ret(vec![Bits::new(1, 1)]),
            ],
        }
    }

    #[test]
    fn counts_match_recurrence() {
        let a = alphabet(1);
        assert_eq!(a.enumerate(0, 1000).unwrap().len(), 2);
        assert_eq!(a.enumerate(1, 1000).unwrap().len(), 6);
        let b = alphabet(2);
        for d in 0..=2 {
            assert_eq!(b.enumerate(d, 1 << 20).unwrap().len() as u128, b.count(d));
        }
        assert_eq!(b.count(2), 202);
        assert!(b.enumerate(3, 1000).is_err());
    }

    #[test]
    fn enumerated_trees_are_distinct() {
        let envs = alphabet(2).enumerate(2, 1000).unwrap();
        let set: std::collections::HashSet<&Node> = envs.iter().map(|e| &e.root).collect();
        assert_eq!(set.len(), envs.len());
    }

    #[test]
    fn text_round_trip() {
        for e in alphabet(2).enumerate(2, 1000).unwrap().iter().step_by(17) {
            assert_eq!(&Environment::parse(&e.to_text()).unwrap(), e);
        }
        let custom = Environment::new(
            "w",
            View::Prefix(3),
            Node::call(
                Action::new("O", vec![Bits::new(2, 2), Bits::new(0, 1)]),
                vec![(Obs::Yield, Node::Decide(true))],
                Node::Decide(false),
            ),
        );
        assert_eq!(Environment::parse(&custom.to_text()).unwrap(), custom);
    }

    #[test]
    fn prefix_view_truncates_concatenation() {
        let o = Outcome::Return(vec![Bits::new(1, 1), Bits::new(0b0110, 4)]);
        assert_eq!(
            View::Prefix(3).observe(&o),
            Some(Obs::Ret(vec![Bits::new(0b101, 3)]))
        );
        assert_eq!(View::Full.observe(&Outcome::Timeout), None);
    }
}
