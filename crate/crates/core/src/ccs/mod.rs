//! CCS with guarded choice, decorated with the parallel components that
//! take part in each transition.
//!
//! The concrete syntax accepted by [`parse`]:
//!
//! ```text
//! # comment
//! X = a.X + 'b.X
//! main = (X | b.0) \ {b}
//! ```
//!
//! Co-names carry a leading apostrophe, `tau` is the internal action and
//! `0` the inactive process. Restriction is `P \ {a, b}` (or `P \ a`),
//! relabelling is `P[b/a, d/c]` (`a` becomes `b`, `c` becomes `d`).
//! Postfix operators bind tightest, then prefix, then `+`, then `|`.
//! A bare action such as `b` abbreviates `b.0`. When the text contains
//! definitions, the process under analysis is the one named `main`;
//! otherwise the whole text is a single process expression.

mod explore;
mod parser;
mod semantics;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use explore::{explore, Blocking, ExploreError, DEFAULT_MAX_STATES};
pub use parser::{parse, ParseError, ParseErrorKind};
pub use semantics::{check_guarded, derive_transitions, Derivation, GuardViolation};

/// An element of `Act`: a name, a co-name, or the internal action.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Action {
    Name(String),
    Coname(String),
    Tau,
}

impl Action {
    pub fn name(base: impl Into<String>) -> Self {
        Action::Name(base.into())
    }

    pub fn coname(base: impl Into<String>) -> Self {
        Action::Coname(base.into())
    }

    /// The underlying name, absent for `tau`.
    pub fn base(&self) -> Option<&str> {
        match self {
            Action::Name(n) | Action::Coname(n) => Some(n),
            Action::Tau => None,
        }
    }

    /// `Some(ā)` for names and co-names; complementation is not defined on `tau`.
    pub fn complement(&self) -> Option<Action> {
        match self {
            Action::Name(n) => Some(Action::Coname(n.clone())),
            Action::Coname(n) => Some(Action::Name(n.clone())),
            Action::Tau => None,
        }
    }

    pub fn is_tau(&self) -> bool {
        matches!(self, Action::Tau)
    }

    /// Applies a relabelling, which acts on the base name and keeps polarity.
    pub fn relabel(&self, f: &Relabelling) -> Action {
        match self {
            Action::Name(n) => Action::Name(f.apply(n).to_owned()),
            Action::Coname(n) => Action::Coname(f.apply(n).to_owned()),
            Action::Tau => Action::Tau,
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::Name(n) => write!(f, "{n}"),
            Action::Coname(n) => write!(f, "'{n}"),
            Action::Tau => write!(f, "tau"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid action `{0}`")]
pub struct InvalidAction(pub String);

pub(crate) fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_alphanumeric() || c == '_')
}

impl FromStr for Action {
    type Err = InvalidAction;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "tau" {
            return Ok(Action::Tau);
        }
        let (coname, base) = match s.strip_prefix('\'') {
            Some(rest) => (true, rest),
            None => (false, s),
        };
        if base == "tau" || !is_identifier(base) {
            return Err(InvalidAction(s.to_owned()));
        }
        Ok(if coname {
            Action::Coname(base.to_owned())
        } else {
            Action::Name(base.to_owned())
        })
    }
}

impl From<Action> for String {
    fn from(a: Action) -> String {
        a.to_string()
    }
}

impl TryFrom<String> for Action {
    type Error = InvalidAction;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

/// Which side of a parallel composition a component sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side {
    L,
    R,
}

/// A component: a string over `{L, R}` addressing a parallel position.
/// The empty string is `ε`, the root component.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct Component(Vec<Side>);

impl Component {
    pub fn root() -> Self {
        Component(Vec::new())
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    pub fn sides(&self) -> &[Side] {
        &self.0
    }

    /// `d·σ`
    pub fn prefixed(&self, side: Side) -> Self {
        let mut sides = Vec::with_capacity(self.0.len() + 1);
        sides.push(side);
        sides.extend_from_slice(&self.0);
        Component(sides)
    }

    /// The string form used in JSON: `""` for ε, otherwise e.g. `"LR"`.
    pub fn as_code(&self) -> String {
        self.0
            .iter()
            .map(|s| match s {
                Side::L => 'L',
                Side::R => 'R',
            })
            .collect()
    }
}

/// Prints `ε` for the root component.
impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_root() {
            write!(f, "ε")
        } else {
            write!(f, "{}", self.as_code())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid component string `{0}` (expected only L and R)")]
pub struct InvalidComponent(pub String);

impl FromStr for Component {
    type Err = InvalidComponent;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "ε" {
            return Ok(Component::root());
        }
        s.chars()
            .map(|c| match c {
                'L' => Ok(Side::L),
                'R' => Ok(Side::R),
                _ => Err(InvalidComponent(s.to_owned())),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Component)
    }
}

impl From<Component> for String {
    fn from(c: Component) -> String {
        c.as_code()
    }
}

impl TryFrom<String> for Component {
    type Error = InvalidComponent;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

/// A set of components, as carried by a transition.
pub type Components = BTreeSet<Component>;

/// `d·C`
pub fn prefix_all(side: Side, comps: &Components) -> Components {
    comps.iter().map(|c| c.prefixed(side)).collect()
}

/// Formats a component set as `{L, R}`.
pub fn fmt_components(comps: &Components) -> String {
    let inner: Vec<String> = comps.iter().map(|c| c.to_string()).collect();
    format!("{{{}}}", inner.join(", "))
}

/// A relabelling `f: A → A`, identity outside the listed names.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Relabelling(BTreeMap<String, String>);

impl Relabelling {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `old ↦ new`.
    pub fn with(mut self, new: impl Into<String>, old: impl Into<String>) -> Self {
        self.0.insert(old.into(), new.into());
        self
    }

    pub fn apply<'a>(&'a self, name: &'a str) -> &'a str {
        self.0.get(name).map(String::as_str).unwrap_or(name)
    }

    /// Pairs `(old, new)` in name order.
    pub fn pairs(&self) -> impl Iterator<Item = (&str, &str)> {
        self.0.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }
}

impl FromIterator<(String, String)> for Relabelling {
    /// Collects `(old, new)` pairs.
    fn from_iter<I: IntoIterator<Item = (String, String)>>(iter: I) -> Self {
        Relabelling(iter.into_iter().collect())
    }
}

/// A CCS expression. `Choice(vec![])` is `0`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Process {
    Choice(Vec<(Action, Process)>),
    Par(Box<Process>, Box<Process>),
    Restrict(Box<Process>, BTreeSet<String>),
    Relabel(Box<Process>, Relabelling),
    Agent(String),
}

impl Process {
    pub fn nil() -> Self {
        Process::Choice(Vec::new())
    }

    pub fn is_nil(&self) -> bool {
        matches!(self, Process::Choice(summands) if summands.is_empty())
    }

    pub fn prefix(action: Action, then: Process) -> Self {
        Process::Choice(vec![(action, then)])
    }

    pub fn par(left: Process, right: Process) -> Self {
        Process::Par(Box::new(left), Box::new(right))
    }

    pub fn restrict<I, S>(self, names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Process::Restrict(Box::new(self), names.into_iter().map(Into::into).collect())
    }

    pub fn relabel(self, f: Relabelling) -> Self {
        Process::Relabel(Box::new(self), f)
    }

    pub fn agent(name: impl Into<String>) -> Self {
        Process::Agent(name.into())
    }

    /// Sorts and deduplicates every choice, recursively. Two processes that
    /// differ only in summand order normalise to the same term.
    pub fn normalized(&self) -> Process {
        match self {
            Process::Choice(summands) => {
                let mut s: Vec<(Action, Process)> = summands
                    .iter()
                    .map(|(a, p)| (a.clone(), p.normalized()))
                    .collect();
                s.sort();
                s.dedup();
                Process::Choice(s)
            }
            Process::Par(p, q) => Process::par(p.normalized(), q.normalized()),
            Process::Restrict(p, l) => Process::Restrict(Box::new(p.normalized()), l.clone()),
            Process::Relabel(p, f) => Process::Relabel(Box::new(p.normalized()), f.clone()),
            Process::Agent(x) => Process::Agent(x.clone()),
        }
    }

    /// Agent identifiers occurring anywhere in the term.
    pub fn agents(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_agents(&mut out);
        out
    }

    fn collect_agents(&self, out: &mut BTreeSet<String>) {
        match self {
            Process::Choice(s) => s.iter().for_each(|(_, p)| p.collect_agents(out)),
            Process::Par(p, q) => {
                p.collect_agents(out);
                q.collect_agents(out);
            }
            Process::Restrict(p, _) | Process::Relabel(p, _) => p.collect_agents(out),
            Process::Agent(x) => {
                out.insert(x.clone());
            }
        }
    }

    fn fmt_at(&self, f: &mut fmt::Formatter<'_>, level: u8) -> fmt::Result {
        // 1: parallel, 2: sum, 3: prefix, 4: postfix/atom
        let own = match self {
            Process::Par(..) => 1,
            Process::Choice(s) if s.len() > 1 => 2,
            Process::Choice(s) if s.len() == 1 => 3,
            _ => 4,
        };
        let paren = own < level;
        if paren {
            write!(f, "(")?;
        }
        match self {
            Process::Choice(s) if s.is_empty() => write!(f, "0")?,
            Process::Choice(s) => {
                for (i, (a, p)) in s.iter().enumerate() {
                    if i > 0 {
                        write!(f, " + ")?;
                    }
                    write!(f, "{a}.")?;
                    p.fmt_at(f, 3)?;
                }
            }
            Process::Par(p, q) => {
                p.fmt_at(f, 1)?;
                write!(f, " | ")?;
                q.fmt_at(f, 2)?;
            }
            Process::Restrict(p, l) => {
                p.fmt_at(f, 4)?;
                let names: Vec<&str> = l.iter().map(String::as_str).collect();
                write!(f, " \\ {{{}}}", names.join(", "))?;
            }
            Process::Relabel(p, r) => {
                p.fmt_at(f, 4)?;
                let pairs: Vec<String> = r.pairs().map(|(old, new)| format!("{new}/{old}")).collect();
                write!(f, "[{}]", pairs.join(", "))?;
            }
            Process::Agent(x) => write!(f, "{x}")?,
        }
        if paren {
            write!(f, ")")?;
        }
        Ok(())
    }
}

/// Prints in the concrete syntax accepted by [`parse`].
impl fmt::Display for Process {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_at(f, 0)
    }
}

/// Defining equations `X ≝ P`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Environment {
    defs: BTreeMap<String, Process>,
}

impl Environment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn define(&mut self, name: impl Into<String>, body: Process) -> Option<Process> {
        self.defs.insert(name.into(), body)
    }

    pub fn with(mut self, name: impl Into<String>, body: Process) -> Self {
        self.define(name, body);
        self
    }

    pub fn get(&self, name: &str) -> Option<&Process> {
        self.defs.get(name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.defs.contains_key(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Process)> {
        self.defs.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn len(&self) -> usize {
        self.defs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.defs.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complement_is_an_involution_on_names() {
        for a in [Action::name("b"), Action::coname("b")] {
            assert_eq!(a.complement().unwrap().complement().unwrap(), a);
        }
        assert_eq!(Action::Tau.complement(), None);
    }

    #[test]
    fn action_text_forms() {
        assert_eq!("'b".parse::<Action>().unwrap(), Action::coname("b"));
        assert_eq!("tau".parse::<Action>().unwrap(), Action::Tau);
        assert_eq!("r0".parse::<Action>().unwrap(), Action::name("r0"));
        assert!("'tau".parse::<Action>().is_err());
        assert!("".parse::<Action>().is_err());
        assert!("a b".parse::<Action>().is_err());
    }

    #[test]
    fn relabelling_keeps_polarity() {
        let f = Relabelling::new().with("b", "a");
        assert_eq!(Action::coname("a").relabel(&f), Action::coname("b"));
        assert_eq!(Action::name("c").relabel(&f), Action::name("c"));
        assert_eq!(Action::Tau.relabel(&f), Action::Tau);
    }

    #[test]
    fn component_codes() {
        let c: Component = "RL".parse().unwrap();
        assert_eq!(c.prefixed(Side::L).as_code(), "LRL");
        assert_eq!("".parse::<Component>().unwrap(), Component::root());
        assert_eq!(Component::root().to_string(), "ε");
        assert!("LX".parse::<Component>().is_err());
    }

    #[test]
    fn printing_uses_minimal_parentheses() {
        let x = Process::agent("X");
        let q = Process::par(x, Process::prefix(Action::name("b"), Process::nil())).restrict(["b"]);
        assert_eq!(q.to_string(), "(X | b.0) \\ {b}");
        let p = Process::prefix(
            Action::name("a"),
            Process::par(Process::nil(), Process::nil()),
        );
        assert_eq!(p.to_string(), "a.(0 | 0)");
    }
}
