//! Strong bisimilarity on action labels, ignoring components and the
//! blocking set.
//!
//! Partition refinement in rounds: a state's signature is the set of
//! (label, block of target) pairs, and each round splits blocks by
//! signature. The rounds are kept so that a distinguishing
//! Hennessy-Milner formula can be read off when two states end up apart.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clts::{Clts, StateId};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    /// Blocks ordered by their least state.
    pub blocks: Vec<BTreeSet<StateId>>,
}

impl Partition {
    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn block_of(&self, s: StateId) -> Option<usize> {
        self.blocks.iter().position(|b| b.contains(&s))
    }

    pub fn same_block(&self, s: StateId, t: StateId) -> bool {
        matches!((self.block_of(s), self.block_of(t)), (Some(a), Some(b)) if a == b)
    }
}

/// Hennessy-Milner logic.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Hml {
    True,
    Diamond(String, Box<Hml>),
    Not(Box<Hml>),
    And(Vec<Hml>),
}

impl Hml {
    /// Whether state `s` of `c` satisfies the formula.
    pub fn holds(&self, c: &Clts, s: StateId) -> bool {
        match self {
            Hml::True => true,
            Hml::Diamond(a, phi) => c
                .outgoing(s)
                .iter()
                .map(|&t| c.tr(t))
                .any(|t| &t.label.to_string() == a && phi.holds(c, t.target)),
            Hml::Not(phi) => !phi.holds(c, s),
            Hml::And(parts) => parts.iter().all(|p| p.holds(c, s)),
        }
    }

    /// The action sequence along the first diamond of each level.
    pub fn trace(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut at = self;
        loop {
            match at {
                Hml::True => return out,
                Hml::Diamond(a, phi) => {
                    out.push(a.clone());
                    at = phi;
                }
                Hml::Not(phi) => at = phi,
                Hml::And(parts) => match parts.first() {
                    Some(p) => at = p,
                    None => return out,
                },
            }
        }
    }
}

impl fmt::Display for Hml {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Hml::True => write!(f, "tt"),
            Hml::Diamond(a, phi) => write!(f, "<{a}>{phi}"),
            Hml::Not(phi) => write!(f, "¬{phi}"),
            Hml::And(parts) => {
                write!(f, "(")?;
                for (i, p) in parts.iter().enumerate() {
                    if i > 0 {
                        write!(f, " ∧ ")?;
                    }
                    write!(f, "{p}")?;
                }
                write!(f, ")")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bisimilarity {
    pub bisimilar: bool,
    /// Satisfied by the first state and not by the second.
    pub distinguishing: Option<Hml>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown state {0}")]
pub struct UnknownState(pub StateId);

type Signature<'a> = BTreeSet<(&'a str, usize)>;

/// Labelled graph with refinement history.
struct Refinement {
    succ: Vec<Vec<(String, usize)>>,
    /// `rounds[r][s]`: block of `s` after `r` rounds.
    rounds: Vec<Vec<usize>>,
}

impl Refinement {
    fn new(succ: Vec<Vec<(String, usize)>>) -> Self {
        let n = succ.len();
        let mut rounds = vec![vec![0; n]];
        loop {
            let prev = rounds.last().unwrap();
            let mut ids: HashMap<(usize, Signature), usize> = HashMap::new();
            let next: Vec<usize> = (0..n)
                .map(|s| {
                    let sig = succ[s].iter().map(|(a, t)| (a.as_str(), prev[*t])).collect();
                    let fresh = ids.len();
                    *ids.entry((prev[s], sig)).or_insert(fresh)
                })
                .collect();
            let stable = ids.len() == prev.iter().collect::<BTreeSet<_>>().len();
            rounds.push(next);
            if stable {
                break;
            }
        }
        Refinement { succ, rounds }
    }

    fn last(&self) -> &[usize] {
        self.rounds.last().unwrap()
    }

    fn signature(&self, s: usize, round: usize) -> Signature<'_> {
        self.succ[s].iter().map(|(a, t)| (a.as_str(), self.rounds[round][*t])).collect()
    }

    /// A formula true at `s` and false at `t`, for states in different
    /// final blocks.
    fn distinguish(&self, s: usize, t: usize, memo: &mut HashMap<(usize, usize), Hml>) -> Hml {
        if let Some(phi) = memo.get(&(s, t)) {
            return phi.clone();
        }
        // First round after which they are apart; they agree on round r-1.
        let r = (1..self.rounds.len()).find(|&r| self.rounds[r][s] != self.rounds[r][t]).expect("states are apart");
        let (sig_s, sig_t) = (self.signature(s, r - 1), self.signature(t, r - 1));
        let phi = if let Some(&(a, b)) = sig_s.difference(&sig_t).next() {
            self.diamond(s, t, a, b, r - 1, memo)
        } else {
            let &(a, b) = sig_t.difference(&sig_s).next().expect("signatures differ");
            Hml::Not(Box::new(self.diamond(t, s, a, b, r - 1, memo)))
        };
        memo.insert((s, t), phi.clone());
        phi
    }

    /// `<a>φ` true at `s` (which has an `a`-step into block `b` of
    /// `round`) and false at `t` (which has none).
    fn diamond(&self, s: usize, t: usize, a: &str, b: usize, round: usize, memo: &mut HashMap<(usize, usize), Hml>) -> Hml {
        let s2 = self.succ[s].iter().find(|(x, u)| x == a && self.rounds[round][*u] == b).unwrap().1;
        let mut parts: Vec<Hml> = Vec::new();
        for &(_, t2) in self.succ[t].iter().filter(|(x, _)| x == a) {
            let part = self.distinguish(s2, t2, memo);
            if !parts.contains(&part) {
                parts.push(part);
            }
        }
        let body = match parts.len() {
            0 => Hml::True,
            1 => parts.pop().unwrap(),
            _ => Hml::And(parts),
        };
        Hml::Diamond(a.to_owned(), Box::new(body))
    }
}

fn successors(c: &Clts, offset: usize) -> Vec<Vec<(String, usize)>> {
    c.states()
        .map(|s| {
            c.outgoing(s)
                .iter()
                .map(|&t| {
                    let t = c.tr(t);
                    (t.label.to_string(), t.target.0 + offset)
                })
                .collect()
        })
        .collect()
}

fn to_partition(blocks: &[usize]) -> Partition {
    let mut by_block: BTreeMap<usize, BTreeSet<StateId>> = BTreeMap::new();
    for (s, &b) in blocks.iter().enumerate() {
        by_block.entry(b).or_default().insert(StateId(s));
    }
    let mut blocks: Vec<BTreeSet<StateId>> = by_block.into_values().collect();
    blocks.sort_by_key(|b| b.first().copied());
    Partition { blocks }
}

/// The coarsest strong-bisimulation partition of `c`.
pub fn quotient(c: &Clts) -> Partition {
    to_partition(Refinement::new(successors(c, 0)).last())
}

/// Decides whether `s1` in `c1` and `s2` in `c2` are strongly bisimilar,
/// matching labels by name. When they are not, the result carries a
/// formula satisfied by `s1` and not by `s2`.
pub fn strong_bisimilar(c1: &Clts, s1: StateId, c2: &Clts, s2: StateId) -> Result<Bisimilarity, UnknownState> {
    if !c1.contains_state(s1) {
        return Err(UnknownState(s1));
    }
    if !c2.contains_state(s2) {
        return Err(UnknownState(s2));
    }
    let n1 = c1.num_states();
    let mut succ = successors(c1, 0);
    succ.extend(successors(c2, n1));
    let refinement = Refinement::new(succ);
    let (a, b) = (s1.0, s2.0 + n1);
    if refinement.last()[a] == refinement.last()[b] {
        return Ok(Bisimilarity { bisimilar: true, distinguishing: None });
    }
    let phi = refinement.distinguish(a, b, &mut HashMap::new());
    Ok(Bisimilarity { bisimilar: false, distinguishing: Some(phi) })
}
