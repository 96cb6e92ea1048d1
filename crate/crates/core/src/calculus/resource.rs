//! Resource terms and coefficient-weighted resource expressions.

use std::collections::BTreeMap;
use std::fmt;

use super::entexpr::{party_swap_label, EntExpr, LabelSet};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Direction {
    Forward,
    Backward,
}

impl Direction {
    pub fn flip(self) -> Direction {
        match self {
            Direction::Forward => Direction::Backward,
            Direction::Backward => Direction::Forward,
        }
    }
}

/// A single resource: a standard unit, a general channel with a named
/// input/output signature (optionally relative to a named input state), or a
/// shared multipartite state.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ResourceTerm {
    /// `[q->q]` / `[q<-q]`
    Qubit(Direction),
    /// `[qq]`
    Ebit,
    /// `[c->c]` / `[c<-c]`
    Cbit(Direction),
    /// `[cc]`
    Randomness,
    /// `[q->qq]` / `[qq<-q]`
    Cobit(Direction),
    /// `<name{ins->outs}>` or `<name{ins->outs}:rel>`
    Channel {
        name: String,
        ins: Vec<String>,
        outs: Vec<String>,
        relative: Option<String>,
    },
    /// `<name@parties>`
    State { name: String, parties: Vec<String> },
}

impl ResourceTerm {
    pub fn channel(
        name: impl Into<String>,
        ins: impl IntoIterator<Item = impl Into<String>>,
        outs: impl IntoIterator<Item = impl Into<String>>,
        relative: Option<&str>,
    ) -> Self {
        ResourceTerm::Channel {
            name: name.into(),
            ins: ins.into_iter().map(Into::into).collect(),
            outs: outs.into_iter().map(Into::into).collect(),
            relative: relative.map(str::to_string),
        }
    }

    pub fn state(
        name: impl Into<String>,
        parties: impl IntoIterator<Item = impl Into<String>>,
    ) -> Self {
        ResourceTerm::State {
            name: name.into(),
            parties: parties.into_iter().map(Into::into).collect(),
        }
    }

    /// Point-to-point directed units keep their side under time reversal.
    pub fn is_directed_unit(&self) -> bool {
        matches!(
            self,
            ResourceTerm::Qubit(_) | ResourceTerm::Cbit(_) | ResourceTerm::Cobit(_)
        )
    }

    /// A channel with more than one output system feeds both parties.
    pub fn is_feedback_channel(&self) -> bool {
        matches!(self, ResourceTerm::Channel { outs, .. } if outs.len() > 1)
    }

    pub fn flip_direction(&self) -> ResourceTerm {
        match self {
            ResourceTerm::Qubit(d) => ResourceTerm::Qubit(d.flip()),
            ResourceTerm::Cbit(d) => ResourceTerm::Cbit(d.flip()),
            ResourceTerm::Cobit(d) => ResourceTerm::Cobit(d.flip()),
            other => other.clone(),
        }
    }

    /// Swaps the two parties: A-prefixed labels become B-prefixed and vice
    /// versa, and directed units flip.
    pub fn party_swap(&self) -> ResourceTerm {
        match self {
            ResourceTerm::Channel { name, ins, outs, relative } => ResourceTerm::Channel {
                name: name.clone(),
                ins: ins.iter().map(|l| party_swap_label(l)).collect(),
                outs: outs.iter().map(|l| party_swap_label(l)).collect(),
                relative: relative.clone(),
            },
            ResourceTerm::State { name, parties } => ResourceTerm::State {
                name: name.clone(),
                parties: parties.iter().map(|l| party_swap_label(l)).collect(),
            },
            directed => directed.flip_direction(),
        }
    }

    /// Canonical form for identity and map keys: label lists sorted.
    pub fn canonical(&self) -> ResourceTerm {
        match self {
            ResourceTerm::Channel { name, ins, outs, relative } => {
                let mut ins = ins.clone();
                let mut outs = outs.clone();
                ins.sort();
                outs.sort();
                ResourceTerm::Channel {
                    name: name.clone(),
                    ins,
                    outs,
                    relative: relative.clone(),
                }
            }
            ResourceTerm::State { name, parties } => {
                let mut parties = parties.clone();
                parties.sort();
                ResourceTerm::State { name: name.clone(), parties }
            }
            unit => unit.clone(),
        }
    }

    /// Renames system labels and resource names; a label mapped to `None` is
    /// deleted (the system is declared trivial).
    pub fn relabel(&self, map: &BTreeMap<String, Option<String>>) -> Result<ResourceTerm> {
        let rename = |l: &String| -> Option<String> {
            match map.get(l) {
                Some(Some(new)) => Some(new.clone()),
                Some(None) => None,
                None => Some(l.clone()),
            }
        };
        let rename_name = |n: &String| -> Result<String> {
            match map.get(n) {
                Some(Some(new)) => Ok(new.clone()),
                Some(None) => Err(Error::InvalidArgument(format!(
                    "cannot delete resource name `{n}`"
                ))),
                None => Ok(n.clone()),
            }
        };
        Ok(match self {
            ResourceTerm::Channel { name, ins, outs, relative } => {
                let ins: Vec<String> = ins.iter().filter_map(&rename).collect();
                let outs: Vec<String> = outs.iter().filter_map(&rename).collect();
                if ins.is_empty() || outs.is_empty() {
                    return Err(Error::InvalidArgument(format!(
                        "relabeling would leave channel `{name}` without inputs or outputs"
                    )));
                }
                ResourceTerm::Channel {
                    name: rename_name(name)?,
                    ins,
                    outs,
                    relative: relative.as_ref().map(&rename_name).transpose()?,
                }
            }
            ResourceTerm::State { name, parties } => {
                let parties: Vec<String> = parties.iter().filter_map(&rename).collect();
                if parties.is_empty() {
                    return Err(Error::InvalidArgument(format!(
                        "relabeling would leave state `{name}` without parties"
                    )));
                }
                ResourceTerm::State { name: rename_name(name)?, parties }
            }
            unit => unit.clone(),
        })
    }

    /// System labels used by the term.
    pub fn labels(&self) -> LabelSet {
        match self {
            ResourceTerm::Channel { ins, outs, .. } => {
                ins.iter().chain(outs.iter()).cloned().collect()
            }
            ResourceTerm::State { parties, .. } => parties.iter().cloned().collect(),
            _ => LabelSet::new(),
        }
    }
}

impl fmt::Display for ResourceTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ResourceTerm::Qubit(Direction::Forward) => write!(f, "[q->q]"),
            ResourceTerm::Qubit(Direction::Backward) => write!(f, "[q<-q]"),
            ResourceTerm::Ebit => write!(f, "[qq]"),
            ResourceTerm::Cbit(Direction::Forward) => write!(f, "[c->c]"),
            ResourceTerm::Cbit(Direction::Backward) => write!(f, "[c<-c]"),
            ResourceTerm::Randomness => write!(f, "[cc]"),
            ResourceTerm::Cobit(Direction::Forward) => write!(f, "[q->qq]"),
            ResourceTerm::Cobit(Direction::Backward) => write!(f, "[qq<-q]"),
            ResourceTerm::Channel { name, ins, outs, relative } => {
                write!(f, "<{name}{{{}->{}}}", ins.join(","), outs.join(","))?;
                if let Some(rel) = relative {
                    write!(f, ":{rel}")?;
                }
                write!(f, ">")
            }
            ResourceTerm::State { name, parties } => {
                write!(f, "<{name}@{}>", parties.join(","))
            }
        }
    }
}

/// One side of a resource inequality: a formal sum of coefficient-weighted
/// resource terms.
#[derive(Debug, Clone, Default)]
pub struct ResourceExpr {
    pub terms: Vec<(EntExpr, ResourceTerm)>,
}

impl ResourceExpr {
    pub fn new(terms: Vec<(EntExpr, ResourceTerm)>) -> Self {
        ResourceExpr { terms }
    }

    pub fn empty() -> Self {
        ResourceExpr::default()
    }

    pub fn single(coeff: EntExpr, term: ResourceTerm) -> Self {
        ResourceExpr { terms: vec![(coeff, term)] }
    }

    /// Merged canonical form: terms keyed by their canonical shape,
    /// coefficients canonicalized under the purity context, zero
    /// coefficients dropped.
    pub fn canonical(&self, purity: &LabelSet) -> BTreeMap<ResourceTerm, EntExpr> {
        let mut map: BTreeMap<ResourceTerm, EntExpr> = BTreeMap::new();
        for (coeff, term) in &self.terms {
            let c = coeff.canonicalize(purity);
            let key = term.canonical();
            let entry = map.entry(key).or_insert_with(EntExpr::zero);
            *entry = entry.add(&c).canonicalize(purity);
        }
        map.retain(|_, c| !c.is_zero());
        map
    }

    pub fn from_canonical(map: BTreeMap<ResourceTerm, EntExpr>) -> Self {
        ResourceExpr {
            terms: map.into_iter().map(|(t, c)| (c, t)).collect(),
        }
    }

    pub fn concat(&self, other: &ResourceExpr) -> ResourceExpr {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        ResourceExpr { terms }
    }

    pub fn labels(&self) -> LabelSet {
        let mut out = LabelSet::new();
        for (coeff, term) in &self.terms {
            out.extend(coeff.labels());
            out.extend(term.labels());
        }
        out
    }

    /// Resource names (channel, state, relative-state names) used.
    pub fn names(&self) -> LabelSet {
        let mut out = LabelSet::new();
        for (_, term) in &self.terms {
            match term {
                ResourceTerm::Channel { name, relative, .. } => {
                    out.insert(name.clone());
                    if let Some(rel) = relative {
                        out.insert(rel.clone());
                    }
                }
                ResourceTerm::State { name, .. } => {
                    out.insert(name.clone());
                }
                _ => {}
            }
        }
        out
    }
}

/// Prints a canonical side; `0` when empty.
pub fn fmt_side(map: &BTreeMap<ResourceTerm, EntExpr>) -> String {
    if map.is_empty() {
        return "0".to_string();
    }
    let mut parts = Vec::new();
    for (term, coeff) in map {
        if let Some(c) = coeff.as_const() {
            if c == num_rational::Rational64::from_integer(1) {
                parts.push(term.to_string());
            } else {
                let s = if c.denom() == &1 {
                    format!("{}", c.numer())
                } else {
                    format!("{}/{}", c.numer(), c.denom())
                };
                parts.push(format!("{s}*{term}"));
            }
        } else if coeff.needs_parens() {
            parts.push(format!("({coeff})*{term}"));
        } else {
            parts.push(format!("{coeff}*{term}"));
        }
    }
    parts.join(" + ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::entexpr::labelset;

    #[test]
    fn party_swap_flips_labels_and_directions() {
        let t = ResourceTerm::channel("U", ["A'"], ["A", "B"], Some("rho"));
        let s = t.party_swap();
        assert_eq!(s, ResourceTerm::channel("U", ["B'"], ["B", "A"], Some("rho")));
        let q = ResourceTerm::Qubit(Direction::Forward).party_swap();
        assert_eq!(q, ResourceTerm::Qubit(Direction::Backward));
    }

    #[test]
    fn canonical_sorts_signature_labels() {
        let a = ResourceTerm::channel("U", ["A'"], ["B", "A"], None);
        let b = ResourceTerm::channel("U", ["A'"], ["A", "B"], None);
        assert_eq!(a.canonical(), b.canonical());
    }

    #[test]
    fn relabel_deletes_trivial_systems() {
        let mut map = BTreeMap::new();
        map.insert("A".to_string(), None);
        let t = ResourceTerm::channel("U", ["A'"], ["A", "B"], Some("rho"));
        let r = t.relabel(&map).unwrap();
        assert_eq!(r, ResourceTerm::channel("U", ["A'"], ["B"], Some("rho")));
    }

    #[test]
    fn canonical_side_merges_coefficients() {
        let purity = labelset(["R", "A", "B"]);
        let half_ra = EntExpr::mutual(labelset(["R"]), labelset(["A"]))
            .scale(num_rational::Rational64::new(1, 2));
        let half_ab = EntExpr::mutual(labelset(["A"]), labelset(["B"]))
            .scale(num_rational::Rational64::new(1, 2));
        let e = ResourceExpr::new(vec![
            (half_ra, ResourceTerm::Ebit),
            (half_ab, ResourceTerm::Ebit),
        ]);
        let map = e.canonical(&purity);
        let coeff = map.get(&ResourceTerm::Ebit).unwrap();
        assert_eq!(coeff, &EntExpr::entropy(labelset(["A"])).canonicalize(&purity));
    }
}
