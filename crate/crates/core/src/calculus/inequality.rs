//! Resource inequalities and the transformations the proof engine applies.

use std::collections::BTreeMap;
use std::fmt;

use super::entexpr::{party_swap_label, EntExpr, LabelSet};
use super::resource::{fmt_side, ResourceExpr, ResourceTerm};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Ge,
    Eq,
}

/// `lhs >= rhs` (or `lhs = rhs`) under an optional purity context: the set of
/// labels jointly declared to carry a pure state, which licenses complement
/// reductions in the coefficients.
#[derive(Debug, Clone)]
pub struct Inequality {
    pub lhs: ResourceExpr,
    pub rhs: ResourceExpr,
    pub relation: Relation,
    pub purity: LabelSet,
}

type Side = BTreeMap<ResourceTerm, EntExpr>;

/// Move terms whose coefficient is elementwise nonpositive to the other side
/// with the sign flipped, so arithmetic leftovers like `-1/2*I(R;A)*[qq]`
/// normalize away.
fn balance(lhs: &mut Side, rhs: &mut Side, purity: &LabelSet) {
    let flip = |from: &mut Side, to: &mut Side| {
        let movers: Vec<ResourceTerm> = from
            .iter()
            .filter(|(_, c)| elementwise_nonpos(c))
            .map(|(t, _)| t.clone())
            .collect();
        for t in movers {
            let c = from.remove(&t).unwrap();
            let entry = to.entry(t).or_insert_with(EntExpr::zero);
            *entry = entry.add(&c.neg()).canonicalize(purity);
        }
        to.retain(|_, c| !c.is_zero());
    };
    flip(lhs, rhs);
    flip(rhs, lhs);
}

fn elementwise_nonpos(e: &EntExpr) -> bool {
    !e.is_zero()
        && e.terms().values().all(|c| !num_traits::Signed::is_positive(c))
        && !num_traits::Signed::is_positive(&e.constant_part())
}

impl Inequality {
    pub fn new(lhs: ResourceExpr, rhs: ResourceExpr, relation: Relation, purity: LabelSet) -> Self {
        Inequality { lhs, rhs, relation, purity }
    }

    /// Canonical (lhs, rhs) maps: coefficients canonicalized and merged,
    /// zeros dropped, nonpositive coefficients moved across.
    pub fn canonical_sides(&self) -> (Side, Side) {
        let mut l = self.lhs.canonical(&self.purity);
        let mut r = self.rhs.canonical(&self.purity);
        balance(&mut l, &mut r, &self.purity);
        (l, r)
    }

    /// Semantic equality: same relation and identical canonical sides; for
    /// equalities the orientation is immaterial.
    pub fn canon_eq(&self, other: &Inequality) -> bool {
        if self.relation != other.relation {
            return false;
        }
        let (l1, r1) = self.canonical_sides();
        let (l2, r2) = other.canonical_sides();
        if l1 == l2 && r1 == r2 {
            return true;
        }
        self.relation == Relation::Eq && l1 == r2 && r1 == l2
    }

    pub fn labels(&self) -> LabelSet {
        let mut out = self.lhs.labels();
        out.extend(self.rhs.labels());
        out.extend(self.purity.iter().cloned());
        out
    }

    /// Resource reversal: exchanging the two sides reverses the statement
    /// read as a conversion.
    pub fn reverse(&self) -> Inequality {
        Inequality {
            lhs: self.rhs.clone(),
            rhs: self.lhs.clone(),
            relation: self.relation,
            purity: self.purity.clone(),
        }
    }

    /// Time reversal composed with a party swap. Undirected resources
    /// (ebits, common randomness, shared states, feedback channels) change
    /// sides; directed point-to-point units stay put. All A/B labels are
    /// then exchanged, so directed units end up with their original
    /// direction and the parties' roles are swapped. An involution.
    pub fn time_reverse(&self) -> Inequality {
        let mut new_lhs: Vec<(EntExpr, ResourceTerm)> = Vec::new();
        let mut new_rhs: Vec<(EntExpr, ResourceTerm)> = Vec::new();
        for (c, t) in &self.lhs.terms {
            if t.is_directed_unit() {
                new_lhs.push((c.clone(), t.flip_direction()));
            } else {
                new_rhs.push((c.clone(), t.clone()));
            }
        }
        for (c, t) in &self.rhs.terms {
            if t.is_directed_unit() {
                new_rhs.push((c.clone(), t.flip_direction()));
            } else {
                new_lhs.push((c.clone(), t.clone()));
            }
        }
        let swap = |terms: Vec<(EntExpr, ResourceTerm)>| -> ResourceExpr {
            ResourceExpr::new(
                terms
                    .into_iter()
                    .map(|(c, t)| (c.party_swap(), t.party_swap()))
                    .collect(),
            )
        };
        Inequality {
            lhs: swap(new_lhs),
            rhs: swap(new_rhs),
            relation: self.relation,
            purity: self.purity.iter().map(|l| party_swap_label(l)).collect(),
        }
    }

    /// Renames labels and resource names (`old=new`), deletes trivial
    /// systems (`old=0`), and substitutes whole resource terms. Renames must
    /// not merge two distinct names.
    pub fn relabel(
        &self,
        names: &[(String, Option<String>)],
        term_subst: &[(ResourceTerm, ResourceTerm)],
    ) -> Result<Inequality> {
        let mut used = self.labels();
        used.extend(self.lhs.names());
        used.extend(self.rhs.names());
        let mut map: BTreeMap<String, Option<String>> = BTreeMap::new();
        for (old, new) in names {
            if map.insert(old.clone(), new.clone()).is_some() {
                return Err(Error::InvalidArgument(format!(
                    "label `{old}` renamed twice"
                )));
            }
        }
        let targets: Vec<&String> = map.values().flatten().collect();
        for t in &targets {
            let collides_existing = used.contains(*t) && !map.contains_key(*t);
            let collides_target = targets.iter().filter(|u| u == &t).count() > 1;
            if collides_existing || collides_target {
                return Err(Error::InvalidArgument(format!(
                    "relabeling to `{t}` would merge distinct names"
                )));
            }
        }
        let rename_map: BTreeMap<String, String> = map
            .iter()
            .filter_map(|(k, v)| v.clone().map(|v| (k.clone(), v)))
            .collect();
        let deleted: Vec<&String> = map
            .iter()
            .filter(|(_, v)| v.is_none())
            .map(|(k, _)| k)
            .collect();
        let apply_side = |side: &ResourceExpr| -> Result<ResourceExpr> {
            let mut terms = Vec::with_capacity(side.terms.len());
            for (coeff, term) in &side.terms {
                let mut term = term.clone();
                for (from, to) in term_subst {
                    if term.canonical() == from.canonical() {
                        term = to.clone();
                    }
                }
                let term = term.relabel(&map)?;
                let mut coeff = coeff.relabel(&rename_map);
                for d in &deleted {
                    coeff = coeff.remove_label(d);
                }
                terms.push((coeff, term));
            }
            Ok(ResourceExpr::new(terms))
        };
        let purity: LabelSet = self
            .purity
            .iter()
            .filter(|l| !deleted.contains(l))
            .map(|l| rename_map.get(l).cloned().unwrap_or_else(|| l.clone()))
            .collect();
        Ok(Inequality {
            lhs: apply_side(&self.lhs)?,
            rhs: apply_side(&self.rhs)?,
            relation: self.relation,
            purity,
        })
    }

    /// Declares a purity context and re-canonicalizes the coefficients.
    pub fn rewrite_purity(&self, purity: LabelSet) -> Inequality {
        Inequality {
            lhs: self.lhs.clone(),
            rhs: self.rhs.clone(),
            relation: self.relation,
            purity,
        }
    }

    fn merged_purity(&self, other: &Inequality) -> Result<LabelSet> {
        if self.purity.is_empty() {
            Ok(other.purity.clone())
        } else if other.purity.is_empty() || self.purity == other.purity {
            Ok(self.purity.clone())
        } else {
            Err(Error::InvalidArgument(format!(
                "incompatible purity contexts {{{}}} and {{{}}}",
                self.purity.iter().cloned().collect::<Vec<_>>().join(","),
                other.purity.iter().cloned().collect::<Vec<_>>().join(","),
            )))
        }
    }

    fn check_relative_consistency(&self) -> Result<()> {
        let mut seen: BTreeMap<(String, Vec<String>, Vec<String>), Option<String>> =
            BTreeMap::new();
        for (_, t) in self.lhs.terms.iter().chain(self.rhs.terms.iter()) {
            if let ResourceTerm::Channel { name, ins, outs, relative } = &t.canonical() {
                let key = (name.clone(), ins.clone(), outs.clone());
                if let Some(prev) = seen.get(&key) {
                    if prev != relative {
                        return Err(Error::InvalidArgument(format!(
                            "channel `{name}` appears relative to different input states"
                        )));
                    }
                } else {
                    seen.insert(key, relative.clone());
                }
            }
        }
        Ok(())
    }

    /// Sums two statements. If the second is the exact reverse of the first
    /// (both `>=`), the sum collapses to an equality of the first statement's
    /// sides. Otherwise the sides concatenate; the result is an equality only
    /// when both inputs are.
    pub fn add(&self, other: &Inequality) -> Result<Inequality> {
        let purity = self.merged_purity(other)?;
        let a = Inequality { purity: purity.clone(), ..self.clone() };
        let b = Inequality { purity: purity.clone(), ..other.clone() };
        if a.relation == Relation::Ge && b.relation == Relation::Ge {
            let (l1, r1) = a.canonical_sides();
            let (l2, r2) = b.canonical_sides();
            if l1 == r2 && r1 == l2 {
                let eq = Inequality {
                    lhs: ResourceExpr::from_canonical(l1),
                    rhs: ResourceExpr::from_canonical(r1),
                    relation: Relation::Eq,
                    purity,
                };
                eq.check_relative_consistency()?;
                return Ok(eq);
            }
        }
        let relation = if a.relation == Relation::Eq && b.relation == Relation::Eq {
            Relation::Eq
        } else {
            Relation::Ge
        };
        let sum = Inequality {
            lhs: a.lhs.concat(&b.lhs),
            rhs: a.rhs.concat(&b.rhs),
            relation,
            purity,
        };
        sum.check_relative_consistency()?;
        Ok(sum)
    }

    /// Subtracts `amount` of `term` from both sides. If the term only occurs
    /// on the right, the subtraction is a weakening, valid for `>=`. Each
    /// affected coefficient must remain recognizably nonnegative.
    pub fn cancel(&self, term: &ResourceTerm, amount: &EntExpr) -> Result<Inequality> {
        let key = term.canonical();
        let amt = amount.canonicalize(&self.purity);
        if !amt.recognized_nonneg(&self.purity) {
            return Err(Error::InvalidArgument(format!(
                "cancellation amount {amt} is not recognized as nonnegative"
            )));
        }
        let (mut l, mut r) = self.canonical_sides();
        let on_lhs = l.contains_key(&key);
        let on_rhs = r.contains_key(&key);
        if !on_lhs && !on_rhs {
            return Err(Error::InvalidArgument(format!(
                "term {term} does not occur in the statement"
            )));
        }
        if on_lhs && !on_rhs {
            return Err(Error::InvalidArgument(format!(
                "term {term} occurs only on the left; removing it would strengthen the statement"
            )));
        }
        if on_lhs {
            let c = l.get(&key).unwrap().clone();
            let rest = c.sub(&amt).canonicalize(&self.purity);
            if !rest.recognized_nonneg(&self.purity) {
                return Err(Error::InvalidArgument(format!(
                    "cancelling {amt} of {term} leaves {rest} on the left, not recognized as nonnegative"
                )));
            }
            if rest.is_zero() {
                l.remove(&key);
            } else {
                l.insert(key.clone(), rest);
            }
        } else if self.relation == Relation::Eq {
            return Err(Error::InvalidArgument(format!(
                "term {term} occurs only on the right of an equality; weakening needs `>=`"
            )));
        }
        {
            let c = r.get(&key).unwrap().clone();
            let rest = c.sub(&amt).canonicalize(&self.purity);
            if !rest.recognized_nonneg(&self.purity) {
                return Err(Error::InvalidArgument(format!(
                    "cancelling {amt} of {term} leaves {rest} on the right, not recognized as nonnegative"
                )));
            }
            if rest.is_zero() {
                r.remove(&key);
            } else {
                r.insert(key, rest);
            }
        }
        Ok(Inequality {
            lhs: ResourceExpr::from_canonical(l),
            rhs: ResourceExpr::from_canonical(r),
            relation: self.relation,
            purity: self.purity.clone(),
        })
    }

    /// Composes `self` (whose right side is produced) with `other` (whose
    /// left side is consumed). One side may carry extra resources: either
    /// `other.lhs = self.rhs + E` or `self.rhs = other.lhs + D` with the
    /// surplus recognizably nonnegative. Result: `self.lhs + E >= other.rhs + D`.
    pub fn chain(&self, other: &Inequality) -> Result<Inequality> {
        let purity = self.merged_purity(other)?;
        let a = Inequality { purity: purity.clone(), ..self.clone() };
        let b = Inequality { purity: purity.clone(), ..other.clone() };
        let (_, produced) = a.canonical_sides();
        let (consumed, _) = b.canonical_sides();

        let diff = |big: &Side, small: &Side| -> Option<Side> {
            let mut extra = Side::new();
            for (t, c) in big {
                let have = small.get(t).cloned().unwrap_or_else(EntExpr::zero);
                let rest = c.sub(&have).canonicalize(&purity);
                if rest.is_zero() {
                    continue;
                }
                if !rest.recognized_nonneg(&purity) {
                    return None;
                }
                extra.insert(t.clone(), rest);
            }
            for t in small.keys() {
                if !big.contains_key(t) {
                    return None;
                }
            }
            Some(extra)
        };

        let (extra_in, extra_out) = if let Some(e) = diff(&consumed, &produced) {
            (e, Side::new())
        } else if let Some(d) = diff(&produced, &consumed) {
            (Side::new(), d)
        } else {
            let missing: Vec<String> = consumed
                .iter()
                .filter(|(t, _)| !produced.contains_key(*t))
                .map(|(t, _)| t.to_string())
                .collect();
            return Err(Error::InvalidArgument(format!(
                "cannot chain: produced and consumed resources do not nest (unmatched: {})",
                if missing.is_empty() {
                    "coefficient mismatch".to_string()
                } else {
                    missing.join(", ")
                }
            )));
        };

        let mut lhs = a.lhs.clone();
        for (t, c) in extra_in {
            lhs = lhs.concat(&ResourceExpr::single(c, t));
        }
        let mut rhs = b.rhs.clone();
        for (t, c) in extra_out {
            rhs = rhs.concat(&ResourceExpr::single(c, t));
        }
        Ok(Inequality { lhs, rhs, relation: Relation::Ge, purity })
    }
}

impl fmt::Display for Inequality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (l, r) = self.canonical_sides();
        let rel = match self.relation {
            Relation::Ge => ">=",
            Relation::Eq => "=",
        };
        write!(f, "{} {} {}", fmt_side(&l), rel, fmt_side(&r))?;
        if !self.purity.is_empty() {
            let labels: Vec<&str> = self.purity.iter().map(|s| s.as_str()).collect();
            write!(f, "  [pure {}]", labels.join(","))?;
        }
        Ok(())
    }
}
