//! Exact-rational linear combinations of joint-entropy terms.
//!
//! An [`EntExpr`] is a map from subsets of system labels to rational
//! coefficients plus a pure-number constant. Mutual-information and
//! conditional forms are expanded into the joint-entropy basis on
//! construction; canonicalization under a declared pure global system
//! replaces every subset by the smaller of itself and its complement,
//! which makes equality decidable by term comparison.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_rational::Rational64;
use num_traits::{One, Signed, Zero};

use crate::entropy::von_neumann_entropy_pure;
use crate::quantum::PureState;
use crate::Result;

pub type Rat = Rational64;
pub type Label = String;
pub type LabelSet = BTreeSet<Label>;

pub fn labelset<I: IntoIterator<Item = S>, S: Into<String>>(labels: I) -> LabelSet {
    labels.into_iter().map(Into::into).collect()
}

/// Swaps the A/B party prefix of a label name: A <-> B, A' <-> B',
/// A1 <-> B1, and so on. Labels owned by neither party are unchanged.
pub fn party_swap_label(name: &str) -> String {
    let mut chars = name.chars();
    match chars.next() {
        Some('A') => format!("B{}", chars.as_str()),
        Some('B') => format!("A{}", chars.as_str()),
        _ => name.to_string(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct EntExpr {
    terms: BTreeMap<LabelSet, Rat>,
    constant: Rat,
}

/// Order used to pick the representative between a subset and its
/// complement: fewer labels first, then lexicographic.
fn subset_order(a: &LabelSet, b: &LabelSet) -> std::cmp::Ordering {
    a.len().cmp(&b.len()).then_with(|| a.cmp(b))
}

impl EntExpr {
    pub fn zero() -> Self {
        EntExpr::default()
    }

    pub fn constant(c: Rat) -> Self {
        EntExpr { terms: BTreeMap::new(), constant: c }
    }

    pub fn one() -> Self {
        EntExpr::constant(Rat::one())
    }

    /// H(S) for a subset of labels.
    pub fn entropy(labels: LabelSet) -> Self {
        let mut e = EntExpr::zero();
        e.add_term(labels, Rat::one());
        e
    }

    /// I(X;Y) = H(X) + H(Y) - H(XY).
    pub fn mutual(x: LabelSet, y: LabelSet) -> Self {
        let joint: LabelSet = x.union(&y).cloned().collect();
        let mut e = EntExpr::zero();
        e.add_term(x, Rat::one());
        e.add_term(y, Rat::one());
        e.add_term(joint, -Rat::one());
        e
    }

    /// H(X|Y) = H(XY) - H(Y).
    pub fn conditional(x: LabelSet, given: LabelSet) -> Self {
        let joint: LabelSet = x.union(&given).cloned().collect();
        let mut e = EntExpr::zero();
        e.add_term(joint, Rat::one());
        e.add_term(given, -Rat::one());
        e
    }

    fn add_term(&mut self, labels: LabelSet, coeff: Rat) {
        if labels.is_empty() {
            // H(empty) = 0: contributes nothing.
            return;
        }
        let entry = self.terms.entry(labels).or_insert_with(Rat::zero);
        *entry += coeff;
        if entry.is_zero() {
            // keep the map free of stored zeros
            let key: Vec<LabelSet> = self
                .terms
                .iter()
                .filter(|(_, c)| c.is_zero())
                .map(|(k, _)| k.clone())
                .collect();
            for k in key {
                self.terms.remove(&k);
            }
        }
    }

    pub fn terms(&self) -> &BTreeMap<LabelSet, Rat> {
        &self.terms
    }

    pub fn constant_part(&self) -> Rat {
        self.constant
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty() && self.constant.is_zero()
    }

    /// Some(c) when the expression is a pure number.
    pub fn as_const(&self) -> Option<Rat> {
        if self.terms.is_empty() {
            Some(self.constant)
        } else {
            None
        }
    }

    pub fn add(&self, other: &EntExpr) -> EntExpr {
        let mut out = self.clone();
        out.constant += other.constant;
        for (k, c) in &other.terms {
            out.add_term(k.clone(), *c);
        }
        out
    }

    pub fn sub(&self, other: &EntExpr) -> EntExpr {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> EntExpr {
        EntExpr {
            terms: self.terms.iter().map(|(k, c)| (k.clone(), -c)).collect(),
            constant: -self.constant,
        }
    }

    pub fn scale(&self, s: Rat) -> EntExpr {
        if s.is_zero() {
            return EntExpr::zero();
        }
        EntExpr {
            terms: self.terms.iter().map(|(k, c)| (k.clone(), c * s)).collect(),
            constant: self.constant * s,
        }
    }

    /// All labels mentioned by the expression.
    pub fn labels(&self) -> LabelSet {
        let mut out = LabelSet::new();
        for k in self.terms.keys() {
            out.extend(k.iter().cloned());
        }
        out
    }

    /// Canonical form under a declared pure global system: every subset of
    /// the purity context is replaced by the smaller of itself and its
    /// complement (fewer labels first, ties lexicographic); the full context
    /// itself has entropy 0. Subsets with labels outside the context are
    /// left alone. Idempotent.
    pub fn canonicalize(&self, purity: &LabelSet) -> EntExpr {
        let mut out = EntExpr::constant(self.constant);
        for (subset, coeff) in &self.terms {
            if !purity.is_empty() && subset.is_subset(purity) {
                if subset == purity {
                    continue; // H of the whole pure system is 0
                }
                let complement: LabelSet = purity.difference(subset).cloned().collect();
                let rep = if subset_order(subset, &complement) == std::cmp::Ordering::Greater {
                    complement
                } else {
                    subset.clone()
                };
                out.add_term(rep, *coeff);
            } else {
                out.add_term(subset.clone(), *coeff);
            }
        }
        out
    }

    /// Applies a label renaming.
    pub fn relabel(&self, map: &BTreeMap<String, String>) -> EntExpr {
        let mut out = EntExpr::constant(self.constant);
        for (subset, coeff) in &self.terms {
            let renamed: LabelSet = subset
                .iter()
                .map(|l| map.get(l).cloned().unwrap_or_else(|| l.clone()))
                .collect();
            out.add_term(renamed, *coeff);
        }
        out
    }

    /// Removes a label everywhere, treating the corresponding system as
    /// trivial (one-dimensional).
    pub fn remove_label(&self, label: &str) -> EntExpr {
        let mut out = EntExpr::constant(self.constant);
        for (subset, coeff) in &self.terms {
            let reduced: LabelSet = subset.iter().filter(|l| *l != label).cloned().collect();
            out.add_term(reduced, *coeff);
        }
        out
    }

    pub fn party_swap(&self) -> EntExpr {
        let mut out = EntExpr::constant(self.constant);
        for (subset, coeff) in &self.terms {
            let swapped: LabelSet = subset.iter().map(|l| party_swap_label(l)).collect();
            out.add_term(swapped, *coeff);
        }
        out
    }

    /// Numeric value on a concrete pure state: the constant plus the
    /// coefficient-weighted von Neumann entropies of the subsets.
    pub fn eval_pure(&self, psi: &PureState) -> Result<f64> {
        let mut acc = rat_to_f64(self.constant);
        for (subset, coeff) in &self.terms {
            let labels: Vec<&str> = subset.iter().map(|s| s.as_str()).collect();
            acc += rat_to_f64(*coeff) * von_neumann_entropy_pure(psi, &labels)?;
        }
        Ok(acc)
    }

    /// True when every stored coefficient and the constant are >= 0.
    fn elementwise_nonneg(&self) -> bool {
        !self.constant.is_negative() && self.terms.values().all(|c| !c.is_negative())
    }

    /// Conservative symbolic nonnegativity check: the expression must be a
    /// nonnegative rational combination of entropies, mutual informations
    /// and a nonnegative constant (up to two mutual-information extractions).
    /// Sound but incomplete; general entropy-inequality proving is out of
    /// scope.
    pub fn recognized_nonneg(&self, purity: &LabelSet) -> bool {
        let canon = self.canonicalize(purity);
        recognized_nonneg_inner(&canon, purity, 2)
    }
}

fn rat_to_f64(r: Rat) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

fn nonempty_subsets(labels: &[Label]) -> Vec<LabelSet> {
    let n = labels.len();
    let mut out = Vec::new();
    for mask in 1u32..(1 << n) {
        let mut s = LabelSet::new();
        for (i, l) in labels.iter().enumerate() {
            if mask & (1 << i) != 0 {
                s.insert(l.clone());
            }
        }
        out.push(s);
    }
    out
}

fn recognized_nonneg_inner(e: &EntExpr, purity: &LabelSet, depth: usize) -> bool {
    if e.elementwise_nonneg() {
        return true;
    }
    if depth == 0 || e.constant.is_negative() {
        return false;
    }
    let labels: Vec<Label> = e.labels().into_iter().collect();
    if labels.len() > 6 {
        return false;
    }
    let subsets = nonempty_subsets(&labels);
    for x in &subsets {
        for y in &subsets {
            if x.intersection(y).next().is_some() || subset_order(x, y) == std::cmp::Ordering::Greater {
                continue;
            }
            let mi = EntExpr::mutual(x.clone(), y.clone()).canonicalize(purity);
            if mi.terms.is_empty() {
                continue;
            }
            // Feasible q interval so that e - q * mi has no negative
            // coefficient on the subsets mi touches.
            let mut lo = Rat::zero();
            let mut hi: Option<Rat> = None;
            let mut feasible = true;
            for (subset, m) in &mi.terms {
                let have = e.terms.get(subset).cloned().unwrap_or_else(Rat::zero);
                let bound = have / m;
                if m.is_positive() {
                    hi = Some(hi.map_or(bound, |h: Rat| h.min(bound)));
                } else if bound > lo {
                    lo = bound;
                }
            }
            if let Some(h) = hi {
                if h < lo {
                    feasible = false;
                }
                if feasible {
                    for q in [lo, h] {
                        if q.is_negative() {
                            continue;
                        }
                        let rest = e.sub(&mi.scale(q)).canonicalize(purity);
                        if recognized_nonneg_inner(&rest, purity, depth - 1) {
                            return true;
                        }
                    }
                }
            }
        }
    }
    false
}

fn fmt_rat(r: &Rat) -> String {
    if r.denom() == &1 {
        format!("{}", r.numer())
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for EntExpr {
    /// Prints in the joint-entropy basis, e.g. `1/2*H(R) + 1/2*H(A) - 1/2*H(B)`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (subset, coeff) in &self.terms {
            let mag = coeff.abs();
            let sign = if coeff.is_negative() { "-" } else { "+" };
            if first {
                if coeff.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            let labels: Vec<&str> = subset.iter().map(|s| s.as_str()).collect();
            if mag.is_one() {
                write!(f, "H({})", labels.join(","))?;
            } else {
                write!(f, "{}*H({})", fmt_rat(&mag), labels.join(","))?;
            }
        }
        if !self.constant.is_zero() {
            let mag = self.constant.abs();
            let sign = if self.constant.is_negative() { "-" } else { "+" };
            if first {
                if self.constant.is_negative() {
                    write!(f, "-")?;
                }
                write!(f, "{}", fmt_rat(&mag))?;
            } else {
                write!(f, " {sign} {}", fmt_rat(&mag))?;
            }
        }
        Ok(())
    }
}

impl EntExpr {
    /// True when the printed form needs parentheses inside a product.
    pub fn needs_parens(&self) -> bool {
        let summands = self.terms.len() + usize::from(!self.constant.is_zero());
        summands > 1 || self.terms.values().any(|c| c.is_negative())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> Rat {
        Rat::new(n, d)
    }

    #[test]
    fn purity_identity_for_tripartite_states() {
        // 1/2 I(R;A) + 1/2 I(A;B) = H(A) under pure {R,A,B}
        let purity = labelset(["R", "A", "B"]);
        let lhs = EntExpr::mutual(labelset(["R"]), labelset(["A"]))
            .scale(rat(1, 2))
            .add(&EntExpr::mutual(labelset(["A"]), labelset(["B"])).scale(rat(1, 2)));
        let rhs = EntExpr::entropy(labelset(["A"]));
        assert_eq!(lhs.canonicalize(&purity), rhs.canonicalize(&purity));
    }

    #[test]
    fn no_purity_means_no_reduction() {
        let e = EntExpr::mutual(labelset(["R"]), labelset(["B"]));
        let c = e.canonicalize(&LabelSet::new());
        assert_eq!(c.terms().len(), 3);
    }

    #[test]
    fn complement_rule() {
        let purity = labelset(["R", "A", "B"]);
        let e = EntExpr::entropy(labelset(["R", "A"])).canonicalize(&purity);
        assert_eq!(e, EntExpr::entropy(labelset(["B"])));
    }

    #[test]
    fn canonicalize_is_idempotent() {
        let purity = labelset(["R", "A", "B"]);
        let e = EntExpr::mutual(labelset(["R"]), labelset(["A", "B"]))
            .add(&EntExpr::conditional(labelset(["A"]), labelset(["B"])));
        let once = e.canonicalize(&purity);
        assert_eq!(once.canonicalize(&purity), once);
    }

    #[test]
    fn recognizes_mutual_information_as_nonneg() {
        let purity = labelset(["R", "A", "B"]);
        let e = EntExpr::mutual(labelset(["A"]), labelset(["B"])).scale(rat(1, 2));
        assert!(e.recognized_nonneg(&purity));
        assert!(!e.neg().recognized_nonneg(&purity));
    }

    #[test]
    fn recognizes_reduced_mutual_information() {
        // H(R) - 1/2 I(R;B) = 1/2 I(R;A) under pure {R,A,B}
        let purity = labelset(["R", "A", "B"]);
        let e = EntExpr::entropy(labelset(["R"]))
            .sub(&EntExpr::mutual(labelset(["R"]), labelset(["B"])).scale(rat(1, 2)));
        assert!(e.recognized_nonneg(&purity));
    }

    #[test]
    fn display_roundtrip_shape() {
        let purity = labelset(["R", "A", "B"]);
        let e = EntExpr::mutual(labelset(["R"]), labelset(["A"]))
            .scale(rat(1, 2))
            .canonicalize(&purity);
        assert_eq!(e.to_string(), "1/2*H(A) - 1/2*H(B) + 1/2*H(R)");
    }
}
