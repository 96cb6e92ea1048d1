//! Randomized invariants tying the symbolic layer to the numeric one.

use std::collections::BTreeMap;

use nalgebra::DVector;
use num_rational::Rational64;
use proptest::prelude::*;
use qrw_core::calculus::{labelset, AxiomDb, EntExpr, LabelSet};
use qrw_core::entropy::von_neumann_entropy_pure;
use qrw_core::quantum::{PureState, SystemLabel, C64};

type Rat = Rational64;

fn rat(n: i64, d: i64) -> Rat {
    Rat::new(n, d)
}

/// A random pure state on three qubits R, A, B.
fn tripartite_pure() -> impl Strategy<Value = PureState> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 8)
        .prop_filter("amplitude vector too close to zero", |amps| {
            amps.iter().map(|(re, im)| re * re + im * im).sum::<f64>() > 1e-3
        })
        .prop_map(|amps| {
            let norm = amps.iter().map(|(re, im)| re * re + im * im).sum::<f64>().sqrt();
            let v = DVector::from_iterator(8, amps.iter().map(|(re, im)| C64::new(re / norm, im / norm)));
            PureState::new(
                vec![
                    SystemLabel::new("R", 2),
                    SystemLabel::new("A", 2),
                    SystemLabel::new("B", 2),
                ],
                v,
            )
            .unwrap()
        })
}

/// A random entropy expression over subsets of {R, A, B} with small
/// rational coefficients.
fn random_entexpr() -> impl Strategy<Value = EntExpr> {
    let subsets: Vec<LabelSet> = {
        let labels = ["R", "A", "B"];
        let mut out = Vec::new();
        for mask in 1u8..8 {
            let set: LabelSet = labels
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, l)| l.to_string())
                .collect();
            out.push(set);
        }
        out
    };
    prop::collection::vec((0usize..7, -3i64..=3, 1i64..=4), 0..6).prop_map(move |picks| {
        let mut e = EntExpr::zero();
        for (idx, num, den) in picks {
            e = e.add(&EntExpr::entropy(subsets[idx].clone()).scale(rat(num, den)));
        }
        e
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    // The coherent-information split of a pure tripartite state: half the
    // mutual informations with the reference and the partner add up to the
    // local entropy.
    #[test]
    fn half_mutual_informations_add_to_local_entropy(psi in tripartite_pure()) {
        let lhs = EntExpr::mutual(labelset(["R"]), labelset(["A"]))
            .scale(rat(1, 2))
            .add(&EntExpr::mutual(labelset(["A"]), labelset(["B"])).scale(rat(1, 2)))
            .eval_pure(&psi)
            .unwrap();
        let rhs = EntExpr::entropy(labelset(["A"])).eval_pure(&psi).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-7, "lhs {lhs} rhs {rhs}");
    }

    // On a globally pure state every subset has the entropy of its
    // complement.
    #[test]
    fn complement_subsets_have_equal_entropy(psi in tripartite_pure()) {
        let parts = ["R", "A", "B"];
        for mask in 1u8..7 {
            let inside: Vec<&str> = parts
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, l)| *l)
                .collect();
            let outside: Vec<&str> = parts
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) == 0)
                .map(|(_, l)| *l)
                .collect();
            let hi = von_neumann_entropy_pure(&psi, &inside).unwrap();
            let ho = von_neumann_entropy_pure(&psi, &outside).unwrap();
            prop_assert!((hi - ho).abs() < 1e-7, "H({inside:?}) = {hi}, H({outside:?}) = {ho}");
        }
    }

    // Canonicalization is a projection: applying it twice changes nothing.
    #[test]
    fn canonicalize_is_idempotent(e in random_entexpr(), pure in prop::bool::ANY) {
        let purity = if pure { labelset(["R", "A", "B"]) } else { LabelSet::new() };
        let once = e.canonicalize(&purity);
        let twice = once.canonicalize(&purity);
        prop_assert_eq!(once, twice);
    }

    // Rewriting under the purity context never changes the numeric value on
    // a state that actually is globally pure.
    #[test]
    fn canonical_form_agrees_numerically(e in random_entexpr(), psi in tripartite_pure()) {
        let purity = labelset(["R", "A", "B"]);
        let raw = e.eval_pure(&psi).unwrap();
        let canon = e.canonicalize(&purity).eval_pure(&psi).unwrap();
        prop_assert!((raw - canon).abs() < 1e-7, "raw {raw} canon {canon}");
    }

    // Relabeling along a bijection and back is the identity.
    #[test]
    fn relabel_roundtrips(e in random_entexpr()) {
        let mut fwd = BTreeMap::new();
        fwd.insert("R".to_string(), "S".to_string());
        fwd.insert("A".to_string(), "X".to_string());
        let mut back = BTreeMap::new();
        back.insert("S".to_string(), "R".to_string());
        back.insert("X".to_string(), "A".to_string());
        prop_assert_eq!(e.relabel(&fwd).relabel(&back), e);
    }
}

// Structural involutions exercised over the whole axiom database.
#[test]
fn reverse_and_time_reverse_are_involutions() {
    let db = AxiomDb::builtin();
    for axiom in db.iter() {
        let s = &axiom.statement;
        assert!(
            s.reverse().reverse().canon_eq(s),
            "reverse is not an involution on {}",
            axiom.name
        );
        assert!(
            s.time_reverse().time_reverse().canon_eq(s),
            "time reversal is not an involution on {}",
            axiom.name
        );
    }
}

#[test]
fn party_swap_is_an_involution_on_expressions() {
    let e = EntExpr::mutual(labelset(["R"]), labelset(["A", "B'"]))
        .add(&EntExpr::entropy(labelset(["A1"])).scale(rat(3, 2)));
    assert_eq!(e.party_swap().party_swap(), e);
}
