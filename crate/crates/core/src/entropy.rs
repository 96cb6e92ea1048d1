//! Entropic functionals: von Neumann entropy and quantum mutual information
//! of labeled states, Shannon quantities of classical joint distributions,
//! and the qubit/ebit coefficient pair of a quantum feedback channel.
//!
//! All logarithms are base 2; units are bits, ebits and qubits per copy or
//! per channel use.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::{Isometry, MultiState, PureState};
use crate::{EIG_CLAMP, TOL_TRACE};

/// Shannon entropy of a Bernoulli(p) bit.
pub fn binary_entropy(p: f64) -> f64 {
    xlog2x(p) + xlog2x(1.0 - p)
}

/// -x log2(x), with 0 log 0 := 0 and tiny negatives clamped.
fn xlog2x(x: f64) -> f64 {
    if x < EIG_CLAMP {
        0.0
    } else {
        -x * x.log2()
    }
}

fn spectrum_entropy(eigs: &[f64]) -> f64 {
    eigs.iter().map(|&l| xlog2x(l)).sum()
}

/// Von Neumann entropy (bits) of the reduction of `s` to `subset`.
/// The empty subset has entropy 0.
pub fn von_neumann_entropy(s: &MultiState, subset: &[&str]) -> Result<f64> {
    if subset.is_empty() {
        return Ok(0.0);
    }
    let reduced = s.partial_trace(subset)?;
    Ok(spectrum_entropy(&reduced.eigenvalues()))
}

/// Von Neumann entropy of a subset of a pure state's systems.
pub fn von_neumann_entropy_pure(s: &PureState, subset: &[&str]) -> Result<f64> {
    if subset.is_empty() {
        return Ok(0.0);
    }
    let reduced = s.partial_trace(subset)?;
    Ok(spectrum_entropy(&reduced.eigenvalues()))
}

fn check_disjoint(x: &[&str], y: &[&str]) -> Result<()> {
    for a in x {
        if y.contains(a) {
            return Err(Error::InvalidArgument(format!(
                "subsets overlap on label `{a}`"
            )));
        }
    }
    Ok(())
}

/// I(X;Y) = H(X) + H(Y) - H(XY) over disjoint label subsets.
pub fn mutual_information(s: &MultiState, x: &[&str], y: &[&str]) -> Result<f64> {
    check_disjoint(x, y)?;
    let hx = von_neumann_entropy(s, x)?;
    let hy = von_neumann_entropy(s, y)?;
    let joint: Vec<&str> = x.iter().chain(y.iter()).cloned().collect();
    let hxy = von_neumann_entropy(s, &joint)?;
    Ok(hx + hy - hxy)
}

pub fn mutual_information_pure(s: &PureState, x: &[&str], y: &[&str]) -> Result<f64> {
    check_disjoint(x, y)?;
    let hx = von_neumann_entropy_pure(s, x)?;
    let hy = von_neumann_entropy_pure(s, y)?;
    let joint: Vec<&str> = x.iter().chain(y.iter()).cloned().collect();
    let hxy = von_neumann_entropy_pure(s, &joint)?;
    Ok(hx + hy - hxy)
}

/// A (qubit-channel, ebit) rate pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatePair {
    /// Qubits per channel use.
    pub q: f64,
    /// Ebits per channel use.
    pub e: f64,
}

/// The coefficient pair (1/2 I(R;B), 1/2 I(A;B)) of a quantum feedback
/// channel evaluated on a given input.
///
/// Builds the canonical purification of `rho` with reference `R`, pushes it
/// through `u`, and groups the output systems by owner: labels starting with
/// `A` stay with Alice, labels starting with `B` go to Bob. The Alice group
/// may be empty (no feedback), in which case the ebit coefficient is 0.
pub fn feedback_coefficients(u: &Isometry, rho: &MultiState) -> Result<RatePair> {
    for s in u.in_systems() {
        let found = rho
            .systems()
            .iter()
            .find(|t| t.name == s.name)
            .ok_or_else(|| Error::UnknownLabel(s.name.clone()))?;
        if found.dim != s.dim {
            return Err(Error::DimensionMismatch(format!(
                "input `{}`: dim {} in state, {} in channel",
                s.name, found.dim, s.dim
            )));
        }
    }
    if rho.systems().len() != u.in_systems().len() {
        return Err(Error::InvalidArgument(
            "state must live exactly on the channel input systems".into(),
        ));
    }
    let mut alice: Vec<&str> = Vec::new();
    let mut bob: Vec<&str> = Vec::new();
    for s in u.out_systems() {
        if s.name == "R" {
            return Err(Error::DuplicateLabel("R".into()));
        }
        if s.name.starts_with('A') {
            alice.push(&s.name);
        } else if s.name.starts_with('B') {
            bob.push(&s.name);
        } else {
            return Err(Error::InvalidArgument(format!(
                "output `{}` is neither an A- nor a B-system",
                s.name
            )));
        }
    }
    let phi = rho.purify("R")?;
    let psi = u.apply_pure(&phi)?;
    let q = 0.5 * mutual_information_pure(&psi, &["R"], &bob)?;
    let e = if alice.is_empty() {
        0.0
    } else {
        0.5 * mutual_information_pure(&psi, &alice, &bob)?
    };
    Ok(RatePair { q, e })
}

/// The three link values (1/2 I(R;A), 1/2 I(R;B), 1/2 I(A;B)) of a
/// tripartite pure state; pairwise sums reproduce the node entropies.
pub fn triangle_link_values(psi: &PureState) -> Result<(f64, f64, f64)> {
    if psi.systems().len() != 3 {
        return Err(Error::InvalidArgument(format!(
            "expected a tripartite state, got {} systems",
            psi.systems().len()
        )));
    }
    let names: Vec<&str> = psi.labels();
    let (r, a, b) = (names[0], names[1], names[2]);
    Ok((
        0.5 * mutual_information_pure(psi, &[r], &[a])?,
        0.5 * mutual_information_pure(psi, &[r], &[b])?,
        0.5 * mutual_information_pure(psi, &[a], &[b])?,
    ))
}

// ---------------------------------------------------------------------------
// Classical joint distributions
// ---------------------------------------------------------------------------

/// A joint probability mass function over named finite random variables,
/// flattened row-major over the product alphabet.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JointPMF {
    pub variables: Vec<(String, usize)>,
    pub probs: Vec<f64>,
}

impl JointPMF {
    pub fn new(variables: Vec<(String, usize)>, probs: Vec<f64>) -> Result<Self> {
        let total: usize = variables.iter().map(|(_, n)| n).product();
        if probs.len() != total {
            return Err(Error::InvalidPmf(format!(
                "expected {total} entries, got {}",
                probs.len()
            )));
        }
        if probs.iter().any(|&p| p < 0.0) {
            return Err(Error::InvalidPmf("negative probability".into()));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > TOL_TRACE {
            return Err(Error::InvalidPmf(format!("total mass {sum} != 1")));
        }
        Ok(JointPMF { variables, probs })
    }

    fn positions(&self, subset: &[&str]) -> Result<Vec<usize>> {
        subset
            .iter()
            .map(|name| {
                self.variables
                    .iter()
                    .position(|(n, _)| n == name)
                    .ok_or_else(|| Error::UnknownLabel(name.to_string()))
            })
            .collect()
    }

    /// Marginal pmf over a subset of variables (in their original order).
    pub fn marginal(&self, subset: &[&str]) -> Result<Vec<f64>> {
        let mut pos = self.positions(subset)?;
        pos.sort_unstable();
        let dims: Vec<usize> = self.variables.iter().map(|(_, n)| *n).collect();
        let sizes: Vec<usize> = pos.iter().map(|&p| dims[p]).collect();
        let total: usize = sizes.iter().product();
        let mut out = vec![0.0; total];
        for (flat, &p) in self.probs.iter().enumerate() {
            let mut key = 0usize;
            let mut stride: usize = 1;
            for &k in pos.iter().rev() {
                let mut rem = flat;
                for j in (k + 1..dims.len()).rev() {
                    rem /= dims[j];
                }
                let idx = rem % dims[k];
                key += idx * stride;
                stride *= dims[k];
            }
            out[key] += p;
        }
        Ok(out)
    }

    /// Shannon entropy (bits) of a subset of variables.
    pub fn shannon_entropy(&self, subset: &[&str]) -> Result<f64> {
        if subset.is_empty() {
            return Ok(0.0);
        }
        Ok(self.marginal(subset)?.iter().map(|&p| xlog2x(p)).sum())
    }

    /// I(X;Y) = H(X) + H(Y) - H(XY).
    pub fn mutual_information(&self, x: &[&str], y: &[&str]) -> Result<f64> {
        check_disjoint(x, y)?;
        let joint: Vec<&str> = x.iter().chain(y.iter()).cloned().collect();
        Ok(self.shannon_entropy(x)? + self.shannon_entropy(y)? - self.shannon_entropy(&joint)?)
    }

    /// H(X|Y) = H(XY) - H(Y).
    pub fn conditional_entropy(&self, x: &[&str], given: &[&str]) -> Result<f64> {
        check_disjoint(x, given)?;
        let joint: Vec<&str> = x.iter().chain(given.iter()).cloned().collect();
        Ok(self.shannon_entropy(&joint)? - self.shannon_entropy(given)?)
    }

    /// Input distribution pushed through a channel: p(x,y) = p(x) w(y|x).
    pub fn from_channel(
        x_name: &str,
        y_name: &str,
        input: &[f64],
        channel: &[Vec<f64>],
    ) -> Result<JointPMF> {
        if channel.len() != input.len() {
            return Err(Error::InvalidPmf("channel rows must match input size".into()));
        }
        let ny = channel.first().map(|r| r.len()).unwrap_or(0);
        let mut probs = Vec::with_capacity(input.len() * ny);
        for (px, row) in input.iter().zip(channel) {
            if row.len() != ny {
                return Err(Error::InvalidPmf("ragged channel matrix".into()));
            }
            for &w in row {
                probs.push(px * w);
            }
        }
        JointPMF::new(
            vec![(x_name.to_string(), input.len()), (y_name.to_string(), ny)],
            probs,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{Isometry, MultiState, PureState, SystemLabel};
    use crate::protocols::cobit_isometry;
    use crate::TOL_NUM;
    use approx::assert_relative_eq;
    use nalgebra::DMatrix;

    #[test]
    fn epr_marginal_entropy_is_one() {
        let phi = PureState::epr("A", "B").unwrap();
        assert_relative_eq!(
            von_neumann_entropy_pure(&phi, &["A"]).unwrap(),
            1.0,
            epsilon = TOL_NUM
        );
    }

    #[test]
    fn pure_state_has_zero_entropy() {
        let zero = PureState::basis("A", 2, 0).unwrap().to_density();
        assert_relative_eq!(von_neumann_entropy(&zero, &["A"]).unwrap(), 0.0, epsilon = TOL_NUM);
    }

    #[test]
    fn two_ghz_copies_have_local_entropy_two() {
        let g1 = PureState::ghz("R1", "A1", "B1").unwrap();
        let g2 = PureState::ghz("R2", "A2", "B2").unwrap();
        let gg = g1.tensor(&g2).unwrap();
        assert_relative_eq!(
            von_neumann_entropy_pure(&gg, &["R1", "R2"]).unwrap(),
            2.0,
            epsilon = TOL_NUM
        );
    }

    #[test]
    fn ghz_pairwise_mutual_information_is_one() {
        let ghz = PureState::ghz("R", "A", "B").unwrap();
        assert_relative_eq!(
            mutual_information_pure(&ghz, &["R"], &["B"]).unwrap(),
            1.0,
            epsilon = TOL_NUM
        );
    }

    #[test]
    fn product_state_has_zero_mutual_information() {
        let a = MultiState::qubit_diag("A", 0.3).unwrap();
        let b = MultiState::qubit_diag("B", 0.7).unwrap();
        let ab = a.tensor(&b).unwrap();
        assert_relative_eq!(
            mutual_information(&ab, &["A"], &["B"]).unwrap(),
            0.0,
            epsilon = TOL_NUM
        );
    }

    #[test]
    fn appending_channel_output_decouples_r_from_b() {
        // phi^{R A1} tensor phi^{A2 B}: I(R;B) = 0.
        let left = PureState::epr("R", "A1").unwrap();
        let right = PureState::epr("A2", "B").unwrap();
        let psi = left.tensor(&right).unwrap();
        assert_relative_eq!(
            mutual_information_pure(&psi, &["R"], &["B"]).unwrap(),
            0.0,
            epsilon = TOL_NUM
        );
    }

    #[test]
    fn mutual_information_rejects_overlap() {
        let ghz = PureState::ghz("R", "A", "B").unwrap();
        assert!(mutual_information_pure(&ghz, &["R", "A"], &["A"]).is_err());
    }

    #[test]
    fn cobit_on_maximally_mixed_gives_half_half() {
        let delta = cobit_isometry();
        let tau = MultiState::maximally_mixed("A'", 2).unwrap();
        let pair = feedback_coefficients(&delta, &tau).unwrap();
        assert_relative_eq!(pair.q, 0.5, epsilon = TOL_NUM);
        assert_relative_eq!(pair.e, 0.5, epsilon = TOL_NUM);
    }

    #[test]
    fn identity_channel_gives_schumacher_rate() {
        let id = Isometry::identity("A'", "B", 2).unwrap();
        let rho = MultiState::qubit_diag("A'", 0.9).unwrap();
        let pair = feedback_coefficients(&id, &rho).unwrap();
        assert_relative_eq!(pair.q, binary_entropy(0.1), epsilon = TOL_NUM);
        assert_relative_eq!(pair.e, 0.0, epsilon = TOL_NUM);
    }

    #[test]
    fn appending_channel_gives_one_ebit() {
        // A' -> A1 A2 B, relabeling A' as A1 and appending phi^{A2 B}.
        let phi = PureState::epr("A2", "B").unwrap();
        let mut m = DMatrix::<super::super::quantum::C64>::zeros(8, 2);
        for i in 0..2 {
            for (j, amp) in phi.vector().iter().enumerate() {
                m[(i * 4 + j, i)] = *amp;
            }
        }
        let append = Isometry::new(
            vec![SystemLabel::new("A'", 2)],
            vec![
                SystemLabel::new("A1", 2),
                SystemLabel::new("A2", 2),
                SystemLabel::new("B", 2),
            ],
            m,
        )
        .unwrap();
        let rho = MultiState::qubit_diag("A'", 0.7).unwrap();
        let pair = feedback_coefficients(&append, &rho).unwrap();
        assert_relative_eq!(pair.q, 0.0, epsilon = TOL_NUM);
        assert_relative_eq!(pair.e, 1.0, epsilon = TOL_NUM);
    }

    #[test]
    fn triangle_links_of_ghz_are_all_half() {
        let ghz = PureState::ghz("R", "A", "B").unwrap();
        let (ra, rb, ab) = triangle_link_values(&ghz).unwrap();
        assert_relative_eq!(ra, 0.5, epsilon = TOL_NUM);
        assert_relative_eq!(rb, 0.5, epsilon = TOL_NUM);
        assert_relative_eq!(ab, 0.5, epsilon = TOL_NUM);
    }

    #[test]
    fn triangle_links_of_product_pair() {
        let psi = PureState::epr("R", "A")
            .unwrap()
            .tensor(&PureState::basis("B", 2, 0).unwrap())
            .unwrap();
        let (ra, rb, ab) = triangle_link_values(&psi).unwrap();
        assert_relative_eq!(ra, 1.0, epsilon = TOL_NUM);
        assert_relative_eq!(rb, 0.0, epsilon = TOL_NUM);
        assert_relative_eq!(ab, 0.0, epsilon = TOL_NUM);
    }

    #[test]
    fn noiseless_bit_channel_quantities() {
        let p = JointPMF::from_channel(
            "X",
            "Y",
            &[0.5, 0.5],
            &[vec![1.0, 0.0], vec![0.0, 1.0]],
        )
        .unwrap();
        assert_relative_eq!(p.mutual_information(&["X"], &["Y"]).unwrap(), 1.0, epsilon = TOL_NUM);
        assert_relative_eq!(p.conditional_entropy(&["Y"], &["X"]).unwrap(), 0.0, epsilon = TOL_NUM);
    }

    #[test]
    fn independent_bits_quantities() {
        let p = JointPMF::new(
            vec![("X".into(), 2), ("Y".into(), 2)],
            vec![0.25; 4],
        )
        .unwrap();
        assert_relative_eq!(p.mutual_information(&["X"], &["Y"]).unwrap(), 0.0, epsilon = TOL_NUM);
        assert_relative_eq!(p.conditional_entropy(&["Y"], &["X"]).unwrap(), 1.0, epsilon = TOL_NUM);
    }

    #[test]
    fn bsc_quantities_match_binary_entropy() {
        let f = 0.11;
        let p = JointPMF::from_channel(
            "X",
            "Y",
            &[0.5, 0.5],
            &[vec![1.0 - f, f], vec![f, 1.0 - f]],
        )
        .unwrap();
        assert_relative_eq!(
            p.mutual_information(&["X"], &["Y"]).unwrap(),
            1.0 - binary_entropy(f),
            epsilon = TOL_NUM
        );
        assert_relative_eq!(
            p.conditional_entropy(&["Y"], &["X"]).unwrap(),
            binary_entropy(f),
            epsilon = TOL_NUM
        );
    }

    #[test]
    fn pmf_validation() {
        assert!(JointPMF::new(vec![("X".into(), 2)], vec![0.7, 0.7]).is_err());
        assert!(JointPMF::new(vec![("X".into(), 2)], vec![-0.1, 1.1]).is_err());
        assert!(JointPMF::new(vec![("X".into(), 2)], vec![0.5]).is_err());
    }
}
