//! Rate-region exploration: random input sampling, weighted-objective
//! ascent, Pareto filtering and classical capacity via Blahut-Arimoto.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use crate::entropy::{feedback_coefficients, RatePair};
use crate::quantum::{C64, Isometry, MultiState, SystemLabel};
use crate::{Error, Result};

/// Finite-difference step for the ascent gradient.
const FD_STEP: f64 = 1e-5;
/// Ascent stops once the objective gain falls below this.
const ASCENT_GAIN_TOL: f64 = 1e-8;
const ASCENT_MAX_ITERS: usize = 10_000;

/// A sampled or optimized view of a channel's (qubit, ebit) rate region.
#[derive(Debug, Clone, Serialize)]
pub struct RegionResult {
    pub points: Vec<RatePair>,
    pub frontier: Vec<RatePair>,
    pub samples: usize,
    pub seed: u64,
}

impl RegionResult {
    /// `q,e,kind` rows; frontier points are repeated with kind `frontier`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("q,e,kind\n");
        for p in &self.points {
            out.push_str(&format!("{:.12},{:.12},sample\n", p.q, p.e));
        }
        for p in &self.frontier {
            out.push_str(&format!("{:.12},{:.12},frontier\n", p.q, p.e));
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!(self)
    }
}

fn input_dims(u: &Isometry) -> Vec<SystemLabel> {
    u.in_systems().to_vec()
}

/// Hilbert-Schmidt random density operator on the given systems: G G† / tr
/// for a complex Gaussian G.
fn random_density(systems: &[SystemLabel], rng: &mut ChaCha8Rng) -> Result<MultiState> {
    let d: usize = systems.iter().map(|s| s.dim).product();
    let mut g = DMatrix::<C64>::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            g[(i, j)] = C64::new(gaussian(rng), gaussian(rng));
        }
    }
    let mut m = &g * g.adjoint();
    let tr = m.trace().re;
    m /= C64::new(tr, 0.0);
    MultiState::new(systems.to_vec(), m)
}

/// Box-Muller standard normal.
fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen::<f64>();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

fn sample_point(u: &Isometry, systems: &[SystemLabel], seed: u64, stream: u64) -> Result<RatePair> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let rho = random_density(systems, &mut rng)?;
    feedback_coefficients(u, &rho)
}

/// Evaluates the channel's rate pair on `samples` Hilbert-Schmidt random
/// inputs. Each sample draws from its own counter-derived substream, so the
/// result is independent of evaluation order and identical with and without
/// the `parallel` feature.
pub fn sample_region(u: &Isometry, samples: usize, seed: u64) -> Result<RegionResult> {
    let systems = input_dims(u);
    #[cfg(feature = "parallel")]
    let points: Result<Vec<RatePair>> = {
        use rayon::prelude::*;
        (0..samples)
            .into_par_iter()
            .map(|i| sample_point(u, &systems, seed, i as u64))
            .collect()
    };
    #[cfg(not(feature = "parallel"))]
    let points: Result<Vec<RatePair>> = (0..samples)
        .map(|i| sample_point(u, &systems, seed, i as u64))
        .collect();
    let points = points?;
    let frontier = pareto_frontier(&points);
    Ok(RegionResult { points, frontier, samples, seed })
}

/// Sequential twin of [`sample_region`], kept callable under every feature
/// set for benchmarking.
pub fn sample_region_seq(u: &Isometry, samples: usize, seed: u64) -> Result<RegionResult> {
    let systems = input_dims(u);
    let points: Result<Vec<RatePair>> = (0..samples)
        .map(|i| sample_point(u, &systems, seed, i as u64))
        .collect();
    let points = points?;
    let frontier = pareto_frontier(&points);
    Ok(RegionResult { points, frontier, samples, seed })
}

/// Non-dominated points (maximizing both coordinates), input order kept.
pub fn pareto_frontier(points: &[RatePair]) -> Vec<RatePair> {
    points
        .iter()
        .filter(|p| {
            !points.iter().any(|q| {
                q.q >= p.q && q.e >= p.e && (q.q > p.q || q.e > p.e)
            })
        })
        .cloned()
        .collect()
}

/// Result of a weighted-objective ascent.
#[derive(Debug, Clone, Serialize)]
pub struct AscentResult {
    pub best: RatePair,
    pub objective: f64,
    pub converged: bool,
    pub restarts: usize,
}

/// Parameterizes a density operator by the real and imaginary parts of a
/// d x d factor G, rho = G G† / tr.
fn density_from_params(systems: &[SystemLabel], params: &[f64]) -> Result<MultiState> {
    let d: usize = systems.iter().map(|s| s.dim).product();
    let mut g = DMatrix::<C64>::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            let k = 2 * (i * d + j);
            g[(i, j)] = C64::new(params[k], params[k + 1]);
        }
    }
    let mut m = &g * g.adjoint();
    let tr = m.trace().re;
    if tr <= 0.0 || !tr.is_finite() {
        return Err(Error::InvalidArgument("degenerate factor in ascent".into()));
    }
    m /= C64::new(tr, 0.0);
    MultiState::new(systems.to_vec(), m)
}

/// Maximizes lambda * q + (1 - lambda) * e over channel inputs by
/// finite-difference gradient ascent with an adaptive step, restarted from
/// `restarts` random factors. Returns the best rate pair found and whether
/// the best run converged.
pub fn maximize_weighted(
    u: &Isometry,
    lambda: f64,
    restarts: usize,
    seed: u64,
) -> Result<AscentResult> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidArgument(format!("lambda = {lambda} outside [0, 1]")));
    }
    if restarts == 0 {
        return Err(Error::InvalidArgument("need at least one restart".into()));
    }
    let systems = input_dims(u);
    let d: usize = systems.iter().map(|s| s.dim).product();
    let objective = |params: &[f64]| -> Result<f64> {
        let rho = density_from_params(&systems, params)?;
        let pair = feedback_coefficients(u, &rho)?;
        Ok(lambda * pair.q + (1.0 - lambda) * pair.e)
    };

    let run = |stream: u64| -> Result<(f64, Vec<f64>, bool)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let mut x: Vec<f64> = (0..2 * d * d).map(|_| gaussian(&mut rng)).collect();
        let mut fx = objective(&x)?;
        let mut step = 0.1;
        let mut converged = false;
        for _ in 0..ASCENT_MAX_ITERS {
            let mut grad = vec![0.0; x.len()];
            for k in 0..x.len() {
                let mut xp = x.clone();
                xp[k] += FD_STEP;
                let mut xm = x.clone();
                xm[k] -= FD_STEP;
                grad[k] = (objective(&xp)? - objective(&xm)?) / (2.0 * FD_STEP);
            }
            let norm: f64 = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
            if norm < ASCENT_GAIN_TOL {
                converged = true;
                break;
            }
            let mut advanced = false;
            while step > 1e-12 {
                let cand: Vec<f64> = x
                    .iter()
                    .zip(&grad)
                    .map(|(xi, gi)| xi + step * gi / norm)
                    .collect();
                let fc = objective(&cand)?;
                if fc > fx {
                    let gain = fc - fx;
                    x = cand;
                    fx = fc;
                    advanced = true;
                    if gain < ASCENT_GAIN_TOL {
                        converged = true;
                    } else {
                        step *= 1.2;
                    }
                    break;
                }
                step *= 0.5;
            }
            if !advanced {
                // no improving direction even at the smallest step
                converged = true;
            }
            if converged {
                break;
            }
        }
        Ok((fx, x, converged))
    };

    #[cfg(feature = "parallel")]
    let runs: Result<Vec<(f64, Vec<f64>, bool)>> = {
        use rayon::prelude::*;
        (0..restarts)
            .into_par_iter()
            .map(|i| run(i as u64))
            .collect()
    };
    #[cfg(not(feature = "parallel"))]
    let runs: Result<Vec<(f64, Vec<f64>, bool)>> =
        (0..restarts).map(|i| run(i as u64)).collect();
    let runs = runs?;
    let (fx, x, converged) = runs
        .into_iter()
        .max_by(|a, b| a.0.partial_cmp(&b.0).unwrap())
        .expect("at least one restart");
    let rho = density_from_params(&systems, &x)?;
    let best = feedback_coefficients(u, &rho)?;
    Ok(AscentResult { best, objective: fx, converged, restarts })
}

/// Channel capacity of a discrete memoryless channel (rows w(y|x)) in bits,
/// by Blahut-Arimoto iteration; terminates when the capacity bracket
/// max_x D(w(.|x) || p) - I(r) drops below `tol`.
pub fn blahut_arimoto(rows: &[Vec<f64>], tol: f64) -> Result<f64> {
    let nx = rows.len();
    if nx == 0 {
        return Err(Error::InvalidPmf("channel has no inputs".into()));
    }
    let ny = rows[0].len();
    if ny == 0 {
        return Err(Error::InvalidPmf("channel has no outputs".into()));
    }
    if tol <= 0.0 || tol.is_nan() {
        return Err(Error::InvalidArgument(format!("tol = {tol} must be positive")));
    }
    for (x, row) in rows.iter().enumerate() {
        if row.len() != ny {
            return Err(Error::InvalidPmf(format!("row {x} has length {}", row.len())));
        }
        if row.iter().any(|&w| w < 0.0 || !w.is_finite()) {
            return Err(Error::InvalidPmf(format!("row {x} has a negative entry")));
        }
        let s: f64 = row.iter().sum();
        if (s - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidPmf(format!("row {x} sums to {s}")));
        }
    }
    let mut r = vec![1.0 / nx as f64; nx];
    for _ in 0..100_000 {
        let mut p = vec![0.0f64; ny];
        for (x, row) in rows.iter().enumerate() {
            for y in 0..ny {
                p[y] += r[x] * row[y];
            }
        }
        // Relative entropies of each row against the output distribution.
        let d: Vec<f64> = rows
            .iter()
            .map(|row| {
                row.iter()
                    .zip(&p)
                    .filter(|(w, _)| **w > 0.0)
                    .map(|(w, py)| w * (w / py).log2())
                    .sum()
            })
            .collect();
        let lower: f64 = r.iter().zip(&d).map(|(ri, di)| ri * di).sum();
        let upper = d.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if upper - lower < tol {
            return Ok(lower);
        }
        let mut z = 0.0;
        for x in 0..nx {
            r[x] *= (d[x] * std::f64::consts::LN_2).exp();
            z += r[x];
        }
        for rx in &mut r {
            *rx /= z;
        }
    }
    Err(Error::InvalidArgument(
        "Blahut-Arimoto did not reach the requested tolerance".into(),
    ))
}

/// The binary symmetric channel with flip probability `p`.
pub fn bsc(p: f64) -> Vec<Vec<f64>> {
    vec![vec![1.0 - p, p], vec![p, 1.0 - p]]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::binary_entropy;
    use crate::protocols::cobit_isometry;
    use approx::assert_relative_eq;

    #[test]
    fn sampling_is_seed_deterministic_and_order_independent() {
        let u = cobit_isometry();
        let a = sample_region(&u, 40, 7).unwrap();
        let b = sample_region(&u, 40, 7).unwrap();
        let c = sample_region_seq(&u, 40, 7).unwrap();
        for ((pa, pb), pc) in a.points.iter().zip(&b.points).zip(&c.points) {
            assert_eq!(pa.q.to_bits(), pb.q.to_bits());
            assert_eq!(pa.q.to_bits(), pc.q.to_bits());
            assert_eq!(pa.e.to_bits(), pc.e.to_bits());
        }
        let d = sample_region(&u, 40, 8).unwrap();
        assert!(a.points.iter().zip(&d.points).any(|(x, y)| x.q != y.q));
    }

    #[test]
    fn cobit_samples_stay_inside_the_feasible_triangle() {
        let u = cobit_isometry();
        let r = sample_region(&u, 60, 11).unwrap();
        for p in &r.points {
            assert!(p.q >= -1e-12 && p.q <= 0.5 + 1e-9);
            assert!(p.e >= -1e-12 && p.e <= 1.0 + 1e-9);
            // q + e = H(B) for a single-qubit output, so the pair sits under the line q + e = 1
            assert!(p.q + p.e <= 1.0 + 1e-9);
        }
        assert!(!r.frontier.is_empty());
    }

    #[test]
    fn pareto_filter_keeps_only_non_dominated_points() {
        let pts = vec![
            RatePair { q: 0.1, e: 0.4 },
            RatePair { q: 0.3, e: 0.3 },
            RatePair { q: 0.2, e: 0.2 }, // dominated by (0.3, 0.3)
            RatePair { q: 0.4, e: 0.1 },
        ];
        let f = pareto_frontier(&pts);
        assert_eq!(f.len(), 3);
        assert!(f.iter().all(|p| !(p.q == 0.2 && p.e == 0.2)));
    }

    #[test]
    fn ascent_finds_the_cobit_corner() {
        let u = cobit_isometry();
        let res = maximize_weighted(&u, 1.0, 4, 3).unwrap();
        assert!(res.best.q > 0.5 - 1e-4, "q = {}", res.best.q);
    }

    #[test]
    fn blahut_arimoto_on_the_bsc() {
        let cap = blahut_arimoto(&bsc(0.11), 1e-9).unwrap();
        assert_relative_eq!(cap, 1.0 - binary_entropy(0.11), epsilon = 1e-6);
    }

    #[test]
    fn blahut_arimoto_dominates_uniform_input_mi() {
        use crate::entropy::JointPMF;
        let rows = vec![vec![0.7, 0.2, 0.1], vec![0.0, 0.6, 0.4]];
        let cap = blahut_arimoto(&rows, 1e-9).unwrap();
        let pmf = JointPMF::from_channel("X", "Y", &[0.5, 0.5], &rows).unwrap();
        let mi = pmf.mutual_information(&["X"], &["Y"]).unwrap();
        assert!(cap >= mi - 1e-9, "capacity {cap} below uniform MI {mi}");
    }

    #[test]
    fn blahut_arimoto_rejects_bad_rows() {
        assert!(blahut_arimoto(&[vec![0.5, 0.6]], 1e-9).is_err());
        assert!(blahut_arimoto(&[vec![0.5, 0.5], vec![1.0]], 1e-9).is_err());
        assert!(blahut_arimoto(&[], 1e-9).is_err());
    }

    #[test]
    fn csv_has_header_and_rows() {
        let u = cobit_isometry();
        let r = sample_region(&u, 5, 1).unwrap();
        let csv = r.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "q,e,kind");
        assert_eq!(csv.lines().count(), 1 + r.points.len() + r.frontier.len());
    }
}
