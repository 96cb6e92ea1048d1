//! Command-line front end for the resource workbench.
//!
//! Exit codes: 0 on success, 1 when a verification or proof fails, 2 on
//! invalid input.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use qrw_core::calculus::{parse_script, AxiomDb};
use qrw_core::entropy::{binary_entropy, feedback_coefficients, von_neumann_entropy};
use qrw_core::protocols::{
    coherent_sdc, coherent_teleport, concentration_sweep, concentration_yield,
    double_delta_reference, entropy_coincidence_demo, equal_up_to_global_phase,
    schumacher_fidelity, teleport_reference,
};
use qrw_core::quantum::{Isometry, MultiState, QObject};
use qrw_core::region::{blahut_arimoto, bsc, maximize_weighted, sample_region};
use qrw_core::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Parser)]
#[command(name = "qrw", about = "quantum resource workbench", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output format (csv only where tabular output exists).
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write output to a file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Von Neumann entropy of a subset of a state's systems.
    Entropy {
        /// State file (density or pure, workbench JSON).
        #[arg(long = "in")]
        input: PathBuf,
        /// Comma-separated subsystem labels; repeatable. All systems when omitted.
        #[arg(long)]
        subset: Vec<String>,
    },
    /// Rate coefficients (q, e) of an isometric channel on a given input.
    Coeffs {
        /// Channel file (isometry, workbench JSON).
        #[arg(long)]
        channel: PathBuf,
        /// Input state file (density, workbench JSON).
        #[arg(long)]
        state: PathBuf,
    },
    /// Replay a proof script against the axiom database.
    Prove {
        /// Proof script (.deriv).
        script: PathBuf,
        /// Alternative axiom database file.
        #[arg(long)]
        axioms: Option<PathBuf>,
    },
    /// List the axiom database.
    Axioms,
    /// Sample a channel's rate region on random inputs.
    Region {
        #[arg(long)]
        channel: PathBuf,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Maximize lambda*q + (1-lambda)*e over channel inputs.
    Maximize {
        #[arg(long)]
        channel: PathBuf,
        #[arg(long)]
        lambda: f64,
        #[arg(long, default_value_t = 8)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Finite-blocklength protocol simulations.
    Simulate {
        #[command(subcommand)]
        kind: Simulation,
    },
    /// Check the coherent dense-coding and teleportation circuit identities.
    VerifyCobit,
    /// Entropy coincidence of two inequivalent three-party states.
    GhzDemo,
    /// Channel capacity of a discrete channel by Blahut-Arimoto.
    Capacity {
        /// Rows `w(y|x)` as `p11,p12;p21,p22`.
        #[arg(long, conflicts_with = "bsc")]
        rows: Option<String>,
        /// Shortcut: binary symmetric channel with this flip probability.
        #[arg(long)]
        bsc: Option<f64>,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
}

#[derive(Subcommand)]
enum Simulation {
    /// Expected per-copy ebit yield of entanglement concentration.
    Concentration {
        #[arg(long)]
        p: f64,
        /// Blocklength; may repeat for a sweep.
        #[arg(long, required = true, num_args = 1.., value_delimiter = ',')]
        n: Vec<u64>,
    },
    /// Retained fidelity of block compression at a fixed rate.
    Schumacher {
        #[arg(long)]
        p: f64,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        rate: f64,
    },
}

fn read_density(path: &Path) -> Result<MultiState, Error> {
    match QObject::from_json_str(&fs::read_to_string(path)?)? {
        QObject::Density(s) => Ok(s),
        QObject::Pure(s) => Ok(s.to_density()),
        QObject::IsometryObj(_) => Err(Error::InvalidArgument(format!(
            "{} holds an isometry, expected a state",
            path.display()
        ))),
    }
}

fn read_isometry(path: &Path) -> Result<Isometry, Error> {
    match QObject::from_json_str(&fs::read_to_string(path)?)? {
        QObject::IsometryObj(v) => Ok(v),
        _ => Err(Error::InvalidArgument(format!(
            "{} does not hold an isometry",
            path.display()
        ))),
    }
}

fn parse_rows(text: &str) -> Result<Vec<Vec<f64>>, Error> {
    text.split(';')
        .map(|row| {
            row.split(',')
                .map(|v| {
                    v.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::InvalidArgument(format!("bad probability `{v}`")))
                })
                .collect()
        })
        .collect()
}

/// Verification failures exit 1; everything else that goes wrong is an
/// input error and exits 2.
enum Outcome {
    Ok(String),
    Failed(String),
}

fn run(cli: &Cli) -> Result<Outcome, Error> {
    let format = cli.format;
    match &cli.command {
        Command::Entropy { input, subset } => {
            let state = read_density(input)?;
            let subsets: Vec<Vec<String>> = if subset.is_empty() {
                vec![state.labels().iter().map(|l| l.to_string()).collect()]
            } else {
                subset
                    .iter()
                    .map(|s| s.split(',').map(|l| l.trim().to_string()).collect())
                    .collect()
            };
            let mut lines = Vec::new();
            let mut records = Vec::new();
            for labels in &subsets {
                let refs: Vec<&str> = labels.iter().map(|s| s.as_str()).collect();
                let h = von_neumann_entropy(&state, &refs)?;
                lines.push(format!("H({}) = {:.9}", labels.join(","), h));
                records.push(json!({"subset": labels, "entropy": h}));
            }
            Ok(Outcome::Ok(match format {
                Format::Json => serde_json::Value::Array(records).to_string(),
                _ => lines.join("\n"),
            }))
        }
        Command::Coeffs { channel, state } => {
            let u = read_isometry(channel)?;
            let rho = read_density(state)?;
            let pair = feedback_coefficients(&u, &rho)?;
            Ok(Outcome::Ok(match format {
                Format::Json => serde_json::to_string(&pair)?,
                Format::Csv => format!("q,e\n{:.12},{:.12}", pair.q, pair.e),
                Format::Text => format!("q = {:.9}\ne = {:.9}", pair.q, pair.e),
            }))
        }
        Command::Prove { script, axioms } => {
            let db = match axioms {
                Some(path) => AxiomDb::parse(&fs::read_to_string(path)?)?,
                None => AxiomDb::builtin(),
            };
            let name = script
                .file_stem()
                .and_then(|s| s.to_str())
                .unwrap_or("script")
                .to_string();
            let deriv = parse_script(&name, &fs::read_to_string(script)?)?;
            let report = deriv.verify(&db);
            let rendered = match format {
                Format::Json => serde_json::to_string_pretty(&report)?,
                _ => report.to_string(),
            };
            if report.passed {
                Ok(Outcome::Ok(rendered))
            } else {
                Ok(Outcome::Failed(rendered))
            }
        }
        Command::Axioms => {
            let db = AxiomDb::builtin();
            Ok(Outcome::Ok(match format {
                Format::Json => serde_json::to_string_pretty(
                    &db.iter()
                        .map(|a| {
                            json!({
                                "name": a.name,
                                "note": a.note,
                                "statement": a.statement.to_string(),
                            })
                        })
                        .collect::<Vec<_>>(),
                )?,
                _ => db
                    .iter()
                    .map(|a| format!("{:<28} {}", a.name, a.statement))
                    .collect::<Vec<_>>()
                    .join("\n"),
            }))
        }
        Command::Region { channel, samples, seed } => {
            let u = read_isometry(channel)?;
            let result = sample_region(&u, *samples, *seed)?;
            Ok(Outcome::Ok(match format {
                Format::Json => result.to_json().to_string(),
                _ => result.to_csv(),
            }))
        }
        Command::Maximize { channel, lambda, restarts, seed } => {
            let u = read_isometry(channel)?;
            let res = maximize_weighted(&u, *lambda, *restarts, *seed)?;
            Ok(Outcome::Ok(match format {
                Format::Json => serde_json::to_string(&res)?,
                _ => format!(
                    "q = {:.9}\ne = {:.9}\nobjective = {:.9}\nconverged = {}",
                    res.best.q, res.best.e, res.objective, res.converged
                ),
            }))
        }
        Command::Simulate { kind } => match kind {
            Simulation::Concentration { p, n } => {
                let points = if n.len() == 1 {
                    vec![concentration_yield(*p, n[0])?]
                } else {
                    concentration_sweep(*p, n)?
                };
                Ok(Outcome::Ok(match format {
                    Format::Json => serde_json::to_string(&points)?,
                    Format::Csv => {
                        let mut out = String::from("n,per_copy,target,gap\n");
                        for y in &points {
                            out.push_str(&format!(
                                "{},{:.12},{:.12},{:.12}\n",
                                y.n, y.per_copy, y.target, y.gap
                            ));
                        }
                        out
                    }
                    Format::Text => points
                        .iter()
                        .map(|y| {
                            format!(
                                "n = {:>6}  yield/copy = {:.9}  target = {:.9}  gap = {:.2e}",
                                y.n, y.per_copy, y.target, y.gap
                            )
                        })
                        .collect::<Vec<_>>()
                        .join("\n"),
                }))
            }
            Simulation::Schumacher { p, n, rate } => {
                let f = schumacher_fidelity(*p, *n, *rate)?;
                Ok(Outcome::Ok(match format {
                    Format::Json => json!({
                        "p": p, "n": n, "rate": rate,
                        "entropy": binary_entropy(*p),
                        "fidelity": f,
                    })
                    .to_string(),
                    _ => format!("fidelity = {f:.9} (rate {rate}, h(p) = {:.9})", binary_entropy(*p)),
                }))
            }
        },
        Command::VerifyCobit => {
            let sdc_ok = equal_up_to_global_phase(
                &coherent_sdc()?,
                &double_delta_reference()?,
                1e-12,
            );
            let tp_ok = equal_up_to_global_phase(
                &coherent_teleport()?,
                &teleport_reference()?,
                1e-12,
            );
            let rendered = match format {
                Format::Json => json!({"dense_coding": sdc_ok, "teleportation": tp_ok}).to_string(),
                _ => format!(
                    "coherent dense coding  = two copy channels: {}\n\
                     coherent teleportation = relocation + two pairs: {}",
                    if sdc_ok { "ok" } else { "FAIL" },
                    if tp_ok { "ok" } else { "FAIL" },
                ),
            };
            if sdc_ok && tp_ok {
                Ok(Outcome::Ok(rendered))
            } else {
                Ok(Outcome::Failed(rendered))
            }
        }
        Command::GhzDemo => {
            let demo = entropy_coincidence_demo()?;
            Ok(Outcome::Ok(match format {
                Format::Json => serde_json::to_string_pretty(&demo)?,
                _ => {
                    let mut out = String::from("party  H(cat pair)  H(pair triangle)\n");
                    for (p, a, b) in &demo.entropies {
                        out.push_str(&format!("{p:<6} {a:>11.6}  {b:>16.6}\n"));
                    }
                    out.push_str("pair   I(cat pair)  I(pair triangle)\n");
                    for (p, a, b) in &demo.mutual {
                        out.push_str(&format!("{p:<6} {a:>11.6}  {b:>16.6}\n"));
                    }
                    out.push_str(&format!(
                        "AB marginal spectra: {:?} vs {:?}\n",
                        demo.spectrum_cat, demo.spectrum_triangle
                    ));
                    out.push_str(&format!(
                        "largest entrywise AB-marginal difference: {:.6}",
                        demo.marginal_gap
                    ));
                    out
                }
            }))
        }
        Command::Capacity { rows, bsc: flip, tol } => {
            let channel = match (rows, flip) {
                (Some(text), None) => parse_rows(text)?,
                (None, Some(p)) => {
                    if !(0.0..=1.0).contains(p) {
                        return Err(Error::InvalidArgument(format!("flip probability {p}")));
                    }
                    bsc(*p)
                }
                _ => {
                    return Err(Error::InvalidArgument(
                        "provide exactly one of --rows or --bsc".into(),
                    ))
                }
            };
            let cap = blahut_arimoto(&channel, *tol)?;
            Ok(Outcome::Ok(match format {
                Format::Json => json!({"capacity": cap}).to_string(),
                _ => format!("capacity = {cap:.9} bits/use"),
            }))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(outcome) => {
            let (text, code) = match outcome {
                Outcome::Ok(t) => (t, ExitCode::SUCCESS),
                Outcome::Failed(t) => (t, ExitCode::from(1)),
            };
            if let Some(path) = &cli.out {
                if let Err(e) = fs::write(path, text.trim_end().to_string() + "\n") {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    return ExitCode::from(2);
                }
            } else {
                println!("{}", text.trim_end());
            }
            code
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
