//! Proof scripts: parsing, replay and reporting.
//!
//! A script is a sequence of numbered steps followed by a goal:
//!
//! ```text
//! use <axiom-name>
//! add <i> <j>
//! chain <i> <j>
//! cancel <i> <term> <coefficient>
//! reverse <i>
//! timerev <i>
//! relabel <i> <entry>[,<entry>...]     entries: old=new, old=0, <term>=<term>
//! rewrite <i> purity(<labels>)
//! qed <inequality>
//! ```
//!
//! Step references are 1-based indices into the results so far. Replay is
//! purely mechanical; a script is accepted only if every step applies and
//! the final statement canonicalizes to the goal.

use serde::Serialize;
use std::fmt;

use super::axioms::AxiomDb;
use super::entexpr::{labelset, EntExpr};
use super::inequality::Inequality;
use super::parse::{parse_coefficient_at, parse_term_at, Parser};
use super::resource::ResourceTerm;
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub enum Rule {
    Use(String),
    Add(usize, usize),
    Chain(usize, usize),
    Cancel { src: usize, term: ResourceTerm, amount: EntExpr },
    Reverse(usize),
    TimeRev(usize),
    Relabel {
        src: usize,
        names: Vec<(String, Option<String>)>,
        terms: Vec<(ResourceTerm, ResourceTerm)>,
    },
    Rewrite { src: usize, purity: Vec<String> },
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rule::Use(name) => write!(f, "use {name}"),
            Rule::Add(i, j) => write!(f, "add {i} {j}"),
            Rule::Chain(i, j) => write!(f, "chain {i} {j}"),
            Rule::Cancel { src, term, amount } => write!(f, "cancel {src} {term} {amount}"),
            Rule::Reverse(i) => write!(f, "reverse {i}"),
            Rule::TimeRev(i) => write!(f, "timerev {i}"),
            Rule::Relabel { src, names, terms } => {
                let mut entries: Vec<String> = names
                    .iter()
                    .map(|(o, n)| format!("{o}={}", n.as_deref().unwrap_or("0")))
                    .collect();
                entries.extend(terms.iter().map(|(a, b)| format!("{a}={b}")));
                write!(f, "relabel {src} {}", entries.join(","))
            }
            Rule::Rewrite { src, purity } => {
                write!(f, "rewrite {src} purity({})", purity.join(","))
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct Derivation {
    pub name: String,
    pub steps: Vec<(Rule, usize)>, // rule, source line
    pub goal: Inequality,
    pub goal_text: String,
}

/// Splits at top-level commas: commas inside `<...>` or `{...}` belong to
/// label lists, not the entry separator.
fn split_entries(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0usize;
    let mut prev = ' ';
    let mut cur = String::new();
    for c in s.chars() {
        match c {
            '<' | '{' => depth += 1,
            '>' if prev != '-' => depth = depth.saturating_sub(1),
            '}' => depth = depth.saturating_sub(1),
            ',' if depth == 0 => {
                out.push(std::mem::take(&mut cur));
                prev = c;
                continue;
            }
            _ => {}
        }
        cur.push(c);
        prev = c;
    }
    if !cur.trim().is_empty() || !out.is_empty() {
        out.push(cur);
    }
    out
}

/// Splits `<entry>=<entry>` at the top-level `=`.
fn split_assignment(s: &str, line: usize) -> Result<(String, String)> {
    let mut depth = 0usize;
    let mut prev = ' ';
    for (i, c) in s.char_indices() {
        match c {
            '<' | '{' => depth += 1,
            '>' if prev != '-' => depth = depth.saturating_sub(1),
            '}' => depth = depth.saturating_sub(1),
            '=' if depth == 0 => {
                return Ok((s[..i].trim().to_string(), s[i + 1..].trim().to_string()));
            }
            _ => {}
        }
        prev = c;
    }
    Err(Error::parse(line, 1, format!("relabel entry `{s}` has no `=`")))
}

fn parse_ref(word: Option<&str>, line: usize) -> Result<usize> {
    word.and_then(|w| w.parse::<usize>().ok())
        .filter(|&n| n >= 1)
        .ok_or_else(|| Error::parse(line, 1, "expected a step reference"))
}

/// Finds the end of a leading `[...]` or `<...>` term in `s`.
fn term_end(s: &str, line: usize) -> Result<usize> {
    let mut prev = ' ';
    let closer = match s.chars().next() {
        Some('[') => ']',
        Some('<') => '>',
        _ => return Err(Error::parse(line, 1, "expected `[...]` or `<...>` after the step reference")),
    };
    for (i, c) in s.char_indices() {
        if c == closer && (closer != '>' || prev != '-') {
            return Ok(i + 1);
        }
        prev = c;
    }
    Err(Error::parse(line, 1, format!("unterminated `{}`", s.chars().next().unwrap())))
}

pub fn parse_script(name: &str, text: &str) -> Result<Derivation> {
    let mut steps = Vec::new();
    let mut goal: Option<(Inequality, String)> = None;
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if goal.is_some() {
            return Err(Error::parse(lineno, 1, "steps after `qed`"));
        }
        let (keyword, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        let rest = rest.trim();
        let rule = match keyword {
            "use" => {
                if rest.is_empty() {
                    return Err(Error::parse(lineno, 1, "expected an axiom name"));
                }
                Rule::Use(rest.to_string())
            }
            "add" | "chain" => {
                let mut words = rest.split_whitespace();
                let i = parse_ref(words.next(), lineno)?;
                let j = parse_ref(words.next(), lineno)?;
                if words.next().is_some() {
                    return Err(Error::parse(lineno, 1, "unexpected trailing input"));
                }
                if keyword == "add" {
                    Rule::Add(i, j)
                } else {
                    Rule::Chain(i, j)
                }
            }
            "reverse" | "timerev" => {
                let mut words = rest.split_whitespace();
                let i = parse_ref(words.next(), lineno)?;
                if words.next().is_some() {
                    return Err(Error::parse(lineno, 1, "unexpected trailing input"));
                }
                if keyword == "reverse" {
                    Rule::Reverse(i)
                } else {
                    Rule::TimeRev(i)
                }
            }
            "cancel" => {
                let (r, rest) = rest
                    .split_once(char::is_whitespace)
                    .ok_or_else(|| Error::parse(lineno, 1, "cancel needs a term and an amount"))?;
                let src = parse_ref(Some(r), lineno)?;
                let rest = rest.trim();
                let end = term_end(rest, lineno)?;
                let term = parse_term_at(&rest[..end], lineno)?;
                let amount_text = rest[end..].trim();
                let amount = if amount_text.is_empty() {
                    EntExpr::one()
                } else {
                    parse_coefficient_at(amount_text, lineno)?
                };
                Rule::Cancel { src, term, amount }
            }
            "relabel" => {
                let (r, rest) = rest
                    .split_once(char::is_whitespace)
                    .ok_or_else(|| Error::parse(lineno, 1, "relabel needs a map"))?;
                let src = parse_ref(Some(r), lineno)?;
                let mut names = Vec::new();
                let mut terms = Vec::new();
                for entry in split_entries(rest.trim()) {
                    let (old, new) = split_assignment(entry.trim(), lineno)?;
                    if old.starts_with('<') || old.starts_with('[') {
                        let from = parse_term_at(&old, lineno)?;
                        let to = parse_term_at(&new, lineno)?;
                        terms.push((from, to));
                    } else if new == "0" {
                        names.push((old, None));
                    } else {
                        names.push((old, Some(new)));
                    }
                }
                if names.is_empty() && terms.is_empty() {
                    return Err(Error::parse(lineno, 1, "empty relabel map"));
                }
                Rule::Relabel { src, names, terms }
            }
            "rewrite" => {
                let (r, rest) = rest
                    .split_once(char::is_whitespace)
                    .ok_or_else(|| Error::parse(lineno, 1, "rewrite needs a purity declaration"))?;
                let src = parse_ref(Some(r), lineno)?;
                let rest = rest.trim();
                let inner = rest
                    .strip_prefix("purity(")
                    .and_then(|s| s.strip_suffix(')'))
                    .ok_or_else(|| Error::parse(lineno, 1, "expected purity(<labels>)"))?;
                let purity: Vec<String> = inner
                    .split(',')
                    .map(|s| s.trim().to_string())
                    .filter(|s| !s.is_empty())
                    .collect();
                Rule::Rewrite { src, purity }
            }
            "qed" => {
                let mut p = Parser::new(rest, lineno)?;
                let g = p.inequality()?;
                p.expect_end()?;
                goal = Some((g, rest.to_string()));
                continue;
            }
            other => {
                return Err(Error::parse(lineno, 1, format!("unknown keyword `{other}`")));
            }
        };
        steps.push((rule, lineno));
    }
    let (goal, goal_text) =
        goal.ok_or_else(|| Error::parse(text.lines().count(), 1, "script has no `qed`"))?;
    if steps.is_empty() {
        return Err(Error::parse(1, 1, "script has no steps"));
    }
    Ok(Derivation { name: name.to_string(), steps, goal, goal_text })
}

#[derive(Debug, Clone, Serialize)]
pub struct StepReport {
    pub index: usize,
    pub rule: String,
    pub result: Option<String>,
    pub ok: bool,
    pub note: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProofReport {
    pub name: String,
    pub steps: Vec<StepReport>,
    pub goal: String,
    pub passed: bool,
}

impl fmt::Display for ProofReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "derivation {}", self.name)?;
        for s in &self.steps {
            let mark = if s.ok { "ok " } else { "FAIL" };
            write!(f, "  [{mark}] {:>2}. {}", s.index, s.rule)?;
            if let Some(r) = &s.result {
                write!(f, "\n            => {r}")?;
            }
            if let Some(n) = &s.note {
                write!(f, "\n            note: {n}")?;
            }
            writeln!(f)?;
        }
        writeln!(f, "  goal: {}", self.goal)?;
        writeln!(f, "  {}", if self.passed { "PROVED" } else { "NOT PROVED" })
    }
}

impl Derivation {
    /// Replays the script against the axiom database.
    pub fn verify(&self, db: &AxiomDb) -> ProofReport {
        let mut results: Vec<Inequality> = Vec::new();
        let mut steps: Vec<StepReport> = Vec::new();
        let mut failed = false;

        for (i, (rule, _line)) in self.steps.iter().enumerate() {
            let index = i + 1;
            let fetch = |n: usize| -> Result<&Inequality> {
                results
                    .get(n - 1)
                    .ok_or_else(|| Error::step(index, format!("step {n} does not exist yet")))
            };
            let outcome: Result<(Inequality, Option<String>)> = (|| {
                match rule {
                    Rule::Use(name) => {
                        let ax = db.get(name).map_err(|e| Error::step(index, e.to_string()))?;
                        Ok((ax.statement.clone(), None))
                    }
                    Rule::Add(a, b) => Ok((fetch(*a)?.add(fetch(*b)?)?, None)),
                    Rule::Chain(a, b) => Ok((fetch(*a)?.chain(fetch(*b)?)?, None)),
                    Rule::Cancel { src, term, amount } => {
                        let r = fetch(*src)?.cancel(term, amount)?;
                        Ok((
                            r,
                            Some(
                                "cancellation admitted as an engine rule; asymptotic side \
                                 conditions are not formalized"
                                    .to_string(),
                            ),
                        ))
                    }
                    Rule::Reverse(a) => Ok((fetch(*a)?.reverse(), None)),
                    Rule::TimeRev(a) => Ok((fetch(*a)?.time_reverse(), None)),
                    Rule::Relabel { src, names, terms } => {
                        Ok((fetch(*src)?.relabel(names, terms)?, None))
                    }
                    Rule::Rewrite { src, purity } => {
                        Ok((fetch(*src)?.rewrite_purity(labelset(purity.clone())), None))
                    }
                }
            })();
            match outcome {
                Ok((ineq, note)) => {
                    steps.push(StepReport {
                        index,
                        rule: rule.to_string(),
                        result: Some(ineq.to_string()),
                        ok: true,
                        note,
                    });
                    results.push(ineq);
                }
                Err(e) => {
                    steps.push(StepReport {
                        index,
                        rule: rule.to_string(),
                        result: None,
                        ok: false,
                        note: Some(e.to_string()),
                    });
                    failed = true;
                    break;
                }
            }
        }

        let mut passed = false;
        if !failed {
            let last = results.last().expect("scripts have at least one step");
            let goal = self.goal.rewrite_purity(last.purity.clone());
            passed = last.canon_eq(&goal);
            if !passed {
                if let Some(s) = steps.last_mut() {
                    s.note = Some(format!(
                        "final statement does not match the goal `{}`",
                        goal
                    ));
                }
            }
        }

        ProofReport {
            name: self.name.clone(),
            steps,
            goal: self.goal_text.clone(),
            passed,
        }
    }
}

/// Convenience: parse and verify in one call.
pub fn verify_script(name: &str, text: &str, db: &AxiomDb) -> Result<ProofReport> {
    Ok(parse_script(name, text)?.verify(db))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn db() -> AxiomDb {
        AxiomDb::builtin()
    }

    #[test]
    fn replay_cobit_identity() {
        let script = "\
use teleport-coherent
cancel 1 [qq] 1
use sdc-coherent
add 2 3
qed 2*[q->qq] = [q->q] + [qq]
";
        let report = verify_script("cobit", script, &db()).unwrap();
        assert!(report.passed, "{report}");
    }

    #[test]
    fn antisymmetric_sum_collapses_to_equality() {
        let script = "\
use schumacher
use reverse-schumacher
add 1 2
qed H(R)*[q->q] = <id{A'->B}:rho>
";
        let report = verify_script("schumacher-eq", script, &db()).unwrap();
        assert!(report.passed, "{report}");
    }

    #[test]
    fn wrong_goal_is_rejected() {
        let script = "\
use schumacher
qed H(R)*[q->q] >= <id{A'->B}>
";
        let report = verify_script("bad", script, &db()).unwrap();
        assert!(!report.passed);
    }

    #[test]
    fn unknown_axiom_fails_the_step() {
        let script = "\
use no-such-thing
qed 0 >= 0
";
        let report = verify_script("bad", script, &db()).unwrap();
        assert!(!report.passed);
        assert!(!report.steps[0].ok);
    }

    #[test]
    fn forward_references_are_rejected() {
        let script = "\
use schumacher
add 1 3
qed 0 >= 0
";
        let report = verify_script("bad", script, &db()).unwrap();
        assert!(!report.steps[1].ok);
    }
}
