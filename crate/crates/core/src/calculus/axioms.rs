//! The axiom database: named inequalities the proof engine may invoke.

use super::entexpr::{labelset, LabelSet};
use super::inequality::Inequality;
use super::parse::parse_inequality_at;
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct Axiom {
    pub name: String,
    pub note: String,
    pub statement: Inequality,
}

#[derive(Debug, Clone)]
pub struct AxiomDb {
    axioms: Vec<Axiom>,
}

const BUILTIN: &str = include_str!("../../../../assets/axioms.txt");

impl AxiomDb {
    /// The database shipped with the crate.
    pub fn builtin() -> AxiomDb {
        AxiomDb::parse(BUILTIN).expect("builtin axiom database must parse")
    }

    /// Parses the block format described at the top of the database file.
    pub fn parse(text: &str) -> Result<AxiomDb> {
        let mut axioms: Vec<Axiom> = Vec::new();
        let mut name: Option<String> = None;
        let mut note = String::new();
        let mut purity = LabelSet::new();
        for (idx, raw) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(n) = line.strip_prefix("axiom ") {
                if let Some(pending) = &name {
                    return Err(Error::parse(
                        lineno,
                        1,
                        format!("axiom `{pending}` has no statement"),
                    ));
                }
                let n = n.trim();
                if axioms.iter().any(|a| a.name == n) {
                    return Err(Error::parse(lineno, 1, format!("duplicate axiom `{n}`")));
                }
                name = Some(n.to_string());
                note.clear();
                purity = LabelSet::new();
            } else if let Some(p) = line.strip_prefix("pure:") {
                purity = labelset(p.split(',').map(str::trim).filter(|s| !s.is_empty()));
            } else if let Some(n) = line.strip_prefix("note:") {
                note = n.trim().to_string();
            } else {
                let n = name.take().ok_or_else(|| {
                    Error::parse(lineno, 1, "statement outside an axiom block")
                })?;
                let ineq = parse_inequality_at(line, lineno)?;
                axioms.push(Axiom {
                    name: n,
                    note: std::mem::take(&mut note),
                    statement: ineq.rewrite_purity(std::mem::take(&mut purity)),
                });
            }
        }
        if let Some(n) = name {
            return Err(Error::parse(
                text.lines().count(),
                1,
                format!("axiom `{n}` has no statement"),
            ));
        }
        Ok(AxiomDb { axioms })
    }

    pub fn get(&self, name: &str) -> Result<&Axiom> {
        self.axioms
            .iter()
            .find(|a| a.name == name)
            .ok_or_else(|| Error::UnknownAxiom(name.to_string()))
    }

    pub fn iter(&self) -> impl Iterator<Item = &Axiom> {
        self.axioms.iter()
    }

    pub fn len(&self) -> usize {
        self.axioms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.axioms.is_empty()
    }

    /// The first axiom semantically equal to the statement, if any. A query
    /// without a purity context may adopt the axiom's.
    pub fn find_matching(&self, ineq: &Inequality) -> Option<&Axiom> {
        self.axioms.iter().find(|a| {
            if a.statement.purity == ineq.purity {
                a.statement.canon_eq(ineq)
            } else if ineq.purity.is_empty() {
                a.statement
                    .canon_eq(&ineq.rewrite_purity(a.statement.purity.clone()))
            } else {
                false
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::parse::parse_inequality;

    #[test]
    fn builtin_parses_and_is_nonempty() {
        let db = AxiomDb::builtin();
        assert!(db.len() >= 20);
        assert!(db.get("fqsw").is_ok());
        assert!(db.get("no-such-axiom").is_err());
    }

    #[test]
    fn find_matching_ignores_orientation_of_equalities() {
        let db = AxiomDb::builtin();
        let flipped = parse_inequality("[q->q] + [qq] = 2*[q->qq]").unwrap();
        assert_eq!(db.find_matching(&flipped).unwrap().name, "cobit-identity");
    }

    #[test]
    fn time_reversed_slepian_wolf_matches_nothing() {
        let db = AxiomDb::builtin();
        let sw = db.get("classical-slepian-wolf").unwrap();
        let tr = sw.statement.time_reverse();
        assert!(db.find_matching(&tr).is_none());
    }
}
