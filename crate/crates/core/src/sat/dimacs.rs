//! DIMACS CNF and classic weighted WCNF.
//!
//! A formula without soft clauses is written as `p cnf`; otherwise as
//! `p wcnf <vars> <clauses> <top>` with `top = 1 + sum of soft weights` and
//! every hard clause carrying weight `top`.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use thiserror::Error;

use super::{Clause, Formula, Lit};

#[derive(Debug, Error)]
pub enum DimacsError {
    #[error("io error: {0}")]
    Io(#[from] io::Error),
    #[error("line {line}: malformed header: {msg}")]
    Header { line: usize, msg: String },
    #[error("line {line}: literal {lit} exceeds declared variable count {vars}")]
    VarOutOfRange { line: usize, lit: i64, vars: usize },
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
}

pub fn write_dimacs<W: Write>(f: &Formula, out: &mut W) -> io::Result<()> {
    let clause_line = |out: &mut W, weight: Option<u64>, c: &Clause| -> io::Result<()> {
        if let Some(w) = weight {
            write!(out, "{w} ")?;
        }
        for l in c.lits() {
            write!(out, "{} ", l.to_dimacs())?;
        }
        writeln!(out, "0")
    };
    if f.soft.is_empty() {
        writeln!(out, "p cnf {} {}", f.num_vars, f.hard.len())?;
        for c in &f.hard {
            clause_line(out, None, c)?;
        }
    } else {
        let top = f.total_soft_weight() + 1;
        writeln!(
            out,
            "p wcnf {} {} {}",
            f.num_vars,
            f.hard.len() + f.soft.len(),
            top
        )?;
        for c in &f.hard {
            clause_line(out, Some(top), c)?;
        }
        for (c, w) in &f.soft {
            clause_line(out, Some(*w), c)?;
        }
    }
    Ok(())
}

pub fn to_dimacs_string(f: &Formula) -> String {
    let mut buf = Vec::new();
    write_dimacs(f, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("DIMACS output is ASCII")
}

pub fn emit_dimacs(f: &Formula, path: impl AsRef<Path>) -> Result<(), DimacsError> {
    let mut file = io::BufWriter::new(fs::File::create(path)?);
    write_dimacs(f, &mut file)?;
    file.flush()?;
    Ok(())
}

pub fn parse_dimacs(path: impl AsRef<Path>) -> Result<Formula, DimacsError> {
    parse_dimacs_str(&fs::read_to_string(path)?)
}

enum Kind {
    Cnf,
    Wcnf { top: Option<u64> },
}

pub fn parse_dimacs_str(text: &str) -> Result<Formula, DimacsError> {
    let mut header: Option<(Kind, usize)> = None;
    let mut f = Formula::new();
    // Tokens of a clause may span lines; a clause ends at 0.
    let mut pending: Vec<i64> = Vec::new();
    let mut pending_line = 0usize;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('c') || trimmed.starts_with('%') {
            continue;
        }
        if trimmed.starts_with('p') {
            if header.is_some() {
                return Err(DimacsError::Header {
                    line,
                    msg: "duplicate header".into(),
                });
            }
            header = Some(parse_header(trimmed, line)?);
            f.num_vars = header.as_ref().unwrap().1;
            continue;
        }
        let Some((kind, vars)) = header.as_ref() else {
            return Err(DimacsError::Header {
                line,
                msg: "clause before header".into(),
            });
        };
        for tok in trimmed.split_whitespace() {
            let x: i64 = tok.parse().map_err(|_| DimacsError::Syntax {
                line,
                msg: format!("bad token '{tok}'"),
            })?;
            if pending.is_empty() {
                pending_line = line;
            }
            if x != 0 || (matches!(kind, Kind::Wcnf { .. }) && pending.is_empty()) {
                pending.push(x);
                continue;
            }
            let (weight, lits) = match kind {
                Kind::Cnf => (None, &pending[..]),
                Kind::Wcnf { .. } => {
                    if pending[0] < 1 {
                        return Err(DimacsError::Syntax {
                            line: pending_line,
                            msg: "clause weight must be positive".into(),
                        });
                    }
                    (Some(pending[0] as u64), &pending[1..])
                }
            };
            let mut clause = Vec::with_capacity(lits.len());
            for &lit in lits {
                if lit.unsigned_abs() as usize > *vars {
                    return Err(DimacsError::VarOutOfRange {
                        line: pending_line,
                        lit,
                        vars: *vars,
                    });
                }
                clause.push(Lit::from_dimacs(lit).expect("non-zero literal"));
            }
            let hard = match (kind, weight) {
                (Kind::Cnf, _) => true,
                (Kind::Wcnf { top: Some(top) }, Some(w)) => w >= *top,
                _ => false,
            };
            if hard {
                f.hard.extend(Clause::new(clause));
            } else {
                f.soft.extend(Clause::new(clause).map(|c| (c, weight.unwrap())));
            }
            pending.clear();
        }
    }
    if header.is_none() {
        return Err(DimacsError::Header {
            line: 0,
            msg: "missing 'p' line".into(),
        });
    }
    if !pending.is_empty() {
        return Err(DimacsError::Syntax {
            line: pending_line,
            msg: "clause not terminated by 0".into(),
        });
    }
    Ok(f)
}

fn parse_header(line_text: &str, line: usize) -> Result<(Kind, usize), DimacsError> {
    let parts: Vec<&str> = line_text.split_whitespace().collect();
    let bad = |msg: &str| DimacsError::Header {
        line,
        msg: msg.to_string(),
    };
    let num = |s: &str| s.parse::<u64>().map_err(|_| bad("non-numeric field"));
    match parts.as_slice() {
        ["p", "cnf", v, c] => {
            num(c)?;
            Ok((Kind::Cnf, num(v)? as usize))
        }
        ["p", "wcnf", v, c] => {
            num(c)?;
            Ok((Kind::Wcnf { top: None }, num(v)? as usize))
        }
        ["p", "wcnf", v, c, top] => {
            num(c)?;
            Ok((
                Kind::Wcnf {
                    top: Some(num(top)?),
                },
                num(v)? as usize,
            ))
        }
        _ => Err(bad("expected 'p cnf <vars> <clauses>' or 'p wcnf <vars> <clauses> [top]'")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn l(x: i64) -> Lit {
        Lit::from_dimacs(x).unwrap()
    }

    #[test]
    fn cnf_format() {
        let mut f = Formula::new();
        f.num_vars = 2;
        f.add_hard([l(1), l(-2)]);
        assert_eq!(to_dimacs_string(&f), "p cnf 2 1\n1 -2 0\n");
    }

    #[test]
    fn wcnf_top_is_one_plus_soft_weights() {
        let mut f = Formula::new();
        f.add_hard([l(1), l(2)]);
        f.add_soft([l(1)], 1);
        let text = to_dimacs_string(&f);
        assert_eq!(text, "p wcnf 2 2 2\n2 1 2 0\n1 1 0\n");
        assert_eq!(parse_dimacs_str(&text).unwrap(), f);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(
            parse_dimacs_str("p cnf x 1\n1 0\n"),
            Err(DimacsError::Header { .. })
        ));
        assert!(matches!(
            parse_dimacs_str("p sat 2 1\n1 0\n"),
            Err(DimacsError::Header { .. })
        ));
        assert!(matches!(
            parse_dimacs_str("p cnf 2 1\n1 3 0\n"),
            Err(DimacsError::VarOutOfRange { lit: 3, .. })
        ));
        assert!(matches!(
            parse_dimacs_str("1 2 0\n"),
            Err(DimacsError::Header { .. })
        ));
        assert!(matches!(
            parse_dimacs_str("p cnf 2 1\n1 2\n"),
            Err(DimacsError::Syntax { .. })
        ));
    }

    #[test]
    fn comments_and_multiline_clauses() {
        let f = parse_dimacs_str("c hello\np cnf 3 2\n1 -2\n 3 0 -1 0\n").unwrap();
        assert_eq!(f.hard.len(), 2);
        assert_eq!(f.hard[0].lits(), &[l(1), l(-2), l(3)]);
        assert_eq!(f.hard[1].lits(), &[l(-1)]);
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.wcnf");
        let mut f = Formula::new();
        f.add_hard([l(1), l(-3)]);
        f.add_soft([l(2)], 4);
        f.add_soft([l(-1), l(2)], 1);
        emit_dimacs(&f, &path).unwrap();
        assert_eq!(parse_dimacs(&path).unwrap(), f);
    }

    fn arb_formula() -> impl Strategy<Value = Formula> {
        let clause = prop::collection::vec((1i64..=20, any::<bool>()), 1..=3);
        (
            prop::collection::vec(clause.clone(), 50),
            prop::collection::vec((clause, 1u64..10), 0..5),
        )
            .prop_map(|(hard, soft)| {
                let mut f = Formula::new();
                f.num_vars = 20;
                let to_lits = |c: Vec<(i64, bool)>| {
                    c.into_iter()
                        .map(|(v, s)| l(if s { v } else { -v }))
                        .collect::<Vec<_>>()
                };
                for c in hard {
                    f.add_hard(to_lits(c));
                }
                for (c, w) in soft {
                    f.add_soft(to_lits(c), w);
                }
                f
            })
    }

    proptest! {
        #[test]
        fn parse_inverts_emit(f in arb_formula()) {
            let text = to_dimacs_string(&f);
            prop_assert_eq!(parse_dimacs_str(&text).unwrap(), f);
        }
    }
}
