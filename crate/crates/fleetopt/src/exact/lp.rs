//! LP-format text export and the matching reader.
//!
//! The writer emits `Minimize / Subject To / Bounds / Binaries / End`
//! sections with one constraint per line; floats print in shortest
//! round-trip form so parsing back yields exactly equal coefficients.

use super::milp::{Constraint, MilpModel, Sense, VarKind, Variable};
use crate::error::{FleetError, Result};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

pub fn export_lp(model: &MilpModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, write_lp(model))
        .map_err(|e| FleetError::io(path.display().to_string(), e))
}

pub fn write_lp(model: &MilpModel) -> String {
    let mut out = String::new();
    out.push_str("Minimize\n obj:");
    if model.objective.is_empty() {
        out.push_str(" 0");
    } else {
        write_terms(&mut out, model, &model.objective);
    }
    out.push('\n');

    out.push_str("Subject To\n");
    for c in &model.constraints {
        write!(out, " {}:", c.name).unwrap();
        write_terms(&mut out, model, &c.terms);
        let sense = match c.sense {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        };
        writeln!(out, " {} {}", sense, c.rhs).unwrap();
    }

    out.push_str("Bounds\n");
    for var in &model.vars {
        if let VarKind::Continuous { lb, ub } = &var.kind {
            writeln!(out, " {} <= {} <= {}", lb, var.name, ub).unwrap();
        }
    }

    out.push_str("Binaries\n");
    let mut on_line = 0;
    for var in &model.vars {
        if matches!(var.kind, VarKind::Binary) {
            if on_line == 0 {
                out.push(' ');
            }
            out.push_str(&var.name);
            on_line += 1;
            if on_line == 8 {
                out.push('\n');
                on_line = 0;
            } else {
                out.push(' ');
            }
        }
    }
    if on_line != 0 {
        out.push('\n');
    }
    out.push_str("End\n");
    out
}

fn write_terms(out: &mut String, model: &MilpModel, terms: &[(f64, usize)]) {
    for (i, (coef, idx)) in terms.iter().enumerate() {
        let name = &model.vars[*idx].name;
        let sign = if *coef < 0.0 { "-" } else { "+" };
        let magnitude = coef.abs();
        if i == 0 && *coef >= 0.0 {
            if magnitude == 1.0 {
                write!(out, " {name}").unwrap();
            } else {
                write!(out, " {magnitude} {name}").unwrap();
            }
        } else if magnitude == 1.0 {
            write!(out, " {sign} {name}").unwrap();
        } else {
            write!(out, " {sign} {magnitude} {name}").unwrap();
        }
    }
}

pub fn parse_lp_file(path: impl AsRef<Path>) -> Result<MilpModel> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| FleetError::io(path.display().to_string(), e))?;
    parse_lp(&text).map_err(|e| FleetError::parse(path.display().to_string(), e))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Section {
    Preamble,
    Objective,
    Constraints,
    Bounds,
    Binaries,
    Done,
}

/// Parses text produced by [`write_lp`] back into a model. Variable order
/// follows first mention; [`super::milp::models_equal`] compares ignoring
/// order anyway.
pub fn parse_lp(text: &str) -> std::result::Result<MilpModel, String> {
    let mut model = MilpModel::default();
    let mut var_idx: BTreeMap<String, usize> = BTreeMap::new();
    let mut section = Section::Preamble;

    fn intern(
        model: &mut MilpModel,
        var_idx: &mut BTreeMap<String, usize>,
        name: &str,
    ) -> usize {
        if let Some(idx) = var_idx.get(name) {
            return *idx;
        }
        model.vars.push(Variable { name: name.to_string(), kind: VarKind::Binary });
        let idx = model.vars.len() - 1;
        var_idx.insert(name.to_string(), idx);
        idx
    }

    for raw in text.lines() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        match line {
            "Minimize" => {
                section = Section::Objective;
                continue;
            }
            "Subject To" => {
                section = Section::Constraints;
                continue;
            }
            "Bounds" => {
                section = Section::Bounds;
                continue;
            }
            "Binaries" => {
                section = Section::Binaries;
                continue;
            }
            "End" => {
                section = Section::Done;
                continue;
            }
            _ => {}
        }
        match section {
            Section::Preamble | Section::Done => {
                return Err(format!("unexpected line outside sections: '{line}'"))
            }
            Section::Objective => {
                let body = line
                    .strip_prefix("obj:")
                    .ok_or_else(|| format!("objective must start with 'obj:', got '{line}'"))?;
                let terms = parse_terms(body)?;
                for (coef, name) in terms {
                    let idx = intern(&mut model, &mut var_idx, &name);
                    model.objective.push((coef, idx));
                }
            }
            Section::Constraints => {
                let (name, rest) = line
                    .split_once(':')
                    .ok_or_else(|| format!("constraint line without name: '{line}'"))?;
                let (sense, sense_str) = if rest.contains("<=") {
                    (Sense::Le, "<=")
                } else if rest.contains(">=") {
                    (Sense::Ge, ">=")
                } else if rest.contains('=') {
                    (Sense::Eq, "=")
                } else {
                    return Err(format!("constraint without relation: '{line}'"));
                };
                let (lhs, rhs) = rest.split_once(sense_str).expect("relation located above");
                let rhs: f64 =
                    rhs.trim().parse().map_err(|e| format!("bad rhs in '{line}': {e}"))?;
                let terms = parse_terms(lhs)?
                    .into_iter()
                    .map(|(coef, name)| (coef, intern(&mut model, &mut var_idx, &name)))
                    .collect();
                model.constraints.push(Constraint {
                    name: name.trim().to_string(),
                    terms,
                    sense,
                    rhs,
                });
            }
            Section::Bounds => {
                // " lb <= name <= ub"
                let pieces: Vec<&str> = line.split("<=").map(str::trim).collect();
                if pieces.len() != 3 {
                    return Err(format!("bad bounds line: '{line}'"));
                }
                let lb: f64 = pieces[0].parse().map_err(|e| format!("bad bound: {e}"))?;
                let ub: f64 = pieces[2].parse().map_err(|e| format!("bad bound: {e}"))?;
                let idx = intern(&mut model, &mut var_idx, pieces[1]);
                model.vars[idx].kind = VarKind::Continuous { lb, ub };
            }
            Section::Binaries => {
                for name in line.split_whitespace() {
                    let idx = intern(&mut model, &mut var_idx, name);
                    model.vars[idx].kind = VarKind::Binary;
                }
            }
        }
    }
    if section != Section::Done {
        return Err("missing 'End' marker".into());
    }
    Ok(model)
}

/// Parses "[coef] name (+|- [coef] name)*"; a bare "0" denotes an empty sum.
fn parse_terms(body: &str) -> std::result::Result<Vec<(f64, String)>, String> {
    let tokens: Vec<&str> = body.split_whitespace().collect();
    if tokens == ["0"] {
        return Ok(Vec::new());
    }
    let mut terms = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        let mut sign = 1.0;
        match tokens[i] {
            "+" => i += 1,
            "-" => {
                sign = -1.0;
                i += 1;
            }
            _ => {}
        }
        if i >= tokens.len() {
            return Err(format!("dangling sign in '{body}'"));
        }
        // Either "coef name" or a bare "name" with unit coefficient.
        match tokens[i].parse::<f64>() {
            Ok(coef) => {
                i += 1;
                if i >= tokens.len() {
                    return Err(format!("coefficient without variable in '{body}'"));
                }
                terms.push((sign * coef, tokens[i].to_string()));
                i += 1;
            }
            Err(_) => {
                terms.push((sign, tokens[i].to_string()));
                i += 1;
            }
        }
    }
    Ok(terms)
}
