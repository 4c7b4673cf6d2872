//! Free-format MPS reader/writer and a human-readable LP dump.
//!
//! The writer emits rows and columns in declaration order, wraps runs of
//! binary columns in `INTORG`/`INTEND` markers and prints every number with
//! 17 significant digits, so [`from_mps_str`] restores the model exactly.
//! Model metadata travels in a `* predclust-meta` comment line.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::model::{Constraint, Integrality, MilpModel, ModelMetadata, Sense, Variable};
use crate::error::{Error, Result};

const META_TAG: &str = "* predclust-meta ";
const OBJ_ROW: &str = "OBJ";

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// Renders `model` as free-format MPS.
pub fn to_mps_string(model: &MilpModel) -> Result<String> {
    model.validate()?;
    if model.constraints.is_empty() {
        return Err(Error::Model("refusing to write a model without constraints".into()));
    }
    if model.constraints.iter().any(|c| c.name == OBJ_ROW) {
        return Err(Error::Model(format!("constraint name {OBJ_ROW} is reserved")));
    }
    let mut out = String::new();
    if let Some(meta) = &model.metadata {
        let json = serde_json::to_string(meta).map_err(|e| Error::Model(e.to_string()))?;
        writeln!(out, "{META_TAG}{json}").unwrap();
    }
    writeln!(out, "NAME {}", model.name).unwrap();
    out.push_str("ROWS\n");
    writeln!(out, " N {OBJ_ROW}").unwrap();
    for c in &model.constraints {
        let t = match c.sense {
            Sense::Le => 'L',
            Sense::Ge => 'G',
            Sense::Eq => 'E',
        };
        writeln!(out, " {t} {}", c.name).unwrap();
    }

    // column-major view
    let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); model.num_vars()];
    for (r, c) in model.constraints.iter().enumerate() {
        for &(j, a) in &c.coefs {
            cols[j].push((r, a));
        }
    }
    let obj = model.objective_dense();
    out.push_str("COLUMNS\n");
    let mut in_int = false;
    let mut marker = 0;
    for (j, v) in model.variables.iter().enumerate() {
        let is_int = v.integrality == Integrality::Binary;
        if is_int != in_int {
            let tag = if is_int { "INTORG" } else { "INTEND" };
            writeln!(out, "    MARKER{marker} 'MARKER' '{tag}'").unwrap();
            marker += 1;
            in_int = is_int;
        }
        let mut wrote = false;
        if obj[j] != 0.0 || cols[j].is_empty() {
            writeln!(out, "    {} {OBJ_ROW} {}", v.name, num(obj[j])).unwrap();
            wrote = true;
        }
        for &(r, a) in &cols[j] {
            writeln!(out, "    {} {} {}", v.name, model.constraints[r].name, num(a)).unwrap();
            wrote = true;
        }
        debug_assert!(wrote);
    }
    if in_int {
        writeln!(out, "    MARKER{marker} 'MARKER' 'INTEND'").unwrap();
    }

    out.push_str("RHS\n");
    for c in &model.constraints {
        if c.rhs != 0.0 {
            writeln!(out, "    RHS {} {}", c.name, num(c.rhs)).unwrap();
        }
    }

    out.push_str("BOUNDS\n");
    for v in &model.variables {
        let (lo, hi) = (v.lower, v.upper);
        if v.integrality == Integrality::Binary && lo == 0.0 && hi == 1.0 {
            writeln!(out, " BV BND {}", v.name).unwrap();
        } else if lo == hi {
            writeln!(out, " FX BND {} {}", v.name, num(lo)).unwrap();
        } else if lo == f64::NEG_INFINITY && hi == f64::INFINITY {
            writeln!(out, " FR BND {}", v.name).unwrap();
        } else {
            if lo == f64::NEG_INFINITY {
                writeln!(out, " MI BND {}", v.name).unwrap();
            } else if lo != 0.0 {
                writeln!(out, " LO BND {} {}", v.name, num(lo)).unwrap();
            }
            if hi != f64::INFINITY {
                writeln!(out, " UP BND {} {}", v.name, num(hi)).unwrap();
            }
        }
    }
    out.push_str("ENDATA\n");
    Ok(out)
}

pub fn export_mps(model: &MilpModel, path: &Path) -> Result<()> {
    let text = to_mps_string(model)?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn import_mps(path: &Path) -> Result<MilpModel> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    from_mps_str(&text)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Section {
    None,
    Rows,
    Columns,
    Rhs,
    Bounds,
    End,
}

/// Parses free-format MPS (minimization, binary and continuous columns).
pub fn from_mps_str(text: &str) -> Result<MilpModel> {
    let mut model = MilpModel::new("");
    let mut meta: Option<ModelMetadata> = None;
    let mut section = Section::None;
    let mut obj_row: Option<String> = None;
    let mut row_index: HashMap<String, usize> = HashMap::new();
    let mut in_int = false;
    let mut int_cols: Vec<usize> = Vec::new();
    let mut bv_cols: Vec<usize> = Vec::new();
    let mut current_col: Option<usize> = None;

    for (ln, raw) in text.lines().enumerate() {
        let line_no = ln + 1;
        let err = |msg: String| Error::MpsParse { line: line_no, msg };
        if let Some(json) = raw.strip_prefix(META_TAG) {
            meta = Some(serde_json::from_str(json).map_err(|e| err(format!("bad metadata: {e}")))?);
            continue;
        }
        if raw.starts_with('*') || raw.trim().is_empty() {
            continue;
        }
        let tokens: Vec<&str> = raw.split_whitespace().collect();
        let indented = raw.starts_with(' ') || raw.starts_with('\t');
        if !indented {
            section = match tokens[0] {
                "NAME" => {
                    model.name = tokens.get(1).copied().unwrap_or("").to_string();
                    Section::None
                }
                "ROWS" => Section::Rows,
                "COLUMNS" => Section::Columns,
                "RHS" => Section::Rhs,
                "BOUNDS" => Section::Bounds,
                "ENDATA" => Section::End,
                "RANGES" => return Err(err("RANGES section is not supported".into())),
                "SOS" => return Err(err("SOS section is not supported".into())),
                "OBJSENSE" | "OBJSENCE" => return Err(err("only minimization models are supported".into())),
                other => return Err(err(format!("malformed section header {other:?}"))),
            };
            if section == Section::End {
                break;
            }
            continue;
        }
        match section {
            Section::None | Section::End => return Err(err("data line outside of a section".into())),
            Section::Rows => {
                if tokens.len() != 2 {
                    return Err(err("ROWS entries need a type and a name".into()));
                }
                let name = tokens[1].to_string();
                let sense = match tokens[0] {
                    "N" => {
                        if obj_row.is_some() {
                            return Err(err("more than one objective row".into()));
                        }
                        obj_row = Some(name);
                        continue;
                    }
                    "L" => Sense::Le,
                    "G" => Sense::Ge,
                    "E" => Sense::Eq,
                    t => return Err(err(format!("unknown row type {t:?}"))),
                };
                if row_index.contains_key(&name) || obj_row.as_deref() == Some(name.as_str()) {
                    return Err(err(format!("duplicate row {name}")));
                }
                row_index.insert(name.clone(), model.constraints.len());
                model.constraints.push(Constraint {
                    name,
                    coefs: Vec::new(),
                    sense,
                    rhs: 0.0,
                });
            }
            Section::Columns => {
                if tokens.len() >= 3 && tokens[1].trim_matches('\'') == "MARKER" {
                    match tokens[2].trim_matches('\'') {
                        "INTORG" => in_int = true,
                        "INTEND" => in_int = false,
                        m => return Err(err(format!("unknown marker {m:?}"))),
                    }
                    continue;
                }
                if tokens.len() != 3 && tokens.len() != 5 {
                    return Err(err("COLUMNS entries need a column and one or two row/value pairs".into()));
                }
                let name = tokens[0];
                let j = match current_col {
                    Some(j) if model.variables[j].name == name => j,
                    _ => {
                        if model.var_index.contains_key(name) {
                            return Err(err(format!("column {name} is not contiguous")));
                        }
                        let j = model.add_var(name, 0.0, f64::INFINITY, Integrality::Continuous);
                        if in_int {
                            int_cols.push(j);
                        }
                        current_col = Some(j);
                        j
                    }
                };
                for pair in tokens[1..].chunks(2) {
                    let value: f64 = pair[1]
                        .parse()
                        .map_err(|_| err(format!("bad number {:?}", pair[1])))?;
                    if obj_row.as_deref() == Some(pair[0]) {
                        if value != 0.0 {
                            model.set_objective(j, value);
                        }
                    } else {
                        let r = *row_index
                            .get(pair[0])
                            .ok_or_else(|| err(format!("unknown row {} in column {name}", pair[0])))?;
                        if value != 0.0 {
                            model.constraints[r].coefs.push((j, value));
                        }
                    }
                }
            }
            Section::Rhs => {
                if tokens.len() != 3 && tokens.len() != 5 {
                    return Err(err("RHS entries need a set name and one or two row/value pairs".into()));
                }
                for pair in tokens[1..].chunks(2) {
                    let value: f64 = pair[1]
                        .parse()
                        .map_err(|_| err(format!("bad number {:?}", pair[1])))?;
                    if obj_row.as_deref() == Some(pair[0]) {
                        return Err(err("objective constants are not supported".into()));
                    }
                    let r = *row_index
                        .get(pair[0])
                        .ok_or_else(|| err(format!("unknown row {} in RHS", pair[0])))?;
                    model.constraints[r].rhs = value;
                }
            }
            Section::Bounds => {
                if tokens.len() < 3 {
                    return Err(err("BOUNDS entries need a type, set name and column".into()));
                }
                let name = tokens[2];
                let j = model
                    .var(name)
                    .ok_or_else(|| err(format!("unknown variable {name} in BOUNDS")))?;
                let value = || -> Result<f64> {
                    tokens
                        .get(3)
                        .ok_or_else(|| err(format!("bound on {name} needs a value")))?
                        .parse()
                        .map_err(|_| err(format!("bad number {:?}", tokens[3])))
                };
                let v = &mut model.variables[j];
                match tokens[0] {
                    "LO" => v.lower = value()?,
                    "UP" => v.upper = value()?,
                    "FX" => {
                        let x = value()?;
                        v.lower = x;
                        v.upper = x;
                    }
                    "FR" => {
                        v.lower = f64::NEG_INFINITY;
                        v.upper = f64::INFINITY;
                    }
                    "MI" => v.lower = f64::NEG_INFINITY,
                    "PL" => v.upper = f64::INFINITY,
                    "BV" => {
                        v.lower = 0.0;
                        v.upper = 1.0;
                        bv_cols.push(j);
                    }
                    t => return Err(err(format!("unsupported bound type {t:?}"))),
                }
            }
        }
    }
    if section != Section::End {
        return Err(Error::MpsParse {
            line: text.lines().count(),
            msg: "missing ENDATA".into(),
        });
    }
    for j in int_cols.into_iter().chain(bv_cols) {
        let v: &mut Variable = &mut model.variables[j];
        if v.lower < 0.0 || v.upper > 1.0 {
            return Err(Error::Model(format!("general integer column {} is not supported", v.name)));
        }
        v.integrality = Integrality::Binary;
    }
    for c in &mut model.constraints {
        c.coefs.sort_by_key(|&(j, _)| j);
    }
    model.metadata = meta;
    model.validate()?;
    Ok(model)
}

/// LP-format text for inspection. Not meant to be read back.
pub fn to_lp_string(model: &MilpModel) -> String {
    let mut out = String::new();
    let term = |out: &mut String, a: f64, name: &str| {
        let sign = if a < 0.0 { '-' } else { '+' };
        write!(out, " {sign} {} {name}", a.abs()).unwrap();
    };
    writeln!(out, "\\ {}", model.name).unwrap();
    out.push_str("Minimize\n obj:");
    for &(j, a) in &model.objective {
        term(&mut out, a, &model.variables[j].name);
    }
    out.push_str("\nSubject To\n");
    for c in &model.constraints {
        write!(out, " {}:", c.name).unwrap();
        for &(j, a) in &c.coefs {
            term(&mut out, a, &model.variables[j].name);
        }
        let op = match c.sense {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        };
        writeln!(out, " {op} {}", c.rhs).unwrap();
    }
    out.push_str("Bounds\n");
    for v in &model.variables {
        if v.integrality == Integrality::Binary {
            continue;
        }
        writeln!(out, " {} <= {} <= {}", v.lower, v.name, v.upper).unwrap();
    }
    out.push_str("Binaries\n");
    for j in model.binaries() {
        writeln!(out, " {}", model.variables[j].name).unwrap();
    }
    out.push_str("End\n");
    out
}
